//! Event-detected mechanical billiards: Hamiltonian arcs interrupted by
//! elastic reflections at implicit walls, for the four settings of the study
//! (4D Hooke / centered quadrics, spatial Kepler / focused quadrics, reduced
//! two-center / spheres and cones, physical two-center / r-confocal
//! quadrics), together with the push-forward machinery relating them.

use crate::error::{RegulusError, Result};
use crate::geometry::{
    fit_surface_of_revolution, CenteredQuadric4, FocusedQuadric3, QuadricKind,
};
use crate::quat::{PureQuaternion, Quaternion};
use crate::systems::ode::Dopri5;
use crate::systems::{
    conserved_set, eval_grad, integrate, pack_phase_ih, rhs, unpack_phase_h,
    IntegrateOpts, SystemKind, SystemSpec, Trajectory, TrajectoryStats,
};
use crate::transforms::{
    bw_base, bw_phase, ks_forward, spherical_to_phase, BwPoint, LambdaHatPoint, SphericalState,
};
use serde::{Deserialize, Serialize};

/// Tolerance for localizing a wall crossing (|g| at the event point).
pub const EVENT_TOL: f64 = 1e-10;
/// Relative threshold below which an impact counts as grazing.
pub const GRAZING_TOL: f64 = 1e-10;

/// Reflection wall over a system's configuration space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "wall", rename_all = "snake_case")]
pub enum WallSurface {
    /// Centered quadric `zᵀAz = 1` in ℝ⁴ (Hooke side).
    Quadric4(CenteredQuadric4),
    /// Focused quadric / plane / sphere in ℝ³ (Kepler and two-center side).
    Focused3(FocusedQuadric3),
    /// Sphere `{r = r0}` in the reduced spherical chart.
    SphereR { r0: f64 },
    /// Cone `{ψ = ψ0}` around the axis of centers.
    ConePsi { psi0: f64 },
    /// The 3-sphere carrying a family of Birkhoff spheres
    /// `(sin θ z₀ - cos θ)² + |Im z|² sin²θ = 1` (Hooke-side wall).
    Birkhoff { theta: f64 },
}

impl WallSurface {
    pub fn compatible(&self, kind: SystemKind) -> bool {
        matches!(
            (self, kind),
            (WallSurface::Quadric4(_), SystemKind::Hooke4)
                | (WallSurface::Quadric4(_), SystemKind::TwoCenterTransformed)
                | (WallSurface::Birkhoff { .. }, SystemKind::Hooke4)
                | (WallSurface::Birkhoff { .. }, SystemKind::TwoCenterTransformed)
                | (WallSurface::Focused3(_), SystemKind::Kepler3)
                | (WallSurface::Focused3(_), SystemKind::Kepler3Reparam)
                | (WallSurface::Focused3(_), SystemKind::TwoCenter3)
                | (WallSurface::Focused3(_), SystemKind::Lagrange3)
                | (WallSurface::SphereR { .. }, SystemKind::KtildeSpherical)
                | (WallSurface::ConePsi { .. }, SystemKind::KtildeSpherical)
        )
    }

    /// Implicit wall value at a packed state (configuration part).
    pub fn g(&self, y: &[f64]) -> f64 {
        match self {
            WallSurface::Quadric4(q) => {
                q.wall_value(Quaternion::new(y[0], y[1], y[2], y[3]))
            }
            WallSurface::Focused3(s) => s.g(PureQuaternion::new(y[0], y[1], y[2])),
            WallSurface::SphereR { r0 } => y[0] - r0,
            WallSurface::ConePsi { psi0 } => y[1] - psi0,
            WallSurface::Birkhoff { theta } => {
                let (s, c) = theta.sin_cos();
                (s * y[0] - c).powi(2) + (y[1] * y[1] + y[2] * y[2] + y[3] * y[3]) * s * s - 1.0
            }
        }
    }

    /// Configuration-space gradient of `g`.
    pub fn grad(&self, y: &[f64]) -> Vec<f64> {
        match self {
            WallSurface::Quadric4(q) => {
                q.gradient(Quaternion::new(y[0], y[1], y[2], y[3])).to_array().to_vec()
            }
            WallSurface::Focused3(s) => {
                s.grad_g(PureQuaternion::new(y[0], y[1], y[2])).to_array().to_vec()
            }
            WallSurface::SphereR { .. } => vec![1.0, 0.0, 0.0],
            WallSurface::ConePsi { .. } => vec![0.0, 1.0, 0.0],
            WallSurface::Birkhoff { theta } => {
                let (s, c) = theta.sin_cos();
                vec![
                    2.0 * s * (s * y[0] - c),
                    2.0 * s * s * y[1],
                    2.0 * s * s * y[2],
                    2.0 * s * s * y[3],
                ]
            }
        }
    }
}

/// Parse the CLI wall shorthand: `sphere:r=2.0`, `cone:psi=1.0`,
/// `spheroid:b=0.8`, `hyperboloid:a=0.5,sheet=+`, `plane:x1=0`.
pub fn parse_wall_shorthand(s: &str) -> Result<WallSurface> {
    let err = |m: &str| RegulusError::Usage(format!("wall '{s}': {m}"));
    let (head, rest) = s.split_once(':').ok_or_else(|| err("expected kind:params"))?;
    let mut kv = std::collections::BTreeMap::new();
    for part in rest.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| err("expected key=value"))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<f64> {
        kv.get(k)
            .ok_or_else(|| err(&format!("missing parameter '{k}'")))?
            .parse::<f64>()
            .map_err(|_| err(&format!("parameter '{k}' is not a number")))
    };
    match head {
        "sphere" => Ok(WallSurface::SphereR { r0: get("r")? }),
        "cone" => Ok(WallSurface::ConePsi { psi0: get("psi")? }),
        "spheroid" => Ok(WallSurface::Focused3(crate::geometry::rconfocal_spheroid(get("b")?)?)),
        "hyperboloid" => {
            let sheet = kv.get("sheet").map(String::as_str).unwrap_or("+");
            Ok(WallSurface::Focused3(crate::geometry::rconfocal_hyperboloid(
                get("a")?,
                sheet != "-",
            )?))
        }
        "plane" => Ok(WallSurface::Focused3(FocusedQuadric3::plane(
            PureQuaternion::new(1.0, 0.0, 0.0),
            get("x1")?,
        )?)),
        "birkhoff" => Ok(WallSurface::Birkhoff { theta: get("theta")? }),
        other => Err(err(&format!("unknown wall kind '{other}'"))),
    }
}

/// Stopping rule for a billiard run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StopRule {
    pub max_reflections: usize,
    pub max_time: f64,
}

/// A billiard system: flow + walls + stopping rule.
#[derive(Debug, Clone)]
pub struct BilliardSpec {
    pub system: SystemSpec,
    pub walls: Vec<WallSurface>,
    pub stop: StopRule,
    pub opts: IntegrateOpts,
}

impl BilliardSpec {
    pub fn new(system: SystemSpec, walls: Vec<WallSurface>, stop: StopRule) -> Result<Self> {
        if walls.is_empty() {
            return Err(RegulusError::Usage("billiard needs at least one wall".into()));
        }
        for w in &walls {
            if !w.compatible(system.kind) {
                return Err(RegulusError::Usage(format!(
                    "wall {w:?} is not defined for system '{}'",
                    system.kind.name()
                )));
            }
        }
        Ok(Self { system, walls, stop, opts: IntegrateOpts::default() })
    }
}

/// One elastic reflection.
#[derive(Debug, Clone)]
pub struct ReflectionEvent {
    pub t: f64,
    pub wall: usize,
    /// Full state at the event, incoming momenta.
    pub y_in: Vec<f64>,
    /// Full state at the event, outgoing momenta.
    pub y_out: Vec<f64>,
    /// Configuration velocity before and after, and the wall normal used.
    pub v_in: Vec<f64>,
    pub v_out: Vec<f64>,
    pub normal: Vec<f64>,
}

/// Why a billiard run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    MaxReflections,
    MaxTime,
    /// Tangential impact; the orbit is truncated at the grazing point.
    Grazing { t: f64 },
}

/// Flow arcs separated by reflection events, with a per-arc table of the
/// system's conserved quantities (evaluated at each arc start).
#[derive(Debug, Clone)]
pub struct BilliardOrbit {
    pub arcs: Vec<Trajectory>,
    pub events: Vec<ReflectionEvent>,
    pub conserved_names: Vec<&'static str>,
    pub conserved_per_arc: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl BilliardOrbit {
    /// Largest deviation of a conserved quantity across all samples of all
    /// arcs, relative to its value at the initial state.
    pub fn max_drift(&self, spec: &SystemSpec, name: &str) -> Result<f64> {
        let c = conserved_set(spec)
            .into_iter()
            .find(|c| c.name == name)
            .ok_or_else(|| RegulusError::Usage(format!("unknown conserved quantity '{name}'")))?;
        let v0 = c.eval(spec, &self.arcs[0].states[0])?;
        let mut drift = 0.0f64;
        for arc in &self.arcs {
            for y in &arc.states {
                drift = drift.max((c.eval(spec, y)? - v0).abs());
            }
        }
        Ok(drift)
    }
}

/// Elastic reflection of a velocity at a wall normal (Euclidean):
/// `v' = v - 2 (⟨v,n⟩ / ⟨n,n⟩) n`.
pub fn reflect_velocity(v: &[f64], n: &[f64]) -> Result<Vec<f64>> {
    let nn: f64 = n.iter().map(|a| a * a).sum();
    if nn == 0.0 {
        return Err(RegulusError::Domain("zero normal vector".into()));
    }
    let vn: f64 = v.iter().zip(n).map(|(a, b)| a * b).sum();
    Ok(v.iter().zip(n).map(|(a, b)| a - 2.0 * vn / nn * b).collect())
}

/// Diagonal of the inverse mass matrix `M` in `H = ½ pᵀMp + V`, so that the
/// configuration velocity is `q̇ = M p`.
fn mass_diag(kind: SystemKind, y: &[f64]) -> Vec<f64> {
    match kind {
        SystemKind::Hooke4 | SystemKind::TwoCenterTransformed => vec![0.25; 4],
        SystemKind::Kepler3 | SystemKind::TwoCenter3 | SystemKind::Lagrange3 => vec![1.0; 3],
        SystemKind::Kepler3Reparam => {
            let q = PureQuaternion::new(y[0], y[1], y[2]);
            vec![q.norm(); 3]
        }
        SystemKind::KtildeSpherical => {
            let (r, psi) = (y[0], y[1]);
            let r2 = r * r;
            let sp2 = psi.sin().powi(2);
            vec![r2, 1.0, 1.0 / sp2 + 4.0 * r2 / ((r2 - 1.0) * (r2 - 1.0))]
        }
    }
}

/// Reflect the momentum half of a packed state at a configuration-space
/// normal, elastically with respect to the kinetic metric:
/// `p' = p - 2 (nᵀMp / nᵀMn) n`.
pub fn reflect_momentum(kind: SystemKind, y: &[f64], normal: &[f64]) -> Result<Vec<f64>> {
    let n = y.len() / 2;
    let m = mass_diag(kind, y);
    let nmp: f64 = (0..n).map(|i| normal[i] * m[i] * y[n + i]).sum();
    let nmn: f64 = (0..n).map(|i| normal[i] * m[i] * normal[i]).sum();
    if nmn == 0.0 {
        return Err(RegulusError::Domain("zero normal vector".into()));
    }
    let mut out = y.to_vec();
    for i in 0..n {
        out[n + i] -= 2.0 * nmp / nmn * normal[i];
    }
    Ok(out)
}

/// Configuration velocity `q̇ = ∂H/∂p` at a packed state.
pub fn config_velocity(spec: &SystemSpec, y: &[f64]) -> Result<Vec<f64>> {
    let g = eval_grad(spec, y)?;
    let n = y.len() / 2;
    Ok(g[n..].to_vec())
}

/// Run the billiard: alternate Hamiltonian arcs and reflections. Wall
/// crossings are bracketed on dense-output samples (eight per accepted step)
/// and localized by bisection to `|g| ≤ 1e-10`.
pub fn run_billiard(spec: &BilliardSpec, y0: &[f64]) -> Result<BilliardOrbit> {
    let sys = &spec.system;
    if y0.len() != sys.kind.dim() {
        return Err(RegulusError::Usage("initial state dimension mismatch".into()));
    }
    let arm_threshold = 1e3 * EVENT_TOL;
    let sides: Vec<f64> = spec
        .walls
        .iter()
        .map(|w| {
            let g = w.g(y0);
            if g.abs() <= arm_threshold {
                Err(RegulusError::Usage(format!(
                    "initial state sits on wall (g = {g:.3e})"
                )))
            } else {
                Ok(g.signum())
            }
        })
        .collect::<Result<_>>()?;

    let conserved = conserved_set(sys);
    let conserved_names: Vec<&'static str> = conserved.iter().map(|c| c.name).collect();

    let mut opts = spec.opts;
    if !opts.max_step.is_finite() {
        opts.max_step = 0.2;
    }
    let local = *sys;
    let mut arcs: Vec<Trajectory> = Vec::new();
    let mut events: Vec<ReflectionEvent> = Vec::new();
    let mut conserved_per_arc: Vec<Vec<f64>> = Vec::new();
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let termination;

    'outer: loop {
        // start a new arc
        let mut arc = Trajectory {
            times: vec![t],
            states: vec![y.clone()],
            stats: TrajectoryStats::default(),
        };
        conserved_per_arc.push(
            conserved.iter().map(|c| c.eval(sys, &y).unwrap_or(f64::NAN)).collect(),
        );
        let f = move |tt: f64, yy: &[f64], dy: &mut [f64]| rhs(&local, tt, yy, dy);
        let mut stepper = Dopri5::new(f, t, y.clone(), 1.0, opts.to_ode())?;
        let mut armed: Vec<bool> =
            spec.walls.iter().map(|w| w.g(&y).abs() > arm_threshold).collect();

        loop {
            if stepper.t >= spec.stop.max_time {
                arcs.push(arc);
                termination = Termination::MaxTime;
                break 'outer;
            }
            let dense = stepper.step(spec.stop.max_time)?;
            // scan eight dense samples plus the endpoint for sign changes
            let mut hit: Option<(usize, f64, f64)> = None; // wall, t_lo, t_hi
            let nsub = 8usize;
            'scan: for (wi, wall) in spec.walls.iter().enumerate() {
                let mut t_prev = dense.t0;
                let mut g_prev = wall.g(&dense.eval(t_prev));
                for k in 1..=nsub {
                    let tk = dense.t0 + (dense.t1 - dense.t0) * (k as f64 / nsub as f64);
                    let gk = wall.g(&dense.eval(tk));
                    if !armed[wi] {
                        if gk.abs() > arm_threshold {
                            armed[wi] = true;
                        }
                    } else if gk.signum() != sides[wi] && gk != 0.0 || gk == 0.0 {
                        match hit {
                            Some((_, lo, _)) if lo <= t_prev => {}
                            _ => hit = Some((wi, t_prev, tk)),
                        }
                        continue 'scan;
                    }
                    t_prev = tk;
                    g_prev = gk;
                }
                let _ = g_prev;
            }

            let Some((wi, mut lo, mut hi)) = hit else {
                arc.times.push(stepper.t);
                arc.states.push(stepper.y.clone());
                continue;
            };

            // bisect the dense interpolant to |g| ≤ EVENT_TOL
            let wall = &spec.walls[wi];
            let mut t_ev = hi;
            let mut y_ev = dense.eval(t_ev);
            for iter in 0..200 {
                let tm = 0.5 * (lo + hi);
                let ym = dense.eval(tm);
                let gm = wall.g(&ym);
                if gm.abs() <= EVENT_TOL {
                    t_ev = tm;
                    y_ev = ym;
                    break;
                }
                if gm.signum() == sides[wi] {
                    lo = tm;
                } else {
                    hi = tm;
                }
                if iter == 199 {
                    return Err(RegulusError::Numerical(format!(
                        "event localization did not reach |g| ≤ {EVENT_TOL:.1e} (|g| = {:.3e})",
                        gm.abs()
                    )));
                }
            }

            // corner detection: another wall within the event tolerance
            for (wj, other) in spec.walls.iter().enumerate() {
                if wj != wi && other.g(&y_ev).abs() <= EVENT_TOL {
                    return Err(RegulusError::Corner { t: t_ev, w1: wi, w2: wj });
                }
            }

            let normal = wall.grad(&y_ev);
            let v_in = config_velocity(sys, &y_ev)?;
            let vn: f64 = v_in.iter().zip(&normal).map(|(a, b)| a * b).sum();
            let vnorm = v_in.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nnorm = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
            if vn.abs() < GRAZING_TOL * vnorm * nnorm {
                arc.times.push(t_ev);
                arc.states.push(y_ev.clone());
                arcs.push(arc);
                termination = Termination::Grazing { t: t_ev };
                break 'outer;
            }

            let y_out = reflect_momentum(sys.kind, &y_ev, &normal)?;
            let v_out = config_velocity(sys, &y_out)?;
            arc.times.push(t_ev);
            arc.states.push(y_ev.clone());
            arc.stats.steps = stepper.stats.steps;
            arc.stats.rejected = stepper.stats.rejected;
            arcs.push(arc);
            events.push(ReflectionEvent {
                t: t_ev,
                wall: wi,
                y_in: y_ev.clone(),
                y_out: y_out.clone(),
                v_in,
                v_out,
                normal,
            });
            t = t_ev;
            y = y_out;
            if events.len() >= spec.stop.max_reflections {
                // record the trailing point as a zero-length arc for the table
                arcs.push(Trajectory {
                    times: vec![t],
                    states: vec![y.clone()],
                    stats: TrajectoryStats::default(),
                });
                conserved_per_arc.push(
                    conserved.iter().map(|c| c.eval(sys, &y).unwrap_or(f64::NAN)).collect(),
                );
                termination = Termination::MaxReflections;
                break 'outer;
            }
            continue 'outer;
        }
    }

    Ok(BilliardOrbit {
        arcs,
        events,
        conserved_names,
        conserved_per_arc,
        termination,
    })
}

/// Integrate a flow and report the states at the exact requested times.
pub fn integrate_at_times(
    spec: &SystemSpec,
    y0: &[f64],
    t0: f64,
    times: &[f64],
    opts: IntegrateOpts,
) -> Result<Vec<Vec<f64>>> {
    let local = *spec;
    let f = move |tt: f64, yy: &[f64], dy: &mut [f64]| rhs(&local, tt, yy, dy);
    let mut stepper = Dopri5::new(f, t0, y0.to_vec(), 1.0, opts.to_ode())?;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t0 {
            return Err(RegulusError::Usage("times must be ≥ t0".into()));
        }
        while stepper.t < target * (1.0 - 1e-15) - 1e-300 {
            stepper.step(target)?;
        }
        out.push(stepper.y.clone());
    }
    Ok(out)
}

/// Push a restricted 4D Hooke billiard orbit through the K.S. map into the
/// spatial Kepler picture. Times are preserved: the image arcs are orbits of
/// the reparametrized Kepler flow `K` with the same time parameter.
pub fn push_orbit_ks(orbit: &BilliardOrbit, hooke: &SystemSpec) -> Result<BilliardOrbit> {
    if hooke.kind != SystemKind::Hooke4 {
        return Err(RegulusError::Usage("source orbit must be a hooke4 billiard".into()));
    }
    let kepler = SystemSpec::kepler3_reparam(hooke.m, hooke.f);
    let map_state = |y: &[f64]| -> Result<Vec<f64>> {
        let pt = unpack_phase_h(y);
        if !pt.on_sigma1(1e-8) {
            return Err(RegulusError::Constraint(format!(
                "orbit drifted off Σ¹ (BL = {:.3e})",
                pt.sigma_residual()
            )));
        }
        Ok(pack_phase_ih(&ks_forward(&pt)?))
    };
    let mut arcs = Vec::with_capacity(orbit.arcs.len());
    for arc in &orbit.arcs {
        let states = arc.states.iter().map(|y| map_state(y)).collect::<Result<Vec<_>>>()?;
        arcs.push(Trajectory { times: arc.times.clone(), states, stats: arc.stats });
    }
    let mut events = Vec::with_capacity(orbit.events.len());
    for ev in &orbit.events {
        let y_in = map_state(&ev.y_in)?;
        let y_out = map_state(&ev.y_out)?;
        let v_in = config_velocity(&kepler, &y_in)?;
        let v_out = config_velocity(&kepler, &y_out)?;
        // the push-forward of a Σ-vector v at z is 2 z̄ i v
        let z = Quaternion::new(ev.y_in[0], ev.y_in[1], ev.y_in[2], ev.y_in[3]);
        let nq = Quaternion::new(ev.normal[0], ev.normal[1], ev.normal[2], ev.normal[3]);
        let pushed_n = (crate::quat::mul(crate::quat::mul(z.conj(), crate::quat::I), nq) * 2.0).im();
        events.push(ReflectionEvent {
            t: ev.t,
            wall: ev.wall,
            y_in,
            y_out,
            v_in,
            v_out,
            normal: pushed_n.to_array().to_vec(),
        });
    }
    let conserved = conserved_set(&kepler);
    let conserved_names: Vec<&'static str> = conserved.iter().map(|c| c.name).collect();
    let conserved_per_arc = arcs
        .iter()
        .map(|a| conserved.iter().map(|c| c.eval(&kepler, &a.states[0]).unwrap_or(f64::NAN)).collect())
        .collect();
    Ok(BilliardOrbit {
        arcs,
        events,
        conserved_names,
        conserved_per_arc,
        termination: orbit.termination,
    })
}

/// Map a reduced spherical state (with `P_θ = 0`, at fiber angle `θ = 0`)
/// into the physical two-center phase space through the Birkhoff-Waldvogel
/// transformation.
pub fn bw_push_state(y: &[f64]) -> Result<Vec<f64>> {
    let st = SphericalState::new(y[0], y[1], y[2], 0.0, y[3], y[4], y[5], 0.0)?;
    let pt = spherical_to_phase(&st)?;
    let lam = LambdaHatPoint::new(pt.z, pt.w, 1e-8)?;
    let (x, yv) = bw_phase(&lam)?;
    Ok(vec![x.x, x.y, x.z, yv.x, yv.y, yv.z])
}

/// Fit the Birkhoff-Waldvogel image of a reduced wall `{r = r0}` or
/// `{ψ = ψ0}` as an r-confocal quadric (or the degenerate bisector plane),
/// using the least-squares fit oracle over mapped wall samples.
pub fn bw_wall_image(wall: &WallSurface) -> Result<FocusedQuadric3> {
    let mut pts = Vec::new();
    let n = 48usize;
    for a in 0..n {
        for b in 0..n / 2 {
            let (r, psi) = match wall {
                WallSurface::SphereR { r0 } => {
                    (*r0, 0.15 + (std::f64::consts::PI - 0.3) * (b as f64 + 0.5) / (n / 2) as f64)
                }
                WallSurface::ConePsi { psi0 } => {
                    (0.3 + 2.6 * (b as f64 + 0.5) / (n / 2) as f64, *psi0)
                }
                _ => {
                    return Err(RegulusError::Usage(
                        "only reduced sphere/cone walls have r-confocal images".into(),
                    ))
                }
            };
            if (r - 1.0).abs() < 0.05 {
                continue;
            }
            let kappa = std::f64::consts::TAU * (a as f64 + 0.5) / n as f64;
            let z = crate::transforms::z_theta(r, psi, kappa, 0.0);
            if let Ok(BwPoint::Finite(x)) = bw_base(z) {
                pts.push(x);
            }
        }
    }
    if pts.len() < 32 {
        return Err(RegulusError::Numerical("too few mapped wall samples".into()));
    }
    let focus = PureQuaternion::new(1.0, 0.0, 0.0);
    let fit = fit_surface_of_revolution(&pts, focus)?;
    let res = crate::geometry::surface_residual(&fit, &pts);
    if res > 1e-8 {
        return Err(RegulusError::Numerical(format!(
            "r-confocal fit residual {res:.3e} exceeds 1e-8"
        )));
    }
    // sanity: foci of the fitted conic sit at the Kepler centers ±i
    if let Some(foci) = fit.foci() {
        if fit.kind != QuadricKind::CenteredSphere {
            let c1 = PureQuaternion::new(1.0, 0.0, 0.0);
            let ok = ((foci[0] - c1).norm() < 1e-6 && (foci[1] + c1).norm() < 1e-6)
                || ((foci[0] + c1).norm() < 1e-6 && (foci[1] - c1).norm() < 1e-6);
            if !ok {
                return Err(RegulusError::Numerical("fitted wall is not r-confocal".into()));
            }
        }
    }
    Ok(fit)
}

/// Push a reduced two-center billiard orbit into the physical two-center
/// picture. Times are the reduced flow parameter, not physical time; arcs and
/// reflection points correspond as point sets.
pub fn push_orbit_bw(orbit: &BilliardOrbit, reduced: &SystemSpec) -> Result<BilliardOrbit> {
    if reduced.kind != SystemKind::KtildeSpherical {
        return Err(RegulusError::Usage("source orbit must be a reduced two-center billiard".into()));
    }
    let physical = if reduced.m0 == 0.0 {
        SystemSpec::twocenter3(reduced.f, reduced.m1, reduced.m2)
    } else {
        SystemSpec::lagrange3(reduced.f, reduced.m0, reduced.m1, reduced.m2)
    };
    let mut arcs = Vec::with_capacity(orbit.arcs.len());
    for arc in &orbit.arcs {
        let states = arc.states.iter().map(|y| bw_push_state(y)).collect::<Result<Vec<_>>>()?;
        arcs.push(Trajectory { times: arc.times.clone(), states, stats: arc.stats });
    }
    let mut events = Vec::with_capacity(orbit.events.len());
    for ev in &orbit.events {
        let y_in = bw_push_state(&ev.y_in)?;
        let y_out = bw_push_state(&ev.y_out)?;
        let v_in = config_velocity(&physical, &y_in)?;
        let v_out = config_velocity(&physical, &y_out)?;
        events.push(ReflectionEvent {
            t: ev.t,
            wall: ev.wall,
            y_in,
            y_out,
            v_in,
            v_out,
            normal: vec![0.0; 3], // filled against the fitted wall by callers
        });
    }
    let conserved = conserved_set(&physical);
    let conserved_names: Vec<&'static str> = conserved.iter().map(|c| c.name).collect();
    let conserved_per_arc = arcs
        .iter()
        .map(|a| {
            conserved.iter().map(|c| c.eval(&physical, &a.states[0]).unwrap_or(f64::NAN)).collect()
        })
        .collect();
    Ok(BilliardOrbit {
        arcs,
        events,
        conserved_names,
        conserved_per_arc,
        termination: orbit.termination,
    })
}

/// Residual of the elastic reflection law at an event against a given wall
/// normal: `|v_out - reflect(v_in)| / |v_in|`.
pub fn reflection_law_residual(v_in: &[f64], v_out: &[f64], normal: &[f64]) -> Result<f64> {
    let expected = reflect_velocity(v_in, normal)?;
    let num: f64 = expected
        .iter()
        .zip(v_out)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = v_in.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(num / den.max(1e-300))
}

/// Simulate the continuation used by CLI round trips: a plain flow between
/// walls when no wall list is given.
pub fn flow_only(spec: &SystemSpec, y0: &[f64], t_span: (f64, f64), opts: IntegrateOpts) -> Result<Trajectory> {
    integrate(spec, y0, t_span, opts)
}
