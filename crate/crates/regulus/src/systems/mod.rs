//! Hamiltonian systems of the study and their numerical flows: the
//! 4-dimensional Hooke problem, the spatial Kepler problem and its
//! time-reparametrized zero-energy form, the spatial two-center problem, its
//! Birkhoff-Waldvogel transform, the reduced spherical two-center system, and
//! the Lagrange problem.

pub mod ode;

use crate::error::{RegulusError, Result};
use crate::quat::{bl, PureQuaternion, Quaternion};
use crate::transforms::{PhasePointH, PhasePointIH};
use crate::DEFAULT_EXCLUSION;
use ode::{Dopri5, OdeOpts, OdeStats};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `H = |w|²/8 + f|z|² + m` on T*ℍ.
    Hooke4,
    /// `H = |P|²/2 + m/|Q| + f` on T*(𝕀ℍ \ 0).
    Kepler3,
    /// `K = |P|²|Q|/2 + m + f|Q|`; its zero-energy flow is the Kepler flow up
    /// to the time reparametrization by `|Q|⁻¹`.
    Kepler3Reparam,
    /// Shifted two-center Hamiltonian `|y|²/2 + m1/|x-i| + m2/|x+i| - f`.
    TwoCenter3,
    /// The Birkhoff-Waldvogel transformed two-center Hamiltonian `K` on T*ℍ,
    /// regular at the double collisions `z = ±i`.
    TwoCenterTransformed,
    /// The reduced transformed two-center (or Lagrange) system `K̃ = K̃₁ + K̃₂`
    /// in the spherical chart `(r, ψ, κ)` with `P_θ = 0`.
    KtildeSpherical,
    /// Shifted Lagrange Hamiltonian: two centers plus the oscillator `m0|x|²`.
    Lagrange3,
}

impl SystemKind {
    pub fn dim(self) -> usize {
        match self {
            SystemKind::Hooke4 | SystemKind::TwoCenterTransformed => 8,
            _ => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Hooke4 => "hooke4",
            SystemKind::Kepler3 => "kepler3",
            SystemKind::Kepler3Reparam => "kepler3_reparam",
            SystemKind::TwoCenter3 => "twocenter3",
            SystemKind::TwoCenterTransformed => "twocenter_transformed",
            SystemKind::KtildeSpherical => "ktilde_spherical",
            SystemKind::Lagrange3 => "lagrange3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "hooke4" => SystemKind::Hooke4,
            "kepler3" => SystemKind::Kepler3,
            "kepler3_reparam" | "kepler_reparam" => SystemKind::Kepler3Reparam,
            "twocenter3" => SystemKind::TwoCenter3,
            "twocenter_transformed" => SystemKind::TwoCenterTransformed,
            "ktilde" | "ktilde_spherical" => SystemKind::KtildeSpherical,
            "lagrange3" => SystemKind::Lagrange3,
            other => return Err(RegulusError::Usage(format!("unknown system kind '{other}'"))),
        })
    }

    /// Coordinate-component names, momenta after positions.
    pub fn state_labels(self) -> Vec<&'static str> {
        match self {
            SystemKind::Hooke4 | SystemKind::TwoCenterTransformed => {
                vec!["z0", "z1", "z2", "z3", "w0", "w1", "w2", "w3"]
            }
            SystemKind::Kepler3 | SystemKind::Kepler3Reparam => {
                vec!["Q1", "Q2", "Q3", "P1", "P2", "P3"]
            }
            SystemKind::TwoCenter3 | SystemKind::Lagrange3 => {
                vec!["x1", "x2", "x3", "y1", "y2", "y3"]
            }
            SystemKind::KtildeSpherical => vec!["r", "psi", "kappa", "p_r", "p_psi", "p_kappa"],
        }
    }
}

/// System descriptor. Sign conventions follow the shifted Hamiltonians:
/// attractive Kepler/two-center dynamics means `m, m1, m2 < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    /// Energy shift (Hooke spring constant side: `f|z|²`).
    #[serde(default)]
    pub f: f64,
    /// Kepler strength.
    #[serde(default)]
    pub m: f64,
    /// First center strength.
    #[serde(default)]
    pub m1: f64,
    /// Second center strength.
    #[serde(default)]
    pub m2: f64,
    /// Lagrange oscillator strength.
    #[serde(default)]
    pub m0: f64,
    /// Singularity exclusion radius.
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
}

fn default_exclusion() -> f64 {
    DEFAULT_EXCLUSION
}

impl SystemSpec {
    pub fn new(kind: SystemKind) -> Self {
        Self { kind, f: 0.0, m: 0.0, m1: 0.0, m2: 0.0, m0: 0.0, exclusion: DEFAULT_EXCLUSION }
    }

    pub fn hooke4(f: f64, m: f64) -> Self {
        Self { f, m, ..Self::new(SystemKind::Hooke4) }
    }

    pub fn kepler3(m: f64, f: f64) -> Self {
        Self { m, f, ..Self::new(SystemKind::Kepler3) }
    }

    pub fn kepler3_reparam(m: f64, f: f64) -> Self {
        Self { m, f, ..Self::new(SystemKind::Kepler3Reparam) }
    }

    pub fn twocenter3(f: f64, m1: f64, m2: f64) -> Self {
        Self { f, m1, m2, ..Self::new(SystemKind::TwoCenter3) }
    }

    pub fn twocenter_transformed(f: f64, m1: f64, m2: f64) -> Self {
        Self { f, m1, m2, ..Self::new(SystemKind::TwoCenterTransformed) }
    }

    pub fn ktilde(f: f64, m1: f64, m2: f64, m0: f64) -> Self {
        Self { f, m1, m2, m0, ..Self::new(SystemKind::KtildeSpherical) }
    }

    pub fn lagrange3(f: f64, m0: f64, m1: f64, m2: f64) -> Self {
        Self { f, m0, m1, m2, ..Self::new(SystemKind::Lagrange3) }
    }
}

pub fn pack_phase_h(pt: &PhasePointH) -> Vec<f64> {
    let z = pt.z.to_array();
    let w = pt.w.to_array();
    vec![z[0], z[1], z[2], z[3], w[0], w[1], w[2], w[3]]
}

pub fn unpack_phase_h(y: &[f64]) -> PhasePointH {
    PhasePointH::new(
        Quaternion::new(y[0], y[1], y[2], y[3]),
        Quaternion::new(y[4], y[5], y[6], y[7]),
    )
}

pub fn pack_phase_ih(pt: &PhasePointIH) -> Vec<f64> {
    vec![pt.q.x, pt.q.y, pt.q.z, pt.p.x, pt.p.y, pt.p.z]
}

pub fn unpack_phase_ih(y: &[f64]) -> PhasePointIH {
    PhasePointIH::new(
        PureQuaternion::new(y[0], y[1], y[2]),
        PureQuaternion::new(y[3], y[4], y[5]),
    )
}

/// The two separated parts of the reduced Hamiltonian. `K̃ = K̃₁ + K̃₂` holds
/// exactly because `eval_h` sums precisely these two expressions.
pub fn ktilde_parts(spec: &SystemSpec, y: &[f64]) -> Result<(f64, f64)> {
    let (r, psi) = (y[0], y[1]);
    let (p_r, p_psi, p_kappa) = (y[3], y[4], y[5]);
    if r <= 0.0 {
        return Err(RegulusError::Singular("r must be positive".into()));
    }
    if (r - 1.0).abs() < spec.exclusion && p_kappa != 0.0 {
        return Err(RegulusError::Singular("K̃ singular at r = 1 with P_κ ≠ 0".into()));
    }
    let sp = psi.sin();
    if sp.abs() < spec.exclusion && p_kappa != 0.0 {
        return Err(RegulusError::Singular("K̃ singular at ψ ∈ {0, π} with P_κ ≠ 0".into()));
    }
    let r2 = r * r;
    let big_r = (r2 + 1.0) * (r2 + 1.0) / (4.0 * r2);
    let denom = (r2 - 1.0) * (r2 - 1.0);
    let k1 = 0.5 * r2 * p_r * p_r
        + 2.0 * r2 * p_kappa * p_kappa / denom
        + (spec.m1 + spec.m2) * (r2 + 1.0) / (2.0 * r)
        - spec.f * big_r
        + spec.m0 * (big_r * big_r - big_r);
    let cp = psi.cos();
    let centrifugal = if p_kappa == 0.0 { 0.0 } else { p_kappa * p_kappa / (2.0 * sp * sp) };
    let k2 = 0.5 * p_psi * p_psi
        + centrifugal
        + spec.f * cp * cp
        + (spec.m1 - spec.m2) * cp
        + spec.m0 * sp * sp * cp * cp;
    Ok((k1, k2))
}

/// Hamiltonian value at a packed state.
pub fn eval_h(spec: &SystemSpec, y: &[f64]) -> Result<f64> {
    match spec.kind {
        SystemKind::Hooke4 => {
            let pt = unpack_phase_h(y);
            Ok(pt.w.norm_sq() / 8.0 + spec.f * pt.z.norm_sq() + spec.m)
        }
        SystemKind::Kepler3 => {
            let pt = unpack_phase_ih(y);
            let qn = pt.q.norm();
            if qn < spec.exclusion {
                return Err(RegulusError::Singular("Kepler collision".into()));
            }
            Ok(0.5 * pt.p.norm_sq() + spec.m / qn + spec.f)
        }
        SystemKind::Kepler3Reparam => {
            let pt = unpack_phase_ih(y);
            Ok(0.5 * pt.p.norm_sq() * pt.q.norm() + spec.m + spec.f * pt.q.norm())
        }
        SystemKind::TwoCenter3 | SystemKind::Lagrange3 => {
            let pt = unpack_phase_ih(y);
            let center = PureQuaternion::new(1.0, 0.0, 0.0);
            let d1 = (pt.q - center).norm();
            let d2 = (pt.q + center).norm();
            if d1 < spec.exclusion || d2 < spec.exclusion {
                return Err(RegulusError::Singular("two-center collision".into()));
            }
            let mut h = 0.5 * pt.p.norm_sq() + spec.m1 / d1 + spec.m2 / d2 - spec.f;
            if spec.kind == SystemKind::Lagrange3 {
                h += spec.m0 * pt.q.norm_sq();
            }
            Ok(h)
        }
        SystemKind::TwoCenterTransformed => {
            let pt = unpack_phase_h(y);
            let rho = 2.0 * pt.z.im().norm();
            if rho < spec.exclusion {
                return Err(RegulusError::Singular(
                    "transformed flow singular on the real line".into(),
                ));
            }
            let up = (pt.z + crate::quat::I).norm_sq();
            let um = (pt.z - crate::quat::I).norm_sq();
            Ok(pt.w.norm_sq() / 8.0 + (spec.m1 * up + spec.m2 * um) / rho.powi(3)
                - spec.f * up * um / rho.powi(4))
        }
        SystemKind::KtildeSpherical => {
            let (k1, k2) = ktilde_parts(spec, y)?;
            Ok(k1 + k2)
        }
    }
}

/// Gradient `∂H/∂y` of the Hamiltonian at a packed state.
pub fn eval_grad(spec: &SystemSpec, y: &[f64]) -> Result<Vec<f64>> {
    match spec.kind {
        SystemKind::Hooke4 => {
            let mut g = vec![0.0; 8];
            for i in 0..4 {
                g[i] = 2.0 * spec.f * y[i];
                g[4 + i] = y[4 + i] / 4.0;
            }
            Ok(g)
        }
        SystemKind::Kepler3 => {
            let pt = unpack_phase_ih(y);
            let qn = pt.q.norm();
            if qn < spec.exclusion {
                return Err(RegulusError::Singular("Kepler collision".into()));
            }
            let gq = pt.q * (-spec.m / qn.powi(3));
            Ok(vec![gq.x, gq.y, gq.z, pt.p.x, pt.p.y, pt.p.z])
        }
        SystemKind::Kepler3Reparam => {
            let pt = unpack_phase_ih(y);
            let qn = pt.q.norm();
            if qn < spec.exclusion {
                return Err(RegulusError::Singular("reparametrized flow at Q = 0".into()));
            }
            let gq = pt.q * ((0.5 * pt.p.norm_sq() + spec.f) / qn);
            let gp = pt.p * qn;
            Ok(vec![gq.x, gq.y, gq.z, gp.x, gp.y, gp.z])
        }
        SystemKind::TwoCenter3 | SystemKind::Lagrange3 => {
            let pt = unpack_phase_ih(y);
            let center = PureQuaternion::new(1.0, 0.0, 0.0);
            let r1 = pt.q - center;
            let r2 = pt.q + center;
            let (d1, d2) = (r1.norm(), r2.norm());
            if d1 < spec.exclusion || d2 < spec.exclusion {
                return Err(RegulusError::Singular("two-center collision".into()));
            }
            let mut gq = r1 * (-spec.m1 / d1.powi(3)) + r2 * (-spec.m2 / d2.powi(3));
            if spec.kind == SystemKind::Lagrange3 {
                gq = gq + pt.q * (2.0 * spec.m0);
            }
            Ok(vec![gq.x, gq.y, gq.z, pt.p.x, pt.p.y, pt.p.z])
        }
        SystemKind::TwoCenterTransformed => {
            let pt = unpack_phase_h(y);
            let z = pt.z;
            let rho = 2.0 * z.im().norm();
            if rho < spec.exclusion {
                return Err(RegulusError::Singular(
                    "transformed flow singular on the real line".into(),
                ));
            }
            let i = crate::quat::I;
            let up = (z + i).norm_sq();
            let um = (z - i).norm_sq();
            let gup = (z + i) * 2.0;
            let gum = (z - i) * 2.0;
            // ∇ρ = (0, 4z1/ρ, 4z2/ρ, 4z3/ρ)
            let grho = Quaternion::new(0.0, 4.0 * z.x / rho, 4.0 * z.y / rho, 4.0 * z.z / rho);
            let r3 = rho.powi(3);
            let r4 = rho * r3;
            let r5 = rho * r4;
            let gz = gup * (spec.m1 / r3) + gum * (spec.m2 / r3)
                - grho * (3.0 * (spec.m1 * up + spec.m2 * um) / r4)
                - (gup * um + gum * up) * (spec.f / r4)
                + grho * (4.0 * spec.f * up * um / r5);
            let mut g = vec![0.0; 8];
            let gza = gz.to_array();
            for k in 0..4 {
                g[k] = gza[k];
                g[4 + k] = y[4 + k] / 4.0;
            }
            Ok(g)
        }
        SystemKind::KtildeSpherical => {
            let (r, psi) = (y[0], y[1]);
            let (p_r, p_psi, p_kappa) = (y[3], y[4], y[5]);
            // reuse the guards
            ktilde_parts(spec, y)?;
            let r2 = r * r;
            let denom = (r2 - 1.0) * (r2 - 1.0);
            let big_r = (r2 + 1.0) * (r2 + 1.0) / (4.0 * r2);
            let dbig_r = (r2 + 1.0) * (r2 - 1.0) / (2.0 * r2 * r);
            let dk_dr = r * p_r * p_r
                - 4.0 * r * (r2 + 1.0) * p_kappa * p_kappa / ((r2 - 1.0) * denom)
                + (spec.m1 + spec.m2) * (r2 - 1.0) / (2.0 * r2)
                + (-spec.f + spec.m0 * (2.0 * big_r - 1.0)) * dbig_r;
            let (sp, cp) = (psi.sin(), psi.cos());
            let centrifugal_dpsi =
                if p_kappa == 0.0 { 0.0 } else { -p_kappa * p_kappa * cp / (sp * sp * sp) };
            let dk_dpsi = centrifugal_dpsi - 2.0 * spec.f * cp * sp - (spec.m1 - spec.m2) * sp
                + 0.5 * spec.m0 * (4.0 * psi).sin();
            let dk_dpr = r2 * p_r;
            let dk_dppsi = p_psi;
            let centrifugal_dpk = if p_kappa == 0.0 { 0.0 } else { p_kappa / (sp * sp) };
            let dk_dpk = centrifugal_dpk + 4.0 * r2 * p_kappa / denom;
            Ok(vec![dk_dr, dk_dpsi, 0.0, dk_dpr, dk_dppsi, dk_dpk])
        }
    }
}

/// Canonical right-hand side: with layout `[q, p]`,
/// `q̇ = ∂H/∂p`, `ṗ = -∂H/∂q`.
pub fn rhs(spec: &SystemSpec, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let g = eval_grad(spec, y)?;
    let n = y.len() / 2;
    for i in 0..n {
        dy[i] = g[n + i];
        dy[n + i] = -g[i];
    }
    Ok(())
}

/// Named first integrals of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservedKind {
    Hamiltonian,
    BilinearForm,
    Ktilde,
    Ktilde1,
    Ktilde2,
    PKappa,
    AngularMomentum(usize),
    MomentMap,
}

#[derive(Debug, Clone, Copy)]
pub struct Conserved {
    pub name: &'static str,
    pub kind: ConservedKind,
}

impl Conserved {
    pub fn eval(&self, spec: &SystemSpec, y: &[f64]) -> Result<f64> {
        match self.kind {
            ConservedKind::Hamiltonian => eval_h(spec, y),
            ConservedKind::BilinearForm => {
                let pt = unpack_phase_h(y);
                Ok(bl(pt.z, pt.w))
            }
            ConservedKind::Ktilde => eval_h(spec, y),
            ConservedKind::Ktilde1 => Ok(ktilde_parts(spec, y)?.0),
            ConservedKind::Ktilde2 => Ok(ktilde_parts(spec, y)?.1),
            ConservedKind::PKappa => Ok(y[5]),
            ConservedKind::AngularMomentum(axis) => {
                let pt = unpack_phase_ih(y);
                let l = pt.q.cross(pt.p);
                Ok(l.to_array()[axis])
            }
            ConservedKind::MomentMap => {
                let pt = unpack_phase_h(y);
                Ok(0.5 * crate::transforms::lambda_hat_residual(pt.z, pt.w))
            }
        }
    }
}

/// The conserved quantities tracked for each system kind.
pub fn conserved_set(spec: &SystemSpec) -> Vec<Conserved> {
    use ConservedKind::*;
    match spec.kind {
        SystemKind::Hooke4 => vec![
            Conserved { name: "H", kind: Hamiltonian },
            Conserved { name: "BL", kind: BilinearForm },
        ],
        SystemKind::KtildeSpherical => vec![
            Conserved { name: "Ktilde", kind: Ktilde },
            Conserved { name: "Ktilde1", kind: Ktilde1 },
            Conserved { name: "Ktilde2", kind: Ktilde2 },
            Conserved { name: "P_kappa", kind: PKappa },
        ],
        SystemKind::Kepler3 | SystemKind::Kepler3Reparam => vec![
            Conserved { name: "H", kind: Hamiltonian },
            Conserved { name: "Lx", kind: AngularMomentum(0) },
            Conserved { name: "Ly", kind: AngularMomentum(1) },
            Conserved { name: "Lz", kind: AngularMomentum(2) },
        ],
        SystemKind::TwoCenterTransformed => vec![
            Conserved { name: "K", kind: Hamiltonian },
            Conserved { name: "P_theta", kind: MomentMap },
        ],
        SystemKind::TwoCenter3 | SystemKind::Lagrange3 => {
            vec![Conserved { name: "H", kind: Hamiltonian }]
        }
    }
}

/// Integrator options exposed to callers and the CLI.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegrateOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY }
    }
}

impl IntegrateOpts {
    pub fn to_ode(self) -> OdeOpts {
        OdeOpts {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: 50_000_000,
        }
    }
}

/// A time-sampled orbit.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: TrajectoryStats,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_energy_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> (&f64, &Vec<f64>) {
        (self.times.last().expect("nonempty"), self.states.last().expect("nonempty"))
    }
}

fn merge_stats(stats: &mut TrajectoryStats, ode: &OdeStats) {
    stats.steps = ode.steps;
    stats.rejected = ode.rejected;
}

/// Integrate the Hamiltonian flow over `t_span = (t0, t1)`, `t1 > t0`,
/// sampling at every accepted step.
pub fn integrate(
    spec: &SystemSpec,
    y0: &[f64],
    t_span: (f64, f64),
    opts: IntegrateOpts,
) -> Result<Trajectory> {
    if y0.len() != spec.kind.dim() {
        return Err(RegulusError::Usage(format!(
            "state dimension {} does not match system '{}' (expects {})",
            y0.len(),
            spec.kind.name(),
            spec.kind.dim()
        )));
    }
    let (t0, t1) = t_span;
    if t1.is_nan() || t0.is_nan() || t1 <= t0 {
        return Err(RegulusError::Usage("t_span must be increasing".into()));
    }
    let h0 = eval_h(spec, y0)?;
    let local = *spec;
    let f = move |t: f64, y: &[f64], dy: &mut [f64]| rhs(&local, t, y, dy);
    let mut stepper = Dopri5::new(f, t0, y0.to_vec(), 1.0, opts.to_ode())?;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        stats: TrajectoryStats::default(),
    };
    let mut drift = 0.0f64;
    while stepper.t < t1 {
        match stepper.step(t1) {
            Ok(_) => {}
            Err(e) => {
                merge_stats(&mut traj.stats, &stepper.stats);
                traj.stats.max_energy_drift = drift;
                return Err(e);
            }
        }
        traj.times.push(stepper.t);
        traj.states.push(stepper.y.clone());
        if let Ok(h) = eval_h(spec, &stepper.y) {
            drift = drift.max((h - h0).abs());
        }
    }
    merge_stats(&mut traj.stats, &stepper.stats);
    traj.stats.max_energy_drift = drift;
    Ok(traj)
}

/// Flow of the reparametrized Kepler Hamiltonian `K`, valid only on its
/// zero-energy level.
pub fn kepler_reparam_flow(
    y0: &[f64],
    m: f64,
    f: f64,
    t_span: (f64, f64),
    opts: IntegrateOpts,
) -> Result<Trajectory> {
    let spec = SystemSpec::kepler3_reparam(m, f);
    let k0 = eval_h(&spec, y0)?;
    if k0.abs() > 1e-10 * (1.0 + m.abs() + f.abs()) {
        return Err(RegulusError::Constraint(format!(
            "reparametrized flow valid only on K = 0 (K = {k0:.3e})"
        )));
    }
    integrate(&spec, y0, t_span, opts)
}

/// Zero-energy Hooke initial data on Σ¹: `w_dir` is projected onto
/// `BL(z, ·) = 0` and rescaled so `|w|²/8 + f|z|² + m = 0`.
pub fn hooke4_zero_energy(z: Quaternion, w_dir: Quaternion, f: f64, m: f64) -> Result<PhasePointH> {
    let target = -m - f * z.norm_sq();
    if target <= 0.0 {
        return Err(RegulusError::Domain(
            "no zero-energy momentum: requires m + f|z|² < 0".into(),
        ));
    }
    // BL(z, w) = ⟨g, w⟩ with g = (z1, -z0, z3, -z2)
    let g = Quaternion::new(z.x, -z.w, z.z, -z.y);
    let mut w = w_dir - g * (bl(z, w_dir) / g.norm_sq());
    if w.norm() < 1e-12 {
        return Err(RegulusError::Domain("momentum direction degenerate".into()));
    }
    w = w * ((8.0 * target).sqrt() / w.norm());
    Ok(PhasePointH::new(z, w))
}

/// Zero-energy reduced two-center data: solves `P_r ≥ 0` from `K̃ = 0` at the
/// given base point and transverse momenta.
pub fn ktilde_zero_energy(
    spec: &SystemSpec,
    r: f64,
    psi: f64,
    kappa: f64,
    p_psi: f64,
    p_kappa: f64,
) -> Result<Vec<f64>> {
    let rest = eval_h(spec, &[r, psi, kappa, 0.0, p_psi, p_kappa])?;
    if rest > 0.0 {
        return Err(RegulusError::Domain(format!(
            "K̃ = 0 unreachable here: residual energy {rest:.3e} > 0"
        )));
    }
    let p_r = (-2.0 * rest).sqrt() / r;
    Ok(vec![r, psi, kappa, p_r, p_psi, p_kappa])
}

/// Circular spatial Kepler orbit data of radius `rho` on the zero level of
/// `|P|²/2 + m/|Q| + f` (requires `m/rho + f < 0`).
pub fn kepler_circular(rho: f64, m: f64, f: f64) -> Result<PhasePointIH> {
    let p2 = -2.0 * (m / rho + f);
    if p2 <= 0.0 {
        return Err(RegulusError::Domain("no circular zero-energy orbit at this radius".into()));
    }
    Ok(PhasePointIH::new(
        PureQuaternion::new(rho, 0.0, 0.0),
        PureQuaternion::new(0.0, p2.sqrt(), 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{hopf, I, J, ONE};
    use crate::rng::Stream;
    use crate::transforms::{bw_phase, ks_forward, spherical_to_phase, LambdaHatPoint, SphericalState};

    #[test]
    fn eval_examples() {
        // two-center at x = 0, y = 0, f = 0: H = m1 + m2
        let spec = SystemSpec::twocenter3(0.0, 0.7, -0.3);
        let h = eval_h(&spec, &[0.0; 6]).unwrap();
        assert!((h - 0.4).abs() < 1e-15);

        // hooke4 at z = 1, w = 0, f = 0.5, m = -1: H = -0.5
        let spec = SystemSpec::hooke4(0.5, -1.0);
        let y = pack_phase_h(&PhasePointH::new(ONE, Quaternion::zero()));
        assert!((eval_h(&spec, &y).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ktilde_value_matches_pullback_chain() {
        // spec point r = 2, ψ = π/2, zero momenta, f = 1, m1 = m2 = 1;
        // the pullback oracle ρ_f · (H - f) gives 15/16
        let spec = SystemSpec::ktilde(1.0, 1.0, 1.0, 0.0);
        let y = [2.0, std::f64::consts::FRAC_PI_2, 0.3, 0.0, 0.0, 0.0];
        let k = eval_h(&spec, &y).unwrap();
        assert!((k - 15.0 / 16.0).abs() < 1e-14, "K̃ = {k}");

        // oracle: through the Birkhoff-Waldvogel chain
        let st = SphericalState::new(2.0, std::f64::consts::FRAC_PI_2, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0)
            .unwrap();
        let pt = spherical_to_phase(&st).unwrap();
        let lam = LambdaHatPoint::new(pt.z, pt.w, 1e-9).unwrap();
        let (x, yv) = bw_phase(&lam).unwrap();
        let tc = SystemSpec::twocenter3(1.0, 1.0, 1.0);
        let h_shift = eval_h(&tc, &[x.x, x.y, x.z, yv.x, yv.y, yv.z]).unwrap();
        let rho2 = (pt.z.conj() - pt.z).norm_sq();
        let rho_f = (pt.z - I).norm_sq() * (pt.z + I).norm_sq() / rho2;
        assert!((rho_f * h_shift - k).abs() < 1e-12);
    }

    #[test]
    fn ktilde_pullback_consistency_random() {
        let mut rng = Stream::new(61, "ktilde-chain");
        let spec = SystemSpec::ktilde(-0.4, -1.0, -0.7, 0.0);
        let tc = SystemSpec::twocenter3(-0.4, -1.0, -0.7);
        let mut tested = 0;
        while tested < 100 {
            let st = match SphericalState::new(
                rng.range(1.2, 2.8),
                rng.range(0.3, std::f64::consts::PI - 0.3),
                rng.range(0.0, std::f64::consts::TAU),
                rng.range(0.0, std::f64::consts::TAU),
                rng.symmetric(1.0),
                rng.symmetric(1.0),
                rng.symmetric(1.0),
                0.0,
            ) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let k = eval_h(&spec, &[st.r, st.psi, st.kappa, st.p_r, st.p_psi, st.p_kappa]).unwrap();
            let pt = spherical_to_phase(&st).unwrap();
            let lam = match LambdaHatPoint::new(pt.z, pt.w, 1e-8) {
                Ok(l) => l,
                Err(_) => continue,
            };
            let (x, yv) = match bw_phase(&lam) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let h_shift = eval_h(&tc, &[x.x, x.y, x.z, yv.x, yv.y, yv.z]).unwrap();
            let rho2 = (pt.z.conj() - pt.z).norm_sq();
            let rho_f = (pt.z - I).norm_sq() * (pt.z + I).norm_sq() / rho2;
            assert!(
                (rho_f * h_shift - k).abs() <= 1e-9 * (1.0 + k.abs()),
                "mismatch {} vs {}",
                rho_f * h_shift,
                k
            );
            tested += 1;
        }
    }

    #[test]
    fn ktilde_separation_is_exact() {
        let spec = SystemSpec::ktilde(-0.7, -1.2, -0.4, 0.3);
        let mut rng = Stream::new(67, "ktilde-sep");
        for _ in 0..200 {
            let y = [
                rng.range(1.1, 3.0),
                rng.range(0.2, std::f64::consts::PI - 0.2),
                rng.range(0.0, std::f64::consts::TAU),
                rng.symmetric(2.0),
                rng.symmetric(2.0),
                rng.symmetric(2.0),
            ];
            let (k1, k2) = ktilde_parts(&spec, &y).unwrap();
            let k = eval_h(&spec, &y).unwrap();
            assert_eq!(k, k1 + k2);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Stream::new(71, "grad-fd");
        let specs = [
            SystemSpec::hooke4(0.5, -1.0),
            SystemSpec::kepler3(-1.0, 0.5),
            SystemSpec::kepler3_reparam(-1.0, 0.5),
            SystemSpec::twocenter3(-0.4, -1.0, -0.6),
            SystemSpec::lagrange3(-0.4, 0.2, -1.0, -0.6),
            SystemSpec::twocenter_transformed(-0.4, -1.0, -0.6),
            SystemSpec::ktilde(-0.4, -1.0, -0.6, 0.15),
        ];
        let h = 1e-6;
        for spec in specs {
            let n = spec.kind.dim();
            let mut tested = 0;
            while tested < 25 {
                let mut y: Vec<f64> = (0..n).map(|_| rng.symmetric(2.0)).collect();
                if spec.kind == SystemKind::KtildeSpherical {
                    y[0] = rng.range(1.3, 2.5);
                    y[1] = rng.range(0.4, std::f64::consts::PI - 0.4);
                }
                let g = match eval_grad(&spec, &y) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
                let mut ok = true;
                for k in 0..n {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[k] += h;
                    ym[k] -= h;
                    let (hp, hm) = match (eval_h(&spec, &yp), eval_h(&spec, &ym)) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => {
                            ok = false;
                            break;
                        }
                    };
                    let fd = (hp - hm) / (2.0 * h);
                    assert!(
                        (g[k] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                        "{}: component {k}: {} vs {}",
                        spec.kind.name(),
                        g[k],
                        fd
                    );
                }
                if ok {
                    tested += 1;
                }
            }
        }
    }

    #[test]
    fn hooke4_energy_and_bl_drift() {
        let spec = SystemSpec::hooke4(0.5, -1.0);
        let pt = hooke4_zero_energy(ONE * 0.9 + J * 0.3, I + J * 0.5 + ONE * 0.2, 0.5, -1.0).unwrap();
        assert!(pt.on_sigma1(1e-13));
        let y0 = pack_phase_h(&pt);
        assert!(eval_h(&spec, &y0).unwrap().abs() < 1e-13);
        let traj = integrate(&spec, &y0, (0.0, 100.0), IntegrateOpts::default()).unwrap();
        assert!(traj.stats.max_energy_drift <= 1e-8 * 2.0);
        let max_bl = traj
            .states
            .iter()
            .map(|y| {
                let p = unpack_phase_h(y);
                bl(p.z, p.w).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_bl <= 1e-9, "BL drift {max_bl:.3e}");
    }

    #[test]
    fn hooke4_matches_harmonic_closed_form() {
        // f = 0.5: frequency √(f/2) = 0.5, period 4π
        let spec = SystemSpec::hooke4(0.5, -1.0);
        let y0 = pack_phase_h(&PhasePointH::new(ONE, Quaternion::zero()));
        let t_end = 4.0 * std::f64::consts::PI;
        let traj = integrate(&spec, &y0, (0.0, t_end), IntegrateOpts::default()).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.states) {
            let expected = (0.5 * t).cos();
            assert!((y[0] - expected).abs() < 1e-8);
            // w = 4 ż = -2 sin(t/2)
            assert!((y[4] + 2.0 * (0.5 * t).sin()).abs() < 1e-8);
        }
        let (tl, yl) = traj.last();
        assert!((tl - t_end).abs() < 1e-12);
        assert!((yl[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ktilde_flow_conserves_everything_it_should() {
        let spec = SystemSpec::ktilde(-0.6, -1.0, -1.0, 0.0);
        let y0 = ktilde_zero_energy(&spec, 1.6, 1.8, 0.0, 0.2, 0.3).unwrap();
        let traj = integrate(&spec, &y0, (0.0, 100.0), IntegrateOpts::default()).unwrap();
        for c in conserved_set(&spec) {
            let v0 = c.eval(&spec, &traj.states[0]).unwrap();
            let drift = traj
                .states
                .iter()
                .map(|y| (c.eval(&spec, y).unwrap() - v0).abs())
                .fold(0.0, f64::max);
            let tol = if c.name == "P_kappa" { 1e-9 } else { 1e-6 * (1.0 + v0.abs()) };
            assert!(drift <= tol, "{} drift {drift:.3e}", c.name);
        }
    }

    #[test]
    fn kepler_reparam_circular_orbit() {
        let pt = kepler_circular(1.0, -1.0, 0.5).unwrap();
        let y0 = pack_phase_ih(&pt);
        let opts = IntegrateOpts { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        let traj = kepler_reparam_flow(&y0, -1.0, 0.5, (0.0, 50.0), opts).unwrap();
        let spec = SystemSpec::kepler3_reparam(-1.0, 0.5);
        let mut max_r_err = 0.0f64;
        let mut max_k = 0.0f64;
        for y in &traj.states {
            let p = unpack_phase_ih(y);
            max_r_err = max_r_err.max((p.q.norm() - 1.0).abs());
            max_k = max_k.max(eval_h(&spec, y).unwrap().abs());
        }
        assert!(max_r_err <= 1e-8, "radius drift {max_r_err:.3e}");
        assert!(max_k <= 1e-10, "K drift {max_k:.3e}");
        // rejects off-level data
        let bad = pack_phase_ih(&PhasePointIH::new(
            PureQuaternion::new(1.0, 0.0, 0.0),
            PureQuaternion::new(0.0, 2.0, 0.0),
        ));
        assert!(matches!(
            kepler_reparam_flow(&bad, -1.0, 0.5, (0.0, 1.0), IntegrateOpts::default()),
            Err(RegulusError::Constraint(_))
        ));
    }

    #[test]
    fn hooke_orbit_pushes_to_reparam_kepler_flow() {
        // Prop: zero-energy Hooke orbits on Σ¹ map to the K-flow, with the
        // same time parameter.
        let (f, m) = (0.5, -1.0);
        let spec_h = SystemSpec::hooke4(f, m);
        let pt = hooke4_zero_energy(
            ONE * 0.8 + J * 0.4,
            I * 0.9 + crate::quat::K * 0.8 + J * 0.1,
            f,
            m,
        )
        .unwrap();
        let y0 = pack_phase_h(&pt);
        let t_end = 4.0 * std::f64::consts::PI;
        let opts = IntegrateOpts::default();
        let traj = integrate(&spec_h, &y0, (0.0, t_end), opts).unwrap();
        let q0 = ks_forward(&pt).unwrap();
        let k0 = pack_phase_ih(&q0);
        let ktraj = kepler_reparam_flow(&k0, m, f, (0.0, t_end), opts).unwrap();
        // compare at the Hooke sample times via dense re-integration points:
        // both trajectories sample adaptively, so compare at shared times by
        // re-running the Kepler flow to each Hooke sample time
        let mut max_err = 0.0f64;
        for (t, y) in traj.times.iter().zip(&traj.states).step_by(7) {
            if *t == 0.0 {
                continue;
            }
            let seg = kepler_reparam_flow(&k0, m, f, (0.0, *t), opts).unwrap();
            let (_, ky) = seg.last();
            let hooke_pt = unpack_phase_h(y);
            let pushed = ks_forward(&hooke_pt).unwrap();
            let there = unpack_phase_ih(ky);
            max_err = max_err.max((pushed.q - there.q).norm());
        }
        assert!(max_err <= 1e-7, "orbit correspondence error {max_err:.3e}");
        assert!(!ktraj.states.is_empty());
        let _ = hopf(pt.z);
    }

    #[test]
    fn transformed_flow_is_regular_at_collision() {
        // 1D fall onto the center +i: physical flow aborts, transformed flow
        // passes through z = i
        let (m1, m2) = (-1.0, -1.0);
        let x0 = 1.4_f64;
        let f = m1 / (x0 - 1.0).abs() + m2 / (x0 + 1.0).abs();
        let phys = SystemSpec::twocenter3(f, m1, m2);
        let y_phys = [0.0, x0, 0.0, 0.0, 0.0, 0.0];
        // falls in and aborts
        let r = integrate(&phys, &[x0, 0.0, 0.0, 0.0, 0.0, 0.0], (0.0, 10.0), IntegrateOpts::default());
        assert!(matches!(r, Err(RegulusError::Singular(_))), "physical flow should abort: {r:?}");
        let _ = y_phys;

        // upstairs: ζ + 1/ζ = 2 x0 gives the two preimages on the i-axis
        let zeta = x0 + (x0 * x0 - 1.0).sqrt();
        let spec_k = SystemSpec::twocenter_transformed(f, m1, m2);
        let z0 = I * zeta;
        let y0 = pack_phase_h(&PhasePointH::new(z0, Quaternion::zero()));
        assert!(eval_h(&spec_k, &y0).unwrap().abs() < 1e-12);
        let traj = integrate(&spec_k, &y0, (0.0, 120.0), IntegrateOpts::default()).unwrap();
        // the motion stays on the i-axis; the collision is the crossing ζ = 1
        let zetas: Vec<f64> = traj.states.iter().map(|y| unpack_phase_h(y).z.x).collect();
        let crossings = zetas.windows(2).filter(|w| (w[0] - 1.0) * (w[1] - 1.0) <= 0.0).count();
        assert!(crossings >= 2, "expected repeated regularized collisions, got {crossings}");
        let min_dist = zetas.iter().map(|z| (z - 1.0).abs()).fold(f64::INFINITY, f64::min);
        assert!(min_dist <= 0.2, "sampled approach {min_dist:.3e}");
        for y in &traj.states {
            let p = unpack_phase_h(y);
            assert!(p.z.w.abs() < 1e-10 && p.z.y.abs() < 1e-10 && p.z.z.abs() < 1e-10);
        }
    }
}
