//! The check registry: every identity, correspondence and integrability
//! claim the library relies on, certified numerically at desk scale.

use super::{scaled, Check, Ctx};
use crate::billiards::{
    bw_wall_image, push_orbit_bw, push_orbit_ks, reflection_law_residual, run_billiard,
    BilliardSpec, StopRule, WallSurface,
};
use crate::error::{RegulusError, Result};
use crate::geometry::{
    fit_surface_of_revolution, hopf_image_classify, nearest_point_to_origin, sample_hopf_image,
    surface_residual, CenteredQuadric4, QuadricKind,
};
use crate::quat::{bl, hopf, mul, PureQuaternion, Quaternion, I};
use crate::rng::Stream;
use crate::systems::{
    eval_h, hooke4_zero_energy, integrate, ktilde_zero_energy, pack_phase_h, pack_phase_ih,
    unpack_phase_h, unpack_phase_ih, IntegrateOpts, SystemSpec,
};
use crate::transforms::{
    birkhoff_plane_coords, birkhoff_plane_embed, bw_base, bw_phase, bw_phase_raw, deck_transform,
    ks_forward, ks_lift, ks_map_raw, lambda_hat_residual, phi1, phi1_cotangent, spherical_to_phase,
    z_theta, BwPoint, LambdaHatPoint, MoebiusPoint, PhasePointH, PhasePointIH, SphericalState,
};
use num_complex::Complex64;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

pub(super) fn registry() -> Vec<Check> {
    vec![
        Check {
            name: "hopf_fiber",
            anchor: "Hopf map is constant on the circle fibers {e^{iθ}z}",
            tolerance: 1e-12,
            default_trials: 10_000,
            scalable: true,
            run: hopf_fiber,
        },
        Check {
            name: "ks_one_form",
            anchor: "K.S. pulls Re(P̄ dQ) back to Re(w̄ dz) on Σ¹",
            tolerance: 1e-10,
            default_trials: 1_000,
            scalable: true,
            run: ks_one_form,
        },
        Check {
            name: "ks_two_form",
            anchor: "K.S. pulls Re(dP̄∧dQ) back to Re(dw̄∧dz) on Σ¹",
            tolerance: 1e-10,
            default_trials: 1_000,
            scalable: true,
            run: ks_two_form,
        },
        Check {
            name: "prop_orbit_correspondence",
            anchor: "zero-energy Hooke orbits on Σ¹ map to zero-energy Kepler orbits",
            tolerance: 1e-6,
            default_trials: 3,
            scalable: false,
            run: prop_orbit_correspondence,
        },
        Check {
            name: "lc_plane_image",
            anchor: "Levi-Civita planes map onto planes through the origin",
            tolerance: 1e-10,
            default_trials: 100,
            scalable: true,
            run: lc_plane_image,
        },
        Check {
            name: "lc_restriction_is_lc",
            anchor: "on a Levi-Civita plane the Hopf map is the complex square map",
            tolerance: 1e-12,
            default_trials: 100,
            scalable: true,
            run: lc_restriction_is_lc,
        },
        Check {
            name: "quadric_image_classification",
            anchor: "invariant centered quadrics map to origin-focused surfaces of revolution",
            tolerance: 1e-9,
            default_trials: 100,
            scalable: true,
            run: quadric_image_classification,
        },
        Check {
            name: "dual_collinearity",
            anchor: "nearest points of a dual image pair are collinear with the origin",
            tolerance: 1e-8,
            default_trials: 100,
            scalable: true,
            run: dual_collinearity,
        },
        Check {
            name: "confocal_image",
            anchor: "confocal invariant families map to confocal focused families",
            tolerance: 1e-8,
            default_trials: 50,
            scalable: true,
            run: confocal_image,
        },
        Check {
            name: "reflection_correspondence",
            anchor: "reflections correspond across the Hopf map and angles are preserved",
            tolerance: 1e-10,
            default_trials: 200,
            scalable: true,
            run: reflection_correspondence,
        },
        Check {
            name: "thm_kepler_hooke_billiard",
            anchor: "Kepler billiard orbits are images of restricted Hooke billiard orbits",
            tolerance: 1e-6,
            default_trials: 20,
            scalable: false,
            run: thm_kepler_hooke_billiard,
        },
        Check {
            name: "bw_composition",
            anchor: "the composed base B.W. map equals its entrywise coordinate formula",
            tolerance: 1e-12,
            default_trials: 1_000,
            scalable: true,
            run: bw_composition,
        },
        Check {
            name: "bw_planar_birkhoff",
            anchor: "on Birkhoff planes the base map is ζ ↦ (ζ + 1/ζ)/2",
            tolerance: 1e-12,
            default_trials: 1_000,
            scalable: true,
            run: bw_planar_birkhoff,
        },
        Check {
            name: "lemma16_images",
            anchor: "Φ₁ maps Λ̂ into Σ̂ and the phase images are purely imaginary",
            tolerance: 1e-10,
            default_trials: 500,
            scalable: true,
            run: lemma16_images,
        },
        Check {
            name: "lemma17_real_line",
            anchor: "φ₁ carries the real line onto the unit circle over physical infinity",
            tolerance: 1e-12,
            default_trials: 1_000,
            scalable: true,
            run: lemma17_real_line,
        },
        Check {
            name: "bw_symplectic",
            anchor: "B.W. pulls Re(dȳ∧dx) back to Re(dw̄∧dz) on Λ̂",
            tolerance: 1e-6,
            default_trials: 300,
            scalable: true,
            run: bw_symplectic,
        },
        Check {
            name: "bw_pullback_identities",
            anchor: "pullbacks of |x∓i| and |y|² have closed forms in (z, w)",
            tolerance: 1e-10,
            default_trials: 1_000,
            scalable: true,
            run: bw_pullback_identities,
        },
        Check {
            name: "ktilde_spherical_consistency",
            anchor: "K̃ in the spherical chart equals the pullback of |x-i||x+i|(H - f)",
            tolerance: 1e-8,
            default_trials: 1_000,
            scalable: true,
            run: ktilde_spherical_consistency,
        },
        Check {
            name: "ktilde_separation",
            anchor: "K̃ = K̃₁(r,P_r,P_κ) + K̃₂(ψ,P_ψ,P_κ) exactly",
            tolerance: 0.0,
            default_trials: 1_000,
            scalable: true,
            run: ktilde_separation,
        },
        Check {
            name: "reduced_conservation",
            anchor: "the reduced flow conserves both separated parts and P_κ",
            tolerance: 1e-6,
            default_trials: 3,
            scalable: false,
            run: reduced_conservation,
        },
        Check {
            name: "billiard_spheres_cones_integrable",
            anchor: "sphere and cone walls keep K̃₁, K̃₂ conserved across reflections",
            tolerance: 1e-6,
            default_trials: 100,
            scalable: false,
            run: billiard_spheres_cones_integrable,
        },
        Check {
            name: "thm22_equivalence",
            anchor: "reduced billiards are equivalent to two-center billiards with r-confocal walls",
            tolerance: 1e-5,
            default_trials: 100,
            scalable: false,
            run: thm22_equivalence,
        },
        Check {
            name: "lagrange_separation",
            anchor: "the Lagrange problem separates in the same reduced coordinates",
            tolerance: 1e-8,
            default_trials: 1_000,
            scalable: true,
            run: lagrange_separation,
        },
        Check {
            name: "collision_regularization",
            anchor: "the transformed two-center flow is regular at the double collisions",
            tolerance: 1e-3,
            default_trials: 1,
            scalable: false,
            run: collision_regularization,
        },
        Check {
            name: "ztheta_deck_transformation_probe",
            anchor: "the chart deck involution is (r,ψ,κ,θ) ↦ (1/r,ψ,κ+π,θ+π)",
            tolerance: 1e-12,
            default_trials: 10_000,
            scalable: true,
            run: ztheta_deck_transformation_probe,
        },
    ]
}

// ---------------------------------------------------------------------------
// sampling helpers

fn random_sigma1(rng: &mut Stream) -> PhasePointH {
    loop {
        let z = rng.quaternion(2.0);
        if z.norm() < 0.3 {
            continue;
        }
        let w = rng.quaternion(2.0);
        // project w onto BL(z, ·) = 0; the gradient is (z1, -z0, z3, -z2)
        let g = Quaternion::new(z.x, -z.w, z.z, -z.y);
        let w = w - g * (bl(z, w) / g.norm_sq());
        return PhasePointH::new(z, w);
    }
}

/// Tangent vector at a Σ¹ point, projected onto ker dBL.
fn sigma1_tangent(rng: &mut Stream, pt: &PhasePointH) -> (Quaternion, Quaternion) {
    let dz = rng.quaternion(1.0);
    let dw = rng.quaternion(1.0);
    // dBL = (∂/∂z, ∂/∂w) = ((w1,-w0,w3,-w2)-pattern, (z1,-z0,z3,-z2))
    let gz = Quaternion::new(-pt.w.x, pt.w.w, -pt.w.z, pt.w.y);
    let gw = Quaternion::new(pt.z.x, -pt.z.w, pt.z.z, -pt.z.y);
    let num = gz.dot(dz) + gw.dot(dw);
    let den = gz.norm_sq() + gw.norm_sq();
    (dz - gz * (num / den), dw - gw * (num / den))
}

fn random_lambda_hat(rng: &mut Stream) -> LambdaHatPoint {
    loop {
        let z = rng.quaternion(2.0);
        if z.im().norm() < 0.15 || (z - I).norm() < 0.15 || (z + I).norm() < 0.15 {
            continue;
        }
        if let Ok(pt) = LambdaHatPoint::project(z, rng.quaternion(2.0)) {
            return pt;
        }
    }
}

/// Gradient of the Λ̂ constraint Re((z̄+i)w(z̄-i)) in `(z, w)`.
fn lambda_hat_gradient(pt: &LambdaHatPoint) -> (Quaternion, Quaternion) {
    // directional derivative in z is ⟨δ, w(z̄-i) + (z̄+i)w⟩
    let zc = pt.z.conj();
    let gz = mul(pt.w, zc - I) + mul(zc + I, pt.w);
    let mut gw = [0.0; 4];
    for (k, e) in [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    ]
    .iter()
    .enumerate()
    {
        gw[k] = lambda_hat_residual(pt.z, *e);
    }
    (gz, Quaternion::from_array(gw))
}

fn lambda_hat_tangent(rng: &mut Stream, pt: &LambdaHatPoint) -> (Quaternion, Quaternion) {
    let dz = rng.quaternion(1.0);
    let dw = rng.quaternion(1.0);
    let (gz, gw) = lambda_hat_gradient(pt);
    let num = gz.dot(dz) + gw.dot(dw);
    let den = gz.norm_sq() + gw.norm_sq();
    (dz - gz * (num / den), dw - gw * (num / den))
}

/// Orthonormal Levi-Civita plane basis: `|v1| = |v2| = 1`, `⟨v1,v2⟩ = 0`,
/// `BL(v1,v2) = 0`.
fn random_lc_basis(rng: &mut Stream) -> (Quaternion, Quaternion) {
    loop {
        let v1 = rng.unit_quaternion();
        let iv1 = mul(I, v1);
        let mut v2 = rng.quaternion(1.0);
        v2 = v2 - v1 * v1.dot(v2) - iv1 * iv1.dot(v2);
        if v2.norm() < 1e-2 {
            continue;
        }
        return (v1, v2 / v2.norm());
    }
}

/// Random S¹-invariant quadric with eigenvalues shaped by `pattern`
/// (0: bounded distinct, 1: mixed signs, 2: degenerate rank two,
/// 3: round sphere); semi-axes drawn from [0.5, 3].
fn random_invariant_quadric(rng: &mut Stream, pattern: usize) -> CenteredQuadric4 {
    let fiber = rng.unit_quaternion();
    let a = rng.range(0.5, 3.0);
    let b = loop {
        let b = rng.range(0.5, 3.0);
        if (a - b).abs() > 0.1 {
            break b;
        }
    };
    let (la, lb) = match pattern % 4 {
        0 => (1.0 / (a * a), 1.0 / (b * b)),
        1 => (1.0 / (a * a), -1.0 / (b * b)),
        2 => (1.0 / (a * a), 0.0),
        _ => (1.0 / (a * a), 1.0 / (a * a)),
    };
    CenteredQuadric4::from_invariant_eigensystem(fiber, la, lb).expect("unit fiber")
}

/// Exact differential of the Hopf map.
fn d_hopf(z: Quaternion, dz: Quaternion) -> PureQuaternion {
    (mul(mul(z.conj(), I), dz) * 2.0).im()
}

/// Exact differential of the raw K.S. momentum `P = z̄ i w / (2|z|²)`.
fn d_ks_p(z: Quaternion, w: Quaternion, dz: Quaternion, dw: Quaternion) -> Quaternion {
    let n2 = z.norm_sq();
    let p = mul(mul(z.conj(), I), w) / (2.0 * n2);
    (mul(mul(dz.conj(), I), w) + mul(mul(z.conj(), I), dw)) / (2.0 * n2)
        - p * (2.0 * z.dot(dz) / n2)
}

// ---------------------------------------------------------------------------
// checks

fn hopf_fiber(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let z = ctx.rng.quaternion(2.0);
        let theta = ctx.rng.range(0.0, TAU);
        let d = (hopf(Quaternion::exp_i(theta) * z) - hopf(z)).norm();
        max = max.max(d / 1.0f64.max(z.norm_sq()));
    }
    Ok(max)
}

fn ks_one_form(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let h = 1e-5;
    for _ in 0..ctx.trials {
        let pt = random_sigma1(&mut ctx.rng);
        let (dz, dw) = sigma1_tangent(&mut ctx.rng, &pt);
        let (_, p) = ks_map_raw(pt.z, pt.w)?;
        let scale = 1.0 + pt.z.norm_sq() * pt.w.norm();
        // exact differentials
        let dq = d_hopf(pt.z, dz);
        let lhs = PureQuaternion::new(p.x, p.y, p.z).dot(dq);
        let rhs = pt.w.dot(dz);
        max = max.max((lhs - rhs).abs() / scale);
        // finite-difference route, folded in at its own tolerance
        let (qp, _) = ks_map_raw(pt.z + dz * h, pt.w + dw * h)?;
        let (qm, _) = ks_map_raw(pt.z - dz * h, pt.w - dw * h)?;
        let dq_fd = (qp - qm) / (2.0 * h);
        let lhs_fd = PureQuaternion::new(p.x, p.y, p.z).dot(dq_fd);
        max = max.max(scaled((lhs_fd - rhs).abs() / scale, 1e-6, 1e-10));
    }
    Ok(max)
}

fn ks_two_form(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let h = 1e-5;
    for _ in 0..ctx.trials {
        let pt = random_sigma1(&mut ctx.rng);
        let (dz1, dw1) = sigma1_tangent(&mut ctx.rng, &pt);
        let (dz2, dw2) = sigma1_tangent(&mut ctx.rng, &pt);
        let scale = 1.0 + pt.z.norm_sq() * (1.0 + pt.w.norm());
        let omega_up = dw1.dot(dz2) - dw2.dot(dz1);
        // exact differentials
        let (dq1, dp1) = (d_hopf(pt.z, dz1), d_ks_p(pt.z, pt.w, dz1, dw1));
        let (dq2, dp2) = (d_hopf(pt.z, dz2), d_ks_p(pt.z, pt.w, dz2, dw2));
        let omega_down = dp1.im().dot(dq2) - dp2.im().dot(dq1);
        max = max.max((omega_down - omega_up).abs() / scale);
        // finite differences
        let fd = |dz: Quaternion, dw: Quaternion| -> Result<(PureQuaternion, Quaternion)> {
            let (qp, pp) = ks_map_raw(pt.z + dz * h, pt.w + dw * h)?;
            let (qm, pm) = ks_map_raw(pt.z - dz * h, pt.w - dw * h)?;
            Ok(((qp - qm) / (2.0 * h), (pp - pm) / (2.0 * h)))
        };
        let (dq1f, dp1f) = fd(dz1, dw1)?;
        let (dq2f, dp2f) = fd(dz2, dw2)?;
        let omega_fd = dp1f.im().dot(dq2f) - dp2f.im().dot(dq1f);
        max = max.max(scaled((omega_fd - omega_up).abs() / scale, 1e-6, 1e-10));
    }
    Ok(max)
}

fn prop_orbit_correspondence(ctx: &mut Ctx) -> Result<f64> {
    let (f, m) = (0.5, -1.0);
    let spec = SystemSpec::hooke4(f, m);
    let opts = IntegrateOpts::default();
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let z0 = loop {
            let z = ctx.rng.quaternion(1.0);
            if z.norm() > 0.4 && z.norm() < 1.2 {
                break z;
            }
        };
        let pt = hooke4_zero_energy(z0, ctx.rng.quaternion(1.0), f, m)?;
        let y0 = pack_phase_h(&pt);
        let t_end = 2.0 * TAU; // one full Hooke period, two Kepler revolutions
        let hooke = integrate(&spec, &y0, (0.0, t_end), opts)?;
        let k0 = pack_phase_ih(&ks_forward(&pt)?);
        let times: Vec<f64> = hooke.times.iter().copied().skip(1).collect();
        let kspec = SystemSpec::kepler3_reparam(m, f);
        let kstates = crate::billiards::integrate_at_times(&kspec, &k0, 0.0, &times, opts)?;
        for (y, ky) in hooke.states.iter().skip(1).zip(&kstates) {
            let pushed = ks_forward(&unpack_phase_h(y))?;
            let there = unpack_phase_ih(ky);
            max = max.max((pushed.q - there.q).norm());
            max = max.max((pushed.p - there.p).norm());
        }
    }
    Ok(max)
}

fn lc_plane_image(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let (v1, v2) = random_lc_basis(&mut ctx.rng);
        let w1 = hopf(v1);
        let w2 = (mul(mul(v1.conj(), I), v2)).im();
        let n = w1.cross(w2);
        let n = n / n.norm();
        for _ in 0..25 {
            let (a, b) = (ctx.rng.symmetric(2.0), ctx.rng.symmetric(2.0));
            let q = hopf(v1 * a + v2 * b);
            max = max.max(q.dot(n).abs() / (1.0 + a * a + b * b));
        }
    }
    Ok(max)
}

fn lc_restriction_is_lc(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let (v1, v2) = random_lc_basis(&mut ctx.rng);
        let w1 = hopf(v1);
        let w2 = (mul(mul(v1.conj(), I), v2)).im();
        for _ in 0..25 {
            let (a, b) = (ctx.rng.symmetric(2.0), ctx.rng.symmetric(2.0));
            // in these bases the restriction is the complex square map
            let expected = w1 * (a * a - b * b) + w2 * (2.0 * a * b);
            let got = hopf(v1 * a + v2 * b);
            max = max.max((got - expected).norm() / (1.0 + a * a + b * b));
        }
    }
    Ok(max)
}

fn quadric_image_classification(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for trial in 0..ctx.trials {
        let q4 = random_invariant_quadric(&mut ctx.rng, trial as usize);
        let image = hopf_image_classify(&q4)?;
        let pts = sample_hopf_image(&q4, 400, &mut ctx.rng);
        if pts.len() < 100 {
            return Err(RegulusError::Numerical("quadric sampling starved".into()));
        }
        // classified implicit equation holds on the sampled image
        max = max.max(surface_residual(&image, &pts));
        // focus sits at the origin: the origin-focused polar family must fit
        let fit = fit_surface_of_revolution(&pts, PureQuaternion::zero())?;
        max = max.max(scaled(surface_residual(&fit, &pts), 1e-8, 1e-9));
        max = max.max(scaled(image.focus.norm(), 1e-8, 1e-9));
        // spheroid: C = (A² + B²)/2, D = A·B against the fit oracle
        if image.kind == QuadricKind::Spheroid && fit.kind == QuadricKind::Spheroid {
            let (c_img, d_img) = image.semi_axes().expect("spheroid");
            let (c_fit, d_fit) = fit.semi_axes().expect("spheroid");
            max = max.max(scaled((c_img - c_fit).abs() / (1.0 + c_img), 1e-8, 1e-9));
            max = max.max(scaled((d_img - d_fit).abs() / (1.0 + d_img), 1e-8, 1e-9));
        }
    }
    Ok(max)
}

fn dual_collinearity(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let q4 = random_invariant_quadric(&mut ctx.rng, 1); // unbounded, non-degenerate
        let dual = q4.dual()?;
        let f_img = hopf_image_classify(&q4)?;
        let f_dual = hopf_image_classify(&dual)?;
        let seed = ctx.rng.next_u64();
        let p = nearest_point_to_origin(&f_img, seed)?;
        let p_dual = nearest_point_to_origin(&f_dual, seed ^ 0x9E37)?;
        let area = 0.5 * p.cross(p_dual).norm();
        max = max.max(area / (p.norm() * p_dual.norm()).max(1e-300));
        done += 1;
    }
    Ok(max)
}

fn confocal_image(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let fiber = ctx.rng.unit_quaternion();
        let a2 = ctx.rng.range(1.5, 4.0);
        let b2 = ctx.rng.range(0.4, 1.2);
        let mu1 = ctx.rng.range(-b2 + 0.2, 2.0);
        let mu2 = ctx.rng.range(-b2 + 0.2, 2.0);
        if (a2 - b2 - mu1.max(mu2) + mu1.min(mu2)).abs() < 0.05 || (mu1 - mu2).abs() < 0.05 {
            continue;
        }
        let member = |mu: f64| -> Result<_> {
            let q = CenteredQuadric4::from_invariant_eigensystem(
                fiber,
                1.0 / (a2 + mu),
                1.0 / (b2 + mu),
            )?;
            hopf_image_classify(&q)
        };
        let (img1, img2) = (member(mu1)?, member(mu2)?);
        let (f1, f2) = match (img1.foci(), img2.foci()) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        // both share the origin focus; the far foci must agree as a set
        let d_same = (f1[1] - f2[1]).norm();
        let d_origin = f1[0].norm().max(f2[0].norm());
        max = max.max(d_same.min((f1[1] + f2[1]).norm()));
        max = max.max(d_origin);
        done += 1;
    }
    Ok(max)
}

fn reflection_correspondence(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let q4 = random_invariant_quadric(&mut ctx.rng, (done % 2) as usize);
        let image = hopf_image_classify(&q4)?;
        let z = match q4.sample_along(ctx.rng.unit_quaternion()) {
            Some(z) => z,
            None => continue,
        };
        // incoming Σ-vector at z
        let v_dir = ctx.rng.quaternion(1.0);
        let g = Quaternion::new(z.x, -z.w, z.z, -z.y);
        let v1 = v_dir - g * (bl(z, v_dir) / g.norm_sq());
        if v1.norm() < 0.1 {
            continue;
        }
        let n4 = q4.gradient(z);
        // the wall normal of an S¹-invariant wall is itself a Σ-vector
        max = max.max(bl(z, n4).abs() / (1.0 + z.norm() * n4.norm()));
        let vn = v1.dot(n4) / n4.norm_sq();
        let v2 = v1 - n4 * (2.0 * vn);
        max = max.max(bl(z, v2).abs() / (1.0 + z.norm() * v2.norm()));
        // push forward: Σ-vectors map by v ↦ 2 z̄ i v
        let push = |v: Quaternion| (mul(mul(z.conj(), I), v) * 2.0).im();
        let (pv1, pv2, pn) = (push(v1), push(v2), push(n4));
        // the pushed normal is normal to the image wall
        let n3 = image.grad_g(hopf(z));
        let cross = pn.cross(n3).norm() / (pn.norm() * n3.norm());
        max = max.max(cross);
        // downstairs reflection law with the image wall normal
        let res = reflection_law_residual(
            &pv1.to_array(),
            &pv2.to_array(),
            &n3.to_array(),
        )?;
        max = max.max(res);
        // angle preservation
        let cos_up = v1.dot(n4) / (v1.norm() * n4.norm());
        let cos_down = pv1.dot(pn) / (pv1.norm() * pn.norm());
        max = max.max((cos_up - cos_down).abs());
        done += 1;
    }
    Ok(max)
}

fn thm_kepler_hooke_billiard(ctx: &mut Ctx) -> Result<f64> {
    let (f, m) = (0.5, -1.0);
    let hooke = SystemSpec::hooke4(f, m);
    let fiber = ctx.rng.unit_quaternion();
    let (a, b) = (1.15, 0.95);
    let q4 = CenteredQuadric4::from_invariant_eigensystem(fiber, 1.0 / (a * a), 1.0 / (b * b))?;
    let wall3 = hopf_image_classify(&q4)?;
    // zero-energy Σ¹ start inside the wall
    let pt = loop {
        let z = ctx.rng.quaternion(1.0);
        if z.norm() < 0.45 || z.norm() > 0.7 || q4.wall_value(z) >= -0.1 {
            continue;
        }
        let cand = hooke4_zero_energy(z, ctx.rng.quaternion(1.0), f, m)?;
        break cand;
    };
    let y0 = pack_phase_h(&pt);
    let n_reflections = ctx.trials as usize;
    let stop = StopRule { max_reflections: n_reflections, max_time: 1e4 };
    let bspec = BilliardSpec::new(hooke, vec![WallSurface::Quadric4(q4.clone())], stop)?;
    let orbit = run_billiard(&bspec, &y0)?;
    if orbit.events.len() != n_reflections {
        return Err(RegulusError::Numerical(format!(
            "hooke billiard stopped early: {} reflections ({:?})",
            orbit.events.len(),
            orbit.termination
        )));
    }
    let mut max = 0.0f64;
    // BL stays small upstairs
    max = max.max(scaled(orbit.max_drift(&hooke, "BL")?, 1e-9, 1e-6));
    let pushed = push_orbit_ks(&orbit, &hooke)?;
    // direct Kepler billiard from the pushed data, same time parameter
    let kspec = SystemSpec::kepler3_reparam(m, f);
    let dspec = BilliardSpec::new(kspec, vec![WallSurface::Focused3(wall3)], stop)?;
    let direct = run_billiard(&dspec, &pushed.arcs[0].states[0])?;
    if direct.events.len() != pushed.events.len() {
        return Err(RegulusError::Numerical(format!(
            "event count mismatch: pushed {} vs direct {}",
            pushed.events.len(),
            direct.events.len()
        )));
    }
    for (pe, de) in pushed.events.iter().zip(&direct.events) {
        for k in 0..3 {
            max = max.max((pe.y_in[k] - de.y_in[k]).abs());
        }
        max = max.max((pe.t - de.t).abs());
    }
    // pointwise arc comparison at three interior times per arc
    let opts = IntegrateOpts::default();
    for (pa, da) in pushed.arcs.iter().zip(&direct.arcs) {
        let (t0, t1) = (pa.times[0], *pa.times.last().expect("nonempty"));
        if t1 - t0 < 1e-6 || da.times[0] > t0 + 1e-9 {
            continue;
        }
        let probes: Vec<f64> = (1..4).map(|k| t0 + (t1 - t0) * k as f64 / 4.0).collect();
        let dstates =
            crate::billiards::integrate_at_times(&kspec, &da.states[0], da.times[0], &probes, opts)?;
        for (tp, dy) in probes.iter().zip(&dstates) {
            // interpolate the pushed arc linearly between its two bracketing samples
            let idx = pa.times.partition_point(|t| t < tp).min(pa.times.len() - 1);
            let (ta, tb) = (pa.times[idx - 1], pa.times[idx]);
            let lam = if tb > ta { (tp - ta) / (tb - ta) } else { 0.0 };
            for (k, dv) in dy.iter().enumerate().take(3) {
                let interp = pa.states[idx - 1][k] * (1.0 - lam) + pa.states[idx][k] * lam;
                // linear interpolation itself carries O(h²) error; compare
                // against it only as a coarse guard, scaled accordingly
                max = max.max(scaled((interp - dv).abs(), 5e-3, 1e-6));
            }
        }
    }
    // two fiber lifts of the same Kepler data push to the same orbit
    let q0 = unpack_phase_ih(&pushed.arcs[0].states[0]);
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for theta in [0.7, 2.9] {
        let lifted = ks_lift(&PhasePointIH::new(q0.q, q0.p), theta)?;
        let lobit = run_billiard(&bspec, &pack_phase_h(&lifted))?;
        let lpush = push_orbit_ks(&lobit, &hooke)?;
        let ev: Vec<Vec<f64>> = lpush.events.iter().map(|e| e.y_in[0..3].to_vec()).collect();
        if let Some(p) = &prev {
            if p.len() != ev.len() {
                return Err(RegulusError::Numerical("lift event count mismatch".into()));
            }
            for (x, y) in p.iter().zip(&ev) {
                for k in 0..3 {
                    max = max.max((x[k] - y[k]).abs());
                }
            }
        }
        prev = Some(ev);
    }
    Ok(max)
}

fn bw_composition(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let z = ctx.rng.quaternion(2.0);
        if z.im().norm() < 0.1 {
            continue;
        }
        let x = match bw_base(z)? {
            BwPoint::Finite(x) => x,
            BwPoint::Infinity => continue,
        };
        // entrywise position formula
        let s = z.x * z.x + z.y * z.y + z.z * z.z;
        let w2 = z.w * z.w;
        let ex = 0.5 * (z.x + z.x * (w2 + 1.0) / s);
        let ey = 0.5 * (z.y + (z.y * (w2 - 1.0) + 2.0 * z.w * z.z) / s);
        let ez = 0.5 * (z.z + (z.z * (w2 - 1.0) - 2.0 * z.w * z.y) / s);
        let expected = PureQuaternion::new(ex, ey, ez);
        max = max.max((x - expected).norm() / (1.0 + expected.norm()));
        done += 1;
    }
    Ok(max)
}

fn bw_planar_birkhoff(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let kappa = ctx.rng.range(0.0, TAU);
        let zeta = Complex64::new(ctx.rng.symmetric(2.0), ctx.rng.symmetric(2.0));
        if zeta.norm() < 0.2 {
            continue;
        }
        let z = birkhoff_plane_embed(zeta, kappa);
        let x = match bw_base(z.to_quaternion())? {
            BwPoint::Finite(x) => x,
            BwPoint::Infinity => continue,
        };
        let expected = (zeta + zeta.inv()) / 2.0;
        let (got, off) = birkhoff_plane_coords(x, kappa);
        let scale = 1.0 + expected.norm();
        max = max.max(off / scale);
        max = max.max((got - expected).norm() / scale);
        done += 1;
    }
    Ok(max)
}

fn lemma16_images(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let pt = random_lambda_hat(&mut ctx.rng);
        let scale = 1.0 + pt.z.norm_sq() * pt.w.norm();
        // Φ₁(Λ̂) ⊆ Σ̂
        let (alpha, beta) = phi1_cotangent(pt.z, pt.w)?;
        max = max.max(bl(alpha, beta).abs() / scale);
        // images of the full chain are purely imaginary
        let (x, y) = bw_phase_raw(pt.z, pt.w)?;
        max = max.max(x.re().abs() / scale);
        max = max.max(y.re().abs() / scale);
        // surjectivity: lift a random target and return to it
        let xt = ctx.rng.pure(1.5);
        let xi = PureQuaternion::new(1.0, 0.0, 0.0);
        if (xt - xi).norm() < 0.2 || (xt + xi).norm() < 0.2 || xt.norm() < 0.1 {
            continue;
        }
        let yt = ctx.rng.pure(1.5);
        let theta = ctx.rng.range(0.0, TAU);
        if let Ok(lift) = crate::transforms::bw_lift(xt, yt, theta) {
            let (xb, yb) = bw_phase(&lift)?;
            let s2 = 1.0 + xt.norm() + yt.norm();
            max = max.max((xb - xt).norm() / s2);
            max = max.max((yb - yt).norm() / s2);
        }
    }
    Ok(max)
}

fn lemma17_real_line(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let t = ctx.rng.symmetric(50.0);
        match phi1(MoebiusPoint::Finite(Quaternion::scalar(t))) {
            MoebiusPoint::Finite(a) => {
                max = max.max((a.norm() - 1.0).abs());
                max = max.max(a.y.abs().max(a.z.abs()));
            }
            MoebiusPoint::Infinity => return Err(RegulusError::Numerical("φ₁(ℝ) hit ∞".into())),
        }
        // and the base map sends the real line to infinity
        if bw_base(Quaternion::scalar(t))? != BwPoint::Infinity {
            return Err(RegulusError::Numerical("bw_base(ℝ) must be ∞".into()));
        }
    }
    Ok(max)
}

fn bw_symplectic(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    let h = 1e-5;
    for _ in 0..ctx.trials {
        let pt = random_lambda_hat(&mut ctx.rng);
        let (dz1, dw1) = lambda_hat_tangent(&mut ctx.rng, &pt);
        let (dz2, dw2) = lambda_hat_tangent(&mut ctx.rng, &pt);
        let omega_up = dw1.dot(dz2) - dw2.dot(dz1);
        let fd = |dz: Quaternion, dw: Quaternion| -> Result<(Quaternion, Quaternion)> {
            let (xp, yp) = bw_phase_raw(pt.z + dz * h, pt.w + dw * h)?;
            let (xm, ym) = bw_phase_raw(pt.z - dz * h, pt.w - dw * h)?;
            Ok(((xp - xm) / (2.0 * h), (yp - ym) / (2.0 * h)))
        };
        let (dx1, dy1) = fd(dz1, dw1)?;
        let (dx2, dy2) = fd(dz2, dw2)?;
        let omega_down = dy1.im().dot(dx2.im()) - dy2.im().dot(dx1.im());
        let scale = 1.0 + pt.z.norm_sq() * (1.0 + pt.w.norm());
        max = max.max((omega_down - omega_up).abs() / scale);
    }
    Ok(max)
}

fn bw_pullback_identities(ctx: &mut Ctx) -> Result<f64> {
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let pt = random_lambda_hat(&mut ctx.rng);
        let (x, y) = match bw_phase(&pt) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let rho = (pt.z.conj() - pt.z).norm();
        let xi = PureQuaternion::new(1.0, 0.0, 0.0);
        let pairs = [
            ((x - xi).norm(), (pt.z - I).norm_sq() / rho),
            ((x + xi).norm(), (pt.z + I).norm_sq() / rho),
            (
                y.norm_sq(),
                rho.powi(4) * pt.w.norm_sq() / (4.0 * (pt.z - I).norm_sq() * (pt.z + I).norm_sq()),
            ),
        ];
        for (lhs, rhs) in pairs {
            max = max.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    Ok(max)
}

fn random_reduced_state(rng: &mut Stream, p_theta_zero: bool) -> SphericalState {
    loop {
        let st = SphericalState::new(
            rng.range(1.15, 2.8),
            rng.range(0.3, PI - 0.3),
            rng.range(0.0, TAU),
            rng.range(0.0, TAU),
            rng.symmetric(1.2),
            rng.symmetric(1.2),
            rng.symmetric(1.2),
            if p_theta_zero { 0.0 } else { rng.symmetric(1.2) },
        );
        if let Ok(s) = st {
            return s;
        }
    }
}

fn pullback_consistency(ctx: &mut Ctx, reduced: SystemSpec, physical: SystemSpec) -> Result<f64> {
    let mut max = 0.0f64;
    let mut done = 0u64;
    while done < ctx.trials {
        let st = random_reduced_state(&mut ctx.rng, true);
        let k = match eval_h(&reduced, &[st.r, st.psi, st.kappa, st.p_r, st.p_psi, st.p_kappa]) {
            Ok(k) => k,
            Err(_) => continue,
        };
        let pt = spherical_to_phase(&st)?;
        let lam = match LambdaHatPoint::new(pt.z, pt.w, 1e-8) {
            Ok(l) => l,
            Err(_) => continue,
        };
        let (x, yv) = match bw_phase(&lam) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let h_shift = eval_h(&physical, &[x.x, x.y, x.z, yv.x, yv.y, yv.z])?;
        let rho2 = (pt.z.conj() - pt.z).norm_sq();
        let rho_f = (pt.z - I).norm_sq() * (pt.z + I).norm_sq() / rho2;
        max = max.max((rho_f * h_shift - k).abs() / (1.0 + k.abs()));
        done += 1;
    }
    Ok(max)
}

fn ktilde_spherical_consistency(ctx: &mut Ctx) -> Result<f64> {
    let reduced = SystemSpec::ktilde(-0.45, -1.0, -0.7, 0.0);
    let physical = SystemSpec::twocenter3(-0.45, -1.0, -0.7);
    pullback_consistency(ctx, reduced, physical)
}

fn ktilde_separation(ctx: &mut Ctx) -> Result<f64> {
    let spec = SystemSpec::ktilde(-0.45, -1.0, -0.7, 0.0);
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let st = random_reduced_state(&mut ctx.rng, true);
        let y = [st.r, st.psi, st.kappa, st.p_r, st.p_psi, st.p_kappa];
        let (k1, k2) = crate::systems::ktilde_parts(&spec, &y)?;
        let k = eval_h(&spec, &y)?;
        max = max.max((k - (k1 + k2)).abs());
    }
    Ok(max)
}

fn conservation_along_flow(
    spec: &SystemSpec,
    y0: &[f64],
    t_end: f64,
    names_tols: &[(&str, f64)],
    primary: f64,
) -> Result<f64> {
    let traj = integrate(spec, y0, (0.0, t_end), IntegrateOpts::default())?;
    let conserved = crate::systems::conserved_set(spec);
    let mut max = 0.0f64;
    for (name, tol) in names_tols {
        let c = conserved
            .iter()
            .find(|c| c.name == *name)
            .ok_or_else(|| RegulusError::Usage(format!("no conserved '{name}'")))?;
        let v0 = c.eval(spec, y0)?;
        for y in &traj.states {
            let d = (c.eval(spec, y)? - v0).abs() / (1.0 + v0.abs());
            max = max.max(scaled(d, *tol, primary));
        }
    }
    Ok(max)
}

fn reduced_conservation(ctx: &mut Ctx) -> Result<f64> {
    let spec = SystemSpec::ktilde(-0.6, -1.0, -1.0, 0.0);
    let mut max = 0.0f64;
    for _ in 0..ctx.trials {
        let y0 = loop {
            let r = ctx.rng.range(1.3, 1.9);
            let psi = ctx.rng.range(1.0, PI - 1.0);
            match ktilde_zero_energy(&spec, r, psi, 0.0, ctx.rng.symmetric(0.3), 0.3) {
                Ok(y) => break y,
                Err(_) => continue,
            }
        };
        max = max.max(conservation_along_flow(
            &spec,
            &y0,
            100.0,
            &[("Ktilde1", 1e-6), ("Ktilde2", 1e-6), ("P_kappa", 1e-9)],
            1e-6,
        )?);
    }
    Ok(max)
}

fn reduced_billiard_scenario() -> (SystemSpec, Vec<f64>, Vec<WallSurface>) {
    let spec = SystemSpec::ktilde(-0.6, -1.0, -1.0, 0.0);
    let y0 = ktilde_zero_energy(&spec, 1.6, 1.8, 0.0, 0.25, 0.3).expect("reachable zero level");
    let walls = vec![
        WallSurface::SphereR { r0: 2.0 },
        WallSurface::ConePsi { psi0: PI / 3.0 },
    ];
    (spec, y0, walls)
}

fn billiard_spheres_cones_integrable(ctx: &mut Ctx) -> Result<f64> {
    let (spec, y0, walls) = reduced_billiard_scenario();
    let stop = StopRule { max_reflections: ctx.trials as usize, max_time: 1e5 };
    let orbit = run_billiard(&BilliardSpec::new(spec, walls, stop)?, &y0)?;
    if orbit.events.len() < ctx.trials as usize {
        return Err(RegulusError::Numerical(format!(
            "reduced billiard stopped early ({} reflections, {:?})",
            orbit.events.len(),
            orbit.termination
        )));
    }
    let mut max = 0.0f64;
    for name in ["Ktilde1", "Ktilde2"] {
        max = max.max(orbit.max_drift(&spec, name)?);
    }
    Ok(max)
}

fn thm22_equivalence(ctx: &mut Ctx) -> Result<f64> {
    let (spec, y0, walls) = reduced_billiard_scenario();
    let stop = StopRule { max_reflections: ctx.trials as usize, max_time: 1e5 };
    let tight = IntegrateOpts { rel_tol: 1e-12, abs_tol: 1e-14, max_step: f64::INFINITY };
    let mut bspec = BilliardSpec::new(spec, walls.clone(), stop)?;
    bspec.opts = tight;
    let orbit = run_billiard(&bspec, &y0)?;
    let pushed = push_orbit_bw(&orbit, &spec)?;
    // fitted r-confocal walls
    let wall_imgs: Vec<WallSurface> = walls
        .iter()
        .map(|w| bw_wall_image(w).map(WallSurface::Focused3))
        .collect::<Result<_>>()?;
    let physical = SystemSpec::twocenter3(spec.f, spec.m1, spec.m2);
    // the pushed initial state sits on the zero level of the shifted H
    let y0_phys = pushed.arcs[0].states[0].clone();
    let mut max = scaled(eval_h(&physical, &y0_phys)?.abs(), 1e-8, 1e-5);
    let mut dspec = BilliardSpec::new(physical, wall_imgs, stop)?;
    dspec.opts = tight;
    let direct = run_billiard(&dspec, &y0_phys)?;
    if direct.events.len() != pushed.events.len() {
        return Err(RegulusError::Numerical(format!(
            "event count mismatch: pushed {} vs direct {}",
            pushed.events.len(),
            direct.events.len()
        )));
    }
    for (pe, de) in pushed.events.iter().zip(&direct.events) {
        if pe.wall != de.wall {
            return Err(RegulusError::Numerical("wall sequence mismatch".into()));
        }
        for k in 0..3 {
            max = max.max((pe.y_in[k] - de.y_in[k]).abs());
        }
    }
    Ok(max)
}

fn lagrange_separation(ctx: &mut Ctx) -> Result<f64> {
    let reduced = SystemSpec::ktilde(-0.8, -1.0, -0.9, 0.12);
    let physical = SystemSpec::lagrange3(-0.8, 0.12, -1.0, -0.9);
    let mut max = pullback_consistency(ctx, reduced, physical)?;
    // the separated parts stay conserved along the reduced Lagrange flow
    let y0 = ktilde_zero_energy(&reduced, 1.5, 1.7, 0.0, 0.2, 0.25)?;
    max = max.max(scaled(
        conservation_along_flow(
            &reduced,
            &y0,
            100.0,
            &[("Ktilde1", 1e-6), ("Ktilde2", 1e-6), ("P_kappa", 1e-9)],
            1e-6,
        )?,
        1.0,
        1e-8 / 1e-6,
    ));
    Ok(max)
}

fn collision_regularization(_ctx: &mut Ctx) -> Result<f64> {
    let (m1, m2) = (-1.0, -1.0);
    let x0 = 1.4_f64;
    let f = m1 / (x0 - 1.0).abs() + m2 / (x0 + 1.0).abs();
    // the physical flow must abort at the collision
    let phys = SystemSpec::twocenter3(f, m1, m2);
    let phys_run = integrate(
        &phys,
        &[x0, 0.0, 0.0, 0.0, 0.0, 0.0],
        (0.0, 10.0),
        IntegrateOpts::default(),
    );
    let physical_aborts = matches!(phys_run, Err(RegulusError::Singular(_)));
    // the transformed flow passes through z = i without step failure
    let zeta = x0 + (x0 * x0 - 1.0).sqrt();
    let spec_k = SystemSpec::twocenter_transformed(f, m1, m2);
    let y0 = pack_phase_h(&PhasePointH::new(I * zeta, Quaternion::zero()));
    let traj = integrate(&spec_k, &y0, (0.0, 120.0), IntegrateOpts::default())?;
    let zetas: Vec<f64> = traj.states.iter().map(|y| unpack_phase_h(y).z.x).collect();
    let crossed = zetas.windows(2).any(|w| (w[0] - 1.0) * (w[1] - 1.0) <= 0.0);
    let min_dist = zetas.iter().map(|z| (z - 1.0).abs()).fold(f64::INFINITY, f64::min);
    if !physical_aborts {
        return Ok(f64::INFINITY);
    }
    Ok(if crossed { 0.0 } else { min_dist })
}

fn ztheta_deck_transformation_probe(ctx: &mut Ctx) -> Result<f64> {
    // Asserts the involution found numerically,
    // (r, ψ, κ, θ) ↦ (1/r, ψ, κ+π, θ+π); shifting θ alone by π does not
    // fix z_θ and is only probed, never asserted.
    let mut max = 0.0f64;
    let mut literal_min = f64::INFINITY;
    for _ in 0..ctx.trials {
        let r = ctx.rng.range(0.3, 3.0);
        let psi = ctx.rng.range(0.1, PI - 0.1);
        let kappa = ctx.rng.range(0.0, TAU);
        let theta = ctx.rng.range(0.0, TAU);
        let z = z_theta(r, psi, kappa, theta);
        let (r2, p2, k2, t2) = deck_transform(r, psi, kappa, theta);
        let z2 = z_theta(r2, p2, k2, t2);
        max = max.max((z - z2).norm() / (1.0 + z.norm()));
        let z_lit = z_theta(r, psi, kappa, theta + PI);
        literal_min = literal_min.min((z - z_lit).norm() / (1.0 + z.norm()));
    }
    // data only: on generic samples the literal transformation moves the point
    let _ = literal_min;
    Ok(max)
}
