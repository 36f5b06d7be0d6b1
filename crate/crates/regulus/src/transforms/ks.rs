//! The Levi-Civita transformation, the Kustaanheimo-Stiefel mapping with its
//! Σ¹ constraint and fiber lifts, and Levi-Civita planes.

use crate::error::{RegulusError, Result};
use crate::quat::{bl, hopf, mul, PureQuaternion, Quaternion, I, J};
use crate::DEFAULT_EXCLUSION;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of `T*ℍ`: position `z`, conjugate momentum `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePointH {
    pub z: Quaternion,
    pub w: Quaternion,
}

/// A point of `T*𝕀ℍ`: position `q`, momentum `p`, both purely imaginary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePointIH {
    #[serde(rename = "Q")]
    pub q: PureQuaternion,
    #[serde(rename = "P")]
    pub p: PureQuaternion,
}

impl PhasePointH {
    pub fn new(z: Quaternion, w: Quaternion) -> Self {
        Self { z, w }
    }

    /// Signed residual of the Σ membership condition `BL(z, w) = 0`.
    pub fn sigma_residual(&self) -> f64 {
        bl(self.z, self.w)
    }

    /// Membership in `Σ¹ = {BL = 0} \ {z = 0}`.
    pub fn on_sigma1(&self, tol: f64) -> bool {
        self.z.norm() > 0.0
            && self.sigma_residual().abs() <= tol * (1.0 + self.z.norm() * self.w.norm())
    }
}

impl PhasePointIH {
    pub fn new(q: PureQuaternion, p: PureQuaternion) -> Self {
        Self { q, p }
    }
}

/// Levi-Civita transformation on complex pairs:
/// `(z, w) ↦ (q = z², p = z·w / (2|z|²))`.
pub fn levi_civita(z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
    let n2 = z.norm_sqr();
    if n2 == 0.0 {
        return Err(RegulusError::Domain(
            "Levi-Civita singular at origin".into(),
        ));
    }
    Ok((z * z, z * w / (2.0 * n2)))
}

/// Full Kustaanheimo-Stiefel map `(z, w) ↦ (Q = z̄iz, P = z̄iw/(2|z|²))`
/// without the Σ¹ restriction; `P` is returned as a full quaternion whose
/// scalar part vanishes exactly when `BL(z, w) = 0`.
pub fn ks_map_raw(z: Quaternion, w: Quaternion) -> Result<(PureQuaternion, Quaternion)> {
    let n2 = z.norm_sq();
    if n2 == 0.0 {
        return Err(RegulusError::Domain("K.S. singular at z = 0".into()));
    }
    let q = hopf(z);
    let p = mul(mul(z.conj(), I), w) / (2.0 * n2);
    Ok((q, p))
}

/// Restricted K.S. mapping `Σ¹ → T*(𝕀ℍ \ {0})`. Fails off Σ¹.
pub fn ks_forward(pt: &PhasePointH) -> Result<PhasePointIH> {
    let (q, p) = ks_map_raw(pt.z, pt.w)?;
    if !pt.on_sigma1(1e-10) {
        return Err(RegulusError::Constraint(format!(
            "point not on Σ¹ (BL = {:.3e})",
            pt.sigma_residual()
        )));
    }
    Ok(PhasePointIH::new(q, p.im()))
}

/// Which local section of the Hopf fibration a lift uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `z ∝ 1 - i·Q̂`, valid away from the ray `Q̂ = -i`.
    Principal,
    /// `z ∝ j - k·Q̂`, valid away from the ray `Q̂ = +i`.
    Alternate,
}

fn chart_direction(qhat: PureQuaternion, chart: Chart) -> Quaternion {
    let qh = qhat.to_quaternion();
    match chart {
        Chart::Principal => Quaternion::scalar(1.0) - mul(I, qh),
        Chart::Alternate => J - mul(crate::quat::K, qh),
    }
}

/// Section of the restricted K.S. map along a chosen chart: the fiber angle
/// `theta` sweeps `{e^{iθ}z}`. Momentum lift is `w = -2·i·z·P`, which
/// satisfies `BL(z, w) = 0` identically for pure `P`.
pub fn ks_lift_chart(pt: &PhasePointIH, theta: f64, chart: Chart) -> Result<PhasePointH> {
    let qn = pt.q.norm();
    if qn == 0.0 {
        return Err(RegulusError::Domain("K.S. lift undefined at Q = 0".into()));
    }
    let qhat = pt.q / qn;
    let dir = chart_direction(qhat, chart);
    let dn = dir.norm();
    if dn <= DEFAULT_EXCLUSION {
        return Err(RegulusError::Chart("use alternate lift chart".into()));
    }
    let z = qn.sqrt() * Quaternion::exp_i(theta) * (dir / dn);
    let w = -2.0 * mul(mul(I, z), pt.p.to_quaternion());
    Ok(PhasePointH::new(z, w))
}

/// Section of the restricted K.S. map in the principal chart.
pub fn ks_lift(pt: &PhasePointIH, theta: f64) -> Result<PhasePointH> {
    ks_lift_chart(pt, theta, Chart::Principal)
}

/// Lift choosing automatically whichever chart is further from its singular
/// ray.
pub(crate) fn ks_lift_any(pt: &PhasePointIH, theta: f64) -> Result<PhasePointH> {
    let qn = pt.q.norm();
    if qn == 0.0 {
        return Err(RegulusError::Domain("K.S. lift undefined at Q = 0".into()));
    }
    let qhat = pt.q / qn;
    let chart = if chart_direction(qhat, Chart::Principal).norm()
        >= chart_direction(qhat, Chart::Alternate).norm()
    {
        Chart::Principal
    } else {
        Chart::Alternate
    };
    ks_lift_chart(pt, theta, chart)
}

/// True iff `v1, v2` span a Levi-Civita plane: unit, linearly independent and
/// `BL(v1, v2) = 0`.
pub fn lc_plane_check(v1: Quaternion, v2: Quaternion) -> bool {
    let tol = 1e-10;
    if (v1.norm() - 1.0).abs() > tol || (v2.norm() - 1.0).abs() > tol {
        return false;
    }
    if (v1 - v2).norm() <= tol || (v1 + v2).norm() <= tol {
        return false;
    }
    bl(v1, v2).abs() <= tol
}

/// Lift a plane through the origin of 𝕀ℍ, spanned by unit vectors `w1, w2`,
/// to a Levi-Civita plane: returns `(v1, v2)` with `hopf(v1) = w1`,
/// `hopf(v2) = w2` and `BL(v1, v2) = 0`. The phase of `v1` carries the
/// adjustment `e^{iθ₁}` that kills the bilinear pairing.
pub fn lc_plane_lift(w1: PureQuaternion, w2: PureQuaternion) -> Result<(Quaternion, Quaternion)> {
    let tol = 1e-10;
    if (w1.norm() - 1.0).abs() > tol || (w2.norm() - 1.0).abs() > tol {
        return Err(RegulusError::Domain("inputs must be unit vectors".into()));
    }
    if w1.cross(w2).norm() <= tol {
        return Err(RegulusError::Domain(
            "inputs must be linearly independent".into(),
        ));
    }
    let v1 = ks_lift_any(&PhasePointIH::new(w1, PureQuaternion::zero()), 0.0)?.z;
    let v2 = ks_lift_any(&PhasePointIH::new(w2, PureQuaternion::zero()), 0.0)?.z;
    // BL(e^{iθ}v1, v2) = cos θ·BL(v1,v2) + sin θ·⟨v1,v2⟩; kill it.
    let a = bl(v1, v2);
    let b = v1.dot(v2);
    let v1 = if a.hypot(b) <= 1e-15 {
        v1
    } else {
        Quaternion::exp_i(f64::atan2(-a, b)) * v1
    };
    Ok((v1, v2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{K, ONE};
    use crate::rng::Stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn levi_civita_examples() {
        let (q, p) = levi_civita(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert_eq!((q, p), (c(1.0, 0.0), c(1.0, 0.0)));
        let (q, p) = levi_civita(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        assert_eq!((q, p), (c(-1.0, 0.0), c(0.0, 0.0)));
        let (q, p) = levi_civita(c(1.0, 1.0), c(2.0, 0.0)).unwrap();
        assert!((q - c(0.0, 2.0)).norm() < 1e-15);
        assert!((p - c(0.5, 0.5)).norm() < 1e-15);
        assert!(levi_civita(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn levi_civita_is_canonical_for_one_form() {
        // Re(p̄ dq) = Re(w̄ dz): check on finite differences.
        let mut rng = Stream::new(2, "lc-canonical");
        let h = 1e-6;
        for _ in 0..100 {
            let z = c(rng.symmetric(2.0), rng.symmetric(2.0));
            if z.norm() < 0.3 {
                continue;
            }
            let w = c(rng.symmetric(2.0), rng.symmetric(2.0));
            let dz = c(rng.symmetric(1.0), rng.symmetric(1.0));
            let (q0, p0) = levi_civita(z, w).unwrap();
            let (q1, _) = levi_civita(z + h * dz, w).unwrap();
            let dq = (q1 - q0) / h;
            let lhs = (p0.conj() * dq).re;
            let rhs = (w.conj() * dz).re;
            assert!((lhs - rhs).abs() < 1e-4 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn ks_forward_examples() {
        // (z=1, w=4j): Q = i, P = (i/2)(4j) = 2k
        let pt = PhasePointH::new(ONE, 4.0 * J);
        let out = ks_forward(&pt).unwrap();
        assert!((out.q - PureQuaternion::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((out.p - PureQuaternion::new(0.0, 0.0, 2.0)).norm() < 1e-15);

        let out = ks_forward(&PhasePointH::new(ONE, Quaternion::zero())).unwrap();
        assert_eq!(out.p, PureQuaternion::zero());

        // fiber invariance at θ = 0.7
        let r = Quaternion::exp_i(0.7);
        let out2 = ks_forward(&PhasePointH::new(r * ONE, r * (4.0 * J))).unwrap();
        assert!((out2.q - out.q).norm() < 1e-14);
        let outp = ks_forward(&PhasePointH::new(r, r * (4.0 * J))).unwrap();
        assert!((outp.p - PureQuaternion::new(0.0, 0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn ks_forward_rejects_off_sigma1() {
        assert!(matches!(
            ks_forward(&PhasePointH::new(ONE, I)),
            Err(RegulusError::Constraint(_))
        ));
        assert!(matches!(
            ks_forward(&PhasePointH::new(Quaternion::zero(), I)),
            Err(RegulusError::Domain(_))
        ));
    }

    #[test]
    fn ks_lift_examples() {
        let pt = PhasePointIH::new(PureQuaternion::new(1.0, 0.0, 0.0), PureQuaternion::zero());
        let lifted = ks_lift(&pt, 0.0).unwrap();
        assert!((lifted.z - ONE).norm() < 1e-15);
        assert_eq!(lifted.w, Quaternion::zero());

        let pt = PhasePointIH::new(PureQuaternion::new(2.0, 0.0, 0.0), PureQuaternion::zero());
        let lifted = ks_lift(&pt, 0.0).unwrap();
        assert!((lifted.z - Quaternion::scalar(2.0_f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn ks_lift_round_trip() {
        let mut rng = Stream::new(23, "ks-roundtrip");
        for _ in 0..1000 {
            let q = rng.pure(2.0);
            if q.norm() < 1e-2 {
                continue;
            }
            let p = rng.pure(2.0);
            let theta = rng.range(0.0, std::f64::consts::TAU);
            let pt = PhasePointIH::new(q, p);
            let lifted = match ks_lift_any(&pt, theta) {
                Ok(l) => l,
                Err(_) => continue,
            };
            assert!(lifted.on_sigma1(1e-12));
            let back = ks_forward(&lifted).unwrap();
            let scale = 1.0 + q.norm() + p.norm();
            assert!((back.q - q).norm() <= 1e-12 * scale);
            assert!((back.p - p).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn ks_lift_chart_obstruction() {
        let minus_i = PureQuaternion::new(-1.0, 0.0, 0.0);
        let pt = PhasePointIH::new(minus_i, PureQuaternion::zero());
        assert!(matches!(ks_lift(&pt, 0.0), Err(RegulusError::Chart(_))));
        let lifted = ks_lift_chart(&pt, 0.0, Chart::Alternate).unwrap();
        assert!((hopf(lifted.z) - minus_i).norm() < 1e-14);
        assert!(matches!(
            ks_lift(&PhasePointIH::new(PureQuaternion::zero(), PureQuaternion::zero()), 0.0),
            Err(RegulusError::Domain(_))
        ));
    }

    #[test]
    fn lc_plane_check_examples() {
        assert!(lc_plane_check(ONE, J));
        assert!(!lc_plane_check(ONE, I)); // BL(1, i) = -1
        assert!(!lc_plane_check(ONE, ONE)); // not linearly independent
        assert!(!lc_plane_check(2.0 * ONE, J)); // not unit
    }

    #[test]
    fn lc_plane_lift_examples() {
        let wi = PureQuaternion::new(1.0, 0.0, 0.0);
        let wj = PureQuaternion::new(0.0, 1.0, 0.0);
        let wk = PureQuaternion::new(0.0, 0.0, 1.0);
        for w2 in [wj, wk] {
            let (v1, v2) = lc_plane_lift(wi, w2).unwrap();
            assert!((hopf(v1) - wi).norm() < 1e-12);
            assert!((hopf(v2) - w2).norm() < 1e-12);
            assert!(bl(v1, v2).abs() < 1e-12);
            assert!(lc_plane_check(v1, v2));
        }
        assert!(lc_plane_lift(wi, wi).is_err());
    }

    #[test]
    fn lc_plane_lift_random_passes_check() {
        let mut rng = Stream::new(31, "lc-lift");
        for _ in 0..300 {
            let w1 = rng.unit_pure();
            let w2 = rng.unit_pure();
            if w1.cross(w2).norm() < 1e-3 {
                continue;
            }
            let (v1, v2) = lc_plane_lift(w1, w2).unwrap();
            assert!(lc_plane_check(v1, v2));
            assert!((hopf(v1) - w1).norm() < 1e-11);
            assert!((hopf(v2) - w2).norm() < 1e-11);
        }
    }

    #[test]
    fn orthogonal_lc_basis_identity() {
        // v̄1 i v1 = -v̄2 i v2 for orthonormal BL-orthogonal pairs
        let mut rng = Stream::new(37, "lc-identity");
        for _ in 0..200 {
            let v1 = rng.unit_quaternion();
            let iv1 = mul(I, v1);
            let mut v2 = rng.quaternion(1.0);
            v2 = v2 - v1 * v1.dot(v2) - iv1 * iv1.dot(v2);
            if v2.norm() < 1e-3 {
                continue;
            }
            let v2 = v2 / v2.norm();
            assert!(bl(v1, v2).abs() < 1e-14);
            let d = (hopf(v1) + hopf(v2)).norm();
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn k_is_orthogonal_chart_direction() {
        // keep K import alive and sanity-check the alternate chart at Q̂ = j
        let pt = PhasePointIH::new(PureQuaternion::new(0.0, 1.0, 0.0), PureQuaternion::zero());
        let alt = ks_lift_chart(&pt, 0.0, Chart::Alternate).unwrap();
        assert!((hopf(alt.z) - pt.q).norm() < 1e-14);
        assert!((mul(K, K) + ONE).norm() < 1e-15);
    }
}
