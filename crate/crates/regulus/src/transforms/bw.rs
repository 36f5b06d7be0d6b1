//! The Birkhoff-Waldvogel transformation: quaternionic Möbius maps `φ₁, φ₂`
//! extended to ∞, the base map `φ₂ ∘ Hopf ∘ φ₁`, its cotangent-lifted phase
//! version `Φ₂ ∘ K.S. ∘ Φ₁` on the constraint set Λ̂, fiber lifts, and the
//! Birkhoff spheres/planes that foliate the pre-image of a plane through the
//! axis of centers.

use crate::error::{RegulusError, Result};
use crate::quat::{bl, hopf, mul, PureQuaternion, Quaternion, I};
use crate::transforms::ks::{ks_lift_any, ks_map_raw, PhasePointIH};
use crate::transforms::normalize_angle;
use crate::DEFAULT_EXCLUSION;
use serde::{Deserialize, Serialize};

/// A point of ℍ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoebiusPoint {
    Finite(Quaternion),
    Infinity,
}

/// A point of 𝕀ℍ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BwPoint {
    Finite(PureQuaternion),
    Infinity,
}

/// `φ₁ : ℍ ∪ {∞} → ℍ ∪ {∞}`, `z ↦ i - 2/(z - i)`; an involution that swaps
/// `i ↔ ∞` and sends the real line onto the unit circle of span{1, i}.
pub fn phi1(p: MoebiusPoint) -> MoebiusPoint {
    match p {
        MoebiusPoint::Infinity => MoebiusPoint::Finite(I),
        MoebiusPoint::Finite(z) => {
            let d = z - I;
            if d.norm_sq() == 0.0 {
                MoebiusPoint::Infinity
            } else {
                // inverse of the quaternion d; unwrap is safe, d != 0
                MoebiusPoint::Finite(I - 2.0 * d.inverse().expect("nonzero"))
            }
        }
    }
}

/// Inverse of `φ₁` (the same Möbius involution).
pub fn phi1_inv(p: MoebiusPoint) -> MoebiusPoint {
    phi1(p)
}

/// `φ₂ : 𝕀ℍ ∪ {∞} → 𝕀ℍ ∪ {∞}`, the same involution restricted to the purely
/// imaginary quaternions.
pub fn phi2(p: BwPoint) -> BwPoint {
    match p {
        BwPoint::Infinity => BwPoint::Finite(PureQuaternion::new(1.0, 0.0, 0.0)),
        BwPoint::Finite(q) => {
            let qq = q.to_quaternion();
            let d = qq - I;
            if d.norm_sq() == 0.0 {
                BwPoint::Infinity
            } else {
                let x = I - 2.0 * d.inverse().expect("nonzero");
                BwPoint::Finite(x.im())
            }
        }
    }
}

/// Inverse of `φ₂` (the same involution).
pub fn phi2_inv(p: BwPoint) -> BwPoint {
    phi2(p)
}

/// Base Birkhoff-Waldvogel map `φ₂ ∘ Hopf ∘ φ₁ : ℍ ∪ {∞} → 𝕀ℍ ∪ {∞}`.
///
/// Real `z` sit over physical infinity and map to ∞; points strictly inside
/// the exclusion tube around ℝ (but not exactly real) are rejected because the
/// `φ₂` denominator degenerates there.
pub fn bw_base(z: Quaternion) -> Result<BwPoint> {
    let im_norm = z.im().norm();
    if im_norm == 0.0 {
        return Ok(BwPoint::Infinity);
    }
    if im_norm < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular(format!(
            "z within {DEFAULT_EXCLUSION:.1e} of the real line"
        )));
    }
    let alpha = phi1(MoebiusPoint::Finite(z));
    let q = match alpha {
        MoebiusPoint::Infinity => BwPoint::Infinity,
        MoebiusPoint::Finite(a) => BwPoint::Finite(hopf(a)),
    };
    if let BwPoint::Finite(qv) = q {
        if (qv - PureQuaternion::new(1.0, 0.0, 0.0)).norm() < DEFAULT_EXCLUSION {
            return Err(RegulusError::Singular(
                "φ₂ denominator vanishes (z too close to the real line)".into(),
            ));
        }
    }
    Ok(phi2(q))
}

/// Residual of the Λ̂ momentum constraint, `Re((z̄ + i)·w·(z̄ - i))`.
///
/// This ordering is the one equivalent to `BL(Φ₁(z,w)) = 0` (and hence to
/// `P_θ = 0` in the fiber chart); the reversed ordering is not.
pub fn lambda_hat_residual(z: Quaternion, w: Quaternion) -> f64 {
    let zc = z.conj();
    mul(mul(zc + I, w), zc - I).w
}

/// A phase point on the Birkhoff-Waldvogel constraint set Λ̂:
/// `z ∉ ℝ ∪ {±i}` and `Re((z̄+i)w(z̄-i)) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaHatPoint {
    pub z: Quaternion,
    pub w: Quaternion,
}

impl LambdaHatPoint {
    /// Validated constructor; `tol` bounds the relative constraint residual
    /// (use `1e-10` for the contract default).
    pub fn new(z: Quaternion, w: Quaternion, tol: f64) -> Result<Self> {
        if z.im().norm() < DEFAULT_EXCLUSION {
            return Err(RegulusError::Domain("z must not be real".into()));
        }
        if (z - I).norm() < DEFAULT_EXCLUSION || (z + I).norm() < DEFAULT_EXCLUSION {
            return Err(RegulusError::Domain("z must avoid the collision points ±i".into()));
        }
        let res = lambda_hat_residual(z, w);
        let scale = 1.0 + z.norm_sq() * w.norm();
        if res.abs() > tol * scale {
            return Err(RegulusError::Constraint(format!(
                "Λ̂ momentum constraint violated (residual {res:.3e})"
            )));
        }
        Ok(Self { z, w })
    }

    /// Project `w` onto the constraint and construct the point.
    pub fn project(z: Quaternion, w: Quaternion) -> Result<Self> {
        // residual is linear in w; gradient in w of Re((z̄+i)w(z̄-i)) is the
        // quaternion conj((z̄+i))·conj((z̄-i)) read as a vector: Re(a w b) =
        // ⟨w, ā·b̄ reversed⟩ — compute by probing the four basis directions.
        let mut grad = [0.0; 4];
        for (k, e) in [
            Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ]
        .iter()
        .enumerate()
        {
            grad[k] = lambda_hat_residual(z, *e);
        }
        let g = Quaternion::from_array(grad);
        let g2 = g.norm_sq();
        if g2 == 0.0 {
            return Err(RegulusError::Domain("degenerate constraint gradient".into()));
        }
        let w_proj = w - g * (lambda_hat_residual(z, w) / g2);
        Self::new(z, w_proj, 1e-10)
    }
}

/// Cotangent lift `Φ₁ : (z, w) ↦ (α = i - 2(z-i)⁻¹, β = (z̄+i)·w·(z̄+i)/2)`.
pub fn phi1_cotangent(z: Quaternion, w: Quaternion) -> Result<(Quaternion, Quaternion)> {
    let d = z - I;
    if d.norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("Φ₁ singular at z = i".into()));
    }
    let alpha = I - 2.0 * d.inverse()?;
    let c = z.conj() + I;
    let beta = mul(mul(c, w), c) * 0.5;
    Ok((alpha, beta))
}

/// Cotangent lift `Φ₂ : (q, p) ↦ (x = i - 2(q-i)⁻¹, y = (q-i)·p·(q-i)/2)` for
/// purely imaginary `q`.
pub fn phi2_cotangent(q: PureQuaternion, p: Quaternion) -> Result<(Quaternion, Quaternion)> {
    let d = q.to_quaternion() - I;
    if d.norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("Φ₂ singular at q = i".into()));
    }
    let x = I - 2.0 * d.inverse()?;
    let y = mul(mul(d, p), d) * 0.5;
    Ok((x, y))
}

/// Unrestricted Birkhoff-Waldvogel phase map `Φ₂ ∘ K.S. ∘ Φ₁` evaluated on a
/// Λ̂ point; both outputs are purely imaginary on the constraint.
///
/// Implemented strictly as the composition of the three factor maps.
pub fn bw_phase(pt: &LambdaHatPoint) -> Result<(PureQuaternion, PureQuaternion)> {
    let (alpha, beta) = phi1_cotangent(pt.z, pt.w)?;
    if alpha.norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("K.S. singular at α = 0 (z = -i)".into()));
    }
    let (q, p) = ks_map_raw(alpha, beta)?;
    if (q - PureQuaternion::new(1.0, 0.0, 0.0)).norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("Φ₂ singular at q = i (z near ℝ)".into()));
    }
    let (x, y) = phi2_cotangent(q, p)?;
    let scale = 1.0 + pt.z.norm_sq() * pt.w.norm();
    if x.re().abs() > 1e-9 * scale || y.re().abs() > 1e-9 * scale {
        return Err(RegulusError::Constraint(format!(
            "image not purely imaginary (Re x = {:.3e}, Re y = {:.3e})",
            x.re(),
            y.re()
        )));
    }
    Ok((x.im(), y.im()))
}

/// The raw chain `Φ₂ ∘ K.S. ∘ Φ₁` with no constraint or purity enforcement;
/// used by finite-difference probes that evaluate slightly off Λ̂.
pub fn bw_phase_raw(z: Quaternion, w: Quaternion) -> Result<(Quaternion, Quaternion)> {
    let (alpha, beta) = phi1_cotangent(z, w)?;
    if alpha.norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("K.S. singular at α = 0".into()));
    }
    let (q, p) = ks_map_raw(alpha, beta)?;
    phi2_cotangent(q, p)
}

/// Fiber lift of the Birkhoff-Waldvogel map: produces the Λ̂ point at fiber
/// angle `theta` over `(x, y)`. Inverts `Φ₂`, lifts through the K.S. section,
/// then inverts `Φ₁` via `z = i - 2(α-i)⁻¹`, `w = (ᾱ+i)·β·(ᾱ+i)/2`.
pub fn bw_lift(x: PureQuaternion, y: PureQuaternion, theta: f64) -> Result<LambdaHatPoint> {
    let xi = PureQuaternion::new(1.0, 0.0, 0.0);
    if (x - xi).norm() < DEFAULT_EXCLUSION || (x + xi).norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Domain("collision point".into()));
    }
    // Φ₂⁻¹ (the involution again): q = i - 2(x-i)⁻¹, p = (x-i)·y·(x-i)/2.
    let d = x.to_quaternion() - I;
    let q = I - 2.0 * d.inverse()?;
    let p = mul(mul(d, y.to_quaternion()), d) * 0.5;
    let (alpha, beta) = {
        let lifted = ks_lift_any(&PhasePointIH::new(q.im(), p.im()), theta)?;
        (lifted.z, lifted.w)
    };
    // Φ₁⁻¹.
    let da = alpha - I;
    if da.norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Singular("lift lands on α = i".into()));
    }
    let z = I - 2.0 * da.inverse()?;
    let c = alpha.conj() + I;
    let w = mul(mul(c, beta), c) * 0.5;
    LambdaHatPoint::new(z, w, 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BirkhoffSurfaceKind {
    BirkhoffSphere,
    BirkhoffPlane,
}

/// A member of the pre-image family of the plane `k₂x₂ + k₃x₃ = 0` under the
/// base Birkhoff-Waldvogel map: a 2-sphere
/// `(sin θ z₀ - cos θ)² + |Im z|² sin²θ = 1`,
/// `k₂(z₂cos θ + z₃sin θ) + k₃(z₃cos θ - z₂sin θ) = 0`
/// for `θ ≢ 0, π`, degenerating to the plane `{z₀ = 0, k₂z₂ + k₃z₃ = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSurface {
    pub kind: BirkhoffSurfaceKind,
    pub theta: f64,
    pub k2: f64,
    pub k3: f64,
}

const ANGLE_TOL: f64 = 1e-12;

/// Construct the Birkhoff sphere/plane at fiber angle `theta` for the target
/// plane coefficients `(k2, k3) ≠ (0, 0)`.
pub fn birkhoff_surface(theta: f64, k2: f64, k3: f64) -> Result<BirkhoffSurface> {
    if k2 == 0.0 && k3 == 0.0 {
        return Err(RegulusError::Domain("(k2, k3) must be nonzero".into()));
    }
    let t = normalize_angle(theta);
    let kind = if t.min((t - std::f64::consts::PI).abs()).min(std::f64::consts::TAU - t) <= ANGLE_TOL
    {
        BirkhoffSurfaceKind::BirkhoffPlane
    } else {
        BirkhoffSurfaceKind::BirkhoffSphere
    };
    Ok(BirkhoffSurface { kind, theta: t, k2, k3 })
}

impl BirkhoffSurface {
    /// Residuals of the two defining equations at `z`.
    pub fn residual(&self, z: Quaternion) -> (f64, f64) {
        match self.kind {
            BirkhoffSurfaceKind::BirkhoffPlane => {
                (z.w, self.k2 * z.y + self.k3 * z.z)
            }
            BirkhoffSurfaceKind::BirkhoffSphere => {
                let (s, c) = self.theta.sin_cos();
                let r1 = (s * z.w - c).powi(2) + z.im().norm_sq() * s * s - 1.0;
                let r2 = self.k2 * (z.y * c + z.z * s) + self.k3 * (z.z * c - z.y * s);
                (r1, r2)
            }
        }
    }

    /// Membership predicate at tolerance `tol`.
    pub fn contains(&self, z: Quaternion, tol: f64) -> bool {
        let (r1, r2) = self.residual(z);
        r1.abs() <= tol && r2.abs() <= tol
    }

    /// A surface point from two parameters in [0, 1); used by the sampling
    /// oracles.
    pub fn sample(&self, u: f64, v: f64) -> Quaternion {
        let tau = std::f64::consts::TAU;
        match self.kind {
            BirkhoffSurfaceKind::BirkhoffPlane => {
                // span of i and the in-plane direction of (z2, z3)
                let d = plane_dir(self.k2, self.k3, 0.0);
                let (a, b) = ((2.0 * u - 1.0) * 3.0, (2.0 * v - 1.0) * 3.0);
                Quaternion::new(0.0, a, b * d.0, b * d.1)
            }
            BirkhoffSurfaceKind::BirkhoffSphere => {
                let (s, c) = self.theta.sin_cos();
                let (cot, csc) = (c / s, 1.0 / s);
                let d = plane_dir(self.k2, self.k3, self.theta);
                // 2-sphere of radius |csc| centered at cot·e₀ inside the
                // hyperplane spanned by {e₀, i, d}
                let phi = tau * u;
                let mu = 2.0 * v - 1.0;
                let rho = (1.0 - mu * mu).max(0.0).sqrt();
                let (a0, a1, a2) = (mu, rho * phi.cos(), rho * phi.sin());
                Quaternion::new(
                    cot + csc.abs() * a0,
                    csc.abs() * a1,
                    csc.abs() * a2 * d.0,
                    csc.abs() * a2 * d.1,
                )
            }
        }
    }
}

/// Unit direction in the (z2, z3)-plane solving the second surface equation.
fn plane_dir(k2: f64, k3: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    // coefficients of z2 and z3 in k2(z2 c + z3 s) + k3(z3 c - z2 s)
    let (a, b) = (k2 * c - k3 * s, k2 * s + k3 * c);
    let n = a.hypot(b);
    (-b / n, a / n)
}

/// Embed a planar point `ζ` into the Birkhoff plane `π_κ`; the planar Kepler
/// centers ±1 map to ±i.
pub fn birkhoff_plane_embed(zeta: num_complex::Complex64, kappa: f64) -> PureQuaternion {
    PureQuaternion::new(zeta.re, zeta.im * kappa.cos(), zeta.im * kappa.sin())
}

/// Coordinates of a point of 𝕀ℍ relative to the Birkhoff plane `π_κ`,
/// together with its off-plane distance.
pub fn birkhoff_plane_coords(x: PureQuaternion, kappa: f64) -> (num_complex::Complex64, f64) {
    let e = PureQuaternion::new(0.0, kappa.cos(), kappa.sin());
    let re = x.x;
    let im = x.dot(e);
    let off = (x - PureQuaternion::new(re, 0.0, 0.0) - e * im).norm();
    (num_complex::Complex64::new(re, im), off)
}

/// Convenience: Σ̂ residual `BL(α, β)` of the Φ₁ image of a phase point.
pub fn sigma_hat_residual(z: Quaternion, w: Quaternion) -> Result<f64> {
    let (alpha, beta) = phi1_cotangent(z, w)?;
    Ok(bl(alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{J, K, ONE};
    use crate::rng::Stream;
    use num_complex::Complex64;

    fn pq(x: f64, y: f64, z: f64) -> PureQuaternion {
        PureQuaternion::new(x, y, z)
    }

    #[test]
    fn phi_examples() {
        // φ1(0) = i - 2/(-i) = -i
        let out = phi1(MoebiusPoint::Finite(Quaternion::zero()));
        assert_eq!(out, MoebiusPoint::Finite(-I));
        // φ1(1) = -1
        let out = phi1(MoebiusPoint::Finite(ONE));
        assert_eq!(out, MoebiusPoint::Finite(-ONE));
        // φ2(0) = -i
        let out = phi2(BwPoint::Finite(pq(0.0, 0.0, 0.0)));
        assert_eq!(out, BwPoint::Finite(pq(-1.0, 0.0, 0.0)));
        // extensions
        assert_eq!(phi1(MoebiusPoint::Finite(I)), MoebiusPoint::Infinity);
        assert_eq!(phi1(MoebiusPoint::Infinity), MoebiusPoint::Finite(I));
    }

    #[test]
    fn phi1_is_involution() {
        let mut rng = Stream::new(3, "phi1-inv");
        for _ in 0..300 {
            let z = rng.quaternion(2.0);
            if (z - I).norm() < 1e-3 {
                continue;
            }
            let once = phi1(MoebiusPoint::Finite(z));
            let twice = phi1_inv(once);
            match twice {
                MoebiusPoint::Finite(back) => {
                    assert!((back - z).norm() <= 1e-13 * (1.0 + z.norm_sq()))
                }
                MoebiusPoint::Infinity => panic!("round trip lost the point"),
            }
        }
    }

    #[test]
    fn phi1_sends_reals_to_unit_circle() {
        let mut rng = Stream::new(5, "phi1-real");
        for _ in 0..1000 {
            let t = rng.symmetric(50.0);
            if let MoebiusPoint::Finite(a) = phi1(MoebiusPoint::Finite(Quaternion::scalar(t))) {
                assert!((a.norm() - 1.0).abs() <= 1e-12);
                assert!(a.y.abs() < 1e-15 && a.z.abs() < 1e-15);
            } else {
                panic!("reals never map to infinity");
            }
        }
    }

    #[test]
    fn bw_base_examples() {
        // bw_base(2i) = 1.25 i
        match bw_base(2.0 * I).unwrap() {
            BwPoint::Finite(x) => assert!((x - pq(1.25, 0.0, 0.0)).norm() < 1e-14),
            _ => panic!(),
        }
        // bw_base(-i) = -i (collision fixed point)
        match bw_base(-I).unwrap() {
            BwPoint::Finite(x) => assert!((x - pq(-1.0, 0.0, 0.0)).norm() < 1e-14),
            _ => panic!(),
        }
        // bw_base(3) = ∞
        assert_eq!(bw_base(Quaternion::scalar(3.0)).unwrap(), BwPoint::Infinity);
        // near-real rejection
        assert!(matches!(
            bw_base(Quaternion::new(1.0, 1e-12, 0.0, 0.0)),
            Err(RegulusError::Singular(_))
        ));
    }

    #[test]
    fn bw_base_matches_planar_birkhoff_on_planes() {
        let mut rng = Stream::new(7, "bw-planar");
        for _ in 0..300 {
            let kappa = rng.range(0.0, std::f64::consts::TAU);
            let zeta = Complex64::new(rng.symmetric(2.0), rng.symmetric(2.0));
            if zeta.norm() < 0.2 {
                continue;
            }
            let z = birkhoff_plane_embed(zeta, kappa);
            if z.norm() < DEFAULT_EXCLUSION * 2.0 {
                continue;
            }
            let expected = (zeta + zeta.inv()) / 2.0;
            match bw_base(z.to_quaternion()).unwrap() {
                BwPoint::Finite(x) => {
                    let (got, off) = birkhoff_plane_coords(x, kappa);
                    assert!(off <= 1e-12 * (1.0 + x.norm()));
                    assert!((got - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
                }
                BwPoint::Infinity => panic!("finite ζ must map finitely"),
            }
        }
    }

    #[test]
    fn bw_phase_position_component_is_base_map() {
        let mut rng = Stream::new(11, "bw-pos");
        let mut tested = 0;
        while tested < 200 {
            let z = rng.quaternion(2.0);
            if z.im().norm() < 0.1 || (z - I).norm() < 0.1 || (z + I).norm() < 0.1 {
                continue;
            }
            let pt = match LambdaHatPoint::project(z, rng.quaternion(2.0)) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let (x, _) = bw_phase(&pt).unwrap();
            match bw_base(z).unwrap() {
                BwPoint::Finite(xb) => {
                    assert!((x - xb).norm() <= 1e-12 * (1.0 + xb.norm()))
                }
                BwPoint::Infinity => panic!(),
            }
            tested += 1;
        }
    }

    #[test]
    fn bw_phase_images_are_pure_and_example_point() {
        // (z = 2i, w = j) satisfies the Λ̂ constraint
        let pt = LambdaHatPoint::new(2.0 * I, J, 1e-10).unwrap();
        let (x, y) = bw_phase(&pt).unwrap();
        assert!((x - pq(1.25, 0.0, 0.0)).norm() < 1e-13);
        // y is finite, purely imaginary by construction
        assert!(y.norm() > 0.0);
    }

    #[test]
    fn bw_pullback_identities() {
        let mut rng = Stream::new(13, "bw-pullback");
        let mut tested = 0;
        while tested < 300 {
            let z = rng.quaternion(2.0);
            if z.im().norm() < 0.15 || (z - I).norm() < 0.15 || (z + I).norm() < 0.15 {
                continue;
            }
            let pt = match LambdaHatPoint::project(z, rng.quaternion(2.0)) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let (x, y) = match bw_phase(&pt) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let rho = (z.conj() - z).norm();
            let xi = pq(1.0, 0.0, 0.0);
            let lhs1 = (x - xi).norm();
            let rhs1 = (z - I).norm_sq() / rho;
            assert!((lhs1 - rhs1).abs() <= 1e-10 * (1.0 + rhs1));
            let lhs2 = (x + xi).norm();
            let rhs2 = (z + I).norm_sq() / rho;
            assert!((lhs2 - rhs2).abs() <= 1e-10 * (1.0 + rhs2));
            let lhs3 = y.norm_sq();
            let rhs3 = rho.powi(4) * pt.w.norm_sq()
                / (4.0 * (z - I).norm_sq() * (z + I).norm_sq());
            assert!((lhs3 - rhs3).abs() <= 1e-10 * (1.0 + rhs3));
            tested += 1;
        }
    }

    #[test]
    fn bw_lift_round_trip() {
        let mut rng = Stream::new(17, "bw-lift");
        let mut tested = 0;
        while tested < 300 {
            let x = rng.pure(2.0);
            let xi = pq(1.0, 0.0, 0.0);
            if (x - xi).norm() < 0.15 || (x + xi).norm() < 0.15 || x.norm() < 0.1 {
                continue;
            }
            let y = rng.pure(2.0);
            let theta = rng.range(0.0, std::f64::consts::TAU);
            let pt = match bw_lift(x, y, theta) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let (xb, yb) = bw_phase(&pt).unwrap();
            let scale = 1.0 + x.norm() + y.norm();
            assert!((xb - x).norm() <= 1e-10 * scale);
            assert!((yb - y).norm() <= 1e-10 * scale);
            tested += 1;
        }
    }

    #[test]
    fn bw_lift_zero_momentum_and_fiber() {
        let x = pq(1.25, 0.0, 0.0);
        let pt = bw_lift(x, PureQuaternion::zero(), 0.0).unwrap();
        assert!(pt.w.norm() < 1e-12);
        match bw_base(pt.z).unwrap() {
            BwPoint::Finite(back) => assert!((back - x).norm() < 1e-12),
            _ => panic!(),
        }
        // two fiber angles map to the same (x, y)
        let y = pq(0.3, -0.2, 0.1);
        let a = bw_lift(x, y, 0.4).unwrap();
        let b = bw_lift(x, y, 2.9).unwrap();
        let (xa, ya) = bw_phase(&a).unwrap();
        let (xb, yb) = bw_phase(&b).unwrap();
        assert!((xa - xb).norm() < 1e-11 && (ya - yb).norm() < 1e-11);
        assert!((a.z - b.z).norm() > 1e-3);
        assert!(matches!(
            bw_lift(pq(1.0, 0.0, 0.0), y, 0.0),
            Err(RegulusError::Domain(_))
        ));
    }

    #[test]
    fn lambda_hat_equivalence_with_sigma_hat() {
        // Λ̂ constraint (this ordering) ⟺ BL(α, β) = 0
        let mut rng = Stream::new(19, "lambda-sigma");
        let mut tested = 0;
        while tested < 300 {
            let z = rng.quaternion(2.0);
            if z.im().norm() < 0.1 || (z - I).norm() < 0.1 {
                continue;
            }
            let w = rng.quaternion(2.0);
            let lam = lambda_hat_residual(z, w);
            let sig = sigma_hat_residual(z, w).unwrap();
            // the two residuals are proportional by 1/2
            assert!((sig - 0.5 * lam).abs() <= 1e-10 * (1.0 + lam.abs()));
            tested += 1;
        }
    }

    #[test]
    fn birkhoff_surface_examples() {
        // θ = 0, (k2, k3) = (1, 0): the plane {z0 = 0, z2 = 0}
        let s = birkhoff_surface(0.0, 1.0, 0.0).unwrap();
        assert_eq!(s.kind, BirkhoffSurfaceKind::BirkhoffPlane);
        assert!(s.contains(3.0 * I + 2.0 * K, 1e-12));
        assert!(!s.contains(J, 1e-12));

        // θ = π/2, (1, 0): z = 1 is a member
        let s = birkhoff_surface(std::f64::consts::FRAC_PI_2, 1.0, 0.0).unwrap();
        assert_eq!(s.kind, BirkhoffSurfaceKind::BirkhoffSphere);
        assert!(s.contains(ONE, 1e-12));

        assert!(birkhoff_surface(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn birkhoff_surface_maps_into_plane() {
        let mut rng = Stream::new(23, "birkhoff-map");
        for _ in 0..40 {
            let theta = rng.range(0.2, std::f64::consts::PI - 0.2);
            let (k2, k3) = (rng.symmetric(1.0) + 1.5, rng.symmetric(1.0));
            let s = birkhoff_surface(theta, k2, k3).unwrap();
            for _ in 0..25 {
                let z = s.sample(rng.uniform(), rng.uniform());
                let (r1, r2) = s.residual(z);
                assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
                match bw_base(z) {
                    Ok(BwPoint::Finite(x)) => {
                        assert!((k2 * x.y + k3 * x.z).abs() <= 1e-10 * (1.0 + x.norm()));
                    }
                    _ => continue, // points over physical infinity
                }
            }
        }
    }
}
