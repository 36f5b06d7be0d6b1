//! The `(r, ψ, κ, θ)` fiber chart on ℍ adapted to the Birkhoff-Waldvogel
//! circle symmetry, its cotangent lift, and the `z_θ` family interpolating
//! Birkhoff planes and spheres.
//!
//! `θ = 0` is the purely imaginary section `z = r cos ψ·i + r sin ψ cos κ·j +
//! r sin ψ sin κ·k`; increasing `θ` moves along the fiber
//! `z_θ = φ₁⁻¹(e^{iθ} φ₁(z))`.

use crate::error::{RegulusError, Result};
use crate::quat::Quaternion;
use crate::transforms::ks::PhasePointH;
use crate::transforms::normalize_angle;
use crate::DEFAULT_EXCLUSION;
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Spherical-type chart state with conjugate momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalState {
    pub r: f64,
    pub psi: f64,
    pub kappa: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_psi: f64,
    pub p_kappa: f64,
    pub p_theta: f64,
}

impl SphericalState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        psi: f64,
        kappa: f64,
        theta: f64,
        p_r: f64,
        p_psi: f64,
        p_kappa: f64,
        p_theta: f64,
    ) -> Result<Self> {
        if r.is_nan() || r <= 0.0 {
            return Err(RegulusError::Domain("r must be positive".into()));
        }
        if !(psi > 0.0 && psi < std::f64::consts::PI) {
            return Err(RegulusError::Domain("psi must lie in (0, π)".into()));
        }
        Ok(Self {
            r,
            psi,
            kappa: normalize_angle(kappa),
            theta: normalize_angle(theta),
            p_r,
            p_psi,
            p_kappa,
            p_theta,
        })
    }

    /// The chart (and the reduced Hamiltonian with `P_κ ≠ 0`) degenerates on
    /// `{r = 1}` and at the axis `ψ ∈ {0, π}`.
    pub fn is_singular(&self, exclusion: f64) -> bool {
        ((self.r - 1.0).abs() < exclusion && self.p_kappa != 0.0)
            || self.psi.sin().abs() < exclusion
    }
}

/// Position of the chart: `z_θ(r, ψ, κ)`.
///
/// The real part carries `(r² - 1) sin θ`; evaluating the fiber motion
/// `φ₁⁻¹(e^{iθ} φ₁(z))` directly fixes this sign, and only this sign keeps
/// `bw_base(z_θ)` independent of `θ`.
pub fn z_theta(r: f64, psi: f64, kappa: f64, theta: f64) -> Quaternion {
    let (st, ct) = theta.sin_cos();
    let d = (r * r + 1.0) - (r * r - 1.0) * ct;
    Quaternion::new(
        (r * r - 1.0) * st / d,
        2.0 * r * psi.cos() / d,
        2.0 * r * psi.sin() * (theta + kappa).cos() / d,
        2.0 * r * psi.sin() * (theta + kappa).sin() / d,
    )
}

/// Jacobian `∂z_θ/∂(r, ψ, κ, θ)`, rows indexed by the quaternion components.
pub fn z_theta_jacobian(r: f64, psi: f64, kappa: f64, theta: f64) -> Matrix4<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let (sk, ck) = (theta + kappa).sin_cos();
    let d = (r * r + 1.0) - (r * r - 1.0) * ct;

    let n = [
        (r * r - 1.0) * st,
        2.0 * r * cp,
        2.0 * r * sp * ck,
        2.0 * r * sp * sk,
    ];
    // ∂N/∂(r, ψ, κ, θ)
    let dn = [
        [2.0 * r * st, 0.0, 0.0, (r * r - 1.0) * ct],
        [2.0 * cp, -2.0 * r * sp, 0.0, 0.0],
        [2.0 * sp * ck, 2.0 * r * cp * ck, -2.0 * r * sp * sk, -2.0 * r * sp * sk],
        [2.0 * sp * sk, 2.0 * r * cp * sk, 2.0 * r * sp * ck, 2.0 * r * sp * ck],
    ];
    let dd = [2.0 * r * (1.0 - ct), 0.0, 0.0, (r * r - 1.0) * st];

    Matrix4::from_fn(|a, xi| (dn[a][xi] * d - n[a] * dd[xi]) / (d * d))
}

/// The deck transformation of the chart:
/// `(r, ψ, κ, θ) ↦ (1/r, ψ, κ + π, θ + π)` fixes `z_θ` pointwise.
pub fn deck_transform(r: f64, psi: f64, kappa: f64, theta: f64) -> (f64, f64, f64, f64) {
    (
        1.0 / r,
        psi,
        normalize_angle(kappa + std::f64::consts::PI),
        normalize_angle(theta + std::f64::consts::PI),
    )
}

fn chart_guards(r: f64, psi: f64, exclusion: f64) -> Result<()> {
    if (r - 1.0).abs() < exclusion {
        return Err(RegulusError::Chart("chart singular at r = 1".into()));
    }
    if psi.sin().abs() < exclusion {
        return Err(RegulusError::Chart("chart singular at ψ ∈ {0, π}".into()));
    }
    Ok(())
}

/// Cotangent lift of the chart: `(r, ψ, κ, θ, P) ↦ (z, w)` with
/// `Re(w̄ dz) = P_r dr + P_ψ dψ + P_κ dκ + P_θ dθ`.
pub fn spherical_to_phase(st: &SphericalState) -> Result<PhasePointH> {
    chart_guards(st.r, st.psi, DEFAULT_EXCLUSION)?;
    let z = z_theta(st.r, st.psi, st.kappa, st.theta);
    let jac = z_theta_jacobian(st.r, st.psi, st.kappa, st.theta);
    let p = Vector4::new(st.p_r, st.p_psi, st.p_kappa, st.p_theta);
    // P = Jᵀ w  ⇒  w = J⁻ᵀ P
    let w = jac
        .transpose()
        .lu()
        .solve(&p)
        .ok_or_else(|| RegulusError::Chart("chart Jacobian is singular".into()))?;
    Ok(PhasePointH::new(z, Quaternion::new(w[0], w[1], w[2], w[3])))
}

/// Invert the chart on a phase point. The chart is two-to-one (deck map
/// `(r, ψ, κ, θ) ↦ (1/r, ψ, κ+π, θ+π)`); `seed` selects the branch nearest to
/// it, otherwise the `r ≥ 1` branch is returned.
pub fn spherical_from_phase(
    pt: &PhasePointH,
    seed: Option<&SphericalState>,
) -> Result<SphericalState> {
    let z = pt.z;
    if z.im().norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Chart(
            "chart undefined on the real line of ℍ".into(),
        ));
    }
    if (z - crate::quat::I).norm() < DEFAULT_EXCLUSION {
        return Err(RegulusError::Chart("chart undefined at z = i".into()));
    }
    let alpha = match super::phi1(super::MoebiusPoint::Finite(z)) {
        super::MoebiusPoint::Finite(a) => a,
        super::MoebiusPoint::Infinity => {
            return Err(RegulusError::Chart("chart undefined at z = i".into()))
        }
    };
    // fiber angle: Re(e^{-iθ} α) = cos θ·α₀ + sin θ·α₁ = 0
    let theta0 = normalize_angle(f64::atan2(-alpha.w, alpha.x));
    let branch = |theta: f64| -> Result<(f64, f64, f64, f64)> {
        let (s, c) = theta.sin_cos();
        // e^{-iθ} α with the exactly-zero scalar slot dropped
        let a = Quaternion::new(
            0.0,
            c * alpha.x - s * alpha.w,
            c * alpha.y + s * alpha.z,
            c * alpha.z - s * alpha.y,
        );
        let zeta = match super::phi1(super::MoebiusPoint::Finite(a)) {
            super::MoebiusPoint::Finite(v) => v,
            super::MoebiusPoint::Infinity => {
                return Err(RegulusError::Chart("fiber passes through z = i".into()))
            }
        };
        let r = zeta.norm();
        if r < DEFAULT_EXCLUSION {
            return Err(RegulusError::Chart("fiber passes through z = 0".into()));
        }
        let psi = f64::atan2(zeta.y.hypot(zeta.z), zeta.x);
        let kappa = normalize_angle(f64::atan2(zeta.z, zeta.y));
        Ok((r, psi, kappa, theta))
    };
    let b1 = branch(theta0)?;
    let b2 = branch(normalize_angle(theta0 + std::f64::consts::PI))?;
    let pick = match seed {
        Some(sd) => {
            let dist = |b: &(f64, f64, f64, f64)| {
                let dk = (normalize_angle(b.2 - sd.kappa)).min(normalize_angle(sd.kappa - b.2));
                let dt = (normalize_angle(b.3 - sd.theta)).min(normalize_angle(sd.theta - b.3));
                (b.0 - sd.r).abs() + (b.1 - sd.psi).abs() + dk + dt
            };
            if dist(&b1) <= dist(&b2) {
                b1
            } else {
                b2
            }
        }
        None => {
            if b1.0 >= 1.0 {
                b1
            } else {
                b2
            }
        }
    };
    let (r, psi, kappa, theta) = pick;
    chart_guards(r, psi, DEFAULT_EXCLUSION)?;
    let jac = z_theta_jacobian(r, psi, kappa, theta);
    let wv = Vector4::new(pt.w.w, pt.w.x, pt.w.y, pt.w.z);
    let p = jac.transpose() * wv;
    SphericalState::new(r, psi, kappa, theta, p[0], p[1], p[2], p[3])
}
