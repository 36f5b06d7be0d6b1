//! Phase-space and position-space transformations: Levi-Civita,
//! Kustaanheimo-Stiefel with the Σ¹ constraint, the Birkhoff-Waldvogel chain,
//! Levi-Civita planes, Birkhoff spheres and the `(r, ψ, κ, θ)` fiber chart.

mod bw;
mod ks;
mod spherical;

pub use bw::{
    birkhoff_plane_coords, birkhoff_plane_embed, birkhoff_surface, bw_base, bw_lift, bw_phase,
    bw_phase_raw, lambda_hat_residual, phi1, phi1_cotangent, phi1_inv, phi2, phi2_cotangent,
    phi2_inv, sigma_hat_residual, BirkhoffSurface, BirkhoffSurfaceKind, BwPoint, LambdaHatPoint,
    MoebiusPoint,
};
pub use ks::{
    ks_forward, ks_lift, ks_lift_chart, ks_map_raw, lc_plane_check, lc_plane_lift, levi_civita,
    Chart, PhasePointH, PhasePointIH,
};
pub use spherical::{
    deck_transform, spherical_from_phase, spherical_to_phase, z_theta, z_theta_jacobian,
    SphericalState,
};

/// Reduce an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut t = theta % tau;
    if t < 0.0 {
        t += tau;
    }
    t
}

/// Angle equality mod 2π with tolerance.
pub fn angle_eq(a: f64, b: f64, tol: f64) -> bool {
    let d = (normalize_angle(a) - normalize_angle(b)).abs();
    d <= tol || (std::f64::consts::TAU - d).abs() <= tol
}
