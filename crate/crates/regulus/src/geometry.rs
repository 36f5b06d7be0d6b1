//! Quadric geometry on both sides of the Hopf map: centered quadrics in ℝ⁴
//! with the circle symmetry, their duals, the classification of their images
//! in ℝ³ (plane / centered sphere / spheroid / hyperboloid sheet / paraboloid,
//! focused at the origin), and the r-confocal walls of the two-center
//! billiards.

use crate::error::{RegulusError, Result};
use crate::quat::{hopf, PureQuaternion, Quaternion};
use crate::rng::Stream;
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Cyclic Jacobi eigendecomposition of a symmetric 4×4 matrix; converges to
/// machine precision, deterministically.
fn jacobi_eigen_4(m: Matrix4<f64>) -> (Vector4<f64>, Matrix4<f64>) {
    let mut a = m;
    let mut v = Matrix4::identity();
    let scale = m.abs().max().max(1e-300);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..4 {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (Vector4::new(a[(0, 0)], a[(1, 1)], a[(2, 2)], a[(3, 3)]), v)
}

/// Matrix of left multiplication by `i` on ℝ⁴ ≅ ℍ.
fn l_i() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

fn quat_to_vec(q: Quaternion) -> Vector4<f64> {
    Vector4::new(q.w, q.x, q.y, q.z)
}

fn vec_to_quat(v: Vector4<f64>) -> Quaternion {
    Quaternion::new(v[0], v[1], v[2], v[3])
}

/// One axis of a normal form `σ·û²/a² `; `sigma = 0` marks a degenerate
/// (rank-deficient) direction, with `a = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalAxis {
    pub sigma: i8,
    pub a: f64,
}

/// Eigendecomposition of a centered quadric, ordered by descending
/// |eigenvalue| with a deterministic eigenvector sign convention.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub axes: [NormalAxis; 4],
    pub eigenvalues: [f64; 4],
    /// Columns are the orthonormal û-basis.
    pub basis: Matrix4<f64>,
}

impl NormalForm {
    /// Rebuild the quadric matrix `basis · diag(σ/a²) · basisᵀ`.
    pub fn reconstruct(&self) -> Matrix4<f64> {
        let d = Matrix4::from_diagonal(&Vector4::from_iterator(self.eigenvalues.iter().copied()));
        self.basis * d * self.basis.transpose()
    }
}

/// A centered quadric `zᵀ A z = 1` in ℝ⁴ ≅ ℍ with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredQuadric4 {
    a: Matrix4<f64>,
}

impl CenteredQuadric4 {
    /// Construct from a symmetric matrix; rejects asymmetry beyond 1e-12 and
    /// stores the exactly symmetrized matrix.
    pub fn new(a: Matrix4<f64>) -> Result<Self> {
        let asym = (a - a.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + a.abs().max()) {
            return Err(RegulusError::Domain("quadric matrix must be symmetric".into()));
        }
        Ok(Self { a: (a + a.transpose()) * 0.5 })
    }

    /// S¹-invariant quadric with eigenvalue `lambda_a` on the complex line
    /// through `fiber` (unit) and `lambda_b` on its orthogonal complement.
    pub fn from_invariant_eigensystem(
        fiber: Quaternion,
        lambda_a: f64,
        lambda_b: f64,
    ) -> Result<Self> {
        let n = fiber.norm();
        if n < 1e-12 {
            return Err(RegulusError::Domain("fiber direction must be nonzero".into()));
        }
        let e = quat_to_vec(fiber / n);
        let ie = l_i() * e;
        let pa = e * e.transpose() + ie * ie.transpose();
        let id = Matrix4::identity();
        Ok(Self { a: pa * lambda_a + (id - pa) * lambda_b })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.a
    }

    /// `F(z) = zᵀ A z`.
    pub fn evaluate(&self, z: Quaternion) -> f64 {
        let v = quat_to_vec(z);
        (v.transpose() * self.a * v)[0]
    }

    /// `∇F(z) = 2 A z`.
    pub fn gradient(&self, z: Quaternion) -> Quaternion {
        vec_to_quat(self.a * quat_to_vec(z) * 2.0)
    }

    /// Signed implicit value `g(z) = F(z) - 1` used as the billiard wall
    /// function.
    pub fn wall_value(&self, z: Quaternion) -> f64 {
        self.evaluate(z) - 1.0
    }

    /// Eigendecomposition ordered by descending |λ| (ties by descending λ),
    /// eigenvector signs fixed so the first component above 1e-9 is positive.
    pub fn normal_form(&self) -> NormalForm {
        let eig = jacobi_eigen_4(self.a);
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&p, &q| {
            let (a, b) = (eig.0[p], eig.0[q]);
            b.abs()
                .partial_cmp(&a.abs())
                .unwrap()
                .then(b.partial_cmp(&a).unwrap())
        });
        let mut eigenvalues = [0.0; 4];
        let mut basis = Matrix4::zeros();
        let mut axes = [NormalAxis { sigma: 0, a: f64::INFINITY }; 4];
        let scale = eig.0.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1e-300);
        for (col, &p) in idx.iter().enumerate() {
            let lam = eig.0[p];
            eigenvalues[col] = lam;
            let mut v = eig.1.column(p).into_owned();
            for k in 0..4 {
                if v[k].abs() > 1e-9 {
                    if v[k] < 0.0 {
                        v = -v;
                    }
                    break;
                }
            }
            basis.set_column(col, &v);
            axes[col] = if lam.abs() <= 1e-13 * scale {
                NormalAxis { sigma: 0, a: f64::INFINITY }
            } else {
                NormalAxis { sigma: if lam > 0.0 { 1 } else { -1 }, a: 1.0 / lam.abs().sqrt() }
            };
        }
        NormalForm { axes, eigenvalues, basis }
    }

    /// Invariance under `z ↦ e^{iθ}z`: the infinitesimal condition
    /// `L_iᵀA + A·L_i = 0`, cross-validated on 100 random `(θ, z)` samples.
    pub fn is_s1_invariant(&self) -> bool {
        let li = l_i();
        let comm = li.transpose() * self.a + self.a * li;
        if comm.abs().max() > 1e-10 * (1.0 + self.a.abs().max()) {
            return false;
        }
        let mut rng = Stream::new(0x51AD, "s1-invariance");
        for _ in 0..100 {
            let z = rng.quaternion(2.0);
            let theta = rng.range(0.0, std::f64::consts::TAU);
            let zr = Quaternion::exp_i(theta) * z;
            let d = (self.evaluate(zr) - self.evaluate(z)).abs();
            if d > 1e-9 * (1.0 + self.evaluate(z).abs() + z.norm_sq() * self.a.abs().max()) {
                return false;
            }
        }
        true
    }

    /// Dual quadric `-F = 1`; empty (and rejected) unless some σ is -1.
    pub fn dual(&self) -> Result<Self> {
        let nf = self.normal_form();
        let scale = nf.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        if !nf.eigenvalues.iter().any(|&l| l < -1e-12 * scale) {
            return Err(RegulusError::Domain("dual is empty".into()));
        }
        if !nf.eigenvalues.iter().any(|&l| l > 1e-12 * scale) {
            return Err(RegulusError::Domain("empty quadric has no dual".into()));
        }
        Ok(Self { a: -self.a })
    }

    /// A point of the quadric along direction `d`, if the ray meets it.
    pub fn sample_along(&self, d: Quaternion) -> Option<Quaternion> {
        let f = self.evaluate(d);
        if f <= 0.0 {
            return None;
        }
        Some(d / f.sqrt())
    }

    /// Eigenvalues of the quadric as a complex-Hermitian form on ℂ² (valid
    /// only for S¹-invariant quadrics): returns `(λ_A ≥ λ_B, fiber_A,
    /// fiber_B)` where the fibers are unit vectors spanning the two invariant
    /// complex lines.
    pub fn invariant_eigenstructure(&self) -> Result<(f64, f64, Quaternion, Quaternion)> {
        if !self.is_s1_invariant() {
            return Err(RegulusError::Constraint("quadric is not S¹-invariant".into()));
        }
        // In complex coordinates u = z0 + i z1, v = z2 + i z3 the form is the
        // Hermitian matrix [[h11, h12], [h̄12, h22]].
        let a = &self.a;
        let h11 = 0.5 * (a[(0, 0)] + a[(1, 1)]);
        let h22 = 0.5 * (a[(2, 2)] + a[(3, 3)]);
        let h12 = num_complex::Complex64::new(
            0.5 * (a[(0, 2)] + a[(1, 3)]),
            0.5 * (a[(1, 2)] - a[(0, 3)]),
        );
        let m = 0.5 * (h11 + h22);
        let d = 0.5 * (h11 - h22);
        let s = (d * d + h12.norm_sqr()).sqrt();
        let (lam_a, lam_b) = (m + s, m - s);
        let to_r4 = |u: num_complex::Complex64, v: num_complex::Complex64| {
            Quaternion::new(u.re, u.im, v.re, v.im)
        };
        let (ea, eb) = if s <= 1e-13 * (1.0 + m.abs()) {
            // round case: any complex basis
            (Quaternion::new(1.0, 0.0, 0.0, 0.0), Quaternion::new(0.0, 0.0, 1.0, 0.0))
        } else if h12.norm() >= d.abs() * 1e-6 {
            let va = to_r4(h12, num_complex::Complex64::new(lam_a - h11, 0.0));
            let vb = to_r4(h12, num_complex::Complex64::new(lam_b - h11, 0.0));
            (va / va.norm(), vb / vb.norm())
        } else if d >= 0.0 {
            (Quaternion::new(1.0, 0.0, 0.0, 0.0), Quaternion::new(0.0, 0.0, 1.0, 0.0))
        } else {
            (Quaternion::new(0.0, 0.0, 1.0, 0.0), Quaternion::new(1.0, 0.0, 0.0, 0.0))
        };
        Ok((lam_a, lam_b, ea, eb))
    }
}

impl Serialize for CenteredQuadric4 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CenteredQuadric4", 1)?;
        let flat: Vec<f64> = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .map(|(r, c)| self.a[(r, c)])
            .collect();
        st.serialize_field("A", &flat)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CenteredQuadric4 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "A")]
            a: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.a.len() != 16 {
            return Err(serde::de::Error::custom("expected 16 row-major entries"));
        }
        let m = Matrix4::from_fn(|r, c| raw.a[4 * r + c]);
        CenteredQuadric4::new(m).map_err(serde::de::Error::custom)
    }
}

/// Image-surface kinds of S¹-invariant centered quadrics under the Hopf map,
/// plus the r-confocal walls used by billiards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadricKind {
    Plane,
    CenteredSphere,
    Spheroid,
    HyperboloidSheet,
    Paraboloid,
}

/// A surface of revolution in ℝ³ ≅ 𝕀ℍ in focal polar form
/// `|x - focus| + e·⟨x - focus, axis⟩ = l`
/// (`e = 0` sphere, `0 < e < 1` spheroid, `e = 1` paraboloid, `e > 1`
/// hyperboloid sheet; `l < 0` with `e > 1` selects the far branch). Planes
/// use `⟨x, axis⟩ = l` instead. The focal form traces exactly one branch, so
/// no auxiliary half-space predicate is needed for hyperboloid walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusedQuadric3 {
    pub kind: QuadricKind,
    pub focus: PureQuaternion,
    pub axis: PureQuaternion,
    pub e: f64,
    pub l: f64,
}

impl FocusedQuadric3 {
    pub fn sphere(center: PureQuaternion, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(RegulusError::Domain("radius must be positive".into()));
        }
        Ok(Self {
            kind: QuadricKind::CenteredSphere,
            focus: center,
            axis: PureQuaternion::new(1.0, 0.0, 0.0),
            e: 0.0,
            l: radius,
        })
    }

    pub fn plane(normal: PureQuaternion, offset: f64) -> Result<Self> {
        let n = normal.normalized()?;
        Ok(Self { kind: QuadricKind::Plane, focus: n * offset, axis: n, e: f64::INFINITY, l: offset })
    }

    /// General focal conic of revolution.
    pub fn from_conic(focus: PureQuaternion, axis: PureQuaternion, e: f64, l: f64) -> Result<Self> {
        let axis = axis.normalized()?;
        if e < 0.0 || !e.is_finite() {
            return Err(RegulusError::Domain("eccentricity must be finite and ≥ 0".into()));
        }
        if l <= 0.0 && e <= 1.0 {
            return Err(RegulusError::Domain("empty conic (l ≤ 0 with e ≤ 1)".into()));
        }
        if l == 0.0 {
            return Err(RegulusError::Domain("degenerate conic (l = 0)".into()));
        }
        let kind = if e == 0.0 {
            QuadricKind::CenteredSphere
        } else if e < 1.0 {
            QuadricKind::Spheroid
        } else if e == 1.0 {
            QuadricKind::Paraboloid
        } else {
            QuadricKind::HyperboloidSheet
        };
        Ok(Self { kind, focus, axis, e, l })
    }

    /// Implicit wall function; zero exactly on the surface (single branch for
    /// hyperboloids).
    pub fn g(&self, x: PureQuaternion) -> f64 {
        match self.kind {
            QuadricKind::Plane => x.dot(self.axis) - self.l,
            _ => {
                let xi = x - self.focus;
                xi.norm() + self.e * xi.dot(self.axis) - self.l
            }
        }
    }

    /// Gradient of `g`.
    pub fn grad_g(&self, x: PureQuaternion) -> PureQuaternion {
        match self.kind {
            QuadricKind::Plane => self.axis,
            _ => {
                let xi = x - self.focus;
                let n = xi.norm();
                xi / n + self.axis * self.e
            }
        }
    }

    /// Hessian of `g` (row-major 3×3).
    fn hess_g(&self, x: PureQuaternion) -> [[f64; 3]; 3] {
        match self.kind {
            QuadricKind::Plane => [[0.0; 3]; 3],
            _ => {
                let xi = x - self.focus;
                let n = xi.norm();
                let u = xi / n;
                let ua = u.to_array();
                let mut h = [[0.0; 3]; 3];
                for (r, row) in h.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = ((if r == c { 1.0 } else { 0.0 }) - ua[r] * ua[c]) / n;
                    }
                }
                h
            }
        }
    }

    /// Both foci of the conic (`None` for plane/paraboloid; a sphere returns
    /// its center twice).
    pub fn foci(&self) -> Option<[PureQuaternion; 2]> {
        match self.kind {
            QuadricKind::Plane | QuadricKind::Paraboloid => None,
            QuadricKind::CenteredSphere => Some([self.focus, self.focus]),
            _ => {
                let shift = 2.0 * self.e * self.l / (1.0 - self.e * self.e);
                Some([self.focus, self.focus - self.axis * shift])
            }
        }
    }

    /// Spheroid semi-axes `(C, D)` with `C ≥ D`, or hyperboloid `(a, b)`.
    pub fn semi_axes(&self) -> Option<(f64, f64)> {
        match self.kind {
            QuadricKind::Spheroid => {
                let c = self.l / (1.0 - self.e * self.e);
                let d = self.l / (1.0 - self.e * self.e).sqrt();
                Some((c, d))
            }
            QuadricKind::HyperboloidSheet => {
                let a = (self.l / (1.0 - self.e * self.e)).abs();
                let b = self.l.abs() / (self.e * self.e - 1.0).sqrt();
                Some((a, b))
            }
            QuadricKind::CenteredSphere => Some((self.l, self.l)),
            _ => None,
        }
    }

    /// A surface point from parameters `u, v ∈ [0, 1)`.
    pub fn sample(&self, u: f64, v: f64) -> PureQuaternion {
        let tau = std::f64::consts::TAU;
        match self.kind {
            QuadricKind::Plane => {
                let (t1, t2) = orthonormal_complement(self.axis);
                self.axis * self.l + t1 * ((u - 0.5) * 6.0) + t2 * ((v - 0.5) * 6.0)
            }
            _ => {
                // polar angle measured from the axis, restricted to radii > 0
                // and clamped away from the asymptotic directions
                let (lo, hi) = if self.e < 1.0 {
                    (-1.0, 1.0)
                } else if self.l > 0.0 {
                    ((-1.0 / self.e) * 0.95, 1.0)
                } else {
                    (-1.0, (-1.0 / self.e) * 1.05)
                };
                let cos_phi = lo + (hi - lo) * u;
                let t = self.l / (1.0 + self.e * cos_phi);
                let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
                let (t1, t2) = orthonormal_complement(self.axis);
                let az = tau * v;
                self.focus
                    + self.axis * (t * cos_phi)
                    + (t1 * az.cos() + t2 * az.sin()) * (t * sin_phi)
            }
        }
    }
}

/// Two unit vectors completing `n` (unit) to an orthonormal frame.
pub fn orthonormal_complement(n: PureQuaternion) -> (PureQuaternion, PureQuaternion) {
    let seed = if n.x.abs() < 0.9 {
        PureQuaternion::new(1.0, 0.0, 0.0)
    } else {
        PureQuaternion::new(0.0, 1.0, 0.0)
    };
    let t1 = n.cross(seed);
    let t1 = t1 / t1.norm();
    let t2 = n.cross(t1);
    (t1, t2)
}

/// r-confocal wall families: quadrics of revolution with foci at the two
/// Kepler centers ±i.
pub fn rconfocal_spheroid(b: f64) -> Result<FocusedQuadric3> {
    if b.is_nan() || b <= 0.0 || !b.is_finite() {
        return Err(RegulusError::Domain("spheroid parameter must satisfy 0 < b < ∞".into()));
    }
    let c2 = 1.0 + b * b;
    FocusedQuadric3::from_conic(
        PureQuaternion::new(1.0, 0.0, 0.0),
        PureQuaternion::new(1.0, 0.0, 0.0),
        1.0 / c2.sqrt(),
        b * b / c2.sqrt(),
    )
}

/// Sheet of the r-confocal two-sheeted hyperboloid `x₁²/a² - (x₂²+x₃²)/(1-a²)
/// = 1` with `0 < a < 1`; `positive_sheet` selects `x₁ > 0`.
pub fn rconfocal_hyperboloid(a: f64, positive_sheet: bool) -> Result<FocusedQuadric3> {
    if !(a > 0.0 && a < 1.0) {
        return Err(RegulusError::Domain("hyperboloid parameter must satisfy 0 < a < 1".into()));
    }
    let (focus, axis) = if positive_sheet {
        (PureQuaternion::new(1.0, 0.0, 0.0), PureQuaternion::new(-1.0, 0.0, 0.0))
    } else {
        (PureQuaternion::new(-1.0, 0.0, 0.0), PureQuaternion::new(1.0, 0.0, 0.0))
    };
    FocusedQuadric3::from_conic(focus, axis, 1.0 / a, (1.0 - a * a) / a)
}

/// Linear least-squares fit of sampled points to the focal form
/// `c_r·|x - focus| + v·(x - focus) + c₀ = 0` via the smallest eigenvector of
/// the normal matrix; returns the recognized surface. This is the sampling
/// oracle used to cross-validate every classification.
pub fn fit_surface_of_revolution(
    points: &[PureQuaternion],
    focus: PureQuaternion,
) -> Result<FocusedQuadric3> {
    if points.len() < 8 {
        return Err(RegulusError::Numerical("need at least 8 sample points".into()));
    }
    let mut m = nalgebra::Matrix5::<f64>::zeros();
    for p in points {
        let xi = *p - focus;
        // normalize rows so far samples of unbounded surfaces do not swamp
        // the fit
        let row = nalgebra::Vector5::new(xi.norm(), xi.x, xi.y, xi.z, 1.0) / (1.0 + xi.norm());
        m += row * row.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut best = 0;
    for k in 1..5 {
        if eig.eigenvalues[k] < eig.eigenvalues[best] {
            best = k;
        }
    }
    let v = eig.eigenvectors.column(best);
    let (c_r, vx, vy, vz, c0) = (v[0], v[1], v[2], v[3], v[4]);
    let vv = PureQuaternion::new(vx, vy, vz);
    if c_r.abs() <= 1e-8 * (vv.norm() + c0.abs()) {
        // no |x| dependence: a plane v·ξ + c0 = 0
        let n = vv.normalized()?;
        let offset = -c0 / vv.norm() + n.dot(focus);
        return FocusedQuadric3::plane(n, offset);
    }
    // r = -(v·ξ + c0)/c_r = l - e⟨ξ, n̂⟩
    let ecc_vec = vv / c_r;
    let l = -c0 / c_r;
    let e = ecc_vec.norm();
    if e <= 1e-8 {
        return FocusedQuadric3::sphere(focus, l);
    }
    FocusedQuadric3::from_conic(focus, ecc_vec.normalized()?, e, l)
}

/// RMS residual of `g` over the points, normalized by `1 + |x|`.
pub fn surface_residual(surface: &FocusedQuadric3, points: &[PureQuaternion]) -> f64 {
    points
        .iter()
        .map(|p| (surface.g(*p) / (1.0 + p.norm())).abs())
        .fold(0.0, f64::max)
}

/// Sample `n` points of an S¹-invariant quadric and push them through the
/// Hopf map. Samples beyond radius 100 are discarded to keep the fit oracle
/// well conditioned on unbounded quadrics.
pub fn sample_hopf_image(q4: &CenteredQuadric4, n: usize, rng: &mut Stream) -> Vec<PureQuaternion> {
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 400 * n {
        attempts += 1;
        let d = rng.unit_quaternion();
        if let Some(z) = q4.sample_along(d) {
            let q = hopf(z);
            if q.norm() <= 100.0 {
                out.push(q);
            }
        }
    }
    out
}

/// Classify the Hopf image of an S¹-invariant, non-singular centered quadric.
///
/// The analytic route reads the complex-Hermitian eigenvalues `(λ_A, λ_B)`:
/// the image satisfies `|Q| = (2 - (λ_A - λ_B)⟨Q, n⟩) / (λ_A + λ_B)` with `n`
/// the Hopf image of the λ_A-fiber. Every result is cross-validated against
/// the sampling + least-squares fit oracle, which wins on disagreement.
pub fn hopf_image_classify(q4: &CenteredQuadric4) -> Result<FocusedQuadric3> {
    let (lam_a, lam_b, fiber_a, _) = q4.invariant_eigenstructure()?;
    let scale = lam_a.abs().max(lam_b.abs());
    if lam_a <= 1e-13 * scale {
        return Err(RegulusError::Domain("empty quadric".into()));
    }
    let n_axis = hopf(fiber_a);
    let analytic = if (lam_a - lam_b).abs() <= 1e-12 * scale {
        FocusedQuadric3::sphere(PureQuaternion::zero(), 1.0 / lam_a)?
    } else if (lam_a + lam_b).abs() <= 1e-12 * scale {
        FocusedQuadric3::plane(n_axis, 1.0 / lam_a)?
    } else if lam_b.abs() <= 1e-12 * scale {
        FocusedQuadric3::from_conic(PureQuaternion::zero(), n_axis, 1.0, 2.0 / lam_a)?
    } else {
        let sum = lam_a + lam_b;
        let ecc = (lam_a - lam_b) / sum;
        let l = 2.0 / sum;
        if ecc >= 0.0 {
            FocusedQuadric3::from_conic(PureQuaternion::zero(), n_axis, ecc, l)?
        } else {
            FocusedQuadric3::from_conic(PureQuaternion::zero(), -n_axis, -ecc, l)?
        }
    };
    // sampling oracle cross-validation
    let mut rng = Stream::new(0xC1A5, "classify-oracle");
    let pts = sample_hopf_image(q4, 1000, &mut rng);
    if pts.len() < 100 {
        return Err(RegulusError::Numerical("could not sample the quadric".into()));
    }
    if surface_residual(&analytic, &pts) <= 1e-9 {
        return Ok(analytic);
    }
    // fall back to the fit, which is authoritative on disagreement
    let fitted = fit_surface_of_revolution(&pts, PureQuaternion::zero())?;
    if surface_residual(&fitted, &pts) <= 1e-9 {
        return Ok(fitted);
    }
    Err(RegulusError::Numerical(
        "classification and sampling oracle disagree beyond tolerance".into(),
    ))
}

/// Local minimizer of `|x|` on the surface by projected-gradient descent with
/// 32 deterministic multi-starts; converges to tangential-gradient norm
/// ≤ 1e-10.
pub fn nearest_point_to_origin(surface: &FocusedQuadric3, seed: u64) -> Result<PureQuaternion> {
    let mut rng = Stream::new(seed, "nearest-point");
    let mut best: Option<PureQuaternion> = None;
    let mut starts = 0;
    let mut attempts = 0;
    while starts < 32 && attempts < 4000 {
        attempts += 1;
        let x0 = surface.sample(rng.uniform(), rng.uniform());
        if !x0.to_array().iter().all(|v| v.is_finite()) || x0.norm() > 1e6 {
            continue;
        }
        starts += 1;
        if let Some(x) = descend(surface, x0) {
            best = match best {
                Some(b) if b.norm() <= x.norm() => Some(b),
                _ => Some(x),
            };
        }
    }
    best.ok_or_else(|| {
        RegulusError::Numerical(format!(
            "projected-gradient descent failed to converge ({starts} starts)"
        ))
    })
}

fn project_to_surface(surface: &FocusedQuadric3, mut x: PureQuaternion) -> Option<PureQuaternion> {
    for _ in 0..100 {
        let g = surface.g(x);
        if g.abs() <= 1e-14 * (1.0 + x.norm()) {
            return Some(x);
        }
        let gr = surface.grad_g(x);
        let n2 = gr.norm_sq();
        if n2 < 1e-30 {
            return None;
        }
        x = x - gr * (g / n2);
    }
    None
}

fn descend(surface: &FocusedQuadric3, x0: PureQuaternion) -> Option<PureQuaternion> {
    let mut x = project_to_surface(surface, x0)?;
    let mut eta = 0.25;
    for _ in 0..5000 {
        let gr = surface.grad_g(x);
        let gn = gr.norm();
        if gn < 1e-30 {
            return None;
        }
        let ghat = gr / gn;
        let tangential = x - ghat * x.dot(ghat);
        if tangential.norm() <= 1e-6 {
            // endgame: Newton on the stationarity system
            return kkt_polish(surface, x);
        }
        let cand = project_to_surface(surface, x - tangential * eta)?;
        if cand.norm_sq() <= x.norm_sq() {
            x = cand;
            eta = (eta * 1.3).min(1.0);
        } else {
            eta *= 0.5;
            if eta < 1e-14 {
                return kkt_polish(surface, x);
            }
        }
    }
    None
}

/// Newton iteration on `2x = λ∇g(x)`, `g(x) = 0`; polishes a near-stationary
/// point to tangential-gradient norm ≤ 1e-10 (typically machine precision).
fn kkt_polish(surface: &FocusedQuadric3, x0: PureQuaternion) -> Option<PureQuaternion> {
    let mut x = x0;
    let gr0 = surface.grad_g(x);
    let mut lambda = 2.0 * x.dot(gr0) / gr0.norm_sq();
    for _ in 0..50 {
        let gr = surface.grad_g(x);
        let h = surface.hess_g(x);
        let xa = x.to_array();
        let ga = gr.to_array();
        // residual F = (2x - λ∇g, g)
        let mut f = [0.0; 4];
        for k in 0..3 {
            f[k] = 2.0 * xa[k] - lambda * ga[k];
        }
        f[3] = surface.g(x);
        // Jacobian [[2I - λH, -∇g], [∇gᵀ, 0]]
        let mut m = nalgebra::Matrix4::<f64>::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] = (if r == c { 2.0 } else { 0.0 }) - lambda * h[r][c];
            }
            m[(r, 3)] = -ga[r];
            m[(3, r)] = ga[r];
        }
        let rhs = nalgebra::Vector4::new(-f[0], -f[1], -f[2], -f[3]);
        let delta = m.lu().solve(&rhs)?;
        x = PureQuaternion::new(xa[0] + delta[0], xa[1] + delta[1], xa[2] + delta[2]);
        lambda += delta[3];
        if delta.norm() <= 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    let gr = surface.grad_g(x);
    let ghat = gr / gr.norm();
    let tangential = (x - ghat * x.dot(ghat)).norm();
    if tangential * 2.0 <= 1e-10 && surface.g(x).abs() <= 1e-12 * (1.0 + x.norm()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::J;

    fn random_invariant(rng: &mut Stream, lam_a: f64, lam_b: f64) -> CenteredQuadric4 {
        let fiber = rng.unit_quaternion();
        CenteredQuadric4::from_invariant_eigensystem(fiber, lam_a, lam_b).unwrap()
    }

    #[test]
    fn normal_form_identity_and_diag() {
        let q = CenteredQuadric4::new(Matrix4::identity()).unwrap();
        let nf = q.normal_form();
        for ax in nf.axes {
            assert_eq!(ax.sigma, 1);
            assert!((ax.a - 1.0).abs() < 1e-14);
        }
        // diag(1/2, -1/3, 1/2, -1/3): descending |λ| gives (+,+,-,-)
        let q = CenteredQuadric4::new(Matrix4::from_diagonal(&Vector4::new(
            0.5,
            -1.0 / 3.0,
            0.5,
            -1.0 / 3.0,
        )))
        .unwrap();
        let nf = q.normal_form();
        let sigmas: Vec<i8> = nf.axes.iter().map(|a| a.sigma).collect();
        assert_eq!(sigmas, vec![1, 1, -1, -1]);
        assert!((nf.axes[0].a - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((nf.axes[2].a - 3.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normal_form_reconstructs() {
        let mut rng = Stream::new(3, "nf-recon");
        for _ in 0..50 {
            let mut m = Matrix4::zeros();
            for r in 0..4 {
                for c in r..4 {
                    let v = rng.symmetric(2.0);
                    m[(r, c)] = v;
                    m[(c, r)] = v;
                }
            }
            let q = CenteredQuadric4::new(m).unwrap();
            let nf = q.normal_form();
            let back = nf.reconstruct();
            assert!((back - m).abs().max() <= 1e-12 * (1.0 + m.abs().max()));
        }
    }

    #[test]
    fn s1_invariance_examples() {
        let round = CenteredQuadric4::new(Matrix4::identity() * 0.25).unwrap();
        assert!(round.is_s1_invariant());
        let skew = CenteredQuadric4::new(Matrix4::from_diagonal(&Vector4::new(
            1.0, 2.0, 3.0, 4.0,
        )))
        .unwrap();
        assert!(!skew.is_s1_invariant());
        let mut rng = Stream::new(5, "s1-gen");
        for _ in 0..20 {
            let (la, lb) = (rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let q = random_invariant(&mut rng, la, lb);
            assert!(q.is_s1_invariant());
        }
    }

    #[test]
    fn rotated_normal_form_is_invariant() {
        // u1²/A² + u2²/B² + u3²/A² + u4²/B² with u the rotated coordinates
        // u1=(z0+z2)/√2, u2=(z0-z2)/√2, u3=(z1+z3)/√2, u4=(z1-z3)/√2
        let (a2, b2) = (2.0, 1.0);
        let s = 1.0 / 2.0f64;
        let mut m = Matrix4::zeros();
        // u1² + u3² = ((z0+z2)² + (z1+z3)²)/2, u2² + u4² = ((z0-z2)² + (z1-z3)²)/2
        let la = 1.0 / a2;
        let lb = 1.0 / b2;
        m[(0, 0)] = s * (la + lb);
        m[(2, 2)] = s * (la + lb);
        m[(1, 1)] = s * (la + lb);
        m[(3, 3)] = s * (la + lb);
        m[(0, 2)] = s * (la - lb);
        m[(2, 0)] = s * (la - lb);
        m[(1, 3)] = s * (la - lb);
        m[(3, 1)] = s * (la - lb);
        let q = CenteredQuadric4::new(m).unwrap();
        assert!(q.is_s1_invariant());
        // spheroid with C = (A²+B²)/2 = 1.5, D = A·B = √2
        let img = hopf_image_classify(&q).unwrap();
        assert_eq!(img.kind, QuadricKind::Spheroid);
        let (c, d) = img.semi_axes().unwrap();
        assert!((c - 1.5).abs() < 1e-10, "C = {c}");
        assert!((d - 2.0f64.sqrt()).abs() < 1e-10, "D = {d}");
        assert!(img.focus.norm() < 1e-12);
    }

    #[test]
    fn dual_examples() {
        let q = CenteredQuadric4::new(Matrix4::from_diagonal(&Vector4::new(
            1.0, -1.0, 1.0, -1.0,
        )))
        .unwrap();
        let d = q.dual().unwrap();
        assert_eq!(d.matrix()[(0, 0)], -1.0);
        let dd = d.dual().unwrap();
        assert_eq!(dd, q);
        let bounded = CenteredQuadric4::new(Matrix4::identity()).unwrap();
        assert!(matches!(bounded.dual(), Err(RegulusError::Domain(_))));
    }

    #[test]
    fn classify_sphere() {
        let r = 1.7;
        let q = CenteredQuadric4::new(Matrix4::identity() / (r * r)).unwrap();
        let img = hopf_image_classify(&q).unwrap();
        assert_eq!(img.kind, QuadricKind::CenteredSphere);
        assert!((img.l - r * r).abs() < 1e-10);
    }

    #[test]
    fn classify_random_spheroids_and_hyperboloids() {
        let mut rng = Stream::new(7, "classify");
        for _ in 0..25 {
            let a = rng.range(0.5, 3.0);
            let b = rng.range(0.5, 3.0);
            if (a - b).abs() < 0.05 {
                continue;
            }
            // bounded: both positive
            let q = random_invariant(&mut rng, 1.0 / (a * a), 1.0 / (b * b));
            let img = hopf_image_classify(&q).unwrap();
            assert_eq!(img.kind, QuadricKind::Spheroid);
            let (c, d) = img.semi_axes().unwrap();
            assert!((c - (a * a + b * b) / 2.0).abs() < 1e-9);
            assert!((d - a * b).abs() < 1e-9);
            // unbounded: mixed signs
            let q = random_invariant(&mut rng, 1.0 / (a * a), -1.0 / (b * b));
            if (a - b).abs() < 0.05 {
                continue;
            }
            let img = hopf_image_classify(&q).unwrap();
            assert_eq!(img.kind, QuadricKind::HyperboloidSheet);
        }
    }

    #[test]
    fn classify_plane_and_paraboloid() {
        let mut rng = Stream::new(9, "classify-deg");
        let q = random_invariant(&mut rng, 0.5, -0.5);
        let img = hopf_image_classify(&q).unwrap();
        assert_eq!(img.kind, QuadricKind::Plane);
        // degenerate cylinder-type normal form: λ_B = 0
        let q = random_invariant(&mut rng, 0.8, 0.0);
        let img = hopf_image_classify(&q).unwrap();
        assert_eq!(img.kind, QuadricKind::Paraboloid);
        assert!(img.focus.norm() < 1e-12);
        // empty
        let q = random_invariant(&mut rng, -0.5, -1.0);
        assert!(hopf_image_classify(&q).is_err());
        // non-invariant input
        let skew =
            CenteredQuadric4::new(Matrix4::from_diagonal(&Vector4::new(1.0, 2.0, 3.0, 4.0)))
                .unwrap();
        assert!(matches!(
            hopf_image_classify(&skew),
            Err(RegulusError::Constraint(_))
        ));
    }

    #[test]
    fn classified_images_pass_sampling_residual() {
        let mut rng = Stream::new(11, "classify-res");
        for _ in 0..10 {
            let la = rng.range(0.2, 2.0);
            let lb = rng.symmetric(1.5);
            let q = random_invariant(&mut rng, la.max(lb), la.min(lb));
            let img = match hopf_image_classify(&q) {
                Ok(i) => i,
                Err(_) => continue,
            };
            let pts = sample_hopf_image(&q, 500, &mut rng);
            assert!(surface_residual(&img, &pts) <= 1e-9);
        }
    }

    #[test]
    fn rconfocal_walls() {
        // b = 1: spheroid x1²/2 + x2² + x3² = 1, foci ±i
        let s = rconfocal_spheroid(1.0).unwrap();
        let (c, d) = s.semi_axes().unwrap();
        assert!((c - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((d - 1.0).abs() < 1e-12);
        let foci = s.foci().unwrap();
        assert!((foci[0] - PureQuaternion::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((foci[1] - PureQuaternion::new(-1.0, 0.0, 0.0)).norm() < 1e-12);
        // implicit equation check on samples
        for k in 0..50 {
            let p = s.sample(k as f64 / 50.0, (k as f64 * 0.37) % 1.0);
            let f = p.x * p.x / 2.0 + p.y * p.y + p.z * p.z - 1.0;
            assert!(f.abs() < 1e-12);
        }

        // a = 1/2, positive sheet: x1²/(1/4) - (x2²+x3²)/(3/4) = 1, x1 > 0
        let h = rconfocal_hyperboloid(0.5, true).unwrap();
        let foci = h.foci().unwrap();
        let ff: Vec<f64> = foci.iter().map(|f| f.x).collect();
        assert!((ff[0] - 1.0).abs() < 1e-12 && (ff[1] + 1.0).abs() < 1e-12);
        for k in 0..50 {
            let p = h.sample(k as f64 / 50.0, (k as f64 * 0.61) % 1.0);
            let f = p.x * p.x / 0.25 - (p.y * p.y + p.z * p.z) / 0.75 - 1.0;
            assert!(f.abs() < 1e-9, "residual {f}");
            assert!(p.x > 0.0);
        }
        assert!(rconfocal_spheroid(f64::INFINITY).is_err());
        assert!(rconfocal_hyperboloid(1.5, true).is_err());
    }

    #[test]
    fn nearest_point_examples() {
        // centered sphere: any point at distance R
        let s = FocusedQuadric3::sphere(PureQuaternion::zero(), 2.5).unwrap();
        let p = nearest_point_to_origin(&s, 1).unwrap();
        assert!((p.norm() - 2.5).abs() < 1e-10);

        // spheroid focused at origin: pericenter at C - √(C²-D²)
        let (c, d) = (2.0_f64, 1.2_f64);
        let e = (c * c - d * d).sqrt() / c;
        let l = d * d / c;
        let sp = FocusedQuadric3::from_conic(
            PureQuaternion::zero(),
            PureQuaternion::new(0.0, 1.0, 0.0),
            e,
            l,
        )
        .unwrap();
        let p = nearest_point_to_origin(&sp, 2).unwrap();
        let peri = c - (c * c - d * d).sqrt();
        assert!((p.norm() - peri).abs() < 1e-8, "got {}", p.norm());

        // plane at distance
        let pl = FocusedQuadric3::plane(PureQuaternion::new(0.0, 0.6, 0.8), 1.5).unwrap();
        let p = nearest_point_to_origin(&pl, 3).unwrap();
        assert!((p.norm() - 1.5).abs() < 1e-10);
    }

    #[test]
    fn fit_oracle_recovers_known_surface() {
        let mut rng = Stream::new(13, "fit");
        let sp = rconfocal_spheroid(0.8).unwrap();
        let pts: Vec<PureQuaternion> =
            (0..200).map(|_| sp.sample(rng.uniform(), rng.uniform())).collect();
        let fit = fit_surface_of_revolution(&pts, PureQuaternion::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(fit.kind, QuadricKind::Spheroid);
        assert!(surface_residual(&fit, &pts) < 1e-10);
        let (c1, d1) = sp.semi_axes().unwrap();
        let (c2, d2) = fit.semi_axes().unwrap();
        assert!((c1 - c2).abs() < 1e-8 && (d1 - d2).abs() < 1e-8);
    }

    #[test]
    fn spheroid_pullback_factors_with_positive_cofactor() {
        // The image-spheroid equation pulls back to G₁·G₂ with
        // G₁ = C|z|² - s⟨hopf(z), m̂⟩ - D² vanishing on the quadric and
        // G₂ = C|z|² + s⟨hopf(z), m̂⟩ + D² admitting no real zeros.
        let mut rng = Stream::new(17, "g-factorization");
        for _ in 0..5 {
            let (la, lb) = (rng.range(0.4, 2.0), rng.range(0.4, 2.0));
            if (la - lb).abs() < 0.1 {
                continue;
            }
            let q4 = random_invariant(&mut rng, la, lb);
            let img = hopf_image_classify(&q4).unwrap();
            if img.kind != QuadricKind::Spheroid {
                continue;
            }
            let (c, d) = img.semi_axes().unwrap();
            let s = (c * c - d * d).sqrt();
            let center_dir = -img.axis; // direction from the origin focus to the center
            let g1 = |z: Quaternion| c * z.norm_sq() - s * hopf(z).dot(center_dir) - d * d;
            let g2 = |z: Quaternion| c * z.norm_sq() + s * hopf(z).dot(center_dir) + d * d;
            // G₁ vanishes on the quadric
            for _ in 0..100 {
                if let Some(z) = q4.sample_along(rng.unit_quaternion()) {
                    assert!(g1(z).abs() <= 1e-9 * (1.0 + z.norm_sq()));
                }
            }
            // G₂ > 0 everywhere, and G₁·G₂ is the pulled-back image equation
            let mut min_g2 = f64::INFINITY;
            for _ in 0..10_000 {
                let z = rng.quaternion(3.0);
                min_g2 = min_g2.min(g2(z));
                let q = hopf(z);
                let x = q.dot(center_dir);
                let y2 = q.norm_sq() - x * x;
                let implicit = (x - s) * (x - s) / (c * c) + y2 / (d * d) - 1.0;
                let lhs = g1(z) * g2(z);
                let rhs = c * c * d * d * implicit;
                assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
            }
            assert!(min_g2 > 0.0, "G₂ must admit no real zeros (min {min_g2:.3e})");
        }
    }

    #[test]
    fn serde_quadric4() {
        let q = CenteredQuadric4::new(Matrix4::identity() * 0.5).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        let back: CenteredQuadric4 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        let _ = J;
    }
}
