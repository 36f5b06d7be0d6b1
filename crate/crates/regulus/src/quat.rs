//! Quaternion algebra: Hamilton product, conjugation, the Hopf map and the
//! bilinear form `BL` that the rest of the crate builds on.
//!
//! Conventions: `q = w + x·i + y·j + z·k` with `ij = -ji = k`, `jk = -kj = i`,
//! `ki = -ik = j`. Purely imaginary quaternions are identified with ℝ³.
//! All values are immutable and every operation here is a pure function.

use crate::error::{RegulusError, Result};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A quaternion `w + x·i + y·j + z·k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    /// Scalar (real) part.
    pub w: f64,
    /// Coefficient of `i`.
    pub x: f64,
    /// Coefficient of `j`.
    pub y: f64,
    /// Coefficient of `k`.
    pub z: f64,
}

/// A purely imaginary quaternion `x·i + y·j + z·k`, identified with ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PureQuaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn scalar(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// `cos θ + sin θ · i`, the only exponential the transforms need.
    pub fn exp_i(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin(), 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Real part `Re(q)`.
    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `Im(q)` as a pure quaternion.
    pub fn im(self) -> PureQuaternion {
        PureQuaternion::new(self.x, self.y, self.z)
    }

    /// Conjugate `w - x·i - y·j - z·k`.
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product of ℝ⁴; equals `Re(ā·b)`.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Multiplicative inverse `conj(q) / |q|²`.
    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sq();
        if n2 == 0.0 {
            return Err(RegulusError::Domain("zero quaternion".into()));
        }
        Ok(self.conj() / n2)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl PureQuaternion {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Embeds into ℍ with zero scalar part.
    pub fn to_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(RegulusError::Domain("cannot normalize zero vector".into()));
        }
        Ok(self / n)
    }
}

impl From<PureQuaternion> for Quaternion {
    fn from(p: PureQuaternion) -> Self {
        p.to_quaternion()
    }
}

/// Hamilton product.
pub fn mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

/// The Hopf map `z ↦ z̄·i·z`, written out in real components so the scalar
/// part is identically zero rather than a rounding residue.
pub fn hopf(q: Quaternion) -> PureQuaternion {
    let Quaternion { w, x, y, z } = q;
    PureQuaternion::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (w * y + x * z),
    )
}

/// Bilinear form `BL(z, w) = Re(z̄·i·w)`, the moment map of the circle action
/// `(z, w) ↦ (e^{iθ}z, e^{iθ}w)`.
pub fn bl(a: Quaternion, b: Quaternion) -> f64 {
    a.x * b.w - a.w * b.x + a.z * b.y - a.y * b.z
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        mul(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w + rhs.w,
            self.x + rhs.x,
            self.y + rhs.y,
            self.z + rhs.z,
        )
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w - rhs.w,
            self.x - rhs.x,
            self.y - rhs.y,
            self.z - rhs.z,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Add for PureQuaternion {
    type Output = PureQuaternion;
    fn add(self, rhs: PureQuaternion) -> PureQuaternion {
        PureQuaternion::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for PureQuaternion {
    type Output = PureQuaternion;
    fn sub(self, rhs: PureQuaternion) -> PureQuaternion {
        PureQuaternion::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for PureQuaternion {
    type Output = PureQuaternion;
    fn neg(self) -> PureQuaternion {
        PureQuaternion::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for PureQuaternion {
    type Output = PureQuaternion;
    fn mul(self, s: f64) -> PureQuaternion {
        PureQuaternion::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<PureQuaternion> for f64 {
    type Output = PureQuaternion;
    fn mul(self, p: PureQuaternion) -> PureQuaternion {
        p * self
    }
}

impl Div<f64> for PureQuaternion {
    type Output = PureQuaternion;
    fn div(self, s: f64) -> PureQuaternion {
        PureQuaternion::new(self.x / s, self.y / s, self.z / s)
    }
}

// Quaternions serialize as JSON arrays [z0, z1, z2, z3]; pure quaternions as
// [q1, q2, q3].

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(4))?;
        for v in self.to_array() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

impl Serialize for PureQuaternion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        for v in self.to_array() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

struct ArrayVisitor<const N: usize>;

impl<'de, const N: usize> Visitor<'de> for ArrayVisitor<N> {
    type Value = [f64; N];

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an array of {N} numbers")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<[f64; N], A::Error> {
        let mut out = [0.0; N];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = seq
                .next_element()?
                .ok_or_else(|| serde::de::Error::invalid_length(i, &self))?;
        }
        if seq.next_element::<f64>()?.is_some() {
            return Err(serde::de::Error::invalid_length(N + 1, &self));
        }
        Ok(out)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Self::from_array(d.deserialize_seq(ArrayVisitor::<4>)?))
    }
}

impl<'de> Deserialize<'de> for PureQuaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Self::from_array(d.deserialize_seq(ArrayVisitor::<3>)?))
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "{:+.6e} {:+.6e}i {:+.6e}j {:+.6e}k",
            self.w, self.x, self.y, self.z
        )
    }
}
