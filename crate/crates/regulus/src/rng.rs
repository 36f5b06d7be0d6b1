//! Deterministic counter-based pseudorandom source for the verification
//! harness and tests.
//!
//! The generator is SplitMix64 evaluated as a pure function of
//! `(seed, counter)`, so identical inputs give bit-identical samples on every
//! platform. Each check derives an independent stream from `(seed, name)`.

use crate::quat::{PureQuaternion, Quaternion};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut v: u64) -> u64 {
    v = (v ^ (v >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    v = (v ^ (v >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    v ^ (v >> 31)
}

/// FNV-1a hash of a stream label.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// An independent counter-based random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    base: u64,
    counter: u64,
}

impl Stream {
    /// Derive the stream for `(seed, label)`.
    pub fn new(seed: u64, label: &str) -> Self {
        Self {
            base: mix(seed ^ label_hash(label)),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.base.wrapping_add(self.counter.wrapping_mul(GAMMA)).wrapping_add(GAMMA));
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform in [-a, a).
    pub fn symmetric(&mut self, a: f64) -> f64 {
        self.range(-a, a)
    }

    /// Quaternion with components uniform in [-a, a).
    pub fn quaternion(&mut self, a: f64) -> Quaternion {
        Quaternion::new(
            self.symmetric(a),
            self.symmetric(a),
            self.symmetric(a),
            self.symmetric(a),
        )
    }

    /// Pure quaternion with components uniform in [-a, a).
    pub fn pure(&mut self, a: f64) -> PureQuaternion {
        PureQuaternion::new(self.symmetric(a), self.symmetric(a), self.symmetric(a))
    }

    /// Unit quaternion, rejection-sampled away from the origin.
    pub fn unit_quaternion(&mut self) -> Quaternion {
        loop {
            let q = self.quaternion(1.0);
            let n = q.norm();
            if n > 1e-3 {
                return q / n;
            }
        }
    }

    /// Unit 3-vector.
    pub fn unit_pure(&mut self) -> PureQuaternion {
        loop {
            let p = self.pure(1.0);
            let n = p.norm();
            if n > 1e-3 {
                return p / n;
            }
        }
    }
}
