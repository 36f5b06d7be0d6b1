//! Adaptive Dormand-Prince 5(4) integrator with dense output.
//!
//! Dense output is the standard quartic interpolant; billiard event
//! detection samples it inside each accepted step.

use crate::error::{RegulusError, Result};

/// Butcher tableau of DOPRI5.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 4th-order embedded weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
/// Dense-output weights (Hairer's rcont5 coefficients).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integration options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
}

/// One accepted step: `[t0, t1]` with a dense interpolant.
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    /// Interpolated state at `t ∈ [t0, t1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        let n = self.rcont[0].len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = self.rcont[0][i]
                + s * (self.rcont[1][i]
                    + s1 * (self.rcont[2][i] + s * (self.rcont[3][i] + s1 * self.rcont[4][i])));
            out.push(v);
        }
        out
    }
}

/// DOPRI5 stepper over a right-hand side `f(t, y, dy)`.
pub struct Dopri5<F> {
    f: F,
    pub t: f64,
    pub y: Vec<f64>,
    k1: Vec<f64>,
    h: f64,
    direction: f64,
    opts: OdeOpts,
    pub stats: OdeStats,
    first: bool,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(mut f: F, t0: f64, y0: Vec<f64>, direction: f64, opts: OdeOpts) -> Result<Self> {
        let mut k1 = vec![0.0; y0.len()];
        f(t0, &y0, &mut k1)?;
        // conservative automatic initial step
        let sc: f64 = y0
            .iter()
            .zip(&k1)
            .map(|(y, d)| (d / (opts.abs_tol + opts.rel_tol * y.abs().max(1.0))).powi(2))
            .sum::<f64>()
            .sqrt();
        let h0 = if sc > 0.0 { (0.01 / sc).min(opts.max_step) } else { 1e-6 };
        Ok(Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: h0.max(1e-10),
            direction: direction.signum(),
            opts,
            stats: OdeStats::default(),
            first: true,
        })
    }

    /// Advance one accepted step, not beyond `t_limit`; returns the dense
    /// interpolant of the step taken.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep> {
        let n = self.y.len();
        let mut k = vec![vec![0.0; n]; 7];
        k[0].copy_from_slice(&self.k1);
        let mut ytmp = vec![0.0; n];
        loop {
            if self.stats.steps + self.stats.rejected > self.opts.max_steps {
                return Err(RegulusError::Numerical("step budget exceeded".into()));
            }
            let mut h = self.h.min(self.opts.max_step) * self.direction;
            let remaining = t_limit - self.t;
            if remaining.abs() <= 1e-14 * self.t.abs().max(1.0) {
                return Err(RegulusError::Numerical("step called at the end of the span".into()));
            }
            if (h - remaining) * self.direction > 0.0 {
                h = remaining;
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) {
                return Err(RegulusError::Singular(format!(
                    "step size underflow at t = {:.6e}",
                    self.t
                )));
            }
            let mut failed = false;
            for stage in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += A[stage][j] * kj[i];
                    }
                    ytmp[i] = self.y[i] + h * acc;
                }
                let (head, tail) = k.split_at_mut(stage);
                let _ = head;
                if (self.f)(self.t + C[stage] * h, &ytmp, &mut tail[0]).is_err() {
                    failed = true;
                    break;
                }
            }
            if failed {
                // retreat towards the singularity
                self.stats.rejected += 1;
                self.h *= 0.25;
                if self.h < 1e-14 * self.t.abs().max(1.0) {
                    return Err(RegulusError::Singular(format!(
                        "right-hand side failed near t = {:.6e}",
                        self.t
                    )));
                }
                continue;
            }
            // 5th-order solution is stage row 6 of A (FSAL)
            let y1: Vec<f64> = (0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(6) {
                        acc += A[6][j] * kj[i];
                    }
                    self.y[i] + h * acc
                })
                .collect();
            let mut k7 = vec![0.0; n];
            match (self.f)(self.t + h, &y1, &mut k7) {
                Ok(()) => {}
                Err(_) => {
                    self.stats.rejected += 1;
                    self.h *= 0.25;
                    continue;
                }
            }
            // embedded error estimate
            let mut err = 0.0;
            for i in 0..n {
                let mut acc4 = 0.0;
                for (j, kj) in k.iter().enumerate().take(6) {
                    acc4 += B4[j] * kj[i];
                }
                acc4 += B4[6] * k7[i];
                let e = h * (acc4 - (y1[i] - self.y[i]) / h);
                let sc = self.opts.abs_tol + self.opts.rel_tol * self.y[i].abs().max(y1[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if err <= 1.0 || self.h.abs() <= 1e-13 * self.t.abs().max(1.0) {
                // accept: build dense coefficients
                let ydiff: Vec<f64> = (0..n).map(|i| y1[i] - self.y[i]).collect();
                let bspl: Vec<f64> = (0..n).map(|i| h * k[0][i] - ydiff[i]).collect();
                let mut rcont4 = vec![0.0; n];
                let mut rcont5 = vec![0.0; n];
                for i in 0..n {
                    rcont4[i] = ydiff[i] - h * k7[i] - bspl[i];
                    let mut acc = D[0] * k[0][i];
                    for (j, kj) in k.iter().enumerate().take(6).skip(1) {
                        acc += D[j] * kj[i];
                    }
                    acc += D[6] * k7[i];
                    rcont5[i] = h * acc;
                }
                let dense = DenseStep {
                    t0: self.t,
                    t1: self.t + h,
                    rcont: [self.y.clone(), ydiff, bspl, rcont4, rcont5],
                };
                self.t += h;
                self.y = y1;
                self.k1 = k7;
                self.stats.steps += 1;
                // step-size controller
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, if self.first { 10.0 } else { 5.0 })
                };
                self.first = false;
                self.h = (h.abs() * fac).min(self.opts.max_step);
                return Ok(dense);
            }
            self.stats.rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            self.h = h.abs() * fac;
        }
    }
}
