//! Adaptive Dormand-Prince 5(4) integration of complex-valued linear and
//! nonlinear systems.
//!
//! The state may be rescaled on the fly (`renormalize_above`); the
//! accumulated log-scale is reported with every checkpoint so callers that
//! care about absolute magnitudes can undo it.

use num_complex::Complex64;

use crate::error::{QuenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    /// Absolute tolerance, relative to the largest component of the state.
    pub atol: f64,
    /// First trial step; `None` picks 1e-6 of the span.
    pub initial_step: Option<f64>,
    /// Upper bound on the step, `None` for unbounded.
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// Rescale the state whenever its largest component exceeds this.
    pub renormalize_above: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            initial_step: None,
            max_step: None,
            max_steps: 10_000_000,
            renormalize_above: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub state: Vec<Complex64>,
    /// Natural log of the factor by which `state` was divided.
    pub log_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub checkpoints: Vec<Checkpoint>,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` through every time in `checkpoints`
/// (which must be increasing and not before `t0`), landing on each exactly.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[Complex64],
    checkpoints: &[f64],
    opts: &OdeOptions,
) -> Result<Solution>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let t_end = checkpoints.last().copied().unwrap_or(t0);
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.first().is_some_and(|&c| c < t0) {
        return Err(QuenchError::Domain("checkpoints must be increasing and after t0".into()));
    }

    let mut y = y0.to_vec();
    let mut y_new = vec![Complex64::default(); n];
    let mut tmp = vec![Complex64::default(); n];
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::default(); n]);
    let mut t = t0;
    let mut log_scale = 0.0;
    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
    let mut h = opts.initial_step.unwrap_or(1e-6 * span);
    let max_step = opts.max_step.unwrap_or(f64::INFINITY);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut accepted = 0;
    let mut rejected = 0;
    let mut have_k1 = false;

    for &target in checkpoints {
        while t < target {
            if accepted + rejected >= opts.max_steps {
                return Err(QuenchError::StepSizeCollapse { at: t });
            }
            h = h.min(max_step);
            let last = t + h >= target;
            let proposed = h;
            if last {
                h = target - t;
            }
            if !last && h <= 1e-14 * t.abs().max(f64::MIN_POSITIVE) {
                return Err(QuenchError::StepSizeCollapse { at: t });
            }
            if !have_k1 {
                f(t, &y, &mut k[0]);
                have_k1 = true;
            }

            let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            f(t + C2 * h, &tmp, k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * h, &tmp, k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * h, &tmp, k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * h, &tmp, k5);
            for i in 0..n {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_next = if last { target } else { t + h };
            f(t_next, &tmp, k6);
            for i in 0..n {
                y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(t_next, &y_new, k7);

            let scale = y.iter().chain(y_new.iter()).map(|c| c.norm()).fold(0.0, f64::max);
            let mut err2 = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol * scale + opts.rtol * y[i].norm().max(y_new[i].norm());
                let r = if sc > 0.0 { e.norm() / sc } else { 0.0 };
                err2 += r * r;
            }
            let err = (err2 / n as f64).sqrt();

            if err <= 1.0 {
                t = t_next;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(k1, k7);
                accepted += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = if last { proposed.max(fac * h) } else { fac * h };
                if let Some(limit) = opts.renormalize_above {
                    let big = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    if big > limit || (big < 1.0 / limit && big > 0.0) {
                        for c in y.iter_mut() {
                            *c /= big;
                        }
                        for c in k1.iter_mut() {
                            *c /= big;
                        }
                        log_scale += big.ln();
                    }
                }
            } else {
                rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h *= fac;
            }
        }
        out.push(Checkpoint { t, state: y.clone(), log_scale });
    }

    Ok(Solution { checkpoints: out, accepted, rejected })
}
