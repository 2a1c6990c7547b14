//! Airy function Ai on the real line and the zeros of Ai(-x).
//!
//! Maclaurin series for |x| <= 7, Poincare asymptotic expansions (DLMF
//! 9.7.5-9.7.10) outside, truncated at the smallest term.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{QuenchError, Result};

/// Ai(0)
const AI0: f64 = 0.355028053887817239260063186004183;
/// -Ai'(0)
const DAI0: f64 = 0.258819403792806798405183560189203;

const SERIES_LIMIT: f64 = 7.0;

/// Largest number of zeros [`airy_zeros`] will hand out.
pub const MAX_ZEROS: usize = 100_000;

/// Returns (Ai(x), Ai'(x)).
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_LIMIT {
        maclaurin(x)
    } else if x < 0.0 {
        oscillatory(-x)
    } else {
        decaying(x)
    }
}

// Taylor coefficients from Ai'' = x Ai: a_n = a_{n-3} / (n (n-1)), a_2 = 0.
fn maclaurin(x: f64) -> (f64, f64) {
    let mut ring = [AI0, -DAI0, 0.0];
    let mut value = AI0 - DAI0 * x;
    let mut deriv = -DAI0;
    let mut x_pow = x * x; // x^(n-1)
    let mut recent = 0.0f64;
    for n in 3..400usize {
        let an = ring[n % 3] / (n * (n - 1)) as f64;
        ring[n % 3] = an;
        let dterm = n as f64 * an * x_pow;
        x_pow *= x;
        let term = an * x_pow;
        value += term;
        deriv += dterm;
        recent = recent.max(term.abs() + dterm.abs());
        if n % 3 == 2 {
            if recent < 1e-18 * (value.abs() + deriv.abs()) {
                break;
            }
            recent = 0.0;
        }
    }
    (value, deriv)
}

const N_COEFF: usize = 40;

/// u_k of DLMF 9.7.2 together with v_k = -(6k+1)/(6k-1) u_k.
fn expansion_coefficients() -> &'static ([f64; N_COEFF], [f64; N_COEFF]) {
    static COEFFS: OnceLock<([f64; N_COEFF], [f64; N_COEFF])> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut u = [0.0; N_COEFF];
        let mut v = [0.0; N_COEFF];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..N_COEFF {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        (u, v)
    })
}

/// Sums `sum_k (-1)^k c_{2k+offset} / zeta^{2k+offset}` until the terms
/// stop decreasing.
fn alternating_tail(coeffs: &[f64], zeta: f64, offset: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = 0;
    while 2 * k + offset < coeffs.len() {
        let idx = 2 * k + offset;
        let term = coeffs[idx] / zeta.powi(idx as i32);
        if term.abs() >= last {
            break;
        }
        sum += if k % 2 == 0 { term } else { -term };
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        k += 1;
    }
    sum
}

// Ai(-z), Ai'(-z) for large positive z; returns derivative with respect to x = -z.
fn oscillatory(z: f64) -> (f64, f64) {
    let (u, v) = expansion_coefficients();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let theta = zeta - PI / 4.0;
    let (s, c) = theta.sin_cos();
    let p = alternating_tail(u, zeta, 0);
    let q = alternating_tail(u, zeta, 1);
    let r = alternating_tail(v, zeta, 0);
    let w = alternating_tail(v, zeta, 1);
    let quarter = z.powf(0.25);
    let ai = (c * p + s * q) / (PI.sqrt() * quarter);
    let dai = quarter / PI.sqrt() * (s * r - c * w);
    (ai, dai)
}

fn decaying(x: f64) -> (f64, f64) {
    let (u, v) = expansion_coefficients();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let series = |c: &[f64]| {
        let mut sum = 0.0;
        let mut last = f64::INFINITY;
        for (k, ck) in c.iter().enumerate() {
            let term = ck / zeta.powi(k as i32);
            if term.abs() >= last {
                break;
            }
            sum += if k % 2 == 0 { term } else { -term };
            last = term.abs();
        }
        sum
    };
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let quarter = x.powf(0.25);
    (pre / quarter * series(u), -pre * quarter * series(v))
}

/// Leading asymptotic estimate of the n-th zero of Ai(-x), DLMF 9.9.6/9.9.18.
pub fn asymptotic_zero(n: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * n as f64 - 1.0) / 8.0;
    let t2 = 1.0 / (t * t);
    t.powf(2.0 / 3.0)
        * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77125.0 / 82944.0 + t2 * (-108056875.0 / 6967296.0)))))
}

/// First `n` positive numbers lambda with Ai(-lambda) = 0, increasing.
pub fn airy_zeros(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(QuenchError::Domain("at least one Airy zero must be requested".into()));
    }
    if n > MAX_ZEROS {
        return Err(QuenchError::Domain(format!("{n} Airy zeros requested; at most {MAX_ZEROS} supported")));
    }
    (1..=n).map(polish_zero).collect()
}

fn polish_zero(n: usize) -> Result<f64> {
    let g = |lam: f64| airy_ai(-lam);
    let guess = asymptotic_zero(n);
    let half_gap = 0.25 * PI / guess.sqrt();
    let (mut lo, mut hi) = (guess - half_gap, guess + half_gap);
    let (mut f_lo, f_hi) = (g(lo).0, g(hi).0);
    if f_lo * f_hi > 0.0 {
        return Err(QuenchError::Domain(format!("failed to bracket Airy zero {n}")));
    }
    let mut x = guess;
    for _ in 0..100 {
        let (f, df) = g(x);
        if f == 0.0 {
            return Ok(x);
        }
        // d/dlam Ai(-lam) = -Ai'(-lam)
        let newton = x + f / df;
        if f * f_lo > 0.0 {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath airyai(x), airyai(x, derivative=1)
    const REFERENCE: [(f64, f64, f64); 9] = [
        (0.0, 0.35502805388781723926, -0.25881940379280679841),
        (1.5, 0.071749497008105409674, -0.097382012842301319218),
        (-3.0, -0.37881429367765807435, 0.31458376921659881365),
        (-6.9, 0.10168799773976482521, -0.87103105868638740865),
        (-7.1, 0.25403632856197814572, -0.61552878754022881293),
        (-25.0, 0.16352657883042946949, 0.96237885138769741004),
        (-100.0, 0.17675339323955287809, -0.2422970316605838054),
        (7.0, 7.4921288639971670808e-7, -2.0081508947387919912e-6),
        (9.0, 2.4711684308724898433e-9, -7.4806413896589464128e-9),
    ];

    #[test]
    fn matches_reference_values() {
        for (x, ai, dai) in REFERENCE {
            let (v, d) = airy_ai(x);
            assert!((v - ai).abs() < 1e-11, "Ai({x}) = {v}, want {ai}");
            assert!((d - dai).abs() < 1e-10, "Ai'({x}) = {d}, want {dai}");
        }
    }

    #[test]
    fn branches_agree_at_switchover() {
        for x in [-7.0, 7.0] {
            let a = maclaurin(x);
            let b = if x < 0.0 { oscillatory(-x) } else { decaying(x) };
            assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-9, "{x}: {a:?} {b:?}");
        }
    }

    #[test]
    fn first_zeros() {
        let z = airy_zeros(3).unwrap();
        // mpmath airyaizero
        assert!((z[0] - 2.3381074104597670385).abs() < 1e-12);
        assert!((z[1] - 4.0879494441309706166).abs() < 1e-12);
        assert!((z[2] - 5.5205598280955510591).abs() < 1e-12);
        let z = airy_zeros(1000).unwrap();
        assert!((z[9] - 12.8287767528657572).abs() < 1e-11);
        assert!((z[999] - 281.03151961252155284).abs() < 1e-9);
    }

    #[test]
    fn zero_count_limits() {
        assert!(airy_zeros(0).is_err());
        assert!(airy_zeros(MAX_ZEROS + 1).is_err());
    }
}
