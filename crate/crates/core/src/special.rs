//! Special functions backing the Beta distribution: log-gamma, the
//! regularized incomplete beta function and its inverse.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const CF_MAX_ITER: usize = 300;
const CF_EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// `1 - I_{1-x}(b, a)` past the mean where the fraction converges slowly.
pub fn inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "shape parameters must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - inc_beta_cf(b, a, 1.0 - x))
    } else {
        Ok(inc_beta_cf(a, b, x))
    }
}

fn inc_beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    (front * h).clamp(0.0, 1.0)
}

/// Absolute tolerance on the bracket width when inverting the CDF.
pub const QUANTILE_TOL: f64 = 1e-10;
/// Iteration cap for the quantile bisection.
pub const QUANTILE_MAX_ITER: usize = 200;

/// Inverse of `I_x(a, b)` in `x`, by bisection on `[0, 1]`.
pub fn inc_beta_inv(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} is outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..QUANTILE_MAX_ITER {
        if hi - lo <= QUANTILE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let cdf = inc_beta(a, b, mid)?;
        if cdf == p {
            return Ok(mid);
        }
        if cdf < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ln_factorial(m: u64) -> f64 {
        (2..=m).map(|i| (i as f64).ln()).sum()
    }

    // Exact for integer shapes: I_x(a, b) = P(Bin(a + b - 1, x) >= a).
    fn binomial_tail(a: u64, b: u64, x: f64) -> f64 {
        let n = a + b - 1;
        (a..=n)
            .map(|j| {
                let ln_c = ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j);
                (ln_c + j as f64 * x.ln() + (n - j) as f64 * (1.0 - x).ln()).exp()
            })
            .sum()
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for m in 1..=170u64 {
            assert_relative_eq!(
                ln_gamma(m as f64),
                ln_factorial(m - 1),
                epsilon = 1e-10,
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn inc_beta_matches_binomial_tail() {
        for a in 1..=40u64 {
            for b in 1..=40u64 {
                for i in 1..20 {
                    let x = i as f64 / 20.0;
                    let got = inc_beta(a as f64, b as f64, x).unwrap();
                    let want = binomial_tail(a, b, x);
                    assert!(
                        (got - want).abs() < 1e-12,
                        "I_{x}({a},{b}) = {got}, expected {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn inc_beta_endpoints_and_domain() {
        assert_eq!(inc_beta(3.0, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(inc_beta(3.0, 2.0, 1.0).unwrap(), 1.0);
        assert!(inc_beta(3.0, 2.0, 1.5).is_err());
        assert!(inc_beta(0.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for &(a, b) in &[
            (1.0, 1.0),
            (2.0, 1.0),
            (1.0, 2.0),
            (81.0, 21.0),
            (9.0, 3.0),
            (60.0, 60.0),
        ] {
            for &p in &[0.001, 0.025, 0.5, 0.975, 0.999] {
                let x = inc_beta_inv(a, b, p).unwrap();
                assert!((inc_beta(a, b, x).unwrap() - p).abs() < 1e-8);
            }
        }
    }
}
