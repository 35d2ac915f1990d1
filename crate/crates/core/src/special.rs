//! Gamma-family helpers for integer order: log-factorials, the gamma
//! kernel `e^{-x} x^{n-1} / (n-1)!`, its Poisson-sum tail and the
//! consecutive-kernel contraction coefficient.

use crate::error::{Error, Result};

/// Tail mass left beyond a kernel's truncation point.
pub const KERNEL_TAIL_MASS: f64 = 1e-12;

/// `ln(n!)` via the log-gamma function.
pub fn ln_factorial(n: u32) -> f64 {
    match n {
        0 | 1 => 0.0,
        _ => libm::lgamma(f64::from(n) + 1.0),
    }
}

/// Gamma kernel of order `n`, evaluated in log space.
pub fn gamma_kernel_eval(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", 0.0, "kernel order must be at least 1"));
    }
    Ok(kernel_value(n, ln_factorial(n - 1), x))
}

#[inline]
pub(crate) fn kernel_value(n: u32, ln_norm: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if n == 1 {
        (-x).exp()
    } else if x == 0.0 {
        0.0
    } else {
        (f64::from(n - 1) * x.ln() - x - ln_norm).exp()
    }
}

/// Sum of `terms(j)` for `j = 0, 1, ...` where each term is `exp(log_term(j))`,
/// accumulated from the largest term outward so nothing underflows early.
fn poisson_sum(x: f64, range: std::ops::Range<u64>) -> f64 {
    // log of x^j e^{-x} / j!
    let log_term = |j: u64| -> f64 {
        let jf = j as f64;
        if x == 0.0 {
            if j == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            jf * x.ln() - x - libm::lgamma(jf + 1.0)
        }
    };
    if range.is_empty() {
        return 0.0;
    }
    let mode = (x.floor() as u64).clamp(range.start, range.end - 1);
    let peak = log_term(mode);
    if peak == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut acc = 1.0;
    // Walk both ways from the mode while terms still matter.
    let mut j = mode;
    while j > range.start {
        j -= 1;
        let r = (log_term(j) - peak).exp();
        acc += r;
        if r < 1e-18 * acc {
            break;
        }
    }
    let mut j = mode + 1;
    while j < range.end {
        let r = (log_term(j) - peak).exp();
        acc += r;
        if r < 1e-18 * acc {
            break;
        }
        j += 1;
    }
    acc * peak.exp()
}

/// Regularized upper incomplete gamma `Q(n, x)` for natural `n`, i.e. the
/// kernel mass beyond `x`. For integer order this is the Poisson tail
/// `e^{-x} sum_{j<n} x^j / j!`.
pub fn upper_incomplete_gamma(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let n64 = u64::from(n);
    if x < f64::from(n) {
        // Q is the large one here; get it as 1 - P with P summed directly.
        1.0 - poisson_sum(x, n64..n64 + 4096 + 4 * x as u64)
    } else {
        poisson_sum(x, 0..n64)
    }
}

/// Regularized lower incomplete gamma `P(n, x)`: kernel mass on `[0, x]`.
pub fn lower_incomplete_gamma(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let n64 = u64::from(n);
    if x < f64::from(n) {
        poisson_sum(x, n64..n64 + 4096 + 4 * x as u64)
    } else {
        1.0 - poisson_sum(x, 0..n64)
    }
}

/// Smallest `T` (to bisection resolution) with `Q(n, T) <= tail`.
pub fn kernel_tail_cut(n: u32, tail: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", 0.0, "kernel order must be at least 1"));
    }
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::param("tail", tail, "must lie in (0, 1)"));
    }
    let nf = f64::from(n);
    let mut lo = 0.0;
    let mut hi = nf + 10.0;
    while upper_incomplete_gamma(n, hi) > tail {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if upper_incomplete_gamma(n, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `2 e^{-n} n^n / n!`, the total variation between gamma kernels of order
/// `n` and `n + 1`.
pub fn contraction_coefficient(n: u32) -> f64 {
    if n == 0 {
        return 2.0;
    }
    let nf = f64::from(n);
    (std::f64::consts::LN_2 - nf + nf * nf.ln() - ln_factorial(n)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_spot_values() {
        assert_eq!(gamma_kernel_eval(4, -1.0).unwrap(), 0.0);
        assert_eq!(gamma_kernel_eval(1, 0.0).unwrap(), 1.0);
        assert!((gamma_kernel_eval(3, 2.0).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert!(gamma_kernel_eval(0, 1.0).is_err());
        // Large order must not overflow.
        let v = gamma_kernel_eval(400, 399.0).unwrap();
        assert!(v.is_finite() && v > 0.0 && v < 1.0);
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        // Q(1, x) = e^{-x}; Q(2, x) = (1 + x) e^{-x}.
        for &x in &[0.1, 1.0, 5.0, 30.0] {
            assert!((upper_incomplete_gamma(1, x) - (-x).exp()).abs() < 1e-15);
            let q2 = (1.0 + x) * (-x).exp();
            assert!((upper_incomplete_gamma(2, x) - q2).abs() < 1e-14 * q2.max(1e-300) + 1e-16);
            assert!(
                (lower_incomplete_gamma(2, x) + upper_incomplete_gamma(2, x) - 1.0).abs() < 1e-14
            );
        }
        assert_eq!(upper_incomplete_gamma(5, 0.0), 1.0);
    }

    #[test]
    fn tail_cut_is_tight() {
        for n in [1u32, 2, 5, 17, 64] {
            let t = kernel_tail_cut(n, KERNEL_TAIL_MASS).unwrap();
            assert!(upper_incomplete_gamma(n, t) <= KERNEL_TAIL_MASS);
            assert!(upper_incomplete_gamma(n, t * (1.0 - 1e-6)) > KERNEL_TAIL_MASS);
        }
        // Q(1, T) = e^{-T} = 1e-12  =>  T = 12 ln 10.
        let t1 = kernel_tail_cut(1, 1e-12).unwrap();
        assert!((t1 - 12.0 * std::f64::consts::LN_10).abs() < 1e-8);
    }

    #[test]
    fn contraction_coefficient_values() {
        // 2 e^{-4} 4^4 / 4!
        let c4 = 2.0 * (-4.0f64).exp() * 256.0 / 24.0;
        assert!((contraction_coefficient(4) - c4).abs() < 1e-14);
        assert!((c4 - 0.3907).abs() < 1e-4);
        assert!((contraction_coefficient(1) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        // Stirling: ~ 2 / sqrt(2 pi n)
        let n = 10_000u32;
        let stirling = 2.0 / (2.0 * std::f64::consts::PI * f64::from(n)).sqrt();
        assert!((contraction_coefficient(n) / stirling - 1.0).abs() < 1e-4);
    }
}
