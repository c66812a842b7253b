//! Small numerical helpers: binomial weights, compensated sums and the
//! Gaussian tail function.

use crate::error::{Error, Result};

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln C(n, b)` for `b = 0..=n`.
pub fn ln_binomial_coefficients(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for b in 1..=n {
        acc += ((n - b + 1) as f64).ln() - (b as f64).ln();
        out.push(acc);
    }
    // symmetric, so mirror the first half to cancel drift
    for b in 0..=n / 2 {
        out[n - b] = out[b];
    }
    out
}

/// Binomial(n, p) probability mass function, computed in log space so that
/// large `n` does not overflow.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[n] = 1.0;
        return pmf;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    ln_binomial_coefficients(n)
        .into_iter()
        .enumerate()
        .map(|(b, lc)| (lc + b as f64 * lp + (n - b) as f64 * lq).exp())
        .collect()
}

/// Gaussian tail `Q(x) = ½ erfc(x / √2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] by bisection, to 1e-12 in `x`.
pub fn q_inv(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("Q^-1 needs 0 < delta < 1, got {delta}")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        // Q is decreasing
        if q_function(mid) > delta {
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

    /// Composite Simpson rule on the standard normal density over [x, x+12].
    fn q_by_quadrature(x: f64) -> f64 {
        let steps = 200_000;
        let h = 12.0 / steps as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(x) + phi(x + 12.0);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(x + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn pmf_sums_to_one() {
        for n in [1, 10, 128, 1024] {
            for p in [0.0, 0.1, 0.4, 0.9] {
                let s = compensated_sum(binomial_pmf(n, p));
                assert!((s - 1.0).abs() < 1e-12, "n={n} p={p} sum={s}");
            }
        }
    }

    #[test]
    fn pmf_small_values() {
        let pmf = binomial_pmf(3, 0.4);
        let expected = [0.216, 0.432, 0.288, 0.064];
        for (a, b) in pmf.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = ln_binomial_coefficients(60);
        assert!((c[30].exp() - 118264581564861424.0).abs() / 1.2e17 < 1e-12);
    }

    #[test]
    fn q_inv_symmetry_and_roundtrip() {
        assert!(q_inv(0.5).unwrap().abs() < 1e-10);
        for d in [0.1, 0.01, 0.001] {
            assert!((q_function(q_inv(d).unwrap()) - d).abs() < 1e-9);
        }
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
        assert!(q_inv(f64::NAN).is_err());
    }

    #[test]
    fn q_inv_against_quadrature() {
        // bisection on the quadrature oracle, independent of erfc
        let (mut lo, mut hi) = (2.0f64, 4.0f64);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if q_by_quadrature(mid) > 0.001 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 3.09023).abs() < 1e-5);
        assert!((q_inv(0.001).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let values = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000));
        assert!((compensated_sum(values) - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
