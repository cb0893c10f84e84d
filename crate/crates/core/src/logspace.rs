//! Log-domain accumulation for factorial-weighted sums.

use statrs::function::factorial::ln_factorial;

/// `ln(n!)` for exact integer arguments.
pub fn ln_fact(n: usize) -> f64 {
    ln_factorial(n as u64)
}

/// `k · ln(x)` with the convention `0⁰ = 1`; `−∞` when `x = 0 < k`.
pub fn ln_pow(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * x.ln()
    }
}

/// Running `ln Σ exp(t_i)` that never overflows.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    pub fn add(&mut self, t: f64) {
        if t == f64::NEG_INFINITY {
            return;
        }
        if t <= self.max {
            self.scaled += (t - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - t).exp() + 1.0;
            self.max = t;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::default();
        iter.into_iter().for_each(|t| acc.add(t));
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let terms = [0.1f64, -3.0, 2.5, 1.0];
        let direct = terms.iter().map(|t| t.exp()).sum::<f64>().ln();
        let acc: LogSumExp = terms.iter().copied().collect();
        assert!((acc.value() - direct).abs() < 1e-14);
    }

    #[test]
    fn survives_huge_terms() {
        let acc: LogSumExp = [1000.0, 1000.0].into_iter().collect();
        assert!((acc.value() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(LogSumExp::default().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        assert_eq!(ln_pow(0.0, 0), 0.0);
        assert_eq!(ln_pow(0.0, 3), f64::NEG_INFINITY);
        assert!((ln_fact(5) - 120f64.ln()).abs() < 1e-12);
    }
}
