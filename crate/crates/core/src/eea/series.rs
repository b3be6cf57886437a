//! Truncated logarithm series `ln(1 + x) ≈ Σ_{k=1}^K (−1)^{k−1} x^k / k`
//! with `x = e^{−iθ} − 1`, re-expanded in powers of `e^{−iθ}`.

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub const MAX_ORDER: usize = 20;

/// `C₀ … C_K` with `Σ_l C_l e^{−iθl} = Σ_{k=1}^K (−1)^{k−1}(e^{−iθ} − 1)^k / k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoefficients {
    pub k: usize,
    pub c: Vec<f64>,
}

impl SeriesCoefficients {
    /// `Σ_l C_l z^l`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ_l C_l y_l`, the combination applied to estimated overlaps.
    pub fn combine(&self, y: &[Complex64]) -> Result<Complex64> {
        if y.len() != self.c.len() {
            return invalid(format!("need {} overlaps, got {}", self.c.len(), y.len()));
        }
        Ok(self.c.iter().zip(y).map(|(c, y)| y * c).sum())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn series_coefficients(k_max: usize) -> Result<SeriesCoefficients> {
    if !(1..=MAX_ORDER).contains(&k_max) {
        return invalid(format!("series order {k_max} outside 1..={MAX_ORDER}"));
    }
    let mut c = vec![0.0; k_max + 1];
    for k in 1..=k_max {
        let outer = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        for (l, cl) in c.iter_mut().enumerate().take(k + 1) {
            let sign = if (k - l) % 2 == 0 { 1.0 } else { -1.0 };
            *cl += outer * binomial(k, l) * sign;
        }
    }
    Ok(SeriesCoefficients { k: k_max, c })
}

/// `Σ_{k=1}^K (−1)^{k−1} x^k / k`.
pub fn log_series(x: Complex64, k_max: usize) -> Complex64 {
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=k_max {
        power *= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += power * (sign / k as f64);
    }
    sum
}

/// `|x|^{K+1} / ((K+1)(1 − |x|)^{K+1})`, bounding `|ln(1+x) − log_series(x, K)|` for `|x| < 1`.
pub fn remainder_bound(abs_x: f64, k_max: usize) -> f64 {
    let k1 = (k_max + 1) as f64;
    abs_x.powf(k1) / (k1 * (1.0 - abs_x).powf(k1))
}
