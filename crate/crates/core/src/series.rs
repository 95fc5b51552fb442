//! Truncated Taylor coefficient sequences of analytic symbols, and the small
//! amount of formal power-series arithmetic the operator constructors need:
//! Cauchy products, exponentials, the backward shift, and generators for the
//! logarithmic and Blaschke symbols.

use crate::error::{Error, Result};
use crate::C64;

/// Coefficients of a truncated power series; index k holds the coefficient
/// of z^k. Always has length >= 1 and only finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    coeffs: Vec<C64>,
}

impl CoefficientSequence {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::TooShort { need: 1, got: 0 });
        }
        for (i, c) in coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coefficient of z^k, zero beyond the stored truncation.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Largest stored power of z.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn sum_of_squared_moduli(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Coefficients of log 1/(1-z): entry 0 is 0, entry m is 1/m for 1 <= m <= n.
pub fn log_symbol(n: usize) -> Result<CoefficientSequence> {
    if n == 0 {
        return Err(Error::DegenerateDegree);
    }
    let mut c = Vec::with_capacity(n + 1);
    c.push(C64::new(0.0, 0.0));
    for m in 1..=n {
        c.push(C64::new(1.0 / m as f64, 0.0));
    }
    CoefficientSequence::new(c)
}

/// Expansion of a single Blaschke factor (a - z)/(1 - a z) through degree n.
/// The closed form b(0) = a, b(m) = -(1 - a^2) a^(m-1) avoids the error
/// accumulation of generic long division as a approaches 1.
fn blaschke_factor(a: f64, n: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[0] = C64::new(a, 0.0);
    let mut tail = -(1.0 - a * a);
    for m in 1..=n {
        c[m] = C64::new(tail, 0.0);
        tail *= a;
    }
    c
}

/// Taylor coefficients through degree n of the Blaschke product with the
/// given zeros, each in [0, 1).
pub fn blaschke_symbol(zeros: &[f64], n: usize) -> Result<CoefficientSequence> {
    if n == 0 {
        return Err(Error::DegenerateDegree);
    }
    for &a in zeros {
        if !(0.0..1.0).contains(&a) || !a.is_finite() {
            return Err(Error::ZeroOutsideUnitInterval(a));
        }
    }
    let mut acc = CoefficientSequence::new(vec![C64::new(1.0, 0.0)])?;
    for &a in zeros {
        let factor = CoefficientSequence::new(blaschke_factor(a, n))?;
        acc = series_multiply(&acc, &factor, n)?;
    }
    // An empty zero set leaves the constant 1; pad to the requested degree.
    let mut c = acc.coeffs().to_vec();
    c.resize(n + 1, C64::new(0.0, 0.0));
    CoefficientSequence::new(c)
}

/// Cauchy product of f and g truncated at degree n; result has length n + 1.
pub fn series_multiply(
    f: &CoefficientSequence,
    g: &CoefficientSequence,
    n: usize,
) -> Result<CoefficientSequence> {
    let fc = f.coeffs();
    let gc = g.coeffs();
    let mut h = vec![C64::new(0.0, 0.0); n + 1];
    for (i, hi) in h.iter_mut().enumerate() {
        let lo = (i + 1).saturating_sub(gc.len());
        let hi_k = i.min(fc.len() - 1);
        let mut s = C64::new(0.0, 0.0);
        for k in lo..=hi_k {
            s += fc[k] * gc[i - k];
        }
        *hi = s;
    }
    CoefficientSequence::new(h)
}

/// exp(f) truncated at degree n, via the derivative recurrence
/// n h_n = sum_{k=1..n} k f_k h_{n-k} with h_0 = exp(f_0).
pub fn series_exp(f: &CoefficientSequence, n: usize) -> Result<CoefficientSequence> {
    let f0 = f.coeff(0);
    if f0.re > 709.0 {
        return Err(Error::ExpOverflow(f0.re));
    }
    let mut h = vec![C64::new(0.0, 0.0); n + 1];
    h[0] = f0.exp();
    for m in 1..=n {
        let mut s = C64::new(0.0, 0.0);
        for k in 1..=m {
            s += (k as f64) * f.coeff(k) * h[m - k];
        }
        h[m] = s / m as f64;
    }
    CoefficientSequence::new(h)
}

/// (g(z) - g(0)) / z: drops the constant term and shifts indices down.
pub fn backward_shift(f: &CoefficientSequence) -> Result<CoefficientSequence> {
    if f.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: f.len(),
        });
    }
    CoefficientSequence::new(f.coeffs()[1..].to_vec())
}
