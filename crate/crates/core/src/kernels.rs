//! Summability kernels k_n(t) = sum_{|k| <= n} theta(k/(n+1)) e^{ikt} for a
//! continuous generating function theta supported in [-1, 1], their L1 norms
//! and pointwise decay bounds, and the Fourier transform of the Riesz
//! generating functions phi_gamma(x) = max(0, 1-|x|)^gamma.

use crate::error::{Error, Result};
use crate::par;
use crate::series::CoefficientSequence;
use crate::C64;

/// Generating function of a summability kernel family.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: Family,
}

#[derive(Clone, Debug)]
enum Family {
    Fejer,
    Riesz(f64),
    /// Uniform samples of theta on [-1, 1], endpoints included.
    Tabulated(Vec<f64>),
}

/// x^gamma for x >= 0, routed through powi when gamma is a small integer so
/// that squares stay bit-identical to products.
pub(crate) fn pow_gamma(x: f64, gamma: f64) -> f64 {
    if gamma.fract() == 0.0 && gamma.abs() <= 64.0 {
        x.powi(gamma as i32)
    } else {
        x.powf(gamma)
    }
}

impl KernelSpec {
    pub fn fejer() -> Self {
        Self {
            family: Family::Fejer,
        }
    }

    pub fn riesz(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(Self {
            family: Family::Riesz(gamma),
        })
    }

    /// Samples of theta at the uniform grid -1 + 2j/(M-1), j = 0..M-1.
    /// Requires M >= 2, finite samples, and theta(-1) = theta(1) = 0.
    pub fn tabulated(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2
            || samples.iter().any(|s| !s.is_finite())
            || samples[0] != 0.0
            || *samples.last().unwrap() != 0.0
        {
            return Err(Error::InvalidTabulatedKernel);
        }
        Ok(Self {
            family: Family::Tabulated(samples),
        })
    }

    /// theta(x); zero outside [-1, 1].
    pub fn theta(&self, x: f64) -> f64 {
        match &self.family {
            Family::Fejer => (1.0 - x.abs()).max(0.0),
            Family::Riesz(g) => pow_gamma((1.0 - x.abs()).max(0.0), *g),
            Family::Tabulated(s) => {
                if !(-1.0..=1.0).contains(&x) {
                    return 0.0;
                }
                let m = s.len();
                let pos = (x + 1.0) * 0.5 * (m - 1) as f64;
                let j = (pos.floor() as usize).min(m - 2);
                let w = pos - j as f64;
                s[j] * (1.0 - w) + s[j + 1] * w
            }
        }
    }

    /// Riesz exponent when this is a Riesz family (Fejer counts as gamma = 1).
    pub fn gamma(&self) -> Option<f64> {
        match self.family {
            Family::Fejer => Some(1.0),
            Family::Riesz(g) => Some(g),
            Family::Tabulated(_) => None,
        }
    }
}

/// One-sided kernel coefficients theta(k/(n+1)) for 0 <= k <= n.
///
/// Fejer and Riesz rows are computed as ((n+1-k)/(n+1))^gamma with a single
/// division, which reproduces the displayed rational rows (1, 2/3, 1/3)
/// without the extra rounding of literally evaluating 1 - k/(n+1).
pub fn kernel_coefficients(spec: &KernelSpec, n: usize) -> CoefficientSequence {
    let npl = (n + 1) as f64;
    let vals: Vec<f64> = match &spec.family {
        Family::Fejer => (0..=n).map(|k| (npl - k as f64) / npl).collect(),
        Family::Riesz(g) => (0..=n)
            .map(|k| pow_gamma((npl - k as f64) / npl, *g))
            .collect(),
        Family::Tabulated(_) => (0..=n).map(|k| spec.theta(k as f64 / npl)).collect(),
    };
    CoefficientSequence::from_real(&vals).expect("kernel coefficients are finite")
}

/// Two-sided kernel value as a complex number. The imaginary part vanishes
/// for even theta.
fn eval_complex(spec: &KernelSpec, n: usize, t: f64) -> C64 {
    let npl = (n + 1) as f64;
    let one_sided = kernel_coefficients(spec, n);
    let (ct, st) = (t.cos(), t.sin());
    // cos(kt), sin(kt) by rotation recurrence; drift is O(n eps), far below
    // the 1e-6 quadrature targets.
    let (mut ck, mut sk) = (1.0, 0.0);
    let mut re = one_sided.coeff(0).re;
    let mut im = 0.0;
    for k in 1..=n {
        let (c_next, s_next) = (ck * ct - sk * st, sk * ct + ck * st);
        ck = c_next;
        sk = s_next;
        let tp = one_sided.coeff(k).re;
        let tm = spec.theta(-(k as f64) / npl);
        re += (tp + tm) * ck;
        im += (tp - tm) * sk;
    }
    C64::new(re, im)
}

/// k_n(t) as a real number. Errors when the imaginary residue of the
/// two-sided sum exceeds 1e-10, which flags a tabulated theta that is not
/// even.
pub fn kernel_eval(spec: &KernelSpec, n: usize, t: f64) -> Result<f64> {
    let v = eval_complex(spec, n, t);
    if v.im.abs() >= 1e-10 {
        return Err(Error::ImaginaryResidue(v.im.abs()));
    }
    Ok(v.re)
}

/// (1/2pi) integral of |k_n| over the circle, by the periodic trapezoid rule
/// with 64 (n+1) nodes. For trigonometric polynomials of degree n this
/// oversampling makes the rule accurate far beyond the 1e-6 target.
pub fn kernel_l1_norm(spec: &KernelSpec, n: usize) -> f64 {
    let m = 64 * (n + 1);
    let vals = par::map_indexed(m, |j| {
        let t = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        eval_complex(spec, n, t).norm()
    });
    vals.iter().sum::<f64>() / m as f64
}

/// Adaptive Simpson on [a, b] with absolute tolerance tol.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Fourier transform of phi_gamma at x, with the normalization
/// (1/2pi) * integral of phi_gamma(u) e^{-ixu} du. Even in x; for gamma > 0
/// this reduces to (1/pi) * integral_0^1 (1-u)^gamma cos(xu) du.
///
/// Panics if gamma <= 0.
pub fn phi_gamma_fourier(gamma: f64, x: f64) -> f64 {
    assert!(gamma > 0.0, "gamma must be positive");
    let xa = x.abs();
    let integrand = |u: f64| pow_gamma(1.0 - u, gamma) * (xa * u).cos();
    // Split at the oscillation scale so the adaptive pass starts resolved.
    let panels = (xa / std::f64::consts::PI).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    let tol = 1e-12 / panels as f64;
    for j in 0..panels {
        let a = j as f64 / panels as f64;
        let b = (j + 1) as f64 / panels as f64;
        acc += adaptive_simpson(&integrand, a, b, tol);
    }
    acc / std::f64::consts::PI
}

/// Quadrature value of the L1 norm of phi_gamma's Fourier transform:
/// 2 * integral_0^X |phi_gamma_fourier| plus a decay-envelope tail estimate
/// c X^{1-a}/(a-1) with a = min(1, gamma) + 1 and c fitted on [X, 4X].
pub fn phi_gamma_l1_norm(gamma: f64) -> f64 {
    assert!(gamma > 0.0, "gamma must be positive");
    let cutoff = 128.0;
    let panels: Vec<f64> = par::map_indexed(cutoff as usize, |j| {
        let f = |x: f64| phi_gamma_fourier(gamma, x).abs();
        adaptive_simpson(&f, j as f64, (j + 1) as f64, 1e-9 / cutoff)
    });
    let head: f64 = panels.iter().sum();
    let a = gamma.min(1.0) + 1.0;
    let grid = 64usize;
    let c = (0..=grid)
        .map(|i| {
            let x = cutoff * (4.0f64).powf(i as f64 / grid as f64);
            phi_gamma_fourier(gamma, x).abs() * x.powf(a)
        })
        .fold(0.0f64, f64::max);
    let tail = c * cutoff.powf(1.0 - a) / (a - 1.0);
    2.0 * (head + tail)
}

/// One row of a pointwise-bound report: the kernel value at (n, t) against
/// the envelope min(n+1, (n+1)^{-(a-1)} |t|^{-a}).
#[derive(Clone, Copy, Debug)]
pub struct BoundRow {
    pub n: usize,
    pub t: f64,
    pub kernel_value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Ratios |k_n(t)| / min(n+1, (n+1)^{-(a-1)} |t|^{-a}) over the grid; the
/// maximum ratio is the empirical constant of the decay bound. The caller
/// asserts that theta's Fourier transform decays at rate a (Riesz gamma
/// gives a = min(1, gamma) + 1).
pub fn pointwise_bound_report(
    spec: &KernelSpec,
    a: f64,
    n_list: &[usize],
    t_grid: &[f64],
) -> Vec<BoundRow> {
    let rows = par::map_indexed(n_list.len(), |i| {
        let n = n_list[i];
        let npl = (n + 1) as f64;
        t_grid
            .iter()
            .map(|&t| {
                let v = eval_complex(spec, n, t).norm();
                let bound = npl.min(npl.powf(-(a - 1.0)) * t.abs().powf(-a));
                BoundRow {
                    n,
                    t,
                    kernel_value: v,
                    bound,
                    ratio: v / bound,
                }
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

/// Largest ratio in a bound report.
pub fn empirical_constant(rows: &[BoundRow]) -> f64 {
    rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reals(c: &CoefficientSequence) -> Vec<f64> {
        c.coeffs().iter().map(|z| z.re).collect()
    }

    #[test]
    fn fejer_coefficient_rows() {
        let f = KernelSpec::fejer();
        assert_eq!(
            reals(&kernel_coefficients(&f, 2)),
            vec![1.0, 2.0 / 3.0, 1.0 / 3.0]
        );
        assert_eq!(reals(&kernel_coefficients(&f, 0)), vec![1.0]);
    }

    #[test]
    fn riesz_coefficient_rows() {
        let r = KernelSpec::riesz(2.0).unwrap();
        assert_eq!(reals(&kernel_coefficients(&r, 1)), vec![1.0, 0.25]);
        assert!(KernelSpec::riesz(0.0).is_err());
        assert!(KernelSpec::riesz(-1.0).is_err());
    }

    #[test]
    fn eval_known_values() {
        let f = KernelSpec::fejer();
        assert!((kernel_eval(&f, 3, 0.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(kernel_eval(&f, 1, PI).unwrap().abs() < 1e-12);
        let r = KernelSpec::riesz(2.0).unwrap();
        assert!((kernel_eval(&r, 1, 0.0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn eval_matches_coefficient_sum_at_zero() {
        for n in [0usize, 1, 5, 32, 311] {
            for spec in [KernelSpec::fejer(), KernelSpec::riesz(2.5).unwrap()] {
                let c = kernel_coefficients(&spec, n);
                let direct: f64 = c.coeff(0).re + 2.0 * (1..=n).map(|k| c.coeff(k).re).sum::<f64>();
                assert!((kernel_eval(&spec, n, 0.0).unwrap() - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tabulated_hat_matches_fejer() {
        // 129 samples include x = 0, so linear interpolation reproduces the
        // hat function exactly.
        let m = 129;
        let samples: Vec<f64> = (0..m)
            .map(|j| {
                let x = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
                1.0 - x.abs()
            })
            .collect();
        let tab = KernelSpec::tabulated(samples).unwrap();
        let fej = KernelSpec::fejer();
        assert!((kernel_l1_norm(&tab, 8) - kernel_l1_norm(&fej, 8)).abs() < 1e-8);
    }

    #[test]
    fn tabulated_validation() {
        assert!(KernelSpec::tabulated(vec![0.0]).is_err());
        assert!(KernelSpec::tabulated(vec![0.5, 1.0, 0.0]).is_err());
        assert!(KernelSpec::tabulated(vec![0.0, 1.0, f64::NAN, 0.0]).is_err());
        assert!(KernelSpec::tabulated(vec![0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn uneven_tabulated_theta_flagged() {
        let tab = KernelSpec::tabulated(vec![0.0, 0.2, 0.9, 0.1, 0.0]).unwrap();
        match kernel_eval(&tab, 3, 1.0) {
            Err(Error::ImaginaryResidue(_)) => {}
            other => panic!("expected imaginary residue error, got {other:?}"),
        }
        // the L1 norm still integrates the modulus without erroring
        assert!(kernel_l1_norm(&tab, 3) > 0.0);
    }

    #[test]
    fn fejer_l1_is_one() {
        let f = KernelSpec::fejer();
        for n in [0usize, 1, 7, 33, 100] {
            assert!((kernel_l1_norm(&f, n) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn phi_fourier_at_zero_and_closed_form() {
        assert!((phi_gamma_fourier(1.0, 0.0) - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(phi_gamma_fourier(1.0, 2.0 * PI).abs() < 1e-10);
        // (1/2pi) (sin(x/2)/(x/2))^2 for the Fejer generating function
        for &x in &[0.1f64, 0.5, 1.0, 3.0, 10.0, 41.7, 100.0] {
            let closed = (x / 2.0).sin().powi(2) / (x / 2.0).powi(2) / (2.0 * PI);
            assert!((phi_gamma_fourier(1.0, x) - closed).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn phi2_fourier_matches_closed_form() {
        // (1/pi) * 2 (x - sin x)/x^3, the transform of (1-|u|)^2 on [-1,1]
        for &x in &[0.5f64, 1.0, 2.0, 7.3, 50.0] {
            let closed = 2.0 * (x - x.sin()) / (x * x * x) / PI;
            assert!(
                (phi_gamma_fourier(2.0, x) - closed).abs() < 1e-10,
                "x = {x}"
            );
        }
    }

    #[test]
    fn pointwise_ratio_at_center() {
        // k_1(0) = 2 against the bound n+1 = 2
        let rows = pointwise_bound_report(&KernelSpec::fejer(), 2.0, &[1], &[0.0]);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].ratio - 1.0).abs() < 1e-12);
        assert!((rows[0].bound - 2.0).abs() < 1e-12);
    }
}
