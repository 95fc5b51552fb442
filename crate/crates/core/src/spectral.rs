//! Finite-section evidence for quasi-nilpotency: decay of power-norm roots
//! ||A^n||^{1/n} and size-stability of resolvent norms.
//!
//! Finite sections of strictly triangular matrices are always nilpotent, so
//! nothing here proves a spectral statement about the infinite operator. The
//! probes measure the two finite signatures that are consistent with a
//! quasi-nilpotent limit — roots falling in n at fixed large N, resolvent
//! brackets flat in N at fixed lambda — and report them as evidence only.

use crate::error::{Error, Result};
use crate::matrices::{
    matmul_complex_packed, matmul_real_packed, volterra_operator_matrix, FiniteSection, Structure,
    WeightSequence,
};
use crate::norms::{linear_fit, lp_norm, sigma_complex_data, sigma_real_data, NormBracket};
use crate::series::CoefficientSequence;
use crate::{par, C64};
use serde::Serialize;

/// One point of the root sequence ||A^n||^{1/n}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerRoot {
    pub n: usize,
    pub root: f64,
}

/// Rescaling band: a power whose largest entry leaves it is renormalized and
/// the exponent carried separately, so chains up to n_max = 64 cannot
/// overflow or flush to zero.
const RESCALE_LOW: f64 = 1e-100;
const RESCALE_HIGH: f64 = 1e100;

fn max_abs_real(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_abs_complex(a: &[C64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

/// Norm estimate of packed data at the requested exponent: the converged
/// singular value at p = 2, the bracket lower bound otherwise.
fn packed_norm(
    real: Option<&[f64]>,
    complex: Option<&[C64]>,
    n: usize,
    p: f64,
    structure: Structure,
) -> Result<f64> {
    if p == 2.0 {
        return Ok(match (real, complex) {
            (Some(d), _) => sigma_real_data(d, n).value,
            (_, Some(d)) => sigma_complex_data(d, n).value,
            _ => unreachable!(),
        });
    }
    let data: Vec<C64> = match (real, complex) {
        (Some(d), _) => d.iter().map(|&v| C64::new(v, 0.0)).collect(),
        (_, Some(d)) => d.to_vec(),
        _ => unreachable!(),
    };
    let section = FiniteSection::from_data(n, structure, data)?;
    Ok(lp_norm(&section, p)?.lower.value)
}

/// The root sequence ||A^n||^{1/n} for n = 1..=n_max, by repeated
/// multiplication with per-step renormalization. Once a power vanishes
/// identically — as every strictly triangular section eventually does — the
/// remaining roots are exact zeros.
pub fn power_norm_sequence(a: &FiniteSection, p: f64, n_max: usize) -> Result<Vec<PowerRoot>> {
    if n_max < 1 {
        return Err(Error::TooShort { need: 1, got: 0 });
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let n = a.size();
    let lower = a.structure() == Structure::LowerTriangular;
    let mut roots = Vec::with_capacity(n_max);

    if a.is_real() {
        let base = a.packed_real();
        let mut cur = base.clone();
        let mut log_scale = 0.0f64;
        for k in 1..=n_max {
            if k > 1 {
                cur = matmul_real_packed(&cur, &base, n, lower);
            }
            let m = max_abs_real(&cur);
            if m == 0.0 {
                for j in k..=n_max {
                    roots.push(PowerRoot { n: j, root: 0.0 });
                }
                break;
            }
            if !(RESCALE_LOW..=RESCALE_HIGH).contains(&m) {
                cur.iter_mut().for_each(|v| *v /= m);
                log_scale += m.ln();
            }
            let est = packed_norm(Some(&cur), None, n, p, a.structure())?;
            let root = if est == 0.0 {
                0.0
            } else {
                ((est.ln() + log_scale) / k as f64).exp()
            };
            roots.push(PowerRoot { n: k, root });
        }
    } else {
        let base = a.data().to_vec();
        let mut cur = base.clone();
        let mut log_scale = 0.0f64;
        for k in 1..=n_max {
            if k > 1 {
                cur = matmul_complex_packed(&cur, &base, n, lower);
            }
            let m = max_abs_complex(&cur);
            if m == 0.0 {
                for j in k..=n_max {
                    roots.push(PowerRoot { n: j, root: 0.0 });
                }
                break;
            }
            if !(RESCALE_LOW..=RESCALE_HIGH).contains(&m) {
                cur.iter_mut().for_each(|v| *v /= m);
                log_scale += m.ln();
            }
            let est = packed_norm(None, Some(&cur), n, p, a.structure())?;
            let root = if est == 0.0 {
                0.0
            } else {
                ((est.ln() + log_scale) / k as f64).exp()
            };
            roots.push(PowerRoot { n: k, root });
        }
    }
    Ok(roots)
}

/// Resolvent bracket at one section size.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventRow {
    pub n: usize,
    pub bracket: NormBracket,
    /// Largest entry magnitude met during the forward substitution.
    pub max_abs: f64,
    /// Set when max_abs exceeded 1e12: the section is too ill-conditioned for
    /// the norms to be trusted at face value.
    pub warned: bool,
}

/// Conditioning threshold for resolvent substitutions.
const CONDITIONING_LIMIT: f64 = 1e12;

/// Row-major resolvent data for the scaled matrix m = T/lambda: column c of
/// (I - m)^{-1} solves x[c] = 1, x[i] = sum_{j=c..i-1} m[i][j] x[j]. Columns
/// are independent. Returns the data and the largest magnitude met.
fn resolvent_data(m: &[C64], n: usize) -> (Vec<C64>, f64) {
    let columns: Vec<Vec<C64>> = par::map_indexed(n, |c| {
        let mut col = vec![C64::new(0.0, 0.0); n];
        col[c] = C64::new(1.0, 0.0);
        for i in c + 1..n {
            let mut acc = C64::new(0.0, 0.0);
            let mrow = &m[i * n..i * n + i];
            for j in c..i {
                acc += mrow[j] * col[j];
            }
            col[i] = acc;
        }
        col
    });
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    let mut max_abs = 0.0f64;
    for (c, col) in columns.iter().enumerate() {
        for i in c..n {
            data[i * n + c] = col[i];
            max_abs = max_abs.max(col[i].norm());
        }
    }
    (data, max_abs)
}

/// The section of (I - T_g/lambda)^{-1} at size n, by forward substitution
/// column by column. The system matrix is unit lower triangular, so the
/// substitution is exact in exact arithmetic. Also returns the largest entry
/// magnitude met during the substitution.
pub fn resolvent_section(
    g: &CoefficientSequence,
    lambda: C64,
    p: f64,
    n: usize,
    w: &WeightSequence,
) -> Result<(FiniteSection, f64)> {
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let t = volterra_operator_matrix(g, n, w, p)?;
    let m: Vec<C64> = t.data().iter().map(|v| v / lambda).collect();
    let (data, max_abs) = resolvent_data(&m, n);
    let section = FiniteSection::from_data(n, Structure::LowerTriangular, data)?;
    Ok((section, max_abs))
}

/// Resolvent brackets across sizes; growth of intermediate entries is
/// monitored and flagged past 1e12.
pub fn resolvent_probe(
    g: &CoefficientSequence,
    lambda: C64,
    p: f64,
    n_list: &[usize],
    w: &WeightSequence,
) -> Result<Vec<ResolventRow>> {
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if n_list.is_empty() {
        return Err(Error::EmptySection);
    }
    if n_list.windows(2).any(|pair| pair[1] <= pair[0]) {
        return Err(Error::NonIncreasingSizes);
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (section, max_abs) = resolvent_section(g, lambda, p, n, w)?;
        let bracket = lp_norm(&section, p)?;
        rows.push(ResolventRow {
            n,
            bracket,
            max_abs,
            warned: max_abs > CONDITIONING_LIMIT,
        });
    }
    Ok(rows)
}

/// Resolvent rows for one lambda of the probe grid.
#[derive(Clone, Debug, Serialize)]
pub struct ResolventBlock {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub rows: Vec<ResolventRow>,
}

/// Aggregate evidence report combining the two probes.
#[derive(Clone, Debug, Serialize)]
pub struct QuasinilpotencyReport {
    pub p: f64,
    pub sizes: Vec<usize>,
    pub n_max: usize,
    pub weight_is_unit: bool,
    pub weight_ratio_diagnostic: f64,
    /// Root sequence at the largest requested size.
    pub roots: Vec<PowerRoot>,
    /// Slope of ln(root) against ln(n) over n >= 4 with positive roots;
    /// descriptive only.
    pub root_decay_exponent: Option<f64>,
    pub resolvents: Vec<ResolventBlock>,
    /// Largest relative increase of a bracket upper bound between consecutive
    /// sizes, over the whole lambda grid.
    pub max_resolvent_growth_per_doubling: f64,
    /// Set only when the unweighted probes both look quasi-nilpotent:
    /// falling (or identically zero) roots and resolvent growth within 5%.
    /// Weighted runs report data without a verdict.
    pub verdict: Option<String>,
}

/// Window over which the root sequence must fall for the verdict.
const VERDICT_ROOT_RANGE: (usize, usize) = (4, 32);
/// Resolvent growth per doubling tolerated by the verdict.
const VERDICT_GROWTH_LIMIT: f64 = 0.05;

fn roots_fall(roots: &[PowerRoot]) -> bool {
    let (lo, hi) = VERDICT_ROOT_RANGE;
    let window: Vec<f64> = roots
        .iter()
        .filter(|r| r.n >= lo && r.n <= hi)
        .map(|r| r.root)
        .collect();
    if window.len() < 2 {
        return false;
    }
    window
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

/// Runs both probes for the symbol g and bundles them with summary
/// statistics. The power sequence is taken at the largest size in n_list.
pub fn quasinilpotency_report(
    g: &CoefficientSequence,
    w: &WeightSequence,
    p: f64,
    n_list: &[usize],
    n_max: usize,
    lambda_grid: &[C64],
) -> Result<QuasinilpotencyReport> {
    if n_list.is_empty() {
        return Err(Error::EmptySection);
    }
    if n_list.windows(2).any(|q| q[1] <= q[0]) {
        return Err(Error::NonIncreasingSizes);
    }
    let n_top = *n_list.last().expect("nonempty");
    let t = volterra_operator_matrix(g, n_top, w, p)?;
    let roots = power_norm_sequence(&t, p, n_max)?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in &roots {
        if r.n >= 4 && r.root > 0.0 {
            xs.push((r.n as f64).ln());
            ys.push(r.root.ln());
        }
    }
    let root_decay_exponent = if xs.len() >= 2 {
        Some(linear_fit(&xs, &ys).0)
    } else {
        None
    };

    let mut resolvents = Vec::with_capacity(lambda_grid.len());
    let mut max_growth = f64::NEG_INFINITY;
    for &lam in lambda_grid {
        let rows = resolvent_probe(g, lam, p, n_list, w)?;
        for pair in rows.windows(2) {
            let growth = pair[1].bracket.upper.value / pair[0].bracket.upper.value - 1.0;
            max_growth = max_growth.max(growth);
        }
        resolvents.push(ResolventBlock {
            lambda_re: lam.re,
            lambda_im: lam.im,
            rows,
        });
    }
    if !max_growth.is_finite() {
        max_growth = 0.0;
    }

    let verdict = if w.is_unit() && roots_fall(&roots) && max_growth <= VERDICT_GROWTH_LIMIT {
        Some("consistent with quasi-nilpotent".to_string())
    } else {
        None
    };

    Ok(QuasinilpotencyReport {
        p,
        sizes: n_list.to_vec(),
        n_max,
        weight_is_unit: w.is_unit(),
        weight_ratio_diagnostic: w.ratio_diagnostic(),
        roots,
        root_decay_exponent,
        resolvents,
        max_resolvent_growth_per_doubling: max_growth,
        verdict,
    })
}

/// Applies (I - T/lambda) to a resolvent section and reports the largest
/// entrywise deviation from the identity: the direct residual of the forward
/// substitution.
pub fn resolvent_residual(
    g: &CoefficientSequence,
    lambda: C64,
    p: f64,
    n: usize,
    w: &WeightSequence,
) -> Result<f64> {
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let t = volterra_operator_matrix(g, n, w, p)?;
    let m: Vec<C64> = t.data().iter().map(|v| v / lambda).collect();
    let (r, _) = resolvent_data(&m, n);
    // system matrix I - m
    let mut sys = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        sys[i * n + i] = C64::new(1.0, 0.0);
        for j in 0..i {
            sys[i * n + j] = -m[i * n + j];
        }
    }
    let prod = matmul_complex_packed(&sys, &r, n, true);
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            dev = dev.max((prod[i * n + j] - expect).norm());
        }
    }
    Ok(dev)
}
