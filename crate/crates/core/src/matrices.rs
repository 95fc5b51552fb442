//! Dense N x N finite sections of the matrices under study, their Hadamard
//! products, triangular truncation, the operator matrices built from analytic
//! symbols, and the iterated-limit diagnostic.
//!
//! Indexing convention: entry (row n, column k); lower-triangular sections
//! have k <= n. Rows list output coefficients, so the displayed matrices
//! reproduce row by row.

use crate::error::{Error, Result};
use crate::kernels::{kernel_coefficients, KernelSpec};
use crate::series::CoefficientSequence;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    LowerTriangular,
    General,
}

/// Dense complex N x N section, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSection {
    n: usize,
    data: Vec<C64>,
    structure: Structure,
    all_real: bool,
}

impl FiniteSection {
    /// Builds a section from an entry function. For LowerTriangular the
    /// function is only consulted at k <= n and the rest is exactly zero.
    pub fn from_fn(
        n: usize,
        structure: Structure,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySection);
        }
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        let mut all_real = true;
        for row in 0..n {
            let cols = match structure {
                Structure::LowerTriangular => row + 1,
                Structure::General => n,
            };
            for col in 0..cols {
                let v = f(row, col);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite(row * n + col));
                }
                all_real &= v.im == 0.0;
                data[row * n + col] = v;
            }
        }
        Ok(Self {
            n,
            data,
            structure,
            all_real,
        })
    }

    /// Wraps raw row-major data. Lower-triangular claims are verified.
    pub fn from_data(n: usize, structure: Structure, data: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySection);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(data.len(), n * n));
        }
        for (i, v) in data.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        if structure == Structure::LowerTriangular {
            for row in 0..n {
                for col in row + 1..n {
                    let v = data[row * n + col];
                    if v.re != 0.0 || v.im != 0.0 {
                        return Err(Error::NotLowerTriangular);
                    }
                }
            }
        }
        let all_real = data.iter().all(|v| v.im == 0.0);
        Ok(Self {
            n,
            data,
            structure,
            all_real,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// True when every entry has zero imaginary part; norm routines use this
    /// to run on packed real data.
    pub fn is_real(&self) -> bool {
        self.all_real
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Leading principal m x m block as its own section.
    pub fn leading_block(&self, m: usize) -> Result<FiniteSection> {
        if m == 0 || m > self.n {
            return Err(Error::DimensionMismatch(m, self.n));
        }
        FiniteSection::from_fn(m, self.structure, |r, c| self.entry(r, c))
    }

    /// Real parts packed into a plain f64 vector, row-major.
    pub fn packed_real(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.re).collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Positive weights for the weighted sequence spaces.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    w: Vec<f64>,
}

impl WeightSequence {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidWeight);
        }
        Ok(Self { w })
    }

    /// The unweighted case, omega_n = 1.
    pub fn unit(len: usize) -> Self {
        Self {
            w: vec![1.0; len.max(1)],
        }
    }

    /// Dirichlet-type weight omega_n = n + 1.
    pub fn dirichlet(len: usize) -> Self {
        Self {
            w: (0..len.max(1)).map(|n| (n + 1) as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, n: usize) -> f64 {
        self.w[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn is_unit(&self) -> bool {
        self.w.iter().all(|&x| x == 1.0)
    }

    /// max_n |omega_n/omega_{n+1} - 1|, reported as a diagnostic for how far
    /// the weight is from the regularity the theory assumes.
    pub fn ratio_diagnostic(&self) -> f64 {
        self.w
            .windows(2)
            .map(|p| (p[0] / p[1] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// The structured matrix families, with their entry formulas at (row n, col k).
#[derive(Clone, Debug)]
pub enum MatrixKind {
    /// 1/(n+1) for k <= n.
    Cesaro,
    /// 1 - k/(n+1) = (n+1-k)/(n+1) for k <= n.
    Fejer,
    /// (1 - k/(n+1))^gamma for k <= n.
    FejerPower(f64),
    /// 1 for k <= n.
    LowerOnes,
    /// 1/(n-k) off the diagonal, 0 on it.
    HilbertTransform,
    /// alpha_{k+n}, symmetric.
    Hankel(CoefficientSequence),
    /// a_{n-k} for k <= n.
    ToeplitzLower(CoefficientSequence),
    /// (k+1)/(k+n+1).
    RicardE,
    /// (k+1)/(k + lambda n + 1), Re(lambda) > 0.
    ELambda(C64),
    /// theta(k/(n+1)) for k <= n.
    KernelMultiplier(KernelSpec),
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Fejer entry (n+1-k)/(n+1): one division, so the displayed rational rows
/// (1, 2/3, 1/3) come out as the correctly rounded fractions.
fn fejer_entry(n: usize, k: usize) -> f64 {
    ((n + 1 - k) as f64) / ((n + 1) as f64)
}

pub fn build_structured(kind: &MatrixKind, n: usize) -> Result<FiniteSection> {
    match kind {
        MatrixKind::Cesaro => FiniteSection::from_fn(n, Structure::LowerTriangular, |r, _| {
            real(1.0 / (r + 1) as f64)
        }),
        MatrixKind::Fejer => FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
            real(fejer_entry(r, c))
        }),
        MatrixKind::FejerPower(g) => {
            FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
                real(crate::kernels::pow_gamma(fejer_entry(r, c), *g))
            })
        }
        MatrixKind::LowerOnes => {
            FiniteSection::from_fn(n, Structure::LowerTriangular, |_, _| real(1.0))
        }
        MatrixKind::HilbertTransform => FiniteSection::from_fn(n, Structure::General, |r, c| {
            if r == c {
                real(0.0)
            } else {
                real(1.0 / (r as f64 - c as f64))
            }
        }),
        MatrixKind::Hankel(alpha) => {
            FiniteSection::from_fn(n, Structure::General, |r, c| alpha.coeff(r + c))
        }
        MatrixKind::ToeplitzLower(a) => {
            FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| a.coeff(r - c))
        }
        MatrixKind::RicardE => FiniteSection::from_fn(n, Structure::General, |r, c| {
            real((c + 1) as f64 / (c + r + 1) as f64)
        }),
        MatrixKind::ELambda(lambda) => {
            if !(lambda.re > 0.0) {
                return Err(Error::NonPositiveRealPart(*lambda));
            }
            let lam = *lambda;
            FiniteSection::from_fn(n, Structure::General, |r, c| {
                real((c + 1) as f64) / (real((c + 1) as f64) + lam * real(r as f64))
            })
        }
        MatrixKind::KernelMultiplier(spec) => {
            let rows: Vec<CoefficientSequence> =
                (0..n).map(|r| kernel_coefficients(spec, r)).collect();
            FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| rows[r].coeff(c))
        }
    }
}

/// Entrywise product. The result is lower triangular as soon as one factor is.
pub fn hadamard(a: &FiniteSection, b: &FiniteSection) -> Result<FiniteSection> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(a.size(), b.size()));
    }
    let structure = if a.structure() == Structure::LowerTriangular
        || b.structure() == Structure::LowerTriangular
    {
        Structure::LowerTriangular
    } else {
        Structure::General
    };
    FiniteSection::from_fn(a.size(), structure, |r, c| a.entry(r, c) * b.entry(r, c))
}

/// Entrywise difference, keeping the structure tag when both agree.
pub fn subtract(a: &FiniteSection, b: &FiniteSection) -> Result<FiniteSection> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(a.size(), b.size()));
    }
    let structure = if a.structure() == b.structure() {
        a.structure()
    } else {
        Structure::General
    };
    FiniteSection::from_fn(a.size(), structure, |r, c| a.entry(r, c) - b.entry(r, c))
}

/// Row-block height for the blocked matrix products.
const MATMUL_ROW_BLOCK: usize = 32;

/// C = A B on packed row-major real data. With `lower` set, both factors are
/// taken lower triangular and only the triangle is touched, which also keeps
/// the zero block exactly zero. Row blocks are independent.
pub(crate) fn matmul_real_packed(a: &[f64], b: &[f64], n: usize, lower: bool) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    crate::par::for_each_chunk_mut(&mut out, MATMUL_ROW_BLOCK * n, |ci, chunk| {
        let r0 = ci * MATMUL_ROW_BLOCK;
        for (ri, crow) in chunk.chunks_mut(n).enumerate() {
            let r = r0 + ri;
            let arow = &a[r * n..(r + 1) * n];
            let jmax = if lower { r + 1 } else { n };
            for (j, &av) in arow[..jmax].iter().enumerate() {
                if av != 0.0 {
                    let cmax = if lower { j + 1 } else { n };
                    let brow = &b[j * n..j * n + cmax];
                    for (cv, &bv) in crow[..cmax].iter_mut().zip(brow) {
                        *cv += av * bv;
                    }
                }
            }
        }
    });
    out
}

pub(crate) fn matmul_complex_packed(a: &[C64], b: &[C64], n: usize, lower: bool) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    crate::par::for_each_chunk_mut(&mut out, MATMUL_ROW_BLOCK * n, |ci, chunk| {
        let r0 = ci * MATMUL_ROW_BLOCK;
        for (ri, crow) in chunk.chunks_mut(n).enumerate() {
            let r = r0 + ri;
            let arow = &a[r * n..(r + 1) * n];
            let jmax = if lower { r + 1 } else { n };
            for (j, &av) in arow[..jmax].iter().enumerate() {
                if av.re != 0.0 || av.im != 0.0 {
                    let cmax = if lower { j + 1 } else { n };
                    let brow = &b[j * n..j * n + cmax];
                    for (cv, &bv) in crow[..cmax].iter_mut().zip(brow) {
                        *cv += av * bv;
                    }
                }
            }
        }
    });
    out
}

/// Ordinary matrix product. Lower-triangular structure survives and its
/// upper zeros stay exact.
pub fn multiply(a: &FiniteSection, b: &FiniteSection) -> Result<FiniteSection> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(a.size(), b.size()));
    }
    let n = a.size();
    let lower =
        a.structure() == Structure::LowerTriangular && b.structure() == Structure::LowerTriangular;
    let structure = if lower {
        Structure::LowerTriangular
    } else {
        Structure::General
    };
    let data = if a.is_real() && b.is_real() {
        matmul_real_packed(&a.packed_real(), &b.packed_real(), n, lower)
            .into_iter()
            .map(|v| C64::new(v, 0.0))
            .collect()
    } else {
        matmul_complex_packed(a.data(), b.data(), n, lower)
    };
    FiniteSection::from_data(n, structure, data)
}

/// Zeroes everything strictly above the diagonal.
pub fn triangular_truncation(a: &FiniteSection) -> FiniteSection {
    FiniteSection::from_fn(a.size(), Structure::LowerTriangular, |r, c| a.entry(r, c))
        .expect("truncation of a finite section is finite")
}

/// Lower Toeplitz matrix with entry g(n-k) at (n,k): the matrix of
/// multiplication by the symbol with those Taylor coefficients.
pub fn multiplication_matrix(g: &CoefficientSequence, n: usize) -> Result<FiniteSection> {
    FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| g.coeff(r - c))
}

fn weight_ratio(w: &WeightSequence, p: f64, row: usize, col: usize) -> f64 {
    if w.is_unit() {
        1.0
    } else {
        (w.get(row) / w.get(col)).powf(1.0 / p)
    }
}

fn check_operator_inputs(n: usize, w: &WeightSequence, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySection);
    }
    if w.len() < n {
        return Err(Error::TooShort {
            need: n,
            got: w.len(),
        });
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// Matrix of the generalized Cesaro operator built from the symbol g:
/// entry (n,k) = (1 - k/(n+1)) ghat(n+1-k) (omega_n/omega_k)^{1/p} for k <= n.
///
/// The unweighted part multiplies the Fejer entry by the shifted coefficient
/// in exactly the order the Hadamard factorization produces, so the identity
/// with hadamard(fejer, multiplication_matrix(backward_shift(g))) holds bit
/// for bit. ghat(0) never enters.
pub fn cesaro_operator_matrix(
    g: &CoefficientSequence,
    n: usize,
    w: &WeightSequence,
    p: f64,
) -> Result<FiniteSection> {
    check_operator_inputs(n, w, p)?;
    FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
        let base = g.coeff(r + 1 - c) * fejer_entry(r, c);
        base * weight_ratio(w, p, r, c)
    })
}

/// Matrix of the generalized Volterra operator T_g = z C_g:
/// entry (n,k) = ((n-k)/n) ghat(n-k) (omega_n/omega_k)^{1/p} for k < n,
/// strictly lower triangular with zero row 0.
pub fn volterra_operator_matrix(
    g: &CoefficientSequence,
    n: usize,
    w: &WeightSequence,
    p: f64,
) -> Result<FiniteSection> {
    check_operator_inputs(n, w, p)?;
    FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
        if c == r {
            return real(0.0);
        }
        let m = r - c;
        let base = g.coeff(m) * (m as f64 / r as f64);
        base * weight_ratio(w, p, r, c)
    })
}

/// Result of the iterated-limit diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct IteratedLimits {
    /// Proxy for lim_k lim_n of entry (n, k): far row, fixed small column.
    pub l1: C64,
    /// Proxy for lim_n lim_k: for lower-triangular sections the in-row limit
    /// runs up to the diagonal, so the probe sits at a fixed offset below it;
    /// for general sections it sits at a far column of a fixed row.
    pub l2: C64,
    /// Both probe windows stayed within the stabilization tolerance.
    pub stabilized: bool,
}

const ITERATED_K0: usize = 4;
const ITERATED_WINDOW: usize = 16;

/// Entry-limit diagnostic for a family of sections. A Schur multiplier of
/// lower-triangular matrices must have both iterated limits equal, so a gap
/// between the two values witnesses failure.
pub fn iterated_limit_diagnostic(
    builder: impl Fn(usize) -> Result<FiniteSection>,
    n: usize,
) -> Result<IteratedLimits> {
    let need = ITERATED_K0 + ITERATED_WINDOW + 2;
    if n < need {
        return Err(Error::TooShort { need, got: n });
    }
    let a = builder(n)?;
    if a.size() != n {
        return Err(Error::DimensionMismatch(a.size(), n));
    }

    let l1 = a.entry(n - 1, ITERATED_K0);
    let l1_window: Vec<C64> = (0..ITERATED_WINDOW)
        .map(|j| a.entry(n - 1 - j, ITERATED_K0))
        .collect();

    let (l2, l2_window): (C64, Vec<C64>) = match a.structure() {
        Structure::LowerTriangular => {
            let probe = |j: usize| a.entry(n - 1 - j, n - 1 - j - ITERATED_K0);
            (probe(0), (0..ITERATED_WINDOW).map(probe).collect())
        }
        Structure::General => {
            let probe = |j: usize| a.entry(ITERATED_K0, n - 1 - j);
            (probe(0), (0..ITERATED_WINDOW).map(probe).collect())
        }
    };

    let spread = |center: C64, window: &[C64]| {
        window
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max)
    };
    let tol1 = 1e-2 * (1.0 + l1.norm());
    let tol2 = 1e-2 * (1.0 + l2.norm());
    let stabilized = spread(l1, &l1_window) <= tol1 && spread(l2, &l2_window) <= tol2;

    Ok(IteratedLimits { l1, l2, stabilized })
}
