//! Cross-checks for the norm estimators: bracket consistency against the
//! p = 2 ground truth, growth in the section size for nonnegative families,
//! operator-norm duality, and the Schur-multiplier identity element.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trsc_core::matrices::{build_structured, hadamard, triangular_truncation};
use trsc_core::norms::{lp_norm, norm_growth_curve, schur_norm_lower, spectral_norm};
use trsc_core::{CoefficientSequence, FiniteSection, MatrixKind, Structure, C64};

fn random_triangle(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> FiniteSection {
    let data: Vec<C64> = (0..n * n)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            C64::new(re, im)
        })
        .collect();
    FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| data[r * n + c]).unwrap()
}

fn transpose(a: &FiniteSection) -> FiniteSection {
    let n = a.size();
    FiniteSection::from_fn(n, Structure::General, |r, c| a.entry(c, r)).unwrap()
}

#[test]
fn bracket_contains_the_singular_value_for_random_triangles() {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for round in 0..100 {
        let a = random_triangle(&mut rng, n, round % 2 == 1);
        let bracket = lp_norm(&a, 2.0).unwrap();
        let sigma = spectral_norm(&a);
        assert!(
            bracket.lower.value <= sigma.value && sigma.value <= bracket.upper.value,
            "round {}: [{}, {}] misses {}",
            round,
            bracket.lower.value,
            bracket.upper.value,
            sigma.value
        );
    }
}

#[test]
fn norms_grow_with_the_section_for_nonnegative_families() {
    let sizes = [32usize, 64, 128, 256];
    let cesaro = |n: usize| build_structured(&MatrixKind::Cesaro, n);
    let damped = |n: usize| {
        hadamard(
            &build_structured(&MatrixKind::Fejer, n)?,
            &build_structured(&MatrixKind::Cesaro, n)?,
        )
    };
    for p in [2.0, 3.0] {
        let curve = norm_growth_curve(cesaro, &sizes, p).unwrap();
        for pair in curve.windows(2) {
            assert!(
                pair[1].estimate.value >= pair[0].estimate.value,
                "cesaro at p = {} shrank: {:?}",
                p,
                curve
            );
        }
    }
    let curve = norm_growth_curve(damped, &sizes, 2.0).unwrap();
    for pair in curve.windows(2) {
        assert!(pair[1].estimate.value >= pair[0].estimate.value);
    }
}

#[test]
fn duality_swaps_the_exponent_within_two_percent() {
    let n = 256;
    let hilbert: Vec<f64> = (0..2 * n - 1).map(|m| 1.0 / (m as f64 + 1.0)).collect();
    let sections = [
        build_structured(&MatrixKind::Fejer, n).unwrap(),
        build_structured(
            &MatrixKind::Hankel(CoefficientSequence::from_real(&hilbert).unwrap()),
            n,
        )
        .unwrap(),
    ];
    let p = 3.0;
    let q = p / (p - 1.0);
    for a in &sections {
        let direct = lp_norm(a, p).unwrap().lower.value;
        let dual = lp_norm(&transpose(a), q).unwrap().lower.value;
        let gap = (direct - dual).abs() / direct.max(dual);
        assert!(
            gap <= 0.02,
            "duality gap {} between {} and {}",
            gap,
            direct,
            dual
        );
    }
}

#[test]
fn identity_multiplier_scores_one_at_odd_exponents() {
    let ones = build_structured(&MatrixKind::LowerOnes, 64).unwrap();
    let est = schur_norm_lower(&ones, 3.0, 6, 404).unwrap();
    assert_eq!(est.value, 1.0);
}

#[test]
fn multiplied_sections_keep_a_consistent_bracket() {
    let n = 128;
    let fejer = build_structured(&MatrixKind::Fejer, n).unwrap();
    let members = [
        triangular_truncation(&build_structured(&MatrixKind::HilbertTransform, n).unwrap()),
        build_structured(&MatrixKind::Cesaro, n).unwrap(),
    ];
    for a in &members {
        let sa = hadamard(&fejer, a).unwrap();
        for p in [2.0, 3.0] {
            let bracket = lp_norm(&sa, p).unwrap();
            assert!(
                bracket.lower.value <= bracket.upper.value,
                "inverted bracket at p = {}: [{}, {}]",
                p,
                bracket.lower.value,
                bracket.upper.value
            );
        }
        let sigma = spectral_norm(&sa);
        let bracket = lp_norm(&sa, 2.0).unwrap();
        assert!(bracket.contains(sigma.value));
    }
}
