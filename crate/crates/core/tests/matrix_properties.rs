//! Structural identities of the section constructors: the Hadamard
//! factorization of the generalized Cesaro matrix, weighted conjugation,
//! Hadamard-product algebra, Hankel symmetry, and the rational identities
//! behind the E-family multipliers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trsc_core::matrices::{
    build_structured, cesaro_operator_matrix, hadamard, multiplication_matrix, multiply,
};
use trsc_core::series::{backward_shift, log_symbol};
use trsc_core::{CoefficientSequence, FiniteSection, MatrixKind, Structure, WeightSequence, C64};

fn random_symbol(rng: &mut ChaCha8Rng, len: usize) -> CoefficientSequence {
    let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CoefficientSequence::from_real(&coeffs).unwrap()
}

fn random_section(rng: &mut ChaCha8Rng, n: usize, structure: Structure) -> FiniteSection {
    let data: Vec<C64> = (0..n * n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    FiniteSection::from_fn(n, structure, |r, c| data[r * n + c]).unwrap()
}

// Entries m/64 with |m| <= 64: every double product of three such values is
// exact, so both Hadamard associations round identically.
fn random_dyadic_section(rng: &mut ChaCha8Rng, n: usize) -> FiniteSection {
    let data: Vec<C64> = (0..n * n)
        .map(|_| {
            C64::new(
                rng.gen_range(-64i32..=64) as f64 / 64.0,
                rng.gen_range(-64i32..=64) as f64 / 64.0,
            )
        })
        .collect();
    FiniteSection::from_fn(n, Structure::General, |r, c| data[r * n + c]).unwrap()
}

#[test]
fn factorization_is_bitwise_for_random_symbols() {
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fejer = build_structured(&MatrixKind::Fejer, n).unwrap();
    let unit = WeightSequence::unit(n);
    for round in 0..50 {
        let g = random_symbol(&mut rng, n + 1);
        let direct = cesaro_operator_matrix(&g, n, &unit, 2.0).unwrap();
        let shifted = backward_shift(&g).unwrap();
        let factored = hadamard(&fejer, &multiplication_matrix(&shifted, n).unwrap()).unwrap();
        assert_eq!(
            direct.data(),
            factored.data(),
            "factorization differs for symbol {}",
            round
        );
    }
}

#[test]
fn weighted_matrix_is_a_diagonal_conjugation() {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let log = log_symbol(n).unwrap();
    let rand_g = random_symbol(&mut rng, n + 1);
    let bumpy: Vec<f64> = (0..n)
        .map(|_| (rng.gen_range(-0.5f64..0.5)).exp())
        .collect();
    let weights = [
        WeightSequence::dirichlet(n),
        WeightSequence::new(bumpy).unwrap(),
    ];
    let unit = WeightSequence::unit(n);
    for g in [&log, &rand_g] {
        for w in &weights {
            for p in [2.0, 3.0] {
                let weighted = cesaro_operator_matrix(g, n, w, p).unwrap();
                let plain = cesaro_operator_matrix(g, n, &unit, p).unwrap();
                let d = FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
                    if r == c {
                        C64::new(w.get(r).powf(1.0 / p), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .unwrap();
                let d_inv = FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
                    if r == c {
                        C64::new(w.get(r).powf(-1.0 / p), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .unwrap();
                let conjugated = multiply(&multiply(&d, &plain).unwrap(), &d_inv).unwrap();
                for r in 0..n {
                    for c in 0..=r {
                        let a = weighted.entry(r, c);
                        let b = conjugated.entry(r, c);
                        assert!(
                            (a - b).norm() <= 1e-12 * (1.0 + a.norm()),
                            "conjugation mismatch at ({}, {}): {} vs {}",
                            r,
                            c,
                            a,
                            b
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn hadamard_product_commutes_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in [2usize, 5, 16, 33] {
        let a = random_section(&mut rng, n, Structure::General);
        let b = random_section(&mut rng, n, Structure::General);
        let ab = hadamard(&a, &b).unwrap();
        let ba = hadamard(&b, &a).unwrap();
        assert_eq!(ab.data(), ba.data());
    }
}

#[test]
fn hadamard_product_associates_exactly_on_dyadic_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for n in [3usize, 8, 21] {
        let a = random_dyadic_section(&mut rng, n);
        let b = random_dyadic_section(&mut rng, n);
        let c = random_dyadic_section(&mut rng, n);
        let left = hadamard(&hadamard(&a, &b).unwrap(), &c).unwrap();
        let right = hadamard(&a, &hadamard(&b, &c).unwrap()).unwrap();
        assert_eq!(left.data(), right.data());
    }
}

#[test]
fn hadamard_product_associates_to_rounding_in_general() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 24;
    let a = random_section(&mut rng, n, Structure::General);
    let b = random_section(&mut rng, n, Structure::General);
    let c = random_section(&mut rng, n, Structure::General);
    let left = hadamard(&hadamard(&a, &b).unwrap(), &c).unwrap();
    let right = hadamard(&a, &hadamard(&b, &c).unwrap()).unwrap();
    for (l, r) in left.data().iter().zip(right.data()) {
        assert!((l - r).norm() <= 1e-15 * (1.0 + l.norm()));
    }
}

#[test]
fn hankel_sections_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let n = 64;
    let hilbert: Vec<f64> = (0..2 * n - 1).map(|m| 1.0 / (m as f64 + 1.0)).collect();
    let random: Vec<C64> = (0..2 * n - 1)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let symbols = [
        CoefficientSequence::from_real(&hilbert).unwrap(),
        CoefficientSequence::new(random).unwrap(),
    ];
    for alpha in symbols {
        let h = build_structured(&MatrixKind::Hankel(alpha), n).unwrap();
        for r in 0..n {
            for c in 0..n {
                assert_eq!(h.entry(r, c), h.entry(c, r));
            }
        }
    }
}

// E_lambda splits into a lower-triangular piece X and the transpose of a
// strictly lower-triangular piece Y of the same rational shape; the assembled
// sum reproduces every entry bitwise.
#[test]
fn e_lambda_assembles_from_two_triangular_pieces() {
    let n = 96;
    for lambda in [
        C64::new(1.0, 1.0),
        C64::new(2.0, 0.0),
        C64::new(0.5, 2.0),
        C64::new(0.3, -0.7),
    ] {
        let e = build_structured(&MatrixKind::ELambda(lambda), n).unwrap();
        let x_piece = |row: usize, col: usize| {
            C64::new((col + 1) as f64, 0.0)
                / (C64::new((col + 1) as f64, 0.0) + lambda * C64::new(row as f64, 0.0))
        };
        // same rational shape with the roles of the indices exchanged
        let y_piece = |row: usize, col: usize| {
            C64::new((row + 1) as f64, 0.0)
                / (C64::new((row + 1) as f64, 0.0) + lambda * C64::new(col as f64, 0.0))
        };
        let x = FiniteSection::from_fn(n, Structure::General, |r, c| {
            if c <= r {
                x_piece(r, c)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let y = FiniteSection::from_fn(n, Structure::General, |r, c| {
            if c < r {
                y_piece(r, c)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        for r in 0..n {
            for c in 0..n {
                let assembled = x.entry(r, c) + y.entry(c, r);
                assert_eq!(
                    e.entry(r, c),
                    assembled,
                    "assembly differs at ({}, {}) for lambda = {}",
                    r,
                    c,
                    lambda
                );
            }
        }
    }
}

// The telescoping identity that drives the E_lambda Schur bound:
// (k+1)/(k+ln+1) - k/(k+ln+l)
//   = ((k+1)/(k+ln+l)) ((l-1)/(k+ln+1)) + (1/l) (1/(k/l+n+1)).
#[test]
fn e_lambda_difference_identity_holds_entrywise() {
    let n = 256;
    let one = C64::new(1.0, 0.0);
    for lambda in [C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.5, 2.0)] {
        let mut max_dev = 0.0f64;
        for row in 0..n {
            for col in 0..n {
                let nn = C64::new(row as f64, 0.0);
                let kk = C64::new(col as f64, 0.0);
                let lhs = (kk + one) / (kk + lambda * nn + one) - kk / (kk + lambda * nn + lambda);
                let rhs = ((kk + one) / (kk + lambda * nn + lambda))
                    * ((lambda - one) / (kk + lambda * nn + one))
                    + (one / lambda) * (one / (kk / lambda + nn + one));
                max_dev = max_dev.max((lhs - rhs).norm());
            }
        }
        assert!(
            max_dev <= 1e-12,
            "difference identity deviates by {} at lambda = {}",
            max_dev,
            lambda
        );
    }
}
