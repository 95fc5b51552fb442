//! Exactness properties of the spectral probes: the forward substitution
//! really inverts its unit-triangular system, strictly triangular sections
//! are nilpotent on the nose, and rescaling the symbol moves the resolvent
//! parameter the way linearity demands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trsc_core::series::{blaschke_symbol, log_symbol};
use trsc_core::spectral::{power_norm_sequence, resolvent_residual, resolvent_section};
use trsc_core::{CoefficientSequence, FiniteSection, Structure, WeightSequence, C64};

#[test]
fn forward_substitution_inverts_to_the_identity() {
    let lambdas = [
        C64::new(0.1, 0.0),
        C64::new(0.0, 0.1),
        C64::new(-0.2, 0.0),
        C64::new(3.0, 0.0),
    ];
    for n in [64usize, 256] {
        let unit = WeightSequence::unit(n);
        let symbols = [
            log_symbol(n).unwrap(),
            blaschke_symbol(&[0.5], n - 1).unwrap(),
            blaschke_symbol(&[0.3, 0.7], n - 1).unwrap(),
        ];
        for g in &symbols {
            for &lambda in &lambdas {
                let dev = resolvent_residual(g, lambda, 2.0, n, &unit).unwrap();
                assert!(
                    dev <= 1e-10,
                    "residual {} at n = {}, lambda = {}",
                    dev,
                    n,
                    lambda
                );
            }
        }
    }
    let n = 1024;
    let g = log_symbol(n).unwrap();
    let dev = resolvent_residual(&g, C64::new(3.0, 0.0), 2.0, n, &WeightSequence::unit(n)).unwrap();
    assert!(dev <= 1e-10, "residual {} at n = 1024", dev);
}

#[test]
fn strictly_triangular_sections_power_to_exact_zero() {
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(907);
    for complex in [false, true] {
        let data: Vec<C64> = (0..n * n)
            .map(|_| {
                C64::new(
                    rng.gen_range(-2.0..2.0),
                    if complex {
                        rng.gen_range(-2.0..2.0)
                    } else {
                        0.0
                    },
                )
            })
            .collect();
        let a = FiniteSection::from_fn(n, Structure::LowerTriangular, |r, c| {
            if c < r {
                data[r * n + c]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        for p in [2.0, 3.0] {
            let roots = power_norm_sequence(&a, p, 26).unwrap();
            for root in &roots {
                if root.n >= n {
                    assert_eq!(root.root, 0.0, "power {} survived", root.n);
                } else if root.n == 1 {
                    assert!(root.root > 0.0);
                }
            }
        }
    }
}

#[test]
fn scaling_the_symbol_shifts_the_resolvent_parameter() {
    let n = 128;
    let lambda = C64::new(0.3, 0.1);
    let g = blaschke_symbol(&[0.4], n - 1).unwrap();
    let weights = [WeightSequence::unit(n), WeightSequence::dirichlet(n)];
    for c in [C64::new(2.0, 0.0), C64::new(0.5, 1.0)] {
        let scaled = CoefficientSequence::new(g.coeffs().iter().map(|v| c * v).collect()).unwrap();
        for w in &weights {
            let (left, _) = resolvent_section(&scaled, lambda, 2.0, n, w).unwrap();
            let (right, _) = resolvent_section(&g, lambda / c, 2.0, n, w).unwrap();
            for r in 0..n {
                for k in 0..=r {
                    let dev = (left.entry(r, k) - right.entry(r, k)).norm();
                    assert!(
                        dev <= 1e-10,
                        "covariance breaks at ({}, {}), c = {}: dev {}",
                        r,
                        k,
                        c,
                        dev
                    );
                }
            }
        }
    }
}
