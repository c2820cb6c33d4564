use std::collections::HashSet;

use eiskit::eisenstein::{
    closed_form_fourier_gl2, coset_counts, enumerate_cosets, eval_eisenstein, eval_eisenstein_with, extract_coefficient,
    fw_formula, scattering_gl2, CosetRep, ExtractOptions, FWRequest, Truncation,
};
use eiskit::par::Exec;
use eiskit::parabolic::{GroupElement, IwasawaCoords, Partition, SpectralPoint};
use eiskit::specfun::zeta_completed;
use eiskit::{Complex64, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn point(n: usize, upper: &[f64], y: &[f64]) -> GroupElement {
    GroupElement::from_coords(&IwasawaCoords::new(n, upper, y).unwrap())
}

fn gl2_point(s1: f64) -> SpectralPoint {
    SpectralPoint::solve_last(&Partition::borel(2).unwrap(), &[c(s1, 0.0)]).unwrap()
}

/// Product of random elementary matrices in SL(n, Z).
fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut m: Vec<i64> = (0..n * n).map(|k| i64::from(k % (n + 1) == 0)).collect();
    for _ in 0..6 {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i == j {
            continue;
        }
        let k: i64 = rng.random_range(-2..=2);
        // row_i += k row_j
        for col in 0..n {
            m[i * n + col] += k * m[j * n + col];
        }
    }
    m
}

fn as_group(n: usize, m: &[i64]) -> GroupElement {
    GroupElement::new(n, m.iter().map(|&x| x as f64).collect()).unwrap()
}

fn mat_mul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    (0..n * n).map(|k| (0..n).map(|t| a[(k / n) * n + t] * b[t * n + k % n]).sum()).collect()
}

#[test]
fn gl2_cosets_are_primitive_pairs_up_to_sign() {
    for h in [1i64, 2, 5, 13, 30] {
        let mut primitive = 0;
        for a in -h..=h {
            for b in -h..=h {
                if gcd(a, b) == 1 {
                    primitive += 1;
                }
            }
        }
        let total: usize = coset_counts(2, h as u32).unwrap().values().sum();
        assert_eq!(2 * total, primitive, "height {h}");
    }
}

#[test]
fn gl3_cosets_match_brute_force() {
    let h = 3i64;
    let range: Vec<[i64; 3]> = (-h..=h)
        .flat_map(|a| (-h..=h).flat_map(move |b| (-h..=h).map(move |c| [a, b, c])))
        .filter(|v| gcd(gcd(v[0], v[1]), v[2]) == 1)
        .collect();
    let mut pairs = 0;
    for v in &range {
        for a in &range {
            if v[0] * a[0] + v[1] * a[1] + v[2] * a[2] == 0 {
                pairs += 1;
            }
        }
    }
    let reps: Vec<CosetRep> = enumerate_cosets(3, h as u32).unwrap().collect();
    // (±v, ±A) give the same coset
    assert_eq!(4 * reps.len(), pairs);
    let distinct: HashSet<_> = reps.iter().cloned().collect();
    assert_eq!(distinct.len(), reps.len());
    for rep in &reps {
        assert_eq!(rep.canonical(), *rep);
        assert!(rep.height() <= h as u64);
        assert!(CosetRep::from_matrix(3, rep.matrix().to_vec()).is_ok());
    }
}

#[test]
fn canonical_form_ignores_upper_triangular_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for rep in enumerate_cosets(3, 2).unwrap().take(200) {
        let (a, b, e): (i64, i64, i64) = (rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3));
        let signs = [[1, 1, 1], [-1, -1, 1], [1, -1, -1], [-1, 1, -1]][rng.random_range(0..4)];
        let upper = [signs[0], a, b, 0, signs[1], e, 0, 0, signs[2]];
        let moved = CosetRep::from_matrix(3, mat_mul(3, &upper, rep.matrix())).unwrap();
        assert_eq!(moved.canonical(), rep);
    }
    for rep in enumerate_cosets(2, 4).unwrap() {
        let k: i64 = rng.random_range(-5..=5);
        let upper = [-1, k, 0, -1];
        let moved = CosetRep::from_matrix(2, mat_mul(2, &upper, rep.matrix())).unwrap();
        assert_eq!(moved.canonical(), rep);
    }
    assert!(CosetRep::from_matrix(2, vec![2, 0, 0, 1]).is_err());
}

// Reference values from the Fourier expansion summed with mpmath at 40 digits.
#[test]
fn gl2_series_reference_values() {
    let s = gl2_point(1.5);
    for (x, y, expected) in [(0.0, 1.0, 2.784_201_545_330_791), (0.3, 0.8, 2.774_817_043_695_654)] {
        let g = point(2, &[x], &[y]);
        let smooth = eval_eisenstein(2, &g, &s, Truncation::Smooth { radius: 500.0 }).unwrap();
        assert!(rel(smooth.value, c(expected, 0.0)) < 1e-4, "smooth at ({x}, {y}): {}", smooth.value);
        let height = eval_eisenstein(2, &g, &s, Truncation::Height(200)).unwrap();
        assert!(rel(height.value, c(expected, 0.0)) < 1e-3, "height at ({x}, {y}): {}", height.value);
        assert!(height.tail < 1e-2);
    }
}

#[test]
fn smooth_truncation_is_automorphic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases = [(2usize, vec![c(1.2, 0.7)], 80.0), (3, vec![c(1.6, 0.2), c(0.1, -0.4)], 6.0)];
    for (n, head, radius) in cases {
        let s = SpectralPoint::solve_last(&Partition::borel(n).unwrap(), &head).unwrap();
        let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.8..1.3)).collect();
        let g = point(n, &upper, &y);
        let base = eval_eisenstein(n, &g, &s, Truncation::Smooth { radius }).unwrap().value;
        for _ in 0..3 {
            let gamma = as_group(n, &random_unimodular(n, &mut rng));
            let moved = eval_eisenstein(n, &gamma.mul(&g).unwrap(), &s, Truncation::Smooth { radius }).unwrap().value;
            assert!(rel(moved, base) < 1e-10, "n = {n}: {moved} vs {base}");
        }
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let s = SpectralPoint::solve_last(&Partition::borel(3).unwrap(), &[c(1.5, 0.0), c(0.0, 0.0)]).unwrap();
    let g = point(3, &[0.1, 0.2, -0.3], &[1.1, 0.9]);
    let a = eval_eisenstein_with(3, &g, &s, Truncation::Height(6), Exec::Sequential).unwrap();
    let b = eval_eisenstein_with(3, &g, &s, Truncation::Height(6), Exec::Parallel).unwrap();
    assert_eq!(a.terms, b.terms);
    assert!(rel(a.value, b.value) < 1e-13);
}

#[test]
fn gl2_extraction_converges_in_nodes() {
    let s = gl2_point(1.5);
    let g = point(2, &[0.0], &[0.9]);
    let exact = closed_form_fourier_gl2(1, c(1.5, 0.0), 0.9).unwrap();
    let errors: Vec<f64> = [2, 4, 8]
        .into_iter()
        .map(|nodes| {
            let options = ExtractOptions { truncation: Truncation::Smooth { radius: 300.0 }, nodes, exec: Exec::default() };
            rel(extract_coefficient(&s, &g, (1, 0), &options).unwrap().raw, exact)
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    // 8 nodes already sit at the truncation floor of radius 300
    assert!(errors[2] < 1e-6, "{errors:?}");
}

#[test]
fn gl2_formula_is_completed_closed_form() {
    for (s1, m, y) in [(c(0.8, 0.0), 1u64, 1.0), (c(0.3, 2.0), 6, 0.4), (c(-0.2, 5.0), 12, 0.15)] {
        let s = SpectralPoint::solve_last(&Partition::borel(2).unwrap(), &[s1]).unwrap();
        let request = FWRequest::borel(m, s, point(2, &[0.0], &[y])).unwrap();
        let expected = zeta_completed(2.0 * s1 + 1.0).unwrap() * closed_form_fourier_gl2(m as i64, s1, y).unwrap();
        assert!(rel(fw_formula(&request, 100).unwrap(), expected) < 1e-12);
    }
}

#[test]
fn invalid_requests() {
    let s = gl2_point(1.5);
    let g = point(2, &[0.0], &[1.0]);
    assert!(matches!(eval_eisenstein(2, &g, &gl2_point(0.2), Truncation::Height(3)), Err(Error::Domain(_))));
    assert!(matches!(eval_eisenstein(2, &g, &s, Truncation::Height(0)), Err(Error::Domain(_))));
    assert!(matches!(eval_eisenstein(2, &g, &s, Truncation::Smooth { radius: 0.5 }), Err(Error::Domain(_))));
    assert!(matches!(eval_eisenstein(2, &g, &s, Truncation::Cells { radius: 5.0, modulus: 5.0 }), Err(Error::Domain(_))));
    assert!(eval_eisenstein(3, &g, &s, Truncation::Height(3)).is_err());
    let odd = ExtractOptions { nodes: 7, ..ExtractOptions::gl2() };
    assert!(extract_coefficient(&s, &g, (1, 0), &odd).is_err());
    assert!(FWRequest::borel(0, s, g).is_err());
    assert!(enumerate_cosets(4, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scattering_is_unitary_pairing(re in -2.0..2.0f64, im in 0.5..30.0f64) {
        let s = c(re, im);
        let product = scattering_gl2(s).unwrap() * scattering_gl2(1.0 - s).unwrap();
        prop_assert!((product - 1.0).norm() < 1e-10);
    }

    #[test]
    fn completed_coefficients_are_even_in_s(re in -0.45..0.45f64, im in -15.0..15.0f64, m in 0i64..12, y in 0.2..3.0f64) {
        let s1 = c(re, im);
        prop_assume!(s1.norm() > 1e-3);
        let a = zeta_completed(2.0 * s1 + 1.0).unwrap() * closed_form_fourier_gl2(m, s1, y).unwrap();
        let b = zeta_completed(1.0 - 2.0 * s1).unwrap() * closed_form_fourier_gl2(m, -s1, y).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-12));
    }
}
