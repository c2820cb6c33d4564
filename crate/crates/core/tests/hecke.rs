use eiskit::forms::{hecke_extend, mock_maass_form, FormSet, FormSpec};
use eiskit::hecke::{divisor_sigma, eis_hecke_eigenvalue, DivisorSumSpec};
use eiskit::parabolic::{Partition, SpectralPoint};
use eiskit::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn divisors_naive(m: u64) -> Vec<u64> {
    (1..=m).filter(|d| m.is_multiple_of(*d)).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// λ(pᵏ) = sin((k+1)θ)/sin θ when λ(p) = 2 cos θ.
fn chebyshev(lambda_p: f64, k: u32) -> f64 {
    let x = (lambda_p / 2.0).clamp(-1.0, 1.0);
    if x.abs() == 1.0 {
        return (k + 1) as f64 * x.powi(k as i32);
    }
    let theta = x.acos();
    ((k + 1) as f64 * theta).sin() / theta.sin()
}

/// Form coefficient by trial division and the Chebyshev closed form.
fn lambda_naive(form: &FormSpec, mut m: u64) -> f64 {
    if form.is_trivial() {
        return 1.0;
    }
    let mut out = 1.0;
    let mut p = 2;
    while m > 1 {
        let mut k = 0;
        while m.is_multiple_of(p) {
            m /= p;
            k += 1;
        }
        if k > 0 {
            out *= chebyshev(form.hecke()[&p].re, k);
        }
        p += 1;
    }
    out
}

/// Σ over ordered factorizations m = m₁⋯m_r of ∏ λⱼ(mⱼ) mⱼ^{sⱼ}.
fn eigenvalue_naive(forms: &[FormSpec], s: &[Complex64], m: u64) -> Complex64 {
    match forms {
        [] => c(if m == 1 { 1.0 } else { 0.0 }, 0.0),
        [first, rest @ ..] => divisors_naive(m)
            .into_iter()
            .map(|d| lambda_naive(first, d) * (s[0] * (d as f64).ln()).exp() * eigenvalue_naive(rest, &s[1..], m / d))
            .sum(),
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn sigma_examples() {
    assert_eq!(divisor_sigma(c(0.0, 0.0), 12).unwrap(), c(6.0, 0.0));
    assert_eq!(divisor_sigma(c(1.0, 0.0), 6).unwrap(), c(12.0, 0.0));
    let s = c(1.5, 2.0);
    let direct: Complex64 = divisors_naive(36).into_iter().map(|d| (s * (d as f64).ln()).exp()).sum();
    assert!(close(divisor_sigma(s, 36).unwrap(), direct, 1e-13));
    assert!(divisor_sigma(s, 0).is_err());
}

#[test]
fn extension_at_twelve() {
    let phi = mock_maass_form(2, 3).unwrap();
    let (l2, l3) = (phi.hecke()[&2], phi.hecke()[&3]);
    let expected = l3 * (l2 * l2 - 1.0);
    assert!(close(hecke_extend(&phi, 12).unwrap(), expected, 1e-14));
    assert_eq!(hecke_extend(&FormSpec::trivial(), 12).unwrap(), c(1.0, 0.0));
    assert!(hecke_extend(&phi, 0).is_err());
}

#[test]
fn extension_matches_chebyshev() {
    let phi = mock_maass_form(2, 8).unwrap();
    for m in [1u64, 2, 4, 8, 64, 81, 3125, 9973, 720, 1024] {
        let a = hecke_extend(&phi, m).unwrap();
        assert!((a.re - lambda_naive(&phi, m)).abs() < 1e-9, "m = {m}");
        assert_eq!(a.im, 0.0);
    }
}

#[test]
fn gl2_borel_is_twisted_sigma() {
    let p = Partition::borel(2).unwrap();
    let forms = FormSet::trivial(&p).unwrap();
    let s1 = c(0.3, 1.7);
    let s = SpectralPoint::solve_last(&p, &[s1]).unwrap();
    for m in 1..=60 {
        let expected = divisor_sigma(2.0 * s1, m).unwrap() * (-s1 * (m as f64).ln()).exp();
        assert!(close(eis_hecke_eigenvalue(&p, &forms, &s, m).unwrap(), expected, 1e-12), "m = {m}");
    }
}

#[test]
fn prime_values() {
    let p = Partition::borel(3).unwrap();
    let s = SpectralPoint::solve_last(&p, &[c(0.2, 1.0), c(-0.1, 0.4)]).unwrap();
    let forms = FormSet::trivial(&p).unwrap();
    for prime in [2u64, 3, 5, 7, 97] {
        let expected: Complex64 = s.values().iter().map(|sj| (sj * (prime as f64).ln()).exp()).sum();
        assert!(close(eis_hecke_eigenvalue(&p, &forms, &s, prime).unwrap(), expected, 1e-13));
    }

    let p = Partition::new(vec![2, 2]).unwrap();
    let (f1, f2) = (mock_maass_form(2, 1).unwrap(), mock_maass_form(2, 2).unwrap());
    let forms = FormSet::new(&p, vec![f1.clone(), f2.clone()]).unwrap();
    let s = SpectralPoint::solve_last(&p, &[c(0.15, 2.0)]).unwrap();
    let v = s.values();
    for prime in [2u64, 11, 101] {
        let ln = (prime as f64).ln();
        let expected = f1.hecke()[&prime] * (v[0] * ln).exp() + f2.hecke()[&prime] * (v[1] * ln).exp();
        assert!(close(eis_hecke_eigenvalue(&p, &forms, &s, prime).unwrap(), expected, 1e-13));
    }
}

#[test]
fn eigenvalue_matches_factorization_sum() {
    let cases: Vec<(Vec<usize>, u64)> = vec![(vec![1, 1, 1], 0), (vec![1, 2], 4), (vec![2, 1, 2], 9), (vec![2, 2], 5)];
    for (parts, seed) in cases {
        let p = Partition::new(parts).unwrap();
        let specs: Vec<FormSpec> = p
            .parts()
            .iter()
            .enumerate()
            .map(|(j, &d)| if d == 1 { FormSpec::trivial() } else { mock_maass_form(2, seed + j as u64).unwrap() })
            .collect();
        let forms = FormSet::new(&p, specs.clone()).unwrap();
        let head: Vec<Complex64> = (0..p.r() - 1).map(|j| c(0.1 * j as f64 - 0.2, 0.9 + j as f64)).collect();
        let s = SpectralPoint::solve_last(&p, &head).unwrap();
        let spec = DivisorSumSpec::new(p.clone(), forms.clone()).unwrap();
        for m in [1u64, 6, 12, 30, 64, 72, 210, 343, 360] {
            let expected = eigenvalue_naive(&specs, s.values(), m);
            let got = eis_hecke_eigenvalue(&p, &forms, &s, m).unwrap();
            assert!(close(got, expected, 1e-10), "{p} m = {m}: {got} vs {expected}");
            assert_eq!(spec.eigenvalue(&s, m).unwrap(), got);
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let p = Partition::borel(2).unwrap();
    let forms = FormSet::trivial(&p).unwrap();
    let s = SpectralPoint::solve_last(&p, &[c(0.1, 0.0)]).unwrap();
    assert!(eis_hecke_eigenvalue(&p, &forms, &s, 0).is_err());
    let other = Partition::borel(3).unwrap();
    let s3 = SpectralPoint::solve_last(&other, &[c(0.1, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(eis_hecke_eigenvalue(&p, &forms, &s3, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn extension_is_multiplicative(m in 1u64..=10_000, n in 1u64..=10_000, seed in 0u64..40) {
        prop_assume!(gcd(m, n) == 1);
        let phi = mock_maass_form(2, seed).unwrap();
        let lhs = hecke_extend(&phi, m * n).unwrap();
        let rhs = hecke_extend(&phi, m).unwrap() * hecke_extend(&phi, n).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn eigenvalue_is_multiplicative(
        m in 1u64..=500,
        n in 1u64..=500,
        parts in proptest::sample::select(vec![vec![1, 1], vec![1, 1, 1], vec![1, 2], vec![2, 2], vec![1, 2, 1]]),
        re in proptest::collection::vec(-0.5..0.5f64, 2),
        im in proptest::collection::vec(-8.0..8.0f64, 2),
    ) {
        prop_assume!(gcd(m, n) == 1);
        let p = Partition::new(parts).unwrap();
        let specs: Vec<FormSpec> = p.parts().iter().enumerate()
            .map(|(j, &d)| if d == 1 { FormSpec::trivial() } else { mock_maass_form(2, 20 + j as u64).unwrap() })
            .collect();
        let forms = FormSet::new(&p, specs).unwrap();
        let head: Vec<Complex64> = re.iter().zip(&im).take(p.r() - 1).map(|(&a, &b)| c(a, b)).collect();
        let s = SpectralPoint::solve_last(&p, &head).unwrap();
        let lhs = eis_hecke_eigenvalue(&p, &forms, &s, m * n).unwrap();
        let rhs = eis_hecke_eigenvalue(&p, &forms, &s, m).unwrap() * eis_hecke_eigenvalue(&p, &forms, &s, n).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }
}
