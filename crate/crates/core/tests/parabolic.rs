use eiskit::forms::{langlands_parameter, mock_maass_form, FormSet, FormSpec};
use eiskit::parabolic::{
    expand_blocks, iwasawa, power_from_log_diagonal, power_function, rational_to_f64, recompose, rho_blocks, rho_borel,
    rho_parabolic, rho_parabolic_expanded, GroupElement, IwasawaCoords, Partition, SpectralPoint,
};
use eiskit::Complex64;
use proptest::prelude::*;

fn partition_up_to(n: usize) -> impl Strategy<Value = Partition> {
    (1..=n).prop_flat_map(|k| proptest::sample::select(Partition::compositions(k)))
}

fn multi_block(n: usize) -> impl Strategy<Value = Partition> {
    partition_up_to(n).prop_filter("two or more blocks", |p| p.r() >= 2)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -5.0..5.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn orthogonal(n: usize) -> impl Strategy<Value = GroupElement> {
    proptest::collection::vec(-1.0..1.0f64, n * n).prop_filter_map("nonsingular", move |entries| {
        let g = GroupElement::new(n, entries).ok()?;
        (g.determinant().abs() > 1e-3).then(|| iwasawa(&g).ok()).flatten().map(|d| d.orthogonal)
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

#[test]
fn identity_decomposes_trivially() {
    let d = iwasawa(&GroupElement::identity(3)).unwrap();
    assert_eq!(d.coords.y(), &[1.0, 1.0]);
    assert!(d.coords.upper().iter().all(|x| x.abs() < 1e-15));
    let d = iwasawa(&GroupElement::diagonal(&[2.0, 1.0]).unwrap()).unwrap();
    assert!((d.coords.y()[0] - 2.0).abs() < 1e-15);
}

#[test]
fn power_function_examples() {
    let (y1, y2, y3) = (1.7, 0.6, 2.3);
    let s1 = Complex64::new(0.4, 1.1);
    // P(1,2) at diag(y1y2, y1, 1): y1^{s1+s2} y2^{s1}
    let p12 = Partition::new(vec![1, 2]).unwrap();
    let s = SpectralPoint::solve_last(&p12, &[s1]).unwrap();
    let s2 = s.values()[1];
    let g = GroupElement::from_coords(&IwasawaCoords::new(3, &[0.3, -0.2, 0.8], &[y1, y2]).unwrap());
    let expected = (s1 + s2) * f64::ln(y1) + s1 * f64::ln(y2);
    assert!(close(power_function(&p12, &s, &g).unwrap(), expected.exp(), 1e-12));
    // P(2,2): y1^{2s1+s2} y2^{2s1} y3^{s1}
    let p22 = Partition::new(vec![2, 2]).unwrap();
    let s = SpectralPoint::solve_last(&p22, &[s1]).unwrap();
    let s2 = s.values()[1];
    let g = GroupElement::from_coords(&IwasawaCoords::diagonal_point(&[y1, y2, y3]).unwrap());
    let expected = (2.0 * s1 + s2) * f64::ln(y1) + 2.0 * s1 * f64::ln(y2) + s1 * f64::ln(y3);
    assert!(close(power_function(&p22, &s, &g).unwrap(), expected.exp(), 1e-12));
}

#[test]
fn langlands_parameter_examples() {
    let phi = mock_maass_form(2, 4).unwrap();
    let a = phi.alpha().to_vec();
    let p = Partition::new(vec![1, 2]).unwrap();
    let forms = FormSet::new(&p, vec![FormSpec::trivial(), phi]).unwrap();
    let s = SpectralPoint::solve_last(&p, &[Complex64::new(0.2, 0.1)]).unwrap();
    let alpha = langlands_parameter(&p, &forms, &s).unwrap();
    let v = s.values();
    assert_eq!(alpha.entries(), &[v[0], v[1] + a[0], v[1] + a[1]]);

    let borel = Partition::borel(4).unwrap();
    let s = SpectralPoint::solve_last(&borel, &[Complex64::new(0.1, 0.0), Complex64::new(0.3, 1.0), Complex64::new(-0.2, 0.5)]).unwrap();
    let alpha = langlands_parameter(&borel, &FormSet::trivial(&borel).unwrap(), &s).unwrap();
    assert_eq!(alpha.entries(), s.values());
}

#[test]
fn rho_identity_by_hand() {
    // ρ_Φ + ρ_P* = ρ_B, written out rather than through rho_identity_holds
    for n in 1..=8 {
        for p in Partition::compositions(n) {
            let sum: Vec<_> = rho_blocks(&p).iter().zip(rho_parabolic_expanded(&p)).map(|(a, b)| a + b).collect();
            assert_eq!(sum, rho_borel(n), "{p}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn langlands_parameter_sums_to_zero(p in multi_block(6), seed in 0u64..50, head in proptest::collection::vec(complex(), 5)) {
        prop_assume!(p.parts().iter().all(|&d| d <= 2));
        let specs: Vec<FormSpec> = p.parts().iter().enumerate().map(|(j, &d)| match d {
            1 => FormSpec::trivial(),
            _ => mock_maass_form(2, seed + j as u64).unwrap(),
        }).collect();
        let forms = FormSet::new(&p, specs).unwrap();
        let s = SpectralPoint::solve_last(&p, &head[..p.r() - 1]).unwrap();
        let alpha = langlands_parameter(&p, &forms, &s).unwrap();
        let total: Complex64 = alpha.entries().iter().sum();
        prop_assert!(total.norm() < 1e-12);
    }

    #[test]
    fn borel_reduction_on_diagonals(p in multi_block(6), head in proptest::collection::vec(complex(), 5), logs in proptest::collection::vec(-1.5..1.5f64, 6)) {
        let s = SpectralPoint::solve_last(&p, &head[..p.r() - 1]).unwrap();
        let n = p.n();
        let rho: Vec<f64> = rho_parabolic(&p).into_iter().map(rational_to_f64).collect();
        let shifted: Vec<Complex64> = s.values().iter().zip(&rho).map(|(x, r)| x + r).collect();
        let starred: Vec<Complex64> = expand_blocks(&p, s.values()).iter()
            .zip(rho_parabolic_expanded(&p))
            .map(|(x, r)| x + rational_to_f64(r))
            .collect();
        let borel = Partition::borel(n).unwrap();
        let lhs = power_from_log_diagonal(&p, &shifted, &logs[..n]);
        let g = GroupElement::diagonal(&logs[..n].iter().map(|l| l.exp()).collect::<Vec<_>>()).unwrap();
        let rhs = power_function(&borel, &SpectralPoint::new(&borel, starred).unwrap(), &g).unwrap();
        // the Borel side sees the unshifted ρ_P through the full power function
        let unshifted = power_function(&p, &s, &g).unwrap();
        let rho_part = power_from_log_diagonal(&p, &rho.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>(), &logs[..n]);
        prop_assert!(close(lhs, rhs, 1e-12));
        prop_assert!(close(unshifted * rho_part, lhs, 1e-12));
    }

    #[test]
    fn right_orthogonal_invariance(p in proptest::sample::select(Partition::compositions(4)).prop_filter("two or more blocks", |p| p.r() >= 2), head in proptest::collection::vec(complex(), 3), upper in proptest::collection::vec(-2.0..2.0f64, 6), ys in proptest::collection::vec(0.3..3.0f64, 3), k in orthogonal(4)) {
        let n = p.n();
        let s = SpectralPoint::solve_last(&p, &head[..p.r() - 1]).unwrap();
        let g = GroupElement::from_coords(&IwasawaCoords::new(n, &upper, &ys).unwrap());
        let a = power_function(&p, &s, &g).unwrap();
        let b = power_function(&p, &s, &g.mul(&k).unwrap()).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn center_invariance(p in multi_block(5), head in proptest::collection::vec(complex(), 4), entries in proptest::collection::vec(-2.0..2.0f64, 25), scale in 0.05..20.0f64) {
        let n = p.n();
        let s = SpectralPoint::solve_last(&p, &head[..p.r() - 1]).unwrap();
        let g = GroupElement::new(n, entries[..n * n].to_vec()).unwrap();
        prop_assume!(g.determinant().abs() > 1e-3);
        let a = power_function(&p, &s, &g).unwrap();
        let b = power_function(&p, &s, &g.scaled(scale)).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn iwasawa_recomposes(entries in proptest::collection::vec(-3.0..3.0f64, 9)) {
        let g = GroupElement::new(3, entries).unwrap();
        prop_assume!(g.determinant().abs() > 1e-2);
        let back = recompose(&iwasawa(&g).unwrap());
        let err = g.entries().iter().zip(back.entries()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12 * g.frobenius_norm().max(1.0));
    }
}

proptest! {
    #[test]
    fn points_respect_constraint(p in multi_block(8), head in proptest::collection::vec(complex(), 7)) {
        let s = SpectralPoint::solve_last(&p, &head[..p.r() - 1]).unwrap();
        let weighted: Complex64 = s.values().iter().zip(p.parts()).map(|(x, &n)| x * n as f64).sum();
        prop_assert!(weighted.norm() < 1e-12);
    }
}
