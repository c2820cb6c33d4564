//! Fast consistency checks over the whole library.

use std::f64::consts::PI;

use eiskit::eisenstein::{check_functional_equation, FEMode, FESample};
use eiskit::forms::{mock_maass_form, FormSet, FormSpec};
use eiskit::hecke::{check_permutation_covariance, BlockStructure};
use eiskit::par::Exec;
use eiskit::parabolic::{
    rho_identity_holds, rho_parabolic, GroupElement, IwasawaCoords, Partition, Permutation, Rational, SpectralPoint,
};
use eiskit::specfun::{bessel_k, zeta_completed};
use eiskit::uniqueness::{decide_affine_symmetry, random_falsification_with, AffineMap, Constraint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::commands::finish;
use crate::report::{fmt_f64, Table, Text};
use crate::{Failure, Outcome};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize, Deserialize)]
pub struct SelftestResult {
    pub checks: Vec<SelfCheck>,
}

impl Table for SelftestResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["name", "passed", "detail"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.checks.iter().map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]).collect()
    }
}

impl Text for SelftestResult {
    fn text(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }
}

/// Low-discrepancy point of [0, 1).
fn golden(k: usize) -> f64 {
    (0.5 + k as f64 * GOLDEN).fract()
}

fn check(name: &str, outcome: eiskit::Result<(bool, String)>) -> SelfCheck {
    match outcome {
        Ok((passed, detail)) => SelfCheck { name: name.into(), passed, detail },
        Err(e) => SelfCheck { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

fn rho_tables() -> eiskit::Result<(bool, String)> {
    let q = |n: i64, d: i64| Rational::new(n, d);
    let table = [
        (vec![1, 1], vec![q(1, 2), q(-1, 2)]),
        (vec![1, 1, 1], vec![q(1, 1), q(0, 1), q(-1, 1)]),
        (vec![1, 2], vec![q(1, 1), q(-1, 2)]),
        (vec![2, 1], vec![q(1, 2), q(-1, 1)]),
        (vec![2, 2], vec![q(1, 1), q(-1, 1)]),
    ];
    let mut bad = Vec::new();
    for (parts, expected) in table {
        let p = Partition::new(parts)?;
        if rho_parabolic(&p) != expected {
            bad.push(p.to_string());
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "5 partitions".into() } else { format!("mismatch at {}", bad.join(" ")) }))
}

fn rho_identity() -> eiskit::Result<(bool, String)> {
    let all: Vec<Partition> = (1..=8).flat_map(Partition::compositions).collect();
    let failures = all.iter().filter(|p| !rho_identity_holds(p)).count();
    Ok((failures == 0, format!("{} partitions, {failures} failures", all.len())))
}

fn zeta_symmetry() -> eiskit::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let s = Complex64::new(0.1 + 0.8 * golden(k), 60.0 * golden(k + 1000) - 30.0);
        let a = zeta_completed(s)?;
        let b = zeta_completed(1.0 - s)?;
        worst = worst.max((a - b).norm());
    }
    Ok((worst <= 1e-10, format!("max |Λ(s) - Λ(1-s)| = {}", fmt_f64(worst))))
}

fn bessel_half() -> eiskit::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for x in [0.1, 1.0, 10.0] {
        let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
        let k = bessel_k(Complex64::new(0.5, 0.0), x)?;
        worst = worst.max((k.re - exact).abs().max(k.im.abs()) / exact);
    }
    Ok((worst <= 1e-12, format!("max relative error {}", fmt_f64(worst))))
}

fn gl2_symmetry() -> eiskit::Result<(bool, String)> {
    let p = Partition::borel(2)?;
    let forms = FormSet::trivial(&p)?;
    let swap = Permutation::from_one_based(&[2, 1])?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let s1 = Complex64::new(0.8 * golden(k) - 0.4, 20.0 * golden(k + 50) - 10.0);
        let y = 0.3 + 2.0 * golden(k + 100);
        let s = SpectralPoint::solve_last(&p, &[s1])?;
        let g = GroupElement::from_coords(&IwasawaCoords::diagonal_point(&[y])?);
        let samples = [FESample { g, m: 1 + (k as u64 % 4) }];
        let report = check_functional_equation(&p, &forms, &s, &swap, &samples, FEMode::Numeric, 1)?;
        worst = report.checks.iter().map(|c| c.rel_residual).fold(worst, f64::max);
    }
    Ok((worst <= 1e-8, format!("20 points, max relative residual {}", fmt_f64(worst))))
}

fn forms_for(p: &Partition, seed: u64) -> eiskit::Result<FormSet> {
    let specs = p
        .parts()
        .iter()
        .enumerate()
        .map(|(j, &d)| if d == 1 { Ok(FormSpec::trivial()) } else { mock_maass_form(d, seed + j as u64) })
        .collect::<eiskit::Result<Vec<_>>>()?;
    FormSet::new(p, specs)
}

fn covariance() -> eiskit::Result<(bool, String)> {
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for p in (2..=4).flat_map(Partition::compositions).filter(|p| p.parts().iter().all(|&d| d <= 2)) {
        let forms = forms_for(&p, 11)?;
        let head: Vec<Complex64> =
            (0..p.r() - 1).map(|j| Complex64::new(0.3 * golden(j) - 0.15, golden(j + 7))).collect();
        let s = SpectralPoint::solve_last(&p, &head)?;
        for sigma in Permutation::all(p.r()) {
            for m in [1, 12, 360, 997] {
                let c = check_permutation_covariance(&p, &forms, &s, m, &sigma)?;
                worst = worst.max(c.residual);
                count += 1;
            }
        }
    }
    Ok((worst <= 1e-12, format!("{count} cases, max residual {}", fmt_f64(worst))))
}

fn symbolic_fe() -> eiskit::Result<(bool, String)> {
    let mut cases: Vec<(Partition, FormSet, Permutation)> = Vec::new();
    let borel = Partition::borel(3)?;
    for sigma in Permutation::all(3) {
        cases.push((borel.clone(), FormSet::trivial(&borel)?, sigma));
    }
    let p12 = Partition::new(vec![1, 2])?;
    cases.push((p12.clone(), forms_for(&p12, 3)?, Permutation::from_one_based(&[2, 1])?));
    let p22 = Partition::new(vec![2, 2])?;
    cases.push((p22.clone(), forms_for(&p22, 1)?, Permutation::from_one_based(&[2, 1])?));
    let mut failed = 0;
    for (p, forms, sigma) in &cases {
        let head: Vec<Complex64> = (0..p.r() - 1).map(|j| Complex64::new(0.21 + 0.1 * j as f64, 0.37 * (j + 1) as f64)).collect();
        let s = SpectralPoint::solve_last(p, &head)?;
        if !check_functional_equation(p, forms, &s, sigma, &[], FEMode::Symbolic, 1)?.passed {
            failed += 1;
        }
    }
    Ok((failed == 0, format!("{} cases, {failed} failures", cases.len())))
}

fn uniqueness(exec: Exec) -> eiskit::Result<(bool, String)> {
    let p = Partition::borel(3)?;
    let blocks = BlockStructure::from_forms(&FormSet::trivial(&p)?)?;
    let weights = Constraint::Weighted.weights(&p);
    let mut accepted = 0;
    for (k, sigma) in Permutation::all(3).iter().enumerate() {
        let t: Vec<Rational> = (0..3).map(|i| Rational::new((k + i) as i64 % 5 - 2, 3)).collect();
        let mu = AffineMap::permutation(sigma).plus_kernel(&weights, &t)?;
        if decide_affine_symmetry(&p, &blocks, &mu)?.permutation() == Some(sigma) {
            accepted += 1;
        }
    }
    let report = random_falsification_with(&p, &blocks, 100, 7, Constraint::Weighted, exec)?;
    let passed = accepted == 6 && report.passed;
    Ok((passed, format!("{accepted}/6 permutations accepted, {}/100 random maps rejected", report.rejected)))
}

pub fn run(exec: Exec) -> Result<Outcome, Failure> {
    let checks = vec![
        check("rho tables", rho_tables()),
        check("rho identity n <= 8", rho_identity()),
        check("completed zeta symmetry", zeta_symmetry()),
        check("K-Bessel order 1/2", bessel_half()),
        check("GL(2) coefficient symmetry", gl2_symmetry()),
        check("divisor-sum covariance", covariance()),
        check("symbolic functional equations", symbolic_fe()),
        check("affine symmetries", uniqueness(exec)),
    ];
    let passed = checks.iter().all(|c| c.passed);
    finish("selftest", passed, SelftestResult { checks })
}
