//! Subcommand bodies: compute a result, then render it.

use std::path::Path;

use eiskit::eisenstein::{
    check_functional_equation, eval_eisenstein_with, extract_fourier_coefficient, fw_formula, ExtractOptions, Extraction,
    FEMode, FEReport, FESample, FWRequest, SeriesValue, Truncation, DEFAULT_DIRICHLET_TERMS,
};
use eiskit::forms::{langlands_parameter, FormSet};
use eiskit::hecke::{eis_hecke_eigenvalue, BlockStructure};
use eiskit::par::Exec;
use eiskit::parabolic::{
    rho_borel, rho_identity_holds, rho_parabolic, GroupElement, IwasawaCoords, Partition, Permutation, Rational,
    SpectralPoint,
};
use eiskit::uniqueness::{
    decide_affine_symmetry_with, enumerate_permutation_symmetries, numeric_divisor_check, random_falsification_with,
    AffineMap, Constraint, FalsificationReport, NumericCheck, UniquenessVerdict, FALSIFY_THRESHOLD,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::report::{fmt_complex, fmt_f64, fmt_list, to_csv, to_json, Report, Table, Text};
use crate::{parse, Failure, Outcome};

/// Agreement required of numeric cross-checks on accepted maps.
const ACCEPT_TOL: f64 = 1e-9;

pub fn finish<T>(command: &str, passed: bool, result: T) -> Result<Outcome, Failure>
where
    T: Serialize + Table + Text,
{
    let text = result.text();
    let csv = to_csv(&result).map_err(Failure::usage)?;
    let json = to_json(&Report::new(command, passed, result)).map_err(Failure::usage)?;
    Ok(Outcome { passed, text, json, csv })
}

fn one_based(sigma: &Permutation) -> Vec<usize> {
    sigma.images().iter().map(|i| i + 1).collect()
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

fn group_element(n: usize, x: Option<&[f64]>, y: Option<&[f64]>) -> Result<GroupElement, Failure> {
    let upper = x.map_or_else(|| vec![0.0; n * (n - 1) / 2], <[f64]>::to_vec);
    let y = y.map_or_else(|| vec![1.0; n - 1], <[f64]>::to_vec);
    let coords = IwasawaCoords::new(n, &upper, &y).map_err(Failure::usage)?;
    Ok(GroupElement::from_coords(&coords))
}

fn borel_point(partition: &Partition, s: &[Complex64]) -> Result<SpectralPoint, Failure> {
    if !partition.is_borel() {
        return Err(Failure::Usage("numeric series need a Borel partition (1,1 or 1,1,1)".into()));
    }
    parse::spectral_point(partition, s)
}

// rho

#[derive(Serialize, Deserialize)]
pub struct RhoResult {
    pub partition: Vec<usize>,
    pub rho: Vec<String>,
    pub rho_borel: Vec<String>,
    pub identity_holds: bool,
}

impl Table for RhoResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["quantity", "index", "value"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let tag = |name: &str, v: &[String]| -> Vec<Vec<String>> {
            v.iter().enumerate().map(|(i, q)| vec![name.to_string(), (i + 1).to_string(), q.clone()]).collect()
        };
        let mut rows = tag("rho", &self.rho);
        rows.extend(tag("rho_borel", &self.rho_borel));
        rows
    }
}

impl Text for RhoResult {
    fn text(&self) -> String {
        format!("{}\n", fmt_list(&self.rho, |q| q.clone()))
    }
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

pub fn rho(partition: &Partition) -> Result<Outcome, Failure> {
    let result = RhoResult {
        partition: partition.parts().to_vec(),
        rho: rationals(&rho_parabolic(partition)),
        rho_borel: rationals(&rho_borel(partition.n())),
        identity_holds: rho_identity_holds(partition),
    };
    let passed = result.identity_holds;
    finish("rho", passed, result)
}

// params

#[derive(Serialize, Deserialize)]
pub struct ParamsResult {
    pub partition: Vec<usize>,
    pub forms: Vec<String>,
    pub s: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
}

impl Table for ParamsResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["index", "alpha_re", "alpha_im"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let [re, im] = complex_cells(*a);
                vec![(i + 1).to_string(), re, im]
            })
            .collect()
    }
}

impl Text for ParamsResult {
    fn text(&self) -> String {
        format!("{}\n", fmt_list(&self.alpha, |z| fmt_complex(*z)))
    }
}

fn form_names(forms: &FormSet) -> Vec<String> {
    forms.forms().iter().map(|f| f.name().to_string()).collect()
}

pub fn params(partition: &Partition, forms: Option<&str>, s: &[Complex64]) -> Result<Outcome, Failure> {
    let forms = parse::forms(partition, forms)?;
    let s = parse::spectral_point(partition, s)?;
    let alpha = langlands_parameter(partition, &forms, &s).map_err(Failure::usage)?;
    let result = ParamsResult {
        partition: partition.parts().to_vec(),
        forms: form_names(&forms),
        s: s.values().to_vec(),
        alpha: alpha.entries().to_vec(),
    };
    finish("params", true, result)
}

// divisor-sum

#[derive(Serialize, Deserialize)]
pub struct Eigenvalue {
    pub m: u64,
    pub value: Complex64,
}

#[derive(Serialize, Deserialize)]
pub struct DivisorSumResult {
    pub partition: Vec<usize>,
    pub forms: Vec<String>,
    pub s: Vec<Complex64>,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl Table for DivisorSumResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["m", "lambda_re", "lambda_im"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.eigenvalues
            .iter()
            .map(|e| {
                let [re, im] = complex_cells(e.value);
                vec![e.m.to_string(), re, im]
            })
            .collect()
    }
}

impl Text for DivisorSumResult {
    fn text(&self) -> String {
        match self.eigenvalues.as_slice() {
            [single] => format!("{}\n", fmt_complex(single.value)),
            many => many.iter().map(|e| format!("{}: {}\n", e.m, fmt_complex(e.value))).collect(),
        }
    }
}

pub fn divisor_sum(partition: &Partition, forms: Option<&str>, s: &[Complex64], m: &[u64]) -> Result<Outcome, Failure> {
    let forms = parse::forms(partition, forms)?;
    let s = parse::spectral_point(partition, s)?;
    if m.contains(&0) {
        return Err(Failure::Usage("--m values must be positive".into()));
    }
    let eigenvalues = m
        .iter()
        .map(|&m| eis_hecke_eigenvalue(partition, &forms, &s, m).map(|value| Eigenvalue { m, value }))
        .collect::<eiskit::Result<Vec<_>>>()
        .map_err(Failure::usage)?;
    let result = DivisorSumResult {
        partition: partition.parts().to_vec(),
        forms: form_names(&forms),
        s: s.values().to_vec(),
        eigenvalues,
    };
    finish("divisor-sum", true, result)
}

// check-fe

impl Table for FEReport {
    fn columns(&self) -> Vec<&'static str> {
        vec!["label", "left", "right", "abs_residual", "rel_residual", "passed"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.label.clone(),
                    c.left.clone(),
                    c.right.clone(),
                    fmt_f64(c.abs_residual),
                    fmt_f64(c.rel_residual),
                    c.passed.to_string(),
                ]
            })
            .collect()
    }
}

impl Text for FEReport {
    fn text(&self) -> String {
        let mut out: String = self
            .checks
            .iter()
            .map(|c| match self.mode {
                FEMode::Symbolic => format!("{}: {}\n", c.label, verdict(c.passed)),
                FEMode::Numeric => format!("{}: rel {} {}\n", c.label, fmt_f64(c.rel_residual), verdict(c.passed)),
            })
            .collect();
        out.push_str(if self.passed { "pass\n" } else { "fail\n" });
        out
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "ok"
    } else {
        "FAILED"
    }
}

pub struct FeInput<'a> {
    pub partition: &'a Partition,
    pub forms: Option<&'a str>,
    pub s: Option<&'a [Complex64]>,
    pub sigma: &'a Permutation,
    pub mode: FEMode,
    pub m: &'a [u64],
    pub x: Option<&'a [f64]>,
    pub y: Option<&'a [f64]>,
    pub terms: usize,
}

/// Head of a point with distinct, non-real entries.
fn generic_head(r: usize) -> Vec<Complex64> {
    (0..r.saturating_sub(1)).map(|j| Complex64::new(0.2 + 0.1 * j as f64, 0.3 + 0.07 * (j * j) as f64)).collect()
}

pub fn check_fe(input: FeInput<'_>) -> Result<Outcome, Failure> {
    let partition = input.partition;
    let forms = parse::forms(partition, input.forms)?;
    let s = match input.s {
        Some(values) => parse::spectral_point(partition, values)?,
        None => parse::spectral_point(partition, &generic_head(partition.r()))?,
    };
    if input.sigma.len() != partition.r() {
        return Err(Failure::Usage(format!("--sigma needs {} entries, got {}", partition.r(), input.sigma.len())));
    }
    if input.terms == 0 {
        return Err(Failure::Usage("--terms must be positive".into()));
    }
    let samples = match input.mode {
        FEMode::Symbolic => Vec::new(),
        FEMode::Numeric => {
            let g = group_element(partition.n(), input.x, input.y)?;
            input.m.iter().map(|&m| FESample { g: g.clone(), m }).collect()
        }
    };
    let report = check_functional_equation(partition, &forms, &s, input.sigma, &samples, input.mode, input.terms)
        .map_err(Failure::usage)?;
    let passed = report.passed;
    finish("check-fe", passed, report)
}

// extract

#[derive(Serialize, Deserialize)]
pub struct ExtractResult {
    pub partition: Vec<usize>,
    pub s: Vec<Complex64>,
    pub m: u64,
    pub g: GroupElement,
    pub truncation: Truncation,
    pub extraction: Extraction,
    pub predicted: Complex64,
    pub relative_error: f64,
    pub tolerance: f64,
}

impl Table for ExtractResult {
    fn columns(&self) -> Vec<&'static str> {
        vec![
            "m",
            "nodes",
            "completed_re",
            "completed_im",
            "predicted_re",
            "predicted_im",
            "relative_error",
            "half_grid_discrepancy",
            "terms",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let [cr, ci] = complex_cells(self.extraction.completed);
        let [pr, pi] = complex_cells(self.predicted);
        vec![vec![
            self.m.to_string(),
            self.extraction.nodes.to_string(),
            cr,
            ci,
            pr,
            pi,
            fmt_f64(self.relative_error),
            fmt_f64(self.extraction.discrepancy),
            self.extraction.terms.to_string(),
        ]]
    }
}

impl Text for ExtractResult {
    fn text(&self) -> String {
        format!(
            "extracted {}\npredicted {}\nrelative error {} ({})\n",
            fmt_complex(self.extraction.completed),
            fmt_complex(self.predicted),
            fmt_f64(self.relative_error),
            if self.relative_error <= self.tolerance { "pass" } else { "fail" },
        )
    }
}

pub struct ExtractInput<'a> {
    pub partition: &'a Partition,
    pub s: &'a [Complex64],
    pub m: u64,
    pub x: Option<&'a [f64]>,
    pub y: Option<&'a [f64]>,
    pub radius: Option<f64>,
    pub modulus: Option<f64>,
    pub nodes: Option<usize>,
    pub tol: f64,
    pub exec: Exec,
}

pub fn extract(input: ExtractInput<'_>) -> Result<Outcome, Failure> {
    let partition = input.partition;
    let s = borel_point(partition, input.s)?;
    let g = group_element(partition.n(), input.x, input.y)?;
    let mut options = match partition.n() {
        2 => ExtractOptions::gl2(),
        3 => ExtractOptions::gl3(),
        n => return Err(Failure::Usage(format!("extraction is implemented for n = 2, 3, not {n}"))),
    };
    options.exec = input.exec;
    options.truncation = match (options.truncation, input.radius, input.modulus) {
        (Truncation::Smooth { radius }, r, None) => Truncation::Smooth { radius: r.unwrap_or(radius) },
        (Truncation::Cells { radius, modulus }, r, m) => {
            Truncation::Cells { radius: r.unwrap_or(radius), modulus: m.unwrap_or(modulus) }
        }
        _ => return Err(Failure::Usage("--modulus applies to n = 3 only".into())),
    };
    if let Some(nodes) = input.nodes {
        options.nodes = nodes;
    }
    if !(input.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let request = FWRequest::borel(input.m, s.clone(), g.clone()).map_err(Failure::usage)?;
    let extraction = extract_fourier_coefficient(&request, &options).map_err(Failure::usage)?;
    let predicted = fw_formula(&request, DEFAULT_DIRICHLET_TERMS).map_err(Failure::usage)?;
    let relative_error = (extraction.completed - predicted).norm() / predicted.norm();
    let result = ExtractResult {
        partition: partition.parts().to_vec(),
        s: s.values().to_vec(),
        m: input.m,
        g,
        truncation: options.truncation,
        extraction,
        predicted,
        relative_error,
        tolerance: input.tol,
    };
    finish("extract", relative_error <= input.tol, result)
}

// eval

#[derive(Serialize, Deserialize)]
pub struct EvalResult {
    pub partition: Vec<usize>,
    pub s: Vec<Complex64>,
    pub g: GroupElement,
    pub truncation: Truncation,
    pub series: SeriesValue,
}

impl Table for EvalResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["value_re", "value_im", "tail", "terms"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let [re, im] = complex_cells(self.series.value);
        vec![vec![re, im, fmt_f64(self.series.tail), self.series.terms.to_string()]]
    }
}

impl Text for EvalResult {
    fn text(&self) -> String {
        format!("{}\n", fmt_complex(self.series.value))
    }
}

fn truncation(text: &str) -> Result<Truncation, Failure> {
    let bad = || Failure::Usage(format!("--truncation expects height:<H> or smooth:<R>, got {text:?}"));
    let (kind, value) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "height" => value.parse().map(Truncation::Height).map_err(|_| bad()),
        "smooth" => value.parse().map(|radius| Truncation::Smooth { radius }).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

pub fn eval(
    partition: &Partition,
    s: &[Complex64],
    x: Option<&[f64]>,
    y: Option<&[f64]>,
    truncation_text: &str,
    exec: Exec,
) -> Result<Outcome, Failure> {
    let s = borel_point(partition, s)?;
    let g = group_element(partition.n(), x, y)?;
    let truncation = truncation(truncation_text)?;
    let series = eval_eisenstein_with(partition.n(), &g, &s, truncation, exec).map_err(Failure::usage)?;
    let result = EvalResult { partition: partition.parts().to_vec(), s: s.values().to_vec(), g, truncation, series };
    finish("eval", true, result)
}

// uniqueness

#[derive(Serialize, Deserialize)]
pub struct UniquenessResult {
    pub partition: Vec<usize>,
    pub forms: Vec<String>,
    pub constraint: Constraint,
    /// Block permutations fixing (P, Φ), one-based.
    pub symmetries: Vec<Vec<usize>>,
    pub map: Option<AffineMap>,
    pub verdict: Option<UniquenessVerdict>,
    pub numeric: Vec<NumericCheck>,
    /// Numeric checks agree with the exact verdict.
    pub consistent: bool,
}

impl Table for UniquenessResult {
    fn columns(&self) -> Vec<&'static str> {
        vec!["kind", "detail", "difference"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .symmetries
            .iter()
            .map(|p| vec!["symmetry".into(), fmt_list(p, ToString::to_string), String::new()])
            .collect();
        if let Some(v) = &self.verdict {
            rows.push(vec!["verdict".into(), verdict_text(v), String::new()]);
        }
        rows.extend(
            self.numeric
                .iter()
                .map(|c| vec!["numeric".into(), format!("p = {}", c.p), fmt_f64(c.difference)]),
        );
        rows
    }
}

fn verdict_text(v: &UniquenessVerdict) -> String {
    match v {
        UniquenessVerdict::Permutation { pi } => format!("permutation {}", fmt_list(&one_based(pi), ToString::to_string)),
        UniquenessVerdict::Rejected { witness } => format!("rejected: {witness}"),
    }
}

impl Text for UniquenessResult {
    fn text(&self) -> String {
        match &self.verdict {
            Some(v) => {
                let worst = self.numeric.iter().map(|c| c.difference).fold(0.0, f64::max);
                format!(
                    "{}\nnumeric max difference {} ({})\n",
                    verdict_text(v),
                    fmt_f64(worst),
                    if self.consistent { "consistent" } else { "INCONSISTENT" }
                )
            }
            None => self.symmetries.iter().map(|p| format!("{}\n", fmt_list(p, ToString::to_string))).collect(),
        }
    }
}

pub fn uniqueness(
    partition: &Partition,
    forms: Option<&str>,
    map: Option<&Path>,
    constraint: Constraint,
    points: usize,
    seed: u64,
) -> Result<Outcome, Failure> {
    let forms = parse::forms(partition, forms)?;
    let blocks = BlockStructure::from_forms(&forms).map_err(Failure::usage)?;
    let symmetries = enumerate_permutation_symmetries(partition, &forms)
        .map_err(Failure::usage)?
        .iter()
        .map(one_based)
        .collect();
    let mut result = UniquenessResult {
        partition: partition.parts().to_vec(),
        forms: form_names(&forms),
        constraint,
        symmetries,
        map: None,
        verdict: None,
        numeric: Vec::new(),
        consistent: true,
    };
    if let Some(path) = map {
        let text = parse::read(path)?;
        let mu = AffineMap::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let verdict = decide_affine_symmetry_with(partition, &blocks, &mu, constraint).map_err(Failure::usage)?;
        let numeric = numeric_divisor_check(partition, &blocks, &mu, constraint, points, seed).map_err(Failure::usage)?;
        result.consistent = if verdict.is_permutation() {
            numeric.iter().all(|c| c.difference <= ACCEPT_TOL * c.left.norm().max(1.0))
        } else {
            points == 0 || numeric.iter().any(|c| c.difference > FALSIFY_THRESHOLD)
        };
        result.map = Some(mu);
        result.verdict = Some(verdict);
        result.numeric = numeric;
    }
    let passed = result.consistent;
    finish("uniqueness", passed, result)
}

// falsify

impl Table for FalsificationReport {
    fn columns(&self) -> Vec<&'static str> {
        vec!["trial", "verdict", "max_difference", "resampled", "confirmed"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.trials
            .iter()
            .enumerate()
            .map(|(k, t)| {
                vec![
                    k.to_string(),
                    verdict_text(&t.verdict),
                    fmt_f64(t.numeric.iter().map(|c| c.difference).fold(0.0, f64::max)),
                    t.resampled.to_string(),
                    t.confirmed.to_string(),
                ]
            })
            .collect()
    }
}

impl Text for FalsificationReport {
    fn text(&self) -> String {
        let n = self.trials.len();
        format!(
            "rejected {}/{n}, numeric witnesses {}/{n} (seed {})\n{}\n",
            self.rejected,
            self.with_numeric_witness,
            self.seed,
            if self.passed { "pass" } else { "fail" }
        )
    }
}

pub fn falsify(
    partition: &Partition,
    forms: Option<&str>,
    trials: usize,
    seed: u64,
    constraint: Constraint,
    exec: Exec,
) -> Result<Outcome, Failure> {
    let forms = parse::forms(partition, forms)?;
    let blocks = BlockStructure::from_forms(&forms).map_err(Failure::usage)?;
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let report =
        random_falsification_with(partition, &blocks, trials, seed, constraint, exec).map_err(Failure::usage)?;
    let passed = report.passed;
    finish("falsify", passed, report)
}
