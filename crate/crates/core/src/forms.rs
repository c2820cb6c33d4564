//! Automorphic-form data for the inducing blocks: form specs, mock Maass
//! forms, Hecke extension and completed L-factors.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{factorize, is_prime, primes_up_to, smallest_prime_factors};
use crate::error::{Error, Result};
use crate::parabolic::{langlands_parameter_generic, LanglandsParameter, Partition, Permutation, SpectralPoint};
use crate::specfun::{gamma, zeta, zeta_completed};

/// Largest prime stored in a mock form.
pub const MOCK_PRIME_BOUND: usize = 20_000;

/// Name of the constant function attached to a degree-one block.
pub const TRIVIAL_NAME: &str = "1";

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One inducing form: degree, parity, Langlands parameter and prime Hecke data.
///
/// Equality and hashing are by name.
#[derive(Clone, Debug)]
pub struct FormSpec {
    name: String,
    degree: usize,
    parity: u8,
    alpha: Vec<Complex64>,
    hecke: BTreeMap<u64, Complex64>,
}

impl PartialEq for FormSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for FormSpec {}

impl Hash for FormSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl FormSpec {
    pub fn new(
        name: impl Into<String>,
        degree: usize,
        parity: u8,
        alpha: Vec<Complex64>,
        hecke: BTreeMap<u64, Complex64>,
    ) -> Result<Self> {
        let name = name.into();
        if degree == 0 {
            return Err(Error::FormMismatch("degree must be positive".into()));
        }
        if alpha.len() != degree {
            return Err(Error::FormMismatch(format!("{name}: {} parameters for degree {degree}", alpha.len())));
        }
        if parity > 1 {
            return Err(Error::FormMismatch(format!("{name}: parity must be 0 or 1")));
        }
        let sum: Complex64 = alpha.iter().sum();
        if sum.norm() > 1e-12 * alpha.iter().map(|a| a.norm()).fold(1.0, f64::max) {
            return Err(Error::Constraint { residual: sum.norm() });
        }
        if degree == 1 && (alpha[0] != Complex64::new(0.0, 0.0) || !hecke.is_empty()) {
            return Err(Error::FormMismatch(format!("{name}: degree-one forms carry no data")));
        }
        if let Some(&p) = hecke.keys().find(|&&p| !is_prime(p)) {
            return Err(Error::FormMismatch(format!("{name}: Hecke key {p} is not prime")));
        }
        Ok(Self { name, degree, parity, alpha, hecke })
    }

    /// The constant function on a degree-one block.
    pub fn trivial() -> Self {
        Self {
            name: TRIVIAL_NAME.into(),
            degree: 1,
            parity: 0,
            alpha: vec![Complex64::new(0.0, 0.0)],
            hecke: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn hecke(&self) -> &BTreeMap<u64, Complex64> {
        &self.hecke
    }

    pub fn is_trivial(&self) -> bool {
        self.degree == 1
    }

    /// Same data under another name; useful for building distinct copies.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), ..self.clone() }
    }

    /// Replaces the prime Hecke data.
    pub fn with_hecke(&self, hecke: BTreeMap<u64, Complex64>) -> Result<Self> {
        Self::new(self.name.clone(), self.degree, self.parity, self.alpha.clone(), hecke)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("form specs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct FormSpecWire {
    name: String,
    degree: usize,
    parity: u8,
    alpha: Vec<[f64; 2]>,
    hecke: WireHecke,
}

struct WireHecke(Vec<(u64, [f64; 2])>);

impl Serialize for WireHecke {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (p, v) in &self.0 {
            map.serialize_entry(&p.to_string(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for WireHecke {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, [f64; 2]>::deserialize(deserializer)?;
        let mut out = raw
            .into_iter()
            .map(|(k, v)| k.parse::<u64>().map(|p| (p, v)).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        out.sort_by_key(|&(p, _)| p);
        Ok(Self(out))
    }
}

impl Serialize for FormSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FormSpecWire {
            name: self.name.clone(),
            degree: self.degree,
            parity: self.parity,
            alpha: self.alpha.iter().map(|a| [a.re, a.im]).collect(),
            hecke: WireHecke(self.hecke.iter().map(|(&p, v)| (p, [v.re, v.im])).collect()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FormSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let w = FormSpecWire::deserialize(deserializer)?;
        let alpha = w.alpha.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let hecke = w.hecke.0.into_iter().map(|(p, [re, im])| (p, Complex64::new(re, im))).collect();
        FormSpec::new(w.name, w.degree, w.parity, alpha, hecke).map_err(serde::de::Error::custom)
    }
}

/// Forms φ₁ ⊗ … ⊗ φ_r aligned with a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSet {
    forms: Vec<FormSpec>,
}

impl FormSet {
    pub fn new(partition: &Partition, forms: Vec<FormSpec>) -> Result<Self> {
        if forms.len() != partition.r() {
            return Err(Error::FormMismatch(format!(
                "{} forms for a partition with {} blocks",
                forms.len(),
                partition.r()
            )));
        }
        for (f, &nj) in forms.iter().zip(partition.parts()) {
            if f.degree() != nj {
                return Err(Error::FormMismatch(format!(
                    "form {} has degree {} but the block has size {nj}",
                    f.name(),
                    f.degree()
                )));
            }
        }
        Ok(Self { forms })
    }

    /// Constant functions on every block; only valid for the Borel partition.
    pub fn trivial(partition: &Partition) -> Result<Self> {
        Self::new(partition, vec![FormSpec::trivial(); partition.r()])
    }

    pub fn forms(&self) -> &[FormSpec] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        Ok(Self { forms: sigma.apply(&self.forms)? })
    }

    /// Per-block Langlands parameters (degree-one blocks give `[0]`).
    pub fn block_parameters(&self) -> Vec<Vec<Complex64>> {
        self.forms.iter().map(|f| f.alpha().to_vec()).collect()
    }
}

/// Langlands parameter (…, α_{j,k} + sⱼ, …) of the Eisenstein series induced from `forms`.
pub fn langlands_parameter(partition: &Partition, forms: &FormSet, s: &SpectralPoint) -> Result<LanglandsParameter> {
    if s.partition() != partition {
        return Err(Error::FormMismatch("spectral point belongs to another partition".into()));
    }
    let flat = langlands_parameter_generic(partition, &forms.block_parameters(), s.values())?;
    LanglandsParameter::new(flat)
}

/// Synthetic degree-2 form with Sato–Tate distributed angles.
///
/// At each prime the angle comes from the fractional part of a fixed per-prime
/// offset plus `seed` times the golden ratio, so different seeds never give
/// equal eigenvalues; a gap around π/2 keeps λ(p) away from zero.
pub fn mock_maass_form(degree: usize, seed: u64) -> Result<FormSpec> {
    mock_maass_form_with_bound(degree, seed, MOCK_PRIME_BOUND)
}

pub fn mock_maass_form_with_bound(degree: usize, seed: u64, prime_bound: usize) -> Result<FormSpec> {
    if degree != 2 {
        return Err(Error::Domain(format!("mock forms exist only in degree 2, not {degree}")));
    }
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    const GAP: f64 = 0.02;
    let mut offsets = ChaCha8Rng::seed_from_u64(0x6d6f_636b);
    let rotation = (seed as f64 * GOLDEN).fract();
    let hecke = primes_up_to(prime_bound)
        .into_iter()
        .map(|p| {
            let u: f64 = offsets.random();
            let f = (u + rotation).fract();
            let mut g = f * (1.0 - 2.0 * GAP);
            if g >= 0.5 - GAP {
                g += 2.0 * GAP;
            }
            (p, Complex64::new(2.0 * sato_tate_quantile(g).cos(), 0.0))
        })
        .collect();
    let mut own = ChaCha8Rng::seed_from_u64(seed);
    let t: f64 = own.random_range(1.0..=10.0);
    let parity: u8 = own.random_range(0..=1);
    FormSpec::new(
        format!("mock:{seed}"),
        2,
        parity,
        vec![Complex64::new(0.0, t), Complex64::new(0.0, -t)],
        hecke,
    )
}

/// Inverse of F(θ) = (θ − sin θ cos θ)/π on [0, π].
fn sato_tate_quantile(q: f64) -> f64 {
    let mut theta = PI * q;
    for _ in 0..60 {
        let f = (theta - theta.sin() * theta.cos()) / PI - q;
        let df = 2.0 * theta.sin().powi(2) / PI;
        if df < 1e-12 {
            break;
        }
        let step = f / df;
        theta = (theta - step).clamp(0.0, PI);
        if step.abs() < 1e-15 {
            break;
        }
    }
    theta
}

/// λ(p^k) for k = 0..=max_k from λ(p^{k+1}) = λ(p)λ(p^k) − λ(p^{k−1}).
pub fn hecke_prime_powers(lambda_p: Complex64, max_k: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max_k as usize + 1);
    out.push(Complex64::new(1.0, 0.0));
    if max_k >= 1 {
        out.push(lambda_p);
    }
    for k in 2..=max_k as usize {
        let next = lambda_p * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

fn prime_value(form: &FormSpec, p: u64) -> Result<Complex64> {
    form.hecke.get(&p).copied().ok_or(Error::MissingPrime(p))
}

/// λ(m) by multiplicative extension of the prime data.
pub fn hecke_extend(form: &FormSpec, m: u64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Domain("Hecke eigenvalues start at m = 1".into()));
    }
    if form.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    factorize(m).into_iter().try_fold(Complex64::new(1.0, 0.0), |acc, (p, e)| {
        Ok(acc * hecke_prime_powers(prime_value(form, p)?, e)[e as usize])
    })
}

/// Source of Dirichlet coefficients a(1), a(2), ….
pub trait Coefficients {
    /// Vector of length `len + 1` with entry n holding a(n); entry 0 is unused.
    fn table(&self, len: usize) -> Result<Vec<Complex64>>;
}

/// Explicit coefficient list; a(n) = 0 beyond its end.
#[derive(Clone, Debug, PartialEq)]
pub struct RawCoefficients(pub Vec<Complex64>);

impl Coefficients for RawCoefficients {
    fn table(&self, len: usize) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); len + 1];
        for (n, a) in self.0.iter().enumerate().take(len) {
            out[n + 1] = *a;
        }
        Ok(out)
    }
}

/// Multiplicative table from prime-power values supplied by `local(p, k)`.
fn multiplicative_table(
    len: usize,
    mut local: impl FnMut(u64, u32) -> Result<Complex64>,
) -> Result<Vec<Complex64>> {
    let spf = smallest_prime_factors(len);
    let mut out = vec![Complex64::new(0.0, 0.0); len + 1];
    if len >= 1 {
        out[1] = Complex64::new(1.0, 0.0);
    }
    for n in 2..=len {
        let p = spf[n] as usize;
        let (mut rest, mut k) = (n, 0u32);
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        out[n] = if rest == 1 { local(p as u64, k)? } else { out[n / rest] * out[rest] };
    }
    Ok(out)
}

impl Coefficients for FormSpec {
    fn table(&self, len: usize) -> Result<Vec<Complex64>> {
        if self.is_trivial() {
            let mut out = vec![Complex64::new(1.0, 0.0); len + 1];
            out[0] = Complex64::new(0.0, 0.0);
            return Ok(out);
        }
        let mut cache: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
        multiplicative_table(len, |p, k| {
            let powers = match cache.get(&p) {
                Some(v) if v.len() > k as usize => v,
                _ => {
                    let max_k = (len as f64).log(p as f64).floor() as u32 + 1;
                    cache.insert(p, hecke_prime_powers(prime_value(self, p)?, max_k.max(k)));
                    &cache[&p]
                }
            };
            Ok(powers[k as usize])
        })
    }
}

/// Coefficients of L(s, Ad φ) for a degree-2 form.
#[derive(Clone, Debug)]
pub struct AdjointCoefficients<'a>(pub &'a FormSpec);

impl Coefficients for AdjointCoefficients<'_> {
    fn table(&self, len: usize) -> Result<Vec<Complex64>> {
        let form = self.0;
        multiplicative_table(len, |p, k| {
            let lp = prime_value(form, p)?;
            let a1 = lp * lp - 1.0;
            let mut seq = vec![Complex64::new(1.0, 0.0)];
            for j in 1..=k as usize {
                let back = |i: usize| if j >= i { seq[j - i] } else { Complex64::new(0.0, 0.0) };
                let next = a1 * back(1) - a1 * back(2) + back(3);
                seq.push(next);
            }
            Ok(seq[k as usize])
        })
    }
}

/// Value with an estimate of the truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncated {
    pub value: Complex64,
    pub bound: f64,
}

impl Truncated {
    pub fn exact(value: Complex64) -> Self {
        Self { value, bound: 0.0 }
    }
}

/// ∫_T^∞ (ln x)^k x^{−σ} dx for σ > 1.
fn log_power_tail(t: f64, sigma: f64, k: u32) -> f64 {
    let (lt, d) = (t.ln(), sigma - 1.0);
    let mut sum = 0.0;
    let mut falling = 1.0;
    for j in 0..=k {
        if j > 0 {
            falling *= (k - j + 1) as f64;
        }
        sum += falling * lt.powi((k - j) as i32) / d.powi(j as i32 + 1);
    }
    t.powf(1.0 - sigma) * sum
}

/// Σ_{n ≤ T} a(n) n^{−s}.
pub fn dirichlet_sum(table: &[Complex64], s: Complex64) -> Complex64 {
    table.iter().enumerate().skip(1).map(|(n, a)| a * (-s * (n as f64).ln()).exp()).sum()
}

fn require_summable(s: Complex64) -> Result<()> {
    if s.re <= 1.0 {
        return Err(Error::Domain(format!("direct summation needs Re s > 1, got {s}")));
    }
    Ok(())
}

/// π^{−s} Γ((s+α₁+ε)/2) Γ((s+α₂+ε)/2) for a degree-2 form.
pub fn lfunction_gamma_factor(alpha: &[Complex64], parity: u8, s: Complex64) -> Result<Complex64> {
    let mut g = (-s * PI.ln()).exp();
    for a in alpha {
        g *= gamma((s + a + parity as f64) / 2.0)?;
    }
    Ok(g)
}

/// L*(s, φ) by direct summation up to `truncation`.
pub fn lfunction_completed(form: &FormSpec, s: Complex64, truncation: usize) -> Result<Truncated> {
    if form.degree() != 2 {
        return Err(Error::FormMismatch(format!("L*(s, φ) needs a degree-2 form, got {}", form.name())));
    }
    lfunction_completed_from(form.alpha(), form.parity(), form, s, truncation)
}

/// L*(s) with explicit parameters and coefficients.
pub fn lfunction_completed_from(
    alpha: &[Complex64],
    parity: u8,
    coefficients: &dyn Coefficients,
    s: Complex64,
    truncation: usize,
) -> Result<Truncated> {
    require_summable(s)?;
    let factor = lfunction_gamma_factor(alpha, parity, s)?;
    let series = dirichlet_sum(&coefficients.table(truncation)?, s);
    // |λ(n)| ≤ d(n) under the Ramanujan bound; Σ_{n≤x} d(n) ≈ x(ln x + 2γ − 1).
    let tail = log_power_tail(truncation as f64, s.re, 1) + 2.0 * EULER_GAMMA * log_power_tail(truncation as f64, s.re, 0);
    Ok(Truncated { value: factor * series, bound: 2.0 * factor.norm() * tail })
}

/// π^{−2s} ∏_{j,k} Γ((s + α_{1,j} + α_{2,k})/2).
pub fn rankin_selberg_gamma_factor(a1: &[Complex64], a2: &[Complex64], s: Complex64) -> Result<Complex64> {
    let mut g = (-2.0 * s * PI.ln()).exp();
    for x in a1 {
        for y in a2 {
            g *= gamma((s + x + y) / 2.0)?;
        }
    }
    Ok(g)
}

/// Completed L*(s, φⱼ × φ_ℓ) with the degenerate cases for degree-one factors.
///
/// For two degree-2 forms the Dirichlet part is ζ(2s) Σ λ₁(n)λ₂(n) n^{−s}.
pub fn rankin_selberg_completed(fj: &FormSpec, fl: &FormSpec, s: Complex64, truncation: usize) -> Result<Truncated> {
    match (fj.is_trivial(), fl.is_trivial()) {
        (true, true) => Ok(Truncated::exact(zeta_completed(s)?)),
        (true, false) => lfunction_completed(fl, s, truncation),
        (false, true) => lfunction_completed(fj, s, truncation),
        (false, false) => {
            if fj.degree() != 2 || fl.degree() != 2 {
                return Err(Error::FormMismatch("Rankin–Selberg products are implemented for degree 2".into()));
            }
            require_summable(s)?;
            let factor = rankin_selberg_gamma_factor(fj.alpha(), fl.alpha(), s)? * zeta(2.0 * s)?;
            let t1 = fj.table(truncation)?;
            let t2 = fl.table(truncation)?;
            let product: Vec<Complex64> = t1.iter().zip(&t2).map(|(a, b)| a * b).collect();
            let series = dirichlet_sum(&product, s);
            // Σ_{n≤x} d(n)² ~ x (ln x)³/π² plus lower order terms.
            let t = truncation as f64;
            let tail = log_power_tail(t, s.re, 3) / (PI * PI) + log_power_tail(t, s.re, 2);
            Ok(Truncated { value: factor * series, bound: 2.0 * factor.norm() * tail })
        }
    }
}

/// One factor L*(1 + sⱼ − s_ℓ, φⱼ × φ_ℓ) of the completion product.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionFactor {
    pub j: usize,
    pub l: usize,
    pub argument: Complex64,
    pub forms: (String, String),
    pub value: Truncated,
}

/// Argument 1 + sⱼ − s_ℓ and the factor value, or a pole-risk error.
pub fn completion_factor_at(forms: &FormSet, s: &[Complex64], j: usize, l: usize, truncation: usize) -> Result<CompletionFactor> {
    let argument = 1.0 + s[j] - s[l];
    if (argument - 1.0).norm() < 1e-12 {
        return Err(Error::PoleRisk { j, l });
    }
    let (fj, fl) = (&forms.forms()[j], &forms.forms()[l]);
    let value = rankin_selberg_completed(fj, fl, argument, truncation)?;
    Ok(CompletionFactor { j, l, argument, forms: (fj.name().into(), fl.name().into()), value })
}

/// All factors with j < ℓ, in lexicographic order.
pub fn completion_factors(partition: &Partition, forms: &FormSet, s: &SpectralPoint, truncation: usize) -> Result<Vec<CompletionFactor>> {
    FormSet::new(partition, forms.forms().to_vec())?;
    let r = partition.r();
    let mut out = Vec::new();
    for j in 0..r {
        for l in j + 1..r {
            out.push(completion_factor_at(forms, s.values(), j, l, truncation)?);
        }
    }
    Ok(out)
}

/// ∏_{j<ℓ} L*(1 + sⱼ − s_ℓ, φⱼ × φ_ℓ) with a first-order error bound.
pub fn completion_factor(partition: &Partition, forms: &FormSet, s: &SpectralPoint, truncation: usize) -> Result<Truncated> {
    let factors = completion_factors(partition, forms, s, truncation)?;
    let value: Complex64 = factors.iter().map(|f| f.value.value).product();
    let relative: f64 = factors.iter().map(|f| f.value.bound / f.value.value.norm()).sum();
    Ok(Truncated { value, bound: value.norm() * relative })
}

/// ∏_{i≠j} Γ((1 + αᵢ − αⱼ)/2).
pub fn adjoint_gamma_factor(alpha: &[Complex64]) -> Result<Complex64> {
    let mut g = Complex64::new(1.0, 0.0);
    for (i, ai) in alpha.iter().enumerate() {
        for (j, aj) in alpha.iter().enumerate() {
            if i != j {
                g *= gamma((1.0 + ai - aj) / 2.0)?;
            }
        }
    }
    Ok(g)
}

/// L*(1, Ad φ) by truncated Dirichlet summation of the adjoint coefficients.
pub fn adjoint_l_at_one(form: &FormSpec, truncation: usize) -> Result<Truncated> {
    if form.degree() != 2 {
        return Err(Error::FormMismatch(format!("adjoint L-value needs degree 2, got {}", form.name())));
    }
    adjoint_l_at_one_from(form.alpha(), &AdjointCoefficients(form), truncation)
}

/// L*(1, Ad) from explicit adjoint coefficients.
///
/// The series converges only conditionally at s = 1, so the bound is a
/// square-root-cancellation estimate: 6 (Σ_{n≤T}|a(n)|²/T)^{1/2} T^{−1/2}.
pub fn adjoint_l_at_one_from(alpha: &[Complex64], coefficients: &dyn Coefficients, truncation: usize) -> Result<Truncated> {
    let factor = adjoint_gamma_factor(alpha)?;
    let table = coefficients.table(truncation)?;
    let series = dirichlet_sum(&table, Complex64::new(1.0, 0.0));
    let t = truncation.max(1) as f64;
    let mean_square = table.iter().skip(1).map(|a| a.norm_sqr()).sum::<f64>() / t;
    let bound = factor.norm() * 6.0 * (mean_square / t).sqrt();
    Ok(Truncated { value: factor * series, bound })
}
