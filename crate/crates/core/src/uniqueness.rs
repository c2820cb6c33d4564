//! Affine symmetries of the Eisenstein divisor sum.
//!
//! At a prime p the divisor sum of (P, Φ, s) is Σⱼ λⱼ(p) Σ_{i∈Iⱼ} p^{sᵢ}, where
//! I₁, …, I_N group the blocks carrying the same form. An affine map
//! μ(s) = A·s + b is a symmetry when replacing sᵢ by μᵢ(s) leaves this sum
//! unchanged on the hyperplane Σ nᵢsᵢ = 0 for every p, with the λⱼ(p) treated
//! as independent symbols.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::forms::FormSet;
pub use crate::hecke::BlockStructure;
use crate::par::{self, Exec};
use crate::parabolic::{rational_to_f64, Partition, Permutation, Rational};

/// Rational affine map s ↦ A·s + b on C^r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    matrix: Vec<Vec<Rational>>,
    shift: Vec<Rational>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<Rational>>, shift: Vec<Rational>) -> Result<Self> {
        let r = shift.len();
        if matrix.len() != r {
            return Err(Error::Dimension { expected: r, found: matrix.len() });
        }
        if let Some(row) = matrix.iter().find(|row| row.len() != r) {
            return Err(Error::Dimension { expected: r, found: row.len() });
        }
        Ok(Self { matrix, shift })
    }

    /// μ(s) = (s_{σ(0)}, …, s_{σ(r−1)}).
    pub fn permutation(sigma: &Permutation) -> Self {
        let r = sigma.len();
        let matrix = (0..r)
            .map(|i| (0..r).map(|k| if k == sigma.image(i) { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        Self { matrix, shift: vec![Rational::zero(); r] }
    }

    pub fn identity(r: usize) -> Self {
        Self::permutation(&Permutation::identity(r))
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn entry_mut(&mut self, i: usize, k: usize) -> &mut Rational {
        &mut self.matrix[i][k]
    }

    pub fn shift_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.shift[i]
    }

    /// Adds tᵢ·w to row i for each i.
    pub fn plus_kernel(&self, weights: &[Rational], t: &[Rational]) -> Result<Self> {
        let r = self.dim();
        if weights.len() != r || t.len() != r {
            return Err(Error::Dimension { expected: r, found: weights.len().min(t.len()) });
        }
        let matrix = self
            .matrix
            .iter()
            .zip(t)
            .map(|(row, ti)| row.iter().zip(weights).map(|(a, w)| a + ti * w).collect())
            .collect();
        Ok(Self { matrix, shift: self.shift.clone() })
    }

    /// μ(s) evaluated in floating point.
    pub fn apply(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.matrix
            .iter()
            .zip(&self.shift)
            .map(|(row, b)| row.iter().zip(s).map(|(a, x)| rational_to_f64(*a) * x).sum::<Complex64>() + rational_to_f64(*b))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("affine maps serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("affine map: {e}")))
    }
}

/// Rational entry on the wire: `[num, den]`, an integer, or a string "p/q".
#[derive(Deserialize)]
#[serde(untagged)]
enum WireRational {
    Pair(i64, i64),
    Int(i64),
    Text(String),
}

impl WireRational {
    fn into_rational(self) -> std::result::Result<Rational, String> {
        match self {
            Self::Pair(_, 0) => Err("zero denominator".into()),
            Self::Pair(n, d) => Ok(Rational::new(n, d)),
            Self::Int(n) => Ok(Rational::from_integer(n)),
            Self::Text(t) => {
                let t = t.trim();
                match t.split_once('/') {
                    Some((n, d)) => {
                        let (n, d): (i64, i64) = (n.trim().parse().map_err(|_| t.to_string())?, d.trim().parse().map_err(|_| t.to_string())?);
                        if d == 0 {
                            return Err("zero denominator".into());
                        }
                        Ok(Rational::new(n, d))
                    }
                    None => t.parse().map(Rational::from_integer).map_err(|_| format!("not a rational: {t}")),
                }
            }
        }
    }
}

#[derive(Deserialize)]
struct WireAffine {
    #[serde(rename = "A")]
    matrix: Vec<Vec<WireRational>>,
    b: Vec<WireRational>,
}

#[derive(Serialize)]
struct WireAffineOut {
    #[serde(rename = "A")]
    matrix: Vec<Vec<[i64; 2]>>,
    b: Vec<[i64; 2]>,
}

fn pair(q: &Rational) -> [i64; 2] {
    [*q.numer(), *q.denom()]
}

impl Serialize for AffineMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        WireAffineOut {
            matrix: self.matrix.iter().map(|row| row.iter().map(pair).collect()).collect(),
            b: self.shift.iter().map(pair).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AffineMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = WireAffine::deserialize(deserializer)?;
        let conv = |v: Vec<WireRational>| v.into_iter().map(WireRational::into_rational).collect::<std::result::Result<Vec<_>, _>>();
        let matrix = wire.matrix.into_iter().map(conv).collect::<std::result::Result<Vec<_>, _>>().map_err(D::Error::custom)?;
        let shift = conv(wire.b).map_err(D::Error::custom)?;
        AffineMap::new(matrix, shift).map_err(D::Error::custom)
    }
}

/// Which hyperplane the spectral points live on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Σ nᵢsᵢ = 0.
    #[default]
    Weighted,
    /// Σ sᵢ = 0.
    Unweighted,
}

impl Constraint {
    pub fn weights(self, partition: &Partition) -> Vec<Rational> {
        match self {
            Self::Weighted => partition.parts().iter().map(|&n| Rational::from_integer(n as i64)).collect(),
            Self::Unweighted => vec![Rational::one(); partition.r()],
        }
    }
}

/// Why a map fails to be a symmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Row `row` is not a basis vector plus a multiple of the weight vector.
    NotShiftedBasis { row: usize },
    /// Row `row` reduces to s_target, but target lies in another group.
    CrossesGroups { row: usize, target: usize },
    /// Row `row` has a nonzero constant after reduction.
    NonzeroShift { row: usize, shift: [i64; 2] },
    /// Two rows reduce to the same coordinate.
    NotBijective { rows: [usize; 2], target: usize },
    /// Numeric evaluation with unequal sides.
    Numeric { s: Vec<Complex64>, p: u64, left: Complex64, right: Complex64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotShiftedBasis { row } => write!(f, "row {} is not a shifted basis vector", row + 1),
            Self::CrossesGroups { row, target } => write!(f, "row {} maps to block {} in another group", row + 1, target + 1),
            Self::NonzeroShift { row, shift } => write!(f, "row {} has effective shift {}/{}", row + 1, shift[0], shift[1]),
            Self::NotBijective { rows, target } => {
                write!(f, "rows {} and {} both map to block {}", rows[0] + 1, rows[1] + 1, target + 1)
            }
            Self::Numeric { p, left, right, .. } => write!(f, "p = {p}: {left} != {right}"),
        }
    }
}

/// Outcome of [`decide_affine_symmetry`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum UniquenessVerdict {
    /// μᵢ(s) = s_{π(i)} on the hyperplane, with π preserving groups.
    Permutation { pi: Permutation },
    Rejected { witness: Witness },
}

impl UniquenessVerdict {
    pub fn is_permutation(&self) -> bool {
        matches!(self, Self::Permutation { .. })
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        match self {
            Self::Permutation { pi } => Some(pi),
            Self::Rejected { .. } => None,
        }
    }
}

/// Index k with row − e_k ∈ Q·w, if any.
fn reduce_row(row: &[Rational], weights: &[Rational]) -> Option<usize> {
    (0..row.len()).find(|&k| {
        let mut t: Option<Rational> = None;
        row.iter().zip(weights).enumerate().all(|(l, (a, w))| {
            let target = if l == k { a - Rational::one() } else { *a };
            let ratio = target / w;
            match t {
                None => {
                    t = Some(ratio);
                    true
                }
                Some(t0) => t0 == ratio,
            }
        })
    })
}

/// Exact decision of whether μ is a symmetry of the divisor sum (weighted hyperplane).
pub fn decide_affine_symmetry(partition: &Partition, blocks: &BlockStructure, mu: &AffineMap) -> Result<UniquenessVerdict> {
    decide_affine_symmetry_with(partition, blocks, mu, Constraint::Weighted)
}

pub fn decide_affine_symmetry_with(
    partition: &Partition,
    blocks: &BlockStructure,
    mu: &AffineMap,
    constraint: Constraint,
) -> Result<UniquenessVerdict> {
    let r = partition.r();
    if blocks.r() != r {
        return Err(Error::Dimension { expected: r, found: blocks.r() });
    }
    if mu.dim() != r {
        return Err(Error::Dimension { expected: r, found: mu.dim() });
    }
    let weights = constraint.weights(partition);
    let labels = blocks.labels();
    let mut pi = Vec::with_capacity(r);
    let mut owner: Vec<Option<usize>> = vec![None; r];
    for (i, row) in mu.matrix().iter().enumerate() {
        let Some(k) = reduce_row(row, &weights) else {
            return Ok(UniquenessVerdict::Rejected { witness: Witness::NotShiftedBasis { row: i } });
        };
        if labels[k] != labels[i] {
            return Ok(UniquenessVerdict::Rejected { witness: Witness::CrossesGroups { row: i, target: k } });
        }
        let b = mu.shift()[i];
        if !b.is_zero() {
            return Ok(UniquenessVerdict::Rejected { witness: Witness::NonzeroShift { row: i, shift: pair(&b) } });
        }
        if let Some(prev) = owner[k] {
            return Ok(UniquenessVerdict::Rejected { witness: Witness::NotBijective { rows: [prev, i], target: k } });
        }
        owner[k] = Some(i);
        pi.push(k);
    }
    Ok(UniquenessVerdict::Permutation { pi: Permutation::new(pi)? })
}

/// All σ with σP = P and σΦ = Φ, in lexicographic order.
pub fn enumerate_permutation_symmetries(partition: &Partition, forms: &FormSet) -> Result<Vec<Permutation>> {
    let forms = FormSet::new(partition, forms.forms().to_vec())?;
    let mut out = Vec::new();
    for sigma in Permutation::all(partition.r()) {
        if partition.permuted(&sigma)? == *partition && forms.permuted(&sigma)?.forms() == forms.forms() {
            out.push(sigma);
        }
    }
    Ok(out)
}

/// Σⱼ λⱼ Σ_{i∈Iⱼ} p^{xᵢ}.
pub fn divisor_sum_at_prime(blocks: &BlockStructure, lambda: &[Complex64], p: u64, x: &[Complex64]) -> Complex64 {
    let ln_p = (p as f64).ln();
    blocks
        .labels()
        .iter()
        .zip(x)
        .map(|(&j, xi)| lambda[j] * (xi * ln_p).exp())
        .sum()
}

/// Random point on the constraint hyperplane with bounded real and imaginary parts.
fn random_point(rng: &mut ChaCha8Rng, weights: &[Rational]) -> Vec<Complex64> {
    let r = weights.len();
    let mut s: Vec<Complex64> = (0..r).map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-3.0..3.0))).collect();
    let w: Vec<f64> = weights.iter().map(|w| rational_to_f64(*w)).collect();
    let last = w[r - 1];
    let head: Complex64 = s[..r - 1].iter().zip(&w).map(|(x, wi)| x * wi).sum();
    s[r - 1] = -head / last;
    s
}

/// Distinct nonzero mock Hecke data, one value per group.
fn mock_lambda(rng: &mut ChaCha8Rng, groups: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(groups);
    while out.len() < groups {
        let x: f64 = rng.random_range(-2.0..2.0);
        if x.abs() > 0.1 && out.iter().all(|y| (y.re - x).abs() > 0.1) {
            out.push(Complex64::new(x, 0.0));
        }
    }
    out
}

/// Two-sided numeric evaluation of the divisor-sum identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericCheck {
    pub s: Vec<Complex64>,
    pub p: u64,
    pub lambda: Vec<Complex64>,
    pub left: Complex64,
    pub right: Complex64,
    pub difference: f64,
}

/// Evaluates both sides of the identity at `points` random (s, p).
pub fn numeric_divisor_check(
    partition: &Partition,
    blocks: &BlockStructure,
    mu: &AffineMap,
    constraint: Constraint,
    points: usize,
    seed: u64,
) -> Result<Vec<NumericCheck>> {
    if blocks.r() != partition.r() || mu.dim() != partition.r() {
        return Err(Error::Dimension { expected: partition.r(), found: mu.dim() });
    }
    let weights = constraint.weights(partition);
    let primes = primes_up_to(100);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..points)
        .map(|_| {
            let s = random_point(&mut rng, &weights);
            let p = *primes.choose(&mut rng).expect("primes below 100");
            let lambda = mock_lambda(&mut rng, blocks.groups());
            let left = divisor_sum_at_prime(blocks, &lambda, p, &s);
            let right = divisor_sum_at_prime(blocks, &lambda, p, &mu.apply(&s));
            NumericCheck { difference: (left - right).norm(), s, p, lambda, left, right }
        })
        .collect())
}

/// Disagreement required of every numeric witness.
pub const FALSIFY_THRESHOLD: f64 = 1e-6;

/// Numeric points evaluated per rejected map.
pub const FALSIFY_POINTS: usize = 3;

/// Largest denominator of sampled entries.
pub const FALSIFY_MAX_DENOMINATOR: i64 = 16;

/// One sampled map and its fate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsificationTrial {
    pub map: AffineMap,
    pub verdict: UniquenessVerdict,
    pub numeric: Vec<NumericCheck>,
    /// Resamples needed to avoid permutation classes.
    pub resampled: u32,
    pub confirmed: bool,
}

/// Summary of [`random_falsification`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub seed: u64,
    pub trials: Vec<FalsificationTrial>,
    pub rejected: usize,
    pub with_numeric_witness: usize,
    pub passed: bool,
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.random_range(1..=FALSIFY_MAX_DENOMINATOR);
    let num = rng.random_range(-2 * den..=2 * den);
    Rational::new(num, den)
}

/// Random map in the vicinity of permutation maps: each row is a random
/// basis vector plus a few rational perturbations, and the shift is zero
/// half of the time.
fn random_map(rng: &mut ChaCha8Rng, r: usize) -> AffineMap {
    let matrix = (0..r)
        .map(|_| {
            let k = rng.random_range(0..r);
            (0..r)
                .map(|l| {
                    let base = if l == k { Rational::one() } else { Rational::zero() };
                    if rng.random_bool(0.4) { base + random_rational(rng) } else { base }
                })
                .collect()
        })
        .collect();
    let zero_shift = rng.random_bool(0.5);
    let shift = (0..r).map(|_| if zero_shift || rng.random_bool(0.5) { Rational::zero() } else { random_rational(rng) }).collect();
    AffineMap { matrix, shift }
}

/// Samples `trials` non-symmetric maps and confirms each is rejected, both
/// exactly and by numeric witnesses.
pub fn random_falsification(partition: &Partition, blocks: &BlockStructure, trials: usize, seed: u64) -> Result<FalsificationReport> {
    random_falsification_with(partition, blocks, trials, seed, Constraint::Weighted, Exec::default())
}

pub fn random_falsification_with(
    partition: &Partition,
    blocks: &BlockStructure,
    trials: usize,
    seed: u64,
    constraint: Constraint,
    exec: Exec,
) -> Result<FalsificationReport> {
    let r = partition.r();
    if blocks.r() != r {
        return Err(Error::Dimension { expected: r, found: blocks.r() });
    }
    let results = par::map_range(exec, trials, |t| -> Result<FalsificationTrial> {
        let trial_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let mut resampled = 0;
        loop {
            let map = random_map(&mut rng, r);
            let verdict = decide_affine_symmetry_with(partition, blocks, &map, constraint)?;
            if verdict.is_permutation() {
                resampled += 1;
                continue;
            }
            let numeric = numeric_divisor_check(partition, blocks, &map, constraint, FALSIFY_POINTS, rng.random())?;
            let confirmed = numeric.iter().all(|c| c.difference > FALSIFY_THRESHOLD);
            return Ok(FalsificationTrial { map, verdict, numeric, resampled, confirmed });
        }
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rejected = trials.iter().filter(|t| !t.verdict.is_permutation()).count();
    let with_numeric_witness = trials.iter().filter(|t| t.confirmed).count();
    let passed = rejected == trials.len() && with_numeric_witness == trials.len();
    Ok(FalsificationReport { seed, trials, rejected, with_numeric_witness, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn perturbed_identity_is_rejected() {
        let p = Partition::borel(3).unwrap();
        let blocks = BlockStructure::new(vec![3]).unwrap();
        let mut mu = AffineMap::identity(3);
        *mu.entry_mut(0, 1) = q(1, 2);
        let v = decide_affine_symmetry(&p, &blocks, &mu).unwrap();
        assert_eq!(v, UniquenessVerdict::Rejected { witness: Witness::NotShiftedBasis { row: 0 } });
    }

    #[test]
    fn kernel_shift_keeps_permutation() {
        let p: Partition = "2,1".parse().unwrap();
        let blocks = BlockStructure::singletons(2).unwrap();
        let w = Constraint::Weighted.weights(&p);
        let mu = AffineMap::identity(2).plus_kernel(&w, &[q(1, 3), q(-5, 7)]).unwrap();
        assert!(decide_affine_symmetry(&p, &blocks, &mu).unwrap().is_permutation());
        // with unit weights the same rows are no longer basis vectors mod the kernel
        let v = decide_affine_symmetry_with(&p, &blocks, &mu, Constraint::Unweighted).unwrap();
        assert!(!v.is_permutation());
    }

    #[test]
    fn json_accepts_pairs_and_text() {
        let mu = AffineMap::from_json(r#"{"A": [[[0,1],1],["1",0]], "b": ["0", [0,3]]}"#).unwrap();
        assert_eq!(mu, AffineMap::permutation(&Permutation::new(vec![1, 0]).unwrap()));
        assert_eq!(AffineMap::from_json(&mu.to_json()).unwrap(), mu);
        assert!(AffineMap::from_json(r#"{"A": [[1]], "b": [[1,0]]}"#).is_err());
    }
}
