//! Partitions, standard parabolics, ρ-shifts, spectral points, Langlands
//! parameters, Iwasawa coordinates and power functions.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar used for ρ-shifts and exact parameter arithmetic.
pub type Rational = Rational64;

/// Tolerance on Σ nᵢsᵢ for floating spectral points.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Ordered composition n = n₁ + … + n_r naming a standard parabolic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        Ok(Self { parts })
    }

    /// The Borel partition 1 + 1 + … + 1 of `n`.
    pub fn borel(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn is_borel(&self) -> bool {
        self.parts.iter().all(|&p| p == 1)
    }

    /// Index range of block `j` inside the flattened n-tuple.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.parts[..j].iter().sum();
        start..start + self.parts[j]
    }

    /// All compositions of `n` in lexicographic order.
    pub fn compositions(n: usize) -> Vec<Partition> {
        fn rec(left: usize, acc: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if left == 0 {
                out.push(Partition { parts: acc.clone() });
                return;
            }
            for k in 1..=left {
                acc.push(k);
                rec(left - k, acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Parts permuted by `sigma`: (n_{σ(1)}, …, n_{σ(r)}).
    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        Ok(Self { parts: sigma.apply(&self.parts)? })
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl FromStr for Partition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("part {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "{}", s.join(","))
    }
}

/// A permutation σ of {0, …, r−1}; acts on tuples by x ↦ (x_{σ(0)}, …, x_{σ(r−1)}).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::Parse(format!("not a permutation: {images:?}")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    /// Builds from 1-based images, as written on the command line.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::Parse("permutation entries are 1-based".into()));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(r: usize) -> Self {
        Self { images: (0..r).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    /// (x_{σ(0)}, …, x_{σ(r−1)}).
    pub fn apply<T: Clone>(&self, xs: &[T]) -> Result<Vec<T>> {
        if xs.len() != self.images.len() {
            return Err(Error::Dimension { expected: self.images.len(), found: xs.len() });
        }
        Ok(self.images.iter().map(|&i| xs[i].clone()).collect())
    }

    /// Every permutation of `r` symbols in lexicographic order.
    pub fn all(r: usize) -> Vec<Self> {
        use itertools::Itertools;
        (0..r).permutations(r).map(|images| Self { images }).collect()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// ρ_P: ρ(1) = (n − n₁)/2 and ρ(j) = (n − nⱼ)/2 − n₁ − … − n_{j−1}.
pub fn rho_parabolic(partition: &Partition) -> Vec<Rational> {
    let n = partition.n() as i64;
    let mut before = 0i64;
    partition
        .parts()
        .iter()
        .map(|&nj| {
            let nj = nj as i64;
            let value = Rational::new(n - nj, 2) - Rational::from_integer(before);
            before += nj;
            value
        })
        .collect()
}

/// ρ_B = ((n−1)/2, (n−3)/2, …, (1−n)/2).
pub fn rho_borel(n: usize) -> Vec<Rational> {
    let n = n as i64;
    (0..n).map(|i| Rational::new(n - 1 - 2 * i, 2)).collect()
}

/// ρ_P repeated nⱼ times within block j.
pub fn rho_parabolic_expanded(partition: &Partition) -> Vec<Rational> {
    expand_blocks(partition, &rho_parabolic(partition))
}

/// Concatenation of the Borel shifts of the individual blocks.
pub fn rho_blocks(partition: &Partition) -> Vec<Rational> {
    partition.parts().iter().flat_map(|&nj| rho_borel(nj)).collect()
}

/// Repeats the j-th entry nⱼ times.
pub fn expand_blocks<T: Clone>(partition: &Partition, per_block: &[T]) -> Vec<T> {
    partition
        .parts()
        .iter()
        .zip(per_block)
        .flat_map(|(&nj, x)| std::iter::repeat_n(x.clone(), nj))
        .collect()
}

/// Point s = (s₁, …, s_r) on the hyperplane Σ nᵢsᵢ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    partition: Partition,
    values: Vec<Complex64>,
}

impl SpectralPoint {
    /// Checks the constraint to within [`CONSTRAINT_TOL`] (relative to the scale of s).
    pub fn new(partition: &Partition, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != partition.r() {
            return Err(Error::Dimension { expected: partition.r(), found: values.len() });
        }
        let weighted: Complex64 =
            partition.parts().iter().zip(&values).map(|(&n, s)| s * n as f64).sum();
        let scale = values.iter().map(|s| s.norm()).fold(1.0, f64::max);
        if weighted.norm() > CONSTRAINT_TOL * scale {
            return Err(Error::Constraint { residual: weighted.norm() });
        }
        Ok(Self { partition: partition.clone(), values })
    }

    /// Solves for s_r from s₁, …, s_{r−1} so the constraint holds exactly.
    pub fn solve_last(partition: &Partition, head: &[Complex64]) -> Result<Self> {
        let r = partition.r();
        if head.len() + 1 != r {
            return Err(Error::Dimension { expected: r - 1, found: head.len() });
        }
        let weighted: Complex64 =
            partition.parts().iter().zip(head).map(|(&n, s)| s * n as f64).sum();
        let last = -weighted / partition.parts()[r - 1] as f64;
        let mut values = head.to_vec();
        values.push(last);
        Ok(Self { partition: partition.clone(), values })
    }

    /// Accepts either r values (checked) or r − 1 values (last one solved).
    pub fn from_values(partition: &Partition, values: &[Complex64]) -> Result<Self> {
        if values.len() + 1 == partition.r() {
            Self::solve_last(partition, values)
        } else {
            Self::new(partition, values.to_vec())
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// σs together with σP.
    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        Ok(Self {
            partition: self.partition.permuted(sigma)?,
            values: sigma.apply(&self.values)?,
        })
    }

    /// s + ρ_P as complex numbers.
    pub fn shifted_by_rho(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .zip(rho_parabolic(&self.partition))
            .map(|(s, rho)| s + rational_to_f64(rho))
            .collect()
    }
}

pub fn rational_to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Langlands parameter α = (α₁, …, α_n) with Σαᵢ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanglandsParameter {
    entries: Vec<Complex64>,
}

impl LanglandsParameter {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        let sum: Complex64 = entries.iter().sum();
        let scale = entries.iter().map(|a| a.norm()).fold(1.0, f64::max);
        if sum.norm() > CONSTRAINT_TOL * scale {
            return Err(Error::Constraint { residual: sum.norm() });
        }
        Ok(Self { entries })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        Ok(Self { entries: sigma.apply(&self.entries)? })
    }

    /// True when Re(αᵢ − α_{i+1}) > 0 for every i.
    pub fn in_jacquet_cone(&self) -> bool {
        self.entries.windows(2).all(|w| (w[0] - w[1]).re > 0.0)
    }
}

/// Flattened parameter (…, α_{j,k} + sⱼ, …) in block order, generic over the scalar.
///
/// `block_params[j]` must have length nⱼ; a degree-one block uses `[0]`.
pub fn langlands_parameter_generic<T>(
    partition: &Partition,
    block_params: &[Vec<T>],
    s: &[T],
) -> Result<Vec<T>>
where
    T: Clone + Add<Output = T>,
{
    if block_params.len() != partition.r() {
        return Err(Error::FormMismatch(format!(
            "{} block parameters for {} blocks",
            block_params.len(),
            partition.r()
        )));
    }
    if s.len() != partition.r() {
        return Err(Error::Dimension { expected: partition.r(), found: s.len() });
    }
    let mut out = Vec::with_capacity(partition.n());
    for ((params, &nj), sj) in block_params.iter().zip(partition.parts()).zip(s) {
        if params.len() != nj {
            return Err(Error::FormMismatch(format!(
                "block of size {nj} given a parameter of length {}",
                params.len()
            )));
        }
        out.extend(params.iter().map(|a| a.clone() + sj.clone()));
    }
    Ok(out)
}

/// Exact version used by the ρ-identity checks.
pub fn langlands_parameter_exact(
    partition: &Partition,
    block_params: &[Vec<Rational>],
    s: &[Rational],
) -> Result<Vec<Rational>> {
    langlands_parameter_generic(partition, block_params, s)
}

/// Checks ρ_Φ + ρ_P* = ρ_B exactly.
pub fn rho_identity_holds(partition: &Partition) -> bool {
    let lhs: Vec<Rational> = rho_blocks(partition)
        .into_iter()
        .zip(rho_parabolic_expanded(partition))
        .map(|(a, b)| a + b)
        .collect();
    lhs == rho_borel(partition.n())
}

/// Checks the exponent matching α_Φ + ρ_Φ + s* + ρ_P* = α(s) + ρ_B exactly.
pub fn exponent_matching_holds(
    partition: &Partition,
    block_params: &[Vec<Rational>],
    s: &[Rational],
) -> Result<bool> {
    let alpha = langlands_parameter_exact(partition, block_params, s)?;
    let flat_forms: Vec<Rational> = block_params.iter().flatten().copied().collect();
    let s_star = expand_blocks(partition, s);
    let lhs = flat_forms
        .iter()
        .zip(rho_blocks(partition))
        .zip(s_star)
        .zip(rho_parabolic_expanded(partition))
        .map(|(((a, rb), sj), rp)| *a + rb + sj + rp);
    let rhs = alpha.iter().zip(rho_borel(partition.n())).map(|(a, r)| *a + r);
    Ok(lhs.eq(rhs))
}

/// Sum of entries, exact.
pub fn exact_sum(xs: &[Rational]) -> Rational {
    xs.iter().fold(Rational::zero(), |acc, x| acc + x)
}

/// Real n×n matrix with nonzero determinant, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    n: usize,
    entries: Vec<f64>,
}

impl GroupElement {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension { expected: n * n, found: entries.len() });
        }
        let g = Self { n, entries };
        let det = g.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        Ok(g)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, found: rows.iter().map(Vec::len).max().unwrap_or(0) });
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, &x) in d.iter().enumerate() {
            entries[i * n + i] = x;
        }
        Self::new(n, entries)
    }

    /// x · diag(y₁⋯y_{n−1}, …, y₁, 1), the normal form of a point of the
    /// generalized upper half plane.
    pub fn from_coords(coords: &IwasawaCoords) -> Self {
        let n = coords.n();
        let diag = coords.diagonal();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                entries[i * n + j] = coords.x(i, j) * diag[j];
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|x| x * c).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for i in col + 1..n {
                let factor = a[i * n + col] / p;
                for j in col..n {
                    a[i * n + j] -= factor * a[col * n + j];
                }
            }
        }
        det
    }
}

/// Unipotent coordinates x_{i,j} (i < j) and y₁, …, y_{n−1} of a point
/// g = x · diag(y₁⋯y_{n−1}, …, y₁, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaCoords {
    n: usize,
    /// Full unit upper-triangular matrix, row-major.
    x: Vec<f64>,
    y: Vec<f64>,
}

impl IwasawaCoords {
    /// `x` lists the strictly upper entries row by row: x₁₂, x₁₃, …, x_{n−1,n}.
    pub fn new(n: usize, upper: &[f64], y: &[f64]) -> Result<Self> {
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::Dimension { expected: n * (n - 1) / 2, found: upper.len() });
        }
        if y.len() + 1 != n {
            return Err(Error::Dimension { expected: n - 1, found: y.len() });
        }
        if y.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::Domain("y-coordinates must be positive".into()));
        }
        let mut x = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            x[i * n + i] = 1.0;
            for j in i + 1..n {
                x[i * n + j] = upper[k];
                k += 1;
            }
        }
        Ok(Self { n, x, y: y.to_vec() })
    }

    /// Pure y-coordinates with x = I.
    pub fn diagonal_point(y: &[f64]) -> Result<Self> {
        let n = y.len() + 1;
        Self::new(n, &vec![0.0; n * (n - 1) / 2], y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n + j]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Strictly upper entries row by row.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n;
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.x(i, j)).collect()
    }

    /// Diagonal (y₁⋯y_{n−1}, …, y₁, 1).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![1.0; n];
        for i in (0..n - 1).rev() {
            d[i] = d[i + 1] * self.y[n - 2 - i];
        }
        d
    }
}

/// Result of g = x · y · d · k.
#[derive(Clone, Debug, PartialEq)]
pub struct Iwasawa {
    pub coords: IwasawaCoords,
    pub orthogonal: GroupElement,
    pub scale: f64,
}

/// Iwasawa decomposition by Gram–Schmidt on the rows, bottom row first.
///
/// The triangular factor keeps a positive diagonal; a negative determinant is
/// absorbed by the orthogonal factor.
pub fn iwasawa(g: &GroupElement) -> Result<Iwasawa> {
    let (r, q) = upper_times_orthogonal(g)?;
    let n = g.n();
    let d_last = r[(n - 1) * n + (n - 1)];
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            x[i * n + j] = r[i * n + j] / r[j * n + j];
        }
    }
    let y = (1..n).map(|k| r[(n - 1 - k) * n + (n - 1 - k)] / r[(n - k) * n + (n - k)]).collect();
    Ok(Iwasawa {
        coords: IwasawaCoords { n, x, y },
        orthogonal: GroupElement { n, entries: q },
        scale: d_last,
    })
}

/// g = R·Q with R upper triangular (positive diagonal) and Q orthogonal.
fn upper_times_orthogonal(g: &GroupElement) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.n();
    let mut q = g.entries().to_vec();
    let mut r = vec![0.0; n * n];
    for i in (0..n).rev() {
        // Two passes of modified Gram–Schmidt for stability.
        for _ in 0..2 {
            for k in i + 1..n {
                let dot: f64 = (0..n).map(|c| q[i * n + c] * q[k * n + c]).sum();
                r[i * n + k] += dot;
                for c in 0..n {
                    q[i * n + c] -= dot * q[k * n + c];
                }
            }
        }
        let norm = (0..n).map(|c| q[i * n + c].powi(2)).sum::<f64>().sqrt();
        let scale = g.row(i).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm <= 1e-14 * scale || norm == 0.0 {
            return Err(Error::Singular);
        }
        r[i * n + i] = norm;
        for c in 0..n {
            q[i * n + c] /= norm;
        }
    }
    Ok((r, q))
}

/// Recomposes x · y · d · k.
pub fn recompose(decomp: &Iwasawa) -> GroupElement {
    let xy = GroupElement::from_coords(&decomp.coords).scaled(decomp.scale);
    xy.mul(&decomp.orthogonal).expect("square factors of equal size")
}

/// |g|^s_P = ∏ |det 𝔪ᵢ|^{sᵢ}, evaluated through the Iwasawa decomposition.
pub fn power_function(partition: &Partition, s: &SpectralPoint, g: &GroupElement) -> Result<Complex64> {
    if g.n() != partition.n() {
        return Err(Error::Dimension { expected: partition.n(), found: g.n() });
    }
    if s.partition() != partition {
        return Err(Error::FormMismatch("spectral point belongs to another partition".into()));
    }
    let (r, _) = upper_times_orthogonal(g)?;
    let n = g.n();
    let log_diag: Vec<f64> = (0..n).map(|i| r[i * n + i].ln()).collect();
    Ok(power_from_log_diagonal(partition, s.values(), &log_diag))
}

/// Power function on a matrix whose triangular part has diagonal exp(log_diag).
pub fn power_from_log_diagonal(partition: &Partition, s: &[Complex64], log_diag: &[f64]) -> Complex64 {
    let exponent: Complex64 = (0..partition.r())
        .map(|j| {
            let block: f64 = partition.block_range(j).map(|i| log_diag[i]).sum();
            s[j] * block
        })
        .sum();
    exponent.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn rho_examples() {
        let p = |v: Vec<usize>| Partition::new(v).unwrap();
        assert_eq!(rho_parabolic(&p(vec![1, 1, 1])), vec![q(1, 1), q(0, 1), q(-1, 1)]);
        assert_eq!(rho_parabolic(&p(vec![2, 2])), vec![q(1, 1), q(-1, 1)]);
        assert_eq!(rho_parabolic(&p(vec![1, 2])), vec![q(1, 1), q(-1, 2)]);
        assert_eq!(rho_parabolic(&p(vec![2, 1])), vec![q(1, 2), q(-1, 1)]);
        assert_eq!(rho_borel(2), vec![q(1, 2), q(-1, 2)]);
        assert_eq!(rho_borel(5), [2, 1, 0, -1, -2].map(|k| q(k, 1)).to_vec());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![1, 0]).is_err());
        assert_eq!("2,1".parse::<Partition>().unwrap().n(), 3);
        assert_eq!(Partition::compositions(4).len(), 8);
    }

    #[test]
    fn langlands_examples() {
        let p12 = Partition::new(vec![1, 2]).unwrap();
        let (a1, a2) = (q(1, 3), q(-1, 3));
        let s = [q(1, 1), q(-1, 2)];
        let alpha = langlands_parameter_exact(&p12, &[vec![q(0, 1)], vec![a1, a2]], &s).unwrap();
        assert_eq!(alpha, vec![s[0], s[1] + a1, s[1] + a2]);
        assert!(langlands_parameter_exact(&p12, &[vec![a1, a2], vec![q(0, 1)]], &s).is_err());
    }

    #[test]
    fn iwasawa_identity_and_diag() {
        let d = iwasawa(&GroupElement::identity(3)).unwrap();
        assert_eq!(d.coords.y(), &[1.0, 1.0]);
        let d = iwasawa(&GroupElement::diagonal(&[2.0, 1.0]).unwrap()).unwrap();
        assert!((d.coords.y()[0] - 2.0).abs() < 1e-15);
        assert_eq!(d.coords.x(0, 1), 0.0);
    }

    #[test]
    fn negative_determinant_goes_to_orthogonal_factor() {
        let g = GroupElement::diagonal(&[-3.0, 1.0, 2.0]).unwrap();
        let d = iwasawa(&g).unwrap();
        assert!(d.scale > 0.0);
        assert!(d.orthogonal.determinant() < 0.0);
        let back = recompose(&d);
        for (a, b) in back.entries().iter().zip(g.entries()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn power_function_examples() {
        let (y1, y2, y3) = (1.7, 0.6, 2.3);
        let p12 = Partition::new(vec![1, 2]).unwrap();
        let s = SpectralPoint::solve_last(&p12, &[Complex64::new(0.4, 0.3)]).unwrap();
        let g = GroupElement::from_coords(&IwasawaCoords::new(3, &[0.3, -1.1, 0.8], &[y1, y2]).unwrap());
        let (s1, s2) = (s.values()[0], s.values()[1]);
        let expected = (s1 + s2) * y1.ln() + s1 * y2.ln();
        let got = power_function(&p12, &s, &g).unwrap();
        assert!((got - expected.exp()).norm() < 1e-12 * got.norm());

        let p22 = Partition::new(vec![2, 2]).unwrap();
        let s = SpectralPoint::solve_last(&p22, &[Complex64::new(-0.2, 1.1)]).unwrap();
        let g = GroupElement::from_coords(&IwasawaCoords::diagonal_point(&[y1, y2, y3]).unwrap());
        let (s1, s2) = (s.values()[0], s.values()[1]);
        let expected = ((s1 * 2.0 + s2) * y1.ln() + s1 * 2.0 * y2.ln() + s1 * y3.ln()).exp();
        let got = power_function(&p22, &s, &g).unwrap();
        assert!((got - expected).norm() < 1e-12 * got.norm());
    }
}
