//! Hecke eigenvalues of Eisenstein series: the twisted divisor sums
//! λ(m) = Σ_{m₁⋯m_r = m} ∏ λ_{φⱼ}(mⱼ) mⱼ^{sⱼ}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factorize};
use crate::error::{Error, Result};
use crate::forms::{hecke_prime_powers, FormSet};
use crate::parabolic::{Partition, Permutation, SpectralPoint};

/// σ_s(m) = Σ_{d | m} d^s.
pub fn divisor_sigma(s: Complex64, m: u64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Domain("σ_s(m) needs m ≥ 1".into()));
    }
    Ok(divisors(m).into_iter().map(|d| (s * (d as f64).ln()).exp()).sum())
}

fn check_inputs(partition: &Partition, forms: &FormSet, s: &SpectralPoint, m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("Hecke eigenvalues start at m = 1".into()));
    }
    if s.partition() != partition {
        return Err(Error::FormMismatch("spectral point belongs to another partition".into()));
    }
    FormSet::new(partition, forms.forms().to_vec()).map(|_| ())
}

/// Eigenvalue λ(m, s) of the Eisenstein series induced from `forms`.
///
/// Each prime power pᵉ ∥ m contributes the sum over exponent compositions
/// e₁ + … + e_r = e, accumulated one block at a time.
pub fn eis_hecke_eigenvalue(partition: &Partition, forms: &FormSet, s: &SpectralPoint, m: u64) -> Result<Complex64> {
    check_inputs(partition, forms, s, m)?;
    factorize(m).into_iter().try_fold(Complex64::new(1.0, 0.0), |acc, (p, e)| {
        Ok(acc * local_factor(forms, s.values(), p, e as usize)?)
    })
}

fn local_factor(forms: &FormSet, s: &[Complex64], p: u64, e: usize) -> Result<Complex64> {
    let ln_p = (p as f64).ln();
    // partial[k] = sum over compositions of k among the blocks seen so far
    let mut partial = vec![Complex64::new(0.0, 0.0); e + 1];
    partial[0] = Complex64::new(1.0, 0.0);
    for (form, &sj) in forms.forms().iter().zip(s) {
        let lambda: Vec<Complex64> = if form.is_trivial() {
            vec![Complex64::new(1.0, 0.0); e + 1]
        } else {
            let lp = *form.hecke().get(&p).ok_or(Error::MissingPrime(p))?;
            hecke_prime_powers(lp, e as u32)
        };
        let local: Vec<Complex64> =
            (0..=e).map(|k| lambda[k] * (sj * (k as f64 * ln_p)).exp()).collect();
        partial = (0..=e)
            .map(|k| (0..=k).map(|i| partial[k - i] * local[i]).sum())
            .collect();
    }
    Ok(partial[e])
}

/// Consecutive index groups I₁, …, I_N of blocks sharing a form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidPartition(format!("block sizes must be positive: {sizes:?}")));
        }
        Ok(Self { sizes })
    }

    /// One group per maximal run of equal forms.
    ///
    /// Equal forms must sit in consecutive blocks.
    pub fn from_forms(forms: &FormSet) -> Result<Self> {
        let mut sizes: Vec<usize> = Vec::new();
        let mut names: Vec<&str> = Vec::new();
        for f in forms.forms() {
            if names.last() == Some(&f.name()) {
                *sizes.last_mut().expect("nonempty") += 1;
            } else if names.contains(&f.name()) {
                return Err(Error::FormMismatch(format!("form {} appears in non-consecutive blocks", f.name())));
            } else {
                names.push(f.name());
                sizes.push(1);
            }
        }
        Self::new(sizes)
    }

    /// Every block in its own group.
    pub fn singletons(r: usize) -> Result<Self> {
        Self::new(vec![1; r])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn r(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    /// Group index of every block.
    pub fn labels(&self) -> Vec<usize> {
        self.sizes.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k)).collect()
    }

    pub fn group(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.sizes[..j].iter().sum();
        start..start + self.sizes[j]
    }
}

/// Divisor-sum data: partition, forms and the grouping of equal forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorSumSpec {
    partition: Partition,
    forms: FormSet,
    blocks: BlockStructure,
}

impl DivisorSumSpec {
    /// Equal forms must occupy consecutive blocks; forms in different groups differ.
    pub fn new(partition: Partition, forms: FormSet) -> Result<Self> {
        let forms = FormSet::new(&partition, forms.forms().to_vec())?;
        let blocks = BlockStructure::from_forms(&forms)?;
        Ok(Self { partition, forms, blocks })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn forms(&self) -> &FormSet {
        &self.forms
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    pub fn eigenvalue(&self, s: &SpectralPoint, m: u64) -> Result<Complex64> {
        eis_hecke_eigenvalue(&self.partition, &self.forms, s, m)
    }
}

/// Outcome of comparing λ(m, s) with its permuted counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub holds: bool,
    pub original: Complex64,
    pub permuted: Complex64,
    pub residual: f64,
}

/// Relative agreement needed for [`check_permutation_covariance`].
pub const COVARIANCE_TOL: f64 = 1e-12;

/// Compares λ(m) for (P, Φ, s) with λ(m) for (σP, σΦ, σs).
pub fn check_permutation_covariance(
    partition: &Partition,
    forms: &FormSet,
    s: &SpectralPoint,
    m: u64,
    sigma: &Permutation,
) -> Result<Covariance> {
    let original = eis_hecke_eigenvalue(partition, forms, s, m)?;
    let permuted_partition = partition.permuted(sigma)?;
    let permuted = eis_hecke_eigenvalue(&permuted_partition, &forms.permuted(sigma)?, &s.permuted(sigma)?, m)?;
    let residual = (original - permuted).norm() / original.norm().max(1.0);
    Ok(Covariance { holds: residual <= COVARIANCE_TOL, original, permuted, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(divisor_sigma(c(1.0), 12).unwrap(), c(28.0));
        assert_eq!(divisor_sigma(c(0.0), 12).unwrap(), c(6.0));
    }

    #[test]
    fn borel_gl2_is_twisted_sigma() {
        let p = Partition::borel(2).unwrap();
        let forms = FormSet::trivial(&p).unwrap();
        let s = SpectralPoint::new(&p, vec![c(0.3), c(-0.3)]).unwrap();
        let lam = eis_hecke_eigenvalue(&p, &forms, &s, 12).unwrap();
        let expected: Complex64 = divisors(12)
            .into_iter()
            .map(|d| (0.3 * (d as f64).ln() - 0.3 * ((12 / d) as f64).ln()).exp())
            .map(c)
            .sum();
        assert!((lam - expected).norm() < 1e-13);
    }
}
