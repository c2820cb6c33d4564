//! Parsers for command-line values.

use std::fs;
use std::path::Path;

use eiskit::forms::{mock_maass_form, FormSet, FormSpec};
use eiskit::parabolic::{Partition, Permutation, SpectralPoint};
use num_complex::Complex64;

use crate::Failure;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (exponents allowed in both parts).
pub fn complex(text: &str) -> Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("not a complex number: {text}");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn uint_list(text: &str) -> Result<Vec<u64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("not a non-negative integer: {t}")))
        .collect()
}

pub fn partition(text: &str) -> Result<Partition, String> {
    text.parse::<Partition>().map_err(|e| e.to_string())
}

pub fn permutation(text: &str) -> Result<Permutation, String> {
    let images = uint_list(text)?;
    Permutation::from_one_based(&images.iter().map(|&i| i as usize).collect::<Vec<_>>()).map_err(|e| e.to_string())
}

/// `--s` with r values, or r − 1 values completed by the constraint.
pub fn spectral_point(partition: &Partition, values: &[Complex64]) -> Result<SpectralPoint, Failure> {
    let r = partition.r();
    if values.len() + 1 == r {
        SpectralPoint::solve_last(partition, values).map_err(Failure::usage)
    } else if values.len() == r {
        SpectralPoint::new(partition, values.to_vec()).map_err(Failure::usage)
    } else {
        Err(Failure::Usage(format!("--s needs {} or {} values for partition {partition}, got {}", r - 1, r, values.len())))
    }
}

/// Form tokens: `1` (trivial), `mock:<seed>`, or a path to a JSON form spec.
pub fn forms(partition: &Partition, tokens: Option<&str>) -> Result<FormSet, Failure> {
    let Some(tokens) = tokens else {
        return FormSet::trivial(partition).map_err(Failure::usage);
    };
    let list: Vec<&str> = tokens.split(',').map(str::trim).collect();
    if list.len() != partition.r() {
        return Err(Failure::Usage(format!("--forms needs {} entries for partition {partition}, got {}", partition.r(), list.len())));
    }
    let specs = list
        .iter()
        .zip(partition.parts())
        .map(|(token, &degree)| form(token, degree))
        .collect::<Result<Vec<_>, _>>()?;
    FormSet::new(partition, specs).map_err(Failure::usage)
}

fn form(token: &str, degree: usize) -> Result<FormSpec, Failure> {
    if token == "1" || token == "trivial" {
        return Ok(FormSpec::trivial());
    }
    if let Some(seed) = token.strip_prefix("mock:") {
        let seed: u64 = seed.parse().map_err(|_| Failure::Usage(format!("bad mock seed: {seed}")))?;
        return mock_maass_form(degree, seed).map_err(Failure::usage);
    }
    let text = read(Path::new(token))?;
    FormSpec::from_json(&text).map_err(|e| Failure::Usage(format!("{token}: {e}")))
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(complex("0.5+3i").unwrap(), Complex64::new(0.5, 3.0));
        assert_eq!(complex("1e-3-2e-1i").unwrap(), Complex64::new(1e-3, -0.2));
        assert_eq!(complex("-1-i").unwrap(), Complex64::new(-1.0, -1.0));
        assert!(complex("abc").is_err());
    }
}
