//! Completed Whittaker functions for GL(2) and GL(3), and a direct
//! Jacquet-integral evaluation used as an independent check inside its
//! convergence cone.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, CancelToken, Exec};
use crate::parabolic::{iwasawa, GroupElement, LanglandsParameter};
use crate::specfun::{bessel_k, gamma};

/// W(y) = GL2_NORMALIZATION · √y K_ν(2πy).
///
/// Fixed by matching the Jacquet integral: at α = (ν, −ν) the completed
/// integral equals 2√y K_ν(2πy) exactly.
pub const GL2_NORMALIZATION: f64 = 2.0;

/// Constant in front of the double K-Bessel integral for GL(3).
///
/// Measured against the Jacquet integral at points in the cone, which give the
/// ratio 4 to eight digits; the representation is taken at −α.
pub const GL3_NORMALIZATION: f64 = 4.0;

/// A point (α, y) at which a completed Whittaker function is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhittakerPoint {
    alpha: LanglandsParameter,
    y: Vec<f64>,
}

impl WhittakerPoint {
    pub fn new(alpha: LanglandsParameter, y: Vec<f64>) -> Result<Self> {
        if y.len() + 1 != alpha.n() {
            return Err(Error::Dimension { expected: alpha.n() - 1, found: y.len() });
        }
        if y.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("Whittaker y-coordinates must be positive".into()));
        }
        Ok(Self { alpha, y })
    }

    pub fn alpha(&self) -> &LanglandsParameter {
        &self.alpha
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn evaluate(&self) -> Result<Complex64> {
        whittaker(&self.alpha, &self.y)
    }
}

/// 2√y K_ν(2πy).
pub fn whittaker_gl2(nu: Complex64, y: f64) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y must be positive, got {y}")));
    }
    Ok(GL2_NORMALIZATION * y.sqrt() * bessel_k(nu, 2.0 * PI * y)?)
}

/// Quadrature controls for [`whittaker_gl3_with`].
#[derive(Clone, Debug)]
pub struct Gl3Options {
    /// Relative change between successive step halvings that ends refinement.
    pub tolerance: f64,
    /// Starting step of the trapezoid rule in the logarithmic variable.
    pub initial_step: f64,
    /// Offset of the grid, as a fraction of the starting step.
    pub grid_offset: f64,
    pub max_levels: usize,
    pub cancel: Option<CancelToken>,
}

impl Default for Gl3Options {
    fn default() -> Self {
        Self { tolerance: 1e-10, initial_step: 0.5, grid_offset: 0.0, max_levels: 12, cancel: None }
    }
}

/// Completed GL(3) Whittaker function at diag(y₁y₂, y₁, 1).
pub fn whittaker_gl3(alpha: &LanglandsParameter, y1: f64, y2: f64) -> Result<Complex64> {
    whittaker_gl3_with(alpha, y1, y2, &Gl3Options::default())
}

/// Double K-Bessel representation
///
/// W = 4 y₁y₂ (y₁/y₂)^{α₃/2} ∫ K_ν(2πy₁√(1+e^{−τ})) K_ν(2πy₂√(1+e^{τ})) e^{−3α₃τ/4} dτ
///
/// with ν = (α₁ − α₂)/2, integrated by a trapezoid rule refined by halving.
pub fn whittaker_gl3_with(alpha: &LanglandsParameter, y1: f64, y2: f64, options: &Gl3Options) -> Result<Complex64> {
    if alpha.n() != 3 {
        return Err(Error::Dimension { expected: 3, found: alpha.n() });
    }
    if !(y1 > 0.0 && y2 > 0.0) {
        return Err(Error::Domain("Whittaker y-coordinates must be positive".into()));
    }
    let a = alpha.entries();
    let nu = (a[0] - a[1]) / 2.0;
    let a3 = a[2];
    let integrand = |tau: f64| -> Result<Complex64> {
        let left = bessel_k(nu, 2.0 * PI * y1 * (1.0 + (-tau).exp()).sqrt())?;
        let right = bessel_k(nu, 2.0 * PI * y2 * (1.0 + tau.exp()).sqrt())?;
        Ok(left * right * (-0.75 * a3 * tau).exp())
    };

    // Past these points both Bessel factors have decayed by e^{-45} relative to their bulk.
    let cut = 45.0 + PI * nu.im.abs() / 2.0 + nu.re.abs();
    let slope = 0.75 * a3.re.abs();
    let edge = |y: f64, dir: f64| -> f64 {
        let mut t: f64 = 1.0;
        while 2.0 * PI * y * (1.0 + t.exp()).sqrt() - slope * t < cut {
            t += 0.5;
        }
        dir * t
    };
    let (lo, hi) = (edge(y1, -1.0), edge(y2, 1.0));

    let mut h = options.initial_step;
    let count = ((hi - lo) / h).ceil() as usize;
    let start = lo - options.grid_offset * h;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k in 0..=count + 1 {
        let v = integrand(start + k as f64 * h)?;
        sum += v;
        abs_sum += v.norm();
    }
    let mut points = count + 1;
    let mut estimate = sum * h;
    let mut discrepancy = f64::INFINITY;
    for level in 0..options.max_levels {
        if options.cancel.as_ref().is_some_and(CancelToken::is_cancelled) {
            return Err(Error::Cancelled);
        }
        let mut mids = Complex64::new(0.0, 0.0);
        for k in 0..points {
            let v = integrand(start + (k as f64 + 0.5) * h)?;
            mids += v;
            abs_sum += v.norm();
        }
        sum += mids;
        points *= 2;
        h /= 2.0;
        let refined = sum * h;
        discrepancy = (refined - estimate).norm();
        estimate = refined;
        let floor = 64.0 * f64::EPSILON * abs_sum * h;
        if level >= 1 && (discrepancy <= options.tolerance * refined.norm() || discrepancy <= floor) {
            let prefactor = GL3_NORMALIZATION * y1 * y2 * (a3 / 2.0 * (y1 / y2).ln()).exp();
            return Ok(prefactor * estimate);
        }
    }
    Err(Error::Tolerance {
        what: "GL(3) Whittaker quadrature",
        estimate,
        discrepancy,
        tolerance: options.tolerance,
    })
}

/// Completed Whittaker function on the diagonal point with the given y.
pub fn whittaker(alpha: &LanglandsParameter, y: &[f64]) -> Result<Complex64> {
    match (alpha.n(), y) {
        (2, &[y1]) => whittaker_gl2((alpha.entries()[0] - alpha.entries()[1]) / 2.0, y1),
        (3, &[y1, y2]) => whittaker_gl3(alpha, y1, y2),
        (2 | 3, _) => Err(Error::Dimension { expected: alpha.n() - 1, found: y.len() }),
        (n, _) => Err(Error::Domain(format!("Whittaker functions are implemented for n = 2, 3, not {n}"))),
    }
}

/// W(g) = ψ(x) W(y) for g = x·y·k·(scalar), with ψ(x) = e^{2πi Σ x_{i,i+1}}.
pub fn whittaker_at(alpha: &LanglandsParameter, g: &GroupElement) -> Result<Complex64> {
    if g.n() != alpha.n() {
        return Err(Error::Dimension { expected: alpha.n(), found: g.n() });
    }
    let decomposition = iwasawa(g)?;
    let coords = &decomposition.coords;
    let phase: f64 = (0..g.n() - 1).map(|i| coords.x(i, i + 1)).sum();
    Ok(Complex64::from_polar(1.0, 2.0 * PI * phase) * whittaker(alpha, coords.y())?)
}

/// Controls for [`jacquet_oracle_with`].
#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub tolerance: f64,
    pub exec: Exec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, exec: Exec::default() }
    }
}

/// Jacquet integral with its Gamma prefactor, for α in the convergence cone.
pub fn jacquet_oracle(alpha: &LanglandsParameter, y: &[f64]) -> Result<Complex64> {
    jacquet_oracle_with(alpha, y, &OracleOptions::default())
}

/// Evaluates the Jacquet integral by writing each power of a norm as a
/// Gaussian average, integrating the unipotent variables in closed form and
/// doing the remaining integrals on two grids; the grids must agree to the
/// requested tolerance.
pub fn jacquet_oracle_with(alpha: &LanglandsParameter, y: &[f64], options: &OracleOptions) -> Result<Complex64> {
    if !alpha.in_jacquet_cone() {
        return Err(Error::Domain("Jacquet integral needs Re(αᵢ − αᵢ₊₁) > 0".into()));
    }
    if y.len() + 1 != alpha.n() {
        return Err(Error::Dimension { expected: alpha.n() - 1, found: y.len() });
    }
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("y-coordinates must be positive".into()));
    }
    let (coarse, fine) = match alpha.n() {
        2 => (jacquet_gl2(alpha.entries(), y[0], 0.25)?, jacquet_gl2(alpha.entries(), y[0], 0.125)?),
        3 => (
            jacquet_gl3(alpha.entries(), y[0], y[1], Gl3Grid::COARSE, options.exec)?,
            jacquet_gl3(alpha.entries(), y[0], y[1], Gl3Grid::FINE, options.exec)?,
        ),
        n => return Err(Error::Domain(format!("Jacquet oracle covers n = 2, 3, not {n}"))),
    };
    let discrepancy = (fine - coarse).norm();
    if discrepancy > options.tolerance * fine.norm() {
        return Err(Error::Tolerance { what: "Jacquet oracle", estimate: fine, discrepancy, tolerance: options.tolerance });
    }
    Ok(fine)
}

/// ∏_{j<k} Γ((1+αⱼ−α_k)/2) π^{−(1+αⱼ−α_k)/2}.
fn gamma_prefactor(alpha: &[Complex64]) -> Result<Complex64> {
    let mut p = Complex64::new(1.0, 0.0);
    for j in 0..alpha.len() {
        for k in j + 1..alpha.len() {
            let x = (1.0 + alpha[j] - alpha[k]) / 2.0;
            p *= gamma(x)? * (-x * PI.ln()).exp();
        }
    }
    Ok(p)
}

/// GL(2): the x-integral of (x² + y²)^{−P} e^{−2πix} after Gaussian averaging
/// leaves ∫ λ^{P−3/2} e^{−λy² − π²/λ} dλ, done in u = ln λ.
fn jacquet_gl2(alpha: &[Complex64], y: f64, step: f64) -> Result<Complex64> {
    let p = (1.0 + alpha[0] - alpha[1]) / 2.0;
    let centre = (PI / y).ln();
    let (lo, hi) = (centre - 8.0, centre + 8.0);
    let count = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / count as f64;
    let integral: Complex64 = (0..=count)
        .map(|k| {
            let u = lo + k as f64 * h;
            ((p - 0.5) * u - y * y * u.exp() - PI * PI * (-u).exp()).exp()
        })
        .sum::<Complex64>()
        * h;
    let normalization = PI.sqrt() / gamma(p)? * ((alpha[0] + 0.5) * y.ln()).exp();
    Ok(gamma_prefactor(alpha)? * normalization * integral)
}

#[derive(Clone, Copy)]
struct Gl3Grid {
    /// Nodes per logarithmic Gaussian parameter.
    nodes: usize,
    range: f64,
    /// Inner step is the distance to the branch point divided by this.
    kappa: f64,
    /// Contour shift as a fraction of the branch-point height.
    cap: f64,
}

impl Gl3Grid {
    // The two grids differ in every parameter, so their agreement bounds the error.
    const COARSE: Self = Self { nodes: 61, range: 9.0, kappa: 3.0, cap: 0.7 };
    const FINE: Self = Self { nodes: 81, range: 11.0, kappa: 4.0, cap: 0.8 };
}

/// Slices whose integrand stays below e^{−40} of the largest are skipped.
const SLICE_LOG_CUT: f64 = 40.0;

/// GL(3): two Gaussian parameters λ₁ = e^{t₁}, λ₂ = e^{t₂} on a logarithmic
/// grid and one remaining unipotent variable b on the shifted line b − iη.
///
/// The b-integrand has branch points at ±i√(S/λ₂), S = λ₁ + λ₂y₁²; the step
/// on each line is a fixed fraction of their distance to the contour.
fn jacquet_gl3(alpha: &[Complex64], y1: f64, y2: f64, grid: Gl3Grid, exec: Exec) -> Result<Complex64> {
    let p = (1.0 + alpha[1] - alpha[2]) / 2.0;
    let q = (1.0 + alpha[0] - alpha[1]) / 2.0;
    let h = 2.0 * grid.range / (grid.nodes - 1) as f64;
    let ts: Vec<f64> = (0..grid.nodes).map(|k| -grid.range + k as f64 * h).collect();
    let (y1s, y2s) = (y1 * y1, y2 * y2);

    let line = |t1: f64, t2: f64| {
        let (l1, l2) = (t1.exp(), t2.exp());
        let s = l1 + l2 * y1s;
        let branch = (s / l2).sqrt();
        let eta = (PI / (l2 * y1s * y2s)).min(grid.cap * branch);
        let width = 14.0 / (y1 * y2 * l2.sqrt()) + 6.0;
        let step = (0.2f64).min((branch - eta) / grid.kappa);
        let weight = p * t1 + q * t2;
        let f = move |x: f64| {
            let b = Complex64::new(x, -eta);
            let b2 = b * b;
            let k0 = l1 * y1s * y2s + l2 * y1s * (y2s * b2 + y1s * y2s);
            let scaled = l1 * y1s * (s + l2 * b2);
            let phase = Complex64::new(0.0, -2.0 * PI) * b;
            (phase - k0 - PI * PI * s / scaled + weight).exp() * PI / scaled.sqrt()
        };
        (f, width, step)
    };
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t1| ts.iter().map(move |&t2| (t1, t2))).collect();
    let sizes = par::map_slice(exec, &pairs, |&(t1, t2)| {
        let (f, width, _) = line(t1, t2);
        let peak = (0..=64).map(|k| f(-width + k as f64 * width / 32.0).norm()).fold(0.0, f64::max);
        (peak * width).ln()
    });
    let top = sizes.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<(f64, f64)> =
        pairs.iter().zip(&sizes).filter(|(_, &size)| size >= top - SLICE_LOG_CUT).map(|(&pair, _)| pair).collect();
    let total = par::sum_slice(exec, &kept, |&(t1, t2)| {
        let (f, width, step) = line(t1, t2);
        let m = (width / step).ceil() as usize;
        let dx = width / m as f64;
        (0..=2 * m).map(|k| f(-width + k as f64 * dx)).sum::<Complex64>() * dx
    });
    let normalization = ((alpha[0] + 1.0) * (y1s * y2).ln()).exp() / (gamma(p)? * gamma(q)?);
    Ok(gamma_prefactor(alpha)? * normalization * total * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_half_order() {
        let w = whittaker_gl2(Complex64::new(0.5, 0.0), 1.0).unwrap();
        let expected = 2.0 * (PI / (4.0 * PI)).sqrt() * (-2.0 * PI).exp();
        assert!((w.re - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn gl2_oracle_matches() {
        let alpha = LanglandsParameter::from_real(&[1.0, -1.0]).unwrap();
        let oracle = jacquet_oracle(&alpha, &[1.0]).unwrap();
        let w = whittaker(&alpha, &[1.0]).unwrap();
        assert!((oracle - w).norm() < 1e-6 * w.norm(), "{oracle} vs {w}");
        let outside = LanglandsParameter::from_real(&[-1.0, 1.0]).unwrap();
        assert!(matches!(jacquet_oracle(&outside, &[1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn cancellation_is_honoured() {
        let token = CancelToken::new();
        token.cancel();
        let options = Gl3Options { cancel: Some(token), ..Gl3Options::default() };
        let alpha = LanglandsParameter::from_real(&[1.0, 0.0, -1.0]).unwrap();
        assert_eq!(whittaker_gl3_with(&alpha, 1.0, 1.0, &options), Err(Error::Cancelled));
    }
}
