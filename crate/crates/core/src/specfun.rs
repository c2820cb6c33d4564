//! Complex Gamma, Riemann zeta, completed zeta and the K-Bessel function of
//! complex order.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_163e-6,
];

/// B_{2k}/(2k)! for k = 1..=20.
const BERNOULLI_OVER_FACTORIAL: [f64; 20] = [
    8.333_333_333_333_333e-2,
    -1.388_888_888_888_889e-3,
    3.306_878_306_878_307e-5,
    -8.267_195_767_195_767e-7,
    2.087_675_698_786_81e-8,
    -5.284_190_138_687_493e-10,
    1.338_253_653_068_468e-11,
    -3.389_680_296_322_583e-13,
    8.586_062_056_277_845e-15,
    -2.174_868_698_558_062e-16,
    5.509_002_828_360_23e-18,
    -1.395_446_468_581_252_3e-19,
    3.534_707_039_629_467e-21,
    -8.953_517_427_037_547e-23,
    2.267_952_452_337_683e-24,
    -5.744_790_668_872_202e-26,
    1.455_172_475_614_865e-27,
    -3.685_994_940_665_31e-29,
    9.336_734_257_095_045e-31,
    -2.365_022_415_700_63e-32,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Lanczos sum for Re z ≥ 1/2.
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let series = LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(Complex64::new(LANCZOS_COEFFS[0], 0.0), |acc, (i, &c)| acc + c / (z + (i + 1) as f64));
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// log Γ(z). The imaginary part is not continued across branch cuts.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "gamma", location: z });
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        let sin = (PI * z).sin();
        Ok(Complex64::new(PI.ln(), 0.0) - sin.ln() - ln_gamma_right(1.0 - z))
    }
}

/// Γ(z) by the Lanczos approximation with reflection for Re z < 1/2.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "gamma", location: z });
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z).exp())
    } else {
        Ok(PI / ((PI * z).sin() * ln_gamma_right(1.0 - z).exp()))
    }
}

/// 1/Γ(z), zero at the poles of Γ.
pub fn reciprocal_gamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        Complex64::new(0.0, 0.0)
    } else if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        (PI * z).sin() * ln_gamma_right(1.0 - z).exp() / PI
    }
}

/// Truncation knobs for the Euler–Maclaurin zeta sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZetaConfig {
    pub terms: usize,
    pub corrections: usize,
}

impl Default for ZetaConfig {
    fn default() -> Self {
        Self { terms: 50, corrections: 20 }
    }
}

/// ζ(s) by Euler–Maclaurin summation.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    zeta_with(s, ZetaConfig::default())
}

pub fn zeta_with(s: Complex64, config: ZetaConfig) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { function: "zeta", location: s });
    }
    // Direct summation cancels badly for Re s < 0; use the functional equation.
    if s.re < 0.0 {
        let reflected = zeta_with(1.0 - s, config)?;
        let two_pi = 2.0 * PI;
        return Ok((s * two_pi.ln()).exp() / PI * (PI * s / 2.0).sin() * gamma(1.0 - s)? * reflected);
    }
    let n_terms = config.terms.max(2);
    let corrections = config.corrections.min(BERNOULLI_OVER_FACTORIAL.len());
    let big_n = n_terms as f64;
    let head: Complex64 = (1..n_terms).map(|k| (-s * (k as f64).ln()).exp()).sum();
    let n_pow = (-s * big_n.ln()).exp();
    let mut total = head + n_pow * big_n / (s - 1.0) + 0.5 * n_pow;
    // rising = s(s+1)…(s+2k−2), power = N^{−s−2k+1}
    let mut rising = s;
    let mut power = n_pow / big_n;
    for (k, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate().take(corrections) {
        if k > 0 {
            let m = 2.0 * k as f64;
            rising *= (s + m - 1.0) * (s + m);
            power /= big_n * big_n;
        }
        total += b * rising * power;
    }
    Ok(total)
}

/// ζ*(s) = π^{−s/2} Γ(s/2) ζ(s).
pub fn zeta_completed(s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { function: "completed zeta", location: s });
    }
    // At negative even integers Γ(s/2) has a pole cancelled by a trivial zero.
    if s.im == 0.0 && s.re < 0.0 && s.re == s.re.round() && (s.re as i64) % 2 == 0 {
        return zeta_completed(1.0 - s);
    }
    let half = s / 2.0;
    let log_pi_part = -half * PI.ln();
    Ok((log_pi_part + ln_gamma(half)?).exp() * zeta(s)?)
}

/// Crossover from quadrature to the large-argument expansion.
pub const BESSEL_ASYMPTOTIC_FROM: f64 = 30.0;

const BESSEL_REL_TOL: f64 = 1e-14;
const BESSEL_LOG_CUT: f64 = 42.0;
const BESSEL_MAX_LEVELS: usize = 16;

/// K_ν(x) for complex order and real x > 0.
///
/// Uses the representation ½∫ exp(−x cosh t + νt) dt on a line Im t = φ through
/// (or near) the saddle point, with a trapezoid rule refined by halving.
/// For x ≥ 30 the Hankel expansion is used whenever it converges to full precision.
pub fn bessel_k(nu: Complex64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K-Bessel needs x > 0, got {x}")));
    }
    // K_ν = K_{−ν}: evaluate at a fixed representative so the symmetry is exact.
    let nu = if nu.re < 0.0 || (nu.re == 0.0 && nu.im < 0.0) { -nu } else { nu };
    let value = match (x >= BESSEL_ASYMPTOTIC_FROM).then(|| bessel_k_asymptotic(nu, x)).flatten() {
        Some(v) => v,
        None => bessel_k_quadrature(nu, x)?,
    };
    if nu.im == 0.0 {
        Ok(Complex64::new(value.re, 0.0))
    } else {
        Ok(value)
    }
}

/// Hankel expansion; `None` when the terms stop decreasing before full precision.
pub fn bessel_k_asymptotic(nu: Complex64, x: f64) -> Option<Complex64> {
    let mu = 4.0 * nu * nu;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut previous = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        let size = term.norm();
        if size > previous {
            return None;
        }
        sum += term;
        if size <= 1e-17 * sum.norm() {
            return Some((PI / (2.0 * x)).sqrt() * (-x).exp() * sum);
        }
        previous = size;
    }
    None
}

/// Trapezoid quadrature of the shifted-contour integral.
pub fn bessel_k_quadrature(nu: Complex64, x: f64) -> Result<Complex64> {
    let saddle = (nu / x).asinh();
    let margin = (1.0 / nu.im.abs().max(1e-300)).clamp(0.02, 0.5);
    let phi = saddle.im.clamp(-(FRAC_PI_2 - margin), FRAC_PI_2 - margin);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let shift = Complex64::new(0.0, phi);

    let exponent = |t: f64| -> Complex64 {
        let e = t.exp();
        let (cosh, sinh) = (0.5 * (e + 1.0 / e), 0.5 * (e - 1.0 / e));
        -x * Complex64::new(cosh * cos_phi, sinh * sin_phi) + nu * (shift + t)
    };
    // Real part of the exponent is concave in t with maximum at `peak`.
    let peak = (nu.re / (x * cos_phi)).asinh();
    let top = exponent(peak).re;
    let edge = |dir: f64| -> f64 {
        let mut step = 0.5;
        let mut t = peak;
        while exponent(t).re - top > -BESSEL_LOG_CUT {
            t += dir * step;
            step *= 1.5;
        }
        t
    };
    let (lo, hi) = (edge(-1.0), edge(1.0));
    let curvature = x * cos_phi * peak.cosh();
    let width = 1.0 / curvature.max(1e-300).sqrt();
    let mut h = (0.5f64).min(width / 2.0).min((hi - lo) / 16.0);
    let count = ((hi - lo) / h).ceil() as usize;
    h = (hi - lo) / count as f64;

    let f = |t: f64| (exponent(t) - top).exp();
    let mut sum: Complex64 = (0..=count).map(|k| f(lo + k as f64 * h)).sum();
    let mut abs_sum: f64 = sum.norm();
    let mut estimate = sum * h;
    let mut points = count;
    for _ in 0..BESSEL_MAX_LEVELS {
        let mids: Complex64 = (0..points).map(|k| f(lo + (k as f64 + 0.5) * h)).sum();
        abs_sum += mids.norm();
        sum += mids;
        points *= 2;
        h /= 2.0;
        let refined = sum * h;
        let diff = (refined - estimate).norm();
        estimate = refined;
        let floor = 16.0 * f64::EPSILON * abs_sum * h;
        if diff <= BESSEL_REL_TOL * refined.norm() || diff <= floor {
            return Ok(0.5 * estimate * top.exp());
        }
    }
    Err(Error::Tolerance {
        what: "K-Bessel quadrature",
        estimate: 0.5 * estimate * top.exp(),
        discrepancy: f64::NAN,
        tolerance: BESSEL_REL_TOL,
    })
}
