//! Bessel functions of the first kind J_ν for real order.
//!
//! Power series below `switch_radius`, Hankel large-argument expansion above.
//! Complex arguments use the same two regimes with principal branches.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct BesselConfig {
    /// Maximum number of series terms.
    pub series_terms: usize,
    /// |x| at which evaluation switches to the asymptotic expansion.
    pub switch_radius: f64,
    pub tolerance: f64,
    /// Largest |z| accepted by the complex evaluator.
    pub overflow_guard: f64,
}

impl Default for BesselConfig {
    fn default() -> Self {
        Self { series_terms: 120, switch_radius: 12.0, tolerance: 1e-12, overflow_guard: 600.0 }
    }
}

impl BesselConfig {
    pub fn validate(&self) -> Result<()> {
        if self.series_terms < 20 {
            return Err(Error::InvalidParameter(format!("series_terms = {} < 20", self.series_terms)));
        }
        if !(self.switch_radius >= 10.0) {
            return Err(Error::InvalidParameter(format!("switch_radius = {} < 10", self.switch_radius)));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(Error::InvalidParameter(format!("tolerance = {} outside (0, 1e-6]", self.tolerance)));
        }
        Ok(())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps accuracy near zero.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// 1/Γ(x) for any real x (zero at the poles).
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        return (PI * x).sin() * ln_gamma(1.0 - x).exp() / PI;
    }
    (-ln_gamma(x)).exp()
}

fn is_negative_integer(nu: f64) -> Option<i64> {
    if nu < 0.0 && nu == nu.floor() {
        Some(nu as i64)
    } else {
        None
    }
}

/// Leading factor (x/2)^ν / Γ(ν+1) for x > 0, with overflow reported.
fn series_prefactor(nu: f64, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    if nu + 1.0 > 0.0 {
        let log_pref = nu * half.ln() - ln_gamma(nu + 1.0);
        if log_pref > 700.0 {
            return Err(Error::Domain(format!("J_{nu}({x}) overflows (log prefactor {log_pref:.1})")));
        }
        Ok(log_pref.exp())
    } else {
        Ok(half.powf(nu) * recip_gamma(nu + 1.0))
    }
}

/// Partial sum of the defining power series with exactly `terms` terms.
pub fn bessel_j_series(nu: f64, z: Complex64, terms: usize) -> Complex64 {
    let half = 0.5 * z;
    let pref = (nu * half.ln()).exp() * recip_gamma(nu + 1.0);
    let q = -(half * half);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..terms {
        let nf = n as f64;
        term *= q / (nf * (nu + nf));
        sum += term;
    }
    pref * sum
}

fn real_series(nu: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    let pref = series_prefactor(nu, x)?;
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1;
    while n < cfg.series_terms {
        let nf = n as f64;
        term *= q / (nf * (nu + nf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && nf > 0.5 * x {
            break;
        }
        n += 1;
    }
    Ok(pref * sum)
}

/// Hankel asymptotic P, Q sums for order ν at argument z.
fn hankel_pq(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    let mu = 4.0 * nu * nu;
    let inv8z = 1.0 / (8.0 * z);
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    let mut a = Complex64::new(1.0, 0.0);
    let mut prev_mag = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) * inv8z / kf;
        let mag = a.norm();
        // Asymptotic series: stop once the terms start to grow.
        if mag > prev_mag {
            break;
        }
        prev_mag = mag;
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn hankel_asymptotic(nu: f64, z: Complex64) -> Complex64 {
    let (p, q) = hankel_pq(nu, z);
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_ν(x) for any real order ν and x ≥ 0 (negative orders via the series
/// with 1/Γ, integer negative orders by symmetry).
pub fn bessel_j_any(nu: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("J_{nu} requires finite x >= 0, got {x}")));
    }
    if let Some(m) = is_negative_integer(nu) {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign * bessel_j_any(-nu, x, cfg)?);
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else if nu > 0.0 { 0.0 } else { f64::INFINITY });
    }
    if x < cfg.switch_radius {
        real_series(nu, x, cfg)
    } else {
        Ok(hankel_asymptotic(nu, Complex64::new(x, 0.0)).re)
    }
}

/// J_ν(x) for ν ≥ 0, x ≥ 0.
pub fn bessel_j(nu: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::Domain(format!("order nu = {nu} must be >= 0")));
    }
    bessel_j_any(nu, x, cfg)
}

/// J_ν'(x) = (ν/x) J_ν(x) − J_{ν+1}(x).
pub fn bessel_j_prime(nu: f64, x: f64, cfg: &BesselConfig) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::Domain(format!("order nu = {nu} must be >= 0")));
    }
    if x == 0.0 {
        return if nu == 0.0 || nu > 1.0 {
            Ok(0.0)
        } else if nu == 1.0 {
            Ok(0.5)
        } else {
            Err(Error::Domain(format!("J_{nu}'(0) is unbounded")))
        };
    }
    Ok(nu / x * bessel_j(nu, x, cfg)? - bessel_j(nu + 1.0, x, cfg)?)
}

fn complex_guard(z: Complex64, cfg: &BesselConfig) -> Result<()> {
    if !(z.norm() <= cfg.overflow_guard) || z.im.abs() > 700.0 {
        return Err(Error::Domain(format!("complex argument {z} exceeds overflow guard {}", cfg.overflow_guard)));
    }
    Ok(())
}

/// J_ν(z) on the principal branch (cut along the negative real axis).
pub fn bessel_j_complex(nu: f64, z: Complex64, cfg: &BesselConfig) -> Result<Complex64> {
    complex_guard(z, cfg)?;
    if z.norm() == 0.0 {
        return Ok(Complex64::new(if nu == 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    if z.norm() < cfg.switch_radius {
        let mut sum = bessel_j_series(nu, z, 20);
        let mut terms = 20;
        loop {
            let next = bessel_j_series(nu, z, terms + 10);
            if (next - sum).norm() <= 1e-16 * next.norm() || terms + 10 >= cfg.series_terms {
                return Ok(next);
            }
            sum = next;
            terms += 10;
        }
    } else {
        if z.re <= 0.0 {
            return Err(Error::Domain(format!("asymptotic regime needs Re z > 0, got {z}")));
        }
        Ok(hankel_asymptotic(nu, z))
    }
}

/// Derivative of `bessel_j_complex` with respect to z.
pub fn bessel_j_prime_complex(nu: f64, z: Complex64, cfg: &BesselConfig) -> Result<Complex64> {
    Ok(nu / z * bessel_j_complex(nu, z, cfg)? - bessel_j_complex(nu + 1.0, z, cfg)?)
}

/// First `count` positive zeros of J_ν, increasing.
pub fn bessel_zeros(nu: f64, count: usize, cfg: &BesselConfig) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    let mut zeros = Vec::with_capacity(count);
    let scan = 0.25;
    // All positive zeros exceed ν.
    let mut a = nu.max(1e-3);
    let mut fa = bessel_j(nu, a, cfg)?;
    while zeros.len() < count {
        let b = a + scan;
        let fb = bessel_j(nu, b, cfg)?;
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(refine_root(|x| bessel_j(nu, x, cfg), a, b, fa, fb)?);
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

/// Bracketed root refinement: Illinois-modified secant with bisection fallback.
pub(crate) fn refine_root<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else if side == -1 {
            fa *= 0.5;
        } else {
            side = -1;
        }
        b = c;
        fb = fc;
        if side == 0 {
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
