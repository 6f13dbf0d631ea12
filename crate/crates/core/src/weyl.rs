//! Weyl m-functions at r = 1, the spectral matrix, Stieltjes inversion,
//! the Dirichlet-truncated spectral function and the generalized Fourier
//! transform f ↦ ∫ f·J̃_ν(·, λ).
//!
//! Orientation: with θ(1) = 1, θ'(1) = 0, φ(1) = 0, φ'(1) = 1 and
//! ψ₁ = θ + M₋φ ∈ L²(0, 1], ψ₂ = θ + M₊φ ∈ L²[1, ∞), Green's identity gives
//! ∫₀¹|ψ₁|² = −ℑM₋/ℑz and ∫₁^∞|ψ₂|² = ℑM₊/ℑz, so ℑM₋ < 0 < ℑM₊ on ℂ⁺ and
//! M11 = 1/(M₋ − M₊), M12 = M₋/(M₋ − M₊), M22 = M₋M₊/(M₋ − M₊) have
//! nonnegative imaginary parts on the diagonal.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_complex, bessel_j_prime, bessel_j_prime_complex, bessel_zeros, refine_root};
use crate::error::{Error, Result};
use crate::ode::{integrate_piecewise, Control, OdeOptions};
use crate::potential::Potential;
use crate::schrodinger::{
    propagate_complex, pruefer_flow, regular_at, regular_closed_form, regular_closed_form_complex, regular_solution,
    rotation_angle, Energy, PrueferConfig, PrueferState, SchrodingerConfig,
};

#[derive(Clone, Copy, Debug)]
pub struct WeylConfig {
    pub schrodinger: SchrodingerConfig,
    /// Backward start of the M₊ Riccati solve when V has no free radius.
    pub r_far: f64,
    /// |J_ν(√z)| below this (relative) is treated as a pole of M₋.
    pub pole_threshold: f64,
    pub riccati_rel_tol: f64,
}

impl Default for WeylConfig {
    fn default() -> Self {
        Self { schrodinger: SchrodingerConfig::default(), r_far: 200.0, pole_threshold: 1e-10, riccati_rel_tol: 1e-12 }
    }
}

fn nearest_zero_lambda(nu: f64, z: Complex64, cfg: &SchrodingerConfig) -> Result<f64> {
    let target = z.norm().sqrt();
    let count = ((target / std::f64::consts::PI) as usize + 3).max(3);
    let zeros = bessel_zeros(nu, count, &cfg.bessel)?;
    Ok(zeros
        .iter()
        .map(|j| j * j)
        .min_by(|a, b| (a - z.re).abs().partial_cmp(&(b - z.re).abs()).unwrap())
        .unwrap())
}

/// M₋(z) = 1/2 + √z·J_ν'(√z)/J_ν(√z).
pub fn m_minus_closed(nu: f64, z: Complex64, cfg: &WeylConfig) -> Result<Complex64> {
    let k = z.sqrt();
    let b = &cfg.schrodinger.bessel;
    let j = bessel_j_complex(nu, k, b)?;
    let jp = bessel_j_prime_complex(nu, k, b)?;
    if j.norm() < cfg.pole_threshold * (1.0 + (k * jp).norm()) {
        return Err(Error::Pole { value: j.norm(), nearest_zero: nearest_zero_lambda(nu, z, &cfg.schrodinger)? });
    }
    Ok(0.5 + k * jp / j)
}

/// M₋ from the integrated regular solution: u'(1)/u(1).
pub fn m_minus_ode(v: &dyn Potential, z: Complex64, cfg: &WeylConfig) -> Result<Complex64> {
    let c = &cfg.schrodinger;
    let start = regular_closed_form_complex(v.nu(), z, c.r_start, &c.bessel)?;
    let (u, up, _) = propagate_complex(v, z, c.r_start, start, 1.0, c)?;
    Ok(up / u)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MPlus {
    pub value: Complex64,
    /// ∫₁^∞ |ψ₂|².
    pub psi2_norm_sq: f64,
    /// |M₊(R) − M₊(2R)|, zero when V ≡ τ² beyond the start radius.
    pub error: f64,
    pub r_start: f64,
}

fn m_plus_from(v: &dyn Potential, z: Complex64, r_start: f64, cfg: &WeylConfig) -> Result<(Complex64, f64)> {
    let t2 = v.tau() * v.tau();
    let seed = Complex64::i() * (z - t2).sqrt();
    if !(seed.re < 0.0) {
        return Err(Error::Domain(format!("M+ needs Im z > 0, got z = {z}")));
    }
    let n0 = -1.0 / (2.0 * seed.re);
    if r_start <= 1.0 {
        return Ok((seed, n0));
    }
    let opts = OdeOptions::default().with_tol(cfg.riccati_rel_tol, 1e-14).with_max_step(0.25);
    let bp = v.breakpoints();
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 3]| {
            let m = Complex64::new(y[0], y[1]);
            let d = (v.value(r) - z) - m * m;
            [d.re, d.im, -1.0 - 2.0 * m.re * y[2]]
        },
        r_start,
        [seed.re, seed.im, n0],
        1.0,
        &bp,
        &opts,
        |_| Control::Continue,
    )?;
    Ok((Complex64::new(y[0], y[1]), y[2]))
}

/// M₊(z) from the backward Riccati equation m' = (V − z) − m², seeded with
/// the free value i√(z − τ²).
pub fn m_plus(v: &dyn Potential, z: Complex64, cfg: &WeylConfig) -> Result<MPlus> {
    if !(z.im > 0.0) {
        return Err(Error::Domain(format!("M+ needs Im z > 0, got z = {z}")));
    }
    if let Some(rf) = v.free_radius() {
        let r = rf.max(1.0);
        let (value, psi2_norm_sq) = m_plus_from(v, z, r, cfg)?;
        return Ok(MPlus { value, psi2_norm_sq, error: 0.0, r_start: r });
    }
    let (a, na) = m_plus_from(v, z, cfg.r_far, cfg)?;
    let (b, _) = m_plus_from(v, z, 2.0 * cfg.r_far, cfg)?;
    let error = (a - b).norm();
    if error > 1e-4 * (1.0 + b.norm()) {
        return Err(Error::NoConvergence(format!(
            "M+ at z = {z} changes by {error:e} when R_max doubles from {}",
            cfg.r_far
        )));
    }
    Ok(MPlus { value: b, psi2_norm_sq: na, error, r_start: 2.0 * cfg.r_far })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MFunctionSample {
    pub z: Complex64,
    pub m_minus: Complex64,
    pub m_plus: Complex64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralMatrixSample {
    pub z: Complex64,
    pub m11: Complex64,
    pub m12: Complex64,
    pub m22: Complex64,
}

impl SpectralMatrixSample {
    /// ℑM11 ≥ 0, ℑM22 ≥ 0 and ℑM11·ℑM22 ≥ (ℑM12)² (ℑM positive semidefinite).
    pub fn is_herglotz(&self, tol: f64) -> bool {
        let (a, b, c) = (self.m11.im, self.m12.im, self.m22.im);
        a >= -tol && c >= -tol && a * c - b * b >= -tol * (1.0 + a.abs() + c.abs())
    }
}

pub fn spectral_matrix(s: &MFunctionSample) -> Result<SpectralMatrixSample> {
    let d = s.m_minus - s.m_plus;
    if d.norm() < 1e-300 {
        return Err(Error::Domain(format!("degenerate spectral matrix at z = {}", s.z)));
    }
    Ok(SpectralMatrixSample {
        z: s.z,
        m11: 1.0 / d,
        m12: s.m_minus / d,
        m22: s.m_minus * s.m_plus / d,
    })
}

/// Evaluator of the m-functions for one potential.
#[derive(Clone)]
pub struct WeylContext {
    pub potential: Arc<dyn Potential>,
    pub cfg: WeylConfig,
}

impl WeylContext {
    pub fn new(potential: Arc<dyn Potential>, cfg: WeylConfig) -> Self {
        Self { potential, cfg }
    }

    pub fn m_functions(&self, z: Complex64) -> Result<MFunctionSample> {
        let m_minus = m_minus_closed(self.potential.nu(), z, &self.cfg)?;
        let mp = m_plus(self.potential.as_ref(), z, &self.cfg)?;
        Ok(MFunctionSample { z, m_minus, m_plus: mp.value, error: mp.error })
    }

    pub fn sample(&self, z: Complex64) -> Result<SpectralMatrixSample> {
        spectral_matrix(&self.m_functions(z)?)
    }
}

/// ∫₀^{b} |√r·J_ν(√z r)|² dr by composite Simpson on the closed form.
pub fn closed_form_norm_sq(nu: f64, z: Complex64, b: f64, cfg: &SchrodingerConfig) -> Result<f64> {
    let n = 400;
    let h = b / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let r = i as f64 * h;
        let val = if r == 0.0 { 0.0 } else { regular_closed_form_complex(nu, z, r, &cfg.bessel)?.0.norm_sqr() };
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * val;
    }
    Ok(acc * h / 3.0)
}

/// Both sides of the two Weyl-disk identities at z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylDiskCheck {
    pub z: Complex64,
    pub left_integral: f64,
    pub left_expected: f64,
    pub right_integral: f64,
    pub right_expected: f64,
}

/// ∫₀¹|ψ₁|² vs −ℑM₋/ℑz (closed-form quadrature) and ∫₁^∞|ψ₂|² vs ℑM₊/ℑz
/// (quadrature carried along the backward solve).
pub fn weyl_disk_check(v: &dyn Potential, z: Complex64, cfg: &WeylConfig) -> Result<WeylDiskCheck> {
    let mm = m_minus_closed(v.nu(), z, cfg)?;
    let mp = m_plus(v, z, cfg)?;
    let u1 = regular_closed_form_complex(v.nu(), z, 1.0, &cfg.schrodinger.bessel)?.0;
    let left = closed_form_norm_sq(v.nu(), z, 1.0, &cfg.schrodinger)? / u1.norm_sqr();
    Ok(WeylDiskCheck {
        z,
        left_integral: left,
        left_expected: -mm.im / z.im,
        right_integral: mp.psi2_norm_sq,
        right_expected: mp.value.im / z.im,
    })
}

/// Independent route to (M₊, ∫₁^∞|ψ₂|²): the linear equation integrated
/// backward from `r_far`, seeded with the outgoing free solution e^{ik̄r}, plus
/// the free tail |ψ(R)|²/(2ℑk̄). Errors in the seed decay like e^{−2ℑk̄(R−1)}.
pub fn psi2_linear(v: &dyn Potential, z: Complex64, r_far: f64, cfg: &WeylConfig) -> Result<(Complex64, f64)> {
    let t2 = v.tau() * v.tau();
    let k = (z - t2).sqrt();
    if !(k.im > 0.0) {
        return Err(Error::Domain(format!("linear route needs Im z > 0, got z = {z}")));
    }
    let seed = (Complex64::new(1.0, 0.0), Complex64::i() * k);
    let (u, up, n) = propagate_complex(v, z, r_far, seed, 1.0, &cfg.schrodinger)?;
    let tail = 1.0 / (2.0 * k.im);
    Ok((up / u, (n + tail) / u.norm_sqr()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureMethod {
    Stieltjes,
    Truncated,
}

impl MeasureMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureMethod::Stieltjes => "stieltjes",
            MeasureMethod::Truncated => "truncated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureCell {
    pub lo: f64,
    pub hi: f64,
    pub drho: f64,
    pub drho11: f64,
    pub drho12: f64,
    pub drho22: f64,
    /// y → 0 behaviour inconsistent with a Lipschitz boundary value.
    pub anomalous: bool,
    /// (y, Δρ) at each y of the sequence.
    pub trend: Vec<(f64, f64)>,
}

impl MeasureCell {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureGrid {
    pub method: MeasureMethod,
    pub cells: Vec<MeasureCell>,
    /// Point masses (λ, weight), for the truncated method.
    pub jumps: Vec<(f64, f64)>,
}

impl MeasureGrid {
    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.drho).sum()
    }
}

pub const MEASURE_HEADER: [&str; 7] = ["lambda_lo", "lambda_hi", "drho", "drho11", "drho12", "drho22", "method"];

/// Uniform edges lo = u₀ < … < u_N = hi.
pub fn uniform_edges(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect()
}

/// J̃_ν(1, λ) and J̃_ν'(1, λ) for real λ > 0.
fn regular_at_one(nu: f64, x: f64, cfg: &SchrodingerConfig) -> Result<(f64, f64)> {
    let k = x.sqrt();
    let j = bessel_j(nu, k, &cfg.bessel)?;
    let jp = bessel_j_prime(nu, k, &cfg.bessel)?;
    Ok((j, 0.5 * j + k * jp))
}

/// Δρ_jk and scalar Δρ over [u1, u2] by Stieltjes inversion.
///
/// For each y: Simpson in x with `points` nodes of (1/π)ℑM_jk(x + iy).
/// The y → 0 limit is the linear extrapolation through the two smallest y,
/// set to zero when it is not significant against the quadratic one.
/// The scalar measure uses dρ = dρ₁₁/J̃(1,x)² unless J̃(1,·) gets small in
/// the cell, in which case dρ = dρ₂₂/J̃'(1,x)².
pub fn rho_increment(ctx: &WeylContext, u1: f64, u2: f64, y_sequence: &[f64], points: usize) -> Result<MeasureCell> {
    if !(u1 > 0.0 && u2 > u1) {
        return Err(Error::Domain(format!("cell [{u1}, {u2}] must satisfy 0 < u1 < u2")));
    }
    if y_sequence.len() < 2 || y_sequence.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive y values".into()));
    }
    let n = if points % 2 == 0 { points + 1 } else { points.max(3) };
    let h = (u2 - u1) / (n - 1) as f64;
    let nu = ctx.potential.nu();
    let xs: Vec<f64> = (0..n).map(|i| u1 + i as f64 * h).collect();
    let weights: Vec<f64> =
        (0..n).map(|i| if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0).collect();
    let reg: Vec<(f64, f64)> = xs.iter().map(|&x| regular_at_one(nu, x, &ctx.cfg.schrodinger)).collect::<Result<_>>()?;
    let min_j = reg.iter().map(|r| r.0 * r.0).fold(f64::INFINITY, f64::min);
    let min_jp = reg.iter().map(|r| r.1 * r.1).fold(f64::INFINITY, f64::min);
    let use22 = min_jp > min_j;

    let mut ys: Vec<f64> = y_sequence.to_vec();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut per_y: Vec<[f64; 4]> = Vec::with_capacity(ys.len());
    for &y in &ys {
        let mut acc = [0.0; 4];
        for (i, &x) in xs.iter().enumerate() {
            let s = ctx.sample(Complex64::new(x, y))?;
            let w = weights[i] / std::f64::consts::PI;
            acc[0] += w * s.m11.im;
            acc[1] += w * s.m12.im;
            acc[2] += w * s.m22.im;
            acc[3] += w * if use22 { s.m22.im / (reg[i].1 * reg[i].1) } else { s.m11.im / (reg[i].0 * reg[i].0) };
        }
        per_y.push(acc);
    }
    let (y1, y2) = (ys[0], ys[1]);
    let mut lim = [0.0; 4];
    for k in 0..4 {
        let (a, b) = (per_y[0][k], per_y[1][k]);
        lim[k] = a - y1 * (b - a) / (y2 - y1);
    }
    // Limits indistinguishable from zero (gaps in the spectrum) are set to
    // zero: the second-order extrapolant through three y values must agree.
    if ys.len() >= 3 {
        let y3 = ys[2];
        let l0 = y2 * y3 / ((y1 - y2) * (y1 - y3));
        let l1 = y1 * y3 / ((y2 - y1) * (y2 - y3));
        let l2 = y1 * y2 / ((y3 - y1) * (y3 - y2));
        let quad = l0 * per_y[0][3] + l1 * per_y[1][3] + l2 * per_y[2][3];
        if lim[3].abs() <= 10.0 * (lim[3] - quad).abs() {
            lim = [0.0; 4];
        }
    }
    let scale = per_y.iter().map(|p| p[3].abs()).fold(0.0, f64::max);
    let anomalous = lim[3] != 0.0
        && ((lim[3] - per_y[0][3]).abs() > 0.1 * lim[3].abs() + 1e-10 || lim[3] < -1e-8 * (1.0 + scale));
    Ok(MeasureCell {
        lo: u1,
        hi: u2,
        drho: lim[3],
        drho11: lim[0],
        drho12: lim[1],
        drho22: lim[2],
        anomalous,
        trend: ys.iter().zip(&per_y).map(|(&y, p)| (y, p[3])).collect(),
    })
}

/// Stieltjes-route measure on the given cell edges (cells in parallel).
pub fn stieltjes_measure(ctx: &WeylContext, edges: &[f64], y_sequence: &[f64], points: usize) -> Result<MeasureGrid> {
    let cells: Vec<MeasureCell> = edges
        .par_windows(2)
        .map(|w| rho_increment(ctx, w[0], w[1], y_sequence, points))
        .collect::<Result<_>>()?;
    Ok(MeasureGrid { method: MeasureMethod::Stieltjes, cells, jumps: Vec::new() })
}

/// Eigenvalues and weights of the problem on (0, L) with u(L) = 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedSpectrum {
    pub length: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Number of eigenvalues below `lambda_lo`.
    pub count_below: usize,
    pub eigenvalues: Vec<f64>,
    /// 1/‖J̃_ν(·, λ_n)‖²_{L²(0,L)}.
    pub weights: Vec<f64>,
}

impl TruncatedSpectrum {
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.eigenvalues.iter().copied().zip(self.weights.iter().copied()).collect()
    }

    /// Point mass of ρ_L near λ₀: the weights of the levels within `window`
    /// of λ₀, less a continuum background for all but one of them. The
    /// background is the mean weight of the two nearest levels on each side
    /// outside the window. An embedded eigenvalue can share its mass with the
    /// nearest continuum level, which this sum recombines.
    pub fn jump_near(&self, lambda0: f64, window: f64) -> JumpEstimate {
        let levels: Vec<(f64, f64)> = self.jumps();
        let inner: Vec<&(f64, f64)> = levels.iter().filter(|(l, _)| (l - lambda0).abs() <= window).collect();
        let below = levels.iter().rev().filter(|(l, _)| *l < lambda0 - window).take(2);
        let above = levels.iter().filter(|(l, _)| *l > lambda0 + window).take(2);
        let outer: Vec<f64> = below.chain(above).map(|(_, w)| *w).collect();
        let background = if outer.is_empty() { 0.0 } else { outer.iter().sum::<f64>() / outer.len() as f64 };
        let mass = inner.iter().map(|(_, w)| w).sum::<f64>() - inner.len().saturating_sub(1) as f64 * background;
        JumpEstimate { lambda: lambda0, mass, levels: inner.len(), background }
    }

    /// Cell increments of ρ_L. With `smooth`, each jump is spread uniformly
    /// between the midpoints to its neighbours.
    pub fn cell_increments(&self, edges: &[f64], smooth: bool) -> MeasureGrid {
        let ev = &self.eigenvalues;
        let mut cells: Vec<MeasureCell> = edges
            .windows(2)
            .map(|w| MeasureCell {
                lo: w[0],
                hi: w[1],
                drho: 0.0,
                drho11: 0.0,
                drho12: 0.0,
                drho22: 0.0,
                anomalous: false,
                trend: Vec::new(),
            })
            .collect();
        for (i, (&l, &wt)) in ev.iter().zip(&self.weights).enumerate() {
            let (a, b) = if smooth && ev.len() > 1 {
                let left = if i > 0 { 0.5 * (ev[i - 1] + l) } else { l - 0.5 * (ev[1] - ev[0]) };
                let right = if i + 1 < ev.len() { 0.5 * (l + ev[i + 1]) } else { l + 0.5 * (l - ev[i - 1]) };
                (left, right)
            } else {
                (l, l)
            };
            for c in cells.iter_mut() {
                let share = if b > a {
                    ((c.hi.min(b) - c.lo.max(a)).max(0.0)) / (b - a)
                } else if l >= c.lo && l < c.hi {
                    1.0
                } else {
                    0.0
                };
                c.drho += wt * share;
            }
        }
        MeasureGrid { method: MeasureMethod::Truncated, cells, jumps: self.jumps() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpEstimate {
    pub lambda: f64,
    pub mass: f64,
    pub levels: usize,
    pub background: f64,
}

/// ‖J̃_ν(·, λ)‖² on (0, L) for an eigenvalue of the Dirichlet problem.
///
/// The regular solution is integrated out to r_m and the Dirichlet solution
/// in from L; they are matched by least squares at r_m, which stays robust
/// when r_m falls near a node and avoids integrating a growing solution
/// across the whole interval.
pub fn dirichlet_norm_sq(v: &dyn Potential, lambda: f64, length: f64, cfg: &SchrodingerConfig) -> Result<f64> {
    let rm = (length / 3.0).min(20.0).max(cfg.r_start);
    let z = Complex64::new(lambda, 0.0);
    let inner = closed_form_norm_sq(v.nu(), z, cfg.r_start, cfg)?;
    let (u0, up0) = regular_closed_form(v.nu(), lambda, cfg.r_start, &cfg.bessel)?;
    let c0 = Complex64::new(u0, 0.0);
    let (ul, ulp, il) = propagate_complex(v, z, cfg.r_start, (c0, Complex64::new(up0, 0.0)), rm, cfg)?;
    let (ur, urp, ir) =
        propagate_complex(v, z, length, (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)), rm, cfg)?;
    let s2 = lambda.abs().max(1.0);
    let c = (ul.re * ur.re + ulp.re * urp.re / s2) / (ur.re * ur.re + urp.re * urp.re / s2);
    Ok(inner + il + c * c * ir)
}

/// Eigenvalues in [λ_lo, λ_hi] of the problem cut off at L (u(L) = 0),
/// located by the rotation number ϑ(L, λ)/π, with weights 1/‖J̃‖².
pub fn truncated_spectral_function(
    v: &dyn Potential,
    length: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    cfg: &SchrodingerConfig,
) -> Result<TruncatedSpectrum> {
    if !(lambda_lo > 0.0 && lambda_hi > lambda_lo) {
        return Err(Error::Domain(format!("need 0 < lambda_lo < lambda_hi, got [{lambda_lo}, {lambda_hi}]")));
    }
    let pi = std::f64::consts::PI;
    let theta = |l: f64| rotation_angle(v, l, length, cfg);
    let th_lo = theta(lambda_lo)?;
    let th_hi = theta(lambda_hi)?;
    let n_lo = (th_lo / pi).floor() as usize;
    let n_hi = (th_hi / pi).floor() as usize;
    let mut eigenvalues = Vec::with_capacity(n_hi.saturating_sub(n_lo));
    let mut a = lambda_lo;
    let mut fa_th = th_lo;
    for k in (n_lo + 1)..=n_hi {
        let target = k as f64 * pi;
        let root = refine_root(|l| Ok(theta(l)? - target), a, lambda_hi, fa_th - target, th_hi - target)?;
        eigenvalues.push(root);
        a = root;
        fa_th = target;
    }
    if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) || eigenvalues.len() != n_hi - n_lo {
        return Err(Error::NoConvergence("eigenvalue count does not match the rotation number".into()));
    }
    let weights: Vec<f64> = eigenvalues
        .par_iter()
        .map(|&l| dirichlet_norm_sq(v, l, length, cfg).map(|n| 1.0 / n))
        .collect::<Result<_>>()?;
    Ok(TruncatedSpectrum { length, lambda_lo, lambda_hi, count_below: n_lo, eigenvalues, weights })
}

/// ‖J̃_ν(·, λ₀)‖² on (0, ∞) at an embedded eigenvalue λ₀ > τ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenNorm {
    pub lambda: f64,
    pub norm_sq: f64,
    /// Angle between the decaying solution and J̃ at r = 1, modulo π.
    pub angle_mismatch: f64,
}

/// Norm of J̃ at an embedded eigenvalue: ∫₀¹ from the closed form plus
/// R_reg(1)²·Q(1), where Q(r) = ∫_r^∞ u²/R(r)² along the decaying solution
/// traced backward from `r_far` in Prüfer variables:
/// Q' = −sin²θ/k̄² − Q·(log R²)'. `gamma` is the decay exponent of R² used
/// for the seed Q(r_far) = r_far/(2k̄²(γ − 1)).
pub fn embedded_norm_sq(v: &dyn Potential, lambda: f64, r_far: f64, gamma: f64, cfg: &SchrodingerConfig) -> Result<EigenNorm> {
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("decay exponent {gamma} does not give an L2 solution")));
    }
    let e = Energy::new(lambda, v.tau())?;
    let kb = e.require_k_bar()?;
    let pcfg = PrueferConfig { rel_tol: 1e-11, abs_tol: 1e-12, ..PrueferConfig::default() };
    let start = crate::schrodinger::regular_pruefer_start(v, &e, cfg)?;
    let (far, _) = pruefer_flow(v, &e, start, r_far, &[], &pcfg)?;
    let seed = PrueferState { r: r_far, log_r2: 0.0, theta: far.theta };
    let t2 = v.tau() * v.tau();
    let opts = OdeOptions::default().with_tol(1e-11, 1e-14).with_max_step(pcfg.phase_step / kb);
    let bp = v.breakpoints();
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 3]| {
            let d = (v.value(r) - t2) / kb;
            let (s, c) = y[1].sin_cos();
            let dlog = 2.0 * d * s * c;
            [dlog, kb - d * s * s, -s * s / (kb * kb) - y[2] * dlog]
        },
        r_far,
        [seed.log_r2, seed.theta, r_far / (2.0 * kb * kb * (gamma - 1.0))],
        1.0,
        &bp,
        &opts,
        |_| Control::Continue,
    )?;
    let reg1 = regular_at(v, lambda, 1.0, cfg)?;
    let r2_reg = reg1.u_prime * reg1.u_prime + kb * kb * reg1.u * reg1.u;
    let th_reg = (kb * reg1.u).atan2(reg1.u_prime);
    let inner = closed_form_norm_sq(v.nu(), Complex64::new(lambda, 0.0), 1.0, cfg)?;
    let mis = (y[1] - th_reg).rem_euclid(std::f64::consts::PI);
    let mis = mis.min(std::f64::consts::PI - mis);
    Ok(EigenNorm { lambda, norm_sq: inner + r2_reg * y[2], angle_mismatch: mis })
}

/// f̂(λ) = ∫ f(r)·J̃_ν(r, λ) dr for f supported in [a, b], at each λ.
pub fn generalized_fourier(
    v: &dyn Potential,
    f: &(dyn Fn(f64) -> f64 + Sync),
    support: (f64, f64),
    lambdas: &[f64],
    cfg: &SchrodingerConfig,
) -> Result<Vec<f64>> {
    let (a, b) = support;
    if !(a >= 0.0 && b > a) {
        return Err(Error::Domain(format!("bad support [{a}, {b}]")));
    }
    for x in [a - 1e-3, b + 1e-3, b + 1.0] {
        if x > 0.0 && f(x).abs() > 1e-12 {
            return Err(Error::Domain(format!("test function escapes its support at r = {x}")));
        }
    }
    lambdas
        .par_iter()
        .map(|&lambda| {
            let r0 = cfg.r_start;
            let mut acc = 0.0;
            if a < r0 {
                let n = 200;
                let h = (r0 - a) / n as f64;
                for i in 0..=n {
                    let r = a + i as f64 * h;
                    if r <= 0.0 {
                        continue;
                    }
                    let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(r) * regular_closed_form(v.nu(), lambda, r, &cfg.bessel)?.0;
                }
                acc *= h / 3.0;
            }
            let lo = a.max(r0);
            let start = regular_at(v, lambda, lo, cfg)?;
            let scale = start.u.abs().max(start.u_prime.abs());
            let opts = OdeOptions::default().with_tol(cfg.rel_tol, cfg.abs_tol * scale).with_max_step(0.05);
            let bp = v.breakpoints();
            let (_, y) = integrate_piecewise(
                |r, y: &[f64; 3]| [y[1], (v.value(r) - lambda) * y[0], f(r) * y[0]],
                lo,
                [start.u, start.u_prime, 0.0],
                b,
                &bp,
                &opts,
                |_| Control::Continue,
            )?;
            Ok(acc + y[2])
        })
        .collect()
}

/// f(r) ≈ Σ_cells f̂(mid)·J̃_ν(r, mid)·Δρ at each radius of `rs`.
pub fn inverse_fourier(
    v: &dyn Potential,
    coeffs: &[f64],
    measure: &MeasureGrid,
    rs: &[f64],
    cfg: &SchrodingerConfig,
) -> Result<Vec<f64>> {
    if coeffs.len() != measure.cells.len() {
        return Err(Error::InvalidParameter("one coefficient per measure cell required".into()));
    }
    let parts: Vec<Vec<f64>> = measure
        .cells
        .par_iter()
        .zip(coeffs.par_iter())
        .map(|(c, &fh)| {
            let sol = regular_solution(v, c.mid(), rs, cfg)?;
            Ok(sol.iter().map(|s| fh * s.u * c.drho).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; rs.len()];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    Ok(out)
}
