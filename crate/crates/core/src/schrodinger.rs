//! Solutions of −u'' + V u = λ u on the half-line: the Bessel-regular
//! solution, fundamental systems at r = 1, transfer matrices and the
//! modified Prüfer flow.

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::{bessel_j, bessel_j_complex, bessel_j_prime, bessel_j_prime_complex, bessel_zeros, BesselConfig};
use crate::error::{Error, Result};
use crate::ode::{integrate_piecewise, Control, OdeOptions, Step};
use crate::potential::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Energy {
    pub lambda: f64,
    pub k: f64,
    /// √(λ − τ²), present only above the band bottom.
    pub k_bar: Option<f64>,
}

impl Energy {
    pub fn new(lambda: f64, tau: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("energy lambda = {lambda} must be positive")));
        }
        let d = lambda - tau * tau;
        Ok(Self { lambda, k: lambda.sqrt(), k_bar: (d > 0.0).then(|| d.sqrt()) })
    }

    pub fn from_k_bar(k_bar: f64, tau: f64) -> Self {
        let lambda = tau * tau + k_bar * k_bar;
        Self { lambda, k: lambda.sqrt(), k_bar: Some(k_bar) }
    }

    pub fn require_k_bar(&self) -> Result<f64> {
        self.k_bar.ok_or_else(|| Error::Domain(format!("lambda = {} is not above the band bottom", self.lambda)))
    }
}

/// Modified Prüfer variables: R² = u'² + k̄²u², θ = atan2(k̄u, u') unwrapped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrueferState {
    pub r: f64,
    pub log_r2: f64,
    pub theta: f64,
}

impl PrueferState {
    pub fn from_solution(r: f64, u: f64, u_prime: f64, k_bar: f64) -> Self {
        let a = k_bar * u;
        Self { r, log_r2: (u_prime * u_prime + a * a).ln(), theta: a.atan2(u_prime) }
    }

    pub fn to_solution(&self, k_bar: f64) -> (f64, f64) {
        let amp = (0.5 * self.log_r2).exp();
        (amp * self.theta.sin() / k_bar, amp * self.theta.cos())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolutionSample {
    pub r: f64,
    pub u: f64,
    pub u_prime: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexSample {
    pub r: f64,
    pub u: Complex64,
    pub u_prime: Complex64,
}

#[derive(Clone, Copy, Debug)]
pub struct SchrodingerConfig {
    pub rel_tol: f64,
    /// Absolute tolerance relative to the size of the initial data.
    pub abs_tol: f64,
    pub max_step: f64,
    pub r_start: f64,
    pub bessel: BesselConfig,
}

impl Default for SchrodingerConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-13, max_step: 0.5, r_start: 0.5, bessel: BesselConfig::default() }
    }
}

impl SchrodingerConfig {
    fn options(&self, scale: f64) -> OdeOptions {
        OdeOptions::default()
            .with_tol(self.rel_tol, self.abs_tol * scale.max(f64::MIN_POSITIVE))
            .with_max_step(self.max_step)
    }
}

/// √r·J_ν(√λ r) and its r-derivative.
pub fn regular_closed_form(nu: f64, lambda: f64, r: f64, cfg: &BesselConfig) -> Result<(f64, f64)> {
    let k = lambda.sqrt();
    let sr = r.sqrt();
    let j = bessel_j(nu, k * r, cfg)?;
    let jp = bessel_j_prime(nu, k * r, cfg)?;
    Ok((sr * j, 0.5 * j / sr + sr * k * jp))
}

/// Complex continuation √r·J_ν(√z r) on the principal branch of √z.
pub fn regular_closed_form_complex(nu: f64, z: Complex64, r: f64, cfg: &BesselConfig) -> Result<(Complex64, Complex64)> {
    let k = z.sqrt();
    let sr = r.sqrt();
    let j = bessel_j_complex(nu, k * r, cfg)?;
    let jp = bessel_j_prime_complex(nu, k * r, cfg)?;
    Ok((sr * j, 0.5 * j / sr + sr * k * jp))
}

fn sorted_targets(targets: &[f64]) -> Result<Vec<(usize, f64)>> {
    let mut idx: Vec<(usize, f64)> = targets.iter().copied().enumerate().collect();
    if idx.iter().any(|&(_, r)| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain("target radii must be positive and finite".into()));
    }
    idx.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok(idx)
}

/// Real solution propagated from `r0` to `r1`.
pub fn propagate(
    v: &dyn Potential,
    lambda: f64,
    r0: f64,
    y0: [f64; 2],
    r1: f64,
    cfg: &SchrodingerConfig,
) -> Result<[f64; 2]> {
    let scale = y0[0].abs().max(y0[1].abs());
    let opts = cfg.options(scale);
    let bp = v.breakpoints();
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 2]| [y[1], (v.value(r) - lambda) * y[0]],
        r0,
        y0,
        r1,
        &bp,
        &opts,
        |_| Control::Continue,
    )?;
    Ok(y)
}

/// Complex solution propagated from `r0` to `r1`, with ∫|u|² over the span.
pub fn propagate_complex(
    v: &dyn Potential,
    z: Complex64,
    r0: f64,
    u0: (Complex64, Complex64),
    r1: f64,
    cfg: &SchrodingerConfig,
) -> Result<(Complex64, Complex64, f64)> {
    let scale = u0.0.norm().max(u0.1.norm());
    let opts = cfg.options(scale);
    let bp = v.breakpoints();
    let dir = if r1 >= r0 { 1.0 } else { -1.0 };
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 5]| {
            let u = Complex64::new(y[0], y[1]);
            let up = Complex64::new(y[2], y[3]);
            let upp = (v.value(r) - z) * u;
            [up.re, up.im, upp.re, upp.im, dir * u.norm_sqr()]
        },
        r0,
        [u0.0.re, u0.0.im, u0.1.re, u0.1.im, 0.0],
        r1,
        &bp,
        &opts,
        |_| Control::Continue,
    )?;
    Ok((Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]), y[4]))
}

/// The regular solution J̃_ν(r, λ): closed form up to `cfg.r_start`,
/// integrated outward through V beyond.
pub fn regular_solution(
    v: &dyn Potential,
    lambda: f64,
    targets: &[f64],
    cfg: &SchrodingerConfig,
) -> Result<Vec<SolutionSample>> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("regular solution needs lambda > 0, got {lambda}")));
    }
    let order = sorted_targets(targets)?;
    let nu = v.nu();
    let mut out = vec![SolutionSample { r: 0.0, u: 0.0, u_prime: 0.0 }; targets.len()];
    let (u0, up0) = regular_closed_form(nu, lambda, cfg.r_start, &cfg.bessel)?;
    if u0 == 0.0 && up0 == 0.0 {
        return Err(Error::Domain("regular solution vanishes identically".into()));
    }
    let mut r = cfg.r_start;
    let mut y = [u0, up0];
    for (i, t) in order {
        if t <= cfg.r_start {
            let (u, up) = regular_closed_form(nu, lambda, t, &cfg.bessel)?;
            out[i] = SolutionSample { r: t, u, u_prime: up };
            continue;
        }
        y = propagate(v, lambda, r, y, t, cfg)?;
        r = t;
        out[i] = SolutionSample { r: t, u: y[0], u_prime: y[1] };
    }
    Ok(out)
}

/// The regular solution at a single radius.
pub fn regular_at(v: &dyn Potential, lambda: f64, r: f64, cfg: &SchrodingerConfig) -> Result<SolutionSample> {
    Ok(regular_solution(v, lambda, &[r], cfg)?[0])
}

/// Complex regular solution at radius `r ≥ r_start`.
pub fn regular_at_complex(
    v: &dyn Potential,
    z: Complex64,
    r: f64,
    cfg: &SchrodingerConfig,
) -> Result<ComplexSample> {
    let start = regular_closed_form_complex(v.nu(), z, cfg.r_start.min(r), &cfg.bessel)?;
    let (u, up, _) = propagate_complex(v, z, cfg.r_start.min(r), start, r, cfg)?;
    Ok(ComplexSample { r, u, u_prime: up })
}

/// Solutions θ, φ with θ(1) = 1, θ'(1) = 0 and φ(1) = 0, φ'(1) = 1.
pub fn theta_phi_solutions(
    v: &dyn Potential,
    z: Complex64,
    targets: &[f64],
    cfg: &SchrodingerConfig,
) -> Result<(Vec<ComplexSample>, Vec<ComplexSample>)> {
    sorted_targets(targets)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut th = Vec::with_capacity(targets.len());
    let mut ph = Vec::with_capacity(targets.len());
    for &t in targets {
        let (u, up, _) = propagate_complex(v, z, 1.0, (one, zero), t, cfg)?;
        th.push(ComplexSample { r: t, u, u_prime: up });
        let (u, up, _) = propagate_complex(v, z, 1.0, (zero, one), t, cfg)?;
        ph.push(ComplexSample { r: t, u, u_prime: up });
    }
    Ok((th, ph))
}

/// Propagator of (u, u') from `r0` to `r1` at real energy λ.
pub fn transfer_matrix(v: &dyn Potential, lambda: f64, r0: f64, r1: f64, cfg: &SchrodingerConfig) -> Result<[[f64; 2]; 2]> {
    let a = propagate(v, lambda, r0, [1.0, 0.0], r1, cfg)?;
    let b = propagate(v, lambda, r0, [0.0, 1.0], r1, cfg)?;
    Ok([[a[0], b[0]], [a[1], b[1]]])
}

/// Prüfer integration settings.
#[derive(Clone, Copy, Debug)]
pub struct PrueferConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Steps are additionally clamped to `phase_step / k̄`.
    pub phase_step: f64,
}

impl Default for PrueferConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-11, phase_step: 0.2 }
    }
}

/// Advance the modified Prüfer state from `initial.r` to `r1`, recording the
/// state at each radius of `samples` (sorted, inside the span).
pub fn pruefer_flow(
    v: &dyn Potential,
    energy: &Energy,
    initial: PrueferState,
    r1: f64,
    samples: &[f64],
    cfg: &PrueferConfig,
) -> Result<(PrueferState, Vec<PrueferState>)> {
    let kb = energy.require_k_bar()?;
    let r0 = initial.r;
    if r0 < 1.0 - 1e-12 {
        return Err(Error::Domain(format!("Prüfer flow starts at r0 = {r0} < 1")));
    }
    let t2 = v.tau() * v.tau();
    let opts = OdeOptions::default().with_tol(cfg.rel_tol, cfg.abs_tol).with_max_step(cfg.phase_step / kb);
    let bp = v.breakpoints();
    let mut trace = Vec::with_capacity(samples.len());
    let mut next = samples.partition_point(|&s| s < r0);
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 2]| {
            let d = (v.value(r) - t2) / kb;
            let (s, c) = y[1].sin_cos();
            [2.0 * d * s * c, kb - d * s * s]
        },
        r0,
        [initial.log_r2, initial.theta],
        r1,
        &bp,
        &opts,
        |st: &Step<2>| {
            while next < samples.len() && samples[next] <= st.t1 {
                let (y, _) = st.interpolate(samples[next]);
                trace.push(PrueferState { r: samples[next], log_r2: y[0], theta: y[1] });
                next += 1;
            }
            Control::Continue
        },
    )?;
    Ok((PrueferState { r: r1, log_r2: y[0], theta: y[1] }, trace))
}

/// Prüfer state of the regular solution at r = 1.
pub fn regular_pruefer_start(v: &dyn Potential, energy: &Energy, cfg: &SchrodingerConfig) -> Result<PrueferState> {
    let kb = energy.require_k_bar()?;
    let s = regular_at(v, energy.lambda, 1.0, cfg)?;
    Ok(PrueferState::from_solution(1.0, s.u, s.u_prime, kb))
}

/// Scaled Prüfer angle ϑ = atan2(s·u, u') of the regular solution,
/// continuous from ϑ(0⁺) = 0, evaluated at `r_end`. ⌊ϑ/π⌋ counts the zeros
/// of J̃_ν(·, λ) in (0, r_end).
pub fn rotation_angle(v: &dyn Potential, lambda: f64, r_end: f64, cfg: &SchrodingerConfig) -> Result<f64> {
    let t2 = v.tau() * v.tau();
    let s = (lambda - t2).abs().sqrt().max(0.3);
    let r0 = cfg.r_start;
    let (u, up) = regular_closed_form(v.nu(), lambda, r0, &cfg.bessel)?;
    let zeros_before = count_zeros_below(v.nu(), lambda.sqrt() * r0, &cfg.bessel)?;
    let mut th0 = (s * u).atan2(up).rem_euclid(std::f64::consts::PI);
    th0 += zeros_before as f64 * std::f64::consts::PI;
    let k = lambda.sqrt().max(s).max(1.0);
    let opts = OdeOptions::default().with_tol(cfg.rel_tol, 1e-12).with_max_step(0.2 / k);
    let bp = v.breakpoints();
    let (_, y) = integrate_piecewise(
        |r, y: &[f64; 1]| {
            let (sn, cs) = y[0].sin_cos();
            [s * cs * cs + (lambda - v.value(r)) / s * sn * sn]
        },
        r0,
        [th0],
        r_end,
        &bp,
        &opts,
        |_| Control::Continue,
    )?;
    Ok(y[0])
}

fn count_zeros_below(nu: f64, x: f64, cfg: &BesselConfig) -> Result<usize> {
    let mut n = 4;
    loop {
        let z = bessel_zeros(nu, n, cfg)?;
        let c = z.iter().filter(|&&j| j < x).count();
        if c < n {
            return Ok(c);
        }
        n *= 2;
    }
}
