//! The metric perturbation f solving
//! τ² + (n−1)²/2·√|K₀|·f + (n−1)²/4·f² + (n−1)/2·f' + λ/f₁² = V
//! with log f₁' = √|K₀| + f, from f(b − δ) = 1.
//!
//! w = λ/f₁² is carried along (w' = −2(√|K₀| + f)·w), which turns the
//! integro-differential equation into an ODE system.

use std::sync::Arc;

use serde::Serialize;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::metric::{ManifoldParams, Perturbation, PerturbationPoint};
use crate::ode::{integrate_piecewise, Control, DenseTrajectory, OdeOptions, Step};
use crate::potential::Potential;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub r_end: f64,
    /// Keep every accepted step for interpolation.
    pub dense_output: bool,
    /// Exact output spacing for sampled values.
    pub sample_step: f64,
    /// Initial value f(b − δ); 1 for the construction.
    pub f0: f64,
    /// Include the λ/f₁² term.
    pub sphere_term: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.25,
            r_end: 1e4,
            dense_output: true,
            sample_step: 1.0,
            f0: 1.0,
            sphere_term: true,
        }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("riccati tolerances must be positive, rel_tol <= 1e-6".into()));
        }
        if !(self.max_step > 0.0) || !(self.sample_step > 0.0) {
            return Err(Error::InvalidParameter("riccati step sizes must be positive".into()));
        }
        Ok(())
    }
}

/// State of the solve at an exact output radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiccatiState {
    pub r: f64,
    pub f: f64,
    pub f_prime: f64,
    pub w: f64,
    pub log_f1: f64,
}

/// Coefficients of the equation for given (n, K₀, τ).
#[derive(Clone, Copy, Debug)]
struct Coeffs {
    half_nm1: f64,
    c_lin: f64,
    c_quad: f64,
    s: f64,
    tau2: f64,
}

impl Coeffs {
    fn new(params: &ManifoldParams) -> Self {
        let nm1 = params.n as f64 - 1.0;
        let s = params.s();
        Self { half_nm1: 0.5 * nm1, c_lin: 0.5 * nm1 * nm1 * s, c_quad: 0.25 * nm1 * nm1, s, tau2: params.tau().powi(2) }
    }

    fn f_prime(&self, v: f64, f: f64, w: f64) -> f64 {
        (v - self.tau2 - self.c_lin * f - self.c_quad * f * f - w) / self.half_nm1
    }
}

/// Trajectory of f on [b − δ, r_end].
#[derive(Clone)]
pub struct RiccatiSolution {
    potential: Arc<dyn Potential>,
    coeffs: Coeffs,
    start: f64,
    end: f64,
    dense: DenseTrajectory<3>,
    samples: Vec<RiccatiState>,
}

impl std::fmt::Debug for RiccatiSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiccatiSolution")
            .field("start", &self.start)
            .field("end", &self.end)
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl RiccatiSolution {
    pub fn samples(&self) -> &[RiccatiState] {
        &self.samples
    }

    pub fn potential(&self) -> &Arc<dyn Potential> {
        &self.potential
    }

    /// State at any r in the solved span (dense interpolation of f, w and
    /// log f₁; f' from the equation).
    pub fn state(&self, r: f64) -> Option<RiccatiState> {
        let (y, _) = self.dense.eval(r)?;
        let f_prime = self.coeffs.f_prime(self.potential.value(r), y[0], y[2]);
        Some(RiccatiState { r, f: y[0], f_prime, w: y[2], log_f1: y[1] })
    }
}

impl Perturbation for RiccatiSolution {
    fn start(&self) -> f64 {
        self.start
    }
    fn end(&self) -> f64 {
        self.end
    }
    fn eval(&self, r: f64) -> Option<PerturbationPoint> {
        self.state(r).map(|s| PerturbationPoint { f: s.f, f_prime: s.f_prime, log_f1: s.log_f1 })
    }
}

fn check_consistency(v: &dyn Potential, params: &ManifoldParams) -> Result<()> {
    params.validate()?;
    if (v.tau() - params.tau()).abs() > 1e-12 * (1.0 + params.tau()) {
        return Err(Error::InvalidParameter(format!(
            "potential tau = {} differs from manifold tau = {}",
            v.tau(),
            params.tau()
        )));
    }
    Ok(())
}

fn output_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).floor() as usize;
    let mut g: Vec<f64> = (1..=n).map(|i| start + i as f64 * step).filter(|&r| r < end).collect();
    g.push(end);
    g
}

/// Initial (log f₁, w) at b − δ.
fn initial_tail(params: &ManifoldParams, sphere_term: bool) -> Result<(f64, f64, f64)> {
    let start = params.b - params.delta;
    let m = params.s() + 1.0;
    let log_f1 = m * (start - 2.0);
    let lambda = if sphere_term { params.mode()?.lambda } else { 0.0 };
    Ok((start, log_f1, lambda * (-2.0 * log_f1).exp()))
}

/// Integrate the f-equation from b − δ to `cfg.r_end`.
pub fn solve_f(v: Arc<dyn Potential>, params: &ManifoldParams, cfg: &SolveConfig) -> Result<RiccatiSolution> {
    check_consistency(v.as_ref(), params)?;
    cfg.validate()?;
    let co = Coeffs::new(params);
    let (start, lf0, w0) = initial_tail(params, cfg.sphere_term)?;
    if !(cfg.r_end > start) {
        return Err(Error::InvalidParameter(format!("r_end = {} must exceed b - delta = {start}", cfg.r_end)));
    }
    let bridge_end = params.b + params.delta;
    let grid = output_grid(start, cfg.r_end, cfg.sample_step);
    let mut bp = v.breakpoints();
    bp.extend(grid.iter().copied());
    bp.push(bridge_end);
    let opts = OdeOptions::default().with_tol(cfg.rel_tol, cfg.abs_tol).with_max_step(cfg.max_step);

    let mut dense = DenseTrajectory::new();
    let f0 = cfg.f0;
    let mut samples = vec![RiccatiState { r: start, f: f0, f_prime: co.f_prime(v.value(start), f0, w0), w: w0, log_f1: lf0 }];
    let mut next = 0;
    let mut bracket: Option<(f64, f64)> = None;
    let vv = v.clone();
    integrate_piecewise(
        |r, y: &[f64; 3]| {
            let f = y[0];
            [co.f_prime(vv.value(r), f, y[2]), co.s + f, -2.0 * (co.s + f) * y[2]]
        },
        start,
        [f0, lf0, w0],
        cfg.r_end,
        &bp,
        &opts,
        |st: &Step<3>| {
            if cfg.dense_output {
                dense.push(st);
            }
            if st.t0 < bridge_end && cfg.f0 == 1.0 && !(st.y1[0] > 0.5 && st.y1[0] < 2.0) {
                bracket = Some((st.t1, st.y1[0]));
                return Control::Stop;
            }
            while next < grid.len() && grid[next] <= st.t1 + 1e-12 * st.t1 {
                let r = grid[next];
                let y = if (r - st.t1).abs() <= 1e-12 * st.t1 { st.y1 } else { st.interpolate(r).0 };
                samples.push(RiccatiState {
                    r,
                    f: y[0],
                    f_prime: co.f_prime(v.value(r), y[0], y[2]),
                    w: y[2],
                    log_f1: y[1],
                });
                next += 1;
            }
            Control::Continue
        },
    )?;
    if let Some((r, f)) = bracket {
        return Err(Error::BridgeBracket { r, f });
    }
    Ok(RiccatiSolution { potential: v, coeffs: co, start, end: cfg.r_end, dense, samples })
}

/// Sample of the t-coordinate solve: t(r) = mantissa·e^{κ·offset}, with
/// κ = (n − 1)√|K₀|, and the implied f = t·e^{−κr}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TSample {
    pub r: f64,
    pub mantissa: f64,
    pub offset: f64,
    pub f: f64,
}

impl TSample {
    /// ln |t(r)|.
    pub fn ln_abs_t(&self, kappa: f64) -> f64 {
        self.mantissa.abs().ln() + kappa * self.offset
    }
}

#[derive(Clone, Debug)]
pub struct TSolution {
    pub kappa: f64,
    pub samples: Vec<TSample>,
}

/// Solve the same problem in the coordinate t = f·e^{κr}:
/// t' + (n−1)/2·t²e^{−κr} + (2/(n−1))·w·e^{κr} = (2/(n−1))(V − τ²)e^{κr}.
///
/// The exponential is split off per segment of length ≤ 10: on [r_a, r_b]
/// the solver evolves t_a = f(r)·e^{κ(r − r_a)}, restarting with t_a = f at
/// each segment end, so the run never overflows.
pub fn solve_t(v: Arc<dyn Potential>, params: &ManifoldParams, cfg: &SolveConfig) -> Result<TSolution> {
    check_consistency(v.as_ref(), params)?;
    cfg.validate()?;
    let co = Coeffs::new(params);
    let kappa = 2.0 * co.half_nm1 * co.s;
    let (start, lf0, w0) = initial_tail(params, cfg.sphere_term)?;
    let seg_len = if kappa > 0.0 { (200.0 / kappa).min(10.0) } else { 10.0 };
    let grid = output_grid(start, cfg.r_end, cfg.sample_step);
    let opts = OdeOptions::default().with_tol(cfg.rel_tol, cfg.abs_tol).with_max_step(cfg.max_step);
    let vbp = v.breakpoints();

    let mut samples = vec![TSample { r: start, mantissa: cfg.f0, offset: start, f: cfg.f0 }];
    let mut ra = start;
    let mut y = [cfg.f0, lf0, w0];
    let mut next = 0;
    while ra < cfg.r_end {
        let rb = (ra + seg_len).min(cfg.r_end);
        let mut bp: Vec<f64> = vbp.iter().copied().filter(|&x| x > ra && x < rb).collect();
        bp.extend(grid.iter().copied().filter(|&x| x > ra && x < rb));
        let (_, yb) = integrate_piecewise(
            |r, s: &[f64; 3]| {
                let e = (kappa * (r - ra)).exp();
                let f = s[0] / e;
                let g = (v.value(r) - co.tau2 - s[2]) / co.half_nm1;
                [g * e - co.half_nm1 * s[0] * f, co.s + f, -2.0 * (co.s + f) * s[2]]
            },
            ra,
            y,
            rb,
            &bp,
            &opts,
            |st: &Step<3>| {
                while next < grid.len() && grid[next] <= st.t1 + 1e-12 * st.t1 {
                    let r = grid[next];
                    let m = if (r - st.t1).abs() <= 1e-12 * st.t1 { st.y1[0] } else { st.interpolate(r).0[0] };
                    samples.push(TSample { r, mantissa: m, offset: ra, f: m * (-kappa * (r - ra)).exp() });
                    next += 1;
                }
                Control::Continue
            },
        )?;
        let f = yb[0] * (-kappa * (rb - ra)).exp();
        y = [f, yb[1], yb[2]];
        ra = rb;
    }
    Ok(TSolution { kappa, samples })
}

/// Largest |f_t − f| / (1 + |f|) over common output radii.
pub fn cross_check(f: &RiccatiSolution, t: &TSolution) -> f64 {
    let mut worst: f64 = 0.0;
    let mut j = 0;
    for s in &t.samples {
        while j < f.samples.len() && f.samples[j].r < s.r - 1e-9 {
            j += 1;
        }
        if j < f.samples.len() && (f.samples[j].r - s.r).abs() <= 1e-9 * s.r {
            worst = worst.max((s.f - f.samples[j].f).abs() / (1.0 + f.samples[j].f.abs()));
        }
    }
    worst
}

/// Worst ratio |t(r)| / (|t(r₀)| + 10·h(r)e^{κr}/(1 + r)) for r ≥ r₀;
/// the bound holds when the result is ≤ 1.
pub fn t_bound_ratio(t: &TSolution, envelope: &Envelope, r0: f64) -> f64 {
    let Some(first) = t.samples.iter().find(|s| s.r >= r0 - 1e-9) else { return 0.0 };
    let ln_t0 = first.ln_abs_t(t.kappa);
    let mut worst: f64 = 0.0;
    for s in t.samples.iter().filter(|s| s.r >= first.r) {
        let ln_t = s.ln_abs_t(t.kappa);
        let ln_b = (envelope.eval(s.r) / (1.0 + s.r)).ln() + 10f64.ln() + t.kappa * s.r;
        // log of the sum of the two exponentials
        let hi = ln_t0.max(ln_b);
        let ln_bound = hi + ((ln_t0 - hi).exp() + (ln_b - hi).exp()).ln();
        worst = worst.max((ln_t - ln_bound).exp());
    }
    worst
}

/// Envelope constants of the perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub c_f: f64,
    pub c_fprime: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

/// C_f = max |f|(1+r)/h(r), C_f' = max |f'|(1+r)/h(r) over samples in [r_lo, r_hi].
pub fn verify_bounds(sol: &RiccatiSolution, envelope: &Envelope, r_lo: f64, r_hi: f64) -> BoundReport {
    let mut c_f: f64 = 0.0;
    let mut c_fp: f64 = 0.0;
    for s in sol.samples.iter().filter(|s| s.r >= r_lo && s.r <= r_hi) {
        let scale = (1.0 + s.r) / envelope.eval(s.r);
        c_f = c_f.max(s.f.abs() * scale);
        c_fp = c_fp.max(s.f_prime.abs() * scale);
    }
    BoundReport { c_f, c_fprime: c_fp, r_lo, r_hi }
}

/// One instance of the comparison problem
/// y' + m(r)y² + A·e^{κr}/exp(I) = h(r), I' = 2(1 + y·e^{−κr}), for y = f (h1) and y = g (h2).
pub struct ComparisonProblem<'a> {
    pub kappa: f64,
    pub a: f64,
    pub m: &'a (dyn Fn(f64) -> f64 + Sync),
    pub h1: &'a (dyn Fn(f64) -> f64 + Sync),
    pub h2: &'a (dyn Fn(f64) -> f64 + Sync),
    pub r0: f64,
    pub r_end: f64,
    pub f0: f64,
    pub g0: f64,
    /// ∫₂^{r₀} 2(1 + y·e^{−κx}) dx, shared history.
    pub i0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonOutcome {
    pub passed: bool,
    /// min (f − g) over accepted steps.
    pub min_gap: f64,
    /// Radius reached; short of r_end when a solution blew up.
    pub r_reached: f64,
    pub blew_up: bool,
}

/// Integrate both comparison ODEs together and check f ≥ g throughout.
pub fn comparison_check(p: &ComparisonProblem<'_>) -> Result<ComparisonOutcome> {
    if !(p.a >= 0.0) || !(p.f0 >= p.g0) || !(p.r_end > p.r0) {
        return Err(Error::InvalidParameter("comparison needs A >= 0, f(r0) >= g(r0), r_end > r0".into()));
    }
    let n = 2000;
    for i in 0..=n {
        let r = p.r0 + (p.r_end - p.r0) * i as f64 / n as f64;
        if (p.h1)(r) < (p.h2)(r) || (p.m)(r) < 0.0 {
            return Err(Error::InvalidParameter(format!("comparison precondition violated at r = {r}")));
        }
    }
    let opts = OdeOptions::default().with_tol(1e-11, 1e-13).with_max_step(0.05);
    let rhs = |r: f64, y: &[f64; 4]| {
        let e = (-p.kappa * r).exp();
        let src_f = p.a * (p.kappa * r - y[1]).exp();
        let src_g = p.a * (p.kappa * r - y[3]).exp();
        let mr = (p.m)(r);
        [
            (p.h1)(r) - mr * y[0] * y[0] - src_f,
            2.0 * (1.0 + y[0] * e),
            (p.h2)(r) - mr * y[2] * y[2] - src_g,
            2.0 * (1.0 + y[2] * e),
        ]
    };
    let mut min_gap = p.f0 - p.g0;
    let mut passed = true;
    let mut last = p.r0;
    let res = integrate_piecewise(rhs, p.r0, [p.f0, p.i0, p.g0, p.i0], p.r_end, &[], &opts, |st: &Step<4>| {
        let gap = st.y1[0] - st.y1[2];
        let tol = 1e-8 * (1.0 + st.y1[0].abs() + st.y1[2].abs());
        min_gap = min_gap.min(gap);
        if gap < -tol {
            passed = false;
        }
        last = st.t1;
        if st.y1.iter().any(|x| x.abs() > 1e12) {
            return Control::Stop;
        }
        Control::Continue
    });
    let blew_up = match res {
        Ok((r, y)) => r < p.r_end || y.iter().any(|x| x.abs() > 1e12),
        Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite { .. }) => true,
        Err(e) => return Err(e),
    };
    Ok(ComparisonOutcome { passed, min_gap, r_reached: last, blew_up })
}

/// Comparison instance with ordered forcing h₁ ≥ h₂ and f(r₀) ≥ g(r₀):
/// m = m₀(1 + sin ωr), h₂ = amp·cos(ωr)/(1 + r), h₁ = h₂ + gap·(1 + sin 2r)/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonInstance {
    pub kappa: f64,
    pub a: f64,
    pub m0: f64,
    pub amp: f64,
    pub gap: f64,
    pub d0: f64,
    pub omega: f64,
}

impl ComparisonInstance {
    pub fn random<R: rand::Rng>(rng: &mut R) -> Self {
        Self {
            kappa: rng.gen_range(1.0..3.0),
            a: rng.gen_range(0.0..2.0),
            m0: rng.gen_range(0.0..1.0),
            amp: rng.gen_range(0.0..2.0),
            gap: rng.gen_range(0.0..1.0),
            d0: rng.gen_range(0.0..0.5),
            omega: rng.gen_range(0.5..3.0),
        }
    }

    pub fn check(&self) -> Result<ComparisonOutcome> {
        let c = *self;
        let m = move |r: f64| c.m0 * (1.0 + (c.omega * r).sin());
        let h2 = move |r: f64| c.amp * (c.omega * r).cos() / (1.0 + r);
        let h1 = move |r: f64| h2(r) + c.gap * (1.0 + (2.0 * r).sin()) / 2.0;
        comparison_check(&ComparisonProblem {
            kappa: c.kappa,
            a: c.a,
            m: &m,
            h1: &h1,
            h2: &h2,
            r0: 3.0,
            r_end: 12.0,
            f0: 0.1 + c.d0,
            g0: 0.1,
            i0: 2.0,
        })
    }
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["r", "f", "f_prime", "w"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_profile, effective_potential, radial_curvature, TildePotential};
    use crate::potential::{build_potential, FnPotential, PhasePolicy, PotentialSpec, ScheduleConfig};

    fn params() -> ManifoldParams {
        ManifoldParams::default()
    }

    fn constant_tail() -> Arc<dyn Potential> {
        Arc::new(FnPotential::new(1.5, 1.0, |_| 1.0))
    }

    #[test]
    fn stationary_solution_stays_zero() {
        let cfg = SolveConfig { f0: 0.0, sphere_term: false, r_end: 200.0, ..SolveConfig::default() };
        let sol = solve_f(constant_tail(), &params(), &cfg).unwrap();
        assert!(sol.samples().iter().all(|s| s.f == 0.0));
        let t = solve_t(constant_tail(), &params(), &cfg).unwrap();
        assert!(t.samples.iter().all(|s| s.f == 0.0));
    }

    #[test]
    fn tilde_band_residual_vanishes() {
        // With f ≡ 1 on [2, b − δ], the equation's left side is 4 + w = Ṽ for n = 3, K₀ = −1.
        let p = params();
        let prof = build_profile(&p, None).unwrap();
        for r in [3.0, 6.0, 9.5] {
            let w = 2.0 * (-4.0f64 * (r - 2.0)).exp();
            let lhs = 1.0 + 2.0 + 1.0 + 0.0 + w;
            assert!((lhs - effective_potential(&prof, 2.0, r).unwrap()).abs() < 1e-14);
        }
    }

    fn zero_tail() -> Arc<dyn Potential> {
        let p = params();
        let tilde: Arc<dyn Potential> = Arc::new(TildePotential::new(&p).unwrap());
        let spec = PotentialSpec {
            tau: 1.0,
            envelope: p.envelope.clone(),
            b: p.b,
            delta: p.delta,
            schedule: ScheduleConfig { amplitude_scale: 0.0, phases: PhasePolicy::Continuous, ..Default::default() },
            mollifier_order: 4,
            seed: 0,
        };
        Arc::new(build_potential(tilde, &spec).unwrap())
    }

    #[test]
    fn unperturbed_tail_decays_and_closes() {
        let p = params();
        let v = zero_tail();
        let cfg = SolveConfig { r_end: 200.0, ..SolveConfig::default() };
        let sol = Arc::new(solve_f(v.clone(), &p, &cfg).unwrap());
        assert!(sol.samples().iter().all(|st| st.w > 0.0));
        let b1 = verify_bounds(&sol, &p.envelope, 50.0, 100.0);
        let b2 = verify_bounds(&sol, &p.envelope, 100.0, 200.0);
        assert!(b2.c_f < b1.c_f && b2.c_f < 1e-30, "{b1:?} {b2:?}");
        let prof = build_profile(&p, Some(sol.clone())).unwrap();
        for r in [9.9, 10.0, 10.05, 10.3, 50.0, 199.0] {
            let v_eff = effective_potential(&prof, 2.0, r).unwrap();
            assert!((v_eff - v.value(r)).abs() <= 1e-9 * v.value(r).abs(), "r = {r}");
        }
        assert!((radial_curvature(&prof, 150.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_coordinates_agree_with_f() {
        let p = params();
        let tilde: Arc<dyn Potential> = Arc::new(TildePotential::new(&p).unwrap());
        let spec = PotentialSpec {
            tau: 1.0,
            envelope: p.envelope.clone(),
            b: p.b,
            delta: p.delta,
            schedule: ScheduleConfig { phases: PhasePolicy::Random, r_extent: 500.0, ..Default::default() },
            mollifier_order: 4,
            seed: 3,
        };
        let v: Arc<dyn Potential> = Arc::new(build_potential(tilde, &spec).unwrap());
        let cfg = SolveConfig { r_end: 400.0, ..SolveConfig::default() };
        let f = solve_f(v.clone(), &p, &cfg).unwrap();
        let t = solve_t(v, &p, &cfg).unwrap();
        assert!(f.samples().iter().all(|st| st.w > 0.0));
        assert!(cross_check(&f, &t) <= 10.0 * cfg.rel_tol, "{}", cross_check(&f, &t));
        assert!(t_bound_ratio(&t, &p.envelope, p.b + p.delta) <= 1.0);
    }

    #[test]
    fn bridge_bracket_violation_reported() {
        let p = params();
        let wild: Arc<dyn Potential> = Arc::new(FnPotential::new(1.5, 1.0, |r| if r > 9.9 { 60.0 } else { 4.0 }));
        match solve_f(wild, &p, &SolveConfig { r_end: 20.0, ..SolveConfig::default() }) {
            Err(Error::BridgeBracket { r, f }) => assert!(r <= 10.1 && f >= 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comparison_identity_and_strict_order() {
        let m = |_: f64| 0.5;
        let h = |r: f64| (r).sin() / (1.0 + r);
        let h_up = |r: f64| 1.0 + (r).sin() / (1.0 + r);
        let base = ComparisonProblem {
            kappa: 2.0,
            a: 1.0,
            m: &m,
            h1: &h,
            h2: &h,
            r0: 3.0,
            r_end: 10.0,
            f0: 0.2,
            g0: 0.2,
            i0: 2.0,
        };
        let out = comparison_check(&base).unwrap();
        assert!(out.passed && out.min_gap == 0.0);
        let strict = ComparisonProblem { h1: &h_up, ..base };
        let out = comparison_check(&strict).unwrap();
        assert!(out.passed && out.min_gap >= 0.0);
        let bad = ComparisonProblem { h1: &h, h2: &h_up, ..base };
        assert!(comparison_check(&bad).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn comparison_property(kappa in 1.0f64..3.0, a in 0.0f64..2.0, m0 in 0.0f64..1.0,
                               amp in 0.0f64..2.0, gap in 0.0f64..1.0, d0 in 0.0f64..0.5, omega in 0.5f64..3.0) {
            let out = ComparisonInstance { kappa, a, m0, amp, gap, d0, omega }.check().unwrap();
            proptest::prop_assert!(out.passed, "{out:?}");
        }
    }
}
