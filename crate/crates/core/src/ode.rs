//! Adaptive Dormand–Prince 5(4) integration with cubic Hermite dense output.
//!
//! States are fixed-size arrays; complex-valued problems are split into real
//! and imaginary parts by the caller. Integration runs forward or backward
//! depending on the sign of `t1 - t0`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on |step|.
    pub max_step: f64,
    /// Steps smaller than this (relative to |t|) abort the solve.
    pub min_step: f64,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, min_step: 1e-14, initial_step: None }
    }
}

impl OdeOptions {
    pub fn with_tol(mut self, rel: f64, abs: f64) -> Self {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }
}

/// One accepted step, with enough data for Hermite interpolation.
#[derive(Clone, Copy, Debug)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub dy0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub dy1: [f64; N],
}

impl<const N: usize> Step<N> {
    pub fn interpolate(&self, t: f64) -> ([f64; N], [f64; N]) {
        hermite(self.t0, &self.y0, &self.dy0, self.t1, &self.y1, &self.dy1, t)
    }
}

/// Cubic Hermite interpolation of value and derivative on [t0, t1].
pub fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    d0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    d1: &[f64; N],
    t: f64,
) -> ([f64; N], [f64; N]) {
    let h = t1 - t0;
    if h == 0.0 {
        return (*y0, *d0);
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let mut y = [0.0; N];
    let mut dy = [0.0; N];
    for i in 0..N {
        y[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
        dy[i] = dh00 * y0[i] + dh10 * d0[i] + dh01 * y1[i] + dh11 * d1[i];
    }
    (y, dy)
}

/// Observer verdict after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1`, calling `observe` on every
/// accepted step. Returns the final time and state (earlier if the observer
/// stopped the solve).
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<N>) -> Control,
{
    if t1 == t0 {
        return Ok((t0, y0));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { r: t });
    }

    let mut h = match opts.initial_step {
        Some(h0) => h0.abs(),
        None => {
            let scale: f64 = y
                .iter()
                .zip(k1.iter())
                .map(|(yi, ki)| {
                    let sc = opts.abs_tol + opts.rel_tol * yi.abs();
                    (ki / sc).powi(2)
                })
                .sum::<f64>()
                .sqrt()
                / (N as f64).sqrt();
            let guess = if scale > 1e-10 { 0.01 / scale } else { 1e-3 * span.max(1.0) };
            guess.min(0.05 * span).max(1e-8 * span)
        }
    };
    h = h.min(opts.max_step).min(span);

    let mut err_prev: f64 = 1e-4;
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= span * 1e-15 {
            break;
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let hs = h * dir;
        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let t_new = if last { t1 } else { t + hs };
        let k7 = rhs(t_new, &y_new);

        let mut err = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
            finite &= y_new[i].is_finite() && k7[i].is_finite();
        }
        err = (err / N as f64).sqrt();
        if !finite {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            let step = Step { t0: t, y0: y, dy0: k1, t1: t_new, y1: y_new, dy1: k7 };
            t = t_new;
            y = y_new;
            k1 = k7;
            if observe(&step) == Control::Stop || last {
                return Ok((t, y));
            }
            // PI step-size controller.
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0)
            };
            err_prev = err.max(1e-4);
            h = (h * fac).min(opts.max_step);
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
            if h < opts.min_step * t.abs().max(1.0) {
                return Err(if finite { Error::StepUnderflow { r: t } } else { Error::NonFinite { r: t } });
            }
        }
    }
    Ok((t, y))
}

/// Integrate across `[t0, t1]`, restarting the solver at each breakpoint so
/// that kinks or jumps in the right-hand side never fall inside a step.
pub fn integrate_piecewise<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    breakpoints: &[f64],
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<N>) -> Control,
{
    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if t1 < t0 {
        cuts.reverse();
    }
    cuts.push(t1);
    let mut t = t0;
    let mut y = y0;
    let mut stopped = false;
    for c in cuts {
        // Keep stage evaluations strictly inside the segment so a jump at
        // either end is seen from the correct side.
        let (a, b) = if t < c { (t, c) } else { (c, t) };
        let eps = 1e-13 * a.abs().max(b.abs()).max(1.0);
        let (a, b) = if b - a > 4.0 * eps { (a + eps, b - eps) } else { (a, b) };
        let inner = |s: f64, y: &[f64; N]| rhs(s.clamp(a, b), y);
        let (tt, yy) = integrate(inner, t, y, c, opts, |s| {
            let ctl = observe(s);
            if ctl == Control::Stop {
                stopped = true;
            }
            ctl
        })?;
        t = tt;
        y = yy;
        if stopped {
            break;
        }
    }
    Ok((t, y))
}

/// Accepted steps of a solve, ordered along the direction of integration,
/// evaluable anywhere inside the covered span.
#[derive(Clone, Debug, Default)]
pub struct DenseTrajectory<const N: usize> {
    steps: Vec<Step<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    pub fn new() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn push(&mut self, s: &Step<N>) {
        self.steps.push(*s);
    }

    pub fn steps(&self) -> &[Step<N>] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// (min, max) of the covered interval.
    pub fn span(&self) -> Option<(f64, f64)> {
        let first = self.steps.first()?;
        let last = self.steps.last()?;
        let a = first.t0.min(last.t1);
        let b = first.t0.max(last.t1);
        Some((a, b))
    }

    /// Knots: all step endpoints in order.
    pub fn knots(&self) -> impl Iterator<Item = (f64, [f64; N], [f64; N])> + '_ {
        self.steps
            .first()
            .map(|s| (s.t0, s.y0, s.dy0))
            .into_iter()
            .chain(self.steps.iter().map(|s| (s.t1, s.y1, s.dy1)))
    }

    /// Interpolated state and derivative at `t`; `None` outside the span.
    pub fn eval(&self, t: f64) -> Option<([f64; N], [f64; N])> {
        let (a, b) = self.span()?;
        if t < a || t > b {
            return None;
        }
        let forward = self.steps[0].t1 >= self.steps[0].t0;
        let idx = if forward {
            self.steps.partition_point(|s| s.t1 < t)
        } else {
            self.steps.partition_point(|s| s.t1 > t)
        };
        let s = &self.steps[idx.min(self.steps.len() - 1)];
        Some(s.interpolate(t))
    }
}
