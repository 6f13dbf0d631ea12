//! Potentials V(r) on (0, ∞): the Bessel core, simple test potentials, the
//! C^∞ mollifier, Wigner–von Neumann tails and the resonant construction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::smooth::step;

mod resonant;
mod wvn;

pub use resonant::{
    build_potential, dyadic_schedule, verify_contract, ContractCheck, ContractReport, PhasePolicy, PieceSpec,
    PotentialSidecar, PotentialSpec, ResonantPotential, ScheduleConfig,
};
pub use wvn::WignerVonNeumann;

/// A real potential on (0, ∞) whose restriction to (0, 1] is the Bessel
/// potential (ν² − 1/4)/r² and which tends to τ² at infinity.
pub trait Potential: Send + Sync {
    fn value(&self, r: f64) -> f64;

    fn nu(&self) -> f64;

    fn tau(&self) -> f64;

    /// Radii where V or one of its derivatives may jump, or where a narrow
    /// feature starts. Integrators restart there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// A radius beyond which V ≡ τ² exactly, if any.
    fn free_radius(&self) -> Option<f64> {
        None
    }

    fn derivative(&self, r: f64) -> f64 {
        let h = 1e-4 * r.max(1.0);
        let d1 = (self.value(r + h) - self.value(r - h)) / (2.0 * h);
        let d2 = (self.value(r + 0.5 * h) - self.value(r - 0.5 * h)) / h;
        (4.0 * d2 - d1) / 3.0
    }
}

impl<P: Potential + ?Sized> Potential for Arc<P> {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn nu(&self) -> f64 {
        (**self).nu()
    }
    fn tau(&self) -> f64 {
        (**self).tau()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn free_radius(&self) -> Option<f64> {
        (**self).free_radius()
    }
    fn derivative(&self, r: f64) -> f64 {
        (**self).derivative(r)
    }
}

/// (ν² − 1/4)/r².
#[inline]
pub fn bessel_core(nu: f64, r: f64) -> f64 {
    (nu * nu - 0.25) / (r * r)
}

/// Bessel core on (0, 1] and the constant τ² beyond (a jump at r = 1).
#[derive(Clone, Copy, Debug)]
pub struct FreeTail {
    pub nu: f64,
    pub tau: f64,
}

impl Potential for FreeTail {
    fn value(&self, r: f64) -> f64 {
        if r <= 1.0 {
            bessel_core(self.nu, r)
        } else {
            self.tau * self.tau
        }
    }
    fn nu(&self) -> f64 {
        self.nu
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![1.0]
    }
    fn free_radius(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Bessel core blended smoothly onto τ² over [1, 1.5], plus a compactly
/// supported C^∞ bump `amplitude · exp(1 − 1/(1 − x²))`, x = (r − center)/width.
#[derive(Clone, Copy, Debug)]
pub struct BumpTail {
    pub nu: f64,
    pub tau: f64,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

const CORE_BLEND: (f64, f64) = (1.0, 1.5);

impl BumpTail {
    pub fn new(nu: f64, tau: f64, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || center - width < CORE_BLEND.1 {
            return Err(Error::InvalidParameter(format!(
                "bump support [{}, {}] must lie beyond r = {}",
                center - width,
                center + width,
                CORE_BLEND.1
            )));
        }
        Ok(Self { nu, tau, amplitude, center, width })
    }
}

/// exp(1 − 1/(1 − x²)) on |x| < 1, zero outside; peak value 1 at x = 0.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Bessel core for r ≤ 1, τ² for r ≥ 1.5, C^∞ blend between.
pub fn core_to_constant(nu: f64, tau: f64, r: f64) -> f64 {
    let t2 = tau * tau;
    if r <= CORE_BLEND.0 {
        bessel_core(nu, r)
    } else if r >= CORE_BLEND.1 {
        t2
    } else {
        let s = step((r - CORE_BLEND.0) / (CORE_BLEND.1 - CORE_BLEND.0));
        (1.0 - s) * bessel_core(nu, r) + s * t2
    }
}

impl Potential for BumpTail {
    fn value(&self, r: f64) -> f64 {
        core_to_constant(self.nu, self.tau, r) + self.amplitude * bump((r - self.center) / self.width)
    }
    fn nu(&self) -> f64 {
        self.nu
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![CORE_BLEND.0, CORE_BLEND.1, self.center - self.width, self.center + self.width]
    }
    fn free_radius(&self) -> Option<f64> {
        Some(self.center + self.width)
    }
}

/// Potential given by a closure, for tests and experiments.
pub struct FnPotential {
    nu: f64,
    tau: f64,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    breaks: Vec<f64>,
    free: Option<f64>,
}

impl FnPotential {
    pub fn new(nu: f64, tau: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { nu, tau, f: Box::new(f), breaks: Vec::new(), free: None }
    }

    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breaks = b;
        self
    }

    pub fn with_free_radius(mut self, r: f64) -> Self {
        self.free = Some(r);
        self
    }
}

impl Potential for FnPotential {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }
    fn nu(&self) -> f64 {
        self.nu
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
    fn free_radius(&self) -> Option<f64> {
        self.free
    }
}

pub type Segment = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Piecewise function made C^∞ by convex blending of neighbouring pieces
/// over a band around each breakpoint; exact outside the bands.
#[derive(Clone)]
pub struct Mollified {
    pieces: Vec<Segment>,
    breaks: Vec<f64>,
    widths: Vec<f64>,
    order: usize,
}

impl std::fmt::Debug for Mollified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mollified")
            .field("breaks", &self.breaks)
            .field("widths", &self.widths)
            .field("order", &self.order)
            .finish()
    }
}

impl Mollified {
    /// `pieces[k]` is active between `breaks[k-1]` and `breaks[k]`; each
    /// piece must be evaluable a band width past its own interval.
    pub fn new(pieces: Vec<Segment>, breaks: Vec<f64>, widths: Vec<f64>, order: usize) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 || widths.len() != breaks.len() {
            return Err(Error::InvalidParameter("mollifier needs one more piece than breakpoints".into()));
        }
        if order < 4 {
            return Err(Error::InvalidParameter(format!("mollifier order {order} below 4")));
        }
        for (i, w) in widths.iter().enumerate() {
            if !(*w > 0.0) {
                return Err(Error::InvalidParameter(format!("mollifier width {w} at breakpoint {i}")));
            }
        }
        for i in 1..breaks.len() {
            if breaks[i - 1] + widths[i - 1] >= breaks[i] - widths[i] {
                return Err(Error::InvalidParameter(format!(
                    "overlapping mollifier neighbourhoods at {} and {}",
                    breaks[i - 1],
                    breaks[i]
                )));
            }
        }
        Ok(Self { pieces, breaks, widths, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Band edges, in increasing order.
    pub fn band_edges(&self) -> Vec<f64> {
        self.breaks.iter().zip(&self.widths).flat_map(|(b, w)| [b - w, b + w]).collect()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let idx = self.breaks.partition_point(|&b| b <= r);
        // Nearest breakpoint is either idx-1 or idx.
        for k in [idx.wrapping_sub(1), idx] {
            if k < self.breaks.len() {
                let (b, w) = (self.breaks[k], self.widths[k]);
                if r > b - w && r < b + w {
                    let s = step((r - (b - w)) / (2.0 * w));
                    return (1.0 - s) * (self.pieces[k])(r) + s * (self.pieces[k + 1])(r);
                }
            }
        }
        (self.pieces[idx])(r)
    }
}

/// Mollify a piecewise function with a uniform band half-width.
pub fn mollify(pieces: Vec<Segment>, breaks: Vec<f64>, width: f64, order: usize) -> Result<Mollified> {
    let widths = vec![width; breaks.len()];
    Mollified::new(pieces, breaks, widths, order)
}
