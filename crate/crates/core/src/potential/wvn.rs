use std::f64::consts::PI;

use super::{core_to_constant, Potential};
use crate::error::{Error, Result};
use crate::schrodinger::{pruefer_flow, regular_at, Energy, PrueferConfig, PrueferState, SchrodingerConfig};
use crate::smooth::step;

/// Bessel core, then τ² from r = 1.5, then the tail
/// τ² + c·sin(2k̄₀r + β)/r switched on over [r0 − band, r0].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerVonNeumann {
    pub nu: f64,
    pub tau: f64,
    pub c: f64,
    pub k_bar0: f64,
    pub r0: f64,
    pub band: f64,
    pub phase: f64,
}

impl WignerVonNeumann {
    pub fn new(nu: f64, tau: f64, c: f64, k_bar0: f64, r0: f64, phase: f64) -> Result<Self> {
        let band = 0.5;
        if !(c >= 0.0) || !(k_bar0 > 0.0) {
            return Err(Error::InvalidParameter(format!("need c >= 0 and k_bar0 > 0, got c = {c}, k_bar0 = {k_bar0}")));
        }
        if r0 - band < 1.5 {
            return Err(Error::InvalidParameter(format!("r0 = {r0} leaves no room for the switch-on band")));
        }
        Ok(Self { nu, tau, c, k_bar0, r0, band, phase })
    }

    /// Choose the phase β so that the regular solution at λ₀ = τ² + k̄₀² is
    /// the decaying solution of the tail.
    ///
    /// The decaying solution is traced backward from `r_far`, seeded at the
    /// phase relation 2(θ − k̄₀r) = β − π, and β is adjusted until its angle
    /// at r0 − band agrees with the regular solution's modulo π.
    pub fn tuned(nu: f64, tau: f64, c: f64, k_bar0: f64, r0: f64, r_far: f64) -> Result<Self> {
        let base = Self::new(nu, tau, c, k_bar0, r0, 0.0)?;
        if c == 0.0 {
            return Ok(base);
        }
        let e = Energy::from_k_bar(k_bar0, tau);
        let rm = r0 - base.band;
        let reg = regular_at(&base, e.lambda, rm, &SchrodingerConfig::default())?;
        let th_reg = (k_bar0 * reg.u).atan2(reg.u_prime);
        let pcfg = PrueferConfig { rel_tol: 1e-11, abs_tol: 1e-12, ..PrueferConfig::default() };
        let mismatch = |beta: f64| -> Result<f64> {
            let v = Self { phase: beta, ..base };
            let far = PrueferState { r: r_far, log_r2: 0.0, theta: k_bar0 * r_far + 0.5 * (beta - PI) };
            let (back, _) = pruefer_flow(&v, &e, far, rm, &[], &pcfg)?;
            Ok(wrap_half_pi(back.theta - th_reg))
        };
        let mut b0 = 2.0 * (th_reg - k_bar0 * rm) + PI;
        let mut d0 = mismatch(b0)?;
        let mut b1 = b0 - 2.0 * d0;
        for _ in 0..40 {
            let d1 = mismatch(b1)?;
            if d1.abs() < 1e-12 {
                break;
            }
            let slope = if (d1 - d0).abs() > 1e-15 && (b1 - b0).abs() > 1e-15 { (d1 - d0) / (b1 - b0) } else { 0.5 };
            let slope = if slope > 0.05 { slope } else { 0.5 };
            let b2 = b1 - d1 / slope;
            b0 = b1;
            d0 = d1;
            b1 = b2;
        }
        let tuned = Self { phase: b1.rem_euclid(2.0 * PI), ..base };
        let check = mismatch(tuned.phase)?;
        if check.abs() > 1e-8 {
            return Err(Error::NoConvergence(format!("phase tuning left angle mismatch {check:e}")));
        }
        Ok(tuned)
    }

    /// Fitted-power prediction −c/(4k̄₀) for R at the resonant momentum.
    pub fn predicted_power(&self) -> f64 {
        -self.c / (4.0 * self.k_bar0)
    }

    fn tail(&self, r: f64) -> f64 {
        self.c * (2.0 * self.k_bar0 * r + self.phase).sin() / r
    }
}

fn wrap_half_pi(x: f64) -> f64 {
    let y = x.rem_euclid(PI);
    if y > 0.5 * PI {
        y - PI
    } else {
        y
    }
}

impl Potential for WignerVonNeumann {
    fn value(&self, r: f64) -> f64 {
        let t2 = self.tau * self.tau;
        let lo = self.r0 - self.band;
        if r <= lo {
            core_to_constant(self.nu, self.tau, r)
        } else if r >= self.r0 {
            t2 + self.tail(r)
        } else {
            t2 + step((r - lo) / self.band) * self.tail(r)
        }
    }
    fn nu(&self) -> f64 {
        self.nu
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![1.0, 1.5, self.r0 - self.band, self.r0]
    }
    fn free_radius(&self) -> Option<f64> {
        (self.c == 0.0).then_some(1.5)
    }
}
