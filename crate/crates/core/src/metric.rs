//! Warp profile f₁ of the metric dr² + f₁(r)² g_{S^{n−1}}, its curvature and
//! the effective potentials of the separated radial operators.
//!
//! log f₁ = log r on (0, 1], a C^∞ blend on (1, 2), m·(r − 2) on [2, b − δ]
//! with m = √|K₀| + 1, and ∫(√|K₀| + f) from the Riccati solution beyond.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::smooth::{step_jet, Jet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModePolicy {
    /// Smallest spherical mode with ν > 1.
    Auto,
    Index(u32),
}

impl Default for ModePolicy {
    fn default() -> Self {
        ModePolicy::Auto
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldParams {
    pub n: u32,
    pub k0: f64,
    pub envelope: Envelope,
    pub b: f64,
    pub delta: f64,
    pub mode: ModePolicy,
}

impl Default for ManifoldParams {
    fn default() -> Self {
        Self { n: 3, k0: -1.0, envelope: Envelope::Log, b: 10.0, delta: 0.1, mode: ModePolicy::Auto }
    }
}

/// Resolved spherical mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mode {
    pub index: u32,
    pub lambda: f64,
    pub multiplicity: u128,
    pub nu: f64,
}

impl ManifoldParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {} must be >= 2", self.n)));
        }
        if !(self.k0 < 0.0) || !self.k0.is_finite() {
            return Err(Error::InvalidParameter(format!("K0 = {} must be negative", self.k0)));
        }
        if !(self.b >= 10.0) {
            return Err(Error::InvalidParameter(format!("b = {} must be >= 10", self.b)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidParameter(format!("delta = {} must satisfy 0 < delta < 1/2", self.delta)));
        }
        self.envelope.validate()?;
        self.mode().map(|_| ())
    }

    /// √|K₀|.
    pub fn s(&self) -> f64 {
        self.k0.abs().sqrt()
    }

    /// τ = (n − 1)√|K₀|/2.
    pub fn tau(&self) -> f64 {
        0.5 * (self.n as f64 - 1.0) * self.s()
    }

    pub fn mode(&self) -> Result<Mode> {
        let index = match self.mode {
            ModePolicy::Auto => choose_nu(self.n)?.0,
            ModePolicy::Index(i) => i,
        };
        let (lambda, multiplicity) = sphere_mode(self.n, index)?;
        let base = bessel_shift(self.n) + lambda;
        if base < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mode {index} gives (n-1)(n-3)/4 + lambda = {base} < 1, so nu <= 1"
            )));
        }
        Ok(Mode { index, lambda, multiplicity, nu: (base + 0.25).sqrt() })
    }
}

/// (n − 1)(n − 3)/4.
fn bessel_shift(n: u32) -> f64 {
    let n = n as f64;
    0.25 * (n - 1.0) * (n - 3.0)
}

fn binom(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// Eigenvalue i(i + n − 2) of the round S^{n−1} and its multiplicity.
pub fn sphere_mode(n: u32, i: u32) -> Result<(f64, u128)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be >= 2")));
    }
    let (n, i) = (n as i64, i as i64);
    let lambda = (i * (i + n - 2)) as f64;
    let q = if i == 0 { 1 } else { binom(n + i - 1, i) - binom(n + i - 3, i - 2) };
    Ok((lambda, q))
}

/// Smallest mode index with (n − 1)(n − 3)/4 + λ_i ≥ 1; returns (i, λ_i, ν).
pub fn choose_nu(n: u32) -> Result<(u32, f64, f64)> {
    let shift = bessel_shift(n);
    for i in 0.. {
        let (lambda, _) = sphere_mode(n, i)?;
        if shift + lambda >= 1.0 {
            return Ok((i, lambda, (shift + lambda + 0.25).sqrt()));
        }
    }
    unreachable!()
}

/// Metric perturbation f on [b − δ, ∞), with log f₁ and f'.
pub trait Perturbation: Send + Sync {
    fn start(&self) -> f64;
    fn end(&self) -> f64;
    fn eval(&self, r: f64) -> Option<PerturbationPoint>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationPoint {
    pub f: f64,
    pub f_prime: f64,
    pub log_f1: f64,
}

/// log f₁ and its first two derivatives at r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub r: f64,
    pub log_f1: f64,
    pub g1: f64,
    pub g2: f64,
}

impl ProfilePoint {
    pub fn f1(&self) -> f64 {
        self.log_f1.exp()
    }
    pub fn f1_prime(&self) -> f64 {
        self.f1() * self.g1
    }
    pub fn f1_second(&self) -> f64 {
        self.f1() * (self.g2 + self.g1 * self.g1)
    }
}

#[derive(Clone)]
pub struct WarpProfile {
    params: ManifoldParams,
    mode: Mode,
    tail: Option<Arc<dyn Perturbation>>,
}

impl std::fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WarpProfile").field("params", &self.params).field("mode", &self.mode).finish()
    }
}

/// Build the profile; without a perturbation f ≡ 1 on all of [2, ∞)
/// (the profile of Ṽ).
pub fn build_profile(params: &ManifoldParams, tail: Option<Arc<dyn Perturbation>>) -> Result<WarpProfile> {
    params.validate()?;
    if let Some(t) = &tail {
        let b_minus = params.b - params.delta;
        if (t.start() - b_minus).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "perturbation starts at {} instead of b - delta = {b_minus}",
                t.start()
            )));
        }
    }
    Ok(WarpProfile { params: params.clone(), mode: params.mode()?, tail })
}

impl WarpProfile {
    pub fn params(&self) -> &ManifoldParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Piece boundaries 1, 2, b − δ, b + δ.
    pub fn boundaries(&self) -> [f64; 4] {
        [1.0, 2.0, self.params.b - self.params.delta, self.params.b + self.params.delta]
    }

    /// Largest radius at which the profile is defined.
    pub fn r_max(&self) -> f64 {
        self.tail.as_ref().map_or(f64::INFINITY, |t| t.end())
    }

    pub fn eval(&self, r: f64) -> Result<ProfilePoint> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("profile evaluated at r = {r}")));
        }
        let m = self.params.s() + 1.0;
        if r <= 1.0 {
            return Ok(ProfilePoint { r, log_f1: r.ln(), g1: 1.0 / r, g2: -1.0 / (r * r) });
        }
        if r < 2.0 {
            let x = Jet::variable(r);
            let s = step_jet(x, 1.0, 2.0);
            let lf = (Jet::constant(1.0) - s) * x.ln() + s * ((x - 2.0) * m);
            return Ok(ProfilePoint { r, log_f1: lf.v, g1: lf.d1, g2: lf.d2 });
        }
        if let Some(t) = &self.tail {
            if r >= t.start() {
                let p = t.eval(r).ok_or_else(|| Error::Domain(format!("r = {r} beyond the solved perturbation")))?;
                return Ok(ProfilePoint { r, log_f1: p.log_f1, g1: self.params.s() + p.f, g2: p.f_prime });
            }
        }
        Ok(ProfilePoint { r, log_f1: m * (r - 2.0), g1: m, g2: 0.0 })
    }
}

/// K_rad = −f₁''/f₁.
pub fn radial_curvature(profile: &WarpProfile, r: f64) -> Result<f64> {
    let p = profile.eval(r)?;
    Ok(-(p.g2 + p.g1 * p.g1))
}

/// V = (n−1)(n−3)/4·(f₁'/f₁)² + (n−1)/2·f₁''/f₁ + λ/f₁², computed in log space.
pub fn effective_potential(profile: &WarpProfile, lambda: f64, r: f64) -> Result<f64> {
    let n = profile.params.n as f64;
    if r > 0.0 && r <= 1.0 {
        return Ok((bessel_shift(profile.params.n) + lambda) / (r * r));
    }
    let p = profile.eval(r)?;
    let g1s = p.g1 * p.g1;
    Ok(0.25 * (n - 1.0) * (n - 3.0) * g1s + 0.5 * (n - 1.0) * (p.g2 + g1s) + lambda * (-2.0 * p.log_f1).exp())
}

/// Effective potential of the unperturbed profile (f ≡ 1 beyond 2) at the
/// selected mode.
#[derive(Clone, Debug)]
pub struct TildePotential {
    profile: WarpProfile,
}

impl TildePotential {
    pub fn new(params: &ManifoldParams) -> Result<Self> {
        Ok(Self { profile: build_profile(params, None)? })
    }

    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }
}

impl Potential for TildePotential {
    fn value(&self, r: f64) -> f64 {
        effective_potential(&self.profile, self.profile.mode.lambda, r).unwrap_or(f64::NAN)
    }
    fn nu(&self) -> f64 {
        self.profile.mode.nu
    }
    fn tau(&self) -> f64 {
        self.profile.params.tau()
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![1.0, 2.0]
    }
}

/// One row of the profile export: r, f1, f1_prime, f1_second, K_rad, V_eff.
pub fn profile_row(profile: &WarpProfile, r: f64) -> Result<[f64; 6]> {
    let p = profile.eval(r)?;
    Ok([
        r,
        p.f1(),
        p.f1_prime(),
        p.f1_second(),
        -(p.g2 + p.g1 * p.g1),
        effective_potential(profile, profile.mode.lambda, r)?,
    ])
}

pub const PROFILE_HEADER: [&str; 6] = ["r", "f1", "f1_prime", "f1_second", "K_rad", "V_eff"];

#[cfg(test)]
mod tests {
    use super::*;

    fn k0m1() -> ManifoldParams {
        ManifoldParams::default()
    }

    #[test]
    fn sphere_modes() {
        assert_eq!(sphere_mode(3, 1).unwrap(), (2.0, 3));
        assert_eq!(sphere_mode(2, 1).unwrap(), (1.0, 2));
        assert_eq!(sphere_mode(4, 2).unwrap(), (8.0, 9));
        assert_eq!(sphere_mode(5, 0).unwrap(), (0.0, 1));
        // S^2: 2i + 1.
        for i in 0..10 {
            assert_eq!(sphere_mode(3, i).unwrap().1, 2 * i as u128 + 1);
        }
    }

    #[test]
    fn nu_selection() {
        assert_eq!(choose_nu(3).unwrap(), (1, 2.0, 1.5));
        assert_eq!(choose_nu(2).unwrap(), (2, 4.0, 2.0));
        assert_eq!(choose_nu(5).unwrap(), (0, 0.0, 1.5));
        for n in 2..=20 {
            assert!(choose_nu(n).unwrap().2 > 1.0);
        }
    }

    #[test]
    fn explicit_mode_below_threshold_rejected() {
        let p = ManifoldParams { n: 2, mode: ModePolicy::Index(1), ..k0m1() };
        assert!(p.validate().is_err());
        let p = ManifoldParams { delta: 0.6, ..k0m1() };
        assert!(p.validate().unwrap_err().to_string().contains("0 < delta < 1/2"));
    }

    #[test]
    fn euclidean_piece_is_exact() {
        let prof = build_profile(&k0m1(), None).unwrap();
        for i in 1..=90 {
            let r = i as f64 / 100.0;
            let p = prof.eval(r).unwrap();
            assert_eq!(p.f1(), r.ln().exp());
            assert!((p.f1() - r).abs() <= 1e-15 * r);
        }
        let p = prof.eval(0.5).unwrap();
        assert!((p.f1_prime() - 1.0).abs() < 1e-15 && p.f1_second().abs() < 1e-15);
        assert_eq!(radial_curvature(&prof, 0.5).unwrap().abs() < 1e-14, true);
    }

    #[test]
    fn exponential_piece() {
        let prof = build_profile(&k0m1(), None).unwrap();
        let p = prof.eval(2.0).unwrap();
        assert_eq!(p.f1(), 1.0);
        assert_eq!(p.g1, 2.0);
        for r in [2.5, 5.0, 9.0] {
            assert!((radial_curvature(&prof, r).unwrap() + 4.0).abs() < 1e-14);
            let v = effective_potential(&prof, 2.0, r).unwrap();
            assert!((v - (4.0 + 2.0 * (-4.0 * (r - 2.0)).exp())).abs() < 1e-13);
        }
        assert_eq!(effective_potential(&prof, 2.0, 0.5).unwrap(), 8.0);
    }

    #[test]
    fn joins_are_smooth() {
        let prof = build_profile(&k0m1(), None).unwrap();
        for r in [1.0, 2.0] {
            let h = 1e-7;
            let a = prof.eval(r - h).unwrap();
            let b = prof.eval(r + h).unwrap();
            assert!((a.g1 - b.g1).abs() < 1e-6, "g1 at {r}");
            assert!((a.g2 - b.g2).abs() < 1e-6, "g2 at {r}");
        }
        // Blend derivatives agree with finite differences of log f1.
        for r in [1.2, 1.5, 1.8] {
            let lf = |x: f64| prof.eval(x).unwrap().log_f1;
            let p = prof.eval(r).unwrap();
            let h = 1e-5;
            assert!((p.g1 - (lf(r + h) - lf(r - h)) / (2.0 * h)).abs() < 1e-8);
            let h = 1e-4;
            assert!((p.g2 - (lf(r + h) - 2.0 * lf(r) + lf(r - h)) / (h * h)).abs() < 1e-4);
            assert!(p.f1() > 0.0);
        }
    }

    #[test]
    fn general_curvature_slope() {
        let p = ManifoldParams { n: 4, k0: -2.25, ..k0m1() };
        let prof = build_profile(&p, None).unwrap();
        // f ≡ 1: K_rad = −(√|K₀| + 1)².
        assert!((radial_curvature(&prof, 5.0).unwrap() + 6.25).abs() < 1e-13);
        assert!((p.tau() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn tilde_potential_core() {
        let t = TildePotential::new(&k0m1()).unwrap();
        assert_eq!(t.nu(), 1.5);
        assert_eq!(t.tau(), 1.0);
        assert!((t.value(0.25) - crate::potential::bessel_core(1.5, 0.25)).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn potential_matches_direct_form(n in 2u32..=8, k0 in -4.0f64..-0.25, r in 1.0f64..15.0) {
            let p = ManifoldParams { n, k0, ..k0m1() };
            let prof = build_profile(&p, None).unwrap();
            let lambda = prof.mode().lambda;
            let pt = prof.eval(r).unwrap();
            let (f, d1, d2) = (pt.f1(), pt.f1_prime(), pt.f1_second());
            let nf = n as f64;
            let direct = 0.25 * (nf - 1.0) * (nf - 3.0) * (d1 / f).powi(2)
                + 0.5 * (nf - 1.0) * d2 / f
                + lambda / (f * f);
            let v = effective_potential(&prof, lambda, r).unwrap();
            proptest::prop_assert!((v - direct).abs() <= 1e-10 * direct.abs().max(1.0));
            proptest::prop_assert!((radial_curvature(&prof, r).unwrap() + d2 / f).abs() <= 1e-10 * (d2 / f).abs().max(1.0));
        }

        #[test]
        fn euclidean_core_is_identity(n in 2u32..=12, k0 in -4.0f64..-0.25, r in 1e-3f64..0.9) {
            let prof = build_profile(&ManifoldParams { n, k0, ..k0m1() }, None).unwrap();
            proptest::prop_assert_eq!((prof.eval(r).unwrap().f1() - r).abs() <= 1e-15 * r, true);
        }
    }
}
