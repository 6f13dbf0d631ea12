//! End-to-end construction: Ṽ → resonant V → Riccati perturbation f →
//! warp profile, and the verification of the assembled manifold.

use std::sync::Arc;

use serde::Serialize;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::metric::{build_profile, effective_potential, radial_curvature, ManifoldParams, TildePotential, WarpProfile};
use crate::potential::{
    build_potential, verify_contract, ContractReport, Potential, PotentialSpec, ResonantPotential, ScheduleConfig,
};
use crate::riccati::{solve_f, verify_bounds, BoundReport, RiccatiSolution, SolveConfig};

/// Retries of the Riccati solve with δ halved after a bridge-bracket failure.
pub const MAX_DELTA_HALVINGS: u32 = 4;

#[derive(Clone, Debug)]
pub struct ConstructionConfig {
    pub manifold: ManifoldParams,
    pub schedule: ScheduleConfig,
    pub mollifier_order: usize,
    pub seed: u64,
    pub solver: SolveConfig,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            manifold: ManifoldParams::default(),
            schedule: ScheduleConfig::default(),
            mollifier_order: 4,
            seed: 0,
            solver: SolveConfig::default(),
        }
    }
}

impl ConstructionConfig {
    pub fn potential_spec(&self, delta: f64) -> PotentialSpec {
        PotentialSpec {
            tau: self.manifold.tau(),
            envelope: self.manifold.envelope.clone(),
            b: self.manifold.b,
            delta,
            schedule: self.schedule.clone(),
            mollifier_order: self.mollifier_order,
            seed: self.seed,
        }
    }
}

/// All stages of a successful construction.
pub struct Construction {
    /// Parameters actually used (δ possibly halved).
    pub params: ManifoldParams,
    pub delta_halvings: u32,
    pub tilde: Arc<TildePotential>,
    pub potential: Arc<ResonantPotential>,
    pub solution: Arc<RiccatiSolution>,
    pub profile: WarpProfile,
}

pub fn construct(cfg: &ConstructionConfig) -> Result<Construction> {
    cfg.manifold.validate().map_err(|e| e.in_stage("config"))?;
    let mut params = cfg.manifold.clone();
    let mut halvings = 0;
    loop {
        let tilde = Arc::new(TildePotential::new(&params).map_err(|e| e.in_stage("profile"))?);
        let spec = cfg.potential_spec(params.delta);
        spec.validate().map_err(|e| e.in_stage("potential"))?;
        let tilde_dyn: Arc<dyn Potential> = tilde.clone();
        let potential = Arc::new(build_potential(tilde_dyn, &spec).map_err(|e| e.in_stage("potential"))?);
        let v: Arc<dyn Potential> = potential.clone();
        match solve_f(v, &params, &cfg.solver) {
            Ok(sol) => {
                let solution = Arc::new(sol);
                let profile = build_profile(&params, Some(solution.clone())).map_err(|e| e.in_stage("profile"))?;
                return Ok(Construction { params, delta_halvings: halvings, tilde, potential, solution, profile });
            }
            Err(Error::BridgeBracket { .. }) if halvings < MAX_DELTA_HALVINGS => {
                params.delta *= 0.5;
                halvings += 1;
            }
            Err(e) => return Err(e.in_stage("riccati")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    /// max |K_rad − K₀|·(1 + r)/h(r) over the sampled radii.
    pub constant: f64,
    pub worst_r: f64,
    pub r_hi: f64,
}

/// Radii for verification: fine through the joins and the bridge, then
/// the Riccati output grid.
pub fn verification_radii(c: &Construction, r_hi: f64) -> Vec<f64> {
    let p = &c.params;
    let fine_end = p.b + p.delta + 1.0;
    let n = ((fine_end - 0.01) / 0.005) as usize;
    let mut rs: Vec<f64> = (0..=n).map(|i| 0.01 + i as f64 * 0.005).collect();
    rs.extend(c.solution.samples().iter().map(|s| s.r).filter(|&r| r > fine_end && r <= r_hi));
    rs
}

pub fn curvature_report(c: &Construction, envelope: &Envelope, r_hi: f64) -> Result<CurvatureReport> {
    let k0 = c.params.k0;
    let mut best = (0.0, 0.0);
    for r in verification_radii(c, r_hi) {
        let k = radial_curvature(&c.profile, r)?;
        let q = (k - k0).abs() * (1.0 + r) / envelope.eval(r);
        if q > best.0 {
            best = (q, r);
        }
    }
    Ok(CurvatureReport { constant: best.0, worst_r: best.1, r_hi })
}

/// max |V_eff − V|/|V| over [b − δ, r_hi].
pub fn reconstruction_residual(c: &Construction, r_hi: f64) -> Result<(f64, f64)> {
    let lambda = c.profile.mode().lambda;
    let lo = c.params.b - c.params.delta;
    let mut worst = (0.0, lo);
    for r in verification_radii(c, r_hi).into_iter().filter(|&r| r >= lo) {
        let v = c.potential.value(r);
        let e = (effective_potential(&c.profile, lambda, r)? - v).abs() / v.abs().max(1e-300);
        if e > worst.0 {
            worst = (e, r);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub delta_used: f64,
    pub delta_halvings: u32,
    pub contracts: ContractReport,
    pub curvature: CurvatureReport,
    pub riccati_bounds: BoundReport,
    pub reconstruction_residual: f64,
    pub reconstruction_worst_r: f64,
    pub reconstruction_tolerance: f64,
    pub passed: bool,
}

pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-6;

pub fn verify_construction(c: &Construction) -> Result<VerificationReport> {
    let p = &c.params;
    let r_hi = c.solution.samples().last().map(|s| s.r).unwrap_or(p.b);
    let contracts =
        verify_contract(c.potential.as_ref(), c.tilde.as_ref(), p.b, p.delta, &p.envelope, r_hi.max(p.b + 1.0), 4000);
    let curvature = curvature_report(c, &p.envelope, r_hi)?;
    let riccati_bounds = verify_bounds(&c.solution, &p.envelope, p.b - p.delta, r_hi);
    let (res, worst_r) = reconstruction_residual(c, r_hi)?;
    let passed = contracts.passed()
        && curvature.constant.is_finite()
        && riccati_bounds.c_f.is_finite()
        && riccati_bounds.c_fprime.is_finite()
        && res <= RECONSTRUCTION_TOLERANCE;
    Ok(VerificationReport {
        delta_used: p.delta,
        delta_halvings: c.delta_halvings,
        contracts,
        curvature,
        riccati_bounds,
        reconstruction_residual: res,
        reconstruction_worst_r: worst_r,
        reconstruction_tolerance: RECONSTRUCTION_TOLERANCE,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PhasePolicy;

    fn small(amplitude_scale: f64) -> ConstructionConfig {
        ConstructionConfig {
            schedule: ScheduleConfig { r_extent: 300.0, amplitude_scale, phases: PhasePolicy::Random, ..Default::default() },
            solver: SolveConfig { r_end: 400.0, ..SolveConfig::default() },
            ..Default::default()
        }
    }

    #[test]
    fn small_construction_verifies() {
        let c = construct(&small(1.0)).unwrap();
        let rep = verify_construction(&c).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert_eq!(rep.delta_halvings, 0);
    }

    #[test]
    fn zero_amplitude_curvature_converges() {
        let c = construct(&small(0.0)).unwrap();
        let k = radial_curvature(&c.profile, 300.0).unwrap();
        assert!((k - c.params.k0).abs() < 1e-12);
    }

    #[test]
    fn broken_envelope_names_contract() {
        match construct(&small(3.0)) {
            Err(e) => assert!(e.to_string().contains("contract II"), "{e}"),
            Ok(_) => panic!("amplitude 3 must break the envelope"),
        }
    }

    #[test]
    fn invalid_delta_rejected() {
        let mut cfg = small(1.0);
        cfg.manifold.delta = 0.6;
        let e = construct(&cfg).err().unwrap().to_string();
        assert!(e.contains("0 < delta < 1/2"), "{e}");
    }
}
