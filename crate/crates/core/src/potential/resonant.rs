use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Mollified, Potential, Segment};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::schrodinger::{pruefer_flow, regular_pruefer_start, Energy, PrueferConfig, PrueferState, SchrodingerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhasePolicy {
    /// Phases set at the start of each piece from the regular solution at
    /// every target momentum, so that the piece drives it toward decay.
    Tuned,
    /// One phase per target across all pieces (sin(2k̄r) throughout).
    Continuous,
    /// Independent uniform phases drawn from the seed.
    Random,
}

/// Generator for the geometric dyadic schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub k_bar_min: f64,
    pub k_bar_max: f64,
    /// Highest dyadic level; level ℓ has 2^ℓ + 1 equally spaced targets.
    pub max_level: u32,
    pub growth: f64,
    /// Pieces are generated until their start exceeds this radius; the last
    /// piece extends to infinity.
    pub r_extent: f64,
    /// Half-width of the blending band between consecutive pieces.
    pub mollifier_width: f64,
    /// Multiplies every c_j. Values above 1 break the envelope.
    pub amplitude_scale: f64,
    pub phases: PhasePolicy,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            k_bar_min: 1.0,
            k_bar_max: 2.0,
            max_level: 2,
            growth: 2.0,
            r_extent: 2e4,
            mollifier_width: 0.5,
            amplitude_scale: 1.0,
            phases: PhasePolicy::Tuned,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_bar_min > 0.0 && self.k_bar_max > self.k_bar_min) {
            return Err(Error::InvalidParameter("need 0 < k_bar_min < k_bar_max".into()));
        }
        if !(self.growth >= 2.0) {
            return Err(Error::InvalidParameter(format!("piece growth {} must be >= 2", self.growth)));
        }
        if !(self.mollifier_width > 0.0) || !(self.amplitude_scale >= 0.0) || !(self.r_extent > 0.0) {
            return Err(Error::InvalidParameter("schedule widths, extent and amplitude scale must be positive".into()));
        }
        if self.max_level > 12 {
            return Err(Error::InvalidParameter("max_level above 12".into()));
        }
        Ok(())
    }

    /// Targets of dyadic level ℓ.
    pub fn level_targets(&self, level: u32) -> Vec<f64> {
        let n = 1usize << level;
        (0..=n).map(|i| self.k_bar_min + (self.k_bar_max - self.k_bar_min) * i as f64 / n as f64).collect()
    }

    /// Off-target controls: midpoints between neighbouring top-level targets.
    pub fn controls(&self) -> Vec<f64> {
        let t = self.level_targets(self.max_level);
        t.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// One piece of the tail: on [start, end),
/// V − τ² = amplitude/(1 + r) · Σ weights[m]·sin(2·targets[m]·r + phases[m]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub start: f64,
    pub end: Option<f64>,
    pub amplitude: f64,
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
}

impl PieceSpec {
    fn segment(&self, tau: f64) -> Segment {
        let p = self.clone();
        let t2 = tau * tau;
        Arc::new(move |r: f64| {
            let mut s = 0.0;
            for m in 0..p.targets.len() {
                s += p.weights[m] * (2.0 * p.targets[m] * r + p.phases[m]).sin();
            }
            t2 + p.amplitude / (1.0 + r) * s
        })
    }

    /// Upper bound of |V − τ²|·(1 + r) on the piece.
    pub fn peak(&self) -> f64 {
        self.amplitude * self.weights.iter().map(|w| w.abs()).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub tau: f64,
    pub envelope: Envelope,
    pub b: f64,
    pub delta: f64,
    pub schedule: ScheduleConfig,
    pub mollifier_order: usize,
    pub seed: u64,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {} must be >= 0", self.tau)));
        }
        if !(self.b >= 10.0) {
            return Err(Error::InvalidParameter(format!("b = {} must be >= 10", self.b)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidParameter(format!("delta = {} must satisfy 0 < delta < 1/2", self.delta)));
        }
        if self.mollifier_order < 4 {
            return Err(Error::InvalidParameter("mollifier order must be >= 4".into()));
        }
        self.envelope.validate()?;
        self.schedule.validate()
    }
}

/// Pieces of the geometric dyadic schedule with zero phases: piece j ≥ 1
/// starts at (b + δ)·growth^{j−1}, targets dyadic level min(j − 1, max_level)
/// with uniform weights, and carries c_j = min(h(start − band), j)·scale.
pub fn dyadic_schedule(spec: &PotentialSpec) -> Vec<PieceSpec> {
    let cfg = &spec.schedule;
    let mut starts = vec![spec.b + spec.delta];
    while *starts.last().unwrap() <= cfg.r_extent {
        let next = starts.last().unwrap() * cfg.growth;
        starts.push(next);
    }
    let n = starts.len();
    (0..n)
        .map(|i| {
            let j = i + 1;
            let level = (i as u32).min(cfg.max_level);
            let targets = cfg.level_targets(level);
            let band = if i == 0 { spec.delta } else { cfg.mollifier_width };
            let c = spec.envelope.eval(starts[i] - band).min(j as f64) * cfg.amplitude_scale;
            let w = 1.0 / targets.len() as f64;
            PieceSpec {
                start: starts[i],
                end: starts.get(i + 1).copied(),
                amplitude: c,
                weights: vec![w; targets.len()],
                phases: vec![0.0; targets.len()],
                targets,
            }
        })
        .collect()
}

/// Reproducible description of a built potential (JSON sidecar).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSidecar {
    pub tau: f64,
    pub nu: f64,
    pub b: f64,
    pub delta: f64,
    pub mollifier_order: usize,
    pub mollifier_width: f64,
    pub seed: u64,
    pub envelope: Envelope,
    pub pieces: Vec<PieceSpec>,
}

/// Ṽ below b − δ, a bridge over [b − δ, b + δ], then the schedule.
#[derive(Clone)]
pub struct ResonantPotential {
    tilde: Arc<dyn Potential>,
    sidecar: PotentialSidecar,
    blend: Mollified,
    breaks: Vec<f64>,
}

impl std::fmt::Debug for ResonantPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResonantPotential").field("spec", &self.sidecar).finish()
    }
}

impl ResonantPotential {
    /// Assemble from explicit pieces (the first must start at b + δ).
    pub fn from_sidecar(tilde: Arc<dyn Potential>, sidecar: PotentialSidecar) -> Result<Self> {
        let tau = sidecar.tau;
        let mut segs: Vec<Segment> = vec![{
            let t = tilde.clone();
            Arc::new(move |r: f64| t.value(r))
        }];
        let mut breaks = Vec::new();
        let mut widths = Vec::new();
        for (i, p) in sidecar.pieces.iter().enumerate() {
            if i == 0 {
                if (p.start - (sidecar.b + sidecar.delta)).abs() > 1e-12 {
                    return Err(Error::InvalidParameter("first piece must start at b + delta".into()));
                }
                breaks.push(sidecar.b);
                widths.push(sidecar.delta);
            } else {
                breaks.push(p.start);
                widths.push(sidecar.mollifier_width);
            }
            if p.targets.len() != p.weights.len() || p.targets.len() != p.phases.len() {
                return Err(Error::InvalidParameter(format!("piece {i} has mismatched target data")));
            }
            segs.push(p.segment(tau));
        }
        if sidecar.pieces.is_empty() {
            let t2 = tau * tau;
            segs.push(Arc::new(move |_| t2));
            breaks.push(sidecar.b);
            widths.push(sidecar.delta);
        }
        let blend = Mollified::new(segs, breaks, widths, sidecar.mollifier_order)?;
        let mut all: Vec<f64> = tilde.breakpoints().into_iter().filter(|&x| x < sidecar.b - sidecar.delta).collect();
        all.extend(blend.band_edges());
        Ok(Self { tilde, sidecar, blend, breaks: all })
    }

    pub fn sidecar(&self) -> &PotentialSidecar {
        &self.sidecar
    }

    pub fn pieces(&self) -> &[PieceSpec] {
        &self.sidecar.pieces
    }

    pub fn tilde(&self) -> &Arc<dyn Potential> {
        &self.tilde
    }

    /// Band-edge radii of all mollifier neighbourhoods.
    pub fn band_edges(&self) -> Vec<f64> {
        self.blend.band_edges()
    }

    /// Union of all target momenta.
    pub fn targets(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.sidecar.pieces.iter().flat_map(|p| p.targets.iter().copied()).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        t
    }
}

impl Potential for ResonantPotential {
    fn value(&self, r: f64) -> f64 {
        self.blend.eval(r)
    }
    fn nu(&self) -> f64 {
        self.sidecar.nu
    }
    fn tau(&self) -> f64 {
        self.sidecar.tau
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
    fn free_radius(&self) -> Option<f64> {
        self.sidecar
            .pieces
            .iter()
            .all(|p| p.amplitude == 0.0)
            .then_some(self.sidecar.b + self.sidecar.delta)
    }
}

/// Build the resonant potential on top of Ṽ.
pub fn build_potential(tilde: Arc<dyn Potential>, spec: &PotentialSpec) -> Result<ResonantPotential> {
    spec.validate()?;
    let mut pieces = dyadic_schedule(spec);
    for (i, p) in pieces.iter().enumerate() {
        let band = if i == 0 { spec.delta } else { spec.schedule.mollifier_width };
        let r = p.start - band;
        let ratio = p.peak() / spec.envelope.eval(r);
        if ratio > 1.0 + 1e-12 {
            return Err(Error::Envelope { r, ratio });
        }
    }
    let mut sidecar = PotentialSidecar {
        tau: spec.tau,
        nu: tilde.nu(),
        b: spec.b,
        delta: spec.delta,
        mollifier_order: spec.mollifier_order,
        mollifier_width: spec.schedule.mollifier_width,
        seed: spec.seed,
        envelope: spec.envelope.clone(),
        pieces: Vec::new(),
    };
    let live = pieces.iter().any(|p| p.amplitude > 0.0);
    match spec.schedule.phases {
        PhasePolicy::Continuous => {}
        PhasePolicy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for p in pieces.iter_mut() {
                for ph in p.phases.iter_mut() {
                    *ph = rng.gen_range(0.0..2.0 * PI);
                }
            }
        }
        PhasePolicy::Tuned if live => {
            let partial = ResonantPotential::from_sidecar(tilde.clone(), sidecar.clone())?;
            tune_phases(partial, &mut pieces, spec)?;
        }
        PhasePolicy::Tuned => {}
    }
    sidecar.pieces = pieces;
    ResonantPotential::from_sidecar(tilde, sidecar)
}

/// For each piece, evolve the regular solution at every target through the
/// potential built so far up to the start of the piece's band, and choose
/// β = 2(θ − k̄r) + π there: the averaged amplitude equation then gives
/// (log R²)' = −a_j·w/(2k̄) over the piece.
fn tune_phases(base: ResonantPotential, pieces: &mut [PieceSpec], spec: &PotentialSpec) -> Result<()> {
    let scfg = SchrodingerConfig::default();
    let pcfg = PrueferConfig::default();
    let mut all: Vec<f64> = pieces.iter().flat_map(|p| p.targets.iter().copied()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let energies: Vec<Energy> = all.iter().map(|&k| Energy::from_k_bar(k, spec.tau)).collect();
    let mut states: Vec<PrueferState> =
        energies.iter().map(|e| regular_pruefer_start(&base, e, &scfg)).collect::<Result<_>>()?;
    let mut built = base;
    for j in 0..pieces.len() {
        let band = if j == 0 { spec.delta } else { spec.schedule.mollifier_width };
        let rs = pieces[j].start - if j == 0 { 2.0 * band } else { band };
        for (st, e) in states.iter_mut().zip(&energies) {
            if rs > st.r {
                *st = pruefer_flow(&built, e, *st, rs, &[], &pcfg)?.0;
            }
        }
        let piece = &mut pieces[j];
        for m in 0..piece.targets.len() {
            let idx = all.iter().position(|&k| (k - piece.targets[m]).abs() < 1e-12).unwrap();
            let k = piece.targets[m];
            piece.phases[m] = (2.0 * (states[idx].theta - k * rs) + PI).rem_euclid(2.0 * PI);
        }
        let mut sc = built.sidecar.clone();
        sc.pieces = pieces[..=j].to_vec();
        sc.pieces[j].end = None;
        built = ResonantPotential::from_sidecar(built.tilde.clone(), sc)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractCheck {
    pub name: String,
    pub passed: bool,
    /// Positive when satisfied; for II, 1 − max ratio.
    pub margin: f64,
    pub worst_r: f64,
    pub violations: Vec<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractReport {
    pub contracts: Vec<ContractCheck>,
}

impl ContractReport {
    pub fn passed(&self) -> bool {
        self.contracts.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.contracts.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Sample contracts I–III of the construction:
/// I: V = Ṽ exactly on (0, b − δ];
/// II: |V − τ²|·(1 + r)/h(r) ≤ 1 on [b + δ, r_max] (`samples` quasirandom points);
/// III: sup over the bridge of |V| ≤ τ² + 1 + sup_{[b−1,b]} |Ṽ|.
pub fn verify_contract(
    v: &dyn Potential,
    tilde: &dyn Potential,
    b: f64,
    delta: f64,
    envelope: &Envelope,
    r_max: f64,
    samples: usize,
) -> ContractReport {
    let tau2 = v.tau() * v.tau();
    let lo = b - delta;

    let n1 = 20_000;
    let mut bad1 = Vec::new();
    let mut worst1: (f64, f64) = (0.0, lo);
    for i in 1..=n1 {
        let r = lo * i as f64 / n1 as f64;
        let d = (v.value(r) - tilde.value(r)).abs();
        if d != 0.0 {
            if bad1.len() < 10 {
                bad1.push(r);
            }
            if d > worst1.0 {
                worst1 = (d, r);
            }
        }
    }
    let c1 = ContractCheck {
        name: "I".into(),
        passed: bad1.is_empty(),
        margin: 0.0 - worst1.0,
        worst_r: worst1.1,
        violations: bad1,
        samples: n1,
    };

    // Log-uniform additive-recurrence points on [b + δ, r_max].
    let a = (b + delta).ln();
    let span = r_max.ln() - a;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut bad2 = Vec::new();
    let mut worst2: (f64, f64) = (0.0, b + delta);
    let mut u = 0.5;
    for i in 0..samples.max(2) {
        let r = if i == 0 { b + delta } else if i == 1 { r_max } else { (a + span * u).exp() };
        if i >= 2 {
            u = (u + golden).fract();
        }
        let ratio = (v.value(r) - tau2).abs() * (1.0 + r) / envelope.eval(r);
        if ratio > worst2.0 {
            worst2 = (ratio, r);
        }
        if ratio > 1.0 && bad2.len() < 10 {
            bad2.push(r);
        }
    }
    let c2 = ContractCheck {
        name: "II".into(),
        passed: bad2.is_empty(),
        margin: 1.0 - worst2.0,
        worst_r: worst2.1,
        violations: bad2,
        samples: samples.max(2),
    };

    let n3 = 20_000;
    let sup_tilde = (0..=n3).map(|i| tilde.value(b - 1.0 + i as f64 / n3 as f64).abs()).fold(0.0, f64::max);
    let bound = tau2 + 1.0 + sup_tilde;
    let mut worst3: (f64, f64) = (0.0, lo);
    let mut bad3 = Vec::new();
    for i in 0..=n3 {
        let r = lo + 2.0 * delta * i as f64 / n3 as f64;
        let x = v.value(r).abs();
        if x > worst3.0 {
            worst3 = (x, r);
        }
        if x > bound && bad3.len() < 10 {
            bad3.push(r);
        }
    }
    let c3 = ContractCheck {
        name: "III".into(),
        passed: bad3.is_empty(),
        margin: bound - worst3.0,
        worst_r: worst3.1,
        violations: bad3,
        samples: n3 + 1,
    };
    ContractReport { contracts: vec![c1, c2, c3] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{bessel_core, FnPotential};

    fn tilde() -> Arc<dyn Potential> {
        Arc::new(FnPotential::new(1.5, 1.0, |r| if r <= 1.0 { bessel_core(1.5, r) } else { 4.0 + 2.0 / r }))
    }

    fn spec(scale: f64, phases: PhasePolicy) -> PotentialSpec {
        PotentialSpec {
            tau: 1.0,
            envelope: Envelope::Log,
            b: 10.0,
            delta: 0.1,
            schedule: ScheduleConfig { amplitude_scale: scale, phases, r_extent: 2e3, ..ScheduleConfig::default() },
            mollifier_order: 4,
            seed: 7,
        }
    }

    #[test]
    fn zero_amplitude_tail_is_constant() {
        let v = build_potential(tilde(), &spec(0.0, PhasePolicy::Tuned)).unwrap();
        for r in [10.1, 10.5, 40.0, 1e4] {
            assert_eq!(v.value(r), 1.0);
        }
        assert_eq!(v.free_radius(), Some(10.1));
        let rep = verify_contract(&v, v.tilde().as_ref(), 10.0, 0.1, &Envelope::Log, 1e4, 10_000);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn contract_one_is_bit_exact() {
        let v = build_potential(tilde(), &spec(1.0, PhasePolicy::Continuous)).unwrap();
        let t = tilde();
        for i in 1..1000 {
            let r = 9.9 * i as f64 / 1000.0;
            assert_eq!(v.value(r).to_bits(), t.value(r).to_bits());
        }
        assert_eq!(v.value(9.9).to_bits(), t.value(9.9).to_bits());
    }

    #[test]
    fn dyadic_build_satisfies_contracts() {
        let v = build_potential(tilde(), &spec(1.0, PhasePolicy::Random)).unwrap();
        let rep = verify_contract(&v, v.tilde().as_ref(), 10.0, 0.1, &Envelope::Log, 1e4, 200_000);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.contracts[1].margin >= 0.0);
    }

    #[test]
    fn schedule_structure() {
        let s = spec(1.0, PhasePolicy::Continuous);
        let p = dyadic_schedule(&s);
        assert!((p[0].start - 10.1).abs() < 1e-12);
        for w in p.windows(2) {
            assert!((w[1].start - 2.0 * w[0].start).abs() < 1e-9);
            assert_eq!(w[0].end, Some(w[1].start));
        }
        assert_eq!(p.last().unwrap().end, None);
        assert_eq!(p[0].targets, vec![1.0, 2.0]);
        assert_eq!(p[1].targets, vec![1.0, 1.5, 2.0]);
        assert_eq!(p[3].targets.len(), 5);
        assert!((p[0].amplitude - 1.0).abs() < 1e-12);
        assert_eq!(s.schedule.controls(), vec![1.125, 1.375, 1.625, 1.875]);
    }

    #[test]
    fn envelope_violation_rejected_at_build() {
        match build_potential(tilde(), &spec(2.0, PhasePolicy::Continuous)) {
            Err(Error::Envelope { r, ratio }) => {
                assert!(ratio > 1.0);
                assert!(r > 9.0);
            }
            other => panic!("expected envelope error, got {other:?}"),
        }
    }

    #[test]
    fn broken_potential_fails_contract_two() {
        let v = Arc::new(build_potential(tilde(), &spec(1.0, PhasePolicy::Continuous)).unwrap());
        let vv = v.clone();
        let broken = FnPotential::new(1.5, 1.0, move |r| {
            let x = (r - 20.0) / 0.5;
            vv.value(r) + 2.0 * Envelope::Log.eval(r) / (1.0 + r) * crate::potential::bump(x)
        });
        let rep = verify_contract(&broken, v.tilde().as_ref(), 10.0, 0.1, &Envelope::Log, 1e4, 100_000);
        assert_eq!(rep.failures(), vec!["II"]);
        let r = rep.contracts[1].worst_r;
        assert!((r - 20.0).abs() < 0.5, "{r}");
    }

    #[test]
    fn random_phases_are_deterministic() {
        let a = build_potential(tilde(), &spec(1.0, PhasePolicy::Random)).unwrap();
        let b = build_potential(tilde(), &spec(1.0, PhasePolicy::Random)).unwrap();
        assert_eq!(a.sidecar(), b.sidecar());
        for i in 0..1000 {
            let r = 9.0 + i as f64 * 0.731;
            assert_eq!(a.value(r).to_bits(), b.value(r).to_bits());
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let a = build_potential(tilde(), &spec(1.0, PhasePolicy::Random)).unwrap();
        let json = serde_json::to_string(a.sidecar()).unwrap();
        let sc: PotentialSidecar = serde_json::from_str(&json).unwrap();
        let b = ResonantPotential::from_sidecar(tilde(), sc).unwrap();
        for i in 0..500 {
            let r = 9.0 + i as f64 * 1.37;
            assert_eq!(a.value(r).to_bits(), b.value(r).to_bits());
        }
    }
}
