//! Energy scans of the Prüfer amplitude: fitted power of R, resonance flags
//! and a candidate spectral-type summary.
//!
//! The regular solution is L² at an energy iff its amplitude R decays
//! faster than r^{-1/2}; the fitted power is therefore compared with −1/2.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::potential::Potential;
use crate::schrodinger::{pruefer_flow, regular_pruefer_start, Energy, PrueferConfig, SchrodingerConfig};
use crate::weyl::MeasureGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralClass {
    /// Fitted R-power below −1/2: square-integrable.
    EigenvalueCandidate,
    /// Decaying, not square-integrable.
    ScCandidate,
    /// Bounded amplitude.
    AcType,
    Growing,
}

impl SpectralClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralClass::EigenvalueCandidate => "eigenvalue-candidate",
            SpectralClass::ScCandidate => "sc-candidate",
            SpectralClass::AcType => "ac-type",
            SpectralClass::Growing => "growing",
        }
    }

    pub fn from_power(power: f64, threshold: f64) -> Self {
        if power < -0.5 {
            SpectralClass::EigenvalueCandidate
        } else if power < -threshold {
            SpectralClass::ScCandidate
        } else if power <= threshold {
            SpectralClass::AcType
        } else {
            SpectralClass::Growing
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    pub r_max: f64,
    /// Fit window is [r_max / 10^decades, r_max].
    pub decades: f64,
    pub samples: usize,
    /// |power| at or below this counts as bounded.
    pub threshold: f64,
    /// k̄ within this of a schedule target counts as targeted.
    pub resolution: f64,
    pub pruefer: PrueferConfig,
    pub schrodinger: SchrodingerConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            r_max: 1e4,
            decades: 2.0,
            samples: 200,
            threshold: 0.02,
            resolution: 1e-3,
            pruefer: PrueferConfig::default(),
            schrodinger: SchrodingerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub lambda: f64,
    pub k_bar: f64,
    /// Slope of log R² against log r.
    pub gamma: f64,
    /// Half the range of the fit residual.
    pub osc: f64,
    pub bounded: bool,
    pub targeted: bool,
    pub class: SpectralClass,
}

impl ScanRecord {
    /// Fitted power of R, γ/2.
    pub fn power(&self) -> f64 {
        0.5 * self.gamma
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub r_max: f64,
    pub threshold: f64,
    pub records: Vec<ScanRecord>,
}

pub const SCAN_HEADER: [&str; 6] = ["lambda", "kbar", "gamma", "osc", "targeted", "class"];

/// Least-squares slope and half-range of residuals of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let res = x.iter().zip(y).map(|(a, b)| b - my - slope * (a - mx));
    let (lo, hi) = res.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), e| (l.min(e), h.max(e)));
    (slope, 0.5 * (hi - lo))
}

fn scan_one(v: &dyn Potential, lambda: f64, targets: &[f64], cfg: &ScanConfig) -> Result<ScanRecord> {
    let e = Energy::new(lambda, v.tau())?;
    let kb = e.require_k_bar()?;
    let start = regular_pruefer_start(v, &e, &cfg.schrodinger)?;
    let lo = (cfg.r_max / 10f64.powf(cfg.decades)).max(1.0);
    let m = cfg.samples.max(2);
    let ls: Vec<f64> = (0..m).map(|i| lo.ln() + (cfg.r_max / lo).ln() * i as f64 / (m - 1) as f64).collect();
    let rs: Vec<f64> = ls.iter().map(|l| l.exp().min(cfg.r_max)).collect();
    let (end, mut trace) = pruefer_flow(v, &e, start, cfg.r_max, &rs[..m - 1], &cfg.pruefer)?;
    trace.push(end);
    let ys: Vec<f64> = trace.iter().map(|s| s.log_r2).collect();
    let (gamma, osc) = fit_slope(&ls, &ys);
    let power = 0.5 * gamma;
    Ok(ScanRecord {
        lambda,
        k_bar: kb,
        gamma,
        osc,
        bounded: power.abs() <= cfg.threshold,
        targeted: targets.iter().any(|t| (t - kb).abs() <= cfg.resolution),
        class: SpectralClass::from_power(power, cfg.threshold),
    })
}

/// Prüfer scan of the regular solution from r = 1 to `cfg.r_max` at each
/// energy (all above τ²), in parallel.
pub fn scan(v: &dyn Potential, energies: &[f64], targets: &[f64], cfg: &ScanConfig) -> Result<ScanResult> {
    let records = energies.par_iter().map(|&l| scan_one(v, l, targets, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { r_max: cfg.r_max, threshold: cfg.threshold, records })
}

/// Energies τ² + k̄² for the given momenta.
pub fn energies_for(tau: f64, k_bars: &[f64]) -> Vec<f64> {
    k_bars.iter().map(|k| tau * tau + k * k).collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassCounts {
    pub eigenvalue_candidate: usize,
    pub sc_candidate: usize,
    pub ac_type: usize,
    pub growing: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateNote {
    pub lambda: f64,
    pub power: f64,
    /// For sc candidates: a measure cell containing λ behaves anomalously as
    /// y → 0. For eigenvalue candidates: a jump of the truncated spectral
    /// function lies within `resolution` of λ.
    pub corroborated: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub r_max: f64,
    pub threshold: f64,
    pub energies: usize,
    pub counts: ClassCounts,
    pub median_power_targeted: Option<f64>,
    pub median_power_untargeted: Option<f64>,
    pub eigenvalue_candidates: Vec<CandidateNote>,
    pub sc_candidates: Vec<CandidateNote>,
}

/// Summary of a scan, cross-referenced against a measure grid when given.
pub fn report(scan: &ScanResult, measure: Option<&MeasureGrid>, resolution: f64) -> ScanReport {
    let count = |c: SpectralClass| scan.records.iter().filter(|r| r.class == c).count();
    let mut tp: Vec<f64> = scan.records.iter().filter(|r| r.targeted).map(|r| r.power()).collect();
    let mut up: Vec<f64> = scan.records.iter().filter(|r| !r.targeted).map(|r| r.power()).collect();
    let notes = |c: SpectralClass| -> Vec<CandidateNote> {
        scan.records
            .iter()
            .filter(|r| r.class == c)
            .map(|r| {
                let corroborated = measure.map(|m| match c {
                    SpectralClass::EigenvalueCandidate => m.jumps.iter().any(|(l, _)| (l - r.lambda).abs() <= resolution),
                    _ => m.cells.iter().any(|cell| cell.anomalous && cell.lo <= r.lambda && r.lambda <= cell.hi),
                });
                CandidateNote { lambda: r.lambda, power: r.power(), corroborated }
            })
            .collect()
    };
    ScanReport {
        r_max: scan.r_max,
        threshold: scan.threshold,
        energies: scan.records.len(),
        counts: ClassCounts {
            eigenvalue_candidate: count(SpectralClass::EigenvalueCandidate),
            sc_candidate: count(SpectralClass::ScCandidate),
            ac_type: count(SpectralClass::AcType),
            growing: count(SpectralClass::Growing),
        },
        median_power_targeted: median(&mut tp),
        median_power_untargeted: median(&mut up),
        eigenvalue_candidates: notes(SpectralClass::EigenvalueCandidate),
        sc_candidates: notes(SpectralClass::ScCandidate),
    }
}
