//! Command-line front end: `build`, `spectrum`, `scan` and `verify`.
//!
//! A run is described by one JSON document ([`RunConfig`]); flags override
//! its top-level keys. Every output file carries the SHA-256 of the
//! effective configuration (without `out`), so reruns are byte-identical.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_zeros};
use crate::classify::{energies_for, median, report, scan, ScanConfig, SCAN_HEADER};
use crate::error::{Error, Result};
use crate::io::{config_hash, fmt_f64, write_csv, write_json};
use crate::metric::{profile_row, ManifoldParams, PROFILE_HEADER};
use crate::pipeline::{construct, verification_radii, verify_construction, Construction, ConstructionConfig};
use crate::potential::{Potential, ScheduleConfig};
use crate::riccati::{cross_check, solve_t, t_bound_ratio, ComparisonInstance, SolveConfig, TRAJECTORY_HEADER};
use crate::schrodinger::SchrodingerConfig;
use crate::weyl::{
    m_minus_closed, m_minus_ode, stieltjes_measure, truncated_spectral_function, uniform_edges, weyl_disk_check,
    MeasureGrid, MeasureMethod, WeylConfig, WeylContext, MEASURE_HEADER,
};

#[derive(Parser, Debug)]
#[command(name = "warpspec", version, about = "Resonant warped-product manifolds and their radial spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Radius of the Prüfer scan.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    /// Energy grid lo:hi:n (cells for `spectrum`, points for `scan`).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Seed for random phases.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Construct the manifold; write profile, potential, trajectory and report.
    Build,
    /// Spectral measure and m-functions of the radial operator.
    Spectrum,
    /// Prüfer resonance scan and spectral-type summary.
    Scan,
    /// Run the invariant suite; non-zero exit on failure.
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub r_end: f64,
    pub sample_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let s = SolveConfig::default();
        Self { rel_tol: s.rel_tol, abs_tol: s.abs_tol, max_step: s.max_step, r_end: s.r_end, sample_step: s.sample_step }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSettings {
    pub method: MeasureMethod,
    /// Dirichlet cut-off L of the truncated method.
    pub length: f64,
    /// Spread each truncated jump over its Voronoi cell.
    pub smooth: bool,
    /// Stieltjes y-sequence.
    pub y: Vec<f64>,
    /// Simpson nodes per cell.
    pub points: usize,
    /// ℑz of the exported m-functions.
    pub m_y: f64,
    /// Backward start of M₊ when V has no free radius.
    pub r_far: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            method: MeasureMethod::Truncated,
            length: 200.0,
            smooth: true,
            y: vec![1e-1, 1e-2, 1e-3, 1e-4],
            points: 9,
            m_y: 0.1,
            r_far: 200.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub decades: f64,
    pub samples: usize,
    pub threshold: f64,
    pub resolution: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        let s = ScanConfig::default();
        Self { decades: s.decades, samples: s.samples, threshold: s.threshold, resolution: s.resolution }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifold: ManifoldParams,
    pub schedule: ScheduleConfig,
    pub mollifier_order: usize,
    pub seed: u64,
    pub solver: SolverSettings,
    /// Scan radius.
    pub r_max: f64,
    /// Energy grid "lo:hi:n"; defaults depend on the command.
    pub grid: Option<String>,
    pub spectrum: SpectrumSettings,
    pub scan: ScanSettings,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifold: ManifoldParams::default(),
            schedule: ScheduleConfig::default(),
            mollifier_order: 4,
            seed: 0,
            solver: SolverSettings::default(),
            r_max: 1e4,
            grid: None,
            spectrum: SpectrumSettings::default(),
            scan: ScanSettings::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Parsed "lo:hi:n".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl std::str::FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid {s:?} must be lo:hi:n with lo < hi and n >= 1"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo < hi) || n == 0 {
            return Err(bad());
        }
        Ok(Grid { lo, hi, n })
    }
}

impl Grid {
    /// n equally spaced points, both ends included (one point: the midpoint).
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64).collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn apply_flags(&mut self, cli: &Cli) {
        if let Some(o) = &cli.out {
            self.out = o.clone();
        }
        if let Some(r) = cli.rmax {
            self.r_max = r;
        }
        if let Some(g) = &cli.grid {
            self.grid = Some(g.clone());
        }
        if let Some(s) = cli.seed {
            self.seed = s;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        self.construction().potential_spec(self.manifold.delta).validate()?;
        if let Some(g) = &self.grid {
            g.parse::<Grid>()?;
        }
        if !(self.r_max >= 1e2) {
            return Err(Error::InvalidParameter(format!("r_max = {} must be >= 100", self.r_max)));
        }
        let sp = &self.spectrum;
        if sp.y.len() < 2 || sp.y.iter().any(|&y| !(y > 0.0)) || !(sp.m_y > 0.0) {
            return Err(Error::InvalidParameter("spectrum.y needs two or more positive values, m_y > 0".into()));
        }
        if !(sp.length > 1.0) || sp.points < 3 {
            return Err(Error::InvalidParameter("spectrum.length must exceed 1 and points >= 3".into()));
        }
        Ok(())
    }

    /// Hash of the configuration with the output directory removed.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.out = PathBuf::new();
        config_hash(&c)
    }

    pub fn construction(&self) -> ConstructionConfig {
        let s = &self.solver;
        ConstructionConfig {
            manifold: self.manifold.clone(),
            schedule: self.schedule.clone(),
            mollifier_order: self.mollifier_order,
            seed: self.seed,
            solver: SolveConfig {
                rel_tol: s.rel_tol,
                abs_tol: s.abs_tol,
                max_step: s.max_step,
                r_end: s.r_end,
                sample_step: s.sample_step,
                ..SolveConfig::default()
            },
        }
    }

    pub fn scan_config(&self) -> ScanConfig {
        let s = &self.scan;
        ScanConfig {
            r_max: self.r_max,
            decades: s.decades,
            samples: s.samples,
            threshold: s.threshold,
            resolution: s.resolution,
            ..ScanConfig::default()
        }
    }
}

fn f64_row<const N: usize>(row: [f64; N]) -> Vec<String> {
    row.iter().map(|&x| fmt_f64(x)).collect()
}

fn prepare(cfg: &RunConfig) -> Result<(String, Construction)> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    std::fs::create_dir_all(&cfg.out)?;
    let hash = cfg.hash()?;
    let c = construct(&cfg.construction())?;
    Ok((hash, c))
}

/// Profile, potential (CSV and JSON sidecar), trajectory and verification report.
pub fn cmd_build(cfg: &RunConfig) -> Result<crate::pipeline::VerificationReport> {
    let (hash, c) = prepare(cfg)?;
    let out = &cfg.out;
    let rs = verification_radii(&c, c.solution.samples().last().map(|s| s.r).unwrap_or(cfg.solver.r_end));
    let rows = rs.iter().map(|&r| profile_row(&c.profile, r).map(f64_row)).collect::<Result<Vec<_>>>()?;
    write_csv(out.join("profile.csv"), &hash, &PROFILE_HEADER, rows)?;
    write_csv(
        out.join("potential.csv"),
        &hash,
        &["r", "V"],
        rs.iter().map(|&r| f64_row([r, c.potential.value(r)])),
    )?;
    write_json(out.join("potential.json"), &hash, c.potential.sidecar())?;
    write_csv(
        out.join("trajectory.csv"),
        &hash,
        &TRAJECTORY_HEADER,
        c.solution.samples().iter().map(|s| f64_row([s.r, s.f, s.f_prime, s.w])),
    )?;
    let rep = verify_construction(&c).map_err(|e| e.in_stage("verify"))?;
    write_json(out.join("report.json"), &hash, &rep)?;
    Ok(rep)
}

pub const M_FUNCTION_HEADER: [&str; 8] =
    ["lambda", "y", "m_minus_re", "m_minus_im", "m_plus_re", "m_plus_im", "m_plus_error", "method"];

/// Measure CSV over the grid cells (default [τ²/2, τ² + 4], 400 cells) and
/// m-functions at the cell midpoints.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<MeasureGrid> {
    let (hash, c) = prepare(cfg)?;
    let tau2 = c.params.tau() * c.params.tau();
    let grid = match &cfg.grid {
        Some(g) => g.parse::<Grid>()?,
        None => Grid { lo: 0.5 * tau2, hi: tau2 + 4.0, n: 400 },
    };
    let edges = uniform_edges(grid.lo, grid.hi, grid.n);
    let sp = &cfg.spectrum;
    let v: std::sync::Arc<dyn Potential> = c.potential.clone();
    let wcfg = WeylConfig { r_far: sp.r_far, ..WeylConfig::default() };
    let ctx = WeylContext::new(v.clone(), wcfg);
    let measure = match sp.method {
        MeasureMethod::Stieltjes => stieltjes_measure(&ctx, &edges, &sp.y, sp.points),
        MeasureMethod::Truncated => {
            truncated_spectral_function(v.as_ref(), sp.length, grid.lo, grid.hi, &SchrodingerConfig::default())
                .map(|t| t.cell_increments(&edges, sp.smooth))
        }
    }
    .map_err(|e| e.in_stage("spectrum"))?;
    let method = measure.method.as_str();
    write_csv(
        cfg.out.join("measure.csv"),
        &hash,
        &MEASURE_HEADER,
        measure.cells.iter().map(|cell| {
            let mut row = f64_row([cell.lo, cell.hi, cell.drho, cell.drho11, cell.drho12, cell.drho22]);
            row.push(method.to_owned());
            row
        }),
    )?;
    let mut rows = Vec::with_capacity(measure.cells.len());
    for cell in &measure.cells {
        let z = Complex64::new(cell.mid(), sp.m_y);
        let m = ctx.m_functions(z).map_err(|e| e.in_stage("m-functions"))?;
        let mut row = f64_row([z.re, z.im, m.m_minus.re, m.m_minus.im, m.m_plus.re, m.m_plus.im, m.error]);
        row.push("closed-form/riccati".to_owned());
        rows.push(row);
    }
    write_csv(cfg.out.join("m_functions.csv"), &hash, &M_FUNCTION_HEADER, rows)?;
    if !measure.jumps.is_empty() {
        write_csv(
            cfg.out.join("jumps.csv"),
            &hash,
            &["lambda", "weight"],
            measure.jumps.iter().map(|&(l, w)| f64_row([l, w])),
        )?;
    }
    Ok(measure)
}

/// Scan CSV and JSON summary. Default energies: every schedule target and
/// control momentum.
pub fn cmd_scan(cfg: &RunConfig) -> Result<crate::classify::ScanReport> {
    let (hash, c) = prepare(cfg)?;
    let tau = c.params.tau();
    let targets = c.potential.targets();
    let energies = match &cfg.grid {
        Some(g) => g.parse::<Grid>()?.points(),
        None => {
            let mut k = targets.clone();
            k.extend(cfg.schedule.controls());
            k.sort_by(|a, b| a.partial_cmp(b).unwrap());
            energies_for(tau, &k)
        }
    };
    let sc = cfg.scan_config();
    let result = scan(c.potential.as_ref(), &energies, &targets, &sc).map_err(|e| e.in_stage("scan"))?;
    write_csv(
        cfg.out.join("scan.csv"),
        &hash,
        &SCAN_HEADER,
        result.records.iter().map(|r| {
            let mut row = f64_row([r.lambda, r.k_bar, r.gamma, r.osc]);
            row.push(r.targeted.to_string());
            row.push(r.class.as_str().to_owned());
            row
        }),
    )?;
    let rep = report(&result, None, sc.resolution);
    write_json(cfg.out.join("scan_report.json"), &hash, &rep)?;
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: Vec<SuiteCheck>,
}

fn check(name: &str, value: f64, tolerance: f64) -> SuiteCheck {
    SuiteCheck { name: name.to_owned(), passed: value <= tolerance, value, tolerance }
}

/// The invariant suite over one construction.
pub fn run_suite(cfg: &RunConfig, c: &Construction) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let rep = verify_construction(c)?;
    for ct in &rep.contracts.contracts {
        checks.push(SuiteCheck {
            name: format!("contract {}", ct.name),
            passed: ct.passed,
            value: ct.margin,
            tolerance: 0.0,
        });
    }
    checks.push(SuiteCheck {
        name: "curvature constant finite".into(),
        passed: rep.curvature.constant.is_finite(),
        value: rep.curvature.constant,
        tolerance: f64::INFINITY,
    });
    let b = &rep.riccati_bounds;
    checks.push(SuiteCheck {
        name: "riccati envelope constants finite".into(),
        passed: b.c_f.is_finite() && b.c_fprime.is_finite(),
        value: b.c_f.max(b.c_fprime),
        tolerance: f64::INFINITY,
    });
    checks.push(check("reconstruction residual", rep.reconstruction_residual, rep.reconstruction_tolerance));

    let sc = SchrodingerConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let x = 0.1 + 49.9 * i as f64 / 199.0;
        let exact = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
        worst = worst.max((bessel_j(0.5, x, &sc.bessel)? - exact).abs());
    }
    checks.push(check("bessel J_1/2 closed form", worst, 1e-10));

    let v = c.potential.as_ref();
    let wcfg = WeylConfig { r_far: cfg.spectrum.r_far, ..WeylConfig::default() };
    let zeros = bessel_zeros(v.nu(), 8, &sc.bessel)?;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let l = 0.25 + 49.5 * i as f64 / 19.0;
        if zeros.iter().any(|j| (j * j - l).abs() < 0.05) {
            continue;
        }
        let z = Complex64::new(l, 0.0);
        let a = m_minus_closed(v.nu(), z, &wcfg)?;
        let b = m_minus_ode(v, z, &wcfg)?;
        worst = worst.max((a - b).norm() / a.norm().max(1.0));
    }
    checks.push(check("M- two routes", worst, 1e-6));

    let tau2 = v.tau() * v.tau();
    let mut worst: f64 = 0.0;
    for z in [Complex64::new(tau2 + 1.0, 0.1), Complex64::new(tau2 + 2.5, 0.1)] {
        let d = weyl_disk_check(v, z, &wcfg)?;
        worst = worst
            .max((d.left_integral / d.left_expected - 1.0).abs())
            .max((d.right_integral / d.right_expected - 1.0).abs());
    }
    checks.push(check("weyl disk identities", worst, 1e-2));

    let solver = cfg.construction().solver;
    let t = solve_t(c.solution.potential().clone(), &c.params, &solver)?;
    checks.push(check("t-coordinate cross-check", cross_check(&c.solution, &t), 10.0 * solver.rel_tol));
    checks.push(check("t-bound ratio", t_bound_ratio(&t, &c.params.envelope, c.params.b + c.params.delta), 1.0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut failures = 0.0;
    for _ in 0..20 {
        if !ComparisonInstance::random(&mut rng).check()?.passed {
            failures += 1.0;
        }
    }
    checks.push(check("comparison failures", failures, 0.0));

    if cfg.schedule.amplitude_scale > 0.0 {
        let targets = c.potential.targets();
        let controls = cfg.schedule.controls();
        let sc = cfg.scan_config();
        let t = scan(v, &energies_for(c.params.tau(), &targets), &targets, &sc)?;
        let u = scan(v, &energies_for(c.params.tau(), &controls), &targets, &sc)?;
        let mut tp: Vec<f64> = t.records.iter().map(|r| r.power()).collect();
        let mut up: Vec<f64> = u.records.iter().map(|r| r.power()).collect();
        checks.push(check("median targeted R-power", median(&mut tp).unwrap_or(0.0), -0.05));
        checks.push(check("median control |R-power|", median(&mut up).unwrap_or(0.0).abs(), 0.01));
    }
    Ok(SuiteReport { passed: checks.iter().all(|c| c.passed), checks })
}

/// Full suite; writes verify.json. Construction errors count as failures.
pub fn cmd_verify(cfg: &RunConfig) -> Result<SuiteReport> {
    let (hash, c) = prepare(cfg)?;
    let rep = run_suite(cfg, &c).map_err(|e| e.in_stage("verify"))?;
    write_json(cfg.out.join("verify.json"), &hash, &rep)?;
    Ok(rep)
}

/// Entry point used by the binary.
pub fn run(cli: Cli) -> ExitCode {
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: config {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    cfg.apply_flags(&cli);
    let outcome = match cli.command {
        Command::Build => cmd_build(&cfg).map(|r| {
            println!("build: report {}", if r.passed { "passed" } else { "FAILED" });
            r.passed
        }),
        Command::Spectrum => cmd_spectrum(&cfg).map(|m| {
            println!("spectrum: {} cells, total increment {}", m.cells.len(), fmt_f64(m.total()));
            true
        }),
        Command::Scan => cmd_scan(&cfg).map(|r| {
            println!(
                "scan: {} energies; eigenvalue-candidate {}, sc-candidate {}, ac-type {}, growing {}",
                r.energies, r.counts.eigenvalue_candidate, r.counts.sc_candidate, r.counts.ac_type, r.counts.growing
            );
            true
        }),
        Command::Verify => cmd_verify(&cfg).map(|r| {
            for c in &r.checks {
                println!("{} {} (value {}, tolerance {})", if c.passed { "PASS" } else { "FAIL" }, c.name, fmt_f64(c.value), fmt_f64(c.tolerance));
            }
            r.passed
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses() {
        let g: Grid = "0.5:5:10".parse().unwrap();
        assert_eq!((g.lo, g.hi, g.n), (0.5, 5.0, 10));
        assert_eq!(g.points().len(), 10);
        assert!("5:1:3".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"manifold": {"n": 4, "colour": 1}}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"manifold": {"n": 4}, "seed": 9}"#).unwrap();
        assert_eq!((c.manifold.n, c.seed, c.manifold.b), (4, 9, 10.0));
    }

    #[test]
    fn pow_envelope_above_tenth_rejected() {
        let c: RunConfig =
            serde_json::from_str(r#"{"manifold": {"envelope": {"family": "pow", "alpha": 0.2}}}"#).unwrap();
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("1/10"), "{e}");
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = RunConfig::default();
        let b = RunConfig { out: PathBuf::from("elsewhere"), ..RunConfig::default() };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }
}
