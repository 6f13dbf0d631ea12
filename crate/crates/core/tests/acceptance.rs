//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use warpspec::bessel::{bessel_j, bessel_zeros, BesselConfig};
use warpspec::classify::{energies_for, median, scan, ScanConfig};
use warpspec::envelope::Envelope;
use warpspec::metric::{effective_potential, ManifoldParams};
use warpspec::pipeline::{construct, curvature_report, reconstruction_residual, Construction, ConstructionConfig};
use warpspec::potential::{bessel_core, bump, BumpTail, FnPotential, Potential, WignerVonNeumann};
use warpspec::riccati::{cross_check, solve_t, t_bound_ratio, verify_bounds, ComparisonInstance};
use warpspec::schrodinger::SchrodingerConfig;
use warpspec::weyl::{
    embedded_norm_sq, generalized_fourier, m_minus_closed, m_minus_ode, m_plus, psi2_linear,
    stieltjes_measure, truncated_spectral_function, uniform_edges, weyl_disk_check, WeylConfig, WeylContext,
};

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bump_tail() -> BumpTail {
    BumpTail::new(1.5, 1.0, 0.6, 5.0, 3.0).unwrap()
}

fn default_construction(envelope: Envelope) -> Construction {
    let cfg = ConstructionConfig {
        manifold: ManifoldParams { envelope, ..ManifoldParams::default() },
        ..ConstructionConfig::default()
    };
    construct(&cfg).expect("default construction")
}

fn c1_bessel() -> Outcome {
    let cfg = BesselConfig::default();
    let pi = std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let x = 0.1 + 49.9 * i as f64 / 2000.0;
        let a = (2.0 / (pi * x)).sqrt();
        let j12 = a * x.sin();
        let j32 = a * (x.sin() / x - x.cos());
        worst = worst.max((bessel_j(0.5, x, &cfg).map_err(err)? - j12).abs());
        worst = worst.max((bessel_j(1.5, x, &cfg).map_err(err)? - j32).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut resid: f64 = 0.0;
    for _ in 0..200 {
        let nu: f64 = rng.gen_range(2.0..5.0);
        let x: f64 = rng.gen_range(0.1..50.0);
        let j = |m: f64| bessel_j(m, x, &cfg);
        let d1 = 0.5 * (j(nu - 1.0).map_err(err)? - j(nu + 1.0).map_err(err)?);
        let d2 = 0.25 * (j(nu - 2.0).map_err(err)? - 2.0 * j(nu).map_err(err)? + j(nu + 2.0).map_err(err)?);
        resid = resid.max((d2 + d1 / x + (1.0 - nu * nu / (x * x)) * j(nu).map_err(err)?).abs());
    }
    Ok((worst <= 1e-10 && resid <= 1e-7, format!("closed-form error {worst:.2e} (tol 1e-10), ODE residual {resid:.2e} (tol 1e-7)")))
}

fn c2_m_minus() -> Outcome {
    let v = FnPotential::new(1.5, 1.0, |r| if r <= 1.0 { bessel_core(1.5, r) } else { 1.0 });
    let cfg = WeylConfig::default();
    let zeros = bessel_zeros(1.5, 4, &cfg.schrodinger.bessel).map_err(err)?;
    let (mut worst, mut worst_im, mut used) = (0.0f64, 0.0f64, 0);
    let mut i = 0;
    while used < 100 {
        let l = 50.0 * (i as f64 + 0.5) / 110.0;
        i += 1;
        if zeros.iter().any(|j| (j * j - l).abs() < 0.1) {
            continue;
        }
        let z = Complex64::new(l, 0.0);
        let a = m_minus_closed(1.5, z, &cfg).map_err(err)?;
        let b = m_minus_ode(&v, z, &cfg).map_err(err)?;
        worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        worst_im = worst_im.max(a.im.abs());
        used += 1;
    }
    Ok((
        worst <= 1e-6 && worst_im <= 1e-10,
        format!("{used} energies: max relative gap {worst:.2e} (tol 1e-6), max |Im M-| {worst_im:.2e} (tol 1e-10)"),
    ))
}

fn c3_weyl_disk() -> Outcome {
    // M₊ and the right integral are also recomputed from the linear equation, integrated backward.
    let c = default_construction(Envelope::Log);
    let v = c.potential.as_ref();
    let cfg = WeylConfig { r_far: 3000.0, ..WeylConfig::default() };
    let tau2 = v.tau() * v.tau();
    let mut worst: f64 = 0.0;
    let mut worst_m: f64 = 0.0;
    let mut points = 0;
    for i in 0..10 {
        let x = 0.6 * tau2 + 0.37 * i as f64;
        for y in [1e-1, 1e-2] {
            let z = Complex64::new(x, y);
            let d = weyl_disk_check(v, z, &cfg).map_err(err)?;
            let r_far = (1.0 + 20.0 / (z - tau2).sqrt().im).min(3000.0);
            let (m_lin, n_lin) = psi2_linear(v, z, r_far, &cfg).map_err(err)?;
            let m_ric = m_plus(v, z, &cfg).map_err(err)?.value;
            worst_m = worst_m.max((m_lin - m_ric).norm() / m_ric.norm());
            worst = worst
                .max((d.left_integral / d.left_expected - 1.0).abs())
                .max((d.right_integral / d.right_expected - 1.0).abs())
                .max((n_lin / d.right_expected - 1.0).abs());
            points += 1;
        }
    }
    Ok((
        worst <= 1e-2 && worst_m <= 1e-6,
        format!(
            "{points} points: max relative deviation {worst:.2e} (tol 1e-2), M+ Riccati vs linear route {worst_m:.2e}; identities hold as -Im M-/Im z and +Im M+/Im z"
        ),
    ))
}

fn c4_free_m_plus() -> Outcome {
    // Same values as the free tail, but no free-radius shortcut: the Riccati solve runs from R = 200.
    let v = FnPotential::new(1.5, 1.0, |r| if r <= 1.0 { bessel_core(1.5, r) } else { 1.0 }).with_breakpoints(vec![1.0]);
    let cfg = WeylConfig { r_far: 200.0, ..WeylConfig::default() };
    let mut worst: f64 = 0.0;
    for (x, y) in [(0.3, 0.5), (1.5, 0.2), (2.0, 0.1), (4.0, 0.3), (7.0, 1.0)] {
        let z = Complex64::new(x, y);
        let m = m_plus(&v, z, &cfg).map_err(err)?;
        worst = worst.max((m.value - Complex64::i() * (z - 1.0).sqrt()).norm());
    }
    Ok((worst <= 1e-8, format!("max |M+ - i sqrt(z - tau^2)| = {worst:.2e} (tol 1e-8)")))
}

fn c5_measure_relations() -> Outcome {
    let v = Arc::new(bump_tail());
    let cfg = WeylConfig::default();
    let ctx = WeylContext::new(v, cfg);
    let edges = uniform_edges(1.5, 3.5, 50);
    let grid = stieltjes_measure(&ctx, &edges, &[1e-1, 1e-2, 1e-3, 1e-4], 9).map_err(err)?;
    let (mut w12, mut w22): (f64, f64) = (0.0, 0.0);
    for c in &grid.cells {
        let m = m_minus_closed(1.5, Complex64::new(c.mid(), 0.0), &cfg).map_err(err)?.re;
        w12 = w12.max((c.drho12 / c.drho11 / m - 1.0).abs());
        w22 = w22.max((c.drho22 / c.drho11 / (m * m) - 1.0).abs());
    }
    Ok((
        w12 <= 0.02 && w22 <= 0.02,
        format!("50 cells on [1.5, 3.5]: max rel. error drho12/drho11 vs M- {w12:.2e}, drho22/drho11 vs M-^2 {w22:.2e} (tol 2e-2)"),
    ))
}

fn c6_norming_constant() -> Outcome {
    let (tau, k0) = (1.0, 1.0);
    let c = 5.0 * k0;
    let v = WignerVonNeumann::tuned(1.5, tau, c, k0, 20.0, 2e4).map_err(err)?;
    let l0 = tau * tau + k0 * k0;
    let gamma = -2.0 * v.predicted_power();
    let norm = embedded_norm_sq(&v, l0, 2e4, gamma, &SchrodingerConfig::default()).map_err(err)?;
    let expected = 1.0 / norm.norm_sq;
    let mut jumps = Vec::new();
    for length in [200.0, 400.0] {
        let ts = truncated_spectral_function(&v, length, l0 - 0.05, l0 + 0.05, &SchrodingerConfig::default())
            .map_err(err)?;
        let w = ts.jump_near(l0, 0.015).mass;
        jumps.push(w);
    }
    let dev = jumps.iter().map(|w| (w / expected - 1.0).abs()).fold(0.0, f64::max);
    let drift = (jumps[1] / jumps[0] - 1.0).abs();
    Ok((
        dev <= 0.02 && drift <= 0.02,
        format!(
            "||J||^-2 = {expected:.6e}; jumps L=200 {:.6e}, L=400 {:.6e}: max deviation {dev:.2e}, L-doubling drift {drift:.2e} (tol 2e-2)",
            jumps[0], jumps[1]
        ),
    ))
}

fn c7_parseval() -> Outcome {
    let v = Arc::new(bump_tail());
    let sc = SchrodingerConfig::default();
    let ctx = WeylContext::new(v.clone(), WeylConfig::default());
    let ys = [1e-1, 1e-2, 1e-3, 1e-4];
    let tests: [(f64, f64, f64); 5] = [(14.0, 8.0, 0.9), (16.0, 8.0, 1.0), (18.0, 9.0, 1.1), (15.0, 10.0, 1.2), (20.0, 9.0, 1.3)];
    let mut errs = Vec::new();
    for cells in [100usize, 400, 800] {
        let grid = stieltjes_measure(&ctx, &uniform_edges(0.5, 5.0, cells), &ys, 9).map_err(err)?;
        let mids: Vec<f64> = grid.cells.iter().map(|c| c.mid()).collect();
        let mut worst: f64 = 0.0;
        for &(center, width, k) in &tests {
            let f = move |r: f64| {
                let x = (r - center) / width;
                if x.abs() >= 1.0 { 0.0 } else { bump(x) * (k * r).cos() }
            };
            let fh = generalized_fourier(v.as_ref(), &f, (center - width, center + width), &mids, &sc).map_err(err)?;
            let lhs: f64 = {
                let n = 4000;
                let h = 2.0 * width / n as f64;
                (0..=n)
                    .map(|i| {
                        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                        w * f(center - width + i as f64 * h).powi(2)
                    })
                    .sum::<f64>()
                    * h
                    / 3.0
            };
            let rhs: f64 = fh.iter().zip(&grid.cells).map(|(a, c)| a * a * c.drho).sum();
            worst = worst.max((rhs / lhs - 1.0).abs());
        }
        errs.push(worst);
    }
    Ok((
        errs[1] <= 0.05 && errs[1] <= errs[0] && errs[2] <= errs[1] * 1.05 + 1e-6,
        format!(
            "5 test functions: max rel. error {:.2e} at 100 cells, {:.2e} at 400 (default, tol 5e-2), {:.2e} at 800",
            errs[0], errs[1], errs[2]
        ),
    ))
}

fn c8_closure(c: &Construction) -> Outcome {
    let (grid_res, r_at) = reconstruction_residual(c, 1e4).map_err(err)?;
    let lambda = c.profile.mode().lambda;
    let lo = c.params.b - c.params.delta;
    let mut off: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..4000 {
        let r = (lo.ln() + rng.gen::<f64>() * (1e4f64.ln() - lo.ln())).exp();
        let vv = c.potential.value(r);
        off = off.max((effective_potential(&c.profile, lambda, r).map_err(err)? - vv).abs() / vv.abs());
    }
    let worst = grid_res.max(off);
    Ok((worst <= 1e-6, format!("max relative residual on [b-delta, 1e4] {worst:.2e} (grid {grid_res:.2e} at r={r_at:.1}, off-grid {off:.2e}; tol 1e-6)")))
}

fn c9_curvature(log: &Construction, pow: &Construction) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in [("log", log), ("pow 1/10", pow)] {
        let his = [1e3, 2e3, 4e3, 8e3, 1e4];
        let cs: Vec<f64> = his
            .iter()
            .map(|&h| curvature_report(c, &c.params.envelope, h).map(|r| r.constant))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let growth = cs.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
        ok &= cs.iter().all(|x| x.is_finite()) && growth <= 0.05;
        parts.push(format!("{name}: C = {:.4} (r_end 1e3) .. {:.4} (1e4), max growth {growth:.2e}", cs[0], cs[4]));
    }
    Ok((ok, parts.join("; ")))
}

fn c10_riccati(c: &Construction) -> Outcome {
    let p = &c.params;
    let lo = p.b - p.delta;
    let bs: Vec<_> = [1e3, 2e3, 4e3, 8e3, 1e4].iter().map(|&h| verify_bounds(&c.solution, &p.envelope, lo, h)).collect();
    let growth = bs
        .windows(2)
        .map(|w| (w[1].c_f / w[0].c_f - 1.0).max(w[1].c_fprime / w[0].c_fprime - 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let solver = ConstructionConfig::default().solver;
    let t = solve_t(c.solution.potential().clone(), p, &solver).map_err(err)?;
    let cc = cross_check(&c.solution, &t);
    let tb = t_bound_ratio(&t, &p.envelope, p.b + p.delta);
    let last = bs.last().unwrap();
    Ok((
        last.c_f.is_finite() && last.c_fprime.is_finite() && growth <= 0.05 && cc <= 10.0 * solver.rel_tol && tb <= 1.0,
        format!(
            "C_f {:.4}, C_f' {:.4}, max growth {growth:.2e}; t cross-check {cc:.2e} (tol {:.0e}); t-bound ratio {tb:.3} (<= 1)",
            last.c_f,
            last.c_fprime,
            10.0 * solver.rel_tol
        ),
    ))
}

fn c11_comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let out = ComparisonInstance::random(&mut rng).check().map_err(err)?;
        if !out.passed {
            failures += 1;
        }
        min_gap = min_gap.min(out.min_gap);
    }
    Ok((failures == 0, format!("100 instances, {failures} failures, smallest f - g = {min_gap:.2e}")))
}

fn c12_resonance(c: &Construction) -> Outcome {
    let sc = ScanConfig { r_max: 1e4, ..ScanConfig::default() };
    let mut worst: f64 = 0.0;
    for (cc, k0) in [(0.5, 1.0), (1.0, 1.5), (2.0, 2.0), (4.0, 1.0), (3.0, 1.5)] {
        let v = WignerVonNeumann::tuned(1.5, 1.0, cc, k0, 20.0, 1e4).map_err(err)?;
        let s = scan(&v, &energies_for(1.0, &[k0]), &[k0], &sc).map_err(err)?;
        worst = worst.max((s.records[0].power() / v.predicted_power() - 1.0).abs());
    }
    let v = c.potential.as_ref();
    let targets = c.potential.targets();
    let controls = warpspec::potential::ScheduleConfig::default().controls();
    let tau = c.params.tau();
    let t = scan(v, &energies_for(tau, &targets), &targets, &sc).map_err(err)?;
    let u = scan(v, &energies_for(tau, &controls), &targets, &sc).map_err(err)?;
    let mt = median(&mut t.records.iter().map(|r| r.power()).collect::<Vec<_>>()).unwrap();
    let mu = median(&mut u.records.iter().map(|r| r.power()).collect::<Vec<_>>()).unwrap();
    Ok((
        worst <= 0.1 && mt <= -0.05 && mu.abs() <= 0.01,
        format!("WvN exponent max rel. error {worst:.2e} (tol 0.1); dyadic median R-power targeted {mt:.4} (<= -0.05), controls {mu:.2e} (|.| <= 0.01)"),
    ))
}

fn c13_band_bottom(c: &Construction) -> Outcome {
    let v = c.potential.as_ref();
    let tau2 = v.tau() * v.tau();
    let sc = SchrodingerConfig::default();
    let lo = 0.05;
    let a = truncated_spectral_function(v, 200.0, lo, tau2 + 4.0, &sc).map_err(err)?;
    let b = truncated_spectral_function(v, 400.0, lo, tau2 + 4.0, &sc).map_err(err)?;
    let below = |t: &warpspec::weyl::TruncatedSpectrum| -> Vec<f64> { t.eigenvalues.iter().copied().filter(|&l| l < tau2).collect() };
    let (ba, bb) = (below(&a), below(&b));
    let isolated = ba.len() == bb.len()
        && a.count_below == b.count_below
        && ba.iter().zip(&bb).all(|(x, y)| (x - y).abs() <= 1e-6 * (1.0 + x.abs()));
    let edges = uniform_edges(tau2, tau2 + 4.0, 40);
    let grid = b.cell_increments(&edges, true);
    let min_cell = grid.cells.iter().map(|c| c.drho).fold(f64::INFINITY, f64::min);
    let above = |t: &warpspec::weyl::TruncatedSpectrum| t.eigenvalues.iter().filter(|&&l| l >= tau2).count() as f64;
    let ratio = above(&b) / above(&a);
    Ok((
        isolated && min_cell > 0.0 && (1.8..=2.2).contains(&ratio),
        format!(
            "{} eigenvalues below tau^2 (stable under L-doubling: {isolated}); above tau^2 count ratio L=400/L=200 {ratio:.3}; min smoothed cell increment on [tau^2, tau^2+4] {min_cell:.3e}",
            bb.len()
        ),
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, limit: f64, t0: Instant, out: Outcome| {
        let secs = t0.elapsed().as_secs_f64();
        let (ok, detail) = match out {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let ok = ok && secs <= limit;
        if !ok {
            failed += 1;
        }
        println!("{} [{id:>2}] {name}: {detail} [{secs:.2} s, limit {limit} s]", if ok { "PASS" } else { "FAIL" });
    };
    macro_rules! run {
        ($id:expr, $name:expr, $limit:expr, $body:expr) => {{
            let t0 = Instant::now();
            let out = $body;
            report($id, $name, $limit, t0, out);
        }};
    }
    run!(1, "Bessel oracle", 1.0, c1_bessel());
    run!(2, "M- two-route agreement", 10.0, c2_m_minus());
    run!(3, "Weyl-disk identities", 60.0, c3_weyl_disk());
    run!(4, "Free-field m-function", 5.0, c4_free_m_plus());
    run!(5, "Measure relations", 120.0, c5_measure_relations());
    run!(6, "Norming-constant identity", 120.0, c6_norming_constant());
    run!(7, "Parseval", 120.0, c7_parseval());
    let t0 = Instant::now();
    let log = default_construction(Envelope::Log);
    let build = t0.elapsed().as_secs_f64();
    run!(8, "Pipeline closure", 30.0 - build, c8_closure(&log));
    let t0 = Instant::now();
    let pow = default_construction(Envelope::Pow { alpha: 0.1 });
    let build_pow = t0.elapsed().as_secs_f64();
    run!(9, "Curvature bound", 60.0 - build - build_pow, c9_curvature(&log, &pow));
    run!(10, "Riccati bounds", 60.0, c10_riccati(&log));
    run!(11, "Comparison property", 60.0, c11_comparison());
    run!(12, "Resonance signatures", 600.0, c12_resonance(&log));
    run!(13, "Band bottom", 300.0, c13_band_bottom(&log));
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
