//! Fitted amplitude powers across an energy window for a Wigner-von Neumann
//! tail with a resonance at k̄ = 1.
use warpspec::classify::{energies_for, report, scan, ScanConfig};
use warpspec::potential::WignerVonNeumann;

fn main() -> warpspec::Result<()> {
    let v = WignerVonNeumann::tuned(1.5, 1.0, 1.0, 1.0, 20.0, 1e3)?;
    let k_bars: Vec<f64> = (0..=12).map(|i| 0.7 + 0.05 * i as f64).collect();
    let cfg = ScanConfig { r_max: 1e3, ..ScanConfig::default() };
    let res = scan(&v, &energies_for(1.0, &k_bars), &[1.0], &cfg)?;
    for r in &res.records {
        println!("kbar = {:.3}  power = {:+.4}  {}", r.k_bar, r.power(), r.class.as_str());
    }
    let rep = report(&res, None, cfg.resolution);
    println!("{:?}", rep.counts);
    Ok(())
}
