//! Glue the unperturbed potential to a dyadic resonant tail and check the
//! three contracts.
use std::sync::Arc;

use warpspec::metric::{ManifoldParams, TildePotential};
use warpspec::pipeline::ConstructionConfig;
use warpspec::potential::{build_potential, verify_contract, Potential};

fn main() -> warpspec::Result<()> {
    let cfg = ConstructionConfig::default();
    let p: &ManifoldParams = &cfg.manifold;
    let tilde = Arc::new(TildePotential::new(p)?);
    let v = build_potential(tilde.clone(), &cfg.potential_spec(p.delta))?;
    println!("{} pieces, targets {:.4?}", v.pieces().len(), v.targets());
    for r in [5.0, 9.9, 10.0, 10.1, 20.0, 100.0, 1000.0] {
        println!("V({r}) - tau^2 = {:+.6e}", v.value(r) - v.tau() * v.tau());
    }
    let report = verify_contract(&v, tilde.as_ref(), p.b, p.delta, &p.envelope, 2000.0, 4000);
    println!("contracts passed: {}", report.passed());
    Ok(())
}
