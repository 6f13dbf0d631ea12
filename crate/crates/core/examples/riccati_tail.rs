use std::sync::Arc;

use warpspec::envelope::Envelope;
use warpspec::metric::TildePotential;
use warpspec::pipeline::ConstructionConfig;
use warpspec::potential::{build_potential, Potential};
use warpspec::riccati::{cross_check, solve_f, solve_t, verify_bounds, SolveConfig};

fn main() -> warpspec::Result<()> {
    let cfg = ConstructionConfig::default();
    let p = &cfg.manifold;
    let tilde: Arc<dyn Potential> = Arc::new(TildePotential::new(p)?);
    let v: Arc<dyn Potential> = Arc::new(build_potential(tilde, &cfg.potential_spec(p.delta))?);
    let solver = SolveConfig { r_end: 500.0, ..SolveConfig::default() };
    let f = solve_f(v.clone(), p, &solver)?;
    let t = solve_t(v, p, &solver)?;
    for s in f.samples().iter().step_by(f.samples().len() / 8 + 1) {
        println!("r = {:>8.3}  f = {:+.4e}  w = {:.4e}", s.r, s.f, s.w);
    }
    let env: &Envelope = &p.envelope;
    println!("bounds on [b, 500]: {:?}", verify_bounds(&f, env, p.b, 500.0));
    println!("f vs t relative gap: {:.3e}", cross_check(&f, &t));
    Ok(())
}
