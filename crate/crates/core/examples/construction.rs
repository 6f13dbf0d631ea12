//! Full construction with verification, as the `verify` subcommand runs it.
use warpspec::pipeline::{construct, verify_construction, ConstructionConfig};

fn main() -> warpspec::Result<()> {
    let c = construct(&ConstructionConfig::default())?;
    let rep = verify_construction(&c)?;
    println!("delta used {} after {} halvings", rep.delta_used, rep.delta_halvings);
    println!("curvature constant {:.4e} (worst at r = {:.3})", rep.curvature.constant, rep.curvature.worst_r);
    println!("reconstruction residual {:.3e}", rep.reconstruction_residual);
    println!("passed: {}", rep.passed);
    Ok(())
}
