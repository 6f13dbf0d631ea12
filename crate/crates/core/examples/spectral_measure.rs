//! Stieltjes inversion of the scalar Weyl function on a uniform grid.
use std::sync::Arc;

use warpspec::potential::BumpTail;
use warpspec::weyl::{stieltjes_measure, uniform_edges, WeylConfig, WeylContext};

fn main() -> warpspec::Result<()> {
    let v = BumpTail::new(1.5, 1.0, 0.6, 5.0, 3.0)?;
    let ctx = WeylContext::new(Arc::new(v), WeylConfig::default());
    let grid = stieltjes_measure(&ctx, &uniform_edges(0.5, 4.0, 35), &[1e-2, 1e-3, 1e-4], 9)?;
    for c in &grid.cells {
        println!("[{:.2}, {:.2}]  drho = {:.6e}{}", c.lo, c.hi, c.drho, if c.anomalous { "  *" } else { "" });
    }
    println!("total {:.6}", grid.total());
    Ok(())
}
