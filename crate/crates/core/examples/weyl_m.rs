use std::sync::Arc;

use num_complex::Complex64;
use warpspec::potential::BumpTail;
use warpspec::weyl::{weyl_disk_check, WeylConfig, WeylContext};

fn main() -> warpspec::Result<()> {
    let v = BumpTail::new(1.5, 1.0, 0.6, 5.0, 3.0)?;
    let cfg = WeylConfig::default();
    let ctx = WeylContext::new(Arc::new(v.clone()), cfg.clone());
    for (x, y) in [(0.5, 0.1), (1.5, 0.1), (2.5, 0.01), (4.0, 0.001)] {
        let z = Complex64::new(x, y);
        let m = ctx.m_functions(z)?;
        let s = ctx.sample(z)?;
        println!("z = {z}: M- = {:.6}, M+ = {:.6}, herglotz = {}", m.m_minus, m.m_plus, s.is_herglotz(1e-12));
    }
    let c = weyl_disk_check(&v, Complex64::new(2.0, 0.05), &cfg)?;
    println!("{c:?}");
    Ok(())
}
