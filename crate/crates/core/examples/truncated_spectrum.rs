use warpspec::potential::WignerVonNeumann;
use warpspec::schrodinger::SchrodingerConfig;
use warpspec::weyl::{embedded_norm_sq, truncated_spectral_function};

fn main() -> warpspec::Result<()> {
    // c = 5 puts an eigenvalue at λ = 2 inside the continuum.
    let v = WignerVonNeumann::tuned(1.5, 1.0, 5.0, 1.0, 20.0, 2e4)?;
    let cfg = SchrodingerConfig::default();
    let exact = embedded_norm_sq(&v, 2.0, 2e4, -2.0 * v.predicted_power(), &cfg)?;
    println!("1/||J||^2 at lambda = 2: {:.6}", 1.0 / exact.norm_sq);
    for l in [100.0, 200.0] {
        let ts = truncated_spectral_function(&v, l, 1.8, 2.2, &cfg)?;
        let j = ts.jump_near(2.0, 0.015);
        println!("L = {l}: {} levels, jump near 2 = {:.6} ({} levels merged)", ts.eigenvalues.len(), j.mass, j.levels);
    }
    Ok(())
}
