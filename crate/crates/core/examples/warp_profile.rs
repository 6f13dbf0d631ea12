use warpspec::metric::{build_profile, choose_nu, effective_potential, radial_curvature, ManifoldParams};

fn main() -> warpspec::Result<()> {
    for n in 2..=6 {
        let (i, lambda, nu) = choose_nu(n)?;
        println!("n = {n}: mode {i}, lambda_i = {lambda}, nu = {nu:.4}");
    }
    let p = ManifoldParams::default();
    let prof = build_profile(&p, None)?;
    let mode = prof.mode();
    println!("\n{:>6} {:>12} {:>12} {:>12}", "r", "f1", "K_rad", "V");
    for r in [0.25, 0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 4.0, 8.0] {
        let pt = prof.eval(r)?;
        println!(
            "{r:>6.2} {:>12.6} {:>12.6} {:>12.6}",
            pt.f1(),
            radial_curvature(&prof, r)?,
            effective_potential(&prof, mode.lambda, r)?
        );
    }
    Ok(())
}
