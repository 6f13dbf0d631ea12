//! Bessel values, derivatives and zeros, including a complex argument.
use num_complex::Complex64;
use warpspec::bessel::{bessel_j, bessel_j_complex, bessel_j_prime, bessel_zeros, BesselConfig};

fn main() -> warpspec::Result<()> {
    let cfg = BesselConfig::default();
    for nu in [1.5, 2.0, 2.5] {
        let zeros = bessel_zeros(nu, 3, &cfg)?;
        println!("nu = {nu}: first zeros {zeros:.6?}");
        for x in [0.5, 5.0, 25.0] {
            println!("  J({x}) = {:+.12e}  J'({x}) = {:+.12e}", bessel_j(nu, x, &cfg)?, bessel_j_prime(nu, x, &cfg)?);
        }
    }
    let z = Complex64::new(3.0, 0.5);
    println!("J_1.5({z}) = {}", bessel_j_complex(1.5, z, &cfg)?);
    Ok(())
}
