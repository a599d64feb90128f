//! Ehrhart polynomial of 6P_Z1 and the resulting bound on the obstruction
//! dimension, compared with the closed form.

use kgt::toric::{self, KummerToric};

fn main() -> Result<(), toric::ToricError> {
    let t = KummerToric::compute()?;
    let poly = t.obstruction_ehrhart()?;
    let coeffs: Vec<String> = poly.coefficients.iter().map(|c| c.to_string()).collect();
    println!("L(6P_Z1, k) coefficients (leading first): {}", coeffs.join(", "));
    println!("vertices of P_Z1:");
    for v in t.p_z1.vertices()? {
        let v: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        println!("  ({})", v.join(", "));
    }
    println!("{:>5} {:>12} {:>16}", "k", "exact sum", "closed form");
    for k in [6, 12, 24, 48, 96, 192, 300] {
        let b = toric::obstruction_dim_bound_with(k, &poly)?;
        println!("{:>5} {:>12} {:>16}", k, b.exact_sum, b.closed_form.to_string());
    }
    Ok(())
}
