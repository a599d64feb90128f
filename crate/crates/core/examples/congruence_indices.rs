//! Indices of Γ0(n) and Γ1(n), checked by coset enumeration, plus the
//! boundary bound η(a, e).

use kgt::modcurve;

fn main() -> Result<(), modcurve::ModcurveError> {
    println!("{:>4} {:>8} {:>8} {:>6}", "n", "[Γ:Γ0]", "[Γ:Γ1]", "ε3");
    for n in [1u64, 2, 3, 4, 6, 7, 12, 13, 21, 36, 60] {
        let f = modcurve::indices(n)?;
        assert_eq!(f, modcurve::indices_oracle(n)?);
        println!("{:>4} {:>8} {:>8} {:>6}", n, f.index_gamma0, f.index_gamma1, modcurve::epsilon3(n)?);
    }
    println!("η(a, e) for a, e ≤ 4:");
    for a in 1..=4 {
        let row: Vec<String> = (1..=4).map(|e| modcurve::eta_bound(a, e).unwrap().to_string()).collect();
        println!("  a = {a}: {}", row.join(" "));
    }
    Ok(())
}
