//! Discriminant group of U ⊕ U ⊕ ⟨−6⟩ ⊕ ⟨−2d⟩ from a Smith normal form,
//! against the closed-form decomposition, with congruence counts.

use kgt::lattice::{self, KummerDecomposition};

fn main() -> Result<(), lattice::LatticeError> {
    let d = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12u64);
    let g = lattice::kummer_lattice(d)?;
    println!("det = {}, signature = {:?}", g.determinant(), g.signature());
    let group = lattice::discriminant_group(&g)?;
    println!("SNF invariants: {:?}", group.cyclic_orders);
    println!("primary parts: {:?}", group.primary_invariants());
    let dec = KummerDecomposition::new(d)?;
    let norms: Vec<String> = dec.generator_norms.iter().map(|q| q.to_string()).collect();
    println!("closed form: orders {:?}, norms {:?}", dec.cyclic_orders, norms);
    println!("check: {:?}", lattice::check_kummer_decomposition(d)?);
    println!("counts: {:?}", lattice::congruence_report(d)?);
    if 12 * d <= lattice::DEFAULT_OQL_CAP {
        println!(
            "|O(q_L)| = {} (bound {})",
            lattice::oql_order_oracle(d, lattice::DEFAULT_OQL_CAP)?,
            lattice::oql_bound(d)?
        );
    }
    Ok(())
}
