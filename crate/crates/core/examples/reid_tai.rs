//! Reid–Tai ages of cyclic quotient singularities 1/m(a1, …, a4).

use kgt::toric;

fn main() -> Result<(), toric::ToricError> {
    for (exps, m) in [(vec![1, 1, 1, 2], 6), (vec![0, 1, 1, 2], 6), (vec![1, 1, 1, 1], 2), (vec![1, 1, 1, 3], 6)] {
        let r = toric::reid_tai(&exps, m)?;
        println!("1/{m}{exps:?}: age {}, non-canonical {}", r.age, r.noncanonical);
        for p in &r.powers {
            println!("   g^{}: {:?} age {}{}", p.power, p.exponents, p.age, if p.quasi_reflection { " (quasi-reflection)" } else { "" });
        }
    }
    Ok(())
}
