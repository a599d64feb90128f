//! The crepant-style resolution of the 1/6(1,1,1,2)-type cone: smoothness of
//! each maximal cone, the Cartier data of K′ and its restriction to the
//! exceptional divisor.

use kgt::toric::{self, KummerToric};

fn main() -> Result<(), toric::ToricError> {
    let t = KummerToric::compute()?;
    let fan = &t.fan;
    for (label, ray) in fan.labels().iter().zip(fan.rays()) {
        println!("{label}: {ray:?}");
    }
    for c in toric::verify_smooth(fan)? {
        println!("cone {:?}: det {}", c.cone, c.determinant);
    }
    println!("K′ = {:?}", t.k_prime.integral());
    println!("{:<20} {:<18} image", "cone", "m");
    for row in &t.z1.images {
        println!("{:<20} {:<18} {:?}", row.cone.join(","), format!("{:?}", row.m), row.image);
    }
    println!("star rays: {:?}", t.z1.star.fan.rays());
    println!("Z1 = {:?}", t.z1.divisor.integral());
    println!("Z2 = {:?}", t.z2.divisor.integral());
    println!("P_Z2 empty: {}", t.p_z2.is_empty()?);
    Ok(())
}
