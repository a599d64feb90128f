//! Evaluates the four α bounds across a range of d and shows why the margin
//! stays negative at ε = γ = 1/4.

use kgt::bounds::{self, CertificateParams};
use kgt::Slack;
use num_rational::Rational64;

fn main() {
    let quarter = Rational64::new(1, 4);
    let slack = Slack::default();
    let ex = bounds::exponents(quarter, quarter);
    println!(
        "growth exponents: α0 {}  α1 {}  α2 {}  α3 {}",
        ex.a0, ex.a1, ex.a2, ex.a3
    );
    println!("{:>14} {:>12} {:>12} {:>12} {:>12} {:>12}", "d", "α0", "α1", "α2", "α3", "margin");
    for exp in [2u32, 3, 4, 6, 8, 10, 12] {
        let d = 10u64.pow(exp).max(bounds::MIN_D);
        let params = CertificateParams {
            d,
            epsilon: quarter,
            gamma: quarter,
            a: bounds::DEFAULT_WEIGHT,
        };
        let r = bounds::certify(&params, slack).expect("valid parameters");
        println!(
            "{:>14} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            d, r.alpha.a0.value, r.alpha.a1.value, r.alpha.a2.value, r.alpha.a3.value, r.margin
        );
    }
}
