//! Certified constants K with 2^ν(n) ≤ K n^ε and σ0(n) ≤ K n^ε.

use kgt::arith::{self, GrowthKind};
use kgt::Slack;
use num_rational::Rational64;

fn main() {
    let slack = Slack::default();
    for kind in [GrowthKind::Nu, GrowthKind::Sigma0] {
        for eps in [(1, 4), (1, 3), (1, 2), (1, 1)] {
            let eps = Rational64::new(eps.0, eps.1);
            match arith::growth_constant(kind, eps, slack) {
                Ok(k) => println!("{kind:?} ε = {eps}: K = {:.6} ({:?})", k.value, k.witness),
                Err(e) => println!("{kind:?} ε = {eps}: {e}"),
            }
        }
    }
}
