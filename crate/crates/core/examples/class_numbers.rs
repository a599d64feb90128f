//! Class numbers of imaginary quadratic orders, three ways: reduced-form
//! enumeration, the truncated analytic formula, and the certified upper bound.

use kgt::bqf;
use kgt::Slack;

fn main() {
    let slack = Slack::default();
    println!("{:>8} {:>4} {:>10} {:>10}  reduced forms", "D", "h", "analytic", "bound");
    for d in [-3i64, -4, -23, -47, -71, -84, -163, -420, -1555, -4004] {
        let forms = bqf::reduced_forms(d).expect("valid discriminant");
        let (analytic, bound) = if d < -4 {
            let terms = bqf::terms_for_tolerance(d, 0.25);
            (
                format!("{:.3}", bqf::analytic_class_number(d, terms).unwrap().value),
                format!("{:.3}", bqf::class_number_upper_bound(d, slack).unwrap().value),
            )
        } else {
            ("-".into(), "-".into())
        };
        let shown: Vec<String> = forms.iter().take(4).map(|f| format!("({},{},{})", f.a, f.b, f.c)).collect();
        println!(
            "{:>8} {:>4} {:>10} {:>10}  {}{}",
            d,
            forms.len(),
            analytic,
            bound,
            shown.join(" "),
            if forms.len() > 4 { " …" } else { "" }
        );
    }
}
