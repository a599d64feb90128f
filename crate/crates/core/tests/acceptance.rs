//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kgt::arith::{self, GrowthKind};
use kgt::bounds;
use kgt::bqf;
use kgt::lattice::{self, Block};
use kgt::modcurve;
use kgt::toric::{self, KummerToric};
use kgt::Slack;
use num_integer::Integer;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x6b67_74;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    v.detail = format!("{} [{:.2}s]", v.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            v.pass = false;
            v.detail = format!("{} exceeds {}s", v.detail, limit.as_secs());
        }
    }
    v
}

fn det_int(m: &[Vec<i64>]) -> i128 {
    // fraction-free elimination
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn toric_fixtures() -> Verdict {
    let t = match KummerToric::compute() {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let fan = &t.fan;
    let mut problems = Vec::new();

    let rays: [[i64; 4]; 6] = [
        [6, -1, -1, -2],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [3, 0, 0, -1],
        [1, 0, 0, 0],
    ];
    if fan.rays() != rays.iter().map(|r| r.to_vec()).collect::<Vec<_>>() {
        problems.push("rays".to_string());
    }
    if fan.cones().len() != 6 {
        problems.push(format!("{} maximal cones", fan.cones().len()));
    }
    for cone in fan.cones() {
        let m: Vec<Vec<i64>> = cone.iter().map(|&r| fan.rays()[r].clone()).collect();
        if det_int(&m).abs() != 1 {
            problems.push(format!("cone {cone:?} not unimodular"));
        }
    }

    let star = match toric::star_fan(fan, toric::EXCEPTIONAL_RAY) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let star_rays = [[-1, -1, -2], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1]];
    if star.fan.rays() != star_rays.iter().map(|r| r.to_vec()).collect::<Vec<_>>() {
        problems.push(format!("star rays {:?}", star.fan.rays()));
    }

    let table: [([&str; 4], [i64; 4], [i64; 3]); 6] = [
        (["v1", "v2", "v4", "v6"], [0, -1, -2, -1], [-1, -2, -1]),
        (["v1", "v2", "v5", "v6"], [0, -1, 0, -2], [-1, 0, -2]),
        (["v1", "v3", "v4", "v6"], [0, -2, -1, -1], [-2, -1, -1]),
        (["v1", "v3", "v5", "v6"], [0, 0, -1, -2], [0, -1, -2]),
        (["v2", "v3", "v4", "v6"], [0, -1, -1, -1], [-1, -1, -1]),
        (["v2", "v3", "v5", "v6"], [0, -1, -1, -2], [-1, -1, -2]),
    ];
    let k_prime = t.k_prime.integral().unwrap_or_default();
    if k_prime != [5, -1, -1, -1, 2, 0] {
        problems.push(format!("K' = {k_prime:?}"));
    }
    let images = &t.z1.images;
    if images.len() != 6 {
        problems.push(format!("{} Cartier rows", images.len()));
    }
    for (row, (cone, m, image)) in images.iter().zip(&table) {
        if row.cone != cone.to_vec() || row.m != m.to_vec() || row.image != image.to_vec() {
            problems.push(format!("Cartier row {:?}", row.cone));
        }
        // ⟨m, v⟩ reproduces the coefficient on every ray of the cone
        for label in cone {
            let r = fan.ray_index(label).unwrap();
            let pairing: i64 = m.iter().zip(&fan.rays()[r]).map(|(a, b)| a * b).sum();
            if pairing != k_prime[r] {
                problems.push(format!("⟨m, {label}⟩ = {pairing} on {cone:?}"));
            }
        }
    }

    let z1 = t.z1.divisor.integral().unwrap_or_default();
    let z2 = t.z2.divisor.integral().unwrap_or_default();
    if z1 != [5, -1, -1, -1, 2] {
        problems.push(format!("Z1 = {z1:?}"));
    }
    if z2 != [-6, 0, 0, 0, -3] {
        problems.push(format!("Z2 = {z2:?}"));
    }
    if problems.is_empty() {
        Verdict::new(true, "6 rays, 6 unimodular cones, star rays, Cartier table, Z1 and Z2 exact")
    } else {
        Verdict::new(false, problems.join("; "))
    }
}

fn ehrhart() -> Verdict {
    let t = match KummerToric::compute() {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let poly = match t.obstruction_ehrhart() {
        Ok(p) => p,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let expected = vec![
        Rational64::from_integer(18),
        Rational64::new(45, 2),
        Rational64::new(17, 2),
        Rational64::from_integer(1),
    ];
    if poly.coefficients != expected {
        return Verdict::new(false, format!("coefficients {:?}", poly.coefficients));
    }
    let six = t.p_z1.dilate(6);
    for k in 1..=6i64 {
        let count = six.dilate(k).count_lattice_points().unwrap();
        // 18k³ + 45k²/2 + 17k/2 + 1
        let direct = Rational64::new(36 * k * k * k + 45 * k * k + 17 * k + 2, 2);
        if Rational64::from_integer(count as i64) != direct || poly.eval(k) != direct {
            return Verdict::new(false, format!("dilate {k}: {count} points, polynomial {}", poly.eval(k)));
        }
    }
    for k in (6..=300).step_by(6) {
        let b = toric::obstruction_dim_bound_with(k, &poly).unwrap();
        if Rational64::from_integer(b.exact_sum as i64) > b.closed_form {
            return Verdict::new(false, format!("k = {k}: {} > {}", b.exact_sum, b.closed_form));
        }
    }
    Verdict::new(true, "6P_Z1 ↦ (18, 45/2, 17/2, 1); counts k=1..6 exact; obstruction sum ≤ closed form for k ≤ 300")
}

fn class_numbers() -> Verdict {
    let slack = Slack::default();
    // independent spot values of h(−4β)
    for (beta, h) in [(2, 1), (3, 1), (5, 2), (6, 2), (14, 4), (17, 4), (21, 4), (26, 6), (41, 8)] {
        let got = bqf::class_number_exact(-4 * beta).unwrap();
        if got != h {
            return Verdict::new(false, format!("h(−4·{beta}) = {got}, expected {h}"));
        }
    }
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for beta in 2..=10_000u64 {
        let h = bqf::class_number_exact(-4 * beta as i64).unwrap();
        let bound = bqf::count_b_classes_bound(beta, slack).unwrap().value;
        worst = worst.max(h as f64 / bound);
        if h as f64 > bound {
            violations.push(beta);
        }
    }
    Verdict::new(
        violations.is_empty(),
        format!("{} violations for 1 < β ≤ 10⁴, max h/bound = {worst:.4}", violations.len()),
    )
}

fn congruences() -> Verdict {
    let mut problems = Vec::new();
    for d in 1..=10_000u64 {
        let check = lattice::check_kummer_decomposition(d).unwrap();
        if check.order != 12 * d || !check.passed() {
            problems.push(format!("d = {d}: decomposition {check:?}"));
        }
        let r = lattice::congruence_report(d).unwrap();
        let p0 = match r.a {
            1 => r.two_part[0] == 1,
            2 => r.two_part[0] == 2,
            _ => r.two_part[0] <= 2,
        };
        if !(p0 && r.two_part[1] <= 4 && r.order_3_with_norm <= 8 && r.caps_respected) {
            problems.push(format!("d = {d}: counts {r:?}"));
        }
        if problems.len() > 5 {
            break;
        }
    }
    for d in 1..=30u64 {
        let order = lattice::oql_order_oracle(d, lattice::DEFAULT_OQL_CAP).unwrap();
        let bound = 1440u64 << arith::nu(2 * d).unwrap();
        if order > bound {
            problems.push(format!("d = {d}: |O(q_L)| = {order} > {bound}"));
        }
    }
    if problems.is_empty() {
        Verdict::new(true, "|D(L)| = 12d and decomposition for d ≤ 10⁴; caps respected; |O(q_L)| bounded for d ≤ 30")
    } else {
        Verdict::new(false, problems.join("; "))
    }
}

fn modular_curves() -> Verdict {
    for n in 1..=60 {
        let formula = modcurve::indices(n).unwrap();
        let oracle = modcurve::indices_oracle(n).unwrap();
        if formula != oracle {
            return Verdict::new(false, format!("n = {n}: {formula:?} vs {oracle:?}"));
        }
    }
    let mut checked = 0;
    for e in 1..=10_000u64 {
        if e % 27 == 0 {
            continue;
        }
        let roots = (0..e).filter(|&x| (x * x + x + 1) % e == 0).count() as u64;
        let formula = modcurve::epsilon3(e).unwrap();
        if formula != roots || modcurve::epsilon3_oracle(e).unwrap() != roots {
            return Verdict::new(false, format!("e = {e}: ε₃ = {formula}, roots = {roots}"));
        }
        checked += 1;
    }
    Verdict::new(true, format!("indices agree for n ≤ 60; ε₃ agrees for {checked} levels"))
}

/// `Z ∈ Γ₁(n)` with entries of moderate size.
fn sample_gamma1(rng: &mut ChaCha8Rng, n: i64) -> Block {
    loop {
        let z11 = 1 + n * rng.gen_range(-3..=3);
        let z21 = n * rng.gen_range(-3..=3);
        let g = z11.extended_gcd(&z21);
        if g.gcd != 1 {
            continue;
        }
        // z11·x + z21·y = 1, so z22 = x and z12 = −y
        let k = rng.gen_range(-3..=3);
        let (z12, z22) = (-g.y + k * z11, g.x + k * z21);
        return [[z11, z12], [z21, z22]];
    }
}

fn gz_structure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let types: Vec<(i64, i64)> = (1..=12i64)
        .flat_map(|a| (1..=12i64).filter(move |e| a * e <= 12).map(move |e| (a, e)))
        .collect();
    let b: Block = [[-2, 1], [1, -2]];
    let mut failed = 0;
    let mut examples = Vec::new();
    for _ in 0..100 {
        let (a, e) = types[rng.gen_range(0..types.len())];
        let off = rng.gen_range(-12..=12);
        let d: Block = [[rng.gen_range(-12..=12), off], [off, rng.gen_range(-12..=12)]];
        let z = sample_gamma1(&mut rng, a * e);
        let q = lattice::gram_from_blocks([[a, 0], [0, a * e]], b, d);
        let problem = match lattice::build_gz(&z, a, e, &d) {
            Ok(g) if !lattice::preserves_form(&g, &q) => Some("form not preserved".to_string()),
            Ok(g) if !lattice::is_in_ne(&g, &q).unwrap_or(false) => Some("not in N(E)".to_string()),
            Ok(_) => None,
            Err(err) => Some(err.to_string()),
        };
        if let Some(p) = problem {
            failed += 1;
            if examples.len() < 3 {
                examples.push(format!("a={a} e={e} Z={z:?} D={d:?}: {p}"));
            }
        }
    }
    if failed == 0 {
        Verdict::new(true, "100 samples integral, form-preserving and in N(E)")
    } else {
        Verdict::new(false, format!("{failed}/100 samples fail, e.g. {}", examples.join("; ")))
    }
}

fn certificate() -> Verdict {
    let quarter = Rational64::new(1, 4);
    let slack = Slack::default();
    let scan = match bounds::threshold_scan(quarter, quarter, bounds::MAX_SCAN_D, SEED, slack) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let Some(d0) = scan.threshold else {
        return Verdict::new(
            false,
            format!(
                "no threshold up to 10¹²; margin there {:.3e}; exponents α₀ {} vs α₃ {}",
                scan.margin_at_d_max, scan.exponents.a0, scan.exponents.a3
            ),
        );
    };
    let certify = |d: u64| {
        bounds::certify(
            &bounds::CertificateParams { d, epsilon: quarter, gamma: quarter, a: bounds::DEFAULT_WEIGHT },
            slack,
        )
        .map(|r| r.verdict)
        .unwrap_or(false)
    };
    if d0 > bounds::MIN_D && certify(d0 - 1) {
        return Verdict::new(false, format!("verdict already true at d₀ − 1 = {}", d0 - 1));
    }
    if !certify(d0) {
        return Verdict::new(false, format!("verdict false at d₀ = {d0}"));
    }
    if scan.samples_checked < bounds::SCAN_SAMPLES || !scan.sample_failures.is_empty() {
        return Verdict::new(false, format!("sampled d above d₀ failing: {:?}", scan.sample_failures));
    }
    let sensitivity = bounds::slack_sensitivity(2 * d0, quarter, quarter, slack).unwrap_or(f64::INFINITY);
    Verdict::new(
        sensitivity < 1e-6,
        format!("d₀ = {d0}; slack sensitivity at 2d₀ = {sensitivity:.2e}"),
    )
}

fn sieve(limit: usize) -> (Vec<u32>, Vec<u32>) {
    let mut omega = vec![0u32; limit + 1];
    let mut divisors = vec![0u32; limit + 1];
    for p in 2..=limit {
        if omega[p] == 0 {
            for m in (p..=limit).step_by(p) {
                omega[m] += 1;
            }
        }
    }
    for i in 1..=limit {
        for m in (i..=limit).step_by(i) {
            divisors[m] += 1;
        }
    }
    (omega, divisors)
}

fn growth_constants() -> Verdict {
    const LIMIT: usize = 1_000_000;
    let (omega, divisors) = sieve(LIMIT);
    let slack = Slack::default();
    let mut lines = Vec::new();
    for eps in [Rational64::new(1, 4), Rational64::new(1, 2), Rational64::from_integer(1)] {
        let e = *eps.numer() as f64 / *eps.denom() as f64;
        for kind in [GrowthKind::Nu, GrowthKind::Sigma0] {
            let k = match arith::growth_constant(kind, eps, slack) {
                Ok(k) => k.value,
                Err(err) => return Verdict::new(false, format!("{kind:?} at {eps}: {err}")),
            };
            for n in 1..=LIMIT {
                let f = match kind {
                    GrowthKind::Nu => (1u64 << omega[n]) as f64,
                    GrowthKind::Sigma0 => divisors[n] as f64,
                };
                if f > k * (n as f64).powf(e) {
                    return Verdict::new(false, format!("{kind:?} ε = {eps}: n = {n} exceeds K = {k}"));
                }
            }
            lines.push(format!("{kind:?}({eps}) = {k:.4}"));
        }
    }
    Verdict::new(true, format!("dominate n ≤ 10⁶: {}", lines.join(", ")))
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, Option<u64>, fn() -> Verdict)> = vec![
        (1, "toric fixtures", Some(1), toric_fixtures),
        (2, "Ehrhart polynomial", Some(30), ehrhart),
        (3, "class-number bound", Some(60), class_numbers),
        (4, "discriminant group and congruences", Some(120), congruences),
        (5, "modular-curve oracles", Some(60), modular_curves),
        (6, "g_Z structure", None, gz_structure),
        (7, "certificate self-consistency", None, certificate),
        (8, "growth constants", None, growth_constants),
    ];
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        let v = timed(limit.map(Duration::from_secs), f);
        println!("criterion {n} ({name}): {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
