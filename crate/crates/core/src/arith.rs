//! Number-theoretic primitives: factorisation, divisor functions, the
//! Kronecker symbol and certified growth constants for `2^ν(n)` and `σ₀(n)`.

use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rounding::Slack;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("cannot factorize zero")]
    Zero,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(Rational64),
    #[error("epsilon {epsilon} is below the supported floor {floor} for {kind:?}")]
    EpsilonBelowFloor {
        kind: GrowthKind,
        epsilon: Rational64,
        floor: Rational64,
    },
}

/// Prime factorisation `n = ∏ p^k` with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime divisors.
    pub fn nu(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Number of divisors.
    pub fn sigma0(&self) -> u64 {
        self.factors.iter().map(|&(_, k)| k as u64 + 1).product()
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, k) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, k)| k)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

// The first thirteen primes form a deterministic witness set below 3.3·10^24,
// which covers all of u64.
const MR_WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Brent's variant of Pollard rho; `n` is odd, composite and has no small factors.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 2u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_into(d, out);
    split_into(n / d, out);
}

pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut rest = n;
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p < 1 << 12 && p * p <= rest {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        split_into(rest, &mut primes);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((last, k)) if *last == q => *k += 1,
            _ => factors.push((q, 1)),
        }
    }
    Ok(Factorization { n, factors })
}

pub fn nu(n: u64) -> Result<u32, ArithError> {
    Ok(factorize(n)?.nu())
}

pub fn sigma0(n: u64) -> Result<u64, ArithError> {
    Ok(factorize(n)?.sigma0())
}

/// Divisor counts `σ₀(n)` for `n = 0..=limit` (index 0 holds 0).
pub fn sigma0_table(limit: usize) -> Vec<u32> {
    let mut t = vec![0u32; limit + 1];
    for d in 1..=limit {
        let mut m = d;
        while m <= limit {
            t[m] += 1;
            m += d;
        }
    }
    t
}

/// Distinct prime counts `ν(n)` for `n = 0..=limit`.
pub fn nu_table(limit: usize) -> Vec<u8> {
    let mut t = vec![0u8; limit + 1];
    for p in 2..=limit {
        if t[p] == 0 {
            let mut m = p;
            while m <= limit {
                t[m] += 1;
                m += p;
            }
        }
    }
    t
}

/// Kronecker symbol `(a/n)` on all of ℤ × ℤ.
pub fn kronecker(a: i64, n: i64) -> i8 {
    // (-1)^((x^2-1)/8) indexed by x mod 8
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut a = a as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while b % 2 == 0 {
        v += 1;
        b /= 2;
    }
    let mut k: i8 = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        v = 0;
        while a % 2 == 0 {
            v += 1;
            a /= 2;
        }
        if v % 2 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthKind {
    /// `2^ν(n) ≤ K n^ε`
    Nu,
    /// `σ₀(n) ≤ K n^ε`
    Sigma0,
}

impl GrowthKind {
    /// Smallest supported ε.
    pub fn epsilon_floor(self) -> Rational64 {
        match self {
            GrowthKind::Nu => Rational64::new(1, 10),
            GrowthKind::Sigma0 => Rational64::new(1, 4),
        }
    }
}

/// Where the supremum defining a growth constant was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "at")]
pub enum GrowthWitness {
    /// `k`-th primorial (product of the first `k` primes).
    Primorial { k: u32, largest_prime: u64 },
    /// An integer found by the exhaustive divisor-count scan.
    Scan { n: u64 },
    /// The analytic divisor envelope, at `log d`.
    Envelope { log_d: f64 },
}

/// A certified constant `K` with `f(n) ≤ K n^ε` for every `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstant {
    pub kind: GrowthKind,
    #[serde(with = "crate::serde_ratio")]
    pub epsilon: Rational64,
    pub value: f64,
    pub witness: GrowthWitness,
}

/// Constant of the divisor bound `log σ₀(d) · log log d / (log 2 · log d) ≤ 1.538`,
/// valid for `d ≥ 3`.
pub const NICOLAS_ROBIN: f64 = 1.538;

/// Integers up to this bound are scanned exactly for the `σ₀` constant; the
/// envelope only covers what lies beyond.
pub const SIGMA0_SCAN_LIMIT: u64 = 1_000_000;

/// The left-hand side of the divisor envelope inequality at `d ≥ 3`.
pub fn nicolas_robin_ratio(d: u64, sigma0_d: u64) -> f64 {
    let ld = (d as f64).ln();
    (sigma0_d as f64).ln() * ld.ln() / (std::f64::consts::LN_2 * ld)
}

fn check_epsilon(kind: GrowthKind, epsilon: Rational64) -> Result<(), ArithError> {
    if epsilon <= Rational64::zero() {
        return Err(ArithError::NonPositiveEpsilon(epsilon));
    }
    let floor = kind.epsilon_floor();
    if epsilon < floor {
        return Err(ArithError::EpsilonBelowFloor {
            kind,
            epsilon,
            floor,
        });
    }
    Ok(())
}

fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn growth_constant(
    kind: GrowthKind,
    epsilon: Rational64,
    slack: Slack,
) -> Result<GrowthConstant, ArithError> {
    check_epsilon(kind, epsilon)?;
    Ok(match kind {
        GrowthKind::Nu => nu_constant(epsilon, slack),
        GrowthKind::Sigma0 => sigma0_constant(epsilon, slack, SIGMA0_SCAN_LIMIT),
    })
}

/// Any `n` with `ν(n) = k` is at least the `k`-th primorial, so the maximum of
/// `2^k / n_k^ε` over primorials bounds `2^ν(n)/n^ε`. Appending a prime `p`
/// multiplies the ratio by `2/p^ε`, so the scan stops at the first `p` with
/// `p^ε > 2`. With `ε = num/den` the comparison `2^{k·den}` vs `n_k^{num}` is
/// done in exact integers.
fn nu_constant(epsilon: Rational64, slack: Slack) -> GrowthConstant {
    let num = *epsilon.numer() as u32;
    let den = *epsilon.denom() as u32;
    let two = BigUint::from(2u32);
    let threshold = two.pow(den);

    let mut primorial = BigUint::one();
    let mut log_primorial = 0.0f64;
    // best ratio^den kept as the pair (2^{k den}, n_k^num)
    let mut best = (BigUint::one(), BigUint::one(), 0u32, 1u64, 0.0f64);
    let mut k = 0u32;
    let mut p = 2u64;
    loop {
        if BigUint::from(p).pow(num) > threshold {
            break;
        }
        k += 1;
        primorial *= p;
        log_primorial += (p as f64).ln();
        let lhs = two.pow(k * den);
        let rhs = primorial.pow(num);
        if &lhs * &best.1 > &best.0 * &rhs {
            best = (lhs, rhs, k, p, log_primorial);
        }
        p += 1;
        while !is_prime(p) {
            p += 1;
        }
    }
    let (lhs, rhs, k_best, p_best, log_n) = best;
    let value = if lhs == rhs {
        1.0
    } else {
        let log_ratio = k_best as f64 * std::f64::consts::LN_2 - ratio_to_f64(epsilon) * log_n;
        slack.up(log_ratio.exp()).max(1.0)
    };
    GrowthConstant {
        kind: GrowthKind::Nu,
        epsilon,
        value,
        witness: GrowthWitness::Primorial {
            k: k_best,
            largest_prime: if k_best == 0 { 1 } else { p_best },
        },
    }
}

/// `log` of the divisor envelope `exp(c log d / log log d − ε log d)` at `x = log d`.
fn envelope_log(x: f64, eps: f64) -> f64 {
    NICOLAS_ROBIN * std::f64::consts::LN_2 * x / x.ln() - eps * x
}

/// Supremum of the envelope over `log d ≥ x0` (requires `x0 > 1`).
///
/// With `y = log x` the derivative is `c (y − 1)/y² − ε`, which has at most two
/// zeros; the larger one is the only interior local maximum.
pub fn envelope_sup(x0: f64, eps: f64) -> (f64, f64) {
    let c = NICOLAS_ROBIN * std::f64::consts::LN_2;
    let mut best = (envelope_log(x0, eps), x0);
    let disc = c * c - 4.0 * c * eps;
    if disc >= 0.0 {
        let y_plus = (c + disc.sqrt()) / (2.0 * eps);
        let x_plus = y_plus.exp();
        if x_plus > x0 {
            let g = envelope_log(x_plus, eps);
            if g > best.0 {
                best = (g, x_plus);
            }
        }
    }
    best
}

pub(crate) fn sigma0_constant(epsilon: Rational64, slack: Slack, scan_limit: u64) -> GrowthConstant {
    let eps = ratio_to_f64(epsilon);
    let table = sigma0_table(scan_limit as usize);
    let mut best_log = 0.0f64;
    let mut best_n = 1u64;
    for (n, &s) in table.iter().enumerate().skip(2) {
        let l = (s as f64).ln() - eps * (n as f64).ln();
        if l > best_log {
            best_log = l;
            best_n = n as u64;
        }
    }
    let (env_log, env_x) = envelope_sup(((scan_limit + 1) as f64).ln(), eps);
    let (log_value, witness) = if env_log > best_log {
        (env_log, GrowthWitness::Envelope { log_d: env_x })
    } else {
        (best_log, GrowthWitness::Scan { n: best_n })
    };
    let value = if log_value == 0.0 {
        1.0
    } else {
        slack.up(log_value.exp()).max(1.0)
    };
    GrowthConstant {
        kind: GrowthKind::Sigma0,
        epsilon,
        value,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            if k > 0 {
                out.push((p, k));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert!(factorize(1).unwrap().factors.is_empty());
        let n = 64 * 3 * 97;
        assert_eq!(n, 18624);
        assert_eq!(factorize(n).unwrap().factors, trial_division(n));
        assert_eq!(factorize(n).unwrap().factors, vec![(2, 6), (3, 1), (97, 1)]);
        assert_eq!(factorize(0), Err(ArithError::Zero));
    }

    #[test]
    fn factorize_large_semiprimes() {
        let p = 4_294_967_291u64; // largest prime below 2^32
        let q = 4_294_967_279u64;
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors, vec![(q, 1), (p, 1)]);
        let f = factorize(u64::MAX).unwrap();
        assert_eq!(
            f.factors,
            vec![(3, 1), (5, 1), (17, 1), (257, 1), (641, 1), (65537, 1), (6700417, 1)]
        );
    }

    #[test]
    fn primality_matches_sieve() {
        let limit = 20_000;
        let nt = nu_table(limit);
        let sig = sigma0_table(limit);
        for n in 0..=limit as u64 {
            let sieve_prime = n >= 2 && sig[n as usize] == 2;
            assert_eq!(is_prime(n), sieve_prime, "n = {n}");
            if n >= 1 {
                assert_eq!(nu(n).unwrap(), nt[n as usize] as u32);
                assert_eq!(sigma0(n).unwrap(), sig[n as usize] as u64);
            }
        }
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(n));
        }
    }

    #[test]
    fn nu_sigma0_examples() {
        assert_eq!(nu(12).unwrap(), 2);
        assert_eq!(sigma0(12).unwrap(), 6);
        assert_eq!(nu(1).unwrap(), 0);
        assert_eq!(sigma0(1).unwrap(), 1);
        let by_enumeration = (1..=210u64).filter(|d| 210 % d == 0).count() as u64;
        assert_eq!(by_enumeration, 16);
        assert_eq!(sigma0(2 * 3 * 5 * 7).unwrap(), by_enumeration);
        assert_eq!(factorize(210).unwrap().divisors().len(), 16);
    }

    fn euler_criterion(a: i64, p: i64) -> i8 {
        let r = pow_mod(a.rem_euclid(p) as u64, ((p - 1) / 2) as u64, p as u64);
        match r {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-3, 7), 1);
        assert_eq!(kronecker(-3, 5), -1);
        for d in -50..50 {
            assert_eq!(kronecker(d, 1), 1);
        }
        // (-3/p) = +1 iff p ≡ 1 mod 3 for primes p > 3
        for p in (5..500).filter(|&p| is_prime(p as u64)) {
            let expected = if p % 3 == 1 { 1 } else { -1 };
            assert_eq!(kronecker(-3, p), expected, "p = {p}");
        }
    }

    #[test]
    fn kronecker_matches_legendre_for_odd_primes() {
        for p in (3..200).filter(|&p| is_prime(p as u64)) {
            for a in -60..60 {
                assert_eq!(kronecker(a, p), euler_criterion(a, p), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_at_two_and_negative() {
        // (a/2) depends on a mod 8
        assert_eq!(kronecker(1, 2), 1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(4, 2), 0);
        // (a/-1) = sign(a)
        assert_eq!(kronecker(-5, -1), -1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(0, 1), 1);
        assert_eq!(kronecker(0, 3), 0);
    }

    #[test]
    fn nu_constant_examples() {
        let s = Slack::default();
        let one = growth_constant(GrowthKind::Nu, Rational64::new(1, 1), s).unwrap();
        assert_eq!(one.value, 1.0);

        let half = growth_constant(GrowthKind::Nu, Rational64::new(1, 2), s).unwrap();
        // primorial oracle: stop at the first prime p with sqrt(p) > 2, i.e. p = 5
        let oracle = [1.0f64, 2.0, 6.0]
            .iter()
            .enumerate()
            .map(|(k, n)| 2f64.powi(k as i32) / n.sqrt())
            .fold(0.0, f64::max);
        assert!((half.value - oracle).abs() < 1e-9 * oracle);
        assert!(half.value >= oracle);
        assert_eq!(
            half.witness,
            GrowthWitness::Primorial {
                k: 2,
                largest_prime: 3
            }
        );
    }

    #[test]
    fn growth_constant_rejects_bad_epsilon() {
        let s = Slack::default();
        assert!(matches!(
            growth_constant(GrowthKind::Nu, Rational64::new(0, 1), s),
            Err(ArithError::NonPositiveEpsilon(_))
        ));
        assert!(matches!(
            growth_constant(GrowthKind::Nu, Rational64::new(1, 20), s),
            Err(ArithError::EpsilonBelowFloor { .. })
        ));
        assert!(matches!(
            growth_constant(GrowthKind::Sigma0, Rational64::new(1, 5), s),
            Err(ArithError::EpsilonBelowFloor { .. })
        ));
    }

    #[test]
    fn sigma0_constant_dominates_small_scan() {
        let s = Slack::default();
        let k = sigma0_constant(Rational64::new(1, 2), s, 100_000);
        let table = sigma0_table(200_000);
        for (n, &d) in table.iter().enumerate().skip(1) {
            assert!(d as f64 <= k.value * (n as f64).sqrt(), "n = {n}");
        }
    }

    #[test]
    fn envelope_sup_matches_grid_search() {
        for eps in [0.25, 0.5, 1.0] {
            let x0 = (1e6f64).ln();
            let (g, _) = envelope_sup(x0, eps);
            let mut grid_best = f64::NEG_INFINITY;
            let mut x = x0;
            while x < 2000.0 {
                grid_best = grid_best.max(envelope_log(x, eps));
                x += 1e-3;
            }
            assert!(g >= grid_best - 1e-12, "eps {eps}: {g} < {grid_best}");
            assert!(g - grid_best < 1e-6);
        }
    }

    #[test]
    fn nicolas_robin_holds_on_small_range() {
        let table = sigma0_table(100_000);
        for d in 3..=100_000u64 {
            assert!(nicolas_robin_ratio(d, table[d as usize] as u64) <= NICOLAS_ROBIN);
        }
    }
}
