//! Positive-definite binary quadratic forms, exact class numbers, and an
//! explicit upper bound for the number of classes of discriminant `−4β`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};
use crate::rounding::{Directed, Slack};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BqfError {
    #[error("discriminant {0} must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("beta must exceed 1, got {0}")]
    BetaTooSmall(u64),
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The form `ax² + bxy + cy²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BinaryQuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryQuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryQuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.discriminant() < 0
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    /// `f(px + qy, rx + sy)`.
    pub fn transform(&self, m: [[i64; 2]; 2]) -> Self {
        let (a, b, c) = (self.a, self.b, self.c);
        let [[p, q], [r, s]] = m;
        BinaryQuadraticForm {
            a: a * p * p + b * p * r + c * r * r,
            b: 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            c: a * q * q + b * q * s + c * s * s,
        }
    }

    /// The unique reduced form properly equivalent to `self`.
    pub fn reduce(&self) -> Result<Self, BqfError> {
        if !self.is_positive_definite() {
            return Err(BqfError::NotPositiveDefinite);
        }
        let (mut a, mut b, mut c) = (self.a, self.b, self.c);
        loop {
            // translate b into (−a, a]
            let k = (a - b).div_euclid(2 * a);
            c += a * k * k + b * k;
            b += 2 * a * k;
            if a > c {
                (a, b, c) = (c, -b, a);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return Ok(BinaryQuadraticForm { a, b, c });
        }
    }
}

fn check_discriminant(d: i64) -> Result<(), BqfError> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(BqfError::InvalidDiscriminant(d));
    }
    Ok(())
}

/// Primitive reduced forms of discriminant `d`, ordered by `(a, b)`.
pub fn reduced_forms(d: i64) -> Result<Vec<BinaryQuadraticForm>, BqfError> {
    check_discriminant(d)?;
    let n = -d;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = BinaryQuadraticForm::new(a, b, num / (4 * a));
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    Ok(out)
}

/// `h(D)`: classes of primitive positive-definite forms of discriminant `D`.
pub fn class_number_exact(d: i64) -> Result<u64, BqfError> {
    Ok(reduced_forms(d)?.len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// `χ_D = ψ·χ₁` with `ψ` the primitive Kronecker character of the
/// fundamental discriminant `D₀`, where `D = D₀ f²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterDecomposition {
    pub discriminant: i64,
    /// modulus of `χ_D`, i.e. `|D|`
    pub modulus: u64,
    pub fundamental_discriminant: i64,
    pub square_factor: u64,
    /// conductor of `ψ`, i.e. `|D₀|`
    pub conductor: u64,
    pub parity: Parity,
}

impl CharacterDecomposition {
    /// `ψ(n) = (D₀ / n)`.
    pub fn psi(&self, n: i64) -> i8 {
        arith::kronecker(self.fundamental_discriminant, n)
    }

    /// `χ_D(n) = (D / n)`.
    pub fn chi(&self, n: i64) -> i8 {
        arith::kronecker(self.discriminant, n)
    }
}

pub fn decompose_character(d: i64) -> Result<CharacterDecomposition, BqfError> {
    check_discriminant(d)?;
    let fac = arith::factorize(d.unsigned_abs())?;
    let mut core: i64 = 1;
    let mut root: u64 = 1;
    for &(p, k) in &fac.factors {
        if k % 2 == 1 {
            core *= p as i64;
        }
        root *= p.pow(k / 2);
    }
    let core = -core;
    let (d0, f) = if core.rem_euclid(4) == 1 {
        (core, root)
    } else {
        (4 * core, root / 2)
    };
    debug_assert_eq!(d0 * (f * f) as i64, d);
    Ok(CharacterDecomposition {
        discriminant: d,
        modulus: d.unsigned_abs(),
        fundamental_discriminant: d0,
        square_factor: f,
        conductor: d0.unsigned_abs(),
        parity: Parity::Odd,
    })
}

/// `κ_χ`: `2 + γ_e − log 4π` for even characters, `2 + γ_e − log π` for odd.
pub fn kappa(parity: Parity) -> f64 {
    let pi = std::f64::consts::PI;
    match parity {
        Parity::Even => 2.0 + EULER_GAMMA - (4.0 * pi).ln(),
        Parity::Odd => 2.0 + EULER_GAMMA - pi.ln(),
    }
}

/// The larger of the two values of `κ_χ`.
pub fn kappa_prime() -> f64 {
    kappa(Parity::Odd)
}

/// Upper bound on `h(D)` for `D < −4` from the primitive-character estimate
/// `|L(1, ψ)| ≤ (log q + κ)/2`:
/// `h(D) ≤ √|D|/(2π) · (log|D| + κ) · ∏_{p | D} (1 − ψ(p)/p)`.
pub fn class_number_upper_bound(d: i64, slack: Slack) -> Result<Directed, BqfError> {
    let ch = decompose_character(d)?;
    let n = ch.modulus as f64;
    let mut euler = 1.0;
    for p in arith::factorize(ch.modulus)?.primes() {
        euler *= 1.0 - ch.psi(p as i64) as f64 / p as f64;
    }
    let raw = n.sqrt() / (2.0 * std::f64::consts::PI) * (n.ln() + kappa(ch.parity)) * euler;
    Ok(Directed::up(slack, raw))
}

/// `#B ≤ (√β/π)(log 4β + κ) ∏_{p | 4β}(1 − ψ(p)/p)`, the number of classes of
/// negative definite blocks of discriminant `−4β`.
pub fn count_b_classes_bound(beta: u64, slack: Slack) -> Result<Directed, BqfError> {
    if beta <= 1 {
        return Err(BqfError::BetaTooSmall(beta));
    }
    class_number_upper_bound(-4 * beta as i64, slack)
}

/// `√|D|/π · L(1, χ_D)` with the Dirichlet series truncated after `terms`
/// terms, together with a bound on the truncation error. Uses that
/// `|Σ_{n ≤ x} χ_D(n)| ≤ |D|/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticClassNumber {
    pub discriminant: i64,
    pub terms: u64,
    pub value: f64,
    pub error_bound: f64,
}

impl AnalyticClassNumber {
    pub fn rounded(&self) -> u64 {
        self.value.round() as u64
    }
}

/// Number of terms for which the truncation error is below `tolerance`.
pub fn terms_for_tolerance(d: i64, tolerance: f64) -> u64 {
    let q = d.unsigned_abs() as f64;
    // error ≤ √q/π · q/(N+1)
    (q.sqrt() * q / (std::f64::consts::PI * tolerance)).ceil() as u64
}

pub fn analytic_class_number(d: i64, terms: u64) -> Result<AnalyticClassNumber, BqfError> {
    check_discriminant(d)?;
    if d >= -4 {
        return Err(BqfError::InvalidDiscriminant(d));
    }
    let q = d.unsigned_abs();
    let table: Vec<i8> = (0..q).map(|n| arith::kronecker(d, n as i64)).collect();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in 1..=terms {
        let c = table[(n % q) as usize];
        if c != 0 {
            // Kahan summation
            let y = c as f64 / n as f64 - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    let qf = q as f64;
    let scale = qf.sqrt() / std::f64::consts::PI;
    Ok(AnalyticClassNumber {
        discriminant: d,
        terms,
        value: scale * sum,
        error_bound: scale * (qf / 2.0) * 2.0 / (terms as f64 + 1.0),
    })
}

/// Whether `d` is a fundamental discriminant.
pub fn is_fundamental(d: i64) -> bool {
    decompose_character(d).map_or(false, |c| c.square_factor == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number_exact(-3).unwrap(), 1);
        assert_eq!(class_number_exact(-4).unwrap(), 1);
        assert_eq!(class_number_exact(-23).unwrap(), 3);
        assert_eq!(class_number_exact(-24).unwrap(), 2);
        assert_eq!(class_number_exact(-8).unwrap(), 1);
        assert_eq!(class_number_exact(-163).unwrap(), 1);
        assert_eq!(class_number_exact(-47).unwrap(), 5);
        // non-fundamental: only primitive forms count, so x² + 3y² alone at −12
        // (2x² + 2xy + 2y² is excluded)
        assert_eq!(class_number_exact(-12).unwrap(), 1);
        assert_eq!(class_number_exact(-5), Err(BqfError::InvalidDiscriminant(-5)));
        assert_eq!(class_number_exact(4), Err(BqfError::InvalidDiscriminant(4)));
    }

    #[test]
    fn reduction_lands_on_listed_forms() {
        let forms = reduced_forms(-56).unwrap();
        for f in &forms {
            assert_eq!(f.reduce().unwrap(), *f);
            let moved = f.transform([[2, 3], [1, 2]]).transform([[1, -4], [0, 1]]);
            assert_eq!(moved.discriminant(), -56);
            assert_eq!(moved.reduce().unwrap(), *f);
        }
        assert_eq!(
            BinaryQuadraticForm::new(-1, 0, 1).reduce(),
            Err(BqfError::NotPositiveDefinite)
        );
    }

    #[test]
    fn character_decomposition_examples() {
        let c = decompose_character(-12).unwrap();
        assert_eq!((c.fundamental_discriminant, c.square_factor, c.conductor), (-3, 2, 3));
        let c = decompose_character(-4).unwrap();
        assert_eq!((c.fundamental_discriminant, c.square_factor), (-4, 1));
        let c = decompose_character(-108).unwrap();
        assert_eq!((c.fundamental_discriminant, c.square_factor), (-3, 6));
        let c = decompose_character(-32).unwrap();
        assert_eq!((c.fundamental_discriminant, c.square_factor), (-8, 2));
        assert_eq!(c.parity, Parity::Odd);
    }

    #[test]
    fn chi_agrees_with_psi_off_the_modulus() {
        for d in (-400..-2).filter(|d: &i64| matches!(d.rem_euclid(4), 0 | 1)) {
            let c = decompose_character(d).unwrap();
            assert_eq!(c.fundamental_discriminant * (c.square_factor * c.square_factor) as i64, d);
            for n in 1..=100i64 {
                if n.gcd(&d) == 1 {
                    assert_eq!(c.chi(n), c.psi(n), "D = {d}, n = {n}");
                }
            }
            // odd character
            assert_eq!(c.psi(-1), -1);
        }
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(Parity::Even) - 0.0461).abs() < 1e-4);
        assert!((kappa(Parity::Odd) - 1.4324).abs() < 1e-4);
        assert!((kappa(Parity::Odd) - kappa(Parity::Even) - 4f64.ln()).abs() < 1e-14);
        assert_eq!(kappa_prime(), kappa(Parity::Odd));
    }

    #[test]
    fn b_class_bound_examples() {
        let s = Slack::default();
        assert!(count_b_classes_bound(6, s).unwrap().value >= 2.0);
        assert!(count_b_classes_bound(2, s).unwrap().value >= 1.0);
        assert_eq!(count_b_classes_bound(1, s), Err(BqfError::BetaTooSmall(1)));
        for beta in 2..=500u64 {
            let h = class_number_exact(-4 * beta as i64).unwrap() as f64;
            assert!(h <= count_b_classes_bound(beta, s).unwrap().value, "beta = {beta}");
        }
    }

    #[test]
    fn analytic_formula_small() {
        for d in [-7i64, -8, -11, -15, -20, -23, -24, -39, -47, -56] {
            let n = terms_for_tolerance(d, 0.4);
            let a = analytic_class_number(d, n).unwrap();
            assert!(a.error_bound < 0.4);
            assert_eq!(a.rounded(), class_number_exact(d).unwrap(), "D = {d}: {a:?}");
        }
    }
}
