//! The four leading-coefficient bounds `α₀ … α₃` and the general-type
//! certificate `α₀ − α₁ − α₂ − α₃ > 0` for the Kummer lattice of parameter `d`.
//!
//! Every bound is evaluated in `f64` and rounded outward by the configured
//! [`Slack`]: `α₀` down, `α₁, α₂, α₃` up.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError, GrowthConstant, GrowthKind};
use crate::bqf;
use crate::lattice::{self, LatticeError};
use crate::rounding::{Directed, Slack};
use crate::serde_ratio;

use std::f64::consts::PI;

/// `ζ(3)` to 30 digits, rounded up.
pub const ZETA3: f64 = 1.202_056_903_159_594_285_399_738_161_512;

pub const MIN_D: u64 = 48;
pub const MAX_SCAN_D: u64 = 1_000_000_000_000;
pub const DEFAULT_WEIGHT: u32 = 3;
pub const SCAN_SAMPLES: usize = 100;

/// Leading constant of the boundary point count.
pub const PCOUNT_CONSTANT: i64 = 11520;
/// Leading coefficient of the per-point obstruction bound is `1/OBSTRUCTION_DENOMINATOR`.
pub const OBSTRUCTION_DENOMINATOR: i64 = 288;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("d = {0} is below the supported minimum {MIN_D}")]
    DTooSmall(u64),
    #[error("d must be positive")]
    ZeroD,
    #[error("weight a = {0} must be 1, 2 or 3")]
    BadWeight(u32),
    #[error("d_max = {0} exceeds {MAX_SCAN_D}")]
    ScanTooLarge(u64),
    #[error("determinant of the lattice is {got}, expected 12d = {expected}")]
    DeterminantMismatch { got: String, expected: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("finite rational")
}

/// `(12d)^{5/2} / (497664 ζ(3) π³)`, rounded down.
pub fn alpha0_lower(d: u64, slack: Slack) -> Result<Directed, BoundsError> {
    check_d(d)?;
    let x = 12.0 * d as f64;
    Ok(Directed::down(slack, x * x * x.sqrt() / (497_664.0 * ZETA3 * PI.powi(3))))
}

/// `108199/(360π²) d² + 3243945/(64π²) d^{1/6}`, rounded up.
pub fn alpha1_upper(d: u64, slack: Slack) -> Result<Directed, BoundsError> {
    check_d(d)?;
    let x = d as f64;
    let pi2 = PI * PI;
    Ok(Directed::up(
        slack,
        108_199.0 / (360.0 * pi2) * x * x + 3_243_945.0 / (64.0 * pi2) * x.powf(1.0 / 6.0),
    ))
}

fn check_d(d: u64) -> Result<(), BoundsError> {
    if d < MIN_D {
        return Err(BoundsError::DTooSmall(d));
    }
    Ok(())
}

/// `2(4−a)³ + 6(4−a)² + 8(4−a) + 4`.
pub fn d_of_a(a: u32) -> Result<u64, BoundsError> {
    if !(1..=3).contains(&a) {
        return Err(BoundsError::BadWeight(a));
    }
    let t = (4 - a) as u64;
    Ok(2 * t * t * t + 6 * t * t + 8 * t + 4)
}

/// Contribution of one embedding `2U ⊕ ⟨−2r⟩`: `16 D(a) r² / (675π²)`, rounded up.
pub fn beta_k_upper(r: u64, a: u32, slack: Slack) -> Result<Directed, BoundsError> {
    let da = d_of_a(a)? as f64;
    let r = r as f64;
    Ok(Directed::up(slack, 16.0 * da * r * r / (675.0 * PI * PI)))
}

/// The growth constants and `κ′` shared by all bounds for fixed `(ε, γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    #[serde(with = "serde_ratio")]
    pub epsilon: Rational64,
    #[serde(with = "serde_ratio")]
    pub gamma: Rational64,
    pub k_nu: GrowthConstant,
    pub k_sigma0: GrowthConstant,
    pub kappa_prime: f64,
    pub slack_bits: u32,
}

impl BoundConstants {
    pub fn new(epsilon: Rational64, gamma: Rational64, slack: Slack) -> Result<Self, BoundsError> {
        Ok(BoundConstants {
            epsilon,
            gamma,
            k_nu: arith::growth_constant(GrowthKind::Nu, epsilon, slack)?,
            k_sigma0: arith::growth_constant(GrowthKind::Sigma0, gamma, slack)?,
            kappa_prime: bqf::kappa_prime(),
            slack_bits: slack.bits(),
        })
    }

    fn slack(&self) -> Slack {
        Slack::from_bits(self.slack_bits).unwrap_or_default()
    }
}

/// `256 D(a)/(225π²) · K_ν³ K_σ₀ / (3+ε) · 3^ε · 8^{3+ε} · d^{3/2 + 3ε/2 + γ}`,
/// rounded up.
pub fn alpha2_upper(d: u64, a: u32, c: &BoundConstants) -> Result<Directed, BoundsError> {
    check_d(d)?;
    let da = d_of_a(a)? as f64;
    let eps = to_f64(c.epsilon);
    let gamma = to_f64(c.gamma);
    let value = 256.0 * da / (225.0 * PI * PI)
        * c.k_nu.value.powi(3)
        * c.k_sigma0.value
        / (3.0 + eps)
        * 3f64.powf(eps)
        * 8f64.powf(3.0 + eps)
        * (d as f64).powf(1.5 + 1.5 * eps + gamma);
    Ok(Directed::up(c.slack(), value))
}

/// Every factor of the boundary point-count bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcountFactors {
    pub det_l: u64,
    pub leading: f64,
    pub sqrt_det: f64,
    pub log_term: f64,
    pub euler_product: f64,
    pub k_nu_power: f64,
    pub det_power: f64,
    pub sigma_term: f64,
    pub total: Directed,
}

/// `det L`, checked against the exact determinant of the Gram matrix.
pub fn det_l(d: u64) -> Result<u64, BoundsError> {
    if d == 0 {
        return Err(BoundsError::ZeroD);
    }
    let expected = 12 * d;
    let got = lattice::kummer_lattice(d)?.determinant();
    if got != expected.into() {
        return Err(BoundsError::DeterminantMismatch {
            got: got.to_string(),
            expected,
        });
    }
    Ok(expected)
}

fn pcount_with(d: u64, leading: f64, c: &BoundConstants) -> Result<PcountFactors, BoundsError> {
    let det = det_l(d)?;
    let x = det as f64;
    let eps = to_f64(c.epsilon);
    let gamma = to_f64(c.gamma);
    let ks = c.k_sigma0.value;
    let sqrt_det = x.sqrt();
    let log_term = (4.0 * x).ln() + c.kappa_prime;
    let euler_product = bqf::EULER_GAMMA.exp() * (4.0 * x).ln().ln();
    let k_nu_power = c.k_nu.value.powf(1.0 + eps);
    let det_power = x.powf(1.5 + eps / 2.0);
    let sigma_term = ks * ks * x.powf(2.0 * gamma) + 4.0 * ks * x.powf(gamma) + 4.0;
    let value = leading * sqrt_det * log_term * euler_product * k_nu_power * det_power * sigma_term;
    Ok(PcountFactors {
        det_l: det,
        leading,
        sqrt_det,
        log_term,
        euler_product,
        k_nu_power,
        det_power,
        sigma_term,
        total: Directed::up(c.slack(), value),
    })
}

/// Upper bound on the number of `1/6(1,1,1,2)` points on the boundary.
pub fn pcount_upper(d: u64, c: &BoundConstants) -> Result<PcountFactors, BoundsError> {
    pcount_with(d, PCOUNT_CONSTANT as f64 / PI, c)
}

/// `α₃`: the point count times the per-point obstruction coefficient `1/288`,
/// with the leading constant simplified exactly to `40/π`.
pub fn alpha3_upper(d: u64, c: &BoundConstants) -> Result<PcountFactors, BoundsError> {
    check_d(d)?;
    let leading = Rational64::new(PCOUNT_CONSTANT, OBSTRUCTION_DENOMINATOR);
    debug_assert_eq!(leading, Rational64::from_integer(40));
    pcount_with(d, to_f64(leading) / PI, c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub a0: Directed,
    pub a1: Directed,
    pub a2: Directed,
    pub a3: Directed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConstants {
    #[serde(rename = "K_nu")]
    pub k_nu: f64,
    #[serde(rename = "K_sigma0")]
    pub k_sigma0: f64,
    pub kappa_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: u64,
    #[serde(with = "serde_ratio")]
    pub epsilon: Rational64,
    #[serde(with = "serde_ratio")]
    pub gamma: Rational64,
    pub a: u32,
    pub alpha: Alphas,
    pub constants: ReportConstants,
    pub pcount: PcountFactors,
    pub margin: f64,
    pub verdict: bool,
}

pub fn certify_with(d: u64, a: u32, c: &BoundConstants) -> Result<BoundReport, BoundsError> {
    check_d(d)?;
    let slack = c.slack();
    let a0 = alpha0_lower(d, slack)?;
    let a1 = alpha1_upper(d, slack)?;
    let a2 = alpha2_upper(d, a, c)?;
    let a3 = alpha3_upper(d, c)?;
    let margin = a0.value - a1.value - a2.value - a3.total.value;
    Ok(BoundReport {
        d,
        epsilon: c.epsilon,
        gamma: c.gamma,
        a,
        alpha: Alphas {
            a0,
            a1,
            a2,
            a3: a3.total,
        },
        constants: ReportConstants {
            k_nu: c.k_nu.value,
            k_sigma0: c.k_sigma0.value,
            kappa_prime: c.kappa_prime,
        },
        pcount: pcount_upper(d, c)?,
        margin,
        verdict: margin > 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub d: u64,
    #[serde(with = "serde_ratio")]
    pub epsilon: Rational64,
    #[serde(with = "serde_ratio")]
    pub gamma: Rational64,
    pub a: u32,
}

pub fn certify(params: &CertificateParams, slack: Slack) -> Result<BoundReport, BoundsError> {
    check_d(params.d)?;
    d_of_a(params.a)?;
    let c = BoundConstants::new(params.epsilon, params.gamma, slack)?;
    certify_with(params.d, params.a, &c)
}

/// Powers of `d` in each bound, ignoring logarithms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentReport {
    #[serde(with = "serde_ratio")]
    pub a0: Rational64,
    #[serde(with = "serde_ratio")]
    pub a1: Rational64,
    #[serde(with = "serde_ratio")]
    pub a2: Rational64,
    #[serde(with = "serde_ratio")]
    pub a3: Rational64,
    /// whether `α₀` has strictly the largest exponent
    pub eventually_positive: bool,
}

pub fn exponents(epsilon: Rational64, gamma: Rational64) -> ExponentReport {
    let half = Rational64::new(1, 2);
    let a0 = Rational64::new(5, 2);
    let a1 = Rational64::from_integer(2);
    let a2 = Rational64::new(3, 2) + epsilon * 3 * half + gamma;
    let a3 = Rational64::from_integer(2) + epsilon * half + gamma * 2;
    ExponentReport {
        a0,
        a1,
        a2,
        a3,
        eventually_positive: a0 > a1 && a0 > a2 && a0 > a3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    #[serde(with = "serde_ratio")]
    pub epsilon: Rational64,
    #[serde(with = "serde_ratio")]
    pub gamma: Rational64,
    pub d_max: u64,
    pub seed: u64,
    pub exponents: ExponentReport,
    pub threshold: Option<u64>,
    /// margin at the largest `d` examined
    pub margin_at_d_max: f64,
    pub predecessor_fails: Option<bool>,
    pub samples_checked: usize,
    pub sample_failures: Vec<u64>,
}

/// Least `d ≥ 48` with a positive margin, found by doubling then bisection,
/// followed by a check of `d₀ − 1` and of seeded samples in `(d₀, d_max]`.
pub fn threshold_scan(
    epsilon: Rational64,
    gamma: Rational64,
    d_max: u64,
    seed: u64,
    slack: Slack,
) -> Result<ThresholdScan, BoundsError> {
    if d_max > MAX_SCAN_D {
        return Err(BoundsError::ScanTooLarge(d_max));
    }
    check_d(d_max)?;
    let c = BoundConstants::new(epsilon, gamma, slack)?;
    let verdict = |d: u64| certify_with(d, DEFAULT_WEIGHT, &c).map(|r| r.verdict);

    let mut lo = MIN_D - 1; // largest d known to fail (47 is outside the range)
    let mut hi = None;
    let mut d = MIN_D;
    loop {
        if verdict(d)? {
            hi = Some(d);
            break;
        }
        lo = d;
        if d == d_max {
            break;
        }
        d = (d * 2).min(d_max);
    }
    let margin_at_d_max = certify_with(d_max, DEFAULT_WEIGHT, &c)?.margin;
    let mut report = ThresholdScan {
        epsilon,
        gamma,
        d_max,
        seed,
        exponents: exponents(epsilon, gamma),
        threshold: None,
        margin_at_d_max,
        predecessor_fails: None,
        samples_checked: 0,
        sample_failures: Vec::new(),
    };
    let Some(mut hi) = hi else {
        return Ok(report);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if verdict(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.threshold = Some(hi);
    report.predecessor_fails = Some(hi == MIN_D || !verdict(hi - 1)?);
    if hi < d_max {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SCAN_SAMPLES {
            let s = rng.gen_range(hi + 1..=d_max);
            report.samples_checked += 1;
            if !verdict(s)? {
                report.sample_failures.push(s);
            }
        }
    }
    Ok(report)
}

/// Relative change of the margin when the slack is doubled.
pub fn slack_sensitivity(d: u64, epsilon: Rational64, gamma: Rational64, slack: Slack) -> Result<f64, BoundsError> {
    let base = certify_with(d, DEFAULT_WEIGHT, &BoundConstants::new(epsilon, gamma, slack)?)?;
    let wide = certify_with(d, DEFAULT_WEIGHT, &BoundConstants::new(epsilon, gamma, slack.doubled())?)?;
    if base.margin.is_zero() {
        return Ok(f64::INFINITY);
    }
    Ok(((wide.margin - base.margin) / base.margin).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> Rational64 {
        Rational64::new(1, 4)
    }

    fn half() -> Rational64 {
        Rational64::new(1, 2)
    }

    #[test]
    fn d_of_a_values() {
        assert_eq!(d_of_a(3).unwrap(), 20);
        assert_eq!(d_of_a(2).unwrap(), 60);
        assert_eq!(d_of_a(1).unwrap(), 136);
        assert_eq!(d_of_a(4), Err(BoundsError::BadWeight(4)));
        assert_eq!(d_of_a(0), Err(BoundsError::BadWeight(0)));
    }

    #[test]
    fn alpha0_scaling_and_monotonicity() {
        let s = Slack::default();
        let r = alpha0_lower(4 * 48, s).unwrap().value / alpha0_lower(48, s).unwrap().value;
        assert!((r - 32.0).abs() < 1e-9);
        let mut prev = 0.0;
        for d in 48..200 {
            let v = alpha0_lower(d, s).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(alpha0_lower(47, s), Err(BoundsError::DTooSmall(47)));
    }

    #[test]
    fn alpha0_and_alpha1_against_logs() {
        let s = Slack::default();
        for d in [48u64, 1000, 123_456, 1_000_000_000] {
            let x = d as f64;
            let log_a0 = 2.5 * (12.0 * x).ln() - (497_664f64).ln() - ZETA3.ln() - 3.0 * PI.ln();
            let a0 = alpha0_lower(d, s).unwrap().value;
            assert!((a0.ln() - log_a0).abs() < 1e-9, "d = {d}");
            let t1 = ((108_199f64).ln() - (360.0 * PI * PI).ln() + 2.0 * x.ln()).exp();
            let t2 = ((3_243_945f64).ln() - (64.0 * PI * PI).ln() + x.ln() / 6.0).exp();
            let a1 = alpha1_upper(d, s).unwrap().value;
            assert!(((a1 - (t1 + t2)) / a1).abs() < 1e-9);
        }
        // leading coefficient ≈ 30.45, second ≈ 5135.6
        let a1 = alpha1_upper(48, s).unwrap().value;
        assert!((a1 - (30.452 * 48.0 * 48.0 + 5135.6 * 48f64.powf(1.0 / 6.0))).abs() / a1 < 1e-3);
    }

    #[test]
    fn alpha2_properties() {
        let s = Slack::default();
        let c = BoundConstants::new(half(), quarter(), s).unwrap();
        let a3 = alpha2_upper(48, 3, &c).unwrap().value;
        let a2 = alpha2_upper(48, 2, &c).unwrap().value;
        let a1 = alpha2_upper(48, 1, &c).unwrap().value;
        assert!(a3.is_finite() && a3 > 0.0);
        assert!(a3 < a2 && a2 < a1);
        // power law in d
        let r = alpha2_upper(4 * 48, 3, &c).unwrap().value / a3;
        let exponent = 1.5 + 0.75 + 0.25;
        assert!((r.log(4.0) - exponent).abs() < 1e-9);
        // 48 · 16/675 = 256/225
        assert_eq!(Rational64::new(48 * 16, 675), Rational64::new(256, 225));
        let b = beta_k_upper(5, 3, s).unwrap();
        assert!((b.value - 16.0 * 20.0 * 25.0 / (675.0 * PI * PI)).abs() < 1e-9);
    }

    #[test]
    fn alpha3_is_pcount_over_288() {
        let s = Slack::default();
        let c = BoundConstants::new(half(), half(), s).unwrap();
        for d in [48u64, 480, 48_000] {
            let p = pcount_upper(d, &c).unwrap().total.value;
            let a3 = alpha3_upper(d, &c).unwrap().total.value;
            assert!(((p / 288.0 - a3) / a3).abs() < 1e-12);
            assert!(p > 0.0 && p.is_finite());
        }
        assert_eq!(Rational64::new(PCOUNT_CONSTANT, OBSTRUCTION_DENOMINATOR), Rational64::from_integer(40));
        let f = pcount_upper(48, &c).unwrap();
        assert_eq!(f.det_l, 576);
        for x in [f.sqrt_det, f.log_term, f.euler_product, f.k_nu_power, f.det_power, f.sigma_term] {
            assert!(x > 0.0);
        }
    }

    #[test]
    fn pcount_against_logs() {
        let s = Slack::default();
        let c = BoundConstants::new(quarter(), quarter(), s).unwrap();
        let d = 5000u64;
        let x = 12.0 * d as f64;
        let ks = c.k_sigma0.value;
        let log = (11520.0 / PI).ln()
            + 0.5 * x.ln()
            + ((4.0 * x).ln() + c.kappa_prime).ln()
            + bqf::EULER_GAMMA
            + (4.0 * x).ln().ln().ln()
            + 1.25 * c.k_nu.value.ln()
            + (1.5 + 0.125) * x.ln()
            + (ks * ks * x.sqrt() + 4.0 * ks * x.powf(0.25) + 4.0).ln();
        let v = pcount_upper(d, &c).unwrap().total.value;
        assert!((v.ln() - log).abs() < 1e-9);
    }

    #[test]
    fn pcount_increases_in_d() {
        let c = BoundConstants::new(half(), half(), Slack::default()).unwrap();
        let mut prev = 0.0;
        for d in (1..2000).step_by(37) {
            let v = pcount_upper(d, &c).unwrap().total.value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn certify_small_d() {
        let s = Slack::default();
        let p = CertificateParams {
            d: 48,
            epsilon: half(),
            gamma: half(),
            a: 3,
        };
        let r = certify(&p, s).unwrap();
        assert!(!r.verdict);
        assert!(r.margin < 0.0);
        assert_eq!(r.alpha.a0.rounding, crate::rounding::Rounding::Down);
        assert_eq!(r.alpha.a3.rounding, crate::rounding::Rounding::Up);
        let m = r.alpha.a0.value - r.alpha.a1.value - r.alpha.a2.value - r.alpha.a3.value;
        assert_eq!(m, r.margin);
        assert!(certify(&CertificateParams { d: 10, ..p }, s).is_err());
        assert!(certify(&CertificateParams { a: 5, ..p }, s).is_err());
    }

    #[test]
    fn exponent_comparison() {
        let e = exponents(quarter(), quarter());
        assert_eq!(e.a2, Rational64::new(17, 8));
        assert_eq!(e.a3, Rational64::new(21, 8));
        assert!(!e.eventually_positive);
        let e = exponents(Rational64::new(1, 10), Rational64::new(1, 10));
        assert!(e.eventually_positive);
    }

    #[test]
    fn scan_without_threshold() {
        let s = Slack::default();
        let r = threshold_scan(quarter(), quarter(), 1_000_000, 7, s).unwrap();
        assert_eq!(r.threshold, None);
        assert!(r.margin_at_d_max < 0.0);
        assert!(threshold_scan(quarter(), quarter(), MAX_SCAN_D + 1, 7, s).is_err());
    }
}
