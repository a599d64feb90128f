//! Indices of `Γ₀(n)` and `Γ₁(n)` in `SL(2, ℤ)`, counts of order-3 elliptic
//! points, and the bound `η(a, e)` on boundary components.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModcurveError {
    #[error("level must be positive")]
    ZeroLevel,
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },
    #[error("[Γ₀({e}) : Γ₁({ae})] is not an integer")]
    NonIntegralIndex { e: u64, ae: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub const COSET_ORACLE_CAP: u64 = 60;
pub const EPSILON3_ORACLE_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceIndexReport {
    pub n: u64,
    pub index_gamma0: u64,
    pub index_gamma1: u64,
}

/// `[SL(2, ℤ) : Γ₀(n)] = n ∏_{p | n} (1 + 1/p)`.
pub fn index_gamma0(n: u64) -> Result<u64, ModcurveError> {
    if n == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    Ok(arith::factorize(n)?
        .factors
        .iter()
        .map(|&(p, k)| p.pow(k - 1) * (p + 1))
        .product())
}

/// `[SL(2, ℤ) : Γ₁(n)] = n² ∏_{p | n} (1 − 1/p²)`.
pub fn index_gamma1(n: u64) -> Result<u64, ModcurveError> {
    if n == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    Ok(arith::factorize(n)?
        .factors
        .iter()
        .map(|&(p, k)| p.pow(2 * (k - 1)) * (p * p - 1))
        .product())
}

pub fn indices(n: u64) -> Result<CongruenceIndexReport, ModcurveError> {
    Ok(CongruenceIndexReport {
        n,
        index_gamma0: index_gamma0(n)?,
        index_gamma1: index_gamma1(n)?,
    })
}

type Mat = [u64; 4];

fn mul_mod(x: &Mat, y: &Mat, n: u64) -> Mat {
    [
        (x[0] * y[0] + x[1] * y[2]) % n,
        (x[0] * y[1] + x[1] * y[3]) % n,
        (x[2] * y[0] + x[3] * y[2]) % n,
        (x[2] * y[1] + x[3] * y[3]) % n,
    ]
}

/// All of `SL(2, ℤ/n)`, generated from `S` and `T` by breadth-first search.
pub fn sl2_elements(n: u64) -> Result<Vec<Mat>, ModcurveError> {
    if n == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    if n > COSET_ORACLE_CAP {
        return Err(ModcurveError::CapExceeded {
            what: "level",
            value: n,
            cap: COSET_ORACLE_CAP,
        });
    }
    let id = [1 % n, 0, 0, 1 % n];
    let gens = [[0, n - 1, 1 % n, 0], [1 % n, 1 % n, 0, 1 % n]];
    let mut seen: HashSet<Mat> = HashSet::from([id]);
    let mut queue = VecDeque::from([id]);
    let mut out = vec![id];
    while let Some(g) = queue.pop_front() {
        for h in &gens {
            let x = mul_mod(&g, h, n);
            if seen.insert(x) {
                out.push(x);
                queue.push_back(x);
            }
        }
    }
    Ok(out)
}

/// Indices by coset counting in `SL(2, ℤ/n)`: `Γ₁(n)` is the stabiliser of
/// the column `(1, 0)` and `Γ₀(n)` the stabiliser of the line through it, so
/// the indices are the orbit sizes.
pub fn indices_oracle(n: u64) -> Result<CongruenceIndexReport, ModcurveError> {
    let group = sl2_elements(n)?;
    let units: Vec<u64> = (1..=n).filter(|&u| num_integer::gcd(u, n) == 1).collect();
    let mut vectors = HashSet::new();
    let mut lines = HashSet::new();
    for g in &group {
        let v = (g[0], g[2]);
        vectors.insert(v);
        let line = units
            .iter()
            .map(|&u| ((v.0 * u) % n, (v.1 * u) % n))
            .min()
            .expect("at least one unit");
        lines.insert(line);
    }
    Ok(CongruenceIndexReport {
        n,
        index_gamma0: lines.len() as u64,
        index_gamma1: vectors.len() as u64,
    })
}

/// Number of order-3 elliptic points of `Γ₀(e)`:
/// `0` if `9 | e`, otherwise `∏_{p | e} (1 + (−3/p))`.
pub fn epsilon3(e: u64) -> Result<u64, ModcurveError> {
    if e == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    if e % 9 == 0 {
        return Ok(0);
    }
    Ok(arith::factorize(e)?
        .primes()
        .map(|p| (1 + arith::kronecker(-3, p as i64)) as u64)
        .product())
}

/// Residues `x mod e` with `x² + x + 1 ≡ 0`.
pub fn epsilon3_oracle(e: u64) -> Result<u64, ModcurveError> {
    if e == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    if e > EPSILON3_ORACLE_CAP {
        return Err(ModcurveError::CapExceeded {
            what: "e",
            value: e,
            cap: EPSILON3_ORACLE_CAP,
        });
    }
    Ok((0..e).filter(|&x| (x * x + x + 1) % e == 0).count() as u64)
}

/// `[Γ₀(e) : Γ₁(ae)] · ε₃(e)`.
pub fn eta_bound(a: u64, e: u64) -> Result<u64, ModcurveError> {
    if a == 0 || e == 0 {
        return Err(ModcurveError::ZeroLevel);
    }
    let big = index_gamma1(a * e)?;
    let small = index_gamma0(e)?;
    if big % small != 0 {
        return Err(ModcurveError::NonIntegralIndex { e, ae: a * e });
    }
    Ok(big / small * epsilon3(e)?)
}
