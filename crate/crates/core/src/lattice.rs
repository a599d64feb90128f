//! Integral lattices: the Kummer-type lattice `U ⊕ U ⊕ ⟨−6⟩ ⊕ ⟨−2d⟩`, its
//! discriminant form, the congruence counts bounding `|O(q_L)|`, normal forms
//! of the `D` block of a rank-2 isotropic sublattice, and the explicit
//! elements `g_Z` of the stabiliser `N(E)`.
//!
//! Everything here is exact: Smith normal forms run over `BigInt`, and
//! discriminant-form values are rationals reduced into `[0, 2)` (norms) or
//! `[0, 1)` (bilinear values).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};
use crate::serde_ratio;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("d must be positive")]
    ZeroD,
    #[error("Gram matrix is not square")]
    NotSquare,
    #[error("Gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("Gram matrix is singular")]
    Singular,
    #[error("discriminant group of order {order} exceeds the enumeration cap {cap}")]
    CapExceeded { order: u64, cap: u64 },
    #[error("prime part must be 2 or 3, got {0}")]
    BadPrimePart(u64),
    #[error("fixed coordinate {p} is out of range for C_{prime}")]
    BadFixedCoordinate { p: u64, prime: u64 },
    #[error("a and e must be positive")]
    BadTypeParameters,
    #[error("D block is not symmetric")]
    AsymmetricBlock,
    #[error("Z is not in SL(2, Z)")]
    NotSpecialLinear,
    #[error("Z is not in Gamma_1({0})")]
    NotInGamma1(i64),
    #[error("no integral {0} exists for this Z and D")]
    NotIntegral(&'static str),
    #[error("matrix is not block upper triangular in the 2+2+2 split")]
    WrongShape,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Symmetric integer Gram matrix, serialised as a JSON array of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct GramMatrix {
    entries: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for GramMatrix {
    type Error = LatticeError;

    fn try_from(entries: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        GramMatrix::new(entries)
    }
}

impl From<GramMatrix> for Vec<Vec<i64>> {
    fn from(g: GramMatrix) -> Self {
        g.entries
    }
}

impl GramMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(LatticeError::NotSquare);
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        Ok(GramMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &GramMatrix) -> GramMatrix {
        let (n, m) = (self.dim(), other.dim());
        let mut entries = vec![vec![0i64; n + m]; n + m];
        for i in 0..n {
            entries[i][..n].copy_from_slice(&self.entries[i]);
        }
        for i in 0..m {
            entries[n + i][n..].copy_from_slice(&other.entries[i]);
        }
        GramMatrix { entries }
    }

    pub fn hyperbolic_plane() -> GramMatrix {
        GramMatrix {
            entries: vec![vec![0, 1], vec![1, 0]],
        }
    }

    pub fn rank_one(n: i64) -> GramMatrix {
        GramMatrix {
            entries: vec![vec![n]],
        }
    }

    fn to_big(&self) -> Vec<Vec<BigInt>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    /// Exact determinant (fraction-free Bareiss elimination).
    pub fn determinant(&self) -> BigInt {
        bareiss_determinant(self.to_big())
    }

    /// `(positive, negative)` inertia, computed by exact congruence
    /// diagonalisation over ℚ.
    pub fn signature(&self) -> (usize, usize) {
        let n = self.dim();
        let mut m: Vec<Vec<BigRational>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let (mut pos, mut neg) = (0, 0);
        let mut active: Vec<usize> = (0..n).collect();
        while !active.is_empty() {
            let pivot = active.iter().copied().find(|&i| !m[i][i].is_zero());
            let p = match pivot {
                Some(p) => p,
                None => {
                    // no diagonal pivot: pair up an off-diagonal entry
                    let pair = active.iter().flat_map(|&i| active.iter().map(move |&j| (i, j)))
                        .find(|&(i, j)| i != j && !m[i][j].is_zero());
                    match pair {
                        Some((i, j)) => {
                            // e_i <- e_i + e_j turns m[i][i] into 2 m[i][j] + m[j][j] ≠ 0
                            for k in 0..n {
                                let v = m[j][k].clone();
                                m[i][k] += v;
                            }
                            for k in 0..n {
                                let v = m[k][j].clone();
                                m[k][i] += v;
                            }
                            i
                        }
                        None => break,
                    }
                }
            };
            let piv = m[p][p].clone();
            if piv.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            active.retain(|&i| i != p);
            for &i in &active {
                let f = &m[i][p] / &piv;
                if f.is_zero() {
                    continue;
                }
                for k in 0..n {
                    let v = &f * &m[p][k];
                    m[i][k] -= v;
                }
                for k in 0..n {
                    let v = &f * &m[k][p];
                    m[k][i] -= v;
                }
            }
        }
        (pos, neg)
    }

    /// `x^T G y` for rational coordinate vectors.
    pub fn pair(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                let g = self.entries[i][j];
                if g != 0 && !yj.is_zero() {
                    acc += xi * yj * BigRational::from_integer(g.into());
                }
            }
        }
        acc
    }

    /// Whether `G x` is integral, i.e. `x` lies in the dual lattice.
    pub fn is_dual_vector(&self, x: &[BigRational]) -> bool {
        self.entries.iter().all(|row| {
            let v: BigRational = row
                .iter()
                .zip(x)
                .map(|(&g, xi)| xi * BigRational::from_integer(g.into()))
                .sum();
            v.is_integer()
        })
    }
}

fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Smith normal form `U A V = S` with unimodular `U`, `V`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diagonal: Vec<BigInt>,
    pub left: Vec<Vec<BigInt>>,
    pub right: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn smith_normal_form(a: &[Vec<BigInt>]) -> SmithForm {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut s: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity(m);
    let mut v = identity(n);

    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !s[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(s, u, v);
            };
            s.swap(t, pi);
            u.swap(t, pi);
            for row in s.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }

            let mut clean = true;
            for i in t + 1..m {
                if s[i][t].is_zero() {
                    continue;
                }
                let q = s[i][t].div_floor(&s[t][t]);
                for k in 0..n {
                    let d = &q * &s[t][k];
                    s[i][k] -= d;
                }
                for k in 0..m {
                    let d = &q * &u[t][k];
                    u[i][k] -= d;
                }
                clean &= s[i][t].is_zero();
            }
            for j in t + 1..n {
                if s[t][j].is_zero() {
                    continue;
                }
                let q = s[t][j].div_floor(&s[t][t]);
                for k in 0..m {
                    let d = &q * &s[k][t];
                    s[k][j] -= d;
                }
                for k in 0..n {
                    let d = &q * &v[k][t];
                    v[k][j] -= d;
                }
                clean &= s[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility condition: pivot must divide the remaining block
            let offending = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !(&s[i][j] % &s[t][t]).is_zero());
            match offending {
                Some((i, _)) => {
                    for k in 0..n {
                        let d = s[i][k].clone();
                        s[t][k] += d;
                    }
                    for k in 0..m {
                        let d = u[i][k].clone();
                        u[t][k] += d;
                    }
                }
                None => break,
            }
        }
        if s[t][t].is_negative() {
            for k in 0..n {
                s[t][k] = -s[t][k].clone();
            }
            for k in 0..m {
                u[t][k] = -u[t][k].clone();
            }
        }
    }
    finish(s, u, v)
}

fn finish(s: Vec<Vec<BigInt>>, u: Vec<Vec<BigInt>>, v: Vec<Vec<BigInt>>) -> SmithForm {
    let k = s.len().min(s.first().map_or(0, |r| r.len()));
    SmithForm {
        diagonal: (0..k).map(|i| s[i][i].clone()).collect(),
        left: u,
        right: v,
    }
}

/// Reduces `r` into `[0, m)`.
pub fn reduce_mod(r: Rational64, m: i64) -> Rational64 {
    let m = Rational64::from_integer(m);
    let q = (r / m).floor();
    r - q * m
}

fn big_to_small(r: &BigRational) -> Rational64 {
    Rational64::new(
        r.numer().to_i64().expect("numerator fits i64"),
        r.denom().to_i64().expect("denominator fits i64"),
    )
}

/// Finite quadratic form on `⊕ C_{s_i}`: norms mod 2ℤ, bilinear values mod ℤ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantGroup {
    pub cyclic_orders: Vec<u64>,
    #[serde(with = "serde_ratio::vec")]
    pub generator_norms: Vec<Rational64>,
    pub order: u64,
    /// `b(x_i, x_j) mod 1` for the generators; the diagonal repeats the norms mod 1.
    #[serde(skip)]
    bilinear: Vec<Vec<Rational64>>,
}

impl DiscriminantGroup {
    /// Orthogonal sum of cyclic groups with the given generator norms.
    pub fn orthogonal(cyclic_orders: Vec<u64>, norms: Vec<Rational64>) -> Self {
        let r = cyclic_orders.len();
        assert_eq!(norms.len(), r);
        let generator_norms: Vec<Rational64> = norms.into_iter().map(|q| reduce_mod(q, 2)).collect();
        let mut bilinear = vec![vec![Rational64::zero(); r]; r];
        for i in 0..r {
            bilinear[i][i] = reduce_mod(generator_norms[i], 1);
        }
        DiscriminantGroup {
            order: cyclic_orders.iter().product(),
            cyclic_orders,
            generator_norms,
            bilinear,
        }
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn bilinear(&self, i: usize, j: usize) -> Rational64 {
        self.bilinear[i][j]
    }

    /// `q(Σ c_i x_i) mod 2`.
    pub fn norm(&self, coeffs: &[u64]) -> Rational64 {
        let mut acc = Rational64::zero();
        for i in 0..self.rank() {
            let ci = coeffs[i] as i64;
            if ci == 0 {
                continue;
            }
            acc += self.generator_norms[i] * (ci * ci);
            for j in i + 1..self.rank() {
                acc += self.bilinear[i][j] * (2 * ci * coeffs[j] as i64);
            }
        }
        reduce_mod(acc, 2)
    }

    /// Order of the element with coefficients `coeffs`.
    pub fn element_order(&self, coeffs: &[u64]) -> u64 {
        coeffs
            .iter()
            .zip(&self.cyclic_orders)
            .map(|(&c, &s)| s / c.gcd(&s))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// Coefficient vectors of all elements, in mixed-radix order.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.order).map(move |mut idx| {
            self.cyclic_orders
                .iter()
                .map(|&s| {
                    let c = idx % s;
                    idx /= s;
                    c
                })
                .collect()
        })
    }

    /// Elementary divisors as sorted prime powers `(p, k)`.
    pub fn primary_invariants(&self) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = self
            .cyclic_orders
            .iter()
            .filter(|&&s| s > 1)
            .flat_map(|&s| arith::factorize(s).expect("orders are positive").factors)
            .collect();
        out.sort_unstable();
        out
    }

    /// Number of elements of each norm, keyed by the norm.
    pub fn norm_histogram(&self) -> std::collections::BTreeMap<Rational64, u64> {
        let mut h = std::collections::BTreeMap::new();
        for c in self.elements() {
            *h.entry(self.norm(&c)).or_insert(0) += 1;
        }
        h
    }
}

/// `D(L) = L^∨/L` with its discriminant form, read off a Smith normal form of
/// the Gram matrix: if `U G V = S` then the columns of `V S^{-1}` with
/// `s_i > 1` generate the dual modulo `L`.
pub fn discriminant_group(g: &GramMatrix) -> Result<DiscriminantGroup, LatticeError> {
    if g.determinant().is_zero() {
        return Err(LatticeError::Singular);
    }
    let snf = smith_normal_form(&g.to_big());
    let n = g.dim();
    let mut gens: Vec<Vec<BigRational>> = Vec::new();
    let mut orders = Vec::new();
    for (i, s) in snf.diagonal.iter().enumerate() {
        if s.is_one() {
            continue;
        }
        let col: Vec<BigRational> = (0..n)
            .map(|k| BigRational::new(snf.right[k][i].clone(), s.clone()))
            .collect();
        gens.push(col);
        orders.push(s.to_u64().expect("invariant factor fits u64"));
    }
    let r = gens.len();
    let mut bilinear = vec![vec![Rational64::zero(); r]; r];
    let mut norms = Vec::with_capacity(r);
    for i in 0..r {
        let q = big_to_small(&g.pair(&gens[i], &gens[i]));
        norms.push(reduce_mod(q, 2));
        bilinear[i][i] = reduce_mod(q, 1);
        for j in i + 1..r {
            let b = reduce_mod(big_to_small(&g.pair(&gens[i], &gens[j])), 1);
            bilinear[i][j] = b;
            bilinear[j][i] = b;
        }
    }
    Ok(DiscriminantGroup {
        order: orders.iter().product(),
        cyclic_orders: orders,
        generator_norms: norms,
        bilinear,
    })
}

/// Gram matrix of `U ⊕ U ⊕ ⟨−6⟩ ⊕ ⟨−2d⟩` on the basis `(f, f', f, f', w, v)`.
pub fn kummer_lattice(d: u64) -> Result<GramMatrix, LatticeError> {
    if d == 0 {
        return Err(LatticeError::ZeroD);
    }
    let u = GramMatrix::hyperbolic_plane();
    Ok(u.direct_sum(&u)
        .direct_sum(&GramMatrix::rank_one(-6))
        .direct_sum(&GramMatrix::rank_one(-2 * d as i64)))
}

/// Closed-form decomposition `(C₂ ⊕ C_{2^a}) ⊕ (C₃ ⊕ C_{3^b}) ⊕ C_{d'}` of
/// `D(L)` for the Kummer lattice, with `2^a ‖ 2d`, `3^b ‖ 2d`, `d' = 2d/(2^a 3^b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KummerDecomposition {
    pub d: u64,
    pub a: u32,
    pub b: u32,
    pub d_prime: u64,
    pub cyclic_orders: Vec<u64>,
    #[serde(with = "serde_ratio::vec")]
    pub generator_norms: Vec<Rational64>,
}

impl KummerDecomposition {
    pub fn new(d: u64) -> Result<Self, LatticeError> {
        if d == 0 {
            return Err(LatticeError::ZeroD);
        }
        let two_d = 2 * d;
        let f = arith::factorize(two_d)?;
        let a = f.exponent_of(2);
        let b = f.exponent_of(3);
        let pa = 1u64 << a;
        let pb = 3u64.pow(b);
        let d_prime = two_d / (pa * pb);
        let td = two_d as i64;
        let norms = vec![
            Rational64::new(-3, 2),
            Rational64::new(-td, (pa * pa) as i64),
            Rational64::new(-2, 3),
            Rational64::new(-td, (pb * pb) as i64),
            Rational64::new(-td, (d_prime * d_prime) as i64),
        ];
        Ok(KummerDecomposition {
            d,
            a,
            b,
            d_prime,
            cyclic_orders: vec![2, pa, 3, pb, d_prime],
            generator_norms: norms.into_iter().map(|q| reduce_mod(q, 2)).collect(),
        })
    }

    pub fn group(&self) -> DiscriminantGroup {
        DiscriminantGroup::orthogonal(self.cyclic_orders.clone(), self.generator_norms.clone())
    }

    /// The generators as vectors of `L ⊗ ℚ`: `w/2, v/2^a, w/3, v/3^b, v/d'`.
    pub fn generator_vectors(&self) -> Vec<Vec<BigRational>> {
        let vec_with = |idx: usize, den: u64| {
            let mut x = vec![BigRational::zero(); 6];
            x[idx] = BigRational::new(BigInt::one(), BigInt::from(den));
            x
        };
        vec![
            vec_with(4, 2),
            vec_with(5, 1 << self.a),
            vec_with(4, 3),
            vec_with(5, 3u64.pow(self.b)),
            vec_with(5, self.d_prime),
        ]
    }
}

/// Result of checking the SNF discriminant group against the closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub d: u64,
    pub order: u64,
    pub order_is_12d: bool,
    pub primary_parts_match: bool,
    pub generator_norms_match: bool,
}

impl DecompositionCheck {
    pub fn passed(&self) -> bool {
        self.order_is_12d && self.primary_parts_match && self.generator_norms_match
    }
}

pub fn check_kummer_decomposition(d: u64) -> Result<DecompositionCheck, LatticeError> {
    let g = kummer_lattice(d)?;
    let group = discriminant_group(&g)?;
    let closed = KummerDecomposition::new(d)?;
    let primary_parts_match = group.primary_invariants() == closed.group().primary_invariants();
    let generator_norms_match = closed
        .generator_vectors()
        .iter()
        .zip(&closed.generator_norms)
        .zip(&closed.cyclic_orders)
        .all(|((x, q), &ord)| {
            let norm = reduce_mod(big_to_small(&g.pair(x, x)), 2);
            // the least k with k·x ∈ L is the lcm of the reduced denominators
            let order = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            g.is_dual_vector(x) && norm == *q && order == BigInt::from(ord)
        });
    Ok(DecompositionCheck {
        d,
        order: group.order,
        order_is_12d: group.order == 12 * d,
        primary_parts_match,
        generator_norms_match,
    })
}

/// `2880 · 2^{ν(2d)}`, the bound on `|O(L) : Γ|`.
pub fn index_bound(d: u64) -> Result<u64, LatticeError> {
    if d == 0 {
        return Err(LatticeError::ZeroD);
    }
    Ok(2880 << arith::nu(2 * d)?)
}

/// `1440 · 2^{ν(2d)}`, the bound on `|O(q_L)|`.
pub fn oql_bound(d: u64) -> Result<u64, LatticeError> {
    Ok(index_bound(d)? / 2)
}

/// Solutions `q mod p^k` of the norm congruence on `C_p ⊕ C_{p^k}` with the
/// `C_p` coordinate fixed, where `p ∈ {2, 3}` and `p^k ‖ 2d`. Only elements of
/// order exactly `p^k` are counted: these are the candidate images of the
/// `C_{p^k}` generator.
///
/// For `p = 2` the congruence is `−3x²/2 − 2d q²/2^{2k} ≡ −2d/2^{2k} (mod 2)`,
/// for `p = 3` it is `−2x²/3 − 2d q²/3^{2k} ≡ −2d/3^{2k} (mod 2)`.
pub fn count_congruence_solutions(d: u64, p_fixed: u64, prime_part: u64) -> Result<u64, LatticeError> {
    let part = PrimaryPart::new(d, prime_part)?;
    if p_fixed >= prime_part {
        return Err(LatticeError::BadFixedCoordinate {
            p: p_fixed,
            prime: prime_part,
        });
    }
    let target = part.group.generator_norms[1];
    let full = part.group.cyclic_orders[1];
    Ok((0..full)
        .filter(|&q| {
            let c = [p_fixed, q];
            part.group.element_order(&c) == full && part.group.norm(&c) == target
        })
        .count() as u64)
}

/// The `p`-primary part `C_p ⊕ C_{p^k}` of the Kummer discriminant group.
struct PrimaryPart {
    group: DiscriminantGroup,
}

impl PrimaryPart {
    fn new(d: u64, prime: u64) -> Result<Self, LatticeError> {
        let dec = KummerDecomposition::new(d)?;
        let (i, j) = match prime {
            2 => (0, 1),
            3 => (2, 3),
            other => return Err(LatticeError::BadPrimePart(other)),
        };
        Ok(PrimaryPart {
            group: DiscriminantGroup::orthogonal(
                vec![dec.cyclic_orders[i], dec.cyclic_orders[j]],
                vec![dec.generator_norms[i], dec.generator_norms[j]],
            ),
        })
    }

    fn count(&self, order: u64, norm: Rational64) -> u64 {
        self.group
            .elements()
            .filter(|c| self.group.element_order(c) == order && self.group.norm(c) == norm)
            .count() as u64
    }
}

/// All per-case congruence counts for one `d`, with the caps they must obey.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub d: u64,
    pub a: u32,
    pub b: u32,
    /// counts for `p = 0, 1` in `C₂ ⊕ C_{2^a}`
    pub two_part: [u64; 2],
    /// counts for `p = 0, 1, 2` in `C₃ ⊕ C_{3^b}`
    pub three_part: [u64; 3],
    /// elements of order `2^a` with norm `−2d/2^{2a}`
    pub order_2a_with_norm: u64,
    /// elements of order 2 with norm `−3/2`
    pub order_2_with_norm: u64,
    /// elements of order 3 with norm `−2/3`
    pub order_3_with_norm: u64,
    pub caps_respected: bool,
}

pub fn congruence_report(d: u64) -> Result<CongruenceReport, LatticeError> {
    let dec = KummerDecomposition::new(d)?;
    let two = PrimaryPart::new(d, 2)?;
    let three = PrimaryPart::new(d, 3)?;
    let two_part = [
        count_congruence_solutions(d, 0, 2)?,
        count_congruence_solutions(d, 1, 2)?,
    ];
    let three_part = [
        count_congruence_solutions(d, 0, 3)?,
        count_congruence_solutions(d, 1, 3)?,
        count_congruence_solutions(d, 2, 3)?,
    ];
    let order_2a_with_norm = two.count(1 << dec.a, dec.generator_norms[1]);
    let order_2_with_norm = two.count(2, dec.generator_norms[0]);
    // the order-3 elements live in C₃ ⊕ C_{3^b}, whichever b is
    let order_3_with_norm = three.count(3, dec.generator_norms[2]);

    let p0_cap = match dec.a {
        1 => two_part[0] == 1,
        2 => two_part[0] == 2,
        _ => two_part[0] <= 2,
    };
    let caps_respected = p0_cap
        && two_part[1] <= 4
        && three_part[0] <= 2
        && three_part[1] <= 4
        && three_part[2] <= 4
        && order_2a_with_norm <= 6
        && order_2_with_norm <= 3
        && order_3_with_norm <= 8;
    Ok(CongruenceReport {
        d,
        a: dec.a,
        b: dec.b,
        two_part,
        three_part,
        order_2a_with_norm,
        order_2_with_norm,
        order_3_with_norm,
        caps_respected,
    })
}

pub const DEFAULT_OQL_CAP: u64 = 400;

/// `|O(q)|` by enumerating generator images: each generator `x_i` must go to an
/// element of the same order and norm, pairings must be preserved, and the
/// resulting homomorphism must be onto.
pub fn isometry_count(group: &DiscriminantGroup) -> u64 {
    let r = group.rank();
    if r == 0 {
        return 1;
    }
    let elements: Vec<Vec<u64>> = group.elements().collect();
    let orders: Vec<u64> = elements.iter().map(|c| group.element_order(c)).collect();
    let norms: Vec<Rational64> = elements.iter().map(|c| group.norm(c)).collect();

    let pairing = |x: &[u64], y: &[u64]| -> Rational64 {
        let mut acc = Rational64::zero();
        for i in 0..r {
            for j in 0..r {
                if x[i] != 0 && y[j] != 0 {
                    acc += group.bilinear(i, j) * (x[i] * y[j]) as i64;
                }
            }
        }
        reduce_mod(acc, 1)
    };

    let candidates: Vec<Vec<usize>> = (0..r)
        .map(|i| {
            (0..elements.len())
                .filter(|&e| orders[e] == group.cyclic_orders[i] && norms[e] == group.generator_norms[i])
                .collect()
        })
        .collect();

    let index_of = |c: &[u64]| -> usize {
        let mut idx = 0u64;
        for (k, &s) in group.cyclic_orders.iter().enumerate().rev() {
            idx = idx * s + c[k];
        }
        idx as usize
    };

    let mut count = 0u64;
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    fn recurse(
        i: usize,
        chosen: &mut Vec<usize>,
        count: &mut u64,
        ctx: &dyn Fn(&[usize], usize) -> bool,
        candidates: &[Vec<usize>],
        onto: &dyn Fn(&[usize]) -> bool,
    ) {
        if i == candidates.len() {
            if onto(chosen) {
                *count += 1;
            }
            return;
        }
        for &c in &candidates[i] {
            if ctx(chosen, c) {
                chosen.push(c);
                recurse(i + 1, chosen, count, ctx, candidates, onto);
                chosen.pop();
            }
        }
    }
    let compatible = |prev: &[usize], c: usize| -> bool {
        let i = prev.len();
        prev.iter()
            .enumerate()
            .all(|(j, &p)| pairing(&elements[p], &elements[c]) == group.bilinear(j, i))
    };
    let onto = |images: &[usize]| -> bool {
        let mut seen = vec![false; elements.len()];
        for c in &elements {
            let mut img = vec![0u64; r];
            for (k, &ck) in c.iter().enumerate() {
                let y = &elements[images[k]];
                for t in 0..r {
                    img[t] = (img[t] + ck * y[t]) % group.cyclic_orders[t];
                }
            }
            let idx = index_of(&img);
            if seen[idx] {
                return false;
            }
            seen[idx] = true;
        }
        true
    };
    recurse(0, &mut chosen, &mut count, &compatible, &candidates, &onto);
    count
}

/// Exact `|O(q_L)|` for the Kummer lattice, by automorphism enumeration.
pub fn oql_order_oracle(d: u64, cap: u64) -> Result<u64, LatticeError> {
    let order = 12 * d;
    if order > cap {
        return Err(LatticeError::CapExceeded { order, cap });
    }
    let group = discriminant_group(&kummer_lattice(d)?)?;
    Ok(isometry_count(&group))
}

pub type Block = [[i64; 2]; 2];

/// Type `(a, e)` normal form of the Gram matrix of a rank-2 isotropic
/// sublattice: `A = diag(a, ae)`, `B` negative definite, `D` reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicNormalForm {
    pub a: i64,
    pub e: i64,
    pub b: Block,
    pub d: Block,
}

impl IsotropicNormalForm {
    pub fn new(a: i64, e: i64, b: Block, d: Block) -> Result<Self, LatticeError> {
        if a < 1 || e < 1 {
            return Err(LatticeError::BadTypeParameters);
        }
        if b[0][1] != b[1][0] || d[0][1] != d[1][0] {
            return Err(LatticeError::AsymmetricBlock);
        }
        let red = reduce_d_block(d, a, e)?;
        Ok(IsotropicNormalForm { a, e, b, d: red.reduced })
    }

    pub fn a_block(&self) -> Block {
        [[self.a, 0], [0, self.a * self.e]]
    }

    pub fn b_is_negative_definite(&self) -> bool {
        self.b[0][0] < 0 && self.b[0][0] * self.b[1][1] - self.b[0][1] * self.b[1][0] > 0
    }

    /// The 6×6 Gram matrix `[[0,0,A],[0,B,0],[A,0,D]]`.
    pub fn gram(&self) -> GramMatrix {
        gram_from_blocks(self.a_block(), self.b, self.d)
    }
}

pub fn gram_from_blocks(a: Block, b: Block, d: Block) -> GramMatrix {
    let mut m = vec![vec![0i64; 6]; 6];
    for i in 0..2 {
        for j in 0..2 {
            m[i][4 + j] = a[i][j];
            m[4 + i][j] = a[j][i];
            m[2 + i][2 + j] = b[i][j];
            m[4 + i][4 + j] = d[i][j];
        }
    }
    GramMatrix { entries: m }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DBlockReduction {
    pub reduced: Block,
    pub w: Block,
}

/// Change of basis `[[I,0,W],[0,I,0],[0,0,I]]` sends `D` to `D + ᵀWA + ᵀAW`,
/// which with `W = [[w,x],[y,z]]` adds `2aw` to `D₁₁`, `a(x + ey)` to `D₁₂`
/// and `2ae·z` to `D₂₂`. The reduced block has `D₁₁ ∈ [0, 2a)`,
/// `D₁₂ ∈ [0, a)`, `D₂₂ ∈ [0, 2ae)`; `W` uses `y = 0`.
pub fn reduce_d_block(d: Block, a: i64, e: i64) -> Result<DBlockReduction, LatticeError> {
    if a < 1 || e < 1 {
        return Err(LatticeError::BadTypeParameters);
    }
    if d[0][1] != d[1][0] {
        return Err(LatticeError::AsymmetricBlock);
    }
    let w11 = -d[0][0].div_euclid(2 * a);
    let w12 = -d[0][1].div_euclid(a);
    let w22 = -d[1][1].div_euclid(2 * a * e);
    let w = [[w11, w12], [0, w22]];
    let shift = wa_plus_aw(&w, a, e);
    let reduced = [
        [d[0][0] + shift[0][0], d[0][1] + shift[0][1]],
        [d[1][0] + shift[1][0], d[1][1] + shift[1][1]],
    ];
    Ok(DBlockReduction { reduced, w })
}

/// `ᵀWA + ᵀAW` for `A = diag(a, ae)`.
pub fn wa_plus_aw(w: &Block, a: i64, e: i64) -> Block {
    let am = [[a, 0], [0, a * e]];
    let wt_a = mul2(&transpose2(w), &am);
    let at_w = mul2(&transpose2(&am), w);
    add2(&wt_a, &at_w)
}

/// Number of reduced `D` blocks of type `(a, e)`: `(2a)·a·(2ae) = 4a³e`.
pub fn d_block_class_count(a: i64, e: i64) -> i64 {
    4 * a * a * a * e
}

fn transpose2(m: &Block) -> Block {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

fn mul2(x: &Block, y: &Block) -> Block {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn add2(x: &Block, y: &Block) -> Block {
    [[x[0][0] + y[0][0], x[0][1] + y[0][1]], [x[1][0] + y[1][0], x[1][1] + y[1][1]]]
}

pub fn det2(m: &Block) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `Z ≡ [[1, *], [0, 1]] (mod n)` with `det Z = 1`.
pub fn in_gamma1(z: &Block, n: i64) -> bool {
    det2(z) == 1
        && (z[0][0] - 1).rem_euclid(n) == 0
        && z[1][0].rem_euclid(n) == 0
        && (z[1][1] - 1).rem_euclid(n) == 0
}

/// `Z ≡ I (mod n)` with `det Z = 1`.
pub fn in_principal_congruence(z: &Block, n: i64) -> bool {
    in_gamma1(z, n) && z[0][1].rem_euclid(n) == 0
}

pub type Mat6 = [[i64; 6]; 6];

/// `g_Z = [[U, 0, UW], [0, I, 0], [0, 0, Z]]` on the basis of
/// `[[0,0,A],[0,B,0],[A,0,D]]`, with `U = ᵀ(A Z⁻¹ A⁻¹)` and `W` the
/// minimal integral solution of `ᵀWA + ᵀAW + ᵀZDZ = D`.
///
/// `U` is integral only when `e | z₁₂`, and `W` needs the right-hand side to be
/// divisible entrywise by `(2a, a, 2ae)`; both are checked and reported as
/// [`LatticeError::NotIntegral`].
pub fn build_gz(z: &Block, a: i64, e: i64, d: &Block) -> Result<Mat6, LatticeError> {
    if a < 1 || e < 1 {
        return Err(LatticeError::BadTypeParameters);
    }
    if d[0][1] != d[1][0] {
        return Err(LatticeError::AsymmetricBlock);
    }
    if det2(z) != 1 {
        return Err(LatticeError::NotSpecialLinear);
    }
    let n = a * e;
    if !in_gamma1(z, n) {
        return Err(LatticeError::NotInGamma1(n));
    }
    // Z⁻¹ = [[z22, -z12], [-z21, z11]]; A Z⁻¹ A⁻¹ scales (1,2) by 1/e and (2,1) by e
    if z[0][1] % e != 0 {
        return Err(LatticeError::NotIntegral("U"));
    }
    let conj = [[z[1][1], -z[0][1] / e], [-z[1][0] * e, z[0][0]]];
    let u = transpose2(&conj);

    let ztdz = mul2(&mul2(&transpose2(z), d), z);
    let rhs = [
        [d[0][0] - ztdz[0][0], d[0][1] - ztdz[0][1]],
        [d[1][0] - ztdz[1][0], d[1][1] - ztdz[1][1]],
    ];
    if rhs[0][0] % (2 * a) != 0 || rhs[0][1] % a != 0 || rhs[1][1] % (2 * a * e) != 0 {
        return Err(LatticeError::NotIntegral("W"));
    }
    // ᵀWA + ᵀAW = [[2a w11, a(w12 + e w21)], [.., 2ae w22]]; take w21 = 0
    let w = [[rhs[0][0] / (2 * a), rhs[0][1] / a], [0, rhs[1][1] / (2 * a * e)]];
    debug_assert_eq!(wa_plus_aw(&w, a, e), rhs);
    let uw = mul2(&u, &w);

    let mut g = [[0i64; 6]; 6];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = u[i][j];
            g[i][4 + j] = uw[i][j];
            g[4 + i][4 + j] = z[i][j];
        }
        g[2 + i][2 + i] = 1;
    }
    Ok(g)
}

/// `ᵀg Q g` in 128-bit arithmetic.
pub fn congruence_transform(g: &Mat6, q: &GramMatrix) -> [[i128; 6]; 6] {
    let mut qg = [[0i128; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            qg[i][j] = (0..6).map(|k| q.entry(i, k) as i128 * g[k][j] as i128).sum();
        }
    }
    let mut out = [[0i128; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = (0..6).map(|k| g[k][i] as i128 * qg[k][j]).sum();
        }
    }
    out
}

pub fn preserves_form(g: &Mat6, q: &GramMatrix) -> bool {
    let t = congruence_transform(g, q);
    (0..6).all(|i| (0..6).all(|j| t[i][j] == q.entry(i, j) as i128))
}

fn block_of<T: Copy>(m: &[[T; 6]; 6], bi: usize, bj: usize) -> [[T; 2]; 2] {
    [
        [m[2 * bi][2 * bj], m[2 * bi][2 * bj + 1]],
        [m[2 * bi + 1][2 * bj], m[2 * bi + 1][2 * bj + 1]],
    ]
}

type Wide = [[i128; 2]; 2];

fn widen(b: &Block) -> Wide {
    [[b[0][0] as i128, b[0][1] as i128], [b[1][0] as i128, b[1][1] as i128]]
}

fn wt(m: &Wide) -> Wide {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

fn wmul(x: &Wide, y: &Wide) -> Wide {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn wadd(x: &Wide, y: &Wide) -> Wide {
    [[x[0][0] + y[0][0], x[0][1] + y[0][1]], [x[1][0] + y[1][0], x[1][1] + y[1][1]]]
}

/// Membership of `g = [[U,V,W],[0,X,Y],[0,0,Z]]` in the stabiliser `N(E)` of
/// `E = ⟨e₁, e₂⟩` for `Q = [[0,0,A],[0,B,0],[A,0,D]]`:
///
/// `ᵀUAZ = A`, `ᵀXBX = B`, `ᵀXBY + ᵀVAZ = 0`,
/// `ᵀYBY + ᵀZAW + ᵀWAZ + ᵀZDZ = D`, `det U > 0`.
///
/// With `D = 0` these are the usual conditions for the form `[[0,0,A],[0,B,0],[A,0,0]]`.
pub fn is_in_ne(g: &Mat6, q: &GramMatrix) -> Result<bool, LatticeError> {
    if q.dim() != 6 {
        return Err(LatticeError::WrongShape);
    }
    let mut qm = [[0i64; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            qm[i][j] = q.entry(i, j);
        }
    }
    let zero = [[0i64; 2]; 2];
    for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 2), (2, 1)] {
        if block_of(&qm, bi, bj) != zero {
            return Err(LatticeError::WrongShape);
        }
    }
    for (bi, bj) in [(1, 0), (2, 0), (2, 1)] {
        if block_of(g, bi, bj) != zero {
            return Err(LatticeError::WrongShape);
        }
    }
    let a = widen(&block_of(&qm, 0, 2));
    let b = widen(&block_of(&qm, 1, 1));
    let d = widen(&block_of(&qm, 2, 2));
    let u = widen(&block_of(g, 0, 0));
    let v = widen(&block_of(g, 0, 1));
    let w = widen(&block_of(g, 0, 2));
    let x = widen(&block_of(g, 1, 1));
    let y = widen(&block_of(g, 1, 2));
    let z = widen(&block_of(g, 2, 2));
    let zero = [[0i128; 2]; 2];

    let c1 = wmul(&wmul(&wt(&u), &a), &z) == a;
    let c2 = wmul(&wmul(&wt(&x), &b), &x) == b;
    let c3 = wadd(&wmul(&wmul(&wt(&x), &b), &y), &wmul(&wmul(&wt(&v), &a), &z)) == zero;
    let lhs4 = wadd(
        &wadd(&wmul(&wmul(&wt(&y), &b), &y), &wmul(&wmul(&wt(&z), &a), &w)),
        &wadd(&wmul(&wmul(&wt(&w), &a), &z), &wmul(&wmul(&wt(&z), &d), &z)),
    );
    let c4 = lhs4 == d;
    let c5 = u[0][0] * u[1][1] - u[0][1] * u[1][0] > 0;
    Ok(c1 && c2 && c3 && c4 && c5)
}
