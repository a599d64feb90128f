//! Toric geometry for the quotient singularity `1/6(1,1,1,2)`: its
//! resolution fan, divisor arithmetic, restriction to the exceptional orbit
//! closure, lattice-point counting, Ehrhart polynomials, the age criterion,
//! and the dimension bound on the obstruction space.
//!
//! Linear algebra is exact over `BigRational`; user-facing values are
//! converted to `Rational64` or `i64` at the boundary.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::serde_ratio;

type Q = Rational64;
type Bq = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToricError {
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("overlattice generators do not span a full-rank lattice")]
    Degenerate,
    #[error("the given basis does not span the overlattice")]
    NotABasis,
    #[error("vector is not in the lattice")]
    NotInLattice,
    #[error("ray {0} is not primitive")]
    NotPrimitive(String),
    #[error("no ray named {0}")]
    UnknownRay(String),
    #[error("cone {0:?} is not simplicial of full dimension")]
    NonSimplicial(Vec<String>),
    #[error("divisor is not Cartier on cone {0:?}")]
    NotCartier(Vec<String>),
    #[error("divisor has {got} coefficients but the fan has {expected} rays")]
    WrongDivisorLength { expected: usize, got: usize },
    #[error("divisor has coefficient {0} on the ray; move its support first")]
    MeetsOrbit(String),
    #[error("k = {0} does not give an integral bundle")]
    NonIntegralBundle(u64),
    #[error("k must be a positive multiple of 6, got {0}")]
    NotMultipleOfSix(u64),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("Ehrhart interpolation disagrees with the count at dilate {dilate}: {count} vs {predicted}")]
    InterpolationMismatch { dilate: u64, count: u64, predicted: String },
    #[error("exponents must lie in [0, m) and not all vanish")]
    BadExponents,
    #[error("arithmetic overflow")]
    Overflow,
}

fn bq(x: Q) -> Bq {
    Bq::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn bqi(x: i64) -> Bq {
    Bq::from_integer(BigInt::from(x))
}

fn small(x: &Bq) -> Result<Q, ToricError> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Q::new(n, d)),
        _ => Err(ToricError::Overflow),
    }
}

fn small_int(x: &Bq) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
fn solve(mut a: Vec<Vec<Bq>>, mut b: Vec<Bq>) -> Option<Vec<Bq>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn rank(mut a: Vec<Vec<Bq>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for k in c..cols {
                let d = &f * &a[r][k];
                a[i][k] -= d;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

fn determinant(mut a: Vec<Vec<Bq>>) -> Bq {
    let n = a.len();
    let mut det = Bq::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Bq::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
        }
    }
    det
}

fn int_matrix(rows: &[Vec<i64>]) -> Vec<Vec<Bq>> {
    rows.iter().map(|r| r.iter().map(|&x| bqi(x)).collect()).collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `ℤ^rank` with finitely many rational vectors adjoined, together with a
/// chosen `ℤ`-basis of the result.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientLattice {
    rank: usize,
    overlattice_generators: Vec<Vec<Q>>,
    basis: Vec<Vec<Q>>,
}

impl AmbientLattice {
    pub fn standard(rank: usize) -> Self {
        let basis = (0..rank)
            .map(|i| (0..rank).map(|j| Q::from_integer((i == j) as i64)).collect())
            .collect();
        AmbientLattice {
            rank,
            overlattice_generators: Vec::new(),
            basis,
        }
    }

    /// The lattice `⟨ℤ^rank, generators⟩`, with a Hermite-reduced basis.
    pub fn new(rank: usize, generators: Vec<Vec<Q>>) -> Result<Self, ToricError> {
        for g in &generators {
            if g.len() != rank {
                return Err(ToricError::DimensionMismatch {
                    expected: rank,
                    got: g.len(),
                });
            }
        }
        let denom = generators
            .iter()
            .flatten()
            .fold(1i64, |acc, x| acc.lcm(x.denom()));
        let mut rows: Vec<Vec<i64>> = (0..rank)
            .map(|i| (0..rank).map(|j| if i == j { denom } else { 0 }).collect())
            .collect();
        for g in &generators {
            rows.push(g.iter().map(|x| (x * denom).to_integer()).collect());
        }
        let hnf = row_hermite(rows);
        if hnf.len() != rank {
            return Err(ToricError::Degenerate);
        }
        let basis = hnf
            .into_iter()
            .map(|r| r.into_iter().map(|x| Q::new(x, denom)).collect())
            .collect();
        Ok(AmbientLattice {
            rank,
            overlattice_generators: generators,
            basis,
        })
    }

    /// Replaces the basis, checking that `basis` spans the same lattice.
    pub fn with_basis(self, basis: Vec<Vec<Q>>) -> Result<Self, ToricError> {
        if basis.len() != self.rank {
            return Err(ToricError::NotABasis);
        }
        let coords: Vec<Vec<i64>> = basis
            .iter()
            .map(|v| self.coordinates(v))
            .collect::<Result<_, _>>()?;
        let det = determinant(int_matrix(&coords));
        if det.abs() != Bq::one() {
            return Err(ToricError::NotABasis);
        }
        Ok(AmbientLattice { basis, ..self })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.basis
    }

    pub fn overlattice_generators(&self) -> &[Vec<Q>] {
        &self.overlattice_generators
    }

    /// `[overlattice : ℤ^rank]`.
    pub fn index(&self) -> i64 {
        let det = determinant(self.basis.iter().map(|r| r.iter().map(|&x| bq(x)).collect()).collect());
        small(&det.abs().recip()).map(|q| q.to_integer()).unwrap_or(0)
    }

    /// Integer coordinates of `v` on the basis.
    pub fn coordinates(&self, v: &[Q]) -> Result<Vec<i64>, ToricError> {
        if v.len() != self.rank {
            return Err(ToricError::DimensionMismatch {
                expected: self.rank,
                got: v.len(),
            });
        }
        // solve Σ x_i b_i = v, i.e. Bᵀ x = v
        let a: Vec<Vec<Bq>> = (0..self.rank)
            .map(|j| (0..self.rank).map(|i| bq(self.basis[i][j])).collect())
            .collect();
        let x = solve(a, v.iter().map(|&q| bq(q)).collect()).ok_or(ToricError::Degenerate)?;
        x.iter().map(|c| small_int(c).ok_or(ToricError::NotInLattice)).collect()
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.coordinates(v).is_ok()
    }

    /// Ambient rational vector with the given basis coordinates.
    pub fn vector(&self, coords: &[i64]) -> Vec<Q> {
        (0..self.rank)
            .map(|j| {
                coords
                    .iter()
                    .zip(&self.basis)
                    .map(|(&c, b)| b[j] * c)
                    .fold(Q::zero(), |acc, x| acc + x)
            })
            .collect()
    }
}

/// Row-style Hermite reduction; returns the nonzero rows.
fn row_hermite(mut rows: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for c in 0..cols {
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| rows[i][c].abs());
            let p = nz[0];
            for &i in &nz[1..] {
                let q = rows[i][c] / rows[p][c];
                for k in 0..cols {
                    rows[i][k] -= q * rows[p][k];
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][c] != 0) {
            let mut r = rows.swap_remove(i);
            if r[c] < 0 {
                r.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(r);
        }
    }
    out
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// A fan given by integer ray coordinates on the basis of its lattice, and
/// maximal cones as lists of ray indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Fan {
    lattice: AmbientLattice,
    labels: Vec<String>,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Rays given as ambient rational vectors; each must be primitive in the lattice.
    pub fn new(
        lattice: AmbientLattice,
        labels: Vec<String>,
        rays: &[Vec<Q>],
        cones: Vec<Vec<usize>>,
    ) -> Result<Self, ToricError> {
        let coords = rays
            .iter()
            .map(|r| lattice.coordinates(r))
            .collect::<Result<Vec<_>, _>>()?;
        Fan::from_coordinates(lattice, labels, coords, cones)
    }

    pub fn from_coordinates(
        lattice: AmbientLattice,
        labels: Vec<String>,
        rays: Vec<Vec<i64>>,
        cones: Vec<Vec<usize>>,
    ) -> Result<Self, ToricError> {
        for (r, l) in rays.iter().zip(&labels) {
            if r.len() != lattice.rank() {
                return Err(ToricError::DimensionMismatch {
                    expected: lattice.rank(),
                    got: r.len(),
                });
            }
            if gcd_all(r) != 1 {
                return Err(ToricError::NotPrimitive(l.clone()));
            }
        }
        Ok(Fan {
            lattice,
            labels,
            rays,
            cones,
        })
    }

    pub fn lattice(&self) -> &AmbientLattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn ray_index(&self, label: &str) -> Result<usize, ToricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ToricError::UnknownRay(label.to_string()))
    }

    pub fn ambient_ray(&self, i: usize) -> Vec<Q> {
        self.lattice.vector(&self.rays[i])
    }

    fn cone_labels(&self, cone: &[usize]) -> Vec<String> {
        cone.iter().map(|&i| self.labels[i].clone()).collect()
    }

    /// Coordinates of `v` (basis coordinates, rational) on the rays of a
    /// simplicial cone.
    fn cone_coordinates(&self, cone: &[usize], v: &[Bq]) -> Result<Vec<Bq>, ToricError> {
        if cone.len() != self.rank() {
            return Err(ToricError::NonSimplicial(self.cone_labels(cone)));
        }
        let a: Vec<Vec<Bq>> = (0..self.rank())
            .map(|j| cone.iter().map(|&r| bqi(self.rays[r][j])).collect())
            .collect();
        solve(a, v.to_vec()).ok_or_else(|| ToricError::NonSimplicial(self.cone_labels(cone)))
    }

    /// Whether the point lies in the (closed) maximal cone.
    pub fn cone_contains(&self, cone: &[usize], v: &[Q]) -> Result<bool, ToricError> {
        let x = self.cone_coordinates(cone, &v.iter().map(|&q| bq(q)).collect::<Vec<_>>())?;
        Ok(x.iter().all(|c| !c.is_negative()))
    }
}

fn e(i: usize) -> Vec<Q> {
    (0..4).map(|j| Q::from_integer((i == j) as i64)).collect()
}

fn q4(num: [i64; 4], den: i64) -> Vec<Q> {
    num.iter().map(|&x| Q::new(x, den)).collect()
}

/// `N̄ = ⟨ℤ⁴, (1/6)(1,1,1,2)⟩` with basis `(v₆, e₂, e₃, e₄)`.
pub fn kummer_lattice() -> AmbientLattice {
    let v6 = q4([1, 1, 1, 2], 6);
    AmbientLattice::new(4, vec![v6.clone()])
        .and_then(|l| l.with_basis(vec![v6, e(1), e(2), e(3)]))
        .expect("v6, e2, e3, e4 is a basis of the overlattice")
}

fn kummer_ray_vectors() -> Vec<Vec<Q>> {
    vec![e(0), e(1), e(2), e(3), q4([1, 1, 1, 0], 2), q4([1, 1, 1, 2], 6)]
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("v{i}")).collect()
}

/// The subdivision of `σ = ⟨e₁, …, e₄⟩` by `v₅ = (1/2)(1,1,1,0)` and
/// `v₆ = (1/6)(1,1,1,2)`.
pub fn kummer_resolution_fan() -> Fan {
    let cones = vec![
        vec![0, 1, 3, 5],
        vec![0, 1, 4, 5],
        vec![0, 2, 3, 5],
        vec![0, 2, 4, 5],
        vec![1, 2, 3, 5],
        vec![1, 2, 4, 5],
    ];
    Fan::new(kummer_lattice(), labels(6), &kummer_ray_vectors(), cones).expect("rays lie in N̄")
}

/// The unresolved cone `σ` as a one-cone fan on the same lattice.
pub fn kummer_cone() -> Fan {
    let rays: Vec<Vec<Q>> = (0..4).map(e).collect();
    Fan::new(kummer_lattice(), labels(4), &rays, vec![vec![0, 1, 2, 3]]).expect("e_i lie in N̄")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSmoothness {
    pub cone: Vec<String>,
    pub determinant: i64,
    pub smooth: bool,
}

/// A maximal cone is smooth when its rays form a basis of the lattice.
pub fn verify_smooth(fan: &Fan) -> Result<Vec<ConeSmoothness>, ToricError> {
    fan.cones
        .iter()
        .map(|cone| {
            let labels = fan.cone_labels(cone);
            if cone.len() != fan.rank() {
                return Err(ToricError::NonSimplicial(labels));
            }
            let m: Vec<Vec<i64>> = cone.iter().map(|&r| fan.rays[r].clone()).collect();
            let det = small_int(&determinant(int_matrix(&m))).ok_or(ToricError::Overflow)?;
            if det == 0 {
                return Err(ToricError::NonSimplicial(labels));
            }
            Ok(ConeSmoothness {
                cone: labels,
                determinant: det,
                smooth: det.abs() == 1,
            })
        })
        .collect()
}

/// Unimodular `U` with `U v = (1, 0, …, 0)` for a primitive integer vector.
pub fn completing_transform(v: &[i64]) -> Option<Vec<Vec<i64>>> {
    let n = v.len();
    let mut w = v.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| w[i] != 0).collect();
        let &p = nz.iter().min_by_key(|&&i| w[i].abs())?;
        if nz.len() == 1 {
            w.swap(0, p);
            u.swap(0, p);
            if w[0] == -1 {
                w[0] = 1;
                u[0].iter_mut().for_each(|x| *x = -*x);
            }
            return (w[0] == 1).then_some(u);
        }
        for &i in &nz {
            if i == p {
                continue;
            }
            let q = w[i] / w[p];
            w[i] -= q * w[p];
            for k in 0..n {
                u[i][k] -= q * u[p][k];
            }
        }
    }
}

fn inverse_int(u: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, ToricError> {
    let n = u.len();
    let a = int_matrix(u);
    let cols: Vec<Vec<Bq>> = (0..n)
        .map(|j| {
            let b: Vec<Bq> = (0..n).map(|i| bqi((i == j) as i64)).collect();
            solve(a.clone(), b).ok_or(ToricError::Degenerate)
        })
        .collect::<Result<_, _>>()?;
    (0..n)
        .map(|i| (0..n).map(|j| small_int(&cols[j][i]).ok_or(ToricError::Overflow)).collect())
        .collect()
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `Star_Σ(v)` in `N̄/⟨v⟩`, with quotient coordinates obtained by dropping the
/// first coordinate after the completing transform of `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarFan {
    pub fan: Fan,
    pub center: usize,
    /// index in the original fan of each star ray
    pub source_rays: Vec<usize>,
    pub transform: Vec<Vec<i64>>,
}

pub fn star_fan(fan: &Fan, center: usize) -> Result<StarFan, ToricError> {
    if center >= fan.rays.len() {
        return Err(ToricError::UnknownRay(format!("#{center}")));
    }
    let u = completing_transform(&fan.rays[center])
        .ok_or_else(|| ToricError::NotPrimitive(fan.labels[center].clone()))?;
    let mut source_rays: Vec<usize> = fan
        .cones
        .iter()
        .filter(|c| c.contains(&center))
        .flatten()
        .copied()
        .filter(|&r| r != center)
        .collect();
    source_rays.sort_unstable();
    source_rays.dedup();
    let images: Vec<Vec<i64>> = source_rays
        .iter()
        .map(|&r| {
            let x = mat_vec(&u, &fan.rays[r]);
            let img = x[1..].to_vec();
            let g = gcd_all(&img);
            img.into_iter().map(|c| c / g.max(1)).collect()
        })
        .collect();
    let cones = fan
        .cones
        .iter()
        .filter(|c| c.contains(&center))
        .map(|c| {
            c.iter()
                .filter(|&&r| r != center)
                .map(|r| source_rays.iter().position(|s| s == r).expect("collected above"))
                .collect()
        })
        .collect();
    let labels = source_rays.iter().map(|&r| fan.labels[r].clone()).collect();
    let star = Fan::from_coordinates(AmbientLattice::standard(fan.rank() - 1), labels, images, cones)?;
    Ok(StarFan {
        fan: star,
        center,
        source_rays,
        transform: u,
    })
}

/// `Σ a_v E_v`, indexed like the rays of its fan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusInvariantDivisor {
    #[serde(with = "serde_ratio::vec")]
    pub coefficients: Vec<Q>,
}

impl TorusInvariantDivisor {
    pub fn zero(n: usize) -> Self {
        TorusInvariantDivisor {
            coefficients: vec![Q::zero(); n],
        }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        TorusInvariantDivisor {
            coefficients: coeffs.iter().map(|&c| Q::from_integer(c)).collect(),
        }
    }

    /// `E_i`.
    pub fn prime(n: usize, i: usize) -> Self {
        let mut d = Self::zero(n);
        d.coefficients[i] = Q::one();
        d
    }

    /// `K = −Σ E_v`.
    pub fn canonical(n: usize) -> Self {
        TorusInvariantDivisor {
            coefficients: vec![-Q::one(); n],
        }
    }

    pub fn scaled(&self, k: Q) -> Self {
        TorusInvariantDivisor {
            coefficients: self.coefficients.iter().map(|&c| c * k).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        TorusInvariantDivisor {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Coefficients as integers, when they all are.
    pub fn integral(&self) -> Option<Vec<i64>> {
        self.coefficients
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    fn check_len(&self, fan: &Fan) -> Result<(), ToricError> {
        if self.coefficients.len() != fan.rays.len() {
            return Err(ToricError::WrongDivisorLength {
                expected: fan.rays.len(),
                got: self.coefficients.len(),
            });
        }
        Ok(())
    }
}

/// Local data of a divisor on one maximal cone, on the dual of the lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartierEntry {
    pub cone: Vec<String>,
    pub m: Vec<i64>,
}

/// For each maximal cone `δ`, the unique `m(δ)` with `⟨m(δ), v⟩ = a_v` for
/// every ray `v` of `δ`.
pub fn cartier_data(divisor: &TorusInvariantDivisor, fan: &Fan) -> Result<Vec<CartierEntry>, ToricError> {
    divisor.check_len(fan)?;
    fan.cones
        .iter()
        .map(|cone| {
            let labels = fan.cone_labels(cone);
            if cone.len() != fan.rank() {
                return Err(ToricError::NonSimplicial(labels));
            }
            let a: Vec<Vec<Bq>> = cone
                .iter()
                .map(|&r| fan.rays[r].iter().map(|&x| bqi(x)).collect())
                .collect();
            let b: Vec<Bq> = cone.iter().map(|&r| bq(divisor.coefficients[r])).collect();
            let m = solve(a, b).ok_or_else(|| ToricError::NonSimplicial(labels.clone()))?;
            let m = m
                .iter()
                .map(small_int)
                .collect::<Option<Vec<_>>>()
                .ok_or(ToricError::NotCartier(labels.clone()))?;
            Ok(CartierEntry { cone: labels, m })
        })
        .collect()
}

/// `div(χ^m) = Σ ⟨m, v⟩ E_v`.
pub fn principal_divisor(m: &[i64], fan: &Fan) -> TorusInvariantDivisor {
    TorusInvariantDivisor {
        coefficients: fan
            .rays
            .iter()
            .map(|r| Q::from_integer(r.iter().zip(m).map(|(a, b)| a * b).sum()))
            .collect(),
    }
}

/// `D + div(χ^m)` with `m = −a_v · u₁`, where `u₁` is the first row of the
/// completing transform of `v`; the result has coefficient 0 on `v`.
pub fn move_support_off(
    divisor: &TorusInvariantDivisor,
    fan: &Fan,
    ray: usize,
) -> Result<(TorusInvariantDivisor, Vec<i64>), ToricError> {
    divisor.check_len(fan)?;
    let u = completing_transform(&fan.rays[ray]).ok_or_else(|| ToricError::NotPrimitive(fan.labels[ray].clone()))?;
    let c = divisor.coefficients[ray];
    if !c.is_integer() {
        return Err(ToricError::NotCartier(vec![fan.labels[ray].clone()]));
    }
    let m: Vec<i64> = u[0].iter().map(|&x| -c.to_integer() * x).collect();
    Ok((divisor.plus(&principal_divisor(&m, fan)), m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartierImage {
    pub cone: Vec<String>,
    pub m: Vec<i64>,
    pub image: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub star: StarFan,
    pub divisor: TorusInvariantDivisor,
    pub images: Vec<CartierImage>,
}

/// `D|_{V(v)}` for a divisor whose support misses `V(v)`: each `m(δ)` with
/// `v ∈ δ` vanishes on `v`, so it descends to the quotient dual, and the
/// coefficient of a star ray `v̄` is read off any such image.
pub fn restrict_to_orbit_closure(
    divisor: &TorusInvariantDivisor,
    fan: &Fan,
    ray: usize,
) -> Result<Restriction, ToricError> {
    divisor.check_len(fan)?;
    if !divisor.coefficients[ray].is_zero() {
        return Err(ToricError::MeetsOrbit(divisor.coefficients[ray].to_string()));
    }
    let star = star_fan(fan, ray)?;
    let u_inv = inverse_int(&star.transform)?;
    let data = cartier_data(divisor, fan)?;
    let mut images = Vec::new();
    for (cone, entry) in fan.cones.iter().zip(data) {
        if !cone.contains(&ray) {
            continue;
        }
        // pairing ⟨m, x⟩ = ⟨m U⁻¹, U x⟩
        let moved: Vec<i64> = (0..fan.rank())
            .map(|j| entry.m.iter().zip(&u_inv).map(|(a, row)| a * row[j]).sum())
            .collect();
        debug_assert_eq!(moved[0], 0);
        images.push((cone.clone(), CartierImage {
            cone: entry.cone,
            m: entry.m,
            image: moved[1..].to_vec(),
        }));
    }
    let mut coefficients = Vec::with_capacity(star.source_rays.len());
    for (j, &src) in star.source_rays.iter().enumerate() {
        let (_, img) = images
            .iter()
            .find(|(c, _)| c.contains(&src))
            .expect("every star ray lies in a cone through the center");
        let value: i64 = img.image.iter().zip(&star.fan.rays[j]).map(|(a, b)| a * b).sum();
        coefficients.push(Q::from_integer(value));
    }
    Ok(Restriction {
        star,
        divisor: TorusInvariantDivisor { coefficients },
        images: images.into_iter().map(|(_, i)| i).collect(),
    })
}

/// The bundle through which invariant `k`-canonical forms on the cover pull back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDivisor {
    pub k: u64,
    pub divisor: TorusInvariantDivisor,
    /// coefficients of `divisor − kK`
    pub excess: TorusInvariantDivisor,
}

/// A ray `v = Σ λ_i e_i` gives `ord_{E_v} = Σ λ_i ord_{z_i}`, so the log form
/// `(dz/z)^k` picks up `−k Σλ_i(v)` along `E_v`: relative to `kK` the
/// coefficient is `k(1 − Σλ_i(v))`.
pub fn form_bundle_divisor(k: u64, fan: &Fan) -> Result<BundleDivisor, ToricError> {
    if k == 0 || k % 6 != 0 {
        return Err(ToricError::NotMultipleOfSix(k));
    }
    let kq = Q::from_integer(k as i64);
    let lambda: Vec<Q> = (0..fan.rays.len())
        .map(|i| fan.ambient_ray(i).into_iter().fold(Q::zero(), |a, b| a + b))
        .collect();
    let divisor = TorusInvariantDivisor {
        coefficients: lambda.iter().map(|&l| -kq * l).collect(),
    };
    if divisor.integral().is_none() {
        return Err(ToricError::NonIntegralBundle(k));
    }
    let excess = TorusInvariantDivisor {
        coefficients: lambda.iter().map(|&l| kq * (Q::one() - l)).collect(),
    };
    Ok(BundleDivisor { k, divisor, excess })
}

/// `⟨normal, u⟩ ≥ offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub normal: Vec<i64>,
    #[serde(with = "serde_ratio")]
    pub offset: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePolytope {
    pub dim: usize,
    pub inequalities: Vec<Inequality>,
}

/// `P_D = {u : ⟨u, v⟩ ≥ −a_v for every ray v}`.
pub fn divisor_polytope(divisor: &TorusInvariantDivisor, fan: &Fan) -> Result<LatticePolytope, ToricError> {
    divisor.check_len(fan)?;
    Ok(LatticePolytope {
        dim: fan.rank(),
        inequalities: fan
            .rays
            .iter()
            .zip(&divisor.coefficients)
            .map(|(r, &c)| Inequality {
                normal: r.clone(),
                offset: -c,
            })
            .collect(),
    })
}

impl LatticePolytope {
    pub fn new(dim: usize, inequalities: Vec<Inequality>) -> Result<Self, ToricError> {
        for i in &inequalities {
            if i.normal.len() != dim {
                return Err(ToricError::DimensionMismatch {
                    expected: dim,
                    got: i.normal.len(),
                });
            }
        }
        Ok(LatticePolytope { dim, inequalities })
    }

    pub fn dilate(&self, k: i64) -> Self {
        LatticePolytope {
            dim: self.dim,
            inequalities: self
                .inequalities
                .iter()
                .map(|i| Inequality {
                    normal: i.normal.clone(),
                    offset: i.offset * k,
                })
                .collect(),
        }
    }

    fn normals_rank(&self) -> usize {
        rank(self.inequalities.iter().map(|i| i.normal.iter().map(|&x| bqi(x)).collect()).collect())
    }

    fn satisfies(&self, u: &[Bq]) -> bool {
        self.inequalities.iter().all(|i| {
            let s: Bq = i.normal.iter().zip(u).map(|(&a, x)| bqi(a) * x).sum();
            s >= bq(i.offset)
        })
    }

    /// Vertices, each the unique solution of `dim` tight inequalities.
    pub fn vertices(&self) -> Result<Vec<Vec<Q>>, ToricError> {
        let mut out: Vec<Vec<Bq>> = Vec::new();
        for subset in combinations(self.inequalities.len(), self.dim) {
            let a: Vec<Vec<Bq>> = subset
                .iter()
                .map(|&i| self.inequalities[i].normal.iter().map(|&x| bqi(x)).collect())
                .collect();
            let b: Vec<Bq> = subset.iter().map(|&i| bq(self.inequalities[i].offset)).collect();
            if let Some(x) = solve(a, b) {
                if self.satisfies(&x) && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort();
        out.iter().map(|v| v.iter().map(small).collect()).collect()
    }

    /// Bounded iff the recession cone `{x : ⟨normal, x⟩ ≥ 0}` is zero. With
    /// full-rank normals that cone is pointed, and it is nonzero exactly when
    /// one of its candidate extreme rays (kernels of `dim − 1` normals) is feasible.
    pub fn is_bounded(&self) -> bool {
        if self.dim == 0 {
            return true;
        }
        if self.normals_rank() < self.dim {
            return false;
        }
        let feasible = |x: &[Bq]| {
            self.inequalities.iter().all(|i| {
                let s: Bq = i.normal.iter().zip(x).map(|(&a, y)| bqi(a) * y).sum();
                !s.is_negative()
            })
        };
        for subset in combinations(self.inequalities.len(), self.dim - 1) {
            let rows: Vec<Vec<Bq>> = subset
                .iter()
                .map(|&i| self.inequalities[i].normal.iter().map(|&x| bqi(x)).collect())
                .collect();
            if let Some(dir) = kernel_vector(&rows, self.dim) {
                let neg: Vec<Bq> = dir.iter().map(|x| -x).collect();
                if feasible(&dir) || feasible(&neg) {
                    return false;
                }
            }
        }
        true
    }

    /// Empty iff no vertex exists (valid for pointed polyhedra).
    pub fn is_empty(&self) -> Result<bool, ToricError> {
        if self.normals_rank() < self.dim {
            return Err(ToricError::Unbounded);
        }
        Ok(self.vertices()?.is_empty())
    }

    /// Number of integer points, by scanning the vertex bounding box in all
    /// but the last coordinate and solving for the last coordinate's range.
    pub fn count_lattice_points(&self) -> Result<u64, ToricError> {
        if !self.is_bounded() {
            return Err(ToricError::Unbounded);
        }
        let verts = self.vertices()?;
        if verts.is_empty() {
            return Ok(0);
        }
        let n = self.dim;
        if n == 0 {
            return Ok(1);
        }
        let lo: Vec<i64> = (0..n)
            .map(|j| verts.iter().map(|v| v[j].ceil().to_integer()).min().unwrap())
            .collect();
        let hi: Vec<i64> = (0..n)
            .map(|j| verts.iter().map(|v| v[j].floor().to_integer()).max().unwrap())
            .collect();
        // ⟨a, u⟩ is an integer, so ⟨a, u⟩ ≥ offset iff ⟨a, u⟩ ≥ ⌈offset⌉
        let thresholds: Vec<i64> = self.inequalities.iter().map(|i| i.offset.ceil().to_integer()).collect();
        let last = n - 1;
        let mut u = lo.clone();
        if (0..last).any(|j| lo[j] > hi[j]) {
            return Ok(0);
        }
        let mut total = 0u64;
        loop {
            let (mut low, mut high) = (lo[last], hi[last]);
            let mut ok = true;
            for (ineq, &t) in self.inequalities.iter().zip(&thresholds) {
                let s: i64 = (0..last).map(|j| ineq.normal[j] * u[j]).sum();
                let a = ineq.normal[last];
                let rhs = t - s;
                if a > 0 {
                    low = low.max(-Integer::div_floor(&-rhs, &a));
                } else if a < 0 {
                    high = high.min(Integer::div_floor(&rhs, &a));
                } else if rhs > 0 {
                    ok = false;
                    break;
                }
            }
            if ok && high >= low {
                total += (high - low + 1) as u64;
            }
            // odometer over the outer coordinates
            let mut j = 0;
            loop {
                if j == last {
                    return Ok(total);
                }
                if u[j] < hi[j] {
                    u[j] += 1;
                    break;
                }
                u[j] = lo[j];
                j += 1;
            }
        }
    }

    /// Interpolates the counts of dilates `0..=degree` and checks the
    /// polynomial against two further dilates.
    pub fn ehrhart(&self, degree: usize) -> Result<EhrhartPolynomial, ToricError> {
        if !self.is_bounded() {
            return Err(ToricError::Unbounded);
        }
        let counts: Vec<u64> = (0..=degree as i64 + 2)
            .map(|k| self.dilate(k).count_lattice_points())
            .collect::<Result<_, _>>()?;
        let n = degree + 1;
        let a: Vec<Vec<Bq>> = (0..n)
            .map(|k| (0..n).map(|p| bqi(k as i64).pow(p as i32)).collect())
            .collect();
        let b: Vec<Bq> = counts[..n].iter().map(|&c| bqi(c as i64)).collect();
        let ascending = solve(a, b).ok_or(ToricError::Degenerate)?;
        let coefficients: Vec<Q> = ascending.iter().rev().map(small).collect::<Result<_, _>>()?;
        let poly = EhrhartPolynomial { coefficients, counts };
        for k in n..n + 2 {
            let predicted = poly.eval(k as i64);
            if predicted != Q::from_integer(poly.counts[k] as i64) {
                return Err(ToricError::InterpolationMismatch {
                    dilate: k as u64,
                    count: poly.counts[k],
                    predicted: predicted.to_string(),
                });
            }
        }
        Ok(poly)
    }
}

/// A nonzero vector orthogonal to the given rows, when their rank is `n − 1`.
fn kernel_vector(rows: &[Vec<Bq>], n: usize) -> Option<Vec<Bq>> {
    if rank(rows.to_vec()) != n - 1 {
        return None;
    }
    // try adding each unit vector as an extra equation ⟨e_j, x⟩ = 1
    for j in 0..n {
        let mut a = rows.to_vec();
        let mut b = vec![Bq::zero(); rows.len()];
        a.push((0..n).map(|i| bqi((i == j) as i64)).collect());
        b.push(Bq::one());
        if let Some(x) = solve(a, b) {
            return Some(x);
        }
    }
    None
}

/// Coefficients leading first, together with the counts used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EhrhartPolynomial {
    #[serde(with = "serde_ratio::vec")]
    pub coefficients: Vec<Q>,
    /// lattice-point counts of the dilates `0, 1, …`
    pub counts: Vec<u64>,
}

impl EhrhartPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, k: i64) -> Q {
        self.coefficients
            .iter()
            .fold(Q::zero(), |acc, &c| acc * k + c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerAge {
    pub power: u64,
    pub exponents: Vec<u64>,
    #[serde(with = "serde_ratio")]
    pub age: Q,
    pub unit_eigenvalues: usize,
    pub quasi_reflection: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReidTaiReport {
    pub exponents: Vec<u64>,
    pub m: u64,
    #[serde(with = "serde_ratio")]
    pub age: Q,
    pub powers: Vec<PowerAge>,
    pub has_unit_eigenvalues: bool,
    pub has_quasi_reflections: bool,
    pub noncanonical: bool,
}

/// `(Σ a_i)/m` for `1/m(a₁, …, a_n)`.
pub fn reid_tai_age(exponents: &[u64], m: u64) -> Result<Q, ToricError> {
    if m == 0 || exponents.iter().all(|&a| a == 0) || exponents.iter().any(|&a| a >= m) {
        return Err(ToricError::BadExponents);
    }
    Ok(Q::new(exponents.iter().sum::<u64>() as i64, m as i64))
}

/// Ages of all nontrivial powers of the generator. The quotient is flagged
/// non-canonical when some power that is not a quasi-reflection has age `< 1`.
pub fn reid_tai(exponents: &[u64], m: u64) -> Result<ReidTaiReport, ToricError> {
    let age = reid_tai_age(exponents, m)?;
    let n = exponents.len();
    let mut powers = Vec::new();
    for j in 1..m {
        let ex: Vec<u64> = exponents.iter().map(|&a| a * j % m).collect();
        if ex.iter().all(|&a| a == 0) {
            continue;
        }
        let unit = ex.iter().filter(|&&a| a == 0).count();
        powers.push(PowerAge {
            power: j,
            age: Q::new(ex.iter().sum::<u64>() as i64, m as i64),
            exponents: ex,
            unit_eigenvalues: unit,
            quasi_reflection: unit + 1 == n,
        });
    }
    let noncanonical = powers.iter().any(|p| !p.quasi_reflection && p.age < Q::one());
    Ok(ReidTaiReport {
        exponents: exponents.to_vec(),
        m,
        age,
        has_unit_eigenvalues: powers.iter().any(|p| p.unit_eigenvalues > 0),
        has_quasi_reflections: powers.iter().any(|p| p.quasi_reflection),
        powers,
        noncanonical,
    })
}

/// The whole chain for `1/6(1,1,1,2)`: `K′`, `E₆′`, their restrictions
/// `Z₁`, `Z₂` to `E₆`, and the polytopes they define.
#[derive(Clone, Debug, PartialEq)]
pub struct KummerToric {
    pub fan: Fan,
    pub k_prime: TorusInvariantDivisor,
    pub e6_prime: TorusInvariantDivisor,
    pub k_prime_cartier: Vec<CartierEntry>,
    pub z1: Restriction,
    pub z2: Restriction,
    pub p_z1: LatticePolytope,
    pub p_z2: LatticePolytope,
}

pub const EXCEPTIONAL_RAY: usize = 5;

impl KummerToric {
    pub fn compute() -> Result<Self, ToricError> {
        let fan = kummer_resolution_fan();
        let n = fan.rays().len();
        let (k_prime, _) = move_support_off(&TorusInvariantDivisor::canonical(n), &fan, EXCEPTIONAL_RAY)?;
        let (e6_prime, _) = move_support_off(&TorusInvariantDivisor::prime(n, EXCEPTIONAL_RAY), &fan, EXCEPTIONAL_RAY)?;
        let k_prime_cartier = cartier_data(&k_prime, &fan)?;
        let z1 = restrict_to_orbit_closure(&k_prime, &fan, EXCEPTIONAL_RAY)?;
        let z2 = restrict_to_orbit_closure(&e6_prime, &fan, EXCEPTIONAL_RAY)?;
        let p_z1 = divisor_polytope(&z1.divisor, &z1.star.fan)?;
        let p_z2 = divisor_polytope(&z2.divisor, &z2.star.fan)?;
        Ok(KummerToric {
            fan,
            k_prime,
            e6_prime,
            k_prime_cartier,
            z1,
            z2,
            p_z1,
            p_z2,
        })
    }

    /// Ehrhart polynomial of `6 P_{Z₁}`.
    pub fn obstruction_ehrhart(&self) -> Result<EhrhartPolynomial, ToricError> {
        self.p_z1.dilate(6).ehrhart(self.p_z1.dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionBound {
    pub k: u64,
    /// `Σ_{a=1}^{k/6} L(6P_{Z₁}, a)`
    pub exact_sum: u64,
    /// `(k⁴ + 34k³ + 430k² + 2400)/288`
    #[serde(with = "serde_ratio")]
    pub closed_form: Q,
    /// `(k/6) · L(6P_{Z₁}, k)`, the sum with the summand taken at `k`
    #[serde(with = "serde_ratio")]
    pub literal_sum: Q,
    pub holds: bool,
}

pub fn obstruction_closed_form(k: u64) -> Q {
    let k = k as i64;
    Q::new(k.pow(4) + 34 * k.pow(3) + 430 * k * k + 2400, 288)
}

pub fn obstruction_dim_bound_with(k: u64, ehrhart: &EhrhartPolynomial) -> Result<ObstructionBound, ToricError> {
    if k == 0 || k % 6 != 0 {
        return Err(ToricError::NotMultipleOfSix(k));
    }
    let terms = k / 6;
    let sum = (1..=terms as i64).fold(Q::zero(), |acc, a| acc + ehrhart.eval(a));
    let exact_sum = sum.to_integer() as u64;
    let closed_form = obstruction_closed_form(k);
    Ok(ObstructionBound {
        k,
        exact_sum,
        closed_form,
        literal_sum: ehrhart.eval(k as i64) * terms as i64,
        holds: sum <= closed_form,
    })
}

pub fn obstruction_dim_bound(k: u64) -> Result<ObstructionBound, ToricError> {
    if k == 0 || k % 6 != 0 {
        return Err(ToricError::NotMultipleOfSix(k));
    }
    let ehrhart = KummerToric::compute()?.obstruction_ehrhart()?;
    obstruction_dim_bound_with(k, &ehrhart)
}
