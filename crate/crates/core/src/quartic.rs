//! Quartic orders by multiplication table, Round 2 maximalization,
//! splitting types, and field records for D4 quartics x⁴ + Px² + Q.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{factor, is_square_bigint, kronecker, quadratic_field_disc};
use crate::linalg::{fp_kernel, lattice_basis, reduce_bigint, FpAlgebra, IntMatrix};
use crate::quadfield::QuadElem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuarticError {
    #[error("x^4 + ({0})x^2 + ({1}) is reducible")]
    Reducible(BigInt, BigInt),
    #[error("not a D4 quartic: Galois type {0:?}")]
    NotD4(GaloisType),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("splitting pair {0} at p = {1} is not a legal D4 pair")]
    IllegalPair(String, u64),
    #[error("local factors {0:?} do not form a quartic splitting type")]
    BadType(Vec<(usize, usize)>),
}

/// Splitting symbol of a rank-4 algebra over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuarticType {
    T1111,
    T112,
    T22,
    T4,
    /// (1²11)
    T1sq11,
    /// (1²2)
    T1sq2,
    /// (1²1²)
    T1sq1sq,
    /// (2²)
    T2sq,
    /// (1⁴)
    T1e4,
}

impl QuarticType {
    pub const ALL: [QuarticType; 9] = [
        QuarticType::T1111,
        QuarticType::T112,
        QuarticType::T22,
        QuarticType::T4,
        QuarticType::T1sq11,
        QuarticType::T1sq2,
        QuarticType::T1sq1sq,
        QuarticType::T2sq,
        QuarticType::T1e4,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            QuarticType::T1111 => "1111",
            QuarticType::T112 => "112",
            QuarticType::T22 => "22",
            QuarticType::T4 => "4",
            QuarticType::T1sq11 => "1-211",
            QuarticType::T1sq2 => "1-22",
            QuarticType::T1sq1sq => "1-21-2",
            QuarticType::T2sq => "2-2",
            QuarticType::T1e4 => "1-4",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == s)
    }

    /// From the sorted (f, e) list of the local factors.
    pub fn from_local_factors(fe: &[(usize, usize)]) -> Option<Self> {
        let mut v = fe.to_vec();
        v.sort_unstable();
        Some(match v.as_slice() {
            [(1, 1), (1, 1), (1, 1), (1, 1)] => QuarticType::T1111,
            [(1, 1), (1, 1), (2, 1)] => QuarticType::T112,
            [(2, 1), (2, 1)] => QuarticType::T22,
            [(4, 1)] => QuarticType::T4,
            [(1, 1), (1, 1), (1, 2)] => QuarticType::T1sq11,
            [(1, 2), (2, 1)] => QuarticType::T1sq2,
            [(1, 2), (1, 2)] => QuarticType::T1sq1sq,
            [(2, 2)] => QuarticType::T2sq,
            [(1, 4)] => QuarticType::T1e4,
            _ => return None,
        })
    }

    /// Local factor list (f, e), sorted.
    pub fn local_factors(&self) -> Vec<(usize, usize)> {
        match self {
            QuarticType::T1111 => vec![(1, 1); 4],
            QuarticType::T112 => vec![(1, 1), (1, 1), (2, 1)],
            QuarticType::T22 => vec![(2, 1), (2, 1)],
            QuarticType::T4 => vec![(4, 1)],
            QuarticType::T1sq11 => vec![(1, 1), (1, 1), (1, 2)],
            QuarticType::T1sq2 => vec![(1, 2), (2, 1)],
            QuarticType::T1sq1sq => vec![(1, 2), (1, 2)],
            QuarticType::T2sq => vec![(2, 2)],
            QuarticType::T1e4 => vec![(1, 4)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuadType {
    Split,
    Inert,
    Ramified,
}

impl QuadType {
    pub fn code(&self) -> &'static str {
        match self {
            QuadType::Split => "11",
            QuadType::Inert => "2",
            QuadType::Ramified => "1-2",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        [QuadType::Split, QuadType::Inert, QuadType::Ramified].into_iter().find(|t| t.code() == s)
    }

    /// From χ_d(p): +1 split, −1 inert, 0 ramified.
    pub fn from_kronecker(d: i64, p: u64) -> Self {
        match kronecker(d as i128, p as i128) {
            1 => QuadType::Split,
            -1 => QuadType::Inert,
            _ => QuadType::Ramified,
        }
    }
}

/// (ς_p(L), ς_p(K)) for a quartic field L with quadratic subfield K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplittingPair {
    pub quartic: QuarticType,
    pub quadratic: QuadType,
}

const fn sp(quartic: QuarticType, quadratic: QuadType) -> SplittingPair {
    SplittingPair { quartic, quadratic }
}

impl SplittingPair {
    /// The twelve pairs that occur for D4 fields, in the order unramified,
    /// tame without central inertia, then with central inertia.
    pub const LEGAL: [SplittingPair; 12] = [
        sp(QuarticType::T1111, QuadType::Split),
        sp(QuarticType::T112, QuadType::Split),
        sp(QuarticType::T22, QuadType::Split),
        sp(QuarticType::T22, QuadType::Inert),
        sp(QuarticType::T4, QuadType::Inert),
        sp(QuarticType::T1sq11, QuadType::Split),
        sp(QuarticType::T1sq2, QuadType::Split),
        sp(QuarticType::T1sq1sq, QuadType::Ramified),
        sp(QuarticType::T2sq, QuadType::Ramified),
        sp(QuarticType::T1sq1sq, QuadType::Split),
        sp(QuarticType::T2sq, QuadType::Inert),
        sp(QuarticType::T1e4, QuadType::Ramified),
    ];

    pub fn new(quartic: QuarticType, quadratic: QuadType) -> Self {
        sp(quartic, quadratic)
    }

    pub fn is_legal(&self) -> bool {
        Self::LEGAL.contains(self)
    }

    pub fn is_unramified(&self) -> bool {
        Self::LEGAL[..5].contains(self)
    }

    pub fn has_central_inertia(&self) -> bool {
        Self::LEGAL[9..].contains(self)
    }

    pub fn code(&self) -> String {
        format!("{}/{}", self.quartic.code(), self.quadratic.code())
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (a, b) = s.split_once('/')?;
        Some(sp(QuarticType::from_code(a)?, QuadType::from_code(b)?))
    }
}

impl fmt::Display for SplittingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GaloisType {
    D4,
    C4,
    V4,
    Reducible,
}

/// Is x⁴ + Px² + Q reducible over Q?
pub fn is_reducible(p: &BigInt, q: &BigInt) -> bool {
    if q.is_zero() {
        return true;
    }
    let delta: BigInt = p * p - q * 4;
    if is_square_bigint(&delta) {
        return true;
    }
    if is_square_bigint(q) {
        let b = q.sqrt();
        for bb in [b.clone(), -b] {
            if is_square_bigint(&(&bb * 2 - p)) {
                return true;
            }
        }
    }
    false
}

pub fn galois_type(p: &BigInt, q: &BigInt) -> GaloisType {
    if is_reducible(p, q) {
        GaloisType::Reducible
    } else if is_square_bigint(q) {
        GaloisType::V4
    } else if is_square_bigint(&(q * (p * p - q * 4))) {
        GaloisType::C4
    } else {
        GaloisType::D4
    }
}

/// A rank-4 order: basis ω_0..ω_3 with ω_i ω_j = Σ_k c_ijk ω_k. The basis is
/// also kept in coordinates of the power basis of x⁴ + Px² + Q when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticOrder {
    pub table: Vec<BigInt>,
    pub unit: Vec<BigInt>,
    pub disc: BigInt,
    /// Rows are basis elements in power-basis coordinates, over `denominator`.
    pub basis: Vec<Vec<BigInt>>,
    pub denominator: BigInt,
    pub provenance: Option<(BigInt, BigInt)>,
}

fn idx(i: usize, j: usize, k: usize) -> usize {
    (i * 4 + j) * 4 + k
}

/// Transpose of the adjugate: returns adj(M) with M·adj(M) = det(M)·I.
fn adjugate(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = m.len();
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let det = if minor.is_empty() { BigInt::one() } else { IntMatrix::from_rows(&minor).det() };
            adj[j][i] = if (i + j) % 2 == 0 { det } else { -det };
        }
    }
    adj
}

fn vec_mat(v: &[BigInt], m: &[Vec<BigInt>]) -> Vec<BigInt> {
    (0..m[0].len()).map(|j| v.iter().zip(m).map(|(a, row)| a * &row[j]).sum()).collect()
}

impl QuarticOrder {
    pub fn mul(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); 4];
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.table[idx(i, j, k)];
                    if !c.is_zero() {
                        *o += &xy * c;
                    }
                }
            }
        }
        out
    }

    fn basis_vec(i: usize) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); 4];
        v[i] = BigInt::one();
        v
    }

    pub fn trace(&self, x: &[BigInt]) -> BigInt {
        (0..4).map(|j| self.mul(x, &Self::basis_vec(j))[j].clone()).sum()
    }

    pub fn trace_form_disc(&self) -> BigInt {
        let tr: Vec<BigInt> = (0..4).map(|k| self.trace(&Self::basis_vec(k))).collect();
        let mut m = IntMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let v: BigInt = (0..4).map(|k| &self.table[idx(i, j, k)] * &tr[k]).sum();
                m.set(i, j, v);
            }
        }
        m.det()
    }

    /// O/pO as an F_p-algebra.
    pub fn mod_p(&self, p: u64) -> FpAlgebra {
        let sc: Vec<u64> = self.table.iter().map(|c| reduce_bigint(c, p)).collect();
        let unit: Vec<u64> = self.unit.iter().map(|c| reduce_bigint(c, p)).collect();
        FpAlgebra::new(p, 4, sc, unit).expect("order tables are commutative and associative")
    }

    /// One Round 2 enlargement at p; `None` when the order is p-maximal.
    fn enlarge_at(&self, p: u64) -> Option<QuarticOrder> {
        let pb = BigInt::from(p);
        let alg = self.mod_p(p);
        let rad = alg.radical();
        // I = lift(rad) + pO
        let mut gens: Vec<Vec<BigInt>> = rad.iter().map(|v| v.iter().map(|&c| BigInt::from(c)).collect()).collect();
        for i in 0..4 {
            gens.push(Self::basis_vec(i).into_iter().map(|c| c * &pb).collect());
        }
        let ib = lattice_basis(&gens);
        let idet = IntMatrix::from_rows(&ib).det();
        let iadj = adjugate(&ib);
        // x ↦ (coordinates of x·β_j in the basis of I) mod p
        let mut rows = vec![vec![0u64; 4]; 16];
        for a in 0..4 {
            let ea = Self::basis_vec(a);
            for (j, beta) in ib.iter().enumerate() {
                let prod = self.mul(&ea, beta);
                let y = vec_mat(&prod, &iadj);
                for (k, yk) in y.iter().enumerate() {
                    let (q, r) = yk.div_rem(&idet);
                    debug_assert!(r.is_zero());
                    rows[j * 4 + k][a] = reduce_bigint(&q, p);
                }
            }
        }
        let ker = fp_kernel(&rows, 4, p);
        if ker.is_empty() {
            return None;
        }
        let mut ugens: Vec<Vec<BigInt>> = ker.iter().map(|v| v.iter().map(|&c| BigInt::from(c)).collect()).collect();
        for i in 0..4 {
            ugens.push(Self::basis_vec(i).into_iter().map(|c| c * &pb).collect());
        }
        let t = lattice_basis(&ugens);
        Some(self.rebase(&t, &pb))
    }

    /// The order with basis (rows of t)/s in current coordinates.
    fn rebase(&self, t: &[Vec<BigInt>], s: &BigInt) -> QuarticOrder {
        let det = IntMatrix::from_rows(t).det();
        let adj = adjugate(t);
        let denom = &det * s;
        let mut table = vec![BigInt::zero(); 64];
        for i in 0..4 {
            for j in 0..4 {
                let w = self.mul(&t[i], &t[j]);
                let y = vec_mat(&w, &adj);
                for k in 0..4 {
                    let (q, r) = y[k].div_rem(&denom);
                    assert!(r.is_zero(), "enlargement is not a ring");
                    table[idx(i, j, k)] = q;
                }
            }
        }
        // unit' = unit·(t/s)^{-1} = unit·adj·s/det
        let unit: Vec<BigInt> = vec_mat(&self.unit, &adj).into_iter().map(|c| c * s / &det).collect();
        let basis_rows: Vec<Vec<BigInt>> = t.iter().map(|row| vec_mat(row, &self.basis)).collect();
        let denominator = &self.denominator * s;
        let g = basis_rows.iter().flatten().fold(denominator.clone(), |acc, c| acc.gcd(c));
        let basis = basis_rows.into_iter().map(|r| r.into_iter().map(|c| c / &g).collect()).collect();
        let s4 = s.pow(4);
        let disc = &self.disc * &det * &det / (&s4 * &s4);
        QuarticOrder { table, unit, disc, basis, denominator: denominator / g, provenance: self.provenance.clone() }
    }

    /// Round 2 at p until stable; returns the order and the index exponent gained.
    pub fn p_maximal(&self, p: u64) -> (QuarticOrder, u32) {
        let mut o = self.clone();
        let mut gained = 0;
        let p2 = BigInt::from(p * p);
        while (&o.disc % &p2).is_zero() {
            match o.enlarge_at(p) {
                Some(n) => {
                    let ratio = (&o.disc / &n.disc).abs();
                    gained += crate::arith::valuation(&ratio, p) / 2;
                    o = n;
                }
                None => break,
            }
        }
        (o, gained)
    }
}

/// Z[x]/(x⁴ + Px² + Q) in the power basis.
pub fn order_from_biquadratic(p: &BigInt, q: &BigInt) -> Result<QuarticOrder, QuarticError> {
    if is_reducible(p, q) {
        return Err(QuarticError::Reducible(p.clone(), q.clone()));
    }
    // x^k reduced mod f for k <= 6, as coefficient vectors
    let mut pows: Vec<Vec<BigInt>> = (0..4).map(QuarticOrder::basis_vec).collect();
    for k in 4..7 {
        let prev = &pows[k - 1];
        // x·prev: shift up, then replace x^4 by −P x² − Q
        let top = prev[3].clone();
        let mut v = vec![BigInt::zero(), prev[0].clone(), prev[1].clone(), prev[2].clone()];
        v[2] -= &top * p;
        v[0] -= &top * q;
        pows.push(v);
    }
    let mut table = vec![BigInt::zero(); 64];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                table[idx(i, j, k)] = pows[i + j][k].clone();
            }
        }
    }
    let delta: BigInt = p * p - q * 4;
    let disc = q * 16 * &delta * &delta;
    let basis = (0..4).map(QuarticOrder::basis_vec).collect();
    let o = QuarticOrder {
        table,
        unit: QuarticOrder::basis_vec(0),
        disc,
        basis,
        denominator: BigInt::one(),
        provenance: Some((p.clone(), q.clone())),
    };
    debug_assert_eq!(o.trace_form_disc(), o.disc);
    Ok(o)
}

fn primes_of(n: &BigInt) -> Result<Vec<u64>, QuarticError> {
    if n.is_zero() {
        return Ok(Vec::new());
    }
    let f = factor(&n.abs()).map_err(|e| QuarticError::TooLarge(e.to_string()))?;
    f.primes()
        .map(|p| u64::try_from(p).map_err(|_| QuarticError::TooLarge(format!("prime {p}"))))
        .collect()
}

/// Maximal order containing O and the index [O_max : O]. `primes` must
/// contain every p with p² | disc(O).
pub fn maximal_order_at(o: &QuarticOrder, primes: &[u64]) -> (QuarticOrder, BigInt) {
    let mut cur = o.clone();
    let mut index = BigInt::one();
    for &p in primes {
        let (n, g) = cur.p_maximal(p);
        index *= BigInt::from(p).pow(g);
        cur = n;
    }
    (cur, index)
}

pub fn maximal_order(o: &QuarticOrder) -> Result<(QuarticOrder, BigInt), QuarticError> {
    let primes = match &o.provenance {
        Some((p, q)) => {
            let mut v = primes_of(q)?;
            v.extend(primes_of(&(p * p - q * 4))?);
            v.push(2);
            v.sort_unstable();
            v.dedup();
            v
        }
        None => primes_of(&o.disc)?,
    };
    let p2 = |p: u64| (&o.disc % BigInt::from(p * p)).is_zero();
    let primes: Vec<u64> = primes.into_iter().filter(|&p| p2(p)).collect();
    Ok(maximal_order_at(o, &primes))
}

pub fn splitting_type(o_max: &QuarticOrder, d: i64, p: u64) -> Result<SplittingPair, QuarticError> {
    let fe = o_max.mod_p(p).decompose();
    let quartic = QuarticType::from_local_factors(&fe).ok_or(QuarticError::BadType(fe))?;
    let pair = SplittingPair::new(quartic, QuadType::from_kronecker(d, p));
    if !pair.is_legal() {
        return Err(QuarticError::IllegalPair(pair.code(), p));
    }
    Ok(pair)
}

/// One isomorphism class of D4 quartic field with its invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct D4FieldRecord {
    pub p: BigInt,
    pub q_poly: BigInt,
    pub disc_l: i128,
    pub d: i64,
    pub q: i128,
    pub cond_signed: i128,
    pub cond_abs: u128,
    pub r2: u8,
    pub splitting: BTreeMap<u64, SplittingPair>,
    pub j_odd: u128,
    pub central_inertia_primes: Vec<u64>,
    /// θ² = α with α ∈ Q(√d), so L = Q(θ).
    pub alpha: QuadElem,
}

impl D4FieldRecord {
    /// Assembles the derived fields from disc, d, signature and splitting.
    pub fn assemble(
        p: BigInt,
        q_poly: BigInt,
        disc_l: i128,
        d: i64,
        r2: u8,
        splitting: BTreeMap<u64, SplittingPair>,
        alpha: QuadElem,
    ) -> Self {
        let dd = d as i128;
        let q = disc_l / (dd * dd);
        let cond_signed = disc_l / dd;
        let j_odd = splitting
            .iter()
            .filter(|(&p, pair)| {
                p != 2
                    && (**pair == sp(QuarticType::T1sq1sq, QuadType::Split)
                        || **pair == sp(QuarticType::T2sq, QuadType::Inert))
            })
            .map(|(&p, _)| (p as u128) * (p as u128))
            .product();
        let central_inertia_primes =
            splitting.iter().filter(|(_, pair)| pair.has_central_inertia()).map(|(&p, _)| p).collect();
        D4FieldRecord {
            p,
            q_poly,
            disc_l,
            d,
            q,
            cond_signed,
            cond_abs: cond_signed.unsigned_abs(),
            r2,
            splitting,
            j_odd,
            central_inertia_primes,
            alpha,
        }
    }

    pub fn sort_key(&self) -> (u128, i64, i128, BigInt, BigInt) {
        (self.cond_abs, self.d, self.q, self.p.clone(), self.q_poly.clone())
    }

    /// Re-checks every record-level invariant; returns the first violation.
    pub fn check(&self) -> Result<(), String> {
        let dd = self.d as i128;
        if self.q * dd * dd != self.disc_l {
            return Err("disc_L != q·d²".into());
        }
        if self.cond_signed != self.q * dd || self.cond_abs != (self.q * dd).unsigned_abs() {
            return Err("conductor mismatch".into());
        }
        for (name, v) in [("q", self.q), ("d", dd)] {
            if !matches!(v.rem_euclid(4), 0 | 1) {
                return Err(format!("{name} = {v} is not 0 or 1 mod 4"));
            }
        }
        let ok = match self.r2 {
            0 => self.q > 0 && self.d > 0,
            1 => self.q < 0 && self.d > 0,
            2 => self.q > 0,
            _ => false,
        };
        if !ok {
            return Err(format!("sign constraint fails: r2 = {}, q = {}, d = {}", self.r2, self.q, self.d));
        }
        for (p, pair) in &self.splitting {
            if !pair.is_legal() {
                return Err(format!("illegal pair {pair} at {p}"));
            }
            if *p != 2 && pair.quadratic != QuadType::from_kronecker(self.d, *p) {
                return Err(format!("quadratic part at {p} disagrees with χ_d"));
            }
        }
        let j: u128 = self
            .splitting
            .iter()
            .filter(|(&p, pair)| {
                p != 2
                    && matches!(
                        (pair.quartic, pair.quadratic),
                        (QuarticType::T1sq1sq, QuadType::Split) | (QuarticType::T2sq, QuadType::Inert)
                    )
            })
            .map(|(&p, _)| (p as u128).pow(2))
            .product();
        if j != self.j_odd {
            return Err("J_odd mismatch".into());
        }
        Ok(())
    }

    /// `ram_splitting` column: p:quart/quad joined by ';'.
    pub fn splitting_code(&self) -> String {
        self.splitting.iter().map(|(p, s)| format!("{p}:{}", s.code())).collect::<Vec<_>>().join(";")
    }
}

/// α = (−P + √(P² − 4Q))/2 written over the fundamental discriminant d.
pub fn alpha_of(p: &BigInt, q: &BigInt) -> Option<(i64, QuadElem)> {
    let delta: BigInt = p * p - q * 4;
    let delta_i = delta.to_i128()?;
    let (d, g) = quadratic_field_disc(delta_i)?;
    // √Δ = g·√m with d ∈ {m, 4m}
    let g = BigInt::from(g);
    let alpha = if d.rem_euclid(4) == 1 {
        QuadElem::new(-p.clone(), g)
    } else {
        // √Δ = (g/2)√d; scale α by 4
        QuadElem::new(-p * 4, g * 2)
    };
    Some((i64::try_from(d).ok()?, alpha))
}

/// Signature data from x⁴ + Px² + Q: number of complex pairs.
pub fn r2_of(p: &BigInt, q: &BigInt) -> u8 {
    let delta: BigInt = p * p - q * 4;
    if delta.is_negative() {
        2
    } else if q.is_negative() {
        1
    } else if p.is_negative() {
        0
    } else {
        2
    }
}

/// Every invariant of the field defined by x⁴ + Px² + Q, via Round 2.
pub fn field_invariants(p: &BigInt, q: &BigInt) -> Result<D4FieldRecord, QuarticError> {
    let gt = galois_type(p, q);
    if gt != GaloisType::D4 {
        return Err(QuarticError::NotD4(gt));
    }
    let o = order_from_biquadratic(p, q)?;
    let (omax, _) = maximal_order(&o)?;
    let disc_l = omax.disc.to_i128().ok_or_else(|| QuarticError::TooLarge("discriminant".into()))?;
    let (d, alpha) = alpha_of(p, q).ok_or_else(|| QuarticError::TooLarge("P² − 4Q".into()))?;
    let mut splitting = BTreeMap::new();
    for pr in primes_of(&omax.disc)? {
        splitting.insert(pr, splitting_type(&omax, d, pr)?);
    }
    Ok(D4FieldRecord::assemble(p.clone(), q.clone(), disc_l, d, r2_of(p, q), splitting, alpha))
}

/// Splitting pair of a record's field at an arbitrary prime.
pub fn splitting_at(rec: &D4FieldRecord, prime: u64) -> Result<SplittingPair, QuarticError> {
    if let Some(s) = rec.splitting.get(&prime) {
        return Ok(*s);
    }
    let o = order_from_biquadratic(&rec.p, &rec.q_poly)?;
    let (omax, _) = maximal_order_at(&o, &[prime]);
    splitting_type(&omax, rec.d, prime)
}

/// Are the two records' fields isomorphic? Equal invariants, then a
/// square-class comparison of the Kummer generators in Q(√d).
pub fn isomorphic(r1: &D4FieldRecord, r2: &D4FieldRecord) -> bool {
    if (r1.disc_l, r1.d, r1.q) != (r2.disc_l, r2.d, r2.q) {
        return false;
    }
    let d = r1.d;
    let a = &r1.alpha;
    [r2.alpha.clone(), r2.alpha.conj()].iter().any(|b| a.mul(b, d).is_square(d))
}
