//! Pairs (A, B) of ternary quadratic forms with A's top row zero and
//! b11 = 1, under the group G(Z). Resolvent invariants, splitting types
//! mod p, canonical orbit representatives, an exact orbit census over an
//! invariant box, and F_p density counts.
//!
//! A pair is stored through the binary form g(y,z) = a22y² + a23yz + a33z²,
//! the linear form ℓ = b12y + b13z and B_low = b22y² + b23yz + b33z². The
//! form H = 4·B_low − ℓ² is unchanged by the first-column shears of g3, and
//! the orbit is the class of (g, H mod 4g, ℓ mod 2) under GL2(Z) and ±g.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{is_square_i128, isqrt_i128, kronecker, primes_up_to, valuation};
use crate::quartic::{
    field_invariants, galois_type, isomorphic, order_from_biquadratic, D4FieldRecord, GaloisType,
    QuadType, QuarticType, SplittingPair,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VpairError {
    #[error("group element is not in G(Z): {0}")]
    NotInGroup(String),
    #[error("pair is not generic: {0}")]
    NotGeneric(String),
    #[error("degenerate invariants: {0}")]
    Degenerate(String),
    #[error("unsupported prime {0}")]
    BadPrime(u64),
    #[error("bounds too large: q_bound·d_bound = {0} > 100000")]
    TooLarge(u64),
    #[error("field computation failed: {0}")]
    Field(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TernaryPair {
    pub a22: i64,
    pub a23: i64,
    pub a33: i64,
    pub b12: i64,
    pub b13: i64,
    pub b22: i64,
    pub b23: i64,
    pub b33: i64,
}

/// f(x, y) = b x²y + c xy² + d y³.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolventCubic {
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl ResolventCubic {
    /// The N1 action: f ↦ f(εx + ny, y).
    pub fn act(&self, eps: i8, n: i64) -> ResolventCubic {
        let (b, c, d, n, e) = (self.b, self.c, self.d, n as i128, eps as i128);
        ResolventCubic { b, c: e * (c + 2 * b * n), d: b * n * n + c * n + d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupElement {
    pub eps2: i8,
    pub n: i64,
    pub eps3: i8,
    pub m1: i64,
    pub m2: i64,
    pub s: [[i64; 2]; 2],
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { eps2: 1, n: 0, eps3: 1, m1: 0, m2: 0, s: [[1, 0], [0, 1]] }
    }

    pub fn validate(&self) -> Result<(), VpairError> {
        let det = self.s[0][0] * self.s[1][1] - self.s[0][1] * self.s[1][0];
        if self.eps2.abs() != 1 || self.eps3.abs() != 1 {
            return Err(VpairError::NotInGroup("signs must be ±1".into()));
        }
        if det != self.eps3 as i64 {
            return Err(VpairError::NotInGroup(format!("det g3 = {} ≠ 1", det * self.eps3 as i64)));
        }
        Ok(())
    }

    /// g·h, so that act(g·h, v) = act(g, act(h, v)).
    pub fn compose(&self, h: &GroupElement) -> GroupElement {
        let s = &self.s;
        let t = &h.s;
        let mut st = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                st[i][j] = s[i][0] * t[0][j] + s[i][1] * t[1][j];
            }
        }
        let e3h = h.eps3 as i64;
        GroupElement {
            eps2: self.eps2 * h.eps2,
            n: self.n * h.eps2 as i64 + h.n,
            eps3: self.eps3 * h.eps3,
            m1: self.m1 * e3h + s[0][0] * h.m1 + s[0][1] * h.m2,
            m2: self.m2 * e3h + s[1][0] * h.m1 + s[1][1] * h.m2,
            s: st,
        }
    }

    fn g3(&self) -> [[i128; 3]; 3] {
        let s = self.s.map(|r| r.map(|x| x as i128));
        [
            [self.eps3 as i128, 0, 0],
            [self.m1 as i128, s[0][0], s[0][1]],
            [self.m2 as i128, s[1][0], s[1][1]],
        ]
    }

    /// Random element with entries of size about `size`.
    pub fn random<R: Rng>(rng: &mut R, size: i64) -> GroupElement {
        loop {
            let s = [[rng.gen_range(-size..=size), rng.gen_range(-size..=size)], [
                rng.gen_range(-size..=size),
                rng.gen_range(-size..=size),
            ]];
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if det.abs() == 1 {
                return GroupElement {
                    eps2: if rng.gen() { 1 } else { -1 },
                    n: rng.gen_range(-size..=size),
                    eps3: det as i8,
                    m1: rng.gen_range(-size..=size),
                    m2: rng.gen_range(-size..=size),
                    s,
                };
            }
        }
    }
}

type Sym3 = [[i128; 3]; 3];

impl TernaryPair {
    pub fn from_array(c: [i64; 8]) -> Self {
        TernaryPair { a22: c[0], a23: c[1], a33: c[2], b12: c[3], b13: c[4], b22: c[5], b23: c[6], b33: c[7] }
    }

    pub fn to_array(&self) -> [i64; 8] {
        [self.a22, self.a23, self.a33, self.b12, self.b13, self.b22, self.b23, self.b33]
    }

    /// 2A and 2B as integer symmetric matrices.
    fn doubled(&self) -> (Sym3, Sym3) {
        let v = self.to_array().map(|x| x as i128);
        let a = [[0, 0, 0], [0, 2 * v[0], v[1]], [0, v[1], 2 * v[2]]];
        let b = [[2, v[3], v[4]], [v[3], 2 * v[5], v[6]], [v[4], v[6], 2 * v[7]]];
        (a, b)
    }

    fn from_doubled(a: &Sym3, b: &Sym3) -> Result<Self, VpairError> {
        if a[0].iter().any(|&x| x != 0) || b[0][0] != 2 {
            return Err(VpairError::NotInGroup("image left V(Z)".into()));
        }
        let c = |x: i128| i64::try_from(x).map_err(|_| VpairError::Degenerate("coefficient overflow".into()));
        Ok(TernaryPair {
            a22: c(a[1][1] / 2)?,
            a23: c(a[1][2])?,
            a33: c(a[2][2] / 2)?,
            b12: c(b[0][1])?,
            b13: c(b[0][2])?,
            b22: c(b[1][1] / 2)?,
            b23: c(b[1][2])?,
            b33: c(b[2][2] / 2)?,
        })
    }

    pub fn g(&self) -> BForm {
        [self.a22 as i128, self.a23 as i128, self.a33 as i128]
    }

    pub fn ell(&self) -> [i128; 2] {
        [self.b12 as i128, self.b13 as i128]
    }

    /// H = 4·B_low − ℓ².
    pub fn h(&self) -> BForm {
        let (l1, l2) = (self.b12 as i128, self.b13 as i128);
        [4 * self.b22 as i128 - l1 * l1, 4 * self.b23 as i128 - 2 * l1 * l2, 4 * self.b33 as i128 - l2 * l2]
    }

    fn from_parts(g: BForm, ell: [i128; 2], h: BForm) -> Option<TernaryPair> {
        let sq = [ell[0] * ell[0], 2 * ell[0] * ell[1], ell[1] * ell[1]];
        let mut low = [0i64; 3];
        for i in 0..3 {
            let t = h[i] + sq[i];
            if t % 4 != 0 {
                return None;
            }
            low[i] = i64::try_from(t / 4).ok()?;
        }
        let c = |x: i128| i64::try_from(x).ok();
        Some(TernaryPair {
            a22: c(g[0])?,
            a23: c(g[1])?,
            a33: c(g[2])?,
            b12: c(ell[0])?,
            b13: c(ell[1])?,
            b22: low[0],
            b23: low[1],
            b33: low[2],
        })
    }

    /// d·q
    pub fn conductor(&self) -> i128 {
        let (q, d) = invariants(self);
        q * d
    }

    /// d²·q
    pub fn discriminant(&self) -> i128 {
        let (q, d) = invariants(self);
        q * d * d
    }
}

fn det3(m: &Sym3) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// 4·det(Ax + By).
pub fn resolvent(v: &TernaryPair) -> ResolventCubic {
    let (a, b) = v.doubled();
    // det(2Ax + 2By) = 8·det(Ax + By), so f = det(2Ax + 2By)/2.
    let f = |x: i128, y: i128| {
        let mut m = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a[i][j] * x + b[i][j] * y;
            }
        }
        let det = det3(&m);
        debug_assert!(det % 2 == 0);
        det / 2
    };
    let f10 = f(1, 0);
    let d = f(0, 1);
    let (f11, f1m) = (f(1, 1), f(1, -1));
    assert_eq!(f10, 0, "x³ coefficient of the resolvent must vanish");
    let b = (f11 - f1m) / 2 - d;
    let c = (f11 + f1m) / 2;
    ResolventCubic { b, c, d }
}

/// (q, d) with d = −b and q = c² − 4bd.
pub fn invariants(v: &TernaryPair) -> (i128, i128) {
    let r = resolvent(v);
    let d = -r.b;
    debug_assert_eq!(d, bdisc(&v.g()));
    let q = r
        .c
        .checked_mul(r.c)
        .zip(r.b.checked_mul(r.d).and_then(|x| x.checked_mul(4)))
        .and_then(|(x, y)| x.checked_sub(y))
        .expect("pair coefficients too large for i128 invariants");
    (q, d)
}

pub fn act(g: &GroupElement, v: &TernaryPair) -> Result<TernaryPair, VpairError> {
    g.validate()?;
    let m = g.g3();
    let (a, b) = v.doubled();
    let conj = |x: &Sym3| {
        let mut t = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = (0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| m[i][k] * x[k][l] * m[j][l]).sum();
            }
        }
        t
    };
    let (a1, b1) = (conj(&a), conj(&b));
    let (e, n) = (g.eps2 as i128, g.n as i128);
    let mut a2 = a1;
    let mut b2 = b1;
    for i in 0..3 {
        for j in 0..3 {
            a2[i][j] = e * a1[i][j];
            b2[i][j] = n * a1[i][j] + b1[i][j];
        }
    }
    TernaryPair::from_doubled(&a2, &b2)
}

// ---------------------------------------------------------------------------
// Binary quadratic forms as [a, b, c].

pub type BForm = [i128; 3];

pub fn bdisc(f: &BForm) -> i128 {
    f[1] * f[1] - 4 * f[0] * f[2]
}

/// Polarized discriminant: disc(f + tg) = disc f + 2t⟨f,g⟩ + t² disc g.
pub fn pairing(f: &BForm, g: &BForm) -> i128 {
    f[1] * g[1] - 2 * f[0] * g[2] - 2 * f[2] * g[0]
}

/// Resultant of two binary quadratics.
pub fn bres(f: &BForm, g: &BForm) -> i128 {
    let s = pairing(f, g);
    (s * s - bdisc(f) * bdisc(g)) / 4
}

/// Jacobian covariant; disc J(f,g) = 4·Res(f,g).
pub fn jacobian(f: &BForm, g: &BForm) -> BForm {
    let ([a, b, c], [x, y, z]) = (*f, *g);
    [a * y - b * x, 2 * (a * z - c * x), b * z - c * y]
}

type Mat2 = [[i128; 2]; 2];

/// f∘N, i.e. (y, z) ↦ f(N·(y, z)).
pub fn bapply(f: &BForm, n: &Mat2) -> BForm {
    let [a, b, c] = *f;
    let ev = |x: i128, y: i128| a * x * x + b * x * y + c * y * y;
    [
        ev(n[0][0], n[1][0]),
        2 * a * n[0][0] * n[0][1] + b * (n[0][0] * n[1][1] + n[0][1] * n[1][0]) + 2 * c * n[1][0] * n[1][1],
        ev(n[0][1], n[1][1]),
    ]
}

fn lapply(l: &[i128; 2], n: &Mat2) -> [i128; 2] {
    [l[0] * n[0][0] + l[1] * n[1][0], l[0] * n[0][1] + l[1] * n[1][1]]
}

fn mmul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut r = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

fn mdet(m: &Mat2) -> i128 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn scale(f: &BForm, k: i128) -> BForm {
    f.map(|x| x * k)
}

fn add(f: &BForm, g: &BForm) -> BForm {
    [f[0] + g[0], f[1] + g[1], f[2] + g[2]]
}

/// GL2(Z)-reduction of a positive definite form to 0 ≤ b ≤ a ≤ c, with
/// the transform N such that the result is f∘N.
pub fn reduce_definite(f: &BForm) -> (BForm, Mat2) {
    let mut f = *f;
    let mut n: Mat2 = [[1, 0], [0, 1]];
    assert!(f[0] > 0 && bdisc(&f) < 0, "form must be positive definite");
    loop {
        // b into (−a, a]
        let a2 = 2 * f[0];
        let k = (f[0] - f[1]).div_euclid(a2);
        if k != 0 {
            let t = [[1, k], [0, 1]];
            f = bapply(&f, &t);
            n = mmul(&n, &t);
        }
        if f[0] > f[2] {
            let t = [[0, 1], [1, 0]];
            f = bapply(&f, &t);
            n = mmul(&n, &t);
            continue;
        }
        break;
    }
    if f[1] < 0 {
        let t = [[1, 0], [0, -1]];
        f = bapply(&f, &t);
        n = mmul(&n, &t);
    }
    (f, n)
}

/// Integer vectors (x, y) with f(x, y) = m for positive definite f.
fn represent(f: &BForm, m: i128) -> Vec<[i128; 2]> {
    let [a, b, c] = *f;
    let dd = -bdisc(f);
    let ymax = isqrt_i128(4 * a * m / dd) + 1;
    let mut out = Vec::new();
    for y in -ymax..=ymax {
        // a x² + b y x + (c y² − m) = 0
        let disc = b * b * y * y - 4 * a * (c * y * y - m);
        if disc < 0 || !is_square_i128(disc) {
            continue;
        }
        let r = isqrt_i128(disc);
        for s in [r, -r] {
            let num = -b * y + s;
            if num % (2 * a) == 0 {
                let x = num / (2 * a);
                if !out.contains(&[x, y]) {
                    out.push([x, y]);
                }
            }
        }
    }
    out
}

/// GL2(Z) automorphs of a reduced positive definite form.
fn automorphs(f: &BForm) -> Vec<Mat2> {
    let v1s = represent(f, f[0]);
    let v2s = represent(f, f[2]);
    let mut out = Vec::new();
    for v1 in &v1s {
        for v2 in &v2s {
            let n = [[v1[0], v2[0]], [v1[1], v2[1]]];
            if mdet(&n).abs() == 1 && bapply(f, &n) == *f {
                out.push(n);
            }
        }
    }
    out
}

/// All 0 ≤ b ≤ a ≤ c forms of discriminant `disc` < 0 (not only primitive).
pub fn reduced_definite_forms(disc: i128) -> Vec<BForm> {
    let mut out = Vec::new();
    let dd = -disc;
    let mut a = 1;
    while 3 * a * a <= dd {
        for b in 0..=a {
            let num = b * b + dd;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a {
                    out.push([a, b, c]);
                }
            }
        }
        a += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical forms

/// The positive definite covariant used for reduction.
fn reference_form(g: &BForm, h: &BForm) -> Result<BForm, VpairError> {
    let d = bdisc(g);
    let w = if d < 0 {
        *g
    } else if d > 0 {
        let q = bres(g, h);
        if q > 0 {
            add(&scale(h, d), &scale(g, -pairing(g, h)))
        } else if q < 0 {
            jacobian(g, h)
        } else {
            return Err(VpairError::Degenerate("q = 0 with d > 0".into()));
        }
    } else {
        return Err(VpairError::Degenerate("d = 0".into()));
    };
    Ok(if w[0] < 0 { scale(&w, -1) } else { w })
}

/// Normal form: shift H by multiples of 4g so ⟨g,H⟩ ∈ [0, 4|d|), and reduce ℓ mod 2.
fn normalize(g: BForm, h: BForm, ell: [i128; 2]) -> Option<TernaryPair> {
    let d = bdisc(&g);
    let s = pairing(&g, &h);
    let r = s.rem_euclid(4 * d.abs());
    let n = (r - s) / (4 * d);
    let h = add(&h, &scale(&g, 4 * n));
    TernaryPair::from_parts(g, ell.map(|x| x.rem_euclid(2)), h)
}

/// Canonical G(Z)-orbit representative: lexicographic minimum over the
/// finite set of translates whose reference form is reduced.
pub fn canonical_form(v: &TernaryPair) -> Result<TernaryPair, VpairError> {
    let (g, h, ell) = (v.g(), v.h(), v.ell());
    let w = reference_form(&g, &h)?;
    let (wred, n0) = reduce_definite(&w);
    let mut best: Option<TernaryPair> = None;
    for aut in automorphs(&wred) {
        let n = mmul(&n0, &aut);
        let det = mdet(&n);
        let gn = bapply(&g, &n);
        let hn = bapply(&h, &n);
        let ln = lapply(&ell, &n).map(|x| x * det);
        for e in [1, -1] {
            let cand = normalize(scale(&gn, e), hn, ln).expect("group image is integral");
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best.ok_or_else(|| VpairError::Degenerate("no reduced translate".into()))
}

// ---------------------------------------------------------------------------
// Splitting mod p

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairSplitting {
    Type(SplittingPair),
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HType {
    Split,
    Inert,
    Double,
}

#[derive(Debug, Clone, Copy)]
enum GShape {
    Zero,
    Split([(u64, u64); 2]),
    Double((u64, u64)),
    /// A root of g is t0 + t1·w with w² = w2 (w² = w + 1 when p = 2).
    Irreducible { t0: u64, t1: u64, w2: u64 },
}

fn legendre(a: u64, p: u64) -> i32 {
    kronecker((a % p) as i128, p as i128)
}

fn inv(a: u64, p: u64) -> u64 {
    crate::linalg::invm(a % p, p)
}

fn g_shape(a22: u64, a23: u64, a33: u64, p: u64) -> GShape {
    if a22 == 0 && a23 == 0 && a33 == 0 {
        return GShape::Zero;
    }
    if p == 2 {
        let roots: Vec<(u64, u64)> = [(1u64, 0u64), (0, 1), (1, 1)]
            .into_iter()
            .filter(|&(y, z)| (a22 * y * y + a23 * y * z + a33 * z * z) % 2 == 0)
            .collect();
        return match (a23, roots.len()) {
            (0, _) => GShape::Double(roots[0]),
            (_, 2) => GShape::Split([roots[0], roots[1]]),
            _ => GShape::Irreducible { t0: 0, t1: 1, w2: 0 },
        };
    }
    if a22 == 0 {
        return if a23 == 0 { GShape::Double((1, 0)) } else { GShape::Split([(1, 0), ((p - a33) % p, a23)]) };
    }
    let delta = (a23 * a23 + 4 * (p - a22) % p * a33) % p;
    let i2a = inv(2 * a22, p);
    let neg_b = (p - a23) % p;
    if delta == 0 {
        return GShape::Double((neg_b * i2a % p, 1));
    }
    match legendre(delta, p) {
        1 => {
            let r = crate::arith::sqrt_mod_prime(delta, p).expect("residue has a root");
            let t1 = (neg_b + r) % p * i2a % p;
            let t2 = (neg_b + p - r) % p * i2a % p;
            GShape::Split([(t1, 1), (t2, 1)])
        }
        _ => GShape::Irreducible { t0: neg_b * i2a % p, t1: i2a, w2: delta },
    }
}

/// x² + βx + γ over F_p.
fn h_type(beta: u64, gamma: u64, p: u64) -> HType {
    if p == 2 {
        return match (beta, gamma) {
            (0, _) => HType::Double,
            (_, 0) => HType::Split,
            _ => HType::Inert,
        };
    }
    let disc = (beta * beta + (p - 4 % p) * gamma) % p;
    if disc == 0 {
        HType::Double
    } else if legendre(disc, p) == 1 {
        HType::Split
    } else {
        HType::Inert
    }
}

/// Elements x + y·w of F_{p²}; w² = w2 for odd p, w² = w + 1 for p = 2.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Fq2 {
    x: u64,
    y: u64,
}

fn fq_mul(a: Fq2, b: Fq2, p: u64, w2: u64) -> Fq2 {
    if p == 2 {
        let yy = a.y * b.y;
        return Fq2 { x: (a.x * b.x + yy) % 2, y: (a.x * b.y + a.y * b.x + yy) % 2 };
    }
    Fq2 { x: (a.x * b.x + a.y * b.y % p * w2) % p, y: (a.x * b.y + a.y * b.x) % p }
}

fn fq_add(a: Fq2, b: Fq2, p: u64) -> Fq2 {
    Fq2 { x: (a.x + b.x) % p, y: (a.y + b.y) % p }
}

fn fq_scal(a: Fq2, k: u64, p: u64) -> Fq2 {
    Fq2 { x: a.x * k % p, y: a.y * k % p }
}

fn fq_inv(a: Fq2, p: u64, w2: u64) -> Fq2 {
    // a^(p²−2)
    let mut e = p * p - 2;
    let mut base = a;
    let mut acc = Fq2 { x: 1, y: 0 };
    while e > 0 {
        if e & 1 == 1 {
            acc = fq_mul(acc, base, p, w2);
        }
        base = fq_mul(base, base, p, w2);
        e >>= 1;
    }
    acc
}

/// Quartic part when g is irreducible: the conic meets each conjugate line
/// in the roots of x² + βx + γ over F_{p²}.
fn irreducible_case(t: Fq2, b: &[u64; 5], p: u64, w2: u64) -> QuarticType {
    let [b12, b13, b22, b23, b33] = *b;
    let beta = fq_add(fq_scal(t, b12, p), Fq2 { x: b13 % p, y: 0 }, p);
    let t2 = fq_mul(t, t, p, w2);
    let gamma = fq_add(fq_add(fq_scal(t2, b22, p), fq_scal(t, b23, p), p), Fq2 { x: b33 % p, y: 0 }, p);
    if p == 2 {
        if beta == (Fq2 { x: 0, y: 0 }) {
            return QuarticType::T2sq;
        }
        let b2 = fq_mul(beta, beta, p, w2);
        let z = fq_mul(gamma, fq_inv(b2, p, w2), p, w2);
        let tr = fq_add(z, fq_mul(z, z, p, w2), p);
        debug_assert_eq!(tr.y, 0);
        return if tr.x == 0 { QuarticType::T22 } else { QuarticType::T4 };
    }
    let disc = fq_add(fq_mul(beta, beta, p, w2), fq_scal(gamma, (p - 4 % p) % p, p), p);
    if disc == (Fq2 { x: 0, y: 0 }) {
        return QuarticType::T2sq;
    }
    let norm = (disc.x * disc.x % p + (p - disc.y * disc.y % p * w2 % p)) % p;
    if legendre(norm, p) == 1 {
        QuarticType::T22
    } else {
        QuarticType::T4
    }
}

fn line_h(pt: (u64, u64), b: &[u64; 5], p: u64) -> HType {
    let [b12, b13, b22, b23, b33] = *b;
    let (y, z) = pt;
    let beta = (b12 * y + b13 * z) % p;
    let gamma = (b22 * y % p * y + b23 * y % p * z + b33 * z % p * z) % p;
    h_type(beta, gamma, p)
}

fn classify(shape: &GShape, b: &[u64; 5], p: u64) -> PairSplitting {
    let pair = match *shape {
        GShape::Zero => return PairSplitting::Degenerate,
        GShape::Split([l1, l2]) => {
            let mut fe = Vec::new();
            for l in [l1, l2] {
                match line_h(l, b, p) {
                    HType::Split => fe.extend([(1, 1), (1, 1)]),
                    HType::Inert => fe.push((2, 1)),
                    HType::Double => fe.push((1, 2)),
                }
            }
            SplittingPair::new(QuarticType::from_local_factors(&fe).expect("split lines"), QuadType::Split)
        }
        GShape::Double(l) => {
            let q = match line_h(l, b, p) {
                HType::Split => QuarticType::T1sq1sq,
                HType::Inert => QuarticType::T2sq,
                HType::Double => QuarticType::T1e4,
            };
            SplittingPair::new(q, QuadType::Ramified)
        }
        GShape::Irreducible { t0, t1, w2 } => {
            SplittingPair::new(irreducible_case(Fq2 { x: t0, y: t1 }, b, p, w2), QuadType::Inert)
        }
    };
    PairSplitting::Type(pair)
}

fn red(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

pub fn splitting_mod_p(v: &TernaryPair, p: u64) -> PairSplitting {
    let shape = g_shape(red(v.a22, p), red(v.a23, p), red(v.a33, p), p);
    let b = [v.b12, v.b13, v.b22, v.b23, v.b33].map(|x| red(x, p));
    classify(&shape, &b, p)
}

/// Counts of each splitting type over all p⁸ elements of V(F_p).
pub fn fp_density_counts(p: u64) -> Result<BTreeMap<PairSplitting, u64>, VpairError> {
    if ![3, 5, 7].contains(&p) {
        return Err(VpairError::BadPrime(p));
    }
    let gs: Vec<[u64; 3]> =
        (0..p * p * p).map(|i| [i % p, (i / p) % p, i / (p * p)]).collect();
    let p5 = p.pow(5);
    let merged = gs
        .par_iter()
        .map(|g| {
            let shape = g_shape(g[0], g[1], g[2], p);
            let mut counts = BTreeMap::new();
            for j in 0..p5 {
                let mut r = j;
                let mut b = [0u64; 5];
                for x in b.iter_mut() {
                    *x = r % p;
                    r /= p;
                }
                *counts.entry(classify(&shape, &b, p)).or_insert(0u64) += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(merged)
}

// ---------------------------------------------------------------------------
// Fields from pairs

/// a + b√d with rational a, b.
#[derive(Clone, Debug)]
struct Kq {
    a: BigRational,
    b: BigRational,
}

impl Kq {
    fn rat(x: i64) -> Kq {
        Kq { a: BigRational::from_integer(x.into()), b: BigRational::zero() }
    }
    fn mul(&self, o: &Kq, d: &BigRational) -> Kq {
        Kq { a: &self.a * &o.a + d * &self.b * &o.b, b: &self.a * &o.b + &self.b * &o.a }
    }
    fn add(&self, o: &Kq) -> Kq {
        Kq { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn scale(&self, k: i64) -> Kq {
        let k = BigRational::from_integer(k.into());
        Kq { a: &self.a * &k, b: &self.b * &k }
    }
}

/// Biquadratic model (P, Q) of the quartic algebra of v: a root t of g over
/// K = Q(√d) cuts out a line on which B restricts to x² + βx + γ, so the
/// algebra is K(√(β² − 4γ)).
pub fn field_from_pair(v: &TernaryPair) -> Result<(BigInt, BigInt), VpairError> {
    let d = bdisc(&v.g());
    if d == 0 || is_square_i128(d) {
        return Err(VpairError::NotGeneric(format!("d = {d} is a square")));
    }
    let db = BigRational::from_integer(d.into());
    let two_a = BigRational::from_integer((2 * v.a22 as i128).into());
    let t = Kq { a: BigRational::from_integer((-v.a23 as i128).into()) / &two_a, b: BigRational::one() / &two_a };
    let beta = t.scale(v.b12).add(&Kq::rat(v.b13));
    let gamma = t.mul(&t, &db).scale(v.b22).add(&t.scale(v.b23)).add(&Kq::rat(v.b33));
    let delta = beta.mul(&beta, &db).add(&gamma.scale(-4));
    if delta.b.is_zero() {
        return Err(VpairError::NotGeneric("Kummer generator is rational".into()));
    }
    let k: BigInt = delta.a.denom().lcm(delta.b.denom());
    let k2 = BigRational::from_integer(&k * &k);
    let u: BigInt = (&delta.a * &k2).to_integer();
    let w: BigInt = (&delta.b * &k2).to_integer();
    let mut p: BigInt = -(&u * BigInt::from(2));
    let mut q: BigInt = &u * &u - &w * &w * BigInt::from(d);
    strip_square_content(&mut p, &mut q);
    if galois_type(&p, &q) == GaloisType::Reducible {
        return Err(VpairError::NotGeneric("quartic algebra is not a field".into()));
    }
    Ok((p, q))
}

/// Divides out k with k² | P and k⁴ | Q for small primes k.
fn strip_square_content(p: &mut BigInt, q: &mut BigInt) {
    for r in primes_up_to(1000) {
        let (r2, r4) = (BigInt::from(r * r), BigInt::from(r.pow(4)));
        while !q.is_zero() && (&*p % &r2).is_zero() && (&*q % &r4).is_zero() {
            *p /= &r2;
            *q /= &r4;
        }
    }
}

/// Field record of a generic pair; errors if the algebra is not a D4 field.
pub fn pair_field(v: &TernaryPair) -> Result<D4FieldRecord, VpairError> {
    let (p, q) = field_from_pair(v)?;
    let gt = galois_type(&p, &q);
    if gt != GaloisType::D4 {
        return Err(VpairError::NotGeneric(format!("Galois type {gt:?}")));
    }
    field_invariants(&p, &q).map_err(|e| VpairError::Field(e.to_string()))
}

/// Maximal iff (d, |q|) of v match (Disc K, |Disc L|/Disc K²).
pub fn is_maximal(v: &TernaryPair) -> Result<bool, VpairError> {
    let rec = pair_field(v)?;
    let (q, d) = invariants(v);
    Ok(d == rec.d as i128 && q.abs() == rec.q.abs())
}

/// C(v)/C(L, K) when it is an integer.
pub fn conductor_ratio(v: &TernaryPair, rec: &D4FieldRecord) -> Option<i128> {
    let c = v.conductor();
    (c % rec.cond_signed == 0).then(|| c / rec.cond_signed)
}

fn has_square_factor(n: i128) -> bool {
    let n = n.unsigned_abs();
    crate::arith::factor_u128(n).iter().any(|&(_, e)| e >= 2)
}

// ---------------------------------------------------------------------------
// Orbit census

/// Integer forms g ⊥ W (W positive definite) with disc g = d > 0.
fn orthogonal_forms(w: &BForm, d: i128) -> Vec<BForm> {
    let [a, b, c] = *w;
    let dw = bdisc(w);
    let rho = -(dw as f64) * d as f64 / 4.0;
    let gmod = rho.sqrt() / a as f64;
    let xmax = 2.0 * rho.sqrt() / ((-dw) as f64).sqrt();
    let ymax = gmod + xmax * b.abs() as f64 / (2.0 * a as f64);
    let amax = (a as f64 * (2.0 * a as f64 * ymax + b.abs() as f64 * xmax) / (-dw) as f64).ceil() as i128 + 1;
    let mut out = Vec::new();
    for ga in -amax..=amax {
        let centre = ga as f64 * b as f64 / a as f64;
        let lo = (centre - xmax).floor() as i128 - 1;
        let hi = (centre + xmax).ceil() as i128 + 1;
        for gb in lo..=hi {
            let num = b * gb - 2 * c * ga;
            if num % (2 * a) != 0 {
                continue;
            }
            let g = [ga, gb, num / (2 * a)];
            if bdisc(&g) == d {
                out.push(g);
            }
        }
    }
    out
}

/// Solves J(g, H) = target and ⟨g, H⟩ = s over Z.
fn solve_jacobian(g: &BForm, target: &BForm, s: i128) -> Option<BForm> {
    let [a, b, c] = *g;
    // rows: coefficients of (A, B, C)
    let rows: [([i128; 3], i128); 4] = [
        ([-b, a, 0], target[0]),
        ([-2 * c, 0, 2 * a], target[1]),
        ([0, -c, b], target[2]),
        ([-2 * c, b, -2 * a], s),
    ];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let m = [rows[i].0, rows[j].0, rows[3].0];
        let det = det3(&m);
        if det == 0 {
            continue;
        }
        let rhs = [rows[i].1, rows[j].1, rows[3].1];
        let mut sol = [0i128; 3];
        for (k, x) in sol.iter_mut().enumerate() {
            let mut mk = m;
            for r in 0..3 {
                mk[r][k] = rhs[r];
            }
            let num = det3(&mk);
            if num % det != 0 {
                return None;
            }
            *x = num / det;
        }
        return (jacobian(g, &sol) == *target && pairing(g, &sol) == s).then_some(sol);
    }
    None
}

fn push_with_ell(out: &mut Vec<TernaryPair>, g: BForm, h: BForm) {
    for l1 in 0..2 {
        for l2 in 0..2 {
            if let Some(v) = TernaryPair::from_parts(g, [l1, l2], h) {
                out.push(v);
            }
        }
    }
}

/// Pairs covering every orbit with discriminant d < 0 and 0 < q ≤ q_bound.
fn candidates_negative(d: i128, q_bound: i128) -> Vec<TernaryPair> {
    let mut out = Vec::new();
    let qb = q_bound as f64;
    let ad = d.abs() as f64;
    for g in reduced_definite_forms(d) {
        let [a, b, c] = g;
        let (af, bf) = (a as f64, b as f64);
        let xmax = 2.0 * (qb / ad).sqrt();
        let ymax = qb.sqrt() / af + xmax * bf / (2.0 * af);
        let amax = (af * (4.0 * ad + bf * xmax + 2.0 * af * ymax) / ad).ceil() as i128 + 1;
        for ha in -amax..=amax {
            let bc = ha as f64 * bf / af;
            let cc = ha as f64 * c as f64 / af;
            for hb in (bc - xmax).floor() as i128 - 1..=(bc + xmax).ceil() as i128 + 1 {
                for hc in (cc - ymax).floor() as i128 - 1..=(cc + ymax).ceil() as i128 + 1 {
                    let h = [ha, hb, hc];
                    let s = pairing(&g, &h);
                    if s < 0 || s >= 4 * d.abs() {
                        continue;
                    }
                    let q = bres(&g, &h);
                    if q > 0 && q <= q_bound {
                        push_with_ell(&mut out, g, h);
                    }
                }
            }
        }
    }
    out
}

/// Pairs covering every orbit with discriminant d > 0 and invariant q.
fn candidates_positive(d: i128, q: i128) -> Vec<TernaryPair> {
    let mut out = Vec::new();
    let wdisc = if q > 0 { -4 * d * q } else { 4 * q };
    for w in reduced_definite_forms(wdisc) {
        for g in orthogonal_forms(&w, d) {
            for sigma in [1, -1] {
                let target = scale(&w, sigma);
                for s in 0..4 * d {
                    let h = if q > 0 {
                        let num = add(&target, &scale(&g, s));
                        if num.iter().any(|x| x % d != 0) {
                            continue;
                        }
                        num.map(|x| x / d)
                    } else {
                        match solve_jacobian(&g, &target, s) {
                            Some(h) => h,
                            None => continue,
                        }
                    };
                    if bres(&g, &h) == q {
                        push_with_ell(&mut out, g, h);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct OrbitCensus {
    /// One record per maximal generic orbit, sorted by conductor.
    pub records: Vec<D4FieldRecord>,
    pub orbits: usize,
    pub generic: usize,
    pub maximal: usize,
    /// Maximal orbits violating Disc T = d or Nm disc = |q|.
    pub invariant_violations: Vec<TernaryPair>,
    /// Nonmaximal generic orbits without p² | C(v)/C(L,K).
    pub divisibility_violations: Vec<TernaryPair>,
    /// Distinct maximal orbits giving isomorphic fields.
    pub duplicate_fields: usize,
}

/// Every G(Z)-orbit with |q| ≤ q_bound, |d| ≤ d_bound, canonicalized; the
/// maximal generic ones mapped to fields.
pub fn orbit_census(q_bound: u64, d_bound: u64) -> Result<OrbitCensus, VpairError> {
    if q_bound.saturating_mul(d_bound) > 100_000 {
        return Err(VpairError::TooLarge(q_bound * d_bound));
    }
    let (qb, db) = (q_bound as i128, d_bound as i128);
    let mut jobs: Vec<(i128, i128)> = Vec::new();
    for d in -db..=db {
        if d == 0 || !matches!(d.rem_euclid(4), 0 | 1) || is_square_i128(d) {
            continue;
        }
        if d < 0 {
            jobs.push((d, 0));
        } else {
            for q in -qb..=qb {
                if q != 0 && matches!(q.rem_euclid(4), 0 | 1) {
                    jobs.push((d, q));
                }
            }
        }
    }
    let orbits: BTreeSet<TernaryPair> = jobs
        .par_iter()
        .flat_map_iter(|&(d, q)| {
            let cands = if d < 0 { candidates_negative(d, qb) } else { candidates_positive(d, q) };
            cands.into_iter().map(|v| canonical_form(&v).expect("nondegenerate candidate"))
        })
        .collect();
    let orbits: Vec<TernaryPair> = orbits.into_iter().collect();

    struct Outcome {
        v: TernaryPair,
        rec: Option<D4FieldRecord>,
        maximal: bool,
        invariant_ok: bool,
        divisibility_ok: bool,
    }
    let outcomes: Vec<Outcome> = orbits
        .par_iter()
        .filter_map(|v| {
            let rec = pair_field(v).ok()?;
            let (q, d) = invariants(v);
            // the ring of v is maximal iff Disc(v) = Disc(L)
            let ring_maximal = q * d * d == rec.disc_l;
            let matches = d == rec.d as i128 && q.abs() == rec.q.abs();
            let divisibility_ok = ring_maximal || conductor_ratio(v, &rec).is_some_and(has_square_factor);
            Some(Outcome { v: *v, maximal: ring_maximal, invariant_ok: ring_maximal == matches, divisibility_ok, rec: Some(rec) })
        })
        .collect();

    let mut out = OrbitCensus { orbits: orbits.len(), generic: outcomes.len(), ..Default::default() };
    for o in outcomes {
        if !o.invariant_ok {
            out.invariant_violations.push(o.v);
        }
        if !o.divisibility_ok {
            out.divisibility_violations.push(o.v);
        }
        if o.maximal {
            out.maximal += 1;
            let rec = o.rec.expect("generic");
            if out.records.iter().any(|r| isomorphic(r, &rec)) {
                out.duplicate_fields += 1;
            } else {
                out.records.push(rec);
            }
        }
    }
    out.records.sort_by_key(|r| r.sort_key());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Monte Carlo at a prime

#[derive(Debug, Clone, Default)]
pub struct CentralInertiaSample {
    pub draws: u64,
    /// Draws of splitting type ((1²1²),(11)) that gave a D4 field.
    pub accepted: u64,
    pub maximal: u64,
    /// Among maximal ones: p split / inert in the quadratic field Q(√Q).
    pub phi_split: u64,
    pub phi_inert: u64,
    /// Maximal samples where the two φ-splitting computations disagree.
    pub phi_mismatch: u64,
}

/// Samples V(Z_p) conditioned on splitting type ((1²1²),(11)), recording
/// p-maximality and the splitting of p in the φ-quadratic field.
pub fn central_inertia_sample(p: u64, target: u64, seed: u64) -> Result<CentralInertiaSample, VpairError> {
    if p == 2 || !crate::arith::is_prime(p) {
        return Err(VpairError::BadPrime(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pk = (p as i64).pow(4);
    let want = PairSplitting::Type(SplittingPair::new(QuarticType::T1sq1sq, QuadType::Split));
    let mut out = CentralInertiaSample::default();
    while out.accepted < target {
        out.draws += 1;
        let v = TernaryPair::from_array(std::array::from_fn(|_| {
            rng.gen_range(0..pk) + pk * rng.gen_range(-100..100)
        }));
        if splitting_mod_p(&v, p) != want {
            continue;
        }
        let Ok((pp, qq)) = field_from_pair(&v) else { continue };
        if galois_type(&pp, &qq) != GaloisType::D4 {
            continue;
        }
        out.accepted += 1;
        let order = order_from_biquadratic(&pp, &qq).map_err(|e| VpairError::Field(e.to_string()))?;
        let (omax, _) = order.p_maximal(p);
        let (q, d) = invariants(&v);
        let vdisc = BigInt::from(q) * BigInt::from(d) * BigInt::from(d);
        if valuation(&vdisc, p) != valuation(&omax.disc, p) {
            continue;
        }
        out.maximal += 1;
        // field side: p in Q(√Q)
        let e = valuation(&qq, p);
        let unit = &qq / BigInt::from(p).pow(e);
        let field_split = e % 2 == 0 && legendre(reduce_mod(&unit, p), p) == 1;
        // pair side: unit part of q/p²
        let qp = q / (p as i128 * p as i128);
        let pair_split = kronecker(qp.rem_euclid(p as i128), p as i128) == 1;
        if field_split != pair_split || e % 2 == 1 {
            out.phi_mismatch += 1;
        }
        if field_split {
            out.phi_split += 1;
        } else {
            out.phi_inert += 1;
        }
    }
    Ok(out)
}

fn reduce_mod(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn x4m2() -> TernaryPair {
        TernaryPair { a22: 1, a33: -2, b23: 1, ..Default::default() }
    }

    fn split_pair(s: i64, t: i64) -> TernaryPair {
        TernaryPair { a23: 1, b22: s, b33: t, ..Default::default() }
    }

    // Symbolic expansion of 4·det(Ax + By) for A, B as in V.
    fn resolvent_oracle(v: &TernaryPair) -> (i128, i128, i128) {
        let [a22, a23, a33, b12, b13, b22, b23, b33] = v.to_array().map(|x| x as i128);
        // 4·det with half-entries: expand det of [[y, b12y/2, b13y/2],[.., a22x+b22y, (a23x+b23y)/2],[.., .., a33x+b33y]]
        // times 4, collecting monomials in x, y.
        let x2y = 4 * a22 * a33 - a23 * a23;
        let xy2 = 4 * (a22 * b33 + a33 * b22) - 2 * a23 * b23 - (b12 * b12 * a33 + b13 * b13 * a22 - b12 * b13 * a23);
        let y3 = 4 * b22 * b33 - b23 * b23 - (b12 * b12 * b33 + b13 * b13 * b22 - b12 * b13 * b23);
        (x2y, xy2, y3)
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(resolvent(&x4m2()), ResolventCubic { b: -8, c: 0, d: -1 });
        assert_eq!(resolvent(&split_pair(3, 5)), ResolventCubic { b: -1, c: 0, d: 60 });
        assert_eq!(resolvent(&TernaryPair::default()), ResolventCubic { b: 0, c: 0, d: 0 });
        assert_eq!(invariants(&x4m2()), (-32, 8));
        assert_eq!(invariants(&split_pair(1, 1)), (16, 1));
        assert_eq!(invariants(&TernaryPair::default()), (0, 0));
    }

    #[test]
    fn group_examples() {
        let v = x4m2();
        assert_eq!(act(&GroupElement::identity(), &v).unwrap(), v);
        let shear = GroupElement { n: 3, ..GroupElement::identity() };
        let w = act(&shear, &v).unwrap();
        assert_eq!((w.b22, w.b23, w.b33), (3, 1, -6));
        assert_eq!(invariants(&w), invariants(&v));
        let bad = GroupElement { s: [[2, 0], [0, 1]], ..GroupElement::identity() };
        assert!(act(&bad, &v).is_err());
    }

    #[test]
    fn splitting_examples() {
        let five = splitting_mod_p(&x4m2(), 5);
        assert_eq!(five, PairSplitting::Type(SplittingPair::new(QuarticType::T4, QuadType::Inert)));
        let sp = splitting_mod_p(&split_pair(1, 1), 5);
        assert_eq!(sp, PairSplitting::Type(SplittingPair::new(QuarticType::T1111, QuadType::Split)));
        let zero_a = TernaryPair { a22: 5, a23: 10, a33: -15, b22: 1, ..Default::default() };
        assert_eq!(splitting_mod_p(&zero_a, 5), PairSplitting::Degenerate);
    }

    // Counts points of A = B = 0 in P²(F_{p^k}) by brute force over F_p-rational
    // and quadratic points, for the x⁴ − 2 pair at 5: no point over F_5 or F_25.
    #[test]
    fn x4m2_has_no_small_points_mod_5() {
        let p = 5i64;
        for y in 0..p {
            for z in 0..p {
                for x in 0..p {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let a = (y * y - 2 * z * z).rem_euclid(p);
                    let b = (x * x + y * z).rem_euclid(p);
                    assert!(!(a == 0 && b == 0));
                }
            }
        }
    }

    #[test]
    fn density_counts_p3() {
        let c = fp_density_counts(3).unwrap();
        assert_eq!(c.values().sum::<u64>(), 6561);
        let get = |q, k| c[&PairSplitting::Type(SplittingPair::new(q, k))];
        assert_eq!(get(QuarticType::T1111, QuadType::Split), 324);
        assert_eq!(get(QuarticType::T112, QuadType::Split), 648);
        assert_eq!(c[&PairSplitting::Degenerate], 243);
    }

    #[test]
    fn field_from_pair_examples() {
        let (p, q) = field_from_pair(&x4m2()).unwrap();
        let rec = field_invariants(&p, &q).unwrap();
        let base = field_invariants(&BigInt::from(0), &BigInt::from(-2)).unwrap();
        assert!(isomorphic(&rec, &base));
        assert!(is_maximal(&x4m2()).unwrap());
        let sq = TernaryPair { a22: 1, a33: -4, b23: 1, ..Default::default() };
        assert!(matches!(field_from_pair(&sq), Err(VpairError::NotGeneric(_))));
    }

    #[test]
    fn nonmaximal_scaled_pair() {
        // θ² = −9√2 still generates Q(2^{1/4}), through an index-3 ring
        let v = TernaryPair { b23: 9, ..x4m2() };
        assert!(!is_maximal(&v).unwrap());
        assert!(isomorphic(&pair_field(&v).unwrap(), &pair_field(&x4m2()).unwrap()));
        let rec = pair_field(&v).unwrap();
        let ratio = conductor_ratio(&v, &rec).unwrap();
        assert_eq!(ratio % 9, 0, "ratio {ratio}");
    }

    #[test]
    fn resolvent_matches_symbolic_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let v = TernaryPair::from_array(std::array::from_fn(|_| rng.gen_range(-20..=20)));
            let r = resolvent(&v);
            assert_eq!((r.b, r.c, r.d), resolvent_oracle(&v));
            let (q, d) = invariants(&v);
            let (g, h) = (v.g(), v.h());
            assert_eq!(d, bdisc(&g));
            assert_eq!(q, bres(&g, &h));
            assert_eq!(bdisc(&jacobian(&g, &h)), 4 * q);
        }
    }

    #[test]
    fn canonical_examples() {
        let v = TernaryPair { a22: 2, a23: 1, a33: -3, b12: 1, b13: 0, b22: 4, b23: -1, b33: 2 };
        let shear = GroupElement { n: 7, ..GroupElement::identity() };
        let c = canonical_form(&v).unwrap();
        assert_eq!(canonical_form(&act(&shear, &v).unwrap()).unwrap(), c);
        assert_eq!(canonical_form(&c).unwrap(), c);
        assert!(canonical_form(&TernaryPair { a22: 1, a23: 2, a33: 1, ..Default::default() }).is_err());
    }

    #[test]
    fn random_orbits_canonicalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let v = TernaryPair::from_array(std::array::from_fn(|_| rng.gen_range(-6..=6)));
            let (q, d) = invariants(&v);
            if d == 0 || (d > 0 && q == 0) {
                continue;
            }
            let c = canonical_form(&v).unwrap();
            for _ in 0..5 {
                let g = GroupElement::random(&mut rng, 3);
                let w = act(&g, &v).unwrap();
                assert_eq!(canonical_form(&w).unwrap(), c, "v = {v:?}, g = {g:?}");
            }
            done += 1;
        }
    }

    #[test]
    fn orbit_census_small() {
        let c = orbit_census(32, 8).unwrap();
        let base = field_invariants(&BigInt::from(0), &BigInt::from(-2)).unwrap();
        assert_eq!(c.records.iter().filter(|r| isomorphic(r, &base)).count(), 1);
        assert!(c.invariant_violations.is_empty());
        assert!(c.divisibility_violations.is_empty());
        assert_eq!(c.duplicate_fields, 0);
        assert!(orbit_census(4, 4).unwrap().records.is_empty());
    }

    #[test]
    fn splitting_matches_fields() {
        let c = orbit_census(200, 20).unwrap();
        assert!(c.records.len() > 20);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 150 {
            let v = TernaryPair::from_array(std::array::from_fn(|_| rng.gen_range(-9..=9)));
            let Ok(true) = is_maximal(&v) else { continue };
            let rec = pair_field(&v).unwrap();
            for p in [2u64, 3, 5, 7, 11, 13] {
                let PairSplitting::Type(s) = splitting_mod_p(&v, p) else { panic!("maximal pair degenerate at {p}") };
                assert_eq!(s, crate::quartic::splitting_at(&rec, p).unwrap(), "v = {v:?} p = {p}");
            }
            checked += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn action_is_associative_and_equivariant(
            c in proptest::array::uniform8(-8i64..=8),
            s1 in 0u64..1000, s2 in 0u64..1000,
        ) {
            let v = TernaryPair::from_array(c);
            let g = GroupElement::random(&mut ChaCha8Rng::seed_from_u64(s1), 3);
            let h = GroupElement::random(&mut ChaCha8Rng::seed_from_u64(s2), 3);
            let lhs = act(&g, &act(&h, &v).unwrap()).unwrap();
            let rhs = act(&g.compose(&h), &v).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(resolvent(&act(&g, &v).unwrap()), resolvent(&v).act(g.eps2, g.n));
            prop_assert_eq!(invariants(&lhs), invariants(&v));
        }

        #[test]
        fn jacobian_is_covariant(
            f in proptest::array::uniform3(-20i128..=20),
            g in proptest::array::uniform3(-20i128..=20),
            seed in 0u64..10_000,
        ) {
            let s = GroupElement::random(&mut ChaCha8Rng::seed_from_u64(seed), 4).s;
            let m = s.map(|r| r.map(|x| x as i128));
            let lhs = jacobian(&bapply(&f, &m), &bapply(&g, &m));
            let rhs = scale(&bapply(&jacobian(&f, &g), &m), mdet(&m));
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(pairing(&bapply(&f, &m), &bapply(&g, &m)), pairing(&f, &g));
        }
    }
}
