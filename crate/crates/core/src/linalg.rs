//! Integer matrices in Hermite normal form, linear algebra over F_p, and the
//! local decomposition of finite commutative F_p-algebras.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("algebra is not commutative")]
    NonCommutative,
    #[error("algebra is not associative")]
    NonAssociative,
    #[error("unit does not act as the identity")]
    BadUnit,
    #[error("dimension {0} outside 1..=8")]
    Dimension(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, v: &[i64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        IntMatrix { rows, cols, entries: v.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            entries.extend(row.iter().cloned());
        }
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = &out.entries[i * other.cols + j] + a * other.get(k, j);
                    out.entries[i * other.cols + j] = v;
                }
            }
        }
        Ok(out)
    }

    /// Bareiss fraction-free determinant.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i)).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    /// Row Hermite normal form: returns (H, U) with H = U·M, U unimodular,
    /// H in row echelon form with positive pivots and entries above each
    /// pivot reduced into [0, pivot). Zero rows sit at the bottom.
    pub fn hnf(&self) -> (IntMatrix, IntMatrix) {
        let (m, n) = (self.rows, self.cols);
        let mut h: Vec<Vec<BigInt>> = (0..m).map(|i| self.row(i)).collect();
        let mut u: Vec<Vec<BigInt>> = (0..m).map(|i| IntMatrix::identity(m).row(i)).collect();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            // Euclid down the column until one nonzero entry remains at row r.
            loop {
                let piv = (r..m)
                    .filter(|&i| !h[i][c].is_zero())
                    .min_by(|&a, &b| h[a][c].abs().cmp(&h[b][c].abs()));
                let Some(pi) = piv else { break };
                h.swap(r, pi);
                u.swap(r, pi);
                let mut done = true;
                for i in r + 1..m {
                    if h[i][c].is_zero() {
                        continue;
                    }
                    let q = h[i][c].div_floor(&h[r][c]);
                    for j in 0..n {
                        let t = &h[i][j] - &q * &h[r][j];
                        h[i][j] = t;
                    }
                    for j in 0..m {
                        let t = &u[i][j] - &q * &u[r][j];
                        u[i][j] = t;
                    }
                    if !h[i][c].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if h[r][c].is_zero() {
                continue;
            }
            if h[r][c].is_negative() {
                for j in 0..n {
                    h[r][j] = -&h[r][j];
                }
                for j in 0..m {
                    u[r][j] = -&u[r][j];
                }
            }
            for i in 0..r {
                let q = h[i][c].div_floor(&h[r][c]);
                if q.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = &h[i][j] - &q * &h[r][j];
                    h[i][j] = t;
                }
                for j in 0..m {
                    let t = &u[i][j] - &q * &u[r][j];
                    u[i][j] = t;
                }
            }
            r += 1;
        }
        (IntMatrix::from_rows(&h), IntMatrix::from_rows(&u))
    }
}

/// Basis (nonzero HNF rows) of the Z-span of the given vectors.
pub fn lattice_basis(vectors: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let (h, _) = IntMatrix::from_rows(vectors).hnf();
    (0..h.rows).map(|i| h.row(i)).filter(|r| r.iter().any(|x| !x.is_zero())).collect()
}

// ---------------------------------------------------------------------------
// F_p arithmetic

#[inline]
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        (a as u128 + p as u128 - b as u128) as u64
    }
}

pub fn powm(mut b: u64, mut e: u128, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, b, p);
        }
        b = mulm(b, b, p);
        e >>= 1;
    }
    r
}

pub fn invm(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    powm(a, (p - 2) as u128, p)
}

pub fn reduce_bigint(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.iter_u64_digits().next().unwrap_or(0)
}

/// Row-reduces `m` in place over F_p; returns pivot columns.
pub fn fp_rref(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pi) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pi);
        let inv = invm(m[r][c], p);
        for j in 0..cols {
            m[r][j] = mulm(m[r][j], inv, p);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    let t = mulm(f, m[r][j], p);
                    m[i][j] = subm(m[i][j], t, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of {x : M·x = 0} for an r×c matrix M.
pub fn fp_kernel(m: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut a: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let pivots = fp_rref(&mut a, p);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = subm(0, a[i][f], p);
            }
            v
        })
        .collect()
}

pub fn fp_rank(vectors: &[Vec<u64>], p: u64) -> usize {
    let mut a = vectors.to_vec();
    fp_rref(&mut a, p).len()
}

/// Row basis of the span of `vectors`.
pub fn fp_span_basis(vectors: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut a = vectors.to_vec();
    let k = fp_rref(&mut a, p).len();
    a.truncate(k);
    a
}

// ---------------------------------------------------------------------------
// Polynomials over F_p, coefficient vectors low degree first.

pub fn poly_trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = addm(out[i + j], mulm(x, y, p), p);
        }
    }
    poly_trim(out)
}

pub fn poly_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = poly_trim(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r = poly_trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = invm(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = mulm(*r.last().unwrap(), inv, p);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = subm(r[shift + j], mulm(c, bj, p), p);
        }
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}

pub fn poly_monic(f: &[u64], p: u64) -> Vec<u64> {
    let f = poly_trim(f.to_vec());
    if f.is_empty() {
        return f;
    }
    let inv = invm(*f.last().unwrap(), p);
    f.iter().map(|&c| mulm(c, inv, p)).collect()
}

pub fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = poly_trim(a.to_vec());
    let mut b = poly_trim(b.to_vec());
    while !b.is_empty() {
        let (_, r) = poly_divrem(&a, &b, p);
        a = b;
        b = r;
    }
    poly_monic(&a, p)
}

pub fn poly_powmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let (_, mut b) = poly_divrem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_divrem(&poly_mul(&result, &b, p), m, p).1;
        }
        b = poly_divrem(&poly_mul(&b, &b, p), m, p).1;
        e >>= 1;
    }
    result
}

pub fn poly_eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0, |acc, &c| addm(mulm(acc, x, p), c, p))
}

/// Roots in F_p of a polynomial, assumed squarefree with all roots rational.
pub fn split_roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = poly_monic(f, p);
    if f.len() <= 1 {
        return Vec::new();
    }
    if p <= 1 << 12 {
        return (0..p).filter(|&x| poly_eval(&f, x, p) == 0).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p);
    let mut out = Vec::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        match g.len() {
            0 | 1 => {}
            2 => out.push(subm(0, g[0], p)),
            _ => loop {
                let a = rng.gen_range(0..p);
                let h = poly_powmod(&[a, 1], ((p - 1) / 2) as u128, &g, p);
                let mut hm1 = h.clone();
                if hm1.is_empty() {
                    hm1.push(0);
                }
                hm1[0] = subm(hm1[0], 1, p);
                let d = poly_gcd(&g, &hm1, p);
                if d.len() > 1 && d.len() < g.len() {
                    let (q, _) = poly_divrem(&g, &d, p);
                    stack.push(d);
                    stack.push(poly_monic(&q, p));
                    break;
                }
            },
        }
    }
    out.sort_unstable();
    out
}

/// All roots of f in F_p (for arbitrary f): roots of gcd(f, x^p − x).
pub fn roots_mod_p(f: &[u64], p: u64) -> Vec<u64> {
    let f = poly_monic(f, p);
    if f.len() <= 1 {
        return Vec::new();
    }
    if p <= 1 << 12 {
        return (0..p).filter(|&x| poly_eval(&f, x, p) == 0).collect();
    }
    let xp = poly_powmod(&[0, 1], p as u128, &f, p);
    let mut g = xp;
    while g.len() < 2 {
        g.push(0);
    }
    g[1] = subm(g[1], 1, p);
    let d = poly_gcd(&f, &poly_trim(g), p);
    split_roots(&d, p)
}

// ---------------------------------------------------------------------------
// Finite commutative algebras

/// A commutative F_p-algebra of dimension <= 8 given by structure constants
/// `c[(i*dim + j)*dim + k]` with e_i·e_j = Σ_k c_ijk e_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpAlgebra {
    pub p: u64,
    pub dim: usize,
    pub structure_constants: Vec<u64>,
    pub unit: Vec<u64>,
}

impl FpAlgebra {
    pub fn new(p: u64, dim: usize, sc: Vec<u64>, unit: Vec<u64>) -> Result<Self, LinalgError> {
        if dim == 0 || dim > 8 {
            return Err(LinalgError::Dimension(dim));
        }
        if sc.len() != dim * dim * dim || unit.len() != dim {
            return Err(LinalgError::Shape("structure constants or unit".into()));
        }
        let a = FpAlgebra {
            p,
            dim,
            structure_constants: sc.into_iter().map(|x| x % p).collect(),
            unit: unit.into_iter().map(|x| x % p).collect(),
        };
        a.validate()?;
        Ok(a)
    }

    /// F_p[x]/(f) for monic f given low degree first (leading 1 included).
    pub fn from_polynomial(p: u64, f: &[u64]) -> Result<Self, LinalgError> {
        let n = f.len() - 1;
        if n == 0 || n > 8 {
            return Err(LinalgError::Dimension(n));
        }
        let f: Vec<u64> = f.iter().map(|x| x % p).collect();
        let mut sc = vec![0u64; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let mut mono = vec![0u64; i + j + 1];
                mono[i + j] = 1;
                let (_, r) = poly_divrem(&mono, &f, p);
                for (k, &c) in r.iter().enumerate() {
                    sc[(i * n + j) * n + k] = c;
                }
            }
        }
        let mut unit = vec![0u64; n];
        unit[0] = 1;
        FpAlgebra::new(p, n, sc, unit)
    }

    fn c(&self, i: usize, j: usize, k: usize) -> u64 {
        self.structure_constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let (n, p) = (self.dim, self.p);
        let mut out = vec![0u64; n];
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0 {
                    continue;
                }
                let xy = mulm(x[i], y[j], p);
                for k in 0..n {
                    let c = self.c(i, j, k);
                    if c != 0 {
                        out[k] = addm(out[k], mulm(xy, c, p), p);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &[u64], mut e: u128) -> Vec<u64> {
        let mut r = self.unit.clone();
        let mut b = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    fn basis(&self, i: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.dim];
        v[i] = 1;
        v
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c(i, j, k) != self.c(j, i, k) {
                        return Err(LinalgError::NonCommutative);
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let eij = self.mul(&self.basis(i), &self.basis(j));
                for k in 0..n {
                    let l = self.mul(&eij, &self.basis(k));
                    let r = self.mul(&self.basis(i), &self.mul(&self.basis(j), &self.basis(k)));
                    if l != r {
                        return Err(LinalgError::NonAssociative);
                    }
                }
            }
        }
        for i in 0..n {
            if self.mul(&self.unit, &self.basis(i)) != self.basis(i) {
                return Err(LinalgError::BadUnit);
            }
        }
        Ok(())
    }

    /// Matrix of x ↦ x^(p^k) with columns the images of the basis.
    fn frobenius_columns(&self, k: u32) -> Vec<Vec<u64>> {
        let q = (self.p as u128).pow(k);
        (0..self.dim).map(|i| self.pow(&self.basis(i), q)).collect()
    }

    /// Basis of the nilradical: the kernel of x ↦ x^(p^k) with p^k >= dim.
    pub fn radical(&self) -> Vec<Vec<u64>> {
        let (n, p) = (self.dim, self.p);
        let mut k = 1u32;
        while (p as u128).pow(k) < n as u128 {
            k += 1;
        }
        let cols = self.frobenius_columns(k);
        let rows: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
        fp_kernel(&rows, n, p)
    }

    /// The (f_i, e_i) of each local factor, sorted.
    pub fn decompose(&self) -> Vec<(usize, usize)> {
        let (n, p) = (self.dim, self.p);
        // p^k >= n kills the nilradical.
        let mut k = 1u32;
        while (p as u128).pow(k) < n as u128 {
            k += 1;
        }
        let frob_k = self.frobenius_columns(k);
        // Image of the iterated Frobenius is the maximal étale subalgebra.
        let etale = fp_span_basis(&frob_k, p);
        // Fixed points of Frobenius: a split étale algebra F_p^m.
        let frob = self.frobenius_columns(1);
        let mut rows = vec![vec![0u64; n]; n];
        for (j, col) in frob.iter().enumerate() {
            for i in 0..n {
                rows[i][j] = subm(col[i], if i == j { 1 } else { 0 }, p);
            }
        }
        let fixed = fp_kernel(&rows, n, p);

        let mut idems: Vec<Vec<u64>> = vec![self.unit.clone()];
        for b in &fixed {
            let mut next = Vec::new();
            for e in &idems {
                next.extend(self.split_idempotent(e, b));
            }
            idems = next;
        }

        let mut out: Vec<(usize, usize)> = idems
            .iter()
            .map(|e| {
                let whole: Vec<Vec<u64>> = (0..n).map(|i| self.mul(e, &self.basis(i))).collect();
                let part: Vec<Vec<u64>> = etale.iter().map(|x| self.mul(e, x)).collect();
                let d = fp_rank(&whole, p);
                let f = fp_rank(&part, p);
                (f, d / f)
            })
            .collect();
        out.sort_unstable();
        out
    }

    // Splits the idempotent e along the eigenvalues of e·b (b Frobenius-fixed).
    fn split_idempotent(&self, e: &[u64], b: &[u64]) -> Vec<Vec<u64>> {
        let p = self.p;
        let z = self.mul(e, b);
        // minimal polynomial of z inside the ring eA (identity e)
        let mut powers: Vec<Vec<u64>> = vec![e.to_vec()];
        let minpoly = loop {
            let next = self.mul(powers.last().unwrap(), &z);
            let deg = powers.len();
            // solve Σ c_i powers[i] = next
            let mut rows = vec![vec![0u64; deg + 1]; self.dim];
            for i in 0..self.dim {
                for (j, pw) in powers.iter().enumerate() {
                    rows[i][j] = pw[i];
                }
                rows[i][deg] = next[i];
            }
            let ker = fp_kernel(&rows, deg + 1, p);
            if let Some(v) = ker.iter().find(|v| v[deg] != 0) {
                let inv = invm(v[deg], p);
                let poly: Vec<u64> = v.iter().map(|&c| mulm(c, inv, p)).collect();
                break poly;
            }
            powers.push(next);
        };
        let roots = split_roots(&minpoly, p);
        if roots.len() <= 1 {
            return vec![e.to_vec()];
        }
        roots
            .iter()
            .map(|&r| {
                let mut acc = e.to_vec();
                for &s in roots.iter().filter(|&&s| s != r) {
                    let inv = invm(subm(r, s, p), p);
                    let factor: Vec<u64> = z
                        .iter()
                        .zip(e)
                        .map(|(&zi, &ei)| mulm(subm(zi, mulm(s, ei, p), p), inv, p))
                        .collect();
                    acc = self.mul(&acc, &factor);
                }
                acc
            })
            .collect()
    }
}
