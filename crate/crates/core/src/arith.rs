//! Elementary number theory: factorization, Möbius, Kronecker symbols and
//! fundamental discriminants.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("expected a positive integer, got {0}")]
    NotPositive(String),
    #[error("integer {0} exceeds the 128-bit factorization cap")]
    TooLarge(String),
    #[error("zero is not a discriminant")]
    ZeroDiscriminant,
}

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigInt,
    pub parts: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.parts.iter().map(|&(p, _)| p)
    }

    pub fn exponent(&self, p: u128) -> u32 {
        self.parts.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    pub fn omega(&self) -> usize {
        self.parts.len()
    }
}

/// Factors `n >= 1` of at most 128 bits.
pub fn factor(n: &BigInt) -> Result<Factorization, ArithError> {
    if !n.is_positive() {
        return Err(ArithError::NotPositive(n.to_string()));
    }
    let v = n.to_u128().ok_or_else(|| ArithError::TooLarge(n.to_string()))?;
    Ok(Factorization { value: n.clone(), parts: factor_u128(v) })
}

/// Sorted `(prime, exponent)` pairs; `factor_u128(1)` is empty.
pub fn factor_u128(mut n: u128) -> Vec<(u128, u32)> {
    assert!(n > 0, "factor_u128(0)");
    let mut out: Vec<(u128, u32)> = Vec::new();
    let push = |p: u128, e: u32, out: &mut Vec<(u128, u32)>| {
        if let Some(slot) = out.iter_mut().find(|(q, _)| *q == p) {
            slot.1 += e;
        } else {
            out.push((p, e));
        }
    };
    for p in [2u128, 3, 5] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            push(p, e, &mut out);
        }
    }
    // wheel mod 30 up to 2^20
    let incs = [4u128, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u128;
    let mut i = 0;
    while p <= (1 << 20) && p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            push(p, e, &mut out);
        }
        p += incs[i];
        i = (i + 1) % 8;
    }
    if n > 1 {
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u128(m) {
                push(m, 1, &mut out);
                continue;
            }
            if let Some(r) = perfect_power_root(m) {
                let (root, k) = r;
                for _ in 0..k {
                    stack.push(root);
                }
                continue;
            }
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort_unstable();
    out
}

fn perfect_power_root(m: u128) -> Option<(u128, u32)> {
    for k in (2..=7u32).rev() {
        let r = iroot_u128(m, k);
        if r > 1 && r.checked_pow(k) == Some(m) {
            return Some((r, k));
        }
    }
    None
}

/// Floor of the k-th root.
pub fn iroot_u128(n: u128, k: u32) -> u128 {
    if n < 2 || k == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64) as u128;
    loop {
        match (r + 1).checked_pow(k) {
            Some(v) if v <= n => r += 1,
            _ => break,
        }
    }
    while r.checked_pow(k).map_or(true, |v| v > n) {
        r -= 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    iroot_u128(n, 2)
}

pub fn isqrt_i128(n: i128) -> i128 {
    assert!(n >= 0);
    isqrt_u128(n as u128) as i128
}

pub fn is_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt_i128(n);
    r * r == n
}

pub fn is_square_bigint(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    // double-and-add keeps everything below 2^128 when m < 2^127
    let (mut a, mut b) = (a % m, b % m);
    if m < (1u128 << 127) {
        let mut r = 0u128;
        while b > 0 {
            if b & 1 == 1 {
                r = (r + a) % m;
            }
            a = (a << 1) % m;
            b >>= 1;
        }
        return r;
    }
    let big = (BigInt::from(a) * BigInt::from(b)) % BigInt::from(m);
    big.to_u128().unwrap()
}

fn powmod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Miller–Rabin; the base set is a proof below 3.3e24 and a strong test above.
pub fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
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
    'outer: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn is_prime(n: u64) -> bool {
    is_prime_u128(n as u128)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Brent's variant with batched gcds.
fn pollard_rho(n: u128) -> u128 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut q) = (2u128, 2u128, 1u128, 1u128);
        let mut ys = 0u128;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
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

/// Kronecker symbol (D/n), with (D/2) read off D mod 8 and (D/-1) the sign.
pub fn kronecker(d: i128, n: i128) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut res = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            res = -res;
        }
    }
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = d.rem_euclid(8);
        if twos % 2 == 1 && (r == 3 || r == 5) {
            res = -res;
        }
    }
    // now n odd positive: Jacobi symbol (d/n)
    res * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i128, n: i128) -> i32 {
    assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

pub fn moebius(n: u64) -> Result<i32, ArithError> {
    if n == 0 {
        return Err(ArithError::NotPositive("0".into()));
    }
    let f = factor_u128(n as u128);
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

pub fn is_squarefree_u128(n: u128) -> bool {
    factor_u128(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_fundamental_discriminant(d: i128) -> Result<bool, ArithError> {
    if d == 0 {
        return Err(ArithError::ZeroDiscriminant);
    }
    if d == 1 {
        return Ok(false);
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        return Ok(is_squarefree_u128(d.unsigned_abs()));
    }
    if r == 0 {
        let m = d / 4;
        let mr = m.rem_euclid(4);
        return Ok((mr == 2 || mr == 3) && is_squarefree_u128(m.unsigned_abs()));
    }
    Ok(false)
}

/// Writes n = g²·m with m squarefree and returns (disc Q(√m), g).
/// `None` for zero and perfect squares.
pub fn quadratic_field_disc(n: i128) -> Option<(i128, u128)> {
    if n == 0 {
        return None;
    }
    let f = factor_u128(n.unsigned_abs());
    let mut m: i128 = n.signum();
    let mut g: u128 = 1;
    for &(p, e) in &f {
        if e % 2 == 1 {
            m *= p as i128;
        }
        g *= p.pow(e / 2);
    }
    if m == 1 {
        return None;
    }
    let disc = if m.rem_euclid(4) == 1 { m } else { 4 * m };
    Some((disc, g))
}

/// Squarefree part with sign: n = s·k² with s squarefree.
pub fn squarefree_part(n: i128) -> i128 {
    assert!(n != 0);
    let mut s = n.signum();
    for (p, e) in factor_u128(n.unsigned_abs()) {
        if e % 2 == 1 {
            s *= p as i128;
        }
    }
    s
}

/// Smallest-prime-factor sieve on 0..=n.
pub fn spf_sieve(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Fundamental discriminants with 1 < |D| <= bound, ordered by |D| then sign.
pub fn fundamental_discriminants(bound: u64) -> Vec<i64> {
    let spf = spf_sieve(bound as usize);
    let sqfree = |m: u64| -> bool {
        let mut m = m as usize;
        while m > 1 {
            let p = spf[m] as usize;
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        true
    };
    let mut out = Vec::new();
    for a in 3..=bound as i64 {
        for d in [-a, a] {
            let r = d.rem_euclid(4);
            let ok = if r == 1 {
                sqfree(a as u64)
            } else if r == 0 {
                let m = d / 4;
                let mr = m.rem_euclid(4);
                (mr == 2 || mr == 3) && sqfree((a / 4) as u64)
            } else {
                false
            };
            if ok {
                out.push(d);
            }
        }
    }
    out
}

/// Distinct prime divisors via a precomputed spf sieve.
pub fn prime_divisors_spf(mut m: u64, spf: &[u32]) -> Vec<u64> {
    let mut out = Vec::new();
    while m > 1 {
        let p = spf[m as usize] as u64;
        out.push(p);
        while m % p == 0 {
            m /= p;
        }
    }
    out
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g >= 0.
pub fn xgcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn modinv_i128(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = xgcd_i128(a.rem_euclid(m), m);
    if g != 1 {
        None
    } else {
        Some(x.rem_euclid(m))
    }
}

pub fn powmod_u64(b: u64, e: u64, m: u64) -> u64 {
    powmod(b as u128, e as u128, m as u128) as u64
}

/// Square root of `a` modulo an odd prime `p` (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powmod_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod_u64(a, (p + 1) / 4, p));
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod_u64(z, q, p);
    let mut t = powmod_u64(a, q, p);
    let mut r = powmod_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = (tt as u128 * tt as u128 % p as u128) as u64;
            i += 1;
        }
        let b = powmod_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = (b as u128 * b as u128 % p as u128) as u64;
        t = (t as u128 * c as u128 % p as u128) as u64;
        r = (r as u128 * b as u128 % p as u128) as u64;
    }
    Some(r)
}

/// p-adic valuation of a nonzero big integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub fn bigint_pow(b: i64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(b), e as usize)
}

pub fn one() -> BigInt {
    BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_factor(mut n: u128) -> Vec<(u128, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor(&BigInt::from(360)).unwrap().parts, vec![(2, 3), (3, 2), (5, 1)]);
        assert!(factor(&BigInt::from(1)).unwrap().parts.is_empty());
        assert_eq!(factor(&BigInt::from(2048)).unwrap().parts, vec![(2, 11)]);
        assert!(factor(&BigInt::from(0)).is_err());
        assert!(factor(&BigInt::from(-6)).is_err());
    }

    #[test]
    fn factor_matches_trial_division() {
        for n in 1..5000u128 {
            assert_eq!(factor_u128(n), naive_factor(n), "n = {n}");
        }
    }

    #[test]
    fn factor_large_semiprimes() {
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        assert_eq!(factor_u128(p * q), vec![(q, 1), (p, 1)]);
        let r = 18446744073709551557u128; // largest prime below 2^64
        assert_eq!(factor_u128(r * 3), vec![(3, 1), (r, 1)]);
        let big = 4_294_967_291u128 * 4_294_967_279u128 * 65_521u128;
        assert_eq!(factor_u128(big), vec![(65_521, 1), (4_294_967_279, 1), (4_294_967_291, 1)]);
        assert_eq!(factor_u128(1u128 << 100), vec![(2, 100)]);
        let sq = 1_000_000_007u128 * 1_000_000_007u128 * 1_000_000_009u128;
        assert_eq!(factor_u128(sq), vec![(1_000_000_007, 2), (1_000_000_009, 1)]);
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(8, 3), -1);
        for d in [-23i128, 5, 12, -4, 8] {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(12, 2), 0);
    }

    #[test]
    fn kronecker_agrees_with_residue_search() {
        for d in [-23i128, -39, 5, 13, 21, -7, 17] {
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
                let dm = d.rem_euclid(p as i128) as u64;
                let expected = if dm == 0 {
                    0
                } else if (1..p).any(|x| x * x % p == dm) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(d, p as i128), expected, "({d}/{p})");
            }
        }
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(moebius(30).unwrap(), -1);
        assert_eq!(moebius(12).unwrap(), 0);
        assert_eq!(moebius(1).unwrap(), 1);
        assert!(moebius(0).is_err());
    }

    #[test]
    fn moebius_convolution() {
        for n in 1..=10_000u64 {
            let s: i32 = (1..=n).filter(|d| n % d == 0).map(|d| moebius(d).unwrap()).sum();
            assert_eq!(s, if n == 1 { 1 } else { 0 }, "n = {n}");
        }
    }

    #[test]
    fn fundamental_examples() {
        assert!(is_fundamental_discriminant(12).unwrap());
        assert!(!is_fundamental_discriminant(9).unwrap());
        assert!(is_fundamental_discriminant(-39).unwrap());
        assert!(is_fundamental_discriminant(0).is_err());
        let list = fundamental_discriminants(200);
        for d in -200i128..=200 {
            if d == 0 {
                continue;
            }
            let expect = is_fundamental_discriminant(d).unwrap();
            assert_eq!(list.contains(&(d as i64)), expect, "D = {d}");
        }
    }

    #[test]
    fn character_orthogonality() {
        for d in fundamental_discriminants(500) {
            let s: i32 = (1..=d.unsigned_abs() as i128).map(|n| kronecker(d as i128, n)).sum();
            assert_eq!(s, 0, "D = {d}");
        }
    }

    #[test]
    fn sqrt_mod_prime_roundtrip() {
        for p in [3u64, 5, 7, 13, 17, 41, 97, 1_000_000_007] {
            for a in 1..60u64 {
                if let Some(r) = sqrt_mod_prime(a, p) {
                    assert_eq!(r as u128 * r as u128 % p as u128, (a % p) as u128);
                } else {
                    assert_eq!(powmod_u64(a, (p - 1) / 2, p), p - 1);
                }
            }
        }
    }

    #[test]
    fn quadratic_field_disc_examples() {
        assert_eq!(quadratic_field_disc(8), Some((8, 2)));
        assert_eq!(quadratic_field_disc(2), Some((8, 1)));
        assert_eq!(quadratic_field_disc(-16 * 3), Some((-3, 4)));
        assert_eq!(quadratic_field_disc(12), Some((12, 2)));
        assert_eq!(quadratic_field_disc(9), None);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn kronecker_multiplicative(d in -500i128..500, m in 1i128..2000, n in 1i128..2000) {
            proptest::prop_assume!(d != 0);
            proptest::prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
        }

        #[test]
        fn factor_product_roundtrip(n in 1u128..(1u128 << 90)) {
            let f = factor_u128(n);
            let prod: u128 = f.iter().map(|&(p, e)| p.pow(e)).product();
            proptest::prop_assert_eq!(prod, n);
            for w in f.windows(2) {
                proptest::prop_assert!(w[0].0 < w[1].0);
            }
            for (p, _) in f {
                proptest::prop_assert!(is_prime_u128(p));
            }
        }
    }
}
