//! Local behaviour of L = K(√α) at a single rational prime, read off α
//! directly: valuations, residues and a few 2-adic square tables.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{kronecker, sqrt_mod_prime};
use crate::quadfield::QuadElem;
use crate::quartic::{QuadType, QuarticType, SplittingPair};

/// Splitting pair at p and v_p(q), where q is the norm of the relative
/// discriminant of L/K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalData {
    pub pair: SplittingPair,
    pub q_exp: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Split,
    Inert,
    /// ramified, with the exponent of the local relative discriminant
    Ram(u32),
}

fn vbig(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

fn modp(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

fn is_qr(a: u64, p: u64) -> bool {
    kronecker(a as i128, p as i128) == 1
}

/// Combines the behaviour of L/K at each prime of K above p.
fn assemble(quad: QuadType, rels: &[Rel]) -> Option<LocalData> {
    let (f, e) = match quad {
        QuadType::Split => (1, 1),
        QuadType::Inert => (2, 1),
        QuadType::Ramified => (1, 2),
    };
    let mut fe = Vec::new();
    let mut q_exp = 0;
    for r in rels {
        match *r {
            Rel::Split => fe.extend([(f, e), (f, e)]),
            Rel::Inert => fe.push((2 * f, e)),
            Rel::Ram(dexp) => {
                fe.push((f, 2 * e));
                q_exp += f as u32 * dexp;
            }
        }
    }
    let quartic = QuarticType::from_local_factors(&fe)?;
    Some(LocalData { pair: SplittingPair::new(quartic, quad), q_exp })
}

/// √D in Z_p modulo p^k for odd p ∤ D.
fn sqrt_mod_pk(d: i64, p: u64, k: u32) -> BigInt {
    let r0 = sqrt_mod_prime(d.rem_euclid(p as i64) as u64, p).expect("D is a residue");
    let db = BigInt::from(d);
    let mut r = BigInt::from(r0);
    let mut pj = BigInt::from(p);
    let inv2r = |r: &BigInt| {
        let x = modp(&(r * 2), p);
        crate::arith::powmod_u64(x, p - 2, p)
    };
    for _ in 1..k {
        // r² ≡ D mod p^j; lift to p^{j+1}
        let t: BigInt = (&r * &r - &db) / &pj;
        let s = (p - modp(&t, p)) % p;
        let s = (s as u128 * inv2r(&r) as u128 % p as u128) as u64;
        r += &pj * s;
        pj *= p;
    }
    r.mod_floor(&pj)
}

/// √D in Z_2 modulo 2^k for D ≡ 1 mod 8 (k ≥ 3).
fn sqrt_mod_2k(d: i64, k: u32) -> BigInt {
    let db = BigInt::from(d);
    let mut r = BigInt::one();
    for j in 3..k + 1 {
        let m = BigInt::one() << (j + 1);
        if !(&r * &r - &db).mod_floor(&m).is_zero() {
            r += BigInt::one() << (j - 1);
        }
    }
    r
}

fn odd_prime(d: i64, x: &BigInt, y: &BigInt, p: u64) -> Option<LocalData> {
    let quad = QuadType::from_kronecker(d, p);
    match quad {
        QuadType::Ramified => {
            let vx = vbig(x, p).map(|v| 2 * v);
            let vy = vbig(y, p).map(|v| 2 * v + 1);
            let v = vx.into_iter().chain(vy).min()?;
            if v % 2 == 1 {
                return assemble(quad, &[Rel::Ram(1)]);
            }
            let k = v / 2;
            let res = modp(&(x / BigInt::from(p).pow(k)), p);
            // α/p^k ≡ x/(2p^k)
            let mut res = (res as u128 * ((p + 1) / 2) as u128 % p as u128) as u64;
            if k % 2 == 1 {
                // p = d/(d/p) up to squares, and d = (√d)²
                let dp = (d / p as i64).rem_euclid(p as i64) as u64;
                res = (res as u128 * dp as u128 % p as u128) as u64;
            }
            assemble(quad, &[if is_qr(res, p) { Rel::Split } else { Rel::Inert }])
        }
        QuadType::Inert => {
            let v = vbig(x, p).into_iter().chain(vbig(y, p)).min()?;
            if v % 2 == 1 {
                return assemble(quad, &[Rel::Ram(1)]);
            }
            let pv = BigInt::from(p).pow(v);
            let (xu, yu) = (x / &pv, y / &pv);
            // 4·N(u) = xu² − D·yu²
            let n4 = modp(&(&xu * &xu - &yu * &yu * d), p);
            assemble(quad, &[if is_qr(n4, p) { Rel::Split } else { Rel::Inert }])
        }
        QuadType::Split => {
            let n4: BigInt = x * x - y * y * d;
            let k = vbig(&n4, p)? + 2;
            let r = sqrt_mod_pk(d, p, k);
            let pk = BigInt::from(p).pow(k);
            let mut rels = Vec::new();
            for s in [r.clone(), &pk - &r] {
                let w = (x + y * &s).mod_floor(&pk);
                let v = vbig(&w, p)?;
                if v >= k {
                    return None;
                }
                if v % 2 == 1 {
                    rels.push(Rel::Ram(1));
                } else {
                    // the embedding of α is w/2
                    let u = modp(&(w / BigInt::from(p).pow(v)), p);
                    let u = (u as u128 * ((p + 1) / 2) as u128 % p as u128) as u64;
                    rels.push(if is_qr(u, p) { Rel::Split } else { Rel::Inert });
                }
            }
            assemble(quad, &rels)
        }
    }
}

/// Largest t ≤ 6 with u ≡ s² mod 𝔭^t for a unit s, in Z_2[√m] with 𝔭² = (2).
fn ramified_square_level(m: i64, ua: i64, ub: i64) -> u32 {
    let val = |a: i64, b: i64| -> u32 {
        let (a, b) = (a.rem_euclid(8), b.rem_euclid(8));
        if a == 0 && b == 0 {
            return 6;
        }
        let n = (a * a) as i128 - m as i128 * (b * b) as i128;
        (n.trailing_zeros()).min(5)
    };
    let mut best = 0;
    for sa in 0..8i64 {
        for sb in 0..8i64 {
            if ((sa * sa) as i128 - m as i128 * (sb * sb) as i128) % 2 == 0 {
                continue;
            }
            let s2a = sa * sa + m * sb * sb;
            let s2b = 2 * sa * sb;
            best = best.max(val(ua - s2a, ub - s2b));
        }
    }
    best
}

fn two(d: i64, x: &BigInt, y: &BigInt) -> Option<LocalData> {
    match d.rem_euclid(8) {
        1 => {
            let n4: BigInt = x * x - y * y * d;
            let k = vbig(&n4, 2)? + 6;
            let r = sqrt_mod_2k(d, k);
            let m = BigInt::one() << k;
            let mut rels = Vec::new();
            for s in [r.clone(), &m - &r] {
                let w = (x + y * &s).mod_floor(&m);
                let v = vbig(&w, 2)?.checked_sub(1)?;
                if v + 4 >= k {
                    return None;
                }
                let a: BigInt = w >> 1;
                if v % 2 == 1 {
                    rels.push(Rel::Ram(3));
                    continue;
                }
                rels.push(match modp(&(a >> v as usize), 8) {
                    1 => Rel::Split,
                    5 => Rel::Inert,
                    _ => Rel::Ram(2),
                });
            }
            assemble(QuadType::Split, &rels)
        }
        5 => {
            // α = a + bω, ω² = ω + c
            let a: BigInt = (x - y) / 2;
            let b = y.clone();
            let c = (d - 1) / 4;
            let v = vbig(&a, 2).into_iter().chain(vbig(&b, 2)).min()?;
            if v % 2 == 1 {
                return assemble(QuadType::Inert, &[Rel::Ram(3)]);
            }
            let ua = modp(&(&a >> v as usize), 8) as i64;
            let ub = modp(&(&b >> v as usize), 8) as i64;
            let mut sq8 = false;
            let mut sq4 = false;
            for sa in 0..8i64 {
                for sb in 0..8i64 {
                    if sa % 2 == 0 && sb % 2 == 0 {
                        continue;
                    }
                    let s2a = (sa * sa + sb * sb * c).rem_euclid(8);
                    let s2b = (2 * sa * sb + sb * sb).rem_euclid(8);
                    sq8 |= s2a == ua && s2b == ub;
                    sq4 |= s2a % 4 == ua % 4 && s2b % 4 == ub % 4;
                }
            }
            let rel = if sq8 {
                Rel::Split
            } else if sq4 {
                Rel::Inert
            } else {
                Rel::Ram(2)
            };
            assemble(QuadType::Inert, &[rel])
        }
        _ => {
            // α = A + B√m
            let m = d / 4;
            let a_: BigInt = x / 2;
            let b_ = y.clone();
            let n: BigInt = &a_ * &a_ - &b_ * &b_ * m;
            let v = vbig(&n, 2)?;
            if v % 2 == 1 {
                return assemble(QuadType::Ramified, &[Rel::Ram(5)]);
            }
            let k = v / 2;
            let (mut ua, mut ub) = (modp(&(&a_ >> k as usize), 64) as i64, modp(&(&b_ >> k as usize), 64) as i64);
            if k % 2 == 1 {
                // divide by η where π² = 2η; η is m/2 or (1+m)/2 + √m
                if m.rem_euclid(4) == 2 {
                    ua *= m / 2;
                    ub *= m / 2;
                } else {
                    let e0 = (1 + m) / 2;
                    (ua, ub) = (ua * e0 + m * ub, ua + ub * e0);
                }
            }
            let t = ramified_square_level(m, ua, ub);
            let rel = match t {
                5.. => Rel::Split,
                4 => Rel::Inert,
                1 | 3 => Rel::Ram(5 - t),
                _ => return None,
            };
            assemble(QuadType::Ramified, &[rel])
        }
    }
}

/// Local data of L = K(√α), K = Q(√d), at p. `α = (x + y√d)/2` must be a
/// nonzero integer of K. `None` signals an inconsistent input (zero or
/// non-integral α, or a non-D4 configuration producing an impossible type).
pub fn local_data(d: i64, alpha: &QuadElem, p: u64) -> Option<LocalData> {
    if alpha.x.is_zero() && alpha.y.is_zero() {
        return None;
    }
    if p == 2 {
        two(d, &alpha.x, &alpha.y)
    } else {
        odd_prime(d, &alpha.x, &alpha.y, p)
    }
}

/// α/r² when that is still an integer of K.
pub(crate) fn divisible_by_square(alpha: &QuadElem, d: i64, r: &BigInt) -> Option<QuadElem> {
    let r2 = r * r;
    if !(alpha.x.is_multiple_of(&r2) && alpha.y.is_multiple_of(&r2)) {
        return None;
    }
    let q = QuadElem::new(&alpha.x / &r2, &alpha.y / &r2);
    q.is_integral(d).then_some(q)
}
