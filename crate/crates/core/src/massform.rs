//! Local masses, density tables, Euler products and the diagonal sums over
//! quadratic discriminants.
//!
//! Everything finite is an exact [`BigRational`]. Floating point only enters
//! for infinite products and for sums over discriminants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{factor_u128, fundamental_discriminants, is_prime, prime_divisors_spf, primes_up_to, spf_sieve};
use crate::quadfield::{diagonal_euler_primes, l_ratio, QuadError, ZETA2, ZETA3, ZETA4};
use crate::quartic::{QuadType, QuarticType, SplittingPair};

pub type RationalValue = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MassError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{value} is not a power of {p}")]
    NotPrimePower { p: u64, value: u128 },
    #[error("pair {0} has no density row")]
    UnlistedPair(String),
    #[error("{0} requires an odd prime")]
    EvenPrime(u64),
    #[error("bound {0} out of range")]
    Bound(u64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rpow(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

fn exponent_of(p: u64, value: u128) -> Result<u32, MassError> {
    if value == 0 {
        return Err(MassError::NotPrimePower { p, value });
    }
    let (mut v, mut e) = (value, 0u32);
    while v % p as u128 == 0 {
        v /= p as u128;
        e += 1;
    }
    if v != 1 {
        return Err(MassError::NotPrimePower { p, value });
    }
    Ok(e)
}

/// One cell of the 2-adic table. `Dash` marks a (q, d) combination that no
/// local pair realizes even though both exponents occur on their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table2Cell {
    Mass(u32),
    Dash,
    Absent,
}

const T2_Q: [u32; 6] = [0, 2, 3, 4, 5, 6];
const T2_D: [u32; 3] = [0, 2, 3];
const T2: [[u32; 3]; 6] = [[1, 1, 2], [1, 1, 2], [2, 0, 0], [2, 2, 4], [2, 4, 8], [4, 0, 0]];

pub fn table2_cell(q_exp: u32, d_exp: u32) -> Table2Cell {
    match (T2_Q.iter().position(|&e| e == q_exp), T2_D.iter().position(|&e| e == d_exp)) {
        (Some(i), Some(j)) => match T2[i][j] {
            0 => Table2Cell::Dash,
            m => Table2Cell::Mass(m),
        },
        _ => Table2Cell::Absent,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMass {
    pub value: RationalValue,
    pub incompatible: bool,
}

pub fn local_mass_entry(p: u64, q_part: u128, d_part: u128) -> Result<LocalMass, MassError> {
    if !is_prime(p) {
        return Err(MassError::NotPrime(p));
    }
    let (a, b) = (exponent_of(p, q_part)?, exponent_of(p, d_part)?);
    let (m, incompatible) = if p == 2 {
        match table2_cell(a, b) {
            Table2Cell::Mass(m) => (m, false),
            Table2Cell::Dash => (0, true),
            Table2Cell::Absent => (0, false),
        }
    } else {
        (matches!((a, b), (0, 0) | (1, 0) | (2, 0) | (0, 1) | (1, 1)) as u32, false)
    };
    Ok(LocalMass { value: BigRational::from_integer(m.into()), incompatible })
}

/// Weighted local mass E_p at the p-parts of (q, d).
pub fn local_mass(p: u64, q_part: u128, d_part: u128) -> Result<RationalValue, MassError> {
    Ok(local_mass_entry(p, q_part, d_part)?.value)
}

pub fn archimedean_mass(q: i128, d: i128) -> RationalValue {
    if q < 0 && d < 0 {
        BigRational::zero()
    } else {
        rat(1, 4)
    }
}

/// ½·E_∞·Π_p E_p for nonzero (q, d). d = 1 is evaluated by the same formula.
pub fn expected_count(q: i128, d: i128) -> RationalValue {
    assert!(q != 0 && d != 0, "expected_count needs nonzero invariants");
    let mut out = rat(1, 2) * archimedean_mass(q, d);
    let (qa, da) = (q.unsigned_abs(), d.unsigned_abs());
    let mut primes: Vec<u64> = factor_u128(qa).into_iter().chain(factor_u128(da)).map(|(p, _)| p as u64).collect();
    primes.sort_unstable();
    primes.dedup();
    for p in primes {
        let part = |mut n: u128| {
            let mut r = 1u128;
            while n % p as u128 == 0 {
                n /= p as u128;
                r *= p as u128;
            }
            r
        };
        out *= local_mass(p, part(qa), part(da)).expect("p-parts are p-powers");
        if out.is_zero() {
            break;
        }
    }
    out
}

/// Σ_{a,b} E_p(p^a, p^b)·p^{−as−bt}, read off the mass tables.
pub fn xi_from_masses(p: u64, s: f64, t: f64) -> f64 {
    let pf = p as f64;
    let mut acc = 0.0;
    for a in 0..8u32 {
        for b in 0..4u32 {
            let m = local_mass(p, (p as u128).pow(a), (p as u128).pow(b)).unwrap();
            let m = m.to_f64().unwrap();
            if m != 0.0 {
                acc += m * pf.powf(-(a as f64) * s - b as f64 * t);
            }
        }
    }
    acc
}

fn xi_generic(x: f64, y: f64) -> f64 {
    1.0 + x + x * x + y * (1.0 + x)
}

fn xi_two(x: f64, y: f64) -> f64 {
    let inner = 1.0 + x.powi(2) + 2.0 * x.powi(4) + 4.0 * x.powi(5);
    1.0 + x.powi(2) + 2.0 * x.powi(3) + 2.0 * x.powi(4) + 2.0 * x.powi(5) + 4.0 * x.powi(6)
        + y.powi(2) * inner
        + 2.0 * y.powi(3) * inner
}

/// Local factor ξ_p(s, t) of the double series Σ E(q,d)|q|^{−s}|d|^{−t}.
pub fn xi_factor(p: u64, s: f64, t: f64) -> f64 {
    let pf = p as f64;
    let (x, y) = (pf.powf(-s), pf.powf(-t));
    if p == 2 {
        xi_two(x, y)
    } else {
        xi_generic(x, y)
    }
}

/// ξ_2 divided by the generic factor evaluated at p = 2.
pub fn xi_tilde_two(s: f64, t: f64) -> f64 {
    let (x, y) = (2f64.powf(-s), 2f64.powf(-t));
    xi_two(x, y) / xi_generic(x, y)
}

/// Exact ξ̃₂(s, t) at positive integers.
pub fn xi_tilde_two_exact(s: u32, t: u32) -> RationalValue {
    let x = rpow(2, s).recip();
    let y = rpow(2, t).recip();
    let mut num = BigRational::zero();
    for (i, &a) in T2_Q.iter().enumerate() {
        for (j, &b) in T2_D.iter().enumerate() {
            num += BigRational::from_integer(T2[i][j].into()) * pow_r(&x, a) * pow_r(&y, b);
        }
    }
    let one = BigRational::one();
    let den = &one + &x + &x * &x + &y * (&one + &x);
    num / den
}

fn pow_r(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EulerKind {
    /// 1 − p⁻² − 2p⁻³ + 2p⁻⁴
    Conductor,
    /// 1 + p⁻² − p⁻³ − p⁻⁴
    Discriminant,
    /// (1 + 2/p)(1 − 1/p)²
    NoCentral,
}

impl EulerKind {
    pub const ALL: [EulerKind; 3] = [EulerKind::Conductor, EulerKind::Discriminant, EulerKind::NoCentral];

    /// Coefficients (a2, a3, a4) of x², x³, x⁴ in the factor at x = 1/p.
    fn coeffs(self) -> [f64; 3] {
        match self {
            EulerKind::Conductor => [-1.0, -2.0, 2.0],
            EulerKind::Discriminant => [1.0, -1.0, -1.0],
            EulerKind::NoCentral => [-3.0, 2.0, 0.0],
        }
    }

    pub fn factor(self, p: u64) -> f64 {
        let x = 1.0 / p as f64;
        let [a2, a3, a4] = self.coeffs();
        1.0 + a2 * x * x + a3 * x * x * x + a4 * x * x * x * x
    }

    pub fn factor_exact(self, p: u64) -> RationalValue {
        let x = rpow(p, 1).recip();
        match self {
            EulerKind::Conductor => BigRational::one() - pow_r(&x, 2) - rat(2, 1) * pow_r(&x, 3) + rat(2, 1) * pow_r(&x, 4),
            EulerKind::Discriminant => BigRational::one() + pow_r(&x, 2) - pow_r(&x, 3) - pow_r(&x, 4),
            EulerKind::NoCentral => {
                let one = BigRational::one();
                (&one + rat(2, 1) * &x) * pow_r(&(&one - &x), 2)
            }
        }
    }

    /// Exponents c_k with factor = Π_k (1 − x^k)^{c_k}·(1 + O(x⁵)).
    fn zeta_exponents(self) -> [f64; 3] {
        let [a2, a3, a4] = self.coeffs();
        let c2 = -a2;
        [c2, -a3, -a4 + a2 * a2 / 2.0 - c2 / 2.0]
    }

    /// The factor with its ζ(2), ζ(3), ζ(4) parts divided out; 1 + O(p⁻⁵).
    pub fn reduced_factor(self, p: u64) -> f64 {
        let x = 1.0 / p as f64;
        let [c2, c3, c4] = self.zeta_exponents();
        self.factor(p) * (1.0 - x.powi(2)).powf(-c2) * (1.0 - x.powi(3)).powf(-c3) * (1.0 - x.powi(4)).powf(-c4)
    }
}

/// |reduced_factor(p) − 1| ≤ REDUCED_TAIL_CONST·p⁻⁵ for p ≥ 5, all kinds.
pub const REDUCED_TAIL_CONST: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EulerValue {
    pub value: f64,
    /// Bound on |log(true) − log(value)| from the omitted primes.
    pub tail_bound: f64,
    pub cutoff: u64,
}

/// Π_p factor(p). Writes the product as ζ(2)^{−c2}ζ(3)^{−c3}ζ(4)^{−c4} times a
/// product whose factors are 1 + O(p⁻⁵), so a modest prime cutoff certifies
/// the requested relative error.
pub fn euler_product(kind: EulerKind, rel_err: f64) -> EulerValue {
    let rel_err = rel_err.max(1e-12);
    // Σ_{n>N} 2K n⁻⁵ ≤ K/(2N⁴)
    let cutoff = ((REDUCED_TAIL_CONST / (2.0 * rel_err)).powf(0.25).ceil() as u64).max(1000);
    euler_product_to(kind, cutoff)
}

pub fn euler_product_to(kind: EulerKind, cutoff: u64) -> EulerValue {
    let primes = primes_up_to(cutoff as usize);
    let blocks: Vec<f64> = primes.par_chunks(256).map(|c| c.iter().map(|&p| kind.reduced_factor(p)).product()).collect();
    let reduced: f64 = blocks.iter().product();
    let [c2, c3, c4] = kind.zeta_exponents();
    let value = ZETA2.powf(-c2) * ZETA3.powf(-c3) * ZETA4.powf(-c4) * reduced;
    let n = cutoff as f64;
    EulerValue { value, tail_bound: REDUCED_TAIL_CONST / (2.0 * n.powi(4)), cutoff }
}

/// Direct partial product Π_{p ≤ cutoff} factor(p), no acceleration.
pub fn euler_partial(kind: EulerKind, cutoff: u64) -> f64 {
    primes_up_to(cutoff as usize).iter().map(|&p| kind.factor(p)).product()
}

/// (3/8)·ξ̃₂(1,2) = 3·11²/(2⁶·17).
pub fn discriminant_prefactor() -> RationalValue {
    rat(3, 8) * xi_tilde_two_exact(1, 2)
}

/// μ(M_p(pair)) for the twelve legal splitting pairs.
pub fn mu_mp(p: u64, pair: &SplittingPair) -> Result<RationalValue, MassError> {
    use QuadType::*;
    use QuarticType::*;
    if !is_prime(p) {
        return Err(MassError::NotPrime(p));
    }
    let (coef, e) = match (pair.quartic, pair.quadratic) {
        (T1111, Split) | (T22, Split) => (rat(1, 8), 4),
        (T22, Inert) | (T112, Split) | (T4, Inert) => (rat(1, 4), 4),
        (T1sq11, Split) | (T1sq2, Split) | (T1sq1sq, Ramified) | (T2sq, Ramified) => (rat(1, 2), 5),
        (T1e4, Ramified) => (rat(1, 1), 6),
        (T1sq1sq, Split) | (T2sq, Inert) => (rat(1, 2), 6),
        _ => return Err(MassError::UnlistedPair(pair.code())),
    };
    let pm = BigRational::from_integer(BigInt::from(p) - 1);
    let pp = BigRational::from_integer(BigInt::from(p) + 1);
    Ok(coef * pow_r(&pm, 3) * pp / rpow(p, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityIdentities {
    pub p: u64,
    pub total: RationalValue,
    pub total_expected: RationalValue,
    pub no_central: RationalValue,
    pub no_central_expected: RationalValue,
}

impl DensityIdentities {
    pub fn holds(&self) -> bool {
        self.total == self.total_expected && self.no_central == self.no_central_expected
    }
}

pub fn density_identities(p: u64) -> Result<DensityIdentities, MassError> {
    let mut total = BigRational::zero();
    let mut no_central = BigRational::zero();
    for pair in SplittingPair::LEGAL.iter() {
        let m = mu_mp(p, pair)?;
        if !pair.has_central_inertia() {
            no_central += &m;
        }
        total += m;
    }
    let lead = BigRational::one() - pow_r(&rpow(p, 1).recip(), 2);
    Ok(DensityIdentities {
        p,
        total,
        total_expected: &lead * EulerKind::Conductor.factor_exact(p),
        no_central,
        no_central_expected: lead * EulerKind::NoCentral.factor_exact(p),
    })
}

/// (1 − p⁻²)⁻¹·Σ_pairs μ(M_p(pair)).
pub fn conductor_factor_from_densities(p: u64) -> Result<RationalValue, MassError> {
    let d = density_identities(p)?;
    Ok(d.total / (BigRational::one() - pow_r(&rpow(p, 1).recip(), 2)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableMass {
    pub m: RationalValue,
    pub m_cl: RationalValue,
}

pub fn stable_mass_factors(p: u64, split_type: QuadType) -> Result<StableMass, MassError> {
    if !is_prime(p) {
        return Err(MassError::NotPrime(p));
    }
    if p == 2 {
        return Err(MassError::EvenPrime(p));
    }
    let p = p as i64;
    Ok(match split_type {
        QuadType::Split => StableMass { m: rat(p * p + 2 * p + 1, 1), m_cl: rat(p, 2 * p + 2) },
        QuadType::Inert => StableMass { m: rat(p * p + 1, 1), m_cl: rat(p, 2 * p + 2) },
        QuadType::Ramified => StableMass { m: rat(2 * (p + 1), 1), m_cl: rat(2, p + 2) },
    })
}

/// Sums of diagonal_euler(D)/|D| over fundamental D with 1 < |D| < x.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SignedSum {
    pub positive: f64,
    pub negative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalReport {
    pub x: u64,
    pub diag_sum: SignedSum,
    pub window: SignedSum,
    pub window_target: f64,
    pub residual: Option<SignedSum>,
    pub weighted_sum: f64,
    pub weighted_target: f64,
}

pub const DIAGONAL_MAX_X: u64 = 10_000_000;
pub const RESIDUAL_MAX_X: u64 = 20_000;

/// Walks fundamental discriminants with |D| < bound, passing D and its
/// prime divisors.
fn for_each_fundamental(bound: u64, mut f: impl FnMut(i64, &[u64])) {
    if bound < 4 {
        return;
    }
    let spf = spf_sieve(bound as usize);
    for d in fundamental_discriminants(bound - 1) {
        let primes = prime_divisors_spf(d.unsigned_abs(), &spf);
        f(d, &primes);
    }
}

pub fn diag_sum(x: u64) -> SignedSum {
    let mut s = SignedSum::default();
    for_each_fundamental(x, |d, primes| {
        let v = diagonal_euler_primes(primes) / d.unsigned_abs() as f64;
        if d > 0 {
            s.positive += v;
        } else {
            s.negative += v;
        }
    });
    s
}

/// Σ (l_ratio(D) − diagonal_euler(D))/|D| over fundamental 1 < |D| < x.
pub fn residual_sum(x: u64) -> Result<SignedSum, MassError> {
    if x > RESIDUAL_MAX_X {
        return Err(MassError::Bound(x));
    }
    let mut ds = Vec::new();
    for_each_fundamental(x, |d, primes| ds.push((d, diagonal_euler_primes(primes))));
    let terms: Vec<(i64, f64)> = ds
        .par_iter()
        .map(|&(d, g)| Ok((d, (l_ratio(d)? - g) / d.unsigned_abs() as f64)))
        .collect::<Result<_, QuadError>>()?;
    let mut s = SignedSum::default();
    for (d, v) in terms {
        if d > 0 {
            s.positive += v;
        } else {
            s.negative += v;
        }
    }
    Ok(s)
}

/// (1/(2ζ(2)))·Σ_{|D|<x} 2^{−r2(D)}·diagonal_euler(D)/D².
pub fn weighted_diagonal_sum(x: u64) -> f64 {
    let mut acc = 0.0;
    for_each_fundamental(x, |d, primes| {
        let w = if d < 0 { 0.5 } else { 1.0 };
        let a = d.unsigned_abs() as f64;
        acc += w * diagonal_euler_primes(primes) / (a * a);
    });
    acc / (2.0 * ZETA2)
}

/// ζ(2)/2·Π(1 − p⁻² − 2p⁻³ + 2p⁻⁴), the per-sign slope of diag_sum in log X.
pub fn window_target() -> f64 {
    ZETA2 / 2.0 * euler_product(EulerKind::Conductor, 1e-12).value
}

pub fn discriminant_constant() -> f64 {
    discriminant_prefactor().to_f64().unwrap() * euler_product(EulerKind::Discriminant, 1e-12).value
}

pub fn diagonal_reports(x: u64) -> Result<DiagonalReport, MassError> {
    if x < 4 || x > DIAGONAL_MAX_X {
        return Err(MassError::Bound(x));
    }
    let ex = (x as f64 * std::f64::consts::E).floor() as u64;
    let lo = diag_sum(x);
    let hi = diag_sum(ex);
    let residual = if x <= RESIDUAL_MAX_X { Some(residual_sum(x)?) } else { None };
    Ok(DiagonalReport {
        x,
        diag_sum: lo,
        window: SignedSum { positive: hi.positive - lo.positive, negative: hi.negative - lo.negative },
        window_target: window_target(),
        residual,
        weighted_sum: weighted_diagonal_sum(x),
        weighted_target: discriminant_constant(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedConstant {
    pub name: &'static str,
    pub value: f64,
    pub exact: Option<String>,
    pub note: &'static str,
}

/// Every closed-form constant the crate evaluates, for display.
pub fn named_constants() -> Vec<NamedConstant> {
    named_constants_at(1e-12)
}

/// As [`named_constants`], with Euler products to relative error `rel_err`.
pub fn named_constants_at(rel_err: f64) -> Vec<NamedConstant> {
    let c = |name, value, exact: Option<String>, note| NamedConstant { name, value, exact, note };
    let cond = euler_product(EulerKind::Conductor, rel_err).value;
    let disc = euler_product(EulerKind::Discriminant, rel_err).value;
    let noc = euler_product(EulerKind::NoCentral, rel_err).value;
    let xi11 = xi_tilde_two_exact(1, 1);
    let xi12 = xi_tilde_two_exact(1, 2);
    let pre = discriminant_prefactor();
    vec![
        c("zeta(2)", ZETA2, None, "literal"),
        c("zeta(3)", ZETA3, None, "literal"),
        c("zeta(4)", ZETA4, None, "literal"),
        c("prod_conductor", cond, None, "prod_p (1 - p^-2 - 2p^-3 + 2p^-4)"),
        c("prod_discriminant", disc, None, "prod_p (1 + p^-2 - p^-3 - p^-4)"),
        c("prod_no_central", noc, None, "prod_p (1 + 2/p)(1 - 1/p)^2"),
        c("xi2_tilde(1,1)", xi11.to_f64().unwrap(), Some(xi11.to_string()), "2-adic correction, conductor"),
        c("xi2_tilde(1,2)", xi12.to_f64().unwrap(), Some(xi12.to_string()), "2-adic correction, discriminant"),
        c("conductor_constant", 3.0 / 8.0 * cond, None, "(3/8)*prod_conductor"),
        c("discriminant_constant", pre.to_f64().unwrap() * disc, Some(format!("{pre} * prod_discriminant")), "(3/8)*xi2_tilde(1,2)*prod_discriminant"),
        c("diagonal_slope", ZETA2 / 2.0 * cond, None, "zeta(2)/2*prod_conductor"),
        c("classgroup_real", noc / 16.0, None, "(1/16)*prod_no_central"),
        c("classgroup_imag", noc / 4.0, None, "(1/4)*prod_no_central"),
        c("classgroup_narrow", noc / 8.0, None, "(1/8)*prod_no_central"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn local_mass_examples() {
        assert_eq!(local_mass(3, 3, 1).unwrap(), rat(1, 1));
        assert_eq!(local_mass(2, 32, 4).unwrap(), rat(4, 1));
        assert_eq!(local_mass(5, 125, 1).unwrap(), rat(0, 1));
        assert!(local_mass(3, 6, 1).is_err());
        assert!(local_mass(4, 1, 1).is_err());
        let e = local_mass_entry(2, 8, 4).unwrap();
        assert!(e.incompatible && e.value.is_zero());
        let e = local_mass_entry(2, 2, 1).unwrap();
        assert!(!e.incompatible && e.value.is_zero());
    }

    #[test]
    fn expected_count_examples() {
        assert_eq!(expected_count(5, 8), rat(1, 4));
        assert_eq!(expected_count(-5, -8), rat(0, 1));
        assert_eq!(expected_count(4, 5), rat(1, 8));
        assert_eq!(expected_count(-4, 5), rat(1, 8));
        assert_eq!(expected_count(9, 5), rat(1, 8));
        assert_eq!(expected_count(27, 5), rat(0, 1));
        assert_eq!(expected_count(1, 1), rat(1, 8));
    }

    #[test]
    fn expected_count_matches_prime_by_prime() {
        // recompute by trial division over all p up to |q|+|d|
        for q in -60i128..=60 {
            for d in -40i128..=40 {
                if q == 0 || d == 0 {
                    continue;
                }
                let mut r = archimedean_mass(q, d) / rat(2, 1);
                for p in 2..=(q.abs() + d.abs()) as u64 {
                    if !is_prime(p) {
                        continue;
                    }
                    let part = |n: i128| {
                        let mut n = n.unsigned_abs();
                        let mut r = 1;
                        while n % p as u128 == 0 {
                            n /= p as u128;
                            r *= p as u128;
                        }
                        r
                    };
                    r *= local_mass(p, part(q), part(d)).unwrap();
                }
                assert_eq!(expected_count(q, d), r, "({q},{d})");
            }
        }
    }

    #[test]
    fn xi_closed_forms_match_mass_tables() {
        for &p in &[2u64, 3, 5, 7, 11] {
            for &(s, t) in &[(1.0, 1.0), (1.0, 2.0), (1.5, 0.8), (0.7, 3.0)] {
                let a = xi_factor(p, s, t);
                let b = xi_from_masses(p, s, t);
                assert!((a - b).abs() < 1e-12, "p={p} s={s} t={t}: {a} vs {b}");
            }
        }
        let x = 1.0 / 3.0;
        assert!((xi_factor(3, 1.0, 1.0) - (1.0 + x + x * x + x * (1.0 + x))).abs() < 1e-15);
    }

    #[test]
    fn xi_tilde_two_values() {
        assert_eq!(xi_tilde_two_exact(1, 1), rat(1, 1));
        assert_eq!(xi_tilde_two_exact(1, 2), rat(121, 136));
        assert!((xi_tilde_two(1.0, 2.0) - 121.0 / 136.0).abs() < 1e-15);
        assert_eq!(discriminant_prefactor(), rat(3 * 121, 64 * 17));
    }

    #[test]
    fn xi_odd_factorization_identity() {
        // ξ_p(s,t)(1 − p^−s)(1 − p^−t) equals the six-term polynomial
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let primes = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31];
        for i in 0..20 {
            let p = primes[i % primes.len()];
            let s = 0.6 + 2.0 * next();
            let t = 0.6 + 2.0 * next();
            let pf = p as f64;
            let lhs = xi_factor(p, s, t) * (1.0 - pf.powf(-s)) * (1.0 - pf.powf(-t));
            let e = |a: f64, b: f64| pf.powf(-(a * s + b * t));
            let rhs = 1.0 - e(0.0, 2.0) - e(2.0, 1.0) - e(3.0, 0.0) + e(2.0, 2.0) + e(3.0, 1.0);
            assert!((lhs - rhs).abs() < 1e-12, "p={p} s={s} t={t}");
        }
    }

    #[test]
    fn euler_factor_at_two() {
        assert_eq!(EulerKind::Conductor.factor(2), 0.625);
        assert_eq!(EulerKind::Conductor.factor_exact(2), rat(5, 8));
    }

    #[test]
    fn reduced_factor_tail_constant() {
        for kind in EulerKind::ALL {
            for p in primes_up_to(20_000).into_iter().filter(|&p| p >= 5) {
                let dev = (kind.reduced_factor(p) - 1.0).abs();
                let bound = REDUCED_TAIL_CONST / (p as f64).powi(5);
                assert!(dev <= bound.max(4.0 * f64::EPSILON), "{kind:?} p={p} dev={dev}");
            }
        }
    }

    #[test]
    fn euler_products_agree_with_direct_partials() {
        for kind in EulerKind::ALL {
            let acc = euler_product(kind, 1e-12);
            // direct partial product to 10⁶ has tail below 3/(10⁶·ln 10⁶)
            let direct = euler_partial(kind, 1_000_000);
            assert!((acc.value / direct - 1.0).abs() < 5e-7, "{kind:?} {} {}", acc.value, direct);
            let finer = euler_product_to(kind, 2 * acc.cutoff);
            assert!((finer.value / acc.value - 1.0).abs() < 1e-12);
        }
        let c = euler_product(EulerKind::Conductor, 1e-10).value;
        assert!(c > 0.4 && c < 0.6);
        let c2 = euler_product_to(EulerKind::Conductor, 2 * euler_product(EulerKind::Conductor, 1e-10).cutoff).value;
        assert!((c - c2).abs() < 1e-8);
    }

    #[test]
    fn discriminant_constant_value() {
        let v = discriminant_constant();
        assert!((v - 0.406).abs() < 5e-3, "{v}");
    }

    #[test]
    fn mu_mp_examples() {
        let pair = |q: &str, k: &str| SplittingPair::parse(&format!("{q}/{k}")).unwrap();
        assert_eq!(mu_mp(3, &pair("1-4", "1-2")).unwrap(), rat(32, 729));
        assert_eq!(mu_mp(3, &pair("1111", "11")).unwrap(), rat(4, 81));
        assert_eq!(mu_mp(5, &pair("2-2", "2")).unwrap(), rat(192, 15625));
        assert!(mu_mp(3, &SplittingPair { quartic: QuarticType::T4, quadratic: QuadType::Split }).is_err());
    }

    #[test]
    fn density_identities_small_primes() {
        for p in primes_up_to(100) {
            let d = density_identities(p).unwrap();
            assert!(d.holds(), "p={p}");
            assert_eq!(conductor_factor_from_densities(p).unwrap(), EulerKind::Conductor.factor_exact(p));
        }
    }

    #[test]
    fn stable_mass_examples() {
        let s = stable_mass_factors(3, QuadType::Split).unwrap();
        assert_eq!((s.m, s.m_cl), (rat(16, 1), rat(3, 8)));
        let s = stable_mass_factors(3, QuadType::Ramified).unwrap();
        assert_eq!((s.m, s.m_cl), (rat(8, 1), rat(2, 5)));
        let s = stable_mass_factors(5, QuadType::Inert).unwrap();
        assert_eq!((s.m, s.m_cl), (rat(26, 1), rat(5, 12)));
        assert!(stable_mass_factors(2, QuadType::Split).is_err());
    }

    #[test]
    fn stable_masses_sum_to_full_family() {
        // the three m(p) values add up to the normalizer 2p² + 4p + 4
        for p in primes_up_to(60).into_iter().skip(1) {
            let pr = |t| stable_mass_factors(p, t).unwrap().m;
            let sum = pr(QuadType::Split) + pr(QuadType::Inert) + pr(QuadType::Ramified);
            let pi = p as i64;
            assert_eq!(sum, rat(2 * pi * pi + 4 * pi + 4, 1));
        }
    }

    #[test]
    fn diag_sum_small() {
        // |D| < 9: D = −3, −4, 5, −7, −8, 8
        let s = diag_sum(9);
        let g = |ps: &[u64]| diagonal_euler_primes(ps);
        let pos = g(&[5]) / 5.0 + g(&[2]) / 8.0;
        let neg = g(&[3]) / 3.0 + g(&[2]) / 4.0 + g(&[7]) / 7.0 + g(&[2]) / 8.0;
        assert!((s.positive - pos).abs() < 1e-14 && (s.negative - neg).abs() < 1e-14);
    }

    #[test]
    fn weighted_sum_converges() {
        let a = weighted_diagonal_sum(10_000);
        let b = weighted_diagonal_sum(20_000);
        assert!(b > a && b - a < 1e-3);
    }

    proptest! {
        #[test]
        fn expected_count_is_multiplicative_in_coprime_parts(a in 1i128..200, b in 1i128..200, d in prop::sample::select(vec![-4i128, 5, 8, -3, 12, -7])) {
            // 2E is multiplicative: 2E(ab,d)·2E(1,1) = 2E(a,d)·2E(b,1) when b ⟂ ad
            prop_assume!(num_integer::Integer::gcd(&b, &(a * d)) == 1);
            let two = rat(2, 1);
            let lhs = &two * expected_count(a * b, d) * (&two * expected_count(1, 1));
            let rhs = &two * expected_count(a, d) * (&two * expected_count(b, 1));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
