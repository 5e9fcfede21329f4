//! Enumeration of D4 quartic fields by conductor.
//!
//! A D4 field L with quadratic subfield K = Q(√D) is K(√α) for some α in K
//! whose norm is not a square in K. The ideal (α) is, up to squares, an odd
//! squarefree ideal 𝔞 times a product of primes above 2, and the odd part of
//! q(L) equals N𝔞. So for each D we walk the ideals 𝔞 with |D|·N𝔞 ≤ X, pick
//! generators of 𝔞𝔓𝔠² for every admissible class 𝔠 and every unit modulo
//! squares, and read the local data of L straight from α.
//!
//! Fields with |d| > √X are reached through the companion field: the
//! quartic generated by θ + θ' (θ² = α, θ'² = ᾱ) has the same conductor and
//! quadratic subfield Q(√N(α)), whose discriminant is at most |q(L)|.

pub mod local;
mod checks;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{
    factor, factor_u128, fundamental_discriminants, is_fundamental_discriminant, is_square_bigint, isqrt_u128,
    kronecker, primes_up_to, quadratic_field_disc, sqrt_mod_prime,
};
use crate::quadfield::{compose_raw, fundamental_unit, ideal_generator, ClassTable, Form, QuadElem, QuadError};
use crate::quartic::{
    alpha_of, galois_type, r2_of, D4FieldRecord, GaloisType, QuadType, QuarticError, QuarticType, SplittingPair,
};

pub use checks::*;
pub use local::{local_data, LocalData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("bound out of range: {0}")]
    Bound(String),
    #[error("record {0} has no partner")]
    Unmatched(String),
    #[error("inconsistent local data for {0}")]
    Internal(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Quartic(#[from] QuarticError),
}

pub const CENSUS_MAX_X: u64 = 1_000_000;

/// Candidate ideals satisfy N𝔞 ≤ slack·X/|D|. The odd part of q equals N𝔞,
/// so slack 1 is already complete; larger values only cost time.
pub const DEFAULT_SLACK: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DefaultRule {
    /// every splitting pair
    Full,
    /// p-part of the conductor at most p
    Acceptable,
    /// no central inertia
    NoCentralInertia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassVariant {
    /// real fields, ordinary class group
    A,
    /// imaginary fields
    B,
    /// real fields, narrow class group
    C,
}

impl ClassVariant {
    pub const ALL: [ClassVariant; 3] = [ClassVariant::A, ClassVariant::B, ClassVariant::C];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Some(ClassVariant::A),
            "b" => Some(ClassVariant::B),
            "c" => Some(ClassVariant::C),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassVariant::A => "a",
            ClassVariant::B => "b",
            ClassVariant::C => "c",
        }
    }
}

fn sp(q: QuarticType, k: QuadType) -> SplittingPair {
    SplittingPair::new(q, k)
}

/// The four pairs that occur at the infinite place.
pub fn infinity_pairs() -> [SplittingPair; 4] {
    [
        sp(QuarticType::T1111, QuadType::Split),
        sp(QuarticType::T112, QuadType::Split),
        sp(QuarticType::T22, QuadType::Split),
        sp(QuarticType::T22, QuadType::Inert),
    ]
}

pub fn infinity_pair(rec: &D4FieldRecord) -> SplittingPair {
    let [a, b, c, d] = infinity_pairs();
    match (rec.r2, rec.d > 0) {
        (0, _) => a,
        (1, _) => b,
        (_, true) => c,
        (_, false) => d,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSpecification {
    pub infinity: BTreeSet<SplittingPair>,
    pub primes: BTreeMap<u64, BTreeSet<SplittingPair>>,
    pub default_rule: DefaultRule,
}

impl LocalSpecification {
    pub fn with_rule(default_rule: DefaultRule) -> Self {
        LocalSpecification { infinity: infinity_pairs().into_iter().collect(), primes: BTreeMap::new(), default_rule }
    }

    pub fn full() -> Self {
        Self::with_rule(DefaultRule::Full)
    }

    /// The specification whose fields correspond to order-4 ideal classes.
    pub fn classgroup(variant: ClassVariant) -> Self {
        let [a, b, c, d] = infinity_pairs();
        let inf = match variant {
            ClassVariant::A => vec![a],
            ClassVariant::B => vec![b, d],
            ClassVariant::C => vec![a, c],
        };
        LocalSpecification {
            infinity: inf.into_iter().collect(),
            primes: BTreeMap::new(),
            default_rule: DefaultRule::NoCentralInertia,
        }
    }

    pub fn with_prime(mut self, p: u64, pairs: impl IntoIterator<Item = SplittingPair>) -> Self {
        self.primes.insert(p, pairs.into_iter().collect());
        self
    }

    /// Every listed pair is legal and the infinite set only uses the four
    /// archimedean pairs.
    pub fn validate(&self) -> Result<(), String> {
        let inf = infinity_pairs();
        if let Some(bad) = self.infinity.iter().find(|s| !inf.contains(s)) {
            return Err(format!("{bad} is not an infinite splitting pair"));
        }
        for (p, set) in &self.primes {
            if let Some(bad) = set.iter().find(|s| !s.is_legal()) {
                return Err(format!("{bad} at {p} is not a legal pair"));
            }
        }
        Ok(())
    }

    /// Stable: at each listed prime, all quartic types over a quadratic type
    /// are either all present or all absent.
    pub fn is_stable(&self) -> bool {
        self.primes.values().all(|set| {
            [QuadType::Split, QuadType::Inert, QuadType::Ramified].iter().all(|k| {
                let over: Vec<_> = SplittingPair::LEGAL.iter().filter(|s| s.quadratic == *k).collect();
                let n = over.iter().filter(|s| set.contains(s)).count();
                n == 0 || n == over.len()
            })
        })
    }

    fn default_allows(&self, rec: &D4FieldRecord, p: u64, pair: &SplittingPair) -> bool {
        match self.default_rule {
            DefaultRule::Full => true,
            DefaultRule::NoCentralInertia => !pair.has_central_inertia(),
            DefaultRule::Acceptable => rec.cond_abs % (p as u128 * p as u128) != 0,
        }
    }

    pub fn allows(&self, rec: &D4FieldRecord) -> bool {
        if !self.infinity.contains(&infinity_pair(rec)) {
            return false;
        }
        for (p, set) in &self.primes {
            match pair_at(rec, *p) {
                Some(s) if set.contains(&s) => {}
                _ => return false,
            }
        }
        rec.splitting.iter().all(|(p, s)| self.primes.contains_key(p) || self.default_allows(rec, *p, s))
    }
}

/// Splitting pair of a record at any prime, ramified or not.
pub fn pair_at(rec: &D4FieldRecord, p: u64) -> Option<SplittingPair> {
    rec.splitting.get(&p).copied().or_else(|| local_data(rec.d, &rec.alpha, p).map(|l| l.pair))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusTable {
    pub records: Vec<D4FieldRecord>,
    pub bound_c: u64,
    pub bound_d: u64,
    pub spec: LocalSpecification,
}

impl CensusTable {
    /// Counts by r2 = 0, 1, 2.
    pub fn signature_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for r in &self.records {
            c[r.r2 as usize] += 1;
        }
        c
    }

    pub fn filter(&self, spec: &LocalSpecification) -> CensusTable {
        CensusTable {
            records: self.records.iter().filter(|r| spec.allows(r)).cloned().collect(),
            bound_c: self.bound_c,
            bound_d: self.bound_d,
            spec: spec.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusConfig {
    pub slack: u64,
    /// Enumerate every |D| ≤ Y directly instead of reaching large |d|
    /// through companion fields.
    pub direct_only: bool,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig { slack: DEFAULT_SLACK, direct_only: false }
    }
}

// ---------------------------------------------------------------------------
// per-field enumeration

#[derive(Clone, Copy)]
struct Ideal {
    content: u64,
    form: Form,
    norm: u64,
}

fn normalize(f: Form) -> Form {
    let k = (f.a - f.b).div_euclid(2 * f.a);
    if k == 0 {
        return f;
    }
    let b = f.b + 2 * f.a * k;
    Form::new(f.a, b, (b * b - f.disc()) / (4 * f.a))
}

fn prime_form(d: i64, p: u64) -> Form {
    let dd = d as i128;
    let p = p as i128;
    let mut b = sqrt_mod_prime(d.rem_euclid(p as i64) as u64, p as u64).unwrap() as i128;
    if (b - dd).rem_euclid(2) != 0 {
        b = p - b;
    }
    normalize(Form::new(p, b, (b * b - dd) / (4 * p)))
}

fn conj(f: Form) -> Form {
    normalize(Form::new(f.a, -f.b, f.c))
}

fn mul_ideal(a: &Ideal, f: &Form, content: u64, norm: u64) -> Ideal {
    let (d1, g) = compose_raw(&a.form, f);
    debug_assert_eq!(d1, 1);
    Ideal { content: a.content * content, form: normalize(g), norm: a.norm * norm }
}

struct FieldContext {
    d: i64,
    table: ClassTable,
    roots: Vec<Vec<usize>>,
    units: Vec<QuadElem>,
    eps: Option<(QuadElem, f64)>,
    d_primes: Vec<u64>,
}

impl FieldContext {
    fn new(d: i64) -> Result<Self, CensusError> {
        let table = ClassTable::new(d as i128, false).with_table();
        let h = table.order();
        let mut roots = vec![Vec::new(); h];
        for j in 0..h {
            roots[table.mul(j, j)].push(j);
        }
        let one = QuadElem::from_i64(2, 0);
        let minus = QuadElem::from_i64(-2, 0);
        let (units, eps) = if d == -4 {
            (vec![one, QuadElem::from_i64(0, 1)], None)
        } else if d < 0 {
            (vec![one, minus], None)
        } else {
            let u = fundamental_unit(d)?;
            let e = QuadElem::new(u.t.clone(), u.u.clone());
            let me = QuadElem::new(-u.t, -u.u);
            (vec![one, minus, e.clone(), me], Some((e, u.log)))
        };
        let d_primes = factor_u128(d.unsigned_abs() as u128).into_iter().map(|(p, _)| p as u64).collect();
        Ok(FieldContext { d, table, roots, units, eps, d_primes })
    }

    /// Ideals above 2 whose product with 𝔞 covers every 2-adic square class:
    /// (content, primitive factor).
    fn two_options(&self) -> Vec<(u64, Option<Form>)> {
        let d = self.d;
        match d.rem_euclid(8) {
            1 => {
                let dd = d as i128;
                let b = if (1 - dd).rem_euclid(8) == 0 { 1 } else { 3 };
                let p1 = normalize(Form::new(2, b, (b * b - dd) / 8));
                vec![(1, None), (1, Some(p1)), (1, Some(conj(p1))), (2, None)]
            }
            5 => vec![(1, None), (2, None)],
            _ => {
                let dd = d as i128;
                let b = if (dd / 4).rem_euclid(4) == 2 { 0 } else { 2 };
                vec![(1, None), (1, Some(normalize(Form::new(2, b, (b * b - dd) / 8))))]
            }
        }
    }

    fn balance(&self, a: QuadElem) -> QuadElem {
        let Some((eps, log_eps)) = &self.eps else { return a };
        let diff = a.log_abs(self.d, false) - a.log_abs(self.d, true);
        let k = (-diff / (4.0 * log_eps)).round() as i64;
        if k == 0 {
            return a;
        }
        let base = if k > 0 { eps.clone() } else { eps.conj() };
        let sq = base.mul(&base, self.d);
        let mut out = a;
        for _ in 0..k.abs() {
            out = out.mul(&sq, self.d);
        }
        out
    }
}

/// Removes rational square factors from α when the quotient stays integral.
pub fn strip_square_content(alpha: QuadElem, d: i64) -> QuadElem {
    let g = alpha.x.gcd(&alpha.y);
    if g.is_zero() || g.is_one() {
        return alpha;
    }
    let Ok(f) = factor(&g) else { return alpha };
    let mut a = alpha;
    for &(r, e) in &f.parts {
        if e < 2 {
            continue;
        }
        let r = BigInt::from(r);
        while let Some(next) = local::divisible_by_square(&a, d, &r) {
            a = next;
        }
    }
    a
}

/// The generator (−P + y√d)/2 with y ≥ 0 and N = Q, if it exists.
pub fn alpha_from_pq(p: &BigInt, q: &BigInt, d: i64) -> Option<QuadElem> {
    let x = -p.clone();
    let y2: BigInt = &x * &x - q * 4;
    let (y2, r) = y2.div_rem(&BigInt::from(d));
    if !r.is_zero() || y2.is_negative() {
        return None;
    }
    let y = y2.sqrt();
    (&y * &y == y2).then(|| QuadElem::new(x, y))
}

/// Normalized (P, Q) = (−Tr α, N α) from a Kummer generator.
fn poly_of(alpha: &QuadElem, d: i64) -> (BigInt, BigInt) {
    (-alpha.x.clone(), alpha.norm(d))
}

fn is_d4(alpha: &QuadElem, d: i64) -> bool {
    let n = alpha.norm(d);
    !n.is_zero() && !is_square_bigint(&n) && !is_square_bigint(&(&n * d))
}

/// Builds the record of K(√α) from local data at `primes` (which must
/// contain 2, every prime of d and every prime where α has odd valuation).
fn record_from_alpha(d: i64, alpha: QuadElem, primes: &[u64]) -> Result<D4FieldRecord, CensusError> {
    let mut splitting = BTreeMap::new();
    let mut q_abs: u128 = 1;
    for &p in primes {
        let ld = local_data(d, &alpha, p).ok_or_else(|| CensusError::Internal(format!("d={d} p={p}")))?;
        if ld.q_exp > 0 || d.unsigned_abs() % p == 0 {
            splitting.insert(p, ld.pair);
        }
        q_abs = (p as u128)
            .checked_pow(ld.q_exp)
            .and_then(|x| x.checked_mul(q_abs))
            .ok_or_else(|| CensusError::Bound("conductor overflow".into()))?;
    }
    let (pp, qq) = poly_of(&alpha, d);
    let r2 = r2_of(&pp, &qq);
    let q = if r2 == 1 { -(q_abs as i128) } else { q_abs as i128 };
    let dd = d as i128;
    // y ≥ 0 so that (P, Q, d) alone recovers the generator
    let alpha = if alpha.y.is_negative() { alpha.conj() } else { alpha };
    Ok(D4FieldRecord::assemble(pp, qq, q * dd * dd, d, r2, splitting, alpha))
}

fn merge_primes(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = a.iter().chain(b).copied().chain([2]).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Every D4 field with quadratic subfield Q(√D) and |C| ≤ cond_bound,
/// once each up to isomorphism.
pub fn kummer_extensions(d: i64, cond_bound: u64) -> Result<Vec<D4FieldRecord>, CensusError> {
    kummer_extensions_with(d, cond_bound, DEFAULT_SLACK)
}

pub fn kummer_extensions_with(d: i64, cond_bound: u64, slack: u64) -> Result<Vec<D4FieldRecord>, CensusError> {
    if !matches!(is_fundamental_discriminant(d as i128), Ok(true)) {
        return Err(CensusError::NotFundamental(d));
    }
    let ad = d.unsigned_abs();
    if ad > cond_bound {
        return Ok(Vec::new());
    }
    let ctx = FieldContext::new(d)?;
    let bound = slack.max(1) * (cond_bound / ad);
    let odd_primes: Vec<u64> = primes_up_to(bound as usize).into_iter().filter(|&p| p != 2).collect();
    let forms: Vec<Option<Form>> =
        odd_primes.iter().map(|&p| (kronecker(d as i128, p as i128) >= 0).then(|| prime_form(d, p))).collect();

    let mut out = Vec::new();
    let start = Ideal { content: 1, form: Form::principal(d as i128), norm: 1 };
    let mut stack = vec![(start, 0usize, Vec::<u64>::new())];
    let twos = ctx.two_options();
    while let Some((ideal, idx, ps)) = stack.pop() {
        for (c2, f2) in &twos {
            let b = match f2 {
                Some(f) => mul_ideal(&ideal, f, *c2, 1),
                None => Ideal { content: ideal.content * c2, ..ideal },
            };
            emit(&ctx, &b, &ps, cond_bound, &mut out)?;
        }
        for j in idx..odd_primes.len() {
            let p = odd_primes[j];
            if ideal.norm * p > bound {
                break;
            }
            let mut next_ps = ps.clone();
            next_ps.push(p);
            match forms[j] {
                Some(f) if d.unsigned_abs() % p == 0 => {
                    stack.push((mul_ideal(&ideal, &f, 1, p), j + 1, next_ps));
                }
                Some(f) => {
                    stack.push((mul_ideal(&ideal, &f, 1, p), j + 1, next_ps.clone()));
                    stack.push((mul_ideal(&ideal, &conj(f), 1, p), j + 1, next_ps.clone()));
                    if ideal.norm * p * p <= bound {
                        let whole = Ideal { content: ideal.content * p, form: ideal.form, norm: ideal.norm * p * p };
                        stack.push((whole, j + 1, next_ps));
                    }
                }
                None => {
                    if ideal.norm * p * p <= bound {
                        let whole = Ideal { content: ideal.content * p, form: ideal.form, norm: ideal.norm * p * p };
                        stack.push((whole, j + 1, next_ps));
                    }
                }
            }
        }
    }
    out.sort_by_key(|r| r.sort_key());
    Ok(out)
}

fn emit(
    ctx: &FieldContext,
    b: &Ideal,
    a_primes: &[u64],
    cond_bound: u64,
    out: &mut Vec<D4FieldRecord>,
) -> Result<(), CensusError> {
    let d = ctx.d;
    let key = (b.content, b.form.a, b.form.b);
    let ck = conj(b.form);
    let ckey = (b.content, ck.a, ck.b);
    if ckey < key {
        return Ok(());
    }
    let self_conj = ckey == key;
    let t = &ctx.table;
    let target = t.inverse(t.class_of(&b.form));
    let primes = merge_primes(a_primes, &ctx.d_primes);
    let mut found: Vec<D4FieldRecord> = Vec::new();
    for &j in &ctx.roots[target] {
        let c = t.reps[j];
        let (d1, f1) = compose_raw(&c, &c);
        let (d2, f2) = compose_raw(&b.form, &f1);
        let f2 = normalize(f2);
        let content = b.content as i128 * d1 * d2;
        let gen = ideal_generator(d, content, f2.a, f2.b)
            .ok_or_else(|| CensusError::Internal(format!("d={d}: ideal not principal")))?;
        for u in &ctx.units {
            let alpha = strip_square_content(ctx.balance(gen.mul(u, d)), d);
            if !is_d4(&alpha, d) {
                continue;
            }
            let rec = record_from_alpha(d, alpha, &primes)?;
            if rec.cond_abs > cond_bound as u128 {
                continue;
            }
            if self_conj && found.iter().any(|r| crate::quartic::isomorphic(r, &rec)) {
                continue;
            }
            found.push(rec);
        }
    }
    out.extend(found);
    Ok(())
}

// ---------------------------------------------------------------------------
// companion fields

/// The companion field generated by θ + θ', with θ² = α and θ'² = ᾱ.
pub fn twin_record(rec: &D4FieldRecord) -> Result<D4FieldRecord, CensusError> {
    let d = rec.d;
    // α·β² changes the companion generator but not its field, as long as
    // the new generator still has degree 4
    let betas = [(2i64, 0i64), (2, 2), (4, 2), (2, 4), (6, 2)];
    for (bx, by) in betas {
        let beta = QuadElem::from_i64(bx, by);
        if !beta.is_integral(d) {
            continue;
        }
        let alpha = rec.alpha.mul(&beta.mul(&beta, d), d);
        let (p, q) = poly_of(&alpha, d);
        let p2: BigInt = &p * 2;
        let q2: BigInt = &p * &p - &q * 4;
        if galois_type(&p2, &q2) != GaloisType::D4 {
            continue;
        }
        let (d2, a2) = alpha_of(&p2, &q2).ok_or_else(|| CensusError::Bound("companion too large".into()))?;
        let a2 = strip_square_content(a2, d2);
        let mut primes: Vec<u64> = factor_u128(rec.cond_abs).into_iter().map(|(p, _)| p as u64).collect();
        primes.push(2);
        primes.sort_unstable();
        primes.dedup();
        let tw = record_from_alpha(d2, a2, &primes)?;
        if tw.cond_abs != rec.cond_abs {
            return Err(CensusError::Internal(format!("companion conductor {} vs {}", tw.cond_abs, rec.cond_abs)));
        }
        return Ok(tw);
    }
    Err(CensusError::Internal(format!("no companion generator for P={} Q={}", rec.p, rec.q_poly)))
}

/// Discriminant of the companion's quadratic subfield, Q(√N(α)).
pub fn twin_d(rec: &D4FieldRecord) -> Option<i64> {
    let n = rec.alpha.norm(rec.d).to_i128()?;
    quadratic_field_disc(n).and_then(|(d, _)| i64::try_from(d).ok())
}

// ---------------------------------------------------------------------------
// census

pub fn census(x: u64, y: Option<u64>, spec: &LocalSpecification) -> Result<CensusTable, CensusError> {
    census_with(x, y, spec, &CensusConfig::default())
}

pub fn census_with(
    x: u64,
    y: Option<u64>,
    spec: &LocalSpecification,
    cfg: &CensusConfig,
) -> Result<CensusTable, CensusError> {
    let y = y.unwrap_or(x);
    if x > CENSUS_MAX_X {
        return Err(CensusError::Bound(format!("X = {x} exceeds {CENSUS_MAX_X}")));
    }
    if y > x {
        return Err(CensusError::Bound(format!("Y = {y} exceeds X = {x}")));
    }
    spec.validate().map_err(CensusError::Bound)?;
    let direct = if cfg.direct_only { y } else { y.min(isqrt_u128(x as u128) as u64) };
    let ds = fundamental_discriminants(direct);
    let per_d: Vec<Vec<D4FieldRecord>> =
        ds.par_iter().map(|&d| kummer_extensions_with(d, x, cfg.slack)).collect::<Result<_, _>>()?;
    let mut records: Vec<D4FieldRecord> = per_d.into_iter().flatten().collect();
    if direct < y {
        let twins: Vec<D4FieldRecord> = records
            .par_iter()
            .filter(|r| twin_d(r).is_some_and(|d2| d2.unsigned_abs() > direct && d2.unsigned_abs() <= y))
            .map(twin_record)
            .collect::<Result<_, _>>()?;
        records.extend(twins);
    }
    records.retain(|r| spec.allows(r));
    records.sort_by_key(|r| r.sort_key());
    Ok(CensusTable { records, bound_c: x, bound_d: y, spec: spec.clone() })
}

/// Groups records sharing (d, cond_abs), the key under which isomorphic
/// fields must collide.
pub(crate) fn index_by_d_cond(records: &[D4FieldRecord]) -> HashMap<(i64, u128), Vec<usize>> {
    let mut m: HashMap<(i64, u128), Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        m.entry((r.d, r.cond_abs)).or_default().push(i);
    }
    m
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartic::{field_invariants, isomorphic, splitting_at};
    use rand::{Rng, SeedableRng};

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn local_data_matches_round_two() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 600 {
            let p: i64 = rng.gen_range(-60..=60);
            let q: i64 = rng.gen_range(-200..=200);
            let Ok(rec) = field_invariants(&b(p), &b(q)) else { continue };
            checked += 1;
            let mut primes: Vec<u64> = rec.splitting.keys().copied().collect();
            primes.extend([2, 3, 5, 7, 11]);
            primes.sort_unstable();
            primes.dedup();
            for pr in primes {
                let ld = local_data(rec.d, &rec.alpha, pr).unwrap_or_else(|| panic!("P={p} Q={q} p={pr}"));
                let want = splitting_at(&rec, pr).unwrap();
                assert_eq!(ld.pair, want, "P={p} Q={q} p={pr}");
                let vq = {
                    let mut n = rec.q.unsigned_abs();
                    let mut v = 0;
                    while n % pr as u128 == 0 {
                        n /= pr as u128;
                        v += 1;
                    }
                    v
                };
                assert_eq!(ld.q_exp, vq, "P={p} Q={q} p={pr}");
            }
        }
    }

    #[test]
    fn census_records_match_round_two() {
        let t = census(3000, None, &LocalSpecification::full()).unwrap();
        assert!(!t.records.is_empty());
        for r in t.records.iter().step_by(7) {
            r.check().unwrap();
            assert_eq!(alpha_from_pq(&r.p, &r.q_poly, r.d).as_ref(), Some(&r.alpha));
            let f = field_invariants(&r.p, &r.q_poly).unwrap();
            assert_eq!((f.disc_l, f.d, f.r2), (r.disc_l, r.d, r.r2), "P={} Q={}", r.p, r.q_poly);
            assert_eq!(f.splitting, r.splitting);
            assert!(isomorphic(&f, r));
        }
    }

    #[test]
    fn kummer_examples() {
        let recs = kummer_extensions(8, 300).unwrap();
        let x4m2 = field_invariants(&b(0), &b(-2)).unwrap();
        assert!(recs.iter().any(|r| isomorphic(r, &x4m2)));
        let recs = kummer_extensions(-4, 100).unwrap();
        let f = field_invariants(&b(-2), &b(2)).unwrap();
        assert_eq!(f.cond_signed, -128);
        assert!(!recs.iter().any(|r| isomorphic(r, &f)));
        assert!(kummer_extensions(-4, 128).unwrap().iter().any(|r| isomorphic(r, &f)));
        assert!(kummer_extensions(5, 20).unwrap().is_empty());
        assert!(kummer_extensions(12 * 3, 100).is_err());
    }

    #[test]
    fn census_examples() {
        let t = census(256, None, &LocalSpecification::full()).unwrap();
        let x4m2 = field_invariants(&b(0), &b(-2)).unwrap();
        assert!(t.records.iter().any(|r| isomorphic(r, &x4m2)));
        assert!(census(10, None, &LocalSpecification::full()).unwrap().records.is_empty());
        let t = census(39, None, &LocalSpecification::classgroup(ClassVariant::B)).unwrap();
        assert_eq!(t.records.len(), 2);
        assert!(t.records.iter().all(|r| r.cond_abs == 39));
    }

    #[test]
    fn no_duplicates_and_sorted() {
        let t = census(2000, None, &LocalSpecification::full()).unwrap();
        let idx = index_by_d_cond(&t.records);
        for v in idx.values() {
            for (i, &a) in v.iter().enumerate() {
                for &c in &v[i + 1..] {
                    assert!(!isomorphic(&t.records[a], &t.records[c]));
                }
            }
        }
        assert!(t.records.windows(2).all(|w| w[0].sort_key() <= w[1].sort_key()));
    }

    #[test]
    fn companions_agree_with_direct_enumeration() {
        let full = LocalSpecification::full();
        let a = census(3000, None, &full).unwrap();
        let cfg = CensusConfig { direct_only: true, ..Default::default() };
        let b_ = census_with(3000, None, &full, &cfg).unwrap();
        assert_eq!(a.records.len(), b_.records.len());
        for (r, s) in a.records.iter().zip(&b_.records) {
            assert_eq!((r.cond_abs, r.d, r.q), (s.cond_abs, s.d, s.q));
        }
        let idx = index_by_d_cond(&b_.records);
        for r in &a.records {
            assert!(idx[&(r.d, r.cond_abs)].iter().any(|&i| isomorphic(r, &b_.records[i])));
        }
    }

    #[test]
    fn companion_is_an_involution() {
        let t = census(1500, None, &LocalSpecification::full()).unwrap();
        for r in t.records.iter().take(200) {
            let tw = twin_record(r).unwrap();
            let back = twin_record(&tw).unwrap();
            assert!(isomorphic(&back, r) || isomorphic(&back, &conjugate(r)), "P={} Q={}", r.p, r.q_poly);
            assert!(!isomorphic(&tw, r));
        }
    }

    fn full_3000() -> &'static CensusTable {
        static T: std::sync::OnceLock<CensusTable> = std::sync::OnceLock::new();
        T.get_or_init(|| census(3000, None, &LocalSpecification::full()).unwrap())
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn local_data_agrees_at_small_primes(p in -80i64..80, q in -400i64..400) {
            let Ok(rec) = field_invariants(&b(p), &b(q)) else { return Ok(()) };
            for pr in [2u64, 3, 5, 7, 11, 13] {
                let ld = local_data(rec.d, &rec.alpha, pr).unwrap();
                proptest::prop_assert_eq!(ld.pair, splitting_at(&rec, pr).unwrap());
            }
        }

        #[test]
        fn filtering_commutes_with_census(
            mask in proptest::collection::vec(proptest::bool::ANY, 12),
            rule in 0usize..3,
            inf in 1u8..16,
        ) {
            let rules = [DefaultRule::Full, DefaultRule::Acceptable, DefaultRule::NoCentralInertia];
            let mut spec = LocalSpecification::with_rule(rules[rule]);
            spec.infinity = infinity_pairs().into_iter().enumerate().filter(|(i, _)| inf >> i & 1 == 1).map(|(_, s)| s).collect();
            let at3 = SplittingPair::LEGAL.iter().zip(&mask).filter(|(_, m)| **m).map(|(s, _)| *s);
            spec = spec.with_prime(3, at3);
            let direct = census(3000, None, &spec).unwrap();
            let filtered = full_3000().filter(&spec);
            proptest::prop_assert_eq!(&direct.records, &filtered.records);
            proptest::prop_assert!(direct.records.iter().all(|r| spec.allows(r) && r.cond_abs <= 3000));
        }
    }

    fn conjugate(r: &D4FieldRecord) -> D4FieldRecord {
        D4FieldRecord { alpha: r.alpha.conj(), ..r.clone() }
    }

    #[test]
    fn spec_predicates() {
        assert!(LocalSpecification::full().is_stable());
        let s = LocalSpecification::full().with_prime(3, [SplittingPair::LEGAL[0]]);
        assert!(!s.is_stable());
        let inert = SplittingPair::LEGAL.iter().filter(|s| s.quadratic == QuadType::Inert).copied();
        let s = LocalSpecification::full().with_prime(3, inert);
        assert!(s.is_stable());
        let bad = LocalSpecification::full().with_prime(3, [sp(QuarticType::T4, QuadType::Split)]);
        assert!(bad.validate().is_err());
    }
}
