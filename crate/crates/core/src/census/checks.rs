//! Consistency checks built on the census: the companion pairing, the
//! class-group count, the small-d main term and two independent oracles.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::{
    census, census_with, index_by_d_cond, twin_record, CensusConfig, CensusError, CensusTable, ClassVariant,
    LocalSpecification,
};
use crate::arith::{fundamental_discriminants, is_square_bigint, quadratic_field_disc};
use crate::quadfield::{class_group, l_ratio, ZETA2};
use crate::quartic::{field_invariants, galois_type, isomorphic, D4FieldRecord, GaloisType};
use crate::vpairs::orbit_census;

fn odd_part(mut n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    while n % 2 == 0 {
        n /= 2;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiReport {
    /// (i, j) with i < j, each record in at most one pair.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched: Vec<usize>,
    /// Records with more than one partner passing the invariant filter.
    pub ambiguous: Vec<usize>,
    /// Pairs whose invariants break the expected relations.
    pub violations: Vec<(usize, usize)>,
}

impl PhiReport {
    pub fn is_perfect(&self) -> bool {
        self.unmatched.is_empty() && self.violations.is_empty()
    }
}

/// Invariant relations that a record and its companion must satisfy.
pub fn phi_compatible(a: &D4FieldRecord, b: &D4FieldRecord) -> bool {
    a.cond_abs == b.cond_abs
        && a.j_odd == b.j_odd
        && a.j_odd != 0
        && odd_part(a.d.unsigned_abs() as u128) * a.j_odd == odd_part(b.q.unsigned_abs())
        && odd_part(b.d.unsigned_abs() as u128) * b.j_odd == odd_part(a.q.unsigned_abs())
}

/// Matches every record of a full table with its companion field.
pub fn phi_pairing(table: &CensusTable) -> Result<PhiReport, CensusError> {
    let recs = &table.records;
    let idx = index_by_d_cond(recs);
    let mut partner: Vec<Option<usize>> = vec![None; recs.len()];
    let mut ambiguous = Vec::new();
    let mut unmatched = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let tw = twin_record(r)?;
        let cands: Vec<usize> = idx
            .get(&(tw.d, tw.cond_abs))
            .map(|v| v.iter().copied().filter(|&j| j != i && phi_compatible(r, &recs[j])).collect())
            .unwrap_or_default();
        if cands.len() > 1 {
            ambiguous.push(i);
        }
        match cands.into_iter().find(|&j| isomorphic(&recs[j], &tw)) {
            Some(j) => partner[i] = Some(j),
            None => unmatched.push(i),
        }
    }
    let mut pairs = Vec::new();
    let mut violations = Vec::new();
    for (i, p) in partner.iter().enumerate() {
        let Some(j) = *p else { continue };
        if partner[j] != Some(i) {
            violations.push((i, j));
        } else if i < j {
            pairs.push((i, j));
        }
    }
    Ok(PhiReport { pairs, unmatched, ambiguous, violations })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupReport {
    pub x: u64,
    pub variant: ClassVariant,
    /// Σ (#Cl[4] − #Cl[2]) over the variant's discriminants.
    pub lhs: u64,
    /// Fields counted by the census.
    pub rhs: u64,
    /// Discriminants contributing to the class-group side.
    pub contributors: Vec<(i64, u64)>,
}

impl ClassGroupReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub const CLASSGROUP_MAX_X: u64 = 10_000;

/// #Cl[4] − #Cl[2] from the invariant factors of a finite abelian group.
pub fn four_rank_excess(factors: &[u64]) -> u64 {
    let t = |k: u64| factors.iter().map(|&f| num_integer::gcd(f, k)).product::<u64>();
    t(4) - t(2)
}

/// Order-4 elements of class groups against D4 fields whose quadratic
/// subfield is cut out by them.
pub fn classgroup_identity_check(x: u64, variant: ClassVariant) -> Result<ClassGroupReport, CensusError> {
    let narrow = variant == ClassVariant::C;
    classgroup_identity_check_with(x, variant, |d| {
        let g = class_group(d)?;
        Ok(if narrow { g.narrow_cyclic_factors } else { g.cyclic_factors })
    })
}

/// As [`classgroup_identity_check`], with the invariant factors of the
/// relevant class group (narrow for variant c) supplied by `factors`.
pub fn classgroup_identity_check_with(
    x: u64,
    variant: ClassVariant,
    mut factors: impl FnMut(i64) -> Result<Vec<u64>, CensusError>,
) -> Result<ClassGroupReport, CensusError> {
    if x > CLASSGROUP_MAX_X {
        return Err(CensusError::Bound(format!("X = {x} exceeds {CLASSGROUP_MAX_X}")));
    }
    let want_pos = variant != ClassVariant::B;
    let mut lhs = 0;
    let mut contributors = Vec::new();
    for d in fundamental_discriminants(x) {
        if (d > 0) != want_pos {
            continue;
        }
        let c = four_rank_excess(&factors(d)?);
        if c > 0 {
            lhs += c;
            contributors.push((d, c));
        }
    }
    let rhs = census(x, Some(x), &LocalSpecification::classgroup(variant))?.records.len() as u64;
    Ok(ClassGroupReport { x, variant, lhs, rhs, contributors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MainTermReport {
    pub x: u64,
    pub beta: f64,
    pub d_bound: u64,
    pub count: u64,
    pub predicted: f64,
    pub ratio: f64,
}

pub const MAINTERM_MAX_X: u64 = 100_000;

/// (X/(2ζ(2)))·Σ_{|D| ≤ Y} l_ratio(D)·2^{−r2(D)}/|D|, with r2 = 1 for D < 0.
pub fn smalld_prediction(x: u64, d_bound: u64) -> Result<f64, CensusError> {
    let mut s = 0.0;
    for d in fundamental_discriminants(d_bound) {
        let w = if d < 0 { 0.5 } else { 1.0 };
        s += l_ratio(d)? * w / d.unsigned_abs() as f64;
    }
    Ok(x as f64 / (2.0 * ZETA2) * s)
}

pub fn smalld_mainterm_check(x: u64, beta: f64) -> Result<MainTermReport, CensusError> {
    if x > MAINTERM_MAX_X {
        return Err(CensusError::Bound(format!("X = {x} exceeds {MAINTERM_MAX_X}")));
    }
    if !(beta > 0.0 && beta < 2.0 / 3.0) {
        return Err(CensusError::Bound(format!("beta = {beta} outside (0, 2/3)")));
    }
    let d_bound = ((x as f64).powf(beta) + 1e-9).floor() as u64;
    let count = census(x, Some(d_bound), &LocalSpecification::full())?.records.len() as u64;
    let predicted = smalld_prediction(x, d_bound)?;
    let ratio = if predicted > 0.0 { count as f64 / predicted } else { f64::NAN };
    Ok(MainTermReport { x, beta, d_bound, count, predicted, ratio })
}

/// Fields of x⁴ + Px² + Q over the box |P| ≤ p_max, |Q| ≤ q_max with
/// |C| ≤ x, deduplicated, via Round 2.
pub fn box_oracle(p_max: i64, q_max: i64, x: u64) -> Result<Vec<D4FieldRecord>, CensusError> {
    let mut out: Vec<D4FieldRecord> = Vec::new();
    for p in -p_max..=p_max {
        for q in -q_max..=q_max {
            if q == 0 {
                continue;
            }
            let (pb, qb) = (BigInt::from(p), BigInt::from(q));
            if is_square_bigint(&qb) || galois_type(&pb, &qb) != GaloisType::D4 {
                continue;
            }
            // |d| ≤ |C| is necessary
            let delta = (p as i128) * (p as i128) - 4 * q as i128;
            match quadratic_field_disc(delta) {
                Some((d, _)) if d.unsigned_abs() <= x as u128 => {}
                _ => continue,
            }
            let rec = field_invariants(&pb, &qb)?;
            if rec.cond_abs > x as u128 {
                continue;
            }
            if !out.iter().any(|r| isomorphic(r, &rec)) {
                out.push(rec);
            }
        }
    }
    out.sort_by_key(|r| r.sort_key());
    Ok(out)
}

/// Box-oracle fields missing from the census at the same bound.
pub fn box_cross_check(p_max: i64, q_max: i64, x: u64) -> Result<(usize, Vec<D4FieldRecord>), CensusError> {
    let oracle = box_oracle(p_max, q_max, x)?;
    let t = census(x, Some(x), &LocalSpecification::full())?;
    let idx = index_by_d_cond(&t.records);
    let missing = oracle
        .iter()
        .filter(|r| !idx.get(&(r.d, r.cond_abs)).is_some_and(|v| v.iter().any(|&i| isomorphic(&t.records[i], r))))
        .cloned()
        .collect();
    Ok((oracle.len(), missing))
}

/// Census sizes at the same bound for each candidate-norm slack.
pub fn slack_counts(x: u64, slacks: &[u64]) -> Result<Vec<(u64, usize)>, CensusError> {
    slacks
        .iter()
        .map(|&s| {
            let cfg = CensusConfig { slack: s, ..Default::default() };
            Ok((s, census_with(x, Some(x), &LocalSpecification::full(), &cfg)?.records.len()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitComparison {
    pub census_count: usize,
    pub orbit_count: usize,
    /// (cond, d, q, P, Q) of fields seen by only one side.
    pub only_census: Vec<String>,
    pub only_orbits: Vec<String>,
}

impl OrbitComparison {
    pub fn agrees(&self) -> bool {
        self.only_census.is_empty() && self.only_orbits.is_empty()
    }
}

fn describe(r: &D4FieldRecord) -> String {
    format!("C={} d={} q={} P={} Q={}", r.cond_signed, r.d, r.q, r.p, r.q_poly)
}

/// Census restricted to |q| ≤ q_bound, |d| ≤ d_bound against the
/// maximal orbits of pairs of ternary forms.
pub fn orbit_cross_check(q_bound: u64, d_bound: u64) -> Result<OrbitComparison, CensusError> {
    let orbits =
        orbit_census(q_bound, d_bound).map_err(|e| CensusError::Bound(format!("orbit census: {e}")))?;
    let x = q_bound * d_bound;
    let t = census(x, Some(d_bound), &LocalSpecification::full())?;
    let ours: Vec<&D4FieldRecord> = t.records.iter().filter(|r| r.q.unsigned_abs() <= q_bound as u128).collect();
    let only = |a: &[&D4FieldRecord], b: &[&D4FieldRecord]| -> Vec<String> {
        a.iter().filter(|r| !b.iter().any(|s| isomorphic(r, s))).map(|r| describe(r)).collect()
    };
    let theirs: Vec<&D4FieldRecord> = orbits.records.iter().collect();
    Ok(OrbitComparison {
        census_count: ours.len(),
        orbit_count: theirs.len(),
        only_census: only(&ours, &theirs),
        only_orbits: only(&theirs, &ours),
    })
}

/// Fraction of records with each r2 against 1/4 : 3/8 : 1/8 (normalized).
pub fn signature_ratios(table: &CensusTable) -> [f64; 3] {
    let c = table.signature_counts();
    let n = c.iter().sum::<usize>().max(1) as f64;
    [c[0] as f64 / n, c[1] as f64 / n, c[2] as f64 / n]
}

pub const SIGNATURE_TARGET: [f64; 3] = [1.0 / 3.0, 0.5, 1.0 / 6.0];

/// Distinct conductors in a table, handy for spot checks.
pub fn conductors(table: &CensusTable) -> BTreeSet<u128> {
    table.records.iter().map(|r| r.cond_abs).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classgroup_small() {
        let r = classgroup_identity_check(40, ClassVariant::B).unwrap();
        assert_eq!((r.lhs, r.rhs), (2, 2));
        assert_eq!(r.contributors, vec![(-39, 2)]);
        let r = classgroup_identity_check(40, ClassVariant::A).unwrap();
        assert_eq!((r.lhs, r.rhs), (0, 0));
        for v in ClassVariant::ALL {
            let r = classgroup_identity_check(4, v).unwrap();
            assert_eq!((r.lhs, r.rhs), (0, 0));
        }
    }

    #[test]
    fn classgroup_moderate() {
        for v in ClassVariant::ALL {
            let r = classgroup_identity_check(1500, v).unwrap();
            assert!(r.holds(), "{v:?}: {} vs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn phi_small() {
        let t = census(500, None, &LocalSpecification::full()).unwrap();
        let r = phi_pairing(&t).unwrap();
        assert!(r.is_perfect(), "{r:?}");
        assert_eq!(r.pairs.len() * 2, t.records.len());
        let empty = CensusTable { records: vec![], ..t.clone() };
        assert!(phi_pairing(&empty).unwrap().pairs.is_empty());
        let x4m2 = field_invariants(&BigInt::from(0), &BigInt::from(-2)).unwrap();
        let i = t.records.iter().position(|r| isomorphic(r, &x4m2)).unwrap();
        let &(a, b) = r.pairs.iter().find(|(a, b)| *a == i || *b == i).unwrap();
        assert_eq!(t.records[a].cond_abs, 256);
        assert_eq!(t.records[b].cond_abs, 256);
    }

    #[test]
    fn small_box() {
        let (n, missing) = box_cross_check(30, 60, 600).unwrap();
        assert!(n > 10);
        assert!(missing.is_empty(), "{missing:?}");
    }

    #[test]
    fn slack_is_inert() {
        let c = slack_counts(800, &[1, 4]).unwrap();
        assert_eq!(c[0].1, c[1].1);
    }

    #[test]
    fn mainterm_small_runs() {
        let r = smalld_mainterm_check(100, 0.5).unwrap();
        assert!(r.predicted > 0.0);
        assert!(smalld_prediction(100_000, 316).unwrap() < smalld_prediction(100_000, 1000).unwrap());
    }
}
