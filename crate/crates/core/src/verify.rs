//! Named check suites. Each suite returns one report line per comparison;
//! the CLI prints them and the acceptance test asserts on them.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::arith::primes_up_to;
use crate::census::{
    box_cross_check, census, classgroup_identity_check, orbit_cross_check, phi_pairing, signature_ratios,
    slack_counts, smalld_mainterm_check, ClassVariant, LocalSpecification, SIGNATURE_TARGET,
};
use crate::massform::{
    conductor_factor_from_densities, density_identities, diag_sum, discriminant_constant, mu_mp, residual_sum,
    weighted_diagonal_sum, window_target, xi_tilde_two_exact, EulerKind,
};
use crate::quartic::{QuadType, QuarticType, SplittingPair};
use crate::vpairs::{central_inertia_sample, fp_density_counts, orbit_census, PairSplitting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub check_name: String,
    pub status: Status,
    pub expected: String,
    pub actual: String,
    pub tolerance: String,
    pub runtime_ms: u64,
}

/// Suites in acceptance order.
pub const SUITES: [&str; 9] =
    ["densities", "identities", "constants", "classgroups", "generators", "orbits", "diagonal", "mainterm", "montecarlo"];

fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

struct Recorder {
    out: Vec<VerifyReport>,
    clock: Instant,
}

impl Recorder {
    fn new() -> Self {
        Recorder { out: Vec::new(), clock: Instant::now() }
    }

    fn push(&mut self, name: String, status: Status, expected: String, actual: String, tolerance: &str) {
        let runtime_ms = self.clock.elapsed().as_millis() as u64;
        self.clock = Instant::now();
        self.out.push(VerifyReport { check_name: name, status, expected, actual, tolerance: tolerance.into(), runtime_ms });
    }

    fn exact<T: PartialEq + ToString>(&mut self, name: impl Into<String>, expected: T, actual: T) {
        let st = if expected == actual { Status::Pass } else { Status::Fail };
        self.push(name.into(), st, expected.to_string(), actual.to_string(), "exact");
    }

    fn close(&mut self, name: impl Into<String>, expected: f64, actual: f64, abs_tol: f64, tol_text: &str) {
        let st = if (actual - expected).abs() <= abs_tol { Status::Pass } else { Status::Fail };
        self.push(name.into(), st, fmt_f(expected), fmt_f(actual), tol_text);
    }

    fn truth(&mut self, name: impl Into<String>, expected: &str, actual: String, ok: bool) {
        let st = if ok { Status::Pass } else { Status::Fail };
        self.push(name.into(), st, expected.into(), actual, "exact");
    }

    fn info(&mut self, name: impl Into<String>, expected: String, actual: String) {
        self.push(name.into(), Status::Info, expected, actual, "-");
    }
}

pub fn run_suite(name: &str) -> Result<Vec<VerifyReport>, String> {
    let mut r = Recorder::new();
    match name {
        "densities" => densities(&mut r),
        "identities" => identities(&mut r),
        "constants" => constants(&mut r),
        "classgroups" => classgroups(&mut r),
        "generators" => generators(&mut r),
        "orbits" => orbits(&mut r),
        "diagonal" => diagonal(&mut r),
        "mainterm" => mainterm(&mut r),
        "montecarlo" => montecarlo(&mut r),
        _ => return Err(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", "))),
    }
    .map_err(|e| format!("{name}: {e}"))?;
    Ok(r.out)
}

pub fn passed(reports: &[VerifyReport]) -> bool {
    reports.iter().all(|r| r.status != Status::Fail)
}

type Res = Result<(), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn densities(r: &mut Recorder) -> Res {
    for p in [3u64, 5, 7] {
        let counts = fp_density_counts(p).map_err(err)?;
        let p8 = BigRational::from_integer(big(p).pow(8));
        for pair in &SplittingPair::LEGAL[..5] {
            let want = mu_mp(p, pair).map_err(err)? * &p8;
            let got = counts.get(&PairSplitting::Type(*pair)).copied().unwrap_or(0);
            r.exact(format!("p={p} count {pair}"), want.to_string(), got.to_string());
        }
        let ci = SplittingPair::new(QuarticType::T1sq1sq, QuadType::Split);
        let got = big(counts.get(&PairSplitting::Type(ci)).copied().unwrap_or(0));
        let (pm, pp, p4) = (big(p - 1), big(p + 1), big(p).pow(4));
        let stated: BigInt = &pm * &pm * &pp * &p4 / 2;
        r.exact(format!("p={p} count {ci} vs (p-1)^2(p+1)p^4/2"), stated.to_string(), got.to_string());
        let alt: BigInt = &pm * &pp * &p4 / 2;
        r.info(format!("p={p} count {ci} vs (p-1)(p+1)p^4/2"), alt.to_string(), got.to_string());
    }
    Ok(())
}

fn identities(r: &mut Recorder) -> Res {
    let mut bad = Vec::new();
    let primes = primes_up_to(100);
    for &p in &primes {
        if !density_identities(p).map_err(err)?.holds() {
            bad.push(p);
        }
    }
    r.truth(
        format!("both density sums, {} primes up to 100", primes.len()),
        "no failing prime",
        format!("failing primes {bad:?}"),
        bad.is_empty(),
    );
    Ok(())
}

fn constants(r: &mut Recorder) -> Res {
    r.exact("xi2_tilde(1,1)", BigRational::from_integer(1.into()), xi_tilde_two_exact(1, 1));
    r.exact("xi2_tilde(1,2)", BigRational::new(121.into(), 136.into()), xi_tilde_two_exact(1, 2));
    r.close("discriminant constant", 0.406, discriminant_constant(), 0.005, "abs 0.005");
    let mut bad = Vec::new();
    for p in primes_up_to(100) {
        if EulerKind::Conductor.factor_exact(p) != conductor_factor_from_densities(p).map_err(err)? {
            bad.push(p);
        }
    }
    r.truth("conductor Euler factor from density rows, p <= 100", "no failing prime", format!("{bad:?}"), bad.is_empty());
    Ok(())
}

fn classgroups(r: &mut Recorder) -> Res {
    for v in ClassVariant::ALL {
        let rep = classgroup_identity_check(5000, v).map_err(err)?;
        r.exact(format!("X=5000 variant {}", v.name()), rep.lhs, rep.rhs);
    }
    let rep = classgroup_identity_check(40, ClassVariant::B).map_err(err)?;
    r.exact("X=40 variant b, census", 2, rep.rhs);
    r.exact("X=40 variant b, class groups", 2, rep.lhs);
    r.exact("X=40 variant b, contributors", "[(-39, 2)]".to_string(), format!("{:?}", rep.contributors));
    Ok(())
}

fn generators(r: &mut Recorder) -> Res {
    let (n, missing) = box_cross_check(200, 400, 2000).map_err(err)?;
    r.info("box oracle fields, |P|<=200 |Q|<=400 C<=2000", "-".into(), n.to_string());
    r.exact("box oracle fields missing from census", 0, missing.len());
    let c = slack_counts(2000, &[16, 32, 1]).map_err(err)?;
    r.exact("census X=2000, norm factor 16 vs 32", c[0].1, c[1].1);
    r.info("census X=2000, norm factor 1", c[0].1.to_string(), c[2].1.to_string());
    Ok(())
}

fn orbits(r: &mut Recorder) -> Res {
    let o = orbit_cross_check(300, 50).map_err(err)?;
    r.exact("orbit fields vs census, |q|<=300 |d|<=50 (counts)", o.orbit_count, o.census_count);
    r.truth(
        "orbit fields vs census (isomorphism classes)",
        "no field on one side only",
        format!("census only {}, orbits only {}", o.only_census.len(), o.only_orbits.len()),
        o.agrees(),
    );
    let oc = orbit_census(300, 50).map_err(err)?;
    r.exact("maximal orbits violating Disc T = d or Nm = |q|", 0, oc.invariant_violations.len());
    r.exact("nonmaximal orbits violating p^2 divisibility", 0, oc.divisibility_violations.len());
    r.info("distinct maximal orbits with isomorphic fields", "0".into(), oc.duplicate_fields.to_string());
    Ok(())
}

fn diagonal(r: &mut Recorder) -> Res {
    let lo = residual_sum(2_000).map_err(err)?;
    let hi = residual_sum(20_000).map_err(err)?;
    let (a, b) = ((lo.positive + lo.negative).abs(), (hi.positive + hi.negative).abs());
    let st = if b <= 2.0 * a + 1.0 { Status::Pass } else { Status::Fail };
    r.push("residual sum at 2e4 vs 2*(value at 2e3)+1".into(), st, format!("<= {}", fmt_f(2.0 * a + 1.0)), fmt_f(b), "bound");
    let x = 1_000_000u64;
    let ex = (x as f64 * std::f64::consts::E).floor() as u64;
    let (s0, s1) = (diag_sum(x), diag_sum(ex));
    let t = window_target();
    r.close("window increment D>0 at 1e6", t, s1.positive - s0.positive, 0.05 * t, "rel 5%");
    r.close("window increment D<0 at 1e6", t, s1.negative - s0.negative, 0.05 * t, "rel 5%");
    let w = weighted_diagonal_sum(x);
    let c = discriminant_constant();
    r.close("weighted diagonal sum at 1e6", c, w, 0.02 * c, "rel 2%");
    Ok(())
}

fn mainterm(r: &mut Recorder) -> Res {
    let m = smalld_mainterm_check(100_000, 0.6).map_err(err)?;
    r.close("N(1e5, 1e5^0.6) / prediction", 1.0, m.ratio, 0.1, "abs 0.1");
    r.info("N(1e5, 1e5^0.6) and prediction", fmt_f(m.predicted), m.count.to_string());
    let t = census(100_000, None, &LocalSpecification::full()).map_err(err)?;
    let got = signature_ratios(&t);
    for (i, (g, w)) in got.iter().zip(SIGNATURE_TARGET).enumerate() {
        r.close(format!("share of r2={i} at X=1e5"), w, *g, 0.2 * w, "rel 20%");
    }
    let r1 = t.records.iter().filter(|x| x.r2 == 1).count();
    let r2neg = t.records.iter().filter(|x| x.r2 == 2 && x.d < 0).count();
    r.info("r2=1 vs r2=2 with d<0 at X=1e5", r1.to_string(), r2neg.to_string());
    let small = census(500, None, &LocalSpecification::full()).map_err(err)?;
    let ph = phi_pairing(&small).map_err(err)?;
    r.truth(
        "companion matching at X=500",
        "perfect",
        format!(
            "{} records, {} pairs, {} unmatched, {} ambiguous",
            small.records.len(),
            ph.pairs.len(),
            ph.unmatched.len(),
            ph.ambiguous.len()
        ),
        ph.is_perfect() && 2 * ph.pairs.len() == small.records.len(),
    );
    Ok(())
}

fn montecarlo(r: &mut Recorder) -> Res {
    let p = 3u64;
    let s = central_inertia_sample(p, 10_000, 20_240_601).map_err(err)?;
    let n = s.accepted as f64;
    let want = (1.0 - 1.0 / p as f64).powi(2);
    let sigma = (want * (1.0 - want) / n).sqrt();
    r.close("maximal fraction in (1^21^2)/11 at p=3", want, s.maximal as f64 / n, 3.0 * sigma, "3 sigma");
    let m = s.maximal as f64;
    let sigma = (0.25 / m).sqrt();
    r.close("split share in the companion quadratic field", 0.5, s.phi_split as f64 / m, 3.0 * sigma, "3 sigma");
    r.exact("companion splitting disagreements", 0, s.phi_mismatch);
    Ok(())
}
