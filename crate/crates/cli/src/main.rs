use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use d4core::census::{census, classgroup_identity_check_with, ClassVariant, LocalSpecification};
use d4core::massform::{diagonal_reports, euler_product, mu_mp, named_constants_at, EulerKind};
use d4core::quadfield::{class_group, diagonal_euler, l_ratio};
use d4core::quartic::SplittingPair;
use d4core::verify::{self, Status, VerifyReport, SUITES};
use d4core::vpairs::{central_inertia_sample, fp_density_counts, orbit_census, PairSplitting};
use d4cli::{cache, table};
use serde_json::json;

#[derive(Parser)]
#[command(name = "d4", version, about = "Enumerate quartic D4 fields by conductor and check the related densities")]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, env = "D4_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// All D4 fields with |C| ≤ X as CSV
    Census {
        #[arg(long)]
        max_conductor: u64,
        #[arg(long)]
        max_d: Option<u64>,
        /// JSON local specification
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 4-torsion of class groups against the matching field count
    Classgroups {
        #[arg(long)]
        max_disc: u64,
        #[arg(long, value_parser = parse_variant)]
        variant: ClassVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fields from maximal orbits of pairs of ternary forms
    Orbits {
        #[arg(long)]
        max_q: u64,
        #[arg(long)]
        max_d: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Splitting-type densities at p
    Densities {
        #[arg(long)]
        p: u64,
        /// Monte Carlo draws of type (1^21^2)/11
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Named constants and Euler products
    Constants {
        #[arg(long, default_value_t = 1e-12)]
        rel_err: f64,
    },
    /// L(1)/L(2) against its diagonal model per discriminant
    Lvalues {
        #[arg(long)]
        max_disc: u64,
        /// Print the window sums at the bound instead of the table
        #[arg(long)]
        window: bool,
    },
    /// Run check suites; exit 1 if any check fails
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> Result<ClassVariant, String> {
    ClassVariant::parse(s).ok_or_else(|| format!("expected a, b or c, got {s:?}"))
}

fn g(x: f64) -> String {
    format!("{x:.11e}")
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Failures in verify are reported through the exit code, not as errors.
enum Outcome {
    Ok,
    ChecksFailed,
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.cmd {
        Cmd::Census { max_conductor, max_d, spec, out } => {
            let spec = match spec {
                Some(p) => table::parse_spec(&std::fs::read_to_string(&p).with_context(|| format!("{}", p.display()))?)?,
                None => LocalSpecification::full(),
            };
            let t = census(max_conductor, max_d, &spec)?;
            let mut w = sink(out.as_deref())?;
            table::write_records(&mut w, &t.records)?;
            w.flush()?;
            eprintln!("{} fields, r2 counts {:?}", t.records.len(), t.signature_counts());
        }
        Cmd::Classgroups { max_disc, variant, out } => {
            let dir = std::env::var_os("D4_CACHE_DIR").map(PathBuf::from);
            let mut cache = cache::ClassGroupCache::open(dir.as_deref())?;
            let narrow = variant == ClassVariant::C;
            let rep = classgroup_identity_check_with(max_disc, variant, |d| {
                let f = cache.get_or_compute(d).map_err(|e| d4core::census::CensusError::Bound(e.to_string()))?;
                Ok(if narrow { f.narrow.clone() } else { f.ordinary.clone() })
            })?;
            cache.save()?;
            let v = json!({
                "max_disc": rep.x,
                "variant": variant.name(),
                "class_group_side": rep.lhs,
                "field_count": rep.rhs,
                "equal": rep.holds(),
                "contributors": rep.contributors,
            });
            let mut w = sink(out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
            w.flush()?;
        }
        Cmd::Orbits { max_q, max_d, out } => {
            let oc = orbit_census(max_q, max_d)?;
            let mut w = sink(out.as_deref())?;
            table::write_records(&mut w, &oc.records)?;
            w.flush()?;
            eprintln!(
                "{} orbits, {} generic, {} maximal, {} fields, {} invariant violations, {} divisibility violations",
                oc.orbits,
                oc.generic,
                oc.maximal,
                oc.records.len(),
                oc.invariant_violations.len(),
                oc.divisibility_violations.len()
            );
        }
        Cmd::Densities { p, samples } => densities(p, samples)?,
        Cmd::Constants { rel_err } => {
            if !(rel_err > 0.0 && rel_err < 1.0) {
                bail!("--rel-err must lie in (0, 1)");
            }
            let mut w = sink(None)?;
            writeln!(w, "name,value,exact,note")?;
            for c in named_constants_at(rel_err) {
                writeln!(w, "{},{},{},{}", c.name, g(c.value), c.exact.unwrap_or_default(), c.note)?;
            }
            for k in EulerKind::ALL {
                let e = euler_product(k, rel_err);
                writeln!(w, "euler_{k:?},{},,tail bound {} cutoff {}", g(e.value), g(e.tail_bound), e.cutoff)?;
            }
            w.flush()?;
        }
        Cmd::Lvalues { max_disc, window } => {
            let mut w = sink(None)?;
            if window {
                let r = diagonal_reports(max_disc)?;
                writeln!(w, "quantity,positive,negative,target")?;
                writeln!(w, "diag_sum,{},{},", g(r.diag_sum.positive), g(r.diag_sum.negative))?;
                writeln!(w, "window,{},{},{}", g(r.window.positive), g(r.window.negative), g(r.window_target))?;
                if let Some(res) = r.residual {
                    writeln!(w, "residual,{},{},", g(res.positive), g(res.negative))?;
                }
                writeln!(w, "weighted,{},,{}", g(r.weighted_sum), g(r.weighted_target))?;
            } else {
                if max_disc > 1_000_000 {
                    bail!("--max-disc above 10^6 needs --window");
                }
                writeln!(w, "D,h,l_ratio,diagonal_euler")?;
                for d in d4core::arith::fundamental_discriminants(max_disc) {
                    let cg = class_group(d)?;
                    writeln!(w, "{d},{},{},{}", cg.h, g(l_ratio(d)?), g(diagonal_euler(d)))?;
                }
            }
            w.flush()?;
        }
        Cmd::Verify { suite, out } => return verify_cmd(&suite, out.as_deref()),
    }
    Ok(Outcome::Ok)
}

fn densities(p: u64, samples: Option<u64>) -> Result<()> {
    let mut w = sink(None)?;
    if [3, 5, 7].contains(&p) {
        let counts = fp_density_counts(p)?;
        let p8 = num_rational::BigRational::from_integer(num_bigint::BigInt::from(p).pow(8));
        writeln!(w, "pair,count,maximal_density_times_p8")?;
        for pair in SplittingPair::LEGAL {
            let c = counts.get(&PairSplitting::Type(pair)).copied().unwrap_or(0);
            writeln!(w, "{pair},{c},{}", mu_mp(p, &pair)? * &p8)?;
        }
        writeln!(w, "degenerate,{},", counts.get(&PairSplitting::Degenerate).copied().unwrap_or(0))?;
    } else if samples.is_none() {
        bail!("exhaustive counts need p in {{3, 5, 7}}; pass --samples for other primes");
    }
    if let Some(n) = samples {
        let s = central_inertia_sample(p, n, 1)?;
        let m = s.maximal as f64;
        writeln!(w, "draws,{}", s.draws)?;
        writeln!(w, "accepted,{}", s.accepted)?;
        writeln!(w, "maximal,{} ({} expected {})", s.maximal, g(m / s.accepted as f64), g((1.0 - 1.0 / p as f64).powi(2)))?;
        writeln!(w, "companion_split,{} ({})", s.phi_split, g(s.phi_split as f64 / m))?;
        writeln!(w, "companion_inert,{}", s.phi_inert)?;
    }
    w.flush()?;
    Ok(())
}

fn verify_cmd(suite: &str, out: Option<&Path>) -> Result<Outcome> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(n)) {
        bail!("unknown suite {bad:?}; expected all or one of {}", SUITES.join(", "));
    }
    let mut all: Vec<(String, VerifyReport)> = Vec::new();
    let mut stdout = io::stdout().lock();
    for name in names {
        let reports = verify::run_suite(name).map_err(|e| anyhow!(e))?;
        for r in reports {
            writeln!(
                stdout,
                "{} [{name}] {}: expected {}, actual {} ({}, {} ms)",
                r.status, r.check_name, r.expected, r.actual, r.tolerance, r.runtime_ms
            )?;
            all.push((name.to_string(), r));
        }
    }
    let failed = all.iter().filter(|(_, r)| r.status == Status::Fail).count();
    writeln!(stdout, "{} checks, {failed} failed", all.len())?;
    if let Some(p) = out {
        let v: Vec<_> = all.iter().map(|(s, r)| json!({"suite": s, "report": r})).collect();
        std::fs::write(p, serde_json::to_string_pretty(&v)? + "\n")?;
    }
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
