//! CSV tables of field records and JSON local specifications.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use anyhow::{anyhow, bail, Context, Result};
use d4core::census::{alpha_from_pq, DefaultRule, LocalSpecification};
use d4core::quartic::{D4FieldRecord, SplittingPair};
use num_bigint::BigInt;
use serde::Deserialize;

pub const HEADER: [&str; 10] = ["P", "Q", "disc_L", "d", "q", "cond_signed", "cond_abs", "r2", "J_odd", "ram_splitting"];

pub fn write_records<W: Write>(out: W, records: &[D4FieldRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.p.to_string(),
            r.q_poly.to_string(),
            r.disc_l.to_string(),
            r.d.to_string(),
            r.q.to_string(),
            r.cond_signed.to_string(),
            r.cond_abs.to_string(),
            r.r2.to_string(),
            r.j_odd.to_string(),
            r.splitting_code(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_splitting(s: &str) -> Result<BTreeMap<u64, SplittingPair>> {
    let mut m = BTreeMap::new();
    for item in s.split(';').filter(|x| !x.is_empty()) {
        let (p, code) = item.split_once(':').ok_or_else(|| anyhow!("bad splitting entry {item:?}"))?;
        let pair = SplittingPair::parse(code).ok_or_else(|| anyhow!("bad splitting pair {code:?}"))?;
        m.insert(p.parse()?, pair);
    }
    Ok(m)
}

/// Reads a table written by [`write_records`]; derived columns are
/// recomputed and must agree with the file.
pub fn read_records<R: Read>(input: R) -> Result<Vec<D4FieldRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(HEADER) {
        bail!("unexpected header; want {}", HEADER.join(","));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let f = |k: usize| row.get(k).ok_or_else(|| anyhow!("row {}: missing column {}", i + 1, HEADER[k]));
        let p: BigInt = f(0)?.parse()?;
        let q: BigInt = f(1)?.parse()?;
        let disc_l: i128 = f(2)?.parse()?;
        let d: i64 = f(3)?.parse()?;
        let r2: u8 = f(7)?.parse()?;
        let splitting = parse_splitting(f(9)?)?;
        let alpha = alpha_from_pq(&p, &q, d).ok_or_else(|| anyhow!("row {}: (P, Q) not over Q(√{d})", i + 1))?;
        let rec = D4FieldRecord::assemble(p, q, disc_l, d, r2, splitting, alpha);
        let derived = [rec.q.to_string(), rec.cond_signed.to_string(), rec.cond_abs.to_string()];
        if derived.iter().zip(4..7).any(|(v, k)| row.get(k) != Some(v.as_str())) || row.get(8) != Some(&rec.j_odd.to_string()) {
            bail!("row {}: derived columns disagree", i + 1);
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default)]
    infinity: Option<Vec<String>>,
    #[serde(default)]
    primes: BTreeMap<String, Vec<String>>,
    #[serde(default = "default_rule")]
    default: String,
}

fn default_rule() -> String {
    "full".into()
}

fn pair(code: &str) -> Result<SplittingPair> {
    SplittingPair::parse(code).ok_or_else(|| anyhow!("unknown splitting pair {code:?}"))
}

pub fn parse_spec(text: &str) -> Result<LocalSpecification> {
    let f: SpecFile = serde_json::from_str(text).context("spec file")?;
    let rule = match f.default.as_str() {
        "full" => DefaultRule::Full,
        "acceptable" => DefaultRule::Acceptable,
        "no-central-inertia" => DefaultRule::NoCentralInertia,
        other => bail!("unknown default rule {other:?}"),
    };
    let mut spec = LocalSpecification::with_rule(rule);
    if let Some(inf) = f.infinity {
        spec.infinity = inf.iter().map(|c| pair(c)).collect::<Result<_>>()?;
    }
    for (p, codes) in f.primes {
        let p: u64 = p.parse().with_context(|| format!("prime key {p:?}"))?;
        spec = spec.with_prime(p, codes.iter().map(|c| pair(c)).collect::<Result<Vec<_>>>()?);
    }
    spec.validate().map_err(|e| anyhow!(e))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use d4core::census::{census, ClassVariant};

    #[test]
    fn csv_round_trip() {
        let t = census(1200, None, &LocalSpecification::full()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &t.records).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, t.records);
        let mut again = Vec::new();
        write_records(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn spec_parsing() {
        let s = parse_spec(r#"{"infinity": ["112/11", "22/2"], "default": "no-central-inertia"}"#).unwrap();
        assert_eq!(s, LocalSpecification::classgroup(ClassVariant::B));
        let s = parse_spec(r#"{"primes": {"3": ["1111/11", "112/11"]}}"#).unwrap();
        assert_eq!(s.primes[&3].len(), 2);
        assert!(parse_spec(r#"{"default": "nope"}"#).is_err());
        assert!(parse_spec(r#"{"primes": {"3": ["4/11"]}}"#).is_err());
    }

    #[test]
    fn bad_rows_rejected() {
        let text = "P,Q,disc_L,d,q,cond_signed,cond_abs,r2,J_odd,ram_splitting\n0,-2,-2048,8,-32,-256,256,1,1,2:1-4/1-2\n";
        assert_eq!(read_records(text.as_bytes()).unwrap().len(), 1);
        let bad = text.replace(",-256,", ",-255,");
        assert!(read_records(bad.as_bytes()).is_err());
    }
}
