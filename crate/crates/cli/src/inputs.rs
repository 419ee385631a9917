//! Turning flag strings and JSON arguments into engine inputs.

use std::fs;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use twistcalc_core::automorphism::{Automorphism, HeisenbergAuto, LambdaMap, NormalFormAuto};
use twistcalc_core::json;
use twistcalc_core::lattice::IntMatrix;
use twistcalc_core::rings::{RingAut, RingDescriptor, RingElem};
use twistcalc_core::unitriangular::UniTriMatrix;

use crate::{AutoArgs, Failure};

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// JSON arguments are inline when they start with `{`, otherwise they
/// name a file.
pub fn load_json(arg: &str) -> Result<serde_json::Value, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("bad JSON in {arg}: {e}")))
}

pub fn parse_elems(desc: RingDescriptor, s: &str) -> Result<Vec<RingElem>, Failure> {
    s.split(',')
        .map(|t| RingElem::parse(desc, t).map_err(Failure::from))
        .collect()
}

fn parse_lambda(desc: RingDescriptor, s: &str) -> Result<LambdaMap, Failure> {
    if desc.is_field() {
        let r = BigRational::from_str(s.trim())
            .map_err(|e| usage(format!("bad scalar central map {s:?}: {e}")))?;
        return Ok(LambdaMap::Scalar(r));
    }
    let rows: Vec<Vec<BigInt>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|t| {
                    BigInt::from_str(t.trim())
                        .map_err(|e| usage(format!("bad central map entry {t:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(LambdaMap::Lattice(IntMatrix::from_bigint_rows(rows)?))
}

/// Builds the automorphism described by a flag set.
pub fn build_automorphism(args: &AutoArgs) -> Result<Automorphism, Failure> {
    if let Some(src) = &args.auto_json {
        return Ok(json::automorphism_from_json(&load_json(src)?)?);
    }
    let ring = args
        .ring
        .as_deref()
        .ok_or_else(|| usage("--ring is required (or pass --auto-json)"))?;
    let desc = RingDescriptor::parse(ring)?;
    if let Some(h) = &args.heis {
        if args.n.unwrap_or(3) != 3 {
            return Err(usage("matrix automorphisms act on UT_3 only"));
        }
        let (top, bottom) = h
            .split_once(';')
            .ok_or_else(|| usage("--heis wants two rows: p,q;r,s"))?;
        let mut entries = parse_elems(desc, top)?;
        entries.extend(parse_elems(desc, bottom)?);
        let mat: [RingElem; 4] = entries
            .try_into()
            .map_err(|_| usage("--heis wants exactly four entries"))?;
        return Ok(Automorphism::Heisenberg(HeisenbergAuto::new(desc, mat)?));
    }
    let diag = args
        .diag
        .as_deref()
        .ok_or_else(|| usage("--diag is required (or use --heis / --auto-json)"))?;
    let d = parse_elems(desc, diag)?;
    if let Some(n) = args.n {
        if n != d.len() {
            return Err(usage(format!(
                "--n {n} disagrees with the {} diagonal entries",
                d.len()
            )));
        }
    }
    let delta = RingAut::parse(&args.delta)?;
    let lambda = args
        .lambda
        .as_deref()
        .map(|s| parse_lambda(desc, s))
        .transpose()?;
    let inner: Option<UniTriMatrix> = args
        .inner
        .as_deref()
        .map(|s| Ok::<_, Failure>(json::matrix_from_json(desc, &load_json(s)?)?))
        .transpose()?;
    let n = d.len();
    Ok(Automorphism::NormalForm(NormalFormAuto::new(
        desc, n, d, delta, args.m, lambda, inner,
    )?))
}

pub fn parse_indices(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| usage(format!("bad element index {t:?}: {e}")))
        })
        .collect()
}
