//! JSON encodings for matrices, automorphisms, and finite group tables.
//!
//! Convention: mathematical values (ring elements, integers of any size,
//! rationals) are decimal strings, so nothing is ever clipped to a
//! machine-number range; structural data (dimensions, indices, flags) are
//! plain JSON numbers. Entry lists are emitted in a fixed order, keeping
//! the output byte-stable for identical inputs.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::automorphism::{Automorphism, HeisenbergAuto, LambdaMap, NormalFormAuto};
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::oracle::FiniteGroupTable;
use crate::rings::{RingAut, RingDescriptor, RingElem};
use crate::unitriangular::UniTriMatrix;

fn parse_err(what: &str, v: &Value) -> Error {
    Error::Parse(format!("expected {what}, found {v}"))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(what, v))
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(what, v))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| parse_err(what, v))
}

fn check_ring(map: &Map<String, Value>, desc: RingDescriptor) -> Result<()> {
    if let Some(r) = map.get("ring") {
        let named = RingDescriptor::parse(as_str(r, "ring string")?)?;
        if named != desc {
            return Err(Error::DescriptorMismatch(
                desc.to_string(),
                named.to_string(),
            ));
        }
    }
    Ok(())
}

/// `{"ring": ..., "n": ..., "entries": [[i, j, "value"], ...]}` with the
/// entries sorted by position and zeros omitted.
pub fn matrix_to_json(m: &UniTriMatrix) -> Value {
    let entries: Vec<Value> = m
        .nonzero_entries()
        .map(|(i, j, x)| json!([i, j, x.to_string()]))
        .collect();
    json!({
        "ring": m.desc().to_string(),
        "n": m.n(),
        "entries": entries,
    })
}

/// Reads a matrix for a known ring; a `"ring"` field, when present, must
/// agree with it.
pub fn matrix_from_json(desc: RingDescriptor, v: &Value) -> Result<UniTriMatrix> {
    let map = as_object(v, "a matrix object")?;
    check_ring(map, desc)?;
    let n = as_usize(field(map, "n")?, "dimension")?;
    let mut m = UniTriMatrix::identity(desc, n)?;
    let entries_v = field(map, "entries")?;
    let entries = entries_v
        .as_array()
        .ok_or_else(|| parse_err("an entry array", entries_v))?;
    for e in entries {
        let triple = e.as_array().filter(|t| t.len() == 3);
        let triple = triple.ok_or_else(|| parse_err("an [i, j, value] triple", e))?;
        let i = as_usize(&triple[0], "row index")?;
        let j = as_usize(&triple[1], "column index")?;
        let x = RingElem::parse(desc, as_str(&triple[2], "entry value")?)?;
        if !(1 <= i && i < j && j <= n) {
            return Err(Error::IndexOutOfRange { n, i, j });
        }
        if !m.get(i, j).is_zero() {
            return Err(Error::Parse(format!("duplicate entry at ({i}, {j})")));
        }
        m.set_entry(i, j, x)?;
    }
    Ok(m)
}

fn lambda_to_json(lam: &LambdaMap) -> Value {
    match lam {
        LambdaMap::Scalar(r) => Value::String(r.to_string()),
        LambdaMap::Lattice(m) => {
            let rows: Vec<Value> = (0..m.rows())
                .map(|i| {
                    Value::Array(
                        (0..m.cols())
                            .map(|j| Value::String(m.get(i, j).to_string()))
                            .collect(),
                    )
                })
                .collect();
            Value::Array(rows)
        }
    }
}

fn lambda_from_json(v: &Value) -> Result<LambdaMap> {
    match v {
        Value::String(s) => {
            let r = BigRational::from_str(s)
                .map_err(|e| Error::Parse(format!("bad rational \"{s}\": {e}")))?;
            Ok(LambdaMap::Scalar(r))
        }
        Value::Array(rows) => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let row = row
                    .as_array()
                    .ok_or_else(|| parse_err("a matrix row", row))?;
                let mut cells = Vec::with_capacity(row.len());
                for cell in row {
                    let s = as_str(cell, "an integer string")?;
                    let x = BigInt::from_str(s)
                        .map_err(|e| Error::Parse(format!("bad integer \"{s}\": {e}")))?;
                    cells.push(x);
                }
                out.push(cells);
            }
            Ok(LambdaMap::Lattice(IntMatrix::from_bigint_rows(out)?))
        }
        _ => Err(parse_err("a scalar string or matrix of strings", v)),
    }
}

/// Normal forms carry `diag`/`delta`/`m` (plus optional `lambda` and
/// `inner`); 2x2-matrix automorphisms carry `matrix` instead.
pub fn automorphism_to_json(auto: &Automorphism) -> Value {
    match auto {
        Automorphism::NormalForm(nf) => {
            let diag: Vec<Value> = nf
                .d()
                .iter()
                .map(|x| Value::String(x.to_string()))
                .collect();
            let mut map = Map::new();
            map.insert("ring".into(), json!(nf.desc().to_string()));
            map.insert("n".into(), json!(nf.n()));
            map.insert("diag".into(), Value::Array(diag));
            map.insert("delta".into(), json!(nf.delta().to_string()));
            map.insert("m".into(), json!(nf.m()));
            if let Some(lam) = nf.lambda() {
                map.insert("lambda".into(), lambda_to_json(lam));
            }
            if let Some(inner) = nf.inner() {
                map.insert("inner".into(), matrix_to_json(inner));
            }
            Value::Object(map)
        }
        Automorphism::Heisenberg(h) => {
            let m = h.mat();
            json!({
                "ring": h.desc().to_string(),
                "n": 3,
                "matrix": [
                    [m[0].to_string(), m[1].to_string()],
                    [m[2].to_string(), m[3].to_string()],
                ],
            })
        }
    }
}

pub fn automorphism_from_json(v: &Value) -> Result<Automorphism> {
    let map = as_object(v, "an automorphism object")?;
    let desc = RingDescriptor::parse(as_str(field(map, "ring")?, "ring string")?)?;
    if let Some(mat) = map.get("matrix") {
        let rows = mat
            .as_array()
            .filter(|r| r.len() == 2)
            .ok_or_else(|| parse_err("a 2x2 matrix", mat))?;
        let mut entries = Vec::with_capacity(4);
        for row in rows {
            let row = row
                .as_array()
                .filter(|r| r.len() == 2)
                .ok_or_else(|| parse_err("a matrix row of length 2", row))?;
            for cell in row {
                entries.push(RingElem::parse(desc, as_str(cell, "a matrix entry")?)?);
            }
        }
        let mat: [RingElem; 4] = entries.try_into().expect("collected exactly four entries");
        return Ok(Automorphism::Heisenberg(HeisenbergAuto::new(desc, mat)?));
    }
    let n = as_usize(field(map, "n")?, "dimension")?;
    let diag_v = field(map, "diag")?;
    let diag = diag_v
        .as_array()
        .ok_or_else(|| parse_err("a diagonal array", diag_v))?;
    let d: Vec<RingElem> = diag
        .iter()
        .map(|x| RingElem::parse(desc, as_str(x, "a diagonal entry")?))
        .collect::<Result<_>>()?;
    let delta = match map.get("delta") {
        Some(v) => RingAut::parse(as_str(v, "delta")?)?,
        None => RingAut::Id,
    };
    let m = match map.get("m") {
        Some(v) => as_usize(v, "flip exponent")? as u8,
        None => 0,
    };
    let lambda = map.get("lambda").map(lambda_from_json).transpose()?;
    let inner = map
        .get("inner")
        .map(|v| matrix_from_json(desc, v))
        .transpose()?;
    Ok(Automorphism::NormalForm(NormalFormAuto::new(
        desc, n, d, delta, m, lambda, inner,
    )?))
}

/// `{"size": s, "mul": [[...]], "generators": [...]}` — indices are plain
/// numbers since they label elements rather than measure anything.
pub fn group_table_to_json(t: &FiniteGroupTable) -> Value {
    let rows: Vec<Value> = (0..t.size())
        .map(|a| Value::Array((0..t.size()).map(|b| json!(t.mul(a, b))).collect()))
        .collect();
    json!({
        "size": t.size(),
        "mul": rows,
        "generators": t.generators(),
    })
}

pub fn group_table_from_json(v: &Value) -> Result<FiniteGroupTable> {
    let map = as_object(v, "a group table object")?;
    let size = as_usize(field(map, "size")?, "group size")?;
    let mul_v = field(map, "mul")?;
    let mul = mul_v
        .as_array()
        .ok_or_else(|| parse_err("a multiplication table", mul_v))?;
    if mul.len() != size {
        return Err(Error::Parse(format!(
            "size {size} does not match {} table rows",
            mul.len()
        )));
    }
    let mut rows = Vec::with_capacity(size);
    for row in mul {
        let row = row
            .as_array()
            .ok_or_else(|| parse_err("a table row", row))?;
        rows.push(
            row.iter()
                .map(|x| as_usize(x, "a table entry").map(|u| u as u32))
                .collect::<Result<Vec<u32>>>()?,
        );
    }
    let generators = map
        .get("generators")
        .map(|g| {
            g.as_array()
                .ok_or_else(|| parse_err("a generator list", g))?
                .iter()
                .map(|x| as_usize(x, "a generator index"))
                .collect::<Result<Vec<usize>>>()
        })
        .transpose()?;
    FiniteGroupTable::from_rows(&rows, generators)
}
