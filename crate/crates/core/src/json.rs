//! JSON serialization contract shared by the CLI and the bindings.
//!
//! Series: `{"vars": [...], "cutoff": d, "weights": [...], "terms":
//! [{"exp": {"var": n, ...}, "coef": "p/q"}, ...]}` with coefficients as
//! decimal strings and terms sorted graded-lexicographically.


use num::Zero;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::kr::VerificationReport;
use crate::qsolve::{QsolveError, QSystemSpec, SolutionFamily, SysIndex, SystemKind};
use crate::rat::{format_rat, parse_rat, Rat};
use crate::series::{Expo, TruncatedSeries, VarSet};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON value: {0}")]
    Malformed(String),
    #[error(transparent)]
    Qsolve(#[from] QsolveError),
    #[error(transparent)]
    Series(#[from] crate::series::SeriesError),
}

fn bad(msg: impl Into<String>) -> JsonError {
    JsonError::Malformed(msg.into())
}

pub fn series_to_json(s: &TruncatedSeries) -> Value {
    let vars = s.vars();
    let terms: Vec<Value> = s
        .terms_weighted_order()
        .into_iter()
        .map(|(e, c)| {
            let mut exp = Map::new();
            for (v, &x) in e.0.iter().enumerate() {
                if x != 0 {
                    exp.insert(vars.names[v].clone(), json!(x));
                }
            }
            json!({ "exp": Value::Object(exp), "coef": format_rat(c) })
        })
        .collect();
    json!({
        "vars": vars.names,
        "cutoff": s.cutoff(),
        "weights": vars.weights,
        "terms": terms,
    })
}

pub fn series_from_json(v: &Value) -> Result<TruncatedSeries, JsonError> {
    let obj = v.as_object().ok_or_else(|| bad("series must be an object"))?;
    let names: Vec<String> = obj
        .get("vars")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing vars"))?
        .iter()
        .map(|x| x.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| bad("vars must be strings"))?;
    let cutoff = obj
        .get("cutoff")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing cutoff"))? as u32;
    let weights: Vec<u32> = match obj.get("weights") {
        Some(w) => w
            .as_array()
            .ok_or_else(|| bad("weights must be an array"))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as u32))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("weights must be integers"))?,
        None => vec![1; names.len()],
    };
    if weights.len() != names.len() || weights.contains(&0) {
        return Err(bad("weights must be positive, one per variable"));
    }
    let vars = VarSet::weighted(names, weights);
    let mut terms: Vec<(Expo, Rat)> = Vec::new();
    for t in obj
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing terms"))?
    {
        let t = t.as_object().ok_or_else(|| bad("term must be an object"))?;
        let mut e = Expo::zero(vars.len());
        for (name, x) in t
            .get("exp")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("term missing exp"))?
        {
            let pos = vars
                .position(name)
                .ok_or_else(|| bad(format!("unknown variable {name}")))?;
            let x = x.as_u64().ok_or_else(|| bad("exponent must be a nonnegative integer"))?;
            e.0[pos] = x as u32;
        }
        let coef = t
            .get("coef")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("term missing coef"))?;
        let c = parse_rat(coef).ok_or_else(|| bad(format!("bad rational `{coef}`")))?;
        if c.is_zero() {
            return Err(bad("zero coefficients must not be stored"));
        }
        terms.push((e, c));
    }
    Ok(TruncatedSeries::from_terms(vars, cutoff, terms)?)
}

fn index_to_json(idx: &SysIndex) -> Value {
    match idx {
        SysIndex::Plain(i) => json!(i),
        SysIndex::Pair { node, level } => json!([node, level]),
    }
}

fn index_from_json(v: &Value) -> Result<SysIndex, JsonError> {
    if let Some(i) = v.as_u64() {
        if i == 0 {
            return Err(bad("indices are 1-based"));
        }
        return Ok(SysIndex::Plain(i as usize));
    }
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            let node = pair[0].as_u64().ok_or_else(|| bad("bad index pair"))? as usize;
            let level = pair[1].as_u64().ok_or_else(|| bad("bad index pair"))? as usize;
            if node == 0 || level == 0 {
                return Err(bad("indices are 1-based"));
            }
            return Ok(SysIndex::Pair { node, level });
        }
    }
    Err(bad("index must be an integer or an [a, m] pair"))
}

fn matrix_to_json(m: &[Vec<Rat>]) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|x| json!(format_rat(x))).collect()))
            .collect(),
    )
}

fn matrix_from_json(v: &Value, n: usize) -> Result<Vec<Vec<Rat>>, JsonError> {
    let rows = v.as_array().ok_or_else(|| bad("matrix must be an array"))?;
    if rows.len() != n {
        return Err(bad("matrix size must match the index set"));
    }
    rows.iter()
        .map(|row| {
            let row = row.as_array().ok_or_else(|| bad("matrix row must be an array"))?;
            if row.len() != n {
                return Err(bad("matrix must be square"));
            }
            row.iter()
                .map(|x| {
                    let s = match x {
                        Value::String(s) => s.clone(),
                        Value::Number(k) => k.to_string(),
                        _ => return Err(bad("matrix entries are \"p/q\" strings or integers")),
                    };
                    parse_rat(&s).ok_or_else(|| bad(format!("bad rational `{s}`")))
                })
                .collect()
        })
        .collect()
}

pub fn spec_to_json(spec: &QSystemSpec) -> Value {
    json!({
        "kind": spec.kind.as_str(),
        "indices": spec.indices.iter().map(index_to_json).collect::<Vec<_>>(),
        "D": matrix_to_json(&spec.d),
        "G": matrix_to_json(&spec.g),
    })
}

pub fn spec_from_json(v: &Value) -> Result<QSystemSpec, JsonError> {
    let obj = v.as_object().ok_or_else(|| bad("spec must be an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .and_then(SystemKind::parse)
        .ok_or_else(|| bad("kind must be one of standard/finite-general/infinite-truncated/specialized"))?;
    let indices: Vec<SysIndex> = obj
        .get("indices")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing indices"))?
        .iter()
        .map(index_from_json)
        .collect::<Result<_, _>>()?;
    if indices.is_empty() {
        return Err(bad("index set must be nonempty"));
    }
    let n = indices.len();
    let g = matrix_from_json(obj.get("G").ok_or_else(|| bad("missing G"))?, n)?;
    let d = match obj.get("D") {
        Some(d) => matrix_from_json(d, n)?,
        None => crate::linalg::identity(n),
    };
    let spec = match kind {
        SystemKind::Standard => {
            if !crate::linalg::is_identity(&d) {
                return Err(bad("standard kind requires D = I"));
            }
            QSystemSpec::standard(indices, g)?
        }
        SystemKind::FiniteGeneral => QSystemSpec::finite(indices, d, g)?,
        SystemKind::InfiniteTruncated => QSystemSpec::infinite_truncated(indices, d, g)?,
        SystemKind::Specialized => QSystemSpec::specialized_from_parts(indices, d, g)?,
    };
    Ok(spec)
}

/// Parses the ν command-line format: comma-separated `(a,m):value` or
/// `i:value` pairs with rational values; a bare value is accepted for
/// single-index systems.  Commas inside `(a,m)` keys do not split.
pub fn parse_nu(s: &str, spec: &QSystemSpec) -> Result<Vec<(SysIndex, Rat)>, JsonError> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                items.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&s[start..]);

    let mut out = Vec::new();
    for item in items {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (idx, value) = match item.rsplit_once(':') {
            Some((key, value)) => {
                let idx =
                    SysIndex::parse(key).ok_or_else(|| bad(format!("bad ν index `{key}`")))?;
                (idx, value)
            }
            None => {
                if spec.indices.len() != 1 {
                    return Err(bad(
                        "bare ν values need a single-index system; use `(a,m):value` pairs",
                    ));
                }
                (spec.indices[0], item)
            }
        };
        let v = parse_rat(value).ok_or_else(|| bad(format!("bad ν value `{value}`")))?;
        if spec.position(&idx).is_none() {
            return Err(bad(format!("ν index {} outside the system", idx.label())));
        }
        out.push((idx, v));
    }
    Ok(out)
}

/// A solution family as a map from index labels to series.
pub fn family_to_json(fam: &SolutionFamily) -> Value {
    let mut map = Map::new();
    for (idx, member) in fam.spec.indices.iter().zip(&fam.members) {
        map.insert(idx.label(), series_to_json(member));
    }
    Value::Object(map)
}

pub fn report_to_json(report: &VerificationReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let mut obj = Map::new();
            obj.insert("name".into(), json!(c.name));
            obj.insert(
                "status".into(),
                json!(if c.pass { "pass" } else { "fail" }),
            );
            if c.informational {
                obj.insert("informational".into(), json!(true));
            }
            if let Some(w) = &c.witness {
                let mut witness = Map::new();
                let mut exp = Map::new();
                for (name, x) in &w.exponent {
                    exp.insert(name.clone(), json!(x));
                }
                witness.insert("exponent".into(), Value::Object(exp));
                witness.insert("lhs".into(), json!(w.lhs));
                witness.insert("rhs".into(), json!(w.rhs));
                if let Some(note) = &w.note {
                    witness.insert("note".into(), json!(note));
                }
                obj.insert("witness".into(), Value::Object(witness));
            }
            Value::Object(obj)
        })
        .collect();
    json!({
        "algebra": report.algebra,
        "cutoff": report.cutoff,
        "checks": checks,
    })
}

/// Coefficient-table rows `{"N": {...}, "K": "p/q", "R": "p/q"}`.
pub fn coeff_table_to_json(
    spec: &QSystemSpec,
    rows: &[(Vec<u32>, Rat, Rat)],
) -> Value {
    Value::Array(
        rows.iter()
            .map(|(n, k, r)| {
                let mut nmap = Map::new();
                for (pos, &x) in n.iter().enumerate() {
                    if x != 0 {
                        nmap.insert(spec.indices[pos].label(), json!(x));
                    }
                }
                json!({ "N": Value::Object(nmap), "K": format_rat(k), "R": format_rat(r) })
            })
            .collect(),
    )
}

/// Multiplicity rows `{"weight": [...], "multiplicity": "p/q"}`.
pub fn multiplicities_to_json(rows: &[(Vec<i64>, Rat)]) -> Value {
    Value::Array(
        rows.iter()
            .map(|(w, m)| json!({ "weight": w, "multiplicity": format_rat(m) }))
            .collect(),
    )
}
