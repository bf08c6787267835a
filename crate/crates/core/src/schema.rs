//! JSON forms of connections, gauge elements, series and certificates.
//!
//! Rationals are strings `"p/q"` (or `"p"`); a connection is
//! `{"n", "kind", "precision", "terms": [{"power", "matrix"}]}` with strictly
//! increasing powers. A `null` or missing precision means exact. Matrix
//! entries that vanish in every term are structural zeros.

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::cyclic::CyclicWitness;
use crate::error::{Error, Result};
use crate::gauge::{Connection, Factor, GaugeElement};
use crate::laurent::matrix::MatrixSeries;
use crate::laurent::rational::{format_rational, int, parse_rational, Rational};
use crate::laurent::series::Series;
use crate::liealg::{make_context, Context, Kind};
use crate::linalg::Mat;
use crate::oper::{NormalizationCertificate, OperForm};
use crate::springer::SearchCertificate;

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, ptr: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(ptr, format!("missing field {key:?}")))
}

fn as_object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(ptr, "expected an object"))
}

fn as_i64(v: &Value, ptr: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::schema(ptr, "expected an integer"))
}

fn opt_i64(obj: &Map<String, Value>, ptr: &str, key: &str) -> Result<Option<i64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => as_i64(v, &format!("{ptr}/{key}")).map(Some),
    }
}

pub fn rational_to_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn rational_from_json(v: &Value, ptr: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|m| Error::schema(ptr, m)),
        Value::Number(n) => n
            .as_i64()
            .map(int)
            .ok_or_else(|| Error::schema(ptr, "numbers must be integers; write fractions as \"p/q\"")),
        _ => Err(Error::schema(ptr, "expected a rational string \"p/q\"")),
    }
}

pub fn matrix_to_json(m: &Mat) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(rational_to_json).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, n: usize, ptr: &str) -> Result<Mat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::schema(ptr, "expected an array of rows"))?;
    if rows.len() != n {
        return Err(Error::schema(ptr, format!("expected {n} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{ptr}/{i}");
        let row = row
            .as_array()
            .ok_or_else(|| Error::schema(&rp, "expected a row array"))?;
        if row.len() != n {
            return Err(Error::schema(&rp, format!("expected {n} entries, got {}", row.len())));
        }
        out.push(
            row.iter()
                .enumerate()
                .map(|(j, x)| rational_from_json(x, &format!("{rp}/{j}")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Mat::from_rows(out))
}

pub fn series_to_json(s: &Series) -> Value {
    let coeffs: Vec<Value> = match (s.valuation_bound(), s.precision()) {
        (None, _) => Vec::new(),
        (Some(v), Some(p)) => (v..=p).map(|k| rational_to_json(&s.coeff(k).expect("in window"))).collect(),
        (Some(v), None) => {
            let top = s.terms().last().map_or(v - 1, |(k, _)| k);
            (v..=top).map(|k| rational_to_json(&s.coeff(k).expect("exact"))).collect()
        }
    };
    json!({
        "valuation": s.valuation_bound(),
        "precision": s.precision(),
        "coeffs": coeffs,
    })
}

pub fn series_from_json(v: &Value, ptr: &str) -> Result<Series> {
    let obj = as_object(v, ptr)?;
    let prec = opt_i64(obj, ptr, "precision")?;
    let coeffs = field(obj, ptr, "coeffs")?
        .as_array()
        .ok_or_else(|| Error::schema(format!("{ptr}/coeffs"), "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| rational_from_json(x, &format!("{ptr}/coeffs/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let val = opt_i64(obj, ptr, "valuation")?;
    let start = match (val, prec) {
        (Some(v), _) => v,
        (None, Some(p)) => p + 1,
        (None, None) => 0,
    };
    if let Some(p) = prec {
        if start + coeffs.len() as i64 - 1 > p {
            return Err(Error::schema(format!("{ptr}/coeffs"), "coefficients run past the precision"));
        }
    }
    Ok(match prec {
        Some(p) => Series::truncated(start, coeffs, p),
        None => Series::exact(start, coeffs),
    })
}

/// Shared by connections and gauge elements.
pub fn matrix_series_to_json(n: usize, kind: Kind, m: &MatrixSeries) -> Value {
    let terms: Vec<Value> = m
        .terms()
        .into_iter()
        .map(|(k, mat)| json!({"power": k, "matrix": matrix_to_json(&mat)}))
        .collect();
    json!({
        "n": n,
        "kind": kind.to_string(),
        "precision": m.precision(),
        "terms": terms,
    })
}

/// Reads `(ctx, series)`; `check_trace` rejects traceful `sl` terms.
pub fn matrix_series_from_json(v: &Value, ptr: &str, check_trace: bool) -> Result<(Context, MatrixSeries)> {
    let obj = as_object(v, ptr)?;
    let n = as_i64(field(obj, ptr, "n")?, &format!("{ptr}/n"))?;
    if !(1..=16).contains(&n) {
        return Err(Error::schema(format!("{ptr}/n"), "n must be between 1 and 16"));
    }
    let n = n as usize;
    let kind: Kind = field(obj, ptr, "kind")?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{ptr}/kind"), "expected \"sl\" or \"gl\""))?
        .parse()
        .map_err(|m: String| Error::schema(format!("{ptr}/kind"), m))?;
    let prec = opt_i64(obj, ptr, "precision")?;
    let terms_ptr = format!("{ptr}/terms");
    let raw_terms = field(obj, ptr, "terms")?
        .as_array()
        .ok_or_else(|| Error::schema(&terms_ptr, "expected an array"))?;
    let mut terms: Vec<(i64, Mat)> = Vec::with_capacity(raw_terms.len());
    for (i, t) in raw_terms.iter().enumerate() {
        let tp = format!("{terms_ptr}/{i}");
        let tobj = as_object(t, &tp)?;
        let power = as_i64(field(tobj, &tp, "power")?, &format!("{tp}/power"))?;
        if let Some((last, _)) = terms.last() {
            if power <= *last {
                return Err(Error::schema(format!("{tp}/power"), "powers must be strictly increasing"));
            }
        }
        if prec.is_some_and(|p| power > p) {
            return Err(Error::schema(format!("{tp}/power"), "power exceeds the precision"));
        }
        let m = matrix_from_json(field(tobj, &tp, "matrix")?, n, &format!("{tp}/matrix"))?;
        if check_trace && kind == Kind::Sl && !m.trace().is_zero() {
            return Err(Error::schema(
                format!("{tp}/matrix"),
                format!("trace {} is nonzero for sl", m.trace()),
            ));
        }
        terms.push((power, m));
    }
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let nonzero: Vec<(i64, &Rational)> = terms
                .iter()
                .map(|(k, m)| (*k, &m[(i, j)]))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if nonzero.is_empty() {
                return Series::zero();
            }
            let mut s = match prec {
                Some(p) => Series::zero_to(p),
                None => Series::zero(),
            };
            for (k, c) in nonzero {
                s = s.add(&Series::monomial(c.clone(), k));
            }
            s
        })
        .collect();
    let ctx = make_context(n, kind)?;
    Ok((ctx, MatrixSeries::from_entries(n, entries)))
}

pub fn connection_to_json(a: &Connection) -> Value {
    matrix_series_to_json(a.ctx().n, a.ctx().kind, a.series())
}

pub fn connection_from_json(v: &Value) -> Result<Connection> {
    connection_from_json_at(v, "")
}

pub fn connection_from_json_at(v: &Value, ptr: &str) -> Result<Connection> {
    let (ctx, series) = matrix_series_from_json(v, ptr, true)?;
    Connection::new(ctx, series).map_err(|e| Error::schema(ptr, e.to_string()))
}

pub fn gauge_to_json(g: &GaugeElement) -> Value {
    let mut out = matrix_series_to_json(g.ctx().n, g.ctx().kind, g.matrix());
    if let Some(fs) = g.factors() {
        out["factors"] = Value::Array(fs.iter().map(factor_to_json).collect());
    }
    out
}

/// Reads a gauge element from its matrix; any `factors` field is ignored.
pub fn gauge_from_json(v: &Value, ptr: &str, ctx: &Context) -> Result<GaugeElement> {
    let (gctx, m) = matrix_series_from_json(v, ptr, false)?;
    if gctx.n != ctx.n || gctx.kind != ctx.kind {
        return Err(Error::schema(ptr, "gauge element and connection disagree on n or kind"));
    }
    GaugeElement::new(ctx.clone(), m).map_err(|e| Error::schema(ptr, e.to_string()))
}

fn factor_to_json(f: &Factor) -> Value {
    match f {
        Factor::Constant(m) => json!({"constant": matrix_to_json(m)}),
        Factor::Exp { k, x } => json!({"exp": {"k": k, "X": matrix_to_json(x)}}),
        Factor::Coweight(l) => json!({"coweight": l}),
    }
}

pub fn oper_form_to_json(of: &OperForm) -> Value {
    json!({
        "n": of.ctx.n,
        "kind": of.ctx.kind.to_string(),
        "r": of.r,
        "leading": matrix_to_json(&of.leading),
        "ge_coefficients": of.ge_coefficients.iter().map(series_to_json).collect::<Vec<_>>(),
    })
}

pub fn oper_form_from_json(v: &Value, ptr: &str, ctx: &Context) -> Result<OperForm> {
    let obj = as_object(v, ptr)?;
    let r = as_i64(field(obj, ptr, "r")?, &format!("{ptr}/r"))?;
    let leading = matrix_from_json(field(obj, ptr, "leading")?, ctx.n, &format!("{ptr}/leading"))?;
    let cp = format!("{ptr}/ge_coefficients");
    let coeffs = field(obj, ptr, "ge_coefficients")?
        .as_array()
        .ok_or_else(|| Error::schema(&cp, "expected an array"))?;
    if coeffs.len() != ctx.rank() {
        return Err(Error::schema(&cp, format!("expected {} series", ctx.rank())));
    }
    let ge_coefficients = coeffs
        .iter()
        .enumerate()
        .map(|(i, s)| series_from_json(s, &format!("{cp}/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(OperForm {
        ctx: ctx.clone(),
        r,
        leading,
        ge_coefficients,
    })
}

pub fn normalization_to_json(c: &NormalizationCertificate) -> Value {
    json!({
        "steps": c.steps.iter().map(|(k, x)| json!({"k": k, "X": matrix_to_json(x)})).collect::<Vec<_>>(),
        "conjugator": matrix_to_json(&c.conjugator),
        "result": oper_form_to_json(&c.result),
        "window": [c.window.0, c.window.1],
        "gauge": gauge_to_json(&c.gauge),
        "K": c.steps.len(),
    })
}

pub fn search_to_json(c: &SearchCertificate) -> Value {
    json!({
        "gauge": gauge_to_json(&c.gauge),
        "transformed": connection_to_json(&c.transformed),
        "leading": matrix_to_json(&c.leading),
        "r": c.r,
        "search_stats": {
            "coweight_bound": c.stats.coweight_bound,
            "depth_bound": c.stats.depth_bound,
            "candidates_tried": c.stats.candidates_tried,
        },
    })
}

pub fn cyclic_to_json(w: &CyclicWitness, g: &GaugeElement, b: &Connection) -> Value {
    json!({
        "phi": w.phi.iter().map(series_to_json).collect::<Vec<_>>(),
        "wronskian": gauge_to_json(g),
        "det_valuation": w.det_valuation,
        "candidates_tried": w.candidates_tried,
        "companion": connection_to_json(b),
    })
}

pub fn error_to_json(e: &Error) -> Value {
    json!({
        "kind": e.kind(),
        "message": e.to_string(),
        "retryable": e.is_retryable(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> &'static str {
        r#"{"n": 2, "kind": "sl", "precision": 10,
            "terms": [{"power": -2, "matrix": [["0","0"],["1","0"]]},
                      {"power": -1, "matrix": [["1/2","0"],["0","-1/2"]]}]}"#
    }

    #[test]
    fn roundtrip_is_value_identical() {
        let a = connection_from_json(&parse_json(sample()).unwrap()).unwrap();
        let emitted = connection_to_json(&a);
        let b = connection_from_json(&emitted).unwrap();
        assert_eq!(a, b);
        assert_eq!(connection_to_json(&b), emitted);
        assert_eq!(a.precision(), Some(10));
        // the (0,1) entry is a structural zero
        assert!(a.series().entry(0, 1).is_exact_zero());
    }

    #[test]
    fn rejects_bad_input() {
        let zero_den = r#"{"n":1,"kind":"gl","precision":3,"terms":[{"power":0,"matrix":[["1/0"]]}]}"#;
        let err = connection_from_json(&parse_json(zero_den).unwrap()).unwrap_err();
        assert!(matches!(&err, Error::Schema { pointer, .. } if pointer == "/terms/0/matrix/0/0"));

        let trace = r#"{"n":2,"kind":"sl","precision":3,"terms":[
            {"power":-2,"matrix":[["0","0"],["1","0"]]},
            {"power":0,"matrix":[["1","0"],["0","0"]]}]}"#;
        let err = connection_from_json(&parse_json(trace).unwrap()).unwrap_err();
        assert!(matches!(&err, Error::Schema { pointer, .. } if pointer == "/terms/1/matrix"));

        let order = r#"{"n":1,"kind":"gl","precision":3,"terms":[
            {"power":1,"matrix":[["1"]]},{"power":0,"matrix":[["1"]]}]}"#;
        let err = connection_from_json(&parse_json(order).unwrap()).unwrap_err();
        assert!(matches!(&err, Error::Schema { pointer, .. } if pointer == "/terms/1/power"));

        let err = parse_json("{\"n\": 2,").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn series_roundtrip() {
        for s in [
            Series::zero(),
            Series::zero_to(4),
            Series::truncated(-1, vec![int(1), int(0), int(-3)], 5),
            Series::exact(2, vec![int(2), int(0), int(7)]),
        ] {
            assert_eq!(series_from_json(&series_to_json(&s), "").unwrap(), s);
        }
    }
}
