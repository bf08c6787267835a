//! Command dispatch shared by the CLI and the browser demo: JSON in, a
//! deterministic JSON report out.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::cyclic::{default_pole_budget, find_cyclic_vector, oper_from_cyclic, verify_witness};
use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, vanishes_below, Connection, GaugeElement};
use crate::laurent::rational::{int, Rational};
use crate::liealg::is_regular_nilpotent;
use crate::oper::{
    expand, is_oper_form, normalize_regular_nilpotent_traced, normalize_regular_traced,
    tail_in_ge, verify_certificate,
};
use crate::schema::{
    connection_from_json_at, connection_to_json, cyclic_to_json, error_to_json, gauge_from_json,
    gauge_to_json, matrix_from_json, matrix_to_json, normalization_to_json, oper_form_from_json,
    parse_json, rational_from_json, rational_to_json, search_to_json,
};
use crate::springer::{
    default_window_depth, in_deformed_fiber, in_iwahori_fiber, in_m_a, is_regular_point,
    leading_term, regularization_search, tangent_space_dim, DeformedFiberQuery,
    DEFAULT_COWEIGHT_BOUND, DEFAULT_DEPTH_BOUND,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MIN_PRECISION: i64 = 4;
pub const PRECISION_ENV: &str = "OPERFORGE_PRECISION";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RETRYABLE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Normalize,
    NormalizeRegular,
    Cyclic,
    Regularize,
    VerifyOper,
    TangentDim,
    Member,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Normalize,
        Command::NormalizeRegular,
        Command::Cyclic,
        Command::Regularize,
        Command::VerifyOper,
        Command::TangentDim,
        Command::Member,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Normalize => "normalize",
            Command::NormalizeRegular => "normalize-regular",
            Command::Cyclic => "cyclic",
            Command::Regularize => "regularize",
            Command::VerifyOper => "verify-oper",
            Command::TangentDim => "tangent-dim",
            Command::Member => "member",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knobs {
    /// Relative working precision; exact inputs that do not terminate are
    /// cut this far above their valuation.
    pub precision: i64,
    pub coweight_bound: i64,
    pub depth_bound: i64,
    /// Defaults to `2n`.
    pub pole_budget: Option<i64>,
    /// Defaults to `(-r) · dim g`.
    pub window_depth: Option<i64>,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            precision: crate::laurent::DEFAULT_PRECISION,
            coweight_bound: DEFAULT_COWEIGHT_BOUND,
            depth_bound: DEFAULT_DEPTH_BOUND,
            pole_budget: None,
            window_depth: None,
        }
    }
}

impl Knobs {
    pub fn validate(&self) -> Result<()> {
        if self.precision < MIN_PRECISION {
            return Err(Error::schema(
                "/knobs/precision",
                format!("precision must be at least {MIN_PRECISION}"),
            ));
        }
        for (name, v) in [
            ("coweight_bound", Some(self.coweight_bound)),
            ("depth_bound", Some(self.depth_bound)),
            ("pole_budget", self.pole_budget),
            ("window_depth", self.window_depth),
        ] {
            if v.is_some_and(|v| v < 0) {
                return Err(Error::schema(format!("/knobs/{name}"), "must be nonnegative"));
            }
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!({
            "precision": self.precision,
            "coweight_bound": self.coweight_bound,
            "depth_bound": self.depth_bound,
            "pole_budget": self.pole_budget,
            "window_depth": self.window_depth,
        })
    }
}

/// A connection, optionally with a gauge element and `λ` for the fiber
/// commands. The bare connection object is accepted as well as
/// `{"connection", "gauge", "lambda"}`.
#[derive(Clone, Debug)]
pub struct Input {
    pub connection: Connection,
    pub gauge: Option<GaugeElement>,
    pub lambda: Rational,
}

pub fn parse_input(v: &Value) -> Result<Input> {
    let Some(obj) = v.as_object().filter(|o| o.contains_key("connection")) else {
        return Ok(Input {
            connection: connection_from_json_at(v, "")?,
            gauge: None,
            lambda: int(1),
        });
    };
    let connection = connection_from_json_at(&obj["connection"], "/connection")?;
    let gauge = match obj.get("gauge") {
        None | Some(Value::Null) => None,
        Some(g) => Some(gauge_from_json(g, "/gauge", connection.ctx())?),
    };
    let lambda = match obj.get("lambda") {
        None | Some(Value::Null) => int(1),
        Some(l) => rational_from_json(l, "/lambda")?,
    };
    Ok(Input {
        connection,
        gauge,
        lambda,
    })
}

/// Truncated inputs are cut to `v + precision` if that is lower than their
/// own precision; exact inputs stay exact.
pub fn effective_connection(a: &Connection, precision: i64) -> Connection {
    match (a.precision(), a.series().valuation_bound()) {
        (Some(n), Some(v)) if v + precision < n => a.truncate(v + precision),
        _ => a.clone(),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_retryable() {
        EXIT_RETRYABLE
    } else {
        EXIT_INVALID
    }
}

fn header(cmd: Command, knobs: &Knobs) -> Value {
    json!({
        "command": cmd.name(),
        "version": VERSION,
        "knobs": knobs.to_json(),
    })
}

fn error_report(mut report: Value, e: &Error) -> (i32, Value) {
    report["status"] = json!("error");
    report["error"] = error_to_json(e);
    (exit_code(e), report)
}

/// Runs one command on JSON text; returns the exit code and the report.
pub fn run(cmd: Command, input: &str, knobs: &Knobs) -> (i32, Value) {
    let mut report = header(cmd, knobs);
    if let Err(e) = knobs.validate() {
        return error_report(report, &e);
    }
    let parsed = match parse_json(input).and_then(|v| parse_input(&v)) {
        Ok(p) => p,
        Err(e) => return error_report(report, &e),
    };
    let a = effective_connection(&parsed.connection, knobs.precision);
    report["input"] = connection_to_json(&a);
    if let Some(g) = &parsed.gauge {
        report["gauge"] = gauge_to_json(g);
    }
    if matches!(cmd, Command::Member) {
        report["lambda"] = rational_to_json(&parsed.lambda);
    }
    match dispatch(cmd, &a, &parsed, knobs) {
        Ok(result) => {
            report["status"] = json!("ok");
            report["result"] = result;
            (EXIT_OK, report)
        }
        Err(e) => error_report(report, &e),
    }
}

fn dispatch(cmd: Command, a: &Connection, input: &Input, knobs: &Knobs) -> Result<Value> {
    let ctx = a.ctx().clone();
    let gauge = || {
        input
            .gauge
            .clone()
            .unwrap_or_else(|| GaugeElement::identity(ctx.clone()))
    };
    Ok(match cmd {
        Command::Normalize | Command::NormalizeRegular => {
            let trace = if cmd == Command::Normalize {
                normalize_regular_nilpotent_traced(a, knobs.precision, false)?
            } else {
                normalize_regular_traced(a, knobs.precision, false)?
            };
            let cert = trace.certificate;
            json!({
                "certificate": normalization_to_json(&cert),
                "verified": verify_certificate(a, &cert)?,
            })
        }
        Command::Cyclic => {
            let budget = knobs.pole_budget.unwrap_or_else(|| default_pole_budget(ctx.n));
            let w = find_cyclic_vector(a, budget)?;
            let (g, b) = oper_from_cyclic(a, &w)?;
            let replay = gauge_transform(&g.inverse()?, a)?;
            let verified = verify_witness(a, &w) && replay.agrees_with(&b) && is_oper_form(&b)?;
            json!({
                "witness": cyclic_to_json(&w, &g, &b),
                "pole_budget": budget,
                "verified": verified,
            })
        }
        Command::Regularize => {
            let cert = regularization_search(a, knobs.coweight_bound, knobs.depth_bound)?;
            json!({
                "certificate": search_to_json(&cert),
                "point": gauge_to_json(&cert.gauge.inverse()?),
                "verified": cert.verify(a)?,
            })
        }
        Command::VerifyOper => json!({ "is_oper": is_oper_form(a)? }),
        Command::TangentDim => {
            let r = a.finite_order()?;
            let depth = match knobs.window_depth {
                Some(d) => d,
                None => default_window_depth(a)?,
            };
            let d = tangent_space_dim(a, &gauge(), depth)?;
            json!({
                "dimension": d,
                "bound": (-r) * ctx.dim() as i64,
                "window_depth": depth,
            })
        }
        Command::Member => member_report(a, &gauge(), &input.lambda)?,
    })
}

fn member_report(a: &Connection, g: &GaugeElement, lambda: &Rational) -> Result<Value> {
    let in_ma = in_m_a(a, g)?;
    let q = DeformedFiberQuery::from_connection(a, lambda.clone())?;
    let in_fiber = in_deformed_fiber(&q, g)?;
    let iwahori = in_iwahori_fiber(&q, g)?;
    let (lead, regular) = match leading_term(&q, g) {
        Ok(m) => (matrix_to_json(&m), json!(is_regular_point(&q, g)?)),
        Err(Error::NotNilpotent | Error::NotMember) => (Value::Null, Value::Null),
        Err(e) => return Err(e),
    };
    Ok(json!({
        "in_M_A": in_ma,
        "in_deformed_fiber": in_fiber,
        "in_iwahori_fiber": iwahori,
        "leading_term": lead,
        "is_regular_point": regular,
    }))
}

fn field<'a>(v: &'a Value, ptr: &str) -> Result<&'a Value> {
    v.pointer(ptr)
        .filter(|x| !x.is_null())
        .ok_or_else(|| Error::schema(ptr, "missing from report"))
}

/// Re-checks a report produced by [`run`] using only the gauge action and
/// the membership predicates.
pub fn verify_report(text: &str) -> (i32, Value) {
    match verify_inner(text) {
        Ok((cmd, checks)) => {
            let ok = checks.iter().all(|(_, b)| *b);
            let map: serde_json::Map<String, Value> =
                checks.into_iter().map(|(k, b)| (k.to_string(), json!(b))).collect();
            let out = json!({"command": cmd.name(), "version": VERSION, "checks": map, "verified": ok});
            (if ok { EXIT_OK } else { EXIT_INVALID }, out)
        }
        Err(e) => (
            exit_code(&e),
            json!({"version": VERSION, "verified": false, "error": error_to_json(&e)}),
        ),
    }
}

fn verify_inner(text: &str) -> Result<(Command, Vec<(&'static str, bool)>)> {
    let report = parse_json(text)?;
    let cmd: Command = field(&report, "/command")?
        .as_str()
        .ok_or_else(|| Error::schema("/command", "expected a string"))?
        .parse()
        .map_err(|m: String| Error::schema("/command", m))?;
    if field(&report, "/status")? != "ok" {
        return Err(Error::schema("/status", "only successful reports carry a certificate"));
    }
    let a = connection_from_json_at(field(&report, "/input")?, "/input")?;
    let ctx = a.ctx().clone();
    let embedded_gauge = match report.get("gauge") {
        Some(g) => gauge_from_json(g, "/gauge", &ctx)?,
        None => GaugeElement::identity(ctx.clone()),
    };
    let mut checks = Vec::new();
    match cmd {
        Command::Normalize | Command::NormalizeRegular => {
            let g = gauge_from_json(field(&report, "/result/certificate/gauge")?, "/result/certificate/gauge", &ctx)?;
            let form = oper_form_from_json(
                field(&report, "/result/certificate/result")?,
                "/result/certificate/result",
                &ctx,
            )?;
            let expanded = expand(&form)?;
            let replay = gauge_transform(&g, &a)?;
            checks.push(("replay_agrees", replay.agrees_with(&expanded)));
            checks.push(("tail_in_ge", tail_in_ge(&replay, form.r)));
            checks.push(("leading_term", replay.coeff(form.r).as_ref() == Some(&form.leading)));
            checks.push(("order", vanishes_below(replay.series(), form.r)?));
            if cmd == Command::Normalize {
                checks.push(("leading_is_f", form.leading == ctx.f));
            }
        }
        Command::Cyclic => {
            let g = gauge_from_json(field(&report, "/result/witness/wronskian")?, "/result/witness/wronskian", &ctx)?;
            let b = connection_from_json_at(
                field(&report, "/result/witness/companion")?,
                "/result/witness/companion",
            )?;
            let replay = gauge_transform(&g.inverse()?, &a)?;
            checks.push(("replay_agrees", replay.agrees_with(&b)));
            checks.push(("companion_is_oper", is_oper_form(&b)?));
            checks.push(("wronskian_invertible", !g.matrix().det().is_zero_on_window()));
        }
        Command::Regularize => {
            let g = gauge_from_json(field(&report, "/result/certificate/gauge")?, "/result/certificate/gauge", &ctx)?;
            let r = field(&report, "/result/certificate/r")?
                .as_i64()
                .ok_or_else(|| Error::schema("/result/certificate/r", "expected an integer"))?;
            let lead = matrix_from_json(
                field(&report, "/result/certificate/leading")?,
                ctx.n,
                "/result/certificate/leading",
            )?;
            let replay = gauge_transform(&g, &a)?;
            checks.push(("order", vanishes_below(replay.series(), r)?));
            checks.push(("leading_term", replay.coeff(r).as_ref() == Some(&lead)));
            checks.push(("regular_nilpotent", is_regular_nilpotent(&lead)));
        }
        Command::VerifyOper => {
            let claimed = field(&report, "/result/is_oper")?.as_bool();
            checks.push(("is_oper", claimed == Some(is_oper_form(&a)?)));
        }
        Command::TangentDim => {
            let depth = field(&report, "/result/window_depth")?.as_i64().unwrap_or(0);
            let claimed = field(&report, "/result/dimension")?.as_u64();
            let d = tangent_space_dim(&a, &embedded_gauge, depth)?;
            checks.push(("dimension", claimed == Some(d as u64)));
            let bound = (-a.finite_order()?) * ctx.dim() as i64;
            checks.push(("bound", d as i64 <= bound));
        }
        Command::Member => {
            let lambda = match report.get("lambda") {
                Some(l) => rational_from_json(l, "/lambda")?,
                None => int(1),
            };
            let recomputed = member_report(&a, &embedded_gauge, &lambda)?;
            checks.push(("in_M_A", report.pointer("/result/in_M_A") == recomputed.get("in_M_A")));
            checks.push((
                "in_deformed_fiber",
                report.pointer("/result/in_deformed_fiber") == recomputed.get("in_deformed_fiber"),
            ));
            checks.push((
                "leading_term",
                report.pointer("/result/leading_term") == recomputed.get("leading_term"),
            ));
        }
    }
    Ok((cmd, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"{"n":2,"kind":"sl","precision":null,"terms":[
        {"power":-2,"matrix":[["0","0"],["1","0"]]},
        {"power":-1,"matrix":[["1","0"],["0","-1"]]}]}"#;

    #[test]
    fn normalize_report_roundtrips_through_verify() {
        let (code, report) = run(Command::Normalize, WORKED, &Knobs::default());
        assert_eq!(code, EXIT_OK, "{report}");
        assert_eq!(report["result"]["verified"], json!(true));
        assert_eq!(report["result"]["certificate"]["K"], json!(1));
        let (vcode, v) = verify_report(&report.to_string());
        assert_eq!(vcode, EXIT_OK, "{v}");
    }

    #[test]
    fn tampered_report_fails() {
        let (_, mut report) = run(Command::Normalize, WORKED, &Knobs::default());
        report["result"]["certificate"]["result"]["ge_coefficients"][0]["coeffs"][0] = json!("3");
        let (code, v) = verify_report(&report.to_string());
        assert_eq!(code, EXIT_INVALID, "{v}");
    }

    #[test]
    fn error_classes() {
        let bad = r#"{"n":1,"kind":"gl","precision":2,"terms":[{"power":0,"matrix":[["1/0"]]}]}"#;
        let (code, report) = run(Command::VerifyOper, bad, &Knobs::default());
        assert_eq!(code, EXIT_INVALID);
        assert_eq!(report["error"]["kind"], json!("Schema"));

        let e13 = r#"{"n":3,"kind":"sl","precision":null,"terms":[
            {"power":-2,"matrix":[["0","0","1"],["0","0","0"],["0","0","0"]]}]}"#;
        let knobs = Knobs {
            coweight_bound: 0,
            depth_bound: 0,
            ..Knobs::default()
        };
        let (code, report) = run(Command::Regularize, e13, &knobs);
        assert_eq!(code, EXIT_RETRYABLE, "{report}");

        let low = Knobs {
            precision: 3,
            ..Knobs::default()
        };
        assert_eq!(run(Command::VerifyOper, WORKED, &low).0, EXIT_INVALID);
    }

    #[test]
    fn reports_are_deterministic() {
        for cmd in Command::ALL {
            let a = run(cmd, WORKED, &Knobs::default()).1.to_string();
            let b = run(cmd, WORKED, &Knobs::default()).1.to_string();
            assert_eq!(a, b);
        }
    }
}
