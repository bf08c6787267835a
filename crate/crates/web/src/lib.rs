//! Browser bindings: JSON strings in, JSON strings out.

use operforge::job::{self, Command, Knobs};
use operforge::liealg::{is_regular, kostant_normal_form, make_context, Kind};
use operforge::schema::{matrix_from_json, matrix_to_json, parse_json};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn render(code: i32, report: serde_json::Value) -> String {
    let mut report = report;
    report["exit_code"] = json!(code);
    serde_json::to_string_pretty(&report).expect("reports serialize")
}

pub fn normalize_report(input: &str, precision: i64, regular: bool) -> String {
    let knobs = Knobs {
        precision,
        ..Knobs::default()
    };
    let cmd = if regular {
        Command::NormalizeRegular
    } else {
        Command::Normalize
    };
    let (code, report) = job::run(cmd, input, &knobs);
    render(code, report)
}

pub fn regularize_report(input: &str, coweight_bound: i64, depth_bound: i64) -> String {
    let knobs = Knobs {
        coweight_bound,
        depth_bound,
        ..Knobs::default()
    };
    let (code, report) = job::run(Command::Regularize, input, &knobs);
    render(code, report)
}

/// `{"n", "kind", "matrix"}` to the Kostant slice point of a regular matrix.
pub fn kostant_report(input: &str) -> String {
    let result = (|| -> operforge::Result<serde_json::Value> {
        let v = parse_json(input)?;
        let n = v["n"]
            .as_u64()
            .filter(|n| (1..=16).contains(n))
            .ok_or_else(|| operforge::Error::Schema {
                pointer: "/n".into(),
                message: "n must be between 1 and 16".into(),
            })? as usize;
        let kind: Kind = v["kind"]
            .as_str()
            .unwrap_or("")
            .parse()
            .map_err(|m: String| operforge::Error::Schema {
                pointer: "/kind".into(),
                message: m,
            })?;
        let ctx = make_context(n, kind)?;
        let m = matrix_from_json(&v["matrix"], n, "/matrix")?;
        ctx.check_in_algebra(&m)?;
        let s = kostant_normal_form(&ctx, &m)?;
        Ok(json!({"regular": is_regular(&m), "slice_point": matrix_to_json(&s)}))
    })();
    let (code, report) = match result {
        Ok(v) => (0, json!({"status": "ok", "result": v})),
        Err(e) => (1, json!({"status": "error", "error": operforge::schema::error_to_json(&e)})),
    };
    render(code, report)
}

#[wasm_bindgen]
pub fn normalize(input: &str, precision: i32, regular: bool) -> String {
    normalize_report(input, precision as i64, regular)
}

#[wasm_bindgen]
pub fn regularize(input: &str, coweight_bound: i32, depth_bound: i32) -> String {
    regularize_report(input, coweight_bound as i64, depth_bound as i64)
}

#[wasm_bindgen]
pub fn kostant(input: &str) -> String {
    kostant_report(input)
}
