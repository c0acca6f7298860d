//! JSON and CSV encodings of discs and reports. Floats are always written
//! with 17 significant digits so values round-trip exactly.

use std::io::{self, Write};

use anyhow::{anyhow, bail, Context, Result};
use holodisc_core::discs::AnalyticDisc;
use holodisc_core::kobayashi::ExtremalReport;
use holodisc_core::rhfactor::{IndexReport, Side};
use holodisc_core::solver::{SolveReport, SweepRow};
use holodisc_core::stationary::{LiftedDisc, Multiplier};
use holodisc_core::Complex64;
use serde_json::{json, Map, Value};

/// `x` in scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Compact JSON formatter that prints every float with [`float`].
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` on one line. Non-finite floats become `null`.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    serde::Serialize::serialize(value, &mut ser).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A finite float as JSON, `null` otherwise.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn complex(z: Complex64) -> Value {
    json!([number(z.re), number(z.im)])
}

pub fn disc_to_json(disc: &AnalyticDisc) -> Value {
    let coeffs: Vec<Value> = disc
        .coeffs()
        .iter()
        .map(|c| json!([complex(c[0]), complex(c[1])]))
        .collect();
    json!({ "degree": disc.degree(), "coeffs": coeffs })
}

pub fn lifted_to_json(lift: &LiftedDisc) -> Value {
    let coeffs: Vec<Value> = lift
        .coeffs()
        .iter()
        .map(|c| Value::Array(c.iter().map(|&z| complex(z)).collect()))
        .collect();
    json!({ "degree": lift.degree(), "coeffs": coeffs })
}

fn parse_complex(v: &Value) -> Result<Complex64> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| anyhow!("expected [re, im]"))?;
    let re = pair[0].as_f64().ok_or_else(|| anyhow!("real part is not a number"))?;
    let im = pair[1].as_f64().ok_or_else(|| anyhow!("imaginary part is not a number"))?;
    Ok(Complex64::new(re, im))
}

fn parse_coeff_rows<const K: usize>(v: &Value) -> Result<Vec<[Complex64; K]>> {
    let obj = v.as_object().ok_or_else(|| anyhow!("expected an object with `coeffs`"))?;
    let rows = obj
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("missing `coeffs` array"))?;
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let entries = row
                .as_array()
                .filter(|a| a.len() == K)
                .ok_or_else(|| anyhow!("coefficient {k} must hold {K} complex numbers"))?;
            let mut out = [Complex64::new(0.0, 0.0); K];
            for (slot, e) in out.iter_mut().zip(entries) {
                *slot = parse_complex(e).with_context(|| format!("coefficient {k}"))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(d) = obj.get("degree") {
        let d = d.as_u64().ok_or_else(|| anyhow!("`degree` must be a nonnegative integer"))?;
        if d as usize + 1 != parsed.len() {
            bail!("`degree` is {d} but {} coefficients were given", parsed.len());
        }
    }
    Ok(parsed)
}

pub fn disc_from_json(v: &Value) -> Result<AnalyticDisc> {
    Ok(AnalyticDisc::from_coeffs(parse_coeff_rows::<2>(v)?)?)
}

pub fn lifted_from_json(v: &Value) -> Result<LiftedDisc> {
    Ok(LiftedDisc::from_coeffs(parse_coeff_rows::<4>(v)?)?)
}

/// Eight pins, given either as a bare array or as `{"pins": [...]}`.
pub fn pins_from_json(v: &Value) -> Result<[f64; 8]> {
    let arr = match v {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("pins")
            .and_then(Value::as_array)
            .ok_or_else(|| anyhow!("missing `pins` array"))?,
        _ => bail!("pins must be an array of 8 numbers"),
    };
    if arr.len() != 8 {
        bail!("expected 8 pins, got {}", arr.len());
    }
    let mut pins = [0.0; 8];
    for (slot, x) in pins.iter_mut().zip(arr) {
        *slot = x.as_f64().ok_or_else(|| anyhow!("pins must be numbers"))?;
    }
    Ok(pins)
}

pub fn multiplier_to_json(c: &Multiplier) -> Value {
    Value::Array(c.coeffs().iter().map(|&z| complex(z)).collect())
}

pub fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

pub fn index_report_to_json(lambda: f64, r: &IndexReport) -> Value {
    let profile: Vec<Value> = r.profile.iter().map(|&(k, d)| json!([k, d])).collect();
    json!({
        "lambda": number(lambda),
        "indices": r.partial_indices,
        "maslov": r.maslov,
        "stable": r.stable,
        "truncation": r.truncation,
        "rank_tolerance": number(r.rank_tolerance),
        "convention": side_name(r.side),
        "profile": profile,
    })
}

pub fn extremal_to_json(r: &ExtremalReport) -> Value {
    json!({
        "mu_best": number(r.mu_best),
        "disc": disc_to_json(&r.disc),
        "feasibility_margin": number(r.feasibility_margin),
        "evaluations": r.evaluations,
    })
}

pub fn solve_report_to_json(lambda: f64, r: &SolveReport) -> Value {
    json!({
        "lambda": number(lambda),
        "residual": number(r.residual),
        "iterations": r.iterations,
        "tangent_dim": r.tangent_dim,
        "jacobian_gap": number(r.jacobian_gap),
        "pinned": r.pinned.iter().map(|&x| number(x)).collect::<Vec<_>>(),
        "solution": lifted_to_json(&r.solution),
    })
}

pub fn sweep_row_to_json(row: &SweepRow) -> Value {
    let mut m = Map::new();
    m.insert("lambda".into(), number(row.lambda));
    m.insert("tangent_dim".into(), row.tangent_dim.map_or(Value::Null, |d| json!(d)));
    m.insert("gap".into(), row.jacobian_gap.map_or(Value::Null, number));
    m.insert("min_index".into(), row.min_partial_index.map_or(Value::Null, |d| json!(d)));
    m.insert("residual".into(), row.residual.map_or(Value::Null, number));
    m.insert("errors".into(), json!(row.errors));
    Value::Object(m)
}

pub const SWEEP_CSV_HEADER: [&str; 5] = ["lambda", "tangent_dim", "gap", "min_index", "residual"];

/// Sweep table as CSV with a header row; failed cells are left empty.
pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER)?;
    for row in rows {
        w.write_record([
            float(row.lambda),
            row.tangent_dim.map_or(String::new(), |d| d.to_string()),
            row.jacobian_gap.map_or(String::new(), float),
            row.min_partial_index.map_or(String::new(), |d| d.to_string()),
            row.residual.map_or(String::new(), float),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
