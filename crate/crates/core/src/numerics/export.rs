//! CSV and JSON trajectory files with bit-exact float encodings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::integrate::Trajectory;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloatFormat {
    /// Shortest decimal that parses back to the same double.
    #[default]
    Shortest,
    /// C99-style hexadecimal float, e.g. `0x1.8p+1`.
    Hex,
}

impl FromStr for FloatFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<FloatFormat> {
        match s {
            "shortest" | "decimal" => Ok(FloatFormat::Shortest),
            "hex" => Ok(FloatFormat::Hex),
            _ => Err(Error::InvalidArgument(format!("unknown float format `{s}`"))),
        }
    }
}

pub fn format_f64(v: f64, fmt: FloatFormat) -> String {
    match fmt {
        FloatFormat::Shortest => format!("{v:?}"),
        FloatFormat::Hex => to_hex(v),
    }
}

/// Accepts either encoding.
pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.starts_with("0x") || body.starts_with("0X") {
        from_hex(s)
    } else {
        s.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad float `{s}`")))
    }
}

fn to_hex(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    let dot = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{dot}p{e:+}")
}

fn from_hex(s: &str) -> Result<f64> {
    let bad = || Error::InvalidArgument(format!("bad hex float `{s}`"));
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let body = body.get(2..).ok_or_else(bad)?;
    let (mant, exp) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (lead, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if frac.len() > 13 || !frac.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(bad());
    }
    let frac_bits =
        if frac.is_empty() { 0 } else { u64::from_str_radix(frac, 16).map_err(|_| bad())? << (4 * (13 - frac.len())) };
    let bits = match lead {
        "1" => {
            if !(-1022..=1023).contains(&exp) {
                return Err(bad());
            }
            (((exp + 1023) as u64) << 52) | frac_bits
        }
        "0" if frac_bits == 0 => 0,
        "0" if exp == -1022 => frac_bits,
        _ => return Err(bad()),
    };
    let v = f64::from_bits(bits);
    Ok(if neg { -v } else { v })
}

/// Column names: time, state symbols, diagnostics.
pub fn columns(traj: &Trajectory) -> Vec<String> {
    let time = if traj.time.is_empty() { "t".to_string() } else { traj.time.clone() };
    std::iter::once(time).chain(traj.state_names.iter().cloned()).chain(traj.diagnostic_names.iter().cloned()).collect()
}

fn rows(traj: &Trajectory) -> impl Iterator<Item = Vec<f64>> + '_ {
    traj.samples.iter().enumerate().map(|(i, s)| {
        let mut row = Vec::with_capacity(1 + s.state.len());
        row.push(s.t);
        row.extend_from_slice(&s.state);
        if let Some(d) = traj.diagnostics.get(i) {
            row.extend_from_slice(d);
        }
        row
    })
}

pub fn to_csv(traj: &Trajectory, fmt: FloatFormat) -> String {
    let mut out = columns(traj).join(",");
    out.push('\n');
    for row in rows(traj) {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v, fmt)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn to_json(traj: &Trajectory, fmt: FloatFormat) -> Value {
    let enc = |v: &[f64]| v.iter().map(|&x| format_f64(x, fmt)).collect::<Vec<_>>();
    let samples: Vec<Value> = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "t": format_f64(s.t, fmt),
                "state": enc(&s.state),
                "diagnostics": traj.diagnostics.get(i).map(|d| enc(d)).unwrap_or_default(),
            })
        })
        .collect();
    json!({
        "metadata": {
            "system": traj.system.map(|s| s.as_str()),
            "time": traj.time,
            "state": traj.state_names,
            "diagnostics": traj.diagnostic_names,
            "params": traj.params.iter().map(|(k, v)| json!({"name": k, "value": v})).collect::<Vec<_>>(),
            "integrator": traj.method,
            "float_format": fmt,
            "aborted": traj.aborted,
            "rejected_steps": traj.rejected_steps,
        },
        "samples": samples,
    })
}

/// Plain numeric table read back from an export.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn of(traj: &Trajectory) -> Table {
        Table { columns: columns(traj), rows: rows(traj).collect() }
    }

    /// Bitwise comparison, so NaN payloads and signed zeros count.
    pub fn bit_equal(&self, other: &Table) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()))
    }
}

pub fn read_csv(src: &str) -> Result<Table> {
    let mut lines = src.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty csv".into()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() {
            return Err(Error::InvalidArgument(format!("csv row {} has {} cells", n + 1, row.len())));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn read_json(doc: &Value) -> Result<Table> {
    let bad = |what: &str| Error::InvalidArgument(format!("trajectory json: {what}"));
    let meta = doc.get("metadata").ok_or_else(|| bad("missing metadata"))?;
    let names = |key: &str| -> Result<Vec<String>> {
        meta.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| bad(key))?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad(key)))
            .collect()
    };
    let time = meta.get("time").and_then(Value::as_str).ok_or_else(|| bad("time"))?;
    let mut columns = vec![if time.is_empty() { "t".to_string() } else { time.to_string() }];
    columns.extend(names("state")?);
    columns.extend(names("diagnostics")?);
    let floats = |v: &Value| -> Result<Vec<f64>> {
        v.as_array()
            .ok_or_else(|| bad("expected array"))?
            .iter()
            .map(|x| parse_f64(x.as_str().ok_or_else(|| bad("expected string float"))?))
            .collect()
    };
    let mut rows = Vec::new();
    for s in doc.get("samples").and_then(Value::as_array).ok_or_else(|| bad("samples"))? {
        let mut row = vec![parse_f64(s.get("t").and_then(Value::as_str).ok_or_else(|| bad("t"))?)?];
        row.extend(floats(s.get("state").ok_or_else(|| bad("state"))?)?);
        row.extend(floats(s.get("diagnostics").unwrap_or(&Value::Array(Vec::new())))?);
        rows.push(row);
    }
    Ok(Table { columns, rows })
}
