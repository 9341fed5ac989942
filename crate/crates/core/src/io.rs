//! File formats: signal CSV, distribution CSV / compact binary, chirp
//! specification JSON, and the machine-readable verification reports with a
//! small schema checker.

use crate::chirp::ChirpSpec;
use crate::engine::Distribution;
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Signal};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

fn join_usize(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                what: what.to_string(),
                detail: format!("bad number '{tok}': {e}"),
            })
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<usize>().map_err(|e| Error::Parse {
                what: what.to_string(),
                detail: format!("bad integer '{tok}': {e}"),
            })
        })
        .collect()
}

fn grid_header_fields(grid: &Grid) -> String {
    format!(
        "origin={} spacing={} count={}",
        join_f64(grid.origin()),
        join_f64(grid.spacing()),
        join_usize(grid.count())
    )
}

fn parse_grid_fields(tokens: &[(&str, &str)], what: &str) -> Result<Grid> {
    let mut origin = None;
    let mut spacing = None;
    let mut count = None;
    for (key, val) in tokens {
        match *key {
            "origin" => origin = Some(parse_f64_list(val, what)?),
            "spacing" => spacing = Some(parse_f64_list(val, what)?),
            "count" => count = Some(parse_usize_list(val, what)?),
            _ => {}
        }
    }
    let missing = |field: &str| Error::Parse {
        what: what.to_string(),
        detail: format!("missing grid field '{field}'"),
    };
    Grid::new(
        origin.ok_or_else(|| missing("origin"))?,
        spacing.ok_or_else(|| missing("spacing"))?,
        count.ok_or_else(|| missing("count"))?,
    )
}

fn header_tokens(line: &str) -> Vec<(&str, &str)> {
    line.split_whitespace().filter_map(|tok| tok.split_once('=')).collect()
}

/// Write a signal as CSV: one grid header line, then `index,re,im` rows at
/// 17 significant digits.
pub fn write_signal_csv<W: Write>(mut out: W, signal: &Signal) -> Result<()> {
    writeln!(
        out,
        "# grid {} domain={}",
        grid_header_fields(signal.grid()),
        signal.domain()
    )?;
    for (i, s) in signal.samples().iter().enumerate() {
        writeln!(out, "{i},{:.16e},{:.16e}", s.re, s.im)?;
    }
    Ok(())
}

pub fn save_signal_csv(path: &Path, signal: &Signal) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_signal_csv(std::io::BufWriter::new(file), signal)
}

pub fn read_signal_csv<R: Read>(input: R) -> Result<Signal> {
    let what = "signal csv";
    let reader = BufReader::new(input);
    let mut grid: Option<Grid> = None;
    let mut domain = Domain::Time;
    let mut samples: Vec<(usize, Complex64)> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let tokens = header_tokens(rest);
            if rest.trim_start().starts_with("grid") {
                grid = Some(parse_grid_fields(&tokens, what)?);
                for (key, val) in tokens {
                    if key == "domain" {
                        domain = match val {
                            "time" => Domain::Time,
                            "frequency" => Domain::Frequency,
                            other => {
                                return Err(Error::Parse {
                                    what: what.into(),
                                    detail: format!("unknown domain '{other}'"),
                                })
                            }
                        };
                    }
                }
            }
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |field: &str| {
            parts.next().ok_or_else(|| Error::Parse {
                what: what.into(),
                detail: format!("missing field '{field}'"),
            })
        };
        let idx: usize = next("index")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad index: {e}"),
        })?;
        let re: f64 = next("re")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad re: {e}"),
        })?;
        let im: f64 = next("im")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad im: {e}"),
        })?;
        samples.push((idx, Complex64::new(re, im)));
    }
    let grid = grid.ok_or_else(|| Error::Parse {
        what: what.into(),
        detail: "missing '# grid ...' header".into(),
    })?;
    let mut data = vec![Complex64::new(0.0, 0.0); grid.total()];
    for (idx, v) in samples {
        if idx >= data.len() {
            return Err(Error::Parse {
                what: what.into(),
                detail: format!("index {idx} outside grid of {} nodes", data.len()),
            });
        }
        data[idx] = v;
    }
    Signal::new(grid, data, domain)
}

pub fn load_signal_csv(path: &Path) -> Result<Signal> {
    read_signal_csv(std::fs::File::open(path)?)
}

/// Distribution text format: grid/kernel headers then `ix,iw,re,im` rows.
pub fn write_distribution_csv<W: Write>(mut out: W, d: &Distribution) -> Result<()> {
    writeln!(out, "# cohen-distribution")?;
    writeln!(out, "# kernel {}", d.kernel_tag())?;
    writeln!(out, "# time {}", grid_header_fields(d.time_grid()))?;
    writeln!(out, "# freq {}", grid_header_fields(d.freq_grid()))?;
    let ft = d.freq_grid().total();
    for (idx, v) in d.values().iter().enumerate() {
        writeln!(out, "{},{},{:.16e},{:.16e}", idx / ft, idx % ft, v.re, v.im)?;
    }
    Ok(())
}

/// Compact binary variant: the same text headers, a `# data` marker line,
/// then row-major little-endian f64 (re, im) pairs.
pub fn write_distribution_bin<W: Write>(mut out: W, d: &Distribution) -> Result<()> {
    writeln!(out, "# cohen-distribution bin")?;
    writeln!(out, "# kernel {}", d.kernel_tag())?;
    writeln!(out, "# time {}", grid_header_fields(d.time_grid()))?;
    writeln!(out, "# freq {}", grid_header_fields(d.freq_grid()))?;
    writeln!(out, "# data")?;
    for v in d.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Write a distribution choosing text or binary by the `.bin` extension.
pub fn save_distribution(path: &Path, d: &Distribution) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let out = std::io::BufWriter::new(file);
    if path.extension().is_some_and(|e| e == "bin") {
        write_distribution_bin(out, d)
    } else {
        write_distribution_csv(out, d)
    }
}

struct DistHeader {
    kernel: String,
    time: Option<Grid>,
    freq: Option<Grid>,
}

fn parse_dist_header_line(line: &str, header: &mut DistHeader, what: &str) -> Result<()> {
    let rest = line.trim_start_matches('#').trim_start();
    if let Some(tag) = rest.strip_prefix("kernel ") {
        header.kernel = tag.trim().to_string();
    } else if rest.starts_with("time ") {
        header.time = Some(parse_grid_fields(&header_tokens(rest), what)?);
    } else if rest.starts_with("freq ") {
        header.freq = Some(parse_grid_fields(&header_tokens(rest), what)?);
    }
    Ok(())
}

pub fn load_distribution(path: &Path) -> Result<Distribution> {
    let what = "distribution file";
    let bytes = std::fs::read(path)?;
    let mut header = DistHeader { kernel: String::new(), time: None, freq: None };

    // Scan text lines; in the binary variant a `# data` marker precedes the
    // raw payload.
    let mut offset = 0usize;
    let mut is_binary = false;
    let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
    while offset < bytes.len() {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p)
            .unwrap_or(bytes.len());
        let line = std::str::from_utf8(&bytes[offset..end]).map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("non-utf8 header: {e}"),
        })?;
        offset = end + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if line.trim_start_matches('#').trim() == "data" {
                is_binary = true;
                break;
            }
            parse_dist_header_line(line, &mut header, what)?;
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |field: &str| {
            parts.next().ok_or_else(|| Error::Parse {
                what: what.into(),
                detail: format!("missing field '{field}'"),
            })
        };
        let ix: usize = next("ix")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad ix: {e}"),
        })?;
        let iw: usize = next("iw")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad iw: {e}"),
        })?;
        let re: f64 = next("re")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad re: {e}"),
        })?;
        let im: f64 = next("im")?.trim().parse().map_err(|e| Error::Parse {
            what: what.into(),
            detail: format!("bad im: {e}"),
        })?;
        rows.push((ix, iw, Complex64::new(re, im)));
    }
    let time = header.time.ok_or_else(|| Error::Parse {
        what: what.into(),
        detail: "missing '# time ...' header".into(),
    })?;
    let freq = header.freq.ok_or_else(|| Error::Parse {
        what: what.into(),
        detail: "missing '# freq ...' header".into(),
    })?;
    let ft = freq.total();
    let total = time.total() * ft;
    let mut values = vec![Complex64::new(0.0, 0.0); total];
    if is_binary {
        let payload = &bytes[offset..];
        if payload.len() != total * 16 {
            return Err(Error::Parse {
                what: what.into(),
                detail: format!("binary payload is {} bytes, expected {}", payload.len(), total * 16),
            });
        }
        for (i, chunk) in payload.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            values[i] = Complex64::new(re, im);
        }
    } else {
        for (ix, iw, v) in rows {
            let idx = ix * ft + iw;
            if idx >= total {
                return Err(Error::Parse {
                    what: what.into(),
                    detail: format!("index ({ix},{iw}) outside {total} cells"),
                });
            }
            values[idx] = v;
        }
    }
    Ok(Distribution::new(time, freq, values, header.kernel))
}

pub fn load_chirp_spec(path: &Path) -> Result<ChirpSpec> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        what: format!("chirp spec {}", path.display()),
        detail: e.to_string(),
    })
}

/// One verification check: the measured value, the tolerance it was judged
/// against, and the outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Suite-level report; serialization is deterministic (fixed field order,
/// no timestamps, no maps with unstable iteration).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub suite: String,
    pub grid_count: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub seed: u64,
    pub rel_tol: f64,
    pub checks: Vec<CheckRecord>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// Minimal JSON-schema subset checker (type / properties / required / items /
/// enum / additionalProperties). Enough to validate the shipped report
/// schemas without pulling in a full validator.
pub fn validate_schema(
    value: &serde_json::Value,
    schema: &serde_json::Value,
) -> std::result::Result<(), String> {
    validate_at(value, schema, "$")
}

fn validate_at(
    value: &serde_json::Value,
    schema: &serde_json::Value,
    path: &str,
) -> std::result::Result<(), String> {
    use serde_json::Value;
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: value {value} not in enum {options:?}"));
        }
        return Ok(());
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unsupported schema type '{other}'")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {value}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for name in required {
            let name = name.as_str().unwrap_or_default();
            if value.get(name).is_none() {
                return Err(format!("{path}: missing required field '{name}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate_at(v, sub, &format!("{path}.{key}"))?;
                }
            }
            let additional = schema
                .get("additionalProperties")
                .and_then(Value::as_bool)
                .unwrap_or(true);
            if !additional {
                for key in obj.keys() {
                    if !props.contains_key(key) {
                        return Err(format!("{path}: unexpected field '{key}'"));
                    }
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate_at(v, items, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

/// Render a human summary of a report (one line per check).
pub fn summarize_report(report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "suite {} | grid {}:[{}, {}) | seed {} | tol {:.1e}",
        report.suite, report.grid_count, report.grid_lo, report.grid_hi, report.seed, report.rel_tol
    );
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        match c.expected {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "  [{status}] {} ({}): value {:.6e} expected {:.6e} tol {:.1e}",
                    c.name, c.kind, c.value, e, c.tolerance
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "  [{status}] {} ({}): value {:.6e} tol {:.1e}",
                    c.name, c.kind, c.value, c.tolerance
                );
            }
        }
    }
    let _ = writeln!(out, "passed {} failed {}", report.passed, report.failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::cctfd;
    use crate::kernel::Kernel;
    use std::f64::consts::PI;

    fn gaussian() -> Signal {
        let g = Grid::line(-4.0, 4.0, 96).unwrap();
        Signal::sample(&g, Domain::Time, |x| {
            let env = (-PI * x[0] * x[0]).exp();
            Complex64::new(env, 0.1 * env)
        })
        .unwrap()
    }

    #[test]
    fn signal_csv_round_trip() {
        let f = gaussian();
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &f).unwrap();
        let back = read_signal_csv(&buf[..]).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.domain(), f.domain());
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert_eq!(a, b, "17 significant digits must round-trip f64 exactly");
        }
    }

    #[test]
    fn distribution_csv_and_bin_round_trip() {
        let f = gaussian();
        let d = cctfd(&f, &Kernel::Unit).unwrap();

        let mut buf = Vec::new();
        write_distribution_csv(&mut buf, &d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("d.csv");
        std::fs::write(&csv_path, &buf).unwrap();
        let back = load_distribution(&csv_path).unwrap();
        assert_eq!(back.kernel_tag(), d.kernel_tag());
        assert_eq!(back.time_grid(), d.time_grid());
        assert_eq!(back.freq_grid(), d.freq_grid());
        for (a, b) in back.values().iter().zip(d.values()) {
            assert_eq!(a, b);
        }

        let bin_path = dir.path().join("d.bin");
        save_distribution(&bin_path, &d).unwrap();
        let back = load_distribution(&bin_path).unwrap();
        for (a, b) in back.values().iter().zip(d.values()) {
            assert_eq!(a, b, "binary payload must be bit-exact");
        }
    }

    #[test]
    fn malformed_headers_are_reported() {
        let text = "0,1.0,2.0\n";
        let err = read_signal_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("grid"));
    }

    #[test]
    fn schema_checker_catches_missing_fields() {
        let schema = serde_json::json!({
            "type": "object",
            "required": ["name", "value"],
            "properties": {
                "name": {"type": "string"},
                "value": {"type": "number"},
            },
            "additionalProperties": false,
        });
        let good = serde_json::json!({"name": "x", "value": 1.5});
        assert!(validate_schema(&good, &schema).is_ok());
        let missing = serde_json::json!({"name": "x"});
        assert!(validate_schema(&missing, &schema).is_err());
        let extra = serde_json::json!({"name": "x", "value": 1.0, "junk": 2});
        assert!(validate_schema(&extra, &schema).is_err());
        let wrong_type = serde_json::json!({"name": 3, "value": 1.0});
        assert!(validate_schema(&wrong_type, &schema).is_err());
    }
}
