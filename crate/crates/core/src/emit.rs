//! Deterministic, locale-independent rendering of results to CSV and JSON,
//! plus the run manifest that makes outputs reproducible byte for byte.
//!
//! All floating-point values are rendered with 12 significant digits. CSV
//! uses that rendering directly; JSON carries values rounded to the same 12
//! digits so that parse -> re-serialize round-trips are byte-identical.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::measurement::EjmBasis;
use crate::scenario::CorrelationTensor;
use crate::sweep::{SweepRow, ThresholdResult, PAIRS};

pub const SCHEMA_VERSION: u32 = 1;

/// Canonical 12-significant-digit rendering. Zero renders as "0".
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{:.11e}", x)
}

/// Round to the value the canonical rendering denotes.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format_sig12(x).parse().expect("canonical float rendering")
}

/// JSON number carrying 12 significant digits.
pub fn num(x: f64) -> Value {
    json!(round_sig12(x))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Serialize a JSON value in the one canonical form used everywhere: pretty,
/// two-space indent, trailing newline. Re-serializing a parsed output file
/// through this function reproduces it exactly.
pub fn to_canonical_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

fn pair_columns() -> Vec<String> {
    let mut cols = Vec::new();
    for (n, m) in PAIRS {
        for field in ["b", "z", "bound", "violated"] {
            cols.push(format!("{field}{n}{m}"));
        }
    }
    cols
}

/// CSV table of a sharpness sweep: one row per grid point.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("g");
    for col in pair_columns() {
        out.push(',');
        out.push_str(&col);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format_sig12(row.g));
        for pair in &row.pairs {
            out.push(',');
            out.push_str(&format_sig12(pair.b));
            out.push(',');
            out.push_str(&format_sig12(pair.z));
            out.push(',');
            out.push_str(&format_sig12(pair.bound));
            out.push(',');
            out.push_str(if pair.violated { "true" } else { "false" });
        }
        out.push('\n');
    }
    out
}

fn sweep_row_json(row: &SweepRow) -> Value {
    let mut map = Map::new();
    map.insert("g".into(), num(row.g));
    for pair in &row.pairs {
        let suffix = format!("{}{}", pair.n, pair.m);
        map.insert(format!("b{suffix}"), num(pair.b));
        map.insert(format!("z{suffix}"), num(pair.z));
        map.insert(format!("bound{suffix}"), num(pair.bound));
        map.insert(format!("violated{suffix}"), json!(pair.violated));
    }
    Value::Object(map)
}

pub fn sweep_json(config: Value, rows: &[SweepRow]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "config": config,
        "rows": rows.iter().map(sweep_row_json).collect::<Vec<_>>(),
    })
}

fn onset_mode_name(mode: crate::sweep::OnsetMode) -> &'static str {
    match mode {
        crate::sweep::OnsetMode::Computed => "computed",
        crate::sweep::OnsetMode::Dial => "dial",
    }
}

/// CSV for threshold scans; empty onset cells mean no simultaneous violation.
pub fn thresholds_csv(results: &[ThresholdResult]) -> String {
    let mut out = String::from("theta,pointer,mode,z_onset,g_lo,g_hi,n_windows\n");
    for r in results {
        out.push_str(&format_sig12(r.theta));
        out.push(',');
        out.push_str(&r.pointer.to_string());
        out.push(',');
        out.push_str(onset_mode_name(r.mode));
        out.push(',');
        if let Some(z) = r.z_onset {
            out.push_str(&format_sig12(z));
        }
        out.push(',');
        if let Some(w) = r.g_window.first() {
            out.push_str(&format_sig12(w[0]));
            out.push(',');
            out.push_str(&format_sig12(w[1]));
        } else {
            out.push(',');
        }
        out.push(',');
        out.push_str(&r.g_window.len().to_string());
        out.push('\n');
    }
    out
}

pub fn thresholds_json(config: Value, results: &[ThresholdResult]) -> Value {
    let rows: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "theta": num(r.theta),
                "pointer": r.pointer.to_string(),
                "mode": onset_mode_name(r.mode),
                "z_onset": r.z_onset.map(num).unwrap_or(Value::Null),
                "g_window": r
                    .g_window
                    .iter()
                    .map(|w| json!([num(w[0]), num(w[1])]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "thresholds",
        "config": config,
        "rows": rows,
    })
}

pub fn visibility_csv(
    theta: f64,
    z: Option<f64>,
    pointer: &str,
    mode: &str,
    v: Option<f64>,
) -> String {
    let mut out = String::from("theta,z,pointer,mode,v\n");
    out.push_str(&format_sig12(theta));
    out.push(',');
    if let Some(z) = z {
        out.push_str(&format_sig12(z));
    }
    out.push(',');
    out.push_str(pointer);
    out.push(',');
    out.push_str(mode);
    out.push(',');
    if let Some(v) = v {
        out.push_str(&format_sig12(v));
    }
    out.push('\n');
    out
}

pub fn visibility_json(
    config: Value,
    theta: f64,
    z: Option<f64>,
    pointer: &str,
    mode: &str,
    v: Option<f64>,
) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "visibility",
        "config": config,
        "theta": num(theta),
        "z": z.map(num).unwrap_or(Value::Null),
        "pointer": pointer,
        "mode": mode,
        "v": v.map(num).unwrap_or(Value::Null),
    })
}

/// CSV dump of the full tensor: settings and the joint outcome are 1-based
/// columns, outcome bits stay 0/1.
pub fn distribution_csv(tensor: &CorrelationTensor) -> String {
    let mut out = String::from("x1,x2,z1,z2,b,a1,a2,c1,c2,p\n");
    for x1 in 0..3 {
        for x2 in 0..3 {
            for z1 in 0..3 {
                for z2 in 0..3 {
                    for b in 0..4 {
                        for a1 in 0..2 {
                            for a2 in 0..2 {
                                for c1 in 0..2 {
                                    for c2 in 0..2 {
                                        out.push_str(&format!(
                                            "{},{},{},{},{},{},{},{},{},{}\n",
                                            x1 + 1,
                                            x2 + 1,
                                            z1 + 1,
                                            z2 + 1,
                                            b + 1,
                                            a1,
                                            a2,
                                            c1,
                                            c2,
                                            format_sig12(
                                                tensor.prob(x1, x2, z1, z2, a1, a2, c1, c2, b)
                                            )
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn distribution_json(config: Value, tensor: &CorrelationTensor) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "distribution",
        "config": config,
        "index_order": "(x1, x2, z1, z2, a1, a2, c1, c2, b) with b fastest; 0-based",
        "values": tensor.values().iter().map(|&p| num(p)).collect::<Vec<_>>(),
    })
}

/// CSV dump of the joint-measurement basis: tetrahedron data, state
/// amplitudes and concurrence per outcome.
pub fn ejm_csv(basis: &EjmBasis) -> String {
    let mut out = String::from("b,mx,my,mz,eta,phi,re0,im0,re1,im1,re2,im2,re3,im3,concurrence\n");
    for b in 0..4 {
        let m = basis.m_vectors[b];
        let (eta, phi) = basis.eta_phi[b];
        out.push_str(&format!("{},{},{},{}", b + 1, m[0], m[1], m[2]));
        out.push(',');
        out.push_str(&format_sig12(eta));
        out.push(',');
        out.push_str(&format_sig12(phi));
        for k in 0..4 {
            out.push(',');
            out.push_str(&format_sig12(basis.states[b][k].re));
            out.push(',');
            out.push_str(&format_sig12(basis.states[b][k].im));
        }
        out.push(',');
        out.push_str(&format_sig12(basis.concurrence(b)));
        out.push('\n');
    }
    out
}

pub fn ejm_json(basis: &EjmBasis) -> Value {
    let states: Vec<Value> = (0..4)
        .map(|b| {
            json!({
                "b": b + 1,
                "m": basis.m_vectors[b],
                "eta": num(basis.eta_phi[b].0),
                "phi": num(basis.eta_phi[b].1),
                "amplitudes": basis.states[b]
                    .iter()
                    .map(|c| json!([num(c.re), num(c.im)]))
                    .collect::<Vec<_>>(),
                "concurrence": num(basis.concurrence(b)),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "ejm_info",
        "theta": num(basis.theta),
        "states": states,
        "gram_deviation": num(basis.gram_deviation()),
        "completeness_deviation": num(basis.completeness_deviation()),
    })
}

/// Manifest sidecar: the resolved configuration plus checksums of every
/// written file. Re-running the recorded command reproduces the checksums.
pub fn manifest(command: &str, config: Value, outputs: &[(String, &str)]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "outputs": outputs
            .iter()
            .map(|(path, content)| {
                json!({
                    "path": path,
                    "bytes": content.len(),
                    "sha256": sha256_hex(content.as_bytes()),
                })
            })
            .collect::<Vec<_>>(),
    })
}
