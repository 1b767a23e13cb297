//! Deterministic JSON and CSV output.
//!
//! Object keys are sorted and every float is printed with 17 significant
//! digits, so equal reports always serialize to identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{PipeError, Result};
use crate::grid::{ModeSet, RadialGrid};
use crate::mode_solver::ModeDiagnostics;
use crate::state::ForcingField;

/// Render a float with 17 significant digits; non-finite values become `null`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String((*key).clone()));
                write_value(out, &map[key.as_str()], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Serialize `report` in the canonical form.
pub fn to_canonical_json(report: &impl Serialize) -> Result<String> {
    let value = serde_json::to_value(report)?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn check_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(PipeError::MissingDirectory {
            dir: dir.to_path_buf(),
        }),
        _ => Ok(()),
    }
}

/// Write text to `path`; the parent directory must already exist.
pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    check_parent(path)?;
    fs::write(path, text).map_err(|source| PipeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_report(report: &impl Serialize, path: impl AsRef<Path>) -> Result<()> {
    write_text(&to_canonical_json(report)?, path)
}

/// One row per independent mode: `mode,xi,stream_residual,stream_condition,swirl_residual,swirl_condition`.
pub fn mode_diagnostics_csv(diags: &[(ModeDiagnostics, ModeDiagnostics)]) -> String {
    let mut s = String::from("mode,xi,stream_residual,stream_condition,swirl_residual,swirl_condition\n");
    for (m, (a, b)) in diags.iter().enumerate() {
        let _ = writeln!(
            s,
            "{m},{},{},{},{},{}",
            format_float(a.xi),
            format_float(a.residual),
            format_float(a.condition),
            format_float(b.residual),
            format_float(b.condition)
        );
    }
    s
}

const FORCING_HEADER: &str = "r,z,fr,ftheta,fz";

/// Nodal forcing table `r,z,fr,ftheta,fz`, radial index fastest.
pub fn forcing_csv(f: &ForcingField, grid: &RadialGrid, modes: &ModeSet) -> String {
    let mut s = format!("{FORCING_HEADER}\n");
    for (j, z) in modes.z_nodes().iter().enumerate() {
        for (i, r) in grid.nodes.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                format_float(*r),
                format_float(*z),
                format_float(f.fr[(i, j)]),
                format_float(f.ftheta[(i, j)]),
                format_float(f.fz[(i, j)])
            );
        }
    }
    s
}

/// Parse a table written by [`forcing_csv`]; its nodes must match the grid.
pub fn parse_forcing_csv(text: &str, grid: &RadialGrid, modes: &ModeSet) -> Result<ForcingField> {
    let bad = |msg: String| PipeError::Input(format!("forcing table: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(FORCING_HEADER) {
        return Err(bad(format!("header must be `{FORCING_HEADER}`")));
    }
    let z = modes.z_nodes();
    let (n_r, n_z) = (grid.len(), modes.len());
    let mut f = ForcingField::zeros(n_r, n_z);
    let mut count = 0;
    for (k, line) in lines.enumerate() {
        if k >= n_r * n_z {
            return Err(bad(format!("more than {} rows", n_r * n_z)));
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", k + 1)))?;
        if vals.len() != 5 {
            return Err(bad(format!("row {} has {} columns, expected 5", k + 1, vals.len())));
        }
        let (i, j) = (k % n_r, k / n_r);
        if (vals[0] - grid.nodes[i]).abs() > 1e-12 || (vals[1] - z[j]).abs() > 1e-12 {
            return Err(bad(format!(
                "row {} is at (r, z) = ({}, {}), grid node is ({}, {})",
                k + 1,
                vals[0],
                vals[1],
                grid.nodes[i],
                z[j]
            )));
        }
        f.fr[(i, j)] = vals[2];
        f.ftheta[(i, j)] = vals[3];
        f.fz[(i, j)] = vals[4];
        count += 1;
    }
    if count != n_r * n_z {
        return Err(bad(format!("{count} rows, expected {}", n_r * n_z)));
    }
    Ok(f)
}

pub fn read_forcing(path: impl AsRef<Path>, grid: &RadialGrid, modes: &ModeSet) -> Result<ForcingField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PipeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_forcing_csv(&text, grid, modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormReport;

    fn sample() -> NormReport {
        NormReport {
            l2r: 0.1,
            h1: 1.0 / 3.0,
            h2: 2.0f64.sqrt(),
            h_5_3: 1e-300,
            h_19_12: 12345.678901234567,
            hr3: std::f64::consts::PI,
        }
    }

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let text = to_canonical_json(&sample()).unwrap();
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .map(|l| l.split('"').next().unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(text.contains("\"l2r\": 1.0000000000000001e-1"), "{text}");
    }

    #[test]
    fn norm_report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("norms.json");
        write_report(&sample(), &path).unwrap();
        let back: NormReport = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn repeated_writes_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        write_report(&sample(), &a).unwrap();
        write_report(&sample(), &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn missing_directory_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope");
        let err = write_report(&sample(), missing.join("x.json")).unwrap_err();
        assert!(matches!(&err, PipeError::MissingDirectory { dir } if *dir == missing));
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn forcing_table_round_trip() {
        let g = RadialGrid::new(8).unwrap();
        let m = ModeSet::new(16, 4.0).unwrap();
        let f = ForcingField::from_fn(&g, &m, |r, z| (r * z, r.sin(), (1.0 - r * r) * (-z * z).exp()));
        let back = parse_forcing_csv(&forcing_csv(&f, &g, &m), &g, &m).unwrap();
        assert_eq!(back, f);
        let coarse = RadialGrid::new(10).unwrap();
        assert!(parse_forcing_csv(&forcing_csv(&f, &g, &m), &coarse, &m).is_err());
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(format_float(f64::NAN), "null");
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
    }
}
