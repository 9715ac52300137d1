//! Data-file rendering: the sweep CSV schema and the flat key=value
//! report. Reals are printed with 17 significant digits so emitted
//! values round-trip through f64 exactly; newlines are Unix.

use unsharp_core::SweepPoint;

pub const SWEEP_CSV_HEADER: &str =
    "grid_value,mean_fidelity,stderr_fidelity,mean_count,stderr_count,n_traj,seed";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            real(p.grid_value),
            real(p.mean_fidelity),
            real(p.stderr_fidelity),
            real(p.mean_count),
            real(p.stderr_count),
            p.n_traj,
            p.seed,
        ));
    }
    out
}

/// Flatten a JSON tree into sorted `section.key=value` lines. Numbers
/// are reprinted at full precision; nested objects extend the dotted
/// path.
pub fn flat_report(value: &serde_json::Value) -> String {
    let mut lines = Vec::new();
    flatten("", value, &mut lines);
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn flatten(prefix: &str, value: &serde_json::Value, lines: &mut Vec<String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, sub) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, sub, lines);
            }
        }
        serde_json::Value::Number(n) => {
            // integers print plain; only genuine reals get e-notation
            let rendered = if n.is_f64() {
                real(n.as_f64().unwrap())
            } else {
                n.to_string()
            };
            lines.push(format!("{prefix}={rendered}"));
        }
        other => lines.push(format!("{prefix}={other}")),
    }
}
