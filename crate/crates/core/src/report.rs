//! Trajectory CSV files, flat-key JSON reports, and run manifests.
//!
//! Floats are printed with 17 significant digits so that every value
//! round-trips exactly; CSV columns follow a fixed order
//! (`t, x…, v…, mult…, res…, detW, detG, monitors…`) to keep artifacts
//! diff-able across runs.

use std::collections::BTreeMap;

use crate::dynamics::Formulation;
use crate::integrate::{IntegratorConfig, Trajectory};
use crate::model::{DynState, MechModel};

/// 17 significant digits: exact f64 round-trip.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{:.16e}", v)
    }
}

/// FNV-1a 64-bit content hash, printed as 16 hex digits.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{:016x}", h)
}

// ---------------------------------------------------------------------------
// JSON (flat key paths)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum JsonValue {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
}

impl From<f64> for JsonValue {
    fn from(v: f64) -> Self {
        JsonValue::Num(v)
    }
}

impl From<&str> for JsonValue {
    fn from(v: &str) -> Self {
        JsonValue::Str(v.to_string())
    }
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Serialize ordered `(key, value)` pairs as one flat JSON object.
pub fn flat_json(entries: &[(String, JsonValue)]) -> String {
    let mut out = String::from("{\n");
    for (i, (k, v)) in entries.iter().enumerate() {
        out.push_str(&format!("  \"{}\": ", escape_json(k)));
        match v {
            JsonValue::Num(x) => {
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x))
                } else {
                    // JSON has no NaN/inf literals
                    out.push_str(&format!("\"{}\"", fmt_f64(*x)))
                }
            }
            JsonValue::Int(x) => out.push_str(&x.to_string()),
            JsonValue::Str(s) => out.push_str(&format!("\"{}\"", escape_json(s))),
            JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        }
        if i + 1 < entries.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Fixed-order trajectory CSV with a header row.
pub fn trajectory_csv(model: &MechModel, traj: &Trajectory, monitor_names: &[String]) -> String {
    let m = model.m();
    let mut header: Vec<String> = vec!["t".to_string()];
    header.extend(model.coords.iter().cloned());
    header.extend(model.coords.iter().map(|c| format!("d{}", c)));
    for i in 1..=m {
        header.push(format!("mult_{}", i));
    }
    for i in 1..=m {
        header.push(format!("res_{}", i));
    }
    header.push("detW".to_string());
    header.push("detG".to_string());
    header.extend(monitor_names.iter().cloned());
    let mut out = header.join(",");
    out.push('\n');
    for s in &traj.samples {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(fmt_f64(s.t));
        row.extend(s.x.iter().map(|v| fmt_f64(*v)));
        row.extend(s.v.iter().map(|v| fmt_f64(*v)));
        for i in 0..m {
            row.push(fmt_f64(s.mult.get(i).copied().unwrap_or(f64::NAN)));
        }
        for i in 0..m {
            row.push(fmt_f64(s.residuals.get(i).copied().unwrap_or(f64::NAN)));
        }
        row.push(fmt_f64(s.det_w));
        row.push(fmt_f64(s.det_g));
        row.extend(s.monitors.iter().map(|v| fmt_f64(*v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// Everything needed to reproduce a `run` invocation, paired 1:1 with its
/// trajectory CSV.
pub struct RunManifest<'a> {
    pub model: &'a MechModel,
    pub model_source: String,
    pub model_hash: String,
    pub formulation: Formulation,
    pub cfg: &'a IntegratorConfig,
    pub init: &'a DynState,
    pub params: BTreeMap<String, f64>,
    pub traj: &'a Trajectory,
    pub monitor_drifts: Vec<(String, f64)>,
}

impl RunManifest<'_> {
    pub fn to_json(&self) -> String {
        let mut e: Vec<(String, JsonValue)> = vec![
            ("model.name".into(), self.model.spec.name.as_str().into()),
            ("model.source".into(), self.model_source.as_str().into()),
            ("model.hash".into(), self.model_hash.as_str().into()),
            ("formulation".into(), self.formulation.id().into()),
            ("code.version".into(), env!("CARGO_PKG_VERSION").into()),
            ("config.dt".into(), self.cfg.dt.into()),
            ("config.t_end".into(), self.cfg.t_end.into()),
            ("config.project".into(), JsonValue::Bool(self.cfg.project)),
            ("config.projection_tol".into(), self.cfg.projection_tol.into()),
            ("config.admission_tol".into(), self.cfg.solver.admission_tol.into()),
            ("config.singular_threshold".into(), self.cfg.solver.singular_base.into()),
        ];
        for (k, v) in &self.params {
            e.push((format!("params.{}", k), (*v).into()));
        }
        e.push(("init.t".into(), self.init.t.into()));
        for (i, c) in self.model.coords.iter().enumerate() {
            e.push((format!("init.x.{}", c), self.init.x[i].into()));
        }
        for (i, c) in self.model.coords.iter().enumerate() {
            e.push((format!("init.v.d{}", c), self.init.v[i].into()));
        }
        for (i, l) in self.init.lambda.iter().enumerate() {
            e.push((format!("init.lambda.{}", i + 1), (*l).into()));
        }
        e.push(("summary.samples".into(), JsonValue::Int(self.traj.samples.len() as i64)));
        e.push(("summary.truncated".into(), JsonValue::Bool(self.traj.truncated)));
        let max_res = self
            .traj
            .samples
            .iter()
            .flat_map(|s| s.residuals.iter())
            .fold(0.0_f64, |a, r| a.max(r.abs()));
        e.push(("summary.max_residual".into(), max_res.into()));
        let min_detw = self
            .traj
            .samples
            .iter()
            .map(|s| s.det_w.abs())
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        e.push((
            "summary.min_abs_detw".into(),
            if min_detw.is_finite() { min_detw.into() } else { JsonValue::Num(f64::NAN) },
        ));
        for (name, drift) in &self.monitor_drifts {
            e.push((format!("summary.monitor_drift.{}", name), (*drift).into()));
        }
        e.push(("events.count".into(), JsonValue::Int(self.traj.events.len() as i64)));
        for (i, ev) in self.traj.events.iter().enumerate() {
            e.push((format!("events.{}.t", i), ev.t.into()));
            e.push((format!("events.{}.kind", i), ev.kind.id().into()));
            e.push((format!("events.{}.detail", i), ev.detail.as_str().into()));
        }
        flat_json(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn float_format_round_trips() {
        for v in
            [0.0, 1.0, -1.5, 9.8, 1.0 / 3.0, 6.283185307179586, 1e-300, -2.2250738585072014e-308]
        {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{} -> {}", v, s);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = content_hash(b"model skate");
        let b = content_hash(b"model skate");
        let c = content_hash(b"model skates");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn flat_json_is_parseable_shape() {
        let entries = vec![
            ("a.b".to_string(), JsonValue::Num(1.5)),
            ("a.c".to_string(), JsonValue::Str("x\"y".to_string())),
            ("d".to_string(), JsonValue::Bool(true)),
            ("n".to_string(), JsonValue::Int(42)),
        ];
        let s = flat_json(&entries);
        assert!(s.starts_with("{\n"));
        assert!(s.ends_with("}\n"));
        assert!(s.contains("\"a.b\": 1.5000000000000000e0"));
        assert!(s.contains("\\\""));
        assert!(s.contains("\"d\": true"));
    }
}
