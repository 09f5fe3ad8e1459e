//! Check reports and their JSON and text renderings.
//!
//! The JSON form is one object with keys in a fixed order and floats
//! printed with 17 significant digits, so identical runs give identical
//! bytes. Non-finite numbers are written as `null`.
//!
//! ```text
//! {
//!   "schema": 1,
//!   "tool": "rsep 0.1.0",
//!   "command": "verify",
//!   "target": "catalog:spherical",
//!   "input_sha256": "…",
//!   "seed": 42,
//!   "jet_order": 3,
//!   "checks": [{"name", "max_residual", "max_raw", "tolerance",
//!               "samples", "seed", "pass", "at", "note"}, …],
//!   "solve_q": null | {"coefficients", "nullspace_dim", "nullspace",
//!                      "constants", "residual", "points", "sufficient"},
//!   "verdict": "…",
//!   "pass": true
//! }
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::separation::QSolution;
use crate::tolerance::Extremum;

pub const SCHEMA: u32 = 1;

/// One named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Largest relative residual.
    pub max_residual: f64,
    pub max_raw: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub pass: bool,
    /// Point of the largest relative residual.
    pub at: Vec<f64>,
    pub note: Option<String>,
}

impl CheckRecord {
    /// Passes when the relative residual is within `tolerance`.
    pub fn from_extremum(name: &str, e: &Extremum, tolerance: f64, seed: u64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            max_residual: e.max_relative,
            max_raw: e.max_raw,
            tolerance,
            samples: e.samples,
            seed,
            pass: e.passes(tolerance),
            at: e.at.clone(),
            note: None,
        }
    }

    /// Passes when the relative residual exceeds `threshold`.
    pub fn expect_failure(name: &str, e: &Extremum, threshold: f64, seed: u64) -> CheckRecord {
        let mut c = CheckRecord::from_extremum(name, e, threshold, seed);
        c.pass = e.samples > 0 && e.max_relative > threshold;
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckRecord {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub coefficients: Vec<f64>,
    pub nullspace: Vec<Vec<f64>>,
    /// Names given to the nullspace directions, `c1`, `c2`, ….
    pub constants: Vec<String>,
    pub residual: f64,
    pub points: usize,
    pub sufficient: bool,
}

impl SolveRecord {
    pub fn new(sol: &QSolution, tol: f64) -> SolveRecord {
        SolveRecord {
            coefficients: sol.particular.clone(),
            nullspace: sol.nullspace.clone(),
            constants: (1..=sol.nullspace.len()).map(|k| format!("c{k}")).collect(),
            residual: sol.residual,
            points: sol.points,
            sufficient: sol.sufficient(tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub target: String,
    pub input_sha256: String,
    pub seed: u64,
    pub jet_order: usize,
    pub checks: Vec<CheckRecord>,
    pub solve_q: Option<SolveRecord>,
    pub verdict: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn tool() -> String {
    format!("rsep {}", env!("CARGO_PKG_VERSION"))
}

impl Report {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass) && self.solve_q.as_ref().is_none_or(|s| s.sufficient)
    }

    pub fn to_json(&self) -> String {
        let mut o = String::new();
        o.push_str("{\n");
        let _ = writeln!(o, "  \"schema\": {SCHEMA},");
        let _ = writeln!(o, "  \"tool\": {},", string(&tool()));
        let _ = writeln!(o, "  \"command\": {},", string(&self.command));
        let _ = writeln!(o, "  \"target\": {},", string(&self.target));
        let _ = writeln!(o, "  \"input_sha256\": {},", string(&self.input_sha256));
        let _ = writeln!(o, "  \"seed\": {},", self.seed);
        let _ = writeln!(o, "  \"jet_order\": {},", self.jet_order);
        o.push_str("  \"checks\": [");
        for (k, c) in self.checks.iter().enumerate() {
            o.push_str(if k == 0 { "\n" } else { ",\n" });
            let _ = write!(
                o,
                "    {{\"name\": {}, \"max_residual\": {}, \"max_raw\": {}, \"tolerance\": {}, \"samples\": {}, \
                 \"seed\": {}, \"pass\": {}, \"at\": {}, \"note\": {}}}",
                string(&c.name),
                number(c.max_residual),
                number(c.max_raw),
                number(c.tolerance),
                c.samples,
                c.seed,
                c.pass,
                numbers(&c.at),
                c.note.as_deref().map_or("null".to_string(), string),
            );
        }
        o.push_str(if self.checks.is_empty() { "],\n" } else { "\n  ],\n" });
        match &self.solve_q {
            None => o.push_str("  \"solve_q\": null,\n"),
            Some(s) => {
                let null: Vec<String> = s.nullspace.iter().map(|v| numbers(v)).collect();
                let names: Vec<String> = s.constants.iter().map(|c| string(c)).collect();
                let _ = writeln!(
                    o,
                    "  \"solve_q\": {{\"coefficients\": {}, \"nullspace_dim\": {}, \"nullspace\": [{}], \
                     \"constants\": [{}], \"residual\": {}, \"points\": {}, \"sufficient\": {}}},",
                    numbers(&s.coefficients),
                    s.nullspace.len(),
                    null.join(", "),
                    names.join(", "),
                    number(s.residual),
                    s.points,
                    s.sufficient,
                );
            }
        }
        let _ = writeln!(o, "  \"verdict\": {},", string(&self.verdict));
        let _ = writeln!(o, "  \"pass\": {}", self.pass());
        o.push_str("}\n");
        o
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "{} {} {}", tool(), self.command, self.target);
        let _ = writeln!(o, "input sha256 {}  seed {}  jet order {}", self.input_sha256, self.seed, self.jet_order);
        for c in &self.checks {
            let _ = write!(
                o,
                "{:<4} {:<28} {:.3e} (raw {:.3e}, tol {:.1e}, {} samples)",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.max_raw,
                c.tolerance,
                c.samples
            );
            if !c.at.is_empty() {
                let at: Vec<String> = c.at.iter().map(|x| format!("{x:.6}")).collect();
                let _ = write!(o, " at ({})", at.join(", "));
            }
            if let Some(n) = &c.note {
                let _ = write!(o, "  {n}");
            }
            o.push('\n');
        }
        if let Some(s) = &self.solve_q {
            let _ = writeln!(
                o,
                "solve-q: residual {:.3e} on {} points, nullspace dimension {}{}",
                s.residual,
                s.points,
                s.nullspace.len(),
                if s.sufficient { "" } else { " (ansatz insufficient)" }
            );
            let cs: Vec<String> = s.coefficients.iter().map(|x| format!("{x:.10}")).collect();
            let _ = writeln!(o, "  particular [{}]", cs.join(", "));
            for (name, v) in s.constants.iter().zip(&s.nullspace) {
                let vs: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
                let _ = writeln!(o, "  {name} [{}]", vs.join(", "));
            }
        }
        let _ = writeln!(o, "verdict: {} ({})", self.verdict, if self.pass() { "pass" } else { "fail" });
        o
    }
}

fn number(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

fn numbers(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| number(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn string(s: &str) -> String {
    let mut o = String::with_capacity(s.len() + 2);
    o.push('"');
    for ch in s.chars() {
        match ch {
            '"' => o.push_str("\\\""),
            '\\' => o.push_str("\\\\"),
            '\n' => o.push_str("\\n"),
            '\r' => o.push_str("\\r"),
            '\t' => o.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(o, "\\u{:04x}", c as u32);
            }
            c => o.push(c),
        }
    }
    o.push('"');
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            command: "verify".into(),
            target: "file:a \"b\".toml".into(),
            input_sha256: digest(b"abc"),
            seed: 42,
            jet_order: 3,
            checks: vec![CheckRecord {
                name: "first-condition".into(),
                max_residual: 0.1,
                max_raw: f64::NAN,
                tolerance: 1e-8,
                samples: 3,
                seed: 42,
                pass: false,
                at: vec![1.0, -0.0],
                note: None,
            }],
            solve_q: None,
            verdict: "failed".into(),
        }
    }

    #[test]
    fn sha256_of_abc() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn json_round_digits_and_escapes() {
        let j = sample().to_json();
        assert!(j.contains("\"max_residual\": 1.0000000000000001e-1"));
        assert!(j.contains("\"max_raw\": null"));
        assert!(j.contains("file:a \\\"b\\\".toml"));
        assert!(j.contains("\"pass\": false\n}"));
        assert_eq!(j, sample().to_json());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5e-17] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_report_fails() {
        let mut r = sample();
        r.checks.clear();
        assert!(!r.pass());
        assert!(r.to_json().contains("\"checks\": [],"));
    }
}
