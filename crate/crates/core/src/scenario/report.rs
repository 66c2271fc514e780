//! Check outcomes, JSON reports, and the canonical digest used for
//! determinism contracts (wall time excluded).

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Warn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub defect: f64,
    pub tol: f64,
    pub seconds: f64,
}

impl Check {
    /// Pass/fail from defect <= tol, timed from `started`.
    pub fn measured(name: impl Into<String>, defect: f64, tol: f64, started: Instant) -> Check {
        Check {
            name: name.into(),
            status: if defect <= tol {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            defect,
            tol,
            seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn with_status(
        name: impl Into<String>,
        status: CheckStatus,
        defect: f64,
        tol: f64,
        started: Instant,
    ) -> Check {
        Check {
            name: name.into(),
            status,
            defect,
            tol,
            seconds: started.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    /// Human-readable failure details; not part of the wire schema.
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        RunReport {
            scenario: scenario.into(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn merge(&mut self, other: RunReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    /// Deterministic emission order regardless of execution interleaving.
    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// The report with wall-clock fields stripped: the portion that must be
    /// bit-identical across runs for a fixed config and seed.
    pub fn canonical(&self) -> String {
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "status": c.status,
                    "defect": c.defect,
                    "tol": c.tol,
                })
            })
            .collect();
        let value = serde_json::json!({
            "scenario": self.scenario,
            "checks": checks,
        });
        let mut s = serde_json::to_string_pretty(&value).expect("canonical serializes");
        s.push('\n');
        s
    }

    pub fn canonical_digest(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
