use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    /// What the check measures.
    pub invariant: String,
    /// Worst residual over the samples; `null` in JSON when not finite.
    pub residual: f64,
    /// Effective tolerance, already multiplied by the tolerance scale.
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub tol_scale: f64,
    pub checks: Vec<CheckRecord>,
    pub passed: usize,
    pub failed: usize,
    pub wall_time_s: f64,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check.
    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "invariant", "residual", "tolerance", "pass", "samples", "error"])
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for c in &self.checks {
            w.write_record([
                c.id.clone(),
                c.invariant.clone(),
                format!("{:e}", c.residual),
                format!("{:e}", c.tolerance),
                c.pass.to_string(),
                c.samples.to_string(),
                c.error.clone().unwrap_or_default(),
            ])
            .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Human-readable lines for stdout.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "ok  " } else { "FAIL" };
            out.push_str(&format!(
                "{verdict} {:<34} {:>10.3e} ≤ {:<9.1e} ({} samples)",
                c.id, c.residual, c.tolerance, c.samples
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!("  error: {e}"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} passed, {} failed, seed {}, {:.2}s\n",
            self.suite, self.passed, self.failed, self.seed, self.wall_time_s
        ));
        out
    }
}
