use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::drivers::{run_check, CheckOutcome};
use crate::spec::ReplicationSpec;
use crate::ExperimentError;

/// Overrides the directory reports are written to.
pub const OUT_DIR_ENV: &str = "SSLAB_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("sslab-out"), PathBuf::from)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub within_budget: bool,
    pub checks: Vec<CheckOutcome>,
}

impl ReplicationReport {
    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn markdown(&self) -> String {
        let mut s = format!("# {}: {}\n\n", self.id, self.title);
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "**{verdict}** in {:.2} s (budget {} s)\n", self.seconds, self.budget_seconds);
        for c in &self.checks {
            let v = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "## {} `{}`: {v} ({:.2} s)\n", c.name, c.kind, c.seconds);
            if !c.within_budget {
                let _ = writeln!(s, "Over its {:?} s budget.\n", c.budget_seconds);
            }
            s.push_str("| criterion | result | detail |\n|---|---|---|\n");
            for k in &c.criteria {
                let v = if k.pass { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "| {} | {v} | {} |", k.label, k.detail.replace('|', "\\|"));
            }
            s.push('\n');
        }
        s
    }
}

/// Runs every check of a spec in order.
pub fn replicate(spec: &ReplicationSpec) -> Result<ReplicationReport, ExperimentError> {
    let clock = Instant::now();
    let checks = spec.checks.iter().map(run_check).collect::<Result<Vec<_>, _>>()?;
    let seconds = clock.elapsed().as_secs_f64();
    let within_budget = seconds <= spec.budget_seconds;
    Ok(ReplicationReport {
        id: spec.id.clone(),
        title: spec.title.clone(),
        pass: within_budget && checks.iter().all(|c| c.pass),
        seconds,
        budget_seconds: spec.budget_seconds,
        within_budget,
        checks,
    })
}

/// Writes `<id>.json`, `<id>.md` and one CSV per sweep check; returns the paths written.
pub fn write_report(report: &ReplicationReport, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::context(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: &str| -> Result<(), ExperimentError> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| ExperimentError::context(path.display().to_string(), e))?;
        written.push(path);
        Ok(())
    };
    put(format!("{}.json", report.id), &serde_json::to_string_pretty(report)?)?;
    put(format!("{}.md", report.id), &report.markdown())?;
    for c in &report.checks {
        if let Some(csv) = &c.csv {
            put(format!("{}-{}.csv", report.id, c.name), csv)?;
        }
    }
    Ok(written)
}
