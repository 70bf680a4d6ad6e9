//! Theorem-level property suite for an assembled kernel: mass, semigroup,
//! envelope bounds, regularity, PDE residual, contraction — reported as
//! fitted constants with refinement trends, never as comparisons to invented
//! ground truth.

mod checks;
mod tail;

pub use checks::{run_property_suite, VerifierInputs};
pub use tail::TailModel;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A fitted constant whose refinement trend is missing or unstable is
    /// never promoted to PASS.
    Inconclusive,
    Skipped,
}

/// Fitted-constant movement under grid doubling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementTrend {
    pub base: f64,
    pub refined: f64,
    /// |refined − base| / |base|.
    pub drift: f64,
    pub stable: bool,
}

/// One report row. `observed` is the decisive number compared against
/// `tolerance` (NaN when the check is purely constant-fitting).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    /// The property being measured, in plain words.
    pub statement: String,
    pub grid_note: String,
    pub fitted: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub observed: f64,
    pub verdict: Verdict,
    pub refinement: Vec<RefinementTrend>,
    pub notes: Vec<String>,
}

impl CheckEntry {
    pub fn new(id: &str, statement: &str, tolerance: f64) -> Self {
        CheckEntry {
            id: id.into(),
            statement: statement.into(),
            grid_note: String::new(),
            fitted: BTreeMap::new(),
            tolerance,
            observed: f64::NAN,
            verdict: Verdict::Skipped,
            refinement: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// The whole suite; reproducible bit-exact from (config, code version).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub config_hash: String,
    pub entries: Vec<CheckEntry>,
    pub all_pass: bool,
}

impl PropertyReport {
    pub fn all_pass(entries: &[CheckEntry]) -> bool {
        entries
            .iter()
            .all(|e| matches!(e.verdict, Verdict::Pass | Verdict::Skipped))
    }

    pub fn entry(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Human-readable fixed-width table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:>12} {:>12}  {:<12} notes\n",
            "check", "observed", "tolerance", "verdict"
        ));
        for e in &self.entries {
            out.push_str(&format!(
                "{:<28} {:>12.4e} {:>12.4e}  {:<12} {}\n",
                e.id,
                e.observed,
                e.tolerance,
                format!("{:?}", e.verdict),
                e.notes.join("; ")
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.all_pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}
