//! JSON analysis reports with fixed float formatting.

use serde::{Serialize, Serializer};

use crate::engine::{AnalysisResult, Status};

/// A float written with 17 significant digits, so identical runs give
/// byte-identical reports. Non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed(pub f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let text = format!("{:.16e}", self.0);
        let n: serde_json::Number = text.parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

fn fixed(v: &[f64]) -> Vec<Fixed> {
    v.iter().copied().map(Fixed).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub provenance: String,
    /// `φ` at each sample of its level.
    pub sample_values: Vec<Fixed>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub constraint_count: usize,
    pub effective_rank: usize,
    pub sample_count: usize,
    pub constraints: Vec<ConstraintReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub status: String,
    /// Level of an inconsistency, 0-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconsistent_level: Option<usize>,
    pub state_names: Vec<String>,
    pub level_count: usize,
    pub constraint_count: usize,
    pub levels: Vec<LevelReport>,
    pub gauge_dimension: usize,
    pub multiplier_count: usize,
    pub final_samples: Vec<Vec<Fixed>>,
    pub warnings: Vec<String>,
    pub tol: Fixed,
    pub rank_tol: Fixed,
    pub rng_seed: u64,
}

pub fn status_name(status: &Status) -> &'static str {
    match status {
        Status::Solved => "solved",
        Status::Inconsistent { .. } => "inconsistent",
        Status::MaxIterations => "max_iterations",
        Status::RankDrift => "rank_drift",
    }
}

impl AnalysisReport {
    pub fn new(result: &AnalysisResult) -> Self {
        let levels: Vec<LevelReport> = result
            .levels
            .iter()
            .enumerate()
            .map(|(level, l)| LevelReport {
                level,
                constraint_count: l.constraints.len(),
                effective_rank: l.effective_rank,
                sample_count: l.samples.len(),
                constraints: l
                    .constraints
                    .iter()
                    .map(|c| ConstraintReport {
                        provenance: c.provenance.to_string(),
                        sample_values: l
                            .samples
                            .iter()
                            .map(|s| Fixed(c.value(s).unwrap_or(f64::NAN)))
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        AnalysisReport {
            status: status_name(&result.status).to_string(),
            inconsistent_level: match result.status {
                Status::Inconsistent { level } => Some(level),
                _ => None,
            },
            state_names: result.state_names.clone(),
            level_count: levels.len(),
            constraint_count: levels.iter().map(|l| l.constraint_count).sum(),
            levels,
            gauge_dimension: result.gauge_dimension,
            multiplier_count: result.multiplier_count,
            final_samples: result.final_samples.iter().map(|s| fixed(s)).collect(),
            warnings: result.warnings.clone(),
            tol: Fixed(result.options.tol),
            rank_tol: Fixed(result.options.rank_tol),
            rng_seed: result.options.rng_seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields always serialize")
    }
}
