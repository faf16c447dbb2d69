use serde::{Deserialize, Serialize};

use super::metrics::{aggregate, DofLabel};
use crate::error::{Error, Result};
use crate::solver::SolveMode;

pub const REPORT_FORMAT: &str = "limbgo-study-report";
pub const REPORT_VERSION: u32 = 1;
pub const SD_CONVENTION: &str = "sample (n-1)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRms {
    pub trial: u64,
    pub rms: f64,
}

/// Cross-trial statistics of one DOF in one mode. Angles in rad, lengths in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofSummary {
    pub dof: DofLabel,
    pub mode: SolveMode,
    pub unit: String,
    pub per_trial: Vec<TrialRms>,
    pub mean: f64,
    pub sd: Option<f64>,
}

impl DofSummary {
    pub fn values(&self) -> Vec<f64> {
        self.per_trial.iter().map(|t| t.rms).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverSummary {
    pub go_frames: usize,
    pub unconverged_frames: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintSummary {
    /// GO frames checked against the joint constraints.
    pub go_frames_checked: usize,
    pub go_frames_violating: usize,
    pub max_normalized_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub trial: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub format: String,
    pub version: u32,
    /// SHA-256 of the canonical study configuration (output section excluded).
    pub config_hash: String,
    pub movement: String,
    pub master_seed: u64,
    pub n_trials: usize,
    pub trial_seeds: Vec<u64>,
    pub measurement_noise: bool,
    pub artefacts: bool,
    pub sd_convention: String,
    pub angle_unit: String,
    pub length_unit: String,
    pub solver: SolverSummary,
    pub constraints: ConstraintSummary,
    /// Trials excluded from every aggregate.
    pub failed_trials: Vec<FailedTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub metadata: ReportMetadata,
    /// DOF-major, GO before segmental.
    pub dofs: Vec<DofSummary>,
}

/// One per-trial RMS value, the long-form unit of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsRecord {
    pub trial: u64,
    pub dof: DofLabel,
    pub mode: SolveMode,
    pub rms: f64,
}

impl StudyReport {
    /// Groups long-form records by (DOF, mode) and aggregates each group.
    pub fn assemble(metadata: ReportMetadata, records: &[RmsRecord]) -> Result<Self> {
        let mut dofs = Vec::new();
        for dof in DofLabel::all() {
            for mode in SolveMode::ALL {
                let mut per_trial: Vec<TrialRms> = records
                    .iter()
                    .filter(|r| r.dof == dof && r.mode == mode)
                    .map(|r| TrialRms { trial: r.trial, rms: r.rms })
                    .collect();
                if per_trial.is_empty() {
                    continue;
                }
                per_trial.sort_by_key(|t| t.trial);
                let agg = aggregate(&per_trial.iter().map(|t| t.rms).collect::<Vec<_>>())?;
                dofs.push(DofSummary {
                    dof,
                    mode,
                    unit: if dof.is_angle() { "rad" } else { "mm" }.into(),
                    per_trial,
                    mean: agg.mean,
                    sd: agg.sd,
                });
            }
        }
        if dofs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(StudyReport { metadata, dofs })
    }

    pub fn get(&self, dof: DofLabel, mode: SolveMode) -> Option<&DofSummary> {
        self.dofs.iter().find(|d| d.dof == dof && d.mode == mode)
    }

    pub fn records(&self) -> Vec<RmsRecord> {
        self.dofs
            .iter()
            .flat_map(|d| {
                d.per_trial.iter().map(move |t| RmsRecord {
                    trial: t.trial,
                    dof: d.dof,
                    mode: d.mode,
                    rms: t.rms,
                })
            })
            .collect()
    }
}
