use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpTrigger {
    Threshold,
    DtCollapse,
}

/// Linear extrapolation of `1/sup^(pq-1)` to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmaxEstimate {
    pub t_max: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    /// Range of the fitted values, for scale.
    pub range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpEvidence {
    pub t_cross: f64,
    pub trigger: BlowUpTrigger,
    pub threshold: f64,
    pub t_max_estimate: Option<TmaxEstimate>,
}

/// Classification of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RunVerdict {
    /// Small-data hypotheses hold and the run stayed under the barrier.
    GlobalCertified { eps1: f64, eps2: f64, margin: f64 },
    /// `pq <= 1`: global by theory, no barrier checked.
    GlobalHeuristic { pq: f64, horizon: f64 },
    BlowUp(BlowUpEvidence),
    Undecided { reason: String },
}

impl RunVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            RunVerdict::GlobalCertified { .. } => "GlobalCertified",
            RunVerdict::GlobalHeuristic { .. } => "GlobalHeuristic",
            RunVerdict::BlowUp(_) => "BlowUp",
            RunVerdict::Undecided { .. } => "Undecided",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, RunVerdict::BlowUp(_))
    }
}
