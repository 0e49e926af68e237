//! Input files for `build`.

use qns::io::{ChannelFile, StochasticFile, TraceRepFile};
use qns::{Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalComponent {
    pub weight: f64,
    /// Channels `x2→x1`, `y2→y1`, `a1→a2`, `b1→b2`.
    pub channels: [ChannelFile; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalSpec {
    pub components: Vec<LocalComponent>,
}

/// Two strongly stochastic matrices and a unit vector on their ancillas.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantumSpec {
    pub m: StochasticFile,
    pub n: StochasticFile,
    pub xi: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QcSpec {
    pub ex: StochasticFile,
    pub ey: StochasticFile,
    pub fa: StochasticFile,
    pub fb: StochasticFile,
    pub xi: Vec<[f64; 2]>,
    /// Place each matrix on its own tensor factor instead of requiring
    /// the four to commute on a shared space.
    #[serde(default)]
    pub embed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JointlyTracialSpec {
    pub rep_x: TraceRepFile,
    pub rep_a: TraceRepFile,
}

pub fn vector(entries: &[[f64; 2]]) -> Result<nalgebra::DVector<C64>> {
    if entries.is_empty() {
        return Err(Error::Format("empty vector".into()));
    }
    Ok(nalgebra::DVector::from_iterator(entries.len(), entries.iter().map(|[re, im]| C64::new(*re, *im))))
}

pub fn pairs(v: &nalgebra::DVector<C64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
