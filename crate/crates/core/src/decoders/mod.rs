//! Inference algorithms.
//!
//! [`decode_comp`], [`decode_dd`] and [`decode_scomp`] are the classical
//! polynomial-time decoders. [`decode_exact`] solves the hypergraph vertex
//! cover formulation by branch and bound, and [`enumerate_satisfying`]
//! counts every consistent weight-`k` configuration by overlap.

mod comp;
mod dd;
mod exact;

pub(crate) use exact::binomial;

use serde::{Deserialize, Serialize};

pub use comp::decode_comp;
pub use dd::{decode_dd, decode_scomp, ScompOptions, ScompScore, TieRule};
pub use exact::{
    candidate_hypergraph, decode_exact, enumerate_satisfying, CandidateHypergraph, ExactMode, ExactOptions,
    ExactResult, ExactStatus, OverlapSpectrum, DEFAULT_ENUMERATION_CAP,
};

use crate::design::PoolingDesign;
use crate::model::{encode_bits, OutcomeVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Comp,
    Dd,
    Scomp,
    Exact,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Comp => "comp",
            DecoderKind::Dd => "dd",
            DecoderKind::Scomp => "scomp",
            DecoderKind::Exact => "exact",
        }
    }
}

/// Why a decoder settled on an individual's status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageLabel {
    /// Member of a negative test.
    DefiniteHealthy,
    /// Sole undetermined participant of a positive test.
    DefiniteInfected,
    /// Picked by the greedy cover step.
    GreedyInfected,
    /// Never in a negative test; COMP declares it infected.
    PossiblyInfected,
    /// Left over after all forced and greedy steps.
    DefaultHealthy,
}

/// A decoder's estimate of the infection vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    pub decoder: DecoderKind,
    #[serde(with = "bit_list")]
    pub bits: Vec<bool>,
    #[serde(rename = "labels")]
    pub stage_labels: Vec<StageLabel>,
    #[serde(rename = "consistent")]
    pub consistent_with_outcomes: bool,
}

impl Estimate {
    pub(crate) fn new(
        decoder: DecoderKind,
        bits: Vec<bool>,
        stage_labels: Vec<StageLabel>,
        design: &PoolingDesign,
        outcomes: &OutcomeVector,
    ) -> Self {
        let consistent_with_outcomes = encode_bits(design, &bits) == *outcomes;
        Self { decoder, bits, stage_labels, consistent_with_outcomes }
    }

    /// Indices estimated infected, ascending.
    pub fn infected(&self) -> Vec<usize> {
        crate::model::indices(&self.bits)
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `(false positives, false negatives)` against the truth.
    pub fn errors(&self, truth: &[bool]) -> (usize, usize) {
        self.bits.iter().zip(truth).fold((0, 0), |(fp, fneg), (&e, &t)| {
            (fp + (e && !t) as usize, fneg + (!e && t) as usize)
        })
    }
}

mod bit_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        bits.iter().map(|&b| b as u8).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("bit must be 0 or 1, got {other}"))),
            })
            .collect()
    }
}
