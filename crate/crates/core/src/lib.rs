//! Simulation and exact-inference toolkit for non-adaptive group testing.
//!
//! A [`design::PoolingDesign`] assigns individuals to tests, the OR channel in
//! [`model`] turns an infection vector into test outcomes, and the
//! [`decoders`] recover the infected set from those outcomes. [`theory`]
//! evaluates the information-theoretic and algorithmic thresholds, and
//! [`harness`] runs seeded, reproducible Monte-Carlo experiments.
//!
//! ```
//! use grouptest::decoders::{decode_dd, decode_exact, ExactOptions, ExactStatus};
//! use grouptest::instance::fig1;
//!
//! let inst = fig1();
//! let dd = decode_dd(&inst.design, &inst.outcomes).unwrap();
//! assert_eq!(dd.weight(), 0);
//!
//! let exact = decode_exact(&inst.design, &inst.outcomes, ExactOptions::weight_k(2)).unwrap();
//! assert_eq!(exact.status, ExactStatus::AmbiguousK);
//! assert_eq!(exact.z_k, Some(3));
//! ```

pub mod decoders;
pub mod design;
pub mod error;
pub mod harness;
pub mod instance;
pub mod model;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/designs.md")]
    mod designs {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::design::PoolingDesign;
    use crate::model::{InfectionVector, OutcomeVector};

    pub fn fig1() -> PoolingDesign {
        crate::instance::fig1().design
    }

    pub fn fig1_outcomes() -> OutcomeVector {
        crate::instance::fig1().outcomes
    }

    pub fn fig1_sigma() -> InfectionVector {
        crate::instance::fig1().sigma
    }
}
