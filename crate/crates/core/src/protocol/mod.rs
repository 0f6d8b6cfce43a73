//! SETUP, COMMIT and REVEAL of the trusted-initializer commitment protocol.
//!
//! The global state is kept as a list of branches, one per commit message
//! `(a, b)`, each an unnormalized [`Ensemble`](crate::qudit::Ensemble) whose
//! trace is that message's probability. That is the orthogonal-tag
//! representation of the classical message register with the tags kept as
//! branch keys rather than tensored basis states.
//!
//! Register labels: `I` Alice's secret, `R` an optional reference sent to Bob
//! (superdense mode), `E`, `A`, `B`, `K` the commodity, `A'` Alice's private
//! output of a generic commit, and `C`, `S` after Bob's unmasking.

mod analysis;
mod correction;
mod engine;
mod montecarlo;
mod run;
mod strategy;
mod superdense;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use analysis::{
    bob_preview, cheat_analysis, closed_form_preview, delayed_teleport_oracle, post_commit_tamper, BobPreview,
    CheatAnalysis, OracleBranch, TamperOutcome,
};
pub use correction::{correction_convention, correction_self_test, CorrectionConvention};
pub use engine::{Access, Engine, Party, PartyView, Phase, Role};
pub use montecarlo::{monte_carlo, repetition_mode, MonteCarloEstimate, RepetitionEstimate};
pub use run::{
    exact_acceptance, run_commit, run_protocol, run_reveal, run_setup, tamper_phase, BranchRecord, ExactAcceptance,
    ProtocolTranscript, RevealBranch, RevealOutcome,
};
pub use strategy::{
    adversary_family, depolarizing, honest_instrument, mixed_instrument, permuted_instrument, random_channel,
    random_instrument, replace_with_zero, saturating_shift_strategy, shift_channel, AliceStrategy, Channel, Instrument,
    NamedStrategy,
};
pub use superdense::{superdense_commit, superdense_preview, SuperdenseTranscript};

pub const SECRET_IN: &str = "I";
pub const REFERENCE: &str = "R";
pub const ALICE_PRIVATE: &str = "A'";

/// The classical COMMIT message: a generalized Bell outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub a: usize,
    pub b: usize,
}

impl Commitment {
    pub fn from_index(p: usize, t: usize) -> Commitment {
        Commitment { a: t / p, b: t % p }
    }

    pub fn index(self, p: usize) -> usize {
        self.a * p + self.b
    }

    pub fn all(p: usize) -> impl Iterator<Item = Commitment> {
        (0..p * p).map(move |t| Commitment::from_index(p, t))
    }
}

/// With probability `epsilon` the REVEAL check clicks regardless of the
/// projective outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub epsilon: f64,
}

impl DetectorModel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameters(format!("dark-count probability {epsilon} is outside [0, 1)")));
        }
        Ok(DetectorModel { epsilon })
    }

    pub fn ideal() -> Self {
        DetectorModel { epsilon: 0.0 }
    }
}
