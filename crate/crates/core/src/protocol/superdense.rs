//! Two dits per commitment: Alice commits to half of `(X^a Z^b ⊗ I)|Θ⟩_IR`
//! after sending `R` to Bob, and Bob Bell-measures `(C, R)` after REVEAL.

use serde::Serialize;

use super::analysis::{bob_preview, BobPreview};
use super::run::run_protocol;
use super::{AliceStrategy, DetectorModel, REFERENCE, SECRET_IN};
use crate::maskers::SECRET;
use crate::qott::{IndexCards, QottParams};
use crate::qudit::{bell_basis, max_entangled, weyl_matrix, Ensemble};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SuperdenseTranscript {
    pub dits: [usize; 2],
    pub accept_probability: f64,
    /// Probability of each decoded pair, indexed `a·p + b`, given acceptance.
    pub decoded: Vec<f64>,
    pub decode_success: f64,
}

fn encoded(params: &QottParams, dits: [usize; 2]) -> Result<AliceStrategy> {
    let p = params.p();
    if dits.iter().any(|&x| x >= p) {
        return Err(Error::InvalidParameters(format!("dits {dits:?} are outside Z_{p}")));
    }
    let pair = max_entangled(params.dim(), [SECRET_IN, REFERENCE])?
        .apply_on(&weyl_matrix(p, dits[0] as i64, dits[1] as i64), &[SECRET_IN])?
        .permute(&[REFERENCE, SECRET_IN])?;
    Ok(AliceStrategy::Honest { secret: Ensemble::from_pure(&pair) })
}

pub fn superdense_commit(
    params: &QottParams,
    dits: [usize; 2],
    cards: Option<IndexCards>,
    seed: u64,
) -> Result<SuperdenseTranscript> {
    let p = params.p();
    let strategy = encoded(params, dits)?;
    let (t, outcome) = run_protocol(params, cards, &strategy, DetectorModel::ideal(), seed)?;
    let out = outcome
        .accepted_state()?
        .ok_or_else(|| Error::InvalidParameters("an honest superdense commit was rejected".into()))?
        .permute(&[SECRET, REFERENCE])?;
    let decoded: Vec<f64> = bell_basis(params.dim(), [SECRET, REFERENCE])?
        .iter()
        .map(|b| (b.amplitudes().adjoint() * out.matrix() * b.amplitudes())[(0, 0)].re)
        .collect();
    let decode_success = decoded[dits[0] * p + dits[1]];
    Ok(SuperdenseTranscript { dits, accept_probability: t.accept_probability, decoded, decode_success })
}

/// Bob's pre-REVEAL view on `(B, K, R)` for the dit pair.
pub fn superdense_preview(params: &QottParams, dits: [usize; 2], bob_card: [usize; 2]) -> Result<BobPreview> {
    bob_preview(params, &encoded(params, dits)?, bob_card)
}
