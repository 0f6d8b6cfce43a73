//! Closed-form quantities the engine runs are checked against.

use serde::Serialize;

use super::engine::{Engine, Role};
use super::run::{run_commit, run_protocol};
use super::strategy::Channel;
use super::{correction_convention, AliceStrategy, Commitment, DetectorModel, ALICE_PRIVATE};
use crate::maskers::{dual_masker, KEY, SAFE, SECRET, SHARE_A};
use crate::qott::{unlocked_state, IndexCards, QottParams, ENTANGLED};
use crate::qudit::{
    clock_matrix, max_entangled, shift_matrix, trace_distance, DensityOperator, Ensemble, Matrix, PureState, Register,
};
use crate::{Error, Result};

/// Applies Alice's commit instrument and tamper channel, summed over all
/// messages, to `state`; the result carries `A` again.
fn alice_action(
    params: &QottParams,
    strategy: &AliceStrategy,
    state: &Ensemble,
) -> Result<Vec<(Commitment, Ensemble)>> {
    let p = params.p();
    let d_a = params.masker().share_register().dim_of(SHARE_A)?;
    let a = Register::single(SHARE_A, d_a)?;
    let instrument = strategy.instrument(params)?;
    let private = Register::single(ALICE_PRIVATE, instrument.out_dim())?;
    let identity = [Matrix::identity(d_a, d_a)];
    let channel: &[Matrix] = match strategy.channel() {
        Some(ch) => ch.kraus(),
        None => &identity,
    };
    let mut out = Vec::new();
    for (t, kraus) in instrument.branches().iter().enumerate() {
        if kraus.is_empty() {
            continue;
        }
        let s = state.apply_kraus(kraus, &[ENTANGLED, SHARE_A], &private)?;
        out.push((Commitment::from_index(p, t), s.apply_kraus(channel, &[ALICE_PRIVATE], &a)?));
    }
    Ok(out)
}

/// `(I ⊗ X^x Z^z)|Ω⟩_SK`.
fn shifted_omega(params: &QottParams, x: usize, z: usize) -> Result<PureState> {
    let p = params.p();
    let w = shift_matrix(p, x as i64) * clock_matrix(p, z as i64);
    params.safe_key().state().permute(&[SAFE, KEY])?.apply_on(&w, &[KEY])
}

/// `Λ_SK`: what Alice's action leaves on `(S, K)` after Bob unmasks with
/// the lock removed, summed over messages and traced over `C`.
pub(crate) fn lambda(params: &QottParams, strategy: &AliceStrategy) -> Result<DensityOperator> {
    let base = Ensemble::from_pure(&unlocked_state(params)?);
    let m_dag = params.masker().unitary().adjoint();
    let mut total: Option<DensityOperator> = None;
    for (_, s) in alice_action(params, strategy, &base)? {
        let r = s.apply(&m_dag)?.reduced(&[SAFE, KEY])?;
        total = Some(match total {
            Some(t) => t.add(&r)?,
            None => r,
        });
    }
    total.ok_or_else(|| Error::InvalidParameters("instrument has no outcomes".into()))
}

fn overlap(lambda: &DensityOperator, v: &PureState) -> f64 {
    (v.amplitudes().adjoint() * lambda.matrix() * v.amplitudes())[(0, 0)].re
}

/// The key shift `(x, z)` whose `|Ω_{x,z}⟩` Alice's action populates most.
pub(crate) fn dominant_key_shift(params: &QottParams, strategy: &AliceStrategy) -> Result<(usize, usize)> {
    let l = lambda(params, strategy)?;
    let p = params.p();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for x in 0..p {
        for z in 0..p {
            let v = overlap(&l, &shifted_omega(params, x, z)?);
            if v > best.2 + 1e-12 {
                best = (x, z, v);
            }
        }
    }
    Ok((best.0, best.1))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheatAnalysis {
    pub lambda_trace: f64,
    /// Acceptance for each Bob card, with an ideal detector.
    pub per_card: Vec<([usize; 2], f64)>,
    pub average: f64,
    pub worst_card: f64,
    /// `1/|J|`.
    pub bound: f64,
}

impl CheatAnalysis {
    pub fn with_dark_count(&self, detector: DetectorModel) -> f64 {
        (1.0 - detector.epsilon) * self.average + detector.epsilon * self.lambda_trace
    }
}

/// Acceptance of a strategy that reveals `card + offset`: Bob's card `j`
/// passes with `⟨Ω_{j₁o₁, j₂o₂}|Λ|Ω_{j₁o₁, j₂o₂}⟩`, whatever Alice's card.
pub fn cheat_analysis(params: &QottParams, strategy: &AliceStrategy) -> Result<CheatAnalysis> {
    strategy.validate(params)?;
    let p = params.p();
    let l = lambda(params, strategy)?;
    let o = strategy.offset();
    let mut per_card = Vec::new();
    for j in params.bob_cards() {
        let v = shifted_omega(params, (j[0] * o[0]) % p, (j[1] * o[1]) % p)?;
        per_card.push((j, overlap(&l, &v)));
    }
    let average = per_card.iter().map(|(_, a)| a).sum::<f64>() / per_card.len() as f64;
    let worst_card = per_card.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    Ok(CheatAnalysis {
        lambda_trace: l.trace(),
        per_card,
        average,
        worst_card,
        bound: 1.0 / params.j_set().len() as f64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TamperOutcome {
    pub accept_probability: f64,
    /// `Σ_k |⟨Ψ|(K_k ⊗ I)|Ψ⟩|²` with `|Ψ⟩_AS` from the dual factorization.
    pub predicted: f64,
    /// Trace distance of Bob's accepted output from the secret.
    pub output_distance: Option<f64>,
}

/// Honest commit, `channel` on `A`, correct indices.
pub fn post_commit_tamper(
    params: &QottParams,
    secret: &DensityOperator,
    channel: &Channel,
    cards: Option<IndexCards>,
    seed: u64,
) -> Result<TamperOutcome> {
    let strategy = AliceStrategy::post_commit(secret, channel.clone())?;
    let (transcript, outcome) = run_protocol(params, cards, &strategy, DetectorModel::ideal(), seed)?;
    let psi = dual_masker(params.masker())?.partner_state().clone();
    let mut predicted = 0.0;
    for k in channel.kraus() {
        predicted += psi.inner(&psi.apply_on(k, &[SHARE_A])?)?.norm_sqr();
    }
    let output_distance = match outcome.accepted_state()? {
        Some(out) => Some(trace_distance(&out, &secret.relabel(&[SECRET])?)?),
        None => None,
    };
    Ok(TamperOutcome { accept_probability: transcript.accept_probability, predicted, output_distance })
}

#[derive(Clone, Debug)]
pub struct OracleBranch {
    pub commitment: Commitment,
    /// Unnormalized state on `C` after correction.
    pub state: DensityOperator,
}

/// Delayed teleportation through `|Ψ⟩_AS`: `Θ_EC ⊗ Ψ_AS`, Alice's action
/// on `(E, A)`, projection on `⟨Ψ|_AS`, correction on `C`. Agrees branch by
/// branch with the protocol's passing outputs when Alice reveals the true
/// card.
pub fn delayed_teleport_oracle(params: &QottParams, strategy: &AliceStrategy) -> Result<Vec<OracleBranch>> {
    if strategy.reveals_wrong_indices(params.p()) {
        return Err(Error::InvalidParameters("the oracle models true indices only".into()));
    }
    let p = params.p();
    let psi = dual_masker(params.masker())?.partner_state().clone();
    let start = Ensemble::from_pure(&max_entangled(params.dim(), [ENTANGLED, SECRET])?.tensor(&psi)?);
    let conv = correction_convention();
    let bra = psi.permute(&[SHARE_A, SAFE])?;
    alice_action(params, strategy, &start)?
        .into_iter()
        .map(|(m, s)| {
            let s = s.project_out(&[SHARE_A, SAFE], bra.amplitudes())?;
            let c = Register::single(SECRET, p)?;
            let state = if s.is_empty() { DensityOperator::zero(c) } else { s.to_density() };
            Ok(OracleBranch { commitment: m, state: state.apply_on(&conv.matrix(p, m.a, m.b), &[SECRET])? })
        })
        .collect()
}

/// Bob's state after COMMIT, one block per message, averaged over Alice's
/// card for a fixed Bob card. Block traces sum to one.
#[derive(Clone, Debug)]
pub struct BobPreview {
    pub register: Register,
    pub blocks: Vec<DensityOperator>,
}

impl BobPreview {
    /// Trace distance of the block-diagonal operators.
    pub fn distance(&self, other: &BobPreview) -> Result<f64> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::InvalidParameters("previews have different message sets".into()));
        }
        let mut d = 0.0;
        for (x, y) in self.blocks.iter().zip(&other.blocks) {
            d += trace_distance(x, y)?;
        }
        Ok(d)
    }
}

pub fn bob_preview(params: &QottParams, strategy: &AliceStrategy, bob_card: [usize; 2]) -> Result<BobPreview> {
    let p = params.p();
    let weight = 1.0 / (p * p) as f64;
    let mut blocks: Option<Vec<DensityOperator>> = None;
    let mut register = Register::empty();
    for alice in params.alice_cards() {
        let mut eng = Engine::setup(params, IndexCards { alice, bob: bob_card })?;
        run_commit(&mut eng, strategy)?;
        let held = eng.holdings(Role::Bob);
        let views = eng.party(Role::Bob).marginals(&held)?;
        let acc = blocks.get_or_insert_with(|| {
            register = views[0].1.register().clone();
            vec![DensityOperator::zero(register.clone()); p * p]
        });
        for (msg, rho) in views {
            let t = msg.expect("committed").index(p);
            acc[t] = acc[t].add(&rho.scaled(weight))?;
        }
    }
    Ok(BobPreview { register, blocks: blocks.expect("Z_p² is not empty") })
}

/// `(1/p²) σ_B ⊗ ω_K` in every block, for a secret without a reference.
pub fn closed_form_preview(params: &QottParams) -> Result<BobPreview> {
    let p = params.p();
    let sigma_b = params.masker().marginals()?.1;
    let omega_k = params.safe_key().state().reduced(&[KEY])?;
    let block = sigma_b.tensor(&omega_k)?.scaled(1.0 / (p * p) as f64);
    Ok(BobPreview { register: block.register().clone(), blocks: vec![block; p * p] })
}
