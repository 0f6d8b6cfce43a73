use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Access, Engine, PartyView, Phase, Role};
use super::{correction_convention, AliceStrategy, Commitment, DetectorModel, ALICE_PRIVATE, REFERENCE, SECRET_IN};
use crate::maskers::{KEY, SAFE, SECRET, SHARE_A};
use crate::qott::{unlock, IndexCards, QottParams, ENTANGLED};
use crate::qudit::{bell_basis, fidelity, DensityOperator, Matrix, Register};
use crate::rng::seeded;
use crate::{Error, Result};

/// SETUP with the given cards, or cards drawn from `seed`.
pub fn run_setup(params: &QottParams, cards: Option<IndexCards>, seed: u64) -> Result<Engine> {
    let cards = cards.unwrap_or_else(|| IndexCards::draw(params, &mut seeded(seed)));
    Engine::setup(params, cards)
}

/// COMMIT; returns the probability of each message.
pub fn run_commit(eng: &mut Engine, strategy: &AliceStrategy) -> Result<Vec<(Commitment, f64)>> {
    if eng.phase() != Phase::Commit {
        return Err(Error::Phase(format!("COMMIT called in phase {:?}", eng.phase())));
    }
    strategy.validate(eng.params())?;
    let d = eng.params().dim();
    let mut alice = eng.party(Role::Alice);
    match strategy {
        AliceStrategy::GenericSubchannels { instrument, .. } => {
            let private = Register::single(ALICE_PRIVATE, instrument.out_dim())?;
            alice.instrument(instrument.branches(), &[ENTANGLED, SHARE_A], &private)?;
        }
        _ => {
            let secret = strategy.secret().expect("honest commits carry a secret");
            alice.adjoin(secret)?;
            if secret.register().contains(REFERENCE) {
                alice.send(&[REFERENCE], Role::Bob)?;
            }
            let rows: Vec<Vec<Matrix>> = bell_basis(d, [SECRET_IN, ENTANGLED])?
                .iter()
                .map(|b| {
                    let v = b.amplitudes();
                    vec![Matrix::from_fn(1, v.len(), |_, j| v[j].conj())]
                })
                .collect();
            alice.instrument(&rows, &[SECRET_IN, ENTANGLED], &Register::empty())?;
        }
    }
    eng.advance(Phase::Tamper);
    Ok(eng.commit_distribution())
}

/// Whatever Alice does to her registers between COMMIT and REVEAL.
pub fn tamper_phase(eng: &mut Engine, strategy: &AliceStrategy) -> Result<()> {
    if eng.phase() != Phase::Tamper {
        return Err(Error::Phase(format!("tamper step called in phase {:?}", eng.phase())));
    }
    let d_a = eng.params().masker().share_register().dim_of(SHARE_A)?;
    let a = Register::single(SHARE_A, d_a)?;
    let mut alice = eng.party(Role::Alice);
    match strategy {
        AliceStrategy::GenericSubchannels { channel, .. } => match channel {
            Some(ch) => alice.apply_kraus(ch.kraus(), &[ALICE_PRIVATE], &a)?,
            None => alice.apply_kraus(&[Matrix::identity(d_a, d_a)], &[ALICE_PRIVATE], &a)?,
        },
        AliceStrategy::PostCommitChannel { channel, .. } => alice.apply_kraus(channel.kraus(), &[SHARE_A], &a)?,
        _ => {}
    }
    eng.advance(Phase::Reveal);
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RevealBranch {
    pub commitment: Commitment,
    /// Probability of this commit message.
    pub weight: f64,
    /// Probability of this message and a passing check.
    pub pass_probability: f64,
    /// Unnormalized, corrected state Bob keeps when the check passes.
    pub passed: DensityOperator,
    /// Unnormalized, corrected state Bob keeps when he accepts.
    pub accepted: DensityOperator,
}

#[derive(Clone, Debug)]
pub struct RevealOutcome {
    pub revealed: [usize; 2],
    pub epsilon: f64,
    pub branches: Vec<RevealBranch>,
    pub accept_probability: f64,
}

impl RevealOutcome {
    /// Bob's output conditioned on accepting.
    pub fn accepted_state(&self) -> Result<Option<DensityOperator>> {
        if self.accept_probability <= 1e-14 {
            return Ok(None);
        }
        let mut sum = DensityOperator::zero(self.branches[0].accepted.register().clone());
        for b in &self.branches {
            sum = sum.add(&b.accepted)?;
        }
        sum.normalized().map(Some)
    }

    /// Bob's output conditioned on the check passing, ignoring dark counts.
    pub fn passed_state(&self) -> Result<Option<DensityOperator>> {
        let total: f64 = self.branches.iter().map(|b| b.pass_probability).sum();
        if total <= 1e-14 {
            return Ok(None);
        }
        let mut sum = DensityOperator::zero(self.branches[0].passed.register().clone());
        for b in &self.branches {
            sum = sum.add(&b.passed)?;
        }
        sum.normalized().map(Some)
    }
}

/// REVEAL: Alice sends `A` and announces `card + offset`; Bob unlocks `K`,
/// unmasks, corrects `C` by the message and checks `⟨Ω|_SK`.
pub fn run_reveal(eng: &mut Engine, strategy: &AliceStrategy, detector: DetectorModel) -> Result<RevealOutcome> {
    if eng.phase() == Phase::Tamper {
        tamper_phase(eng, strategy)?;
    }
    if eng.phase() != Phase::Reveal {
        return Err(Error::Phase(format!("REVEAL called in phase {:?}", eng.phase())));
    }
    let p = eng.params().p();
    let m_dag = eng.params().masker().unitary().adjoint();
    let omega = eng.params().safe_key().state().clone();
    let conv = correction_convention();

    let mut alice = eng.party(Role::Alice);
    let card = alice.card()?;
    let offset = strategy.offset();
    let revealed = [(card[0] + offset[0]) % p, (card[1] + offset[1]) % p];
    alice.send(&[SHARE_A], Role::Bob)?;
    alice.announce("revealed", Role::Bob);

    let mut bob = eng.party(Role::Bob);
    let j = bob.card()?;
    bob.apply_on(&unlock(p, revealed, j), &[KEY])?;
    bob.apply_kraus(&[m_dag.matrix().clone()], m_dag.in_register().labels(), m_dag.out_register())?;
    // The correction acts on C and the check on (S, K), so their order is free.
    bob.apply_per_message(&[SECRET], |m| conv.matrix(p, m.a, m.b))?;
    let omega = omega.permute(&[SAFE, KEY])?;
    let checked = bob.check(&[SAFE, KEY], omega.amplitudes())?;

    let eps = detector.epsilon;
    let mut branches = Vec::with_capacity(checked.len());
    let mut accept = 0.0;
    for c in checked {
        let pass_probability = c.pass.trace();
        let accepted = c.pass.scaled(1.0 - eps).add(&c.full.scaled(eps))?;
        accept += (1.0 - eps) * pass_probability + eps * c.weight;
        branches.push(RevealBranch { commitment: c.msg, weight: c.weight, pass_probability, passed: c.pass, accepted });
    }
    Ok(RevealOutcome { revealed, epsilon: eps, branches, accept_probability: accept })
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub pass_probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledRun {
    pub commitment: Commitment,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolTranscript {
    pub p: usize,
    pub j_set: Vec<usize>,
    pub masker: String,
    pub strategy: String,
    pub epsilon: f64,
    pub cards: IndexCards,
    pub revealed: [usize; 2],
    pub branches: Vec<BranchRecord>,
    pub accept_probability: f64,
    /// Fidelity of Bob's accepted output with the secret, for honest commits.
    pub output_fidelity: Option<f64>,
    pub sampled: SampledRun,
    pub views: Vec<PartyView>,
    pub access_log: Vec<Access>,
}

/// One exact run plus one sampled commit message and verdict.
pub fn run_protocol(
    params: &QottParams,
    cards: Option<IndexCards>,
    strategy: &AliceStrategy,
    detector: DetectorModel,
    seed: u64,
) -> Result<(ProtocolTranscript, RevealOutcome)> {
    let mut rng = seeded(seed);
    let cards = cards.unwrap_or_else(|| IndexCards::draw(params, &mut rng));
    let mut eng = Engine::setup(params, cards)?;
    run_commit(&mut eng, strategy)?;
    tamper_phase(&mut eng, strategy)?;
    let views = eng.views();
    let outcome = run_reveal(&mut eng, strategy, detector)?;

    let output_fidelity = match strategy.secret() {
        Some(secret) if !secret.register().contains(REFERENCE) => match outcome.accepted_state()? {
            Some(out) => Some(fidelity(&out, &secret.to_density().relabel(&[SECRET])?)?),
            None => None,
        },
        _ => None,
    };

    let weights: Vec<f64> = outcome.branches.iter().map(|b| b.weight).collect();
    let t = sample_index(&weights, &mut rng);
    let chosen = &outcome.branches[t];
    let accept_given = if chosen.weight > 0.0 { chosen.accepted.trace() / chosen.weight } else { 0.0 };
    let sampled = SampledRun { commitment: chosen.commitment, accepted: rng.random::<f64>() < accept_given };

    let transcript = ProtocolTranscript {
        p: params.p(),
        j_set: params.j_set().to_vec(),
        masker: params.masker().family().to_string(),
        strategy: strategy.name().to_string(),
        epsilon: detector.epsilon,
        cards,
        revealed: outcome.revealed,
        branches: outcome
            .branches
            .iter()
            .map(|b| BranchRecord {
                a: b.commitment.a,
                b: b.commitment.b,
                probability: b.weight,
                pass_probability: b.pass_probability,
            })
            .collect(),
        accept_probability: outcome.accept_probability,
        output_fidelity,
        sampled,
        views,
        access_log: eng.log().to_vec(),
    };
    Ok((transcript, outcome))
}

pub(crate) fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactAcceptance {
    pub per_card: Vec<(IndexCards, f64)>,
    /// Over uniformly drawn cards.
    pub average: f64,
    pub worst_card: f64,
}

/// Acceptance probability for every card pair, each from a full engine run.
pub fn exact_acceptance(
    params: &QottParams,
    strategy: &AliceStrategy,
    detector: DetectorModel,
) -> Result<ExactAcceptance> {
    let cards: Vec<IndexCards> = params
        .alice_cards()
        .into_iter()
        .flat_map(|alice| params.bob_cards().into_iter().map(move |bob| IndexCards { alice, bob }))
        .collect();
    let per_card = cards
        .par_iter()
        .map(|&c| {
            let mut eng = Engine::setup(params, c)?;
            run_commit(&mut eng, strategy)?;
            Ok((c, run_reveal(&mut eng, strategy, detector)?.accept_probability))
        })
        .collect::<Result<Vec<_>>>()?;
    let average = per_card.iter().map(|(_, a)| a).sum::<f64>() / per_card.len() as f64;
    let worst_card = per_card.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    Ok(ExactAcceptance { per_card, average, worst_card })
}
