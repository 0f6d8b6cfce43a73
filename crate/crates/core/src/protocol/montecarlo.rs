//! Sampled protocol runs. Each trial draws from its own stream
//! `stream(seed, t)`, so results do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::Engine;
use super::run::{run_commit, run_reveal, sample_index};
use super::{AliceStrategy, DetectorModel};
use crate::qott::{IndexCards, QottParams};
use crate::rng::stream;
use crate::Result;

/// Exact branch weights and conditional acceptance for every card pair.
struct CardTable {
    alice: Vec<[usize; 2]>,
    bob: Vec<[usize; 2]>,
    /// `[alice][bob]` → (message weights, acceptance given message).
    rows: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl CardTable {
    fn build(params: &QottParams, strategy: &AliceStrategy, detector: DetectorModel) -> Result<CardTable> {
        let alice = params.alice_cards();
        let bob = params.bob_cards();
        let rows = alice
            .par_iter()
            .map(|&a| {
                bob.iter()
                    .map(|&b| {
                        let mut eng = Engine::setup(params, IndexCards { alice: a, bob: b })?;
                        run_commit(&mut eng, strategy)?;
                        let out = run_reveal(&mut eng, strategy, detector)?;
                        let w: Vec<f64> = out.branches.iter().map(|x| x.weight).collect();
                        let acc = out
                            .branches
                            .iter()
                            .map(|x| if x.weight > 0.0 { (x.accepted.trace() / x.weight).clamp(0.0, 1.0) } else { 0.0 })
                            .collect();
                        Ok((w, acc))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CardTable { alice, bob, rows })
    }

    fn exact(&self) -> f64 {
        let n = (self.alice.len() * self.bob.len()) as f64;
        self.rows.iter().flatten().map(|(w, a)| w.iter().zip(a).map(|(w, a)| w * a).sum::<f64>()).sum::<f64>() / n
    }

    /// One instance: fresh cards, a sampled message, a sampled verdict.
    fn sample(&self, rng: &mut impl Rng) -> bool {
        let (w, acc) = &self.rows[rng.random_range(0..self.alice.len())][rng.random_range(0..self.bob.len())];
        let t = sample_index(w, rng);
        rng.random::<f64>() < acc[t]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub accepts: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// The same probability from the exact card table.
    pub exact: f64,
}

pub fn monte_carlo(
    params: &QottParams,
    strategy: &AliceStrategy,
    detector: DetectorModel,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let table = CardTable::build(params, strategy, detector)?;
    let accepts = (0..trials).into_par_iter().filter(|&t| table.sample(&mut stream(seed, t))).count() as u64;
    let estimate = accepts as f64 / trials.max(1) as f64;
    Ok(MonteCarloEstimate {
        trials,
        accepts,
        estimate,
        std_error: (estimate * (1.0 - estimate) / trials.max(1) as f64).sqrt(),
        exact: table.exact(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepetitionEstimate {
    pub instances: u32,
    pub trials: u64,
    /// Trials in which every instance accepted.
    pub all_accepted: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Single-instance acceptance to the power `n`.
    pub exact: f64,
    /// `(1/|J| + ε)^n`.
    pub bound: f64,
}

/// `n` independent instances per trial; Bob accepts only if all do.
pub fn repetition_mode(
    instances: u32,
    params: &QottParams,
    strategy: &AliceStrategy,
    detector: DetectorModel,
    trials: u64,
    seed: u64,
) -> Result<RepetitionEstimate> {
    let table = CardTable::build(params, strategy, detector)?;
    let all_accepted = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = stream(seed, t);
            (0..instances).all(|_| table.sample(&mut rng))
        })
        .count() as u64;
    let estimate = all_accepted as f64 / trials.max(1) as f64;
    let single_bound = 1.0 / params.j_set().len() as f64 + detector.epsilon;
    Ok(RepetitionEstimate {
        instances,
        trials,
        all_accepted,
        estimate,
        std_error: (estimate * (1.0 - estimate) / trials.max(1) as f64).sqrt(),
        exact: table.exact().powi(instances as i32),
        bound: single_bound.powi(instances as i32),
    })
}
