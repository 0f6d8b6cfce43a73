//! Classical trusted-initializer bit commitment over `Z_p`.
//!
//! The initializer draws a line `y = a·x + b` for Alice and a point
//! `(x₁, y₁)` on it for Bob. Alice commits to `m` by sending `c = m + a`;
//! she opens with `(m, a, b)` and Bob accepts iff `y₁ = a·x₁ + b` and
//! `c = m + a`. The slope is the pad: Bob's point fixes only `b` given `a`,
//! so `c` is uniform to him, and a second line through his point agrees with
//! Alice's at exactly one `x`, so a false opening survives with probability
//! `1/p`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qudit::{entropy_of_spectrum, Dim};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub m: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalOtt {
    pub p: usize,
    pub alice_card: Line,
    pub bob_card: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalTranscript {
    pub commit: usize,
    pub opening: Opening,
    pub accept: bool,
}

fn in_field(p: usize, v: usize, what: &str) -> Result<()> {
    if v >= p {
        return Err(Error::InvalidParameters(format!("{what} = {v} is outside Z_{p}")));
    }
    Ok(())
}

impl ClassicalOtt {
    pub fn from_cards(p: usize, line: Line, x: usize) -> Result<Self> {
        Dim::prime(p)?;
        in_field(p, line.a, "a")?;
        in_field(p, line.b, "b")?;
        in_field(p, x, "x")?;
        let y = (line.a * x + line.b) % p;
        Ok(ClassicalOtt { p, alice_card: line, bob_card: Point { x, y } })
    }

    pub fn commit(&self, m: usize) -> Result<usize> {
        in_field(self.p, m, "m")?;
        Ok((m + self.alice_card.a) % self.p)
    }

    pub fn honest_opening(&self, m: usize) -> Opening {
        Opening { m, a: self.alice_card.a, b: self.alice_card.b }
    }

    /// Bob's check, using only his card and the two messages.
    pub fn verify(&self, commit: usize, opening: Opening) -> Result<bool> {
        verify_with(self.p, self.bob_card, commit, opening)
    }
}

pub fn verify_with(p: usize, point: Point, commit: usize, o: Opening) -> Result<bool> {
    for (v, n) in [(commit, "c"), (o.m, "m"), (o.a, "a"), (o.b, "b")] {
        in_field(p, v, n)?;
    }
    Ok((o.a * point.x + o.b) % p == point.y && (o.m + o.a) % p == commit)
}

pub fn rivest_setup(p: usize, rng: &mut impl Rng) -> Result<ClassicalOtt> {
    Dim::prime(p)?;
    let line = Line { a: rng.random_range(0..p), b: rng.random_range(0..p) };
    ClassicalOtt::from_cards(p, line, rng.random_range(0..p))
}

pub fn run_honest(ott: &ClassicalOtt, m: usize) -> Result<ClassicalTranscript> {
    let commit = ott.commit(m)?;
    let opening = ott.honest_opening(m);
    Ok(ClassicalTranscript { commit, opening, accept: ott.verify(commit, opening)? })
}

fn all_tables(p: usize) -> impl Iterator<Item = (Line, usize)> {
    (0..p).flat_map(move |a| (0..p).flat_map(move |b| (0..p).map(move |x| (Line { a, b }, x))))
}

fn entropy_of_counts<K>(counts: &HashMap<K, usize>, total: usize) -> Result<f64> {
    let probs: Vec<f64> = counts.values().map(|&n| n as f64 / total as f64).collect();
    entropy_of_spectrum(&probs)
}

/// I(m ; c, x₁, y₁) in bits for a uniform message, by exhaustive enumeration.
pub fn hiding_mutual_information(p: usize) -> Result<f64> {
    Dim::prime(p)?;
    let mut joint: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
    let mut view: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut total = 0;
    for (line, x) in all_tables(p) {
        let ott = ClassicalOtt::from_cards(p, line, x)?;
        for m in 0..p {
            let c = ott.commit(m)?;
            *joint.entry((m, c, ott.bob_card.x, ott.bob_card.y)).or_default() += 1;
            *view.entry((c, ott.bob_card.x, ott.bob_card.y)).or_default() += 1;
            total += 1;
        }
    }
    let h_m = (p as f64).log2();
    Ok(h_m + entropy_of_counts(&view, total)? - entropy_of_counts(&joint, total)?)
}

/// Whether the commit value is uniform given Bob's card, for every message.
pub fn commit_uniform_given_point(p: usize) -> Result<bool> {
    Dim::prime(p)?;
    for m in 0..p {
        let mut counts: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (line, x) in all_tables(p) {
            let ott = ClassicalOtt::from_cards(p, line, x)?;
            *counts.entry((ott.bob_card.x, ott.bob_card.y, ott.commit(m)?)).or_default() += 1;
        }
        // Each point should see every c equally often.
        for x in 0..p {
            for y in 0..p {
                let row: Vec<usize> = (0..p).map(|c| counts.get(&(x, y, c)).copied().unwrap_or(0)).collect();
                if row.iter().any(|&n| n != row[0]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheatStats {
    /// Best false opening, averaged over Bob's point, for the worst case of
    /// Alice's line, committed message and target message.
    pub worst: f64,
    pub average: f64,
}

/// A cheating Alice holding line `(a, b)` who committed `m` and opens
/// `m′ ≠ m` must send slope `a′ = c − m′`; she picks `b′` freely. Counts,
/// over Bob's uniformly random `x₁`, how often the best `b′` passes.
pub fn cheat_success(p: usize) -> Result<CheatStats> {
    Dim::prime(p)?;
    let mut worst = 0usize;
    let mut wins_total = 0usize;
    let mut cases = 0usize;
    for a in 0..p {
        for b in 0..p {
            let line = Line { a, b };
            for m in 0..p {
                let c = (m + a) % p;
                for m2 in (0..p).filter(|&v| v != m) {
                    let a2 = (c + p - m2) % p;
                    let mut best = 0usize;
                    for b2 in 0..p {
                        let wins = (0..p)
                            .filter(|&x| {
                                let ott = ClassicalOtt::from_cards(p, line, x).expect("in range");
                                ott.verify(c, Opening { m: m2, a: a2, b: b2 }).expect("in range")
                            })
                            .count();
                        best = best.max(wins);
                    }
                    worst = worst.max(best);
                    wins_total += best;
                    cases += 1;
                }
            }
        }
    }
    Ok(CheatStats { worst: worst as f64 / p as f64, average: wins_total as f64 / (cases * p) as f64 })
}

/// Entropy in bits of the joint card distribution `(line, point)`.
pub fn src_classical(p: usize) -> Result<f64> {
    Dim::prime(p)?;
    let mut counts: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
    let mut total = 0;
    for (line, x) in all_tables(p) {
        let ott = ClassicalOtt::from_cards(p, line, x)?;
        *counts.entry((line.a, line.b, ott.bob_card.x, ott.bob_card.y)).or_default() += 1;
        total += 1;
    }
    entropy_of_counts(&counts, total)
}
