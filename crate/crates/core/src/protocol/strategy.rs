//! What Alice does between SETUP and REVEAL.

use rand::Rng;

use super::{analysis, REFERENCE, SECRET_IN};
use crate::maskers::SHARE_A;
use crate::qott::{QottParams, ENTANGLED};
use crate::qudit::{
    bell_basis, random_isometry, shift_matrix, weyl_matrix, DensityOperator, Ensemble, Matrix, Register, Vector,
    DERIVED_TOL,
};
use crate::{Error, Result};

fn completeness_deviation<'a>(kraus: impl Iterator<Item = &'a Matrix>, n: usize) -> f64 {
    let mut sum = Matrix::zeros(n, n);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - Matrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A trace-preserving map given by Kraus operators `out_dim × in_dim`.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<Matrix>,
    in_dim: usize,
    out_dim: usize,
}

impl Channel {
    pub fn new(kraus: Vec<Matrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidParameters("channel has no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidParameters("Kraus operators have different shapes".into()));
        }
        let dev = completeness_deviation(kraus.iter(), in_dim);
        if dev > DERIVED_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Channel { kraus, in_dim, out_dim })
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, rho: &DensityOperator, label: &str) -> Result<DensityOperator> {
        let out = Register::single(label, self.out_dim)?;
        rho.apply_kraus(&self.kraus, &[label], &out)
    }
}

/// `ρ ↦ (1-λ)ρ + λ I/n`.
pub fn depolarizing(n: usize, lambda: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameters(format!("depolarizing strength {lambda} is outside [0, 1]")));
    }
    let nn = (n * n) as f64;
    let mut kraus = vec![Matrix::identity(n, n).scale((1.0 - lambda + lambda / nn).sqrt())];
    for x in 0..n {
        for z in 0..n {
            if (x, z) != (0, 0) {
                kraus.push(weyl_matrix(n, x as i64, z as i64).scale((lambda / nn).sqrt()));
            }
        }
    }
    Channel::new(kraus)
}

/// Discards the input and prepares `|0⟩`.
pub fn replace_with_zero(n: usize) -> Result<Channel> {
    Channel::new(
        (0..n)
            .map(|j| {
                let mut k = Matrix::zeros(n, n);
                k[(0, j)] = 1.0.into();
                k
            })
            .collect(),
    )
}

/// `X^t` on an n-level system.
pub fn shift_channel(n: usize, t: i64) -> Result<Channel> {
    Channel::new(vec![shift_matrix(n, t)])
}

/// One Kraus list per commit message, indexed by `a·p + b`, each operator
/// mapping `E ⊗ A` (dimension `p·d_A`) to Alice's private `A'`.
#[derive(Clone, Debug)]
pub struct Instrument {
    branches: Vec<Vec<Matrix>>,
    in_dim: usize,
    out_dim: usize,
}

impl Instrument {
    pub fn new(branches: Vec<Vec<Matrix>>, in_dim: usize, out_dim: usize) -> Result<Self> {
        if branches.iter().flatten().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidParameters(format!("instrument operators must be {out_dim}×{in_dim}")));
        }
        let dev = completeness_deviation(branches.iter().flatten(), in_dim);
        if dev > DERIVED_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Instrument { branches, in_dim, out_dim })
    }

    pub fn branches(&self) -> &[Vec<Matrix>] {
        &self.branches
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn outcomes(&self) -> usize {
        self.branches.len()
    }
}

fn secret_on_i(secret: &Ensemble, p: usize) -> Result<()> {
    let reg = secret.register();
    if reg.dim_of(SECRET_IN)? != p {
        return Err(Error::DimensionMismatch { expected: p, found: reg.dim_of(SECRET_IN)? });
    }
    if reg.labels().iter().any(|l| l != SECRET_IN && l != REFERENCE) {
        return Err(Error::RegisterMismatch(format!("a secret lives on I and optionally R, not {reg}")));
    }
    if (secret.trace() - 1.0).abs() > DERIVED_TOL {
        return Err(Error::NotNormalized(secret.trace()));
    }
    Ok(())
}

/// The honest commit written as an instrument on `E ⊗ A`: outcome `t` keeps
/// `A` and contracts `E` with `Σ_i conj(β_t[i, e]) φ[i]`.
pub fn honest_instrument(secret: &DensityOperator, p: usize, d_a: usize) -> Result<Instrument> {
    let ens = Ensemble::from_density(&secret.relabel(&[SECRET_IN])?);
    secret_on_i(&ens, p)?;
    let d = crate::qudit::Dim::prime(p)?;
    let bells = bell_basis(d, [SECRET_IN, ENTANGLED])?;
    let mut branches = Vec::with_capacity(p * p);
    for bell in &bells {
        let beta = bell.amplitudes();
        let mut list = Vec::new();
        for v in ens.members() {
            let row = Vector::from_fn(p, |e, _| (0..p).map(|i| beta[i * p + e].conj() * v[i]).sum());
            list.push(Matrix::from_fn(d_a, p * d_a, |x, col| {
                let (e, a) = (col / d_a, col % d_a);
                if a == x {
                    row[e]
                } else {
                    0.0.into()
                }
            }));
        }
        branches.push(list);
    }
    Instrument::new(branches, p * d_a, d_a)
}

/// Runs the instrument honestly but announces `perm[t]` for outcome `t`.
pub fn permuted_instrument(base: &Instrument, perm: &[usize]) -> Result<Instrument> {
    let n = base.outcomes();
    let mut seen = vec![false; n];
    for &t in perm {
        if t >= n || std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidParameters("not a permutation of the outcomes".into()));
        }
    }
    if perm.len() != n {
        return Err(Error::InvalidParameters("not a permutation of the outcomes".into()));
    }
    let mut branches = vec![Vec::new(); n];
    for (t, list) in base.branches.iter().enumerate() {
        branches[perm[t]].extend(list.iter().cloned());
    }
    Instrument::new(branches, base.in_dim, base.out_dim)
}

/// Kraus operators read off a random isometry `d_in → d_out·count`.
pub fn random_channel(d_in: usize, d_out: usize, count: usize, rng: &mut impl Rng) -> Result<Channel> {
    let v = random_isometry(d_out * count, d_in, rng);
    Channel::new((0..count).map(|k| Matrix::from_fn(d_out, d_in, |x, y| v[(x * count + k, y)])).collect())
}

/// Rank-one subchannels from a Haar-random isometry `p·d_A → p²·d_A'`.
pub fn random_instrument(p: usize, d_a: usize, d_out: usize, rng: &mut impl Rng) -> Result<Instrument> {
    let n = p * p;
    let v = random_isometry(d_out * n, p * d_a, rng);
    let branches = (0..n).map(|t| vec![Matrix::from_fn(d_out, p * d_a, |x, y| v[(x * n + t, y)])]).collect();
    Instrument::new(branches, p * d_a, d_out)
}

/// `Δ = q·Δ₁ + (1-q)·Δ₂`, outcome by outcome.
pub fn mixed_instrument(first: &Instrument, second: &Instrument, q: f64) -> Result<Instrument> {
    let branches = first
        .branches
        .iter()
        .zip(&second.branches)
        .map(|(x, y)| x.iter().map(|k| k.scale(q.sqrt())).chain(y.iter().map(|k| k.scale((1.0 - q).sqrt()))).collect())
        .collect();
    Instrument::new(branches, first.in_dim, first.out_dim)
}

#[derive(Clone, Debug)]
pub enum AliceStrategy {
    /// Bell-measure `(I, E)` on the secret and reveal the true card.
    Honest { secret: Ensemble },
    /// Commit honestly, reveal `card + offset`.
    WrongIndices { secret: Ensemble, offset: [usize; 2] },
    /// Commit honestly, apply a channel to `A`, reveal the true card.
    PostCommitChannel { secret: Ensemble, channel: Channel },
    /// Arbitrary instrument on `(E, A)`, an optional channel `A' → A`, and
    /// `card + offset` at REVEAL.
    GenericSubchannels { instrument: Instrument, channel: Option<Channel>, offset: [usize; 2] },
}

impl AliceStrategy {
    pub fn honest(secret: &DensityOperator) -> Result<Self> {
        Ok(AliceStrategy::Honest { secret: Ensemble::from_density(&secret.relabel(&[SECRET_IN])?) })
    }

    pub fn wrong_indices(secret: &DensityOperator, offset: [usize; 2]) -> Result<Self> {
        Ok(AliceStrategy::WrongIndices { secret: Ensemble::from_density(&secret.relabel(&[SECRET_IN])?), offset })
    }

    pub fn post_commit(secret: &DensityOperator, channel: Channel) -> Result<Self> {
        Ok(AliceStrategy::PostCommitChannel { secret: Ensemble::from_density(&secret.relabel(&[SECRET_IN])?), channel })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AliceStrategy::Honest { .. } => "honest",
            AliceStrategy::WrongIndices { .. } => "wrong-index",
            AliceStrategy::PostCommitChannel { .. } => "tamper",
            AliceStrategy::GenericSubchannels { .. } => "generic",
        }
    }

    /// The secret, for strategies that commit honestly.
    pub fn secret(&self) -> Option<&Ensemble> {
        match self {
            AliceStrategy::Honest { secret }
            | AliceStrategy::WrongIndices { secret, .. }
            | AliceStrategy::PostCommitChannel { secret, .. } => Some(secret),
            AliceStrategy::GenericSubchannels { .. } => None,
        }
    }

    pub fn offset(&self) -> [usize; 2] {
        match self {
            AliceStrategy::WrongIndices { offset, .. } | AliceStrategy::GenericSubchannels { offset, .. } => *offset,
            _ => [0, 0],
        }
    }

    pub fn channel(&self) -> Option<&Channel> {
        match self {
            AliceStrategy::PostCommitChannel { channel, .. } => Some(channel),
            AliceStrategy::GenericSubchannels { channel, .. } => channel.as_ref(),
            _ => None,
        }
    }

    pub fn reveals_wrong_indices(&self, p: usize) -> bool {
        self.offset().iter().any(|o| o % p != 0)
    }

    /// Checks the strategy against the protocol's dimensions.
    pub fn validate(&self, params: &QottParams) -> Result<()> {
        let p = params.p();
        let d_a = params.masker().share_register().dim_of(SHARE_A)?;
        if let Some(secret) = self.secret() {
            secret_on_i(secret, p)?;
        }
        if let AliceStrategy::WrongIndices { offset, .. } = self {
            if offset.iter().all(|o| o % p == 0) {
                return Err(Error::InvalidParameters("a wrong-index strategy needs a nonzero offset".into()));
            }
        }
        let private_dim = match self {
            AliceStrategy::GenericSubchannels { instrument, .. } => {
                if instrument.in_dim() != p * d_a || instrument.outcomes() != p * p {
                    return Err(Error::InvalidParameters(format!(
                        "instrument must have {} outcomes on a {}-dimensional input",
                        p * p,
                        p * d_a
                    )));
                }
                instrument.out_dim()
            }
            _ => d_a,
        };
        match self.channel() {
            Some(ch) if ch.in_dim() != private_dim || ch.out_dim() != d_a => {
                Err(Error::InvalidParameters(format!("channel must map dimension {private_dim} to {d_a}")))
            }
            None if private_dim != d_a => {
                Err(Error::InvalidParameters("an instrument onto a new dimension needs a channel back to A".into()))
            }
            _ => Ok(()),
        }
    }

    /// The commit as an instrument on `(E, A)`; not available when the
    /// secret carries a reference system.
    pub fn instrument(&self, params: &QottParams) -> Result<Instrument> {
        let p = params.p();
        let d_a = params.masker().share_register().dim_of(SHARE_A)?;
        match self {
            AliceStrategy::GenericSubchannels { instrument, .. } => Ok(instrument.clone()),
            _ => {
                let secret = self.secret().expect("honest commits carry a secret");
                if secret.register().contains(REFERENCE) {
                    return Err(Error::InvalidParameters("a referenced secret has no instrument form".into()));
                }
                honest_instrument(&secret.to_density(), p, d_a)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NamedStrategy {
    pub name: String,
    pub strategy: AliceStrategy,
}

/// `X^t` on `A` after an honest commit, revealing the offset that makes the
/// shifted key pass for the first card in `J`. Accepted with probability
/// exactly `1/|J|` when the shift moves the key along one axis only.
pub fn saturating_shift_strategy(params: &QottParams, secret: &DensityOperator, t: i64) -> Result<AliceStrategy> {
    let p = params.p();
    let d_a = params.masker().share_register().dim_of(SHARE_A)?;
    let probe = AliceStrategy::post_commit(secret, shift_channel(d_a, t)?)?;
    let (x, z) = analysis::dominant_key_shift(params, &probe)?;
    let j = params.j_set()[0];
    let inv = modular_inverse(j, p);
    let offset = [(x * inv) % p, (z * inv) % p];
    Ok(AliceStrategy::GenericSubchannels {
        instrument: probe.instrument(params)?,
        channel: Some(shift_channel(d_a, t)?),
        offset,
    })
}

pub(crate) fn modular_inverse(j: usize, p: usize) -> usize {
    (1..p).find(|k| (j * k) % p == 1).expect("units of Z_p are invertible")
}

/// Cheating strategies that all reveal wrong indices: honest commits with
/// wrong offsets, permuted reports, random instruments, mixtures, shifts
/// and noise on `A`.
pub fn adversary_family(params: &QottParams, rng: &mut impl Rng) -> Result<Vec<NamedStrategy>> {
    let p = params.p();
    let d_a = params.masker().share_register().dim_of(SHARE_A)?;
    let i_reg = Register::single(SECRET_IN, p)?;
    let secret = crate::qudit::random_density(&i_reg, 2, rng);
    let other = DensityOperator::pure(&crate::qudit::random_pure(&i_reg, rng));
    let honest = honest_instrument(&secret, p, d_a)?;
    let honest2 = honest_instrument(&other, p, d_a)?;
    let mut perm: Vec<usize> = (0..p * p).collect();
    perm.rotate_left(1);
    let offsets = [[1, 0], [0, 1], [1, 1], [2 % p, (p - 1) % p]];
    let mut out = Vec::new();
    for offset in offsets {
        if offset.iter().all(|o| o % p == 0) {
            continue;
        }
        let tag = format!("{}-{}", offset[0], offset[1]);
        let mut push = |name: &str, strategy: AliceStrategy| {
            out.push(NamedStrategy { name: format!("{name}@{tag}"), strategy });
        };
        push("wrong-index", AliceStrategy::wrong_indices(&secret, offset)?);
        push(
            "permuted-report",
            AliceStrategy::GenericSubchannels {
                instrument: permuted_instrument(&honest, &perm)?,
                channel: None,
                offset,
            },
        );
        push(
            "random-instrument",
            AliceStrategy::GenericSubchannels {
                instrument: random_instrument(p, d_a, d_a, rng)?,
                channel: None,
                offset,
            },
        );
        push(
            "random-instrument-wide",
            AliceStrategy::GenericSubchannels {
                instrument: random_instrument(p, d_a, 2 * d_a, rng)?,
                channel: Some(random_channel(2 * d_a, d_a, 3, rng)?),
                offset,
            },
        );
        push(
            "honest-mixture",
            AliceStrategy::GenericSubchannels {
                instrument: mixed_instrument(&honest, &permuted_instrument(&honest2, &perm)?, 0.3)?,
                channel: None,
                offset,
            },
        );
        push(
            "shift-a",
            AliceStrategy::GenericSubchannels {
                instrument: honest.clone(),
                channel: Some(shift_channel(d_a, 1)?),
                offset,
            },
        );
        push(
            "clock-a",
            AliceStrategy::GenericSubchannels {
                instrument: honest.clone(),
                channel: Some(Channel::new(vec![weyl_matrix(d_a, 0, 1)])?),
                offset,
            },
        );
        push(
            "depolarize-a",
            AliceStrategy::GenericSubchannels {
                instrument: honest.clone(),
                channel: Some(depolarizing(d_a, 0.4)?),
                offset,
            },
        );
    }
    out.push(NamedStrategy {
        name: "saturating-shift".into(),
        strategy: saturating_shift_strategy(params, &secret, 1)?,
    });
    Ok(out)
}
