//! The quantum one-time table (QOTT) commodity.
//!
//! The trusted initializer prepares
//! `(I_E ⊗ M_{CS→AB} ⊗ X_K^{j₁i₁} Z_K^{j₂i₂}) |Θ⟩_EC |Ω⟩_SK`
//! and hands Alice `(E, A)` with the index card `(i₁, i₂) ∈ Z_p²`, and Bob
//! `(B, K)` with the index card `(j₁, j₂) ∈ J²`. Without `i`, the lock on `K`
//! averages `|Ω⟩` to `ω_S ⊗ ω_K`, which is what hides the commitment.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::src_classical;
use crate::maskers::{
    export_masker, import_masker, masker_four_qudit, masker_minimal, purify_safe, Family, Masker, SafeKeyState, KEY,
    SAFE, SECRET,
};
use crate::qudit::{
    clock_matrix, entropy_of_spectrum, max_entangled, read_container, shift_matrix, trace_distance, write_container,
    Container, DensityOperator, Dim, Ensemble, Matrix, PureState, STATE_TOL,
};
use crate::rng::seeded;
use crate::{Error, Result};

/// Alice's half of the maximally entangled pair.
pub const ENTANGLED: &str = "E";

#[derive(Clone, Debug)]
pub struct QottParams {
    p: Dim,
    j_set: Vec<usize>,
    masker: Masker,
    key: SafeKeyState,
}

fn check_safe_spectrum(masker: &Masker, p: usize) -> Result<()> {
    let ev = masker.safe_state().eigenvalues();
    let level = 1.0 / p as f64;
    let top = &ev[ev.len().saturating_sub(p)..];
    let rest = &ev[..ev.len().saturating_sub(p)];
    let dev = top.iter().map(|v| (v - level).abs()).chain(rest.iter().map(|v| v.abs())).fold(0.0, f64::max);
    if top.len() != p || dev > STATE_TOL {
        return Err(Error::InvalidParameters(format!(
            "safe state must have the single eigenvalue 1/{p} with multiplicity {p} (deviation {dev:e})"
        )));
    }
    Ok(())
}

impl QottParams {
    pub fn new(p: usize, j_set: &[usize], masker: Masker) -> Result<Self> {
        let mut j: Vec<usize> = j_set.to_vec();
        j.sort_unstable();
        j.dedup();
        if j.len() != j_set.len() {
            return Err(Error::InvalidParameters("J has repeated entries".into()));
        }
        if j.len() < 2 {
            return Err(Error::InvalidParameters(format!("|J| = {} but at least 2 is required", j.len())));
        }
        Self::build(p, j, masker)
    }

    /// Skips the `|J| ≥ 2` and `J ⊆ Z_p^×` checks. Only for diagnostics such
    /// as entropy bookkeeping at `|J| = 1`; the protocol rejects it.
    pub fn diagnostic(p: usize, j_set: &[usize], masker: Masker) -> Result<Self> {
        let p_dim = Dim::prime(p)?;
        Self::finish(p_dim, j_set.to_vec(), masker)
    }

    pub fn with_family(p: usize, j_set: &[usize], family: Family) -> Result<Self> {
        let d = Dim::prime(p)?;
        let masker = match family {
            Family::Minimal => masker_minimal(d)?,
            Family::FourQudit => masker_four_qudit(d)?,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "the {other} masker does not have a safe state of rank p"
                )))
            }
        };
        Self::new(p, j_set, masker)
    }

    /// Default parameters: the minimal masker at dimension `p`.
    pub fn minimal(p: usize, j_set: &[usize]) -> Result<Self> {
        Self::with_family(p, j_set, Family::Minimal)
    }

    fn build(p: usize, j: Vec<usize>, masker: Masker) -> Result<Self> {
        let p_dim = Dim::prime(p)?;
        if let Some(bad) = j.iter().find(|&&x| x == 0 || x >= p) {
            return Err(Error::InvalidParameters(format!("J entry {bad} is not a unit mod {p}")));
        }
        Self::finish(p_dim, j, masker)
    }

    fn finish(p: Dim, j_set: Vec<usize>, masker: Masker) -> Result<Self> {
        if masker.d() != p {
            return Err(Error::InvalidParameters(format!("masker dimension {} differs from p = {p}", masker.d())));
        }
        check_safe_spectrum(&masker, p.get())?;
        let key = purify_safe(&masker)?;
        Ok(QottParams { p, j_set, masker, key })
    }

    pub fn p(&self) -> usize {
        self.p.get()
    }

    pub fn dim(&self) -> Dim {
        self.p
    }

    pub fn j_set(&self) -> &[usize] {
        &self.j_set
    }

    pub fn masker(&self) -> &Masker {
        &self.masker
    }

    /// `|Ω⟩_SK`.
    pub fn safe_key(&self) -> &SafeKeyState {
        &self.key
    }

    /// Every Bob card in `J²`, in lexicographic order.
    pub fn bob_cards(&self) -> Vec<[usize; 2]> {
        let j = &self.j_set;
        j.iter().flat_map(|&a| j.iter().map(move |&b| [a, b])).collect()
    }

    /// Every Alice card in `Z_p²`, in lexicographic order.
    pub fn alice_cards(&self) -> Vec<[usize; 2]> {
        let p = self.p();
        (0..p).flat_map(|a| (0..p).map(move |b| [a, b])).collect()
    }
}

/// The classical index cards. Each card is visible only to its owner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCards {
    /// `(i₁, i₂) ∈ Z_p²`, Alice's.
    pub alice: [usize; 2],
    /// `(j₁, j₂) ∈ J²`, Bob's.
    pub bob: [usize; 2],
}

impl IndexCards {
    pub fn draw(params: &QottParams, rng: &mut impl rand::Rng) -> IndexCards {
        let p = params.p();
        let j = params.j_set();
        IndexCards {
            alice: [rng.random_range(0..p), rng.random_range(0..p)],
            bob: [j[rng.random_range(0..j.len())], j[rng.random_range(0..j.len())]],
        }
    }

    pub fn validate(&self, params: &QottParams) -> Result<()> {
        let p = params.p();
        if self.alice.iter().any(|&i| i >= p) {
            return Err(Error::InvalidParameters(format!("Alice's card {:?} is outside Z_{p}", self.alice)));
        }
        if self.bob.iter().any(|b| !params.j_set().contains(b)) {
            return Err(Error::InvalidParameters(format!("Bob's card {:?} is outside J", self.bob)));
        }
        Ok(())
    }
}

/// `X^{j₁i₁} Z^{j₂i₂}`.
pub fn lock(p: usize, alice: [usize; 2], bob: [usize; 2]) -> Matrix {
    let x = (bob[0] * alice[0]) as i64;
    let z = (bob[1] * alice[1]) as i64;
    shift_matrix(p, x) * clock_matrix(p, z)
}

/// `Z^{-j₂k₂} X^{-j₁k₁}` for revealed indices `k`.
pub fn unlock(p: usize, revealed: [usize; 2], bob: [usize; 2]) -> Matrix {
    let x = (bob[0] * revealed[0]) as i64;
    let z = (bob[1] * revealed[1]) as i64;
    clock_matrix(p, -z) * shift_matrix(p, -x)
}

#[derive(Clone, Debug)]
pub struct QottCommodity {
    /// Over `[E, A, B, K]`.
    pub state: PureState,
    pub params: QottParams,
    pub cards: IndexCards,
}

/// `|Θ⟩_EC |Ω⟩_SK` pushed through the masker, before locking.
pub fn unlocked_state(params: &QottParams) -> Result<PureState> {
    let theta = max_entangled(params.dim(), [ENTANGLED, SECRET])?;
    let omega = params.safe_key().state();
    if !omega.register().contains(KEY) {
        return Err(Error::InvalidParameters("safe-key state has no key system".into()));
    }
    theta.tensor(omega)?.apply(params.masker().unitary())
}

/// Draws cards from `seed` when none are given.
pub fn build_qott(params: &QottParams, cards: Option<IndexCards>, seed: u64) -> Result<QottCommodity> {
    let cards = match cards {
        Some(c) => c,
        None => IndexCards::draw(params, &mut seeded(seed)),
    };
    cards.validate(params)?;
    let state = unlocked_state(params)?.apply_on(&lock(params.p(), cards.alice, cards.bob), &[KEY])?;
    Ok(QottCommodity { state, params: params.clone(), cards })
}

/// Largest trace distance between `ω_S ⊗ ω_K` and the lock-averaged
/// `|Ω⟩⟨Ω|`, over Bob's cards in `J²`.
pub fn twirl_check(params: &QottParams) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in params.bob_cards() {
        worst = worst.max(twirl_deviation(params, j)?);
    }
    Ok(worst)
}

/// Twirl deviation for one Bob card, which need not lie in `J`.
pub fn twirl_deviation(params: &QottParams, bob: [usize; 2]) -> Result<f64> {
    let omega = params.safe_key().state();
    let reg = omega.register().clone();
    let p = params.p();
    let mut avg = DensityOperator::zero(reg.clone());
    for i in params.alice_cards() {
        let locked = omega.apply_on(&lock(p, i, bob), &[KEY])?;
        avg = avg.add(&locked.density().scaled(1.0 / (p * p) as f64))?;
    }
    let target = omega.reduced(&[SAFE])?.tensor(&omega.reduced(&[KEY])?)?;
    trace_distance(&avg, &target)
}

/// Entropy of the uniform mixture over all card pairs of the commodity state
/// tensored with orthogonal card registers. Computed block by block from
/// each block's spectrum, so a mixed block would show up.
pub fn commodity_entropy(params: &QottParams) -> Result<f64> {
    let base = unlocked_state(params)?;
    let p = params.p();
    let weight = 1.0 / (params.alice_cards().len() * params.j_set().len().pow(2)) as f64;
    let mut spectrum = Vec::new();
    for j in params.j_set().iter().flat_map(|&a| params.j_set().iter().map(move |&b| [a, b])) {
        for i in params.alice_cards() {
            let block = base.apply_on(&lock(p, i, j), &[KEY])?;
            let e = Ensemble::from_pure(&block).scaled(weight);
            spectrum.extend(e.spectrum());
        }
    }
    entropy_of_spectrum(&spectrum)
}

#[derive(Clone, Debug, Serialize)]
pub struct SrcRow {
    pub scheme: String,
    pub formula: String,
    pub bits: f64,
    /// Entropy of an explicitly enumerated commodity, where one is built.
    pub enumerated_bits: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SrcReport {
    pub p: usize,
    pub j_size: usize,
    /// Field size of the classical line/point scheme.
    pub classical_field: usize,
    pub rows: Vec<SrcRow>,
}

/// Largest `p` for which the QOTT ensemble is enumerated in the report.
const ENUMERATE_QOTT_UP_TO: usize = 7;
const ENUMERATE_CLASSICAL_UP_TO: usize = 101;

/// Shared-randomness cost of the four commitment routes at `(p, J)`.
/// `classical_field` is the field size `p′` of the classical scheme, which
/// sets its failure probability `1/p′`; it defaults to `p`.
pub fn src_report(p: usize, j_set: &[usize], classical_field: Option<usize>) -> Result<SrcReport> {
    let params = QottParams::minimal(p, j_set)?;
    let pf = classical_field.unwrap_or(p);
    Dim::prime(pf)?;
    let lp = (p as f64).log2();
    let lj = (j_set.len() as f64).log2();
    let lf = (pf as f64).log2();
    let qott_enum = if p <= ENUMERATE_QOTT_UP_TO { Some(commodity_entropy(&params)?) } else { None };
    let classical_enum = if pf <= ENUMERATE_CLASSICAL_UP_TO { Some(src_classical(pf)?) } else { None };
    let rows = vec![
        SrcRow {
            scheme: "qott".into(),
            formula: "2 log2 p + 2 log2 |J|".into(),
            bits: 2.0 * lp + 2.0 * lj,
            enumerated_bits: qott_enum,
            note: format!("qubit commitment of a {p}-dimensional state, binding failure 1/|J|"),
        },
        SrcRow {
            scheme: "qotp-via-rivest".into(),
            formula: "6 log2 p".into(),
            bits: 6.0 * lp,
            enumerated_bits: None,
            note: "one-time-pad the state, then commit both pad dits classically".into(),
        },
        SrcRow {
            scheme: "rivest-bit".into(),
            formula: "2 log2 p + 2 log2 p'".into(),
            bits: 2.0 * lp + 2.0 * lf,
            enumerated_bits: classical_enum,
            note: format!(
                "classical commitment over Z_{pf}, binding failure 1/{pf}; the enumerated \
                 line/point table carries 3 log2 p'"
            ),
        },
        SrcRow {
            scheme: "superdense".into(),
            formula: "log2 p + 2 log2 |J|".into(),
            bits: lp + 2.0 * lj,
            enumerated_bits: None,
            note: "a log2 p-bit message superdense-coded into a qudit of dimension sqrt(p)".into(),
        },
    ];
    Ok(SrcReport { p, j_size: j_set.len(), classical_field: pf, rows })
}

pub const COMMODITY_FILE: &str = "commodity.qdtc";
pub const CARDS_FILE: &str = "cards.json";
pub const MASKER_DIR: &str = "masker";

/// One index card with its visibility tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnedCard {
    pub owner: String,
    pub visible_to: Vec<String>,
    pub indices: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardFile {
    pub p: usize,
    pub j_set: Vec<usize>,
    pub cards: Vec<OwnedCard>,
}

impl CardFile {
    fn card(&self, owner: &str) -> Result<[usize; 2]> {
        self.cards
            .iter()
            .find(|c| c.owner == owner)
            .map(|c| c.indices)
            .ok_or_else(|| Error::Format(format!("{CARDS_FILE} has no card for {owner}")))
    }
}

/// Writes the state, the tagged cards and the masker under `dir`.
pub fn export_commodity(commodity: &QottCommodity, dir: &Path) -> Result<CardFile> {
    std::fs::create_dir_all(dir)?;
    export_masker(commodity.params.masker(), &dir.join(MASKER_DIR))?;
    write_container(
        &mut BufWriter::new(File::create(dir.join(COMMODITY_FILE))?),
        &Container::Pure(commodity.state.clone()),
    )?;
    let tagged = |owner: &str, indices| OwnedCard { owner: owner.into(), visible_to: vec![owner.into()], indices };
    let cards = CardFile {
        p: commodity.params.p(),
        j_set: commodity.params.j_set().to_vec(),
        cards: vec![tagged("Alice", commodity.cards.alice), tagged("Bob", commodity.cards.bob)],
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(CARDS_FILE))?), &cards)?;
    Ok(cards)
}

/// Reads an exported commodity and checks the state against a rebuild from
/// the cards.
pub fn import_commodity(dir: &Path) -> Result<QottCommodity> {
    let file: CardFile = serde_json::from_reader(BufReader::new(File::open(dir.join(CARDS_FILE))?))?;
    let masker = import_masker(&dir.join(MASKER_DIR))?;
    let params = QottParams::new(file.p, &file.j_set, masker)?;
    let cards = IndexCards { alice: file.card("Alice")?, bob: file.card("Bob")? };
    let state = match read_container(&mut BufReader::new(File::open(dir.join(COMMODITY_FILE))?))? {
        Container::Pure(s) => s,
        _ => return Err(Error::Format(format!("{COMMODITY_FILE} does not hold a pure state"))),
    };
    let rebuilt = build_qott(&params, Some(cards), 0)?;
    let diff = (rebuilt.state.amplitudes() - state.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rebuilt.state.register() != state.register() || diff > 1e-12 {
        return Err(Error::Format(format!("stored commodity does not match its cards (deviation {diff:e})")));
    }
    Ok(QottCommodity { state, params, cards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskers::{SHARE_A, SHARE_B};
    use crate::qudit::{von_neumann_entropy, weyl_matrix};

    #[test]
    fn parameter_validation() {
        assert!(QottParams::minimal(3, &[1, 2]).is_ok());
        assert!(matches!(QottParams::minimal(4, &[1, 2]), Err(Error::NotPrime(4))));
        assert!(QottParams::minimal(5, &[1]).is_err());
        assert!(QottParams::minimal(5, &[0, 1]).is_err());
        assert!(QottParams::minimal(5, &[1, 5]).is_err());
        assert!(QottParams::minimal(5, &[1, 1]).is_err());
        assert!(QottParams::with_family(3, &[1, 2], Family::Qotp).is_err());
        let qotp = crate::maskers::masker_qotp(Dim::new(3).unwrap()).unwrap();
        assert!(QottParams::new(3, &[1, 2], qotp).is_err());
        assert!(QottParams::with_family(3, &[1, 2], Family::FourQudit).is_ok());
    }

    #[test]
    fn zero_alice_card_means_no_lock() {
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        let cards = IndexCards { alice: [0, 0], bob: [1, 1] };
        let q = build_qott(&params, Some(cards), 0).unwrap();
        let base = unlocked_state(&params).unwrap();
        assert_eq!(q.state.register().labels(), [ENTANGLED, SHARE_A, SHARE_B, KEY]);
        assert!((q.state.amplitudes() - base.amplitudes()).norm() <= 1e-12);
    }

    #[test]
    fn commodity_matches_the_constructive_formula() {
        // Independent of build_qott: expand the formula amplitude by amplitude.
        let p = 3;
        let params = QottParams::minimal(p, &[1, 2]).unwrap();
        let cards = IndexCards { alice: [2, 1], bob: [2, 1] };
        let q = build_qott(&params, Some(cards), 0).unwrap();
        let m = params.masker().unitary().matrix();
        let l = weyl_matrix(p, 4, 1);
        let n = p * p * p * p;
        let mut expect = crate::qudit::Vector::zeros(n);
        let amp = 1.0 / p as f64;
        for e in 0..p {
            for s in 0..p {
                // |Θ⟩|Ω⟩ has amplitude 1/p on |e, c=e, s, k=s⟩.
                for a in 0..p {
                    for b in 0..p {
                        for k in 0..p {
                            let z = m[(a * p + b, e * p + s)] * l[(k, s)] * amp;
                            expect[((e * p + a) * p + b) * p + k] += z;
                        }
                    }
                }
            }
        }
        assert!((q.state.amplitudes() - expect).norm() <= 1e-12);
    }

    #[test]
    fn halves_of_the_commodity_are_maximally_mixed() {
        let params = QottParams::minimal(5, &[1, 2]).unwrap();
        let q = build_qott(&params, None, 99).unwrap();
        assert!((q.state.norm_sqr() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(q.state.register().subset(&[SHARE_B, KEY]).unwrap());
        let bob = q.state.reduced(&[SHARE_B, KEY]).unwrap();
        assert!(trace_distance(&bob, &mixed).unwrap() <= 1e-10);
        let alice = q.state.reduced(&[ENTANGLED, SHARE_A]).unwrap();
        let mixed_a = DensityOperator::maximally_mixed(alice.register().clone());
        assert!(trace_distance(&alice, &mixed_a).unwrap() <= 1e-10);
        assert!(von_neumann_entropy(&q.state.density()).unwrap().abs() < 1e-9);
    }

    #[test]
    fn seeded_builds_are_bit_identical() {
        let params = QottParams::minimal(5, &[1, 2, 3]).unwrap();
        let a = build_qott(&params, None, 1234).unwrap();
        let b = build_qott(&params, None, 1234).unwrap();
        assert_eq!(a.cards, b.cards);
        assert_eq!(a.state.amplitudes(), b.state.amplitudes());
    }

    #[test]
    fn twirl_is_exact_for_legal_cards_and_fails_at_zero() {
        for (p, j) in [(3usize, vec![1, 2]), (5, vec![1, 2, 3, 4])] {
            let params = QottParams::minimal(p, &j).unwrap();
            assert!(twirl_check(&params).unwrap() <= 1e-10);
            // With j = 0 the lock is the identity and |Ω⟩ stays pure:
            // TD(|Ω⟩⟨Ω|, I/p²) = 1 − 1/p².
            let dev = twirl_deviation(&params, [0, 0]).unwrap();
            assert!((dev - (1.0 - 1.0 / (p * p) as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn one_zero_exponent_only_half_twirls() {
        // Only the Z lock active: the average dephases |Ω⟩ without
        // flattening it, leaving (1/p) Σ |jj⟩⟨jj| at distance 1 − 1/p.
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        let dev = twirl_deviation(&params, [0, 1]).unwrap();
        assert!((dev - (1.0 - 1.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn commodity_entropy_is_all_card_entropy() {
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        let h = commodity_entropy(&params).unwrap();
        assert!((h - (2.0 * 3f64.log2() + 2.0)).abs() < 1e-9);
        let single = QottParams::diagnostic(3, &[1], params.masker().clone()).unwrap();
        assert!((commodity_entropy(&single).unwrap() - 2.0 * 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn src_rows_follow_their_formulas() {
        let r = src_report(5, &[1, 2], None).unwrap();
        let l5 = 5f64.log2();
        let by = |s: &str| r.rows.iter().find(|row| row.scheme == s).unwrap().clone();
        assert!((by("qott").bits - (2.0 * l5 + 2.0)).abs() < 1e-12);
        assert!((by("qott").enumerated_bits.unwrap() - (2.0 * l5 + 2.0)).abs() < 1e-9);
        assert!((by("qotp-via-rivest").bits - 6.0 * l5).abs() < 1e-12);
        assert!((by("rivest-bit").bits - 4.0 * l5).abs() < 1e-12);
        assert!((by("rivest-bit").enumerated_bits.unwrap() - 3.0 * l5).abs() < 1e-9);
        assert!((by("superdense").bits - (l5 + 2.0)).abs() < 1e-12);
        let wider = src_report(5, &[1, 2, 3, 4], None).unwrap();
        assert!(wider.rows[0].bits > r.rows[0].bits);
    }

    #[test]
    fn commodity_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        let c = build_qott(&params, None, 12).unwrap();
        let cards = export_commodity(&c, dir.path()).unwrap();
        assert!(cards.cards.iter().all(|k| k.visible_to == vec![k.owner.clone()]));
        let back = import_commodity(dir.path()).unwrap();
        assert_eq!(back.cards, c.cards);
        assert_eq!(back.state.amplitudes(), c.state.amplitudes());
    }

    #[test]
    fn tampered_cards_are_detected() {
        let dir = tempfile::tempdir().unwrap();
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        let c = build_qott(&params, Some(IndexCards { alice: [1, 1], bob: [1, 2] }), 0).unwrap();
        let mut cards = export_commodity(&c, dir.path()).unwrap();
        cards.cards[0].indices = [2, 1];
        serde_json::to_writer(File::create(dir.path().join(CARDS_FILE)).unwrap(), &cards).unwrap();
        assert!(matches!(import_commodity(dir.path()), Err(Error::Format(_))));
    }
}
