//! Branch store with per-party ownership of registers and index cards.
//!
//! Every operation goes through a [`Party`] and touches only registers that
//! party holds at that moment; anything else is a
//! [`ViewViolation`](crate::Error::ViewViolation). Each successful access is
//! logged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::Commitment;
use crate::maskers::{KEY, SHARE_A, SHARE_B};
use crate::qott::{build_qott, IndexCards, QottParams, ENTANGLED};
use crate::qudit::{DensityOperator, Ensemble, Matrix, Register, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    Ted,
    Alice,
    Bob,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Ted => "Ted",
            Role::Alice => "Alice",
            Role::Bob => "Bob",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Phase {
    Setup,
    Commit,
    Tamper,
    Reveal,
    Done,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Access {
    pub phase: Phase,
    pub role: Role,
    pub registers: Vec<String>,
    /// Whose card was read, if any.
    pub card: Option<Role>,
}

/// What one party holds at a phase boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyView {
    pub role: Role,
    pub phase: Phase,
    pub registers: Vec<String>,
    pub facts: Vec<String>,
}

#[derive(Clone, Debug)]
pub(crate) struct Branch {
    pub msg: Option<Commitment>,
    pub state: Ensemble,
}

#[derive(Clone, Debug)]
pub struct Engine {
    params: QottParams,
    cards: IndexCards,
    phase: Phase,
    register: Register,
    owners: BTreeMap<String, Role>,
    facts: BTreeMap<Role, BTreeSet<String>>,
    branches: Vec<Branch>,
    log: Vec<Access>,
}

/// Per-branch result of Bob's projective check.
#[derive(Clone, Debug)]
pub(crate) struct CheckedBranch {
    pub msg: Commitment,
    pub weight: f64,
    pub pass: DensityOperator,
    pub full: DensityOperator,
}

impl Engine {
    /// Ted prepares the commodity and delivers `(E, A)` and the first card
    /// to Alice, `(B, K)` and the second to Bob.
    pub fn setup(params: &QottParams, cards: IndexCards) -> Result<Engine> {
        let commodity = build_qott(params, Some(cards), 0)?;
        let register = commodity.state.register().clone();
        let mut eng = Engine {
            params: params.clone(),
            cards,
            phase: Phase::Setup,
            register: register.clone(),
            owners: register.labels().iter().map(|l| (l.clone(), Role::Ted)).collect(),
            facts: BTreeMap::new(),
            branches: vec![Branch { msg: None, state: Ensemble::from_pure(&commodity.state) }],
            log: Vec::new(),
        };
        eng.log.push(Access {
            phase: Phase::Setup,
            role: Role::Ted,
            registers: register.labels().to_vec(),
            card: None,
        });
        for (label, role) in [(ENTANGLED, Role::Alice), (SHARE_A, Role::Alice), (SHARE_B, Role::Bob), (KEY, Role::Bob)]
        {
            eng.owners.insert(label.to_string(), role);
        }
        eng.learn(Role::Alice, "card:Alice");
        eng.learn(Role::Bob, "card:Bob");
        eng.phase = Phase::Commit;
        Ok(eng)
    }

    pub fn params(&self) -> &QottParams {
        &self.params
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn log(&self) -> &[Access] {
        &self.log
    }

    /// Registers held by `role`, in global register order.
    pub fn holdings(&self, role: Role) -> Vec<String> {
        self.register.labels().iter().filter(|l| self.owners.get(*l) == Some(&role)).cloned().collect()
    }

    pub fn view(&self, role: Role) -> PartyView {
        PartyView {
            role,
            phase: self.phase,
            registers: self.holdings(role),
            facts: self.facts.get(&role).map(|s| s.iter().cloned().collect()).unwrap_or_default(),
        }
    }

    pub fn views(&self) -> Vec<PartyView> {
        [Role::Ted, Role::Alice, Role::Bob].into_iter().map(|r| self.view(r)).collect()
    }

    /// Act as `role`.
    pub fn party(&mut self, role: Role) -> Party<'_> {
        Party { eng: self, role }
    }

    /// Probability of every commit message, once committed.
    pub fn commit_distribution(&self) -> Vec<(Commitment, f64)> {
        self.branches.iter().filter_map(|b| b.msg.map(|m| (m, b.state.trace()))).collect()
    }

    pub(crate) fn advance(&mut self, phase: Phase) {
        self.phase = phase;
    }

    fn learn(&mut self, role: Role, fact: &str) {
        self.facts.entry(role).or_default().insert(fact.to_string());
    }

    fn guard<S: AsRef<str>>(&mut self, role: Role, labels: &[S], card: Option<Role>) -> Result<()> {
        for l in labels {
            let l = l.as_ref();
            match self.owners.get(l) {
                Some(owner) if *owner == role => {}
                Some(owner) => {
                    return Err(Error::ViewViolation {
                        role: role.to_string(),
                        what: format!("register {l} held by {owner}"),
                    })
                }
                None => return Err(Error::UnknownLabel(l.to_string())),
            }
        }
        self.log.push(Access {
            phase: self.phase,
            role,
            registers: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            card,
        });
        Ok(())
    }

    fn map_branches(&mut self, f: impl Fn(&Branch) -> Result<Ensemble>) -> Result<()> {
        let mut next = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            next.push(Branch { msg: b.msg, state: f(b)? });
        }
        if let Some(first) = next.first() {
            self.register = first.state.register().clone();
        }
        self.branches = next;
        Ok(())
    }

    fn reassign<S: AsRef<str>>(&mut self, role: Role, removed: &[S], added: &Register) {
        for l in removed {
            self.owners.remove(l.as_ref());
        }
        for l in added.labels() {
            self.owners.insert(l.clone(), role);
        }
    }
}

/// A handle that acts on the engine with one party's permissions.
pub struct Party<'a> {
    eng: &'a mut Engine,
    role: Role,
}

impl Party<'_> {
    pub fn role(&self) -> Role {
        self.role
    }

    /// Reads `owner`'s index card; only the owner may.
    pub fn card_of(&mut self, owner: Role) -> Result<[usize; 2]> {
        let card = match owner {
            Role::Alice => self.eng.cards.alice,
            Role::Bob => self.eng.cards.bob,
            Role::Ted => {
                return Err(Error::ViewViolation { role: self.role.to_string(), what: "Ted keeps no card".into() })
            }
        };
        if owner != self.role {
            return Err(Error::ViewViolation { role: self.role.to_string(), what: format!("{owner}'s index card") });
        }
        let phase = self.eng.phase;
        self.eng.log.push(Access { phase, role: self.role, registers: Vec::new(), card: Some(owner) });
        Ok(card)
    }

    pub fn card(&mut self) -> Result<[usize; 2]> {
        let role = self.role;
        self.card_of(role)
    }

    /// Reads the registers of the global state the party does not hold.
    pub fn inspect<S: AsRef<str>>(&mut self, labels: &[S]) -> Result<()> {
        self.eng.guard(self.role, labels, None)
    }

    /// Tensors a freshly prepared state onto every branch.
    pub fn adjoin(&mut self, state: &Ensemble) -> Result<()> {
        if let Some(l) = state.register().labels().iter().find(|l| self.eng.register.contains(l)) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
        let labels = state.register().labels().to_vec();
        self.eng.map_branches(|b| b.state.tensor(state))?;
        let role = self.role;
        self.eng.reassign::<String>(role, &[], state.register());
        self.eng.log.push(Access { phase: self.eng.phase, role, registers: labels, card: None });
        Ok(())
    }

    pub fn send<S: AsRef<str>>(&mut self, labels: &[S], to: Role) -> Result<()> {
        self.eng.guard(self.role, labels, None)?;
        for l in labels {
            self.eng.owners.insert(l.as_ref().to_string(), to);
        }
        Ok(())
    }

    /// Tells `to` a classical fact.
    pub fn announce(&mut self, fact: &str, to: Role) {
        self.eng.learn(to, fact);
    }

    pub fn apply_kraus<S: AsRef<str>>(&mut self, kraus: &[Matrix], targets: &[S], outputs: &Register) -> Result<()> {
        self.eng.guard(self.role, targets, None)?;
        self.eng.map_branches(|b| b.state.apply_kraus(kraus, targets, outputs))?;
        let role = self.role;
        self.eng.reassign(role, targets, outputs);
        Ok(())
    }

    pub fn apply_on<S: AsRef<str>>(&mut self, op: &Matrix, targets: &[S]) -> Result<()> {
        let outputs = self.eng.register.subset(targets)?;
        self.apply_kraus(std::slice::from_ref(op), targets, &outputs)
    }

    /// Applies `op(message)` on each committed branch.
    pub fn apply_per_message<S: AsRef<str>>(&mut self, targets: &[S], op: impl Fn(Commitment) -> Matrix) -> Result<()> {
        self.eng.guard(self.role, targets, None)?;
        if self.eng.branches.iter().any(|b| b.msg.is_none()) {
            return Err(Error::Phase("no commit message yet".into()));
        }
        self.eng.map_branches(|b| b.state.apply_on(&op(b.msg.expect("checked above")), targets))
    }

    /// Splits the uncommitted state into one branch per outcome, which
    /// becomes the message sent to Bob.
    pub fn instrument<S: AsRef<str>>(
        &mut self,
        outcomes: &[Vec<Matrix>],
        targets: &[S],
        outputs: &Register,
    ) -> Result<()> {
        if self.eng.phase != Phase::Commit || self.eng.branches.len() != 1 || self.eng.branches[0].msg.is_some() {
            return Err(Error::Phase("the commit instrument runs once, before any message".into()));
        }
        self.eng.guard(self.role, targets, None)?;
        let p = self.eng.params.p();
        let base = self.eng.branches[0].state.clone();
        let mut register = None;
        let mut branches = Vec::with_capacity(outcomes.len());
        for (t, kraus) in outcomes.iter().enumerate() {
            let state = if kraus.is_empty() {
                let reg = base.register().without(targets)?;
                let reg = reg.concat(outputs)?;
                Ensemble::empty(reg)
            } else {
                base.apply_kraus(kraus, targets, outputs)?
            };
            register.get_or_insert_with(|| state.register().clone());
            branches.push(Branch { msg: Some(Commitment::from_index(p, t)), state });
        }
        self.eng.register = register.ok_or_else(|| Error::InvalidParameters("instrument has no outcomes".into()))?;
        self.eng.branches = branches;
        let role = self.role;
        self.eng.reassign(role, targets, outputs);
        self.eng.learn(Role::Bob, "message");
        Ok(())
    }

    /// The reduced state on `labels` in every branch.
    pub fn marginals<S: AsRef<str>>(&mut self, labels: &[S]) -> Result<Vec<(Option<Commitment>, DensityOperator)>> {
        self.eng.guard(self.role, labels, None)?;
        self.eng.branches.iter().map(|b| Ok((b.msg, b.state.reduced(labels)?))).collect()
    }

    /// Projects `targets` onto `bra` in each branch and keeps both the
    /// passing part and the unconditioned remainder.
    pub(crate) fn check<S: AsRef<str>>(&mut self, targets: &[S], bra: &Vector) -> Result<Vec<CheckedBranch>> {
        self.eng.guard(self.role, targets, None)?;
        let mut out = Vec::new();
        for b in &self.eng.branches {
            let msg = b.msg.ok_or_else(|| Error::Phase("no commit message yet".into()))?;
            let rest = b.state.register().without(targets)?;
            let passed = b.state.project_out(targets, bra)?;
            let pass = if passed.is_empty() { DensityOperator::zero(rest.clone()) } else { passed.to_density() };
            let full = b.state.reduced(rest.labels())?;
            out.push(CheckedBranch { msg, weight: b.state.trace(), pass, full });
        }
        self.eng.advance(Phase::Done);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        let params = QottParams::minimal(3, &[1, 2]).unwrap();
        Engine::setup(&params, IndexCards { alice: [1, 2], bob: [2, 1] }).unwrap()
    }

    #[test]
    fn setup_hands_out_registers_and_cards() {
        let eng = engine();
        assert_eq!(eng.holdings(Role::Alice), vec!["E", "A"]);
        assert_eq!(eng.holdings(Role::Bob), vec!["B", "K"]);
        assert!(eng.holdings(Role::Ted).is_empty());
        let bob = eng.view(Role::Bob);
        assert!(!bob.facts.iter().any(|f| f.contains("Alice")));
    }

    #[test]
    fn parties_only_touch_their_own_registers() {
        let mut eng = engine();
        let err = eng.party(Role::Alice).inspect(&["K"]).unwrap_err();
        assert!(matches!(err, Error::ViewViolation { .. }));
        let err = eng.party(Role::Bob).card_of(Role::Alice).unwrap_err();
        assert!(matches!(err, Error::ViewViolation { .. }));
        assert!(eng.party(Role::Ted).card().is_err());
        assert_eq!(eng.party(Role::Bob).card().unwrap(), [2, 1]);
        assert!(eng.party(Role::Ted).inspect(&["A"]).is_err());
    }

    #[test]
    fn sent_registers_change_hands() {
        let mut eng = engine();
        eng.party(Role::Alice).send(&["A"], Role::Bob).unwrap();
        assert!(eng.party(Role::Alice).inspect(&["A"]).is_err());
        eng.party(Role::Bob).inspect(&["A", "B"]).unwrap();
    }

    #[test]
    fn log_records_only_permitted_accesses() {
        let mut eng = engine();
        let _ = eng.party(Role::Alice).inspect(&["B"]);
        eng.party(Role::Alice).inspect(&["E"]).unwrap();
        let log = eng.log();
        assert_eq!(log.len(), 2);
        assert_eq!(log[1].registers, vec!["E"]);
    }
}
