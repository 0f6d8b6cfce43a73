//! Universal quantum maskers.
//!
//! A masker is a unitary `M: C⊗S → A⊗B` together with a safe state `ω_S`;
//! masking a secret `ρ_C` produces `M(ρ_C ⊗ ω_S)M†`, whose two marginals on
//! `A` and `B` do not depend on `ρ_C`.
//!
//! Every masker here uses the canonical subsystem labels `C`, `S`, `A`, `B`
//! internally; [`Masker::share_names`] carries the names the shares are shown
//! under (the dual of the minimal masker hands out shares `B` and `K`).

mod dual;
mod families;
mod io;
mod verify;

use serde::{Deserialize, Serialize};

use crate::qudit::{DensityOperator, Dim, Ensemble, Register, Unitary};
use crate::{Error, Result};

pub use dual::{
    dual_masker, factor_isometry, masker_isometry, purify_safe, qss23_check, DualMasker, Factorization, QssReport,
    SafeKeyState,
};
pub use families::{masker_four_qudit, masker_identity, masker_minimal, masker_minimal_dual, masker_qotp};
pub use io::{export_masker, import_masker, MaskerDescriptor};
pub use verify::{
    classical_off_block_mass, entropy_audit, probe_states, verify_masking, EntropyAudit, MaskingReport, MASKING_TOL,
};

pub const SECRET: &str = "C";
pub const SAFE: &str = "S";
pub const SHARE_A: &str = "A";
pub const SHARE_B: &str = "B";
pub const KEY: &str = "K";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    FourQudit,
    Qotp,
    Minimal,
    MinimalDual,
    /// `M = I`, `ω_S = |0⟩⟨0|`: hides nothing.
    Identity,
    /// Produced numerically, e.g. by dual synthesis.
    Synthesized,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::FourQudit => "four-qudit",
            Family::Qotp => "qotp",
            Family::Minimal => "minimal",
            Family::MinimalDual => "minimal-dual",
            Family::Identity => "identity",
            Family::Synthesized => "synthesized",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        [Family::FourQudit, Family::Qotp, Family::Minimal, Family::MinimalDual, Family::Identity, Family::Synthesized]
            .into_iter()
            .find(|f| f.name() == s)
    }

    /// The four circuit families of the masker catalogue.
    pub fn catalogue() -> [Family; 4] {
        [Family::FourQudit, Family::Qotp, Family::Minimal, Family::MinimalDual]
    }

    /// Builds the family at dimension `d`; `None` for non-circuit families.
    pub fn build(self, d: Dim) -> Option<Result<Masker>> {
        Some(match self {
            Family::FourQudit => masker_four_qudit(d),
            Family::Qotp => masker_qotp(d),
            Family::Minimal => masker_minimal(d),
            Family::MinimalDual => masker_minimal_dual(d),
            Family::Identity => masker_identity(d),
            Family::Synthesized => return None,
        })
    }

    /// Whether the family masks at dimension `d`.
    pub fn masks_at(self, d: usize) -> bool {
        match self {
            Family::Minimal | Family::MinimalDual => d % 2 == 1,
            Family::Identity => false,
            _ => true,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Masker {
    family: Family,
    d: Dim,
    unitary: Unitary,
    safe_state: DensityOperator,
    share_names: [String; 2],
}

impl Masker {
    /// `unitary` must map `[C, S]` to `[A, B]` and `safe_state` live on `[S]`.
    pub fn new(family: Family, unitary: Unitary, safe_state: DensityOperator) -> Result<Self> {
        let inp = unitary.in_register();
        let out = unitary.out_register();
        if inp.labels() != [SECRET, SAFE] || out.labels() != [SHARE_A, SHARE_B] {
            return Err(Error::RegisterMismatch(format!(
                "masker unitary must map [C, S] to [A, B], got {inp} -> {out}"
            )));
        }
        let d = Dim::new(inp.dim_of(SECRET)?)?;
        let safe_reg = safe_state.register();
        if safe_reg.labels() != [SAFE] || safe_reg.total_dim() != inp.dim_of(SAFE)? {
            return Err(Error::RegisterMismatch(format!(
                "safe state must live on S of dimension {}, got {safe_reg}",
                inp.dim_of(SAFE)?
            )));
        }
        safe_state.validate()?;
        Ok(Masker { family, d, unitary, safe_state, share_names: [SHARE_A.to_string(), SHARE_B.to_string()] })
    }

    pub fn with_share_names(mut self, names: [&str; 2]) -> Self {
        self.share_names = [names[0].to_string(), names[1].to_string()];
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> Dim {
        self.d
    }

    pub fn unitary(&self) -> &Unitary {
        &self.unitary
    }

    pub fn safe_state(&self) -> &DensityOperator {
        &self.safe_state
    }

    pub fn share_names(&self) -> &[String; 2] {
        &self.share_names
    }

    pub fn secret_register(&self) -> Register {
        Register::from_parts(vec![SECRET.into()], vec![self.d]).expect("single label")
    }

    pub fn share_register(&self) -> &Register {
        self.unitary.out_register()
    }

    pub fn safe_dim(&self) -> usize {
        self.safe_state.register().total_dim()
    }

    fn secret_in_place(&self, reg: &Register) -> Result<()> {
        if reg.len() != 1 || reg.total_dim() != self.d.get() {
            return Err(Error::RegisterMismatch(format!(
                "secret must be a single subsystem of dimension {}, got {reg}",
                self.d
            )));
        }
        Ok(())
    }

    /// `M(ρ_C ⊗ ω_S)M†` on `[A, B]`. Any single-subsystem register of the
    /// right dimension is accepted as the secret.
    pub fn mask(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.secret_in_place(rho.register())?;
        let rho = rho.relabel(&[SECRET])?;
        rho.tensor(&self.safe_state)?.apply(&self.unitary)
    }

    /// Masking through the ensemble representation, for registers where the
    /// output density matrix would be large.
    pub fn mask_ensemble(&self, secret: &Ensemble) -> Result<Ensemble> {
        self.secret_in_place(secret.register())?;
        let secret = Ensemble::new(self.secret_register(), secret.members().to_vec())?;
        secret.tensor(&Ensemble::from_density(&self.safe_state))?.apply(&self.unitary)
    }

    /// Applies `M†` and traces out `S`.
    pub fn unmask(&self, masked: &DensityOperator) -> Result<DensityOperator> {
        if !masked.register().same_set(self.unitary.out_register()) {
            return Err(Error::RegisterMismatch(format!(
                "masked state must live on {}, got {}",
                self.unitary.out_register(),
                masked.register()
            )));
        }
        masked.apply(&self.unitary.adjoint())?.reduced(&[SECRET])
    }

    pub fn unmask_ensemble(&self, masked: &Ensemble) -> Result<DensityOperator> {
        masked.apply(&self.unitary.adjoint())?.reduced(&[SECRET])
    }

    /// The constant output marginals `(σ_A, σ_B)`, read off from masking `I/d`.
    pub fn marginals(&self) -> Result<(DensityOperator, DensityOperator)> {
        let mixed = Ensemble::from_density(&DensityOperator::maximally_mixed(self.secret_register()));
        let out = self.mask_ensemble(&mixed)?;
        Ok((out.reduced(&[SHARE_A])?, out.reduced(&[SHARE_B])?))
    }
}
