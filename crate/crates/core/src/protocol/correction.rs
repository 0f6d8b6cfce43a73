//! Bob's teleportation correction on `C`.
//!
//! Which of `X^{±a}Z^{±b}`, `Z^{±b}X^{±a}` undoes Bell outcome `(a, b)`
//! depends on how the Bell basis is labelled. The convention is fixed once
//! by teleporting a generic state at d = 3 and keeping the first candidate
//! that restores it. At d = 2 every candidate passes, since X and Z are
//! involutions that commute up to a sign, so d = 2 cannot pin it.

use std::sync::OnceLock;

use serde::Serialize;

use crate::qudit::{
    bell_basis, c, clock_matrix, max_entangled, shift_matrix, Dim, Matrix, PureState, Register, Vector,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectionConvention {
    pub x_sign: i8,
    pub z_sign: i8,
    /// `X` is the left factor.
    pub x_first: bool,
}

impl CorrectionConvention {
    pub fn matrix(&self, d: usize, a: usize, b: usize) -> Matrix {
        let x = shift_matrix(d, self.x_sign as i64 * a as i64);
        let z = clock_matrix(d, self.z_sign as i64 * b as i64);
        if self.x_first {
            x * z
        } else {
            z * x
        }
    }

    pub fn label(&self) -> String {
        let x = if self.x_sign > 0 { "X^a" } else { "X^-a" };
        let z = if self.z_sign > 0 { "Z^b" } else { "Z^-b" };
        if self.x_first {
            format!("{x} {z}")
        } else {
            format!("{z} {x}")
        }
    }
}

fn candidates() -> Vec<CorrectionConvention> {
    let mut out = Vec::new();
    for (x_sign, z_sign) in [(1, 1), (-1, -1), (1, -1), (-1, 1)] {
        for x_first in [true, false] {
            out.push(CorrectionConvention { x_sign, z_sign, x_first });
        }
    }
    out
}

/// Worst teleportation fidelity of every candidate at dimension `d`.
pub fn correction_self_test(d: Dim) -> Result<Vec<(CorrectionConvention, f64)>> {
    let n = d.get();
    let phi = Vector::from_fn(n, |j, _| c(1.0 + j as f64, 0.5 * (j * j) as f64 - 0.3)).normalize();
    let phi = PureState::new(Register::single("I", n)?, phi)?;
    let joint = phi.tensor(&max_entangled(d, ["E", "C"])?)?;
    let bells = bell_basis(d, ["I", "E"])?;
    let mut out = Vec::new();
    for cand in candidates() {
        let mut worst: f64 = 1.0;
        for (t, bell) in bells.iter().enumerate() {
            let branch = joint.project_out(&["I", "E"], bell.amplitudes())?;
            let fixed = branch.apply_on(&cand.matrix(n, t / n, t % n), &["C"])?.normalized()?;
            let overlap = fixed.amplitudes().dotc(phi.amplitudes()).norm_sqr();
            worst = worst.min(overlap);
        }
        out.push((cand, worst));
    }
    Ok(out)
}

static CONVENTION: OnceLock<CorrectionConvention> = OnceLock::new();

/// The frozen convention; `X^a Z^b` with the Bell labelling used here.
pub fn correction_convention() -> CorrectionConvention {
    *CONVENTION.get_or_init(|| {
        let d = Dim::new(3).expect("3 is a dimension");
        correction_self_test(d)
            .expect("self-test runs on fixed inputs")
            .into_iter()
            .find(|(_, f)| *f >= 1.0 - 1e-12)
            .map(|(c, _)| c)
            .expect("some candidate teleports exactly")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubits_cannot_tell_the_conventions_apart() {
        let r = correction_self_test(Dim::new(2).unwrap()).unwrap();
        assert!(r.iter().all(|(_, f)| *f >= 1.0 - 1e-12));
    }

    #[test]
    fn qutrits_single_out_one_convention_up_to_phase() {
        let r = correction_self_test(Dim::new(3).unwrap()).unwrap();
        let passing: Vec<String> = r.iter().filter(|(_, f)| *f >= 1.0 - 1e-12).map(|(c, _)| c.label()).collect();
        assert_eq!(passing, vec!["X^a Z^b".to_string(), "Z^b X^a".to_string()]);
        assert_eq!(correction_convention().label(), "X^a Z^b");
    }

    #[test]
    fn frozen_convention_works_at_larger_d() {
        let r = correction_self_test(Dim::new(5).unwrap()).unwrap();
        let conv = correction_convention();
        assert!(r.iter().any(|(c, f)| *c == conv && *f >= 1.0 - 1e-12));
    }
}
