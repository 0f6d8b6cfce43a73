use super::{max_abs_diff, DensityOperator, Matrix, PureState, DERIVED_TOL};
use crate::{Error, Result};

/// One outcome of a projective measurement on a density operator.
#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub probability: f64,
    /// P ρ P, trace = probability.
    pub unnormalized: DensityOperator,
}

impl MeasurementBranch {
    /// The normalized post-measurement state, or `None` for a null outcome.
    pub fn post_state(&self) -> Option<DensityOperator> {
        if self.probability <= 1e-15 {
            None
        } else {
            self.unnormalized.normalized().ok()
        }
    }
}

#[derive(Clone, Debug)]
pub struct PureBranch {
    pub probability: f64,
    pub unnormalized: PureState,
}

impl PureBranch {
    pub fn post_state(&self) -> Option<PureState> {
        if self.probability <= 1e-15 {
            None
        } else {
            self.unnormalized.normalized().ok()
        }
    }
}

fn check_projectors(projectors: &[Matrix], dim: usize) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::IncompleteMeasurement("no projectors".into()));
    }
    let mut sum = Matrix::zeros(dim, dim);
    for (k, p) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.nrows() });
        }
        if max_abs_diff(p, &p.adjoint()) > DERIVED_TOL {
            return Err(Error::IncompleteMeasurement(format!("projector {k} is not hermitian")));
        }
        if max_abs_diff(&(p * p), p) > DERIVED_TOL {
            return Err(Error::IncompleteMeasurement(format!("projector {k} is not idempotent")));
        }
        sum += p;
    }
    let dev = max_abs_diff(&sum, &Matrix::identity(dim, dim));
    if dev > DERIVED_TOL {
        return Err(Error::IncompleteMeasurement(format!("projectors sum to identity within {dev:e}")));
    }
    Ok(())
}

/// Projective measurement of the named subsystems of a density operator.
pub fn measure_projective<S: AsRef<str>>(
    state: &DensityOperator,
    targets: &[S],
    projectors: &[Matrix],
) -> Result<Vec<MeasurementBranch>> {
    let dim = state.register().subset(targets)?.total_dim();
    check_projectors(projectors, dim)?;
    projectors
        .iter()
        .map(|p| {
            let unnormalized = state.apply_on(p, targets)?;
            Ok(MeasurementBranch { probability: unnormalized.trace().max(0.0), unnormalized })
        })
        .collect()
}

/// Projective measurement of the named subsystems of a pure state.
pub fn measure_projective_pure<S: AsRef<str>>(
    state: &PureState,
    targets: &[S],
    projectors: &[Matrix],
) -> Result<Vec<PureBranch>> {
    let dim = state.register().subset(targets)?.total_dim();
    check_projectors(projectors, dim)?;
    projectors
        .iter()
        .map(|p| {
            let unnormalized = state.apply_on(p, targets)?;
            Ok(PureBranch { probability: unnormalized.norm_sqr(), unnormalized })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{bell_basis, c, max_entangled, Register, Vector};
    use crate::Dim;

    fn computational(d: usize) -> Vec<Matrix> {
        (0..d)
            .map(|k| {
                let mut m = Matrix::zeros(d, d);
                m[(k, k)] = c(1.0, 0.0);
                m
            })
            .collect()
    }

    #[test]
    fn measuring_basis_state_is_deterministic() {
        let r = Register::single("Q", 3).unwrap();
        let zero = DensityOperator::basis(r, 0).unwrap();
        let out = measure_projective(&zero, &["Q"], &computational(3)).unwrap();
        assert!((out[0].probability - 1.0).abs() < 1e-15);
        assert!(out[1].probability.abs() < 1e-15);
        assert!(out[2].post_state().is_none());
    }

    #[test]
    fn measuring_maximally_mixed_is_uniform() {
        for d in [2, 3, 5] {
            let r = Register::single("Q", d).unwrap();
            let out = measure_projective(&DensityOperator::maximally_mixed(r), &["Q"], &computational(d)).unwrap();
            let total: f64 = out.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(out.iter().all(|b| (b.probability - 1.0 / d as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn incomplete_projectors_are_rejected() {
        let r = Register::single("Q", 3).unwrap();
        let rho = DensityOperator::maximally_mixed(r);
        let mut ps = computational(3);
        ps.pop();
        assert!(matches!(measure_projective(&rho, &["Q"], &ps), Err(Error::IncompleteMeasurement(_))));
    }

    #[test]
    fn bell_measurement_of_teleportation_input_at_d2() {
        // I in |0>, (E,C) in |Θ>. Measure (I,E) in the Bell basis. By hand:
        // |0>_I ⊗ (|00> + |11>)/√2 = ½ Σ_{ab} |β_ab>_{IE} ⊗ Z^b X^a |0>_C (up to sign),
        // so every outcome has probability 1/4 and leaves C in |a>.
        let d = Dim::new(2).unwrap();
        let theta = max_entangled(d, ["E", "C"]).unwrap();
        let zero = PureState::basis(Register::single("I", 2).unwrap(), 0).unwrap();
        let state = zero.tensor(&theta).unwrap();
        let bells = bell_basis(d, ["I", "E"]).unwrap();
        let projectors: Vec<Matrix> = bells.iter().map(|b| b.density().matrix().clone()).collect();
        let out = measure_projective_pure(&state, &["I", "E"], &projectors).unwrap();
        for (k, branch) in out.iter().enumerate() {
            assert!((branch.probability - 0.25).abs() < 1e-12);
            let a = k / 2;
            let c_state = branch.post_state().unwrap().reduced(&["C"]).unwrap();
            let mut expect = Matrix::zeros(2, 2);
            expect[(a, a)] = c(1.0, 0.0);
            assert!(max_abs_diff(c_state.matrix(), &expect) < 1e-12);
        }
        // Branch (a,b) = (1,1) by hand: |β_11> = (|10> - |01>)/√2 on (I,E),
        // ⟨β_11|·|0>_I|Θ>_EC = -½|1>_C, so P|ψ> = -½|β_11>|1>_C whose only
        // amplitudes are |0,1,1> = +1/(2√2) and |1,0,1> = -1/(2√2).
        let amp = out[3].unnormalized.amplitudes();
        let h = 1.0 / (2.0 * 2f64.sqrt());
        let mut expect = Vector::zeros(8);
        expect[3] = c(h, 0.0);
        expect[5] = c(-h, 0.0);
        assert!((amp - expect).norm() < 1e-12);
    }
}
