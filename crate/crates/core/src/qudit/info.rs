use nalgebra::linalg::SymmetricEigen;

use super::state::same_register;
use super::{DensityOperator, Matrix, PSD_TOL};
use crate::{Error, Result};

/// Eigenvalues (ascending) and eigenvectors (matching columns) of the
/// Hermitian part of `m`.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let h = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vectors = Matrix::from_fn(n, order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Shannon entropy in bits of a spectrum, with 0·log 0 := 0. Small negative
/// values down to −1e-9 are clipped; anything below is an error.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &v in values {
        if v < -PSD_TOL {
            return Err(Error::NotPositive(v));
        }
        if v > 0.0 {
            h -= v * v.log2();
        }
    }
    Ok(h)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// ½‖ρ − σ‖₁. Works for sub-normalized branch operators too.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_register(rho.register(), sigma.register())?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())) / 2.0)
}

pub(crate) fn trace_norm(m: &Matrix) -> f64 {
    hermitian_eigen(m).0.iter().map(|v| v.abs()).sum()
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_register(rho.register(), sigma.register())?;
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    for &v in &vals {
        if v < -PSD_TOL {
            return Err(Error::NotPositive(v));
        }
    }
    let top = vals.iter().copied().fold(0.0, f64::max);
    let sqrt_vals: Vec<f64> = vals.iter().map(|&v| if v > 1e-13 * top { v.sqrt() } else { 0.0 }).collect();
    let n = vecs.nrows();
    let scaled = Matrix::from_fn(n, n, |r, k| vecs[(r, k)] * sqrt_vals[k]);
    let sqrt_rho = &scaled * vecs.adjoint();
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let (ev, _) = hermitian_eigen(&inner);
    let top = ev.iter().copied().fold(0.0, f64::max);
    let root: f64 = ev.iter().map(|&v| if v > 1e-13 * top { v.sqrt() } else { 0.0 }).sum();
    Ok(root * root)
}

/// Sum of |negative eigenvalues| of the partial transpose over `part`.
pub fn negativity<S: AsRef<str>>(rho: &DensityOperator, part: &[S]) -> Result<f64> {
    let pt = rho.partial_transpose(part)?;
    Ok(hermitian_eigen(&pt).0.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    let gram = if m.nrows() >= m.ncols() { m.adjoint() * m } else { m * m.adjoint() };
    hermitian_eigen(&gram).0.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{c, max_entangled, random_density, random_unitary, Register};
    use crate::{rng, Dim};

    #[test]
    fn entropy_of_mixed_and_pure() {
        for d in [2, 3, 5, 7] {
            let r = Register::single("Q", d).unwrap();
            let mixed = DensityOperator::maximally_mixed(r.clone());
            assert!((von_neumann_entropy(&mixed).unwrap() - (d as f64).log2()).abs() < 1e-12);
            let pure = DensityOperator::basis(r, 1).unwrap();
            assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn negativity_of_bell_projector_is_one_half() {
        let bell = max_entangled(Dim::new(2).unwrap(), ["A", "B"]).unwrap().density();
        let n = negativity(&bell, &["B"]).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
        let n = negativity(&bell, &["A"]).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_invariant_under_unitary_conjugation() {
        let mut rng = rng::seeded(11);
        let r = Register::single("Q", 5).unwrap();
        for _ in 0..10 {
            let rho = random_density(&r, 5, &mut rng);
            let u = random_unitary(5, &mut rng);
            let rot = rho.apply_on(&u, &["Q"]).unwrap();
            let diff = von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&rot).unwrap();
            assert!(diff.abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_and_trace_distance_basics() {
        let r = Register::single("Q", 2).unwrap();
        let zero = DensityOperator::basis(r.clone(), 0).unwrap();
        let one = DensityOperator::basis(r.clone(), 1).unwrap();
        let mixed = DensityOperator::maximally_mixed(r);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_of_scaled_identity() {
        let m = Matrix::identity(4, 3) * c(2.0, 0.0);
        assert!((operator_norm(&m) - 2.0).abs() < 1e-12);
    }
}
