//! Universality certificates and randomness audits.

use rayon::prelude::*;
use serde::Serialize;

use super::{Family, Masker, SHARE_A, SHARE_B};
use crate::qudit::{
    c, fidelity, root_of_unity, trace_distance, von_neumann_entropy, DensityOperator, Ensemble, PureState, Register,
    Vector, DERIVED_TOL,
};
use crate::Result;

/// Marginal deviation allowed for a passing certificate.
pub const MASKING_TOL: f64 = 1e-9;

/// Probe states whose projectors span the Hermitian operators on `C^d`:
/// computational and Fourier bases, the cyclic phase pairs
/// (|j⟩ + i|j+1⟩)/√2, and (|j⟩ + |k⟩)/√2, (|j⟩ + i|k⟩)/√2 for all j < k.
/// The last family is what makes the set spanning beyond d = 2.
pub fn probe_states(register: &Register) -> Vec<PureState> {
    let d = register.total_dim();
    let mut out = Vec::new();
    let mut push = |v: Vector| out.push(PureState::new(register.clone(), v).expect("unit norm"));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        let mut v = Vector::zeros(d);
        v[j] = c(1.0, 0.0);
        push(v);
    }
    let s = 1.0 / (d as f64).sqrt();
    for n in 0..d {
        push(Vector::from_fn(d, |j, _| root_of_unity(d, (n * j) as i64).scale(s)));
    }
    for j in 0..d {
        let mut v = Vector::zeros(d);
        v[j] = c(r, 0.0);
        v[(j + 1) % d] += c(0.0, r);
        push(v);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut v = Vector::zeros(d);
            v[j] = c(r, 0.0);
            v[k] = c(r, 0.0);
            push(v.clone());
            v[k] = c(0.0, r);
            push(v);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MaskingReport {
    pub family: Family,
    pub d: usize,
    pub probes: usize,
    /// Largest pairwise trace distance between first-share marginals.
    pub deviation_a: f64,
    pub deviation_b: f64,
    pub unmask_fidelity: f64,
    pub safe_entropy: f64,
    pub pass: bool,
}

fn max_pairwise(states: &[DensityOperator]) -> Result<f64> {
    let pairs: Vec<(usize, usize)> =
        (0..states.len()).flat_map(|i| (i + 1..states.len()).map(move |j| (i, j))).collect();
    let dists = pairs.par_iter().map(|&(i, j)| trace_distance(&states[i], &states[j])).collect::<Result<Vec<f64>>>()?;
    Ok(dists.into_iter().fold(0.0, f64::max))
}

pub fn verify_masking(m: &Masker) -> Result<MaskingReport> {
    let probes = probe_states(&m.secret_register());
    let per_probe = probes
        .par_iter()
        .map(|psi| {
            let out = m.mask_ensemble(&Ensemble::from_pure(psi))?;
            let recovered = m.unmask_ensemble(&out)?;
            let f = fidelity(&recovered, &psi.density())?;
            Ok((out.reduced(&[SHARE_A])?, out.reduced(&[SHARE_B])?, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ma, mb): (Vec<_>, Vec<_>) = per_probe.iter().map(|(a, b, _)| (a.clone(), b.clone())).unzip();
    let deviation_a = max_pairwise(&ma)?;
    let deviation_b = max_pairwise(&mb)?;
    let unmask_fidelity = per_probe.iter().map(|p| p.2).fold(1.0, f64::min);
    let safe_entropy = von_neumann_entropy(m.safe_state())?;
    Ok(MaskingReport {
        family: m.family(),
        d: m.d().get(),
        probes: probes.len(),
        deviation_a,
        deviation_b,
        unmask_fidelity,
        safe_entropy,
        pass: deviation_a <= MASKING_TOL && deviation_b <= MASKING_TOL && unmask_fidelity >= 1.0 - MASKING_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyAudit {
    pub safe_entropy: f64,
    pub log2_d: f64,
    /// S(ω_S) ≥ log₂d.
    pub meets_lower_bound: bool,
    /// S(ω_S) = log₂d: minimal randomness for an unconstrained masker.
    pub tight_general: bool,
    /// S(ω_S) = 2 log₂d: minimal randomness for quantum-classical outputs.
    pub tight_quantum_classical: bool,
}

pub fn entropy_audit(m: &Masker) -> Result<EntropyAudit> {
    let h = von_neumann_entropy(m.safe_state())?;
    let l = m.d().log2();
    Ok(EntropyAudit {
        safe_entropy: h,
        log2_d: l,
        meets_lower_bound: h >= l - DERIVED_TOL,
        tight_general: (h - l).abs() <= DERIVED_TOL,
        tight_quantum_classical: (h - 2.0 * l).abs() <= DERIVED_TOL,
    })
}

/// Frobenius mass of the entries of `rho` that are off-diagonal in the
/// computational basis of `classical`. Zero means `rho` is a direct sum of
/// blocks labelled by that subsystem's basis states.
pub fn classical_off_block_mass(rho: &DensityOperator, classical: &str) -> Result<f64> {
    let reg = rho.register();
    let mut order: Vec<String> = vec![classical.to_string()];
    order.extend(reg.labels().iter().filter(|l| *l != classical).cloned());
    let p = rho.permute(&order)?;
    let dc = reg.dim_of(classical)?;
    let rest = reg.total_dim() / dc;
    let m = p.matrix();
    let mut mass = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i / rest != j / rest {
                mass += m[(i, j)].norm_sqr();
            }
        }
    }
    Ok(mass.sqrt())
}
