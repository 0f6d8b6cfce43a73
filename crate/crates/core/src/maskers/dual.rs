//! Purification to a safe-key state and dual-masker synthesis.
//!
//! Purifying `ω_S` to `|Ω⟩_SK` turns a masker into the isometry
//! `V = (M ⊗ I_K)(I_C ⊗ |Ω⟩_SK): C → A⊗B⊗K`. Because share `A` alone sees a
//! constant state `σ_A`, `V` factors as `(I_A ⊗ N)(I_C ⊗ |Ψ⟩_{AS})` with
//! `|Ψ⟩` a purification of `σ_A` and `N: C⊗S → B⊗K` unitary.
//! [`factor_isometry`] finds that factorization numerically for any hidden
//! share.

use rayon::prelude::*;
use serde::Serialize;

use super::{probe_states, Family, Masker, KEY, MASKING_TOL, SAFE, SECRET, SHARE_A, SHARE_B};
use crate::qudit::{
    c, fidelity, hermitian_eigen, operator_norm, von_neumann_entropy, DensityOperator, Matrix, PureState, Register,
    Unitary, Vector, C64,
};
use crate::{Error, Result};

/// Weights below this are treated as outside the support.
const SUPPORT_TOL: f64 = 1e-12;
/// Residual above which a factorization is rejected outright.
const FACTOR_REJECT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SafeKeyState {
    /// On `[S, K]`, or `[S]` alone for a pure safe state.
    state: PureState,
    weights: Vec<f64>,
}

impl SafeKeyState {
    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// Dimension of `K`, i.e. the rank of `ω_S`.
    pub fn key_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn has_key(&self) -> bool {
        self.weights.len() > 1
    }

    /// Schmidt weights, the nonzero spectrum of `ω_S`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Canonical purification `Σ_k √λ_k |f_k⟩_S |k⟩_K` with `K` of dimension
/// rank(ω_S). A diagonal `ω_S` keeps the computational basis in index order,
/// so `I/d` purifies to the standard maximally entangled state; otherwise
/// the eigenbasis is used in descending eigenvalue order.
pub fn purify_safe(m: &Masker) -> Result<SafeKeyState> {
    let w = m.safe_state().matrix();
    let n = w.nrows();
    let off_diag = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| w[(i, j)].norm())
        .fold(0.0, f64::max);
    let mut weights = Vec::new();
    let mut vectors: Vec<Vector> = Vec::new();
    if off_diag <= 1e-14 {
        for i in 0..n {
            if w[(i, i)].re > SUPPORT_TOL {
                weights.push(w[(i, i)].re);
                let mut v = Vector::zeros(n);
                v[i] = c(1.0, 0.0);
                vectors.push(v);
            }
        }
    } else {
        let (vals, vecs) = hermitian_eigen(w);
        for k in (0..n).rev() {
            if vals[k] > SUPPORT_TOL {
                weights.push(vals[k]);
                vectors.push(vecs.column(k).into_owned());
            }
        }
    }
    let r = weights.len();
    let state = if r == 1 {
        PureState::new(Register::single(SAFE, n)?, vectors[0].normalize())?
    } else {
        let mut amp = Vector::zeros(n * r);
        for (k, (wk, f)) in weights.iter().zip(&vectors).enumerate() {
            for s in 0..n {
                amp[s * r + k] = f[s].scale(wk.sqrt());
            }
        }
        PureState::new(Register::new(&[(SAFE, n), (KEY, r)])?, amp.normalize())?
    };
    Ok(SafeKeyState { state, weights })
}

/// The columns `V|c⟩` over `[A, B, K]`.
pub fn masker_isometry(m: &Masker, key: &SafeKeyState) -> Result<Vec<PureState>> {
    let reg = m.secret_register();
    (0..m.d().get()).map(|cv| PureState::basis(reg.clone(), cv)?.tensor(key.state())?.apply(m.unitary())).collect()
}

/// `V = e^{iφ} (I_H ⊗ N)(I_C ⊗ |Ψ⟩_{HS})` for a hidden share `H`.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// `|Ψ⟩` on `[H, S]`.
    pub partner: PureState,
    /// `N: [C, S] →` the remaining shares in their original order.
    pub unitary: Unitary,
    /// Operator-norm distance between `V` and the reconstruction after
    /// optimal global phase alignment.
    pub residual: f64,
}

/// Amplitudes of a column as a `d_H × d_rest` matrix, hidden share first.
fn split_column(col: &PureState, hidden: &str, rest: &[String]) -> Result<Matrix> {
    let mut order = vec![hidden.to_string()];
    order.extend(rest.iter().cloned());
    let p = col.permute(&order)?;
    let dh = col.register().dim_of(hidden)?;
    let dr = col.register().total_dim() / dh;
    let a = p.amplitudes();
    Ok(Matrix::from_fn(dh, dr, |h, r| a[h * dr + r]))
}

/// Extends orthonormal columns to an orthonormal basis, filling the slots
/// marked `None` with Gram-Schmidt images of the standard basis.
fn complete_unitary(n: usize, cols: Vec<Option<Vector>>) -> Matrix {
    let mut basis: Vec<Vector> = cols.iter().flatten().cloned().collect();
    let mut fresh = Vec::new();
    let missing = cols.iter().filter(|c| c.is_none()).count();
    for i in 0..n {
        if fresh.len() == missing {
            break;
        }
        let mut v = Vector::zeros(n);
        v[i] = c(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            let v = v.unscale(norm);
            basis.push(v.clone());
            fresh.push(v);
        }
    }
    let mut fresh = fresh.into_iter();
    let mut out = Matrix::zeros(n, cols.len());
    for (j, col) in cols.into_iter().enumerate() {
        let v = col.unwrap_or_else(|| fresh.next().expect("enough completion vectors"));
        out.set_column(j, &v);
    }
    out
}

/// Factors an isometry given by its columns `V|c⟩`. The share `hidden` must
/// see the same marginal for every input; the remaining shares together
/// must have dimension divisible by the number of columns.
pub fn factor_isometry(columns: &[PureState], hidden: &str) -> Result<Factorization> {
    let d = columns.len();
    let first = columns.first().ok_or_else(|| Error::InvalidParameters("no columns".into()))?;
    let reg = first.register().clone();
    let rest: Vec<String> = reg.labels().iter().filter(|l| *l != hidden).cloned().collect();
    let rest_reg = reg.subset(&rest)?;
    let dh = reg.dim_of(hidden)?;
    let dr = rest_reg.total_dim();
    if dr % d != 0 || dr / d < 2 {
        return Err(Error::InvalidParameters(format!(
            "remaining shares of dimension {dr} cannot host a {d}-dimensional secret and a partner system"
        )));
    }
    let ds = dr / d;
    let blocks = columns.iter().map(|col| split_column(col, hidden, &rest)).collect::<Result<Vec<_>>>()?;

    let mut sigma = Matrix::zeros(dh, dh);
    for b in &blocks {
        sigma += b * b.adjoint();
    }
    sigma.unscale_mut(d as f64);
    let (vals, vecs) = hermitian_eigen(&sigma);
    let support: Vec<(f64, Vector)> =
        (0..dh).rev().filter(|&k| vals[k] > SUPPORT_TOL).map(|k| (vals[k], vecs.column(k).into_owned())).collect();
    let r = support.len();
    if r > ds {
        return Err(Error::FactorizationFailed(1.0));
    }

    // N|c, k⟩ = (⟨f_k| ⊗ I) V|c⟩ / √μ_k on the support, then the closest isometry.
    let mut raw = Matrix::zeros(dr, d * r);
    for (cv, b) in blocks.iter().enumerate() {
        for (k, (mu, f)) in support.iter().enumerate() {
            let row = f.adjoint() * b;
            for x in 0..dr {
                raw[(x, cv * r + k)] = row[x].unscale(mu.sqrt());
            }
        }
    }
    let svd = raw.svd(true, true);
    let polar = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    let mut cols: Vec<Option<Vector>> = vec![None; dr];
    for cv in 0..d {
        for k in 0..r {
            cols[cv * ds + k] = Some(polar.column(cv * r + k).into_owned());
        }
    }
    let n_mat = complete_unitary(dr, cols);

    let mut psi = Vector::zeros(dh * ds);
    for (k, (mu, f)) in support.iter().enumerate() {
        for h in 0..dh {
            psi[h * ds + k] = f[h].scale(mu.sqrt());
        }
    }
    let partner = PureState::new(Register::new(&[(hidden, dh), (SAFE, ds)])?, psi.normalize())?;

    // Reconstruction W_c[h, x] = Σ_k √μ_k f_k[h] N[x, c·ds + k].
    let mut overlap = C64::new(0.0, 0.0);
    let recon: Vec<Matrix> = (0..d)
        .map(|cv| {
            let mut w = Matrix::zeros(dh, dr);
            for (k, (mu, f)) in support.iter().enumerate() {
                for h in 0..dh {
                    for x in 0..dr {
                        w[(h, x)] += f[h].scale(mu.sqrt()) * n_mat[(x, cv * ds + k)];
                    }
                }
            }
            w
        })
        .collect();
    for (w, b) in recon.iter().zip(&blocks) {
        overlap += w.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>();
    }
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    let diff = Matrix::from_fn(dh * dr, d, |i, cv| blocks[cv][(i / dr, i % dr)] - phase * recon[cv][(i / dr, i % dr)]);
    let residual = operator_norm(&diff);

    let inp = Register::new(&[(SECRET, d), (SAFE, ds)])?;
    let unitary = Unitary::new(inp, rest_reg, n_mat)?;
    Ok(Factorization { partner, unitary, residual })
}

/// The dual of a masker with respect to the partitions `(A, B)` and `(B, K)`.
#[derive(Clone, Debug)]
pub struct DualMasker {
    factorization: Factorization,
    key: SafeKeyState,
}

impl DualMasker {
    /// `N: [C, S] → [B, K]`.
    pub fn unitary(&self) -> &Unitary {
        &self.factorization.unitary
    }

    /// `|Ψ⟩` on `[A, S]`.
    pub fn partner_state(&self) -> &PureState {
        &self.factorization.partner
    }

    pub fn residual(&self) -> f64 {
        self.factorization.residual
    }

    pub fn safe_key(&self) -> &SafeKeyState {
        &self.key
    }

    /// `N` with safe state `Tr_A |Ψ⟩⟨Ψ|`, as a masker whose shares are `B`
    /// and `K` (relabelled to the canonical `A`, `B`).
    pub fn as_masker(&self) -> Result<Masker> {
        let u = &self.factorization.unitary;
        let names: Vec<String> = u.out_register().labels().to_vec();
        let u = u.relabel(&[SECRET, SAFE], &[SHARE_A, SHARE_B])?;
        let omega = self.factorization.partner.reduced(&[SAFE])?;
        let omega = DensityOperator::new(omega.register().clone(), omega.matrix().clone())?;
        Ok(Masker::new(Family::Synthesized, u, omega)?.with_share_names([&names[0], &names[1]]))
    }
}

pub fn dual_masker(m: &Masker) -> Result<DualMasker> {
    let key = purify_safe(m)?;
    if !key.has_key() {
        return Err(Error::InvalidParameters("a pure safe state has no key system".into()));
    }
    let cols = masker_isometry(m, &key)?;
    let factorization = factor_isometry(&cols, SHARE_A)?;
    if factorization.residual > FACTOR_REJECT {
        return Err(Error::FactorizationFailed(factorization.residual));
    }
    Ok(DualMasker { factorization, key })
}

/// Threshold checks of the purified masker as a three-share scheme on
/// `A`, `B`, `K`. Array entries are ordered `A, B, K` for single shares and
/// `AB, BK, AK` for pairs.
#[derive(Clone, Debug, Serialize)]
pub struct QssReport {
    pub share_deviation: [f64; 3],
    pub share_entropy: [f64; 3],
    pub pair_fidelity: [f64; 3],
    pub residual_bk: f64,
    pub residual_ak: f64,
    pub pass: bool,
}

/// Fidelity deficit tolerated when an authorised pair recovers the secret.
pub const RECOVERY_TOL: f64 = 1e-8;

pub fn qss23_check(m: &Masker) -> Result<QssReport> {
    let key = purify_safe(m)?;
    if !key.has_key() {
        return Err(Error::InvalidParameters("a pure safe state has no key system".into()));
    }
    let cols = masker_isometry(m, &key)?;
    let bk = factor_isometry(&cols, SHARE_A)?;
    let ak = factor_isometry(&cols, SHARE_B)?;
    let probes = probe_states(&m.secret_register());
    let mdag = m.unitary().adjoint();
    let bk_dag = bk.unitary.adjoint();
    let ak_dag = ak.unitary.adjoint();
    let reg = cols[0].register().clone();

    let per_probe = probes
        .par_iter()
        .map(|psi| {
            let mut amp = Vector::zeros(reg.total_dim());
            for (cv, col) in cols.iter().enumerate() {
                amp += col.amplitudes() * psi.amplitudes()[cv];
            }
            let out = PureState::new(reg.clone(), amp.normalize())?;
            let target = psi.density();
            let shares = [out.reduced(&[SHARE_A])?, out.reduced(&[SHARE_B])?, out.reduced(&[KEY])?];
            let recovered = [
                out.apply(&mdag)?.reduced(&[SECRET])?,
                out.apply(&bk_dag)?.reduced(&[SECRET])?,
                out.apply(&ak_dag)?.reduced(&[SECRET])?,
            ];
            let f = [
                fidelity(&recovered[0], &target)?,
                fidelity(&recovered[1], &target)?,
                fidelity(&recovered[2], &target)?,
            ];
            Ok((shares, f))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut share_deviation = [0.0; 3];
    let mut share_entropy = [0.0; 3];
    let mut pair_fidelity = [1.0f64; 3];
    for s in 0..3 {
        let reference = &per_probe[0].0[s];
        share_entropy[s] = von_neumann_entropy(reference)?;
        for (shares, f) in &per_probe {
            let dev = crate::qudit::trace_distance(reference, &shares[s])?;
            share_deviation[s] = f64::max(share_deviation[s], dev);
            pair_fidelity[s] = pair_fidelity[s].min(f[s]);
        }
    }
    let pass =
        share_deviation.iter().all(|&x| x <= MASKING_TOL) && pair_fidelity.iter().all(|&f| f >= 1.0 - RECOVERY_TOL);
    Ok(QssReport {
        share_deviation,
        share_entropy,
        pair_fidelity,
        residual_bk: bk.residual,
        residual_ak: ak.residual,
        pass,
    })
}
