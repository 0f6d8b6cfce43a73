use super::state::{placement, same_register};
use super::STATE_TOL;
use super::{info, kernel, DensityOperator, Matrix, PureState, Register, Unitary, Vector};
use crate::{Error, Result};

/// A mixed (possibly sub-normalized) state held as Σ_k |v_k⟩⟨v_k|.
///
/// This is the workhorse for protocol simulation: Kraus maps multiply the
/// member list instead of squaring the dimension, so registers far beyond what
/// a dense density matrix allows stay cheap.
#[derive(Clone, Debug)]
pub struct Ensemble {
    register: Register,
    members: Vec<Vector>,
}

impl Ensemble {
    pub fn new(register: Register, members: Vec<Vector>) -> Result<Self> {
        let n = register.total_dim();
        if let Some(v) = members.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        Ok(Ensemble { register, members })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Ensemble { register: state.register().clone(), members: vec![state.amplitudes().clone()] }
    }

    /// Spectral decomposition, dropping eigenvalues below 1e-14.
    pub fn from_density(rho: &DensityOperator) -> Self {
        let (vals, vecs) = info::hermitian_eigen(rho.matrix());
        let members = vals
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &v)| v > 1e-14)
            .map(|(k, &v)| vecs.column(k).scale(v.sqrt()))
            .collect();
        Ensemble { register: rho.register().clone(), members }
    }

    pub fn empty(register: Register) -> Self {
        Ensemble { register, members: Vec::new() }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn members(&self) -> &[Vector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.members.iter().map(|v| v.norm_squared()).sum()
    }

    pub fn tensor_pure(&self, state: &PureState) -> Result<Ensemble> {
        let register = self.register.concat(state.register())?;
        let members = self.members.iter().map(|v| v.kronecker(state.amplitudes())).collect();
        Ok(Ensemble { register, members })
    }

    pub fn tensor(&self, other: &Ensemble) -> Result<Ensemble> {
        let register = self.register.concat(&other.register)?;
        let mut members = Vec::with_capacity(self.len() * other.len());
        for a in &self.members {
            for b in &other.members {
                members.push(a.kronecker(b));
            }
        }
        Ok(Ensemble { register, members })
    }

    pub fn apply(&self, u: &Unitary) -> Result<Ensemble> {
        self.apply_map(u.matrix(), u.in_register().labels(), u.out_register())
    }

    pub fn apply_on<S: AsRef<str>>(&self, op: &Matrix, targets: &[S]) -> Result<Ensemble> {
        let outputs = self.register.subset(targets)?;
        self.apply_map(op, targets, &outputs)
    }

    pub fn apply_map<S: AsRef<str>>(&self, op: &Matrix, targets: &[S], outputs: &Register) -> Result<Ensemble> {
        self.apply_kraus(std::slice::from_ref(op), targets, outputs)
    }

    /// ρ ↦ Σ_k K_k ρ K_k†; the member list grows by the number of Kraus ops.
    pub fn apply_kraus<S: AsRef<str>>(&self, kraus: &[Matrix], targets: &[S], outputs: &Register) -> Result<Ensemble> {
        let dims = self.register.dims();
        let mut register = None;
        let mut members = Vec::with_capacity(self.len() * kraus.len());
        for k in kraus {
            let pl = placement(&self.register, targets, outputs, k)?;
            for v in &self.members {
                let (data, _) = kernel::apply(v.as_slice(), &dims, &pl.targets, k, &pl.out_dims);
                members.push(Vector::from_vec(data));
            }
            register = Some(pl.register);
        }
        match register {
            Some(register) => Ok(Ensemble { register, members }.pruned()),
            None => Err(Error::InvalidParameters("empty Kraus list".into())),
        }
    }

    /// Contracts the named subsystems with ⟨bra|.
    pub fn project_out<S: AsRef<str>>(&self, targets: &[S], bra: &Vector) -> Result<Ensemble> {
        let row = Matrix::from_fn(1, bra.len(), |_, j| bra[j].conj());
        self.apply_map(&row, targets, &Register::empty())
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Ensemble> {
        let idx = self.register.indices_of(order)?;
        if idx.len() != self.register.len() {
            return Err(Error::RegisterMismatch("permutation must name every subsystem".into()));
        }
        let dims = self.register.dims();
        let members =
            self.members.iter().map(|v| Vector::from_vec(kernel::permute(v.as_slice(), &dims, &idx))).collect();
        Ok(Ensemble { register: self.register.select(&idx), members })
    }

    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let idx = self.register.indices_of(keep)?;
        let dims = self.register.dims();
        let reg = self.register.select(&idx);
        let n = reg.total_dim();
        let mut m = Matrix::zeros(n, n);
        for v in &self.members {
            m += kernel::reduce_pure(v.as_slice(), &dims, &idx);
        }
        let normalized = (m.trace().re - 1.0).abs() <= STATE_TOL;
        Ok(DensityOperator::from_raw(reg, m, normalized))
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.register.total_dim();
        let mut m = Matrix::zeros(n, n);
        for v in &self.members {
            m += v * v.adjoint();
        }
        let normalized = (m.trace().re - 1.0).abs() <= STATE_TOL;
        DensityOperator::from_raw(self.register.clone(), m, normalized)
    }

    pub fn scaled(&self, factor: f64) -> Ensemble {
        let s = factor.sqrt();
        Ensemble { register: self.register.clone(), members: self.members.iter().map(|v| v.scale(s)).collect() }
    }

    pub fn merge(&mut self, other: Ensemble) -> Result<()> {
        same_register(&self.register, &other.register)?;
        self.members.extend(other.members);
        Ok(())
    }

    /// Nonzero spectrum of Σ|v⟩⟨v| via the Gram matrix of the members.
    pub fn spectrum(&self) -> Vec<f64> {
        let k = self.members.len();
        let g = Matrix::from_fn(k, k, |i, j| self.members[i].dotc(&self.members[j]));
        info::hermitian_eigen(&g).0
    }

    pub fn entropy(&self) -> Result<f64> {
        info::entropy_of_spectrum(&self.spectrum())
    }

    fn pruned(mut self) -> Ensemble {
        self.members.retain(|v| v.norm_squared() > 1e-30);
        self
    }
}
