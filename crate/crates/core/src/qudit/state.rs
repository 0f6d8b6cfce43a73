use super::{info, CONSTRUCTION_TOL, PSD_TOL, STATE_TOL};
use super::{kernel, max_abs_diff, Matrix, Register, Unitary, Vector, C64};
use crate::{Error, Result};

/// Where an operator lands in a register and what the register looks like
/// afterwards.
pub(crate) struct Placement {
    pub targets: Vec<usize>,
    pub register: Register,
    pub out_dims: Vec<usize>,
}

pub(crate) fn placement<S: AsRef<str>>(
    reg: &Register,
    targets: &[S],
    outputs: &Register,
    op: &Matrix,
) -> Result<Placement> {
    let idx = reg.indices_of(targets)?;
    let dims = reg.dims();
    let dt: usize = idx.iter().map(|&i| dims[i]).product();
    if op.ncols() != dt {
        return Err(Error::DimensionMismatch { expected: dt, found: op.ncols() });
    }
    if op.nrows() != outputs.total_dim() {
        return Err(Error::DimensionMismatch { expected: outputs.total_dim(), found: op.nrows() });
    }
    let out_dims = outputs.dims();
    let same_shape = out_dims.len() == idx.len() && idx.iter().zip(&out_dims).all(|(&t, &o)| dims[t] == o);
    let layout = kernel::apply_layout(reg.len(), &idx, out_dims.len(), same_shape);
    let mut labels = Vec::with_capacity(layout.len());
    let mut new_dims = Vec::with_capacity(layout.len());
    let out_reg_dims = outputs.dims();
    for entry in layout {
        match entry {
            Ok(k) => {
                labels.push(outputs.labels()[k].clone());
                new_dims.push(super::Dim::new(out_reg_dims[k])?);
            }
            Err(a) => {
                labels.push(reg.labels()[a].clone());
                new_dims.push(super::Dim::new(dims[a])?);
            }
        }
    }
    Ok(Placement { targets: idx, register: Register::from_parts(labels, new_dims)?, out_dims })
}

/// A state vector over a labelled register. Branch states produced by
/// measurement or Kraus maps carry `normalized == false` and have norm² ≤ 1.
#[derive(Clone, Debug)]
pub struct PureState {
    register: Register,
    amplitudes: Vector,
    normalized: bool,
}

impl PureState {
    pub fn new(register: Register, amplitudes: Vector) -> Result<Self> {
        check_len(&register, amplitudes.len())?;
        let n = amplitudes.norm_squared();
        if (n - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { register, amplitudes, normalized: true })
    }

    /// A sub-normalized branch vector (norm² in [0, 1]).
    pub fn unnormalized(register: Register, amplitudes: Vector) -> Result<Self> {
        check_len(&register, amplitudes.len())?;
        let n = amplitudes.norm_squared();
        if n > 1.0 + STATE_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { register, amplitudes, normalized: false })
    }

    pub fn basis(register: Register, index: usize) -> Result<Self> {
        let n = register.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index });
        }
        let mut v = Vector::zeros(n);
        v[index] = C64::new(1.0, 0.0);
        Ok(PureState { register, amplitudes: v, normalized: true })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<PureState> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState {
            register: self.register.clone(),
            amplitudes: self.amplitudes.unscale(n.sqrt()),
            normalized: true,
        })
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = self.register.concat(&other.register)?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        Ok(PureState { register, amplitudes, normalized: self.normalized && other.normalized })
    }

    /// Applies a unitary whose input labels name subsystems of this state;
    /// they are replaced by the unitary's output labels.
    pub fn apply(&self, u: &Unitary) -> Result<PureState> {
        let mut out = self.apply_map(u.matrix(), u.in_register().labels(), u.out_register())?;
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Applies a square operator to the named subsystems, keeping labels.
    pub fn apply_on<S: AsRef<str>>(&self, op: &Matrix, targets: &[S]) -> Result<PureState> {
        let outputs = self.register.subset(targets)?;
        self.apply_map(op, targets, &outputs)
    }

    /// Applies an arbitrary linear map from the named subsystems to `outputs`.
    pub fn apply_map<S: AsRef<str>>(&self, op: &Matrix, targets: &[S], outputs: &Register) -> Result<PureState> {
        let pl = placement(&self.register, targets, outputs, op)?;
        let (data, _) = kernel::apply(self.amplitudes.as_slice(), &self.register.dims(), &pl.targets, op, &pl.out_dims);
        let amplitudes = Vector::from_vec(data);
        let normalized = self.normalized && (amplitudes.norm_squared() - 1.0).abs() <= CONSTRUCTION_TOL;
        Ok(PureState { register: pl.register, amplitudes, normalized })
    }

    /// Contracts the named subsystems with ⟨bra|, removing them.
    pub fn project_out<S: AsRef<str>>(&self, targets: &[S], bra: &Vector) -> Result<PureState> {
        let row = Matrix::from_fn(1, bra.len(), |_, j| bra[j].conj());
        self.apply_map(&row, targets, &Register::empty())
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        let idx = self.register.indices_of(order)?;
        if idx.len() != self.register.len() {
            return Err(Error::RegisterMismatch("permutation must name every subsystem".into()));
        }
        let data = kernel::permute(self.amplitudes.as_slice(), &self.register.dims(), &idx);
        Ok(PureState {
            register: self.register.select(&idx),
            amplitudes: Vector::from_vec(data),
            normalized: self.normalized,
        })
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureState> {
        Ok(PureState {
            register: self.register.relabel(labels)?,
            amplitudes: self.amplitudes.clone(),
            normalized: self.normalized,
        })
    }

    /// Reduced state on `keep` (in the order given).
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let idx = self.register.indices_of(keep)?;
        let m = kernel::reduce_pure(self.amplitudes.as_slice(), &self.register.dims(), &idx);
        Ok(DensityOperator::from_raw(self.register.select(&idx), m, self.normalized))
    }

    pub fn density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::from_raw(self.register.clone(), m, self.normalized)
    }

    /// ⟨self|other⟩; registers must agree exactly.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        same_register(&self.register, &other.register)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

fn check_len(register: &Register, n: usize) -> Result<()> {
    if register.total_dim() != n {
        return Err(Error::DimensionMismatch { expected: register.total_dim(), found: n });
    }
    Ok(())
}

pub(crate) fn same_register(a: &Register, b: &Register) -> Result<()> {
    if a != b {
        return Err(Error::RegisterMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// A density operator over a labelled register. Branch states carry
/// `normalized == false` with trace in [0, 1].
#[derive(Clone, Debug)]
pub struct DensityOperator {
    register: Register,
    matrix: Matrix,
    normalized: bool,
}

impl DensityOperator {
    pub fn new(register: Register, matrix: Matrix) -> Result<Self> {
        let rho = DensityOperator::checked(register, matrix, false)?;
        let t = rho.trace();
        if (t - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(t));
        }
        Ok(DensityOperator { normalized: true, ..rho })
    }

    pub fn unnormalized(register: Register, matrix: Matrix) -> Result<Self> {
        let rho = DensityOperator::checked(register, matrix, false)?;
        let t = rho.trace();
        if !(-STATE_TOL..=1.0 + STATE_TOL).contains(&t) {
            return Err(Error::NotNormalized(t));
        }
        Ok(rho)
    }

    fn checked(register: Register, matrix: Matrix, normalized: bool) -> Result<Self> {
        let n = register.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let (eig, _) = info::hermitian_eigen(&matrix);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityOperator { register, matrix, normalized })
    }

    pub(crate) fn from_raw(register: Register, matrix: Matrix, normalized: bool) -> Self {
        debug_assert_eq!(register.total_dim(), matrix.nrows());
        DensityOperator { register, matrix, normalized }
    }

    pub fn pure(state: &PureState) -> Self {
        state.density()
    }

    pub fn maximally_mixed(register: Register) -> Self {
        let n = register.total_dim();
        let m = Matrix::identity(n, n).unscale(n as f64);
        DensityOperator { register, matrix: m, normalized: true }
    }

    pub fn basis(register: Register, index: usize) -> Result<Self> {
        Ok(PureState::basis(register, index)?.density())
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn normalized(&self) -> Result<DensityOperator> {
        let t = self.trace();
        if t <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized(t));
        }
        Ok(DensityOperator { register: self.register.clone(), matrix: self.matrix.unscale(t), normalized: true })
    }

    /// Sorted (ascending) eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        info::hermitian_eigen(&self.matrix).0
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            register: self.register.concat(&other.register)?,
            matrix: self.matrix.kronecker(&other.matrix),
            normalized: self.normalized && other.normalized,
        })
    }

    pub fn apply(&self, u: &Unitary) -> Result<DensityOperator> {
        let mut out = self.apply_map(u.matrix(), u.in_register().labels(), u.out_register())?;
        out.normalized = self.normalized;
        Ok(out)
    }

    pub fn apply_on<S: AsRef<str>>(&self, op: &Matrix, targets: &[S]) -> Result<DensityOperator> {
        let outputs = self.register.subset(targets)?;
        self.apply_map(op, targets, &outputs)
    }

    /// ρ ↦ K ρ K† for one linear map K from the targets to `outputs`.
    pub fn apply_map<S: AsRef<str>>(&self, op: &Matrix, targets: &[S], outputs: &Register) -> Result<DensityOperator> {
        let pl = placement(&self.register, targets, outputs, op)?;
        let (m, _) = kernel::conjugate_density(&self.matrix, &self.register.dims(), &pl.targets, op, &pl.out_dims);
        let t = m.trace().re;
        let normalized = self.normalized && (t - 1.0).abs() <= STATE_TOL;
        Ok(DensityOperator { register: pl.register, matrix: m, normalized })
    }

    /// ρ ↦ Σ_k K_k ρ K_k†.
    pub fn apply_kraus<S: AsRef<str>>(
        &self,
        kraus: &[Matrix],
        targets: &[S],
        outputs: &Register,
    ) -> Result<DensityOperator> {
        let mut acc: Option<DensityOperator> = None;
        for k in kraus {
            let term = self.apply_map(k, targets, outputs)?;
            acc = Some(match acc {
                None => term,
                Some(a) => DensityOperator { matrix: a.matrix + term.matrix, ..a },
            });
        }
        let mut out = acc.ok_or_else(|| Error::InvalidParameters("empty Kraus list".into()))?;
        out.normalized = (out.trace() - 1.0).abs() <= STATE_TOL;
        Ok(out)
    }

    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let idx = self.register.indices_of(keep)?;
        let m = kernel::reduce_density(&self.matrix, &self.register.dims(), &idx);
        Ok(DensityOperator { register: self.register.select(&idx), matrix: m, normalized: self.normalized })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityOperator> {
        let idx = self.register.indices_of(order)?;
        if idx.len() != self.register.len() {
            return Err(Error::RegisterMismatch("permutation must name every subsystem".into()));
        }
        let m = kernel::permute_density(&self.matrix, &self.register.dims(), &idx);
        Ok(DensityOperator { register: self.register.select(&idx), matrix: m, normalized: self.normalized })
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<DensityOperator> {
        Ok(DensityOperator {
            register: self.register.relabel(labels)?,
            matrix: self.matrix.clone(),
            normalized: self.normalized,
        })
    }

    /// Partial transpose over the named subsystems (not a state in general).
    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<Matrix> {
        let idx = self.register.indices_of(labels)?;
        let dims = self.register.dims();
        let (a_idx, r_idx) = kernel::split_indices(&dims, &idx);
        let da: usize = idx.iter().map(|&i| dims[i]).product();
        let dr = a_idx.len() / da;
        let mut table = vec![0usize; da * dr];
        for (flat, (&a, &r)) in a_idx.iter().zip(&r_idx).enumerate() {
            table[a * dr + r] = flat;
        }
        let n = self.matrix.nrows();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // swap the transposed digits between row and column
                let ti = table[a_idx[j] * dr + r_idx[i]];
                let tj = table[a_idx[i] * dr + r_idx[j]];
                out[(ti, tj)] = self.matrix[(i, j)];
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> DensityOperator {
        DensityOperator {
            register: self.register.clone(),
            matrix: self.matrix.scale(factor),
            normalized: self.normalized && (factor - 1.0).abs() <= STATE_TOL,
        }
    }

    pub fn add(&self, other: &DensityOperator) -> Result<DensityOperator> {
        same_register(&self.register, &other.register)?;
        let matrix = &self.matrix + &other.matrix;
        let normalized = (matrix.trace().re - 1.0).abs() <= STATE_TOL;
        Ok(DensityOperator { register: self.register.clone(), matrix, normalized })
    }

    pub fn zero(register: Register) -> DensityOperator {
        let n = register.total_dim();
        DensityOperator { register, matrix: Matrix::zeros(n, n), normalized: false }
    }

    /// Re-runs the hermiticity / trace / positivity checks.
    pub fn validate(&self) -> Result<()> {
        let _ = DensityOperator::checked(self.register.clone(), self.matrix.clone(), false)?;
        if self.normalized && (self.trace() - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(self.trace()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{c, gen_pauli_x, max_entangled};

    #[test]
    fn pure_state_requires_unit_norm() {
        let r = Register::single("Q", 2).unwrap();
        let v = Vector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(PureState::new(r.clone(), v.clone()), Err(Error::NotNormalized(_))));
        assert!(PureState::unnormalized(r.clone(), v.unscale(2.0)).is_ok());
        assert!(PureState::new(r, v.unscale(2f64.sqrt())).is_ok());
    }

    #[test]
    fn apply_permute_and_inverse_permute_roundtrip() {
        let reg = Register::new(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let v = Vector::from_fn(12, |i, _| c(i as f64, -(i as f64) * 0.5)).normalize();
        let s = PureState::new(reg, v).unwrap();
        let p = s.permute(&["C", "A", "B"]).unwrap();
        let back = p.permute(&["A", "B", "C"]).unwrap();
        assert_eq!(back.amplitudes(), s.amplitudes());
        assert_eq!(back.register(), s.register());
    }

    #[test]
    fn shift_acts_on_the_named_subsystem() {
        let reg = Register::new(&[("A", 3), ("B", 3)]).unwrap();
        let s = PureState::basis(reg, 5).unwrap(); // |1,2>
        let x = gen_pauli_x(crate::Dim::new(3).unwrap());
        let out = s.apply_on(x.matrix(), &["B"]).unwrap(); // |1,0>
        assert!((out.amplitudes()[3].re - 1.0).abs() < 1e-15);
        let out = s.apply_on(x.matrix(), &["A"]).unwrap(); // |2,2>
        assert!((out.amplitudes()[8].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_partial_trace_matches_pure_partial_trace() {
        let theta = max_entangled(crate::Dim::new(3).unwrap(), ["E", "C"]).unwrap();
        let a = theta.reduced(&["C"]).unwrap();
        let b = theta.density().reduced(&["C"]).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
        assert!(max_abs_diff(a.matrix(), &Matrix::identity(3, 3).unscale(3.0)) < 1e-15);
    }

    #[test]
    fn conjugation_by_identity_is_noop() {
        let theta = max_entangled(crate::Dim::new(2).unwrap(), ["E", "C"]).unwrap().density();
        let id = Matrix::identity(2, 2);
        let out = theta.apply_on(&id, &["C"]).unwrap();
        assert!(max_abs_diff(out.matrix(), theta.matrix()) == 0.0);
    }

    #[test]
    fn density_rejects_non_psd() {
        let r = Register::single("Q", 2).unwrap();
        let m = Matrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityOperator::new(r, m), Err(Error::NotPositive(_))));
    }
}
