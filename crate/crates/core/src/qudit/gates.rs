use super::{c, kernel, max_abs_diff, root_of_unity, Dim, Matrix, PureState, Register, Vector, C64};
use crate::{Error, Result};

/// A unitary map between two registers of equal total dimension.
#[derive(Clone, Debug)]
pub struct Unitary {
    in_register: Register,
    out_register: Register,
    matrix: Matrix,
}

impl Unitary {
    pub fn new(in_register: Register, out_register: Register, matrix: Matrix) -> Result<Self> {
        let n = in_register.total_dim();
        if out_register.total_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: out_register.total_dim() });
        }
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let dev = unitarity_deviation(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Unitary { in_register, out_register, matrix })
    }

    /// Square gate on a single register; output labels equal input labels.
    pub fn on(register: Register, matrix: Matrix) -> Result<Self> {
        Unitary::new(register.clone(), register, matrix)
    }

    pub fn in_register(&self) -> &Register {
        &self.in_register
    }

    pub fn out_register(&self) -> &Register {
        &self.out_register
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            in_register: self.out_register.clone(),
            out_register: self.in_register.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn relabel<S: AsRef<str>>(&self, inputs: &[S], outputs: &[S]) -> Result<Unitary> {
        Ok(Unitary {
            in_register: self.in_register.relabel(inputs)?,
            out_register: self.out_register.relabel(outputs)?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn tensor(&self, other: &Unitary) -> Result<Unitary> {
        Ok(Unitary {
            in_register: self.in_register.concat(&other.in_register)?,
            out_register: self.out_register.concat(&other.out_register)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Unitary) -> Result<Unitary> {
        if self.in_register.dims() != first.out_register.dims() {
            return Err(Error::RegisterMismatch(format!("{} cannot follow {}", self.in_register, first.out_register)));
        }
        Ok(Unitary {
            in_register: first.in_register.clone(),
            out_register: self.out_register.clone(),
            matrix: &self.matrix * &first.matrix,
        })
    }

    pub fn pow(&self, k: usize) -> Result<Unitary> {
        if self.in_register.dims() != self.out_register.dims() {
            return Err(Error::RegisterMismatch("power of a non-endomorphism".into()));
        }
        let n = self.matrix.nrows();
        let mut m = Matrix::identity(n, n);
        for _ in 0..k {
            m = &self.matrix * m;
        }
        Ok(Unitary { matrix: m, ..self.clone() })
    }

    pub fn deviation_from_unitary(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

/// ‖U†U − I‖_max
pub(crate) fn unitarity_deviation(m: &Matrix) -> f64 {
    let n = m.ncols();
    max_abs_diff(&(m.adjoint() * m), &Matrix::identity(n, n))
}

fn q(d: Dim) -> Register {
    Register::from_parts(vec!["q".into()], vec![d]).expect("single label")
}

pub fn identity(d: Dim) -> Unitary {
    let n = d.get();
    Unitary { in_register: q(d), out_register: q(d), matrix: Matrix::identity(n, n) }
}

/// X^k with X|j⟩ = |j+1 mod d⟩.
pub fn shift_matrix(d: usize, k: i64) -> Matrix {
    let k = k.rem_euclid(d as i64) as usize;
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        m[((j + k) % d, j)] = c(1.0, 0.0);
    }
    m
}

/// Z^k with Z|j⟩ = ω^j |j⟩, ω = exp(2πi/d).
pub fn clock_matrix(d: usize, k: i64) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        m[(j, j)] = root_of_unity(d, k * j as i64);
    }
    m
}

/// X^a Z^b.
pub fn weyl_matrix(d: usize, a: i64, b: i64) -> Matrix {
    shift_matrix(d, a) * clock_matrix(d, b)
}

pub fn gen_pauli_x(d: Dim) -> Unitary {
    Unitary { in_register: q(d), out_register: q(d), matrix: shift_matrix(d.get(), 1) }
}

pub fn gen_pauli_z(d: Dim) -> Unitary {
    Unitary { in_register: q(d), out_register: q(d), matrix: clock_matrix(d.get(), 1) }
}

/// H[j,k] = ω^{jk} / √d.
pub fn fourier(d: Dim) -> Unitary {
    let n = d.get();
    let s = (n as f64).sqrt();
    let m = Matrix::from_fn(n, n, |j, k| root_of_unity(n, (j * k) as i64).unscale(s));
    Unitary { in_register: q(d), out_register: q(d), matrix: m }
}

/// Σ_j |j⟩⟨j| ⊗ G_j with the control as the first subsystem.
pub fn controlled(gates: &[Unitary]) -> Result<Unitary> {
    let dc = Dim::new(gates.len())?;
    let dt = gates[0].matrix.nrows();
    for g in gates {
        if g.matrix.nrows() != dt {
            return Err(Error::DimensionMismatch { expected: dt, found: g.matrix.nrows() });
        }
    }
    let n = dc.get() * dt;
    let mut m = Matrix::zeros(n, n);
    for (j, g) in gates.iter().enumerate() {
        m.view_mut((j * dt, j * dt), (dt, dt)).copy_from(&g.matrix);
    }
    let reg = Register::from_parts(vec!["ctrl".into(), "tgt".into()], vec![dc, Dim::new(dt)?])?;
    Ok(Unitary { in_register: reg.clone(), out_register: reg, matrix: m })
}

/// d^{-1/2} Σ_i |ii⟩ over the two labels.
pub fn max_entangled(d: Dim, labels: [&str; 2]) -> Result<PureState> {
    let n = d.get();
    let reg = Register::new(&[(labels[0], n), (labels[1], n)])?;
    let mut v = Vector::zeros(n * n);
    let amp = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        v[i * n + i] = c(amp, 0.0);
    }
    PureState::new(reg, v)
}

/// {(X^a Z^b ⊗ I)|Θ⟩}, indexed a·d + b.
pub fn bell_basis(d: Dim, labels: [&str; 2]) -> Result<Vec<PureState>> {
    let theta = max_entangled(d, labels)?;
    let n = d.get();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let w = weyl_matrix(n, a as i64, b as i64);
            out.push(theta.apply_on(&w, &[labels[0]])?);
        }
    }
    Ok(out)
}

/// Builds a unitary gate by gate over named wires.
#[derive(Clone, Debug)]
pub struct Circuit {
    register: Register,
    matrix: Matrix,
}

impl Circuit {
    pub fn new(register: Register) -> Self {
        let n = register.total_dim();
        Circuit { register, matrix: Matrix::identity(n, n) }
    }

    /// Appends `gate` acting on `wires` (in the gate's subsystem order).
    pub fn gate<S: AsRef<str>>(mut self, gate: &Matrix, wires: &[S]) -> Result<Self> {
        let idx = self.register.indices_of(wires)?;
        let dims = self.register.dims();
        let dt: usize = idx.iter().map(|&i| dims[i]).product();
        if gate.nrows() != dt || gate.ncols() != dt {
            return Err(Error::DimensionMismatch { expected: dt, found: gate.nrows() });
        }
        let wire_dims: Vec<usize> = idx.iter().map(|&i| dims[i]).collect();
        let n = self.matrix.ncols();
        let mut cols: Vec<C64> = Vec::with_capacity(n * n);
        for col in 0..n {
            let v: Vec<C64> = self.matrix.column(col).iter().copied().collect();
            let (out, _) = kernel::apply(&v, &dims, &idx, gate, &wire_dims);
            cols.extend(out);
        }
        self.matrix = Matrix::from_vec(n, n, cols);
        Ok(self)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Regroups wires into output subsystems, e.g. `[("A", &["A1","A2"])]`,
    /// and input subsystems likewise, returning the grouped unitary.
    pub fn grouped(&self, inputs: &[(&str, &[&str])], outputs: &[(&str, &[&str])]) -> Result<Unitary> {
        let (in_reg, in_order) = self.group(inputs)?;
        let (out_reg, out_order) = self.group(outputs)?;
        let n = self.matrix.nrows();
        let dims = self.register.dims();
        let rows = reorder_map(&dims, &out_order);
        let cols = reorder_map(&dims, &in_order);
        let m = Matrix::from_fn(n, n, |i, j| self.matrix[(rows[i], cols[j])]);
        Unitary::new(in_reg, out_reg, m)
    }

    fn group(&self, groups: &[(&str, &[&str])]) -> Result<(Register, Vec<usize>)> {
        let mut entries = Vec::new();
        let mut order = Vec::new();
        for (name, wires) in groups {
            let idx = self.register.indices_of(wires)?;
            let d: usize = idx.iter().map(|&i| self.register.dims()[i]).product();
            entries.push((name.to_string(), d));
            order.extend(idx);
        }
        if order.len() != self.register.len() {
            return Err(Error::RegisterMismatch("grouping must cover every wire".into()));
        }
        let entries_ref: Vec<(&str, usize)> = entries.iter().map(|(l, d)| (l.as_str(), *d)).collect();
        Ok((Register::new(&entries_ref)?, order))
    }
}

/// map[new flat index] = old flat index for an axis reordering.
fn reorder_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let idx: Vec<C64> = (0..n).map(|i| c(i as f64, 0.0)).collect();
    kernel::permute(&idx, dims, order).iter().map(|z| z.re as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{fidelity, root_of_unity};

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn pauli_x_at_d2_is_sigma_x() {
        let x = gen_pauli_x(dim(2));
        let expect = Matrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(x.matrix(), &expect);
    }

    #[test]
    fn cyclicity_and_weyl_commutation() {
        for d in 2..=7 {
            let x = gen_pauli_x(dim(d));
            let z = gen_pauli_z(dim(d));
            let id = Matrix::identity(d, d);
            assert!(max_abs_diff(x.pow(d).unwrap().matrix(), &id) < 1e-12);
            assert!(max_abs_diff(z.pow(d).unwrap().matrix(), &id) < 1e-12);
            let zx = z.matrix() * x.matrix();
            let xz = (x.matrix() * z.matrix()) * root_of_unity(d, 1);
            assert!(max_abs_diff(&zx, &xz) < 1e-12);
        }
    }

    #[test]
    fn fourier_conjugates_shift_into_clock() {
        for d in 2..=7 {
            let h = fourier(dim(d));
            assert!(h.deviation_from_unitary() < 1e-12);
            let lhs = h.matrix() * shift_matrix(d, 1) * h.matrix().adjoint();
            assert!(max_abs_diff(&lhs, &clock_matrix(d, 1)) < 1e-12);
        }
        let h2 = fourier(dim(2));
        let s = 1.0 / 2f64.sqrt();
        let had = Matrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        assert!(max_abs_diff(h2.matrix(), &had) < 1e-15);
        let h3 = fourier(dim(3));
        assert!(h3.matrix().iter().all(|z| (z.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn controlled_gates() {
        let d2 = dim(2);
        let cnot = controlled(&[identity(d2), gen_pauli_x(d2)]).unwrap();
        let mut expect = Matrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            expect[(r, col)] = c(1., 0.);
        }
        assert_eq!(cnot.matrix(), &expect);

        let ids = vec![identity(dim(3)); 3];
        assert_eq!(controlled(&ids).unwrap().matrix(), &Matrix::identity(9, 9));

        // ⟨j, j⊕k| U |j, k⟩ = 1 for all nine inputs.
        let x = gen_pauli_x(dim(3));
        let powers: Vec<Unitary> = (0..3).map(|k| x.pow(k).unwrap()).collect();
        let u = controlled(&powers).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(u.matrix()[(j * 3 + (j + k) % 3, j * 3 + k)], c(1.0, 0.0));
            }
        }
        assert!(controlled(&[identity(dim(2)), identity(dim(3))]).is_err());
    }

    #[test]
    fn bell_basis_is_orthonormal_and_complete() {
        for d in [2, 3, 5] {
            let basis = bell_basis(dim(d), ["L", "R"]).unwrap();
            assert_eq!(basis.len(), d * d);
            let mut sum = Matrix::zeros(d * d, d * d);
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let g = a.inner(b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c(expect, 0.0)).norm() < 1e-12);
                }
                sum += a.density().matrix();
            }
            assert!(max_abs_diff(&sum, &Matrix::identity(d * d, d * d)) < 1e-12);
        }
        // d = 2: the four Bell states up to phase
        let basis = bell_basis(dim(2), ["L", "R"]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let bells = [[s, 0., 0., s], [s, 0., 0., -s], [0., s, s, 0.], [0., s, -s, 0.]];
        for b in bells {
            let reg = basis[0].register().clone();
            let v = Vector::from_iterator(4, b.iter().map(|&x| c(x, 0.)));
            let ref_state = PureState::new(reg, v).unwrap().density();
            let best = basis.iter().map(|p| fidelity(&p.density(), &ref_state).unwrap()).fold(0.0, f64::max);
            assert!((best - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn circuit_grouping_reorders_wires() {
        let reg = Register::new(&[("a", 2), ("b", 3)]).unwrap();
        let circ = Circuit::new(reg).gate(&shift_matrix(3, 1), &["b"]).unwrap();
        let u = circ.grouped(&[("in", &["a", "b"])], &[("B", &["b"]), ("A", &["a"])]).unwrap();
        // |a=1,b=0> -> |a=1,b=1> written as |B=1,A=1>
        assert_eq!(u.matrix()[(3, 3)], c(1.0, 0.0));
    }
}
