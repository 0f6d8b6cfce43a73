//! The masker circuits, built gate by gate over named wires.

use super::{Family, Masker, SAFE, SECRET, SHARE_A, SHARE_B};
use crate::qudit::{
    c, clock_matrix, controlled, fourier, shift_matrix, Circuit, DensityOperator, Dim, Matrix, Register, Unitary,
};
use crate::Result;

/// Σ_j |j⟩⟨j| ⊗ G^j for the powers of `g`, control first.
fn controlled_powers(d: usize, g: &Matrix) -> Result<Matrix> {
    let mut gates = Vec::with_capacity(d);
    let mut acc = Matrix::identity(g.nrows(), g.ncols());
    for _ in 0..d {
        gates.push(Unitary::on(Register::single("q", g.nrows())?, acc.clone())?);
        acc = g * acc;
    }
    Ok(controlled(&gates)?.into_matrix())
}

fn wires(names: &[&str], d: usize) -> Result<Register> {
    let entries: Vec<(&str, usize)> = names.iter().map(|&n| (n, d)).collect();
    Register::new(&entries)
}

fn safe(dims: usize, diag: impl Fn(usize) -> f64) -> Result<DensityOperator> {
    let m = Matrix::from_fn(dims, dims, |i, j| if i == j { c(diag(i), 0.0) } else { c(0.0, 0.0) });
    DensityOperator::new(Register::single(SAFE, dims)?, m)
}

/// Four wires: the secret, two `|0⟩` ancillas and one maximally mixed
/// ancilla. Shares are `A = (w1, w2)` and `B = (w3, w4)`; the safe state
/// `|00⟩⟨00| ⊗ I/d` has entropy log₂d.
pub fn masker_four_qudit(d: Dim) -> Result<Masker> {
    let n = d.get();
    let cx = controlled_powers(n, &shift_matrix(n, 1))?;
    let h = fourier(d).into_matrix();
    let circuit = Circuit::new(wires(&["w1", "w2", "w3", "w4"], n)?)
        .gate(&cx, &["w4", "w1"])?
        .gate(&cx, &["w1", "w3"])?
        .gate(&h, &["w4"])?
        .gate(&cx, &["w4", "w2"])?;
    let u = circuit.grouped(
        &[(SECRET, &["w1"]), (SAFE, &["w2", "w3", "w4"])],
        &[(SHARE_A, &["w1", "w2"]), (SHARE_B, &["w3", "w4"])],
    )?;
    // S index = w2·d² + w3·d + w4; only w2 = w3 = 0 carries weight.
    let omega = safe(n * n * n, |i| if i < n { 1.0 / n as f64 } else { 0.0 })?;
    Masker::new(Family::FourQudit, u, omega)
}

/// Controlled-X then controlled-Z on the secret from two maximally mixed
/// keys; the output is classical on `B = (s1, s2)`.
pub fn masker_qotp(d: Dim) -> Result<Masker> {
    let n = d.get();
    let cx = controlled_powers(n, &shift_matrix(n, 1))?;
    let cz = controlled_powers(n, &clock_matrix(n, 1))?;
    let circuit = Circuit::new(wires(&["c", "s1", "s2"], n)?).gate(&cx, &["s1", "c"])?.gate(&cz, &["s2", "c"])?;
    let u =
        circuit.grouped(&[(SECRET, &["c"]), (SAFE, &["s1", "s2"])], &[(SHARE_A, &["c"]), (SHARE_B, &["s1", "s2"])])?;
    let omega = safe(n * n, |_| 1.0 / (n * n) as f64)?;
    Masker::new(Family::Qotp, u, omega)
}

/// `|c, s⟩ ↦ |c + s, c + 2s⟩`. Masks exactly when 2 is invertible mod d.
pub fn masker_minimal(d: Dim) -> Result<Masker> {
    let n = d.get();
    let cx = controlled_powers(n, &shift_matrix(n, 1))?;
    let circuit = Circuit::new(wires(&["c", "s"], n)?).gate(&cx, &["s", "c"])?.gate(&cx, &["c", "s"])?;
    let u = circuit.grouped(&[(SECRET, &["c"]), (SAFE, &["s"])], &[(SHARE_A, &["c"]), (SHARE_B, &["s"])])?;
    let omega = safe(n, |_| 1.0 / n as f64)?;
    Masker::new(Family::Minimal, u, omega)
}

/// `|c, s⟩ ↦ |2s − c, s − c⟩`, shown with shares `B` and `K`. Odd d only.
pub fn masker_minimal_dual(d: Dim) -> Result<Masker> {
    let n = d.get();
    let h = fourier(d).into_matrix();
    let h2 = &h * &h;
    let cx2 = controlled_powers(n, &shift_matrix(n, 2))?;
    let cxdag = controlled_powers(n, &shift_matrix(n, -1))?;
    let circuit = Circuit::new(wires(&["c", "s"], n)?)
        .gate(&h2, &["c"])?
        .gate(&cx2, &["s", "c"])?
        .gate(&cxdag, &["c", "s"])?
        .gate(&h2, &["s"])?;
    let u = circuit.grouped(&[(SECRET, &["c"]), (SAFE, &["s"])], &[(SHARE_A, &["c"]), (SHARE_B, &["s"])])?;
    let omega = safe(n, |_| 1.0 / n as f64)?;
    Ok(Masker::new(Family::MinimalDual, u, omega)?.with_share_names(["B", "K"]))
}

/// The non-hiding reference point: `A = C`, `B = S`, `ω_S = |0⟩⟨0|`.
pub fn masker_identity(d: Dim) -> Result<Masker> {
    let n = d.get();
    let inp = Register::new(&[(SECRET, n), (SAFE, n)])?;
    let out = Register::new(&[(SHARE_A, n), (SHARE_B, n)])?;
    let u = Unitary::new(inp, out, Matrix::identity(n * n, n * n))?;
    let omega = safe(n, |i| if i == 0 { 1.0 } else { 0.0 })?;
    Masker::new(Family::Identity, u, omega)
}
