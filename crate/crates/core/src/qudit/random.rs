use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, DensityOperator, Matrix, PureState, Register, Vector};

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
}

/// Orthonormalizes the columns of a Gaussian matrix with phase-fixed QR, which
/// yields Haar-distributed isometries.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    assert!(cols <= rows);
    let g = gaussian(rows, cols, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_unitary(d: usize, rng: &mut impl Rng) -> Matrix {
    random_isometry(d, d, rng)
}

pub fn random_pure(register: &Register, rng: &mut impl Rng) -> PureState {
    let n = register.total_dim();
    let v: Vector = gaussian(n, 1, rng).column(0).into_owned().normalize();
    PureState::new(register.clone(), v).expect("normalized by construction")
}

/// Random mixed state G G† / Tr with a `rank`-column Gaussian G.
pub fn random_density(register: &Register, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let n = register.total_dim();
    let g = gaussian(n, rank, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(register.clone(), m.unscale(t)).expect("valid by construction")
}
