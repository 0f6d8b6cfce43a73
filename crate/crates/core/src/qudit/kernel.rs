//! Index gymnastics on row-major tensors. Everything here works on raw
//! amplitude slices plus a dimension list; the typed wrappers live in
//! `state.rs` and `ensemble.rs`.

use super::{Matrix, C64};

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Reorders tensor axes: axis `k` of the result is axis `order[k]` of the input.
pub(crate) fn permute(data: &[C64], dims: &[usize], order: &[usize]) -> Vec<C64> {
    debug_assert_eq!(order.len(), dims.len());
    if order.iter().enumerate().all(|(k, &o)| k == o) {
        return data.to_vec();
    }
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let step: Vec<usize> = order.iter().map(|&o| old_strides[o]).collect();
    let n = data.len();
    let mut out = Vec::with_capacity(n);
    let mut counter = vec![0usize; dims.len()];
    let mut offset = 0usize;
    for _ in 0..n {
        out.push(data[offset]);
        for k in (0..new_dims.len()).rev() {
            counter[k] += 1;
            offset += step[k];
            if counter[k] < new_dims[k] {
                break;
            }
            offset -= step[k] * new_dims[k];
            counter[k] = 0;
        }
    }
    out
}

/// For each flat index, the flat index of its `keep` part and of the rest.
pub(crate) fn split_indices(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let s = strides(dims);
    let total: usize = dims.iter().product();
    let mut k_idx = Vec::with_capacity(total);
    let mut r_idx = Vec::with_capacity(total);
    for flat in 0..total {
        let digit = |axis: usize| (flat / s[axis]) % dims[axis];
        let mut k = 0;
        for &a in keep {
            k = k * dims[a] + digit(a);
        }
        let mut r = 0;
        for &a in &rest {
            r = r * dims[a] + digit(a);
        }
        k_idx.push(k);
        r_idx.push(r);
    }
    (k_idx, r_idx)
}

/// Applies `op` (rows = product of `out_dims`, cols = product of the target
/// dims) to the target axes. The output axes replace the targets in place
/// when the shapes match; otherwise they are inserted, in order, at the
/// position of the first target (or at the front if there are no targets).
pub(crate) fn apply(
    data: &[C64],
    dims: &[usize],
    targets: &[usize],
    op: &Matrix,
    out_dims: &[usize],
) -> (Vec<C64>, Vec<usize>) {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();
    let mut order = targets.to_vec();
    order.extend(&rest);
    let front = permute(data, dims, &order);
    let dt: usize = targets.iter().map(|&t| dims[t]).product();
    let dr: usize = rest.iter().map(|&r| dims[r]).product();
    let d_out: usize = out_dims.iter().product();
    assert_eq!(op.ncols(), dt, "operator columns do not match target dimension");
    assert_eq!(op.nrows(), d_out, "operator rows do not match output dimension");

    let mut out = vec![C64::new(0.0, 0.0); d_out * dr];
    for t in 0..dt {
        let src = &front[t * dr..(t + 1) * dr];
        if src.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            continue;
        }
        for o in 0..d_out {
            let c = op[(o, t)];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let dst = &mut out[o * dr..(o + 1) * dr];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }

    // Axes of `out` are currently [outputs..., rest...].
    let n_out = out_dims.len();
    let mut cur_dims = out_dims.to_vec();
    cur_dims.extend(rest.iter().map(|&r| dims[r]));
    let same_shape = n_out == targets.len() && targets.iter().zip(out_dims).all(|(&t, &o)| dims[t] == o);
    // final_pos[k]: result position of current axis k
    let final_pos: Vec<usize> = if same_shape {
        let mut pos = targets.to_vec();
        pos.extend(&rest);
        pos
    } else {
        let insert_at = targets.iter().copied().min().map_or(0, |m| rest.iter().filter(|&&r| r < m).count());
        let mut pos = vec![0; cur_dims.len()];
        for (k, slot) in pos.iter_mut().take(n_out).enumerate() {
            *slot = insert_at + k;
        }
        for (j, _) in rest.iter().enumerate() {
            pos[n_out + j] = if j < insert_at { j } else { j + n_out };
        }
        pos
    };
    let mut inverse = vec![0; cur_dims.len()];
    for (k, &p) in final_pos.iter().enumerate() {
        inverse[p] = k;
    }
    let result = permute(&out, &cur_dims, &inverse);
    let new_dims = inverse.iter().map(|&k| cur_dims[k]).collect();
    (result, new_dims)
}

/// Provenance of each axis of an `apply` result: `Ok(k)` is output axis `k`,
/// `Err(a)` is the untouched input axis `a`.
pub(crate) fn apply_layout(
    n_axes: usize,
    targets: &[usize],
    n_out: usize,
    same_shape: bool,
) -> Vec<std::result::Result<usize, usize>> {
    let rest: Vec<usize> = (0..n_axes).filter(|i| !targets.contains(i)).collect();
    if same_shape {
        (0..n_axes)
            .map(|a| match targets.iter().position(|&t| t == a) {
                Some(k) => Ok(k),
                None => Err(a),
            })
            .collect()
    } else {
        let insert_at = targets.iter().copied().min().map_or(0, |m| rest.iter().filter(|&&r| r < m).count());
        let mut layout: Vec<std::result::Result<usize, usize>> = rest.iter().map(|&r| Err(r)).collect();
        for k in (0..n_out).rev() {
            layout.insert(insert_at, Ok(k));
        }
        layout
    }
}

/// Reduced density matrix of a pure amplitude vector.
pub(crate) fn reduce_pure(data: &[C64], dims: &[usize], keep: &[usize]) -> Matrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let mut order = keep.to_vec();
    order.extend(&rest);
    let front = permute(data, dims, &order);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dr: usize = rest.iter().map(|&r| dims[r]).product();
    let m = Matrix::from_row_slice(dk, dr, &front);
    &m * m.adjoint()
}

/// Partial trace of a density matrix onto the `keep` axes (in the order given).
pub(crate) fn reduce_density(rho: &Matrix, dims: &[usize], keep: &[usize]) -> Matrix {
    let (k_idx, r_idx) = split_indices(dims, keep);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dr = k_idx.len() / dk;
    // table[r][k] = flat index
    let mut table = vec![0usize; dk * dr];
    for (flat, (&k, &r)) in k_idx.iter().zip(&r_idx).enumerate() {
        table[r * dk + k] = flat;
    }
    let mut out = Matrix::zeros(dk, dk);
    for r in 0..dr {
        let row = &table[r * dk..(r + 1) * dk];
        for (k1, &i) in row.iter().enumerate() {
            for (k2, &j) in row.iter().enumerate() {
                out[(k1, k2)] += rho[(i, j)];
            }
        }
    }
    out
}

/// Applies `op` to the target axes of a density matrix: ρ ↦ op ρ op†.
pub(crate) fn conjugate_density(
    rho: &Matrix,
    dims: &[usize],
    targets: &[usize],
    op: &Matrix,
    out_dims: &[usize],
) -> (Matrix, Vec<usize>) {
    let n = rho.nrows();
    let mut new_dims = Vec::new();
    // A = op ρ, column by column.
    let mut cols = Vec::with_capacity(n);
    for c in 0..n {
        let col: Vec<C64> = rho.column(c).iter().copied().collect();
        let (v, nd) = apply(&col, dims, targets, op, out_dims);
        new_dims = nd;
        cols.push(v);
    }
    let d_new = cols.first().map_or(0, |v| v.len());
    let a = Matrix::from_fn(d_new, n, |i, j| cols[j][i]);
    // op ρ op† = (op A†)†
    let a_dag = a.adjoint();
    let mut cols2 = Vec::with_capacity(d_new);
    for c in 0..d_new {
        let col: Vec<C64> = a_dag.column(c).iter().copied().collect();
        let (v, _) = apply(&col, dims, targets, op, out_dims);
        cols2.push(v);
    }
    let b = Matrix::from_fn(d_new, d_new, |i, j| cols2[j][i]);
    (b.adjoint(), new_dims)
}

/// Permutes both the row and column axes of a density matrix.
pub(crate) fn permute_density(rho: &Matrix, dims: &[usize], order: &[usize]) -> Matrix {
    let n = rho.nrows();
    let idx: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 0.0)).collect();
    let map: Vec<usize> = permute(&idx, dims, order).iter().map(|z| z.re as usize).collect();
    Matrix::from_fn(n, n, |i, j| rho[(map[i], map[j])])
}
