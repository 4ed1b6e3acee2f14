//! Dense (nalgebra) reference implementations of the constrained spectral
//! quantities, built independently of the iterative solvers: the multiplier
//! becomes an explicit circulant, the even subspace an explicit orthonormal
//! basis, and constraints are removed by Householder deflation.

#![allow(dead_code)]

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use relsol_core::groundstate::GroundState;
use relsol_core::linops::OperatorKind;
use relsol_core::spectral::{hc_symbol, Grid};

/// Pointwise-action matrix of a real even Fourier multiplier. The circulant
/// first row is (1/N) sum_k sig_k cos(2 pi k d / N); the integer product k d
/// is reduced mod N before entering the cosine so the entries stay exact to
/// round-off even for large N.
pub fn dense_multiplier(grid: &Grid, sig: &[f64]) -> DMatrix<f64> {
    let n = grid.n();
    let row: Vec<f64> = (0..n)
        .map(|d| {
            let mut s = 0.0;
            for (k, &sk) in sig.iter().enumerate() {
                let m = (k * d) % n;
                s += sk * (std::f64::consts::TAU * m as f64 / n as f64).cos();
            }
            s / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| row[(i + n - j) % n])
}

/// Kinetic symbol and potential diagonal of the linearization around a
/// profile, recomputed from the model data rather than read off the
/// operator under test.
pub fn sig_pot(gs: &GroundState, kind: OperatorKind) -> (Vec<f64>, Vec<f64>) {
    let grid = gs.q.grid();
    let sig: Vec<f64> = (0..grid.n())
        .map(|k| {
            let xi = grid.xi(k);
            match kind {
                OperatorKind::LInf => xi * xi,
                OperatorKind::LC => hc_symbol(xi, gs.params.c),
            }
        })
        .collect();
    let p = gs.params.p;
    let pot: Vec<f64> = gs
        .q
        .values()
        .iter()
        .map(|z| gs.mu - p * z.norm().powf(p - 1.0))
        .collect();
    (sig, pot)
}

/// Orthonormal basis (h-weighted inner product) of the even subspace:
/// the two self-paired nodes 0 and N/2 plus the symmetric pairs.
pub fn even_basis(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let m = n / 2 + 1;
    let mut cb = DMatrix::zeros(n, m);
    cb[(0, 0)] = 1.0 / h.sqrt();
    for j in 1..n / 2 {
        cb[(j, j)] = 1.0 / (2.0 * h).sqrt();
        cb[(n - j, j)] = 1.0 / (2.0 * h).sqrt();
    }
    cb[(n / 2, n / 2)] = 1.0 / h.sqrt();
    cb
}

/// Matrix of a pointwise-action operator restricted to the even basis.
pub fn reduce_even(grid: &Grid, a: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * a * basis * grid.spacing()
}

/// Coordinates of a real field in the even basis.
pub fn even_coords(grid: &Grid, basis: &DMatrix<f64>, v: &[f64]) -> DVector<f64> {
    basis.transpose() * DVector::from_column_slice(v) * grid.spacing()
}

pub fn min_eig_dense(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

/// Smallest eigenvalue on the orthogonal complement of `v`: reflect `v`
/// onto the first coordinate axis and drop that row and column.
pub fn min_eig_dense_orth(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let m = a.nrows();
    let unit = v / v.norm();
    let mut w = unit.clone();
    w[0] -= 1.0;
    let wn = w.norm();
    let deflated = if wn < 1e-12 {
        a.clone()
    } else {
        let w = w / wn;
        let refl = DMatrix::identity(m, m) - (w.clone() * w.transpose()) * 2.0;
        &refl * a * &refl
    };
    let sub = deflated.view((1, 1), (m - 1, m - 1)).into_owned();
    SymmetricEigen::new(sub).eigenvalues.min()
}

fn assemble_even(gs: &GroundState, kind: OperatorKind) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let grid = gs.q.grid();
    let (sig, pot) = sig_pot(gs, kind);
    let mut a = dense_multiplier(grid, &sig);
    for j in 0..grid.n() {
        a[(j, j)] += pot[j];
    }
    let basis = even_basis(grid);
    let reduced = reduce_even(grid, &a, &basis);
    let qvec: Vec<f64> = gs.q.values().iter().map(|z| z.re).collect();
    let q_red = even_coords(grid, &basis, &qvec);
    (reduced, basis, q_red)
}

/// Dense value of the smallest eigenvalue on the even subspace, optionally
/// restricted to the complement of the profile.
pub fn dense_even_min_eig(gs: &GroundState, kind: OperatorKind, orth_q: bool) -> f64 {
    let (reduced, _, q_red) = assemble_even(gs, kind);
    if orth_q {
        min_eig_dense_orth(&reduced, &q_red)
    } else {
        min_eig_dense(&reduced)
    }
}

/// Dense generalized minimum of <L v, v> / <(1 + K) v, v> over even v with
/// <v, Q> = 0, by explicit whitening of the reduced matrices.
pub fn dense_coercivity_ratio(gs: &GroundState, kind: OperatorKind) -> f64 {
    let grid = gs.q.grid();
    let (reduced, basis, q_red) = assemble_even(gs, kind);
    let (sig, _) = sig_pot(gs, kind);
    let b_sig: Vec<f64> = sig.iter().map(|&s| 1.0 + s).collect();
    let b_red = reduce_even(grid, &dense_multiplier(grid, &b_sig), &basis);
    let se = SymmetricEigen::new(b_red);
    let dinv = DMatrix::from_diagonal(&se.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let b_inv_half = &se.eigenvectors * dinv * se.eigenvectors.transpose();
    let whitened = &b_inv_half * reduced * &b_inv_half;
    let q_white = &b_inv_half * q_red;
    min_eig_dense_orth(&whitened, &q_white)
}
