//! Dense decompositions backed by faer.
//!
//! The complex Hermitian solver can return NaN on very sparse inputs (exact
//! zero columns during tridiagonalization, seen from n ≈ 65 upward), which is
//! the typical shape of Choi matrices of identity-like channels. When that
//! happens the problem is re-solved on `W* H W` for a fixed-seed Haar unitary
//! `W`, which has the same spectrum and no structural zeros.

use faer::complex_native::c64;
use faer::{Mat, Side};

use crate::tensor::{hermitian_part, CMatrix, C64};

fn to_faer(m: &CMatrix) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64 { re: z.re, im: z.im }
    })
}

fn from_faer(m: faer::MatRef<'_, c64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m.read(i, j);
        C64::new(z.re, z.im)
    })
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of the Hermitian
/// part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.nrows() == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let (vals, vecs) = match raw_eigen(&h) {
        Some(r) => r,
        None => {
            let w = rotation(h.nrows());
            let (vals, vecs) = raw_eigen(&(w.adjoint() * &h * &w)).expect("eigensolver failed on a dense input");
            (vals, w * vecs)
        }
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = CMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, order[c])]);
    (sorted_vals, sorted_vecs)
}

fn raw_eigen(h: &CMatrix) -> Option<(Vec<f64>, CMatrix)> {
    let evd = to_faer(h).selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let vals: Vec<f64> = (0..s.nrows()).map(|i| s.read(i).re).collect();
    let vecs = from_faer(evd.u());
    let finite = vals.iter().all(|v| v.is_finite()) && vecs.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    finite.then_some((vals, vecs))
}

fn raw_eigenvalues(h: &CMatrix) -> Option<Vec<f64>> {
    let v = to_faer(h).selfadjoint_eigenvalues(Side::Lower);
    v.iter().all(|x| x.is_finite()).then_some(v)
}

/// Fixed-seed Haar unitary used to break sparsity before retrying.
fn rotation(n: usize) -> CMatrix {
    crate::random::unitary(&mut crate::random::rng(0x5eed_0f_e16e), n)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut v = raw_eigenvalues(&h).unwrap_or_else(|| {
        let w = rotation(h.nrows());
        raw_eigenvalues(&(w.adjoint() * &h * &w)).expect("eigensolver failed on a dense input")
    });
    v.sort_by(f64::total_cmp);
    v
}

/// Thin SVD `m = U diag(s) V*`, singular values descending.
pub fn thin_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    if m.nrows() == 0 || m.ncols() == 0 {
        let k = m.nrows().min(m.ncols());
        return (CMatrix::zeros(m.nrows(), k), Vec::new(), CMatrix::zeros(m.ncols(), k));
    }
    let svd = to_faer(m).thin_svd();
    let s = svd.s_diagonal();
    let vals: Vec<f64> = (0..s.nrows()).map(|i| s.read(i).re).collect();
    (from_faer(svd.u()), vals, from_faer(svd.v()))
}

/// Orthonormal basis (as columns) of the column space of `m`, keeping
/// singular values above `rel · σ_max`.
pub fn orthonormal_columns(m: &CMatrix, rel: f64) -> CMatrix {
    let (u, s, _) = thin_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel * smax).collect();
    CMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthonormal basis of the range of an (approximate) orthogonal projection.
pub fn range_projection(p: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(p);
    // eigenvalues cluster at 0 and 1, so split halfway
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    CMatrix::from_fn(p.nrows(), keep.len(), |r, c| vecs[(r, keep[c])])
}

/// Moore-Penrose pseudo-inverse with relative cutoff `rel`.
pub fn pseudo_inverse(m: &CMatrix, rel: f64) -> CMatrix {
    let (u, s, v) = thin_svd(m);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk > rel * smax {
            out += v.column(k) * u.column(k).adjoint() * C64::new(1.0 / sk, 0.0);
        }
    }
    out
}
