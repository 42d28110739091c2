//! Dense spectral route to the asymptotic map, used as an oracle for the
//! sector cascade on small arrays.
//!
//! The kernel of the superoperator is found from its singular value
//! decomposition: right null vectors span the stationary operators, left
//! null vectors the conserved quantities. Biorthonormalizing the two gives
//! `M∞[X] = Σ_k U_k Tr(V_k† X)`.
//!
//! The generator is block triangular in excitation sectors: the
//! dissipative part maps the `(m, n)` block to itself and the jump part
//! lowers it to `(m-1, n-1)`. Its spectrum is therefore the union over
//! sectors of `-(κ_a + conj(κ_b))` with `κ` the eigenvalues of the effective
//! operator restricted to sectors `m` and `n`. A dense Schur decomposition
//! of the whole superoperator fails to converge on the strongly defective
//! cascaded case, so the eigenvalues are assembled this way. Eigen-operators are returned for the kernel
//! only: away from zero the chiral generator is generically defective
//! (cascaded atoms share decay rates), so a biorthonormal eigenbasis does
//! not exist there.

use nalgebra::Schur;

use crate::error::{Error, Result};
use crate::liouvillian::{Liouvillian, SCHUR_EPS};
use crate::state::{excitation_count, max_abs, CMatrix, C64};

/// Dense superoperators are built for at most this many atoms (`9^3 = 729`).
pub const SPECTRAL_MAX_ATOMS: usize = 3;

/// Relative threshold `|λ| < NULL_REL_TOL · max|λ|` identifying the kernel.
pub const NULL_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<C64>,
    right: Vec<CMatrix>,
    left: Vec<CMatrix>,
    biorthonormality_error: f64,
    null_residual: f64,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Right eigen-operators `U_k` spanning the kernel.
    pub fn right_null(&self) -> &[CMatrix] {
        &self.right
    }

    /// Left eigen-operators `V_k` with `Tr(V_k† U_l) = δ_kl`.
    pub fn left_null(&self) -> &[CMatrix] {
        &self.left
    }

    pub fn null_dimension(&self) -> usize {
        self.right.len()
    }

    /// `max |Tr(V_k† U_l) - δ_kl|`.
    pub fn biorthonormality_error(&self) -> f64 {
        self.biorthonormality_error
    }

    /// Largest entry of `L[U_k]` or of the left action on `V_k`.
    pub fn null_residual(&self) -> f64 {
        self.null_residual
    }

    /// `Σ_k U_k Tr(V_k† X)`.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for (u, v) in self.right.iter().zip(&self.left) {
            let w = v.dotc(x);
            out += u * w;
        }
        out
    }
}

pub fn spectral_decompose(l: &Liouvillian) -> Result<SpectralData> {
    let n = l.config().n_atoms();
    if n > SPECTRAL_MAX_ATOMS {
        return Err(Error::Config(format!(
            "dense spectral decomposition is limited to {SPECTRAL_MAX_ATOMS} atoms, got {n}"
        )));
    }
    let d = l.dim();
    let expected_null = 4usize.pow(n as u32);
    let s = l.superoperator();

    let eigenvalues = sector_eigenvalues(l)?;
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let null_count = eigenvalues.iter().filter(|z| z.norm() < NULL_REL_TOL * scale).count();
    if null_count != expected_null {
        return Err(Error::Numerical(format!(
            "kernel has {null_count} eigenvalues, expected 4^{n} = {expected_null}"
        )));
    }

    let right_cols = kernel_basis(&s, expected_null)?;
    // Left null vectors come from a second decomposition of the adjoint:
    // the left singular vectors of a clustered zero block are not reliable.
    let left_cols = kernel_basis(&s.adjoint(), expected_null)?;
    let gram = left_cols.adjoint() * &right_cols;
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("left and right kernels are not dual: zero eigenvalue is defective".into()))?;
    let left_dual = &left_cols * gram_inv.adjoint();

    let overlap = left_dual.adjoint() * &right_cols;
    let biorthonormality_error = max_abs(&(overlap - CMatrix::identity(expected_null, expected_null)));
    let null_residual = max_abs(&(&s * &right_cols)).max(max_abs(&(left_cols.adjoint() * &s)));
    if biorthonormality_error > 1e-8 || null_residual > 1e-8 {
        return Err(Error::Numerical(format!(
            "kernel check failed: biorthonormality {biorthonormality_error:e}, residual {null_residual:e}"
        )));
    }

    let unvec = |m: &CMatrix, k: usize| CMatrix::from_column_slice(d, d, m.column(k).as_slice());
    Ok(SpectralData {
        eigenvalues,
        right: (0..expected_null).map(|k| unvec(&right_cols, k)).collect(),
        left: (0..expected_null).map(|k| unvec(&left_dual, k)).collect(),
        biorthonormality_error,
        null_residual,
    })
}

/// Orthonormal basis (as columns) of the `k`-dimensional right kernel of `s`,
/// taken from the right singular vectors of the `k` smallest singular values.
fn kernel_basis(s: &CMatrix, k: usize) -> Result<CMatrix> {
    let svd = s.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let scale = svd.singular_values.max();
    let worst = svd.singular_values[order[k - 1]];
    let next = svd.singular_values[order[k]];
    if worst > NULL_REL_TOL * scale || next < NULL_REL_TOL * scale {
        return Err(Error::Numerical(format!(
            "singular values do not separate a {k}-dimensional kernel \
             (last kept {worst:e}, first excluded {next:e})"
        )));
    }
    Ok(CMatrix::from_fn(s.ncols(), k, |r, c| v_t[(order[c], r)].conj()))
}

fn sector_eigenvalues(l: &Liouvillian) -> Result<Vec<C64>> {
    let n = l.config().n_atoms();
    let k = l.effective_operator();
    let mut per_sector = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let idx: Vec<usize> = (0..l.dim()).filter(|&i| excitation_count(i, n) == m).collect();
        let km = CMatrix::from_fn(idx.len(), idx.len(), |r, c| k[(idx[r], idx[c])]);
        let eig = if m == 0 {
            vec![C64::new(0.0, 0.0); idx.len()]
        } else {
            Schur::try_new(km, SCHUR_EPS, 100_000)
                .and_then(|s| s.eigenvalues())
                .ok_or_else(|| Error::Numerical(format!("Schur decomposition of sector {m} failed")))?
                .iter()
                .copied()
                .collect()
        };
        per_sector.push(eig);
    }
    let mut out = Vec::with_capacity(l.dim() * l.dim());
    for a in &per_sector {
        for b in &per_sector {
            for ka in a {
                for kb in b {
                    out.push(-(ka + kb.conj()));
                }
            }
        }
    }
    Ok(out)
}
