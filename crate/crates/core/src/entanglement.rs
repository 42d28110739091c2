//! Entanglement quantifiers: Wootters concurrence, logarithmic negativity,
//! PPT tests and pairwise concurrence matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{hermitian_eigenvalues, hermitize, partial_transpose, CMatrix, DensityMatrix, Space, C64};

/// Results below this are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

/// Eigenvalue threshold for the PPT test.
pub const PPT_TOL: f64 = 1e-10;

/// Density-matrix eigenvalues below this are rounding noise and dropped
/// from the Wootters factorization.
const RANK_TOL: f64 = 1e-12;

/// Ordered subsystem dimensions plus the subsystems forming side A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BipartitionSpec {
    dims: Vec<usize>,
    side_a: Vec<usize>,
}

impl BipartitionSpec {
    pub fn new(dims: Vec<usize>, mut side_a: Vec<usize>) -> Result<Self> {
        side_a.sort_unstable();
        side_a.dedup();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Bipartition(format!("bad subsystem dimensions {dims:?}")));
        }
        if side_a.is_empty() || side_a.len() >= dims.len() || side_a.iter().any(|&k| k >= dims.len()) {
            return Err(Error::Bipartition(format!(
                "side A {side_a:?} must be a nonempty proper subset of 0..{}",
                dims.len()
            )));
        }
        Ok(BipartitionSpec { dims, side_a })
    }

    /// `n` qubits with the 1-based atoms in `side_a` on side A.
    pub fn qubits(n: usize, side_a: &[usize]) -> Result<Self> {
        if side_a.iter().any(|&k| k == 0 || k > n) {
            return Err(Error::Bipartition(format!("atoms {side_a:?} out of range 1..={n}")));
        }
        Self::new(vec![2; n], side_a.iter().map(|k| k - 1).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Label such as `1|23` for qubit bipartitions (1-based).
    pub fn label(&self) -> String {
        let a: String = self.side_a.iter().map(|k| (k + 1).to_string()).collect();
        let b: String = (0..self.dims.len())
            .filter(|k| !self.side_a.contains(k))
            .map(|k| (k + 1).to_string())
            .collect();
        format!("{a}|{b}")
    }

    fn check(&self, rho: &CMatrix) -> Result<()> {
        if rho.nrows() != self.total_dim() {
            return Err(Error::Dimension {
                expected: self.total_dim(),
                got: rho.nrows(),
            });
        }
        Ok(())
    }
}

/// All bipartitions `A|B` of `n` qubits up to swapping the sides, with
/// atom 1 always on side A.
pub fn qubit_bipartitions(n: usize) -> Vec<BipartitionSpec> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        if mask & 1 == 0 {
            continue;
        }
        let side: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        out.push(BipartitionSpec::new(vec![2; n], side).expect("valid by construction"));
    }
    out
}

/// Wootters concurrence of a two-qubit state.
///
/// With `ρ = W W†` the concurrence is `max(0, λ1 - λ2 - λ3 - λ4)` where the
/// `λ` are the singular values of `Wᵀ (σy⊗σy) W`, which coincide with the
/// square roots of the eigenvalues of `√ρ ρ̃ √ρ` without taking square
/// roots of rounding noise.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    if m.nrows() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            got: m.nrows(),
        });
    }
    let eig = SymmetricEigen::new(hermitize(m));
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min < -PPT_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
    }
    let kept: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > RANK_TOL).collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    let w = CMatrix::from_fn(4, kept.len(), |r, c| {
        eig.eigenvectors[(r, kept[c])] * eig.eigenvalues[kept[c]].sqrt()
    });
    let yy = sigma_y_sigma_y();
    let tau = w.transpose() * yy * &w;
    let mut sv: Vec<f64> = tau.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let c = sv[0] - sv[1..].iter().sum::<f64>();
    Ok(clamp(c).min(1.0))
}

fn sigma_y_sigma_y() -> CMatrix {
    // σy ⊗ σy = antidiagonal (-1, 1, 1, -1)
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m
}

fn clamp(v: f64) -> f64 {
    if v < ZERO_CLAMP {
        0.0
    } else {
        v
    }
}

/// `E_{A|B} = log2 Tr|ρ^{T_A}|`.
pub fn log_negativity(rho: &DensityMatrix, split: &BipartitionSpec) -> Result<f64> {
    split.check(rho.matrix())?;
    let pt = partial_transpose(rho.matrix(), &split.dims, &split.side_a)?;
    let trace_norm: f64 = hermitian_eigenvalues(&pt).iter().map(|v| v.abs()).sum();
    Ok(clamp(trace_norm.log2()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptResult {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn ppt_check(rho: &DensityMatrix, split: &BipartitionSpec) -> Result<PptResult> {
    split.check(rho.matrix())?;
    let pt = partial_transpose(rho.matrix(), &split.dims, &split.side_a)?;
    let min_eigenvalue = hermitian_eigenvalues(&pt).first().copied().unwrap_or(0.0);
    Ok(PptResult {
        is_ppt: min_eigenvalue >= -PPT_TOL,
        min_eigenvalue,
    })
}

/// Symmetric matrix of two-qubit concurrences `C_ij`, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceMatrix {
    values: DMatrix<f64>,
}

impl ConcurrenceMatrix {
    pub fn n_atoms(&self) -> usize {
        self.values.nrows()
    }

    /// `C_ij` for 1-based atom indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1, j - 1)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Upper-triangle entries `(i, j, C_ij)` with `i < j`, 1-based.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_atoms();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push((i + 1, j + 1, self.values[(i, j)]));
            }
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn pairwise_concurrences(rho: &DensityMatrix) -> Result<ConcurrenceMatrix> {
    if rho.space() != Space::Ground {
        return Err(Error::InvalidState(
            "pairwise concurrences need a ground (qubit) state".into(),
        ));
    }
    let n = rho.n_atoms().unwrap_or(0);
    if n < 2 {
        return Err(Error::InvalidState(format!("need at least two atoms, got {n}")));
    }
    let mut values = DMatrix::zeros(n, n);
    for i in 1..=n {
        for j in i + 1..=n {
            let pair = rho.partial_trace(&[i, j])?;
            let c = concurrence(&pair)?;
            values[(i - 1, j - 1)] = c;
            values[(j - 1, i - 1)] = c;
        }
    }
    Ok(ConcurrenceMatrix { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::kron;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pure(amps: &[C64]) -> CMatrix {
        let v = CMatrix::from_column_slice(amps.len(), 1, amps);
        &v * v.adjoint()
    }

    fn ground(m: CMatrix) -> DensityMatrix {
        DensityMatrix::new(m, Space::Ground).unwrap()
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &a * a.adjoint();
        let tr = m.trace();
        m.map(|v| v / tr)
    }

    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        a.qr().q()
    }

    #[test]
    fn concurrence_of_bell_and_product_states() {
        let h = 0.5f64.sqrt();
        let bell = ground(pure(&[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]));
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        let prod = ground(pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(concurrence(&prod).unwrap(), 0.0);
        let mixed = ground(CMatrix::identity(4, 4).scale(0.25));
        assert_eq!(concurrence(&mixed).unwrap(), 0.0);
        assert!(concurrence(&DensityMatrix::new(CMatrix::identity(2, 2).scale(0.5), Space::Ground).unwrap()).is_err());
    }

    #[test]
    fn log_negativity_of_bell_state() {
        let h = 0.5f64.sqrt();
        let bell = ground(pure(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]));
        let split = BipartitionSpec::qubits(2, &[1]).unwrap();
        assert!((log_negativity(&bell, &split).unwrap() - 1.0).abs() < 1e-12);
        let ppt = ppt_check(&bell, &split).unwrap();
        assert!(!ppt.is_ppt);
        assert!((ppt.min_eigenvalue + 0.5).abs() < 1e-12);
        let wrong = BipartitionSpec::qubits(3, &[1]).unwrap();
        assert!(log_negativity(&bell, &wrong).is_err());
    }

    #[test]
    fn bipartition_validation_and_labels() {
        assert!(BipartitionSpec::new(vec![2, 2], vec![]).is_err());
        assert!(BipartitionSpec::new(vec![2, 2], vec![0, 1]).is_err());
        assert!(BipartitionSpec::new(vec![2, 2], vec![2]).is_err());
        assert_eq!(BipartitionSpec::qubits(3, &[2]).unwrap().label(), "2|13");
        let labels: Vec<String> = qubit_bipartitions(3).iter().map(|b| b.label()).collect();
        assert_eq!(labels, vec!["1|23", "12|3", "13|2"]);
        assert_eq!(qubit_bipartitions(4).len(), 7);
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let split = BipartitionSpec::qubits(2, &[1]).unwrap();
        for _ in 0..20 {
            let rho = random_density(4, &mut rng);
            let u = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
            let rotated = &u * &rho * u.adjoint();
            let (a, b) = (ground(rho), ground(rotated));
            assert!((concurrence(&a).unwrap() - concurrence(&b).unwrap()).abs() < 1e-9);
            assert!((log_negativity(&a, &split).unwrap() - log_negativity(&b, &split).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn pairwise_matrix_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = ground(random_density(8, &mut rng));
        let cm = pairwise_concurrences(&rho).unwrap();
        for i in 1..=3 {
            assert_eq!(cm.get(i, i), 0.0);
            for j in 1..=3 {
                assert_eq!(cm.get(i, j), cm.get(j, i));
                assert!((0.0..=1.0).contains(&cm.get(i, j)));
            }
        }
        let product = ground(kron(
            &kron(&pure(&[c(1.0, 0.0), c(0.0, 0.0)]), &pure(&[c(0.6, 0.0), c(0.0, 0.8)])),
            &CMatrix::identity(2, 2).scale(0.5),
        ));
        assert_eq!(pairwise_concurrences(&product).unwrap().max(), 0.0);
    }

    #[test]
    fn negativity_monotone_under_discarding_for_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let amps: Vec<C64> = (0..8)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let amps: Vec<C64> = amps.iter().map(|a| a / norm).collect();
            let rho = ground(pure(&amps));
            let full = log_negativity(&rho, &BipartitionSpec::qubits(3, &[1]).unwrap()).unwrap();
            let reduced = rho.partial_trace(&[1, 2]).unwrap();
            let part = log_negativity(&reduced, &BipartitionSpec::qubits(2, &[1]).unwrap()).unwrap();
            assert!(part <= full + 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn peres_horodecki_two_qubits(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = ground(random_density(4, &mut rng));
            let split = BipartitionSpec::qubits(2, &[1]).unwrap();
            let entangled_c = concurrence(&rho).unwrap() > 0.0;
            let entangled_n = log_negativity(&rho, &split).unwrap() > 0.0;
            let npt = !ppt_check(&rho, &split).unwrap().is_ppt;
            proptest::prop_assert_eq!(entangled_c, entangled_n);
            proptest::prop_assert_eq!(entangled_n, npt);
        }
    }
}
