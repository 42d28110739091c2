//! Independent numerical routes used to cross-check the sector solvers:
//! long-time integration, quadrature of the relaxation integrals, and
//! seeded random inputs for property checks.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::detection::{emitted_photon_count, time_resolved_from_state, PhotonIndex};
use crate::error::Result;
use crate::integrate::{dopri5, Tolerances};
use crate::liouvillian::Liouvillian;
use crate::state::{hermitize, kron, CMatrix, DensityMatrix, C64};

/// Integration horizon (units of 1/γ) standing in for `t → ∞`.
pub const LONG_TIME: f64 = 50.0;

/// `M_T[X]` at `T =` [`LONG_TIME`].
pub fn long_time_asymptotic(l: &Liouvillian, x: &CMatrix) -> Result<CMatrix> {
    l.evolve_operator(x, LONG_TIME, Tolerances::default())
}

fn flat(m: &CMatrix) -> impl Iterator<Item = C64> + '_ {
    m.as_slice().iter().copied()
}

/// `∫₀^T (M_t[ρ0] - M∞[ρ0]) dt` by integrating the state alongside its
/// running integral. For `T` large this equals `-L^D(ρ0)`.
pub fn relaxation_integral(l: &Liouvillian, rho0: &CMatrix, horizon: f64) -> Result<CMatrix> {
    let d = l.dim();
    let d2 = d * d;
    let fin = l.asymptotic_operator(rho0)?;
    let y0 = DVector::from_iterator(2 * d2, flat(rho0).chain(std::iter::repeat_n(C64::new(0.0, 0.0), d2)));
    let y = dopri5(
        |_, y: &DVector<C64>| {
            let x = CMatrix::from_column_slice(d, d, &y.as_slice()[..d2]);
            let dx = l.apply_unchecked(&x);
            DVector::from_iterator(2 * d2, flat(&dx).chain(flat(&(x - &fin))))
        },
        y0,
        0.0,
        horizon,
        Tolerances::default(),
    )?;
    Ok(CMatrix::from_column_slice(d, d, &y.as_slice()[d2..]))
}

/// `∫₀^T M∞[B_p M_t(ρ0) B_p'†] dt`, integrating the time-resolved joint
/// state directly along the trajectory. For `T` large this equals
/// `N0 ×` the detection-time-averaged joint state.
pub fn time_resolved_integral(l: &Liouvillian, rho0: &DensityMatrix, horizon: f64) -> Result<CMatrix> {
    emitted_photon_count(rho0)?;
    let d = l.dim();
    let d2 = d * d;
    let j = PhotonIndex::COUNT << l.config().n_atoms();
    let j2 = j * j;
    let y0 = DVector::from_iterator(
        d2 + j2,
        flat(rho0.matrix()).chain(std::iter::repeat_n(C64::new(0.0, 0.0), j2)),
    );
    let y = dopri5(
        |_, y: &DVector<C64>| {
            let x = CMatrix::from_column_slice(d, d, &y.as_slice()[..d2]);
            let dx = l.apply_unchecked(&x);
            let rate = time_resolved_from_state(l, &x).expect("cascade succeeded at t = 0");
            DVector::from_iterator(d2 + j2, flat(&dx).chain(flat(&rate)))
        },
        y0,
        0.0,
        horizon,
        Tolerances::default(),
    )?;
    Ok(CMatrix::from_column_slice(j, j, &y.as_slice()[d2..]))
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix of shape `rows × cols`.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random density matrix `W W† / Tr` with `W` of shape `dim × rank`.
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let w = random_matrix(rng, dim, rank);
    let rho = &w * w.adjoint();
    let tr = rho.trace().re;
    hermitize(&rho.unscale(tr))
}

/// Haar-random element of SU(2) from a uniform unit quaternion.
pub fn random_su2(rng: &mut impl Rng) -> CMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|x| x / norm);
    let alpha = C64::new(a, b);
    let beta = C64::new(c, d);
    CMatrix::from_row_slice(2, 2, &[alpha, -beta.conj(), beta, alpha.conj()])
}

/// `u ⊕ 1` on `{+, -, e}` taken to the `n`-th tensor power.
pub fn global_rotation(u: &CMatrix, n: usize) -> CMatrix {
    let mut single = CMatrix::identity(3, 3);
    single.view_mut((0, 0), (2, 2)).copy_from(u);
    (1..n).fold(single.clone(), |acc, _| kron(&acc, &single))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::one_photon_joint;
    use crate::state::{max_abs, KetString, SystemConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn long_time_matches_cascade_single_atom() {
        let cfg = SystemConfig::equidistant(1, 0.3, 0.0).unwrap();
        let l = Liouvillian::new(&cfg).unwrap();
        let rho0 = "e".parse::<KetString>().unwrap().density_matrix(&cfg).unwrap();
        let a = long_time_asymptotic(&l, rho0.matrix()).unwrap();
        let b = l.asymptotic_operator(rho0.matrix()).unwrap();
        assert!(max_abs(&(a - b)) < 1e-9);
    }

    #[test]
    fn relaxation_integral_single_atom() {
        // ρ_ee(t) = e^{-2t}, so the integral of the excited part is 1/2
        let cfg = SystemConfig::equidistant(1, 0.0, 0.0).unwrap();
        let l = Liouvillian::new(&cfg).unwrap();
        let rho0 = "e".parse::<KetString>().unwrap().density_matrix(&cfg).unwrap();
        let y = relaxation_integral(&l, rho0.matrix(), LONG_TIME).unwrap();
        assert!((y[(2, 2)].re - 0.5).abs() < 1e-9);
        let drazin = l.drazin_apply(rho0.matrix()).unwrap();
        assert!(max_abs(&(y + drazin)) < 1e-8);
    }

    #[test]
    fn time_resolved_integral_single_atom() {
        let cfg = SystemConfig::equidistant(1, 0.0, 0.0).unwrap();
        let l = Liouvillian::new(&cfg).unwrap();
        let rho0 = "e".parse::<KetString>().unwrap().density_matrix(&cfg).unwrap();
        let q = time_resolved_integral(&l, &rho0, LONG_TIME).unwrap();
        assert!((q.trace().re - 1.0).abs() < 1e-8);
        let joint = one_photon_joint(&l, &rho0).unwrap();
        assert!(max_abs(&(q - joint.matrix())) < 1e-8);
    }

    #[test]
    fn random_su2_is_special_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let u = random_su2(&mut rng);
            assert!(max_abs(&(&u * u.adjoint() - CMatrix::identity(2, 2))) < 1e-14);
            assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn global_rotation_fixes_excited_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = global_rotation(&random_su2(&mut rng), 2);
        assert_eq!(g.nrows(), 9);
        assert!(max_abs(&(&g * g.adjoint() - CMatrix::identity(9, 9))) < 1e-14);
        // |ee⟩ is index 8
        assert!((g[(8, 8)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rank in 1..=4 {
            let rho = random_density(&mut rng, 4, rank);
            assert!(DensityMatrix::new(rho, crate::state::Space::Ground).is_ok());
        }
    }
}
