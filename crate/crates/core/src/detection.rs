//! Density matrices involving detected photons.
//!
//! A detected photon is labelled by its polarization and propagation
//! direction, flattened to `0..4` in the order `(+,→) (+,←) (-,→) (-,←)`.
//! Atom–photon states use the layout `atoms ⊗ photon` (photon index fastest),
//! photon pairs use `first ⊗ second`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::state::{
    excitation_count, ground_indices, hermitian_eigenvalues, hermiticity_error, hermitize, partial_trace, CMatrix,
    DensityMatrix, Direction, MatrixRecord, Polarization, Space, C64,
};

/// Trace deviation beyond which a joint state counts as a numerical failure.
const TRACE_FAILURE_TOL: f64 = 1e-6;

/// Smallest detection probability that may be conditioned on.
pub const MIN_DETECTION_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PhotonIndex {
    pub sigma: Polarization,
    pub delta: Direction,
}

impl PhotonIndex {
    pub const ALL: [PhotonIndex; 4] = [
        PhotonIndex {
            sigma: Polarization::Plus,
            delta: Direction::Right,
        },
        PhotonIndex {
            sigma: Polarization::Plus,
            delta: Direction::Left,
        },
        PhotonIndex {
            sigma: Polarization::Minus,
            delta: Direction::Right,
        },
        PhotonIndex {
            sigma: Polarization::Minus,
            delta: Direction::Left,
        },
    ];

    pub const COUNT: usize = 4;

    pub fn ordinal(self) -> usize {
        let s = match self.sigma {
            Polarization::Plus => 0,
            Polarization::Minus => 2,
        };
        let d = match self.delta {
            Direction::Right => 0,
            Direction::Left => 1,
        };
        s + d
    }

    pub fn label(self) -> String {
        format!("{}{}", self.sigma.symbol(), self.delta.arrow())
    }

    pub fn legend() -> Vec<String> {
        Self::ALL.iter().map(|p| p.label()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "layout")]
pub enum JointLayout {
    /// `ground atoms ⊗ photon`.
    AtomsPhoton { n_atoms: usize },
    /// `first photon ⊗ second photon`.
    PhotonPair,
}

/// Density matrix over atoms and a detected photon, or over two photons.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPhotonState {
    matrix: CMatrix,
    layout: JointLayout,
}

impl JointPhotonState {
    pub fn new(matrix: CMatrix, layout: JointLayout) -> Result<Self> {
        let expected = match layout {
            JointLayout::AtomsPhoton { n_atoms } => (1usize << n_atoms) * PhotonIndex::COUNT,
            JointLayout::PhotonPair => PhotonIndex::COUNT * PhotonIndex::COUNT,
        };
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::Dimension {
                expected,
                got: matrix.nrows(),
            });
        }
        let herm = hermiticity_error(&matrix);
        if herm > 1e-9 {
            return Err(Error::InvalidState(format!("joint state not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidState(format!("joint state trace {tr} differs from 1")));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -1e-9 {
            return Err(Error::InvalidState(format!("joint state has eigenvalue {min:e}")));
        }
        Ok(JointPhotonState { matrix, layout })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> JointLayout {
        self.layout
    }

    /// Subsystem dimensions in storage order.
    pub fn dims(&self) -> Vec<usize> {
        match self.layout {
            JointLayout::AtomsPhoton { n_atoms } => {
                let mut d = vec![2; n_atoms];
                d.push(PhotonIndex::COUNT);
                d
            }
            JointLayout::PhotonPair => vec![PhotonIndex::COUNT, PhotonIndex::COUNT],
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(self.matrix.clone(), Space::Joint)
    }

    pub fn to_record(&self) -> JointRecord {
        JointRecord {
            matrix: MatrixRecord::new(&self.matrix, Space::Joint),
            layout: self.layout,
            photon_legend: PhotonIndex::legend(),
        }
    }

    fn n_atoms(&self) -> Result<usize> {
        match self.layout {
            JointLayout::AtomsPhoton { n_atoms } => Ok(n_atoms),
            JointLayout::PhotonPair => Err(Error::InvalidState("operation needs an atoms ⊗ photon state".into())),
        }
    }
}

/// Self-describing serialized form of a [`JointPhotonState`].
#[derive(Debug, Clone, Serialize)]
pub struct JointRecord {
    #[serde(flatten)]
    pub matrix: MatrixRecord,
    pub layout: JointLayout,
    pub photon_legend: Vec<String>,
}

/// Mean number of excited atoms, i.e. photons emitted on full relaxation.
pub fn emitted_photon_count(rho0: &DensityMatrix) -> Result<f64> {
    if rho0.space() != Space::Full {
        return Err(Error::InvalidState("photon count needs a full-space state".into()));
    }
    let n = rho0.n_atoms().unwrap_or(0);
    Ok((0..rho0.dim())
        .map(|i| excitation_count(i, n) as f64 * rho0.matrix()[(i, i)].re)
        .sum())
}

fn require_photons(n0: f64, needed: f64) -> Result<()> {
    if n0 < needed - 1e-12 {
        return Err(Error::InvalidState(format!(
            "initial state emits {n0} photons on average, need at least {needed}"
        )));
    }
    Ok(())
}

/// Assembles `M∞[B_p Y B_p'†]` over all photon pairs into `atoms ⊗ photon`,
/// scaled by `factor`.
fn assemble_atoms_photon(l: &Liouvillian, y: &CMatrix, factor: f64) -> Result<CMatrix> {
    let n = l.config().n_atoms();
    let ground = ground_indices(n);
    let g = ground.len();
    let np = PhotonIndex::COUNT;
    let mut out = CMatrix::zeros(g * np, g * np);
    for p in PhotonIndex::ALL {
        let left = l.jump(p) * y;
        for q in PhotonIndex::ALL {
            let op = &left * l.jump(q).adjoint();
            let fin = l.asymptotic_operator(&op)?;
            for (a, &ra) in ground.iter().enumerate() {
                for (b, &rb) in ground.iter().enumerate() {
                    out[(a * np + p.ordinal(), b * np + q.ordinal())] = fin[(ra, rb)] * factor;
                }
            }
        }
    }
    Ok(out)
}

/// Detection-time-averaged joint state of the final atoms and one detected
/// photon: `-(1/N0) M∞[B_p L^D(ρ0) B_p'†]`.
pub fn one_photon_joint(l: &Liouvillian, rho0: &DensityMatrix) -> Result<JointPhotonState> {
    let n0 = emitted_photon_count(rho0)?;
    require_photons(n0, 1.0)?;
    let y = l.drazin_apply(rho0.matrix())?;
    one_photon_joint_from_resolvent(l, &y, n0)
}

/// [`one_photon_joint`] from a precomputed `L^D(ρ0)`. Any ground-supported
/// part of `y` is annihilated by the jump operators.
pub fn one_photon_joint_from_resolvent(l: &Liouvillian, y: &CMatrix, n0: f64) -> Result<JointPhotonState> {
    let m = assemble_atoms_photon(l, y, -1.0 / n0)?;
    let tr = m.trace().re;
    if (tr - 1.0).abs() > TRACE_FAILURE_TOL {
        return Err(Error::Numerical(format!("one-photon joint state has trace {tr}")));
    }
    JointPhotonState::new(
        hermitize(&m),
        JointLayout::AtomsPhoton {
            n_atoms: l.config().n_atoms(),
        },
    )
}

/// Unnormalized joint state for a photon detected at time `t`:
/// `M∞[B_p M_t(ρ0) B_p'†]`. Its trace is the photon emission rate.
pub fn one_photon_time_resolved(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<CMatrix> {
    require_photons(emitted_photon_count(rho0)?, 1.0)?;
    let rho_t = l.evolve(rho0, t)?;
    time_resolved_from_state(l, rho_t.matrix())
}

/// [`one_photon_time_resolved`] for an already evolved operator.
pub fn time_resolved_from_state(l: &Liouvillian, rho_t: &CMatrix) -> Result<CMatrix> {
    assemble_atoms_photon(l, rho_t, 1.0)
}

/// Probability that the detected photon has polarization `sigma`.
pub fn detection_probability(joint: &JointPhotonState, sigma: Polarization) -> Result<f64> {
    Ok(polarization_block(joint, sigma)?.trace().re)
}

fn polarization_block(joint: &JointPhotonState, sigma: Polarization) -> Result<CMatrix> {
    let n = joint.n_atoms()?;
    let g = 1usize << n;
    let np = PhotonIndex::COUNT;
    let mut out = CMatrix::zeros(g, g);
    for p in PhotonIndex::ALL.iter().filter(|p| p.sigma == sigma) {
        for a in 0..g {
            for b in 0..g {
                out[(a, b)] += joint.matrix[(a * np + p.ordinal(), b * np + p.ordinal())];
            }
        }
    }
    Ok(out)
}

/// Atomic state after detecting a photon of polarization `sigma`, with the
/// direction summed over, renormalized.
pub fn condition_on_polarization(joint: &JointPhotonState, sigma: Polarization) -> Result<DensityMatrix> {
    let block = polarization_block(joint, sigma)?;
    let prob = block.trace().re;
    if prob < MIN_DETECTION_PROBABILITY {
        return Err(Error::InvalidState(format!(
            "detection probability {prob:e} for polarization {} is zero",
            sigma.symbol()
        )));
    }
    DensityMatrix::with_tolerance(hermitize(&block.unscale(prob)), Space::Ground, 1e-9)
}

/// Reduced state of atom `j` (1-based) and the photon, layout `atom ⊗ photon`.
pub fn atom_photon_reduction(joint: &JointPhotonState, j: usize) -> Result<DensityMatrix> {
    let n = joint.n_atoms()?;
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    let reduced = partial_trace(&joint.matrix, &joint.dims(), &[j - 1, n])?;
    DensityMatrix::with_tolerance(hermitize(&reduced), Space::Joint, 1e-8)
}

/// Atoms ⊗ first photon ⊗ second photon, after full relaxation; tracing the
/// atoms gives [`two_photon_state`].
pub fn two_photon_with_atoms(l: &Liouvillian, rho0: &DensityMatrix) -> Result<CMatrix> {
    let n0 = emitted_photon_count(rho0)?;
    require_photons(n0, 2.0)?;
    let factor = 2.0 / (n0 * (n0 - 1.0));
    let first = l.drazin_apply(rho0.matrix())?;
    let n = l.config().n_atoms();
    let g = 1usize << n;
    let np = PhotonIndex::COUNT;
    let pair = np * np;
    let mut out = CMatrix::zeros(g * pair, g * pair);
    for p1 in PhotonIndex::ALL {
        let left = l.jump(p1) * &first;
        for q1 in PhotonIndex::ALL {
            let second = l.drazin_apply(&(&left * l.jump(q1).adjoint()))?;
            let block = assemble_atoms_photon(l, &second, factor)?;
            for a in 0..g {
                for b in 0..g {
                    for p2 in 0..np {
                        for q2 in 0..np {
                            let r = a * pair + p1.ordinal() * np + p2;
                            let c = b * pair + q1.ordinal() * np + q2;
                            out[(r, c)] = block[(a * np + p2, b * np + q2)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Detection-time-averaged state of two photons (first detected ⊗ second):
/// `(2/(N0(N0-1))) Tr_atoms{ B_p2 L^D[B_p1 L^D(ρ0) B_q1†] B_q2† }`.
pub fn two_photon_state(l: &Liouvillian, rho0: &DensityMatrix) -> Result<JointPhotonState> {
    let n0 = emitted_photon_count(rho0)?;
    require_photons(n0, 2.0)?;
    let factor = 2.0 / (n0 * (n0 - 1.0));
    let first = l.drazin_apply(rho0.matrix())?;
    let np = PhotonIndex::COUNT;
    let mut out = CMatrix::zeros(np * np, np * np);
    for p1 in PhotonIndex::ALL {
        let left = l.jump(p1) * &first;
        for q1 in PhotonIndex::ALL {
            let second = l.drazin_apply(&(&left * l.jump(q1).adjoint()))?;
            for p2 in PhotonIndex::ALL {
                let lp = l.jump(p2) * &second;
                for q2 in PhotonIndex::ALL {
                    let v: C64 = (&lp * l.jump(q2).adjoint()).trace();
                    out[(p1.ordinal() * np + p2.ordinal(), q1.ordinal() * np + q2.ordinal())] = v * factor;
                }
            }
        }
    }
    let tr = out.trace().re;
    if (tr - 1.0).abs() > TRACE_FAILURE_TOL {
        return Err(Error::Numerical(format!("two-photon state has trace {tr}")));
    }
    JointPhotonState::new(hermitize(&out), JointLayout::PhotonPair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{concurrence, log_negativity, BipartitionSpec};
    use crate::state::{max_abs, KetString, SystemConfig};

    fn setup(n: usize, s: f64, k0d: f64, ket: &str) -> (Liouvillian, DensityMatrix) {
        let cfg = SystemConfig::equidistant(n, s, k0d).unwrap();
        let l = Liouvillian::new(&cfg).unwrap();
        let rho0 = ket.parse::<KetString>().unwrap().density_matrix(&cfg).unwrap();
        (l, rho0)
    }

    #[test]
    fn photon_index_encoding() {
        for (k, p) in PhotonIndex::ALL.iter().enumerate() {
            assert_eq!(p.ordinal(), k);
        }
        assert_eq!(PhotonIndex::legend(), vec!["+→", "+←", "-→", "-←"]);
    }

    #[test]
    fn photon_counts() {
        let (_, rho) = setup(2, 0.0, 0.5, "ee");
        assert_eq!(emitted_photon_count(&rho).unwrap(), 2.0);
        let (l, rho) = setup(2, 0.0, 0.5, "++");
        assert_eq!(emitted_photon_count(&rho).unwrap(), 0.0);
        assert!(one_photon_joint(&l, &rho).is_err());
        let (_, rho) = setup(4, 0.0, 0.5, "e+e+");
        assert_eq!(emitted_photon_count(&rho).unwrap(), 2.0);
        let (l, rho) = setup(2, 0.0, 0.5, "e+");
        assert!(two_photon_state(&l, &rho).is_err());
    }

    #[test]
    fn single_atom_photon_is_bell_paired() {
        let (l, rho0) = setup(1, 0.0, 0.0, "e");
        let joint = one_photon_joint(&l, &rho0).unwrap();
        let h = 0.5f64.sqrt();
        let mut v = CMatrix::zeros(8, 1);
        v[(0, 0)] = C64::new(h, 0.0); // |+> ⊗ (+,→)
        v[(4 + 3, 0)] = C64::new(h, 0.0); // |-> ⊗ (-,←)
        let expected = &v * v.adjoint();
        assert!(max_abs(&(joint.matrix() - expected)) < 1e-12);
        let split = BipartitionSpec::new(vec![2, 4], vec![1]).unwrap();
        assert!((log_negativity(&joint.to_density(), &split).unwrap() - 1.0).abs() < 1e-10);
        let red = atom_photon_reduction(&joint, 1).unwrap();
        assert!(max_abs(&(red.matrix() - joint.matrix())) < 1e-15);
    }

    #[test]
    fn joint_state_has_unit_trace() {
        for (s, k0d) in [(0.0, 0.3), (0.5, 1.4), (1.0, 2.9)] {
            let (l, rho0) = setup(2, s, k0d, "ee");
            let joint = one_photon_joint(&l, &rho0).unwrap();
            assert!((joint.matrix().trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn chiral_locking_of_polarization_and_direction() {
        let (l, rho0) = setup(2, 0.0, 0.9, "ee");
        let joint = one_photon_joint(&l, &rho0).unwrap();
        let forbidden = [1usize, 2];
        let m = joint.matrix();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if forbidden.contains(&(r % 4)) || forbidden.contains(&(c % 4)) {
                    assert!(m[(r, c)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn resolvent_kernel_part_is_irrelevant() {
        let (l, rho0) = setup(2, 0.6, 1.1, "ee");
        let y = l.drazin_apply(rho0.matrix()).unwrap();
        let base = one_photon_joint_from_resolvent(&l, &y, 2.0).unwrap();
        let mut shifted = y.clone();
        for (a, &r) in ground_indices(2).iter().enumerate() {
            for (b, &c) in ground_indices(2).iter().enumerate() {
                shifted[(r, c)] += C64::new(0.3 * a as f64 - 0.1, 0.2 * b as f64);
            }
        }
        let other = one_photon_joint_from_resolvent(&l, &shifted, 2.0).unwrap();
        assert!(max_abs(&(base.matrix() - other.matrix())) < 1e-14);
    }

    #[test]
    fn conditioning_recombines_to_final_state() {
        let (l, rho0) = setup(2, 0.4, 0.7, "ee");
        let joint = one_photon_joint(&l, &rho0).unwrap();
        let fin = crate::state::restrict_to_ground(&l.asymptotic_state(&rho0).unwrap()).unwrap();
        let mut mix = CMatrix::zeros(4, 4);
        for sigma in Polarization::ALL {
            let p = detection_probability(&joint, sigma).unwrap();
            mix += condition_on_polarization(&joint, sigma).unwrap().matrix().scale(p);
        }
        assert!(max_abs(&(mix - fin.matrix())) < 1e-8);
    }

    #[test]
    fn chiral_pair_conditioned_on_plus() {
        let (l, rho0) = setup(2, 0.0, 1.3, "ee");
        let joint = one_photon_joint(&l, &rho0).unwrap();
        let cond = condition_on_polarization(&joint, Polarization::Plus).unwrap();
        assert!((concurrence(&cond).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn zero_probability_conditioning_is_an_error() {
        // single chiral atom starting in |e>: both polarizations possible, but
        // a state built by hand with no minus photons must refuse to condition
        let mut m = CMatrix::zeros(8, 8);
        m[(0, 0)] = C64::new(1.0, 0.0);
        let joint = JointPhotonState::new(m, JointLayout::AtomsPhoton { n_atoms: 1 }).unwrap();
        assert!(condition_on_polarization(&joint, Polarization::Minus).is_err());
        assert!(atom_photon_reduction(&joint, 2).is_err());
    }

    #[test]
    fn two_photon_state_is_normalized_and_consistent() {
        let (l, rho0) = setup(2, 0.5, 0.8, "ee");
        let pp = two_photon_state(&l, &rho0).unwrap();
        assert!((pp.matrix().trace().re - 1.0).abs() < 1e-10);
        let with_atoms = two_photon_with_atoms(&l, &rho0).unwrap();
        let traced = partial_trace(&with_atoms, &[2, 2, 4, 4], &[2, 3]).unwrap();
        assert!(max_abs(&(traced - pp.matrix())) < 1e-12);

        // With two photons, the average of the two single-photon marginals
        // is the photon marginal of the one-photon state.
        let first = partial_trace(pp.matrix(), &[4, 4], &[0]).unwrap();
        let second = partial_trace(pp.matrix(), &[4, 4], &[1]).unwrap();
        let joint = one_photon_joint(&l, &rho0).unwrap();
        let photon = partial_trace(joint.matrix(), &joint.dims(), &[2]).unwrap();
        assert!(max_abs(&((first + second).scale(0.5) - photon)) < 1e-10);
    }
}
