//! Detailed JSON reports for a single parameter point.

use lambda_relax::detection::{
    condition_on_polarization, detection_probability, one_photon_joint, two_photon_state, JointRecord,
};
use lambda_relax::entanglement::{log_negativity, pairwise_concurrences, qubit_bipartitions, BipartitionSpec};
use lambda_relax::liouvillian::Liouvillian;
use lambda_relax::state::{restrict_to_ground, DensityMatrix, KetString, MatrixRecord, Polarization, SystemConfig};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::sweep::describe_point;

#[derive(Debug, Clone, Serialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitValue {
    pub bipartition: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomReport {
    pub initial: String,
    pub s: f64,
    pub k0d: f64,
    /// Set for conditioned states.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization: Option<char>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    pub state: MatrixRecord,
    pub concurrences: Vec<PairValue>,
    pub negativities: Vec<SplitValue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoPhotonReport {
    pub initial: String,
    pub s: f64,
    pub k0d: f64,
    pub state: JointRecord,
    pub negativity: f64,
}

fn setup(ket: &KetString, s: f64, k0d: f64) -> lambda_relax::Result<(Liouvillian, DensityMatrix)> {
    let cfg = SystemConfig::equidistant(ket.len(), s, k0d)?;
    let l = Liouvillian::new(&cfg)?;
    let rho0 = ket.density_matrix(&cfg)?;
    Ok((l, rho0))
}

fn atom_report(
    ket: &KetString,
    s: f64,
    k0d: f64,
    rho: &DensityMatrix,
    conditioned: Option<(Polarization, f64)>,
) -> lambda_relax::Result<AtomReport> {
    let n = ket.len();
    let (concurrences, negativities) = if n >= 2 {
        let c = pairwise_concurrences(rho)?
            .pairs()
            .into_iter()
            .map(|(i, j, value)| PairValue { i, j, value })
            .collect();
        let e = qubit_bipartitions(n)
            .iter()
            .map(|split| {
                Ok(SplitValue {
                    bipartition: split.label(),
                    value: log_negativity(rho, split)?,
                })
            })
            .collect::<lambda_relax::Result<_>>()?;
        (c, e)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(AtomReport {
        initial: ket.to_string(),
        s,
        k0d,
        polarization: conditioned.map(|(p, _)| p.symbol()),
        probability: conditioned.map(|(_, p)| p),
        state: rho.to_record(),
        concurrences,
        negativities,
    })
}

fn at_point<T>(ket: &KetString, s: f64, k0d: f64, r: lambda_relax::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Point {
        point: describe_point(ket, s, k0d),
        source,
    })
}

/// Final ground state with its pairwise concurrences and bipartition
/// negativities.
pub fn final_report(ket: &KetString, s: f64, k0d: f64) -> Result<AtomReport> {
    at_point(
        ket,
        s,
        k0d,
        (|| {
            let (l, rho0) = setup(ket, s, k0d)?;
            let ground = restrict_to_ground(&l.asymptotic_state(&rho0)?)?;
            atom_report(ket, s, k0d, &ground, None)
        })(),
    )
}

/// Atomic state after the first photon is detected with polarization `sigma`.
pub fn conditioned_report(ket: &KetString, s: f64, k0d: f64, sigma: Polarization) -> Result<AtomReport> {
    at_point(
        ket,
        s,
        k0d,
        (|| {
            let (l, rho0) = setup(ket, s, k0d)?;
            let joint = one_photon_joint(&l, &rho0)?;
            let p = detection_probability(&joint, sigma)?;
            let rho = condition_on_polarization(&joint, sigma)?;
            atom_report(ket, s, k0d, &rho, Some((sigma, p)))
        })(),
    )
}

pub fn two_photon_report(ket: &KetString, s: f64, k0d: f64) -> Result<TwoPhotonReport> {
    at_point(
        ket,
        s,
        k0d,
        (|| {
            let (l, rho0) = setup(ket, s, k0d)?;
            let pair = two_photon_state(&l, &rho0)?;
            let split = BipartitionSpec::new(vec![4, 4], vec![0])?;
            Ok(TwoPhotonReport {
                initial: ket.to_string(),
                s,
                k0d,
                negativity: log_negativity(&pair.to_density(), &split)?,
                state: pair.to_record(),
            })
        })(),
    )
}
