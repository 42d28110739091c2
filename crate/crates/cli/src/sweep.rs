//! Parallel evaluation of a [`SweepSpec`] and CSV/JSON emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lambda_relax::detection::{
    atom_photon_reduction, condition_on_polarization, one_photon_joint, two_photon_state, JointPhotonState,
};
use lambda_relax::entanglement::{log_negativity, pairwise_concurrences, qubit_bipartitions, BipartitionSpec};
use lambda_relax::liouvillian::Liouvillian;
use lambda_relax::state::{restrict_to_ground, DensityMatrix, KetString, MatrixRecord, Polarization, SystemConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{Format, Quantity, SweepSpec};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "LAMBDA_RELAX_THREADS";

pub const CSV_HEADER: &str = "initial,s,k0d,quantity,i,j,value";

/// One scalar result. `i`/`j` hold atom indices for pair quantities, the
/// two sides of a bipartition (`1` and `23` for `1|23`), `ph` and the atom
/// index for atom–photon negativities, or `ph1`/`ph2` for photon pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub initial: String,
    pub s: f64,
    pub k0d: f64,
    pub quantity: Quantity,
    pub i: String,
    pub j: String,
    pub value: f64,
}

/// Final ground state at one sweep point, written to the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub initial: String,
    pub s: f64,
    pub k0d: f64,
    pub state: MatrixRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub states: Vec<StateRecord>,
}

/// Worker count from [`THREADS_ENV`]; `None` lets rayon decide.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    run_sweep_with_threads(spec, thread_cap()?)
}

/// Evaluates every (initial, s, k₀d) point on a dedicated pool. Rows come
/// back in point order regardless of the number of workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepOutput> {
    spec.validate()?;
    let k0d = spec.grid.values();
    let mut points: Vec<(&KetString, f64, f64)> = Vec::new();
    for ket in &spec.initial {
        for &s in &spec.s_values {
            points.extend(k0d.iter().map(|&x| (ket, s, x)));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        points
            .par_iter()
            .map(|&(ket, s, x)| evaluate_point(ket, s, x, &spec.quantities, spec.condition))
            .collect()
    });
    let mut out = SweepOutput::default();
    for (&(ket, s, x), result) in points.iter().zip(results) {
        let (rows, state) = result.map_err(|source| CliError::Point {
            point: describe_point(ket, s, x),
            source,
        })?;
        out.rows.extend(rows);
        out.states.extend(state);
    }
    Ok(out)
}

pub fn describe_point(ket: &KetString, s: f64, k0d: f64) -> String {
    format!("initial |{ket}⟩, s = {s}, k0d = {k0d}")
}

fn split_label(split: &BipartitionSpec) -> (String, String) {
    let label = split.label();
    let (a, b) = label.split_once('|').expect("bipartition labels contain '|'");
    (a.to_string(), b.to_string())
}

fn atom_photon_split() -> BipartitionSpec {
    BipartitionSpec::new(vec![2, 4], vec![0]).expect("fixed split")
}

fn photon_pair_split() -> BipartitionSpec {
    BipartitionSpec::new(vec![4, 4], vec![0]).expect("fixed split")
}

type Push<'a> = dyn FnMut(Quantity, String, String, f64) -> lambda_relax::Result<()> + 'a;

fn pair_rows(q: Quantity, rho: &DensityMatrix, push: &mut Push) -> lambda_relax::Result<()> {
    for (i, j, c) in pairwise_concurrences(rho)?.pairs() {
        push(q, i.to_string(), j.to_string(), c)?;
    }
    Ok(())
}

fn split_rows(q: Quantity, n: usize, rho: &DensityMatrix, push: &mut Push) -> lambda_relax::Result<()> {
    for split in qubit_bipartitions(n) {
        let (a, b) = split_label(&split);
        push(q, a, b, log_negativity(rho, &split)?)?;
    }
    Ok(())
}

/// Rows (and the optional state dump) for one parameter point.
pub fn evaluate_point(
    ket: &KetString,
    s: f64,
    k0d: f64,
    quantities: &[Quantity],
    condition: Polarization,
) -> lambda_relax::Result<(Vec<SweepRow>, Option<StateRecord>)> {
    let n = ket.len();
    let cfg = SystemConfig::equidistant(n, s, k0d)?;
    let l = Liouvillian::new(&cfg)?;
    let rho0 = ket.density_matrix(&cfg)?;
    let wants = |qs: &[Quantity]| quantities.iter().any(|q| qs.contains(q));

    let ground = if wants(&[
        Quantity::PairwiseConcurrence,
        Quantity::BipartitionNegativity,
        Quantity::FinalStateDump,
    ]) {
        Some(restrict_to_ground(&l.asymptotic_state(&rho0)?)?)
    } else {
        None
    };
    let joint: Option<JointPhotonState> = if wants(&[
        Quantity::AtomPhotonNegativity,
        Quantity::ConditionedConcurrence,
        Quantity::ConditionedNegativity,
    ]) {
        Some(one_photon_joint(&l, &rho0)?)
    } else {
        None
    };
    let conditioned = match &joint {
        Some(j) if wants(&[Quantity::ConditionedConcurrence, Quantity::ConditionedNegativity]) => {
            Some(condition_on_polarization(j, condition)?)
        }
        _ => None,
    };

    let initial = ket.to_string();
    let mut rows = Vec::new();
    let mut push = |quantity: Quantity, i: String, j: String, value: f64| -> lambda_relax::Result<()> {
        if !value.is_finite() {
            return Err(lambda_relax::Error::Numerical(format!(
                "{quantity} ({i}, {j}) is {value}"
            )));
        }
        rows.push(SweepRow {
            initial: initial.clone(),
            s,
            k0d,
            quantity,
            i,
            j,
            value,
        });
        Ok(())
    };
    let mut state = None;
    for &q in quantities {
        match q {
            Quantity::PairwiseConcurrence => pair_rows(q, ground.as_ref().expect("computed above"), &mut push)?,
            Quantity::BipartitionNegativity => split_rows(q, n, ground.as_ref().expect("computed above"), &mut push)?,
            Quantity::AtomPhotonNegativity => {
                let joint = joint.as_ref().expect("computed above");
                for atom in 1..=n {
                    let reduced = atom_photon_reduction(joint, atom)?;
                    push(
                        q,
                        "ph".into(),
                        atom.to_string(),
                        log_negativity(&reduced, &atom_photon_split())?,
                    )?;
                }
            }
            Quantity::ConditionedConcurrence => pair_rows(q, conditioned.as_ref().expect("computed above"), &mut push)?,
            Quantity::ConditionedNegativity => {
                split_rows(q, n, conditioned.as_ref().expect("computed above"), &mut push)?
            }
            Quantity::TwoPhotonNegativity => {
                let pair = two_photon_state(&l, &rho0)?;
                push(
                    q,
                    "ph1".into(),
                    "ph2".into(),
                    log_negativity(&pair.to_density(), &photon_pair_split())?,
                )?;
            }
            Quantity::FinalStateDump => {
                state = Some(StateRecord {
                    initial: initial.clone(),
                    s,
                    k0d,
                    state: ground.as_ref().expect("computed above").to_record(),
                });
            }
        }
    }
    Ok((rows, state))
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    if rows.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| CliError::Serialize(e.to_string()))?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| CliError::Serialize(e.to_string()))?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

/// `fig2.csv` → `fig2.states.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("states.json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes rows to `spec.out` (stdout when unset) and any state dumps to the
/// sidecar next to it.
pub fn write_output(spec: &SweepSpec, output: &SweepOutput) -> Result<()> {
    let emit = |w: &mut dyn Write| match spec.format {
        Format::Csv => write_csv(&output.rows, w),
        Format::Json => write_json(&output.rows, w),
    };
    match &spec.out {
        Some(path) => {
            let mut w = create(path)?;
            emit(&mut w)?;
            w.flush().map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            if spec.quantities.contains(&Quantity::FinalStateDump) {
                let side = sidecar_path(path);
                let mut w = create(&side)?;
                write_json(&output.states, &mut w)?;
                w.flush().map_err(|source| CliError::Io { path: side, source })?;
            }
        }
        None => emit(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

/// Validates, runs and writes a sweep.
pub fn execute(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    if spec.out.is_none() && spec.quantities.contains(&Quantity::FinalStateDump) {
        return Err(CliError::Usage(
            "final_state_dump writes a sidecar file and needs --out".into(),
        ));
    }
    let output = run_sweep(spec)?;
    write_output(spec, &output)?;
    Ok(output)
}
