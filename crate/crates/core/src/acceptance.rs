//! Executable acceptance criteria. Each criterion reports the measured value,
//! the expected value and the tolerance it was judged against, so the report
//! doubles as a machine-readable record of how closely the implementation
//! reproduces the closed-form and qualitative results.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::detection::{
    atom_photon_reduction, condition_on_polarization, emitted_photon_count, one_photon_joint, two_photon_state,
    JointPhotonState,
};
use crate::entanglement::{
    concurrence, log_negativity, pairwise_concurrences, ppt_check, qubit_bipartitions, BipartitionSpec,
};
use crate::error::{Error, Result};
use crate::liouvillian::{final_ground_state, Liouvillian};
use crate::oracle::{
    global_rotation, long_time_asymptotic, random_density, random_matrix, random_su2, relaxation_integral,
    time_resolved_integral, LONG_TIME,
};
use crate::reference::{
    chiral_conditioned_negativity, exact_conditioned_concurrence, exact_conditioned_state,
    exact_conditioned_state_with, exact_final_state, BellVariant,
};
use crate::spectral::spectral_decompose;
use crate::state::{max_abs, CMatrix, DensityMatrix, KetString, Polarization, Space, SystemConfig, C64};

/// Chirality values used for every `(s, k₀d)` sweep.
pub const S_VALUES: [f64; 3] = [0.0, 0.5, 1.0];

/// Number of `k₀d` samples on `[0, π]`.
pub const GRID_POINTS: usize = 25;

pub fn k0d_grid() -> Vec<f64> {
    (0..GRID_POINTS)
        .map(|k| PI * k as f64 / (GRID_POINTS - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - expected| <= tolerance`
    AbsDiff,
    /// `measured > expected`
    GreaterThan,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: String,
    pub claim: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub note: Option<String>,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let rule = match self.comparison {
            Comparison::AbsDiff => format!("expected {:.6e} ± {:.0e}", self.expected, self.tolerance),
            Comparison::GreaterThan => format!("required > {:.0e}", self.expected),
        };
        let mut s = format!("{verdict} {:<44} measured {:.6e}, {rule}", self.id, self.measured);
        if let Some(note) = &self.note {
            s.push_str(" | ");
            s.push_str(note);
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub passed: bool,
    pub criteria: Vec<Criterion>,
    pub seconds: f64,
}

impl AcceptanceReport {
    pub fn failures(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.passed)
    }
}

/// Outcome of evaluating one criterion: the measured value and an optional
/// note for the report.
struct Measured {
    value: f64,
    note: Option<String>,
}

impl From<f64> for Measured {
    fn from(value: f64) -> Self {
        Measured { value, note: None }
    }
}

fn noted(value: f64, note: impl Into<String>) -> Measured {
    Measured {
        value,
        note: Some(note.into()),
    }
}

struct Spec {
    id: &'static str,
    claim: &'static str,
    comparison: Comparison,
    expected: f64,
    tolerance: f64,
}

fn close(id: &'static str, claim: &'static str, expected: f64, tolerance: f64) -> Spec {
    Spec {
        id,
        claim,
        comparison: Comparison::AbsDiff,
        expected,
        tolerance,
    }
}

fn at_most(id: &'static str, claim: &'static str, tolerance: f64) -> Spec {
    close(id, claim, 0.0, tolerance)
}

fn above(id: &'static str, claim: &'static str, threshold: f64) -> Spec {
    Spec {
        id,
        claim,
        comparison: Comparison::GreaterThan,
        expected: threshold,
        tolerance: 0.0,
    }
}

fn judge<F>(spec: Spec, f: F) -> Criterion
where
    F: FnOnce() -> Result<Measured>,
{
    let start = Instant::now();
    let (measured, note, ok) = match f() {
        Ok(m) => {
            let ok = match spec.comparison {
                Comparison::AbsDiff => (m.value - spec.expected).abs() <= spec.tolerance,
                Comparison::GreaterThan => m.value > spec.expected,
            };
            (m.value, m.note, ok)
        }
        Err(e) => (f64::NAN, Some(format!("error: {e}")), false),
    };
    Criterion {
        id: spec.id.to_string(),
        claim: spec.claim.to_string(),
        passed: ok && measured.is_finite(),
        measured,
        expected: spec.expected,
        tolerance: spec.tolerance,
        comparison: spec.comparison,
        note,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn ket(s: &str) -> KetString {
    s.parse().expect("literal kets are valid")
}

fn final_state(n: usize, s: f64, k0d: f64, initial: &str) -> Result<DensityMatrix> {
    let cfg = SystemConfig::equidistant(n, s, k0d)?;
    final_ground_state(&cfg, &ket(initial))
}

fn c12(s: f64, k0d: f64, initial: &str) -> Result<f64> {
    concurrence(&final_state(2, s, k0d, initial)?)
}

fn joint(n: usize, s: f64, k0d: f64, initial: &str) -> Result<JointPhotonState> {
    let cfg = SystemConfig::equidistant(n, s, k0d)?;
    let l = Liouvillian::new(&cfg)?;
    one_photon_joint(&l, &ket(initial).density_matrix(&cfg)?)
}

fn conditioned(n: usize, s: f64, k0d: f64, initial: &str) -> Result<DensityMatrix> {
    condition_on_polarization(&joint(n, s, k0d, initial)?, Polarization::Plus)
}

fn all_excited(n: usize) -> String {
    "e".repeat(n)
}

fn fmax(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn fmin(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

fn max_over_grid<F>(f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut worst = 0.0f64;
    for k0d in k0d_grid() {
        worst = worst.max(f(k0d)?);
    }
    Ok(worst)
}

fn single_atom() -> Vec<Criterion> {
    vec![judge(
        at_most(
            "single_atom_unpolarized",
            "one excited atom relaxes to diag(1/2, 1/2, 0) for every chirality",
            1e-10,
        ),
        || {
            let target = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
            ]));
            let mut worst = 0.0f64;
            for s in S_VALUES {
                let cfg = SystemConfig::equidistant(1, s, 0.0)?;
                let l = Liouvillian::new(&cfg)?;
                let fin = l.asymptotic_state(&ket("e").density_matrix(&cfg)?)?;
                worst = worst.max(max_abs(&(fin.matrix() - &target)));
            }
            Ok(worst.into())
        },
    )]
}

fn pair_concurrence() -> Vec<Criterion> {
    vec![
        judge(
            close(
                "chiral_pair_e_plus_concurrence",
                "s=0, |e+>: C12 = 1/2 for every spacing",
                0.5,
                1e-9,
            ),
            || {
                let mut worst = (0.0f64, 0.5);
                for k0d in k0d_grid() {
                    let c = c12(0.0, k0d, "e+")?;
                    if (c - 0.5).abs() >= worst.0 {
                        worst = ((c - 0.5).abs(), c);
                    }
                }
                Ok(noted(worst.1, format!("worst of {GRID_POINTS} spacings")))
            },
        ),
        judge(
            at_most(
                "chiral_pair_plus_e_product",
                "s=0, |+e>: C12 = 0 (product final state)",
                1e-9,
            ),
            || Ok(max_over_grid(|k0d| c12(0.0, k0d, "+e"))?.into()),
        ),
        judge(
            at_most(
                "achiral_pair_initial_independence",
                "s=1: C12 from |e+> and |+e> coincide",
                1e-9,
            ),
            || Ok(max_over_grid(|k0d| Ok((c12(1.0, k0d, "e+")? - c12(1.0, k0d, "+e")?).abs()))?.into()),
        ),
        judge(
            close(
                "achiral_pair_bragg_concurrence",
                "s=1: C12 = 1/3 at k0d = 0 and pi",
                1.0 / 3.0,
                1e-6,
            ),
            || {
                let a = c12(1.0, 0.0, "e+")?;
                let b = c12(1.0, PI, "e+")?;
                let worst = if (a - 1.0 / 3.0).abs() > (b - 1.0 / 3.0).abs() {
                    a
                } else {
                    b
                };
                Ok(noted(worst, format!("C(0) = {a:.12}, C(pi) = {b:.12}")))
            },
        ),
        judge(
            at_most(
                "achiral_pair_anti_bragg_concurrence",
                "s=1: C12 = 0 at k0d = pi/2",
                1e-9,
            ),
            || Ok(c12(1.0, FRAC_PI_2, "e+")?.into()),
        ),
        judge(
            at_most(
                "mirror_symmetry",
                "C12(e-) = C12(+e) and C12(-e) = C12(e+) for all (s, k0d)",
                1e-9,
            ),
            || {
                let mut worst = 0.0f64;
                for s in S_VALUES {
                    for k0d in k0d_grid() {
                        worst = worst.max((c12(s, k0d, "e-")? - c12(s, k0d, "+e")?).abs());
                        worst = worst.max((c12(s, k0d, "-e")? - c12(s, k0d, "e+")?).abs());
                    }
                }
                Ok(worst.into())
            },
        ),
    ]
}

fn pair_final_states() -> Vec<Criterion> {
    let matches = |id: &'static str, s: f64, initial: &'static str| {
        move || -> Result<Measured> {
            Ok(max_over_grid(|k0d| {
                let exact = exact_final_state(id, k0d)?;
                Ok(max_abs(&(exact.matrix() - final_state(2, s, k0d, initial)?.matrix())))
            })?
            .into())
        }
    };
    let split = BipartitionSpec::qubits(2, &[1]).expect("valid split");
    vec![
        judge(
            at_most(
                "achiral_ee_final_state",
                "s=1, |ee>: (P1 + sin^2 P0)/(3 + sin^2) entry-wise",
                1e-9,
            ),
            matches("achiral_ee", 1.0, "ee"),
        ),
        judge(
            at_most(
                "chiral_ee_final_state",
                "s=0, |ee>: 5/16, 1/8 and |B> weights entry-wise",
                1e-9,
            ),
            matches("chiral_ee", 0.0, "ee"),
        ),
        judge(
            at_most(
                "chiral_e_plus_final_state",
                "s=0, |e+>: 1/4, 1/4 and |B'> weights entry-wise",
                1e-9,
            ),
            matches("chiral_e_plus", 0.0, "e+"),
        ),
        judge(
            at_most(
                "ee_final_states_unentangled",
                "|ee> final states have C12 = 0 for s = 0 and 1",
                1e-9,
            ),
            || {
                let mut worst = 0.0f64;
                for s in [0.0, 1.0] {
                    worst = worst.max(max_over_grid(|k0d| concurrence(&final_state(2, s, k0d, "ee")?))?);
                }
                Ok(worst.into())
            },
        ),
        judge(
            at_most(
                "ee_final_states_ppt",
                "|ee> final states pass the PPT test (count of failures)",
                0.0,
            ),
            || {
                let mut failures = 0usize;
                for s in [0.0, 1.0] {
                    for k0d in k0d_grid() {
                        if !ppt_check(&final_state(2, s, k0d, "ee")?, &split)?.is_ppt {
                            failures += 1;
                        }
                    }
                }
                Ok((failures as f64).into())
            },
        ),
    ]
}

fn pair_conditioned() -> Vec<Criterion> {
    let split = BipartitionSpec::qubits(2, &[1]).expect("valid split");
    let chiral = |k0d: f64| conditioned(2, 0.0, k0d, "ee");
    vec![
        judge(
            at_most(
                "chiral_conditioned_state",
                "s=0, |ee>, + detected: 5/8 |++> + 1/8 |-+> + 1/4 Bell projector, entry-wise",
                1e-9,
            ),
            || {
                let mut dev = [0.0f64; 2];
                for k0d in k0d_grid() {
                    let got = chiral(k0d)?;
                    for (slot, v) in dev.iter_mut().zip(BellVariant::ALL) {
                        let exact = exact_conditioned_state_with("chiral_ee_plus", k0d, v)?;
                        *slot = slot.max(max_abs(&(exact.matrix() - got.matrix())));
                    }
                }
                let (best, other) = if dev[0] <= dev[1] { (0, 1) } else { (1, 0) };
                let label = |i: usize| BellVariant::ALL[i].label();
                Ok(noted(
                    dev[best],
                    format!(
                        "matches the |{}> sign; |{}> deviates by {:.3e}",
                        label(best),
                        label(other),
                        dev[other]
                    ),
                ))
            },
        ),
        judge(
            close(
                "chiral_conditioned_concurrence",
                "s=0, |ee>, + detected: C = 1/4",
                0.25,
                1e-9,
            ),
            || Ok(concurrence(&chiral(0.7)?)?.into()),
        ),
        judge(
            close(
                "chiral_conditioned_negativity",
                "s=0, |ee>, + detected: E = log2(1 + (sqrt(29) - 5)/8)",
                chiral_conditioned_negativity(),
                1e-9,
            ),
            || Ok(log_negativity(&chiral(0.7)?, &split)?.into()),
        ),
        judge(
            close(
                "chiral_conditioned_negativity_rounded",
                "s=0, |ee>, + detected: E ≈ 0.068",
                0.068,
                5e-4,
            ),
            || Ok(log_negativity(&chiral(0.7)?, &split)?.into()),
        ),
        judge(
            at_most(
                "achiral_conditioned_concurrence_curve",
                "s=1, |ee>, + detected: C = cos^2/(4 - cos^2) over the grid",
                1e-9,
            ),
            || {
                Ok(max_over_grid(|k0d| {
                    let c = concurrence(&conditioned(2, 1.0, k0d, "ee")?)?;
                    Ok((c - exact_conditioned_concurrence(k0d)).abs())
                })?
                .into())
            },
        ),
        judge(
            at_most(
                "achiral_conditioned_state",
                "s=1, |ee>, + detected: (2|++> + |S> + sin^2 |A>)/(3 + sin^2) entry-wise",
                1e-9,
            ),
            || {
                Ok(max_over_grid(|k0d| {
                    let exact = exact_conditioned_state("achiral_ee_plus", k0d)?;
                    Ok(max_abs(&(exact.matrix() - conditioned(2, 1.0, k0d, "ee")?.matrix())))
                })?
                .into())
            },
        ),
        judge(
            close(
                "achiral_conditioned_bragg_maximum",
                "s=1, + detected: largest C on the grid is 1/3, at Bragg spacing",
                1.0 / 3.0,
                1e-9,
            ),
            || {
                let mut best = (f64::NEG_INFINITY, 0.0);
                for k0d in k0d_grid() {
                    let c = concurrence(&conditioned(2, 1.0, k0d, "ee")?)?;
                    if c > best.0 + 1e-12 {
                        best = (c, k0d);
                    }
                }
                Ok(noted(best.0, format!("attained at k0d = {:.4}", best.1)))
            },
        ),
        judge(
            close(
                "achiral_conditioned_bragg_negativity",
                "s=1, + detected, k0d=0: E ≈ 0.11 (exact log2(1 + (sqrt(5) - 2)/3))",
                0.11,
                5e-3,
            ),
            || {
                let e = log_negativity(&conditioned(2, 1.0, 0.0, "ee")?, &split)?;
                let exact = (1.0 + (5f64.sqrt() - 2.0) / 3.0).log2();
                Ok(noted(
                    e,
                    format!("closed form {exact:.12}, deviation {:.2e}", (e - exact).abs()),
                ))
            },
        ),
    ]
}

fn one_or_two_ground_kets(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let s: String = (0..n)
            .map(|j| ['+', '-', 'e'][(code / 3usize.pow((n - 1 - j) as u32)) % 3])
            .collect();
        let grounds = s.chars().filter(|&c| c != 'e').count();
        if (1..=2).contains(&grounds) {
            out.push(s);
        }
    }
    out
}

/// Initial ket with `(C12, C13, C23)` at each grid point.
type PairCurves = (String, Vec<[f64; 3]>);

fn chiral_triple_curves() -> Result<Vec<PairCurves>> {
    let mut rows = Vec::new();
    for initial in one_or_two_ground_kets(3) {
        let mut per_grid = Vec::new();
        for k0d in k0d_grid() {
            let c = pairwise_concurrences(&final_state(3, 0.0, k0d, &initial)?)?;
            per_grid.push([c.get(1, 2), c.get(1, 3), c.get(2, 3)]);
        }
        rows.push((initial, per_grid));
    }
    Ok(rows)
}

fn chiral_triples() -> Vec<Criterion> {
    let data = chiral_triple_curves();
    let shared = |f: fn(&[PairCurves]) -> Measured| {
        let data = &data;
        move || match data {
            Ok(d) => Ok(f(d)),
            Err(e) => Err(Error::Numerical(e.to_string())),
        }
    };
    vec![
        judge(
            at_most(
                "n3_chiral_distance_independence",
                "s=0, N=3: pairwise concurrences do not depend on k0d (max spread)",
                1e-8,
            ),
            shared(|d| {
                let mut spread = 0.0f64;
                for (_, grid) in d {
                    for pair in 0..3 {
                        let vals = grid.iter().map(|c| c[pair]);
                        spread = spread.max(fmax(vals.clone()) - fmin(vals));
                    }
                }
                noted(spread, format!("{} initial states", d.len()))
            }),
        ),
        judge(
            close(
                "n3_chiral_maximum",
                "s=0, N=3: the largest pairwise concurrence is 1/2",
                0.5,
                1e-6,
            ),
            shared(|d| {
                let best = fmax(d.iter().flat_map(|(_, g)| g.iter().flat_map(|c| c.iter().copied())));
                let attaining: Vec<&str> = d
                    .iter()
                    .filter(|(_, g)| g.iter().any(|c| c.iter().any(|&v| (v - best).abs() < 1e-6)))
                    .map(|(k, _)| k.as_str())
                    .collect();
                noted(best, format!("attained by {}", attaining.join(", ")))
            }),
        ),
    ]
}

fn all_excited_criteria() -> Vec<Criterion> {
    let data = (|| -> Result<(f64, usize, usize, f64)> {
        let mut max_c = 0.0f64;
        let mut failures = 0usize;
        let mut checked = 0usize;
        let mut min_eig = f64::INFINITY;
        for n in [3usize, 4] {
            for s in S_VALUES {
                for k0d in k0d_grid() {
                    let fin = final_state(n, s, k0d, &all_excited(n))?;
                    max_c = max_c.max(pairwise_concurrences(&fin)?.max());
                    for split in qubit_bipartitions(n) {
                        let r = ppt_check(&fin, &split)?;
                        checked += 1;
                        min_eig = min_eig.min(r.min_eigenvalue);
                        if !r.is_ppt {
                            failures += 1;
                        }
                    }
                }
            }
        }
        Ok((max_c, failures, checked, min_eig))
    })();
    vec![
        judge(
            at_most(
                "all_excited_pairwise_zero",
                "N=3, 4 from all excited: every C_ij = 0",
                1e-9,
            ),
            || {
                data.as_ref()
                    .map(|d| d.0.into())
                    .map_err(|e| Error::Numerical(e.to_string()))
            },
        ),
        judge(
            at_most(
                "all_excited_ppt",
                "N=3, 4 from all excited: every bipartition is PPT (count of failures)",
                0.0,
            ),
            || {
                data.as_ref()
                    .map(|d| {
                        noted(
                            d.1 as f64,
                            format!("{} bipartitions checked, smallest eigenvalue {:.2e}", d.2, d.3),
                        )
                    })
                    .map_err(|e| Error::Numerical(e.to_string()))
            },
        ),
    ]
}

fn chiral_quad() -> Vec<Criterion> {
    let rows: Result<Vec<[f64; 3]>> = k0d_grid()
        .into_iter()
        .map(|k0d| {
            let c = pairwise_concurrences(&final_state(4, 0.0, k0d, "e+++")?)?;
            Ok([c.get(1, 2), c.get(1, 3), c.get(1, 4)])
        })
        .collect();
    vec![
        judge(
            close("n4_chiral_e_plus_c12", "s=0, N=4, |e+++>: C12 = 1/2", 0.5, 1e-6),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                let worst =
                    rows.iter()
                        .map(|r| r[0])
                        .fold(0.5, |w, c| if (c - 0.5).abs() > (w - 0.5f64).abs() { c } else { w });
                Ok(worst.into())
            },
        ),
        judge(
            above(
                "n4_chiral_row_decreasing",
                "s=0, N=4, |e+++>: C12 > C13 > C14 (smallest gap)",
                0.0,
            ),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                let gap = fmin(rows.iter().map(|r| (r[0] - r[1]).min(r[1] - r[2])));
                let r = rows[0];
                Ok(noted(gap, format!("row 1 = [{:.6}, {:.6}, {:.6}]", r[0], r[1], r[2])))
            },
        ),
    ]
}

fn triple_conditioned() -> Vec<Criterion> {
    let rows = (|| -> Result<Vec<(f64, f64, f64, f64)>> {
        let mut out = Vec::new();
        let s1 = BipartitionSpec::qubits(3, &[1])?;
        let s2 = BipartitionSpec::qubits(3, &[2])?;
        for s in S_VALUES {
            for k0d in k0d_grid() {
                let c = conditioned(3, s, k0d, "eee")?;
                let pair = pairwise_concurrences(&c)?.max();
                let e = log_negativity(&c, &s1)?.max(log_negativity(&c, &s2)?);
                out.push((s, k0d, pair, e));
            }
        }
        Ok(out)
    })();
    vec![
        judge(
            at_most(
                "n3_conditioned_pairwise_zero",
                "N=3, |eee>, + detected: no pair of atoms is entangled",
                1e-9,
            ),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                Ok(fmax(rows.iter().map(|r| r.2)).into())
            },
        ),
        judge(
            above(
                "n3_conditioned_bipartition_entangled",
                "N=3, |eee>, + detected: max(E_1|23, E_2|13) > 1e-3 (minimum over the grid)",
                1e-3,
            ),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                let worst = rows.iter().min_by(|a, b| a.3.total_cmp(&b.3)).expect("non-empty grid");
                let below: Vec<String> = rows
                    .iter()
                    .filter(|r| r.3 <= 1e-3)
                    .map(|r| format!("(s={}, k0d/pi={:.4})", r.0, r.1 / PI))
                    .collect();
                let note = if below.is_empty() {
                    format!("minimum at s={}, k0d/pi={:.4}", worst.0, worst.1 / PI)
                } else {
                    format!(
                        "below threshold at {} of {} points: {}",
                        below.len(),
                        rows.len(),
                        below.join(" ")
                    )
                };
                Ok(noted(worst.3, note))
            },
        ),
    ]
}

fn photon_pair_negativity(n: usize, s: f64, k0d: f64) -> Result<f64> {
    let cfg = SystemConfig::equidistant(n, s, k0d)?;
    let l = Liouvillian::new(&cfg)?;
    let state = two_photon_state(&l, &ket(&all_excited(n)).density_matrix(&cfg)?)?;
    log_negativity(&state.to_density(), &BipartitionSpec::new(vec![4, 4], vec![0])?)
}

fn photon_pairs() -> Vec<Criterion> {
    vec![
        judge(
            at_most(
                "photon_pair_chiral_zero",
                "s=0: E_ph|ph = 0 for N = 2, 3 and every spacing",
                1e-9,
            ),
            || {
                let mut worst = 0.0f64;
                for n in [2, 3] {
                    worst = worst.max(max_over_grid(|k0d| photon_pair_negativity(n, 0.0, k0d))?);
                }
                Ok(worst.into())
            },
        ),
        judge(
            at_most(
                "photon_pair_bragg_zero",
                "s=1, k0d in {0, pi}: E_ph|ph = 0 for N = 2, 3",
                1e-9,
            ),
            || {
                let mut worst = 0.0f64;
                for n in [2, 3] {
                    for k0d in [0.0, PI] {
                        worst = worst.max(photon_pair_negativity(n, 1.0, k0d)?);
                    }
                }
                Ok(worst.into())
            },
        ),
        judge(
            above(
                "photon_pair_anti_bragg_entangled",
                "s=1, k0d = pi/2: E_ph|ph > 1e-3 for N = 2, 3",
                1e-3,
            ),
            || {
                let a = photon_pair_negativity(2, 1.0, FRAC_PI_2)?;
                let b = photon_pair_negativity(3, 1.0, FRAC_PI_2)?;
                Ok(noted(a.min(b), format!("N=2: {a:.6}, N=3: {b:.6}")))
            },
        ),
        judge(
            above(
                "photon_pair_decreases_with_n",
                "E_ph|ph(N=2) - E_ph|ph(N=3) > 0 wherever N=2 is entangled",
                0.0,
            ),
            || {
                let mut gap = f64::INFINITY;
                let mut compared = 0usize;
                let mut reversed = Vec::new();
                for s in S_VALUES {
                    for k0d in k0d_grid() {
                        let e2 = photon_pair_negativity(2, s, k0d)?;
                        if e2 <= 1e-3 {
                            continue;
                        }
                        compared += 1;
                        let e3 = photon_pair_negativity(3, s, k0d)?;
                        gap = gap.min(e2 - e3);
                        if e3 >= e2 {
                            reversed.push(format!("(s={s}, k0d/pi={:.4})", k0d / PI));
                        }
                    }
                }
                let mut note = format!("{compared} points with E(N=2) > 1e-3");
                if !reversed.is_empty() {
                    note.push_str(&format!("; N=3 is larger at {}", reversed.join(" ")));
                }
                Ok(noted(gap, note))
            },
        ),
    ]
}

fn atom_photon() -> Vec<Criterion> {
    let rows = (|| -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let split = BipartitionSpec::new(vec![2, 4], vec![1])?;
        let mut out = Vec::new();
        for s in S_VALUES {
            for k0d in k0d_grid() {
                let mut per_n = Vec::new();
                for n in [2usize, 3] {
                    let j = joint(n, s, k0d, &all_excited(n))?;
                    let vals = (1..=n)
                        .map(|a| log_negativity(&atom_photon_reduction(&j, a)?, &split))
                        .collect::<Result<Vec<f64>>>()?;
                    per_n.push(vals);
                }
                let three = per_n.pop().expect("two entries");
                let two = per_n.pop().expect("two entries");
                out.push((two, three));
            }
        }
        Ok(out)
    })();
    vec![
        judge(
            above(
                "atom_photon_entangled",
                "N=2, 3 from all excited: every E_ph|j > 1e-3 on the grid",
                1e-3,
            ),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                Ok(fmin(rows.iter().flat_map(|(a, b)| a.iter().chain(b).copied())).into())
            },
        ),
        judge(
            above(
                "atom_photon_decreases_with_n",
                "min_j E_ph|j(N=2) - max_j E_ph|j(N=3) > 0 at every grid point",
                0.0,
            ),
            || {
                let rows = rows.as_ref().map_err(|e| Error::Numerical(e.to_string()))?;
                Ok(fmin(
                    rows.iter()
                        .map(|(a, b)| fmin(a.iter().copied()) - fmax(b.iter().copied())),
                )
                .into())
            },
        ),
    ]
}

/// Parameter points for the backend cross-checks: (N, s, k₀d).
const BACKEND_POINTS: [(usize, f64, f64); 8] = [
    (1, 0.0, 0.0),
    (1, 0.5, 0.0),
    (2, 0.0, 0.7),
    (2, 0.5, 2.0),
    (2, 1.0, 1.2),
    (3, 0.0, 0.9),
    (3, 0.5, 1.7),
    (3, 1.0, 1.3),
];

fn backend_inputs(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<CMatrix>> {
    let d = 3usize.pow(n as u32);
    let mixed: String = (0..n).map(|j| if j % 2 == 0 { 'e' } else { '+' }).collect();
    Ok(vec![
        ket(&all_excited(n))
            .density_matrix(&SystemConfig::equidistant(n, 0.0, 0.0)?)?
            .into_matrix(),
        ket(&mixed)
            .density_matrix(&SystemConfig::equidistant(n, 0.0, 0.0)?)?
            .into_matrix(),
        random_density(rng, d, d),
    ])
}

fn backends() -> Vec<Criterion> {
    vec![
        judge(
            at_most(
                "backend_agreement",
                "sector cascade, spectral projection and long-time integration agree (N <= 3)",
                1e-7,
            ),
            || {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
                let mut worst = 0.0f64;
                let mut slowest = f64::INFINITY;
                for (n, s, k0d) in BACKEND_POINTS {
                    let cfg = SystemConfig::equidistant(n, s, k0d)?;
                    let l = Liouvillian::new(&cfg)?;
                    let spec = spectral_decompose(&l)?;
                    let scale = fmax(spec.eigenvalues().iter().map(|z| z.norm()));
                    slowest = slowest.min(fmin(
                        spec.eigenvalues()
                            .iter()
                            .filter(|z| z.norm() >= 1e-9 * scale)
                            .map(|z| -z.re),
                    ));
                    for x in backend_inputs(n, &mut rng)? {
                        let a = l.asymptotic_operator(&x)?;
                        let b = spec.project(&x);
                        let c = long_time_asymptotic(&l, &x)?;
                        worst = worst
                            .max(max_abs(&(&a - &b)))
                            .max(max_abs(&(&a - &c)))
                            .max(max_abs(&(b - c)));
                    }
                }
                Ok(noted(
                    worst,
                    format!(
                        "{} points, slowest decay rate {slowest:.3}, horizon t = {LONG_TIME}",
                        BACKEND_POINTS.len()
                    ),
                ))
            },
        ),
        judge(
            at_most(
                "drazin_identity",
                "L[L^D X] = X - P0[X] and P0[L^D X] = 0 for random X",
                1e-8,
            ),
            || {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
                let mut worst = 0.0f64;
                let points = BACKEND_POINTS.iter().copied().chain([(4, 0.5, 0.8)]);
                for (n, s, k0d) in points {
                    let cfg = SystemConfig::equidistant(n, s, k0d)?;
                    let l = Liouvillian::new(&cfg)?;
                    let d = cfg.dim();
                    for _ in 0..3 {
                        let x = random_matrix(&mut rng, d, d);
                        let y = l.drazin_apply(&x)?;
                        let p0x = l.asymptotic_operator(&x)?;
                        let residual = max_abs(&(l.apply(&y)? + p0x - &x));
                        let kernel = max_abs(&l.asymptotic_operator(&y)?);
                        worst = worst.max(residual).max(kernel);
                    }
                }
                Ok(worst.into())
            },
        ),
        judge(
            at_most(
                "drazin_quadrature",
                "-L^D(rho0) equals the integral of M_t[rho0] - M_inf[rho0]",
                1e-6,
            ),
            || {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
                let mut worst = 0.0f64;
                for (n, s, k0d) in BACKEND_POINTS {
                    let cfg = SystemConfig::equidistant(n, s, k0d)?;
                    let l = Liouvillian::new(&cfg)?;
                    let x = random_density(&mut rng, cfg.dim(), 2);
                    let quad = relaxation_integral(&l, &x, LONG_TIME)?;
                    worst = worst.max(max_abs(&(quad + l.drazin_apply(&x)?)));
                }
                Ok(worst.into())
            },
        ),
        judge(
            at_most(
                "time_resolved_quadrature",
                "integral of the time-resolved photon state equals N0 times the averaged state",
                1e-6,
            ),
            || {
                let mut worst = 0.0f64;
                let points = [
                    (1, 0.0, 0.0, "e"),
                    (2, 0.0, 0.7, "ee"),
                    (2, 0.5, 2.0, "e+"),
                    (2, 1.0, 1.2, "ee"),
                    (3, 1.0, 1.3, "eee"),
                ];
                for (n, s, k0d, initial) in points {
                    let cfg = SystemConfig::equidistant(n, s, k0d)?;
                    let l = Liouvillian::new(&cfg)?;
                    let rho0 = ket(initial).density_matrix(&cfg)?;
                    let n0 = emitted_photon_count(&rho0)?;
                    let quad = time_resolved_integral(&l, &rho0, LONG_TIME)?;
                    let avg = one_photon_joint(&l, &rho0)?;
                    worst = worst.max(max_abs(&(quad - avg.matrix().scale(n0))));
                }
                Ok(worst.into())
            },
        ),
        judge(
            at_most(
                "su2_covariance",
                "s=1: M_inf[G rho G+] = G M_inf[rho] G+ for 20 random global rotations",
                1e-8,
            ),
            || {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
                let mut worst = 0.0f64;
                for trial in 0..20 {
                    let n = if trial < 10 { 2 } else { 3 };
                    // keep away from exact Bragg spacing, where random inputs may
                    // populate the dark excited states of three atoms
                    let k0d = rng.random_range(0.3..PI - 0.3);
                    let cfg = SystemConfig::equidistant(n, 1.0, k0d)?;
                    let l = Liouvillian::new(&cfg)?;
                    let g = global_rotation(&random_su2(&mut rng), n);
                    let rho = random_density(&mut rng, cfg.dim(), cfg.dim());
                    let lhs = l.asymptotic_operator(&(&g * &rho * g.adjoint()))?;
                    let rhs = &g * l.asymptotic_operator(&rho)? * g.adjoint();
                    worst = worst.max(max_abs(&(lhs - rhs)));
                }
                Ok(worst.into())
            },
        ),
    ]
}

fn peres_horodecki() -> Vec<Criterion> {
    vec![judge(
        at_most(
            "peres_horodecki_equivalence",
            "C > 0 exactly when the partial transpose is not PSD, 500 random two-qubit states (mismatches)",
            0.0,
        ),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
            let split = BipartitionSpec::qubits(2, &[1])?;
            let mut mismatches = 0usize;
            let mut entangled = 0usize;
            for i in 0..500 {
                let m = match i % 5 {
                    4 => {
                        let p: f64 = rng.random();
                        random_density(&mut rng, 4, 1).scale(p) + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0)
                    }
                    r => random_density(&mut rng, 4, r + 1),
                };
                let rho = DensityMatrix::new(m, Space::Ground)?;
                let c = concurrence(&rho)? > 0.0;
                let npt = !ppt_check(&rho, &split)?.is_ppt;
                entangled += c as usize;
                if c != npt {
                    mismatches += 1;
                }
            }
            Ok(noted(
                mismatches as f64,
                format!("{entangled} entangled, {} separable", 500 - entangled),
            ))
        },
    )]
}

type Group = fn() -> Vec<Criterion>;

/// Criterion groups in report order, by name.
pub const GROUPS: [(&str, Group); 12] = [
    ("single_atom", single_atom),
    ("pair_concurrence", pair_concurrence),
    ("pair_final_states", pair_final_states),
    ("pair_conditioned", pair_conditioned),
    ("chiral_triples", chiral_triples),
    ("all_excited", all_excited_criteria),
    ("chiral_quad", chiral_quad),
    ("triple_conditioned", triple_conditioned),
    ("photon_pairs", photon_pairs),
    ("atom_photon", atom_photon),
    ("backends", backends),
    ("peres_horodecki", peres_horodecki),
];

/// Runs every group, one thread per group, and collects the criteria in
/// group order.
pub fn run_acceptance() -> AcceptanceReport {
    let start = Instant::now();
    let criteria: Vec<Criterion> = std::thread::scope(|scope| {
        let handles: Vec<_> = GROUPS.iter().map(|(_, g)| scope.spawn(g)).collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("acceptance group panicked"))
            .collect()
    });
    AcceptanceReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judge_handles_errors_and_nan() {
        let c = judge(at_most("x", "x", 1.0), || Err(Error::Numerical("boom".into())));
        assert!(!c.passed && c.note.unwrap().contains("boom"));
        let c = judge(above("y", "y", 0.0), || Ok(f64::NAN.into()));
        assert!(!c.passed);
        let c = judge(close("z", "z", 1.0, 0.1), || Ok(1.05.into()));
        assert!(c.passed && c.line().starts_with("PASS"));
    }

    #[test]
    fn ket_enumeration() {
        let kets = one_or_two_ground_kets(3);
        assert_eq!(kets.len(), 3 * 4 + 3 * 2);
        assert!(kets.contains(&"e+-".to_string()) && !kets.contains(&"eee".to_string()));
    }

    #[test]
    fn grid_endpoints() {
        let g = k0d_grid();
        assert_eq!(g.len(), GRID_POINTS);
        assert_eq!(g[0], 0.0);
        assert!((g[GRID_POINTS - 1] - PI).abs() < 1e-15);
    }
}
