//! Atomic Hilbert space, basis conventions and the tensor primitives
//! (partial trace, partial transpose, ground restriction) used everywhere
//! else in the crate.
//!
//! Basis ordering is big-endian: atom 1 is the most significant digit and
//! each atom contributes a digit `0 = |+>`, `1 = |->`, `2 = |e>`. The ground
//! (qubit) space uses the same order with digits `0 = |+>`, `1 = |->`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest supported array.
pub const MAX_ATOMS: usize = 6;

/// Absolute tolerance for Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

/// Largest excited population tolerated by [`restrict_to_ground`].
pub const GROUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomLevel {
    GPlus,
    GMinus,
    Excited,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::GPlus, AtomLevel::GMinus, AtomLevel::Excited];

    pub fn ordinal(self) -> usize {
        match self {
            AtomLevel::GPlus => 0,
            AtomLevel::GMinus => 1,
            AtomLevel::Excited => 2,
        }
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Self> {
        Self::ALL.get(ordinal).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            AtomLevel::GPlus => '+',
            AtomLevel::GMinus => '-',
            AtomLevel::Excited => 'e',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(AtomLevel::GPlus),
            // ASCII hyphen and the unicode minus sign are both accepted.
            '-' | '\u{2212}' => Some(AtomLevel::GMinus),
            'e' | 'E' => Some(AtomLevel::Excited),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    Plus,
    Minus,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::Plus, Polarization::Minus];

    /// Ground level reached by emitting a photon of this polarization.
    pub fn ground_level(self) -> AtomLevel {
        match self {
            Polarization::Plus => AtomLevel::GPlus,
            Polarization::Minus => AtomLevel::GMinus,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarization::Plus => Polarization::Minus,
            Polarization::Minus => Polarization::Plus,
        }
    }

    pub fn symbol(self) -> char {
        self.ground_level().symbol()
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" => Ok(Polarization::Plus),
            "-" | "\u{2212}" | "minus" => Ok(Polarization::Minus),
            other => Err(Error::Config(format!("unknown polarization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Right, Direction::Left];

    pub fn flipped(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }

    pub fn arrow(self) -> char {
        match self {
            Direction::Right => '→',
            Direction::Left => '←',
        }
    }
}

/// One physical instance: atom count, chirality and atom phases `k0 z_j`.
///
/// Rates are in units of the single-atom rate `γ`, so `γ = 1` throughout.
/// Positions enter only through `exp(i k0 |z_i - z_j|)`; they are phases
/// (radians), so coinciding values are allowed and stand for Bragg spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    n_atoms: usize,
    chirality: f64,
    positions: Vec<f64>,
}

impl SystemConfig {
    pub const GAMMA: f64 = 1.0;

    pub fn new(chirality: f64, positions: Vec<f64>) -> Result<Self> {
        let n_atoms = positions.len();
        if n_atoms == 0 || n_atoms > MAX_ATOMS {
            return Err(Error::Config(format!(
                "atom count must lie in 1..={MAX_ATOMS}, got {n_atoms}"
            )));
        }
        if !(0.0..=1.0).contains(&chirality) {
            return Err(Error::Config(format!("chirality must lie in [0, 1], got {chirality}")));
        }
        if positions.iter().any(|z| !z.is_finite()) {
            return Err(Error::Config("positions must be finite".into()));
        }
        if positions.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!(
                "positions must be non-decreasing, got {positions:?}"
            )));
        }
        Ok(SystemConfig {
            n_atoms,
            chirality,
            positions,
        })
    }

    /// Equidistant array with phases `k0 z_j = (j - 1) k0 d`.
    pub fn equidistant(n_atoms: usize, chirality: f64, k0d: f64) -> Result<Self> {
        if k0d < 0.0 {
            return Err(Error::Config(format!("spacing must be non-negative, got {k0d}")));
        }
        Self::new(chirality, (0..n_atoms).map(|j| j as f64 * k0d).collect())
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn chirality(&self) -> f64 {
        self.chirality
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Dimension of the full `3^N` atomic space.
    pub fn dim(&self) -> usize {
        3usize.pow(self.n_atoms as u32)
    }

    /// Dimension of the `2^N` ground manifold.
    pub fn ground_dim(&self) -> usize {
        1usize << self.n_atoms
    }

    /// Emission rate `γ_δ^(σ)` under time-reversal symmetry:
    /// `γ_→^(+) = γ_←^(-) = γ` and `γ_→^(-) = γ_←^(+) = sγ`.
    pub fn rate(&self, sigma: Polarization, delta: Direction) -> f64 {
        match (sigma, delta) {
            (Polarization::Plus, Direction::Right) | (Polarization::Minus, Direction::Left) => Self::GAMMA,
            _ => self.chirality * Self::GAMMA,
        }
    }

    /// The mirror image: atom order reversed and positions negated.
    pub fn mirrored(&self) -> Self {
        let positions = self.positions.iter().rev().map(|z| -z).collect();
        SystemConfig {
            n_atoms: self.n_atoms,
            chirality: self.chirality,
            positions,
        }
    }
}

/// Product basis state written as a string over `{+, -, e}`, atom 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KetString {
    levels: Vec<AtomLevel>,
}

impl KetString {
    pub fn from_levels(levels: Vec<AtomLevel>) -> Result<Self> {
        if levels.is_empty() || levels.len() > MAX_ATOMS {
            return Err(Error::Ket {
                ket: levels.iter().map(|l| l.symbol()).collect(),
                reason: format!("length must lie in 1..={MAX_ATOMS}"),
            });
        }
        Ok(KetString { levels })
    }

    /// All `e` atoms.
    pub fn all_excited(n_atoms: usize) -> Result<Self> {
        Self::from_levels(vec![AtomLevel::Excited; n_atoms])
    }

    pub fn levels(&self) -> &[AtomLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn excitations(&self) -> usize {
        self.levels.iter().filter(|&&l| l == AtomLevel::Excited).count()
    }

    /// Mirror image: atom order reversed, `+` and `-` exchanged.
    pub fn mirrored(&self) -> Self {
        let levels = self
            .levels
            .iter()
            .rev()
            .map(|l| match l {
                AtomLevel::GPlus => AtomLevel::GMinus,
                AtomLevel::GMinus => AtomLevel::GPlus,
                AtomLevel::Excited => AtomLevel::Excited,
            })
            .collect();
        KetString { levels }
    }

    /// Pure density matrix `|ket><ket|` on the full space of `config`.
    pub fn density_matrix(&self, config: &SystemConfig) -> Result<DensityMatrix> {
        let idx = basis_index(self, config)?;
        let dim = config.dim();
        let mut m = CMatrix::zeros(dim, dim);
        m[(idx, idx)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix {
            matrix: m,
            space: Space::Full,
        })
    }
}

impl FromStr for KetString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('|')
            .and_then(|r| r.strip_suffix('>').or_else(|| r.strip_suffix('⟩')))
            .unwrap_or(s);
        let levels = s
            .chars()
            .map(|c| {
                AtomLevel::from_symbol(c).ok_or_else(|| Error::Ket {
                    ket: s.to_string(),
                    reason: format!("invalid character {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_levels(levels).map_err(|_| Error::Ket {
            ket: s.to_string(),
            reason: format!("length must lie in 1..={MAX_ATOMS}"),
        })
    }
}

impl fmt::Display for KetString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

/// Row/column index of a product basis state in the full `3^N` space.
pub fn basis_index(ket: &KetString, config: &SystemConfig) -> Result<usize> {
    if ket.len() != config.n_atoms() {
        return Err(Error::Ket {
            ket: ket.to_string(),
            reason: format!("length {} does not match {} atoms", ket.len(), config.n_atoms()),
        });
    }
    Ok(ket.levels.iter().fold(0, |acc, l| acc * 3 + l.ordinal()))
}

/// Digits of a full-space basis index, atom 1 first.
pub fn basis_digits(index: usize, n_atoms: usize) -> Vec<usize> {
    let mut digits = vec![0; n_atoms];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % 3;
        rest /= 3;
    }
    digits
}

/// Number of excited atoms in a full-space basis state.
pub fn excitation_count(index: usize, n_atoms: usize) -> usize {
    basis_digits(index, n_atoms).iter().filter(|&&d| d == 2).count()
}

/// Full-space indices of the ground manifold, in ground-space order.
pub fn ground_indices(n_atoms: usize) -> Vec<usize> {
    (0..1usize << n_atoms)
        .map(|g| {
            (0..n_atoms).fold(0, |acc, k| {
                let bit = (g >> (n_atoms - 1 - k)) & 1;
                acc * 3 + bit
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// `3^N` atomic space.
    Full,
    /// `2^N` ground (qubit) space.
    Ground,
    /// Anything involving photon indices.
    Joint,
}

/// Hermitian, positive semidefinite, unit-trace matrix tagged with its space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    space: Space,
}

impl DensityMatrix {
    /// Validates with the default tolerance [`STATE_TOL`].
    pub fn new(matrix: CMatrix, space: Space) -> Result<Self> {
        Self::with_tolerance(matrix, space, STATE_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, space: Space, tol: f64) -> Result<Self> {
        check_density(&matrix, tol)?;
        match space {
            Space::Full => local_count(matrix.nrows(), 3)?,
            Space::Ground => local_count(matrix.nrows(), 2)?,
            Space::Joint => 0,
        };
        Ok(DensityMatrix { matrix, space })
    }

    pub(crate) fn from_parts_unchecked(matrix: CMatrix, space: Space) -> Self {
        DensityMatrix { matrix, space }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of atoms for full or ground states.
    pub fn n_atoms(&self) -> Option<usize> {
        match self.space {
            Space::Full => local_count(self.dim(), 3).ok(),
            Space::Ground => local_count(self.dim(), 2).ok(),
            Space::Joint => None,
        }
    }

    fn local_dim(&self) -> Result<usize> {
        match self.space {
            Space::Full => Ok(3),
            Space::Ground => Ok(2),
            Space::Joint => Err(Error::InvalidState(
                "atom-wise operations need a full or ground state".into(),
            )),
        }
    }

    /// Reduced state on the atoms in `keep` (1-based indices).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let local = self.local_dim()?;
        let n = local_count(self.dim(), local)?;
        if keep.is_empty() {
            return Err(Error::Config("partial trace needs at least one kept atom".into()));
        }
        let mut zero_based = Vec::with_capacity(keep.len());
        for &k in keep {
            if k == 0 || k > n {
                return Err(Error::IndexOutOfRange { index: k, max: n });
            }
            zero_based.push(k - 1);
        }
        zero_based.sort_unstable();
        zero_based.dedup();
        let reduced = partial_trace(&self.matrix, &vec![local; n], &zero_based)?;
        Ok(DensityMatrix {
            matrix: reduced,
            space: self.space,
        })
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn to_record(&self) -> MatrixRecord {
        MatrixRecord::new(&self.matrix, self.space)
    }
}

fn local_count(dim: usize, local: usize) -> Result<usize> {
    let mut n = 0;
    let mut d = 1;
    while d < dim {
        d *= local;
        n += 1;
    }
    if d != dim || n == 0 {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a positive power of {local}"
        )));
    }
    Ok(n)
}

fn check_density(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidState(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm = hermiticity_error(m);
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = min_eigenvalue(&hermitize(m));
    if min < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total || dims.contains(&0) {
        return Err(Error::Dimension {
            expected: total,
            got: m.nrows(),
        });
    }
    Ok(())
}

fn split_index(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn join_index(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (digit, dim)| acc * dim + digit)
}

/// Partial trace of an operator on `⊗ dims`, keeping the subsystems in
/// `keep` (0-based, ascending). Subsystem 0 is the most significant.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Bipartition(format!(
            "kept subsystems {keep:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    let n = m.nrows();
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..n {
        split_index(r, dims, &mut rd);
        for c in 0..n {
            let v = m[(r, c)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            split_index(c, dims, &mut cd);
            let traced_match = (0..dims.len()).filter(|k| !keep.contains(k)).all(|k| rd[k] == cd[k]);
            if !traced_match {
                continue;
            }
            let ro = join_index(keep.iter().map(|&k| (rd[k], dims[k])));
            let co = join_index(keep.iter().map(|&k| (cd[k], dims[k])));
            out[(ro, co)] += v;
        }
    }
    Ok(out)
}

/// Partial transpose of an operator on `⊗ dims` with respect to the
/// subsystems listed in `transposed` (0-based).
pub fn partial_transpose(m: &CMatrix, dims: &[usize], transposed: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if transposed.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Bipartition(format!(
            "subsystems {transposed:?} invalid for {} subsystems",
            dims.len()
        )));
    }
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..n {
        split_index(r, dims, &mut rd);
        for c in 0..n {
            split_index(c, dims, &mut cd);
            let mut nr = rd.clone();
            let mut nc = cd.clone();
            for &k in transposed {
                nr[k] = cd[k];
                nc[k] = rd[k];
            }
            let ro = join_index(nr.iter().copied().zip(dims.iter().copied()));
            let co = join_index(nc.iter().copied().zip(dims.iter().copied()));
            out[(ro, co)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// The `2^N` ground block of a final state, renormalized to unit trace.
pub fn restrict_to_ground(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.space != Space::Full {
        return Err(Error::InvalidState(
            "ground restriction needs a full-space state".into(),
        ));
    }
    let n = local_count(rho.dim(), 3)?;
    let ground = ground_indices(n);
    let block = rho.matrix.select_rows(&ground).select_columns(&ground);
    let ground_pop = block.trace().re;
    let excited_pop = rho.trace() - ground_pop;
    if excited_pop.abs() > GROUND_TOL {
        return Err(Error::InvalidState(format!(
            "population {excited_pop:e} outside the ground manifold; not a final state"
        )));
    }
    if ground_pop <= 0.0 {
        return Err(Error::InvalidState("ground block has no population".into()));
    }
    Ok(DensityMatrix {
        matrix: hermitize(&block.unscale(ground_pop)),
        space: Space::Ground,
    })
}

/// Operator on the full atomic space of a given configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomOperator {
    n_atoms: usize,
    matrix: CMatrix,
}

impl AtomOperator {
    pub fn new(config: &SystemConfig, matrix: CMatrix) -> Result<Self> {
        let dim = config.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        Ok(AtomOperator {
            n_atoms: config.n_atoms(),
            matrix,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// `b_{i,σ} = |σ><e|` on atom `i` (1-based), identity elsewhere.
pub fn jump_operator(i: usize, sigma: Polarization, config: &SystemConfig) -> Result<AtomOperator> {
    let n = config.n_atoms();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    let dim = config.dim();
    let stride = 3usize.pow((n - i) as u32);
    let drop = (AtomLevel::Excited.ordinal() - sigma.ground_level().ordinal()) * stride;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        if (col / stride) % 3 == AtomLevel::Excited.ordinal() {
            m[(col - drop, col)] = C64::new(1.0, 0.0);
        }
    }
    AtomOperator::new(config, m)
}

/// Collective lowering operator for a photon of polarization `σ`
/// leaving in direction `δ`: `sqrt(γ_δ^(σ)) Σ_j b_{j,σ} exp(∓ i k0 z_j)`,
/// with `-` for right-moving and `+` for left-moving photons.
pub fn collective_jump(sigma: Polarization, delta: Direction, config: &SystemConfig) -> AtomOperator {
    let dim = config.dim();
    let amp = config.rate(sigma, delta).sqrt();
    let sign = match delta {
        Direction::Right => -1.0,
        Direction::Left => 1.0,
    };
    let mut m = CMatrix::zeros(dim, dim);
    if amp > 0.0 {
        for (j, &z) in config.positions().iter().enumerate() {
            let b = jump_operator(j + 1, sigma, config).expect("index in range");
            let phase = C64::from_polar(amp, sign * z);
            m += b.matrix.map(|x| x * phase);
        }
    }
    AtomOperator {
        n_atoms: config.n_atoms(),
        matrix: m,
    }
}

/// Serialized matrix: `{dim, space, data}` with row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub dim: usize,
    pub space: Space,
    pub data: Vec<[f64; 2]>,
}

impl MatrixRecord {
    pub fn new(m: &CMatrix, space: Space) -> Self {
        let dim = m.nrows();
        let data = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        MatrixRecord { dim, space, data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.dim * self.dim {
            return Err(Error::Dimension {
                expected: self.dim * self.dim,
                got: self.data.len(),
            });
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |r, c| {
            let [re, im] = self.data[r * self.dim + c];
            C64::new(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket(s: &str) -> KetString {
        s.parse().unwrap()
    }

    fn bell_singlet_ground() -> CMatrix {
        // (|+-> - |-+>)/sqrt(2) in ground order ++, +-, -+, --
        let mut v = CMatrix::zeros(4, 1);
        v[(1, 0)] = c(0.5f64.sqrt(), 0.0);
        v[(2, 0)] = c(-(0.5f64.sqrt()), 0.0);
        &v * v.adjoint()
    }

    #[test]
    fn basis_index_examples() {
        let one = SystemConfig::equidistant(1, 0.0, 0.0).unwrap();
        let two = SystemConfig::equidistant(2, 0.0, 1.0).unwrap();
        assert_eq!(basis_index(&ket("+"), &one).unwrap(), 0);
        assert_eq!(basis_index(&ket("e"), &one).unwrap(), 2);
        assert_eq!(basis_index(&ket("e+"), &two).unwrap(), 6);
        assert!(basis_index(&ket("e+"), &one).is_err());
        assert!("e+x".parse::<KetString>().is_err());
        assert!("".parse::<KetString>().is_err());
    }

    #[test]
    fn basis_index_is_a_bijection() {
        let cfg = SystemConfig::equidistant(3, 0.5, 0.3).unwrap();
        let mut seen = [false; 27];
        for idx in 0..27 {
            let levels = basis_digits(idx, 3)
                .into_iter()
                .map(|d| AtomLevel::from_ordinal(d).unwrap())
                .collect();
            let k = KetString::from_levels(levels).unwrap();
            let back = basis_index(&k, &cfg).unwrap();
            assert_eq!(back, idx);
            seen[back] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn ket_parsing_accepts_brackets_and_unicode_minus() {
        assert_eq!(ket("|e+⟩"), ket("e+"));
        assert_eq!(ket("\u{2212}e"), ket("-e"));
        assert_eq!(ket("e+-").to_string(), "e+-");
        assert_eq!(ket("e+e+").excitations(), 2);
        assert_eq!(ket("e+").mirrored(), ket("-e"));
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(1.5, vec![0.0]).is_err());
        assert!(SystemConfig::new(0.5, vec![]).is_err());
        assert!(SystemConfig::new(0.5, vec![1.0, 0.0]).is_err());
        assert!(SystemConfig::equidistant(7, 0.5, 1.0).is_err());
        assert!(SystemConfig::equidistant(2, 0.5, 0.0).is_ok());
        let cfg = SystemConfig::equidistant(2, 0.3, 1.0).unwrap();
        assert_eq!(cfg.rate(Polarization::Plus, Direction::Right), 1.0);
        assert_eq!(cfg.rate(Polarization::Minus, Direction::Left), 1.0);
        assert_eq!(cfg.rate(Polarization::Plus, Direction::Left), 0.3);
        assert_eq!(cfg.rate(Polarization::Minus, Direction::Right), 0.3);
        assert_eq!(cfg.mirrored().positions(), &[-1.0, 0.0]);
    }

    #[test]
    fn jump_operator_examples() {
        let one = SystemConfig::equidistant(1, 0.0, 0.0).unwrap();
        let b = jump_operator(1, Polarization::Plus, &one).unwrap();
        let mut expected = CMatrix::zeros(3, 3);
        expected[(0, 2)] = c(1.0, 0.0);
        assert_eq!(b.matrix(), &expected);
        assert!((b.matrix() * b.matrix()).iter().all(|z| z.norm() == 0.0));

        let two = SystemConfig::equidistant(2, 0.0, 1.0).unwrap();
        let b2 = jump_operator(2, Polarization::Minus, &two).unwrap();
        let ee = basis_index(&ket("ee"), &two).unwrap();
        let em = basis_index(&ket("e-"), &two).unwrap();
        let mut v = CMatrix::zeros(9, 1);
        v[(ee, 0)] = c(1.0, 0.0);
        let out = b2.matrix() * v;
        for r in 0..9 {
            let want = if r == em { 1.0 } else { 0.0 };
            assert_eq!(out[(r, 0)], c(want, 0.0));
        }
        assert!(jump_operator(3, Polarization::Plus, &two).is_err());
        assert!(jump_operator(0, Polarization::Plus, &two).is_err());
    }

    #[test]
    fn collective_jump_examples() {
        let one = SystemConfig::equidistant(1, 0.0, 0.0).unwrap();
        let left_plus = collective_jump(Polarization::Plus, Direction::Left, &one);
        assert_eq!(max_abs(left_plus.matrix()), 0.0);
        let right_plus = collective_jump(Polarization::Plus, Direction::Right, &one);
        let b = jump_operator(1, Polarization::Plus, &one).unwrap();
        assert!(max_abs(&(right_plus.matrix() - b.matrix())) < 1e-15);

        let two = SystemConfig::new(1.0, vec![0.0, FRAC_PI_2]).unwrap();
        let op = collective_jump(Polarization::Minus, Direction::Left, &two);
        let b1 = jump_operator(1, Polarization::Minus, &two).unwrap();
        let b2 = jump_operator(2, Polarization::Minus, &two).unwrap();
        let expected = b1.matrix() + b2.matrix().map(|x| x * c(0.0, 1.0));
        assert!(max_abs(&(op.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn collective_jump_phases_at_zero_chirality() {
        let cfg = SystemConfig::new(0.0, vec![0.0, 0.7, 1.9]).unwrap();
        assert_eq!(
            max_abs(collective_jump(Polarization::Plus, Direction::Left, &cfg).matrix()),
            0.0
        );
        assert_eq!(
            max_abs(collective_jump(Polarization::Minus, Direction::Right, &cfg).matrix()),
            0.0
        );
        let right = collective_jump(Polarization::Plus, Direction::Right, &cfg);
        for (j, &z) in cfg.positions().iter().enumerate() {
            let b = jump_operator(j + 1, Polarization::Plus, &cfg).unwrap();
            // pick the matrix element of b_j alone: |+ ...><e ...| on atom j with others in |+>
            let (r, col) = b
                .matrix()
                .iter()
                .enumerate()
                .find(|(_, v)| v.norm() > 0.5)
                .map(|(k, _)| (k % 27, k / 27))
                .unwrap();
            let expected = C64::from_polar(1.0, -z);
            assert!((right.matrix()[(r, col)] - expected).norm() < 1e-14);
        }
        let left = collective_jump(Polarization::Minus, Direction::Left, &cfg);
        for (j, &z) in cfg.positions().iter().enumerate() {
            let b = jump_operator(j + 1, Polarization::Minus, &cfg).unwrap();
            let (k, _) = b.matrix().iter().enumerate().find(|(_, v)| v.norm() > 0.5).unwrap();
            let expected = C64::from_polar(1.0, z);
            assert!((left.matrix()[(k % 27, k / 27)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let bell = DensityMatrix::new(bell_singlet_ground(), Space::Ground).unwrap();
        assert_eq!(bell.partial_trace(&[1, 2]).unwrap(), bell);
        let reduced = bell.partial_trace(&[1]).unwrap();
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(max_abs(&(reduced.matrix() - half)) < 1e-15);
        assert!(bell.partial_trace(&[]).is_err());
        assert!(bell.partial_trace(&[3]).is_err());

        let a = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, -0.3), c(0.0, 0.3), c(0.6, 0.0)]);
        let prod = DensityMatrix::new(kron(&a, &b), Space::Ground).unwrap();
        assert!(max_abs(&(prod.partial_trace(&[2]).unwrap().matrix() - &b)) < 1e-15);
        assert!(max_abs(&(prod.partial_trace(&[1]).unwrap().matrix() - &a)) < 1e-15);
    }

    #[test]
    fn partial_trace_composes() {
        let m = CMatrix::from_fn(27, 27, |r, col| {
            c((r * 31 + col * 7) as f64 % 5.0, (r as f64 - col as f64) * 0.1)
        });
        let dims = [3, 3, 3];
        let step = partial_trace(&m, &dims, &[0, 2]).unwrap();
        let twice = partial_trace(&step, &[3, 3], &[0]).unwrap();
        let once = partial_trace(&m, &dims, &[0]).unwrap();
        assert!(max_abs(&(twice - once)) < 1e-12);
    }

    #[test]
    fn partial_transpose_examples() {
        let bell = bell_singlet_ground();
        let pt = partial_transpose(&bell, &[2, 2], &[0]).unwrap();
        assert!((min_eigenvalue(&pt) + 0.5).abs() < 1e-12);
        assert!(max_abs(&(partial_transpose(&pt, &[2, 2], &[0]).unwrap() - &bell)) < 1e-15);

        let a = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, -0.3), c(0.0, 0.3), c(0.6, 0.0)]);
        let pt = partial_transpose(&kron(&a, &b), &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(&pt - kron(&a.transpose(), &b))) < 1e-15);
        assert!(min_eigenvalue(&pt) > -1e-12);

        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.1, 0.0),
            c(0.2, 0.0),
            c(0.3, 0.0),
            c(0.4, 0.0),
        ]));
        assert_eq!(partial_transpose(&diag, &[2, 2], &[1]).unwrap(), diag);
        assert!(partial_transpose(&diag, &[2, 3], &[0]).is_err());
    }

    #[test]
    fn restrict_to_ground_examples() {
        let mut full = CMatrix::zeros(3, 3);
        full[(0, 0)] = c(0.5, 0.0);
        full[(1, 1)] = c(0.5, 0.0);
        let rho = DensityMatrix::new(full, Space::Full).unwrap();
        let g = restrict_to_ground(&rho).unwrap();
        assert_eq!(g.space(), Space::Ground);
        assert!(max_abs(&(g.matrix() - CMatrix::identity(2, 2).scale(0.5))) < 1e-15);

        // pure ground-supported state on two atoms: (|+-> + i|-+>)/sqrt(2)
        let cfg = SystemConfig::equidistant(2, 0.0, 1.0).unwrap();
        let mut v = CMatrix::zeros(9, 1);
        v[(basis_index(&ket("+-"), &cfg).unwrap(), 0)] = c(0.5f64.sqrt(), 0.0);
        v[(basis_index(&ket("-+"), &cfg).unwrap(), 0)] = c(0.0, 0.5f64.sqrt());
        let rho = DensityMatrix::new(&v * v.adjoint(), Space::Full).unwrap();
        let g = restrict_to_ground(&rho).unwrap();
        assert!((g.matrix()[(1, 2)] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((g.matrix()[(1, 1)] - c(0.5, 0.0)).norm() < 1e-15);

        let mut bad = CMatrix::zeros(3, 3);
        bad[(0, 0)] = c(0.9, 0.0);
        bad[(2, 2)] = c(0.1, 0.0);
        let rho = DensityMatrix::new(bad, Space::Full).unwrap();
        assert!(restrict_to_ground(&rho).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_input() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityMatrix::new(m, Space::Ground).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(m, Space::Ground).is_err());
        let m = CMatrix::identity(3, 3).scale(1.0 / 3.0);
        assert!(DensityMatrix::new(m, Space::Ground).is_err());
    }

    #[test]
    fn matrix_record_round_trip() {
        let m = bell_singlet_ground();
        let rec = MatrixRecord::new(&m, Space::Ground);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"space\":\"ground\""));
        let back: MatrixRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }
}
