//! The chiral Lindblad generator and the maps built from it: time evolution,
//! the asymptotic projection `M∞` and the Drazin inverse.
//!
//! The generator splits as `L = J + D` with the jump part
//! `J[X] = Σ_p B_p X B_p†` (the four collective operators, one per photon
//! polarization and direction) and the sector-preserving part
//! `D[X] = -K X - X K†`, `K = Σ_{ijσ} γ_ij^(σ) b_{iσ}† b_{jσ}`.
//! `K` conserves the excitation number, so `D` is block diagonal over
//! excitation sectors `(m, n)` (ket, bra) while `J` lowers `(m, n)` to
//! `(m-1, n-1)`. Both `M∞` and the Drazin inverse are therefore exact
//! back-substitutions over sectors, each step a Sylvester solve against the
//! Schur forms of the diagonal blocks of `K`.

use nalgebra::{DVector, Schur};

use crate::detection::PhotonIndex;
use crate::error::{Error, Result};
use crate::integrate::{self, Tolerances};
use crate::state::{
    collective_jump, excitation_count, hermitize, jump_operator, max_abs, CMatrix, DensityMatrix, Polarization, Space,
    SystemConfig, C64,
};

/// Denominators of the sector Sylvester solve below this are treated as
/// zero modes of `D` (dark excited states).
const SINGULAR_TOL: f64 = 1e-10;

/// Tolerance on the Drazin residual `L[Y] - (X - P0[X])`.
pub const DRAZIN_RESIDUAL_TOL: f64 = 1e-8;

/// Deflation threshold for the complex Schur iteration. Machine epsilon
/// stalls on the highly degenerate sectors of four or more atoms.
pub const SCHUR_EPS: f64 = 64.0 * f64::EPSILON;

/// `γ_ij^(σ)` for one polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayMatrix {
    pub sigma: Polarization,
    pub entries: CMatrix,
}

pub fn decay_matrix(config: &SystemConfig, sigma: Polarization) -> DecayMatrix {
    use crate::state::Direction::{Left, Right};
    let n = config.n_atoms();
    let z = config.positions();
    let right = config.rate(sigma, Right);
    let left = config.rate(sigma, Left);
    let entries = CMatrix::from_fn(n, n, |i, j| {
        let rate = match i.cmp(&j) {
            std::cmp::Ordering::Greater => right,
            std::cmp::Ordering::Less => left,
            std::cmp::Ordering::Equal => 0.5 * (right + left),
        };
        C64::from_polar(rate, (z[i] - z[j]).abs())
    });
    DecayMatrix { sigma, entries }
}

/// Schur form `K_m = Q T Q†` of one excitation block.
#[derive(Debug, Clone)]
struct SchurBlock {
    q: CMatrix,
    t: CMatrix,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    config: SystemConfig,
    decay: [DecayMatrix; 2],
    /// Collective jump operators in [`PhotonIndex`] order.
    jumps: Vec<CMatrix>,
    k_eff: CMatrix,
    /// Full-space indices of each excitation sector.
    sectors: Vec<Vec<usize>>,
    schur: Vec<SchurBlock>,
    /// `jump_blocks[p][m]` is `B_p` restricted to rows of sector `m` and
    /// columns of sector `m + 1`.
    jump_blocks: Vec<Vec<CMatrix>>,
}

impl Liouvillian {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let n = config.n_atoms();
        let dim = config.dim();
        let decay = [
            decay_matrix(config, Polarization::Plus),
            decay_matrix(config, Polarization::Minus),
        ];

        let mut k_eff = CMatrix::zeros(dim, dim);
        for d in &decay {
            let b: Vec<CMatrix> = (1..=n)
                .map(|i| jump_operator(i, d.sigma, config).map(|b| b.into_matrix()))
                .collect::<Result<_>>()?;
            for (i, bi) in b.iter().enumerate() {
                let bi_dag = bi.adjoint();
                for (j, bj) in b.iter().enumerate() {
                    let g = d.entries[(i, j)];
                    if g.norm() > 0.0 {
                        k_eff += (&bi_dag * bj).map(|x| x * g);
                    }
                }
            }
        }

        let jumps: Vec<CMatrix> = PhotonIndex::ALL
            .iter()
            .map(|p| collective_jump(p.sigma, p.delta, config).into_matrix())
            .collect();

        let mut sectors = vec![Vec::new(); n + 1];
        for idx in 0..dim {
            sectors[excitation_count(idx, n)].push(idx);
        }

        let schur = sectors
            .iter()
            .enumerate()
            .map(|(m, idx)| {
                let block = k_eff.select_rows(idx).select_columns(idx);
                if m == 0 {
                    return Ok(SchurBlock {
                        q: CMatrix::identity(idx.len(), idx.len()),
                        t: block,
                    });
                }
                schur_block(block, m)
            })
            .collect::<Result<Vec<_>>>()?;

        let jump_blocks = jumps
            .iter()
            .map(|b| {
                (0..n)
                    .map(|m| b.select_rows(&sectors[m]).select_columns(&sectors[m + 1]))
                    .collect()
            })
            .collect();

        Ok(Liouvillian {
            config: config.clone(),
            decay,
            jumps,
            k_eff,
            sectors,
            schur,
            jump_blocks,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn decay_matrices(&self) -> &[DecayMatrix; 2] {
        &self.decay
    }

    /// Collective jump operator for one photon index.
    pub fn jump(&self, p: PhotonIndex) -> &CMatrix {
        &self.jumps[p.ordinal()]
    }

    /// `K = Σ γ_ij b_i† b_j`; `D[X] = -K X - X K†`.
    pub fn effective_operator(&self) -> &CMatrix {
        &self.k_eff
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    fn check_dim(&self, x: &CMatrix) -> Result<()> {
        let dim = self.dim();
        if x.nrows() != dim || x.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: x.nrows(),
            });
        }
        Ok(())
    }

    /// Jump part `J[X] = Σ_p B_p X B_p†`.
    pub fn jump_part(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for b in &self.jumps {
            out += b * x * b.adjoint();
        }
        out
    }

    /// `L[X]`, extended linearly to non-Hermitian `X` so that
    /// `L[X†] = L[X]†`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.jump_part(x);
        out -= &self.k_eff * x;
        out -= x * self.k_eff.adjoint();
        out
    }

    /// Dense superoperator acting on column-major `vec(X)`.
    pub fn superoperator(&self) -> CMatrix {
        let d = self.dim();
        let mut s = CMatrix::zeros(d * d, d * d);
        let mut e = CMatrix::zeros(d, d);
        for c in 0..d {
            for r in 0..d {
                e[(r, c)] = C64::new(1.0, 0.0);
                let col = self.apply_unchecked(&e);
                e[(r, c)] = C64::new(0.0, 0.0);
                for (k, v) in col.iter().enumerate() {
                    s[(k, r + c * d)] = *v;
                }
            }
        }
        s
    }

    fn block(&self, x: &CMatrix, m: usize, n: usize) -> CMatrix {
        x.select_rows(&self.sectors[m]).select_columns(&self.sectors[n])
    }

    fn set_block(&self, x: &mut CMatrix, m: usize, n: usize, block: &CMatrix) {
        for (bi, &r) in self.sectors[m].iter().enumerate() {
            for (bj, &c) in self.sectors[n].iter().enumerate() {
                x[(r, c)] = block[(bi, bj)];
            }
        }
    }

    /// `J` restricted to sector `(m, n) -> (m - 1, n - 1)`.
    fn jump_down(&self, m: usize, n: usize, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.sectors[m - 1].len(), self.sectors[n - 1].len());
        for blocks in &self.jump_blocks {
            out += &blocks[m - 1] * y * blocks[n - 1].adjoint();
        }
        out
    }

    /// Solves `D X = Y` inside sector `(m, n)`, i.e. `K_m X + X K_n† = -Y`.
    fn solve_sector(&self, m: usize, n: usize, y: &CMatrix) -> Result<CMatrix> {
        let left = &self.schur[m];
        let right = &self.schur[n];
        let rhs = -(left.q.adjoint() * y * &right.q);
        let scale = max_abs(y).max(1.0);
        let rows = rhs.nrows();
        let cols = rhs.ncols();
        let mut x = CMatrix::zeros(rows, cols);
        // T_m X' + X' T_n† = C'. Column j couples to columns k > j through
        // conj(T_n[j, k]); each column is an upper-triangular solve.
        for j in (0..cols).rev() {
            let mut col: DVector<C64> = rhs.column(j).into_owned();
            for k in j + 1..cols {
                let coeff = right.t[(j, k)].conj();
                if coeff.norm() > 0.0 {
                    col -= x.column(k) * coeff;
                }
            }
            let shift = right.t[(j, j)].conj();
            for i in (0..rows).rev() {
                let mut acc = col[i];
                for l in i + 1..rows {
                    acc -= left.t[(i, l)] * x[(l, j)];
                }
                let den = left.t[(i, i)] + shift;
                if den.norm() < SINGULAR_TOL {
                    if acc.norm() > 1e-9 * scale {
                        return Err(Error::Numerical(format!(
                            "sector ({m},{n}) has a non-decaying mode that carries weight {:.3e}; \
                             population is trapped in a dark excited state for {:?}",
                            acc.norm(),
                            self.config
                        )));
                    }
                    x[(i, j)] = C64::new(0.0, 0.0);
                } else {
                    x[(i, j)] = acc / den;
                }
            }
        }
        Ok(&left.q * x * right.q.adjoint())
    }

    /// `M∞[X]` by the sector cascade `Σ_m (-J D⁻¹)^m P_(m,m) X`. Accepts any
    /// operator; the result is supported on the ground manifold.
    pub fn asymptotic_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x)?;
        let n = self.config.n_atoms();
        let mut carry: Option<CMatrix> = None;
        for m in (1..=n).rev() {
            let mut z = self.block(x, m, m);
            if let Some(c) = carry.take() {
                z += c;
            }
            if max_abs(&z) == 0.0 {
                continue;
            }
            let w = self.solve_sector(m, m, &z)?;
            carry = Some(-self.jump_down(m, m, &w));
        }
        let mut ground = self.block(x, 0, 0);
        if let Some(c) = carry {
            ground += c;
        }
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.set_block(&mut out, 0, 0, &ground);
        Ok(out)
    }

    /// Final state `M∞[ρ0]` on the full space.
    pub fn asymptotic_state(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        let out = hermitize(&self.asymptotic_operator(rho0.matrix())?);
        DensityMatrix::with_tolerance(out, Space::Full, 1e-9)
    }

    /// Drazin inverse: `Y` with `L[Y] = X - P0[X]` and `P0[Y] = 0`.
    pub fn drazin_apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_dim(x)?;
        let n = self.config.n_atoms();
        let mut blocks: Vec<Vec<Option<CMatrix>>> = vec![vec![None; n + 1]; n + 1];
        for total in (1..=2 * n).rev() {
            for m in total.saturating_sub(n)..=total.min(n) {
                let k = total - m;
                let mut rhs = self.block(x, m, k);
                if m < n && k < n {
                    if let Some(above) = &blocks[m + 1][k + 1] {
                        rhs -= self.jump_down(m + 1, k + 1, above);
                    }
                }
                if max_abs(&rhs) == 0.0 {
                    continue;
                }
                blocks[m][k] = Some(self.solve_sector(m, k, &rhs)?);
            }
        }
        let mut y = CMatrix::zeros(self.dim(), self.dim());
        for (m, row) in blocks.iter().enumerate() {
            for (k, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    self.set_block(&mut y, m, k, b);
                }
            }
        }
        // Fix the kernel component so that P0[Y] = 0.
        let kernel = self.asymptotic_operator(&y)?;
        y -= kernel;

        let target = x - self.asymptotic_operator(x)?;
        let residual = max_abs(&(self.apply_unchecked(&y) - target));
        let scale = max_abs(x).max(1.0);
        if residual > DRAZIN_RESIDUAL_TOL * scale {
            return Err(Error::Numerical(format!(
                "Drazin residual {residual:.3e} exceeds {DRAZIN_RESIDUAL_TOL:e}"
            )));
        }
        Ok(y)
    }

    /// `M_t[ρ0] = exp(L t)[ρ0]` by adaptive Dormand–Prince integration.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        let out = self.evolve_operator(rho0.matrix(), t, Tolerances::default())?;
        DensityMatrix::with_tolerance(hermitize(&out), Space::Full, 1e-9)
    }

    /// Integrates `dX/dt = L[X]` for any operator.
    pub fn evolve_operator(&self, x0: &CMatrix, t: f64, tol: Tolerances) -> Result<CMatrix> {
        self.check_dim(x0)?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Config(format!(
                "evolution time must be finite and >= 0, got {t}"
            )));
        }
        let d = self.dim();
        let y0 = DVector::from_column_slice(x0.as_slice());
        let y = integrate::dopri5(
            |_, y: &DVector<C64>| {
                let x = CMatrix::from_column_slice(d, d, y.as_slice());
                DVector::from_column_slice(self.apply_unchecked(&x).as_slice())
            },
            y0,
            0.0,
            t,
            tol,
        )?;
        Ok(CMatrix::from_column_slice(d, d, y.as_slice()))
    }
}

fn schur_block(block: CMatrix, m: usize) -> Result<SchurBlock> {
    let size = block.nrows();
    let norm = max_abs(&block).max(1.0);
    let schur = Schur::try_new(block, SCHUR_EPS, 100_000)
        .ok_or_else(|| Error::Numerical(format!("Schur decomposition of sector {m} did not converge")))?;
    let (q, t) = schur.unpack();
    for i in 0..size {
        for j in 0..i {
            if t[(i, j)].norm() > 1e-10 * norm {
                return Err(Error::Numerical(format!("Schur form of sector {m} is not triangular")));
            }
        }
    }
    let t = t.upper_triangle();
    Ok(SchurBlock { q, t })
}

/// Convenience: final ground state of an initial product ket.
pub fn final_ground_state(config: &SystemConfig, initial: &crate::state::KetString) -> Result<DensityMatrix> {
    let l = Liouvillian::new(config)?;
    let rho0 = initial.density_matrix(config)?;
    let rho = l.asymptotic_state(&rho0)?;
    crate::state::restrict_to_ground(&rho)
}
