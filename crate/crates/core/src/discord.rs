//! Quantum discord with measurements on the second subsystem, its
//! einselected relative-entropy form and the superdense-coding capacity gap.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::channels::{EinselectionSpec, Pointer, QuantumChannel};
use crate::error::{Error, Result};
use crate::infotheory::{coding_capacity, entropy_bits, rel_entropy, vn_entropy, ExtendedReal};
use crate::linalg::{c, eigh, ket, max_abs, unitarity_defect, CMatrix, CVector, DensityMatrix, PureState, Tolerances, C64};
use crate::optim::{multistart, NelderMeadOptions};
use crate::random::{derive_seed, random_hermitian, random_mixed, rng};

/// Rank-one orthogonal projective measurement, stored as its unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<CVector>,
}

impl MeasurementBasis {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::BadBasis(f64::INFINITY));
        }
        let m = CMatrix::from_fn(d, d, |r, col| vectors[col][r]);
        let defect = unitarity_defect(&m);
        if defect > 1e-10 {
            return Err(Error::BadBasis(defect));
        }
        Ok(MeasurementBasis { vectors })
    }

    pub fn computational(d: usize) -> Self {
        MeasurementBasis { vectors: (0..d).map(|i| ket(d, i)).collect() }
    }

    /// Columns of a unitary.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        Self::new((0..u.ncols()).map(|j| u.column(j).into_owned()).collect())
    }

    /// Qubit basis `{|n>, |-n>}` with `|n> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, phi);
        let up = CVector::from_vec(vec![c(co, 0.0), e * s]);
        let down = CVector::from_vec(vec![-e.conj() * s, c(co, 0.0)]);
        MeasurementBasis { vectors: vec![up, down] }
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn to_einselection(&self, dims: &[usize], measured: usize) -> Result<EinselectionSpec> {
        let parts = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k == measured { Pointer::Basis(self.vectors.clone()) } else { Pointer::Identity(d) })
            .collect();
        EinselectionSpec::new(parts)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscordDiagnostics {
    pub restarts: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Set for searches without a global guarantee.
    pub heuristic: bool,
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    pub value: f64,
    pub basis: MeasurementBasis,
    pub diagnostics: DiscordDiagnostics,
}

#[derive(Debug, Clone, Copy)]
pub struct DiscordOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Permit the random-unitary multistart when the measured side is not a qubit.
    pub heuristic: bool,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        DiscordOptions { restarts: 8, seed: 0, heuristic: false }
    }
}

fn bipartite(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::DimensionMismatch(format!("expected a bipartite state, got dims {other:?}"))),
    }
}

/// `Σ p_k S(ρ_k^A)` after measuring B in `basis`.
pub fn measured_conditional_entropy(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<f64> {
    let (da, db) = bipartite(rho)?;
    if basis.dim() != db {
        return Err(Error::DimensionMismatch(format!("basis of dimension {} for subsystem of dimension {db}", basis.dim())));
    }
    Ok(conditional_entropy_unchecked(rho.matrix(), da, db, basis.vectors()))
}

fn conditional_entropy_unchecked(m: &CMatrix, da: usize, db: usize, vectors: &[CVector]) -> f64 {
    let tol = Tolerances::default().supp;
    let mut acc = 0.0;
    for b in vectors {
        let block = CMatrix::from_fn(da, da, |i, j| {
            let mut z = C64::new(0.0, 0.0);
            for x in 0..db {
                for y in 0..db {
                    z += b[x].conj() * m[(i * db + x, j * db + y)] * b[y];
                }
            }
            z
        });
        let p = block.diagonal().iter().map(|z| z.re).sum::<f64>();
        if p <= tol {
            continue;
        }
        let spec: Vec<f64> = eigh(&block).values.iter().map(|l| (l / p).max(0.0)).collect();
        acc += p * entropy_bits(&spec);
    }
    acc
}

/// `S_c - S(A|B)` for a fixed measurement on B.
pub fn discord_zurek(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<f64> {
    let sc = measured_conditional_entropy(rho, basis)?;
    Ok(sc - unmeasured_conditional(rho)?)
}

fn unmeasured_conditional(rho: &DensityMatrix) -> Result<f64> {
    Ok(vn_entropy(rho) - vn_entropy(&rho.partial_trace(&[1])?))
}

const GRID_THETA: usize = 16;
const GRID_PHI: usize = 32;

fn bloch_grid(n_theta: usize, n_phi: usize) -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        for j in 0..n_phi {
            g.push((PI * i as f64 / (n_theta - 1) as f64, TAU * j as f64 / n_phi as f64));
        }
    }
    g
}

/// Minimizes `objective(θ, φ)` over qubit bases: full grid, then Nelder-Mead
/// from the best grid points. Returns `(value, θ, φ, evaluations, converged)`.
fn minimize_over_bloch(objective: &(dyn Fn(f64, f64) -> f64 + Sync), starts: usize) -> (f64, f64, f64, usize, bool) {
    let grid = bloch_grid(GRID_THETA, GRID_PHI);
    let mut scored: Vec<(f64, usize)> = grid.iter().enumerate().map(|(i, &(t, p))| (objective(t, p), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let seeds: Vec<Vec<f64>> = scored.iter().take(starts).map(|&(_, i)| vec![grid[i].0, grid[i].1]).collect();
    let opts = NelderMeadOptions { initial_step: 0.2, f_tol: 1e-13, x_tol: 1e-9, ..Default::default() };
    let (best, runs) = multistart(|x: &[f64]| objective(x[0], x[1]), &seeds, &opts);
    let evals = grid.len() + runs.iter().map(|r| r.evals).sum::<usize>();
    let (g_val, g_idx) = scored[0];
    if g_val < best.value {
        (g_val, grid[g_idx].0, grid[g_idx].1, evals, best.converged)
    } else {
        (best.value, best.x[0], best.x[1], evals, best.converged)
    }
}

fn unitary_from_params(x: &[f64], d: usize) -> CMatrix {
    let h = CMatrix::from_fn(d, d, |r, col| {
        if r == col {
            c(x[r * d + r], 0.0)
        } else if r < col {
            c(x[r * d + col], x[col * d + r])
        } else {
            c(x[col * d + r], -x[r * d + col])
        }
    });
    let e = eigh(&h);
    let mut out = CMatrix::zeros(d, d);
    for (j, &l) in e.values.iter().enumerate() {
        let v = e.vectors.column(j);
        out += (v * v.adjoint()) * C64::from_polar(1.0, l);
    }
    out
}

/// Minimum of `discord_zurek` over rank-one projective measurements on B.
pub fn discord(rho: &DensityMatrix, opts: &DiscordOptions) -> Result<DiscordResult> {
    let (da, db) = bipartite(rho)?;
    let base = unmeasured_conditional(rho)?;
    let m = rho.matrix();
    if db == 2 {
        let objective = |t: f64, p: f64| conditional_entropy_unchecked(m, da, db, MeasurementBasis::bloch(t, p).vectors()) - base;
        let starts = opts.restarts.max(8);
        let (value, t, p, evaluations, converged) = minimize_over_bloch(&objective, starts);
        return Ok(DiscordResult {
            value,
            basis: MeasurementBasis::bloch(t, p),
            diagnostics: DiscordDiagnostics { restarts: starts, evaluations, converged, heuristic: false },
        });
    }
    if !opts.heuristic {
        return Err(Error::Unsupported(format!(
            "discord with a measured side of dimension {db} needs the heuristic flag"
        )));
    }
    let restarts = opts.restarts.max(1);
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|i| {
            let mut r = rng(derive_seed(opts.seed, i as u64));
            let h = random_hermitian(&mut r, db);
            let mut x = vec![0.0; db * db];
            for a in 0..db {
                for b in 0..db {
                    x[a * db + b] = if a <= b { h[(a, b)].re } else { h[(b, a)].im };
                }
            }
            x
        })
        .collect();
    let objective = |x: &[f64]| {
        let u = unitary_from_params(x, db);
        let vs: Vec<CVector> = (0..db).map(|j| u.column(j).into_owned()).collect();
        conditional_entropy_unchecked(m, da, db, &vs) - base
    };
    let nm = NelderMeadOptions { initial_step: 0.3, ..Default::default() };
    let (best, runs) = multistart(objective, &starts, &nm);
    let basis = MeasurementBasis::from_unitary(&unitary_from_params(&best.x, db))?;
    Ok(DiscordResult {
        value: best.value,
        basis,
        diagnostics: DiscordDiagnostics {
            restarts,
            evaluations: runs.iter().map(|r| r.evals).sum(),
            converged: best.converged,
            heuristic: true,
        },
    })
}

/// `S(ρ ‖ Γ(ρ))`.
pub fn einselected_discord(rho: &DensityMatrix, gamma: &EinselectionSpec) -> Result<ExtendedReal> {
    rel_entropy(rho, &gamma.apply(rho)?)
}

/// Largest deviation of `S∘Γ` from `Γ∘S` over `d²` random probe states.
pub fn commutation_defect(ch: &QuantumChannel, gamma: &EinselectionSpec, seed: u64) -> Result<f64> {
    let dims = gamma.dims();
    if ch.dims_in() != dims.as_slice() || ch.dims_out() != dims.as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}→{:?} vs einselection over {dims:?}",
            ch.dims_in(),
            ch.dims_out()
        )));
    }
    let d: usize = dims.iter().product();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..d * d {
        let probe = random_mixed(&mut r, &dims);
        let a = ch.apply_matrix(&gamma.apply_matrix(probe.matrix()));
        let b = gamma.apply_matrix(&ch.apply_matrix(probe.matrix()));
        worst = worst.max(max_abs(&(a - b)));
    }
    Ok(worst)
}

const PROBE_SEED: u64 = 0x5eed_0f_9e0be5;

/// `F(S(ρ)) - F(S∘Γ(ρ))` with `F` the coding capacity from A to B; `ρ`
/// defaults to the maximally entangled state.
pub fn capacity_gap(ch: &QuantumChannel, gamma: &EinselectionSpec, rho: Option<&DensityMatrix>) -> Result<f64> {
    let defect = commutation_defect(ch, gamma, PROBE_SEED)?;
    if defect > 1e-8 {
        return Err(Error::NonCommuting(defect));
    }
    let default;
    let rho = match rho {
        Some(r) => r,
        None => {
            let dims = gamma.dims();
            if dims.len() != 2 || dims[0] != dims[1] {
                return Err(Error::DimensionMismatch("default maximally entangled state needs equal dims".into()));
            }
            default = PureState::maximally_entangled(dims[0]).density();
            &default
        }
    };
    let fq = coding_capacity(&ch.apply(rho)?, &[0])?;
    let fc = coding_capacity(&ch.apply(&gamma.apply(rho)?)?, &[0])?;
    Ok(fq - fc)
}

/// `F(S(Φ)) - sup_Γ F(S∘Γ(Φ))` over one-sided qubit pointer bases on B.
pub fn discord_via_capacity(ch: &QuantumChannel, restarts: usize) -> Result<f64> {
    let dims = ch.dims_in().to_vec();
    if dims != [2, 2] || ch.dims_out() != [2, 2] {
        return Err(Error::Unsupported("capacity route is implemented for two-qubit channels".into()));
    }
    let phi = PureState::maximally_entangled(2).density();
    let fq = coding_capacity(&ch.apply(&phi)?, &[0])?;
    let objective = |t: f64, p: f64| -> f64 {
        let gamma = MeasurementBasis::bloch(t, p).to_einselection(&dims, 1).expect("Bloch bases are orthonormal");
        let out = ch.apply_matrix(&gamma.apply_matrix(phi.matrix()));
        let st = DensityMatrix::raw_hermitized(out, dims.clone());
        -coding_capacity(&st, &[0]).unwrap_or(f64::NEG_INFINITY)
    };
    let (neg_fc, ..) = minimize_over_bloch(&objective, restarts.max(8));
    Ok(fq + neg_fc)
}

/// Random classical-quantum state `Σ p_k ρ_k^A ⊗ |k><k|`.
pub fn random_classical_quantum<R: Rng + ?Sized>(rng: &mut R, da: usize, db: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(da * db, da * db);
    let weights: Vec<f64> = (0..db).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for (k, w) in weights.iter().enumerate() {
        let a = random_mixed(rng, &[da]);
        let pk = crate::linalg::ketbra(db, k, k);
        m += crate::linalg::tensor(a.matrix(), &pk) * c(w / total, 0.0);
    }
    DensityMatrix::raw_hermitized(m, vec![da, db])
}
