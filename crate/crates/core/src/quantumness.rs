//! Quantumness of an operation: how far a channel fails to commute with the
//! einselection map, maximized over input states, and its split into
//! distinguishing and generating power.

use rand::SeedableRng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::Serialize;

use crate::channels::{depolarizing, EinselectionSpec, Pointer, QuantumChannel};
use crate::error::{Error, Result};
use crate::infotheory::{rel_entropy_tol, ExtendedReal};
use crate::linalg::{eigh, tensor, CMatrix, CVector, DensityMatrix, PureState, Tolerances, C64};
use crate::optim::{multistart, NelderMeadOptions};
use crate::random::{derive_seed, SeededRng};

/// Kernel weight above which a divergence is treated as genuine rather
/// than a conditioning artifact.
pub const DIVERGENCE_MARGIN: f64 = 1e-6;

fn check_dims(ch: &QuantumChannel, gamma: &EinselectionSpec) -> Result<()> {
    let g = gamma.dims();
    if ch.dims_in() != g.as_slice() || ch.dims_out() != g.as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?} -> {:?} against einselection over {:?}",
            ch.dims_in(),
            ch.dims_out(),
            g
        )));
    }
    Ok(())
}

/// `S(S∘Γ(ρ) ‖ Γ∘S(ρ))`.
pub fn noncommutativity(ch: &QuantumChannel, gamma: &EinselectionSpec, rho: &DensityMatrix) -> Result<ExtendedReal> {
    noncommutativity_tol(ch, gamma, rho, Tolerances::default().supp)
}

pub fn noncommutativity_tol(
    ch: &QuantumChannel,
    gamma: &EinselectionSpec,
    rho: &DensityMatrix,
    tol_supp: f64,
) -> Result<ExtendedReal> {
    check_dims(ch, gamma)?;
    let a = ch.apply(&gamma.apply(rho)?)?;
    let b = gamma.apply(&ch.apply(rho)?)?;
    rel_entropy_tol(&a, &b, tol_supp)
}

/// The two parts of the noncommutativity at one input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    /// `S(Γ∘S∘Γ(ρ) ‖ Γ∘S(ρ))`
    pub distinguishing: ExtendedReal,
    /// `S(S∘Γ(ρ) ‖ Γ∘S∘Γ(ρ))`, at most `log₂ d`.
    pub generating: f64,
}

impl Decomposition {
    pub fn total(&self) -> ExtendedReal {
        self.distinguishing + ExtendedReal::Finite(self.generating)
    }
}

pub fn decompose(ch: &QuantumChannel, gamma: &EinselectionSpec, rho: &DensityMatrix) -> Result<Decomposition> {
    decompose_tol(ch, gamma, rho, Tolerances::default().supp)
}

pub fn decompose_tol(
    ch: &QuantumChannel,
    gamma: &EinselectionSpec,
    rho: &DensityMatrix,
    tol_supp: f64,
) -> Result<Decomposition> {
    check_dims(ch, gamma)?;
    let s_g = ch.apply(&gamma.apply(rho)?)?;
    let g_s_g = gamma.apply(&s_g)?;
    let g_s = gamma.apply(&ch.apply(rho)?)?;
    let distinguishing = rel_entropy_tol(&g_s_g, &g_s, tol_supp)?;
    // Γ∘S∘Γ(ρ) is the dephased version of S∘Γ(ρ), whose support it contains
    let generating = rel_entropy_tol(&s_g, &g_s_g, tol_supp)?.finite().unwrap_or(f64::INFINITY);
    Ok(Decomposition { distinguishing, generating })
}

#[derive(Debug, Clone, Copy)]
pub struct QuantumnessOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tol_supp: f64,
    pub nm: NelderMeadOptions,
}

impl Default for QuantumnessOptions {
    fn default() -> Self {
        QuantumnessOptions {
            restarts: 32,
            seed: 0,
            tol_supp: Tolerances::default().supp,
            nm: NelderMeadOptions { max_evals: 8_000, f_tol: 1e-12, x_tol: 1e-10, initial_step: 0.5, rebuilds: 1 },
        }
    }
}

/// Why an infinite value was declared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfiniteTrigger {
    /// An input exists whose dephased output has a pointer state in the
    /// kernel of `Γ∘S(ψ)`; found by exact linear algebra.
    ExactKernel { overlap: f64 },
    /// The optimizer reached an input with this kernel weight.
    KernelOverlap { overlap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumnessDiagnostics {
    pub restarts: usize,
    pub evaluations: usize,
    pub converged_runs: usize,
    pub infinite_trigger: Option<InfiniteTrigger>,
    /// A divergence was seen only below the robustness margin.
    pub near_singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumnessResult {
    pub value: ExtendedReal,
    #[serde(skip)]
    pub maximizer: PureState,
    pub decomposition: Decomposition,
    pub diagnostics: QuantumnessDiagnostics,
}

/// Columns are the product pointer basis, or `None` if some subsystem is
/// left unmeasured.
pub fn pointer_basis(gamma: &EinselectionSpec) -> Option<CMatrix> {
    let mut out = CMatrix::identity(1, 1);
    for p in gamma.parts() {
        match p {
            Pointer::Basis(b) => {
                let d = b.len();
                out = tensor(&out, &CMatrix::from_fn(d, d, |r, c| b[c][r]));
            }
            Pointer::Identity(_) => return None,
        }
    }
    Some(out)
}

/// `Tr[P_ker(σ) ρ]` with the kernel taken below `tol`.
fn kernel_overlap(rho: &DensityMatrix, sigma: &DensityMatrix, tol: f64) -> f64 {
    let s = sigma.eigh();
    let mut w = 0.0;
    for (j, &v) in s.values.iter().enumerate() {
        if v <= tol {
            let col = s.vectors.column(j);
            w += (col.adjoint() * rho.matrix() * col)[(0, 0)].re;
        }
    }
    w
}

/// Looks for an input that makes the noncommutativity diverge, assuming
/// rank-one pointer projectors. In the pointer frame, `⟨i|S(ψ)|i⟩ = 0`
/// exactly when `ψ` is orthogonal to every `K_k†|i⟩`, and then
/// `⟨i|S(Γψ)|i⟩ = Σ_j |ψ_j|² Σ_k |K_k[i,j]|²`.
fn exact_divergence(ch: &QuantumChannel, basis: &CMatrix, tol: f64) -> Option<(CVector, f64)> {
    let d = basis.nrows();
    let rotated: Vec<CMatrix> = ch.kraus().iter().map(|k| basis.adjoint() * k * basis).collect();
    let mut best: Option<(CVector, f64)> = None;
    for i in 0..d {
        let rows = CMatrix::from_fn(rotated.len(), d, |k, j| rotated[k][(i, j)]);
        let gram = rows.adjoint() * &rows;
        let e = eigh(&gram);
        let scale = e.values.first().copied().unwrap_or(0.0).max(1.0);
        let null: Vec<usize> = (0..d).filter(|&c| e.values[c] <= 1e-12 * scale).collect();
        if null.is_empty() {
            continue;
        }
        let nb = CMatrix::from_fn(d, null.len(), |r, c| e.vectors[(r, null[c])]);
        let proj = &nb * nb.adjoint();
        for j in 0..d {
            let q: f64 = rotated.iter().map(|k| k[(i, j)].norm_sqr()).sum();
            let pjj = proj[(j, j)].re;
            if q > tol && pjj > tol {
                // ψ' = P_N e_j, whose output weight on pointer i is Σ_j' |ψ'_j'|² q_ij'
                let v = proj.column(j) / C64::new(pjj.sqrt(), 0.0);
                let weight: f64 = (0..d)
                    .map(|jj| v[jj].norm_sqr() * rotated.iter().map(|k| k[(i, jj)].norm_sqr()).sum::<f64>())
                    .sum();
                if best.as_ref().is_none_or(|(_, w)| weight > *w) {
                    best = Some((basis * v, weight));
                }
            }
        }
    }
    best
}

fn state_from_params(x: &[f64], dims: &[usize]) -> Option<PureState> {
    let d = x.len() / 2;
    let v = CVector::from_fn(d, |i, _| C64::new(x[i], x[d + i]));
    if v.norm() < 1e-12 {
        return None;
    }
    PureState::normalized(v, dims.to_vec()).ok()
}

/// `W(S) = sup_ψ S(S∘Γ(ψ) ‖ Γ∘S(ψ))` over pure inputs.
pub fn quantumness(ch: &QuantumChannel, gamma: &EinselectionSpec, opts: &QuantumnessOptions) -> Result<QuantumnessResult> {
    check_dims(ch, gamma)?;
    if opts.restarts == 0 {
        return Err(Error::Parameter("need at least one restart".into()));
    }
    let dims = gamma.dims();
    let d = ch.d_in();
    let tol = opts.tol_supp;

    if let Some(basis) = pointer_basis(gamma) {
        if let Some((v, weight)) = exact_divergence(ch, &basis, tol) {
            if weight > DIVERGENCE_MARGIN {
                let psi = PureState::normalized(v, dims.clone())?;
                let rho = psi.density();
                let decomposition = decompose_tol(ch, gamma, &rho, tol)?;
                return Ok(QuantumnessResult {
                    value: ExtendedReal::Infinite,
                    maximizer: psi,
                    decomposition,
                    diagnostics: QuantumnessDiagnostics {
                        restarts: 0,
                        evaluations: 0,
                        converged_runs: 0,
                        infinite_trigger: Some(InfiniteTrigger::ExactKernel { overlap: weight }),
                        near_singular: false,
                    },
                });
            }
        }
    }

    const CAP: f64 = 1e6;
    let objective = |x: &[f64]| -> f64 {
        let Some(psi) = state_from_params(x, &dims) else { return 0.0 };
        match noncommutativity_tol(ch, gamma, &psi.density(), tol) {
            Ok(ExtendedReal::Finite(v)) => -v,
            Ok(ExtendedReal::Infinite) => -CAP,
            Err(_) => 0.0,
        }
    };
    let starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|i| {
            let mut r = SeededRng::seed_from_u64(derive_seed(opts.seed, i as u64));
            (0..2 * d).map(|_| StandardNormal.sample(&mut r)).collect()
        })
        .collect();
    let (best, runs) = multistart(objective, &starts, &opts.nm);
    let psi = state_from_params(&best.x, &dims).ok_or_else(|| Error::Parameter("optimizer collapsed to zero".into()))?;
    let rho = psi.density();
    let mut value = noncommutativity_tol(ch, gamma, &rho, tol)?;
    let mut trigger = None;
    let mut near_singular = false;
    if value.is_infinite() {
        let a = ch.apply(&gamma.apply(&rho)?)?;
        let b = gamma.apply(&ch.apply(&rho)?)?;
        let overlap = kernel_overlap(&a, &b, tol);
        if overlap > DIVERGENCE_MARGIN {
            trigger = Some(InfiniteTrigger::KernelOverlap { overlap });
        } else {
            near_singular = true;
            value = rel_entropy_tol(&a, &b, 0.0)?;
        }
    }
    let decomposition = decompose_tol(ch, gamma, &rho, tol)?;
    Ok(QuantumnessResult {
        value,
        maximizer: psi,
        decomposition,
        diagnostics: QuantumnessDiagnostics {
            restarts: opts.restarts,
            evaluations: runs.iter().map(|r| r.evals).sum(),
            converged_runs: runs.iter().filter(|r| r.converged).count(),
            infinite_trigger: trigger,
            near_singular,
        },
    })
}

/// `W(S∘Γ)`: the most coherence `S` can create from pointer states.
pub fn generating_power(ch: &QuantumChannel, gamma: &EinselectionSpec, opts: &QuantumnessOptions) -> Result<f64> {
    check_dims(ch, gamma)?;
    let composed = gamma.channel().then(ch)?;
    let r = quantumness(&composed, gamma, opts)?;
    Ok(r.value.finite().unwrap_or(f64::INFINITY))
}

/// `W(Γ∘S)`: how well `S` maps coherent inputs to distinguishable pointers.
pub fn distinguishing_power(
    ch: &QuantumChannel,
    gamma: &EinselectionSpec,
    opts: &QuantumnessOptions,
) -> Result<ExtendedReal> {
    check_dims(ch, gamma)?;
    let composed = ch.then(&gamma.channel())?;
    Ok(quantumness(&composed, gamma, opts)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryClass {
    Classical,
    Nonclassical,
}

/// Classical iff `U` permutes the pointer basis up to phases.
pub fn classify_unitary(u: &CMatrix, gamma: &EinselectionSpec) -> Result<UnitaryClass> {
    let defect = crate::linalg::unitarity_defect(u);
    if defect > 1e-9 {
        return Err(Error::NotUnitary(defect));
    }
    let basis = pointer_basis(gamma)
        .ok_or_else(|| Error::Parameter("classification needs a pointer basis on every subsystem".into()))?;
    if basis.nrows() != u.nrows() {
        return Err(Error::DimensionMismatch(format!("unitary of size {} against basis of {}", u.nrows(), basis.nrows())));
    }
    let v = basis.adjoint() * u * &basis;
    let classical = (0..v.ncols()).all(|c| {
        let unit = (0..v.nrows()).filter(|&r| (v[(r, c)].norm() - 1.0).abs() <= 1e-9).count();
        unit == 1
    });
    Ok(if classical { UnitaryClass::Classical } else { UnitaryClass::Nonclassical })
}

/// `W(Λ_μ∘S₁)/W(Λ_μ∘S₂)` along a grid of depolarizing strengths, with a
/// straight-line extrapolation in `1 − μ` to the noiseless limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSequence {
    pub mu: Vec<f64>,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub ratio: Vec<f64>,
    pub extrapolated: f64,
    /// Root-mean-square residual of the linear fit.
    pub residual: f64,
}

pub fn regularized_ratio(
    s1: &QuantumChannel,
    s2: &QuantumChannel,
    gamma: &EinselectionSpec,
    mu_grid: &[f64],
    opts: &QuantumnessOptions,
) -> Result<RatioSequence> {
    if mu_grid.len() < 2 {
        return Err(Error::Parameter("the extrapolation needs at least two grid points".into()));
    }
    let mut out = RatioSequence {
        mu: mu_grid.to_vec(),
        numerator: vec![],
        denominator: vec![],
        ratio: vec![],
        extrapolated: 0.0,
        residual: 0.0,
    };
    for &mu in mu_grid {
        let lam = depolarizing(mu, gamma.dims())?;
        let w = |s: &QuantumChannel| -> Result<f64> {
            let r = quantumness(&s.then(&lam)?, gamma, opts)?;
            r.value
                .finite()
                .ok_or_else(|| Error::Parameter(format!("W is infinite at mu = {mu}; use mu < 1")))
        };
        let (a, b) = (w(s1)?, w(s2)?);
        if b.abs() < 1e-12 {
            return Err(Error::Parameter(format!("denominator W = {b:e} vanishes at mu = {mu}")));
        }
        out.numerator.push(a);
        out.denominator.push(b);
        out.ratio.push(a / b);
    }
    // least squares ratio ≈ c0 + c1 (1 − μ)
    let n = mu_grid.len() as f64;
    let xs: Vec<f64> = mu_grid.iter().map(|m| 1.0 - m).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, out.ratio.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&out.ratio).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    out.extrapolated = my - slope * mx;
    out.residual = (xs.iter().zip(&out.ratio).map(|(x, y)| (y - out.extrapolated - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(out)
}

/// Generating and distinguishing power of one channel in a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub mu: f64,
    pub generating: f64,
    pub distinguishing: ExtendedReal,
}

impl PowerPoint {
    /// `distinguishing − generating`; `+∞` when distinguishing diverges.
    pub fn difference(&self) -> f64 {
        self.distinguishing.to_f64() - self.generating
    }
}

/// Both powers of `family(μ)` at every grid point.
pub fn power_scan(
    family: impl Fn(f64) -> Result<QuantumChannel>,
    gamma: &EinselectionSpec,
    mu_grid: &[f64],
    opts: &QuantumnessOptions,
) -> Result<Vec<PowerPoint>> {
    mu_grid
        .iter()
        .map(|&mu| {
            let ch = family(mu)?;
            Ok(PowerPoint {
                mu,
                generating: generating_power(&ch, gamma, opts)?,
                distinguishing: distinguishing_power(&ch, gamma, opts)?,
            })
        })
        .collect()
}

/// First sign change of `distinguishing − generating` along a scan, located
/// by linear interpolation between the bracketing grid points.
pub fn power_crossing(points: &[PowerPoint]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].difference(), w[1].difference());
        if a == 0.0 {
            return Some(w[0].mu);
        }
        if a.signum() == b.signum() || !a.is_finite() || !b.is_finite() {
            return None;
        }
        Some(w[0].mu + (w[1].mu - w[0].mu) * a / (a - b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, cnot_pm, hadamard, streltsov_map};
    use crate::linalg::{c, pauli_x};
    use crate::random::{random_channel, random_density, rng};

    fn comp(d: usize) -> EinselectionSpec {
        EinselectionSpec::computational(&[d])
    }

    fn quick() -> QuantumnessOptions {
        QuantumnessOptions { restarts: 12, ..Default::default() }
    }

    #[test]
    fn hadamard_diverges_at_plus_minus() {
        let h = QuantumChannel::unitary(hadamard(), vec![2]).unwrap();
        let plus = DensityMatrix::from_pure(&PureState::from_slice(&[c(0.5f64.sqrt(), 0.0); 2], vec![2]).unwrap());
        assert!(noncommutativity(&h, &comp(2), &plus).unwrap().is_infinite());
        let r = quantumness(&h, &comp(2), &quick()).unwrap();
        assert!(r.value.is_infinite());
        let a = r.maximizer.amplitudes();
        let overlap = ((a[0] + a[1]).norm_sqr() / 2.0).max((a[0] - a[1]).norm_sqr() / 2.0);
        assert!(overlap > 0.99, "{overlap}");
    }

    #[test]
    fn classical_unitaries_and_damping_vanish() {
        let x = QuantumChannel::unitary(pauli_x(), vec![2]).unwrap();
        assert!(quantumness(&x, &comp(2), &quick()).unwrap().value.to_f64().abs() < 1e-9);
        let ad = amplitude_damping(0.4).unwrap();
        assert!(quantumness(&ad, &comp(2), &quick()).unwrap().value.to_f64().abs() < 1e-9);
        assert!(generating_power(&ad, &comp(2), &quick()).unwrap().abs() < 1e-9);
        assert!(distinguishing_power(&ad, &comp(2), &quick()).unwrap().to_f64().abs() < 1e-9);
    }

    #[test]
    fn streltsov_map_has_unit_quantumness() {
        let g = EinselectionSpec::computational(&[2, 2]);
        let ch = streltsov_map();
        let one = DensityMatrix::from_pure(&PureState::basis(vec![2, 2], 3));
        let v = noncommutativity(&ch, &g, &one).unwrap().to_f64();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let r = quantumness(&ch, &g, &QuantumnessOptions::default()).unwrap();
        assert!((r.value.to_f64() - 1.0).abs() < 1e-6, "{:?}", r.value);
    }

    #[test]
    fn decomposition_adds_up() {
        let mut r = rng(3);
        let g = comp(3);
        for _ in 0..50 {
            let ch = random_channel(&mut r, 3, 3, 2);
            let rho = random_density(&mut r, &[3], 2);
            let total = noncommutativity(&ch, &g, &rho).unwrap();
            let parts = decompose(&ch, &g, &rho).unwrap();
            if let (Some(t), Some(p)) = (total.finite(), parts.total().finite()) {
                assert!((t - p).abs() < 1e-8);
                assert!(parts.generating <= 3f64.log2() + 1e-9);
            }
        }
    }

    #[test]
    fn classify() {
        assert_eq!(classify_unitary(&pauli_x(), &comp(2)).unwrap(), UnitaryClass::Classical);
        assert_eq!(classify_unitary(&hadamard(), &comp(2)).unwrap(), UnitaryClass::Nonclassical);
        let phase = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), C64::from_polar(1.0, 0.8)]));
        assert_eq!(classify_unitary(&phase, &comp(2)).unwrap(), UnitaryClass::Classical);
        assert!(classify_unitary(&(pauli_x() * c(2.0, 0.0)), &comp(2)).is_err());
        let g = EinselectionSpec::computational(&[2, 2]);
        assert_eq!(classify_unitary(&cnot_pm(), &g).unwrap(), UnitaryClass::Nonclassical);
    }

    #[test]
    fn ratio_of_identical_channels_is_one() {
        let h = QuantumChannel::unitary(hadamard(), vec![2]).unwrap();
        let seq = regularized_ratio(&h, &h, &comp(2), &[0.6, 0.7, 0.8], &quick()).unwrap();
        assert!(seq.ratio.iter().all(|r| (r - 1.0).abs() < 1e-9));
        assert!((seq.extrapolated - 1.0).abs() < 1e-9);
    }

    #[test]
    fn crossing_is_interpolated() {
        let pt = |mu: f64, g: f64, d: f64| PowerPoint { mu, generating: g, distinguishing: ExtendedReal::Finite(d) };
        let pts = [pt(0.1, 1.0, 0.2), pt(0.2, 1.0, 0.8), pt(0.3, 1.0, 1.4), pt(0.4, 1.0, 0.5)];
        assert!((power_crossing(&pts).unwrap() - (0.2 + 0.1 / 3.0)).abs() < 1e-12);
        assert_eq!(power_crossing(&pts[..2]), None);
    }
}
