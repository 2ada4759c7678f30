//! Concurrence-family measures, the quality factor of a channel, effective
//! states under local restrictions and superselection-graded entanglement.

use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::infotheory::{binary_entropy, vn_entropy};
use crate::linalg::{digits, pauli_y, tensor, CMatrix, CVector, DensityMatrix, PureState, Tolerances};
use crate::phase::{g_from_phase_dist, PhaseDistribution};

fn require_two_qubits(dims: &[usize]) -> Result<()> {
    if dims != [2, 2] {
        return Err(Error::DimensionMismatch(format!("expected two qubits, got dims {dims:?}")));
    }
    Ok(())
}

/// `2|det A|` for the amplitude matrix of a two-qubit pure state.
pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    require_two_qubits(psi.dims())?;
    let a = psi.amplitude_matrix()?;
    Ok((2.0 * (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm()).min(1.0))
}

/// Eigenvalues of `ρ` at or below this are treated as round-off in Wootters' formula.
const WOOTTERS_CUTOFF: f64 = 1e-14;

/// Wootters concurrence. The `λ_k` are the square roots of the spectrum of
/// the Hermitian product `√ρ ρ̃ √ρ`; they are computed as the singular values
/// of `τ = Wᵀ (σ_y ⊗ σ_y) W` with `ρ = W W†`, which avoids taking square roots
/// of round-off eigenvalues.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho.dims())?;
    let yy = tensor(&pauli_y(), &pauli_y());
    let e = rho.eigh();
    let keep: Vec<usize> = (0..4).filter(|&j| e.values[j] > WOOTTERS_CUTOFF).collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let w = CMatrix::from_fn(4, keep.len(), |r, j| e.vectors[(r, keep[j])] * e.values[keep[j]].sqrt());
    let tau = w.transpose() * yy * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}

/// `h((1 + √(1 - C²)) / 2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `d (∏ ω_l)^{1/d}` over the Schmidt weights of a `d × d` state.
pub fn g_concurrence_pure(psi: &PureState) -> Result<f64> {
    let dims = psi.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::DimensionMismatch(format!("G-concurrence needs equal local dims, got {dims:?}")));
    }
    let d = dims[0];
    let s = psi.schmidt()?;
    if s.coefficients.len() < d {
        return Ok(0.0);
    }
    let log_mean = s.coefficients.iter().map(|w| (w * w).ln()).sum::<f64>() / d as f64;
    Ok((d as f64 * log_mean.exp()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QualityMethod {
    /// Wootters concurrence of a two-qubit Choi state.
    Wootters,
    /// G-concurrence of a pure Choi state.
    PureChoi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityFactor {
    pub value: f64,
    pub dim: usize,
    pub method: QualityMethod,
}

fn leading_pure(rho: &DensityMatrix) -> Option<PureState> {
    let e = rho.eigh();
    if e.values.get(1).copied().unwrap_or(0.0) > Tolerances::default().supp {
        return None;
    }
    let v: CVector = e.vectors.column(0).into_owned();
    PureState::normalized(v, rho.dims().to_vec()).ok()
}

/// G-concurrence of the Choi state of an endomorphic channel.
pub fn quality_factor(ch: &QuantumChannel) -> Result<QualityFactor> {
    let d = ch.d_in();
    if d != ch.d_out() {
        return Err(Error::DimensionMismatch("quality factor needs an endomorphic channel".into()));
    }
    let choi = ch.choi().state().clone();
    let choi = DensityMatrix::from_raw(choi.into_matrix(), vec![d, d])?;
    if d == 2 {
        return Ok(QualityFactor { value: concurrence(&choi)?, dim: d, method: QualityMethod::Wootters });
    }
    match leading_pure(&choi) {
        Some(psi) => Ok(QualityFactor { value: g_concurrence_pure(&psi)?, dim: d, method: QualityMethod::PureChoi }),
        None => Err(Error::Unsupported(format!("mixed Choi state in dimension {d} needs a convex roof"))),
    }
}

/// Measure of `(S ⊗ 1)|ψ><ψ|`: Wootters for qubits, G-concurrence for pure outputs.
pub fn evolved_g_concurrence(ch: &QuantumChannel, psi: &PureState) -> Result<f64> {
    let dims = psi.dims();
    if dims.len() != 2 || dims[0] != dims[1] || ch.d_in() != dims[0] || ch.d_out() != dims[0] {
        return Err(Error::DimensionMismatch(format!(
            "channel {}→{} cannot act on the first factor of dims {dims:?}",
            ch.d_in(),
            ch.d_out()
        )));
    }
    let local = ch.clone().with_dims(vec![dims[0]], vec![dims[0]])?;
    let full = local.tensor(&QuantumChannel::identity(vec![dims[1]]));
    let out = full.apply(&psi.density())?;
    if dims[0] == 2 {
        return concurrence(&out);
    }
    match leading_pure(&out) {
        Some(phi) => g_concurrence_pure(&phi),
        None => Err(Error::Unsupported("mixed output in dimension > 2 needs a convex roof".into())),
    }
}

/// `S_1 ⊗ … ⊗ S_n (ρ)` for local channels, one per subsystem.
pub fn effective_state(rho: &DensityMatrix, locals: &[QuantumChannel]) -> Result<DensityMatrix> {
    if locals.len() != rho.dims().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} local channels for {} subsystems",
            locals.len(),
            rho.dims().len()
        )));
    }
    let mut full = locals[0].clone();
    for l in &locals[1..] {
        full = full.tensor(l);
    }
    full.apply(rho)
}

/// Local particle numbers per subsystem, aligned with each subsystem's basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalGrading {
    numbers: Vec<Vec<usize>>,
}

impl LocalGrading {
    pub fn new(numbers: Vec<Vec<usize>>, dims: &[usize]) -> Result<Self> {
        if numbers.len() != dims.len() || numbers.iter().zip(dims).any(|(n, &d)| n.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "grading lengths {:?} do not match dims {dims:?}",
                numbers.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok(LocalGrading { numbers })
    }

    /// Occupation number equals basis index on every subsystem.
    pub fn number_basis(dims: &[usize]) -> Self {
        LocalGrading { numbers: dims.iter().map(|&d| (0..d).collect()).collect() }
    }

    pub fn numbers(&self) -> &[Vec<usize>] {
        &self.numbers
    }

    fn dims(&self) -> Vec<usize> {
        self.numbers.iter().map(Vec::len).collect()
    }

    /// Local-number pattern of every basis index of the joint space.
    pub fn patterns(&self) -> Vec<Vec<usize>> {
        let dims = self.dims();
        let d: usize = dims.iter().product();
        (0..d).map(|i| digits(i, &dims).iter().zip(&self.numbers).map(|(&x, n)| n[x]).collect()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SsrBlock {
    pub pattern: Vec<usize>,
    pub weight: f64,
    /// `Π_n ρ Π_n / p_n` on the full space.
    pub state: DensityMatrix,
    /// The same block restricted to the product of per-party sector subspaces.
    pub restricted: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct SsrBlockDecomposition {
    pub blocks: Vec<SsrBlock>,
    dims: Vec<usize>,
}

impl SsrBlockDecomposition {
    pub fn reassemble(&self) -> DensityMatrix {
        let d: usize = self.dims.iter().product();
        let mut m = CMatrix::zeros(d, d);
        for b in &self.blocks {
            m += b.state.matrix() * crate::linalg::cr(b.weight);
        }
        DensityMatrix::raw_hermitized(m, self.dims.clone())
    }
}

/// Splits `ρ` into local-number sectors `p_n, ρ_n` with `p_n = Tr Π_n ρ`.
pub fn ssr_decompose(rho: &DensityMatrix, grading: &LocalGrading) -> Result<SsrBlockDecomposition> {
    let dims = rho.dims().to_vec();
    if grading.dims() != dims {
        return Err(Error::DimensionMismatch(format!("grading dims {:?} vs state dims {dims:?}", grading.dims())));
    }
    let patterns = grading.patterns();
    let mut distinct: Vec<Vec<usize>> = Vec::new();
    for p in &patterns {
        if !distinct.contains(p) {
            distinct.push(p.clone());
        }
    }
    distinct.sort();
    let m = rho.matrix();
    let d = rho.dim();
    let tol = Tolerances::default().supp;
    let mut blocks = Vec::new();
    for pat in distinct {
        let idx: Vec<usize> = (0..d).filter(|&i| patterns[i] == pat).collect();
        let weight: f64 = idx.iter().map(|&i| m[(i, i)].re).sum();
        if weight <= tol {
            continue;
        }
        let mut full = CMatrix::zeros(d, d);
        for &r in &idx {
            for &c in &idx {
                full[(r, c)] = m[(r, c)] / weight;
            }
        }
        let local: Vec<Vec<usize>> = grading
            .numbers
            .iter()
            .zip(&pat)
            .map(|(n, &t)| (0..n.len()).filter(|&x| n[x] == t).collect())
            .collect();
        let rdims: Vec<usize> = local.iter().map(Vec::len).collect();
        let rd: usize = rdims.iter().product();
        let embed: Vec<usize> = (0..rd)
            .map(|j| {
                let dg = digits(j, &rdims);
                let full_digits: Vec<usize> = dg.iter().zip(&local).map(|(&x, l)| l[x]).collect();
                crate::linalg::flat_index(&full_digits, &dims)
            })
            .collect();
        let restricted = CMatrix::from_fn(rd, rd, |r, c| full[(embed[r], embed[c])]);
        blocks.push(SsrBlock {
            pattern: pat,
            weight,
            state: DensityMatrix::raw_hermitized(full, dims.clone()),
            restricted: DensityMatrix::raw_hermitized(restricted, rdims),
        });
    }
    Ok(SsrBlockDecomposition { blocks, dims })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntanglementMeasure {
    Concurrence,
    Eof,
    /// Entropy of the reduced state; pure blocks only.
    EntropyOfEntanglement,
}

#[derive(Debug, Clone, Serialize)]
pub struct SsrEntanglement {
    pub value: f64,
    /// Set when the input was mixed, where the block sum only bounds the effective value.
    pub upper_bound: bool,
    pub blocks: Vec<(Vec<usize>, f64, f64)>,
}

fn embed_in_qubits(block: &DensityMatrix) -> DensityMatrix {
    let (a, b) = (block.dims()[0], block.dims()[1]);
    let m = block.matrix();
    let out = CMatrix::from_fn(4, 4, |r, c| {
        let (ra, rb, ca, cb) = (r / 2, r % 2, c / 2, c % 2);
        if ra < a && rb < b && ca < a && cb < b {
            m[(ra * b + rb, ca * b + cb)]
        } else {
            crate::linalg::ZERO
        }
    });
    DensityMatrix::raw_hermitized(out, vec![2, 2])
}

fn block_measure(block: &DensityMatrix, measure: EntanglementMeasure) -> Result<f64> {
    let (a, b) = (block.dims()[0], block.dims()[1]);
    if a == 1 || b == 1 {
        return Ok(0.0);
    }
    match measure {
        EntanglementMeasure::EntropyOfEntanglement => {
            if leading_pure(block).is_none() {
                return Err(Error::Unsupported("entropy of entanglement of a mixed block".into()));
            }
            Ok(vn_entropy(&block.partial_trace(&[0])?))
        }
        _ if a > 2 || b > 2 => {
            Err(Error::Unsupported(format!("two-qubit measure on a {a}x{b} sector block")))
        }
        EntanglementMeasure::Concurrence => concurrence(&embed_in_qubits(block)),
        EntanglementMeasure::Eof => eof(&embed_in_qubits(block)),
    }
}

/// `Σ p_n E(ρ_n)` over local-number sectors of a bipartite state.
pub fn ssr_effective_entanglement(
    rho: &DensityMatrix,
    grading: &LocalGrading,
    measure: EntanglementMeasure,
) -> Result<SsrEntanglement> {
    if rho.dims().len() != 2 {
        return Err(Error::DimensionMismatch("SSR effective entanglement is bipartite".into()));
    }
    let dec = ssr_decompose(rho, grading)?;
    let mut value = 0.0;
    let mut blocks = Vec::new();
    for b in &dec.blocks {
        let e = block_measure(&b.restricted, measure)?;
        value += b.weight * e;
        blocks.push((b.pattern.clone(), b.weight, e));
    }
    let upper_bound = leading_pure(rho).is_none();
    Ok(SsrEntanglement { value, upper_bound, blocks })
}

/// `|g|` of a condensate phase distribution; the quality factor of the induced channel.
pub fn bec_effective_quality(p: &PhaseDistribution) -> Result<f64> {
    Ok(g_from_phase_dist(p)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, bec_induced, depolarizing, phase_damping, EinselectionSpec};
    use crate::linalg::{c, cr, max_abs, ONE, ZERO};
    use crate::random::{random_pure_dims, random_unitary, rng};

    fn bell_phi() -> PureState {
        PureState::maximally_entangled(2)
    }

    fn psi_plus() -> PureState {
        PureState::from_slice(&[ZERO, ONE, ONE, ZERO], vec![2, 2]).unwrap()
    }

    #[test]
    fn pure_concurrence_examples() {
        assert!((concurrence_pure(&bell_phi()).unwrap() - 1.0).abs() < 1e-14);
        assert!(concurrence_pure(&PureState::basis(vec![2, 2], 1)).unwrap() < 1e-15);
        for t in [0.1, 0.4, 1.0, 2.5] {
            let (s, co) = f64::sin_cos(t);
            let psi = PureState::from_slice(&[cr(co), ZERO, ZERO, cr(s)], vec![2, 2]).unwrap();
            assert!((concurrence_pure(&psi).unwrap() - (2.0 * t).sin().abs()).abs() < 1e-12);
        }
        assert!(concurrence_pure(&PureState::basis(vec![3, 3], 0)).is_err());
    }

    #[test]
    fn wootters_examples() {
        let mut r = rng(1);
        for _ in 0..50 {
            let psi = random_pure_dims(&mut r, &[2, 2]);
            let a = concurrence(&psi.density()).unwrap();
            let b = concurrence_pure(&psi).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let phi = bell_phi().density();
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]);
        for mu in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let w = phi.mix(&mixed, mu).unwrap();
            let want = ((3.0 * mu - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&w).unwrap() - want).abs() < 1e-9);
        }
        let sep = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap();
        assert!(concurrence(&sep).unwrap() < 1e-12);
    }

    #[test]
    fn eof_examples() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        let x = (1.0 + 0.75f64.sqrt()) / 2.0;
        let want = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert!((eof_from_concurrence(0.5) - want).abs() < 1e-12);
        assert!((eof_from_concurrence(0.5) - 0.354_579).abs() < 1e-6);
    }

    #[test]
    fn g_concurrence_examples() {
        let mut r = rng(2);
        for _ in 0..20 {
            let psi = random_pure_dims(&mut r, &[2, 2]);
            assert!((g_concurrence_pure(&psi).unwrap() - concurrence_pure(&psi).unwrap()).abs() < 1e-10);
        }
        for d in 2..6 {
            assert!((g_concurrence_pure(&PureState::maximally_entangled(d)).unwrap() - 1.0).abs() < 1e-12);
        }
        let rank_two = PureState::from_slice(
            &[ONE, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO],
            vec![3, 3],
        )
        .unwrap();
        assert_eq!(g_concurrence_pure(&rank_two).unwrap(), 0.0);
        assert!(g_concurrence_pure(&PureState::basis(vec![2, 3], 0)).is_err());
    }

    #[test]
    fn quality_factor_examples() {
        let q = quality_factor(&amplitude_damping(0.36).unwrap()).unwrap();
        assert!((q.value - 0.8).abs() < 1e-9);
        let q = quality_factor(&phase_damping(0.19).unwrap()).unwrap();
        assert!((q.value - 0.9).abs() < 1e-9);
        let u = random_unitary(&mut rng(3), 3);
        let q = quality_factor(&QuantumChannel::unitary(u, vec![3]).unwrap()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-9);
        assert_eq!(q.method, QualityMethod::PureChoi);
        let dephase = EinselectionSpec::computational(&[2]).channel();
        assert!(quality_factor(&dephase).unwrap().value < 1e-12);
        assert!(matches!(quality_factor(&depolarizing(0.5, vec![3]).unwrap()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn evolved_concurrence_examples() {
        let ad = amplitude_damping(0.5).unwrap();
        assert!((evolved_g_concurrence(&ad, &bell_phi()).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        let mut r = rng(4);
        for _ in 0..20 {
            let psi = random_pure_dims(&mut r, &[2, 2]);
            let id = QuantumChannel::identity(vec![2]);
            assert!((evolved_g_concurrence(&id, &psi).unwrap() - concurrence_pure(&psi).unwrap()).abs() < 1e-9);
            let g = 0.3;
            let want = (1.0f64 - g).sqrt() * concurrence_pure(&psi).unwrap();
            let got = evolved_g_concurrence(&amplitude_damping(g).unwrap(), &psi).unwrap();
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn effective_state_examples() {
        let id = QuantumChannel::identity(vec![2]);
        let rho = psi_plus().density();
        assert!(effective_state(&rho, &[id.clone(), id.clone()]).unwrap().distance_max(&rho) < 1e-15);
        let gamma = 0.4;
        let out = effective_state(&rho, &[amplitude_damping(gamma).unwrap(), id.clone()]).unwrap();
        assert!((concurrence(&out).unwrap() - (1.0f64 - gamma).sqrt()).abs() < 1e-9);
        let deph = EinselectionSpec::computational(&[2]).channel();
        let out = effective_state(&bell_phi().density(), &[deph.clone(), deph]).unwrap();
        assert!(concurrence(&out).unwrap() < 1e-12);
        assert!(max_abs(&(out.matrix() - DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap().matrix())) < 1e-15);
        assert!(effective_state(&rho, &[id]).is_err());
    }

    #[test]
    fn ssr_decomposition_examples() {
        let g = LocalGrading::number_basis(&[2, 2]);
        let dec = ssr_decompose(&psi_plus().density(), &g).unwrap();
        let pats: Vec<(Vec<usize>, f64)> = dec.blocks.iter().map(|b| (b.pattern.clone(), b.weight)).collect();
        assert_eq!(pats.len(), 2);
        assert_eq!(pats[0].0, vec![0, 1]);
        assert_eq!(pats[1].0, vec![1, 0]);
        assert!(pats.iter().all(|(_, w)| (w - 0.5).abs() < 1e-15));

        let dec = ssr_decompose(&bell_phi().density(), &g).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        let einselected = crate::channels::sector_dephasing(vec![2, 2], &g.patterns()).unwrap();
        let want = einselected.apply(&bell_phi().density()).unwrap();
        assert!(dec.reassemble().distance_max(&want) < 1e-12);

        let diag = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4], vec![2, 2]).unwrap();
        let dec = ssr_decompose(&diag, &g).unwrap();
        assert!(dec.reassemble().distance_max(&diag) < 1e-15);
    }

    #[test]
    fn ssr_entanglement_examples() {
        let g = LocalGrading::number_basis(&[2, 2]);
        let e = ssr_effective_entanglement(&psi_plus().density(), &g, EntanglementMeasure::Concurrence).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.upper_bound);

        // dual rail: each party holds two modes, local basis |n_a n_b> with n ∈ {0,1}
        let dual = LocalGrading::new(vec![vec![0, 1, 1, 2], vec![0, 1, 1, 2]], &[4, 4]).unwrap();
        let mut amps = vec![ZERO; 16];
        amps[2 * 4 + 2] = ONE; // |10,10>
        amps[4 + 1] = ONE; // |01,01>
        let psi = PureState::from_slice(&amps, vec![4, 4]).unwrap();
        for (m, want) in [
            (EntanglementMeasure::Concurrence, 1.0),
            (EntanglementMeasure::Eof, 1.0),
            (EntanglementMeasure::EntropyOfEntanglement, 1.0),
        ] {
            let e = ssr_effective_entanglement(&psi.density(), &dual, m).unwrap();
            assert!((e.value - want).abs() < 1e-9, "{m:?}: {}", e.value);
        }

        let prod = DensityMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0], vec![2, 2]).unwrap();
        let e = ssr_effective_entanglement(&prod, &g, EntanglementMeasure::Eof).unwrap();
        assert_eq!(e.value, 0.0);

        let mixed = psi_plus().density().mix(&DensityMatrix::maximally_mixed(vec![2, 2]), 0.5).unwrap();
        assert!(ssr_effective_entanglement(&mixed, &g, EntanglementMeasure::Concurrence).unwrap().upper_bound);
    }

    #[test]
    fn bec_quality_matches_induced_channel() {
        for sigma in [0.1, 0.5, 1.0] {
            let p = PhaseDistribution::WrappedGaussian { mu: 0.3, sigma };
            let g = g_from_phase_dist(&p).unwrap();
            let q = bec_effective_quality(&p).unwrap();
            assert!((q - (-sigma * sigma / 2.0).exp()).abs() < 1e-6);
            let induced = bec_induced(g, 0.9).unwrap();
            assert!((quality_factor(&induced).unwrap().value - q).abs() < 1e-6);
        }
        let g = c(0.0, 0.0);
        assert!(quality_factor(&bec_induced(g, 0.4).unwrap()).unwrap().value < 1e-9);
    }
}
