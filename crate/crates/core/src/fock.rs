//! Bosonic Fock states in a fixed particle-number sector, distributed over
//! parties that each hold one or more modes.
//!
//! Occupation tuples are laid out party-major: for two modes per party the
//! tuple is `(a_1, b_1, a_2, b_2, …)`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64, ZERO};

const NORM_TOL: f64 = 1e-10;
const MAX_BASIS: usize = 1 << 20;

/// All occupation tuples with a given total over `parties × modes_per_party`
/// modes. Each mode is capped at the total, so no truncation error arises.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    parties: usize,
    modes_per_party: usize,
    total: usize,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn compositions(total: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slots == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

impl FockBasis {
    pub fn new(parties: usize, modes_per_party: usize, total_particles: usize) -> Result<Self> {
        if parties == 0 || modes_per_party == 0 {
            return Err(Error::Parameter("Fock basis needs at least one party and one mode".into()));
        }
        let modes = parties * modes_per_party;
        let count = binomial(total_particles + modes - 1, total_particles);
        if count > MAX_BASIS {
            return Err(Error::Parameter(format!("Fock sector has {count} states, above the limit {MAX_BASIS}")));
        }
        let mut tuples = Vec::with_capacity(count);
        compositions(total_particles, modes, &mut Vec::with_capacity(modes), &mut tuples);
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(FockBasis { parties, modes_per_party, total: total_particles, tuples, index })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn modes_per_party(&self) -> usize {
        self.modes_per_party
    }

    pub fn total_particles(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    /// Particle count held by each party.
    pub fn party_totals(&self, tuple: &[usize]) -> Vec<usize> {
        tuple.chunks(self.modes_per_party).map(|c| c.iter().sum()).collect()
    }

    /// Number of local occupation patterns a party can hold.
    pub fn local_dim(&self) -> usize {
        binomial(self.total + self.modes_per_party, self.modes_per_party)
    }
}

/// A normalized pure state on one Fock sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    basis: FockBasis,
    amps: Vec<C64>,
}

impl FockState {
    pub fn new(basis: FockBasis, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a sector of {} states",
                amps.len(),
                basis.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Norm(norm));
        }
        Ok(FockState { basis, amps })
    }

    /// Builds a state from sparse `(tuple, amplitude)` terms and normalizes
    /// it. Repeated tuples add up.
    pub fn from_terms(parties: usize, modes_per_party: usize, terms: &[(Vec<usize>, C64)]) -> Result<Self> {
        let total = match terms.first() {
            Some((t, _)) => t.iter().sum(),
            None => return Err(Error::Parameter("a Fock state needs at least one term".into())),
        };
        let basis = FockBasis::new(parties, modes_per_party, total)?;
        let mut amps = vec![ZERO; basis.len()];
        for (tuple, a) in terms {
            if tuple.len() != parties * modes_per_party {
                return Err(Error::DimensionMismatch(format!(
                    "occupation tuple of length {} for {} modes",
                    tuple.len(),
                    parties * modes_per_party
                )));
            }
            let i = basis.index_of(tuple).ok_or_else(|| {
                Error::Parameter(format!("tuple {tuple:?} lies outside the {total}-particle sector"))
            })?;
            amps[i] += a;
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm < 1e-300 {
            return Err(Error::Norm(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        FockState::new(basis, amps)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, tuple: &[usize]) -> C64 {
        self.basis.index_of(tuple).map_or(ZERO, |i| self.amps[i])
    }

    pub fn parties(&self) -> usize {
        self.basis.parties
    }

    pub fn total_particles(&self) -> usize {
        self.basis.total
    }

    /// Terms with nonzero amplitude, in basis order.
    pub fn support(&self) -> impl Iterator<Item = (&[usize], C64)> {
        self.basis.tuples.iter().zip(&self.amps).filter(|(_, a)| a.norm_sqr() > 0.0).map(|(t, a)| (t.as_slice(), *a))
    }

    pub fn density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix::from_raw(&v * v.adjoint(), vec![self.basis.len()]).expect("pure Fock state is a valid density")
    }
}

/// `(1/√N) Σ_k a_k† |0⟩` over `n` single-mode parties.
pub fn w_state(n: usize) -> Result<FockState> {
    dicke_state(n, 1)
}

/// Equal superposition of all ways to place `m` single particles on `n`
/// parties.
pub fn dicke_state(n: usize, m: usize) -> Result<FockState> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least two parties, got {n}")));
    }
    if m == 0 || m > n {
        return Err(Error::Parameter(format!("excitation number must lie in 1..={n}, got {m}")));
    }
    let basis = FockBasis::new(n, 1, m)?;
    let amp = C64::new(1.0 / (binomial(n, m) as f64).sqrt(), 0.0);
    let amps = basis.tuples().iter().map(|t| if t.iter().all(|&x| x <= 1) { amp } else { ZERO }).collect();
    FockState::new(basis, amps)
}

/// `(|10,…,10⟩ + |01,…,01⟩)/√2`: a GHZ state in dual-rail encoding.
pub fn ghz_dual_rail(n: usize) -> Result<FockState> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least two parties, got {n}")));
    }
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zero: Vec<usize> = (0..n).flat_map(|_| [1, 0]).collect();
    let one: Vec<usize> = (0..n).flat_map(|_| [0, 1]).collect();
    FockState::from_terms(n, 2, &[(zero, s), (one, s)])
}

/// Two independent copies of a single-mode-per-party state. Party `k` holds
/// mode `a_k` of the first copy and `b_k` of the second.
pub fn two_copies(psi: &FockState) -> Result<FockState> {
    if psi.basis.modes_per_party != 1 {
        return Err(Error::Parameter(format!(
            "two_copies expects one mode per party, got {}",
            psi.basis.modes_per_party
        )));
    }
    let n = psi.parties();
    let basis = FockBasis::new(n, 2, 2 * psi.total_particles())?;
    let mut amps = vec![ZERO; basis.len()];
    let terms: Vec<_> = psi.support().collect();
    for (p, a) in &terms {
        for (q, b) in &terms {
            let tuple: Vec<usize> = (0..n).flat_map(|k| [p[k], q[k]]).collect();
            amps[basis.index_of(&tuple).expect("sector holds all doubled tuples")] += a * b;
        }
    }
    FockState::new(basis, amps)
}

/// The superselection-restricted state: coherences between different local
/// particle-number patterns are removed. Entries are zeroed, so the map is
/// exactly idempotent and trace preserving.
pub fn ssr_project(psi: &FockState) -> DensityMatrix {
    ssr_project_density(&psi.basis, &psi.density()).expect("density built on its own basis")
}

/// As [`ssr_project`] for a density matrix on the sector `basis`.
pub fn ssr_project_density(basis: &FockBasis, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "density of dimension {} on a sector of {} states",
            rho.dim(),
            basis.len()
        )));
    }
    let patterns: Vec<Vec<usize>> = basis.tuples.iter().map(|t| basis.party_totals(t)).collect();
    let m = rho.matrix();
    let out = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if patterns[i] == patterns[j] { m[(i, j)] } else { ZERO });
    DensityMatrix::from_raw(out, rho.dims().to_vec())
}

/// One fixed-pattern component of a superselection-projected pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBlock {
    /// Particle count of each party.
    pub pattern: Vec<usize>,
    pub weight: f64,
    pub state: FockState,
}

/// Splits `psi` into its local-number sectors; the projected density is
/// `Σ weight · |state⟩⟨state|`.
pub fn ssr_blocks(psi: &FockState) -> Vec<FockBlock> {
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, t) in psi.basis.tuples.iter().enumerate() {
        if psi.amps[i].norm_sqr() > 0.0 {
            groups.entry(psi.basis.party_totals(t)).or_default().push(i);
        }
    }
    groups
        .into_iter()
        .map(|(pattern, idx)| {
            let weight: f64 = idx.iter().map(|&i| psi.amps[i].norm_sqr()).sum();
            let mut amps = vec![ZERO; psi.basis.len()];
            for &i in &idx {
                amps[i] = psi.amps[i] / weight.sqrt();
            }
            let state = FockState { basis: psi.basis.clone(), amps };
            FockBlock { pattern, weight, state }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NogoBlock {
    pub pattern: Vec<usize>,
    pub weight: f64,
    /// Parties holding no particle in this block.
    pub empty_parties: Vec<usize>,
}

/// Outcome of the pigeonhole check: with fewer particles than parties every
/// block leaves some party in the vacuum and so factorizes across it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NogoReport {
    pub parties: usize,
    pub total_particles: usize,
    pub blocks: Vec<NogoBlock>,
    pub all_blocks_have_vacuum: bool,
    /// Largest deviation from an exact product `|0⟩_k ⊗ |rest⟩` found over
    /// all blocks and their empty parties.
    pub factorization_defect: f64,
}

pub fn nogo_structure_check(psi: &FockState) -> Result<NogoReport> {
    let (n, m) = (psi.parties(), psi.total_particles());
    if m >= n {
        return Err(Error::Inapplicable(format!(
            "{m} particles on {n} parties: the vacuum argument needs fewer particles than parties"
        )));
    }
    let mpp = psi.basis.modes_per_party;
    let mut defect: f64 = 0.0;
    let blocks: Vec<NogoBlock> = ssr_blocks(psi)
        .into_iter()
        .map(|b| {
            let empty: Vec<usize> = (0..n).filter(|&k| b.pattern[k] == 0).collect();
            // an empty party's modes must read zero on every supported tuple
            for &k in &empty {
                for (t, _) in b.state.support() {
                    let local: usize = t[k * mpp..(k + 1) * mpp].iter().sum();
                    defect = defect.max(local as f64);
                }
            }
            NogoBlock { pattern: b.pattern, weight: b.weight, empty_parties: empty }
        })
        .collect();
    let all = blocks.iter().all(|b| !b.empty_parties.is_empty());
    Ok(NogoReport { parties: n, total_particles: m, blocks, all_blocks_have_vacuum: all, factorization_defect: defect })
}
