//! Bell tests on two-mode-per-party Fock states measured through local
//! beamsplitters with binned photon-number outcomes.
//!
//! Settings are indexed by a bit mask: bit `k` set means party `k` uses its
//! second setting `B_k`, clear means `A_k`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::linalg::{CMatrix, C64, ZERO};
use crate::optim::{multistart, NelderMeadOptions};
use crate::random::{derive_seed, rng};

/// Beamsplitter mixing angle `theta` and phase `phi` of one party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartySetting {
    pub theta: f64,
    pub phi: f64,
}

impl PartySetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        PartySetting { theta, phi }
    }

    /// Same setting with both angles reduced to `[0, 2π)`.
    pub fn wrapped(self) -> Self {
        PartySetting { theta: self.theta.rem_euclid(TAU), phi: self.phi.rem_euclid(TAU) }
    }
}

/// `±1` outcome assigned to output occupations `(ñ, m̃)`.
pub fn binning(n: usize, m: usize) -> i32 {
    let t = n + m;
    if (m + t * (t + 1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Output Fock state `|ñ, m̃⟩` written in the input basis, as a vector over
/// the `a`-mode occupation `i` (the `b` mode holds `ñ + m̃ − i`). Uses
/// `c† = cos θ a† + sin θ e^{iφ} b†` and `d† = sin θ a† − cos θ e^{iφ} b†`.
pub fn beamsplitter_output_state(s: PartySetting, n: usize, m: usize) -> Vec<C64> {
    let (sin, cos) = s.theta.sin_cos();
    let e = C64::from_polar(1.0, s.phi);
    let t = n + m;
    // poly[i] = coefficient of a†^i b†^(deg - i)
    let mut poly = vec![C64::new(1.0, 0.0)];
    let mut push = |ca: C64, cb: C64| {
        let mut next = vec![ZERO; poly.len() + 1];
        for (i, v) in poly.iter().enumerate() {
            next[i + 1] += v * ca;
            next[i] += v * cb;
        }
        poly = next;
    };
    for _ in 0..n {
        push(C64::new(cos, 0.0), e * sin);
    }
    for _ in 0..m {
        push(C64::new(sin, 0.0), -e * cos);
    }
    let norm = (factorial(n) * factorial(m)).sqrt();
    poly.iter().enumerate().map(|(i, v)| v * (factorial(i) * factorial(t - i)).sqrt() / norm).collect()
}

/// Closed forms for up to two particles per party, in the same layout as
/// [`beamsplitter_output_state`]. The `(1,1)` outcome carries `e^{2iφ}` on
/// its `|0,2⟩` component; [`printed_outcome_11`] is the variant without it.
pub fn closed_form_outcome(s: PartySetting, n: usize, m: usize) -> Option<Vec<C64>> {
    let (sn, cs) = s.theta.sin_cos();
    let e = C64::from_polar(1.0, s.phi);
    let r = |x: f64| C64::new(x, 0.0);
    Some(match (n, m) {
        (0, 0) => vec![r(1.0)],
        (1, 0) => vec![e * sn, r(cs)],
        (0, 1) => vec![-e * cs, r(sn)],
        (2, 0) => vec![e * e * sn * sn, e * SQRT_2 * cs * sn, r(cs * cs)],
        (1, 1) => vec![-e * e * SQRT_2 * cs * sn, -e * (2.0 * s.theta).cos(), r(SQRT_2 * cs * sn)],
        (0, 2) => vec![e * e * cs * cs, -e * SQRT_2 * cs * sn, r(sn * sn)],
        _ => return None,
    })
}

/// The `(1,1)` outcome with a phase-free `|0,2⟩` component. It agrees with
/// the true output state only when `e^{2iφ} = 1`.
pub fn printed_outcome_11(s: PartySetting) -> Vec<C64> {
    let (sn, cs) = s.theta.sin_cos();
    let e = C64::from_polar(1.0, s.phi);
    vec![C64::new(-SQRT_2 * cs * sn, 0.0), -e * (2.0 * s.theta).cos(), C64::new(SQRT_2 * cs * sn, 0.0)]
}

/// Binned observable `Σ ε(ñ, m̃) |ñ, m̃⟩⟨ñ, m̃|` on the `t`-particle local
/// sector, in the input basis indexed by `a`-occupation.
pub fn local_observable(s: PartySetting, t: usize) -> CMatrix {
    let mut o = CMatrix::zeros(t + 1, t + 1);
    for n in 0..=t {
        let v = nalgebra::DVector::from_vec(beamsplitter_output_state(s, n, t - n));
        o += v.clone() * v.adjoint() * C64::new(binning(n, t - n) as f64, 0.0);
    }
    o
}

/// A fixed local-number sector of the state, as a dense tensor over the
/// `a`-mode occupation of every party.
#[derive(Debug, Clone)]
struct Block {
    totals: Vec<usize>,
    data: Vec<C64>,
}

#[derive(Debug, Clone)]
struct BlockForm {
    parties: usize,
    blocks: Vec<Block>,
    /// Largest local total per party.
    max_total: Vec<usize>,
}

impl BlockForm {
    fn new(state: &FockState) -> Result<Self> {
        let b = state.basis();
        if b.modes_per_party() != 2 {
            return Err(Error::Parameter(format!(
                "beamsplitter measurements need two modes per party, got {}",
                b.modes_per_party()
            )));
        }
        let n = b.parties();
        let mut groups: BTreeMap<Vec<usize>, Vec<(Vec<usize>, C64)>> = BTreeMap::new();
        for (tuple, a) in state.support() {
            let totals = b.party_totals(tuple);
            let occ_a: Vec<usize> = tuple.chunks(2).map(|c| c[0]).collect();
            groups.entry(totals).or_default().push((occ_a, a));
        }
        let mut max_total = vec![0; n];
        let blocks = groups
            .into_iter()
            .map(|(totals, terms)| {
                for (k, &t) in totals.iter().enumerate() {
                    max_total[k] = max_total[k].max(t);
                }
                let len: usize = totals.iter().map(|t| t + 1).product();
                let mut data = vec![ZERO; len];
                for (occ, a) in terms {
                    let idx = occ.iter().zip(&totals).fold(0, |acc, (o, t)| acc * (t + 1) + o);
                    data[idx] = a;
                }
                Block { totals, data }
            })
            .collect();
        Ok(BlockForm { parties: n, blocks, max_total })
    }

    fn check_settings(&self, count: usize) -> Result<()> {
        if count != self.parties {
            return Err(Error::DimensionMismatch(format!("{count} settings for {} parties", self.parties)));
        }
        Ok(())
    }
}

/// Applies `op` to axis `k` of a row-major tensor with the given shape.
fn apply_axis(data: &[C64], totals: &[usize], k: usize, op: &CMatrix) -> Vec<C64> {
    let dk = totals[k] + 1;
    let stride: usize = totals[k + 1..].iter().map(|t| t + 1).product();
    let outer = data.len() / (dk * stride);
    let mut out = vec![ZERO; data.len()];
    for o in 0..outer {
        let base = o * dk * stride;
        for a in 0..dk {
            for b in 0..dk {
                let w = op[(a, b)];
                if w == ZERO {
                    continue;
                }
                for s in 0..stride {
                    out[base + a * stride + s] += w * data[base + b * stride + s];
                }
            }
        }
    }
    out
}

/// `obs[k][setting][t]`: observable of party `k` on its `t`-particle sector.
type ObservableTable = Vec<[Vec<CMatrix>; 2]>;

fn observable_table(form: &BlockForm, settings: &[(PartySetting, PartySetting)]) -> ObservableTable {
    settings
        .iter()
        .zip(&form.max_total)
        .map(|(&(a, b), &tmax)| {
            [(0..=tmax).map(|t| local_observable(a, t)).collect(), (0..=tmax).map(|t| local_observable(b, t)).collect()]
        })
        .collect()
}

/// Full correlators `⟨⊗_k O_k⟩` for all `2^N` setting masks.
fn all_correlators(form: &BlockForm, obs: &ObservableTable) -> Vec<f64> {
    fn rec(k: usize, mask: usize, data: Vec<C64>, block: &Block, obs: &ObservableTable, out: &mut [f64]) {
        if k == obs.len() {
            out[mask] += block.data.iter().zip(&data).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            return;
        }
        let t = block.totals[k];
        for s in 0..2 {
            let next = apply_axis(&data, &block.totals, k, &obs[k][s][t]);
            rec(k + 1, mask | (s << k), next, block, obs, out);
        }
    }
    let mut out = vec![0.0; 1 << form.parties];
    for block in &form.blocks {
        rec(0, 0, block.data.clone(), block, obs, &mut out);
    }
    out
}

/// Joint outcome `(ñ_k, m̃_k)` per party with its probability.
pub type OutcomeTable = Vec<(Vec<(usize, usize)>, f64)>;

/// Probabilities of all beamsplitter output occupations.
pub fn beamsplitter_outcomes(state: &FockState, settings: &[PartySetting]) -> Result<OutcomeTable> {
    let form = BlockForm::new(state)?;
    form.check_settings(settings.len())?;
    let mut table = BTreeMap::new();
    for block in &form.blocks {
        let mut data = block.data.clone();
        for (k, s) in settings.iter().enumerate() {
            let t = block.totals[k];
            // row ñ holds ⟨ñ, t−ñ| in the a-occupation basis
            let u = CMatrix::from_fn(t + 1, t + 1, |r, i| beamsplitter_output_state(*s, r, t - r)[i].conj());
            data = apply_axis(&data, &block.totals, k, &u);
        }
        for (idx, amp) in data.iter().enumerate() {
            let mut rem = idx;
            let mut outcome = vec![(0, 0); form.parties];
            for k in (0..form.parties).rev() {
                let d = block.totals[k] + 1;
                let n = rem % d;
                rem /= d;
                outcome[k] = (n, block.totals[k] - n);
            }
            *table.entry(outcome).or_insert(0.0) += amp.norm_sqr();
        }
    }
    Ok(table.into_iter().collect())
}

/// `⟨⊗_k O_k(θ_k, φ_k)⟩` from the outcome distribution.
pub fn correlator(state: &FockState, settings: &[PartySetting]) -> Result<f64> {
    Ok(beamsplitter_outcomes(state, settings)?
        .iter()
        .map(|(out, p)| p * out.iter().map(|&(n, m)| binning(n, m) as f64).product::<f64>())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellKind {
    Chsh,
    Svetlichny,
    Bbgl,
    Mabk,
    Zb,
}

impl std::str::FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "chsh" => BellKind::Chsh,
            "svetlichny" => BellKind::Svetlichny,
            "bbgl" => BellKind::Bbgl,
            "mabk" => BellKind::Mabk,
            "zb" => BellKind::Zb,
            other => return Err(Error::Parameter(format!("unknown Bell functional '{other}'"))),
        })
    }
}

impl std::fmt::Display for BellKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BellKind::Chsh => "chsh",
            BellKind::Svetlichny => "svetlichny",
            BellKind::Bbgl => "bbgl",
            BellKind::Mabk => "mabk",
            BellKind::Zb => "zb",
        })
    }
}

const MAX_ENUM_PARTIES: usize = 6;

/// A Bell expression in full correlators, scaled so that its classical
/// bound is `2^{N-1}` (CHSH 2, Svetlichny 4).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellFunctional {
    kind: BellKind,
    parties: usize,
    /// Linear coefficients by setting mask; empty for the nonlinear ZB form.
    coeffs: Vec<f64>,
    /// Classical maximum of the unscaled expression.
    raw_bound: f64,
    scale: f64,
    classical_bound: f64,
}

fn mabk_coeffs(n: usize) -> Vec<f64> {
    let mut co = vec![0.0; 1 << n];
    for signs in 0..(1usize << n) {
        let s = |j: usize| if signs >> j & 1 == 1 { -1.0 } else { 1.0 };
        let total: f64 = (0..n).map(s).sum();
        let weight = SQRT_2 * (PI / 4.0 * (total - n as f64 - 1.0)).cos();
        for (mask, c) in co.iter_mut().enumerate() {
            *c += weight * (0..n).filter(|j| mask >> j & 1 == 1).map(s).product::<f64>();
        }
    }
    for c in &mut co {
        // snap rounding noise so the expansion prints cleanly
        let r = c.round();
        if (*c - r).abs() < 1e-12 {
            *c = r;
        }
    }
    co
}

/// `S_n = A_1 S_{n-1} + B_1 S'_{n-1}`, where the prime swaps every A and B.
fn bbgl_coeffs(n: usize) -> Vec<f64> {
    if n == 2 {
        // −A₁A₂ + A₁B₂ + B₁A₂ + B₁B₂
        return vec![-1.0, 1.0, 1.0, 1.0];
    }
    let prev = bbgl_coeffs(n - 1);
    let full = (1 << (n - 1)) - 1;
    let mut co = vec![0.0; 1 << n];
    for (m, v) in prev.iter().enumerate() {
        co[m << 1] += v;
        co[((!m & full) << 1) | 1] += v;
    }
    co
}

fn raw_value(kind: BellKind, coeffs: &[f64], n: usize, corr: &[f64]) -> f64 {
    match kind {
        BellKind::Zb => (0..(1usize << n))
            .map(|signs| {
                corr.iter()
                    .enumerate()
                    .map(|(mask, e)| if (mask & signs).count_ones() % 2 == 1 { -e } else { *e })
                    .sum::<f64>()
                    .abs()
            })
            .sum(),
        _ => coeffs.iter().zip(corr).map(|(c, e)| c * e).sum(),
    }
}

fn enumerate_bound(kind: BellKind, coeffs: &[f64], n: usize) -> Result<f64> {
    if n > MAX_ENUM_PARTIES {
        return Err(Error::Parameter(format!(
            "classical bound enumeration supports at most {MAX_ENUM_PARTIES} parties, got {n}"
        )));
    }
    let mut corr = vec![0.0; 1 << n];
    let mut best: f64 = 0.0;
    for strategy in 0..(1usize << (2 * n)) {
        // bit 2j is party j's A outcome, bit 2j+1 its B outcome (set = −1)
        for (mask, e) in corr.iter_mut().enumerate() {
            let flips = (0..n).filter(|&j| strategy >> (2 * j + (mask >> j & 1)) & 1 == 1).count();
            *e = if flips % 2 == 1 { -1.0 } else { 1.0 };
        }
        best = best.max(raw_value(kind, coeffs, n, &corr).abs());
    }
    Ok(best)
}

impl BellFunctional {
    pub fn new(kind: BellKind, parties: usize) -> Result<Self> {
        let fixed = |want: usize| {
            if parties == want {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{kind} is defined for {want} parties, got {parties}")))
            }
        };
        if parties < 2 {
            return Err(Error::Parameter(format!("Bell functionals need at least two parties, got {parties}")));
        }
        let coeffs = match kind {
            BellKind::Chsh => {
                fixed(2)?;
                // A₁A₂ + A₁B₂ + B₁A₂ − B₁B₂
                vec![1.0, 1.0, 1.0, -1.0]
            }
            BellKind::Svetlichny => {
                fixed(3)?;
                let mut co = vec![1.0; 8];
                co[0] = -1.0;
                co[7] = -1.0;
                co
            }
            BellKind::Bbgl => bbgl_coeffs(parties),
            BellKind::Mabk => mabk_coeffs(parties),
            BellKind::Zb => Vec::new(),
        };
        let raw_bound = enumerate_bound(kind, &coeffs, parties)?;
        let target = 2f64.powi(parties as i32 - 1);
        let scale = match kind {
            BellKind::Mabk | BellKind::Zb => target / raw_bound,
            _ => 1.0,
        };
        Ok(BellFunctional { kind, parties, coeffs, raw_bound, scale, classical_bound: raw_bound * scale })
    }

    pub fn kind(&self) -> BellKind {
        self.kind
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    /// Coefficient by setting mask; empty for ZB.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn raw_bound(&self) -> f64 {
        self.raw_bound
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    pub fn is_genuine(&self) -> bool {
        matches!(self.kind, BellKind::Svetlichny | BellKind::Bbgl)
    }

    /// Nonzero terms as `(coefficient, "A1B2…")`.
    pub fn terms(&self) -> Vec<(f64, String)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(mask, c)| {
                let word = (0..self.parties)
                    .map(|k| format!("{}{}", if mask >> k & 1 == 1 { 'B' } else { 'A' }, k + 1))
                    .collect::<String>();
                (*c, word)
            })
            .collect()
    }

    /// Unscaled value from correlators indexed by mask.
    pub fn raw_from_correlators(&self, corr: &[f64]) -> f64 {
        raw_value(self.kind, &self.coeffs, self.parties, corr)
    }

    /// Scaled value from correlators indexed by mask.
    pub fn value_from_correlators(&self, corr: &[f64]) -> f64 {
        self.scale * self.raw_from_correlators(corr)
    }
}

/// Exact maximum of `|f|` over deterministic `±1` strategies (scaled).
pub fn classical_bound(f: &BellFunctional) -> Result<f64> {
    Ok(f.scale * enumerate_bound(f.kind, &f.coeffs, f.parties)?)
}

fn check_functional(f: &BellFunctional, form: &BlockForm, count: usize) -> Result<()> {
    if f.parties != form.parties {
        return Err(Error::DimensionMismatch(format!(
            "{}-party functional on a {}-party state",
            f.parties, form.parties
        )));
    }
    form.check_settings(count)
}

/// Scaled functional value with `(A_k, B_k)` settings per party.
pub fn bell_value(f: &BellFunctional, state: &FockState, settings: &[(PartySetting, PartySetting)]) -> Result<f64> {
    let form = BlockForm::new(state)?;
    check_functional(f, &form, settings.len())?;
    Ok(f.value_from_correlators(&all_correlators(&form, &observable_table(&form, settings))))
}

/// All `2^N` correlators for the given settings, indexed by mask.
pub fn correlators(state: &FockState, settings: &[(PartySetting, PartySetting)]) -> Result<Vec<f64>> {
    let form = BlockForm::new(state)?;
    form.check_settings(settings.len())?;
    Ok(all_correlators(&form, &observable_table(&form, settings)))
}

#[derive(Debug, Clone, Copy)]
pub struct BellOptions {
    pub restarts: usize,
    pub seed: u64,
    pub nm: NelderMeadOptions,
}

impl Default for BellOptions {
    fn default() -> Self {
        BellOptions {
            restarts: 50,
            seed: 0,
            nm: NelderMeadOptions { max_evals: 20_000, f_tol: 1e-10, x_tol: 1e-8, initial_step: 0.5, rebuilds: 2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellOptimum {
    /// Best `|value|`, re-evaluated at the returned settings.
    pub value: f64,
    pub raw_value: f64,
    pub classical_bound: f64,
    pub settings: Vec<(PartySetting, PartySetting)>,
    /// Certified `|value|` of every restart, in restart order.
    pub run_values: Vec<f64>,
    pub evaluations: usize,
    pub converged_runs: usize,
    pub restarts: usize,
    pub seed: u64,
}

fn unpack(x: &[f64]) -> Vec<(PartySetting, PartySetting)> {
    x.chunks(4).map(|c| (PartySetting::new(c[0], c[1]), PartySetting::new(c[2], c[3]))).collect()
}

/// Maximizes `|f|` over the `4N` beamsplitter angles with the default
/// optimizer budget.
pub fn optimize_settings(f: &BellFunctional, state: &FockState, restarts: usize, seed: u64) -> Result<BellOptimum> {
    optimize_settings_with(f, state, &BellOptions { restarts, seed, ..Default::default() })
}

pub fn optimize_settings_with(f: &BellFunctional, state: &FockState, opts: &BellOptions) -> Result<BellOptimum> {
    if opts.restarts == 0 {
        return Err(Error::Parameter("need at least one restart".into()));
    }
    let form = BlockForm::new(state)?;
    check_functional(f, &form, form.parties)?;
    let dim = 4 * form.parties;
    let starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|i| {
            let mut r = rng(derive_seed(opts.seed, i as u64));
            (0..dim).map(|_| r.random_range(0.0..TAU)).collect()
        })
        .collect();
    let objective = |x: &[f64]| -f.value_from_correlators(&all_correlators(&form, &observable_table(&form, &unpack(x)))).abs();
    let (_, runs) = multistart(objective, &starts, &opts.nm);

    let mut run_values = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, f64, Vec<(PartySetting, PartySetting)>)> = None;
    for run in &runs {
        let settings: Vec<_> = unpack(&run.x).into_iter().map(|(a, b)| (a.wrapped(), b.wrapped())).collect();
        let v = bell_value(f, state, &settings)?;
        run_values.push(v.abs());
        if best.as_ref().is_none_or(|(b, _, _)| v.abs() > *b) {
            best = Some((v.abs(), v / f.scale, settings));
        }
    }
    let (value, raw, settings) = best.expect("at least one restart");
    Ok(BellOptimum {
        value,
        raw_value: raw.abs(),
        classical_bound: f.classical_bound,
        settings,
        run_values,
        evaluations: runs.iter().map(|r| r.evals).sum(),
        converged_runs: runs.iter().filter(|r| r.converged).count(),
        restarts: opts.restarts,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ghz_dual_rail, two_copies, w_state, FockState};
    use rand::Rng;

    fn random_setting(r: &mut impl Rng) -> PartySetting {
        PartySetting::new(r.random_range(0.0..TAU), r.random_range(0.0..TAU))
    }

    #[test]
    fn binning_values() {
        assert_eq!(binning(0, 0), 1);
        assert_eq!(binning(1, 0), -1);
        assert_eq!(binning(0, 1), 1);
        assert_eq!(binning(2, 0), -1);
        assert_eq!(binning(1, 1), 1);
        assert_eq!(binning(0, 2), -1);
    }

    #[test]
    fn output_states_match_closed_forms() {
        let mut r = rng(11);
        for _ in 0..20 {
            let s = random_setting(&mut r);
            for (n, m) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                let num = beamsplitter_output_state(s, n, m);
                let cf = closed_form_outcome(s, n, m).unwrap();
                let d = num.iter().zip(&cf).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(d < 1e-12, "({n},{m}) off by {d}");
            }
        }
        // the phase-free variant is only right when e^{2iφ} = 1
        let s = PartySetting::new(0.3, 0.0);
        let d: f64 = printed_outcome_11(s).iter().zip(&beamsplitter_output_state(s, 1, 1)).map(|(a, b)| (a - b).norm()).sum();
        assert!(d < 1e-12);
        let s = PartySetting::new(0.3, 0.7);
        let d: f64 = printed_outcome_11(s).iter().zip(&beamsplitter_output_state(s, 1, 1)).map(|(a, b)| (a - b).norm()).sum();
        assert!(d > 1e-3);
    }

    #[test]
    fn local_observable_is_unitary_involution() {
        let mut r = rng(2);
        for t in 0..4 {
            let o = local_observable(random_setting(&mut r), t);
            let sq = &o * &o;
            assert!(crate::linalg::max_abs(&(sq - crate::linalg::identity(t + 1))) < 1e-12);
        }
    }

    #[test]
    fn transparent_beamsplitter_reads_occupations() {
        let s = two_copies(&w_state(2).unwrap()).unwrap();
        let out = beamsplitter_outcomes(&s, &[PartySetting::new(0.0, 0.0); 2]).unwrap();
        for (o, p) in &out {
            let amp = s.amplitude(&[o[0].0, o[0].1, o[1].0, o[1].1]);
            assert!((p - amp.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_over_four_kills_the_11_outcome() {
        let s = two_copies(&w_state(3).unwrap()).unwrap();
        let mut r = rng(5);
        let mut settings: Vec<_> = (0..3).map(|_| random_setting(&mut r)).collect();
        settings[1].theta = PI / 4.0;
        let out = beamsplitter_outcomes(&s, &settings).unwrap();
        let p11: f64 = out.iter().filter(|(o, _)| o[1] == (1, 1)).map(|(_, p)| p).sum();
        assert!(p11 < 1e-14);
    }

    #[test]
    fn probabilities_normalized_and_correlators_agree() {
        let s = two_copies(&w_state(3).unwrap()).unwrap();
        let mut r = rng(9);
        for _ in 0..50 {
            let sets: Vec<(PartySetting, PartySetting)> =
                (0..3).map(|_| (random_setting(&mut r), random_setting(&mut r))).collect();
            let corr = correlators(&s, &sets).unwrap();
            for mask in 0..8 {
                let pick: Vec<PartySetting> =
                    (0..3).map(|k| if mask >> k & 1 == 1 { sets[k].1 } else { sets[k].0 }).collect();
                let out = beamsplitter_outcomes(&s, &pick).unwrap();
                let total: f64 = out.iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-10);
                let c = correlator(&s, &pick).unwrap();
                assert!((c - corr[mask]).abs() < 1e-12);
                assert!(c.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn enumerated_bounds() {
        assert_eq!(BellFunctional::new(BellKind::Chsh, 2).unwrap().classical_bound(), 2.0);
        assert_eq!(BellFunctional::new(BellKind::Svetlichny, 3).unwrap().classical_bound(), 4.0);
        for n in 2..=5 {
            let f = BellFunctional::new(BellKind::Bbgl, n).unwrap();
            assert_eq!(classical_bound(&f).unwrap(), 2f64.powi(n as i32 - 1));
            let m = BellFunctional::new(BellKind::Mabk, n).unwrap();
            assert!((m.classical_bound() - 2f64.powi(n as i32 - 1)).abs() < 1e-12);
        }
        assert!(BellFunctional::new(BellKind::Bbgl, 7).is_err());
        assert!(BellFunctional::new(BellKind::Chsh, 3).is_err());
    }

    #[test]
    fn svetlichny_is_bbgl3() {
        let s = BellFunctional::new(BellKind::Svetlichny, 3).unwrap();
        let b = BellFunctional::new(BellKind::Bbgl, 3).unwrap();
        assert_eq!(s.coefficients(), b.coefficients());
        assert_eq!(s.terms().len(), 8);
    }

    #[test]
    fn mabk3_is_four_term_mermin() {
        let m = BellFunctional::new(BellKind::Mabk, 3).unwrap();
        // −A1A2A3 + A1B2B3 + B1A2B3 + B1B2A3 up to a common factor
        let t = m.terms();
        assert_eq!(t.len(), 4);
        let find = |w: &str| t.iter().find(|(_, x)| x == w).map(|(c, _)| *c).unwrap();
        let unit = find("A1B2B3");
        assert_eq!(find("B1A2B3"), unit);
        assert_eq!(find("B1B2A3"), unit);
        assert_eq!(find("A1A2A3"), -unit);
        assert_eq!(m.raw_bound(), 8.0);
        assert_eq!(m.scale(), 0.5);
    }

    #[test]
    fn ghz_dual_rail_reaches_svetlichny_maximum() {
        // dual-rail single particles see O = −n·σ with n at polar angle 2θ,
        // so θ = π/4 gives −σ(φ) and ⟨GHZ|∏ −σ(φ_k)|GHZ⟩ = −cos Σφ_k
        let f = BellFunctional::new(BellKind::Bbgl, 3).unwrap();
        let closed = |ph: &[f64; 6]| {
            (0..8)
                .map(|mask| {
                    let sum: f64 = (0..3).map(|k| ph[2 * k + (mask >> k & 1)]).sum();
                    f.coefficients()[mask] * -sum.cos()
                })
                .sum::<f64>()
        };
        let mut best = (0.0f64, [0.0; 6]);
        for code in 0..(8usize.pow(6)) {
            let mut ph = [0.0; 6];
            let mut c = code;
            for p in &mut ph {
                *p = (c % 8) as f64 * PI / 4.0;
                c /= 8;
            }
            let v = closed(&ph);
            if v > best.0 {
                best = (v, ph);
            }
        }
        assert!((best.0 - 4.0 * SQRT_2).abs() < 1e-9);
        let ph = best.1;
        let settings: Vec<_> = (0..3)
            .map(|k| (PartySetting::new(PI / 4.0, ph[2 * k]), PartySetting::new(PI / 4.0, ph[2 * k + 1])))
            .collect();
        let v = bell_value(&f, &ghz_dual_rail(3).unwrap(), &settings).unwrap();
        assert!((v - 4.0 * SQRT_2).abs() < 1e-6, "{v}");
    }

    #[test]
    fn product_states_respect_svetlichny() {
        let f = BellFunctional::new(BellKind::Svetlichny, 3).unwrap();
        let s = FockState::from_terms(3, 2, &[(vec![1, 0, 0, 1, 1, 0], C64::new(1.0, 0.0))]).unwrap();
        let mut r = rng(4);
        for _ in 0..50 {
            let sets: Vec<_> = (0..3).map(|_| (random_setting(&mut r), random_setting(&mut r))).collect();
            assert!(bell_value(&f, &s, &sets).unwrap().abs() <= 4.0 + 1e-8);
        }
    }

    #[test]
    fn chsh_two_copies_w2() {
        let f = BellFunctional::new(BellKind::Mabk, 2).unwrap();
        let s = two_copies(&w_state(2).unwrap()).unwrap();
        let opt = optimize_settings(&f, &s, 8, 1).unwrap();
        assert!((opt.value - (1.0 + SQRT_2)).abs() < 1e-3, "{}", opt.value);
        let check = bell_value(&f, &s, &opt.settings).unwrap().abs();
        assert!((check - opt.value).abs() < 1e-12);
        assert!(bell_value(&f, &w_state(2).unwrap(), &opt.settings).is_err());
    }
}
