use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use qresource::bell::{
    beamsplitter_output_state, closed_form_outcome, optimize_settings, printed_outcome_11, BellFunctional,
    BellKind, BellOptimum, PartySetting,
};
use qresource::channel_spec::ChannelSpec;
use qresource::channels::{amplitude_damping, cnot_pm, depolarizing, phase_damping, EinselectionSpec};
use qresource::discord::{capacity_gap, discord, discord_zurek, DiscordOptions, MeasurementBasis};
use qresource::entanglement::{concurrence, quality_factor};
use qresource::fock::{dicke_state, ghz_dual_rail, nogo_structure_check, two_copies, FockState};
use qresource::infotheory::coding_capacity;
use qresource::io::load_state;
use qresource::phase::{g_from_phase_dist, two_flat_printed_formula, PhaseDistribution};
use qresource::quantumness::{power_crossing, quantumness, PowerPoint, QuantumnessOptions};
use qresource::random::rng;
use qresource::{DensityMatrix, Error, PureState, QuantumChannel};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::output::{Cell, Table};
use crate::{Config, Experiment, StateArg};

/// What an experiment hands back to the driver.
pub struct Outcome {
    pub table: Table,
    pub warnings: Vec<String>,
    pub summary: Map<String, Value>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, warnings: Vec::new(), summary: Map::new() }
    }
}

type Result<T> = std::result::Result<T, Error>;

pub fn run(cfg: &Config) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::Table5_2 => table5_2(cfg),
        Experiment::Table5_3 => table5_3(cfg),
        Experiment::Table5_1Check => table5_1_check(cfg),
        Experiment::Fig4_4 => fig4_4(cfg),
        Experiment::Fig6_2 => fig6_2(cfg),
        Experiment::Fig6_5 => fig6_5(cfg),
        Experiment::QualityFactors => quality_factors(cfg),
        Experiment::Discord => discord_experiment(cfg),
        Experiment::BellOptimize => bell_optimize(cfg),
        Experiment::Quantumness => quantumness_experiment(cfg),
        Experiment::NogoCheck => nogo_check(cfg),
    }
}

fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

/// Evenly spaced grid, rounded to `1e-10` so decimal steps print cleanly.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| ((lo + step * i as f64) * 1e10).round() / 1e10).collect()
}

fn or_default(v: &[f64], default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    if v.is_empty() {
        default()
    } else {
        v.to_vec()
    }
}

// --- Bell experiments -------------------------------------------------------

const BELL_COLUMNS: [&str; 12] = [
    "N",
    "functional",
    "value",
    "bound",
    "restarts",
    "seed",
    "wall_time_s",
    "state",
    "excitations",
    "copies",
    "raw_value",
    "converged_runs",
];

fn bell_state(kind: StateArg, n: usize, m: usize, copies: usize) -> Result<FockState> {
    match (kind, copies) {
        (StateArg::GhzDualRail, 1) => ghz_dual_rail(n),
        (StateArg::GhzDualRail, _) => Err(param("ghz-dualrail is already two modes per party; use --copies 1")),
        (StateArg::W | StateArg::Dicke, 2) => two_copies(&dicke_state(n, m)?),
        (StateArg::W | StateArg::Dicke, _) => {
            Err(param("single copies of w/dicke have one mode per party; beamsplitter tests need --copies 2"))
        }
    }
}

fn excitations(cfg: &Config, state: StateArg, n: usize) -> usize {
    match state {
        StateArg::W => 1,
        StateArg::Dicke => cfg.excitations.unwrap_or(n / 2).max(1),
        StateArg::GhzDualRail => n,
    }
}

fn state_label(kind: StateArg) -> &'static str {
    match kind {
        StateArg::W => "w",
        StateArg::Dicke => "dicke",
        StateArg::GhzDualRail => "ghz-dualrail",
    }
}

struct BellRun {
    kind: BellKind,
    state: StateArg,
    n: usize,
    m: usize,
    copies: usize,
}

fn run_bell(cfg: &Config, run: &BellRun, table: &mut Table, warnings: &mut Vec<String>) -> Result<BellOptimum> {
    let psi = bell_state(run.state, run.n, run.m, run.copies)?;
    let f = BellFunctional::new(run.kind, run.n)?;
    let restarts = cfg.restarts.unwrap_or(50);
    let t = Instant::now();
    let o = optimize_settings(&f, &psi, restarts, cfg.seed)?;
    let secs = t.elapsed().as_secs_f64();
    if o.converged_runs == 0 {
        warnings.push(format!("N={} {}: no restart met the convergence tolerance", run.n, run.kind));
    }
    table.push(vec![
        run.n.into(),
        run.kind.to_string().into(),
        o.value.into(),
        o.classical_bound.into(),
        restarts.into(),
        cfg.seed.into(),
        secs.into(),
        state_label(run.state).into(),
        (psi.total_particles() / run.copies).into(),
        run.copies.into(),
        o.raw_value.into(),
        o.converged_runs.into(),
    ]);
    Ok(o)
}

fn table5_2(cfg: &Config) -> Result<Outcome> {
    let parties = if cfg.parties.is_empty() { vec![2, 3, 4] } else { cfg.parties.clone() };
    let kind = cfg.functional.unwrap_or(BellKind::Mabk);
    let state = cfg.state_kind()?.unwrap_or(StateArg::W);
    let copies = cfg.copies.unwrap_or(if state == StateArg::GhzDualRail { 1 } else { 2 });
    let mut out = Outcome::new(Table::new(&BELL_COLUMNS));
    for n in parties {
        let m = excitations(cfg, state, n);
        run_bell(cfg, &BellRun { kind, state, n, m, copies }, &mut out.table, &mut out.warnings)?;
    }
    Ok(out)
}

fn table5_3(cfg: &Config) -> Result<Outcome> {
    let cases: Vec<(usize, usize)> = match (cfg.parties.as_slice(), cfg.excitations) {
        ([], None) => vec![(3, 1), (4, 2)],
        ([], Some(_)) => return Err(param("--excitations needs --parties")),
        (ns, m) => ns.iter().map(|&n| (n, m.unwrap_or(n / 2).max(1))).collect(),
    };
    let mut columns = BELL_COLUMNS.to_vec();
    columns.extend(["max_over_restarts", "genuine_violation"]);
    let mut out = Outcome::new(Table::new(&columns));
    for (n, m) in cases {
        let genuine = if n == 3 { BellKind::Svetlichny } else { BellKind::Bbgl };
        let kinds = match cfg.functional {
            Some(k) => vec![k],
            None => vec![genuine, BellKind::Mabk],
        };
        for kind in kinds {
            let run = BellRun { kind, state: StateArg::Dicke, n, m, copies: 2 };
            let o = run_bell(cfg, &run, &mut out.table, &mut out.warnings)?;
            let worst = o.run_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let row = out.table.rows.last_mut().expect("row just pushed");
            row.push(worst.into());
            let is_genuine = matches!(kind, BellKind::Svetlichny | BellKind::Bbgl);
            row.push(if is_genuine { Cell::from(if worst > o.classical_bound + 1e-6 { "yes" } else { "no" }) } else { Cell::Empty });
        }
    }
    Ok(out)
}

fn bell_optimize(cfg: &Config) -> Result<Outcome> {
    let state = cfg.state_kind()?.unwrap_or(StateArg::W);
    let copies = cfg.copies.unwrap_or(if state == StateArg::GhzDualRail { 1 } else { 2 });
    let kind = cfg.functional.unwrap_or(BellKind::Mabk);
    let n = match cfg.parties.as_slice() {
        [] => 3,
        [n] => *n,
        _ => return Err(param("bell_optimize takes a single --parties value")),
    };
    let m = excitations(cfg, state, n);
    let mut columns = BELL_COLUMNS.to_vec();
    columns.push("settings");
    let mut out = Outcome::new(Table::new(&columns));
    let o = run_bell(cfg, &BellRun { kind, state, n, m, copies }, &mut out.table, &mut out.warnings)?;
    let settings: Vec<String> = o
        .settings
        .iter()
        .map(|(a, b)| {
            [a.theta, a.phi, b.theta, b.phi].iter().map(|x| crate::output::fmt_sig(*x)).collect::<Vec<_>>().join(" ")
        })
        .collect();
    out.table.rows.last_mut().expect("row just pushed").push(settings.join(";").into());
    out.summary.insert("run_values".into(), json!(o.run_values));
    Ok(out)
}

fn table5_1_check(cfg: &Config) -> Result<Outcome> {
    let samples = cfg.restarts.unwrap_or(20);
    let mut r = rng(cfg.seed);
    let settings: Vec<PartySetting> =
        (0..samples).map(|_| PartySetting::new(r.random_range(0.0..TAU), r.random_range(0.0..TAU))).collect();
    let mut out =
        Outcome::new(Table::new(&["n", "m", "samples", "seed", "max_deviation", "printed_max_deviation"]));
    let diff = |a: &[qresource::C64], b: &[qresource::C64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    for (n, m) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
        let mut worst: f64 = 0.0;
        let mut printed: f64 = 0.0;
        for &s in &settings {
            let num = beamsplitter_output_state(s, n, m);
            let cf = closed_form_outcome(s, n, m).expect("closed forms exist up to two particles");
            worst = worst.max(diff(&num, &cf));
            if (n, m) == (1, 1) {
                printed = printed.max(diff(&num, &printed_outcome_11(s)));
            }
        }
        if worst > 1e-12 {
            out.warnings.push(format!("outcome ({n},{m}) deviates from its closed form by {worst:e}"));
        }
        let printed = if (n, m) == (1, 1) { Cell::Num(printed) } else { Cell::Empty };
        out.table.push(vec![n.into(), m.into(), samples.into(), cfg.seed.into(), worst.into(), printed]);
    }
    Ok(out)
}

fn nogo_check(cfg: &Config) -> Result<Outcome> {
    let state = cfg.state_kind()?.unwrap_or(StateArg::W);
    let n = match cfg.parties.as_slice() {
        [] => 3,
        [n] => *n,
        _ => return Err(param("nogo_check takes a single --parties value")),
    };
    let m = excitations(cfg, state, n);
    let copies = cfg.copies.unwrap_or(if state == StateArg::GhzDualRail { 1 } else { 2 });
    let psi = match (state, copies) {
        (StateArg::GhzDualRail, _) => ghz_dual_rail(n)?,
        (_, 1) => dicke_state(n, m)?,
        _ => two_copies(&dicke_state(n, m)?)?,
    };
    let report = nogo_structure_check(&psi)?;
    let mut out = Outcome::new(Table::new(&["N", "M_total", "pattern", "weight", "empty_parties"]));
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for b in &report.blocks {
        out.table.push(vec![
            report.parties.into(),
            report.total_particles.into(),
            join(&b.pattern).into(),
            b.weight.into(),
            join(&b.empty_parties).into(),
        ]);
    }
    out.summary.insert("all_blocks_have_vacuum".into(), json!(report.all_blocks_have_vacuum));
    out.summary.insert("factorization_defect".into(), json!(report.factorization_defect));
    if !report.all_blocks_have_vacuum {
        out.warnings.push("a block without an empty party was found".into());
    }
    Ok(out)
}

// --- channels and entanglement ----------------------------------------------

fn fig4_4(cfg: &Config) -> Result<Outcome> {
    let sigmas = or_default(&cfg.sigma, || grid(0.1, 3.0, 0.1));
    let mut out = Outcome::new(Table::new(&[
        "family",
        "sigma",
        "w",
        "delta",
        "g_abs",
        "reference",
        "printed_formula",
        "abs_error",
    ]));
    for sigma in sigmas {
        let g = g_from_phase_dist(&PhaseDistribution::WrappedGaussian { mu: 0.0, sigma })?.norm();
        let reference = (-sigma * sigma / 2.0).exp();
        out.table.push(vec![
            "wrapped_gaussian".into(),
            sigma.into(),
            Cell::Empty,
            Cell::Empty,
            g.into(),
            reference.into(),
            reference.into(),
            (g - reference).abs().into(),
        ]);
    }
    for delta in [0.0, PI / 2.0] {
        for k in 1..=8 {
            let w = PI * k as f64 / 8.0;
            let g = g_from_phase_dist(&PhaseDistribution::TwoFlat { w, delta })?.norm();
            let reference = (2.0 / w) * (w / 2.0).sin() * (delta / 2.0).cos().abs();
            out.table.push(vec![
                "two_flat".into(),
                Cell::Empty,
                w.into(),
                delta.into(),
                g.into(),
                reference.into(),
                two_flat_printed_formula(w, delta).into(),
                (g - reference).abs().into(),
            ]);
        }
    }
    Ok(out)
}

fn quality_factors(cfg: &Config) -> Result<Outcome> {
    let params = or_default(&cfg.gamma, || vec![0.25, 0.5, 0.75]);
    let mut out = Outcome::new(Table::new(&["channel", "parameter", "Q", "expected", "abs_error", "method"]));
    for p in params {
        for (name, ch) in [("amplitude_damping", amplitude_damping(p)?), ("phase_damping", phase_damping(p)?)] {
            let q = quality_factor(&ch)?;
            let expected = (1.0 - p).sqrt();
            out.table.push(vec![
                name.into(),
                p.into(),
                q.value.into(),
                expected.into(),
                (q.value - expected).abs().into(),
                format!("{:?}", q.method).to_lowercase().into(),
            ]);
        }
    }
    if let Some(path) = &cfg.channel {
        let q = quality_factor(&ChannelSpec::load(path)?.build()?)?;
        out.table.push(vec![
            path.display().to_string().into(),
            Cell::Empty,
            q.value.into(),
            Cell::Empty,
            Cell::Empty,
            format!("{:?}", q.method).to_lowercase().into(),
        ]);
    }
    Ok(out)
}

fn werner(mu: f64) -> Result<DensityMatrix> {
    depolarizing(mu, vec![2, 2])?.apply(&PureState::maximally_entangled(2).density())
}

fn fig6_5(cfg: &Config) -> Result<Outcome> {
    let mus = or_default(&cfg.mu, || grid(0.0, 1.0, 0.05));
    let gamma = EinselectionSpec::one_sided(&[2, 2], 1);
    let phi = PureState::maximally_entangled(2).density();
    let opts = DiscordOptions { restarts: cfg.restarts.unwrap_or(8), seed: cfg.seed, heuristic: false };
    let mut out = Outcome::new(Table::new(&["mu", "F_q", "F_c", "discord_gap", "concurrence", "discord"]));
    for mu in mus {
        let ch = depolarizing(mu, vec![2, 2])?;
        let rho = ch.apply(&phi)?;
        let fq = coding_capacity(&rho, &[0])?;
        let fc = coding_capacity(&ch.apply(&gamma.apply(&phi)?)?, &[0])?;
        let gap = capacity_gap(&ch, &gamma, Some(&phi))?;
        out.table.push(vec![
            mu.into(),
            fq.into(),
            fc.into(),
            gap.into(),
            concurrence(&werner(mu)?)?.into(),
            discord(&rho, &opts)?.value.into(),
        ]);
    }
    Ok(out)
}

fn load_density(path: &Path) -> Result<DensityMatrix> {
    Ok(load_state(path)?.state.density())
}

fn discord_experiment(cfg: &Config) -> Result<Outcome> {
    let rho = match cfg.state_path()? {
        Some(path) => load_density(path)?,
        None => return Err(param("discord needs --state <file>")),
    };
    let opts = DiscordOptions { restarts: cfg.restarts.unwrap_or(8), seed: cfg.seed, heuristic: false };
    let res = discord(&rho, &opts)?;
    let dims = rho.dims();
    let computational = discord_zurek(&rho, &MeasurementBasis::computational(dims[dims.len() - 1]))?;
    let mut out = Outcome::new(Table::new(&[
        "discord",
        "computational_basis_discord",
        "restarts",
        "seed",
        "evaluations",
        "converged",
    ]));
    out.table.push(vec![
        res.value.into(),
        computational.into(),
        res.diagnostics.restarts.into(),
        cfg.seed.into(),
        res.diagnostics.evaluations.into(),
        res.diagnostics.converged.to_string().into(),
    ]);
    if !res.diagnostics.converged {
        out.warnings.push("discord optimizer did not converge".into());
    }
    Ok(out)
}

// --- quantumness --------------------------------------------------------------

fn quantumness_opts(cfg: &Config) -> QuantumnessOptions {
    let mut opts = QuantumnessOptions { seed: cfg.seed, ..Default::default() };
    if let Some(r) = cfg.restarts {
        opts.restarts = r;
    }
    if let Some(t) = cfg.tol_supp {
        opts.tol_supp = t;
    }
    opts
}

fn base_channel(cfg: &Config, default: impl FnOnce() -> Result<QuantumChannel>) -> Result<QuantumChannel> {
    match &cfg.channel {
        Some(path) => ChannelSpec::load(path)?.build(),
        None => default(),
    }
}

fn fig6_2(cfg: &Config) -> Result<Outcome> {
    let mus = or_default(&cfg.mu, || grid(0.3, 0.9, 0.01));
    let u = base_channel(cfg, || QuantumChannel::unitary(cnot_pm(), vec![2, 2]))?;
    let dims = u.dims_in().to_vec();
    let gamma = EinselectionSpec::computational(&dims);
    let opts = quantumness_opts(cfg);
    let mut out = Outcome::new(Table::new(&["mu", "generating_power", "distinguishing_power", "W", "restarts", "seed"]));
    let mut points = Vec::new();
    for mu in mus {
        let ch = u.then(&depolarizing(mu, dims.clone())?)?;
        let generating = qresource::quantumness::generating_power(&ch, &gamma, &opts)?;
        let distinguishing = qresource::quantumness::distinguishing_power(&ch, &gamma, &opts)?;
        let w = quantumness(&ch, &gamma, &opts)?.value;
        points.push(PowerPoint { mu, generating, distinguishing });
        out.table.push(vec![
            mu.into(),
            generating.into(),
            distinguishing.to_f64().into(),
            w.to_f64().into(),
            opts.restarts.into(),
            cfg.seed.into(),
        ]);
    }
    match power_crossing(&points) {
        Some(c) => {
            out.summary.insert("crossing_mu".into(), json!(c));
        }
        None => out.warnings.push("generating and distinguishing power do not cross on this grid".into()),
    }
    Ok(out)
}

fn quantumness_experiment(cfg: &Config) -> Result<Outcome> {
    let Some(path) = &cfg.channel else {
        return Err(param("quantumness needs --channel <spec file>"));
    };
    let base = ChannelSpec::load(path)?.build()?;
    let dims = base.dims_in().to_vec();
    if base.dims_out() != dims.as_slice() {
        return Err(param("quantumness needs a channel with equal input and output dimensions"));
    }
    let gamma = EinselectionSpec::computational(&dims);
    let opts = quantumness_opts(cfg);
    let mut out = Outcome::new(Table::new(&[
        "mu",
        "W",
        "distinguishing",
        "generating",
        "infinite",
        "near_singular",
        "restarts",
        "seed",
        "evaluations",
        "converged_runs",
    ]));
    let mus: Vec<Option<f64>> = if cfg.mu.is_empty() { vec![None] } else { cfg.mu.iter().map(|m| Some(*m)).collect() };
    for mu in mus {
        let ch = match mu {
            Some(mu) => base.then(&depolarizing(mu, dims.clone())?)?,
            None => base.clone(),
        };
        let r = quantumness(&ch, &gamma, &opts)?;
        if r.diagnostics.near_singular {
            out.warnings.push(format!("mu={mu:?}: large but finite value near a support boundary"));
        }
        out.table.push(vec![
            mu.into(),
            r.value.to_f64().into(),
            r.decomposition.distinguishing.to_f64().into(),
            r.decomposition.generating.into(),
            r.value.is_infinite().to_string().into(),
            r.diagnostics.near_singular.to_string().into(),
            opts.restarts.into(),
            cfg.seed.into(),
            r.diagnostics.evaluations.into(),
            r.diagnostics.converged_runs.into(),
        ]);
    }
    Ok(out)
}
