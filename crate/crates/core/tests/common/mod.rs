//! Randomized entropy-inequality suites and a brute-force discord oracle,
//! shared by the property tests and the acceptance run.

#![allow(dead_code)]

use qresource::discord::{discord, discord_zurek, DiscordOptions, MeasurementBasis};
use qresource::infotheory::{rel_entropy, vn_entropy};
use qresource::random::{random_channel, random_density, rng};
use qresource::DensityMatrix;
use rand::Rng;

pub const TRIALS: usize = 1000;
pub const SLACK: f64 = -1e-8;

fn finite_rel(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    rel_entropy(a, b).unwrap().finite().expect("full-rank second argument")
}

fn worst(slacks: impl Iterator<Item = f64>) -> f64 {
    slacks.fold(f64::INFINITY, f64::min)
}

/// Smallest `S(ρ‖σ)` seen; Klein says it is nonnegative.
pub fn klein(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    worst((0..trials).map(|i| {
        let d = 2 + i % 3;
        let rho = random_density(&mut r, &[d], 1 + i % d);
        let sigma = random_density(&mut r, &[d], d);
        finite_rel(&rho, &sigma)
    }))
}

pub fn partial_trace_monotonicity(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    worst((0..trials).map(|i| {
        let rho = random_density(&mut r, &[2, 3], 1 + i % 6);
        let sigma = random_density(&mut r, &[2, 3], 6);
        let keep = [i % 2];
        finite_rel(&rho, &sigma) - finite_rel(&rho.partial_trace(&keep).unwrap(), &sigma.partial_trace(&keep).unwrap())
    }))
}

pub fn channel_monotonicity(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    worst((0..trials).map(|i| {
        let ch = random_channel(&mut r, 3, 3, 1 + i % 4);
        let rho = random_density(&mut r, &[3], 1 + i % 3);
        let sigma = random_density(&mut r, &[3], 3);
        let before = finite_rel(&rho, &sigma);
        match rel_entropy(&ch.apply(&rho).unwrap(), &ch.apply(&sigma).unwrap()).unwrap().finite() {
            Some(after) => before - after,
            None => panic!("image of a full-rank state lost support"),
        }
    }))
}

pub fn joint_convexity(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    worst((0..trials).map(|_| {
        let p: f64 = r.random_range(0.0..1.0);
        let (r1, r2) = (random_density(&mut r, &[3], 2), random_density(&mut r, &[3], 3));
        let (s1, s2) = (random_density(&mut r, &[3], 3), random_density(&mut r, &[3], 3));
        let lhs = finite_rel(&r1.mix(&r2, p).unwrap(), &s1.mix(&s2, p).unwrap());
        p * finite_rel(&r1, &s1) + (1.0 - p) * finite_rel(&r2, &s2) - lhs
    }))
}

pub fn strong_subadditivity(trials: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    worst((0..trials).map(|i| {
        let rho = random_density(&mut r, &[2, 2, 2], 1 + i % 8);
        let s = |keep: &[usize]| vn_entropy(&rho.partial_trace(keep).unwrap());
        s(&[0, 1]) + s(&[1, 2]) - vn_entropy(&rho) - s(&[1])
    }))
}

/// Brute-force minimum over Bloch directions: a 64×32 grid, then two
/// rounds of 64×32 sub-grids spanning ±1 cell around the four best points.
/// Returns `(coarse, refined)`.
pub fn grid_oracle(rho: &DensityMatrix) -> (f64, f64) {
    use std::f64::consts::{PI, TAU};
    let f = |t: f64, p: f64| discord_zurek(rho, &MeasurementBasis::bloch(t, p)).unwrap();
    let (mut dt, mut dp) = (PI / 63.0, TAU / 32.0);
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..64 {
        for j in 0..32 {
            let (t, p) = (dt * i as f64, dp * j as f64);
            pts.push((f(t, p), t, p));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coarse = pts[0].0;
    for _ in 0..2 {
        let seeds: Vec<_> = pts.iter().take(4).copied().collect();
        let (st, sp) = (2.0 * dt / 63.0, 2.0 * dp / 31.0);
        for (_, t0, p0) in seeds {
            for i in 0..64 {
                for j in 0..32 {
                    let (t, p) = (t0 - dt + st * i as f64, p0 - dp + sp * j as f64);
                    pts.push((f(t, p), t, p));
                }
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.truncate(16);
        (dt, dp) = (st, sp);
    }
    (coarse, pts[0].0)
}

/// Optimizer against oracle on random two-qubit states. Each entry is
/// `(optimizer, coarse grid, refined grid)`.
pub fn discord_vs_grid(states: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut r = rng(seed);
    let opts = DiscordOptions::default();
    (0..states)
        .map(|trial| {
            let rho = random_density(&mut r, &[2, 2], 1 + trial % 4);
            let found = discord(&rho, &opts).unwrap().value;
            let (coarse, refined) = grid_oracle(&rho);
            (found, coarse, refined)
        })
        .collect()
}
