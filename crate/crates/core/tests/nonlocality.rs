//! Beamsplitter measurements and Bell functionals on multi-copy Fock states,
//! checked against brute-force dense computations.

use qresource::bell::{
    beamsplitter_output_state, bell_value, closed_form_outcome, correlator, correlators, optimize_settings,
    BellFunctional, BellKind, PartySetting,
};
use qresource::fock::{
    dicke_state, ghz_dual_rail, nogo_structure_check, ssr_project, ssr_project_density, two_copies, w_state,
    FockState,
};
use qresource::random::rng;
use qresource::{CMatrix, C64};
use rand::Rng;

fn random_setting(r: &mut impl Rng) -> PartySetting {
    PartySetting::new(r.random_range(0.0..std::f64::consts::TAU), r.random_range(0.0..std::f64::consts::TAU))
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `c†^n d†^m |0⟩/√(n! m!)` by summing over every a/b choice of each
/// creation operator.
fn brute_output(s: PartySetting, n: usize, m: usize) -> Vec<C64> {
    let (sin, cos) = s.theta.sin_cos();
    let e = C64::from_polar(1.0, s.phi);
    let t = n + m;
    let factors: Vec<(C64, C64)> = (0..t)
        .map(|k| if k < n { (C64::new(cos, 0.0), e * sin) } else { (C64::new(sin, 0.0), -e * cos) })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); t + 1];
    for choice in 0..(1usize << t) {
        let mut coeff = C64::new(1.0, 0.0);
        let mut a_count = 0;
        for (k, (ca, cb)) in factors.iter().enumerate() {
            if choice >> k & 1 == 1 {
                coeff *= ca;
                a_count += 1;
            } else {
                coeff *= cb;
            }
        }
        out[a_count] += coeff;
    }
    let norm = (fact(n) * fact(m)).sqrt();
    out.iter().enumerate().map(|(i, v)| v * (fact(i) * fact(t - i)).sqrt() / norm).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn output_states_match_brute_force_expansion() {
    let mut r = rng(301);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random_setting(&mut r);
        for (n, m) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let oracle = brute_output(s, n, m);
            worst = worst.max(max_diff(&closed_form_outcome(s, n, m).unwrap(), &oracle));
            worst = worst.max(max_diff(&beamsplitter_output_state(s, n, m), &oracle));
        }
        for t in 3..=5 {
            for n in 0..=t {
                worst = worst.max(max_diff(&beamsplitter_output_state(s, n, t - n), &brute_output(s, n, t - n)));
            }
        }
    }
    assert!(worst < 1e-12, "worst deviation {worst:e}");
}

#[test]
fn output_states_are_orthonormal() {
    let mut r = rng(302);
    for _ in 0..20 {
        let s = random_setting(&mut r);
        for t in 0..=4 {
            let vs: Vec<Vec<C64>> = (0..=t).map(|n| beamsplitter_output_state(s, n, t - n)).collect();
            for (i, u) in vs.iter().enumerate() {
                for (j, v) in vs.iter().enumerate() {
                    let ip: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }
}

fn sign(n: usize, m: usize) -> f64 {
    let t = n + m;
    if (m + t * (t + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dense local observable on one party's two modes holding at most `max`
/// particles; basis index runs over `(n_a, n_b)` pairs in the order used
/// by [`dense_vector`].
fn dense_observable(s: PartySetting, max: usize) -> CMatrix {
    let pairs = local_pairs(max);
    let mut o = CMatrix::zeros(pairs.len(), pairs.len());
    for t in 0..=max {
        for n in 0..=t {
            let v = brute_output(s, n, t - n);
            for (i, &(ai, _)) in pairs.iter().enumerate().filter(|(_, p)| p.0 + p.1 == t) {
                for (j, &(aj, _)) in pairs.iter().enumerate().filter(|(_, p)| p.0 + p.1 == t) {
                    o[(i, j)] += v[ai] * v[aj].conj() * sign(n, t - n);
                }
            }
        }
    }
    o
}

fn local_pairs(max: usize) -> Vec<(usize, usize)> {
    (0..=max).flat_map(|t| (0..=t).rev().map(move |a| (a, t - a))).collect()
}

/// The state as a dense vector on the product of local two-mode spaces.
fn dense_vector(psi: &FockState, max: usize) -> Vec<C64> {
    let pairs = local_pairs(max);
    let n = psi.parties();
    let mut v = vec![C64::new(0.0, 0.0); pairs.len().pow(n as u32)];
    for (tuple, amp) in psi.support() {
        let idx = (0..n).fold(0, |acc, k| {
            acc * pairs.len() + pairs.iter().position(|p| *p == (tuple[2 * k], tuple[2 * k + 1])).unwrap()
        });
        v[idx] += amp;
    }
    v
}

fn dense_correlator(psi: &FockState, settings: &[PartySetting], max: usize) -> f64 {
    let v = dense_vector(psi, max);
    let op = settings
        .iter()
        .map(|s| dense_observable(*s, max))
        .reduce(|a, b| a.kronecker(&b))
        .unwrap();
    let x = nalgebra::DVector::from_vec(v);
    (x.adjoint() * op * &x)[(0, 0)].re
}

#[test]
fn correlators_match_dense_expectation() {
    let mut r = rng(303);
    let states = [two_copies(&w_state(2).unwrap()).unwrap(), two_copies(&w_state(3).unwrap()).unwrap()];
    let mut worst = 0.0f64;
    for psi in &states {
        for _ in 0..20 {
            let settings: Vec<PartySetting> = (0..psi.parties()).map(|_| random_setting(&mut r)).collect();
            let lib = correlator(psi, &settings).unwrap();
            let oracle = dense_correlator(psi, &settings, 2);
            worst = worst.max((lib - oracle).abs());
        }
    }
    assert!(worst < 1e-12, "worst deviation {worst:e}");
}

#[test]
fn correlator_table_is_consistent_with_single_correlators() {
    let mut r = rng(304);
    let psi = two_copies(&w_state(3).unwrap()).unwrap();
    let pairs: Vec<_> = (0..3).map(|_| (random_setting(&mut r), random_setting(&mut r))).collect();
    let table = correlators(&psi, &pairs).unwrap();
    assert_eq!(table.len(), 8);
    for (mask, c) in table.iter().enumerate() {
        let chosen: Vec<PartySetting> =
            pairs.iter().enumerate().map(|(k, (a, b))| if mask >> k & 1 == 1 { *b } else { *a }).collect();
        assert!((c - correlator(&psi, &chosen).unwrap()).abs() < 1e-12, "mask {mask}");
    }
    let f = BellFunctional::new(BellKind::Mabk, 3).unwrap();
    assert!((f.value_from_correlators(&table) - bell_value(&f, &psi, &pairs).unwrap()).abs() < 1e-12);
}

#[test]
fn chsh_optimum_is_reproduced_from_its_settings() {
    let psi = two_copies(&w_state(2).unwrap()).unwrap();
    let f = BellFunctional::new(BellKind::Chsh, 2).unwrap();
    let opt = optimize_settings(&f, &psi, 10, 11).unwrap();
    let again = f.value_from_correlators(&correlators(&psi, &opt.settings).unwrap()).abs();
    assert!((again - opt.value).abs() < 1e-12);
    assert!((opt.value - (1.0 + std::f64::consts::SQRT_2)).abs() < 1e-3, "value {}", opt.value);
}

#[test]
fn genuine_functionals_stay_classical_with_too_few_particles() {
    let mut r = rng(305);
    let cases = [
        (BellKind::Svetlichny, two_copies(&w_state(3).unwrap()).unwrap()),
        (BellKind::Bbgl, two_copies(&w_state(4).unwrap()).unwrap()),
    ];
    for (kind, psi) in &cases {
        let f = BellFunctional::new(*kind, psi.parties()).unwrap();
        let bound = f.classical_bound();
        for _ in 0..200 {
            let pairs: Vec<_> = (0..psi.parties()).map(|_| (random_setting(&mut r), random_setting(&mut r))).collect();
            let v = bell_value(&f, psi, &pairs).unwrap().abs();
            assert!(v <= bound + 1e-9, "{kind}: {v} > {bound}");
        }
    }
    let f = BellFunctional::new(BellKind::Svetlichny, 3).unwrap();
    let opt = optimize_settings(&f, &cases[0].1, 5, 12).unwrap();
    assert!(opt.value <= 4.0 + 1e-6, "optimized svetlichny {}", opt.value);
}

#[test]
fn superselection_projection_is_exactly_idempotent() {
    for psi in [
        two_copies(&w_state(3).unwrap()).unwrap(),
        ghz_dual_rail(3).unwrap(),
        two_copies(&dicke_state(4, 2).unwrap()).unwrap(),
    ] {
        let once = ssr_project(&psi);
        let twice = ssr_project_density(psi.basis(), &once).unwrap();
        assert_eq!(once.matrix(), twice.matrix());
        let tr: C64 = once.matrix().diagonal().iter().sum();
        assert!((tr.re - 1.0).abs() < 1e-14);
    }
}

#[test]
fn single_copy_blocks_leave_parties_in_vacuum() {
    let report = nogo_structure_check(&w_state(5).unwrap()).unwrap();
    assert_eq!(report.blocks.len(), 5);
    assert!(report.blocks.iter().all(|b| b.empty_parties.len() == 4));

    let report = nogo_structure_check(&dicke_state(5, 2).unwrap()).unwrap();
    assert_eq!(report.blocks.len(), 10);
    assert!(report.blocks.iter().all(|b| b.empty_parties.len() == 3));
    assert!(report.factorization_defect < 1e-12);

    let report = nogo_structure_check(&two_copies(&w_state(3).unwrap()).unwrap()).unwrap();
    assert!(report.all_blocks_have_vacuum);

    assert!(nogo_structure_check(&ghz_dual_rail(3).unwrap()).is_err());
    assert!(nogo_structure_check(&two_copies(&dicke_state(3, 2).unwrap()).unwrap()).is_err());
}
