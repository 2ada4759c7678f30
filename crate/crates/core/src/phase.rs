//! Phase distributions of a condensate reference frame and the coherence
//! parameter `g = -i ∫ p(φ) e^{iφ} dφ`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, I};

const MIN_POINTS: usize = 1 << 14;
const MAX_POINTS: usize = 1 << 22;
const QUAD_TOL: f64 = 1e-12;

/// A probability density on `[0, 2π)`, or a finite mixture of sharp phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PhaseDistribution {
    WrappedGaussian { mu: f64, sigma: f64 },
    Uniform,
    /// Sharp phases with weights; integrals are exact sums.
    DiscreteMixture { phases: Vec<f64>, weights: Vec<f64> },
    /// Two flat windows of width `w` centred at `δ/2` and `2π - δ/2`.
    TwoFlat { w: f64, delta: f64 },
    /// Samples at `2πj/n`, interpolated linearly and periodically.
    Tabulated { values: Vec<f64> },
}

/// Quadrature result with the number of points used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    pub points: usize,
    pub converged: bool,
}

impl PhaseDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseDistribution::WrappedGaussian { mu, sigma } => {
                if !mu.is_finite() || !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::Parameter(format!("wrapped Gaussian needs finite mu and sigma > 0, got {sigma}")));
                }
            }
            PhaseDistribution::Uniform => {}
            PhaseDistribution::DiscreteMixture { phases, weights } => {
                if phases.is_empty() || phases.len() != weights.len() {
                    return Err(Error::Parameter("phase mixture needs equal-length nonempty lists".into()));
                }
                if phases.iter().chain(weights).any(|x| !x.is_finite()) || weights.iter().any(|w| *w < 0.0) {
                    return Err(Error::Parameter("phase mixture entries must be finite, weights nonnegative".into()));
                }
            }
            PhaseDistribution::TwoFlat { w, delta } => {
                if !(w.is_finite() && *w > 0.0 && *w <= PI) || !delta.is_finite() {
                    return Err(Error::Parameter(format!("two-flat width must lie in (0, π], got {w}")));
                }
            }
            PhaseDistribution::Tabulated { values } => {
                if values.len() < 2 || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Parameter("tabulated density needs ≥ 2 finite nonnegative samples".into()));
                }
            }
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Trace((total - 1.0).abs()));
        }
        Ok(())
    }

    /// Density value; `None` for sharp mixtures.
    pub fn density(&self, phi: f64) -> Option<f64> {
        let phi = phi.rem_euclid(TAU);
        Some(match self {
            PhaseDistribution::WrappedGaussian { mu, sigma } => {
                let norm = 1.0 / (sigma * TAU.sqrt());
                let reach = (10.0 * sigma / TAU).ceil() as i64 + 1;
                (-reach..=reach)
                    .map(|k| {
                        let x = phi - mu + TAU * k as f64;
                        (-(x * x) / (2.0 * sigma * sigma)).exp()
                    })
                    .sum::<f64>()
                    * norm
            }
            PhaseDistribution::Uniform => 1.0 / TAU,
            PhaseDistribution::DiscreteMixture { .. } => return None,
            PhaseDistribution::TwoFlat { w, delta } => {
                let h = 1.0 / (2.0 * w);
                let within = |centre: f64| {
                    let d = (phi - centre).rem_euclid(TAU);
                    d.min(TAU - d) <= w / 2.0
                };
                h * (within(delta / 2.0) as u8 as f64 + within(TAU - delta / 2.0) as u8 as f64)
            }
            PhaseDistribution::Tabulated { values } => {
                let n = values.len();
                let x = phi / TAU * n as f64;
                let j = (x.floor() as usize) % n;
                let t = x - x.floor();
                values[j] * (1.0 - t) + values[(j + 1) % n] * t
            }
        })
    }

    fn min_points(&self) -> usize {
        match self {
            // resolve narrow peaks: step at most σ/8
            PhaseDistribution::WrappedGaussian { sigma, .. } => {
                let need = (8.0 * TAU / sigma).ceil().min(MAX_POINTS as f64) as usize;
                need.next_power_of_two().max(MIN_POINTS)
            }
            PhaseDistribution::Tabulated { values } => (values.len() * 4).next_power_of_two().max(MIN_POINTS),
            _ => MIN_POINTS,
        }
    }

    /// `∫ p(φ) f(φ) dφ` by periodic trapezoid with doubling.
    fn integrate(&self, f: impl Fn(f64) -> C64) -> Quadrature {
        let mut n = self.min_points();
        let rule = |n: usize| -> C64 {
            let h = TAU / n as f64;
            (0..n).map(|j| {
                let phi = j as f64 * h;
                f(phi) * self.density(phi).unwrap_or(0.0)
            })
            .sum::<C64>()
                * h
        };
        let mut prev = rule(n);
        loop {
            if n >= MAX_POINTS {
                return Quadrature { value: prev, points: n, converged: false };
            }
            n *= 2;
            let next = rule(n);
            if (next - prev).norm() < QUAD_TOL {
                return Quadrature { value: next, points: n, converged: true };
            }
            prev = next;
        }
    }

    /// `∫ p(φ) e^{iφ} dφ` (the first circular moment).
    pub fn circular_moment(&self) -> Quadrature {
        match self {
            PhaseDistribution::DiscreteMixture { phases, weights } => {
                let total: f64 = weights.iter().sum();
                let value = phases.iter().zip(weights).map(|(p, w)| C64::from_polar(w / total, *p)).sum();
                Quadrature { value, points: phases.len(), converged: true }
            }
            PhaseDistribution::TwoFlat { w, delta } => {
                // exact integral of e^{iφ} over each window
                let window = |centre: f64| (C64::from_polar(1.0, centre + w / 2.0) - C64::from_polar(1.0, centre - w / 2.0)) / I;
                let value = (window(delta / 2.0) + window(TAU - delta / 2.0)) / (2.0 * w);
                Quadrature { value, points: 2, converged: true }
            }
            _ => self.integrate(|phi| C64::from_polar(1.0, phi)),
        }
    }

    fn total_mass(&self) -> f64 {
        match self {
            PhaseDistribution::DiscreteMixture { weights, .. } => weights.iter().sum(),
            PhaseDistribution::TwoFlat { .. } | PhaseDistribution::Uniform => 1.0,
            _ => self.integrate(|_| C64::new(1.0, 0.0)).value.re,
        }
    }
}

/// `g = -i ∫ p(φ) e^{iφ} dφ`.
pub fn g_from_phase_dist(p: &PhaseDistribution) -> Result<C64> {
    p.validate()?;
    Ok(-I * p.circular_moment().value)
}

/// The closed form printed for the two-flat family, kept for comparison only.
pub fn two_flat_printed_formula(w: f64, delta: f64) -> f64 {
    (4.0 * w / PI) * (w / 2.0).sin() * (w / 2.0 + delta / 2.0).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_gaussian_gives_full_coherence() {
        let p = PhaseDistribution::WrappedGaussian { mu: 1.3, sigma: 1e-4 };
        let g = g_from_phase_dist(&p).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-6);
        // g = -i e^{iμ}
        assert!((g - (-I * C64::from_polar(1.0, 1.3))).norm() < 1e-6);
    }

    #[test]
    fn uniform_and_antipodal_mixture_vanish() {
        assert!(g_from_phase_dist(&PhaseDistribution::Uniform).unwrap().norm() < 1e-10);
        let p = PhaseDistribution::DiscreteMixture { phases: vec![0.7, 0.7 + PI], weights: vec![0.5, 0.5] };
        assert!(g_from_phase_dist(&p).unwrap().norm() < 1e-10);
    }

    #[test]
    fn wrapped_gaussian_modulus() {
        for sigma in [0.1, 0.5, 1.0, 2.0] {
            let p = PhaseDistribution::WrappedGaussian { mu: 0.4, sigma };
            let g = g_from_phase_dist(&p).unwrap();
            assert!((g.norm() - (-sigma * sigma / 2.0).exp()).abs() < 1e-9, "sigma {sigma}");
        }
    }

    #[test]
    fn two_flat_exact_moment() {
        let (w, delta) = (0.6, 1.1);
        let p = PhaseDistribution::TwoFlat { w, delta };
        let g = g_from_phase_dist(&p).unwrap().norm();
        let want = (2.0 / w) * (w / 2.0).sin() * (delta / 2.0).cos().abs();
        assert!((g - want).abs() < 1e-12);
        // the generic quadrature agrees with the window integral
        let q = p.integrate(|phi| C64::from_polar(1.0, phi));
        assert!((q.value.norm() - want).abs() < 1e-5);
    }

    #[test]
    fn tabulated_uniform_and_validation() {
        let p = PhaseDistribution::Tabulated { values: vec![1.0 / TAU; 16] };
        assert!(g_from_phase_dist(&p).unwrap().norm() < 1e-10);
        let bad = PhaseDistribution::Tabulated { values: vec![1.0; 16] };
        assert!(matches!(bad.validate(), Err(Error::Trace(_))));
        assert!(PhaseDistribution::WrappedGaussian { mu: 0.0, sigma: -1.0 }.validate().is_err());
        let mix = PhaseDistribution::DiscreteMixture { phases: vec![0.0], weights: vec![0.5] };
        assert!(mix.validate().is_err());
    }
}
