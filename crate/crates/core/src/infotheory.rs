//! Shannon and von Neumann entropies, relative entropies with an explicit
//! infinite value, and the derived bipartite quantities. All logs are base 2.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Tolerances};

/// A real number in bits or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::Infinite => None,
        }
    }

    /// As `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn max(self, other: ExtendedReal) -> ExtendedReal {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a.max(b)),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity literal, so `+∞` travels as the string "inf".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ExtendedReal::Finite(x)),
            Repr::Str(s) if s == "inf" => Ok(ExtendedReal::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Parameter("probabilities must be finite and nonnegative".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Trace((s - 1.0).abs()));
        }
        Ok(Distribution(p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `-sum p log p` over any nonnegative weights.
pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_bits(&p.0)
}

/// Binary entropy `h(x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_bits(&[x, 1.0 - x])
}

pub fn classical_rel_entropy(p: &Distribution, q: &Distribution) -> Result<ExtendedReal> {
    classical_rel_entropy_tol(p, q, Tolerances::default().supp)
}

pub fn classical_rel_entropy_tol(p: &Distribution, q: &Distribution, tol_supp: f64) -> Result<ExtendedReal> {
    if p.0.len() != q.0.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", p.0.len(), q.0.len())));
    }
    let mut acc = 0.0;
    for (&pk, &qk) in p.0.iter().zip(&q.0) {
        if pk <= tol_supp {
            continue;
        }
        if qk <= tol_supp {
            return Ok(ExtendedReal::Infinite);
        }
        acc += pk * (pk.log2() - qk.log2());
    }
    Ok(ExtendedReal::Finite(acc))
}

pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(&rho.spectrum())
}

pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    rel_entropy_tol(rho, sigma, Tolerances::default().supp)
}

/// `Tr ρ(log ρ - log σ)`, infinite when `Tr[P_ker(σ) ρ] > tol_supp`.
pub fn rel_entropy_tol(rho: &DensityMatrix, sigma: &DensityMatrix, tol_supp: f64) -> Result<ExtendedReal> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("dimensions {} and {}", rho.dim(), sigma.dim())));
    }
    let r = rho.eigh();
    let s = sigma.eigh();
    let overlap = r.vectors.adjoint() * &s.vectors;

    let mut kernel_weight = 0.0;
    for (j, &sj) in s.values.iter().enumerate() {
        if sj > tol_supp {
            continue;
        }
        for (i, &li) in r.values.iter().enumerate() {
            if li > 0.0 {
                kernel_weight += li * overlap[(i, j)].norm_sqr();
            }
        }
    }
    if kernel_weight > tol_supp {
        return Ok(ExtendedReal::Infinite);
    }

    let mut acc = 0.0;
    for (i, &li) in r.values.iter().enumerate() {
        if li <= tol_supp {
            continue;
        }
        acc += li * li.log2();
        for (j, &sj) in s.values.iter().enumerate() {
            if sj > tol_supp {
                acc -= li * overlap[(i, j)].norm_sqr() * sj.log2();
            }
        }
    }
    Ok(ExtendedReal::Finite(acc))
}

fn complement(n: usize, part: &[usize]) -> Result<Vec<usize>> {
    if part.is_empty() || part.iter().any(|&k| k >= n) {
        return Err(Error::BadSubsystem(format!("{part:?} is not a valid part of {n} subsystems")));
    }
    let rest: Vec<usize> = (0..n).filter(|k| !part.contains(k)).collect();
    if rest.is_empty() {
        return Err(Error::BadSubsystem("bipartition leaves the other side empty".into()));
    }
    Ok(rest)
}

/// `S(A|B) = S(AB) - S(B)` with `B = part_b` and `A` its complement.
pub fn conditional_entropy(rho: &DensityMatrix, part_b: &[usize]) -> Result<f64> {
    complement(rho.dims().len(), part_b)?;
    Ok(vn_entropy(rho) - vn_entropy(&rho.partial_trace(part_b)?))
}

/// `S(A) + S(B) - S(AB)` with `A = part_a`.
pub fn mutual_information(rho: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    let part_b = complement(rho.dims().len(), part_a)?;
    let sa = vn_entropy(&rho.partial_trace(part_a)?);
    let sb = vn_entropy(&rho.partial_trace(&part_b)?);
    Ok(sa + sb - vn_entropy(rho))
}

/// Superdense coding capacity `log d_A - S(A|B)` with `A = sender`.
pub fn coding_capacity(rho: &DensityMatrix, sender: &[usize]) -> Result<f64> {
    let receiver = complement(rho.dims().len(), sender)?;
    let d_a: usize = sender.iter().map(|&k| rho.dims()[k]).product();
    Ok((d_a as f64).log2() - conditional_entropy(rho, &receiver)?)
}
