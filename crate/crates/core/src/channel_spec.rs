//! Declarative channel descriptions loaded from JSON.
//!
//! ```json
//! {"kind": "compose", "stages": [
//!     {"kind": "gate", "params": {"name": "cnot_pm"}},
//!     {"kind": "depolarizing", "params": {"mu": 0.5, "dims": [2, 2]}}
//! ]}
//! ```
//!
//! Floats survive a save/load cycle bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{
    amplitude_damping, bec_channel, bec_induced, depolarizing, phase_damping, streltsov_map, EinselectionSpec, Gate,
    QuantumChannel,
};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Largest input or output dimension a spec may describe.
pub const MAX_SPEC_DIM: usize = 256;
/// Depolarizing uses `d²` Kraus operators, so it gets a tighter cap.
pub const MAX_DEPOLARIZING_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let part = |f: fn(&C64) -> f64| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect();
        let im: Vec<Vec<f64>> = part(|z| z.im);
        let real = im.iter().flatten().all(|x| *x == 0.0);
        MatrixDoc { re: part(|z| z.re), im: if real { None } else { Some(im) } }
    }

    fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        let shaped = |m: &Vec<Vec<f64>>| m.len() == rows && m.iter().all(|r| r.len() == cols);
        if !shaped(&self.re) || self.im.as_ref().is_some_and(|m| !shaped(m)) {
            return Err(Error::DimensionMismatch(format!("Kraus operator must be {rows}x{cols}")));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            C64::new(self.re[r][c], self.im.as_ref().map_or(0.0, |m| m[r][c]))
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateName {
    Hadamard,
    PauliX,
    Rx,
    Rz,
    Phase,
    Cnot,
    CnotPm,
    Swap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub name: GateName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaParams {
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingParams {
    pub mu: f64,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimsParams {
    pub dims: Vec<usize>,
}

/// Coherence `g = g_re + i g_im` and evolution angle `ωt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BecParams {
    pub g_re: f64,
    pub g_im: f64,
    pub omega_t: f64,
}

/// Computational-basis dephasing on `measured` (or on all subsystems).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinselectionParams {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Kraus { dims_in: Vec<usize>, dims_out: Vec<usize>, ops: Vec<MatrixDoc> },
    /// Applied left to right.
    Compose { stages: Vec<ChannelSpec> },
    Tensor { factors: Vec<ChannelSpec> },
    AmplitudeDamping { params: GammaParams },
    PhaseDamping { params: LambdaParams },
    Depolarizing { params: DepolarizingParams },
    Identity { params: DimsParams },
    Gate { params: GateParams },
    Bec { params: BecParams },
    BecInduced { params: BecParams },
    Streltsov,
    Einselection { params: EinselectionParams },
}

fn bounded_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .filter(|&d| d <= MAX_SPEC_DIM)
        .ok_or_else(|| Error::DimensionMismatch(format!("dims {dims:?} exceed the limit {MAX_SPEC_DIM}")))
}

fn angle(p: &GateParams) -> Result<f64> {
    match p.angle {
        Some(a) if a.is_finite() => Ok(a),
        Some(_) => Err(Error::NonFinite),
        None => Err(Error::Parameter(format!("gate {:?} needs an angle", p.name))),
    }
}

impl ChannelSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel specs always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds the channel and requires trace preservation.
    pub fn build(&self) -> Result<QuantumChannel> {
        let ch = self.build_unchecked()?;
        let defect = ch.tp_defect();
        if !(defect <= crate::channels::TP_TOL) {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ch)
    }

    /// Builds the channel with shape checks only.
    pub fn build_unchecked(&self) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Kraus { dims_in, dims_out, ops } => {
                let (d_in, d_out) = (bounded_dim(dims_in)?, bounded_dim(dims_out)?);
                let kraus = ops.iter().map(|m| m.to_matrix(d_out, d_in)).collect::<Result<Vec<_>>>()?;
                QuantumChannel::unchecked(kraus, dims_in.clone(), dims_out.clone())
            }
            ChannelSpec::Compose { stages } => {
                let (first, rest) =
                    stages.split_first().ok_or_else(|| Error::Parameter("compose needs at least one stage".into()))?;
                rest.iter().try_fold(first.build_unchecked()?, |acc, s| acc.then(&s.build_unchecked()?))
            }
            ChannelSpec::Tensor { factors } => {
                let (first, rest) =
                    factors.split_first().ok_or_else(|| Error::Parameter("tensor needs at least one factor".into()))?;
                rest.iter().try_fold(first.build_unchecked()?, |acc, f| {
                    let next = f.build_unchecked()?;
                    let mut dims_in = acc.dims_in().to_vec();
                    dims_in.extend_from_slice(next.dims_in());
                    let mut dims_out = acc.dims_out().to_vec();
                    dims_out.extend_from_slice(next.dims_out());
                    bounded_dim(&dims_in)?;
                    bounded_dim(&dims_out)?;
                    Ok(acc.tensor(&next))
                })
            }
            ChannelSpec::AmplitudeDamping { params } => amplitude_damping(params.gamma),
            ChannelSpec::PhaseDamping { params } => phase_damping(params.lambda),
            ChannelSpec::Depolarizing { params } => {
                if bounded_dim(&params.dims)? > MAX_DEPOLARIZING_DIM {
                    return Err(Error::DimensionMismatch(format!(
                        "depolarizing specs are limited to dimension {MAX_DEPOLARIZING_DIM}"
                    )));
                }
                depolarizing(params.mu, params.dims.clone())
            }
            ChannelSpec::Identity { params } => {
                bounded_dim(&params.dims)?;
                Ok(QuantumChannel::identity(params.dims.clone()))
            }
            ChannelSpec::Gate { params } => {
                let gate = match params.name {
                    GateName::Hadamard => Gate::Hadamard,
                    GateName::PauliX => Gate::PauliX,
                    GateName::Rx => Gate::Rx(angle(params)?),
                    GateName::Rz => Gate::Rz(angle(params)?),
                    GateName::Phase => Gate::Phase(angle(params)?),
                    GateName::Cnot => Gate::Cnot,
                    GateName::CnotPm => Gate::CnotPm,
                    GateName::Swap => Gate::Swap,
                };
                Ok(gate.channel())
            }
            ChannelSpec::Bec { params } => bec_channel(C64::new(params.g_re, params.g_im), params.omega_t),
            ChannelSpec::BecInduced { params } => bec_induced(C64::new(params.g_re, params.g_im), params.omega_t),
            ChannelSpec::Streltsov => Ok(streltsov_map()),
            ChannelSpec::Einselection { params } => {
                bounded_dim(&params.dims)?;
                let spec = match params.measured {
                    None => EinselectionSpec::computational(&params.dims),
                    Some(k) if k < params.dims.len() => EinselectionSpec::one_sided(&params.dims, k),
                    Some(k) => return Err(Error::BadSubsystem(format!("subsystem {k} of {:?}", params.dims))),
                };
                Ok(spec.channel())
            }
        }
    }

    /// A Kraus spec reproducing `ch` exactly.
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        ChannelSpec::Kraus {
            dims_in: ch.dims_in().to_vec(),
            dims_out: ch.dims_out().to_vec(),
            ops: ch.kraus().iter().map(MatrixDoc::from_matrix).collect(),
        }
    }
}
