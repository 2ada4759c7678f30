//! JSON state files and invariant reports.
//!
//! A density matrix is `{"dims": [...], "re": [[...]], "im": [[...]]}` and a
//! pure state is `{"dims": [...], "re": [...], "im": [...]}`. `im` may be
//! omitted for real data. An optional `local_numbers` array gives each
//! subsystem's particle number per basis level.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel_spec::ChannelSpec;
use crate::entanglement::LocalGrading;
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, trace, CMatrix, CVector, DensityMatrix, PureState, Tolerances, C64, ONE};

/// Largest Hilbert-space dimension accepted from a file.
pub const MAX_FILE_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealData {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub dims: Vec<usize>,
    pub re: RealData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<RealData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_numbers: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            LoadedState::Pure(p) => p.density(),
            LoadedState::Mixed(m) => m.clone(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            LoadedState::Pure(p) => p.dims(),
            LoadedState::Mixed(m) => m.dims(),
        }
    }
}

/// A validated state with its optional number grading.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub state: LoadedState,
    pub grading: Option<LocalGrading>,
}

fn checked_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
    }
    let d = dims
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .filter(|&d| d <= MAX_FILE_DIM)
        .ok_or_else(|| Error::DimensionMismatch(format!("dims {dims:?} exceed the limit {MAX_FILE_DIM}")))?;
    Ok(d)
}

enum Raw {
    Vector(CVector),
    Matrix(CMatrix),
}

fn to_raw(doc: &StateDoc) -> Result<Raw> {
    let d = checked_dim(&doc.dims)?;
    match (&doc.re, &doc.im) {
        (RealData::Vector(re), im) => {
            let im = match im {
                None => vec![0.0; re.len()],
                Some(RealData::Vector(v)) => v.clone(),
                Some(RealData::Matrix(_)) => return Err(Error::Format("'re' is a vector but 'im' is a matrix".into())),
            };
            if re.len() != d || im.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "dims {:?} need {d} amplitudes, got {} real and {} imaginary",
                    doc.dims,
                    re.len(),
                    im.len()
                )));
            }
            Ok(Raw::Vector(CVector::from_fn(d, |i, _| C64::new(re[i], im[i]))))
        }
        (RealData::Matrix(re), im) => {
            let zeros;
            let im = match im {
                None => {
                    zeros = vec![vec![0.0; d]; re.len().min(d)];
                    &zeros
                }
                Some(RealData::Matrix(m)) => m,
                Some(RealData::Vector(_)) => return Err(Error::Format("'re' is a matrix but 'im' is a vector".into())),
            };
            let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
            if !square(re) || !square(im) {
                return Err(Error::DimensionMismatch(format!("dims {:?} need a {d}x{d} matrix", doc.dims)));
            }
            Ok(Raw::Matrix(CMatrix::from_fn(d, d, |r, c| C64::new(re[r][c], im[r][c]))))
        }
    }
}

fn grading(doc: &StateDoc) -> Result<Option<LocalGrading>> {
    doc.local_numbers.as_ref().map(|n| LocalGrading::new(n.clone(), &doc.dims)).transpose()
}

/// Parses and validates a state document.
pub fn parse_state(json: &str) -> Result<StateFile> {
    let doc: StateDoc = serde_json::from_str(json)?;
    state_from_doc(&doc)
}

pub fn state_from_doc(doc: &StateDoc) -> Result<StateFile> {
    let state = match to_raw(doc)? {
        Raw::Vector(v) => LoadedState::Pure(PureState::new(v, doc.dims.clone())?),
        Raw::Matrix(m) => LoadedState::Mixed(DensityMatrix::new(m, doc.dims.clone())?),
    };
    Ok(StateFile { state, grading: grading(doc)? })
}

pub fn load_state(path: &Path) -> Result<StateFile> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn density_doc(rho: &DensityMatrix) -> StateDoc {
    let m = rho.matrix();
    let part = |f: fn(&C64) -> f64| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect();
    StateDoc {
        dims: rho.dims().to_vec(),
        re: RealData::Matrix(part(|z| z.re)),
        im: Some(RealData::Matrix(part(|z| z.im))),
        local_numbers: None,
    }
}

pub fn pure_doc(psi: &PureState) -> StateDoc {
    let a = psi.amplitudes();
    StateDoc {
        dims: psi.dims().to_vec(),
        re: RealData::Vector(a.iter().map(|z| z.re).collect()),
        im: Some(RealData::Vector(a.iter().map(|z| z.im).collect())),
        local_numbers: None,
    }
}

/// One named invariant and whether it holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `"pure_state"`, `"density_matrix"` or `"channel"`.
    pub kind: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

fn validate_state_doc(doc: &StateDoc, tol: &Tolerances) -> ValidationReport {
    let mut rep = ValidationReport { kind: String::new(), checks: vec![] };
    let raw = match to_raw(doc) {
        Ok(r) => {
            rep.push("shape", true, format!("dims {:?}", doc.dims));
            r
        }
        Err(e) => {
            rep.kind = "state".into();
            rep.push("shape", false, e.to_string());
            return rep;
        }
    };
    match raw {
        Raw::Vector(v) => {
            rep.kind = "pure_state".into();
            let finite = v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
            rep.push("finite", finite, if finite { "all entries finite" } else { "non-finite entry" });
            if finite {
                let defect = (v.norm() - 1.0).abs();
                rep.push("norm", defect <= tol.norm, format!("| ‖ψ‖ − 1 | = {defect:e} (tolerance {:e})", tol.norm));
            }
        }
        Raw::Matrix(m) => {
            rep.kind = "density_matrix".into();
            let finite = m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
            rep.push("finite", finite, if finite { "all entries finite" } else { "non-finite entry" });
            if finite {
                let herm = hermiticity_defect(&m);
                rep.push("hermitian", herm <= tol.herm, format!("max |ρ − ρ†| = {herm:e} (tolerance {:e})", tol.herm));
                let tr = trace(&m);
                let tdef = (tr - ONE).norm();
                rep.push("trace", tdef <= tol.trace, format!("Tr ρ = {} (defect {tdef:e}, tolerance {:e})", tr.re, tol.trace));
                let min = crate::linalg::eigh(&m).values.last().copied().unwrap_or(0.0);
                rep.push(
                    "positive",
                    min >= -tol.psd,
                    format!("smallest eigenvalue {min:e} (tolerance {:e})", tol.psd),
                );
            }
        }
    }
    if doc.local_numbers.is_some() {
        match grading(doc) {
            Ok(_) => rep.push("local_numbers", true, "grading matches dims"),
            Err(e) => rep.push("local_numbers", false, e.to_string()),
        }
    }
    rep
}

fn validate_channel_spec(spec: &ChannelSpec) -> ValidationReport {
    let mut rep = ValidationReport { kind: "channel".into(), checks: vec![] };
    match spec.build_unchecked() {
        Ok(ch) => {
            rep.push("shape", true, format!("{:?} -> {:?}, {} Kraus operators", ch.dims_in(), ch.dims_out(), ch.kraus().len()));
            let finite = ch.kraus().iter().all(|k| k.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            rep.push("finite", finite, if finite { "all entries finite" } else { "non-finite entry" });
            if finite {
                let defect = ch.tp_defect();
                rep.push(
                    "trace_preserving",
                    defect <= crate::channels::TP_TOL,
                    format!("max |Σ K†K − I| = {defect:e} (tolerance {:e})", crate::channels::TP_TOL),
                );
            }
        }
        Err(e) => rep.push("shape", false, e.to_string()),
    }
    rep
}

/// Parses a state or channel document and reports every invariant without
/// stopping at the first failure. Only malformed JSON is an error.
pub fn validate_json(json: &str, tol: &Tolerances) -> Result<ValidationReport> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if value.get("kind").is_some() {
        let spec: ChannelSpec = serde_json::from_value(value)?;
        Ok(validate_channel_spec(&spec))
    } else {
        let doc: StateDoc = serde_json::from_value(value)?;
        Ok(validate_state_doc(&doc, tol))
    }
}

pub fn validate_file(path: &Path, tol: &Tolerances) -> Result<ValidationReport> {
    validate_json(&std::fs::read_to_string(path)?, tol)
}
