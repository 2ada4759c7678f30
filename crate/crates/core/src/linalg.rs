//! Dense complex linear algebra and the two state representations everything
//! else is built on.
//!
//! Subsystems are always addressed by index into an explicit `dims` list; the
//! first entry is the most significant digit of a flattened basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances shared by validation and entropic code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub norm: f64,
    /// Eigenvalues at or below this are outside the support.
    pub supp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-9, trace: 1e-9, psd: 1e-9, norm: 1e-9, supp: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.herm, self.trace, self.psd, self.norm, self.supp];
        if all.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(Error::Parameter("tolerances must be finite and nonnegative".into()))
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `|i><j|` in dimension `d`.
pub fn ketbra(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product with subsystem order `(a, b)`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_all<'a>(ops: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ops.into_iter().fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Digits of a flat index in the mixed radix given by `dims`.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

pub(crate) fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_dims(dims: &[usize], d: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
    }
    let prod = dims.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k));
    if prod != Some(d) {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not multiply to the matrix dimension {d}"
        )));
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let l = self.values[j];
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * self.vectors.adjoint()
    }

    /// Applies `f` to the eigenvalues selected by `keep`, dropping the rest.
    pub fn map_on(&self, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (j, &l) in self.values.iter().enumerate() {
            if keep(l) {
                let v = self.vectors.column(j);
                out += (v * v.adjoint()) * cr(f(l));
            }
        }
        out
    }
}

/// Hermitian eigendecomposition; rejects inputs that are not Hermitian within `tol_herm`.
pub fn eigh_checked(h: &CMatrix, tol_herm: f64) -> Result<Eigh> {
    let defect = hermiticity_defect(h);
    if !(defect <= tol_herm) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eigh(h))
}

/// Hermitian eigendecomposition of the Hermitian part of `h`.
pub fn eigh(h: &CMatrix) -> Eigh {
    let herm = (h + h.adjoint()) * cr(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Positive square root with eigenvalues clipped at zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    eigh(m).map_on(|l| l > 0.0, f64::sqrt)
}

/// A density operator over a tensor product of labelled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates all invariants with default tolerances.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerances(mat, dims, &Tolerances::default())
    }

    pub fn with_tolerances(mat: CMatrix, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        let rho = Self::from_raw(mat, dims)?;
        rho.validate(tol)?;
        Ok(rho)
    }

    /// Checks shape and finiteness only; Hermitian part is taken. Used for
    /// outputs of maps already known to be CPTP.
    pub fn from_raw(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_dims(&dims, mat.nrows())?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DensityMatrix { mat, dims })
    }

    pub(crate) fn raw_hermitized(mat: CMatrix, dims: Vec<usize>) -> Self {
        let mat = (&mat + mat.adjoint()) * cr(0.5);
        DensityMatrix { mat, dims }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let herm = hermiticity_defect(&self.mat);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let tr = (trace(&self.mat) - ONE).norm();
        if tr > tol.trace {
            return Err(Error::Trace(tr));
        }
        let min = self.eigh().values.last().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        DensityMatrix { mat: identity(d) * cr(1.0 / d as f64), dims }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix { mat: projector(&psi.amps), dims: psi.dims.clone() }
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        let d = probs.len();
        let mat = CMatrix::from_fn(d, d, |r, c| if r == c { cr(probs[r]) } else { ZERO });
        Self::new(mat, dims)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn eigh(&self) -> Eigh {
        eigh(&self.mat)
    }

    /// Eigenvalues, descending, with small negative drift clipped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigh().values.into_iter().map(|l| l.max(0.0)).collect()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix { mat: tensor(&self.mat, &other.mat), dims }
    }

    /// Reduced state on the subsystems in `keep` (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if keep.is_empty() {
            return Err(Error::BadSubsystem("keep set is empty".into()));
        }
        if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
            return Err(Error::BadSubsystem(format!("index {bad} out of range for {n} subsystems")));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let out_dims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        let dout: usize = out_dims.iter().product();
        let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();

        let d = self.dim();
        let row_digits: Vec<Vec<usize>> = (0..d).map(|i| digits(i, &self.dims)).collect();
        let kept_index: Vec<usize> = row_digits
            .iter()
            .map(|dg| {
                let sub: Vec<usize> = kept.iter().map(|&k| dg[k]).collect();
                flat_index(&sub, &out_dims)
            })
            .collect();
        let traced_index: Vec<usize> = row_digits
            .iter()
            .map(|dg| traced.iter().fold(0, |acc, &k| acc * self.dims[k] + dg[k]))
            .collect();

        let mut out = CMatrix::zeros(dout, dout);
        for r in 0..d {
            for c in 0..d {
                if traced_index[r] == traced_index[c] {
                    out[(kept_index[r], kept_index[c])] += self.mat[(r, c)];
                }
            }
        }
        Ok(DensityMatrix { mat: out, dims: out_dims })
    }

    /// Conjugation `U rho U^dagger`; `u` must match the total dimension.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch("unitary does not match state dimension".into()));
        }
        Ok(DensityMatrix::raw_hermitized(u * &self.mat * u.adjoint(), self.dims.clone()))
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("mixing states with different dims".into()));
        }
        Ok(DensityMatrix { mat: &self.mat * cr(w) + &other.mat * cr(1.0 - w), dims: self.dims.clone() })
    }

    pub fn distance_max(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(&self.mat - &other.mat))
    }
}

/// Logarithm base 2 restricted to the support (eigenvalues above `tol_supp`).
pub fn matrix_log2(rho: &DensityMatrix, tol_supp: f64) -> CMatrix {
    rho.eigh().map_on(|l| l > tol_supp, f64::log2)
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(amps, dims, Tolerances::default().norm)
    }

    pub fn with_tolerance(amps: CVector, dims: Vec<usize>, tol_norm: f64) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let defect = (amps.norm() - 1.0).abs();
        if defect > tol_norm {
            return Err(Error::Norm(defect));
        }
        Ok(PureState { amps, dims })
    }

    /// Normalizes `amps` first; fails on the zero vector.
    pub fn normalized(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        let n = amps.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Norm(f64::INFINITY));
        }
        Self::new(amps / cr(n), dims)
    }

    pub fn from_slice(amps: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amps), dims)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Self {
        let d = dims.iter().product();
        PureState { amps: ket(d, index), dims }
    }

    /// `sum_k |kk> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        for k in 0..d {
            v[k * d + k] = cr(1.0 / (d as f64).sqrt());
        }
        PureState { amps: v, dims: vec![d, d] }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amps: self.amps.kronecker(&other.amps), dims }
    }

    /// Amplitude matrix `A_ij` of a bipartite state `sum A_ij |i>|j>`.
    pub fn amplitude_matrix(&self) -> Result<CMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a bipartite state, got dims {:?}",
                self.dims
            )));
        }
        let (da, db) = (self.dims[0], self.dims[1]);
        Ok(CMatrix::from_fn(da, db, |i, j| self.amps[i * db + j]))
    }

    pub fn schmidt(&self) -> Result<Schmidt> {
        schmidt(self)
    }
}

#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Descending, strictly positive; squares sum to one.
    pub coefficients: Vec<f64>,
    /// Left Schmidt vectors as columns.
    pub left: CMatrix,
    /// Right Schmidt vectors as columns.
    pub right: CMatrix,
}

/// Schmidt decomposition `psi = sum_l s_l |u_l> |v_l>` via the SVD of the amplitude matrix.
pub fn schmidt(psi: &PureState) -> Result<Schmidt> {
    let a = psi.amplitude_matrix()?;
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    order.retain(|&i| svd.singular_values[i] * svd.singular_values[i] > 1e-14);
    let coefficients = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    // A = U S V^dagger, so the right Schmidt vectors are the rows of V^dagger.
    let right = CMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]);
    Ok(Schmidt { coefficients, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> PureState {
        PureState::maximally_entangled(2)
    }

    #[test]
    fn tensor_identities() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
        let p0 = ketbra(2, 0, 0);
        let p1 = ketbra(2, 1, 1);
        let t = tensor(&p0, &p1);
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == 1 && c == 1 { ONE } else { ZERO };
                assert_eq!(t[(r, c)], want);
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let rho = bell().density();
        let a = rho.partial_trace(&[0]).unwrap();
        assert!(max_abs(&(a.matrix() - identity(2) * cr(0.5))) < 1e-14);
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::BadSubsystem(_))));
        assert!(matches!(rho.partial_trace(&[]), Err(Error::BadSubsystem(_))));
    }

    #[test]
    fn partial_trace_recovers_product_factors() {
        let a = DensityMatrix::diagonal(&[0.3, 0.7], vec![2]).unwrap();
        let b = DensityMatrix::diagonal(&[0.1, 0.5, 0.4], vec![3]).unwrap();
        let ab = a.tensor(&b);
        assert!(ab.partial_trace(&[0]).unwrap().distance_max(&a) < 1e-12);
        assert!(ab.partial_trace(&[1]).unwrap().distance_max(&b) < 1e-12);
    }

    #[test]
    fn eigh_textbook_cases() {
        let e = eigh(&CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.3), cr(0.7)])));
        assert!((e.values[0] - 0.7).abs() < 1e-15 && (e.values[1] - 0.3).abs() < 1e-15);

        let e = eigh(&pauli_x());
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let plus = e.vectors.column(0);
        assert!((plus[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(((plus[0] - plus[1]).norm()) < 1e-12);

        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(eigh_checked(&bad, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn log2_cases() {
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert!(max_abs(&(matrix_log2(&mixed, 1e-10) + identity(2))) < 1e-14);
        let pure = PureState::basis(vec![2], 0).density();
        assert!(max_abs(&matrix_log2(&pure, 1e-10)) < 1e-14);
        let d = DensityMatrix::diagonal(&[0.25, 0.75], vec![2]).unwrap();
        let l = matrix_log2(&d, 1e-10);
        assert!((l[(0, 0)].re + 2.0).abs() < 1e-14);
        assert!((l[(1, 1)].re - 0.75f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn schmidt_cases() {
        let s = bell().schmidt().unwrap();
        assert_eq!(s.coefficients.len(), 2);
        for w in &s.coefficients {
            assert!((w - 0.5f64.sqrt()).abs() < 1e-14);
        }
        let prod = PureState::basis(vec![2, 2], 1).schmidt().unwrap();
        assert_eq!(prod.coefficients.len(), 1);
        assert!((prod.coefficients[0] - 1.0).abs() < 1e-14);
        let tri = PureState::basis(vec![2, 2, 2], 0);
        assert!(tri.schmidt().is_err());
    }

    #[test]
    fn density_validation_reports_the_violated_invariant() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(0.5), cr(0.4)]));
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(Error::Trace(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![cr(1.2), cr(-0.2)]));
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(Error::NotPositive(_))));
        let m = CMatrix::from_row_slice(2, 2, &[cr(0.5), ONE, ZERO, cr(0.5)]);
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(Error::NotHermitian(_))));
        assert!(matches!(DensityMatrix::new(identity(4) * cr(0.25), vec![2, 3]), Err(Error::DimensionMismatch(_))));
    }
}
