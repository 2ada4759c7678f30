//! Completely positive trace-preserving maps, their Choi states, the
//! state-map duality and a catalog of named channels and gates.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{
    c, cr, identity, ket, ketbra, max_abs, pauli_x, projector, tensor, unitarity_defect, CMatrix, CVector,
    DensityMatrix, Tolerances, C64, I, ONE, ZERO,
};

/// Largest Kraus trace-preservation defect accepted on construction.
pub const TP_TOL: f64 = 1e-9;

/// `max |sum K^dagger K - I|`; infinite if the shapes are inconsistent.
pub fn tp_defect(kraus: &[CMatrix], d_in: usize) -> f64 {
    let mut acc = CMatrix::zeros(d_in, d_in);
    for k in kraus {
        if k.ncols() != d_in {
            return f64::INFINITY;
        }
        acc += k.adjoint() * k;
    }
    max_abs(&(acc - identity(d_in)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dims_in: Vec<usize>,
    dims_out: Vec<usize>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>, dims_in: Vec<usize>, dims_out: Vec<usize>) -> Result<Self> {
        let ch = Self::unchecked(kraus, dims_in, dims_out)?;
        let defect = tp_defect(&ch.kraus, ch.d_in());
        if !(defect <= TP_TOL) {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ch)
    }

    /// Shape checks only; used where trace preservation is reported rather than enforced.
    pub fn unchecked(kraus: Vec<CMatrix>, dims_in: Vec<usize>, dims_out: Vec<usize>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Parameter("a channel needs at least one Kraus operator".into()));
        }
        if dims_in.is_empty() || dims_out.is_empty() || dims_in.contains(&0) || dims_out.contains(&0) {
            return Err(Error::DimensionMismatch("channel dims must be nonempty and positive".into()));
        }
        let prod = |d: &[usize]| {
            d.iter()
                .try_fold(1usize, |acc, &k| acc.checked_mul(k))
                .ok_or_else(|| Error::DimensionMismatch(format!("dims {d:?} overflow")))
        };
        let (d_in, d_out) = (prod(&dims_in)?, prod(&dims_out)?);
        for (n, k) in kraus.iter().enumerate() {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {n} is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(QuantumChannel { kraus, dims_in, dims_out })
    }

    pub fn unitary(u: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let defect = unitarity_defect(&u);
        if !(defect <= TP_TOL) {
            return Err(Error::NotUnitary(defect));
        }
        Self::new(vec![u], dims.clone(), dims)
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        QuantumChannel { kraus: vec![identity(d)], dims_in: dims.clone(), dims_out: dims }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dims_in(&self) -> &[usize] {
        &self.dims_in
    }

    pub fn dims_out(&self) -> &[usize] {
        &self.dims_out
    }

    pub fn d_in(&self) -> usize {
        self.dims_in.iter().product()
    }

    pub fn d_out(&self) -> usize {
        self.dims_out.iter().product()
    }

    pub fn tp_defect(&self) -> f64 {
        tp_defect(&self.kraus, self.d_in())
    }

    /// Same Kraus operators with relabelled subsystem structure.
    pub fn with_dims(mut self, dims_in: Vec<usize>, dims_out: Vec<usize>) -> Result<Self> {
        if dims_in.iter().product::<usize>() != self.d_in() || dims_out.iter().product::<usize>() != self.d_out() {
            return Err(Error::DimensionMismatch("relabelled dims must keep total dimensions".into()));
        }
        self.dims_in = dims_in;
        self.dims_out = dims_out;
        Ok(self)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dims() != self.dims_in.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "channel expects dims {:?}, state has {:?}",
                self.dims_in,
                rho.dims()
            )));
        }
        Ok(DensityMatrix::raw_hermitized(self.apply_matrix(rho.matrix()), self.dims_out.clone()))
    }

    /// `sum K X K^dagger` for an arbitrary operator `X` of matching size.
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out(), self.d_out());
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture adjoint `sum K^dagger Y K`.
    pub fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_in(), self.d_in());
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// `next` after `self`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if next.d_in() != self.d_out() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose: output dimension {} feeds input dimension {}",
                self.d_out(),
                next.d_in()
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        let ch = QuantumChannel { kraus, dims_in: self.dims_in.clone(), dims_out: next.dims_out.clone() };
        Ok(ch.compressed())
    }

    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor(a, b));
            }
        }
        let mut dims_in = self.dims_in.clone();
        dims_in.extend_from_slice(&other.dims_in);
        let mut dims_out = self.dims_out.clone();
        dims_out.extend_from_slice(&other.dims_out);
        QuantumChannel { kraus, dims_in, dims_out }.compressed()
    }

    /// Re-expresses the channel with the minimal number of Kraus operators
    /// when the current list exceeds the Choi rank bound.
    pub fn compressed(self) -> QuantumChannel {
        if self.kraus.len() <= self.d_in() * self.d_out() {
            return self;
        }
        let choi = self.choi();
        kraus_from_choi_unvalidated(&choi, Tolerances::default().supp * 1e-3)
    }

    pub fn choi(&self) -> ChoiMatrix {
        let d_in = self.d_in();
        let d_out = self.d_out();
        let d = d_in * d_out;
        let mut m = CMatrix::zeros(d, d);
        for k in &self.kraus {
            // vec(K) with index o*d_in + i
            let v = CVector::from_fn(d, |r, _| k[(r / d_in, r % d_in)]);
            m += &v * v.adjoint();
        }
        m /= cr(d_in as f64);
        let mut dims = self.dims_out.clone();
        dims.extend_from_slice(&self.dims_in);
        ChoiMatrix {
            state: DensityMatrix::raw_hermitized(m, dims),
            dims_in: self.dims_in.clone(),
            dims_out: self.dims_out.clone(),
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.d_in() == self.d_out() && self.choi().state.spectrum().get(1).map_or(true, |l| *l <= tol)
    }
}

/// Normalized Choi state on `dims_out ++ dims_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    state: DensityMatrix,
    dims_in: Vec<usize>,
    dims_out: Vec<usize>,
}

impl ChoiMatrix {
    pub fn new(state: DensityMatrix, dims_in: Vec<usize>, dims_out: Vec<usize>) -> Result<Self> {
        let mut expect = dims_out.clone();
        expect.extend_from_slice(&dims_in);
        if state.dims() != expect.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "Choi state dims {:?} do not equal out ++ in = {expect:?}",
                state.dims()
            )));
        }
        state.validate(&Tolerances::default())?;
        let n_out = dims_out.len();
        let keep: Vec<usize> = (n_out..expect.len()).collect();
        let marginal = state.partial_trace(&keep)?;
        let d_in: usize = dims_in.iter().product();
        let defect = max_abs(&(marginal.matrix() - identity(d_in) * cr(1.0 / d_in as f64)));
        if defect > TP_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ChoiMatrix { state, dims_in, dims_out })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dims_in(&self) -> &[usize] {
        &self.dims_in
    }

    pub fn dims_out(&self) -> &[usize] {
        &self.dims_out
    }
}

/// Kraus operators from the Choi eigendecomposition, one per eigenvalue above `tol_supp`.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol_supp: f64) -> Result<QuantumChannel> {
    let min = choi.state.eigh().values.last().copied().unwrap_or(0.0);
    if min < -Tolerances::default().psd {
        return Err(Error::NotPositive(min));
    }
    let ch = kraus_from_choi_unvalidated(choi, tol_supp);
    let defect = ch.tp_defect();
    if defect > 1e-8 {
        return Err(Error::NotTracePreserving(defect));
    }
    Ok(ch)
}

fn kraus_from_choi_unvalidated(choi: &ChoiMatrix, tol_supp: f64) -> QuantumChannel {
    let d_in: usize = choi.dims_in.iter().product();
    let d_out: usize = choi.dims_out.iter().product();
    let e = choi.state.eigh();
    let mut kraus = Vec::new();
    for (j, &l) in e.values.iter().enumerate() {
        if l <= tol_supp {
            continue;
        }
        let scale = (d_in as f64 * l).sqrt();
        let v = e.vectors.column(j);
        kraus.push(CMatrix::from_fn(d_out, d_in, |o, i| v[o * d_in + i] * scale));
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(d_out, d_in));
    }
    QuantumChannel { kraus, dims_in: choi.dims_in.clone(), dims_out: choi.dims_out.clone() }
}

/// Kraus family `K_kl = sqrt(mu_l) <e_k| U |e_l>` for a system coupled to an
/// environment prepared in `rho_env`. `u` acts on system (first) then environment.
pub fn dilation_kraus(u: &CMatrix, dims_sys: Vec<usize>, rho_env: &DensityMatrix) -> Result<QuantumChannel> {
    let d_s: usize = dims_sys.iter().product();
    let d_e = rho_env.dim();
    if u.nrows() != d_s * d_e || u.ncols() != d_s * d_e {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, system x environment is {}",
            u.nrows(),
            u.ncols(),
            d_s * d_e
        )));
    }
    let defect = unitarity_defect(u);
    if defect > TP_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let env = rho_env.eigh();
    let basis = &env.vectors;
    let mut kraus = Vec::new();
    for (l, &mu) in env.values.iter().enumerate() {
        if mu <= Tolerances::default().supp {
            continue;
        }
        let s = cr(mu.sqrt());
        for k in 0..d_e {
            let op = CMatrix::from_fn(d_s, d_s, |a, b| {
                let mut acc = ZERO;
                for x in 0..d_e {
                    for y in 0..d_e {
                        acc += basis[(x, k)].conj() * u[(a * d_e + x, b * d_e + y)] * basis[(y, l)];
                    }
                }
                acc * s
            });
            kraus.push(op);
        }
    }
    QuantumChannel::new(kraus, dims_sys.clone(), dims_sys)
}

/// Dual map of a bipartite operator: `S_rho(sigma) = sum rho_klmn sigma_kl |m><n|`
/// with `rho_klmn = <k m| rho |l n>`. Maps operators on the first factor to the second.
pub fn state_dual_apply(rho: &DensityMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    if rho.dims().len() != 2 {
        return Err(Error::DimensionMismatch("dual map needs a bipartite state".into()));
    }
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    if sigma.nrows() != da || sigma.ncols() != da {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, first factor has dimension {da}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let r = rho.matrix();
    Ok(CMatrix::from_fn(db, db, |m, n| {
        let mut acc = ZERO;
        for k in 0..da {
            for l in 0..da {
                acc += r[(k * db + m, l * db + n)] * sigma[(k, l)];
            }
        }
        acc
    }))
}

/// Pointer basis for one subsystem, or no dephasing on it.
#[derive(Debug, Clone, PartialEq)]
pub enum Pointer {
    Identity(usize),
    Basis(Vec<CVector>),
}

impl Pointer {
    pub fn dim(&self) -> usize {
        match self {
            Pointer::Identity(d) => *d,
            Pointer::Basis(b) => b.first().map_or(0, |v| v.len()),
        }
    }

    fn projectors(&self) -> Vec<CMatrix> {
        match self {
            Pointer::Identity(d) => vec![identity(*d)],
            Pointer::Basis(b) => b.iter().map(projector).collect(),
        }
    }
}

/// Per-subsystem einselection; `Γ(ρ) = sum_α Π_α ρ Π_α` over product projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EinselectionSpec {
    parts: Vec<Pointer>,
}

impl EinselectionSpec {
    pub fn new(parts: Vec<Pointer>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Parameter("einselection needs at least one subsystem".into()));
        }
        for p in &parts {
            match p {
                Pointer::Identity(0) => return Err(Error::DimensionMismatch("zero-dimensional subsystem".into())),
                Pointer::Identity(_) => {}
                Pointer::Basis(b) => {
                    let d = b.len();
                    if d == 0 || b.iter().any(|v| v.len() != d) {
                        return Err(Error::BadBasis(f64::INFINITY));
                    }
                    let m = CMatrix::from_fn(d, d, |r, col| b[col][r]);
                    let defect = unitarity_defect(&m);
                    if defect > 1e-10 {
                        return Err(Error::BadBasis(defect));
                    }
                }
            }
        }
        Ok(EinselectionSpec { parts })
    }

    pub fn computational(dims: &[usize]) -> Self {
        let parts = dims.iter().map(|&d| Pointer::Basis((0..d).map(|i| ket(d, i)).collect())).collect();
        EinselectionSpec { parts }
    }

    /// Computational basis on subsystem `measured`, identity elsewhere.
    pub fn one_sided(dims: &[usize], measured: usize) -> Self {
        let parts = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                if k == measured {
                    Pointer::Basis((0..d).map(|i| ket(d, i)).collect())
                } else {
                    Pointer::Identity(d)
                }
            })
            .collect();
        EinselectionSpec { parts }
    }

    /// Basis given by the columns of a unitary on each listed subsystem.
    pub fn from_unitaries(us: &[Option<CMatrix>], dims: &[usize]) -> Result<Self> {
        let parts = us
            .iter()
            .zip(dims)
            .map(|(u, &d)| match u {
                Some(u) => Pointer::Basis((0..u.ncols()).map(|j| u.column(j).into_owned()).collect()),
                None => Pointer::Identity(d),
            })
            .collect();
        Self::new(parts)
    }

    pub fn parts(&self) -> &[Pointer] {
        &self.parts
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(Pointer::dim).collect()
    }

    /// True when every subsystem has a pointer basis (all projectors rank one).
    pub fn is_full(&self) -> bool {
        self.parts.iter().all(|p| matches!(p, Pointer::Basis(_)))
    }

    /// Product projectors `Π_α` on the full space.
    pub fn projectors(&self) -> Vec<CMatrix> {
        let mut out = vec![CMatrix::identity(1, 1)];
        for p in &self.parts {
            let local = p.projectors();
            out = out.iter().flat_map(|a| local.iter().map(move |b| tensor(a, b))).collect();
        }
        out
    }

    pub fn channel(&self) -> QuantumChannel {
        let dims = self.dims();
        QuantumChannel { kraus: self.projectors(), dims_in: dims.clone(), dims_out: dims }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dims() != self.dims().as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "einselection over {:?} applied to state with dims {:?}",
                self.dims(),
                rho.dims()
            )));
        }
        Ok(DensityMatrix::raw_hermitized(self.apply_matrix(rho.matrix()), rho.dims().to_vec()))
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        if self.is_computational() {
            let mut out = CMatrix::zeros(x.nrows(), x.ncols());
            for i in 0..x.nrows() {
                out[(i, i)] = x[(i, i)];
            }
            return out;
        }
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for p in self.projectors() {
            out += &p * x * &p;
        }
        out
    }

    fn is_computational(&self) -> bool {
        self.parts.iter().all(|p| match p {
            Pointer::Basis(b) => b.iter().enumerate().all(|(i, v)| {
                v.iter().enumerate().all(|(j, z)| if i == j { *z == ONE } else { *z == ZERO })
            }),
            Pointer::Identity(_) => false,
        })
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Parameter(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

/// `E0 = |0><0| + sqrt(1-γ)|1><1|`, `E1 = sqrt(γ)|0><1|`.
pub fn amplitude_damping(gamma: f64) -> Result<QuantumChannel> {
    check_unit("gamma", gamma)?;
    let e0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, cr((1.0 - gamma).sqrt())]);
    let e1 = CMatrix::from_row_slice(2, 2, &[ZERO, cr(gamma.sqrt()), ZERO, ZERO]);
    QuantumChannel::new(vec![e0, e1], vec![2], vec![2])
}

/// `E0 = |0><0| + sqrt(1-λ)|1><1|`, `E1 = sqrt(λ)|1><1|`.
pub fn phase_damping(lambda: f64) -> Result<QuantumChannel> {
    check_unit("lambda", lambda)?;
    let e0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, cr((1.0 - lambda).sqrt())]);
    let e1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, cr(lambda.sqrt())]);
    QuantumChannel::new(vec![e0, e1], vec![2], vec![2])
}

/// `Λ_μ(ρ) = μρ + (1-μ) I/d` via the Weyl operators `X^a Z^b`.
pub fn depolarizing(mu: f64, dims: Vec<usize>) -> Result<QuantumChannel> {
    check_unit("mu", mu)?;
    let d: usize = dims.iter().product();
    if d == 0 {
        return Err(Error::DimensionMismatch("zero dimension".into()));
    }
    let dd = (d * d) as f64;
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * PI * (k % d) as f64 / d as f64);
    let mut kraus = vec![identity(d) * cr((mu + (1.0 - mu) / dd).sqrt())];
    let w = ((1.0 - mu) / dd).sqrt();
    if w > 0.0 {
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                let op = CMatrix::from_fn(d, d, |r, col| if r == (col + a) % d { omega(b * col) * w } else { ZERO });
                kraus.push(op);
            }
        }
    }
    QuantumChannel::new(kraus, dims.clone(), dims)
}

/// Dephasing onto the sectors of a grading: basis index `i` carries label `labels[i]`.
pub fn sector_dephasing<L: PartialEq + Clone>(dims: Vec<usize>, labels: &[L]) -> Result<QuantumChannel> {
    let d: usize = dims.iter().product();
    if labels.len() != d {
        return Err(Error::DimensionMismatch(format!("{} labels for dimension {d}", labels.len())));
    }
    let mut distinct: Vec<L> = Vec::new();
    for l in labels {
        if !distinct.contains(l) {
            distinct.push(l.clone());
        }
    }
    let kraus = distinct
        .iter()
        .map(|l| CMatrix::from_fn(d, d, |r, col| if r == col && &labels[r] == l { ONE } else { ZERO }))
        .collect();
    QuantumChannel::new(kraus, dims.clone(), dims)
}

/// Reference-frame channel of a condensate with phase reference quality `g`:
/// `R_x(ωt)` followed by dephasing of weight `1-|g|` and the residual
/// phase rotation `R_z(arg(i g))` on the coherent branch.
pub fn bec_channel(g: C64, omega_t: f64) -> Result<QuantumChannel> {
    let a = g.norm();
    if !(a <= 1.0 + 1e-12) || !omega_t.is_finite() {
        return Err(Error::Parameter(format!("|g| = {a} must be at most 1")));
    }
    let a = a.min(1.0);
    let rx = rx(omega_t);
    let theta = (I * g).arg();
    let rz = rz(theta);
    let mut kraus = Vec::new();
    if a < 1.0 {
        let s = cr((1.0 - a).sqrt());
        kraus.push(ketbra(2, 0, 0) * &rx * s);
        kraus.push(ketbra(2, 1, 1) * &rx * s);
    }
    if a > 0.0 {
        kraus.push(rz * &rx * cr(a.sqrt()));
    }
    QuantumChannel::new(kraus, vec![2], vec![2])
}

/// The induced map `R_x(ωt)^dagger Γ[ρ] R_x(ωt)` whose quality factor is `|g|`.
pub fn bec_induced(g: C64, omega_t: f64) -> Result<QuantumChannel> {
    let undo = QuantumChannel::new(vec![rx(omega_t).adjoint()], vec![2], vec![2])?;
    bec_channel(g, omega_t)?.then(&undo)
}

/// `R_x(θ) = exp(-iθσ_x/2)`.
pub fn rx(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[cr(co), c(0.0, -s), c(0.0, -s), cr(co)])
}

/// `R_z(θ) = exp(-iθσ_z/2)`.
pub fn rz(theta: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, C64::from_polar(1.0, theta / 2.0)])
}

pub fn hadamard() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, -ONE]) * cr(FRAC_1_SQRT_2)
}

pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, col)] = ONE;
    }
    m
}

/// CNOT whose control is read in the `|±>` basis.
pub fn cnot_pm() -> CMatrix {
    let hi = tensor(&hadamard(), &identity(2));
    &hi * cnot() * &hi
}

pub fn swap(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, col| if r == (col % d) * d + col / d { ONE } else { ZERO })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard,
    PauliX,
    Rx(f64),
    Rz(f64),
    Phase(f64),
    Cnot,
    CnotPm,
    Swap,
}

impl Gate {
    pub fn matrix(&self) -> CMatrix {
        match *self {
            Gate::Hadamard => hadamard(),
            Gate::PauliX => pauli_x(),
            Gate::Rx(t) => rx(t),
            Gate::Rz(t) => rz(t),
            Gate::Phase(a) => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::from_polar(1.0, a)]),
            Gate::Cnot => cnot(),
            Gate::CnotPm => cnot_pm(),
            Gate::Swap => swap(2),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            Gate::Cnot | Gate::CnotPm | Gate::Swap => vec![2, 2],
            _ => vec![2],
        }
    }

    pub fn channel(&self) -> QuantumChannel {
        QuantumChannel::unitary(self.matrix(), self.dims()).expect("catalog gates are unitary")
    }
}

/// One-sided map `1 ⊗ S_B` with `E1 = |0><0|`, `E2 = |+><1|` on the second qubit.
pub fn streltsov_map() -> QuantumChannel {
    let s = cr(FRAC_1_SQRT_2);
    let e1 = ketbra(2, 0, 0);
    let e2 = CMatrix::from_row_slice(2, 2, &[ZERO, s, ZERO, s]);
    let local = QuantumChannel::new(vec![e1, e2], vec![2], vec![2]).expect("Streltsov map is trace preserving");
    QuantumChannel::identity(vec![2]).tensor(&local)
}
