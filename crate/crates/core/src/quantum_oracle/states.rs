use super::dense::DenseOperator;
use super::eigen::{singular_values, symmetric_eigen, SpectrumDescending};
use super::hamiltonian::ground_state;
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
pub const NEGATIVE_TOL: f64 = 1e-8;
/// Thermal states need a full eigendecomposition; cap the dimension.
pub const THERMAL_MAX_DIM: usize = 1 << 12;

/// A validated density matrix. Estimated matrices that came out slightly
/// indefinite are projected and keep their raw spectrum minimum for the record.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: DenseOperator,
    spectrum: SpectrumDescending,
    raw_min_eigenvalue: f64,
    raw_trace: f64,
    projected: bool,
}

impl DensityMatrix {
    /// Validates symmetry and unit trace. Eigenvalues below −1e-8 are clipped
    /// and the trace renormalized; this is recorded in [`projected`](Self::projected).
    pub fn new(op: DenseOperator) -> Result<Self> {
        if !op.is_symmetric() {
            return Err(Error::Contract("density matrix must be symmetric".into()));
        }
        let t = op.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::Contract(format!("density matrix trace {t}")));
        }
        let op = op.symmetrized();
        let spectrum = symmetric_eigen(&op, true)?;
        if spectrum.min() < -NEGATIVE_TOL {
            return Self::project(op);
        }
        Ok(DensityMatrix { raw_min_eigenvalue: spectrum.min(), raw_trace: t, op, spectrum, projected: false })
    }

    /// Nearest PSD unit-trace matrix obtained by clipping negative eigenvalues
    /// and rescaling. Accepts any symmetric matrix with positive trace after clipping.
    pub fn project(op: DenseOperator) -> Result<Self> {
        if !op.is_symmetric() {
            return Err(Error::Contract("density matrix must be symmetric".into()));
        }
        let raw_trace = op.trace();
        let op = op.symmetrized();
        let spec = symmetric_eigen(&op, true)?;
        let raw_min = spec.min();
        let clipped: Vec<f64> = spec.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::Conditioning("no positive spectral mass to project onto".into()));
        }
        let values: Vec<f64> = clipped.iter().map(|v| v / total).collect();
        let vecs = spec.vectors.expect("requested");
        let d = op.dim();
        let mut out = DenseOperator::zeros(d);
        for (k, &w) in values.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let a = w * vecs.get(i, k);
                for j in 0..d {
                    out.set(i, j, out.get(i, j) + a * vecs.get(j, k));
                }
            }
        }
        let out = out.symmetrized();
        let spectrum = SpectrumDescending { values, vectors: Some(vecs) };
        Ok(DensityMatrix { op: out, spectrum, raw_min_eigenvalue: raw_min, raw_trace, projected: true })
    }

    pub fn pure(v: &[f64]) -> Result<Self> {
        Self::new(DenseOperator::projector(v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(DenseOperator::identity(d).scaled(1.0 / d as f64)).expect("valid")
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_operator(self) -> DenseOperator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.op.get(i, j)
    }

    pub fn spectrum(&self) -> &SpectrumDescending {
        &self.spectrum
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    /// Smallest eigenvalue before any projection.
    pub fn raw_min_eigenvalue(&self) -> f64 {
        self.raw_min_eigenvalue
    }

    pub fn raw_trace(&self) -> f64 {
        self.raw_trace
    }

    pub fn projected(&self) -> bool {
        self.projected
    }
}

impl AsRef<DenseOperator> for DensityMatrix {
    fn as_ref(&self) -> &DenseOperator {
        &self.op
    }
}

/// e^{−βH}/tr e^{−βH} through the full spectrum, shifted by the ground energy.
pub fn thermal_density(h: &DenseOperator, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be positive and finite, got {beta}")));
    }
    if h.dim() > THERMAL_MAX_DIM {
        return Err(Error::Size(format!("thermal state of dimension {} exceeds {THERMAL_MAX_DIM}", h.dim())));
    }
    let s = symmetric_eigen(h, true)?;
    let e0 = s.min();
    let w: Vec<f64> = s.values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let v = s.vectors.as_ref().expect("requested");
    let d = h.dim();
    let mut rho = DenseOperator::zeros(d);
    for (k, &wk) in w.iter().enumerate() {
        let c = wk / z;
        if c < 1e-300 {
            continue;
        }
        for i in 0..d {
            let a = c * v.get(i, k);
            if a == 0.0 {
                continue;
            }
            for j in 0..d {
                rho.set(i, j, rho.get(i, j) + a * v.get(j, k));
            }
        }
    }
    DensityMatrix::new(rho.symmetrized())
}

/// Projector onto the ground state of `h`.
pub fn ground_density(h: &DenseOperator) -> Result<DensityMatrix> {
    DensityMatrix::pure(&ground_state(h)?.vector)
}

/// Either side of a partial trace.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a [f64]),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a [f64]> for StateRef<'a> {
    fn from(v: &'a [f64]) -> Self {
        StateRef::Pure(v)
    }
}

impl<'a> From<&'a Vec<f64>> for StateRef<'a> {
    fn from(v: &'a Vec<f64>) -> Self {
        StateRef::Pure(v)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

/// Partial trace onto qubits `keep.0..=keep.1` of an n-qubit state. The kept
/// qubits keep their relative order, the first being most significant.
pub fn reduce<'a>(state: impl Into<StateRef<'a>>, keep: (usize, usize), n: usize) -> Result<DensityMatrix> {
    let (lo, hi) = keep;
    if lo > hi || hi >= n {
        return Err(Error::Domain(format!("keep range {lo}..={hi} outside {n} qubits")));
    }
    let (k, right) = (hi - lo + 1, n - hi - 1);
    let (dl, dk, dr) = (1usize << lo, 1usize << k, 1usize << right);
    let idx = |l: usize, a: usize, r: usize| (l << (k + right)) | (a << right) | r;
    let mut out = DenseOperator::zeros(dk);
    match state.into() {
        StateRef::Pure(psi) => {
            if psi.len() != 1 << n {
                return Err(Error::Domain(format!("vector of length {} for {n} qubits", psi.len())));
            }
            for l in 0..dl {
                for r in 0..dr {
                    for a in 0..dk {
                        let pa = psi[idx(l, a, r)];
                        if pa == 0.0 {
                            continue;
                        }
                        for b in 0..dk {
                            out.set(a, b, out.get(a, b) + pa * psi[idx(l, b, r)]);
                        }
                    }
                }
            }
        }
        StateRef::Mixed(rho) => {
            if rho.dim() != 1 << n {
                return Err(Error::Domain(format!("matrix of dimension {} for {n} qubits", rho.dim())));
            }
            for l in 0..dl {
                for r in 0..dr {
                    for a in 0..dk {
                        for b in 0..dk {
                            out.set(a, b, out.get(a, b) + rho.get(idx(l, a, r), idx(l, b, r)));
                        }
                    }
                }
            }
        }
    }
    let t = out.trace();
    DensityMatrix::new(out.scaled(1.0 / t))
}

/// Singular values, descending, of ψ viewed as a `rows × cols` matrix
/// (row index = leading qubits).
pub fn schmidt(psi: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if rows * cols != psi.len() {
        return Err(Error::Domain(format!("{rows}x{cols} split of a length-{} vector", psi.len())));
    }
    singular_values(psi, rows, cols)
}

/// Schmidt coefficients across the cut separating qubits `lo..=hi` from the rest.
pub fn schmidt_block(psi: &[f64], n: usize, lo: usize, hi: usize) -> Result<Vec<f64>> {
    if lo > hi || hi >= n || psi.len() != 1 << n {
        return Err(Error::Domain(format!("block {lo}..={hi} of {n} qubits, vector length {}", psi.len())));
    }
    let (k, right) = (hi - lo + 1, n - hi - 1);
    let (dk, dr) = (1usize << k, 1usize << right);
    let de = (1usize << lo) * dr;
    let mut m = vec![0.0; dk * de];
    for (i, &v) in psi.iter().enumerate() {
        let a = (i >> right) & (dk - 1);
        let env = ((i >> (k + right)) * dr) | (i & (dr - 1));
        m[a * de + env] = v;
    }
    singular_values(&m, dk, de)
}

/// Number of values above 1e-12.
pub fn schmidt_rank(values: &[f64]) -> usize {
    values.iter().filter(|&&v| v > 1e-12).count()
}

/// Von Neumann entropy in bits. Eigenvalues below 1e-15 count as zero.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.spectrum().values)
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// Operator norm of A − B, which for symmetric matrices is the largest
/// absolute eigenvalue.
pub fn op_norm_diff(a: &impl AsRef<DenseOperator>, b: &impl AsRef<DenseOperator>) -> Result<f64> {
    let diff = a.as_ref().sub(b.as_ref())?.symmetrized();
    let s = symmetric_eigen(&diff, false)?;
    Ok(s.max().abs().max(s.min().abs()))
}

/// max_j |λ_j↓(A) − λ_j↓(B)|, checked against ‖A − B‖.
pub fn weyl_gap(a: &impl AsRef<DenseOperator>, b: &impl AsRef<DenseOperator>) -> Result<f64> {
    let (a, b) = (a.as_ref(), b.as_ref());
    a.same_dim(b)?;
    let sa = symmetric_eigen(a, false)?;
    let sb = symmetric_eigen(b, false)?;
    let gap = sa.values.iter().zip(&sb.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let norm = op_norm_diff(a, b)?;
    if gap > norm + 1e-9 {
        return Err(Error::Contract(format!("eigenvalue gap {gap} exceeds norm difference {norm}")));
    }
    Ok(gap)
}
