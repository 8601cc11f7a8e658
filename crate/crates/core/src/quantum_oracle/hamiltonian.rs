use super::dense::DenseOperator;
use super::eigen::symmetric_eigen;
use super::lanczos::lanczos;
use crate::error::{Error, Result};

/// Size guard for dense matrices: 2^14 rows.
pub const MAX_DENSE_SITES: usize = 14;
/// Size guard for the matrix-free chain.
pub const MAX_SPARSE_SITES: usize = 16;
/// Above this dimension ground states come from Lanczos instead of a full solve.
pub const FULL_SOLVE_MAX_DIM: usize = 1 << 10;

/// Chain sites run −m..=m+L; site x sits at qubit index x + m, so the block
/// [0, L] occupies qubits m..=m+L.
pub fn site_index(m: usize, x: i64) -> Result<usize> {
    let q = x + m as i64;
    if q < 0 {
        return Err(Error::Domain(format!("site {x} is left of −{m}")));
    }
    Ok(q as usize)
}

/// Qubit range holding the block [0, L] for a chain with margin m.
pub fn block_qubits(m: usize, l: usize) -> (usize, usize) {
    (m, m + l)
}

/// Spin of qubit `q` in basis state `i` of an n-qubit register: the first
/// qubit is the most significant bit, bit 0 is σ³ = +1.
#[inline]
pub fn spin_of(i: usize, q: usize, n: usize) -> i8 {
    if (i >> (n - 1 - q)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Transverse-field Ising chain with free ends, held without a matrix.
#[derive(Clone, Debug)]
pub struct IsingChain {
    lambda: Vec<f64>,
    delta: Vec<f64>,
    diag: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// Distance to the next eigenvalue, when it could be resolved.
    pub gap: Option<f64>,
}

impl GroundState {
    /// Whether the ground state is unique to within 1e-6.
    pub fn is_unique(&self) -> bool {
        self.gap.is_some_and(|g| g >= 1e-6)
    }
}

impl IsingChain {
    pub fn new(lambda: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let n = delta.len();
        if n == 0 || lambda.len() + 1 != n {
            return Err(Error::Parameter(format!("{} couplings for {n} sites", lambda.len())));
        }
        if lambda.iter().chain(&delta).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter("couplings and fields must be finite and non-negative".into()));
        }
        if n > MAX_SPARSE_SITES {
            return Err(Error::Size(format!("{n} sites exceeds the limit of {MAX_SPARSE_SITES}")));
        }
        let diag = (0..1usize << n)
            .map(|i| (0..n - 1).map(|x| -0.5 * lambda[x] * f64::from(spin_of(i, x, n) * spin_of(i, x + 1, n))).sum())
            .collect();
        Ok(IsingChain { lambda, delta, diag })
    }

    pub fn uniform(n: usize, lambda: f64, delta: f64) -> Result<Self> {
        Self::new(vec![lambda; n.saturating_sub(1)], vec![delta; n])
    }

    pub fn sites(&self) -> usize {
        self.delta.len()
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn couplings(&self) -> (&[f64], &[f64]) {
        (&self.lambda, &self.delta)
    }

    /// y = H x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.sites();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for (q, &d) in self.delta.iter().enumerate() {
                acc -= d * x[i ^ (1 << (n - 1 - q))];
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        build_hamiltonian(self.sites(), &self.lambda, &self.delta)
    }

    /// Ground state and gap from two Lanczos runs, one per flip sector.
    ///
    /// The Hamiltonian commutes with the global flip. The constant vector is
    /// flip-even and overlaps the (positive) ground state; the magnetization
    /// profile #up − n/2 is flip-odd. The gap is the smaller of the even
    /// sector's second level and the odd sector's lowest level, minus E₀.
    pub fn ground_state(&self) -> Result<GroundState> {
        let n = self.sites();
        let apply = |x: &[f64], y: &mut [f64]| self.apply(x, y);
        let even = lanczos(apply, &vec![1.0; self.dim()], 2, 1e-11, 400)?;
        let odd_start: Vec<f64> =
            (0..self.dim()).map(|i| (0..n).filter(|&q| spin_of(i, q, n) == 1).count() as f64 - n as f64 / 2.0).collect();
        let e0 = even.values[0];
        let mut gap = even.values.get(1).map(|e| e - e0);
        if odd_start.iter().any(|&v| v != 0.0) {
            if let Ok(odd) = lanczos(apply, &odd_start, 1, 1e-10, 400) {
                let g = odd.values[0] - e0;
                gap = Some(gap.map_or(g, |h| h.min(g)));
            }
        }
        let mut vector = even.vector;
        fix_sign(&mut vector);
        Ok(GroundState { energy: e0, vector, gap: gap.map(|g| g.max(0.0)) })
    }
}

/// H = −½ Σ λ_{x,x+1} σ³_x σ³_{x+1} − Σ δ_x σ¹_x on n sites with free ends.
pub fn build_hamiltonian(n: usize, lambda: &[f64], delta: &[f64]) -> Result<DenseOperator> {
    if n > MAX_DENSE_SITES {
        return Err(Error::Size(format!("{n} sites exceeds the dense limit of {MAX_DENSE_SITES}")));
    }
    if delta.len() != n || lambda.len() + 1 != n.max(1) {
        return Err(Error::Parameter(format!("{} couplings and {} fields for {n} sites", lambda.len(), delta.len())));
    }
    let chain = IsingChain::new(lambda.to_vec(), delta.to_vec())?;
    let d = chain.dim();
    let mut h = DenseOperator::zeros(d);
    for i in 0..d {
        h.set(i, i, chain.diag[i]);
        for (q, &dq) in delta.iter().enumerate() {
            let j = i ^ (1 << (n - 1 - q));
            h.set(i, j, h.get(i, j) - dq);
        }
    }
    Ok(h)
}

/// Lowest eigenpair of a symmetric matrix, plus the gap to the next level.
pub fn ground_state(h: &DenseOperator) -> Result<GroundState> {
    if !h.is_symmetric() {
        return Err(Error::Contract("ground_state needs a symmetric matrix".into()));
    }
    let d = h.dim();
    if d == 0 {
        return Err(Error::Parameter("empty matrix".into()));
    }
    if d <= FULL_SOLVE_MAX_DIM {
        let s = symmetric_eigen(h, true)?;
        let energy = s.values[d - 1];
        let mut vector = s.vector(d - 1).expect("requested");
        fix_sign(&mut vector);
        let gap = (d > 1).then(|| s.values[d - 2] - energy);
        return Ok(GroundState { energy, vector, gap });
    }
    let mut rng = crate::rng::Rng::stream(0x6d_5f_61, &[d as u64]);
    let start: Vec<f64> = (0..d).map(|_| 1.0 + 0.1 * rng.normal()).collect();
    let r = lanczos(|x, y| h.matvec_into(x, y), &start, 2, 1e-11, 500)?;
    let mut vector = r.vector;
    fix_sign(&mut vector);
    Ok(GroundState { energy: r.values[0], vector, gap: r.values.get(1).map(|e| e - r.values[0]) })
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Global spin flip ⊗σ¹ as a dense permutation matrix.
pub fn global_flip(n: usize) -> DenseOperator {
    let d = 1usize << n;
    let mut x = DenseOperator::zeros(d);
    for i in 0..d {
        x.set(i, (d - 1) ^ i, 1.0);
    }
    x
}
