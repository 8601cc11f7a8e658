use crate::error::{Error, Result};

/// Square real matrix, row-major.
///
/// Every operator in the σ³ product basis that this crate touches is real, so
/// there is no complex variant. A complex one would slot in here with the same
/// interface.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        DenseOperator { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Self::zeros(dim);
        for i in 0..dim {
            a.data[i * dim + i] = 1.0;
        }
        a
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut a = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            a.set(i, i, v);
        }
        a
    }

    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Domain(format!("{} entries for a {dim}x{dim} matrix", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix entries must be finite".into()));
        }
        Ok(DenseOperator { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Domain("rows must all have length equal to the row count".into()));
        }
        Self::from_vec(dim, rows.concat())
    }

    /// |v⟩⟨v|.
    pub fn projector(v: &[f64]) -> Self {
        let dim = v.len();
        let mut a = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                a.data[i * dim + j] = v[i] * v[j];
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    /// Symmetric up to ‖A − Aᵀ‖_max ≤ 1e-12·‖A‖_max.
    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-12 * self.max_abs();
        let n = self.dim;
        (0..n).all(|i| (i + 1..n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn symmetrized(&self) -> Self {
        let n = self.dim;
        let mut s = self.clone();
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        s
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let (src, dst) = (&other.data[k * n..(k + 1) * n], &mut out.data[i * n..(i + 1) * n]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseOperator { dim: self.dim, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(DenseOperator { dim: self.dim, data })
    }

    pub fn scaled(&self, c: f64) -> Self {
        DenseOperator { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// ψᵀ A ψ.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        (0..self.dim).map(|i| v[i] * self.row(i).iter().zip(v).map(|(a, b)| a * b).sum::<f64>()).sum()
    }

    pub(crate) fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!("dimension mismatch: {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// Row-major CSV with 17 significant digits, enough to round-trip.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.dim * self.dim * 24);
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Inverse of [`to_csv`](Self::to_csv). Lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: no + 1, msg: e.to_string() })?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

impl AsRef<DenseOperator> for DenseOperator {
    fn as_ref(&self) -> &DenseOperator {
        self
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
