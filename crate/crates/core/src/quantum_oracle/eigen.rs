//! Symmetric eigensolvers and a singular-value routine.
//!
//! Cyclic Jacobi is the reference solver. It is slow (O(d³) per sweep, with
//! several sweeps) so above [`JACOBI_MAX_DIM`] the same interface is served by
//! Householder tridiagonalization followed by implicit QL. The test suite
//! checks the two against each other.

use super::dense::DenseOperator;
use crate::error::{Error, Result};

pub const JACOBI_MAX_DIM: usize = 64;

/// Eigenvalues sorted non-increasing, with eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct SpectrumDescending {
    pub values: Vec<f64>,
    pub vectors: Option<DenseOperator>,
}

impl SpectrumDescending {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> Option<Vec<f64>> {
        let v = self.vectors.as_ref()?;
        Some((0..v.dim()).map(|i| v.get(i, j)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    fn sorted(mut values: Vec<f64>, vectors: Option<DenseOperator>) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let vectors = vectors.map(|v| {
            let mut out = DenseOperator::zeros(n);
            for (new, &old) in order.iter().enumerate() {
                for i in 0..n {
                    out.set(i, new, v.get(i, old));
                }
            }
            out
        });
        values = order.iter().map(|&i| values[i]).collect();
        SpectrumDescending { values, vectors }
    }
}

/// Full spectrum of a symmetric matrix. Errors on asymmetric input.
pub fn symmetric_eigen(a: &DenseOperator, vectors: bool) -> Result<SpectrumDescending> {
    if !a.is_symmetric() {
        return Err(Error::Contract("eigensolver needs a symmetric matrix".into()));
    }
    if a.dim() <= JACOBI_MAX_DIM {
        jacobi_eigen(a, vectors)
    } else {
        householder_ql_eigen(a, vectors)
    }
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn jacobi_eigen(a: &DenseOperator, vectors: bool) -> Result<SpectrumDescending> {
    let n = a.dim();
    let mut m = a.symmetrized();
    let mut v = vectors.then(|| DenseOperator::identity(n));
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j).powi(2)).sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            let values = (0..n).map(|i| m.get(i, i)).collect();
            return Ok(SpectrumDescending::sorted(values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence("Jacobi sweeps did not converge".into()))
}

/// Householder reduction to tridiagonal form, then implicit QL with shifts.
pub fn householder_ql_eigen(a: &DenseOperator, vectors: bool) -> Result<SpectrumDescending> {
    let n = a.dim();
    if n == 0 {
        return Ok(SpectrumDescending { values: vec![], vectors: vectors.then(|| DenseOperator::zeros(0)) });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e, Some(&mut v))?;
    let vecs = vectors.then(|| DenseOperator::from_vec(n, v.concat()).expect("finite"));
    Ok(SpectrumDescending::sorted(d, vecs))
}

/// Eigenvalues (and optionally vectors) of the symmetric tridiagonal matrix
/// with diagonal `diag` and off-diagonal `off` (length n − 1).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], vectors: bool) -> Result<SpectrumDescending> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut v = vectors.then(|| (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect::<Vec<_>>()).collect::<Vec<_>>());
    tridiagonal_ql(&mut d, &mut e, v.as_mut())?;
    let vecs = v.map(|v| DenseOperator::from_vec(n, v.concat()).expect("finite"));
    Ok(SpectrumDescending::sorted(d, vecs))
}

fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d[..i].iter_mut() {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let g: f64 = (0..=i).map(|k| v[k][i + 1] * v[k][j]).sum();
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on (d, e) where e[i] couples i−1 and i. Rotations are
/// accumulated into `v` when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NonConvergence("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for row in v.iter_mut() {
                            let h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Singular values of the `rows × cols` row-major matrix, descending, by
/// one-sided (Hestenes) Jacobi on the narrower orientation.
pub fn singular_values(data: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if data.len() != rows * cols {
        return Err(Error::Domain(format!("{} entries for a {rows}x{cols} matrix", data.len())));
    }
    // Columns of b are the vectors being orthogonalized; keep the fewer of them.
    let (k, len) = if cols <= rows { (cols, rows) } else { (rows, cols) };
    let mut b: Vec<Vec<f64>> = if cols <= rows {
        (0..cols).map(|j| (0..rows).map(|i| data[i * cols + j]).collect()).collect()
    } else {
        (0..rows).map(|i| data[i * cols..(i + 1) * cols].to_vec()).collect()
    };
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..len {
                    alpha += b[p][i] * b[p][i];
                    beta += b[q][i] * b[q][i];
                    gamma += b[p][i] * b[q][i];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = b.split_at_mut(q);
                let (bp, bq) = (&mut head[p], &mut tail[0]);
                for i in 0..len {
                    let (x, y) = (bp[i], bq[i]);
                    bp[i] = c * x - s * y;
                    bq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            let mut sv: Vec<f64> = b.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            return Ok(sv);
        }
    }
    Err(Error::NonConvergence("one-sided Jacobi did not converge".into()))
}
