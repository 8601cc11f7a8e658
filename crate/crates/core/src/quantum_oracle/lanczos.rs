use super::dense::{dot, norm};
use super::eigen::tridiagonal_eigen;
use crate::error::{Error, Result};

/// Lowest Ritz pairs from a Lanczos run with full reorthogonalization.
#[derive(Clone, Debug)]
pub struct LanczosResult {
    /// Lowest Ritz values, ascending. May be shorter than requested when the
    /// Krylov space from the start vector is smaller.
    pub values: Vec<f64>,
    /// Ritz vector of the lowest value, unit norm.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Krylov iteration on a symmetric operator given only as `apply(x, y)`,
/// which must write y = A x. Because the iteration never leaves the Krylov
/// space of `start`, a start vector inside a symmetry sector yields that
/// sector's spectrum.
pub fn lanczos<F>(apply: F, start: &[f64], wanted: usize, tol: f64, max_iter: usize) -> Result<LanczosResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    let d = start.len();
    let s = norm(start);
    if d == 0 || s == 0.0 || !s.is_finite() {
        return Err(Error::Parameter("Lanczos start vector must be nonzero".into()));
    }
    let max_iter = max_iter.min(d).max(1);
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / s).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; d];
    let mut scale: f64 = 0.0;
    loop {
        let k = basis.len() - 1;
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt keep the basis orthogonal to
        // working precision.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs() + b);
        let m = alpha.len();
        let exhausted = b <= 1e-12 * scale.max(1.0) || m >= max_iter;
        if m % 4 == 0 || exhausted {
            let t = tridiagonal_eigen(&alpha, &beta, true)?;
            let wanted_here = wanted.min(m);
            let ev = t.vectors.as_ref().expect("requested");
            // Ascending order is the reverse of the descending spectrum.
            let res = |j: usize| b * ev.get(m - 1, m - 1 - j).abs();
            let converged = (0..wanted_here).all(|j| res(j) <= tol * scale.max(1.0));
            if (converged && wanted_here == wanted) || exhausted {
                if !converged && !(b <= 1e-12 * scale.max(1.0)) {
                    return Err(Error::NonConvergence(format!("Lanczos residual {:.3e} after {m} steps", res(0))));
                }
                let values = (0..wanted_here).map(|j| t.values[m - 1 - j]).collect();
                let mut vector = vec![0.0; d];
                for (i, q) in basis.iter().enumerate() {
                    let c = ev.get(i, m - 1);
                    vector.iter_mut().zip(q).for_each(|(v, qi)| *v += c * qi);
                }
                let nv = norm(&vector);
                vector.iter_mut().for_each(|v| *v /= nv);
                return Ok(LanczosResult { values, vector, residual: res(0), iterations: m });
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}
