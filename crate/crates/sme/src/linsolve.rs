//! Sparse CSR matrices, ILU(0), and BiCGStab.
//!
//! The linearized problems are nonsymmetric (frozen quasilinear
//! coefficients plus cut-cell boundary folding), so the Krylov method of
//! choice is BiCGStab preconditioned with an incomplete LU factorization on
//! the unmodified sparsity pattern.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Row-by-row CSR builder.
pub struct CsrBuilder {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl CsrBuilder {
    pub fn new(n: usize) -> Self {
        CsrBuilder {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    /// Accumulate into entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v == 0.0 {
            return;
        }
        let row = &mut self.rows[i];
        match row.iter_mut().find(|(c, _)| *c == j) {
            Some((_, val)) => *val += v,
            None => row.push((j, v)),
        }
    }

    pub fn build(mut self) -> Csr {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in &mut self.rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl Csr {
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            out[i] = acc;
        }
    }

    fn diag_index(&self, i: usize) -> Option<usize> {
        (self.row_ptr[i]..self.row_ptr[i + 1]).find(|&idx| self.cols[idx] == i)
    }
}

/// Incomplete LU factorization with zero fill-in, stored in one CSR copy.
/// Entries left of the diagonal hold L (unit diagonal implied); the diagonal
/// and right of it hold U.
pub struct Ilu0 {
    lu: Csr,
    diag_idx: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag_idx = vec![0usize; n];
        for i in 0..n {
            diag_idx[i] = lu
                .diag_index(i)
                .ok_or_else(|| Error::Structural(format!("missing diagonal in row {i}")))?;
        }
        for i in 0..n {
            let row_start = lu.row_ptr[i];
            let row_end = lu.row_ptr[i + 1];
            let mut idx = row_start;
            while idx < row_end {
                let k = lu.cols[idx];
                if k >= i {
                    break;
                }
                let pivot = lu.vals[diag_idx[k]];
                if pivot == 0.0 {
                    return Err(Error::Structural(format!("zero ILU pivot at row {k}")));
                }
                let factor = lu.vals[idx] / pivot;
                lu.vals[idx] = factor;
                // subtract factor * (row k right of its diagonal) from row i
                let mut kk = diag_idx[k] + 1;
                let mut ii = idx + 1;
                let k_end = lu.row_ptr[k + 1];
                while kk < k_end && ii < row_end {
                    match lu.cols[kk].cmp(&lu.cols[ii]) {
                        std::cmp::Ordering::Less => kk += 1,
                        std::cmp::Ordering::Greater => ii += 1,
                        std::cmp::Ordering::Equal => {
                            lu.vals[ii] -= factor * lu.vals[kk];
                            kk += 1;
                            ii += 1;
                        }
                    }
                }
                idx += 1;
            }
        }
        Ok(Ilu0 { lu, diag_idx })
    }

    /// Apply `(LU)^{-1}` to `b`.
    pub fn solve(&self, b: &[f64], out: &mut [f64]) {
        let n = self.lu.n;
        out.copy_from_slice(b);
        // forward: L y = b, unit diagonal
        for i in 0..n {
            let mut acc = out[i];
            for idx in self.lu.row_ptr[i]..self.diag_idx[i] {
                acc -= self.lu.vals[idx] * out[self.lu.cols[idx]];
            }
            out[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut acc = out[i];
            for idx in self.diag_idx[i] + 1..self.lu.row_ptr[i + 1] {
                acc -= self.lu.vals[idx] * out[self.lu.cols[idx]];
            }
            out[i] = acc / self.lu.vals[self.diag_idx[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// ILU(0)-preconditioned BiCGStab. Returns the iteration count; `x` holds
/// the initial guess on entry and the solution on exit. Converges when the
/// 2-norm residual drops below `tol * ||b||` (absolute `tol` for `b = 0`).
pub fn bicgstab(
    a: &Csr,
    precond: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<usize> {
    let n = a.n;
    let b_norm = norm2(b);
    let threshold = if b_norm > 0.0 { tol * b_norm } else { tol };

    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if std::env::var("SME_TRACE").is_ok() {
        eprintln!(
            "  bicgstab entry: |r|2={:.3e} threshold={:.3e} (tol={tol:.1e}, |b|2={b_norm:.3e})",
            norm2(&r),
            threshold
        );
    }
    if norm2(&r) <= threshold {
        return Ok(0);
    }
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut history = Vec::new();

    for iter in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::LinearSolve {
                iters: iter,
                residual: norm2(&r) / b_norm.max(1e-300),
                history: tail(&history),
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.solve(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        alpha = rho_new / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= threshold {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Ok(iter);
        }
        precond.solve(&s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::LinearSolve {
                iters: iter,
                residual: norm2(&s) / b_norm.max(1e-300),
                history: tail(&history),
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm2(&r);
        history.push(res / b_norm.max(1e-300));
        if res <= threshold {
            return Ok(iter);
        }
        if omega.abs() < 1e-300 {
            return Err(Error::LinearSolve {
                iters: iter,
                residual: res / b_norm.max(1e-300),
                history: tail(&history),
            });
        }
        rho = rho_new;
    }
    Err(Error::LinearSolve {
        iters: max_iters,
        residual: norm2(&r) / b_norm.max(1e-300),
        history: tail(&history),
    })
}

fn tail(history: &[f64]) -> Vec<f64> {
    history.iter().rev().take(8).rev().copied().collect()
}
