//! Small dense and iterative complex solvers.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Solves `A x = b` for a row-major `n×n` matrix by LU with partial pivoting.
pub(crate) fn lu_solve(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::Dimension("matrix must be n*n"));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap_or(col);
        if a[pivot * n + col].norm() < 1e-300 {
            return Err(Error::LinearSolve("singular matrix"));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = b;
    for row in (0..n).rev() {
        let mut acc = x[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Conjugate gradient for a Hermitian positive-definite operator.
pub(crate) fn conjugate_gradient<F>(
    apply: F,
    b: &[Complex64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = alloc::vec![zero; n];
    let b_norm = dot(b, b).re.sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = alloc::vec![zero; n];
    let mut rr = dot(&r, &r).re;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap).re;
        if pap <= 0.0 {
            return Err(Error::LinearSolve("operator is not positive definite"));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let next = dot(&r, &r).re;
        if next.sqrt() <= rel_tol * b_norm {
            return Ok(x);
        }
        let beta = next / rr;
        rr = next;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
    }
    Err(Error::LinearSolve("conjugate gradient did not converge"))
}
