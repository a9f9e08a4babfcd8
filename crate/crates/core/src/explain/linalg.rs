//! Dense linear solve used by the kernel estimator.

use crate::scalar::Scalar;

/// Solve `a x = b` for a row-major `n x n` matrix by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `tol` times the
/// largest absolute entry of `a`.
pub fn solve<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, n: usize, tol: T) -> Option<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if n == 0 {
        return Some(Vec::new());
    }
    if scale == T::zero() {
        return None;
    }
    let threshold = tol * scale;
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN pivots count as singular
        if !(a[pivot * n + col].abs() > threshold) {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / p;
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col * n + c];
                a[r * n + c] -= factor * v;
            }
            let v = b[col];
            b[r] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in (r + 1)..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    Some(x)
}
