//! Small dense linear algebra for normal equations (a handful of unknowns).

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Matrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// `A^T A` and `A^T b` for a tall matrix given column by column.
    pub fn normal_equations(columns: &[Vec<T>], rhs: &[T]) -> (Self, Vec<T>) {
        let n = columns.len();
        let mut a = Self::zeros(n);
        let mut g = vec![T::zero(); n];
        for i in 0..n {
            for j in i..n {
                let s: T = columns[i].iter().zip(&columns[j]).map(|(&x, &y)| x * y).sum();
                a.set(i, j, s);
                a.set(j, i, s);
            }
            g[i] = columns[i].iter().zip(rhs).map(|(&x, &y)| x * y).sum();
        }
        (a, g)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.at(i, i)).collect()
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` for a singular or non-finite system.
pub(crate) fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return None;
    }
    let tiny = scale * T::epsilon() * T::of_usize(n);
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| {
            m[p * n + col].abs().partial_cmp(&m[q * n + col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(m[piv * n + col].abs() > tiny) {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        let d = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / d;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                m[row * n + k] = m[row * n + k] - factor * m[col * n + k];
            }
            x[row] = x[row] - factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s = s - m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues<T: Real>(a: &Matrix<T>) -> Vec<T> {
    let n = a.n;
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.at(i, j) * m.at(i, j))
            .sum();
        let total: T = m.data.iter().map(|&v| v * v).sum();
        if !(off > T::epsilon() * T::epsilon() * total) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq == T::zero() {
                    continue;
                }
                let theta = (m.at(q, q) - m.at(p, p)) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = m.at(k, p);
                    let akq = m.at(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.at(p, k);
                    let aqk = m.at(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    m.diagonal()
}

/// 2-norm condition number of a symmetric positive semi-definite matrix
/// after symmetric diagonal scaling; infinite if singular.
pub(crate) fn scaled_condition<T: Real>(a: &Matrix<T>) -> T {
    let n = a.n;
    let d: Vec<T> = a.diagonal().iter().map(|&v| if v > T::zero() { v.sqrt().recip() } else { T::zero() }).collect();
    if d.iter().any(|&v| v == T::zero() || !v.is_finite()) {
        return T::infinity();
    }
    let mut s = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, a.at(i, j) * d[i] * d[j]);
        }
    }
    let ev = symmetric_eigenvalues(&s);
    let hi = ev.iter().fold(T::zero(), |acc, &v| acc.max(v));
    let lo = ev.iter().fold(T::infinity(), |acc, &v| acc.min(v));
    if lo > hi * T::epsilon() {
        hi / lo
    } else {
        T::infinity()
    }
}

/// Linear least squares `min ||A x - b||` with `A` given by columns.
pub(crate) fn least_squares<T: Real>(columns: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let (a, g) = Matrix::normal_equations(columns, rhs);
    solve(&a, &g)
}
