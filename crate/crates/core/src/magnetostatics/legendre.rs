//! Associated Legendre functions `P_l^m` and their first derivative.
//!
//! Evaluation goes through the polynomial factor
//! `Q_l^m(x) = (-1)^m d^m P_l(x) / dx^m`, so that `P_l^m = w(x) Q_l^m(x)`
//! with `w = (1 - x^2)^{m/2}` (Ferrers, `|x| <= 1`) or `w = (x^2 - 1)^{m/2}`
//! (`|x| > 1`, no Condon-Shortley phase). `Q` is a polynomial, so its
//! upward recurrence in `l` is valid for real, complex, inside or outside
//! `[-1, 1]`, and never divides by `1 - x^2`.

use num_complex::Complex;
use num_traits::{FromPrimitive, Num};

use crate::error::invalid;
use crate::scalar::{finite, Real};
use crate::Result;

fn lit<S: FromPrimitive>(x: f64) -> S {
    S::from_f64(x).expect("small integer literal")
}

/// Returns `(Q_l^m(x), dQ_l^m/dx)` by upward recurrence in the degree.
///
/// Requires `m <= l`.
pub fn polynomial_factor<S>(l: u32, m: u32, x: S) -> (S, S)
where
    S: Num + Copy + FromPrimitive,
{
    debug_assert!(m <= l);
    // Q_m^m = (-1)^m (2m-1)!!
    let mut q_mm = S::one();
    for k in 1..=m {
        q_mm = q_mm * lit::<S>(-(2.0 * k as f64 - 1.0));
    }
    if l == m {
        return (q_mm, S::zero());
    }
    let c = lit::<S>(2.0 * m as f64 + 1.0);
    let mut q_prev = q_mm;
    let mut dq_prev = S::zero();
    let mut q = c * x * q_mm;
    let mut dq = c * q_mm;
    for deg in (m + 2)..=l {
        let a = lit::<S>(2.0 * deg as f64 - 1.0);
        let b = lit::<S>((deg + m - 1) as f64);
        let inv = lit::<S>(1.0 / (deg - m) as f64);
        let q_next = (a * x * q - b * q_prev) * inv;
        let dq_next = (a * (q + x * dq) - b * dq_prev) * inv;
        q_prev = q;
        dq_prev = dq;
        q = q_next;
        dq = dq_next;
    }
    (q, dq)
}

/// `(l - m)! / (l + m)!`, the proportionality factor for negative orders.
fn negative_order_factor<T: Real>(l: u32, m: u32) -> T {
    let mut f = T::one();
    for k in (l - m + 1)..=(l + m) {
        f = f / T::of(k as f64);
    }
    if m % 2 == 1 {
        -f
    } else {
        f
    }
}

fn check_indices(i: u32, j: i32) -> Result<u32> {
    if i < 1 {
        return Err(invalid("i", "degree must be >= 1"));
    }
    let m = j.unsigned_abs();
    if m > i {
        return Err(invalid("j", format!("|j| = {m} exceeds degree {i}")));
    }
    Ok(m)
}

/// Value and derivative of `P_i^j(x)` for real `x`.
///
/// Uses the Ferrers definition (with the Condon-Shortley phase) on
/// `[-1, 1]` and `(x^2 - 1)^{m/2} d^m P_i/dx^m` outside it. Negative `j` is
/// mapped through `P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m`. At `|x| = 1` the
/// derivative is the one-sided limit, which is infinite for `|j| = 1`.
pub fn assoc_legendre<T: Real>(i: u32, j: i32, x: T) -> Result<(T, T)> {
    let m = check_indices(i, j)?;
    let x = finite("x", x)?;
    let (q, dq) = polynomial_factor(i, m, x);
    let one = T::one();
    let s = one - x * x;
    let (p, dp) = if m == 0 {
        (q, dq)
    } else if s == T::zero() {
        // endpoint limits
        let dp = match m {
            1 => T::infinity(),
            2 => -T::of(2.0) * x * q,
            _ => T::zero(),
        };
        (T::zero(), dp)
    } else {
        let half_m = T::of(m as f64 * 0.5);
        let (w, sign) = if s > T::zero() {
            (s.powf(half_m), one)
        } else {
            let sign = if m % 2 == 1 { -one } else { one };
            ((-s).powf(half_m), sign)
        };
        let mf = T::of(m as f64);
        let p = sign * w * q;
        let dp = sign * w * (dq - mf * x * q / s);
        (p, dp)
    };
    if j < 0 {
        let f = negative_order_factor::<T>(i, m);
        Ok((f * p, f * dp))
    } else {
        Ok((p, dp))
    }
}

/// Value and derivative of the Ferrers `P_i^j(z)` continued to complex `z`
/// with the principal branch of `(1 - z^2)^{j/2}`.
pub fn assoc_legendre_complex<T: Real>(
    i: u32,
    j: i32,
    z: Complex<T>,
) -> Result<(Complex<T>, Complex<T>)> {
    let m = check_indices(i, j)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(crate::Error::NonFinite {
            what: "z",
            value: z.norm().to_f64_lossy(),
        });
    }
    let (q, dq) = polynomial_factor(i, m, z);
    let (p, dp) = if m == 0 {
        (q, dq)
    } else {
        let s = Complex::new(T::one(), T::zero()) - z * z;
        if s.norm() == T::zero() {
            return Err(crate::Error::Domain(format!(
                "P_{i}^{j} derivative is singular at z = +-1"
            )));
        }
        let w = s.powf(T::of(m as f64 * 0.5));
        let mf = T::of(m as f64);
        (w * q, w * (dq - z * q * mf / s))
    };
    if j < 0 {
        let f = negative_order_factor::<T>(i, m);
        Ok((p * f, dp * f))
    } else {
        Ok((p, dp))
    }
}

/// Logarithmic derivative `z P'(z) / P(z)` of `P_i^{|j|}` at complex `z`,
/// returned as the polynomial part `z Q'/Q` and the weight part
/// `-m z^2 / (1 - z^2)` separately so callers can keep the weight part in
/// closed form.
pub(crate) fn log_derivative_polynomial<T: Real>(i: u32, m: u32, z: Complex<T>) -> Option<Complex<T>> {
    let (q, dq) = polynomial_factor(i, m, z);
    if q.norm() == T::zero() {
        None
    } else {
        Some(z * dq / q)
    }
}
