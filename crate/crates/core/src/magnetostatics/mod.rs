//! Walker magnetostatic modes of a saturated ferromagnetic sphere.
//!
//! Fields are flux densities in tesla (`B = mu0 H`), the gyromagnetic
//! ratio is in Hz/T, and every returned frequency is an ordinary frequency
//! in Hz.

pub mod legendre;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::model::MaterialParams;
use crate::roots::brent;
use crate::scalar::{finite, Real};
use crate::{Error, Result};

/// Which sign of the `± j chi_2` term of the characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignBranch {
    Plus,
    Minus,
}

impl SignBranch {
    fn sign<T: Real>(self) -> T {
        match self {
            SignBranch::Plus => T::one(),
            SignBranch::Minus => -T::one(),
        }
    }

    /// The branch on which `(i, j)` reproduces the linear closed forms:
    /// `+` for `j > 0`, `-` for `j < 0`.
    pub fn natural(j: i32) -> Self {
        if j < 0 {
            SignBranch::Minus
        } else {
            SignBranch::Plus
        }
    }
}

impl std::fmt::Display for SignBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignBranch::Plus => f.write_str("+"),
            SignBranch::Minus => f.write_str("-"),
        }
    }
}

/// A Walker mode `(i, j)` on one sign branch at external field `b_ext`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerModeQuery<T = f64> {
    pub i: u32,
    pub j: i32,
    pub branch: SignBranch,
    pub b_ext: T,
}

impl<T: Real> WalkerModeQuery<T> {
    pub fn new(i: u32, j: i32, branch: SignBranch, b_ext: T) -> Result<Self> {
        check_walker_indices(i, j)?;
        finite("b_ext", b_ext)?;
        Ok(Self { i, j, branch, b_ext })
    }

    /// Query on the branch that carries the linear closed forms.
    pub fn natural(i: u32, j: i32, b_ext: T) -> Result<Self> {
        Self::new(i, j, SignBranch::natural(j), b_ext)
    }
}

pub(crate) fn check_walker_indices(i: u32, j: i32) -> Result<()> {
    if i < 1 {
        return Err(invalid("i", "Walker index i must be >= 1"));
    }
    if j.unsigned_abs() > i {
        return Err(invalid("j", format!("Walker index j = {j} outside [-{i}, {i}]")));
    }
    Ok(())
}

/// Internal flux density of a sphere, `B_i = B_ext - mu0 M_s / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalField<T = f64> {
    pub b_i: T,
}

impl<T: Real> InternalField<T> {
    pub fn from_external(b_ext: T, material: &MaterialParams<T>) -> Self {
        Self {
            b_i: b_ext - material.mu0_ms / T::of(3.0),
        }
    }
}

/// Uniform-precession (Kittel) frequency of a sphere, `f = gamma_e B_ext`.
pub fn kittel_frequency<T: Real>(b_ext: T, material: &MaterialParams<T>) -> T {
    material.gamma_e * b_ext
}

/// Bias field at which the Kittel mode sits at frequency `f`.
pub fn kittel_field<T: Real>(f: T, material: &MaterialParams<T>) -> T {
    f / material.gamma_e
}

/// Closed-form frequency of the modes with `i - |j|` equal to 0 or 1.
///
/// `f = gamma_e B_ext + (k/(2k+1) - 1/3) gamma_e mu0Ms` for `i = k` and
/// `f = gamma_e B_ext + (k/(2k+3) - 1/3) gamma_e mu0Ms` for `i = k + 1`,
/// with `k = |j| >= 1`.
pub fn msm_frequency_linear<T: Real>(
    q: &WalkerModeQuery<T>,
    material: &MaterialParams<T>,
) -> Result<T> {
    check_walker_indices(q.i, q.j)?;
    let k = q.j.unsigned_abs();
    if k == 0 {
        return Err(invalid("j", "closed forms require |j| >= 1"));
    }
    let kf = T::of(k as f64);
    let two = T::of(2.0);
    let coeff = if q.i == k {
        kf / (two * kf + T::one())
    } else if q.i == k + 1 {
        kf / (two * kf + T::of(3.0))
    } else {
        return Err(invalid(
            "i",
            format!("no linear closed form for ({}, {}): need i - |j| in {{0, 1}}", q.i, q.j),
        ));
    };
    let third = T::one() / T::of(3.0);
    Ok(material.gamma_e * q.b_ext + (coeff - third) * material.gamma_e * material.mu0_ms)
}

/// Frequency of the `(2, 0)` mode,
/// `f = gamma_e mu0Ms sqrt((r - 1/3)(r + 7/15))`, `r = B_ext / mu0Ms`.
pub fn msm20_frequency<T: Real>(b_ext: T, material: &MaterialParams<T>) -> Result<T> {
    let r = b_ext / material.mu0_ms;
    let radicand = (r - T::one() / T::of(3.0)) * (r + T::of(7.0) / T::of(15.0));
    if !(radicand >= T::zero()) {
        return Err(Error::Domain(format!(
            "(2,0) mode needs B_ext / mu0Ms >= 1/3, got {}",
            r.to_f64_lossy()
        )));
    }
    Ok(material.gamma_e * material.mu0_ms * radicand.sqrt())
}

/// Relative tolerance on the imaginary part of the logarithmic derivative.
const IMAG_TOL: f64 = 1e-9;

/// Left-hand side of the Walker characteristic equation
/// `i + 1 + xi0 P'(xi0)/P(xi0) ± j chi_2` at frequency `f`.
///
/// `xi0^2 = 1 + 1/chi_1` is negative for frequencies well above the
/// internal-field resonance, so `xi0` is evaluated as a complex number and
/// the Legendre ratio is taken on the complex path. The ratio is a real
/// function of `xi0^2`; an imaginary part larger than `1e-9` of its
/// magnitude is reported as a domain error.
pub fn walker_characteristic<T: Real>(
    f: T,
    q: &WalkerModeQuery<T>,
    material: &MaterialParams<T>,
) -> Result<T> {
    check_walker_indices(q.i, q.j)?;
    let f = finite("frequency", f)?;
    let b_i = InternalField::from_external(q.b_ext, material).b_i;
    if !(b_i > T::zero()) {
        return Err(Error::Domain(format!(
            "internal field {} T is not positive",
            b_i.to_f64_lossy()
        )));
    }
    let a = material.gamma_e * b_i;
    let m_s = material.gamma_e * material.mu0_ms;
    let den = a * a - f * f;
    let k = q.j.unsigned_abs();
    // chi_1, chi_2 diverge at f = gamma_e B_i; for j = 0 only chi_1 enters,
    // and only through 1/chi_1, so the residual stays regular there.
    if k != 0 && den.abs() <= T::of(4.0) * T::epsilon() * a * a {
        return Err(Error::NearPole {
            pole_hz: a.to_f64_lossy(),
            at_hz: f.to_f64_lossy(),
        });
    }
    let u = T::one() + den / (a * m_s); // xi0^2
    let xi0 = Complex::new(u, T::zero()).sqrt();
    let ratio = legendre::log_derivative_polynomial(q.i, k, xi0).ok_or_else(|| {
        Error::Domain(format!(
            "P_{}^{} vanishes at xi0^2 = {}",
            q.i,
            k,
            u.to_f64_lossy()
        ))
    })?;
    if ratio.im.abs() > T::of(IMAG_TOL) * ratio.norm().max(T::one()) {
        return Err(Error::Domain(format!(
            "Legendre ratio has imaginary part {} at xi0^2 = {}",
            ratio.im.to_f64_lossy(),
            u.to_f64_lossy()
        )));
    }
    let mut value = T::of((q.i + 1) as f64) + ratio.re;
    if k != 0 {
        // weight factor (1 - xi^2)^{k/2}: xi d/dxi log w = -k u / (1 - u)
        let kf = T::of(k as f64);
        value = value - kf * u / (T::one() - u);
        let chi2 = m_s * f / den;
        value = value + q.branch.sign::<T>() * T::of(q.j as f64) * chi2;
    }
    finite("characteristic residual", value)
}

/// Number of panels used to scan a search window for sign changes.
pub const SCAN_PANELS: usize = 64;

/// Default search window: `±1.5 gamma_e mu0Ms` around the Kittel frequency,
/// clipped to positive frequencies.
pub fn default_window<T: Real>(b_ext: T, material: &MaterialParams<T>) -> (T, T) {
    let centre = kittel_frequency(b_ext, material);
    let half = T::of(1.5) * material.gamma_e * material.mu0_ms;
    let lo = (centre - half).max(centre * T::of(1e-3));
    (lo, centre + half)
}

/// Absolute frequency tolerance of the root refinement, Hz.
pub const ROOT_TOL_HZ: f64 = 1.0;

/// All genuine roots of [`walker_characteristic`] in `window`.
///
/// The window is scanned in `panels` equal panels (split at the
/// internal-field pole). Each sign change is refined with Brent's method;
/// refinements that converge onto a pole (residual not small) are dropped.
pub fn walker_roots<T: Real>(
    q: &WalkerModeQuery<T>,
    material: &MaterialParams<T>,
    window: (T, T),
    panels: usize,
) -> Result<Vec<T>> {
    let (lo, hi) = window;
    if !(lo < hi) || panels == 0 {
        return Err(invalid("window", "search window must satisfy lo < hi"));
    }
    let residual = |f: T| walker_characteristic(f, q, material);
    let pole = material.gamma_e * InternalField::from_external(q.b_ext, material).b_i;
    let gap = pole * T::of(1e-9);

    let mut nodes: Vec<T> = (0..=panels)
        .map(|k| lo + (hi - lo) * T::of_usize(k) / T::of_usize(panels))
        .collect();
    let split = pole - gap > lo && pole + gap < hi;
    if split {
        nodes.push(pole - gap);
        nodes.push(pole + gap);
        nodes.retain(|&x| !(x > pole - gap && x < pole + gap));
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    }
    let values: Vec<Option<T>> = nodes.iter().map(|&x| residual(x).ok()).collect();

    let res_tol = T::of(1e-6) * T::of((q.i + 1) as f64);
    let mut roots: Vec<T> = Vec::new();
    for k in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[k], nodes[k + 1]);
        if split && x0 == pole - gap {
            continue;
        }
        let (Some(f0), Some(f1)) = (values[k], values[k + 1]) else {
            continue;
        };
        if f0 == T::zero() {
            if roots.last() != Some(&x0) {
                roots.push(x0);
            }
            continue;
        }
        if f1 == T::zero() || (f0 > T::zero()) == (f1 > T::zero()) {
            continue;
        }
        let Ok(root) = brent(residual, x0, x1, T::of(ROOT_TOL_HZ), 200) else {
            continue;
        };
        match residual(root) {
            Ok(r) if r.abs() <= res_tol => roots.push(root),
            _ => {}
        }
    }
    if let Some(&last) = nodes.last() {
        if values.last().copied().flatten() == Some(T::zero()) && roots.last() != Some(&last) {
            roots.push(last);
        }
    }
    Ok(roots)
}

/// Solves the characteristic equation for the single root in `window`.
pub fn solve_walker_mode<T: Real>(
    q: &WalkerModeQuery<T>,
    material: &MaterialParams<T>,
    window: (T, T),
) -> Result<T> {
    let roots = walker_roots(q, material, window, SCAN_PANELS)?;
    match roots.len() {
        1 => Ok(roots[0]),
        0 => Err(Error::NoBracket {
            lo_hz: window.0.to_f64_lossy(),
            hi_hz: window.1.to_f64_lossy(),
        }),
        n => Err(Error::MultipleRoots {
            count: n,
            lo_hz: window.0.to_f64_lossy(),
            hi_hz: window.1.to_f64_lossy(),
        }),
    }
}

/// Closed-form frequency for `(i, j)` if one exists: the linear forms for
/// `i - |j|` in `{0, 1}` with `|j| >= 1`, or the `(2, 0)` form.
pub fn closed_form_frequency<T: Real>(
    i: u32,
    j: i32,
    b_ext: T,
    material: &MaterialParams<T>,
) -> Option<Result<T>> {
    let k = j.unsigned_abs();
    if (i, k) == (2, 0) {
        Some(msm20_frequency(b_ext, material))
    } else if k >= 1 && (i == k || i == k + 1) {
        Some(WalkerModeQuery::natural(i, j, b_ext).and_then(|q| msm_frequency_linear(&q, material)))
    } else {
        None
    }
}

/// One row of the sign-branch table.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord<T = f64> {
    pub i: u32,
    pub j: i32,
    pub b_ext: T,
    pub closed_form: Option<T>,
    /// Roots of the `+` branch in the default window.
    pub plus_roots: Vec<T>,
    /// Roots of the `-` branch in the default window.
    pub minus_roots: Vec<T>,
    /// Branch whose root reproduces the closed form to `1e-9` relative.
    pub matching_branch: Option<SignBranch>,
}

/// Solves both sign branches for every `(i, j)` with `1 <= i <= max_i` and
/// records which branch reproduces the available closed form.
pub fn branch_table<T: Real>(
    max_i: u32,
    b_ext: T,
    material: &MaterialParams<T>,
) -> Result<Vec<BranchRecord<T>>> {
    let window = default_window(b_ext, material);
    let mut out = Vec::new();
    for i in 1..=max_i {
        for j in -(i as i32)..=(i as i32) {
            let closed_form = closed_form_frequency(i, j, b_ext, material).and_then(|r| r.ok());
            let plus = walker_roots(
                &WalkerModeQuery::new(i, j, SignBranch::Plus, b_ext)?,
                material,
                window,
                SCAN_PANELS,
            )?;
            let minus = walker_roots(
                &WalkerModeQuery::new(i, j, SignBranch::Minus, b_ext)?,
                material,
                window,
                SCAN_PANELS,
            )?;
            let matches = |roots: &[T]| {
                closed_form.is_some_and(|cf| {
                    roots
                        .iter()
                        .any(|&r| ((r - cf) / cf).abs() <= T::of(1e-9))
                })
            };
            let matching_branch = if matches(&plus) {
                Some(SignBranch::Plus)
            } else if matches(&minus) {
                Some(SignBranch::Minus)
            } else {
                None
            };
            out.push(BranchRecord {
                i,
                j,
                b_ext,
                closed_form,
                plus_roots: plus,
                minus_roots: minus,
                matching_branch,
            });
        }
    }
    Ok(out)
}
