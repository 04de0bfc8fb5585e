//! Transmission, reflection and microwave-to-optical conversion spectra.
//!
//! All S-parameters share the denominator
//! `D(f) = (f - f_c) + i kappa_t - sum_m g_m^2 chi_m(f)`:
//!
//! * `S21 = -2 i kappa_e / D`
//! * `S11 = 1 - 2 i kappa_e / D`
//! * `S31_m = -i g_m chi_m sqrt(beta_m delta_m / kappa_e) S21`
//!
//! The last form is valid for any number of modes. For two modes it is
//! algebraically identical to the nested-dressing expression implemented in
//! [`s31_two_mode_closed_form`], which is kept as an independent check.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::model::{lorentzian, CavityParams, HybridSystem, ResolvedMode, ResolvedSystem};
use crate::roots::golden_section_min;
use crate::scalar::{finite, Real};
use crate::{Error, Result};

impl<T: Real> ResolvedSystem<T> {
    /// Shared denominator `D(f)`.
    pub fn denominator(&self, f: T) -> Complex<T> {
        let c = &self.cavity;
        let mut d = Complex::new(f - c.f_c, c.kappa_t());
        for m in &self.modes {
            d = d - lorentzian(f - m.f_m, m.gamma) * (m.g * m.g);
        }
        d
    }

    pub fn s21(&self, f: T) -> Complex<T> {
        Complex::new(T::zero(), -T::of(2.0) * self.cavity.kappa_e) / self.denominator(f)
    }

    pub fn s11(&self, f: T) -> Complex<T> {
        Complex::new(T::one(), T::zero()) + self.s21(f)
    }

    /// Conversion amplitude of mode `k` given a precomputed `S21(f)`.
    fn s31_from_s21(&self, k: usize, f: T, s21: Complex<T>) -> Complex<T> {
        let m = &self.modes[k];
        if m.delta == T::zero() || m.g == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let scale = (m.beta * m.delta / self.cavity.kappa_e).sqrt() * m.g;
        Complex::new(T::zero(), -scale) * lorentzian(f - m.f_m, m.gamma) * s21
    }

    /// Conversion amplitude of mode `k`.
    pub fn s31(&self, k: usize, f: T) -> Complex<T> {
        self.s31_from_s21(k, f, self.s21(f))
    }

    /// Total conversion efficiency `sum_m |S31_m|^2`.
    pub fn eta(&self, f: T) -> T {
        let s21 = self.s21(f);
        (0..self.modes.len())
            .map(|k| self.s31_from_s21(k, f, s21).norm_sqr())
            .sum()
    }
}

fn checked(system: &HybridSystem<impl Real>) -> Result<()> {
    if !(system.cavity.kappa_e > num_traits::zero()) {
        return Err(invalid("kappa_e", "must be > 0"));
    }
    Ok(())
}

/// Transmission amplitude `S21(f)` at bias field `b`.
pub fn s21<T: Real>(f: T, system: &HybridSystem<T>, b: T) -> Result<Complex<T>> {
    let f = finite("frequency", f)?;
    Ok(system.resolve(b)?.s21(f))
}

/// Reflection amplitude `S11(f)` at bias field `b`.
pub fn s11<T: Real>(f: T, system: &HybridSystem<T>, b: T) -> Result<Complex<T>> {
    let f = finite("frequency", f)?;
    Ok(system.resolve(b)?.s11(f))
}

/// Conversion amplitude of the mode labelled `label`.
pub fn s31_mode<T: Real>(f: T, system: &HybridSystem<T>, b: T, label: &str) -> Result<Complex<T>> {
    let f = finite("frequency", f)?;
    let k = system.mode_index(label)?;
    checked(system)?;
    Ok(system.resolve(b)?.s31(k, f))
}

/// Total conversion efficiency `eta(f) = sum_m |S31_m(f)|^2`.
pub fn eta_spectrum<T: Real>(f: T, system: &HybridSystem<T>, b: T) -> Result<T> {
    let f = finite("frequency", f)?;
    if system.modes.is_empty() {
        return Err(Error::NoModes);
    }
    checked(system)?;
    Ok(system.resolve(b)?.eta(f))
}

/// Efficiency at the multi-mode resonance `f = f_c = f_m` for all `m`:
/// `4 kappa_e / (1 + sum C_m)^2 * sum delta_m beta_m C_m^2 / g_m^2`.
///
/// `C_m^2 / g_m^2` is evaluated as `g_m^2 / (kappa_t gamma_m)^2`, so a mode
/// with `g_m = 0` contributes nothing.
pub fn eta_resonant<T: Real>(system: &HybridSystem<T>) -> Result<T> {
    if system.modes.is_empty() {
        return Err(Error::NoModes);
    }
    let kt = system.cavity.kappa_t();
    let mut coop_sum = T::zero();
    let mut weighted = T::zero();
    for m in &system.modes {
        let lw = kt * m.gamma;
        coop_sum = coop_sum + m.g * m.g / lw;
        weighted = weighted + m.delta * m.beta * (m.g / lw) * (m.g / lw);
    }
    let denom = T::one() + coop_sum;
    Ok(T::of(4.0) * system.cavity.kappa_e / (denom * denom) * weighted)
}

/// Single-mode resonant efficiency
/// `(2 sqrt(delta kappa_e) C / (g (1 + C)))^2`, `C = g^2 / (kappa_t gamma)`.
pub fn eta_single_resonant<T: Real>(g: T, gamma: T, delta: T, cavity: &CavityParams<T>) -> Result<T> {
    if !(g > T::zero()) {
        return Err(invalid("g", "single-mode resonant efficiency needs g > 0"));
    }
    if !(gamma > T::zero()) {
        return Err(invalid("gamma", "must be > 0"));
    }
    let coop = g * g / (cavity.kappa_t() * gamma);
    let amp = T::of(2.0) * (delta * cavity.kappa_e).sqrt() * coop / (g * (T::one() + coop));
    Ok(amp * amp)
}

/// Literal two-mode conversion amplitudes in nested-dressing form:
///
/// `S31_K = -2 sqrt(beta_K delta_K kappa_e) g_K chi_K chi_c X_M / (1 - g_K^2 chi_K chi_c X_M)`,
/// `X_M = 1 + g_M^2 chi_M chi_c T_M`, and the same with `K` and `M` swapped.
pub fn s31_two_mode_closed_form<T: Real>(
    f: T,
    cavity: &CavityParams<T>,
    first: &ResolvedMode<T>,
    second: &ResolvedMode<T>,
) -> (Complex<T>, Complex<T>) {
    let one = Complex::new(T::one(), T::zero());
    let chi_c = lorentzian(f - cavity.f_c, cavity.kappa_t());
    let chi_1 = lorentzian(f - first.f_m, first.gamma);
    let chi_2 = lorentzian(f - second.f_m, second.gamma);
    let g1 = first.g * first.g;
    let g2 = second.g * second.g;
    let t1 = (one - chi_1 * chi_c * g1).inv();
    let t2 = (one - chi_2 * chi_c * g2).inv();
    let x2 = one + chi_2 * chi_c * t2 * g2;
    let x1 = one + chi_1 * chi_c * t1 * g1;
    let pre = |m: &ResolvedMode<T>| -T::of(2.0) * (m.beta * m.delta * cavity.kappa_e).sqrt() * m.g;
    let s1 = chi_1 * chi_c * x2 * pre(first) / (one - chi_1 * chi_c * x2 * g1);
    let s2 = chi_2 * chi_c * x1 * pre(second) / (one - chi_2 * chi_c * x1 * g2);
    (s1, s2)
}

/// Normal-mode frequencies of one magnon mode coupled to the cavity,
/// `(f_c + f_m)/2 ± sqrt(4 g^2 + (f_c - f_m)^2)/2`, returned as `(upper, lower)`.
pub fn branch_frequencies<T: Real>(f_c: T, f_m: T, g: T) -> (T, T) {
    let half = T::of(0.5);
    let mean = half * (f_c + f_m);
    let d = f_c - f_m;
    let split = half * (T::of(4.0) * g * g + d * d).sqrt();
    (mean + split, mean - split)
}

/// Upper and lower dispersion branches for mode `label` at bias field `b`.
pub fn dispersion_branches<T: Real>(system: &HybridSystem<T>, label: &str, b: T) -> Result<(T, T)> {
    let mode = system.mode(label)?;
    let f_m = mode.frequency(b, &system.material)?;
    Ok(branch_frequencies(system.cavity.f_c, f_m, mode.g))
}

/// Field and size of the smallest gap between the two branches of mode
/// `label` for `b` in `field_range`.
pub fn minimum_splitting<T: Real>(
    system: &HybridSystem<T>,
    label: &str,
    field_range: (T, T),
) -> Result<(T, T)> {
    let mode = system.mode(label)?;
    // validate once so the objective can unwrap
    mode.frequency(field_range.0, &system.material)?;
    mode.frequency(field_range.1, &system.material)?;
    let gap = |b: T| {
        mode.frequency(b, &system.material)
            .map(|f_m| {
                let (up, lo) = branch_frequencies(system.cavity.f_c, f_m, mode.g);
                up - lo
            })
            .unwrap_or(T::infinity())
    };
    let xtol = (field_range.1 - field_range.0).abs() * T::epsilon();
    Ok(golden_section_min(gap, field_range.0, field_range.1, xtol, 500))
}

/// Which complex response a spectrum carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    S21,
    S11,
    S31(String),
}

/// Complex response on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum<T = f64> {
    frequencies: Vec<T>,
    values: Vec<Complex<T>>,
}

pub(crate) fn check_grid<T: Real>(name: &'static str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid(name));
    }
    for &x in grid {
        finite(name, x)?;
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::GridNotAscending(name));
    }
    Ok(())
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn new(frequencies: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        check_grid("frequencies", &frequencies)?;
        if frequencies.len() != values.len() {
            return Err(invalid(
                "values",
                format!("{} values for {} frequencies", values.len(), frequencies.len()),
            ));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("values", "all values must be finite"));
        }
        Ok(Self { frequencies, values })
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }
}

/// Evaluates `response` on `frequencies` at bias field `b`.
pub fn complex_spectrum<T: Real>(
    system: &HybridSystem<T>,
    b: T,
    frequencies: &[T],
    response: &Response,
) -> Result<ComplexSpectrum<T>> {
    check_grid("frequencies", frequencies)?;
    let resolved = system.resolve(b)?;
    let values = match response {
        Response::S21 => frequencies.iter().map(|&f| resolved.s21(f)).collect(),
        Response::S11 => frequencies.iter().map(|&f| resolved.s11(f)).collect(),
        Response::S31(label) => {
            let k = system.mode_index(label)?;
            checked(system)?;
            frequencies.iter().map(|&f| resolved.s31(k, f)).collect()
        }
    };
    ComplexSpectrum::new(frequencies.to_vec(), values)
}

/// Real observable rendered by [`sweep_map`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    S21Power,
    S11Power,
    Eta,
    S21Phase,
    S11Phase,
    S31Power(String),
    S31Phase(String),
}

impl Observable {
    pub fn is_phase(&self) -> bool {
        matches!(self, Observable::S21Phase | Observable::S11Phase | Observable::S31Phase(_))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::S21Power => f.write_str("s21_power"),
            Observable::S11Power => f.write_str("s11_power"),
            Observable::Eta => f.write_str("eta"),
            Observable::S21Phase => f.write_str("s21_phase"),
            Observable::S11Phase => f.write_str("s11_phase"),
            Observable::S31Power(l) => write!(f, "s31_power:{l}"),
            Observable::S31Phase(l) => write!(f, "s31_phase:{l}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("observable", format!("unknown observable `{s}`"));
        match s.split_once(':') {
            None => match s {
                "s21_power" => Ok(Observable::S21Power),
                "s11_power" => Ok(Observable::S11Power),
                "eta" => Ok(Observable::Eta),
                "s21_phase" => Ok(Observable::S21Phase),
                "s11_phase" => Ok(Observable::S11Phase),
                _ => Err(bad()),
            },
            Some((kind, label)) if !label.is_empty() => match kind {
                "s31_power" => Ok(Observable::S31Power(label.to_string())),
                "s31_phase" => Ok(Observable::S31Phase(label.to_string())),
                _ => Err(bad()),
            },
            Some(_) => Err(bad()),
        }
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

/// Real observable on a (bias field × frequency) grid, stored row-major
/// with one row per field value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap<T = f64> {
    pub observable: Observable,
    fields: Vec<T>,
    frequencies: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> SweepMap<T> {
    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, field_index: usize, frequency_index: usize) -> T {
        self.values[field_index * self.frequencies.len() + frequency_index]
    }

    pub fn row(&self, field_index: usize) -> &[T] {
        let n = self.frequencies.len();
        &self.values[field_index * n..(field_index + 1) * n]
    }

    /// Unwraps phase along frequency within each field row. No-op for
    /// non-phase observables.
    pub fn unwrap_rows(&mut self) {
        if !self.observable.is_phase() {
            return;
        }
        let n = self.frequencies.len();
        for row in self.values.chunks_mut(n) {
            unwrap_phase(row);
        }
    }
}

fn observe<T: Real>(r: &ResolvedSystem<T>, obs: &Observable, mode: Option<usize>, f: T) -> T {
    match obs {
        Observable::S21Power => r.s21(f).norm_sqr(),
        Observable::S11Power => r.s11(f).norm_sqr(),
        Observable::Eta => r.eta(f),
        Observable::S21Phase => r.s21(f).arg(),
        Observable::S11Phase => r.s11(f).arg(),
        Observable::S31Power(_) => r.s31(mode.expect("resolved label"), f).norm_sqr(),
        Observable::S31Phase(_) => r.s31(mode.expect("resolved label"), f).arg(),
    }
}

/// Evaluates `observable` on every `(b, f)` pair. Rows are computed in
/// parallel; the output order always follows the input grids.
pub fn sweep_map<T: Real>(
    system: &HybridSystem<T>,
    fields: &[T],
    frequencies: &[T],
    observable: &Observable,
) -> Result<SweepMap<T>> {
    check_grid("fields", fields)?;
    check_grid("frequencies", frequencies)?;
    let mode = match observable {
        Observable::S31Power(l) | Observable::S31Phase(l) => Some(system.mode_index(l)?),
        Observable::Eta if system.modes.is_empty() => return Err(Error::NoModes),
        _ => None,
    };
    let rows: Vec<Vec<T>> = fields
        .par_iter()
        .map(|&b| {
            let r = system.resolve(b)?;
            frequencies
                .iter()
                .map(|&f| finite("map value", observe(&r, observable, mode, f)))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SweepMap {
        observable: observable.clone(),
        fields: fields.to_vec(),
        frequencies: frequencies.to_vec(),
        values: rows.into_iter().flatten().collect(),
    })
}

/// In-place 1D phase unwrapping: removes jumps larger than `pi` by adding
/// multiples of `2 pi`.
pub fn unwrap_phase<T: Real>(phase: &mut [T]) {
    let two_pi = T::PI() + T::PI();
    let mut offset = T::zero();
    for k in 1..phase.len() {
        let raw_prev = phase[k - 1] - offset;
        let raw = phase[k];
        let jump = raw - raw_prev;
        if jump > T::PI() {
            offset = offset - two_pi * ((jump + T::PI()) / two_pi).floor();
        } else if jump < -T::PI() {
            offset = offset + two_pi * ((-jump + T::PI()) / two_pi).floor();
        }
        phase[k] = raw + offset;
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive (`[start]` if
/// `n == 1`).
pub fn linspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::of_usize(n - 1);
            (0..n)
                .map(|k| if k == n - 1 { stop } else { start + step * T::of_usize(k) })
                .collect()
        }
    }
}
