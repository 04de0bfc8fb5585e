//! Physical parameter types and the three response functions every
//! scattering formula is assembled from.
//!
//! All rate-like quantities (`f_c`, `kappa_e`, `kappa_i`, `g`, `gamma`,
//! `delta`) are ordinary frequencies `omega / 2 pi` in Hz. The scattering
//! formulas are homogeneous in these rates, so the dimensionless results
//! are the same as with angular frequencies.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::magnetostatics::{self, check_walker_indices, WalkerModeQuery};
use crate::scalar::{finite, Real};
use crate::{Error, Result};

/// Microwave cavity mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct CavityParams<T = f64> {
    /// Resonance frequency, Hz.
    pub f_c: T,
    /// External (port) coupling rate, Hz.
    pub kappa_e: T,
    /// Internal loss rate, Hz.
    pub kappa_i: T,
}

impl<T: Real> CavityParams<T> {
    pub fn new(f_c: T, kappa_e: T, kappa_i: T) -> Result<Self> {
        let c = Self { f_c, kappa_e, kappa_i };
        c.validate()?;
        Ok(c)
    }

    /// Total loss rate `kappa_e + kappa_i`.
    #[inline]
    pub fn kappa_t(&self) -> T {
        self.kappa_e + self.kappa_i
    }

    pub fn validate(&self) -> Result<()> {
        finite("f_c", self.f_c)?;
        finite("kappa_e", self.kappa_e)?;
        finite("kappa_i", self.kappa_i)?;
        if !(self.f_c > T::zero()) {
            return Err(invalid("f_c", "must be > 0"));
        }
        if !(self.kappa_e > T::zero()) {
            return Err(invalid("kappa_e", "must be > 0"));
        }
        if !(self.kappa_i >= T::zero()) {
            return Err(invalid("kappa_i", "must be >= 0"));
        }
        Ok(())
    }
}

/// Rule giving a magnon mode's frequency as a function of the bias field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldMap<T = f64> {
    /// `f = gamma_e B`.
    Kittel,
    /// Linear Walker closed form for `i - |j|` in `{0, 1}`.
    WalkerLinear { i: u32, j: i32 },
    /// The `(2, 0)` Walker mode.
    Walker20,
    /// Field-independent frequency, Hz.
    Fixed { frequency: T },
}

impl<T: Real> FieldMap<T> {
    /// Mode frequency at bias field `b` (tesla).
    pub fn frequency(&self, b: T, material: &MaterialParams<T>) -> Result<T> {
        match self {
            FieldMap::Kittel => Ok(magnetostatics::kittel_frequency(b, material)),
            FieldMap::WalkerLinear { i, j } => {
                let q = WalkerModeQuery::natural(*i, *j, b)?;
                magnetostatics::msm_frequency_linear(&q, material)
            }
            FieldMap::Walker20 => magnetostatics::msm20_frequency(b, material),
            FieldMap::Fixed { frequency } => Ok(*frequency),
        }
    }
}

fn default_beta<T: Real>() -> T {
    T::one()
}

/// One collective spin mode coupled to the cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct MagnonMode<T = f64> {
    pub label: String,
    /// Walker indices `(i, j)` if the mode is identified.
    #[serde(default, rename = "walker", skip_serializing_if = "Option::is_none")]
    pub walker_indices: Option<(u32, i32)>,
    /// Magnon-photon coupling strength, Hz.
    pub g: T,
    /// Linewidth, Hz.
    pub gamma: T,
    /// Optical photon-magnon coupling rate, Hz.
    #[serde(default)]
    pub delta: T,
    /// Amplification factor of the conversion coefficient.
    #[serde(default = "default_beta")]
    pub beta: T,
    pub field_map: FieldMap<T>,
}

impl<T: Real> MagnonMode<T> {
    /// A mode with `delta = 0` and `beta = 1`.
    pub fn new(label: impl Into<String>, g: T, gamma: T, field_map: FieldMap<T>) -> Result<Self> {
        let mode = Self {
            label: label.into(),
            walker_indices: None,
            g,
            gamma,
            delta: T::zero(),
            beta: T::one(),
            field_map,
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn with_delta(mut self, delta: T) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: T) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_walker_indices(mut self, i: u32, j: i32) -> Result<Self> {
        self.walker_indices = Some((i, j));
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let name = |p: &str| format!("{}.{p}", self.label);
        for (p, v) in [("g", self.g), ("gamma", self.gamma), ("delta", self.delta), ("beta", self.beta)] {
            if !v.is_finite() {
                return Err(invalid(name(p), "must be finite"));
            }
        }
        if !(self.g >= T::zero()) {
            return Err(invalid(name("g"), "must be >= 0"));
        }
        if !(self.gamma > T::zero()) {
            return Err(invalid(name("gamma"), "must be > 0"));
        }
        if !(self.delta >= T::zero()) {
            return Err(invalid(name("delta"), "must be >= 0"));
        }
        if !(self.beta > T::zero()) {
            return Err(invalid(name("beta"), "must be > 0"));
        }
        if let Some((i, j)) = self.walker_indices {
            check_walker_indices(i, j)?;
        }
        match &self.field_map {
            FieldMap::WalkerLinear { i, j } => check_walker_indices(*i, *j)?,
            FieldMap::Fixed { frequency } => {
                finite("field_map.frequency", *frequency)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Frequency at bias field `b`.
    pub fn frequency(&self, b: T, material: &MaterialParams<T>) -> Result<T> {
        self.field_map.frequency(b, material)
    }
}

/// Material constants of the magnon host. Fields missing from a serialized
/// form take the YIG defaults of [`MaterialParams::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default, deny_unknown_fields)]
pub struct MaterialParams<T = f64> {
    /// Saturation magnetisation as a flux density, T.
    pub mu0_ms: T,
    /// Gyromagnetic ratio, Hz/T.
    pub gamma_e: T,
    /// Verdet constant, rad/m.
    pub verdet: T,
    /// Spin quantum number of a magnetic site.
    pub spin: T,
    /// Sphere diameter, m.
    pub diameter: T,
    /// Spatial overlap coefficient, `0 < xi <= 1`.
    #[serde(default = "default_beta")]
    pub xi: T,
}

impl<T: Real> MaterialParams<T> {
    /// YIG at room temperature: `mu0 Ms = 0.178 T`, `gamma_e = 28 GHz/T`,
    /// Verdet constant 3.8 rad/cm at 1.55 um, `s = 5/2`, `xi = 1`.
    pub fn yig(diameter: T) -> Self {
        Self {
            mu0_ms: T::of(0.178),
            gamma_e: T::of(28e9),
            verdet: T::of(380.0),
            spin: T::of(2.5),
            diameter,
            xi: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (p, v) in [
            ("mu0_ms", self.mu0_ms),
            ("gamma_e", self.gamma_e),
            ("verdet", self.verdet),
            ("spin", self.spin),
            ("diameter", self.diameter),
            ("xi", self.xi),
        ] {
            finite(p, v).map_err(|_| invalid(p, "must be finite"))?;
        }
        if !(self.mu0_ms > T::zero()) {
            return Err(invalid("mu0_ms", "must be > 0"));
        }
        if !(self.gamma_e > T::zero()) {
            return Err(invalid("gamma_e", "must be > 0"));
        }
        if !(self.diameter > T::zero()) {
            return Err(invalid("diameter", "must be > 0"));
        }
        if !(self.xi > T::zero() && self.xi <= T::one()) {
            return Err(invalid("xi", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

impl<T: Real> Default for MaterialParams<T> {
    fn default() -> Self {
        Self::yig(T::of(0.45e-3))
    }
}

/// Probe laser at the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default, deny_unknown_fields)]
pub struct OpticalDrive<T = f64> {
    /// Vacuum wavelength, m.
    pub wavelength: T,
    /// Optical power at the sample, W.
    pub power: T,
}

impl<T: Real> OpticalDrive<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > T::zero() && self.wavelength.is_finite()) {
            return Err(invalid("wavelength", "must be finite and > 0"));
        }
        if !(self.power >= T::zero() && self.power.is_finite()) {
            return Err(invalid("power", "must be finite and >= 0"));
        }
        Ok(())
    }
}

impl<T: Real> Default for OpticalDrive<T> {
    fn default() -> Self {
        Self {
            wavelength: T::of(1.55e-6),
            power: T::of(15e-3),
        }
    }
}

/// Cavity plus an ordered set of magnon modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct HybridSystem<T = f64> {
    pub cavity: CavityParams<T>,
    #[serde(default)]
    pub modes: Vec<MagnonMode<T>>,
    #[serde(default)]
    pub material: MaterialParams<T>,
    #[serde(default)]
    pub optical: OpticalDrive<T>,
}

impl<T: Real> HybridSystem<T> {
    pub fn new(
        cavity: CavityParams<T>,
        modes: Vec<MagnonMode<T>>,
        material: MaterialParams<T>,
        optical: OpticalDrive<T>,
    ) -> Result<Self> {
        let s = Self {
            cavity,
            modes,
            material,
            optical,
        };
        s.validate()?;
        Ok(s)
    }

    /// Bare cavity with YIG material defaults.
    pub fn bare(cavity: CavityParams<T>) -> Result<Self> {
        Self::new(cavity, Vec::new(), MaterialParams::default(), OpticalDrive::default())
    }

    pub fn with_mode(mut self, mode: MagnonMode<T>) -> Result<Self> {
        self.modes.push(mode);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        self.material.validate()?;
        self.optical.validate()?;
        for (k, m) in self.modes.iter().enumerate() {
            m.validate()?;
            if self.modes[..k].iter().any(|o| o.label == m.label) {
                return Err(invalid("modes", format!("duplicate label `{}`", m.label)));
            }
        }
        Ok(())
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn mode(&self, label: &str) -> Result<&MagnonMode<T>> {
        self.mode_index(label).map(|k| &self.modes[k])
    }

    /// Evaluates every mode's field map at bias field `b`.
    pub fn resolve(&self, b: T) -> Result<ResolvedSystem<T>> {
        let b = finite("bias field", b)?;
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let f_m = finite("mode frequency", m.frequency(b, &self.material)?)?;
                Ok(ResolvedMode {
                    f_m,
                    g: m.g,
                    gamma: m.gamma,
                    delta: m.delta,
                    beta: m.beta,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedSystem {
            cavity: self.cavity.clone(),
            modes,
        })
    }
}

/// A magnon mode with its frequency fixed at a particular bias field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedMode<T = f64> {
    pub f_m: T,
    pub g: T,
    pub gamma: T,
    pub delta: T,
    pub beta: T,
}

/// A [`HybridSystem`] at one bias field: plain numbers, same mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSystem<T = f64> {
    pub cavity: CavityParams<T>,
    pub modes: Vec<ResolvedMode<T>>,
}

/// `1 / (detuning + i linewidth)` without input checks.
#[inline]
pub(crate) fn lorentzian<T: Real>(detuning: T, linewidth: T) -> Complex<T> {
    Complex::new(detuning, linewidth).inv()
}

/// Cavity susceptibility `chi_c(f) = 1 / ((f - f_c) + i kappa_t)`, 1/Hz.
pub fn susceptibility_cavity<T: Real>(f: T, cavity: &CavityParams<T>) -> Result<Complex<T>> {
    let f = finite("frequency", f)?;
    if !(cavity.kappa_t() > T::zero()) {
        return Err(invalid("kappa_t", "must be > 0"));
    }
    Ok(lorentzian(f - cavity.f_c, cavity.kappa_t()))
}

/// Magnon susceptibility `chi_m(f) = 1 / ((f - f_m) + i gamma)`, 1/Hz.
pub fn susceptibility_magnon<T: Real>(f: T, mode: &MagnonMode<T>, f_m: T) -> Result<Complex<T>> {
    let f = finite("frequency", f)?;
    let f_m = finite("mode frequency", f_m)?;
    if !(mode.gamma > T::zero()) {
        return Err(invalid("gamma", "must be > 0"));
    }
    Ok(lorentzian(f - f_m, mode.gamma))
}

/// Dressing factor `T_m(f) = 1 / (1 - g^2 chi_m chi_c)`.
pub fn dressing_factor<T: Real>(
    f: T,
    mode: &MagnonMode<T>,
    f_m: T,
    cavity: &CavityParams<T>,
) -> Result<Complex<T>> {
    let chi_c = susceptibility_cavity(f, cavity)?;
    let chi_m = susceptibility_magnon(f, mode, f_m)?;
    Ok((Complex::new(T::one(), T::zero()) - chi_m * chi_c * (mode.g * mode.g)).inv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cavity() -> CavityParams<f64> {
        CavityParams::new(10.632e9, 2.1e6, 0.6e6).unwrap()
    }

    fn kittel(g: f64, gamma: f64) -> MagnonMode<f64> {
        MagnonMode::new("K", g, gamma, FieldMap::Kittel).unwrap()
    }

    #[test]
    fn kappa_t_is_sum() {
        assert_eq!(cavity().kappa_t(), 2.7e6);
    }

    #[test]
    fn cavity_validation() {
        assert!(CavityParams::new(0.0, 1.0, 0.0).is_err());
        assert!(CavityParams::new(1.0, 0.0, 0.0).is_err());
        assert!(CavityParams::new(1.0, 1.0, -1.0).is_err());
        assert!(CavityParams::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn mode_validation() {
        assert!(MagnonMode::new("K", -1.0, 1.0, FieldMap::Kittel).is_err());
        assert!(MagnonMode::new("K", 1.0, 0.0, FieldMap::Kittel).is_err());
        assert!(kittel(1.0, 1.0).with_delta(-1.0).is_err());
        assert!(kittel(1.0, 1.0).with_beta(0.0).is_err());
        assert!(kittel(1.0, 1.0).with_walker_indices(2, 3).is_err());
        assert!(kittel(1.0, 1.0).with_walker_indices(0, 0).is_err());
        assert!(kittel(1.0, 1.0).with_walker_indices(2, -2).is_ok());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let s = HybridSystem::bare(cavity()).unwrap().with_mode(kittel(1e6, 1e6)).unwrap();
        assert!(s.with_mode(kittel(2e6, 1e6)).is_err());
    }

    #[test]
    fn cavity_susceptibility_examples() {
        let c = cavity();
        let chi = susceptibility_cavity(c.f_c, &c).unwrap();
        assert!((chi - Complex::new(0.0, -1.0 / 2.7e6)).norm() < 1e-22);
        assert!((chi.im + 3.7037e-7).abs() < 1e-11);
        let chi45 = susceptibility_cavity(c.f_c + c.kappa_t(), &c).unwrap();
        let want = Complex::new(1.0, -1.0) / (2.0 * 2.7e6);
        assert!((chi45 - want).norm() < 1e-22);
        assert!(susceptibility_cavity(f64::NAN, &c).is_err());
    }

    #[test]
    fn magnon_susceptibility_examples() {
        let m = kittel(28.6e6, 2.3e6);
        let chi = susceptibility_magnon(10e9, &m, 10e9).unwrap();
        assert_eq!(chi.re, 0.0);
        assert!((chi.im + 4.3478e-7).abs() < 1e-11);
        let far = susceptibility_magnon(10e9 + 1e12, &m, 10e9).unwrap();
        assert!(far.norm() < 1.1e-12);
        assert!(susceptibility_magnon(f64::INFINITY, &m, 10e9).is_err());
    }

    #[test]
    fn dressing_factor_examples() {
        let c = cavity();
        let m0 = kittel(0.0, 2.3e6);
        assert_eq!(dressing_factor(c.f_c + 3e6, &m0, c.f_c, &c).unwrap(), Complex::new(1.0, 0.0));
        let m = kittel(28.6e6, 2.3e6);
        let t = dressing_factor(c.f_c, &m, c.f_c, &c).unwrap();
        let coop = 28.6e6_f64.powi(2) / (2.7e6 * 2.3e6);
        assert!((t - Complex::new(1.0 / (1.0 + coop), 0.0)).norm() < 1e-15);
        assert!((1.0 / t.re - 132.72).abs() < 0.01);
    }

    #[test]
    fn field_maps() {
        let mat = MaterialParams::<f64>::yig(1e-3);
        assert_eq!(FieldMap::Kittel.frequency(0.38, &mat).unwrap(), 28e9 * 0.38);
        assert_eq!(FieldMap::Fixed { frequency: 5e9 }.frequency(0.38, &mat).unwrap(), 5e9);
        assert!(FieldMap::<f64>::Walker20.frequency(0.01, &mat).is_err());
        let f22 = FieldMap::WalkerLinear { i: 2, j: 2 }.frequency(0.38, &mat).unwrap();
        assert!((f22 - 28e9 * 0.38 - 0.3323e9).abs() < 1e5);
    }

    #[test]
    fn single_precision_instantiation() {
        let c = CavityParams::<f32>::new(10.632e9, 2.1e6, 0.6e6).unwrap();
        let chi = susceptibility_cavity(c.f_c, &c).unwrap();
        assert!((chi.im + 1.0 / 2.7e6).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dressing_identity(
            det_c in -50e6f64..50e6, det_m in -50e6f64..50e6,
            g in 0.0f64..100e6, gamma in 0.1e6f64..5e6, ke in 0.1e6f64..5e6, ki in 0.0f64..5e6,
        ) {
            let c = CavityParams::new(10e9, ke, ki).unwrap();
            let m = kittel(g, gamma);
            let f = 10e9 + det_c;
            let fm = 10e9 + det_m;
            let t = dressing_factor(f, &m, fm, &c).unwrap();
            let chi_c = susceptibility_cavity(f, &c).unwrap();
            let chi_m = susceptibility_magnon(f, &m, fm).unwrap();
            let lhs = Complex::new(1.0, 0.0) + chi_m * chi_c * t * (g * g);
            prop_assert!((lhs - t).norm() <= 1e-12 * t.norm());
            // pole-free on the real axis
            prop_assert!(t.norm().is_finite());
            prop_assert!(chi_c.inv().im > 0.0 && chi_m.inv().im > 0.0);
        }
    }
}
