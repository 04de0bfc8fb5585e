//! Derived coupling parameters (spin counts, densities, Faraday coefficient,
//! optical coupling rate, cooperativity) and power-law fits of parameters
//! against sphere size.
//!
//! Rates are returned as ordinary frequencies (Hz), matching the convention
//! of [`crate::model`].

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::invalid;
use crate::linalg::least_squares;
use crate::model::{CavityParams, FieldMap, HybridSystem, MagnonMode, MaterialParams, OpticalDrive};
use crate::scalar::{finite, Real};
use crate::scattering::eta_resonant;
use crate::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.62607015e-34;
/// Vacuum permeability, N/A^2.
pub const MU0: f64 = 1.25663706212e-6;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

fn positive<T: Real>(name: &'static str, x: T) -> Result<T> {
    let x = finite(name, x)?;
    if x > T::zero() {
        Ok(x)
    } else {
        Err(invalid(name, "must be > 0"))
    }
}

fn non_negative<T: Real>(name: &'static str, x: T) -> Result<T> {
    let x = finite(name, x)?;
    if x >= T::zero() {
        Ok(x)
    } else {
        Err(invalid(name, "must be >= 0"))
    }
}

/// Coupling of a single spin to the cavity mode of volume `v_c` (m^3):
/// `xi gamma / 2 * sqrt(hbar omega_c mu0 / V_c)`, returned in Hz.
pub fn single_spin_coupling<T: Real>(cavity: &CavityParams<T>, material: &MaterialParams<T>, v_c: T) -> Result<T> {
    let v_c = positive("cavity_volume", v_c)?;
    let two_pi = T::PI() + T::PI();
    let omega_c = two_pi * cavity.f_c;
    // gamma_e is in Hz/T; the angular factor cancels against the final /2pi
    Ok(material.xi * material.gamma_e / T::of(2.0) * (T::of(HBAR) * omega_c * T::of(MU0) / v_c).sqrt())
}

/// Number of spins `N = (g / g_B)^2 / (2 s)` behind a collective coupling `g`.
pub fn spins_from_coupling<T: Real>(g: T, g_b: T, spin: T) -> Result<T> {
    let g = non_negative("g", g)?;
    let g_b = positive("g_B", g_b)?;
    let spin = positive("spin", spin)?;
    let r = g / g_b;
    Ok(r * r / (T::of(2.0) * spin))
}

/// Collective coupling `g_B sqrt(2 N s)`.
pub fn collective_coupling<T: Real>(n_spins: T, g_b: T, spin: T) -> Result<T> {
    let n_spins = non_negative("N", n_spins)?;
    let g_b = non_negative("g_B", g_b)?;
    let spin = positive("spin", spin)?;
    Ok(g_b * (T::of(2.0) * n_spins * spin).sqrt())
}

/// `C = g^2 / (kappa_t gamma)`.
pub fn cooperativity<T: Real>(g: T, kappa_t: T, gamma: T) -> Result<T> {
    let g = finite("g", g)?;
    let kappa_t = positive("kappa_t", kappa_t)?;
    let gamma = positive("gamma", gamma)?;
    Ok(g * g / (kappa_t * gamma))
}

/// Sphere volume `(4/3) pi (d/2)^3`.
pub fn sphere_volume<T: Real>(diameter: T) -> Result<T> {
    let r = positive("diameter", diameter)? / T::of(2.0);
    Ok(T::of(4.0) / T::of(3.0) * T::PI() * r * r * r)
}

/// Mode volume of a sphere and the spin density `n = N / V_m`.
pub fn mode_volume_and_density<T: Real>(diameter: T, n_spins: T) -> Result<(T, T)> {
    let v = sphere_volume(diameter)?;
    let n_spins = non_negative("N", n_spins)?;
    Ok((v, n_spins / v))
}

/// Faraday coefficient `G = 4 V / n`, m^2.
pub fn faraday_coefficient<T: Real>(verdet: T, density: T) -> Result<T> {
    let verdet = non_negative("verdet", verdet)?;
    let density = positive("density", density)?;
    Ok(T::of(4.0) * verdet / density)
}

/// Photon flux `P / (hbar Omega)` of the drive, photons/s.
pub fn photon_flux<T: Real>(optical: &OpticalDrive<T>) -> Result<T> {
    optical.validate()?;
    Ok(optical.power * optical.wavelength / (T::of(PLANCK) * T::of(SPEED_OF_LIGHT)))
}

/// Optical photon-magnon coupling rate
/// `G^2 l^2 n / (16 V_m) * P / (hbar Omega)`, converted to Hz (divided by 2 pi).
pub fn optical_coupling_rate<T: Real>(
    faraday: T,
    path_length: T,
    v_m: T,
    density: T,
    optical: &OpticalDrive<T>,
) -> Result<T> {
    let faraday = positive("faraday", faraday)?;
    let l = positive("path_length", path_length)?;
    let v_m = positive("v_m", v_m)?;
    let density = positive("density", density)?;
    let flux = photon_flux(optical)?;
    let two_pi = T::PI() + T::PI();
    Ok(faraday * faraday * l * l / (T::of(16.0) * v_m) * density * flux / two_pi)
}

/// Parameters derived for one magnon mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DerivedParams<T = f64> {
    /// Single-spin coupling used, Hz.
    pub g_b: T,
    /// Net spin count.
    pub n_spins: T,
    /// Cooperativity.
    pub cooperativity: T,
    /// Mode volume, m^3.
    pub v_m: T,
    /// Spin density, m^-3.
    pub density: T,
    /// Faraday coefficient, m^2.
    pub faraday: T,
    /// Optical coupling rate, Hz.
    pub delta: T,
}

/// Measured inputs for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct ModeInputs<T = f64> {
    /// Coupling strength, Hz.
    pub g: T,
    /// Linewidth, Hz.
    pub gamma: T,
}

/// Runs the full chain `g -> N -> (V_m, n) -> G -> delta` plus `C`. The
/// optical path length is the sphere diameter.
pub fn derive_mode<T: Real>(
    mode: &ModeInputs<T>,
    g_b: T,
    cavity: &CavityParams<T>,
    material: &MaterialParams<T>,
    optical: &OpticalDrive<T>,
) -> Result<DerivedParams<T>> {
    let n_spins = spins_from_coupling(mode.g, g_b, material.spin)?;
    let (v_m, density) = mode_volume_and_density(material.diameter, n_spins)?;
    let faraday = faraday_coefficient(material.verdet, density)?;
    let delta = optical_coupling_rate(faraday, material.diameter, v_m, density, optical)?;
    Ok(DerivedParams {
        g_b,
        n_spins,
        cooperativity: cooperativity(mode.g, cavity.kappa_t(), mode.gamma)?,
        v_m,
        density,
        faraday,
        delta,
    })
}

/// Derived parameters for a Kittel mode and one magnetostatic mode, with the
/// resonant two-mode efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DerivedColumn<T = f64> {
    pub kittel: DerivedParams<T>,
    pub msm: DerivedParams<T>,
    pub eta: T,
}

/// Derives both modes from measured `(g, gamma)` and evaluates the resonant
/// efficiency with `beta = 1`.
pub fn derive_column<T: Real>(
    kittel: &ModeInputs<T>,
    msm: &ModeInputs<T>,
    g_b: T,
    cavity: &CavityParams<T>,
    material: &MaterialParams<T>,
    optical: &OpticalDrive<T>,
) -> Result<DerivedColumn<T>> {
    let k = derive_mode(kittel, g_b, cavity, material, optical)?;
    let m = derive_mode(msm, g_b, cavity, material, optical)?;
    let eta = resonant_two_mode_eta(kittel, k.delta, msm, m.delta, cavity)?;
    Ok(DerivedColumn { kittel: k, msm: m, eta })
}

/// Two-mode resonant efficiency for given `(g, gamma)` and `delta` pairs.
pub fn resonant_two_mode_eta<T: Real>(
    kittel: &ModeInputs<T>,
    delta_k: T,
    msm: &ModeInputs<T>,
    delta_m: T,
    cavity: &CavityParams<T>,
) -> Result<T> {
    let fixed = FieldMap::Fixed { frequency: cavity.f_c };
    let system = HybridSystem::bare(cavity.clone())?
        .with_mode(MagnonMode::new("K", kittel.g, kittel.gamma, fixed.clone())?.with_delta(delta_k)?)?
        .with_mode(MagnonMode::new("M", msm.g, msm.gamma, fixed)?.with_delta(delta_m)?)?;
    eta_resonant(&system)
}

/// One column of tabulated reference parameters for a YIG sphere coupled
/// to a 10.632 GHz cavity (rates in Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceColumn {
    pub diameter: f64,
    pub g_k: f64,
    pub gamma_k: f64,
    /// Upper bound only for the smallest sphere.
    pub g_m: f64,
    /// Lower bound only for the smallest sphere.
    pub gamma_m: f64,
    pub c_k: f64,
    pub c_m: f64,
    pub n_spins_k: f64,
    pub n_spins_m: f64,
    pub v_m: f64,
    pub density_k: f64,
    pub density_m: f64,
    pub faraday_k: f64,
    pub faraday_m: f64,
    pub delta_k: f64,
    pub delta_m: f64,
    pub eta: f64,
}

/// Reference cavity: `f_c = 10.632 GHz`, `kappa_e = 2.1 MHz`, `kappa_i = 0.6 MHz`.
pub const REFERENCE_CAVITY: (f64, f64, f64) = (10.632e9, 2.1e6, 0.6e6);
/// Internal cavity volume, 20 x 20 x 4 mm^3.
pub const REFERENCE_CAVITY_VOLUME: f64 = 1.6e-6;
/// Single-spin coupling implied by the reference spin count of the
/// 0.45 mm sphere, Hz.
pub const REFERENCE_SINGLE_SPIN_COUPLING: f64 = 0.0325;

pub const REFERENCE_COLUMNS: [ReferenceColumn; 3] = [
    ReferenceColumn {
        diameter: 0.45e-3,
        g_k: 28.6e6,
        gamma_k: 2.3e6,
        g_m: 1.0e6,
        gamma_m: 2.0e6,
        c_k: 132.0,
        c_m: 0.19,
        n_spins_k: 1.51e17,
        n_spins_m: 1.84e14,
        v_m: 4.77e-11,
        density_k: 3.16e27,
        density_m: 3.87e24,
        faraday_k: 4.81e-25,
        faraday_m: 3.93e-22,
        delta_k: 3.61e-3,
        delta_m: 2.95,
        eta: 8.45e-11,
    },
    ReferenceColumn {
        diameter: 0.75e-3,
        g_k: 67.3e6,
        gamma_k: 1.1e6,
        g_m: 4.0e6,
        gamma_m: 1.5e6,
        c_k: 1373.0,
        c_m: 3.6,
        n_spins_k: 8.36e17,
        n_spins_m: 2.95e15,
        v_m: 2.21e-10,
        density_k: 3.79e27,
        density_m: 1.34e25,
        faraday_k: 4.02e-25,
        faraday_m: 1.14e-22,
        delta_k: 1.80e-3,
        delta_m: 0.512,
        eta: 5.12e-12,
    },
    ReferenceColumn {
        diameter: 1.0e-3,
        g_k: 91.0e6,
        gamma_k: 0.95e6,
        g_m: 12.0e6,
        gamma_m: 0.9e6,
        c_k: 3487.0,
        c_m: 64.0,
        n_spins_k: 1.53e18,
        n_spins_m: 2.66e16,
        v_m: 5.24e-10,
        density_k: 2.92e27,
        density_m: 5.07e25,
        faraday_k: 5.21e-25,
        faraday_m: 2.99e-23,
        delta_k: 1.75e-3,
        delta_m: 0.101,
        eta: 3.46e-12,
    },
];

impl ReferenceColumn {
    pub fn cavity(&self) -> CavityParams<f64> {
        let (f_c, ke, ki) = REFERENCE_CAVITY;
        CavityParams { f_c, kappa_e: ke, kappa_i: ki }
    }

    pub fn material(&self) -> MaterialParams<f64> {
        MaterialParams::yig(self.diameter)
    }

    pub fn kittel(&self) -> ModeInputs<f64> {
        ModeInputs { g: self.g_k, gamma: self.gamma_k }
    }

    pub fn msm(&self) -> ModeInputs<f64> {
        ModeInputs { g: self.g_m, gamma: self.gamma_m }
    }

    /// Looks up a column by sphere diameter (m), to within 1 um.
    pub fn by_diameter(diameter: f64) -> Option<&'static ReferenceColumn> {
        REFERENCE_COLUMNS.iter().find(|c| (c.diameter - diameter).abs() < 1e-6)
    }
}

/// Functional forms for size-scaling fits; `x = sqrt(V / mm^3)` for a
/// sphere of volume `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `a x`
    LinearInSqrtV,
    /// `a x^2`
    QuadraticInSqrtV,
    /// `a x^4`
    QuarticInSqrtV,
    /// `a + b / x`
    OffsetPlusInverse,
    /// `a / x^2`
    InverseSquare,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 5] = [
        ScalingModel::LinearInSqrtV,
        ScalingModel::QuadraticInSqrtV,
        ScalingModel::QuarticInSqrtV,
        ScalingModel::OffsetPlusInverse,
        ScalingModel::InverseSquare,
    ];

    pub fn arity(self) -> usize {
        match self {
            ScalingModel::OffsetPlusInverse => 2,
            _ => 1,
        }
    }

    fn basis<T: Real>(self, x: T) -> Vec<T> {
        match self {
            ScalingModel::LinearInSqrtV => vec![x],
            ScalingModel::QuadraticInSqrtV => vec![x * x],
            ScalingModel::QuarticInSqrtV => vec![x.powi(4)],
            ScalingModel::OffsetPlusInverse => vec![T::one(), x.recip()],
            ScalingModel::InverseSquare => vec![(x * x).recip()],
        }
    }

    /// Evaluates the model at `x` with the given coefficients.
    pub fn eval<T: Real>(self, coefficients: &[T], x: T) -> T {
        self.basis(x).iter().zip(coefficients).map(|(&b, &c)| b * c).sum()
    }
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingModel::LinearInSqrtV => "linear_in_sqrt_v",
            ScalingModel::QuadraticInSqrtV => "quadratic_in_sqrt_v",
            ScalingModel::QuarticInSqrtV => "quartic_in_sqrt_v",
            ScalingModel::OffsetPlusInverse => "offset_plus_inverse",
            ScalingModel::InverseSquare => "inverse_square",
        })
    }
}

impl FromStr for ScalingModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScalingModel::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| invalid("model", format!("unknown scaling model `{s}`")))
    }
}

/// Result of [`fit_scaling_laws`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingFitResult<T = f64> {
    pub model: ScalingModel,
    pub coefficients: Vec<T>,
    /// Which input points entered the fit.
    pub included_points: Vec<bool>,
    /// RMS residual over the included points, in the units of the values.
    pub rms_residual: T,
}

/// Size coordinate `sqrt(V / mm^3)` of a sphere with diameter in metres.
pub fn size_coordinate<T: Real>(diameter: T) -> Result<T> {
    Ok((sphere_volume(diameter)? * T::of(1e9)).sqrt())
}

/// Least-squares fit of `values` against sphere diameter (m). `include`
/// selects points (all when `None`).
pub fn fit_scaling_laws<T: Real>(
    points: &[(T, T)],
    model: ScalingModel,
    include: Option<&[bool]>,
) -> Result<ScalingFitResult<T>> {
    let included_points = match include {
        Some(mask) if mask.len() != points.len() => {
            return Err(invalid("include", format!("{} flags for {} points", mask.len(), points.len())))
        }
        Some(mask) => mask.to_vec(),
        None => vec![true; points.len()],
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&(d, v), _) in points.iter().zip(&included_points).filter(|(_, &inc)| inc) {
        xs.push(size_coordinate(d)?);
        ys.push(finite("value", v)?);
    }
    let arity = model.arity();
    if xs.len() < arity {
        return Err(Error::Underdetermined { points: xs.len(), coefficients: arity });
    }
    let columns: Vec<Vec<T>> = (0..arity).map(|k| xs.iter().map(|&x| model.basis(x)[k]).collect()).collect();
    let coefficients = least_squares(&columns, &ys)
        .ok_or_else(|| Error::Domain("degenerate scaling-fit design (repeated diameters?)".into()))?;
    let ss: T = xs.iter().zip(&ys).map(|(&x, &y)| (model.eval(&coefficients, x) - y).powi(2)).sum();
    Ok(ScalingFitResult {
        model,
        coefficients,
        included_points,
        rms_residual: (ss / T::of_usize(xs.len())).sqrt(),
    })
}
