//! Parameter extraction from complex spectra by damped nonlinear least
//! squares, and synthetic noisy spectra for round-trip checks.

mod lm;
mod synth;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::model::{HybridSystem, ResolvedSystem};
use crate::scalar::{finite, Real};
use crate::scattering::{ComplexSpectrum, Response};
use crate::{Error, Result};

pub use lm::{fit_spectrum, fit_spectrum_with, FitOptions, Termination};
pub use synth::synthesize_noisy_spectrum;

/// A fittable scalar of a [`HybridSystem`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParamId {
    FC,
    KappaE,
    KappaI,
    /// Coupling of the labelled mode.
    G(String),
    /// Linewidth of the labelled mode.
    Gamma(String),
    /// Frequency of the labelled mode at the fit field; overrides its field map.
    Fm(String),
}

impl ParamId {
    fn label(&self) -> Option<&str> {
        match self {
            ParamId::G(l) | ParamId::Gamma(l) | ParamId::Fm(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamId::FC => f.write_str("f_c"),
            ParamId::KappaE => f.write_str("kappa_e"),
            ParamId::KappaI => f.write_str("kappa_i"),
            ParamId::G(l) => write!(f, "g:{l}"),
            ParamId::Gamma(l) => write!(f, "gamma:{l}"),
            ParamId::Fm(l) => write!(f, "f_m:{l}"),
        }
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("parameter", format!("unknown parameter `{s}`"));
        match s.split_once(':') {
            None => match s {
                "f_c" => Ok(ParamId::FC),
                "kappa_e" => Ok(ParamId::KappaE),
                "kappa_i" => Ok(ParamId::KappaI),
                _ => Err(bad()),
            },
            Some((_, "")) => Err(bad()),
            Some((kind, label)) => match kind {
                "g" => Ok(ParamId::G(label.into())),
                "gamma" => Ok(ParamId::Gamma(label.into())),
                "f_m" => Ok(ParamId::Fm(label.into())),
                _ => Err(bad()),
            },
        }
    }
}

impl TryFrom<String> for ParamId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParamId> for String {
    fn from(p: ParamId) -> String {
        p.to_string()
    }
}

/// A free parameter with closed bounds `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct FreeParam<T = f64> {
    pub id: ParamId,
    pub lower: T,
    pub upper: T,
}

impl<T: Real> FreeParam<T> {
    pub fn new(id: ParamId, lower: T, upper: T) -> Self {
        Self { id, lower, upper }
    }

    /// Strictly positive rates are optimised as `ln p`. Centre frequencies
    /// stay linear: their bounds are narrow compared with their magnitude,
    /// and `exp(ln f)` would round them far more coarsely than `f` itself.
    fn is_log(&self) -> bool {
        self.lower > T::zero() && !matches!(self.id, ParamId::FC | ParamId::Fm(_))
    }

    fn to_internal(&self, p: T) -> T {
        if self.is_log() {
            p.ln()
        } else {
            p
        }
    }

    fn to_natural(&self, u: T) -> T {
        if self.is_log() {
            u.exp().max(self.lower).min(self.upper)
        } else {
            u
        }
    }

    fn internal_bounds(&self) -> (T, T) {
        (self.to_internal(self.lower), self.to_internal(self.upper))
    }
}

/// Objective definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Residuals `Re(S - S_obs)` and `Im(S - S_obs)`, equally weighted.
    #[default]
    ComplexResidual,
    /// Residuals `|S|^2 - |S_obs|^2` and the wrapped phase difference
    /// `arg(S_obs conj(S))`, equally weighted.
    PowerAndPhase,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::ComplexResidual => "complex_residual",
            Loss::PowerAndPhase => "power_and_phase",
        })
    }
}

/// Finite-difference stencil for the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(r(u+h) - r(u-h)) / 2h`
    Central,
    /// Fourth-order `(-r(u+2h) + 8 r(u+h) - 8 r(u-h) + r(u-2h)) / 12h`
    FourPoint,
}

/// Observed spectrum, model template, and the parameters to vary.
#[derive(Debug, Clone)]
pub struct FitProblem<T = f64> {
    observed: ComplexSpectrum<T>,
    system: HybridSystem<T>,
    field: T,
    response: Response,
    free: Vec<FreeParam<T>>,
    loss: Loss,
    base: ResolvedSystem<T>,
    mode_slots: Vec<Option<usize>>,
}

impl<T: Real> FitProblem<T> {
    /// `system` supplies every fixed parameter and default starting values;
    /// mode frequencies come from its field maps at bias `field` unless
    /// freed as `f_m:<label>`. Only `S21` and `S11` responses can be fitted.
    pub fn new(
        observed: ComplexSpectrum<T>,
        system: HybridSystem<T>,
        field: T,
        response: Response,
        free: Vec<FreeParam<T>>,
        loss: Loss,
    ) -> Result<Self> {
        if matches!(response, Response::S31(_)) {
            return Err(invalid("response", "only S21 and S11 spectra can be fitted"));
        }
        if free.is_empty() {
            return Err(invalid("free", "at least one free parameter is required"));
        }
        let mut mode_slots = Vec::with_capacity(free.len());
        for (k, p) in free.iter().enumerate() {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(invalid(p.id.to_string(), "bounds must be finite with lower < upper"));
            }
            if free[..k].iter().any(|q| q.id == p.id) {
                return Err(invalid(p.id.to_string(), "listed twice"));
            }
            mode_slots.push(p.id.label().map(|l| system.mode_index(l)).transpose()?);
        }
        let base = system.resolve(field)?;
        Ok(Self {
            observed,
            system,
            field,
            response,
            free,
            loss,
            base,
            mode_slots,
        })
    }

    pub fn observed(&self) -> &ComplexSpectrum<T> {
        &self.observed
    }

    pub fn system(&self) -> &HybridSystem<T> {
        &self.system
    }

    pub fn field(&self) -> T {
        self.field
    }

    pub fn free(&self) -> &[FreeParam<T>] {
        &self.free
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    /// Current value of each free parameter in the template.
    pub fn template_values(&self) -> Vec<T> {
        self.free
            .iter()
            .zip(&self.mode_slots)
            .map(|(p, slot)| {
                let c = &self.base.cavity;
                match (&p.id, slot) {
                    (ParamId::FC, _) => c.f_c,
                    (ParamId::KappaE, _) => c.kappa_e,
                    (ParamId::KappaI, _) => c.kappa_i,
                    (ParamId::G(_), Some(k)) => self.base.modes[*k].g,
                    (ParamId::Gamma(_), Some(k)) => self.base.modes[*k].gamma,
                    (ParamId::Fm(_), Some(k)) => self.base.modes[*k].f_m,
                    _ => unreachable!("labels resolved in FitProblem::new"),
                }
            })
            .collect()
    }

    fn apply(&self, values: &[T]) -> ResolvedSystem<T> {
        let mut r = self.base.clone();
        for ((p, slot), &v) in self.free.iter().zip(&self.mode_slots).zip(values) {
            match (&p.id, slot) {
                (ParamId::FC, _) => r.cavity.f_c = v,
                (ParamId::KappaE, _) => r.cavity.kappa_e = v,
                (ParamId::KappaI, _) => r.cavity.kappa_i = v,
                (ParamId::G(_), Some(k)) => r.modes[*k].g = v,
                (ParamId::Gamma(_), Some(k)) => r.modes[*k].gamma = v,
                (ParamId::Fm(_), Some(k)) => r.modes[*k].f_m = v,
                _ => unreachable!("labels resolved in FitProblem::new"),
            }
        }
        r
    }

    /// Model spectrum for the given free-parameter values.
    pub fn model(&self, values: &[T]) -> Vec<Complex<T>> {
        let r = self.apply(values);
        let f = self.observed.frequencies();
        match self.response {
            Response::S11 => f.iter().map(|&x| r.s11(x)).collect(),
            _ => f.iter().map(|&x| r.s21(x)).collect(),
        }
    }

    /// Residual vector (length `2 * points`) for natural parameter values.
    pub fn residuals(&self, values: &[T]) -> Vec<T> {
        let model = self.model(values);
        let mut out = Vec::with_capacity(2 * model.len());
        for (m, o) in model.iter().zip(self.observed.values()) {
            match self.loss {
                Loss::ComplexResidual => {
                    let d = m - o;
                    out.push(d.re);
                    out.push(d.im);
                }
                Loss::PowerAndPhase => {
                    out.push(m.norm_sqr() - o.norm_sqr());
                    out.push((o * m.conj()).arg());
                }
            }
        }
        out
    }

    pub(crate) fn to_internal(&self, values: &[T]) -> Vec<T> {
        self.free.iter().zip(values).map(|(p, &v)| p.to_internal(v)).collect()
    }

    pub(crate) fn to_natural(&self, u: &[T]) -> Vec<T> {
        self.free.iter().zip(u).map(|(p, &x)| p.to_natural(x)).collect()
    }

    pub(crate) fn project(&self, u: &mut [T]) {
        for (p, x) in self.free.iter().zip(u.iter_mut()) {
            let (lo, hi) = p.internal_bounds();
            *x = x.max(lo).min(hi);
        }
    }

    fn step(&self, k: usize, u: T) -> T {
        let p = &self.free[k];
        let rel = T::of(1e-6);
        if p.is_log() {
            rel
        } else {
            rel * u.abs().max(p.upper - p.lower)
        }
    }

    fn residuals_internal(&self, u: &[T]) -> Vec<T> {
        let values: Vec<T> = self.free.iter().zip(u).map(|(p, &x)| if p.is_log() { x.exp() } else { x }).collect();
        self.residuals(&values)
    }

    /// Finite-difference Jacobian with respect to the internal coordinates
    /// (`ln p` for rates with a positive lower bound, `p` otherwise),
    /// one column per free parameter.
    pub fn jacobian(&self, values: &[T], stencil: Stencil) -> Vec<Vec<T>> {
        let u0 = self.to_internal(values);
        (0..u0.len())
            .map(|k| {
                let h = self.step(k, u0[k]);
                let at = |s: T| {
                    let mut u = u0.clone();
                    u[k] = u0[k] + s * h;
                    self.residuals_internal(&u)
                };
                let (p1, m1) = (at(T::one()), at(-T::one()));
                match stencil {
                    Stencil::Central => p1.iter().zip(&m1).map(|(&a, &b)| (a - b) / (h + h)).collect(),
                    Stencil::FourPoint => {
                        let (p2, m2) = (at(T::of(2.0)), at(-T::of(2.0)));
                        (0..p1.len())
                            .map(|i| (m2[i] - p2[i] + T::of(8.0) * (p1[i] - m1[i])) / (T::of(12.0) * h))
                            .collect()
                    }
                }
            })
            .collect()
    }

    /// Starting values: template values overridden by `init`, checked
    /// against bounds.
    pub(crate) fn start(&self, init: &[(ParamId, T)]) -> Result<Vec<T>> {
        let mut values = self.template_values();
        for (id, v) in init {
            let k = self
                .free
                .iter()
                .position(|p| &p.id == id)
                .ok_or_else(|| invalid(id.to_string(), "initial value given for a parameter that is not free"))?;
            values[k] = finite("initial value", *v)?;
        }
        for (p, &v) in self.free.iter().zip(&values) {
            if !(v >= p.lower && v <= p.upper) {
                return Err(invalid(
                    p.id.to_string(),
                    format!("initial value {v:e} outside [{:e}, {:e}]", p.lower, p.upper),
                ));
            }
        }
        Ok(values)
    }
}

/// Outcome of [`fit_spectrum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitResult<T = f64> {
    pub estimates: Vec<(ParamId, T)>,
    /// `sqrt(mean(r^2))` over all residual components at the estimate.
    pub rms_residual: T,
    pub iterations: usize,
    /// Gradient-norm criterion met with a non-singular Jacobian.
    pub converged: bool,
    /// Condition number of the column-scaled normal matrix; infinite if singular.
    pub jacobian_condition_estimate: T,
    pub loss: Loss,
    pub termination: Termination,
    /// RMS residual at the start and after every accepted step.
    pub residual_trace: Vec<T>,
    pub initial_gradient_norm: T,
    pub final_gradient_norm: T,
}

impl<T: Real> FitResult<T> {
    pub fn get(&self, id: &ParamId) -> Option<T> {
        self.estimates.iter().find(|(p, _)| p == id).map(|&(_, v)| v)
    }

    /// Looks up an estimate by its textual id, e.g. `"g:K"`.
    pub fn value(&self, name: &str) -> Option<T> {
        name.parse().ok().and_then(|id| self.get(&id))
    }
}
