//! Levenberg–Marquardt iteration with Marquardt (diagonal) damping.

use serde::{Deserialize, Serialize};

use super::{FitProblem, FitResult, ParamId, Stencil};
use crate::linalg::{scaled_condition, solve, Matrix};
use crate::scalar::{finite, Real};
use crate::Result;

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Gradient norm fell below the relative tolerance.
    GradientTolerance,
    /// Iteration budget exhausted.
    MaxIterations,
    /// No damped step lowers the cost any further (typically the
    /// floating-point resolution of the cost has been reached).
    NoFurtherDecrease,
    /// The gradient became non-finite.
    NonFinite,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::MaxIterations => "max_iterations",
            Termination::NoFurtherDecrease => "no_further_decrease",
            Termination::NonFinite => "non_finite",
        })
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T = f64> {
    pub max_iterations: usize,
    /// Stop once `|J^T r| <= gradient_tolerance * |J^T r|_initial`.
    pub gradient_tolerance: T,
    pub initial_damping: T,
    /// Give up on a step once the damping exceeds this.
    pub max_damping: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: T::of(1e-10),
            initial_damping: T::of(1e-3),
            max_damping: T::of(1e16),
        }
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Compensated (Neumaier) summation.
fn accurate_sum<T: Real>(terms: impl Iterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for t in terms {
        let s = sum + t;
        comp = comp + if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

fn sum_sq<T: Real>(r: &[T]) -> T {
    accurate_sum(r.iter().map(|&x| x * x))
}

fn rms<T: Real>(r: &[T]) -> T {
    (sum_sq(r) / T::of_usize(r.len().max(1))).sqrt()
}

/// Fits with [`FitOptions::default`].
pub fn fit_spectrum<T: Real>(problem: &FitProblem<T>, init: &[(ParamId, T)]) -> Result<FitResult<T>> {
    fit_spectrum_with(problem, init, &FitOptions::default())
}

/// Damped least squares from `init` (free parameters not listed start at
/// the template value). Singular normal equations end the iteration with
/// `converged = false` rather than an error.
pub fn fit_spectrum_with<T: Real>(
    problem: &FitProblem<T>,
    init: &[(ParamId, T)],
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    let start = problem.start(init)?;
    let mut u = problem.to_internal(&start);
    problem.project(&mut u);
    let mut values = problem.to_natural(&u);
    let mut r = problem.residuals(&values);
    let mut cost = sum_sq(&r);
    finite("initial residual", cost)?;

    let n = u.len();
    let mut lambda = options.initial_damping;
    let mut trace = vec![rms(&r)];
    let mut g0 = T::nan();
    let mut g_norm = T::nan();
    let mut condition = T::infinity();
    let mut converged = false;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        let jac = problem.jacobian(&values, Stencil::Central);
        let (a, jtr) = Matrix::normal_equations(&jac, &r);
        condition = scaled_condition(&a);
        g_norm = norm(&jtr);
        if iterations == 0 {
            g0 = g_norm;
        }
        if !g_norm.is_finite() {
            termination = Termination::NonFinite;
            break;
        }
        if g_norm <= options.gradient_tolerance * g0 {
            converged = true;
            termination = Termination::GradientTolerance;
            break;
        }
        iterations += 1;

        // Marquardt step solved in Jacobi-scaled coordinates so that pivots
        // are comparable whatever the parameter units
        let diag = a.diagonal();
        let floor = diag.iter().fold(T::zero(), |m, &d| m.max(d)) * T::epsilon();
        let scale: Vec<T> = diag.iter().map(|&d| d.max(floor).sqrt().recip()).collect();
        let mut scaled = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                scaled.set(i, j, a.at(i, j) * scale[i] * scale[j]);
            }
        }
        let rhs: Vec<T> = jtr.iter().zip(&scale).map(|(&g, &s)| -g * s).collect();
        let mut accepted = false;
        while lambda <= options.max_damping {
            let mut damped = scaled.clone();
            for i in 0..n {
                damped.set(i, i, scaled.at(i, i) + lambda);
            }
            let Some(y) = solve(&damped, &rhs) else {
                lambda = lambda * T::of(10.0);
                continue;
            };
            let delta: Vec<T> = y.iter().zip(&scale).map(|(&v, &s)| v * s).collect();
            let mut trial: Vec<T> = u.iter().zip(&delta).map(|(&x, &d)| x + d).collect();
            problem.project(&mut trial);
            let trial_values = problem.to_natural(&trial);
            let trial_r = problem.residuals(&trial_values);
            let trial_cost = sum_sq(&trial_r);
            // the decrease is summed term by term so that improvements below
            // the rounding of the total cost are still resolved
            let decrease = accurate_sum(r.iter().zip(&trial_r).map(|(&a, &b)| (a - b) * (a + b)));
            if trial_cost.is_finite() && decrease > T::zero() && trial_cost <= cost {
                u = trial;
                values = trial_values;
                r = trial_r;
                cost = trial_cost;
                trace.push(rms(&r));
                lambda = (lambda / T::of(10.0)).max(T::of(1e-12));
                accepted = true;
                break;
            }
            lambda = lambda * T::of(10.0);
        }
        if !accepted {
            termination = Termination::NoFurtherDecrease;
            break;
        }
    }

    if !converged && iterations == options.max_iterations {
        // the last accepted step may have met the criterion
        let jac = problem.jacobian(&values, Stencil::Central);
        let (a, jtr) = Matrix::normal_equations(&jac, &r);
        condition = scaled_condition(&a);
        g_norm = norm(&jtr);
        converged = g_norm <= options.gradient_tolerance * g0;
        if converged {
            termination = Termination::GradientTolerance;
        }
    }
    let well_posed = condition.is_finite() && condition < T::epsilon().recip();
    Ok(FitResult {
        estimates: problem.free().iter().map(|p| p.id.clone()).zip(values).collect(),
        rms_residual: rms(&r),
        iterations,
        converged: converged && well_posed,
        jacobian_condition_estimate: condition,
        loss: problem.loss(),
        termination,
        residual_trace: trace,
        initial_gradient_norm: g0,
        final_gradient_norm: g_norm,
    })
}
