use magnon_core::fit::{
    fit_spectrum, synthesize_noisy_spectrum, FitProblem, FitResult, FreeParam, Loss, ParamId, Stencil, Termination,
};
use magnon_core::magnetostatics::kittel_field;
use magnon_core::scattering::{branch_frequencies, complex_spectrum, linspace};
use magnon_core::{CavityParams, Error, FieldMap, HybridSystem, MagnonMode, MaterialParams, Response};

const FC: f64 = 10.632e9;

fn single_mode_truth() -> HybridSystem {
    HybridSystem::new(
        CavityParams::new(FC, 2.1e6, 0.6e6).unwrap(),
        vec![MagnonMode::new("K", 28.6e6, 2.3e6, FieldMap::Kittel).unwrap()],
        MaterialParams::yig(0.45e-3),
        Default::default(),
    )
    .unwrap()
}

fn degenerate_field(s: &HybridSystem) -> f64 {
    kittel_field(s.cavity.f_c, &s.material)
}

fn single_mode_free() -> Vec<FreeParam> {
    vec![
        FreeParam::new(ParamId::FC, 10.5e9, 10.8e9),
        FreeParam::new(ParamId::KappaE, 1e5, 2e7),
        FreeParam::new(ParamId::KappaI, 1e4, 2e7),
        FreeParam::new(ParamId::G("K".into()), 1e6, 2e8),
        FreeParam::new(ParamId::Gamma("K".into()), 1e4, 2e7),
        FreeParam::new(ParamId::Fm("K".into()), 10.5e9, 10.8e9),
    ]
}

fn perturbed_init() -> Vec<(ParamId, f64)> {
    vec![
        (ParamId::FC, FC + 0.8e6),
        (ParamId::KappaE, 2.1e6 * 1.2),
        (ParamId::KappaI, 0.6e6 * 0.8),
        (ParamId::G("K".into()), 28.6e6 * 0.8),
        (ParamId::Gamma("K".into()), 2.3e6 * 1.2),
        (ParamId::Fm("K".into()), FC - 1.5e6),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn single_mode_problem(noise: f64, seed: u64, loss: Loss) -> FitProblem {
    let truth = single_mode_truth();
    let b = degenerate_field(&truth);
    let grid = linspace(FC - 100e6, FC + 100e6, 2001);
    let data = synthesize_noisy_spectrum(&truth, b, &grid, &Response::S21, noise, seed).unwrap();
    FitProblem::new(data, truth, b, Response::S21, single_mode_free(), loss).unwrap()
}

fn assert_monotone(r: &FitResult) {
    for w in r.residual_trace.windows(2) {
        assert!(w[1] <= w[0], "residual increased: {:?}", r.residual_trace);
    }
}

#[test]
fn noiseless_single_mode_recovers_truth() {
    for loss in [Loss::ComplexResidual, Loss::PowerAndPhase] {
        let p = single_mode_problem(0.0, 0, loss);
        let r = fit_spectrum(&p, &perturbed_init()).unwrap();
        assert!(r.converged, "{loss}: {r:?}");
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert_monotone(&r);
        for (name, truth) in [("f_c", FC), ("kappa_e", 2.1e6), ("kappa_i", 0.6e6), ("g:K", 28.6e6), ("gamma:K", 2.3e6)] {
            let v = r.value(name).unwrap();
            assert!(rel(v, truth) <= 1e-6, "{loss} {name}: {v} vs {truth}");
        }
    }
}

#[test]
fn noisy_single_mode_within_tolerance() {
    let truth = single_mode_truth();
    let b = degenerate_field(&truth);
    let grid = linspace(FC - 100e6, FC + 100e6, 2001);
    let data = synthesize_noisy_spectrum(&truth, b, &grid, &Response::S21, 0.01, 11).unwrap();
    let free: Vec<_> = single_mode_free().into_iter().filter(|p| p.id != ParamId::KappaI).collect();
    let p = FitProblem::new(data, truth, b, Response::S21, free, Loss::ComplexResidual).unwrap();
    let init: Vec<_> = perturbed_init().into_iter().filter(|(id, _)| *id != ParamId::KappaI).collect();
    let r = fit_spectrum(&p, &init).unwrap();
    assert_monotone(&r);
    assert!(rel(r.value("g:K").unwrap(), 28.6e6) < 0.02);
    assert!(rel(r.value("gamma:K").unwrap(), 2.3e6) < 0.02);
    assert!(rel(r.value("f_c").unwrap(), FC) < 1e-4);
    assert!(r.rms_residual > 0.0);
}

#[test]
fn two_mode_msm_coupling_recovered() {
    let material = MaterialParams::yig(0.75e-3);
    let cavity = CavityParams::new(FC, 2.1e6, 0.6e6).unwrap();
    let truth = HybridSystem::new(
        cavity,
        vec![
            MagnonMode::new("K", 67.3e6, 1.1e6, FieldMap::Kittel).unwrap(),
            MagnonMode::new("M", 4.0e6, 1.5e6, FieldMap::Walker20).unwrap(),
        ],
        material,
        Default::default(),
    )
    .unwrap();
    // bias where the (2,0) mode crosses the cavity-like branch dressed by the Kittel mode
    let b = magnon_core::roots::brent(
        |b| {
            let f_k = magnon_core::magnetostatics::kittel_frequency(b, &truth.material);
            let (upper, _) = branch_frequencies(FC, f_k, 67.3e6);
            Ok(magnon_core::magnetostatics::msm20_frequency(b, &truth.material)? - upper)
        },
        0.36,
        0.379,
        1e-12,
        100,
    )
    .unwrap();
    let grid = linspace(FC - 150e6, FC + 150e6, 3001);
    let data = synthesize_noisy_spectrum(&truth, b, &grid, &Response::S21, 0.01, 5).unwrap();
    let free = vec![
        FreeParam::new(ParamId::FC, 10.5e9, 10.8e9),
        FreeParam::new(ParamId::KappaE, 1e5, 2e7),
        FreeParam::new(ParamId::G("K".into()), 1e6, 3e8),
        FreeParam::new(ParamId::Gamma("K".into()), 1e4, 2e7),
        FreeParam::new(ParamId::G("M".into()), 1e5, 1e8),
        FreeParam::new(ParamId::Gamma("M".into()), 1e4, 2e7),
    ];
    let p = FitProblem::new(data, truth, b, Response::S21, free, Loss::ComplexResidual).unwrap();
    let init = vec![
        (ParamId::FC, FC + 0.5e6),
        (ParamId::KappaE, 2.1e6 * 0.8),
        (ParamId::G("K".into()), 67.3e6 * 1.2),
        (ParamId::Gamma("K".into()), 1.1e6 * 0.8),
        (ParamId::G("M".into()), 4.0e6 * 1.2),
        (ParamId::Gamma("M".into()), 1.5e6 * 0.8),
    ];
    let r = fit_spectrum(&p, &init).unwrap();
    assert_monotone(&r);
    let gm = r.value("g:M").unwrap();
    assert!(rel(gm, 4.0e6) < 0.05, "g_M = {gm}");
}

#[test]
fn jacobian_stencils_agree() {
    let p = single_mode_problem(0.0, 0, Loss::ComplexResidual);
    let at: Vec<f64> = p.template_values().iter().map(|v| v * 1.01).collect();
    let a = p.jacobian(&at, Stencil::Central);
    let b = p.jacobian(&at, Stencil::FourPoint);
    for (ca, cb) in a.iter().zip(&b) {
        let scale = cb.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = ca.iter().zip(cb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst <= 1e-4 * scale, "{worst} vs {scale}");
    }
}

#[test]
fn identical_inputs_give_identical_results() {
    let a = fit_spectrum(&single_mode_problem(0.01, 3, Loss::ComplexResidual), &perturbed_init()).unwrap();
    let b = fit_spectrum(&single_mode_problem(0.01, 3, Loss::ComplexResidual), &perturbed_init()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn insensitive_parameter_reports_singularity() {
    // with g = 0 the spectrum does not depend on the magnon linewidth
    let mut truth = single_mode_truth();
    truth.modes[0].g = 0.0;
    let b = degenerate_field(&truth);
    let grid = linspace(FC - 20e6, FC + 20e6, 201);
    let data = complex_spectrum(&truth, b, &grid, &Response::S21).unwrap();
    let free = vec![
        FreeParam::new(ParamId::KappaE, 1e5, 1e7),
        FreeParam::new(ParamId::Gamma("K".into()), 1e4, 1e7),
    ];
    let p = FitProblem::new(data, truth, b, Response::S21, free, Loss::ComplexResidual).unwrap();
    let r = fit_spectrum(&p, &[(ParamId::KappaE, 2.5e6)]).unwrap();
    assert!(!r.converged);
    assert!(r.jacobian_condition_estimate.is_infinite());
}

#[test]
fn problem_validation() {
    let truth = single_mode_truth();
    let data = complex_spectrum(&truth, 0.38, &[FC], &Response::S21).unwrap();
    let mk = |free, resp| FitProblem::new(data.clone(), truth.clone(), 0.38, resp, free, Loss::ComplexResidual);
    assert!(mk(vec![], Response::S21).is_err());
    assert!(mk(vec![FreeParam::new(ParamId::FC, 2.0, 1.0)], Response::S21).is_err());
    assert!(mk(vec![FreeParam::new(ParamId::FC, 1.0, f64::INFINITY)], Response::S21).is_err());
    assert!(matches!(
        mk(vec![FreeParam::new(ParamId::G("X".into()), 0.0, 1.0)], Response::S21),
        Err(Error::UnknownMode(_))
    ));
    assert!(mk(vec![FreeParam::new(ParamId::FC, 1e9, 2e10)], Response::S31("K".into())).is_err());
    let dup = vec![FreeParam::new(ParamId::FC, 1e9, 2e10), FreeParam::new(ParamId::FC, 1e9, 2e10)];
    assert!(mk(dup, Response::S21).is_err());

    let p = mk(vec![FreeParam::new(ParamId::FC, 1e9, 2e10)], Response::S21).unwrap();
    assert!(fit_spectrum(&p, &[(ParamId::FC, 5e10)]).is_err());
    assert!(fit_spectrum(&p, &[(ParamId::KappaE, 1e6)]).is_err());
}

#[test]
fn param_ids_round_trip() {
    for s in ["f_c", "kappa_e", "kappa_i", "g:K", "gamma:M2", "f_m:K"] {
        assert_eq!(s.parse::<ParamId>().unwrap().to_string(), s);
    }
    assert!("g:".parse::<ParamId>().is_err());
    assert!("bogus".parse::<ParamId>().is_err());
}
