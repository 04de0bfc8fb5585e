use proptest::prelude::*;

use magnon_core::scattering::{eta_resonant, eta_single_resonant, eta_spectrum, s21, s31_mode};
use magnon_core::{CavityParams, FieldMap, HybridSystem, MagnonMode};

const FC: f64 = 10.632e9;

#[derive(Debug, Clone)]
struct ModeSpec {
    offset: f64,
    g: f64,
    gamma: f64,
    delta: f64,
    beta: f64,
}

fn mode_spec() -> impl Strategy<Value = ModeSpec> {
    (-300e6..300e6f64, 0.0..150e6f64, 1e4..5e6f64, 0.0..5.0f64, 0.5..100.0f64)
        .prop_map(|(offset, g, gamma, delta, beta)| ModeSpec { offset, g, gamma, delta, beta })
}

fn build(ke: f64, ki: f64, specs: &[ModeSpec]) -> HybridSystem {
    let mut s = HybridSystem::bare(CavityParams::new(FC, ke, ki).unwrap()).unwrap();
    for (k, m) in specs.iter().enumerate() {
        let mode = MagnonMode::new(format!("m{k}"), m.g, m.gamma, FieldMap::Fixed { frequency: FC + m.offset })
            .unwrap()
            .with_delta(m.delta)
            .unwrap()
            .with_beta(m.beta)
            .unwrap();
        s = s.with_mode(mode).unwrap();
    }
    s
}

proptest! {
    #[test]
    fn transmission_bounded_by_bare_resonance(
        ke in 1e5..1e7f64, ki in 0.0..1e7f64,
        specs in prop::collection::vec(mode_spec(), 0..4),
        df in -500e6..500e6f64,
    ) {
        let s = build(ke, ki, &specs);
        let t = s21(FC + df, &s, 0.0).unwrap().norm();
        prop_assert!(t <= 2.0 * ke / (ke + ki) * (1.0 + 1e-12));
    }

    #[test]
    fn efficiency_is_sum_of_mode_powers_and_order_free(
        specs in prop::collection::vec(mode_spec(), 1..4),
        df in -300e6..300e6f64,
    ) {
        let s = build(2.1e6, 0.6e6, &specs);
        let f = FC + df;
        let eta = eta_spectrum(f, &s, 0.0).unwrap();
        let sum: f64 = s.modes.iter().map(|m| s31_mode(f, &s, 0.0, &m.label).unwrap().norm_sqr()).sum();
        prop_assert!(eta >= 0.0);
        prop_assert!((eta - sum).abs() <= 1e-12 * eta.max(f64::MIN_POSITIVE));
        let mut reversed = specs.clone();
        reversed.reverse();
        let r = build(2.1e6, 0.6e6, &reversed);
        let eta_r = eta_spectrum(f, &r, 0.0).unwrap();
        prop_assert!((eta - eta_r).abs() <= 1e-12 * eta.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn uncoupled_modes_leave_the_cavity_bare(
        specs in prop::collection::vec(mode_spec(), 1..4),
        df in -300e6..300e6f64,
    ) {
        let zeroed: Vec<_> = specs.into_iter().map(|m| ModeSpec { g: 0.0, ..m }).collect();
        let s = build(2.1e6, 0.6e6, &zeroed);
        let bare = build(2.1e6, 0.6e6, &[]);
        prop_assert_eq!(s21(FC + df, &s, 0.0).unwrap(), s21(FC + df, &bare, 0.0).unwrap());
        prop_assert_eq!(eta_spectrum(FC + df, &s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_resonant_forms_agree(
        g in 1e5..150e6f64, gamma in 1e4..5e6f64, delta in 1e-4..5.0f64,
        ke in 1e5..1e7f64, ki in 0.0..1e7f64,
    ) {
        let s = build(ke, ki, &[ModeSpec { offset: 0.0, g, gamma, delta, beta: 1.0 }]);
        let a = eta_resonant(&s).unwrap();
        let b = eta_single_resonant(g, gamma, delta, &s.cavity).unwrap();
        let c = eta_spectrum(FC, &s, 0.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!((a - c).abs() <= 1e-10 * a);
    }

    #[test]
    fn efficiency_scales_linearly_with_beta_delta(
        ms in mode_spec(), factor in 0.1..10.0f64, df in -100e6..100e6f64,
    ) {
        let base = build(2.1e6, 0.6e6, std::slice::from_ref(&ms));
        let scaled = build(2.1e6, 0.6e6, &[ModeSpec { beta: ms.beta * factor, ..ms }]);
        let (a, b) = (eta_spectrum(FC + df, &base, 0.0).unwrap(), eta_spectrum(FC + df, &scaled, 0.0).unwrap());
        prop_assert!((b - factor * a).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE));
    }
}
