use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use ringpass::model3l::{evolve, fidelity};
use ringpass::pulsedesign::{
    boundary_commutators, counterdiabatic_omega31, invariant_residual, pulse_area, sample_times,
    superposition_scheme, transport_scheme, transport_scheme_sampled, GAUSSIAN_WIDTH,
};

// For Gaussians of equal width centred at 1/2 and 1/3 of T the dark-state
// angle is theta = atan(exp(u)) with u = a s + b linear in s = t/T, so
// 2 d(theta)/dt = a / (T cosh u).
fn gaussian_pair_line() -> (f64, f64) {
    let w = GAUSSIAN_WIDTH;
    (w / 3.0, -w * (0.25 - 1.0 / 9.0))
}

fn cd_pulse_exact(t: f64, duration: f64) -> f64 {
    let (a, b) = gaussian_pair_line();
    a / (duration * (a * t / duration + b).cosh())
}

fn gudermannian(u: f64) -> f64 {
    2.0 * (0.5 * u).tanh().atan()
}

#[test]
fn transport_pulse_matches_closed_form() {
    for duration in [25.0, 100.0, 400.0] {
        let s = transport_scheme(duration, 0.25).unwrap().schedule;
        let peak = s.omega31().iter().cloned().fold(0.0, f64::max);
        for (k, t) in s.times().iter().enumerate() {
            assert!((s.omega31()[k] - cd_pulse_exact(*t, duration)).abs() < 1e-10 * peak.max(1.0));
        }
    }
}

#[test]
fn counterdiabatic_from_samples_agrees() {
    let duration = 100.0;
    let s = transport_scheme(duration, 0.25).unwrap().schedule;
    let cd = counterdiabatic_omega31(s.omega12(), s.omega23(), s.dt()).unwrap();
    let peak = s.omega31().iter().cloned().fold(0.0, f64::max);
    let worst = cd.iter().zip(s.omega31()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst < 1e-8 * peak, "worst {worst:e}");
}

#[test]
fn pi_area_of_transport_pulse() {
    let (a, b) = gaussian_pair_line();
    let exact = gudermannian(a + b) - gudermannian(b);
    assert!((exact - PI).abs() < 1e-5);
    for duration in [25.0, 100.0, 400.0] {
        let s = transport_scheme(duration, 0.25).unwrap().schedule;
        let area = pulse_area(s.omega31(), s.dt());
        assert!((area - exact).abs() < 1e-6, "T={duration}: {area}");
        assert!((area - PI).abs() < 1e-3);
    }
}

#[test]
fn peak_scales_as_inverse_duration() {
    let peak_t = |d: f64| transport_scheme(d, 0.25).unwrap().schedule.omega31().iter().cloned().fold(0.0, f64::max) * d;
    // the maximum of 1/cosh(a s + b) falls between samples
    let sampled = |d: f64| {
        sample_times(d, 10_001).iter().map(|&t| cd_pulse_exact(t, d)).fold(0.0, f64::max) * d
    };
    for d in [25.0, 100.0, 400.0] {
        assert!((peak_t(d) - sampled(d)).abs() < 1e-6 * sampled(d));
    }
    let r = peak_t(25.0) / peak_t(400.0);
    assert!((r - 1.0).abs() < 1e-6);
}

#[test]
fn transport_reaches_trap_three() {
    let scheme = transport_scheme(100.0, 0.25).unwrap();
    let tr = evolve(&scheme.schedule, &scheme.initial, 0.01).unwrap();
    assert!(tr.final_populations()[2] >= 0.999);
    assert!(tr.max_population(2) < 1e-4);
}

#[test]
fn superposition_reaches_target() {
    let scheme = superposition_scheme(400.0).unwrap();
    let tr = evolve(&scheme.schedule, &scheme.initial, 0.04).unwrap();
    let f = fidelity(tr.final_state(), &scheme.target);
    assert!(f >= 0.999, "F = {f}");
    for p in tr.final_populations() {
        assert!((p - 1.0 / 3.0).abs() < 1e-3, "P = {p}");
    }
}

#[test]
fn designed_schemes_satisfy_invariant_condition() {
    for scheme in [transport_scheme(100.0, 0.25).unwrap(), superposition_scheme(400.0).unwrap()] {
        let angles = scheme.angles.as_deref().unwrap();
        let r = invariant_residual(&scheme.schedule, angles).unwrap();
        assert!(r < 1e-6, "{}: residual {r:e}", scheme.kind);
    }
}

#[test]
fn invariant_commutes_with_hamiltonian_at_the_ends() {
    let scheme = superposition_scheme(400.0).unwrap();
    let (a, b) = boundary_commutators(&scheme.schedule, scheme.angles.as_deref().unwrap()).unwrap();
    assert!(a < 1e-8 && b < 1e-8, "{a:e} {b:e}");

    // The Gaussian pair never switches fully off, so the transport invariant
    // only commutes up to the leftover angle theta(0) ~ exp(b) and
    // pi/2 - theta(T) ~ exp(-(a + b)), each weighted by the pulse amplitude.
    let omega0 = 0.25;
    let scheme = transport_scheme(100.0, omega0).unwrap();
    let (a0, b0) = gaussian_pair_line();
    let bound = 4.0 * omega0 * (b0.exp() + (-(a0 + b0)).exp());
    let (c0, c1) = boundary_commutators(&scheme.schedule, scheme.angles.as_deref().unwrap()).unwrap();
    assert!(c0 < bound && c1 < bound, "{c0:e} {c1:e} bound {bound:e}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    // Any monotone theta(0) = 0 -> theta(T) = pi/2 gives a pulse of area pi.
    #[test]
    fn pi_pulse_law(duration in 5.0..500.0f64, mix in 0.0..1.0f64, p in 1.0..4.0f64) {
        let n = 4001;
        let theta = |s: f64| FRAC_PI_2 * ((1.0 - mix) * s.powf(p) + mix * (1.0 - (PI * s).cos()) / 2.0);
        let times = sample_times(duration, n);
        let th: Vec<f64> = times.iter().map(|&t| theta(t / duration)).collect();
        let d = ringpass::pulsedesign::derivative(&th, duration / (n - 1) as f64);
        let pulse: Vec<f64> = d.iter().map(|v| 2.0 * v).collect();
        let area = pulse_area(&pulse, duration / (n - 1) as f64);
        prop_assert!((area - PI).abs() < 1e-3, "area {}", area);
    }

    #[test]
    fn transport_fidelity_over_durations(duration in 25.0..400.0f64, omega0 in 0.05..1.0f64) {
        let scheme = transport_scheme_sampled(duration, omega0, 4001).unwrap();
        let tr = evolve(&scheme.schedule, &scheme.initial, duration / 4000.0).unwrap();
        prop_assert!(tr.final_populations()[2] > 0.999);
    }
}
