mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

use common::simpson;
use ringpass::continuum::{
    build_potential, energy, evolve_ring, ground_state_relax, localized_basis, localized_state, trap_position,
    trap_populations, ContinuumField, EvolveOptions, PotentialFrame, RelaxOptions, RingGrid, Splitting,
};
use ringpass::harness::{continuum_run, Scenario, ScenarioConfig};
use ringpass::mapping::{tune_depth_smoothed, FrameSeries, MapTable, MapTableConfig, DEFAULT_E0};
use ringpass::pulsedesign::{superposition_scheme_sampled, transport_scheme_sampled, SchemeKind};

// All three traps tuned to E0 = -5 on barriers with decay rates (5, 6, 7),
// so that their couplings are modest but not negligible.
fn resonant_frame(sigma: f64) -> PotentialFrame {
    let e0 = DEFAULT_E0;
    let barriers = [5.0_f64, 6.0, 7.0].map(|k| e0 + 0.5 * k * k);
    let mut f = PotentialFrame::new(barriers, [0.0; 3], sigma, Some(e0));
    for j in 0..3 {
        let (vl, vr) = f.neighbours(j);
        f.depths[j] = tune_depth_smoothed(vl, vr, e0, sigma).unwrap();
    }
    f
}

fn static_series(frame: PotentialFrame, duration: f64) -> FrameSeries {
    FrameSeries { times: vec![0.0, duration], frames: vec![frame, frame] }
}

fn max_diff(a: &ContinuumField, b: &ContinuumField) -> f64 {
    a.psi.iter().zip(&b.psi).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn trap_areas_equal_depths() {
    let sigma = 0.01;
    let grid = RingGrid::new(2048, 0.0).unwrap();
    let v = 3.0;
    let depths = [12.0, 7.5, 20.0];
    let frame = PotentialFrame::new([v; 3], depths, sigma, None);
    let pot = build_potential(&frame, &grid).unwrap();
    for j in 0..3 {
        let xj = trap_position(j);
        let area: f64 = (0..grid.len())
            .filter(|&i| RingGrid::displacement(grid.x(i), xj).abs() <= 10.0 * sigma)
            .map(|i| (pot[i] - v) * grid.dx())
            .sum();
        assert!((area + depths[j]).abs() < 1e-6, "trap {j}: {area}");
    }
}

#[test]
fn potential_minima_sit_on_traps() {
    let frame = resonant_frame(0.01);
    let grid = RingGrid::new(2048, 0.0).unwrap();
    let pot = build_potential(&frame, &grid).unwrap();
    for j in 0..3 {
        let xj = trap_position(j);
        let near: Vec<usize> =
            (0..grid.len()).filter(|&i| RingGrid::displacement(grid.x(i), xj).abs() < 0.25).collect();
        let imin = *near.iter().min_by(|&&a, &&b| pot[a].total_cmp(&pot[b])).unwrap();
        assert!(RingGrid::displacement(grid.x(imin), xj).abs() <= grid.dx(), "trap {j}");
    }
}

#[test]
fn relaxed_state_sits_at_e0() {
    let sigma = 0.01;
    let frame = resonant_frame(sigma);
    let mut energies = Vec::new();
    for n in [2048, 4096] {
        let grid = RingGrid::new(n, 0.0).unwrap();
        for j in 0..3 {
            let (psi, e) = ground_state_relax(&frame, &grid, j, &RelaxOptions::default()).unwrap();
            assert!(((e - DEFAULT_E0) / DEFAULT_E0).abs() < 1e-3, "trap {j}: {e}");
            let overlap = localized_state(j, &frame, &grid).unwrap().inner(&psi).norm();
            assert!(overlap > 0.999, "trap {j}: overlap {overlap}");
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
            if j == 0 {
                energies.push(e);
            }
        }
    }
    assert!((energies[0] - energies[1]).abs() < 1e-6, "{energies:?}");
}

#[test]
fn force_gradient_relaxation_beats_strang() {
    let sigma = 0.01;
    let frame = resonant_frame(sigma);
    let grid = RingGrid::new(2048, 0.0).unwrap();
    let run = |splitting, dtau| {
        let opts = RelaxOptions { dtau, splitting, ..RelaxOptions::default() };
        ground_state_relax(&frame, &grid, 0, &opts).unwrap().1
    };
    let reference = run(Splitting::ForceGradient, 2.5e-5);
    let fg = (run(Splitting::ForceGradient, 1e-4) - reference).abs();
    let strang = (run(Splitting::Strang, 1e-4) - reference).abs();
    assert!(fg < strang / 10.0, "fg {fg:e} strang {strang:e}");
}

// Phase error of a stationary state after a fixed time: second order for
// Strang, fourth order for the force-gradient scheme.
#[test]
fn splitting_orders() {
    let sigma = 0.02;
    let frame = resonant_frame(sigma).isolating(0);
    let grid = RingGrid::new(1024, 0.0).unwrap();
    let relax = RelaxOptions { dtau: 2e-5, ..RelaxOptions::default() };
    let (psi0, _) = ground_state_relax(&frame, &grid, 0, &relax).unwrap();
    let duration = 0.4;
    let phase = |splitting, dt: f64| {
        let opts = EvolveOptions { record_every: usize::MAX, splitting, ..EvolveOptions::new(dt) };
        let tr = evolve_ring(&psi0, &static_series(frame, duration), &grid, &opts).unwrap();
        psi0.inner(&tr.final_field).arg()
    };
    let reference = phase(Splitting::ForceGradient, 2.5e-5);
    let err = |s, dt| (phase(s, dt) - reference).abs();
    let strang = [err(Splitting::Strang, 2e-4), err(Splitting::Strang, 1e-4)];
    let fg = [err(Splitting::ForceGradient, 4e-4), err(Splitting::ForceGradient, 2e-4)];
    let order = |e: [f64; 2]| (e[0] / e[1]).log2();
    assert!((order(strang) - 2.0).abs() < 0.3, "Strang {strang:?}");
    assert!((order(fg) - 4.0).abs() < 0.5, "force gradient {fg:?}");
}

#[test]
fn norm_is_conserved() {
    let frame = resonant_frame(0.02);
    let grid = RingGrid::new(1024, FRAC_PI_2).unwrap();
    let psi0 = localized_state(0, &frame, &grid).unwrap();
    let steps = 10_000;
    let dt = 4e-4;
    for splitting in [Splitting::Strang, Splitting::ForceGradient] {
        let opts = EvolveOptions { record_every: 500, splitting, ..EvolveOptions::new(dt) };
        let tr = evolve_ring(&psi0, &static_series(frame, steps as f64 * dt), &grid, &opts).unwrap();
        assert!(tr.max_norm_error() < 1e-10, "{:e}", tr.max_norm_error());
    }
}

#[test]
fn eigenstate_only_picks_up_a_phase() {
    let sigma = 0.02;
    let frame = resonant_frame(sigma).isolating(1);
    let grid = RingGrid::new(1024, 1.3).unwrap();
    let (psi0, _) = ground_state_relax(&frame, &grid, 1, &RelaxOptions { dtau: 1e-4, ..RelaxOptions::default() }).unwrap();
    let e = energy(&psi0, &frame, &grid).unwrap();
    let duration = 2.0;
    let opts = EvolveOptions { record_every: 1000, ..EvolveOptions::new(2e-4) };
    let tr = evolve_ring(&psi0, &static_series(frame, duration), &grid, &opts).unwrap();
    let amp = psi0.inner(&tr.final_field);
    assert!((amp.norm() - 1.0).abs() < 1e-6, "|<0|T>| = {}", amp.norm());
    let expected = C64::from_polar(1.0, -e * duration);
    assert!((amp / amp.norm() - expected).norm() < 1e-5, "{amp} vs {expected}");
}

#[test]
fn zero_flux_evolution_is_time_reversible() {
    let frame = resonant_frame(0.02);
    let grid = RingGrid::new(1024, 0.0).unwrap();
    let (mut psi0, _) = ground_state_relax(&frame, &grid, 0, &RelaxOptions::default()).unwrap();
    // real up to FFT round-off
    assert!(psi0.psi.iter().all(|c| c.im.abs() < 1e-10));
    psi0.psi.iter_mut().for_each(|c| c.im = 0.0);
    let series = static_series(frame, 1.0);
    let opts = EvolveOptions { record_every: 10_000, ..EvolveOptions::new(2e-4) };
    let forward = evolve_ring(&psi0, &series, &grid, &opts).unwrap().final_field;
    // something has happened: tunnelling moved weight off trap 1
    assert!((psi0.inner(&forward).norm() - 1.0).abs() > 1e-3);
    let mut back = forward.clone();
    back.psi.iter_mut().for_each(|c| *c = c.conj());
    let mut returned = evolve_ring(&back, &series, &grid, &opts).unwrap().final_field;
    returned.psi.iter_mut().for_each(|c| *c = c.conj());
    let scale = psi0.psi.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    assert!(max_diff(&returned, &psi0) < 1e-8 * scale, "{:e}", max_diff(&returned, &psi0));
}

#[test]
fn flux_is_periodic() {
    let frame = resonant_frame(0.02);
    let run = |flux: f64| {
        let grid = RingGrid::new(1024, flux).unwrap();
        let (psi0, _) = ground_state_relax(&frame, &grid, 0, &RelaxOptions::default()).unwrap();
        let opts = EvolveOptions { record_every: 500, ..EvolveOptions::new(2e-4) };
        let tr = evolve_ring(&psi0, &static_series(frame, 1.0), &grid, &opts).unwrap();
        tr.records.iter().map(|r| r.populations.unwrap().p).collect::<Vec<_>>()
    };
    for phi in [0.0, FRAC_PI_2, -1.0] {
        let (a, b) = (run(phi), run(phi + 2.0 * PI));
        for (x, y) in a.iter().zip(&b) {
            for j in 0..3 {
                assert!((x[j] - y[j]).abs() < 1e-8, "phi {phi}: {x:?} vs {y:?}");
            }
        }
    }
    // a quarter flux makes a difference
    let (a, b) = (run(0.0), run(FRAC_PI_2));
    assert!((a.last().unwrap()[2] - b.last().unwrap()[2]).abs() > 1e-4);
}

#[test]
fn trap_populations_of_basis_states() {
    let frame = resonant_frame(0.01);
    let grid = RingGrid::new(2048, 0.7).unwrap();
    let basis = localized_basis(&frame, &grid).unwrap();
    for j in 0..3 {
        let p = trap_populations(&basis[j], &basis);
        assert!((p.p[j] - 1.0).abs() < 1e-12);
    }
}

// Overlap of the analytic states of trap i and of its right-hand neighbour
// by quadrature along the ring, each state continued from its own trap out
// to half the circumference. Where the neighbour's state is reached the long
// way round, the product picks up the flux phase.
fn overlap_by_quadrature(frame: &PotentialFrame, i: usize, flux: f64) -> f64 {
    let s = frame.delta_states().unwrap();
    let (a, b) = (s[i], s[(i + 1) % 3]);
    let half = 1.5;
    let wrap = |d: f64| if d <= -half { d + 2.0 * half } else { d };
    let f = |d: f64| a.psi(d) * b.psi(wrap(d - 1.0));
    let n = 60_000;
    // split at the kinks and at the wrap point
    let direct: f64 = [(-0.5, 0.0), (0.0, 1.0), (1.0, half)].iter().map(|&(lo, hi)| simpson(f, lo, hi, n)).sum();
    let around = simpson(f, -half, -0.5, n);
    let raw = (C64::from(direct) + C64::from_polar(around, flux)).norm();
    let norm = |t: ringpass::mapping::DeltaTrapSolution| {
        (simpson(|d| t.psi(d).powi(2), -half, 0.0, n) + simpson(|d| t.psi(d).powi(2), 0.0, half, n)).sqrt()
    };
    raw / (norm(a) * norm(b))
}

// The leading term of the overlap across a barrier with decay rate kappa
// is A_i A_j l exp(-kappa l) = Omega / (2 |E0|): the basis is only as
// orthogonal as the strongest coupling allows.
#[test]
fn basis_overlaps_follow_couplings() {
    let e0 = DEFAULT_E0;
    let sigma = 0.01;
    let table = MapTable::build(MapTableConfig::new(e0, Some(sigma))).unwrap();
    let grid = RingGrid::new(2048, FRAC_PI_2).unwrap();
    let transport = transport_scheme_sampled(100.0, 0.25, 201).unwrap().schedule;
    let superposition = superposition_scheme_sampled(400.0, 201).unwrap().schedule;
    let mut worst = [0.0_f64; 2];
    for (s, schedule) in [&transport, &superposition].into_iter().enumerate() {
        let frames = table.invert_schedule(schedule).unwrap();
        for (k, f) in frames.frames.iter().enumerate().step_by(4) {
            let b = localized_basis(f, &grid).unwrap();
            let w = table.couplings(f.barriers);
            for (c, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let overlap = b[i].inner(&b[j]).norm();
                worst[s] = worst[s].max(overlap);
                let quad = overlap_by_quadrature(f, i, grid.flux());
                assert!((overlap - quad).abs() < 1e-3 * quad + 1e-8, "t={}: {overlap} vs {quad}", frames.times[k]);
                let leading = w[c] / (2.0 * e0.abs());
                if leading > 1e-3 {
                    assert!(overlap > leading && overlap < 1.25 * leading, "{overlap} vs {leading}");
                }
            }
        }
    }
    // the transport peak coupling of 1/3 leaves overlaps near 0.04
    let peak = transport.omega31().iter().cloned().fold(0.0, f64::max);
    assert!(worst[0] > peak / (2.0 * e0.abs()) && worst[0] < 0.05, "transport overlap {}", worst[0]);
    assert!(worst[1] < 1e-2, "superposition overlap {}", worst[1]);
}

// Halving the step at the production grid; takes a few minutes.
#[test]
#[ignore]
fn production_transport_self_convergence() {
    let run = |dt: f64| {
        let mut c = ScenarioConfig::defaults(Scenario::TransportContinuum, false);
        c.dt = dt;
        continuum_run(&c, SchemeKind::Transport).unwrap().final_populations()
    };
    let dt = ScenarioConfig::defaults(Scenario::TransportContinuum, false).dt;
    let (a, b) = (run(dt), run(0.5 * dt));
    for j in 0..3 {
        assert!((a[j] - b[j]).abs() < 1e-4, "{a:?} vs {b:?}");
    }
}
