//! Three-level ring model: Peierls-phased tunnelling Hamiltonian, local gauge
//! transformations, the dark state of the two-coupling Hamiltonian and a
//! norm-preserving propagator for time-dependent pulse schedules.
//!
//! Natural units are used throughout (hbar = m = l = 1), so times are in
//! units of tau = m l^2 / hbar and tunnelling amplitudes in units of 1/tau.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::io::{write_meta, Meta};

pub type Mat3 = Matrix3<C64>;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Peierls phases picked up when tunnelling anticlockwise along each ring
/// segment. Only their sum is physical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseConfig {
    pub phi12: f64,
    pub phi23: f64,
    pub phi31: f64,
}

impl PhaseConfig {
    pub fn new(phi12: f64, phi23: f64, phi31: f64) -> Self {
        Self { phi12, phi23, phi31 }
    }

    /// Gauge in which the whole flux sits on the 3 -> 1 link, so that the
    /// 1-2 and 2-3 couplings are real.
    pub fn gauge_fixed(total: f64) -> Self {
        Self::new(0.0, 0.0, total)
    }

    /// The flux quarter-turn that turns the 1-3 coupling purely imaginary.
    pub fn quarter_flux() -> Self {
        Self::gauge_fixed(FRAC_PI_2)
    }

    pub fn total(&self) -> f64 {
        self.phi12 + self.phi23 + self.phi31
    }

    /// Total phase reduced to [0, 2 pi).
    pub fn total_wrapped(&self) -> f64 {
        self.total().rem_euclid(std::f64::consts::TAU)
    }

    fn is_finite(&self) -> bool {
        self.phi12.is_finite() && self.phi23.is_finite() && self.phi31.is_finite()
    }
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// Normalized amplitudes on the localized trap states |1>, |2>, |3>.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeLevelState {
    amps: Vector3<C64>,
}

impl ThreeLevelState {
    /// Builds a state from (not necessarily normalized) amplitudes.
    pub fn new(c1: C64, c2: C64, c3: C64) -> Result<Self> {
        Self::from_vector(Vector3::new(c1, c2, c3))
    }

    pub fn from_vector(v: Vector3<C64>) -> Result<Self> {
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite state amplitude".into()));
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    /// The localized state of trap `j` (1-based).
    pub fn basis(j: usize) -> Self {
        assert!((1..=3).contains(&j), "trap index must be 1, 2 or 3");
        let mut amps = Vector3::from_element(ZERO);
        amps[j - 1] = ONE;
        Self { amps }
    }

    /// (|1> - i|2> - |3>) / sqrt 3, the equal three-trap superposition.
    pub fn superposition_target() -> Self {
        Self::new(ONE, -I, -ONE).expect("finite, nonzero")
    }

    /// -|3>, the transport target reached by following the dark state.
    pub fn transport_target() -> Self {
        Self { amps: Vector3::new(ZERO, ZERO, -ONE) }
    }

    pub fn amplitudes(&self) -> &Vector3<C64> {
        &self.amps
    }

    pub fn amplitude(&self, j: usize) -> C64 {
        self.amps[j - 1]
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.amps[0].norm_sqr(), self.amps[1].norm_sqr(), self.amps[2].norm_sqr()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// <self|other>
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Applies a unitary without renormalizing, so norm drift stays visible.
    pub fn evolved(&self, u: &Mat3) -> Self {
        Self { amps: u * self.amps }
    }
}

/// |<target|psi>|^2
pub fn fidelity(psi: &ThreeLevelState, target: &ThreeLevelState) -> f64 {
    target.inner(psi).norm_sqr()
}

/// The spin-1 matrices that span the flux-quarter-turn Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct KMatrices {
    pub k1: Mat3,
    pub k2: Mat3,
    pub k3: Mat3,
}

impl KMatrices {
    pub fn new() -> Self {
        let k1 = Mat3::new(ZERO, ONE, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO);
        let k2 = Mat3::new(ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ONE, ZERO);
        let k3 = Mat3::new(ZERO, ZERO, -I, ZERO, ZERO, ZERO, I, ZERO, ZERO);
        Self { k1, k2, k3 }
    }

    pub fn as_array(&self) -> [&Mat3; 3] {
        [&self.k1, &self.k2, &self.k3]
    }

    /// a1 K1 + a2 K2 + a3 K3
    pub fn combine(&self, a1: f64, a2: f64, a3: f64) -> Mat3 {
        self.k1 * C64::from(a1) + self.k2 * C64::from(a2) + self.k3 * C64::from(a3)
    }
}

impl Default for KMatrices {
    fn default() -> Self {
        Self::new()
    }
}

pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    a * b - b * a
}

/// Ring Hamiltonian with zero on-site energies and Peierls-phased couplings,
/// including the overall -1/2 prefactor.
pub fn hamiltonian(omega12: f64, omega23: f64, omega31: f64, phases: &PhaseConfig) -> Result<Mat3> {
    if !(omega12.is_finite() && omega23.is_finite() && omega31.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite coupling ({omega12}, {omega23}, {omega31})"
        )));
    }
    if !phases.is_finite() {
        return Err(Error::Domain("non-finite Peierls phase".into()));
    }
    let h12 = C64::from_polar(-0.5 * omega12, phases.phi12);
    let h23 = C64::from_polar(-0.5 * omega23, phases.phi23);
    let h13 = C64::from_polar(-0.5 * omega31, -phases.phi31);
    Ok(Mat3::new(
        ZERO,
        h12,
        h13,
        h12.conj(),
        ZERO,
        h23,
        h13.conj(),
        h23.conj(),
        ZERO,
    ))
}

/// Local-phase unitary that moves all flux onto the 1-3 link.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    u: Mat3,
}

impl GaugeTransform {
    pub fn unitary(&self) -> &Mat3 {
        &self.u
    }

    /// U^dagger H U
    pub fn apply(&self, h: &Mat3) -> Mat3 {
        self.u.adjoint() * h * self.u
    }

    /// State in the gauge-fixed frame, U^dagger psi.
    pub fn state_to_fixed(&self, psi: &ThreeLevelState) -> ThreeLevelState {
        psi.evolved(&self.u.adjoint())
    }
}

pub fn gauge_transform(phases: &PhaseConfig) -> GaugeTransform {
    let d2 = C64::from_polar(1.0, -phases.phi12);
    let d3 = C64::from_polar(1.0, -(phases.phi12 + phases.phi23));
    GaugeTransform {
        u: Mat3::from_diagonal(&Vector3::new(ONE, d2, d3)),
    }
}

/// Zero-energy eigenstate cos(theta)|1> - sin(theta)|3> of the Hamiltonian
/// without the 1-3 coupling, tan(theta) = omega12 / omega23.
pub fn dark_state(omega12: f64, omega23: f64) -> Result<ThreeLevelState> {
    if !(omega12.is_finite() && omega23.is_finite()) {
        return Err(Error::Domain("non-finite coupling".into()));
    }
    if omega12 == 0.0 && omega23 == 0.0 {
        return Err(Error::Degenerate(
            "dark-state mixing angle undefined when both couplings vanish".into(),
        ));
    }
    let theta = omega12.atan2(omega23);
    ThreeLevelState::new(C64::from(theta.cos()), ZERO, C64::from(-theta.sin()))
}

/// Mixing angle of the dark state.
pub fn dark_angle(omega12: f64, omega23: f64) -> f64 {
    omega12.atan2(omega23)
}

/// Tunnelling amplitudes sampled on a uniform grid over [0, T], together with
/// the Peierls phases they are dressed with.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    duration: f64,
    omega12: Vec<f64>,
    omega23: Vec<f64>,
    omega31: Vec<f64>,
    phases: PhaseConfig,
}

impl PulseSchedule {
    pub fn new(
        duration: f64,
        omega12: Vec<f64>,
        omega23: Vec<f64>,
        omega31: Vec<f64>,
        phases: PhaseConfig,
    ) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::Domain(format!("schedule duration must be positive, got {duration}")));
        }
        let n = omega12.len();
        if n < 2 || omega23.len() != n || omega31.len() != n {
            return Err(Error::Domain(format!(
                "pulse samples must have equal length >= 2 (got {}, {}, {})",
                n,
                omega23.len(),
                omega31.len()
            )));
        }
        for (name, v) in [("omega12", &omega12), ("omega23", &omega23), ("omega31", &omega31)] {
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("{name} is non-finite at sample {k}")));
            }
        }
        if !phases.is_finite() {
            return Err(Error::Domain("non-finite Peierls phase".into()));
        }
        Ok(Self { duration, omega12, omega23, omega31, phases })
    }

    /// Samples three closures on `n` uniformly spaced points.
    pub fn from_fn<F>(duration: f64, n: usize, phases: PhaseConfig, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64, f64),
    {
        if n < 2 {
            return Err(Error::Domain("need at least two samples".into()));
        }
        let dt = duration / (n - 1) as f64;
        let mut o12 = Vec::with_capacity(n);
        let mut o23 = Vec::with_capacity(n);
        let mut o31 = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b, c) = f(k as f64 * dt);
            o12.push(a);
            o23.push(b);
            o31.push(c);
        }
        Self::new(duration, o12, o23, o31, phases)
    }

    pub fn with_phases(mut self, phases: PhaseConfig) -> Self {
        self.phases = phases;
        self
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.omega12.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega12.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.duration / (self.len() - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.len() {
            self.duration
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn omega12(&self) -> &[f64] {
        &self.omega12
    }

    pub fn omega23(&self) -> &[f64] {
        &self.omega23
    }

    pub fn omega31(&self) -> &[f64] {
        &self.omega31
    }

    pub fn phases(&self) -> &PhaseConfig {
        &self.phases
    }

    /// Couplings at sample `k`.
    pub fn at(&self, k: usize) -> (f64, f64, f64) {
        (self.omega12[k], self.omega23[k], self.omega31[k])
    }

    /// Linearly interpolated couplings, clamped to the schedule ends.
    pub fn sample(&self, t: f64) -> (f64, f64, f64) {
        let (k, w) = self.locate(t);
        let lerp = |v: &[f64]| v[k] + w * (v[k + 1] - v[k]);
        (lerp(&self.omega12), lerp(&self.omega23), lerp(&self.omega31))
    }

    // segment index and fractional position of t
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.len();
        let x = (t / self.dt()).clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        (k, x - k as f64)
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<Mat3> {
        let (a, b, c) = self.sample(t);
        hamiltonian(a, b, c, &self.phases)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &Meta) -> std::io::Result<()> {
        write_meta(w, meta)?;
        writeln!(w, "t,omega12,omega23,omega31")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:.15e},{:.15e},{:.15e},{:.15e}",
                self.time(k),
                self.omega12[k],
                self.omega23[k],
                self.omega31[k]
            )?;
        }
        Ok(())
    }
}

/// exp(-i H dt) for a Hermitian H.
pub fn propagator(h: &Mat3, dt: f64) -> Mat3 {
    (h * C64::new(0.0, -dt)).exp()
}

/// Recorded time series of an evolution run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ThreeLevelState>,
    pub target: Option<ThreeLevelState>,
}

impl Trajectory {
    pub fn with_target(mut self, target: ThreeLevelState) -> Self {
        self.target = Some(target);
        self
    }

    pub fn final_state(&self) -> &ThreeLevelState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_populations(&self) -> [f64; 3] {
        self.final_state().populations()
    }

    pub fn population_series(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |s| s.amplitude(j).norm_sqr())
    }

    pub fn max_population(&self, j: usize) -> f64 {
        self.population_series(j).fold(0.0, f64::max)
    }

    pub fn max_norm_error(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.target.as_ref().map(|t| fidelity(self.final_state(), t))
    }

    /// CSV `t,P1,P2,P3[,F],norm`, writing every `stride`-th record and always
    /// the final one.
    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &Meta, stride: usize) -> std::io::Result<()> {
        write_meta(w, meta)?;
        if self.target.is_some() {
            writeln!(w, "t,P1,P2,P3,F,norm")?;
        } else {
            writeln!(w, "t,P1,P2,P3,norm")?;
        }
        let stride = stride.max(1);
        let last = self.states.len() - 1;
        for (k, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            if k % stride != 0 && k != last {
                continue;
            }
            let [p1, p2, p3] = s.populations();
            write!(w, "{t:.15e},{p1:.15e},{p2:.15e},{p3:.15e}")?;
            if let Some(target) = &self.target {
                write!(w, ",{:.15e}", fidelity(s, target))?;
            }
            writeln!(w, ",{:.15e}", s.norm_sqr())?;
        }
        Ok(())
    }
}

/// Number of uniform steps covering `duration` with steps no longer than `dt`.
pub(crate) fn step_count(duration: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
    }
    if dt > duration * (1.0 + 1e-12) {
        return Err(Error::InvalidStep(format!("dt = {dt} exceeds the duration {duration}")));
    }
    Ok(((duration / dt) - 1e-9).ceil().max(1.0) as usize)
}

/// Propagates `psi0` through the schedule with midpoint matrix exponentials.
///
/// The step is shrunk so that an integer number of steps spans [0, T]; every
/// step is recorded.
pub fn evolve(schedule: &PulseSchedule, psi0: &ThreeLevelState, dt: f64) -> Result<Trajectory> {
    let duration = schedule.duration();
    let n = step_count(duration, dt)?;
    let h = duration / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(*psi0);
    let mut psi = *psi0;
    for k in 0..n {
        let tm = (k as f64 + 0.5) * h;
        let u = propagator(&schedule.hamiltonian_at(tm)?, h);
        psi = psi.evolved(&u);
        times.push(if k + 1 == n { duration } else { (k + 1) as f64 * h });
        states.push(psi);
    }
    Ok(Trajectory { times, states, target: None })
}

/// Final state only; avoids storing the trajectory in parameter scans.
pub fn evolve_final(schedule: &PulseSchedule, psi0: &ThreeLevelState, dt: f64) -> Result<ThreeLevelState> {
    let duration = schedule.duration();
    let n = step_count(duration, dt)?;
    let h = duration / n as f64;
    let mut psi = *psi0;
    for k in 0..n {
        let tm = (k as f64 + 0.5) * h;
        psi = psi.evolved(&propagator(&schedule.hamiltonian_at(tm)?, h));
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs(m: &Mat3) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn quarter_flux_31_only_is_minus_half_k3() {
        let h = hamiltonian(0.0, 0.0, 1.0, &PhaseConfig::new(0.0, 0.0, FRAC_PI_2)).unwrap();
        let k = KMatrices::new();
        assert!(max_abs(&(h - k.k3 * C64::from(-0.5))) < 1e-15);
    }

    #[test]
    fn zero_couplings_give_zero_matrix() {
        let h = hamiltonian(0.0, 0.0, 0.0, &PhaseConfig::new(0.3, -1.2, 2.0)).unwrap();
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn uniform_real_couplings_spectrum() {
        let h = hamiltonian(1.0, 1.0, 1.0, &PhaseConfig::default()).unwrap();
        for (j, k) in [(0, 1), (0, 2), (1, 2)] {
            assert!((h[(j, k)] - C64::from(-0.5)).norm() < 1e-15);
        }
        // -(J - 1)/2 with J the all-ones matrix
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!((ev[1] - 0.5).abs() < 1e-12);
        assert!((ev[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_finite_coupling_rejected() {
        assert!(matches!(
            hamiltonian(f64::NAN, 0.0, 0.0, &PhaseConfig::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gauge_identity_for_zero_phases() {
        let g = gauge_transform(&PhaseConfig::default());
        assert_eq!(*g.unitary(), Mat3::identity());
    }

    #[test]
    fn gauge_moves_flux_to_13_element() {
        let phases = PhaseConfig::new(0.3, 0.5, FRAC_PI_2 - 0.8);
        let h = hamiltonian(0.7, 0.4, 0.9, &phases).unwrap();
        let ht = gauge_transform(&phases).apply(&h);
        // direct multiplication: (U^dag H U)_13 = H_13 * U_33
        let expected = C64::from_polar(-0.5 * 0.9, -FRAC_PI_2);
        assert!((ht[(0, 2)] - expected).norm() < 1e-14);
        assert!((ht[(0, 1)] - C64::from(-0.35)).norm() < 1e-14);
        assert!((ht[(1, 2)] - C64::from(-0.2)).norm() < 1e-14);
        for j in 0..3 {
            for k in 0..3 {
                assert!((ht[(j, k)].norm() - h[(j, k)].norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k_matrix_algebra() {
        let k = KMatrices::new();
        let ks = k.as_array();
        for m in ks {
            assert_eq!(*m, m.adjoint());
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (e, want) in ev.iter().zip([-1.0, 0.0, 1.0]) {
                assert!((e - want).abs() < 1e-12);
            }
        }
        // [K_j, K_k] = i eps_jkl K_l, checked entrywise and exactly
        assert_eq!(commutator(&k.k1, &k.k2), k.k3 * I);
        assert_eq!(commutator(&k.k2, &k.k3), k.k1 * I);
        assert_eq!(commutator(&k.k3, &k.k1), k.k2 * I);
    }

    #[test]
    fn dark_state_limits() {
        let s = dark_state(0.0, 1.0).unwrap();
        assert!((s.amplitude(1) - ONE).norm() < 1e-15);
        let s = dark_state(1.0, 0.0).unwrap();
        assert!((s.amplitude(3) + ONE).norm() < 1e-15);
        let s = dark_state(1.0, 1.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(1) - C64::from(r)).norm() < 1e-15);
        assert!((s.amplitude(3) + C64::from(r)).norm() < 1e-15);
        assert!(matches!(dark_state(0.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn dark_state_is_null_vector_of_h0() {
        for (a, b) in [(0.3, 0.9), (1.0, 0.1), (2.0, 2.0)] {
            let h0 = hamiltonian(a, b, 0.0, &PhaseConfig::default()).unwrap();
            let s = dark_state(a, b).unwrap();
            assert!((h0 * s.amplitudes()).norm() < 1e-15);
        }
    }

    #[test]
    fn fidelity_basics() {
        let one = ThreeLevelState::basis(1);
        assert_eq!(fidelity(&one, &one), 1.0);
        assert_eq!(fidelity(&one, &ThreeLevelState::basis(3)), 0.0);
        let phased = ThreeLevelState::new(C64::from_polar(1.0, 1.234), ZERO, ZERO).unwrap();
        assert!((fidelity(&phased, &one) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_schedule_is_identity() {
        let s = PulseSchedule::from_fn(10.0, 11, PhaseConfig::quarter_flux(), |_| (0.0, 0.0, 0.0)).unwrap();
        let psi0 = ThreeLevelState::new(C64::new(0.3, 0.1), C64::new(-0.2, 0.5), ONE).unwrap();
        let tr = evolve(&s, &psi0, 0.01).unwrap();
        assert_eq!(*tr.final_state(), psi0);
    }

    #[test]
    fn constant_31_pi_pulse_rabi_oracle() {
        let t_end = 20.0;
        let omega = PI / t_end;
        let s = PulseSchedule::from_fn(t_end, 3, PhaseConfig::quarter_flux(), |_| (0.0, 0.0, omega)).unwrap();
        let tr = evolve(&s, &ThreeLevelState::basis(1), 0.05).unwrap();
        for (t, st) in tr.times.iter().zip(&tr.states) {
            // closed-form two-level rotation c1 = cos(Omega t/2), c3 = -sin(Omega t/2)
            assert!((st.amplitude(1) - C64::from((omega * t / 2.0).cos())).norm() < 1e-12);
            assert!((st.amplitude(3) + C64::from((omega * t / 2.0).sin())).norm() < 1e-12);
        }
        assert!((tr.final_state().amplitude(3) + ONE).norm() < 1e-12);
    }

    #[test]
    fn step_validation() {
        let s = PulseSchedule::from_fn(1.0, 3, PhaseConfig::default(), |_| (0.0, 0.0, 0.0)).unwrap();
        let psi = ThreeLevelState::basis(1);
        assert!(matches!(evolve(&s, &psi, 0.0), Err(Error::InvalidStep(_))));
        assert!(matches!(evolve(&s, &psi, -1.0), Err(Error::InvalidStep(_))));
        assert!(matches!(evolve(&s, &psi, 2.0), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn propagator_is_unitary() {
        let h = hamiltonian(0.8, 0.3, 1.7, &PhaseConfig::new(0.2, 1.1, -0.4)).unwrap();
        for dt in [1e-3, 0.1, 1.0] {
            let u = propagator(&h, dt);
            assert!(max_abs(&(u.adjoint() * u - Mat3::identity())) < 1e-12);
        }
    }

    #[test]
    fn schedule_rejects_bad_input() {
        let ph = PhaseConfig::default();
        assert!(PulseSchedule::new(1.0, vec![0.0], vec![0.0], vec![0.0], ph).is_err());
        assert!(PulseSchedule::new(0.0, vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], ph).is_err());
        assert!(PulseSchedule::new(1.0, vec![0.0, f64::INFINITY], vec![0.0; 2], vec![0.0; 2], ph).is_err());
        assert!(PulseSchedule::new(1.0, vec![0.0; 2], vec![0.0; 3], vec![0.0; 2], ph).is_err());
    }

    #[test]
    fn linear_interpolation_between_samples() {
        let s = PulseSchedule::new(2.0, vec![0.0, 1.0, 3.0], vec![1.0; 3], vec![0.0; 3], PhaseConfig::default()).unwrap();
        assert_eq!(s.sample(0.5).0, 0.5);
        assert_eq!(s.sample(1.5).0, 2.0);
        assert_eq!(s.sample(5.0).0, 3.0);
    }
}
