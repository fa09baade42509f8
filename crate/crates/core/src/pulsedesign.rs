//! Pulse schedules for the ring: counterintuitive SAP Gaussians, the
//! counter-diabatic 1-3 coupling, and inverse engineering from a
//! Lewis-Riesenfeld invariant parametrized by two auxiliary angles.
//!
//! The invariant used here is
//!
//! ```text
//! I = -sin(b) sin(a) K1 - sin(b) cos(a) K2 + cos(b) K3
//! ```
//!
//! and its zero-eigenvalue eigenstate (-sin b cos a, -i cos b, sin b sin a)
//! solves the Schrodinger equation with no extra phase, so steering the
//! angles steers the state.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model3l::{
    commutator, gauge_transform, hamiltonian, KMatrices, Mat3, PhaseConfig, PulseSchedule,
    ThreeLevelState,
};

/// Width factor of the SAP Gaussians, exp[-100 (t/T - c)^2].
pub const GAUSSIAN_WIDTH: f64 = 100.0;
/// Peak position (in units of T) of the 1-2 pulse.
pub const CENTER_12: f64 = 0.5;
/// Peak position (in units of T) of the 2-3 pulse; it comes first.
pub const CENTER_23: f64 = 1.0 / 3.0;

/// Value of T * Omega at t = T shared by all three couplings in the
/// superposition design. Must exceed 128 (pi/2 - atan sqrt 2)^2 / pi ~ 15.4
/// for the 1-2 coupling to stay non-negative near t = 0.
pub const SUPERPOSITION_END_COUPLING: f64 = 6.0 * PI;

/// Default amplitude cap for inverse-engineered pulses, in 1/tau.
pub const DEFAULT_OMEGA_CAP: f64 = 1e3;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

/// Uniform sample times over [0, T] with the last one pinned to T.
pub fn sample_times(duration: f64, n: usize) -> Vec<f64> {
    let dt = duration / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { duration } else { k as f64 * dt }).collect()
}

/// Counterintuitive Gaussian pair: (Omega12, Omega23) sampled on `n` points.
pub fn sap_gaussian_pulses(duration: f64, omega0: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_positive("T", duration)?;
    check_positive("omega0", omega0)?;
    check_samples(n)?;
    let g = |t: f64, c: f64| omega0 * (-GAUSSIAN_WIDTH * (t / duration - c).powi(2)).exp();
    let times = sample_times(duration, n);
    Ok((
        times.iter().map(|&t| g(t, CENTER_12)).collect(),
        times.iter().map(|&t| g(t, CENTER_23)).collect(),
    ))
}

/// First derivative of uniformly sampled data: fourth-order centred
/// differences in the interior, second-order centred next to the ends and
/// second-order one-sided at the ends.
pub fn derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "derivative needs at least 3 samples");
    let f = values;
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    for k in 1..n - 1 {
        d[k] = if k >= 2 && k + 2 < n {
            (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * dt)
        } else {
            (f[k + 1] - f[k - 1]) / (2.0 * dt)
        };
    }
    d
}

/// Counter-diabatic 1-3 coupling 2 d(theta)/dt with tan(theta) =
/// Omega12/Omega23, from sampled pulses.
pub fn counterdiabatic_omega31(omega12: &[f64], omega23: &[f64], dt: f64) -> Result<Vec<f64>> {
    if omega12.len() != omega23.len() || omega12.len() < 3 {
        return Err(Error::Domain("pulses must have equal length >= 3".into()));
    }
    check_positive("dt", dt)?;
    if let Some(k) = omega12.iter().zip(omega23).position(|(a, b)| a * a + b * b == 0.0) {
        return Err(Error::Singular {
            t: k as f64 * dt,
            reason: "both pulses vanish; the dark-state angle is undefined".into(),
        });
    }
    let d12 = derivative(omega12, dt);
    let d23 = derivative(omega23, dt);
    Ok((0..omega12.len())
        .map(|k| {
            let (a, b) = (omega12[k], omega23[k]);
            2.0 * (b * d12[k] - a * d23[k]) / (a * a + b * b)
        })
        .collect())
}

/// Trapezoidal integral of uniformly sampled data.
pub fn pulse_area(values: &[f64], dt: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Auxiliary angles alpha(t), beta(t) of the invariant with their first
/// derivatives.
pub trait AuxiliaryAngles: Send + Sync {
    fn duration(&self) -> f64;
    fn alpha(&self, t: f64) -> f64;
    fn alpha_dot(&self, t: f64) -> f64;
    fn beta(&self, t: f64) -> f64;
    fn beta_dot(&self, t: f64) -> f64;

    /// beta + pi/2. Implementations that know this offset in closed form
    /// should override it: tan(beta) diverges where it vanishes.
    fn beta_offset(&self, t: f64) -> f64 {
        self.beta(t) + FRAC_PI_2
    }

    fn invariant(&self, t: f64) -> InvariantOperator {
        InvariantOperator::from_offset(self.alpha(t), self.beta_offset(t))
    }
}

/// Largest mismatch, relative to the peak derivative, between the analytic
/// derivatives and fourth-order differences of the sampled angles.
pub fn derivative_consistency(angles: &dyn AuxiliaryAngles, n: usize) -> f64 {
    let times = sample_times(angles.duration(), n);
    let dt = times[1] - times[0];
    let mut worst: f64 = 0.0;
    let pairs: [(&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64); 2] = [
        (&|t| angles.alpha(t), &|t| angles.alpha_dot(t)),
        (&|t| angles.beta_offset(t), &|t| angles.beta_dot(t)),
    ];
    for (f, df) in pairs {
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let exact: Vec<f64> = times.iter().map(|&t| df(t)).collect();
        let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let fd = derivative(&values, dt);
        let err = fd.iter().zip(&exact).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / scale);
    }
    worst
}

/// The invariant at fixed angles. Stores beta through its offset from -pi/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantOperator {
    pub alpha: f64,
    beta_offset: f64,
}

impl InvariantOperator {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self::from_offset(alpha, beta + FRAC_PI_2)
    }

    pub fn from_offset(alpha: f64, beta_offset: f64) -> Self {
        Self { alpha, beta_offset }
    }

    pub fn beta(&self) -> f64 {
        self.beta_offset - FRAC_PI_2
    }

    // (sin b, cos b) from the offset
    fn sin_cos_beta(&self) -> (f64, f64) {
        (-self.beta_offset.cos(), self.beta_offset.sin())
    }

    pub fn matrix(&self) -> Mat3 {
        let (sb, cb) = self.sin_cos_beta();
        let (sa, ca) = self.alpha.sin_cos();
        KMatrices::new().combine(-sb * sa, -sb * ca, cb)
    }

    /// dI/dt for the given angle velocities.
    pub fn time_derivative(&self, alpha_dot: f64, beta_dot: f64) -> Mat3 {
        let (sb, cb) = self.sin_cos_beta();
        let (sa, ca) = self.alpha.sin_cos();
        KMatrices::new().combine(
            -alpha_dot * sb * ca - beta_dot * cb * sa,
            alpha_dot * sb * sa - beta_dot * cb * ca,
            -beta_dot * sb,
        )
    }

    /// Eigenvalue-0 eigenstate, which carries no Lewis-Riesenfeld phase.
    pub fn zero_mode(&self) -> ThreeLevelState {
        let (sb, cb) = self.sin_cos_beta();
        let (sa, ca) = self.alpha.sin_cos();
        ThreeLevelState::new(C64::from(-sb * ca), C64::new(0.0, -cb), C64::from(sb * sa))
            .expect("unit vector")
    }

    /// Eigenstates with eigenvalues (0, +1, -1).
    pub fn eigenstates(&self) -> [(f64, ThreeLevelState); 3] {
        let (sb, cb) = self.sin_cos_beta();
        let (sa, ca) = self.alpha.sin_cos();
        let pm = |s: f64| {
            ThreeLevelState::new(
                C64::new(cb * ca, s * sa),
                C64::new(0.0, -sb),
                C64::new(-cb * sa, s * ca),
            )
            .expect("unit vector")
        };
        [(0.0, self.zero_mode()), (1.0, pm(1.0)), (-1.0, pm(-1.0))]
    }
}

/// Angles of the dark-state path for the Gaussian SAP pair: beta pinned at
/// -pi/2 and tan(alpha) = Omega12/Omega23.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarkStateAngles {
    duration: f64,
}

impl DarkStateAngles {
    pub fn new(duration: f64) -> Self {
        Self { duration }
    }

    // ln(Omega12/Omega23) and its time derivative
    fn log_ratio(&self, t: f64) -> (f64, f64) {
        let s = t / self.duration;
        let slope = 2.0 * GAUSSIAN_WIDTH * (CENTER_12 - CENTER_23);
        let x = slope * s - GAUSSIAN_WIDTH * (CENTER_12 * CENTER_12 - CENTER_23 * CENTER_23);
        (x, slope / self.duration)
    }
}

impl AuxiliaryAngles for DarkStateAngles {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn alpha(&self, t: f64) -> f64 {
        self.log_ratio(t).0.exp().atan()
    }

    fn alpha_dot(&self, t: f64) -> f64 {
        let (x, xdot) = self.log_ratio(t);
        0.5 * xdot / x.cosh()
    }

    fn beta(&self, _t: f64) -> f64 {
        -FRAC_PI_2
    }

    fn beta_dot(&self, _t: f64) -> f64 {
        0.0
    }

    fn beta_offset(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Polynomial in s = t/T, coefficients in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }
}

/// Polynomial angles alpha(s) and beta(s) + pi/2 in s = t/T.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialAngles {
    duration: f64,
    alpha: Polynomial,
    alpha_d: Polynomial,
    offset: Polynomial,
    offset_d: Polynomial,
}

impl PolynomialAngles {
    pub fn new(duration: f64, alpha: Polynomial, beta_offset: Polynomial) -> Self {
        Self {
            duration,
            alpha_d: alpha.derivative(),
            offset_d: beta_offset.derivative(),
            alpha,
            offset: beta_offset,
        }
    }

    /// Superposition path: alpha from 0 to pi/4 (cubic, flat at both ends)
    /// and beta from -pi/2 to -atan(sqrt 2) (quartic, flat at both ends with
    /// vanishing curvature at the start).
    pub fn superposition(duration: f64) -> Self {
        let af = FRAC_PI_4;
        let swing = FRAC_PI_2 - 2f64.sqrt().atan();
        Self::new(
            duration,
            Polynomial(vec![0.0, 0.0, 3.0 * af, -2.0 * af]),
            Polynomial(vec![0.0, 0.0, 0.0, 4.0 * swing, -3.0 * swing]),
        )
    }
}

impl AuxiliaryAngles for PolynomialAngles {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn alpha(&self, t: f64) -> f64 {
        self.alpha.eval(t / self.duration)
    }

    fn alpha_dot(&self, t: f64) -> f64 {
        self.alpha_d.eval(t / self.duration) / self.duration
    }

    fn beta(&self, t: f64) -> f64 {
        self.beta_offset(t) - FRAC_PI_2
    }

    fn beta_dot(&self, t: f64) -> f64 {
        self.offset_d.eval(t / self.duration) / self.duration
    }

    fn beta_offset(&self, t: f64) -> f64 {
        self.offset.eval(t / self.duration)
    }
}

/// Options for [`lr_invert`].
#[derive(Clone, Debug)]
pub struct LrOptions {
    /// Any |Omega| above this aborts the inversion.
    pub omega_cap: f64,
    /// |cos beta| below which tan(beta) is treated as singular.
    pub pole_threshold: f64,
    /// sqrt(Omega12^2 + Omega23^2) per sample, used only where beta stays
    /// pinned at -pi/2 and the couplings' magnitude is otherwise free.
    pub envelope: Option<Vec<f64>>,
}

impl Default for LrOptions {
    fn default() -> Self {
        Self { omega_cap: DEFAULT_OMEGA_CAP, pole_threshold: 1e-6, envelope: None }
    }
}

fn invert_direct(angles: &dyn AuxiliaryAngles, omega31: &dyn Fn(f64) -> f64, t: f64) -> (f64, f64) {
    let (sa, ca) = angles.alpha(t).sin_cos();
    let u = angles.beta_offset(t);
    let tan_beta = -u.cos() / u.sin();
    let drive = 2.0 * angles.alpha_dot(t) - omega31(t);
    let bd = angles.beta_dot(t);
    (
        drive * sa * tan_beta - 2.0 * bd * ca,
        drive * ca * tan_beta + 2.0 * bd * sa,
    )
}

/// Omega12 and Omega23 that make the given angles (and Omega31) satisfy the
/// invariant condition, sampled on `n` points over [0, T].
///
/// Where cos(beta) is below the pole threshold the 0 * infinity products are
/// replaced by their limit, extrapolated from nearby regular times. Where
/// beta sits on the pole over a whole neighbourhood the ratio
/// Omega12/Omega23 = tan(alpha) is still fixed but the magnitude is not, and
/// `opts.envelope` has to supply it.
pub fn lr_invert(
    angles: &dyn AuxiliaryAngles,
    omega31: &dyn Fn(f64) -> f64,
    n: usize,
    opts: &LrOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_samples(n)?;
    let duration = angles.duration();
    check_positive("T", duration)?;
    if let Some(env) = &opts.envelope {
        if env.len() != n {
            return Err(Error::Domain("envelope length differs from sample count".into()));
        }
    }
    let singular = |t: f64| angles.beta_offset(t).sin().abs() < opts.pole_threshold;
    let times = sample_times(duration, n);
    let mut o12 = Vec::with_capacity(n);
    let mut o23 = Vec::with_capacity(n);
    for (k, &t) in times.iter().enumerate() {
        let (a, b) = if !singular(t) {
            invert_direct(angles, omega31, t)
        } else if let Some(v) = extrapolate_limit(angles, omega31, t, &singular) {
            v
        } else {
            pinned_limit(angles, omega31, t, k, opts)?
        };
        for v in [a, b] {
            if !v.is_finite() || v.abs() > opts.omega_cap {
                return Err(Error::Singular {
                    t,
                    reason: format!("|Omega| = {} exceeds the cap {}", v.abs(), opts.omega_cap),
                });
            }
        }
        o12.push(a);
        o23.push(b);
    }
    Ok((o12, o23))
}

// Cubic extrapolation from four regular points on the side facing the
// interval's interior.
fn extrapolate_limit(
    angles: &dyn AuxiliaryAngles,
    omega31: &dyn Fn(f64) -> f64,
    t: f64,
    singular: &dyn Fn(f64) -> bool,
) -> Option<(f64, f64)> {
    let duration = angles.duration();
    let dir = if t < 0.5 * duration { 1.0 } else { -1.0 };
    let mut h = duration * 1e-6;
    while h * 4.0 <= duration / 8.0 {
        let nodes: Vec<f64> = (1..=4).map(|j| t + dir * j as f64 * h).collect();
        if nodes.iter().all(|&s| !singular(s)) {
            let w = [4.0, -6.0, 4.0, -1.0];
            let (mut a, mut b) = (0.0, 0.0);
            for (&s, wj) in nodes.iter().zip(w) {
                let (x, y) = invert_direct(angles, omega31, s);
                a += wj * x;
                b += wj * y;
            }
            return Some((a, b));
        }
        h *= 2.0;
    }
    None
}

fn pinned_limit(
    angles: &dyn AuxiliaryAngles,
    omega31: &dyn Fn(f64) -> f64,
    t: f64,
    k: usize,
    opts: &LrOptions,
) -> Result<(f64, f64)> {
    let ad = angles.alpha_dot(t);
    let drive = 2.0 * ad - omega31(t);
    if drive.abs() > 1e-9 * (1.0 + 2.0 * ad.abs()) {
        return Err(Error::Singular {
            t,
            reason: format!("beta is pinned at -pi/2 but 2 alpha_dot - Omega31 = {drive:e}"),
        });
    }
    let env = opts.envelope.as_ref().ok_or_else(|| Error::Singular {
        t,
        reason: "beta is pinned at -pi/2; pulse magnitude needs an envelope".into(),
    })?;
    let (sa, ca) = angles.alpha(t).sin_cos();
    let bd = angles.beta_dot(t);
    Ok((env[k] * sa - 2.0 * bd * ca, env[k] * ca + 2.0 * bd * sa))
}

/// Max over the schedule samples of || dI/dt + i [H, I] || (Frobenius), with
/// H taken in the gauge that puts all flux on the 1-3 link.
pub fn invariant_residual(schedule: &PulseSchedule, angles: &dyn AuxiliaryAngles) -> Result<f64> {
    let gauge = gauge_transform(schedule.phases());
    let mut worst: f64 = 0.0;
    for k in 0..schedule.len() {
        let t = schedule.time(k);
        let (a, b, c) = schedule.at(k);
        let h = gauge.apply(&hamiltonian(a, b, c, schedule.phases())?);
        let inv = angles.invariant(t);
        let i_mat = inv.matrix();
        let lhs = inv.time_derivative(angles.alpha_dot(t), angles.beta_dot(t))
            + commutator(&h, &i_mat) * C64::new(0.0, 1.0);
        worst = worst.max(lhs.norm());
    }
    Ok(worst)
}

/// (||[I(0), H(0)]||, ||[I(T), H(T)]||)
pub fn boundary_commutators(schedule: &PulseSchedule, angles: &dyn AuxiliaryAngles) -> Result<(f64, f64)> {
    let gauge = gauge_transform(schedule.phases());
    let at = |k: usize| -> Result<f64> {
        let (a, b, c) = schedule.at(k);
        let h = gauge.apply(&hamiltonian(a, b, c, schedule.phases())?);
        Ok(commutator(&angles.invariant(schedule.time(k)).matrix(), &h).norm())
    };
    Ok((at(0)?, at(schedule.len() - 1)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Transport,
    Superposition,
    SapOnly,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Transport => "transport",
            SchemeKind::Superposition => "superposition",
            SchemeKind::SapOnly => "sap-only",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transport" => Ok(SchemeKind::Transport),
            "superposition" => Ok(SchemeKind::Superposition),
            "sap-only" | "sap" => Ok(SchemeKind::SapOnly),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub duration: f64,
    /// Peak of the Gaussian SAP pulses (unused by the superposition design).
    pub omega0: f64,
    pub samples: usize,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, duration: f64, omega0: f64, samples: usize) -> Result<Self> {
        check_positive("T", duration)?;
        check_samples(samples)?;
        if kind != SchemeKind::Superposition {
            check_positive("omega0", omega0)?;
        }
        Ok(Self { kind, duration, omega0, samples })
    }

    pub fn build(&self) -> Result<DesignedScheme> {
        match self.kind {
            SchemeKind::Transport => transport_scheme_sampled(self.duration, self.omega0, self.samples),
            SchemeKind::Superposition => superposition_scheme_sampled(self.duration, self.samples),
            SchemeKind::SapOnly => sap_only_scheme(self.duration, self.omega0, self.samples),
        }
    }
}

/// Default sample count: one sample per propagation step at the default
/// step T/10^4.
pub const DEFAULT_SAMPLES: usize = 10_001;

/// A designed schedule together with what it was designed from.
pub struct DesignedScheme {
    pub kind: SchemeKind,
    pub schedule: PulseSchedule,
    pub angles: Option<Box<dyn AuxiliaryAngles>>,
    pub initial: ThreeLevelState,
    pub target: ThreeLevelState,
}

impl fmt::Debug for DesignedScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DesignedScheme")
            .field("kind", &self.kind)
            .field("duration", &self.schedule.duration())
            .field("samples", &self.schedule.len())
            .finish()
    }
}

/// Gaussian SAP pair plus Omega31 = 2 d(alpha)/dt, at a quarter flux.
pub fn transport_scheme(duration: f64, omega0: f64) -> Result<DesignedScheme> {
    transport_scheme_sampled(duration, omega0, DEFAULT_SAMPLES)
}

pub fn transport_scheme_sampled(duration: f64, omega0: f64, n: usize) -> Result<DesignedScheme> {
    let (o12, o23) = sap_gaussian_pulses(duration, omega0, n)?;
    let angles = DarkStateAngles::new(duration);
    let o31 = sample_times(duration, n).iter().map(|&t| 2.0 * angles.alpha_dot(t)).collect();
    Ok(DesignedScheme {
        kind: SchemeKind::Transport,
        schedule: PulseSchedule::new(duration, o12, o23, o31, PhaseConfig::quarter_flux())?,
        angles: Some(Box::new(angles)),
        initial: ThreeLevelState::basis(1),
        target: ThreeLevelState::transport_target(),
    })
}

/// Transport with the 1-3 coupling clipped at `cap` (both for the SAP peak
/// and the counter-diabatic pulse).
pub fn capped_transport_scheme(duration: f64, cap: f64, n: usize) -> Result<DesignedScheme> {
    let mut scheme = transport_scheme_sampled(duration, cap, n)?;
    let s = &scheme.schedule;
    let o31 = s.omega31().iter().map(|v| v.min(cap)).collect();
    scheme.schedule = PulseSchedule::new(duration, s.omega12().to_vec(), s.omega23().to_vec(), o31, *s.phases())?;
    Ok(scheme)
}

/// The Gaussian pair alone, no 1-3 coupling.
pub fn sap_only_scheme(duration: f64, omega0: f64, n: usize) -> Result<DesignedScheme> {
    let (o12, o23) = sap_gaussian_pulses(duration, omega0, n)?;
    Ok(DesignedScheme {
        kind: SchemeKind::SapOnly,
        schedule: PulseSchedule::new(duration, o12, o23, vec![0.0; n], PhaseConfig::quarter_flux())?,
        angles: None,
        initial: ThreeLevelState::basis(1),
        target: ThreeLevelState::transport_target(),
    })
}

/// 1-3 coupling of the superposition design: 2 d(alpha)/dt plus a cubic
/// term that keeps the other two couplings finite and non-negative.
pub fn superposition_omega31(duration: f64) -> Polynomial {
    let c = SUPERPOSITION_END_COUPLING;
    Polynomial(vec![0.0, 3.0 * PI / duration, -3.0 * PI / duration, c / duration])
}

/// |1> -> (|1> - i|2> - |3>)/sqrt 3 by inverse engineering.
pub fn superposition_scheme(duration: f64) -> Result<DesignedScheme> {
    superposition_scheme_sampled(duration, DEFAULT_SAMPLES)
}

pub fn superposition_scheme_sampled(duration: f64, n: usize) -> Result<DesignedScheme> {
    check_positive("T", duration)?;
    let angles = PolynomialAngles::superposition(duration);
    let o31_poly = superposition_omega31(duration);
    let o31 = |t: f64| o31_poly.eval(t / duration);
    let (o12, o23) = lr_invert(&angles, &o31, n, &LrOptions::default())?;
    let o31_samples = sample_times(duration, n).iter().map(|&t| o31(t)).collect();
    Ok(DesignedScheme {
        kind: SchemeKind::Superposition,
        schedule: PulseSchedule::new(duration, o12, o23, o31_samples, PhaseConfig::quarter_flux())?,
        angles: Some(Box::new(angles)),
        initial: ThreeLevelState::basis(1),
        target: ThreeLevelState::superposition_target(),
    })
}
