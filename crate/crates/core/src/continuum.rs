//! One-dimensional ring of circumference 3l with three Gaussian-smoothed
//! delta traps separated by barriers, threaded by a constant vector
//! potential. Fields are propagated with a split-step spectral scheme.
//!
//! Trap j (0-based) sits at x = (j + 1/2) l. The barrier V12 fills the arc
//! between traps 1 and 2, V23 the next one, and V31 the arc through x = 0.
//! Each barrier step is smoothed with the same width as the trap Gaussian on
//! it, so the potential is band-limited and the spectral grid converges fast.
//! With hbar = m = q = 1 the kinetic term is (k - qA)^2 / 2 with
//! qA = -Phi / (3l), which gives every link the Peierls phase +Phi/3 in the
//! convention of the three-level Hamiltonian.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::io::{write_meta, Meta};
use crate::mapping::{delta_bound_state, gaussian, resonant_depth, smoothed_step, DeltaTrapSolution, FrameSeries};
use crate::model3l::{gauge_transform, step_count, PhaseConfig, ThreeLevelState};

/// Distance between neighbouring traps.
pub const SITE_SPACING: f64 = 1.0;
/// Ring circumference.
pub const RING_LENGTH: f64 = 3.0 * SITE_SPACING;
/// Smallest ratio sigma / dx accepted by [`build_potential`].
pub const MIN_POINTS_PER_SIGMA: f64 = 5.0;
// Gaussians are cut off beyond this many widths.
const GAUSSIAN_CUTOFF: f64 = 12.0;

/// Trap position x_j for 0-based j.
pub fn trap_position(j: usize) -> f64 {
    (j as f64 + 0.5) * SITE_SPACING
}

/// Uniform periodic grid on the ring plus the enclosed flux.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingGrid {
    n: usize,
    dx: f64,
    flux: f64,
}

impl RingGrid {
    pub fn new(n: usize, flux: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size must be a power of two >= 16, got {n}")));
        }
        if !flux.is_finite() {
            return Err(Error::Config("flux must be finite".into()));
        }
        Ok(Self { n, dx: RING_LENGTH / n as f64, flux })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn with_flux(&self, flux: f64) -> Self {
        Self { flux, ..*self }
    }

    /// qA = -Phi / (3l).
    pub fn q_a(&self) -> f64 {
        -self.flux / RING_LENGTH
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Periodic wavenumber of FFT bin m.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let m = if m < self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        2.0 * std::f64::consts::PI * m / RING_LENGTH
    }

    /// x - x0 folded into [-L/2, L/2).
    pub fn displacement(x: f64, x0: f64) -> f64 {
        let half = 0.5 * RING_LENGTH;
        (x - x0 + half).rem_euclid(RING_LENGTH) - half
    }

    // index ranges of the three barrier arcs, [V12, V23, V31-right, V31-left]
    fn segment_bounds(&self) -> [usize; 3] {
        [0, 1, 2].map(|j| (trap_position(j) / self.dx).ceil() as usize)
    }
}

/// Snapshot of the ring potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialFrame {
    /// (V12, V23, V31)
    pub barriers: [f64; 3],
    /// (eps1, eps2, eps3)
    pub depths: [f64; 3],
    pub sigma: f64,
    /// Common on-site energy the depths were tuned to, if any. The localized
    /// basis then uses the delta states at this energy, whose decay rates
    /// match those of the smoothed traps.
    pub e0: Option<f64>,
}

impl PotentialFrame {
    pub fn new(barriers: [f64; 3], depths: [f64; 3], sigma: f64, e0: Option<f64>) -> Self {
        Self { barriers, depths, sigma, e0 }
    }

    /// Barriers to the left and right of trap j.
    pub fn neighbours(&self, j: usize) -> (f64, f64) {
        let [v12, v23, v31] = self.barriers;
        [(v31, v12), (v12, v23), (v23, v31)][j]
    }

    pub fn delta_states(&self) -> Result<[DeltaTrapSolution; 3]> {
        let mk = |j: usize| {
            let (vl, vr) = self.neighbours(j);
            let eps = match self.e0 {
                Some(e0) => resonant_depth(vl, vr, e0),
                None => self.depths[j],
            };
            delta_bound_state(eps, vl, vr)
        };
        Ok([mk(0)?, mk(1)?, mk(2)?])
    }

    pub fn lerp(&self, other: &Self, w: f64) -> Self {
        let mix = |a: [f64; 3], b: [f64; 3]| [0, 1, 2].map(|c| a[c] + w * (b[c] - a[c]));
        Self {
            barriers: mix(self.barriers, other.barriers),
            depths: mix(self.depths, other.depths),
            ..*self
        }
    }

    /// Same frame with trap `keep` only.
    pub fn isolating(&self, keep: usize) -> Self {
        let mut depths = [0.0; 3];
        depths[keep] = self.depths[keep];
        Self { depths, ..*self }
    }

    // upper bound on max |V|
    fn max_abs(&self) -> f64 {
        let vb = self.barriers.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let d = self.depths.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        vb + d * gaussian(0.0, self.sigma)
    }
}

fn check_resolution(sigma: f64, grid: &RingGrid) -> Result<()> {
    if !(sigma * GAUSSIAN_CUTOFF < 0.5 * SITE_SPACING) {
        return Err(Error::Config(format!("trap width {sigma} is too wide for the ring")));
    }
    if !(sigma >= MIN_POINTS_PER_SIGMA * grid.dx() * (1.0 - 1e-12)) {
        return Err(Error::Config(format!(
            "trap width {sigma} is below {MIN_POINTS_PER_SIGMA} grid spacings ({})",
            grid.dx()
        )));
    }
    Ok(())
}

// Per-trap samples inside the cutoff window: grid index, Gaussian, smoothed
// step fraction, d / sigma^2 and whether the point lies on the right arc.
#[derive(Clone, Copy, Debug)]
struct WindowPoint {
    idx: usize,
    g: f64,
    step: f64,
    slope: f64,
    right: bool,
}

#[derive(Clone, Debug)]
struct TrapWindows {
    windows: [Vec<WindowPoint>; 3],
}

impl TrapWindows {
    fn new(sigma: f64, grid: &RingGrid) -> Self {
        let reach = (GAUSSIAN_CUTOFF * sigma / grid.dx()).ceil() as isize;
        let bounds = grid.segment_bounds();
        let windows = [0, 1, 2].map(|j| {
            let xj = trap_position(j);
            let centre = (xj / grid.dx()).round() as isize;
            (centre - reach..=centre + reach)
                .map(|i| {
                    let idx = i.rem_euclid(grid.len() as isize) as usize;
                    let d = RingGrid::displacement(grid.x(idx), xj);
                    WindowPoint {
                        idx,
                        g: gaussian(d, sigma),
                        step: smoothed_step(d, 0.0, 1.0, sigma),
                        slope: d / (sigma * sigma),
                        right: idx >= bounds[j],
                    }
                })
                .collect()
        });
        Self { windows }
    }

    // Offsets to the arc-constant potential inside the windows: the smoothed
    // step minus the arc value, minus the well, plus w |V'|^2.
    fn for_each_offset(&self, frame: &PotentialFrame, w: f64, mut f: impl FnMut(usize, f64)) {
        for (j, win) in self.windows.iter().enumerate() {
            let (vl, vr) = frame.neighbours(j);
            let eps = frame.depths[j];
            for p in win {
                let arc = if p.right { vr } else { vl };
                let grad = p.g * (eps * p.slope + (vr - vl));
                f(p.idx, vl + (vr - vl) * p.step - arc - eps * p.g + w * grad * grad);
            }
        }
    }
}

fn arc_potential(frame: &PotentialFrame, grid: &RingGrid) -> Vec<f64> {
    let [v12, v23, v31] = frame.barriers;
    let [b1, b2, b3] = grid.segment_bounds();
    (0..grid.len())
        .map(|i| match i {
            i if i < b1 => v31,
            i if i < b2 => v12,
            i if i < b3 => v23,
            _ => v31,
        })
        .collect()
}

// V + w |V'|^2 sampled on the grid.
fn modified_potential(frame: &PotentialFrame, grid: &RingGrid, w: f64) -> Result<Vec<f64>> {
    check_resolution(frame.sigma, grid)?;
    let mut v = arc_potential(frame, grid);
    TrapWindows::new(frame.sigma, grid).for_each_offset(frame, w, |i, dv| v[i] += dv);
    Ok(v)
}

/// Sampled potential of a frame.
pub fn build_potential(frame: &PotentialFrame, grid: &RingGrid) -> Result<Vec<f64>> {
    modified_potential(frame, grid, 0.0)
}

/// Operator splitting used by [`evolve_ring`] and [`ground_state_relax`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Splitting {
    /// Half kick, kinetic step, half kick. Second order.
    Strang,
    /// Symmetric five-stage force-gradient scheme: kicks of h/6, 2h/3 and
    /// h/6 around two kinetic half steps, the middle kick using
    /// V - h^2 |V'|^2 / 48. Fourth order, and far more accurate than Strang
    /// for narrow deep wells.
    #[default]
    ForceGradient,
}

/// Complex samples on the ring, normalized so that sum |psi|^2 dx = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumField {
    pub psi: Vec<C64>,
    pub dx: f64,
}

impl ContinuumField {
    pub fn new(psi: Vec<C64>, dx: f64) -> Self {
        Self { psi, dx }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Degenerate("cannot normalize a zero field".into()));
        }
        let s = 1.0 / n.sqrt();
        self.psi.iter_mut().for_each(|c| *c *= s);
        Ok(())
    }

    /// <self|other>
    pub fn inner(&self, other: &Self) -> C64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum::<C64>() * self.dx
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Linear combination sum_j c_j fields_j, normalized.
    pub fn combination(fields: &[ContinuumField; 3], coeffs: [C64; 3]) -> Result<Self> {
        let n = fields[0].psi.len();
        let psi = (0..n).map(|i| (0..3).map(|j| coeffs[j] * fields[j].psi[i]).sum()).collect();
        let mut f = Self::new(psi, fields[0].dx);
        f.normalize()?;
        Ok(f)
    }
}

/// Analytic bound state of trap j (0-based), dressed with the local gauge
/// phase exp(i qA (x - x_j)) and renormalized on the grid.
pub fn localized_state(j: usize, frame: &PotentialFrame, grid: &RingGrid) -> Result<ContinuumField> {
    if j > 2 {
        return Err(Error::Domain(format!("trap index {j} out of range")));
    }
    let s = frame.delta_states()?[j];
    let xj = trap_position(j);
    let qa = grid.q_a();
    let psi = (0..grid.len())
        .map(|i| {
            let d = RingGrid::displacement(grid.x(i), xj);
            C64::from_polar(s.psi(d), qa * d)
        })
        .collect();
    let mut f = ContinuumField::new(psi, grid.dx());
    f.normalize()?;
    Ok(f)
}

pub fn localized_basis(frame: &PotentialFrame, grid: &RingGrid) -> Result<[ContinuumField; 3]> {
    Ok([
        localized_state(0, frame, grid)?,
        localized_state(1, frame, grid)?,
        localized_state(2, frame, grid)?,
    ])
}

/// Populations |<i|psi>|^2 and the weight 1 - sum P_i outside the basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapPopulations {
    pub p: [f64; 3],
    pub residual: f64,
}

pub fn trap_populations(psi: &ContinuumField, basis: &[ContinuumField; 3]) -> TrapPopulations {
    let p = [0, 1, 2].map(|j| basis[j].inner(psi).norm_sqr());
    TrapPopulations { p, residual: 1.0 - p.iter().sum::<f64>() }
}

/// Three-level amplitudes in the gauge-fixed frame (all flux on the 1-3
/// link) converted to the symmetric gauge of the dressed trap states.
pub fn symmetric_gauge_amplitudes(state: &ThreeLevelState, flux: f64) -> [C64; 3] {
    let third = flux / 3.0;
    let u = gauge_transform(&PhaseConfig::new(third, third, third));
    let s = state.evolved(u.unitary());
    [s.amplitude(1), s.amplitude(2), s.amplitude(3)]
}

// FFT plans and kinetic factors shared by real- and imaginary-time steps.
struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    kinetic: Vec<f64>,
}

impl Spectral {
    fn new(grid: &RingGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.len());
        let inv = planner.plan_fft_inverse(grid.len());
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let qa = grid.q_a();
        let kinetic = (0..grid.len()).map(|m| 0.5 * (grid.wavenumber(m) - qa).powi(2)).collect();
        Self { fwd, inv, scratch: vec![C64::new(0.0, 0.0); len], kinetic }
    }

    // psi <- IFFT[ factor(k) * FFT psi ], factors already include 1/N
    fn apply(&mut self, psi: &mut [C64], factor: &[C64]) {
        self.fwd.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(factor).for_each(|(c, f)| *c *= f);
        self.inv.process_with_scratch(psi, &mut self.scratch);
    }

    fn kinetic_energy(&mut self, psi: &[C64], dx: f64) -> f64 {
        let mut buf = psi.to_vec();
        self.fwd.process_with_scratch(&mut buf, &mut self.scratch);
        let n = psi.len() as f64;
        buf.iter().zip(&self.kinetic).map(|(c, k)| c.norm_sqr() * k).sum::<f64>() * dx / n
    }
}

/// <psi|H|psi> for a normalized field in a static frame.
pub fn energy(psi: &ContinuumField, frame: &PotentialFrame, grid: &RingGrid) -> Result<f64> {
    let v = build_potential(frame, grid)?;
    let mut sp = Spectral::new(grid);
    let pot: f64 = psi.psi.iter().zip(&v).map(|(c, v)| c.norm_sqr() * v).sum::<f64>() * grid.dx();
    Ok(sp.kinetic_energy(&psi.psi, grid.dx()) + pot)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxOptions {
    pub dtau: f64,
    pub max_steps: usize,
    /// Stop once the energy changes by less than this per step.
    pub tol: f64,
    pub splitting: Splitting,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { dtau: 1e-4, max_steps: 200_000, tol: 1e-12, splitting: Splitting::ForceGradient }
    }
}

/// Ground state of trap j alone (the other two traps removed, barriers
/// kept) by imaginary-time propagation from the analytic trap state.
/// Returns the state and its energy.
pub fn ground_state_relax(
    frame: &PotentialFrame,
    grid: &RingGrid,
    j: usize,
    opts: &RelaxOptions,
) -> Result<(ContinuumField, f64)> {
    let iso = frame.isolating(j);
    let v = build_potential(&iso, grid)?;
    let mut field = localized_state(j, frame, grid)?;
    let mut sp = Spectral::new(grid);
    let n = grid.len() as f64;
    let tau = opts.dtau;
    let kin_factor = |h: f64| -> Vec<C64> { sp.kinetic.iter().map(|k| C64::from((-h * k).exp() / n)).collect() };
    let pot_factor = |v: &[f64], h: f64| -> Vec<f64> { v.iter().map(|v| (-h * v).exp()).collect() };
    // imaginary time flips the sign of the gradient correction
    let (outer, kin, inner) = match opts.splitting {
        Splitting::Strang => (pot_factor(&v, 0.5 * tau), kin_factor(tau), None),
        Splitting::ForceGradient => {
            let vt = modified_potential(&iso, grid, tau * tau / 48.0)?;
            (pot_factor(&v, tau / 6.0), kin_factor(0.5 * tau), Some(pot_factor(&vt, 2.0 * tau / 3.0)))
        }
    };
    let scale = |psi: &mut [C64], f: &[f64]| psi.iter_mut().zip(f).for_each(|(c, h)| *c *= h);
    let energy_of = |sp: &mut Spectral, f: &ContinuumField| {
        let pot: f64 = f.psi.iter().zip(&v).map(|(c, v)| c.norm_sqr() * v).sum::<f64>() * f.dx;
        sp.kinetic_energy(&f.psi, f.dx) + pot
    };
    let mut e_prev = energy_of(&mut sp, &field);
    for step in 0..opts.max_steps {
        scale(&mut field.psi, &outer);
        sp.apply(&mut field.psi, &kin);
        if let Some(inner) = &inner {
            scale(&mut field.psi, inner);
            sp.apply(&mut field.psi, &kin);
        }
        scale(&mut field.psi, &outer);
        field.normalize()?;
        // the energy is only needed to test convergence
        if step % 10 == 9 {
            let e = energy_of(&mut sp, &field);
            if (e - e_prev).abs() < 10.0 * opts.tol {
                return Ok((field, e));
            }
            e_prev = e;
        }
    }
    Err(Error::NonConvergence(format!(
        "imaginary-time relaxation of trap {} did not settle in {} steps",
        j + 1,
        opts.max_steps
    )))
}

/// How to run [`evolve_ring`].
#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Record populations every this many steps (the last step is always
    /// recorded).
    pub record_every: usize,
    /// Target for the fidelity column, in the gauge-fixed three-level frame.
    pub target: Option<ThreeLevelState>,
    /// Times at which to keep |psi|^2; each is taken at the first step
    /// boundary at or after it.
    pub density_times: Vec<f64>,
    pub splitting: Splitting,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self { dt, record_every: 100, target: None, density_times: Vec::new(), splitting: Splitting::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ContinuumRecord {
    pub t: f64,
    /// Absent when the frame has no bound trap states to project on.
    pub populations: Option<TrapPopulations>,
    pub fidelity: Option<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct ContinuumTrajectory {
    pub records: Vec<ContinuumRecord>,
    pub densities: Vec<(f64, Vec<f64>)>,
    pub final_field: ContinuumField,
    pub dx: f64,
}

impl ContinuumTrajectory {
    pub fn final_record(&self) -> &ContinuumRecord {
        self.records.last().expect("initial record present")
    }

    pub fn max_norm_error(&self) -> f64 {
        self.records.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max)
    }

    /// CSV `t,P1,P2,P3,residual,F,norm` (F empty without a target).
    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &Meta) -> Result<()> {
        write_meta(w, meta)?;
        writeln!(w, "t,P1,P2,P3,residual,F,norm")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.12e}"));
        for r in &self.records {
            let p = |j: usize| opt(r.populations.map(|p| p.p[j]));
            let res = opt(r.populations.map(|p| p.residual));
            writeln!(w, "{:.12e},{},{},{},{res},{},{:.12e}", r.t, p(0), p(1), p(2), opt(r.fidelity), r.norm)?;
        }
        Ok(())
    }

    /// CSV `x,|psi|^2` for the density taken closest to `t`.
    pub fn write_density<W: Write>(&self, w: &mut W, meta: &Meta, t: f64) -> Result<()> {
        let (td, rho) = self
            .densities
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .ok_or_else(|| Error::Config("no density snapshots were requested".into()))?;
        let mut m = meta.clone();
        m.push(("t".into(), format!("{td}")));
        write_meta(w, &m)?;
        writeln!(w, "x,|psi|^2")?;
        for (i, r) in rho.iter().enumerate() {
            writeln!(w, "{:.12e},{r:.12e}", i as f64 * self.dx)?;
        }
        Ok(())
    }
}

// Frame schedule sampled at arbitrary times by linear interpolation.
fn frame_at(frames: &FrameSeries, t: f64) -> PotentialFrame {
    let ts = &frames.times;
    let n = ts.len();
    if n == 1 || t <= ts[0] {
        return frames.frames[0];
    }
    if t >= ts[n - 1] {
        return frames.frames[n - 1];
    }
    let k = ts.partition_point(|&s| s <= t) - 1;
    let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    frames.frames[k].lerp(&frames.frames[k + 1], w)
}

// exp(-i h (V + w |V'|^2)) applied in place for the frame's potential: the
// barrier part is constant on each arc, the rest only matters inside the
// trap windows.
struct PotentialKick {
    bounds: [usize; 3],
    windows: TrapWindows,
}

impl PotentialKick {
    fn apply(&self, psi: &mut [C64], frame: &PotentialFrame, h: f64, w: f64) {
        let [v12, v23, v31] = frame.barriers;
        let [b1, b2, b3] = self.bounds;
        let n = psi.len();
        for (range, v) in [(0..b1, v31), (b1..b2, v12), (b2..b3, v23), (b3..n, v31)] {
            let ph = C64::from_polar(1.0, -h * v);
            psi[range].iter_mut().for_each(|c| *c *= ph);
        }
        self.windows.for_each_offset(frame, w, |i, dv| psi[i] *= C64::from_polar(1.0, -h * dv));
    }
}

/// Propagates `psi0` through the frame schedule. Each step is a symmetric
/// sequence of position-space kicks and momentum-space kinetic factors (see
/// [`Splitting`]), with the potential evaluated at the step midpoint.
pub fn evolve_ring(
    psi0: &ContinuumField,
    frames: &FrameSeries,
    grid: &RingGrid,
    opts: &EvolveOptions,
) -> Result<ContinuumTrajectory> {
    let sigma = frames.frames.first().ok_or_else(|| Error::Domain("empty frame schedule".into()))?.sigma;
    check_resolution(sigma, grid)?;
    if psi0.psi.len() != grid.len() {
        return Err(Error::Domain("initial field does not match the grid".into()));
    }
    let duration = frames.duration();
    let steps = step_count(duration, opts.dt)?;
    let h = duration / steps as f64;
    for k in 0..steps {
        let f = frame_at(frames, (k as f64 + 0.5) * h);
        if h * f.max_abs() > std::f64::consts::PI {
            return Err(Error::StepSize(format!(
                "dt * max|V| = {} exceeds pi at t = {}; reduce dt",
                h * f.max_abs(),
                (k as f64 + 0.5) * h
            )));
        }
    }

    let kick = PotentialKick { bounds: grid.segment_bounds(), windows: TrapWindows::new(sigma, grid) };
    let mut sp = Spectral::new(grid);
    let n = grid.len() as f64;
    // (outer kick fraction, kinetic fraction, inner kick fraction and weight)
    let (outer, kin_frac, inner) = match opts.splitting {
        Splitting::Strang => (0.5, 1.0, None),
        Splitting::ForceGradient => (1.0 / 6.0, 0.5, Some((2.0 / 3.0, -h * h / 48.0))),
    };
    let kin: Vec<C64> = sp.kinetic.iter().map(|k| C64::from_polar(1.0 / n, -kin_frac * h * k)).collect();
    let target = opts.target.map(|t| symmetric_gauge_amplitudes(&t, grid.flux()));
    let record_every = opts.record_every.max(1);
    let mut dumps: Vec<usize> = opts
        .density_times
        .iter()
        .map(|&t| ((t / h) - 1e-9).ceil().clamp(0.0, steps as f64) as usize)
        .collect();
    dumps.sort_unstable();
    dumps.dedup();

    let mut psi = psi0.clone();
    let mut records = Vec::new();
    let mut densities = Vec::new();
    let record = |k: usize, psi: &ContinuumField, densities: &mut Vec<(f64, Vec<f64>)>| -> Result<ContinuumRecord> {
        let t = if k == steps { duration } else { k as f64 * h };
        let frame = frame_at(frames, t);
        let basis = localized_basis(&frame, grid).ok();
        let fidelity = match (target, &basis) {
            (Some(c), Some(b)) => Some(ContinuumField::combination(b, c)?.inner(psi).norm_sqr()),
            _ => None,
        };
        if dumps.binary_search(&k).is_ok() {
            densities.push((t, psi.density()));
        }
        let populations = basis.as_ref().map(|b| trap_populations(psi, b));
        Ok(ContinuumRecord { t, populations, fidelity, norm: psi.norm_sqr() })
    };
    records.push(record(0, &psi, &mut densities)?);

    let mid = |k: usize| frame_at(frames, (k as f64 + 0.5) * h);
    let mut open = true;
    for k in 0..steps {
        let fk = mid(k);
        if open {
            kick.apply(&mut psi.psi, &fk, outer * h, 0.0);
        }
        sp.apply(&mut psi.psi, &kin);
        if let Some((frac, w)) = inner {
            kick.apply(&mut psi.psi, &fk, frac * h, w);
            sp.apply(&mut psi.psi, &kin);
        }
        let done = k + 1;
        let must_record = done == steps || done % record_every == 0 || dumps.binary_search(&done).is_ok();
        if must_record {
            kick.apply(&mut psi.psi, &fk, outer * h, 0.0);
            records.push(record(done, &psi, &mut densities)?);
            open = true;
        } else {
            // the closing outer kick of this step and the opening one of the
            // next merge into a single kick with the averaged frame
            let merged = fk.lerp(&mid(k + 1), 0.5);
            kick.apply(&mut psi.psi, &merged, 2.0 * outer * h, 0.0);
            open = false;
        }
    }
    Ok(ContinuumTrajectory { records, densities, final_field: psi, dx: grid.dx() })
}
