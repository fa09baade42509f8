//! Bridge between the three-level couplings and the continuum potential.
//!
//! Each trap is modelled as a delta well sitting on a step between its two
//! neighbouring barriers. Its single bound state decays as exp(-kappa |y|)
//! on either side, and the tunnelling amplitude between neighbours follows
//! from the overlap of the two tails inside the shared barrier. Keeping all
//! three on-site energies at a common E0 fixes every decay rate through
//! kappa = sqrt(2 (V - E0)), so the coupling depends on the barriers alone.

use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::continuum::PotentialFrame;
use crate::error::{Error, Result};
use crate::io::{write_meta, Meta};
use crate::model3l::PulseSchedule;

/// Bound state of -eps delta(y) on a step V_L (y < 0) / V_R (y >= 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaTrapSolution {
    pub eps: f64,
    pub v_left: f64,
    pub v_right: f64,
    pub kappa_left: f64,
    pub kappa_right: f64,
    pub amplitude: f64,
    pub energy: f64,
}

/// Closed-form energy, without the existence check.
pub fn delta_energy(eps: f64, v_left: f64, v_right: f64) -> f64 {
    let dv = v_right - v_left;
    let e2 = eps * eps;
    -(4.0 * e2 * e2 + dv * dv - 4.0 * e2 * (v_left + v_right)) / (8.0 * e2)
}

pub fn delta_bound_state(eps: f64, v_left: f64, v_right: f64) -> Result<DeltaTrapSolution> {
    if !(eps.is_finite() && v_left.is_finite() && v_right.is_finite()) {
        return Err(Error::Domain("trap parameters must be finite".into()));
    }
    let dv = v_left - v_right;
    if !(eps > 0.0 && 2.0 * eps * eps > dv.abs()) {
        return Err(Error::NoBoundState { eps, v_left, v_right });
    }
    let e2 = eps * eps;
    Ok(DeltaTrapSolution {
        eps,
        v_left,
        v_right,
        kappa_left: (2.0 * e2 + dv) / (2.0 * eps),
        kappa_right: (2.0 * e2 - dv) / (2.0 * eps),
        amplitude: (4.0 * e2 * e2 - dv * dv).sqrt() / (2.0 * eps.powf(1.5)),
        energy: delta_energy(eps, v_left, v_right),
    })
}

impl DeltaTrapSolution {
    /// Wavefunction at offset y from the trap.
    pub fn psi(&self, y: f64) -> f64 {
        let k = if y < 0.0 { self.kappa_left } else { self.kappa_right };
        self.amplitude * (-k * y.abs()).exp()
    }

    pub fn psi_prime(&self, y: f64) -> f64 {
        if y < 0.0 {
            self.kappa_left * self.psi(y)
        } else {
            -self.kappa_right * self.psi(y)
        }
    }

    /// psi'(0+) - psi'(0-), which the delta fixes to -2 eps psi(0).
    pub fn derivative_jump(&self) -> f64 {
        -(self.kappa_left + self.kappa_right) * self.amplitude
    }

    /// Integral of psi^2 over the whole line.
    pub fn norm_sqr(&self) -> f64 {
        let a2 = self.amplitude * self.amplitude;
        a2 / (2.0 * self.kappa_left) + a2 / (2.0 * self.kappa_right)
    }
}

/// Which of the two traps plays the role of the ket in the overlap
/// integral -2 <bra| -d^2/2 + V |ket>.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ket {
    Left,
    Right,
}

// integral over [0, l] of exp(-a y - b (l - y))
fn tail_product_integral(a: f64, b: f64, l: f64) -> f64 {
    let d = a - b;
    if (d * l).abs() < 1e-8 {
        l * (-0.5 * (a + b) * l).exp() * (1.0 + d * d * l * l / 24.0)
    } else {
        -(-b * l).exp() * (-d * l).exp_m1() / d
    }
}

/// Tunnelling amplitude between a trap and its right-hand neighbour at
/// distance `separation`, from the overlap of their tails in the barrier
/// between them.
pub fn coupling_overlap(
    left: &DeltaTrapSolution,
    right: &DeltaTrapSolution,
    v_between: f64,
    separation: f64,
    ket: Ket,
) -> Result<f64> {
    if !(separation > 0.0) {
        return Err(Error::Domain(format!("traps must be separated, got {separation}")));
    }
    let (a, b) = (left.kappa_right, right.kappa_left);
    let kappa_ket = match ket {
        Ket::Left => a,
        Ket::Right => b,
    };
    let overlap = left.amplitude * right.amplitude * tail_product_integral(a, b, separation);
    Ok(-2.0 * (v_between - 0.5 * kappa_ket * kappa_ket) * overlap)
}

/// On-site energy from the two region integrals of psi (-d^2/2 + V) psi,
/// each taken from the trap out to its neighbour, divided by the weight of
/// psi^2 in the same regions. The delta and the kink it imposes cancel.
pub fn onsite_energy(trap: &DeltaTrapSolution, separation: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in [(trap.kappa_left, trap.v_left), (trap.kappa_right, trap.v_right)] {
        let w = trap.amplitude.powi(2) * -(-2.0 * k * separation).exp_m1() / (2.0 * k);
        num += (v - 0.5 * k * k) * w;
        den += w;
    }
    num / den
}

/// Depth that puts the delta bound state at energy `e0`, by bisection.
pub fn tune_depth(v_left: f64, v_right: f64, e0: f64) -> Result<f64> {
    if !(e0 < v_left.min(v_right)) {
        return Err(Error::Tuning(format!(
            "E0 = {e0} must lie below both barriers ({v_left}, {v_right})"
        )));
    }
    let g = |eps: f64| delta_energy(eps, v_left, v_right) - e0;
    let mut lo = (0.5 * (v_left - v_right).abs()).sqrt();
    let mut hi = lo.max(1.0);
    let mut doublings = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Tuning(format!("no depth reaches E0 = {e0}")));
        }
    }
    bisect(&mut lo, &mut hi, |e| g(e) > 0.0);
    Ok(0.5 * (lo + hi))
}

/// Closed-form resonant depth: the mean of the two decay rates at E0.
pub fn resonant_depth(v_left: f64, v_right: f64, e0: f64) -> f64 {
    0.5 * (decay_rate(v_left, e0) + decay_rate(v_right, e0))
}

pub fn decay_rate(v: f64, e0: f64) -> f64 {
    (2.0 * (v - e0)).sqrt()
}

// Shrink [lo, hi] around the sign change of `above` until the floating
// point midpoint stops moving. `above(lo)` is true, `above(hi)` false.
fn bisect(lo: &mut f64, hi: &mut f64, above: impl Fn(f64) -> bool) {
    for _ in 0..200 {
        let mid = 0.5 * (*lo + *hi);
        if mid <= *lo || mid >= *hi {
            break;
        }
        if above(mid) {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
}

/// Unit-area Gaussian.
pub fn gaussian(y: f64, sigma: f64) -> f64 {
    (-0.5 * (y / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Barrier step from `v_left` to `v_right` smoothed by the trap Gaussian,
/// i.e. the step convolved with a normal profile of width `sigma`.
pub fn smoothed_step(y: f64, v_left: f64, v_right: f64, sigma: f64) -> f64 {
    v_left + (v_right - v_left) * 0.5 * libm::erfc(-y / (sigma * std::f64::consts::SQRT_2))
}

const SHOOT_HALF_WIDTH: f64 = 8.0;
const SHOOT_STEPS: usize = 400;

// Unit-width Gaussian and smoothed unit step at the RK4 nodes (every half
// step) of the scaled coordinate u = y / sigma on [-8, 8].
fn shoot_profile() -> &'static (Vec<f64>, Vec<f64>) {
    static PROFILE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    PROFILE.get_or_init(|| {
        let du = SHOOT_HALF_WIDTH / SHOOT_STEPS as f64;
        (0..=2 * SHOOT_STEPS)
            .map(|i| {
                let u = -SHOOT_HALF_WIDTH + i as f64 * du;
                (gaussian(u, 1.0), smoothed_step(u, 0.0, 1.0, 1.0))
            })
            .unzip()
    })
}

// Coefficient (up to a positive factor) of the growing exponential on the
// right of the smoothed step + Gaussian well at energy e, starting from the
// decaying left solution at -8 sigma. It changes sign at each bound state.
fn shoot(eps: f64, v_left: f64, v_right: f64, sigma: f64, e: f64) -> f64 {
    let (g, step) = shoot_profile();
    let h = 2.0 * SHOOT_HALF_WIDTH * sigma / SHOOT_STEPS as f64;
    let q = |i: usize| 2.0 * (v_left + (v_right - v_left) * step[i] - e - eps * g[i] / sigma);
    let mut psi = 1.0;
    let mut dpsi = decay_rate(v_left, e);
    for k in 0..SHOOT_STEPS {
        let (q0, qm, q1) = (q(2 * k), q(2 * k + 1), q(2 * k + 2));
        let (k1a, k1b) = (dpsi, q0 * psi);
        let (k2a, k2b) = (dpsi + 0.5 * h * k1b, qm * (psi + 0.5 * h * k1a));
        let (k3a, k3b) = (dpsi + 0.5 * h * k2b, qm * (psi + 0.5 * h * k2a));
        let (k4a, k4b) = (dpsi + h * k3b, q1 * (psi + h * k3a));
        psi += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        dpsi += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    dpsi + decay_rate(v_right, e) * psi
}

// Root of f on a bracket with f(lo), f(hi) of opposite sign, by regula falsi
// with the Illinois correction.
fn illinois(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    let mut side = 0;
    for _ in 0..200 {
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo.min(hi) && x < lo.max(hi)) || (hi - lo).abs() <= 1e-14 * x.abs() {
            return x.clamp(lo.min(hi), lo.max(hi));
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (fhi > 0.0) {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}

/// Depth of a unit-area Gaussian trap of width `sigma` on the smoothed step
/// (v_left, v_right) whose bound state sits at `e0`. Found by shooting; the
/// exterior decay rates are those of the delta trap at the same energy.
pub fn tune_depth_smoothed(v_left: f64, v_right: f64, e0: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("trap width must be positive, got {sigma}")));
    }
    let eps_delta = tune_depth(v_left, v_right, e0)?;
    let mismatch = |eps: f64| shoot(eps, v_left, v_right, sigma, e0);
    // small growth steps: a much deeper well would already hold a node
    let mut lo = 0.9 * eps_delta;
    let mut hi = 1.05 * lo;
    if mismatch(lo) < 0.0 {
        return Err(Error::Tuning("Gaussian trap binds deeper than its delta limit".into()));
    }
    let mut tries = 0;
    while mismatch(hi) >= 0.0 {
        lo = hi;
        hi *= 1.05;
        tries += 1;
        if tries > 60 {
            return Err(Error::Tuning(format!(
                "no Gaussian depth of width {sigma} reaches E0 = {e0}"
            )));
        }
    }
    Ok(illinois(mismatch, lo, hi))
}

/// Bound-state energy of the smoothed trap, by shooting in energy.
pub fn smoothed_bound_energy(eps: f64, v_left: f64, v_right: f64, sigma: f64) -> Result<f64> {
    let floor = v_left.min(v_right);
    let mismatch = |e: f64| shoot(eps, v_left, v_right, sigma, e);
    let delta = delta_bound_state(eps, v_left, v_right)?.energy;
    // the mismatch falls as the energy rises; go down until it is positive
    let mut lo = delta;
    let mut step = 1.0 + eps * eps;
    while mismatch(lo) <= 0.0 {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() {
            return Err(Error::NonConvergence("energy shooting diverged".into()));
        }
    }
    let hi = floor;
    if mismatch(hi) >= 0.0 {
        return Err(Error::NoBoundState { eps, v_left, v_right });
    }
    Ok(illinois(mismatch, lo, hi))
}

/// Harmonic-mean factor 2ab/(a+b), the squared amplitude of a delta state
/// tuned to resonance with decay rates a and b.
fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Coupling of two resonant traps across a barrier with decay rate `kappa`,
/// given the squared amplitudes of the two states.
fn resonant_coupling(e0: f64, separation: f64, kappa: f64, a2_left: f64, a2_right: f64) -> f64 {
    -2.0 * e0 * separation * (-kappa * separation).exp() * (a2_left * a2_right).sqrt()
}

/// Piecewise cubic Hermite interpolant that preserves monotonicity of the
/// data (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Table("interpolant needs at least two matching nodes".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("interpolation nodes must be strictly increasing".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        d[0] = s[0];
        d[n - 1] = s[n - 2];
        for k in 1..n - 1 {
            d[k] = if s[k - 1] * s[k] <= 0.0 {
                0.0
            } else {
                let (w1, w2) = (2.0 * h[k] + h[k - 1], h[k] + 2.0 * h[k - 1]);
                (w1 + w2) / (w1 / s[k - 1] + w2 / s[k])
            };
        }
        Ok(Self { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value at `t`, clamped to the end nodes outside the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.y[k]
            + (u3 - 2.0 * u2 + u) * h * self.d[k]
            + (-2.0 * u3 + 3.0 * u2) * self.y[k + 1]
            + (u3 - u2) * h * self.d[k + 1]
    }
}

/// Settings for a [`MapTable`].
/// Reference on-site energy for the continuum runs. One site apart, the
/// overlap coupling -2 E0 l A^2 exp(-kappa l) agrees with the two-trap
/// splitting 2 kappa A^2 exp(-kappa l) when kappa = -E0; at E0 = -5 that
/// happens where the designed couplings peak (about 0.25).
pub const DEFAULT_E0: f64 = -5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct MapTableConfig {
    pub e0: f64,
    /// Distance between neighbouring traps.
    pub separation: f64,
    /// Decay-rate range of the tabulated barriers.
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub points: usize,
    /// Width of the Gaussian traps the depths are tuned for; `None` tunes
    /// ideal delta traps.
    pub sigma: Option<f64>,
}

impl MapTableConfig {
    /// Barrier range from just above the coupling maximum (kappa l = 1) to
    /// kappa l = 20, where couplings are below 1e-6 for |E0| < 10.
    pub fn new(e0: f64, sigma: Option<f64>) -> Self {
        Self { e0, separation: 1.0, kappa_min: 1.05, kappa_max: 20.0, points: 200, sigma }
    }

    pub fn barrier_range(&self) -> (f64, f64) {
        let v = |k: f64| self.e0 + 0.5 * k * k;
        (v(self.kappa_min), v(self.kappa_max))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapRow {
    pub v: f64,
    pub eps: [f64; 3],
    pub omega: f64,
}

/// Couplings of the symmetric ring (all barriers at V) with every trap
/// tuned to E0, for barrier heights spaced logarithmically in V - E0.
#[derive(Clone, Debug)]
pub struct MapTable {
    config: MapTableConfig,
    rows: Vec<MapRow>,
    v_of_log_omega: MonotoneCubic,
    log_omega_of_v: MonotoneCubic,
}

impl MapTable {
    pub fn build(config: MapTableConfig) -> Result<Self> {
        let c = &config;
        if !(c.e0.is_finite() && c.separation > 0.0 && c.points >= 2) {
            return Err(Error::Table("bad table configuration".into()));
        }
        if !(c.kappa_min * c.separation > 1.0 && c.kappa_max > c.kappa_min) {
            return Err(Error::Table(format!(
                "decay range [{}, {}] must lie above 1/l, where couplings stop growing with the barrier",
                c.kappa_min, c.kappa_max
            )));
        }
        let (h_lo, h_hi) = (0.5 * c.kappa_min.powi(2), 0.5 * c.kappa_max.powi(2));
        let heights: Vec<f64> = (0..c.points)
            .map(|k| h_lo * (h_hi / h_lo).powf(k as f64 / (c.points - 1) as f64))
            .collect();
        let rows = heights
            .par_iter()
            .map(|&h| -> Result<MapRow> {
                let v = c.e0 + h;
                let eps = match c.sigma {
                    Some(s) => tune_depth_smoothed(v, v, c.e0, s)?,
                    None => tune_depth(v, v, c.e0)?,
                };
                // couplings always come from the delta states at E0
                let trap = delta_bound_state(resonant_depth(v, v, c.e0), v, v)?;
                let omega = coupling_overlap(&trap, &trap, v, c.separation, Ket::Right)?;
                Ok(MapRow { v, eps: [eps; 3], omega })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(config, rows)
    }

    fn from_rows(config: MapTableConfig, rows: Vec<MapRow>) -> Result<Self> {
        if let Some(w) = rows.windows(2).find(|w| !(w[1].omega < w[0].omega) || w[1].omega <= 0.0) {
            return Err(Error::Table(format!(
                "coupling not strictly decreasing between V = {} and V = {}",
                w[0].v, w[1].v
            )));
        }
        let vs: Vec<f64> = rows.iter().map(|r| r.v).collect();
        let lo: Vec<f64> = rows.iter().map(|r| r.omega.ln()).collect();
        let log_omega_of_v = MonotoneCubic::new(vs.clone(), lo.clone())?;
        let v_of_log_omega =
            MonotoneCubic::new(lo.into_iter().rev().collect(), vs.into_iter().rev().collect())?;
        Ok(Self { config, rows, v_of_log_omega, log_omega_of_v })
    }

    pub fn config(&self) -> &MapTableConfig {
        &self.config
    }

    pub fn e0(&self) -> f64 {
        self.config.e0
    }

    pub fn rows(&self) -> &[MapRow] {
        &self.rows
    }

    /// (smallest, largest) tabulated coupling.
    pub fn omega_range(&self) -> (f64, f64) {
        (self.rows[self.rows.len() - 1].omega, self.rows[0].omega)
    }

    pub fn v_range(&self) -> (f64, f64) {
        (self.rows[0].v, self.rows[self.rows.len() - 1].v)
    }

    /// Interpolated coupling of the symmetric ring at barrier height v.
    pub fn omega_at(&self, v: f64) -> f64 {
        if let Ok(k) = self.rows.binary_search_by(|r| r.v.total_cmp(&v)) {
            return self.rows[k].omega;
        }
        self.log_omega_of_v.eval(v).exp()
    }

    /// Interpolated barrier height giving coupling omega (clamped to the
    /// table's range).
    pub fn barrier_for(&self, omega: f64) -> f64 {
        self.v_of_log_omega.eval(omega.ln())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &Meta) -> Result<()> {
        let c = &self.config;
        let mut m = meta.clone();
        m.push(("E0".into(), format!("{}", c.e0)));
        m.push(("separation".into(), format!("{}", c.separation)));
        m.push(("kappa_min".into(), format!("{}", c.kappa_min)));
        m.push(("kappa_max".into(), format!("{}", c.kappa_max)));
        m.push(("points".into(), c.points.to_string()));
        m.push(("sigma".into(), c.sigma.map_or("delta".into(), |s| format!("{s}"))));
        write_meta(w, &m)?;
        writeln!(w, "V,eps1,eps2,eps3,omega,E0")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                r.v, r.eps[0], r.eps[1], r.eps[2], r.omega, c.e0
            )?;
        }
        Ok(())
    }

    /// Read a table written by [`MapTable::write_csv`].
    pub fn read_csv(text: &str) -> Result<Self> {
        let meta = crate::io::read_meta(text);
        let get = |k: &str| -> Result<&str> {
            meta.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Table(format!("missing header key {k}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Table(format!("bad value for {k}")))
        };
        let sigma = match get("sigma")? {
            "delta" => None,
            s => Some(s.parse().map_err(|_| Error::Table("bad sigma".into()))?),
        };
        let config = MapTableConfig {
            e0: num("E0")?,
            separation: num("separation")?,
            kappa_min: num("kappa_min")?,
            kappa_max: num("kappa_max")?,
            points: num("points")? as usize,
            sigma,
        };
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('V')) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Table(format!("bad row '{line}': {e}")))?;
            if f.len() != 6 {
                return Err(Error::Table(format!("expected 6 columns in '{line}'")));
            }
            rows.push(MapRow { v: f[0], eps: [f[1], f[2], f[3]], omega: f[4] });
        }
        Self::from_rows(config, rows)
    }

    /// Couplings (Omega12, Omega23, Omega31) of a resonant frame with the
    /// given barriers (V12, V23, V31).
    pub fn couplings(&self, barriers: [f64; 3]) -> [f64; 3] {
        let (e0, l) = (self.config.e0, self.config.separation);
        let k = barriers.map(|v| decay_rate(v, e0));
        // trap 1 sits between barriers 31 and 12, trap 2 between 12 and 23,
        // trap 3 between 23 and 31
        let a2 = [harmonic(k[2], k[0]), harmonic(k[0], k[1]), harmonic(k[1], k[2])];
        [
            resonant_coupling(e0, l, k[0], a2[0], a2[1]),
            resonant_coupling(e0, l, k[1], a2[1], a2[2]),
            resonant_coupling(e0, l, k[2], a2[2], a2[0]),
        ]
    }

    /// Trap depths for a frame with the given barriers.
    pub fn depths(&self, barriers: [f64; 3]) -> Result<[f64; 3]> {
        let e0 = self.config.e0;
        let [v12, v23, v31] = barriers;
        let pairs = [(v31, v12), (v12, v23), (v23, v31)];
        let mut eps = [0.0; 3];
        for (e, (vl, vr)) in eps.iter_mut().zip(pairs) {
            *e = match self.config.sigma {
                Some(s) => tune_depth_smoothed(vl, vr, e0, s)?,
                None => tune_depth(vl, vr, e0)?,
            };
        }
        Ok(eps)
    }

    /// Barriers (V12, V23, V31) reproducing the requested couplings at
    /// time t. Couplings below the table are pinned to the highest barrier.
    pub fn solve_barriers(&self, t: f64, omega: [f64; 3]) -> Result<[f64; 3]> {
        const NAMES: [&str; 3] = ["omega12", "omega23", "omega31"];
        let (w_min, w_max) = self.omega_range();
        let (_, v_max) = self.v_range();
        let mut free = [true; 3];
        let mut v = [v_max; 3];
        for c in 0..3 {
            let w = omega[c];
            if !w.is_finite() || w > w_max {
                return Err(Error::OutOfRange { t, coupling: NAMES[c], omega: w, min: w_min, max: w_max });
            }
            if w < w_min {
                free[c] = false;
            } else {
                v[c] = self.barrier_for(w);
            }
        }
        if !free.iter().any(|&f| f) {
            return Ok(v);
        }
        // The table assumes equal neighbours; the amplitudes of the two
        // traps involved depend on the third barrier too. Newton on the
        // decay rates removes that mismatch.
        let (e0, l) = (self.config.e0, self.config.separation);
        let mut k = v.map(|x| decay_rate(x, e0));
        let target = omega.map(|w| w.max(w_min).ln());
        for _ in 0..50 {
            let a2 = [harmonic(k[2], k[0]), harmonic(k[0], k[1]), harmonic(k[1], k[2])];
            let traps = [(0, 1), (1, 2), (2, 0)];
            // d ln H(a, b) / d a
            let dh = |a: f64, b: f64| b / (a * (a + b));
            let mut resid = [0.0; 3];
            let mut jac = [[0.0; 3]; 3];
            for c in 0..3 {
                let (i, j) = traps[c];
                resid[c] = (-2.0 * e0 * l).ln() - k[c] * l + 0.5 * (a2[i].ln() + a2[j].ln()) - target[c];
                jac[c][c] -= l;
                // trap i touches barriers (i+2)%3 and i; trap j touches j-1 and j
                for (b1, b2) in [((i + 2) % 3, i), ((j + 2) % 3, j)] {
                    jac[c][b1] += 0.5 * dh(k[b1], k[b2]);
                    jac[c][b2] += 0.5 * dh(k[b2], k[b1]);
                }
            }
            let idx: Vec<usize> = (0..3).filter(|&c| free[c]).collect();
            if idx.iter().all(|&c| resid[c].abs() < 1e-13) {
                break;
            }
            let sub: Vec<Vec<f64>> =
                idx.iter().map(|&r| idx.iter().map(|&c| jac[r][c]).collect()).collect();
            let rhs: Vec<f64> = idx.iter().map(|&c| -resid[c]).collect();
            let step = solve_small(&sub, &rhs)
                .ok_or_else(|| Error::NonConvergence(format!("singular barrier Jacobian at t = {t}")))?;
            for (n, &c) in idx.iter().enumerate() {
                k[c] = (k[c] + step[n]).clamp(self.config.kappa_min, self.config.kappa_max);
            }
        }
        for c in 0..3 {
            if free[c] {
                v[c] = e0 + 0.5 * k[c] * k[c];
            }
        }
        let got = self.couplings(v);
        for c in 0..3 {
            if free[c] && ((got[c] - omega[c]) / omega[c]).abs() > 1e-8 {
                return Err(Error::NonConvergence(format!(
                    "barrier solve missed {} at t = {t}: wanted {}, got {}",
                    NAMES[c], omega[c], got[c]
                )));
            }
        }
        Ok(v)
    }

    /// One potential frame per schedule sample.
    pub fn invert_schedule(&self, schedule: &PulseSchedule) -> Result<FrameSeries> {
        let sigma = self.config.sigma.unwrap_or(0.0);
        let frames = (0..schedule.len())
            .into_par_iter()
            .map(|k| -> Result<PotentialFrame> {
                let (a, b, c) = schedule.at(k);
                let t = schedule.time(k);
                let barriers = self.solve_barriers(t, [a, b, c])?;
                let depths = self.depths(barriers)?;
                Ok(PotentialFrame::new(barriers, depths, sigma, Some(self.config.e0)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameSeries { times: schedule.times(), frames })
    }
}

// Gaussian elimination with partial pivoting for n <= 3.
fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Potential frames on a time grid.
#[derive(Clone, Debug)]
pub struct FrameSeries {
    pub times: Vec<f64>,
    pub frames: Vec<PotentialFrame>,
}

impl FrameSeries {
    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, meta: &Meta) -> Result<()> {
        write_meta(w, meta)?;
        writeln!(w, "t,V12,V23,V31,eps1,eps2,eps3")?;
        for (t, f) in self.times.iter().zip(&self.frames) {
            let [a, b, c] = f.barriers;
            let [d, e, g] = f.depths;
            writeln!(w, "{t:.12e},{a:.12e},{b:.12e},{c:.12e},{d:.12e},{e:.12e},{g:.12e}")?;
        }
        Ok(())
    }
}

/// Max |E_i - E_j| over trap pairs of a frame, with delta states.
pub fn resonance_spread(frame: &PotentialFrame) -> Result<f64> {
    let e = frame.delta_states()?.map(|s| s.energy);
    Ok((e[0] - e[1]).abs().max((e[1] - e[2]).abs()).max((e[2] - e[0]).abs()))
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}
