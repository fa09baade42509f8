//! Named scenarios, their flat `key = value` configuration, and the CSV
//! artifacts each one writes.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::continuum::{
    evolve_ring, ground_state_relax, ContinuumTrajectory, EvolveOptions, RelaxOptions, RingGrid,
};
use crate::error::{Error, Result};
use crate::io::{meta, write_meta, Meta};
use crate::mapping::{FrameSeries, MapTable, MapTableConfig, DEFAULT_E0};
use crate::model3l::{evolve, evolve_final, PhaseConfig};
use crate::pulsedesign::{
    capped_transport_scheme, sap_only_scheme, transport_scheme_sampled, DesignedScheme, SchemeKind,
    SchemeSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Transport3l,
    Superposition3l,
    PhaseScan,
    FluxReadout,
    MinTime,
    TransportContinuum,
    SuperpositionContinuum,
    InvertedFlux,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Transport3l,
        Scenario::Superposition3l,
        Scenario::PhaseScan,
        Scenario::FluxReadout,
        Scenario::MinTime,
        Scenario::TransportContinuum,
        Scenario::SuperpositionContinuum,
        Scenario::InvertedFlux,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Transport3l => "transport-3l",
            Scenario::Superposition3l => "superposition-3l",
            Scenario::PhaseScan => "phase-scan",
            Scenario::FluxReadout => "flux-readout",
            Scenario::MinTime => "min-time",
            Scenario::TransportContinuum => "transport-continuum",
            Scenario::SuperpositionContinuum => "superposition-continuum",
            Scenario::InvertedFlux => "inverted-flux",
        }
    }

    pub fn is_continuum(&self) -> bool {
        matches!(
            self,
            Scenario::TransportContinuum | Scenario::SuperpositionContinuum | Scenario::InvertedFlux
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinTimeMethod {
    /// Counter-diabatic transport with every coupling clipped at the cap.
    Shortcut,
    /// Gaussian pair alone with peak equal to the cap.
    Sap,
}

impl MinTimeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MinTimeMethod::Shortcut => "shortcut",
            MinTimeMethod::Sap => "sap",
        }
    }

    /// Search bracket for T in units of tau.
    pub fn bracket(&self) -> (f64, f64) {
        match self {
            MinTimeMethod::Shortcut => (20.0, 300.0),
            MinTimeMethod::Sap => (400.0, 1500.0),
        }
    }

    pub fn scheme(&self, duration: f64, cap: f64, samples: usize) -> Result<DesignedScheme> {
        match self {
            MinTimeMethod::Shortcut => capped_transport_scheme(duration, cap, samples),
            MinTimeMethod::Sap => sap_only_scheme(duration, cap, samples),
        }
    }
}

/// Coarse continuum grid: trap width, grid size and step.
pub const COARSE_GRID: (f64, usize, f64) = (0.02, 1024, 4e-4);
/// Production continuum grid.
pub const PRODUCTION_GRID: (f64, usize, f64) = (0.01, 2048, 1e-4);

/// Configuration keys accepted by [`ScenarioConfig::set`] besides `scenario`.
pub const KEYS: [&str; 19] = [
    "T", "dt", "omega0", "phi", "N", "sigma", "E0", "samples", "coarse", "out", "t_min", "t_max",
    "t_points", "phi_points", "method", "target", "cap", "records", "snapshots",
];

/// Resolved parameters of one scenario run. Every field has a per-scenario
/// default; `coarse` switches the continuum defaults to the CI-scale grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Total time T.
    pub duration: f64,
    /// Propagation step. The scans use it as the step for every T.
    pub dt: f64,
    pub omega0: f64,
    /// Total Peierls phase.
    pub phi: f64,
    pub grid_points: usize,
    pub sigma: f64,
    pub e0: f64,
    /// Pulse samples of the designed schedule (3L and continuum runs).
    pub samples: usize,
    pub coarse: bool,
    pub out: PathBuf,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub phi_points: usize,
    pub methods: Vec<MinTimeMethod>,
    pub target: f64,
    pub cap: f64,
    /// Approximate number of rows in trajectory CSVs.
    pub records: usize,
    /// Density snapshots of continuum runs, evenly spaced in [0, T].
    pub snapshots: usize,
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario, coarse: bool) -> Self {
        use Scenario::*;
        let duration = match scenario {
            Superposition3l | SuperpositionContinuum => 400.0,
            FluxReadout => 48.0,
            PhaseScan => 200.0,
            _ => 100.0,
        };
        let (sigma, grid_points, cdt) = if coarse { COARSE_GRID } else { PRODUCTION_GRID };
        let dt = match scenario {
            PhaseScan => 0.05,
            MinTime => 0.1,
            s if s.is_continuum() => cdt,
            _ => duration / 1e4,
        };
        let samples = match scenario {
            TransportContinuum | InvertedFlux => 2001,
            SuperpositionContinuum => 4001,
            _ => 10_001,
        };
        Self {
            scenario,
            duration,
            dt,
            omega0: if scenario == PhaseScan { 2.0 } else { 0.25 },
            phi: if scenario == InvertedFlux { -FRAC_PI_2 } else { FRAC_PI_2 },
            grid_points,
            sigma,
            e0: DEFAULT_E0,
            samples,
            coarse,
            out: PathBuf::from("out"),
            t_min: 10.0,
            t_max: 200.0,
            t_points: 20,
            phi_points: if scenario == FluxReadout { 64 } else { 20 },
            methods: vec![MinTimeMethod::Shortcut, MinTimeMethod::Sap],
            target: 0.99,
            cap: 0.25,
            records: 1000,
            snapshots: 5,
        }
    }

    /// Defaults for `scenario`, then `overrides` in order (later wins).
    /// The `coarse` switch is read first since it changes the defaults.
    pub fn resolve(scenario: Scenario, overrides: &[(String, String)]) -> Result<Self> {
        let mut coarse = false;
        for (k, v) in overrides {
            if k == "coarse" {
                coarse = parse_bool(k, v)?;
            }
        }
        let mut c = Self::defaults(scenario, coarse);
        for (k, v) in overrides {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = || parse_num::<f64>(key, value);
        let u = || parse_num::<usize>(key, value);
        match key {
            "scenario" => {
                let s: Scenario = value.parse()?;
                if s != self.scenario {
                    return Err(Error::Config(format!(
                        "config names scenario '{s}' but '{}' was requested",
                        self.scenario
                    )));
                }
            }
            "T" => self.duration = f()?,
            "dt" => self.dt = f()?,
            "omega0" => self.omega0 = f()?,
            "phi" => self.phi = f()?,
            "N" => self.grid_points = u()?,
            "sigma" => self.sigma = f()?,
            "E0" => self.e0 = f()?,
            "samples" => self.samples = u()?,
            "coarse" => self.coarse = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "t_min" => self.t_min = f()?,
            "t_max" => self.t_max = f()?,
            "t_points" => self.t_points = u()?,
            "phi_points" => self.phi_points = u()?,
            "method" => {
                self.methods = match value {
                    "shortcut" => vec![MinTimeMethod::Shortcut],
                    "sap" => vec![MinTimeMethod::Sap],
                    "both" => vec![MinTimeMethod::Shortcut, MinTimeMethod::Sap],
                    other => return Err(Error::Config(format!("unknown method '{other}'"))),
                }
            }
            "target" => self.target = f()?,
            "cap" => self.cap = f()?,
            "records" => self.records = u()?,
            "snapshots" => self.snapshots = u()?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (known: scenario, {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("T", self.duration),
            ("dt", self.dt),
            ("sigma", self.sigma),
            ("t_min", self.t_min),
            ("cap", self.cap),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{k} must be positive and finite, got {v}")));
            }
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::Config(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !self.phi.is_finite() || !self.e0.is_finite() {
            return Err(Error::Config("phi and E0 must be finite".into()));
        }
        if !(self.t_max > self.t_min) || self.t_points < 2 || self.phi_points < 1 {
            return Err(Error::Config("scan needs t_max > t_min, t_points >= 2, phi_points >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.target) {
            return Err(Error::Config(format!("target must lie in [0, 1], got {}", self.target)));
        }
        if self.samples < 2 || self.records < 1 {
            return Err(Error::Config("samples must be >= 2 and records >= 1".into()));
        }
        if self.dt > self.duration && !matches!(self.scenario, Scenario::PhaseScan | Scenario::MinTime) {
            return Err(Error::Config(format!("dt = {} exceeds T = {}", self.dt, self.duration)));
        }
        Ok(())
    }

    /// Every parameter as `key=value`, for the provenance header.
    pub fn entries(&self) -> Meta {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let method = if methods.len() == 2 { "both".to_string() } else { methods.join(",") };
        let mut m = meta(&[("scenario", self.scenario.name().to_string())]);
        m.extend(meta(&[
            ("T", self.duration.to_string()),
            ("dt", self.dt.to_string()),
            ("omega0", self.omega0.to_string()),
            ("phi", self.phi.to_string()),
            ("N", self.grid_points.to_string()),
            ("sigma", self.sigma.to_string()),
            ("E0", self.e0.to_string()),
            ("samples", self.samples.to_string()),
            ("coarse", self.coarse.to_string()),
            ("out", self.out.display().to_string()),
            ("t_min", self.t_min.to_string()),
            ("t_max", self.t_max.to_string()),
            ("t_points", self.t_points.to_string()),
            ("phi_points", self.phi_points.to_string()),
            ("method", method),
            ("target", self.target.to_string()),
            ("cap", self.cap.to_string()),
            ("records", self.records.to_string()),
            ("snapshots", self.snapshots.to_string()),
        ]));
        m
    }

    fn provenance(&self, content: &str) -> Meta {
        let mut m = meta(&[("generator", concat!("ringpass ", env!("CARGO_PKG_VERSION"))), ("content", content)]);
        m.extend(self.entries());
        m
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("'{key}' expects true or false, got '{value}'"))),
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Exit status for a failed run: 2 for configuration and file problems, 3
/// for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config() || matches!(err, Error::Io(_)) {
        2
    } else {
        3
    }
}

/// `scenario,final_P3_or_F,runtime_seconds`
pub fn summary_line(scenario: Scenario, value: f64, seconds: f64) -> String {
    format!("{},{value:.6},{seconds:.3}", scenario.name())
}

/// What a scenario produced.
#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    /// Final P3 or fidelity, whichever the scenario is about.
    pub value: f64,
    pub files: Vec<PathBuf>,
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(path)
}

pub fn run_scenario(c: &ScenarioConfig) -> Result<ScenarioReport> {
    match c.scenario {
        Scenario::Transport3l => run_three_level(c, SchemeKind::Transport),
        Scenario::Superposition3l => run_three_level(c, SchemeKind::Superposition),
        Scenario::PhaseScan => run_phase_scan(c),
        Scenario::FluxReadout => run_flux_readout(c),
        Scenario::MinTime => run_min_time(c),
        Scenario::TransportContinuum | Scenario::InvertedFlux => run_continuum(c, SchemeKind::Transport),
        Scenario::SuperpositionContinuum => run_continuum(c, SchemeKind::Superposition),
    }
}

fn run_three_level(c: &ScenarioConfig, kind: SchemeKind) -> Result<ScenarioReport> {
    let scheme = SchemeSpec::new(kind, c.duration, c.omega0, c.samples)?.build()?;
    let schedule = scheme.schedule.with_phases(PhaseConfig::gauge_fixed(c.phi));
    let traj = evolve(&schedule, &scheme.initial, c.dt)?.with_target(scheme.target);
    let name = c.scenario.name();
    let stride = (traj.states.len() / c.records).max(1);
    let files = vec![
        write_file(&c.out, &format!("{name}_pulses.csv"), |w| {
            Ok(schedule.write_csv(w, &c.provenance("pulses"))?)
        })?,
        write_file(&c.out, &format!("{name}_trajectory.csv"), |w| {
            Ok(traj.write_csv(w, &c.provenance("trajectory"), stride)?)
        })?,
    ];
    let value = traj.final_fidelity().unwrap_or(f64::NAN);
    Ok(ScenarioReport { scenario: c.scenario, value, files })
}

fn scan_samples(duration: f64, dt: f64) -> usize {
    ((duration / dt).ceil() as usize).max(1) + 1
}

/// Final transport populations for one (T, phi) point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub duration: f64,
    pub phi: f64,
    pub populations: [f64; 3],
}

/// Uniform phases phi_k = 2 pi k / count, k = 0..count.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| TAU * k as f64 / count as f64).collect()
}

pub fn duration_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| t_min + (t_max - t_min) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Transport populations over T x phi, computed in parallel and returned
/// ordered by (T, phi).
pub fn phase_scan(durations: &[f64], phis: &[f64], omega0: f64, dt: f64) -> Result<Vec<ScanPoint>> {
    let schemes = durations
        .par_iter()
        .map(|&t| transport_scheme_sampled(t, omega0, scan_samples(t, dt)).map(|s| (t, s)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..schemes.len())
        .flat_map(|i| phis.iter().map(move |&p| (i, p)))
        .collect();
    jobs.par_iter()
        .map(|&(i, phi)| {
            let (t, s) = &schemes[i];
            let schedule = s.schedule.clone().with_phases(PhaseConfig::gauge_fixed(phi));
            let psi = evolve_final(&schedule, &s.initial, dt)?;
            Ok(ScanPoint { duration: *t, phi, populations: psi.populations() })
        })
        .collect()
}

fn write_scan<W: Write>(w: &mut W, m: &Meta, points: &[ScanPoint], with_t: bool) -> Result<()> {
    write_meta(w, m)?;
    writeln!(w, "{}phi,P1,P2,P3", if with_t { "T," } else { "" })?;
    for p in points {
        if with_t {
            write!(w, "{:.15e},", p.duration)?;
        }
        let [a, b, c] = p.populations;
        writeln!(w, "{:.15e},{a:.15e},{b:.15e},{c:.15e}", p.phi)?;
    }
    Ok(())
}

// P3 at the phase closest to a quarter flux.
fn quarter_flux_p3<'a>(points: impl Iterator<Item = &'a ScanPoint>) -> f64 {
    let pts: Vec<&ScanPoint> = points.collect();
    let best = pts
        .iter()
        .map(|p| (p.phi - FRAC_PI_2).abs())
        .fold(f64::INFINITY, f64::min);
    pts.iter()
        .filter(|p| (p.phi - FRAC_PI_2).abs() <= best + 1e-12)
        .map(|p| p.populations[2])
        .fold(f64::INFINITY, f64::min)
}

fn run_phase_scan(c: &ScenarioConfig) -> Result<ScenarioReport> {
    let points = phase_scan(
        &duration_grid(c.t_min, c.t_max, c.t_points),
        &phase_grid(c.phi_points),
        c.omega0,
        c.dt,
    )?;
    let file = write_file(&c.out, "phase-scan.csv", |w| write_scan(w, &c.provenance("phase-scan"), &points, true))?;
    Ok(ScenarioReport { scenario: c.scenario, value: quarter_flux_p3(points.iter()), files: vec![file] })
}

/// Final transport populations at fixed T against the total phase.
pub fn flux_readout(duration: f64, omega0: f64, dt: f64, phis: &[f64]) -> Result<Vec<ScanPoint>> {
    phase_scan(&[duration], phis, omega0, dt)
}

fn run_flux_readout(c: &ScenarioConfig) -> Result<ScenarioReport> {
    let points = flux_readout(c.duration, c.omega0, c.dt, &phase_grid(c.phi_points))?;
    let file = write_file(&c.out, "flux-readout.csv", |w| write_scan(w, &c.provenance("flux-readout"), &points, false))?;
    Ok(ScenarioReport { scenario: c.scenario, value: quarter_flux_p3(points.iter()), files: vec![file] })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinTimeResult {
    pub method: MinTimeMethod,
    pub t_min: f64,
    /// P3 reached at `t_min`.
    pub p3: f64,
    /// The monotonicity scan, (T, P3).
    pub scan: Vec<(f64, f64)>,
}

const MIN_TIME_SCAN_POINTS: usize = 12;

/// Smallest T in `bracket` with P3(T) >= `target` under the amplitude cap,
/// to within one time unit. P3 is first sampled across the bracket; it must
/// stay above the target once it gets there, otherwise a bracket error
/// carrying the scan is returned.
pub fn min_time_search(
    method: MinTimeMethod,
    target: f64,
    cap: f64,
    bracket: (f64, f64),
    dt: f64,
) -> Result<MinTimeResult> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("invalid bracket [{lo}, {hi}]")));
    }
    let p3 = |t: f64| -> Result<f64> {
        let s = method.scheme(t, cap, scan_samples(t, dt))?;
        Ok(evolve_final(&s.schedule, &s.initial, dt)?.populations()[2])
    };
    let ts = duration_grid(lo, hi, MIN_TIME_SCAN_POINTS);
    let scan = ts
        .par_iter()
        .map(|&t| p3(t).map(|p| (t, p)))
        .collect::<Result<Vec<_>>>()?;
    if scan[0].1 >= target {
        return Ok(MinTimeResult { method, t_min: lo, p3: scan[0].1, scan });
    }
    let show = || scan.iter().map(|(t, p)| format!("{t:.1}:{p:.4}")).collect::<Vec<_>>().join(" ");
    let first = scan.iter().position(|&(_, p)| p >= target).ok_or_else(|| {
        Error::Bracket(format!("{} never reaches P3 = {target} in [{lo}, {hi}]: {}", method.name(), show()))
    })?;
    if scan[first..].iter().any(|&(_, p)| p < target) {
        return Err(Error::Bracket(format!(
            "{} fidelity is not monotone in [{lo}, {hi}]: {}",
            method.name(),
            show()
        )));
    }
    let (mut a, mut b, mut pb) = (scan[first - 1].0, scan[first].0, scan[first].1);
    while b - a > 1.0 {
        let m = 0.5 * (a + b);
        let pm = p3(m)?;
        if pm >= target {
            b = m;
            pb = pm;
        } else {
            a = m;
        }
    }
    Ok(MinTimeResult { method, t_min: b, p3: pb, scan })
}

fn run_min_time(c: &ScenarioConfig) -> Result<ScenarioReport> {
    let results = c
        .methods
        .iter()
        .map(|&m| min_time_search(m, c.target, c.cap, m.bracket(), c.dt))
        .collect::<Result<Vec<_>>>()?;
    let files = vec![
        write_file(&c.out, "min-time.csv", |w| {
            write_meta(w, &c.provenance("min-time"))?;
            writeln!(w, "method,T_min,P3")?;
            for r in &results {
                writeln!(w, "{},{:.6},{:.15e}", r.method.name(), r.t_min, r.p3)?;
            }
            Ok(())
        })?,
        write_file(&c.out, "min-time_scan.csv", |w| {
            write_meta(w, &c.provenance("min-time scan"))?;
            writeln!(w, "method,T,P3")?;
            for r in &results {
                for (t, p) in &r.scan {
                    writeln!(w, "{},{t:.6},{p:.15e}", r.method.name())?;
                }
            }
            Ok(())
        })?,
    ];
    Ok(ScenarioReport { scenario: c.scenario, value: results[0].p3, files })
}

/// Everything a continuum run produced.
pub struct ContinuumOutcome {
    pub scheme: DesignedScheme,
    pub table: MapTable,
    pub frames: FrameSeries,
    pub trajectory: ContinuumTrajectory,
    /// Energy of the relaxed initial state.
    pub initial_energy: f64,
}

impl ContinuumOutcome {
    pub fn final_populations(&self) -> [f64; 3] {
        self.trajectory.final_record().populations.map_or([f64::NAN; 3], |p| p.p)
    }

    pub fn final_fidelity(&self) -> f64 {
        self.trajectory.final_record().fidelity.unwrap_or(f64::NAN)
    }
}

/// Designs the 3L schedule (at a quarter flux), maps it onto barriers and
/// depths, relaxes trap 1 and propagates on the ring threaded by `c.phi`.
pub fn continuum_run(c: &ScenarioConfig, kind: SchemeKind) -> Result<ContinuumOutcome> {
    let scheme = SchemeSpec::new(kind, c.duration, c.omega0, c.samples)?.build()?;
    let table = MapTable::build(MapTableConfig::new(c.e0, Some(c.sigma)))?;
    let frames = table.invert_schedule(&scheme.schedule)?;
    let grid = RingGrid::new(c.grid_points, c.phi)?;
    let (psi0, initial_energy) = ground_state_relax(&frames.frames[0], &grid, 0, &RelaxOptions::default())?;
    let mut opts = EvolveOptions::new(c.dt);
    let steps = (c.duration / c.dt).ceil() as usize;
    opts.record_every = (steps / c.records).max(1);
    opts.target = Some(scheme.target);
    opts.density_times = snapshot_times(c);
    let trajectory = evolve_ring(&psi0, &frames, &grid, &opts)?;
    Ok(ContinuumOutcome { scheme, table, frames, trajectory, initial_energy })
}

fn snapshot_times(c: &ScenarioConfig) -> Vec<f64> {
    match c.snapshots {
        0 => Vec::new(),
        1 => vec![c.duration],
        n => (0..n).map(|k| c.duration * k as f64 / (n - 1) as f64).collect(),
    }
}

fn run_continuum(c: &ScenarioConfig, kind: SchemeKind) -> Result<ScenarioReport> {
    let out = continuum_run(c, kind)?;
    let name = c.scenario.name();
    let mut files = vec![
        write_file(&c.out, &format!("{name}_pulses.csv"), |w| {
            Ok(out.scheme.schedule.write_csv(w, &c.provenance("pulses"))?)
        })?,
        write_file(&c.out, &format!("{name}_maptable.csv"), |w| {
            out.table.write_csv(w, &c.provenance("map table"))
        })?,
        write_file(&c.out, &format!("{name}_frames.csv"), |w| {
            out.frames.write_csv(w, &c.provenance("potential frames"))
        })?,
        write_file(&c.out, &format!("{name}_trajectory.csv"), |w| {
            let mut m = c.provenance("trajectory");
            m.push(("initial_energy".into(), out.initial_energy.to_string()));
            out.trajectory.write_csv(w, &m)
        })?,
    ];
    for (k, (t, _)) in out.trajectory.densities.iter().enumerate() {
        files.push(write_file(&c.out, &format!("{name}_density_{k:02}.csv"), |w| {
            out.trajectory.write_density(w, &c.provenance("density"), *t)
        })?);
    }
    let value = match c.scenario {
        Scenario::InvertedFlux => out.final_populations()[2],
        _ => out.final_fidelity(),
    };
    Ok(ScenarioReport { scenario: c.scenario, value, files })
}
