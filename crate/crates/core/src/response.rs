//! Transition rates of static and circular-geodesic detectors.
//!
//! Rates are returned in canonical units (values of `R F'`). Static curves use the
//! grid coordinate `E/T_loc`; circular curves use `E` itself.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CircularKinematics, Geometry};
use crate::radial::{Method, ModeCache, PhysicalMode, SolverSettings};

/// Frequencies closer to zero than this are treated as the integrable endpoint.
pub const OMEGA_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trajectory {
    Static,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vacuum {
    HartleHawking,
    Boulware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub trajectory: Trajectory,
    pub radius: f64,
    pub vacuum: Vacuum,
    /// Largest `l` summed.
    pub l_max: u32,
    /// Stop early once the tail criterion holds.
    pub adaptive: bool,
    pub tail_tolerance: f64,
}

impl DetectorSpec {
    pub fn new(trajectory: Trajectory, radius: f64, vacuum: Vacuum, l_max: u32) -> Self {
        DetectorSpec {
            trajectory,
            radius,
            vacuum,
            l_max,
            adaptive: false,
            tail_tolerance: 1e-4,
        }
    }

    pub fn adaptive(mut self, tail_tolerance: f64) -> Self {
        self.adaptive = true;
        self.tail_tolerance = tail_tolerance;
        self
    }

    pub fn validate(&self, g: &Geometry) -> Result<()> {
        if !(self.radius > g.r_plus()) || !self.radius.is_finite() {
            return Err(Error::domain(format!(
                "detector radius {} must lie outside r_+ = {}",
                self.radius,
                g.r_plus()
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::Configuration("tail tolerance must be positive".into()));
        }
        if self.trajectory == Trajectory::Circular {
            g.circular_kinematics(self.radius)?;
        }
        Ok(())
    }
}

/// Source of physical modes for the rate formulas.
pub trait ModeProvider: Sync {
    fn mode(&self, g: &Geometry, omega: f64, l: u32) -> Result<Arc<PhysicalMode>>;

    fn radial(&self, g: &Geometry, omega: f64, l: u32, r: f64) -> Result<f64> {
        self.mode(g, omega, l)?.radial(r).map_err(|e| e.in_mode(l, omega))
    }
}

/// In-memory memoising provider.
#[derive(Debug, Clone, Default)]
pub struct ModeSource {
    pub method: Method,
    pub settings: SolverSettings,
    pub cache: Arc<ModeCache>,
}

impl ModeSource {
    pub fn new(method: Method, settings: SolverSettings) -> Self {
        ModeSource {
            method,
            settings,
            cache: Arc::new(ModeCache::new()),
        }
    }
}

impl ModeProvider for ModeSource {
    fn mode(&self, g: &Geometry, omega: f64, l: u32) -> Result<Arc<PhysicalMode>> {
        self.cache.get_or_solve(g, omega, l, self.method, &self.settings)
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `P_l^m(0)` with the Condon-Shortley phase.
pub fn legendre_at_zero(l: u32, m: i32) -> Result<f64> {
    let am = m.unsigned_abs();
    if am > l {
        return Err(Error::domain(format!("|m| = {am} exceeds l = {l}")));
    }
    if (l + am) % 2 == 1 {
        return Ok(0.0);
    }
    let p = (l + am) / 2;
    let q = (l - am) / 2;
    // (2p-1)!!/(2q)!! = (2p)! / (2^p p! 2^q q!)
    let ln_abs = ln_factorial(2 * p) - ln_factorial(p) - ln_factorial(q) - ((p + q) as f64) * 2f64.ln();
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let positive = sign * ln_abs.exp();
    if m >= 0 {
        Ok(positive)
    } else {
        let ratio = (ln_factorial(l - am) - ln_factorial(l + am)).exp();
        let parity = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(parity * ratio * positive)
    }
}

/// `(l-m)!/(l+m)! |P_l^m(0)|^2`, computed as `c_p c_q` with
/// `c_k = binom(2k, k)/4^k`, `p = (l+m)/2`, `q = (l-m)/2`; zero for odd `l+m`.
pub fn orbit_weight(l: u32, m: i32) -> f64 {
    let am = m.unsigned_abs();
    if am > l || (l + am) % 2 == 1 {
        return 0.0;
    }
    let central = |k: u32| (1..=k).fold(1.0, |c, j| c * (2 * j - 1) as f64 / (2 * j) as f64);
    central((l + am) / 2) * central((l - am) / 2)
}

fn static_mode_frequency(g: &Geometry, spec: &DetectorSpec, energy: f64) -> Result<(f64, f64)> {
    spec.validate(g)?;
    if spec.trajectory != Trajectory::Static {
        return Err(Error::Configuration("static rate requested for a circular detector".into()));
    }
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::domain(format!("static rate needs a finite nonzero gap, got {energy}")));
    }
    let t_loc = g.local_temperature(spec.radius)?;
    let ratio = energy / t_loc;
    // omega~ = sqrt(f) |E| = T_H |E/T_loc|
    Ok((ratio, g.hawking_temperature() * ratio.abs()))
}

fn static_terms<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    omega: f64,
    prefactor: f64,
    source: &P,
) -> Result<Vec<f64>> {
    (0..=spec.l_max)
        .map(|l| {
            let rr = source.radial(g, omega, l, spec.radius)?;
            Ok(prefactor * (2 * l + 1) as f64 / (4.0 * PI) * rr * rr)
        })
        .collect()
}

fn static_prefactor(vacuum: Vacuum, energy: f64, ratio: f64) -> f64 {
    match vacuum {
        Vacuum::HartleHawking => 1.0 / (2.0 * energy * ratio.exp_m1()),
        Vacuum::Boulware => {
            if energy < 0.0 {
                1.0 / (2.0 * energy.abs())
            } else {
                0.0
            }
        }
    }
}

/// Per-`l` static Hartle-Hawking rate at gap `energy`.
pub fn static_rate_hh<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    energy: f64,
    source: &P,
) -> Result<Vec<f64>> {
    let (ratio, omega) = static_mode_frequency(g, spec, energy)?;
    static_terms(g, spec, omega, static_prefactor(Vacuum::HartleHawking, energy, ratio), source)
}

/// Per-`l` static Boulware rate at gap `energy`.
pub fn static_rate_boulware<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    energy: f64,
    source: &P,
) -> Result<Vec<f64>> {
    let (ratio, omega) = static_mode_frequency(g, spec, energy)?;
    if energy > 0.0 {
        return Ok(vec![0.0; spec.l_max as usize + 1]);
    }
    static_terms(g, spec, omega, static_prefactor(Vacuum::Boulware, energy, ratio), source)
}

/// Per-`(l, m)` circular contributions, indexed `[l][m + l]`.
pub type CircularTerms = Vec<Vec<f64>>;

fn circular_setup(g: &Geometry, spec: &DetectorSpec, energy: f64) -> Result<CircularKinematics> {
    spec.validate(g)?;
    if spec.trajectory != Trajectory::Circular {
        return Err(Error::Configuration("circular rate requested for a static detector".into()));
    }
    if !energy.is_finite() {
        return Err(Error::domain("energy must be finite"));
    }
    g.circular_kinematics(spec.radius)
}

/// `omega_-` and `omega_+` for the given `m`.
pub fn circular_frequencies(k: &CircularKinematics, m: i32, energy: f64) -> (f64, f64) {
    let mb = m as f64 * k.b;
    ((mb - energy) / k.a, (mb + energy) / k.a)
}

fn circular_terms<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    energy: f64,
    vacuum: Vacuum,
    l_range: std::ops::RangeInclusive<u32>,
    source: &P,
) -> Result<CircularTerms> {
    let k = circular_setup(g, spec, energy)?;
    let th = g.hawking_temperature();
    let mut out = Vec::new();
    for l in l_range {
        let mut row = vec![0.0; 2 * l as usize + 1];
        for m in -(l as i32)..=(l as i32) {
            let weight = orbit_weight(l, m);
            if weight == 0.0 {
                continue;
            }
            let (wm, wp) = circular_frequencies(&k, m, energy);
            let mut total = 0.0;
            if wm.abs() < OMEGA_ZERO {
                return Err(Error::IntegrableEndpoint { l, m, sign: '-', energy });
            }
            if wm > 0.0 {
                let rr = source.radial(g, wm, l, spec.radius)?;
                let w = match vacuum {
                    Vacuum::HartleHawking => {
                        (2 * l + 1) as f64 / (16.0 * PI) * -2.0 / (k.a * wm * (-wm / th).exp_m1())
                    }
                    Vacuum::Boulware => (2 * l + 1) as f64 / (8.0 * PI * k.a * wm),
                };
                total += w * rr * rr;
            }
            if vacuum == Vacuum::HartleHawking {
                if wp.abs() < OMEGA_ZERO {
                    return Err(Error::IntegrableEndpoint { l, m, sign: '+', energy });
                }
                if wp > 0.0 {
                    let rr = source.radial(g, wp, l, spec.radius)?;
                    let w = (2 * l + 1) as f64 / (16.0 * PI) * 2.0 / (k.a * wp * (wp / th).exp_m1());
                    total += w * rr * rr;
                }
            }
            row[(m + l as i32) as usize] = weight * total;
        }
        out.push(row);
    }
    Ok(out)
}

/// Circular-orbit Hartle-Hawking rate, thermal at the Hawking temperature.
pub fn circular_rate_hh<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    energy: f64,
    source: &P,
) -> Result<CircularTerms> {
    circular_terms(g, spec, energy, Vacuum::HartleHawking, 0..=spec.l_max, source)
}

pub fn circular_rate_boulware<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    energy: f64,
    source: &P,
) -> Result<CircularTerms> {
    circular_terms(g, spec, energy, Vacuum::Boulware, 0..=spec.l_max, source)
}

/// Thermal weight `e^{w/2T}/(w sinh(w/2T))` of the `omega_-` term; at
/// `T = 1/(4 pi)` it is `e^{2 pi w}/(w sinh(2 pi w))`.
pub fn thermal_weight_minus(omega: f64, temperature: f64) -> f64 {
    -2.0 / (omega * (-omega / temperature).exp_m1())
}

/// `e^{-w/2T}/(w sinh(w/2T))`.
pub fn thermal_weight_plus(omega: f64, temperature: f64) -> f64 {
    2.0 / (omega * (omega / temperature).exp_m1())
}

/// Contribution of a single `l` at one grid coordinate (`E/T_loc` for static
/// detectors, `E` for circular ones).
pub fn rate_for_l<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    coordinate: f64,
    l: u32,
    source: &P,
) -> Result<f64> {
    match spec.trajectory {
        Trajectory::Static => {
            let t_loc = g.local_temperature(spec.radius)?;
            let energy = coordinate * t_loc;
            let (ratio, omega) = static_mode_frequency(g, spec, energy)?;
            let pref = static_prefactor(spec.vacuum, energy, ratio);
            if pref == 0.0 {
                return Ok(0.0);
            }
            let rr = source.radial(g, omega, l, spec.radius)?;
            Ok(pref * (2 * l + 1) as f64 / (4.0 * PI) * rr * rr)
        }
        Trajectory::Circular => {
            let rows = circular_terms(g, spec, coordinate, spec.vacuum, l..=l, source)?;
            Ok(rows[0].iter().sum())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyAxis {
    /// `E / T_loc`.
    OverLocalTemperature,
    /// `E` in canonical units (`E R`).
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// Summed to the requested `l_max`.
    Fixed,
    /// Adaptive tail criterion satisfied.
    TailMet,
    /// Adaptive tail criterion not met by `l_max`.
    TailUnmet,
}

impl Truncation {
    pub fn label(&self) -> &'static str {
        match self {
            Truncation::Fixed => "fixed",
            Truncation::TailMet => "tail_met",
            Truncation::TailUnmet => "tail_unmet",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub axis: EnergyAxis,
    /// Grid coordinates actually evaluated (after any endpoint shifts).
    pub energies: Vec<f64>,
    /// `per_l[l][i]`.
    pub per_l: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    pub truncation: Vec<Truncation>,
    /// Points moved by half a step off a singular endpoint.
    pub shifted: Vec<bool>,
    /// Failure message per point, if any (values are NaN there).
    pub failures: Vec<Option<String>>,
}

impl RateCurve {
    pub fn l_count(&self) -> usize {
        self.per_l.len()
    }

    pub fn contribution(&self, l: u32) -> Option<&[f64]> {
        self.per_l.get(l as usize).map(|v| v.as_slice())
    }

    pub fn failed_points(&self) -> usize {
        self.failures.iter().filter(|f| f.is_some()).count()
    }
}

/// Uniform (`log = false`) or logarithmic grid of `count` points.
pub fn energy_grid(min: f64, max: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if count < 2 || !(min < max) {
        return Err(Error::Configuration(format!(
            "grid needs count >= 2 and min < max (got {count}, [{min}, {max}])"
        )));
    }
    if log && !(min > 0.0) {
        return Err(Error::Configuration("logarithmic grid needs min > 0".into()));
    }
    let step = |i: usize| i as f64 / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                max
            } else if log {
                min * (max / min).powf(step(i))
            } else {
                min + (max - min) * step(i)
            }
        })
        .collect())
}

fn singular_point(g: &Geometry, spec: &DetectorSpec, coordinate: f64) -> Result<bool> {
    match spec.trajectory {
        Trajectory::Static => Ok(coordinate == 0.0),
        Trajectory::Circular => {
            let k = g.circular_kinematics(spec.radius)?;
            for l in 0..=spec.l_max as i32 {
                for m in -l..=l {
                    if orbit_weight(l as u32, m) == 0.0 {
                        continue;
                    }
                    let (wm, wp) = circular_frequencies(&k, m, coordinate);
                    if wm.abs() < OMEGA_ZERO
                        || (spec.vacuum == Vacuum::HartleHawking && wp.abs() < OMEGA_ZERO)
                    {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

/// Moves grid points sitting on an integrable endpoint by half a local step.
fn regularise_grid(g: &Geometry, spec: &DetectorSpec, grid: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut out = grid.to_vec();
    let mut shifted = vec![false; grid.len()];
    for i in 0..grid.len() {
        let mut tries = 0;
        while singular_point(g, spec, out[i])? {
            let step = if i + 1 < grid.len() {
                grid[i + 1] - grid[i]
            } else if i > 0 {
                grid[i] - grid[i - 1]
            } else {
                1e-6
            };
            out[i] += 0.5 * step * 0.5f64.powi(tries);
            shifted[i] = true;
            tries += 1;
            if tries > 40 {
                return Err(Error::domain(format!("cannot move grid point {} off an endpoint", grid[i])));
            }
        }
    }
    Ok((out, shifted))
}

#[cfg(feature = "parallel")]
fn map_points<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sums contributions over `l` on a grid, with optional adaptive truncation:
/// stop once three consecutive `l` each add less than `tail_tolerance` times the
/// running total at every grid point.
pub fn sum_l<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    grid: &[f64],
    source: &P,
) -> Result<RateCurve> {
    spec.validate(g)?;
    if grid.is_empty() {
        return Err(Error::Configuration("empty energy grid".into()));
    }
    let (energies, shifted) = regularise_grid(g, spec, grid)?;
    let n = energies.len();
    let mut per_l: Vec<Vec<f64>> = Vec::new();
    let mut failures: Vec<Option<String>> = vec![None; n];
    let mut running = vec![0.0; n];
    let mut small_run = vec![0u32; n];
    for l in 0..=spec.l_max {
        let values: Vec<Result<f64>> =
            map_points(n, |i| rate_for_l(g, spec, energies[i], l, source));
        let mut row = Vec::with_capacity(n);
        for (i, v) in values.into_iter().enumerate() {
            match v {
                Ok(v) => row.push(v),
                Err(e) => {
                    if failures[i].is_none() {
                        failures[i] = Some(e.to_string());
                    }
                    row.push(f64::NAN);
                }
            }
        }
        for i in 0..n {
            if failures[i].is_some() {
                continue;
            }
            running[i] += row[i];
            if row[i] <= spec.tail_tolerance * running[i] {
                small_run[i] += 1;
            } else {
                small_run[i] = 0;
            }
        }
        per_l.push(row);
        if spec.adaptive && (0..n).all(|i| failures[i].is_some() || small_run[i] >= 3) {
            break;
        }
    }
    let mut total = vec![0.0; n];
    for i in 0..n {
        if failures[i].is_some() {
            total[i] = f64::NAN;
            for row in per_l.iter_mut() {
                row[i] = f64::NAN;
            }
            continue;
        }
        // fixed l order for bitwise reproducibility
        total[i] = per_l.iter().map(|row| row[i]).sum();
    }
    let truncation = (0..n)
        .map(|i| {
            if !spec.adaptive {
                Truncation::Fixed
            } else if small_run[i] >= 3 {
                Truncation::TailMet
            } else {
                Truncation::TailUnmet
            }
        })
        .collect();
    let axis = match spec.trajectory {
        Trajectory::Static => EnergyAxis::OverLocalTemperature,
        Trajectory::Circular => EnergyAxis::Canonical,
    };
    Ok(RateCurve {
        axis,
        energies,
        per_l,
        total,
        truncation,
        shifted,
        failures,
    })
}

/// Golden-section maximisation of a unimodal `f` on `[a, b]` to relative `tol`.
pub fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Refines every interior local maximum of the total (three-point bracket,
/// then golden section on the full `l` sum) and returns a curve with the
/// refined points merged in.
pub fn refine_peaks<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    curve: &RateCurve,
    source: &P,
    rel_step: f64,
) -> Result<RateCurve> {
    let l_top = curve.l_count().saturating_sub(1) as u32;
    let mut extra = Vec::new();
    let e = &curve.energies;
    let t = &curve.total;
    for i in 1..e.len().saturating_sub(1) {
        if t[i] > t[i - 1] && t[i] >= t[i + 1] {
            let total_at = |x: f64| -> Result<f64> {
                (0..=l_top).map(|l| rate_for_l(g, spec, x, l, source)).sum()
            };
            if let Ok((x, _)) = golden_max(total_at, e[i - 1], e[i + 1], rel_step.max(1e-15)) {
                extra.push(x);
            }
        }
    }
    let mut grid = e.clone();
    grid.extend(extra);
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let mut fixed = *spec;
    fixed.l_max = l_top;
    fixed.adaptive = false;
    let mut refined = sum_l(g, &fixed, &grid, source)?;
    if spec.adaptive {
        refined.truncation = refined
            .energies
            .iter()
            .map(|x| {
                let j = e.partition_point(|v| v < x).min(e.len() - 1);
                curve.truncation[j]
            })
            .collect();
    }
    Ok(refined)
}
