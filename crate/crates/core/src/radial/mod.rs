//! Radial modes of the conformally coupled massless scalar.
//!
//! Throughout, `R~ = r R` is the Schrödinger-form radial function and primes on
//! `R~` denote `d/dr*`. Numerical propagation uses `u = ln(x_+ - x)` with
//! `x = 1/r`; then `du/dr* = q(x) = r0 x^2 + r_+^2 x + r_+ > 0`, the horizon sits at
//! `u = -inf` and the AdS boundary at the regular point `u = ln x_+`.

mod cache;
mod series;
mod wronskian;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cache::{CacheStats, ModeCache, ModeCacheKey};
pub use series::{
    build_series, convergence_ratio, default_schedule, taylor_shift, theta0_series, wrap_phase,
    PhaseReport, Quartics, Recurrence, SeriesBranch, SeriesSolution,
};
pub use wronskian::{theta0_wronskian, WronskianReport};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::ode::Dopri5;

/// `V = l(l+1)/r^2 + r0/r^3`.
pub fn potential(g: &Geometry, l: u32, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let ll = (l as f64) * (l as f64 + 1.0);
    Ok(ll / (r * r) + g.r0() / (r * r * r))
}

/// `V~ = f V`, the potential of the Schrödinger form in `r*`.
pub fn effective_potential(g: &Geometry, l: u32, r: f64) -> Result<f64> {
    if r.is_infinite() {
        return Ok((l as f64) * (l as f64 + 1.0));
    }
    Ok(g.lapse(r) * potential(g, l, r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    In,
    Out,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeKey {
    pub omega: f64,
    pub l: u32,
    pub branch: Branch,
}

impl ModeKey {
    pub fn new(omega: f64, l: u32, branch: Branch) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::domain(format!("frequency must be positive, got {omega}")));
        }
        Ok(ModeKey { omega, l, branch })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Method {
    Series,
    Wronskian,
    /// Series when its predicted length is short, otherwise (or on failure) Wronskian.
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Method::Series),
            "wronskian" => Ok(Method::Wronskian),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Configuration(format!("unknown method '{other}'"))),
        }
    }
}

/// Method that actually produced a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveMethod {
    Series,
    Wronskian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Relative offset `delta` of the near-horizon seed, `r = r_+ (1 + delta)`.
    pub seed_offset: f64,
    /// Series terms used for the near-horizon seed.
    pub horizon_terms: usize,
    pub schedule: Vec<usize>,
    pub phase_tol: f64,
    pub recurrence: Recurrence,
    /// Matching interval in `xi = 1 - r_+/r` for the Wronskian.
    pub overlap: (f64, f64),
    pub wronskian_limit: f64,
    /// `Auto` uses the series only if the predicted length is at most this.
    pub auto_series_terms: usize,
    /// Stored nodes of the physical mode for later evaluation.
    pub nodes: usize,
    /// Innermost point (in `xi`) reached by the Dirichlet branch.
    pub horizon_xi: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            rtol: 1e-11,
            atol: 1e-13,
            seed_offset: 1e-6,
            horizon_terms: 24,
            schedule: default_schedule(10_000),
            phase_tol: 1e-8,
            recurrence: Recurrence::Reduced,
            overlap: (1e-4, 1e-3),
            wronskian_limit: 1e-8,
            auto_series_terms: 1000,
            nodes: 64,
            horizon_xi: 1e-14,
        }
    }
}

impl SolverSettings {
    pub(crate) fn stepper(&self) -> Dopri5 {
        Dopri5::new(self.rtol, self.atol)
    }

    /// Bit-exact fingerprint of every tolerance that can change a mode.
    pub fn fingerprint(&self) -> Vec<u64> {
        let mut v = vec![
            self.rtol.to_bits(),
            self.atol.to_bits(),
            self.seed_offset.to_bits(),
            self.horizon_terms as u64,
            self.phase_tol.to_bits(),
            self.recurrence as u64,
            self.overlap.0.to_bits(),
            self.overlap.1.to_bits(),
            self.wronskian_limit.to_bits(),
            self.auto_series_terms as u64,
            self.nodes as u64,
            self.horizon_xi.to_bits(),
        ];
        v.extend(self.schedule.iter().map(|&n| n as u64));
        v
    }
}

/// `q(x) = r0 x^2 + r_+^2 x + r_+`, with `1 + x^2 - r0 x^3 = (x_+ - x) q(x)`.
pub(crate) fn q_reduced(g: &Geometry, x: f64) -> f64 {
    (g.r0() * x + g.r_plus() * g.r_plus()) * x + g.r_plus()
}

/// Real Schrödinger system in `u` for `[r*, R~, R~']`.
pub(crate) fn real_rhs(g: &Geometry, omega: f64, l: u32) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
    let ll = (l as f64) * (l as f64 + 1.0);
    let xp = g.x_plus();
    let r0 = g.r0();
    move |u, y| {
        let sigma = u.exp();
        let x = xp - sigma;
        let q = q_reduced(g, x);
        let v = sigma * q * (ll + r0 * x);
        [1.0 / q, y[2] / q, (v - omega * omega) * y[1] / q]
    }
}

/// Complex system in `u` for `[r*, Re R~, Im R~, Re R~', Im R~']`.
pub(crate) fn complex_rhs(g: &Geometry, omega: f64, l: u32) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] + '_ {
    let real = real_rhs(g, omega, l);
    move |u, y| {
        let a = real(u, &[y[0], y[1], y[3]]);
        let b = real(u, &[y[0], y[2], y[4]]);
        [a[0], a[1], b[1], a[2], b[2]]
    }
}

/// `u = ln(x_+ - 1/r)`, with `r = inf` mapping to the boundary.
pub(crate) fn u_of_r(g: &Geometry, r: f64) -> f64 {
    if r.is_infinite() {
        g.x_plus().ln()
    } else {
        // x_+ - 1/r = (r - r_+)/(r r_+), evaluated without cancellation
        ((r - g.r_plus()) / (r * g.r_plus())).ln()
    }
}

/// Stored sample of the physical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeNode {
    pub u: f64,
    pub rstar: f64,
    pub value: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Representation {
    /// `R~ = 2 Im(e^{-i(theta0 + omega r*)} psi)` from the full series.
    Series(Arc<SeriesSolution>),
    /// Propagated samples plus a short horizon series below the innermost node.
    Nodes {
        nodes: Vec<ModeNode>,
        horizon: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalMode {
    pub key: ModeKey,
    pub geometry: Geometry,
    pub theta0: f64,
    /// Near-horizon amplitude deviation from 2.
    pub normalization_residual: f64,
    pub method: SolveMethod,
    /// Radius with `|r*(r_max)| = 1e-6`.
    pub r_max: f64,
    rtol: f64,
    atol: f64,
    repr: Representation,
}

impl PhysicalMode {
    /// `(R~, dR~/dr*)` at radius `r` (`r = inf` allowed).
    pub fn tilde(&self, r: f64) -> Result<(f64, f64)> {
        let g = &self.geometry;
        if !(r > g.r_plus()) {
            return Err(Error::domain(format!(
                "mode evaluated at r = {r}, not outside r_+ = {}",
                g.r_plus()
            )));
        }
        match &self.repr {
            Representation::Series(series) => {
                let rstar = g.tortoise(r)?;
                Ok(self.tilde_near_horizon(series.scaled_coefficients(), r, rstar))
            }
            Representation::Nodes { nodes, horizon } => {
                let u = u_of_r(g, r);
                if u <= nodes[0].u {
                    let rstar = g.tortoise(r)?;
                    return Ok(self.tilde_near_horizon(horizon, r, rstar));
                }
                let idx = nodes.partition_point(|n| n.u <= u);
                let near = if idx == nodes.len() {
                    nodes[idx - 1]
                } else if (nodes[idx].u - u).abs() < (u - nodes[idx - 1].u).abs() {
                    nodes[idx]
                } else {
                    nodes[idx - 1]
                };
                if near.u == u {
                    return Ok((near.value, near.derivative));
                }
                let rhs = real_rhs(g, self.key.omega, self.key.l);
                let y = Dopri5::new(self.rtol, self.atol).integrate(
                    rhs,
                    near.u,
                    [near.rstar, near.value, near.derivative],
                    u,
                )?;
                Ok((y[1], y[2]))
            }
        }
    }

    /// `R_{omega l}(r) = R~ / r`.
    pub fn radial(&self, r: f64) -> Result<f64> {
        if r.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.tilde(r)?.0 / r)
    }

    fn tilde_near_horizon(&self, b: &[Complex64], r: f64, rstar: f64) -> (f64, f64) {
        let g = &self.geometry;
        let omega = self.key.omega;
        let xi = if r.is_infinite() { 1.0 } else { (r - g.r_plus()) / r };
        let x = if r.is_infinite() { 0.0 } else { 1.0 / r };
        let (psi, dpsi) = series::eval_scaled(b, xi);
        let phase = Complex64::from_polar(1.0, -(self.theta0 + omega * rstar));
        let value = 2.0 * (phase * psi).im;
        let deriv = 2.0 * (phase * (dpsi * xi * q_reduced(g, x) - Complex64::new(0.0, omega) * psi)).im;
        (value, deriv)
    }

    /// Series coefficients when the mode came from the series method.
    pub fn series(&self) -> Option<&SeriesSolution> {
        match &self.repr {
            Representation::Series(s) => Some(s),
            Representation::Nodes { .. } => None,
        }
    }

    pub fn nodes(&self) -> Option<&[ModeNode]> {
        match &self.repr {
            Representation::Series(_) => None,
            Representation::Nodes { nodes, .. } => Some(nodes),
        }
    }
}

/// Amplitude `sqrt(R~^2 + (R~'/omega)^2)` at a few points deep in the horizon
/// region, compared with 2.
fn normalization_residual(mode: &PhysicalMode, horizon_xi: f64) -> Result<f64> {
    let g = mode.geometry;
    let mut worst = 0.0_f64;
    for k in 0..3 {
        let xi = horizon_xi * 10f64.powi(k);
        let r = g.r_plus() / (1.0 - xi);
        let (v, d) = mode.tilde(r)?;
        let amp = v.hypot(d / mode.key.omega);
        worst = worst.max((amp - 2.0).abs());
    }
    Ok(worst)
}

fn r_max(g: &Geometry) -> Result<f64> {
    g.radius_at_tortoise(-1e-6)
}

fn physical_from_series(
    g: &Geometry,
    omega: f64,
    l: u32,
    settings: &SolverSettings,
) -> Result<PhysicalMode> {
    let (report, solution) = series::theta0_series_with_solution(
        g,
        omega,
        l,
        &settings.schedule,
        settings.phase_tol,
        settings.recurrence,
    )?;
    let mut mode = PhysicalMode {
        key: ModeKey::new(omega, l, Branch::Physical)?,
        geometry: *g,
        theta0: report.theta0,
        normalization_residual: 0.0,
        method: SolveMethod::Series,
        r_max: r_max(g)?,
        rtol: settings.rtol,
        atol: settings.atol,
        repr: Representation::Series(Arc::new(solution)),
    };
    mode.normalization_residual = normalization_residual(&mode, settings.horizon_xi)?;
    Ok(mode)
}

/// Tenfold integrator tightenings tried when the Wronskian drifts. Near a sharp
/// resonance `|W|` is tiny, so its relative drift is amplified.
const DRIFT_RETRIES: u32 = 2;

fn physical_from_wronskian(
    g: &Geometry,
    omega: f64,
    l: u32,
    settings: &SolverSettings,
) -> Result<PhysicalMode> {
    let mut tight = settings.clone();
    let mut tries = 0;
    let solved = loop {
        match wronskian::solve(g, omega, l, &tight) {
            Err(Error::WronskianDrift { .. }) if tries < DRIFT_RETRIES => {
                tight.rtol *= 0.1;
                tight.atol *= 0.1;
                tries += 1;
            }
            other => break other?,
        }
    };
    let settings = &tight;
    let mut mode = PhysicalMode {
        key: ModeKey::new(omega, l, Branch::Physical)?,
        geometry: *g,
        theta0: solved.report.theta0,
        normalization_residual: 0.0,
        method: SolveMethod::Wronskian,
        r_max: r_max(g)?,
        rtol: settings.rtol,
        atol: settings.atol,
        repr: Representation::Nodes {
            nodes: solved.nodes,
            horizon: solved.horizon,
        },
    };
    mode.normalization_residual = normalization_residual(&mode, settings.horizon_xi)?;
    Ok(mode)
}

/// Whether `Auto` would try the series first.
pub fn series_preferred(g: &Geometry, settings: &SolverSettings) -> bool {
    let rho = convergence_ratio(g);
    if rho >= 1.0 {
        return false;
    }
    let predicted = (1e-10_f64).ln() / rho.ln();
    predicted <= settings.auto_series_terms as f64
}

/// The real Dirichlet mode `R_{omega l}`.
pub fn physical_mode(
    g: &Geometry,
    omega: f64,
    l: u32,
    method: Method,
    settings: &SolverSettings,
) -> Result<PhysicalMode> {
    ModeKey::new(omega, l, Branch::Physical)?;
    let out = match method {
        Method::Series => physical_from_series(g, omega, l, settings),
        Method::Wronskian => physical_from_wronskian(g, omega, l, settings),
        Method::Auto => {
            if series_preferred(g, settings) {
                match physical_from_series(g, omega, l, settings) {
                    Err(Error::SeriesNonConvergence { .. }) => {
                        physical_from_wronskian(g, omega, l, settings)
                    }
                    other => other,
                }
            } else {
                physical_from_wronskian(g, omega, l, settings)
            }
        }
    };
    out.map_err(|e| e.in_mode(l, omega))
}
