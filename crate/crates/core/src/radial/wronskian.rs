//! Boundary phase by direct integration and a Wronskian match.
//!
//! The in-mode is seeded from a short horizon series and carried outward; the
//! Dirichlet branch `D` starts at the boundary with `D = 0`, `D' = 1` and is carried
//! inward. Near the horizon `D = c1 R~in + conj(c1) R~out`, and the constant
//! `W[D, R~in] = D R~in' - D' R~in` fixes both the phase and the normalisation
//! of the physical mode `R~ = c D`.

use num_complex::Complex64;

use super::{complex_rhs, q_reduced, real_rhs, series, ModeNode, SolverSettings};
use crate::error::{Error, Result};
use crate::geometry::Geometry;

#[derive(Debug, Clone, PartialEq)]
pub struct WronskianReport {
    pub theta0: f64,
    /// Real factor `c` with `R~ = c D`.
    pub scale: f64,
    pub wronskian: Complex64,
    /// Largest relative deviation of `W` across the matching points.
    pub drift: f64,
    /// Matching points in `xi`.
    pub overlap: Vec<f64>,
    /// Relative drift of the in-mode flux `Im(conj(R~) R~')/(-omega) - 1`.
    pub flux_drift: f64,
}

pub(crate) struct Solved {
    pub report: WronskianReport,
    pub nodes: Vec<ModeNode>,
    pub horizon: Vec<Complex64>,
}

/// Phase and normalisation of the Dirichlet mode from the Wronskian match.
pub fn theta0_wronskian(
    g: &Geometry,
    omega: f64,
    l: u32,
    settings: &SolverSettings,
) -> Result<WronskianReport> {
    Ok(solve(g, omega, l, settings)?.report)
}

fn overlap_points(settings: &SolverSettings) -> Result<Vec<f64>> {
    let (lo, hi) = settings.overlap;
    let seed = settings.seed_offset / (1.0 + settings.seed_offset);
    if !(lo > seed && hi > lo && hi < 1.0 && settings.horizon_xi < lo) {
        return Err(Error::Configuration(format!(
            "empty matching interval: need seed {seed:e} < {lo:e} < {hi:e} < 1"
        )));
    }
    let n = 5;
    Ok((0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect())
}

pub(crate) fn solve(g: &Geometry, omega: f64, l: u32, settings: &SolverSettings) -> Result<Solved> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    let overlap = overlap_points(settings)?;
    let xp = g.x_plus();
    let stepper = settings.stepper();

    // In-mode seed from the horizon series.
    let horizon = series::build_series(
        g,
        omega,
        l,
        series::SeriesBranch::In,
        settings.horizon_terms.max(5),
        settings.recurrence,
    )?
    .scaled_coefficients()
    .to_vec();
    let delta = settings.seed_offset;
    let xi_seed = delta / (1.0 + delta);
    let r_seed = g.r_plus() * (1.0 + delta);
    let rstar_seed = g.tortoise(r_seed)?;
    let (psi, dpsi) = series::eval_scaled(&horizon, xi_seed);
    let x_seed = 1.0 / r_seed;
    let phase = Complex64::from_polar(1.0, -omega * rstar_seed);
    let value = phase * psi;
    let deriv = phase * (dpsi * xi_seed * q_reduced(g, x_seed) - Complex64::new(0.0, omega) * psi);
    let u_seed = (xp * xi_seed).ln();
    let u_match: Vec<f64> = overlap.iter().map(|xi| (xp * xi).ln()).collect();

    let mut flux_drift = 0.0_f64;
    let in_states = stepper.integrate_through(
        complex_rhs(g, omega, l),
        u_seed,
        [rstar_seed, value.re, value.im, deriv.re, deriv.im],
        &u_match,
        |_, y| {
            let f = y[1] * y[4] - y[2] * y[3];
            flux_drift = flux_drift.max((f / -omega - 1.0).abs());
        },
    )?;

    // Dirichlet branch from the boundary inward, down to the deep-horizon point.
    let u_boundary = xp.ln();
    let u_deep = (xp * settings.horizon_xi).ln();
    let mut checkpoints: Vec<f64> = u_match.iter().rev().copied().collect();
    checkpoints.push(u_deep);
    let mut trail: Vec<(f64, [f64; 3])> = Vec::new();
    let d_states = stepper.integrate_through(
        real_rhs(g, omega, l),
        u_boundary,
        [0.0, 0.0, 1.0],
        &checkpoints,
        |u, y| trail.push((u, *y)),
    )?;

    let wronskians: Vec<Complex64> = in_states
        .iter()
        .zip(d_states[..u_match.len()].iter().rev())
        .map(|(a, d)| {
            let rin = Complex64::new(a[1], a[2]);
            let rin_d = Complex64::new(a[3], a[4]);
            rin_d * d[1] - rin * d[2]
        })
        .collect();
    let w = wronskians[wronskians.len() / 2];
    let drift = wronskians
        .iter()
        .map(|wk| (wk - w).norm() / w.norm())
        .fold(0.0, f64::max);
    if !(drift <= settings.wronskian_limit) {
        return Err(Error::WronskianDrift {
            drift,
            limit: settings.wronskian_limit,
        });
    }
    let theta0 = series::wrap_phase((-w).arg());
    let scale = -2.0 * omega / w.norm();

    let nodes = select_nodes(&trail, settings.nodes.max(2), scale);
    Ok(Solved {
        report: WronskianReport {
            theta0,
            scale,
            wronskian: w,
            drift,
            overlap,
            flux_drift,
        },
        nodes,
        horizon,
    })
}

/// Keeps roughly `count` accepted steps spread evenly in `r*`, sorted by `u`.
fn select_nodes(trail: &[(f64, [f64; 3])], count: usize, scale: f64) -> Vec<ModeNode> {
    let first = trail.first().map(|t| t.1[0]).unwrap_or(0.0);
    let last = trail.last().map(|t| t.1[0]).unwrap_or(0.0);
    let spacing = (first - last).abs() / (count - 1) as f64;
    let mut out = Vec::with_capacity(count + 2);
    let mut next = first;
    for (i, (u, y)) in trail.iter().enumerate() {
        if i == 0 || i + 1 == trail.len() || y[0] <= next {
            out.push(ModeNode {
                u: *u,
                rstar: y[0],
                value: scale * y[1],
                derivative: scale * y[2],
            });
            next = y[0] - spacing;
        }
    }
    out.reverse();
    out.dedup_by(|a, b| a.u == b.u);
    out
}
