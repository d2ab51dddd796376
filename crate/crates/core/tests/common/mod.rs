//! Invariant checks shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use num_complex::Complex64;
use sads_udw::radial::{build_series, taylor_shift, theta0_wronskian, Recurrence, SeriesBranch, SolverSettings};
use sads_udw::Geometry;

pub type Check = Result<(), String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Defect of `-f a^2 + r^2 b^2 = -1`, relative to the size of the cancelling
/// terms (they grow without bound near the photon sphere); `Ok(None)` when no
/// timelike orbit exists at `r`.
pub fn four_velocity(r_plus: f64, r: f64) -> Result<Option<f64>, String> {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    match g.circular_kinematics(r) {
        Ok(k) => {
            let time = g.lapse(r) * k.a * k.a;
            Ok(Some((-time + r * r * k.b * k.b + 1.0).abs() / time.max(1.0)))
        }
        Err(_) => Ok(None),
    }
}

pub fn wronskian_constancy(r_plus: f64, omega: f64, l: u32) -> Check {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let rep = theta0_wronskian(&g, omega, l, &SolverSettings::default()).map_err(|e| e.to_string())?;
    if rep.drift < 1e-8 && rep.flux_drift.abs() < 1e-8 {
        Ok(())
    } else {
        Err(format!("drift {:e}, flux drift {:e}", rep.drift, rep.flux_drift))
    }
}

pub fn recurrence_residual(r_plus: f64, omega: f64, l: u32, order: usize) -> Check {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let s = build_series(&g, omega, l, SeriesBranch::In, order, Recurrence::Reduced).map_err(|e| e.to_string())?;
    let res = s.five_term_residual();
    if res < 1e-13 {
        Ok(())
    } else {
        Err(format!("residual {res:e}"))
    }
}

/// Compares the shifted table against direct expansion at `y`.
pub fn taylor_shift_point(c: [f64; 5], x0: f64, y: f64) -> Check {
    let cc = c.map(|v| Complex64::new(v, 0.0));
    let d = taylor_shift(&cc, x0);
    let direct: f64 = c.iter().rev().fold(0.0, |acc, &v| acc * (y + x0) + v);
    let shifted: f64 = d.iter().rev().fold(0.0, |acc, v| acc * y + v.re);
    let scale: f64 = c.iter().enumerate().map(|(k, v)| v.abs() * (y + x0).abs().powi(k as i32)).sum();
    if (direct - shifted).abs() <= 1e-12 * scale.max(1.0) {
        Ok(())
    } else {
        Err(format!("direct {direct} vs shifted {shifted}"))
    }
}

/// `(E/T_loc, omega~ R, F r_+)` recomputed in units with AdS radius `sigma`.
pub fn scaling_invariance(r_plus: f64, ratio: f64, energy: f64, rate: f64, sigma: f64) -> Check {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let s = g.rescale(sigma).map_err(|e| e.to_string())?;
    let r = ratio * r_plus;
    let t_loc = g.local_temperature(r).map_err(|e| e.to_string())?;
    let y = energy / t_loc;
    let y_s = s.energy(energy) / s.local_temperature(s.length(r));
    let w = g.hawking_temperature() * y;
    let w_s = s.hawking_temperature * y_s * s.ads_radius;
    let f = rate * r_plus;
    let f_s = s.rate(rate) * s.r_plus;
    let worst = rel(y_s, y).max(rel(w_s, w)).max(rel(f_s, f));
    if worst < 1e-12 {
        Ok(())
    } else {
        Err(format!("relative mismatch {worst:e}"))
    }
}
