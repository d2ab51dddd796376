//! Browser bindings: a static rate curve, a radial mode profile and a WKB
//! peak-coefficient sweep. Everything runs single-threaded in canonical units.

use wasm_bindgen::prelude::*;

use sads_udw::analysis::wkb_scatter;
use sads_udw::radial::SolverSettings;
use sads_udw::response::{
    energy_grid, sum_l, DetectorSpec, ModeProvider, ModeSource, Trajectory, Vacuum,
};
use sads_udw::Geometry;

#[wasm_bindgen]
pub struct Curve {
    energies: Vec<f64>,
    total: Vec<f64>,
    per_l: Vec<Vec<f64>>,
    failed: usize,
}

#[wasm_bindgen]
impl Curve {
    pub fn energies(&self) -> Vec<f64> {
        self.energies.clone()
    }

    pub fn total(&self) -> Vec<f64> {
        self.total.clone()
    }

    /// Contribution of one `l`; empty past the last computed `l`.
    pub fn contribution(&self, l: usize) -> Vec<f64> {
        self.per_l.get(l).cloned().unwrap_or_default()
    }

    #[wasm_bindgen(getter)]
    pub fn l_count(&self) -> usize {
        self.per_l.len()
    }

    #[wasm_bindgen(getter)]
    pub fn failed(&self) -> usize {
        self.failed
    }
}

#[wasm_bindgen]
pub struct Profile {
    r: Vec<f64>,
    r_tilde: Vec<f64>,
    theta0: f64,
}

#[wasm_bindgen]
impl Profile {
    pub fn r(&self) -> Vec<f64> {
        self.r.clone()
    }

    /// `r R(r)`, the Schroedinger-form amplitude.
    pub fn r_tilde(&self) -> Vec<f64> {
        self.r_tilde.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn theta0(&self) -> f64 {
        self.theta0
    }
}

#[wasm_bindgen]
pub struct Sweep {
    omega: Vec<f64>,
    c: Vec<f64>,
    validity: Vec<f64>,
}

#[wasm_bindgen]
impl Sweep {
    pub fn omega(&self) -> Vec<f64> {
        self.omega.clone()
    }

    /// Peak coefficient `C`; NaN below the barrier.
    pub fn c(&self) -> Vec<f64> {
        self.c.clone()
    }

    pub fn validity(&self) -> Vec<f64> {
        self.validity.clone()
    }
}

pub fn static_curve_impl(
    r_plus: f64,
    radius: f64,
    boulware: bool,
    l_max: u32,
    e_min: f64,
    e_max: f64,
    count: usize,
) -> Result<Curve, String> {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let vacuum = if boulware { Vacuum::Boulware } else { Vacuum::HartleHawking };
    let spec = DetectorSpec::new(Trajectory::Static, radius, vacuum, l_max);
    let grid = energy_grid(e_min, e_max, count, false).map_err(|e| e.to_string())?;
    let curve = sum_l(&g, &spec, &grid, &ModeSource::default()).map_err(|e| e.to_string())?;
    Ok(Curve {
        failed: curve.failed_points(),
        energies: curve.energies,
        total: curve.total,
        per_l: curve.per_l,
    })
}

pub fn mode_profile_impl(r_plus: f64, omega: f64, l: u32, points: usize) -> Result<Profile, String> {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let mode = ModeSource::default().mode(&g, omega, l).map_err(|e| e.to_string())?;
    let rs = energy_grid(r_plus * 1.001, 50.0_f64.max(50.0 * r_plus), points, true).map_err(|e| e.to_string())?;
    let r_tilde = rs
        .iter()
        .map(|&r| mode.tilde(r).map(|t| t.0).unwrap_or(f64::NAN))
        .collect();
    Ok(Profile {
        r: rs,
        r_tilde,
        theta0: mode.theta0,
    })
}

pub fn wkb_sweep_impl(r_plus: f64, l: u32, omega_min: f64, omega_max: f64, count: usize) -> Result<Sweep, String> {
    let g = Geometry::new(r_plus).map_err(|e| e.to_string())?;
    let omega = energy_grid(omega_min, omega_max, count, false).map_err(|e| e.to_string())?;
    let settings = SolverSettings::default();
    let (c, validity) = omega
        .iter()
        .map(|&w| match wkb_scatter(&g, w, l, &settings) {
            Ok(s) => (s.c, s.wkb_validity),
            Err(_) => (f64::NAN, f64::NAN),
        })
        .unzip();
    Ok(Sweep { omega, c, validity })
}

#[wasm_bindgen(js_name = staticRate)]
pub fn static_rate(
    r_plus: f64,
    radius: f64,
    boulware: bool,
    l_max: u32,
    e_min: f64,
    e_max: f64,
    count: usize,
) -> Result<Curve, JsError> {
    static_curve_impl(r_plus, radius, boulware, l_max, e_min, e_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = modeProfile)]
pub fn mode_profile(r_plus: f64, omega: f64, l: u32, points: usize) -> Result<Profile, JsError> {
    mode_profile_impl(r_plus, omega, l, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wkbSweep)]
pub fn wkb_sweep(r_plus: f64, l: u32, omega_min: f64, omega_max: f64, count: usize) -> Result<Sweep, JsError> {
    wkb_sweep_impl(r_plus, l, omega_min, omega_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = hawkingTemperature)]
pub fn hawking_temperature(r_plus: f64) -> f64 {
    Geometry::new(r_plus).map(|g| g.hawking_temperature()).unwrap_or(f64::NAN)
}

#[wasm_bindgen(js_name = localTemperature)]
pub fn local_temperature(r_plus: f64, radius: f64) -> f64 {
    Geometry::new(r_plus)
        .and_then(|g| g.local_temperature(radius))
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_sums_its_parts() {
        let c = static_curve_impl(0.1, 1.0, false, 2, -5.0, 5.0, 11).unwrap();
        assert_eq!(c.l_count(), 3);
        assert_eq!(c.failed(), 0);
        for i in 0..11 {
            let parts: f64 = (0..3).map(|l| c.contribution(l)[i]).sum();
            assert!((parts - c.total()[i]).abs() <= 1e-12 * c.total()[i].abs());
        }
        assert!(c.contribution(3).is_empty());
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(static_curve_impl(0.1, 0.05, false, 2, -5.0, 5.0, 11).is_err());
        assert!(static_curve_impl(-1.0, 1.0, false, 2, -5.0, 5.0, 11).is_err());
        assert!(mode_profile_impl(0.1, -1.0, 0, 10).is_err());
        assert!(hawking_temperature(0.0).is_nan());
    }

    #[test]
    fn profile_and_sweep_shapes() {
        let p = mode_profile_impl(0.1, 2.5, 1, 16).unwrap();
        assert_eq!(p.r().len(), 16);
        assert!(p.r_tilde().iter().all(|v| v.is_finite()));
        let s = wkb_sweep_impl(1.0, 1, 1.0, 4.0, 7).unwrap();
        assert!(s.c()[0].is_nan()); // omega^2 = 1 < l(l+1)
        assert!(s.c()[6].is_finite());
    }

    #[test]
    fn temperatures() {
        let th = hawking_temperature(1.0);
        assert!((th - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(local_temperature(1.0, 2.0) < th);
    }
}
