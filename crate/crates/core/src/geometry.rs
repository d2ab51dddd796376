//! Schwarzschild-AdS background in canonical units (AdS radius fixed to 1).
//!
//! The lapse is `f(r) = r^2 + 1 - r0/r`, with horizon `r_+` and mass parameter
//! `r0 = r_+ (r_+^2 + 1)`. The lapse factorises as `f(r) = (r - r_+) Q(r) / r`
//! with `Q(r) = r^2 + r_+ r + r_+^2 + 1`, which is used wherever cancellation near
//! the horizon would otherwise lose digits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative accuracy of the tortoise quadrature.
pub const TORTOISE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    r_plus: f64,
    r0: f64,
    hawking_temperature: f64,
}

/// Proper-time rates of a circular geodesic: `a = dt/dtau`, `b = dphi/dtau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularKinematics {
    pub orbit_radius: f64,
    pub a: f64,
    pub b: f64,
}

impl Geometry {
    pub fn new(r_plus: f64) -> Result<Self> {
        if !(r_plus > 0.0) || !r_plus.is_finite() {
            return Err(Error::domain(format!("horizon radius must be positive, got {r_plus}")));
        }
        Ok(Geometry {
            r_plus,
            r0: r_plus * (r_plus * r_plus + 1.0),
            hawking_temperature: (3.0 * r_plus * r_plus + 1.0) / (4.0 * PI * r_plus),
        })
    }

    /// Builds the geometry from the mass parameter by solving `r^3 + r - r0 = 0`
    /// with a safeguarded Newton iteration.
    pub fn from_mass_parameter(r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::domain(format!("mass parameter must be positive, got {r0}")));
        }
        let cubic = |r: f64| r * r * r + r - r0;
        // The cubic is increasing, so [0, max(r0, r0^(1/3))] brackets the root.
        let (mut lo, mut hi) = (0.0, r0.max(r0.cbrt()));
        let mut r = (0.5 * r0).max(r0.cbrt()).min(hi);
        for _ in 0..200 {
            let fr = cubic(r);
            if fr > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let mut next = r - fr / (3.0 * r * r + 1.0);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r {
                r = next;
                break;
            }
            r = next;
        }
        Geometry::new(r)
    }

    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn x_plus(&self) -> f64 {
        1.0 / self.r_plus
    }

    pub fn hawking_temperature(&self) -> f64 {
        self.hawking_temperature
    }

    /// `f'(r_+) = 4 pi T_H`.
    pub fn surface_gravity(&self) -> f64 {
        4.0 * PI * self.hawking_temperature
    }

    fn q(&self, r: f64) -> f64 {
        let rp = self.r_plus;
        r * r + rp * r + rp * rp + 1.0
    }

    pub fn lapse(&self, r: f64) -> f64 {
        (r - self.r_plus) * self.q(r) / r
    }

    pub fn lapse_derivative(&self, r: f64) -> f64 {
        2.0 * r + self.r0 / (r * r)
    }

    /// `r*(r) = -int_r^inf dr'/f(r')`, normalised to vanish at the AdS boundary.
    pub fn tortoise(&self, r: f64) -> Result<f64> {
        if !(r > self.r_plus) {
            return Err(Error::domain(format!(
                "tortoise coordinate needs r > r_+ = {}, got {r}",
                self.r_plus
            )));
        }
        if r.is_infinite() {
            return Ok(0.0);
        }
        Ok(tortoise_with_radius(self.r_plus, 1.0, r))
    }

    /// Inverse of [`Geometry::tortoise`], by Newton iteration in `ln(r - r_+)`.
    pub fn radius_at_tortoise(&self, rstar: f64) -> Result<f64> {
        if !(rstar < 0.0) {
            return Err(Error::domain(format!("tortoise coordinate must be negative, got {rstar}")));
        }
        let rp = self.r_plus;
        // Initial guess from whichever asymptotic form applies.
        let near = rp + rp * (self.surface_gravity() * rstar).exp();
        let far = -1.0 / rstar;
        let mut s = if far > 2.0 * rp { (far - rp).ln() } else { (near - rp).max(1e-300).ln() };
        for _ in 0..100 {
            let r = rp + s.exp();
            let g = self.tortoise(r)? - rstar;
            // d r*/ds = (r - r_+) / f(r) = r / Q(r)
            let step = g * self.q(r) / r;
            let step = step.clamp(-5.0, 5.0);
            s -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        Ok(rp + s.exp())
    }

    pub fn local_temperature(&self, r: f64) -> Result<f64> {
        if !(r > self.r_plus) {
            return Err(Error::domain(format!(
                "local temperature needs r > r_+ = {}, got {r}",
                self.r_plus
            )));
        }
        Ok(self.hawking_temperature / self.lapse(r).sqrt())
    }

    pub fn circular_kinematics(&self, r: f64) -> Result<CircularKinematics> {
        circular_kinematics_with_radius(self.r0, 1.0, r)
    }

    pub fn rescale(&self, sigma: f64) -> Result<ScalingReport> {
        ScalingReport::new(*self, sigma)
    }
}

/// `-int_r^inf dr'/f(r')` for a lapse `r^2/R^2 + 1 - r0/r` with no zero on
/// `[r, inf)`. With `r0 = 0` this is the pure-AdS map `R (atan(r/R) - pi/2)`.
pub fn far_tortoise(r0: f64, ads_radius: f64, r: f64) -> f64 {
    let inv_r2 = 1.0 / (ads_radius * ads_radius);
    // x = 1/r turns the integrand into 1 / (1/R^2 + x^2 - r0 x^3).
    -quadrature::integrate(
        |x| 1.0 / (inv_r2 + x * x - r0 * x * x * x),
        0.0,
        1.0 / r,
        TORTOISE_REL_TOL,
    )
}

/// Tortoise map for horizon `r_plus` and AdS radius `ads_radius`.
///
/// Below `2 r_+` the log singularity `ln(r - r_+) / f'(r_+)` is removed
/// analytically and the smooth remainder integrated numerically.
pub(crate) fn tortoise_with_radius(r_plus: f64, ads_radius: f64, r: f64) -> f64 {
    let inv_r2 = 1.0 / (ads_radius * ads_radius);
    let r0 = r_plus * (r_plus * r_plus * inv_r2 + 1.0);
    let split = 2.0 * r_plus;
    if r >= split {
        return far_tortoise(r0, ads_radius, r);
    }
    let q = |s: f64| (s * s + r_plus * s + r_plus * r_plus) * inv_r2 + 1.0;
    let q_plus = q(r_plus);
    let kappa = q_plus / r_plus;
    // 1/f(s) - 1/(kappa (s - r_+)), with the cancelling pole removed.
    let regular = |s: f64| (1.0 - r_plus * (s - r_plus) * inv_r2) / (q(s) * q_plus);
    let smooth = quadrature::integrate(regular, r, split, TORTOISE_REL_TOL);
    let log_part = (r_plus / (r - r_plus)).ln() / kappa;
    far_tortoise(r0, ads_radius, split) - smooth - log_part
}

fn circular_kinematics_with_radius(r0: f64, ads_radius: f64, r: f64) -> Result<CircularKinematics> {
    let gap = 2.0 * r - 3.0 * r0;
    if !(gap > 0.0) {
        return Err(Error::NoCircularOrbit { radius: r, r0 });
    }
    let inv_r2 = 1.0 / (ads_radius * ads_radius);
    let a = (2.0 * r / gap).sqrt();
    let b = ((r0 + 2.0 * r * r * r * inv_r2) / (r * r * gap)).sqrt();
    Ok(CircularKinematics { orbit_radius: r, a, b })
}

/// The same background expressed in units where the AdS radius is `sigma`.
///
/// Quantities are recomputed from the explicit-`R` formulas rather than by
/// multiplying canonical values, so comparing the two is a genuine check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub sigma: f64,
    pub canonical: Geometry,
    pub ads_radius: f64,
    pub r_plus: f64,
    pub r0: f64,
    pub hawking_temperature: f64,
}

impl ScalingReport {
    fn new(canonical: Geometry, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!("scale factor must be positive, got {sigma}")));
        }
        let ads_radius = sigma;
        let r_plus = sigma * canonical.r_plus;
        let inv_r2 = 1.0 / (ads_radius * ads_radius);
        let r0 = r_plus * (r_plus * r_plus * inv_r2 + 1.0);
        let hawking_temperature = (3.0 * r_plus * r_plus * inv_r2 + 1.0) / (4.0 * PI * r_plus);
        Ok(ScalingReport {
            sigma,
            canonical,
            ads_radius,
            r_plus,
            r0,
            hawking_temperature,
        })
    }

    pub fn length(&self, canonical_length: f64) -> f64 {
        self.sigma * canonical_length
    }

    pub fn time(&self, canonical_time: f64) -> f64 {
        self.sigma * canonical_time
    }

    pub fn frequency(&self, canonical_frequency: f64) -> f64 {
        canonical_frequency / self.sigma
    }

    pub fn energy(&self, canonical_energy: f64) -> f64 {
        canonical_energy / self.sigma
    }

    pub fn temperature(&self, canonical_temperature: f64) -> f64 {
        canonical_temperature / self.sigma
    }

    /// A rate `F(E)` in canonical units maps to `F(E/sigma)/sigma`; this takes the
    /// canonical value and returns the rescaled one at the rescaled energy.
    pub fn rate(&self, canonical_rate: f64) -> f64 {
        canonical_rate / self.sigma
    }

    /// Lapse at a radius given in rescaled units.
    pub fn lapse(&self, r: f64) -> f64 {
        r * r / (self.ads_radius * self.ads_radius) + 1.0 - self.r0 / r
    }

    pub fn tortoise(&self, r: f64) -> Result<f64> {
        if !(r > self.r_plus) {
            return Err(Error::domain(format!("tortoise coordinate needs r > r_+, got {r}")));
        }
        Ok(tortoise_with_radius(self.r_plus, self.ads_radius, r))
    }

    pub fn local_temperature(&self, r: f64) -> f64 {
        self.hawking_temperature / self.lapse(r).sqrt()
    }

    pub fn circular_kinematics(&self, r: f64) -> Result<CircularKinematics> {
        circular_kinematics_with_radius(self.r0, self.ads_radius, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn construction_values() {
        let g = Geometry::new(0.1).unwrap();
        assert!(close(g.r0(), 0.101, 1e-15));
        let small = Geometry::new(0.01).unwrap();
        assert_eq!(format!("{:.2}", small.hawking_temperature()), "7.96");
        let unit = Geometry::new(1.0).unwrap();
        assert!(close(unit.hawking_temperature(), 1.0 / PI, 1e-15));
        assert!(Geometry::new(0.0).is_err());
        assert!(Geometry::new(-1.0).is_err());
        assert!(Geometry::new(f64::NAN).is_err());
    }

    #[test]
    fn lapse_values() {
        let g = Geometry::new(0.1).unwrap();
        assert!(close(g.lapse(1.0), 1.899, 1e-14));
        assert_eq!(g.lapse(g.r_plus()), 0.0);
        let unit = Geometry::new(1.0).unwrap();
        assert!(close(unit.lapse(2.0), 4.0, 1e-15));
        // f'(r_+) = 4 pi T_H
        assert!(close(g.lapse_derivative(g.r_plus()), g.surface_gravity(), 1e-14));
    }

    #[test]
    fn pure_ads_tortoise() {
        let v = far_tortoise(0.0, 1.0, 1.0);
        assert!((v - (1.0_f64.atan() - PI / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn tortoise_domain_and_limits() {
        let g = Geometry::new(0.1).unwrap();
        assert!(g.tortoise(0.1).is_err());
        assert!(g.tortoise(0.05).is_err());
        assert_eq!(g.tortoise(f64::INFINITY).unwrap(), 0.0);
        assert!(g.tortoise(1e8).unwrap().abs() < 1.1e-8);
        // continuous across the split at 2 r_+
        let below = g.tortoise(0.2 - 1e-12).unwrap();
        let above = g.tortoise(0.2).unwrap();
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn tortoise_inverse_round_trip() {
        let g = Geometry::new(0.1).unwrap();
        for r in [0.1000001, 0.10001, 0.13, 0.2, 1.0, 30.0] {
            let rs = g.tortoise(r).unwrap();
            let back = g.radius_at_tortoise(rs).unwrap();
            assert!(((back - r) / (r - 0.1)).abs() < 1e-8, "r = {r}: {back}");
        }
    }

    #[test]
    fn inverse_cubic_recovers_horizon() {
        for rp in [1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 50.0] {
            let g = Geometry::new(rp).unwrap();
            let back = Geometry::from_mass_parameter(g.r0()).unwrap();
            assert!(close(back.r_plus(), rp, 1e-14), "{rp}: {}", back.r_plus());
        }
    }

    #[test]
    fn circular_values() {
        let g = Geometry::new(0.1).unwrap();
        let k = g.circular_kinematics(1.0).unwrap();
        assert!(close(k.a, (2.0_f64 / 1.697).sqrt(), 1e-14));
        assert!(close(k.b, (2.101_f64 / 1.697).sqrt(), 1e-14));
        assert!(matches!(
            g.circular_kinematics(0.15),
            Err(Error::NoCircularOrbit { .. })
        ));
    }

    #[test]
    fn local_temperature_values() {
        let g = Geometry::new(0.1).unwrap();
        let t = g.local_temperature(1.0).unwrap();
        assert!(close(t, g.hawking_temperature() / 1.899_f64.sqrt(), 1e-14));
        assert!(close(t, 0.594792, 1e-5));
        let far = g.local_temperature(1e4).unwrap();
        assert!(close(far * 1e4, g.hawking_temperature(), 1e-7));
        assert!(g.local_temperature(0.1 + 1e-12).unwrap() > 1e4);
    }

    #[test]
    fn identity_rescale() {
        let g = Geometry::new(0.3).unwrap();
        let s = g.rescale(1.0).unwrap();
        assert_eq!(s.r_plus, g.r_plus());
        assert!(close(s.hawking_temperature, g.hawking_temperature(), 1e-15));
        assert!(close(s.tortoise(1.0).unwrap(), g.tortoise(1.0).unwrap(), 1e-14));
        assert!(g.rescale(0.0).is_err());
    }
}
