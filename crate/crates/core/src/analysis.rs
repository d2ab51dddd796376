//! Resonance analysis: WKB scattering data, peak scans and the small-hole fit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::quadrature::integrate;
use crate::radial::{build_series, complex_rhs, q_reduced, u_of_r, SeriesBranch, SolverSettings};
use crate::response::{
    golden_max, rate_for_l, DetectorSpec, EnergyAxis, ModeProvider, RateCurve, Trajectory, Vacuum,
};

/// Largest accepted relative misfit of the plane-wave matching.
pub const MATCHING_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterData {
    pub omega: f64,
    pub l: u32,
    pub omega_prime: f64,
    /// Reflection amplitude at the boundary.
    pub a: Complex64,
    /// Transmission amplitude into the horizon.
    pub b: Complex64,
    pub c: f64,
    /// Largest `|k'|/k^2` over the two matching windows.
    pub wkb_validity: f64,
    /// `|k'|/k^2` at the boundary itself.
    pub boundary_validity: f64,
    pub matching_residual: f64,
}

impl ScatterData {
    /// `|A|^2 + |B|^2 - 1`.
    pub fn flux_defect(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() - 1.0
    }
}

/// `C = |B|/|A + 1|`; infinite when `A = -1` exactly.
pub fn peak_coefficient(a: Complex64, b: Complex64) -> f64 {
    let den = (a + 1.0).norm();
    if den == 0.0 {
        f64::INFINITY
    } else {
        b.norm() / den
    }
}

fn effective_potential_u(g: &Geometry, ll: f64, u: f64) -> (f64, f64) {
    // V~ and dV~/dr* as functions of u = ln(x_+ - x).
    let sigma = u.exp();
    let x = g.x_plus() - sigma;
    let q = q_reduced(g, x);
    let dq = 2.0 * g.r0() * x + g.r_plus() * g.r_plus();
    let w = ll + g.r0() * x;
    let v = sigma * q * w;
    let dv_dsigma = q * w - sigma * dq * w - sigma * q * g.r0();
    (v, dv_dsigma * sigma * q)
}

/// Solves two-sided least squares `y ~ alpha f + beta h` for complex samples.
fn fit_pair(rows: &[(Complex64, Complex64, Complex64)]) -> (Complex64, Complex64, f64) {
    let (mut ff, mut fh, mut hh) = (0.0, Complex64::new(0.0, 0.0), 0.0);
    let (mut fy, mut hy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut yy = 0.0;
    for &(f, h, y) in rows {
        ff += f.norm_sqr();
        hh += h.norm_sqr();
        fh += f.conj() * h;
        fy += f.conj() * y;
        hy += h.conj() * y;
        yy += y.norm_sqr();
    }
    let det = ff * hh - fh.norm_sqr();
    let alpha = (fy * hh - fh * hy) / det;
    let beta = (hy * ff - fh.conj() * fy) / det;
    let res: f64 = rows
        .iter()
        .map(|&(f, h, y)| (alpha * f + beta * h - y).norm_sqr())
        .sum();
    (alpha, beta, (res / yy).sqrt())
}

/// Scattering amplitudes for a unit wave `e^{-i w' r*}/sqrt(w')` sent in from
/// the boundary, matched to ingoing `B e^{-i w r*}/sqrt(w)` at the horizon.
///
/// The boundary basis is integrated from plane-wave data at `r* = 0`, so it
/// carries no WKB truncation error; `wkb_validity` reports `|k'|/k^2` anyway.
pub fn wkb_scatter(g: &Geometry, omega: f64, l: u32, settings: &SolverSettings) -> Result<ScatterData> {
    let ll = (l as f64) * (l as f64 + 1.0);
    if !(omega.is_finite() && omega * omega > ll && omega > 0.0) {
        return Err(Error::OutOfRegime { omega, l });
    }
    let omega_prime = (omega * omega - ll).sqrt();
    let xp = g.x_plus();
    let kappa = g.surface_gravity();

    // Horizon window: V~ < 1e-8 w^2, i.e. xi below xi_h.
    let xi_h = 1e-8 * omega * omega / (xp * kappa * (ll + g.r0() * xp));
    let xi_seed = xi_h * 1e-8;
    let horizon = build_series(
        g,
        omega,
        l,
        SeriesBranch::In,
        settings.horizon_terms.max(5),
        settings.recurrence,
    )?;
    let u_seed = (xp * xi_seed).ln();
    let u_h = (xp * xi_h).ln();
    let u_boundary = xp.ln();
    let rstar_h = g.tortoise(g.r_plus() / (1.0 - xi_h))?;
    // r_+/(1 - xi_seed) rounds to r_+, so step r* down from xi_h instead
    let rstar_seed = rstar_h - integrate(|u| 1.0 / q_reduced(g, xp - u.exp()), u_seed, u_h, 1e-14);
    let (psi, dpsi) = horizon.eval_xi(xi_seed);
    let phase = Complex64::from_polar(1.0, -omega * rstar_seed);
    let value = phase * psi;
    let deriv = phase * (dpsi * xi_seed * q_reduced(g, xp - xp * xi_seed) - Complex64::new(0.0, omega) * psi);
    let samples = 48;
    let mut checkpoints: Vec<f64> = (1..=samples)
        .map(|k| u_seed + (u_h - u_seed) * k as f64 / samples as f64)
        .collect();
    let horizon_count = checkpoints.len();
    // Boundary window: last 5% of the r* range.
    for k in 0..=samples {
        let rs = 0.05 * rstar_h * (1.0 - k as f64 / samples as f64);
        let r = if rs == 0.0 { f64::INFINITY } else { g.radius_at_tortoise(rs)? };
        checkpoints.push(u_of_r(g, r));
    }

    let rhs = complex_rhs(g, omega, l);
    let stepper = settings.stepper();
    let states = stepper.integrate_through(
        &rhs,
        u_seed,
        [rstar_seed, value.re, value.im, deriv.re, deriv.im],
        &checkpoints,
        |_, _| {},
    )?;

    // Horizon fit against e^{-i w r*}, e^{+i w r*}.
    let mut rows = Vec::new();
    for s in &states[..horizon_count] {
        let rs = s[0];
        let y = Complex64::new(s[1], s[2]);
        let dy = Complex64::new(s[3], s[4]) / omega;
        let e_in = Complex64::from_polar(1.0, -omega * rs);
        let e_out = e_in.conj();
        rows.push((e_in, e_out, y));
        rows.push((-Complex64::i() * e_in, Complex64::i() * e_out, dy));
    }
    let (h_in, _h_out, res_h) = fit_pair(&rows);

    // Boundary fit against the solutions equal to e^{-+i w' r*} (value and
    // slope) at r* = 0; the second is the conjugate of the first.
    let mut back: Vec<f64> = checkpoints[horizon_count..].to_vec();
    back.reverse();
    let basis = stepper.integrate_through(&rhs, u_boundary, [0.0, 1.0, 0.0, 0.0, -omega_prime], &back, |_, _| {})?;
    let mut validity = 0.0_f64;
    let mut rows = Vec::new();
    let window = states[horizon_count..].iter().zip(basis.iter().rev());
    for ((s, w), &u) in window.zip(&checkpoints[horizon_count..]) {
        let (v, dv) = effective_potential_u(g, ll, u);
        let k = (omega * omega - v).sqrt();
        validity = validity.max((dv / (2.0 * k)).abs() / (k * k));
        let w_minus = Complex64::new(w[1], w[2]);
        let dw_minus = Complex64::new(w[3], w[4]) / omega_prime;
        rows.push((w_minus, w_minus.conj(), Complex64::new(s[1], s[2])));
        rows.push((dw_minus, dw_minus.conj(), Complex64::new(s[3], s[4]) / omega_prime));
    }
    let (alpha, beta, res_b) = fit_pair(&rows);
    let matching_residual = res_h.max(res_b);
    if !(matching_residual <= MATCHING_LIMIT) {
        return Err(Error::MatchingAccuracy {
            residual: matching_residual,
            limit: MATCHING_LIMIT,
        });
    }
    let horizon_validity = {
        let (v, dv) = effective_potential_u(g, ll, u_h);
        let k = (omega * omega - v).sqrt();
        (dv / (2.0 * k)).abs() / (k * k)
    };
    let a = beta / alpha;
    let b = h_in * (omega / omega_prime).sqrt() / alpha;
    let boundary_validity = {
        let (v, dv) = effective_potential_u(g, ll, u_boundary);
        let k = (omega * omega - v).sqrt();
        (dv / (2.0 * k)).abs() / (k * k)
    };
    Ok(ScatterData {
        omega,
        l,
        omega_prime,
        a,
        b,
        c: peak_coefficient(a, b),
        wkb_validity: validity.max(horizon_validity),
        boundary_validity,
        matching_residual,
    })
}

/// AdS normal-mode frequency `omega R = 2 + l + 2n` of the conformal scalar.
pub fn ads_normal_mode(l: u32, n: u32) -> f64 {
    (2 + l + 2 * n) as f64
}

/// Minimally coupled counterpart `3 + l + 2n`, for reference only.
pub fn minimal_coupling_mode(l: u32, n: u32) -> f64 {
    (3 + l + 2 * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub l: u32,
    pub n: u32,
    pub e_over_tloc: f64,
    pub omega_tilde: f64,
    pub height: f64,
    /// Half-width at half-maximum in `E/T_loc`.
    pub half_width: f64,
    /// Exponential-trend baseline at the peak.
    pub baseline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Required ratio of height to the local exponential baseline.
    pub prominence: f64,
    /// Baseline window half-width in abscissa units (`E/T_loc` for scans).
    pub window: f64,
    /// Relative precision of the refined location.
    pub rel_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            prominence: 1.5,
            window: 1.0,
            rel_tol: 1e-12,
        }
    }
}

/// Least-squares line through `(x, ln y)` for positive `y`.
fn log_linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0 && p.1.is_finite())
        .map(|&(x, y)| (x, y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Some((my - slope * mx, slope))
}

/// Exponential trend at `x` from every sample within `window` of the candidate
/// `i`, excluding the candidate and its two neighbours on each side.
fn baseline_at(xs: &[f64], ys: &[f64], i: usize, x: f64, window: f64) -> Option<f64> {
    let lo = xs.partition_point(|&v| v < xs[i] - window);
    let hi = xs.partition_point(|&v| v <= xs[i] + window).saturating_sub(1);
    let excluded = |j: usize| j + 2 >= i && j <= i + 2;
    let all: Vec<(f64, f64)> = (lo..=hi).filter(|&j| !excluded(j)).map(|j| (xs[j], ys[j])).collect();
    let (c0, c1) = log_linear_fit(&all)?;
    Some((c0 + c1 * x).exp())
}

/// Interior local maxima of `values`, refined with `eval`.
fn peaks_on_grid<F: Fn(f64) -> Result<f64>>(
    xs: &[f64],
    values: &[f64],
    eval: F,
    options: &ScanOptions,
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let mut out = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if !(b.is_finite() && a.is_finite() && c.is_finite()) || !(b > a && b >= c) {
            continue;
        }
        let (x, h) = golden_max(&eval, xs[i - 1], xs[i + 1], options.rel_tol)?;
        let (x, h) = if h >= b { (x, h) } else { (xs[i], b) };
        let Some(base) = baseline_at(xs, values, i, x, options.window) else {
            continue;
        };
        if h < options.prominence * base {
            continue;
        }
        let hw = half_width(&eval, xs, i, x, h)?;
        out.push((x, h, hw, base));
    }
    Ok(out)
}

fn bisect_level<F: Fn(f64) -> Result<f64>>(eval: &F, mut inside: f64, mut outside: f64, level: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if eval(mid)? >= level {
            inside = mid;
        } else {
            outside = mid;
        }
        if (outside - inside).abs() <= 1e-12 * mid.abs().max(1e-12) {
            break;
        }
    }
    Ok(0.5 * (inside + outside))
}

fn half_width<F: Fn(f64) -> Result<f64>>(eval: &F, xs: &[f64], i: usize, x: f64, h: f64) -> Result<f64> {
    let level = 0.5 * h;
    let mut sides = Vec::new();
    // walk outward grid point by grid point until the curve drops below half
    for dir in [-1i64, 1] {
        let mut j = i as i64 + if dir < 0 { -1 } else { 1 };
        let mut found = None;
        while j >= 0 && (j as usize) < xs.len() {
            let xj = xs[j as usize];
            if (xj - x) * dir as f64 > 0.0 && eval(xj)? < level {
                found = Some(xj);
                break;
            }
            j += dir;
        }
        if let Some(out) = found {
            sides.push((bisect_level(eval, x, out, level)? - x).abs());
        }
    }
    Ok(match sides.len() {
        0 => f64::NAN,
        1 => sides[0],
        _ => 0.5 * (sides[0] + sides[1]),
    })
}

/// Resonance peaks of the `l` contribution of a static curve.
pub fn scan_peaks<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    curve: &RateCurve,
    l: u32,
    source: &P,
    options: &ScanOptions,
) -> Result<Vec<PeakRecord>> {
    if curve.axis != EnergyAxis::OverLocalTemperature || spec.trajectory != Trajectory::Static {
        return Err(Error::Configuration("peak scans need a static curve in E/T_loc".into()));
    }
    let Some(values) = curve.contribution(l) else {
        return Err(Error::Configuration(format!("curve has no l = {l} contribution")));
    };
    let eval = |y: f64| rate_for_l(g, spec, y, l, source);
    let found = peaks_on_grid(&curve.energies, values, eval, options)?;
    Ok(number_peaks(g, l, found))
}

fn number_peaks(g: &Geometry, l: u32, found: Vec<(f64, f64, f64, f64)>) -> Vec<PeakRecord> {
    let th = g.hawking_temperature();
    let mut records: Vec<PeakRecord> = found
        .into_iter()
        .map(|(y, h, hw, base)| PeakRecord {
            l,
            n: 0,
            e_over_tloc: y,
            omega_tilde: th * y,
            height: h,
            half_width: hw,
            baseline: base,
        })
        .collect();
    // number by increasing |omega~| separately on each side of E = 0
    for negative in [true, false] {
        let mut idx: Vec<usize> = (0..records.len())
            .filter(|&k| (records[k].e_over_tloc < 0.0) == negative)
            .collect();
        idx.sort_by(|&a, &b| records[a].e_over_tloc.abs().total_cmp(&records[b].e_over_tloc.abs()));
        for (n, k) in idx.into_iter().enumerate() {
            records[k].n = n as u32;
        }
    }
    records
}

/// A near-zero of one `l` contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipRecord {
    pub l: u32,
    pub e_over_tloc: f64,
    pub value: f64,
    /// Median of the contribution over the neighbouring grid points.
    pub neighbourhood_median: f64,
    /// `R(omega~, r)` at the two bracketing grid points.
    pub bracket: (f64, f64),
}

impl DipRecord {
    pub fn brackets_sign_change(&self) -> bool {
        self.bracket.0 * self.bracket.1 < 0.0
    }
}

/// Local minima of the `l` contribution deeper than `depth` times the median
/// of the `2 * neighbours + 1` surrounding samples, refined by golden section.
pub fn find_dips<P: ModeProvider + ?Sized>(
    g: &Geometry,
    spec: &DetectorSpec,
    curve: &RateCurve,
    l: u32,
    source: &P,
    depth: f64,
    neighbours: usize,
) -> Result<Vec<DipRecord>> {
    if curve.axis != EnergyAxis::OverLocalTemperature || spec.trajectory != Trajectory::Static {
        return Err(Error::Configuration("dip scans need a static curve in E/T_loc".into()));
    }
    let Some(v) = curve.contribution(l) else {
        return Err(Error::Configuration(format!("curve has no l = {l} contribution")));
    };
    let e = &curve.energies;
    let th = g.hawking_temperature();
    let mut out = Vec::new();
    for i in 1..e.len().saturating_sub(1) {
        if !(v[i] < v[i - 1] && v[i] <= v[i + 1]) {
            continue;
        }
        let (x, neg) = golden_max(|y| rate_for_l(g, spec, y, l, source).map(|f| -f), e[i - 1], e[i + 1], 1e-13)?;
        let lo = i.saturating_sub(neighbours);
        let hi = (i + neighbours).min(e.len() - 1);
        let mut window: Vec<f64> = v[lo..=hi].iter().copied().filter(|x| x.is_finite()).collect();
        window.sort_by(|a, b| a.total_cmp(b));
        let median = window[window.len() / 2];
        let value = (-neg).min(v[i]);
        if !(value < depth * median) {
            continue;
        }
        let bracket = (
            source.radial(g, th * e[i - 1].abs(), l, spec.radius)?,
            source.radial(g, th * e[i + 1].abs(), l, spec.radius)?,
        );
        out.push(DipRecord {
            l,
            e_over_tloc: x,
            value,
            neighbourhood_median: median,
            bracket,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub r_plus: f64,
    /// Peak `omega~ R`, or `None` where the peak is no longer resolved.
    pub omega_tilde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub l: u32,
    pub n: u32,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub residual_norm: f64,
    pub residuals: Vec<f64>,
    pub samples: Vec<FitSample>,
}

impl FitResult {
    pub fn predict(&self, r_plus: f64) -> f64 {
        self.c0 + self.c1 * r_plus + self.c2 * r_plus * r_plus
    }
}

/// Unweighted least-squares quadratic through `(x, y)` via the normal
/// equations on centred, scaled abscissae.
pub fn quadratic_fit(points: &[(f64, f64)]) -> Result<([f64; 3], Vec<f64>)> {
    if points.len() < 4 {
        return Err(Error::InsufficientData {
            surviving: points.len(),
            required: 4,
        });
    }
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = points.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max).max(1e-300);
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &(x, y) in points {
        let t = (x - mean) / scale;
        let basis = [1.0, t, t * t];
        for i in 0..3 {
            rhs[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let d = solve3(m, rhs)?;
    // back to powers of x
    let (a, b) = (mean, scale);
    let c2 = d[2] / (b * b);
    let c1 = d[1] / b - 2.0 * a * d[2] / (b * b);
    let c0 = d[0] - d[1] * a / b + d[2] * a * a / (b * b);
    let residuals = points
        .iter()
        .map(|&(x, y)| y - (c0 + c1 * x + c2 * x * x))
        .collect();
    Ok(([c0, c1, c2], residuals))
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::InsufficientData { surviving: 0, required: 3 });
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - s) / m[row][row];
    }
    Ok(x)
}

/// Settings of the frequency scan behind [`peak_vs_rplus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakScan {
    pub omega_min: f64,
    /// Scan up to `ads_normal_mode(l, n) + margin`.
    pub margin: f64,
    pub step: f64,
    pub options: ScanOptions,
}

impl Default for PeakScan {
    fn default() -> Self {
        PeakScan {
            omega_min: 0.3,
            margin: 1.5,
            step: 0.002,
            options: ScanOptions::default(),
        }
    }
}

/// Static Hartle-Hawking peaks of a single `l` for a detector at `ratio * r_+`,
/// from a scan in `omega~`.
pub fn static_peaks<P: ModeProvider + ?Sized>(
    g: &Geometry,
    l: u32,
    ratio: f64,
    scan: &PeakScan,
    omega_max: f64,
    source: &P,
) -> Result<Vec<PeakRecord>> {
    let spec = DetectorSpec::new(Trajectory::Static, ratio * g.r_plus(), Vacuum::HartleHawking, l);
    spec.validate(g)?;
    let th = g.hawking_temperature();
    let count = ((omega_max - scan.omega_min) / scan.step).ceil() as usize + 1;
    let ys: Vec<f64> = (0..count)
        .map(|i| (scan.omega_min + i as f64 * scan.step) / th)
        .collect();
    let values = map_values(&ys, |y| rate_for_l(g, &spec, y, l, source))?;
    let eval = |y: f64| rate_for_l(g, &spec, y, l, source);
    let found = peaks_on_grid(&ys, &values, eval, &scan.options)?;
    Ok(number_peaks(g, l, found))
}

#[cfg(feature = "parallel")]
fn map_values<F: Fn(f64) -> Result<f64> + Sync>(xs: &[f64], f: F) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    xs.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_values<F: Fn(f64) -> Result<f64>>(xs: &[f64], f: F) -> Result<Vec<f64>> {
    xs.iter().map(|&x| f(x)).collect()
}

/// Peak frequency of the `(l, n)` resonance against `r_+` at fixed `r/r_+`,
/// with a quadratic fit `c0 + c1 r_+ + c2 r_+^2`.
pub fn peak_vs_rplus<P: ModeProvider + ?Sized>(
    l: u32,
    n: u32,
    r_plus: &[f64],
    ratio: f64,
    scan: &PeakScan,
    source: &P,
) -> Result<FitResult> {
    let omega_max = ads_normal_mode(l, n) + scan.margin;
    let mut samples = Vec::with_capacity(r_plus.len());
    for &rp in r_plus {
        let g = Geometry::new(rp)?;
        let peaks = static_peaks(&g, l, ratio, scan, omega_max, source)?;
        let hit = peaks
            .iter()
            .find(|p| p.n == n && p.e_over_tloc > 0.0)
            .map(|p| p.omega_tilde);
        samples.push(FitSample {
            r_plus: rp,
            omega_tilde: hit,
        });
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.omega_tilde.map(|w| (s.r_plus, w)))
        .collect();
    let (c, residuals) = quadratic_fit(&points)?;
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(FitResult {
        l,
        n,
        c0: c[0],
        c1: c[1],
        c2: c[2],
        residual_norm,
        residuals,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_coefficient_cases() {
        let c = |re: f64, b: f64| peak_coefficient(Complex64::new(re, 0.0), Complex64::new(b, 0.0));
        assert_eq!(c(0.0, 1.0), 1.0);
        assert!((c(-0.8, 0.6) - 3.0).abs() < 1e-12);
        assert!((c(0.8, 0.6) - 1.0 / 3.0).abs() < 1e-12);
        assert!(c(-1.0, 0.0).is_infinite());
        // closed forms on the real axis with |A|^2 + |B|^2 = 1
        for a in [0.1_f64, 0.5, 0.9] {
            let b = (1.0 - a * a).sqrt();
            assert!((c(-a, b) - b / (1.0 - a)).abs() < 1e-12);
            assert!((c(a, b) - b / (1.0 + a)).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_modes() {
        assert_eq!(ads_normal_mode(0, 0), 2.0);
        assert_eq!(ads_normal_mode(1, 0), 3.0);
        assert_eq!(ads_normal_mode(0, 1), 4.0);
        assert_eq!(minimal_coupling_mode(0, 0), 3.0);
    }

    #[test]
    fn quadratic_fit_recovers_exact_polynomial() {
        let pts: Vec<(f64, f64)> = [0.002, 0.005, 0.01, 0.02, 0.05]
            .iter()
            .map(|&x| (x, 2.0 - 1.3 * x + 4.0 * x * x))
            .collect();
        let (c, res) = quadratic_fit(&pts).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10);
        assert!((c[1] + 1.3).abs() < 1e-8);
        assert!((c[2] - 4.0).abs() < 1e-6);
        assert!(res.iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(
            quadratic_fit(&pts[..3]),
            Err(Error::InsufficientData { surviving: 3, required: 4 })
        ));
    }

    #[test]
    fn grid_peaks_with_baseline() {
        // exponential trend plus one narrow Lorentzian
        let f = |x: f64| (-x).exp() + 5.0 / (1.0 + ((x - 2.0) / 0.01).powi(2));
        let xs: Vec<f64> = (0..401).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let found = peaks_on_grid(&xs, &ys, |x| Ok(f(x)), &ScanOptions::default()).unwrap();
        assert_eq!(found.len(), 1);
        let (x, h, hw, _) = found[0];
        // the trend slope pulls the maximum left by e^{-2} gamma^2 / (2 * 5)
        assert!((x - (2.0 - (-2.0f64).exp() * 1e-4 / 10.0)).abs() < 1e-8);
        assert!(h > 5.0);
        assert!((hw - 0.01).abs() < 1e-3);
        // a bump below 1.5x the trend is not a peak
        let weak = |x: f64| (-x).exp() * (1.0 + 0.2 / (1.0 + ((x - 2.0) / 0.05).powi(2)));
        let ys: Vec<f64> = xs.iter().map(|&x| weak(x)).collect();
        assert!(peaks_on_grid(&xs, &ys, |x| Ok(weak(x)), &ScanOptions::default())
            .unwrap()
            .is_empty());
    }
}
