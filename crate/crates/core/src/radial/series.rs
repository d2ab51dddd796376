//! Frobenius expansion of the in/out radial modes about the horizon in `x = 1/r`.
//!
//! With `y = x - x_+` the radial equation takes the form
//! `y^2 s(x) psi'' + y t(x) psi' + u(x) psi = 0`. The quartics carry a common
//! factor `x^2`; dividing it out leaves quadratics whose three-term recurrence is
//! numerically stable, whereas the five-term recurrence of the quartic form also
//! admits a parasitic solution growing from the spurious point `x = 0`. Both are
//! available; [`Recurrence::Reduced`] is the default.
//!
//! Coefficients are stored scaled, `b_n = a_n (-x_+)^n`, so that
//! `psi = sum_n b_n xi^n` with `xi = 1 - r_+/r` and the AdS boundary at `xi = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesBranch {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Recurrence {
    /// Three-term recurrence of the reduced (quadratic) equation.
    #[default]
    Reduced,
    /// Five-term recurrence of the quartic equation.
    FiveTerm,
}

/// Polynomial coefficients in powers of `x` (index = power).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartics {
    pub s: [Complex64; 5],
    pub t: [Complex64; 5],
    pub u: [Complex64; 5],
}

impl Quartics {
    pub fn new(g: &Geometry, omega: f64, l: u32, branch: SeriesBranch) -> Self {
        let rp = g.r_plus();
        let r0 = g.r0();
        let xp = g.x_plus();
        let ll = (l as f64) * (l as f64 + 1.0);
        let sign = match branch {
            SeriesBranch::In => -1.0,
            SeriesBranch::Out => 1.0,
        };
        let c = |v: f64| Complex64::new(v, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Quartics {
            s: [z, z, c(rp), c(rp * rp), c(r0)],
            t: [z, z, Complex64::new(0.0, 2.0 * sign * omega), c(-2.0), c(3.0 * r0)],
            u: [z, z, c(-ll * xp), c(ll - r0 * xp), c(r0)],
        }
    }

    pub fn eval(&self, x: f64) -> (Complex64, Complex64, Complex64) {
        (horner(&self.s, x), horner(&self.t, x), horner(&self.u, x))
    }
}

fn horner(c: &[Complex64], x: f64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * x + v)
}

/// Re-expands `sum_k c_k x^k` as `sum_j d_j (x - x0)^j`.
pub fn taylor_shift<const N: usize>(c: &[Complex64; N], x0: f64) -> [Complex64; N] {
    let mut d = *c;
    // Repeated synthetic division (Horner's shift), exact up to rounding.
    for i in 0..N {
        for j in (i..N - 1).rev() {
            let carry = d[j + 1] * x0;
            d[j] += carry;
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub branch: SeriesBranch,
    pub recurrence: Recurrence,
    pub omega: f64,
    pub l: u32,
    pub x_plus: f64,
    /// Taylor tables of the quartics about `x_+`, in powers of `y = x - x_+`.
    pub s: [Complex64; 5],
    pub t: [Complex64; 5],
    pub u: [Complex64; 5],
    scaled: Vec<Complex64>,
}

impl SeriesSolution {
    /// Truncation order `N` (coefficients `0..=N`).
    pub fn order(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `b_n = a_n (-x_+)^n`.
    pub fn scaled_coefficients(&self) -> &[Complex64] {
        &self.scaled
    }

    /// Unscaled `a_n`; underflows to zero for large `n` when `x_+ > 1`.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.scaled[n] * (-1.0 / self.x_plus).powi(n as i32)
    }

    /// Partial sum `psi(xi) = sum_{n<=N} b_n xi^n` and its `xi` derivative.
    pub fn eval_xi(&self, xi: f64) -> (Complex64, Complex64) {
        eval_scaled(&self.scaled, xi)
    }

    /// `psi` at radius `r`.
    pub fn eval_r(&self, r: f64) -> Complex64 {
        self.eval_xi(1.0 - 1.0 / (self.x_plus * r)).0
    }

    /// Sum at the AdS boundary (`x = 0`), i.e. `sum a_n (-x_+)^n`.
    pub fn boundary_sum(&self) -> Complex64 {
        self.scaled.iter().sum()
    }

    /// Largest relative residual when the coefficients are substituted back into
    /// the five-term recurrence, `|a_n + (1/P_n) sum_k (...) a_k| / |a_n|`.
    pub fn five_term_residual(&self) -> f64 {
        let (s, t, u) = scaled_tables(&self.s, &self.t, &self.u, self.x_plus);
        let b = &self.scaled;
        let mut worst = 0.0_f64;
        for n in 1..b.len() {
            let pn = indicial(&s, &t, n);
            let acc = recurrence_sum(&s, &t, &u, b, n);
            let res = (b[n] + acc / pn).norm();
            let scale = b[n].norm();
            if scale > 0.0 {
                worst = worst.max(res / scale);
            } else if res > 0.0 {
                worst = f64::INFINITY;
            }
        }
        worst
    }
}

pub(crate) fn eval_scaled(b: &[Complex64], xi: f64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in b.iter().rev() {
        d = d * xi + v;
        v = v * xi + c;
    }
    (v, d)
}

fn indicial<const K: usize>(s: &[Complex64; K], t: &[Complex64; K], n: usize) -> Complex64 {
    let nf = n as f64;
    s[0] * (nf * (nf - 1.0)) + t[0] * nf
}

#[allow(clippy::needless_range_loop)]
fn recurrence_sum<const K: usize>(
    s: &[Complex64; K],
    t: &[Complex64; K],
    u: &[Complex64; K],
    b: &[Complex64],
    n: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in n.saturating_sub(K - 1)..n {
        let d = n - k;
        let kf = k as f64;
        acc += (s[d] * (kf * (kf - 1.0)) + t[d] * kf + u[d]) * b[k];
    }
    acc
}

fn scaled_tables<const K: usize>(
    s: &[Complex64; K],
    t: &[Complex64; K],
    u: &[Complex64; K],
    x_plus: f64,
) -> ([Complex64; K], [Complex64; K], [Complex64; K]) {
    let h = -x_plus;
    let scale = |c: &[Complex64; K]| {
        let mut out = *c;
        let mut p = 1.0;
        for v in out.iter_mut() {
            *v *= p;
            p *= h;
        }
        out
    };
    (scale(s), scale(t), scale(u))
}

fn run_recurrence<const K: usize>(
    s: &[Complex64; K],
    t: &[Complex64; K],
    u: &[Complex64; K],
    x_plus: f64,
    order: usize,
    mut visit: impl FnMut(usize, Complex64) -> bool,
) -> Result<Vec<Complex64>> {
    let (s, t, u) = scaled_tables(s, t, u, x_plus);
    let mut b = Vec::with_capacity(order + 1);
    b.push(Complex64::new(1.0, 0.0));
    if !visit(0, b[0]) {
        return Ok(b);
    }
    for n in 1..=order {
        let pn = indicial(&s, &t, n);
        if pn == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateIndicial { n });
        }
        let next = -recurrence_sum(&s, &t, &u, &b, n) / pn;
        b.push(next);
        if !visit(n, next) {
            break;
        }
    }
    Ok(b)
}

/// Quadratic tables of the reduced equation, shifted to `y = x - x_+`.
fn reduced_tables(q: &Quartics, x_plus: f64) -> ([Complex64; 3], [Complex64; 3], [Complex64; 3]) {
    let cut = |c: &[Complex64; 5]| [c[2], c[3], c[4]];
    (
        taylor_shift(&cut(&q.s), x_plus),
        taylor_shift(&cut(&q.t), x_plus),
        taylor_shift(&cut(&q.u), x_plus),
    )
}

/// Builds the series for `psi^{in}` or `psi^{out}` to order `N`.
pub fn build_series(
    g: &Geometry,
    omega: f64,
    l: u32,
    branch: SeriesBranch,
    order: usize,
    recurrence: Recurrence,
) -> Result<SeriesSolution> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    if order < 5 {
        return Err(Error::domain(format!("series order must be at least 5, got {order}")));
    }
    let xp = g.x_plus();
    let q = Quartics::new(g, omega, l, branch);
    let s = taylor_shift(&q.s, xp);
    let t = taylor_shift(&q.t, xp);
    let u = taylor_shift(&q.u, xp);
    let scaled = match recurrence {
        Recurrence::FiveTerm => run_recurrence(&s, &t, &u, xp, order, |_, _| true)?,
        Recurrence::Reduced => {
            let (s3, t3, u3) = reduced_tables(&q, xp);
            run_recurrence(&s3, &t3, &u3, xp, order, |_, _| true)?
        }
    };
    Ok(SeriesSolution {
        branch,
        recurrence,
        omega,
        l,
        x_plus: xp,
        s,
        t,
        u,
        scaled,
    })
}

/// Outcome of a boundary-phase computation by partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub theta0: f64,
    /// `(N, phase)` for each schedule entry reached.
    pub history: Vec<(usize, f64)>,
    pub converged_at: usize,
    pub boundary_sum: Complex64,
    /// Coefficients `A, B` with `A S_in + B S_out = 0` (normalised to `B = 1`).
    pub a: Complex64,
    pub b: Complex64,
}

/// Phase `theta0 = arg sum_n a_n (-x_+)^n`, tracked along `schedule`.
///
/// Converged once two successive schedule entries agree to `tol`; the phase is
/// unwrapped along the schedule and reported in `(-pi, pi]`.
pub fn theta0_series(
    g: &Geometry,
    omega: f64,
    l: u32,
    schedule: &[usize],
    tol: f64,
    recurrence: Recurrence,
) -> Result<PhaseReport> {
    let (report, _) = theta0_series_with_solution(g, omega, l, schedule, tol, recurrence)?;
    Ok(report)
}

pub(crate) fn theta0_series_with_solution(
    g: &Geometry,
    omega: f64,
    l: u32,
    schedule: &[usize],
    tol: f64,
    recurrence: Recurrence,
) -> Result<(PhaseReport, SeriesSolution)> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("frequency must be positive, got {omega}")));
    }
    let mut schedule: Vec<usize> = schedule.iter().copied().filter(|&n| n >= 5).collect();
    schedule.sort_unstable();
    schedule.dedup();
    let Some(&n_max) = schedule.last() else {
        return Err(Error::domain("empty truncation schedule"));
    };
    let xp = g.x_plus();
    let q = Quartics::new(g, omega, l, SeriesBranch::In);
    let s = taylor_shift(&q.s, xp);
    let t = taylor_shift(&q.t, xp);
    let u = taylor_shift(&q.u, xp);

    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut next = 0usize;
    let mut converged_at = None;
    let mut last_phase = f64::NAN;
    let mut small_steps = 0usize;
    let mut visit = |n: usize, b: Complex64| -> bool {
        sum += b;
        if next < schedule.len() && n == schedule[next] {
            next += 1;
            let mut phase = sum.arg();
            if let Some(&(_, prev)) = history.last() {
                // keep the history continuous
                phase += (2.0 * std::f64::consts::PI) * ((prev - phase) / (2.0 * std::f64::consts::PI)).round();
                if (phase - prev).abs() < tol {
                    small_steps += 1;
                } else {
                    small_steps = 0;
                }
            }
            history.push((n, phase));
            last_phase = phase;
            if small_steps >= 2 {
                converged_at = Some(n);
                return false;
            }
        }
        true
    };
    let scaled = match recurrence {
        Recurrence::FiveTerm => run_recurrence(&s, &t, &u, xp, n_max, &mut visit)?,
        Recurrence::Reduced => {
            let (s3, t3, u3) = reduced_tables(&q, xp);
            run_recurrence(&s3, &t3, &u3, xp, n_max, &mut visit)?
        }
    };
    let Some(converged_at) = converged_at else {
        return Err(Error::SeriesNonConvergence { history });
    };
    let theta0 = wrap_phase(last_phase);
    let boundary_sum: Complex64 = scaled.iter().sum();
    // S_out = conj(S_in) for real omega; B = 1, A = -conj(S)/S.
    let a = -boundary_sum.conj() / boundary_sum;
    let report = PhaseReport {
        theta0,
        history,
        converged_at,
        boundary_sum,
        a,
        b: Complex64::new(1.0, 0.0),
    };
    let solution = SeriesSolution {
        branch: SeriesBranch::In,
        recurrence,
        omega,
        l,
        x_plus: xp,
        s,
        t,
        u,
        scaled,
    };
    Ok((report, solution))
}

/// Maps a phase into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::PI;
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Default truncation schedule `{100, 150, ..., n_max}`.
pub fn default_schedule(n_max: usize) -> Vec<usize> {
    (100..=n_max.max(100)).step_by(50).collect()
}

/// Geometric convergence ratio of the series at the AdS boundary,
/// `x_+ / min |x_+ - x_c|` over the roots `x_c` of `r0 x^2 + r_+^2 x + r_+`.
pub fn convergence_ratio(g: &Geometry) -> f64 {
    let r0 = g.r0();
    let rp = g.r_plus();
    let xp = g.x_plus();
    let disc = Complex64::new(rp.powi(4) - 4.0 * r0 * rp, 0.0).sqrt();
    let roots = [(-rp * rp + disc) / (2.0 * r0), (-rp * rp - disc) / (2.0 * r0)];
    let dist = roots
        .iter()
        .map(|&xc| (Complex64::new(xp, 0.0) - xc).norm())
        .fold(f64::INFINITY, f64::min);
    xp / dist
}
