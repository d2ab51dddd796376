//! End-to-end acceptance checks; prints one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use proptest::test_runner::{Config, TestRunner};
use sads_udw::analysis::{
    find_dips, peak_vs_rplus, quadratic_fit, scan_peaks, static_peaks, wkb_scatter, PeakScan, ScanOptions,
};
use sads_udw::radial::{theta0_series, theta0_wronskian, wrap_phase, Method, SolverSettings};
use sads_udw::response::{
    circular_rate_boulware, energy_grid, sum_l, DetectorSpec, ModeSource, RateCurve, Trajectory, Vacuum,
};
use sads_udw::Geometry;

type Outcome = Result<String, String>;

struct Fig1 {
    g: Geometry,
    src: ModeSource,
    hh: DetectorSpec,
    hh_curve: RateCurve,
    boulware_curve: RateCurve,
}

fn fig1() -> Fig1 {
    let g = Geometry::new(0.1).unwrap();
    let src = ModeSource::new(Method::Auto, SolverSettings::default());
    let grid = energy_grid(-40.0, 40.0, 2001, false).unwrap();
    let hh = DetectorSpec::new(Trajectory::Static, 1.0, Vacuum::HartleHawking, 4);
    let b = DetectorSpec::new(Trajectory::Static, 1.0, Vacuum::Boulware, 4);
    let hh_curve = sum_l(&g, &hh, &grid, &src).unwrap();
    let boulware_curve = sum_l(&g, &b, &grid, &src).unwrap();
    Fig1 { g, src, hh, hh_curve, boulware_curve }
}

fn normal_mode_limit() -> Outcome {
    let g = Geometry::new(0.01).unwrap();
    let src = ModeSource::new(Method::Auto, SolverSettings::default());
    let peaks = static_peaks(&g, 0, 10.0, &PeakScan::default(), 3.5, &src).map_err(|e| e.to_string())?;
    let first = peaks
        .iter()
        .filter(|p| p.e_over_tloc > 0.0)
        .min_by(|a, b| a.e_over_tloc.total_cmp(&b.e_over_tloc))
        .ok_or("no l=0 peak found")?;
    let msg = format!("first l=0 peak at E/T_loc = {:.6}, omega~R = {:.6}", first.e_over_tloc, first.omega_tilde);
    if (first.omega_tilde - 2.0).abs() <= 0.1 { Ok(msg) } else { Err(msg) }
}

fn quadratic_intercept() -> Outcome {
    let src = ModeSource::new(Method::Auto, SolverSettings::default());
    let rp = [0.002, 0.005, 0.01, 0.02, 0.05];
    let fit = peak_vs_rplus(0, 0, &rp, 10.0, &PeakScan::default(), &src).map_err(|e| e.to_string())?;
    let inner: Vec<(f64, f64)> = fit
        .samples
        .iter()
        .filter(|s| s.r_plus < 0.05)
        .filter_map(|s| s.omega_tilde.map(|w| (s.r_plus, w)))
        .collect();
    let (_, res) = quadratic_fit(&inner).map_err(|e| e.to_string())?;
    let without = res.iter().map(|r| r * r).sum::<f64>().sqrt();
    let msg = format!(
        "c0 = {:.6}, c1 = {:.4}, c2 = {:.4}; residual norm {:.3e} with r_+=0.05, {:.3e} without",
        fit.c0, fit.c1, fit.c2, fit.residual_norm, without
    );
    if (fit.c0 - 2.0).abs() <= 0.04 && fit.residual_norm > without { Ok(msg) } else { Err(msg) }
}

fn cross_solver() -> Outcome {
    let g = Geometry::new(0.1).unwrap();
    let s = SolverSettings::default();
    let mut worst = 0.0_f64;
    for l in 0..=4 {
        for w in [0.5, 1.0, 2.0, 4.0] {
            let a = theta0_series(&g, w, l, &s.schedule, s.phase_tol, s.recurrence).map_err(|e| e.to_string())?;
            let b = theta0_wronskian(&g, w, l, &s).map_err(|e| e.to_string())?;
            worst = worst.max(wrap_phase(a.theta0 - b.theta0).abs());
        }
    }
    let msg = format!("max |theta0(series) - theta0(wronskian)| = {worst:.3e} rad");
    if worst < 1e-6 { Ok(msg) } else { Err(msg) }
}

fn detailed_balance(f: &Fig1) -> Outcome {
    let c = &f.hh_curve;
    let n = c.energies.len();
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        if c.shifted[i] || c.shifted[j] || (c.energies[i] + c.energies[j]).abs() > 1e-12 {
            continue;
        }
        let (down, up, y) = (c.total[i], c.total[j], c.energies[j]);
        worst = worst.max((up * y.exp() - down).abs() / down);
        pairs += 1;
    }
    let msg = format!("max relative KMS defect {worst:.3e} over {pairs} symmetric pairs");
    if worst < 1e-10 && pairs > 0 { Ok(msg) } else { Err(msg) }
}

fn boulware_support(f: &Fig1) -> Outcome {
    let c = &f.boulware_curve;
    let nonzero = c.energies.iter().zip(&c.total).filter(|(e, v)| **e > 0.0 && **v != 0.0).count();
    let negative = c.energies.iter().zip(&c.total).filter(|(e, v)| **e < 0.0 && **v > 0.0).count();
    let spec = DetectorSpec::new(Trajectory::Circular, 1.0, Vacuum::Boulware, 4);
    let k = f.g.circular_kinematics(1.0).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut violations = 0;
    for i in 0..=400 {
        let e = -2.0 + 12.0 * i as f64 / 400.0;
        let rows = circular_rate_boulware(&f.g, &spec, e, &f.src).map_err(|e| e.to_string())?;
        for (l, row) in rows.iter().enumerate() {
            if e >= l as f64 * k.b {
                checked += 1;
                if row.iter().sum::<f64>() != 0.0 {
                    violations += 1;
                }
            }
        }
    }
    let msg = format!(
        "static: {nonzero} nonzero points with E>0 ({negative} positive with E<0); circular: {violations}/{checked} per-l values nonzero at E >= l b (b = {:.6})",
        k.b
    );
    if nonzero == 0 && violations == 0 && negative > 0 && checked > 0 { Ok(msg) } else { Err(msg) }
}

fn large_gap_agreement(f: &Fig1) -> Outcome {
    let i = f.hh_curve.energies.iter().position(|&e| e == -40.0).ok_or("no E/T_loc = -40 point")?;
    let ratio = f.hh_curve.total[i] / f.boulware_curve.total[i];
    let thermal = (-40.0f64).exp() / (-(-40.0f64).exp_m1());
    let defect = (ratio - 1.0).abs();
    let msg = format!("F_HH/F_B - 1 = {defect:.3e}; predicted e^-40/(1-e^-40) = {thermal:.3e}");
    if defect < 1e-15 + thermal && (defect - thermal).abs() < 1e-12 { Ok(msg) } else { Err(msg) }
}

fn peak_invariance(f: &Fig1) -> Outcome {
    let step = 80.0 / 2000.0;
    let grid = energy_grid(-40.0, 40.0, 2001, false).unwrap();
    let far = DetectorSpec::new(Trajectory::Static, 1.5, Vacuum::HartleHawking, 4);
    let far_curve = sum_l(&f.g, &far, &grid, &f.src).map_err(|e| e.to_string())?;
    let opts = ScanOptions::default();
    let near = scan_peaks(&f.g, &f.hh, &f.hh_curve, 2, &f.src, &opts).map_err(|e| e.to_string())?;
    let far = scan_peaks(&f.g, &far, &far_curve, 2, &f.src, &opts).map_err(|e| e.to_string())?;
    let nearest = |y: f64, set: &[sads_udw::analysis::PeakRecord]| {
        set.iter().map(|p| (p.e_over_tloc - y).abs()).fold(f64::INFINITY, f64::min)
    };
    let mut worst = 0.0_f64;
    let mut misses = Vec::new();
    for (a, b) in [(&near, &far), (&far, &near)] {
        for p in a.iter() {
            let d = nearest(p.e_over_tloc, b);
            worst = worst.max(d);
            if d > step {
                misses.push(format!("{:.4}(hw {:.2e})", p.e_over_tloc, p.half_width));
            }
        }
    }
    let sharp = near
        .iter()
        .filter(|p| p.half_width < step)
        .map(|p| nearest(p.e_over_tloc, &far))
        .fold(0.0, f64::max);
    misses.sort();
    misses.dedup();
    let msg = format!(
        "{} peaks at r=1, {} at r=1.5; worst offset {worst:.3e} (step {step}); sharp peaks (hw < step) agree to {sharp:.3e}; unmatched: [{}]",
        near.len(),
        far.len(),
        misses.join(", ")
    );
    if worst <= step { Ok(msg) } else { Err(msg) }
}

fn dip_zero(f: &Fig1) -> Outcome {
    let mut total = 0;
    let mut bad = Vec::new();
    for l in 0..=4 {
        let dips = find_dips(&f.g, &f.hh, &f.hh_curve, l, &f.src, 1e-6, 10).map_err(|e| e.to_string())?;
        total += dips.len();
        bad.extend(
            dips.iter()
                .filter(|d| !d.brackets_sign_change())
                .map(|d| format!("l={l} E/T_loc={:.4}", d.e_over_tloc)),
        );
    }
    let msg = format!("{total} dips below 1e-6 x median, {} without a sign change of R {bad:?}", bad.len());
    if bad.is_empty() && total > 0 { Ok(msg) } else { Err(msg) }
}

fn property_suites() -> Outcome {
    use proptest::prelude::*;
    let mut report = Vec::new();
    let mut failed = false;
    let mut run = |name: &str, cases: u32, f: &dyn Fn(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
        match f(&mut runner) {
            Ok(()) => report.push(format!("{name} ok")),
            Err(e) => {
                failed = true;
                report.push(format!("{name} FAILED ({e})"));
            }
        }
    };
    let fail = |e: String| TestCaseError::fail(e);
    run("wronskian", 40, &|r| {
        r.run(&(0.05f64..2.0, 0.1f64..6.0, 0u32..5), |(rp, w, l)| common::wronskian_constancy(rp, w, l).map_err(fail))
            .map_err(|e| e.to_string())
    });
    run("four-velocity", 100, &|r| {
        r.run(&(0.01f64..3.0, 1.01f64..20.0), |(rp, s)| {
            let g = Geometry::new(rp).unwrap();
            match common::four_velocity(rp, 1.5 * g.r0() * s).map_err(fail)? {
                Some(err) if err >= 1e-12 => Err(fail(format!("|u.u + 1| = {err:e}"))),
                _ => Ok(()),
            }
        })
        .map_err(|e| e.to_string())
    });
    run("recurrence", 40, &|r| {
        r.run(&(0.05f64..2.0, 0.1f64..6.0, 0u32..6), |(rp, w, l)| common::recurrence_residual(rp, w, l, 300).map_err(fail))
            .map_err(|e| e.to_string())
    });
    run("taylor-shift", 20, &|r| {
        r.run(&(prop::array::uniform5(-10.0f64..10.0), -3.0f64..3.0, -2.0f64..2.0), |(c, x0, y)| {
            common::taylor_shift_point(c, x0, y).map_err(fail)
        })
        .map_err(|e| e.to_string())
    });
    run("scaling", 100, &|r| {
        r.run(&(0.01f64..2.0, 1.5f64..20.0, -5.0f64..5.0, 1e-3f64..1e3), |(rp, ratio, e, rate)| {
            for sigma in [0.5, 2.0, 10.0] {
                common::scaling_invariance(rp, ratio, e, rate, sigma).map_err(fail)?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    });
    let msg = report.join("; ");
    if failed { Err(msg) } else { Ok(msg) }
}

fn wkb_flux() -> Outcome {
    let g = Geometry::new(0.01).unwrap();
    let d = wkb_scatter(&g, 20.0, 0, &SolverSettings::default()).map_err(|e| e.to_string())?;
    let predicted = g.r0() / (2.0 * d.omega_prime.powi(3));
    let ratio = d.wkb_validity / predicted;
    let msg = format!(
        "| |A|^2+|B|^2-1 | = {:.3e}; validity {:.4e} vs r0/(2w'^3) = {:.4e} (ratio {ratio:.3}); C = {:.4}",
        d.flux_defect().abs(),
        d.wkb_validity,
        predicted,
        d.c
    );
    if d.flux_defect().abs() < 1e-3 && (0.5..=2.0).contains(&ratio) { Ok(msg) } else { Err(msg) }
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: u32, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("criterion {n:>2} PASS [{name}] {m} ({secs:.1}s)"),
            Err(m) => {
                failures += 1;
                println!("criterion {n:>2} FAIL [{name}] {m} ({secs:.1}s)");
            }
        }
    };
    let t = Instant::now();
    report(1, "normal-mode limit", t, normal_mode_limit());
    let t = Instant::now();
    report(2, "quadratic intercept", t, quadratic_intercept());
    let t = Instant::now();
    report(3, "cross-solver phase", t, cross_solver());
    let t = Instant::now();
    let f = fig1();
    report(4, "detailed balance", t, detailed_balance(&f));
    let t = Instant::now();
    report(5, "boulware support", t, boulware_support(&f));
    let t = Instant::now();
    report(6, "large-gap agreement", t, large_gap_agreement(&f));
    let t = Instant::now();
    report(7, "peak invariance", t, peak_invariance(&f));
    let t = Instant::now();
    report(8, "dip-zero correspondence", t, dip_zero(&f));
    let t = Instant::now();
    report(9, "property suites", t, property_suites());
    let t = Instant::now();
    report(10, "wkb flux", t, wkb_flux());
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
