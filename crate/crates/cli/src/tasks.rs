//! Task runners. Each returns tables in grid order plus a report; rows never
//! depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;

use sads_udw::analysis::{peak_vs_rplus, scan_peaks, wkb_scatter, PeakScan, ScanOptions};
use sads_udw::response::{energy_grid, sum_l, ModeProvider, RateCurve, Trajectory, Vacuum};
use sads_udw::Geometry;

use crate::cache::DiskCache;
use crate::config::{vacuum_tag, Plan, Scale, Task};
use crate::output::{num, Table, TaskReport};

pub struct Outcome {
    pub tables: Vec<Table>,
    pub report: TaskReport,
}

const UNITS: &str = "units: canonical (AdS radius R = 1); rates are R*dF/dtau; E_over_Tloc = E/T_loc; omega_tilde_R = omega*R";

pub fn run(plan: &Plan, cache: &DiskCache) -> Vec<Outcome> {
    match plan.cli.task {
        Task::Mode => vec![mode_profile(plan, cache)],
        Task::StaticRate | Task::CircularRate => plan
            .cli
            .vacuum
            .list()
            .into_iter()
            .map(|v| rate_curve(plan, v, cache))
            .collect(),
        Task::ScanPeaks => plan
            .cli
            .vacuum
            .list()
            .into_iter()
            .map(|v| peak_table(plan, v, cache))
            .collect(),
        Task::PeakFit => vec![peak_fit(plan, cache)],
        Task::Wkb => vec![wkb_table(plan)],
    }
}

fn grid(plan: &Plan) -> Vec<f64> {
    let c = &plan.cli;
    energy_grid(c.e_min, c.e_max, c.e_count, c.e_scale == Scale::Log).expect("grid validated")
}

fn report(plan: &Plan, vacuum: Option<Vacuum>, r_plus: Option<f64>) -> TaskReport {
    TaskReport {
        task: plan.cli.task.name().to_string(),
        vacuum: vacuum.map(|v| vacuum_tag(v).to_string()),
        r_plus,
        ..TaskReport::default()
    }
}

fn file_name(task: Task, vacuum: Option<Vacuum>, failures: bool) -> String {
    let stem = match vacuum {
        Some(v) => format!("{}_{}", task.name(), vacuum_tag(v)),
        None => task.name().to_string(),
    };
    if failures {
        format!("{stem}.failures.csv")
    } else {
        format!("{stem}.csv")
    }
}

fn geometry_note(g: &Geometry) -> String {
    format!(
        "geometry: r_plus = {}, r0 = {}, T_H = {}",
        num(g.r_plus()),
        num(g.r0()),
        num(g.hawking_temperature())
    )
}

fn index_list(flags: &[bool]) -> String {
    let idx: Vec<String> = flags
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i.to_string())
        .collect();
    if idx.is_empty() {
        "none".into()
    } else {
        idx.join(",")
    }
}

fn rate_curve(plan: &Plan, vacuum: Vacuum, cache: &DiskCache) -> Outcome {
    let start = Instant::now();
    let g = &plan.geometries[0];
    let trajectory = plan.trajectory();
    let spec = plan.spec(g, trajectory, vacuum);
    let grid = grid(plan);
    let axis = if trajectory == Trajectory::Static { "E_over_Tloc" } else { "E" };
    let mut rep = report(plan, Some(vacuum), Some(g.r_plus()));
    rep.points = grid.len();

    let mut failures = Table::new(file_name(plan.cli.task, Some(vacuum), true), &["index", axis, "message"]);
    let mut table = Table::new(file_name(plan.cli.task, Some(vacuum), false), &[]);
    table.notes.push(UNITS.into());
    table.notes.push(geometry_note(g));
    let mut detector = format!("detector: radius = {}", num(spec.radius));
    if trajectory == Trajectory::Static {
        if let Ok(t) = g.local_temperature(spec.radius) {
            detector.push_str(&format!(", T_loc = {}", num(t)));
        }
    }
    table.notes.push(detector);

    match sum_l(g, &spec, &grid, cache) {
        Ok(curve) => fill_rate_table(&mut table, &mut failures, &mut rep, axis, &curve),
        Err(e) => {
            table.columns = vec![axis.into(), "total_rate".into(), "truncation_flag".into()];
            for (i, &e_val) in grid.iter().enumerate() {
                table.rows.push(vec![num(e_val), num(f64::NAN), "failed".into()]);
                failures.rows.push(vec![i.to_string(), num(e_val), e.to_string()]);
            }
            rep.failed = grid.len();
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Outcome {
        tables: with_failures(table, failures),
        report: rep,
    }
}

fn fill_rate_table(table: &mut Table, failures: &mut Table, rep: &mut TaskReport, axis: &str, curve: &RateCurve) {
    table.columns.push(axis.into());
    table.columns.push("total_rate".into());
    for l in 0..curve.l_count() {
        table.columns.push(format!("rate_l{l}"));
    }
    table.columns.push("truncation_flag".into());
    table.notes.push(format!("shifted = {}", index_list(&curve.shifted)));
    for (i, &e) in curve.energies.iter().enumerate() {
        let mut row = vec![num(e), num(curve.total[i])];
        row.extend(curve.per_l.iter().map(|c| num(c[i])));
        let flag = match &curve.failures[i] {
            Some(msg) => {
                failures.rows.push(vec![i.to_string(), num(e), msg.clone()]);
                "failed"
            }
            None => curve.truncation[i].label(),
        };
        *rep.truncation.entry(flag.to_string()).or_default() += 1;
        row.push(flag.into());
        table.rows.push(row);
    }
    rep.failed = curve.failed_points();
    rep.shifted = curve.shifted.iter().filter(|&&s| s).count();
}

fn with_failures(table: Table, failures: Table) -> Vec<Table> {
    if failures.rows.is_empty() {
        vec![table]
    } else {
        vec![table, failures]
    }
}

fn peak_table(plan: &Plan, vacuum: Vacuum, cache: &DiskCache) -> Outcome {
    let start = Instant::now();
    let grid = grid(plan);
    let mut rep = report(plan, Some(vacuum), None);
    let columns = ["r_plus", "l", "n", "E_over_Tloc", "omega_tilde_R", "height", "half_width"];
    let mut table = Table::new(file_name(Task::ScanPeaks, Some(vacuum), false), &columns);
    table.notes.push(UNITS.into());
    table.notes.push("half_width is the half-width at half-maximum in E/T_loc".into());
    let mut failures = Table::new(
        file_name(Task::ScanPeaks, Some(vacuum), true),
        &["r_plus", "l", "index", "E_over_Tloc", "message"],
    );
    let options = ScanOptions {
        prominence: plan.cli.prominence,
        ..ScanOptions::default()
    };
    for g in &plan.geometries {
        let spec = plan.spec(g, Trajectory::Static, vacuum);
        rep.points += grid.len();
        let curve = match sum_l(g, &spec, &grid, cache) {
            Ok(c) => c,
            Err(e) => {
                rep.failed += grid.len();
                failures.rows.push(vec![num(g.r_plus()), String::new(), String::new(), String::new(), e.to_string()]);
                continue;
            }
        };
        for (i, f) in curve.failures.iter().enumerate() {
            if let Some(msg) = f {
                rep.failed += 1;
                failures.rows.push(vec![num(g.r_plus()), String::new(), i.to_string(), num(curve.energies[i]), msg.clone()]);
            }
        }
        rep.shifted += curve.shifted.iter().filter(|&&s| s).count();
        for l in 0..curve.l_count() as u32 {
            rep.points += 1;
            match scan_peaks(g, &spec, &curve, l, cache, &options) {
                Ok(peaks) => {
                    for p in peaks {
                        table.rows.push(vec![
                            num(g.r_plus()),
                            p.l.to_string(),
                            p.n.to_string(),
                            num(p.e_over_tloc),
                            num(p.omega_tilde),
                            num(p.height),
                            num(p.half_width),
                        ]);
                    }
                }
                Err(e) => {
                    rep.failed += 1;
                    failures.rows.push(vec![num(g.r_plus()), l.to_string(), String::new(), String::new(), e.to_string()]);
                }
            }
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Outcome {
        tables: with_failures(table, failures),
        report: rep,
    }
}

fn peak_fit(plan: &Plan, cache: &DiskCache) -> Outcome {
    let start = Instant::now();
    let c = &plan.cli;
    let mut rep = report(plan, Some(Vacuum::HartleHawking), None);
    rep.points = c.r_plus.len();
    let scan = PeakScan {
        omega_min: c.omega_min,
        step: c.omega_step,
        options: ScanOptions {
            prominence: c.prominence,
            ..ScanOptions::default()
        },
        ..PeakScan::default()
    };
    let ratio = c.radius_ratio.expect("validated");
    let columns = ["r_plus", "omega_tilde_R", "fit_omega_tilde_R", "residual", "status"];
    let mut table = Table::new(file_name(Task::PeakFit, Some(Vacuum::HartleHawking), false), &columns);
    table.notes.push(UNITS.into());
    let mut failures = Table::new(file_name(Task::PeakFit, Some(Vacuum::HartleHawking), true), &["message"]);
    match peak_vs_rplus(c.l, c.n, &c.r_plus, ratio, &scan, cache) {
        Ok(fit) => {
            table.notes.push(format!(
                "fit: omega_tilde_R = c0 + c1 r_plus + c2 r_plus^2; c0 = {}, c1 = {}, c2 = {}, residual_norm = {}",
                num(fit.c0),
                num(fit.c1),
                num(fit.c2),
                num(fit.residual_norm)
            ));
            table.notes.push(format!(
                "ads normal mode 2 + l + 2n = {}",
                num(sads_udw::analysis::ads_normal_mode(c.l, c.n))
            ));
            let mut residuals = fit.residuals.iter();
            for s in &fit.samples {
                let row = match s.omega_tilde {
                    Some(w) => vec![
                        num(s.r_plus),
                        num(w),
                        num(fit.predict(s.r_plus)),
                        num(*residuals.next().expect("one residual per resolved sample")),
                        "peak".into(),
                    ],
                    None => vec![
                        num(s.r_plus),
                        num(f64::NAN),
                        num(fit.predict(s.r_plus)),
                        num(f64::NAN),
                        "unresolved".into(),
                    ],
                };
                table.rows.push(row);
            }
        }
        Err(e) => {
            rep.failed = rep.points;
            failures.rows.push(vec![e.to_string()]);
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Outcome {
        tables: with_failures(table, failures),
        report: rep,
    }
}

fn mode_profile(plan: &Plan, cache: &DiskCache) -> Outcome {
    let start = Instant::now();
    let g = &plan.geometries[0];
    let (omega, l) = (plan.cli.omega.expect("validated"), plan.cli.l);
    let mut rep = report(plan, None, Some(g.r_plus()));
    let rp = g.r_plus();
    let rs = energy_grid(rp * 1.001, (100.0_f64).max(100.0 * rp), plan.cli.points, true).expect("valid radii");
    rep.points = rs.len();
    let columns = ["r", "r_star", "R", "R_tilde", "dR_tilde_drstar"];
    let mut table = Table::new(file_name(Task::Mode, None, false), &columns);
    table.notes.push(UNITS.into());
    table.notes.push(geometry_note(g));
    let mut failures = Table::new(file_name(Task::Mode, None, true), &["index", "r", "message"]);
    match cache.mode(g, omega, l) {
        Ok(mode) => {
            table.notes.push(format!(
                "mode: omega = {}, l = {l}, theta0 = {}, solved_by = {:?}, normalization_residual = {}",
                num(omega),
                num(mode.theta0),
                mode.method,
                num(mode.normalization_residual)
            ));
            let values: Vec<_> = rs
                .par_iter()
                .map(|&r| mode.tilde(r).and_then(|t| Ok((g.tortoise(r)?, t))))
                .collect();
            for (i, (&r, v)) in rs.iter().zip(values).enumerate() {
                match v {
                    Ok((rstar, (val, der))) => {
                        table.rows.push(vec![num(r), num(rstar), num(val / r), num(val), num(der)])
                    }
                    Err(e) => {
                        rep.failed += 1;
                        let nan = num(f64::NAN);
                        table.rows.push(vec![num(r), nan.clone(), nan.clone(), nan.clone(), nan]);
                        failures.rows.push(vec![i.to_string(), num(r), e.to_string()]);
                    }
                }
            }
        }
        Err(e) => {
            rep.failed = rep.points;
            failures.rows.push(vec![String::new(), String::new(), e.to_string()]);
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Outcome {
        tables: with_failures(table, failures),
        report: rep,
    }
}

fn wkb_table(plan: &Plan) -> Outcome {
    let start = Instant::now();
    let g = &plan.geometries[0];
    let l = plan.cli.l;
    let omegas = grid(plan);
    let mut rep = report(plan, None, Some(g.r_plus()));
    rep.points = omegas.len();
    let columns = [
        "omega",
        "omega_prime",
        "A_re",
        "A_im",
        "B_re",
        "B_im",
        "C",
        "flux_defect",
        "wkb_validity",
        "boundary_validity",
        "matching_residual",
    ];
    let mut table = Table::new(file_name(Task::Wkb, None, false), &columns);
    table.notes.push(UNITS.into());
    table.notes.push(geometry_note(g));
    table.notes.push(format!("l = {l}; the grid samples omega"));
    let mut failures = Table::new(file_name(Task::Wkb, None, true), &["index", "omega", "message"]);
    let results: Vec<_> = omegas
        .par_iter()
        .map(|&w| wkb_scatter(g, w, l, &plan.settings))
        .collect();
    for (i, (&w, res)) in omegas.iter().zip(results).enumerate() {
        match res {
            Ok(s) => table.rows.push(vec![
                num(w),
                num(s.omega_prime),
                num(s.a.re),
                num(s.a.im),
                num(s.b.re),
                num(s.b.im),
                num(s.c),
                num(s.flux_defect()),
                num(s.wkb_validity),
                num(s.boundary_validity),
                num(s.matching_residual),
            ]),
            Err(e) => {
                rep.failed += 1;
                let mut row = vec![num(w)];
                row.extend(std::iter::repeat_n(num(f64::NAN), columns.len() - 1));
                table.rows.push(row);
                failures.rows.push(vec![i.to_string(), num(w), e.to_string()]);
            }
        }
    }
    rep.seconds = start.elapsed().as_secs_f64();
    Outcome {
        tables: with_failures(table, failures),
        report: rep,
    }
}
