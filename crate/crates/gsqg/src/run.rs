//! Mode dispatch and file outputs: result JSON (with the resolved config
//! embedded), field CSV dumps, and a human-readable summary. Outputs are
//! deterministic: identical configs produce byte-identical files.

use crate::config::{Mode, RunConfig};
use crate::diagnostics::{
    check, rescaled_profile_distance, run_sweep, support_diameter, SweepCheck, SweepMode,
};
use crate::error::{Error, Result};
use crate::kernel::riesz_constant;
use crate::oracle;
use crate::profile::Profile;
use crate::solver::{solve_rotating, solve_translating, EquilibriumResult};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;

/// Float formatting for CSV dumps: 17 significant digits, lossless for f64.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn field_csv(result: &EquilibriumResult, mirror_extension: bool) -> String {
    let mut out = String::from("x1,x2,omega,psi\n");
    let cells = result.domain.cells();
    for (i, c) in cells.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt17(c.center[0]),
            fmt17(c.center[1]),
            fmt17(result.values[i]),
            fmt17(result.potential[i]),
        );
    }
    if mirror_extension {
        // odd extension across x1 = 0: the pair's second vortex
        for (i, c) in cells.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(-c.center[0]),
                fmt17(c.center[1]),
                fmt17(-result.values[i]),
                fmt17(-result.potential[i]),
            );
        }
    }
    out
}

#[derive(Serialize)]
struct SingleRunReport {
    converged: bool,
    iterations: usize,
    energy: f64,
    momentum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    travel_speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cut_gap: Option<f64>,
    support_cells: usize,
    diameter: f64,
    center: [f64; 2],
    profile_distance_l1: f64,
    profile_distance_l2: f64,
}

fn single_run_report(result: &EquilibriumResult, profile: &Profile) -> Result<SingleRunReport> {
    let cells = result.domain.cells();
    let multipliers = result.multipliers().ok();
    Ok(SingleRunReport {
        converged: result.converged,
        iterations: result.iterations,
        energy: result.energy,
        momentum: result.momentum,
        alpha: result.rotation_rate,
        travel_speed: result.travel_speed,
        mu: multipliers.as_ref().map(|m| m.mu),
        cut_gap: multipliers.as_ref().map(|m| m.cut_gap),
        support_cells: result.support_indices().len(),
        diameter: support_diameter(cells, &result.values)?,
        center: result.centroid()?,
        profile_distance_l1: rescaled_profile_distance(
            cells,
            &result.values,
            result.eps,
            profile,
            1,
        )?,
        profile_distance_l2: rescaled_profile_distance(
            cells,
            &result.values,
            result.eps,
            profile,
            2,
        )?,
    })
}

fn rotate_oracle_and_checks(
    result: &EquilibriumResult,
    n_fold: u32,
) -> (serde_json::Value, Vec<SweepCheck>) {
    let s = result.s;
    let mut checks = Vec::new();
    let oracle_value;
    if s == 1.0 {
        let alpha_limit = oracle::polygon_rotation_rate(n_fold, s);
        // the source material displays two inconsistent limits; the
        // point-vortex oracle supports the smaller one, the other is
        // reported for transparency and flagged
        let alpha_other = (n_fold as f64 - 1.0) / std::f64::consts::PI;
        let crosscheck = result.rotation_rate_crosscheck().ok();
        oracle_value = json!({
            "alpha_limit": alpha_limit,
            "alpha_limit_alternate_display": alpha_other,
            "alpha_limit_alternate_note":
                "a second displayed limit, 4x the oracle-supported value; suspected typo, reported not reconciled",
            "alpha_crosscheck": crosscheck,
        });
        if let Some(rate) = result.rotation_rate {
            checks.push(check(
                "alpha_vs_polygon_rate",
                rate,
                alpha_limit,
                0.10 * alpha_limit,
            ));
            if let Some(cc) = crosscheck {
                checks.push(check("alpha_vs_crosscheck", rate, cc, 0.05 * cc.abs()));
            }
        }
    } else {
        let velocity_rate = oracle::polygon_velocity_rate(n_fold, s);
        let displayed_sum = oracle::polygon_rotation_rate(n_fold, s);
        oracle_value = json!({
            "velocity_rate": velocity_rate,
            "displayed_sum_rate": displayed_sum,
            "riesz_constant": riesz_constant(s),
        });
        if let Some(rate) = result.rotation_rate {
            checks.push(check(
                "alpha_vs_velocity_rate",
                rate,
                velocity_rate,
                0.15 * velocity_rate,
            ));
        }
    }
    (oracle_value, checks)
}

fn translate_oracle_and_checks(
    result: &EquilibriumResult,
    w: f64,
) -> Result<(serde_json::Value, Vec<SweepCheck>)> {
    let s = result.s;
    let d = oracle::pair_distance(s, w);
    let tau = oracle::kirchhoff_routh_minimizer(s, w);
    let oracle_value = json!({
        "pair_distance": d,
        "kirchhoff_routh_minimizer": tau,
        "kirchhoff_routh_value": oracle::kirchhoff_routh(s, w, tau),
    });
    let center = result.centroid()?;
    let offset = ((center[0] - d).powi(2) + center[1].powi(2)).sqrt();
    let h = result.domain.cell_width();
    let checks = vec![check(
        "center_vs_pair_distance",
        offset,
        0.0,
        result.eps.max(2.0 * h),
    )];
    Ok((oracle_value, checks))
}

fn summary_checks(out: &mut String, checks: &[SweepCheck]) {
    for c in checks {
        let _ = writeln!(
            out,
            "  [{}] {}: value {:.6e}, target {:.6e}, allowance {:.2e}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.target,
            c.tolerance,
        );
    }
}

/// Execute the configured mode and write `result.json`, `summary.txt`, and
/// (for solver modes) `field.csv` into the output directory. Errors with a
/// convergence failure after writing outputs when the run did not converge.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mode = cfg.mode.expect("validated");
    match mode {
        Mode::Rotate | Mode::Translate => run_single(cfg, mode, out_dir),
        Mode::Sweep => run_sweep_mode(cfg, out_dir),
        Mode::Oracle => run_oracle(cfg, out_dir),
    }
}

fn run_single(cfg: &RunConfig, mode: Mode, out_dir: &Path) -> Result<()> {
    let profile = cfg.profile.build()?;
    let opts = cfg.solver_options();
    let eps = cfg.epsilon.expect("validated");
    let result = match mode {
        Mode::Rotate => solve_rotating(cfg.s, cfg.n_fold.expect("validated"), eps, &profile, &opts)?,
        Mode::Translate => solve_translating(
            cfg.s,
            cfg.travel_speed.expect("validated"),
            eps,
            &profile,
            &opts,
        )?,
        _ => unreachable!(),
    };
    let report = single_run_report(&result, &profile)?;
    let (oracle_value, checks) = match mode {
        Mode::Rotate => rotate_oracle_and_checks(&result, cfg.n_fold.expect("validated")),
        Mode::Translate => translate_oracle_and_checks(&result, cfg.travel_speed.expect("validated"))?,
        _ => unreachable!(),
    };

    let doc = json!({
        "config": cfg,
        "result": report,
        "oracle": oracle_value,
        "checks": checks,
    });
    write_text(
        &out_dir.join("result.json"),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;
    write_text(&out_dir.join("field.csv"), &field_csv(&result, false))?;
    if mode == Mode::Translate {
        // the full vortex pair: the solved half-plane field plus its odd
        // extension across x1 = 0
        write_text(&out_dir.join("field_pair.csv"), &field_csv(&result, true))?;
    }

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{} run: s = {}, eps = {}, profile = {:?}",
        match mode {
            Mode::Rotate => "rotating",
            _ => "translating",
        },
        cfg.s,
        eps,
        cfg.profile,
    );
    let _ = writeln!(
        summary,
        "converged: {} in {} iterations; energy {:.9e}, momentum {:.6e}",
        result.converged, result.iterations, result.energy, result.momentum,
    );
    if let Some(alpha) = report.alpha {
        let _ = writeln!(summary, "alpha (rotation rate): {alpha:.9e}");
    }
    if let Some(w) = report.travel_speed {
        let _ = writeln!(summary, "travel speed: {w:.9e}");
    }
    if let Some(mu) = report.mu {
        let _ = writeln!(summary, "mu (cut level): {mu:.9e}");
    }
    let _ = writeln!(
        summary,
        "support: {} cells, diameter {:.6e} ({:.3} eps), center ({:.6}, {:.6})",
        report.support_cells,
        report.diameter,
        report.diameter / eps,
        report.center[0],
        report.center[1],
    );
    let _ = writeln!(
        summary,
        "rescaled profile distance: L1 {:.6e}, L2 {:.6e}",
        report.profile_distance_l1, report.profile_distance_l2,
    );
    summary_checks(&mut summary, &checks);
    if mode == Mode::Rotate && cfg.s == 1.0 {
        let n = cfg.n_fold.expect("validated") as f64;
        let _ = writeln!(
            summary,
            "note: limit alpha displayed two ways in the source material: {:.6e} (oracle-supported) vs {:.6e} (suspected typo)",
            (n - 1.0) / (4.0 * std::f64::consts::PI),
            (n - 1.0) / std::f64::consts::PI,
        );
    }
    write_text(&out_dir.join("summary.txt"), &summary)?;

    if !result.converged {
        return Err(Error::Unconverged(result.iterations));
    }
    Ok(())
}

fn run_sweep_mode(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let profile = cfg.profile.build()?;
    let opts = cfg.solver_options();
    let sweep_mode = if let Some(n_fold) = cfg.n_fold {
        SweepMode::Rotating { n_fold }
    } else {
        SweepMode::Translating {
            speed: cfg.travel_speed.expect("validated"),
        }
    };
    let eps_list = cfg.epsilon_list.as_ref().expect("validated");
    let report = run_sweep(cfg.s, sweep_mode, eps_list, &profile, &opts)?;

    let doc = json!({
        "config": cfg,
        "sweep": report,
    });
    write_text(
        &out_dir.join("result.json"),
        &(serde_json::to_string_pretty(&doc)? + "\n"),
    )?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "sweep: s = {}, {} members, profile = {:?}{}",
        cfg.s,
        report.entries.len(),
        cfg.profile,
        if report.partial { " (PARTIAL: unconverged members)" } else { "" },
    );
    for e in &report.entries {
        let _ = writeln!(
            summary,
            "  eps {:.4}: converged {}, energy {:.6e}, mu {}, diameter/eps {:.3}, L1 distance {:.4e}",
            e.eps,
            e.converged,
            e.energy,
            e.mu.map_or("n/a".into(), |m| format!("{m:.6e}")),
            e.diameter / e.eps,
            e.profile_distance_l1,
        );
    }
    if let Some(slope) = report.mu_slope {
        let _ = writeln!(summary, "mu slope vs ln(1/eps): {slope:.6e}");
    }
    if let Some(v) = report.mu_scaled_smallest {
        let _ = writeln!(summary, "eps^(2-2s) mu at smallest eps: {v:.6e}");
    }
    summary_checks(&mut summary, &report.checks);
    write_text(&out_dir.join("summary.txt"), &summary)?;

    if report.partial {
        return Err(Error::NotConverged);
    }
    Ok(())
}

fn run_oracle(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), serde_json::to_value(cfg)?);
    let mut summary = String::new();
    let _ = writeln!(summary, "oracle values for s = {}", cfg.s);

    if let Some(n_fold) = cfg.n_fold {
        let rotation = oracle::polygon_rotation_rate(n_fold, cfg.s);
        let velocity = oracle::polygon_velocity_rate(n_fold, cfg.s);
        doc.insert(
            "rotating".into(),
            json!({
                "n_fold": n_fold,
                "polygon_rotation_rate": rotation,
                "polygon_velocity_rate": velocity,
            }),
        );
        let _ = writeln!(
            summary,
            "N = {n_fold} polygon: rotation rate {rotation:.9e}, velocity-field rate {velocity:.9e}",
        );
    }
    if let Some(w) = cfg.travel_speed {
        let d = oracle::pair_distance(cfg.s, w);
        let tau = oracle::kirchhoff_routh_minimizer(cfg.s, w);
        doc.insert(
            "translating".into(),
            json!({
                "travel_speed": w,
                "pair_distance": d,
                "kirchhoff_routh_minimizer": tau,
                "kirchhoff_routh_value": oracle::kirchhoff_routh(cfg.s, w, tau),
            }),
        );
        let _ = writeln!(
            summary,
            "pair at speed {w:.9e}: distance {d:.9e}, Kirchhoff-Routh minimizer {tau:.9e}",
        );
    }
    if cfg.s < 1.0 {
        let profile = cfg.profile.build()?;
        let b = oracle::potential_constant(cfg.s, &profile)?;
        doc.insert(
            "riesz".into(),
            json!({
                "riesz_constant": riesz_constant(cfg.s),
                "potential_constant": b,
            }),
        );
        let _ = writeln!(summary, "profile potential constant at unit radius: {b:.9e}");
    }

    write_text(
        &out_dir.join("result.json"),
        &(serde_json::to_string_pretty(&serde_json::Value::Object(doc))? + "\n"),
    )?;
    write_text(&out_dir.join("summary.txt"), &summary)?;
    Ok(())
}
