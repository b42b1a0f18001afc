//! Post-processing: support geometry, multiplier asymptotics across
//! epsilon sweeps, rescaled-profile convergence, and comparison against
//! the point-vortex / quadrature oracles.

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::oracle;
use crate::profile::Profile;
use crate::solver::{solve_rotating, solve_translating, EquilibriumResult, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;

/// Maximum pairwise distance between centers of cells carrying vorticity.
pub fn support_diameter(cells: &[Cell], values: &[f64]) -> Result<f64> {
    let support: Vec<[f64; 2]> = cells
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(c, _)| c.center)
        .collect();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut best = 0.0f64;
    for (a, p) in support.iter().enumerate() {
        for q in &support[a + 1..] {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            best = best.max(dx * dx + dy * dy);
        }
    }
    Ok(best.sqrt())
}

/// Kendall tau-b rank correlation with tie correction. A fully tied
/// argument makes the statistic 0/0; that degenerate ordering cannot
/// violate monotonicity, so it is reported as 1.0.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 1.0;
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let cx = x[i].total_cmp(&x[j]);
            let cy = y[i].total_cmp(&y[j]);
            match (cx.is_eq(), cy.is_eq()) {
                (true, true) => {}
                (true, false) => ties_x += 1,
                (false, true) => ties_y += 1,
                (false, false) => {
                    if cx == cy {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
    }
    let n0 = concordant + discordant;
    let denom = (((n0 + ties_x) as f64) * ((n0 + ties_y) as f64)).sqrt();
    if denom == 0.0 {
        return 1.0;
    }
    (concordant - discordant) as f64 / denom
}

/// Least-squares line through (x, y): returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Discrete L^q distance between the rescaled recentered field
/// omega_tilde(y) = eps^2 omega(x_c + shift + eps y) and the radial
/// rearrangement of the target profile, minimized over sub-cell centroid
/// shifts (the computable stand-in for the optimal translation).
///
/// The target is discretized exactly like the solver's own iterates
/// (cell-center sampling, mass renormalized to 1) so that registration and
/// support-quantization effects cancel and the distance measures genuine
/// rearrangement deviation from the radial profile.
pub fn rescaled_profile_distance(
    cells: &[Cell],
    values: &[f64],
    eps: f64,
    target: &Profile,
    q: u32,
) -> Result<f64> {
    if q < 1 {
        return Err(Error::Config("profile distance requires q >= 1".into()));
    }
    let mut mass = 0.0;
    let mut cx = [0.0f64; 2];
    for (c, &v) in cells.iter().zip(values) {
        let w = v * c.measure;
        mass += w;
        cx[0] += w * c.center[0];
        cx[1] += w * c.center[1];
    }
    if mass <= 0.0 {
        return Err(Error::EmptySupport);
    }
    cx[0] /= mass;
    cx[1] /= mass;

    let xi_star = target.radial_rearrangement();
    let qf = q as f64;
    let distance = |shift: [f64; 2]| -> f64 {
        let center = [cx[0] + shift[0], cx[1] + shift[1]];
        let placed = match crate::profile::scale_profile(&xi_star, eps, cells, center, 1) {
            Ok(sp) => sp.field,
            Err(_) => return f64::INFINITY,
        };
        let mut total = 0.0;
        for ((c, &v), &t) in cells.iter().zip(values).zip(&placed) {
            total += (v - t).abs().powf(qf) * c.measure;
        }
        (total * (eps * eps).powf(qf - 1.0)).powf(1.0 / qf)
    };

    // deterministic coordinate search over a one-cell neighborhood,
    // refined three times
    let h = cells[0].measure.sqrt();
    let mut best_shift = [0.0f64; 2];
    let mut best = distance(best_shift);
    let mut radius = h;
    for _round in 0..4 {
        let center = best_shift;
        for iy in -4i32..=4 {
            for ix in -4i32..=4 {
                let candidate = [
                    center[0] + ix as f64 * radius / 4.0,
                    center[1] + iy as f64 * radius / 4.0,
                ];
                let d = distance(candidate);
                if d < best {
                    best = d;
                    best_shift = candidate;
                }
            }
        }
        radius /= 4.0;
    }
    Ok(best)
}

/// Which solver a sweep drives.
#[derive(Debug, Clone, Copy)]
pub enum SweepMode {
    Rotating { n_fold: u32 },
    Translating { speed: f64 },
}

/// One member run of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub converged: bool,
    /// Extracted rotation rate (rotating runs only).
    pub rate: Option<f64>,
    /// Cut level; absent when the member run did not converge.
    pub mu: Option<f64>,
    pub energy: f64,
    pub diameter: f64,
    pub center: [f64; 2],
    pub profile_distance_l1: f64,
}

/// One oracle comparison: pass iff |value - target| <= tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCheck {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Absolute allowance on |value - target|.
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check(name: &str, value: f64, target: f64, tolerance: f64) -> SweepCheck {
    SweepCheck {
        name: name.to_string(),
        value,
        target,
        tolerance,
        pass: (value - target).abs() <= tolerance,
    }
}

/// Aggregated sweep results: entries by decreasing eps, asymptotic fits,
/// and oracle comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub s: f64,
    pub n_fold: Option<u32>,
    pub travel_speed: Option<f64>,
    pub entries: Vec<SweepEntry>,
    /// Slope of mu against ln(1/eps) over converged entries (s = 1 only,
    /// needs >= 3 of them).
    pub mu_slope: Option<f64>,
    /// eps^(2-2s) * mu at the smallest converged eps (s < 1 only).
    pub mu_scaled_smallest: Option<f64>,
    /// Relative change of diameter/eps between the two smallest converged
    /// entries.
    pub diameter_over_eps_change: Option<f64>,
    /// Whether the L1 profile distance decreases along decreasing eps.
    pub distance_monotone: bool,
    /// True when any member run failed to converge.
    pub partial: bool,
    pub checks: Vec<SweepCheck>,
}

/// Run the solver across an eps list (members in parallel) and assemble the
/// asymptotic fits and oracle comparisons.
///
/// Each member's refined resolution is scaled by eps_max/eps (rounded to
/// even, capped at 256): the vortex core shrinks with eps, and only a grid
/// that refines along the sweep can track the asymptotic quantities below
/// the fixed-resolution quantization floor.
pub fn run_sweep(
    s: f64,
    mode: SweepMode,
    eps_list: &[f64],
    profile: &Profile,
    opts: &SolverOptions,
) -> Result<SweepReport> {
    if eps_list.len() < 3 {
        return Err(Error::Config(
            "sweep needs at least 3 epsilon values".into(),
        ));
    }
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    if eps_sorted.windows(2).any(|w| w[0] == w[1]) || eps_sorted.last().copied().unwrap() <= 0.0 {
        return Err(Error::Config(
            "sweep epsilon values must be positive and distinct".into(),
        ));
    }

    let eps_max = eps_sorted[0];
    let member_opts: Vec<SolverOptions> = eps_sorted
        .iter()
        .map(|&eps| {
            let mut n = (opts.refined_n as f64 * eps_max / eps).round() as usize;
            n += n % 2;
            SolverOptions {
                refined_n: n.min(256),
                ..opts.clone()
            }
        })
        .collect();
    let results: Vec<EquilibriumResult> = eps_sorted
        .par_iter()
        .zip(&member_opts)
        .map(|(&eps, member)| match mode {
            SweepMode::Rotating { n_fold } => solve_rotating(s, n_fold, eps, profile, member),
            SweepMode::Translating { speed } => solve_translating(s, speed, eps, profile, member),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::with_capacity(results.len());
    for r in &results {
        let cells = r.domain.cells();
        entries.push(SweepEntry {
            eps: r.eps,
            converged: r.converged,
            rate: r.rotation_rate,
            mu: r.multipliers().ok().map(|m| m.mu),
            energy: r.energy,
            diameter: support_diameter(cells, &r.values)?,
            center: r.centroid()?,
            profile_distance_l1: rescaled_profile_distance(cells, &r.values, r.eps, profile, 1)?,
        });
    }
    let partial = entries.iter().any(|e| !e.converged);
    let good: Vec<&SweepEntry> = entries.iter().filter(|e| e.converged).collect();

    let mut checks = Vec::new();

    // mu asymptotics
    let mut mu_slope = None;
    let mut mu_scaled_smallest = None;
    if s == 1.0 {
        if good.len() >= 3 {
            let xs: Vec<f64> = good.iter().map(|e| (1.0 / e.eps).ln()).collect();
            let ys: Vec<f64> = good.iter().map(|e| e.mu.unwrap()).collect();
            let (slope, _) = linear_fit(&xs, &ys);
            mu_slope = Some(slope);
            let target = 0.5 / std::f64::consts::PI;
            checks.push(check("mu_slope_vs_log", slope, target, 0.10 * target));
        }
    } else if let Some(e) = good.last() {
        let scaled = e.eps.powf(2.0 - 2.0 * s) * e.mu.unwrap();
        mu_scaled_smallest = Some(scaled);
        let target = oracle::potential_constant(s, profile)?;
        checks.push(check(
            "mu_scaled_vs_potential_constant",
            scaled,
            target,
            0.15 * target,
        ));
    }

    // limiting multiplier / placement
    if let Some(e) = good.last() {
        match mode {
            SweepMode::Rotating { n_fold } => {
                let rate = e.rate.unwrap();
                if s == 1.0 {
                    let target = oracle::polygon_rotation_rate(n_fold, s);
                    checks.push(check("alpha_vs_polygon_rate", rate, target, 0.10 * target));
                } else {
                    let target = oracle::polygon_velocity_rate(n_fold, s);
                    checks.push(check("alpha_vs_velocity_rate", rate, target, 0.15 * target));
                }
            }
            SweepMode::Translating { speed } => {
                let d = oracle::pair_distance(s, speed);
                let offset =
                    ((e.center[0] - d).powi(2) + e.center[1].powi(2)).sqrt();
                // allowance: max(eps, two cell widths) on the matching result
                let h = results
                    .iter()
                    .find(|r| r.eps == e.eps)
                    .map(|r| r.domain.cell_width())
                    .unwrap_or(0.0);
                checks.push(check(
                    "center_vs_pair_distance",
                    offset,
                    0.0,
                    e.eps.max(2.0 * h),
                ));
            }
        }
    }

    // support scaling stability over the two smallest converged entries
    let mut diameter_over_eps_change = None;
    if good.len() >= 2 {
        let a = good[good.len() - 2];
        let b = good[good.len() - 1];
        let ra = a.diameter / a.eps;
        let rb = b.diameter / b.eps;
        let change = (rb - ra).abs() / ra;
        diameter_over_eps_change = Some(change);
        checks.push(check("diameter_over_eps_stability", change, 0.0, 0.20));
    }

    // profile distance monotone along decreasing eps
    // nonincreasing along decreasing eps, with an absolute slack for float
    // noise around an exact plateau
    let distance_monotone = good
        .windows(2)
        .all(|w| w[1].profile_distance_l1 <= w[0].profile_distance_l1 + 1e-9);
    if good.len() >= 2 {
        checks.push(check(
            "profile_distance_monotone",
            if distance_monotone { 1.0 } else { 0.0 },
            1.0,
            0.0,
        ));
    }

    let (n_fold, travel_speed) = match mode {
        SweepMode::Rotating { n_fold } => (Some(n_fold), None),
        SweepMode::Translating { speed } => (None, Some(speed)),
    };
    Ok(SweepReport {
        s,
        n_fold,
        travel_speed,
        entries,
        mu_slope,
        mu_scaled_smallest,
        diameter_over_eps_change,
        distance_monotone,
        partial,
        checks,
    })
}
