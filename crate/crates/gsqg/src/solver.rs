//! Energy-ascent solvers: iterated bathtub rearrangement of the scaled
//! profile against its own induced potential, on a coarse locating grid and
//! then on a refined window around the vortex core.
//!
//! The rotating solver maximizes the interaction energy over the
//! rearrangement class subject to the quadratic moment sum |x|^2 omega m = 1
//! on an annular sector with the N-fold rotation kernel; the translating
//! solver maximizes energy minus `w` times the x1-moment on a half-plane disk
//! with the mirror kernel. Each step can only increase the objective, so the
//! recorded energy trace is monotone up to the stopping safeguard.

use crate::error::{Error, Result};
use crate::grid::{Cell, HalfPlaneGrid, SectorGrid, SECTOR_R_MAX, SECTOR_R_MIN};
use crate::kernel::{green_grad, kappa_eval, KernelMode, KernelOperator};
use crate::oracle::pair_distance;
use crate::profile::{scale_profile, Profile, MIN_SUPPORT_CELLS};
use crate::rearrange::{bathtub_rearrange, constrained_rearrange};

/// Solver controls. The momentum tolerance is bounded below by the grid
/// granularity: the constraint value is a step function over the discrete
/// rearrangement class, so residuals of a few times the largest single-cell
/// moment transfer are unavoidable.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop when the relative energy gain per sweep falls below this.
    pub tol_energy: f64,
    /// Acceptable |L - 1| for the rotating momentum constraint.
    pub tol_momentum: f64,
    pub max_iters: usize,
    /// Coarse locating grid: sector is coarse_nr x coarse_nt, half-plane is
    /// coarse_n x coarse_n.
    pub coarse_nr: usize,
    pub coarse_nt: usize,
    pub coarse_n: usize,
    /// Refined window resolution (n x n).
    pub refined_n: usize,
    /// Refined window half-width as a multiple of eps.
    pub window_factor: f64,
    /// Minimum support cells required on the refined grid.
    pub min_support_cells: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_energy: 1e-10,
            tol_momentum: 5e-3,
            max_iters: 500,
            coarse_nr: 48,
            coarse_nt: 32,
            coarse_n: 48,
            refined_n: 64,
            window_factor: 4.0,
            min_support_cells: MIN_SUPPORT_CELLS,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IterationRecord {
    pub energy: f64,
    pub moved_cells: usize,
    pub momentum_residual: f64,
}

/// Final grid of a solve, kept for symmetry maps and output.
pub enum Domain {
    Sector(SectorGrid),
    HalfPlane(HalfPlaneGrid),
}

impl Domain {
    pub fn cells(&self) -> &[Cell] {
        match self {
            Domain::Sector(g) => g.cells(),
            Domain::HalfPlane(g) => g.cells(),
        }
    }

    pub fn mirror_index(&self, i: usize) -> usize {
        match self {
            Domain::Sector(g) => g.mirror_index(i),
            Domain::HalfPlane(g) => g.mirror_index(i),
        }
    }

    /// Representative cell width: cells are equal-measure by construction,
    /// so the square root of one cell's measure.
    pub fn cell_width(&self) -> f64 {
        self.cells()[0].measure.sqrt()
    }
}

pub struct EquilibriumResult {
    pub s: f64,
    pub eps: f64,
    /// Fold count for rotating solutions.
    pub n_fold: Option<u32>,
    /// Travel speed for translating solutions.
    pub travel_speed: Option<f64>,
    /// Half-separation of the admissible disk center for translating solutions.
    pub pair_half_distance: Option<f64>,
    pub domain: Domain,
    pub values: Vec<f64>,
    /// Canonical level multiset of the rearrangement class (sorted
    /// decreasing); the final values are a permutation of these.
    pub levels: Vec<f64>,
    /// Induced kernel potential at the final field.
    pub potential: Vec<f64>,
    pub energy: f64,
    /// sum |x|^2 omega m (rotating) or sum x1 omega m (translating).
    pub momentum: f64,
    /// Angular velocity multiplier of the momentum constraint (rotating only).
    pub rotation_rate: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

/// Multipliers of the converged variational problem.
#[derive(Debug, Clone, Copy)]
pub struct Multipliers {
    pub rotation_rate: Option<f64>,
    pub travel_speed: Option<f64>,
    /// Cutoff level: the smallest weight on the support. The weight is
    /// phi + (rate/2)|x|^2 (rotating) or phi - w x1 (translating).
    pub mu: f64,
    /// mu minus the largest weight off the support; nonnegative up to one
    /// grid increment when the bathtub structure holds (the discrete
    /// assignment is made against the bisection weight, while the reported
    /// rate is the physical one, so cells straddling the cut can disagree
    /// by the single-cell weight difference).
    pub cut_gap: f64,
}

impl EquilibriumResult {
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] > 0.0).collect()
    }

    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(self.domain.cells())
            .map(|(v, c)| v * c.measure)
            .sum()
    }

    pub fn centroid(&self) -> Result<[f64; 2]> {
        centroid(self.domain.cells(), &self.values)
    }

    /// Per-cell weight whose superlevel sets carry the vorticity. With
    /// psi = G * omega the velocity is -perp(grad psi), so the co-moving
    /// stream function is psi + (rate/2)|x|^2 for rotation and psi - w x1
    /// for translation.
    pub fn comoving_weights(&self) -> Vec<f64> {
        let cells = self.domain.cells();
        if let Some(rate) = self.rotation_rate {
            self.potential
                .iter()
                .zip(cells)
                .map(|(p, c)| p + 0.5 * rate * c.r2())
                .collect()
        } else {
            let w = self.travel_speed.unwrap();
            self.potential
                .iter()
                .zip(cells)
                .map(|(p, c)| p - w * c.center[0])
                .collect()
        }
    }

    /// Extract the multipliers of the converged problem. Refuses to report
    /// values for an unconverged solve.
    pub fn multipliers(&self) -> Result<Multipliers> {
        if !self.converged {
            return Err(Error::NotConverged);
        }
        let weights = self.comoving_weights();
        let mut min_support = f64::INFINITY;
        let mut max_outside = f64::NEG_INFINITY;
        for (i, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                min_support = min_support.min(weights[i]);
            } else {
                max_outside = max_outside.max(weights[i]);
            }
        }
        if !min_support.is_finite() {
            return Err(Error::EmptySupport);
        }
        Ok(Multipliers {
            rotation_rate: self.rotation_rate,
            travel_speed: self.travel_speed,
            mu: min_support,
            cut_gap: min_support - max_outside,
        })
    }

    /// Independent estimate of the rotation rate from the radial-derivative
    /// kernel: sum_{i != j} kappa(x_i, x_j) omega_i omega_j m_i m_j over the
    /// support. Only defined for Newtonian rotating solutions. The skipped
    /// diagonal contributes O(1/support_cells) relative error.
    pub fn rotation_rate_crosscheck(&self) -> Result<f64> {
        let n_fold = match self.n_fold {
            Some(n) => n,
            None => return Err(Error::RequiresNewtonian(self.s)),
        };
        if self.s != 1.0 {
            return Err(Error::RequiresNewtonian(self.s));
        }
        if !self.converged {
            return Err(Error::NotConverged);
        }
        let cells = self.domain.cells();
        let support = self.support_indices();
        let mut total = 0.0;
        for (a, &i) in support.iter().enumerate() {
            let wi = self.values[i] * cells[i].measure;
            for &j in &support[a + 1..] {
                let wj = self.values[j] * cells[j].measure;
                total += 2.0 * kappa_eval(n_fold, cells[i].center, cells[j].center) * wi * wj;
            }
        }
        Ok(total)
    }
}

fn centroid(cells: &[Cell], values: &[f64]) -> Result<[f64; 2]> {
    let mut m = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (v, c) in values.iter().zip(cells) {
        if *v > 0.0 {
            let w = v * c.measure;
            m += w;
            cx += w * c.center[0];
            cy += w * c.center[1];
        }
    }
    if m <= 0.0 {
        return Err(Error::EmptySupport);
    }
    Ok([cx / m, cy / m])
}

/// One ascent stage on a fixed grid. `step` maps the symmetrized potential to
/// the next field together with its momentum residual and constraint
/// multiplier (zero where there is no constraint).
///
/// With `guard` set, any energy decrease reverts the step and stops: the
/// previous iterate was a discrete optimum and the recorded trace is strictly
/// monotone. Without it the fixed-point iteration runs freely and the
/// best-energy iterate seen is returned; this is used for warm restarts whose
/// starting point is far from the constrained optimum.
#[allow(clippy::type_complexity)]
fn ascend(
    op: &KernelOperator,
    mirror: &dyn Fn(usize) -> usize,
    initial: Vec<f64>,
    step: &dyn Fn(&[f64]) -> Result<(Vec<f64>, f64, f64)>,
    tol_energy: f64,
    max_iters: usize,
    guard: bool,
) -> Result<(Vec<f64>, Vec<f64>, f64, Vec<IterationRecord>, bool)> {
    let mut values = initial;
    let mut phi = op.induced_potential(&values);
    let mut energy = op.energy_from_potential(&values, &phi);
    let mut alpha = 0.0;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, f64)> = None;
    let mut trace = vec![IterationRecord {
        energy,
        moved_cells: 0,
        momentum_residual: f64::NAN,
    }];
    let mut converged = false;
    for _ in 0..max_iters {
        // enforce exact mirror symmetry of the weights; combined with the
        // mirror-paired level multiset this keeps every iterate symmetric
        let phi_sym: Vec<f64> = (0..phi.len())
            .map(|i| 0.5 * (phi[i] + phi[mirror(i)]))
            .collect();
        let (next, residual, a) = step(&phi_sym)?;
        let next_phi = op.induced_potential(&next);
        let next_energy = op.energy_from_potential(&next, &next_phi);
        let moved = values
            .iter()
            .zip(&next)
            .filter(|(x, y)| x != y)
            .count();
        if guard && next_energy < energy - 1e-12 * energy.abs() {
            // discrete optimum reached: a further swap can only trade the
            // constraint residual against energy
            converged = true;
            break;
        }
        let gain = next_energy - energy;
        values = next;
        phi = next_phi;
        energy = next_energy;
        alpha = a;
        trace.push(IterationRecord {
            energy,
            moved_cells: moved,
            momentum_residual: residual,
        });
        if !guard && best.as_ref().map_or(true, |b| energy > b.0) {
            best = Some((energy, values.clone(), phi.clone(), alpha));
        }
        if moved == 0 || (guard && gain <= tol_energy * energy.abs()) {
            converged = true;
            break;
        }
    }
    if !guard {
        if let Some((e, v, p, a)) = best {
            if e > energy {
                values = v;
                phi = p;
                energy = e;
                alpha = a;
            }
        }
    }
    let _ = energy;
    Ok((values, phi, alpha, trace, converged))
}

fn second_moment(cells: &[Cell], values: &[f64]) -> f64 {
    values
        .iter()
        .zip(cells)
        .map(|(v, c)| v * c.r2() * c.measure)
        .sum()
}

fn first_moment_x1(cells: &[Cell], values: &[f64]) -> f64 {
    values
        .iter()
        .zip(cells)
        .map(|(v, c)| v * c.center[0] * c.measure)
        .sum()
}

/// Largest eps for which the scaled support fits inside the rotating sector.
pub fn max_eps_rotating(n_fold: u32) -> f64 {
    (0.5f64).min((std::f64::consts::PI / (2.0 * n_fold as f64)).sin())
}

/// Co-rotating N-fold solution: maximize the rotation-kernel energy over the
/// rearrangement class of the eps-scaled profile under sum |x|^2 omega m = 1.
pub fn solve_rotating(
    s: f64,
    n_fold: u32,
    eps: f64,
    profile: &Profile,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    let eps_max = max_eps_rotating(n_fold);
    if eps <= 0.0 || eps >= eps_max {
        return Err(Error::InfeasibleEpsilon { eps, eps_max });
    }
    let mode = KernelMode::Rotation { n_fold };

    // coarse locating pass; with very small eps it may resolve only a few
    // cells, which is still enough to place the refined window
    let mut r_center = 1.0;
    {
        let grid = SectorGrid::new(n_fold, opts.coarse_nr, opts.coarse_nt)?;
        if let Ok(sp) = scale_profile(profile, eps, grid.cells(), [1.0, 0.0], 1) {
            let op = KernelOperator::new(s, mode, grid.cells())?;
            let cells = grid.cells();
            let levels = sp.levels.clone();
            let step = |phi: &[f64]| -> Result<(Vec<f64>, f64, f64)> {
                let out = constrained_rearrange(&levels, phi, cells, 1.0, opts.tol_momentum)?;
                Ok((out.values, out.residual, out.alpha))
            };
            let (values, _, _, _, _) = ascend(
                &op,
                &|i| grid.mirror_index(i),
                sp.field,
                &step,
                opts.tol_energy,
                opts.max_iters.min(100),
                true,
            )?;
            let c = centroid(cells, &values)?;
            r_center = (c[0] * c[0] + c[1] * c[1]).sqrt();
        }
    }

    // refined window around the located core, recentered if the support
    // reaches the window edge
    let half_width = opts.window_factor * eps;
    for _attempt in 0..3 {
        let grid = SectorGrid::window(n_fold, opts.refined_n, opts.refined_n, r_center, half_width)?;
        let sp = scale_profile(
            profile,
            eps,
            grid.cells(),
            [r_center, 0.0],
            opts.min_support_cells,
        )?;
        // correct the placement radius so the initial iterate already meets
        // the momentum constraint as closely as the grid allows; otherwise
        // the first constrained step must trade boundary cells to fix L,
        // deforming the profile for no energetic reason. The discrete moment
        // is piecewise constant in the radius, so iterate only while the
        // residual actually improves.
        let mut sp = sp;
        let mut r_placed = r_center;
        for _ in 0..8 {
            let l0 = second_moment(grid.cells(), &sp.field);
            if (l0 - 1.0).abs() < 1e-9 {
                break;
            }
            let r_next = r_placed * (1.0 / l0).sqrt();
            let sp_next = scale_profile(
                profile,
                eps,
                grid.cells(),
                [r_next, 0.0],
                opts.min_support_cells,
            )?;
            let l1 = second_moment(grid.cells(), &sp_next.field);
            if (l1 - 1.0).abs() < (l0 - 1.0).abs() {
                r_placed = r_next;
                sp = sp_next;
            } else {
                break;
            }
        }
        let op = KernelOperator::new(s, mode, grid.cells())?;
        let cells = grid.cells();
        let levels = sp.levels.clone();
        let step = |phi: &[f64]| -> Result<(Vec<f64>, f64, f64)> {
            let out = constrained_rearrange(&levels, phi, cells, 1.0, opts.tol_momentum)?;
            Ok((out.values, out.residual, out.alpha))
        };
        let (values, phi, _alpha, trace, converged) = ascend(
            &op,
            &|i| grid.mirror_index(i),
            sp.field,
            &step,
            opts.tol_energy,
            opts.max_iters,
            true,
        )?;

        let c = centroid(cells, &values)?;
        let r_new = (c[0] * c[0] + c[1] * c[1]).sqrt();
        if support_touches_sector_window(&grid, &values) {
            r_center = r_new;
            continue;
        }

        let energy = op.energy_from_potential(&values, &phi);
        let momentum = second_moment(cells, &values);
        // the constraint can only be met to the grid's moment granularity
        let converged = converged && (momentum - 1.0).abs() <= opts.tol_momentum;

        // Multiplier alpha = rotation rate of the frame in which the
        // converged blob is steady: tangential velocity induced at the blob
        // centroid by the rotation images, divided by the centroid radius.
        // The self term contributes only through blob deformation (higher
        // order in eps); all images sit at least 2 sin(pi/N) times the
        // centroid radius away, so the analytic kernel gradients are smooth.
        let rate = image_rotation_rate(s, n_fold, cells, &values, c);
        let iterations = trace.len() - 1;
        return Ok(EquilibriumResult {
            s,
            eps,
            n_fold: Some(n_fold),
            travel_speed: None,
            pair_half_distance: None,
            domain: Domain::Sector(grid),
            values,
            levels,
            potential: phi,
            energy,
            momentum,
            rotation_rate: Some(rate),
            converged,
            iterations,
            trace,
        });
    }
    Err(Error::Unconverged(opts.max_iters))
}

/// Rotation rate of the frame in which the field is steady, from the
/// tangential velocity that the N-1 rotated image copies of the field induce
/// at the given point (the field centroid): with psi_img(x) =
/// sum_j w_j sum_{k=1}^{N-1} G_s(x - Q_{2 pi k / N} x_j) and u = -grad^perp
/// psi, returns (u . e_theta) / |x|.
fn image_rotation_rate(s: f64, n_fold: u32, cells: &[Cell], values: &[f64], at: [f64; 2]) -> f64 {
    let r = (at[0] * at[0] + at[1] * at[1]).sqrt();
    assert!(r > 0.0);
    let mut u = [0.0f64, 0.0];
    for (j, cell) in cells.iter().enumerate() {
        let w = values[j] * cell.measure;
        if w == 0.0 {
            continue;
        }
        let [x1, x2] = cell.center;
        for k in 1..n_fold {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n_fold as f64;
            let (sa, ca) = a.sin_cos();
            let img = [ca * x1 - sa * x2, sa * x1 + ca * x2];
            let g = green_grad(s, [at[0] - img[0], at[1] - img[1]]);
            u[0] += w * g[1];
            u[1] -= w * g[0];
        }
    }
    (at[0] * u[1] - at[1] * u[0]) / (r * r)
}

fn support_touches_sector_window(grid: &SectorGrid, values: &[f64]) -> bool {
    let dr = grid.radial_step(1.0).abs().max(1e-12);
    for (i, &v) in values.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let (r, _) = grid.polar(i);
        // only edges that are genuine window cuts (not sector boundary clamps)
        if grid.r_lo > SECTOR_R_MIN + 1e-12 && r - grid.r_lo < 1.5 * dr {
            return true;
        }
        if grid.r_hi < SECTOR_R_MAX - 1e-12 && grid.r_hi - r < 1.5 * dr {
            return true;
        }
    }
    false
}

/// Translating pair solution: maximize the mirror-kernel energy minus
/// w * x1-moment over the rearrangement class of the eps-scaled profile on
/// the admissible half-plane disk.
pub fn solve_translating(
    s: f64,
    w: f64,
    eps: f64,
    profile: &Profile,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    if w <= 0.0 {
        return Err(Error::Config(format!("travel speed must be positive, got {w}")));
    }
    let d = pair_distance(s, w);
    let eps_max = 0.5 * d;
    if eps <= 0.0 || eps >= eps_max {
        return Err(Error::InfeasibleEpsilon { eps, eps_max });
    }
    let mode = KernelMode::Mirror;

    let mut x1_center = d;
    {
        let grid = HalfPlaneGrid::new(d, opts.coarse_n)?;
        if let Ok(sp) = scale_profile(profile, eps, grid.cells(), [d, 0.0], 1) {
            let op = KernelOperator::new(s, mode, grid.cells())?;
            let cells = grid.cells();
            let levels = sp.levels.clone();
            let step = |phi: &[f64]| -> Result<(Vec<f64>, f64, f64)> {
                let weights: Vec<f64> = phi
                    .iter()
                    .zip(cells)
                    .map(|(p, c)| p - w * c.center[0])
                    .collect();
                Ok((bathtub_rearrange(&levels, &weights), 0.0, 0.0))
            };
            let (values, _, _, _, _) = ascend(
                &op,
                &|i| grid.mirror_index(i),
                sp.field,
                &step,
                opts.tol_energy,
                opts.max_iters.min(100),
                true,
            )?;
            x1_center = centroid(cells, &values)?[0];
        }
    }

    let half_width = opts.window_factor * eps;
    for _attempt in 0..3 {
        let grid = HalfPlaneGrid::window(d, x1_center, half_width, opts.refined_n)?;
        let sp = scale_profile(
            profile,
            eps,
            grid.cells(),
            [x1_center, 0.0],
            opts.min_support_cells,
        )?;
        let op = KernelOperator::new(s, mode, grid.cells())?;
        let cells = grid.cells();
        let levels = sp.levels.clone();
        let step = |phi: &[f64]| -> Result<(Vec<f64>, f64, f64)> {
            let weights: Vec<f64> = phi
                .iter()
                .zip(cells)
                .map(|(p, c)| p - w * c.center[0])
                .collect();
            Ok((bathtub_rearrange(&levels, &weights), 0.0, 0.0))
        };
        let (values, phi, _, trace, converged) = ascend(
            &op,
            &|i| grid.mirror_index(i),
            sp.field,
            &step,
            opts.tol_energy,
            opts.max_iters,
            true,
        )?;

        let c = centroid(cells, &values)?;
        if support_touches_window(&grid, &values) {
            x1_center = c[0];
            continue;
        }

        let energy = op.energy_from_potential(&values, &phi);
        let momentum = first_moment_x1(cells, &values);
        let iterations = trace.len() - 1;
        return Ok(EquilibriumResult {
            s,
            eps,
            n_fold: None,
            travel_speed: Some(w),
            pair_half_distance: Some(d),
            domain: Domain::HalfPlane(grid),
            values,
            levels,
            potential: phi,
            energy,
            momentum,
            rotation_rate: None,
            converged,
            iterations,
            trace,
        });
    }
    Err(Error::Unconverged(opts.max_iters))
}

fn support_touches_window(grid: &HalfPlaneGrid, values: &[f64]) -> bool {
    for (i, &v) in values.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let c = grid.cells()[i].center;
        let dx = c[0] - grid.center[0];
        let dy = c[1] - grid.center[1];
        if (dx * dx + dy * dy).sqrt() > grid.radius - 1.5 * grid.h {
            return true;
        }
    }
    false
}
