//! Acceptance gate: eight end-to-end criteria checking the computed
//! rotating and translating equilibria against independent oracles
//! (point-vortex rates, pair-interaction energetics, quadrature constants)
//! and against the structural invariants of the variational scheme.
//!
//! Expensive solver runs and sweeps are shared between criteria through
//! `OnceLock` statics so the suite stays within its time budget.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gsqg::diagnostics::{run_sweep, SweepMode, SweepReport};
use gsqg::grid::{HalfPlaneGrid, SectorGrid};
use gsqg::kernel::{kappa_eval, KernelMode, KernelOperator};
use gsqg::oracle;
use gsqg::profile::Profile;
use gsqg::rearrange::{angular_steiner, bathtub_rearrange, x2_steiner};
use gsqg::solver::{solve_rotating, solve_translating, EquilibriumResult, SolverOptions};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const SWEEP_EPS: [f64; 3] = [0.1, 0.05, 0.025];

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn report(criterion: u32, label: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion} ({label}): {detail}");
}

// ---- shared solver runs ----------------------------------------------------

fn rot_s1() -> &'static [EquilibriumResult; 3] {
    static CELL: OnceLock<[EquilibriumResult; 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        [2u32, 3, 4].map(|n| {
            solve_rotating(1.0, n, 0.025, &Profile::patch(), &opts())
                .expect("rotating s=1 solve")
        })
    })
}

fn rot_fractional() -> &'static [EquilibriumResult; 2] {
    static CELL: OnceLock<[EquilibriumResult; 2]> = OnceLock::new();
    CELL.get_or_init(|| {
        [0.5f64, 0.75].map(|s| {
            solve_rotating(s, 2, 0.025, &Profile::patch(), &opts())
                .expect("rotating fractional solve")
        })
    })
}

fn tra_half() -> &'static EquilibriumResult {
    static CELL: OnceLock<EquilibriumResult> = OnceLock::new();
    CELL.get_or_init(|| {
        let w = oracle::pair_speed(0.5, 1.0);
        solve_translating(0.5, w, 0.025, &Profile::patch(), &opts())
            .expect("translating s=1/2 solve")
    })
}

fn tra_s1() -> &'static EquilibriumResult {
    static CELL: OnceLock<EquilibriumResult> = OnceLock::new();
    CELL.get_or_init(|| {
        solve_translating(1.0, 1.0 / (4.0 * PI), 0.05, &Profile::patch(), &opts())
            .expect("translating s=1 solve")
    })
}

fn rot_parabolic() -> &'static EquilibriumResult {
    static CELL: OnceLock<EquilibriumResult> = OnceLock::new();
    CELL.get_or_init(|| {
        solve_rotating(1.0, 2, 0.05, &Profile::parabolic(), &opts())
            .expect("rotating parabolic solve")
    })
}

fn tra_parabolic() -> &'static EquilibriumResult {
    static CELL: OnceLock<EquilibriumResult> = OnceLock::new();
    CELL.get_or_init(|| {
        solve_translating(1.0, 1.0 / (4.0 * PI), 0.05, &Profile::parabolic(), &opts())
            .expect("translating parabolic solve")
    })
}

fn sweep_rot_patch() -> &'static SweepReport {
    static CELL: OnceLock<SweepReport> = OnceLock::new();
    CELL.get_or_init(|| {
        run_sweep(
            1.0,
            SweepMode::Rotating { n_fold: 2 },
            &SWEEP_EPS,
            &Profile::patch(),
            &opts(),
        )
        .expect("rotating patch sweep")
    })
}

fn sweep_tra_patch() -> &'static SweepReport {
    static CELL: OnceLock<SweepReport> = OnceLock::new();
    CELL.get_or_init(|| {
        run_sweep(
            1.0,
            SweepMode::Translating { speed: 1.0 / (4.0 * PI) },
            &SWEEP_EPS,
            &Profile::patch(),
            &opts(),
        )
        .expect("translating patch sweep")
    })
}

fn sweep_rot_parabolic() -> &'static SweepReport {
    static CELL: OnceLock<SweepReport> = OnceLock::new();
    CELL.get_or_init(|| {
        run_sweep(
            1.0,
            SweepMode::Rotating { n_fold: 2 },
            &SWEEP_EPS,
            &Profile::parabolic(),
            &opts(),
        )
        .expect("rotating parabolic sweep")
    })
}

fn sweep_tra_parabolic() -> &'static SweepReport {
    static CELL: OnceLock<SweepReport> = OnceLock::new();
    CELL.get_or_init(|| {
        run_sweep(
            1.0,
            SweepMode::Translating { speed: 1.0 / (4.0 * PI) },
            &SWEEP_EPS,
            &Profile::parabolic(),
            &opts(),
        )
        .expect("translating parabolic sweep")
    })
}

// ---- criteria --------------------------------------------------------------

/// Rotating s = 1: extracted angular velocity matches the N-point-vortex
/// polygon rate (N - 1)/(4 pi) within 10%, and the independent kernel
/// radial-derivative crosscheck within 5%, for N = 2, 3, 4.
#[test]
fn criterion_1_rotating_newtonian_rate() {
    let mut pass = true;
    let mut detail = String::new();
    for result in rot_s1() {
        let n = result.n_fold.unwrap();
        let alpha = result.rotation_rate.unwrap();
        let target = oracle::polygon_rotation_rate(n, 1.0);
        let cross = result.rotation_rate_crosscheck().unwrap();
        let rel = (alpha - target).abs() / target;
        let rel_cross = (alpha - cross).abs() / cross;
        pass &= result.converged && rel <= 0.10 && rel_cross <= 0.05;
        detail.push_str(&format!(
            "N={n} alpha={alpha:.5} target={target:.5} (rel {rel:.1e}, crosscheck rel {rel_cross:.1e}); "
        ));
    }
    report(1, "rotating s=1 rate vs polygon", pass, &detail);
    assert!(pass, "{detail}");
}

/// Rotating s < 1: extracted angular velocity matches the point-vortex
/// polygon rate computed from the induced velocity field within 15%,
/// for s = 1/2 and s = 3/4 at N = 2.
#[test]
fn criterion_2_rotating_fractional_rate() {
    let mut pass = true;
    let mut detail = String::new();
    for result in rot_fractional() {
        let s = result.s;
        let alpha = result.rotation_rate.unwrap();
        let target = oracle::polygon_velocity_rate(2, s);
        let rel = (alpha - target).abs() / target;
        pass &= result.converged && rel <= 0.15;
        detail.push_str(&format!(
            "s={s} alpha={alpha:.5} target={target:.5} (rel {rel:.1e}); "
        ));
    }
    report(2, "rotating s<1 rate vs polygon velocity", pass, &detail);
    assert!(pass, "{detail}");
}

/// s = 1 cut-level asymptotics: the slope of mu against ln(1/eps) along the
/// sweep is 1/(2 pi) within 10%, for both solvers on the patch profile.
#[test]
fn criterion_3_cut_level_log_slope() {
    let target = 1.0 / (2.0 * PI);
    let mut pass = true;
    let mut detail = String::new();
    for (name, sweep) in [("rotating", sweep_rot_patch()), ("translating", sweep_tra_patch())] {
        let slope = sweep.mu_slope.expect("mu slope requires 3 converged s=1 runs");
        let rel = (slope - target).abs() / target;
        pass &= rel <= 0.10;
        detail.push_str(&format!("{name} slope={slope:.5} target={target:.5} (rel {rel:.1e}); "));
    }
    report(3, "mu ~ ln(1/eps)/(2 pi)", pass, &detail);
    assert!(pass, "{detail}");
}

/// s = 1/2 cut-level asymptotics: eps^(2-2s) * mu approaches the quadrature
/// constant of the scaled-profile potential within 15%, for both solvers.
#[test]
fn criterion_4_cut_level_fractional_scale() {
    let profile = Profile::patch();
    let target = oracle::potential_constant(0.5, &profile).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    let rot = &rot_fractional()[0];
    for (name, result) in [("rotating", rot), ("translating", tra_half())] {
        let mu = result.multipliers().unwrap().mu;
        let scaled = result.eps.powf(2.0 - 2.0 * result.s) * mu;
        let rel = (scaled - target).abs() / target;
        pass &= result.converged && rel <= 0.15;
        detail.push_str(&format!(
            "{name} eps*mu={scaled:.5} target={target:.5} (rel {rel:.1e}); "
        ));
    }
    report(4, "s=1/2 scaled cut level vs quadrature constant", pass, &detail);
    assert!(pass, "{detail}");
}

/// Translating placement: the solution centroid sits at the admissible disk
/// center (d, 0) up to max(eps, 2h), and the pair-interaction-energy
/// minimizer recovers the speed/separation relation to 1e-8.
#[test]
fn criterion_5_pair_placement_and_energy_minimizer() {
    let result = tra_s1();
    let d = result.pair_half_distance.unwrap();
    let c = result.centroid().unwrap();
    let h = result.domain.cell_width();
    let allow = result.eps.max(2.0 * h);
    let offset = ((c[0] - d).powi(2) + c[1].powi(2)).sqrt();
    let mut pass = result.converged && offset <= allow;
    let mut detail = format!("centroid offset {offset:.2e} <= {allow:.2e}; ");
    for s in [0.5, 0.75, 1.0] {
        let w = 0.05;
        let tau = oracle::kirchhoff_routh_minimizer(s, w);
        let dist = oracle::pair_distance(s, w);
        let gap = (tau - dist).abs();
        pass &= gap <= 1e-8;
        detail.push_str(&format!("s={s} |minimizer - distance|={gap:.1e}; "));
    }
    report(5, "pair center and interaction-energy minimizer", pass, &detail);
    assert!(pass, "{detail}");
}

/// Support-size stability: diameter/eps changes by less than 20% between the
/// two smallest sweep members, for both solvers on the patch profile.
#[test]
fn criterion_6_support_diameter_scaling() {
    let mut pass = true;
    let mut detail = String::new();
    for (name, sweep) in [("rotating", sweep_rot_patch()), ("translating", sweep_tra_patch())] {
        let change = sweep.diameter_over_eps_change.expect("needs 2 converged runs");
        pass &= change < 0.20;
        detail.push_str(&format!("{name} rel change {change:.2e}; "));
    }
    report(6, "diameter/eps stability along sweep", pass, &detail);
    assert!(pass, "{detail}");
}

/// Profile convergence: the rescaled solution approaches the radial
/// rearrangement of the profile monotonically along each sweep, for both
/// solvers and both the patch and parabolic profiles.
#[test]
fn criterion_7_rescaled_profile_convergence() {
    let mut pass = true;
    let mut detail = String::new();
    let sweeps = [
        ("rotating patch", sweep_rot_patch()),
        ("translating patch", sweep_tra_patch()),
        ("rotating parabolic", sweep_rot_parabolic()),
        ("translating parabolic", sweep_tra_parabolic()),
    ];
    for (name, sweep) in sweeps {
        let dists: Vec<String> = sweep
            .entries
            .iter()
            .map(|e| format!("{:.2e}", e.profile_distance_l1))
            .collect();
        pass &= !sweep.partial && sweep.distance_monotone;
        detail.push_str(&format!(
            "{name} L1 distances [{}] monotone={}; ",
            dists.join(", "),
            sweep.distance_monotone
        ));
    }
    report(7, "rescaled profile distance decreases", pass, &detail);
    assert!(pass, "{detail}");
}

/// Structural property suite: rearrangement-class preservation, ascent
/// monotonicity, bathtub optimality against exhaustive search,
/// symmetrization invariants, kernel bounds and symmetry, and the
/// comonotonicity of the converged field with its co-moving weight.
#[test]
fn criterion_8_structural_properties() {
    let mut pass = true;
    let mut detail = String::new();
    let mut sub = |name: &str, ok: bool| {
        pass &= ok;
        detail.push_str(&format!("{name}={}; ", if ok { "ok" } else { "FAIL" }));
    };

    // (a) every solver result is an exact permutation of its level multiset
    let mut class_ok = true;
    let singles: Vec<&EquilibriumResult> = rot_s1()
        .iter()
        .chain(rot_fractional())
        .chain([tra_half(), tra_s1(), rot_parabolic(), tra_parabolic()])
        .collect();
    for result in &singles {
        let mut sorted = result.values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        class_ok &= sorted.len() == result.levels.len()
            && sorted
                .iter()
                .zip(&result.levels)
                .all(|(a, b)| a.to_bits() == b.to_bits());
    }
    sub("class preservation", class_ok);

    // (b) the iteration trace is an energy ascent
    let ascent_ok = singles.iter().all(|r| {
        r.trace
            .windows(2)
            .all(|w| w[1].energy >= w[0].energy - 1e-12 * w[0].energy.abs())
    });
    sub("energy ascent", ascent_ok);

    // (c) mirror symmetry of the converged field is exact
    let mirror_ok = singles.iter().all(|r| {
        r.values
            .iter()
            .enumerate()
            .all(|(i, v)| v.to_bits() == r.values[r.domain.mirror_index(i)].to_bits())
    });
    sub("mirror symmetry", mirror_ok);

    // (d) bathtub assignment beats exhaustive permutation search
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bathtub_ok = true;
    for _ in 0..30 {
        let n = rng.gen_range(2..=7);
        let mut levels: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let got: f64 = bathtub_rearrange(&levels, &weights)
            .iter()
            .zip(&weights)
            .map(|(v, w)| v * w)
            .sum();
        let best = permutation_max(&levels, &weights);
        bathtub_ok &= got >= best - 1e-12 * best.abs().max(1.0);
    }
    sub("bathtub optimality", bathtub_ok);

    // (e) symmetrization preserves slice multisets and never lowers energy
    let sector = SectorGrid::new(3, 16, 12).unwrap();
    let half = HalfPlaneGrid::new(1.0, 16).unwrap();
    let mut steiner_ok = true;
    for s in [0.5, 0.75, 1.0] {
        let op_rot =
            KernelOperator::new(s, KernelMode::Rotation { n_fold: 3 }, sector.cells()).unwrap();
        let op_mir = KernelOperator::new(s, KernelMode::Mirror, half.cells()).unwrap();
        for _ in 0..20 {
            let v: Vec<f64> = (0..sector.cells().len()).map(|_| rng.gen::<f64>()).collect();
            let sv = angular_steiner(&sector, &v);
            for jr in 0..16 {
                steiner_ok &= same_multiset(&slice(&v, sector.ring(jr)), &slice(&sv, sector.ring(jr)));
            }
            steiner_ok &= op_rot.energy(&sv) >= op_rot.energy(&v) - 1e-12;

            let u: Vec<f64> = (0..half.cells().len()).map(|_| rng.gen::<f64>()).collect();
            let su = x2_steiner(&half, &u);
            for col in half.columns() {
                let idx: Vec<f64> = col.iter().map(|&i| u[i]).collect();
                let sdx: Vec<f64> = col.iter().map(|&i| su[i]).collect();
                steiner_ok &= same_multiset(&idx, &sdx);
            }
            steiner_ok &= op_mir.energy(&su) >= op_mir.energy(&u) - 1e-12;
        }
    }
    sub("symmetrization", steiner_ok);

    // (f) the rotation-kernel radial-derivative kernel stays within [0, N/pi]
    let mut kappa_ok = true;
    for _ in 0..1000 {
        let n_fold = rng.gen_range(2u32..=5);
        let point = |rng: &mut ChaCha8Rng| {
            let r = rng.gen_range(0.5..1.5);
            let t = rng.gen_range(-PI / n_fold as f64..PI / n_fold as f64);
            [r * t.cos(), r * t.sin()]
        };
        let x = point(&mut rng);
        let xp = point(&mut rng);
        let too_close = (0..n_fold).any(|k| {
            let a = 2.0 * PI * k as f64 / n_fold as f64;
            let y = [xp[0] * a.cos() - xp[1] * a.sin(), xp[0] * a.sin() + xp[1] * a.cos()];
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt() < 0.02
        });
        if too_close {
            continue;
        }
        let kappa = kappa_eval(n_fold, x, xp);
        kappa_ok &= kappa >= -1e-6 && kappa <= n_fold as f64 / PI + 1e-6;
    }
    sub("kappa bounds", kappa_ok);

    // (g) kernel symmetry and linearity of the induced potential
    let op = KernelOperator::new(0.75, KernelMode::Rotation { n_fold: 3 }, sector.cells()).unwrap();
    let nc = sector.cells().len();
    let mut kernel_ok = (0..nc)
        .all(|i| (0..nc).all(|j| (op.entry(i, j) - op.entry(j, i)).abs() <= 1e-12));
    let u: Vec<f64> = (0..nc).map(|_| rng.gen::<f64>()).collect();
    let v: Vec<f64> = (0..nc).map(|_| rng.gen::<f64>()).collect();
    let combo: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
    let pu = op.induced_potential(&u);
    let pv = op.induced_potential(&v);
    let pc = op.induced_potential(&combo);
    kernel_ok &= pc
        .iter()
        .zip(pu.iter().zip(&pv))
        .all(|(c, (a, b))| (c - (2.0 * a - 0.5 * b)).abs() <= 1e-10 * (1.0 + c.abs()));
    sub("kernel symmetry/linearity", kernel_ok);

    // (h) the converged field is comonotone with its co-moving weight
    let mut tau_ok = true;
    let mut tau_note = String::new();
    for result in [rot_parabolic(), tra_parabolic()] {
        let weights = result.comoving_weights();
        let support = result.support_indices();
        let vals: Vec<f64> = support.iter().map(|&i| result.values[i]).collect();
        let ws: Vec<f64> = support.iter().map(|&i| weights[i]).collect();
        let tau = gsqg::diagnostics::kendall_tau_b(&vals, &ws);
        tau_ok &= tau >= 0.99;
        tau_note.push_str(&format!("tau={tau:.4}; "));
    }
    sub("comonotone support", tau_ok);
    detail.push_str(&tau_note);

    report(8, "structural property suite", pass, &detail);
    assert!(pass, "{detail}");
}

// ---- helpers ---------------------------------------------------------------

fn slice(values: &[f64], range: std::ops::Range<usize>) -> Vec<f64> {
    values[range].to_vec()
}

fn same_multiset(a: &[f64], b: &[f64]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Maximum of sum levels[p(i)] * weights[i] over all permutations p,
/// by exhaustive recursion (inputs are small).
fn permutation_max(levels: &[f64], weights: &[f64]) -> f64 {
    fn go(levels: &mut Vec<f64>, weights: &[f64], acc: f64, best: &mut f64) {
        if levels.is_empty() {
            *best = best.max(acc);
            return;
        }
        let w = weights[weights.len() - levels.len()];
        for i in 0..levels.len() {
            let l = levels.swap_remove(i);
            go(levels, weights, acc + l * w, best);
            levels.push(l);
            let last = levels.len() - 1;
            levels.swap(i, last);
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(&mut levels.to_vec(), weights, 0.0, &mut best);
    best
}
