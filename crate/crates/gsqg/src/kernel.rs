//! Interaction kernels: the Green function of (-Delta)^s on the plane for
//! s in [1/2, 1], its N-fold rotation and half-plane mirror image sums, and
//! the discrete kernel operator used by the energy-ascent solvers.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::Cell;

/// Above this cell count the pairwise kernel table would not fit comfortably
/// in memory, so entries are computed on the fly.
const TABLE_CELL_LIMIT: usize = 4608;

/// Coefficient of |z|^(2s-2) in the Green function for s < 1:
/// Gamma(1-s) / (2^(2s) * pi * Gamma(s)).
pub fn riesz_constant(s: f64) -> f64 {
    assert!(s < 1.0, "riesz constant undefined at s = 1");
    gamma(1.0 - s) / (2f64.powf(2.0 * s) * std::f64::consts::PI * gamma(s))
}

/// Green function G_s evaluated at displacement z:
/// (1/2pi) ln(1/|z|) for s = 1, c_s |z|^(2s-2) for s < 1.
/// Returns +infinity at z = 0.
pub fn green_eval(s: f64, z: [f64; 2]) -> f64 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if r2 == 0.0 {
        return f64::INFINITY;
    }
    if s == 1.0 {
        -0.25 * r2.ln() / std::f64::consts::PI
    } else {
        riesz_constant(s) * r2.powf(s - 1.0)
    }
}

/// Gradient of G_s with respect to x at displacement z = x - x'.
/// Panics at z = 0 (the gradient is singular there).
pub fn green_grad(s: f64, z: [f64; 2]) -> [f64; 2] {
    let r2 = z[0] * z[0] + z[1] * z[1];
    assert!(r2 > 0.0, "green gradient undefined at z = 0");
    let f = if s == 1.0 {
        -1.0 / (2.0 * std::f64::consts::PI * r2)
    } else {
        riesz_constant(s) * (2.0 * s - 2.0) * r2.powf(s - 2.0)
    };
    [f * z[0], f * z[1]]
}

/// Mean of G_s over a disk of the given measure centered at the singularity.
/// Used as the diagonal (self-interaction) entry of the discrete kernel, so
/// that cell self-energy matches the continuum value for an equal-area disk.
///
/// With r = sqrt(measure/pi): (1/2pi) ln(1/r) + 1/(4pi) for s = 1,
/// and c_s r^(2s-2) / s for s < 1.
pub fn self_cell_value(s: f64, measure: f64) -> f64 {
    assert!(measure > 0.0);
    let r = (measure / std::f64::consts::PI).sqrt();
    if s == 1.0 {
        (-r.ln() + 0.5) / (2.0 * std::f64::consts::PI)
    } else {
        riesz_constant(s) * r.powf(2.0 * s - 2.0) / s
    }
}

/// Image structure of the interaction kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelMode {
    /// Plain Green function, no images.
    Plain,
    /// N-fold rotation sum: K(x, x') = sum_k G_s(x - Q_{2 pi k / N} x').
    Rotation { n_fold: u32 },
    /// Half-plane mirror: P(x, x') = G_s(x - x') - G_s(x - xbar'),
    /// where xbar' = (-x1', x2').
    Mirror,
}

/// One image term: (cos, sin) of the rotation applied to x', the sign of x1',
/// and the sign of the Green function contribution.
#[derive(Debug, Clone, Copy)]
struct Image {
    cos: f64,
    sin: f64,
    flip_x1: bool,
    sign: f64,
}

impl Image {
    fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let x1 = if self.flip_x1 { -x[0] } else { x[0] };
        [x1 * self.cos - x[1] * self.sin, x1 * self.sin + x[1] * self.cos]
    }
}

/// Discrete interaction operator on a fixed cell set. Entries are symmetric
/// by construction (computed once per unordered pair), and a full pairwise
/// table is cached when the grid is small enough.
pub struct KernelOperator {
    pub s: f64,
    pub mode: KernelMode,
    cells: Vec<Cell>,
    images: Vec<Image>,
    table: Option<Vec<f64>>,
}

impl KernelOperator {
    pub fn new(s: f64, mode: KernelMode, cells: &[Cell]) -> Result<Self> {
        if !(0.5..=1.0).contains(&s) {
            return Err(Error::Config(format!("s must lie in [1/2, 1], got {s}")));
        }
        let mut images = Vec::new();
        match mode {
            KernelMode::Plain => images.push(Image {
                cos: 1.0,
                sin: 0.0,
                flip_x1: false,
                sign: 1.0,
            }),
            KernelMode::Rotation { n_fold } => {
                if n_fold < 2 {
                    return Err(Error::Config(format!(
                        "rotation kernel needs n_fold >= 2, got {n_fold}"
                    )));
                }
                for k in 0..n_fold {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / n_fold as f64;
                    images.push(Image {
                        cos: a.cos(),
                        sin: a.sin(),
                        flip_x1: false,
                        sign: 1.0,
                    });
                }
            }
            KernelMode::Mirror => {
                images.push(Image {
                    cos: 1.0,
                    sin: 0.0,
                    flip_x1: false,
                    sign: 1.0,
                });
                images.push(Image {
                    cos: 1.0,
                    sin: 0.0,
                    flip_x1: true,
                    sign: -1.0,
                });
            }
        }
        let mut op = Self {
            s,
            mode,
            cells: cells.to_vec(),
            images,
            table: None,
        };
        if cells.len() <= TABLE_CELL_LIMIT {
            let n = cells.len();
            let mut table = vec![0.0f64; n * n];
            table
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| {
                    for (j, slot) in row.iter_mut().enumerate() {
                        *slot = op.compute_entry(i, j);
                    }
                });
            op.table = Some(table);
        }
        Ok(op)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Kernel entry K(x_i, x_j), with the self-interaction diagonal.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if let Some(table) = &self.table {
            table[i * self.cells.len() + j]
        } else {
            self.compute_entry(i, j)
        }
    }

    fn compute_entry(&self, i: usize, j: usize) -> f64 {
        // canonical unordered-pair evaluation keeps the matrix exactly symmetric
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let xa = self.cells[a].center;
        let xb = self.cells[b].center;
        let mut total = 0.0;
        for (k, img) in self.images.iter().enumerate() {
            if a == b && k == 0 {
                total += self_cell_value(self.s, self.cells[a].measure);
                continue;
            }
            let y = img.apply(xb);
            total += img.sign * green_eval(self.s, [xa[0] - y[0], xa[1] - y[1]]);
        }
        total
    }

    /// Potential phi_i = sum_j K(x_i, x_j) omega_j m_j. Parallelized per
    /// output cell; each cell's sum is sequential, so the result is
    /// deterministic.
    pub fn induced_potential(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.cells.len());
        let weighted: Vec<f64> = values
            .iter()
            .zip(&self.cells)
            .map(|(v, c)| v * c.measure)
            .collect();
        (0..self.cells.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (j, &w) in weighted.iter().enumerate() {
                    if w != 0.0 {
                        acc += self.entry(i, j) * w;
                    }
                }
                acc
            })
            .collect()
    }

    /// Interaction energy (1/2) sum_{i,j} K(x_i, x_j) omega_i omega_j m_i m_j.
    pub fn energy(&self, values: &[f64]) -> f64 {
        let phi = self.induced_potential(values);
        self.energy_from_potential(values, &phi)
    }

    pub fn energy_from_potential(&self, values: &[f64], phi: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((v, p), c) in values.iter().zip(phi).zip(&self.cells) {
            acc += v * p * c.measure;
        }
        0.5 * acc
    }
}

/// N-fold rotation kernel for s = 1 at explicit points (no self-interaction).
fn rotation_kernel_newtonian(n_fold: u32, x: [f64; 2], xp: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for k in 0..n_fold {
        let a = 2.0 * std::f64::consts::PI * k as f64 / n_fold as f64;
        let y = [xp[0] * a.cos() - xp[1] * a.sin(), xp[0] * a.sin() + xp[1] * a.cos()];
        total += green_eval(1.0, [x[0] - y[0], x[1] - y[1]]);
    }
    total
}

/// Step for the central finite differences in `kappa_eval`.
pub const KAPPA_FD_STEP: f64 = 1e-5;

/// Radial-derivative kernel of the N-fold Newtonian rotation kernel:
/// kappa(x, x') = -(1/2) [ (1/r) dK/dr + (1/r') dK/dr' ],
/// computed by central differences in r and r'. It is bounded by N/pi and
/// governs the angular velocity of the rotating configurations.
pub fn kappa_eval(n_fold: u32, x: [f64; 2], xp: [f64; 2]) -> f64 {
    let h = KAPPA_FD_STEP;
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let rp = (xp[0] * xp[0] + xp[1] * xp[1]).sqrt();
    assert!(r > 2.0 * h && rp > 2.0 * h, "kappa needs points away from the origin");
    let u = [x[0] / r, x[1] / r];
    let up = [xp[0] / rp, xp[1] / rp];
    let k = |x: [f64; 2], xp: [f64; 2]| rotation_kernel_newtonian(n_fold, x, xp);
    let d_r = (k([x[0] + h * u[0], x[1] + h * u[1]], xp)
        - k([x[0] - h * u[0], x[1] - h * u[1]], xp))
        / (2.0 * h);
    let d_rp = (k(x, [xp[0] + h * up[0], xp[1] + h * up[1]])
        - k(x, [xp[0] - h * up[0], xp[1] - h * up[1]]))
        / (2.0 * h);
    -0.5 * (d_r / r + d_rp / rp)
}
