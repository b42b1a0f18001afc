//! Computational domains: the annular sector for the rotating problem and the
//! half-plane disk window for the translating problem.
//!
//! Both grids use cells of exactly equal measure (the sector is subdivided
//! uniformly in r^2 and theta, the half-plane window is Cartesian), so that
//! permuting cell values conserves mass exactly and the discrete rearrangement
//! class is a plain multiset of values.

use crate::error::{Error, Result};

pub const SECTOR_R_MIN: f64 = 0.5;
pub const SECTOR_R_MAX: f64 = 1.5;

/// One grid cell: center position and (positive) measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub center: [f64; 2],
    pub measure: f64,
}

impl Cell {
    pub fn r2(&self) -> f64 {
        self.center[0] * self.center[0] + self.center[1] * self.center[1]
    }
}

/// Annular sector grid for the rotating problem, covering
/// r in (r_lo, r_hi), theta in (-theta_half, theta_half).
///
/// Cells are ordered by (radial index, angular index), i.e. sorted by (r, theta).
/// Radial edges are uniform in r^2, so every cell has the same measure.
#[derive(Debug, Clone)]
pub struct SectorGrid {
    pub n_fold: u32,
    pub nr: usize,
    pub nt: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_half: f64,
    cells: Vec<Cell>,
    /// (r, theta) of each cell center, same ordering as `cells`.
    polar: Vec<(f64, f64)>,
}

impl SectorGrid {
    /// Full sector S for fold count N: 1/2 < r < 3/2, |theta| < pi/(2N).
    pub fn new(n_fold: u32, nr: usize, nt: usize) -> Result<Self> {
        if n_fold < 2 {
            return Err(Error::Config(format!("n_fold must be >= 2, got {n_fold}")));
        }
        if nr < 8 || nt < 8 {
            return Err(Error::Config(format!(
                "sector grid needs nr, nt >= 8, got nr={nr}, nt={nt}"
            )));
        }
        let theta_half = std::f64::consts::PI / (2.0 * n_fold as f64);
        Self::build(n_fold, nr, nt, SECTOR_R_MIN, SECTOR_R_MAX, theta_half)
    }

    /// Refined window: same ordering rules, restricted to a symmetric window of
    /// radial half-width `half_width` around radius `r_center` and angular
    /// half-width `half_width / r_center`, clamped to the full sector.
    pub fn window(
        n_fold: u32,
        nr: usize,
        nt: usize,
        r_center: f64,
        half_width: f64,
    ) -> Result<Self> {
        if half_width <= 0.0 {
            return Err(Error::Config("window half_width must be positive".into()));
        }
        let r_lo = (r_center - half_width).max(SECTOR_R_MIN);
        let r_hi = (r_center + half_width).min(SECTOR_R_MAX);
        if r_hi <= r_lo {
            return Err(Error::Config("sector window is empty".into()));
        }
        let theta_max = std::f64::consts::PI / (2.0 * n_fold as f64);
        let theta_half = (half_width / r_center).min(theta_max);
        Self::build(n_fold, nr, nt, r_lo, r_hi, theta_half)
    }

    fn build(
        n_fold: u32,
        nr: usize,
        nt: usize,
        r_lo: f64,
        r_hi: f64,
        theta_half: f64,
    ) -> Result<Self> {
        if nt % 2 != 0 {
            return Err(Error::Config(format!(
                "angular cell count must be even for exact theta-mirror symmetry, got {nt}"
            )));
        }
        let u_lo = r_lo * r_lo;
        let u_hi = r_hi * r_hi;
        let du = (u_hi - u_lo) / nr as f64;
        let dtheta = 2.0 * theta_half / nt as f64;
        let measure = 0.5 * du * dtheta;
        let mut cells = Vec::with_capacity(nr * nt);
        let mut polar = Vec::with_capacity(nr * nt);
        for jr in 0..nr {
            // equal-area radius: r^2 at the cell center equals the mean of r^2 over the cell
            let u_mid = u_lo + (jr as f64 + 0.5) * du;
            let r = u_mid.sqrt();
            for jt in 0..nt {
                // symmetric about theta = 0 so mirrored angles negate exactly
                let theta = (jt as f64 - nt as f64 / 2.0 + 0.5) * dtheta;
                cells.push(Cell {
                    center: [r * theta.cos(), r * theta.sin()],
                    measure,
                });
                polar.push((r, theta));
            }
        }
        Ok(Self {
            n_fold,
            nr,
            nt,
            r_lo,
            r_hi,
            theta_half,
            cells,
            polar,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn polar(&self, i: usize) -> (f64, f64) {
        self.polar[i]
    }

    /// Cell index mirrored across theta = 0.
    pub fn mirror_index(&self, i: usize) -> usize {
        let jr = i / self.nt;
        let jt = i % self.nt;
        jr * self.nt + (self.nt - 1 - jt)
    }

    /// Indices of the cells in radial ring `jr`, in increasing theta order.
    pub fn ring(&self, jr: usize) -> std::ops::Range<usize> {
        jr * self.nt..(jr + 1) * self.nt
    }

    pub fn area(&self) -> f64 {
        (self.r_hi * self.r_hi - self.r_lo * self.r_lo) * self.theta_half
    }

    /// Width of one radial cell at radius r (cells are uniform in r^2).
    pub fn radial_step(&self, r: f64) -> f64 {
        let du = (self.r_hi * self.r_hi - self.r_lo * self.r_lo) / self.nr as f64;
        0.5 * du / r
    }
}

/// Cartesian grid on the half-plane disk window B_{radius}(center), with the
/// window center on the x2 = 0 axis. Cells are h x h squares whose centers lie
/// inside the disk; for refined windows they must also lie inside the outer
/// admissible disk B_{d/2}((d, 0)).
#[derive(Debug, Clone)]
pub struct HalfPlaneGrid {
    pub center: [f64; 2],
    pub radius: f64,
    pub h: f64,
    cells: Vec<Cell>,
    /// Per x1-column cell indices, each sorted by (|x2|, then positive side first).
    columns: Vec<Vec<usize>>,
    mirror: Vec<usize>,
}

impl HalfPlaneGrid {
    /// Full admissible disk B_{d/2}((d, 0)) for pair half-distance d, as an
    /// n x n Cartesian window clipped to the disk.
    pub fn new(d: f64, n: usize) -> Result<Self> {
        if d <= 0.0 {
            return Err(Error::Config(format!("pair distance d must be positive, got {d}")));
        }
        if n < 16 {
            return Err(Error::Config(format!("half-plane grid needs n >= 16, got {n}")));
        }
        Self::build([d, 0.0], 0.5 * d, n, None)
    }

    /// Refined window of radius `half_width` centered at (`x1_center`, 0),
    /// clipped to both the window disk and the admissible disk B_{d/2}((d, 0)).
    pub fn window(d: f64, x1_center: f64, half_width: f64, n: usize) -> Result<Self> {
        if half_width <= 0.0 {
            return Err(Error::Config("window half_width must be positive".into()));
        }
        Self::build([x1_center, 0.0], half_width, n, Some(([d, 0.0], 0.5 * d)))
    }

    fn build(
        center: [f64; 2],
        radius: f64,
        n: usize,
        outer: Option<([f64; 2], f64)>,
    ) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::Config(format!(
                "half-plane cell count must be even for exact x2-mirror symmetry, got {n}"
            )));
        }
        let h = 2.0 * radius / n as f64;
        let measure = h * h;
        let mut raw = Vec::new();
        for ix in 0..n {
            let x1 = center[0] - radius + (ix as f64 + 0.5) * h;
            for iy in 0..n {
                // built symmetrically about x2 = 0 so mirrored centers are
                // exact negations of each other
                let x2 = (iy as f64 - n as f64 / 2.0 + 0.5) * h;
                let dx = x1 - center[0];
                let dy = x2 - center[1];
                if dx * dx + dy * dy >= radius * radius {
                    continue;
                }
                if let Some((oc, orad)) = outer {
                    let ox = x1 - oc[0];
                    let oy = x2 - oc[1];
                    if ox * ox + oy * oy >= orad * orad {
                        continue;
                    }
                }
                if x1 <= 0.0 {
                    continue;
                }
                raw.push((ix, iy, x1, x2));
            }
        }
        if raw.is_empty() {
            return Err(Error::Config("half-plane window contains no cells".into()));
        }
        // deterministic ordering by (column, row)
        raw.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let cells: Vec<Cell> = raw
            .iter()
            .map(|&(_, _, x1, x2)| Cell {
                center: [x1, x2],
                measure,
            })
            .collect();

        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut col_of = vec![0usize; cells.len()];
        {
            let mut last_ix = usize::MAX;
            for (i, &(ix, _, _, _)) in raw.iter().enumerate() {
                if ix != last_ix {
                    columns.push(Vec::new());
                    last_ix = ix;
                }
                col_of[i] = columns.len() - 1;
                columns.last_mut().unwrap().push(i);
            }
        }
        for col in &mut columns {
            col.sort_by(|&a, &b| {
                let ya = cells[a].center[1];
                let yb = cells[b].center[1];
                ya.abs()
                    .total_cmp(&yb.abs())
                    .then(yb.total_cmp(&ya))
            });
        }

        // x2-mirror pairing; symmetric construction guarantees a partner exists
        let mut mirror = vec![usize::MAX; cells.len()];
        for (i, &(_, iy, _, _)) in raw.iter().enumerate() {
            let want_iy = n - 1 - iy;
            // partner has same column; columns are contiguous index ranges
            let col = &columns[col_of[i]];
            for &j in col {
                if raw[j].1 == want_iy {
                    mirror[i] = j;
                    break;
                }
            }
        }
        if mirror.iter().any(|&m| m == usize::MAX) {
            return Err(Error::Config(
                "half-plane window clipping broke x2-mirror symmetry".into(),
            ));
        }

        Ok(Self {
            center,
            radius,
            h,
            cells,
            columns,
            mirror,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn mirror_index(&self, i: usize) -> usize {
        self.mirror[i]
    }

    pub fn total_measure(&self) -> f64 {
        self.h * self.h * self.cells.len() as f64
    }
}
