//! Dot planimeter over the unit square.
//!
//! A `g×g` lattice of detectors with spacing `1/(g-1)` estimates the area of a
//! region bounded by a family of curves `y = h(x; θ)`. A detector is satisfied
//! when a sampled curve point lies within its radius, or when it sits on the
//! filled side of some curve.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::impossibility::{self, ImpossibilityError, PpvRelaxation, RegionSpec};

pub const MIN_GRID: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanimeterError {
    #[error("BadGrid: g = {0} must be at least 3")]
    BadGrid(u32),
    #[error("BadSampleStep: sample step {step} exceeds detector radius {radius}")]
    BadSampleStep { step: f64, radius: f64 },
    #[error("BadBudget: {0}")]
    BadBudget(String),
    #[error(transparent)]
    Region(#[from] ImpossibilityError),
}

type Result<T> = std::result::Result<T, PlanimeterError>;

/// Smallest `g` whose error bound `b/g` is at most `err`, never below 3.
pub fn required_grid_size(b: u32, err: f64) -> Result<u32> {
    if b == 0 {
        return Err(PlanimeterError::BadBudget("b must be at least 1".into()));
    }
    if !(err.is_finite() && err > 0.0 && err < 1.0) {
        return Err(PlanimeterError::BadBudget(format!("err = {err} must lie in (0, 1)")));
    }
    let raw = b as f64 / err;
    // 6 / 0.05 evaluates to 120.00000000000001.
    let g = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() };
    Ok((g as u32).max(MIN_GRID))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGrid {
    pub g: u32,
    pub radius: f64,
}

impl DetectorGrid {
    pub fn new(g: u32) -> Result<Self> {
        if g < MIN_GRID {
            return Err(PlanimeterError::BadGrid(g));
        }
        Ok(Self { g, radius: 0.5 / (g - 1) as f64 })
    }

    /// Same detector positions with a different capture radius.
    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.g - 1) as f64
    }

    pub fn total(&self) -> u64 {
        self.g as u64 * self.g as u64
    }

    pub fn coord(&self, i: u32) -> f64 {
        i as f64 * self.spacing()
    }
}

type Evaluator = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// `y = h(x; θ)` for every θ in a finite parameter grid.
#[derive(Clone)]
pub struct CurveFamily {
    eval: Arc<Evaluator>,
    pub thetas: Vec<Vec<f64>>,
}

impl std::fmt::Debug for CurveFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveFamily").field("thetas", &self.thetas.len()).finish()
    }
}

impl CurveFamily {
    pub fn new(eval: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static, thetas: Vec<Vec<f64>>) -> Self {
        Self { eval: Arc::new(eval), thetas }
    }

    pub fn eval(&self, x: f64, theta: &[f64]) -> f64 {
        (self.eval)(x, theta)
    }

    pub fn line(slope: f64, intercept: f64) -> Self {
        Self::new(|x, t| t[0] * x + t[1], vec![vec![slope, intercept]])
    }

    pub fn constant(y: f64) -> Self {
        Self::new(|_, t| t[0], vec![vec![y]])
    }

    /// Lines `y = x + c` for `c` swept over `[c_min, c_max]` at spacing at most `step`.
    pub fn offset_lines(c_min: f64, c_max: f64, step: f64) -> Self {
        let pieces = (((c_max - c_min) / step).ceil() as usize).max(1);
        let thetas = (0..=pieces)
            .map(|i| vec![c_min + (c_max - c_min) * i as f64 / pieces as f64])
            .collect();
        Self::new(|x, t| x + t[0], thetas)
    }

    /// The relaxed-ACC region, swept at half the detector spacing.
    pub fn acc_band(spec: &RegionSpec, grid: &DetectorGrid) -> Result<Self> {
        let b = impossibility::offset_bounds(spec)?;
        Ok(Self::offset_lines(b.c_min, b.c_max, grid.spacing() / 2.0))
    }

    /// FNR of group 1 as a function of its PPV, over every ε tuple
    /// `(ε_FPR, ε_FNR, ε_v)` in `[-eps_max, eps_max]^3` at `steps` points per axis.
    /// Singular or out-of-domain points evaluate to NaN and are skipped.
    pub fn ppv_region(p: f64, eps_p: f64, eps_max: f64, steps: usize) -> Self {
        let axis: Vec<f64> = if steps <= 1 {
            vec![0.0]
        } else {
            (0..steps).map(|i| -eps_max + 2.0 * eps_max * i as f64 / (steps - 1) as f64).collect()
        };
        let mut thetas = Vec::with_capacity(axis.len().pow(3));
        for &ef in &axis {
            for &en in &axis {
                for &ev in &axis {
                    thetas.push(vec![ef, en, ev]);
                }
            }
        }
        Self::new(
            move |v, t| {
                let r = PpvRelaxation { eps_fpr: t[0], eps_fnr: t[1], eps_v: t[2], eps_p, p, v };
                impossibility::relaxed_fnr_ppv(&r).unwrap_or(f64::NAN)
            },
            thetas,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fill {
    Below,
    Above,
    #[default]
    CurveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanimeterEstimate {
    pub g: u32,
    pub satisfied: u64,
    pub fraction: f64,
}

/// Satisfied detectors, row-major with row 0 at `y = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorMask {
    pub g: u32,
    pub cells: Vec<bool>,
}

impl DetectorMask {
    pub fn get(&self, ix: u32, iy: u32) -> bool {
        self.cells[(iy * self.g + ix) as usize]
    }

    pub fn satisfied(&self) -> u64 {
        self.cells.iter().filter(|&&c| c).count() as u64
    }

    pub fn estimate(&self) -> PlanimeterEstimate {
        let satisfied = self.satisfied();
        PlanimeterEstimate {
            g: self.g,
            satisfied,
            fraction: satisfied as f64 / (self.g as f64 * self.g as f64),
        }
    }
}

pub fn detector_mask(grid: &DetectorGrid, fam: &CurveFamily, fill: Fill, sample_step: Option<f64>) -> Result<DetectorMask> {
    if grid.g < MIN_GRID {
        return Err(PlanimeterError::BadGrid(grid.g));
    }
    let step = sample_step.unwrap_or(grid.spacing() / 4.0);
    if !(step.is_finite() && step > 0.0 && step <= grid.radius) {
        return Err(PlanimeterError::BadSampleStep { step, radius: grid.radius });
    }
    let g = grid.g as usize;
    let s = grid.spacing();
    let r = grid.radius;
    let r2 = r * r;
    let samples = (1.0 / step).ceil() as usize;
    let xs: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();

    let partials: Vec<Vec<bool>> = fam
        .thetas
        .par_iter()
        .map(|theta| {
            let mut cells = vec![false; g * g];
            for &x in &xs {
                let y = fam.eval(x, theta);
                if !(y.is_finite() && (0.0..=1.0).contains(&y)) {
                    continue;
                }
                let ix_lo = ((x - r) / s).ceil().max(0.0) as usize;
                let ix_hi = (((x + r) / s).floor() as usize).min(g - 1);
                let iy_lo = ((y - r) / s).ceil().max(0.0) as usize;
                let iy_hi = (((y + r) / s).floor() as usize).min(g - 1);
                for iy in iy_lo..=iy_hi {
                    let dy = iy as f64 * s - y;
                    for ix in ix_lo..=ix_hi {
                        let dx = ix as f64 * s - x;
                        if dx * dx + dy * dy <= r2 {
                            cells[iy * g + ix] = true;
                        }
                    }
                }
            }
            if fill != Fill::CurveOnly {
                for ix in 0..g {
                    let h = fam.eval(ix as f64 * s, theta);
                    if h.is_nan() {
                        continue;
                    }
                    for iy in 0..g {
                        let y = iy as f64 * s;
                        let inside = match fill {
                            Fill::Below => y <= h,
                            Fill::Above => y >= h,
                            Fill::CurveOnly => false,
                        };
                        if inside {
                            cells[iy * g + ix] = true;
                        }
                    }
                }
            }
            cells
        })
        .collect();

    let mut cells = vec![false; g * g];
    for part in partials {
        for (c, p) in cells.iter_mut().zip(part) {
            *c |= p;
        }
    }
    Ok(DetectorMask { g: grid.g, cells })
}

pub fn estimate_area(grid: &DetectorGrid, fam: &CurveFamily, fill: Fill, sample_step: Option<f64>) -> Result<PlanimeterEstimate> {
    Ok(detector_mask(grid, fam, fill, sample_step)?.estimate())
}

/// Area read as the sum of detector disc areas rather than a detector fraction.
pub fn circle_sum_area(grid: &DetectorGrid, est: &PlanimeterEstimate) -> f64 {
    est.satisfied as f64 * std::f64::consts::PI * grid.radius * grid.radius
}
