//! Discretized feasible-model enumeration.
//!
//! All metrics live on the index lattice `idx / N`. For prevalence index `p`
//! a triple `(α, β, v)` (FPR, FNR, PPV) is feasible when
//! `α·v(N-p) = p(N-v)(N-β)`, the integer form of the FPR/PPV/FNR relation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("BadPrevalence: prevalence index {p_idx} must lie in 1..={max}")]
    BadPrevalence { p_idx: u32, max: u32 },
    #[error("BadDiscretization: {0}")]
    BadDiscretization(String),
    #[error("MismatchedSets: {0}")]
    MismatchedSets(String),
    #[error("OverlappingBins: bins {0:?} and {1:?} overlap")]
    OverlappingBins((u32, u32), (u32, u32)),
    #[error("BadTolerance: {0}")]
    BadTolerance(String),
}

type Result<T> = std::result::Result<T, RegionError>;

/// Inclusive index range.
pub type IdxRange = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    pub n: u32,
    pub alpha_range: IdxRange,
    pub beta_range: IdxRange,
    pub v_range: IdxRange,
}

impl Discretization {
    /// Defaults: α over `[0, N]`, β and v over `[0, floor(0.99·N)]`.
    pub fn new(n: u32) -> Result<Self> {
        let cap = (n as u64 * 99 / 100) as u32;
        let d = Self { n, alpha_range: (0, n), beta_range: (0, cap), v_range: (0, cap) };
        d.validate()?;
        Ok(d)
    }

    /// Every metric index over the whole `[0, N]` range.
    pub fn full(n: u32) -> Result<Self> {
        let d = Self { n, alpha_range: (0, n), beta_range: (0, n), v_range: (0, n) };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(RegionError::BadDiscretization(format!("N = {} must be at least 2", self.n)));
        }
        if self.n > 1000 {
            return Err(RegionError::BadDiscretization(format!("N = {} exceeds 1000", self.n)));
        }
        for (name, (lo, hi)) in [("alpha", self.alpha_range), ("beta", self.beta_range), ("v", self.v_range)] {
            if lo > hi || hi > self.n {
                return Err(RegionError::BadDiscretization(format!(
                    "{name} range [{lo}, {hi}] must be ordered and within [0, {}]",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Index nearest to the real value `x`.
    pub fn index_of(&self, x: f64) -> u32 {
        (x * self.n as f64).round().clamp(0.0, self.n as f64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeasibleTriple {
    pub alpha: u32,
    pub beta: u32,
    pub v: u32,
}

impl FeasibleTriple {
    pub fn satisfies(&self, p_idx: u32, n: u32) -> bool {
        let (n, p) = (n as u64, p_idx as u64);
        let m = p * (n - self.v as u64);
        let lhs = m * (n - self.beta as u64);
        let d = self.v as u64 * (n - p);
        lhs == self.alpha as u64 * d
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleTripleSet {
    pub n: u32,
    pub p_idx: u32,
    /// Sorted by (α, β, v).
    pub triples: Vec<FeasibleTriple>,
}

impl FeasibleTripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples whose PPV index lies in `window`.
    pub fn restrict_v(&self, window: IdxRange) -> Self {
        Self {
            n: self.n,
            p_idx: self.p_idx,
            triples: self
                .triples
                .iter()
                .copied()
                .filter(|t| t.v >= window.0 && t.v <= window.1)
                .collect(),
        }
    }

    pub fn index(&self) -> OccupancyIndex {
        OccupancyIndex::build(self.n, &self.triples)
    }
}

pub fn enumerate_triples(p_idx: u32, disc: &Discretization) -> Result<FeasibleTripleSet> {
    disc.validate()?;
    let n = disc.n;
    if p_idx == 0 || p_idx >= n {
        return Err(RegionError::BadPrevalence { p_idx, max: n - 1 });
    }
    let (n64, p64) = (n as u64, p_idx as u64);
    let mut triples = Vec::new();
    for beta in disc.beta_range.0..=disc.beta_range.1 {
        for v in disc.v_range.0..=disc.v_range.1 {
            let m = p64 * (n64 - v as u64);
            let num = m * (n64 - beta as u64);
            let d = v as u64 * (n64 - p64);
            if d == 0 {
                if num == 0 {
                    for alpha in disc.alpha_range.0..=disc.alpha_range.1 {
                        triples.push(FeasibleTriple { alpha, beta, v });
                    }
                }
                continue;
            }
            if !num.is_multiple_of(d) {
                continue;
            }
            let alpha = num / d;
            if alpha >= disc.alpha_range.0 as u64 && alpha <= disc.alpha_range.1 as u64 {
                triples.push(FeasibleTriple { alpha: alpha as u32, beta, v });
            }
        }
    }
    triples.sort_unstable();
    Ok(FeasibleTripleSet { n, p_idx, triples })
}

/// Summed-volume table over the (α, β, v) occupancy grid of one triple set.
#[derive(Debug, Clone)]
pub struct OccupancyIndex {
    side: usize,
    prefix: Vec<u32>,
}

impl OccupancyIndex {
    pub fn build(n: u32, triples: &[FeasibleTriple]) -> Self {
        let side = n as usize + 2;
        let at = |a: usize, b: usize, v: usize| (a * side + b) * side + v;
        let mut prefix = vec![0u32; side * side * side];
        for t in triples {
            prefix[at(t.alpha as usize + 1, t.beta as usize + 1, t.v as usize + 1)] += 1;
        }
        for a in 1..side {
            for b in 1..side {
                for v in 1..side {
                    let s = prefix[at(a, b, v)] + prefix[at(a - 1, b, v)] + prefix[at(a, b - 1, v)]
                        + prefix[at(a, b, v - 1)]
                        + prefix[at(a - 1, b - 1, v - 1)]
                        - prefix[at(a - 1, b - 1, v)]
                        - prefix[at(a - 1, b, v - 1)]
                        - prefix[at(a, b - 1, v - 1)];
                    prefix[at(a, b, v)] = s;
                }
            }
        }
        Self { side, prefix }
    }

    /// Number of occupied cells in the inclusive box `lo..=hi` (clamped).
    pub fn count_box(&self, lo: [i64; 3], hi: [i64; 3]) -> u64 {
        let max = self.side as i64 - 2;
        let lo = lo.map(|x| x.max(0));
        let hi = hi.map(|x| x.min(max));
        if (0..3).any(|i| lo[i] > hi[i]) {
            return 0;
        }
        let side = self.side;
        let p = |a: i64, b: i64, v: i64| -> i64 {
            self.prefix[((a as usize) * side + b as usize) * side + v as usize] as i64
        };
        let (a0, b0, v0) = (lo[0], lo[1], lo[2]);
        let (a1, b1, v1) = (hi[0] + 1, hi[1] + 1, hi[2] + 1);
        let total = p(a1, b1, v1) - p(a0, b1, v1) - p(a1, b0, v1) - p(a1, b1, v0)
            + p(a0, b0, v1)
            + p(a0, b1, v0)
            + p(a1, b0, v0)
            - p(a0, b0, v0);
        total as u64
    }
}

/// Whether `|ε| <= e` or `|ε| < e` on the index lattice. A zero tolerance is
/// equality in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsMode {
    #[default]
    Inclusive,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCountQuery {
    pub p1_idx: u32,
    pub p2_idx: u32,
    /// Tolerances on (α, β, v) in index units.
    pub eps_idx: [u32; 3],
    pub mode: EpsMode,
}

impl JointCountQuery {
    pub fn new(p1_idx: u32, p2_idx: u32, eps_max_idx: u32) -> Self {
        Self { p1_idx, p2_idx, eps_idx: [eps_max_idx; 3], mode: EpsMode::Inclusive }
    }

    /// Half-widths of the admissible box. A zero tolerance means equality in
    /// both modes.
    fn half_widths(&self) -> [i64; 3] {
        self.eps_idx.map(|e| match self.mode {
            EpsMode::Strict if e > 0 => e as i64 - 1,
            _ => e as i64,
        })
    }
}

fn count_with_index(s1: &FeasibleTripleSet, idx2: &OccupancyIndex, w: [i64; 3]) -> u64 {
    s1.triples
        .iter()
        .map(|t| {
            let c = [t.alpha as i64, t.beta as i64, t.v as i64];
            idx2.count_box([c[0] - w[0], c[1] - w[1], c[2] - w[2]], [c[0] + w[0], c[1] + w[1], c[2] + w[2]])
        })
        .sum()
}

/// Number of pairs `(t1, t2)` from the two sets whose metric indices differ by
/// at most the query tolerances.
pub fn count_joint(
    q: &JointCountQuery,
    s1: &FeasibleTripleSet,
    s2: &FeasibleTripleSet,
    disc: &Discretization,
) -> Result<u64> {
    for (set, p) in [(s1, q.p1_idx), (s2, q.p2_idx)] {
        if set.p_idx != p || set.n != disc.n {
            return Err(RegionError::MismatchedSets(format!(
                "set (N={}, p={}) does not match query (N={}, p={p})",
                set.n, set.p_idx, disc.n
            )));
        }
    }
    if q.eps_idx.iter().any(|&e| e > disc.n) {
        return Err(RegionError::BadTolerance(format!("eps indices {:?} exceed N = {}", q.eps_idx, disc.n)));
    }
    Ok(count_with_index(s1, &s2.index(), q.half_widths()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    /// Shared tolerance on |ε_α|, |ε_β|, |ε_v|.
    pub eps_max: f64,
    /// Optional per-metric tolerances (α, β, v) overriding `eps_max`.
    pub eps_per_metric: Option<[f64; 3]>,
    pub p_grid_step: f64,
    pub ppv_window: Option<IdxRange>,
    pub mode: EpsMode,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self { eps_max: 0.0, eps_per_metric: None, p_grid_step: 0.01, ppv_window: None, mode: EpsMode::Inclusive }
    }
}

impl HeatmapConfig {
    pub fn with_eps(eps_max: f64) -> Self {
        Self { eps_max, ..Self::default() }
    }

    fn eps_idx(&self, disc: &Discretization) -> Result<[u32; 3]> {
        let eps = self.eps_per_metric.unwrap_or([self.eps_max; 3]);
        let mut out = [0u32; 3];
        for (slot, e) in out.iter_mut().zip(eps) {
            if !(e.is_finite() && (0.0..=1.0).contains(&e)) {
                return Err(RegionError::BadTolerance(format!("eps = {e} must lie in [0, 1]")));
            }
            *slot = disc.index_of(e);
        }
        Ok(out)
    }

    /// Prevalence indices `1, 1+s, 1+2s, ... <= N-1` for step index `s`.
    pub fn p_grid(&self, disc: &Discretization) -> Result<Vec<u32>> {
        let step = self.p_grid_step * disc.n as f64;
        if !step.is_finite() || step.round() < 1.0 {
            return Err(RegionError::BadDiscretization(format!(
                "grid step {} is below one index at N = {}",
                self.p_grid_step, disc.n
            )));
        }
        Ok((1..disc.n).step_by(step.round() as usize).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrevalenceHeatmap {
    pub n: u32,
    pub p_indices: Vec<u32>,
    /// `counts[i][j]` pairs prevalence `p_indices[i]` (group 1) with `p_indices[j]`.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
}

impl PrevalenceHeatmap {
    pub fn cell(&self, p1_idx: u32, p2_idx: u32) -> Option<u64> {
        let i = self.p_indices.iter().position(|&p| p == p1_idx)?;
        let j = self.p_indices.iter().position(|&p| p == p2_idx)?;
        Some(self.counts[i][j])
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Whether every nonzero cell sits on the diagonal.
    pub fn diagonal_only(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| i == j || c == 0))
    }
}

pub fn heatmap(disc: &Discretization, cfg: &HeatmapConfig) -> Result<PrevalenceHeatmap> {
    disc.validate()?;
    let eps_idx = cfg.eps_idx(disc)?;
    let grid = cfg.p_grid(disc)?;
    let sets = grid
        .par_iter()
        .map(|&p| {
            let s = enumerate_triples(p, disc)?;
            Ok(match cfg.ppv_window {
                Some(w) => s.restrict_v(w),
                None => s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q = JointCountQuery { p1_idx: 0, p2_idx: 0, eps_idx, mode: cfg.mode };
    let w = q.half_widths();
    let columns: Vec<Vec<u64>> = sets
        .par_iter()
        .map(|s2| {
            let idx2 = s2.index();
            sets.iter().map(|s1| count_with_index(s1, &idx2, w)).collect()
        })
        .collect();
    let counts: Vec<Vec<u64>> =
        (0..grid.len()).map(|i| columns.iter().map(|col| col[i]).collect()).collect();
    let total = counts.iter().flatten().sum();
    Ok(PrevalenceHeatmap { n: disc.n, p_indices: grid, counts, total })
}

pub fn default_ppv_bins(disc: &Discretization) -> Vec<IdxRange> {
    let (lo, hi) = disc.v_range;
    let width = hi - lo + 1;
    (0..4)
        .map(|i| (lo + width * i / 4, lo + width * (i + 1) / 4 - 1))
        .filter(|(a, b)| a <= b)
        .collect()
}

/// Heatmap total per PPV window. A bin with `lo > hi` is empty and counts 0.
pub fn ppv_binned_counts(disc: &Discretization, cfg: &HeatmapConfig, bins: &[IdxRange]) -> Result<Vec<u64>> {
    let live: Vec<IdxRange> = bins.iter().copied().filter(|(a, b)| a <= b).collect();
    for (i, a) in live.iter().enumerate() {
        for b in &live[i + 1..] {
            if a.0 <= b.1 && b.0 <= a.1 {
                return Err(RegionError::OverlappingBins(*a, *b));
            }
        }
    }
    bins.iter()
        .map(|&(lo, hi)| {
            if lo > hi {
                return Ok(0);
            }
            let window = (lo.max(disc.v_range.0), hi.min(disc.v_range.1));
            if window.0 > window.1 {
                return Ok(0);
            }
            heatmap(disc, &HeatmapConfig { ppv_window: Some(window), ..*cfg }).map(|h| h.total)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub p_grid_step: f64,
    pub mode: EpsMode,
    pub eps: f64,
    pub total: u64,
    /// Totals per default PPV bin, lowest first.
    pub bin_totals: Vec<u64>,
}

/// Heatmap totals over alternative grid steps and tolerance modes.
pub fn sensitivity_scan(
    disc: &Discretization,
    eps_values: &[f64],
    steps: &[f64],
    modes: &[EpsMode],
) -> Result<Vec<SensitivityRow>> {
    let bins = default_ppv_bins(disc);
    let mut rows = Vec::new();
    for &step in steps {
        for &mode in modes {
            for &eps in eps_values {
                let cfg = HeatmapConfig { eps_max: eps, p_grid_step: step, mode, ..HeatmapConfig::default() };
                let total = heatmap(disc, &cfg)?.total;
                let bin_totals = ppv_binned_counts(disc, &cfg, &bins)?;
                rows.push(SensitivityRow { p_grid_step: step, mode, eps, total, bin_totals });
            }
        }
    }
    Ok(rows)
}
