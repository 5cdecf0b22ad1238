//! Exact top-k selection under a precision cap and disparity-ratio constraints.
//!
//! Objective and constraints depend on the selected rows only through the
//! per-group counts `(t_j, f_j)` of selected positives and negatives, so the
//! search runs over group allocations. For every reference allocation
//! `(t_r, f_r)` the admissible `(t_j, f_j)` of each other group reduce to
//! integer intervals, and a dynamic program over total selected size tracks the
//! exact set of reachable true-positive totals.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::CohortStats;

pub const MAX_GROUPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("Infeasible: no allocation of k = {k} satisfies the constraints")]
    Infeasible { k: u64 },
    #[error("TooManyGroups: {0} groups exceeds the limit of 8")]
    TooManyGroups(usize),
    #[error("InvalidInstance: {0}")]
    InvalidInstance(String),
}

type Result<T> = std::result::Result<T, SelectionError>;

fn invalid(msg: impl Into<String>) -> SelectionError {
    SelectionError::InvalidInstance(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSupply {
    pub key: String,
    pub positives: u64,
    pub negatives: u64,
}

impl GroupSupply {
    pub fn new(key: impl Into<String>, positives: u64, negatives: u64) -> Self {
        Self { key: key.into(), positives, negatives }
    }

    pub fn size(&self) -> u64 {
        self.positives + self.negatives
    }
}

/// Which ratio constraints are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstrainedMetrics {
    pub fpr: bool,
    pub fnr: bool,
    pub ppv: bool,
}

impl Default for ConstrainedMetrics {
    fn default() -> Self {
        Self { fpr: true, fnr: true, ppv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionInstance {
    pub groups: Vec<GroupSupply>,
    pub k: u64,
    pub ppv_cap: f64,
    pub lb: f64,
    /// `None` disables the upper ratio bound.
    pub ub: Option<f64>,
    /// Defaults to the largest group, first on ties.
    pub reference: Option<String>,
    pub constrain: ConstrainedMetrics,
}

impl SelectionInstance {
    pub fn new(groups: Vec<GroupSupply>, k: u64) -> Self {
        Self {
            groups,
            k,
            ppv_cap: 0.7,
            lb: 0.8,
            ub: Some(1.2),
            reference: None,
            constrain: ConstrainedMetrics::default(),
        }
    }

    pub fn from_stats(stats: &CohortStats, k: u64) -> Self {
        let groups = stats
            .groups
            .iter()
            .map(|g| GroupSupply::new(g.key.clone(), g.positives, g.n - g.positives))
            .collect();
        Self::new(groups, k)
    }

    pub fn total(&self) -> u64 {
        self.groups.iter().map(GroupSupply::size).sum()
    }

    pub fn reference_index(&self) -> Result<usize> {
        match &self.reference {
            Some(key) => self
                .groups
                .iter()
                .position(|g| &g.key == key)
                .ok_or_else(|| invalid(format!("reference group {key:?} not found"))),
            None => {
                let mut best = 0;
                for (i, g) in self.groups.iter().enumerate() {
                    if g.size() > self.groups[best].size() {
                        best = i;
                    }
                }
                Ok(best)
            }
        }
    }

    fn exact(&self) -> Result<Exact> {
        if self.groups.is_empty() {
            return Err(invalid("at least one group is required"));
        }
        if self.groups.len() > MAX_GROUPS {
            return Err(SelectionError::TooManyGroups(self.groups.len()));
        }
        if let Some(g) = self.groups.iter().find(|g| g.size() == 0) {
            return Err(invalid(format!("group {:?} is empty", g.key)));
        }
        if self.k == 0 || self.k > self.total() {
            return Err(invalid(format!("k = {} must lie in 1..={}", self.k, self.total())));
        }
        let cap = to_ratio("ppv_cap", self.ppv_cap)?;
        if cap <= Ratio::from_integer(0) || cap > Ratio::from_integer(1) {
            return Err(invalid(format!("ppv_cap = {} must lie in (0, 1]", self.ppv_cap)));
        }
        let lb = to_ratio("lb", self.lb)?;
        let ub = match self.ub {
            Some(u) if u.is_infinite() && u > 0.0 => None,
            Some(u) => Some(to_ratio("ub", u)?),
            None => None,
        };
        let one = Ratio::from_integer(1);
        if lb < Ratio::from_integer(0) || lb > one || ub.is_some_and(|u| u < one) {
            return Err(invalid(format!("bounds must satisfy 0 <= lb <= 1 <= ub, got {} and {:?}", self.lb, self.ub)));
        }
        let k = self.k as i128;
        Ok(Exact {
            pos: self.groups.iter().map(|g| g.positives as i128).collect(),
            neg: self.groups.iter().map(|g| g.negatives as i128).collect(),
            k,
            t_cap: (*cap.numer() as i128 * k).div_euclid(*cap.denom() as i128),
            lb: (*lb.numer() as i128, *lb.denom() as i128),
            ub: ub.map(|u| (*u.numer() as i128, *u.denom() as i128)),
            reference: self.reference_index()?,
            constrain: self.constrain,
        })
    }
}

fn to_ratio(name: &str, x: f64) -> Result<Ratio<i64>> {
    if !x.is_finite() {
        return Err(invalid(format!("{name} = {x} must be finite")));
    }
    Ratio::approximate_float(x).ok_or_else(|| invalid(format!("{name} = {x} has no rational form")))
}

/// Instance data in exact integer form.
#[derive(Debug, Clone)]
struct Exact {
    pos: Vec<i128>,
    neg: Vec<i128>,
    k: i128,
    /// floor(cap·k)
    t_cap: i128,
    lb: (i128, i128),
    ub: Option<(i128, i128)>,
    reference: usize,
    constrain: ConstrainedMetrics,
}

fn floor_div(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -(-a).div_euclid(b)
}

/// Exact fraction `(numerator, denominator)`.
type Frac = (i128, i128);

/// Admissible counts of one non-reference group for a fixed reference allocation.
#[derive(Debug, Clone, Copy)]
struct GroupWindow {
    tlo: i128,
    thi: i128,
    flo: i128,
    fhi: i128,
    /// PPV cone `a·s <= t <= b·s` as fractions; `b` absent without an upper bound.
    cone: Option<(Frac, Option<Frac>)>,
}

impl GroupWindow {
    fn is_empty(&self) -> bool {
        self.tlo > self.thi || self.flo > self.fhi
    }

    /// Sizes outside this range are never feasible.
    fn min_size(&self) -> i128 {
        self.tlo + self.flo
    }

    fn max_size(&self) -> i128 {
        self.thi + self.fhi
    }

    /// Admissible true positives at selected size `s`.
    fn at(&self, s: i128) -> Option<(i128, i128)> {
        let mut lo = self.tlo.max(s - self.fhi);
        let mut hi = self.thi.min(s - self.flo);
        if s > 0 {
            if let Some((a, b)) = self.cone {
                lo = lo.max(ceil_div(a.0 * s, a.1));
                if let Some(b) = b {
                    hi = hi.min(floor_div(b.0 * s, b.1));
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

impl Exact {
    /// Interval bounds `[lo, hi]` on `x_j` given `x_j / d_j` must lie within
    /// `[lb, ub] · x_r / d_r`.
    fn ratio_window(&self, x_r: i128, d_r: i128, d_j: i128) -> (i128, i128) {
        let lo = ceil_div(self.lb.0 * x_r * d_j, self.lb.1 * d_r);
        let hi = match self.ub {
            Some((n, d)) => floor_div(n * x_r * d_j, d * d_r),
            None => i128::MAX / 4,
        };
        (lo, hi)
    }

    fn window(&self, j: usize, t_r: i128, f_r: i128) -> GroupWindow {
        let r = self.reference;
        let (p, n) = (self.pos[j], self.neg[j]);
        let (mut tlo, mut thi) = (0, p);
        let (mut flo, mut fhi) = (0, n);
        if self.constrain.fpr && self.neg[r] > 0 && n > 0 {
            let (lo, hi) = self.ratio_window(f_r, self.neg[r], n);
            flo = flo.max(lo);
            fhi = fhi.min(hi);
        }
        if self.constrain.fnr && self.pos[r] > 0 && p > 0 {
            let (lo, hi) = self.ratio_window(self.pos[r] - t_r, self.pos[r], p);
            tlo = tlo.max(p - hi.min(p));
            thi = thi.min(p - lo);
        }
        let s_r = t_r + f_r;
        let cone = (self.constrain.ppv && s_r > 0).then(|| {
            let a = (self.lb.0 * t_r, self.lb.1 * s_r);
            let b = self.ub.map(|(n, d)| (n * t_r, d * s_r));
            (a, b)
        });
        GroupWindow { tlo, thi, flo, fhi, cone }
    }
}

type IntervalSet = Vec<(i128, i128)>;

fn normalize(set: &mut IntervalSet) {
    if set.len() < 2 {
        return;
    }
    set.sort_unstable();
    let mut out: IntervalSet = Vec::with_capacity(set.len());
    for &(lo, hi) in set.iter() {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    *set = out;
}

/// Largest member of `set` not exceeding `cap`.
fn max_at_most(set: &IntervalSet, cap: i128) -> Option<i128> {
    set.iter().rev().find(|iv| iv.0 <= cap).map(|iv| iv.1.min(cap))
}

/// Reachable true-positive totals per cumulative size, for one prefix of groups.
struct Layer {
    offset: i128,
    cells: Vec<IntervalSet>,
}

impl Layer {
    fn get(&self, s: i128) -> Option<&IntervalSet> {
        if s < self.offset {
            return None;
        }
        self.cells.get((s - self.offset) as usize).filter(|c| !c.is_empty())
    }
}

struct RefSolve {
    value: i128,
    /// `(t_j, f_j)` for every non-reference group, in `others` order.
    counts: Vec<(i128, i128)>,
}

/// Best true-positive total of the non-reference groups with total size
/// `k_rest` and true positives at most `t_rest`.
fn solve_rest(windows: &[GroupWindow], k_rest: i128, t_rest: i128) -> Option<RefSolve> {
    let g = windows.len();
    if g == 0 {
        return (k_rest == 0 && t_rest >= 0).then(|| RefSolve { value: 0, counts: vec![] });
    }
    // Suffix minima/maxima of size and minimum true positives.
    let mut suf_min_s = vec![0i128; g + 1];
    let mut suf_max_s = vec![0i128; g + 1];
    let mut suf_min_t = vec![0i128; g + 1];
    for j in (0..g).rev() {
        suf_min_s[j] = suf_min_s[j + 1] + windows[j].min_size();
        suf_max_s[j] = suf_max_s[j + 1] + windows[j].max_size();
        suf_min_t[j] = suf_min_t[j + 1] + windows[j].tlo;
    }
    if suf_min_s[0] > k_rest || suf_max_s[0] < k_rest || suf_min_t[0] > t_rest {
        return None;
    }

    let mut layers: Vec<Layer> = Vec::with_capacity(g);
    let mut prev = Layer { offset: 0, cells: vec![vec![(0, 0)]] };
    for (j, w) in windows.iter().enumerate() {
        let lo_s = (prev.offset + w.min_size()).max(k_rest - suf_max_s[j + 1]);
        let hi_s = (prev.offset + prev.cells.len() as i128 - 1 + w.max_size()).min(k_rest - suf_min_s[j + 1]);
        if lo_s > hi_s {
            return None;
        }
        let t_limit = t_rest - suf_min_t[j + 1];
        let mut next = Layer { offset: lo_s, cells: vec![Vec::new(); (hi_s - lo_s + 1) as usize] };
        for (ci, cell) in prev.cells.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let base = prev.offset + ci as i128;
            for s in (lo_s - base).max(w.min_size())..=(hi_s - base).min(w.max_size()) {
                let Some((l, u)) = w.at(s) else { continue };
                let dst = &mut next.cells[(base + s - lo_s) as usize];
                for &(a, b) in cell {
                    let (a, b) = (a + l, (b + u).min(t_limit));
                    if a <= b {
                        dst.push((a, b));
                    }
                }
            }
        }
        for c in &mut next.cells {
            normalize(c);
        }
        layers.push(prev);
        prev = next;
    }
    let final_set = prev.get(k_rest)?;
    let value = max_at_most(final_set, t_rest)?;
    layers.push(prev);

    // Walk back through the layers to recover one allocation.
    let mut counts = vec![(0i128, 0i128); g];
    let (mut size, mut tp) = (k_rest, value);
    for j in (0..g).rev() {
        let before = &layers[j];
        let mut found = None;
        let w = &windows[j];
        for s in w.min_size()..=w.max_size() {
            let Some((l, u)) = w.at(s) else { continue };
            let Some(cell) = before.get(size - s) else { continue };
            // Need prior total x in cell with tp - x in [l, u].
            let (want_lo, want_hi) = (tp - u, tp - l);
            if let Some(x) = cell
                .iter()
                .filter(|iv| iv.0 <= want_hi && iv.1 >= want_lo)
                .map(|iv| iv.1.min(want_hi))
                .next()
            {
                found = Some((s, x));
                break;
            }
        }
        let (s, x) = found.expect("reachable state has a predecessor");
        counts[j] = (tp - x, s - (tp - x));
        size -= s;
        tp = x;
    }
    Some(RefSolve { value, counts })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAllocation {
    pub key: String,
    pub t: u64,
    pub f: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub key: String,
    pub t: u64,
    pub f: u64,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub ppv: Option<f64>,
    pub fpr_ratio: Option<f64>,
    pub fnr_ratio: Option<f64>,
    pub ppv_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub k: u64,
    pub reference: String,
    pub allocation: Vec<GroupAllocation>,
    pub tp_total: u64,
    pub list_ppv: f64,
    /// `None` when the cohort has no positives.
    pub recall: Option<f64>,
    pub groups: Vec<GroupOutcome>,
}

fn frac(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn ratio_of(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    }
}

fn build_result(inst: &SelectionInstance, reference: usize, counts: &[(u64, u64)]) -> SelectionResult {
    let metrics: Vec<(Option<f64>, Option<f64>, Option<f64>)> = inst
        .groups
        .iter()
        .zip(counts)
        .map(|(g, &(t, f))| (frac(f, g.negatives), frac(g.positives - t, g.positives), frac(t, t + f)))
        .collect();
    let r = metrics[reference];
    let groups = inst
        .groups
        .iter()
        .zip(counts)
        .zip(&metrics)
        .map(|((g, &(t, f)), &(fpr, fnr, ppv))| GroupOutcome {
            key: g.key.clone(),
            t,
            f,
            fpr,
            fnr,
            ppv,
            fpr_ratio: ratio_of(fpr, r.0),
            fnr_ratio: ratio_of(fnr, r.1),
            ppv_ratio: ratio_of(ppv, r.2),
        })
        .collect();
    let tp_total: u64 = counts.iter().map(|c| c.0).sum();
    let positives: u64 = inst.groups.iter().map(|g| g.positives).sum();
    SelectionResult {
        k: inst.k,
        reference: inst.groups[reference].key.clone(),
        allocation: inst
            .groups
            .iter()
            .zip(counts)
            .map(|(g, &(t, f))| GroupAllocation { key: g.key.clone(), t, f })
            .collect(),
        tp_total,
        list_ppv: tp_total as f64 / inst.k as f64,
        recall: frac(tp_total, positives),
        groups,
    }
}

/// Maximum true positives among k-selections under the cap alone.
pub fn unconstrained_max_tp(inst: &SelectionInstance) -> Result<u64> {
    let ex = inst.exact()?;
    let pos: i128 = ex.pos.iter().sum();
    let neg: i128 = ex.neg.iter().sum();
    let hi = pos.min(ex.t_cap).min(ex.k);
    let lo = (ex.k - neg).max(0);
    if lo > hi {
        return Err(SelectionError::Infeasible { k: inst.k });
    }
    Ok(hi as u64)
}

/// Maximum-precision k-selection satisfying the cap and every enabled ratio
/// constraint against the reference group.
pub fn solve_exact(inst: &SelectionInstance) -> Result<SelectionResult> {
    let ex = inst.exact()?;
    let r = ex.reference;
    let others: Vec<usize> = (0..inst.groups.len()).filter(|&j| j != r).collect();
    let t_cap = ex.t_cap;

    // Reference allocations with a cheap admissible bound on the total.
    let mut candidates = Vec::new();
    for t_r in 0..=ex.pos[r].min(ex.k).min(t_cap) {
        for f_r in 0..=ex.neg[r].min(ex.k - t_r) {
            let k_rest = ex.k - t_r - f_r;
            let (mut min_s, mut max_s, mut max_t) = (0i128, 0i128, 0i128);
            let mut empty = false;
            for &j in &others {
                let w = ex.window(j, t_r, f_r);
                if w.is_empty() {
                    empty = true;
                    break;
                }
                min_s += w.min_size();
                max_s += w.max_size();
                max_t += match w.cone {
                    Some((_, Some(b))) => w.thi.min(floor_div(b.0 * w.max_size(), b.1)),
                    _ => w.thi,
                };
            }
            if empty || min_s > k_rest || max_s < k_rest {
                continue;
            }
            let bound = t_cap.min(t_r + max_t);
            candidates.push((bound, t_r, f_r));
        }
    }
    candidates.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // (total, t_r, f_r, allocation of the other groups)
    let mut best: Option<(i128, i128, i128, Vec<Frac>)> = None;
    for (bound, t_r, f_r) in candidates {
        if best.as_ref().is_some_and(|b| bound <= b.0) {
            break;
        }
        let windows: Vec<GroupWindow> = others.iter().map(|&j| ex.window(j, t_r, f_r)).collect();
        if let Some(sol) = solve_rest(&windows, ex.k - t_r - f_r, t_cap - t_r) {
            let total = t_r + sol.value;
            if best.as_ref().is_none_or(|b| total > b.0) {
                best = Some((total, t_r, f_r, sol.counts));
            }
        }
    }
    let Some((_, t_r, f_r, rest)) = best else {
        return Err(SelectionError::Infeasible { k: inst.k });
    };
    let mut counts = vec![(0u64, 0u64); inst.groups.len()];
    counts[r] = (t_r as u64, f_r as u64);
    for (&j, &(t, f)) in others.iter().zip(&rest) {
        counts[j] = (t as u64, f as u64);
    }
    let alloc: Vec<GroupAllocation> = inst
        .groups
        .iter()
        .zip(&counts)
        .map(|(g, &(t, f))| GroupAllocation { key: g.key.clone(), t, f })
        .collect();
    if let Err(v) = check_allocation(inst, &alloc) {
        return Err(invalid(format!("internal: solver allocation fails re-check: {v}")));
    }
    Ok(build_result(inst, r, &counts))
}

/// Re-checks an allocation against every constraint in exact arithmetic.
pub fn check_allocation(inst: &SelectionInstance, alloc: &[GroupAllocation]) -> std::result::Result<(), String> {
    let ex = inst.exact().map_err(|e| e.to_string())?;
    if alloc.len() != inst.groups.len() {
        return Err("allocation length differs from group count".into());
    }
    let mut size = 0i128;
    let mut tp = 0i128;
    for (j, a) in alloc.iter().enumerate() {
        if a.key != inst.groups[j].key {
            return Err(format!("allocation key {:?} out of order", a.key));
        }
        if a.t as i128 > ex.pos[j] || a.f as i128 > ex.neg[j] {
            return Err(format!("group {:?} over-allocated", a.key));
        }
        size += (a.t + a.f) as i128;
        tp += a.t as i128;
    }
    if size != ex.k {
        return Err(format!("selected {size} rows, expected {}", ex.k));
    }
    // tp/k <= cap  <=>  tp <= floor(cap k)
    if tp > ex.t_cap {
        return Err(format!("true positives {tp} exceed the cap {}", ex.t_cap));
    }
    let r = ex.reference;
    // Each metric as (numerator, denominator); None when undefined.
    let metric = |j: usize, which: usize| -> Option<(i128, i128)> {
        let (t, f) = (alloc[j].t as i128, alloc[j].f as i128);
        let (num, den) = match which {
            0 => (f, ex.neg[j]),
            1 => (ex.pos[j] - t, ex.pos[j]),
            _ => (t, t + f),
        };
        (den > 0).then_some((num, den))
    };
    let enabled = [ex.constrain.fpr, ex.constrain.fnr, ex.constrain.ppv];
    for (which, name) in ["FPR", "FNR", "PPV"].iter().enumerate() {
        if !enabled[which] {
            continue;
        }
        let Some((rn, rd)) = metric(r, which) else { continue };
        for (j, group) in alloc.iter().enumerate() {
            if j == r {
                continue;
            }
            let Some((n, d)) = metric(j, which) else { continue };
            // lb·rn/rd <= n/d
            if ex.lb.0 * rn * d > n * rd * ex.lb.1 {
                return Err(format!("{name} of {:?} below lower bound", group.key));
            }
            if let Some((un, ud)) = ex.ub {
                if n * rd * ud > un * rn * d {
                    return Err(format!("{name} of {:?} above upper bound", group.key));
                }
            }
        }
    }
    Ok(())
}

/// One row index per selected item: the first `t_j` positive and first `f_j`
/// negative rows of each group, in input order.
pub fn realize_rows(keys: &[String], labels: &[bool], result: &SelectionResult) -> Result<Vec<usize>> {
    if keys.len() != labels.len() {
        return Err(invalid("keys and labels differ in length"));
    }
    let mut need: std::collections::HashMap<&str, (u64, u64)> =
        result.allocation.iter().map(|a| (a.key.as_str(), (a.t, a.f))).collect();
    let mut rows = Vec::with_capacity(result.k as usize);
    for (i, (key, &label)) in keys.iter().zip(labels).enumerate() {
        if let Some(n) = need.get_mut(key.as_str()) {
            let slot = if label { &mut n.0 } else { &mut n.1 };
            if *slot > 0 {
                *slot -= 1;
                rows.push(i);
            }
        }
    }
    if need.values().any(|&(t, f)| t > 0 || f > 0) {
        return Err(invalid("rows do not match the allocation's group counts"));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub ppv_cap: f64,
    pub lb: f64,
    pub ub: Option<f64>,
    /// Percent of the cohort size.
    pub k_grid: Vec<f64>,
    /// Allowed shortfall of constrained vs. unconstrained true positives.
    pub slack: u64,
    pub reference: Option<String>,
    pub constrain: ConstrainedMetrics,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            ppv_cap: 0.7,
            lb: 0.8,
            ub: Some(1.2),
            k_grid: default_k_grid(),
            slack: 0,
            reference: None,
            constrain: ConstrainedMetrics::default(),
        }
    }
}

pub fn default_k_grid() -> Vec<f64> {
    (1..=20).map(|i| 5.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanRow {
    pub k_pct: f64,
    pub k_abs: u64,
    pub unconstrained_tp: Option<u64>,
    pub constrained_tp: Option<u64>,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanReport {
    pub rows: Vec<KScanRow>,
    pub summary: String,
}

/// k for a percentage of `n`, rounded half away from zero and at least 1.
pub fn k_from_pct(pct: f64, n: u64) -> u64 {
    ((pct / 100.0 * n as f64).round() as u64).clamp(1, n.max(1))
}

pub fn format_pct(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// "All", "None", or the longest contiguous optimal run "[a,b]" (earliest on ties).
pub fn summarize(rows: &[KScanRow]) -> String {
    if !rows.is_empty() && rows.iter().all(|r| r.optimal) {
        return "All".into();
    }
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < rows.len() {
        if !rows[i].optimal {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < rows.len() && rows[i + 1].optimal {
            i += 1;
        }
        if best.is_none_or(|(a, b)| i - start > b - a) {
            best = Some((start, i));
        }
        i += 1;
    }
    match best {
        None => "None".into(),
        Some((a, b)) => format!("[{},{}]", format_pct(rows[a].k_pct), format_pct(rows[b].k_pct)),
    }
}

pub fn k_scan(stats: &CohortStats, opts: &ScanOptions) -> Result<KScanReport> {
    if stats.groups.is_empty() || stats.n == 0 {
        return Err(invalid("cohort statistics are empty"));
    }
    for &pct in &opts.k_grid {
        if !(pct.is_finite() && pct > 0.0 && pct <= 100.0) {
            return Err(invalid(format!("k percentage {pct} must lie in (0, 100]")));
        }
    }
    let rows = opts
        .k_grid
        .par_iter()
        .map(|&pct| {
            let k = k_from_pct(pct, stats.n);
            let inst = SelectionInstance {
                ppv_cap: opts.ppv_cap,
                lb: opts.lb,
                ub: opts.ub,
                reference: opts.reference.clone(),
                constrain: opts.constrain,
                ..SelectionInstance::from_stats(stats, k)
            };
            let unconstrained = match unconstrained_max_tp(&inst) {
                Ok(t) => Some(t),
                Err(SelectionError::Infeasible { .. }) => None,
                Err(e) => return Err(e),
            };
            let constrained = match solve_exact(&inst) {
                Ok(r) => Some(r.tp_total),
                Err(SelectionError::Infeasible { .. }) => None,
                Err(e) => return Err(e),
            };
            let optimal = match (unconstrained, constrained) {
                (Some(u), Some(c)) => c + opts.slack >= u,
                _ => false,
            };
            Ok(KScanRow { k_pct: pct, k_abs: k, unconstrained_tp: unconstrained, constrained_tp: constrained, optimal })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&rows);
    Ok(KScanReport { rows, summary })
}
