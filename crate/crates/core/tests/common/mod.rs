#![allow(dead_code)]

use fairfeas::selection::{ConstrainedMetrics, GroupSupply, SelectionInstance};

/// Exact fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(pub i128, pub i128);

impl Frac {
    pub fn value(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

#[derive(Debug, Clone)]
pub struct ItemInstance {
    /// (group, label) per item.
    pub items: Vec<(usize, bool)>,
    pub groups: usize,
    pub k: usize,
    pub cap: Frac,
    pub lb: Frac,
    pub ub: Option<Frac>,
    pub reference: usize,
    pub constrain: [bool; 3],
}

impl ItemInstance {
    pub fn to_selection(&self) -> SelectionInstance {
        let groups = (0..self.groups)
            .map(|g| {
                let p = self.items.iter().filter(|&&(gi, l)| gi == g && l).count() as u64;
                let n = self.items.iter().filter(|&&(gi, l)| gi == g && !l).count() as u64;
                GroupSupply::new(format!("g{g}"), p, n)
            })
            .collect();
        SelectionInstance {
            groups,
            k: self.k as u64,
            ppv_cap: self.cap.value(),
            lb: self.lb.value(),
            ub: self.ub.map(Frac::value),
            reference: Some(format!("g{}", self.reference)),
            constrain: ConstrainedMetrics { fpr: self.constrain[0], fnr: self.constrain[1], ppv: self.constrain[2] },
        }
    }
}

/// Is `a/b` within `[lb, ub]` times `c/d`? Both fractions have positive denominators.
fn ratio_ok(a: i128, b: i128, c: i128, d: i128, lb: Frac, ub: Option<Frac>) -> bool {
    // a/b >= lb * c/d   <=>  a*d*lb.1 >= lb.0*c*b
    if a * d * lb.1 < lb.0 * c * b {
        return false;
    }
    match ub {
        Some(u) => a * d * u.1 <= u.0 * c * b,
        None => true,
    }
}

/// Best true-positive count over every k-subset of items, or `None` when no
/// subset satisfies the constraints. Undefined metrics skip their constraint.
pub fn brute_force(inst: &ItemInstance) -> Option<u64> {
    let n = inst.items.len();
    assert!(n <= 24);
    let k = inst.k;
    let mut pos_mask = vec![0u32; inst.groups];
    let mut neg_mask = vec![0u32; inst.groups];
    for (i, &(g, l)) in inst.items.iter().enumerate() {
        if l {
            pos_mask[g] |= 1 << i;
        } else {
            neg_mask[g] |= 1 << i;
        }
    }
    let pos: Vec<i128> = pos_mask.iter().map(|m| m.count_ones() as i128).collect();
    let neg: Vec<i128> = neg_mask.iter().map(|m| m.count_ones() as i128).collect();
    let r = inst.reference;
    let mut best: Option<u64> = None;
    if k == 0 || k > n {
        return None;
    }
    let mut subset: u32 = (1u32 << k) - 1;
    let limit: u64 = 1u64 << n;
    while (subset as u64) < limit {
        let t: Vec<i128> = pos_mask.iter().map(|m| (subset & m).count_ones() as i128).collect();
        let f: Vec<i128> = neg_mask.iter().map(|m| (subset & m).count_ones() as i128).collect();
        let tp: i128 = t.iter().sum();
        let mut ok = tp * inst.cap.1 <= inst.cap.0 * k as i128;
        for j in 0..inst.groups {
            if !ok || j == r {
                continue;
            }
            // FPR
            if inst.constrain[0] && neg[r] > 0 && neg[j] > 0 {
                ok &= ratio_ok(f[j], neg[j], f[r], neg[r], inst.lb, inst.ub);
            }
            // FNR
            if inst.constrain[1] && pos[r] > 0 && pos[j] > 0 {
                ok &= ratio_ok(pos[j] - t[j], pos[j], pos[r] - t[r], pos[r], inst.lb, inst.ub);
            }
            // PPV
            let (sj, sr) = (t[j] + f[j], t[r] + f[r]);
            if inst.constrain[2] && sr > 0 && sj > 0 {
                ok &= ratio_ok(t[j], sj, t[r], sr, inst.lb, inst.ub);
            }
        }
        if ok {
            best = Some(best.map_or(tp as u64, |b| b.max(tp as u64)));
        }
        // Gosper's hack: next subset with the same popcount.
        let c = subset & subset.wrapping_neg();
        let rr = subset.wrapping_add(c);
        if rr == 0 {
            break;
        }
        subset = (((rr ^ subset) >> 2) / c) | rr;
    }
    best
}

pub const CAPS: [Frac; 4] = [Frac(1, 2), Frac(7, 10), Frac(17, 20), Frac(1, 1)];
pub const BOUNDS: [(Frac, Option<Frac>); 4] = [
    (Frac(4, 5), Some(Frac(6, 5))),
    (Frac(1, 2), Some(Frac(2, 1))),
    (Frac(0, 1), None),
    (Frac(1, 1), Some(Frac(1, 1))),
];

/// Random instance with at most `max_items` items and at most 3 groups.
pub fn random_instance(rng: &mut impl rand::Rng, max_items: usize) -> ItemInstance {
    let n = rng.gen_range(1..=max_items);
    let groups = rng.gen_range(1..=3usize.min(n));
    let prevalence: Vec<f64> = (0..groups).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut items: Vec<(usize, bool)> = (0..n)
        .map(|i| {
            let g = if i < groups { i } else { rng.gen_range(0..groups) };
            (g, rng.gen_bool(prevalence[g]))
        })
        .collect();
    // Shuffle so group membership is not tied to position.
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
    let (lb, ub) = BOUNDS[rng.gen_range(0..BOUNDS.len())];
    ItemInstance {
        items,
        groups,
        k: rng.gen_range(1..=n),
        cap: CAPS[rng.gen_range(0..CAPS.len())],
        lb,
        ub,
        reference: rng.gen_range(0..groups),
        constrain: [rng.gen_bool(0.85), rng.gen_bool(0.85), rng.gen_bool(0.85)],
    }
}

/// Cohort CSV text with one `g` column from (key, size, positives) triples.
pub fn cohort_csv(groups: &[(&str, usize, usize)]) -> String {
    let mut text = String::from("y,g\n");
    for &(key, n, p) in groups {
        for i in 0..n {
            text.push_str(&format!("{},{key}\n", if i < p { 1 } else { 0 }));
        }
    }
    text
}

/// Feasible (α, β, v) at prevalence index `p`, checked against the FPR relation
/// `α/N = P/(N-P) · (N-v)/v · (N-β)/N` in exact fractions. At `v = 0` the
/// multiplied-out form leaves `P·N·(N-β) = 0`.
pub fn naive_triples(n: u32, p: u32, alpha: (u32, u32), beta: (u32, u32), v: (u32, u32)) -> Vec<[u32; 3]> {
    let (n_, p_) = (n as i128, p as i128);
    let mut out = Vec::new();
    for a in alpha.0..=alpha.1 {
        for b in beta.0..=beta.1 {
            for w in v.0..=v.1 {
                let (a_, b_, w_) = (a as i128, b as i128, w as i128);
                let ok = if w == 0 {
                    b_ == n_
                } else {
                    let num = p_ * (n_ - w_) * (n_ - b_);
                    let den = (n_ - p_) * w_ * n_;
                    a_ * den == num * n_
                };
                if ok {
                    out.push([a, b, w]);
                }
            }
        }
    }
    out
}

/// Pairs within `eps` (index units) on every coordinate; `strict` demands `< eps`
/// except at zero tolerance.
pub fn naive_joint(s1: &[[u32; 3]], s2: &[[u32; 3]], eps: [u32; 3], strict: bool) -> u64 {
    let within = |d: u32, e: u32| if strict && e > 0 { d < e } else { d <= e };
    let mut count = 0;
    for a in s1 {
        for b in s2 {
            if (0..3).all(|i| within(a[i].abs_diff(b[i]), eps[i])) {
                count += 1;
            }
        }
    }
    count
}

/// Fraction of `samples` uniform (FNR, FPR) points with `|FPR - FNR| <= c`,
/// with its standard error.
pub fn monte_carlo_band(rng: &mut impl rand::Rng, c: f64, samples: usize) -> (f64, f64) {
    let mut hits = 0usize;
    for _ in 0..samples {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen();
        if (y - x).abs() <= c {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    (f, (f * (1.0 - f) / samples as f64).sqrt())
}

/// Random cohort CSV with columns `y,a,b`; every (a, b) cell is nonempty.
pub fn random_two_attribute_csv(rng: &mut impl rand::Rng) -> String {
    let na = rng.gen_range(2..=4);
    let nb = rng.gen_range(2..=4);
    let mut text = String::from("y,a,b\n");
    for i in 0..na {
        for j in 0..nb {
            let size = rng.gen_range(1..=30);
            let prev: f64 = rng.gen();
            for _ in 0..size {
                text.push_str(&format!("{},a{i},b{j}\n", u8::from(rng.gen_bool(prev))));
            }
        }
    }
    text
}
