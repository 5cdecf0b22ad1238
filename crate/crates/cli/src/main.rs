mod family;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairfeas::dataset::{
    group_stats, intersection_bracketing_check, load_csv, stratified_sample, write_csv, BracketingReport, Cohort,
    CohortStats, GroupingSpec, TableSchema,
};
use fairfeas::export::{csv_table, heatmap_csv, heatmap_pgm, mask_pgm, summary_row, write_atomic, SUMMARY_HEADER};
use fairfeas::impossibility::{fairness_area_acc, offset_bounds, RegionSpec};
use fairfeas::planimeter::{circle_sum_area, detector_mask, required_grid_size, CurveFamily, DetectorGrid, Fill};
use fairfeas::region::{
    count_joint, enumerate_triples, heatmap, sensitivity_scan, Discretization, EpsMode, HeatmapConfig, IdxRange,
    JointCountQuery,
};
use fairfeas::selection::{
    k_from_pct, k_scan, realize_rows, solve_exact, ConstrainedMetrics, GroupSupply, KScanReport, ScanOptions,
    SelectionError, SelectionInstance, SelectionResult, MAX_GROUPS,
};
use serde::Serialize;

use family::FamilySpec;

/// Largest cohort for which `select --rows` lists the chosen rows.
const MAX_REALIZED_ROWS: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "fairfeas", version, about = "Feasibility checks for group fairness constraints")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, env = "FAIRFEAS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Area of the relaxed ACC fairness region.
    Area(AreaArgs),
    /// Count discretized feasible models over a prevalence grid.
    Region(RegionArgs),
    /// Cohort statistics, intersectional checks and optimal-k scans for a CSV.
    Analyze(AnalyzeArgs),
    /// Dot-planimeter area estimate for a family of curves.
    Planimeter(PlanimeterArgs),
    /// Best fair top-k selection at a single k.
    Select(SelectArgs),
}

#[derive(Args, Debug)]
struct AreaArgs {
    /// Accuracy tolerance.
    #[arg(long)]
    gamma: f64,
    /// Prevalence difference between the groups.
    #[arg(long, allow_hyphen_values = true)]
    eps_p: f64,
    /// Group 1 prevalence; only checked for consistency with eps-p.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// Grid resolution N: metrics live on multiples of 1/N.
    #[arg(long, default_value_t = 100)]
    n: u32,
    /// Tolerance on every metric difference.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// FPR tolerance (overrides --eps).
    #[arg(long)]
    eps_fpr: Option<f64>,
    /// FNR tolerance (overrides --eps).
    #[arg(long)]
    eps_fnr: Option<f64>,
    /// PPV tolerance (overrides --eps).
    #[arg(long)]
    eps_ppv: Option<f64>,
    /// Prevalence grid step.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Lowest PPV counted.
    #[arg(long)]
    ppv_min: Option<f64>,
    /// Highest PPV counted.
    #[arg(long)]
    ppv_max: Option<f64>,
    /// Let FNR and PPV range over [0, 1] instead of [0, 0.99].
    #[arg(long)]
    full_ranges: bool,
    /// Require differences strictly below the tolerance.
    #[arg(long)]
    strict: bool,
    /// Group 1 prevalence for --single-cell.
    #[arg(long, requires = "single_cell")]
    p1: Option<f64>,
    /// Group 2 prevalence for --single-cell.
    #[arg(long, requires = "single_cell")]
    p2: Option<f64>,
    /// Count a single (p1, p2) cell instead of the whole grid.
    #[arg(long, requires_all = ["p1", "p2"])]
    single_cell: bool,
    /// Print totals over grid steps and tolerance modes as CSV.
    #[arg(long, conflicts_with = "single_cell")]
    sensitivity: bool,
    /// Tolerances for --sensitivity.
    #[arg(long, value_delimiter = ',', default_value = "0,0.02,0.05,0.1")]
    sens_eps: Vec<f64>,
    /// Grid steps for --sensitivity.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02")]
    sens_steps: Vec<f64>,
    /// Directory for heatmap.csv, heatmap.pgm and region.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Fpr,
    Fnr,
    Ppv,
}

#[derive(Args, Debug)]
struct ConstraintArgs {
    /// Upper bound on list precision.
    #[arg(long, default_value_t = 0.7)]
    cap: f64,
    /// Lowest allowed ratio of a group metric to the reference metric.
    #[arg(long, default_value_t = 0.8)]
    lb: f64,
    /// Highest allowed ratio.
    #[arg(long, default_value_t = 1.2, conflicts_with = "no_ub")]
    ub: f64,
    /// Drop the upper ratio bound.
    #[arg(long)]
    no_ub: bool,
    /// Reference group key (defaults to the largest group).
    #[arg(long)]
    reference: Option<String>,
    /// Metrics left unconstrained.
    #[arg(long, value_enum, value_delimiter = ',')]
    skip: Vec<Metric>,
}

impl ConstraintArgs {
    fn ub(&self) -> Option<f64> {
        (!self.no_ub).then_some(self.ub)
    }

    fn constrain(&self) -> ConstrainedMetrics {
        ConstrainedMetrics {
            fpr: !self.skip.contains(&Metric::Fpr),
            fnr: !self.skip.contains(&Metric::Fnr),
            ppv: !self.skip.contains(&Metric::Ppv),
        }
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Input CSV with a header row.
    csv: PathBuf,
    /// Schema JSON: {"label", "positive", "sensitive", "id"}.
    #[arg(long)]
    schema: PathBuf,
    /// Sensitive column to group by; repeat for several groupings
    /// (defaults to every sensitive column).
    #[arg(long)]
    group: Vec<String>,
    /// Also group by the joint values of all grouping columns and check bracketing.
    #[arg(long)]
    intersect: bool,
    #[command(flatten)]
    constraints: ConstraintArgs,
    /// k values as percentages of the cohort size.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90,95,100")]
    k_grid: Vec<f64>,
    /// True positives the constrained optimum may give up and still count as optimal.
    #[arg(long, default_value_t = 0)]
    slack: u64,
    /// Down-sample to this many rows, stratified on group and label.
    #[arg(long)]
    sample_n: Option<usize>,
    /// Seed for --sample-n.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset name in the table (defaults to the file stem).
    #[arg(long)]
    name: Option<String>,
    /// Directory for report.json, table.csv and sample.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FillArg {
    Below,
    Above,
    CurveOnly,
}

impl From<FillArg> for Fill {
    fn from(f: FillArg) -> Self {
        match f {
            FillArg::Below => Fill::Below,
            FillArg::Above => Fill::Above,
            FillArg::CurveOnly => Fill::CurveOnly,
        }
    }
}

#[derive(Args, Debug)]
struct PlanimeterArgs {
    /// Detectors per side.
    #[arg(long, conflicts_with_all = ["b", "err"], required_unless_present_all = ["b", "err"])]
    g: Option<u32>,
    /// Error-bound constant; with --err picks g = ceil(b / err).
    #[arg(long, requires = "err")]
    b: Option<u32>,
    /// Target error bound.
    #[arg(long, requires = "b")]
    err: Option<f64>,
    /// line:y=<expr in x>, const:<y>, acc-band or ppv-region.
    #[arg(long)]
    family: String,
    #[arg(long, value_enum, default_value_t = FillArg::CurveOnly)]
    fill: FillArg,
    /// Accuracy tolerance for acc-band.
    #[arg(long)]
    gamma: Option<f64>,
    /// Prevalence difference for acc-band and ppv-region.
    #[arg(long, allow_hyphen_values = true)]
    eps_p: Option<f64>,
    /// Group 1 prevalence for ppv-region.
    #[arg(long)]
    p: Option<f64>,
    /// Tolerance range swept by ppv-region.
    #[arg(long, default_value_t = 0.05)]
    eps_max: f64,
    /// Points per tolerance axis for ppv-region.
    #[arg(long, default_value_t = 5)]
    steps: usize,
    /// Detector radius (defaults to half the spacing).
    #[arg(long)]
    radius: Option<f64>,
    /// Curve sampling step (defaults to a quarter of the spacing).
    #[arg(long)]
    sample_step: Option<f64>,
    /// Directory for estimate.json and mask.pgm.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Input CSV with a header row.
    csv: PathBuf,
    /// Schema JSON: {"label", "positive", "sensitive", "id"}.
    #[arg(long)]
    schema: PathBuf,
    /// Sensitive columns whose joint values form the groups (defaults to all).
    #[arg(long)]
    group: Vec<String>,
    /// Number of positive predictions.
    #[arg(long, conflicts_with = "k_pct", required_unless_present = "k_pct")]
    k: Option<u64>,
    /// Number of positive predictions as a percentage of the cohort.
    #[arg(long)]
    k_pct: Option<f64>,
    #[command(flatten)]
    constraints: ConstraintArgs,
    /// List the selected row numbers (cohorts up to 10000 rows).
    #[arg(long)]
    rows: bool,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Area(a) => cmd_area(&a),
        Command::Region(a) => cmd_region(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Planimeter(a) => cmd_planimeter(&a),
        Command::Select(a) => cmd_select(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_area(a: &AreaArgs) -> Result<ExitCode> {
    let spec = RegionSpec { gamma: a.gamma, eps_p: a.eps_p, p: a.p };
    println!("{:?}", fairness_area_acc(&spec)?);
    Ok(ExitCode::SUCCESS)
}

fn unit(name: &str, x: f64) -> Result<f64> {
    if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
        bail!("DomainError: {name} = {x} must lie in [0, 1]");
    }
    Ok(x)
}

fn ppv_window(a: &RegionArgs, disc: &Discretization) -> Result<Option<IdxRange>> {
    if a.ppv_min.is_none() && a.ppv_max.is_none() {
        return Ok(None);
    }
    let lo = disc.index_of(unit("ppv-min", a.ppv_min.unwrap_or(0.0))?);
    let hi = disc.index_of(unit("ppv-max", a.ppv_max.unwrap_or(1.0))?);
    if lo > hi {
        bail!("DomainError: ppv-min exceeds ppv-max");
    }
    Ok(Some((lo, hi)))
}

#[derive(Serialize)]
struct RegionSummary {
    n: u32,
    eps: [f64; 3],
    mode: EpsMode,
    p_grid_step: f64,
    ppv_window: Option<IdxRange>,
    prevalences: usize,
    total: u64,
    max_cell: u64,
    diagonal_only: bool,
}

fn cmd_region(a: &RegionArgs) -> Result<ExitCode> {
    let disc = if a.full_ranges { Discretization::full(a.n)? } else { Discretization::new(a.n)? };
    let mode = if a.strict { EpsMode::Strict } else { EpsMode::Inclusive };
    let eps = [a.eps_fpr.unwrap_or(a.eps), a.eps_fnr.unwrap_or(a.eps), a.eps_ppv.unwrap_or(a.eps)];
    for (name, e) in ["eps-fpr", "eps-fnr", "eps-ppv"].iter().zip(eps) {
        unit(name, e)?;
    }
    let window = ppv_window(a, &disc)?;

    if a.sensitivity {
        let modes = [EpsMode::Inclusive, EpsMode::Strict];
        let rows = sensitivity_scan(&disc, &a.sens_eps, &a.sens_steps, &modes)?;
        let mut text = String::from("step,mode,eps,total,bins\n");
        for r in rows {
            let bins: Vec<String> = r.bin_totals.iter().map(u64::to_string).collect();
            let mode = if r.mode == EpsMode::Strict { "strict" } else { "inclusive" };
            text.push_str(&format!("{},{mode},{},{},{}\n", r.p_grid_step, r.eps, r.total, bins.join(" ")));
        }
        print!("{text}");
        if let Some(dir) = &a.out_dir {
            prepare_dir(dir)?;
            write_file(dir, "sensitivity.csv", text.as_bytes())?;
        }
        return Ok(ExitCode::SUCCESS);
    }

    let eps_idx = eps.map(|e| disc.index_of(e));
    if a.single_cell {
        let (p1, p2) = (a.p1.expect("required by clap"), a.p2.expect("required by clap"));
        let (i1, i2) = (disc.index_of(unit("p1", p1)?), disc.index_of(unit("p2", p2)?));
        let restrict = |s: fairfeas::region::FeasibleTripleSet| match window {
            Some(w) => s.restrict_v(w),
            None => s,
        };
        let s1 = restrict(enumerate_triples(i1, &disc)?);
        let s2 = restrict(enumerate_triples(i2, &disc)?);
        let q = JointCountQuery { p1_idx: i1, p2_idx: i2, eps_idx, mode };
        println!("{}", count_joint(&q, &s1, &s2, &disc)?);
        return Ok(ExitCode::SUCCESS);
    }

    let cfg = HeatmapConfig { eps_max: a.eps, eps_per_metric: Some(eps), p_grid_step: a.step, ppv_window: window, mode };
    let h = heatmap(&disc, &cfg)?;
    println!("{}", h.total);
    if let Some(dir) = &a.out_dir {
        prepare_dir(dir)?;
        let summary = RegionSummary {
            n: a.n,
            eps,
            mode,
            p_grid_step: a.step,
            ppv_window: window,
            prevalences: h.p_indices.len(),
            total: h.total,
            max_cell: h.max_count(),
            diagonal_only: h.diagonal_only(),
        };
        write_file(dir, "heatmap.csv", heatmap_csv(&h).as_bytes())?;
        write_file(dir, "heatmap.pgm", &heatmap_pgm(&h))?;
        write_file(dir, "region.json", to_json(&summary)?.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn load_cohort(csv: &Path, schema: &Path) -> Result<Cohort> {
    let schema = TableSchema::from_json_file(schema).with_context(|| format!("reading schema {}", schema.display()))?;
    load_csv(csv, &schema).with_context(|| format!("reading {}", csv.display()))
}

#[derive(Serialize)]
struct GroupingReport {
    columns: Vec<String>,
    stats: CohortStats,
    scan: Option<KScanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan_skipped: Option<String>,
}

#[derive(Serialize)]
struct BracketingEntry {
    single: Vec<String>,
    intersected: Vec<String>,
    report: BracketingReport,
}

#[derive(Serialize)]
struct AnalyzeReport {
    dataset: String,
    rows: usize,
    sampled_from: Option<usize>,
    groupings: Vec<GroupingReport>,
    bracketing: Vec<BracketingEntry>,
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<ExitCode> {
    let cohort = load_cohort(&a.csv, &a.schema)?;
    let columns = if a.group.is_empty() { cohort.schema.sensitive_columns.clone() } else { a.group.clone() };
    let joint = GroupingSpec::new(columns.iter().cloned());
    let original_rows = cohort.len();
    let cohort = match a.sample_n {
        Some(n) => stratified_sample(&cohort, &joint, n, a.seed)?,
        None => cohort,
    };
    let c = &a.constraints;
    let opts = ScanOptions {
        ppv_cap: c.cap,
        lb: c.lb,
        ub: c.ub(),
        k_grid: a.k_grid.clone(),
        slack: a.slack,
        reference: c.reference.clone(),
        constrain: c.constrain(),
    };

    let mut specs: Vec<GroupingSpec> = columns.iter().map(|col| GroupingSpec::new([col.as_str()])).collect();
    if a.intersect && columns.len() > 1 {
        specs.push(joint.clone());
    }
    let mut groupings = Vec::new();
    for spec in &specs {
        let stats = group_stats(&cohort, spec)?;
        let (scan, scan_skipped) = if stats.groups.len() > MAX_GROUPS {
            (None, Some(format!("{} groups exceed the solver limit of {MAX_GROUPS}", stats.groups.len())))
        } else {
            (Some(k_scan(&stats, &opts)?), None)
        };
        groupings.push(GroupingReport { columns: spec.columns.clone(), stats, scan, scan_skipped });
    }
    let mut bracketing = Vec::new();
    if a.intersect && columns.len() > 1 {
        for col in &columns {
            let single = GroupingSpec::new([col.as_str()]);
            let report = intersection_bracketing_check(&cohort, &single, &joint)?;
            bracketing.push(BracketingEntry { single: single.columns, intersected: joint.columns.clone(), report });
        }
    }

    let dataset = a.name.clone().unwrap_or_else(|| {
        a.csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    let report = AnalyzeReport {
        dataset: dataset.clone(),
        rows: cohort.len(),
        sampled_from: a.sample_n.map(|_| original_rows),
        groupings,
        bracketing,
    };
    let json = to_json(&report)?;
    print!("{json}");
    if let Some(dir) = &a.out {
        prepare_dir(dir)?;
        write_file(dir, "report.json", json.as_bytes())?;
        let rows: Vec<[String; 8]> = report
            .groupings
            .iter()
            .filter_map(|g| g.scan.as_ref().map(|s| summary_row(&dataset, &g.columns.join(" x "), &g.stats, s)))
            .collect();
        write_file(dir, "table.csv", &csv_table(&SUMMARY_HEADER, &rows))?;
        if a.sample_n.is_some() {
            let mut bytes = Vec::new();
            write_csv(&cohort, &mut bytes)?;
            write_file(dir, "sample.csv", &bytes)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PlanimeterReport {
    g: u32,
    radius: f64,
    detectors: u64,
    satisfied: u64,
    fraction: f64,
    circle_sum_area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_area: Option<f64>,
}

fn cmd_planimeter(a: &PlanimeterArgs) -> Result<ExitCode> {
    let g = match (a.g, a.b, a.err) {
        (Some(g), _, _) => g,
        (None, Some(b), Some(err)) => required_grid_size(b, err)?,
        _ => bail!("either --g or both --b and --err are required"),
    };
    let mut grid = DetectorGrid::new(g)?;
    if let Some(r) = a.radius {
        if !(r.is_finite() && r > 0.0) {
            bail!("DomainError: radius = {r} must be positive");
        }
        grid = grid.with_radius(r);
    }
    let mut exact_area = None;
    let fam = match family::parse(&a.family)? {
        FamilySpec::Line { slope, intercept } => CurveFamily::line(slope, intercept),
        FamilySpec::Constant(y) => CurveFamily::constant(y),
        FamilySpec::AccBand => {
            let (Some(gamma), Some(eps_p)) = (a.gamma, a.eps_p) else {
                bail!("acc-band needs --gamma and --eps-p");
            };
            let spec = RegionSpec { gamma, eps_p, p: a.p };
            offset_bounds(&spec)?;
            exact_area = Some(fairness_area_acc(&spec)?);
            CurveFamily::acc_band(&spec, &grid)?
        }
        FamilySpec::PpvRegion => {
            let (Some(p), Some(eps_p)) = (a.p, a.eps_p) else {
                bail!("ppv-region needs --p and --eps-p");
            };
            if !(p > 0.0 && p < 1.0 && p + eps_p > 0.0 && p + eps_p < 1.0) {
                bail!("DomainError: p and p + eps-p must lie in (0, 1)");
            }
            unit("eps-max", a.eps_max)?;
            CurveFamily::ppv_region(p, eps_p, a.eps_max, a.steps)
        }
    };
    let mask = detector_mask(&grid, &fam, a.fill.into(), a.sample_step)?;
    let est = mask.estimate();
    let report = PlanimeterReport {
        g,
        radius: grid.radius,
        detectors: grid.total(),
        satisfied: est.satisfied,
        fraction: est.fraction,
        circle_sum_area: circle_sum_area(&grid, &est),
        exact_area,
    };
    let json = to_json(&report)?;
    print!("{json}");
    if let Some(dir) = &a.out {
        prepare_dir(dir)?;
        write_file(dir, "estimate.json", json.as_bytes())?;
        write_file(dir, "mask.pgm", &mask_pgm(&mask))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SelectReport {
    #[serde(flatten)]
    result: SelectionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<usize>>,
}

fn cmd_select(a: &SelectArgs) -> Result<ExitCode> {
    let cohort = load_cohort(&a.csv, &a.schema)?;
    let columns = if a.group.is_empty() { cohort.schema.sensitive_columns.clone() } else { a.group.clone() };
    let spec = GroupingSpec::new(columns);
    let stats = group_stats(&cohort, &spec)?;
    let k = match (a.k, a.k_pct) {
        (Some(k), _) => k,
        (None, Some(pct)) => {
            if !(pct.is_finite() && pct > 0.0 && pct <= 100.0) {
                bail!("DomainError: k-pct = {pct} must lie in (0, 100]");
            }
            k_from_pct(pct, stats.n)
        }
        _ => bail!("either --k or --k-pct is required"),
    };
    let c = &a.constraints;
    let inst = SelectionInstance {
        groups: stats.groups.iter().map(|g| GroupSupply::new(g.key.clone(), g.positives, g.negatives())).collect(),
        k,
        ppv_cap: c.cap,
        lb: c.lb,
        ub: c.ub(),
        reference: c.reference.clone(),
        constrain: c.constrain(),
    };
    let result = match solve_exact(&inst) {
        Ok(r) => r,
        Err(e @ SelectionError::Infeasible { .. }) => {
            eprintln!("{e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let rows = if a.rows {
        if cohort.len() > MAX_REALIZED_ROWS {
            bail!("--rows is limited to cohorts of at most {MAX_REALIZED_ROWS} rows");
        }
        let keys = cohort.keys(&spec)?;
        let labels: Vec<bool> = cohort.rows.iter().map(|r| r.label).collect();
        Some(realize_rows(&keys, &labels, &result)?)
    } else {
        None
    };
    let json = to_json(&SelectReport { result, rows })?;
    print!("{json}");
    if let Some(path) = &a.out {
        write_atomic(path, json.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}
