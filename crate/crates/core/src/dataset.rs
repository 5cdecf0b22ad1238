//! CSV cohorts, grouping, prevalence statistics and stratified down-sampling.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, GroupCounts, MetricsError};

pub const KEY_SEPARATOR: &str = "|";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("MissingColumn: column {0:?} not found in header")]
    MissingColumn(String),
    #[error("MissingValue: empty value in column {column:?} at data row {row}")]
    MissingValue { row: usize, column: String },
    #[error("EmptyFile: no header row")]
    EmptyFile,
    #[error("ReservedSeparator: value {value:?} at data row {row} contains '|'")]
    ReservedSeparator { row: usize, value: String },
    #[error("BadSchema: {0}")]
    BadSchema(String),
    #[error("BadGrouping: {0}")]
    BadGrouping(String),
    #[error("EmptyGroup: group {0:?} has no rows")]
    EmptyGroup(String),
    #[error("TargetTooLarge: requested {target} rows from a cohort of {available}")]
    TargetTooLarge { target: usize, available: usize },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema json: {0}")]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    #[serde(rename = "label")]
    pub label_column: String,
    #[serde(rename = "positive")]
    pub positive_value: String,
    #[serde(rename = "sensitive")]
    pub sensitive_columns: Vec<String>,
    #[serde(rename = "id", default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
}

impl TableSchema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let schema: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensitive_columns.is_empty() {
            return Err(DatasetError::BadSchema("at least one sensitive column is required".into()));
        }
        if self.sensitive_columns.contains(&self.label_column) {
            return Err(DatasetError::BadSchema(format!(
                "label column {:?} is also listed as sensitive",
                self.label_column
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortRow {
    pub label: bool,
    pub group_values: Vec<String>,
    pub ordinal: usize,
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cohort {
    pub schema: TableSchema,
    pub rows: Vec<CohortRow>,
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
}

pub fn load_csv(path: impl AsRef<Path>, schema: &TableSchema) -> Result<Cohort> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// Parses CSV text with a header row. `MissingValue` rows are 0-based data rows.
pub fn read_csv(reader: impl std::io::Read, schema: &TableSchema) -> Result<Cohort> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    let label_idx = column_index(&headers, &schema.label_column)?;
    let sens_idx = schema
        .sensitive_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;
    let id_idx = schema.id_column.as_deref().map(|c| column_index(&headers, c)).transpose()?;

    let mut rows = Vec::new();
    for (ordinal, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |i: usize, name: &str| -> Result<String> {
            match record.get(i) {
                Some(v) if !v.trim().is_empty() => Ok(v.to_string()),
                _ => Err(DatasetError::MissingValue { row: ordinal, column: name.to_string() }),
            }
        };
        let label = cell(label_idx, &schema.label_column)? == schema.positive_value;
        let mut group_values = Vec::with_capacity(sens_idx.len());
        for (&i, name) in sens_idx.iter().zip(&schema.sensitive_columns) {
            let value = cell(i, name)?;
            if value.contains(KEY_SEPARATOR) {
                return Err(DatasetError::ReservedSeparator { row: ordinal, value });
            }
            group_values.push(value);
        }
        let id = match (id_idx, &schema.id_column) {
            (Some(i), Some(name)) => Some(cell(i, name)?),
            _ => None,
        };
        rows.push(CohortRow { label, group_values, ordinal, id });
    }
    Ok(Cohort { schema: schema.clone(), rows })
}

/// Literal written for negative labels by [`write_csv`].
pub fn negative_literal(positive: &str) -> &'static str {
    if positive == "0" {
        "1"
    } else {
        "0"
    }
}

/// Writes the label, sensitive and id columns. Negative labels are written as
/// [`negative_literal`] since the original negative spelling is not retained.
pub fn write_csv(cohort: &Cohort, writer: impl std::io::Write) -> Result<()> {
    let schema = &cohort.schema;
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = vec![&schema.label_column];
    header.extend(schema.sensitive_columns.iter().map(String::as_str));
    if let Some(id) = &schema.id_column {
        header.push(id);
    }
    w.write_record(&header)?;
    let negative = negative_literal(&schema.positive_value);
    for row in &cohort.rows {
        let mut rec: Vec<&str> = vec![if row.label { &schema.positive_value } else { negative }];
        rec.extend(row.group_values.iter().map(String::as_str));
        if let Some(id) = &row.id {
            rec.push(id);
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingSpec {
    pub columns: Vec<String>,
}

impl GroupingSpec {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect() }
    }

    /// Positions of the grouping columns, in schema order.
    fn positions(&self, schema: &TableSchema) -> Result<Vec<usize>> {
        if self.columns.is_empty() {
            return Err(DatasetError::BadGrouping("no grouping columns".into()));
        }
        for c in &self.columns {
            if !schema.sensitive_columns.contains(c) {
                return Err(DatasetError::BadGrouping(format!("{c:?} is not a sensitive column")));
            }
        }
        Ok(schema
            .sensitive_columns
            .iter()
            .enumerate()
            .filter(|(_, c)| self.columns.contains(c))
            .map(|(i, _)| i)
            .collect())
    }
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Group key of every row under `g`.
    pub fn keys(&self, g: &GroupingSpec) -> Result<Vec<String>> {
        let pos = g.positions(&self.schema)?;
        Ok(self
            .rows
            .iter()
            .map(|r| pos.iter().map(|&i| r.group_values[i].as_str()).collect::<Vec<_>>().join(KEY_SEPARATOR))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub columns: Vec<String>,
    /// Sorted by key.
    pub groups: Vec<GroupCounts>,
    pub n: u64,
    pub positives: u64,
    pub overall_prevalence: f64,
    pub distribution_pct: Vec<f64>,
    pub prevalence_pct: Vec<f64>,
    /// `None` when there are fewer than two groups.
    pub max_prevalence_diff: Option<f64>,
}

impl CohortStats {
    pub fn from_groups(columns: Vec<String>, groups: Vec<GroupCounts>) -> Result<Self> {
        if let Some(g) = groups.iter().find(|g| g.n == 0) {
            return Err(DatasetError::EmptyGroup(g.key.clone()));
        }
        let n: u64 = groups.iter().map(|g| g.n).sum();
        let positives: u64 = groups.iter().map(|g| g.positives).sum();
        if n == 0 {
            return Err(DatasetError::EmptyGroup(String::new()));
        }
        let distribution_pct = groups.iter().map(|g| 100.0 * g.n as f64 / n as f64).collect();
        let prevalence_pct = groups.iter().map(|g| 100.0 * g.prevalence()).collect();
        let max_prevalence_diff = if groups.len() >= 2 {
            Some(metrics::max_pairwise_prevalence_diff(&groups)?)
        } else {
            None
        };
        Ok(Self {
            columns,
            groups,
            n,
            positives,
            overall_prevalence: positives as f64 / n as f64,
            distribution_pct,
            prevalence_pct,
            max_prevalence_diff,
        })
    }

    /// Max pairwise prevalence difference, erroring with fewer than two groups.
    pub fn require_max_diff(&self) -> Result<f64> {
        Ok(metrics::max_pairwise_prevalence_diff(&self.groups)?)
    }

    pub fn group(&self, key: &str) -> Option<&GroupCounts> {
        self.groups.iter().find(|g| g.key == key)
    }
}

pub fn group_stats(c: &Cohort, g: &GroupingSpec) -> Result<CohortStats> {
    let keys = c.keys(g)?;
    let mut tally: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (key, row) in keys.into_iter().zip(&c.rows) {
        let e = tally.entry(key).or_default();
        e.0 += 1;
        e.1 += row.label as u64;
    }
    if tally.is_empty() {
        return Err(DatasetError::EmptyGroup("<cohort>".into()));
    }
    let groups = tally
        .into_iter()
        .map(|(key, (n, p))| GroupCounts::new(key, n, p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    CohortStats::from_groups(g.columns.clone(), groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGroupCheck {
    pub key: String,
    pub prevalence: f64,
    pub refined_min: f64,
    pub refined_max: f64,
    pub bracketed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketingReport {
    pub single_max_diff: f64,
    pub intersected_max_diff: f64,
    pub groups: Vec<CoarseGroupCheck>,
    pub passed: bool,
}

fn diff_or_zero(stats: &CohortStats) -> f64 {
    stats.max_prevalence_diff.unwrap_or(0.0)
}

/// Checks that pooling intersectional groups never widens prevalence gaps.
pub fn intersection_bracketing_check(c: &Cohort, single: &GroupingSpec, intersected: &GroupingSpec) -> Result<BracketingReport> {
    if !single.columns.iter().all(|col| intersected.columns.contains(col)) {
        return Err(DatasetError::BadGrouping(format!(
            "{:?} is not a subset of {:?}",
            single.columns, intersected.columns
        )));
    }
    let coarse = group_stats(c, single)?;
    let fine = group_stats(c, intersected)?;
    let coarse_keys = c.keys(single)?;
    let fine_keys = c.keys(intersected)?;
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (ck, fk) in coarse_keys.iter().zip(&fine_keys) {
        let list = children.entry(ck.as_str()).or_default();
        if !list.contains(&fk.as_str()) {
            list.push(fk);
        }
    }
    let mut groups = Vec::new();
    for g in &coarse.groups {
        let prevs: Vec<f64> = children[g.key.as_str()]
            .iter()
            .map(|k| fine.group(k).expect("refined key present").prevalence())
            .collect();
        let lo = prevs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = prevs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = g.prevalence();
        let tol = 1e-12;
        groups.push(CoarseGroupCheck {
            key: g.key.clone(),
            prevalence: p,
            refined_min: lo,
            refined_max: hi,
            bracketed: p >= lo - tol && p <= hi + tol,
        });
    }
    let single_max_diff = diff_or_zero(&coarse);
    let intersected_max_diff = diff_or_zero(&fine);
    let passed = groups.iter().all(|g| g.bracketed) && single_max_diff <= intersected_max_diff + 1e-12;
    Ok(BracketingReport { single_max_diff, intersected_max_diff, groups, passed })
}

/// Largest-remainder apportionment of `target` over `sizes`, in exact integers.
pub fn largest_remainder(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * target / total).collect();
    let mut left = target - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // Remainders compared as s*target mod total; ties go to the earlier stratum.
    order.sort_by(|&a, &b| ((sizes[b] * target) % total).cmp(&((sizes[a] * target) % total)).then(a.cmp(&b)));
    for i in order {
        if left == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            left -= 1;
        }
    }
    quotas
}

/// Down-samples to exactly `target_n` rows stratified on (group key, label).
/// Rows keep their original order and ordinals.
pub fn stratified_sample(c: &Cohort, g: &GroupingSpec, target_n: usize, seed: u64) -> Result<Cohort> {
    if target_n > c.len() {
        return Err(DatasetError::TargetTooLarge { target: target_n, available: c.len() });
    }
    let keys = c.keys(g)?;
    let mut strata: BTreeMap<(String, bool), Vec<usize>> = BTreeMap::new();
    for (i, (key, row)) in keys.into_iter().zip(&c.rows).enumerate() {
        strata.entry((key, row.label)).or_default().push(i);
    }
    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let quotas = largest_remainder(&sizes, target_n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; c.len()];
    for (members, quota) in strata.into_values().zip(quotas) {
        let mut members = members;
        members.shuffle(&mut rng);
        for &i in &members[..quota] {
            keep[i] = true;
        }
    }
    let rows = c.rows.iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r.clone()).collect();
    Ok(Cohort { schema: c.schema.clone(), rows })
}
