//! Output formats: heatmap CSV, binary PGM images, per-dataset summary rows, and
//! atomic file replacement.

use std::io::Write;
use std::path::Path;

use crate::dataset::CohortStats;
use crate::planimeter::DetectorMask;
use crate::region::PrevalenceHeatmap;
use crate::selection::KScanReport;

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> std::io::Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Matrix with a header row of p2 indices and the p1 index in the first column.
pub fn heatmap_csv(h: &PrevalenceHeatmap) -> String {
    let mut out = String::from("p1\\p2");
    for p in &h.p_indices {
        out.push_str(&format!(",{p}"));
    }
    out.push('\n');
    for (p1, row) in h.p_indices.iter().zip(&h.counts) {
        out.push_str(&p1.to_string());
        for c in row {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}

/// Binary 8-bit greyscale PGM (P5). `pixels` is row-major, top row first.
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// `round(255·ln(1+c)/ln(1+max))`, zero when `max` is zero.
pub fn log_scale(count: u64, max: u64) -> u8 {
    if max == 0 {
        return 0;
    }
    let v = 255.0 * (count as f64).ln_1p() / (max as f64).ln_1p();
    v.round().clamp(0.0, 255.0) as u8
}

/// Heatmap image with p1 along rows (first row = smallest p1) and p2 along columns.
pub fn heatmap_pgm(h: &PrevalenceHeatmap) -> Vec<u8> {
    let max = h.max_count();
    let n = h.p_indices.len();
    let pixels: Vec<u8> = h.counts.iter().flatten().map(|&c| log_scale(c, max)).collect();
    pgm(n, n, &pixels)
}

/// Satisfied detectors in white, `y = 1` on the top row.
pub fn mask_pgm(mask: &DetectorMask) -> Vec<u8> {
    let g = mask.g;
    let mut pixels = Vec::with_capacity((g * g) as usize);
    for iy in (0..g).rev() {
        for ix in 0..g {
            pixels.push(if mask.get(ix, iy) { 255 } else { 0 });
        }
    }
    pgm(g as usize, g as usize, &pixels)
}

fn pct2(x: f64) -> String {
    let s = format!("{:.2}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

pub const SUMMARY_HEADER: [&str; 8] = [
    "Dataset (Outcome)",
    "Number of Samples",
    "Overall Prevalence (%)",
    "Sensitive Attribute",
    "Group Distribution (%)",
    "Group Prevalence (%)",
    "Maximum Prevalence Difference (%)",
    "Optimal k Range",
];

pub fn summary_row(dataset: &str, attribute: &str, stats: &CohortStats, report: &KScanReport) -> [String; 8] {
    let joined = |values: &[f64]| {
        stats
            .groups
            .iter()
            .zip(values)
            .map(|(g, v)| format!("{}: {}", g.key, pct2(*v)))
            .collect::<Vec<_>>()
            .join("; ")
    };
    [
        dataset.to_string(),
        stats.n.to_string(),
        pct2(100.0 * stats.overall_prevalence),
        attribute.to_string(),
        joined(&stats.distribution_pct),
        joined(&stats.prevalence_pct),
        stats.max_prevalence_diff.map_or_else(|| "0".into(), |d| pct2(100.0 * d)),
        report.summary.clone(),
    ]
}

/// CSV text for a header plus rows, with RFC-4180 quoting.
pub fn csv_table<const W: usize>(header: &[&str; W], rows: &[[String; W]]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
