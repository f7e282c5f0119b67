//! End-to-end matrix construction with stage timing, and the benchmark
//! table built on top of it.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::assemble::{self, compression_ratio, DirectAssembler, LowerCscMatrix, TripletBuilder};
use crate::element::PACKED_LEN;
use crate::error::{Error, Result};
use crate::integrate::{self, integrate_groups, ComputeBackend, required_bytes, HostBackend, LocalValuesBatch, Mode};
use crate::mesh::{generate_cube_mesh, Mesh, StructuredGridSpec};
use crate::sparseio::{self, format_mb, format_percent};

/// Default working-memory budget: a 2 GB device.
pub const DEFAULT_BUDGET_BYTES: u64 = 2_048_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assembler {
    /// Index arrays first, then triplet → CSC conversion.
    #[default]
    Triplet,
    /// Scatter into a pattern derived from the connectivity.
    Direct,
}

impl fmt::Display for Assembler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Assembler::Triplet => "triplet",
            Assembler::Direct => "direct",
        })
    }
}

impl FromStr for Assembler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triplet" => Ok(Assembler::Triplet),
            "direct" => Ok(Assembler::Direct),
            _ => Err(Error::Config(format!("unknown assembler `{s}` (direct|triplet)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub budget_bytes: u64,
    pub workers: usize,
    pub mode: Mode,
    pub assembler: Assembler,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            budget_bytes: DEFAULT_BUDGET_BYTES,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            mode: Mode::Sequential,
            assembler: Assembler::Triplet,
        }
    }
}

impl BuildConfig {
    /// Budget given in MB (10⁶ bytes); fractions allowed.
    pub fn with_budget_mb(mut self, mb: f64) -> Result<Self> {
        if !(mb > 0.0 && mb.is_finite()) {
            return Err(Error::Config(format!("memory budget must be positive, got {mb} MB")));
        }
        self.budget_bytes = (mb * 1e6).round().max(1.0) as u64;
        Ok(self)
    }
}

/// Sizes, memory figures and stage timings of one build. Percentages are in
/// percent; times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub n_el: usize,
    pub n_nodes: usize,
    pub dim: usize,
    pub nnz_triplet: u64,
    pub nnz_csc: u64,
    pub nnz_compression: f64,
    pub triplet_mb: f64,
    pub csc_mb: f64,
    pub memory_saving: f64,
    pub time_integration_s: f64,
    /// Index-array generation, part of `time_assembly_s`; triplet path only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_index_s: Option<f64>,
    pub time_assembly_s: f64,
    pub time_total_s: f64,
    pub pct_integration: f64,
    pub pct_assembly: f64,
    pub group_count: usize,
    pub workers: usize,
    pub mode: Mode,
    pub assembler: Assembler,
}

impl BuildReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

#[derive(Debug, Default)]
struct Timings {
    integration: Duration,
    index: Option<Duration>,
    assembly: Duration,
    total: Duration,
}

/// Builds the global lower-triangular matrix of `mesh`: plan batches,
/// integrate, then assemble with the configured strategy.
pub fn build_matrix(mesh: &Mesh, config: &BuildConfig) -> Result<(LowerCscMatrix, BuildReport)> {
    let n_el = mesh.n_elements();
    let backend = HostBackend::new(config.workers, config.budget_bytes)?;
    let plan = integrate::plan_batches(required_bytes(n_el), config.budget_bytes, n_el)?;

    let mut t = Timings::default();
    let matrix = match (config.mode, config.assembler) {
        (Mode::Sequential, assembler) => {
            let start = Instant::now();
            let values = integrate::integrate_all(mesh, &backend, &plan, Mode::Sequential)?;
            t.integration = start.elapsed();
            let start = Instant::now();
            let matrix = match assembler {
                Assembler::Triplet => {
                    let triplet = assemble::build_triplet(mesh, &values)?;
                    t.index = Some(start.elapsed());
                    drop(values);
                    assemble::triplet_to_csc(&triplet)
                }
                Assembler::Direct => assemble::assemble_direct(mesh, &values)?,
            };
            t.assembly = start.elapsed();
            t.total = t.integration + t.assembly;
            matrix
        }
        (Mode::Overlapped, Assembler::Triplet) => {
            let start = Instant::now();
            let mut builder = TripletBuilder::new(mesh)?;
            let stats = integrate_groups(mesh, &backend, &plan, Mode::Overlapped, |out| {
                builder.push(out.elements, &out.values)
            })?;
            let triplet = builder.finish()?;
            let convert = Instant::now();
            let matrix = assemble::triplet_to_csc(&triplet);
            t.integration = stats.integration;
            t.index = Some(stats.consumer);
            t.assembly = stats.consumer + convert.elapsed();
            t.total = start.elapsed();
            matrix
        }
        (Mode::Overlapped, Assembler::Direct) => {
            let start = Instant::now();
            let mut asm = DirectAssembler::new(mesh);
            let symbolic = start.elapsed();
            let stats = integrate_groups(mesh, &backend, &plan, Mode::Overlapped, |out| {
                asm.accumulate(out.elements, &out.values)
            })?;
            let matrix = asm.finish()?;
            t.integration = stats.integration;
            t.assembly = symbolic + stats.consumer;
            t.total = start.elapsed();
            matrix
        }
    };

    let report = make_report(mesh, &matrix, &t, plan.group_count(), backend.workers(), config);
    Ok((matrix, report))
}

fn make_report(mesh: &Mesh, m: &LowerCscMatrix, t: &Timings, group_count: usize, workers: usize, config: &BuildConfig) -> BuildReport {
    let nnz_triplet = (mesh.n_elements() * PACKED_LEN) as u64;
    let nnz_csc = m.nnz() as u64;
    let triplet_mb = sparseio::triplet_memory(nnz_triplet);
    let csc_mb = sparseio::csc_memory(nnz_csc, m.dim() as u64);
    let saving = sparseio::memory_saving(triplet_mb, csc_mb).unwrap_or(0.0);
    let ti = t.integration.as_secs_f64();
    let ta = t.assembly.as_secs_f64();
    let (pct_integration, pct_assembly) = split_percent(ti, ta);
    BuildReport {
        n_el: mesh.n_elements(),
        n_nodes: mesh.n_nodes(),
        dim: m.dim(),
        nnz_triplet,
        nnz_csc,
        nnz_compression: 100.0 * compression_ratio(nnz_triplet as usize, nnz_csc as usize),
        triplet_mb,
        csc_mb,
        memory_saving: 100.0 * saving,
        time_integration_s: ti,
        time_index_s: t.index.map(|d| d.as_secs_f64()),
        time_assembly_s: ta,
        time_total_s: t.total.as_secs_f64(),
        pct_integration,
        pct_assembly,
        group_count,
        workers,
        mode: config.mode,
        assembler: config.assembler,
    }
}

/// Shares of integration and assembly in their sum, in percent.
fn split_percent(integration: f64, assembly: f64) -> (f64, f64) {
    let sum = integration + assembly;
    if sum > 0.0 {
        let pi = 100.0 * integration / sum;
        (pi, 100.0 - pi)
    } else {
        (50.0, 50.0)
    }
}

/// One row of the benchmark table; time columns are medians over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub n_el: usize,
    pub dim: usize,
    pub nnz_triplet: u64,
    pub nnz_csc: u64,
    pub nnz_compression: f64,
    pub triplet_mb: f64,
    pub csc_mb: f64,
    pub memory_saving: f64,
    pub time_integration_s: f64,
    pub time_assembly_s: f64,
    pub time_total_s: f64,
    pub pct_integration: f64,
    pub pct_assembly: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Builds an `n³` unit cube for every size, `repeat` times each.
pub fn run_bench(sizes: &[usize], repeat: usize, config: &BuildConfig) -> Result<Vec<BenchRow>> {
    if repeat == 0 {
        return Err(Error::Config("repeat count must be positive".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mesh = generate_cube_mesh(&StructuredGridSpec::cube(n))?;
        let mut reports = Vec::with_capacity(repeat);
        for _ in 0..repeat {
            reports.push(build_matrix(&mesh, config)?.1);
        }
        let first = reports[0].clone();
        let ti = median(reports.iter().map(|r| r.time_integration_s).collect());
        let ta = median(reports.iter().map(|r| r.time_assembly_s).collect());
        let total = median(reports.iter().map(|r| r.time_total_s).collect());
        let (pct_integration, pct_assembly) = split_percent(ti, ta);
        rows.push(BenchRow {
            n,
            n_el: first.n_el,
            dim: first.dim,
            nnz_triplet: first.nnz_triplet,
            nnz_csc: first.nnz_csc,
            nnz_compression: first.nnz_compression,
            triplet_mb: first.triplet_mb,
            csc_mb: first.csc_mb,
            memory_saving: first.memory_saving,
            time_integration_s: ti,
            time_assembly_s: ta,
            time_total_s: total,
            pct_integration,
            pct_assembly,
        });
    }
    Ok(rows)
}

/// Renders bench rows as an aligned text table with a header line.
pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let header = [
        "FEs", "matrix size", "NNZ triplet", "NNZ CSC", "compr %", "triplet MB", "CSC MB", "saving %", "MatGen s",
        "NI %", "assembly %",
    ];
    let body: Vec<[String; 11]> = rows
        .iter()
        .map(|r| {
            [
                r.n_el.to_string(),
                r.dim.to_string(),
                r.nnz_triplet.to_string(),
                r.nnz_csc.to_string(),
                format_percent(r.nnz_compression / 100.0),
                format_mb(r.triplet_mb),
                format_mb(r.csc_mb),
                format_percent(r.memory_saving / 100.0),
                format!("{:.3}", r.time_total_s),
                format!("{:.1}", r.pct_integration),
                format!("{:.1}", r.pct_assembly),
            ]
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|i| body.iter().map(|row| row[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: &mut dyn Iterator<Item = &str>, out: &mut String| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut header.iter().copied(), &mut out);
    for row in &body {
        line(&mut row.iter().map(String::as_str), &mut out);
    }
    out
}

/// Integrates without assembling, for throughput measurements.
pub fn integrate_only(mesh: &Mesh, workers: usize, budget_bytes: u64) -> Result<(LocalValuesBatch, Duration)> {
    let backend = HostBackend::new(workers, budget_bytes)?;
    let plan = integrate::plan_batches(required_bytes(mesh.n_elements()), budget_bytes, mesh.n_elements())?;
    let start = Instant::now();
    let values = integrate::integrate_all(mesh, &backend, &plan, Mode::Sequential)?;
    Ok((values, start.elapsed()))
}
