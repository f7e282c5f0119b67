//! Mesh-scale numerical integration.
//!
//! Elements are split into contiguous groups sized from a working-memory
//! budget. Groups run one after the other; inside a group every element is
//! integrated independently on a [`ComputeBackend`], each worker writing only
//! its own 36-value slot. Only the coordinates, connectivity and coefficients
//! touched by a group are staged to the backend.
//!
//! In [`Mode::Overlapped`] the integrator runs on its own thread and hands
//! finished groups to the consumer through a queue of depth one, so the
//! consumer (typically the assembler) works on group `g` while `g + 1` is
//! being computed. Results are identical in both modes.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::{self, ElementGeometry, ReferenceTables, PACKED_LEN};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Working memory per element: 36 output doubles, 8 four-byte node indices,
/// 8 nodes × 3 double coordinates and one double coefficient.
pub const BYTES_PER_ELEMENT: u64 = (PACKED_LEN * 8 + 8 * 4 + 8 * 3 * 8 + 8) as u64;

pub fn required_bytes(n_elements: usize) -> u64 {
    n_elements as u64 * BYTES_PER_ELEMENT
}

/// Contiguous, ascending, disjoint element ranges covering `0..n_el`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    ranges: Vec<Range<usize>>,
}

impl BatchPlan {
    pub fn single(n_elements: usize) -> Self {
        BatchPlan {
            ranges: std::iter::once(0..n_elements).collect(),
        }
    }

    /// Splits `0..n_elements` into `groups` chunks whose sizes differ by at
    /// most one, larger chunks first. `groups` is clamped to `n_elements`.
    pub fn with_groups(n_elements: usize, groups: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Config("cannot plan batches for an empty mesh".into()));
        }
        if groups == 0 {
            return Err(Error::Config("group count must be positive".into()));
        }
        let groups = groups.min(n_elements);
        let base = n_elements / groups;
        let extra = n_elements % groups;
        let mut ranges = Vec::with_capacity(groups);
        let mut start = 0;
        for g in 0..groups {
            let len = base + usize::from(g < extra);
            ranges.push(start..start + len);
            start += len;
        }
        Ok(BatchPlan { ranges })
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn group_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn n_elements(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    fn check_covers(&self, n_elements: usize) -> Result<()> {
        let mut next = 0;
        for r in &self.ranges {
            if r.start != next || r.end <= r.start {
                return Err(Error::Config(format!("batch plan range {r:?} is not contiguous")));
            }
            next = r.end;
        }
        if next != n_elements {
            return Err(Error::Config(format!(
                "batch plan covers {next} elements, mesh has {n_elements}"
            )));
        }
        Ok(())
    }
}

/// `ceil(mem_required / mem_available)` groups, at least one and at most one
/// per element.
pub fn plan_batches(mem_required: u64, mem_available: u64, n_elements: usize) -> Result<BatchPlan> {
    if mem_available == 0 {
        return Err(Error::Config("available memory must be positive".into()));
    }
    let groups = mem_required.div_ceil(mem_available).max(1);
    let groups = usize::try_from(groups).unwrap_or(usize::MAX);
    BatchPlan::with_groups(n_elements, groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Sequential,
    Overlapped,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Mode::Sequential => "sequential",
            Mode::Overlapped => "overlapped",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Mode::Sequential),
            "overlapped" => Ok(Mode::Overlapped),
            _ => Err(Error::Config(format!("unknown mode `{s}` (sequential|overlapped)"))),
        }
    }
}

/// The slice of the mesh one group needs: its elements, their coefficients
/// and the compacted set of nodes they reference.
#[derive(Debug, Clone)]
pub struct StagedGroup {
    pub index: usize,
    pub elements: Range<usize>,
    pub coords: Vec<Point>,
    /// Indices into `coords`.
    pub connectivity: Vec<[u32; 8]>,
    pub coefficient: Vec<f64>,
}

impl StagedGroup {
    pub fn stage(mesh: &Mesh, index: usize, elements: Range<usize>) -> Result<Self> {
        let mut local_of = vec![u32::MAX; mesh.n_nodes()];
        let mut coords = Vec::new();
        let mut connectivity = Vec::with_capacity(elements.len());
        for nodes in &mesh.connectivity()[elements.clone()] {
            let mut local = [0u32; 8];
            for (slot, &n) in local.iter_mut().zip(nodes) {
                if local_of[n] == u32::MAX {
                    local_of[n] = u32::try_from(coords.len()).map_err(|_| Error::Resource {
                        group: index,
                        required: u64::MAX,
                        capacity: u64::from(u32::MAX),
                    })?;
                    coords.push(mesh.coords()[n]);
                }
                *slot = local_of[n];
            }
            connectivity.push(local);
        }
        Ok(StagedGroup {
            index,
            coefficient: mesh.coefficient()[elements.clone()].to_vec(),
            elements,
            coords,
            connectivity,
        })
    }

    /// Bytes resident on the backend while this group runs, output included.
    pub fn bytes(&self) -> u64 {
        let n = self.connectivity.len() as u64;
        n * (PACKED_LEN as u64 * 8 + 8 * 4 + 8) + self.coords.len() as u64 * 24
    }

    pub fn geometry(&self, local_element: usize) -> ElementGeometry {
        let nodes = &self.connectivity[local_element];
        ElementGeometry::new(std::array::from_fn(|a| self.coords[nodes[a] as usize]))
    }
}

/// Something that evaluates element stiffness values for a staged group.
///
/// Each element's 36 values must depend on that element's data alone, so
/// output is independent of scheduling.
pub trait ComputeBackend: Sync {
    fn capacity_bytes(&self) -> u64;

    fn workers(&self) -> usize;

    /// Fills `out` (`36 × group size`, element-major). Degenerate elements
    /// are reported with their global element id; when several are present
    /// the lowest id wins.
    fn integrate_group(&self, group: &StagedGroup, tables: &ReferenceTables, out: &mut [f64]) -> Result<()>;
}

/// Data-parallel backend on host cores.
pub struct HostBackend {
    pool: rayon::ThreadPool,
    capacity_bytes: u64,
}

impl HostBackend {
    pub fn new(workers: usize, capacity_bytes: u64) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("worker count must be positive".into()));
        }
        if capacity_bytes == 0 {
            return Err(Error::Config("backend capacity must be positive".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("hexstiff-worker-{i}"))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(HostBackend { pool, capacity_bytes })
    }
}

impl fmt::Debug for HostBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HostBackend")
            .field("workers", &self.workers())
            .field("capacity_bytes", &self.capacity_bytes)
            .finish()
    }
}

impl ComputeBackend for HostBackend {
    fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn integrate_group(&self, group: &StagedGroup, tables: &ReferenceTables, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), group.connectivity.len() * PACKED_LEN);
        let first_failure = self.pool.install(|| {
            out.par_chunks_mut(PACKED_LEN)
                .enumerate()
                .filter_map(|(i, slot)| {
                    element::stiffness_into(&group.geometry(i), group.coefficient[i], tables, slot)
                        .err()
                        .map(|e| (i, e))
                })
                .min_by_key(|(i, _)| *i)
        });
        match first_failure {
            Some((i, e)) => Err(e.in_element(group.elements.start + i)),
            None => Ok(()),
        }
    }
}

/// Packed lower-triangular element values, element-major, in mesh order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalValuesBatch {
    values: Vec<f64>,
}

impl LocalValuesBatch {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(PACKED_LEN) {
            return Err(Error::Validation(format!(
                "{} values is not a whole number of elements",
                values.len()
            )));
        }
        Ok(LocalValuesBatch { values })
    }

    pub fn n_elements(&self) -> usize {
        self.values.len() / PACKED_LEN
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.values[e * PACKED_LEN..(e + 1) * PACKED_LEN]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A finished group handed to the consumer.
#[derive(Debug, Clone)]
pub struct GroupOutput {
    pub index: usize,
    pub elements: Range<usize>,
    pub values: Vec<f64>,
}

/// Time spent on each side of the producer/consumer hand-off.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    /// Staging plus backend time, summed over groups.
    pub integration: Duration,
    /// Time spent inside the consumer callback.
    pub consumer: Duration,
    pub wall: Duration,
    pub groups: usize,
}

fn run_group<B: ComputeBackend + ?Sized>(mesh: &Mesh, backend: &B, index: usize, elements: Range<usize>) -> Result<GroupOutput> {
    let staged = StagedGroup::stage(mesh, index, elements.clone())?;
    let required = staged.bytes();
    if required > backend.capacity_bytes() {
        return Err(Error::Resource {
            group: index,
            required,
            capacity: backend.capacity_bytes(),
        });
    }
    let mut values = vec![0.0; elements.len() * PACKED_LEN];
    backend.integrate_group(&staged, element::reference_tables(), &mut values)?;
    Ok(GroupOutput { index, elements, values })
}

/// Integrates every group of `plan` in order and passes each finished group
/// to `consumer`, inline ([`Mode::Sequential`]) or from a producer thread
/// through a bounded queue ([`Mode::Overlapped`]).
pub fn integrate_groups<B, F>(mesh: &Mesh, backend: &B, plan: &BatchPlan, mode: Mode, mut consumer: F) -> Result<IntegrationStats>
where
    B: ComputeBackend + ?Sized,
    F: FnMut(GroupOutput) -> Result<()>,
{
    plan.check_covers(mesh.n_elements())?;
    let wall = Instant::now();
    let mut stats = IntegrationStats {
        groups: plan.group_count(),
        ..Default::default()
    };

    match mode {
        Mode::Sequential => {
            for (g, range) in plan.ranges().iter().enumerate() {
                let t = Instant::now();
                let out = run_group(mesh, backend, g, range.clone())?;
                stats.integration += t.elapsed();
                let t = Instant::now();
                consumer(out)?;
                stats.consumer += t.elapsed();
            }
        }
        Mode::Overlapped => {
            let (tx, rx) = mpsc::sync_channel::<Result<GroupOutput>>(1);
            let produced = thread::scope(|scope| -> Result<Duration> {
                let producer = scope.spawn(move || {
                    let mut busy = Duration::ZERO;
                    for (g, range) in plan.ranges().iter().enumerate() {
                        let t = Instant::now();
                        let out = run_group(mesh, backend, g, range.clone());
                        busy += t.elapsed();
                        let failed = out.is_err();
                        // the receiver hangs up when the consumer fails
                        if tx.send(out).is_err() || failed {
                            break;
                        }
                    }
                    busy
                });

                let mut outcome = Ok(());
                for out in rx.iter() {
                    let t = Instant::now();
                    let r = out.and_then(&mut consumer);
                    stats.consumer += t.elapsed();
                    if r.is_err() {
                        outcome = r;
                        break;
                    }
                }
                drop(rx);
                let busy = producer.join().expect("integration producer panicked");
                outcome.map(|_| busy)
            })?;
            stats.integration = produced;
        }
    }

    stats.wall = wall.elapsed();
    Ok(stats)
}

/// Integrates every element and collects the values in mesh order.
pub fn integrate_all<B: ComputeBackend + ?Sized>(mesh: &Mesh, backend: &B, plan: &BatchPlan, mode: Mode) -> Result<LocalValuesBatch> {
    let mut values = Vec::with_capacity(mesh.n_elements() * PACKED_LEN);
    integrate_groups(mesh, backend, plan, mode, |out| {
        debug_assert_eq!(values.len(), out.elements.start * PACKED_LEN);
        values.extend_from_slice(&out.values);
        Ok(())
    })?;
    LocalValuesBatch::from_values(values)
}
