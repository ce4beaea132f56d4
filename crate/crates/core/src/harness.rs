//! Benchmark drivers and their CSV reports.
//!
//! Every report row is self-describing. Element-change, depth, storage and
//! fallback columns are deterministic for a fixed configuration and seed;
//! the `*_secs` and `*_fraction` columns are wall-clock measurements.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::locator::{Locator, LocatorKind};
use crate::mesh::{generate_random_delaunay, load_triangle_files, Triangulation};
use crate::quadtree::{Quadtree, DEFAULT_Q};
use crate::sl::{euler_feet, gaussian_initial, num_steps, sl_advect_with, SlConfig, TimeLevel, VectorField};
use crate::structured::StructuredGrid;
use crate::walk::{walk_storage_bytes, LocateStats, WalkStrategy};

/// Environment variable naming the default directory for CSV output.
pub const OUT_DIR_ENV: &str = "TRILOCATE_OUT_DIR";

/// `$TRILOCATE_OUT_DIR/<name>`, or `<name>` when the variable is unset.
pub fn default_output_path(name: &str) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(name),
        _ => PathBuf::from(name),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    /// `<base>.node` / `<base>.ele`.
    File(PathBuf),
    /// Structured Courant triangulation with `m` cells per side.
    Courant(usize),
    /// Random Delaunay mesh of `n_points` samples plus the domain corners.
    RandomDelaunay { n_points: usize, seed: u64 },
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSource::File(p) => write!(f, "file:{}", p.display()),
            MeshSource::Courant(m) => write!(f, "courant:{m}"),
            MeshSource::RandomDelaunay { n_points, seed } => write!(f, "delaunay:{n_points}:{seed}"),
        }
    }
}

/// A mesh ready for benchmarking, with the structured grid when the source
/// is a Courant triangulation.
#[derive(Clone, Debug)]
pub struct PreparedMesh {
    pub label: String,
    pub mesh: Triangulation,
    pub grid: Option<StructuredGrid>,
}

impl PreparedMesh {
    pub fn new(source: &MeshSource) -> Result<Self> {
        let label = source.to_string();
        match source {
            MeshSource::File(p) => Ok(PreparedMesh {
                label,
                mesh: load_triangle_files(p)?,
                grid: None,
            }),
            MeshSource::Courant(m) => {
                let grid = StructuredGrid::new(*m)?;
                Ok(PreparedMesh {
                    label,
                    mesh: grid.mesh().clone(),
                    grid: Some(grid),
                })
            }
            MeshSource::RandomDelaunay { n_points, seed } => Ok(PreparedMesh {
                label,
                mesh: generate_random_delaunay(*n_points, *seed)?,
                grid: None,
            }),
        }
    }

    pub fn from_mesh(label: impl Into<String>, mesh: Triangulation) -> Self {
        PreparedMesh {
            label: label.into(),
            mesh,
            grid: None,
        }
    }
}

/// Query workload for [`bench_locate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Workload {
    /// Euler feet of every node over `⌈T/Δt⌉` steps, `Δt = α Δx`.
    CharacteristicFeet,
    /// `N` points uniform in the mesh bounding box, one per node.
    RandomPoints,
    /// For each node, a point at distance `d` in a random direction.
    FixedDistance(f64),
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::CharacteristicFeet => f.write_str("feet"),
            Workload::RandomPoints => f.write_str("random"),
            Workload::FixedDistance(d) => write!(f, "distance:{d}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub locator: LocatorKind,
    /// Quadtree triangle budget.
    pub q: usize,
    pub c0: f64,
    pub c1: f64,
    /// Courant number `α`; `Δt = α Δx`.
    pub courant: f64,
    pub t_final: f64,
    pub workload: Workload,
    pub repetitions: usize,
    pub seed: u64,
    pub parallel: bool,
    pub time_level: TimeLevel,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            locator: LocatorKind::Walk(WalkStrategy::B),
            q: DEFAULT_Q,
            c0: 2.0 * PI,
            c1: 2.0 * PI,
            courant: 5.0,
            t_final: 1.0,
            workload: Workload::CharacteristicFeet,
            repetitions: 1,
            seed: 0,
            parallel: false,
            time_level: TimeLevel::Current,
        }
    }
}

impl BenchConfig {
    pub fn field(&self) -> VectorField {
        VectorField::Rotating { c0: self.c0, c1: self.c1 }
    }

    fn validate(&self, prepared: &PreparedMesh) -> Result<()> {
        if self.courant.is_nan() || self.courant < 0.0 {
            return Err(Error::Config(format!("Courant number must be >= 0, got {}", self.courant)));
        }
        if self.workload == Workload::CharacteristicFeet && self.courant == 0.0 {
            return Err(Error::Config("characteristic feet need a positive Courant number".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if let Workload::FixedDistance(d) = self.workload {
            if d.is_nan() || d < 0.0 {
                return Err(Error::Config(format!("distance must be >= 0, got {d}")));
            }
        }
        if self.locator == LocatorKind::Structured && prepared.grid.is_none() {
            return Err(Error::Config(
                "the structured locator needs a Courant mesh (--m), not an unstructured one".into(),
            ));
        }
        if self.parallel && self.locator == LocatorKind::Walk(WalkStrategy::C) {
            return Err(Error::Config("parallel location supports walk strategies A and B only".into()));
        }
        Ok(())
    }
}

/// Builds the locator named by `kind` on a prepared mesh.
pub fn build_locator(prepared: &PreparedMesh, kind: LocatorKind, q: usize, seed: u64, parallel: bool) -> Result<Locator> {
    match kind {
        LocatorKind::Quadtree => Ok(Locator::Quadtree(Quadtree::build(&prepared.mesh, q)?)),
        LocatorKind::Walk(s) => {
            let mut loc = Locator::walk(&prepared.mesh, s, seed)?;
            if let Locator::Walk { parallel: p, .. } = &mut loc {
                *p = parallel;
            }
            Ok(loc)
        }
        LocatorKind::Structured => prepared
            .grid
            .clone()
            .map(Locator::Structured)
            .ok_or_else(|| Error::Config("the structured locator needs a Courant mesh".into())),
    }
}

/// One row of a location benchmark.
#[derive(Clone, Debug, Serialize)]
pub struct LocateRow {
    pub mesh: String,
    pub n: usize,
    pub n_t: usize,
    pub locator: String,
    pub workload: String,
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub dt: f64,
    pub time_steps: usize,
    pub seed: u64,
    pub reps: usize,
    pub threads: usize,
    pub queries: u64,
    pub outside: u64,
    pub mean_element_changes: f64,
    pub max_element_changes: u32,
    pub fallbacks: u64,
    pub qt_depth: Option<usize>,
    pub qt_nodes: Option<usize>,
    pub qt_leaf_triangles: Option<usize>,
    pub qt_work_per_query: Option<f64>,
    pub locator_bytes: usize,
    pub mesh_bytes: usize,
    pub locate_secs_per_step: f64,
}

/// Result of [`bench_locate`]: the CSV row plus the raw counters.
#[derive(Clone, Debug)]
pub struct LocateReport {
    pub row: LocateRow,
    pub totals: LocateStats,
    pub per_step: Vec<LocateStats>,
}

impl LocateReport {
    /// Element changes summed over steps `from..`.
    pub fn element_changes_from(&self, from: usize) -> u64 {
        self.per_step.iter().skip(from).map(|s| s.element_changes).sum()
    }
}

/// Runs one location benchmark, building the mesh from its source.
pub fn bench_locate(source: &MeshSource, config: &BenchConfig) -> Result<LocateReport> {
    bench_locate_on(&PreparedMesh::new(source)?, config)
}

/// Runs one location benchmark on an already built mesh.
pub fn bench_locate_on(prepared: &PreparedMesh, config: &BenchConfig) -> Result<LocateReport> {
    config.validate(prepared)?;
    let mesh = &prepared.mesh;
    let dx = mesh.space_scale();
    let field = config.field();
    let (dt, steps) = match config.workload {
        Workload::CharacteristicFeet => {
            let dt = config.courant * dx;
            (dt, num_steps(config.t_final, dt))
        }
        _ => (0.0, 1),
    };
    let fixed_queries = match config.workload {
        Workload::RandomPoints => Some(random_points(mesh, config.seed)),
        Workload::FixedDistance(d) => Some(fixed_distance_points(mesh, d, config.seed)),
        Workload::CharacteristicFeet => None,
    };

    let mut per_step = Vec::new();
    let mut locate_secs = 0.0;
    let mut locator_bytes = 0;
    let mut threads = 1;
    let mut qt_info = None;
    for rep in 0..config.repetitions {
        let mut locator = build_locator(prepared, config.locator, config.q, config.seed, config.parallel)?;
        locator_bytes = locator.storage_bytes(mesh);
        threads = locator.threads();
        if let Locator::Quadtree(tree) = &locator {
            qt_info = Some((tree.depth(), tree.node_count(), tree.leaf_triangle_count()));
        }
        for n in 0..steps {
            let owned;
            let queries: &[Point2] = match &fixed_queries {
                Some(q) => q,
                None => {
                    owned = euler_feet(mesh, &field, n, dt, config.time_level);
                    &owned
                }
            };
            let start = Instant::now();
            let (_, stats) = locator.locate_all(mesh, queries)?;
            locate_secs += start.elapsed().as_secs_f64();
            if rep == 0 {
                per_step.push(stats);
            }
        }
    }

    let mut totals = LocateStats::default();
    for s in &per_step {
        totals.merge(s);
    }
    let mean_steps = per_step.iter().map(LocateStats::mean_element_changes).sum::<f64>() / per_step.len().max(1) as f64;
    let row = LocateRow {
        mesh: prepared.label.clone(),
        n: mesh.num_vertices(),
        n_t: mesh.num_triangles(),
        locator: config.locator.to_string(),
        workload: config.workload.to_string(),
        alpha: config.courant,
        c0: config.c0,
        c1: config.c1,
        dt,
        time_steps: steps,
        seed: config.seed,
        reps: config.repetitions,
        threads,
        queries: totals.queries,
        outside: totals.outside,
        mean_element_changes: mean_steps,
        max_element_changes: totals.max_element_changes,
        fallbacks: totals.fallbacks,
        qt_depth: qt_info.map(|q| q.0),
        qt_nodes: qt_info.map(|q| q.1),
        qt_leaf_triangles: qt_info.map(|q| q.2),
        qt_work_per_query: qt_info.map(|_| totals.work_per_query()),
        locator_bytes,
        mesh_bytes: mesh.storage_bytes(),
        locate_secs_per_step: locate_secs / (config.repetitions * steps).max(1) as f64,
    };
    Ok(LocateReport { row, totals, per_step })
}

/// `N` points uniform in the mesh bounding box.
pub fn random_points(mesh: &Triangulation, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed_0001));
    let b = mesh.bounding_box();
    (0..mesh.num_vertices())
        .map(|_| Point2::new(rng.gen_range(b.min.x..=b.max.x), rng.gen_range(b.min.y..=b.max.y)))
        .collect()
}

/// For each node, the point at distance `d` in a uniformly random direction.
pub fn fixed_distance_points(mesh: &Triangulation, d: f64, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed_0002));
    mesh.vertices()
        .iter()
        .map(|&x| {
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            Point2::new(x.x + d * phi.cos(), x.y + d * phi.sin())
        })
        .collect()
}

/// Storage comparison for one mesh.
#[derive(Clone, Debug, Serialize)]
pub struct StorageRow {
    pub mesh: String,
    pub n: usize,
    pub n_t: usize,
    pub q: usize,
    pub qt_depth: usize,
    pub qt_nodes: usize,
    pub qt_leaf_triangles: usize,
    pub qt_bytes: usize,
    pub walk_ab_bytes: usize,
    pub walk_c_bytes: usize,
    pub mesh_bytes: usize,
    /// Quadtree over walk (A/B), locator structures only.
    pub ratio_locator: f64,
    /// Same ratio with the shared mesh arrays added to both sides.
    pub ratio_with_mesh: f64,
}

pub fn storage_row(prepared: &PreparedMesh, q: usize) -> Result<StorageRow> {
    let mesh = &prepared.mesh;
    let tree = Quadtree::build(mesh, q)?;
    let qt_bytes = tree.storage_bytes();
    let walk_ab_bytes = walk_storage_bytes(mesh, WalkStrategy::B);
    let walk_c_bytes = walk_storage_bytes(mesh, WalkStrategy::C);
    let mesh_bytes = mesh.storage_bytes();
    Ok(StorageRow {
        mesh: prepared.label.clone(),
        n: mesh.num_vertices(),
        n_t: mesh.num_triangles(),
        q,
        qt_depth: tree.depth(),
        qt_nodes: tree.node_count(),
        qt_leaf_triangles: tree.leaf_triangle_count(),
        qt_bytes,
        walk_ab_bytes,
        walk_c_bytes,
        mesh_bytes,
        ratio_locator: qt_bytes as f64 / walk_ab_bytes as f64,
        ratio_with_mesh: (qt_bytes + mesh_bytes) as f64 / (walk_ab_bytes + mesh_bytes) as f64,
    })
}

/// Storage rows over a sweep of at least three meshes.
pub fn bench_storage(sources: &[MeshSource], q: usize) -> Result<Vec<StorageRow>> {
    if sources.len() < 3 {
        return Err(Error::Config(format!(
            "a storage sweep needs at least 3 meshes, got {}",
            sources.len()
        )));
    }
    sources.iter().map(|s| storage_row(&PreparedMesh::new(s)?, q)).collect()
}

/// Semi-Lagrangian run profile for one locator.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub mesh: String,
    pub n: usize,
    pub locator: String,
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub dt: f64,
    pub time_steps: usize,
    pub reps: usize,
    pub threads: usize,
    pub mean_element_changes: f64,
    pub fallbacks: u64,
    pub outside: u64,
    pub query_secs: f64,
    pub locate_secs: f64,
    pub interp_secs: f64,
    /// Mean over repetitions of the point-location share of step time.
    pub locate_fraction: f64,
    pub locate_fraction_min: f64,
    pub locate_fraction_max: f64,
}

/// Runs the advection scheme with each locator, `config.repetitions` times,
/// interleaving locators within each repetition.
pub fn bench_sl_profile(prepared: &PreparedMesh, config: &BenchConfig, locators: &[LocatorKind]) -> Result<Vec<ProfileRow>> {
    if locators.is_empty() {
        return Err(Error::Config("no locator requested".into()));
    }
    for &kind in locators {
        BenchConfig {
            locator: kind,
            workload: Workload::CharacteristicFeet,
            ..config.clone()
        }
        .validate(prepared)?;
    }
    let mesh = &prepared.mesh;
    let field = config.field();
    let dt = config.courant * mesh.space_scale();
    let sl = SlConfig {
        dt,
        t_final: config.t_final,
        time_level: config.time_level,
    };
    let u0 = gaussian_initial(mesh);

    struct Acc {
        fractions: Vec<f64>,
        query: f64,
        locate: f64,
        interp: f64,
        mean_steps: f64,
        fallbacks: u64,
        outside: u64,
        threads: usize,
    }
    let mut acc: Vec<Acc> = locators
        .iter()
        .map(|_| Acc {
            fractions: Vec::new(),
            query: 0.0,
            locate: 0.0,
            interp: 0.0,
            mean_steps: 0.0,
            fallbacks: 0,
            outside: 0,
            threads: 1,
        })
        .collect();
    for _ in 0..config.repetitions {
        for (k, &kind) in locators.iter().enumerate() {
            let mut locator = build_locator(prepared, kind, config.q, config.seed, config.parallel)?;
            let (_, profile) = sl_advect_with(mesh, &mut locator, &field, &u0, &sl, |_, _, _| {})?;
            let a = &mut acc[k];
            a.fractions.push(profile.locate_fraction());
            a.query += profile.query.as_secs_f64();
            a.locate += profile.locate.as_secs_f64();
            a.interp += profile.interp.as_secs_f64();
            let totals = profile.totals();
            a.mean_steps = profile.mean_element_changes();
            a.fallbacks = totals.fallbacks;
            a.outside = totals.outside;
            a.threads = locator.threads();
        }
    }
    let reps = config.repetitions as f64;
    Ok(locators
        .iter()
        .zip(acc)
        .map(|(kind, a)| ProfileRow {
            mesh: prepared.label.clone(),
            n: mesh.num_vertices(),
            locator: kind.to_string(),
            alpha: config.courant,
            c0: config.c0,
            c1: config.c1,
            dt,
            time_steps: sl.num_steps(),
            reps: config.repetitions,
            threads: a.threads,
            mean_element_changes: a.mean_steps,
            fallbacks: a.fallbacks,
            outside: a.outside,
            query_secs: a.query / reps,
            locate_secs: a.locate / reps,
            interp_secs: a.interp / reps,
            locate_fraction: a.fractions.iter().sum::<f64>() / reps,
            locate_fraction_min: a.fractions.iter().copied().fold(f64::INFINITY, f64::min),
            locate_fraction_max: a.fractions.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect())
}

/// Writes rows with a header line to `path`, creating parent directories.
pub fn write_csv<R: Serialize>(rows: &[R], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Concatenates CSV reports. The output header is the union of the input
/// headers in first-seen order; missing cells are left empty.
pub fn merge_csv(inputs: &[PathBuf], output: impl AsRef<Path>) -> Result<usize> {
    let mut header: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut tables = Vec::with_capacity(inputs.len());
    for path in inputs {
        let mut r = csv::Reader::from_path(path)?;
        let cols: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        for c in &cols {
            if !index.contains_key(c) {
                index.insert(c.clone(), header.len());
                header.push(c.clone());
            }
        }
        let records: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
        tables.push((cols, records));
    }
    let output = output.as_ref();
    let mut w = csv::Writer::from_path(output)?;
    w.write_record(&header)?;
    let mut rows = 0;
    for (cols, records) in tables {
        for rec in records {
            let mut out = vec![String::new(); header.len()];
            for (c, v) in cols.iter().zip(rec.iter()) {
                out[index[c]] = v.to_owned();
            }
            w.write_record(&out)?;
            rows += 1;
        }
    }
    w.flush().map_err(|e| Error::io(output, e))?;
    Ok(rows)
}
