use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use trilocate::harness::{
    self, bench_locate_on, bench_sl_profile, default_output_path, merge_csv, storage_row, write_csv, BenchConfig,
    MeshSource, PreparedMesh, Workload,
};
use trilocate::mesh::write_triangle_files;
use trilocate::sl::{gaussian_initial, write_snapshots, write_step_records};
use trilocate::{sl_advect, LocatorKind, SlConfig, TimeLevel, WalkStrategy, DEFAULT_Q};

/// Point location in triangulations and semi-Lagrangian advection benchmarks.
#[derive(Parser)]
#[command(name = "trilocate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Courant or random Delaunay mesh as .node/.ele files.
    GenMesh {
        #[command(flatten)]
        mesh: GenSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output base path; `<base>.node` and `<base>.ele` are written.
        #[arg(long = "csv", visible_alias = "out")]
        out: PathBuf,
    },
    /// Check a mesh's orientation, neighbor table and connectivity.
    Validate {
        /// Mesh base path (`<base>.node`, `<base>.ele`).
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Time point location for one locator and workload.
    BenchLocate {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value = "walk-b")]
        locator: LocatorKind,
        #[command(flatten)]
        run: RunArgs,
        /// Locate, for each node, a point at this distance in a random direction.
        #[arg(long, conflicts_with = "random_points")]
        distance: Option<f64>,
        /// Locate one uniform random point per node.
        #[arg(long)]
        random_points: bool,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Output CSV (default: bench-locate.csv in $TRILOCATE_OUT_DIR).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare quadtree and walk storage over a sweep of meshes.
    BenchStorage {
        /// Courant mesh sizes.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        m: Vec<usize>,
        /// Random Delaunay sample counts.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n_points: Vec<usize>,
        /// Mesh base paths.
        #[arg(long, num_args = 1..)]
        mesh: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_Q)]
        q: usize,
        /// Output CSV (default: bench-storage.csv in $TRILOCATE_OUT_DIR).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Share of semi-Lagrangian step time spent in point location, per locator.
    BenchProfile {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Locators to compare (default: quadtree and the three walks).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        locator: Vec<LocatorKind>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Output CSV (default: bench-profile.csv in $TRILOCATE_OUT_DIR).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the semi-Lagrangian scheme with a Gaussian initial condition.
    SlRun {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value = "walk-b")]
        locator: LocatorKind,
        #[command(flatten)]
        run: RunArgs,
        /// Keep every k-th state in the snapshot file (0: initial and final only).
        #[arg(long, default_value_t = 0)]
        snapshot_every: usize,
        /// Snapshot CSV with one row per node and kept state.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Per-step CSV (default: sl-steps.csv in $TRILOCATE_OUT_DIR).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Merge CSV reports into one file with the union of their columns.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GenSource {
    /// Courant mesh with M cells per side.
    #[arg(long)]
    m: Option<usize>,
    /// Random Delaunay mesh with this many samples plus the four corners.
    #[arg(long)]
    n_points: Option<usize>,
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh base path (`<base>.node`, `<base>.ele`).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Courant mesh with M cells per side.
    #[arg(long)]
    m: Option<usize>,
    /// Random Delaunay mesh with this many samples plus the four corners.
    #[arg(long)]
    n_points: Option<usize>,
    /// Seed for mesh generation, starting triangles and random workloads.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MeshArgs {
    fn source(&self) -> Result<MeshSource> {
        Ok(match (&self.mesh, self.m, self.n_points) {
            (Some(p), None, None) => MeshSource::File(p.clone()),
            (None, Some(m), None) => MeshSource::Courant(m),
            (None, None, Some(n)) => MeshSource::RandomDelaunay {
                n_points: n,
                seed: self.seed,
            },
            _ => bail!("exactly one of --mesh, --m or --n-points is required"),
        })
    }

    fn prepare(&self) -> Result<PreparedMesh> {
        let source = self.source()?;
        PreparedMesh::new(&source).with_context(|| format!("cannot prepare mesh {source}"))
    }
}

#[derive(Args)]
struct RunArgs {
    /// Quadtree triangle budget per vertex-free leaf.
    #[arg(long, default_value_t = DEFAULT_Q)]
    q: usize,
    /// Spatial frequency of the rotating field.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    c0: f64,
    /// Temporal frequency of the rotating field.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    c1: f64,
    /// Courant number: the time step is this multiple of the space scale.
    #[arg(long, default_value_t = 5.0)]
    courant: f64,
    #[arg(long, default_value_t = 1.0)]
    t_final: f64,
    /// Evaluate the field at t_{n+1} instead of t_n when computing feet.
    #[arg(long)]
    next_time_level: bool,
    /// Locate in parallel (walk strategies A and B only).
    #[arg(long)]
    parallel: bool,
}

impl RunArgs {
    fn config(&self, locator: LocatorKind, seed: u64) -> BenchConfig {
        BenchConfig {
            locator,
            q: self.q,
            c0: self.c0,
            c1: self.c1,
            courant: self.courant,
            t_final: self.t_final,
            seed,
            parallel: self.parallel,
            time_level: if self.next_time_level {
                TimeLevel::Next
            } else {
                TimeLevel::Current
            },
            ..Default::default()
        }
    }
}

fn output(csv: Option<PathBuf>, default: &str) -> PathBuf {
    csv.unwrap_or_else(|| default_output_path(default))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMesh { mesh, seed, out } => {
            let source = match (mesh.m, mesh.n_points) {
                (Some(m), _) => MeshSource::Courant(m),
                (_, Some(n)) => MeshSource::RandomDelaunay { n_points: n, seed },
                _ => unreachable!("clap enforces one source"),
            };
            let prepared = PreparedMesh::new(&source)?;
            write_triangle_files(&prepared.mesh, &out)?;
            println!(
                "wrote {}.node and {}.ele: {} nodes, {} triangles",
                out.display(),
                out.display(),
                prepared.mesh.num_vertices(),
                prepared.mesh.num_triangles()
            );
        }
        Command::Validate { mesh } => {
            let m = trilocate::load_triangle_files(&mesh)?;
            let report = m.validate();
            if !report.is_valid() {
                bail!("{} is not a valid triangulation:\n{report}", mesh.display());
            }
            let connectivity = match trilocate::mesh::build_spanning_tree(&m) {
                Ok(_) => "connected".to_string(),
                Err(e) => format!("{e}; walk strategy C is unavailable"),
            };
            println!(
                "{}: valid, {} nodes, {} triangles, {connectivity}",
                mesh.display(),
                m.num_vertices(),
                m.num_triangles()
            );
        }
        Command::BenchLocate {
            mesh,
            locator,
            run,
            distance,
            random_points,
            reps,
            csv,
        } => {
            let prepared = mesh.prepare()?;
            let mut cfg = run.config(locator, mesh.seed);
            cfg.repetitions = reps;
            cfg.workload = match (distance, random_points) {
                (Some(d), _) => Workload::FixedDistance(d),
                (None, true) => Workload::RandomPoints,
                (None, false) => Workload::CharacteristicFeet,
            };
            let report = bench_locate_on(&prepared, &cfg)?;
            let path = output(csv, "bench-locate.csv");
            write_csv(std::slice::from_ref(&report.row), &path)?;
            let r = &report.row;
            println!(
                "{} on {} (N = {}): {} queries, mean element changes {:.3}, {} outside, {} fallbacks, {:.3e} s per step",
                r.locator, r.mesh, r.n, r.queries, r.mean_element_changes, r.outside, r.fallbacks, r.locate_secs_per_step
            );
            info!("report written to {}", path.display());
        }
        Command::BenchStorage {
            m,
            n_points,
            mesh,
            seed,
            q,
            csv,
        } => {
            let sources: Vec<MeshSource> = m
                .into_iter()
                .map(MeshSource::Courant)
                .chain(n_points.into_iter().map(|n| MeshSource::RandomDelaunay { n_points: n, seed }))
                .chain(mesh.into_iter().map(MeshSource::File))
                .collect();
            if sources.len() < 3 {
                bail!("a storage sweep needs at least 3 meshes (use --m, --n-points or --mesh lists)");
            }
            let mut rows = Vec::with_capacity(sources.len());
            for s in &sources {
                let row = storage_row(&PreparedMesh::new(s)?, q)?;
                println!(
                    "{}: N = {}, quadtree {} B ({} nodes, {} leaf indices), walk {} B, ratio {:.2}",
                    row.mesh, row.n, row.qt_bytes, row.qt_nodes, row.qt_leaf_triangles, row.walk_ab_bytes, row.ratio_locator
                );
                rows.push(row);
            }
            write_csv(&rows, output(csv, "bench-storage.csv"))?;
        }
        Command::BenchProfile {
            mesh,
            locator,
            run,
            reps,
            csv,
        } => {
            let prepared = mesh.prepare()?;
            let kinds = if locator.is_empty() {
                vec![
                    LocatorKind::Quadtree,
                    LocatorKind::Walk(WalkStrategy::A),
                    LocatorKind::Walk(WalkStrategy::B),
                    LocatorKind::Walk(WalkStrategy::C),
                ]
            } else {
                locator
            };
            let mut cfg = run.config(kinds[0], mesh.seed);
            cfg.repetitions = reps;
            let rows = bench_sl_profile(&prepared, &cfg, &kinds)?;
            for r in &rows {
                println!(
                    "{}: point location {:.1}% of step time (min {:.1}%, max {:.1}%), mean element changes {:.3}",
                    r.locator,
                    100.0 * r.locate_fraction,
                    100.0 * r.locate_fraction_min,
                    100.0 * r.locate_fraction_max,
                    r.mean_element_changes
                );
            }
            write_csv(&rows, output(csv, "bench-profile.csv"))?;
        }
        Command::SlRun {
            mesh,
            locator,
            run,
            snapshot_every,
            snapshots,
            csv,
        } => {
            let prepared = mesh.prepare()?;
            let cfg = run.config(locator, mesh.seed);
            let mut loc = harness::build_locator(&prepared, locator, cfg.q, cfg.seed, cfg.parallel)?;
            if cfg.courant <= 0.0 {
                bail!("--courant must be positive for a semi-Lagrangian run");
            }
            let sl = SlConfig {
                dt: cfg.courant * prepared.mesh.space_scale(),
                t_final: cfg.t_final,
                time_level: cfg.time_level,
            };
            let u0 = gaussian_initial(&prepared.mesh);
            let out = sl_advect(&prepared.mesh, &mut loc, &cfg.field(), &u0, &sl, snapshot_every)?;
            let path = output(csv, "sl-steps.csv");
            write_step_records(&out.profile.steps, create(&path)?)?;
            if let Some(p) = snapshots {
                let mut states = out.states.clone();
                if states.last().map(|s| s.time_index) != Some(out.final_state.time_index) {
                    states.push(out.final_state.clone());
                }
                write_snapshots(&prepared.mesh, &states, create(&p)?)?;
            }
            let totals = out.profile.totals();
            println!(
                "{} steps of dt = {:.4e} with {}: element changes {} (after step 1: {}), {} outside, {} fallbacks, \
                 point location {:.1}% of step time",
                out.profile.steps.len(),
                sl.dt,
                locator,
                totals.element_changes,
                out.profile.element_changes_from(1),
                totals.outside,
                totals.fallbacks,
                100.0 * out.profile.locate_fraction()
            );
        }
        Command::Report { inputs, csv } => {
            let rows = merge_csv(&inputs, &csv)?;
            println!("merged {rows} rows from {} files into {}", inputs.len(), csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
