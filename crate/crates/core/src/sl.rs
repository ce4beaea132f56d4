//! Basic semi-Lagrangian advection: backward Euler tracking of the
//! characteristic feet, point location, and P1 interpolation.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::locator::Locator;
use crate::mesh::Triangulation;
use crate::walk::{LocateStats, LocationResult};

pub type FieldFn = dyn Fn(Point2, f64) -> Point2 + Send + Sync;

/// Advecting velocity field `f(x, t)`.
#[derive(Clone)]
pub enum VectorField {
    /// `(cos(c0‖x‖ + c1 t), sin(c0‖x‖ + c1 t))`; unit norm, Lipschitz
    /// constants `L_x = c0` and `L_t = c1`.
    Rotating { c0: f64, c1: f64 },
    Constant(Point2),
    Zero,
    Custom {
        f: Arc<FieldFn>,
        lipschitz_x: f64,
        lipschitz_t: f64,
    },
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Rotating { c0, c1 } => write!(f, "Rotating {{ c0: {c0}, c1: {c1} }}"),
            VectorField::Constant(v) => write!(f, "Constant({v:?})"),
            VectorField::Zero => f.write_str("Zero"),
            VectorField::Custom { lipschitz_x, lipschitz_t, .. } => {
                write!(f, "Custom {{ lipschitz_x: {lipschitz_x}, lipschitz_t: {lipschitz_t} }}")
            }
        }
    }
}

impl VectorField {
    #[inline]
    pub fn eval(&self, x: Point2, t: f64) -> Point2 {
        match self {
            VectorField::Rotating { c0, c1 } => {
                let phase = c0 * x.norm() + c1 * t;
                Point2::new(phase.cos(), phase.sin())
            }
            VectorField::Constant(v) => *v,
            VectorField::Zero => Point2::default(),
            VectorField::Custom { f, .. } => f(x, t),
        }
    }

    pub fn lipschitz_x(&self) -> f64 {
        match self {
            VectorField::Rotating { c0, .. } => c0.abs(),
            VectorField::Constant(_) | VectorField::Zero => 0.0,
            VectorField::Custom { lipschitz_x, .. } => *lipschitz_x,
        }
    }

    pub fn lipschitz_t(&self) -> f64 {
        match self {
            VectorField::Rotating { c1, .. } => c1.abs(),
            VectorField::Constant(_) | VectorField::Zero => 0.0,
            VectorField::Custom { lipschitz_t, .. } => *lipschitz_t,
        }
    }

    /// Field speed used in the Courant number, where it is uniform.
    pub fn speed(&self) -> Option<f64> {
        match self {
            VectorField::Rotating { .. } => Some(1.0),
            VectorField::Constant(v) => Some(v.norm()),
            VectorField::Zero => Some(0.0),
            VectorField::Custom { .. } => None,
        }
    }
}

/// Time at which the field is sampled when tracking from `t_{n+1}` back to
/// `t_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimeLevel {
    /// `f(x_i, t_n)`.
    #[default]
    Current,
    /// `f(x_i, t_{n+1})`.
    Next,
}

/// Feet `x_i − Δt f(x_i, t)` of the characteristics through every node.
pub fn euler_feet(mesh: &Triangulation, field: &VectorField, n: usize, dt: f64, level: TimeLevel) -> Vec<Point2> {
    let t = match level {
        TimeLevel::Current => n as f64 * dt,
        TimeLevel::Next => (n + 1) as f64 * dt,
    };
    mesh.vertices()
        .iter()
        .map(|&x| {
            let v = field.eval(x, t);
            Point2::new(x.x - dt * v.x, x.y - dt * v.y)
        })
        .collect()
}

/// P1 interpolation of node values at a located point.
///
/// Weights are clamped to `[0, 1]` and the result to the range of the three
/// vertex values, so the update never leaves the hull of its inputs.
#[inline]
pub fn p1_interpolate(values: &[f64], loc: &LocationResult, mesh: &Triangulation) -> Result<f64> {
    if !loc.is_inside() {
        return Err(Error::OutsideQuery);
    }
    let [i1, i2, i3] = mesh.triangles()[loc.triangle];
    let [t1, t2, t3] = loc.coords.clamped();
    let (v1, v2, v3) = (values[i1], values[i2], values[i3]);
    let v = t1 * v1 + t2 * v2 + t3 * v3;
    Ok(v.clamp(v1.min(v2).min(v3), v1.max(v2).max(v3)))
}

/// `exp(−‖x‖² / 2σ²)`.
pub fn gaussian(x: Point2, sigma: f64) -> f64 {
    (-(x.x * x.x + x.y * x.y) / (2.0 * sigma * sigma)).exp()
}

pub const DEFAULT_SIGMA: f64 = 0.1;

/// Node samples of the default Gaussian initial datum.
pub fn gaussian_initial(mesh: &Triangulation) -> Vec<f64> {
    mesh.vertices().iter().map(|&x| gaussian(x, DEFAULT_SIGMA)).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct SlConfig {
    pub dt: f64,
    pub t_final: f64,
    pub time_level: TimeLevel,
}

impl SlConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        SlConfig {
            dt,
            t_final,
            time_level: TimeLevel::Current,
        }
    }

    /// `⌈T / Δt⌉`, ignoring round-off just above an integer.
    pub fn num_steps(&self) -> usize {
        num_steps(self.t_final, self.dt)
    }
}

pub(crate) fn num_steps(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let r = ratio.round();
    if (ratio - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Node values at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct SLState {
    pub values: Vec<f64>,
    pub time_index: usize,
    pub dt: f64,
    pub dx: f64,
    /// `‖f‖ Δt / Δx` when the field speed is uniform.
    pub courant: Option<f64>,
}

impl SLState {
    pub fn time(&self) -> f64 {
        self.time_index as f64 * self.dt
    }
}

/// Timings and location counters of one time step.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepRecord {
    pub step: usize,
    pub stats: LocateStats,
    pub query_secs: f64,
    pub locate_secs: f64,
    pub interp_secs: f64,
}

/// Per-phase accumulated time over a run.
#[derive(Clone, Debug, Default)]
pub struct Profile {
    pub query: Duration,
    pub locate: Duration,
    pub interp: Duration,
    pub steps: Vec<StepRecord>,
}

impl Profile {
    pub fn total(&self) -> Duration {
        self.query + self.locate + self.interp
    }

    /// Share of the step time spent in point location.
    pub fn locate_fraction(&self) -> f64 {
        let total = self.total().as_secs_f64();
        if total == 0.0 {
            0.0
        } else {
            self.locate.as_secs_f64() / total
        }
    }

    pub fn query_fraction(&self) -> f64 {
        frac(self.query, self.total())
    }

    pub fn interp_fraction(&self) -> f64 {
        frac(self.interp, self.total())
    }

    /// Location counters summed over all steps.
    pub fn totals(&self) -> LocateStats {
        let mut s = LocateStats::default();
        for r in &self.steps {
            s.merge(&r.stats);
        }
        s
    }

    /// Element changes summed over steps `from..` (0-based step index).
    pub fn element_changes_from(&self, from: usize) -> u64 {
        self.steps.iter().skip(from).map(|r| r.stats.element_changes).sum()
    }

    /// Mean element changes per located query, averaged over time steps.
    pub fn mean_element_changes(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|r| r.stats.mean_element_changes()).sum::<f64>() / self.steps.len() as f64
    }
}

fn frac(part: Duration, total: Duration) -> f64 {
    let t = total.as_secs_f64();
    if t == 0.0 {
        0.0
    } else {
        part.as_secs_f64() / t
    }
}

/// Output of [`sl_advect`].
#[derive(Clone, Debug)]
pub struct SlRun {
    /// Initial state followed by the retained snapshots.
    pub states: Vec<SLState>,
    pub final_state: SLState,
    pub profile: Profile,
}

/// Runs the scheme, calling `observe(previous, next, record)` after every
/// time step.
pub fn sl_advect_with<F>(
    mesh: &Triangulation,
    locator: &mut Locator,
    field: &VectorField,
    u0: &[f64],
    cfg: &SlConfig,
    mut observe: F,
) -> Result<(SLState, Profile)>
where
    F: FnMut(&SLState, &SLState, &StepRecord),
{
    if !cfg.dt.is_finite() || cfg.dt <= 0.0 {
        return Err(Error::Config(format!("time step must be positive, got {}", cfg.dt)));
    }
    if cfg.t_final.is_nan() || cfg.t_final < 0.0 {
        return Err(Error::Config(format!("final time must be nonnegative, got {}", cfg.t_final)));
    }
    if u0.len() != mesh.num_vertices() {
        return Err(Error::Config(format!(
            "initial data has {} values for {} nodes",
            u0.len(),
            mesh.num_vertices()
        )));
    }
    if let Locator::Walk { ctx, strategy, .. } = &*locator {
        if *strategy == crate::walk::WalkStrategy::C && ctx.tree.is_none() {
            return Err(Error::MissingSpanningTree);
        }
    }
    let lx_dt = field.lipschitz_x() * cfg.dt;
    if lx_dt >= 1.0 {
        log::warn!("L_x * dt = {lx_dt:.3} >= 1: characteristics of neighboring nodes may cross");
    }

    let dx = mesh.space_scale();
    let courant = field.speed().map(|s| s * cfg.dt / dx);
    let mut state = SLState {
        values: u0.to_vec(),
        time_index: 0,
        dt: cfg.dt,
        dx,
        courant,
    };
    let mut profile = Profile::default();
    let mut next = vec![0.0; mesh.num_vertices()];
    for n in 0..cfg.num_steps() {
        let t0 = Instant::now();
        let feet = euler_feet(mesh, field, n, cfg.dt, cfg.time_level);
        let t1 = Instant::now();
        let (locs, stats) = locator.locate_all(mesh, &feet)?;
        let t2 = Instant::now();
        for (i, loc) in locs.iter().enumerate() {
            next[i] = if loc.is_inside() {
                p1_interpolate(&state.values, loc, mesh)?
            } else {
                state.values[i]
            };
        }
        let t3 = Instant::now();

        let record = StepRecord {
            step: n,
            stats,
            query_secs: (t1 - t0).as_secs_f64(),
            locate_secs: (t2 - t1).as_secs_f64(),
            interp_secs: (t3 - t2).as_secs_f64(),
        };
        profile.query += t1 - t0;
        profile.locate += t2 - t1;
        profile.interp += t3 - t2;
        profile.steps.push(record);

        let mut new_state = SLState {
            values: std::mem::take(&mut next),
            time_index: n + 1,
            dt: cfg.dt,
            dx,
            courant,
        };
        observe(&state, &new_state, &record);
        std::mem::swap(&mut state, &mut new_state);
        next = new_state.values;
    }
    Ok((state, profile))
}

/// Runs the scheme and keeps every `snapshot_every`-th state (0 keeps only
/// the initial and final states).
pub fn sl_advect(
    mesh: &Triangulation,
    locator: &mut Locator,
    field: &VectorField,
    u0: &[f64],
    cfg: &SlConfig,
    snapshot_every: usize,
) -> Result<SlRun> {
    let initial = SLState {
        values: u0.to_vec(),
        time_index: 0,
        dt: cfg.dt,
        dx: mesh.space_scale(),
        courant: field.speed().map(|s| s * cfg.dt / mesh.space_scale()),
    };
    let mut states = vec![initial];
    let (final_state, profile) = sl_advect_with(mesh, locator, field, u0, cfg, |_, next, _| {
        if snapshot_every > 0 && next.time_index % snapshot_every == 0 {
            states.push(next.clone());
        }
    })?;
    Ok(SlRun {
        states,
        final_state,
        profile,
    })
}

/// Writes one CSV row of counters and timings per time step.
pub fn write_step_records<W: std::io::Write>(records: &[StepRecord], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        step: usize,
        queries: u64,
        inside: u64,
        outside: u64,
        element_changes: u64,
        mean_element_changes: f64,
        max_element_changes: u32,
        fallbacks: u64,
        query_secs: f64,
        locate_secs: f64,
        interp_secs: f64,
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            step: r.step,
            queries: r.stats.queries,
            inside: r.stats.inside,
            outside: r.stats.outside,
            element_changes: r.stats.element_changes,
            mean_element_changes: r.stats.mean_element_changes(),
            max_element_changes: r.stats.max_element_changes,
            fallbacks: r.stats.fallbacks,
            query_secs: r.query_secs,
            locate_secs: r.locate_secs,
            interp_secs: r.interp_secs,
        })?;
    }
    w.flush().map_err(|e| Error::io("step csv", e))?;
    Ok(())
}

/// Writes `step,time,node,x,y,value` rows for each state.
pub fn write_snapshots<W: std::io::Write>(mesh: &Triangulation, states: &[SLState], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        step: usize,
        time: f64,
        node: usize,
        x: f64,
        y: f64,
        value: f64,
    }
    let mut w = csv::Writer::from_writer(out);
    for s in states {
        for (i, (&p, &v)) in mesh.vertices().iter().zip(&s.values).enumerate() {
            w.serialize(Row {
                step: s.time_index,
                time: s.time(),
                node: i,
                x: p.x,
                y: p.y,
                value: v,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io("snapshot csv", e))?;
    Ok(())
}
