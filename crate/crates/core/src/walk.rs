//! Barycentric-walk point location with characteristic-aware choices of the
//! starting triangle.
//!
//! A walk computes the barycentric coordinates of the query with respect to
//! the current triangle and, while one of them is below `-INSIDE_TOL`,
//! moves across the edge opposite the most negative one. Three strategies
//! pick the starting triangle for node `i`:
//!
//! * [`WalkStrategy::A`]: a fixed random triangle incident to node `i`;
//! * [`WalkStrategy::B`]: the triangle where node `i`'s walk ended at the
//!   previous time step;
//! * [`WalkStrategy::C`]: the triangle where the walk of `i`'s spanning-tree
//!   parent ended during the current sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Barycentric, Point2};
use crate::mesh::{Triangulation, WalkContext, INT_BYTES, NO_NEIGHBOR};

/// Placeholder triangle index for results that never reached a triangle.
pub const NO_TRIANGLE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkStrategy {
    /// Start from the node's own incident triangle.
    A,
    /// Start from the node's final triangle of the previous time step.
    B,
    /// Start from the parent node's final triangle of the current time step.
    C,
}

impl WalkStrategy {
    pub const ALL: [WalkStrategy; 3] = [WalkStrategy::A, WalkStrategy::B, WalkStrategy::C];
}

impl fmt::Display for WalkStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkStrategy::A => "a",
            WalkStrategy::B => "b",
            WalkStrategy::C => "c",
        })
    }
}

impl FromStr for WalkStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(WalkStrategy::A),
            "b" => Ok(WalkStrategy::B),
            "c" => Ok(WalkStrategy::C),
            _ => Err(Error::Config(format!("unknown walk strategy {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Inside,
    Outside,
}

/// Enclosing triangle and barycentric coordinates of one query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocationResult {
    pub triangle: usize,
    pub coords: Barycentric,
    /// Element changes performed by the walk (zero for other locators).
    pub steps: u32,
    pub status: Status,
    /// Set when the walk hit its step cap and fell back to a full scan.
    pub fallback: bool,
}

impl LocationResult {
    pub fn outside(triangle: usize, coords: Barycentric, steps: u32) -> Self {
        LocationResult {
            triangle,
            coords,
            steps,
            status: Status::Outside,
            fallback: false,
        }
    }

    #[inline]
    pub fn is_inside(&self) -> bool {
        self.status == Status::Inside
    }
}

/// Aggregate counters over a batch of locations.
///
/// Element-change statistics only count queries that ended inside the mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocateStats {
    pub queries: u64,
    pub inside: u64,
    pub outside: u64,
    pub element_changes: u64,
    pub max_element_changes: u32,
    pub fallbacks: u64,
    /// Quadtree quads visited during descent.
    pub quads_visited: u64,
    /// Barycentric evaluations performed.
    pub triangle_tests: u64,
}

impl LocateStats {
    pub fn record(&mut self, r: &LocationResult) {
        self.queries += 1;
        if r.fallback {
            self.fallbacks += 1;
        }
        match r.status {
            Status::Inside => {
                self.inside += 1;
                self.element_changes += u64::from(r.steps);
                self.max_element_changes = self.max_element_changes.max(r.steps);
            }
            Status::Outside => self.outside += 1,
        }
    }

    pub fn merge(&mut self, o: &LocateStats) {
        self.queries += o.queries;
        self.inside += o.inside;
        self.outside += o.outside;
        self.element_changes += o.element_changes;
        self.max_element_changes = self.max_element_changes.max(o.max_element_changes);
        self.fallbacks += o.fallbacks;
        self.quads_visited += o.quads_visited;
        self.triangle_tests += o.triangle_tests;
    }

    /// Mean element changes per inside query.
    pub fn mean_element_changes(&self) -> f64 {
        if self.inside == 0 {
            0.0
        } else {
            self.element_changes as f64 / self.inside as f64
        }
    }

    /// Quads visited plus triangle tests, per query.
    pub fn work_per_query(&self) -> f64 {
        if self.queries == 0 {
            0.0
        } else {
            (self.quads_visited + self.triangle_tests) as f64 / self.queries as f64
        }
    }
}

/// First triangle (ascending index) accepting `p`, by exhaustive scan.
pub fn scan_locate(mesh: &Triangulation, p: Point2) -> Option<(usize, Barycentric)> {
    (0..mesh.num_triangles()).find_map(|t| {
        let bc = mesh.barycentric_unchecked(t, p);
        bc.is_inside().then_some((t, bc))
    })
}

/// Step cap after which a walk gives up and scans.
#[inline]
pub fn step_cap(mesh: &Triangulation) -> usize {
    4 * mesh.num_triangles()
}

/// Barycentric walk from triangle `start` toward `p`.
pub fn walk_from(mesh: &Triangulation, start: usize, p: Point2) -> LocationResult {
    let cap = step_cap(mesh);
    let neighbors = mesh.neighbors();
    let mut tri = start;
    let mut steps = 0usize;
    loop {
        let bc = mesh.barycentric_unchecked(tri, p);
        let k = bc.argmin();
        if bc.0[k] >= -crate::geometry::INSIDE_TOL {
            return LocationResult {
                triangle: tri,
                coords: bc,
                steps: steps as u32,
                status: Status::Inside,
                fallback: false,
            };
        }
        let next = neighbors[tri][k];
        if next == NO_NEIGHBOR {
            return LocationResult::outside(tri, bc, steps as u32);
        }
        if steps == cap || bc.0[k].is_nan() {
            let mut r = match scan_locate(mesh, p) {
                Some((t, coords)) => LocationResult {
                    triangle: t,
                    coords,
                    steps: steps as u32,
                    status: Status::Inside,
                    fallback: true,
                },
                None => LocationResult::outside(tri, bc, steps as u32),
            };
            r.fallback = true;
            return r;
        }
        tri = next;
        steps += 1;
    }
}

fn check_context(mesh: &Triangulation, ctx: &WalkContext, n_queries: usize, s: WalkStrategy) -> Result<()> {
    if ctx.initial_triangles.len() != mesh.num_vertices() || n_queries != mesh.num_vertices() {
        return Err(Error::Config(format!(
            "walk context has {} entries and {} queries for {} nodes",
            ctx.initial_triangles.len(),
            n_queries,
            mesh.num_vertices()
        )));
    }
    if s == WalkStrategy::C && ctx.tree.is_none() {
        return Err(Error::MissingSpanningTree);
    }
    Ok(())
}

/// Locates one query per mesh node, updating the walk context according to
/// strategy `s`.
///
/// Queries that fall outside the mesh leave the node's starting triangle
/// untouched and are excluded from the element-change statistics.
pub fn point_location_bw(
    mesh: &Triangulation,
    ctx: &mut WalkContext,
    queries: &[Point2],
    s: WalkStrategy,
) -> Result<(Vec<LocationResult>, LocateStats)> {
    check_context(mesh, ctx, queries.len(), s)?;
    let n = queries.len();
    let mut stats = LocateStats::default();
    let results = match s {
        WalkStrategy::A | WalkStrategy::B => {
            let results: Vec<LocationResult> = (0..n)
                .map(|i| walk_from(mesh, ctx.initial_triangles[i], queries[i]))
                .collect();
            if s == WalkStrategy::B {
                update_previous(ctx, &results);
            }
            results
        }
        WalkStrategy::C => {
            let tree = ctx.tree.as_ref().ok_or(Error::MissingSpanningTree)?;
            let mut results = vec![LocationResult::outside(NO_TRIANGLE, Barycentric::default(), 0); n];
            for &i in &tree.order {
                let start = ctx.initial_triangles[tree.parents[i]];
                let r = walk_from(mesh, start, queries[i]);
                if r.is_inside() {
                    ctx.initial_triangles[i] = r.triangle;
                }
                results[i] = r;
            }
            results
        }
    };
    for r in &results {
        stats.record(r);
    }
    stats.triangle_tests = stats.element_changes + stats.queries;
    Ok((results, stats))
}

/// Same as [`point_location_bw`] with the per-node walks spread over the
/// rayon pool. Only strategies A and B are independent across nodes.
pub fn point_location_bw_par(
    mesh: &Triangulation,
    ctx: &mut WalkContext,
    queries: &[Point2],
    s: WalkStrategy,
) -> Result<(Vec<LocationResult>, LocateStats)> {
    check_context(mesh, ctx, queries.len(), s)?;
    if s == WalkStrategy::C {
        return Err(Error::Config("parallel location supports strategies A and B only".into()));
    }
    let results: Vec<LocationResult> = queries
        .par_iter()
        .zip(ctx.initial_triangles.par_iter())
        .map(|(&q, &start)| walk_from(mesh, start, q))
        .collect();
    if s == WalkStrategy::B {
        update_previous(ctx, &results);
    }
    let mut stats = LocateStats::default();
    for r in &results {
        stats.record(r);
    }
    stats.triangle_tests = stats.element_changes + stats.queries;
    Ok((results, stats))
}

fn update_previous(ctx: &mut WalkContext, results: &[LocationResult]) {
    for (t0, r) in ctx.initial_triangles.iter_mut().zip(results) {
        if r.is_inside() {
            *t0 = r.triangle;
        }
    }
}

/// Locator-specific storage of the walk: the neighbor table, the starting
/// triangle of each node and, for strategy C, the parent of each node.
pub fn walk_storage_bytes(mesh: &Triangulation, s: WalkStrategy) -> usize {
    let base = 3 * INT_BYTES * mesh.num_triangles() + INT_BYTES * mesh.num_vertices();
    match s {
        WalkStrategy::A | WalkStrategy::B => base,
        WalkStrategy::C => base + INT_BYTES * mesh.num_vertices(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_courant_mesh, generate_random_delaunay, load_triangle_format};

    fn square() -> Triangulation {
        load_triangle_format(
            "4 2 0 0\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n",
            "2 3 0\n1 1 2 4\n2 2 3 4\n",
        )
        .unwrap()
    }

    fn centroid(mesh: &Triangulation, t: usize) -> Point2 {
        let [a, b, c] = mesh.corners(t);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    #[test]
    fn inside_start_needs_no_steps() {
        let mesh = square();
        let r = walk_from(&mesh, 0, Point2::new(0.2, 0.2));
        assert_eq!((r.triangle, r.steps, r.status), (0, 0, Status::Inside));
    }

    #[test]
    fn one_step_across_shared_edge() {
        let mesh = square();
        let p = centroid(&mesh, 1);
        // Only θ1 is negative in triangle 0: (2/3, 2/3) lies beyond edge 2-4.
        let bc = mesh.barycentric(0, p).unwrap();
        assert!(bc.0[0] < 0.0 && bc.0[1] >= 0.0 && bc.0[2] >= 0.0);
        let r = walk_from(&mesh, 0, p);
        assert_eq!((r.triangle, r.steps, r.status), (1, 1, Status::Inside));
    }

    #[test]
    fn boundary_exit_is_outside() {
        let mesh = square();
        let r = walk_from(&mesh, 0, Point2::new(0.5, -0.3));
        assert_eq!(r.status, Status::Outside);
        assert_eq!(r.triangle, 0);
    }

    #[test]
    fn walk_matches_scan_from_every_start() {
        let mesh = generate_random_delaunay(150, 3).unwrap();
        let queries: Vec<Point2> = (0..40)
            .map(|k| Point2::new(-0.49 + 0.024 * k as f64, 0.45 * ((k * 7) as f64).sin()))
            .collect();
        for start in 0..mesh.num_triangles() {
            for &q in &queries {
                let r = walk_from(&mesh, start, q);
                assert!(r.is_inside() && !r.fallback);
                assert!(r.coords.is_inside());
                let (expected, _) = scan_locate(&mesh, q).unwrap();
                if r.triangle != expected {
                    // Only legitimate on a shared edge or vertex.
                    assert!(mesh.barycentric(expected, q).unwrap().min() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn strategy_b_is_stationary_for_repeated_queries() {
        let mesh = generate_random_delaunay(400, 1).unwrap();
        let mut ctx = WalkContext::new(&mesh, 2).unwrap();
        let queries: Vec<Point2> = mesh
            .vertices()
            .iter()
            .map(|p| Point2::new(0.97 * p.x + 0.01, 0.97 * p.y - 0.005))
            .collect();
        let (_, first) = point_location_bw(&mesh, &mut ctx, &queries, WalkStrategy::B).unwrap();
        assert!(first.element_changes > 0);
        let (_, second) = point_location_bw(&mesh, &mut ctx, &queries, WalkStrategy::B).unwrap();
        assert_eq!(second.element_changes, 0);
    }

    #[test]
    fn strategy_a_never_moves_start() {
        let mesh = generate_random_delaunay(100, 1).unwrap();
        let mut ctx = WalkContext::new(&mesh, 2).unwrap();
        let before = ctx.initial_triangles.clone();
        let queries: Vec<Point2> = mesh.vertices().iter().map(|p| 0.5 * *p).collect();
        point_location_bw(&mesh, &mut ctx, &queries, WalkStrategy::A).unwrap();
        assert_eq!(ctx.initial_triangles, before);
    }

    #[test]
    fn strategy_c_starts_from_parent_result() {
        let mesh = square();
        let mut ctx = WalkContext::with_spanning_tree(&mesh, 0).unwrap();
        let tree = ctx.tree.clone().unwrap();
        let queries = mesh.vertices().to_vec();
        let (results, stats) = point_location_bw(&mesh, &mut ctx, &queries, WalkStrategy::C).unwrap();
        assert_eq!(stats.inside, 4);
        for &i in &tree.order {
            assert!(mesh.triangles()[results[i].triangle].contains(&i));
            assert_eq!(ctx.initial_triangles[i], results[i].triangle);
        }
        let mut ctx2 = WalkContext::with_spanning_tree(&mesh, 0).unwrap();
        // Replaying the sweep: each non-root start is the parent's final triangle.
        for &i in &tree.order {
            let start = ctx2.initial_triangles[tree.parents[i]];
            let r = walk_from(&mesh, start, queries[i]);
            assert_eq!(r.triangle, results[i].triangle);
            ctx2.initial_triangles[i] = r.triangle;
        }
    }

    #[test]
    fn strategy_c_requires_tree() {
        let mesh = square();
        let mut ctx = WalkContext::new(&mesh, 0).unwrap();
        let q = mesh.vertices().to_vec();
        assert!(matches!(
            point_location_bw(&mesh, &mut ctx, &q, WalkStrategy::C),
            Err(Error::MissingSpanningTree)
        ));
    }

    #[test]
    fn parallel_matches_serial() {
        let mesh = generate_random_delaunay(3000, 8).unwrap();
        let queries: Vec<Point2> = mesh.vertices().iter().map(|p| Point2::new(p.y, -p.x)).collect();
        for s in [WalkStrategy::A, WalkStrategy::B] {
            let mut c1 = WalkContext::new(&mesh, 4).unwrap();
            let mut c2 = c1.clone();
            let (r1, s1) = point_location_bw(&mesh, &mut c1, &queries, s).unwrap();
            let (r2, s2) = point_location_bw_par(&mesh, &mut c2, &queries, s).unwrap();
            assert_eq!(r1, r2);
            assert_eq!(s1, s2);
            assert_eq!(c1.initial_triangles, c2.initial_triangles);
        }
    }

    #[test]
    fn storage_formula() {
        let single = load_triangle_format("3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n", "1 3 0\n1 1 2 3\n").unwrap();
        assert_eq!(walk_storage_bytes(&single, WalkStrategy::A), 24);
        let mesh = generate_courant_mesh(7).unwrap();
        assert_eq!(
            walk_storage_bytes(&mesh, WalkStrategy::C) - walk_storage_bytes(&mesh, WalkStrategy::B),
            4 * mesh.num_vertices()
        );
        assert_eq!(
            walk_storage_bytes(&mesh, WalkStrategy::A),
            walk_storage_bytes(&mesh, WalkStrategy::B)
        );
    }
}
