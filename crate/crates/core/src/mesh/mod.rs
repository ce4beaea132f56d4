//! Triangulations: storage, neighbor construction, validation and the
//! generators used by the benchmarks.

mod delaunay;
mod io;
mod spanning;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{signed_area2, Barycentric, Point2, Rect};

pub use delaunay::{generate_random_delaunay, sample_domain_points};
pub use io::{load_triangle_files, load_triangle_format, write_ele, write_node, write_triangle_files};
pub use spanning::{assign_initial_triangles, build_spanning_tree, SpanningTree, WalkContext};

/// Marks a boundary edge in [`Triangulation::neighbors`].
pub const NO_NEIGHBOR: usize = usize::MAX;

/// Bytes per integer index in the storage accounting model.
pub const INT_BYTES: usize = 4;
/// Bytes per double in the storage accounting model.
pub const DOUBLE_BYTES: usize = 8;
/// Bytes per pointer in the storage accounting model.
pub const POINTER_BYTES: usize = 8;

/// Immutable triangulation with counterclockwise triangles.
///
/// `neighbors[j][k]` is the triangle across the edge opposite the `k`-th
/// vertex of triangle `j`, or [`NO_NEIGHBOR`] on the boundary.
#[derive(Clone, Debug)]
pub struct Triangulation {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[usize; 3]>,
    space_scale: f64,
}

impl Triangulation {
    /// Builds a triangulation from vertices and counterclockwise triangles,
    /// computing the neighbor table.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, space_scale: f64) -> Result<Self> {
        for (j, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {j} references a missing vertex")));
            }
            if signed_area2(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {j} is not counterclockwise")));
            }
        }
        let neighbors = build_neighbors(&triangles).map_err(|e| {
            Error::InvalidMesh(format!(
                "edge ({}, {}) shared by more than two triangles (at triangle {})",
                e.a, e.b, e.triangle
            ))
        })?;
        Ok(Triangulation {
            vertices,
            triangles,
            neighbors,
            space_scale,
        })
    }

    /// Assembles a triangulation without any checking. Intended for tests
    /// and for inputs that will be passed through [`Triangulation::validate`].
    pub fn from_parts_unchecked(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        neighbors: Vec<[usize; 3]>,
        space_scale: f64,
    ) -> Self {
        Triangulation {
            vertices,
            triangles,
            neighbors,
            space_scale,
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    #[inline]
    pub fn neighbors(&self) -> &[[usize; 3]] {
        &self.neighbors
    }

    /// Number of vertices, `N`.
    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of triangles, `N_t`.
    #[inline]
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Characteristic length `Δx` of the mesh.
    #[inline]
    pub fn space_scale(&self) -> f64 {
        self.space_scale
    }

    #[inline]
    pub fn corners(&self, tri: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[tri];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::bounding(&self.vertices).unwrap_or(Rect::new(Point2::default(), Point2::default()))
    }

    /// Barycentric coordinates of `p` with respect to triangle `tri`.
    pub fn barycentric(&self, tri: usize, p: Point2) -> Result<Barycentric> {
        let [a, b, c] = self.corners(tri);
        Barycentric::compute(a, b, c, p).ok_or(Error::DegenerateTriangle(tri))
    }

    /// Barycentric coordinates on a triangle known to be nondegenerate.
    #[inline]
    pub(crate) fn barycentric_unchecked(&self, tri: usize, p: Point2) -> Barycentric {
        let [a, b, c] = self.corners(tri);
        Barycentric::compute(a, b, c, p).unwrap_or(Barycentric([f64::NAN; 3]))
    }

    /// Sorted vertex adjacency lists over triangle edges.
    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Incident triangles of each vertex, in ascending triangle order.
    pub fn incident_triangles(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (j, t) in self.triangles.iter().enumerate() {
            for &v in t {
                inc[v].push(j);
            }
        }
        inc
    }

    /// Storage of the vertex and connectivity arrays, shared by every
    /// locator: two doubles per vertex plus three integers per triangle.
    pub fn storage_bytes(&self) -> usize {
        2 * DOUBLE_BYTES * self.num_vertices() + 3 * INT_BYTES * self.num_triangles()
    }

    /// Checks every structural invariant and lists the violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.vertices.len();
        let nt = self.triangles.len();
        if self.neighbors.len() != nt {
            issues.push(Violation::NeighborTableLength {
                expected: nt,
                found: self.neighbors.len(),
            });
        }
        for (j, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                issues.push(Violation::VertexOutOfRange { triangle: j });
                continue;
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                issues.push(Violation::RepeatedVertex { triangle: j });
                continue;
            }
            let area = signed_area2(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
            if area.is_nan() || area <= 0.0 {
                issues.push(Violation::Orientation { triangle: j, area2: area });
            }
        }
        if !issues.is_empty() {
            return ValidationReport { issues };
        }

        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (j, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                edges.entry(edge_key(t[(k + 1) % 3], t[(k + 2) % 3])).or_default().push((j, k));
            }
        }
        for (&(a, b), owners) in &edges {
            if owners.len() > 2 {
                issues.push(Violation::NonManifoldEdge { a, b });
            }
        }
        for (j, t) in self.triangles.iter().enumerate() {
            let Some(nb) = self.neighbors.get(j) else { continue };
            for k in 0..3 {
                let owners = &edges[&edge_key(t[(k + 1) % 3], t[(k + 2) % 3])];
                let expected = owners.iter().find(|&&(o, _)| o != j).map(|&(o, _)| o);
                match (nb[k], expected) {
                    (NO_NEIGHBOR, None) => {}
                    (NO_NEIGHBOR, Some(e)) => issues.push(Violation::MissingNeighbor {
                        triangle: j,
                        position: k,
                        expected: e,
                    }),
                    (got, None) => issues.push(Violation::SpuriousNeighbor {
                        triangle: j,
                        position: k,
                        found: got,
                    }),
                    (got, Some(e)) if got != e => issues.push(Violation::WrongNeighbor {
                        triangle: j,
                        position: k,
                        expected: e,
                        found: got,
                    }),
                    _ => {}
                }
                let other = nb[k];
                if other != NO_NEIGHBOR {
                    let back = self.neighbors.get(other).is_some_and(|o| o.contains(&j));
                    if !back {
                        issues.push(Violation::Asymmetric { triangle: j, neighbor: other });
                    }
                }
            }
        }
        issues.sort_by_key(|v| v.sort_key());
        ValidationReport { issues }
    }
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug)]
pub(crate) struct NonManifold {
    pub triangle: usize,
    pub a: usize,
    pub b: usize,
}

/// Neighbor table under the opposite-vertex convention.
pub(crate) fn build_neighbors(triangles: &[[usize; 3]]) -> Result<Vec<[usize; 3]>, NonManifold> {
    let mut neighbors = vec![[NO_NEIGHBOR; 3]; triangles.len()];
    let mut open: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(triangles.len() * 2);
    let mut closed: HashMap<(usize, usize), ()> = HashMap::new();
    for (j, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            let key = edge_key(a, b);
            if closed.contains_key(&key) {
                return Err(NonManifold { triangle: j, a: key.0, b: key.1 });
            }
            match open.remove(&key) {
                Some((o, ko)) => {
                    neighbors[j][k] = o;
                    neighbors[o][ko] = j;
                    closed.insert(key, ());
                }
                None => {
                    open.insert(key, (j, k));
                }
            }
        }
    }
    Ok(neighbors)
}

/// One violated invariant found by [`Triangulation::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NeighborTableLength { expected: usize, found: usize },
    VertexOutOfRange { triangle: usize },
    RepeatedVertex { triangle: usize },
    Orientation { triangle: usize, area2: f64 },
    NonManifoldEdge { a: usize, b: usize },
    MissingNeighbor { triangle: usize, position: usize, expected: usize },
    SpuriousNeighbor { triangle: usize, position: usize, found: usize },
    WrongNeighbor { triangle: usize, position: usize, expected: usize, found: usize },
    Asymmetric { triangle: usize, neighbor: usize },
}

impl Violation {
    fn sort_key(&self) -> (usize, usize) {
        match *self {
            Violation::NeighborTableLength { .. } => (0, 0),
            Violation::VertexOutOfRange { triangle }
            | Violation::RepeatedVertex { triangle }
            | Violation::Orientation { triangle, .. } => (1, triangle),
            Violation::NonManifoldEdge { a, .. } => (2, a),
            Violation::MissingNeighbor { triangle, .. }
            | Violation::SpuriousNeighbor { triangle, .. }
            | Violation::WrongNeighbor { triangle, .. }
            | Violation::Asymmetric { triangle, .. } => (3, triangle),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NeighborTableLength { expected, found } => {
                write!(f, "neighbor table has {found} rows, expected {expected}")
            }
            Violation::VertexOutOfRange { triangle } => {
                write!(f, "triangle {triangle} references a missing vertex")
            }
            Violation::RepeatedVertex { triangle } => {
                write!(f, "triangle {triangle} repeats a vertex")
            }
            Violation::Orientation { triangle, area2 } => {
                write!(f, "triangle {triangle} is not counterclockwise (2*area = {area2:e})")
            }
            Violation::NonManifoldEdge { a, b } => {
                write!(f, "edge ({a}, {b}) is shared by more than two triangles")
            }
            Violation::MissingNeighbor { triangle, position, expected } => write!(
                f,
                "triangle {triangle}: boundary marker at position {position} but triangle {expected} shares that edge"
            ),
            Violation::SpuriousNeighbor { triangle, position, found } => write!(
                f,
                "triangle {triangle}: neighbor {found} at position {position} but that edge is on the boundary"
            ),
            Violation::WrongNeighbor { triangle, position, expected, found } => write!(
                f,
                "triangle {triangle}: neighbor at position {position} is {found}, expected {expected}"
            ),
            Violation::Asymmetric { triangle, neighbor } => write!(
                f,
                "neighbor symmetry broken: triangle {triangle} lists {neighbor}, which does not list {triangle}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Structured "Courant" triangulation of `[-1/2, 1/2]²` with `m` cells per
/// side, each cell split along its lower-left to upper-right diagonal.
///
/// Node `(l, k)` sits at index `k (m+1) + l`. Cell `(l, k)` owns triangles
/// `2(mk + l)` (upper-left half, where the in-cell x offset is smaller than
/// the y offset) and `2(mk + l) + 1` (lower-right half). In 1-based labels
/// these are `2(mk+l)+1` and `2(mk+l)+2`.
pub fn generate_courant_mesh(m: usize) -> Result<Triangulation> {
    if m == 0 {
        return Err(Error::Config("Courant mesh needs at least one cell per side".into()));
    }
    let dx = 1.0 / m as f64;
    let side = m + 1;
    let coord = |i: usize| -0.5 + i as f64 / m as f64;
    let mut vertices = Vec::with_capacity(side * side);
    for k in 0..side {
        for l in 0..side {
            vertices.push(Point2::new(coord(l), coord(k)));
        }
    }
    let node = |l: usize, k: usize| k * side + l;
    let mut triangles = Vec::with_capacity(2 * m * m);
    for k in 0..m {
        for l in 0..m {
            let (a, b, c, d) = (node(l, k), node(l + 1, k), node(l + 1, k + 1), node(l, k + 1));
            triangles.push([a, c, d]);
            triangles.push([a, b, c]);
        }
    }
    Triangulation::new(vertices, triangles, dx)
}
