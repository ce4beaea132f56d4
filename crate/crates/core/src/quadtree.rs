//! Quadtree point-location index over a triangulation.
//!
//! Quads are split into four equal quadrants until one of three rules
//! holds, with `q` the triangle budget of a vertex-free leaf:
//!
//! * (a) the quad contains no vertex and intersects `1..=q` triangles;
//! * (b) the quad contains exactly one vertex;
//! * (c) the quad intersects no triangle.
//!
//! Intersection and containment use closed sets, so a vertex on a quad side
//! is counted in every quad touching it. Only triangle indices are kept in
//! the leaves once the tree is built.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::mesh::{Triangulation, DOUBLE_BYTES, INT_BYTES, POINTER_BYTES};
use crate::geometry::Barycentric;
use crate::walk::{LocateStats, LocationResult, Status, NO_TRIANGLE};

pub const DEFAULT_Q: usize = 7;
pub const DEFAULT_DEPTH_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafRule {
    /// No vertex, `1..=q` triangles.
    FewTriangles,
    /// Exactly one vertex.
    SingleVertex,
    /// No triangle.
    Empty,
}

#[derive(Clone, Debug)]
enum Node {
    Internal { children: [u32; 4] },
    Leaf { start: u32, len: u32, rule: LeafRule },
}

#[derive(Clone, Debug)]
pub struct Quadtree {
    rects: Vec<Rect>,
    nodes: Vec<Node>,
    leaf_triangles: Vec<u32>,
    q: usize,
    depth: usize,
}

/// Work performed by one quadtree query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryCost {
    pub quads_visited: u32,
    pub triangle_tests: u32,
}

struct Pending {
    node: usize,
    depth: usize,
    triangles: Vec<u32>,
    vertices: Vec<u32>,
}

impl Quadtree {
    /// Builds the tree with triangle budget `q` and the default depth cap.
    pub fn build(mesh: &Triangulation, q: usize) -> Result<Self> {
        Self::build_with_cap(mesh, q, DEFAULT_DEPTH_CAP)
    }

    pub fn build_with_cap(mesh: &Triangulation, q: usize, depth_cap: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::Config(format!("quadtree needs q >= 2, got {q}")));
        }
        let root_rect = mesh.bounding_box();
        let mut tree = Quadtree {
            rects: vec![root_rect],
            nodes: vec![Node::Leaf { start: 0, len: 0, rule: LeafRule::Empty }],
            leaf_triangles: Vec::new(),
            q,
            depth: 0,
        };
        let all_tris: Vec<u32> = (0..mesh.num_triangles() as u32)
            .filter(|&t| root_rect.intersects_triangle(mesh.corners(t as usize)))
            .collect();
        let all_verts: Vec<u32> = (0..mesh.num_vertices() as u32).collect();
        let mut stack = vec![Pending {
            node: 0,
            depth: 0,
            triangles: all_tris,
            vertices: all_verts,
        }];
        while let Some(p) = stack.pop() {
            tree.depth = tree.depth.max(p.depth);
            let rule = match (p.vertices.len(), p.triangles.len()) {
                (1, _) => Some(LeafRule::SingleVertex),
                (0, 0) => Some(LeafRule::Empty),
                (0, nt) if nt <= q => Some(LeafRule::FewTriangles),
                _ => None,
            };
            if let Some(rule) = rule {
                let start = tree.leaf_triangles.len() as u32;
                let mut tris = p.triangles;
                tris.sort_unstable();
                tree.leaf_triangles.extend_from_slice(&tris);
                tree.nodes[p.node] = Node::Leaf {
                    start,
                    len: tris.len() as u32,
                    rule,
                };
                continue;
            }
            if p.depth >= depth_cap {
                return Err(Error::QuadtreeDepth { cap: depth_cap });
            }
            let quads = tree.rects[p.node].quadrants();
            let first = tree.nodes.len() as u32;
            let mut children = [0u32; 4];
            // Push in reverse so SW is expanded first.
            let mut pending = Vec::with_capacity(4);
            for (c, rect) in quads.iter().enumerate() {
                let id = first + c as u32;
                children[c] = id;
                tree.rects.push(*rect);
                tree.nodes.push(Node::Leaf { start: 0, len: 0, rule: LeafRule::Empty });
                let triangles = p
                    .triangles
                    .iter()
                    .copied()
                    .filter(|&t| rect.intersects_triangle(mesh.corners(t as usize)))
                    .collect();
                let vertices = p
                    .vertices
                    .iter()
                    .copied()
                    .filter(|&v| rect.contains(mesh.vertices()[v as usize]))
                    .collect();
                pending.push(Pending {
                    node: id as usize,
                    depth: p.depth + 1,
                    triangles,
                    vertices,
                });
            }
            tree.nodes[p.node] = Node::Internal { children };
            stack.extend(pending.into_iter().rev());
        }
        Ok(tree)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Longest root-to-leaf path; the root has depth 0.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total number of quads, internal and leaf.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Total number of triangle indices stored across all leaves.
    pub fn leaf_triangle_count(&self) -> usize {
        self.leaf_triangles.len()
    }

    pub fn root_rect(&self) -> Rect {
        self.rects[0]
    }

    /// Bytes under the fixed 4/8/8 model: four doubles and four pointers
    /// per quad, one integer per stored triangle index.
    pub fn storage_bytes(&self) -> usize {
        self.node_count() * (4 * DOUBLE_BYTES + 4 * POINTER_BYTES) + self.leaf_triangle_count() * INT_BYTES
    }

    /// Leaves as `(rect, rule, triangles)`.
    pub fn leaves(&self) -> impl Iterator<Item = (Rect, LeafRule, &[u32])> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match *n {
            Node::Leaf { start, len, rule } => Some((
                self.rects[i],
                rule,
                &self.leaf_triangles[start as usize..(start + len) as usize],
            )),
            Node::Internal { .. } => None,
        })
    }

    /// Re-tests every leaf against the mesh and reports leaves that satisfy
    /// none of the stopping rules, or whose stored rule disagrees.
    pub fn leaf_rule_violations(&self, mesh: &Triangulation) -> Vec<String> {
        let mut out = Vec::new();
        for (rect, rule, tris) in self.leaves() {
            let nv = mesh.vertices().iter().filter(|&&v| rect.contains(v)).count();
            let nt = (0..mesh.num_triangles())
                .filter(|&t| rect.intersects_triangle(mesh.corners(t)))
                .count();
            if nt != tris.len() {
                out.push(format!("{rect:?}: stores {} triangles, intersects {nt}", tris.len()));
            }
            let actual = match (nv, nt) {
                (1, _) => Some(LeafRule::SingleVertex),
                (0, 0) => Some(LeafRule::Empty),
                (0, nt) if nt <= self.q => Some(LeafRule::FewTriangles),
                _ => None,
            };
            if actual != Some(rule) {
                out.push(format!("{rect:?}: rule {rule:?} but nv={nv}, nt={nt}"));
            }
        }
        out
    }

    /// Descends to the leaf containing `p` and tests its triangles.
    pub fn locate(&self, mesh: &Triangulation, p: Point2) -> LocationResult {
        self.locate_with_cost(mesh, p).0
    }

    pub fn locate_with_cost(&self, mesh: &Triangulation, p: Point2) -> (LocationResult, QueryCost) {
        let mut cost = QueryCost::default();
        let outside = LocationResult::outside(NO_TRIANGLE, Barycentric::default(), 0);
        if !self.rects[0].contains(p) {
            return (outside, cost);
        }
        let mut node = 0usize;
        loop {
            cost.quads_visited += 1;
            match self.nodes[node] {
                Node::Internal { children } => {
                    // Exact-boundary points go to the first matching child.
                    node = children
                        .iter()
                        .map(|&c| c as usize)
                        .find(|&c| self.rects[c].contains(p))
                        .unwrap_or(children[3] as usize);
                }
                Node::Leaf { start, len, .. } => {
                    for &t in &self.leaf_triangles[start as usize..(start + len) as usize] {
                        cost.triangle_tests += 1;
                        let bc = mesh.barycentric_unchecked(t as usize, p);
                        if bc.is_inside() {
                            let r = LocationResult {
                                triangle: t as usize,
                                coords: bc,
                                steps: 0,
                                status: Status::Inside,
                                fallback: false,
                            };
                            return (r, cost);
                        }
                    }
                    return (outside, cost);
                }
            }
        }
    }

    /// Locates every query, accumulating descent and test counters.
    pub fn locate_all(&self, mesh: &Triangulation, queries: &[Point2]) -> (Vec<LocationResult>, LocateStats) {
        let mut stats = LocateStats::default();
        let results = queries
            .iter()
            .map(|&p| {
                let (r, c) = self.locate_with_cost(mesh, p);
                stats.record(&r);
                stats.quads_visited += u64::from(c.quads_visited);
                stats.triangle_tests += u64::from(c.triangle_tests);
                r
            })
            .collect();
        (results, stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_courant_mesh, generate_random_delaunay};
    use crate::walk::scan_locate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single() -> Triangulation {
        Triangulation::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_subdivides_to_one_vertex_per_leaf() {
        let mesh = single();
        let tree = Quadtree::build(&mesh, 2).unwrap();
        assert!(tree.node_count() > 1);
        assert_eq!(tree.depth(), 1);
        let rules: Vec<LeafRule> = tree.leaves().map(|(_, r, _)| r).collect();
        // SW holds (0,0), SE holds (1,0), NW holds (0,1); NE touches the
        // hypotenuse only at its corner (0.5, 0.5) and holds no vertex.
        assert_eq!(
            rules,
            vec![LeafRule::SingleVertex, LeafRule::SingleVertex, LeafRule::SingleVertex, LeafRule::FewTriangles]
        );
        for (rect, _, _) in tree.leaves() {
            assert!(mesh.vertices().iter().filter(|&&v| rect.contains(v)).count() <= 1);
        }
        assert!(tree.leaf_rule_violations(&mesh).is_empty());
    }

    #[test]
    fn missed_quadrant_is_empty_leaf() {
        // Triangles cover the lower-left L of [0,2]^2 and miss the NE quadrant.
        let mesh = Triangulation::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 2.0),
                Point2::new(0.9, 0.9),
                Point2::new(2.0, 0.5),
                Point2::new(0.5, 2.0),
            ],
            vec![[0, 1, 3], [0, 3, 2], [1, 4, 3], [3, 5, 2]],
            1.0,
        )
        .unwrap();
        let tree = Quadtree::build(&mesh, 7).unwrap();
        let ne = tree
            .leaves()
            .find(|(r, _, _)| r.min == Point2::new(1.0, 1.0) && r.max == Point2::new(2.0, 2.0))
            .expect("NE quadrant is a leaf");
        assert_eq!(ne.1, LeafRule::Empty);
        assert!(ne.2.is_empty());
        assert!(tree.leaf_rule_violations(&mesh).is_empty());
    }

    #[test]
    fn root_only_storage() {
        // Any mesh puts at least three vertices in the root box, so the
        // smallest buildable tree has one level of children.
        let mesh = single();
        let tree = Quadtree::build(&mesh, 2).unwrap();
        assert_eq!(
            tree.storage_bytes(),
            tree.node_count() * 64 + 4 * tree.leaf_triangle_count()
        );
        assert_eq!(tree.node_count(), 5);
        assert_eq!(tree.leaf_triangle_count(), 4);
        assert_eq!(tree.storage_bytes(), 5 * 64 + 16);
    }

    #[test]
    fn q_below_two_rejected() {
        assert!(Quadtree::build(&single(), 1).is_err());
    }

    #[test]
    fn duplicate_points_hit_depth_cap() {
        let mesh = Triangulation::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
            ],
            vec![[0, 1, 2], [1, 4, 2]],
            1.0,
        )
        .unwrap();
        assert!(matches!(Quadtree::build(&mesh, 7), Err(Error::QuadtreeDepth { cap: 64 })));
    }

    #[test]
    fn outside_root_box_does_no_tests() {
        let mesh = generate_courant_mesh(4).unwrap();
        let tree = Quadtree::build(&mesh, 7).unwrap();
        let (r, cost) = tree.locate_with_cost(&mesh, Point2::new(0.7, 0.0));
        assert_eq!(r.status, Status::Outside);
        assert_eq!(cost, QueryCost::default());
    }

    #[test]
    fn centroids_locate_their_triangle() {
        let mesh = generate_random_delaunay(800, 4).unwrap();
        let tree = Quadtree::build(&mesh, 7).unwrap();
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.corners(t);
            let g = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
            assert_eq!(tree.locate(&mesh, g).triangle, t);
        }
    }

    #[test]
    fn agrees_with_scan_and_leaf_rules_hold() {
        let mesh = generate_random_delaunay(1500, 6).unwrap();
        let tree = Quadtree::build(&mesh, 7).unwrap();
        assert!(tree.leaf_rule_violations(&mesh).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let p = Point2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let r = tree.locate(&mesh, p);
            assert!(r.is_inside());
            let (t, _) = scan_locate(&mesh, p).unwrap();
            if t != r.triangle {
                assert!(mesh.barycentric(t, p).unwrap().min() < 1e-9);
            }
        }
    }

    #[test]
    fn smaller_q_never_shrinks_storage() {
        let mesh = generate_random_delaunay(3000, 2).unwrap();
        let sizes: Vec<usize> = [12, 7, 4, 2]
            .iter()
            .map(|&q| Quadtree::build(&mesh, q).unwrap().node_count())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    }
}
