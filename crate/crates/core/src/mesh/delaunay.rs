//! Seeded random Delaunay meshes of `[-1/2, 1/2]²`, built by incremental
//! insertion with Lawson edge flips.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Triangulation, NO_NEIGHBOR};
use crate::error::{Error, Result};
use crate::geometry::{incircle, orient, Point2};

const CORNERS: [Point2; 4] = [
    Point2::new(-0.5, -0.5),
    Point2::new(0.5, -0.5),
    Point2::new(0.5, 0.5),
    Point2::new(-0.5, 0.5),
];

/// The four domain corners followed by `n_points` distinct samples drawn
/// uniformly from `[-1/2, 1/2)²` with a ChaCha8 stream seeded by `seed`.
pub fn sample_domain_points(n_points: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(u64, u64)> = CORNERS.iter().map(|c| (c.x.to_bits(), c.y.to_bits())).collect();
    let mut points = CORNERS.to_vec();
    points.reserve(n_points);
    while points.len() < n_points + 4 {
        let p = Point2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            points.push(p);
        }
    }
    points
}

/// Delaunay triangulation of [`sample_domain_points`]`(n_points, seed)`.
///
/// The mesh has `n_points + 4` vertices; `Δx` is set to `1/√N`.
pub fn generate_random_delaunay(n_points: usize, seed: u64) -> Result<Triangulation> {
    if n_points < 3 {
        return Err(Error::Config(format!("need at least 3 random points, got {n_points}")));
    }
    let points = sample_domain_points(n_points, seed);
    let mut builder = Builder::new(points);
    let mut order: Vec<usize> = (4..builder.points.len()).collect();
    order.sort_by_cached_key(|&i| hilbert_index(builder.points[i]));
    for v in order {
        builder.insert(v)?;
    }
    let dx = 1.0 / (builder.points.len() as f64).sqrt();
    let mesh = Triangulation::from_parts_unchecked(builder.points, builder.triangles, builder.neighbors, dx);
    debug_assert!(mesh.validate().is_valid(), "{}", mesh.validate());
    Ok(mesh)
}

/// Position along a 2^16 × 2^16 Hilbert curve over the unit square.
fn hilbert_index(p: Point2) -> u64 {
    const SIDE: u32 = 1 << 16;
    let scale = |c: f64| (((c + 0.5) * SIDE as f64) as u32).min(SIDE - 1);
    let (mut x, mut y) = (scale(p.x), scale(p.y));
    let mut d = 0u64;
    let mut s = SIDE / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = SIDE - 1 - x;
                y = SIDE - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

struct Builder {
    points: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[usize; 3]>,
    last: usize,
    stack: Vec<(usize, usize)>,
}

enum Hit {
    Interior(usize),
    Edge(usize, usize),
}

impl Builder {
    fn new(points: Vec<Point2>) -> Self {
        Builder {
            points,
            triangles: vec![[0, 1, 2], [0, 2, 3]],
            neighbors: vec![[NO_NEIGHBOR, 1, NO_NEIGHBOR], [NO_NEIGHBOR, NO_NEIGHBOR, 0]],
            last: 0,
            stack: Vec::new(),
        }
    }

    fn orient_opposite(&self, t: usize, k: usize, p: Point2) -> f64 {
        let tri = self.triangles[t];
        orient(self.points[tri[(k + 1) % 3]], self.points[tri[(k + 2) % 3]], p)
    }

    fn classify(&self, t: usize, p: Point2) -> Option<[f64; 3]> {
        let o = [0, 1, 2].map(|k| self.orient_opposite(t, k, p));
        o.iter().all(|&v| v >= 0.0).then_some(o)
    }

    fn locate(&self, p: Point2) -> Result<Hit> {
        let mut t = self.last;
        let cap = 3 * self.triangles.len() + 16;
        let mut found = None;
        'walk: for _ in 0..cap {
            for k in 0..3 {
                if self.orient_opposite(t, k, p) < 0.0 {
                    let next = self.neighbors[t][k];
                    if next == NO_NEIGHBOR {
                        return Err(Error::InvalidMesh("insertion point outside the domain".into()));
                    }
                    t = next;
                    continue 'walk;
                }
            }
            found = Some(t);
            break;
        }
        let t = match found {
            Some(t) => t,
            None => (0..self.triangles.len())
                .find(|&t| self.classify(t, p).is_some())
                .ok_or_else(|| Error::InvalidMesh("insertion point not found".into()))?,
        };
        let o = [0, 1, 2].map(|k| self.orient_opposite(t, k, p));
        let zeros: Vec<usize> = (0..3).filter(|&k| o[k] == 0.0).collect();
        match zeros[..] {
            [] => Ok(Hit::Interior(t)),
            [k] => Ok(Hit::Edge(t, k)),
            _ => Err(Error::InvalidMesh("duplicate insertion point".into())),
        }
    }

    fn replace_neighbor(&mut self, t: usize, old: usize, new: usize) {
        if t == NO_NEIGHBOR {
            return;
        }
        if let Some(slot) = self.neighbors[t].iter_mut().find(|n| **n == old) {
            *slot = new;
        }
    }

    fn insert(&mut self, v: usize) -> Result<()> {
        let p = self.points[v];
        match self.locate(p)? {
            Hit::Interior(t) => self.split_triangle(t, v),
            Hit::Edge(t, k) => self.split_edge(t, k, v),
        }
        self.legalize();
        Ok(())
    }

    fn split_triangle(&mut self, t: usize, v: usize) {
        let [a, b, c] = self.triangles[t];
        let [na, nb, nc] = self.neighbors[t];
        let t1 = self.triangles.len();
        let t2 = t1 + 1;
        self.triangles[t] = [a, b, v];
        self.neighbors[t] = [t1, t2, nc];
        self.triangles.push([b, c, v]);
        self.neighbors.push([t2, t, na]);
        self.triangles.push([c, a, v]);
        self.neighbors.push([t, t1, nb]);
        self.replace_neighbor(na, t, t1);
        self.replace_neighbor(nb, t, t2);
        self.stack.extend([(t, v), (t1, v), (t2, v)]);
        self.last = t;
    }

    fn split_edge(&mut self, t: usize, k: usize, v: usize) {
        let tri = self.triangles[t];
        let nbs = self.neighbors[t];
        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let n_opp_b = nbs[(k + 1) % 3];
        let n_opp_c = nbs[(k + 2) % 3];
        let u = nbs[k];

        let t0 = t;
        let t1 = self.triangles.len();
        self.triangles[t0] = [a, b, v];
        self.triangles.push([a, v, c]);
        self.neighbors.push([NO_NEIGHBOR; 3]);
        self.replace_neighbor(n_opp_b, t, t1);

        if u == NO_NEIGHBOR {
            self.neighbors[t0] = [NO_NEIGHBOR, t1, n_opp_c];
            self.neighbors[t1] = [NO_NEIGHBOR, n_opp_b, t0];
            self.stack.extend([(t0, v), (t1, v)]);
        } else {
            let j = self.neighbors[u].iter().position(|&n| n == t).expect("neighbor symmetry");
            let utri = self.triangles[u];
            let unb = self.neighbors[u];
            let w = utri[j];
            debug_assert_eq!((utri[(j + 1) % 3], utri[(j + 2) % 3]), (c, b));
            let u_opp_c = unb[(j + 1) % 3];
            let u_opp_b = unb[(j + 2) % 3];
            let u0 = u;
            let u1 = self.triangles.len();
            self.triangles[u0] = [w, c, v];
            self.triangles.push([w, v, b]);
            self.neighbors.push([NO_NEIGHBOR; 3]);
            self.replace_neighbor(u_opp_c, u, u1);

            self.neighbors[t0] = [u1, t1, n_opp_c];
            self.neighbors[t1] = [u0, n_opp_b, t0];
            self.neighbors[u0] = [t1, u1, u_opp_b];
            self.neighbors[u1] = [t0, u_opp_c, u0];
            self.stack.extend([(t0, v), (t1, v), (u0, v), (u1, v)]);
        }
        self.last = t0;
    }

    /// Flips edges opposite the new vertex until every one is locally Delaunay.
    fn legalize(&mut self) {
        while let Some((t, v)) = self.stack.pop() {
            let Some(k) = self.triangles[t].iter().position(|&x| x == v) else {
                continue;
            };
            let u = self.neighbors[t][k];
            if u == NO_NEIGHBOR {
                continue;
            }
            let tri = self.triangles[t];
            let (p1, p2) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let j = self.neighbors[u].iter().position(|&n| n == t).expect("neighbor symmetry");
            let w = self.triangles[u][j];
            let pts = |i: usize| self.points[i];
            if incircle(pts(v), pts(p1), pts(p2), pts(w)) <= 0.0 {
                continue;
            }
            let a = self.neighbors[t][(k + 2) % 3];
            let b = self.neighbors[t][(k + 1) % 3];
            let c = self.neighbors[u][(j + 1) % 3];
            let d = self.neighbors[u][(j + 2) % 3];
            self.triangles[t] = [v, p1, w];
            self.neighbors[t] = [c, u, a];
            self.triangles[u] = [v, w, p2];
            self.neighbors[u] = [d, b, t];
            self.replace_neighbor(c, u, t);
            self.replace_neighbor(b, t, u);
            self.stack.push((t, v));
            self.stack.push((u, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area2;

    /// Every non-collinear triple whose circumcircle strictly contains no
    /// other point, compared as sorted vertex triples.
    fn brute_force_delaunay(points: &[Point2]) -> Vec<[usize; 3]> {
        let n = points.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let area = signed_area2(points[a], points[b], points[c]);
                    if area == 0.0 {
                        continue;
                    }
                    let (p, q, r) = if area > 0.0 { (a, b, c) } else { (a, c, b) };
                    let empty = (0..n)
                        .filter(|&d| d != a && d != b && d != c)
                        .all(|d| incircle(points[p], points[q], points[r], points[d]) <= 0.0);
                    if empty {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    fn sorted_triangles(mesh: &Triangulation) -> Vec<[usize; 3]> {
        let mut tris: Vec<[usize; 3]> = mesh
            .triangles()
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort_unstable();
                s
            })
            .collect();
        tris.sort_unstable();
        tris
    }

    #[test]
    fn three_samples_match_brute_force() {
        for seed in 0..20 {
            let mesh = generate_random_delaunay(3, seed).unwrap();
            assert_eq!(mesh.num_vertices(), 7);
            let oracle = brute_force_delaunay(mesh.vertices());
            assert_eq!(mesh.num_triangles(), oracle.len(), "seed {seed}");
            assert_eq!(mesh.num_triangles(), 8);
            assert_eq!(sorted_triangles(&mesh), oracle, "seed {seed}");
        }
    }

    #[test]
    fn small_meshes_match_brute_force() {
        for (n, seed) in [(10, 1), (25, 2), (40, 3)] {
            let mesh = generate_random_delaunay(n, seed).unwrap();
            assert_eq!(sorted_triangles(&mesh), brute_force_delaunay(mesh.vertices()));
        }
    }

    #[test]
    fn empty_circumcircle_and_valid() {
        for (n, seed) in [(50, 7), (200, 11)] {
            let mesh = generate_random_delaunay(n, seed).unwrap();
            let report = mesh.validate();
            assert!(report.is_valid(), "{report}");
            assert_eq!(mesh.num_triangles(), 2 * mesh.num_vertices() - 2 - 4);
            for t in 0..mesh.num_triangles() {
                let [a, b, c] = mesh.corners(t);
                // Circumcircle via the standard closed form.
                let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
                let sq = |p: Point2| p.x * p.x + p.y * p.y;
                let ux = (sq(a) * (b.y - c.y) + sq(b) * (c.y - a.y) + sq(c) * (a.y - b.y)) / d;
                let uy = (sq(a) * (c.x - b.x) + sq(b) * (a.x - c.x) + sq(c) * (b.x - a.x)) / d;
                let center = Point2::new(ux, uy);
                let r = center.dist(a);
                for (i, &p) in mesh.vertices().iter().enumerate() {
                    if mesh.triangles()[t].contains(&i) {
                        continue;
                    }
                    assert!(center.dist(p) >= r - 1e-12, "vertex {i} inside circumcircle of {t}");
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_random_delaunay(500, 42).unwrap();
        let b = generate_random_delaunay(500, 42).unwrap();
        let bits = |m: &Triangulation| -> Vec<(u64, u64)> {
            m.vertices().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.triangles(), b.triangles());
        let c = generate_random_delaunay(500, 43).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn too_few_points() {
        assert!(generate_random_delaunay(2, 0).is_err());
    }

    #[test]
    fn hilbert_index_is_a_bijection_on_a_coarse_grid() {
        let mut seen = HashSet::new();
        for i in 0..16 {
            for j in 0..16 {
                let p = Point2::new(-0.5 + (i as f64 + 0.5) / 16.0, -0.5 + (j as f64 + 0.5) / 16.0);
                assert!(seen.insert(hilbert_index(p) >> 24));
            }
        }
    }
}
