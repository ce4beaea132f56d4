//! Per-node walk state: starting triangles and the breadth-first spanning
//! tree used to order nodes for the parent-seeded walk.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Triangulation;
use crate::error::{Error, Result};

/// Breadth-first spanning tree over the vertex adjacency graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: usize,
    /// Parent of each node; the root is its own parent.
    pub parents: Vec<usize>,
    /// Nodes in visit order; every parent precedes its children.
    pub order: Vec<usize>,
}

impl SpanningTree {
    /// Number of levels below the root.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.parents.len()];
        for &i in &self.order {
            let p = self.parents[i];
            if p != i {
                level[i] = level[p] + 1;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }
}

/// Walk state carried across time steps.
#[derive(Clone, Debug)]
pub struct WalkContext {
    /// Starting triangle for the walk of each node.
    pub initial_triangles: Vec<usize>,
    /// Required by the parent-seeded strategy only.
    pub tree: Option<SpanningTree>,
}

impl WalkContext {
    /// Random incident starting triangles, no spanning tree.
    pub fn new(mesh: &Triangulation, seed: u64) -> Result<Self> {
        Ok(WalkContext {
            initial_triangles: assign_initial_triangles(mesh, seed)?,
            tree: None,
        })
    }

    /// Random incident starting triangles plus the spanning tree.
    pub fn with_spanning_tree(mesh: &Triangulation, seed: u64) -> Result<Self> {
        Ok(WalkContext {
            initial_triangles: assign_initial_triangles(mesh, seed)?,
            tree: Some(build_spanning_tree(mesh)?),
        })
    }
}

/// Breadth-first spanning tree rooted at the node closest to the centre of
/// the mesh bounding box (lowest index on ties). Neighbors are visited in
/// ascending index order.
pub fn build_spanning_tree(mesh: &Triangulation) -> Result<SpanningTree> {
    let n = mesh.num_vertices();
    if n == 0 {
        return Err(Error::InvalidMesh("empty mesh".into()));
    }
    let center = mesh.bounding_box().center();
    let root = mesh
        .vertices()
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(best, bd), (i, p)| {
            let d = p.dist2(center);
            if d < bd {
                (i, d)
            } else {
                (best, bd)
            }
        })
        .0;

    let adjacency = mesh.vertex_adjacency();
    let mut parents = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    parents[root] = root;
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &k in &adjacency[i] {
            if parents[k] == usize::MAX {
                parents[k] = i;
                queue.push_back(k);
            }
        }
    }
    if order.len() < n {
        let unreached = (0..n).filter(|&i| parents[i] == usize::MAX).collect();
        return Err(Error::Disconnected { root, unreached });
    }
    Ok(SpanningTree { root, parents, order })
}

/// One uniformly random incident triangle per node, from a ChaCha8 stream
/// seeded by `seed`.
pub fn assign_initial_triangles(mesh: &Triangulation, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mesh.incident_triangles()
        .into_iter()
        .enumerate()
        .map(|(i, inc)| {
            if inc.is_empty() {
                Err(Error::IsolatedVertex(i))
            } else {
                Ok(inc[rng.gen_range(0..inc.len())])
            }
        })
        .collect()
}
