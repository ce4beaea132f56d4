//! Fixtures shared by the criterion benches.

use std::f64::consts::PI;

use trilocate::harness::{MeshSource, PreparedMesh};
use trilocate::sl::euler_feet;
use trilocate::{Point2, TimeLevel, VectorField};

/// Random Delaunay mesh with exactly `n` nodes, seed 0.
pub fn delaunay(n: usize) -> PreparedMesh {
    PreparedMesh::new(&MeshSource::RandomDelaunay { n_points: n - 4, seed: 0 }).expect("mesh generation")
}

pub fn courant(m: usize) -> PreparedMesh {
    PreparedMesh::new(&MeshSource::Courant(m)).expect("mesh generation")
}

/// The rotating field with both frequencies equal to 2π.
pub fn rotating() -> VectorField {
    VectorField::Rotating { c0: 2.0 * PI, c1: 2.0 * PI }
}

/// Feet of every node at step `n` for Courant number `alpha`.
pub fn feet(mesh: &PreparedMesh, alpha: f64, n: usize) -> Vec<Point2> {
    let dt = alpha * mesh.mesh.space_scale();
    euler_feet(&mesh.mesh, &rotating(), n, dt, TimeLevel::Current)
}
