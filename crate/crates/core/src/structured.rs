//! Constant-time location on the structured Courant triangulation.

use crate::error::Result;
use crate::geometry::{Barycentric, Point2};
use crate::mesh::{generate_courant_mesh, Triangulation};
use crate::walk::{LocateStats, LocationResult, Status, NO_TRIANGLE};

/// The Courant triangulation of `[-1/2, 1/2]²` with `m` cells per side.
#[derive(Clone, Debug)]
pub struct StructuredGrid {
    m: usize,
    dx: f64,
    mesh: Triangulation,
}

impl StructuredGrid {
    pub fn new(m: usize) -> Result<Self> {
        let mesh = generate_courant_mesh(m)?;
        Ok(StructuredGrid { m, dx: 1.0 / m as f64, mesh })
    }

    pub fn cells_per_side(&self) -> usize {
        self.m
    }

    pub fn space_scale(&self) -> f64 {
        self.dx
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    /// Locates `p` from its cell indices and in-cell offsets, then computes
    /// its barycentric coordinates in the chosen triangle.
    pub fn locate(&self, p: Point2) -> LocationResult {
        if !(-0.5..=0.5).contains(&p.x) || !(-0.5..=0.5).contains(&p.y) {
            return LocationResult::outside(NO_TRIANGLE, Barycentric::default(), 0);
        }
        let (sx, sy) = (p.x + 0.5, p.y + 0.5);
        let last = self.m - 1;
        let l = ((sx / self.dx).floor() as usize).min(last);
        let m = ((sy / self.dx).floor() as usize).min(last);
        let cell = 2 * (self.m * m + l);
        let tri = if sx - l as f64 * self.dx < sy - m as f64 * self.dx {
            cell
        } else {
            cell + 1
        };
        LocationResult {
            triangle: tri,
            coords: self.mesh.barycentric_unchecked(tri, p),
            steps: 0,
            status: Status::Inside,
            fallback: false,
        }
    }

    pub fn locate_all(&self, queries: &[Point2]) -> (Vec<LocationResult>, LocateStats) {
        let mut stats = LocateStats::default();
        let results = queries
            .iter()
            .map(|&p| {
                let r = self.locate(p);
                stats.record(&r);
                if r.is_inside() {
                    stats.triangle_tests += 1;
                }
                r
            })
            .collect();
        (results, stats)
    }
}
