//! Point location in planar triangulations for semi-Lagrangian advection.
//!
//! Three locators share one interface: a quadtree over the triangles,
//! barycentric walks with three starting-triangle strategies, and direct
//! index arithmetic on structured Courant meshes. The [`sl`] module drives
//! them through a first-order semi-Lagrangian transport scheme and
//! [`harness`] produces the benchmark reports.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod locator;
pub mod mesh;
pub mod quadtree;
pub mod sl;
pub mod structured;
pub mod walk;

pub use error::{Error, Result};
pub use geometry::{Barycentric, Point2, Rect, INSIDE_TOL};
pub use locator::{Locator, LocatorKind};
pub use mesh::{
    generate_courant_mesh, generate_random_delaunay, load_triangle_files, SpanningTree, Triangulation,
    ValidationReport, Violation, WalkContext, NO_NEIGHBOR,
};
pub use quadtree::{LeafRule, Quadtree, QueryCost, DEFAULT_Q};
pub use sl::{sl_advect, sl_advect_with, Profile, SLState, SlConfig, SlRun, TimeLevel, VectorField};
pub use structured::StructuredGrid;
pub use walk::{point_location_bw, LocateStats, LocationResult, Status, WalkStrategy, NO_TRIANGLE};
