//! A single interface over the quadtree, walk and structured locators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::{Triangulation, WalkContext};
use crate::quadtree::Quadtree;
use crate::structured::StructuredGrid;
use crate::walk::{point_location_bw, point_location_bw_par, walk_storage_bytes, LocateStats, LocationResult, WalkStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocatorKind {
    Quadtree,
    Walk(WalkStrategy),
    Structured,
}

impl LocatorKind {
    pub const ALL: [LocatorKind; 5] = [
        LocatorKind::Quadtree,
        LocatorKind::Walk(WalkStrategy::A),
        LocatorKind::Walk(WalkStrategy::B),
        LocatorKind::Walk(WalkStrategy::C),
        LocatorKind::Structured,
    ];
}

impl fmt::Display for LocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocatorKind::Quadtree => f.write_str("quadtree"),
            LocatorKind::Walk(s) => write!(f, "walk-{s}"),
            LocatorKind::Structured => f.write_str("structured"),
        }
    }
}

impl FromStr for LocatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quadtree" | "qt" => Ok(LocatorKind::Quadtree),
            "structured" | "direct" => Ok(LocatorKind::Structured),
            other => match other.strip_prefix("walk-") {
                Some(s) => Ok(LocatorKind::Walk(s.parse()?)),
                None => Err(Error::Config(format!(
                    "unknown locator {s:?} (expected quadtree, walk-a, walk-b, walk-c or structured)"
                ))),
            },
        }
    }
}

/// A ready-to-query locator with whatever state it carries between sweeps.
#[derive(Clone, Debug)]
pub enum Locator {
    Quadtree(Quadtree),
    Walk {
        ctx: WalkContext,
        strategy: WalkStrategy,
        parallel: bool,
    },
    Structured(StructuredGrid),
}

impl Locator {
    /// Builds a walk locator, with the spanning tree only for strategy C.
    pub fn walk(mesh: &Triangulation, strategy: WalkStrategy, seed: u64) -> Result<Self> {
        let ctx = match strategy {
            WalkStrategy::C => WalkContext::with_spanning_tree(mesh, seed)?,
            _ => WalkContext::new(mesh, seed)?,
        };
        Ok(Locator::Walk {
            ctx,
            strategy,
            parallel: false,
        })
    }

    pub fn kind(&self) -> LocatorKind {
        match self {
            Locator::Quadtree(_) => LocatorKind::Quadtree,
            Locator::Walk { strategy, .. } => LocatorKind::Walk(*strategy),
            Locator::Structured(_) => LocatorKind::Structured,
        }
    }

    /// Locates one query per mesh node (walks) or an arbitrary batch
    /// (quadtree, structured).
    pub fn locate_all(&mut self, mesh: &Triangulation, queries: &[Point2]) -> Result<(Vec<LocationResult>, LocateStats)> {
        match self {
            Locator::Quadtree(tree) => Ok(tree.locate_all(mesh, queries)),
            Locator::Walk {
                ctx,
                strategy,
                parallel: true,
            } if *strategy != WalkStrategy::C => point_location_bw_par(mesh, ctx, queries, *strategy),
            Locator::Walk { ctx, strategy, .. } => point_location_bw(mesh, ctx, queries, *strategy),
            Locator::Structured(grid) => Ok(grid.locate_all(queries)),
        }
    }

    /// Locator-specific storage under the 4/8/8 model, excluding the mesh.
    pub fn storage_bytes(&self, mesh: &Triangulation) -> usize {
        match self {
            Locator::Quadtree(tree) => tree.storage_bytes(),
            Locator::Walk { strategy, .. } => walk_storage_bytes(mesh, *strategy),
            Locator::Structured(_) => 0,
        }
    }

    pub fn threads(&self) -> usize {
        match self {
            Locator::Walk {
                parallel: true,
                strategy,
                ..
            } if *strategy != WalkStrategy::C => rayon::current_num_threads(),
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trips_through_strings() {
        for k in LocatorKind::ALL {
            assert_eq!(k.to_string().parse::<LocatorKind>().unwrap(), k);
        }
        assert!("walk-d".parse::<LocatorKind>().is_err());
        assert!("kdtree".parse::<LocatorKind>().is_err());
    }
}
