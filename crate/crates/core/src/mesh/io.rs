//! Reader and writer for the `.node` / `.ele` text formats of the Triangle
//! mesh generator.
//!
//! Lines starting with `#` (and trailing `#` comments) are ignored. The
//! index base (0 or 1) is taken from the first point listed in the `.node`
//! file and applied to the vertex references in the `.ele` file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{build_neighbors, Triangulation};
use crate::error::{Error, Result};
use crate::geometry::{signed_area2, Point2};

const NODE: &str = "node";
const ELE: &str = "ele";

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse<T: std::str::FromStr>(file: &'static str, line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        file,
        line,
        msg: format!("cannot parse {what} from {field:?}"),
    })
}

fn header_field(file: &'static str, line: usize, fields: &[&str], k: usize, what: &str) -> Result<usize> {
    let raw = fields.get(k).ok_or_else(|| Error::Header {
        file,
        line,
        msg: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| Error::Header {
        file,
        line,
        msg: format!("cannot parse {what} from {raw:?}"),
    })
}

/// Parses Triangle `.node` and `.ele` text into a [`Triangulation`].
///
/// Clockwise elements are reoriented; `Δx` is estimated as `1/√N`.
pub fn load_triangle_format(node_text: &str, ele_text: &str) -> Result<Triangulation> {
    let mut nodes = records(node_text);
    let (hline, header) = nodes.next().ok_or(Error::Header {
        file: NODE,
        line: 1,
        msg: "empty file".into(),
    })?;
    let count = header_field(NODE, hline, &header, 0, "point count")?;
    let dim = header_field(NODE, hline, &header, 1, "dimension")?;
    if dim != 2 {
        return Err(Error::Header {
            file: NODE,
            line: hline,
            msg: format!("dimension must be 2, found {dim}"),
        });
    }
    let n_attrs = header.get(2).map_or(Ok(0), |_| header_field(NODE, hline, &header, 2, "attribute count"))?;
    let n_markers = header.get(3).map_or(Ok(0), |_| header_field(NODE, hline, &header, 3, "marker count"))?;
    if n_markers > 1 {
        return Err(Error::Header {
            file: NODE,
            line: hline,
            msg: format!("boundary marker count must be 0 or 1, found {n_markers}"),
        });
    }

    let mut vertices = Vec::with_capacity(count);
    let mut base: Option<i64> = None;
    for (line, fields) in nodes {
        if vertices.len() == count {
            return Err(Error::Parse {
                file: NODE,
                line,
                msg: format!("more than the {count} points declared in the header"),
            });
        }
        let expected = 3 + n_attrs + n_markers;
        if fields.len() != expected {
            return Err(Error::Parse {
                file: NODE,
                line,
                msg: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let idx: i64 = parse(NODE, line, fields[0], "point index")?;
        let b = *base.get_or_insert(idx);
        if b != 0 && b != 1 {
            return Err(Error::Parse {
                file: NODE,
                line,
                msg: format!("first point index must be 0 or 1, found {idx}"),
            });
        }
        if idx - b != vertices.len() as i64 {
            return Err(Error::Parse {
                file: NODE,
                line,
                msg: format!("point index {idx} out of sequence"),
            });
        }
        let x: f64 = parse(NODE, line, fields[1], "x coordinate")?;
        let y: f64 = parse(NODE, line, fields[2], "y coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse {
                file: NODE,
                line,
                msg: "non-finite coordinate".into(),
            });
        }
        vertices.push(Point2::new(x, y));
    }
    if vertices.len() != count {
        return Err(Error::Header {
            file: NODE,
            line: hline,
            msg: format!("header declares {count} points, file lists {}", vertices.len()),
        });
    }
    let base = base.unwrap_or(0);

    let mut eles = records(ele_text);
    let (eline, eheader) = eles.next().ok_or(Error::Header {
        file: ELE,
        line: 1,
        msg: "empty file".into(),
    })?;
    let n_tri = header_field(ELE, eline, &eheader, 0, "triangle count")?;
    let per = header_field(ELE, eline, &eheader, 1, "nodes per triangle")?;
    if per != 3 {
        return Err(Error::Header {
            file: ELE,
            line: eline,
            msg: format!("only 3-node triangles are supported, found {per}"),
        });
    }
    let e_attrs = eheader.get(2).map_or(Ok(0), |_| header_field(ELE, eline, &eheader, 2, "attribute count"))?;

    let mut triangles = Vec::with_capacity(n_tri);
    let mut lines = Vec::with_capacity(n_tri);
    for (line, fields) in eles {
        if triangles.len() == n_tri {
            return Err(Error::Parse {
                file: ELE,
                line,
                msg: format!("more than the {n_tri} triangles declared in the header"),
            });
        }
        if fields.len() != 4 + e_attrs {
            return Err(Error::Parse {
                file: ELE,
                line,
                msg: format!("expected {} fields, found {}", 4 + e_attrs, fields.len()),
            });
        }
        let mut t = [0usize; 3];
        for k in 0..3 {
            let raw: i64 = parse(ELE, line, fields[1 + k], "vertex index")?;
            let i = raw - base;
            if i < 0 || i >= count as i64 {
                return Err(Error::VertexOutOfRange { line, index: raw, count });
            }
            t[k] = i as usize;
        }
        let area2 = signed_area2(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if area2 == 0.0 || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::ZeroArea { line });
        }
        if area2 < 0.0 {
            t.swap(1, 2);
        }
        triangles.push(t);
        lines.push(line);
    }
    if triangles.len() != n_tri {
        return Err(Error::Header {
            file: ELE,
            line: eline,
            msg: format!("header declares {n_tri} triangles, file lists {}", triangles.len()),
        });
    }

    let neighbors = build_neighbors(&triangles).map_err(|e| Error::NonManifoldEdge {
        line: lines[e.triangle],
        a: (e.a as i64 + base) as usize,
        b: (e.b as i64 + base) as usize,
    })?;
    let dx = 1.0 / (vertices.len().max(1) as f64).sqrt();
    Ok(Triangulation::from_parts_unchecked(vertices, triangles, neighbors, dx))
}

/// Reads `<base>.node` and `<base>.ele`.
pub fn load_triangle_files(base: impl AsRef<Path>) -> Result<Triangulation> {
    let base = base.as_ref();
    let node_path = base.with_extension("node");
    let ele_path = base.with_extension("ele");
    let node = fs::read_to_string(&node_path).map_err(|e| Error::io(&node_path, e))?;
    let ele = fs::read_to_string(&ele_path).map_err(|e| Error::io(&ele_path, e))?;
    load_triangle_format(&node, &ele)
}

/// `.node` text with 1-based indices, no attributes and no markers.
pub fn write_node(mesh: &Triangulation) -> String {
    let mut out = String::with_capacity(mesh.num_vertices() * 48);
    let _ = writeln!(out, "{} 2 0 0", mesh.num_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", i + 1, p.x, p.y);
    }
    out
}

/// `.ele` text with 1-based indices and no attributes.
pub fn write_ele(mesh: &Triangulation) -> String {
    let mut out = String::with_capacity(mesh.num_triangles() * 32);
    let _ = writeln!(out, "{} 3 0", mesh.num_triangles());
    for (j, t) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(out, "{} {} {} {}", j + 1, t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Writes `<base>.node` and `<base>.ele`.
pub fn write_triangle_files(mesh: &Triangulation, base: impl AsRef<Path>) -> Result<()> {
    let base = base.as_ref();
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let node_path = base.with_extension("node");
    let ele_path = base.with_extension("ele");
    fs::write(&node_path, write_node(mesh)).map_err(|e| Error::io(&node_path, e))?;
    fs::write(&ele_path, write_ele(mesh)).map_err(|e| Error::io(&ele_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_courant_mesh, NO_NEIGHBOR};

    #[test]
    fn single_triangle() {
        let mesh = load_triangle_format(
            "3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n",
            "1 3 0\n1 1 2 3\n",
        )
        .unwrap();
        assert_eq!(mesh.num_vertices(), 3);
        assert_eq!(mesh.num_triangles(), 1);
        assert_eq!(mesh.neighbors()[0], [NO_NEIGHBOR; 3]);
        assert!((mesh.space_scale() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_triangles_opposite_vertex_convention() {
        let node = "# unit square\n4 2 0 1\n1 0 0 1\n2 1 0 1\n3 1 1 1\n4 0 1 1\n";
        let ele = "2 3 0\n1 1 2 4\n2 2 3 4\n";
        let mesh = load_triangle_format(node, ele).unwrap();
        // Shared edge 2-4 is opposite vertex 1 of triangle 1.
        assert_eq!(mesh.neighbors()[0], [1, NO_NEIGHBOR, NO_NEIGHBOR]);
        assert_eq!(mesh.neighbors()[1], [NO_NEIGHBOR, 0, NO_NEIGHBOR]);
        assert!(mesh.validate().is_valid());
    }

    #[test]
    fn zero_based_and_clockwise_input() {
        let node = "3 2\n0 0 0\n1 1 0\n2 0 1\n";
        let ele = "1 3\n0 0 2 1\n";
        let mesh = load_triangle_format(node, ele).unwrap();
        assert_eq!(mesh.triangles()[0], [0, 1, 2]);
        assert!(mesh.validate().is_valid());
    }

    #[test]
    fn out_of_range_vertex_names_line() {
        let node = "4 2 0 0\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n";
        let ele = "2 3 0\n1 1 2 4\n2 2 5 4\n";
        match load_triangle_format(node, ele) {
            Err(Error::VertexOutOfRange { line: 3, index: 5, count: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_area_rejected() {
        let node = "3 2 0 0\n1 0 0\n2 1 1\n3 2 2\n";
        let ele = "1 3 0\n1 1 2 3\n";
        assert!(matches!(load_triangle_format(node, ele), Err(Error::ZeroArea { line: 2 })));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let node = "5 2 0 0\n1 0 0\n2 1 0\n3 0 1\n4 0 -1\n5 1 1\n";
        let ele = "3 3 0\n1 1 2 3\n2 1 4 2\n3 1 2 5\n";
        assert!(matches!(
            load_triangle_format(node, ele),
            Err(Error::NonManifoldEdge { line: 4, a: 1, b: 2 })
        ));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            load_triangle_format("three 2 0 0\n", "0 3 0\n"),
            Err(Error::Header { file: "node", line: 1, .. })
        ));
        assert!(matches!(
            load_triangle_format("3 3 0 0\n", "0 3 0\n"),
            Err(Error::Header { .. })
        ));
        assert!(matches!(
            load_triangle_format("3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n", "1 4 0\n1 1 2 3 4\n"),
            Err(Error::Header { file: "ele", .. })
        ));
    }

    #[test]
    fn writer_round_trips_exactly() {
        let mesh = generate_courant_mesh(3).unwrap();
        let back = load_triangle_format(&write_node(&mesh), &write_ele(&mesh)).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.neighbors(), mesh.neighbors());
    }
}
