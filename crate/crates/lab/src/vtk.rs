//! Legacy ASCII VTK unstructured grids holding one unit-vector field `u`.
//!
//! Coordinates and values are written with 17 significant digits so that a
//! round trip reproduces every `f64` exactly. The title line records the
//! mesh parameters, which the reader uses to rebuild the mesh.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use harmap_core::{ShellMesh, SphereField, Vec3};

use crate::error::{LabError, LabResult};

const VTK_TETRA: u8 = 10;

fn num(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").unwrap();
}

fn triple(out: &mut String, v: &Vec3) {
    num(out, v.x);
    out.push(' ');
    num(out, v.y);
    out.push(' ');
    num(out, v.z);
    out.push('\n');
}

pub fn to_string(u: &SphereField) -> String {
    let mesh = u.mesh();
    let n = mesh.vertex_count();
    let t = mesh.tet_count();
    let mut out = String::with_capacity(n * 160 + t * 40);
    out.push_str("# vtk DataFile Version 3.0\n");
    writeln!(out, "harmap field level={} layers={}", mesh.level(), mesh.layers()).unwrap();
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {n} double").unwrap();
    for x in mesh.vertices() {
        triple(&mut out, x);
    }
    writeln!(out, "CELLS {t} {}", 5 * t).unwrap();
    for tet in mesh.tets() {
        writeln!(out, "4 {} {} {} {}", tet[0], tet[1], tet[2], tet[3]).unwrap();
    }
    writeln!(out, "CELL_TYPES {t}").unwrap();
    for _ in 0..t {
        writeln!(out, "{VTK_TETRA}").unwrap();
    }
    writeln!(out, "POINT_DATA {n}").unwrap();
    out.push_str("VECTORS u double\n");
    for v in u.values() {
        triple(&mut out, v);
    }
    out
}

pub fn write(path: &Path, u: &SphereField) -> LabResult<()> {
    std::fs::write(path, to_string(u)).map_err(|e| LabError::io(path, e))
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(format!("field file: {}", msg.into()))
}

fn header_param(title: &str, key: &str) -> LabResult<usize> {
    title
        .split_whitespace()
        .find_map(|w| w.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| bad(format!("title line lacks `{key}=`")))?
        .parse()
        .map_err(|_| bad(format!("unreadable `{key}`")))
}

fn read_vectors<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    n: usize,
    what: &str,
) -> LabResult<Vec<Vec3>> {
    let mut next = || -> LabResult<f64> {
        tokens
            .next()
            .ok_or_else(|| bad(format!("{what}: unexpected end of file")))?
            .parse()
            .map_err(|_| bad(format!("{what}: unreadable number")))
    };
    (0..n).map(|_| Ok(Vec3::new(next()?, next()?, next()?))).collect()
}

/// Parses a file written by [`to_string`], rebuilding the mesh from the
/// title line and checking the point coordinates against it.
pub fn from_str(text: &str) -> LabResult<SphereField> {
    let mut lines = text.lines();
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile")) {
        return Err(bad("missing VTK header"));
    }
    let title = lines.next().ok_or_else(|| bad("missing title line"))?;
    let level = header_param(title, "level")?;
    let layers = header_param(title, "layers")?;
    let mesh = Arc::new(ShellMesh::new(level, layers)?);
    let n = mesh.vertex_count();
    let rest: Vec<&str> = lines.collect();
    let find = |prefix: &str| {
        rest.iter()
            .position(|l| l.starts_with(prefix))
            .ok_or_else(|| bad(format!("missing `{prefix}` section")))
    };
    let points_at = find("POINTS")?;
    let count: usize = rest[points_at]
        .split_whitespace()
        .nth(1)
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad("unreadable POINTS count"))?;
    if count != n {
        return Err(bad(format!("{count} points, mesh has {n}")));
    }
    let mut tokens = rest[points_at + 1..].iter().flat_map(|l| l.split_whitespace());
    let points = read_vectors(&mut tokens, n, "POINTS")?;
    if let Some(i) = points
        .iter()
        .zip(mesh.vertices())
        .position(|(p, q)| (p - q).norm() > 1e-12)
    {
        return Err(bad(format!("point {i} does not match the mesh")));
    }
    let vectors_at = find("VECTORS u")?;
    let mut tokens = rest[vectors_at + 1..].iter().flat_map(|l| l.split_whitespace());
    let values = read_vectors(&mut tokens, n, "VECTORS u")?;
    SphereField::new(mesh, values).map_err(|e| bad(e.to_string()))
}

pub fn read(path: &Path) -> LabResult<SphereField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    from_str(&text)
}
