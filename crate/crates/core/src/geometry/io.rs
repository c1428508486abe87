//! ASCII OBJ and PLY reading and writing.

use std::fmt::Write as _;
use std::path::Path;

use super::mesh::{TriMesh, Vec3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::InvalidArgument(format!(
                "unsupported mesh extension: {}",
                path.display()
            ))),
        }
    }
}

/// Reads an OBJ or PLY file, removes degenerate faces and normalizes the
/// result into the centered unit box.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    let mut mesh = read_mesh(path)?;
    mesh.remove_degenerate();
    if mesh.is_empty() {
        return Err(Error::Mesh(format!("{} contains no usable faces", path.display())));
    }
    if mesh.has_nonmanifold_edges() {
        return Err(Error::Mesh(format!(
            "{} has edges shared by more than two faces",
            path.display()
        )));
    }
    mesh.normalize()?;
    Ok(mesh)
}

/// Reads a mesh without cleanup or normalization.
pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match MeshFormat::from_path(path)? {
        MeshFormat::Obj => parse_obj(&text, path),
        MeshFormat::Ply => parse_ply(&text, path),
    }
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Fan-triangulates a polygon given as vertex indices.
fn push_polygon(faces: &mut Vec<[usize; 3]>, poly: &[usize]) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

pub fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(path, lineno, format!("bad vertex: {e}")))?;
                if coords.len() != 3 {
                    return Err(parse_err(path, lineno, "vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in parts {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| parse_err(path, lineno, format!("bad face index {tok}")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(path, lineno, format!("face index {i} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(parse_err(path, lineno, "face needs at least 3 vertices"));
                }
                push_polygon(&mut faces, &poly);
            }
            _ => {}
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(Error::Mesh(format!("{} is empty", path.display())));
    }
    TriMesh::new(vertices, faces)
}

pub fn parse_ply(text: &str, path: &Path) -> Result<TriMesh> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(parse_err(path, 1, "missing 'ply' magic")),
    }
    let mut n_vertices = None;
    let mut n_faces = None;
    let mut vertex_props: Vec<String> = Vec::new();
    let mut current = "";
    let mut header_done = false;
    for (lineno, line) in lines.by_ref() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("format") => {
                if parts.next() != Some("ascii") {
                    return Err(parse_err(path, lineno + 1, "only ascii PLY is supported"));
                }
            }
            Some("element") => {
                let name = parts.next().unwrap_or("");
                let count: usize = parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(path, lineno + 1, "bad element count"))?;
                match name {
                    "vertex" => {
                        n_vertices = Some(count);
                        current = "vertex";
                    }
                    "face" => {
                        n_faces = Some(count);
                        current = "face";
                    }
                    _ => current = "other",
                }
            }
            Some("property") if current == "vertex" => {
                if let Some(name) = parts.last() {
                    vertex_props.push(name.to_string());
                }
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(parse_err(path, 1, "unterminated header"));
    }
    let nv = n_vertices.ok_or_else(|| parse_err(path, 1, "no vertex element"))?;
    let nf = n_faces.ok_or_else(|| parse_err(path, 1, "no face element"))?;
    let pos = |name: &str| vertex_props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(parse_err(path, 1, "vertex element lacks x/y/z")),
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "truncated vertex list"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad vertex: {e}")))?;
        if vals.len() < vertex_props.len() {
            return Err(parse_err(path, lineno + 1, "too few vertex properties"));
        }
        vertices.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "truncated face list"))?;
        let vals: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad face: {e}")))?;
        let count = *vals.first().ok_or_else(|| parse_err(path, lineno + 1, "empty face"))?;
        if count < 3 || vals.len() < count + 1 {
            return Err(parse_err(path, lineno + 1, "malformed face"));
        }
        let poly = &vals[1..=count];
        if poly.iter().any(|&i| i >= nv) {
            return Err(parse_err(path, lineno + 1, "face index out of range"));
        }
        push_polygon(&mut faces, poly);
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(Error::Mesh(format!("{} is empty", path.display())));
    }
    TriMesh::new(vertices, faces)
}

pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices.len() * 40 + mesh.faces.len() * 20);
    for v in &mesh.vertices {
        writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    for f in &mesh.faces {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    s
}

pub fn to_ply_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "ply\nformat ascii 1.0").unwrap();
    writeln!(s, "element vertex {}", mesh.vertices.len()).unwrap();
    writeln!(s, "property double x\nproperty double y\nproperty double z").unwrap();
    writeln!(s, "element face {}", mesh.faces.len()).unwrap();
    writeln!(s, "property list uchar int vertex_indices\nend_header").unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    for f in &mesh.faces {
        writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    s
}

pub fn save_mesh(mesh: &TriMesh, path: &Path) -> Result<()> {
    let text = match MeshFormat::from_path(path)? {
        MeshFormat::Obj => to_obj_string(mesh),
        MeshFormat::Ply => to_ply_string(mesh),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{box_mesh, icosphere};

    fn tmp(name: &str, contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        std::fs::write(&p, contents).unwrap();
        (dir, p)
    }

    #[test]
    fn unit_cube_obj_loads_normalized() {
        let cube = box_mesh(Vec3::new(1.0, 2.0, 3.0), Vec3::repeat(2.0));
        let (_d, p) = tmp("cube.obj", &to_obj_string(&cube));
        let m = load_mesh(&p).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.faces.len(), 12);
        let b = m.bbox();
        assert_eq!(b.min, Vec3::repeat(-0.5));
        assert_eq!(b.max, Vec3::repeat(0.5));
    }

    #[test]
    fn icosphere_ply_counts_preserved() {
        let ico = icosphere(2);
        let (_d, p) = tmp("ico.ply", &to_ply_string(&ico));
        let m = load_mesh(&p).unwrap();
        assert_eq!(m.vertices.len(), ico.vertices.len());
        assert_eq!(m.faces.len(), ico.faces.len());
    }

    #[test]
    fn quads_become_two_triangles() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nf 1 2 3 4\nf 1/1/1 2/2/2 5/5/5\n";
        let m = parse_obj(text, Path::new("q.obj")).unwrap();
        assert_eq!(m.faces.len(), 3);
        assert_eq!(m.faces[0], [0, 1, 2]);
        assert_eq!(m.faces[1], [0, 2, 3]);
    }

    #[test]
    fn errors_are_reported() {
        assert!(load_mesh(Path::new("/nonexistent/file.obj")).is_err());
        let (_d, p) = tmp("empty.obj", "# nothing\n");
        assert!(load_mesh(&p).is_err());
        let (_d2, p2) = tmp("bad.obj", "v 0 0 0\nf 1 2 3\n");
        assert!(matches!(load_mesh(&p2), Err(Error::Parse { .. })));
        // three faces on one edge
        let (_d3, p3) = tmp(
            "nm.obj",
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n",
        );
        assert!(matches!(load_mesh(&p3), Err(Error::Mesh(_))));
    }

    #[test]
    fn ply_roundtrip_is_exact() {
        let mut m = icosphere(1);
        m.transform(|p| p * 0.37);
        let back = parse_ply(&to_ply_string(&m), Path::new("x.ply")).unwrap();
        assert_eq!(back, m);
        let back = parse_obj(&to_obj_string(&m), Path::new("x.obj")).unwrap();
        assert_eq!(back, m);
    }
}
