//! OFF / OBJ readers, OFF and colored ASCII PLY writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MeshError, Result, TriangleMesh};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

/// Loads a mesh, inferring the format from the file extension.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| MeshError::Parse { line: 0, msg: format!("unknown mesh extension for {}", path.display()) })?;
    load_mesh_as(path, format)
}

pub fn load_mesh_as(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path)?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn build(positions: Vec<Vec3>, faces: Vec<[usize; 3]>, face_lines: &[usize]) -> Result<TriangleMesh> {
    let n = positions.len();
    for (f, &line) in faces.iter().zip(face_lines) {
        if let Some(&bad) = f.iter().find(|&&v| v >= n) {
            return Err(parse_err(line, format!("vertex index {bad} out of range (mesh has {n})")));
        }
    }
    TriangleMesh::new(positions, faces)
}

pub fn parse_off(text: &str) -> Result<TriangleMesh> {
    // tokens with their line numbers, comments stripped
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut counts_line = if header == "OFF" {
        None
    } else if let Some(rest) = header.strip_prefix("OFF") {
        Some((hl, rest.trim()))
    } else {
        return Err(parse_err(hl, "missing OFF header"));
    };
    if counts_line.is_none() {
        counts_line = lines.next();
    }
    let (cl, counts) = counts_line.ok_or_else(|| parse_err(hl, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(cl, format!("bad count '{t}'"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(cl, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(cl, "unexpected end of vertices"))?;
        let c: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if c.len() != 3 {
            return Err(parse_err(ln, "vertex needs three coordinates"));
        }
        positions.push([c[0], c[1], c[2]]);
    }
    let mut faces = Vec::with_capacity(nf);
    let mut face_lines = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(cl, "unexpected end of faces"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad index '{t}'"))))
            .collect::<Result<_>>()?;
        if idx.first() != Some(&3) || idx.len() < 4 {
            return Err(parse_err(ln, "only triangular faces are supported"));
        }
        faces.push([idx[1], idx[2], idx[3]]);
        face_lines.push(ln);
    }
    build(positions, faces, &face_lines)
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks
                    .take(3)
                    .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate '{t}'"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(parse_err(ln, "vertex needs three coordinates"));
                }
                positions.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| parse_err(ln, format!("bad index '{t}'")))?;
                        let n = positions.len() as i64;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 {
                            return Err(parse_err(ln, format!("bad index '{t}'")));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(ln, "only triangular faces are supported"));
                }
                faces.push([idx[0], idx[1], idx[2]]);
                face_lines.push(ln);
            }
            _ => {}
        }
    }
    build(positions, faces, &face_lines)
}

pub fn to_off(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} 0", mesh.n_vertices(), mesh.n_faces()).unwrap();
    for p in mesh.positions() {
        writeln!(s, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    s
}

pub fn write_off(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    fs::write(path, to_off(mesh))?;
    Ok(())
}

/// ASCII PLY with one `uchar` RGB triple per vertex.
pub fn to_ply(mesh: &TriangleMesh, colors: &[[u8; 3]]) -> String {
    assert_eq!(colors.len(), mesh.n_vertices(), "one color per vertex");
    let mut s = String::new();
    writeln!(s, "ply").unwrap();
    writeln!(s, "format ascii 1.0").unwrap();
    writeln!(s, "element vertex {}", mesh.n_vertices()).unwrap();
    for c in ["x", "y", "z"] {
        writeln!(s, "property float {c}").unwrap();
    }
    for c in ["red", "green", "blue"] {
        writeln!(s, "property uchar {c}").unwrap();
    }
    writeln!(s, "element face {}", mesh.n_faces()).unwrap();
    writeln!(s, "property list uchar int vertex_indices").unwrap();
    writeln!(s, "end_header").unwrap();
    for (p, c) in mesh.positions().iter().zip(colors) {
        writeln!(s, "{} {} {} {} {} {}", p[0], p[1], p[2], c[0], c[1], c[2]).unwrap();
    }
    for f in mesh.oriented_faces() {
        writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    s
}

pub fn write_ply(mesh: &TriangleMesh, colors: &[[u8; 3]], path: &Path) -> Result<()> {
    fs::write(path, to_ply(mesh, colors))?;
    Ok(())
}

/// Maps a scalar in `[0, 1]` to a blue-to-red ramp.
pub fn heat_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs())).round() as u8;
    [r, g, b]
}

/// Distinct color per label (injective for the first 12 labels, then cycling hues).
pub fn label_color(label: usize) -> [u8; 3] {
    const PALETTE: [[u8; 3]; 12] = [
        [230, 25, 75],
        [60, 180, 75],
        [255, 225, 25],
        [0, 130, 200],
        [245, 130, 48],
        [145, 30, 180],
        [70, 240, 240],
        [240, 50, 230],
        [210, 245, 60],
        [250, 190, 212],
        [0, 128, 128],
        [170, 110, 40],
    ];
    if label < PALETTE.len() {
        PALETTE[label]
    } else {
        let h = (label as f64 * 0.618_033_988_75).fract();
        heat_color(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn single_triangle_off() {
        let m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (3, 1));
        assert_eq!(m.boundary_edge_count(), 3);
    }

    #[test]
    fn icosahedron_roundtrip_through_off() {
        let ico = primitives::icosphere(0);
        let m = parse_off(&to_off(&ico)).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (12, 20));
        assert_eq!(m.n_edges(), 30);
        for f in m.faces() {
            for k in 0..3 {
                assert_eq!(m.edge_faces(f[k], f[(k + 1) % 3]).len(), 2);
            }
        }
        assert_eq!(m.faces(), ico.faces());
    }

    #[test]
    fn out_of_range_index_is_parse_error() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 999\n";
        assert!(matches!(parse_off(text), Err(MeshError::Parse { line: 7, .. })));
    }

    #[test]
    fn malformed_off_is_parse_error() {
        assert!(matches!(parse_off("PLY\n"), Err(MeshError::Parse { .. })));
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0\n"), Err(MeshError::Parse { .. })));
        assert!(matches!(
            parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 2 3\n"),
            Err(MeshError::Parse { .. })
        ));
    }

    #[test]
    fn obj_with_slashes_and_comments() {
        let text = "# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
        let neg = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(neg.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn ply_header_and_body() {
        let m = primitives::grid(2, 2, 1.0);
        let colors = vec![[1, 2, 3]; 4];
        let s = to_ply(&m, &colors);
        assert!(s.starts_with("ply\nformat ascii 1.0\nelement vertex 4\n"));
        assert!(s.contains("property uchar red"));
        assert!(s.contains("0 0 0 1 2 3"));
        assert_eq!(s.lines().filter(|l| l.starts_with("3 ")).count(), 2);
    }

    #[test]
    fn label_colors_are_distinct() {
        let cols: Vec<_> = (0..12).map(label_color).collect();
        for i in 0..12 {
            for j in 0..i {
                assert_ne!(cols[i], cols[j]);
            }
        }
    }
}
