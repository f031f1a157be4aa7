//! Line-oriented mesh text format.
//!
//! ```text
//! ntri-mesh 1
//! v <x> <y>
//! t <i> <j> <k> [r]
//! b <i> <j> D|N [segment]
//! ```
//!
//! `r` is the slot (0, 1 or 2) of the refinement vertex; `#` starts a comment.

use std::fmt::Write as _;

use super::{BoundaryKind, BoundaryLabel, MeshError, Triangulation};

pub fn write_mesh(mesh: &Triangulation) -> String {
    let mut out = String::from("ntri-mesh 1\n");
    for v in mesh.vertices() {
        writeln!(out, "v {:e} {:e}", v[0], v[1]).unwrap();
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        writeln!(out, "t {} {} {} {}", tri[0], tri[1], tri[2], mesh.refinement_slot(t)).unwrap();
    }
    for (a, b, label) in mesh.boundary_spec() {
        let kind = match label.kind {
            BoundaryKind::Dirichlet => 'D',
            BoundaryKind::Neumann => 'N',
        };
        writeln!(out, "b {a} {b} {kind} {}", label.segment).unwrap();
    }
    out
}

pub fn read_mesh(text: &str) -> Result<Triangulation, MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut slots: Vec<Option<u8>> = Vec::new();
    let mut boundary = Vec::new();
    let mut seen_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| MeshError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap();
        if !seen_header {
            if head != "ntri-mesh" || tok.next() != Some("1") {
                return Err(err("expected header `ntri-mesh 1`"));
            }
            seen_header = true;
            continue;
        }
        let rest: Vec<&str> = tok.collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad index `{s}`")));
        match head {
            "v" => {
                if rest.len() != 2 {
                    return Err(err("vertex needs 2 coordinates"));
                }
                vertices.push([num(rest[0])?, num(rest[1])?]);
            }
            "t" => {
                if rest.len() != 3 && rest.len() != 4 {
                    return Err(err("triangle needs 3 indices and an optional slot"));
                }
                triangles.push([int(rest[0])?, int(rest[1])?, int(rest[2])?]);
                slots.push(match rest.get(3) {
                    Some(s) => Some(int(s)? as u8),
                    None => None,
                });
            }
            "b" => {
                if rest.len() != 3 && rest.len() != 4 {
                    return Err(err("boundary edge needs 2 indices, D|N and an optional segment"));
                }
                let kind = match rest[2] {
                    "D" => BoundaryKind::Dirichlet,
                    "N" => BoundaryKind::Neumann,
                    other => return Err(err(&format!("unknown boundary kind `{other}`"))),
                };
                let segment = match rest.get(3) {
                    Some(s) => int(s)? as u32,
                    None => 0,
                };
                boundary.push((int(rest[0])?, int(rest[1])?, BoundaryLabel { kind, segment }));
            }
            other => return Err(err(&format!("unknown record `{other}`"))),
        }
    }
    if !seen_header {
        return Err(MeshError::Parse {
            line: 0,
            msg: "missing header".into(),
        });
    }
    if slots.iter().all(Option::is_some) {
        let slots = slots.into_iter().map(Option::unwrap).collect();
        Triangulation::build_with_slots(vertices, triangles, slots, &boundary)
    } else {
        // fall back to the longest-edge rule for the missing slots
        let auto = Triangulation::build(vertices.clone(), triangles.clone(), &boundary)?;
        let merged = slots
            .iter()
            .enumerate()
            .map(|(t, s)| s.unwrap_or(auto.refinement_slot(t)))
            .collect();
        Triangulation::build_with_slots(vertices, triangles, merged, &boundary)
    }
}
