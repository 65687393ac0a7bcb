//! Gmsh ASCII v2.2 (`.msh`) import and export.
//!
//! Only the element types needed for simplicial meshes are interpreted:
//! lines (1), triangles (2) and tetrahedra (4). Cells are the elements of the
//! highest dimension present; elements one dimension lower become tagged
//! boundary facets using their first (physical) tag as marker. Nodes not used
//! by any cell are dropped.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use super::SimplicialMesh;
use crate::error::{EitError, Result};

struct Element {
    line: usize,
    id: i64,
    kind: u32,
    tag: i32,
    nodes: Vec<i64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> EitError {
    EitError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_gmsh_file(path: impl AsRef<Path>) -> Result<SimplicialMesh> {
    let f = std::fs::File::open(path)?;
    read_gmsh(std::io::BufReader::new(f))
}

pub fn read_gmsh(reader: impl BufRead) -> Result<SimplicialMesh> {
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut i = 0;
    let mut nodes: Vec<(i64, [f64; 3])> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;

    let next = |i: &mut usize| -> Result<(usize, &str)> {
        while *i < lines.len() {
            let l = lines[*i].trim();
            *i += 1;
            if !l.is_empty() {
                return Ok((*i, l));
            }
        }
        Err(parse_err(lines.len(), "unexpected end of file"))
    };

    while i < lines.len() {
        let (ln, header) = match next(&mut i) {
            Ok(x) => x,
            Err(_) => break,
        };
        match header {
            "$MeshFormat" => {
                let (ln, fmt) = next(&mut i)?;
                let version = fmt.split_whitespace().next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(parse_err(
                        ln,
                        format!("unsupported format version {version}"),
                    ));
                }
                let mut parts = fmt.split_whitespace().skip(1);
                if parts.next() != Some("0") {
                    return Err(parse_err(ln, "binary gmsh files are not supported"));
                }
                saw_format = true;
                expect(&mut i, &next, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let (ln, count) = next(&mut i)?;
                let n: usize = count
                    .parse()
                    .map_err(|_| parse_err(ln, "invalid node count"))?;
                nodes.reserve(n);
                for _ in 0..n {
                    let (ln, l) = next(&mut i)?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 4 {
                        return Err(parse_err(ln, "node line needs id and three coordinates"));
                    }
                    let id: i64 = f[0].parse().map_err(|_| parse_err(ln, "invalid node id"))?;
                    let mut x = [0.0; 3];
                    for a in 0..3 {
                        x[a] = f[a + 1].parse().map_err(|_| {
                            parse_err(ln, format!("invalid coordinate '{}'", f[a + 1]))
                        })?;
                    }
                    nodes.push((id, x));
                }
                expect(&mut i, &next, "$EndNodes")?;
            }
            "$Elements" => {
                let (ln, count) = next(&mut i)?;
                let n: usize = count
                    .parse()
                    .map_err(|_| parse_err(ln, "invalid element count"))?;
                for _ in 0..n {
                    let (ln, l) = next(&mut i)?;
                    let f: Vec<i64> = l
                        .split_whitespace()
                        .map(|s| s.parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| parse_err(ln, "invalid integer in element line"))?;
                    if f.len() < 3 {
                        return Err(parse_err(ln, "truncated element line"));
                    }
                    let ntags = f[2] as usize;
                    if f.len() < 3 + ntags {
                        return Err(parse_err(ln, "truncated element tags"));
                    }
                    let tag = if ntags > 0 { f[3] as i32 } else { 0 };
                    elements.push(Element {
                        line: ln,
                        id: f[0],
                        kind: f[1] as u32,
                        tag,
                        nodes: f[3 + ntags..].to_vec(),
                    });
                }
                expect(&mut i, &next, "$EndElements")?;
            }
            other if other.starts_with('$') => {
                // skip unknown section
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, l) = next(&mut i)?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return Err(parse_err(ln, format!("unexpected content '{header}'"))),
        }
    }
    if !saw_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }

    let node_count = |kind: u32| match kind {
        1 => Some(2),
        2 => Some(3),
        4 => Some(4),
        _ => None,
    };
    let dim = if elements.iter().any(|e| e.kind == 4) {
        3
    } else if elements.iter().any(|e| e.kind == 2) {
        2
    } else {
        return Err(EitError::InvalidMesh(
            "no triangle or tetrahedron elements".into(),
        ));
    };
    let cell_kind = if dim == 3 { 4 } else { 2 };
    let facet_kind = if dim == 3 { 2 } else { 1 };

    let id_map: HashMap<i64, usize> = nodes
        .iter()
        .enumerate()
        .map(|(k, (id, _))| (*id, k))
        .collect();
    let resolve = |e: &Element| -> Result<Vec<usize>> {
        let expected = node_count(e.kind).unwrap_or(0);
        if e.nodes.len() != expected {
            return Err(parse_err(
                e.line,
                format!(
                    "element {} has {} nodes, expected {expected}",
                    e.id,
                    e.nodes.len()
                ),
            ));
        }
        e.nodes
            .iter()
            .map(|n| {
                id_map.get(n).copied().ok_or_else(|| {
                    parse_err(
                        e.line,
                        format!("element {} references undefined node {n}", e.id),
                    )
                })
            })
            .collect()
    };

    let mut raw_cells = Vec::new();
    let mut raw_facets = Vec::new();
    for e in &elements {
        if e.kind == cell_kind {
            raw_cells.push(resolve(e)?);
        } else if e.kind == facet_kind {
            raw_facets.push((resolve(e)?, e.tag));
        }
    }
    if raw_cells.is_empty() {
        return Err(EitError::InvalidMesh("empty cell list".into()));
    }

    // compact away nodes that no cell uses, keeping file order
    let mut used = vec![false; nodes.len()];
    for &v in raw_cells.iter().flatten() {
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut vertices = Vec::new();
    for (k, (_, x)) in nodes.iter().enumerate() {
        if used[k] {
            remap[k] = vertices.len();
            let mut x = *x;
            if dim == 2 {
                x[2] = 0.0;
            }
            vertices.push(x);
        }
    }
    let cells: Vec<usize> = raw_cells.iter().flatten().map(|&v| remap[v]).collect();
    let mut tagged = Vec::with_capacity(raw_facets.len());
    for (f, tag) in raw_facets {
        let mapped: Vec<usize> = f.iter().map(|&v| remap[v]).collect();
        if mapped.contains(&usize::MAX) {
            continue;
        }
        tagged.push((mapped, tag));
    }
    SimplicialMesh::new(dim, vertices, cells)?.with_tagged_facets(&tagged)
}

fn expect<'a>(
    i: &mut usize,
    next: &impl Fn(&mut usize) -> Result<(usize, &'a str)>,
    token: &str,
) -> Result<()> {
    let (ln, l) = next(i)?;
    if l != token {
        return Err(parse_err(ln, format!("expected {token}, found '{l}'")));
    }
    Ok(())
}

/// Writes the mesh as Gmsh ASCII v2.2 with boundary facets tagged by marker.
pub fn write_gmsh(mesh: &SimplicialMesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.n_vertices())?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{} {:e} {:e} {:e}", i + 1, p[0], p[1], p[2])?;
    }
    writeln!(w, "$EndNodes")?;
    let (facet_kind, cell_kind) = if mesh.dim() == 3 { (2, 4) } else { (1, 2) };
    writeln!(w, "$Elements\n{}", mesh.n_facets() + mesh.n_cells())?;
    let mut id = 1;
    for f in 0..mesh.n_facets() {
        let m = mesh.facet_marker(f);
        write!(w, "{id} {facet_kind} 2 {m} {m}")?;
        for &v in mesh.facet(f) {
            write!(w, " {}", v + 1)?;
        }
        writeln!(w)?;
        id += 1;
    }
    for cell in mesh.cells() {
        write!(w, "{id} {cell_kind} 2 0 0")?;
        for &v in cell {
            write!(w, " {}", v + 1)?;
        }
        writeln!(w)?;
        id += 1;
    }
    writeln!(w, "$EndElements")?;
    Ok(())
}
