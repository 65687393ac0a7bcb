//! Version-tagged plain-text mesh dump.
//!
//! ```text
//! sparse-eit-mesh 1
//! dim <d>
//! vertices <n>
//! <x> <y> <z>            (n lines)
//! cells <c>
//! <v0> ... <vd>          (c lines)
//! facets <f>
//! <marker> <v0> ...      (f lines)
//! ```

use std::io::{BufRead, Write};

use super::SimplicialMesh;
use crate::error::{EitError, Result};

pub const MAGIC: &str = "sparse-eit-mesh";
pub const VERSION: u32 = 1;

pub fn write_mesh(mesh: &SimplicialMesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "dim {}", mesh.dim())?;
    writeln!(w, "vertices {}", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    writeln!(w, "cells {}", mesh.n_cells())?;
    for cell in mesh.cells() {
        writeln!(w, "{}", join(cell))?;
    }
    writeln!(w, "facets {}", mesh.n_facets())?;
    for f in 0..mesh.n_facets() {
        writeln!(w, "{} {}", mesh.facet_marker(f), join(mesh.facet(f)))?;
    }
    Ok(())
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> EitError {
        EitError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(format!("expected '{key} <count>'")));
        }
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("invalid {key} count")))
    }

    fn numbers<T: std::str::FromStr>(&mut self, expected: usize) -> Result<Vec<T>> {
        let l = self.next()?;
        let v: Vec<T> = l
            .split_whitespace()
            .map(|s| s.parse::<T>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err("invalid number"))?;
        if v.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", v.len())));
        }
        Ok(v)
    }
}

pub fn read_mesh(reader: impl BufRead) -> Result<SimplicialMesh> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let magic = lines.next()?;
    if magic.trim() != format!("{MAGIC} {VERSION}") {
        return Err(lines.err(format!("expected '{MAGIC} {VERSION}' header")));
    }
    let dim = lines.header("dim")?;
    if dim != 2 && dim != 3 {
        return Err(EitError::UnsupportedDimension(dim));
    }
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v: Vec<f64> = lines.numbers(3)?;
        vertices.push([v[0], v[1], v[2]]);
    }
    let nc = lines.header("cells")?;
    let mut cells = Vec::with_capacity(nc * (dim + 1));
    for _ in 0..nc {
        cells.extend(lines.numbers::<usize>(dim + 1)?);
    }
    let nf = lines.header("facets")?;
    let mut tagged = Vec::with_capacity(nf);
    for _ in 0..nf {
        let v: Vec<i64> = lines.numbers(dim + 1)?;
        tagged.push((v[1..].iter().map(|&x| x as usize).collect(), v[0] as i32));
    }
    let mesh = SimplicialMesh::new(dim, vertices, cells)?;
    if mesh.n_facets() != nf {
        return Err(EitError::InvalidMesh(format!(
            "file lists {nf} boundary facets, connectivity implies {}",
            mesh.n_facets()
        )));
    }
    mesh.with_tagged_facets(&tagged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_ball_mesh;

    #[test]
    fn round_trip_is_identical() {
        let m = generate_ball_mesh(3, 2).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(
            back.cells().collect::<Vec<_>>(),
            m.cells().collect::<Vec<_>>()
        );
        assert_eq!(back.facet_markers(), m.facet_markers());
        assert_eq!(back.content_hash(), m.content_hash());
        let mut again = Vec::new();
        write_mesh(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let r = read_mesh("sparse-eit-mesh 99\n".as_bytes());
        assert!(matches!(r, Err(EitError::Parse { line: 1, .. })));
    }
}
