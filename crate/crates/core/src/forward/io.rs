//! Versioned plain-text storage of Cauchy data sets.
//!
//! ```text
//! sparse-eit-cauchy-data 1
//! mesh_hash <hex>
//! dim <d>
//! n_vertices <N>
//! gamma_n <region>
//! gamma_d <region>
//! n_max <n>
//! epsilon <ε>
//! seed <seed>
//! noise_std <std>
//! patterns <K>
//! gamma_n_vertices <count> <index>...
//! gamma_d_vertices <count> <index>...
//! pattern <k> <degree> <order>
//! g <value on each Γ_N vertex>...
//! f <value on each Γ_D vertex>...
//! ```
//!
//! Floats are written in shortest round-trip form, so reading back is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use super::{CauchyDataSet, NDTrace};
use crate::error::{EitError, Result};
use crate::mesh::{BoundaryRegion, SimplicialMesh};
use crate::patterns::BoundaryPattern;

pub const DATASET_FORMAT: &str = "sparse-eit-cauchy-data 1";

fn write_list<T: std::fmt::Display>(
    w: &mut impl Write,
    key: &str,
    items: impl Iterator<Item = T>,
) -> Result<()> {
    write!(w, "{key}")?;
    for x in items {
        write!(w, " {x}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_dataset(data: &CauchyDataSet, mut w: impl Write) -> Result<()> {
    let gn = data.patterns()[0].support().clone();
    let gd = data.gamma_d_subset().clone();
    writeln!(w, "{DATASET_FORMAT}")?;
    writeln!(w, "mesh_hash {}", data.mesh_hash)?;
    writeln!(w, "dim {}", gn.dim())?;
    writeln!(w, "n_vertices {}", gn.n_mesh_vertices())?;
    writeln!(w, "gamma_n {}", data.gamma_n)?;
    writeln!(w, "gamma_d {}", data.gamma_d)?;
    writeln!(w, "n_max {}", data.n_max)?;
    writeln!(w, "epsilon {:e}", data.epsilon)?;
    writeln!(w, "seed {}", data.seed)?;
    writeln!(w, "noise_std {:e}", data.noise_std)?;
    writeln!(w, "patterns {}", data.len())?;
    write!(w, "gamma_n_vertices {}", gn.vertices().len())?;
    write_list(&mut w, "", gn.vertices().iter())?;
    write!(w, "gamma_d_vertices {}", gd.vertices().len())?;
    write_list(&mut w, "", gd.vertices().iter())?;
    for (k, (g, f)) in data.patterns().iter().zip(data.traces()).enumerate() {
        writeln!(w, "pattern {} {} {}", k, g.degree(), g.order())?;
        write_list(
            &mut w,
            "g",
            gn.vertices()
                .iter()
                .map(|&v| format!("{:e}", g.values()[v])),
        )?;
        write_list(
            &mut w,
            "f",
            gd.vertices()
                .iter()
                .map(|&v| format!("{:e}", f.values()[v])),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_file(data: &CauchyDataSet, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(data, BufWriter::new(File::create(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> EitError {
        EitError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_tokens(&mut self) -> Result<Vec<String>> {
        loop {
            let Some(line) = self.inner.next() else {
                return Err(EitError::Parse {
                    line: self.line + 1,
                    message: "unexpected end of file".into(),
                });
            };
            self.line += 1;
            let line = line?;
            let t = line.trim();
            if !t.is_empty() {
                return Ok(t.split_whitespace().map(str::to_owned).collect());
            }
        }
    }

    /// Reads `key rest...` and returns `rest`.
    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let mut t = self.next_tokens()?;
        if t[0] != key {
            return Err(self.err(format!("expected `{key}`, found `{}`", t[0])));
        }
        t.remove(0);
        Ok(t)
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let t = self.keyed(key)?;
        if t.len() != 1 {
            return Err(self.err(format!("`{key}` takes exactly one value")));
        }
        t[0].parse()
            .map_err(|e| self.err(format!("bad `{key}` value `{}`: {e}", t[0])))
    }

    fn parse_all<T: std::str::FromStr>(&self, tokens: &[String], what: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        tokens
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e| self.err(format!("bad {what} entry `{s}`: {e}")))
            })
            .collect()
    }

    fn counted_list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let t = self.keyed(key)?;
        let count: usize = t
            .first()
            .ok_or_else(|| self.err(format!("`{key}` needs a count")))?
            .parse()
            .map_err(|e| self.err(format!("bad count: {e}")))?;
        if t.len() - 1 != count {
            return Err(self.err(format!(
                "`{key}` announces {count} entries, found {}",
                t.len() - 1
            )));
        }
        self.parse_all(&t[1..], key)
    }
}

/// Reads a data set and binds it to `mesh`, which must be the mesh it was
/// generated on (checked through the content hash and the boundary vertex
/// lists).
pub fn read_dataset(reader: impl BufRead, mesh: &SimplicialMesh) -> Result<CauchyDataSet> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let header = lines.next_tokens()?.join(" ");
    if header != DATASET_FORMAT {
        return Err(lines.err(format!(
            "unsupported header `{header}`, expected `{DATASET_FORMAT}`"
        )));
    }
    let mesh_hash: String = lines.value("mesh_hash")?;
    let found = mesh.content_hash();
    if mesh_hash != found {
        return Err(EitError::MeshHashMismatch {
            expected: mesh_hash,
            found,
        });
    }
    let dim: usize = lines.value("dim")?;
    let n_vertices: usize = lines.value("n_vertices")?;
    if dim != mesh.dim() || n_vertices != mesh.n_vertices() {
        return Err(lines.err("dimension or vertex count differs from the mesh"));
    }
    let gamma_n: BoundaryRegion = lines.keyed("gamma_n")?.join(" ").parse()?;
    let gamma_d: BoundaryRegion = lines.keyed("gamma_d")?.join(" ").parse()?;
    let n_max: usize = lines.value("n_max")?;
    let epsilon: f64 = lines.value("epsilon")?;
    let seed: u64 = lines.value("seed")?;
    let noise_std: f64 = lines.value("noise_std")?;
    let k: usize = lines.value("patterns")?;

    let gn = Arc::new(gamma_n.select(mesh)?);
    let gd = gamma_d.select(mesh)?;
    let gn_vertices: Vec<usize> = lines.counted_list("gamma_n_vertices")?;
    if gn_vertices != gn.vertices() {
        return Err(lines.err("Γ_N vertex list does not match the mesh region"));
    }
    let gd_vertices: Vec<usize> = lines.counted_list("gamma_d_vertices")?;
    if gd_vertices != gd.vertices() {
        return Err(lines.err("Γ_D vertex list does not match the mesh region"));
    }

    let mut patterns = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);
    for idx in 0..k {
        let t = lines.keyed("pattern")?;
        if t.len() != 3 || t[0] != idx.to_string() {
            return Err(lines.err(format!("expected `pattern {idx} <degree> <order>`")));
        }
        let degree: usize = t[1]
            .parse()
            .map_err(|e| lines.err(format!("bad degree: {e}")))?;
        let order: i32 = t[2]
            .parse()
            .map_err(|e| lines.err(format!("bad order: {e}")))?;
        let g: Vec<f64> = {
            let t = lines.keyed("g")?;
            lines.parse_all(&t, "g")?
        };
        if g.len() != gn_vertices.len() {
            return Err(lines.err(format!(
                "pattern {idx} has {} values, Γ_N has {}",
                g.len(),
                gn_vertices.len()
            )));
        }
        let f: Vec<f64> = {
            let t = lines.keyed("f")?;
            lines.parse_all(&t, "f")?
        };
        if f.len() != gd_vertices.len() {
            return Err(lines.err(format!(
                "trace {idx} has {} values, Γ_D has {}",
                f.len(),
                gd_vertices.len()
            )));
        }
        let mut gv = vec![0.0; n_vertices];
        for (&v, x) in gn_vertices.iter().zip(g) {
            gv[v] = x;
        }
        let mut fv = vec![0.0; n_vertices];
        for (&v, x) in gd_vertices.iter().zip(f) {
            fv[v] = x;
        }
        patterns.push(BoundaryPattern::new(gv, gn.clone(), degree, order)?);
        traces.push(NDTrace::from_vec(fv));
    }
    CauchyDataSet::from_parts(
        mesh_hash,
        gamma_n,
        gamma_d,
        Arc::new(gd),
        n_max,
        epsilon,
        seed,
        noise_std,
        patterns,
        traces,
    )
}

pub fn read_dataset_file(path: impl AsRef<Path>, mesh: &SimplicialMesh) -> Result<CauchyDataSet> {
    read_dataset(BufReader::new(File::open(path)?), mesh)
}
