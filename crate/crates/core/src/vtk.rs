//! Legacy ASCII VTK output (unstructured grid with point data) and a strict
//! reader for the same subset of the format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{EitError, Result};
use crate::mesh::SimplicialMesh;

const VTK_TRIANGLE: u8 = 5;
const VTK_TETRA: u8 = 10;

/// Writes `mesh` with one scalar point-data array per `(name, values)` pair.
pub fn write_vtk(
    mesh: &SimplicialMesh,
    fields: &[(&str, &[f64])],
    mut w: impl Write,
) -> Result<()> {
    let n = mesh.n_vertices();
    for (name, values) in fields {
        if values.len() != n {
            return Err(EitError::LengthMismatch {
                what: "VTK point data",
                expected: n,
                found: values.len(),
            });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(EitError::InvalidParameter(format!(
                "invalid VTK array name `{name}`"
            )));
        }
    }
    let nl = mesh.dim() + 1;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "sparse-eit {}", mesh.content_hash())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    writeln!(w, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nl + 1))?;
    for cell in mesh.cells() {
        write!(w, "{nl}")?;
        for v in cell {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    let ty = if mesh.dim() == 2 {
        VTK_TRIANGLE
    } else {
        VTK_TETRA
    };
    for _ in 0..mesh.n_cells() {
        writeln!(w, "{ty}")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {n}")?;
        for (name, values) in fields {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for x in values.iter() {
                writeln!(w, "{x:e}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_vtk_file(
    mesh: &SimplicialMesh,
    fields: &[(&str, &[f64])],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_vtk(mesh, fields, BufWriter::new(File::create(path)?))
}

/// Contents of a legacy unstructured-grid file.
#[derive(Clone, Debug, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_data: Vec<(String, Vec<f64>)>,
}

struct Tokens {
    tokens: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn next(&mut self) -> Result<(usize, &str)> {
        let line = self.tokens.last().map_or(0, |t| t.0);
        let t = self.tokens.get(self.pos).ok_or(EitError::Parse {
            line,
            message: "unexpected end of file".into(),
        })?;
        self.pos += 1;
        Ok((t.0, t.1.as_str()))
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let (line, t) = self.next()?;
        if t != word {
            return Err(EitError::Parse {
                line,
                message: format!("expected `{word}`, found `{t}`"),
            });
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T> {
        let (line, t) = self.next()?;
        t.parse().map_err(|_| EitError::Parse {
            line,
            message: format!("cannot parse `{t}`"),
        })
    }
}

/// Parses the subset of legacy VTK that [`write_vtk`] produces, checking
/// counts, index ranges and cell types.
pub fn read_vtk(reader: impl BufRead) -> Result<VtkGrid> {
    let mut lines = reader.lines();
    let mut header = Vec::new();
    for i in 0..3 {
        let l = lines.next().ok_or(EitError::Parse {
            line: i + 1,
            message: "truncated header".into(),
        })??;
        header.push(l);
    }
    if !header[0].starts_with("# vtk DataFile Version") {
        return Err(EitError::Parse {
            line: 1,
            message: "missing VTK signature".into(),
        });
    }
    if header[2].trim() != "ASCII" {
        return Err(EitError::Parse {
            line: 3,
            message: "only ASCII files are supported".into(),
        });
    }
    let mut tokens = Vec::new();
    for (i, l) in lines.enumerate() {
        let l = l?;
        tokens.extend(l.split_whitespace().map(|t| (i + 4, t.to_owned())));
    }
    let mut t = Tokens { tokens, pos: 0 };
    t.expect("DATASET")?;
    t.expect("UNSTRUCTURED_GRID")?;
    t.expect("POINTS")?;
    let n: usize = t.parse()?;
    t.next()?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push([t.parse()?, t.parse()?, t.parse()?]);
    }
    t.expect("CELLS")?;
    let n_cells: usize = t.parse()?;
    let size: usize = t.parse()?;
    let mut cells = Vec::with_capacity(n_cells);
    let mut read = 0;
    for _ in 0..n_cells {
        let k: usize = t.parse()?;
        let mut c = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, tok) = t.next()?;
            let v: usize = tok.parse().ok().filter(|&v| v < n).ok_or(EitError::Parse {
                line,
                message: format!("bad point index `{tok}`"),
            })?;
            c.push(v);
        }
        read += k + 1;
        cells.push(c);
    }
    if read != size {
        return Err(EitError::Parse {
            line: 0,
            message: format!("CELLS announces size {size}, read {read}"),
        });
    }
    t.expect("CELL_TYPES")?;
    let nt: usize = t.parse()?;
    if nt != n_cells {
        return Err(EitError::Parse {
            line: 0,
            message: "CELL_TYPES count differs from CELLS".into(),
        });
    }
    let mut cell_types = Vec::with_capacity(nt);
    for c in &cells {
        let ty: u8 = t.parse()?;
        let expected = match ty {
            VTK_TRIANGLE => 3,
            VTK_TETRA => 4,
            _ => 0,
        };
        if expected != c.len() {
            return Err(EitError::Parse {
                line: 0,
                message: format!("cell type {ty} with {} points", c.len()),
            });
        }
        cell_types.push(ty);
    }
    let mut point_data = Vec::new();
    if t.pos < t.tokens.len() {
        t.expect("POINT_DATA")?;
        let np: usize = t.parse()?;
        if np != n {
            return Err(EitError::Parse {
                line: 0,
                message: "POINT_DATA count differs from POINTS".into(),
            });
        }
        while t.pos < t.tokens.len() {
            t.expect("SCALARS")?;
            let name = t.next()?.1.to_owned();
            t.next()?;
            t.expect("1")?;
            t.expect("LOOKUP_TABLE")?;
            t.next()?;
            let values = (0..n).map(|_| t.parse()).collect::<Result<Vec<f64>>>()?;
            point_data.push((name, values));
        }
    }
    Ok(VtkGrid {
        points,
        cells,
        cell_types,
        point_data,
    })
}

pub fn read_vtk_file(path: impl AsRef<Path>) -> Result<VtkGrid> {
    read_vtk(BufReader::new(File::open(path)?))
}
