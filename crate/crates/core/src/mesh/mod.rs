//! Simplicial meshes (triangles in 2D, tetrahedra in 3D) with tagged boundary
//! facets.
//!
//! Vertices are always stored as `[f64; 3]`; in 2D the third coordinate is
//! zero and ignored by every geometric routine. Cells are positively oriented
//! on construction and boundary facets are inferred as the faces that belong to
//! exactly one cell, ordered so that their normal points outward.

mod generate;
pub mod gmsh;
mod locate;
pub mod native;
mod subset;

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{EitError, Result};

pub use generate::generate_ball_mesh;
pub use locate::{PointLocator, DEFAULT_SNAP_FACTOR};
pub use subset::{BoundaryRegion, BoundarySubset};

/// Facet marker assigned by the built-in generator to facets with centroid in
/// the upper half space (last coordinate > 0).
pub const MARKER_UPPER: i32 = 1;
/// Facet marker for the remaining boundary facets of generated meshes.
pub const MARKER_LOWER: i32 = 2;

pub type Point = [f64; 3];

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    facets: Vec<usize>,
    facet_markers: Vec<i32>,
    facet_cells: Vec<usize>,
    cell_volumes: Vec<f64>,
    cell_gradients: Vec<[Point; 4]>,
    facet_areas: Vec<f64>,
    on_boundary: Vec<bool>,
}

impl SimplicialMesh {
    /// Builds a mesh from raw connectivity. `cells` is a flat list with stride
    /// `dim + 1`. Negatively oriented cells are flipped; degenerate cells,
    /// out-of-range indices, unused vertices and non-manifold boundaries are
    /// rejected. All boundary facets get marker 0.
    pub fn new(dim: usize, vertices: Vec<Point>, mut cells: Vec<usize>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(EitError::UnsupportedDimension(dim));
        }
        let nv = dim + 1;
        if cells.is_empty() {
            return Err(EitError::InvalidMesh("empty cell list".into()));
        }
        if !cells.len().is_multiple_of(nv) {
            return Err(EitError::InvalidMesh(format!(
                "cell connectivity length {} is not a multiple of {nv}",
                cells.len()
            )));
        }
        let mut used = vec![false; vertices.len()];
        for (c, cell) in cells.chunks(nv).enumerate() {
            for &v in cell {
                if v >= vertices.len() {
                    return Err(EitError::InvalidMesh(format!(
                        "cell {c} references vertex {v} but only {} vertices exist",
                        vertices.len()
                    )));
                }
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(EitError::InvalidMesh(format!(
                "vertex {v} is not used by any cell"
            )));
        }

        let n_cells = cells.len() / nv;
        let mut cell_volumes = Vec::with_capacity(n_cells);
        let mut cell_gradients = Vec::with_capacity(n_cells);
        for c in 0..n_cells {
            let cell = &mut cells[c * nv..(c + 1) * nv];
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let mut vol = signed_volume(dim, &pts);
            if vol < 0.0 {
                cell.swap(0, 1);
                vol = -vol;
            }
            let scale = characteristic_length(cell.iter().map(|&v| vertices[v]));
            if !(vol > 1e-14 * scale.powi(dim as i32)) {
                return Err(EitError::DegenerateCell {
                    cell: c,
                    volume: vol,
                });
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            cell_volumes.push(vol);
            cell_gradients.push(barycentric_gradients(dim, &pts));
        }

        let mut mesh = SimplicialMesh {
            dim,
            vertices,
            cells,
            facets: Vec::new(),
            facet_markers: Vec::new(),
            facet_cells: Vec::new(),
            cell_volumes,
            cell_gradients,
            facet_areas: Vec::new(),
            on_boundary: Vec::new(),
        };
        mesh.infer_boundary()?;
        Ok(mesh)
    }

    fn infer_boundary(&mut self) -> Result<()> {
        let dim = self.dim;
        let mut faces: HashMap<Vec<usize>, (usize, usize, usize)> = HashMap::new();
        for c in 0..self.n_cells() {
            for local in 0..=dim {
                let mut key = outward_face(self.cell(c), local);
                key.sort_unstable();
                let entry = faces.entry(key).or_insert((0, c, local));
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(EitError::InvalidMesh(format!(
                        "face shared by more than two cells (cell {c})"
                    )));
                }
            }
        }
        let mut boundary: Vec<(usize, usize)> = faces
            .into_values()
            .filter(|(count, _, _)| *count == 1)
            .map(|(_, c, l)| (c, l))
            .collect();
        boundary.sort_unstable();
        if boundary.is_empty() {
            return Err(EitError::InvalidMesh("mesh has no boundary facets".into()));
        }

        self.on_boundary = vec![false; self.n_vertices()];
        for (c, local) in boundary {
            let face = outward_face(self.cell(c), local);
            let pts: Vec<Point> = face.iter().map(|&v| self.vertices[v]).collect();
            self.facet_areas.push(facet_measure(dim, &pts));
            for &v in &face {
                self.on_boundary[v] = true;
            }
            self.facets.extend_from_slice(&face);
            self.facet_cells.push(c);
            self.facet_markers.push(0);
        }
        self.check_closed_boundary()
    }

    fn check_closed_boundary(&self) -> Result<()> {
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in 0..self.n_facets() {
            let facet = self.facet(f);
            if self.dim == 2 {
                for &v in facet {
                    *counts.entry(vec![v]).or_default() += 1;
                }
            } else {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    let (x, y) = (facet[a].min(facet[b]), facet[a].max(facet[b]));
                    *counts.entry(vec![x, y]).or_default() += 1;
                }
            }
        }
        if let Some((entity, n)) = counts.iter().find(|(_, &n)| n != 2) {
            return Err(EitError::InvalidMesh(format!(
                "boundary is not a closed manifold: entity {entity:?} shared by {n} boundary facets"
            )));
        }
        Ok(())
    }

    /// Assigns facet markers from explicitly tagged facets (any vertex order).
    /// Tagged facets must be boundary facets; untagged boundary facets keep
    /// their current marker.
    pub fn with_tagged_facets(mut self, tagged: &[(Vec<usize>, i32)]) -> Result<Self> {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in 0..self.n_facets() {
            let mut key = self.facet(f).to_vec();
            key.sort_unstable();
            index.insert(key, f);
        }
        for (facet, marker) in tagged {
            let mut key = facet.clone();
            key.sort_unstable();
            match index.get(&key) {
                Some(&f) => self.facet_markers[f] = *marker,
                None => {
                    return Err(EitError::InvalidMesh(format!(
                        "tagged facet {facet:?} is not a boundary facet"
                    )))
                }
            }
        }
        Ok(self)
    }

    /// Re-tags every boundary facet from its centroid.
    pub fn mark_facets_by(&mut self, marker: impl Fn(&Point) -> i32) {
        for f in 0..self.n_facets() {
            let c = self.facet_centroid(f);
            self.facet_markers[f] = marker(&c);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_volumes.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facet_markers.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.dim + 1)
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        self.cell_volumes[c]
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    /// Gradients of the barycentric coordinates of cell `c`, one per local
    /// vertex (only the first `dim + 1` entries are meaningful).
    pub fn cell_gradients(&self, c: usize) -> &[Point; 4] {
        &self.cell_gradients[c]
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        let nv = self.dim;
        &self.facets[f * nv..(f + 1) * nv]
    }

    pub fn facet_marker(&self, f: usize) -> i32 {
        self.facet_markers[f]
    }

    pub fn facet_markers(&self) -> &[i32] {
        &self.facet_markers
    }

    pub fn facet_area(&self, f: usize) -> f64 {
        self.facet_areas[f]
    }

    pub fn facet_cell(&self, f: usize) -> usize {
        self.facet_cells[f]
    }

    pub fn facet_centroid(&self, f: usize) -> Point {
        centroid(self.facet(f).iter().map(|&v| &self.vertices[v]))
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        centroid(self.cell(c).iter().map(|&v| &self.vertices[v]))
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.on_boundary
    }

    pub fn total_volume(&self) -> f64 {
        self.cell_volumes.iter().sum()
    }

    pub fn boundary_area(&self) -> f64 {
        self.facet_areas.iter().sum()
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        dist(&lo, &hi)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Node volumes `β_j = Σ_{cells ∋ j} |cell| / (d + 1)`, which equal the
    /// integral of the hat function of vertex `j`.
    pub fn node_volumes(&self) -> Vec<f64> {
        let share = 1.0 / (self.dim + 1) as f64;
        let mut beta = vec![0.0; self.n_vertices()];
        for (c, cell) in self.cells().enumerate() {
            let w = self.cell_volumes[c] * share;
            for &v in cell {
                beta[v] += w;
            }
        }
        beta
    }

    /// Barycentric coordinates of `p` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, p: &Point) -> [f64; 4] {
        let cell = self.cell(c);
        let grads = &self.cell_gradients[c];
        let x0 = &self.vertices[cell[0]];
        let d = sub(p, x0);
        let mut lambda = [0.0; 4];
        let mut rest = 1.0;
        for i in 1..=self.dim {
            lambda[i] = dot(&grads[i], &d);
            rest -= lambda[i];
        }
        lambda[0] = rest;
        lambda
    }

    /// Content hash of geometry and connectivity, used to tie data files to
    /// the mesh they were generated for.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.vertices.len() as u64).to_le_bytes());
        for p in &self.vertices {
            for x in p {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        for &v in &self.cells {
            h.update((v as u64).to_le_bytes());
        }
        let digest = h.finalize();
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Face of a positively oriented cell opposite `local`, ordered with outward
/// normal.
fn outward_face(cell: &[usize], local: usize) -> Vec<usize> {
    match (cell.len(), local) {
        (3, 0) => vec![cell[1], cell[2]],
        (3, 1) => vec![cell[2], cell[0]],
        (3, 2) => vec![cell[0], cell[1]],
        (4, 0) => vec![cell[1], cell[2], cell[3]],
        (4, 1) => vec![cell[0], cell[3], cell[2]],
        (4, 2) => vec![cell[0], cell[1], cell[3]],
        (4, 3) => vec![cell[0], cell[2], cell[1]],
        _ => unreachable!("invalid simplex face"),
    }
}

fn characteristic_length(pts: impl Iterator<Item = Point>) -> f64 {
    let pts: Vec<Point> = pts.collect();
    let mut l: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            l = l.max(dist(&pts[i], &pts[j]));
        }
    }
    l
}

pub(crate) fn signed_volume(dim: usize, pts: &[Point]) -> f64 {
    let a = sub(&pts[1], &pts[0]);
    let b = sub(&pts[2], &pts[0]);
    if dim == 2 {
        0.5 * (a[0] * b[1] - a[1] * b[0])
    } else {
        let c = sub(&pts[3], &pts[0]);
        dot(&a, &cross(&b, &c)) / 6.0
    }
}

fn barycentric_gradients(dim: usize, pts: &[Point]) -> [Point; 4] {
    let mut g = [[0.0; 3]; 4];
    let a = sub(&pts[1], &pts[0]);
    let b = sub(&pts[2], &pts[0]);
    if dim == 2 {
        let det = a[0] * b[1] - a[1] * b[0];
        g[1] = [b[1] / det, -b[0] / det, 0.0];
        g[2] = [-a[1] / det, a[0] / det, 0.0];
    } else {
        let c = sub(&pts[3], &pts[0]);
        let bc = cross(&b, &c);
        let det = dot(&a, &bc);
        let ca = cross(&c, &a);
        let ab = cross(&a, &b);
        for k in 0..3 {
            g[1][k] = bc[k] / det;
            g[2][k] = ca[k] / det;
            g[3][k] = ab[k] / det;
        }
    }
    for k in 0..3 {
        g[0][k] = -(g[1][k] + g[2][k] + g[3][k]);
    }
    g
}

pub(crate) fn facet_measure(dim: usize, pts: &[Point]) -> f64 {
    if dim == 2 {
        dist(&pts[0], &pts[1])
    } else {
        let n = cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]));
        0.5 * norm(&n)
    }
}

pub(crate) fn centroid<'a>(pts: impl Iterator<Item = &'a Point>) -> Point {
    let mut c = [0.0; 3];
    let mut n = 0.0;
    for p in pts {
        for a in 0..3 {
            c[a] += p[a];
        }
        n += 1.0;
    }
    c.map(|x| x / n)
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}
