use super::{dist, Point, SimplicialMesh};
use crate::error::{EitError, Result};

/// Default snap tolerance as a fraction of the mesh diameter.
pub const DEFAULT_SNAP_FACTOR: f64 = 1e-8;

const INSIDE_EPS: f64 = 1e-12;

/// Uniform-bucket point locator over the cells of a mesh.
///
/// Points inside the mesh are located exactly; points outside within the snap
/// tolerance are assigned to the cell whose clamped barycentric projection is
/// closest.
#[derive(Debug)]
pub struct PointLocator<'m> {
    mesh: &'m SimplicialMesh,
    lo: Point,
    cell_size: [f64; 3],
    dims: [usize; 3],
    buckets: Vec<Vec<usize>>,
    snap_tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub cell: usize,
    pub barycentric: [f64; 4],
    /// Distance from the query point to the evaluation point (0 if inside).
    pub distance: f64,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m SimplicialMesh) -> Self {
        Self::with_snap_tolerance(mesh, DEFAULT_SNAP_FACTOR * mesh.diameter())
    }

    pub fn with_snap_tolerance(mesh: &'m SimplicialMesh, snap_tolerance: f64) -> Self {
        let d = mesh.dim();
        let (mut lo, mut hi) = mesh.bounding_box();
        let per_axis = ((mesh.n_cells() as f64).powf(1.0 / d as f64) / 2.0)
            .ceil()
            .max(1.0) as usize;
        let mut dims = [1usize; 3];
        let mut cell_size = [1.0; 3];
        for a in 0..d {
            let pad = 1e-9 * (hi[a] - lo[a]).max(1e-300);
            lo[a] -= pad;
            hi[a] += pad;
            dims[a] = per_axis;
            cell_size[a] = (hi[a] - lo[a]) / per_axis as f64;
        }
        let mut buckets = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        for c in 0..mesh.n_cells() {
            let mut cmin = [usize::MAX; 3];
            let mut cmax = [0usize; 3];
            for &v in mesh.cell(c) {
                let p = mesh.vertex(v);
                for a in 0..3 {
                    let b = bucket_coord(p[a], lo[a], cell_size[a], dims[a]);
                    cmin[a] = cmin[a].min(b);
                    cmax[a] = cmax[a].max(b);
                }
            }
            for k in cmin[2]..=cmax[2] {
                for j in cmin[1]..=cmax[1] {
                    for i in cmin[0]..=cmax[0] {
                        buckets[i + dims[0] * (j + dims[1] * k)].push(c);
                    }
                }
            }
        }
        PointLocator {
            mesh,
            lo,
            cell_size,
            dims,
            buckets,
            snap_tolerance,
        }
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap_tolerance
    }

    pub fn locate(&self, p: &Point) -> Result<Location> {
        let mut bc = [0usize; 3];
        for a in 0..3 {
            bc[a] = bucket_coord(p[a], self.lo[a], self.cell_size[a], self.dims[a]);
        }
        let inside =
            |lambda: &[f64; 4]| lambda[..=self.mesh.dim()].iter().all(|&l| l >= -INSIDE_EPS);
        for &c in &self.buckets[self.bucket_index(bc)] {
            let lambda = self.mesh.barycentric(c, p);
            if inside(&lambda) {
                return Ok(Location {
                    cell: c,
                    barycentric: lambda,
                    distance: 0.0,
                });
            }
        }

        // Outside (or on a bucket seam): scan buckets within the snap radius.
        let mut best: Option<Location> = None;
        let mut range = [(0usize, 0usize); 3];
        for a in 0..3 {
            let reach = (self.snap_tolerance / self.cell_size[a]).ceil() as usize + 1;
            range[a] = (
                bc[a].saturating_sub(reach),
                (bc[a] + reach).min(self.dims[a] - 1),
            );
        }
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                for i in range[0].0..=range[0].1 {
                    for &c in &self.buckets[self.bucket_index([i, j, k])] {
                        let lambda = self.mesh.barycentric(c, p);
                        if inside(&lambda) {
                            return Ok(Location {
                                cell: c,
                                barycentric: lambda,
                                distance: 0.0,
                            });
                        }
                        let clamped = self.clamp(&lambda);
                        let q = self.point_from(c, &clamped);
                        let d = dist(&q, p);
                        if best.is_none_or(|b| d < b.distance) {
                            best = Some(Location {
                                cell: c,
                                barycentric: clamped,
                                distance: d,
                            });
                        }
                    }
                }
            }
        }
        match best {
            Some(loc) if loc.distance <= self.snap_tolerance => Ok(loc),
            other => Err(EitError::PointOutsideMesh {
                point: *p,
                distance: other.map_or(f64::INFINITY, |l| l.distance),
                tolerance: self.snap_tolerance,
            }),
        }
    }

    /// P1 interpolation of nodal `values` at `p`.
    pub fn interpolate(&self, values: &[f64], p: &Point) -> Result<f64> {
        let loc = self.locate(p)?;
        Ok(self
            .mesh
            .cell(loc.cell)
            .iter()
            .zip(loc.barycentric.iter())
            .map(|(&v, &l)| l * values[v])
            .sum())
    }

    fn bucket_index(&self, b: [usize; 3]) -> usize {
        b[0] + self.dims[0] * (b[1] + self.dims[1] * b[2])
    }

    fn clamp(&self, lambda: &[f64; 4]) -> [f64; 4] {
        let n = self.mesh.dim() + 1;
        let mut out = [0.0; 4];
        let mut s = 0.0;
        for i in 0..n {
            out[i] = lambda[i].max(0.0);
            s += out[i];
        }
        for x in out.iter_mut().take(n) {
            *x /= s;
        }
        out
    }

    fn point_from(&self, c: usize, lambda: &[f64; 4]) -> Point {
        let mut q = [0.0; 3];
        for (i, &v) in self.mesh.cell(c).iter().enumerate() {
            let x = self.mesh.vertex(v);
            for a in 0..3 {
                q[a] += lambda[i] * x[a];
            }
        }
        q
    }
}

fn bucket_coord(x: f64, lo: f64, size: f64, n: usize) -> usize {
    let b = ((x - lo) / size).floor();
    if b < 0.0 {
        0
    } else {
        (b as usize).min(n - 1)
    }
}

impl SimplicialMesh {
    /// Barycentric P1 interpolation of `values` at `points`, with the default
    /// snap tolerance of `1e-8 × diameter`.
    pub fn interpolate_at_points(&self, values: &[f64], points: &[Point]) -> Result<Vec<f64>> {
        self.interpolate_at_points_with_tolerance(
            values,
            points,
            DEFAULT_SNAP_FACTOR * self.diameter(),
        )
    }

    pub fn interpolate_at_points_with_tolerance(
        &self,
        values: &[f64],
        points: &[Point],
        snap_tolerance: f64,
    ) -> Result<Vec<f64>> {
        if values.len() != self.n_vertices() {
            return Err(EitError::LengthMismatch {
                what: "nodal field",
                expected: self.n_vertices(),
                found: values.len(),
            });
        }
        let locator = PointLocator::with_snap_tolerance(self, snap_tolerance);
        points
            .iter()
            .map(|p| locator.interpolate(values, p))
            .collect()
    }
}
