use super::{Point, SimplicialMesh, MARKER_LOWER, MARKER_UPPER};
use crate::error::{EitError, Result};

/// Unit disk (`dim = 2`) or unit ball (`dim = 3`) mesh.
///
/// The cube `[-1, 1]^d` is split into `2·refinement` intervals per axis, each
/// sub-cube into `d!` simplices (Kuhn subdivision mirrored per orthant so the
/// main diagonal always runs away from the origin), and every vertex is mapped
/// radially by `x ↦ x·|x|_∞/|x|_2`. Concentric cube shells land on concentric
/// spheres, so boundary vertices sit exactly on the unit sphere. Facets with
/// centroid above the equator (last coordinate > 0) are tagged
/// [`MARKER_UPPER`], the rest [`MARKER_LOWER`].
pub fn generate_ball_mesh(dim: usize, refinement: usize) -> Result<SimplicialMesh> {
    if refinement == 0 {
        return Err(EitError::InvalidRefinement);
    }
    if dim != 2 && dim != 3 {
        return Err(EitError::UnsupportedDimension(dim));
    }
    let n = refinement;
    let m = 2 * n;
    let side = m + 1;
    let coord = |k: usize| -1.0 + k as f64 / n as f64;

    let n_grid = side.pow(dim as u32);
    let mut vertices = Vec::with_capacity(n_grid);
    for idx in 0..n_grid {
        let mut x = [0.0; 3];
        let mut rest = idx;
        for a in 0..dim {
            x[a] = coord(rest % side);
            rest /= side;
        }
        vertices.push(radial_map(x));
    }
    let index = |ijk: [usize; 3]| -> usize {
        let mut id = 0;
        for a in (0..dim).rev() {
            id = id * side + ijk[a];
        }
        id
    };

    let perms: Vec<Vec<usize>> = if dim == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ]
    };

    let mut cells = Vec::with_capacity(perms.len() * m.pow(dim as u32) * (dim + 1));
    let n_cubes = m.pow(dim as u32);
    for cube in 0..n_cubes {
        let mut base = [0usize; 3];
        let mut rest = cube;
        for a in 0..dim {
            base[a] = rest % m;
            rest /= m;
        }
        // local bit b along axis a -> grid offset; mirrored in negative orthants
        let corner = |bits: [usize; 3]| -> usize {
            let mut ijk = [0usize; 3];
            for a in 0..dim {
                let off = if base[a] < n { 1 - bits[a] } else { bits[a] };
                ijk[a] = base[a] + off;
            }
            index(ijk)
        };
        for perm in &perms {
            let mut bits = [0usize; 3];
            cells.push(corner(bits));
            for &a in perm {
                bits[a] = 1;
                cells.push(corner(bits));
            }
        }
    }

    let mut mesh = SimplicialMesh::new(dim, vertices, cells)?;
    let last = dim - 1;
    mesh.mark_facets_by(|c| {
        if c[last] > 0.0 {
            MARKER_UPPER
        } else {
            MARKER_LOWER
        }
    });
    Ok(mesh)
}

fn radial_map(x: Point) -> Point {
    let inf = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let two = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if two == 0.0 {
        return x;
    }
    if (inf - 1.0).abs() < 1e-14 {
        return x.map(|v| v / two);
    }
    x.map(|v| v * inf / two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_zero_refinement() {
        assert!(matches!(
            generate_ball_mesh(3, 0),
            Err(EitError::InvalidRefinement)
        ));
    }

    #[test]
    fn boundary_vertices_on_unit_sphere() {
        for dim in [2, 3] {
            let m = generate_ball_mesh(dim, 3).unwrap();
            for v in 0..m.n_vertices() {
                let r = super::super::norm(m.vertex(v));
                if m.is_boundary_vertex(v) {
                    assert!((r - 1.0).abs() < 1e-12, "boundary radius {r}");
                } else {
                    assert!(r < 1.0 - 1e-3);
                }
            }
        }
    }

    #[test]
    fn disk_area_converges_to_pi() {
        let mut prev = 0.0;
        for r in [2, 4, 8, 16] {
            let a = generate_ball_mesh(2, r).unwrap().total_volume();
            assert!(a < PI && a > prev);
            prev = a;
        }
        assert!((PI - prev) / PI < 0.02);
    }

    #[test]
    fn ball_volume_increases_from_below() {
        let exact = 4.0 * PI / 3.0;
        let mut prev = 0.0;
        for r in [1, 2, 4, 6] {
            let v = generate_ball_mesh(3, r).unwrap().total_volume();
            assert!(v < exact && v > prev, "r={r}: {v}");
            prev = v;
        }
        assert!((exact - prev) / exact < 0.03);
    }

    #[test]
    fn vertex_count_grows() {
        assert_eq!(generate_ball_mesh(3, 2).unwrap().n_vertices(), 125);
        assert_eq!(generate_ball_mesh(2, 3).unwrap().n_vertices(), 49);
        assert_eq!(generate_ball_mesh(3, 2).unwrap().n_cells(), 6 * 64);
    }

    #[test]
    fn markers_split_by_hemisphere() {
        let m = generate_ball_mesh(3, 2).unwrap();
        for f in 0..m.n_facets() {
            let c = m.facet_centroid(f);
            let expect = if c[2] > 0.0 {
                MARKER_UPPER
            } else {
                MARKER_LOWER
            };
            assert_eq!(m.facet_marker(f), expect);
        }
    }
}
