use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Point, SimplicialMesh};
use crate::error::{EitError, Result};

/// A union of whole boundary facets together with its discrete surface
/// measure (the boundary mass matrix restricted to those facets).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySubset {
    dim: usize,
    n_vertices: usize,
    facets: Vec<usize>,
    facet_vertices: Vec<usize>,
    facet_areas: Vec<f64>,
    vertices: Vec<usize>,
    weights: Vec<f64>,
    area: f64,
}

impl BoundarySubset {
    /// Selects the boundary facets whose centroid satisfies `predicate`.
    pub fn select(mesh: &SimplicialMesh, predicate: impl Fn(&Point) -> bool) -> Result<Self> {
        let facets: Vec<usize> = (0..mesh.n_facets())
            .filter(|&f| predicate(&mesh.facet_centroid(f)))
            .collect();
        Self::from_facets(mesh, facets)
    }

    pub fn from_markers(mesh: &SimplicialMesh, markers: &[i32]) -> Result<Self> {
        let facets: Vec<usize> = (0..mesh.n_facets())
            .filter(|&f| markers.contains(&mesh.facet_marker(f)))
            .collect();
        Self::from_facets(mesh, facets)
    }

    pub fn full(mesh: &SimplicialMesh) -> Self {
        Self::from_facets(mesh, (0..mesh.n_facets()).collect()).expect("mesh has boundary facets")
    }

    pub fn from_facets(mesh: &SimplicialMesh, facets: Vec<usize>) -> Result<Self> {
        if facets.is_empty() {
            return Err(EitError::EmptySelection);
        }
        let d = mesh.dim();
        let mut weights = vec![0.0; mesh.n_vertices()];
        let mut facet_vertices = Vec::with_capacity(facets.len() * d);
        let mut facet_areas = Vec::with_capacity(facets.len());
        let mut area = 0.0;
        for &f in &facets {
            let a = mesh.facet_area(f);
            area += a;
            facet_areas.push(a);
            for &v in mesh.facet(f) {
                weights[v] += a / d as f64;
                facet_vertices.push(v);
            }
        }
        let mut vertices = facet_vertices.clone();
        vertices.sort_unstable();
        vertices.dedup();
        Ok(BoundarySubset {
            dim: d,
            n_vertices: mesh.n_vertices(),
            facets,
            facet_vertices,
            facet_areas,
            vertices,
            weights,
            area,
        })
    }

    pub fn facets(&self) -> &[usize] {
        &self.facets
    }

    /// Sorted vertex indices touched by the subset.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Row sums of the subset mass matrix, one entry per mesh vertex.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn n_mesh_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Iterates `(vertices, area)` of every facet in the subset.
    pub fn facet_iter(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.facet_vertices
            .chunks(self.dim)
            .zip(self.facet_areas.iter().copied())
    }

    /// `B_Γ x` for a full-length nodal vector `x`, exact P1 surface quadrature.
    pub fn mass_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_vertices];
        let d = self.dim as f64;
        let denom = d * (d + 1.0);
        for (fv, a) in self.facet_iter() {
            let s: f64 = fv.iter().map(|&v| x[v]).sum();
            for &v in fv {
                // (1 + δ_ij) a / (d (d + 1)) summed over j
                y[v] += a * (s + x[v]) / denom;
            }
        }
        y
    }

    /// `xᵀ B_Γ y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim as f64;
        let denom = d * (d + 1.0);
        let mut acc = 0.0;
        for (fv, a) in self.facet_iter() {
            let sx: f64 = fv.iter().map(|&v| x[v]).sum();
            let sy: f64 = fv.iter().map(|&v| y[v]).sum();
            let diag: f64 = fv.iter().map(|&v| x[v] * y[v]).sum();
            acc += a * (sx * sy + diag) / denom;
        }
        acc
    }

    /// `∫_Γ x ds` for the P1 interpolant of `x`.
    pub fn integral(&self, x: &[f64]) -> f64 {
        self.vertices.iter().map(|&v| self.weights[v] * x[v]).sum()
    }

    /// Subtracts the ds-weighted mean over the subset from the subset's
    /// vertices (vertices outside the subset are left untouched).
    pub fn remove_mean(&self, x: &mut [f64]) {
        let mean = self.integral(x) / self.area;
        for &v in &self.vertices {
            x[v] -= mean;
        }
    }

    /// Subtracts the ds-weighted mean over the subset from every entry.
    pub fn shift_to_zero_mean(&self, x: &mut [f64]) {
        let mean = self.integral(x) / self.area;
        for xi in x.iter_mut() {
            *xi -= mean;
        }
    }
}

/// Named boundary regions used by configuration files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryRegion {
    /// The whole boundary.
    Full,
    /// Facets whose centroid has last coordinate > 0.
    UpperHalf,
    /// Facets whose centroid has last coordinate < 0.
    LowerHalf,
    /// Facets carrying any of the listed markers.
    Markers(Vec<i32>),
}

impl BoundaryRegion {
    pub fn select(&self, mesh: &SimplicialMesh) -> Result<BoundarySubset> {
        let last = mesh.dim() - 1;
        match self {
            BoundaryRegion::Full => Ok(BoundarySubset::full(mesh)),
            BoundaryRegion::UpperHalf => BoundarySubset::select(mesh, |c| c[last] > 0.0),
            BoundaryRegion::LowerHalf => BoundarySubset::select(mesh, |c| c[last] < 0.0),
            BoundaryRegion::Markers(m) => BoundarySubset::from_markers(mesh, m),
        }
    }

    /// Unit normal of the pole of a hemisphere region, if any.
    pub fn pole(&self, dim: usize) -> Option<Point> {
        let mut p = [0.0; 3];
        match self {
            BoundaryRegion::UpperHalf => p[dim - 1] = 1.0,
            BoundaryRegion::LowerHalf => p[dim - 1] = -1.0,
            _ => return None,
        }
        Some(p)
    }
}

impl fmt::Display for BoundaryRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryRegion::Full => f.write_str("full"),
            BoundaryRegion::UpperHalf => f.write_str("upper-half"),
            BoundaryRegion::LowerHalf => f.write_str("lower-half"),
            BoundaryRegion::Markers(m) => {
                let list: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                write!(f, "markers:{}", list.join(","))
            }
        }
    }
}

impl FromStr for BoundaryRegion {
    type Err = EitError;

    /// Parses `full`, `upper-half`, `lower-half` or `markers:1,2,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(BoundaryRegion::Full),
            "upper-half" => Ok(BoundaryRegion::UpperHalf),
            "lower-half" => Ok(BoundaryRegion::LowerHalf),
            other => {
                let list = other.strip_prefix("markers:").ok_or_else(|| {
                    EitError::InvalidParameter(format!("unknown boundary region `{other}`"))
                })?;
                let markers = list
                    .split(',')
                    .map(|t| t.trim().parse::<i32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| {
                        EitError::InvalidParameter(format!("bad marker list `{list}`: {e}"))
                    })?;
                if markers.is_empty() {
                    return Err(EitError::InvalidParameter("empty marker list".into()));
                }
                Ok(BoundaryRegion::Markers(markers))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_ball_mesh;
    use std::f64::consts::PI;

    #[test]
    fn hemisphere_area_approaches_two_pi() {
        let mut errs = Vec::new();
        for r in [2, 4, 8] {
            let m = generate_ball_mesh(3, r).unwrap();
            let lower = BoundarySubset::select(&m, |c| c[2] < 0.0).unwrap();
            let full = BoundarySubset::select(&m, |_| true).unwrap();
            let facet_sum: f64 = lower.facets().iter().map(|&f| m.facet_area(f)).sum();
            assert!((lower.area() - facet_sum).abs() < 1e-12);
            let wsum: f64 = lower.weights().iter().sum();
            assert!((wsum - lower.area()).abs() < 1e-12);
            errs.push((
                (lower.area() - 2.0 * PI).abs(),
                (full.area() - 4.0 * PI).abs(),
            ));
        }
        assert!(errs[2].0 < errs[1].0 && errs[1].0 < errs[0].0);
        assert!(errs[2].0 / (2.0 * PI) < 0.02);
        assert!(errs[2].1 / (4.0 * PI) < 0.02);
    }

    #[test]
    fn empty_selection_is_rejected() {
        let m = generate_ball_mesh(2, 2).unwrap();
        assert!(matches!(
            BoundarySubset::select(&m, |_| false),
            Err(EitError::EmptySelection)
        ));
    }

    #[test]
    fn mass_apply_matches_inner() {
        let m = generate_ball_mesh(3, 2).unwrap();
        let s = BoundaryRegion::UpperHalf.select(&m).unwrap();
        let x: Vec<f64> = (0..m.n_vertices())
            .map(|i| (i as f64 * 0.37).sin())
            .collect();
        let y: Vec<f64> = (0..m.n_vertices())
            .map(|i| (i as f64 * 0.11).cos())
            .collect();
        let bx = s.mass_apply(&x);
        let lhs: f64 = bx.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((lhs - s.inner(&x, &y)).abs() < 1e-12);
        let ones = vec![1.0; m.n_vertices()];
        assert!((s.inner(&ones, &ones) - s.area()).abs() < 1e-12);
    }

    #[test]
    fn region_text_round_trip() {
        for r in [
            BoundaryRegion::Full,
            BoundaryRegion::UpperHalf,
            BoundaryRegion::LowerHalf,
            BoundaryRegion::Markers(vec![1, 7]),
        ] {
            assert_eq!(r.to_string().parse::<BoundaryRegion>().unwrap(), r);
        }
        assert!("sideways".parse::<BoundaryRegion>().is_err());
        assert!("markers:a".parse::<BoundaryRegion>().is_err());
    }
}
