//! Neumann current patterns built from boundary harmonics, for full and
//! hemispherical boundary data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EitError, Result};
use crate::harmonics::{boundary_harmonic, orders};
use crate::mesh::{BoundaryRegion, BoundarySubset, Point, SimplicialMesh};

/// A boundary current: nodal values on the vertices of its support subset
/// (zero elsewhere), applied as `χ_Γ g`.
#[derive(Clone, Debug)]
pub struct BoundaryPattern {
    values: Vec<f64>,
    support: Arc<BoundarySubset>,
    degree: usize,
    order: i32,
}

impl BoundaryPattern {
    /// Wraps raw nodal values. Entries off the support are zeroed.
    pub fn new(
        mut values: Vec<f64>,
        support: Arc<BoundarySubset>,
        degree: usize,
        order: i32,
    ) -> Result<Self> {
        if values.len() != support.n_mesh_vertices() {
            return Err(EitError::LengthMismatch {
                what: "boundary pattern",
                expected: support.n_mesh_vertices(),
                found: values.len(),
            });
        }
        for (v, x) in values.iter_mut().enumerate() {
            if !support.contains_vertex(v) {
                *x = 0.0;
            }
        }
        Ok(BoundaryPattern {
            values,
            support,
            degree,
            order,
        })
    }

    pub fn zero(support: Arc<BoundarySubset>) -> Self {
        BoundaryPattern {
            values: vec![0.0; support.n_mesh_vertices()],
            support,
            degree: 0,
            order: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> &Arc<BoundarySubset> {
        &self.support
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    /// `∫_Γ g ds`.
    pub fn integral(&self) -> f64 {
        self.support.integral(&self.values)
    }

    /// Load vector `b_i = ∫_Γ g ψ_i ds`.
    pub fn load(&self) -> Vec<f64> {
        self.support.mass_apply(&self.values)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.values.iter_mut().for_each(|x| *x *= s);
        p
    }
}

/// Which boundary part carries the currents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternSupport {
    Full,
    UpperHalf,
    LowerHalf,
}

impl PatternSupport {
    pub fn region(self) -> BoundaryRegion {
        match self {
            PatternSupport::Full => BoundaryRegion::Full,
            PatternSupport::UpperHalf => BoundaryRegion::UpperHalf,
            PatternSupport::LowerHalf => BoundaryRegion::LowerHalf,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PatternFamily {
    pub support: PatternSupport,
    pub n_max: usize,
    pub patterns: Vec<BoundaryPattern>,
}

impl PatternFamily {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn subset(&self) -> &Arc<BoundarySubset> {
        self.patterns[0].support()
    }
}

/// Number of patterns with degrees `1..=n_max` in dimension `dim`.
pub fn family_size(dim: usize, n_max: usize) -> usize {
    (1..=n_max).map(|n| orders(dim, n).len()).sum()
}

/// Maps a point of the hemisphere around `pole` onto the whole sphere by
/// doubling its polar angle measured from the pole; azimuth is preserved.
pub fn stretch_hemisphere(p: &Point, pole: &Point) -> Point {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let x = p.map(|c| c / r);
    let cos_t = (x[0] * pole[0] + x[1] * pole[1] + x[2] * pole[2]).clamp(-1.0, 1.0);
    let mut t = [
        x[0] - cos_t * pole[0],
        x[1] - cos_t * pole[1],
        x[2] - cos_t * pole[2],
    ];
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if tn < 1e-14 {
        // pole and antipode both map to the pole
        return *pole;
    }
    t = t.map(|c| c / tn);
    let theta = cos_t.acos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    [
        c2 * pole[0] + s2 * t[0],
        c2 * pole[1] + s2 * t[1],
        c2 * pole[2] + s2 * t[2],
    ]
}

/// Harmonic currents of degrees `1..=n_max` supported on `support`. On a
/// hemisphere the harmonics are composed with [`stretch_hemisphere`] so that
/// each pattern shows the same number of periods as on the full sphere. Every
/// pattern is made ds-mean-zero by subtracting a constant on its support.
pub fn harmonic_patterns(
    mesh: &SimplicialMesh,
    support: PatternSupport,
    n_max: usize,
) -> Result<PatternFamily> {
    if n_max == 0 {
        return Err(EitError::InvalidParameter(
            "n_max must be at least 1".into(),
        ));
    }
    let dim = mesh.dim();
    let region = support.region();
    let subset = Arc::new(region.select(mesh)?);
    let pole = region.pole(dim);
    let mut patterns = Vec::with_capacity(family_size(dim, n_max));
    for n in 1..=n_max {
        for m in orders(dim, n) {
            let mut values = vec![0.0; mesh.n_vertices()];
            for &v in subset.vertices() {
                let x = mesh.vertex(v);
                let q = match &pole {
                    Some(pole) => stretch_hemisphere(x, pole),
                    None => *x,
                };
                values[v] = boundary_harmonic(dim, n, m, &q)?;
            }
            subset.remove_mean(&mut values);
            patterns.push(BoundaryPattern::new(values, subset.clone(), n, m)?);
        }
    }
    Ok(PatternFamily {
        support,
        n_max,
        patterns,
    })
}

pub fn full_data_patterns(mesh: &SimplicialMesh, n_max: usize) -> Result<PatternFamily> {
    harmonic_patterns(mesh, PatternSupport::Full, n_max)
}

/// Hemisphere patterns; `upper` selects the half with last coordinate > 0.
pub fn partial_data_patterns(
    mesh: &SimplicialMesh,
    upper: bool,
    n_max: usize,
) -> Result<PatternFamily> {
    let support = if upper {
        PatternSupport::UpperHalf
    } else {
        PatternSupport::LowerHalf
    };
    harmonic_patterns(mesh, support, n_max)
}
