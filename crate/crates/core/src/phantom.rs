//! Piecewise-constant conductivity phantoms and the spatial prior field μ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{EitError, Result};
use crate::field::NodalField;
use crate::mesh::{Point, SimplicialMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Ball,
    Ellipsoid,
}

/// A ball or ellipsoid inclusion. `rotation` is the angle (radians,
/// counter-clockwise seen from +z) about the axis parallel to z through the
/// center; for a ball only `semi_axes[0]` is used as the radius. On 2D meshes
/// only the first two coordinates take part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inclusion {
    pub shape: Shape,
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    #[serde(default)]
    pub rotation: f64,
    pub value: f64,
}

impl Inclusion {
    pub fn ball(center: [f64; 3], radius: f64, value: f64) -> Self {
        Inclusion {
            shape: Shape::Ball,
            center,
            semi_axes: [radius; 3],
            rotation: 0.0,
            value,
        }
    }

    pub fn ellipsoid(center: [f64; 3], semi_axes: [f64; 3], rotation: f64, value: f64) -> Self {
        Inclusion {
            shape: Shape::Ellipsoid,
            center,
            semi_axes,
            rotation,
            value,
        }
    }

    fn axes(&self) -> [f64; 3] {
        match self.shape {
            Shape::Ball => [self.semi_axes[0]; 3],
            Shape::Ellipsoid => self.semi_axes,
        }
    }

    /// Whether `p` lies in the inclusion scaled by `dilation` about its center.
    pub fn contains(&self, p: &Point, dim: usize, dilation: f64) -> bool {
        let d = [
            p[0] - self.center[0],
            p[1] - self.center[1],
            p[2] - self.center[2],
        ];
        let (s, c) = self.rotation.sin_cos();
        // inverse rotation about z
        let local = [c * d[0] + s * d[1], -s * d[0] + c * d[1], d[2]];
        let axes = self.axes();
        let q: f64 = (0..dim)
            .map(|a| (local[a] / (dilation * axes[a])).powi(2))
            .sum();
        q <= 1.0
    }

    /// Point of the (rotated) surface for local spherical angles.
    fn surface_point(&self, theta: f64, phi: f64) -> Point {
        let a = self.axes();
        let l = [
            a[0] * theta.sin() * phi.cos(),
            a[1] * theta.sin() * phi.sin(),
            a[2] * theta.cos(),
        ];
        let (s, c) = self.rotation.sin_cos();
        [
            self.center[0] + c * l[0] - s * l[1],
            self.center[1] + s * l[0] + c * l[1],
            self.center[2] + l[2],
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub background: f64,
    pub inclusions: Vec<Inclusion>,
    /// Allow vertices inside several inclusions (first listed wins).
    #[serde(default)]
    pub allow_overlap: bool,
}

impl Default for PhantomSpec {
    /// Ball inclusion of value 2 and two rotated ellipsoids of value 0.5 in a
    /// unit-conductivity background.
    fn default() -> Self {
        let a = 5.0 * PI / 12.0;
        PhantomSpec {
            background: 1.0,
            inclusions: vec![
                Inclusion::ball([-0.09, -0.55, 0.0], 0.35, 2.0),
                Inclusion::ellipsoid(
                    [-0.55 * a.sin(), 0.55 * a.cos(), 0.0],
                    [0.6, 0.3, 0.3],
                    a,
                    0.5,
                ),
                Inclusion::ellipsoid(
                    [0.45 * a.sin(), 0.45 * a.cos(), 0.0],
                    [0.7, 0.35, 0.35],
                    -a,
                    0.5,
                ),
            ],
            allow_overlap: false,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.background > 0.0 && self.background.is_finite()) {
            return Err(EitError::InvalidParameter(format!(
                "background conductivity must be positive, got {}",
                self.background
            )));
        }
        for (i, inc) in self.inclusions.iter().enumerate() {
            if !(inc.value > 0.0 && inc.value.is_finite()) {
                return Err(EitError::InvalidParameter(format!(
                    "inclusion {i} value must be positive, got {}",
                    inc.value
                )));
            }
            if inc.axes().iter().any(|&s| !(s > 0.0)) {
                return Err(EitError::InvalidParameter(format!(
                    "inclusion {i} has a non-positive semi-axis"
                )));
            }
            let mut reach: f64 = 0.0;
            for it in 0..=24 {
                for ip in 0..48 {
                    let p = inc.surface_point(PI * it as f64 / 24.0, 2.0 * PI * ip as f64 / 48.0);
                    reach = reach.max((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
                }
            }
            if reach > 1.0 {
                return Err(EitError::InvalidParameter(format!(
                    "inclusion {i} extends outside the unit ball (radius {reach:.3})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Phantom {
    pub sigma: NodalField,
    /// Per inclusion, per vertex membership.
    pub masks: Vec<Vec<bool>>,
}

/// Nodal conductivity of the phantom and per-inclusion vertex masks.
pub fn build_phantom(spec: &PhantomSpec, mesh: &SimplicialMesh) -> Result<Phantom> {
    spec.validate()?;
    let dim = mesh.dim();
    let mut sigma = vec![spec.background; mesh.n_vertices()];
    let mut masks = vec![vec![false; mesh.n_vertices()]; spec.inclusions.len()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        let mut owner: Option<usize> = None;
        for (i, inc) in spec.inclusions.iter().enumerate() {
            if inc.contains(p, dim, 1.0) {
                masks[i][v] = true;
                match owner {
                    None => {
                        owner = Some(i);
                        sigma[v] = inc.value;
                    }
                    Some(first) if !spec.allow_overlap => {
                        return Err(EitError::OverlappingInclusions {
                            vertex: v,
                            first,
                            second: i,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(Phantom {
        sigma: NodalField::from_values(mesh, sigma)?,
        masks,
    })
}

/// Prior weights: `mu_in` at vertices inside any inclusion dilated by
/// `dilation` about its own center, 1 elsewhere.
pub fn prior_field(
    spec: &PhantomSpec,
    mesh: &SimplicialMesh,
    dilation: f64,
    mu_in: f64,
) -> Result<NodalField> {
    if !(dilation >= 1.0) {
        return Err(EitError::InvalidParameter(format!(
            "prior dilation must be at least 1, got {dilation}"
        )));
    }
    if !(mu_in > 0.0 && mu_in <= 1.0) {
        return Err(EitError::InvalidParameter(format!(
            "mu_in must lie in (0, 1], got {mu_in}"
        )));
    }
    let dim = mesh.dim();
    Ok(NodalField::from_fn(mesh, |p| {
        prior_value(spec, p, dim, dilation, mu_in)
    }))
}

pub fn prior_value(spec: &PhantomSpec, p: &Point, dim: usize, dilation: f64, mu_in: f64) -> f64 {
    if spec
        .inclusions
        .iter()
        .any(|inc| inc.contains(p, dim, dilation))
    {
        mu_in
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_ball_mesh;

    fn value_at(spec: &PhantomSpec, p: Point) -> f64 {
        for inc in &spec.inclusions {
            if inc.contains(&p, 3, 1.0) {
                return inc.value;
            }
        }
        spec.background
    }

    #[test]
    fn default_phantom_values() {
        let s = PhantomSpec::default();
        s.validate().unwrap();
        assert_eq!(value_at(&s, [-0.09, -0.55, 0.0]), 2.0);
        assert_eq!(value_at(&s, [0.0, 0.0, 0.9]), 1.0);
        let a = 5.0 * PI / 12.0;
        assert_eq!(value_at(&s, [-0.55 * a.sin(), 0.55 * a.cos(), 0.0]), 0.5);
        assert_eq!(value_at(&s, [0.45 * a.sin(), 0.45 * a.cos(), 0.0]), 0.5);
    }

    #[test]
    fn rotation_is_counterclockwise() {
        let inc = Inclusion::ellipsoid([0.0; 3], [0.6, 0.1, 0.1], PI / 2.0, 1.0);
        assert!(inc.contains(&[0.0, 0.5, 0.0], 3, 1.0));
        assert!(!inc.contains(&[0.5, 0.0, 0.0], 3, 1.0));
    }

    #[test]
    fn phantom_field_takes_only_spec_values() {
        let m = generate_ball_mesh(3, 4).unwrap();
        let s = PhantomSpec::default();
        let ph = build_phantom(&s, &m).unwrap();
        for &x in ph.sigma.iter() {
            assert!(x == 1.0 || x == 2.0 || x == 0.5);
        }
        assert!(ph.masks.iter().all(|m| m.iter().any(|&b| b)));
    }

    #[test]
    fn overlap_is_reported() {
        let m = generate_ball_mesh(2, 4).unwrap();
        let mut s = PhantomSpec {
            background: 1.0,
            inclusions: vec![
                Inclusion::ball([0.0; 3], 0.4, 2.0),
                Inclusion::ball([0.1, 0.0, 0.0], 0.4, 3.0),
            ],
            allow_overlap: false,
        };
        assert!(matches!(
            build_phantom(&s, &m),
            Err(EitError::OverlappingInclusions { .. })
        ));
        s.allow_overlap = true;
        let ph = build_phantom(&s, &m).unwrap();
        let origin = (0..m.n_vertices())
            .find(|&v| m.vertex(v) == &[0.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(ph.sigma[origin], 2.0);
    }

    #[test]
    fn rejects_inclusions_outside_ball() {
        let s = PhantomSpec {
            background: 1.0,
            inclusions: vec![Inclusion::ball([0.8, 0.0, 0.0], 0.3, 2.0)],
            allow_overlap: false,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn prior_field_uses_dilated_support() {
        let s = PhantomSpec::default();
        let mu = |p: Point| prior_value(&s, &p, 3, 1.1, 1e-2);
        assert_eq!(mu([-0.09, -0.55, 0.0]), 1e-2);
        assert_eq!(mu([-0.09 + 0.38, -0.55, 0.0]), 1e-2);
        assert_eq!(mu([-0.09 + 0.39, -0.55, 0.0]), 1.0);
        assert_eq!(mu([0.0, 0.0, 0.9]), 1.0);

        let m = generate_ball_mesh(3, 4).unwrap();
        let field = prior_field(&s, &m, 1.1, 1e-2).unwrap();
        let ph = build_phantom(&s, &m).unwrap();
        for v in 0..m.n_vertices() {
            assert!(field[v] == 1e-2 || field[v] == 1.0);
            if ph.masks.iter().any(|mask| mask[v]) {
                assert_eq!(field[v], 1e-2);
            }
        }
        assert!(prior_field(&s, &m, 0.9, 1e-2).is_err());
    }
}
