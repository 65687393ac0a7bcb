//! Experiment configuration: a TOML file, dotted-path overrides and
//! validation with field paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparse_eit::forward::DEFAULT_MIN_VERTEX_RATIO;
use sparse_eit::{BoundaryRegion, PatternSupport, PhantomSpec, SimplicialMesh, SolverConfig};

use crate::error::CliError;

/// Where a mesh comes from. A `file` (Gmsh `.msh` or native `.mesh`) takes
/// precedence over `refinement`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSource {
    pub refinement: usize,
    pub file: Option<PathBuf>,
}

impl MeshSource {
    pub fn generated(refinement: usize) -> Self {
        MeshSource {
            refinement,
            file: None,
        }
    }
}

impl Default for MeshSource {
    fn default() -> Self {
        MeshSource::generated(12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// 3 for the ball, 2 for the disk.
    pub dim: usize,
    /// Simulation mesh.
    pub fine: MeshSource,
    /// Reconstruction mesh.
    pub coarse: MeshSource,
}

impl Default for MeshConfig {
    /// Coarse ball with 25³ = 15625 vertices, fine ball with 37³ = 50653.
    fn default() -> Self {
        MeshConfig {
            dim: 3,
            fine: MeshSource::generated(18),
            coarse: MeshSource::generated(12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Boundary part carrying the current patterns.
    pub support: PatternSupport,
    /// Highest harmonic degree; 5 gives 35 patterns on the sphere.
    pub n_max: usize,
    /// Measurement part `Γ_D`; the pattern support when absent.
    pub gamma_d: Option<BoundaryRegion>,
    /// Relative noise level.
    pub epsilon: f64,
    pub min_vertex_ratio: f64,
    pub allow_inverse_crime: bool,
    pub snap_tolerance: Option<f64>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            support: PatternSupport::Full,
            n_max: 5,
            gamma_d: None,
            epsilon: 1e-2,
            min_vertex_ratio: DEFAULT_MIN_VERTEX_RATIO,
            allow_inverse_crime: false,
            snap_tolerance: None,
        }
    }
}

impl DataConfig {
    pub fn gamma_d(&self) -> BoundaryRegion {
        self.gamma_d
            .clone()
            .unwrap_or_else(|| self.support.region())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    Off,
    /// `μ = mu_in` inside the phantom inclusions scaled by `dilation`.
    DilatedSupport {
        #[serde(default = "default_dilation")]
        dilation: f64,
        #[serde(default = "default_mu_in")]
        mu_in: f64,
    },
}

fn default_dilation() -> f64 {
    1.1
}

fn default_mu_in() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationConfig {
    pub alpha: f64,
    /// Constant background conductivity `σ₀`.
    pub background: f64,
    pub prior: PriorConfig,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig {
            alpha: 1e-3,
            background: 1.0,
            prior: PriorConfig::Off,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NdmapCheckConfig {
    pub refinement: usize,
    pub n_max: usize,
    pub conductivity: f64,
    /// Largest accepted relative `L²(∂Ω)` error.
    pub bound: f64,
}

impl Default for NdmapCheckConfig {
    fn default() -> Self {
        NdmapCheckConfig {
            refinement: 8,
            n_max: 3,
            conductivity: 1.0,
            bound: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientCheckConfig {
    pub refinement: usize,
    pub n_max: usize,
    pub directions: usize,
    /// Finite-difference step.
    pub h: f64,
    /// Largest accepted relative error.
    pub bound: f64,
}

impl Default for GradientCheckConfig {
    fn default() -> Self {
        GradientCheckConfig {
            refinement: 4,
            n_max: 2,
            directions: 4,
            h: 1e-4,
            bound: 1e-5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mesh: MeshConfig,
    pub phantom: PhantomSpec,
    pub data: DataConfig,
    pub regularization: RegularizationConfig,
    pub solver: SolverConfig,
    pub ndmap_check: NdmapCheckConfig,
    pub gradient_check: GradientCheckConfig,
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_owned(),
        message: message.into(),
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

/// Sets `path` (dot separated) in `table`, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "override must have the form key.path=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(invalid(path, "empty key in override path"));
    }
    let mut node = table;
    for (i, key) in keys[..keys.len() - 1].iter().enumerate() {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| invalid(&keys[..=i].join("."), "is not a table"))?;
    }
    node.insert(keys[keys.len() - 1].to_owned(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Reads `path` (or starts from defaults), applies the overrides in
    /// order and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid("--config", format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| invalid(&p.display().to_string(), e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| invalid("config", e.to_string().trim_end().to_owned()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks value ranges; errors name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.mesh.dim != 2 && self.mesh.dim != 3 {
            return Err(invalid(
                "mesh.dim",
                format!("must be 2 or 3, got {}", self.mesh.dim),
            ));
        }
        for (name, src) in [
            ("mesh.fine", &self.mesh.fine),
            ("mesh.coarse", &self.mesh.coarse),
        ] {
            if src.file.is_none() && src.refinement == 0 {
                return Err(invalid(&format!("{name}.refinement"), "must be at least 1"));
            }
        }
        self.phantom
            .validate()
            .map_err(|e| invalid("phantom", e.to_string()))?;
        let d = &self.data;
        if d.n_max == 0 {
            return Err(invalid("data.n_max", "must be at least 1"));
        }
        if !(d.epsilon >= 0.0 && d.epsilon.is_finite()) {
            return Err(invalid(
                "data.epsilon",
                format!("must be finite and >= 0, got {}", d.epsilon),
            ));
        }
        if !(d.min_vertex_ratio >= 1.0) {
            return Err(invalid("data.min_vertex_ratio", "must be at least 1"));
        }
        if let Some(t) = d.snap_tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(
                    "data.snap_tolerance",
                    format!("must be finite and >= 0, got {t}"),
                ));
            }
        }
        if let Some(BoundaryRegion::Markers(m)) = &d.gamma_d {
            if m.is_empty() {
                return Err(invalid(
                    "data.gamma_d.markers",
                    "must list at least one marker",
                ));
            }
        }
        let r = &self.regularization;
        if !(r.alpha > 0.0 && r.alpha.is_finite()) {
            return Err(invalid(
                "regularization.alpha",
                format!("must be finite and > 0, got {}", r.alpha),
            ));
        }
        if !(r.background > 0.0 && r.background.is_finite()) {
            return Err(invalid(
                "regularization.background",
                format!("must be > 0, got {}", r.background),
            ));
        }
        if let PriorConfig::DilatedSupport { dilation, mu_in } = r.prior {
            if !(dilation >= 1.0) {
                return Err(invalid(
                    "regularization.prior.dilation",
                    format!("must be >= 1, got {dilation}"),
                ));
            }
            if !(mu_in > 0.0 && mu_in <= 1.0) {
                return Err(invalid(
                    "regularization.prior.mu_in",
                    format!("must lie in (0, 1], got {mu_in}"),
                ));
            }
        }
        self.solver
            .validate()
            .map_err(|e| invalid("solver", e.to_string()))?;
        let n = &self.ndmap_check;
        if n.refinement == 0 || n.n_max == 0 {
            return Err(invalid(
                "ndmap_check",
                "refinement and n_max must be at least 1",
            ));
        }
        if !(n.conductivity > 0.0 && n.conductivity.is_finite()) {
            return Err(invalid("ndmap_check.conductivity", "must be > 0"));
        }
        if !(n.bound >= 0.0) {
            return Err(invalid("ndmap_check.bound", "must be >= 0"));
        }
        let g = &self.gradient_check;
        if g.refinement == 0 || g.n_max == 0 || g.directions == 0 {
            return Err(invalid(
                "gradient_check",
                "refinement, n_max and directions must be at least 1",
            ));
        }
        if !(g.h > 0.0) || !(g.bound >= 0.0) {
            return Err(invalid("gradient_check", "need h > 0 and bound >= 0"));
        }
        Ok(())
    }

    /// Checks that every marker named by `data.gamma_d` occurs on `mesh`.
    pub fn check_markers(&self, mesh: &SimplicialMesh) -> Result<(), CliError> {
        if let Some(BoundaryRegion::Markers(list)) = &self.data.gamma_d {
            for m in list {
                if !mesh.facet_markers().contains(m) {
                    return Err(invalid(
                        "data.gamma_d.markers",
                        format!("marker {m} does not occur on the mesh"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let back: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c = ExperimentConfig::load(
            None,
            &[
                "data.epsilon=0.05".into(),
                "mesh.dim=2".into(),
                "data.support=upper-half".into(),
                "regularization.prior.mode=dilated-support".into(),
                "solver.linear.rel_tol=1e-8".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.data.epsilon, 0.05);
        assert_eq!(c.mesh.dim, 2);
        assert_eq!(c.data.support, PatternSupport::UpperHalf);
        assert_eq!(c.data.gamma_d(), BoundaryRegion::UpperHalf);
        assert_eq!(
            c.regularization.prior,
            PriorConfig::DilatedSupport {
                dilation: 1.1,
                mu_in: 1e-2
            }
        );
        assert_eq!(c.solver.linear.rel_tol, 1e-8);
    }

    #[test]
    fn errors_carry_field_paths() {
        let err = |o: &str| {
            ExperimentConfig::load(None, &[o.into()])
                .unwrap_err()
                .to_string()
        };
        assert!(err("data.epsilon=-0.1").contains("data.epsilon"));
        assert!(err("regularization.alpha=0").contains("regularization.alpha"));
        assert!(err("mesh.dim=4").contains("mesh.dim"));
        assert!(err("data.bogus=1").contains("bogus"));
        assert!(err("no-equals-sign").contains("key.path=value"));
    }

    #[test]
    fn markers_must_exist() {
        let mut c = ExperimentConfig::default();
        c.data.gamma_d = Some(BoundaryRegion::Markers(vec![1, 7]));
        let m = sparse_eit::generate_ball_mesh(2, 2).unwrap();
        assert!(c
            .check_markers(&m)
            .unwrap_err()
            .to_string()
            .contains("marker 7"));
        c.data.gamma_d = Some(BoundaryRegion::Markers(vec![1, 2]));
        c.check_markers(&m).unwrap();
    }
}
