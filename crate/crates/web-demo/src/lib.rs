//! Disk-sized experiments for the browser. The plain functions do the work and
//! are usable natively; the `#[wasm_bindgen]` wrappers only convert types.

use std::sync::Arc;

use sparse_eit::forward::{nd_apply, simulate_cauchy_data, SimulationSettings};
use sparse_eit::metrics::relative_l2_error;
use sparse_eit::patterns::{full_data_patterns, PatternSupport};
use sparse_eit::phantom::{build_phantom, prior_field};
use sparse_eit::reconstruct::run_with_observer;
use sparse_eit::{
    generate_ball_mesh, FemSpace, NodalField, PhantomSpec, RegularizationPlan, SimplicialMesh,
    SolverConfig,
};
use wasm_bindgen::prelude::*;

/// Largest coarse refinement the page offers; the fine mesh doubles it.
pub const MAX_REFINEMENT: usize = 24;

/// A nodal field on a triangulated disk, flattened for drawing.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct DiskField {
    xy: Vec<f64>,
    triangles: Vec<u32>,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl DiskField {
    /// Interleaved `x, y` vertex coordinates.
    pub fn xy(&self) -> Vec<f64> {
        self.xy.clone()
    }

    /// Three vertex indices per triangle.
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

impl DiskField {
    fn new(mesh: &SimplicialMesh, values: Vec<f64>) -> Self {
        DiskField {
            xy: mesh.vertices().iter().flat_map(|p| [p[0], p[1]]).collect(),
            triangles: mesh.cells().flatten().map(|&v| v as u32).collect(),
            values,
        }
    }

    pub fn values_ref(&self) -> &[f64] {
        &self.values
    }

    pub fn n_vertices(&self) -> usize {
        self.values.len()
    }
}

#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct DemoReconstruction {
    truth: DiskField,
    sigma: DiskField,
    discrepancy: Vec<f64>,
    iterations: usize,
    termination: String,
    relative_error: f64,
    background_error: f64,
}

#[wasm_bindgen]
impl DemoReconstruction {
    pub fn truth(&self) -> DiskField {
        self.truth.clone()
    }

    pub fn sigma(&self) -> DiskField {
        self.sigma.clone()
    }

    /// Discrepancy before the first step and after every accepted one.
    pub fn discrepancy(&self) -> Vec<f64> {
        self.discrepancy.clone()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn termination(&self) -> String {
        self.termination.clone()
    }

    #[wasm_bindgen(js_name = relativeError)]
    pub fn relative_error(&self) -> f64 {
        self.relative_error
    }

    #[wasm_bindgen(js_name = backgroundError)]
    pub fn background_error(&self) -> f64 {
        self.background_error
    }
}

impl DemoReconstruction {
    pub fn sigma_ref(&self) -> &DiskField {
        &self.sigma
    }
}

fn check_refinement(r: usize) -> Result<(), String> {
    if (2..=MAX_REFINEMENT).contains(&r) {
        Ok(())
    } else {
        Err(format!(
            "refinement must lie in 2..={MAX_REFINEMENT}, got {r}"
        ))
    }
}

fn disk(refinement: usize) -> Result<SimplicialMesh, String> {
    check_refinement(refinement)?;
    generate_ball_mesh(2, refinement).map_err(|e| e.to_string())
}

/// The default phantom sampled on the disk.
pub fn phantom(refinement: usize) -> Result<DiskField, String> {
    let mesh = disk(refinement)?;
    let ph = build_phantom(&PhantomSpec::default(), &mesh).map_err(|e| e.to_string())?;
    Ok(DiskField::new(&mesh, ph.sigma.into_values()))
}

/// Settings of [`reconstruct`].
#[derive(Clone, Debug, PartialEq)]
pub struct DemoSettings {
    pub refinement: usize,
    pub n_max: usize,
    pub support: PatternSupport,
    pub alpha: f64,
    pub epsilon: f64,
    pub prior: bool,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for DemoSettings {
    fn default() -> Self {
        DemoSettings {
            refinement: 10,
            n_max: 5,
            support: PatternSupport::Full,
            alpha: 1e-3,
            epsilon: 1e-2,
            prior: false,
            seed: 1,
            max_iterations: 200,
        }
    }
}

/// Simulates data on a disk twice as fine and reconstructs on the demo disk.
pub fn reconstruct(s: &DemoSettings) -> Result<DemoReconstruction, String> {
    let err = |e: sparse_eit::EitError| e.to_string();
    let coarse = Arc::new(disk(s.refinement)?);
    let fine = FemSpace::new(Arc::new(
        generate_ball_mesh(2, 2 * s.refinement).map_err(err)?,
    ));
    let spec = PhantomSpec::default();
    let settings = SimulationSettings {
        support: s.support,
        n_max: s.n_max,
        gamma_d: s.support.region(),
        epsilon: s.epsilon,
        seed: s.seed,
        ..SimulationSettings::default()
    };
    let truth_fine = build_phantom(&spec, fine.mesh()).map_err(err)?;
    let sim =
        simulate_cauchy_data(&fine, truth_fine.sigma.values(), &coarse, &settings).map_err(err)?;

    let space = FemSpace::new(coarse.clone());
    let mu = if s.prior {
        prior_field(&spec, &coarse, 1.1, 1e-2).map_err(err)?
    } else {
        NodalField::constant(&coarse, 1.0)
    };
    let plan = RegularizationPlan::new(&space, s.alpha, mu).map_err(err)?;
    let config = SolverConfig {
        max_iterations: s.max_iterations,
        ..SolverConfig::default()
    };
    let sigma0 = vec![1.0; coarse.n_vertices()];
    let result =
        run_with_observer(&space, &sim.data, &sigma0, &plan, &config, |_, _| {}).map_err(err)?;

    let sigma: Vec<f64> = result.delta.iter().map(|d| 1.0 + d).collect();
    let truth = build_phantom(&spec, &coarse)
        .map_err(err)?
        .sigma
        .into_values();
    let mut discrepancy = vec![result.initial_discrepancy];
    discrepancy.extend(result.log.iter().map(|r| r.discrepancy));
    Ok(DemoReconstruction {
        relative_error: relative_l2_error(&space, &sigma, &truth),
        background_error: relative_l2_error(&space, &sigma0, &truth),
        truth: DiskField::new(&coarse, truth),
        sigma: DiskField::new(&coarse, sigma),
        discrepancy,
        iterations: result.log.len(),
        termination: format!("{:?}", result.termination),
    })
}

/// Relative `L²(∂Ω)` error of the discrete ND map for `γ ≡ 1` against
/// `cos(nθ)/n` and `sin(nθ)/n`, ordered by degree then order.
pub fn ndmap_errors(refinement: usize, n_max: usize) -> Result<Vec<f64>, String> {
    let err = |e: sparse_eit::EitError| e.to_string();
    let mesh = Arc::new(disk(refinement)?);
    let space = FemSpace::new(mesh.clone());
    let ones = vec![1.0; mesh.n_vertices()];
    let boundary = space.full_boundary();
    full_data_patterns(&mesh, n_max)
        .map_err(err)?
        .patterns
        .iter()
        .map(|g| {
            let trace = nd_apply(&space, &ones, g, boundary).map_err(err)?;
            let exact: Vec<f64> = g.values().iter().map(|x| x / g.degree() as f64).collect();
            let diff: Vec<f64> = trace
                .values()
                .iter()
                .zip(&exact)
                .map(|(a, b)| a - b)
                .collect();
            Ok((boundary.inner(&diff, &diff) / boundary.inner(&exact, &exact)).sqrt())
        })
        .collect()
}

#[wasm_bindgen(js_name = phantomField)]
pub fn phantom_field(refinement: usize) -> Result<DiskField, JsError> {
    phantom(refinement).map_err(|e| JsError::new(&e))
}

/// `support` is `"full"`, `"upper-half"` or `"lower-half"`.
#[wasm_bindgen(js_name = reconstructDisk)]
#[allow(clippy::too_many_arguments)]
pub fn reconstruct_disk(
    refinement: usize,
    n_max: usize,
    support: &str,
    alpha: f64,
    epsilon: f64,
    prior: bool,
    seed: u32,
    max_iterations: usize,
) -> Result<DemoReconstruction, JsError> {
    let support = match support {
        "full" => PatternSupport::Full,
        "upper-half" => PatternSupport::UpperHalf,
        "lower-half" => PatternSupport::LowerHalf,
        other => return Err(JsError::new(&format!("unknown support `{other}`"))),
    };
    let s = DemoSettings {
        refinement,
        n_max,
        support,
        alpha,
        epsilon,
        prior,
        seed: seed.into(),
        max_iterations,
    };
    reconstruct(&s).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ndmapCheck)]
pub fn ndmap_check(refinement: usize, n_max: usize) -> Result<Vec<f64>, JsError> {
    ndmap_errors(refinement, n_max).map_err(|e| JsError::new(&e))
}
