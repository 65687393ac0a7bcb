//! The four subcommands.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{debug, info};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use sparse_eit::forward::{
    nd_apply, read_dataset_file, simulate_cauchy_data, synthesize_exact_data, write_dataset_file,
    SimulationSettings,
};
use sparse_eit::mesh::{gmsh, native};
use sparse_eit::metrics::relative_l2_error;
use sparse_eit::patterns::{full_data_patterns, harmonic_patterns};
use sparse_eit::phantom::{build_phantom, prior_field};
use sparse_eit::reconstruct::{directional_derivative_check, run_with_observer, IterationRecord};
use sparse_eit::vtk::write_vtk_file;
use sparse_eit::{
    generate_ball_mesh, FemSpace, NodalField, RegularizationPlan, SimplicialMesh, Termination,
};

use crate::config::{ExperimentConfig, MeshSource, PriorConfig};
use crate::error::{CliError, EXIT_FAILURE, EXIT_ITERATION_CAP, EXIT_SOLVER};
use crate::manifest::RunManifest;

pub const DATA_FILE: &str = "data.txt";
pub const CONFIG_FILE: &str = "config.toml";
pub const PHANTOM_VTK: &str = "phantom.vtk";
pub const RECONSTRUCTION_VTK: &str = "reconstruction.vtk";
pub const LOG_FILE: &str = "iterations.csv";

/// Result of a command: its exit status and the manifest path, if any.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub manifest: Option<PathBuf>,
}

pub fn load_mesh(dim: usize, source: &MeshSource, what: &str) -> Result<SimplicialMesh, CliError> {
    let mesh = match &source.file {
        Some(path) => {
            let is_gmsh = path.extension().is_some_and(|e| e == "msh");
            let mesh = if is_gmsh {
                gmsh::read_gmsh_file(path)?
            } else {
                let f =
                    File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
                native::read_mesh(std::io::BufReader::new(f))?
            };
            if mesh.dim() != dim {
                return Err(CliError::Config {
                    path: format!("mesh.{what}.file"),
                    message: format!("mesh is {}D but mesh.dim is {dim}", mesh.dim()),
                });
            }
            mesh
        }
        None => generate_ball_mesh(dim, source.refinement)?,
    };
    info!(
        "{what} mesh: {} vertices, {} cells",
        mesh.n_vertices(),
        mesh.n_cells()
    );
    Ok(mesh)
}

fn prepare_output(
    config: &ExperimentConfig,
    manifest: &mut RunManifest,
) -> Result<PathBuf, CliError> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let path = dir.join(CONFIG_FILE);
    std::fs::write(&path, config.to_toml())
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    manifest.add_file(CONFIG_FILE);
    Ok(dir)
}

/// Generates noisy Cauchy data on the fine mesh and writes it for the coarse one.
pub fn simulate(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut manifest = RunManifest::new("simulate", config);
    let dir = prepare_output(config, &mut manifest)?;
    let dim = config.mesh.dim;
    let (fine, coarse) = manifest.time("meshes", || -> Result<_, CliError> {
        let fine = load_mesh(dim, &config.mesh.fine, "fine")?;
        let coarse = load_mesh(dim, &config.mesh.coarse, "coarse")?;
        Ok((fine, coarse))
    })?;
    config.check_markers(&fine)?;
    config.check_markers(&coarse)?;

    let phantom = build_phantom(&config.phantom, &fine)?;
    let settings = SimulationSettings {
        support: config.data.support,
        n_max: config.data.n_max,
        gamma_d: config.data.gamma_d(),
        epsilon: config.data.epsilon,
        seed: config.seed,
        min_vertex_ratio: config.data.min_vertex_ratio,
        allow_inverse_crime: config.data.allow_inverse_crime,
        snap_tolerance: config.data.snap_tolerance,
    };
    let fine_space = FemSpace::with_options(Arc::new(fine), config.solver.linear);
    let sim = manifest.time("forward", || {
        simulate_cauchy_data(&fine_space, phantom.sigma.values(), &coarse, &settings)
    })?;
    info!(
        "{} patterns, noise std {:e}",
        sim.data.len(),
        sim.data.noise_std
    );

    write_dataset_file(&sim.data, dir.join(DATA_FILE))?;
    manifest.add_file(DATA_FILE);
    let coarse_phantom = build_phantom(&config.phantom, &coarse)?;
    write_vtk_file(
        &coarse,
        &[("sigma_true", coarse_phantom.sigma.values())],
        dir.join(PHANTOM_VTK),
    )?;
    manifest.add_file(PHANTOM_VTK);

    manifest.record("patterns", sim.data.len());
    manifest.record("noise_std", sim.data.noise_std);
    manifest.record("fine_vertices", fine_space.mesh().n_vertices());
    manifest.record("coarse_vertices", coarse.n_vertices());
    manifest.record("coarse_mesh_hash", &sim.data.mesh_hash);
    let path = manifest.write(&dir)?;
    println!(
        "wrote {} patterns to {}",
        sim.data.len(),
        dir.join(DATA_FILE).display()
    );
    Ok(Outcome {
        exit_code: 0,
        manifest: Some(path),
    })
}

fn write_log(path: &Path, log: &[IterationRecord]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Output {
        what: "iteration log",
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in log {
        w.serialize(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(())
}

#[derive(Serialize)]
struct ReconstructionSummary {
    termination: Termination,
    iterations: usize,
    initial_psi: f64,
    final_psi: f64,
    initial_discrepancy: f64,
    final_discrepancy: f64,
    relative_error: f64,
    background_relative_error: f64,
}

/// Runs the sparsity-regularized reconstruction on the coarse mesh.
pub fn reconstruct(
    config: &ExperimentConfig,
    data_path: Option<&Path>,
) -> Result<Outcome, CliError> {
    let mut manifest = RunManifest::new("reconstruct", config);
    let dir = prepare_output(config, &mut manifest)?;
    let coarse = Arc::new(load_mesh(config.mesh.dim, &config.mesh.coarse, "coarse")?);
    let data_path = data_path.map_or_else(|| dir.join(DATA_FILE), Path::to_path_buf);
    let data = read_dataset_file(&data_path, &coarse)?;
    info!("read {} patterns from {}", data.len(), data_path.display());

    let space = FemSpace::with_options(coarse.clone(), config.solver.linear);
    let n = coarse.n_vertices();
    let sigma0 = vec![config.regularization.background; n];
    let mu = match config.regularization.prior {
        PriorConfig::Off => None,
        PriorConfig::DilatedSupport { dilation, mu_in } => {
            Some(prior_field(&config.phantom, &coarse, dilation, mu_in)?)
        }
    };
    let mu_field = mu
        .clone()
        .unwrap_or_else(|| NodalField::constant(&coarse, 1.0));
    let plan = RegularizationPlan::new(&space, config.regularization.alpha, mu_field)?;

    let result = manifest.time("reconstruct", || {
        run_with_observer(&space, &data, &sigma0, &plan, &config.solver, |r, _| {
            debug!(
                "iteration {:4}  psi {:.6e}  discrepancy {:.6e}  step {:.3e}  trials {}",
                r.iteration, r.psi, r.discrepancy, r.step, r.trials
            );
        })
    })?;
    info!(
        "{:?} after {} iterations",
        result.termination,
        result.log.len()
    );

    write_log(&dir.join(LOG_FILE), &result.log)?;
    manifest.add_file(LOG_FILE);
    let sigma: Vec<f64> = sigma0
        .iter()
        .zip(result.delta.iter())
        .map(|(a, b)| a + b)
        .collect();
    let mut fields: Vec<(&str, &[f64])> =
        vec![("sigma", &sigma), ("delta_gamma", result.delta.values())];
    if let Some(mu) = &mu {
        fields.push(("mu", mu.values()));
    }
    write_vtk_file(&coarse, &fields, dir.join(RECONSTRUCTION_VTK))?;
    manifest.add_file(RECONSTRUCTION_VTK);

    let truth = build_phantom(&config.phantom, &coarse)?;
    let summary = ReconstructionSummary {
        termination: result.termination.clone(),
        iterations: result.log.len(),
        initial_psi: result.initial_psi,
        final_psi: result.log.last().map_or(result.initial_psi, |r| r.psi),
        initial_discrepancy: result.initial_discrepancy,
        final_discrepancy: result.final_discrepancy,
        relative_error: relative_l2_error(&space, &sigma, truth.sigma.values()),
        background_relative_error: relative_l2_error(&space, &sigma0, truth.sigma.values()),
    };
    println!(
        "{:?}: {} iterations, discrepancy {:.4e} -> {:.4e}, relative error {:.4} (background {:.4})",
        summary.termination,
        summary.iterations,
        summary.initial_discrepancy,
        summary.final_discrepancy,
        summary.relative_error,
        summary.background_relative_error
    );
    let exit_code = match summary.termination {
        Termination::StepBelowStop | Termination::Stationary => 0,
        Termination::IterationCap => EXIT_ITERATION_CAP,
        Termination::SolverFailure(_) => EXIT_SOLVER,
    };
    manifest.record("result", &summary);
    let path = manifest.write(&dir)?;
    Ok(Outcome {
        exit_code,
        manifest: Some(path),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NdmapRow {
    pub degree: usize,
    pub order: i32,
    pub relative_error: f64,
}

/// Relative `L²(∂Ω)` errors of the discrete ND map for a constant
/// conductivity against its exact eigenvalues `1/(γ n)`.
pub fn ndmap_errors(config: &ExperimentConfig) -> Result<Vec<NdmapRow>, CliError> {
    let c = &config.ndmap_check;
    let mesh = Arc::new(generate_ball_mesh(config.mesh.dim, c.refinement)?);
    let space = FemSpace::with_options(mesh.clone(), config.solver.linear);
    let gamma = vec![c.conductivity; mesh.n_vertices()];
    let family = full_data_patterns(&mesh, c.n_max)?;
    let boundary = space.full_boundary();
    let mut rows = Vec::with_capacity(family.len());
    for g in &family.patterns {
        let trace = nd_apply(&space, &gamma, g, boundary)?;
        let scale = 1.0 / (c.conductivity * g.degree() as f64);
        let exact: Vec<f64> = g.values().iter().map(|x| x * scale).collect();
        let diff: Vec<f64> = trace
            .values()
            .iter()
            .zip(&exact)
            .map(|(a, b)| a - b)
            .collect();
        rows.push(NdmapRow {
            degree: g.degree(),
            order: g.order(),
            relative_error: (boundary.inner(&diff, &diff) / boundary.inner(&exact, &exact)).sqrt(),
        });
    }
    Ok(rows)
}

pub fn ndmap_check(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = ndmap_errors(config)?;
    let bound = config.ndmap_check.bound;
    println!("{:>3} {:>4} {:>14}", "n", "m", "rel. error");
    for r in &rows {
        let flag = if r.relative_error > bound {
            "  exceeds bound"
        } else {
            ""
        };
        println!(
            "{:>3} {:>4} {:>14.6e}{flag}",
            r.degree, r.order, r.relative_error
        );
    }
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let passed = worst <= bound;
    println!(
        "max error {worst:.6e}, bound {bound:e}: {}",
        if passed { "ok" } else { "FAILED" }
    );
    Ok(Outcome {
        exit_code: if passed { 0 } else { EXIT_FAILURE },
        manifest: None,
    })
}

/// Largest relative error between the adjoint gradient and central finite
/// differences over random perturbations and directions.
pub fn gradient_errors(config: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    let c = &config.gradient_check;
    let mesh = Arc::new(generate_ball_mesh(config.mesh.dim, c.refinement)?);
    let space = FemSpace::with_options(mesh.clone(), config.solver.linear);
    let truth = build_phantom(&config.phantom, &mesh)?;
    let family = harmonic_patterns(&mesh, config.data.support, c.n_max)?;
    let data = synthesize_exact_data(
        &space,
        truth.sigma.values(),
        family.patterns,
        config.data.support.region(),
        config.data.gamma_d(),
        c.n_max,
    )?;
    let n = mesh.n_vertices();
    let sigma0 = vec![config.regularization.background; n];
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
    let mut errors = Vec::with_capacity(c.directions);
    for _ in 0..c.directions {
        let delta: Vec<f64> = (0..n).map(|_| 0.2 * uniform()).collect();
        let direction: Vec<f64> = (0..n).map(|_| uniform()).collect();
        let (analytic, fd) =
            directional_derivative_check(&space, &sigma0, &delta, &data, &direction, c.h)?;
        let err = (analytic - fd).abs() / fd.abs().max(f64::MIN_POSITIVE);
        debug!("analytic {analytic:.12e}  finite difference {fd:.12e}  rel. error {err:.3e}");
        errors.push(err);
    }
    Ok(errors)
}

pub fn gradient_check(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let errors = gradient_errors(config)?;
    for (i, e) in errors.iter().enumerate() {
        println!("direction {i}: relative error {e:.3e}");
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let bound = config.gradient_check.bound;
    let passed = worst <= bound;
    println!(
        "max relative error {worst:.3e}, bound {bound:e}: {}",
        if passed { "ok" } else { "FAILED" }
    );
    Ok(Outcome {
        exit_code: if passed { 0 } else { EXIT_FAILURE },
        manifest: None,
    })
}
