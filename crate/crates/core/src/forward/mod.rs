//! The Neumann-to-Dirichlet map, the data discrepancy and synthetic Cauchy
//! data generation.

mod io;
mod noise;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{EitError, Result};
use crate::fem::{FemSpace, NeumannSystem};
use crate::field::NodalField;
use crate::mesh::{BoundaryRegion, BoundarySubset, PointLocator, SimplicialMesh};
use crate::patterns::{harmonic_patterns, BoundaryPattern, PatternSupport};

pub use io::{read_dataset, read_dataset_file, write_dataset, write_dataset_file, DATASET_FORMAT};
pub use noise::gaussian;

/// Default inverse-crime guard: the simulation mesh needs at least this many
/// times the vertices of the reconstruction mesh.
pub const DEFAULT_MIN_VERTEX_RATIO: f64 = 3.0;

/// Boundary values of `Λ_γ g` on `Γ_D`, stored full length with zeros off
/// `Γ_D`.
#[derive(Clone, Debug, PartialEq)]
pub struct NDTrace {
    values: Vec<f64>,
}

impl NDTrace {
    /// Keeps the entries of `values` on `gamma_d` and zeroes the rest.
    pub fn restrict(values: &[f64], gamma_d: &BoundarySubset) -> Result<Self> {
        if values.len() != gamma_d.n_mesh_vertices() {
            return Err(EitError::LengthMismatch {
                what: "trace",
                expected: gamma_d.n_mesh_vertices(),
                found: values.len(),
            });
        }
        let mut out = vec![0.0; values.len()];
        for &v in gamma_d.vertices() {
            out[v] = values[v];
        }
        Ok(NDTrace { values: out })
    }

    pub fn zero(gamma_d: &BoundarySubset) -> Self {
        NDTrace {
            values: vec![0.0; gamma_d.n_mesh_vertices()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values at the vertices of `gamma_d`, in its vertex order.
    pub fn on_subset(&self, gamma_d: &BoundarySubset) -> Vec<f64> {
        gamma_d.vertices().iter().map(|&v| self.values[v]).collect()
    }

    fn from_vec(values: Vec<f64>) -> Self {
        NDTrace { values }
    }
}

/// Measured pairs `(g_k, f_k)`: currents on `Γ_N` and noisy, ds-mean-zero
/// voltages on `Γ_D`, both on the reconstruction mesh.
#[derive(Clone, Debug)]
pub struct CauchyDataSet {
    pub mesh_hash: String,
    pub gamma_n: BoundaryRegion,
    pub gamma_d: BoundaryRegion,
    pub n_max: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Standard deviation actually used for the noise.
    pub noise_std: f64,
    gamma_d_subset: Arc<BoundarySubset>,
    patterns: Vec<BoundaryPattern>,
    traces: Vec<NDTrace>,
}

impl CauchyDataSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &SimplicialMesh,
        gamma_n: BoundaryRegion,
        gamma_d: BoundaryRegion,
        n_max: usize,
        epsilon: f64,
        seed: u64,
        noise_std: f64,
        patterns: Vec<BoundaryPattern>,
        traces: Vec<NDTrace>,
    ) -> Result<Self> {
        let gamma_d_subset = Arc::new(gamma_d.select(mesh)?);
        let traces = traces
            .into_iter()
            .map(|t| {
                let mut t = NDTrace::restrict(t.values(), &gamma_d_subset)?;
                gamma_d_subset.remove_mean(&mut t.values);
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(
            mesh.content_hash(),
            gamma_n,
            gamma_d,
            gamma_d_subset,
            n_max,
            epsilon,
            seed,
            noise_std,
            patterns,
            traces,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        mesh_hash: String,
        gamma_n: BoundaryRegion,
        gamma_d: BoundaryRegion,
        gamma_d_subset: Arc<BoundarySubset>,
        n_max: usize,
        epsilon: f64,
        seed: u64,
        noise_std: f64,
        patterns: Vec<BoundaryPattern>,
        traces: Vec<NDTrace>,
    ) -> Result<Self> {
        if patterns.len() != traces.len() {
            return Err(EitError::LengthMismatch {
                what: "trace list",
                expected: patterns.len(),
                found: traces.len(),
            });
        }
        if patterns.is_empty() {
            return Err(EitError::InvalidParameter(
                "a data set needs at least one pattern".into(),
            ));
        }
        let n = gamma_d_subset.n_mesh_vertices();
        for (p, t) in patterns.iter().zip(&traces) {
            if p.values().len() != n || t.values().len() != n {
                return Err(EitError::LengthMismatch {
                    what: "pattern or trace",
                    expected: n,
                    found: p.values().len().min(t.values().len()),
                });
            }
        }
        Ok(CauchyDataSet {
            mesh_hash,
            gamma_n,
            gamma_d,
            n_max,
            epsilon,
            seed,
            noise_std,
            gamma_d_subset,
            patterns,
            traces,
        })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[BoundaryPattern] {
        &self.patterns
    }

    pub fn traces(&self) -> &[NDTrace] {
        &self.traces
    }

    pub fn gamma_d_subset(&self) -> &Arc<BoundarySubset> {
        &self.gamma_d_subset
    }

    /// Copy with every trace multiplied by `factor`.
    pub fn with_scaled_traces(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.traces {
            t.values.iter_mut().for_each(|x| *x *= factor);
        }
        out
    }

    /// Copy keeping only the patterns selected by `keep`.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.iter().any(|&k| k >= self.len()) {
            return Err(EitError::InvalidParameter(
                "pattern selection out of range".into(),
            ));
        }
        let mut out = self.clone();
        out.patterns = keep.iter().map(|&k| self.patterns[k].clone()).collect();
        out.traces = keep.iter().map(|&k| self.traces[k].clone()).collect();
        Ok(out)
    }

    pub fn check_mesh(&self, mesh: &SimplicialMesh) -> Result<()> {
        let found = mesh.content_hash();
        if found != self.mesh_hash {
            return Err(EitError::MeshHashMismatch {
                expected: self.mesh_hash.clone(),
                found,
            });
        }
        Ok(())
    }
}

fn check_conductivity(space: &FemSpace, gamma: &[f64]) -> Result<()> {
    let n = space.mesh().n_vertices();
    if gamma.len() != n {
        return Err(EitError::LengthMismatch {
            what: "conductivity",
            expected: n,
            found: gamma.len(),
        });
    }
    if let Some(v) = gamma.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(EitError::InvalidParameter(format!(
            "conductivity must be positive and finite, vertex {v} has {}",
            gamma[v]
        )));
    }
    Ok(())
}

/// `(Λ_γ g)|_{Γ_D}`, grounded so that its ds-mean over `Γ_D` vanishes.
pub fn nd_apply(
    space: &FemSpace,
    gamma: &[f64],
    g: &BoundaryPattern,
    gamma_d: &BoundarySubset,
) -> Result<NDTrace> {
    check_conductivity(space, gamma)?;
    let system = space.neumann_system(gamma)?;
    let u = system.solve_neumann(g, gamma_d)?;
    NDTrace::restrict(&u, gamma_d)
}

/// Discrepancy value together with what the gradient needs.
#[derive(Clone, Debug)]
pub struct ForwardEvaluation {
    /// `Σ_k ½ r_kᵀ B_{Γ_D} r_k`.
    pub value: f64,
    /// `r_k = Λ_γ g_k − f_k` on `Γ_D`.
    pub residuals: Vec<NDTrace>,
    /// Grounded forward solutions `u_k`.
    pub solutions: Vec<NodalField>,
    /// The assembled system for `γ`, reused by the adjoint solves.
    pub system: Arc<NeumannSystem>,
}

/// Solves all `K` forward problems for `γ` in parallel and compares with the
/// measured traces.
pub fn discrepancy(
    space: &FemSpace,
    gamma: &[f64],
    data: &CauchyDataSet,
) -> Result<ForwardEvaluation> {
    check_conductivity(space, gamma)?;
    let system = Arc::new(space.neumann_system(gamma)?);
    let gd = data.gamma_d_subset();
    let results: Vec<(f64, NDTrace, NodalField)> = data
        .patterns()
        .par_iter()
        .zip(data.traces().par_iter())
        .map(|(g, f)| {
            let u = system.solve_neumann(g, gd)?;
            let mut r = vec![0.0; u.len()];
            for &v in gd.vertices() {
                r[v] = u[v] - f.values()[v];
            }
            let value = 0.5 * gd.inner(&r, &r);
            Ok((value, NDTrace::from_vec(r), u))
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut residuals = Vec::with_capacity(results.len());
    let mut solutions = Vec::with_capacity(results.len());
    for (v, r, u) in results {
        value += v;
        residuals.push(r);
        solutions.push(u);
    }
    Ok(ForwardEvaluation {
        value,
        residuals,
        solutions,
        system,
    })
}

/// Noise-free data `Λ_γ g_k` for the given patterns, computed on the mesh of
/// `space` itself. Useful for self-tests; real experiments go through
/// [`simulate_cauchy_data`].
pub fn synthesize_exact_data(
    space: &FemSpace,
    gamma: &[f64],
    patterns: Vec<BoundaryPattern>,
    gamma_n: BoundaryRegion,
    gamma_d: BoundaryRegion,
    n_max: usize,
) -> Result<CauchyDataSet> {
    check_conductivity(space, gamma)?;
    let gd = gamma_d.select(space.mesh())?;
    let system = space.neumann_system(gamma)?;
    let traces = patterns
        .par_iter()
        .map(|g| {
            let u = system.solve_neumann(g, &gd)?;
            NDTrace::restrict(&u, &gd)
        })
        .collect::<Result<Vec<_>>>()?;
    CauchyDataSet::new(
        space.mesh(),
        gamma_n,
        gamma_d,
        n_max,
        0.0,
        0,
        0.0,
        patterns,
        traces,
    )
}

/// Settings of the synthetic-data pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSettings {
    pub support: PatternSupport,
    pub n_max: usize,
    pub gamma_d: BoundaryRegion,
    /// Relative noise level `ε ≥ 0`.
    pub epsilon: f64,
    pub seed: u64,
    pub min_vertex_ratio: f64,
    /// Skip the mesh-ratio guard.
    pub allow_inverse_crime: bool,
    /// Snap radius for reconstruction-mesh boundary vertices that fall just
    /// outside the polyhedral simulation mesh. `None` uses the longest
    /// boundary edge of the simulation mesh.
    pub snap_tolerance: Option<f64>,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            support: PatternSupport::Full,
            n_max: 5,
            gamma_d: BoundaryRegion::Full,
            epsilon: 1e-2,
            seed: 0,
            min_vertex_ratio: DEFAULT_MIN_VERTEX_RATIO,
            allow_inverse_crime: false,
            snap_tolerance: None,
        }
    }
}

/// Output of [`simulate_cauchy_data`]: the data set and the traces before
/// noise was added.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub data: CauchyDataSet,
    pub clean: Vec<NDTrace>,
}

fn longest_boundary_edge(mesh: &SimplicialMesh) -> f64 {
    let mut longest: f64 = 0.0;
    for f in 0..mesh.n_facets() {
        let fv = mesh.facet(f);
        for i in 0..fv.len() {
            for j in i + 1..fv.len() {
                let a = mesh.vertex(fv[i]);
                let b = mesh.vertex(fv[j]);
                let d =
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                longest = longest.max(d);
            }
        }
    }
    longest
}

/// Solves the forward problems for `sigma` on the fine mesh of `fine`,
/// interpolates the traces to the `Γ_D` vertices of `coarse`, re-grounds
/// them, adds Gaussian noise of standard deviation `ε·max_k max_j |f_k(x_j)|`
/// at those vertices and re-grounds once more.
pub fn simulate_cauchy_data(
    fine: &FemSpace,
    sigma: &[f64],
    coarse: &SimplicialMesh,
    settings: &SimulationSettings,
) -> Result<Simulation> {
    if !(settings.epsilon >= 0.0 && settings.epsilon.is_finite()) {
        return Err(EitError::InvalidParameter(format!(
            "noise level must be non-negative, got {}",
            settings.epsilon
        )));
    }
    let fine_mesh = fine.mesh();
    if fine_mesh.dim() != coarse.dim() {
        return Err(EitError::InvalidParameter(
            "simulation and reconstruction meshes differ in dimension".into(),
        ));
    }
    let ratio = fine_mesh.n_vertices() as f64 / coarse.n_vertices() as f64;
    if !settings.allow_inverse_crime && ratio < settings.min_vertex_ratio {
        return Err(EitError::InverseCrime {
            fine: fine_mesh.n_vertices(),
            coarse: coarse.n_vertices(),
            factor: settings.min_vertex_ratio,
        });
    }
    check_conductivity(fine, sigma)?;

    let fine_family = harmonic_patterns(fine_mesh, settings.support, settings.n_max)?;
    let coarse_family = harmonic_patterns(coarse, settings.support, settings.n_max)?;
    let fine_gd = settings.gamma_d.select(fine_mesh)?;
    let coarse_gd = settings.gamma_d.select(coarse)?;

    let system = fine.neumann_system(sigma)?;
    let tolerance = settings
        .snap_tolerance
        .unwrap_or_else(|| longest_boundary_edge(fine_mesh));
    let locator = PointLocator::with_snap_tolerance(fine_mesh, tolerance);
    let points: Vec<_> = coarse_gd
        .vertices()
        .iter()
        .map(|&v| *coarse.vertex(v))
        .collect();
    let n = coarse.n_vertices();

    let clean: Vec<Vec<f64>> = fine_family
        .patterns
        .par_iter()
        .map(|g| {
            let u = system.solve_neumann(g, &fine_gd)?;
            let mut f = vec![0.0; n];
            for (&v, p) in coarse_gd.vertices().iter().zip(&points) {
                f[v] = locator.interpolate(&u, p)?;
            }
            coarse_gd.remove_mean(&mut f);
            Ok(f)
        })
        .collect::<Result<_>>()?;

    let peak = clean
        .iter()
        .flat_map(|f| coarse_gd.vertices().iter().map(move |&v| f[v].abs()))
        .fold(0.0, f64::max);
    let noise_std = settings.epsilon * peak;

    let noisy: Vec<NDTrace> = clean
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut y = f.clone();
            if noise_std > 0.0 {
                for (j, &v) in coarse_gd.vertices().iter().enumerate() {
                    y[v] += noise_std * gaussian(settings.seed, k, j);
                }
            }
            NDTrace::from_vec(y)
        })
        .collect();

    let data = CauchyDataSet::new(
        coarse,
        settings.support.region(),
        settings.gamma_d.clone(),
        settings.n_max,
        settings.epsilon,
        settings.seed,
        noise_std,
        coarse_family.patterns,
        noisy,
    )?;
    Ok(Simulation {
        data,
        clean: clean.into_iter().map(NDTrace::from_vec).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_ball_mesh;
    use crate::patterns::full_data_patterns;

    fn space(dim: usize, r: usize) -> FemSpace {
        FemSpace::new(Arc::new(generate_ball_mesh(dim, r).unwrap()))
    }

    #[test]
    fn zero_current_gives_zero_trace() {
        let s = space(3, 2);
        let gd = BoundarySubset::full(s.mesh());
        let g = BoundaryPattern::zero(Arc::new(gd.clone()));
        let ones = vec![1.0; s.mesh().n_vertices()];
        let t = nd_apply(&s, &ones, &g, &gd).unwrap();
        assert!(t.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_nonpositive_conductivity() {
        let s = space(2, 2);
        let gd = BoundarySubset::full(s.mesh());
        let g = BoundaryPattern::zero(Arc::new(gd.clone()));
        let mut gamma = vec![1.0; s.mesh().n_vertices()];
        gamma[3] = 0.0;
        assert!(nd_apply(&s, &gamma, &g, &gd).is_err());
    }

    #[test]
    fn traces_are_grounded_on_gamma_d() {
        let s = space(3, 3);
        let fam = full_data_patterns(s.mesh(), 2).unwrap();
        let gd = BoundaryRegion::UpperHalf.select(s.mesh()).unwrap();
        let gamma: Vec<f64> = s
            .mesh()
            .vertices()
            .iter()
            .map(|p| 1.0 + 0.3 * p[0])
            .collect();
        for g in &fam.patterns {
            let t = nd_apply(&s, &gamma, g, &gd).unwrap();
            let scale = t.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(gd.integral(t.values()).abs() <= 1e-10 * scale * gd.area());
            for v in 0..s.mesh().n_vertices() {
                if !gd.contains_vertex(v) {
                    assert_eq!(t.values()[v], 0.0);
                }
            }
        }
    }

    #[test]
    fn exact_data_has_zero_discrepancy_and_additivity_holds() {
        let s = space(2, 6);
        let fam = full_data_patterns(s.mesh(), 3).unwrap();
        let gamma: Vec<f64> = s
            .mesh()
            .vertices()
            .iter()
            .map(|p| 1.0 + 0.5 * p[0] * p[1])
            .collect();
        let data = synthesize_exact_data(
            &s,
            &gamma,
            fam.patterns,
            BoundaryRegion::Full,
            BoundaryRegion::Full,
            3,
        )
        .unwrap();
        let ev = discrepancy(&s, &gamma, &data).unwrap();
        let scale: f64 = data
            .traces()
            .iter()
            .map(|t| data.gamma_d_subset().inner(t.values(), t.values()))
            .sum();
        assert!(ev.value <= 1e-16 * scale, "{} vs {}", ev.value, scale);

        let ones = vec![1.0; s.mesh().n_vertices()];
        let total = discrepancy(&s, &ones, &data).unwrap().value;
        let parts: f64 = (0..data.len())
            .map(|k| {
                discrepancy(&s, &ones, &data.select(&[k]).unwrap())
                    .unwrap()
                    .value
            })
            .sum();
        assert!((total - parts).abs() <= 1e-12 * total);
    }

    #[test]
    fn doubling_traces_matches_direct_recomputation() {
        let s = space(2, 5);
        let fam = full_data_patterns(s.mesh(), 2).unwrap();
        let gamma: Vec<f64> = s
            .mesh()
            .vertices()
            .iter()
            .map(|p| 1.2 + 0.4 * p[1])
            .collect();
        let data = synthesize_exact_data(
            &s,
            &gamma,
            fam.patterns,
            BoundaryRegion::Full,
            BoundaryRegion::Full,
            2,
        )
        .unwrap();
        let doubled = data.with_scaled_traces(2.0);
        let ev = discrepancy(&s, &gamma, &doubled).unwrap();
        let gd = data.gamma_d_subset();
        // Λg = f, so r = Λg − 2f = −f
        let expected: f64 = data
            .traces()
            .iter()
            .map(|f| 0.5 * gd.inner(f.values(), f.values()))
            .sum();
        assert!((ev.value - expected).abs() <= 1e-8 * expected);
        for (r, f) in ev.residuals.iter().zip(data.traces()) {
            for &v in gd.vertices() {
                assert!((r.values()[v] + f.values()[v]).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn nd_map_is_self_adjoint() {
        let s = space(3, 3);
        let fam = full_data_patterns(s.mesh(), 2).unwrap();
        let gd = BoundarySubset::full(s.mesh());
        let gamma: Vec<f64> = s
            .mesh()
            .vertices()
            .iter()
            .map(|p| 1.0 + 0.5 * (3.0 * p[0]).sin() * p[2])
            .collect();
        let t: Vec<NDTrace> = fam
            .patterns
            .iter()
            .map(|g| nd_apply(&s, &gamma, g, &gd).unwrap())
            .collect();
        for i in 0..fam.len() {
            for j in 0..i {
                let a = gd.inner(fam.patterns[i].values(), t[j].values());
                let b = gd.inner(fam.patterns[j].values(), t[i].values());
                assert!(
                    (a - b).abs() <= 1e-8 * (a.abs() + b.abs()).max(1e-3),
                    "{i},{j}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn constant_conductivity_scales_trace() {
        let s = space(3, 3);
        let fam = full_data_patterns(s.mesh(), 1).unwrap();
        let gd = BoundarySubset::full(s.mesh());
        let n = s.mesh().n_vertices();
        for g in &fam.patterns {
            let t1 = nd_apply(&s, &vec![1.0; n], g, &gd).unwrap();
            let t3 = nd_apply(&s, &vec![3.0; n], g, &gd).unwrap();
            for v in 0..n {
                assert!((t1.values()[v] - 3.0 * t3.values()[v]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn inverse_crime_guard() {
        let fine = space(2, 4);
        let sigma = vec![1.0; fine.mesh().n_vertices()];
        let settings = SimulationSettings {
            n_max: 2,
            ..Default::default()
        };
        let err = simulate_cauchy_data(&fine, &sigma, fine.mesh(), &settings).unwrap_err();
        assert!(matches!(err, EitError::InverseCrime { .. }));
        let ok = SimulationSettings {
            allow_inverse_crime: true,
            epsilon: 0.0,
            ..settings
        };
        let sim = simulate_cauchy_data(&fine, &sigma, fine.mesh(), &ok).unwrap();
        assert_eq!(sim.data.len(), 4);
    }

    #[test]
    fn simulation_is_deterministic_and_grounded() {
        let fine = space(2, 12);
        let coarse = generate_ball_mesh(2, 5).unwrap();
        let sigma: Vec<f64> = fine
            .mesh()
            .vertices()
            .iter()
            .map(|p| 1.0 + 0.5 * p[0])
            .collect();
        let settings = SimulationSettings {
            n_max: 3,
            seed: 9,
            ..Default::default()
        };
        let a = simulate_cauchy_data(&fine, &sigma, &coarse, &settings).unwrap();
        let b = simulate_cauchy_data(&fine, &sigma, &coarse, &settings).unwrap();
        let gd = a.data.gamma_d_subset();
        for (ta, tb) in a.data.traces().iter().zip(b.data.traces()) {
            assert_eq!(ta.values(), tb.values());
            let scale = ta.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(gd.integral(ta.values()).abs() <= 1e-10 * scale * gd.area());
        }
        let quiet = SimulationSettings {
            epsilon: 0.0,
            ..settings
        };
        let c = simulate_cauchy_data(&fine, &sigma, &coarse, &quiet).unwrap();
        for (t, f) in c.data.traces().iter().zip(&c.clean) {
            for (a, b) in t.values().iter().zip(f.values()) {
                assert!((a - b).abs() <= 1e-14);
            }
        }
    }
}
