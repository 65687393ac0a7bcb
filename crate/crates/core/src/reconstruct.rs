//! Sparsity-promoting reconstruction: adjoint gradient, Sobolev gradient,
//! Barzilai–Borwein steps under a weak monotonicity safeguard, and nodal
//! soft thresholding with distributed weights.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EitError, Result};
use crate::fem::{FemSpace, SolverOptions};
use crate::field::NodalField;
use crate::forward::{discrepancy, CauchyDataSet, ForwardEvaluation};
use crate::mesh::SimplicialMesh;

/// Weights of the penalty `α Σ_j β_j μ_j |δγ(x_j)|`, with `β_j = ‖ψ_j‖_{L¹}`.
#[derive(Clone, Debug)]
pub struct RegularizationPlan {
    alpha: f64,
    mu: NodalField,
    beta: Vec<f64>,
}

impl RegularizationPlan {
    /// `alpha ≥ 0`; every `mu_j` must lie in `(0, 1]`.
    pub fn new(space: &FemSpace, alpha: f64, mu: NodalField) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(EitError::InvalidParameter(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        mu.check_mesh(space.mesh())?;
        if let Some(j) = mu.iter().position(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(EitError::InvalidParameter(format!(
                "prior weight at vertex {j} is {}, must lie in (0, 1]",
                mu[j]
            )));
        }
        Ok(RegularizationPlan {
            alpha,
            mu,
            beta: space.node_volumes().to_vec(),
        })
    }

    /// Plan with `μ ≡ 1`.
    pub fn uniform(space: &FemSpace, alpha: f64) -> Result<Self> {
        Self::new(space, alpha, NodalField::constant(space.mesh(), 1.0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> &NodalField {
        &self.mu
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `α_j = α β_j μ_j`.
    pub fn weight(&self, j: usize) -> f64 {
        self.alpha * self.beta[j] * self.mu[j]
    }

    /// Shrinkage threshold `s α_j / β_j` at vertex `j`.
    pub fn threshold(&self, j: usize, step: f64) -> f64 {
        step * self.weight(j) / self.beta[j]
    }

    pub fn penalty(&self, delta: &[f64]) -> f64 {
        delta
            .iter()
            .enumerate()
            .map(|(j, x)| self.weight(j) * x.abs())
            .sum()
    }
}

/// Parameters of the iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Admissible range `[c, 1/c]` for `σ₀ + δγ`.
    pub c: f64,
    /// Length `M` of the weak monotonicity window.
    pub history: usize,
    pub tau: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_stop: f64,
    pub shrink: f64,
    pub max_iterations: usize,
    pub linear: SolverOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 0.2,
            history: 5,
            tau: 1e-5,
            s_min: 1.0,
            s_max: 1000.0,
            s_stop: 1e-3,
            shrink: 0.5,
            max_iterations: 200,
            linear: SolverOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EitError::InvalidParameter(m));
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c must lie in (0, 1), got {}", self.c));
        }
        if self.history == 0 {
            return bad("history length M must be at least 1".into());
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.s_min > 0.0 && self.s_min <= self.s_max && self.s_max.is_finite()) {
            return bad(format!(
                "need 0 < s_min <= s_max, got {} and {}",
                self.s_min, self.s_max
            ));
        }
        if !(self.s_stop > 0.0) {
            return bad(format!("s_stop must be positive, got {}", self.s_stop));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            ));
        }
        if !(self.linear.rel_tol > 0.0) || self.linear.max_iter_factor == 0 {
            return bad("linear solver needs a positive tolerance and iteration factor".into());
        }
        Ok(())
    }
}

/// `S_β(x) = sign(x) max(|x| − β, 0)`.
pub fn soft_threshold(x: f64, beta: f64) -> f64 {
    debug_assert!(beta >= 0.0);
    if x > beta {
        x - beta
    } else if x < -beta {
        x + beta
    } else {
        0.0
    }
}

/// Discrete derivative of the discrepancy: entry `j` is `R'(δγ) ψ_j`,
/// assembled from `G = −Σ_k ∇u_k·∇w_k` where `w_k` solves the forward
/// problem with the residual `χ_{Γ_D} r_k` as current.
pub fn gradient_load(
    space: &FemSpace,
    eval: &ForwardEvaluation,
    data: &CauchyDataSet,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let gd = data.gamma_d_subset();
    let per_pattern: Vec<Vec<f64>> = eval
        .solutions
        .par_iter()
        .zip(eval.residuals.par_iter())
        .map(|(u, r)| {
            let load = gd.mass_apply(r.values());
            let (w, _) = eval.system.solve_load(&load, gd)?;
            Ok(cell_products_to_load(mesh, u, &w))
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; mesh.n_vertices()];
    for part in per_pattern {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(total)
}

fn cell_products_to_load(mesh: &SimplicialMesh, u: &[f64], w: &[f64]) -> Vec<f64> {
    let nl = mesh.dim() + 1;
    let mut load = vec![0.0; mesh.n_vertices()];
    for (c, cell) in mesh.cells().enumerate() {
        let grads = mesh.cell_gradients(c);
        let mut gu = [0.0; 3];
        let mut gw = [0.0; 3];
        for (i, &v) in cell.iter().enumerate() {
            for a in 0..3 {
                gu[a] += u[v] * grads[i][a];
                gw[a] += w[v] * grads[i][a];
            }
        }
        let g = -(gu[0] * gw[0] + gu[1] * gw[1] + gu[2] * gw[2]);
        let share = g * mesh.cell_volume(c) / nl as f64;
        for &v in cell {
            load[v] += share;
        }
    }
    load
}

/// H¹₀ representative of the derivative: `⟨∇_s R, η⟩_{H¹} = loadᵀη`.
pub fn sobolev_gradient(space: &FemSpace, load: &[f64]) -> Result<NodalField> {
    space.solve_riesz(load)
}

/// Barzilai–Borwein step `‖Δx‖²_{H¹} / ⟨Δx, Δg⟩_{H¹}` clamped to
/// `[s_min, s_max]`; a vanishing or negative curvature gives `s_max`.
pub fn bb_step(space: &FemSpace, d_iter: &[f64], d_grad: &[f64], config: &SolverConfig) -> f64 {
    let num = space.h1_inner(d_iter, d_iter);
    let den = space.h1_inner(d_iter, d_grad);
    let raw = if den <= 1e-14 * num || num == 0.0 {
        config.s_max
    } else {
        num / den
    };
    raw.clamp(config.s_min, config.s_max)
}

/// `ζ_j = S_{s α_j/β_j}(δγ_j − s ∇_sR_j)` on interior vertices, zero on the
/// boundary.
pub fn proximal_update(
    mesh: &SimplicialMesh,
    delta: &[f64],
    gradient: &[f64],
    step: f64,
    plan: &RegularizationPlan,
) -> NodalField {
    let values = (0..mesh.n_vertices())
        .map(|j| {
            if mesh.is_boundary_vertex(j) {
                0.0
            } else {
                soft_threshold(delta[j] - step * gradient[j], plan.threshold(j, step))
            }
        })
        .collect();
    NodalField::from_vec(values)
}

/// `T_c(σ₀ + ζ) − σ₀` with `T_c` the nodal clamp to `[c, 1/c]`.
pub fn project_admissible(zeta: &[f64], sigma0: &[f64], c: f64) -> Result<NodalField> {
    if !(c > 0.0 && c < 1.0) {
        return Err(EitError::InvalidParameter(format!(
            "c must lie in (0, 1), got {c}"
        )));
    }
    if zeta.len() != sigma0.len() {
        return Err(EitError::LengthMismatch {
            what: "background conductivity",
            expected: zeta.len(),
            found: sigma0.len(),
        });
    }
    let hi = 1.0 / c;
    if let Some(j) = sigma0.iter().position(|&s| !(s >= c && s <= hi)) {
        return Err(EitError::InvalidParameter(format!(
            "background conductivity {} at vertex {j} lies outside [{c}, {hi}]",
            sigma0[j]
        )));
    }
    Ok(NodalField::from_vec(
        zeta.iter()
            .zip(sigma0)
            .map(|(&z, &s)| {
                let t = s + z;
                if t < c {
                    // c − s can round so that s + (c − s) < c
                    let mut d = c - s;
                    while s + d < c {
                        d = d.next_up();
                    }
                    d
                } else if t > hi {
                    let mut d = hi - s;
                    while s + d > hi {
                        d = d.next_down();
                    }
                    d
                } else {
                    z
                }
            })
            .collect(),
    ))
}

/// `Ψ` split into its parts, with the forward data needed for a gradient.
#[derive(Clone, Debug)]
pub struct ObjectiveValue {
    pub psi: f64,
    pub discrepancy: f64,
    pub penalty: f64,
    pub forward: ForwardEvaluation,
}

pub fn objective(
    space: &FemSpace,
    sigma0: &[f64],
    delta: &[f64],
    data: &CauchyDataSet,
    plan: &RegularizationPlan,
) -> Result<ObjectiveValue> {
    let gamma: Vec<f64> = sigma0.iter().zip(delta).map(|(s, d)| s + d).collect();
    let forward = discrepancy(space, &gamma, data)?;
    let penalty = plan.penalty(delta);
    Ok(ObjectiveValue {
        psi: forward.value + penalty,
        discrepancy: forward.value,
        penalty,
        forward,
    })
}

/// One accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub psi: f64,
    pub discrepancy: f64,
    pub penalty: f64,
    /// Accepted step size.
    pub step: f64,
    /// Candidates tried, including the accepted one.
    pub trials: usize,
    /// `max` of `Ψ` over the monotonicity window before the step.
    pub reference: f64,
    /// `‖δγ_{i+1} − δγ_i‖²_{H¹}`.
    pub step_norm_sq: f64,
}

impl IterationRecord {
    /// Whether the record satisfies the weak monotonicity condition with `tau`.
    pub fn weakly_monotone(&self, tau: f64) -> bool {
        self.psi <= self.reference - tau / (2.0 * self.step) * self.step_norm_sq
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The step size fell below `s_stop`.
    StepBelowStop,
    /// A step left the iterate exactly unchanged.
    Stationary,
    IterationCap,
    /// A linear solve failed; the last accepted iterate is returned.
    SolverFailure(String),
}

/// Loop state between iterations.
#[derive(Clone, Debug)]
pub struct ReconstructionState {
    pub delta: NodalField,
    pub previous: Option<NodalField>,
    pub gradient: NodalField,
    pub previous_gradient: Option<NodalField>,
    pub step: f64,
    pub history: VecDeque<f64>,
    pub iteration: usize,
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub delta: NodalField,
    pub initial_psi: f64,
    pub initial_discrepancy: f64,
    pub final_discrepancy: f64,
    pub log: Vec<IterationRecord>,
    pub termination: Termination,
}

fn check_inputs(
    space: &FemSpace,
    data: &CauchyDataSet,
    sigma0: &[f64],
    plan: &RegularizationPlan,
) -> Result<()> {
    data.check_mesh(space.mesh())?;
    let n = space.mesh().n_vertices();
    if sigma0.len() != n || plan.beta().len() != n {
        return Err(EitError::LengthMismatch {
            what: "background conductivity or plan",
            expected: n,
            found: sigma0.len().min(plan.beta().len()),
        });
    }
    Ok(())
}

pub fn run(
    space: &FemSpace,
    data: &CauchyDataSet,
    sigma0: &[f64],
    plan: &RegularizationPlan,
    config: &SolverConfig,
) -> Result<Reconstruction> {
    run_with_observer(space, data, sigma0, plan, config, |_, _| {})
}

/// Runs the iteration from `δγ₀ = 0`, calling `observer` after every accepted
/// step. Errors before the first step are returned; later solver failures end
/// the run with [`Termination::SolverFailure`].
pub fn run_with_observer(
    space: &FemSpace,
    data: &CauchyDataSet,
    sigma0: &[f64],
    plan: &RegularizationPlan,
    config: &SolverConfig,
    mut observer: impl FnMut(&IterationRecord, &NodalField),
) -> Result<Reconstruction> {
    config.validate()?;
    check_inputs(space, data, sigma0, plan)?;
    let mesh = space.mesh();
    // fails early on an inadmissible background
    project_admissible(&vec![0.0; mesh.n_vertices()], sigma0, config.c)?;

    let zero = NodalField::zeros(mesh);
    let current = objective(space, sigma0, &zero, data, plan)?;
    let load = gradient_load(space, &current.forward, data)?;
    let mut state = ReconstructionState {
        gradient: sobolev_gradient(space, &load)?,
        delta: zero,
        previous: None,
        previous_gradient: None,
        step: config.s_min,
        history: std::iter::repeat_n(current.psi, config.history).collect(),
        iteration: 0,
    };
    let initial_psi = current.psi;
    let initial_discrepancy = current.discrepancy;
    let mut final_discrepancy = current.discrepancy;
    let mut log = Vec::new();

    let termination = loop {
        if state.iteration >= config.max_iterations {
            break Termination::IterationCap;
        }
        let mut s = match (&state.previous, &state.previous_gradient) {
            (Some(x0), Some(g0)) => {
                let dx: Vec<f64> = state
                    .delta
                    .iter()
                    .zip(x0.iter())
                    .map(|(a, b)| a - b)
                    .collect();
                let dg: Vec<f64> = state
                    .gradient
                    .iter()
                    .zip(g0.iter())
                    .map(|(a, b)| a - b)
                    .collect();
                bb_step(space, &dx, &dg, config)
            }
            _ => config.s_min,
        };
        let reference = state
            .history
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);

        let mut trials = 0;
        let accepted = loop {
            trials += 1;
            let zeta = proximal_update(mesh, &state.delta, &state.gradient, s, plan);
            let candidate = project_admissible(&zeta, sigma0, config.c)?;
            let diff: Vec<f64> = candidate
                .iter()
                .zip(state.delta.iter())
                .map(|(a, b)| a - b)
                .collect();
            let step_norm_sq = space.h1_inner(&diff, &diff);
            let value = match objective(space, sigma0, &candidate, data, plan) {
                Ok(v) => v,
                Err(e) => break Err(e),
            };
            if value.psi <= reference - config.tau / (2.0 * s) * step_norm_sq {
                break Ok(Some((candidate, value, step_norm_sq)));
            }
            s *= config.shrink;
            if s < config.s_stop {
                break Ok(None);
            }
        };
        let (candidate, value, step_norm_sq) = match accepted {
            Ok(Some(a)) => a,
            Ok(None) => break Termination::StepBelowStop,
            Err(e) => break Termination::SolverFailure(e.to_string()),
        };

        state.iteration += 1;
        let record = IterationRecord {
            iteration: state.iteration,
            psi: value.psi,
            discrepancy: value.discrepancy,
            penalty: value.penalty,
            step: s,
            trials,
            reference,
            step_norm_sq,
        };
        observer(&record, &candidate);
        log.push(record);
        final_discrepancy = value.discrepancy;
        state.history.push_back(value.psi);
        while state.history.len() > config.history {
            state.history.pop_front();
        }
        state.step = s;

        let stationary = step_norm_sq == 0.0;
        let new_gradient = if stationary || s < config.s_stop {
            None
        } else {
            match gradient_load(space, &value.forward, data)
                .and_then(|l| sobolev_gradient(space, &l))
            {
                Ok(g) => Some(g),
                Err(e) => {
                    state.delta = candidate;
                    break Termination::SolverFailure(e.to_string());
                }
            }
        };
        let old = std::mem::replace(&mut state.delta, candidate);
        if s < config.s_stop {
            break Termination::StepBelowStop;
        }
        let Some(g) = new_gradient else {
            break Termination::Stationary;
        };
        state.previous = Some(old);
        state.previous_gradient = Some(std::mem::replace(&mut state.gradient, g));
    };

    Ok(Reconstruction {
        delta: state.delta,
        initial_psi,
        initial_discrepancy,
        final_discrepancy,
        log,
        termination,
    })
}

/// Central finite-difference check of [`gradient_load`] along `direction`:
/// returns `(loadᵀη, (R(δγ+hη) − R(δγ−hη)) / 2h)`.
pub fn directional_derivative_check(
    space: &FemSpace,
    sigma0: &[f64],
    delta: &[f64],
    data: &CauchyDataSet,
    direction: &[f64],
    h: f64,
) -> Result<(f64, f64)> {
    let gamma: Vec<f64> = sigma0.iter().zip(delta).map(|(s, d)| s + d).collect();
    let eval = discrepancy(space, &gamma, data)?;
    let load = gradient_load(space, &eval, data)?;
    let analytic: f64 = load.iter().zip(direction).map(|(a, b)| a * b).sum();
    let shifted = |sign: f64| -> Result<f64> {
        let g: Vec<f64> = gamma
            .iter()
            .zip(direction)
            .map(|(x, e)| x + sign * h * e)
            .collect();
        Ok(discrepancy(space, &g, data)?.value)
    };
    let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * h);
    Ok((analytic, fd))
}
