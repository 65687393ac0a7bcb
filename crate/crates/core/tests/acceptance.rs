//! Acceptance suite. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.
//!
//! Criteria 4 to 7 use the two-dimensional analogue of the phantom (the
//! cross-section `z = 0`) with the full circular pattern family; criterion 5 is
//! additionally checked on a coarse three-dimensional ball with all 35
//! patterns.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sparse_eit::fem::FemSpace;
use sparse_eit::field::NodalField;
use sparse_eit::forward::{
    discrepancy, nd_apply, simulate_cauchy_data, CauchyDataSet, Simulation, SimulationSettings,
};
use sparse_eit::mesh::{generate_ball_mesh, BoundarySubset, SimplicialMesh};
use sparse_eit::patterns::{BoundaryPattern, PatternSupport};
use sparse_eit::phantom::{build_phantom, prior_field, Phantom, PhantomSpec};
use sparse_eit::reconstruct::{
    gradient_load, project_admissible, run_with_observer, soft_threshold, Reconstruction,
    RegularizationPlan, SolverConfig, Termination,
};

const EPSILON: f64 = 1e-2;
const ALPHA: f64 = 1e-3;
/// Hemispherical data carry far less energy, so the penalty weight is lowered.
const ALPHA_PARTIAL: f64 = 1e-4;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn space(dim: usize, refinement: usize) -> FemSpace {
    FemSpace::new(Arc::new(generate_ball_mesh(dim, refinement).unwrap()))
}

fn b_norm(sub: &BoundarySubset, x: &[f64]) -> f64 {
    sub.inner(x, x).sqrt()
}

// ---------------------------------------------------------------- criterion 1

/// Harmonic homogeneous polynomials of degree `n` (3D, n ≤ 3) or the real and
/// imaginary parts of `(x + iy)^n` (2D). Their restrictions to the unit sphere
/// are spherical harmonics, so the exact ND map divides them by `n`.
type Polynomial = Box<dyn Fn(&[f64; 3]) -> f64>;

fn harmonic_polynomials(dim: usize, n: usize) -> Vec<Polynomial> {
    if dim == 2 {
        let re = move |p: &[f64; 3]| {
            let (mut a, mut b) = (1.0, 0.0);
            for _ in 0..n {
                (a, b) = (a * p[0] - b * p[1], a * p[1] + b * p[0]);
            }
            (a, b)
        };
        return vec![Box::new(move |p| re(p).0), Box::new(move |p| re(p).1)];
    }
    match n {
        1 => vec![Box::new(|p| p[0]), Box::new(|p| p[1]), Box::new(|p| p[2])],
        2 => vec![
            Box::new(|p| p[0] * p[1]),
            Box::new(|p| p[1] * p[2]),
            Box::new(|p| p[0] * p[2]),
            Box::new(|p| p[0] * p[0] - p[1] * p[1]),
            Box::new(|p| 2.0 * p[2] * p[2] - p[0] * p[0] - p[1] * p[1]),
        ],
        3 => {
            let r2 = |p: &[f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            vec![
                Box::new(|p| p[0] * (p[0] * p[0] - 3.0 * p[1] * p[1])),
                Box::new(|p| p[1] * (3.0 * p[0] * p[0] - p[1] * p[1])),
                Box::new(|p| p[2] * (p[0] * p[0] - p[1] * p[1])),
                Box::new(|p| p[0] * p[1] * p[2]),
                Box::new(move |p| p[0] * (5.0 * p[2] * p[2] - r2(p))),
                Box::new(move |p| p[1] * (5.0 * p[2] * p[2] - r2(p))),
                Box::new(move |p| p[2] * (5.0 * p[2] * p[2] - 3.0 * r2(p))),
            ]
        }
        _ => unreachable!(),
    }
}

/// Relative `L²(∂Ω)` trace errors for every harmonic of degree `1..=n_max`.
fn nd_errors(dim: usize, refinement: usize, n_max: usize) -> Vec<(usize, f64)> {
    let s = space(dim, refinement);
    let mesh = s.mesh();
    let full = Arc::new(BoundarySubset::full(mesh));
    let ones = vec![1.0; mesh.n_vertices()];
    let mut out = Vec::new();
    for n in 1..=n_max {
        for poly in harmonic_polynomials(dim, n) {
            let mut values = vec![0.0; mesh.n_vertices()];
            for &v in full.vertices() {
                values[v] = poly(mesh.vertex(v));
            }
            full.remove_mean(&mut values);
            let g = BoundaryPattern::new(values, full.clone(), n, 0).unwrap();
            let trace = nd_apply(&s, &ones, &g, &full).unwrap();
            let exact: Vec<f64> = g.values().iter().map(|x| x / n as f64).collect();
            let diff: Vec<f64> = trace
                .values()
                .iter()
                .zip(&exact)
                .map(|(a, b)| a - b)
                .collect();
            out.push((n, b_norm(&full, &diff) / b_norm(&full, &exact)));
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let disk = nd_errors(2, 22, 5);
    let disk_max = disk.iter().map(|e| e.1).fold(0.0, f64::max);
    let ball = nd_errors(3, 12, 3);
    let ball_max = ball.iter().map(|e| e.1).fold(0.0, f64::max);
    let coarse = nd_errors(3, 6, 3);
    let decreasing = ball.iter().zip(&coarse).all(|(f, c)| f.1 < c.1);
    outcome(
        disk_max < 0.01 && ball_max < 0.03 && decreasing,
        format!(
            "disk (2025 vertices) max error {:.3}% (< 1%); ball (15625 vertices) max error {:.3}% (< 3%), \
             every error below its 2197-vertex value: {decreasing}",
            100.0 * disk_max,
            100.0 * ball_max
        ),
    )
}

// ---------------------------------------------------------------- criterion 2

fn phantom_data(
    dim: usize,
    fine: usize,
    coarse: &SimplicialMesh,
    settings: SimulationSettings,
) -> Simulation {
    let fine = space(dim, fine);
    let sigma = build_phantom(&PhantomSpec::default(), fine.mesh())
        .unwrap()
        .sigma;
    simulate_cauchy_data(&fine, &sigma, coarse, &settings).unwrap()
}

fn interior_random(mesh: &SimplicialMesh, rng: &mut StdRng, amplitude: f64) -> Vec<f64> {
    (0..mesh.n_vertices())
        .map(|j| {
            if mesh.is_boundary_vertex(j) {
                0.0
            } else {
                rng.gen_range(-amplitude..amplitude)
            }
        })
        .collect()
}

fn gradient_check(
    dim: usize,
    coarse_r: usize,
    fine_r: usize,
    n_max: usize,
    rng: &mut StdRng,
) -> (usize, f64) {
    let s = space(dim, coarse_r);
    let mesh = s.mesh();
    let settings = SimulationSettings {
        n_max,
        epsilon: EPSILON,
        seed: SEED,
        ..Default::default()
    };
    let data = phantom_data(dim, fine_r, mesh, settings).data;
    let delta = interior_random(mesh, rng, 0.2);
    let gamma: Vec<f64> = delta.iter().map(|d| 1.0 + d).collect();
    let load = gradient_load(&s, &discrepancy(&s, &gamma, &data).unwrap(), &data).unwrap();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let eta = interior_random(mesh, rng, 1.0);
        let at = |t: f64| {
            let g: Vec<f64> = gamma.iter().zip(&eta).map(|(a, e)| a + t * e).collect();
            discrepancy(&s, &g, &data).unwrap().value
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let analytic: f64 = load.iter().zip(&eta).map(|(a, b)| a * b).sum();
        worst = worst.max((analytic - fd).abs() / analytic.abs());
    }
    (mesh.n_vertices(), worst)
}

fn criterion_2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let (n2, e2) = gradient_check(2, 11, 33, 5, &mut rng);
    let (n3, e3) = gradient_check(3, 6, 9, 2, &mut rng);
    outcome(
        e2 < 1e-3 && e3 < 1e-3,
        format!("5 directions each; worst relative error {e2:.2e} in 2D ({n2} vertices), {e3:.2e} in 3D ({n3} vertices), bound 1e-3"),
    )
}

// ---------------------------------------------------------------- criterion 3

/// Minimizer of `½(t − d)² + β|t|` by successively refined grid search.
/// Each stage works with offsets `u` from the current best point `c` and
/// compares `f(c + u) − f(c)` written out without cancellation, so the search
/// keeps resolving well below `sqrt(ε_mach)`.
fn grid_minimizer(d: f64, beta: f64) -> f64 {
    let gain = |c: f64, u: f64| {
        let t = c + u;
        // |c + u| − |c| is exactly ±u while the sign does not change
        let abs_change = if c != 0.0 && t.signum() == c.signum() {
            u * c.signum()
        } else {
            t.abs() - c.abs()
        };
        0.5 * u * u + u * (c - d) + beta * abs_change
    };
    let mut c = 0.0;
    let mut half_width = d.abs() + beta + 1.0;
    for _ in 0..40 {
        let n = 400;
        let step = 2.0 * half_width / n as f64;
        let mut best = (0.0, 0.0);
        for i in 0..=n {
            let u = -half_width + step * i as f64;
            let g = gain(c, u);
            if g < best.1 {
                best = (u, g);
            }
        }
        // the kink at 0 is a candidate the grid may straddle
        if c != 0.0 && gain(c, -c) < best.1 {
            best = (-c, gain(c, -c));
        }
        c += best.0;
        half_width = 2.0 * step;
    }
    c
}

fn jittered_mesh(dim: usize, refinement: usize, rng: &mut StdRng) -> SimplicialMesh {
    let base = generate_ball_mesh(dim, refinement).unwrap();
    let h = 1.0 / (2 * refinement) as f64;
    let vertices: Vec<[f64; 3]> = (0..base.n_vertices())
        .map(|v| {
            let mut p = *base.vertex(v);
            if !base.is_boundary_vertex(v) {
                for c in p.iter_mut().take(dim) {
                    *c += rng.gen_range(-0.15 * h..0.15 * h);
                }
            }
            p
        })
        .collect();
    let cells: Vec<usize> = base.cells().flatten().copied().collect();
    SimplicialMesh::new(dim, vertices, cells).unwrap()
}

/// `‖ψ_j‖_{L¹}` from determinants and the centroid rule, exact for linear
/// integrands, where every barycentric coordinate equals `1/(d+1)`.
fn basis_l1_norms(mesh: &SimplicialMesh) -> Vec<f64> {
    let d = mesh.dim();
    let mut norms = vec![0.0; mesh.n_vertices()];
    for cell in mesh.cells() {
        let p: Vec<&[f64; 3]> = cell.iter().map(|&v| mesh.vertex(v)).collect();
        let e = |i: usize, a: usize| p[i][a] - p[0][a];
        let vol = if d == 2 {
            (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)).abs() / 2.0
        } else {
            let det = e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1))
                - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
                + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0));
            det.abs() / 6.0
        };
        for &v in cell {
            norms[v] += vol / (d + 1) as f64;
        }
    }
    norms
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut soft_err: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.gen_range(-5.0..5.0);
        let beta = rng.gen_range(0.0..3.0);
        soft_err = soft_err.max((soft_threshold(d, beta) - grid_minimizer(d, beta)).abs());
    }

    let mut projection_ok = true;
    for _ in 0..1000 {
        let c = rng.gen_range(0.05..0.95);
        let sigma0: Vec<f64> = (0..8).map(|_| rng.gen_range(c..1.0 / c)).collect();
        let z1: Vec<f64> = (0..8).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let z2: Vec<f64> = (0..8).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let p1 = project_admissible(&z1, &sigma0, c).unwrap();
        let p2 = project_admissible(&z2, &sigma0, c).unwrap();
        let pp = project_admissible(&p1, &sigma0, c).unwrap();
        for j in 0..8 {
            projection_ok &= pp[j] == p1[j];
            projection_ok &= (p1[j] - p2[j]).abs() <= (z1[j] - z2[j]).abs();
            projection_ok &= sigma0[j] + p1[j] >= c && sigma0[j] + p1[j] <= 1.0 / c;
        }
    }

    let mut beta_err: f64 = 0.0;
    for (dim, r) in [(2, 6), (2, 9), (3, 3), (3, 5)] {
        let mesh = jittered_mesh(dim, r, &mut rng);
        let oracle = basis_l1_norms(&mesh);
        let s = FemSpace::new(Arc::new(mesh));
        let plan = RegularizationPlan::uniform(&s, 1.0).unwrap();
        for (a, b) in plan.beta().iter().zip(&oracle) {
            beta_err = beta_err.max((a - b).abs() / b);
        }
    }
    outcome(
        soft_err <= 1e-9 && projection_ok && beta_err <= 1e-13,
        format!(
            "soft threshold vs grid search max error {soft_err:.1e} (<= 1e-9); T_c idempotent, \
             nonexpansive and admissible: {projection_ok}; beta_j vs L1 quadrature on jittered meshes max rel. error {beta_err:.1e}"
        ),
    )
}

// ------------------------------------------------------- shared reconstructions

struct Experiment {
    space: FemSpace,
    truth: Phantom,
    data: CauchyDataSet,
    result: Reconstruction,
    /// Iterates that were inadmissible or nonzero on the boundary.
    violations: usize,
    seconds: f64,
}

fn reconstruct(
    space: FemSpace,
    truth: Phantom,
    data: CauchyDataSet,
    alpha: f64,
    mu: Option<NodalField>,
) -> Experiment {
    let mesh = space.mesh();
    let n = mesh.n_vertices();
    let sigma0 = vec![1.0; n];
    let plan = match mu {
        Some(mu) => RegularizationPlan::new(&space, alpha, mu).unwrap(),
        None => RegularizationPlan::uniform(&space, alpha).unwrap(),
    };
    let config = SolverConfig::default();
    let mut violations = 0;
    let started = Instant::now();
    let result = run_with_observer(&space, &data, &sigma0, &plan, &config, |_, delta| {
        for j in 0..n {
            let g = sigma0[j] + delta[j];
            if !(g >= config.c && g <= 1.0 / config.c)
                || (mesh.is_boundary_vertex(j) && delta[j] != 0.0)
            {
                violations += 1;
                break;
            }
        }
    })
    .unwrap();
    Experiment {
        seconds: started.elapsed().as_secs_f64(),
        space,
        truth,
        data,
        result,
        violations,
    }
}

fn experiment(
    dim: usize,
    coarse_r: usize,
    fine_r: usize,
    support: PatternSupport,
    prior: bool,
) -> Experiment {
    let s = space(dim, coarse_r);
    let settings = SimulationSettings {
        support,
        n_max: 5,
        gamma_d: support.region(),
        epsilon: EPSILON,
        seed: SEED,
        ..Default::default()
    };
    let data = phantom_data(dim, fine_r, s.mesh(), settings).data;
    let spec = PhantomSpec::default();
    let truth = build_phantom(&spec, s.mesh()).unwrap();
    let mu = prior.then(|| prior_field(&spec, s.mesh(), 1.1, 1e-2).unwrap());
    let alpha = if support == PatternSupport::Full {
        ALPHA
    } else {
        ALPHA_PARTIAL
    };
    reconstruct(s, truth, data, alpha, mu)
}

impl Experiment {
    fn relative_error(&self, delta: &[f64]) -> f64 {
        let m = self.space.mass();
        let e: Vec<f64> = (0..delta.len())
            .map(|j| 1.0 + delta[j] - self.truth.sigma[j])
            .collect();
        (m.inner(&e, &e) / m.inner(&self.truth.sigma, &self.truth.sigma)).sqrt()
    }

    fn final_error(&self) -> f64 {
        self.relative_error(&self.result.delta)
    }

    fn background_error(&self) -> f64 {
        self.relative_error(&vec![0.0; self.result.delta.len()])
    }

    /// Volume-weighted mean of `δγ` over the vertices of inclusion `i`.
    fn inclusion_mean(&self, i: usize) -> f64 {
        let vol = self.space.node_volumes();
        let (mut a, mut w) = (0.0, 0.0);
        for (j, &inside) in self.truth.masks[i].iter().enumerate() {
            if inside {
                a += vol[j] * self.result.delta[j];
                w += vol[j];
            }
        }
        a / w
    }

    /// Root-mean-square error of `σ₀ + δγ` over the vertices picked by `keep`.
    fn rms_error(&self, keep: impl Fn(&[f64; 3]) -> bool) -> f64 {
        let vol = self.space.node_volumes();
        let (mut a, mut w) = (0.0, 0.0);
        for (j, p) in self.space.mesh().vertices().iter().enumerate() {
            if keep(p) {
                let e = 1.0 + self.result.delta[j] - self.truth.sigma[j];
                a += vol[j] * e * e;
                w += vol[j];
            }
        }
        (a / w).sqrt()
    }
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4(e: &Experiment) -> Outcome {
    let tau = SolverConfig::default().tau;
    let monotone = e
        .result
        .log
        .iter()
        .all(|r| r.psi <= r.reference - tau / (2.0 * r.step) * r.step_norm_sq);
    let terminated = e.result.termination == Termination::StepBelowStop;
    outcome(
        monotone && e.violations == 0 && terminated,
        format!(
            "2D phantom analogue, {} vertices, K={}: {} accepted steps all weakly monotone: {monotone}; \
             inadmissible iterates: {}; termination {:?} ({:.0} s)",
            e.space.mesh().n_vertices(),
            e.data.len(),
            e.result.log.len(),
            e.violations,
            e.result.termination,
            e.seconds
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn quality(e: &Experiment) -> (bool, String) {
    let ball = e.inclusion_mean(0);
    let ell = [e.inclusion_mean(1), e.inclusion_mean(2)];
    let (err, err0) = (e.final_error(), e.background_error());
    let pass = ball > 0.0 && ell.iter().all(|&m| m < 0.0) && err < err0;
    (
        pass,
        format!(
            "{}D ({} vertices, K={}): ball mean {ball:+.3}, ellipsoid means {:+.3}/{:+.3}, rel. error {err:.4} vs {err0:.4} for sigma_0",
            e.space.mesh().dim(),
            e.space.mesh().n_vertices(),
            e.data.len(),
            ell[0],
            ell[1]
        ),
    )
}

fn criterion_5(e2: &Experiment, e3: &Experiment) -> Outcome {
    let (p2, d2) = quality(e2);
    let (p3, d3) = quality(e3);
    outcome(p2 && p3, format!("{d2}; {d3}"))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6(plain: &Experiment, prior: &Experiment) -> Outcome {
    let (a, b) = (prior.final_error(), plain.final_error());
    outcome(
        a < b,
        format!("2D rel. error with prior {a:.4} vs {b:.4} without (same data and seed)"),
    )
}

// ---------------------------------------------------------------- criterion 7

/// Distance from `p` to the half circle `{|x| = 1, sign·y ≥ 0}`.
fn distance_to_half_circle(p: &[f64; 3], sign: f64) -> f64 {
    if sign * p[1] >= 0.0 {
        1.0 - (p[0] * p[0] + p[1] * p[1]).sqrt()
    } else {
        let d = |x: f64| ((p[0] - x).powi(2) + p[1] * p[1]).sqrt();
        d(1.0).min(d(-1.0))
    }
}

fn partial(e: &Experiment, sign: f64) -> (bool, String) {
    let completed = !matches!(e.result.termination, Termination::SolverFailure(_));
    let reduction = e.result.initial_discrepancy / e.result.final_discrepancy;
    let near = e.rms_error(|p| distance_to_half_circle(p, sign) <= 0.3);
    let far = e.rms_error(|p| distance_to_half_circle(p, sign) > 0.3);
    (
        completed && reduction >= 2.0 && near < far,
        format!(
            "{} half: {:?} after {} steps, discrepancy reduced {reduction:.1}x, rms error near {near:.3} / far {far:.3}",
            if sign > 0.0 { "upper" } else { "lower" },
            e.result.termination,
            e.result.log.len()
        ),
    )
}

fn criterion_7(upper: &Experiment, lower: &Experiment) -> Outcome {
    let (a, da) = partial(upper, 1.0);
    let (b, db) = partial(lower, -1.0);
    outcome(a && b, format!("{da}; {db}"))
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8(sim: &Simulation) -> Outcome {
    let gd = sim.data.gamma_d_subset();
    let expected = EPSILON
        * sim
            .clean
            .iter()
            .flat_map(|f| gd.vertices().iter().map(move |&v| f.values()[v].abs()))
            .fold(0.0, f64::max);
    let samples: Vec<f64> = sim
        .data
        .traces()
        .iter()
        .zip(&sim.clean)
        .flat_map(|(y, f)| {
            gd.vertices()
                .iter()
                .map(move |&v| y.values()[v] - f.values()[v])
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let rel = (std / expected - 1.0).abs();
    outcome(
        samples.len() >= 10_000 && rel < 0.05,
        format!(
            "{} samples, empirical std {std:.4e} vs eps*max|f| {expected:.4e} (deviation {:.2}%, bound 5%)",
            samples.len(),
            100.0 * rel
        ),
    )
}

// ---------------------------------------------------------------------- driver

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    })
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |n: usize, name: &'static str, o: Outcome| {
        println!(
            "criterion {n} [{name}]: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };

    report(1, "ND-map spectral test", guarded(criterion_1));
    report(2, "adjoint gradient", guarded(criterion_2));
    report(3, "proximal and projection", guarded(criterion_3));

    let plain = experiment(2, 20, 40, PatternSupport::Full, false);
    report(4, "loop invariants", guarded(|| criterion_4(&plain)));

    let coarse3 = space(3, 6);
    let settings3 = SimulationSettings {
        n_max: 5,
        epsilon: EPSILON,
        seed: SEED,
        ..Default::default()
    };
    let sim3 = phantom_data(3, 9, coarse3.mesh(), settings3);
    let truth3 = build_phantom(&PhantomSpec::default(), coarse3.mesh()).unwrap();
    let plain3 = reconstruct(coarse3, truth3, sim3.data.clone(), ALPHA, None);
    report(
        5,
        "reconstruction quality",
        guarded(|| criterion_5(&plain, &plain3)),
    );

    let prior = experiment(2, 20, 40, PatternSupport::Full, true);
    report(
        6,
        "prior improves reconstruction",
        guarded(|| criterion_6(&plain, &prior)),
    );

    let upper = experiment(2, 20, 40, PatternSupport::UpperHalf, false);
    let lower = experiment(2, 20, 40, PatternSupport::LowerHalf, false);
    report(
        7,
        "partial-data sanity",
        guarded(|| criterion_7(&upper, &lower)),
    );

    report(8, "noise statistics", guarded(|| criterion_8(&sim3)));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0} s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
