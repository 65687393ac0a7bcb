//! P1 finite elements: assembly of stiffness, mass and boundary-mass matrices
//! and the two elliptic solves used by the reconstruction, the weighted
//! pure-Neumann problem and the zero-trace `(−Δ + 1)` Riesz problem.

mod solver;
mod sparse;

use std::sync::Arc;

use crate::error::{EitError, Result};
use crate::field::NodalField;
use crate::mesh::{BoundarySubset, SimplicialMesh};
use crate::patterns::BoundaryPattern;

pub use solver::{pcg, SolveStats, SolverOptions};
pub use sparse::{CsrMatrix, SparsityPattern};

/// Tolerance of the discrete compatibility check `|∫ g ds| ≤ tol·‖g‖`.
pub const COMPAT_TOL: f64 = 1e-10;

/// `K_ij = Σ_T γ̄_T ∇ψ_i·∇ψ_j |T|` with `γ̄_T` the vertex average of `gamma`.
pub fn assemble_stiffness(
    mesh: &SimplicialMesh,
    pattern: &Arc<SparsityPattern>,
    gamma: &[f64],
) -> Result<CsrMatrix> {
    if gamma.len() != mesh.n_vertices() {
        return Err(EitError::LengthMismatch {
            what: "conductivity",
            expected: mesh.n_vertices(),
            found: gamma.len(),
        });
    }
    let mut k = CsrMatrix::zeros(pattern.clone());
    let nl = mesh.dim() + 1;
    for (c, cell) in mesh.cells().enumerate() {
        let vol = mesh.cell_volume(c);
        if !(vol > 0.0) {
            return Err(EitError::DegenerateCell {
                cell: c,
                volume: vol,
            });
        }
        let gbar = cell.iter().map(|&v| gamma[v]).sum::<f64>() / nl as f64;
        let grads = mesh.cell_gradients(c);
        let slots = pattern.cell_slots(c);
        let vals = k.values_mut();
        for i in 0..nl {
            for j in 0..nl {
                let gij = grads[i][0] * grads[j][0]
                    + grads[i][1] * grads[j][1]
                    + grads[i][2] * grads[j][2];
                vals[slots[i * nl + j]] += gbar * gij * vol;
            }
        }
    }
    Ok(k)
}

/// Consistent P1 mass matrix, `M_ij = ∫ ψ_i ψ_j dx`.
pub fn assemble_mass(mesh: &SimplicialMesh, pattern: &Arc<SparsityPattern>) -> CsrMatrix {
    let mut m = CsrMatrix::zeros(pattern.clone());
    let nl = mesh.dim() + 1;
    let denom = (nl * (nl + 1)) as f64;
    for c in 0..mesh.n_cells() {
        let vol = mesh.cell_volume(c);
        let slots = pattern.cell_slots(c);
        let vals = m.values_mut();
        for i in 0..nl {
            for j in 0..nl {
                let f = if i == j { 2.0 } else { 1.0 };
                vals[slots[i * nl + j]] += f * vol / denom;
            }
        }
    }
    m
}

/// Boundary mass matrix over the facets of `subset`, `∫_Γ ψ_i ψ_j ds`.
pub fn assemble_boundary_mass(
    pattern: &Arc<SparsityPattern>,
    subset: &BoundarySubset,
) -> CsrMatrix {
    let mut b = CsrMatrix::zeros(pattern.clone());
    for (fv, area) in subset.facet_iter() {
        let d = fv.len() as f64;
        let denom = d * (d + 1.0);
        for &i in fv {
            for &j in fv {
                let f = if i == j { 2.0 } else { 1.0 };
                b.add_at(i, j, f * area / denom);
            }
        }
    }
    b
}

/// Unit-coefficient stiffness, mass and boundary mass of `subset`.
pub fn assemble_h1_matrices(
    mesh: &SimplicialMesh,
    pattern: &Arc<SparsityPattern>,
    subset: &BoundarySubset,
) -> (CsrMatrix, CsrMatrix, CsrMatrix) {
    let ones = vec![1.0; mesh.n_vertices()];
    let k1 = assemble_stiffness(mesh, pattern, &ones).expect("mesh cells are valid");
    (
        k1,
        assemble_mass(mesh, pattern),
        assemble_boundary_mass(pattern, subset),
    )
}

fn inverse_diagonal(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

/// Mesh-level FEM data shared by every solve: sparsity pattern, the H¹
/// matrices and the full-boundary measure. Immutable after construction.
#[derive(Debug)]
pub struct FemSpace {
    mesh: Arc<SimplicialMesh>,
    pattern: Arc<SparsityPattern>,
    stiffness_unit: CsrMatrix,
    mass: CsrMatrix,
    h1: CsrMatrix,
    h1_inv_diag: Vec<f64>,
    full_boundary: BoundarySubset,
    node_volumes: Vec<f64>,
    options: SolverOptions,
}

impl FemSpace {
    pub fn new(mesh: Arc<SimplicialMesh>) -> Self {
        Self::with_options(mesh, SolverOptions::default())
    }

    pub fn with_options(mesh: Arc<SimplicialMesh>, options: SolverOptions) -> Self {
        let pattern = Arc::new(SparsityPattern::from_mesh(&mesh));
        let full_boundary = BoundarySubset::full(&mesh);
        let (stiffness_unit, mass, _) = assemble_h1_matrices(&mesh, &pattern, &full_boundary);
        let h1 = stiffness_unit.add(&mass);
        let mut h1_inv_diag = inverse_diagonal(&h1);
        for (v, d) in h1_inv_diag.iter_mut().enumerate() {
            if mesh.is_boundary_vertex(v) {
                *d = 1.0;
            }
        }
        let node_volumes = mesh.node_volumes();
        FemSpace {
            mesh,
            pattern,
            stiffness_unit,
            mass,
            h1,
            h1_inv_diag,
            full_boundary,
            node_volumes,
            options,
        }
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn unit_stiffness(&self) -> &CsrMatrix {
        &self.stiffness_unit
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// `K₁ + M`, the Gram matrix of the H¹ inner product on the P1 basis.
    pub fn h1(&self) -> &CsrMatrix {
        &self.h1
    }

    pub fn full_boundary(&self) -> &BoundarySubset {
        &self.full_boundary
    }

    pub fn node_volumes(&self) -> &[f64] {
        &self.node_volumes
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn h1_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.h1.inner(x, y)
    }

    pub fn stiffness(&self, gamma: &[f64]) -> Result<CsrMatrix> {
        assemble_stiffness(&self.mesh, &self.pattern, gamma)
    }

    pub fn neumann_system(&self, gamma: &[f64]) -> Result<NeumannSystem> {
        let stiffness = self.stiffness(gamma)?;
        let inv_diag = inverse_diagonal(&stiffness);
        Ok(NeumannSystem {
            stiffness,
            inv_diag,
            options: self.options,
        })
    }

    /// Riesz representative in `H¹₀`: solves `(K₁ + M) v = load` on interior
    /// vertices with `v = 0` on every boundary vertex.
    pub fn solve_riesz(&self, load: &[f64]) -> Result<NodalField> {
        if load.len() != self.mesh.n_vertices() {
            return Err(EitError::LengthMismatch {
                what: "Riesz load",
                expected: self.mesh.n_vertices(),
                found: load.len(),
            });
        }
        let mask = self.mesh.boundary_mask();
        let b: Vec<f64> = load
            .iter()
            .zip(mask)
            .map(|(&l, &bd)| if bd { 0.0 } else { l })
            .collect();
        let mut v = vec![0.0; b.len()];
        let mut tmp = vec![0.0; b.len()];
        let apply = |x: &[f64], y: &mut [f64]| {
            // pinned rows/columns act as the identity; x is zero there anyway
            tmp.clear();
            tmp.extend(
                x.iter()
                    .zip(mask)
                    .map(|(&xi, &bd)| if bd { 0.0 } else { xi }),
            );
            self.h1.mul_vec_into(&tmp, y);
            for ((yi, &bd), &xi) in y.iter_mut().zip(mask).zip(x) {
                if bd {
                    *yi = xi;
                }
            }
        };
        pcg_mut(apply, &self.h1_inv_diag, &b, &mut v, &self.options)?;
        for (vi, &bd) in v.iter_mut().zip(mask) {
            if bd {
                *vi = 0.0;
            }
        }
        Ok(NodalField::from_vec(v))
    }
}

// `pcg` takes `Fn`; the Riesz operator needs scratch space.
fn pcg_mut(
    apply: impl FnMut(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    options: &SolverOptions,
) -> Result<SolveStats> {
    let cell = std::cell::RefCell::new(apply);
    pcg(|x, y| (cell.borrow_mut())(x, y), inv_diag, b, x, options)
}

/// The weighted pure-Neumann problem `K(γ) u = b` for a fixed coefficient.
#[derive(Clone, Debug)]
pub struct NeumannSystem {
    stiffness: CsrMatrix,
    inv_diag: Vec<f64>,
    options: SolverOptions,
}

impl NeumannSystem {
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Solves with an assembled load vector (`b ⟂ 1` up to round-off) and
    /// fixes the constant so that the ds-weighted mean of `u` over `ground`
    /// vanishes.
    pub fn solve_load(
        &self,
        load: &[f64],
        ground: &BoundarySubset,
    ) -> Result<(NodalField, SolveStats)> {
        let n = load.len();
        let mean = load.iter().sum::<f64>() / n as f64;
        let b: Vec<f64> = load.iter().map(|l| l - mean).collect();
        let mut u = vec![0.0; n];
        let stats = pcg(
            |x, y| self.stiffness.mul_vec_into(x, y),
            &self.inv_diag,
            &b,
            &mut u,
            &self.options,
        )?;
        ground.shift_to_zero_mean(&mut u);
        Ok((NodalField::from_vec(u), stats))
    }

    /// Solution for the Neumann current `g` (applied on its support subset),
    /// grounded on `ground`.
    pub fn solve_neumann(
        &self,
        g: &BoundaryPattern,
        ground: &BoundarySubset,
    ) -> Result<NodalField> {
        let integral = g.integral();
        let gnorm = g.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        let bound = COMPAT_TOL * gnorm;
        if integral.abs() > bound {
            return Err(EitError::Compatibility { integral, bound });
        }
        Ok(self.solve_load(&g.load(), ground)?.0)
    }
}
