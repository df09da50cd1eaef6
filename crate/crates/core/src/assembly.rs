//! Global assembly, Dirichlet elimination, static solution, spectra and
//! Rayleigh damping.
//!
//! Global dofs are interleaved by node: `(u1, u2)` of node `n` sit at
//! `2n` and `2n + 1`. VEM scatters element matrices by element
//! connectivity; NVEM scatters nodal matrices by patch node lists.

use std::sync::OnceLock;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::{edge_traction, ElementOperators};
use crate::material::Material;
use crate::mesh::{build_patches, element_geometry, EdgeInfo, NodalPatch, PolygonalMesh};
use crate::nodal::{traction_forces, NodalOperators};
use crate::problem::{Loads, Method, Problem, Stabilization, TractionField};
use crate::quadrature::gauss_legendre;
use crate::sparse::{Factorization, SparseMatrix};
use crate::{Error, Matrix, Point, Result, Vec2, Vector, Voigt};

/// Dense eigen-solves are used up to this many dofs.
pub const DENSE_EIGEN_LIMIT: usize = 5000;

/// Mesh plus every geometric operator derived from it.
#[derive(Debug)]
pub struct Discretization {
    pub mesh: PolygonalMesh,
    pub elements: Vec<ElementOperators>,
    pub patches: Vec<NodalPatch>,
    nodal: OnceLock<Vec<NodalOperators>>,
}

impl Discretization {
    pub fn new(mesh: PolygonalMesh) -> Self {
        let elements = (0..mesh.num_elements())
            .map(|e| ElementOperators::new(element_geometry(&mesh, e)))
            .collect();
        let patches = build_patches(&mesh);
        Discretization {
            mesh,
            elements,
            patches,
            nodal: OnceLock::new(),
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_dofs()
    }

    pub fn nodal_operators(&self) -> Result<&[NodalOperators]> {
        if let Some(n) = self.nodal.get() {
            return Ok(n);
        }
        let ops = self
            .patches
            .iter()
            .map(|p| NodalOperators::new(p, &self.mesh, &self.elements))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.nodal.get_or_init(|| ops))
    }

    fn element_dofs(&self, e: usize) -> Vec<usize> {
        self.mesh.elements[e].iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect()
    }
}

fn scatter(entries: &mut Vec<(usize, usize, f64)>, dofs: &[usize], m: &Matrix) {
    for (j, &gj) in dofs.iter().enumerate() {
        for (i, &gi) in dofs.iter().enumerate() {
            let v = m[(i, j)];
            if v != 0.0 {
                entries.push((gi, gj, v));
            }
        }
    }
}

pub fn assemble_stiffness(
    disc: &Discretization,
    method: Method,
    material: &Material,
    stab: Stabilization,
) -> Result<SparseMatrix> {
    let d = material.constitutive();
    let d_stab = stab.matrix(material, method);
    let n = disc.num_dofs();
    let mut entries = Vec::new();
    match method {
        Method::Vem => {
            let ds = d_stab.unwrap_or(d);
            for (e, ops) in disc.elements.iter().enumerate() {
                scatter(&mut entries, &disc.element_dofs(e), &ops.stiffness(&d, &ds));
            }
        }
        Method::Nvem => {
            for ops in disc.nodal_operators()? {
                scatter(&mut entries, &ops.global_dofs(), &ops.stiffness(&d, d_stab.as_ref()));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &entries)
}

pub fn assemble_mass(disc: &Discretization, method: Method, rho: f64) -> Result<SparseMatrix> {
    let n = disc.num_dofs();
    let mut entries = Vec::new();
    match method {
        Method::Vem => {
            for (e, ops) in disc.elements.iter().enumerate() {
                scatter(&mut entries, &disc.element_dofs(e), &ops.mass(rho)?);
            }
        }
        Method::Nvem => {
            for ops in disc.nodal_operators()? {
                let m = ops.mass(&disc.mesh, &disc.elements, rho)?;
                scatter(&mut entries, &ops.global_dofs(), &m);
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &entries)
}

/// Edge average of a traction field by two-point Gauss quadrature.
pub fn edge_average_traction(mesh: &PolygonalMesh, edge: &EdgeInfo, field: &TractionField) -> Vec2 {
    let (a, b) = (mesh.nodes[edge.nodes[0]], mesh.nodes[edge.nodes[1]]);
    gauss_legendre(2)
        .into_iter()
        .map(|(s, w)| {
            let x = Point::from(a.coords * (0.5 * (1.0 - s)) + b.coords * (0.5 * (1.0 + s)));
            field(&x, &edge.normal) * (0.5 * w)
        })
        .sum()
}

/// External force vector for `loads`.
pub fn assemble_loads(disc: &Discretization, method: Method, loads: &Loads) -> Result<Vector> {
    let mesh = &disc.mesh;
    let mut f = Vector::zeros(disc.num_dofs());
    if let Some(body) = &loads.body {
        let b_hat: Vec<Vec2> = disc.elements.iter().map(|e| body(&e.geom.center)).collect();
        match method {
            Method::Vem => {
                for (e, ops) in disc.elements.iter().enumerate() {
                    let fe = ops.body_force(&b_hat[e]);
                    for (i, g) in disc.element_dofs(e).into_iter().enumerate() {
                        f[g] += fe[i];
                    }
                }
            }
            Method::Nvem => {
                for ops in disc.nodal_operators()? {
                    let local: Vec<Vec2> = ops.patch.elements.iter().map(|&e| b_hat[e]).collect();
                    let fi = ops.body_force(mesh, &local)?;
                    for (i, g) in ops.global_dofs().into_iter().enumerate() {
                        f[g] += fi[i];
                    }
                }
            }
        }
    }
    for t in &loads.tractions {
        let edges = mesh.boundary_edges(&t.tag)?;
        let t_hat: Vec<Vec2> = edges
            .iter()
            .map(|e| edge_average_traction(mesh, e, &t.value))
            .collect();
        match method {
            Method::Vem => {
                for (e, th) in edges.iter().zip(&t_hat) {
                    let fe = edge_traction(e.length, th);
                    for (k, &n) in e.nodes.iter().enumerate() {
                        f[2 * n] += fe[2 * k];
                        f[2 * n + 1] += fe[2 * k + 1];
                    }
                }
            }
            Method::Nvem => f += traction_forces(mesh.num_nodes(), &edges, &t_hat),
        }
    }
    for p in &loads.point_loads {
        if p.node >= mesh.num_nodes() {
            return Err(Error::Argument(format!("point load on missing node {}", p.node)));
        }
        f[2 * p.node] += p.force.x;
        f[2 * p.node + 1] += p.force.y;
    }
    Ok(f)
}

/// Assembled stiffness, load vector and prescribed dofs.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub k: SparseMatrix,
    pub f: Vector,
    pub constraints: Vec<(usize, f64)>,
}

pub fn assemble(
    problem: &Problem,
    disc: &Discretization,
    method: Method,
    stab: Stabilization,
) -> Result<GlobalSystem> {
    Ok(GlobalSystem {
        k: assemble_stiffness(disc, method, &problem.material, stab)?,
        f: assemble_loads(disc, method, &problem.loads)?,
        constraints: problem.constraints()?,
    })
}

/// System restricted to the free dofs after symmetric elimination of the
/// prescribed ones.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: SparseMatrix,
    pub f: Vector,
    pub free: Vec<usize>,
    pub prescribed: Vec<(usize, f64)>,
    pub num_dofs: usize,
}

impl ReducedSystem {
    /// Full displacement vector from free-dof values; prescribed dofs are
    /// copied verbatim.
    pub fn expand(&self, u_free: &Vector) -> Vector {
        let mut u = Vector::zeros(self.num_dofs);
        for (i, &g) in self.free.iter().enumerate() {
            u[g] = u_free[i];
        }
        for &(g, v) in &self.prescribed {
            u[g] = v;
        }
        u
    }

    /// Free-dof part of a full vector.
    pub fn restrict(&self, full: &Vector) -> Vector {
        Vector::from_iterator(self.free.len(), self.free.iter().map(|&g| full[g]))
    }
}

/// `K_ff u_f = f_f - K_fc u_c`.
pub fn apply_dirichlet(k: &SparseMatrix, f: &Vector, constraints: &[(usize, f64)]) -> Result<ReducedSystem> {
    let n = k.nrows();
    let mut fixed = vec![None; n];
    for &(g, v) in constraints {
        if g >= n {
            return Err(Error::Argument(format!("constraint on dof {g} of {n}")));
        }
        fixed[g] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&g| fixed[g].is_none()).collect();
    let prescribed: Vec<(usize, f64)> = (0..n).filter_map(|g| fixed[g].map(|v| (g, v))).collect();
    let mut uc = Vector::zeros(n);
    for &(g, v) in &prescribed {
        uc[g] = v;
    }
    let correction = k.mul_vec(&uc);
    let f_red = Vector::from_iterator(free.len(), free.iter().map(|&g| f[g] - correction[g]));
    Ok(ReducedSystem {
        k: k.select(&free)?,
        f: f_red,
        free,
        prescribed,
        num_dofs: n,
    })
}

#[derive(Debug, Clone)]
pub struct StaticSolution {
    pub u: Vector,
    /// `‖K_ff u_f - f_f‖ / ‖f_f‖` (absolute when the right-hand side vanishes).
    pub residual: f64,
    pub cholesky: bool,
}

/// Direct sparse solve of a reduced system.
pub fn solve_static(sys: &ReducedSystem) -> Result<StaticSolution> {
    if sys.free.is_empty() {
        return Ok(StaticSolution {
            u: sys.expand(&Vector::zeros(0)),
            residual: 0.0,
            cholesky: true,
        });
    }
    let fact = sys.k.factorize().map_err(|e| singular_diagnostic(&sys.k, e))?;
    let uf = fact.solve(&sys.f);
    let r = sys.k.mul_vec(&uf) - &sys.f;
    let scale = sys.f.norm();
    let residual = if scale > 0.0 { r.norm() / scale } else { r.norm() };
    if !uf.iter().all(|v| v.is_finite()) || residual > 1e-6 {
        return Err(singular_diagnostic(
            &sys.k,
            Error::Singular(format!("solve residual {residual:e}")),
        ));
    }
    if residual > 1e-10 {
        log::warn!("static solve residual {residual:e} exceeds 1e-10");
    }
    Ok(StaticSolution {
        u: sys.expand(&uf),
        residual,
        cholesky: matches!(fact, Factorization::Cholesky(..)),
    })
}

fn singular_diagnostic(k: &SparseMatrix, cause: Error) -> Error {
    let detail = if k.nrows() <= DENSE_EIGEN_LIMIT / 2 {
        let ev = k.to_dense().symmetric_eigenvalues();
        let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let null = ev.iter().filter(|v| v.abs() <= 1e-10 * max).count();
        format!("; numerical nullspace dimension {null} of {}", k.nrows())
    } else {
        String::new()
    };
    match cause {
        Error::Singular(msg) => Error::Singular(format!("{msg}{detail}")),
        other => Error::Singular(format!("{other}{detail}")),
    }
}

/// Assembles and solves `problem` in one call.
pub fn solve_problem(
    problem: &Problem,
    disc: &Discretization,
    method: Method,
    stab: Stabilization,
) -> Result<StaticSolution> {
    let sys = assemble(problem, disc, method, stab)?;
    solve_static(&apply_dirichlet(&sys.k, &sys.f, &sys.constraints)?)
}

/// Smallest eigenpairs, ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Mass-orthonormal when a mass matrix is given, unit 2-norm otherwise.
    pub modes: Vec<Vector>,
}

/// The `count` smallest eigenpairs of `K φ = λ M φ` (`M = I` when absent).
///
/// Dense below [`DENSE_EIGEN_LIMIT`] dofs, shift-invert subspace iteration
/// above.
pub fn eigen_spectrum(k: &SparseMatrix, m: Option<&SparseMatrix>, count: usize) -> Result<Spectrum> {
    let n = k.nrows();
    if count > n {
        return Err(Error::Argument(format!("requested {count} eigenvalues of a {n}-dof system")));
    }
    if n <= DENSE_EIGEN_LIMIT {
        dense_spectrum(&k.to_dense(), m.map(|m| m.to_dense()).as_ref(), count)
    } else {
        subspace_spectrum(k, m, count)
    }
}

/// Dense generalized symmetric eigen-solve.
pub fn dense_spectrum(k: &Matrix, m: Option<&Matrix>, count: usize) -> Result<Spectrum> {
    let n = k.nrows();
    let (a, l) = match m {
        Some(m) => {
            let l = m
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Singular("mass matrix is not positive definite".into()))?
                .l();
            let y = l
                .solve_lower_triangular(k)
                .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
            let a = l
                .solve_lower_triangular(&y.transpose())
                .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
            (0.5 * (&a + a.transpose()), Some(l))
        }
        None => (0.5 * (k + k.transpose()), None),
    };
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(count);
    let mut modes = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        values.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let phi = match &l {
            Some(l) => l
                .transpose()
                .solve_upper_triangular(&y)
                .ok_or_else(|| Error::Singular("triangular solve failed".into()))?,
            None => y,
        };
        modes.push(phi);
    }
    Ok(Spectrum { values, modes })
}

fn subspace_spectrum(k: &SparseMatrix, m: Option<&SparseMatrix>, count: usize) -> Result<Spectrum> {
    let n = k.nrows();
    let identity;
    let m = match m {
        Some(m) => m,
        None => {
            identity = SparseMatrix::from_triplets(n, n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>())?;
            &identity
        }
    };
    let kd = (0..n).map(|i| k.get(i, i).abs()).fold(0.0, f64::max);
    let md = (0..n).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
    let shift = 1e-8 * kd / md;
    let fact = k.linear_combination(1.0, m, shift)?.cholesky()?;
    let p = (2 * count).max(count + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = Matrix::from_fn(n, p, |_, _| rng.random_range(-0.5..0.5));
    let mut previous = vec![f64::INFINITY; count];
    for _ in 0..500 {
        let mut y = Matrix::zeros(n, p);
        for j in 0..p {
            let mx = m.mul_vec(&x.column(j).into_owned());
            y.set_column(j, &fact.solve(&mx));
        }
        let y = y.qr().q();
        let ky = Matrix::from_columns(&(0..p).map(|j| k.mul_vec(&y.column(j).into_owned())).collect::<Vec<_>>());
        let my = Matrix::from_columns(&(0..p).map(|j| m.mul_vec(&y.column(j).into_owned())).collect::<Vec<_>>());
        let kr = y.transpose() * ky;
        let mr = y.transpose() * my;
        let small = dense_spectrum(&kr, Some(&(0.5 * (&mr + mr.transpose()))), p)?;
        x = Matrix::from_columns(&small.modes.iter().map(|q| &y * q).collect::<Vec<_>>());
        let converged = small
            .values
            .iter()
            .zip(&previous)
            .take(count)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(shift));
        previous = small.values[..count].to_vec();
        if converged {
            break;
        }
    }
    let modes = (0..count).map(|j| x.column(j).into_owned()).collect();
    Ok(Spectrum { values: previous, modes })
}

/// `C = q1 M + q2 K`.
pub fn rayleigh_damping(m: &SparseMatrix, k: &SparseMatrix, q1: f64, q2: f64) -> Result<SparseMatrix> {
    m.linear_combination(q1, k, q2)
}

/// Recovered nodal fields.
#[derive(Debug, Clone, Default)]
pub struct NodalFields {
    pub displacement: Vec<Vec2>,
    pub strain: Vec<Voigt>,
    pub stress: Vec<Voigt>,
    pub pressure: Vec<f64>,
    pub von_mises: Vec<f64>,
}

/// Nodal strain `ε̂_I = B_I d` and the quantities derived from it.
///
/// `B_I d` is the patch average of element strains, so the same recovery
/// serves both methods.
pub fn recover_nodal_fields(disc: &Discretization, material: &Material, u: &Vector) -> Result<NodalFields> {
    let elem_strain: Vec<Voigt> = disc
        .elements
        .iter()
        .enumerate()
        .map(|(e, ops)| {
            let d = Vector::from_iterator(2 * ops.num_vertices(), disc.element_dofs(e).into_iter().map(|g| u[g]));
            let s = &ops.b * d;
            Voigt::new(s[0], s[1], s[2])
        })
        .collect();
    let d = material.constitutive();
    let mut out = NodalFields::default();
    for (i, p) in disc.patches.iter().enumerate() {
        let eps = p
            .elements
            .iter()
            .zip(&p.weights)
            .fold(Voigt::zeros(), |s, (&e, &w)| s + elem_strain[e] * w);
        let sig = d * eps;
        out.displacement.push(Vec2::new(u[2 * i], u[2 * i + 1]));
        out.strain.push(eps);
        out.stress.push(sig);
        out.pressure.push(material.pressure(&eps));
        out.von_mises.push(material.von_mises(&eps, &sig));
    }
    Ok(out)
}

/// Element-average strains `B_E d_E`.
pub fn element_strains(disc: &Discretization, u: &Vector) -> Vec<Voigt> {
    disc.elements
        .iter()
        .enumerate()
        .map(|(e, ops)| {
            let d = Vector::from_iterator(2 * ops.num_vertices(), disc.element_dofs(e).into_iter().map(|g| u[g]));
            let s = &ops.b * d;
            Voigt::new(s[0], s[1], s[2])
        })
        .collect()
}

/// Element displacement vector `d_E` from a global vector.
pub fn element_displacements(disc: &Discretization, e: usize, u: &Vector) -> Vector {
    Vector::from_iterator(
        2 * disc.elements[e].num_vertices(),
        disc.element_dofs(e).into_iter().map(|g| u[g]),
    )
}
