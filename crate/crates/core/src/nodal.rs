//! Node-based operators.
//!
//! Every element quantity `F_E` is carried to a node `I` by the affine
//! average `F_I = Σ_E w_E F_E` over the patch of elements sharing `I`, with
//! `w_E = |E| / (N_E |I|)`. Element matrices are first embedded into the
//! patch frame (the sorted list of patch nodes, two dofs each) with zeros in
//! the remaining positions.

use crate::element::ElementOperators;
use crate::mesh::{EdgeInfo, NodalPatch, PolygonalMesh};
use crate::{Error, Mat3, Matrix, Point, Result, Vec2, Vector};

/// Patch-local dof positions of an element's vertex dofs.
pub fn local_dofs(patch: &NodalPatch, ring: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(2 * ring.len());
    for &v in ring {
        let l = patch.local_index(v).ok_or_else(|| {
            Error::Internal(format!("node {v} is not part of the patch of node {}", patch.node))
        })?;
        out.push(2 * l);
        out.push(2 * l + 1);
    }
    Ok(out)
}

/// `Σ_E w_E scatter(F_E)` for matrices whose columns (and rows, when
/// `square`) follow the element's vertex dofs.
pub fn nodal_average(
    patch: &NodalPatch,
    rings: &[&[usize]],
    matrices: &[Matrix],
    square: bool,
) -> Result<Matrix> {
    let np = patch.num_dofs();
    let nrows = if square { np } else { matrices[0].nrows() };
    let mut out = Matrix::zeros(nrows, np);
    for ((ring, m), w) in rings.iter().zip(matrices).zip(&patch.weights) {
        let map = local_dofs(patch, ring)?;
        for (j, &cj) in map.iter().enumerate() {
            if square {
                for (i, &ri) in map.iter().enumerate() {
                    out[(ri, cj)] += w * m[(i, j)];
                }
            } else {
                for i in 0..nrows {
                    out[(i, cj)] += w * m[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

/// Operators of one node. All matrices use the patch dof frame.
#[derive(Debug, Clone)]
pub struct NodalOperators {
    pub patch: NodalPatch,
    /// 3 × 2P nodal strain matrix.
    pub b: Matrix,
    /// 2P × 2P averaged `I - P`.
    pub i_minus_p: Matrix,
}

impl NodalOperators {
    pub fn new(patch: &NodalPatch, mesh: &PolygonalMesh, elements: &[ElementOperators]) -> Result<Self> {
        let rings: Vec<&[usize]> = patch.elements.iter().map(|&e| mesh.elements[e].as_slice()).collect();
        let bs: Vec<Matrix> = patch.elements.iter().map(|&e| elements[e].b.clone()).collect();
        let imps: Vec<Matrix> = patch.elements.iter().map(|&e| elements[e].i_minus_p()).collect();
        Ok(NodalOperators {
            patch: patch.clone(),
            b: nodal_average(patch, &rings, &bs, false)?,
            i_minus_p: nodal_average(patch, &rings, &imps, true)?,
        })
    }

    pub fn area(&self) -> f64 {
        self.patch.area
    }

    /// `|I| B_Iᵀ D B_I`.
    pub fn consistency_stiffness(&self, d: &Mat3) -> Matrix {
        let dm = Matrix::from_iterator(3, 3, d.iter().copied());
        self.b.transpose() * dm * &self.b * self.patch.area
    }

    /// `max(1, (|I| B_Iᵀ D_stab B_I)_ii)`.
    pub fn stability_scaling(&self, d_stab: &Mat3) -> Vector {
        let k = self.consistency_stiffness(d_stab);
        Vector::from_fn(k.nrows(), |i, _| k[(i, i)].max(1.0))
    }

    /// `(I - P)_Iᵀ S_I (I - P)_I`.
    pub fn stability_stiffness(&self, d_stab: &Mat3) -> Matrix {
        let s = self.stability_scaling(d_stab);
        let mut sd = self.i_minus_p.clone();
        for (i, mut row) in sd.row_iter_mut().enumerate() {
            row *= s[i];
        }
        self.i_minus_p.transpose() * sd
    }

    /// Nodal stiffness; `d_stab = None` leaves out the stability term.
    pub fn stiffness(&self, d: &Mat3, d_stab: Option<&Mat3>) -> Matrix {
        let kc = self.consistency_stiffness(d);
        match d_stab {
            Some(ds) => kc + self.stability_stiffness(ds),
            None => kc,
        }
    }

    /// `|I| N̄_Iᵀ b̂_I` for per-element averages `b_hat` (indexed like the
    /// patch's element list).
    pub fn body_force(&self, mesh: &PolygonalMesh, b_hat: &[Vec2]) -> Result<Vector> {
        let rings: Vec<&[usize]> = self.patch.elements.iter().map(|&e| mesh.elements[e].as_slice()).collect();
        let nbars: Vec<Matrix> = rings
            .iter()
            .map(|r| {
                let n = r.len();
                Matrix::from_fn(2, 2 * n, |i, j| if j % 2 == i { 1.0 / n as f64 } else { 0.0 })
            })
            .collect();
        let nbar = nodal_average(&self.patch, &rings, &nbars, false)?;
        let b = b_hat
            .iter()
            .zip(&self.patch.weights)
            .fold(Vec2::zeros(), |s, (b, w)| s + b * *w);
        Ok(nbar.transpose() * Vector::from_column_slice(b.as_slice()) * self.patch.area)
    }

    /// `(Πφ)_I`: each element's projected basis evaluated at the node, then
    /// averaged (2 × 2P).
    pub fn projected_basis(&self, mesh: &PolygonalMesh, elements: &[ElementOperators]) -> Result<Matrix> {
        let x: Point = mesh.nodes[self.patch.node];
        let rings: Vec<&[usize]> = self.patch.elements.iter().map(|&e| mesh.elements[e].as_slice()).collect();
        let ws: Vec<Matrix> = self
            .patch
            .elements
            .iter()
            .map(|&e| elements[e].projected_basis_at(&x))
            .collect();
        nodal_average(&self.patch, &rings, &ws, false)
    }

    /// `ρ |I| ((Πφ)_Iᵀ (Πφ)_I + (I - P)_Iᵀ (I - P)_I)`.
    pub fn mass(&self, mesh: &PolygonalMesh, elements: &[ElementOperators], rho: f64) -> Result<Matrix> {
        let pp = self.projected_basis(mesh, elements)?;
        let m = pp.transpose() * &pp + self.i_minus_p.transpose() * &self.i_minus_p;
        Ok(m * (rho * self.patch.area))
    }

    /// Global dof index of every patch dof.
    pub fn global_dofs(&self) -> Vec<usize> {
        self.patch.nodes.iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect()
    }

    /// `ε̂_I = B_I d` from a global displacement vector.
    pub fn strain(&self, u: &Vector) -> crate::Voigt {
        let d = Vector::from_iterator(self.patch.num_dofs(), self.global_dofs().into_iter().map(|i| u[i]));
        let e = &self.b * d;
        crate::Voigt::new(e[0], e[1], e[2])
    }
}

/// Nodal loads of edge tractions on a one-dimensional patch: node `I` owns
/// `|I| = Σ |e| / 2` over its loaded edges, edge weights are `|e| / (2|I|)`
/// and `f_I = |I| N̄_Γ,Iᵀ t̂_I` is spread over the node and its edge
/// neighbours. `edges[k]` carries the edge-average traction `t_hat[k]`.
pub fn traction_forces(num_nodes: usize, edges: &[EdgeInfo], t_hat: &[Vec2]) -> Vector {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for (k, e) in edges.iter().enumerate() {
        incident[e.nodes[0]].push(k);
        if e.nodes[1] != e.nodes[0] {
            incident[e.nodes[1]].push(k);
        }
    }
    let mut f = Vector::zeros(2 * num_nodes);
    for (_node, ks) in incident.iter().enumerate().filter(|(_, k)| !k.is_empty()) {
        let area: f64 = ks.iter().map(|&k| 0.5 * edges[k].length).sum();
        let mut t = Vec2::zeros();
        let mut nbar: Vec<(usize, f64)> = Vec::new();
        for &k in ks {
            let w = 0.5 * edges[k].length / area;
            t += t_hat[k] * w;
            for &n in &edges[k].nodes {
                nbar.push((n, 0.5 * w));
            }
        }
        for (n, c) in nbar {
            f[2 * n] += area * c * t.x;
            f[2 * n + 1] += area * c * t.y;
        }
    }
    f
}

/// Nodal averages of per-element values: `Σ_E w_E v_E` for every node.
pub fn average_to_nodes<T>(patches: &[NodalPatch], values: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    patches
        .iter()
        .map(|p| {
            p.elements
                .iter()
                .zip(&p.weights)
                .fold(T::default(), |s, (&e, &w)| s + values[e] * w)
        })
        .collect()
}
