//! Element-level operators of the low-order virtual element method.
//!
//! For an element with `N` vertices, nodal vectors are ordered
//! `(u1_0, u2_0, u1_1, u2_1, ...)`. The element-average strain is `B d`
//! with `B` built from the boundary coefficients
//!
//! ```text
//! q_ia = (|e_(a-1)| n_i,(a-1) + |e_a| n_i,a) / (2 |E|)
//! ```
//!
//! and the projection onto linear displacements is `P = H B + G R`.

use crate::mesh::ElementGeometry;
use crate::quadrature::triangle_degree2;
use crate::{Error, Mat3, Matrix, Point, Result, Vec2, Vector};

/// Element operators derived from the geometry alone.
#[derive(Debug, Clone)]
pub struct ElementOperators {
    pub geom: ElementGeometry,
    /// `q[a] = (q_1a, q_2a)`
    pub q: Vec<Vec2>,
    /// 3 × 2N
    pub b: Matrix,
    /// 2N × 3
    pub h: Matrix,
    /// 2N × 3
    pub g: Matrix,
    /// 3 × 2N
    pub r: Matrix,
    /// 2N × 2N
    pub p: Matrix,
}

/// Boundary coefficients `q_a` of every vertex.
pub fn strain_coefficients(geom: &ElementGeometry) -> Vec<Vec2> {
    let n = geom.num_vertices();
    (0..n)
        .map(|a| {
            let prev = (a + n - 1) % n;
            (geom.edge_normals[prev] * geom.edge_lengths[prev]
                + geom.edge_normals[a] * geom.edge_lengths[a])
                / (2.0 * geom.area)
        })
        .collect()
}

/// The 3 × 2N strain-displacement matrix.
pub fn strain_displacement_matrix(geom: &ElementGeometry) -> Matrix {
    b_from_q(&strain_coefficients(geom))
}

fn b_from_q(q: &[Vec2]) -> Matrix {
    let mut b = Matrix::zeros(3, 2 * q.len());
    for (a, qa) in q.iter().enumerate() {
        b[(0, 2 * a)] = qa.x;
        b[(1, 2 * a + 1)] = qa.y;
        b[(2, 2 * a)] = qa.y;
        b[(2, 2 * a + 1)] = qa.x;
    }
    b
}

/// `h(x)`: linear part of the projection at `x` relative to `center`.
fn h_at(center: &Point, x: &Point) -> [[f64; 3]; 2] {
    let (dx, dy) = (x.x - center.x, x.y - center.y);
    [[dx, 0.0, 0.5 * dy], [0.0, dy, 0.5 * dx]]
}

/// `g(x)`: translation and rotation part of the projection at `x`.
fn g_at(center: &Point, x: &Point) -> [[f64; 3]; 2] {
    let (dx, dy) = (x.x - center.x, x.y - center.y);
    [[1.0, 0.0, 0.5 * dy], [0.0, 1.0, -0.5 * dx]]
}

impl ElementOperators {
    pub fn new(geom: ElementGeometry) -> Self {
        let n = geom.num_vertices();
        let q = strain_coefficients(&geom);
        let b = b_from_q(&q);
        let mut h = Matrix::zeros(2 * n, 3);
        let mut g = Matrix::zeros(2 * n, 3);
        let mut r = Matrix::zeros(3, 2 * n);
        let inv_n = 1.0 / n as f64;
        for a in 0..n {
            let ha = h_at(&geom.center, &geom.vertices[a]);
            let ga = g_at(&geom.center, &geom.vertices[a]);
            for i in 0..2 {
                for j in 0..3 {
                    h[(2 * a + i, j)] = ha[i][j];
                    g[(2 * a + i, j)] = ga[i][j];
                }
            }
            r[(0, 2 * a)] = inv_n;
            r[(1, 2 * a + 1)] = inv_n;
            r[(2, 2 * a)] = q[a].y;
            r[(2, 2 * a + 1)] = -q[a].x;
        }
        let p = &h * &b + &g * &r;
        ElementOperators { geom, q, b, h, g, r, p }
    }

    pub fn num_vertices(&self) -> usize {
        self.geom.num_vertices()
    }

    pub fn area(&self) -> f64 {
        self.geom.area
    }

    pub fn i_minus_p(&self) -> Matrix {
        Matrix::identity(self.p.nrows(), self.p.ncols()) - &self.p
    }

    /// `W(x) = h(x) B + g(x) R` (2 × 2N), so that the projected displacement
    /// at `x` is `W(x) d`.
    pub fn projected_basis_at(&self, x: &Point) -> Matrix {
        let hx = h_at(&self.geom.center, x);
        let gx = g_at(&self.geom.center, x);
        let hm = Matrix::from_row_slice(2, 3, &[hx[0][0], hx[0][1], hx[0][2], hx[1][0], hx[1][1], hx[1][2]]);
        let gm = Matrix::from_row_slice(2, 3, &[gx[0][0], gx[0][1], gx[0][2], gx[1][0], gx[1][1], gx[1][2]]);
        hm * &self.b + gm * &self.r
    }

    /// `|E| Bᵀ D B`.
    pub fn consistency_stiffness(&self, d: &Mat3) -> Matrix {
        let dm = Matrix::from_iterator(3, 3, d.iter().copied());
        self.b.transpose() * dm * &self.b * self.geom.area
    }

    /// Diagonal of the stability scaling: `max(1, (|E| Bᵀ D_stab B)_ii)`.
    pub fn stability_scaling(&self, d_stab: &Mat3) -> Vector {
        let kc = self.consistency_stiffness(d_stab);
        Vector::from_fn(kc.nrows(), |i, _| kc[(i, i)].max(1.0))
    }

    /// `(I - P)ᵀ S (I - P)` with the D-recipe scaling of `d_stab`.
    pub fn stability_stiffness(&self, d_stab: &Mat3) -> Matrix {
        let s = self.stability_scaling(d_stab);
        let imp = self.i_minus_p();
        let mut sd = imp.clone();
        for (i, mut row) in sd.row_iter_mut().enumerate() {
            row *= s[i];
        }
        imp.transpose() * sd
    }

    pub fn stiffness(&self, d: &Mat3, d_stab: &Mat3) -> Matrix {
        self.consistency_stiffness(d) + self.stability_stiffness(d_stab)
    }

    /// `|E| N̄ᵀ b̂` with `N̄_a = I₂ / N`: each vertex receives `|E| b̂ / N`.
    pub fn body_force(&self, b: &Vec2) -> Vector {
        body_force(&self.geom, b)
    }

    /// `ρ (∫_E Wᵀ W dx + |E| (I - P)ᵀ (I - P))`.
    ///
    /// The integral is evaluated on the fan of triangles joining the vertex
    /// mean to each edge with a rule exact for quadratics.
    pub fn mass(&self, rho: f64) -> Result<Matrix> {
        let n2 = 2 * self.num_vertices();
        let mut m = Matrix::zeros(n2, n2);
        for tri in fan_triangles(&self.geom)? {
            let area = triangle_area(&tri);
            for (l, w) in triangle_degree2() {
                let x = Point::from(tri[0].coords * l[0] + tri[1].coords * l[1] + tri[2].coords * l[2]);
                let wx = self.projected_basis_at(&x);
                m += wx.transpose() * wx * (w * area);
            }
        }
        let imp = self.i_minus_p();
        m += imp.transpose() * imp * self.geom.area;
        Ok(m * rho)
    }
}

pub fn body_force(geom: &ElementGeometry, b: &Vec2) -> Vector {
    let n = geom.num_vertices();
    let share = geom.area / n as f64;
    Vector::from_fn(2 * n, |i, _| share * b[i % 2])
}

/// Consistent load of a uniform traction on one edge: each endpoint gets
/// `|e| t / 2`. Returned as `(f1_start, f2_start, f1_end, f2_end)`.
pub fn edge_traction(length: f64, t: &Vec2) -> [f64; 4] {
    let h = 0.5 * length;
    [h * t.x, h * t.y, h * t.x, h * t.y]
}

fn triangle_area(t: &[Point; 3]) -> f64 {
    let u = t[1] - t[0];
    let v = t[2] - t[0];
    0.5 * (u.x * v.y - u.y * v.x)
}

/// Triangles `(center, v_a, v_a+1)` covering the element. Fails when a
/// triangle has non-positive area, i.e. when the polygon is not star-shaped
/// with respect to its vertex mean.
pub fn fan_triangles(geom: &ElementGeometry) -> Result<Vec<[Point; 3]>> {
    let n = geom.num_vertices();
    let c = geom.center;
    let tris: Vec<[Point; 3]> = (0..n)
        .map(|a| [c, geom.vertices[a], geom.vertices[(a + 1) % n]])
        .collect();
    for (a, t) in tris.iter().enumerate() {
        // collinear vertices on a straight side give zero-area slivers only
        // when the center lies on that side, which a valid polygon excludes
        if triangle_area(t) <= 0.0 {
            return Err(Error::Geometry(format!(
                "polygon is not star-shaped with respect to its vertex mean (fan triangle {a} has area {:e}); split it with ear clipping first",
                triangle_area(t)
            )));
        }
    }
    Ok(tris)
}
