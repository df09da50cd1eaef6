//! Relative error norms.
//!
//! NVEM errors are nodal sums weighted by the nodal areas. VEM errors are
//! integrated element by element on the fan triangulation with a degree-4
//! rule, comparing against the projected displacement `W(x) d_E` and the
//! element-average strain.

use crate::assembly::{element_displacements, Discretization};
use crate::element::fan_triangles;
use crate::material::Material;
use crate::problem::Method;
use crate::quadrature::triangle_degree4;
use crate::{Error, Point, Result, Vector, Voigt};

use super::exact::ExactSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_displacement: f64,
    pub h1_seminorm: f64,
    pub l2_pressure: f64,
    pub dofs: usize,
    /// Largest element diameter.
    pub h: f64,
}

#[derive(Default)]
struct Sums {
    eu: f64,
    u: f64,
    ee: f64,
    e: f64,
    ep: f64,
    p: f64,
}

impl Sums {
    fn add(&mut self, w: f64, d: &crate::Mat3, exact: (crate::Vec2, Voigt, f64), approx: (crate::Vec2, Voigt, f64)) {
        let (u, eps, p) = exact;
        let (uh, eh, ph) = approx;
        let de = eps - eh;
        self.eu += (u - uh).norm_squared() * w;
        self.u += u.norm_squared() * w;
        self.ee += de.dot(&(d * de)) * w;
        self.e += eps.dot(&(d * eps)) * w;
        self.ep += (p - ph).powi(2) * w;
        self.p += p * p * w;
    }

    fn ratio(num: f64, den: f64) -> f64 {
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    }
}

/// Relative L2 displacement, energy-weighted H1 and L2 pressure errors of
/// the discrete solution `u`.
///
/// The exact pressure is required; a solution without one gives
/// [`Error::UnsupportedNorm`].
pub fn error_norms(
    disc: &Discretization,
    material: &Material,
    u: &Vector,
    exact: &ExactSolution,
    method: Method,
) -> Result<ErrorReport> {
    let pressure = exact
        .pressure
        .as_ref()
        .ok_or_else(|| Error::UnsupportedNorm("exact solution has no pressure field".into()))?;
    if u.len() != disc.num_dofs() {
        return Err(Error::Argument(format!(
            "solution has {} entries, mesh has {} dofs",
            u.len(),
            disc.num_dofs()
        )));
    }
    let d = material.constitutive();
    let mut s = Sums::default();
    let exact_at = |x: &Point| ((exact.displacement)(x), (exact.strain)(x), pressure(x));
    match method {
        Method::Nvem => {
            for (ops, patch) in disc.nodal_operators()?.iter().zip(&disc.patches) {
                let x = disc.mesh.nodes[patch.node];
                let n = patch.node;
                let eh = ops.strain(u);
                let uh = crate::Vec2::new(u[2 * n], u[2 * n + 1]);
                s.add(patch.area, &d, exact_at(&x), (uh, eh, material.pressure(&eh)));
            }
        }
        Method::Vem => {
            let rule = triangle_degree4();
            for (e, ops) in disc.elements.iter().enumerate() {
                let de = element_displacements(disc, e, u);
                let bd = &ops.b * &de;
                let eh = Voigt::new(bd[0], bd[1], bd[2]);
                let ph = material.pressure(&eh);
                for tri in fan_triangles(&ops.geom)? {
                    let area = 0.5
                        * ((tri[1] - tri[0]).x * (tri[2] - tri[0]).y
                            - (tri[1] - tri[0]).y * (tri[2] - tri[0]).x);
                    for (l, w) in rule {
                        let x = Point::from(tri[0].coords * l[0] + tri[1].coords * l[1] + tri[2].coords * l[2]);
                        let wu = ops.projected_basis_at(&x) * &de;
                        let uh = crate::Vec2::new(wu[0], wu[1]);
                        s.add(w * area, &d, exact_at(&x), (uh, eh, ph));
                    }
                }
            }
        }
    }
    Ok(ErrorReport {
        l2_displacement: Sums::ratio(s.eu, s.u),
        h1_seminorm: Sums::ratio(s.ee, s.e),
        l2_pressure: Sums::ratio(s.ep, s.p),
        dofs: disc.num_dofs(),
        h: disc.mesh.max_diameter(),
    })
}

/// Nodal interpolant of a displacement field.
pub fn interpolate(disc: &Discretization, field: &crate::problem::VectorField) -> Vector {
    let mut u = Vector::zeros(disc.num_dofs());
    for (i, x) in disc.mesh.nodes.iter().enumerate() {
        let v = field(x);
        u[2 * i] = v.x;
        u[2 * i + 1] = v.y;
    }
    u
}
