//! Closed-form reference solutions.
//!
//! Strains use engineering shear `(e11, e22, 2 e12)`; stresses are
//! `(s11, s22, s12)`.

use std::sync::Arc;

use crate::material::{Material, PlaneCondition};
use crate::{Error, Point, Result, Vec2, Voigt};

pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VoigtField = Arc<dyn Fn(&Point) -> Voigt + Send + Sync>;

/// Displacement, strain and stress of a reference solution, plus the
/// pressure used by the error norms.
#[derive(Clone)]
pub struct ExactSolution {
    pub displacement: crate::problem::VectorField,
    pub strain: VoigtField,
    pub stress: VoigtField,
    pub pressure: Option<ScalarField>,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactSolution")
    }
}

impl ExactSolution {
    /// Builds the stress from `strain` with `material` and the pressure as
    /// `-λ (e11 + e22)`.
    pub fn from_strain(
        material: &Material,
        displacement: crate::problem::VectorField,
        strain: VoigtField,
    ) -> Self {
        let d = material.constitutive();
        let s = strain.clone();
        let m = *material;
        let s2 = strain.clone();
        ExactSolution {
            displacement,
            strain,
            stress: Arc::new(move |x| d * s(x)),
            pressure: Some(Arc::new(move |x| m.pressure(&s2(x)))),
        }
    }

    /// Linear field `u = (x1, x1 + x2)` used by the displacement patch test.
    pub fn patch_test(material: &Material) -> Self {
        Self::from_strain(
            material,
            Arc::new(|x| Vec2::new(x.x, x.x + x.y)),
            Arc::new(|_| Voigt::new(1.0, 1.0, 1.0)),
        )
    }
}

/// Lamé parameters of the colliding-flow problem.
pub const COLLIDING_LAMBDA: f64 = 5e7;
pub const COLLIDING_MU: f64 = 1.0;

/// Colliding flow on `(0, 2)²`: `(u, p)` at `x`.
pub fn colliding_flow_exact(x: &Point) -> (Vec2, f64) {
    let (a, b) = (x.x - 1.0, x.y - 1.0);
    let u = Vec2::new(20.0 * a * b.powi(3), 5.0 * a.powi(4) - 5.0 * b.powi(4));
    let p = 60.0 * a * a * b - 20.0 * b.powi(3);
    (u, p)
}

/// Colliding flow strain (divergence free).
pub fn colliding_flow_strain(x: &Point) -> Voigt {
    let (a, b) = (x.x - 1.0, x.y - 1.0);
    Voigt::new(20.0 * b.powi(3), -20.0 * b.powi(3), 60.0 * a * b * b + 20.0 * a.powi(3))
}

/// Colliding flow as an [`ExactSolution`]. The stress is the Stokes stress
/// `-p I + 2μ ε` and the pressure is the prescribed one.
pub fn colliding_flow() -> ExactSolution {
    ExactSolution {
        displacement: Arc::new(|x| colliding_flow_exact(x).0),
        strain: Arc::new(colliding_flow_strain),
        stress: Arc::new(|x| {
            let e = colliding_flow_strain(x);
            let p = colliding_flow_exact(x).1;
            Voigt::new(2.0 * COLLIDING_MU * e[0] - p, 2.0 * COLLIDING_MU * e[1] - p, COLLIDING_MU * e[2])
        }),
        pressure: Some(Arc::new(|x| colliding_flow_exact(x).1)),
    }
}

/// Cantilever under a parabolic end shear (plane strain constants).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub load: f64,
    pub length: f64,
    pub depth: f64,
    pub young: f64,
    pub poisson: f64,
}

impl Beam {
    /// `P = -1000`, `L = 8`, `D = 4` with the given material constants.
    pub fn standard(young: f64, poisson: f64) -> Self {
        Beam {
            load: -1000.0,
            length: 8.0,
            depth: 4.0,
            young,
            poisson,
        }
    }

    fn constants(&self) -> (f64, f64, f64) {
        let e_bar = self.young / (1.0 - self.poisson * self.poisson);
        let nu_bar = self.poisson / (1.0 - self.poisson);
        let inertia = self.depth.powi(3) / 12.0;
        (e_bar, nu_bar, inertia)
    }

    pub fn displacement(&self, x: &Point) -> Vec2 {
        let (e, nu, i) = self.constants();
        let (p, l, d) = (self.load, self.length, self.depth);
        let (x1, x2) = (x.x, x.y);
        let u1 = -p * x2 / (6.0 * e * i)
            * ((6.0 * l - 3.0 * x1) * x1 + (2.0 + nu) * x2 * x2 - 1.5 * d * d * (1.0 + nu));
        let u2 = p / (6.0 * e * i) * (3.0 * nu * x2 * x2 * (l - x1) + (3.0 * l - x1) * x1 * x1);
        Vec2::new(u1, u2)
    }

    pub fn strain(&self, x: &Point) -> Voigt {
        let (e, nu, i) = self.constants();
        let (p, l, d) = (self.load, self.length, self.depth);
        let (x1, x2) = (x.x, x.y);
        let e11 = -p * x2 * (l - x1) / (e * i);
        Voigt::new(
            e11,
            -nu * e11,
            p * (1.0 + nu) / (e * i) * (0.25 * d * d - x2 * x2),
        )
    }

    pub fn material(&self) -> Result<Material> {
        Material::plane_strain(self.young, self.poisson)
    }

    pub fn solution(&self) -> Result<ExactSolution> {
        let m = self.material()?;
        let (a, b) = (*self, *self);
        Ok(ExactSolution::from_strain(
            &m,
            Arc::new(move |x| a.displacement(x)),
            Arc::new(move |x| b.strain(x)),
        ))
    }
}

/// Which Kolosov constant the plate displacement uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kolosov {
    /// `(3 - ν) / (1 + ν)` regardless of the plane condition.
    PlaneStressForm,
    /// `(3 - ν) / (1 + ν)` in plane stress, `3 - 4ν` in plane strain.
    MatchCondition,
}

/// Infinite plate with a circular hole under remote tension `T` along x1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateWithHole {
    pub traction: f64,
    pub radius: f64,
    pub material: Material,
    pub kolosov: Kolosov,
}

impl PlateWithHole {
    /// `T = 100`, `r0 = 1`.
    pub fn standard(material: Material, kolosov: Kolosov) -> Self {
        PlateWithHole {
            traction: 100.0,
            radius: 1.0,
            material,
            kolosov,
        }
    }

    pub fn kappa(&self) -> f64 {
        let nu = self.material.poisson;
        match (self.kolosov, self.material.condition) {
            (Kolosov::MatchCondition, PlaneCondition::Strain) => 3.0 - 4.0 * nu,
            _ => (3.0 - nu) / (1.0 + nu),
        }
    }

    fn polar(&self, x: &Point) -> Result<(f64, f64)> {
        let r = x.coords.norm();
        if r < self.radius * (1.0 - 1e-12) {
            return Err(Error::Argument(format!(
                "point ({}, {}) lies inside the hole",
                x.x, x.y
            )));
        }
        Ok((r, x.y.atan2(x.x)))
    }

    /// Displacement with the `(1 - κ) sin θ` term in `u2`, the sign that makes
    /// it compatible with [`stress`](Self::stress).
    pub fn displacement(&self, x: &Point) -> Result<Vec2> {
        let (r, th) = self.polar(x)?;
        let (t, r0, k) = (self.traction, self.radius, self.kappa());
        let g = self.material.mu;
        let c = t / (4.0 * g);
        let u1 = c
            * (0.5 * (k + 1.0) * r * th.cos()
                + r0 * r0 / r * ((k + 1.0) * th.cos() + (3.0 * th).cos())
                - r0.powi(4) / r.powi(3) * (3.0 * th).cos());
        let u2 = c
            * (0.5 * (k - 3.0) * r * th.sin()
                + r0 * r0 / r * ((1.0 - k) * th.sin() + (3.0 * th).sin())
                - r0.powi(4) / r.powi(3) * (3.0 * th).sin());
        Ok(Vec2::new(u1, u2))
    }

    pub fn stress(&self, x: &Point) -> Result<Voigt> {
        let (r, th) = self.polar(x)?;
        let (t, r0) = (self.traction, self.radius);
        let a = r0 * r0 / (r * r);
        let b = 1.5 * r0.powi(4) / r.powi(4);
        let (c2, c4, s2, s4) = ((2.0 * th).cos(), (4.0 * th).cos(), (2.0 * th).sin(), (4.0 * th).sin());
        Ok(Voigt::new(
            t * (1.0 - a * (1.5 * c2 + c4) + b * c4),
            -t * (a * (0.5 * c2 - c4) + b * c4),
            -t * (a * (0.5 * s2 + s4) - b * s4),
        ))
    }

    /// Strain from the stress through the material compliance.
    pub fn strain(&self, x: &Point) -> Result<Voigt> {
        let c = self
            .material
            .constitutive()
            .try_inverse()
            .ok_or_else(|| Error::Material("singular constitutive matrix".into()))?;
        Ok(c * self.stress(x)?)
    }

    /// Fields as closures; points inside the hole evaluate at their radial
    /// projection onto the rim.
    pub fn solution(&self) -> ExactSolution {
        let s = *self;
        let clamp = move |x: &Point| {
            let r = x.coords.norm();
            if r < s.radius {
                Point::from(x.coords * (s.radius / r))
            } else {
                *x
            }
        };
        let (a, b) = (s, s);
        ExactSolution::from_strain(
            &self.material,
            Arc::new(move |x| a.displacement(&clamp(x)).expect("clamped point")),
            Arc::new(move |x| b.strain(&clamp(x)).expect("clamped point")),
        )
    }
}
