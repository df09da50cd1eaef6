//! Isotropic linear-elastic materials.
//!
//! Constitutive matrices act on Voigt strains `(e11, e22, 2 e12)`.

use std::str::FromStr;

use crate::{Error, Mat3, Result};

/// Cap on the first Lamé parameter of the stabilisation matrix, in units of μ.
pub const LAMBDA_CAP: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneCondition {
    Strain,
    Stress,
    /// `[[λ+2μ, λ, 0], [λ, λ+2μ, 0], [0, 0, μ]]` built directly from λ, μ.
    LameDirect,
}

impl FromStr for PlaneCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strain" | "plane-strain" => Ok(PlaneCondition::Strain),
            "stress" | "plane-stress" => Ok(PlaneCondition::Stress),
            "lame-direct" | "lame" => Ok(PlaneCondition::LameDirect),
            other => Err(Error::Argument(format!(
                "unknown plane condition `{other}` (expected strain, stress or lame-direct)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmuVariant {
    /// `diag(2μ, 2μ, μ)`
    Full,
    /// `diag(0, 0, μ)`
    ShearOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub condition: PlaneCondition,
    pub lambda: f64,
    pub mu: f64,
    pub density: f64,
}

fn check_poisson(young: f64, nu: f64) -> Result<()> {
    if !(young > 0.0) {
        return Err(Error::Material(format!("Young's modulus must be positive, got {young}")));
    }
    if nu == 0.5 {
        return Err(Error::Material(
            "Poisson's ratio 0.5 makes the plane-strain matrix singular".into(),
        ));
    }
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::Material(format!("Poisson's ratio must lie in (-1, 0.5), got {nu}")));
    }
    Ok(())
}

/// `(λ, μ)` from `(E, ν)`.
pub fn lame_from_young(young: f64, nu: f64) -> (f64, f64) {
    let mu = young / (2.0 * (1.0 + nu));
    let lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    (lambda, mu)
}

/// `(E, ν)` from `(λ, μ)`.
pub fn young_from_lame(lambda: f64, mu: f64) -> (f64, f64) {
    let young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    let nu = lambda / (2.0 * (lambda + mu));
    (young, nu)
}

fn plane_strain(young: f64, nu: f64) -> Mat3 {
    let c = young / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Mat3::new(
        c * (1.0 - nu),
        c * nu,
        0.0,
        c * nu,
        c * (1.0 - nu),
        0.0,
        0.0,
        0.0,
        c * (1.0 - 2.0 * nu) / 2.0,
    )
}

fn plane_stress(young: f64, nu: f64) -> Mat3 {
    let c = young / (1.0 - nu * nu);
    Mat3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0)
}

fn lame_matrix(lambda: f64, mu: f64) -> Mat3 {
    Mat3::new(
        lambda + 2.0 * mu,
        lambda,
        0.0,
        lambda,
        lambda + 2.0 * mu,
        0.0,
        0.0,
        0.0,
        mu,
    )
}

impl Material {
    pub fn new(young: f64, poisson: f64, condition: PlaneCondition) -> Result<Self> {
        if condition == PlaneCondition::LameDirect {
            let (lambda, mu) = lame_from_young(young, poisson);
            check_poisson(young, poisson)?;
            return Self::from_lame(lambda, mu);
        }
        check_poisson(young, poisson)?;
        let (lambda, mu) = lame_from_young(young, poisson);
        Ok(Material {
            young,
            poisson,
            condition,
            lambda,
            mu,
            density: 0.0,
        })
    }

    pub fn plane_strain(young: f64, poisson: f64) -> Result<Self> {
        Self::new(young, poisson, PlaneCondition::Strain)
    }

    pub fn plane_stress(young: f64, poisson: f64) -> Result<Self> {
        Self::new(young, poisson, PlaneCondition::Stress)
    }

    /// Material given directly by its Lamé parameters.
    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda + mu > 0.0) {
            return Err(Error::Material(format!(
                "Lamé parameters out of range: lambda = {lambda}, mu = {mu}"
            )));
        }
        let (young, poisson) = young_from_lame(lambda, mu);
        Ok(Material {
            young,
            poisson,
            condition: PlaneCondition::LameDirect,
            lambda,
            mu,
            density: 0.0,
        })
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    /// λ seen by in-plane strains: `2λμ/(λ+2μ)` in plane stress, λ otherwise.
    pub fn effective_lambda(&self) -> f64 {
        match self.condition {
            PlaneCondition::Stress => 2.0 * self.lambda * self.mu / (self.lambda + 2.0 * self.mu),
            _ => self.lambda,
        }
    }

    pub fn constitutive(&self) -> Mat3 {
        match self.condition {
            PlaneCondition::Strain => plane_strain(self.young, self.poisson),
            PlaneCondition::Stress => plane_stress(self.young, self.poisson),
            PlaneCondition::LameDirect => lame_matrix(self.lambda, self.mu),
        }
    }

    /// Constitutive matrix with the first Lamé parameter capped at 25μ.
    ///
    /// The capped pair `(λ̃, μ)` is converted back to `(Ẽ, ν̃)` and the matrix
    /// of the material's own plane condition is evaluated with it. In plane
    /// stress the cap is applied to the effective λ, which never exceeds 2μ,
    /// so the result is always the unmodified matrix.
    pub fn dtilde(&self) -> Mat3 {
        let lambda = self.effective_lambda();
        if lambda <= LAMBDA_CAP * self.mu {
            return self.constitutive();
        }
        let (lt, mt) = (LAMBDA_CAP * self.mu, self.mu);
        match self.condition {
            PlaneCondition::LameDirect => lame_matrix(lt, mt),
            _ => {
                let (e, nu) = modified_young_poisson(lt, mt);
                plane_strain(e, nu)
            }
        }
    }

    pub fn dmu(&self, variant: DmuVariant) -> Mat3 {
        let mu = self.mu;
        match variant {
            DmuVariant::Full => Mat3::from_diagonal(&nalgebra::Vector3::new(2.0 * mu, 2.0 * mu, mu)),
            DmuVariant::ShearOnly => Mat3::from_diagonal(&nalgebra::Vector3::new(0.0, 0.0, mu)),
        }
    }

    /// Out-of-plane stress for an in-plane strain (plane strain only).
    pub fn sigma33(&self, strain: &crate::Voigt) -> f64 {
        match self.condition {
            PlaneCondition::Stress => 0.0,
            _ => self.lambda * (strain[0] + strain[1]),
        }
    }

    /// von Mises stress including the out-of-plane normal stress.
    pub fn von_mises(&self, strain: &crate::Voigt, stress: &crate::Voigt) -> f64 {
        let (s11, s22, s12) = (stress[0], stress[1], stress[2]);
        let s33 = self.sigma33(strain);
        (0.5 * ((s11 - s22).powi(2) + (s22 - s33).powi(2) + (s33 - s11).powi(2))
            + 3.0 * s12 * s12)
            .sqrt()
    }

    /// `-λ (e11 + e22)`, the pressure used by the error norms.
    pub fn pressure(&self, strain: &crate::Voigt) -> f64 {
        -self.lambda * (strain[0] + strain[1])
    }
}

/// `(Ẽ, ν̃)` of a modified Lamé pair, with Ẽ = μ̃(3λ̃+2μ̃)/(λ̃+μ̃).
pub fn modified_young_poisson(lambda: f64, mu: f64) -> (f64, f64) {
    young_from_lame(lambda, mu)
}
