//! Elastodynamic cantilever: tip point load plus gravity, Rayleigh damping.
//!
//! Units are N, mm, s and t. The 2D operators are per unit thickness and
//! are scaled by the beam thickness; the tip load is a total force.

use crate::assembly::{assemble_loads, assemble_mass, assemble_stiffness, rayleigh_damping, Discretization};
use crate::dynamics::{CantileverBeam, DynamicSystem, DynamicsConfig, LoadHistory, Schedule};
use crate::material::Material;
use crate::mesh::{generate_voronoi, PolygonalMesh, VoronoiSpec};
use crate::problem::{fixed, Loads, Method, NodeSet, Problem, Stabilization};
use crate::{Point, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverDynamics {
    pub beam: CantileverBeam,
    pub poisson: f64,
    pub gravity: f64,
    pub tip_load: f64,
    pub q1: f64,
    pub q2: f64,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
}

/// An assembled run: system, loads and the loaded tip node.
#[derive(Debug, Clone)]
pub struct CantileverRun {
    pub system: DynamicSystem,
    pub loads: LoadHistory,
    pub tip: usize,
    pub mesh: PolygonalMesh,
}

impl CantileverDynamics {
    /// Plane stress steel beam, `P = -10000`, `g = 9800`, `q1 = 0.025`,
    /// `q2 = 0.001`, `α = -0.1`, `dt = 0.001` on `[0, 1.6]`.
    pub fn standard() -> Self {
        CantileverDynamics {
            beam: CantileverBeam::standard(),
            poisson: 0.3,
            gravity: 9800.0,
            tip_load: -10000.0,
            q1: 0.025,
            q2: 0.001,
            alpha: -0.1,
            dt: 0.001,
            t_end: 1.6,
        }
    }

    pub fn material(&self) -> Result<Material> {
        Ok(Material::plane_stress(self.beam.young, self.poisson)?.with_density(self.beam.density))
    }

    /// `[0, L] × [-D/2, D/2]`.
    pub fn domain(&self) -> [f64; 4] {
        let h = 0.5 * self.beam.depth;
        [0.0, -h, self.beam.length, h]
    }

    /// Loaded point: the top corner of the free end.
    pub fn tip_point(&self) -> Point {
        Point::new(self.beam.length, 0.5 * self.beam.depth)
    }

    pub fn config(&self) -> Result<DynamicsConfig> {
        DynamicsConfig::new(self.alpha, self.dt, self.t_end)
    }

    /// Voronoi mesh of the beam with `cells` polygons.
    pub fn mesh(&self, cells: usize, seed: u64) -> Result<PolygonalMesh> {
        generate_voronoi(&VoronoiSpec::new(cells), self.domain(), seed)
    }

    /// Assembles `M`, `C = q1 M + q2 K`, `K` and the load history. The left
    /// end is clamped.
    pub fn assemble(&self, mesh: PolygonalMesh, method: Method, stab: Stabilization, schedule: Schedule) -> Result<CantileverRun> {
        let material = self.material()?;
        let t = self.beam.thickness;
        let tip = mesh.nearest_node(self.tip_point());
        let problem = Problem::new(mesh.clone(), material).with_dirichlet(fixed(NodeSet::Tag("left".into()), [true, true]));
        let disc = Discretization::new(mesh.clone());
        let k = assemble_stiffness(&disc, method, &material, stab)?.scaled(t);
        let m = assemble_mass(&disc, method, material.density)?.scaled(t);
        let c = rayleigh_damping(&m, &k, self.q1, self.q2)?;
        let weight = Loads::none().with_constant_body(Vec2::new(0.0, -material.density * self.gravity));
        let gravity = assemble_loads(&disc, method, &weight)? * t;
        let point = Loads::none().with_point_load(tip, Vec2::new(0.0, self.tip_load));
        let spatial = assemble_loads(&disc, method, &point)?;
        Ok(CantileverRun {
            system: DynamicSystem {
                m,
                c,
                k,
                constraints: problem.constraints()?,
            },
            loads: LoadHistory::new(spatial, schedule).with_constant(gravity),
            tip,
            mesh,
        })
    }
}
