//! `report.json`: one versioned schema shared by every command.

use serde::Serialize;

use nvem::benchmarks::ErrorReport;
use nvem::material::Material;
use nvem::mesh::PolygonalMesh;

pub const SCHEMA: &str = "nvemkit-report";
pub const SCHEMA_VERSION: u32 = 1;
pub const LOCKING_SUSPECT: &str = "locking-suspect";

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub nodes: usize,
    pub elements: usize,
    pub dofs: usize,
    pub h: f64,
}

impl MeshSummary {
    pub fn of(mesh: &PolygonalMesh) -> Self {
        MeshSummary {
            nodes: mesh.num_nodes(),
            elements: mesh.num_elements(),
            dofs: mesh.num_dofs(),
            h: mesh.max_diameter(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaterialSummary {
    pub young: f64,
    pub poisson: f64,
    pub condition: String,
    pub lambda: f64,
    pub mu: f64,
    pub density: f64,
}

impl MaterialSummary {
    pub fn of(m: &Material) -> Self {
        MaterialSummary {
            young: m.young,
            poisson: m.poisson,
            condition: format!("{:?}", m.condition).to_lowercase(),
            lambda: m.lambda,
            mu: m.mu,
            density: m.density,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    pub l2_displacement: f64,
    pub h1_seminorm: f64,
    pub l2_pressure: f64,
}

impl From<&ErrorReport> for Norms {
    fn from(r: &ErrorReport) -> Self {
        Norms {
            l2_displacement: r.l2_displacement,
            h1_seminorm: r.h1_seminorm,
            l2_pressure: r.l2_pressure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: u32,
    pub command: String,
    pub problem: String,
    pub method: String,
    pub stab: String,
    pub mesh: Option<MeshSummary>,
    pub material: Option<MaterialSummary>,
    pub errors: Option<Norms>,
    pub flags: Vec<String>,
    /// Wall-clock seconds per phase.
    pub timings: Vec<Timing>,
    /// Command-specific results.
    pub results: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, problem: &str, method: &str, stab: &str) -> Self {
        Report {
            schema: SCHEMA,
            version: SCHEMA_VERSION,
            command: command.into(),
            problem: problem.into(),
            method: method.into(),
            stab: stab.into(),
            mesh: None,
            material: None,
            errors: None,
            flags: Vec::new(),
            timings: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    pub fn time(&mut self, phase: &str, start: std::time::Instant) {
        self.timings.push(Timing {
            phase: phase.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// VEM on a nearly incompressible material is prone to volumetric locking.
pub fn locking_suspect(method: nvem::problem::Method, material: &Material) -> bool {
    method == nvem::problem::Method::Vem && material.poisson > 0.49
}
