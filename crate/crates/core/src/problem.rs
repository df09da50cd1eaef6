//! Boundary-value problem data: method selection, essential and natural
//! boundary conditions, body forces and point loads.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::material::{DmuVariant, Material};
use crate::mesh::PolygonalMesh;
use crate::{Error, Mat3, Point, Result, Vec2};

/// A vector field of position.
pub type VectorField = Arc<dyn Fn(&Point) -> Vec2 + Send + Sync>;
/// A traction as a function of position and unit outward normal.
pub type TractionField = Arc<dyn Fn(&Point, &Vec2) -> Vec2 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Element-based virtual element method.
    Vem,
    /// Node-based uniform strain virtual element method.
    Nvem,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vem" => Ok(Method::Vem),
            "nvem" => Ok(Method::Nvem),
            other => Err(Error::Argument(format!(
                "unknown method `{other}` (expected vem or nvem)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Vem => "vem",
            Method::Nvem => "nvem",
        })
    }
}

/// Which constitutive matrix drives the D-recipe stability scaling.
///
/// `Plain` means the unmodified matrix for VEM and no stability term at all
/// for NVEM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    Plain,
    DTilde,
    DMuFull,
    DMuShear,
}

impl Stabilization {
    /// Matrix used in the stability scaling, `None` for unstabilized NVEM.
    pub fn matrix(&self, material: &Material, method: Method) -> Option<Mat3> {
        match (self, method) {
            (Stabilization::Plain, Method::Nvem) => None,
            (Stabilization::Plain, Method::Vem) => Some(material.constitutive()),
            (Stabilization::DTilde, _) => Some(material.dtilde()),
            (Stabilization::DMuFull, _) => Some(material.dmu(DmuVariant::Full)),
            (Stabilization::DMuShear, _) => Some(material.dmu(DmuVariant::ShearOnly)),
        }
    }
}

impl FromStr for Stabilization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Stabilization::Plain),
            "dtilde" => Ok(Stabilization::DTilde),
            "dmu-full" | "dmu" => Ok(Stabilization::DMuFull),
            "dmu-shear" => Ok(Stabilization::DMuShear),
            other => Err(Error::Argument(format!(
                "unknown stabilization `{other}` (expected plain, dtilde, dmu-full or dmu-shear)"
            ))),
        }
    }
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stabilization::Plain => "plain",
            Stabilization::DTilde => "dtilde",
            Stabilization::DMuFull => "dmu-full",
            Stabilization::DMuShear => "dmu-shear",
        })
    }
}

/// Nodes a boundary condition applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeSet {
    /// Nodes on edges with this tag.
    Tag(String),
    /// Every node on a free edge of the mesh.
    AllBoundary,
    Nodes(Vec<usize>),
}

impl NodeSet {
    pub fn resolve(&self, mesh: &PolygonalMesh) -> Result<Vec<usize>> {
        match self {
            NodeSet::Tag(t) => mesh.tagged_nodes(t),
            NodeSet::AllBoundary => Ok(mesh.boundary_nodes()),
            NodeSet::Nodes(n) => {
                if let Some(&bad) = n.iter().find(|&&i| i >= mesh.num_nodes()) {
                    return Err(Error::Argument(format!("node {bad} out of range")));
                }
                Ok(n.clone())
            }
        }
    }
}

#[derive(Clone)]
pub struct Dirichlet {
    pub nodes: NodeSet,
    /// Which displacement components are prescribed.
    pub components: [bool; 2],
    pub value: VectorField,
}

impl fmt::Debug for Dirichlet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dirichlet")
            .field("nodes", &self.nodes)
            .field("components", &self.components)
            .finish()
    }
}

#[derive(Clone)]
pub struct Traction {
    pub tag: String,
    pub value: TractionField,
}

impl fmt::Debug for Traction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Traction").field("tag", &self.tag).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub node: usize,
    pub force: Vec2,
}

/// External loads. Any of them may be empty.
#[derive(Clone, Default)]
pub struct Loads {
    pub body: Option<VectorField>,
    pub tractions: Vec<Traction>,
    pub point_loads: Vec<PointLoad>,
}

impl fmt::Debug for Loads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loads")
            .field("body", &self.body.is_some())
            .field("tractions", &self.tractions)
            .field("point_loads", &self.point_loads)
            .finish()
    }
}

impl Loads {
    pub fn none() -> Self {
        Loads::default()
    }

    pub fn with_body(mut self, b: VectorField) -> Self {
        self.body = Some(b);
        self
    }

    pub fn with_constant_body(self, b: Vec2) -> Self {
        self.with_body(Arc::new(move |_| b))
    }

    pub fn with_traction(mut self, tag: &str, value: TractionField) -> Self {
        self.tractions.push(Traction {
            tag: tag.to_string(),
            value,
        });
        self
    }

    pub fn with_constant_traction(self, tag: &str, t: Vec2) -> Self {
        self.with_traction(tag, Arc::new(move |_, _| t))
    }

    pub fn with_point_load(mut self, node: usize, force: Vec2) -> Self {
        self.point_loads.push(PointLoad { node, force });
        self
    }
}

/// Traction field given by a stress field: `t = σ n`.
pub fn traction_from_stress(
    stress: impl Fn(&Point) -> crate::Voigt + Send + Sync + 'static,
) -> TractionField {
    Arc::new(move |x, n| {
        let s = stress(x);
        Vec2::new(s[0] * n.x + s[2] * n.y, s[2] * n.x + s[1] * n.y)
    })
}

pub fn dirichlet(nodes: NodeSet, components: [bool; 2], value: VectorField) -> Dirichlet {
    Dirichlet {
        nodes,
        components,
        value,
    }
}

/// Homogeneous condition on the selected components.
pub fn fixed(nodes: NodeSet, components: [bool; 2]) -> Dirichlet {
    dirichlet(nodes, components, Arc::new(|_| Vec2::zeros()))
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub mesh: PolygonalMesh,
    pub material: Material,
    pub dirichlet: Vec<Dirichlet>,
    pub loads: Loads,
}

impl Problem {
    pub fn new(mesh: PolygonalMesh, material: Material) -> Self {
        Problem {
            mesh,
            material,
            dirichlet: Vec::new(),
            loads: Loads::none(),
        }
    }

    pub fn with_dirichlet(mut self, bc: Dirichlet) -> Self {
        self.dirichlet.push(bc);
        self
    }

    pub fn with_loads(mut self, loads: Loads) -> Self {
        self.loads = loads;
        self
    }

    /// Prescribed `(dof, value)` pairs, sorted by dof. A dof named by several
    /// conditions takes the value of the last one.
    pub fn constraints(&self) -> Result<Vec<(usize, f64)>> {
        let mut map = std::collections::BTreeMap::new();
        for bc in &self.dirichlet {
            for n in bc.nodes.resolve(&self.mesh)? {
                let u = (bc.value)(&self.mesh.nodes[n]);
                for c in 0..2 {
                    if bc.components[c] {
                        map.insert(2 * n + c, u[c]);
                    }
                }
            }
        }
        Ok(map.into_iter().collect())
    }
}
