//! Turns a [`RunConfig`] into meshes, materials and problems.

use anyhow::{bail, Context, Result};

use nvem::benchmarks::{
    beam_meshes, colliding_flow_meshes, cook_meshes, cook_problem, plate_meshes, BenchmarkProblem, CantileverDynamics,
};
use nvem::material::{Material, PlaneCondition};
use nvem::mesh::{
    generate_structured, generate_voronoi, gunelve_cook_mesh, load_mesh_file, plate_with_hole_mesh, PlateCells,
    PolygonalMesh, StructuredKind, VoronoiSpec,
};
use nvem::problem::{fixed, Loads, NodeSet, Problem};
use nvem::{Point, Vec2};

use crate::config::{ConfigError, MeshKind, ProblemKind, RunConfig};

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub fn read_mesh(path: &std::path::Path) -> Result<PolygonalMesh> {
    if !path.exists() {
        return Err(config_error(format!("mesh file not found: {}", path.display())));
    }
    let (mesh, warnings) = load_mesh_file(path).with_context(|| format!("reading mesh file {}", path.display()))?;
    for w in warnings {
        log::warn!("{}: {w:?}", path.display());
    }
    Ok(mesh)
}

fn default_domain(problem: ProblemKind) -> [f64; 4] {
    match problem {
        ProblemKind::CollidingFlow => [0.0, 0.0, 2.0, 2.0],
        ProblemKind::Beam => [0.0, -2.0, 8.0, 2.0],
        ProblemKind::Cantilever => CantileverDynamics::standard().domain(),
        _ => [0.0, 0.0, 1.0, 1.0],
    }
}

fn default_kind(problem: ProblemKind) -> MeshKind {
    match problem {
        ProblemKind::PlateWithHole => MeshKind::Plate,
        ProblemKind::Cook => MeshKind::Cook,
        ProblemKind::CollidingFlow | ProblemKind::Beam | ProblemKind::Cantilever => MeshKind::Voronoi,
        _ => MeshKind::HexDominantPoly,
    }
}

/// Generates one mesh; `size` is the level parameter (divisions, sites or
/// cells per side depending on the kind).
fn generate(cfg: &RunConfig, size: Option<usize>) -> Result<PolygonalMesh> {
    let m = &cfg.mesh;
    let kind = m.kind.unwrap_or(default_kind(cfg.problem));
    let domain = m.domain.unwrap_or(default_domain(cfg.problem));
    let seed = m.seed.unwrap_or(1);
    let distortion = m.distortion.unwrap_or(0.0);
    let mesh = match kind {
        MeshKind::Quad | MeshKind::DistortedQuad | MeshKind::HexDominantPoly => {
            let sk = match kind {
                MeshKind::Quad => StructuredKind::Quad,
                MeshKind::DistortedQuad => StructuredKind::DistortedQuad,
                _ => StructuredKind::HexDominantPoly,
            };
            let (nx0, ny0) = (m.nx.unwrap_or(6), m.ny.unwrap_or(m.nx.unwrap_or(6)));
            let (nx, ny) = match size {
                Some(n) => (n, (n * ny0).div_ceil(nx0).max(1)),
                None => (nx0, ny0),
            };
            generate_structured(sk, nx, ny, domain, distortion, seed)?
        }
        MeshKind::Voronoi => {
            let sites = size.or(m.sites).unwrap_or(match cfg.problem {
                ProblemKind::Cantilever => 500,
                _ => 256,
            });
            let mut spec = VoronoiSpec::new(sites);
            spec.point_symmetric = cfg.problem == ProblemKind::CollidingFlow;
            if let Some(l) = m.lloyd {
                spec.lloyd = l;
            }
            generate_voronoi(&spec, domain, seed)?
        }
        MeshKind::Plate | MeshKind::PlateQuad => {
            let n = size.or(m.nx).unwrap_or(8);
            let nr = match (size, m.ny) {
                (None, Some(ny)) => ny,
                _ => n + 1,
            };
            let cells = if kind == MeshKind::Plate { PlateCells::HexDominant } else { PlateCells::Quad };
            plate_with_hole_mesh(cells, n, nr, m.grading.unwrap_or(1.5), distortion, seed)?
        }
        MeshKind::Cook => gunelve_cook_mesh(size.or(m.nx).unwrap_or(8))?,
    };
    Ok(mesh)
}

/// The single mesh for `run`, `eig`, `dynamics` and `mesh-gen`.
pub fn single_mesh(cfg: &RunConfig) -> Result<PolygonalMesh> {
    if let Some(f) = &cfg.mesh.file {
        return read_mesh(f);
    }
    generate(cfg, None)
}

fn uses_study_meshes(cfg: &RunConfig) -> bool {
    let m = &cfg.mesh;
    m.kind.is_none() && m.nx.is_none() && m.ny.is_none() && m.sites.is_none() && m.domain.is_none()
        && m.distortion.is_none() && m.grading.is_none() && m.lloyd.is_none()
}

/// The mesh sequence for `converge`: `files`, `levels`, or the built-in
/// study sequence of the problem.
pub fn mesh_sequence(cfg: &RunConfig) -> Result<Vec<PolygonalMesh>> {
    let m = &cfg.mesh;
    let meshes = if !m.files.is_empty() {
        m.files.iter().map(|f| read_mesh(f)).collect::<Result<Vec<_>>>()?
    } else if !m.levels.is_empty() {
        m.levels.iter().map(|&n| generate(cfg, Some(n))).collect::<Result<Vec<_>>>()?
    } else if uses_study_meshes(cfg) {
        let seed = m.seed.unwrap_or(7);
        match cfg.problem {
            ProblemKind::CollidingFlow => colliding_flow_meshes(seed)?,
            ProblemKind::Beam => beam_meshes(seed)?,
            ProblemKind::PlateWithHole => plate_meshes(0.0, seed)?,
            ProblemKind::Cook => cook_meshes()?,
            _ => [4, 8, 16, 32].into_iter().map(|n| generate(cfg, Some(n))).collect::<Result<Vec<_>>>()?,
        }
    } else {
        bail!(config_error("converge needs [mesh] files or levels"));
    };
    if meshes.len() < 3 {
        bail!(config_error(format!(
            "a convergence study needs at least 3 mesh levels, got {}",
            meshes.len()
        )));
    }
    Ok(meshes)
}

/// `[material]` applied over `default`.
fn material_over(cfg: &RunConfig, default: Material) -> Result<Material> {
    let s = &cfg.material;
    let m = match (s.lambda, s.mu) {
        (Some(l), Some(mu)) => {
            if s.young.is_some() || s.poisson.is_some() {
                bail!(config_error("give either young/poisson or lambda/mu, not both"));
            }
            let mut m = Material::from_lame(l, mu)?;
            if let Some(c) = s.condition {
                m = Material::new(m.young, m.poisson, c)?;
            }
            m
        }
        (None, None) => Material::new(
            s.young.unwrap_or(default.young),
            s.poisson.unwrap_or(default.poisson),
            s.condition.unwrap_or(default.condition),
        )?,
        _ => bail!(config_error("lambda and mu must be given together")),
    };
    Ok(m.with_density(s.density.unwrap_or(default.density)))
}

fn reject_material(cfg: &RunConfig) -> Result<()> {
    if cfg.material != Default::default() {
        bail!(config_error(format!(
            "problem {} has a fixed material; remove the [material] section",
            cfg.problem
        )));
    }
    Ok(())
}

/// Benchmark with an exact solution, for `run` and `converge`.
pub fn benchmark(cfg: &RunConfig) -> Result<Option<BenchmarkProblem>> {
    let m = &cfg.material;
    Ok(Some(match cfg.problem {
        ProblemKind::PatchTest => {
            reject_material(cfg)?;
            BenchmarkProblem::patch_test()?
        }
        ProblemKind::CollidingFlow => {
            reject_material(cfg)?;
            BenchmarkProblem::colliding_flow()?
        }
        ProblemKind::Beam => {
            if m.young.is_some() || m.condition.is_some() || m.lambda.is_some() || m.mu.is_some() || m.density.is_some() {
                bail!(config_error("the beam benchmark only takes `poisson` in [material]"));
            }
            BenchmarkProblem::beam(m.poisson.unwrap_or(0.3))?
        }
        ProblemKind::PlateWithHole => {
            let default = Material::plane_strain(1e3, 0.499999)?;
            BenchmarkProblem::plate_with_hole(material_over(cfg, default)?, cfg.kolosov)
        }
        _ => return Ok(None),
    }))
}

/// Problem for `run`: a benchmark, Cook's membrane or a custom set-up.
pub fn problem(cfg: &RunConfig, mesh: PolygonalMesh) -> Result<(Problem, Option<BenchmarkProblem>)> {
    if let Some(b) = benchmark(cfg)? {
        return Ok((b.problem(mesh), Some(b)));
    }
    match cfg.problem {
        ProblemKind::Cook => {
            reject_material(cfg)?;
            Ok((cook_problem(mesh)?, None))
        }
        ProblemKind::Custom => Ok((custom_problem(cfg, mesh)?, None)),
        other => bail!(config_error(format!("problem {other} is not a static problem; use `nvemkit dynamics`"))),
    }
}

fn check_tag(mesh: &PolygonalMesh, tag: &str) -> Result<()> {
    if !mesh.has_tag(tag) {
        bail!(config_error(format!(
            "mesh has no boundary tag `{tag}`; available tags: {}",
            mesh.tags().join(", ")
        )));
    }
    Ok(())
}

fn custom_problem(cfg: &RunConfig, mesh: PolygonalMesh) -> Result<Problem> {
    let s = &cfg.material;
    if s.young.is_none() && s.lambda.is_none() {
        bail!(config_error("problem = custom needs young/poisson or lambda/mu in [material]"));
    }
    let material = material_over(cfg, Material::plane_strain(1.0, 0.0)?)?;
    let bc = &cfg.bc;
    if bc.clamp.is_empty() && bc.fix_x.is_empty() && bc.fix_y.is_empty() {
        bail!(config_error("problem = custom needs at least one of clamp, fix_x, fix_y in [bc]"));
    }
    let mut p = Problem::new(mesh.clone(), material);
    for (tags, comps) in [(&bc.clamp, [true, true]), (&bc.fix_x, [true, false]), (&bc.fix_y, [false, true])] {
        for t in tags {
            check_tag(&mesh, t)?;
            p = p.with_dirichlet(fixed(NodeSet::Tag(t.clone()), comps));
        }
    }
    let mut loads = Loads::none();
    if let Some([bx, by]) = bc.body {
        loads = loads.with_constant_body(Vec2::new(bx, by));
    }
    for (tag, [tx, ty]) in &bc.tractions {
        check_tag(&mesh, tag)?;
        loads = loads.with_constant_traction(tag, Vec2::new(*tx, *ty));
    }
    if let Some([x, y, fx, fy]) = bc.point {
        loads = loads.with_point_load(mesh.nearest_node(Point::new(x, y)), Vec2::new(fx, fy));
    }
    Ok(p.with_loads(loads))
}

/// Cantilever set-up with `[material]` and `[dynamics]` overrides.
pub fn cantilever(cfg: &RunConfig) -> Result<CantileverDynamics> {
    let mut c = CantileverDynamics::standard();
    let d = &cfg.dynamics;
    let s = &cfg.material;
    if s.lambda.is_some() || s.mu.is_some() {
        bail!(config_error("the cantilever takes young, poisson and density, not lambda/mu"));
    }
    if s.condition.is_some_and(|c| c != PlaneCondition::Stress) {
        bail!(config_error("the cantilever is a plane stress problem"));
    }
    c.beam.young = s.young.unwrap_or(c.beam.young);
    c.beam.density = s.density.unwrap_or(c.beam.density);
    c.poisson = s.poisson.unwrap_or(c.poisson);
    c.beam.length = d.length.unwrap_or(c.beam.length);
    c.beam.depth = d.depth.unwrap_or(c.beam.depth);
    c.beam.thickness = d.thickness.unwrap_or(c.beam.thickness);
    c.alpha = d.alpha.unwrap_or(c.alpha);
    c.dt = d.dt.unwrap_or(c.dt);
    c.t_end = d.t_end.unwrap_or(c.t_end);
    c.q1 = d.q1.unwrap_or(c.q1);
    c.q2 = d.q2.unwrap_or(c.q2);
    c.tip_load = d.tip_load.unwrap_or(c.tip_load);
    c.gravity = d.gravity.unwrap_or(c.gravity);
    c.config()?;
    Ok(c)
}
