//! Benchmark problem set-ups and the drivers built on them: patch test,
//! stiffness spectrum, convergence studies and the Cook membrane study.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::{assemble_stiffness, solve_problem, Discretization};
use crate::material::Material;
use crate::mesh::{
    generate_voronoi, gunelve_cook_mesh, plate_with_hole_mesh, PlateCells, PolygonalMesh, VoronoiSpec,
};
use crate::problem::{
    dirichlet, fixed, traction_from_stress, Loads, Method, NodeSet, Problem, Stabilization,
};
use crate::{Error, Point, Result, Vec2};

use super::exact::{colliding_flow, Beam, ExactSolution, Kolosov, PlateWithHole, COLLIDING_LAMBDA, COLLIDING_MU};
use super::norms::{error_norms, ErrorReport};

type Setup = Arc<dyn Fn(PolygonalMesh) -> Problem + Send + Sync>;

/// A boundary-value problem with a known solution, independent of the mesh.
#[derive(Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    pub material: Material,
    pub exact: ExactSolution,
    setup: Setup,
}

impl std::fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("material", &self.material)
            .finish()
    }
}

impl BenchmarkProblem {
    /// The boundary-value problem on `mesh`.
    pub fn problem(&self, mesh: PolygonalMesh) -> Problem {
        (self.setup)(mesh)
    }

    /// Linear field `(x1, x1 + x2)` imposed on the whole boundary,
    /// `E = 1e7`, `ν = 0.3`, plane strain, no body force.
    pub fn patch_test() -> Result<Self> {
        let material = Material::plane_strain(1e7, 0.3)?;
        let exact = ExactSolution::patch_test(&material);
        let u = exact.displacement.clone();
        Ok(BenchmarkProblem {
            name: "patch-test".into(),
            material,
            exact,
            setup: Arc::new(move |mesh| {
                Problem::new(mesh, material).with_dirichlet(dirichlet(NodeSet::AllBoundary, [true, true], u.clone()))
            }),
        })
    }

    /// Colliding flow on `(0, 2)²` with the exact displacement on the whole
    /// boundary.
    pub fn colliding_flow() -> Result<Self> {
        let material = Material::from_lame(COLLIDING_LAMBDA, COLLIDING_MU)?;
        let exact = colliding_flow();
        let u = exact.displacement.clone();
        Ok(BenchmarkProblem {
            name: "colliding-flow".into(),
            material,
            exact,
            setup: Arc::new(move |mesh| {
                Problem::new(mesh, material).with_dirichlet(dirichlet(NodeSet::AllBoundary, [true, true], u.clone()))
            }),
        })
    }

    /// Cantilever on `(0, 8) × (-2, 2)`: exact displacement on `left`,
    /// exact end shear on `right`.
    pub fn beam(poisson: f64) -> Result<Self> {
        let beam = Beam::standard(1e7, poisson);
        let material = beam.material()?;
        let exact = beam.solution()?;
        let u = exact.displacement.clone();
        let stress = exact.stress.clone();
        Ok(BenchmarkProblem {
            name: format!("beam-nu{poisson}"),
            material,
            exact,
            setup: Arc::new(move |mesh| {
                let s = stress.clone();
                Problem::new(mesh, material)
                    .with_dirichlet(dirichlet(NodeSet::Tag("left".into()), [true, true], u.clone()))
                    .with_loads(Loads::none().with_traction("right", traction_from_stress(move |x| s(x))))
            }),
        })
    }

    /// Quarter plate with a hole: symmetry conditions on `left` and
    /// `bottom`, exact tractions on `top` and `right`.
    pub fn plate_with_hole(material: Material, kolosov: Kolosov) -> Self {
        let plate = PlateWithHole::standard(material, kolosov);
        let exact = plate.solution();
        let stress = exact.stress.clone();
        BenchmarkProblem {
            name: format!("plate-{:?}-nu{}", material.condition, material.poisson).to_lowercase(),
            material,
            exact,
            setup: Arc::new(move |mesh| {
                let (a, b) = (stress.clone(), stress.clone());
                Problem::new(mesh, material)
                    .with_dirichlet(fixed(NodeSet::Tag("left".into()), [true, false]))
                    .with_dirichlet(fixed(NodeSet::Tag("bottom".into()), [false, true]))
                    .with_loads(
                        Loads::none()
                            .with_traction("top", traction_from_stress(move |x| a(x)))
                            .with_traction("right", traction_from_stress(move |x| b(x))),
                    )
            }),
        }
    }
}

/// Solves `bench` on `mesh` and measures the error.
pub fn solve_benchmark(
    bench: &BenchmarkProblem,
    mesh: PolygonalMesh,
    method: Method,
    stab: Stabilization,
) -> Result<ErrorReport> {
    let problem = bench.problem(mesh.clone());
    let disc = Discretization::new(mesh);
    let sol = solve_problem(&problem, &disc, method, stab)?;
    error_norms(&disc, &bench.material, &sol.u, &bench.exact, method)
}

/// Patch test with the linear field on the whole boundary.
pub fn run_patch_test(mesh: &PolygonalMesh, method: Method, stab: Stabilization) -> Result<ErrorReport> {
    solve_benchmark(&BenchmarkProblem::patch_test()?, mesh.clone(), method, stab)
}

/// Every eigenvalue of the unconstrained stiffness, ascending.
pub fn stiffness_spectrum(mesh: &PolygonalMesh, material: &Material, method: Method, stab: Stabilization) -> Result<Vec<f64>> {
    let disc = Discretization::new(mesh.clone());
    let k = assemble_stiffness(&disc, method, material, stab)?;
    let mut ev: Vec<f64> = k.to_dense().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Number of eigenvalues at most `rel_tol` times the largest one.
pub fn zero_energy_modes(spectrum: &[f64], rel_tol: f64) -> usize {
    let max = spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    spectrum.iter().filter(|v| **v <= rel_tol * max).count()
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fit_rate(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub method: Method,
    pub stab: Stabilization,
    pub level: usize,
    pub report: ErrorReport,
}

/// Fitted slopes of one method over all levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub method: Method,
    pub stab: Stabilization,
    pub l2_displacement: f64,
    pub h1_seminorm: f64,
    pub l2_pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub rates: Vec<Rates>,
}

impl ConvergenceTable {
    pub fn rates_for(&self, method: Method, stab: Stabilization) -> Option<&Rates> {
        self.rates.iter().find(|r| r.method == method && r.stab == stab)
    }

    /// Rows of one method, coarse to fine.
    pub fn reports_for(&self, method: Method, stab: Stabilization) -> Vec<ErrorReport> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.stab == stab)
            .map(|r| r.report)
            .collect()
    }

    /// One row per (level, method) followed by one `rate` row per method.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,method,stab,level,h,dofs,l2_u,h1_u,l2_p\n");
        for r in &self.rows {
            let e = &r.report;
            let _ = writeln!(
                s,
                "level,{},{},{},{:.17e},{},{:.17e},{:.17e},{:.17e}",
                r.method, r.stab, r.level, e.h, e.dofs, e.l2_displacement, e.h1_seminorm, e.l2_pressure
            );
        }
        for r in &self.rates {
            let _ = writeln!(
                s,
                "rate,{},{},,,,{:.6},{:.6},{:.6}",
                r.method, r.stab, r.l2_displacement, r.h1_seminorm, r.l2_pressure
            );
        }
        s
    }
}

/// Solves `bench` on each mesh with each method and fits convergence rates.
///
/// Meshes must be ordered coarse to fine with strictly decreasing `h`.
pub fn convergence_study(
    bench: &BenchmarkProblem,
    meshes: &[PolygonalMesh],
    methods: &[(Method, Stabilization)],
) -> Result<ConvergenceTable> {
    if meshes.len() < 3 {
        return Err(Error::Argument(format!(
            "a convergence study needs at least 3 mesh levels, got {}",
            meshes.len()
        )));
    }
    let h: Vec<f64> = meshes.iter().map(|m| m.max_diameter()).collect();
    if h.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument(format!("mesh sizes must decrease strictly, got {h:?}")));
    }
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    for &(method, stab) in methods {
        let mut reports = Vec::new();
        for (level, mesh) in meshes.iter().enumerate() {
            let report = solve_benchmark(bench, mesh.clone(), method, stab)?;
            log::info!("{} {method}/{stab} level {level}: {report:?}", bench.name);
            reports.push(report);
            rows.push(ConvergenceRow { method, stab, level, report });
        }
        let slope = |f: fn(&ErrorReport) -> f64| fit_rate(&h, &reports.iter().map(f).collect::<Vec<_>>());
        rates.push(Rates {
            method,
            stab,
            l2_displacement: slope(|r| r.l2_displacement),
            h1_seminorm: slope(|r| r.h1_seminorm),
            l2_pressure: slope(|r| r.l2_pressure),
        });
    }
    Ok(ConvergenceTable { rows, rates })
}

/// Tip point of the Cook membrane.
pub const COOK_TIP: Point = Point::new(48.0, 60.0);

/// Cook membrane: left edge clamped, uniform shear `6.25` on the right edge
/// (total 100), `E = 250`, `ν = 0.4999`, plane strain.
pub fn cook_problem(mesh: PolygonalMesh) -> Result<Problem> {
    let material = Material::plane_strain(250.0, 0.4999)?;
    Ok(Problem::new(mesh, material)
        .with_dirichlet(fixed(NodeSet::Tag("left".into()), [true, true]))
        .with_loads(Loads::none().with_constant_traction("right", Vec2::new(0.0, 6.25))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CookRow {
    pub method: Method,
    pub stab: Stabilization,
    pub level: usize,
    pub dofs: usize,
    pub tip_displacement: f64,
}

/// Vertical tip displacement at [`COOK_TIP`] for every mesh and method.
pub fn cooks_membrane_study(meshes: &[PolygonalMesh], methods: &[(Method, Stabilization)]) -> Result<Vec<CookRow>> {
    let mut rows = Vec::new();
    for &(method, stab) in methods {
        for (level, mesh) in meshes.iter().enumerate() {
            let problem = cook_problem(mesh.clone())?;
            let disc = Discretization::new(mesh.clone());
            let sol = solve_problem(&problem, &disc, method, stab)?;
            let tip = mesh.nearest_node(COOK_TIP);
            rows.push(CookRow {
                method,
                stab,
                level,
                dofs: disc.num_dofs(),
                tip_displacement: sol.u[2 * tip + 1],
            });
        }
    }
    Ok(rows)
}

/// Point-symmetric Voronoi meshes of `(0, 2)²` with 64, 256, 1024 and
/// 4096 cells.
pub fn colliding_flow_meshes(seed: u64) -> Result<Vec<PolygonalMesh>> {
    [64, 256, 1024, 4096]
        .into_iter()
        .map(|n| {
            let spec = VoronoiSpec {
                point_symmetric: true,
                ..VoronoiSpec::new(n)
            };
            generate_voronoi(&spec, [0.0, 0.0, 2.0, 2.0], seed)
        })
        .collect()
}

/// Voronoi meshes of `(0, 8) × (-2, 2)` with 128 to 8192 cells.
pub fn beam_meshes(seed: u64) -> Result<Vec<PolygonalMesh>> {
    [128, 512, 2048, 8192]
        .into_iter()
        .map(|n| generate_voronoi(&VoronoiSpec::new(n), [0.0, -2.0, 8.0, 2.0], seed))
        .collect()
}

/// Four hex-dominant quarter-plate meshes, graded towards the hole.
/// `distortion = 0` gives the regular sequence.
pub fn plate_meshes(distortion: f64, seed: u64) -> Result<Vec<PolygonalMesh>> {
    [(4, 5), (8, 9), (16, 17), (32, 33)]
        .into_iter()
        .map(|(n, nr)| plate_with_hole_mesh(PlateCells::HexDominant, n, nr, 1.5, distortion, seed))
        .collect()
}

/// Cook membrane tilings with 1, 2, 4, 8, 16 and 32 master cells per side.
pub fn cook_meshes() -> Result<Vec<PolygonalMesh>> {
    [1, 2, 4, 8, 16, 32].into_iter().map(gunelve_cook_mesh).collect()
}

/// Largest `|p|` over nodes within `radius` of any of `centres`.
pub fn peak_near(mesh: &PolygonalMesh, values: &[f64], centres: &[Point], radius: f64) -> f64 {
    mesh.nodes
        .iter()
        .zip(values)
        .filter(|(x, _)| centres.iter().any(|c| (*x - c).norm() <= radius))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}
