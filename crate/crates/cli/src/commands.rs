//! The `nvemkit` subcommands. Each writes its artifacts into the output
//! directory and returns an error for a non-zero exit.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;

use nvem::assembly::{apply_dirichlet, assemble, recover_nodal_fields, solve_static, Discretization};
use nvem::benchmarks::{
    convergence_study, cooks_membrane_study, error_norms, run_patch_test, stiffness_spectrum, zero_energy_modes,
};
use nvem::dynamics::{admissible_time_step, integrate, lowest_frequency_estimate, Schedule};
use nvem::export::{csv_table, export_vtk, nodal_point_fields, PointField};
use nvem::material::Material;
use nvem::mesh::{generate_structured, PolygonalMesh, StructuredKind};
use nvem::problem::{Method, Stabilization};
use nvem::Point;

use crate::config::{ConfigError, ProblemKind, RunConfig, ScheduleKind};
use crate::report::{locking_suspect, MaterialSummary, MeshSummary, Norms, Report, LOCKING_SUSPECT};
use crate::setup;

/// A check the command itself performs did not hold; exit status 1.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn check_method(method: Method, stab: Stabilization) -> Result<()> {
    if method == Method::Nvem && stab == Stabilization::Plain {
        log::warn!("NVEM without stabilization has spurious zero-energy modes and does not converge");
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    check_method(cfg.method, cfg.stab)?;
    let total = Instant::now();
    let mut report = Report::new("run", &cfg.problem.to_string(), &cfg.method.to_string(), &cfg.stab.to_string());
    let t = Instant::now();
    let mesh = setup::single_mesh(cfg)?;
    report.time("mesh", t);
    let (problem, bench) = setup::problem(cfg, mesh.clone())?;
    let material = problem.material;
    report.mesh = Some(MeshSummary::of(&mesh));
    report.material = Some(MaterialSummary::of(&material));

    let t = Instant::now();
    let disc = Discretization::new(mesh.clone());
    let sys = assemble(&problem, &disc, cfg.method, cfg.stab)?;
    let reduced = apply_dirichlet(&sys.k, &sys.f, &sys.constraints)?;
    report.time("assemble", t);
    let t = Instant::now();
    let sol = solve_static(&reduced)?;
    report.time("solve", t);
    let t = Instant::now();
    let fields = recover_nodal_fields(&disc, &material, &sol.u)?;
    if let Some(b) = &bench {
        report.errors = Some(Norms::from(&error_norms(&disc, &b.material, &sol.u, &b.exact, cfg.method)?));
    }
    report.time("recover", t);

    if locking_suspect(cfg.method, &material) {
        report.flags.push(LOCKING_SUSPECT.into());
    }
    let max_u = fields.displacement.iter().fold(0.0f64, |m, u| m.max(u.norm()));
    let mut results = json!({
        "residual": sol.residual,
        "cholesky": sol.cholesky,
        "max_displacement": max_u,
        "max_von_mises": fields.von_mises.iter().fold(0.0f64, |m, v| m.max(*v)),
    });
    let dir = &cfg.output.dir;
    if let Some([x, y]) = cfg.output.probe {
        let n = mesh.nearest_node(Point::new(x, y));
        let (u, e, s) = (fields.displacement[n], fields.strain[n], fields.stress[n]);
        let row = vec![
            n as f64, mesh.nodes[n].x, mesh.nodes[n].y, u.x, u.y, e[0], e[1], e[2], s[0], s[1], s[2], fields.pressure[n],
        ];
        let header = ["node", "x", "y", "u1", "u2", "e11", "e22", "g12", "s11", "s22", "s12", "p"];
        write(dir, "probe.csv", &csv_table(&header, &[row]))?;
        results["probe"] = json!({ "node": n, "u1": u.x, "u2": u.y, "s11": s[0], "s22": s[1], "s12": s[2] });
    }
    if cfg.output.vtk {
        let title = format!("{} {}/{}", cfg.problem, cfg.method, cfg.stab);
        write(dir, "solution.vtk", &export_vtk(&mesh, &nodal_point_fields(&fields), &title)?)?;
    }
    report.results = results;
    report.time("total", total);
    write(dir, "report.json", &report.to_json())?;
    if let Some(e) = &report.errors {
        println!(
            "{} dofs: L2 {:.6e}  H1 {:.6e}  Lp {:.6e}",
            mesh.num_dofs(),
            e.l2_displacement,
            e.h1_seminorm,
            e.l2_pressure
        );
    } else {
        println!("{} dofs: max |u| {max_u:.6e}", mesh.num_dofs());
    }
    Ok(())
}

pub fn converge(cfg: &RunConfig) -> Result<()> {
    let total = Instant::now();
    let methods = cfg.method_list();
    for &(m, s) in &methods {
        check_method(m, s)?;
    }
    let label = |v: &[(Method, Stabilization)], f: fn(&(Method, Stabilization)) -> String| {
        v.iter().map(f).collect::<Vec<_>>().join(",")
    };
    let mut report = Report::new(
        "converge",
        &cfg.problem.to_string(),
        &label(&methods, |p| p.0.to_string()),
        &label(&methods, |p| p.1.to_string()),
    );
    let meshes = setup::mesh_sequence(cfg)?;
    let dir = &cfg.output.dir;
    if cfg.problem == ProblemKind::Cook {
        let rows = cooks_membrane_study(&meshes, &methods)?;
        let mut csv = String::from("method,stab,level,dofs,tip_u2\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{},{},{:.17e}\n", r.method, r.stab, r.level, r.dofs, r.tip_displacement));
        }
        write(dir, "rates.csv", &csv)?;
        report.results = json!(rows
            .iter()
            .map(|r| json!({"method": r.method.to_string(), "stab": r.stab.to_string(), "level": r.level, "dofs": r.dofs, "tip_u2": r.tip_displacement}))
            .collect::<Vec<_>>());
        print!("{csv}");
    } else {
        let Some(bench) = setup::benchmark(cfg)? else {
            bail!(ConfigError(format!("problem {} has no exact solution to converge against", cfg.problem)));
        };
        report.material = Some(MaterialSummary::of(&bench.material));
        let table = convergence_study(&bench, &meshes, &methods)?;
        if methods.iter().any(|&(m, _)| locking_suspect(m, &bench.material)) {
            report.flags.push(LOCKING_SUSPECT.into());
        }
        let csv = table.to_csv();
        write(dir, "rates.csv", &csv)?;
        report.results = json!({
            "levels": table.rows.iter().map(|r| json!({
                "method": r.method.to_string(), "stab": r.stab.to_string(), "level": r.level,
                "h": r.report.h, "dofs": r.report.dofs, "errors": Norms::from(&r.report),
            })).collect::<Vec<_>>(),
            "rates": table.rates.iter().map(|r| json!({
                "method": r.method.to_string(), "stab": r.stab.to_string(),
                "l2_displacement": r.l2_displacement, "h1_seminorm": r.h1_seminorm, "l2_pressure": r.l2_pressure,
            })).collect::<Vec<_>>(),
        });
        for r in &table.rates {
            println!(
                "{}/{}: rates L2 {:.3}  H1 {:.3}  Lp {:.3}",
                r.method, r.stab, r.l2_displacement, r.h1_seminorm, r.l2_pressure
            );
        }
    }
    report.time("total", total);
    write(dir, "report.json", &report.to_json())?;
    Ok(())
}

fn patch_meshes(cfg: &RunConfig) -> Result<Vec<(String, PolygonalMesh)>> {
    if cfg.mesh.file.is_some() || cfg.mesh.kind.is_some() || cfg.mesh.nx.is_some() {
        return Ok(vec![("configured".into(), setup::single_mesh(cfg)?)]);
    }
    let seed = cfg.mesh.seed.unwrap_or(1);
    let unit = [0.0, 0.0, 1.0, 1.0];
    Ok(vec![
        ("regular".into(), generate_structured(StructuredKind::HexDominantPoly, 6, 6, unit, 0.0, seed)?),
        ("distorted".into(), generate_structured(StructuredKind::HexDominantPoly, 6, 6, unit, 0.3, seed)?),
    ])
}

/// Patch test on the configured mesh, or the regular and distorted
/// default meshes. Fails if any relative error exceeds `tolerance`.
pub fn patch_test(cfg: &RunConfig, stab_given: bool) -> Result<()> {
    let total = Instant::now();
    let tol = cfg.tolerance.unwrap_or(1e-12);
    let pairs = if stab_given || !cfg.methods.is_empty() {
        cfg.method_list()
    } else {
        vec![(Method::Nvem, Stabilization::DTilde), (Method::Nvem, Stabilization::DMuFull)]
    };
    let mut report = Report::new("patch-test", "patch-test", &cfg.method.to_string(), &cfg.stab.to_string());
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, mesh) in patch_meshes(cfg)? {
        for &(m, s) in &pairs {
            let e = run_patch_test(&mesh, m, s)?;
            worst = worst.max(e.l2_displacement).max(e.h1_seminorm);
            println!("{name} {m}/{s}: L2 {:.3e}  H1 {:.3e}", e.l2_displacement, e.h1_seminorm);
            rows.push(json!({"mesh": name, "method": m.to_string(), "stab": s.to_string(), "dofs": e.dofs, "errors": Norms::from(&e)}));
        }
    }
    let pass = worst <= tol;
    report.results = json!({"tolerance": tol, "max_error": worst, "pass": pass, "runs": rows});
    report.time("total", total);
    write(&cfg.output.dir, "report.json", &report.to_json())?;
    if !pass {
        bail!(CheckFailed(format!("patch test error {worst:e} exceeds tolerance {tol:e}")));
    }
    Ok(())
}

/// Spectrum of the unconstrained stiffness.
pub fn eig(cfg: &RunConfig) -> Result<()> {
    check_method(cfg.method, cfg.stab)?;
    let total = Instant::now();
    let mesh = if cfg.mesh == Default::default() {
        generate_structured(StructuredKind::HexDominantPoly, 6, 6, [0.0, 0.0, 1.0, 1.0], 0.0, 1)?
    } else {
        setup::single_mesh(cfg)?
    };
    let material = match setup::problem(cfg, mesh.clone()) {
        Ok((p, _)) => p.material,
        Err(_) if cfg.material == Default::default() => Material::plane_strain(1e7, 0.3)?,
        Err(e) => return Err(e),
    };
    const DENSE_LIMIT: usize = 4000;
    if mesh.num_dofs() > DENSE_LIMIT {
        bail!(ConfigError(format!(
            "eig computes the full dense spectrum; {} dofs exceeds the limit of {DENSE_LIMIT}",
            mesh.num_dofs()
        )));
    }
    let mut report = Report::new("eig", &cfg.problem.to_string(), &cfg.method.to_string(), &cfg.stab.to_string());
    report.mesh = Some(MeshSummary::of(&mesh));
    report.material = Some(MaterialSummary::of(&material));
    let ev = stiffness_spectrum(&mesh, &material, cfg.method, cfg.stab)?;
    let rel = cfg.tolerance.unwrap_or(1e-9);
    let zeros = zero_energy_modes(&ev, rel);
    let max = ev.last().copied().unwrap_or(0.0);
    let first_nonzero = ev.get(zeros).copied();
    let shown = cfg.output.eigenvalues.min(ev.len());
    let rows: Vec<Vec<f64>> = ev.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
    write(&cfg.output.dir, "spectrum.csv", &csv_table(&["index", "eigenvalue"], &rows))?;
    report.results = json!({
        "relative_tolerance": rel,
        "zero_modes": zeros,
        "lambda_max": max,
        "first_nonzero": first_nonzero,
        "smallest": &ev[..shown],
    });
    report.time("total", total);
    write(&cfg.output.dir, "report.json", &report.to_json())?;
    println!("{} dofs: {zeros} zero-energy modes (relative tolerance {rel:e}), lambda_max {max:.6e}", mesh.num_dofs());
    Ok(())
}

pub fn dynamics(cfg: &RunConfig) -> Result<()> {
    check_method(cfg.method, cfg.stab)?;
    if !matches!(cfg.problem, ProblemKind::Cantilever | ProblemKind::Custom) {
        bail!(ConfigError(format!("dynamics supports problem = cantilever, not {}", cfg.problem)));
    }
    let total = Instant::now();
    let c = setup::cantilever(cfg)?;
    let d = &cfg.dynamics;
    let schedule = match d.schedule.unwrap_or(ScheduleKind::Ramp) {
        ScheduleKind::Constant => Schedule::Constant,
        ScheduleKind::Ramp => Schedule::RampCutoff {
            slope: -500.0,
            intercept: 1.0,
            cutoff: 0.002,
        },
        ScheduleKind::Harmonic => Schedule::Harmonic {
            omega: d.omega.unwrap_or(8.0),
        },
    };
    let t = Instant::now();
    let mesh = match (&cfg.mesh.file, cfg.mesh.kind) {
        (Some(_), _) | (None, Some(_)) => setup::single_mesh(cfg)?,
        (None, None) => c.mesh(cfg.mesh.sites.unwrap_or(500), cfg.mesh.seed.unwrap_or(1))?,
    };
    let mut report = Report::new("dynamics", "cantilever", &cfg.method.to_string(), &cfg.stab.to_string());
    report.mesh = Some(MeshSummary::of(&mesh));
    report.material = Some(MaterialSummary::of(&c.material()?));
    report.time("mesh", t);
    let t = Instant::now();
    let run = c.assemble(mesh.clone(), cfg.method, cfg.stab, schedule)?;
    report.time("assemble", t);
    let t = Instant::now();
    let config = c.config()?;
    let tr = integrate(&run.system, &run.loads, &config, &[run.tip], cfg.output.snapshot_every)?;
    report.time("integrate", t);
    let dir = &cfg.output.dir;
    write(dir, "probe.csv", &tr.probe_csv())?;
    if cfg.output.vtk {
        let disc = Discretization::new(mesh.clone());
        let material = c.material()?;
        for (i, (time, u)) in tr.snapshots.iter().enumerate() {
            let f = recover_nodal_fields(&disc, &material, u)?;
            let vtk = export_vtk(&mesh, &nodal_point_fields(&f), &format!("cantilever t={time}"))?;
            write(dir, &format!("snapshot_{i:04}.vtk"), &vtk)?;
        }
        let f = recover_nodal_fields(&disc, &material, &tr.displacement)?;
        let mut fields = nodal_point_fields(&f);
        fields.push(PointField::with_components(
            "velocity",
            3,
            (0..mesh.num_nodes()).flat_map(|i| [tr.velocity[2 * i], tr.velocity[2 * i + 1], 0.0]).collect(),
        ));
        write(dir, "solution.vtk", &export_vtk(&mesh, &fields, "cantilever final state")?)?;
    }
    let tip = tr.probes.last().map(|p| p[0]).unwrap_or_default();
    let peak = tr.probes.iter().fold(0.0f64, |m, p| m.max(p[0].y.abs()));
    let f1 = lowest_frequency_estimate(&c.beam);
    report.results = json!({
        "steps": config.steps(),
        "alpha": c.alpha, "dt": c.dt, "t_end": c.t_end, "q1": c.q1, "q2": c.q2,
        "tip_node": run.tip,
        "final_tip": {"u1": tip.x, "u2": tip.y},
        "peak_tip_u2": peak,
        "frequency_estimate_hz": f1,
        "admissible_dt": admissible_time_step(&c.beam),
        "final_energy": tr.energy.last(),
    });
    if c.dt > admissible_time_step(&c.beam) {
        log::warn!("dt = {} exceeds the accuracy bound (1/f1)/30 = {}", c.dt, admissible_time_step(&c.beam));
    }
    report.time("total", total);
    write(dir, "report.json", &report.to_json())?;
    println!(
        "{} steps on {} dofs: final tip u = ({:.6e}, {:.6e}), f1 estimate {f1:.3} Hz",
        config.steps(),
        mesh.num_dofs(),
        tip.x,
        tip.y
    );
    Ok(())
}

pub fn mesh_gen(cfg: &RunConfig) -> Result<()> {
    let mesh = setup::single_mesh(cfg)?;
    let dir = &cfg.output.dir;
    write(dir, "mesh.msh", &mesh.to_text())?;
    if cfg.output.vtk {
        write(dir, "mesh.vtk", &export_vtk(&mesh, &[], "nvemkit mesh")?)?;
    }
    println!(
        "{} nodes, {} elements, h = {:.6e}",
        mesh.num_nodes(),
        mesh.num_elements(),
        mesh.max_diameter()
    );
    Ok(())
}
