use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nvem::export::read_vtk;
use nvem::mesh::load_mesh_file;
use serde_json::Value;

fn nvemkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvemkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("nvemkit runs")
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_patch_test_config() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "patch_test.cfg", "problem = patch-test\n[mesh]\nkind = hex-dominant-poly\nnx = 6\ndistortion = 0.3\n");
    let o = nvemkit(t.path(), &["run", "patch_test.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&t.path().join("out"));
    assert_eq!(r["schema"], "nvemkit-report");
    assert_eq!(r["version"], 1);
    assert!(r["errors"]["l2_displacement"].as_f64().unwrap() <= 1e-12);
    assert!(r["errors"]["h1_seminorm"].as_f64().unwrap() <= 1e-12);
    assert!(r["timings"].as_array().unwrap().iter().any(|t| t["phase"] == "solve"));
    assert_eq!(r["flags"].as_array().unwrap().len(), 0);

    let vtk = read_vtk(&fs::read_to_string(t.path().join("out/solution.vtk")).unwrap()).unwrap();
    let names: Vec<&str> = vtk.fields.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["displacement", "strain", "stress", "pressure", "von_mises"]);
    assert_eq!(vtk.points.len() * 2, r["mesh"]["dofs"].as_u64().unwrap() as usize);
}

#[test]
fn missing_mesh_file_is_an_io_error() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "a.cfg", "problem = patch-test\n[mesh]\nfile = meshes/absent.msh\n");
    let o = nvemkit(t.path(), &["run", "a.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.msh"), "{}", stderr(&o));
    let o = nvemkit(t.path(), &["run", "no_such.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such.cfg"));
}

#[test]
fn unknown_key_lists_valid_keys() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "a.cfg", "problem = beam\n[dynamics]\nbeta = 0.3\n");
    let o = nvemkit(t.path(), &["run", "a.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("valid keys: alpha, dt, t_end"), "{}", stderr(&o));
    let o = nvemkit(t.path(), &["patch-test", "--stab", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn locking_suspect_flag() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "cf.cfg", "problem = colliding-flow\n[mesh]\nsites = 64\n");
    let o = nvemkit(t.path(), &["run", "cf.cfg", "--method", "vem", "--stab", "plain", "--out", "vem"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&t.path().join("vem"))["flags"][0], "locking-suspect");
    let o = nvemkit(t.path(), &["run", "cf.cfg", "--out", "nvem"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&t.path().join("nvem"));
    assert_eq!(r["flags"].as_array().unwrap().len(), 0);
    assert_eq!((r["method"].as_str(), r["stab"].as_str()), (Some("nvem"), Some("dtilde")));
}

#[test]
fn converge_writes_rates_and_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    config(
        t.path(),
        "c.cfg",
        "problem = beam\nmethods = nvem:dtilde nvem:dmu-full\n[mesh]\nkind = voronoi\ndomain = 0 -2 8 2\nlevels = 32 128 512\nseed = 3\n",
    );
    for out in ["a", "b"] {
        let o = nvemkit(t.path(), &["converge", "c.cfg", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = fs::read_to_string(t.path().join("a/rates.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(t.path().join("b/rates.csv")).unwrap());
    assert_eq!(a.lines().filter(|l| l.starts_with("level,")).count(), 6);
    assert_eq!(a.lines().filter(|l| l.starts_with("rate,")).count(), 2);
    let r = report(&t.path().join("a"));
    let l2 = r["results"]["rates"][0]["l2_displacement"].as_f64().unwrap();
    assert!(l2 > 1.5, "L2 rate {l2}");

    config(t.path(), "two.cfg", "problem = beam\n[mesh]\nkind = voronoi\nlevels = 32 128\n");
    let o = nvemkit(t.path(), &["converge", "two.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 3"));
}

#[test]
fn patch_test_command() {
    let t = tempfile::tempdir().unwrap();
    let o = nvemkit(t.path(), &["patch-test"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&t.path().join("out"));
    assert_eq!(r["results"]["runs"].as_array().unwrap().len(), 4);
    assert_eq!(r["results"]["pass"], true);
    // an impossible tolerance turns into a failed check
    config(t.path(), "tight.cfg", "problem = patch-test\ntolerance = 1e-30\n");
    let o = nvemkit(t.path(), &["patch-test", "tight.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eig_counts_zero_energy_modes() {
    let t = tempfile::tempdir().unwrap();
    let o = nvemkit(t.path(), &["eig", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(report(&t.path().join("s"))["results"]["zero_modes"], 3);
    let o = nvemkit(t.path(), &["eig", "--stab", "plain", "--out", "p"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(&t.path().join("p"))["results"]["zero_modes"].as_u64().unwrap() > 3);
    let csv = fs::read_to_string(t.path().join("s/spectrum.csv")).unwrap();
    assert!(csv.starts_with("index,eigenvalue\n"));
}

#[test]
fn singular_system_is_a_numerical_failure() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "p.cfg", "problem = plate-with-hole\n[mesh]\nnx = 4\n");
    let o = nvemkit(t.path(), &["run", "p.cfg", "--stab", "plain"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nullspace"), "{}", stderr(&o));
}

#[test]
fn stabilized_plate_pressure_is_smooth() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "p.cfg", "problem = plate-with-hole\n[mesh]\nnx = 8\n");
    let o = nvemkit(t.path(), &["run", "p.cfg", "--stab", "dmu-full"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let vtk = read_vtk(&fs::read_to_string(t.path().join("out/solution.vtk")).unwrap()).unwrap();
    let p = &vtk.fields.iter().find(|f| f.name == "pressure").unwrap().values;
    let range = p.iter().cloned().fold(f64::MIN, f64::max) - p.iter().cloned().fold(f64::MAX, f64::min);
    let mut jumps = Vec::new();
    for c in &vtk.cells {
        for (k, &a) in c.iter().enumerate() {
            jumps.push((p[a] - p[c[(k + 1) % c.len()]]).abs());
        }
    }
    let mean = jumps.iter().sum::<f64>() / jumps.len() as f64;
    assert!(mean < 0.05 * range, "mean jump {mean}, range {range}");
}

#[test]
fn custom_problem_with_probe() {
    let t = tempfile::tempdir().unwrap();
    config(
        t.path(),
        "c.cfg",
        "problem = custom\n[mesh]\nkind = quad\nnx = 64\nny = 16\ndomain = 0 0 4 1\n[material]\nyoung = 1000\npoisson = 0.3\ncondition = stress\n[bc]\nclamp = left\ntraction.right = 0 -1\n[output]\nprobe = 4 1\nvtk = false\n",
    );
    let o = nvemkit(t.path(), &["run", "c.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!t.path().join("out/solution.vtk").exists());
    let csv = fs::read_to_string(t.path().join("out/probe.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // Timoshenko tip deflection P L^3 / (3 E I) + P L / (k G A), P = 1, L = 4
    let (e, g) = (1000.0, 1000.0 / 2.6);
    let beam = -(64.0 / (3.0 * e / 12.0) + 4.0 / (5.0 / 6.0 * g));
    assert!((row[4] - beam).abs() < 0.03 * beam.abs(), "u2 {} vs {beam}", row[4]);

    config(t.path(), "bad.cfg", "problem = custom\n[material]\nyoung = 1\npoisson = 0.2\n[bc]\nclamp = west\n");
    let o = nvemkit(t.path(), &["run", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("available tags"));
}

#[test]
fn dynamics_writes_probe_series() {
    let t = tempfile::tempdir().unwrap();
    config(
        t.path(),
        "d.cfg",
        "problem = cantilever\n[mesh]\nsites = 60\n[dynamics]\nt_end = 0.05\nschedule = constant\n[output]\nsnapshot_every = 25\n",
    );
    let o = nvemkit(t.path(), &["dynamics", "d.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(t.path().join("out/probe.csv")).unwrap();
    assert!(csv.starts_with("t,u1_"));
    assert_eq!(csv.lines().count(), 52);
    let r = report(&t.path().join("out"));
    assert_eq!(r["results"]["steps"], 50);
    assert!(r["results"]["peak_tip_u2"].as_f64().unwrap() > 0.0);
    assert!(t.path().join("out/snapshot_0002.vtk").exists());
    let again = nvemkit(t.path(), &["dynamics", "d.cfg", "--out", "again"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(csv, fs::read_to_string(t.path().join("again/probe.csv")).unwrap());

    config(t.path(), "bad.cfg", "problem = cantilever\n[dynamics]\nalpha = 0.2\n");
    assert_eq!(nvemkit(t.path(), &["dynamics", "bad.cfg"]).status.code(), Some(2));
}

#[test]
fn mesh_gen_round_trips() {
    let t = tempfile::tempdir().unwrap();
    config(t.path(), "m.cfg", "[mesh]\nkind = voronoi\nsites = 30\nseed = 4\n");
    let o = nvemkit(t.path(), &["mesh-gen", "m.cfg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (mesh, warnings) = load_mesh_file(&t.path().join("out/mesh.msh")).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(mesh.num_elements(), 30);
    assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    let vtk = read_vtk(&fs::read_to_string(t.path().join("out/mesh.vtk")).unwrap()).unwrap();
    assert_eq!(vtk.cells, mesh.elements);

    // the generated file feeds back into `run`
    config(t.path(), "r.cfg", "problem = patch-test\n[mesh]\nfile = out/mesh.msh\n");
    let o = nvemkit(t.path(), &["run", "r.cfg", "--out", "r"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(report(&t.path().join("r"))["errors"]["l2_displacement"].as_f64().unwrap() < 1e-12);
}
