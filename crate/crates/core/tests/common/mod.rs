//! Shared test support: independent oracles, a small mesh corpus, seeded
//! random meshes and the invariant checks run by both the property suite
//! and the acceptance harness.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nvem::assembly::{
    apply_dirichlet, assemble_loads, assemble_stiffness, dense_spectrum, Discretization,
};
use nvem::benchmarks::{colliding_flow, error_norms, interpolate, Beam, ExactSolution, Kolosov, PlateWithHole};
use nvem::element::ElementOperators;
use nvem::material::{lame_from_young, modified_young_poisson, Material};
use nvem::mesh::{
    element_geometry, generate_structured, generate_voronoi, gunelve_cook_mesh, gunelve_master,
    plate_with_hole_mesh, PlateCells, PolygonalMesh, StructuredKind, VoronoiSpec,
};
use nvem::problem::{Loads, Method, Stabilization};
use nvem::{Mat3, Point, Vec2};

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

fn to_dyn(d: &Mat3) -> DMatrix<f64> {
    DMatrix::from_iterator(3, 3, d.iter().copied())
}

/// Polygon vertices of element `e`, counter-clockwise.
fn vertices(mesh: &PolygonalMesh, e: usize) -> Vec<Point> {
    mesh.elements[e].iter().map(|&v| mesh.nodes[v]).collect()
}

fn shoelace(x: &[Point]) -> f64 {
    let n = x.len();
    0.5 * (0..n).map(|a| x[a].x * x[(a + 1) % n].y - x[(a + 1) % n].x * x[a].y).sum::<f64>()
}

/// Average strain `(1/|E|) ∮ sym(u ⊗ n)` with `u` linear on each edge, as a
/// 3 × 2N matrix. Each edge contributes its length times the mean of the
/// end values.
pub fn oracle_strain_matrix(x: &[Point]) -> DMatrix<f64> {
    let n = x.len();
    let area = shoelace(x);
    let mut b = DMatrix::zeros(3, 2 * n);
    for a in 0..n {
        let c = (a + 1) % n;
        let t = x[c] - x[a];
        // |e| n = (t_y, -t_x)
        let (ln1, ln2) = (t.y, -t.x);
        for &v in &[a, c] {
            b[(0, 2 * v)] += 0.5 * ln1 / area;
            b[(1, 2 * v + 1)] += 0.5 * ln2 / area;
            b[(2, 2 * v)] += 0.5 * ln2 / area;
            b[(2, 2 * v + 1)] += 0.5 * ln1 / area;
        }
    }
    b
}

/// Projector onto linear fields that keeps the average strain, the vertex
/// mean and the average rotation: `P = L (C L)⁻¹ C`.
pub fn oracle_projector(x: &[Point]) -> DMatrix<f64> {
    let n = x.len();
    let area = shoelace(x);
    let mut cmat = DMatrix::zeros(6, 2 * n);
    cmat.rows_mut(0, 3).copy_from(&oracle_strain_matrix(x));
    for v in 0..n {
        cmat[(3, 2 * v)] = 1.0 / n as f64;
        cmat[(4, 2 * v + 1)] = 1.0 / n as f64;
    }
    for a in 0..n {
        let c = (a + 1) % n;
        let t = x[c] - x[a];
        let (ln1, ln2) = (t.y, -t.x);
        // ∮ (u2 n1 - u1 n2) ds
        for &v in &[a, c] {
            cmat[(5, 2 * v + 1)] += 0.5 * ln1 / area;
            cmat[(5, 2 * v)] -= 0.5 * ln2 / area;
        }
    }
    let mut l = DMatrix::zeros(2 * n, 6);
    for (v, p) in x.iter().enumerate() {
        let fields = [
            (p.x, 0.0),
            (p.y, 0.0),
            (1.0, 0.0),
            (0.0, p.x),
            (0.0, p.y),
            (0.0, 1.0),
        ];
        for (k, (u1, u2)) in fields.iter().enumerate() {
            l[(2 * v, k)] = *u1;
            l[(2 * v + 1, k)] = *u2;
        }
    }
    let cl = &cmat * &l;
    &l * cl.try_inverse().expect("functionals are unisolvent on linear fields") * cmat
}

fn d_recipe(kc_stab: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(kc_stab.nrows(), |i, _| kc_stab[(i, i)].max(1.0))
}

/// `|E| Bᵀ D B + (I − P)ᵀ S (I − P)` from the oracle `B` and `P`.
pub fn oracle_vem_stiffness(x: &[Point], d: &Mat3, d_stab: &Mat3) -> DMatrix<f64> {
    let area = shoelace(x);
    let b = oracle_strain_matrix(x);
    let p = oracle_projector(x);
    let imp = DMatrix::identity(p.nrows(), p.ncols()) - p;
    let s = d_recipe(&(b.transpose() * to_dyn(d_stab) * &b * area));
    b.transpose() * to_dyn(d) * &b * area + imp.transpose() * DMatrix::from_diagonal(&s) * imp
}

/// Global NVEM stiffness built node by node in the global dof frame.
pub fn naive_nvem_stiffness(mesh: &PolygonalMesh, d: &Mat3, d_stab: Option<&Mat3>) -> DMatrix<f64> {
    let nd = 2 * mesh.num_nodes();
    let areas: Vec<f64> = (0..mesh.num_elements()).map(|e| shoelace(&vertices(mesh, e))).collect();
    let mut k = DMatrix::zeros(nd, nd);
    for node in 0..mesh.num_nodes() {
        let patch: Vec<usize> = (0..mesh.num_elements())
            .filter(|&e| mesh.elements[e].contains(&node))
            .collect();
        let share = |e: usize| areas[e] / mesh.elements[e].len() as f64;
        let ai: f64 = patch.iter().map(|&e| share(e)).sum();
        let mut bi = DMatrix::<f64>::zeros(3, nd);
        let mut impi = DMatrix::<f64>::zeros(nd, nd);
        for &e in &patch {
            let w = share(e) / ai;
            let x = vertices(mesh, e);
            let be = oracle_strain_matrix(&x);
            let pe = oracle_projector(&x);
            let ring = &mesh.elements[e];
            for (a, &ga) in ring.iter().enumerate() {
                for i in 0..2 {
                    for r in 0..3 {
                        bi[(r, 2 * ga + i)] += w * be[(r, 2 * a + i)];
                    }
                    for (c, &gc) in ring.iter().enumerate() {
                        for j in 0..2 {
                            let id = if a == c && i == j { 1.0 } else { 0.0 };
                            impi[(2 * ga + i, 2 * gc + j)] += w * (id - pe[(2 * a + i, 2 * c + j)]);
                        }
                    }
                }
            }
        }
        k += bi.transpose() * to_dyn(d) * &bi * ai;
        if let Some(ds) = d_stab {
            let s = d_recipe(&(bi.transpose() * to_dyn(ds) * &bi * ai));
            k += impi.transpose() * DMatrix::from_diagonal(&s) * impi;
        }
    }
    k
}

/// Every small mesh used across the test suite.
pub fn corpus() -> Vec<(String, PolygonalMesh)> {
    let unit = [0.0, 0.0, 1.0, 1.0];
    let mut out = Vec::new();
    for kind in [StructuredKind::Quad, StructuredKind::DistortedQuad, StructuredKind::HexDominantPoly] {
        for n in 1..=4 {
            for d in [0.0, 0.3] {
                if d > 0.0 && kind == StructuredKind::Quad {
                    continue;
                }
                if let Ok(m) = generate_structured(kind, n, n, unit, d, 5) {
                    out.push((format!("{kind} {n}x{n} d={d}"), m));
                }
            }
        }
    }
    for sites in [3, 6, 10, 16] {
        out.push((
            format!("voronoi {sites}"),
            generate_voronoi(&VoronoiSpec::new(sites), unit, 11).unwrap(),
        ));
    }
    out.push(("gunelve master".into(), gunelve_master()));
    out.push(("cook 1".into(), gunelve_cook_mesh(1).unwrap()));
    out.push((
        "plate quad".into(),
        plate_with_hole_mesh(PlateCells::Quad, 2, 2, 1.0, 0.0, 0).unwrap(),
    ));
    out.push((
        "plate hex".into(),
        plate_with_hole_mesh(PlateCells::HexDominant, 2, 3, 1.5, 0.2, 1).unwrap(),
    ));
    out
}

/// A valid mesh drawn from a seed: structured or Voronoi, on a random
/// rectangle, at most a few dozen elements.
pub fn random_mesh(seed: u64) -> PolygonalMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = rng.random_range(-2.0..2.0);
    let y0 = rng.random_range(-2.0..2.0);
    let w = rng.random_range(0.5..4.0);
    let h = rng.random_range(0.5..4.0);
    let domain = [x0, y0, x0 + w, y0 + h];
    let nx = rng.random_range(1..=5);
    let ny = rng.random_range(1..=5);
    let distortion = rng.random_range(0.0..0.3);
    let s = rng.random::<u64>();
    match rng.random_range(0..4) {
        0 => generate_structured(StructuredKind::Quad, nx, ny, domain, 0.0, s).unwrap(),
        1 => generate_structured(StructuredKind::DistortedQuad, nx, ny, domain, distortion, s).unwrap(),
        2 => generate_structured(StructuredKind::HexDominantPoly, nx, ny, domain, distortion, s).unwrap(),
        _ => generate_voronoi(&VoronoiSpec::new(rng.random_range(3..30)), domain, s).unwrap(),
    }
}

pub fn random_material(seed: u64) -> Material {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let young = 10f64.powf(rng.random_range(-1.0..7.0));
    let nu = rng.random_range(0.0..0.4999);
    if rng.random_bool(0.5) {
        Material::plane_strain(young, nu).unwrap()
    } else {
        Material::plane_stress(young, nu).unwrap()
    }
}

/// Nodal values of `u(x) = g x + c` for a 2 × 2 gradient `g`.
pub fn linear_field(mesh: &PolygonalMesh, nodes: &[usize], g: [[f64; 2]; 2], c: [f64; 2]) -> DVector<f64> {
    let mut d = DVector::zeros(2 * nodes.len());
    for (k, &v) in nodes.iter().enumerate() {
        let p = mesh.nodes[v];
        d[2 * k] = g[0][0] * p.x + g[0][1] * p.y + c[0];
        d[2 * k + 1] = g[1][0] * p.x + g[1][1] * p.y + c[1];
    }
    d
}

pub fn check_mesh(mesh: &PolygonalMesh) -> Check {
    let disc = Discretization::new(mesh.clone());
    for ops in &disc.elements {
        let g = &ops.geom;
        let s: Vec2 = g.edge_normals.iter().zip(&g.edge_lengths).map(|(n, l)| n * *l).sum();
        ensure(s.norm() <= 1e-12 * g.perimeter(), || format!("Σ|e|n = {s:?}"))?;
    }
    let elem: f64 = disc.elements.iter().map(|e| e.area()).sum();
    let nodal: f64 = disc.patches.iter().map(|p| p.area).sum();
    ensure((elem - nodal).abs() <= 1e-12 * elem, || format!("Σ|I| = {nodal}, Σ|E| = {elem}"))?;
    for p in &disc.patches {
        let w: f64 = p.weights.iter().sum();
        ensure((w - 1.0).abs() <= 1e-12, || format!("patch weights of node {} sum to {w}", p.node))?;
    }
    Ok(())
}

pub fn check_structured_determinism(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = [StructuredKind::Quad, StructuredKind::DistortedQuad, StructuredKind::HexDominantPoly][rng.random_range(0..3)];
    let (nx, ny) = (rng.random_range(1..6), rng.random_range(1..6));
    let d = rng.random_range(0.0..0.3);
    let s = rng.random::<u64>();
    let a = generate_structured(kind, nx, ny, [0.0, 0.0, 1.0, 2.0], d, s).unwrap();
    let b = generate_structured(kind, nx, ny, [0.0, 0.0, 1.0, 2.0], d, s).unwrap();
    ensure(a.to_text() == b.to_text(), || format!("{kind} not deterministic"))
}

pub fn check_material(m: &Material) -> Check {
    let d = m.constitutive();
    ensure((d - d.transpose()).amax() == 0.0, || "D not symmetric".into())?;
    let ev = d.symmetric_eigenvalues();
    ensure(ev.iter().all(|&v| v >= -1e-10 * ev.amax()), || format!("D eigenvalues {ev:?}"))?;
    if m.effective_lambda() <= 25.0 * m.mu {
        ensure((m.dtilde() - d).amax() <= 1e-12 * d.amax(), || "D̃ differs from D without cap".into())?;
    }
    let (lambda, mu) = lame_from_young(m.young, m.poisson);
    let (e2, nu2) = modified_young_poisson(lambda, mu);
    if lambda <= 25.0 * mu {
        ensure(
            (e2 - m.young).abs() <= 1e-12 * m.young && (nu2 - m.poisson).abs() <= 1e-12,
            || format!("round trip ({}, {}) -> ({e2}, {nu2})", m.young, m.poisson),
        )?;
    }
    Ok(())
}

pub fn check_elements(mesh: &PolygonalMesh, m: &Material) -> Check {
    let d = m.constitutive();
    for e in 0..mesh.num_elements() {
        let ops = ElementOperators::new(element_geometry(mesh, e));
        let ring = &mesh.elements[e];
        let n2 = 2 * ring.len();
        let p = &ops.p;
        ensure(rel_diff(&(p * p), p) <= 1e-10, || format!("P² ≠ P on element {e}"))?;
        let lin = linear_field(mesh, ring, [[0.3, -1.2], [0.7, 2.0]], [1.5, -0.5]);
        ensure((p * &lin - &lin).amax() <= 1e-10 * lin.amax(), || format!("P d_lin ≠ d_lin on {e}"))?;
        for (g, c) in [([[0.0, 0.0], [0.0, 0.0]], [1.0, 0.0]), ([[0.0, 0.0], [0.0, 0.0]], [0.0, 1.0]), ([[0.0, -1.0], [1.0, 0.0]], [0.0, 0.0])] {
            let rb = linear_field(mesh, ring, g, c);
            let s = &ops.b * rb;
            ensure(s.amax() <= 1e-12 * ops.b.amax(), || format!("B does not annihilate rigid motion on {e}"))?;
        }
        let eps = linear_field(mesh, ring, [[0.4, 0.25], [0.25, -0.9]], [0.0, 0.0]);
        let s = &ops.b * eps;
        ensure(
            (s[0] - 0.4).abs() < 1e-12 && (s[1] + 0.9).abs() < 1e-12 && (s[2] - 0.5).abs() < 1e-12,
            || format!("B d ≠ ε0 on {e}: {s:?}"),
        )?;
        let k = ops.stiffness(&d, &m.dtilde());
        let ev = k.clone().symmetric_eigenvalues();
        let max = ev.amax();
        let zeros = ev.iter().filter(|v| v.abs() <= 1e-10 * max).count();
        ensure(zeros == 3 && n2 >= 4, || format!("K_E nullity {zeros} on {e}"))?;
        let f = ops.consistency_stiffness(&d) * lin_field_any(mesh, ring);
        let (mut fx, mut fy, mut mz) = (0.0, 0.0, 0.0);
        for (a, &v) in ring.iter().enumerate() {
            let x = mesh.nodes[v];
            fx += f[2 * a];
            fy += f[2 * a + 1];
            mz += x.x * f[2 * a + 1] - x.y * f[2 * a];
        }
        let scale = f.amax() * (1.0 + mesh.nodes[ring[0]].coords.norm());
        ensure(fx.abs().max(fy.abs()).max(mz.abs()) <= 1e-10 * scale.max(1e-300), || format!("unbalanced K_c d_lin on {e}"))?;
    }
    Ok(())
}

fn lin_field_any(mesh: &PolygonalMesh, ring: &[usize]) -> DVector<f64> {
    linear_field(mesh, ring, [[1.1, -0.4], [0.9, 0.2]], [0.3, 0.8])
}

pub fn check_nodal(mesh: &PolygonalMesh, m: &Material) -> Check {
    let disc = Discretization::new(mesh.clone());
    let ops = disc.nodal_operators().map_err(|e| e.to_string())?;
    for o in ops {
        let eps = linear_field(mesh, &o.patch.nodes, [[0.4, 0.25], [0.25, -0.9]], [2.0, 1.0]);
        let s = &o.b * eps;
        ensure(
            (s[0] - 0.4).abs() < 1e-10 && (s[1] + 0.9).abs() < 1e-10 && (s[2] - 0.5).abs() < 1e-10,
            || format!("B_I d ≠ ε0 at node {}", o.patch.node),
        )?;
    }
    let k = assemble_stiffness(&disc, Method::Nvem, m, Stabilization::DTilde).map_err(|e| e.to_string())?;
    let ev = dense_spectrum(&k.to_dense(), None, 4).map_err(|e| e.to_string())?.values;
    let max = k.to_dense().symmetric_eigenvalues().amax();
    let zeros = ev.iter().filter(|v| v.abs() <= 1e-9 * max).count();
    ensure(zeros == 3 && ev[3] > 1e-9 * max, || format!("NVEM spectrum head {ev:?}"))?;
    if m.effective_lambda() <= 25.0 * m.mu {
        let kd = naive_nvem_stiffness(mesh, &m.constitutive(), Some(&m.constitutive()));
        ensure(rel_diff(&k.to_dense(), &kd) <= 1e-12, || "D̃ and D stabilized stiffness differ".into())?;
    }
    Ok(())
}

pub fn check_assembly(mesh: &PolygonalMesh, m: &Material, seed: u64) -> Check {
    let disc = Discretization::new(mesh.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b1 = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let b2 = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let node = rng.random_range(0..mesh.num_nodes());
    for method in [Method::Vem, Method::Nvem] {
        let l1 = Loads::none().with_constant_body(b1).with_constant_traction("top", b2);
        let l2 = Loads::none().with_constant_body(b2).with_point_load(node, b1);
        let both = Loads::none()
            .with_constant_body(b1 + b2)
            .with_constant_traction("top", b2)
            .with_point_load(node, b1);
        let f = |l: &Loads| assemble_loads(&disc, method, l).unwrap();
        let diff = (f(&l1) + f(&l2) - f(&both)).amax();
        ensure(diff <= 1e-12 * f(&both).amax().max(1.0), || format!("{method} loads not linear: {diff:e}"))?;
        let k = assemble_stiffness(&disc, method, m, Stabilization::DTilde).unwrap();
        let left: Vec<(usize, f64)> = mesh.tagged_nodes("left").unwrap().iter().flat_map(|&n| [(2 * n, 0.0), (2 * n + 1, 0.1)]).collect();
        let red = apply_dirichlet(&k, &f(&both), &left).unwrap();
        ensure(red.k.asymmetry() <= 1e-12 * red.k.max_abs(), || format!("{method} reduced matrix not symmetric"))?;
        ensure(k.asymmetry() <= 1e-12 * k.max_abs(), || format!("{method} K not symmetric"))?;
    }
    Ok(())
}

pub fn check_oracles(mesh: &PolygonalMesh, m: &Material) -> Check {
    let disc = Discretization::new(mesh.clone());
    let (d, dt) = (m.constitutive(), m.dtilde());
    for stab in [Stabilization::Plain, Stabilization::DTilde, Stabilization::DMuFull, Stabilization::DMuShear] {
        let k = assemble_stiffness(&disc, Method::Nvem, m, stab).unwrap().to_dense();
        let ds = stab.matrix(m, Method::Nvem);
        let naive = naive_nvem_stiffness(mesh, &d, ds.as_ref());
        let r = rel_diff(&k, &naive);
        ensure(r <= 1e-12, || format!("NVEM K ({stab}) differs from the naive oracle by {r:e}"))?;
    }
    for (e, ops) in disc.elements.iter().enumerate() {
        let x = vertices(mesh, e);
        let r = rel_diff(&ops.stiffness(&d, &dt), &oracle_vem_stiffness(&x, &d, &dt));
        ensure(r <= 1e-12, || format!("VEM K_E of element {e} differs from the oracle by {r:e}"))?;
    }
    Ok(())
}

/// Central-difference divergence of a stress field.
fn divergence(stress: &dyn Fn(&Point) -> nvem::Voigt, x: &Point, h: f64) -> Vec2 {
    let dx = |p: Point| stress(&p);
    let sx = (dx(Point::new(x.x + h, x.y)) - dx(Point::new(x.x - h, x.y))) / (2.0 * h);
    let sy = (dx(Point::new(x.x, x.y + h)) - dx(Point::new(x.x, x.y - h))) / (2.0 * h);
    Vec2::new(sx[0] + sy[2], sx[2] + sy[1])
}

/// `∇·σ = 0` for the exact solutions at a random interior point; none of
/// them carries a body force.
pub fn check_exact_equilibrium(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<(&str, ExactSolution, Point, f64)> = Vec::new();
    let p = Point::new(rng.random_range(0.1..1.9), rng.random_range(0.1..1.9));
    cases.push(("colliding flow", colliding_flow(), p, 100.0));
    let p = Point::new(rng.random_range(0.5..7.5), rng.random_range(-1.8..1.8));
    cases.push(("beam", Beam::standard(1e7, 0.3).solution().unwrap(), p, 1000.0));
    let r = rng.random_range(1.2..4.5);
    let th = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let mat = Material::plane_stress(1e5, 0.3).unwrap();
    let plate = PlateWithHole::standard(mat, Kolosov::PlaneStressForm);
    cases.push(("plate", plate.solution(), Point::new(r * th.cos(), r * th.sin()), 300.0));
    for (name, sol, x, scale) in cases {
        let s = sol.stress.clone();
        let res = divergence(&|y| s(y), &x, 1e-4);
        ensure(res.norm() <= 1e-6 * scale, || format!("{name}: |∇·σ| = {:e} at {x:?}", res.norm()))?;
    }
    Ok(())
}

pub fn check_norm_scaling(mesh: &PolygonalMesh, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.random_range(0.1..10.0);
    let m = Material::plane_strain(1.0, 0.3).unwrap();
    let disc = Discretization::new(mesh.clone());
    let exact = |k: f64| {
        ExactSolution::from_strain(
            &m,
            std::sync::Arc::new(move |p: &Point| Vec2::new(k * (p.x * p.y + 1.0), k * p.x * p.x)),
            std::sync::Arc::new(move |p: &Point| nvem::Voigt::new(k * p.y, 0.0, k * 3.0 * p.x)),
        )
    };
    let u1 = interpolate(&disc, &exact(1.0).displacement) * 1.01;
    let uc = &u1 * c;
    for method in [Method::Vem, Method::Nvem] {
        let a = error_norms(&disc, &m, &u1, &exact(1.0), method).unwrap();
        let b = error_norms(&disc, &m, &uc, &exact(c), method).unwrap();
        for (x, y) in [(a.l2_displacement, b.l2_displacement), (a.h1_seminorm, b.h1_seminorm), (a.l2_pressure, b.l2_pressure)] {
            ensure((x - y).abs() <= 1e-12 * x.abs().max(1e-300), || format!("{method}: norm {x} vs scaled {y}"))?;
            ensure(x >= 0.0, || "negative norm".into())?;
        }
    }
    Ok(())
}

