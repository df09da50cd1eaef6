//! Built-in mesh generators.
//!
//! * `quad`: uniform `nx × ny` grid of rectangles.
//! * `distorted-quad`: the same grid with every interior node moved by
//!   `distortion · (hx, hy) · U(-1, 1)` per component (ChaCha8, seeded).
//! * `hex-dominant-poly`: a staggered brick tiling. Rows alternate between
//!   full-width cells and cells offset by half a width (with half cells at
//!   the ends). On every interior grid line the corners of the row below are
//!   pulled down and the corners of the row above are pushed up by `hy / 6`,
//!   so interior cells become convex hexagons, cells touching the top or
//!   bottom boundary become pentagons and the offset end cells are
//!   quadrilaterals or pentagons. `distortion` perturbs interior nodes as for
//!   `distorted-quad` with the horizontal amplitude scaled by `hx / 2` and the
//!   vertical one by `hy / 3`.
//!
//! All generators tag the outer edges `bottom`, `right`, `top`, `left`.

use std::collections::HashMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{load_mesh, BoundaryEdge, PolygonalMesh};
use crate::{Error, Point, Result};

/// Text of the star-and-corners master cell used for the Cook membrane.
pub const GUNELVE_MASTER: &str = include_str!("../../../../meshes/gunelve_master.msh");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    Quad,
    DistortedQuad,
    HexDominantPoly,
}

impl FromStr for StructuredKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" => Ok(StructuredKind::Quad),
            "distorted-quad" => Ok(StructuredKind::DistortedQuad),
            "hex-dominant-poly" => Ok(StructuredKind::HexDominantPoly),
            other => Err(Error::Argument(format!(
                "unknown mesh kind `{other}` (expected quad, distorted-quad or hex-dominant-poly)"
            ))),
        }
    }
}

impl std::fmt::Display for StructuredKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StructuredKind::Quad => "quad",
            StructuredKind::DistortedQuad => "distorted-quad",
            StructuredKind::HexDominantPoly => "hex-dominant-poly",
        })
    }
}

fn finish(
    nodes: Vec<Point>,
    elements: Vec<Vec<usize>>,
    boundary: Vec<BoundaryEdge>,
) -> Result<PolygonalMesh> {
    match PolygonalMesh::new(nodes, elements, boundary) {
        Ok((mesh, warnings)) if warnings.is_empty() => Ok(mesh),
        Ok((_, warnings)) => Err(Error::Generation(format!(
            "generator produced {} inverted element(s)",
            warnings.len()
        ))),
        Err(Error::InvalidMesh(msg)) => Err(Error::Generation(msg)),
        Err(e) => Err(e),
    }
}

fn edge(tag: &str, element: usize, local_edge: usize) -> BoundaryEdge {
    BoundaryEdge {
        tag: tag.to_string(),
        element,
        local_edge,
    }
}

/// Sorts boundary records into bottom, right, top, left order, keeping the
/// generation order inside each tag.
fn order_boundary(mut boundary: Vec<BoundaryEdge>) -> Vec<BoundaryEdge> {
    let rank = |t: &str| match t {
        "bottom" => 0,
        "right" => 1,
        "top" => 2,
        "left" => 3,
        _ => 4,
    };
    boundary.sort_by_key(|b| rank(&b.tag));
    boundary
}

pub fn generate_structured(
    kind: StructuredKind,
    nx: usize,
    ny: usize,
    domain: [f64; 4],
    distortion: f64,
    seed: u64,
) -> Result<PolygonalMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Argument(format!(
            "mesh divisions must be positive (got {nx} x {ny})"
        )));
    }
    let [x0, y0, x1, y1] = domain;
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::Argument(format!(
            "empty domain ({x0}, {y0}) - ({x1}, {y1})"
        )));
    }
    if !(0.0..1.0).contains(&distortion) {
        return Err(Error::Argument(format!(
            "distortion must lie in [0, 1), got {distortion}"
        )));
    }
    match kind {
        StructuredKind::Quad => quad_grid(nx, ny, domain, 0.0, seed),
        StructuredKind::DistortedQuad => quad_grid(nx, ny, domain, distortion, seed),
        StructuredKind::HexDominantPoly => brick_grid(nx, ny, domain, distortion, seed),
    }
}

fn quad_grid(
    nx: usize,
    ny: usize,
    [x0, y0, x1, y1]: [f64; 4],
    distortion: f64,
    seed: u64,
) -> Result<PolygonalMesh> {
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let mut x = x0 + i as f64 * hx;
            let mut y = y0 + j as f64 * hy;
            if i == nx {
                x = x1;
            }
            if j == ny {
                y = y1;
            }
            let interior = i > 0 && i < nx && j > 0 && j < ny;
            if interior && distortion > 0.0 {
                x += distortion * hx * rng.random_range(-1.0..1.0);
                y += distortion * hy * rng.random_range(-1.0..1.0);
            }
            nodes.push(Point::new(x, y));
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let e = elements.len();
            elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            if j == 0 {
                boundary.push(edge("bottom", e, 0));
            }
            if i == nx - 1 {
                boundary.push(edge("right", e, 1));
            }
            if j == ny - 1 {
                boundary.push(edge("top", e, 2));
            }
            if i == 0 {
                boundary.push(edge("left", e, 3));
            }
        }
    }
    finish(nodes, elements, order_boundary(boundary))
}

/// Column keys (in units of half a cell width) where cells of row `j` start
/// and end.
fn row_breaks(j: usize, nx: usize) -> Vec<usize> {
    if j % 2 == 0 {
        (0..=nx).map(|i| 2 * i).collect()
    } else {
        let mut k = vec![0];
        k.extend((0..nx).map(|i| 2 * i + 1));
        k.push(2 * nx);
        k
    }
}

/// Brick tiling in index space: cell `(i, j)` spans `[i, i + 1] × [j, j + 1]`
/// before bulging and distortion. Returns node coordinates in cell units,
/// element rings and boundary records tagged by side of the index
/// rectangle. With `top_aligned` the row parity is counted from the top so
/// that the last row is never offset.
fn brick_cells(
    nx: usize,
    ny: usize,
    top_aligned: bool,
    distortion: f64,
    seed: u64,
) -> (Vec<[f64; 2]>, Vec<Vec<usize>>, Vec<BoundaryEdge>) {
    const BULGE: f64 = 1.0 / 6.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let breaks = |j: usize| row_breaks(if top_aligned { ny - 1 - j } else { j }, nx);

    let mut nodes = Vec::new();
    // line_nodes[l] maps column key -> node index for grid line l
    let mut line_nodes: Vec<Vec<(usize, usize)>> = Vec::with_capacity(ny + 1);
    for l in 0..=ny {
        let below = if l > 0 { breaks(l - 1) } else { Vec::new() };
        let above = if l < ny { breaks(l) } else { Vec::new() };
        let mut keys: Vec<usize> = below.iter().chain(above.iter()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let interior_line = l > 0 && l < ny;
        let mut row = Vec::with_capacity(keys.len());
        for k in keys {
            let mut x = 0.5 * k as f64;
            let mut y = l as f64;
            let interior = interior_line && k > 0 && k < 2 * nx;
            if interior {
                match (below.contains(&k), above.contains(&k)) {
                    (true, false) => y -= BULGE,
                    (false, true) => y += BULGE,
                    _ => {}
                }
                if distortion > 0.0 {
                    x += distortion * 0.5 * rng.random_range(-1.0..1.0);
                    y += distortion / 3.0 * rng.random_range(-1.0..1.0);
                }
            }
            row.push((k, nodes.len()));
            nodes.push([x, y]);
        }
        line_nodes.push(row);
    }

    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..ny {
        for w in breaks(j).windows(2) {
            let (ka, kb) = (w[0], w[1]);
            let bottom: Vec<usize> = line_nodes[j]
                .iter()
                .filter(|(k, _)| (ka..=kb).contains(k))
                .map(|&(_, n)| n)
                .collect();
            let top: Vec<usize> = line_nodes[j + 1]
                .iter()
                .rev()
                .filter(|(k, _)| (ka..=kb).contains(k))
                .map(|&(_, n)| n)
                .collect();
            let nb = bottom.len();
            let e = elements.len();
            let mut ring = bottom;
            ring.extend(top);
            let n = ring.len();
            if j == 0 {
                boundary.extend((0..nb - 1).map(|a| edge("bottom", e, a)));
            }
            if kb == 2 * nx {
                boundary.push(edge("right", e, nb - 1));
            }
            if j == ny - 1 {
                boundary.extend((nb..n - 1).rev().map(|a| edge("top", e, a)));
            }
            if ka == 0 {
                boundary.push(edge("left", e, n - 1));
            }
            elements.push(ring);
        }
    }
    (nodes, elements, boundary)
}

fn brick_grid(
    nx: usize,
    ny: usize,
    [x0, y0, x1, y1]: [f64; 4],
    distortion: f64,
    seed: u64,
) -> Result<PolygonalMesh> {
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let (cells, elements, boundary) = brick_cells(nx, ny, false, distortion, seed);
    let nodes = cells
        .iter()
        .map(|&[i, j]| {
            let x = if i == nx as f64 { x1 } else { x0 + i * hx };
            let y = if j == ny as f64 { y1 } else { y0 + j * hy };
            Point::new(x, y)
        })
        .collect();
    finish(nodes, elements, order_boundary(boundary))
}

/// Parameters of [`generate_voronoi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiSpec {
    /// Number of random sites.
    pub sites: usize,
    /// Lloyd relaxation sweeps.
    pub lloyd: usize,
    /// Vertices closer than `merge` times the mean site spacing are fused.
    pub merge: f64,
    /// Mirror every site through the domain centre, which makes the mesh
    /// symmetric under a half turn.
    pub point_symmetric: bool,
}

impl VoronoiSpec {
    pub fn new(sites: usize) -> Self {
        VoronoiSpec {
            sites,
            lloyd: 2,
            merge: 0.05,
            point_symmetric: false,
        }
    }
}

/// Clipped Voronoi tessellation of `[x0, y0, x1, y1]` from random sites
/// (ChaCha8, seeded).
///
/// Fused vertices on the box keep their position on it. Outer edges are
/// tagged `bottom`, `right`, `top`, `left`.
pub fn generate_voronoi(spec: &VoronoiSpec, domain: [f64; 4], seed: u64) -> Result<PolygonalMesh> {
    let [x0, y0, x1, y1] = domain;
    let VoronoiSpec {
        sites,
        lloyd,
        merge,
        point_symmetric,
    } = *spec;
    if sites < 2 {
        return Err(Error::Argument(format!("a Voronoi mesh needs at least 2 sites, got {sites}")));
    }
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::Argument(format!("empty domain ({x0}, {y0}) - ({x1}, {y1})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn = if point_symmetric { sites / 2 } else { sites };
    let mut points: Vec<voronoice::Point> = (0..drawn)
        .map(|_| voronoice::Point {
            x: rng.random_range(x0..x1),
            y: rng.random_range(y0..y1),
        })
        .collect();
    if point_symmetric {
        let mirrored: Vec<_> = points
            .iter()
            .map(|p| voronoice::Point {
                x: x0 + x1 - p.x,
                y: y0 + y1 - p.y,
            })
            .collect();
        points.extend(mirrored);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let build = |sweeps: usize| {
        voronoice::VoronoiBuilder::default()
            .set_sites(points.clone())
            .set_bounding_box(voronoice::BoundingBox::new(
                voronoice::Point {
                    x: 0.5 * (x0 + x1),
                    y: 0.5 * (y0 + y1),
                },
                w,
                h,
            ))
            .set_clip_behavior(voronoice::ClipBehavior::Clip)
            .set_lloyd_relaxation_iterations(sweeps)
            .build()
    };
    // Relaxing a handful of sites can collapse them onto a line; fall back
    // to fewer sweeps.
    let voronoi = (0..=lloyd)
        .rev()
        .find_map(build)
        .ok_or_else(|| Error::Generation("Voronoi construction failed".into()))?;

    let scale = w.max(h);
    let snap_tol = 1e-9 * scale;
    let snap = |v: f64, a: f64, b: f64| {
        if (v - a).abs() < snap_tol {
            a
        } else if (v - b).abs() < snap_tol {
            b
        } else {
            v
        }
    };
    let side = |p: &Point| -> u8 {
        (p.y == y0) as u8 | ((p.x == x1) as u8) << 1 | ((p.y == y1) as u8) << 2 | ((p.x == x0) as u8) << 3
    };

    // Clipped vertices are computed once per cell, so copies of one vertex
    // can differ by more than rounding when cell edges are nearly parallel.
    let same_tol = 1e-6 * scale;
    let mut nodes: Vec<Point> = Vec::new();
    let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for cell in voronoi.cells() {
        let mut ring = Vec::with_capacity(cell.len());
        for &v in cell {
            let q = &voronoi.vertices()[v];
            let p = Point::new(snap(q.x, x0, x1), snap(q.y, y0, y1));
            let key = ((p.x / same_tol).floor() as i64, (p.y / same_tol).floor() as i64);
            let found = (-1..=1)
                .flat_map(|dx| (-1..=1).map(move |dy| (key.0 + dx, key.1 + dy)))
                .filter_map(|k| index.get(&k))
                .flatten()
                .copied()
                .find(|&i| (nodes[i] - p).norm() <= same_tol);
            let id = found.unwrap_or_else(|| {
                nodes.push(p);
                index.entry(key).or_default().push(nodes.len() - 1);
                nodes.len() - 1
            });
            if ring.last() != Some(&id) {
                ring.push(id);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        rings.push(ring);
    }

    // fuse short edges
    let tol = merge * (w * h / sites as f64).sqrt();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for ring in &rings {
        for a in 0..ring.len() {
            let (i, j) = (ring[a], ring[(a + 1) % ring.len()]);
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            if ri == rj || (nodes[ri] - nodes[rj]).norm() >= tol {
                continue;
            }
            let (si, sj) = (side(&nodes[ri]), side(&nodes[rj]));
            let mid = Point::from((nodes[ri].coords + nodes[rj].coords) * 0.5);
            let p = match (si, sj) {
                (0, 0) => mid,
                (_, 0) => nodes[ri],
                (0, _) => nodes[rj],
                _ if si & sj == 0 => continue,
                _ if si.count_ones() > 1 => nodes[ri],
                _ if sj.count_ones() > 1 => nodes[rj],
                _ => mid,
            };
            nodes[ri] = p;
            parent[rj] = ri;
        }
    }
    let mut renumber = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for i in 0..nodes.len() {
        let r = root(&mut parent, i);
        if renumber[r] == usize::MAX {
            renumber[r] = kept.len();
            kept.push(nodes[r]);
        }
        renumber[i] = renumber[r];
    }
    let mut elements = Vec::with_capacity(rings.len());
    for ring in rings {
        let mut out: Vec<usize> = Vec::with_capacity(ring.len());
        for v in ring.into_iter().map(|v| renumber[v]) {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        while out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        if out.len() < 3 {
            return Err(Error::Generation("a Voronoi cell collapsed while fusing short edges".into()));
        }
        let signed: f64 = (0..out.len())
            .map(|a| {
                let (p, q) = (kept[out[a]], kept[out[(a + 1) % out.len()]]);
                p.x * q.y - q.x * p.y
            })
            .sum();
        if signed < 0.0 {
            out.reverse();
        }
        elements.push(out);
    }

    let mut boundary = Vec::new();
    for (e, ring) in elements.iter().enumerate() {
        for a in 0..ring.len() {
            let common = side(&kept[ring[a]]) & side(&kept[ring[(a + 1) % ring.len()]]);
            let tag = match common {
                1 => "bottom",
                2 => "right",
                4 => "top",
                8 => "left",
                _ => continue,
            };
            boundary.push(edge(tag, e, a));
        }
    }
    finish(kept, elements, order_boundary(boundary))
}

/// Cell layout of [`plate_with_hole_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateCells {
    Quad,
    /// Brick tiling in (angular, radial) index space, as for
    /// `hex-dominant-poly`.
    HexDominant,
}

/// Quarter of a square plate `[0, 5]²` with a unit circular hole at the
/// origin.
///
/// `n` cells span each half of the quarter circle (`2n` around the rim) and
/// `nr` cells run from the rim to the outer edges. Radial spacing is graded
/// towards the hole with parameter `t = (j / nr)^grading`. Rim nodes lie on
/// the circle. With `distortion > 0` interior nodes are shifted in the
/// (angular, radial) index space by up to `distortion` of a cell.
///
/// Tags: `bottom` (y = 0), `right` (x = 5), `top` (y = 5), `left` (x = 0),
/// `hole`.
pub fn plate_with_hole_mesh(
    cells: PlateCells,
    n: usize,
    nr: usize,
    grading: f64,
    distortion: f64,
    seed: u64,
) -> Result<PolygonalMesh> {
    const R0: f64 = 1.0;
    const A: f64 = 5.0;
    if n == 0 || nr == 0 {
        return Err(Error::Argument("plate mesh needs n, nr >= 1".into()));
    }
    if !(0.0..0.5).contains(&distortion) {
        return Err(Error::Argument(format!(
            "plate distortion must lie in [0, 0.5), got {distortion}"
        )));
    }
    let na = 2 * n;
    let rim = |s: f64| {
        let th = s / na as f64 * std::f64::consts::FRAC_PI_2;
        Point::new(R0 * th.cos(), R0 * th.sin())
    };
    let outer = |s: f64| {
        if s <= n as f64 {
            Point::new(A, A * s / n as f64)
        } else {
            Point::new(A * (na as f64 - s) / n as f64, A)
        }
    };
    let map = |s: f64, u: f64| {
        if u == 0.0 {
            rim(s)
        } else if u == nr as f64 {
            outer(s)
        } else {
            let t = (u / nr as f64).powf(grading);
            let (a, b) = (rim(s), outer(s));
            Point::from(a.coords + (b - a) * t)
        }
    };
    let (index, elements, boundary) = match cells {
        PlateCells::Quad => quad_cells(na, nr, distortion, seed),
        PlateCells::HexDominant => brick_cells(na, nr, true, distortion, seed),
    };
    let mut nodes: Vec<Point> = index.iter().map(|&[s, u]| map(s, u)).collect();
    for (p, &[s, u]) in nodes.iter_mut().zip(&index) {
        // exact corner coordinates
        match (s, u) {
            (s, u) if s == 0.0 && u == 0.0 => *p = Point::new(R0, 0.0),
            (s, u) if s == na as f64 && u == 0.0 => *p = Point::new(0.0, R0),
            (s, u) if s == n as f64 && u == nr as f64 => *p = Point::new(A, A),
            _ => {}
        }
    }
    let boundary = boundary
        .into_iter()
        .map(|b| {
            let ring = &elements[b.element];
            let (a, c) = (ring[b.local_edge], ring[(b.local_edge + 1) % ring.len()]);
            let tag = match b.tag.as_str() {
                "left" => "bottom",
                "right" => "left",
                "bottom" => "hole",
                _ if index[a][0] + index[c][0] <= na as f64 => "right",
                _ => "top",
            };
            // index space maps onto the plate with reversed orientation
            let k = ring.len();
            edge(tag, b.element, (2 * k - 2 - b.local_edge) % k)
        })
        .collect();
    let elements = elements
        .into_iter()
        .map(|mut r| {
            r.reverse();
            r
        })
        .collect();
    finish(nodes, elements, order_boundary(boundary))
}

/// `nx × ny` quadrilateral cells in index space with interior nodes moved
/// by up to `distortion` of a cell.
fn quad_cells(nx: usize, ny: usize, distortion: f64, seed: u64) -> (Vec<[f64; 2]>, Vec<Vec<usize>>, Vec<BoundaryEdge>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let (mut x, mut y) = (i as f64, j as f64);
            if i > 0 && i < nx && j > 0 && j < ny && distortion > 0.0 {
                x += distortion * rng.random_range(-1.0..1.0);
                y += distortion * rng.random_range(-1.0..1.0);
            }
            nodes.push([x, y]);
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let e = elements.len();
            elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            if j == 0 {
                boundary.push(edge("bottom", e, 0));
            }
            if i == nx - 1 {
                boundary.push(edge("right", e, 1));
            }
            if j == ny - 1 {
                boundary.push(edge("top", e, 2));
            }
            if i == 0 {
                boundary.push(edge("left", e, 3));
            }
        }
    }
    (nodes, elements, boundary)
}

/// The checked-in master cell (unit square, 5 polygons, 20 nodes).
pub fn gunelve_master() -> PolygonalMesh {
    load_mesh(GUNELVE_MASTER.as_bytes())
        .expect("checked-in master mesh is valid")
        .0
}

/// `n × n` copies of the master cell mapped bilinearly onto the Cook
/// membrane with corners (0,0), (48,44), (48,60), (0,44).
pub fn gunelve_cook_mesh(n: usize) -> Result<PolygonalMesh> {
    if n == 0 {
        return Err(Error::Argument("tiling count must be positive".into()));
    }
    let master = gunelve_master();
    let on_side = |p: &Point| p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
    let nf = n as f64;
    let mut nodes: Vec<Point> = Vec::new();
    let mut shared: HashMap<(i64, i64), usize> = HashMap::new();
    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    for tj in 0..n {
        for ti in 0..n {
            let local: Vec<usize> = master
                .nodes
                .iter()
                .map(|p| {
                    let xi = (ti as f64 + p.x) / nf;
                    let eta = (tj as f64 + p.y) / nf;
                    let mapped = Point::new(48.0 * xi, 44.0 * xi + eta * (44.0 - 28.0 * xi));
                    if on_side(p) {
                        let key = (
                            (2.0 * (ti as f64 + p.x)).round() as i64,
                            (2.0 * (tj as f64 + p.y)).round() as i64,
                        );
                        *shared.entry(key).or_insert_with(|| {
                            nodes.push(mapped);
                            nodes.len() - 1
                        })
                    } else {
                        nodes.push(mapped);
                        nodes.len() - 1
                    }
                })
                .collect();
            let base = elements.len();
            for ring in &master.elements {
                elements.push(ring.iter().map(|&v| local[v]).collect::<Vec<_>>());
            }
            for b in &master.boundary {
                let keep = match b.tag.as_str() {
                    "bottom" => tj == 0,
                    "top" => tj == n - 1,
                    "left" => ti == 0,
                    "right" => ti == n - 1,
                    _ => false,
                };
                if keep {
                    boundary.push(edge(&b.tag, base + b.element, b.local_edge));
                }
            }
        }
    }
    finish(nodes, elements, order_boundary(boundary))
}
