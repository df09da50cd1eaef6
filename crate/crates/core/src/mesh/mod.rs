//! Polygonal meshes.
//!
//! A mesh is a list of nodes, a list of counter-clockwise vertex rings and a
//! list of tagged boundary edges. Edge `a` of an element runs from local
//! vertex `a` to local vertex `a + 1` (modulo the ring length).
//!
//! Text format (line oriented, `#` starts a comment):
//!
//! ```text
//! nodes <N>
//! x y                  (N lines)
//! elements <M>
//! k v1 ... vk          (M lines, 0-based, counter-clockwise)
//! boundary <B>         (optional section)
//! tag elem local_edge  (B lines)
//! ```

mod generate;
mod geometry;
mod patch;

pub use generate::{
    generate_structured, generate_voronoi, gunelve_cook_mesh, VoronoiSpec, gunelve_master, plate_with_hole_mesh, PlateCells, StructuredKind,
    GUNELVE_MASTER,
};
pub use geometry::{element_geometry, ElementGeometry};
pub use patch::{build_patches, NodalPatch};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::{Error, Point, Result, Vec2};

/// One tagged boundary edge: local edge `local_edge` of element `element`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub tag: String,
    pub element: usize,
    pub local_edge: usize,
}

/// Geometric data of a boundary edge as returned by [`PolygonalMesh::boundary_edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfo {
    /// Global node indices of the start and end vertex (element orientation).
    pub nodes: [usize; 2],
    pub length: f64,
    /// Unit outward normal.
    pub normal: Vec2,
}

/// Non-fatal findings reported while loading a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshWarning {
    /// The element ring was clockwise and has been reversed.
    Reoriented { element: usize },
}

impl std::fmt::Display for MeshWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshWarning::Reoriented { element } => {
                write!(f, "element {element} was clockwise and has been reoriented")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub boundary: Vec<BoundaryEdge>,
}

fn signed_area(nodes: &[Point], ring: &[usize]) -> f64 {
    let n = ring.len();
    let mut twice = 0.0;
    for a in 0..n {
        let p = nodes[ring[a]];
        let q = nodes[ring[(a + 1) % n]];
        twice += p.x * q.y - q.x * p.y;
    }
    0.5 * twice
}

impl PolygonalMesh {
    /// Builds a mesh, reorienting clockwise rings and validating the result.
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<Vec<usize>>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<(Self, Vec<MeshWarning>)> {
        let mut mesh = PolygonalMesh {
            nodes,
            elements,
            boundary,
        };
        let warnings = mesh.orient()?;
        mesh.validate()?;
        Ok((mesh, warnings))
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    /// Reverse every clockwise ring. Boundary local-edge indices are remapped
    /// so that they keep pointing at the same geometric edge.
    fn orient(&mut self) -> Result<Vec<MeshWarning>> {
        let mut warnings = Vec::new();
        for (e, ring) in self.elements.iter_mut().enumerate() {
            if ring.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} vertices (need at least 3)",
                    ring.len()
                )));
            }
            if let Some(&bad) = ring.iter().find(|&&v| v >= self.nodes.len()) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references node {bad} but the mesh has {} nodes",
                    self.nodes.len()
                )));
            }
            let area = signed_area(&self.nodes, ring);
            if area < 0.0 {
                ring.reverse();
                let k = ring.len();
                for b in self.boundary.iter_mut().filter(|b| b.element == e) {
                    b.local_edge = (2 * k - 2 - b.local_edge) % k;
                }
                warnings.push(MeshWarning::Reoriented { element: e });
            }
        }
        Ok(warnings)
    }

    /// Checks the structural invariants: rings of at least three distinct
    /// in-range vertices, strictly positive area, conforming edges and
    /// boundary records that name true boundary edges.
    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, ring) in self.elements.iter().enumerate() {
            if ring.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} vertices (need at least 3)",
                    ring.len()
                )));
            }
            for &v in ring {
                if v >= nn {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references node {v} but the mesh has {nn} nodes"
                    )));
                }
            }
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != ring.len() {
                return Err(Error::InvalidMesh(format!(
                    "element {e} repeats a vertex index"
                )));
            }
            let area = signed_area(&self.nodes, ring);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} is degenerate or clockwise (signed area {area:e})"
                )));
            }
            let k = ring.len();
            for a in 0..k {
                let key = (ring[a], ring[(a + 1) % k]);
                if let Some(other) = directed.insert(key, e) {
                    return Err(Error::InvalidMesh(format!(
                        "edge {}->{} is traversed in the same direction by elements {other} and {e}",
                        key.0, key.1
                    )));
                }
            }
        }
        for (i, b) in self.boundary.iter().enumerate() {
            let ring = self.elements.get(b.element).ok_or_else(|| {
                Error::InvalidMesh(format!(
                    "boundary record {i} references element {} of {}",
                    b.element,
                    self.elements.len()
                ))
            })?;
            if b.local_edge >= ring.len() {
                return Err(Error::InvalidMesh(format!(
                    "boundary record {i} references local edge {} of a {}-gon",
                    b.local_edge,
                    ring.len()
                )));
            }
            let (p, q) = (ring[b.local_edge], ring[(b.local_edge + 1) % ring.len()]);
            if directed.contains_key(&(q, p)) {
                return Err(Error::InvalidMesh(format!(
                    "boundary record {i} (tag `{}`) names an interior edge {p}-{q}",
                    b.tag
                )));
            }
        }
        Ok(())
    }

    /// Undirected edges that belong to exactly one element, as
    /// `(element, local_edge)` pairs.
    pub fn free_edges(&self) -> Vec<(usize, usize)> {
        let mut directed = std::collections::HashSet::new();
        for ring in &self.elements {
            let k = ring.len();
            for a in 0..k {
                directed.insert((ring[a], ring[(a + 1) % k]));
            }
        }
        let mut out = Vec::new();
        for (e, ring) in self.elements.iter().enumerate() {
            let k = ring.len();
            for a in 0..k {
                if !directed.contains(&(ring[(a + 1) % k], ring[a])) {
                    out.push((e, a));
                }
            }
        }
        out
    }

    /// Nodes lying on any free (boundary) edge, sorted.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .free_edges()
            .into_iter()
            .flat_map(|(e, a)| {
                let ring = &self.elements[e];
                [ring[a], ring[(a + 1) % ring.len()]]
            })
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = self.boundary.iter().map(|b| b.tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.boundary.iter().any(|b| b.tag == tag)
    }

    /// Boundary edges carrying `tag`, in file order. An empty tag selects
    /// nothing; a non-empty tag that does not occur is an error.
    pub fn boundary_edges(&self, tag: &str) -> Result<Vec<EdgeInfo>> {
        if tag.is_empty() {
            return Ok(Vec::new());
        }
        if !self.has_tag(tag) {
            return Err(Error::UnknownTag(tag.to_string()));
        }
        Ok(self
            .boundary
            .iter()
            .filter(|b| b.tag == tag)
            .map(|b| self.edge_info(b.element, b.local_edge))
            .collect())
    }

    pub fn edge_info(&self, element: usize, local_edge: usize) -> EdgeInfo {
        let ring = &self.elements[element];
        let p = ring[local_edge];
        let q = ring[(local_edge + 1) % ring.len()];
        let d = self.nodes[q] - self.nodes[p];
        let length = d.norm();
        EdgeInfo {
            nodes: [p, q],
            length,
            normal: Vec2::new(d.y, -d.x) / length,
        }
    }

    /// Sorted node indices on edges carrying `tag`.
    pub fn tagged_nodes(&self, tag: &str) -> Result<Vec<usize>> {
        let mut nodes: Vec<usize> = self
            .boundary_edges(tag)?
            .into_iter()
            .flat_map(|e| e.nodes)
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        Ok(nodes)
    }

    pub fn total_area(&self) -> f64 {
        self.elements
            .iter()
            .map(|ring| signed_area(&self.nodes, ring))
            .sum()
    }

    /// Largest vertex-to-vertex distance over all elements.
    pub fn max_diameter(&self) -> f64 {
        self.elements
            .iter()
            .map(|ring| {
                let mut d: f64 = 0.0;
                for (i, &a) in ring.iter().enumerate() {
                    for &b in &ring[i + 1..] {
                        d = d.max((self.nodes[a] - self.nodes[b]).norm());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    /// Index of the node closest to `p` (first one on ties).
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, x) in self.nodes.iter().enumerate() {
            let d = (x - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Uniformly scaled copy (node coordinates multiplied by `factor`).
    pub fn scaled(&self, factor: f64) -> Self {
        PolygonalMesh {
            nodes: self.nodes.iter().map(|p| Point::from(p.coords * factor)).collect(),
            elements: self.elements.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Serialises the mesh in the text format read by [`load_mesh`].
    /// Coordinates are written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.16e} {:.16e}", p.x, p.y);
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for ring in &self.elements {
            let _ = write!(s, "{}", ring.len());
            for v in ring {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        if !self.boundary.is_empty() {
            let _ = writeln!(s, "boundary {}", self.boundary.len());
            for b in &self.boundary {
                let _ = writeln!(s, "{} {} {}", b.tag, b.element, b.local_edge);
            }
        }
        s
    }
}

struct Lines<R: BufRead> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-empty line with comments stripped, tokenised.
    fn next_tokens(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<String> = content.split_whitespace().map(str::to_string).collect();
            if !tokens.is_empty() {
                return Ok(Some((self.line_no, tokens)));
            }
        }
        Ok(None)
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        self.next_tokens()?.ok_or_else(|| Error::Parse {
            line: self.line_no,
            message: format!("unexpected end of input while reading {what}"),
        })
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from `{tok}`"),
    })
}

fn parse_header(tokens: &[String], line: usize, keyword: &str) -> Result<usize> {
    if tokens.len() != 2 || tokens[0] != keyword {
        return Err(Error::Parse {
            line,
            message: format!("expected `{keyword} <count>`, found `{}`", tokens.join(" ")),
        });
    }
    parse_num(&tokens[1], line, &format!("{keyword} count"))
}

/// Reads a mesh in the text format described in the module docs.
///
/// Clockwise rings are reversed and reported as [`MeshWarning::Reoriented`].
pub fn load_mesh<R: BufRead>(source: R) -> Result<(PolygonalMesh, Vec<MeshWarning>)> {
    let mut lines = Lines {
        inner: source.lines(),
        line_no: 0,
    };

    let (ln, tokens) = lines.expect_tokens("nodes header")?;
    let n_nodes = parse_header(&tokens, ln, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let (ln, t) = lines.expect_tokens(&format!("node {i}"))?;
        if t.len() != 2 {
            return Err(Error::Parse {
                line: ln,
                message: format!("node {i}: expected 2 coordinates, found {}", t.len()),
            });
        }
        let x: f64 = parse_num(&t[0], ln, "x coordinate")?;
        let y: f64 = parse_num(&t[1], ln, "y coordinate")?;
        nodes.push(Point::new(x, y));
    }

    let (ln, tokens) = lines.expect_tokens("elements header")?;
    let n_elems = parse_header(&tokens, ln, "elements")?;
    let mut elements = Vec::with_capacity(n_elems);
    for e in 0..n_elems {
        let (ln, t) = lines.expect_tokens(&format!("element {e}"))?;
        let k: usize = parse_num(&t[0], ln, "vertex count")?;
        if t.len() != k + 1 {
            return Err(Error::Parse {
                line: ln,
                message: format!(
                    "element {e}: declared {k} vertices but found {}",
                    t.len() - 1
                ),
            });
        }
        let mut ring = Vec::with_capacity(k);
        for tok in &t[1..] {
            let v: usize = parse_num(tok, ln, "vertex index")?;
            if v >= n_nodes {
                return Err(Error::Parse {
                    line: ln,
                    message: format!(
                        "element {e}: node index {v} out of range (mesh has {n_nodes} nodes)"
                    ),
                });
            }
            ring.push(v);
        }
        elements.push(ring);
    }

    let mut boundary = Vec::new();
    if let Some((ln, tokens)) = lines.next_tokens()? {
        let n_b = parse_header(&tokens, ln, "boundary")?;
        for i in 0..n_b {
            let (ln, t) = lines.expect_tokens(&format!("boundary record {i}"))?;
            if t.len() != 3 {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("boundary record {i}: expected `tag elem local_edge`"),
                });
            }
            let element: usize = parse_num(&t[1], ln, "element index")?;
            let local_edge: usize = parse_num(&t[2], ln, "local edge")?;
            if element >= elements.len() {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("boundary record {i}: element {element} out of range"),
                });
            }
            if local_edge >= elements[element].len() {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("boundary record {i}: local edge {local_edge} out of range"),
                });
            }
            boundary.push(BoundaryEdge {
                tag: t[0].clone(),
                element,
                local_edge,
            });
        }
        if let Some((ln, t)) = lines.next_tokens()? {
            return Err(Error::Parse {
                line: ln,
                message: format!("trailing content `{}`", t.join(" ")),
            });
        }
    }

    PolygonalMesh::new(nodes, elements, boundary)
}

/// Convenience wrapper around [`load_mesh`] for a file path.
pub fn load_mesh_file(path: &std::path::Path) -> Result<(PolygonalMesh, Vec<MeshWarning>)> {
    let file = std::fs::File::open(path)?;
    load_mesh(std::io::BufReader::new(file))
}
