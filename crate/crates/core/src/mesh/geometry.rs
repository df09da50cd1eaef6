//! Per-element geometric quantities.

use crate::{Point, Vec2};

use super::PolygonalMesh;

/// Geometry of one polygon. `center` is the mean of the vertices, not the
/// area centroid. Edge `a` joins vertex `a` to vertex `a + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<Point>,
    pub area: f64,
    pub center: Point,
    pub edge_lengths: Vec<f64>,
    pub edge_normals: Vec<Vec2>,
}

impl ElementGeometry {
    pub fn from_vertices(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let mut twice = 0.0;
        let mut sum = Vec2::zeros();
        let mut edge_lengths = Vec::with_capacity(n);
        let mut edge_normals = Vec::with_capacity(n);
        for a in 0..n {
            let p = vertices[a];
            let q = vertices[(a + 1) % n];
            twice += p.x * q.y - q.x * p.y;
            sum += p.coords;
            let d = q - p;
            let len = d.norm();
            edge_lengths.push(len);
            edge_normals.push(Vec2::new(d.y, -d.x) / len);
        }
        ElementGeometry {
            area: 0.5 * twice,
            center: Point::from(sum / n as f64),
            vertices,
            edge_lengths,
            edge_normals,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }
}

pub fn element_geometry(mesh: &PolygonalMesh, element: usize) -> ElementGeometry {
    ElementGeometry::from_vertices(
        mesh.elements[element]
            .iter()
            .map(|&v| mesh.nodes[v])
            .collect(),
    )
}
