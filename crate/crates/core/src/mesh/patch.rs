//! Nodal patches: the elements sharing each node and the node's share of
//! their area.

use super::PolygonalMesh;
use crate::mesh::element_geometry;

#[derive(Debug, Clone, PartialEq)]
pub struct NodalPatch {
    pub node: usize,
    /// Elements containing the node, ascending.
    pub elements: Vec<usize>,
    /// Nodal area: each element gives `|E| / N_E` to every one of its nodes.
    pub area: f64,
    /// `|E| / (N_E |I|)` for each entry of `elements`.
    pub weights: Vec<f64>,
    /// Sorted union of the nodes of all patch elements.
    pub nodes: Vec<usize>,
}

impl NodalPatch {
    /// Position of global node `n` inside `nodes`.
    pub fn local_index(&self, n: usize) -> Option<usize> {
        self.nodes.binary_search(&n).ok()
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.nodes.len()
    }
}

pub fn build_patches(mesh: &PolygonalMesh) -> Vec<NodalPatch> {
    let areas: Vec<f64> = (0..mesh.num_elements())
        .map(|e| element_geometry(mesh, e).area)
        .collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_nodes()];
    for (e, ring) in mesh.elements.iter().enumerate() {
        for &v in ring {
            incident[v].push(e);
        }
    }
    incident
        .into_iter()
        .enumerate()
        .map(|(node, elements)| {
            let shares: Vec<f64> = elements
                .iter()
                .map(|&e| areas[e] / mesh.elements[e].len() as f64)
                .collect();
            let area: f64 = shares.iter().sum();
            let weights = shares.iter().map(|s| s / area).collect();
            let mut nodes: Vec<usize> = elements
                .iter()
                .flat_map(|&e| mesh.elements[e].iter().copied())
                .collect();
            nodes.push(node);
            nodes.sort_unstable();
            nodes.dedup();
            NodalPatch {
                node,
                elements,
                area,
                weights,
                nodes,
            }
        })
        .collect()
}
