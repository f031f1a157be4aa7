//! Global numbering of stress and displacement degrees of freedom.

use crate::mesh::Triangulation;

use super::basis::LOCAL_DOFS;

/// Stress dofs: `3v + c` per vertex, then `4e + j` per edge, then `3t + c`
/// per triangle. Displacement dofs are numbered separately, `6t + m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_triangles: usize,
}

impl DofMap {
    pub fn new(mesh: &Triangulation) -> Self {
        Self {
            num_vertices: mesh.num_vertices(),
            num_edges: mesh.num_edges(),
            num_triangles: mesh.num_triangles(),
        }
    }

    pub fn vertex(&self, v: usize, c: usize) -> usize {
        3 * v + c
    }

    pub fn edge(&self, e: usize, j: usize) -> usize {
        3 * self.num_vertices + 4 * e + j
    }

    pub fn interior(&self, t: usize, c: usize) -> usize {
        3 * self.num_vertices + 4 * self.num_edges + 3 * t + c
    }

    pub fn num_stress(&self) -> usize {
        3 * self.num_vertices + 4 * self.num_edges + 3 * self.num_triangles
    }

    pub fn displacement(&self, t: usize, m: usize) -> usize {
        6 * t + m
    }

    pub fn num_displacement(&self) -> usize {
        6 * self.num_triangles
    }

    /// Stress plus displacement dofs.
    pub fn num_total(&self) -> usize {
        self.num_stress() + self.num_displacement()
    }

    /// Global stress dofs of triangle `t` in local order.
    pub fn local_stress(&self, mesh: &Triangulation, t: usize) -> [usize; LOCAL_DOFS] {
        let tri = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        let mut out = [0; LOCAL_DOFS];
        for i in 0..3 {
            for c in 0..3 {
                out[3 * i + c] = self.vertex(tri[i], c);
            }
        }
        for k in 0..3 {
            for j in 0..4 {
                out[9 + 4 * k + j] = self.edge(edges[k], j);
            }
        }
        for c in 0..3 {
            out[21 + c] = self.interior(t, c);
        }
        out
    }
}
