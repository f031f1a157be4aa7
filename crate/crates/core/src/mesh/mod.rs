//! Conforming triangulations with labelled boundaries.
//!
//! Triangles are stored counterclockwise together with the slot of their
//! newest vertex, which drives newest-vertex bisection. Edges are derived on
//! construction; the first triangle that lists an edge is `T₊` and the edge
//! normal points out of it (outward on the boundary).

mod io;
mod refine;

use std::collections::HashMap;

use thiserror::Error;

pub use io::{read_mesh, write_mesh};
pub use refine::Refined;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {vertex} (only {count} vertices)")]
    InvalidVertex { triangle: usize, vertex: usize, count: usize },
    #[error("triangle {0} is not counterclockwise or is degenerate")]
    InvertedTriangle(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("boundary edge ({0}, {1}) has no boundary label")]
    UnlabeledBoundaryEdge(usize, usize),
    #[error("label given for ({0}, {1}) which is not a boundary edge")]
    LabelOnNonBoundaryEdge(usize, usize),
    #[error("refinement slot {slot} of triangle {triangle} is out of range")]
    InvalidRefinementSlot { triangle: usize, slot: u8 },
    #[error("projection onto the curved boundary inverts triangle {0}")]
    ProjectionInverts(usize),
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh i/o: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Boundary condition type plus the id of the geometric segment the edge lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryLabel {
    pub kind: BoundaryKind,
    pub segment: u32,
}

impl BoundaryLabel {
    pub const fn dirichlet(segment: u32) -> Self {
        Self {
            kind: BoundaryKind::Dirichlet,
            segment,
        }
    }

    pub const fn neumann(segment: u32) -> Self {
        Self {
            kind: BoundaryKind::Neumann,
            segment,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        self.kind == BoundaryKind::Dirichlet
    }

    pub fn is_neumann(&self) -> bool {
        self.kind == BoundaryKind::Neumann
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Start and end vertex; `end - start` points along the tangent.
    pub vertices: [usize; 2],
    /// The triangle the normal points out of.
    pub plus: usize,
    pub minus: Option<usize>,
    pub label: Option<BoundaryLabel>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.minus.is_some()
    }

    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// Unit normal and tangent of an edge with `tau = (0,−1; 1,0) nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFrame {
    pub nu: [f64; 2],
    pub tau: [f64; 2],
    pub h: f64,
    pub mid: [f64; 2],
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl EdgeFrame {
    pub fn from_points(start: [f64; 2], end: [f64; 2]) -> Self {
        let d = [end[0] - start[0], end[1] - start[1]];
        let h = d[0].hypot(d[1]);
        let nu = [d[1] / h, -d[0] / h];
        let tau = [-nu[1], nu[0]];
        Self {
            nu,
            tau,
            h,
            mid: [0.5 * (start[0] + end[0]), 0.5 * (start[1] + end[1])],
            start,
            end,
        }
    }

    /// Point at arclength fraction `t ∈ [0, 1]` from the start.
    pub fn point(&self, t: f64) -> [f64; 2] {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    newest: Vec<u8>,
    edges: Vec<Edge>,
    /// Local edge `k` is opposite local vertex `k`.
    tri_edges: Vec<[usize; 3]>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Triangulation {
    /// Builds a triangulation; the refinement vertex of each triangle is the
    /// one opposite its longest edge.
    pub fn build(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: &[(usize, usize, BoundaryLabel)],
    ) -> Result<Self, MeshError> {
        let mut newest = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::InvalidVertex {
                        triangle: t,
                        vertex: v,
                        count: vertices.len(),
                    });
                }
            }
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let lens = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
            let mut best = 0;
            for k in 1..3 {
                if lens[k] > lens[best] * (1.0 + 1e-12) {
                    best = k;
                }
            }
            newest.push(best as u8);
        }
        Self::build_with_slots(vertices, triangles, newest, boundary)
    }

    /// Builds a triangulation with explicit refinement-vertex slots.
    pub fn build_with_slots(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        newest: Vec<u8>,
        boundary: &[(usize, usize, BoundaryLabel)],
    ) -> Result<Self, MeshError> {
        assert_eq!(newest.len(), triangles.len(), "one refinement slot per triangle");
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut edge_lookup = HashMap::with_capacity(triangles.len() * 3 / 2 + 8);
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::InvalidVertex {
                        triangle: t,
                        vertex: v,
                        count: vertices.len(),
                    });
                }
            }
            if newest[t] > 2 {
                return Err(MeshError::InvalidRefinementSlot {
                    triangle: t,
                    slot: newest[t],
                });
            }
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let area = signed_area(&p);
            let scale = dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]));
            if !(area > 1e-14 * scale * scale) {
                return Err(MeshError::InvertedTriangle(t));
            }
            let mut te = [0; 3];
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                match edge_lookup.get(&key(a, b)) {
                    Some(&e) => {
                        let edge: &mut Edge = &mut edges[e];
                        if edge.minus.is_some() {
                            return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b)));
                        }
                        edge.minus = Some(t);
                        te[k] = e;
                    }
                    None => {
                        let e = edges.len();
                        edges.push(Edge {
                            vertices: [a, b],
                            plus: t,
                            minus: None,
                            label: None,
                        });
                        edge_lookup.insert(key(a, b), e);
                        te[k] = e;
                    }
                }
            }
            tri_edges.push(te);
        }
        for &(a, b, label) in boundary {
            match edge_lookup.get(&key(a, b)) {
                Some(&e) if edges[e].minus.is_none() => edges[e].label = Some(label),
                _ => return Err(MeshError::LabelOnNonBoundaryEdge(a, b)),
            }
        }
        if let Some(e) = edges.iter().find(|e| e.minus.is_none() && e.label.is_none()) {
            return Err(MeshError::UnlabeledBoundaryEdge(e.vertices[0], e.vertices[1]));
        }
        Ok(Self {
            vertices,
            triangles,
            newest,
            edges,
            tri_edges,
            edge_lookup,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Edge ids of a triangle; entry `k` is the edge opposite local vertex `k`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn refinement_slot(&self, t: usize) -> u8 {
        self.newest[t]
    }

    pub fn refinement_slots(&self) -> &[u8] {
        &self.newest
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_points(t))
    }

    /// Diameter (longest edge) of a triangle.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let p = self.triangle_points(t);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    pub fn h_max(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    pub fn edge_frame(&self, e: usize) -> EdgeFrame {
        let [a, b] = self.edges[e].vertices;
        EdgeFrame::from_points(self.vertices[a], self.vertices[b])
    }

    /// `+1` if the edge normal is the outward normal of `t`, `−1` otherwise.
    pub fn edge_sign(&self, e: usize, t: usize) -> f64 {
        if self.edges[e].plus == t {
            1.0
        } else {
            -1.0
        }
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge, BoundaryLabel)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.label.map(|l| (i, e, l)))
    }

    /// Boundary edges in the `(a, b, label)` form accepted by [`Triangulation::build`].
    pub fn boundary_spec(&self) -> Vec<(usize, usize, BoundaryLabel)> {
        self.boundary_edges()
            .map(|(_, e, l)| (e.vertices[0], e.vertices[1], l))
            .collect()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.boundary_edges().any(|(_, _, l)| l.is_dirichlet())
    }

    /// `#V − #E + #T`, which is 1 for a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| triangle_min_angle(&self.triangle_points(t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Replaces vertex coordinates; fails if a triangle would invert.
    fn with_vertices(&self, vertices: Vec<[f64; 2]>) -> Result<Self, MeshError> {
        let mut out = self.clone();
        out.vertices = vertices;
        for t in 0..out.num_triangles() {
            if !(out.area(t) > 0.0) {
                return Err(MeshError::ProjectionInverts(t));
            }
        }
        Ok(out)
    }

    /// Moves every vertex of the curve's boundary edges onto the curve.
    ///
    /// Vertices already on the curve are left alone, so repeated calls after
    /// each refinement only move the newly created midpoints.
    pub fn project_boundary(&self, curve: &dyn BoundaryCurve) -> Result<Self, MeshError> {
        let mut vertices = self.vertices.clone();
        let mut moved = false;
        for (_, e, label) in self.boundary_edges() {
            if label.segment != curve.segment() {
                continue;
            }
            for &v in &e.vertices {
                let p = curve.project(self.vertices[v]);
                if dist(p, self.vertices[v]) > 0.0 {
                    vertices[v] = p;
                    moved = true;
                }
            }
        }
        if !moved {
            return Ok(self.clone());
        }
        self.with_vertices(vertices)
    }
}

pub fn triangle_min_angle(p: &[[f64; 2]; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..3 {
        let a = p[k];
        let b = p[(k + 1) % 3];
        let c = p[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        best = best.min(cross.abs().atan2(dot));
    }
    best
}

/// A curved piece of boundary that new boundary vertices are snapped onto.
pub trait BoundaryCurve: Send + Sync {
    /// Segment id of the boundary edges lying on this curve.
    fn segment(&self) -> u32;
    fn project(&self, x: [f64; 2]) -> [f64; 2];
}

/// Circular arc; projection is radial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleArc {
    pub center: [f64; 2],
    pub radius: f64,
    pub segment: u32,
}

impl BoundaryCurve for CircleArc {
    fn segment(&self) -> u32 {
        self.segment
    }

    fn project(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let r = d[0].hypot(d[1]);
        if (r - self.radius).abs() <= 1e-15 * self.radius {
            return x;
        }
        [self.center[0] + self.radius * d[0] / r, self.center[1] + self.radius * d[1] / r]
    }
}
