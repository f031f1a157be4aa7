//! Newest-vertex bisection with closure.

use std::collections::VecDeque;

use super::{BoundaryLabel, Triangulation};

/// A refined mesh together with the parent (in the input mesh) of every triangle.
#[derive(Clone, Debug)]
pub struct Refined {
    pub mesh: Triangulation,
    pub parent: Vec<usize>,
}

impl Triangulation {
    /// Bisects every marked triangle at least once and closes the result.
    pub fn refine(&self, marked: &[usize]) -> Triangulation {
        self.refine_with_parents(marked).mesh
    }

    /// Splits every triangle into four (every edge bisected once).
    pub fn refine_uniform(&self) -> Triangulation {
        self.bisect_edges(vec![true; self.num_edges()]).mesh
    }

    pub fn refine_uniform_with_parents(&self) -> Refined {
        self.bisect_edges(vec![true; self.num_edges()])
    }

    pub fn refine_with_parents(&self, marked: &[usize]) -> Refined {
        let mut flag = vec![false; self.num_edges()];
        let mut queue = VecDeque::new();
        for &t in marked {
            let e = self.tri_edges[t][self.newest[t] as usize];
            if !flag[e] {
                flag[e] = true;
                queue.push_back(e);
            }
        }
        // Any triangle with a marked edge must also have its refinement edge marked.
        while let Some(e) = queue.pop_front() {
            let edge = &self.edges[e];
            for t in std::iter::once(edge.plus).chain(edge.minus) {
                let r = self.tri_edges[t][self.newest[t] as usize];
                if !flag[r] {
                    flag[r] = true;
                    queue.push_back(r);
                }
            }
        }
        self.bisect_edges(flag)
    }

    fn bisect_edges(&self, flag: Vec<bool>) -> Refined {
        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![usize::MAX; self.num_edges()];
        for (e, &f) in flag.iter().enumerate() {
            if f {
                let [a, b] = self.edges[e].vertices;
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                midpoint[e] = vertices.len();
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
        }

        let mut triangles = Vec::with_capacity(self.num_triangles() * 2);
        let mut newest = Vec::with_capacity(self.num_triangles() * 2);
        let mut parent = Vec::with_capacity(self.num_triangles() * 2);
        let split = |t: usize, tri: [usize; 3], slot: u8, out: &mut Vec<([usize; 3], u8, usize)>| {
            let mut stack = vec![(tri, slot)];
            while let Some((tri, slot)) = stack.pop() {
                let s = slot as usize;
                let a = tri[s];
                let b = tri[(s + 1) % 3];
                let c = tri[(s + 2) % 3];
                let mid = self
                    .find_edge(b, c)
                    .filter(|&e| flag[e])
                    .map(|e| midpoint[e]);
                match mid {
                    Some(m) => {
                        // children (a, b, m) and (a, m, c); the newest vertex is m
                        stack.push(([a, m, c], 1));
                        stack.push(([a, b, m], 2));
                    }
                    None => out.push((tri, slot, t)),
                }
            }
        };
        let mut buf = Vec::new();
        for t in 0..self.num_triangles() {
            buf.clear();
            split(t, self.triangles[t], self.newest[t], &mut buf);
            for &(tri, slot, p) in &buf {
                triangles.push(tri);
                newest.push(slot);
                parent.push(p);
            }
        }

        let mut boundary: Vec<(usize, usize, BoundaryLabel)> = Vec::new();
        for (e, edge, label) in self.boundary_edges() {
            let [a, b] = edge.vertices;
            if flag[e] {
                boundary.push((a, midpoint[e], label));
                boundary.push((midpoint[e], b, label));
            } else {
                boundary.push((a, b, label));
            }
        }
        let mesh = Triangulation::build_with_slots(vertices, triangles, newest, &boundary)
            .expect("bisection of a conforming mesh is conforming");
        Refined { mesh, parent }
    }
}
