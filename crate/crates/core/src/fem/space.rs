use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use super::basis::{Affine, Lagrange, NodeKind};
use crate::geometry::{Mesh, Tag};

/// Uniform bucket grid over element bounding boxes.
#[derive(Debug)]
pub struct Locator {
    lo: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

impl Locator {
    fn new(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &mesh.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let ne = mesh.elements.len().max(1) as f64;
        let w = (hi[0] - lo[0]).max(1e-12);
        let h = (hi[1] - lo[1]).max(1e-12);
        let nb = (ne / 2.0).max(1.0);
        let nx = ((nb * w / h).sqrt().ceil() as usize).clamp(1, 4096);
        let ny = ((nb / nx as f64).ceil() as usize).clamp(1, 4096);
        let cell = [w / nx as f64 * (1.0 + 1e-12), h / ny as f64 * (1.0 + 1e-12)];
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, e) in mesh.elements.iter().enumerate() {
            let p = mesh.coords(e);
            let bx0 = p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
            let bx1 = p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
            let by0 = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
            let by1 = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
            let i0 = (((bx0 - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((bx1 - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let j0 = (((by0 - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((by1 - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        Locator { lo, cell, dims: [nx, ny], buckets }
    }

    /// Element containing p (tolerant), with barycentric coordinates.
    pub fn locate(&self, mesh: &Mesh, p: [f64; 2], filter: &dyn Fn(usize) -> bool) -> Option<(usize, [f64; 3])> {
        let [nx, ny] = self.dims;
        let fi = ((p[0] - self.lo[0]) / self.cell[0]).floor();
        let fj = ((p[1] - self.lo[1]) / self.cell[1]).floor();
        if fi < -1.0 || fj < -1.0 || fi > nx as f64 || fj > ny as f64 {
            return None;
        }
        let i = (fi.max(0.0) as usize).min(nx - 1);
        let j = (fj.max(0.0) as usize).min(ny - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &k in &self.buckets[j * nx + i] {
            let k = k as usize;
            if !filter(k) {
                continue;
            }
            let a = Affine::new(mesh.coords(&mesh.elements[k]));
            let l = a.bary(p);
            let m = l[0].min(l[1]).min(l[2]);
            if m >= 0.0 {
                return Some((k, l));
            }
            if best.map_or(true, |b| m > b.2) {
                best = Some((k, l, m));
            }
        }
        match best {
            Some((k, l, m)) if m > -1e-9 => Some((k, l)),
            _ => None,
        }
    }
}

/// Continuous Lagrange space of degree p on a mesh (before constraints).
#[derive(Debug)]
pub struct Space {
    pub mesh: Arc<Mesh>,
    pub elem: Lagrange,
    pub ndof: usize,
    /// Element-to-dof table, `nloc` entries per element.
    pub edofs: Vec<usize>,
    pub dof_xy: Vec<[f64; 2]>,
    edges: HashMap<(usize, usize), usize>,
    locator: OnceLock<Locator>,
}

impl Space {
    pub fn new(mesh: Arc<Mesh>, p: usize) -> Self {
        let elem = Lagrange::new(p);
        let nv = mesh.nodes.len();
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &mesh.elements {
            for k in 0..3 {
                let (a, b) = (e[k], e[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let n = edges.len();
                edges.entry(key).or_insert(n);
            }
        }
        let ne = edges.len();
        let nint = (p - 1) * p.saturating_sub(2) / 2;
        let ndof = nv + (p - 1) * ne + nint * mesh.elements.len();
        let nloc = elem.ndof();
        let mut edofs = Vec::with_capacity(nloc * mesh.elements.len());
        let mut dof_xy = vec![[0.0; 2]; ndof];
        for (k, e) in mesh.elements.iter().enumerate() {
            let aff = Affine::new(mesh.coords(e));
            for i in 0..nloc {
                let d = match elem.kind(i) {
                    NodeKind::Vertex(v) => e[v],
                    NodeKind::Edge { k: ek, s } => {
                        let (a, b) = (e[ek], e[(ek + 1) % 3]);
                        let id = edges[&(a.min(b), a.max(b))];
                        let s_from_min = if a < b { s } else { p - s };
                        nv + id * (p - 1) + s_from_min - 1
                    }
                    NodeKind::Interior(j) => nv + (p - 1) * ne + k * nint + j,
                };
                edofs.push(d);
                dof_xy[d] = aff.point(elem.node_bary(i));
            }
        }
        Space { mesh, elem, ndof, edofs, dof_xy, edges, locator: OnceLock::new() }
    }

    pub fn degree(&self) -> usize {
        self.elem.p
    }

    pub fn nloc(&self) -> usize {
        self.elem.ndof()
    }

    pub fn element_dofs(&self, k: usize) -> &[usize] {
        let n = self.nloc();
        &self.edofs[k * n..(k + 1) * n]
    }

    /// Dofs along the edge a -> b, endpoints included, in order.
    pub fn edge_dofs(&self, a: usize, b: usize) -> Vec<usize> {
        let p = self.degree();
        let nv = self.mesh.nodes.len();
        let id = self.edges[&(a.min(b), a.max(b))];
        let mut out = vec![a];
        for s in 1..p {
            let s_from_min = if a < b { s } else { p - s };
            out.push(nv + id * (p - 1) + s_from_min - 1);
        }
        out.push(b);
        out
    }

    /// All dofs lying on edges with the given tag.
    pub fn boundary_dofs(&self, tag: Tag) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.mesh.edges_with_tag(tag).iter().flat_map(|e| self.edge_dofs(e[0], e[1])).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::new(&self.mesh))
    }

    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        self.locator().locate(&self.mesh, p, &|_| true)
    }

    /// Outward unit normal of boundary edge (a, b), using the element that owns it.
    pub fn outward_normal(&self, a: usize, b: usize, owner: usize) -> [f64; 2] {
        let e = self.mesh.elements[owner];
        let c = *e.iter().find(|v| **v != a && **v != b).unwrap();
        let (pa, pb, pc) = (self.mesh.nodes[a], self.mesh.nodes[b], self.mesh.nodes[c]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        let mut n = [t[1] / len, -t[0] / len];
        if n[0] * (pc[0] - pa[0]) + n[1] * (pc[1] - pa[1]) > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }
}

/// 1D Lagrange basis on equispaced nodes j/p of [0, 1]: values and derivatives.
pub fn lagrange_1d(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..=p).map(|j| j as f64 / p as f64).collect();
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    for j in 0..=p {
        let mut val = 1.0;
        let mut der = 0.0;
        for m in 0..=p {
            if m == j {
                continue;
            }
            let f = (t - nodes[m]) / (nodes[j] - nodes[m]);
            let df = 1.0 / (nodes[j] - nodes[m]);
            der = der * f + val * df;
            val *= f;
        }
        v[j] = val;
        d[j] = der;
    }
    (v, d)
}
