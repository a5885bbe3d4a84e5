use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::spec::Tag;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BEdge {
    pub n: [usize; 2],
    pub tag: Tag,
}

/// Triangulation with tagged boundary edges. Elements are counter-clockwise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 3]>,
    pub bedges: Vec<BEdge>,
    pub corner_nodes: Vec<usize>,
}

pub fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl Mesh {
    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| tri_area(self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]])).sum()
    }

    pub fn coords(&self, e: &[usize; 3]) -> [[f64; 2]; 3] {
        [self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]]]
    }

    pub fn max_edge(&self, e: &[usize; 3]) -> f64 {
        let p = self.coords(e);
        (0..3)
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % 3]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        self.elements
            .iter()
            .flat_map(|e| {
                let p = self.coords(e);
                (0..3).map(move |i| {
                    let (a, b) = (p[i], p[(i + 1) % 3]);
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                })
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn element_min_angle(&self, e: &[usize; 3]) -> f64 {
        let p = self.coords(e);
        (0..3)
            .map(|i| {
                let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cr = u[0] * v[1] - u[1] * v[0];
                let dt = u[0] * v[0] + u[1] * v[1];
                cr.abs().atan2(dt)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.elements.iter().map(|e| self.element_min_angle(e)).fold(f64::INFINITY, f64::min).to_degrees()
    }

    /// Make every element counter-clockwise.
    pub fn orient_boundary(&mut self) {
        for e in self.elements.iter_mut() {
            if tri_area(self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]]) < 0.0 {
                e.swap(1, 2);
            }
        }
    }

    pub fn check_quality(&self, min_angle_rad: f64) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            let a = tri_area(self.nodes[e[0]], self.nodes[e[1]], self.nodes[e[2]]);
            if !(a > 0.0) || self.element_min_angle(e) < min_angle_rad {
                return Err(Error::MeshFailure(format!(
                    "sliver element {i} at ({:.6}, {:.6}), min angle {:.3e} rad",
                    self.nodes[e[0]][0],
                    self.nodes[e[0]][1],
                    self.element_min_angle(e)
                )));
            }
        }
        Ok(())
    }

    /// Undirected edges with the elements that use them.
    pub fn edge_map(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, e) in self.elements.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (e[i], e[(i + 1) % 3]);
                m.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        m
    }

    pub fn edges_with_tag(&self, tag: Tag) -> Vec<[usize; 2]> {
        self.bedges.iter().filter(|b| b.tag == tag).map(|b| b.n).collect()
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.bedges.iter().any(|b| b.tag == tag)
    }

    /// Number of connected components of the element adjacency graph.
    pub fn components(&self) -> usize {
        let em = self.edge_map();
        let mut parent: Vec<usize> = (0..self.elements.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut j = i;
            while p[j] != r {
                let n = p[j];
                p[j] = r;
                j = n;
            }
            r
        }
        for els in em.values() {
            if els.len() == 2 {
                let (a, b) = (find(&mut parent, els[0]), find(&mut parent, els[1]));
                parent[a] = b;
            }
        }
        (0..self.elements.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Double the nodes on the `Interface` edges (which must lie on x2 = y0): elements
    /// below keep copies. Tags become GammaInterface_top / GammaInterface_bottom.
    pub fn split_interface(&mut self, y0: f64) -> Result<()> {
        let iface: Vec<[usize; 2]> = self.edges_with_tag(Tag::Interface);
        if iface.is_empty() {
            return Err(Error::MissingInterface);
        }
        let on: HashSet<usize> = iface.iter().flat_map(|e| e.iter().copied()).collect();
        let mut copy: HashMap<usize, usize> = HashMap::new();
        let mut sorted: Vec<usize> = on.iter().copied().collect();
        sorted.sort_unstable();
        for v in sorted {
            copy.insert(v, self.nodes.len());
            self.nodes.push(self.nodes[v]);
        }
        for k in 0..self.elements.len() {
            let e = self.elements[k];
            let p = self.coords(&e);
            let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            if cy < y0 {
                for v in self.elements[k].iter_mut() {
                    if let Some(&c) = copy.get(v) {
                        *v = c;
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.bedges.len() + iface.len());
        for b in &self.bedges {
            if b.tag == Tag::Interface {
                out.push(BEdge { n: b.n, tag: Tag::GammaInterface_top });
                out.push(BEdge { n: [copy[&b.n[0]], copy[&b.n[1]]], tag: Tag::GammaInterface_bottom });
                continue;
            }
            let my = 0.5 * (self.nodes[b.n[0]][1] + self.nodes[b.n[1]][1]);
            if my < y0 - 1e-14 && b.n.iter().any(|v| copy.contains_key(v)) {
                let n = b.n.map(|v| *copy.get(&v).unwrap_or(&v));
                out.push(BEdge { n, tag: b.tag });
            } else {
                out.push(*b);
            }
        }
        self.bedges = out;
        let extra: Vec<usize> = self.corner_nodes.iter().filter_map(|v| copy.get(v).copied()).collect();
        self.corner_nodes.extend(extra);
        Ok(())
    }

    /// Pairs (top node, bottom node) of coincident interface nodes.
    pub fn interface_pairs(&self) -> Vec<(usize, usize)> {
        let top: HashSet<usize> =
            self.edges_with_tag(Tag::GammaInterface_top).into_iter().flat_map(|e| e.into_iter()).collect();
        let bot: HashSet<usize> =
            self.edges_with_tag(Tag::GammaInterface_bottom).into_iter().flat_map(|e| e.into_iter()).collect();
        let mut by_pos: HashMap<(u64, u64), usize> = HashMap::new();
        for &b in &bot {
            let p = self.nodes[b];
            by_pos.insert((p[0].to_bits(), p[1].to_bits()), b);
        }
        let mut out: Vec<(usize, usize)> = top
            .iter()
            .filter_map(|&t| {
                let p = self.nodes[t];
                by_pos.get(&(p[0].to_bits(), p[1].to_bits())).map(|&b| (t, b))
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn write_string(&self) -> String {
        let mut s = String::new();
        s.push_str("thinwall-mesh v1\n");
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(s, "{} {:.16e} {:.16e}", i, p[0], p[1]).unwrap();
        }
        writeln!(s, "elements {}", self.elements.len()).unwrap();
        for (i, e) in self.elements.iter().enumerate() {
            writeln!(s, "{} {} {} {}", i, e[0], e[1], e[2]).unwrap();
        }
        writeln!(s, "bedges {}", self.bedges.len()).unwrap();
        for (i, b) in self.bedges.iter().enumerate() {
            writeln!(s, "{} {} {} {}", i, b.n[0], b.n[1], b.tag).unwrap();
        }
        if !self.corner_nodes.is_empty() {
            writeln!(s, "corners {}", self.corner_nodes.len()).unwrap();
            for (i, c) in self.corner_nodes.iter().enumerate() {
                writeln!(s, "{} {}", i, c).unwrap();
            }
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.write_string())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: &str| Error::ParseError { line, msg: msg.to_string() };
        let (ln, head) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        if head != "thinwall-mesh v1" {
            return Err(err(ln, "bad header"));
        }
        let mut mesh = Mesh::default();
        let mut seen_sections = HashSet::new();
        while let Some((ln, l)) = lines.next() {
            let mut it = l.split_whitespace();
            let sec = it.next().unwrap();
            let count: usize = it.next().and_then(|c| c.parse().ok()).ok_or_else(|| err(ln, "bad section count"))?;
            if !seen_sections.insert(sec.to_string()) {
                return Err(err(ln, "duplicate section"));
            }
            let mut ids = HashSet::new();
            for k in 0..count {
                let (ln, row) = lines.next().ok_or_else(|| err(ln, "unexpected end of file"))?;
                let f: Vec<&str> = row.split_whitespace().collect();
                let id: usize = f.first().and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad id"))?;
                if !ids.insert(id) {
                    return Err(err(ln, &format!("duplicate {sec} id {id}")));
                }
                if id != k {
                    return Err(err(ln, "ids must be consecutive from 0"));
                }
                let num = |i: usize| -> Result<usize> {
                    f.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad index"))
                };
                match sec {
                    "nodes" => {
                        let x: f64 = f.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad x"))?;
                        let y: f64 = f.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad y"))?;
                        mesh.nodes.push([x, y]);
                    }
                    "elements" => mesh.elements.push([num(1)?, num(2)?, num(3)?]),
                    "bedges" => {
                        let tag: Tag =
                            f.get(3).ok_or_else(|| err(ln, "missing tag"))?.parse().map_err(|_| err(ln, "unknown tag"))?;
                        mesh.bedges.push(BEdge { n: [num(1)?, num(2)?], tag });
                    }
                    "corners" => mesh.corner_nodes.push(num(1)?),
                    _ => return Err(err(ln, "unknown section")),
                }
            }
        }
        let nn = mesh.nodes.len();
        let bad = mesh.elements.iter().flat_map(|e| e.iter()).chain(mesh.bedges.iter().flat_map(|b| b.n.iter()));
        if bad.chain(mesh.corner_nodes.iter()).any(|&v| v >= nn) {
            return Err(err(0, "node index out of range"));
        }
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_written_square() {
        let text = "thinwall-mesh v1\nnodes 4\n0 0 0\n1 1 0\n2 1 1\n3 0 1\nelements 2\n0 0 1 2\n1 0 2 3\nbedges 4\n0 0 1 GammaN\n1 1 2 GammaR_plus\n2 2 3 GammaN\n3 3 0 GammaR_minus\n";
        let m = Mesh::parse(text).unwrap();
        assert_eq!(m.nodes.len(), 4);
        assert_eq!(m.elements.len(), 2);
        assert!((m.area() - 1.0).abs() < 1e-15);
        let back = Mesh::parse(&m.write_string()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn duplicate_node_id() {
        let text = "thinwall-mesh v1\nnodes 2\n0 0 0\n0 1 0\n";
        match Mesh::parse(text) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
