//! Constrained Delaunay triangulation with Ruppert-style quality refinement.

use std::collections::{HashMap, VecDeque};

use robust::{incircle, orient2d, Coord};

use super::mesh::{BEdge, Mesh};
use super::spec::{GeometrySpec, Tag};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Tri {
    v: [usize; 3],
    // n[i] is the neighbour across the edge opposite v[i]
    n: [usize; 3],
    alive: bool,
    inside: bool,
}

#[derive(Clone, Copy, Debug)]
struct SegInfo {
    tag: Tag,
    // partner endpoints, ordered to correspond with the key's endpoints
    partner: Option<[usize; 2]>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn circumcenter(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (p[0] - a[0], p[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

/// Quality and size controls.
#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    /// Circumradius-to-shortest-edge bound (sqrt 2 gives ~20.7 degrees).
    pub ratio: f64,
    pub max_points: usize,
    /// Triangles with shortest edge below this are never split for quality.
    pub min_edge: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { ratio: std::f64::consts::SQRT_2, max_points: 4_000_000, min_edge: 1e-9 }
    }
}

struct Mesher<'a> {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    last: usize,
    vtri: Vec<usize>,
    segs: HashMap<(usize, usize), SegInfo>,
    size: &'a dyn Fn([f64; 2]) -> f64,
    opts: RefineOptions,
    seg_queue: VecDeque<(usize, usize)>,
    tri_queue: VecDeque<(usize, [usize; 3])>,
    classified: bool,
}

impl<'a> Mesher<'a> {
    fn new(bbox: ([f64; 2], [f64; 2]), size: &'a dyn Fn([f64; 2]) -> f64, opts: RefineOptions) -> Self {
        let (lo, hi) = bbox;
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let r = 20.0 * ((hi[0] - lo[0]).max(hi[1] - lo[1]) + 1e-3);
        let pts = vec![[cx - r, cy - r], [cx + r, cy - r], [cx, cy + r]];
        let t = Tri { v: [0, 1, 2], n: [NONE; 3], alive: true, inside: false };
        Mesher {
            pts,
            tris: vec![t],
            free: Vec::new(),
            last: 0,
            vtri: vec![0, 0, 0],
            segs: HashMap::new(),
            size,
            opts,
            seg_queue: VecDeque::new(),
            tri_queue: VecDeque::new(),
            classified: false,
        }
    }

    fn orient(&self, a: usize, b: usize, p: [f64; 2]) -> f64 {
        orient2d(c(self.pts[a]), c(self.pts[b]), c(p))
    }

    fn in_circle(&self, t: usize, p: [f64; 2]) -> bool {
        let v = self.tris[t].v;
        incircle(c(self.pts[v[0]]), c(self.pts[v[1]]), c(self.pts[v[2]]), c(p)) > 0.0
    }

    /// Walk to a triangle containing p. Returns (triangle, crossed constraint) where the
    /// walk stops at the first constraint edge when `stop_at_segments` is set.
    fn locate(&self, p: [f64; 2], start: usize, stop_at_segments: bool) -> (usize, Option<(usize, usize)>) {
        let mut t = if self.tris[start].alive { start } else { self.any_alive() };
        let mut steps = 0usize;
        let mut rot = 0usize;
        loop {
            steps += 1;
            if steps > 10_000_000 {
                return (t, None);
            }
            let tr = self.tris[t];
            let mut moved = false;
            rot = (rot + 1) % 3;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = tr.v[(i + 1) % 3];
                let b = tr.v[(i + 2) % 3];
                if self.orient(a, b, p) < 0.0 {
                    if stop_at_segments && self.segs.contains_key(&key(a, b)) {
                        return (t, Some(key(a, b)));
                    }
                    let nb = tr.n[i];
                    if nb == NONE {
                        return (t, None);
                    }
                    t = nb;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return (t, None);
            }
        }
    }

    fn any_alive(&self) -> usize {
        if self.tris[self.last].alive {
            return self.last;
        }
        self.tris.iter().position(|t| t.alive).unwrap()
    }

    /// Triangles whose circumcircle contains p, grown from `start` without crossing
    /// constraint edges other than `allow`.
    fn cavity(&self, p: [f64; 2], start: usize, allow: Option<(usize, usize)>) -> Vec<usize> {
        let mut cav = vec![start];
        let mut stack = vec![start];
        let mut mark: HashMap<usize, ()> = HashMap::new();
        mark.insert(start, ());
        while let Some(t) = stack.pop() {
            let tr = self.tris[t];
            for i in 0..3 {
                let nb = tr.n[i];
                if nb == NONE || mark.contains_key(&nb) {
                    continue;
                }
                let e = key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]);
                if self.segs.contains_key(&e) && Some(e) != allow {
                    continue;
                }
                if self.in_circle(nb, p) {
                    mark.insert(nb, ());
                    cav.push(nb);
                    stack.push(nb);
                }
            }
        }
        cav
    }

    fn new_tri(&mut self, t: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = t;
            i
        } else {
            self.tris.push(t);
            self.tris.len() - 1
        }
    }

    /// Bowyer-Watson insertion; returns the new vertex index and the new triangles.
    fn insert(&mut self, p: [f64; 2], start: usize, allow: Option<(usize, usize)>) -> (usize, Vec<usize>) {
        let cav = self.cavity(p, start, allow);
        let vid = self.pts.len();
        self.pts.push(p);
        self.vtri.push(NONE);
        let in_cav: HashMap<usize, ()> = cav.iter().map(|t| (*t, ())).collect();
        // boundary edges (a, b, outside neighbour, inside flag)
        let mut bnd: Vec<(usize, usize, usize, bool)> = Vec::new();
        for &t in &cav {
            let tr = self.tris[t];
            for i in 0..3 {
                let nb = tr.n[i];
                if nb != NONE && in_cav.contains_key(&nb) {
                    continue;
                }
                bnd.push((tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], nb, tr.inside));
            }
        }
        for &t in &cav {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        let mut by_first: HashMap<usize, usize> = HashMap::with_capacity(bnd.len());
        let mut by_second: HashMap<usize, usize> = HashMap::with_capacity(bnd.len());
        let mut created = Vec::with_capacity(bnd.len());
        for &(a, b, nb, inside) in &bnd {
            let t = self.new_tri(Tri { v: [a, b, vid], n: [NONE, NONE, nb], alive: true, inside });
            if nb != NONE {
                let o = &mut self.tris[nb];
                for j in 0..3 {
                    let (x, y) = (o.v[(j + 1) % 3], o.v[(j + 2) % 3]);
                    if (x == b && y == a) || (x == a && y == b) {
                        o.n[j] = t;
                    }
                }
            }
            by_first.insert(a, t);
            by_second.insert(b, t);
            created.push(t);
        }
        for &t in &created {
            let [a, b, _] = self.tris[t].v;
            self.tris[t].n[0] = *by_first.get(&b).unwrap_or(&NONE);
            self.tris[t].n[1] = *by_second.get(&a).unwrap_or(&NONE);
            for &v in &self.tris[t].v {
                self.vtri[v] = t;
            }
        }
        if let Some(&t) = created.first() {
            self.last = t;
        }
        (vid, created)
    }

    /// Triangle having (a, b) as an edge, if any.
    fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let t0 = self.vtri[a];
        if t0 == NONE || !self.tris[t0].alive || !self.tris[t0].v.contains(&a) {
            return self.tris.iter().position(|t| t.alive && t.v.contains(&a) && t.v.contains(&b));
        }
        // rotate around a, first one way then the other
        for dir in [2usize, 1] {
            let mut t = t0;
            for _ in 0..10_000 {
                let tr = self.tris[t];
                if tr.v.contains(&b) {
                    return Some(t);
                }
                let ia = tr.v.iter().position(|v| *v == a).unwrap();
                let nb = tr.n[(ia + dir) % 3];
                if nb == NONE || nb == t0 {
                    break;
                }
                t = nb;
            }
        }
        None
    }

    /// A subsegment is healthy when it is an edge and no vertex sees it at an obtuse angle.
    fn encroached(&self, a: usize, b: usize) -> bool {
        let Some(t) = self.find_edge(a, b) else { return true };
        let check = |t: usize| {
            let tr = self.tris[t];
            let apex = *tr.v.iter().find(|v| **v != a && **v != b).unwrap();
            if apex < 3 {
                return false;
            }
            let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[apex]);
            (pa[0] - pc[0]) * (pb[0] - pc[0]) + (pa[1] - pc[1]) * (pb[1] - pc[1]) < 0.0
        };
        if check(t) {
            return true;
        }
        let tr = self.tris[t];
        for i in 0..3 {
            let e = key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]);
            if e == key(a, b) && tr.n[i] != NONE {
                return check(tr.n[i]);
            }
        }
        false
    }

    fn split_segment(&mut self, k: (usize, usize)) {
        let Some(info) = self.segs.get(&k).copied() else { return };
        let (a, b) = k;
        let m = [0.5 * (self.pts[a][0] + self.pts[b][0]), 0.5 * (self.pts[a][1] + self.pts[b][1])];
        let mid = self.insert_on_segment(k, m);
        self.segs.remove(&k);
        match info.partner {
            None => {
                self.add_seg(key(a, mid), SegInfo { tag: info.tag, partner: None });
                self.add_seg(key(mid, b), SegInfo { tag: info.tag, partner: None });
            }
            Some([pa, pb]) => {
                let pk = key(pa, pb);
                let pinfo = self.segs[&pk];
                let pm = [0.5 * (self.pts[pa][0] + self.pts[pb][0]), 0.5 * (self.pts[pa][1] + self.pts[pb][1])];
                let pmid = self.insert_on_segment(pk, pm);
                self.segs.remove(&pk);
                self.add_seg(key(a, mid), SegInfo { tag: info.tag, partner: Some(order(a, mid, pa, pmid)) });
                self.add_seg(key(mid, b), SegInfo { tag: info.tag, partner: Some(order(mid, b, pmid, pb)) });
                self.add_seg(key(pa, pmid), SegInfo { tag: pinfo.tag, partner: Some(order(pa, pmid, a, mid)) });
                self.add_seg(key(pmid, pb), SegInfo { tag: pinfo.tag, partner: Some(order(pmid, pb, mid, b)) });
            }
        }
    }

    fn add_seg(&mut self, k: (usize, usize), info: SegInfo) {
        self.segs.insert(k, info);
        self.seg_queue.push_back(k);
    }

    fn insert_on_segment(&mut self, k: (usize, usize), m: [f64; 2]) -> usize {
        let start = match self.find_edge(k.0, k.1) {
            Some(t) => t,
            None => self.locate(m, self.vtri[k.0].min(self.tris.len() - 1), false).0,
        };
        let allow = if self.find_edge(k.0, k.1).is_some() { Some(k) } else { None };
        let (vid, created) = self.insert(m, start, allow);
        self.after_insert(vid, &created);
        vid
    }

    fn after_insert(&mut self, vid: usize, created: &[usize]) {
        for &t in created {
            let tr = self.tris[t];
            let (a, b) = (tr.v[0], tr.v[1]);
            if self.segs.contains_key(&key(a, b)) {
                let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[vid]);
                if (pa[0] - pc[0]) * (pb[0] - pc[0]) + (pa[1] - pc[1]) * (pb[1] - pc[1]) < 0.0 {
                    self.seg_queue.push_back(key(a, b));
                }
            }
            if self.classified {
                self.tri_queue.push_back((t, tr.v));
            }
        }
    }

    fn fix_segments(&mut self) -> Result<()> {
        while let Some(k) = self.seg_queue.pop_front() {
            if !self.segs.contains_key(&k) {
                continue;
            }
            if self.pts.len() > self.opts.max_points {
                return Err(Error::MeshFailure("point budget exceeded while recovering segments".into()));
            }
            if self.encroached(k.0, k.1) {
                self.split_segment(k);
            }
        }
        Ok(())
    }

    fn classify(&mut self, hole_seeds: &[[f64; 2]]) {
        let mut outside = vec![false; self.tris.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (i, t) in self.tris.iter().enumerate() {
            if t.alive && t.v.iter().any(|v| *v < 3) {
                stack.push(i);
            }
        }
        for s in hole_seeds {
            let (t, _) = self.locate(*s, self.any_alive(), false);
            stack.push(t);
        }
        while let Some(t) = stack.pop() {
            if outside[t] {
                continue;
            }
            outside[t] = true;
            let tr = self.tris[t];
            for i in 0..3 {
                let nb = tr.n[i];
                if nb == NONE || outside[nb] {
                    continue;
                }
                if self.segs.contains_key(&key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])) {
                    continue;
                }
                stack.push(nb);
            }
        }
        for (i, t) in self.tris.iter_mut().enumerate() {
            t.inside = t.alive && !outside[i];
        }
        self.classified = true;
    }

    fn is_bad(&self, t: usize) -> Option<[f64; 2]> {
        let tr = self.tris[t];
        if !tr.alive || !tr.inside {
            return None;
        }
        let [a, b, p] = tr.v.map(|v| self.pts[v]);
        let (la, lb, lc) = (dist(b, p), dist(a, p), dist(a, b));
        let lmin = la.min(lb).min(lc);
        let lmax = la.max(lb).max(lc);
        let cc = circumcenter(a, b, p);
        let r = dist(cc, a);
        let centroid = [(a[0] + b[0] + p[0]) / 3.0, (a[1] + b[1] + p[1]) / 3.0];
        let too_big = lmax > (self.size)(centroid);
        let skinny = r / lmin > self.opts.ratio && lmin > self.opts.min_edge;
        if too_big || skinny {
            Some(cc)
        } else {
            None
        }
    }

    fn refine(&mut self) -> Result<()> {
        for t in 0..self.tris.len() {
            if self.tris[t].alive && self.tris[t].inside {
                self.tri_queue.push_back((t, self.tris[t].v));
            }
        }
        loop {
            self.fix_segments()?;
            let Some((t, v)) = self.tri_queue.pop_front() else { break };
            if !self.tris[t].alive || self.tris[t].v != v {
                continue;
            }
            let Some(cc) = self.is_bad(t) else { continue };
            if self.pts.len() > self.opts.max_points {
                return Err(Error::MeshFailure(format!("point budget {} exceeded", self.opts.max_points)));
            }
            let (loc, crossed) = self.locate(cc, t, true);
            if let Some(k) = crossed {
                self.split_segment(k);
                self.tri_queue.push_back((t, v));
                continue;
            }
            if !self.tris[loc].inside {
                // should not happen with unencroached segments; drop the request
                continue;
            }
            let cav = self.cavity(cc, loc, None);
            let mut enc = Vec::new();
            let in_cav: HashMap<usize, ()> = cav.iter().map(|t| (*t, ())).collect();
            for &ct in &cav {
                let tr = self.tris[ct];
                for i in 0..3 {
                    if tr.n[i] != NONE && in_cav.contains_key(&tr.n[i]) {
                        continue;
                    }
                    let (a, b) = (tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]);
                    if self.segs.contains_key(&key(a, b)) {
                        let (pa, pb) = (self.pts[a], self.pts[b]);
                        if (pa[0] - cc[0]) * (pb[0] - cc[0]) + (pa[1] - cc[1]) * (pb[1] - cc[1]) < 0.0 {
                            enc.push(key(a, b));
                        }
                    }
                }
            }
            if !enc.is_empty() {
                for k in enc {
                    self.split_segment(k);
                }
                self.tri_queue.push_back((t, v));
                continue;
            }
            let (vid, created) = self.insert(cc, loc, None);
            self.after_insert(vid, &created);
        }
        Ok(())
    }
}

fn order(a: usize, b: usize, pa: usize, pb: usize) -> [usize; 2] {
    // partner endpoints listed in the order of key(a, b)
    if a < b {
        [pa, pb]
    } else {
        [pb, pa]
    }
}

/// Triangulate a PSLG with a target size field.
pub fn triangulate_with(g: &GeometrySpec, size: &dyn Fn([f64; 2]) -> f64, opts: RefineOptions) -> Result<Mesh> {
    if g.points.len() < 3 || g.segments.is_empty() {
        return Err(Error::MeshFailure("empty geometry".into()));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &g.points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut m = Mesher::new((lo, hi), size, opts);
    // insert input points, merging exact duplicates
    let mut map = vec![0usize; g.points.len()];
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    for (i, p) in g.points.iter().enumerate() {
        let kk = (p[0].to_bits(), p[1].to_bits());
        if let Some(&j) = seen.get(&kk) {
            map[i] = j;
            continue;
        }
        let (t, _) = m.locate(*p, m.last, false);
        let (vid, _) = m.insert(*p, t, None);
        map[i] = vid;
        seen.insert(kk, vid);
    }
    for s in &g.segments {
        let (a, b) = (map[s.a], map[s.b]);
        if a != b {
            m.add_seg(key(a, b), SegInfo { tag: s.tag, partner: None });
        }
    }
    for &(sl, sr) in &g.periodic {
        let (l, r) = (g.segments[sl], g.segments[sr]);
        let (la, lb, ra, rb) = (map[l.a], map[l.b], map[r.a], map[r.b]);
        // pair endpoints by height
        let (ra, rb) = if (m.pts[la][1] - m.pts[ra][1]).abs() < (m.pts[la][1] - m.pts[rb][1]).abs() {
            (ra, rb)
        } else {
            (rb, ra)
        };
        m.segs.get_mut(&key(la, lb)).unwrap().partner = Some(order(la, lb, ra, rb));
        m.segs.get_mut(&key(ra, rb)).unwrap().partner = Some(order(ra, rb, la, lb));
    }
    m.fix_segments()?;
    m.classify(&g.holes);
    m.refine()?;

    // collect the interior triangles
    let mut renum = vec![NONE; m.pts.len()];
    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    for t in m.tris.iter().filter(|t| t.alive && t.inside) {
        let mut e = [0usize; 3];
        for (k, &v) in t.v.iter().enumerate() {
            if renum[v] == NONE {
                renum[v] = nodes.len();
                nodes.push(m.pts[v]);
            }
            e[k] = renum[v];
        }
        elements.push(e);
    }
    let mut bedges = Vec::new();
    let mut segs: Vec<_> = m.segs.iter().collect();
    segs.sort_by_key(|(k, _)| **k);
    for (&(a, b), info) in segs {
        if info.tag == Tag::Internal {
            continue;
        }
        if renum[a] == NONE || renum[b] == NONE {
            continue;
        }
        bedges.push(BEdge { n: [renum[a], renum[b]], tag: info.tag });
    }
    let corner_nodes = g.corners.iter().map(|&i| renum[map[i]]).filter(|v| *v != NONE).collect();
    let mut mesh = Mesh { nodes, elements, bedges, corner_nodes };
    mesh.orient_boundary();
    mesh.check_quality(1e-3)?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_uniform() {
        let mut g = GeometrySpec::default();
        g.add_loop(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], &[Tag::GammaN; 4]);
        let m = triangulate_with(&g, &|_| 0.25, RefineOptions::default()).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.min_angle_deg() >= 20.0, "min angle {}", m.min_angle_deg());
        for e in &m.elements {
            let l = m.max_edge(e);
            assert!(l <= 0.25 + 1e-12);
        }
    }
}
