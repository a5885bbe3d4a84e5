use std::collections::HashMap;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use super::basis::Affine;
use super::quadrature::{gauss_legendre01, triangle_rule};
use super::space::{lagrange_1d, Space};
use super::Field;
use crate::error::{Error, Result};
use crate::geometry::Tag;
use crate::C64;

/// Linear relation imposed on one dof.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    Fixed(C64),
    /// u[slave] = u[master] + offset
    Link { master: usize, offset: C64 },
}

#[derive(Clone, Debug, Default)]
pub struct Constraints {
    pub map: HashMap<usize, Constraint>,
}

impl Constraints {
    pub fn fix(&mut self, dof: usize, v: C64) {
        self.map.insert(dof, Constraint::Fixed(v));
    }

    pub fn link(&mut self, slave: usize, master: usize, offset: C64) {
        if slave != master {
            self.map.insert(slave, Constraint::Link { master, offset });
        }
    }
}

/// Resolved numbering: each dof is a free unknown plus offset, or a fixed value.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub free: Vec<Option<usize>>,
    pub offset: Vec<C64>,
    pub nfree: usize,
}

impl DofMap {
    pub fn new(ndof: usize, c: &Constraints) -> Result<Self> {
        let mut root = vec![usize::MAX; ndof];
        let mut offset = vec![C64::new(0.0, 0.0); ndof];
        let mut fixed = vec![false; ndof];
        for d in 0..ndof {
            let mut cur = d;
            let mut off = C64::new(0.0, 0.0);
            let mut steps = 0;
            loop {
                match c.map.get(&cur) {
                    None => break,
                    Some(Constraint::Fixed(v)) => {
                        off += v;
                        fixed[d] = true;
                        break;
                    }
                    Some(Constraint::Link { master, offset }) => {
                        off += offset;
                        cur = *master;
                    }
                }
                steps += 1;
                if steps > 64 {
                    return Err(Error::SingularSystem(format!("cyclic constraint at dof {d}")));
                }
            }
            root[d] = cur;
            offset[d] = off;
        }
        let mut index = vec![usize::MAX; ndof];
        let mut nfree = 0;
        for d in 0..ndof {
            if !fixed[d] && root[d] == d {
                index[d] = nfree;
                nfree += 1;
            }
        }
        let free = (0..ndof).map(|d| if fixed[d] { None } else { Some(index[root[d]]) }).collect();
        Ok(DofMap { free, offset, nfree })
    }

    pub fn expand(&self, x: &[C64]) -> Vec<C64> {
        self.free
            .iter()
            .zip(&self.offset)
            .map(|(f, o)| match f {
                Some(i) => x[*i] + o,
                None => *o,
            })
            .collect()
    }
}

pub type PointFn<'a> = &'a (dyn Fn([f64; 2]) -> C64 + Sync);
/// Boundary datum as a function of point and outward unit normal.
pub type EdgeFn<'a> = &'a (dyn Fn([f64; 2], [f64; 2]) -> C64 + Sync);

pub struct Robin<'a> {
    pub tag: Tag,
    /// Coefficient of ∫ u v on the edge (−i k0 for the absorbing condition).
    pub alpha: C64,
    pub g: Option<EdgeFn<'a>>,
}

/// Weak data on the doubled interface: load −∫_Γ (h0 v + h1 ∂_{x1} v), with v the mean trace.
pub struct InterfaceLoad<'a> {
    pub h0: PointFn<'a>,
    pub h1: Option<PointFn<'a>>,
}

/// a(u,v) = ∫ ∇u·∇v − k² u v + Σ α ∫_{Γ_R} u v   (no conjugation)
pub struct Problem<'a> {
    pub k2: PointFn<'a>,
    pub f: Option<PointFn<'a>>,
    pub robin: Vec<Robin<'a>>,
    pub neumann: Vec<(Tag, EdgeFn<'a>)>,
    pub interface: Option<InterfaceLoad<'a>>,
    /// Gauss points per direction of the volume rule (default p + 2).
    pub quad_order: Option<usize>,
}

impl<'a> Problem<'a> {
    pub fn new(k2: PointFn<'a>) -> Self {
        Problem { k2, f: None, robin: Vec::new(), neumann: Vec::new(), interface: None, quad_order: None }
    }
}

pub struct LinearSystem {
    pub n: usize,
    pub triplets: Vec<Triplet<usize, usize, C64>>,
    pub rhs: Vec<C64>,
    pub dofmap: DofMap,
}

/// Boundary edges with the element that owns each.
fn edge_owners(space: &Space) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    let wanted: std::collections::HashSet<(usize, usize)> =
        space.mesh.bedges.iter().map(|b| (b.n[0].min(b.n[1]), b.n[0].max(b.n[1]))).collect();
    for (k, e) in space.mesh.elements.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (e[i], e[(i + 1) % 3]);
            let key = (a.min(b), a.max(b));
            if wanted.contains(&key) {
                m.insert(key, k);
            }
        }
    }
    m
}

/// Loop over edges with `tag`: calls visit(dofs along edge, 1D basis values, d/ds values, point, normal, weight·length, tangent).
pub fn for_each_edge_qp(
    space: &Space,
    tag: Tag,
    nq: usize,
    mut visit: impl FnMut(&[usize], &[f64], &[f64], [f64; 2], [f64; 2], f64, [f64; 2]),
) -> Result<()> {
    let owners = edge_owners(space);
    let p = space.degree();
    let g = gauss_legendre01(nq);
    let basis: Vec<(Vec<f64>, Vec<f64>)> = g.iter().map(|(t, _)| lagrange_1d(p, *t)).collect();
    for b in space.mesh.bedges.iter().filter(|b| b.tag == tag) {
        let [a, c] = b.n;
        let key = (a.min(c), a.max(c));
        let owner = *owners.get(&key).ok_or_else(|| Error::UnknownTag(format!("{tag}: orphan edge")))?;
        let n = space.outward_normal(a, c, owner);
        let dofs = space.edge_dofs(a, c);
        let (pa, pc) = (space.mesh.nodes[a], space.mesh.nodes[c]);
        let len = ((pc[0] - pa[0]).powi(2) + (pc[1] - pa[1]).powi(2)).sqrt();
        let tan = [(pc[0] - pa[0]) / len, (pc[1] - pa[1]) / len];
        for (q, (t, w)) in g.iter().enumerate() {
            let x = [pa[0] + t * (pc[0] - pa[0]), pa[1] + t * (pc[1] - pa[1])];
            let ds: Vec<f64> = basis[q].1.iter().map(|d| d / len).collect();
            visit(&dofs, &basis[q].0, &ds, x, n, w * len, tan);
        }
    }
    Ok(())
}

pub fn assemble(space: &Space, prob: &Problem, cons: &Constraints) -> Result<LinearSystem> {
    for r in &prob.robin {
        if !space.mesh.has_tag(r.tag) {
            return Err(Error::UnknownTag(r.tag.to_string()));
        }
    }
    for (t, _) in &prob.neumann {
        if !space.mesh.has_tag(*t) {
            return Err(Error::UnknownTag(t.to_string()));
        }
    }
    let dm = DofMap::new(space.ndof, cons)?;
    let nloc = space.nloc();
    let p = space.degree();
    let rule = triangle_rule(prob.quad_order.unwrap_or(p + 2));
    // basis tables on the rule
    let mut tv = vec![vec![0.0; nloc]; rule.len()];
    let mut td = vec![vec![[0.0; 3]; nloc]; rule.len()];
    for (q, (s, t, _)) in rule.iter().enumerate() {
        space.elem.eval([1.0 - s - t, *s, *t], &mut tv[q], &mut td[q]);
    }
    let mut trip: Vec<Triplet<usize, usize, C64>> = Vec::with_capacity(space.mesh.elements.len() * nloc * nloc);
    let mut rhs = vec![C64::new(0.0, 0.0); dm.nfree];
    let mut ke = vec![C64::new(0.0, 0.0); nloc * nloc];
    let mut fe = vec![C64::new(0.0, 0.0); nloc];
    let mut grads = vec![[0.0; 2]; nloc];

    let scatter = |dofs: &[usize], ke: &[C64], fe: &[C64], trip: &mut Vec<Triplet<usize, usize, C64>>, rhs: &mut [C64]| {
        let n = dofs.len();
        for i in 0..n {
            let Some(fi) = dm.free[dofs[i]] else { continue };
            let mut r = fe[i];
            for j in 0..n {
                let kij = ke[i * n + j];
                if kij == C64::new(0.0, 0.0) {
                    continue;
                }
                match dm.free[dofs[j]] {
                    Some(fj) => {
                        trip.push(Triplet::new(fi, fj, kij));
                        r -= kij * dm.offset[dofs[j]];
                    }
                    None => r -= kij * dm.offset[dofs[j]],
                }
            }
            rhs[fi] += r;
        }
    };

    for (k, e) in space.mesh.elements.iter().enumerate() {
        let aff = Affine::new(space.mesh.coords(e));
        if !(aff.area > 0.0) {
            return Err(Error::SingularElement(k));
        }
        ke.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        fe.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (q, (s, t, w)) in rule.iter().enumerate() {
            let x = aff.point([1.0 - s - t, *s, *t]);
            let jw = w * 2.0 * aff.area;
            let k2 = (prob.k2)(x);
            for i in 0..nloc {
                grads[i] = aff.grad(&td[q][i]);
            }
            for i in 0..nloc {
                for j in 0..nloc {
                    let st = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    ke[i * nloc + j] += (st - k2 * tv[q][i] * tv[q][j]) * jw;
                }
            }
            if let Some(f) = prob.f {
                let fx = f(x);
                for i in 0..nloc {
                    fe[i] += fx * tv[q][i] * jw;
                }
            }
        }
        scatter(space.element_dofs(k), &ke, &fe, &mut trip, &mut rhs);
    }

    let nq = p + 2;
    for r in &prob.robin {
        for_each_edge_qp(space, r.tag, nq, |dofs, v, _, x, n, w, _| {
            let m = dofs.len();
            let mut ke = vec![C64::new(0.0, 0.0); m * m];
            let mut fe = vec![C64::new(0.0, 0.0); m];
            for i in 0..m {
                for j in 0..m {
                    ke[i * m + j] = r.alpha * v[i] * v[j] * w;
                }
                if let Some(g) = r.g {
                    fe[i] = g(x, n) * v[i] * w;
                }
            }
            scatter(dofs, &ke, &fe, &mut trip, &mut rhs);
        })?;
    }
    for (tag, g) in &prob.neumann {
        for_each_edge_qp(space, *tag, nq, |dofs, v, _, x, n, w, _| {
            let fe: Vec<C64> = v.iter().map(|vi| g(x, n) * vi * w).collect();
            let ke = vec![C64::new(0.0, 0.0); dofs.len() * dofs.len()];
            scatter(dofs, &ke, &fe, &mut trip, &mut rhs);
        })?;
    }
    if let Some(il) = &prob.interface {
        if !space.mesh.has_tag(Tag::GammaInterface_top) {
            return Err(Error::MissingInterface);
        }
        for tag in [Tag::GammaInterface_top, Tag::GammaInterface_bottom] {
            for_each_edge_qp(space, tag, nq + 2, |dofs, v, ds, x, _, w, tan| {
                let h0 = (il.h0)(x);
                let h1 = il.h1.map(|h| h(x)).unwrap_or(C64::new(0.0, 0.0));
                let fe: Vec<C64> =
                    (0..dofs.len()).map(|i| -0.5 * (h0 * v[i] + h1 * ds[i] * tan[0]) * w).collect();
                let ke = vec![C64::new(0.0, 0.0); dofs.len() * dofs.len()];
                scatter(dofs, &ke, &fe, &mut trip, &mut rhs);
            })?;
        }
    }
    Ok(LinearSystem { n: dm.nfree, triplets: trip, rhs, dofmap: dm })
}

impl LinearSystem {
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for t in &self.triplets {
            y[t.row] += t.val * x[t.col];
        }
        y
    }

    /// Sparse LU solve with one step of iterative refinement. Returns (solution, relative residual).
    pub fn solve_raw(&self) -> Result<(Vec<C64>, f64)> {
        let n = self.n;
        if n == 0 {
            return Ok((Vec::new(), 0.0));
        }
        let bnorm = self.rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if bnorm == 0.0 {
            return Ok((vec![C64::new(0.0, 0.0); n], 0.0));
        }
        let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &self.triplets)
            .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
        let b = Mat::<C64>::from_fn(n, 1, |i, _| self.rhs[i]);
        let xm = lu.solve(&b);
        let mut x: Vec<C64> = (0..n).map(|i| xm[(i, 0)]).collect();
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::SingularSystem("non-finite pivot".into()));
        }
        let resid = |x: &[C64]| -> Vec<C64> {
            let ax = self.matvec(x);
            (0..n).map(|i| self.rhs[i] - ax[i]).collect()
        };
        let mut r = resid(&x);
        let mut rn = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / bnorm;
        for _ in 0..2 {
            if rn <= 1e-13 {
                break;
            }
            let rb = Mat::<C64>::from_fn(n, 1, |i, _| r[i]);
            let dx = lu.solve(&rb);
            let xn: Vec<C64> = (0..n).map(|i| x[i] + dx[(i, 0)]).collect();
            let rr = resid(&xn);
            let rnn = rr.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / bnorm;
            if rnn < rn {
                x = xn;
                r = rr;
                rn = rnn;
            } else {
                break;
            }
        }
        Ok((x, rn))
    }
}

/// Assemble and solve, returning the field over all dofs and the relative residual.
pub fn solve_problem(space: &std::sync::Arc<Space>, prob: &Problem, cons: &Constraints) -> Result<(Field, f64)> {
    let sys = assemble(space, prob, cons)?;
    let (x, res) = sys.solve_raw()?;
    let vals = sys.dofmap.expand(&x);
    Ok((Field::new(space.clone(), vals), res))
}
