use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use super::assemble::for_each_edge_qp;
use super::basis::Affine;
use super::quadrature::triangle_rule;
use super::space::Space;
use crate::error::{Error, Result};
use crate::geometry::Tag;
use crate::C64;

/// Finite-element function: values at every dof of a space.
#[derive(Clone, Debug)]
pub struct Field {
    pub space: Arc<Space>,
    pub values: Vec<C64>,
}

/// Value and gradient at a point.
pub type Sample = (C64, [C64; 2]);

impl Field {
    pub fn new(space: Arc<Space>, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), space.ndof);
        Field { space, values }
    }

    pub fn zeros(space: Arc<Space>) -> Self {
        let n = space.ndof;
        Field { space, values: vec![C64::new(0.0, 0.0); n] }
    }

    /// Interpolate a function at the dof nodes.
    pub fn interpolate(space: Arc<Space>, f: impl Fn([f64; 2]) -> C64) -> Self {
        let values = space.dof_xy.iter().map(|x| f(*x)).collect();
        Field { space, values }
    }

    /// Value and gradient inside element k at barycentric point l.
    pub fn eval_in(&self, k: usize, l: [f64; 3]) -> Sample {
        let sp = &self.space;
        let n = sp.nloc();
        let mut v = vec![0.0; n];
        let mut d = vec![[0.0; 3]; n];
        sp.elem.eval(l, &mut v, &mut d);
        let aff = Affine::new(sp.mesh.coords(&sp.mesh.elements[k]));
        let mut u = C64::new(0.0, 0.0);
        let mut g = [C64::new(0.0, 0.0); 2];
        for (i, dof) in sp.element_dofs(k).iter().enumerate() {
            let c = self.values[*dof];
            let gi = aff.grad(&d[i]);
            u += c * v[i];
            g[0] += c * gi[0];
            g[1] += c * gi[1];
        }
        (u, g)
    }

    pub fn sample(&self, p: [f64; 2]) -> Option<Sample> {
        let (k, l) = self.space.locate(p)?;
        Some(self.eval_in(k, l))
    }

    /// Sample restricted to elements accepted by `filter` (used to pick a side of a cut).
    pub fn sample_filtered(&self, p: [f64; 2], filter: &dyn Fn(usize) -> bool) -> Option<Sample> {
        let sp = &self.space;
        let (k, l) = sp.locator().locate(&sp.mesh, p, filter)?;
        Some(self.eval_in(k, l))
    }

    pub fn eval(&self, p: [f64; 2]) -> Option<C64> {
        self.sample(p).map(|s| s.0)
    }

    /// Sample on the side y > y0 (`above`) or y < y0 of a horizontal cut.
    pub fn sample_side(&self, p: [f64; 2], y0: f64, above: bool) -> Option<Sample> {
        let mesh = &self.space.mesh;
        let f = |k: usize| {
            let e = mesh.elements[k];
            let yc = (mesh.nodes[e[0]][1] + mesh.nodes[e[1]][1] + mesh.nodes[e[2]][1]) / 3.0;
            (yc > y0) == above
        };
        self.sample_filtered(p, &f)
    }

    /// Σ over quadrature points of elements passing `keep` of weight·f(x, u, ∇u).
    pub fn integrate<T>(&self, order: usize, keep: &dyn Fn(usize, [f64; 2]) -> bool, f: impl Fn([f64; 2], Sample) -> T) -> T
    where
        T: std::ops::AddAssign + std::ops::Mul<f64, Output = T> + Default,
    {
        let sp = &self.space;
        let n = sp.nloc();
        let rule = triangle_rule(order);
        let mut tv = vec![vec![0.0; n]; rule.len()];
        let mut td = vec![vec![[0.0; 3]; n]; rule.len()];
        for (q, (s, t, _)) in rule.iter().enumerate() {
            sp.elem.eval([1.0 - s - t, *s, *t], &mut tv[q], &mut td[q]);
        }
        let mut acc = T::default();
        for (k, e) in sp.mesh.elements.iter().enumerate() {
            let aff = Affine::new(sp.mesh.coords(e));
            let c = aff.point([1.0 / 3.0; 3]);
            if !keep(k, c) {
                continue;
            }
            let dofs = sp.element_dofs(k);
            for (q, (s, t, w)) in rule.iter().enumerate() {
                let x = aff.point([1.0 - s - t, *s, *t]);
                let mut u = C64::new(0.0, 0.0);
                let mut g = [C64::new(0.0, 0.0); 2];
                for i in 0..n {
                    let cv = self.values[dofs[i]];
                    let gi = aff.grad(&td[q][i]);
                    u += cv * tv[q][i];
                    g[0] += cv * gi[0];
                    g[1] += cv * gi[1];
                }
                acc += f(x, (u, g)) * (w * 2.0 * aff.area);
            }
        }
        acc
    }

    /// (L2 norm, H1 seminorm) of self − reference over the quadrature points inside `region`.
    pub fn error_norms(
        &self,
        reference: &dyn Fn(usize, [f64; 2]) -> Sample,
        region: &dyn Fn([f64; 2]) -> bool,
    ) -> (f64, f64) {
        let sp = &self.space;
        let n = sp.nloc();
        let rule = triangle_rule(sp.degree() + 3);
        let mut tv = vec![vec![0.0; n]; rule.len()];
        let mut td = vec![vec![[0.0; 3]; n]; rule.len()];
        for (q, (s, t, _)) in rule.iter().enumerate() {
            sp.elem.eval([1.0 - s - t, *s, *t], &mut tv[q], &mut td[q]);
        }
        let (mut l2, mut h1) = (0.0, 0.0);
        for (k, e) in sp.mesh.elements.iter().enumerate() {
            let aff = Affine::new(sp.mesh.coords(e));
            let dofs = sp.element_dofs(k);
            for (q, (s, t, w)) in rule.iter().enumerate() {
                let x = aff.point([1.0 - s - t, *s, *t]);
                if !region(x) {
                    continue;
                }
                let mut u = C64::new(0.0, 0.0);
                let mut g = [C64::new(0.0, 0.0); 2];
                for i in 0..n {
                    let cv = self.values[dofs[i]];
                    let gi = aff.grad(&td[q][i]);
                    u += cv * tv[q][i];
                    g[0] += cv * gi[0];
                    g[1] += cv * gi[1];
                }
                let (ur, gr) = reference(k, x);
                let jw = w * 2.0 * aff.area;
                l2 += (u - ur).norm_sqr() * jw;
                h1 += ((g[0] - gr[0]).norm_sqr() + (g[1] - gr[1]).norm_sqr()) * jw;
            }
        }
        (l2.sqrt(), h1.sqrt())
    }

    /// (L2, H1 seminorm) of the field itself over a region.
    pub fn norms(&self, region: &dyn Fn([f64; 2]) -> bool) -> (f64, f64) {
        let z = |_: usize, _: [f64; 2]| (C64::new(0.0, 0.0), [C64::new(0.0, 0.0); 2]);
        self.error_norms(&z, region)
    }

    pub fn norm_on_region(&self, region: &dyn Fn([f64; 2]) -> bool, kind: NormKind) -> f64 {
        let (l2, h1) = self.norms(region);
        match kind {
            NormKind::L2 => l2,
            NormKind::H1 => (l2 * l2 + h1 * h1).sqrt(),
        }
    }

    pub fn evaluate(&self, pts: &[[f64; 2]]) -> Vec<Option<C64>> {
        pts.iter().map(|p| self.eval(*p)).collect()
    }

    /// One-sided traces on the slit y = 0. Needs a split interface.
    pub fn interface_trace(&self, x1: f64) -> Result<InterfaceTrace> {
        if !self.space.mesh.has_tag(Tag::GammaInterface_top) {
            return Err(Error::MissingInterface);
        }
        let p = [x1, 0.0];
        let top = self.sample_side(p, 0.0, true).ok_or(Error::OutsideRegion(x1, 0.0))?;
        let bot = self.sample_side(p, 0.0, false).ok_or(Error::OutsideRegion(x1, 0.0))?;
        Ok(InterfaceTrace { top, bottom: bot })
    }

    /// ∫ over edges with `tag` of f(x, outward normal, u).
    pub fn boundary_integral(&self, tag: Tag, nq: usize, f: impl Fn([f64; 2], [f64; 2], C64) -> C64) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for_each_edge_qp(&self.space, tag, nq, |dofs, v, _, x, n, w, _| {
            let u: C64 = dofs.iter().zip(v).map(|(d, vi)| self.values[*d] * vi).sum();
            acc += f(x, n, u) * w;
        })?;
        Ok(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Write `x,y,re,im` for every dof.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,re,im")?;
        for (x, v) in self.space.dof_xy.iter().zip(&self.values) {
            writeln!(f, "{:.10e},{:.10e},{:.10e},{:.10e}", x[0], x[1], v.re, v.im)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1,
}

/// Traces of u and ∇u from both sides of Γ at one abscissa.
#[derive(Clone, Copy, Debug)]
pub struct InterfaceTrace {
    pub top: Sample,
    pub bottom: Sample,
}

impl InterfaceTrace {
    /// [u] = u(0⁺) − u(0⁻)
    pub fn jump(&self) -> C64 {
        self.top.0 - self.bottom.0
    }

    pub fn mean(&self) -> C64 {
        0.5 * (self.top.0 + self.bottom.0)
    }

    pub fn jump_dn(&self) -> C64 {
        self.top.1[1] - self.bottom.1[1]
    }

    pub fn mean_dn(&self) -> C64 {
        0.5 * (self.top.1[1] + self.bottom.1[1])
    }

    /// Tangential derivative of the mean trace.
    pub fn mean_dt(&self) -> C64 {
        0.5 * (self.top.1[0] + self.bottom.1[0])
    }
}
