//! Periodic cell problems: the kernel profile 𝒟, the correctors V₁,₁ and V₁,₂ and the effective constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{solve_problem, Constraints, Field, Problem, Space};
use crate::geometry::{build_cell_geometry, triangulate_sized, HoleSpec, Khat, SizeField, Tag};
use crate::C64;

/// Smooth step χ: 0 on |t| < 1, 1 on |t| > 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CutoffSpec {
    /// e^{−1/s} / (e^{−1/s} + e^{−1/(1−s)}), C^∞.
    #[default]
    Smooth,
    /// 10s³ − 15s⁴ + 6s⁵, C².
    Quintic,
}

fn psi(s: f64) -> [f64; 3] {
    if s <= 1e-3 {
        return [0.0; 3];
    }
    let e = (-1.0 / s).exp();
    let s2 = s * s;
    [e, e / s2, e * (1.0 / (s2 * s2) - 2.0 / (s2 * s))]
}

impl CutoffSpec {
    /// Step profile S(s) on [0, 1] with its first two derivatives.
    fn step(&self, s: f64) -> [f64; 3] {
        if s <= 0.0 {
            return [0.0; 3];
        }
        if s >= 1.0 {
            return [1.0, 0.0, 0.0];
        }
        match self {
            CutoffSpec::Quintic => [
                s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
                30.0 * s * s * (1.0 - s) * (1.0 - s),
                60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
            ],
            CutoffSpec::Smooth => {
                let a = psi(s);
                let bm = psi(1.0 - s);
                let b = [bm[0], -bm[1], bm[2]];
                let sum = a[0] + b[0];
                let n = a[1] * b[0] - a[0] * b[1];
                let d = sum * sum;
                let np = a[2] * b[0] - a[0] * b[2];
                let dp = 2.0 * sum * (a[1] + b[1]);
                [a[0] / sum, n / d, (np * d - n * dp) / (d * d)]
            }
        }
    }

    pub fn chi(&self, t: f64) -> f64 {
        self.step(t.abs() - 1.0)[0]
    }

    pub fn d1(&self, t: f64) -> f64 {
        t.signum() * self.step(t.abs() - 1.0)[1]
    }

    pub fn d2(&self, t: f64) -> f64 {
        self.step(t.abs() - 1.0)[2]
    }

    /// χ₊ = χ·1_{t>0}; (value, first, second derivative).
    pub fn plus(&self, t: f64) -> [f64; 3] {
        if t > 0.0 {
            [self.chi(t), self.d1(t), self.d2(t)]
        } else {
            [0.0; 3]
        }
    }

    pub fn minus(&self, t: f64) -> [f64; 3] {
        if t < 0.0 {
            [self.chi(t), self.d1(t), self.d2(t)]
        } else {
            [0.0; 3]
        }
    }

    /// g(t) = ((t²/2)(1 − χ(t)))''
    pub fn g(&self, t: f64) -> f64 {
        (1.0 - self.chi(t)) - 2.0 * t * self.d1(t) - 0.5 * t * t * self.d2(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    /// Truncation half-height T.
    pub t: f64,
    /// Bulk element size.
    pub h: f64,
    /// Element size on the hole boundary.
    pub h_hole: f64,
    pub degree: usize,
    pub cutoff: CutoffSpec,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig { t: 6.0, h: 0.1, h_hole: 0.02, degree: 3, cutoff: CutoffSpec::Smooth }
    }
}

impl CellConfig {
    /// One uniform refinement: all sizes halved.
    pub fn refined(&self) -> Self {
        CellConfig { h: self.h / 2.0, h_hole: self.h_hole / 2.0, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct EffectiveConstants {
    #[serde(rename = "D1")]
    pub d1: C64,
    #[serde(rename = "D2")]
    pub d2: C64,
    #[serde(rename = "N1")]
    pub n1: C64,
    #[serde(rename = "N2")]
    pub n2: C64,
    #[serde(rename = "N3")]
    pub n3: C64,
    #[serde(rename = "D_infty")]
    pub d_inf: f64,
}

impl EffectiveConstants {
    pub fn as_array(&self) -> [C64; 5] {
        [self.d1, self.d2, self.n1, self.n2, self.n3]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Residual diagnostics of one profile solve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, Default)]
pub struct ProfileDiagnostics {
    /// ∫F𝒟 + ∫G𝒟 and ∫F + ∫G before the solve.
    pub c_d: f64,
    pub c_n: f64,
    /// Far-band averages after normalization (top, bottom).
    pub band_top: f64,
    pub band_bottom: f64,
    /// max |u| on the lines |X₂| = T − 0.5.
    pub far_max: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct CellSolution {
    pub cutoff: CutoffSpec,
    pub config: CellConfig,
    pub space: Arc<Space>,
    /// W = 𝒟 − X₂.
    pub w: Field,
    pub d_inf: f64,
    pub v11: Field,
    pub v12: Field,
    pub constants: EffectiveConstants,
    pub diagnostics: [ProfileDiagnostics; 3],
    pub hole_area: f64,
}

const QUAD: usize = 14;

fn periodic_constraints(space: &Space) -> Result<Constraints> {
    let mut left: Vec<(f64, usize)> =
        space.boundary_dofs(Tag::Periodic_left).into_iter().map(|d| (space.dof_xy[d][1], d)).collect();
    left.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut cons = Constraints::default();
    for r in space.boundary_dofs(Tag::Periodic_right) {
        let y = space.dof_xy[r][1];
        let i = left.partition_point(|v| v.0 < y);
        let best = [i.saturating_sub(1), i.min(left.len() - 1)]
            .into_iter()
            .min_by(|a, b| (left[*a].0 - y).abs().partial_cmp(&(left[*b].0 - y).abs()).unwrap())
            .unwrap();
        if (left[best].0 - y).abs() > 1e-9 {
            return Err(Error::MeshFailure(format!("no periodic partner for dof at y = {y}")));
        }
        cons.link(r, left[best].1, C64::new(0.0, 0.0));
    }
    Ok(cons)
}

/// Mesh and space for the truncated cell.
pub fn cell_space(hole: Option<&HoleSpec>, cfg: &CellConfig) -> Result<Arc<Space>> {
    let g = build_cell_geometry(hole, cfg.t)?;
    let mut size = SizeField::uniform(cfg.h);
    // χ varies on 1 < |X₂| < 2
    for y0 in [-1.5, 1.5] {
        size.bands.push(([0.0, 1.0], y0, 0.5, 0.5 * cfg.h, 0.5));
    }
    if let Some(HoleSpec::Disk { center, radius, .. }) = hole {
        size.disks.push((*center, *radius, cfg.h_hole, 0.3));
    } else if let Some(h) = hole {
        let c = h.interior_point();
        let r = h.polygon().iter().map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt()).fold(0.0, f64::max);
        size.disks.push((c, r, cfg.h_hole, 0.3));
    }
    let mesh = triangulate_sized(&g, &size)?;
    Ok(Arc::new(Space::new(Arc::new(mesh), cfg.degree)))
}

struct CellSolver<'a> {
    space: &'a Arc<Space>,
    periodic: Constraints,
    pin: usize,
    t: f64,
}

impl<'a> CellSolver<'a> {
    fn new(space: &'a Arc<Space>, t: f64) -> Result<Self> {
        let periodic = periodic_constraints(space)?;
        // pin a vertex far from the hole that is not a periodic slave
        let pin = (0..space.mesh.nodes.len())
            .filter(|d| !periodic.map.contains_key(d))
            .min_by(|a, b| {
                let da = (space.dof_xy[*a][0] - 0.5).abs() + (space.dof_xy[*a][1] - t + 0.5).abs();
                let db = (space.dof_xy[*b][0] - 0.5).abs() + (space.dof_xy[*b][1] - t + 0.5).abs();
                da.partial_cmp(&db).unwrap()
            })
            .ok_or_else(|| Error::MeshFailure("empty cell mesh".into()))?;
        Ok(CellSolver { space, periodic, pin, t })
    }

    fn band_average(&self, u: &Field, top: bool) -> f64 {
        let t = self.t;
        let keep = |_: usize, c: [f64; 2]| if top { c[1] > t - 1.0 } else { c[1] < 1.0 - t };
        let s: C64 = u.integrate(6, &keep, |_, (v, _)| v);
        // the bands contain no hole, so their area is 1
        s.re
    }

    /// Solve −ΔV = f, ∂_n V = g on the hole (n out of the fluid), periodic, Neumann at ±T.
    /// Returns V shifted so that the two far-band averages are symmetric about 0, with (top, bottom) averages.
    fn solve(
        &self,
        f: Option<&(dyn Fn([f64; 2]) -> C64 + Sync)>,
        g: Option<&(dyn Fn([f64; 2], [f64; 2]) -> C64 + Sync)>,
    ) -> Result<(Field, f64, f64, f64)> {
        let k2 = |_: [f64; 2]| C64::new(0.0, 0.0);
        let mut prob = Problem::new(&k2);
        prob.f = f;
        prob.quad_order = Some(QUAD);
        if let Some(g) = g {
            if self.space.mesh.has_tag(Tag::GammaHole) {
                prob.neumann.push((Tag::GammaHole, g));
            }
        }
        let mut cons = self.periodic.clone();
        cons.fix(self.pin, C64::new(0.0, 0.0));
        let (mut u, res) = solve_problem(self.space, &prob, &cons)?;
        let top = self.band_average(&u, true);
        let bot = self.band_average(&u, false);
        let shift = 0.5 * (top + bot);
        for v in u.values.iter_mut() {
            *v -= shift;
        }
        Ok((u, top - shift, bot - shift, res))
    }

    fn far_max(&self, u: &Field) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            for y in [self.t - 0.5, 0.5 - self.t] {
                if let Some(v) = u.eval([x.clamp(1e-9, 1.0 - 1e-9), y]) {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }
}

/// (∫_𝓑 F·𝒟 + ∫_hole G·𝒟, ∫_𝓑 F + ∫_hole G), with 𝒟 = X₂ + W taken from `w`.
pub fn compatibility_residuals(
    w: &Field,
    f: &dyn Fn([f64; 2]) -> C64,
    g: &dyn Fn([f64; 2], [f64; 2]) -> C64,
) -> Result<(C64, C64)> {
    let all = |_: usize, _: [f64; 2]| true;
    let fd: C64 = w.integrate(QUAD, &all, |x, (wv, _)| f(x) * (wv + x[1]));
    let fnn: C64 = w.integrate(QUAD, &all, |x, _| f(x));
    let (gd, gn) = if w.space.mesh.has_tag(Tag::GammaHole) {
        (
            w.boundary_integral(Tag::GammaHole, 6, |x, n, wv| g(x, n) * (wv + x[1]))?,
            w.boundary_integral(Tag::GammaHole, 6, |x, n, _| g(x, n))?,
        )
    } else {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    };
    Ok((fd + gd, fnn + gn))
}

/// Solve the kernel profile on a prepared cell space: (W = 𝒟 − X₂, D∞).
pub fn solve_kernel_d(space: &Arc<Space>, t: f64) -> Result<(Field, f64)> {
    let s = CellSolver::new(space, t)?;
    let g = |_: [f64; 2], n: [f64; 2]| C64::new(-n[1], 0.0);
    let (w, top, _, _) = s.solve(None, Some(&g))?;
    Ok((w, top))
}

/// Full cell computation: kernel, correctors and constants.
pub fn solve_cell(hole: Option<&HoleSpec>, khat: &Khat, k0: f64, cfg: &CellConfig) -> Result<CellSolution> {
    let space = cell_space(hole, cfg)?;
    let s = CellSolver::new(&space, cfg.t)?;
    let chi = cfg.cutoff;
    let all = |_: usize, _: [f64; 2]| true;
    let hole_area = hole.map(|h| crate::geometry::params::signed_area(&h.polygon()).abs()).unwrap_or(0.0);
    let has_hole = space.mesh.has_tag(Tag::GammaHole);
    let zero = C64::new(0.0, 0.0);
    let hole_int = |u: &Field, f: &dyn Fn([f64; 2], [f64; 2], C64) -> C64| -> Result<C64> {
        if has_hole {
            u.boundary_integral(Tag::GammaHole, 6, f)
        } else {
            Ok(zero)
        }
    };

    // kernel
    let gw = |_: [f64; 2], n: [f64; 2]| C64::new(-n[1], 0.0);
    let (w, top, _, res_w) = s.solve(None, Some(&gw))?;
    let d_inf = top;
    let diag_w = ProfileDiagnostics { band_top: top, band_bottom: -top, residual: res_w, ..Default::default() };

    // 𝒟₁ = −∫_hole 𝒟 e₁·n, 𝒟₂ = ∫ (2χ' + X₂χ'') 𝒟
    let d1 = -hole_int(&w, &|x, n, wv| (wv + x[1]) * n[0])?;
    let fv12 = move |x: [f64; 2]| 2.0 * chi.d1(x[1]) + x[1] * chi.d2(x[1]);
    let d2: C64 = w.integrate(QUAD, &all, |x, (wv, _)| (wv + x[1]) * fv12(x));

    let odd2 = move |x: [f64; 2]| 0.5 * (chi.plus(x[1])[2] - chi.minus(x[1])[2]);
    let profile = |f: &(dyn Fn([f64; 2]) -> C64 + Sync),
                   g: &(dyn Fn([f64; 2], [f64; 2]) -> C64 + Sync)|
     -> Result<(Field, ProfileDiagnostics)> {
        let (cd, cn) = compatibility_residuals(&w, f, g)?;
        let scale = 1.0 + d1.norm() + d2.norm();
        if cn.norm() > 1e-6 * scale {
            return Err(Error::CompatibilityViolated(cn.norm()));
        }
        let (u, t, b, res) = s.solve(Some(f), Some(g))?;
        // a violated 𝒞_𝒟 shows up as unequal far-field constants
        if (t - b).abs() > 1e-5 * scale {
            return Err(Error::CompatibilityViolated(t - b));
        }
        let far = s.far_max(&u);
        Ok((u, ProfileDiagnostics { c_d: cd.norm(), c_n: cn.norm(), band_top: t, band_bottom: b, far_max: far, residual: res }))
    };

    let f11 = move |x: [f64; 2]| d1 * odd2(x);
    let g11 = |_: [f64; 2], n: [f64; 2]| C64::new(-n[0], 0.0);
    let (v11, diag11) = profile(&f11, &g11)?;

    let f12 = move |x: [f64; 2]| C64::new(fv12(x), 0.0) + d2 * odd2(x);
    let g12 = |_: [f64; 2], _: [f64; 2]| C64::new(0.0, 0.0);
    let (v12, diag12) = profile(&f12, &g12)?;

    // 𝒩 constants
    let k02 = k0 * k0;
    let n1: C64 = -w.integrate(QUAD, &all, |x, _| {
        let kh = khat.eval(k0, x);
        C64::new(k02 * chi.g(x[1]) + kh * kh - k02, 0.0)
    });
    let n2 = -v11.integrate(QUAD, &all, |x, (_, gr)| chi.g(x[1]) + 2.0 * gr[0]) + hole_int(&v11, &|_, n, v| v * n[0])?;
    let n3 = -v12.integrate(QUAD, &all, |_, (_, gr)| 2.0 * gr[0]) + hole_int(&v12, &|_, n, v| v * n[0])?;

    Ok(CellSolution {
        cutoff: chi,
        config: cfg.clone(),
        space: space.clone(),
        w,
        d_inf,
        v11,
        v12,
        constants: EffectiveConstants { d1, d2, n1, n2, n3, d_inf },
        diagnostics: [diag_w, diag11, diag12],
        hole_area,
    })
}

/// Traces of the macroscopic terms on Γ at one abscissa, as used by the correctors.
#[derive(Clone, Copy, Debug, Default)]
pub struct MacroTraces {
    /// ⟨u₀,₀⟩, ∂_{x₁}⟨u₀,₀⟩, ⟨∂_{x₂}u₀,₀⟩, ⟨u₀,₁⟩, ⟨u₂,₀⟩
    pub u00: C64,
    pub du00: C64,
    pub dn_u00: C64,
    pub u01: C64,
    pub u20: C64,
}

impl CellSolution {
    fn sample_profile(f: &Field, x: [f64; 2]) -> C64 {
        let x1 = (x[0] - x[0].floor()).clamp(1e-12, 1.0 - 1e-12);
        f.eval([x1, x[1]]).unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn v0(&self, x2: f64) -> f64 {
        1.0 - self.cutoff.chi(x2)
    }

    pub fn v11_at(&self, x: [f64; 2]) -> C64 {
        if x[1].abs() >= self.config.t {
            return C64::new(0.0, 0.0);
        }
        Self::sample_profile(&self.v11, x)
    }

    pub fn v12_at(&self, x: [f64; 2]) -> C64 {
        if x[1].abs() >= self.config.t {
            return C64::new(0.0, 0.0);
        }
        Self::sample_profile(&self.v12, x)
    }

    /// 𝒟(X) = X₂ + W(X); outside the truncated strip the far-field form X₂ ± D∞.
    pub fn kernel_d(&self, x: [f64; 2]) -> f64 {
        if x[1].abs() >= self.config.t {
            return x[1] + self.d_inf * x[1].signum();
        }
        x[1] + Self::sample_profile(&self.w, x).re
    }

    /// Boundary-layer corrector Π_{n,q} at microscopic point X.
    pub fn evaluate_corrector(&self, n: usize, q: usize, tr: &MacroTraces, x: [f64; 2]) -> Result<C64> {
        match (n, q) {
            (0, 0) => Ok(tr.u00 * self.v0(x[1])),
            (1, 0) | (1, 1) => Ok(C64::new(0.0, 0.0)),
            (0, 1) => Ok(tr.u01 * self.v0(x[1]) + tr.du00 * self.v11_at(x) + tr.dn_u00 * self.v12_at(x)),
            (2, 0) => Ok(tr.u20 * self.v0(x[1])),
            _ => Err(Error::IndexUnsupported(n, q)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_derivatives() {
        for c in [CutoffSpec::Smooth, CutoffSpec::Quintic] {
            let h = 1e-5;
            for &t in &[-1.7, -1.2, 1.05, 1.5, 1.93] {
                let fd1 = (c.chi(t + h) - c.chi(t - h)) / (2.0 * h);
                let fd2 = (c.d1(t + h) - c.d1(t - h)) / (2.0 * h);
                assert!((fd1 - c.d1(t)).abs() < 1e-7, "{c:?} {t}");
                assert!((fd2 - c.d2(t)).abs() < 1e-6, "{c:?} {t}");
            }
            assert_eq!(c.chi(0.5), 0.0);
            assert_eq!(c.chi(2.5), 1.0);
            assert_eq!(c.d2(0.99), 0.0);
            assert_eq!(c.d1(-2.01), 0.0);
        }
    }

    #[test]
    fn g_integrates_to_zero() {
        for c in [CutoffSpec::Smooth, CutoffSpec::Quintic] {
            let n = 40000;
            let s: f64 = (0..n).map(|i| c.g(-3.0 + 6.0 * (i as f64 + 0.5) / n as f64)).sum::<f64>() * 6.0 / n as f64;
            assert!(s.abs() < 1e-6);
        }
    }
}
