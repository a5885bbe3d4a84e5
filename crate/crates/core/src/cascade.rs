//! Macroscopic terms on the limit domain: u₀,₀, then u₀,₁ and u₂,₀ (and u₃,₀ for wide corners)
//! as explicit singular lifts plus a transmission-problem remainder.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::sparse::Triplet;
use serde::{Deserialize, Serialize};

use crate::cell::{solve_cell, CellConfig, CutoffSpec, EffectiveConstants};
use crate::corner::{extract_ell, CornerData, CornerField, CornerFrame, SingularExponents};
use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre01;
use crate::fem::space::lagrange_1d;
use crate::fem::{assemble, Constraints, DofMap, Field, InterfaceLoad, LinearSystem, Problem, Robin, Sample, Space};
use crate::geometry::{build_limit_domain, triangulate_sized, DomainParams, Side, SizeField, Tag};
use crate::nearfield::{solve_s, NearFieldConfig};
use crate::special::gamma;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMeshConfig {
    /// Bulk element size.
    pub h: f64,
    /// Element size along Γ.
    pub h_gamma: f64,
    /// Smallest element at the two corners.
    pub h_corner: f64,
    /// Growth of the element size with the distance to a corner.
    pub corner_rate: f64,
    pub degree: usize,
}

impl Default for LimitMeshConfig {
    fn default() -> Self {
        LimitMeshConfig { h: 0.04, h_gamma: 0.02, h_corner: 1e-4, corner_rate: 0.2, degree: 3 }
    }
}

/// Mesh Ω with Γ as a doubled slit.
pub fn limit_space(p: &DomainParams, cfg: &LimitMeshConfig) -> Result<Arc<Space>> {
    let g = build_limit_domain(p)?;
    let mut size = SizeField::uniform(cfg.h);
    for &c in &g.corners {
        size.corners.push((g.points[c], cfg.h_corner, cfg.corner_rate));
    }
    size.bands.push(([-p.l, p.l], 0.0, 0.0, cfg.h_gamma, 0.3));
    let mut mesh = triangulate_sized(&g, &size)?;
    mesh.split_interface(0.0)?;
    Ok(Arc::new(Space::new(Arc::new(mesh), cfg.degree)))
}

pub type LineFn<'a> = &'a (dyn Fn(f64) -> C64 + Sync);
pub type PointFn<'a> = &'a (dyn Fn([f64; 2]) -> C64 + Sync);

/// Data of −Δu − k₀²u = f with [u] = g, [∂₂u] = h0 + ∂₁(−h1) on Γ and ∂ₙu − ik₀u = robin on Γ_R.
#[derive(Default)]
pub struct TransmissionData<'a> {
    pub f: Option<PointFn<'a>>,
    pub g: Option<LineFn<'a>>,
    pub h0: Option<PointFn<'a>>,
    /// Flux part: contributes −∫ h1 ∂₁⟨v⟩.
    pub h1: Option<PointFn<'a>>,
    pub robin_plus: C64,
    pub robin_minus: C64,
}

/// Coincident (top, bottom) dof pairs on Γ.
pub fn interface_dof_pairs(space: &Space) -> Result<Vec<(usize, usize)>> {
    let key = |d: &usize| space.dof_xy[*d][0];
    let mut top = space.boundary_dofs(Tag::GammaInterface_top);
    let mut bot = space.boundary_dofs(Tag::GammaInterface_bottom);
    if top.is_empty() {
        return Err(Error::MissingInterface);
    }
    top.sort_by(|a, b| key(a).total_cmp(&key(b)));
    bot.sort_by(|a, b| key(a).total_cmp(&key(b)));
    if top.len() != bot.len() {
        return Err(Error::SingularSystem(format!("{} top and {} bottom interface dofs", top.len(), bot.len())));
    }
    let mut out = Vec::with_capacity(top.len());
    for (t, b) in top.into_iter().zip(bot) {
        let (xt, xb) = (space.dof_xy[t], space.dof_xy[b]);
        if (xt[0] - xb[0]).abs() > 1e-10 || xt[1].abs() > 1e-12 || xb[1].abs() > 1e-12 {
            return Err(Error::SingularSystem(format!("unmatched interface dof at x1 = {}", xt[0])));
        }
        out.push((t, b));
    }
    Ok(out)
}

/// L² projection of g(x₁) onto the traces on the top edges of Γ; returns (dof, value) pairs.
pub fn project_on_gamma(space: &Space, g: LineFn) -> Result<Vec<(usize, C64)>> {
    let edges = space.mesh.edges_with_tag(Tag::GammaInterface_top);
    let p = space.degree();
    let mut dofs: Vec<usize> = edges.iter().flat_map(|e| space.edge_dofs(e[0], e[1])).collect();
    dofs.sort_unstable();
    dofs.dedup();
    let index = |d: usize| dofs.binary_search(&d).unwrap();
    let rule = gauss_legendre01(p + 4);
    let mut trip = Vec::new();
    let mut rhs = vec![ZERO; dofs.len()];
    for e in &edges {
        let ed = space.edge_dofs(e[0], e[1]);
        let (pa, pb) = (space.mesh.nodes[e[0]], space.mesh.nodes[e[1]]);
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        for (t, w) in &rule {
            let (v, _) = lagrange_1d(p, *t);
            let x1 = pa[0] + t * (pb[0] - pa[0]);
            let gx = g(x1);
            for i in 0..=p {
                let ii = index(ed[i]);
                rhs[ii] += gx * v[i] * (w * len);
                for j in 0..=p {
                    trip.push(Triplet::new(ii, index(ed[j]), C64::new(v[i] * v[j] * w * len, 0.0)));
                }
            }
        }
    }
    let n = dofs.len();
    let sys = LinearSystem { n, triplets: trip, rhs, dofmap: DofMap::new(n, &Constraints::default())? };
    let (x, _) = sys.solve_raw()?;
    Ok(dofs.into_iter().zip(x).collect())
}

/// Solve the transmission problem on a slit mesh. Returns the field and the relative residual.
pub fn solve_transmission(space: &Arc<Space>, k0: f64, data: &TransmissionData) -> Result<(Field, f64)> {
    let pairs = interface_dof_pairs(space)?;
    let mut jump = std::collections::HashMap::new();
    if let Some(g) = data.g {
        jump.extend(project_on_gamma(space, g)?);
    }
    let mut cons = Constraints::default();
    for (t, b) in &pairs {
        let gv = jump.get(t).copied().unwrap_or(ZERO);
        cons.link(*b, *t, -gv);
    }
    let k2v = C64::new(k0 * k0, 0.0);
    let k2 = move |_: [f64; 2]| k2v;
    let alpha = C64::new(0.0, -k0);
    let (rp, rm) = (data.robin_plus, data.robin_minus);
    let gp = move |_: [f64; 2], _: [f64; 2]| rp;
    let gm = move |_: [f64; 2], _: [f64; 2]| rm;
    let mut prob = Problem::new(&k2);
    prob.f = data.f;
    prob.robin.push(Robin { tag: Tag::GammaR_plus, alpha, g: (rp != ZERO).then_some(&gp as _) });
    prob.robin.push(Robin { tag: Tag::GammaR_minus, alpha, g: (rm != ZERO).then_some(&gm as _) });
    let zero = |_: [f64; 2]| ZERO;
    if data.h0.is_some() || data.h1.is_some() {
        prob.interface = Some(InterfaceLoad { h0: data.h0.unwrap_or(&zero), h1: data.h1 });
    }
    let sys = assemble(space, &prob, &cons)?;
    let (x, res) = sys.solve_raw()?;
    Ok((Field::new(space.clone(), sys.dofmap.expand(&x)), res))
}

/// Traces of a field on Γ: (mean value, mean ∂₁, mean ∂₂) at x₁.
fn gamma_means(u: &Field, x1: f64) -> Result<(C64, C64, C64)> {
    let t = u.interface_trace(x1)?;
    Ok((t.mean(), t.mean_dt(), t.mean_dn()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub mesh: LimitMeshConfig,
    /// Radii of the corner-coefficient extraction.
    pub radii: Vec<f64>,
    pub cutoff: CutoffSpec,
    pub cell: CellConfig,
    pub nearfield: NearFieldConfig,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            mesh: LimitMeshConfig::default(),
            radii: vec![0.1, 0.15, 0.2],
            cutoff: CutoffSpec::Smooth,
            cell: CellConfig::default(),
            nearfield: NearFieldConfig::default(),
        }
    }
}

const SIDES: [Side; 2] = [Side::Plus, Side::Minus];

fn side_index(s: Side) -> usize {
    match s {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

/// Lifted term: Σ lifts + hat.
#[derive(Clone, Debug)]
pub struct LiftedTerm {
    pub hat: Field,
    pub lifts: Vec<CornerField>,
    /// Lift coefficients per side (ℓ₂,₀,₋₁ for u₂,₀; ℓ₃,₀,₋₁ then ℓ₃,₀,₋₂ for u₃,₀; (k₀/2λ)ℓ₁ for u₀,₁).
    pub coeffs: Vec<[C64; 2]>,
    pub residual: f64,
    /// ℓ₀ and ℓ₁ of the term at each corner.
    pub corners: [CornerData; 2],
}

impl LiftedTerm {
    /// Value and gradient; `top` picks the side on Γ.
    pub fn eval_at(&self, hat: Sample, x: [f64; 2], top: Option<bool>) -> Sample {
        let mut s = hat;
        for l in &self.lifts {
            let (v, g) = l.eval(x, top);
            s.0 += v;
            s.1[0] += g[0];
            s.1[1] += g[1];
        }
        s
    }

    pub fn lifts_value(&self, x: [f64; 2], top: Option<bool>) -> C64 {
        self.lifts.iter().map(|l| l.value(x, top)).sum()
    }
}

/// Every macroscopic term of the truncated expansion. u₁,₀ = u₁,₁ = 0 are not stored.
#[derive(Clone, Debug)]
pub struct ExpansionSet {
    pub params: DomainParams,
    pub exps: SingularExponents,
    pub constants: EffectiveConstants,
    pub cutoff: CutoffSpec,
    pub u00: Field,
    pub u01: LiftedTerm,
    pub u20: LiftedTerm,
    pub u30: Option<LiftedTerm>,
    /// ℓ₀..ℓ₃(u₀,₀) and 𝓛₋₁(S₁), [𝓛₋₂(S₁), 𝓛₋₁(S₂)] per side (+, −).
    pub corners: [CornerData; 2],
    pub u00_residual: f64,
}

fn frame(p: &DomainParams, s: Side) -> CornerFrame {
    CornerFrame::macro_corner(s, p.l, p.theta)
}

/// u₀,₀ and ℓ₀..ℓ₃ at both corners.
pub fn compute_u00(p: &DomainParams, space: &Arc<Space>, radii: &[f64]) -> Result<(Field, f64, [CornerData; 2])> {
    let data = TransmissionData { robin_minus: p.robin_minus(), ..Default::default() };
    let (u, res) = solve_transmission(space, p.k0, &data).map_err(|e| e.at("u00"))?;
    let exps = SingularExponents::new(p.theta)?;
    let mut corners: [CornerData; 2] = Default::default();
    for s in SIDES {
        let c = &mut corners[side_index(s)];
        c.side = Some(s);
        c.radii = radii.to_vec();
        for m in 0..4 {
            let e = extract_ell(&u, &frame(p, s), &exps, p.k0, m, radii, None)?;
            c.ell.push(e.value);
            c.ell_scatter.push(e.scatter_rel);
        }
    }
    Ok((u, res, corners))
}

/// u₀,₁ = Σ (k₀/2λ)ℓ₁χ_L𝓙 + û₀,₁.
pub fn compute_u01(
    p: &DomainParams,
    space: &Arc<Space>,
    u00: &Field,
    u00_corners: &[CornerData; 2],
    consts: &EffectiveConstants,
    cutoff: CutoffSpec,
    radii: &[f64],
) -> Result<LiftedTerm> {
    let exps = SingularExponents::new(p.theta)?;
    let k0 = p.k0;
    let mut lifts = Vec::new();
    let mut sing = Vec::new();
    for s in SIDES {
        let ell1 = u00_corners[side_index(s)].ell[1];
        lifts.push(CornerField::lift_j(frame(p, s), &exps, consts, k0, ell1, cutoff, p.l)?);
        sing.push(CornerField::regular(frame(p, s), &exps, 1, k0, ell1, Some((cutoff, p.l))));
    }
    let c = *consts;
    // layer data of a corner field at x₁: side means and jumps
    let layer = |f: &CornerField, x1: f64| {
        let r = (x1 - f.frame.origin[0]).abs();
        (f.layer_derivatives(r, true), f.layer_derivatives(r, false))
    };
    let g = |x1: f64| -> C64 {
        let Ok((_, d1, d2)) = gamma_means(u00, x1) else { return ZERO };
        let lift_jump: C64 = lifts.iter().map(|f| {
            let (t, b) = layer(f, x1);
            t.u - b.u
        }).sum();
        c.d1 * d1 + c.d2 * d2 - lift_jump
    };
    // h = 𝒩₁⟨u⟩ + ∂₁q, q = 𝒩₂∂₁⟨u⟩ + 𝒩₃⟨∂₂u⟩; the singular part of q is differentiated
    // analytically, the rest is integrated by parts
    let h0 = |x: [f64; 2]| -> C64 {
        let Ok((m, _, _)) = gamma_means(u00, x[0]) else { return ZERO };
        let mut v = c.n1 * m;
        for (s, l) in sing.iter().zip(&lifts) {
            let (t, b) = layer(s, x[0]);
            v += c.n2 * 0.5 * (t.d11 + b.d11) + c.n3 * 0.5 * (t.d12 + b.d12);
            let (lt, lb) = layer(l, x[0]);
            v -= lt.d2 - lb.d2;
        }
        v
    };
    let h1 = |x: [f64; 2]| -> C64 {
        let Ok((_, d1, d2)) = gamma_means(u00, x[0]) else { return ZERO };
        let (mut r1, mut r2) = (d1, d2);
        for s in &sing {
            let (t, b) = layer(s, x[0]);
            r1 -= 0.5 * (t.d1 + b.d1);
            r2 -= 0.5 * (t.d2 + b.d2);
        }
        -(c.n2 * r1 + c.n3 * r2)
    };
    let f = |x: [f64; 2]| -> C64 { lifts.iter().map(|l| l.commutator(x)).sum() };
    let data = TransmissionData { f: Some(&f), g: Some(&g), h0: Some(&h0), h1: Some(&h1), ..Default::default() };
    let (hat, residual) = solve_transmission(space, k0, &data).map_err(|e| e.at("u01"))?;
    let coeffs = vec![[lifts[0].coeff, lifts[1].coeff]];
    let mut term = LiftedTerm { hat, lifts, coeffs, residual, corners: Default::default() };
    // ℓ₀, ℓ₁ of u₀,₁ once the lift and the r^{λn−1} terms carried by ℓ₂, ℓ₃ of u₀,₀ are removed
    for s in SIDES {
        let i = side_index(s);
        let mut known: Vec<CornerField> = vec![term.lifts[i].uncut()];
        for n in 2..=3 {
            let elln = u00_corners[i].ell[n];
            if let Ok(f) = CornerField::lift_jn(frame(p, s), &exps, consts, n, k0, elln, None) {
                known.push(f);
            }
        }
        let lift_i = &term.lifts[i];
        let sub = |x: [f64; 2], top: bool| -> C64 {
            known.iter().map(|f| f.value(x, Some(top))).sum::<C64>() - lift_i.value(x, Some(top))
        };
        term.corners[i] = corner_data(&term.hat, p, s, &exps, radii, Some(&sub), 2)?;
    }
    Ok(term)
}

/// ℓ₀..ℓ_{m−1} of the hat part of a term (after subtracting `sub`).
fn corner_data(
    hat: &Field,
    p: &DomainParams,
    s: Side,
    exps: &SingularExponents,
    radii: &[f64],
    sub: Option<&dyn Fn([f64; 2], bool) -> C64>,
    m: usize,
) -> Result<CornerData> {
    let mut c = CornerData { side: Some(s), radii: radii.to_vec(), ..Default::default() };
    for k in 0..m {
        let e = extract_ell(hat, &frame(p, s), exps, p.k0, k, radii, sub)?;
        c.ell.push(e.value);
        c.ell_scatter.push(e.scatter_rel);
    }
    Ok(c)
}

/// Lifts of Y type only, no interface data: solves for the hat part.
fn y_lifted(p: &DomainParams, space: &Arc<Space>, lifts: Vec<CornerField>, coeffs: Vec<[C64; 2]>, radii: &[f64], stage: &'static str) -> Result<LiftedTerm> {
    let exps = SingularExponents::new(p.theta)?;
    let f = |x: [f64; 2]| -> C64 { lifts.iter().map(|l| l.commutator(x)).sum() };
    let data = TransmissionData { f: Some(&f), ..Default::default() };
    let (hat, residual) = solve_transmission(space, p.k0, &data).map_err(|e| e.at(stage))?;
    let mut corners: [CornerData; 2] = Default::default();
    for s in SIDES {
        corners[side_index(s)] = corner_data(&hat, p, s, &exps, radii, None, 2)?;
    }
    Ok(LiftedTerm { hat, lifts, coeffs, residual, corners })
}

/// ℓ₃,₀,₋ᵢ-type coefficient −π𝓛ℓ(k₀/2)^{λ_target}/(Γ(λᵢ)Γ(λ_j+1)).
fn y_coefficient(ell: C64, lm: C64, k0: f64, l_target: f64, li: f64, lj: f64) -> C64 {
    -PI * ell * lm * (0.5 * k0).powf(l_target) / (gamma(li) * gamma(lj + 1.0))
}

/// u₂,₀ = Σ ℓ₂,₀,₋₁χ_L𝓨₁ + û₂,₀, with 𝓛₋₁(S₁) per side.
pub fn compute_u20(
    p: &DomainParams,
    space: &Arc<Space>,
    u00_corners: &[CornerData; 2],
    l_minus_1: [C64; 2],
    cutoff: CutoffSpec,
    radii: &[f64],
) -> Result<LiftedTerm> {
    let exps = SingularExponents::new(p.theta)?;
    let (l1, l2) = (exps.lambda_n(1), exps.lambda_n(2));
    let mut lifts = Vec::new();
    let mut co = [ZERO; 2];
    for s in SIDES {
        let i = side_index(s);
        co[i] = y_coefficient(u00_corners[i].ell[1], l_minus_1[i], p.k0, l2, l1, l1);
        lifts.push(CornerField::lift_y(frame(p, s), &exps, 1, p.k0, co[i], cutoff, p.l));
    }
    y_lifted(p, space, lifts, vec![co], radii, "u20")
}

/// u₃,₀ with the two Y lifts; `l_m1_s2` = 𝓛₋₁(S₂), `l_m2_s1` = 𝓛₋₂(S₁).
pub fn compute_u30(
    p: &DomainParams,
    space: &Arc<Space>,
    u00_corners: &[CornerData; 2],
    l_m1_s2: [C64; 2],
    l_m2_s1: [C64; 2],
    cutoff: CutoffSpec,
    radii: &[f64],
) -> Result<LiftedTerm> {
    let exps = SingularExponents::new(p.theta)?;
    let l = |n| exps.lambda_n(n);
    let mut lifts = Vec::new();
    let mut c1 = [ZERO; 2];
    let mut c2 = [ZERO; 2];
    for s in SIDES {
        let i = side_index(s);
        let ell = &u00_corners[i].ell;
        c1[i] = y_coefficient(ell[2], l_m1_s2[i], p.k0, l(3), l(1), l(2));
        c2[i] = y_coefficient(ell[1], l_m2_s1[i], p.k0, l(3), l(2), l(1));
        lifts.push(CornerField::lift_y(frame(p, s), &exps, 1, p.k0, c1[i], cutoff, p.l));
        lifts.push(CornerField::lift_y(frame(p, s), &exps, 2, p.k0, c2[i], cutoff, p.l));
    }
    y_lifted(p, space, lifts, vec![c1, c2], radii, "u30")
}

/// Whether u₃,₀ enters the order-2 truncation (Θ > 3π/2).
pub fn needs_u30(theta: f64) -> bool {
    theta > 1.5 * PI + 1e-12
}

/// The whole cascade: cell constants, u₀,₀, u₀,₁, near fields, u₂,₀ (and u₃,₀).
pub fn build_expansion(p: &DomainParams, cfg: &CascadeConfig) -> Result<ExpansionSet> {
    p.validate()?;
    let exps = SingularExponents::new(p.theta)?;
    let cell = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &cfg.cell).map_err(|e| e.at("cell"))?;
    let consts = cell.constants;
    let space = limit_space(p, &cfg.mesh).map_err(|e| e.at("limit mesh"))?;
    let (u00, u00_residual, mut corners) = compute_u00(p, &space, &cfg.radii)?;
    let u01 = compute_u01(p, &space, &u00, &corners, &consts, cfg.cutoff, &cfg.radii)?;
    let wide = needs_u30(p.theta);
    // without holes the near field is the bare block and every 𝓛 vanishes
    let mut lm = [[ZERO; 3]; 2];
    if p.hole.is_some() {
        for s in SIDES {
            let i = side_index(s);
            let s1 = solve_s(s, 1, &exps, &consts, p.hole.as_ref(), Some(&cell), &cfg.nearfield).map_err(|e| e.at("near field S1"))?;
            lm[i][0] = s1.l_minus_1();
            lm[i][1] = s1.l_minus_2().unwrap_or(ZERO);
            if wide {
                let s2 = solve_s(s, 2, &exps, &consts, p.hole.as_ref(), Some(&cell), &cfg.nearfield).map_err(|e| e.at("near field S2"))?;
                lm[i][2] = s2.l_minus_1();
            }
        }
    }
    for s in SIDES {
        let i = side_index(s);
        corners[i].l_minus = if wide { lm[i].to_vec() } else { vec![lm[i][0]] };
    }
    let u20 = compute_u20(p, &space, &corners, [lm[0][0], lm[1][0]], cfg.cutoff, &cfg.radii)?;
    let u30 = if wide {
        Some(compute_u30(p, &space, &corners, [lm[0][2], lm[1][2]], [lm[0][1], lm[1][1]], cfg.cutoff, &cfg.radii)?)
    } else {
        None
    };
    Ok(ExpansionSet { params: p.clone(), exps, constants: consts, cutoff: cfg.cutoff, u00, u01, u20, u30, corners, u00_residual })
}

impl ExpansionSet {
    /// Values of u₀,₀, u₀,₁, u₂,₀ and u₃,₀ (0 when absent) at a point off Γ.
    pub fn terms_at(&self, x: [f64; 2]) -> Result<[Sample; 4]> {
        let sp = &self.u00.space;
        let (k, l) = sp.locate(x).ok_or(Error::OutsideRegion(x[0], x[1]))?;
        let on_gamma = x[1].abs() < 1e-12 && x[0].abs() <= self.params.l;
        if on_gamma {
            return Err(Error::OutsideRegion(x[0], x[1]));
        }
        let z = (ZERO, [ZERO; 2]);
        let u30 = match &self.u30 {
            Some(t) => t.eval_at(t.hat.eval_in(k, l), x, None),
            None => z,
        };
        Ok([
            self.u00.eval_in(k, l),
            self.u01.eval_at(self.u01.hat.eval_in(k, l), x, None),
            self.u20.eval_at(self.u20.hat.eval_in(k, l), x, None),
            u30,
        ])
    }

    /// δ-weights of the terms in the truncation of the given order.
    pub fn weights(&self, order: usize, delta: f64) -> [f64; 4] {
        let l2 = self.exps.lambda_n(2);
        let l3 = self.exps.lambda_n(3);
        match order {
            0 => [1.0, 0.0, 0.0, 0.0],
            1 => [1.0, delta, 0.0, 0.0],
            _ => [1.0, delta, delta.powf(l2), if self.u30.is_some() { delta.powf(l3) } else { 0.0 }],
        }
    }

    /// Truncated macroscopic sum (value and gradient).
    pub fn truncation_sample(&self, order: usize, x: [f64; 2], delta: f64) -> Result<Sample> {
        let t = self.terms_at(x)?;
        let w = self.weights(order, delta);
        let mut s = (ZERO, [ZERO; 2]);
        for (ti, wi) in t.iter().zip(w) {
            s.0 += ti.0 * wi;
            s.1[0] += ti.1[0] * wi;
            s.1[1] += ti.1[1] * wi;
        }
        Ok(s)
    }

    pub fn l_minus_1(&self) -> [C64; 2] {
        [0, 1].map(|i| self.corners[i].l_minus.first().copied().unwrap_or(ZERO))
    }

    pub fn summary(&self) -> CascadeSummary {
        CascadeSummary {
            lambda: (1..=3).map(|n| self.exps.lambda_n(n)).collect(),
            constants: self.constants,
            corners: self.corners.clone(),
            u01_lift: self.u01.coeffs.clone(),
            u01_corners: self.u01.corners.clone(),
            u20_lift: self.u20.coeffs.clone(),
            u20_corners: self.u20.corners.clone(),
            u30_lift: self.u30.as_ref().map(|t| t.coeffs.clone()),
            dofs: self.u00.space.ndof,
            residuals: [self.u00_residual, self.u01.residual, self.u20.residual],
        }
    }
}

/// Evaluate the truncation of the given order (0, 1 or 2) at a point of Ω off Γ.
pub fn evaluate_truncation(set: &ExpansionSet, order: usize, x: [f64; 2], delta: f64) -> Result<C64> {
    Ok(set.truncation_sample(order, x, delta)?.0)
}

/// Serializable coefficients of an expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeSummary {
    pub lambda: Vec<f64>,
    pub constants: EffectiveConstants,
    pub corners: [CornerData; 2],
    pub u01_lift: Vec<[C64; 2]>,
    pub u01_corners: [CornerData; 2],
    pub u20_lift: Vec<[C64; 2]>,
    pub u20_corners: [CornerData; 2],
    pub u30_lift: Option<Vec<[C64; 2]>>,
    pub dofs: usize,
    pub residuals: [f64; 3],
}
