//! Near-field singularities S_n on the truncated perforated cone and their coefficients 𝓛₋ₘ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cell::{CellSolution, CutoffSpec, EffectiveConstants};
use crate::corner::{first_order_profile, regular_profile, AngularProfile, CornerFrame, SingularExponents};
use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre01;
use crate::fem::{solve_problem, Constraints, Field, Problem, Space};
use crate::geometry::{build_cone_geometry, triangulate_sized, HoleSpec, Side, SizeField, Tag};
use crate::numerics::{fit_line, lstsq};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearFieldConfig {
    pub rmax: f64,
    /// Element size along the perforated half-line.
    pub h_layer: f64,
    pub h_hole: f64,
    /// Largest element size far from the layer.
    pub h_far: f64,
    /// Smallest element size at the apex.
    pub h_apex: f64,
    pub degree: usize,
    pub cutoff: CutoffSpec,
}

impl Default for NearFieldConfig {
    fn default() -> Self {
        NearFieldConfig {
            rmax: 20.0,
            h_layer: 0.2,
            h_hole: 0.04,
            h_far: 1.5,
            h_apex: 0.01,
            degree: 3,
            cutoff: CutoffSpec::Smooth,
        }
    }
}

/// Fitted decomposition of S_n − block on the matching annulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFit {
    /// Coefficient in front of the imposed block (ideally 1).
    pub a: C64,
    /// 𝓛₋₁ after division by `a`.
    pub l_minus_1: C64,
    /// 𝓛₋₂, absent when R^{−2λ} coincides with the next block exponent λ_n − 2.
    pub l_minus_2: Option<C64>,
    /// Per-radius values of 𝓛₋₁ with the other fitted terms held fixed.
    pub radii: Vec<f64>,
    pub per_radius: Vec<C64>,
    pub scatter: f64,
    /// Coefficient of ln R (relative to `a`) when it is added to the basis.
    pub log_coeff: f64,
    /// Decay exponent of the cos(λθ)-content of S − block over the annulus.
    pub decay_exponent: f64,
    /// RMS misfit relative to the RMS of S − block.
    pub misfit: f64,
}

#[derive(Clone, Debug)]
pub struct NearFieldSolution {
    pub side: Side,
    pub n: usize,
    pub rmax: f64,
    pub field: Field,
    pub block: Block,
    pub fit: BlockFit,
    pub residual: f64,
}

impl NearFieldSolution {
    pub fn l_minus_1(&self) -> C64 {
        self.fit.l_minus_1
    }

    pub fn l_minus_2(&self) -> Option<C64> {
        self.fit.l_minus_2
    }
}

/// R^μ w(θ) for a piecewise profile.
fn power(p: &AngularProfile, r: f64, t: f64, top: Option<bool>) -> C64 {
    p.eval(t, top).0 * r.powf(p.mu)
}

/// Two-term macroscopic block R^{λ_n} w_{n,0} + R^{λ_n − 1} w_{n,1} around the cone apex.
#[derive(Clone, Debug)]
pub struct Block {
    pub frame: CornerFrame,
    pub w0: AngularProfile,
    pub w1: AngularProfile,
}

impl Block {
    pub fn new(exps: &SingularExponents, consts: &EffectiveConstants, n: usize, side: Side) -> Result<Self> {
        Ok(Block {
            frame: CornerFrame::at_origin(side, exps.theta),
            w0: regular_profile(exps, n, side),
            w1: first_order_profile(exps, consts, n, side)?,
        })
    }

    pub fn eval(&self, x: [f64; 2], top: Option<bool>) -> C64 {
        let (r, t) = self.frame.polar(x);
        power(&self.w0, r, t, top) + power(&self.w1, r, t, top)
    }

    /// Mean trace on the layer line and, for the leading term, ∂₁ of the trace and the mean normal derivative.
    fn layer(&self, x1: f64) -> (C64, C64, C64) {
        let r = x1.abs().max(1e-12);
        let (_, _, g) = self.frame.sector();
        let mean = 0.5 * (power(&self.w0, r, g, Some(true)) + power(&self.w1, r, g, Some(true)))
            + 0.5 * (power(&self.w0, r, g, Some(false)) + power(&self.w1, r, g, Some(false)));
        let (w, dw) = self.w0.eval(g, None);
        let mu = self.w0.mu;
        let eps = -self.frame.side.sign();
        let d1 = w * (eps * mu * r.powf(mu - 1.0));
        let d2 = dw * (eps * r.powf(mu - 1.0));
        (mean, d1, d2)
    }
}

/// Dirichlet data on the outer arc: the block away from the layer, blended with its
/// layer limit and the cell correctors within distance 2 of it.
fn arc_data(block: &Block, cell: Option<&CellSolution>, chi: CutoffSpec, x: [f64; 2]) -> C64 {
    let b = block.eval(x, Some(x[1] >= 0.0));
    let c = chi.chi(x[1]);
    // only the perforated half-line carries a boundary layer; the opposite wall does not
    if c >= 1.0 || x[0] * block.frame.side.sign() > 0.0 {
        return b;
    }
    let (mean, d1, d2) = block.layer(x[0]);
    let mut v = c * b + (1.0 - c) * mean;
    if let Some(cell) = cell {
        v += d1 * cell.v11_at(x) + d2 * cell.v12_at(x);
    } else {
        v += (1.0 - c) * x[1] * d2;
    }
    v
}

pub fn cone_space(side: Side, theta: f64, hole: Option<&HoleSpec>, cfg: &NearFieldConfig) -> Result<Arc<Space>> {
    let arc = ((theta * cfg.rmax) / cfg.h_far).ceil().max(32.0) as usize;
    let g = build_cone_geometry(side, theta, cfg.rmax, hole, arc)?;
    let mut size = SizeField::uniform(cfg.h_far);
    size.corners.push(([0.0, 0.0], cfg.h_apex, 0.3));
    if hole.is_some() {
        let xr = match side {
            Side::Plus => [-cfg.rmax, 0.0],
            Side::Minus => [0.0, cfg.rmax],
        };
        size.bands.push((xr, 0.0, 2.0, cfg.h_layer, 0.15));
        for c in &g.hole_centers {
            let r = hole_radius(hole.unwrap());
            size.disks.push((*c, r, cfg.h_hole, 0.3));
        }
    }
    let mesh = triangulate_sized(&g, &size)?;
    Ok(Arc::new(Space::new(Arc::new(mesh), cfg.degree)))
}

fn hole_radius(h: &HoleSpec) -> f64 {
    let c = h.interior_point();
    h.polygon().iter().map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt()).fold(0.0, f64::max)
}

/// Solve ΔS = 0 in the truncated cone, Neumann on holes and sides, block data on the arc.
#[allow(clippy::too_many_arguments)]
pub fn solve_s(
    side: Side,
    n: usize,
    exps: &SingularExponents,
    consts: &EffectiveConstants,
    hole: Option<&HoleSpec>,
    cell: Option<&CellSolution>,
    cfg: &NearFieldConfig,
) -> Result<NearFieldSolution> {
    if !(1..=2).contains(&n) {
        return Err(Error::IndexUnsupported(n, 0));
    }
    let space = cone_space(side, exps.theta, hole, cfg)?;
    let block = Block::new(exps, consts, n, side)?;
    let mut cons = Constraints::default();
    for d in space.boundary_dofs(Tag::Truncation) {
        let x = space.dof_xy[d];
        let v = if hole.is_some() { arc_data(&block, cell, cfg.cutoff, x) } else { block.eval(x, None) };
        cons.fix(d, v);
    }
    let k2 = |_: [f64; 2]| C64::new(0.0, 0.0);
    let prob = Problem::new(&k2);
    let (field, residual) = solve_problem(&space, &prob, &cons)?;
    let fit = extract_l(&field, &block, exps, n, cfg.rmax)?;
    Ok(NearFieldSolution { side, n, rmax: cfg.rmax, field, block, fit, residual })
}

/// Basis functions R^μ(c cos μθ + s sin μθ) restricted to one sub-interval.
#[derive(Clone, Copy)]
enum Basis {
    Mode(usize, f64),
    Piece(usize, f64, bool),
    Const,
    Log,
}

fn basis_eval(b: Basis, exps: &SingularExponents, frame: &CornerFrame, r: f64, t: f64) -> f64 {
    match b {
        Basis::Mode(m, e) => regular_profile(exps, m, frame.side).eval(t, None).0.re * r.powf(e),
        Basis::Piece(piece, mu, sine) => {
            if frame.piece(t, None) != piece {
                return 0.0;
            }
            let a = mu * t;
            r.powf(mu) * if sine { a.sin() } else { a.cos() }
        }
        Basis::Const => 1.0,
        Basis::Log => r.ln(),
    }
}

/// Fit S − block on the annulus Rmax/4 < R < Rmax/2, |X₂| > 3.
pub fn extract_l(field: &Field, block: &Block, exps: &SingularExponents, n: usize, rmax: f64) -> Result<BlockFit> {
    extract_l_with(&|x| field.eval(x), block, exps, n, rmax)
}

/// As `extract_l` for any sampler of S.
pub fn extract_l_with(
    sample: &dyn Fn([f64; 2]) -> Option<C64>,
    block: &Block,
    exps: &SingularExponents,
    n: usize,
    rmax: f64,
) -> Result<BlockFit> {
    let frame = block.frame;
    let (a, b, _) = frame.sector();
    let l = exps.lambda;
    let ln = exps.lambda_n(n);
    // R^{λ_n − 2} and R^{−2λ} coincide when λ_n − 2 = −2λ (Θ = 3π/2 for n = 1)
    let has_l2 = (ln - 2.0 + 2.0 * l).abs() > 1e-9;
    let mut basis = vec![Basis::Mode(n, ln), Basis::Mode(1, -l), Basis::Mode(3 - n, exps.lambda_n(3 - n)), Basis::Const];
    if has_l2 {
        basis.push(Basis::Mode(2, -2.0 * l));
    }
    for piece in 0..2 {
        for sine in [false, true] {
            basis.push(Basis::Piece(piece, ln - 2.0, sine));
        }
    }
    let nr = 12;
    let rule = gauss_legendre01(96);
    let mut pts = Vec::new();
    for i in 0..nr {
        let r = rmax * (0.25 + 0.25 * (i as f64 + 0.5) / nr as f64);
        for (s, _) in &rule {
            let t = a + (b - a) * s;
            let x = frame.point(r, t);
            if x[1].abs() <= 3.0 {
                continue;
            }
            let u = sample(x).ok_or(Error::OutsideRegion(x[0], x[1]))?;
            pts.push((i, r, t, u - block.eval(x, None)));
        }
    }
    let design = |basis: &[Basis]| -> Vec<Vec<f64>> {
        pts.iter().map(|(_, r, t, _)| basis.iter().map(|bf| basis_eval(*bf, exps, &frame, *r, *t)).collect()).collect()
    };
    let rhs: Vec<C64> = pts.iter().map(|p| p.3).collect();
    let rows = design(&basis);
    let c = lstsq(&rows, &rhs)?;
    let amp = C64::new(1.0, 0.0) + c[0];
    let l_minus_1 = c[1] / amp;
    let l_minus_2 = has_l2.then(|| c[4] / amp);

    let mut res2 = 0.0;
    let mut tot2 = 0.0;
    for (row, y) in rows.iter().zip(&rhs) {
        let m: C64 = row.iter().zip(&c).map(|(a, x)| x * a).sum();
        res2 += (y - m).norm_sqr();
        tot2 += y.norm_sqr();
    }
    let misfit = (res2 / tot2.max(f64::MIN_POSITIVE)).sqrt();

    // per-radius 𝓛₋₁ with every other fitted term removed
    let mut radii = Vec::new();
    let mut per_radius = Vec::new();
    let mut proj = Vec::new();
    for i in 0..nr {
        let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
        let (mut pnum, mut pden) = (C64::new(0.0, 0.0), 0.0);
        let mut r = 0.0;
        for ((k, rr, t, _), (row, y)) in pts.iter().zip(rows.iter().zip(&rhs)) {
            if *k != i {
                continue;
            }
            r = *rr;
            let others: C64 = row.iter().zip(&c).enumerate().filter(|(j, _)| *j != 1).map(|(_, (a, x))| x * a).sum();
            num += (y - others) * row[1];
            den += row[1] * row[1];
            let w = basis_eval(Basis::Mode(1, 0.0), exps, &frame, *rr, *t);
            pnum += (y - c[0] * row[0]) * w;
            pden += w * w;
        }
        if den > 0.0 {
            radii.push(r);
            per_radius.push(num / den / amp);
            proj.push((r, (pnum / pden).norm()));
        }
    }
    let scatter = per_radius.iter().map(|v| (v - l_minus_1).norm()).fold(0.0, f64::max) / l_minus_1.norm().max(1e-300);
    let (lx, ly): (Vec<f64>, Vec<f64>) = proj.iter().map(|(r, v)| (r.ln(), v.max(1e-300).ln())).unzip();
    let decay_exponent = fit_line(&lx, &ly).map(|f| f.0).unwrap_or(f64::NAN);

    let mut with_log = basis.clone();
    with_log.push(Basis::Log);
    let cl = lstsq(&design(&with_log), &rhs)?;
    let log_coeff = cl[with_log.len() - 1].norm() / (C64::new(1.0, 0.0) + cl[0]).norm();

    Ok(BlockFit { a: amp, l_minus_1, l_minus_2, radii, per_radius, scatter, log_coeff, decay_exponent, misfit })
}
