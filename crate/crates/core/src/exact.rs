//! Direct solution of the perturbed problem on Ω^δ, the reference for the error studies.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assemble::for_each_edge_qp;
use crate::fem::{solve_problem, Constraints, Field, Problem, Robin, Space};
use crate::geometry::spec::inside_outline;
use crate::geometry::{build_perforated_domain, triangulate_sized, DomainParams, GeometrySpec, SizeField, Tag};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMeshConfig {
    /// Bulk element size.
    pub h: f64,
    pub h_corner: f64,
    pub corner_rate: f64,
    /// Element size in the layer strip, in units of δ.
    pub h_layer: f64,
    /// Element size at the holes, in units of δ.
    pub h_hole: f64,
    /// Growth rate away from the layer and the holes.
    pub layer_rate: f64,
    pub degree: usize,
    /// Mesh lines along ∂Ω_α, so that Ω_α is a union of elements.
    pub alpha: Option<f64>,
}

impl Default for ExactMeshConfig {
    fn default() -> Self {
        ExactMeshConfig {
            h: 0.04,
            h_corner: 1e-4,
            corner_rate: 0.2,
            h_layer: 0.25,
            h_hole: 0.05,
            layer_rate: 0.25,
            degree: 3,
            alpha: Some(0.25),
        }
    }
}

impl ExactMeshConfig {
    /// Overkill variant: sizes scaled by 0.7 (about twice the dofs) and deeper corner grading.
    /// Halving everything does not fit in 5 GB at δ = 1/64.
    pub fn refined(&self) -> Self {
        ExactMeshConfig {
            h: self.h * 0.7,
            h_corner: self.h_corner / 4.0,
            h_layer: self.h_layer * 0.7,
            h_hole: self.h_hole * 0.7,
            ..self.clone()
        }
    }
}

/// What was meshed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshDescriptor {
    pub delta: f64,
    pub nodes: usize,
    pub elements: usize,
    pub holes: usize,
    pub min_edge: f64,
    pub min_angle_deg: f64,
}

#[derive(Clone, Debug)]
pub struct ExactSolveResult {
    pub u_delta: Field,
    pub ndof: usize,
    pub residual: f64,
    pub mesh: MeshDescriptor,
}

/// k^δ as a function of the physical point.
pub fn kdelta_field(p: &DomainParams, delta: f64) -> impl Fn([f64; 2]) -> f64 + Sync + '_ {
    move |x| p.kdelta(delta, x)
}

/// Add the boundary of (−L−α, L+α)×(−α, α) as internal mesh lines.
pub fn add_alpha_lines(g: &mut GeometrySpec, p: &DomainParams, alpha: f64) {
    let a = p.l + alpha;
    let inside = |x: [f64; 2]| inside_outline(p, x);
    g.add_internal_line([-a, alpha], [a, alpha], &inside);
    g.add_internal_line([-a, -alpha], [a, -alpha], &inside);
    g.add_internal_line([-a, -alpha], [-a, alpha], &inside);
    g.add_internal_line([a, -alpha], [a, alpha], &inside);
}

pub fn exact_space(p: &DomainParams, delta: f64, cfg: &ExactMeshConfig) -> Result<(Arc<Space>, MeshDescriptor)> {
    let mut g = build_perforated_domain(p, delta)?;
    if let Some(a) = cfg.alpha {
        if !(a > delta) {
            return Err(Error::InvalidParams("alpha must exceed delta".into()));
        }
        add_alpha_lines(&mut g, p, a);
    }
    let mut size = SizeField::uniform(cfg.h);
    for &c in &g.corners {
        size.corners.push((g.points[c], cfg.h_corner, cfg.corner_rate));
    }
    size.bands.push(([-p.l, p.l], 0.0, delta, cfg.h_layer * delta, cfg.layer_rate));
    let rh = p.hole.as_ref().map(hole_radius).unwrap_or(0.0) * delta;
    for c in &g.hole_centers {
        size.disks.push((*c, rh, cfg.h_hole * delta, cfg.layer_rate));
    }
    let mesh = triangulate_sized(&g, &size)?;
    let desc = MeshDescriptor {
        delta,
        nodes: mesh.nodes.len(),
        elements: mesh.elements.len(),
        holes: g.hole_centers.len(),
        min_edge: mesh.min_edge(),
        min_angle_deg: mesh.min_angle_deg(),
    };
    Ok((Arc::new(Space::new(Arc::new(mesh), cfg.degree)), desc))
}

fn hole_radius(h: &crate::geometry::HoleSpec) -> f64 {
    let c = h.interior_point();
    h.polygon().iter().map(|v| (v[0] - c[0]).hypot(v[1] - c[1])).fold(0.0, f64::max)
}

/// Solve −Δu − (k^δ)²u = 0 on Ω^δ with Neumann walls and holes and the Robin incident data.
pub fn solve_exact(p: &DomainParams, delta: f64, cfg: &ExactMeshConfig) -> Result<ExactSolveResult> {
    solve_exact_scaled(p, delta, cfg, C64::new(1.0, 0.0))
}

/// As `solve_exact` with the incident wave multiplied by `amp`.
pub fn solve_exact_scaled(p: &DomainParams, delta: f64, cfg: &ExactMeshConfig, amp: C64) -> Result<ExactSolveResult> {
    let (space, mesh) = exact_space(p, delta, cfg).map_err(|e| e.at("exact mesh"))?;
    let kd = kdelta_field(p, delta);
    let k2 = |x: [f64; 2]| C64::new(kd(x).powi(2), 0.0);
    let gm = amp * p.robin_minus();
    let g = move |_: [f64; 2], _: [f64; 2]| gm;
    let alpha = C64::new(0.0, -p.k0);
    let mut prob = Problem::new(&k2);
    prob.robin.push(Robin { tag: Tag::GammaR_plus, alpha, g: None });
    prob.robin.push(Robin { tag: Tag::GammaR_minus, alpha, g: Some(&g) });
    let (u, residual) = solve_problem(&space, &prob, &Constraints::default()).map_err(|e| e.at("exact solve"))?;
    if residual > 1e-10 {
        return Err(Error::SingularSystem(format!("exact solve residual {residual:e}")).at("exact solve"));
    }
    Ok(ExactSolveResult { ndof: space.ndof, u_delta: u, residual, mesh })
}

/// Energy balance on Γ_R: (Im ∮ ū ∂ₙu, k₀∫|u|²). The first vanishes for a lossless interior.
pub fn flux_balance(u: &Field, p: &DomainParams) -> Result<(f64, f64)> {
    let gm = p.robin_minus();
    let nq = u.space.degree() + 2;
    let mut flux = 0.0;
    let mut mass = 0.0;
    for tag in [Tag::GammaR_plus, Tag::GammaR_minus] {
        let g = if tag == Tag::GammaR_minus { gm } else { C64::new(0.0, 0.0) };
        for_each_edge_qp(&u.space, tag, nq, |dofs, v, _, _, _, w, _| {
            let uq: C64 = dofs.iter().zip(v).map(|(d, vi)| u.values[*d] * vi).sum();
            // ∂ₙu = ik₀u + g on Γ_R
            let dn = C64::new(0.0, p.k0) * uq + g;
            flux += (uq.conj() * dn).im * w;
            mass += p.k0 * uq.norm_sqr() * w;
        })?;
    }
    Ok((flux, mass))
}
