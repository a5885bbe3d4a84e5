use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::params::{point_in_polygon, DomainParams, HoleSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Tag {
    GammaR_minus,
    GammaR_plus,
    GammaN,
    GammaHole,
    GammaInterface_top,
    GammaInterface_bottom,
    Truncation,
    Periodic_left,
    Periodic_right,
    /// Slit before doubling.
    Interface,
    /// Constraint inside the domain; dropped from the output mesh.
    Internal,
}

impl Tag {
    pub const ALL: [Tag; 11] = [
        Tag::GammaR_minus,
        Tag::GammaR_plus,
        Tag::GammaN,
        Tag::GammaHole,
        Tag::GammaInterface_top,
        Tag::GammaInterface_bottom,
        Tag::Truncation,
        Tag::Periodic_left,
        Tag::Periodic_right,
        Tag::Interface,
        Tag::Internal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Tag::GammaR_minus => "GammaR_minus",
            Tag::GammaR_plus => "GammaR_plus",
            Tag::GammaN => "GammaN",
            Tag::GammaHole => "GammaHole",
            Tag::GammaInterface_top => "GammaInterface_top",
            Tag::GammaInterface_bottom => "GammaInterface_bottom",
            Tag::Truncation => "Truncation",
            Tag::Periodic_left => "Periodic_left",
            Tag::Periodic_right => "Periodic_right",
            Tag::Interface => "Interface",
            Tag::Internal => "Internal",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tag> {
        Tag::ALL.iter().copied().find(|t| t.name() == s).ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    pub tag: Tag,
}

/// Planar straight-line graph plus markers.
#[derive(Clone, Debug, Default)]
pub struct GeometrySpec {
    pub points: Vec<[f64; 2]>,
    pub segments: Vec<Segment>,
    /// One seed point inside every hole.
    pub holes: Vec<[f64; 2]>,
    pub corners: Vec<usize>,
    /// Segment index pairs (left, right) congruent under X1 -> X1 + period.
    pub periodic: Vec<(usize, usize)>,
    pub period: f64,
    /// Hole centers in physical coordinates (diagnostics).
    pub hole_centers: Vec<[f64; 2]>,
}

impl GeometrySpec {
    pub fn add_point(&mut self, p: [f64; 2]) -> usize {
        self.points.push(p);
        self.points.len() - 1
    }

    pub fn add_segment(&mut self, a: usize, b: usize, tag: Tag) -> usize {
        self.segments.push(Segment { a, b, tag });
        self.segments.len() - 1
    }

    /// Closed loop through the given points, tagging edge i (from p[i] to p[i+1]) with tags[i].
    pub fn add_loop(&mut self, pts: &[[f64; 2]], tags: &[Tag]) -> Vec<usize> {
        let ids: Vec<usize> = pts.iter().map(|p| self.add_point(*p)).collect();
        let n = ids.len();
        for i in 0..n {
            self.add_segment(ids[i], ids[(i + 1) % n], tags[i]);
        }
        ids
    }

    /// Insert the polygonal hole `v` (already scaled) as a tagged loop with a seed.
    pub fn add_hole(&mut self, v: &[[f64; 2]], seed: [f64; 2]) {
        let tags = vec![Tag::GammaHole; v.len()];
        self.add_loop(v, &tags);
        self.holes.push(seed);
    }

    /// Split segment `s` at the new point `p` (assumed to lie on it). Returns the point id.
    pub fn split_segment(&mut self, s: usize, p: [f64; 2]) -> usize {
        let id = self.add_point(p);
        let Segment { b, tag, .. } = self.segments[s];
        self.segments[s].b = id;
        self.add_segment(id, b, tag);
        id
    }

    /// Add a straight internal constraint from `p` to `q`, clipped to the region
    /// bounded by the current non-internal segments and split where it crosses them.
    pub fn add_internal_line(&mut self, p: [f64; 2], q: [f64; 2], inside: &dyn Fn([f64; 2]) -> bool) {
        let d = [q[0] - p[0], q[1] - p[1]];
        let mut cuts: Vec<(f64, usize)> = Vec::new();
        let nseg = self.segments.len();
        let mut pending: Vec<(usize, [f64; 2], f64)> = Vec::new();
        for s in 0..nseg {
            let Segment { a, b, tag } = self.segments[s];
            if tag == Tag::Internal {
                continue;
            }
            let (pa, pb) = (self.points[a], self.points[b]);
            let e = [pb[0] - pa[0], pb[1] - pa[1]];
            let den = d[0] * e[1] - d[1] * e[0];
            if den.abs() < 1e-14 {
                continue;
            }
            let w = [pa[0] - p[0], pa[1] - p[1]];
            let t = (w[0] * e[1] - w[1] * e[0]) / den;
            let u = (w[0] * d[1] - w[1] * d[0]) / den;
            if !(-1e-12..=1.0 + 1e-12).contains(&t) || !(-1e-12..=1.0 + 1e-12).contains(&u) {
                continue;
            }
            let x = [p[0] + t * d[0], p[1] + t * d[1]];
            let tol = 1e-10;
            if u.abs() < tol {
                cuts.push((t, a));
            } else if (u - 1.0).abs() < tol {
                cuts.push((t, b));
            } else {
                pending.push((s, x, t));
            }
        }
        for (s, x, t) in pending {
            let id = self.split_segment(s, x);
            cuts.push((t, id));
        }
        let mut ends: Vec<(f64, Option<usize>)> = cuts.iter().map(|(t, i)| (*t, Some(*i))).collect();
        if !ends.iter().any(|(t, _)| t.abs() < 1e-12) {
            ends.push((0.0, None));
        }
        if !ends.iter().any(|(t, _)| (t - 1.0).abs() < 1e-12) {
            ends.push((1.0, None));
        }
        ends.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        ends.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-12);
        for w in ends.windows(2) {
            let (t0, t1) = (w[0].0, w[1].0);
            let tm = 0.5 * (t0 + t1);
            let m = [p[0] + tm * d[0], p[1] + tm * d[1]];
            if !inside(m) {
                continue;
            }
            let a = w[0].1.unwrap_or_else(|| self.add_point([p[0] + t0 * d[0], p[1] + t0 * d[1]]));
            let b = w[1].1.unwrap_or_else(|| self.add_point([p[0] + t1 * d[0], p[1] + t1 * d[1]]));
            self.add_segment(a, b, Tag::Internal);
        }
    }
}

/// Outer boundary polygon of Ω (top rectangle plus lower trapezoid), counter-clockwise,
/// starting at the lower-left corner of the trapezoid, with per-edge tags.
fn outline(p: &DomainParams) -> (Vec<[f64; 2]>, Vec<Tag>) {
    let xb = p.bottom_half_width();
    let pts = vec![
        [-xb, -p.hp],
        [xb, -p.hp],
        [p.l, 0.0],
        [p.lp, 0.0],
        [p.lp, p.h],
        [-p.lp, p.h],
        [-p.lp, 0.0],
        [-p.l, 0.0],
    ];
    let tags = vec![
        Tag::GammaN,
        Tag::GammaN,
        Tag::GammaN,
        Tag::GammaR_plus,
        Tag::GammaN,
        Tag::GammaR_minus,
        Tag::GammaN,
        Tag::GammaN,
    ];
    (pts, tags)
}

/// Closed outer region of Ω including the segment Γ.
pub fn inside_outline(p: &DomainParams, x: [f64; 2]) -> bool {
    let (pts, _) = outline(p);
    point_in_polygon(x, &pts) || (x[1].abs() < 1e-14 && x[0].abs() < p.l)
}

/// Hole centers of the perforated layer, in physical coordinates.
pub fn hole_centers(p: &DomainParams, delta: f64) -> Result<Vec<[f64; 2]>> {
    let q = layer_count(p, delta)?;
    let Some(hole) = &p.hole else { return Ok(Vec::new()) };
    let c = match hole {
        HoleSpec::Disk { center, .. } => *center,
        HoleSpec::Polygon { .. } => hole.interior_point(),
    };
    Ok((0..q).map(|l| [-p.l + delta * (c[0] + l as f64), delta * c[1]]).collect())
}

fn layer_count(p: &DomainParams, delta: f64) -> Result<usize> {
    let r = 2.0 * p.l / delta;
    let q = r.round();
    if !(delta > 0.0) || q < 1.0 || (r - q).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::NonIntegerPeriod(r));
    }
    Ok(q as usize)
}

/// Ω^δ: the outer outline minus q = 2L/δ scaled copies of the canonical hole.
pub fn build_perforated_domain(p: &DomainParams, delta: f64) -> Result<GeometrySpec> {
    p.validate()?;
    let q = layer_count(p, delta)?;
    if delta >= p.h.min(p.hp) {
        return Err(Error::InvalidParams("delta must be below min(H, Hp)".into()));
    }
    let mut g = GeometrySpec::default();
    let (pts, tags) = outline(p);
    let ids = g.add_loop(&pts, &tags);
    g.corners = vec![ids[2], ids[7]];
    if let Some(hole) = &p.hole {
        let poly = hole.polygon();
        let seed = hole.interior_point();
        for l in 0..q {
            let map = |x: [f64; 2]| [-p.l + delta * (x[0] + l as f64), delta * x[1]];
            let v: Vec<[f64; 2]> = poly.iter().map(|x| map(*x)).collect();
            // holes live in |x2| < δ, which must be strictly inside Ω away from the walls
            let ok = v.iter().all(|x| {
                x[0] > -p.l && x[0] < p.l && x[1].abs() < delta && inside_outline(p, *x)
            });
            if !ok {
                return Err(Error::HoleCollision(l));
            }
            g.add_hole(&v, map(seed));
        }
        g.hole_centers = hole_centers(p, delta)?;
    }
    Ok(g)
}

/// Ω with Γ as a slit (to be doubled after meshing).
pub fn build_limit_domain(p: &DomainParams) -> Result<GeometrySpec> {
    p.validate()?;
    let mut g = GeometrySpec::default();
    let (pts, tags) = outline(p);
    let ids = g.add_loop(&pts, &tags);
    g.add_segment(ids[7], ids[2], Tag::Interface);
    g.corners = vec![ids[2], ids[7]];
    Ok(g)
}

/// Periodicity cell (0,1)×(−T,T) minus the hole.
pub fn build_cell_geometry(hole: Option<&HoleSpec>, t: f64) -> Result<GeometrySpec> {
    if !(t >= 4.0) {
        return Err(Error::InvalidParams("cell truncation T must be at least 4".into()));
    }
    let mut g = GeometrySpec::default();
    // the periodic sides are pre-split at |X2| = 1, 2 (χ's breakpoints) and T−1 (far bands)
    let ys = [-t, 1.0 - t, -2.0, -1.0, 1.0, 2.0, t - 1.0, t];
    let left: Vec<usize> = ys.iter().map(|y| g.add_point([0.0, *y])).collect();
    let right: Vec<usize> = ys.iter().map(|y| g.add_point([1.0, *y])).collect();
    g.add_segment(left[0], right[0], Tag::Truncation);
    g.add_segment(right[7], left[7], Tag::Truncation);
    for i in 0..7 {
        let sr = g.add_segment(right[i], right[i + 1], Tag::Periodic_right);
        let sl = g.add_segment(left[i + 1], left[i], Tag::Periodic_left);
        g.periodic.push((sl, sr));
    }
    g.period = 1.0;
    for i in 1..7 {
        g.add_segment(left[i], right[i], Tag::Internal);
    }
    if let Some(h) = hole {
        h.validate()?;
        g.add_hole(&h.polygon(), h.interior_point());
        g.hole_centers = vec![h.interior_point()];
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(&self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    /// Angular interval (a, b) of the sector and the direction γ of the layer.
    pub fn sector(&self, theta: f64) -> (f64, f64, f64) {
        match self {
            Side::Plus => (0.0, theta, PI),
            Side::Minus => (PI - theta, PI, 0.0),
        }
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Side> {
        match s {
            "plus" | "+" => Ok(Side::Plus),
            "minus" | "-" => Ok(Side::Minus),
            _ => Err(Error::InvalidParams(format!("unknown side {s}"))),
        }
    }
}

/// Truncated perforated cone of opening Θ with the corner at the origin.
/// Holes occupy the cells adjacent to the layer direction, up to radius Rmax.
pub fn build_cone_geometry(
    side: Side,
    theta: f64,
    rmax: f64,
    hole: Option<&HoleSpec>,
    arc_segments: usize,
) -> Result<GeometrySpec> {
    if !(rmax >= 1.0) || !(theta > PI && theta < 2.0 * PI) {
        return Err(Error::InvalidParams("cone needs Rmax >= 1 and theta in (pi, 2pi)".into()));
    }
    let (a, b, _) = side.sector(theta);
    let mut g = GeometrySpec::default();
    let o = g.add_point([0.0, 0.0]);
    g.corners = vec![o];
    let n = arc_segments.max(8);
    let arc: Vec<usize> =
        (0..=n).map(|i| {
            let t = a + (b - a) * i as f64 / n as f64;
            g.add_point([rmax * t.cos(), rmax * t.sin()])
        }).collect();
    g.add_segment(o, arc[0], Tag::GammaN);
    for i in 0..n {
        g.add_segment(arc[i], arc[i + 1], Tag::Truncation);
    }
    g.add_segment(arc[n], o, Tag::GammaN);
    if let Some(h) = hole {
        h.validate()?;
        let poly = h.polygon();
        let seed = h.interior_point();
        let count = rmax.floor() as usize;
        for l in 0..count {
            // plus: cells (-l-1, -l); minus: cells (l, l+1)
            let shift = match side {
                Side::Plus => -(l as f64) - 1.0,
                Side::Minus => l as f64,
            };
            let v: Vec<[f64; 2]> = poly.iter().map(|x| [x[0] + shift, x[1]]).collect();
            let inside = v.iter().all(|x| (x[0] * x[0] + x[1] * x[1]).sqrt() < rmax - 1e-9);
            if !inside {
                continue;
            }
            g.add_hole(&v, [seed[0] + shift, seed[1]]);
            g.hole_centers.push([seed[0] + shift, seed[1]]);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perforated_centers() {
        let p = DomainParams::reference();
        let g = build_perforated_domain(&p, 0.25).unwrap();
        assert_eq!(g.holes.len(), 4);
        for (l, c) in g.hole_centers.iter().enumerate() {
            assert!((c[0] - (-0.375 + 0.25 * l as f64)).abs() < 1e-14);
            assert_eq!(c[1], 0.0);
        }
        assert!(matches!(build_perforated_domain(&p, 0.3), Err(Error::NonIntegerPeriod(_))));
        let g = build_perforated_domain(&p, 0.125).unwrap();
        assert_eq!(g.holes.len(), 8);
        assert!((g.hole_centers[0][0] - (-0.5 + 0.0625)).abs() < 1e-14);
    }

    #[test]
    fn halving_interleaves() {
        let p = DomainParams::reference();
        let c1 = hole_centers(&p, 0.25).unwrap();
        let c2 = hole_centers(&p, 0.125).unwrap();
        for (i, c) in c1.iter().enumerate() {
            // each coarse cell splits into two fine cells whose centers straddle the coarse center
            let (a, b) = (c2[2 * i][0], c2[2 * i + 1][0]);
            assert!((0.5 * (a + b) - c[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn limit_domain_corners() {
        let p = DomainParams::reference();
        let g = build_limit_domain(&p).unwrap();
        let c: Vec<[f64; 2]> = g.corners.iter().map(|i| g.points[*i]).collect();
        assert_eq!(c, vec![[0.5, 0.0], [-0.5, 0.0]]);
        // vertical lower walls at Θ = 3π/2
        assert!((p.bottom_half_width() - 0.5).abs() < 1e-15);
        let mut q = p.clone();
        q.theta = 1.75 * PI;
        let xb = q.bottom_half_width();
        let ang = (-q.hp).atan2(xb - q.l);
        assert!((ang + 2.0 * PI - q.theta).abs() < 1e-12);
    }

    #[test]
    fn cell_hole_checks() {
        let bad = HoleSpec::Polygon { vertices: vec![[0.0, 0.0], [0.5, -0.2], [0.5, 0.2]] };
        assert!(matches!(build_cell_geometry(Some(&bad), 6.0), Err(Error::HoleOutOfCell)));
        let g = build_cell_geometry(None, 6.0).unwrap();
        assert!(g.holes.is_empty());
    }

    #[test]
    fn cone_hole_count() {
        let h = HoleSpec::disk([0.5, 0.0], 0.15);
        let g = build_cone_geometry(Side::Plus, 1.5 * PI, 20.0, Some(&h), 200).unwrap();
        assert_eq!(g.holes.len(), 20);
        for (l, c) in g.hole_centers.iter().enumerate() {
            assert!((c[0] - (-(l as f64 + 1.0) + 0.5)).abs() < 1e-14);
        }
        let gm = build_cone_geometry(Side::Minus, 1.5 * PI, 20.0, Some(&h), 200).unwrap();
        for (c, d) in g.hole_centers.iter().zip(&gm.hole_centers) {
            assert!((c[0] + d[0]).abs() < 1e-14);
        }
    }
}
