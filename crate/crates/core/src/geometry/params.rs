use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Canonical obstacle in the unit cell (0,1)×(−1,1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HoleSpec {
    Disk { center: [f64; 2], radius: f64, segments: usize },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl HoleSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        HoleSpec::Disk { center, radius, segments: 32 }
    }

    /// Counter-clockwise vertex loop in cell units.
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        match self {
            HoleSpec::Disk { center, radius, segments } => {
                let n = (*segments).max(3);
                (0..n)
                    .map(|i| {
                        // vertices at half-step angles so the loop is symmetric about X1 = center
                        let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect()
            }
            HoleSpec::Polygon { vertices } => {
                let mut v = vertices.clone();
                if signed_area(&v) < 0.0 {
                    v.reverse();
                }
                v
            }
        }
    }

    pub fn interior_point(&self) -> [f64; 2] {
        match self {
            HoleSpec::Disk { center, .. } => *center,
            HoleSpec::Polygon { .. } => {
                let v = self.polygon();
                // centroid works for the convex shapes we accept; fall back to an ear midpoint
                let c = centroid(&v);
                if point_in_polygon(c, &v) {
                    c
                } else {
                    let n = v.len();
                    (0..n)
                        .map(|i| {
                            let (a, b, d) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
                            [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
                        })
                        .find(|p| point_in_polygon(*p, &v))
                        .unwrap_or(c)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.polygon();
        let ok = v.iter().all(|p| p[0] > 1e-12 && p[0] < 1.0 - 1e-12 && p[1].abs() < 1.0 - 1e-12);
        if !ok || v.len() < 3 {
            return Err(Error::HoleOutOfCell);
        }
        if let HoleSpec::Disk { center, radius, .. } = self {
            let ok = *radius > 0.0
                && center[0] - radius > 0.0
                && center[0] + radius < 1.0
                && center[1].abs() + radius < 1.0;
            if !ok {
                return Err(Error::HoleOutOfCell);
            }
        }
        Ok(())
    }

    /// True when the hole is invariant under X1 -> 1 - X1.
    pub fn is_symmetric(&self) -> bool {
        let v = self.polygon();
        let tol = 1e-12;
        v.iter().all(|p| {
            let q = [1.0 - p[0], p[1]];
            v.iter().any(|r| (r[0] - q[0]).abs() < tol && (r[1] - q[1]).abs() < tol)
        })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.polygon()).abs()
    }
}

/// Wavenumber inside the cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Khat {
    Constant,
    /// Smooth bump reaching `peak` at `center`, equal to k0 beyond `radius`.
    Bump { peak: f64, center: [f64; 2], radius: f64 },
}

impl Khat {
    pub fn eval(&self, k0: f64, x: [f64; 2]) -> f64 {
        match self {
            Khat::Constant => k0,
            Khat::Bump { peak, center, radius } => {
                let x1 = x[0] - x[0].floor();
                let d = ((x1 - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() / radius;
                k0 + (peak - k0) * bump(d)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Khat::Constant)
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Khat::Constant => true,
            Khat::Bump { center, .. } => (center[0] - 0.5).abs() < 1e-14,
        }
    }
}

fn bump(d: f64) -> f64 {
    if d >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - d * d)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Lp")]
    pub lp: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Hp")]
    pub hp: f64,
    pub theta: f64,
    pub hole: Option<HoleSpec>,
    pub k0: f64,
    pub khat: Khat,
}

impl DomainParams {
    /// The configuration of the numerical experiment: Θ = 3π/2, disk of diameter 0.3, k0 = 5π.
    pub fn reference() -> Self {
        DomainParams {
            l: 0.5,
            lp: 2.5,
            h: 1.0,
            hp: 1.0,
            theta: 1.5 * PI,
            hole: Some(HoleSpec::disk([0.5, 0.0], 0.15)),
            k0: 5.0 * PI,
            khat: Khat::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.l > 0.0 && self.lp > self.l) {
            return bad("need Lp > L > 0");
        }
        if !(self.h > 0.0 && self.hp > 0.0) {
            return bad("need H > 0 and Hp > 0");
        }
        if !(self.theta > PI && self.theta < 2.0 * PI) {
            return bad("theta must lie in (pi, 2pi)");
        }
        if !(self.k0 > 0.0) {
            return bad("k0 must be positive");
        }
        if let Some(h) = &self.hole {
            h.validate()?;
        }
        if let Khat::Bump { peak, center, radius } = &self.khat {
            if !(*peak > 0.0 && *radius > 0.0) {
                return bad("khat bump needs positive peak and radius");
            }
            if center[0] - radius <= 0.0 || center[0] + radius >= 1.0 || center[1].abs() + radius >= 1.0 {
                return bad("khat bump must stay inside the cell");
            }
        }
        let xb = self.bottom_half_width();
        if xb <= 0.0 || xb >= self.lp + 10.0 * self.l {
            return bad("lower trapezoid is degenerate");
        }
        Ok(())
    }

    /// Half-width of the trapezoid base at depth Hp.
    pub fn bottom_half_width(&self) -> f64 {
        self.l - self.hp / self.theta.tan()
    }

    pub fn lambda(&self) -> f64 {
        PI / self.theta
    }

    /// Wavenumber field k^δ at a physical point.
    pub fn kdelta(&self, delta: f64, x: [f64; 2]) -> f64 {
        if x[0].abs() < self.l && x[1].abs() < delta {
            self.khat.eval(self.k0, [(x[0] + self.l) / delta, x[1] / delta])
        } else {
            self.k0
        }
    }

    /// Robin datum on Γ_R^- for the incident wave exp(ik0(x1 - Lp)).
    pub fn robin_minus(&self) -> num_complex::Complex64 {
        let i = num_complex::Complex64::i();
        -2.0 * i * self.k0 * (-2.0 * i * self.k0 * self.lp).exp()
    }
}

pub fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        * 0.5
}

fn centroid(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len() as f64;
    [v.iter().map(|p| p[0]).sum::<f64>() / n, v.iter().map(|p| p[1]).sum::<f64>() / n]
}

pub fn point_in_polygon(p: [f64; 2], v: &[[f64; 2]]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}
