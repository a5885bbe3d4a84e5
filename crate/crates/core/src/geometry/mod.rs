pub mod mesh;
pub mod mesher;
pub mod params;
pub mod spec;

pub use mesh::{BEdge, Mesh};
pub use mesher::{triangulate_with, RefineOptions};
pub use params::{DomainParams, HoleSpec, Khat};
pub use spec::{
    build_cell_geometry, build_cone_geometry, build_limit_domain, build_perforated_domain, GeometrySpec, Side, Tag,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Geometric refinement towards the marked corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub sigma: f64,
    pub n_layers: u32,
}

impl Grading {
    pub fn none() -> Self {
        Grading { sigma: 1.0, n_layers: 0 }
    }
}

/// Piecewise target element size: bulk value, corner grading, refined bands and disks.
#[derive(Clone, Debug, Default)]
pub struct SizeField {
    pub h0: f64,
    /// (corner, smallest size, growth rate): size = max(hmin, rate·r).
    pub corners: Vec<([f64; 2], f64, f64)>,
    /// Horizontal bands: (x range, y0, half width, size inside, growth rate away from it).
    pub bands: Vec<([f64; 2], f64, f64, f64, f64)>,
    /// Disks: (center, radius, size inside, growth rate).
    pub disks: Vec<([f64; 2], f64, f64, f64)>,
}

impl SizeField {
    pub fn uniform(h0: f64) -> Self {
        SizeField { h0, ..Default::default() }
    }

    pub fn with_grading(mut self, corners: &[[f64; 2]], grading: Grading, rate: f64) -> Self {
        if grading.n_layers > 0 && grading.sigma < 1.0 {
            let hmin = self.h0 * grading.sigma.powi(grading.n_layers as i32);
            for c in corners {
                self.corners.push((*c, hmin, rate));
            }
        }
        self
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let mut h = self.h0;
        for (c, hmin, rate) in &self.corners {
            let r = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            h = h.min(hmin.max(rate * r));
        }
        for (xr, y0, hw, hb, rate) in &self.bands {
            let dx = (xr[0] - p[0]).max(p[0] - xr[1]).max(0.0);
            let dy = ((p[1] - y0).abs() - hw).max(0.0);
            h = h.min(hb + rate * (dx * dx + dy * dy).sqrt());
        }
        for (c, rad, hd, rate) in &self.disks {
            let r = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            h = h.min(hd + rate * (r - rad).max(0.0));
        }
        h
    }
}

/// Mesh a geometry with bulk size h0 and geometric grading at its corners.
pub fn triangulate(g: &GeometrySpec, h0: f64, grading: Grading) -> Result<Mesh> {
    let corners: Vec<[f64; 2]> = g.corners.iter().map(|i| g.points[*i]).collect();
    let size = SizeField::uniform(h0).with_grading(&corners, grading, 0.5);
    triangulate_sized(g, &size)
}

pub fn triangulate_sized(g: &GeometrySpec, size: &SizeField) -> Result<Mesh> {
    let f = |p: [f64; 2]| size.eval(p);
    triangulate_with(g, &f, RefineOptions::default())
}
