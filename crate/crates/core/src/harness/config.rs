//! Flat `key = value` study configuration.
//!
//! Blank lines and `#` comments are ignored. Numbers accept fractions (`1/64`) and a `pi`
//! factor (`1.5pi`, `5*pi`). Lists are whitespace or comma separated. Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `L`, `Lp`, `H`, `Hp`, `theta`, `k0` | domain |
//! | `hole` | `disk`, `polygon` or `none` |
//! | `hole.center`, `hole.radius`, `hole.segments` | disk hole (cell units) |
//! | `hole.vertices` | polygon hole, `x y; x y; ...` |
//! | `khat` | `constant` or `bump`, with `khat.peak`, `khat.center`, `khat.radius` |
//! | `alpha` | half-height of the excluded box around the layer |
//! | `deltas` | periods of the sweep |
//! | `fit` | periods used in the slope fits (default: all) |
//! | `exact.*` | `h h_corner corner_rate h_layer h_hole layer_rate degree` |
//! | `limit.*` | `h h_gamma h_corner corner_rate degree` |
//! | `cell.*` | `T h h_hole degree` |
//! | `near.*` | `rmax h_layer h_hole h_far h_apex degree` |
//! | `cutoff` | `smooth` or `quintic` |
//! | `reference.check` | solve the smallest δ on a refined mesh and compare |
//! | `check.e0`, `check.e1`, `check.e2`, `check.e3` | accepted slope interval `lo hi` |
//! | `out` | report directory |

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeConfig;
use crate::cell::CutoffSpec;
use crate::error::{Error, Result};
use crate::exact::ExactMeshConfig;
use crate::geometry::{DomainParams, HoleSpec, Khat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub params: DomainParams,
    pub alpha: f64,
    pub deltas: Vec<f64>,
    pub fit: Vec<f64>,
    pub exact: ExactMeshConfig,
    pub cascade: CascadeConfig,
    pub reference_check: bool,
    /// Slope intervals keyed by error column (`e0`..`e3`).
    pub checks: BTreeMap<String, (f64, f64)>,
    pub out: PathBuf,
}

impl StudyConfig {
    /// The sweep of the numerical experiment.
    pub fn reference() -> Self {
        let deltas = vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let mut checks = BTreeMap::new();
        checks.insert("e0".into(), (0.85, 1.10));
        checks.insert("e1".into(), (1.20, 1.45));
        checks.insert("e2".into(), (1.75, 2.05));
        StudyConfig {
            params: DomainParams::reference(),
            alpha: 0.25,
            fit: deltas.clone(),
            deltas,
            exact: ExactMeshConfig::default(),
            cascade: CascadeConfig::default(),
            reference_check: true,
            checks,
            out: PathBuf::from("report"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParams("alpha must be positive".into()));
        }
        if self.alpha >= self.params.h.min(self.params.hp) {
            return Err(Error::InvalidParams("Omega_alpha is empty".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::InvalidParams("no delta values".into()));
        }
        for &d in &self.deltas {
            let r = 2.0 * self.params.l / d;
            if !(d > 0.0) || (r - r.round()).abs() > 1e-9 * r.max(1.0) || r.round() < 1.0 {
                return Err(Error::NonIntegerPeriod(r));
            }
            if d >= self.alpha {
                return Err(Error::InvalidParams(format!("delta {d} must be below alpha")));
            }
        }
        for f in &self.fit {
            if !self.deltas.iter().any(|d| (d - f).abs() <= 1e-12 * d) {
                return Err(Error::InvalidParams(format!("fit value {f} is not in the sweep")));
            }
        }
        Ok(())
    }
}

/// Number with optional fraction and `pi` factor.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        return Ok(parse_number(a)? / parse_number(b)?);
    }
    let lower = s.to_ascii_lowercase();
    if let Some(head) = lower.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let f = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|e| format!("{s}: {e}"))? };
        return Ok(f * std::f64::consts::PI);
    }
    s.parse::<f64>().map_err(|e| format!("{s}: {e}"))
}

fn numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(parse_number).collect()
}

/// Parse the flat configuration text, starting from `StudyConfig::reference()`.
pub fn parse_config(text: &str) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::reference();
    let mut fit_given = false;
    let mut hole_kind: Option<String> = None;
    let (mut center, mut radius, mut segments) = ([0.5, 0.0], 0.15, 32usize);
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut khat_kind: Option<String> = None;
    let (mut peak, mut kcenter, mut kradius) = (0.0, [0.5, 0.0], 0.2);
    if let Some(HoleSpec::Disk { center: c, radius: r, segments: s }) = &cfg.params.hole {
        center = *c;
        radius = *r;
        segments = *s;
    }
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::ParseError { line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        let num = || parse_number(v).map_err(err);
        let pair = || -> Result<[f64; 2]> {
            let x = numbers(v).map_err(err)?;
            if x.len() != 2 {
                return Err(err(format!("{k} needs two numbers")));
            }
            Ok([x[0], x[1]])
        };
        let p = &mut cfg.params;
        match k {
            "L" => p.l = num()?,
            "Lp" => p.lp = num()?,
            "H" => p.h = num()?,
            "Hp" => p.hp = num()?,
            "theta" => p.theta = num()?,
            "k0" => p.k0 = num()?,
            "hole" => hole_kind = Some(v.to_ascii_lowercase()),
            "hole.center" => center = pair()?,
            "hole.radius" => radius = num()?,
            "hole.segments" => segments = num()? as usize,
            "hole.vertices" => {
                vertices.clear();
                for vtx in v.split(';').filter(|t| !t.trim().is_empty()) {
                    let x = numbers(vtx).map_err(err)?;
                    if x.len() != 2 {
                        return Err(err("vertices are `x y` pairs".into()));
                    }
                    vertices.push([x[0], x[1]]);
                }
            }
            "khat" => khat_kind = Some(v.to_ascii_lowercase()),
            "khat.peak" => peak = num()?,
            "khat.center" => kcenter = pair()?,
            "khat.radius" => kradius = num()?,
            "alpha" => cfg.alpha = num()?,
            "deltas" => cfg.deltas = numbers(v).map_err(err)?,
            "fit" => {
                cfg.fit = numbers(v).map_err(err)?;
                fit_given = true;
            }
            "exact.h" => cfg.exact.h = num()?,
            "exact.h_corner" => cfg.exact.h_corner = num()?,
            "exact.corner_rate" => cfg.exact.corner_rate = num()?,
            "exact.h_layer" => cfg.exact.h_layer = num()?,
            "exact.h_hole" => cfg.exact.h_hole = num()?,
            "exact.layer_rate" => cfg.exact.layer_rate = num()?,
            "exact.degree" => cfg.exact.degree = num()? as usize,
            "limit.h" => cfg.cascade.mesh.h = num()?,
            "limit.h_gamma" => cfg.cascade.mesh.h_gamma = num()?,
            "limit.h_corner" => cfg.cascade.mesh.h_corner = num()?,
            "limit.corner_rate" => cfg.cascade.mesh.corner_rate = num()?,
            "limit.degree" => cfg.cascade.mesh.degree = num()? as usize,
            "cell.T" => cfg.cascade.cell.t = num()?,
            "cell.h" => cfg.cascade.cell.h = num()?,
            "cell.h_hole" => cfg.cascade.cell.h_hole = num()?,
            "cell.degree" => cfg.cascade.cell.degree = num()? as usize,
            "near.rmax" => cfg.cascade.nearfield.rmax = num()?,
            "near.h_layer" => cfg.cascade.nearfield.h_layer = num()?,
            "near.h_hole" => cfg.cascade.nearfield.h_hole = num()?,
            "near.h_far" => cfg.cascade.nearfield.h_far = num()?,
            "near.h_apex" => cfg.cascade.nearfield.h_apex = num()?,
            "near.degree" => cfg.cascade.nearfield.degree = num()? as usize,
            "cutoff" => {
                let c = match v.to_ascii_lowercase().as_str() {
                    "smooth" => CutoffSpec::Smooth,
                    "quintic" => CutoffSpec::Quintic,
                    o => return Err(err(format!("unknown cutoff `{o}`"))),
                };
                cfg.cascade.cutoff = c;
                cfg.cascade.cell.cutoff = c;
                cfg.cascade.nearfield.cutoff = c;
            }
            "reference.check" => {
                cfg.reference_check = match v {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    o => return Err(err(format!("expected a boolean, got `{o}`"))),
                }
            }
            "out" => cfg.out = PathBuf::from(v),
            _ => {
                if let Some(col) = k.strip_prefix("check.") {
                    if !["e0", "e1", "e2", "e3"].contains(&col) {
                        return Err(err(format!("unknown error column `{col}`")));
                    }
                    cfg.checks.insert(col.to_string(), pair()?.into());
                } else {
                    return Err(err(format!("unknown key `{k}`")));
                }
            }
        }
    }
    match hole_kind.as_deref() {
        None => {
            if let Some(HoleSpec::Disk { .. }) = cfg.params.hole {
                cfg.params.hole = Some(HoleSpec::Disk { center, radius, segments });
            }
        }
        Some("none") => cfg.params.hole = None,
        Some("disk") => cfg.params.hole = Some(HoleSpec::Disk { center, radius, segments }),
        Some("polygon") => cfg.params.hole = Some(HoleSpec::Polygon { vertices }),
        Some(o) => return Err(Error::ParseError { line: 0, msg: format!("unknown hole kind `{o}`") }),
    }
    match khat_kind.as_deref() {
        None | Some("constant") => {}
        Some("bump") => cfg.params.khat = Khat::Bump { peak, center: kcenter, radius: kradius },
        Some(o) => return Err(Error::ParseError { line: 0, msg: format!("unknown khat kind `{o}`") }),
    }
    if !fit_given {
        cfg.fit = cfg.deltas.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi_and_fractions() {
        assert_eq!(parse_number("1/8").unwrap(), 0.125);
        assert!((parse_number("1.5pi").unwrap() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_number("5*pi").unwrap() - 5.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn defaults_and_overrides() {
        let c = parse_config("# sweep\ndeltas = 1/8, 1/16\nhole = none\ncheck.e0 = 0.9 1.1\n").unwrap();
        assert_eq!(c.deltas, vec![0.125, 0.0625]);
        assert_eq!(c.fit, c.deltas);
        assert!(c.params.hole.is_none());
        assert_eq!(c.checks["e0"], (0.9, 1.1));
        assert!(parse_config("deltas = 0.3\n").is_err());
        assert!(matches!(parse_config("bogus = 1\n"), Err(Error::ParseError { line: 1, .. })));
    }
}
