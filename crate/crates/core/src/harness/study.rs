use std::cell::Cell;
use std::ops::{AddAssign, Mul};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use crate::cascade::{build_expansion, ExpansionSet};
use crate::cell::EffectiveConstants;
use crate::error::{Error, Result};
use crate::exact::{solve_exact, ExactMeshConfig};
use crate::fem::Field;
use crate::geometry::DomainParams;
use crate::numerics::fit_line;
use crate::C64;

/// Errors of the truncations at one δ. `l2[k]` and `h1[k]` use the truncation with k + 1 terms;
/// the last entry is absent (NaN) when u₃,₀ is not part of the expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub delta: f64,
    pub dofs: usize,
    pub l2: [f64; 4],
    pub h1: [f64; 4],
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope (0 for two points).
    pub halfwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ErrorRow>,
    /// L² slopes per column e0..e3 (None when the column is absent).
    pub slopes: Vec<Option<SlopeFit>>,
    pub h1_slopes: Vec<Option<SlopeFit>>,
    /// Slopes over the sweep minus its largest δ (sensitivity).
    pub slopes_tail: Vec<Option<SlopeFit>>,
    pub fit_deltas: Vec<f64>,
    pub constants: EffectiveConstants,
    pub ell1: [C64; 2],
    pub l_minus_1: [C64; 2],
    pub cascade_seconds: f64,
    /// ‖u_h − u_{h/2}‖ in L²(Ω_α) at the smallest δ, when requested.
    pub reference_error: Option<f64>,
    /// Outcome of each configured slope check: (column, slope, lo, hi, pass).
    pub checks: Vec<(String, f64, f64, f64, bool)>,
}

impl ConvergenceReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.4)
    }
}

/// Two-sided 97.5% Student quantiles for 1..=10 degrees of freedom.
const T975: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];

/// Least squares on (ln δ, ln e).
pub fn fit_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} points", pairs.len())));
    }
    if pairs.iter().any(|(d, e)| !(*d > 0.0) || !(*e > 0.0)) {
        return Err(Error::DegenerateFit("non-positive value".into()));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = fit_line(&x, &y)?;
    let n = x.len();
    let halfwidth = if n > 2 {
        let mx = x.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let se = (ss / (n - 2) as f64 / sxx).sqrt();
        T975[(n - 3).min(T975.len() - 1)] * se
    } else {
        0.0
    };
    Ok(SlopeFit { slope, intercept, halfwidth })
}

#[derive(Clone, Copy, Default)]
struct Acc([f64; 8]);

impl AddAssign for Acc {
    fn add_assign(&mut self, o: Acc) {
        for i in 0..8 {
            self.0[i] += o.0[i];
        }
    }
}

impl Mul<f64> for Acc {
    type Output = Acc;
    fn mul(mut self, w: f64) -> Acc {
        self.0.iter_mut().for_each(|v| *v *= w);
        self
    }
}

/// Whether x lies in Ω_α (outside the box (−L−α, L+α)×(−α, α)).
pub fn in_omega_alpha(p: &DomainParams, alpha: f64, x: [f64; 2]) -> bool {
    !(x[0].abs() < p.l + alpha && x[1].abs() < alpha)
}

/// L² and H¹ errors over Ω_α of the four truncations against a field, evaluated at the
/// quadrature points of the field's mesh (elements selected by centroid).
pub fn measure_errors(u: &Field, set: &ExpansionSet, delta: f64, alpha: f64) -> Result<([f64; 4], [f64; 4])> {
    let p = &set.params;
    let misses = Cell::new(0usize);
    let order = u.space.degree() + 3;
    let keep = |_: usize, c: [f64; 2]| in_omega_alpha(p, alpha, c);
    let w: Vec<[f64; 4]> = (0..4).map(|k| weights_upto(set, k, delta)).collect();
    let acc = u.integrate(order, &keep, |x, (uv, ug)| {
        let Ok(t) = set.terms_at(x) else {
            misses.set(misses.get() + 1);
            return Acc::default();
        };
        let mut a = Acc::default();
        for (k, wk) in w.iter().enumerate() {
            let mut v = uv;
            let mut g = ug;
            for (ti, wi) in t.iter().zip(wk) {
                v -= ti.0 * wi;
                g[0] -= ti.1[0] * wi;
                g[1] -= ti.1[1] * wi;
            }
            a.0[k] = v.norm_sqr();
            a.0[4 + k] = g[0].norm_sqr() + g[1].norm_sqr();
        }
        a
    });
    if misses.get() > 0 {
        return Err(Error::OutsideRegion(f64::NAN, f64::NAN).at("error measurement"));
    }
    let mut l2 = [0.0; 4];
    let mut h1 = [0.0; 4];
    for k in 0..4 {
        l2[k] = acc.0[k].sqrt();
        h1[k] = (acc.0[k] + acc.0[4 + k]).sqrt();
    }
    if set.u30.is_none() {
        l2[3] = f64::NAN;
        h1[3] = f64::NAN;
    }
    Ok((l2, h1))
}

/// Weights of u₀,₀, u₀,₁, u₂,₀, u₃,₀ in the truncation with k + 1 terms.
fn weights_upto(set: &ExpansionSet, k: usize, delta: f64) -> [f64; 4] {
    let l = |n| set.exps.lambda_n(n);
    let all = [1.0, delta, delta.powf(l(2)), if set.u30.is_some() { delta.powf(l(3)) } else { 0.0 }];
    let mut w = [0.0; 4];
    w[..=k].copy_from_slice(&all[..=k]);
    w
}

/// ‖u − v‖ in L²(Ω_α) with v sampled pointwise on its own mesh.
pub fn cross_mesh_l2(u: &Field, v: &Field, p: &DomainParams, alpha: f64) -> Result<f64> {
    let keep = |_: usize, c: [f64; 2]| in_omega_alpha(p, alpha, c);
    let misses = Cell::new(0usize);
    let e = u.integrate(u.space.degree() + 3, &keep, |x, (uv, _)| match v.eval(x) {
        Some(w) => (uv - w).norm_sqr(),
        None => {
            misses.set(misses.get() + 1);
            0.0
        }
    });
    if misses.get() > 0 {
        return Err(Error::OutsideRegion(f64::NAN, f64::NAN).at("reference comparison"));
    }
    Ok(e.sqrt())
}

fn slopes_for(rows: &[ErrorRow], fit: &[f64], h1: bool) -> Vec<Option<SlopeFit>> {
    (0..4)
        .map(|k| {
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| fit.iter().any(|f| (f - r.delta).abs() <= 1e-12 * r.delta))
                .map(|r| (r.delta, if h1 { r.h1[k] } else { r.l2[k] }))
                .collect();
            if pairs.iter().any(|p| !p.1.is_finite()) {
                return None;
            }
            fit_slope(&pairs).ok()
        })
        .collect()
}

/// Run the sweep: one expansion, one exact solve per δ, errors in Ω_α, slopes.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    run_study_with(cfg, &mut |_| {})
}

/// As `run_study`, reporting each finished row.
pub fn run_study_with(cfg: &StudyConfig, progress: &mut dyn FnMut(&ErrorRow)) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let t0 = Instant::now();
    let set = build_expansion(&cfg.params, &cfg.cascade).map_err(|e| e.at("cascade"))?;
    let cascade_seconds = t0.elapsed().as_secs_f64();
    let mesh = ExactMeshConfig { alpha: Some(cfg.alpha), ..cfg.exact.clone() };
    let mut rows = Vec::new();
    let mut reference_error = None;
    let smallest = cfg.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    for &delta in &cfg.deltas {
        let t = Instant::now();
        let ex = solve_exact(&cfg.params, delta, &mesh).map_err(|e| e.at("exact"))?;
        let (l2, h1) = measure_errors(&ex.u_delta, &set, delta, cfg.alpha)?;
        if cfg.reference_check && delta == smallest {
            let fine = solve_exact(&cfg.params, delta, &mesh.refined()).map_err(|e| e.at("reference"))?;
            reference_error = Some(cross_mesh_l2(&fine.u_delta, &ex.u_delta, &cfg.params, cfg.alpha)?);
        }
        let row = ErrorRow { delta, dofs: ex.ndof, l2, h1, seconds: t.elapsed().as_secs_f64() };
        progress(&row);
        rows.push(row);
    }
    let slopes = slopes_for(&rows, &cfg.fit, false);
    let h1_slopes = slopes_for(&rows, &cfg.fit, true);
    let largest = cfg.fit.iter().copied().fold(0.0, f64::max);
    let tail: Vec<f64> = cfg.fit.iter().copied().filter(|d| *d < largest).collect();
    let slopes_tail = if tail.len() >= 2 { slopes_for(&rows, &tail, false) } else { vec![None; 4] };
    let mut checks = Vec::new();
    for (col, (lo, hi)) in &cfg.checks {
        let k: usize = col[1..].parse().unwrap_or(0);
        let s = slopes.get(k).copied().flatten().map(|f| f.slope).unwrap_or(f64::NAN);
        checks.push((col.clone(), s, *lo, *hi, s >= *lo && s <= *hi));
    }
    Ok(ConvergenceReport {
        rows,
        slopes,
        h1_slopes,
        slopes_tail,
        fit_deltas: cfg.fit.clone(),
        constants: set.constants,
        ell1: [set.corners[0].ell[1], set.corners[1].ell[1]],
        l_minus_1: set.l_minus_1(),
        cascade_seconds,
        reference_error,
        checks,
    })
}
