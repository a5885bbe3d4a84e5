//! Corner singularities: exponents, angular profiles, Bessel lifts and coefficient extraction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cell::{CutoffSpec, EffectiveConstants};
use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre01;
use crate::fem::{Field, Sample};
use crate::geometry::{Side, Tag};
use crate::special::{bessel_jy, cylinder_r};
use crate::C64;

/// λ = π/Θ and its multiples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularExponents {
    pub theta: f64,
    pub lambda: f64,
}

impl SingularExponents {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > PI && theta < 2.0 * PI) {
            return Err(Error::InvalidParams(format!("opening angle {theta} outside (pi, 2pi)")));
        }
        Ok(SingularExponents { theta, lambda: PI / theta })
    }

    pub fn lambda_n(&self, n: usize) -> f64 {
        n as f64 * self.lambda
    }

    /// c_m = ∫ w_m² over the sector.
    pub fn norm_const(&self, m: usize) -> f64 {
        if m == 0 {
            self.theta
        } else {
            0.5 * self.theta
        }
    }
}

/// Polar frame attached to one corner of Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerFrame {
    pub side: Side,
    pub origin: [f64; 2],
    pub theta: f64,
}

impl CornerFrame {
    /// Corner (±L, 0) of the macroscopic domain.
    pub fn macro_corner(side: Side, l: f64, theta: f64) -> Self {
        CornerFrame { side, origin: [side.sign() * l, 0.0], theta }
    }

    /// Corner at the origin (near-field cone).
    pub fn at_origin(side: Side, theta: f64) -> Self {
        CornerFrame { side, origin: [0.0, 0.0], theta }
    }

    /// (a, b, γ)
    pub fn sector(&self) -> (f64, f64, f64) {
        self.side.sector(self.theta)
    }

    /// (r, θ) with θ in the sector's range. A point on the layer line gets θ = γ.
    pub fn polar(&self, x: [f64; 2]) -> (f64, f64) {
        let dx = x[0] - self.origin[0];
        let dy = x[1] - self.origin[1];
        let r = dx.hypot(dy);
        let mut t = dy.atan2(dx);
        match self.side {
            Side::Plus => {
                if t < 0.0 {
                    t += 2.0 * PI;
                }
                if dy == 0.0 && dx < 0.0 {
                    t = PI;
                }
            }
            Side::Minus => {
                if dy == 0.0 && dx > 0.0 {
                    t = 0.0;
                }
            }
        }
        (r, t)
    }

    pub fn point(&self, r: f64, t: f64) -> [f64; 2] {
        [self.origin[0] + r * t.cos(), self.origin[1] + r * t.sin()]
    }

    /// Whether the first sub-interval (a, γ) lies above the layer.
    pub fn first_is_top(&self) -> bool {
        self.side == Side::Plus
    }

    /// Sub-interval index (0 or 1) holding θ; `top` breaks the tie on θ = γ.
    pub fn piece(&self, t: f64, top: Option<bool>) -> usize {
        let (_, _, g) = self.sector();
        if (t - g).abs() < 1e-13 {
            let top = top.unwrap_or(true);
            return if top == self.first_is_top() { 0 } else { 1 };
        }
        if t < g {
            0
        } else {
            1
        }
    }
}

/// Piecewise trigonometric profile: c cos(μθ) + s sin(μθ) on each sub-interval.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularProfile {
    pub n: usize,
    pub q: usize,
    pub frame: CornerFrame,
    pub mu: f64,
    pub coef: [[C64; 2]; 2],
}

impl AngularProfile {
    /// (w, w') on sub-interval `piece`.
    pub fn eval_piece(&self, piece: usize, t: f64) -> (C64, C64) {
        let [c, s] = self.coef[piece];
        let (sn, cs) = (self.mu * t).sin_cos();
        (c * cs + s * sn, self.mu * (s * cs - c * sn))
    }

    pub fn eval(&self, t: f64, top: Option<bool>) -> (C64, C64) {
        self.eval_piece(self.frame.piece(t, top), t)
    }

    /// ([w], [w']) at γ, top minus bottom.
    pub fn jumps(&self) -> (C64, C64) {
        let (_, _, g) = self.frame.sector();
        let (t0, t1) = if self.frame.first_is_top() { (0, 1) } else { (1, 0) };
        let a = self.eval_piece(t0, g);
        let b = self.eval_piece(t1, g);
        (a.0 - b.0, a.1 - b.1)
    }
}

/// w_{n,0}: cos(λ_n θ) on side +, cos(λ_n(θ − π)) on side −.
pub fn regular_profile(exps: &SingularExponents, n: usize, side: Side) -> AngularProfile {
    let mu = exps.lambda_n(n);
    let shift = match side {
        Side::Plus => 0.0,
        Side::Minus => PI,
    };
    let (s, c) = (mu * shift).sin_cos();
    let cs = [C64::new(c, 0.0), C64::new(s, 0.0)];
    AngularProfile { n, q: 0, frame: CornerFrame::at_origin(side, exps.theta), mu, coef: [cs, cs] }
}

/// Profile of exponent λ_n − q with Neumann ends and jumps [w] = jump_a, [w'] = jump_b at γ.
pub fn solve_angular_profile(
    exps: &SingularExponents,
    n: usize,
    q: usize,
    side: Side,
    jump_a: C64,
    jump_b: C64,
) -> Result<AngularProfile> {
    match q {
        0 => {
            if jump_a.norm() + jump_b.norm() > 0.0 {
                return Err(Error::InvalidParams("q = 0 profiles carry no jumps".into()));
            }
            Ok(regular_profile(exps, n, side))
        }
        1 => {
            let frame = CornerFrame::at_origin(side, exps.theta);
            let (a, b, g) = frame.sector();
            let mu = exps.lambda_n(n) - 1.0;
            // piece i is α_i cos(μ(θ − e_i)) with e = a, b
            let f = |e: f64| ((mu * (g - e)).cos(), -mu * (mu * (g - e)).sin());
            let (f1, d1) = f(a);
            let (f2, d2) = f(b);
            let det = -f1 * d2 + f2 * d1;
            if det.abs() <= 1e-10 * mu.abs().max(1e-300) || mu * exps.theta / PI == (mu * exps.theta / PI).round() {
                return Err(Error::ResonantCase(n, q));
            }
            let sgn = if frame.first_is_top() { 1.0 } else { -1.0 };
            let (ja, jb) = (jump_a * sgn, jump_b * sgn);
            // α1 f1 − α2 f2 = ja, α1 d1 − α2 d2 = jb
            let a1 = (-ja * d2 + f2 * jb) / det;
            let a2 = (f1 * jb - d1 * ja) / det;
            let piece = |al: C64, e: f64| {
                let (s, c) = (mu * e).sin_cos();
                [al * c, al * s]
            };
            Ok(AngularProfile { n, q, frame, mu, coef: [piece(a1, a), piece(a2, b)] })
        }
        _ => Err(Error::IndexUnsupported(n, q)),
    }
}

/// Jumps of w_{n,1} forced by the transmission conditions at a corner.
pub fn first_order_jumps(exps: &SingularExponents, c: &EffectiveConstants, n: usize, side: Side) -> (C64, C64) {
    let l = exps.lambda_n(n);
    let (s, co) = (l * PI).sin_cos();
    match side {
        Side::Plus => (
            l * (-c.d1 * co + c.d2 * s),
            -l * (l - 1.0) * (c.n2 * co - c.n3 * s),
        ),
        Side::Minus => (l * (c.d1 * co + c.d2 * s), l * (l - 1.0) * (c.n2 * co + c.n3 * s)),
    }
}

pub fn w11_jumps(exps: &SingularExponents, c: &EffectiveConstants, side: Side) -> (C64, C64) {
    first_order_jumps(exps, c, 1, side)
}

pub fn first_order_profile(exps: &SingularExponents, c: &EffectiveConstants, n: usize, side: Side) -> Result<AngularProfile> {
    let (a, b) = first_order_jumps(exps, c, n, side);
    solve_angular_profile(exps, n, 1, side, a, b)
}

pub fn w11_profile(exps: &SingularExponents, c: &EffectiveConstants, side: Side) -> Result<AngularProfile> {
    first_order_profile(exps, c, 1, side)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    J,
    Y,
}

/// coeff · χ_L(r) · Z_ν(k₀r) · w(θ) around one corner, χ_L(r) = 1 − χ(2r/L).
#[derive(Clone, Debug)]
pub struct CornerField {
    pub frame: CornerFrame,
    pub kind: BesselKind,
    pub order: f64,
    pub k0: f64,
    pub coeff: C64,
    pub profile: AngularProfile,
    /// None: no cut-off.
    pub cutoff: Option<(CutoffSpec, f64)>,
}

/// Cartesian derivatives on the layer line.
#[derive(Clone, Copy, Debug, Default)]
pub struct LayerDerivatives {
    pub u: C64,
    pub d1: C64,
    pub d2: C64,
    pub d11: C64,
    pub d12: C64,
}

const R_FLOOR: f64 = 1e-12;

impl CornerField {
    /// 𝓙 = J_{λ−1}(k₀r)·w₁,₁(θ), scaled by (k₀/2λ)ℓ₁.
    pub fn lift_j(
        frame: CornerFrame,
        exps: &SingularExponents,
        consts: &EffectiveConstants,
        k0: f64,
        ell1: C64,
        cutoff: CutoffSpec,
        l: f64,
    ) -> Result<Self> {
        Self::lift_jn(frame, exps, consts, 1, k0, ell1, Some((cutoff, l)))
    }

    /// J_{λn−1}(k₀r)·w_{n,1}(θ) scaled by (k₀/2λn)ℓn: leading term ℓn(k₀/2)^{λn}/Γ(λn+1)·r^{λn−1}w_{n,1}.
    pub fn lift_jn(
        frame: CornerFrame,
        exps: &SingularExponents,
        consts: &EffectiveConstants,
        n: usize,
        k0: f64,
        elln: C64,
        cutoff: Option<(CutoffSpec, f64)>,
    ) -> Result<Self> {
        let mut profile = first_order_profile(exps, consts, n, frame.side)?;
        profile.frame = frame;
        let ln = exps.lambda_n(n);
        Ok(CornerField { frame, kind: BesselKind::J, order: ln - 1.0, k0, coeff: elln * (k0 / (2.0 * ln)), profile, cutoff })
    }

    /// 𝓨ᵢ = Y_{λᵢ}(k₀r)·w₋ᵢ,₀(θ), scaled by `coeff`.
    pub fn lift_y(frame: CornerFrame, exps: &SingularExponents, i: usize, k0: f64, coeff: C64, cutoff: CutoffSpec, l: f64) -> Self {
        let mut profile = regular_profile(exps, i, frame.side);
        profile.frame = frame;
        CornerField { frame, kind: BesselKind::Y, order: exps.lambda_n(i), k0, coeff, profile, cutoff: Some((cutoff, l)) }
    }

    /// coeff·J_{λ_n}(k₀r)·w_{n,0}(θ), the regular mode n.
    pub fn regular(frame: CornerFrame, exps: &SingularExponents, n: usize, k0: f64, coeff: C64, cutoff: Option<(CutoffSpec, f64)>) -> Self {
        let mut profile = regular_profile(exps, n, frame.side);
        profile.frame = frame;
        CornerField { frame, kind: BesselKind::J, order: exps.lambda_n(n), k0, coeff, profile, cutoff }
    }

    pub fn uncut(&self) -> Self {
        CornerField { cutoff: None, ..self.clone() }
    }

    /// χ_L and its first two radial derivatives.
    fn chi_l(&self, r: f64) -> [f64; 3] {
        match self.cutoff {
            None => [1.0, 0.0, 0.0],
            Some((c, l)) => {
                let t = 2.0 * r / l;
                [1.0 - c.chi(t), -2.0 / l * c.d1(t), -4.0 / (l * l) * c.d2(t)]
            }
        }
    }

    /// Support radius (infinite without cut-off).
    pub fn support(&self) -> f64 {
        self.cutoff.map(|(_, l)| l).unwrap_or(f64::INFINITY)
    }

    /// Z(k₀r) and its radial derivatives.
    fn radial_z(&self, r: f64) -> [f64; 3] {
        let r = r.max(R_FLOOR);
        cylinder_r(self.order, self.k0, r, self.kind == BesselKind::Y).unwrap_or([f64::NAN; 3])
    }

    /// G = χ_L·Z and its radial derivatives.
    fn radial(&self, r: f64) -> [f64; 3] {
        let c = self.chi_l(r);
        if c == [0.0; 3] {
            return [0.0; 3];
        }
        let z = self.radial_z(r);
        [c[0] * z[0], c[1] * z[0] + c[0] * z[1], c[2] * z[0] + 2.0 * c[1] * z[1] + c[0] * z[2]]
    }

    /// Value and gradient; `top` chooses the side for points on the layer line.
    pub fn eval(&self, x: [f64; 2], top: Option<bool>) -> Sample {
        let (r, t) = self.frame.polar(x);
        if r >= self.support() {
            return (C64::new(0.0, 0.0), [C64::new(0.0, 0.0); 2]);
        }
        let r = r.max(R_FLOOR);
        let g = self.radial(r);
        let (w, dw) = self.profile.eval(t, top);
        let (s, c) = t.sin_cos();
        let ur = self.coeff * w * g[1];
        let ut = self.coeff * dw * (g[0] / r);
        (self.coeff * w * g[0], [ur * c - ut * s, ur * s + ut * c])
    }

    pub fn value(&self, x: [f64; 2], top: Option<bool>) -> C64 {
        self.eval(x, top).0
    }

    /// [Δ, χ_L]v for v the un-cut field.
    pub fn commutator(&self, x: [f64; 2]) -> C64 {
        let (r, t) = self.frame.polar(x);
        let c = self.chi_l(r);
        if c[1] == 0.0 && c[2] == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let z = self.radial_z(r);
        let (w, _) = self.profile.eval(t, None);
        self.coeff * w * (z[0] * (c[2] + c[1] / r) + 2.0 * c[1] * z[1])
    }

    /// Derivatives on the layer line (θ = γ) from the given side, at distance r from the corner.
    pub fn layer_derivatives(&self, r: f64, top: bool) -> LayerDerivatives {
        if r >= self.support() {
            return LayerDerivatives::default();
        }
        let r = r.max(R_FLOOR);
        let (_, _, g) = self.frame.sector();
        let gr = self.radial(r);
        let (w, dw) = self.profile.eval(g, Some(top));
        // along Γ: ∂₁ = ε∂_r, ∂₂ = (ε/r)∂_θ with ε = −1 on side +, +1 on side −
        let eps = -self.frame.side.sign();
        let k = self.coeff;
        LayerDerivatives {
            u: k * w * gr[0],
            d1: k * w * (eps * gr[1]),
            d2: k * dw * (eps * gr[0] / r),
            d11: k * w * gr[2],
            d12: k * dw * (gr[1] / r - gr[0] / (r * r)),
        }
    }

    /// Leading small-r law of a Y lift: −(Γ(ν)/π)(k₀/2)^{−ν} r^{−ν} w(θ).
    pub fn y_small_r(&self, x: [f64; 2]) -> C64 {
        let (r, t) = self.frame.polar(x);
        let nu = self.order;
        let (w, _) = self.profile.eval(t, None);
        self.coeff * w * (-crate::special::gamma(nu) / PI * (0.5 * self.k0).powf(-nu) * r.powf(-nu))
    }
}

/// Outcome of a multi-radius extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub value: C64,
    pub radii: Vec<f64>,
    pub per_radius: Vec<C64>,
    /// max |ℓ(r) − ℓ| over the radii.
    pub scatter_abs: f64,
    /// scatter_abs / |ℓ|.
    pub scatter_rel: f64,
}

/// ℓ_m from samples of u: projection on w_{m,0} over each arc, least squares in J_{λ_m}(k₀r).
/// `sample(x, top)` returns u at x on the given side of the layer.
pub fn extract_ell_with(
    frame: &CornerFrame,
    exps: &SingularExponents,
    k0: f64,
    m: usize,
    radii: &[f64],
    sample: &dyn Fn([f64; 2], bool) -> Option<C64>,
) -> Result<Extraction> {
    let (a, b, g) = frame.sector();
    let prof = regular_profile(exps, m, frame.side);
    let rule = gauss_legendre01(48);
    let cm = exps.norm_const(m);
    let nu = exps.lambda_n(m);
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    let mut kept = Vec::new();
    for &r in radii {
        let j = bessel_jy(nu, k0 * r)?.0;
        if j.abs() <= 1e-8 {
            continue;
        }
        let mut p = C64::new(0.0, 0.0);
        for (lo, hi) in [(a, g), (g, b)] {
            let top = (lo == a) == frame.first_is_top();
            for (s, w) in &rule {
                let t = lo + (hi - lo) * s;
                let x = frame.point(r, t);
                let u = sample(x, top).ok_or(Error::OutsideRegion(x[0], x[1]))?;
                p += u * prof.eval(t, None).0 * (w * (hi - lo));
            }
        }
        p /= cm;
        num += p * j;
        den += j * j;
        kept.push((r, p / j));
    }
    if kept.is_empty() {
        return Err(Error::IllConditioned(format!("J of order {nu} vanishes at every radius")));
    }
    let value = num / den;
    let scatter_abs = kept.iter().map(|(_, v)| (v - value).norm()).fold(0.0, f64::max);
    Ok(Extraction {
        value,
        radii: kept.iter().map(|k| k.0).collect(),
        per_radius: kept.iter().map(|k| k.1).collect(),
        scatter_abs,
        scatter_rel: scatter_abs / value.norm().max(f64::MIN_POSITIVE),
    })
}

/// ℓ_m(u) for a finite-element field on a macroscopic mesh, minus an optional known part.
pub fn extract_ell(
    u: &Field,
    frame: &CornerFrame,
    exps: &SingularExponents,
    k0: f64,
    m: usize,
    radii: &[f64],
    subtract: Option<&dyn Fn([f64; 2], bool) -> C64>,
) -> Result<Extraction> {
    let split = u.space.mesh.has_tag(Tag::GammaInterface_top);
    let y0 = frame.origin[1];
    let sample = |x: [f64; 2], top: bool| {
        let s = if split { u.sample_side(x, y0, top) } else { u.sample(x) }?;
        Some(s.0 - subtract.map(|f| f(x, top)).unwrap_or_default())
    };
    extract_ell_with(frame, exps, k0, m, radii, &sample)
}

/// Corner bookkeeping: ℓ_m(u) per m and the near-field coefficients 𝓛₋ₘ.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CornerData {
    pub side: Option<Side>,
    pub ell: Vec<C64>,
    pub ell_scatter: Vec<f64>,
    pub radii: Vec<f64>,
    pub l_minus: Vec<C64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps() -> SingularExponents {
        SingularExponents::new(1.5 * PI).unwrap()
    }

    #[test]
    fn ordering() {
        for th in [1.1 * PI, 1.5 * PI, 1.9 * PI] {
            let e = SingularExponents::new(th).unwrap();
            let l = |n| e.lambda_n(n);
            assert!(0.0 < l(1) && l(1) < 1.0 && 1.0 < l(2) && l(2) < l(1) + 1.0 && l(1) + 1.0 < l(3));
        }
        assert!(SingularExponents::new(PI).is_err());
    }

    #[test]
    fn regular_profiles() {
        let e = exps();
        let p = regular_profile(&e, 1, Side::Plus);
        for t in [0.1, 1.0, 3.5, 4.5] {
            assert!((p.eval(t, None).0.re - (e.lambda * t).cos()).abs() < 1e-15);
        }
        let m = regular_profile(&e, 2, Side::Minus);
        for t in [-1.2, 0.3, 2.9] {
            assert!((m.eval(t, None).0.re - (2.0 * e.lambda * (t - PI)).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn profile_jumps_and_neumann() {
        let e = exps();
        for side in [Side::Plus, Side::Minus] {
            let (ja, jb) = (C64::new(0.3, 0.1), C64::new(-1.2, 0.5));
            let p = solve_angular_profile(&e, 1, 1, side, ja, jb).unwrap();
            let (a, b, _) = p.frame.sector();
            assert!(p.eval_piece(0, a).1.norm() < 1e-14);
            assert!(p.eval_piece(1, b).1.norm() < 1e-14);
            let (da, db) = p.jumps();
            assert!((da - ja).norm() < 1e-14 && (db - jb).norm() < 1e-14);
            let z = solve_angular_profile(&e, 1, 1, side, C64::default(), C64::default()).unwrap();
            assert!(z.coef.iter().flatten().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn only_first_order_profiles() {
        // (λ_n − 1)Θ/π = n − Θ/π is never an integer for Θ in (π, 2π), so resonance cannot occur
        let e = exps();
        for n in 1..6 {
            assert!(solve_angular_profile(&e, n, 1, Side::Minus, C64::new(1.0, 0.0), C64::default()).is_ok());
        }
        let z = C64::default();
        assert!(matches!(solve_angular_profile(&e, 1, 2, Side::Plus, z, z), Err(Error::IndexUnsupported(1, 2))));
        assert!(solve_angular_profile(&e, 1, 0, Side::Plus, C64::new(1.0, 0.0), z).is_err());
    }

    fn fd_laplacian(f: &dyn Fn([f64; 2]) -> C64, x: [f64; 2], h: f64) -> C64 {
        // fourth-order five-point stencil per axis
        let d2 = |e: [f64; 2]| {
            let p = |s: f64| f([x[0] + s * e[0], x[1] + s * e[1]]);
            (-p(2.0 * h) + 16.0 * p(h) - 30.0 * p(0.0) + 16.0 * p(-h) - p(-2.0 * h)) / (12.0 * h * h)
        };
        d2([1.0, 0.0]) + d2([0.0, 1.0])
    }

    #[test]
    fn w11_harmonic_extension() {
        let e = exps();
        let c = EffectiveConstants {
            d1: C64::new(0.01, 0.0),
            d2: C64::new(0.15, 0.0),
            n1: C64::new(17.3, 0.0),
            n2: C64::new(0.13, 0.0),
            n3: C64::new(-0.02, 0.0),
            d_inf: 0.0758,
        };
        for side in [Side::Plus, Side::Minus] {
            let p = w11_profile(&e, &c, side).unwrap();
            let fr = p.frame;
            let f = |x: [f64; 2]| {
                let (r, t) = fr.polar(x);
                p.eval(t, None).0 * r.powf(p.mu)
            };
            for t in [0.4, 1.3, 2.2, 3.9, 4.5, -1.0] {
                let (a, b, g) = fr.sector();
                if t <= a + 0.1 || t >= b - 0.1 || (t - g).abs() < 0.1 {
                    continue;
                }
                let x = fr.point(0.7, t);
                let res = fd_laplacian(&f, x, 1e-3).norm() / f(x).norm().max(1e-3);
                assert!(res < 1e-8, "{side:?} {t} {res}");
            }
        }
    }

    #[test]
    fn lifts_solve_helmholtz() {
        let e = exps();
        let k0 = 5.0 * PI;
        let c = EffectiveConstants {
            d1: C64::new(0.0, 0.0),
            d2: C64::new(0.15, 0.0),
            n1: C64::new(17.3, 0.0),
            n2: C64::new(0.13, 0.0),
            n3: C64::new(0.0, 0.0),
            d_inf: 0.0758,
        };
        for side in [Side::Plus, Side::Minus] {
            let fr = CornerFrame::macro_corner(side, 0.5, e.theta);
            let j = CornerField::lift_j(fr, &e, &c, k0, C64::new(1.0, 0.5), CutoffSpec::Smooth, 0.5).unwrap();
            let y = CornerField::lift_y(fr, &e, 1, k0, C64::new(0.0, 2.0), CutoffSpec::Smooth, 0.5);
            for f in [j.uncut(), y.uncut()] {
                for (r, t) in [(0.3, 0.5), (0.8, 2.0), (0.2, 4.0), (0.6, -1.2), (0.45, 1.9)] {
                    let (a, b, _) = fr.sector();
                    if t <= a || t >= b || (t - fr.sector().2).abs() < 0.2 {
                        continue;
                    }
                    let x = fr.point(r, t);
                    let v = |p: [f64; 2]| f.value(p, None);
                    let res = fd_laplacian(&v, x, 2e-4) + v(x) * (k0 * k0);
                    let rel = res.norm() / (k0 * k0 * v(x).norm()).max(1e-12);
                    assert!(rel < 1e-8, "{side:?} r={r} t={t} rel={rel}");
                }
            }
            // cut-off support and commutator support
            let far = fr.point(0.51, 1.0);
            assert_eq!(j.value(far, None), C64::new(0.0, 0.0));
            assert_eq!(j.commutator(fr.point(0.2, 1.0)), C64::new(0.0, 0.0));
            assert!(j.commutator(fr.point(0.375, 1.0)).norm() > 0.0);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let e = exps();
        let fr = CornerFrame::macro_corner(Side::Minus, 0.5, e.theta);
        let y = CornerField::lift_y(fr, &e, 1, 7.0, C64::new(1.0, -1.0), CutoffSpec::Smooth, 0.5);
        let x = fr.point(0.33, 0.7);
        let h = 1e-6;
        let (_, g) = y.eval(x, None);
        let dx = (y.value([x[0] + h, x[1]], None) - y.value([x[0] - h, x[1]], None)) / (2.0 * h);
        let dy = (y.value([x[0], x[1] + h], None) - y.value([x[0], x[1] - h], None)) / (2.0 * h);
        assert!((dx - g[0]).norm() < 1e-6 * g[0].norm().max(1.0));
        assert!((dy - g[1]).norm() < 1e-6 * g[1].norm().max(1.0));
    }

    #[test]
    fn y_small_r_law() {
        let e = exps();
        let k0 = 5.0 * PI;
        let fr = CornerFrame::macro_corner(Side::Plus, 0.5, e.theta);
        let y = CornerField::lift_y(fr, &e, 1, k0, C64::new(1.0, 0.0), CutoffSpec::Smooth, 0.5);
        let mut last = f64::INFINITY;
        for r in [1e-2, 1e-3, 1e-4, 1e-5] {
            let x = fr.point(r, 0.4);
            let d = (y.value(x, None) / y.y_small_r(x) - 1.0).norm();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn orthogonality() {
        let e = exps();
        let rule = gauss_legendre01(40);
        for m in 0..4 {
            for n in 0..4 {
                let pm = regular_profile(&e, m, Side::Plus);
                let pn = regular_profile(&e, n, Side::Plus);
                let s: f64 = rule.iter().map(|(t, w)| {
                    let th = t * e.theta;
                    (pm.eval(th, None).0 * pn.eval(th, None).0).re * w * e.theta
                }).sum();
                let want = if m == n { e.norm_const(m) } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "{m} {n} {s}");
            }
        }
    }

    #[test]
    fn synthetic_extraction() {
        let e = exps();
        let k0 = 5.0 * PI;
        for side in [Side::Plus, Side::Minus] {
            let fr = CornerFrame::macro_corner(side, 0.5, e.theta);
            let mode = CornerField::regular(fr, &e, 1, k0, C64::new(1.0, 0.0), None);
            let s = |x: [f64; 2], top: bool| Some(mode.value(x, Some(top)));
            let radii = [0.1, 0.15, 0.2];
            let l1 = extract_ell_with(&fr, &e, k0, 1, &radii, &s).unwrap();
            assert!((l1.value - 1.0).norm() < 1e-10);
            for m in [0, 2, 3] {
                let lm = extract_ell_with(&fr, &e, k0, m, &radii, &s).unwrap();
                assert!(lm.value.norm() < 1e-8, "{m}");
            }
            let j0 = CornerField::regular(fr, &e, 0, k0, C64::new(1.0, 0.0), None);
            let s0 = |x: [f64; 2], top: bool| Some(j0.value(x, Some(top)));
            assert!((extract_ell_with(&fr, &e, k0, 0, &radii, &s0).unwrap().value - 1.0).norm() < 1e-12);
            // a constant is the J₀ mode in the static limit
            let one = |_: [f64; 2], _: bool| Some(C64::new(1.0, 0.0));
            let radii0 = [0.02, 0.05];
            let l0 = extract_ell_with(&fr, &e, 1e-4, 0, &radii0, &one).unwrap();
            assert!((l0.value - 1.0).norm() < 1e-10);
            assert!(extract_ell_with(&fr, &e, 1e-4, 1, &radii0, &one).unwrap().value.norm() < 1e-10);
        }
    }
}
