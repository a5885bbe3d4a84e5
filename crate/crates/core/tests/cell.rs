use thinwall::cell::{compatibility_residuals, solve_cell, CellConfig, CutoffSpec, EffectiveConstants};
use thinwall::geometry::{DomainParams, HoleSpec, Khat};
use thinwall::C64;

fn reference_hole() -> HoleSpec {
    DomainParams::reference().hole.unwrap()
}

fn k0() -> f64 {
    DomainParams::reference().k0
}

/// Largest change between two constant sets, relative to each constant; constants that vanish
/// by symmetry are measured against max(|D2|, |N2|).
fn max_rel_change(a: &EffectiveConstants, b: &EffectiveConstants) -> f64 {
    let scale = a.d2.norm().max(a.n2.norm());
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| (x - y).norm() / if x.norm() > 1e-6 * scale { x.norm() } else { scale })
        .fold(0.0, f64::max)
}

#[test]
fn no_hole_is_transparent() {
    let c = solve_cell(None, &Khat::Constant, k0(), &CellConfig::default()).unwrap().constants;
    for v in c.as_array() {
        assert!(v.norm() <= 1e-8, "{c:?}");
    }
}

#[test]
fn symmetric_disk_kills_odd_constants() {
    let c = solve_cell(Some(&reference_hole()), &Khat::Constant, k0(), &CellConfig::default()).unwrap().constants;
    let scale = c.d2.norm().max(c.n2.norm());
    assert!(c.d1.norm() <= 1e-6 * scale && c.n3.norm() <= 1e-6 * scale, "{c:?}");
    // the mass term is k₀² times the hole area
    let area = reference_hole().area();
    assert!((c.n1.re - k0() * k0() * area).abs() <= 1e-8 * c.n1.re, "{} vs {}", c.n1.re, k0() * k0() * area);
    // 𝒟₂ = 2D∞ for the kernel profile
    assert!((c.d2.re - 2.0 * c.d_inf).abs() < 1e-10);
    assert!(c.d2.re > 0.0 && c.n2.re > 0.0);
}

#[test]
fn constants_are_robust() {
    let h = reference_hole();
    let base = solve_cell(Some(&h), &Khat::Constant, k0(), &CellConfig::default()).unwrap().constants;
    let taller = solve_cell(Some(&h), &Khat::Constant, k0(), &CellConfig { t: 8.0, ..Default::default() }).unwrap().constants;
    let dt = max_rel_change(&base, &taller);
    assert!(dt <= 1e-6, "T 6 -> 8 changed constants by {dt:e}");
    let quintic = CellConfig { cutoff: CutoffSpec::Quintic, ..Default::default() };
    let q = solve_cell(Some(&h), &Khat::Constant, k0(), &quintic).unwrap().constants;
    for (a, b) in [(base.d2, q.d2), (base.n1, q.n1), (base.n2, q.n2)] {
        assert!((a - b).norm() <= 1e-6 * a.norm(), "{a} vs {b}");
    }
    let fine = solve_cell(Some(&h), &Khat::Constant, k0(), &CellConfig::default().refined()).unwrap().constants;
    let dr = max_rel_change(&base, &fine);
    assert!(dr <= 1e-4, "refinement changed constants by {dr:e}");
}

#[test]
fn offset_hole_breaks_symmetry() {
    // a leaning triangle has no mirror line X₁ = 1/2, so 𝒟₁ and 𝒩₃ no longer vanish
    let sq = HoleSpec::Polygon { vertices: vec![[0.3, -0.1], [0.7, -0.1], [0.4, 0.2]] };
    assert!(!sq.is_symmetric());
    let c = solve_cell(Some(&sq), &Khat::Constant, k0(), &CellConfig::default()).unwrap().constants;
    let scale = c.d2.norm().max(c.n2.norm());
    assert!(c.d1.norm() > 1e-3 * scale, "{c:?}");
}

#[test]
fn compatibility_of_the_kernel_data() {
    let s = solve_cell(Some(&reference_hole()), &Khat::Constant, k0(), &CellConfig::default()).unwrap();
    // F = 0, G = −n₂ on the hole: the flux of the kernel profile balances
    let f = |_: [f64; 2]| C64::new(0.0, 0.0);
    let g = |_: [f64; 2], n: [f64; 2]| C64::new(-n[1], 0.0);
    let (_, flux) = compatibility_residuals(&s.w, &f, &g).unwrap();
    assert!(flux.norm() < 1e-10, "{flux}");
    for d in &s.diagnostics {
        assert!(d.residual < 1e-10);
    }
}
