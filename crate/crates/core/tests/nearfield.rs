use thinwall::cell::{solve_cell, CellConfig, CellSolution, EffectiveConstants};
use thinwall::corner::SingularExponents;
use thinwall::geometry::{DomainParams, Side};
use thinwall::nearfield::{solve_s, NearFieldConfig};

fn setup() -> (DomainParams, SingularExponents, CellSolution) {
    let p = DomainParams::reference();
    let e = SingularExponents::new(p.theta).unwrap();
    let cell = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &CellConfig::default()).unwrap();
    (p, e, cell)
}

#[test]
fn without_holes_the_block_is_exact() {
    // no holes means vanishing constants, and the block R^λ w₁,₀ is already harmonic
    let e = SingularExponents::new(DomainParams::reference().theta).unwrap();
    let zero = EffectiveConstants::default();
    for side in [Side::Plus, Side::Minus] {
        let s = solve_s(side, 1, &e, &zero, None, None, &NearFieldConfig::default()).unwrap();
        // the residual 𝓛₋₁ is the FEM error of R^λ near the apex, about 1e-5
        assert!(s.l_minus_1().norm() < 1e-4, "{:?}", s.fit);
        assert!((s.fit.a - 1.0).norm() < 1e-5);
    }
}

#[test]
fn l_minus_1_is_stable_and_log_free() {
    let (p, e, cell) = setup();
    let cfg = NearFieldConfig::default();
    let a = solve_s(Side::Plus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg).unwrap();
    let far = NearFieldConfig { rmax: 40.0, ..cfg.clone() };
    let b = solve_s(Side::Plus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &far).unwrap();
    let (la, lb) = (a.l_minus_1(), b.l_minus_1());
    println!("L-1: Rmax 20 {la}, Rmax 40 {lb}; log {:e} {:e}", a.fit.log_coeff, b.fit.log_coeff);
    assert!(la.norm() > 1e-3, "holes must produce a corner response");
    assert!((la - lb).norm() <= 0.02 * la.norm());
    assert!(a.fit.log_coeff <= 1e-3 && b.fit.log_coeff <= 1e-3);
    assert!(a.residual < 1e-10);
    // the R^{−2λ} coefficient coincides with the next block exponent at Θ = 3π/2
    assert!(a.l_minus_2().is_none());
}

#[test]
fn mirror_corners_agree() {
    let (p, e, cell) = setup();
    let cfg = NearFieldConfig::default();
    let plus = solve_s(Side::Plus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg).unwrap();
    let minus = solve_s(Side::Minus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg).unwrap();
    let (a, b) = (plus.l_minus_1(), minus.l_minus_1());
    assert!((a - b).norm() <= 1e-3 * a.norm(), "{a} vs {b}");
}
