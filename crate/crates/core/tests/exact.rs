use thinwall::cascade::{compute_u00, limit_space, LimitMeshConfig};
use thinwall::exact::{flux_balance, solve_exact, solve_exact_scaled, ExactMeshConfig};
use thinwall::geometry::DomainParams;
use thinwall::{Error, C64};

fn coarse() -> ExactMeshConfig {
    ExactMeshConfig { h: 0.08, alpha: None, ..Default::default() }
}

#[test]
fn linear_in_the_incident_amplitude() {
    let p = DomainParams::reference();
    let a = solve_exact(&p, 0.25, &coarse()).unwrap();
    let b = solve_exact_scaled(&p, 0.25, &coarse(), C64::new(2.0, 0.0)).unwrap();
    let worst = a.u_delta.values.iter().zip(&b.u_delta.values).map(|(x, y)| (2.0 * x - y).norm()).fold(0.0, f64::max);
    assert!(worst <= 1e-12 * a.u_delta.max_abs(), "{worst:e}");
    let z = solve_exact_scaled(&p, 0.25, &coarse(), C64::new(0.0, 0.0)).unwrap();
    assert_eq!(z.u_delta.max_abs(), 0.0);
}

#[test]
fn energy_flux_balances() {
    let p = DomainParams::reference();
    let r = solve_exact(&p, 0.125, &coarse()).unwrap();
    let (flux, mass) = flux_balance(&r.u_delta, &p).unwrap();
    assert!(flux.abs() <= 1e-6 * mass, "flux {flux:e}, k0∫|u|² {mass:e}");
    assert!(r.residual <= 1e-10);
}

#[test]
fn one_hole_per_period() {
    let p = DomainParams::reference();
    for (d, n) in [(0.25, 4), (0.125, 8)] {
        let r = solve_exact(&p, d, &coarse()).unwrap();
        assert_eq!(r.mesh.holes, n);
        assert!(r.mesh.min_angle_deg > 15.0);
    }
    assert!(matches!(solve_exact(&p, 0.3, &coarse()), Err(Error::NonIntegerPeriod(_)) | Err(Error::Stage { .. })));
}

#[test]
fn hole_free_domain_reproduces_the_limit() {
    let mut p = DomainParams::reference();
    p.hole = None;
    let r = solve_exact(&p, 0.125, &ExactMeshConfig::default()).unwrap();
    let space = limit_space(&p, &LimitMeshConfig::default()).unwrap();
    let (u00, _, _) = compute_u00(&p, &space, &[0.1, 0.15, 0.2]).unwrap();
    let mut worst: f64 = 0.0;
    for x in [[0.0, 0.5], [1.5, 0.5], [-2.0, 0.3], [0.0, -0.6], [0.3, -0.4], [-1.0, 0.8]] {
        worst = worst.max((r.u_delta.eval(x).unwrap() - u00.eval(x).unwrap()).norm());
    }
    assert!(worst < 1e-4, "{worst:e}");
}
