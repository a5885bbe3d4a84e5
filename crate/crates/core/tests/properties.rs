use std::f64::consts::PI;

use proptest::prelude::*;
use thinwall::cell::CutoffSpec;
use thinwall::corner::SingularExponents;
use thinwall::geometry::{triangulate, GeometrySpec, Grading, Mesh, Tag};
use thinwall::harness::config::parse_number;
use thinwall::harness::{fit_slope, parse_csv, write_csv, ErrorRow};
use thinwall::special::{bessel_jy, bessel_jy_d};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_laws_fit_exactly(c in 1e-3f64..1e3, s in 0.2f64..3.0) {
        let pairs: Vec<(f64, f64)> = (2..=6).map(|k| { let d = 0.5f64.powi(k); (d, c * d.powf(s)) }).collect();
        let f = fit_slope(&pairs).unwrap();
        prop_assert!((f.slope - s).abs() < 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec((1u32..200, 1usize..1_000_000, prop::array::uniform3(1e-12f64..10.0)), 0..6)) {
        let rows: Vec<ErrorRow> = rows.into_iter().map(|(n, dofs, e)| ErrorRow {
            delta: 1.0 / n as f64, dofs, l2: [e[0], e[1], e[2], f64::NAN], h1: [0.0; 4], seconds: 0.0,
        }).collect();
        let back = parse_csv(&write_csv(&rows)).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (b, r) in back.iter().zip(&rows) {
            prop_assert_eq!(b.0, r.delta);
            prop_assert_eq!(b.1, r.dofs);
            prop_assert_eq!(&b.2[..3], &r.l2[..3]);
            prop_assert!(b.2[3].is_nan());
        }
    }

    #[test]
    fn fractions_parse(a in 1u32..1000, b in 1u32..1000) {
        let v = parse_number(&format!("{a}/{b}")).unwrap();
        prop_assert_eq!(v, a as f64 / b as f64);
        let w = parse_number(&format!("{a}pi")).unwrap();
        prop_assert!((w - a as f64 * PI).abs() < 1e-12 * w);
    }

    #[test]
    fn wronskian_holds(nu in 0.0f64..2.5, x in 0.05f64..100.0) {
        let (j, y, jp, yp) = bessel_jy_d(nu, x).unwrap();
        let w = 2.0 / (PI * x);
        prop_assert!((j * yp - jp * y - w).abs() <= 1e-12 * w, "nu={} x={}", nu, x);
    }

    #[test]
    fn recurrence_holds(nu in 0.5f64..2.5, x in 0.5f64..60.0) {
        // J_{ν−1} + J_{ν+1} = (2ν/x) J_ν
        let (jm, ym) = bessel_jy(nu - 1.0, x).unwrap();
        let (j0, y0) = bessel_jy(nu, x).unwrap();
        let (jp, yp) = bessel_jy(nu + 1.0, x).unwrap();
        let sj = jm.abs() + jp.abs() + (2.0 * nu / x * j0).abs();
        let sy = ym.abs() + yp.abs() + (2.0 * nu / x * y0).abs();
        prop_assert!((jm + jp - 2.0 * nu / x * j0).abs() <= 1e-11 * sj);
        prop_assert!((ym + yp - 2.0 * nu / x * y0).abs() <= 1e-11 * sy);
    }

    #[test]
    fn cutoffs_are_steps(t in -3.0f64..3.0, quintic in any::<bool>()) {
        let c = if quintic { CutoffSpec::Quintic } else { CutoffSpec::Smooth };
        let v = c.chi(t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, c.chi(-t));
        if t.abs() <= 1.0 { prop_assert_eq!(v, 0.0); }
        if t.abs() >= 2.0 { prop_assert_eq!(v, 1.0); }
        prop_assert!(c.chi(t.abs() + 0.01) >= v - 1e-15);
    }

    #[test]
    fn exponents_follow_the_angle(theta in (1.05f64..1.95).prop_map(|f| f * PI)) {
        let e = SingularExponents::new(theta).unwrap();
        prop_assert!((e.lambda - PI / theta).abs() < 1e-15);
        for n in 1..=3 {
            prop_assert!((e.lambda_n(n) - n as f64 * PI / theta).abs() < 1e-14);
        }
    }

    #[test]
    fn meshes_cover_and_round_trip(w in 0.5f64..2.0, h in 0.5f64..2.0, size in 0.1f64..0.4) {
        let mut g = GeometrySpec::default();
        g.add_loop(&[[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]], &[Tag::GammaN; 4]);
        let m = triangulate(&g, size, Grading::none()).unwrap();
        prop_assert!((m.area() - w * h).abs() < 1e-10 * w * h);
        prop_assert!(m.min_angle_deg() > 20.0);
        prop_assert_eq!(m.components(), 1);
        let back = Mesh::parse(&m.write_string()).unwrap();
        prop_assert_eq!(back.nodes.len(), m.nodes.len());
        prop_assert_eq!(back.elements, m.elements);
    }
}
