use std::f64::consts::PI;

use thinwall::special::{bessel_j, bessel_jy, gamma};

fn parse_nu(s: &str) -> f64 {
    match s.split_once('/') {
        Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

#[test]
fn matches_offline_table() {
    let text = include_str!("data/bessel_oracle.csv");
    let mut worst: f64 = 0.0;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("nu")) {
        let c: Vec<&str> = line.split(',').collect();
        let nu = parse_nu(c[0]);
        let x: f64 = c[1].parse().unwrap();
        let (jr, yr): (f64, f64) = (c[2].parse().unwrap(), c[3].parse().unwrap());
        let (j, y) = bessel_jy(nu, x).unwrap();
        let ej = ((j - jr) / jr).abs();
        let ey = ((y - yr) / yr).abs();
        worst = worst.max(ej).max(ey);
        assert!(ej <= 1e-12 && ey <= 1e-12, "nu={} x={x}: J rel {ej:e}, Y rel {ey:e}", c[0]);
    }
    println!("worst relative error {worst:e}");
}

#[test]
fn reflection_identity() {
    // Y_ν = (J_ν cos νπ − J_{−ν}) / sin νπ
    for &nu in &[2.0 / 3.0, 1.0 / 3.0, 0.5] {
        for &x in &[0.3, 1.0, 4.0, 25.0] {
            let (j, y) = bessel_jy(nu, x).unwrap();
            let (jm, _) = bessel_jy(-nu, x).unwrap();
            let rhs = (j * (nu * PI).cos() - jm) / (nu * PI).sin();
            assert!((y - rhs).abs() <= 1e-12 * y.abs().max(1.0), "nu={nu} x={x}");
        }
    }
}

#[test]
fn small_argument_law() {
    let nu = 2.0 / 3.0;
    let mut prev = f64::INFINITY;
    for &x in &[1e-1, 1e-2, 1e-3, 1e-4] {
        let ratio = bessel_j(nu, x) / ((x / 2.0).powf(nu) / gamma(nu + 1.0));
        let dev = (ratio - 1.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-8);
}
