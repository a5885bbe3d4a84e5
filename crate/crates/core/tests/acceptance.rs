//! One PASS/FAIL line per acceptance criterion. Exits 1 if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use thinwall::cascade::{build_expansion, CascadeConfig};
use thinwall::cell::{solve_cell, CellConfig, CutoffSpec, EffectiveConstants};
use thinwall::corner::{regular_profile, SingularExponents};
use thinwall::geometry::{DomainParams, Khat, Side};
use thinwall::harness::study::in_omega_alpha;
use thinwall::harness::{run_study, StudyConfig};
use thinwall::nearfield::{extract_l_with, solve_s, Block, NearFieldConfig};
use thinwall::special::{bessel_jy, bessel_jy_d};

#[allow(dead_code)]
#[path = "fem_convergence.rs"]
mod fem;

type Outcome = thinwall::Result<(bool, String)>;

fn slopes() -> Outcome {
    let r = run_study(&StudyConfig::reference())?;
    let bands = [(0.85, 1.10), (1.20, 1.45), (1.75, 2.05)];
    let mut ok = true;
    let mut msg = Vec::new();
    for (k, (lo, hi)) in bands.iter().enumerate() {
        let s = r.slopes[k].as_ref().map_or(f64::NAN, |f| f.slope);
        ok &= s >= *lo && s <= *hi;
        msg.push(format!("e{k} {s:.3} in [{lo}, {hi}]"));
    }
    for row in &r.rows {
        msg.push(format!("δ=1/{:.0}: {:.3e} {:.3e} {:.3e}", 1.0 / row.delta, row.l2[0], row.l2[1], row.l2[2]));
    }
    if let Some(e) = r.reference_error {
        msg.push(format!("reference error {e:.2e}"));
    }
    Ok((ok, msg.join("; ")))
}

fn transparency() -> Outcome {
    let mut p = DomainParams::reference();
    p.hole = None;
    let set = build_expansion(&p, &CascadeConfig::default())?;
    let cmax = set.constants.max_abs();
    let l = set.l_minus_1();
    let lmax = l[0].norm().max(l[1].norm());
    let mut worst: f64 = 0.0;
    let n = 60;
    for i in 0..=n {
        for j in 0..=n / 2 {
            let x = [-p.lp + 2.0 * p.lp * i as f64 / n as f64, -p.hp + (p.h + p.hp) * j as f64 / (n / 2) as f64];
            let inside = x[1] >= 0.0 || x[0].abs() <= p.bottom_half_width();
            if !inside || x[1] == 0.0 || !in_omega_alpha(&p, 0.25, x) {
                continue;
            }
            let u = set.terms_at(x)?[0].0;
            for delta in [1.0 / 8.0, 1.0 / 64.0] {
                worst = worst.max((set.truncation_sample(2, x, delta)?.0 - u).norm());
            }
        }
    }
    let ok = cmax <= 1e-8 && lmax == 0.0 && worst <= 1e-9;
    Ok((ok, format!("max constant {cmax:.1e}, |L-1| {lmax:.1e}, |trunc2 - u00| {worst:.1e}")))
}

fn reference_cell(cfg: &CellConfig) -> thinwall::Result<EffectiveConstants> {
    let p = DomainParams::reference();
    Ok(solve_cell(p.hole.as_ref(), &Khat::Constant, p.k0, cfg)?.constants)
}

fn symmetry() -> Outcome {
    let c = reference_cell(&CellConfig::default())?;
    let scale = c.d2.norm().max(c.n2.norm());
    let (a, b) = (c.d1.norm() / scale, c.n3.norm() / scale);
    Ok((a <= 1e-6 && b <= 1e-6, format!("|D1|/scale {a:.1e}, |N3|/scale {b:.1e}")))
}

fn rel_change(a: &EffectiveConstants, b: &EffectiveConstants) -> f64 {
    let scale = a.d2.norm().max(a.n2.norm());
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| (x - y).norm() / if x.norm() > 1e-6 * scale { x.norm() } else { scale })
        .fold(0.0, f64::max)
}

fn cell_robustness() -> Outcome {
    let base = reference_cell(&CellConfig::default())?;
    let dt = rel_change(&base, &reference_cell(&CellConfig { t: 8.0, ..Default::default() })?);
    let dr = rel_change(&base, &reference_cell(&CellConfig::default().refined())?);
    let q = reference_cell(&CellConfig { cutoff: CutoffSpec::Quintic, ..Default::default() })?;
    let dchi = [(base.d2, q.d2), (base.n1, q.n1), (base.n2, q.n2)]
        .iter()
        .map(|(a, b)| (a - b).norm() / a.norm())
        .fold(0.0, f64::max);
    let ok = dt <= 1e-6 && dr <= 1e-4 && dchi <= 1e-6;
    Ok((ok, format!("T 6->8 {dt:.1e}, refinement {dr:.1e}, cutoff {dchi:.1e}")))
}

fn fem_rates() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for p in 1..=3 {
        let (e1, _, r1) = fem::solve(0.1, p);
        let (e2, _, r2) = fem::solve(0.05, p);
        let (j1, s1) = fem::solve_jump(0.1, p);
        let (j2, s2) = fem::solve_jump(0.05, p);
        let (a, b) = ((e1 / e2).log2(), (j1 / j2).log2());
        let want = p as f64 + 1.0;
        ok &= (a - want).abs() <= 0.2 && (b - want).abs() <= 0.2;
        ok &= [r1, r2, s1, s2].iter().all(|r| *r <= 1e-10);
        msg.push(format!("p={p}: helmholtz {a:.2}, transmission {b:.2}"));
    }
    Ok((ok, msg.join("; ")))
}

fn corner_coefficients() -> Outcome {
    let p = DomainParams::reference();
    let set = build_expansion(&p, &CascadeConfig::default())?;
    let scatter = set.corners.iter().map(|c| c.ell_scatter[1]).fold(0.0, f64::max);

    let e = SingularExponents::new(p.theta)?;
    let cell = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &CellConfig::default())?;
    let cfg = NearFieldConfig::default();
    let near = solve_s(Side::Plus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg)?;
    let far = solve_s(Side::Plus, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &NearFieldConfig { rmax: 40.0, ..cfg })?;
    let drift = (near.l_minus_1() - far.l_minus_1()).norm() / near.l_minus_1().norm();
    let log = near.fit.log_coeff.max(far.fit.log_coeff);

    let mut inject: f64 = 0.0;
    for side in [Side::Plus, Side::Minus] {
        let block = Block::new(&e, &cell.constants, 1, side)?;
        let w = regular_profile(&e, 1, side);
        let s = |x: [f64; 2]| {
            let (r, t) = block.frame.polar(x);
            Some(block.eval(x, None) + w.eval(t, None).0 * (0.37 * r.powf(-e.lambda)))
        };
        let fit = extract_l_with(&s, &block, &e, 1, 20.0)?;
        inject = inject.max((fit.l_minus_1 - 0.37).norm());
    }

    let ok = scatter <= 0.01 && drift <= 0.02 && inject <= 1e-6 && log <= 1e-3;
    Ok((
        ok,
        format!("ell scatter {scatter:.1e}, L-1 Rmax 20->40 {drift:.1e}, injection {inject:.1e}, log {log:.1e}"),
    ))
}

fn bessel() -> Outcome {
    let mut worst: f64 = 0.0;
    for line in include_str!("data/bessel_oracle.csv").lines().filter(|l| !l.starts_with('#') && !l.starts_with("nu")) {
        let c: Vec<&str> = line.split(',').collect();
        let nu = match c[0].split_once('/') {
            Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
            None => c[0].parse().unwrap(),
        };
        let x: f64 = c[1].parse().unwrap();
        let (j, y) = bessel_jy(nu, x)?;
        let (jr, yr): (f64, f64) = (c[2].parse().unwrap(), c[3].parse().unwrap());
        worst = worst.max(((j - jr) / jr).abs()).max(((y - yr) / yr).abs());
    }
    let mut wr: f64 = 0.0;
    for nu in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 4.0 / 3.0, 2.0] {
        for x in [0.1, 1.0, 7.5, 40.0] {
            let (j, y, jp, yp) = bessel_jy_d(nu, x)?;
            let w = 2.0 / (PI * x);
            wr = wr.max((j * yp - jp * y - w).abs() / w);
        }
    }
    Ok((worst <= 1e-12 && wr <= 1e-12, format!("oracle rel {worst:.1e}, wronskian rel {wr:.1e}")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("convergence slopes", slopes),
        ("transparency", transparency),
        ("symmetric hole", symmetry),
        ("cell robustness", cell_robustness),
        ("fem manufactured rates", fem_rates),
        ("corner coefficients", corner_coefficients),
        ("bessel accuracy", bessel),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("criterion {} {name}: {} ({detail}) [{:.0} s]", i + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
