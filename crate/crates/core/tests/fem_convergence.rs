use std::sync::Arc;

use thinwall::cascade::{interface_dof_pairs, project_on_gamma};
use thinwall::fem::{assemble, solve_problem, Constraints, Field, InterfaceLoad, Problem, Robin, Space};
use thinwall::geometry::{triangulate, GeometrySpec, Grading, Tag};
use thinwall::C64;

const A: f64 = 2.0;
const B: f64 = -1.5;
const K: f64 = 3.0;

fn exact(x: [f64; 2]) -> (C64, [C64; 2]) {
    let u = C64::new(0.0, A * x[0] + B * x[1]).exp();
    let i = C64::new(0.0, 1.0);
    (u, [i * A * u, i * B * u])
}

fn square() -> GeometrySpec {
    let mut g = GeometrySpec::default();
    g.add_loop(
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[Tag::GammaN, Tag::GammaR_plus, Tag::Truncation, Tag::GammaR_minus],
    );
    g
}

pub fn solve(h: f64, p: usize) -> (f64, f64, f64) {
    let mesh = Arc::new(triangulate(&square(), h, Grading::none()).unwrap());
    let space = Arc::new(Space::new(mesh, p));
    let k2 = |_: [f64; 2]| C64::new(K * K, 0.0);
    let f = |x: [f64; 2]| exact(x).0 * (A * A + B * B - K * K);
    let ik = C64::new(0.0, K);
    let robin_g = |x: [f64; 2], n: [f64; 2]| {
        let (u, g) = exact(x);
        g[0] * n[0] + g[1] * n[1] - ik * u
    };
    let neu = |x: [f64; 2], n: [f64; 2]| {
        let (_, g) = exact(x);
        g[0] * n[0] + g[1] * n[1]
    };
    let mut prob = Problem::new(&k2);
    prob.f = Some(&f);
    prob.robin.push(Robin { tag: Tag::GammaR_plus, alpha: -ik, g: Some(&robin_g) });
    prob.neumann.push((Tag::GammaN, &neu));
    prob.neumann.push((Tag::Truncation, &neu));
    let mut cons = Constraints::default();
    for d in space.boundary_dofs(Tag::GammaR_minus) {
        cons.fix(d, exact(space.dof_xy[d]).0);
    }
    let (u, res) = solve_problem(&space, &prob, &cons).unwrap();
    let (l2, h1) = u.error_norms(&|_, x| exact(x), &|_| true);
    (l2, h1, res)
}

#[test]
fn manufactured_rates() {
    for p in 1..=3 {
        let (e1, g1, r1) = solve(0.1, p);
        let (e2, g2, r2) = solve(0.05, p);
        let rate = (e1 / e2).log2();
        let grate = (g1 / g2).log2();
        println!("p={p} L2 {e1:.3e} {e2:.3e} rate {rate:.2}  H1 rate {grate:.2} res {r1:.1e} {r2:.1e}");
        assert!(r1 < 1e-10 && r2 < 1e-10);
        assert!((rate - (p as f64 + 1.0)).abs() <= 0.2, "L2 rate {rate} for p={p}");
        assert!((grate - p as f64).abs() <= 0.2, "H1 rate {grate} for p={p}");
    }
}

// Two-sided plane wave u± = a± e^{i(αx₁ + βx₂)} across the slit y = 0 of (0,1)×(−1,1).
const AL: f64 = 1.8;
const BE: f64 = 2.4;
const KT: f64 = 3.0;
const A_TOP: f64 = 1.0;
const A_BOT: f64 = 2.0;

fn two_sided(x: [f64; 2], top: bool) -> (C64, [C64; 2]) {
    let a = if top { A_TOP } else { A_BOT };
    let u = a * C64::new(0.0, AL * x[0] + BE * x[1]).exp();
    let i = C64::new(0.0, 1.0);
    (u, [i * AL * u, i * BE * u])
}

fn slit_square(h: f64) -> Arc<thinwall::geometry::Mesh> {
    let mut g = GeometrySpec::default();
    let ids = g.add_loop(
        &[[0.0, -1.0], [1.0, -1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]],
        &[Tag::GammaR_minus, Tag::GammaN, Tag::GammaN, Tag::GammaR_plus, Tag::GammaN, Tag::GammaN],
    );
    g.add_segment(ids[5], ids[2], Tag::Interface);
    let mut m = triangulate(&g, h, Grading::none()).unwrap();
    m.split_interface(0.0).unwrap();
    Arc::new(m)
}

pub fn solve_jump(h: f64, p: usize) -> (f64, f64) {
    let space = Arc::new(Space::new(slit_square(h), p));
    let k2 = |_: [f64; 2]| C64::new(KT * KT, 0.0);
    let ik = C64::new(0.0, KT);
    // boundary quadrature points never sit on y = 0, so the side follows from x₂
    let robin_g = |x: [f64; 2], n: [f64; 2]| {
        let (u, g) = two_sided(x, x[1] > 0.0);
        g[0] * n[0] + g[1] * n[1] - ik * u
    };
    let neu = |x: [f64; 2], n: [f64; 2]| {
        let (_, g) = two_sided(x, x[1] > 0.0);
        g[0] * n[0] + g[1] * n[1]
    };
    // [∂₂u] = h0 − ∂₁h1 with a flux part vanishing at the ends of Γ
    let h1 = |x: [f64; 2]| C64::new(0.3 * (std::f64::consts::PI * x[0]).sin(), 0.0);
    let h0 = |x: [f64; 2]| {
        let jump = two_sided(x, true).1[1] - two_sided(x, false).1[1];
        jump + 0.3 * std::f64::consts::PI * (std::f64::consts::PI * x[0]).cos()
    };
    let mut prob = Problem::new(&k2);
    prob.robin.push(Robin { tag: Tag::GammaR_plus, alpha: -ik, g: Some(&robin_g) });
    prob.robin.push(Robin { tag: Tag::GammaR_minus, alpha: -ik, g: Some(&robin_g) });
    prob.neumann.push((Tag::GammaN, &neu));
    prob.interface = Some(InterfaceLoad { h0: &h0, h1: Some(&h1) });
    let g = |x1: f64| two_sided([x1, 0.0], true).0 - two_sided([x1, 0.0], false).0;
    let jump: std::collections::HashMap<usize, C64> = project_on_gamma(&space, &g).unwrap().into_iter().collect();
    let mut cons = Constraints::default();
    for (t, b) in interface_dof_pairs(&space).unwrap() {
        cons.link(b, t, -jump[&t]);
    }
    let sys = assemble(&space, &prob, &cons).unwrap();
    let (x, res) = sys.solve_raw().unwrap();
    let u = Field::new(space.clone(), sys.dofmap.expand(&x));
    let mesh = space.mesh.clone();
    let (l2, _) = u.error_norms(
        &|k, x| {
            let e = mesh.elements[k];
            let cy = (mesh.nodes[e[0]][1] + mesh.nodes[e[1]][1] + mesh.nodes[e[2]][1]) / 3.0;
            two_sided(x, cy > 0.0)
        },
        &|_| true,
    );
    (l2, res)
}

#[test]
fn manufactured_transmission_rates() {
    for p in 1..=3 {
        let (e1, r1) = solve_jump(0.1, p);
        let (e2, r2) = solve_jump(0.05, p);
        let rate = (e1 / e2).log2();
        println!("p={p} jump problem L2 {e1:.3e} {e2:.3e} rate {rate:.2} res {r1:.1e} {r2:.1e}");
        assert!(r1 < 1e-10 && r2 < 1e-10);
        assert!((rate - (p as f64 + 1.0)).abs() <= 0.2, "L2 rate {rate} for p={p}");
    }
}
