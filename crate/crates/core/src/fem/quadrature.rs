/// Gauss-Legendre nodes and weights on (0, 1).
pub fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Collapsed tensor rule on the reference triangle {(s,t): s,t >= 0, s+t <= 1}.
/// Points are (s, t, weight) with weights summing to 1/2; exact to degree 2n - 2.
pub fn triangle_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre01(n);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            out.push((u, v * (1.0 - u), wu * wv * (1.0 - u)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exactness() {
        for n in 1..8 {
            let g = gauss_legendre01(n);
            for d in 0..2 * n {
                let s: f64 = g.iter().map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((s - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_exactness() {
        // ∫ s^a t^b over the reference triangle = a! b! / (a+b+2)!
        let fact = |k: u32| (1..=k).map(|v| v as f64).product::<f64>();
        let q = triangle_rule(5);
        for a in 0..=8u32 {
            for b in 0..=(8 - a) {
                let s: f64 = q.iter().map(|(x, y, w)| w * x.powi(a as i32) * y.powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((s - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }
}
