/// Lagrange element of degree p on the principal lattice.
#[derive(Clone, Debug)]
pub struct Lagrange {
    pub p: usize,
    /// Barycentric multi-indices (i0, i1, i2), sum p; ordered vertices, edges, interior.
    pub nodes: Vec<[usize; 3]>,
}

/// Where a local node sits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeKind {
    Vertex(usize),
    /// Edge k joins local vertices (k, k+1 mod 3); `s` counts lattice steps from vertex k.
    Edge { k: usize, s: usize },
    Interior(usize),
}

impl Lagrange {
    pub fn new(p: usize) -> Self {
        assert!((1..=3).contains(&p), "degree must be 1, 2 or 3");
        let mut nodes = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            for s in 1..p {
                let mut m = [0; 3];
                m[a] = p - s;
                m[b] = s;
                nodes.push(m);
            }
        }
        for i in 1..p {
            for j in 1..p {
                if i + j < p {
                    nodes.push([p - i - j, i, j]);
                }
            }
        }
        Lagrange { p, nodes }
    }

    pub fn ndof(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        let p = self.p;
        if i < 3 {
            NodeKind::Vertex(i)
        } else if i < 3 + 3 * (p - 1) {
            let j = i - 3;
            NodeKind::Edge { k: j / (p - 1), s: j % (p - 1) + 1 }
        } else {
            NodeKind::Interior(i - 3 - 3 * (p - 1))
        }
    }

    fn factor(&self, m: usize, l: f64) -> (f64, f64) {
        // Π_{q<m} (p l − q)/(q+1) and its derivative in l
        let p = self.p as f64;
        let mut val = 1.0;
        let mut der = 0.0;
        for q in 0..m {
            let f = (p * l - q as f64) / (q as f64 + 1.0);
            let df = p / (q as f64 + 1.0);
            der = der * f + val * df;
            val *= f;
        }
        (val, der)
    }

    /// Values and barycentric derivatives at barycentric point l.
    pub fn eval(&self, l: [f64; 3], vals: &mut [f64], dl: &mut [[f64; 3]]) {
        for (k, m) in self.nodes.iter().enumerate() {
            let f: [(f64, f64); 3] = [self.factor(m[0], l[0]), self.factor(m[1], l[1]), self.factor(m[2], l[2])];
            vals[k] = f[0].0 * f[1].0 * f[2].0;
            dl[k] = [f[0].1 * f[1].0 * f[2].0, f[0].0 * f[1].1 * f[2].0, f[0].0 * f[1].0 * f[2].1];
        }
    }

    /// Barycentric coordinates of the local nodes.
    pub fn node_bary(&self, i: usize) -> [f64; 3] {
        let p = self.p as f64;
        let m = self.nodes[i];
        [m[0] as f64 / p, m[1] as f64 / p, m[2] as f64 / p]
    }
}

/// Affine triangle: barycentric gradients and area.
#[derive(Clone, Copy, Debug)]
pub struct Affine {
    pub x: [[f64; 2]; 3],
    pub area: f64,
    pub grad_l: [[f64; 2]; 3],
}

impl Affine {
    pub fn new(x: [[f64; 2]; 3]) -> Self {
        let det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[1][1] - x[0][1]) * (x[2][0] - x[0][0]);
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            g[i] = [(x[j][1] - x[k][1]) / det, (x[k][0] - x[j][0]) / det];
        }
        Affine { x, area: 0.5 * det, grad_l: g }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        [
            l[0] * self.x[0][0] + l[1] * self.x[1][0] + l[2] * self.x[2][0],
            l[0] * self.x[0][1] + l[1] * self.x[1][1] + l[2] * self.x[2][1],
        ]
    }

    pub fn bary(&self, p: [f64; 2]) -> [f64; 3] {
        let l1 = self.grad_l[1][0] * (p[0] - self.x[0][0]) + self.grad_l[1][1] * (p[1] - self.x[0][1]);
        let l2 = self.grad_l[2][0] * (p[0] - self.x[0][0]) + self.grad_l[2][1] * (p[1] - self.x[0][1]);
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn grad(&self, dl: &[f64; 3]) -> [f64; 2] {
        [
            dl[0] * self.grad_l[0][0] + dl[1] * self.grad_l[1][0] + dl[2] * self.grad_l[2][0],
            dl[0] * self.grad_l[0][1] + dl[1] * self.grad_l[1][1] + dl[2] * self.grad_l[2][1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property() {
        for p in 1..=3 {
            let e = Lagrange::new(p);
            assert_eq!(e.ndof(), (p + 1) * (p + 2) / 2);
            let n = e.ndof();
            let mut v = vec![0.0; n];
            let mut d = vec![[0.0; 3]; n];
            for i in 0..n {
                e.eval(e.node_bary(i), &mut v, &mut d);
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v[j] - want).abs() < 1e-13);
                }
            }
            // partition of unity
            e.eval([0.2, 0.3, 0.5], &mut v, &mut d);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }
}
