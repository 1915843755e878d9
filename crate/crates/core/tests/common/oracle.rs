//! Reference computations that share no code with the library.

use std::collections::BTreeSet;

/// Cycle-bearing strongly connected classes from the transitive closure,
/// each sorted, ordered by smallest member. Vertices are `1..=n`.
pub fn cyclic_classes(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a - 1][b - 1] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for i in 0..n {
        if !reach[i][i] || seen.contains(&i) {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        seen.extend(class.iter().copied());
        out.push(class.into_iter().map(|v| v + 1).collect());
    }
    out
}

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

/// Monic characteristic polynomial, highest degree first, from sums of
/// principal minors.
pub fn char_poly_minors(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| a[i][j]).collect())
            .collect();
        let k = idx.len();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[k] += sign * det(sub);
    }
    c
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C(
            (self.0 * o.0 + self.1 * o.1) / d,
            (self.1 * o.0 - self.0 * o.1) / d,
        )
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// All complex roots of a monic polynomial (highest degree first) by
/// Durand–Kerner iteration.
pub fn roots(c: &[f64]) -> Vec<(f64, f64)> {
    let n = c.len() - 1;
    let eval = |z: C| {
        c.iter()
            .fold(C(0.0, 0.0), |acc, &k| acc.mul(z).add(C(k, 0.0)))
    };
    let bound = 1.0 + c[1..].iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let mut z: Vec<C> = (0..n)
        .map(|k| {
            let th = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            C(bound * 0.5 * th.cos(), bound * 0.5 * th.sin())
        })
        .collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = C(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den = den.mul(z[i].sub(z[j]));
                }
            }
            let step = eval(z[i]).div(den);
            z[i] = z[i].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z.into_iter().map(|w| (w.0, w.1)).collect()
}

/// Largest root modulus of the characteristic polynomial.
pub fn radius_by_roots(a: &[Vec<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    roots(&char_poly_minors(a))
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

/// Both sides of the box-count sandwich for one ladder point:
/// `(1/2)(O + |J|)/ε <= N <= (O + 2|J|)/ε`.
pub fn sandwich(osc: f64, len: f64, eps: f64) -> (f64, f64) {
    (0.5 * (osc + len) / eps, (osc + 2.0 * len) / eps)
}
