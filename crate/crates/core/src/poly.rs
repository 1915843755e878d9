//! Real polynomials with exact-as-possible range and total variation on intervals.
//!
//! Extremes of a polynomial on a closed interval sit at the endpoints or at real
//! roots of the derivative. Roots are isolated recursively: the critical points of
//! `p'` split the interval into pieces on which `p'` is monotone, and each piece
//! holds at most one root, located by bisection.

use crate::error::{Error, Result};
use crate::rational::Interval;

pub const DEFAULT_DEGREE_CAP: usize = 8;

const ROOT_TOL: f64 = 1e-12;

/// Polynomial with binary64 coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        Self::with_cap(coeffs, DEFAULT_DEGREE_CAP)
    }

    pub fn with_cap(mut coeffs: Vec<f64>, cap: usize) -> Result<Self> {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let p = Polynomial { coeffs };
        if p.degree() > cap {
            return Err(Error::DegreeAboveCap {
                degree: p.degree(),
                cap,
            });
        }
        Ok(p)
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c]).expect("constant is within any cap")
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial {
            coeffs: derivative(&self.coeffs),
        }
    }

    /// Sorted real roots of `p'` strictly inside `(a, b)`.
    pub fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        let d = derivative(&self.coeffs);
        roots_in(&d, a, b)
            .into_iter()
            .filter(|&x| x > a && x < b)
            .collect()
    }

    /// Signed range `(min, max)` of the polynomial over `j`.
    pub fn range(&self, j: &Interval) -> (f64, f64) {
        let (a, b) = j.to_f64();
        self.range_f64(a, b)
    }

    pub fn range_f64(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        if self.degree() >= 2 {
            for x in self.critical_points(a, b) {
                let v = self.eval(x);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Range `(min, max)` of `|p|` over `j`, derived from the signed range.
    pub fn abs_range(&self, j: &Interval) -> (f64, f64) {
        abs_of_range(self.range(j))
    }

    /// Total variation over `j` by monotone decomposition.
    pub fn variation(&self, j: &Interval) -> f64 {
        let (a, b) = j.to_f64();
        self.variation_f64(a, b)
    }

    pub fn variation_f64(&self, a: f64, b: f64) -> f64 {
        if self.degree() == 0 || a == b {
            return 0.0;
        }
        let mut knots = vec![a];
        if self.degree() >= 2 {
            knots.extend(self.critical_points(a, b));
        }
        knots.push(b);
        knots
            .windows(2)
            .map(|w| (self.eval(w[1]) - self.eval(w[0])).abs())
            .sum()
    }
}

pub fn poly_range(p: &Polynomial, j: &Interval) -> (f64, f64) {
    p.range(j)
}

pub fn poly_variation(p: &Polynomial, j: &Interval) -> f64 {
    p.variation(j)
}

pub fn abs_of_range((lo, hi): (f64, f64)) -> (f64, f64) {
    if lo >= 0.0 {
        (lo, hi)
    } else if hi <= 0.0 {
        (-hi, -lo)
    } else {
        (0.0, (-lo).max(hi))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Real roots of `p` in `[a, b]`, sorted.
fn roots_in(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut p = p.to_vec();
    while p.last() == Some(&0.0) {
        p.pop();
    }
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let x = -p[0] / p[1];
            if (a..=b).contains(&x) {
                vec![x]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut knots = vec![a];
            knots.extend(
                roots_in(&derivative(&p), a, b)
                    .into_iter()
                    .filter(|&x| x > a && x < b),
            );
            knots.push(b);
            let mut roots: Vec<f64> = Vec::new();
            for w in knots.windows(2) {
                let (u, v) = (w[0], w[1]);
                let (pu, pv) = (horner(&p, u), horner(&p, v));
                if pu == 0.0 {
                    push_distinct(&mut roots, u);
                }
                if pu * pv < 0.0 {
                    push_distinct(&mut roots, bisect(&p, u, v, pu));
                }
            }
            if horner(&p, b) == 0.0 {
                push_distinct(&mut roots, b);
            }
            roots
        }
    }
}

fn push_distinct(roots: &mut Vec<f64>, x: f64) {
    if roots.last().is_none_or(|&last| (x - last).abs() > ROOT_TOL) {
        roots.push(x);
    }
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64, plo: f64) -> f64 {
    let lo_sign = plo.signum();
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pm = horner(p, mid);
        if pm == 0.0 {
            return mid;
        }
        if pm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
