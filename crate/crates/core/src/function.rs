//! Grid solution of the fixed-point equation `f(L_n(x)) = S_n(x) f(x) + q_n(x)`,
//! oscillation sums, the error terms of the oscillation recursion, and the
//! infinite-variation certificate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_address_graph, Component};
use crate::partition::PartitionLevel;
use crate::rational::{ceil_int, floor_int, int, to_f64, Interval, Rational};
use crate::scaling::{
    build_matrix, build_matrix_on, power_iteration, spectral_radius, MatrixKind, DEFAULT_TOL,
};
use crate::spec::RfifSpec;

/// Cap on the number of grid intervals `N * Q`.
pub const MAX_SAMPLES: usize = 1_000_000;

/// Default refinement `Q = N * T^8`, reduced by factors of `T` until `N * Q`
/// fits under [`MAX_SAMPLES`].
pub fn default_refinement(n_maps: usize, t_max: u64) -> usize {
    let t = t_max.max(2) as usize;
    let mut q = n_maps * t.pow(8);
    while n_maps * q > MAX_SAMPLES && q.is_multiple_of(t) && q > 1 {
        q /= t;
    }
    q
}

/// Grid samples of the fixed point on `x_0 + m h`, `m = 0..=N*Q`.
#[derive(Clone, Debug)]
pub struct SampledRfif {
    pub x0: Rational,
    pub h: Rational,
    pub n_maps: usize,
    pub q: usize,
    pub values: Vec<f64>,
    /// Bound on the distance to the fixed point of the discretized operator.
    pub sup_error: f64,
    /// Estimated extra error from linear interpolation at off-grid pullbacks;
    /// zero when every pullback lands on the grid.
    pub interpolation_term: f64,
    pub iterations: usize,
    pub beta: f64,
}

impl SampledRfif {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_at(&self, m: usize) -> f64 {
        to_f64(&(self.x0 + self.h * int(m as i128)))
    }

    /// Sample at node `x_n`.
    pub fn node_value(&self, n: usize) -> f64 {
        self.values[n * self.q]
    }

    /// Total error budget per sample.
    pub fn error_budget(&self) -> f64 {
        self.sup_error + self.interpolation_term
    }

    /// `(x - x_0) / h`.
    pub fn position(&self, x: &Rational) -> Rational {
        (x - self.x0) / self.h
    }

    /// Linear interpolation at a rational grid position.
    pub fn value_at_position(&self, pos: &Rational) -> f64 {
        let b = floor_int(pos).clamp(0, self.values.len() as i128 - 1) as usize;
        let frac = to_f64(&(pos - int(b as i128)));
        if frac == 0.0 || b + 1 >= self.values.len() {
            self.values[b]
        } else {
            self.values[b] + frac * (self.values[b + 1] - self.values[b])
        }
    }

    pub fn value_at(&self, x: &Rational) -> f64 {
        self.value_at_position(&self.position(x))
    }

    /// `(min, max)` of the samples inside the closed piece `[s, e]` (grid
    /// positions), plus interpolated values at non-grid ends. `None` when
    /// fewer than two samples fall inside.
    pub fn piece_range(&self, s: &Rational, e: &Rational) -> Option<(f64, f64)> {
        let first = ceil_int(s).max(0);
        let last = floor_int(e).min(self.values.len() as i128 - 1);
        if last < first + 1 {
            return None;
        }
        let slice = &self.values[first as usize..=last as usize];
        let (mut lo, mut hi) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        for end in [s, e] {
            if !end.is_integer() {
                let v = self.value_at_position(end);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Some((lo, hi))
    }

    /// Grid positions of `pieces` equal subdivisions of `j`.
    pub(crate) fn piece_bounds(&self, j: &Interval, pieces: usize) -> (Rational, Rational) {
        let a = self.position(&j.lo);
        let w = (self.position(&j.hi) - a) / int(pieces as i128);
        (a, w)
    }
}

/// Solves the fixed-point equation on the grid of step `(x_N - x_0)/(N Q)`.
pub fn solve_rfif(spec: &RfifSpec, q: usize, tol: f64, max_iters: usize) -> Result<SampledRfif> {
    let beta = spec.beta();
    if beta >= 1.0 {
        return Err(Error::NotContractive { beta });
    }
    if q == 0 || tol <= 0.0 {
        return Err(Error::Resolution(
            "refinement and tolerance must be positive".into(),
        ));
    }
    let n_maps = spec.n_maps();
    let total = n_maps * q;
    let x0 = spec.x(0);
    let h = spec.span().len() / int(total as i128);

    // Pullback of every grid point: base index, fractional weight, S and q values.
    struct Pull {
        base: usize,
        frac: f64,
        s: f64,
        q: f64,
    }
    let pulls: Vec<Pull> = (0..=total)
        .into_par_iter()
        .map(|m| {
            let n = if m == 0 { 1 } else { m.div_ceil(q) };
            let map = spec.map(n);
            let u = x0 + h * int(m as i128);
            let x = map.l.inverse().apply(&u);
            let pos = (x - x0) / h;
            let base = floor_int(&pos) as usize;
            let frac = to_f64(&(pos - int(base as i128)));
            let xf = to_f64(&x);
            Pull {
                base: base.min(total),
                frac,
                s: map.s.eval(xf),
                q: map.q.eval(xf),
            }
        })
        .collect();

    let mut values: Vec<f64> = (0..=total)
        .map(|m| {
            let n = if m == 0 { 1 } else { m.div_ceil(q) };
            let t = (m - (n - 1) * q) as f64 / q as f64;
            spec.y(n - 1) + t * (spec.y(n) - spec.y(n - 1))
        })
        .collect();

    let stop = if beta == 0.0 {
        f64::INFINITY
    } else {
        tol * (1.0 - beta) / beta
    };
    let sample = |g: &[f64], p: &Pull| {
        let v = if p.frac == 0.0 {
            g[p.base]
        } else {
            g[p.base] + p.frac * (g[p.base + 1] - g[p.base])
        };
        p.s * v + p.q
    };
    for it in 1..=max_iters {
        let next: Vec<f64> = pulls.par_iter().map(|p| sample(&values, p)).collect();
        let change = next
            .par_iter()
            .zip(values.par_iter())
            .map(|(a, b)| (a - b).abs())
            .reduce(|| 0.0, f64::max);
        values = next;
        if change <= stop {
            let interp = pulls
                .iter()
                .filter(|p| p.frac != 0.0)
                .map(|p| p.s.abs() * (values[p.base + 1] - values[p.base]).abs())
                .fold(0.0, f64::max)
                / (1.0 - beta);
            return Ok(SampledRfif {
                x0,
                h,
                n_maps,
                q,
                values,
                sup_error: change * beta / (1.0 - beta),
                interpolation_term: interp,
                iterations: it,
                beta,
            });
        }
        if it == max_iters {
            return Err(Error::FixedPointDiverged {
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::FixedPointDiverged {
        iterations: 0,
        last_change: f64::NAN,
    })
}

/// Per-map bounds `α_n >= sup_{I_n} |f|` from the system
/// `α_n = sup_{D_n}|S_n| · max_{I_j ⊆ D_n} α_j + sup_{D_n}|q_n|`,
/// iterated downward from the global contraction bound.
pub fn per_map_sup_bounds(spec: &RfifSpec) -> Result<Vec<f64>> {
    let beta = spec.beta();
    if beta >= 1.0 {
        return Err(Error::NotContractive { beta });
    }
    let n = spec.n_maps();
    let g = build_address_graph(spec);
    let s: Vec<f64> = (1..=n).map(|i| spec.s_sup(i)).collect();
    let qs: Vec<f64> = (1..=n).map(|i| spec.q_sup(i)).collect();
    let global = qs.iter().copied().fold(0.0, f64::max) / (1.0 - beta);
    let mut alpha = vec![global; n];
    for _ in 0..10_000 {
        let next: Vec<f64> = (1..=n)
            .map(|i| {
                let m = g
                    .predecessors(i)
                    .iter()
                    .map(|&j| alpha[j - 1])
                    .fold(0.0, f64::max);
                (s[i - 1] * m + qs[i - 1]).min(alpha[i - 1])
            })
            .collect();
        let done = next
            .iter()
            .zip(&alpha)
            .all(|(a, b)| (a - b).abs() <= 1e-15 * b.abs());
        alpha = next;
        if done {
            break;
        }
    }
    Ok(alpha)
}

/// Upper bound for `sup |f|` over the whole span.
pub fn sup_bound(spec: &RfifSpec) -> Result<f64> {
    Ok(per_map_sup_bounds(spec)?.into_iter().fold(0.0, f64::max))
}

/// Upper bound for `sup |f|` over the union of the given map intervals.
pub fn sup_bound_on(spec: &RfifSpec, maps: &[usize]) -> Result<f64> {
    let alpha = per_map_sup_bounds(spec)?;
    Ok(maps.iter().map(|&n| alpha[n - 1]).fold(0.0, f64::max))
}

/// `O_{r,p}(f, J)`: sum of oscillations over `T^p` equal pieces of `J`.
pub fn oscillation_sum(f: &SampledRfif, t: u64, p: usize, j: &Interval) -> Result<f64> {
    let pieces = (t as usize).pow(p as u32);
    let (a, w) = f.piece_bounds(j, pieces);
    let mut total = 0.0;
    let mut s = a;
    for _ in 0..pieces {
        let e = s + w;
        let (lo, hi) = f.piece_range(&s, &e).ok_or_else(|| {
            Error::Resolution(format!(
                "{pieces} pieces of {j} leave fewer than 2 samples per piece"
            ))
        })?;
        total += hi - lo;
        s = e;
    }
    Ok(total)
}

/// `O_{r,p}(f, ·)` summed over the maximal runs of a union of intervals.
pub fn oscillation_sum_union(f: &SampledRfif, t: u64, p: usize, runs: &[Interval]) -> Result<f64> {
    runs.iter().map(|j| oscillation_sum(f, t, p, j)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationVector {
    pub component: usize,
    pub k: usize,
    pub p: usize,
    /// Indices of `Θ_k`.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl OscillationVector {
    pub fn norm1(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `V(f, r, k, p)` over `Θ_k` and `Ṽ(f, r, k, p)`, whose entry `i` sums
/// `O_{r,p}` over the children of `I^k_i` dropped at level `k + 1`.
pub fn oscillation_vector(
    f: &SampledRfif,
    levels: &[PartitionLevel],
    k: usize,
    p: usize,
) -> Result<(OscillationVector, OscillationVector)> {
    let level = &levels[k - 1];
    let next = levels.get(k);
    let t = level.grid.t;
    let v = level
        .theta
        .par_iter()
        .map(|&i| oscillation_sum(f, t, p, &level.interval(i)))
        .collect::<Result<Vec<f64>>>()?;
    let grid = &level.grid;
    let vt = level
        .theta
        .par_iter()
        .map(|&i| {
            level
                .children(i)
                .filter(|&c| !next.map_or_else(|| child_survives(level, c), |n| n.is_survivor(c)))
                .map(|c| oscillation_sum(f, t, p, &grid.cell(k + 1, c)))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    let wrap = |values| OscillationVector {
        component: level.component(),
        k,
        p,
        indices: level.theta.clone(),
        values,
    };
    Ok((wrap(v), wrap(vt)))
}

fn child_survives(level: &PartitionLevel, c: usize) -> bool {
    let grid = &level.grid;
    grid.locate(level.k, &grid.preimage(level.k + 1, c))
        .is_some_and(|j| level.is_survivor(j))
}

/// Right side of the `‖ξ_{r,k}‖₁` bound:
/// `Σ_{n ∈ Λ_r} 2 M Var(S_n, D_n) + Var(q_n, D_n)`.
pub fn xi_bound(spec: &RfifSpec, f_bound: f64, comp: &Component) -> f64 {
    comp.members
        .iter()
        .map(|&n| {
            let d = spec.domain(n);
            let m = spec.map(n);
            2.0 * f_bound * m.s.variation(&d) + m.q.variation(&d)
        })
        .sum()
}

/// `ξ_{r,k,i} = 2 M Var(S_n, D^k_i) + Var(q_n, D^k_i)` over `Θ_k`.
pub fn xi_entries(spec: &RfifSpec, f_bound: f64, level: &PartitionLevel) -> Vec<f64> {
    level
        .theta
        .iter()
        .map(|&i| {
            let d = level.preimage(i);
            let m = spec.map(level.owner(i));
            2.0 * f_bound * m.s.variation(&d) + m.q.variation(&d)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationStatus {
    CertifiedInfinite,
    RefutedFinite,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateRoute {
    /// Column sums of the lower matrix exceed one.
    ColumnSum,
    /// Left Perron vector of the lower matrix as weights.
    PerronWeighted,
    /// Infinite variation carried in from an upstream vertex.
    Transfer,
    /// Upper recursion contracts, so the oscillation sums stay bounded.
    BoundedUpper,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateResult {
    pub status: VariationStatus,
    pub route: CertificateRoute,
    pub k: usize,
    pub column_min: f64,
    pub xi_norm: f64,
    pub threshold: f64,
    pub witness_p: Option<usize>,
    pub witness_value: Option<f64>,
    pub v_tilde_vanishes: bool,
}

/// Decides `Var(f, B_{r,1})` where the numerics allow.
///
/// Lower route: with `c` the least column sum of `M̲_{r,k}|Θ` and `c > 1`, the
/// recursion gives `‖V(p+1)‖₁ >= c ‖V(p)‖₁ - ‖ξ‖₁`; once a sampled
/// `‖V(p)‖₁` (minus the per-piece sampling error) exceeds `‖ξ‖₁/(c-1)` the sums
/// grow geometrically. If `c <= 1` but `ρ(M̲) > 1`, the left Perron vector
/// supplies weights with the same effect.
///
/// Upper route: if `ρ(M̄_{r,k}) < 1` on all level-`k` cells and every vertex
/// feeding the component has finite variation (`upstream_finite`), the sums stay
/// bounded.
#[allow(clippy::too_many_arguments)]
pub fn variation_certificate(
    spec: &RfifSpec,
    f: &SampledRfif,
    comp: &Component,
    levels: &[PartitionLevel],
    k: usize,
    p_max: usize,
    f_bound: f64,
    upstream_finite: bool,
) -> Result<CertificateResult> {
    let level = &levels[k - 1];
    let lower = build_matrix(spec, levels, k, MatrixKind::Lower)?;
    let c = lower
        .matrix
        .column_sums()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let xi_norm = xi_bound(spec, f_bound, comp);
    let mut result = CertificateResult {
        status: VariationStatus::Unknown,
        route: CertificateRoute::None,
        k,
        column_min: c,
        xi_norm,
        threshold: f64::INFINITY,
        witness_p: None,
        witness_value: None,
        v_tilde_vanishes: true,
    };

    let slack_per_piece = 2.0 * f.error_budget();
    let weighted = if c > 1.0 {
        None
    } else {
        perron_weights(&lower.matrix, &xi_entries(spec, f_bound, level))
    };
    let (weights, threshold, route) = match (c > 1.0, weighted) {
        (true, _) => (
            vec![1.0; level.theta.len()],
            xi_norm / (c - 1.0),
            CertificateRoute::ColumnSum,
        ),
        (false, Some((w, th))) => (w, th, CertificateRoute::PerronWeighted),
        (false, None) => (Vec::new(), f64::INFINITY, CertificateRoute::None),
    };

    if threshold.is_finite() {
        result.threshold = threshold;
        for p in 1..=p_max {
            let (v, vt) = match oscillation_vector(f, levels, k, p) {
                Ok(pair) => pair,
                Err(Error::Resolution(_)) => break,
                Err(e) => return Err(e),
            };
            if vt.values.iter().any(|&x| x > 0.0) {
                result.v_tilde_vanishes = false;
            }
            let pieces = (comp.t as f64).powi(p as i32);
            let weighted_sum: f64 = v.values.iter().zip(&weights).map(|(a, w)| a * w).sum();
            let slack: f64 = weights.iter().map(|w| w * pieces * slack_per_piece).sum();
            if weighted_sum - slack > threshold {
                result.status = VariationStatus::CertifiedInfinite;
                result.route = route;
                result.witness_p = Some(p);
                result.witness_value = Some(weighted_sum);
                return Ok(result);
            }
        }
    }

    if upstream_finite && c <= 1.0 {
        let contracts = [1, k].into_iter().any(|kk| {
            let all: Vec<usize> = (1..=level.grid.cell_count(kk)).collect();
            build_matrix_on(spec, levels, kk, MatrixKind::Upper, &all)
                .ok()
                .and_then(|m| spectral_radius(&m.matrix, DEFAULT_TOL).ok())
                .is_some_and(|rho| rho < 1.0)
        });
        if contracts {
            result.status = VariationStatus::RefutedFinite;
            result.route = CertificateRoute::BoundedUpper;
        }
    }
    Ok(result)
}

/// Left Perron vector `w` (max entry one) of `a` and the weighted threshold
/// `Σ w_i ξ_i / (c_w - 1)` with `c_w = min_j (wᵀa)_j / w_j`; `None` unless
/// `w > 0` and `c_w > 1`.
fn perron_weights(a: &crate::scaling::SparseMatrix, xi: &[f64]) -> Option<(Vec<f64>, f64)> {
    let at = a.transpose();
    let est = power_iteration(&at, 1e-12, 100_000).ok()?;
    if est.value <= 1.0 {
        return None;
    }
    let mut w = vec![1.0; a.order()];
    for _ in 0..100_000 {
        let y = at.mul_vec(&w);
        let m = y.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return None;
        }
        let next: Vec<f64> = y.iter().map(|v| v / m).collect();
        let diff = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        if diff < 1e-13 {
            break;
        }
    }
    if w.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let wa = a.left_mul_vec(&w);
    let cw = wa
        .iter()
        .zip(&w)
        .map(|(a, b)| a / b)
        .fold(f64::INFINITY, f64::min);
    if cw <= 1.0 {
        return None;
    }
    let wxi: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum();
    Some((w, wxi / (cw - 1.0)))
}

/// Checks both sides of the oscillation-vector recursion at depth `p`:
/// `V(p+1) >= M̲ V(p) + Ṽ(p) - ξ` and `V(p+1) <= M̄ V(p) + Ṽ(p) + ξ`, entrywise
/// with slack `1e-6`.
pub fn check_recursion(
    spec: &RfifSpec,
    f: &SampledRfif,
    levels: &[PartitionLevel],
    k: usize,
    p: usize,
    f_bound: f64,
) -> Result<bool> {
    const SLACK: f64 = 1e-6;
    let level = &levels[k - 1];
    let (v, vt) = oscillation_vector(f, levels, k, p)?;
    let (v1, _) = oscillation_vector(f, levels, k, p + 1)?;
    let lower = build_matrix(spec, levels, k, MatrixKind::Lower)?
        .matrix
        .mul_vec(&v.values);
    let upper = build_matrix(spec, levels, k, MatrixKind::Upper)?
        .matrix
        .mul_vec(&v.values);
    let xi = xi_entries(spec, f_bound, level);
    Ok((0..level.theta.len()).all(|i| {
        let lhs = v1.values[i];
        lhs >= lower[i] + vt.values[i] - xi[i] - SLACK
            && lhs <= upper[i] + vt.values[i] + xi[i] + SLACK
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;
    use crate::partition::build_partition;
    use crate::poly::Polynomial;
    use crate::rational::rat;
    use crate::spec::parse_spec;

    const TWO_COMPONENTS: &str = include_str!("../tests/data/two_components.cfg");

    fn example() -> (RfifSpec, Vec<Component>) {
        let spec = parse_spec(TWO_COMPONENTS).unwrap();
        let comps = components(&build_address_graph(&spec), &spec).unwrap();
        (spec, comps)
    }

    #[test]
    fn example_node_values() {
        let (spec, _) = example();
        let f = solve_rfif(&spec, 729, 1e-10, 10_000).unwrap();
        for n in 0..=6 {
            assert!((f.node_value(n) - spec.y(n)).abs() < 1e-9, "node {n}");
        }
        assert_eq!(f.interpolation_term, 0.0);
        assert!(f.sup_error <= 1e-10);
    }

    #[test]
    fn flat_scaling_converges_in_one_sweep() {
        let (mut spec, _) = example();
        for m in &mut spec.maps {
            m.s = Polynomial::zero();
        }
        let f = solve_rfif(&spec, 12, 1e-10, 10).unwrap();
        assert_eq!(f.iterations, 1);
        for m in 0..f.len() {
            let n = if m == 0 { 1 } else { m.div_ceil(12) };
            let u = f.x0 + f.h * int(m as i128);
            let x = spec.map(n).l.inverse().apply(&u);
            assert!((f.values[m] - spec.map(n).q.eval(to_f64(&x))).abs() < 1e-15);
        }
    }

    #[test]
    fn example_sup_bounds() {
        let (spec, comps) = example();
        let b = sup_bound_on(&spec, &comps[1].members).unwrap();
        assert!(b <= 5.0 + 1e-12, "{b}");
        let xi = xi_bound(&spec, b, &comps[1]);
        assert!(xi <= 52.0 / 15.0 + 1e-9, "{xi}");
        let f = solve_rfif(&spec, 729, 1e-10, 10_000).unwrap();
        let global = sup_bound(&spec).unwrap();
        assert!(f.values.iter().all(|v| v.abs() <= global));
    }

    #[test]
    fn sup_bound_degenerate_cases() {
        let (mut spec, _) = example();
        for m in &mut spec.maps {
            m.q = Polynomial::zero();
        }
        assert_eq!(sup_bound(&spec).unwrap(), 0.0);
        let (mut spec, _) = example();
        for m in &mut spec.maps {
            m.s = Polynomial::zero();
        }
        let expected = (1..=6).map(|n| spec.q_sup(n)).fold(0.0, f64::max);
        assert_eq!(sup_bound(&spec).unwrap(), expected);
    }

    #[test]
    fn oscillation_of_linear_and_constant() {
        let (mut spec, _) = example();
        for m in &mut spec.maps {
            m.s = Polynomial::zero();
            m.q = Polynomial::zero();
        }
        let f = solve_rfif(&spec, 27, 1e-10, 10).unwrap();
        let j = Interval::new(rat(2, 3), int(1));
        assert_eq!(oscillation_sum(&f, 2, 3, &j).unwrap(), 0.0);

        let mut lin = f.clone();
        for m in 0..lin.len() {
            lin.values[m] = 2.0 * lin.x_at(m);
        }
        for p in 0..4 {
            let o = oscillation_sum(&lin, 2, p, &j).unwrap();
            assert!((o - 2.0 / 3.0).abs() < 1e-12, "p={p} {o}");
        }
        assert!(matches!(
            oscillation_sum(&lin, 2, 12, &j),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn second_component_vectors() {
        let (spec, comps) = example();
        let f = solve_rfif(&spec, 729, 1e-10, 10_000).unwrap();
        let levels = build_partition(&spec, &comps[1], 3).unwrap();
        let b = Interval::new(rat(2, 3), int(1));
        for p in 1..=3 {
            let (v, vt) = oscillation_vector(&f, &levels, 2, p).unwrap();
            let whole = oscillation_sum(&f, 2, p + 2, &b).unwrap();
            assert!((v.norm1() - whole).abs() < 1e-9);
            assert!(vt.values.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn recursion_holds_on_example() {
        let (spec, comps) = example();
        let f = solve_rfif(&spec, 6 * 6561, 1e-10, 10_000).unwrap();
        let m = sup_bound(&spec).unwrap();
        let levels = build_partition(&spec, &comps[1], 3).unwrap();
        for p in 1..=6 {
            assert!(
                check_recursion(&spec, &f, &levels, 2, p, m).unwrap(),
                "r=2 p={p}"
            );
        }
        let levels = build_partition(&spec, &comps[0], 3).unwrap();
        for p in 1..=4 {
            assert!(
                check_recursion(&spec, &f, &levels, 2, p, m).unwrap(),
                "r=1 p={p}"
            );
        }
    }

    #[test]
    fn default_refinement_respects_cap() {
        assert_eq!(default_refinement(6, 3), 6 * 6561);
        assert!(2 * default_refinement(2, 2) <= MAX_SAMPLES);
        let q = default_refinement(8, 3);
        assert!(8 * q <= MAX_SAMPLES);
    }
}
