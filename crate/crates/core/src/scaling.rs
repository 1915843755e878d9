//! Restricted vertical scaling matrices and their spectral radii.
//!
//! Rows of a level-`k` matrix have at most `T` nonzeros (the cells inside one
//! preimage), so matrices are stored as sparse rows. Orders reach tens of
//! thousands at the default depth.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Component;
use crate::partition::{build_partition, PartitionLevel};
use crate::spec::RfifSpec;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Upper,
    Lower,
    StarUpper,
    StarLower,
}

impl MatrixKind {
    pub fn is_star(self) -> bool {
        matches!(self, MatrixKind::StarUpper | MatrixKind::StarLower)
    }

    fn takes_max(self) -> bool {
        matches!(self, MatrixKind::Upper | MatrixKind::StarUpper)
    }
}

/// Square nonnegative matrix in row-compressed form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.retain(|&(j, v)| {
                    assert!(j < n, "column out of range");
                    v != 0.0
                });
                r.sort_by_key(|&(j, _)| j);
                r
            })
            .collect();
        SparseMatrix { rows }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        SparseMatrix::from_rows(
            a.iter()
                .map(|row| row.iter().copied().enumerate().collect())
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|p| self.rows[i][p].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.order();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[i][j] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        for row in &self.rows {
            for &(j, v) in row {
                out[j] += v;
            }
        }
        out
    }

    /// `wᵀ A`.
    pub fn left_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j] += w[i] * v;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.order()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        SparseMatrix { rows }
    }

    /// Principal submatrix on the given positions (in the given order).
    pub fn principal(&self, positions: &[usize]) -> SparseMatrix {
        let mut slot = vec![usize::MAX; self.order()];
        for (new, &old) in positions.iter().enumerate() {
            slot[old] = new;
        }
        SparseMatrix {
            rows: positions
                .iter()
                .map(|&i| {
                    let mut r: Vec<(usize, f64)> = self.rows[i]
                        .iter()
                        .filter(|&&(j, _)| slot[j] != usize::MAX)
                        .map(|&(j, v)| (slot[j], v))
                        .collect();
                    r.sort_by_key(|&(j, _)| j);
                    r
                })
                .collect(),
        }
    }

    fn reach(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.order()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &(j, _) in &self.rows[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

/// A vertical scaling matrix restricted to an index set.
#[derive(Clone, Debug)]
pub struct ScalingMatrix {
    pub component: usize,
    pub k: usize,
    pub kind: MatrixKind,
    /// Global cell indices, at level `k` for upper/lower kinds and `k + 1` for star kinds.
    pub index_set: Vec<usize>,
    pub matrix: SparseMatrix,
}

impl ScalingMatrix {
    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// Entry addressed by global cell indices; zero outside the index set.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (
            self.index_set.binary_search(&i),
            self.index_set.binary_search(&j),
        ) {
            (Ok(p), Ok(q)) => self.matrix.get(p, q),
            _ => 0.0,
        }
    }
}

/// Matrix of `kind` at level `k`, restricted to `Θ_k` (upper/lower) or `Θ̃_k` (star).
pub fn build_matrix(
    spec: &RfifSpec,
    levels: &[PartitionLevel],
    k: usize,
    kind: MatrixKind,
) -> Result<ScalingMatrix> {
    let level = level_at(levels, k)?;
    let index_set = if kind.is_star() {
        level.theta_tilde()
    } else {
        level.theta.clone()
    };
    build_matrix_on(spec, levels, k, kind, &index_set)
}

fn level_at(levels: &[PartitionLevel], k: usize) -> Result<&PartitionLevel> {
    levels.get(k.wrapping_sub(1)).ok_or(Error::LevelCap {
        requested: k,
        cap: levels.len(),
    })
}

/// Matrix of `kind` at level `k` restricted to an arbitrary sorted index set.
pub fn build_matrix_on(
    spec: &RfifSpec,
    levels: &[PartitionLevel],
    k: usize,
    kind: MatrixKind,
    index_set: &[usize],
) -> Result<ScalingMatrix> {
    let base = level_at(levels, k)?;
    let grid = &base.grid;
    // Star kinds live on level k + 1 cells, whose geometry the grid provides
    // even when that level was not built.
    let lk = if kind.is_star() { k + 1 } else { k };
    let count = grid.cell_count(lk);
    let mut slot = vec![u32::MAX; count];
    for (p, &i) in index_set.iter().enumerate() {
        if i == 0 || i > count {
            return Err(Error::IndexOutOfRange {
                level: lk,
                index: i,
                max: count,
            });
        }
        slot[i - 1] = p as u32;
    }
    let pick = |(lo, hi): (f64, f64)| if kind.takes_max() { hi } else { lo };

    let rows: Vec<Vec<(usize, f64)>> = index_set
        .par_iter()
        .map(|&i| {
            let n = grid.owner(lk, i);
            let s = &spec.map(n).s;
            let d = grid.preimage(lk, i);
            let row_value = kind.is_star().then(|| pick(s.abs_range(&d)));
            grid.cells_in(lk, &d)
                .into_iter()
                .filter(|&j| slot[j - 1] != u32::MAX)
                .map(|j| {
                    let v = row_value.unwrap_or_else(|| pick(s.abs_range(&grid.cell(lk, j))));
                    (slot[j - 1] as usize, v)
                })
                .collect()
        })
        .collect();

    Ok(ScalingMatrix {
        component: grid.component,
        k,
        kind,
        index_set: index_set.to_vec(),
        matrix: SparseMatrix::from_rows(rows),
    })
}

/// Strong connectivity of the positive-entry digraph. A 1x1 matrix counts only
/// with a positive entry.
pub fn is_irreducible(m: &SparseMatrix) -> bool {
    match m.order() {
        0 => false,
        1 => m.get(0, 0) > 0.0,
        _ => m.reach(0).iter().all(|&b| b) && m.transpose().reach(0).iter().all(|&b| b),
    }
}

/// Power-iteration result with its Collatz–Wielandt enclosure (when available).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

pub fn spectral_radius(m: &SparseMatrix, tol: f64) -> Result<f64> {
    power_iteration(m, tol, MAX_ITERATIONS).map(|e| e.value)
}

/// Dominant eigenvalue modulus of a nonnegative matrix.
///
/// Iterates from the all-ones vector. Convergence is declared when the
/// Collatz–Wielandt bounds `min (Ax)_i/x_i <= ρ <= max (Ax)_i/x_i` agree to `tol`
/// (relative), or, for reducible matrices whose iterate loses positivity, when
/// the growth ratio stabilizes. A stalled iteration (periodic matrix) switches
/// to `(A + I)/2`, whose Perron root is `(ρ + 1)/2`.
pub fn power_iteration(m: &SparseMatrix, tol: f64, max_iter: usize) -> Result<RadiusEstimate> {
    let n = m.order();
    if n == 0 {
        return Ok(RadiusEstimate {
            value: 0.0,
            lo: 0.0,
            hi: 0.0,
            iterations: 0,
        });
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut shifted = false;
    let mut prev_ratio = f64::NAN;
    let mut stable = 0usize;
    let mut checkpoint_delta = f64::INFINITY;
    let mut prev_step = 0.0f64;
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let unshift = |v: f64, s: bool| if s { 2.0 * v - 1.0 } else { v };

    for it in 1..=max_iter {
        let mut y = m.mul_vec(&x);
        if shifted {
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = 0.5 * (*yi + xi);
            }
        }
        let norm: f64 = y.iter().sum();
        if norm < 1e-300 {
            return Ok(RadiusEstimate {
                value: 0.0,
                lo: 0.0,
                hi: 0.0,
                iterations: it,
            });
        }
        let ratio = norm; // x sums to one
        if x.iter().all(|&v| v > 0.0) {
            let (mut a, mut b) = (f64::INFINITY, 0.0f64);
            for (yi, xi) in y.iter().zip(&x) {
                let q = yi / xi;
                a = a.min(q);
                b = b.max(q);
            }
            lo = unshift(a, shifted).max(0.0);
            hi = unshift(b, shifted);
            if hi - lo <= tol * hi {
                let value = 0.5 * (lo + hi);
                debug_check(m, value);
                return Ok(RadiusEstimate {
                    value,
                    lo,
                    hi,
                    iterations: it,
                });
            }
        }
        let step = ratio - prev_ratio;
        let delta = step.abs();
        let alternating = step * prev_step < 0.0;
        prev_step = step;
        if delta <= tol * ratio {
            stable += 1;
            if stable >= 10 {
                let value = unshift(ratio, shifted);
                debug_check(m, value);
                return Ok(RadiusEstimate {
                    value,
                    lo: lo.min(value),
                    hi: hi.max(value),
                    iterations: it,
                });
            }
        } else {
            stable = 0;
        }
        if !shifted && it % 200 == 0 {
            if alternating && delta > 0.5 * checkpoint_delta {
                shifted = true;
                stable = 0;
                prev_ratio = f64::NAN;
                checkpoint_delta = f64::INFINITY;
                x = y.iter().map(|v| v / norm).collect();
                continue;
            }
            checkpoint_delta = delta;
        }
        prev_ratio = ratio;
        x = y.iter().map(|v| v / norm).collect();
    }
    Err(Error::PowerIteration {
        iterations: max_iter,
        lo,
        hi,
    })
}

/// Characteristic polynomial by Faddeev–LeVerrier, highest degree first
/// (`c[0] = 1`).
pub fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += c[k - 1];
        }
        m = next;
        let trace: f64 = (0..n)
            .map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>())
            .sum();
        c[k] = -trace / k as f64;
    }
    c
}

fn debug_check(m: &SparseMatrix, rho: f64) {
    if cfg!(debug_assertions) && m.order() <= 6 {
        let c = characteristic_polynomial(&m.to_dense());
        let value = c.iter().fold(0.0, |acc, &ci| acc * rho + ci);
        let scale: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ci)| ci.abs() * rho.max(1.0).powi((c.len() - 1 - k) as i32))
            .sum();
        debug_assert!(
            value.abs() <= 1e-6 * scale.max(1.0),
            "power iteration result {rho} is not a root of the characteristic polynomial"
        );
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectraSequence {
    pub component: usize,
    pub t: u64,
    /// `upper[k - 1] = ρ(M̄_k|Θ_k)`.
    pub upper: Vec<f64>,
    /// `lower[k - 1] = ρ(M̲_k|Θ_k)`.
    pub lower: Vec<f64>,
    pub bracket: (f64, f64),
    pub estimate: f64,
    /// Set when the positivity hypothesis is unverified; only `upper` is then a bound.
    pub one_sided: bool,
}

/// Radius sequences for levels `1..=kmax`.
pub fn spectra_sequence(
    spec: &RfifSpec,
    comp: &Component,
    kmax: usize,
    tol: f64,
) -> Result<SpectraSequence> {
    let levels = build_partition(spec, comp, kmax)?;
    spectra_from_levels(spec, comp, &levels, tol)
}

pub fn spectra_from_levels(
    spec: &RfifSpec,
    comp: &Component,
    levels: &[PartitionLevel],
    tol: f64,
) -> Result<SpectraSequence> {
    let pairs = (1..=levels.len())
        .into_par_iter()
        .map(|k| {
            let up = build_matrix(spec, levels, k, MatrixKind::Upper)?;
            let low = build_matrix(spec, levels, k, MatrixKind::Lower)?;
            Ok((
                spectral_radius(&up.matrix, tol)?,
                spectral_radius(&low.matrix, tol)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (upper, lower): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let one_sided = crate::dimension::k_star(spec, levels).is_none();
    let (lo, hi) = (*lower.last().unwrap(), *upper.last().unwrap());
    Ok(SpectraSequence {
        component: comp.index,
        t: comp.t,
        upper,
        lower,
        bracket: (lo, hi),
        estimate: if one_sided { hi } else { 0.5 * (lo + hi) },
        one_sided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_address_graph, components};
    use crate::spec::parse_spec;

    const TWO_COMPONENTS: &str = include_str!("../tests/data/two_components.cfg");

    fn setup(r: usize, kmax: usize) -> (RfifSpec, Component, Vec<PartitionLevel>) {
        let spec = parse_spec(TWO_COMPONENTS).unwrap();
        let comps = components(&build_address_graph(&spec), &spec).unwrap();
        let comp = comps[r - 1].clone();
        let levels = build_partition(&spec, &comp, kmax).unwrap();
        (spec, comp, levels)
    }

    #[test]
    fn lower_matrix_second_component_level_two() {
        let (spec, _, levels) = setup(2, 2);
        let m = build_matrix(&spec, &levels, 2, MatrixKind::Lower).unwrap();
        let expected = [
            [7.0 / 10.0, 11.0 / 15.0, 0.0, 0.0],
            [0.0, 0.0, 23.0 / 30.0, 4.0 / 5.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.5, 0.5, 0.0, 0.0],
        ];
        let dense = m.matrix.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense[i][j] - expected[i][j]).abs() < 1e-12, "({i},{j})");
            }
        }
        assert!(is_irreducible(&m.matrix));
        let rho = spectral_radius(&m.matrix, DEFAULT_TOL).unwrap();
        assert!((rho - 1.2433).abs() < 5e-4, "{rho}");
    }

    #[test]
    fn upper_matrix_second_component_level_one() {
        let (spec, _, levels) = setup(2, 1);
        let m = build_matrix(&spec, &levels, 1, MatrixKind::Upper).unwrap();
        let dense = m.matrix.to_dense();
        let expected = [[23.0 / 30.0, 5.0 / 6.0], [0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((dense[i][j] - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simple_radii() {
        let id = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((spectral_radius(&id, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-12);
        let nil = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_radius(&nil, DEFAULT_TOL).unwrap(), 0.0);
        // Period-2 irreducible matrix: needs the shifted iteration.
        let swap = SparseMatrix::from_dense(&[vec![0.0, 2.0], vec![0.5, 0.0]]);
        assert!((spectral_radius(&swap, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-10);
        let cyc = SparseMatrix::from_dense(&[
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        let rho = spectral_radius(&cyc, DEFAULT_TOL).unwrap();
        assert!((rho - 3f64.cbrt()).abs() < 1e-10, "{rho}");
    }

    #[test]
    fn reducible_block_triangular() {
        let m = SparseMatrix::from_dense(&[vec![0.5, 1.0], vec![0.0, 0.9]]);
        assert!((spectral_radius(&m, DEFAULT_TOL).unwrap() - 0.9).abs() < 1e-9);
        let m = SparseMatrix::from_dense(&[vec![0.9, 1.0], vec![0.0, 0.5]]);
        assert!((spectral_radius(&m, DEFAULT_TOL).unwrap() - 0.9).abs() < 1e-9);
    }

    #[test]
    fn irreducibility_cases() {
        assert!(!is_irreducible(&SparseMatrix::from_dense(&vec![
            vec![
                0.0;
                3
            ];
            3
        ])));
        assert!(!is_irreducible(&SparseMatrix::from_dense(&[vec![0.0]])));
        assert!(is_irreducible(&SparseMatrix::from_dense(&[vec![0.3]])));
        let perm = SparseMatrix::from_dense(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        assert!(is_irreducible(&perm));
    }

    #[test]
    fn characteristic_polynomial_of_small_matrix() {
        // [[2, 1], [1, 2]] has λ² - 4λ + 3.
        let c = characteristic_polynomial(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!(
            (c[0] - 1.0).abs() < 1e-12 && (c[1] + 4.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12
        );
    }

    #[test]
    fn second_component_first_levels() {
        let (spec, comp, levels) = setup(2, 3);
        let seq = spectra_from_levels(&spec, &comp, &levels, DEFAULT_TOL).unwrap();
        assert!((seq.upper[0] - 1.2925).abs() < 5e-4, "{:?}", seq.upper);
        assert!((seq.lower[0] - 1.2272).abs() < 5e-4, "{:?}", seq.lower);
        assert!(!seq.one_sided);
    }
}
