//! Assembly of the box-dimension bounds and the box-counting cross-check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{
    default_refinement, solve_rfif, sup_bound_on, variation_certificate, CertificateResult,
    CertificateRoute, SampledRfif, VariationStatus,
};
use crate::graph::{build_address_graph, components, positions, Component, PositionMap};
use crate::partition::{build_partition, stationarity_check, PartitionLevel};
use crate::rational::{ceil_int, int, to_f64, Interval, Rational};
use crate::scaling::{spectra_from_levels, SpectraSequence};
use crate::spec::RfifSpec;

/// Width below which a `d*` interval is reported as its midpoint.
pub const COLLAPSE_WIDTH: f64 = 1e-3;

/// Smallest `k <= levels.len()` with `|S_n| > 0` on `D_n ∩ B_{r,k}` for every
/// member `n`; `None` if no computed level qualifies.
pub fn k_star(spec: &RfifSpec, levels: &[PartitionLevel]) -> Option<usize> {
    levels.iter().find_map(|level| {
        let runs = level.basic_set();
        let ok = level.grid.members.iter().all(|&n| {
            let d = spec.domain(n);
            let s = &spec.map(n).s;
            runs.iter()
                .filter_map(|b| b.intersection(&d))
                .all(|piece| s.abs_range(&piece).0 > 0.0)
        });
        ok.then_some(level.k)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DStar {
    pub lo: f64,
    pub hi: f64,
    /// Midpoint when the interval is narrower than [`COLLAPSE_WIDTH`].
    pub value: Option<f64>,
    /// Set when the variation status is undecided and the interval is only a range.
    pub flagged: bool,
}

/// `d*_r` from the radius bracket: `1 + log ρ / log T` under infinite
/// variation, `1` under finite variation, and `[1, 1 + log hi / log T]` otherwise.
pub fn d_star(bracket: (f64, f64), t: u64, status: VariationStatus) -> Result<DStar> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo - 1e-9 || lo < 0.0 {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let lt = (t as f64).ln();
    let dim = |rho: f64| {
        if rho > 0.0 {
            (1.0 + rho.ln() / lt).max(1.0)
        } else {
            1.0
        }
    };
    Ok(match status {
        VariationStatus::CertifiedInfinite => {
            let (a, b) = (dim(lo.min(hi)), dim(hi));
            DStar {
                lo: a,
                hi: b,
                value: (b - a < COLLAPSE_WIDTH).then_some(0.5 * (a + b)),
                flagged: false,
            }
        }
        VariationStatus::RefutedFinite => DStar {
            lo: 1.0,
            hi: 1.0,
            value: Some(1.0),
            flagged: false,
        },
        VariationStatus::Unknown => DStar {
            lo: 1.0,
            hi: dim(hi),
            value: None,
            flagged: true,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentAnalysis {
    pub component: usize,
    pub members: Vec<usize>,
    pub t: u64,
    pub stationary: bool,
    pub spectra: SpectraSequence,
    pub rho_bracket: (f64, f64),
    pub k_star: Option<usize>,
    pub certificate: CertificateResult,
    pub variation_status: VariationStatus,
    pub d_star: DStar,
}

#[derive(Clone, Debug, Serialize)]
pub struct Empirical {
    pub component: Option<usize>,
    pub p_min: usize,
    pub p_max: usize,
    pub slope: f64,
    pub stderr: f64,
    pub points: Vec<LadderPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderPoint {
    pub p: usize,
    pub epsilon: f64,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub components: Vec<ComponentAnalysis>,
    /// Variation status of `f` on each `I_n`, indexed by `n - 1`.
    pub vertex_status: Vec<VariationStatus>,
    pub positions: Vec<usize>,
    pub upper_bound: f64,
    pub exact: Option<f64>,
    pub exact_bracket: Option<(f64, f64)>,
    pub empirical: Option<Empirical>,
    pub refinement: usize,
    pub sup_error: f64,
}

#[derive(Clone, Debug)]
pub struct DimensionOptions {
    pub kmax: usize,
    pub pmax: usize,
    pub tol: f64,
    pub refinement: Option<usize>,
    pub empirical: bool,
    pub max_sweeps: usize,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        DimensionOptions {
            kmax: 10,
            pmax: 8,
            tol: 1e-10,
            refinement: None,
            empirical: false,
            max_sweeps: 100_000,
        }
    }
}

/// Extra depth scanned by the variation certificate beyond `pmax`, bounded by
/// the sample resolution.
const CERTIFICATE_EXTRA_DEPTH: usize = 2;

/// Runs the full pipeline.
pub fn dimension_bounds(spec: &RfifSpec, opts: &DimensionOptions) -> Result<DimensionReport> {
    let g = build_address_graph(spec);
    let comps = components(&g, spec)?;
    let pos = positions(&g, &comps);
    let t_max = comps.iter().map(|c| c.t).max().unwrap_or(2);
    let q = opts
        .refinement
        .unwrap_or_else(|| default_refinement(spec.n_maps(), t_max));
    let f = solve_rfif(spec, q, opts.tol, opts.max_sweeps)?;

    struct Prepared {
        levels: Vec<PartitionLevel>,
        spectra: SpectraSequence,
        k_star: Option<usize>,
    }
    let prepared = comps
        .par_iter()
        .map(|c| {
            let levels = build_partition(spec, c, opts.kmax)?;
            let spectra = spectra_from_levels(spec, c, &levels, crate::scaling::DEFAULT_TOL)?;
            let k_star = k_star(spec, &levels);
            Ok(Prepared {
                levels,
                spectra,
                k_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut status = vec![VariationStatus::Unknown; spec.n_maps()];
    let mut certs: Vec<Option<CertificateResult>> = vec![None; comps.len()];
    let mut order: Vec<usize> = (1..=spec.n_maps()).collect();
    order.sort_by_key(|&i| (pos.position(i), i));
    for i in order {
        if let Some(r) = comps.iter().position(|c| c.contains(i)) {
            if certs[r].is_none() {
                let cert = component_certificate(
                    spec,
                    &f,
                    &comps[r],
                    &prepared[r].levels,
                    prepared[r].k_star,
                    &pos,
                    &status,
                    opts,
                )?;
                let s = cert.status;
                for &n in &comps[r].members {
                    status[n - 1] = s;
                }
                certs[r] = Some(cert);
            }
        } else {
            status[i - 1] = vertex_status(spec, &g, i, &status);
        }
    }

    let mut analyses = Vec::with_capacity(comps.len());
    for ((c, prep), cert) in comps.iter().zip(prepared).zip(certs) {
        let cert = cert.expect("every component certified");
        let bracket = prep.spectra.bracket;
        let ds = d_star(bracket, c.t, cert.status)?;
        analyses.push(ComponentAnalysis {
            component: c.index,
            members: c.members.clone(),
            t: c.t,
            stationary: stationarity_check(&prep.levels),
            rho_bracket: bracket,
            spectra: prep.spectra,
            k_star: prep.k_star,
            variation_status: cert.status,
            certificate: cert,
            d_star: ds,
        });
    }
    let report = assemble(analyses, status, pos, &f, q);
    let empirical = if opts.empirical {
        Some(report_empirical(spec, &f, &comps, &report, opts.pmax)?)
    } else {
        None
    };
    Ok(DimensionReport {
        empirical,
        ..report
    })
}

/// Combines per-component results into the global bounds.
pub fn assemble(
    components: Vec<ComponentAnalysis>,
    vertex_status: Vec<VariationStatus>,
    pos: PositionMap,
    f: &SampledRfif,
    refinement: usize,
) -> DimensionReport {
    let upper_bound = components
        .iter()
        .map(|c| {
            let top = *c.spectra.upper.last().unwrap_or(&0.0);
            if top > 0.0 {
                1.0 + (top.ln() / (c.t as f64).ln()).max(0.0)
            } else {
                1.0
            }
        })
        .fold(1.0, f64::max);
    let decided = components.iter().all(|c| match c.variation_status {
        VariationStatus::CertifiedInfinite => c.k_star.is_some(),
        VariationStatus::RefutedFinite => true,
        VariationStatus::Unknown => false,
    });
    let (exact, exact_bracket) = if decided {
        let lo = components.iter().map(|c| c.d_star.lo).fold(1.0, f64::max);
        let hi = components.iter().map(|c| c.d_star.hi).fold(1.0, f64::max);
        let mid = components
            .iter()
            .map(|c| c.d_star.value.unwrap_or(0.5 * (c.d_star.lo + c.d_star.hi)))
            .fold(1.0, f64::max);
        (Some(mid), Some((lo, hi)))
    } else {
        (None, None)
    };
    DimensionReport {
        components,
        vertex_status,
        positions: pos.p,
        upper_bound,
        exact,
        exact_bracket,
        empirical: None,
        refinement,
        sup_error: f.sup_error,
    }
}

#[allow(clippy::too_many_arguments)]
fn component_certificate(
    spec: &RfifSpec,
    f: &SampledRfif,
    comp: &Component,
    levels: &[PartitionLevel],
    kstar: Option<usize>,
    pos: &PositionMap,
    status: &[VariationStatus],
    opts: &DimensionOptions,
) -> Result<CertificateResult> {
    let upstream: Vec<usize> = pos.ancestors[comp.members[0] - 1].iter().copied().collect();
    let upstream_finite = upstream
        .iter()
        .all(|&j| status[j - 1] == VariationStatus::RefutedFinite);
    let k = kstar.unwrap_or(1).max(2).min(levels.len());
    let f_bound = sup_bound_on(spec, &comp.members)?;
    let mut cert = variation_certificate(
        spec,
        f,
        comp,
        levels,
        k,
        opts.pmax + CERTIFICATE_EXTRA_DEPTH,
        f_bound,
        upstream_finite,
    )?;
    if cert.status == VariationStatus::Unknown && kstar == Some(1) {
        // Infinite variation on an upstream I_j inside some D_n is carried onto
        // L_n(I_j) ⊆ I_n when |S_n| stays away from zero on I_j.
        let carried = upstream.iter().any(|&j| {
            status[j - 1] == VariationStatus::CertifiedInfinite
                && comp.members.iter().any(|&n| {
                    let ij = spec.interval(j);
                    spec.domain(n).contains_interval(&ij) && spec.map(n).s.abs_range(&ij).0 > 0.0
                })
        });
        if carried {
            cert.status = VariationStatus::CertifiedInfinite;
            cert.route = CertificateRoute::Transfer;
        }
    }
    Ok(cert)
}

/// Status of a vertex outside every component from its predecessors.
fn vertex_status(
    spec: &RfifSpec,
    g: &crate::graph::AddressGraph,
    i: usize,
    status: &[VariationStatus],
) -> VariationStatus {
    let s = &spec.map(i).s;
    if s.abs_range(&spec.domain(i)).1 == 0.0 {
        return VariationStatus::RefutedFinite;
    }
    let preds = g.predecessors(i);
    if preds
        .iter()
        .all(|&j| status[j - 1] == VariationStatus::RefutedFinite)
    {
        return VariationStatus::RefutedFinite;
    }
    let carried = preds.iter().any(|&j| {
        status[j - 1] == VariationStatus::CertifiedInfinite
            && s.abs_range(&spec.interval(j)).0 > 0.0
    });
    if carried {
        VariationStatus::CertifiedInfinite
    } else {
        VariationStatus::Unknown
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxCount {
    pub epsilon: f64,
    pub count: u64,
}

/// Anchored box count of the sampled graph over the whole span.
pub fn box_count(f: &SampledRfif, epsilon: &Rational) -> Result<BoxCount> {
    let span = Interval::new(f.x0, f.x0 + f.h * int((f.len() - 1) as i128));
    box_count_on(f, &span, epsilon)
}

/// Anchored box count over `j`: columns of width `ε` start at `j.lo`; each
/// column needs `max(1, ceil(max/ε) - floor(min/ε))` closed squares from the
/// lattice `ε Z`, with `min`/`max` over the samples in the closed column.
pub fn box_count_on(f: &SampledRfif, j: &Interval, epsilon: &Rational) -> Result<BoxCount> {
    if *epsilon < f.h * int(2) {
        return Err(Error::Resolution(format!(
            "epsilon {} is below two grid steps",
            to_f64(epsilon)
        )));
    }
    let eps = to_f64(epsilon);
    let columns = ceil_int(&(j.len() / epsilon)) as usize;
    let mut count = 0u64;
    for c in 0..columns {
        let lo = j.lo + epsilon * int(c as i128);
        let hi = (lo + epsilon).min(j.hi);
        let (s, e) = (f.position(&lo), f.position(&hi));
        let (mn, mx) = f
            .piece_range(&s, &e)
            .ok_or_else(|| Error::Resolution(format!("column {c} holds fewer than 2 samples")))?;
        let boxes = ((mx / eps).ceil() - (mn / eps).floor()).max(1.0);
        count += boxes as u64;
    }
    Ok(BoxCount {
        epsilon: eps,
        count,
    })
}

/// Ladder `ε_p = base / T^p` on the given runs, counting each run separately.
pub fn ladder(
    f: &SampledRfif,
    t: u64,
    runs: &[Interval],
    base: &Rational,
    p_min: usize,
    p_max: usize,
) -> Result<Vec<LadderPoint>> {
    (p_min..=p_max)
        .into_par_iter()
        .map(|p| {
            let eps = base / int((t as i128).pow(p as u32));
            let count = runs
                .iter()
                .map(|j| box_count_on(f, j, &eps).map(|b| b.count))
                .sum::<Result<u64>>()?;
            Ok(LadderPoint {
                p,
                epsilon: to_f64(&eps),
                count,
            })
        })
        .collect()
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)` with its standard error.
pub fn regression(points: &[LadderPoint]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Regression(format!(
            "need at least 3 ladder points, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| -p.epsilon.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// Empirical box dimension on `runs` over the ladder `p_min..=p_max`.
pub fn empirical_dimension(
    f: &SampledRfif,
    t: u64,
    runs: &[Interval],
    base: &Rational,
    p_min: usize,
    p_max: usize,
) -> Result<Empirical> {
    let points = ladder(f, t, runs, base, p_min, p_max)?;
    let (slope, stderr) = regression(&points)?;
    Ok(Empirical {
        component: None,
        p_min,
        p_max,
        slope,
        stderr,
        points,
    })
}

/// Deepest `p` with `base / T^p` at least two grid steps.
pub fn resolvable_depth(f: &SampledRfif, t: u64, base: &Rational) -> usize {
    let ratio = to_f64(&(base / f.h));
    let mut p = 0;
    while ratio / (t as f64).powi(p as i32 + 1) >= 2.0 {
        p += 1;
    }
    p
}

/// `B_{r,1}` as maximal runs.
pub fn component_runs(spec: &RfifSpec, comp: &Component) -> Vec<Interval> {
    let mut runs: Vec<Interval> = Vec::new();
    for &n in &comp.members {
        let i = spec.interval(n);
        match runs.last_mut() {
            Some(last) if last.hi == i.lo => last.hi = i.hi,
            _ => runs.push(i),
        }
    }
    runs
}

fn report_empirical(
    spec: &RfifSpec,
    f: &SampledRfif,
    comps: &[Component],
    report: &DimensionReport,
    pmax: usize,
) -> Result<Empirical> {
    // Regress on the component with the largest dimension estimate, or on the
    // whole span with dyadic columns when there is no component.
    let dominant = report
        .components
        .iter()
        .zip(comps)
        .max_by(|(a, _), (b, _)| a.d_star.hi.total_cmp(&b.d_star.hi))
        .map(|(_, c)| c);
    let (t, runs, base, component) = match dominant {
        Some(c) => (
            c.t,
            component_runs(spec, c),
            spec.interval(c.members[0]).len(),
            Some(c.index),
        ),
        None => (2, vec![spec.span()], spec.span().len(), None),
    };
    let p_max = pmax.min(resolvable_depth(f, t, &base));
    let p_min = 3.min(p_max.saturating_sub(2));
    let mut e = empirical_dimension(f, t, &runs, &base, p_min, p_max)?;
    e.component = component;
    Ok(e)
}
