//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 parse or validation failure, 2 usage error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dimension::{
    component_runs, dimension_bounds, ladder, DimensionOptions, DimensionReport,
};
use crate::error::Error;
use crate::function::{default_refinement, oscillation_sum, solve_rfif, SampledRfif};
use crate::graph::{build_address_graph, components, positions, Component};
use crate::partition::build_partition;
use crate::scaling::{build_matrix, spectra_from_levels, MatrixKind};
use crate::spec::{parse_spec, validate_spec, RfifSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "recurdim",
    version,
    about = "Box-dimension bounds for recurrent fractal interpolation functions"
)]
pub struct Args {
    /// Suppress the banner on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the spec and list violations as `CODE<TAB>map=N<TAB>message`.
    Validate { spec: PathBuf },
    /// Print components and positions.
    Scc { spec: PathBuf },
    /// Print one partition level of a component.
    Partition {
        spec: PathBuf,
        #[arg(long)]
        component: usize,
        #[arg(long)]
        level: usize,
    },
    /// Print the nonzero entries of a scaling matrix as CSV.
    Matrix {
        spec: PathBuf,
        #[arg(long)]
        component: usize,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value = "upper")]
        kind: KindArg,
    },
    /// Spectral-radius sequences of a component.
    Spectra {
        spec: PathBuf,
        #[arg(long)]
        component: usize,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Solve for f and write `x,f(x)` samples.
    Render {
        spec: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Depth-P oscillation sum on each basic interval of a level.
    Oscillation {
        spec: PathBuf,
        #[arg(long)]
        component: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Full dimension report.
    Dimension {
        spec: PathBuf,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 8)]
        pmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        empirical: bool,
        #[arg(long)]
        json: bool,
    },
    /// Anchored box counts on a component's first basic set.
    Boxcount {
        spec: PathBuf,
        #[arg(long)]
        component: usize,
        #[arg(long)]
        pmin: usize,
        #[arg(long)]
        pmax: usize,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Upper,
    Lower,
    StarUpper,
    StarLower,
}

impl From<KindArg> for MatrixKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Upper => MatrixKind::Upper,
            KindArg::Lower => MatrixKind::Lower,
            KindArg::StarUpper => MatrixKind::StarUpper,
            KindArg::StarLower => MatrixKind::StarLower,
        }
    }
}

/// Failure carrying its exit status.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_numerical() => EXIT_NUMERICAL,
            Error::Resolution(_) | Error::NotContractive { .. } => EXIT_NUMERICAL,
            Error::LevelCap { .. } | Error::IndexOutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    configure_threads();
    if !args.quiet {
        let _ = writeln!(err, "recurdim {}", env!("CARGO_PKG_VERSION"));
    }
    match execute(&args.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("RECURDIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            // A pool may already exist when `run` is called repeatedly in one
            // process; the first configuration wins.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn load(path: &PathBuf) -> Result<RfifSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_spec(&text)?)
}

/// Loads and validates; violations end the run with status 1.
fn load_valid(path: &PathBuf, err: &mut dyn Write) -> Result<RfifSpec, Failure> {
    let spec = load(path)?;
    let report = validate_spec(&spec);
    if !report.passed() {
        write!(err, "{report}")?;
        return Err(Failure {
            code: EXIT_INVALID,
            message: "spec failed validation".into(),
        });
    }
    Ok(spec)
}

fn component(spec: &RfifSpec, r: usize) -> Result<Component, Failure> {
    let comps = components(&build_address_graph(spec), spec)?;
    comps
        .into_iter()
        .find(|c| c.index == r)
        .ok_or_else(|| usage(format!("no component {r}")))
}

fn solve(spec: &RfifSpec, resolution: Option<usize>, tol: f64) -> Result<SampledRfif, Failure> {
    let comps = components(&build_address_graph(spec), spec)?;
    let t_max = comps.iter().map(|c| c.t).max().unwrap_or(2);
    let q = resolution.unwrap_or_else(|| default_refinement(spec.n_maps(), t_max));
    Ok(solve_rfif(spec, q, tol, 100_000)?)
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { spec } => {
            let spec = load(spec)?;
            let report = validate_spec(&spec);
            write!(out, "{report}")?;
            if report.passed() {
                for (members, t) in &report.ratios {
                    writeln!(out, "OK\tmembers={}\tT={t}", join(members))?;
                }
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_INVALID)
            }
        }
        Command::Scc { spec } => {
            let spec = load_valid(spec, err)?;
            let g = build_address_graph(&spec);
            let comps = components(&g, &spec)?;
            for c in &comps {
                writeln!(out, "r={} members={} T={}", c.index, join(&c.members), c.t)?;
            }
            let pos = positions(&g, &comps);
            for i in 1..=spec.n_maps() {
                writeln!(out, "P({i})={}", pos.position(i))?;
            }
            Ok(EXIT_OK)
        }
        Command::Partition {
            spec,
            component: r,
            level,
        } => {
            let spec = load_valid(spec, err)?;
            let comp = component(&spec, *r)?;
            if *level == 0 {
                return Err(usage("--level must be at least 1"));
            }
            let levels = build_partition(&spec, &comp, *level)?;
            let lv = &levels[level - 1];
            writeln!(out, "theta={}", join(&lv.theta))?;
            for i in 1..=lv.cell_count() {
                writeln!(
                    out,
                    "i={i} I={} D={} owner={} survives={}",
                    lv.interval(i),
                    lv.preimage(i),
                    lv.owner(i),
                    lv.is_survivor(i)
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Matrix {
            spec,
            component: r,
            level,
            kind,
        } => {
            let spec = load_valid(spec, err)?;
            let comp = component(&spec, *r)?;
            let kind = MatrixKind::from(*kind);
            if *level == 0 {
                return Err(usage("--level must be at least 1"));
            }
            let levels = build_partition(&spec, &comp, *level)?;
            let m = build_matrix(&spec, &levels, *level, kind)?;
            writeln!(out, "i,j,value")?;
            for (p, &i) in m.index_set.iter().enumerate() {
                for &(q, v) in m.matrix.row(p) {
                    writeln!(out, "{i},{},{}", m.index_set[q], sig6(v))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Spectra {
            spec,
            component: r,
            kmax,
            tol,
            json,
        } => {
            let spec = load_valid(spec, err)?;
            let comp = component(&spec, *r)?;
            let levels = build_partition(&spec, &comp, *kmax)?;
            let seq = spectra_from_levels(&spec, &comp, &levels, *tol)?;
            if *json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&seq).expect("serializable")
                )?;
            } else {
                writeln!(out, "k,rho_upper,rho_lower")?;
                for k in 0..seq.upper.len() {
                    writeln!(
                        out,
                        "{},{},{}",
                        k + 1,
                        sig6(seq.upper[k]),
                        sig6(seq.lower[k])
                    )?;
                }
                writeln!(
                    out,
                    "# bracket=[{},{}] estimate={} one_sided={}",
                    sig6(seq.bracket.0),
                    sig6(seq.bracket.1),
                    sig6(seq.estimate),
                    seq.one_sided
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Render {
            spec,
            resolution,
            tol,
            out: path,
            svg,
        } => {
            let spec = load_valid(spec, err)?;
            let f = solve(&spec, *resolution, *tol)?;
            let mut csv = String::from("x,f(x)\n");
            for m in 0..f.len() {
                let _ = writeln!(csv, "{:.12},{}", f.x_at(m), f.values[m]);
            }
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            if let Some(p) = svg {
                std::fs::write(p, render_svg(&f))?;
            }
            Ok(EXIT_OK)
        }
        Command::Oscillation {
            spec,
            component: r,
            p,
            level,
            resolution,
            tol,
        } => {
            let spec = load_valid(spec, err)?;
            let comp = component(&spec, *r)?;
            if *level == 0 {
                return Err(usage("--level must be at least 1"));
            }
            let levels = build_partition(&spec, &comp, *level)?;
            let f = solve(&spec, *resolution, *tol)?;
            let lv = &levels[level - 1];
            let mut total = 0.0;
            for &i in &lv.theta {
                let o = oscillation_sum(&f, comp.t, *p, &lv.interval(i))?;
                total += o;
                writeln!(out, "i={i} I={} O={o}", lv.interval(i))?;
            }
            writeln!(out, "total={total}")?;
            Ok(EXIT_OK)
        }
        Command::Dimension {
            spec,
            kmax,
            pmax,
            tol,
            resolution,
            empirical,
            json,
        } => {
            let spec = load_valid(spec, err)?;
            let opts = DimensionOptions {
                kmax: *kmax,
                pmax: *pmax,
                tol: *tol,
                refinement: *resolution,
                empirical: *empirical,
                ..DimensionOptions::default()
            };
            let report = dimension_bounds(&spec, &opts)?;
            if *json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                )?;
            } else {
                write!(out, "{}", human_report(&report))?;
            }
            Ok(EXIT_OK)
        }
        Command::Boxcount {
            spec,
            component: r,
            pmin,
            pmax,
            resolution,
            tol,
        } => {
            let spec = load_valid(spec, err)?;
            let comp = component(&spec, *r)?;
            if pmin > pmax {
                return Err(usage("--pmin exceeds --pmax"));
            }
            let f = solve(&spec, *resolution, *tol)?;
            let base = spec.interval(comp.members[0]).len();
            let points = ladder(
                &f,
                comp.t,
                &component_runs(&spec, &comp),
                &base,
                *pmin,
                *pmax,
            )?;
            writeln!(out, "p,epsilon,count")?;
            for pt in points {
                writeln!(out, "{},{},{}", pt.p, sig6(pt.epsilon), pt.count)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn join(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Decimal with six significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.5}");
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

fn human_report(r: &DimensionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "components: {}", r.components.len());
    for c in &r.components {
        let k = c.spectra.upper.len();
        let _ = writeln!(
            s,
            "component {}: members={} T={} stationary={}",
            c.component,
            join(&c.members),
            c.t,
            c.stationary
        );
        let _ = writeln!(
            s,
            "  rho_upper(k={k})={} rho_lower(k={k})={} bracket=[{},{}] estimate={}{}",
            sig6(*c.spectra.upper.last().unwrap_or(&0.0)),
            sig6(*c.spectra.lower.last().unwrap_or(&0.0)),
            sig6(c.rho_bracket.0),
            sig6(c.rho_bracket.1),
            sig6(c.spectra.estimate),
            if c.spectra.one_sided {
                " (one-sided)"
            } else {
                ""
            }
        );
        let ks = c.k_star.map_or("unverified".to_string(), |k| k.to_string());
        let _ = writeln!(
            s,
            "  k_star={ks} variation={} route={} witness_p={}",
            json_name(&c.variation_status),
            json_name(&c.certificate.route),
            c.certificate
                .witness_p
                .map_or("-".to_string(), |p| p.to_string())
        );
        match c.d_star.value {
            Some(v) => {
                let _ = writeln!(s, "  d_star ≈ {v:.6}");
            }
            None => {
                let _ = writeln!(
                    s,
                    "  d_star in [{:.6}, {:.6}]{}",
                    c.d_star.lo,
                    c.d_star.hi,
                    if c.d_star.flagged { " (undecided)" } else { "" }
                );
            }
        }
    }
    let _ = writeln!(s, "upper_bound = {:.6}", r.upper_bound);
    match (r.exact, r.exact_bracket) {
        (Some(e), Some((lo, hi))) => {
            let _ = writeln!(
                s,
                "exact ≈ {e:.3} (value {e:.6}, bracket [{lo:.6}, {hi:.6}])"
            );
        }
        _ => {
            let _ = writeln!(s, "exact: not established (bounds only)");
        }
    }
    if let Some(e) = &r.empirical {
        let _ = writeln!(
            s,
            "empirical slope = {:.4} ± {:.4} over p = {}..={}",
            e.slope, e.stderr, e.p_min, e.p_max
        );
    }
    let _ = writeln!(
        s,
        "samples = {} per map, sup_error = {:e}",
        r.refinement, r.sup_error
    );
    s
}

fn json_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Polyline of the graph in a 1000x600 viewport, one min/max pair per pixel column.
fn render_svg(f: &SampledRfif) -> String {
    const W: f64 = 1000.0;
    const H: f64 = 600.0;
    const PAD: f64 = 20.0;
    let (lo, hi) = f
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = f.len();
    let cols = (W - 2.0 * PAD) as usize;
    let mut pts = Vec::with_capacity(2 * cols);
    for c in 0..cols {
        let a = c * (n - 1) / cols;
        let b = ((c + 1) * (n - 1) / cols).max(a);
        let slice = &f.values[a..=b];
        let (mn, mx) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(x, y), &v| {
                (x.min(v), y.max(v))
            });
        let x = PAD + c as f64;
        let y = |v: f64| H - PAD - (v - lo) / span * (H - 2.0 * PAD);
        let (first, second) = if slice[0] <= slice[slice.len() - 1] {
            (mn, mx)
        } else {
            (mx, mn)
        };
        pts.push(format!("{x:.1},{:.2}", y(first)));
        pts.push(format!("{x:.1},{:.2}", y(second)));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.6\" points=\"{}\"/>\n</svg>\n",
        pts.join(" ")
    )
}
