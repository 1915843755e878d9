//! Problem instances: parsing, serialization and validation.
//!
//! Config layout:
//!
//! ```text
//! [data]
//! x = [0, 1/2, 1]
//! y = [0, 1, 0]
//!
//! [[map]]
//! n = 1
//! ell = 0
//! r = 2
//! orientation = "+"
//! S = [0.8]
//! q = [0, 1]
//! ```
//!
//! Breakpoints are exact rationals; `y` values and polynomial coefficients are
//! binary64. The affine map `L_n` is derived from `(ell, r, orientation)` so that
//! it carries `D_n = [x_ell, x_r]` onto `I_n = [x_{n-1}, x_n]`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph;
use crate::poly::Polynomial;
use crate::rational::{fmt_rational, parse_rational, to_f64, AffineMap, Interval, Rational};

/// Tolerance on the y-coordinates of the interpolation constraint.
pub const INTERP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `L_n(x_ell) = x_{n-1}` and `L_n(x_r) = x_n`.
    Plus,
    /// `L_n(x_ell) = x_n` and `L_n(x_r) = x_{n-1}`.
    Minus,
}

impl Orientation {
    pub fn symbol(self) -> &'static str {
        match self {
            Orientation::Plus => "+",
            Orientation::Minus => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub x: Rational,
    pub y: f64,
}

/// User-facing description of one map before `L_n` is derived.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDef {
    pub n: usize,
    pub ell: usize,
    pub r: usize,
    pub orientation: Orientation,
    pub s: Polynomial,
    pub q: Polynomial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub n: usize,
    pub ell: usize,
    pub r: usize,
    pub orientation: Orientation,
    pub l: AffineMap,
    pub s: Polynomial,
    pub q: Polynomial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RfifSpec {
    pub nodes: Vec<Node>,
    /// Sorted by `n`; `maps[n - 1]` is map `n`.
    pub maps: Vec<MapSpec>,
}

impl RfifSpec {
    pub fn new(nodes: Vec<Node>, mut defs: Vec<MapDef>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidSpec(format!(
                "need at least 3 nodes (N >= 2), got {}",
                nodes.len()
            )));
        }
        let big_n = nodes.len() - 1;
        for (k, w) in nodes.windows(2).enumerate() {
            if w[0].x >= w[1].x {
                return Err(Error::InvalidSpec(format!(
                    "x values not strictly increasing at index {}",
                    k + 1
                )));
            }
        }
        if defs.len() != big_n {
            return Err(Error::InvalidSpec(format!(
                "map count ≠ N ({} maps, N = {big_n})",
                defs.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for d in &defs {
            if !seen.insert(d.n) {
                return Err(Error::InvalidSpec(format!("duplicate map index {}", d.n)));
            }
            if d.n == 0 || d.n > big_n {
                return Err(Error::InvalidSpec(format!(
                    "map index {} outside 1..={big_n}",
                    d.n
                )));
            }
            if d.ell >= d.r || d.r > big_n {
                return Err(Error::InvalidSpec(format!(
                    "map {}: need ell < r <= N, got ell = {}, r = {}",
                    d.n, d.ell, d.r
                )));
            }
        }
        defs.sort_by_key(|d| d.n);
        let maps = defs
            .into_iter()
            .map(|d| {
                let (xl, xr) = (nodes[d.ell].x, nodes[d.r].x);
                let (xa, xb) = (nodes[d.n - 1].x, nodes[d.n].x);
                let l = match d.orientation {
                    Orientation::Plus => AffineMap::through(xl, xa, xr, xb),
                    Orientation::Minus => AffineMap::through(xl, xb, xr, xa),
                };
                MapSpec {
                    n: d.n,
                    ell: d.ell,
                    r: d.r,
                    orientation: d.orientation,
                    l,
                    s: d.s,
                    q: d.q,
                }
            })
            .collect();
        Ok(RfifSpec { nodes, maps })
    }

    /// Number of maps `N`.
    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn x(&self, i: usize) -> Rational {
        self.nodes[i].x
    }

    pub fn y(&self, i: usize) -> f64 {
        self.nodes[i].y
    }

    pub fn map(&self, n: usize) -> &MapSpec {
        &self.maps[n - 1]
    }

    /// `I_n = [x_{n-1}, x_n]`.
    pub fn interval(&self, n: usize) -> Interval {
        Interval::new(self.x(n - 1), self.x(n))
    }

    /// `D_n = [x_ell(n), x_r(n)]`.
    pub fn domain(&self, n: usize) -> Interval {
        let m = self.map(n);
        Interval::new(self.x(m.ell), self.x(m.r))
    }

    /// `[x_0, x_N]`.
    pub fn span(&self) -> Interval {
        Interval::new(self.x(0), self.x(self.n_maps()))
    }

    /// `|D_n| / |I_n|`.
    pub fn ratio(&self, n: usize) -> Rational {
        self.domain(n).len() / self.interval(n).len()
    }

    /// `sup_{D_n} |S_n|`.
    pub fn s_sup(&self, n: usize) -> f64 {
        self.map(n).s.abs_range(&self.domain(n)).1
    }

    /// `sup_{D_n} |q_n|`.
    pub fn q_sup(&self, n: usize) -> f64 {
        self.map(n).q.abs_range(&self.domain(n)).1
    }

    /// Contraction factor `max_n sup_{D_n} |S_n|`.
    pub fn beta(&self) -> f64 {
        (1..=self.n_maps())
            .map(|n| self.s_sup(n))
            .fold(0.0, f64::max)
    }

    /// Serializes to the config layout; `parse_spec` reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let xs: Vec<String> = self.nodes.iter().map(|n| fmt_rational(&n.x)).collect();
        let ys: Vec<String> = self.nodes.iter().map(|n| fmt_f64(n.y)).collect();
        let mut out = format!("[data]\nx = [{}]\ny = [{}]\n", xs.join(", "), ys.join(", "));
        for m in &self.maps {
            out.push_str(&format!(
                "\n[[map]]\nn = {}\nell = {}\nr = {}\norientation = \"{}\"\nS = {}\nq = {}\n",
                m.n,
                m.ell,
                m.r,
                m.orientation.symbol(),
                fmt_coeffs(&m.s),
                fmt_coeffs(&m.q)
            ));
        }
        out
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_coeffs(p: &Polynomial) -> String {
    let cs: Vec<String> = if p.is_zero() {
        vec!["0.0".to_string()]
    } else {
        p.coeffs().iter().map(|&c| fmt_f64(c)).collect()
    };
    format!("[{}]", cs.join(", "))
}

// ---------------------------------------------------------------------------
// Parsing

enum Value {
    List(Vec<(String, usize)>),
    Str(String),
    Scalar(String),
}

#[derive(Default)]
struct RawMap {
    line: usize,
    n: Option<usize>,
    ell: Option<usize>,
    r: Option<usize>,
    orientation: Option<Orientation>,
    s: Option<Polynomial>,
    q: Option<Polynomial>,
}

enum Section {
    Top,
    Data,
    Map,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the config text into a spec.
pub fn parse_spec(text: &str) -> Result<RfifSpec> {
    let mut section = Section::Top;
    let mut xs: Option<Vec<Rational>> = None;
    let mut ys: Option<Vec<f64>> = None;
    let mut maps: Vec<RawMap> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        if trimmed.starts_with('[') && !trimmed.contains('=') {
            match trimmed {
                "[data]" => section = Section::Data,
                "[[map]]" => {
                    section = Section::Map;
                    maps.push(RawMap {
                        line: line_no,
                        ..RawMap::default()
                    });
                }
                other => {
                    return Err(perr(
                        line_no,
                        indent + 1,
                        format!("unknown section {other}"),
                    ));
                }
            }
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| perr(line_no, indent + 1, "expected `key = value`"))?;
        let key = line[..eq].trim();
        let value_col = eq + 1 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
        let value = parse_value(line[eq + 1..].trim(), line_no, value_col + 1)?;
        let key_col = indent + 1;

        match section {
            Section::Top => return Err(perr(line_no, key_col, "key outside of any section")),
            Section::Data => match key {
                "x" => {
                    let list = expect_list(value, line_no, value_col + 1)?;
                    let parsed = list
                        .into_iter()
                        .map(|(tok, col)| {
                            parse_rational(&tok)
                                .ok_or_else(|| perr(line_no, col, format!("bad rational `{tok}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    xs = Some(parsed);
                }
                "y" => {
                    let list = expect_list(value, line_no, value_col + 1)?;
                    let parsed = list
                        .into_iter()
                        .map(|(tok, col)| parse_real(&tok, line_no, col))
                        .collect::<Result<Vec<_>>>()?;
                    ys = Some(parsed);
                }
                _ => {
                    return Err(perr(
                        line_no,
                        key_col,
                        format!("unknown key `{key}` in [data]"),
                    ))
                }
            },
            Section::Map => {
                let m = maps.last_mut().expect("map section open");
                match key {
                    "n" => m.n = Some(expect_uint(value, line_no, value_col + 1)?),
                    "ell" => m.ell = Some(expect_uint(value, line_no, value_col + 1)?),
                    "r" => m.r = Some(expect_uint(value, line_no, value_col + 1)?),
                    "orientation" => {
                        m.orientation = Some(match value {
                            Value::Str(s) if s == "+" => Orientation::Plus,
                            Value::Str(s) if s == "-" => Orientation::Minus,
                            _ => {
                                return Err(perr(
                                    line_no,
                                    value_col + 1,
                                    "orientation must be \"+\" or \"-\"",
                                ))
                            }
                        })
                    }
                    "S" | "q" => {
                        let list = expect_list(value, line_no, value_col + 1)?;
                        let coeffs = list
                            .into_iter()
                            .map(|(tok, col)| parse_real(&tok, line_no, col))
                            .collect::<Result<Vec<_>>>()?;
                        let p = Polynomial::new(coeffs)
                            .map_err(|e| perr(line_no, value_col + 1, e.to_string()))?;
                        if key == "S" {
                            m.s = Some(p);
                        } else {
                            m.q = Some(p);
                        }
                    }
                    _ => {
                        return Err(perr(
                            line_no,
                            key_col,
                            format!("unknown key `{key}` in [[map]]"),
                        ))
                    }
                }
            }
        }
    }

    let xs = xs.ok_or_else(|| Error::InvalidSpec("missing `x` in [data]".into()))?;
    let ys = ys.ok_or_else(|| Error::InvalidSpec("missing `y` in [data]".into()))?;
    if xs.len() != ys.len() {
        return Err(Error::InvalidSpec(format!(
            "x has {} entries but y has {}",
            xs.len(),
            ys.len()
        )));
    }
    let nodes = xs.into_iter().zip(ys).map(|(x, y)| Node { x, y }).collect();
    let defs = maps
        .into_iter()
        .map(|m| {
            let missing = |what: &str| {
                Error::InvalidSpec(format!("[[map]] at line {} is missing `{what}`", m.line))
            };
            Ok(MapDef {
                n: m.n.ok_or_else(|| missing("n"))?,
                ell: m.ell.ok_or_else(|| missing("ell"))?,
                r: m.r.ok_or_else(|| missing("r"))?,
                orientation: m.orientation.ok_or_else(|| missing("orientation"))?,
                s: m.s.clone().ok_or_else(|| missing("S"))?,
                q: m.q.clone().ok_or_else(|| missing("q"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RfifSpec::new(nodes, defs)
}

fn parse_value(text: &str, line: usize, col: usize) -> Result<Value> {
    if let Some(inner) = text.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| perr(line, col + text.len(), "unterminated list, expected `]`"))?;
        let mut items = Vec::new();
        if inner.trim().is_empty() {
            return Ok(Value::List(items));
        }
        let mut offset = 1;
        for piece in inner.split(',') {
            let lead = piece.len() - piece.trim_start().len();
            let tok = piece.trim();
            if tok.is_empty() {
                return Err(perr(line, col + offset + lead, "empty list element"));
            }
            items.push((tok.to_string(), col + offset + lead));
            offset += piece.len() + 1;
        }
        return Ok(Value::List(items));
    }
    if let Some(inner) = text.strip_prefix('"') {
        let inner = inner
            .strip_suffix('"')
            .ok_or_else(|| perr(line, col, "unterminated string"))?;
        return Ok(Value::Str(inner.to_string()));
    }
    if text.is_empty() {
        return Err(perr(line, col, "missing value"));
    }
    Ok(Value::Scalar(text.to_string()))
}

fn expect_list(v: Value, line: usize, col: usize) -> Result<Vec<(String, usize)>> {
    match v {
        Value::List(items) => Ok(items),
        _ => Err(perr(line, col, "expected a list `[a, b, ...]`")),
    }
}

fn expect_uint(v: Value, line: usize, col: usize) -> Result<usize> {
    match v {
        Value::Scalar(s) => s.parse().map_err(|_| {
            perr(
                line,
                col,
                format!("expected a nonnegative integer, got `{s}`"),
            )
        }),
        _ => Err(perr(line, col, "expected a nonnegative integer")),
    }
}

/// `p/q` literals go through exact rationals; everything else uses the
/// correctly rounded decimal parser.
fn parse_real(tok: &str, line: usize, col: usize) -> Result<f64> {
    let v = if tok.contains('/') {
        parse_rational(tok).map(|r| to_f64(&r))
    } else {
        tok.parse::<f64>().ok()
    };
    match v {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(perr(line, col, format!("bad number `{tok}`"))),
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub code: &'static str,
    pub map: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.map {
            Some(n) => write!(f, "{}\tmap={}\t{}", self.code, n, self.message),
            None => write!(f, "{}\tmap=-\t{}", self.code, self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `(members, T_r)` for every component that passed the ratio check.
    pub ratios: Vec<(Vec<usize>, u64)>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Runs every well-posedness check and collects all failures.
pub fn validate_spec(spec: &RfifSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let big_n = spec.n_maps();

    let step = spec.interval(1).len();
    if let Some(n) = (2..=big_n).find(|&n| spec.interval(n).len() != step) {
        report.violations.push(Violation {
            code: "A1",
            map: None,
            message: format!(
                "nodes not uniformly spaced: |I_1| = {} but |I_{n}| = {}",
                fmt_rational(&step),
                fmt_rational(&spec.interval(n).len())
            ),
        });
    }

    for n in 1..=big_n {
        let sup = spec.s_sup(n);
        if sup >= 1.0 {
            report.violations.push(Violation {
                code: "A2",
                map: Some(n),
                message: format!("sup|S_n| ≥ 1 on D_n (got {sup})"),
            });
        }
    }
    report
        .notes
        .push("S_n and q_n are polynomials, hence of bounded variation".into());

    for m in &spec.maps {
        let (end_l, end_r) = match m.orientation {
            Orientation::Plus => (m.n - 1, m.n),
            Orientation::Minus => (m.n, m.n - 1),
        };
        for (src, dst) in [(m.ell, end_l), (m.r, end_r)] {
            let x = to_f64(&spec.x(src));
            let image = m.s.eval(x) * spec.y(src) + m.q.eval(x);
            let gap = (image - spec.y(dst)).abs();
            if gap > INTERP_TOL {
                report.violations.push(Violation {
                    code: "INTERP",
                    map: Some(m.n),
                    message: format!(
                        "W_n sends node {src} to height {image}, expected y_{dst} = {} (gap {gap:e})",
                        spec.y(dst)
                    ),
                });
            }
        }
    }

    let g = graph::build_address_graph(spec);
    for members in graph::cyclic_sccs(&g) {
        match graph::component_ratio(spec, &members) {
            Ok(t) => report.ratios.push((members, t)),
            Err(Error::UniformRatio { map, message }) => report.violations.push(Violation {
                code: "A4",
                map: Some(map),
                message,
            }),
            Err(other) => report.violations.push(Violation {
                code: "A4",
                map: None,
                message: other.to_string(),
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    pub(crate) const TWO_COMPONENTS: &str = include_str!("../tests/data/two_components.cfg");

    #[test]
    fn parses_example_domains_and_maps() {
        let spec = parse_spec(TWO_COMPONENTS).unwrap();
        assert_eq!(spec.n_maps(), 6);
        assert_eq!(spec.domain(1), Interval::new(rat(1, 3), rat(5, 6)));
        assert_eq!(spec.domain(4), Interval::new(rat(1, 3), rat(5, 6)));
        assert_eq!(spec.domain(2), Interval::new(rat(1, 6), rat(2, 3)));
        assert_eq!(spec.domain(6), Interval::new(rat(2, 3), int(1)));
        let expected = [
            (rat(1, 3), rat(-1, 9)),
            (rat(1, 3), rat(1, 9)),
            (rat(1, 3), rat(5, 18)),
            (rat(1, 3), rat(7, 18)),
            (rat(1, 2), rat(1, 3)),
            (rat(-1, 2), rat(4, 3)),
        ];
        for (n, (a, b)) in expected.into_iter().enumerate() {
            assert_eq!(spec.map(n + 1).l, AffineMap::new(a, b), "map {}", n + 1);
        }
    }

    #[test]
    fn classical_fif_parses() {
        let text = "[data]\nx = [0, 1/2, 1]\ny = [0, 1, 0]\n\n[[map]]\nn = 1\nell = 0\nr = 2\norientation = \"+\"\nS = [0.8]\nq = [0, 1]\n\n[[map]]\nn = 2\nell = 0\nr = 2\norientation = \"+\"\nS = [0.8]\nq = [1, -1]\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.domain(1), Interval::new(int(0), int(1)));
        assert_eq!(spec.domain(2), Interval::new(int(0), int(1)));
        assert!(validate_spec(&spec).passed());
    }

    #[test]
    fn map_count_mismatch_rejected() {
        let mut text = String::from("[data]\nx = [0, 1/2, 1]\ny = [0, 1, 0]\n");
        for n in 1..=4 {
            text.push_str(&format!(
                "[[map]]\nn = {n}\nell = 0\nr = 2\norientation = \"+\"\nS = [0]\nq = [0]\n"
            ));
        }
        let err = parse_spec(&text).unwrap_err();
        assert!(err.to_string().contains("map count ≠ N"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_spec("[data]\nx = [0, 1/2, oops]\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 14,
                message: "bad rational `oops`".into()
            }
        );
        assert!(matches!(
            parse_spec("[data]\nx [0]\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_spec("[bogus]\n"),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn rejects_non_monotone_and_duplicates() {
        let bad_x = TWO_COMPONENTS.replace("x = [0, 1/6", "x = [1/6, 0");
        assert!(parse_spec(&bad_x)
            .unwrap_err()
            .to_string()
            .contains("strictly increasing"));
        let dup = TWO_COMPONENTS.replace("n = 2\n", "n = 1\n");
        assert!(parse_spec(&dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate map index"));
    }

    #[test]
    fn example_validates_with_ratios() {
        let spec = parse_spec(TWO_COMPONENTS).unwrap();
        let report = validate_spec(&spec);
        assert!(report.passed(), "{report}");
        assert_eq!(report.ratios, vec![(vec![2, 3, 4], 3), (vec![5, 6], 2)]);
    }

    #[test]
    fn moved_node_breaks_uniform_spacing() {
        let mut spec = parse_spec(TWO_COMPONENTS).unwrap();
        spec.nodes[3].x = rat(51, 100);
        let report = validate_spec(&spec);
        assert!(report.violations.iter().any(|v| v.code == "A1"));
    }

    #[test]
    fn unit_scaling_violates_contraction() {
        let mut spec = parse_spec(TWO_COMPONENTS).unwrap();
        spec.maps[0].s = Polynomial::constant(1.0);
        let report = validate_spec(&spec);
        let v = report.violations.iter().find(|v| v.code == "A2").unwrap();
        assert_eq!(v.map, Some(1));
        assert!(v.message.contains("sup|S_n| ≥ 1"));
        assert!(v.to_string().starts_with("A2\tmap=1\t"));
    }

    #[test]
    fn broken_offset_fails_interpolation() {
        let mut spec = parse_spec(TWO_COMPONENTS).unwrap();
        spec.maps[4].q = Polynomial::new(vec![77.0 / 30.0 + 0.01, -3.4]).unwrap();
        let report = validate_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "INTERP" && v.map == Some(5)));
    }

    #[test]
    fn serialization_round_trips() {
        let spec = parse_spec(TWO_COMPONENTS).unwrap();
        let again = parse_spec(&spec.to_config_string()).unwrap();
        assert_eq!(spec, again);
    }
}
