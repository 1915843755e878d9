//! Exact rational breakpoints, closed intervals and affine maps.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

pub fn int(value: i128) -> Rational {
    Ratio::from_integer(value)
}

pub fn to_f64(r: &Rational) -> f64 {
    // i128 -> f64 conversions are exact enough for the magnitudes used here;
    // dividing after conversion keeps the result within one rounding step.
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

/// Formats as `p/q`, also for integers.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, a signed integer, or a finite decimal such as `0.25` (exactly).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().ok()?;
        let q: i128 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Ratio::new(p, q));
    }
    if let Ok(v) = s.parse::<i128>() {
        return Some(int(v));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.')?;
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac.len() > 30 {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let denom = 10i128.checked_pow(frac.len() as u32)?;
    let value = Ratio::new(numer, denom);
    Some(if neg { -value } else { value })
}

pub fn floor_int(r: &Rational) -> i128 {
    r.numer().div_floor(r.denom())
}

pub fn ceil_int(r: &Rational) -> i128 {
    -Integer::div_floor(&(-r.numer()), r.denom())
}

/// Closed interval `[lo, hi]` with rational endpoints, `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    /// Builds the interval spanned by two endpoints given in either order.
    pub fn spanning(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn len(&self) -> Rational {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when the interiors do not meet.
    pub fn interiors_disjoint(&self, other: &Interval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.lo), to_f64(&self.hi))
    }

    /// Splits into `pieces` equal closed subintervals.
    pub fn subdivide(&self, pieces: u64) -> Vec<Interval> {
        let width = self.len() / int(pieces as i128);
        (0..pieces as i128)
            .map(|l| Interval {
                lo: self.lo + width * int(l),
                hi: self.lo + width * int(l + 1),
            })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

/// `x -> slope * x + intercept` with a nonzero rational slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffineMap {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        assert!(!slope.is_zero(), "affine map slope must be nonzero");
        AffineMap { slope, intercept }
    }

    /// The unique affine map sending `from_a -> to_a` and `from_b -> to_b`.
    pub fn through(from_a: Rational, to_a: Rational, from_b: Rational, to_b: Rational) -> Self {
        let slope = (to_b - to_a) / (from_b - from_a);
        AffineMap::new(slope, to_a - slope * from_a)
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        self.slope * x + self.intercept
    }

    pub fn inverse(&self) -> AffineMap {
        let slope = self.slope.recip();
        AffineMap::new(slope, -self.intercept * slope)
    }

    pub fn is_increasing(&self) -> bool {
        self.slope.is_positive()
    }

    /// Image of an interval, normalized to increasing endpoints.
    pub fn image(&self, j: &Interval) -> Interval {
        Interval::spanning(self.apply(&j.lo), self.apply(&j.hi))
    }

    /// Preimage of an interval, normalized to increasing endpoints.
    pub fn preimage(&self, j: &Interval) -> Interval {
        self.inverse().image(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("5/6"), Some(rat(5, 6)));
        assert_eq!(parse_rational("-2/4"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("0.125"), Some(rat(1, 8)));
        assert_eq!(parse_rational("-.5"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1e3"), None);
    }

    #[test]
    fn formats_as_fraction() {
        assert_eq!(fmt_rational(&int(1)), "1/1");
        assert_eq!(fmt_rational(&rat(-4, 6)), "-2/3");
        assert_eq!(Interval::new(rat(2, 3), rat(3, 4)).to_string(), "[2/3,3/4]");
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_int(&rat(7, 2)), 3);
        assert_eq!(ceil_int(&rat(7, 2)), 4);
        assert_eq!(floor_int(&rat(-7, 2)), -4);
        assert_eq!(ceil_int(&rat(-7, 2)), -3);
        assert_eq!(ceil_int(&int(5)), 5);
    }

    #[test]
    fn decreasing_map_preimage_is_normalized() {
        // L(x) = -x/2 + 4/3 maps [2/3, 1] onto [5/6, 1].
        let l = AffineMap::new(rat(-1, 2), rat(4, 3));
        let i = Interval::new(rat(5, 6), rat(11, 12));
        assert_eq!(l.preimage(&i), Interval::new(rat(5, 6), int(1)));
        assert_eq!(
            l.image(&Interval::new(rat(2, 3), int(1))),
            Interval::new(rat(5, 6), int(1))
        );
    }

    #[test]
    fn affine_through_two_points() {
        let l = AffineMap::through(rat(1, 3), int(0), rat(5, 6), rat(1, 6));
        assert_eq!(l.slope, rat(1, 3));
        assert_eq!(l.intercept, rat(-1, 9));
    }

    #[test]
    fn interior_disjointness() {
        let a = Interval::new(int(0), rat(1, 2));
        let b = Interval::new(rat(1, 2), int(1));
        assert!(a.interiors_disjoint(&b));
        assert!(!a.interiors_disjoint(&Interval::new(rat(1, 4), int(1))));
    }
}
