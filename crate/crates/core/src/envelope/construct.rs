//! Procedures turning a support set into proposal pieces.

use std::fmt;
use std::str::FromStr;

use super::line::Line;
use super::piece::{Piece, PieceForm};
use super::support::SupportSet;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::target::{Domain, LogDensity};

/// Rule used to build `W_t` from the support points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Procedure {
    /// `T`: minimum of the tangent lines (needs the derivative).
    Tangent,
    /// `S`: minimum of the neighbouring secants (ARS without derivatives).
    Secant,
    /// `P1`: the ARMS max/min rule over three secants.
    ArmsHull,
    /// `P2`: the secant of each interval, extended into the tails.
    Polyline,
    /// `P3`: the larger endpoint value, constant on each interval.
    Staircase,
    /// `P4`: linear in the pdf domain, exponential tails.
    Trapezoid,
}

impl Procedure {
    pub const ALL: [Procedure; 6] = [
        Procedure::Tangent,
        Procedure::Secant,
        Procedure::ArmsHull,
        Procedure::Polyline,
        Procedure::Staircase,
        Procedure::Trapezoid,
    ];

    /// Short code: `T`, `S`, `P1` .. `P4`.
    pub fn code(self) -> &'static str {
        match self {
            Procedure::Tangent => "T",
            Procedure::Secant => "S",
            Procedure::ArmsHull => "P1",
            Procedure::Polyline => "P2",
            Procedure::Staircase => "P3",
            Procedure::Trapezoid => "P4",
        }
    }

    pub fn min_support(self) -> usize {
        match self {
            Procedure::Secant => 4,
            Procedure::ArmsHull => 3,
            _ => 2,
        }
    }

    /// Whether pieces are grouped by support interval (allowing local rebuilds).
    pub fn is_interval_local(self) -> bool {
        !matches!(self, Procedure::Tangent)
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "t" | "tangent" => Procedure::Tangent,
            "s" | "secant" => Procedure::Secant,
            "p1" | "arms" => Procedure::ArmsHull,
            "p2" | "polyline" => Procedure::Polyline,
            "p3" | "staircase" | "steps" => Procedure::Staircase,
            "p4" | "trapezoid" => Procedure::Trapezoid,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown procedure `{other}`"
                )))
            }
        })
    }
}

/// Upper bound `B >= V` and a mode estimate for the dominating staircase variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepBound<T> {
    pub bound: T,
    pub mode: T,
}

/// A procedure plus its options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Construction<T> {
    pub procedure: Procedure,
    /// Only read by [`Procedure::Staircase`]: the interval containing `mode`
    /// is raised to the flat level `bound`.
    pub step_bound: Option<StepBound<T>>,
}

impl<T> From<Procedure> for Construction<T> {
    fn from(procedure: Procedure) -> Self {
        Construction {
            procedure,
            step_bound: None,
        }
    }
}

/// `max`/`min` expression over up to three lines on one interval.
#[derive(Clone, Copy, Debug)]
enum Hull<T> {
    One(Line<T>),
    Min(Line<T>, Line<T>),
    Max(Line<T>, Line<T>),
    /// `max(a, min(b, c))`
    MaxMin(Line<T>, Line<T>, Line<T>),
}

fn lower<T: Scalar>(a: Line<T>, b: Line<T>, x: T) -> Line<T> {
    if a.eval(x) <= b.eval(x) {
        a
    } else {
        b
    }
}

fn upper<T: Scalar>(a: Line<T>, b: Line<T>, x: T) -> Line<T> {
    if a.eval(x) >= b.eval(x) {
        a
    } else {
        b
    }
}

impl<T: Scalar> Hull<T> {
    fn lines(&self) -> Vec<Line<T>> {
        match *self {
            Hull::One(a) => vec![a],
            Hull::Min(a, b) | Hull::Max(a, b) => vec![a, b],
            Hull::MaxMin(a, b, c) => vec![a, b, c],
        }
    }

    /// Line attaining the expression at `x`.
    fn active(&self, x: T) -> Line<T> {
        match *self {
            Hull::One(a) => a,
            Hull::Min(a, b) => lower(a, b, x),
            Hull::Max(a, b) => upper(a, b, x),
            Hull::MaxMin(a, b, c) => upper(a, lower(b, c, x), x),
        }
    }

    /// Splits `(lo, hi]` at line crossings so each sub-interval has one active line.
    fn split(&self, lo: T, hi: T) -> Vec<(T, T, Line<T>)> {
        if let Hull::One(a) = *self {
            return vec![(lo, hi, a)];
        }
        let lines = self.lines();
        let mut cuts = vec![lo, hi];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                if let Some(x) = lines[i].intersect(&lines[j]) {
                    if x > lo && x < hi {
                        cuts.push(x);
                    }
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
        cuts.dedup();
        let mut out: Vec<(T, T, Line<T>)> = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = T::lit(0.5) * (w[0] + w[1]);
            let line = self.active(mid);
            match out.last_mut() {
                Some(last) if last.2 == line => last.1 = w[1],
                _ => out.push((w[0], w[1], line)),
            }
        }
        out
    }
}

/// Read-only view of the support with 1-based accessors matching the usual
/// `s_1 < ... < s_m` numbering.
pub(crate) struct Points<'a, T> {
    s: &'a [T],
    v: &'a [T],
}

impl<'a, T: Scalar> Points<'a, T> {
    pub(crate) fn new(support: &'a SupportSet<T>) -> Self {
        Points {
            s: support.points(),
            v: support.values(),
        }
    }

    fn m(&self) -> usize {
        self.s.len()
    }

    fn s(&self, i: usize) -> T {
        self.s[i - 1]
    }

    fn v(&self, i: usize) -> T {
        self.v[i - 1]
    }

    /// `L_{i,i+1}`, the secant through `s_i` and `s_{i+1}`.
    fn secant(&self, i: usize) -> Line<T> {
        Line::through(self.s(i), self.v(i), self.s(i + 1), self.v(i + 1))
    }
}

pub(crate) fn check_support<T: Scalar>(support: &SupportSet<T>, procedure: Procedure) -> Result<()> {
    if support.len() < procedure.min_support() {
        return Err(Error::InsufficientSupport {
            procedure: procedure.code(),
            required: procedure.min_support(),
            got: support.len(),
        });
    }
    for (&x, &v) in support.points().iter().zip(support.values()) {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                x: x.as_f64(),
                value: v.as_f64(),
            });
        }
    }
    Ok(())
}

fn left_tail<T: Scalar>(line: Line<T>, domain: &Domain<T>) -> Result<()> {
    if !domain.bounded_below() && !(line.slope > T::zero()) {
        return Err(Error::TailSlope {
            side: "left",
            slope: line.slope.as_f64(),
            expected: "> 0",
        });
    }
    Ok(())
}

fn right_tail<T: Scalar>(line: Line<T>, domain: &Domain<T>) -> Result<()> {
    if !domain.bounded_above() && !(line.slope < T::zero()) {
        return Err(Error::TailSlope {
            side: "right",
            slope: line.slope.as_f64(),
            expected: "< 0",
        });
    }
    Ok(())
}

/// Appends the pieces of interval `j` (`0..=m`): `I_0 = (lo, s_1]`,
/// `I_j = (s_j, s_{j+1}]`, `I_m = (s_m, hi)`.
pub(crate) fn interval_pieces<T: Scalar>(
    j: usize,
    pts: &Points<'_, T>,
    construction: &Construction<T>,
    domain: &Domain<T>,
    out: &mut Vec<Piece<T>>,
) -> Result<()> {
    let m = pts.m();
    let (lo, hi) = if j == 0 {
        (domain.lo, pts.s(1))
    } else if j == m {
        (pts.s(m), domain.hi)
    } else {
        (pts.s(j), pts.s(j + 1))
    };
    if !(lo < hi) {
        // support point sitting on a domain bound
        return Ok(());
    }
    if j == 0 {
        let line = pts.secant(1);
        left_tail(line, domain)?;
        return push_hull(out, lo, hi, Hull::One(line));
    }
    if j == m {
        let line = pts.secant(m - 1);
        right_tail(line, domain)?;
        return push_hull(out, lo, hi, Hull::One(line));
    }
    match construction.procedure {
        Procedure::Tangent => unreachable!("tangent envelope is not interval-local"),
        Procedure::Secant => {
            let hull = if j == 1 {
                Hull::One(pts.secant(2))
            } else if j == m - 1 {
                Hull::One(pts.secant(m - 2))
            } else {
                Hull::Min(pts.secant(j - 1), pts.secant(j + 1))
            };
            push_hull(out, lo, hi, hull)
        }
        Procedure::ArmsHull => {
            let hull = if j == 1 {
                Hull::Max(pts.secant(1), pts.secant(2))
            } else if j == m - 1 {
                Hull::Max(pts.secant(m - 1), pts.secant(m - 2))
            } else {
                Hull::MaxMin(pts.secant(j), pts.secant(j - 1), pts.secant(j + 1))
            };
            push_hull(out, lo, hi, hull)
        }
        Procedure::Polyline => push_hull(out, lo, hi, Hull::One(pts.secant(j))),
        Procedure::Staircase => {
            let level = match construction.step_bound {
                Some(b) if b.mode > lo && b.mode <= hi => b.bound,
                _ => pts.v(j).max(pts.v(j + 1)),
            };
            out.push(Piece::new(lo, hi, PieceForm::FlatLog(level))?);
            Ok(())
        }
        Procedure::Trapezoid => {
            let form = PieceForm::LinearPdf {
                p_lo: pts.v(j).exp(),
                p_hi: pts.v(j + 1).exp(),
            };
            out.push(Piece::new(lo, hi, form)?);
            Ok(())
        }
    }
}

fn push_hull<T: Scalar>(out: &mut Vec<Piece<T>>, lo: T, hi: T, hull: Hull<T>) -> Result<()> {
    for (a, b, line) in hull.split(lo, hi) {
        out.push(Piece::new(a, b, PieceForm::ExpLinear(line))?);
    }
    Ok(())
}

/// Pieces of `min_k w_k(x)` over the tangents `w_k` at every support point.
pub(crate) fn tangent_pieces<T: Scalar, D: LogDensity<T>>(
    support: &SupportSet<T>,
    target: &D,
    domain: &Domain<T>,
) -> Result<Vec<Piece<T>>> {
    let mut lines = Vec::with_capacity(support.len());
    for (&s, &v) in support.points().iter().zip(support.values()) {
        let d = target
            .ln_pdf_derivative(s)
            .ok_or(Error::MissingDerivative)?;
        if !d.is_finite() {
            return Err(Error::NonFiniteValue {
                x: s.as_f64(),
                value: d.as_f64(),
            });
        }
        lines.push(Line::new(s, v, d));
    }
    // steepest first: it is the minimum as x -> -inf
    lines.sort_by(|a, b| b.slope.partial_cmp(&a.slope).expect("finite slopes"));
    let mut hull: Vec<Line<T>> = Vec::with_capacity(lines.len());
    for line in lines {
        if let Some(top) = hull.last() {
            if top.slope == line.slope {
                if line.intercept() < top.intercept() {
                    hull.pop();
                } else {
                    continue;
                }
            }
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            match (a.intersect(&line), a.intersect(&b)) {
                (Some(xl), Some(xb)) if xl <= xb => {
                    hull.pop();
                }
                _ => break,
            }
        }
        hull.push(line);
    }
    let mut cuts = Vec::with_capacity(hull.len() + 1);
    cuts.push(domain.lo);
    for w in hull.windows(2) {
        // near-parallel neighbours: split at the midpoint of their anchors
        let x = w[0]
            .intersect(&w[1])
            .unwrap_or_else(|| T::lit(0.5) * (w[0].x0 + w[1].x0));
        cuts.push(x.max(domain.lo).min(domain.hi));
    }
    cuts.push(domain.hi);
    let first = hull[0];
    let last = hull[hull.len() - 1];
    let mut pieces = Vec::with_capacity(hull.len());
    for (i, line) in hull.iter().enumerate() {
        let (lo, hi) = (cuts[i], cuts[i + 1]);
        if !(lo < hi) {
            continue;
        }
        if !lo.is_finite() {
            left_tail(first, domain)?;
        }
        if !hi.is_finite() {
            right_tail(last, domain)?;
        }
        pieces.push(Piece::new(lo, hi, PieceForm::ExpLinear(*line))?);
    }
    Ok(pieces)
}
