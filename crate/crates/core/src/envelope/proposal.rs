use std::io::{self, Write};

use rand::Rng;

use super::construct::{check_support, interval_pieces, tangent_pieces, Construction, Points, Procedure};
use super::piece::{Piece, PieceForm};
use super::support::SupportSet;
use crate::error::{Error, Result};
use crate::num::{uniform, Scalar};
use crate::target::{Domain, LogDensity};

/// Piecewise proposal `pi_t(x) = exp(W_t(x))` with its piece areas.
///
/// Pieces are ordered, contiguous and tile the target domain exactly. A
/// proposal is never mutated by sampling; [`PiecewiseProposal::insert`]
/// returns a new value.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseProposal<T> {
    pieces: Vec<Piece<T>>,
    cumulative: Vec<T>,
    construction: Construction<T>,
    domain: Domain<T>,
    generation: u64,
    /// Start index of each support interval's pieces (`m + 2` entries) for
    /// interval-local procedures.
    offsets: Option<Vec<usize>>,
}

impl<T: Scalar> PiecewiseProposal<T> {
    /// Builds the proposal of `construction` from scratch.
    pub fn build<D: LogDensity<T>>(
        support: &SupportSet<T>,
        construction: impl Into<Construction<T>>,
        target: &D,
    ) -> Result<Self> {
        let construction = construction.into();
        let domain = target.domain();
        check_support(support, construction.procedure)?;
        let (pieces, offsets) = if construction.procedure.is_interval_local() {
            let pts = Points::new(support);
            let m = support.len();
            let mut pieces = Vec::with_capacity(2 * m + 2);
            let mut offsets = Vec::with_capacity(m + 2);
            for j in 0..=m {
                offsets.push(pieces.len());
                interval_pieces(j, &pts, &construction, &domain, &mut pieces)?;
            }
            offsets.push(pieces.len());
            (pieces, Some(offsets))
        } else {
            (tangent_pieces(support, target, &domain)?, None)
        };
        Ok(Self::assemble(pieces, construction, domain, 0, offsets))
    }

    fn assemble(
        pieces: Vec<Piece<T>>,
        construction: Construction<T>,
        domain: Domain<T>,
        generation: u64,
        offsets: Option<Vec<usize>>,
    ) -> Self {
        let mut acc = T::zero();
        let cumulative = pieces
            .iter()
            .map(|p| {
                acc += p.area;
                acc
            })
            .collect();
        PiecewiseProposal {
            pieces,
            cumulative,
            construction,
            domain,
            generation,
            offsets,
        }
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    /// Prefix sums of the piece areas.
    pub fn cumulative_areas(&self) -> &[T] {
        &self.cumulative
    }

    pub fn construction(&self) -> &Construction<T> {
        &self.construction
    }

    pub fn procedure(&self) -> Procedure {
        self.construction.procedure
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn set_generation(&mut self, t: u64) {
        self.generation = t;
    }

    /// `c_pi`, the integral of `exp(W_t)` over the domain.
    pub fn total_mass(&self) -> T {
        self.cumulative.last().copied().unwrap_or_else(T::zero)
    }

    /// Integral of `exp(W_t)` over `[a, b]`.
    pub fn mass_between(&self, a: T, b: T) -> T {
        self.pieces
            .iter()
            .filter(|p| p.hi > a && p.lo < b)
            .fold(T::zero(), |acc, p| acc + p.partial_area(a, b))
    }

    fn locate(&self, x: T) -> usize {
        self.pieces
            .partition_point(|p| p.hi < x)
            .min(self.pieces.len() - 1)
    }

    /// `W_t(x)`.
    pub fn log_eval(&self, x: T) -> Result<T> {
        self.domain.check(x)?;
        Ok(self.log_eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn log_eval_unchecked(&self, x: T) -> T {
        self.pieces[self.locate(x)].log_eval(x)
    }

    /// Draws `x` from the normalized proposal and returns `(x, W_t(x))`.
    ///
    /// Consumes one uniform for the piece choice, then the piece's own draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, T) {
        let u = uniform::<T, R>(rng) * self.total_mass();
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.pieces.len() - 1);
        let x = self.pieces[i].sample(rng);
        (x, self.log_eval_unchecked(x))
    }

    /// Adds `x_new` to `support` and returns the refined proposal.
    pub fn insert<D: LogDensity<T>>(
        &self,
        support: &mut SupportSet<T>,
        x_new: T,
        target: &D,
    ) -> Result<Self> {
        let value = target.log_density(x_new)?;
        self.insert_with_value(support, x_new, value, target)
    }

    /// [`Self::insert`] with `V(x_new)` already known.
    ///
    /// Interval-local procedures only recompute the intervals whose defining
    /// points moved; the tangent envelope is rebuilt in full. On error the
    /// support is left unchanged.
    pub fn insert_with_value<D: LogDensity<T>>(
        &self,
        support: &mut SupportSet<T>,
        x_new: T,
        value: T,
        target: &D,
    ) -> Result<Self> {
        self.domain.check(x_new)?;
        let i = support.insert_with_value(x_new, value)?;
        let rebuilt = match &self.offsets {
            Some(old) if old.len() + 1 == support.len() + 2 => self.rebuild_local(support, i, old),
            _ => Self::build(support, self.construction, target),
        };
        match rebuilt {
            Ok(mut p) => {
                p.generation = self.generation + 1;
                Ok(p)
            }
            Err(e) => {
                support.remove(i);
                Err(e)
            }
        }
    }

    fn rebuild_local(&self, support: &SupportSet<T>, i: usize, old: &[usize]) -> Result<Self> {
        check_support(support, self.construction.procedure)?;
        let pts = Points::new(support);
        let m = support.len();
        let mut pieces = Vec::with_capacity(self.pieces.len() + 4);
        let mut offsets = Vec::with_capacity(m + 2);
        for j in 0..=m {
            offsets.push(pieces.len());
            if j + 2 <= i {
                pieces.extend_from_slice(&self.pieces[old[j]..old[j + 1]]);
            } else if j >= i + 3 {
                pieces.extend_from_slice(&self.pieces[old[j - 1]..old[j]]);
            } else {
                interval_pieces(j, &pts, &self.construction, &self.domain, &mut pieces)?;
            }
        }
        offsets.push(pieces.len());
        Ok(Self::assemble(
            pieces,
            self.construction,
            self.domain,
            self.generation,
            Some(offsets),
        ))
    }

    /// Flattens the exponential tails: both tail slopes are multiplied by
    /// `1 - beta * exp(-alpha_decay * t)`, pivoting on the inner end of the
    /// tail piece so the proposal stays continuous there.
    pub fn inflate_tails(&self, beta: T, alpha_decay: T, t: u64) -> Result<Self> {
        if !(beta >= T::zero() && beta <= T::one()) {
            return Err(Error::InvalidParameter(format!("beta = {beta} not in [0, 1]")));
        }
        if !(alpha_decay > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "alpha_decay = {alpha_decay} must be positive"
            )));
        }
        let factor = T::one() - beta * (-alpha_decay * T::lit(t as f64)).exp();
        if factor == T::one() {
            return Ok(self.clone());
        }
        if !(factor > T::zero()) {
            return Err(Error::TailSlope {
                side: "both",
                slope: 0.0,
                expected: "a nonzero inflation factor",
            });
        }
        let mut pieces = self.pieces.clone();
        let last = pieces.len() - 1;
        for (i, pivot_hi) in [(0, true), (last, false)] {
            let piece = pieces[i];
            let unbounded = if pivot_hi {
                !piece.lo.is_finite()
            } else {
                !piece.hi.is_finite()
            };
            if !unbounded {
                continue;
            }
            let PieceForm::ExpLinear(line) = piece.form else {
                return Err(Error::InvalidParameter("tail piece is not exponential".into()));
            };
            let pivot = if pivot_hi { piece.hi } else { piece.lo };
            pieces[i] = Piece::new(piece.lo, piece.hi, PieceForm::ExpLinear(line.rotated(pivot, factor)))?;
        }
        Ok(Self::assemble(
            pieces,
            self.construction,
            self.domain,
            self.generation,
            self.offsets.clone(),
        ))
    }

    /// Writes `piece_index,lo,hi,form,params,area` rows for plotting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "piece_index,lo,hi,form,params,area")?;
        for (i, p) in self.pieces.iter().enumerate() {
            let params = match p.form {
                PieceForm::ExpLinear(line) => format!("{};{}", line.intercept(), line.slope),
                PieceForm::FlatLog(c) => format!("{c}"),
                PieceForm::LinearPdf { p_lo, p_hi } => format!("{p_lo};{p_hi}"),
            };
            writeln!(w, "{i},{},{},{},{params},{}", p.lo, p.hi, p.form.name(), p.area)?;
        }
        Ok(())
    }
}

impl<T: Scalar> LogDensity<T> for PiecewiseProposal<T> {
    fn ln_pdf(&self, x: T) -> T {
        self.log_eval_unchecked(x)
    }

    fn domain(&self) -> Domain<T> {
        self.domain
    }

    fn mass_outside(&self, lo: T, hi: T) -> Option<T> {
        let below = self.mass_between(self.domain.lo, lo);
        let above = self.mass_between(hi, self.domain.hi);
        Some(below + above)
    }
}
