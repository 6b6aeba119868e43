use rand::Rng;

use super::line::Line;
use crate::error::{Error, Result};
use crate::num::{uniform, Scalar};

/// Density shape of one proposal piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceForm<T> {
    /// `exp(line(x))`.
    ExpLinear(Line<T>),
    /// `exp(c)`.
    FlatLog(T),
    /// Density linear between the endpoint values `p_lo` and `p_hi`.
    LinearPdf { p_lo: T, p_hi: T },
}

impl<T: Scalar> PieceForm<T> {
    pub fn name(&self) -> &'static str {
        match self {
            PieceForm::ExpLinear(_) => "exp_linear",
            PieceForm::FlatLog(_) => "flat_log",
            PieceForm::LinearPdf { .. } => "linear_pdf",
        }
    }
}

/// One piece of a piecewise proposal on the interval `(lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece<T> {
    pub lo: T,
    pub hi: T,
    pub form: PieceForm<T>,
    pub area: T,
}

impl<T: Scalar> Piece<T> {
    pub fn new(lo: T, hi: T, form: PieceForm<T>) -> Result<Self> {
        let area = piece_area(lo, hi, &form)?;
        Ok(Piece { lo, hi, form, area })
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    /// Log of the piece density at `x` (no bounds check).
    #[inline]
    pub fn log_eval(&self, x: T) -> T {
        match self.form {
            PieceForm::ExpLinear(line) => line.eval(x),
            PieceForm::FlatLog(c) => c,
            PieceForm::LinearPdf { p_lo, p_hi } => {
                let frac = (x - self.lo) / (self.hi - self.lo);
                (p_lo + (p_hi - p_lo) * frac).ln()
            }
        }
    }

    /// Integral of the piece density over `[a, b]` intersected with the piece.
    pub fn partial_area(&self, a: T, b: T) -> T {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if !(a < b) {
            return T::zero();
        }
        if a == self.lo && b == self.hi {
            return self.area;
        }
        match self.form {
            PieceForm::LinearPdf { .. } => {
                (self.log_eval(a).exp() + self.log_eval(b).exp()) * (b - a) * T::lit(0.5)
            }
            form => piece_area(a, b, &form).unwrap_or_else(|_| T::infinity()),
        }
    }

    /// Draws from the normalized piece density.
    ///
    /// Uniform draws consumed: one for `ExpLinear` and `FlatLog`, three for
    /// `LinearPdf`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let x = match self.form {
            PieceForm::ExpLinear(line) => {
                let v: T = uniform(rng);
                sample_exp_linear(self.lo, self.hi, line.slope, v)
            }
            PieceForm::FlatLog(_) => {
                let v: T = uniform(rng);
                self.lo + v * self.width()
            }
            PieceForm::LinearPdf { p_lo, p_hi } => {
                let u: T = uniform(rng);
                let v: T = uniform(rng);
                let w: T = uniform(rng);
                let (u, v) = (self.lo + u * self.width(), self.lo + v * self.width());
                trapezoid_pick(u, v, w, p_lo, p_hi)
            }
        };
        x.max(self.lo).min(self.hi)
    }
}

/// Two-uniform rule for a density linear on an interval: given `u`, `v`
/// uniform on the interval and `w` uniform on `[0, 1)`, returns `min(u, v)`
/// when `w < p_lo / (p_lo + p_hi)` and `max(u, v)` otherwise.
#[inline]
pub fn trapezoid_pick<T: Scalar>(u: T, v: T, w: T, p_lo: T, p_hi: T) -> T {
    if w < p_lo / (p_lo + p_hi) {
        u.min(v)
    } else {
        u.max(v)
    }
}

/// Below this value of `|slope| * width` exponential pieces are treated as flat.
fn flat_threshold<T: Scalar>() -> T {
    T::lit(1e-8)
}

/// Inverse-CDF draw from `exp(slope * x)` restricted to `[lo, hi]`.
fn sample_exp_linear<T: Scalar>(lo: T, hi: T, slope: T, v: T) -> T {
    let width = hi - lo;
    let rate = slope.abs();
    if width.is_finite() && rate * width < flat_threshold() {
        return lo + v * width;
    }
    // distance from the heavier end follows an exponential truncated to `width`
    let z = -(v * (-rate * width).exp_m1()).ln_1p() / rate;
    if slope > T::zero() {
        hi - z
    } else {
        lo + z
    }
}

/// Exact integral of the piece density over `[lo, hi]`.
pub fn piece_area<T: Scalar>(lo: T, hi: T, form: &PieceForm<T>) -> Result<T> {
    if !(lo < hi) || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "piece bounds ({lo}, {hi}] are empty"
        )));
    }
    let width = hi - lo;
    let divergent = |slope: T| Error::DivergentArea {
        lo: lo.as_f64(),
        hi: hi.as_f64(),
        slope: slope.as_f64(),
    };
    let area = match *form {
        PieceForm::ExpLinear(line) => {
            let b = line.slope;
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => return Err(divergent(b)),
                (false, true) => {
                    if !(b > T::zero()) {
                        return Err(divergent(b));
                    }
                    line.eval(hi).exp() / b
                }
                (true, false) => {
                    if !(b < T::zero()) {
                        return Err(divergent(b));
                    }
                    line.eval(lo).exp() / -b
                }
                (true, true) => {
                    let bw = b * width;
                    if bw.abs() < flat_threshold() {
                        line.eval(lo).exp() * width * (T::one() + T::lit(0.5) * bw)
                    } else if b > T::zero() {
                        line.eval(hi).exp() * -(-bw).exp_m1() / b
                    } else {
                        line.eval(lo).exp() * bw.exp_m1() / b
                    }
                }
            }
        }
        PieceForm::FlatLog(c) => {
            if !width.is_finite() {
                return Err(divergent(T::zero()));
            }
            c.exp() * width
        }
        PieceForm::LinearPdf { p_lo, p_hi } => {
            if !width.is_finite() {
                return Err(divergent(T::zero()));
            }
            if p_lo < T::zero() || p_hi < T::zero() || !p_lo.is_finite() || !p_hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "linear pdf endpoints {p_lo}, {p_hi} must be finite and nonnegative"
                )));
            }
            (p_lo + p_hi) * width * T::lit(0.5)
        }
    };
    if area.is_nan() || area.is_infinite() {
        return Err(Error::NonFiniteValue {
            x: lo.as_f64(),
            value: area.as_f64(),
        });
    }
    Ok(area)
}
