use crate::num::Scalar;

/// Straight line `y0 + slope * (x - x0)` in the log domain.
///
/// Point-slope form keeps evaluation near the anchor exact, which is where
/// secants and tangents are evaluated most often.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line<T> {
    pub x0: T,
    pub y0: T,
    pub slope: T,
}

impl<T: Scalar> Line<T> {
    pub fn new(x0: T, y0: T, slope: T) -> Self {
        Line { x0, y0, slope }
    }

    /// `a + b x`.
    pub fn from_intercept(a: T, b: T) -> Self {
        Line {
            x0: T::zero(),
            y0: a,
            slope: b,
        }
    }

    /// Secant through `(x1, y1)` and `(x2, y2)`, anchored at the first point.
    pub fn through(x1: T, y1: T, x2: T, y2: T) -> Self {
        Line {
            x0: x1,
            y0: y1,
            slope: (y2 - y1) / (x2 - x1),
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        if self.slope == T::zero() {
            self.y0
        } else {
            self.y0 + self.slope * (x - self.x0)
        }
    }

    pub fn intercept(&self) -> T {
        self.y0 - self.slope * self.x0
    }

    /// Abscissa where the two lines cross; `None` for (near) parallel lines.
    pub fn intersect(&self, other: &Line<T>) -> Option<T> {
        let den = self.slope - other.slope;
        if den.abs() < T::lit(1e-12) {
            return None;
        }
        let num = other.y0 - self.y0 + self.slope * self.x0 - other.slope * other.x0;
        let x = num / den;
        x.is_finite().then_some(x)
    }

    /// Same line rotated about `pivot` with its slope multiplied by `factor`.
    pub fn rotated(&self, pivot: T, factor: T) -> Self {
        Line {
            x0: pivot,
            y0: self.eval(pivot),
            slope: self.slope * factor,
        }
    }
}
