use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::target::LogDensity;

/// Minimum separation between support points: `1e-9 * max(1, |s|)`.
#[inline]
pub fn duplicate_tolerance<T: Scalar>(s: T) -> T {
    T::lit(1e-9) * s.abs().max(T::one())
}

/// Sorted support abscissas with cached log-density values.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet<T> {
    points: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> SupportSet<T> {
    /// Sorts `points` and evaluates the target at each of them.
    pub fn new<D: LogDensity<T>>(points: impl IntoIterator<Item = T>, target: &D) -> Result<Self> {
        let mut set = SupportSet {
            points: Vec::new(),
            values: Vec::new(),
        };
        for x in points {
            set.insert(x, target)?;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Point closer than the duplicate tolerance to `x`, if any.
    pub fn near(&self, x: T) -> Option<T> {
        let i = self.points.partition_point(|&s| s < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|j| self.points.get(j).copied())
            .find(|&s| (x - s).abs() < duplicate_tolerance(s))
    }

    /// Membership up to the duplicate tolerance.
    pub fn contains(&self, x: T) -> bool {
        self.near(x).is_some()
    }

    /// Inserts `x`, evaluating the target there. Returns the sorted index.
    pub fn insert<D: LogDensity<T>>(&mut self, x: T, target: &D) -> Result<usize> {
        let value = target.log_density(x)?;
        self.insert_with_value(x, value)
    }

    /// Inserts `x` with an already computed `V(x)`.
    pub fn insert_with_value(&mut self, x: T, value: T) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::NonFiniteValue {
                x: x.as_f64(),
                value: value.as_f64(),
            });
        }
        if value.is_nan() || value == T::infinity() {
            return Err(Error::NonFiniteValue {
                x: x.as_f64(),
                value: value.as_f64(),
            });
        }
        if let Some(existing) = self.near(x) {
            return Err(Error::DuplicatePoint {
                x: x.as_f64(),
                existing: existing.as_f64(),
            });
        }
        let i = self.points.partition_point(|&s| s < x);
        self.points.insert(i, x);
        self.values.insert(i, value);
        Ok(i)
    }

    pub(crate) fn remove(&mut self, i: usize) {
        self.points.remove(i);
        self.values.remove(i);
    }
}
