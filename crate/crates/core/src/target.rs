//! Unnormalized univariate targets and the Gaussian-mixture benchmark.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// A single interval `[lo, hi]`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Domain<T> {
    /// The whole real line.
    pub fn real() -> Self {
        Domain {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "domain [{lo}, {hi}] is empty"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub fn contains(&self, x: T) -> bool {
        x.is_finite() && x >= self.lo && x <= self.hi
    }

    pub fn bounded_below(&self) -> bool {
        self.lo.is_finite()
    }

    pub fn bounded_above(&self) -> bool {
        self.hi.is_finite()
    }

    pub(crate) fn check(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                x: x.as_f64(),
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
            })
        }
    }
}

/// Unnormalized log-density `V(x) = ln p(x)` on a single interval.
///
/// Implementations must be deterministic and side-effect free, return a
/// finite value wherever `p(x) > 0` and `-inf` where `p(x) = 0`.
pub trait LogDensity<T: Scalar> {
    /// `V(x)` without the domain check.
    fn ln_pdf(&self, x: T) -> T;

    /// `dV/dx`, when available in closed form.
    fn ln_pdf_derivative(&self, _x: T) -> Option<T> {
        None
    }

    fn domain(&self) -> Domain<T> {
        Domain::real()
    }

    /// `∫ exp(V)` over the domain outside `[lo, hi]`, when known exactly.
    fn mass_outside(&self, _lo: T, _hi: T) -> Option<T> {
        None
    }

    /// `V(x)`, failing with [`Error::Domain`] outside the domain.
    fn log_density(&self, x: T) -> Result<T> {
        self.domain().check(x)?;
        Ok(self.ln_pdf(x))
    }
}

impl<T: Scalar, D: LogDensity<T> + ?Sized> LogDensity<T> for &D {
    fn ln_pdf(&self, x: T) -> T {
        (**self).ln_pdf(x)
    }
    fn ln_pdf_derivative(&self, x: T) -> Option<T> {
        (**self).ln_pdf_derivative(x)
    }
    fn domain(&self) -> Domain<T> {
        (**self).domain()
    }
    fn mass_outside(&self, lo: T, hi: T) -> Option<T> {
        (**self).mass_outside(lo, hi)
    }
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Target defined by closures.
#[derive(Clone)]
pub struct FnTarget<T> {
    log_density: ScalarFn<T>,
    derivative: Option<ScalarFn<T>>,
    domain: Domain<T>,
}

impl<T: Scalar> FnTarget<T> {
    pub fn new(log_density: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        FnTarget {
            log_density: Arc::new(log_density),
            derivative: None,
            domain: Domain::real(),
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_domain(mut self, domain: Domain<T>) -> Self {
        self.domain = domain;
        self
    }

    /// `exp(-x^2 / 2)` with its derivative.
    pub fn standard_normal() -> Self {
        let half = T::lit(0.5);
        FnTarget::new(move |x: T| -half * x * x).with_derivative(|x: T| -x)
    }
}

impl<T: Scalar> fmt::Debug for FnTarget<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnTarget")
            .field("has_derivative", &self.derivative.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl<T: Scalar> LogDensity<T> for FnTarget<T> {
    fn ln_pdf(&self, x: T) -> T {
        (self.log_density)(x)
    }
    fn ln_pdf_derivative(&self, x: T) -> Option<T> {
        self.derivative.as_ref().map(|d| d(x))
    }
    fn domain(&self) -> Domain<T> {
        self.domain
    }
}

/// Weights, means and variances of a univariate Gaussian mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec<T> {
    pub weights: Vec<T>,
    pub means: Vec<T>,
    pub variances: Vec<T>,
}

impl<T: Scalar> MixtureSpec<T> {
    /// `0.3 N(-5, 1) + 0.3 N(1, 1) + 0.4 N(7, 1)`.
    pub fn benchmark() -> Self {
        MixtureSpec {
            weights: vec![T::lit(0.3), T::lit(0.3), T::lit(0.4)],
            means: vec![T::lit(-5.0), T::lit(1.0), T::lit(7.0)],
            variances: vec![T::one(); 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(Error::Spec("mixture has no components".into()));
        }
        if self.means.len() != n || self.variances.len() != n {
            return Err(Error::Spec(format!(
                "component counts differ: {} weights, {} means, {} variances",
                n,
                self.means.len(),
                self.variances.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > T::zero())) {
            return Err(Error::Spec(format!("weight {w} is not positive")));
        }
        if let Some(v) = self
            .variances
            .iter()
            .find(|v| !(**v > T::zero()) || !v.is_finite())
        {
            return Err(Error::Spec(format!("variance {v} is not positive")));
        }
        if let Some(m) = self.means.iter().find(|m| !m.is_finite()) {
            return Err(Error::Spec(format!("mean {m} is not finite")));
        }
        let total = self.weights.iter().fold(0.0, |acc, w| acc + w.as_f64());
        if (total - 1.0).abs() > 1e-12_f64.max(4.0 * T::epsilon().as_f64() * n as f64) {
            return Err(Error::Spec(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Component<T> {
    log_scale: T,
    mean: T,
    inv_var: T,
}

/// Normalized Gaussian mixture density, evaluated with log-sum-exp.
#[derive(Clone, Debug)]
pub struct GaussianMixture<T> {
    spec: MixtureSpec<T>,
    components: Vec<Component<T>>,
}

/// Builds the mixture target from a validated specification.
pub fn gaussian_mixture<T: Scalar>(spec: MixtureSpec<T>) -> Result<GaussianMixture<T>> {
    GaussianMixture::new(spec)
}

impl<T: Scalar> GaussianMixture<T> {
    pub fn new(spec: MixtureSpec<T>) -> Result<Self> {
        spec.validate()?;
        let half = T::lit(0.5);
        let two_pi = T::TAU();
        let components = spec
            .weights
            .iter()
            .zip(&spec.means)
            .zip(&spec.variances)
            .map(|((&w, &mean), &var)| Component {
                log_scale: w.ln() - half * (two_pi * var).ln(),
                mean,
                inv_var: var.recip(),
            })
            .collect();
        Ok(GaussianMixture { spec, components })
    }

    pub fn benchmark() -> Self {
        Self::new(MixtureSpec::benchmark()).expect("benchmark mixture is valid")
    }

    pub fn spec(&self) -> &MixtureSpec<T> {
        &self.spec
    }

    /// `sum_i w_i mu_i`.
    pub fn mean(&self) -> T {
        self.spec
            .weights
            .iter()
            .zip(&self.spec.means)
            .fold(T::zero(), |acc, (&w, &m)| acc + w * m)
    }

    #[inline]
    fn exponent(&self, c: &Component<T>, x: T) -> T {
        let d = x - c.mean;
        c.log_scale - T::lit(0.5) * d * d * c.inv_var
    }

    fn max_exponent(&self, x: T) -> T {
        self.components
            .iter()
            .map(|c| self.exponent(c, x))
            .fold(T::neg_infinity(), T::max)
    }
}

impl<T: Scalar> LogDensity<T> for GaussianMixture<T> {
    fn ln_pdf(&self, x: T) -> T {
        let max = self.max_exponent(x);
        if !max.is_finite() {
            return T::neg_infinity();
        }
        let sum = self
            .components
            .iter()
            .fold(T::zero(), |acc, c| acc + (self.exponent(c, x) - max).exp());
        max + sum.ln()
    }

    fn ln_pdf_derivative(&self, x: T) -> Option<T> {
        let max = self.max_exponent(x);
        if !max.is_finite() {
            return Some(T::nan());
        }
        let (num, den) = self.components.iter().fold((T::zero(), T::zero()), |(n, d), c| {
            let r = (self.exponent(c, x) - max).exp();
            (n - r * (x - c.mean) * c.inv_var, d + r)
        });
        Some(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_peak_is_zero() {
        let t = FnTarget::<f64>::standard_normal();
        assert_eq!(t.log_density(0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_violation_is_reported() {
        let t = FnTarget::<f64>::standard_normal().with_domain(Domain::new(0.0, 1.0).unwrap());
        assert!(matches!(t.log_density(2.0), Err(Error::Domain { .. })));
        assert!(matches!(t.log_density(f64::NAN), Err(Error::Domain { .. })));
        assert!(t.log_density(1.0).is_ok());
    }

    #[test]
    fn benchmark_mean_is_1_6() {
        let m = GaussianMixture::<f64>::benchmark();
        assert!((m.mean() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn mixture_far_tails_decrease_to_minus_infinity() {
        let m = GaussianMixture::<f64>::benchmark();
        let mut prev = m.ln_pdf(12.0);
        for x in [20.0, 50.0, 1e3, 1e10] {
            let v = m.ln_pdf(x);
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(m.ln_pdf(1e300), f64::NEG_INFINITY);
        assert_eq!(m.ln_pdf(-1e300), f64::NEG_INFINITY);
        assert!(m.ln_pdf(-30.0) < m.ln_pdf(-20.0));
    }

    #[test]
    fn single_component_matches_gaussian_kernel() {
        let m = gaussian_mixture(MixtureSpec {
            weights: vec![1.0],
            means: vec![0.0],
            variances: vec![1.0],
        })
        .unwrap();
        let offset = m.ln_pdf(0.0);
        for i in -50..=50 {
            let x = i as f64 * 0.2;
            assert!((m.ln_pdf(x) - offset - (-0.5 * x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_is_even() {
        let m = gaussian_mixture(MixtureSpec {
            weights: vec![0.5, 0.5],
            means: vec![-3.0, 3.0],
            variances: vec![1.0, 1.0],
        })
        .unwrap();
        for i in 0..=100 {
            let x = i as f64 * 0.13;
            assert!((m.ln_pdf(x) - m.ln_pdf(-x)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_errors() {
        let bad_len = MixtureSpec {
            weights: vec![0.5, 0.5],
            means: vec![0.0],
            variances: vec![1.0, 1.0],
        };
        assert!(matches!(gaussian_mixture(bad_len), Err(Error::Spec(_))));
        let bad_var = MixtureSpec {
            weights: vec![1.0],
            means: vec![0.0],
            variances: vec![0.0],
        };
        assert!(matches!(gaussian_mixture(bad_var), Err(Error::Spec(_))));
        let bad_sum = MixtureSpec {
            weights: vec![0.5, 0.4],
            means: vec![0.0, 1.0],
            variances: vec![1.0, 1.0],
        };
        assert!(matches!(gaussian_mixture(bad_sum), Err(Error::Spec(_))));
    }

    #[test]
    fn far_separated_components_do_not_underflow() {
        // 80 sigma apart: naive summation of densities underflows to 0 at the midpoint
        let m = gaussian_mixture(MixtureSpec {
            weights: vec![0.5, 0.5],
            means: vec![-40.0, 40.0],
            variances: vec![1.0, 1.0],
        })
        .unwrap();
        let v: f64 = m.ln_pdf(0.0);
        assert!(v.is_finite());
        assert!((v - (-800.0 - 0.5 * std::f64::consts::TAU.ln())).abs() < 1e-9);
    }
}
