//! Oracles shared by the integration tests. Nothing here reuses the closed
//! forms under test: areas come from adaptive Simpson on `exp(W_t)`, CDFs
//! from statrs or from direct integration.
#![allow(dead_code)]

use arms_core::{LogDensity, Proposal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a >= b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Finite span carrying all but ~e^-50 of an unbounded tail ending at `end`.
fn truncate_tail(prop: &Proposal, end: f64, leftwards: bool) -> f64 {
    let w_end = prop.ln_pdf(end);
    let mut len = 1.0;
    loop {
        let x = if leftwards { end - len } else { end + len };
        if prop.ln_pdf(x) < w_end - 50.0 || len > 1e6 {
            return x;
        }
        len *= 2.0;
    }
}

/// Integration span of piece `i` (tails truncated).
pub fn piece_span(prop: &Proposal, i: usize) -> (f64, f64) {
    let p = &prop.pieces()[i];
    let lo = if p.lo.is_finite() { p.lo } else { truncate_tail(prop, p.hi, true) };
    let hi = if p.hi.is_finite() { p.hi } else { truncate_tail(prop, p.lo, false) };
    (lo, hi)
}

/// Area of piece `i` by quadrature of `exp(W_t)`, relative tolerance `rel`.
pub fn piece_area_oracle(prop: &Proposal, i: usize, rel: f64) -> f64 {
    let (lo, hi) = piece_span(prop, i);
    let f = |x: f64| prop.ln_pdf(x.clamp(lo, hi)).exp();
    // crude scale for the absolute tolerance
    let n = 64;
    let h = (hi - lo) / n as f64;
    let rough: f64 = (0..=n).map(|k| f(lo + k as f64 * h)).sum::<f64>() * h;
    // integrate in sub-cells so kinks at internal breakpoints are resolved
    let sub = 16;
    let w = (hi - lo) / sub as f64;
    (0..sub)
        .map(|k| {
            let a = lo + k as f64 * w;
            let b = if k + 1 == sub { hi } else { a + w };
            adaptive_simpson(&f, a, b, rel * rough.max(1e-300) / sub as f64)
        })
        .sum()
}

/// Quadrature CDF of the normalized proposal, for binning tests.
pub struct EnvelopeCdf<'a> {
    prop: &'a Proposal,
    // (x, cumulative mass) knots, increasing
    knots: Vec<(f64, f64)>,
    total: f64,
}

impl<'a> EnvelopeCdf<'a> {
    pub fn new(prop: &'a Proposal) -> Self {
        let mut knots = Vec::new();
        let mut acc = 0.0;
        for i in 0..prop.pieces().len() {
            let (lo, hi) = piece_span(prop, i);
            let f = |x: f64| prop.ln_pdf(x).exp();
            let cells = 64;
            let h = (hi - lo) / cells as f64;
            if knots.is_empty() {
                knots.push((lo, 0.0));
            }
            for k in 0..cells {
                let a = lo + k as f64 * h;
                let b = if k + 1 == cells { hi } else { a + h };
                acc += adaptive_simpson(&f, a, b, 1e-14);
                knots.push((b, acc));
            }
        }
        EnvelopeCdf { prop, knots, total: acc }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.knots.partition_point(|k| k.0 <= x);
        if i == 0 {
            return 0.0;
        }
        if i == self.knots.len() {
            return 1.0;
        }
        let (a, base) = self.knots[i - 1];
        let f = |t: f64| self.prop.ln_pdf(t).exp();
        (base + adaptive_simpson(&f, a, x, 1e-14)) / self.total
    }

    /// Approximate `q`-quantile by interpolation between knots.
    pub fn quantile(&self, q: f64) -> f64 {
        let target = q * self.total;
        let i = self.knots.partition_point(|k| k.1 < target).clamp(1, self.knots.len() - 1);
        let (x0, c0) = self.knots[i - 1];
        let (x1, c1) = self.knots[i];
        if c1 <= c0 {
            return x0;
        }
        x0 + (x1 - x0) * (target - c0) / (c1 - c0)
    }
}

/// Pearson χ² p-value of `samples` against `bins` roughly equiprobable bins
/// of the normalized envelope.
pub fn chi_square_p(cdf: &EnvelopeCdf<'_>, samples: &[f64], bins: usize) -> f64 {
    let mut edges: Vec<f64> = (1..bins).map(|k| cdf.quantile(k as f64 / bins as f64)).collect();
    edges.dedup();
    let mut probs = Vec::with_capacity(edges.len() + 1);
    let mut prev = 0.0;
    for &e in &edges {
        let c = cdf.cdf(e);
        probs.push(c - prev);
        prev = c;
    }
    probs.push(1.0 - prev);
    let mut counts = vec![0usize; probs.len()];
    for &x in samples {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    let n = samples.len() as f64;
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = n * p;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (probs.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// `max(-x^2/2, -(x-6)^2/2)` and the support that traps `(-1, 3]` under P1.
pub fn trapped_scenario() -> (arms_core::FnTarget<f64>, Vec<f64>) {
    let target = arms_core::FnTarget::new(|x: f64| (-0.5 * x * x).max(-0.5 * (x - 6.0) * (x - 6.0)));
    (target, vec![-3.0, -1.0, 3.0, 5.0, 8.0])
}
