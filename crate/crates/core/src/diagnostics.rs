//! Envelope quality and chain diagnostics: discrepancy `D`, acceptance rate,
//! lag-1 correlation and per-run summaries.

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::samplers::SamplerState;
use crate::target::LogDensity;

/// Uniform grid `lo = x_0 < ... < x_{n-1} = hi` for trapezoid quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureGrid<T> {
    pub lo: T,
    pub hi: T,
    pub n_points: usize,
}

impl<T: Scalar> QuadratureGrid<T> {
    pub fn new(lo: T, hi: T, n_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Grid(format!("[{lo}, {hi}] is not a finite interval")));
        }
        if n_points < 2 {
            return Err(Error::Grid(format!("{n_points} points, need at least 2")));
        }
        Ok(QuadratureGrid { lo, hi, n_points })
    }

    /// `[-20, 22]` with 20001 points: ten standard deviations past the
    /// outermost benchmark component.
    pub fn benchmark() -> Self {
        QuadratureGrid {
            lo: T::lit(-20.0),
            hi: T::lit(22.0),
            n_points: 20_001,
        }
    }

    pub fn spacing(&self) -> T {
        (self.hi - self.lo) / T::lit((self.n_points - 1) as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let h = self.spacing();
        (0..self.n_points).map(move |i| {
            if i + 1 == self.n_points {
                self.hi
            } else {
                self.lo + h * T::lit(i as f64)
            }
        })
    }

    fn trapezoid(&self, values: &[T]) -> T {
        let n = values.len();
        let inner = values[1..n - 1].iter().fold(T::zero(), |a, &v| a + v);
        self.spacing() * (inner + (values[0] + values[n - 1]) * T::lit(0.5))
    }
}

impl<T: Scalar> Default for QuadratureGrid<T> {
    fn default() -> Self {
        Self::benchmark()
    }
}

struct Tabulated<T> {
    pi: Vec<T>,
    p: Vec<T>,
    // Proposal mass beyond the grid, where the target is negligible.
    pi_outside: T,
}

fn negligible_at_ends<T: Scalar>(v: &[T]) -> std::result::Result<(), String> {
    let max = v.iter().copied().fold(T::zero(), T::max);
    if !max.is_finite() {
        return Err(format!("not finite on the grid (max {max})"));
    }
    let floor = T::lit(1e-12) * max;
    let (first, last) = (v[0], v[v.len() - 1]);
    if first > floor || last > floor {
        return Err(format!("not negligible at the grid ends: {first}, {last} vs max {max}"));
    }
    Ok(())
}

// exp(W_t) and p on the grid. The target must vanish at both ends; the
// proposal may keep mass beyond them if it can report that mass exactly.
fn tabulate<T: Scalar, P: LogDensity<T>, D: LogDensity<T>>(
    prop: &P,
    target: &D,
    grid: &QuadratureGrid<T>,
) -> Result<Tabulated<T>> {
    let mut pi = Vec::with_capacity(grid.n_points);
    let mut p = Vec::with_capacity(grid.n_points);
    for x in grid.points() {
        pi.push(prop.ln_pdf(x).exp());
        p.push(target.ln_pdf(x).exp());
    }
    let span = format!("[{}, {}]", grid.lo, grid.hi);
    negligible_at_ends(&p).map_err(|e| Error::Grid(format!("target {e} on {span}")))?;
    let pi_outside = match prop.mass_outside(grid.lo, grid.hi) {
        Some(m) if m.is_finite() => m,
        _ => {
            negligible_at_ends(&pi).map_err(|e| Error::Grid(format!("proposal {e} on {span}")))?;
            T::zero()
        }
    };
    Ok(Tabulated { pi, p, pi_outside })
}

/// `D = ∫ |pi_t(x) - p(x)| dx` by the trapezoid rule on the grid, plus the
/// exact proposal mass outside it when the proposal can report it.
pub fn discrepancy<T: Scalar, P: LogDensity<T>, D: LogDensity<T>>(
    prop: &P,
    target: &D,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    let tab = tabulate(prop, target, grid)?;
    let diff: Vec<T> = tab.pi.iter().zip(&tab.p).map(|(&a, &b)| (a - b).abs()).collect();
    Ok(grid.trapezoid(&diff) + tab.pi_outside)
}

/// `c_p / c_pi`. Exceeds 1 only when the proposal fails to dominate somewhere.
pub fn acceptance_rate<T: Scalar, P: LogDensity<T>, D: LogDensity<T>>(
    prop: &P,
    target: &D,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    let tab = tabulate(prop, target, grid)?;
    let c_pi = grid.trapezoid(&tab.pi) + tab.pi_outside;
    if !(c_pi > T::zero()) {
        return Err(Error::Grid("proposal has no mass on the grid".into()));
    }
    Ok(grid.trapezoid(&tab.p) / c_pi)
}

/// Sample mean and (population) standard deviation.
pub fn mean_and_std<T: Scalar>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::lit(xs.len() as f64);
    let mean = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let var = xs.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean)) / n;
    (mean, var.sqrt())
}

/// Pearson correlation of the pairs `(x_k, x_{k+1})`.
pub fn lag1_correlation<T: Scalar>(chain: &[T]) -> Result<T> {
    if chain.len() < 3 {
        return Err(Error::DegenerateChain("fewer than 3 samples"));
    }
    let a = &chain[..chain.len() - 1];
    let b = &chain[1..];
    let (ma, _) = mean_and_std(a);
    let (mb, _) = mean_and_std(b);
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // Rounding in the means leaves a tiny residual variance on constant chains.
    let scale = chain.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let floor = T::lit(chain.len() as f64) * (T::epsilon() * scale).powi(2) * T::lit(16.0);
    if !(saa > floor && sbb > floor) {
        return Err(Error::DegenerateChain("zero variance"));
    }
    let r = sab / (saa * sbb).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// One run's contribution to a results row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary<T> {
    pub est_mean: T,
    pub chain_std: T,
    /// `None` when the chain is degenerate (constant).
    pub lag1_corr: Option<T>,
    pub initial_m: usize,
    pub final_m: usize,
    pub rs_rejections: u64,
    pub second_control_additions: u64,
    pub final_d: T,
}

/// Summarizes a finished chain and its final proposal.
pub fn summarize<T: Scalar, D: LogDensity<T>>(
    chain: &[T],
    state: &SamplerState<T>,
    target: &D,
    grid: &QuadratureGrid<T>,
) -> Result<RunSummary<T>> {
    let (est_mean, chain_std) = mean_and_std(chain);
    let lag1_corr = match lag1_correlation(chain) {
        Ok(r) => Some(r),
        Err(Error::DegenerateChain(_)) => None,
        Err(e) => return Err(e),
    };
    let c = state.counters();
    Ok(RunSummary {
        est_mean,
        chain_std,
        lag1_corr,
        initial_m: state.initial_support_len(),
        final_m: state.support().len(),
        rs_rejections: c.rs_rejections,
        second_control_additions: c.second_control_additions,
        final_d: discrepancy(state.proposal(), target, grid)?,
    })
}
