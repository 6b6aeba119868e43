#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons deliberately reject NaN

//! Adaptive rejection Metropolis samplers for univariate targets.
//!
//! The core is generic over the scalar type ([`Scalar`]: `f32` or `f64`);
//! the aliases at the bottom fix it to `f64` (and `f32` with a `32` suffix).

pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod num;
pub mod samplers;
pub mod target;

pub use diagnostics::{
    acceptance_rate, discrepancy, lag1_correlation, mean_and_std, summarize, QuadratureGrid,
    RunSummary,
};
pub use envelope::{
    Construction, Line, Piece, PieceForm, PiecewiseProposal, Procedure, StepBound, SupportSet,
};
pub use error::{Error, Result};
pub use num::Scalar;
pub use samplers::{
    a2rms_next, arms_next, ars_next, ia2rms_next, mh_alpha, run_chain, Counters, SamplerConfig,
    SamplerKind, SamplerState, TailInflation,
};
pub use target::{gaussian_mixture, Domain, FnTarget, GaussianMixture, LogDensity, MixtureSpec};

pub type Proposal = PiecewiseProposal<f64>;
pub type Support = SupportSet<f64>;
pub type Mixture = GaussianMixture<f64>;
pub type State = SamplerState<f64>;
pub type Config = SamplerConfig<f64>;
pub type Grid = QuadratureGrid<f64>;
pub type Summary = RunSummary<f64>;

pub type Proposal32 = PiecewiseProposal<f32>;
pub type Support32 = SupportSet<f32>;
pub type Mixture32 = GaussianMixture<f32>;
pub type State32 = SamplerState<f32>;
pub type Config32 = SamplerConfig<f32>;
