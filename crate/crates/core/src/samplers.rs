//! ARS, ARMS, A²RMS and IA²RMS as explicit step functions over [`SamplerState`].
//!
//! Random draws happen in a fixed order within a step: piece choice, the
//! piece's own draws, the RS uniform `u'`, the MH uniform, the second-control
//! uniform `u2`. The MH uniform is only drawn when `alpha < 1` and `u2` only
//! when `pi/p < 1`, so with a dominating proposal every ARMS variant consumes
//! exactly the stream ARS does.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::envelope::{Construction, PiecewiseProposal, Procedure, SupportSet};
use crate::error::{Error, Result};
use crate::num::{uniform, Scalar};
use crate::target::LogDensity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Ars,
    Arms,
    A2rms,
    Ia2rms,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Ars,
        SamplerKind::Arms,
        SamplerKind::A2rms,
        SamplerKind::Ia2rms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Ars => "ars",
            SamplerKind::Arms => "arms",
            SamplerKind::A2rms => "a2rms",
            SamplerKind::Ia2rms => "ia2rms",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "ars" => Ok(SamplerKind::Ars),
            "arms" => Ok(SamplerKind::Arms),
            "a2rms" | "a²rms" => Ok(SamplerKind::A2rms),
            "ia2rms" | "ia²rms" => Ok(SamplerKind::Ia2rms),
            _ => Err(Error::InvalidParameter(format!("unknown sampler `{s}`"))),
        }
    }
}

/// Optional flattening of the exponential tails, `1 - beta * exp(-alpha_decay * t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailInflation<T> {
    pub beta: T,
    pub alpha_decay: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig<T> {
    pub kind: SamplerKind,
    pub construction: Construction<T>,
    /// A²RMS adapts in step 5 while `k < k_stop`.
    pub k_stop: u64,
    pub tail: Option<TailInflation<T>>,
    /// Consecutive RS rejections tolerated within one step.
    pub rejection_limit: u64,
}

impl<T: Scalar> SamplerConfig<T> {
    pub fn new(kind: SamplerKind, construction: impl Into<Construction<T>>) -> Self {
        SamplerConfig {
            kind,
            construction: construction.into(),
            k_stop: u64::MAX,
            tail: None,
            rejection_limit: 1_000_000,
        }
    }

    pub fn with_k_stop(mut self, k_stop: u64) -> Self {
        self.k_stop = k_stop;
        self
    }

    pub fn with_tail_inflation(mut self, beta: T, alpha_decay: T) -> Self {
        self.tail = Some(TailInflation { beta, alpha_decay });
        self
    }

    pub fn with_rejection_limit(mut self, limit: u64) -> Self {
        self.rejection_limit = limit;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// RS rejections that added a support point.
    pub rs_rejections: u64,
    pub second_control_additions: u64,
    pub mh_rejections: u64,
    /// Insertions declined because the point had zero density or duplicated
    /// an existing support point.
    pub skipped_insertions: u64,
}

/// Everything one chain carries between steps.
#[derive(Clone, Debug)]
pub struct SamplerState<T> {
    x_current: T,
    k: u64,
    t: u64,
    support: SupportSet<T>,
    proposal: PiecewiseProposal<T>,
    // Un-inflated proposal, kept only when tail inflation is on.
    base: Option<PiecewiseProposal<T>>,
    config: SamplerConfig<T>,
    counters: Counters,
    m0: usize,
    log_p_current: T,
    log_prop_current: T,
    insertions_at: Vec<u64>,
}

impl<T: Scalar> SamplerState<T> {
    /// Builds the initial proposal from `support` and starts the chain at `x0`.
    pub fn new<D: LogDensity<T>>(
        config: SamplerConfig<T>,
        support: SupportSet<T>,
        x0: T,
        target: &D,
    ) -> Result<Self> {
        if config.kind == SamplerKind::Ars
            && !matches!(
                config.construction.procedure,
                Procedure::Tangent | Procedure::Secant
            )
        {
            return Err(Error::InvalidParameter(format!(
                "ARS needs a dominating construction, got {}",
                config.construction.procedure
            )));
        }
        let log_p_current = target.log_density(x0)?;
        let base = PiecewiseProposal::build(&support, config.construction, target)?;
        let m0 = support.len();
        let mut state = SamplerState {
            x_current: x0,
            k: 0,
            t: 0,
            support,
            proposal: base.clone(),
            base: config.tail.map(|_| base),
            config,
            counters: Counters::default(),
            m0,
            log_p_current,
            log_prop_current: T::zero(),
            insertions_at: Vec::new(),
        };
        state.refresh()?;
        Ok(state)
    }

    pub fn x_current(&self) -> T {
        self.x_current
    }

    /// Chain iteration `k`.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// Proposal generation `t`.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn support(&self) -> &SupportSet<T> {
        &self.support
    }

    pub fn proposal(&self) -> &PiecewiseProposal<T> {
        &self.proposal
    }

    pub fn config(&self) -> &SamplerConfig<T> {
        &self.config
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn initial_support_len(&self) -> usize {
        self.m0
    }

    pub fn log_p_current(&self) -> T {
        self.log_p_current
    }

    pub fn log_prop_current(&self) -> T {
        self.log_prop_current
    }

    /// Chain iteration at which each support point was added, in order.
    pub fn insertions_at(&self) -> &[u64] {
        &self.insertions_at
    }

    // Re-derives the effective proposal and the cached W_t(x_k) after t or
    // the support changed.
    fn refresh(&mut self) -> Result<()> {
        if let (Some(base), Some(tail)) = (&mut self.base, self.config.tail) {
            base.set_generation(self.t);
            self.proposal = base.inflate_tails(tail.beta, tail.alpha_decay, self.t)?;
        }
        self.proposal.set_generation(self.t);
        self.log_prop_current = self.proposal.ln_pdf(self.x_current);
        Ok(())
    }

    // Adds `x` to the support unless it has zero density or is already there.
    // The caller decides when t moves.
    fn add_point<D: LogDensity<T>>(&mut self, x: T, log_p: T, target: &D) -> Result<bool> {
        if !log_p.is_finite() || self.support.contains(x) {
            self.counters.skipped_insertions += 1;
            return Ok(false);
        }
        let current = self.base.as_ref().unwrap_or(&self.proposal);
        let next = current.insert_with_value(&mut self.support, x, log_p, target)?;
        match &mut self.base {
            Some(base) => *base = next,
            None => self.proposal = next,
        }
        self.insertions_at.push(self.k);
        Ok(true)
    }

    fn wrap(&self, e: Error) -> Error {
        match e {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                k: self.k,
                t: self.t,
                m: self.support.len(),
                source: Box::new(e),
            },
        }
    }

    /// Steps 2–4 shared by all samplers: draw from the proposal until the RS
    /// test accepts, inserting every rejected candidate. Returns
    /// `(x', V(x'), W_t(x'))`.
    fn rs_loop<D: LogDensity<T>, R: Rng + ?Sized>(
        &mut self,
        target: &D,
        rng: &mut R,
        check_dominance: bool,
    ) -> Result<(T, T, T)> {
        let mut consecutive = 0u64;
        loop {
            let (x, log_prop) = self.proposal.sample(rng);
            let log_p = target.ln_pdf(x);
            if check_dominance && log_p - log_prop > T::lit(1e-10) {
                return Err(Error::DominanceViolation {
                    x: x.as_f64(),
                    log_p: log_p.as_f64(),
                    log_prop: log_prop.as_f64(),
                });
            }
            let u: T = uniform(rng);
            if u < (log_p - log_prop).exp() {
                return Ok((x, log_p, log_prop));
            }
            consecutive += 1;
            if consecutive >= self.config.rejection_limit {
                return Err(Error::RejectionLimit(consecutive));
            }
            if self.add_point(x, log_p, target)? {
                self.counters.rs_rejections += 1;
                self.t += 1;
                self.refresh()?;
            }
        }
    }

    // MH step; returns whether x' was accepted.
    fn mh_step<R: Rng + ?Sized>(&mut self, x: T, log_p: T, log_prop: T, rng: &mut R) -> bool {
        let alpha = mh_alpha(log_p, self.log_p_current, log_prop, self.log_prop_current);
        let accept = alpha >= T::one() || uniform::<T, R>(rng) < alpha;
        if accept {
            self.x_current = x;
            self.log_p_current = log_p;
            self.log_prop_current = log_prop;
        } else {
            self.counters.mh_rejections += 1;
        }
        accept
    }

    // Second control: insert `y` with probability `1 - pi/p`.
    fn second_control<D: LogDensity<T>, R: Rng + ?Sized>(
        &mut self,
        y: T,
        log_p: T,
        log_prop: T,
        target: &D,
        rng: &mut R,
    ) -> Result<()> {
        // p(y) = 0 counts as an infinite ratio: nothing to learn there.
        if log_p == T::neg_infinity() {
            return Ok(());
        }
        let ratio = (log_prop - log_p).exp();
        if ratio >= T::one() {
            return Ok(());
        }
        let u2: T = uniform(rng);
        if u2 > ratio && self.add_point(y, log_p, target)? {
            self.counters.second_control_additions += 1;
        }
        Ok(())
    }

    fn finish_step(&mut self) -> Result<T> {
        self.k += 1;
        self.t += 1;
        self.refresh()?;
        Ok(self.x_current)
    }

    fn ars<D: LogDensity<T>, R: Rng + ?Sized>(&mut self, target: &D, rng: &mut R) -> Result<T> {
        let (x, log_p, log_prop) = self.rs_loop(target, rng, true)?;
        self.x_current = x;
        self.log_p_current = log_p;
        self.log_prop_current = log_prop;
        self.k += 1;
        Ok(x)
    }

    fn arms<D: LogDensity<T>, R: Rng + ?Sized>(&mut self, target: &D, rng: &mut R) -> Result<T> {
        let (x, log_p, log_prop) = self.rs_loop(target, rng, false)?;
        self.mh_step(x, log_p, log_prop, rng);
        self.finish_step()
    }

    fn a2rms<D: LogDensity<T>, R: Rng + ?Sized>(&mut self, target: &D, rng: &mut R) -> Result<T> {
        let (x, log_p, log_prop) = self.rs_loop(target, rng, false)?;
        self.mh_step(x, log_p, log_prop, rng);
        if self.k < self.config.k_stop {
            self.second_control(x, log_p, log_prop, target, rng)?;
        }
        self.finish_step()
    }

    fn ia2rms<D: LogDensity<T>, R: Rng + ?Sized>(
        &mut self,
        target: &D,
        rng: &mut R,
    ) -> Result<T> {
        let (x, log_p, log_prop) = self.rs_loop(target, rng, false)?;
        // Read after the RS loop: W_t(x_k) may have moved with the support.
        let (x_prev, lp_prev, lq_prev) = (self.x_current, self.log_p_current, self.log_prop_current);
        let (y, lp_y, lq_y) = if self.mh_step(x, log_p, log_prop, rng) {
            (x_prev, lp_prev, lq_prev)
        } else {
            (x, log_p, log_prop)
        };
        if !self.support.contains(y) {
            self.second_control(y, lp_y, lq_y, target, rng)?;
        }
        self.finish_step()
    }

    /// One step of the configured sampler.
    pub fn step<D: LogDensity<T>, R: Rng + ?Sized>(&mut self, target: &D, rng: &mut R) -> Result<T> {
        let r = match self.config.kind {
            SamplerKind::Ars => self.ars(target, rng),
            SamplerKind::Arms => self.arms(target, rng),
            SamplerKind::A2rms => self.a2rms(target, rng),
            SamplerKind::Ia2rms => self.ia2rms(target, rng),
        };
        r.map_err(|e| self.wrap(e))
    }
}

/// `min[1, p' min(p_k, pi_k) / (p_k min(p', pi'))]`, evaluated in log space.
///
/// Exactly 1 whenever the proposal dominates at both points, 0 when
/// `p(x') = 0`.
pub fn mh_alpha<T: Scalar>(log_p_new: T, log_p_cur: T, log_prop_new: T, log_prop_cur: T) -> T {
    if log_p_new == T::neg_infinity() {
        return T::zero();
    }
    let log_ratio =
        (log_p_new - log_p_new.min(log_prop_new)) + (log_p_cur.min(log_prop_cur) - log_p_cur);
    if log_ratio >= T::zero() {
        T::one()
    } else {
        log_ratio.exp()
    }
}

fn step_as<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    kind: SamplerKind,
    state: &mut SamplerState<T>,
    target: &D,
    rng: &mut R,
) -> Result<T> {
    if state.config.kind != kind {
        return Err(state.wrap(Error::InvalidParameter(format!(
            "state configured for {}, stepped as {kind}",
            state.config.kind
        ))));
    }
    state.step(target, rng)
}

/// Next exact sample from the target (ARS).
pub fn ars_next<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    state: &mut SamplerState<T>,
    target: &D,
    rng: &mut R,
) -> Result<T> {
    step_as(SamplerKind::Ars, state, target, rng)
}

pub fn arms_next<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    state: &mut SamplerState<T>,
    target: &D,
    rng: &mut R,
) -> Result<T> {
    step_as(SamplerKind::Arms, state, target, rng)
}

pub fn a2rms_next<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    state: &mut SamplerState<T>,
    target: &D,
    rng: &mut R,
) -> Result<T> {
    step_as(SamplerKind::A2rms, state, target, rng)
}

pub fn ia2rms_next<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    state: &mut SamplerState<T>,
    target: &D,
    rng: &mut R,
) -> Result<T> {
    step_as(SamplerKind::Ia2rms, state, target, rng)
}

/// Runs `n` steps from `x0` and returns the chain with the final state.
///
/// `x0` consumes no randomness; for ARS it is only the nominal state before
/// the first sample.
pub fn run_chain<T: Scalar, D: LogDensity<T>, R: Rng + ?Sized>(
    config: SamplerConfig<T>,
    target: &D,
    s0: SupportSet<T>,
    x0: T,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<T>, SamplerState<T>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    let mut state = SamplerState::new(config, s0, x0, target)?;
    let mut chain = Vec::with_capacity(n);
    for _ in 0..n {
        chain.push(state.step(target, rng)?);
    }
    Ok((chain, state))
}
