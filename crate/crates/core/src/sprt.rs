//! Wald sequential probability ratio test between the two observers'
//! prediction tracks.
//!
//! Each game round contributes one log-likelihood-ratio term
//! `ln(p_wigner / p_friend)` for the outcome that actually occurred. The
//! running sum is compared against symmetric thresholds
//! `±ln((1 - ε)/ε)`; meeting or exceeding the upper threshold accepts
//! Wigner's track, meeting or falling below the lower one accepts the
//! friend's. Decisions are absorbing.
//!
//! The log-likelihood ratio is an extended real: a zero probability on
//! exactly one side pushes it to `±inf` and settles the test immediately.
//! It is never NaN, because an outcome impossible under both tracks is
//! rejected as an error before it can contribute.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SprtError {
    #[error("epsilon {0} outside the open interval (0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("theta {0} outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("outcome index {0} out of range for a two-outcome measurement")]
    OutcomeIndexOutOfRange(usize),
    #[error("outcome has probability zero under both prediction tracks")]
    InconsistentOutcome,
    #[error("test already reached a decision")]
    AlreadyDecided,
}

/// Verdict of the running test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    AcceptWigner,
    AcceptFriend,
    Continue,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Decision::AcceptWigner => "accept_wigner",
            Decision::AcceptFriend => "accept_friend",
            Decision::Continue => "continue",
        };
        f.write_str(s)
    }
}

/// Immutable snapshot of a running sequential test.
///
/// [`SprtState::observe`] returns the successor state rather than
/// mutating, so traces of a test are just vectors of snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtState {
    log_likelihood: f64,
    n0: u64,
    n1: u64,
    epsilon: f64,
    upper: f64,
    lower: f64,
    decision: Decision,
}

impl SprtState {
    /// A fresh test with symmetric error budget `epsilon` per side.
    pub fn new(epsilon: f64) -> Result<Self, SprtError> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(SprtError::EpsilonOutOfRange(epsilon));
        }
        let upper = ((1.0 - epsilon) / epsilon).ln();
        Ok(Self {
            log_likelihood: 0.0,
            n0: 0,
            n1: 0,
            epsilon,
            upper,
            lower: -upper,
            decision: Decision::Continue,
        })
    }

    /// Folds in one observed outcome with its probability under each track.
    ///
    /// `outcome_index` is 0 or 1 and only drives the `n0`/`n1` counters;
    /// the likelihood term uses the probabilities as given. A probability
    /// of zero on one side saturates the ratio to `±inf`, zero on both
    /// sides is an error, and updating a decided test is an error.
    pub fn observe(
        &self,
        outcome_index: usize,
        p_wigner: f64,
        p_friend: f64,
    ) -> Result<Self, SprtError> {
        if self.decision != Decision::Continue {
            return Err(SprtError::AlreadyDecided);
        }
        if outcome_index > 1 {
            return Err(SprtError::OutcomeIndexOutOfRange(outcome_index));
        }
        for p in [p_wigner, p_friend] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SprtError::InvalidProbability(p));
            }
        }
        let term = match (p_wigner == 0.0, p_friend == 0.0) {
            (true, true) => return Err(SprtError::InconsistentOutcome),
            (true, false) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            (false, false) => (p_wigner / p_friend).ln(),
        };
        let mut next = *self;
        // self.log_likelihood is finite here (an infinite value is always
        // accompanied by a decision), so the sum is never NaN.
        next.log_likelihood += term;
        match outcome_index {
            0 => next.n0 += 1,
            _ => next.n1 += 1,
        }
        next.decision = if next.log_likelihood >= next.upper {
            Decision::AcceptWigner
        } else if next.log_likelihood <= next.lower {
            Decision::AcceptFriend
        } else {
            Decision::Continue
        };
        Ok(next)
    }

    /// Running log-likelihood ratio, possibly `±inf`.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Counts of observed first and second outcomes.
    pub fn counts(&self) -> (u64, u64) {
        (self.n0, self.n1)
    }

    pub fn rounds(&self) -> u64 {
        self.n0 + self.n1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(lower, upper)` decision thresholds.
    pub fn thresholds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn decision(&self) -> Decision {
        self.decision
    }

    pub fn is_decided(&self) -> bool {
        self.decision != Decision::Continue
    }
}

/// Number of runs an all-first-outcome sequence needs to accept Wigner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinRuns {
    Finite(u64),
    Diverges,
}

impl fmt::Display for MinRuns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinRuns::Finite(n) => write!(f, "{n}"),
            MinRuns::Diverges => f.write_str("diverges"),
        }
    }
}

/// Smallest number of consecutive first outcomes that accepts Wigner.
///
/// Under Wigner's track each first outcome adds `ln(1 + cos(πθ/2))` to
/// the log-likelihood ratio while the friend's track predicts both
/// outcomes at one half, so the crossing count is
/// `ceil(ln((1-ε)/ε) / ln(1 + cos(πθ/2)))` with the boundary decided by
/// the same ≥ convention as [`SprtState::observe`]. At θ = 1 the two
/// tracks coincide, each round contributes nothing, and the test never
/// decides; that is the `Diverges` case.
pub fn min_runs_to_accept_wigner(theta: f64, epsilon: f64) -> Result<MinRuns, SprtError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(SprtError::ThetaOutOfRange(theta));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(SprtError::EpsilonOutOfRange(epsilon));
    }
    // cos(πθ/2) via the complementary sine so the θ = 1 endpoint lands on
    // exactly zero; plain cos(π/2) in floating point is ~6e-17 and would
    // disguise the divergence as an absurdly large finite count.
    let cos_term = (std::f64::consts::FRAC_PI_2 * (1.0 - theta)).sin();
    let gain = cos_term.ln_1p();
    if gain <= 0.0 {
        return Ok(MinRuns::Diverges);
    }
    let upper = ((1.0 - epsilon) / epsilon).ln();
    let mut n = (upper / gain).ceil() as u64;
    // Nudge across the boundary when ceil landed a step off in either
    // direction, which floating point division can produce.
    while n > 1 && (n - 1) as f64 * gain >= upper {
        n -= 1;
    }
    while (n as f64) * gain < upper {
        n += 1;
    }
    Ok(MinRuns::Finite(n))
}
