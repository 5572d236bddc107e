//! Seeded rounds of the bubble switching game.
//!
//! Each round re-prepares the spin, lets the friend measure and collapse
//! inside her bubble, runs the leakage interaction, picks one of the two
//! game measurements, commits both players' predictions to a
//! tamper-evident ledger, samples the outcome, and feeds the SPRT
//! referee. A session repeats rounds until the referee decides or a
//! round cap is hit.
//!
//! Two constraints shape the message plumbing. First, everything a
//! bubble sends out must carry no information about the friend's record,
//! so her prediction crosses the boundary in record-relative terms (the
//! probability that the outcome will match her sealed record), which is
//! the same bytes whichever way her measurement went. Second, identical
//! configs must replay bit-identically, so every stochastic choice comes
//! from one named generator with a fixed per-round substream rule.

use crate::protocol::{
    friend_collapse, initial_state, interaction_unitary, measurement_unitary, predict,
    swap_memory, FriendRecord, Measurement, Observer, ObserverAssignment, Prediction,
    PredictionMode, ProtocolConfig, ProtocolError, Stage,
};
use crate::qstate::{Operator, StateVector};
use crate::sprt::{Decision, SprtError, SprtState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod ledger;

pub use ledger::{Ledger, LedgerEntry, LedgerError};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("session already reached a decision or the round cap")]
    SessionFinished,
    #[error("max_rounds must be at least 1")]
    InvalidMaxRounds,
    #[error("the game needs the standard preparation with equal real spin amplitudes")]
    NonstandardPreparation,
    #[error("bubble-relative sampling of M_F needs the friend's record")]
    RecordRequiredForOracle,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sprt(#[from] SprtError),
    #[error(transparent)]
    Serialization(#[from] serde_json::Error),
}

/// How the game picks the measurement each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementPolicy {
    AlwaysMf,
    AlwaysMw,
    #[serde(rename = "random")]
    RandomUniform,
}

/// Where outcomes come from.
///
/// `BubbleRelative` is the canonical reading: Wigner's measurement
/// follows his own state assignment, and the repeated measurement always
/// confirms the friend's record. `WignerGlobal` is a non-canonical
/// counterfactual that draws both outcomes from Wigner's global states,
/// as if the friend's bubble had no facts of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    BubbleRelative,
    WignerGlobal,
}

/// Full description of one game session. Equal configs (same seed
/// included) replay to bit-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub protocol: ProtocolConfig,
    pub epsilon: f64,
    pub measurement_policy: MeasurementPolicy,
    pub prediction_mode: PredictionMode,
    pub oracle_mode: OracleMode,
    pub seed: u64,
    pub max_rounds: u64,
    /// Apply the memory swap before M_F rounds too, not only before M_W
    /// (it is provably invisible to both measurements either way).
    #[serde(default)]
    pub swap_in_both_branches: bool,
}

impl GameConfig {
    /// Canonical game setup: always measure M_W, as-published
    /// predictions, bubble-relative oracle, no optional registers.
    pub fn new(theta: f64, epsilon: f64, seed: u64) -> Result<Self, GameError> {
        let config = Self {
            protocol: ProtocolConfig::new(theta)?,
            epsilon,
            measurement_policy: MeasurementPolicy::AlwaysMw,
            prediction_mode: PredictionMode::AsPublished,
            oracle_mode: OracleMode::BubbleRelative,
            seed,
            max_rounds: 10_000,
            swap_in_both_branches: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        self.protocol.validate()?;
        SprtState::new(self.epsilon)?;
        if self.max_rounds == 0 {
            return Err(GameError::InvalidMaxRounds);
        }
        // The published per-round probabilities all assume the standard
        // equal-amplitude preparation; refuse configs they would not
        // describe rather than silently mislabel the referee's inputs.
        let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        if (self.protocol.alpha - half).norm() > crate::qstate::ALGEBRA_TOL
            || (self.protocol.beta - half).norm() > crate::qstate::ALGEBRA_TOL
        {
            return Err(GameError::NonstandardPreparation);
        }
        Ok(())
    }
}

/// One round as the superreferee sees it afterwards. The friend's record
/// stays a private field: it is part of the audit trail, never part of
/// the serialized inter-bubble messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round_index: u64,
    pub chosen_measurement: Measurement,
    friend_record: FriendRecord,
    pub wigner_prediction: Prediction,
    pub friend_prediction: Prediction,
    /// Outcome label in the measured basis.
    pub outcome: String,
    /// Referee's log-likelihood ratio after this round; ±∞ once a
    /// certain prediction is refuted.
    #[serde(with = "extended_real")]
    pub llr_after: f64,
    pub decision_after: Decision,
}

impl RoundLog {
    pub fn friend_record(&self) -> FriendRecord {
        self.friend_record
    }
}

/// Outcome tallies for one measurement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub rounds: u64,
    pub counts: [u64; 2],
}

impl OutcomeCounts {
    fn record(&mut self, index: usize) {
        self.rounds += 1;
        self.counts[index] += 1;
    }

    /// Empirical frequency of the outcome, `None` before any round.
    pub fn frequency(&self, index: usize) -> Option<f64> {
        (self.rounds > 0).then(|| self.counts[index] as f64 / self.rounds as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalFrequencies {
    pub mf: OutcomeCounts,
    pub mw: OutcomeCounts,
}

/// Everything a finished session hands back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub config: GameConfig,
    pub decision: Decision,
    pub rounds_used: u64,
    pub frequencies: EmpiricalFrequencies,
    /// Hex root checksum of the prediction ledger.
    pub ledger_root: String,
    pub rounds: Vec<RoundLog>,
}

impl SessionReport {
    /// Canonical bytes: compact JSON with declaration-ordered fields and
    /// shortest round-trip float formatting, so equal reports are equal
    /// byte streams.
    pub fn to_canonical_json(&self) -> Result<Vec<u8>, GameError> {
        Ok(serde_json::to_vec(self)?)
    }
}

/// The measurement choice announced to both bubbles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceMessage {
    pub round_index: u64,
    pub measurement: Measurement,
}

/// One player's committed prediction as it crosses the bubble boundary.
///
/// Wigner's probabilities are keyed by absolute outcome labels. The
/// friend's are keyed `match`/`mismatch` relative to her sealed record,
/// which keeps the bytes independent of the record in both prediction
/// modes (her match probability is (1+sin(πθ/2))/2 for M_W and
/// (1+sin²(πθ/2))/2 for M_F whichever record she holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMessage {
    pub round_index: u64,
    pub observer: Observer,
    pub measurement: Measurement,
    pub mode: PredictionMode,
    pub theta: f64,
    pub probabilities: Vec<(String, f64)>,
}

/// Serialized messages committed to the ledger each round, in commit
/// order: the measurement choice, Wigner's prediction, the friend's
/// prediction.
///
/// The returned bytes are a function of (round, measurement, θ, mode)
/// only. Passing either record must produce identical byte streams; the
/// game's tests and the acceptance gate assert exactly that.
pub fn inter_bubble_messages(
    round_index: u64,
    measurement: Measurement,
    theta: f64,
    mode: PredictionMode,
    record: FriendRecord,
) -> Result<Vec<Vec<u8>>, GameError> {
    let choice = ChoiceMessage {
        round_index,
        measurement,
    };
    let wigner = predict(Observer::Wigner, measurement, theta, mode, None)?;
    let friend = predict(Observer::Friend, measurement, theta, mode, Some(record))?;
    let p_match = friend
        .probability(record.index())
        .expect("two-outcome prediction");
    let wigner_message = PredictionMessage {
        round_index,
        observer: Observer::Wigner,
        measurement,
        mode,
        theta,
        probabilities: wigner.probabilities.clone(),
    };
    let friend_message = PredictionMessage {
        round_index,
        observer: Observer::Friend,
        measurement,
        mode,
        theta,
        probabilities: vec![
            ("match".to_owned(), p_match),
            ("mismatch".to_owned(), 1.0 - p_match),
        ],
    };
    Ok(vec![
        serde_json::to_vec(&choice)?,
        serde_json::to_vec(&wigner_message)?,
        serde_json::to_vec(&friend_message)?,
    ])
}

/// Draws round outcomes from fixed per-θ distributions.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeOracle {
    mode: OracleMode,
    /// p(ω₀) under M_W in Wigner's post-interaction state.
    mw_omega0: f64,
    /// p(φ₀) under M_F in Wigner's post-repeat state (wigner-global only).
    mf_phi0: f64,
}

impl OutcomeOracle {
    pub fn new(theta: f64, mode: OracleMode) -> Result<Self, GameError> {
        let mw = predict(Observer::Wigner, Measurement::Mw, theta, PredictionMode::StateDerived, None)?;
        let mf = predict(Observer::Wigner, Measurement::Mf, theta, PredictionMode::StateDerived, None)?;
        Ok(Self {
            mode,
            mw_omega0: mw.probability(0).expect("two-outcome prediction"),
            mf_phi0: mf.probability(0).expect("two-outcome prediction"),
        })
    }

    /// Samples one outcome index.
    ///
    /// Bubble-relative M_F consumes no randomness: the repeated
    /// measurement confirms the record deterministically.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        measurement: Measurement,
        record: Option<FriendRecord>,
        rng: &mut R,
    ) -> Result<usize, GameError> {
        match (measurement, self.mode) {
            (Measurement::Mw, _) => Ok(usize::from(rng.gen::<f64>() >= self.mw_omega0)),
            (Measurement::Mf, OracleMode::BubbleRelative) => record
                .map(FriendRecord::index)
                .ok_or(GameError::RecordRequiredForOracle),
            (Measurement::Mf, OracleMode::WignerGlobal) => {
                Ok(usize::from(rng.gen::<f64>() >= self.mf_phi0))
            }
        }
    }
}

/// One-shot form of [`OutcomeOracle::sample`] for a single round.
pub fn sample_outcome<R: Rng + ?Sized>(
    measurement: Measurement,
    theta: f64,
    oracle_mode: OracleMode,
    friend_record: Option<FriendRecord>,
    rng: &mut R,
) -> Result<usize, GameError> {
    OutcomeOracle::new(theta, oracle_mode)?.sample(measurement, friend_record, rng)
}

/// The per-round generator: one fixed-seed ChaCha8 stream per round.
///
/// Substream `round_index + 1` keeps every round's draws independent of
/// how many draws earlier rounds consumed, so sessions replay stably
/// even if rounds were computed out of order. Stream 0 (the seed's
/// default stream) is left unused.
fn round_rng(seed: u64, round_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round_index + 1);
    rng
}

/// A running game session: fixed config, referee state, ledger, and the
/// precomputed round ingredients.
#[derive(Debug, Clone)]
pub struct Session {
    config: GameConfig,
    /// Post-measurement state of the full register, re-used as the fresh
    /// preparation of every round.
    psi1: StateVector,
    interaction: Operator,
    /// Wigner's predictions per measurement, in [M_F, M_W] order.
    wigner_predictions: [Prediction; 2],
    /// Friend's predictions per record then per measurement.
    friend_predictions: [[Prediction; 2]; 2],
    oracle: OutcomeOracle,
    sprt: SprtState,
    ledger: Ledger,
    rounds: Vec<RoundLog>,
    frequencies: EmpiricalFrequencies,
}

fn measurement_slot(measurement: Measurement) -> usize {
    match measurement {
        Measurement::Mf => 0,
        Measurement::Mw => 1,
    }
}

impl Session {
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        let theta = config.protocol.theta;
        let mode = config.prediction_mode;
        let psi1 = measurement_unitary()
            .apply(&initial_state(&config.protocol)?)
            .map_err(ProtocolError::from)?;
        let predict_friend = |record: FriendRecord, m: Measurement| {
            predict(Observer::Friend, m, theta, mode, Some(record))
        };
        Ok(Self {
            psi1,
            interaction: interaction_unitary(theta)?,
            wigner_predictions: [
                predict(Observer::Wigner, Measurement::Mf, theta, mode, None)?,
                predict(Observer::Wigner, Measurement::Mw, theta, mode, None)?,
            ],
            friend_predictions: [
                [
                    predict_friend(FriendRecord::Phi0, Measurement::Mf)?,
                    predict_friend(FriendRecord::Phi0, Measurement::Mw)?,
                ],
                [
                    predict_friend(FriendRecord::Phi1, Measurement::Mf)?,
                    predict_friend(FriendRecord::Phi1, Measurement::Mw)?,
                ],
            ],
            oracle: OutcomeOracle::new(theta, config.oracle_mode)?,
            sprt: SprtState::new(config.epsilon)?,
            ledger: Ledger::new(),
            rounds: Vec::new(),
            frequencies: EmpiricalFrequencies::default(),
            config,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn rounds(&self) -> &[RoundLog] {
        &self.rounds
    }

    pub fn decision(&self) -> Decision {
        self.sprt.decision()
    }

    pub fn is_finished(&self) -> bool {
        self.sprt.is_decided() || self.rounds.len() as u64 >= self.config.max_rounds
    }

    /// Plays one round: fresh preparation, friend collapse, interaction,
    /// measurement choice, prediction commits, optional memory swap,
    /// outcome, referee update.
    pub fn play_round(&mut self) -> Result<&RoundLog, GameError> {
        if self.is_finished() {
            return Err(GameError::SessionFinished);
        }
        let round_index = self.rounds.len() as u64;
        let theta = self.config.protocol.theta;
        let mut rng = round_rng(self.config.seed, round_index);

        let (record, collapsed) = friend_collapse(&self.psi1, &mut rng)?;
        let branch = self
            .interaction
            .apply(collapsed.state())
            .map_err(ProtocolError::from)?;
        let friend_branch = ObserverAssignment::new(
            Observer::Friend,
            Some(record),
            branch,
            Stage::Psi2,
        )?;

        let measurement = match self.config.measurement_policy {
            MeasurementPolicy::AlwaysMf => Measurement::Mf,
            MeasurementPolicy::AlwaysMw => Measurement::Mw,
            // Drawn before predictions are committed, per the round order.
            MeasurementPolicy::RandomUniform => {
                if rng.gen_bool(0.5) {
                    Measurement::Mw
                } else {
                    Measurement::Mf
                }
            }
        };

        for payload in inter_bubble_messages(
            round_index,
            measurement,
            theta,
            self.config.prediction_mode,
            record,
        )? {
            self.ledger.append(payload);
        }

        // The coherent memory swap precedes M_W whenever the ancilla is
        // part of the register (or unconditionally when configured). It
        // cannot change any outcome statistics, so only the evolved
        // state bookkeeping passes through it.
        if self.config.protocol.include_ancilla
            && (measurement == Measurement::Mw || self.config.swap_in_both_branches)
        {
            let swapped = swap_memory(&friend_branch)?;
            debug_assert_eq!(swapped.stage(), Stage::Psi3);
        }

        let outcome_index = self.oracle.sample(measurement, Some(record), &mut rng)?;
        let slot = measurement_slot(measurement);
        let wigner_prediction = self.wigner_predictions[slot].clone();
        let friend_prediction = self.friend_predictions[record.index()][slot].clone();
        let p_wigner = wigner_prediction
            .probability(outcome_index)
            .expect("two-outcome prediction");
        let p_friend = friend_prediction
            .probability(outcome_index)
            .expect("two-outcome prediction");
        self.sprt = self.sprt.observe(outcome_index, p_wigner, p_friend)?;

        match measurement {
            Measurement::Mf => self.frequencies.mf.record(outcome_index),
            Measurement::Mw => self.frequencies.mw.record(outcome_index),
        }
        self.rounds.push(RoundLog {
            round_index,
            chosen_measurement: measurement,
            friend_record: record,
            wigner_prediction,
            friend_prediction,
            outcome: measurement.outcome_labels()[outcome_index].to_owned(),
            llr_after: self.sprt.log_likelihood(),
            decision_after: self.sprt.decision(),
        });
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// Plays rounds until the referee decides or the cap is reached.
    pub fn run(mut self) -> Result<SessionReport, GameError> {
        while !self.is_finished() {
            self.play_round()?;
        }
        Ok(SessionReport {
            decision: self.sprt.decision(),
            rounds_used: self.rounds.len() as u64,
            frequencies: self.frequencies,
            ledger_root: self.ledger.root_hex(),
            rounds: self.rounds,
            config: self.config,
        })
    }
}

/// Runs one full session from a config.
pub fn run_session(config: &GameConfig) -> Result<SessionReport, GameError> {
    Session::new(config.clone())?.run()
}

/// Replays a ledger's checksum chain.
pub fn verify_ledger(ledger: &Ledger) -> Result<(), LedgerError> {
    ledger.verify()
}

/// Serde adapter for extended reals: finite values as JSON numbers,
/// infinities as the strings `"inf"` / `"-inf"`, NaN rejected.
pub mod extended_real {
    use serde::de::{Deserialize, Deserializer, Error as DeError};
    use serde::ser::{Error as SerError, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_nan() {
            Err(S::Error::custom("NaN is not an extended real"))
        } else if *value == f64::INFINITY {
            serializer.serialize_str("inf")
        } else if *value == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) if x.is_nan() => Err(D::Error::custom("NaN is not an extended real")),
            Raw::Number(x) => Ok(x),
            Raw::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(D::Error::custom(format!("unknown extended real `{other}`"))),
            },
        }
    }
}
