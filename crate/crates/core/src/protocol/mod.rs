//! States, unitaries, and predictions of the bubble switching protocol.
//!
//! A spin qubit S is measured by a friend whose memory F records the
//! result in her preferred basis {φ₀, φ₁}. The sealed laboratory then
//! interacts with Wigner's environment W, leaking which-outcome
//! information controlled by a parameter θ: at θ = 0 nothing leaks and
//! Wigner's preferred basis {ω₀, ω₁} ends up correlated with the Bell
//! sector of S and F, while at θ = 1 the environment carries a perfect
//! copy of the outcome. An optional ancilla A can take over the friend's
//! memory by a SWAP, and a second memory F′ stores the result of a
//! repeated measurement.
//!
//! The two observers keep different states of the same rounds. Wigner
//! tracks the global unitary evolution; the friend collapses on her
//! record. Both descriptions are constructed here, along with the
//! outcome predictions each side publishes for the two game measurements
//! M_W (Wigner's basis on W) and M_F (the repeated z measurement).

use crate::qstate::{
    born_probabilities, complete_to_unitary_with_order, project, ComplementOrder,
    MeasurementBasis, Operator, StateError, StateVector, SubsystemLayout, PROBABILITY_TOL,
};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub mod verification;

/// Register labels in canonical tensor order.
pub mod labels {
    /// The measured spin qubit.
    pub const SYSTEM: &str = "S";
    /// The friend's memory, preferred basis {φ₀, φ₁}.
    pub const FRIEND_MEMORY: &str = "F";
    /// Wigner's environment, preferred basis {ω₀, ω₁}.
    pub const WIGNER_ENVIRONMENT: &str = "W";
    /// Auxiliary register that can take over the friend's memory.
    pub const ANCILLA: &str = "A";
    /// The friend's second memory for the repeated measurement.
    pub const REPEAT_MEMORY: &str = "Fp";
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("theta {0} outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("initial amplitudes give |alpha|² + |beta|² = {0}, expected 1")]
    AmplitudesNotNormalized(f64),
    #[error("friend assignments from the measurement stage on need a definite record")]
    RecordRequired,
    #[error("wigner's assignment never carries the friend's record")]
    RecordForbidden,
    #[error("operation needs register `{0}` in the layout")]
    RegisterMissing(&'static str),
    #[error("expected an assignment at stage {expected:?}, found {got:?}")]
    WrongStage { expected: Stage, got: Stage },
    #[error("prediction probabilities sum to {0}, expected 1")]
    PredictionNotNormalized(f64),
    #[error("verification grid needs at least one point")]
    EmptyGrid,
    #[error("negative prediction probability {0}")]
    NegativeProbability(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Which bubble a state assignment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observer {
    Wigner,
    Friend,
}

impl fmt::Display for Observer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observer::Wigner => "wigner",
            Observer::Friend => "friend",
        })
    }
}

/// The two game measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    /// Repeat of the friend's z measurement inside her bubble.
    Mf,
    /// Wigner's measurement of his environment in the {ω₀, ω₁} basis.
    Mw,
}

impl Measurement {
    /// Outcome labels in index order (index 0 first).
    pub fn outcome_labels(self) -> [&'static str; 2] {
        match self {
            Measurement::Mf => ["phi0", "phi1"],
            Measurement::Mw => ["omega0", "omega1"],
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measurement::Mf => "M_F",
            Measurement::Mw => "M_W",
        })
    }
}

/// The friend's definite measurement record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FriendRecord {
    Phi0,
    Phi1,
}

impl FriendRecord {
    pub fn index(self) -> usize {
        match self {
            FriendRecord::Phi0 => 0,
            FriendRecord::Phi1 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FriendRecord::Phi0 => "phi0",
            FriendRecord::Phi1 => "phi1",
        }
    }
}

/// How a prediction is produced.
///
/// `AsPublished` gives the closed-form prediction tables each player
/// states in the protocol narrative. `StateDerived` instead applies the
/// Born rule to the predicting observer's own current state assignment,
/// which matters for the friend at θ > 0 (see [`predict`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionMode {
    AsPublished,
    StateDerived,
}

/// Protocol stages, in order: preparation, friend's measurement,
/// lab-environment interaction, memory swap, repeated measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Psi0,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
}

/// Sign selector for the ± families of parameterized states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Static parameters of one protocol instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Leakage parameter in [0, 1].
    pub theta: f64,
    /// Initial spin amplitude of ↑.
    pub alpha: Complex64,
    /// Initial spin amplitude of ↓.
    pub beta: Complex64,
    /// Include the ancilla register A (enables the memory swap).
    pub include_ancilla: bool,
    /// Include the second memory F′ (enables the repeated measurement).
    pub include_fprime: bool,
}

impl ProtocolConfig {
    /// Standard preparation: equal spin amplitudes, minimal S, F, W register.
    pub fn new(theta: f64) -> Result<Self, ProtocolError> {
        let config = Self {
            theta,
            alpha: Complex64::new(INV_SQRT2, 0.0),
            beta: Complex64::new(INV_SQRT2, 0.0),
            include_ancilla: false,
            include_fprime: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_theta(self.theta)?;
        let total = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (total - 1.0).abs() > crate::qstate::ALGEBRA_TOL {
            return Err(ProtocolError::AmplitudesNotNormalized(total));
        }
        Ok(())
    }

    /// Register layout implied by the flags, in canonical order.
    pub fn layout(&self) -> SubsystemLayout {
        let mut names = vec![labels::SYSTEM, labels::FRIEND_MEMORY, labels::WIGNER_ENVIRONMENT];
        if self.include_ancilla {
            names.push(labels::ANCILLA);
        }
        if self.include_fprime {
            names.push(labels::REPEAT_MEMORY);
        }
        SubsystemLayout::qubits(names).expect("canonical labels are unique and within the cap")
    }
}

fn check_theta(theta: f64) -> Result<(), ProtocolError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(ProtocolError::ThetaOutOfRange(theta));
    }
    Ok(())
}

/// One observer's state of the protocol at a given stage.
///
/// Two invariants are enforced at construction: the friend carries a
/// definite record from the measurement stage on, and Wigner never
/// carries one (inside his description the record is entangled, not
/// definite).
#[derive(Debug, Clone)]
pub struct ObserverAssignment {
    observer: Observer,
    friend_record: Option<FriendRecord>,
    state: StateVector,
    stage: Stage,
}

impl ObserverAssignment {
    pub fn new(
        observer: Observer,
        friend_record: Option<FriendRecord>,
        state: StateVector,
        stage: Stage,
    ) -> Result<Self, ProtocolError> {
        match observer {
            Observer::Wigner => {
                if friend_record.is_some() {
                    return Err(ProtocolError::RecordForbidden);
                }
            }
            Observer::Friend => {
                if stage >= Stage::Psi1 && friend_record.is_none() {
                    return Err(ProtocolError::RecordRequired);
                }
            }
        }
        Ok(Self {
            observer,
            friend_record,
            state,
            stage,
        })
    }

    pub fn observer(&self) -> Observer {
        self.observer
    }

    pub fn friend_record(&self) -> Option<FriendRecord> {
        self.friend_record
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }

    /// Appends the ancilla register in its ready state |R⟩.
    pub fn with_ancilla(&self) -> Result<Self, ProtocolError> {
        self.with_ready_register(labels::ANCILLA)
    }

    /// Appends the second memory F′ in its ready state |φ₀⟩.
    pub fn with_repeat_register(&self) -> Result<Self, ProtocolError> {
        self.with_ready_register(labels::REPEAT_MEMORY)
    }

    fn with_ready_register(&self, label: &str) -> Result<Self, ProtocolError> {
        let single = SubsystemLayout::qubits([label])?;
        let ready = StateVector::basis_state(&single, &[(label, 0)])?;
        Ok(Self {
            observer: self.observer,
            friend_record: self.friend_record,
            state: self.state.tensor(&ready)?,
            stage: self.stage,
        })
    }
}

/// One observer's published outcome distribution for one measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub observer: Observer,
    pub measurement: Measurement,
    pub mode: PredictionMode,
    pub theta: f64,
    /// `(outcome label, probability)` in outcome index order.
    pub probabilities: Vec<(String, f64)>,
}

impl Prediction {
    /// Validates nonnegativity and normalization before wrapping.
    pub fn new(
        observer: Observer,
        measurement: Measurement,
        mode: PredictionMode,
        theta: f64,
        probabilities: Vec<(String, f64)>,
    ) -> Result<Self, ProtocolError> {
        let mut sum = 0.0;
        for &(_, p) in &probabilities {
            if p < 0.0 {
                return Err(ProtocolError::NegativeProbability(p));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(ProtocolError::PredictionNotNormalized(sum));
        }
        Ok(Self {
            observer,
            measurement,
            mode,
            theta,
            probabilities,
        })
    }

    /// Probability of the outcome with the given index.
    pub fn probability(&self, index: usize) -> Option<f64> {
        self.probabilities.get(index).map(|&(_, p)| p)
    }
}

/// The prepared state: spin superposition, every record register ready.
pub fn initial_state(config: &ProtocolConfig) -> Result<StateVector, ProtocolError> {
    config.validate()?;
    let layout = config.layout();
    let dim = layout.total_dim();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    // S carries the most significant bit; all other registers sit at 0.
    amplitudes[0] = config.alpha;
    amplitudes[dim / 2] = config.beta;
    Ok(StateVector::from_amplitudes(&layout, amplitudes)?)
}

fn cnot_operator(control: &str, target: &str) -> Operator {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![zero; 16];
    // Basis order (control, target): flip the target when the control is 1.
    for (row, col) in [(0usize, 0usize), (1, 1), (2, 3), (3, 2)] {
        m[row * 4 + col] = one;
    }
    Operator::unitary(&[control, target], m).expect("CNOT matrix is unitary")
}

/// The friend's measurement as Wigner describes it: a controlled-NOT
/// copying the spin's z basis into the memory F.
pub fn measurement_unitary() -> Operator {
    cnot_operator(labels::SYSTEM, labels::FRIEND_MEMORY)
}

/// The repeated measurement: a controlled-NOT copying the spin into F′.
pub fn repeat_measurement_unitary() -> Operator {
    cnot_operator(labels::SYSTEM, labels::REPEAT_MEMORY)
}

fn swap_operator() -> Operator {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![zero; 16];
    for (row, col) in [(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
        m[row * 4 + col] = one;
    }
    Operator::unitary(&[labels::FRIEND_MEMORY, labels::ANCILLA], m)
        .expect("SWAP matrix is unitary")
}

/// Measurement bases of the two game measurements.
///
/// M_W projects Wigner's environment onto {ω₀, ω₁}. M_F is the z
/// measurement of the spin, with outcomes labeled by the record states
/// {φ₀, φ₁} they imprint.
pub fn measurement_basis(measurement: Measurement) -> MeasurementBasis {
    let (register, name) = match measurement {
        Measurement::Mf => (labels::SYSTEM, "M_F"),
        Measurement::Mw => (labels::WIGNER_ENVIRONMENT, "M_W"),
    };
    let outcomes = measurement
        .outcome_labels()
        .iter()
        .enumerate()
        .map(|(index, label)| {
            let projector = Operator::basis_projector(register, index)
                .expect("basis projector on a known register");
            ((*label).to_owned(), projector)
        })
        .collect();
    MeasurementBasis::new(name, outcomes).expect("two basis projectors resolve the identity")
}

/// Samples the friend's measurement outcome and collapses her state.
///
/// The input is the entangled post-measurement state in Wigner's
/// description (any layout containing F). The outcome is drawn by the
/// Born rule from the record projectors; the returned assignment holds
/// the renormalized collapsed branch. A zero-probability branch can
/// never be drawn, because the uniform draw lands in [0, 1) and the
/// branch split points are the cumulative probabilities.
pub fn friend_collapse<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(FriendRecord, ObserverAssignment), ProtocolError> {
    let phi0 = Operator::basis_projector(labels::FRIEND_MEMORY, 0)?;
    let (p0, _) = project(state, &phi0, false)?;
    let record = if rng.gen::<f64>() < p0 {
        FriendRecord::Phi0
    } else {
        FriendRecord::Phi1
    };
    let projector = Operator::basis_projector(labels::FRIEND_MEMORY, record.index())?;
    let (p, collapsed) = project(state, &projector, true)?;
    debug_assert!(p > 0.0, "a zero-probability branch was sampled");
    let assignment =
        ObserverAssignment::new(Observer::Friend, Some(record), collapsed, Stage::Psi1)?;
    Ok((record, assignment))
}

fn two_level_sf_state(up_phi0: f64, down_phi1: f64) -> Result<StateVector, ProtocolError> {
    let layout = SubsystemLayout::qubits([labels::SYSTEM, labels::FRIEND_MEMORY])?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 4];
    amplitudes[0] = Complex64::new(up_phi0, 0.0);
    amplitudes[3] = Complex64::new(down_phi1, 0.0);
    Ok(StateVector::from_amplitudes(&layout, amplitudes)?)
}

/// The unnormalized Φ_θ^± states on S⊗F steering the leaked branch of
/// the interaction; their squared norms are 1 ± sin(πθ/2).
pub fn phi_theta(theta: f64, sign: Sign) -> Result<StateVector, ProtocolError> {
    check_theta(theta)?;
    let s = (std::f64::consts::FRAC_PI_2 * theta).sin();
    let c = (std::f64::consts::FRAC_PI_2 * theta).cos();
    let f = sign.factor();
    two_level_sf_state((1.0 + f * s) * INV_SQRT2, f * c * INV_SQRT2)
}

/// The companion unnormalized φ_θ^± states with squared norms 1 ∓ sin(πθ/2).
pub fn varphi_theta(theta: f64, sign: Sign) -> Result<StateVector, ProtocolError> {
    check_theta(theta)?;
    let s = (std::f64::consts::FRAC_PI_2 * theta).sin();
    let c = (std::f64::consts::FRAC_PI_2 * theta).cos();
    let f = sign.factor();
    two_level_sf_state(c * INV_SQRT2, f * (1.0 - f * s) * INV_SQRT2)
}

/// The two defining input/output pairs of the leakage interaction on
/// S⊗F⊗W. The outputs are orthonormal for every θ, which is what makes
/// the unitary completion possible.
pub fn interaction_defining_pairs(
    theta: f64,
) -> Result<Vec<(StateVector, StateVector)>, ProtocolError> {
    check_theta(theta)?;
    let layout = SubsystemLayout::qubits([
        labels::SYSTEM,
        labels::FRIEND_MEMORY,
        labels::WIGNER_ENVIRONMENT,
    ])?;
    let w = SubsystemLayout::qubits([labels::WIGNER_ENVIRONMENT])?;
    let omega0 = StateVector::basis_state(&w, &[(labels::WIGNER_ENVIRONMENT, 0)])?;
    let omega1 = StateVector::basis_state(&w, &[(labels::WIGNER_ENVIRONMENT, 1)])?;
    let half = Complex64::new(INV_SQRT2, 0.0);

    let in_up = StateVector::basis_state(
        &layout,
        &[
            (labels::SYSTEM, 0),
            (labels::FRIEND_MEMORY, 0),
            (labels::WIGNER_ENVIRONMENT, 0),
        ],
    )?;
    let out_up = StateVector::superpose(
        &[
            (half, &phi_theta(theta, Sign::Plus)?.tensor(&omega0)?),
            (half, &phi_theta(theta, Sign::Minus)?.tensor(&omega1)?),
        ],
        false,
    )?;

    let in_down = StateVector::basis_state(
        &layout,
        &[
            (labels::SYSTEM, 1),
            (labels::FRIEND_MEMORY, 1),
            (labels::WIGNER_ENVIRONMENT, 0),
        ],
    )?;
    let out_down = StateVector::superpose(
        &[
            (half, &varphi_theta(theta, Sign::Plus)?.tensor(&omega0)?),
            (-half, &varphi_theta(theta, Sign::Minus)?.tensor(&omega1)?),
        ],
        false,
    )?;

    Ok(vec![(in_up, out_up), (in_down, out_down)])
}

/// The leakage interaction U_int(θ) on S⊗F⊗W.
///
/// Only its action on the two physically reachable inputs is specified;
/// the rest of the unitary is a deterministic Gram-Schmidt completion.
/// Every protocol state lives in the defining span, so downstream
/// results do not depend on the completion (a property the verification
/// suite checks rather than assumes).
pub fn interaction_unitary(theta: f64) -> Result<Operator, ProtocolError> {
    interaction_unitary_with_order(theta, ComplementOrder::Ascending)
}

/// Same as [`interaction_unitary`] with an explicit complement fill
/// order, for completion-insensitivity checks.
pub fn interaction_unitary_with_order(
    theta: f64,
    order: ComplementOrder,
) -> Result<Operator, ProtocolError> {
    let pairs = interaction_defining_pairs(theta)?;
    Ok(complete_to_unitary_with_order(&pairs, order)?)
}

fn psi1_wigner(theta: f64) -> Result<StateVector, ProtocolError> {
    let config = ProtocolConfig::new(theta)?;
    let psi0 = initial_state(&config)?;
    Ok(measurement_unitary().apply(&psi0)?)
}

/// Wigner's state after the lab-environment interaction (stage Ψ₂).
pub fn wigner_state_after_interaction(theta: f64) -> Result<ObserverAssignment, ProtocolError> {
    let psi1 = psi1_wigner(theta)?;
    let u = interaction_unitary(theta)?;
    let psi2 = u.apply(&psi1)?;
    ObserverAssignment::new(Observer::Wigner, None, psi2, Stage::Psi2)
}

/// The friend's record-conditioned state after the interaction.
///
/// Her collapsed branch from the measurement stage is evolved through
/// U_int(θ). For predicting measurements in her own laboratory she would
/// operationally keep conditioning on the record instead; this state is
/// what she uses to reason about Wigner's bubble, and it is the one the
/// state-derived prediction mode queries.
pub fn friend_state_after_interaction(
    theta: f64,
    record: FriendRecord,
) -> Result<ObserverAssignment, ProtocolError> {
    let psi1 = psi1_wigner(theta)?;
    let projector = Operator::basis_projector(labels::FRIEND_MEMORY, record.index())?;
    let (_, collapsed) = project(&psi1, &projector, true)?;
    let u = interaction_unitary(theta)?;
    let psi2 = u.apply(&collapsed)?;
    ObserverAssignment::new(Observer::Friend, Some(record), psi2, Stage::Psi2)
}

/// Coherently moves the friend's memory into the ancilla (stage Ψ₃).
///
/// The assignment must be at stage Ψ₂ and its layout must contain A in
/// the ready state. After the swap, F is left in |R⟩ and the record
/// lives in A; nothing else changes, so measurement statistics on S or W
/// are untouched.
pub fn swap_memory(assignment: &ObserverAssignment) -> Result<ObserverAssignment, ProtocolError> {
    if assignment.stage != Stage::Psi2 {
        return Err(ProtocolError::WrongStage {
            expected: Stage::Psi2,
            got: assignment.stage,
        });
    }
    if !assignment.state.layout().contains(labels::ANCILLA) {
        return Err(ProtocolError::RegisterMissing(labels::ANCILLA));
    }
    let swapped = swap_operator().apply(&assignment.state)?;
    ObserverAssignment::new(
        assignment.observer,
        assignment.friend_record,
        swapped,
        Stage::Psi3,
    )
}

/// Wigner's state after the purified repeated measurement (stage Ψ₄).
///
/// The repeat unitary copies the spin into F′ on top of Ψ₂; at θ = 0
/// this is the GHZ state on (S, F, F′) times |ω₀⟩.
pub fn wigner_state_after_repeat(theta: f64) -> Result<ObserverAssignment, ProtocolError> {
    let psi2 = wigner_state_after_interaction(theta)?.with_repeat_register()?;
    let psi4 = repeat_measurement_unitary().apply(psi2.state())?;
    ObserverAssignment::new(Observer::Wigner, None, psi4, Stage::Psi4)
}

/// The friend's operational state after the repeated measurement: her
/// record duplicated into F′, everything else definite.
///
/// This is the record product state, independent of θ: for measurements
/// inside her bubble the friend conditions on her last record and
/// discards the interaction (which only reshapes her description of
/// Wigner's side).
pub fn friend_state_after_repeat(
    record: FriendRecord,
) -> Result<ObserverAssignment, ProtocolError> {
    let layout = SubsystemLayout::qubits([
        labels::SYSTEM,
        labels::FRIEND_MEMORY,
        labels::WIGNER_ENVIRONMENT,
        labels::REPEAT_MEMORY,
    ])?;
    let r = record.index();
    let state = StateVector::basis_state(
        &layout,
        &[
            (labels::SYSTEM, r),
            (labels::FRIEND_MEMORY, r),
            (labels::WIGNER_ENVIRONMENT, 0),
            (labels::REPEAT_MEMORY, r),
        ],
    )?;
    ObserverAssignment::new(Observer::Friend, Some(record), state, Stage::Psi4)
}

/// One observer's outcome distribution for one measurement.
///
/// As-published values are the closed forms each player hands the
/// referees: writing s = sin(πθ/2) and c = cos(πθ/2),
///
/// * Wigner, M_W: {(1 + c)/2, (1 - c)/2}
/// * Wigner, M_F: {(1 + s c)/2, (1 - s c)/2}
/// * friend, M_W: {1/2, 1/2}
/// * friend, M_F: 1 on her record, 0 on the other outcome
///
/// State-derived values apply the Born rule to the corresponding Ψ₂/Ψ₄
/// assignment state of the predicting observer instead. For Wigner both
/// modes agree at every θ. For the friend they deliberately differ: her
/// M_W distribution becomes record-conditioned, (1 ± s)/2, and her M_F
/// distribution follows her post-interaction state, (1 + s²)/2 on the
/// record outcome, agreeing with the published deterministic repeat only
/// at θ = 1. Both modes are exposed because the protocol narrative does
/// not settle which reading applies off the θ = 0 point.
///
/// A record is required exactly when the observer is the friend.
pub fn predict(
    observer: Observer,
    measurement: Measurement,
    theta: f64,
    mode: PredictionMode,
    record: Option<FriendRecord>,
) -> Result<Prediction, ProtocolError> {
    check_theta(theta)?;
    match observer {
        Observer::Friend if record.is_none() => return Err(ProtocolError::RecordRequired),
        Observer::Wigner if record.is_some() => return Err(ProtocolError::RecordForbidden),
        _ => {}
    }
    let s = (std::f64::consts::FRAC_PI_2 * theta).sin();
    let c = (std::f64::consts::FRAC_PI_2 * theta).cos();
    let labels = measurement.outcome_labels();
    let pair = |p0: f64| vec![(labels[0].to_owned(), p0), (labels[1].to_owned(), 1.0 - p0)];

    let probabilities = match (observer, measurement, mode) {
        (Observer::Wigner, Measurement::Mw, PredictionMode::AsPublished) => pair((1.0 + c) / 2.0),
        (Observer::Wigner, Measurement::Mf, PredictionMode::AsPublished) => {
            pair((1.0 + s * c) / 2.0)
        }
        (Observer::Friend, Measurement::Mw, PredictionMode::AsPublished) => pair(0.5),
        (Observer::Friend, Measurement::Mf, PredictionMode::AsPublished) => {
            let r = record.expect("checked above").index();
            pair(if r == 0 { 1.0 } else { 0.0 })
        }
        (Observer::Wigner, Measurement::Mw, PredictionMode::StateDerived) => {
            let psi2 = wigner_state_after_interaction(theta)?;
            born_pair(psi2.state(), measurement)?
        }
        (Observer::Wigner, Measurement::Mf, PredictionMode::StateDerived) => {
            let psi4 = wigner_state_after_repeat(theta)?;
            born_pair(psi4.state(), measurement)?
        }
        (Observer::Friend, _, PredictionMode::StateDerived) => {
            let psi2 = friend_state_after_interaction(theta, record.expect("checked above"))?;
            born_pair(psi2.state(), measurement)?
        }
    };
    Prediction::new(observer, measurement, mode, theta, probabilities)
}

fn born_pair(
    state: &StateVector,
    measurement: Measurement,
) -> Result<Vec<(String, f64)>, ProtocolError> {
    Ok(born_probabilities(state, &measurement_basis(measurement))?)
}

/// Per-θ deviation between the published Wigner formulas and the Born
/// rule on fully constructed states.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormCheck {
    pub theta: f64,
    /// Max deviation across M_W outcomes.
    pub deviation_mw: f64,
    /// Max deviation across M_F outcomes.
    pub deviation_mf: f64,
}

#[derive(Debug, Clone)]
pub struct ClosedFormReport {
    pub tolerance: f64,
    pub checks: Vec<ClosedFormCheck>,
}

impl ClosedFormReport {
    pub fn max_deviation(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.deviation_mw.max(c.deviation_mf))
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() <= self.tolerance
    }
}

/// Compares Wigner's as-published formulas for both measurements against
/// Born-rule evaluation of the constructed Ψ₂/Ψ₄ states on a θ grid.
pub fn verify_closed_forms(
    theta_grid: &[f64],
    tolerance: f64,
) -> Result<ClosedFormReport, ProtocolError> {
    let mut checks = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let mut deviations = [0.0f64; 2];
        for (slot, measurement) in [Measurement::Mw, Measurement::Mf].into_iter().enumerate() {
            let published = predict(
                Observer::Wigner,
                measurement,
                theta,
                PredictionMode::AsPublished,
                None,
            )?;
            let derived = predict(
                Observer::Wigner,
                measurement,
                theta,
                PredictionMode::StateDerived,
                None,
            )?;
            deviations[slot] = published
                .probabilities
                .iter()
                .zip(&derived.probabilities)
                .map(|((_, a), (_, b))| (a - b).abs())
                .fold(0.0, f64::max);
        }
        checks.push(ClosedFormCheck {
            theta,
            deviation_mw: deviations[0],
            deviation_mf: deviations[1],
        });
    }
    Ok(ClosedFormReport { tolerance, checks })
}

#[cfg(test)]
mod tests;
