//! Simulation and verification engine for the bubble switching game, a
//! Wigner's-friend protocol in which a friend inside a sealed lab and a
//! superobserver outside it keep incompatible quantum descriptions of the
//! same experiment and bet on measurement outcomes.
//!
//! The crate is organized bottom up:
//!
//! * [`qstate`]: dense state vectors and operators over labeled qubits,
//!   plus Gram-Schmidt completion of partially specified unitaries.
//! * [`protocol`]: the named states, unitaries, and outcome predictions of
//!   the protocol itself, in both observers' descriptions, with closed-form
//!   cross checks.
//! * [`sprt`]: Wald's sequential probability ratio test over the two
//!   competing prediction tracks.
//! * [`game`]: seeded game rounds, a tamper-evident prediction ledger, and
//!   reproducible session reports.

pub mod game;
pub mod protocol;
pub mod qstate;
pub mod sprt;
