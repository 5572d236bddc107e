//! Append-only, tamper-evident log of committed game messages.
//!
//! Every payload is committed with a SHA-256 checksum chained to the
//! previous entry, so replacing, reordering, or deleting any committed
//! message changes every later checksum. The final checksum serves as a
//! root that two parties can compare to agree on the whole history.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

const GENESIS: [u8; 32] = [0u8; 32];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("ledger entry {index} does not extend the chain")]
    CorruptEntry { index: usize },
}

/// One committed payload with its chained checksum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    /// The committed bytes (canonical JSON in the game).
    pub payload: Vec<u8>,
    /// SHA-256 over the previous checksum followed by the payload.
    pub checksum: [u8; 32],
}

fn chain(previous: &[u8; 32], payload: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(previous);
    hasher.update(payload);
    hasher.finalize().into()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a ledger from stored entries without validating them;
    /// call [`Ledger::verify`] afterwards to check the chain.
    pub fn from_entries(entries: Vec<LedgerEntry>) -> Self {
        Self { entries }
    }

    pub fn append(&mut self, payload: Vec<u8>) -> &LedgerEntry {
        let previous = self.entries.last().map_or(GENESIS, |e| e.checksum);
        let checksum = chain(&previous, &payload);
        self.entries.push(LedgerEntry { payload, checksum });
        self.entries.last().expect("just pushed")
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Recomputes the whole chain, reporting the first entry whose
    /// checksum does not follow from its predecessor and payload.
    pub fn verify(&self) -> Result<(), LedgerError> {
        let mut previous = GENESIS;
        for (index, entry) in self.entries.iter().enumerate() {
            if chain(&previous, &entry.payload) != entry.checksum {
                return Err(LedgerError::CorruptEntry { index });
            }
            previous = entry.checksum;
        }
        Ok(())
    }

    /// The checksum of the last entry (all zeros for an empty ledger).
    pub fn root(&self) -> [u8; 32] {
        self.entries.last().map_or(GENESIS, |e| e.checksum)
    }

    pub fn root_hex(&self) -> String {
        self.root().iter().fold(String::with_capacity(64), |mut s, byte| {
            write!(s, "{byte:02x}").expect("writing to a String cannot fail");
            s
        })
    }
}
