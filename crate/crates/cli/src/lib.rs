//! Experiment orchestration around the `fluidnet` core: config ingestion,
//! seeded replication fan-out, joining simulated tails with the analytic
//! bounds, and CSV/manifest emission.
//!
//! Exit-code convention, used by every subcommand:
//! 0 pass, 2 pathwise-invariant violation, 3 statistical criterion failure,
//! 4 config or I/O error.

pub mod commands;
pub mod io;
pub mod manifest;
pub mod verdict;

/// Process exit classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Ok,
    Invariant,
    Statistical,
    Config,
}

impl ExitClass {
    pub fn code(self) -> u8 {
        match self {
            ExitClass::Ok => 0,
            ExitClass::Invariant => 2,
            ExitClass::Statistical => 3,
            ExitClass::Config => 4,
        }
    }

    /// Keep the most severe class (invariant beats statistical beats ok).
    pub fn worst(self, other: ExitClass) -> ExitClass {
        use ExitClass::*;
        match (self, other) {
            (Config, _) | (_, Config) => Config,
            (Invariant, _) | (_, Invariant) => Invariant,
            (Statistical, _) | (_, Statistical) => Statistical,
            _ => Ok,
        }
    }
}
