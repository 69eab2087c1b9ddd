use thiserror::Error;

use crate::Nat;

/// Errors produced by the arithmetic, coding and protocol layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus {0}")]
    InvalidModulus(Nat),

    #[error("{value} is not invertible modulo {modulus} (gcd = {gcd})")]
    NotInvertible { value: Nat, modulus: Nat, gcd: Nat },

    #[error("moduli {a} and {b} are not coprime")]
    ModuliNotCoprime { a: Nat, b: Nat },

    #[error("prime generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("unsupported modulus: {0}")]
    UnsupportedModulus(String),

    #[error("{what} = {value} out of range (must be < {bound})")]
    OutOfRange {
        what: &'static str,
        value: Nat,
        bound: Nat,
    },

    #[error("{value} is not a unit modulo {modulus}")]
    NotUnit { value: Nat, modulus: Nat },

    #[error("{0} is not a cubic residue")]
    NotCubicResidue(Nat),

    #[error("index {index} does not address one of {count} companions")]
    InvalidIndex { index: Nat, count: usize },

    #[error("invalid key material: {0}")]
    InvalidKey(String),

    #[error("scan over modulus {modulus} exceeds budget {budget}")]
    BudgetExceeded { modulus: Nat, budget: u64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Frame(#[from] crate::wire::FrameError),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
