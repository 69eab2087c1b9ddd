//! Cubic public-key transformation made one-to-one by coding the side-information.
//!
//! Cubing is three-to-one (or nine-to-one) on the units of `Z_s` whenever 3 divides
//! the totient. The sender therefore transmits, next to `c = m^3 mod s`, the rank of
//! `m` among the messages sharing that ciphertext. Both are packed into one integer
//! `T` through the Chinese Remainder Theorem: `T mod s = c`, `T mod r = i`. An
//! optional third residue carries a keyed watermark tag so that the receiver can
//! notice codewords modified in transit.
//!
//! Module map:
//!
//! * [`modmath`]: modular exponentiation, inverses, CRT, square roots, primes.
//! * [`unity_roots`]: the cube roots of unity modulo `p` or `p*q`.
//! * [`rns`]: residue-number-system codewords.
//! * [`cubic`]: key generation, encryption and decryption.
//! * [`watermark`]: the tag channel (`seal` / `unseal`).
//! * [`wire`]: framing, Alice/Bob sessions and a tampering proxy.
//! * [`oracle`]: brute-force references, also exposed through the CLI.
//! * [`keyfile`]: the line-oriented `key=value` file formats.

pub mod cli;
pub mod cubic;
pub mod error;
pub mod keyfile;
pub mod modmath;
pub mod oracle;
pub mod parallel;
pub mod rns;
pub mod unity_roots;
pub mod watermark;
pub mod wire;

/// Arbitrary-precision nonnegative integer used for every residue, modulus and codeword.
pub type Nat = num_bigint::BigUint;

pub use cubic::{CompanionSet, Mode, PrivateKey, PublicKey};
pub use error::{Error, Result};
pub use parallel::Strategy;
pub use rns::{Codeword, ModuliSet};
pub use unity_roots::RootsOfUnity;
pub use watermark::WatermarkKey;
