//! Brute-force references. Every function here scans the whole residue range and
//! never calls the algebraic routines it is used to check, except
//! [`exhaustive_roundtrip`] and [`cube_root_sweep`], which drive the real
//! encrypt/decrypt path and compare against the input.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::cubic::{cube_root, decrypt, encrypt, PrivateKey, PublicKey};
use crate::error::{Error, Result};
use crate::parallel::Strategy;
use crate::Nat;

/// Largest modulus a residue scan will accept.
pub const SCAN_BUDGET: u64 = 1_000_000;
/// Largest modulus for an exhaustive encrypt/decrypt sweep.
pub const ROUNDTRIP_BUDGET: u64 = 100_000;

fn small_modulus(modulus: &Nat, budget: u64) -> Result<u64> {
    match modulus.to_u64() {
        Some(m) if m <= budget => {
            if m < 2 {
                Err(Error::InvalidModulus(modulus.clone()))
            } else {
                Ok(m)
            }
        }
        _ => Err(Error::BudgetExceeded {
            modulus: modulus.clone(),
            budget,
        }),
    }
}

fn cube_mod(x: u64, m: u64) -> u64 {
    x * x % m * x % m
}

fn to_nats(xs: Vec<u64>) -> Vec<Nat> {
    xs.into_iter().map(Nat::from).collect()
}

/// `{x ∈ [1, modulus) : x^3 = c (mod modulus)}`.
pub fn brute_cube_preimages(c: &Nat, modulus: &Nat) -> Result<Vec<Nat>> {
    brute_cube_preimages_with(c, modulus, Strategy::default())
}

pub fn brute_cube_preimages_with(c: &Nat, modulus: &Nat, strategy: Strategy) -> Result<Vec<Nat>> {
    let m = small_modulus(modulus, SCAN_BUDGET)?;
    let c = (c % m).to_u64().unwrap_or(0);
    Ok(to_nats(strategy.filter_range(1..m, |x| cube_mod(x, m) == c)))
}

/// `{x ∈ [1, modulus) : x^3 = 1 (mod modulus)}`.
pub fn brute_roots_of_unity(modulus: &Nat) -> Result<Vec<Nat>> {
    brute_roots_of_unity_with(modulus, Strategy::default())
}

pub fn brute_roots_of_unity_with(modulus: &Nat, strategy: Strategy) -> Result<Vec<Nat>> {
    brute_cube_preimages_with(&Nat::from(1u32), modulus, strategy)
}

/// Preimage sets of the cubing map restricted to units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageReport {
    pub modulus: Nat,
    /// Cubic residue -> ascending preimages.
    pub preimages: BTreeMap<Nat, Vec<Nat>>,
}

impl PreimageReport {
    /// Distinct preimage-set sizes that occur.
    pub fn cardinalities(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.preimages.values().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    pub fn unit_count(&self) -> usize {
        self.preimages.values().map(Vec::len).sum()
    }
}

pub fn preimage_report(modulus: &Nat, strategy: Strategy) -> Result<PreimageReport> {
    let m = small_modulus(modulus, SCAN_BUDGET)?;
    let cubes = strategy.map_range(1..m, |x| (x.gcd(&m) == 1).then(|| (cube_mod(x, m), x)));
    let mut preimages: BTreeMap<Nat, Vec<Nat>> = BTreeMap::new();
    for (c, x) in cubes.into_iter().flatten() {
        preimages.entry(Nat::from(c)).or_default().push(Nat::from(x));
    }
    Ok(PreimageReport {
        modulus: modulus.clone(),
        preimages,
    })
}

/// Result of a sweep over every unit message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub total: usize,
    pub failures: Vec<Nat>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn from_outcomes(outcomes: Vec<Option<(u64, bool)>>) -> Self {
        let checked: Vec<(u64, bool)> = outcomes.into_iter().flatten().collect();
        Self {
            total: checked.len(),
            failures: checked
                .into_iter()
                .filter(|(_, ok)| !ok)
                .map(|(m, _)| Nat::from(m))
                .collect(),
        }
    }
}

/// `decrypt(encrypt(m)) == m` for every unit `m` modulo the public modulus.
pub fn exhaustive_roundtrip(public: &PublicKey, private: &PrivateKey) -> Result<SweepReport> {
    exhaustive_roundtrip_with(public, private, Strategy::default())
}

pub fn exhaustive_roundtrip_with(
    public: &PublicKey,
    private: &PrivateKey,
    strategy: Strategy,
) -> Result<SweepReport> {
    let s = small_modulus(public.s(), ROUNDTRIP_BUDGET)?;
    let outcomes = strategy.map_range(1..s, |m| {
        if m.gcd(&s) != 1 {
            return None;
        }
        let m_nat = Nat::from(m);
        let ok = encrypt(&m_nat, public)
            .and_then(|w| decrypt(&w, private, public))
            .map(|back| back == m_nat)
            .unwrap_or(false);
        Some((m, ok))
    });
    Ok(SweepReport::from_outcomes(outcomes))
}

/// `cube_root(m^3)^3 == m^3` for every unit `m`. Failures list the `m`.
pub fn cube_root_sweep(private: &PrivateKey, strategy: Strategy) -> Result<SweepReport> {
    let s = small_modulus(&private.modulus(), ROUNDTRIP_BUDGET)?;
    let outcomes = strategy.map_range(1..s, |m| {
        if m.gcd(&s) != 1 {
            return None;
        }
        let c = cube_mod(m, s);
        let ok = cube_root(&Nat::from(c), private)
            .ok()
            .and_then(|x| x.to_u64())
            .is_some_and(|x| cube_mod(x, s) == c);
        Some((m, ok))
    });
    Ok(SweepReport::from_outcomes(outcomes))
}
