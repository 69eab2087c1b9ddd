//! The cubic transformation `m -> m^3 mod s` with the rank of `m` among its
//! companions carried as side-information in an RNS codeword.
//!
//! Three moduli shapes are supported:
//!
//! * [`Mode::Prime3`]: `s = p` prime with `3 | p-1`, `9 ∤ p-1`. Three roots of unity.
//!   Anyone can take cube roots modulo a public prime, so this mode is only a
//!   worked example, not a one-way function.
//! * [`Mode::Composite3`]: `s = p*q`, exactly one of `p-1`, `q-1` divisible by 3 and
//!   `φ(s) mod 9 ∈ {3, 6}`. Three roots of unity, one private exponent.
//! * [`Mode::Composite9`]: `s = p*q` with `3 | p-1`, `3 | q-1`, `9 ∤ p-1`, `9 ∤ q-1`.
//!   Nine roots of unity; decryption takes a cube root per prime and recombines.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::modmath::{
    crt_pair, is_probable_prime, mod_pow, random_prime, Congruence, DEFAULT_MR_ROUNDS,
    DEFAULT_PRIME_ATTEMPTS,
};
use crate::rns::{self, index_modulus_for, Codeword, ModuliSet};
use crate::unity_roots::{cube_roots_of_unity_composite, cube_roots_of_unity_prime, RootsOfUnity};
use crate::Nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Prime3,
    Composite3,
    Composite9,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Prime3 => "prime3",
            Mode::Composite3 => "composite3",
            Mode::Composite9 => "composite9",
        }
    }

    /// Number of cube roots of unity in this mode.
    pub fn root_count(self) -> usize {
        match self {
            Mode::Prime3 | Mode::Composite3 => 3,
            Mode::Composite9 => 9,
        }
    }

    /// The mode whose invariants `p` (and `q`) satisfy, if any.
    pub fn infer(p: &Nat, q: Option<&Nat>) -> Result<Mode> {
        let mode = match q {
            None => Mode::Prime3,
            Some(q) => {
                if divisible_by_three(&(p - 1u32)) && divisible_by_three(&(q - 1u32)) {
                    Mode::Composite9
                } else {
                    Mode::Composite3
                }
            }
        };
        check_mode(mode, p, q)?;
        Ok(mode)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prime3" => Ok(Mode::Prime3),
            "composite3" => Ok(Mode::Composite3),
            "composite9" => Ok(Mode::Composite9),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

fn divisible_by_three(x: &Nat) -> bool {
    (x % 3u32).is_zero()
}

fn mod9(x: &Nat) -> u32 {
    (x % 9u32).to_u32().unwrap_or(0)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidKey(msg.into())
}

/// Checks that the primes satisfy the invariants of `mode`.
pub fn check_mode(mode: Mode, p: &Nat, q: Option<&Nat>) -> Result<()> {
    let is_prime = |x: &Nat| *x > Nat::from(2u32) && is_probable_prime(x, DEFAULT_MR_ROUNDS);
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not an odd prime")));
    }
    let admissible = |x: &Nat| {
        let e = x - 1u32;
        divisible_by_three(&e) && mod9(&e) != 0
    };
    match (mode, q) {
        (Mode::Prime3, None) => {
            if !admissible(p) {
                return Err(invalid(format!(
                    "prime3 needs 3 | p-1 and 9 ∤ p-1, got p = {p}"
                )));
            }
        }
        (Mode::Composite3 | Mode::Composite9, Some(q)) => {
            if !is_prime(q) {
                return Err(invalid(format!("{q} is not an odd prime")));
            }
            if p == q {
                return Err(Error::UnsupportedModulus(format!("repeated prime factor {p}")));
            }
            let ok = if mode == Mode::Composite9 {
                admissible(p) && admissible(q)
            } else {
                let phi = (p - 1u32) * (q - 1u32);
                let three_p = divisible_by_three(&(p - 1u32));
                let three_q = divisible_by_three(&(q - 1u32));
                (three_p != three_q) && matches!(mod9(&phi), 3 | 6)
            };
            if !ok {
                return Err(invalid(format!(
                    "primes {p}, {q} do not satisfy the {mode} invariants"
                )));
            }
        }
        (Mode::Prime3, Some(_)) => return Err(invalid("prime3 takes a single prime")),
        (_, None) => return Err(invalid(format!("{mode} needs two primes"))),
    }
    Ok(())
}

/// Cube-root exponent `e` for totient `phi` with `phi mod 9 ∈ {3, 6}`:
/// `9e = phi + 3` or `9e = 2 phi + 3`, so `(c^e)^3 = c` for every unit cube `c`.
fn cube_root_exponent(phi: &Nat) -> Result<Nat> {
    match mod9(phi) {
        6 => Ok((phi + 3u32) / 9u32),
        3 => Ok((phi * 2u32 + 3u32) / 9u32),
        r => Err(invalid(format!(
            "no single cube-root exponent when φ ≡ {r} (mod 9)"
        ))),
    }
}

/// Public half: the modulus `s`, its cube roots of unity and the coding moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    mode: Mode,
    roots: RootsOfUnity,
    moduli: ModuliSet,
}

impl PublicKey {
    pub fn new(mode: Mode, roots: RootsOfUnity, moduli: ModuliSet) -> Result<Self> {
        if roots.modulus() != moduli.s() {
            return Err(invalid("roots of unity are for a different modulus"));
        }
        if roots.len() != mode.root_count() {
            return Err(invalid(format!(
                "{mode} expects {} roots of unity, got {}",
                mode.root_count(),
                roots.len()
            )));
        }
        if *moduli.r() < Nat::from(roots.len()) {
            return Err(invalid("index modulus is smaller than the number of companions"));
        }
        Ok(Self {
            mode,
            roots,
            moduli,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The public modulus `p` or `n`.
    pub fn s(&self) -> &Nat {
        self.moduli.s()
    }

    pub fn roots(&self) -> &RootsOfUnity {
        &self.roots
    }

    pub fn moduli(&self) -> &ModuliSet {
        &self.moduli
    }

    /// Copy of this key with the watermark modulus replaced.
    pub fn with_watermark_modulus(&self, t: Option<Nat>) -> Result<Self> {
        let moduli = ModuliSet::new(self.s().clone(), self.moduli.r().clone(), t)?;
        Self::new(self.mode, self.roots.clone(), moduli)
    }
}

/// Private half: the factorisation, the totient and the cube-root exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    mode: Mode,
    p: Nat,
    q: Option<Nat>,
    phi: Nat,
    exponents: Vec<Nat>,
}

impl PrivateKey {
    /// Derives the totient and exponents from the primes.
    pub fn from_primes(mode: Mode, p: Nat, q: Option<Nat>) -> Result<Self> {
        check_mode(mode, &p, q.as_ref())?;
        let p1 = &p - 1u32;
        let (phi, exponents) = match (mode, &q) {
            (Mode::Prime3, _) => {
                let e = cube_root_exponent(&p1)?;
                (p1, vec![e])
            }
            (Mode::Composite3, Some(q)) => {
                let phi = &p1 * (q - 1u32);
                let e = cube_root_exponent(&phi)?;
                (phi, vec![e])
            }
            (Mode::Composite9, Some(q)) => {
                let q1 = q - 1u32;
                let exps = vec![cube_root_exponent(&p1)?, cube_root_exponent(&q1)?];
                (&p1 * &q1, exps)
            }
            _ => unreachable!("check_mode rejects a missing q"),
        };
        Ok(Self {
            mode,
            p,
            q,
            phi,
            exponents,
        })
    }

    /// Rebuilds a key from stored fields, rejecting anything inconsistent.
    pub fn from_parts(
        mode: Mode,
        p: Nat,
        q: Option<Nat>,
        phi: Nat,
        exponents: Vec<Nat>,
    ) -> Result<Self> {
        let derived = Self::from_primes(mode, p, q)?;
        if derived.phi != phi {
            return Err(invalid(format!(
                "stored totient {phi} does not match the primes (expected {})",
                derived.phi
            )));
        }
        if derived.exponents != exponents {
            return Err(invalid("stored cube-root exponents do not match the primes"));
        }
        Ok(derived)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn p(&self) -> &Nat {
        &self.p
    }

    pub fn q(&self) -> Option<&Nat> {
        self.q.as_ref()
    }

    pub fn phi(&self) -> &Nat {
        &self.phi
    }

    pub fn exponents(&self) -> &[Nat] {
        &self.exponents
    }

    pub fn modulus(&self) -> Nat {
        match &self.q {
            Some(q) => &self.p * q,
            None => self.p.clone(),
        }
    }

    /// The matching public key, with an optional watermark modulus.
    pub fn public_key(&self, watermark_modulus: Option<Nat>) -> Result<PublicKey> {
        let s = self.modulus();
        let roots = match &self.q {
            Some(q) => cube_roots_of_unity_composite(&self.p, q)?,
            None => cube_roots_of_unity_prime(&self.p)?,
        };
        let r = index_modulus_for(roots.len(), &s);
        let moduli = ModuliSet::new(s, r, watermark_modulus)?;
        PublicKey::new(self.mode, roots, moduli)
    }

    fn ensure_matches(&self, public: &PublicKey) -> Result<()> {
        if self.mode != public.mode || self.modulus() != *public.s() {
            return Err(invalid("private key does not belong to this public key"));
        }
        Ok(())
    }
}

/// Key generation request. Fixed primes in `p`/`q` bypass the random search.
#[derive(Debug, Clone)]
pub struct KeygenParams {
    pub mode: Mode,
    pub bits: u64,
    pub p: Option<Nat>,
    pub q: Option<Nat>,
    pub watermark_modulus: Option<Nat>,
    pub max_attempts: usize,
}

impl KeygenParams {
    pub fn new(mode: Mode, bits: u64) -> Self {
        Self {
            mode,
            bits,
            p: None,
            q: None,
            watermark_modulus: None,
            max_attempts: DEFAULT_PRIME_ATTEMPTS,
        }
    }

    pub fn with_primes(mode: Mode, p: Nat, q: Option<Nat>) -> Self {
        let bits = p.bits();
        Self {
            p: Some(p),
            q,
            ..Self::new(mode, bits)
        }
    }

    pub fn watermark(mut self, t: Option<Nat>) -> Self {
        self.watermark_modulus = t;
        self
    }
}

pub const MIN_PRIME_BITS: u64 = 4;
pub const MAX_PRIME_BITS: u64 = 1024;

pub fn keygen<R: Rng + ?Sized>(params: &KeygenParams, rng: &mut R) -> Result<(PublicKey, PrivateKey)> {
    let (p, q) = match (&params.p, &params.q) {
        (Some(p), q) => {
            if params.mode != Mode::Prime3 && q.is_none() {
                return Err(invalid(format!("{} needs both --p and --q", params.mode)));
            }
            (p.clone(), q.clone())
        }
        (None, Some(_)) => return Err(invalid("q given without p")),
        (None, None) => generate_primes(params, rng)?,
    };
    let private = PrivateKey::from_primes(params.mode, p, q)?;
    let public = private.public_key(params.watermark_modulus.clone())?;
    Ok((public, private))
}

fn generate_primes<R: Rng + ?Sized>(
    params: &KeygenParams,
    rng: &mut R,
) -> Result<(Nat, Option<Nat>)> {
    if !(MIN_PRIME_BITS..=MAX_PRIME_BITS).contains(&params.bits) {
        return Err(Error::UnsupportedModulus(format!(
            "prime size must be {MIN_PRIME_BITS}..={MAX_PRIME_BITS} bits, got {}",
            params.bits
        )));
    }
    let mut three_not_nine = vec![Congruence::is(1, 3), Congruence::is_not(1, 9)];
    let mut two_mod_three = vec![Congruence::is(2, 3)];
    // keep t coprime to s
    if let Some(t) = params.watermark_modulus.as_ref().and_then(|t| t.to_u64()) {
        three_not_nine.push(Congruence::is_not(0, t));
        two_mod_three.push(Congruence::is_not(0, t));
    }
    let attempts = params.max_attempts;
    let bits = params.bits;
    match params.mode {
        Mode::Prime3 => Ok((random_prime(bits, &three_not_nine, rng, attempts)?, None)),
        Mode::Composite3 => {
            let p = random_prime(bits, &three_not_nine, rng, attempts)?;
            let q = random_prime(bits, &two_mod_three, rng, attempts)?;
            Ok((p, Some(q)))
        }
        Mode::Composite9 => {
            let p = random_prime(bits, &three_not_nine, rng, attempts)?;
            for _ in 0..64 {
                let q = random_prime(bits, &three_not_nine, rng, attempts)?;
                if q != p {
                    return Ok((p, Some(q)));
                }
            }
            Err(Error::GenerationFailed { attempts })
        }
    }
}

/// The messages sharing one ciphertext, strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanionSet {
    members: Vec<Nat>,
}

impl CompanionSet {
    fn from_base(base: &Nat, roots: &RootsOfUnity) -> Self {
        let s = roots.modulus();
        let mut members: Vec<Nat> = roots.roots().iter().map(|w| base * w % s).collect();
        members.sort();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[Nat] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, m: &Nat) -> Option<usize> {
        self.members.binary_search(m).ok()
    }

    pub fn get(&self, index: usize) -> Option<&Nat> {
        self.members.get(index)
    }
}

fn check_unit(value: &Nat, s: &Nat) -> Result<()> {
    if value.is_zero() || value >= s {
        return Err(Error::OutOfRange {
            what: "message",
            value: value.clone(),
            bound: s.clone(),
        });
    }
    if !value.gcd(s).is_one() {
        return Err(Error::NotUnit {
            value: value.clone(),
            modulus: s.clone(),
        });
    }
    Ok(())
}

/// `{m·ω mod s}` over the public roots of unity, ascending.
pub fn companions(m: &Nat, public: &PublicKey) -> Result<CompanionSet> {
    check_unit(m, public.s())?;
    Ok(CompanionSet::from_base(m, &public.roots))
}

/// 0-based position of `m` in its companion set.
pub fn rank(m: &Nat, public: &PublicKey) -> Result<usize> {
    let set = companions(m, public)?;
    Ok(set
        .position(m)
        .expect("1 is a root of unity, so m is its own companion"))
}

/// `T` with `T mod s = m^3 mod s` and `T mod r = rank(m)`. Ignores any watermark
/// modulus in the key; see [`crate::watermark::seal`] for the three-channel form.
pub fn encrypt(m: &Nat, public: &PublicKey) -> Result<Codeword> {
    let (c, i) = cube_and_rank(m, public)?;
    rns::encode(&c, &Nat::from(i), public.moduli())
}

pub(crate) fn cube_and_rank(m: &Nat, public: &PublicKey) -> Result<(Nat, usize)> {
    let i = rank(m, public)?;
    let c = mod_pow(m, &Nat::from(3u32), public.s())?;
    Ok((c, i))
}

/// One cube root of the unit `c`, verified by cubing it back.
pub fn cube_root(c: &Nat, private: &PrivateKey) -> Result<Nat> {
    let s = private.modulus();
    check_unit(c, &s).map_err(|e| match e {
        Error::OutOfRange { .. } if c.is_zero() => Error::NotUnit {
            value: c.clone(),
            modulus: s.clone(),
        },
        other => other,
    })?;
    let x = match (private.mode, &private.q) {
        (Mode::Composite9, Some(q)) => {
            let p = &private.p;
            let xp = mod_pow(&(c % p), &private.exponents[0], p)?;
            let xq = mod_pow(&(c % q), &private.exponents[1], q)?;
            crt_pair(&xp, p, &xq, q)?
        }
        _ => mod_pow(c, &private.exponents[0], &s)?,
    };
    if mod_pow(&x, &Nat::from(3u32), &s)? != *c {
        return Err(Error::NotCubicResidue(c.clone()));
    }
    Ok(x)
}

/// Every cube root of `c`, ascending.
pub fn all_cube_roots(c: &Nat, private: &PrivateKey, public: &PublicKey) -> Result<CompanionSet> {
    private.ensure_matches(public)?;
    let x = cube_root(c, private)?;
    Ok(CompanionSet::from_base(&x, &public.roots))
}

/// Inverse of [`encrypt`]. Works on two- and three-channel codewords alike; the
/// watermark residue, if any, is not inspected.
pub fn decrypt(word: &Codeword, private: &PrivateKey, public: &PublicKey) -> Result<Nat> {
    if word.moduli().s() != public.s() || word.moduli().r() != public.moduli().r() {
        return Err(invalid("codeword moduli do not match the public key"));
    }
    let (c, i) = rns::decode(word);
    select_companion(&c, &i, private, public)
}

pub(crate) fn select_companion(
    c: &Nat,
    i: &Nat,
    private: &PrivateKey,
    public: &PublicKey,
) -> Result<Nat> {
    let set = all_cube_roots(c, private, public)?;
    i.to_usize()
        .and_then(|idx| set.get(idx).cloned())
        .ok_or_else(|| Error::InvalidIndex {
            index: i.clone(),
            count: set.len(),
        })
}

/// One row of the message-to-codeword table: a companion set, its common cube
/// and the codeword for each rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRow {
    pub members: CompanionSet,
    pub cube: Nat,
    pub codewords: Vec<Nat>,
}

impl fmt::Display for MappingRow {
    /// `1,3,9 | 1 | (1,0)(1,1)(1,2) | 27,1,14`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[Nat]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{} | {} | ", list(self.members.members()), self.cube)?;
        for idx in 0..self.members.len() {
            write!(f, "({},{idx})", self.cube)?;
        }
        write!(f, " | {}", list(&self.codewords))
    }
}

/// Largest modulus [`mapping_table`] will enumerate.
pub const TABLE_BUDGET: u64 = 100_000;

/// Every companion set of units mod `s`, ordered by smallest member.
pub fn mapping_table(public: &PublicKey) -> Result<Vec<MappingRow>> {
    let s = public
        .s()
        .to_u64()
        .filter(|&s| s <= TABLE_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded {
            modulus: public.s().clone(),
            budget: TABLE_BUDGET,
        })?;
    let mut seen = vec![false; s as usize];
    let mut rows = Vec::new();
    for m in 1..s {
        if seen[m as usize] || m.gcd(&s) != 1 {
            continue;
        }
        let members = companions(&Nat::from(m), public)?;
        for x in members.members() {
            seen[x.to_usize().expect("member < s")] = true;
        }
        let cube = mod_pow(&Nat::from(m), &Nat::from(3u32), public.s())?;
        let codewords = (0..members.len())
            .map(|i| rns::encode(&cube, &Nat::from(i), public.moduli()).map(|w| w.value().clone()))
            .collect::<Result<Vec<_>>>()?;
        rows.push(MappingRow {
            members,
            cube,
            codewords,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n(x: u64) -> Nat {
        Nat::from(x)
    }

    fn nats(xs: &[u64]) -> Vec<Nat> {
        xs.iter().map(|&x| n(x)).collect()
    }

    #[test]
    fn table_for_13() {
        let (public, _) = keys(Mode::Prime3, 13, None);
        let rows: Vec<String> = mapping_table(&public)
            .unwrap()
            .iter()
            .map(|r| r.to_string())
            .collect();
        assert_eq!(
            rows,
            [
                "1,3,9 | 1 | (1,0)(1,1)(1,2) | 27,1,14",
                "2,5,6 | 8 | (8,0)(8,1)(8,2) | 21,34,8",
                "4,10,12 | 12 | (12,0)(12,1)(12,2) | 12,25,38",
                "7,8,11 | 5 | (5,0)(5,1)(5,2) | 18,31,5",
            ]
        );
    }

    fn keys(mode: Mode, p: u64, q: Option<u64>) -> (PublicKey, PrivateKey) {
        let params = KeygenParams::with_primes(mode, n(p), q.map(n));
        keygen(&params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn forced_keygen_prime3() {
        let (public, private) = keys(Mode::Prime3, 13, None);
        assert_eq!(*public.s(), n(13));
        assert_eq!(public.roots().roots(), nats(&[1, 3, 9]));
        assert_eq!(*public.moduli().r(), n(3));
        assert_eq!(*private.phi(), n(12));
        assert_eq!(private.exponents(), nats(&[3]));
    }

    #[test]
    fn forced_keygen_composite3() {
        let (public, private) = keys(Mode::Composite3, 13, Some(41));
        assert_eq!(*public.s(), n(533));
        assert_eq!(public.roots().roots(), nats(&[1, 42, 165]));
        assert_eq!(*public.moduli().r(), n(3));
        assert_eq!(*private.phi(), n(480));
        assert_eq!(private.exponents(), nats(&[107]));
    }

    #[test]
    fn forced_keygen_composite9() {
        let (public, private) = keys(Mode::Composite9, 7, Some(97));
        assert_eq!(*public.s(), n(679));
        assert_eq!(public.roots().len(), 9);
        assert_eq!(*public.moduli().r(), n(9));
        assert_eq!(private.exponents(), nats(&[1, 11]));
        assert_eq!(*private.phi(), n(576));
    }

    #[test]
    fn prime3_exponent_inverts_cubes() {
        let (_, private) = keys(Mode::Prime3, 13, None);
        for m in 1..13u64 {
            let c = n(m.pow(3) % 13);
            let x = cube_root(&c, &private).unwrap();
            assert_eq!(x.pow(3) % 13u32, c);
        }
    }

    #[test]
    fn forced_keygen_rejects_bad_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = [
            KeygenParams::with_primes(Mode::Prime3, n(19), None), // 9 | 18
            KeygenParams::with_primes(Mode::Prime3, n(11), None), // 3 ∤ 10
            KeygenParams::with_primes(Mode::Prime3, n(15), None),
            KeygenParams::with_primes(Mode::Composite3, n(7), Some(n(13))), // both 1 mod 3
            KeygenParams::with_primes(Mode::Composite9, n(13), Some(n(41))),
            KeygenParams::with_primes(Mode::Composite9, n(13), Some(n(13))),
            KeygenParams::with_primes(Mode::Composite3, n(13), None),
        ];
        for params in &bad {
            assert!(keygen(params, &mut rng).is_err(), "{params:?}");
        }
    }

    #[test]
    fn companions_examples() {
        let (p13, _) = keys(Mode::Prime3, 13, None);
        let (p533, _) = keys(Mode::Composite3, 13, Some(41));
        assert_eq!(companions(&n(8), &p533).unwrap().members(), nats(&[8, 254, 336]));
        assert_eq!(companions(&n(1), &p13).unwrap().members(), nats(&[1, 3, 9]));
        assert!(matches!(
            companions(&n(13), &p533),
            Err(Error::NotUnit { .. })
        ));
        assert!(matches!(
            companions(&n(0), &p13),
            Err(Error::OutOfRange { .. })
        ));
        assert!(companions(&n(13), &p13).is_err());
    }

    #[test]
    fn companions_679_match_preimages() {
        let (p679, _) = keys(Mode::Composite9, 7, Some(97));
        let set = companions(&n(233), &p679).unwrap();
        // brute-force preimages of 246 = 233^3 mod 679
        assert_eq!(
            set.members(),
            nats(&[39, 51, 148, 233, 298, 330, 492, 536, 589])
        );
    }

    #[test]
    fn rank_examples() {
        let (p13, _) = keys(Mode::Prime3, 13, None);
        let (p533, _) = keys(Mode::Composite3, 13, Some(41));
        assert_eq!(rank(&n(9), &p13).unwrap(), 2);
        assert_eq!(rank(&n(8), &p533).unwrap(), 0);
        assert_eq!(rank(&n(1), &p13).unwrap(), 0);
        assert_eq!(rank(&n(1), &p533).unwrap(), 0);
    }

    #[test]
    fn encrypt_examples() {
        let (p13, _) = keys(Mode::Prime3, 13, None);
        let (p533, _) = keys(Mode::Composite3, 13, Some(41));
        assert_eq!(*encrypt(&n(9), &p13).unwrap().value(), n(14));
        assert_eq!(*encrypt(&n(2), &p13).unwrap().value(), n(21));
        assert_eq!(*encrypt(&n(8), &p533).unwrap().value(), n(1578));
        assert_eq!(encrypt(&n(8), &p533).unwrap(), encrypt(&n(8), &p533).unwrap());
    }

    #[test]
    fn cube_root_examples() {
        let (_, k13) = keys(Mode::Prime3, 13, None);
        let (_, k533) = keys(Mode::Composite3, 13, Some(41));
        assert_eq!(cube_root(&n(8), &k13).unwrap(), n(5));
        let one = cube_root(&n(1), &k13).unwrap();
        assert_eq!(one.pow(3) % 13u32, n(1));
        let x = cube_root(&n(512), &k533).unwrap();
        assert!([n(8), n(254), n(336)].contains(&x));
    }

    #[test]
    fn cube_root_rejects_non_residues() {
        let (_, k13) = keys(Mode::Prime3, 13, None);
        // cubes mod 13 are {1, 5, 8, 12}
        assert!(matches!(cube_root(&n(2), &k13), Err(Error::NotCubicResidue(_))));
        assert!(matches!(cube_root(&n(0), &k13), Err(Error::NotUnit { .. })));
        assert!(cube_root(&n(13), &k13).is_err());
        let (_, k679) = keys(Mode::Composite9, 7, Some(97));
        assert!(matches!(cube_root(&n(2), &k679), Err(Error::NotCubicResidue(_))));
    }

    #[test]
    fn all_cube_roots_examples() {
        let (p13, k13) = keys(Mode::Prime3, 13, None);
        assert_eq!(all_cube_roots(&n(1), &k13, &p13).unwrap().members(), nats(&[1, 3, 9]));
        assert_eq!(all_cube_roots(&n(8), &k13, &p13).unwrap().members(), nats(&[2, 5, 6]));
        let (p679, k679) = keys(Mode::Composite9, 7, Some(97));
        let set = all_cube_roots(&n(246), &k679, &p679).unwrap();
        assert_eq!(set.len(), 9);
        for x in set.members() {
            assert_eq!(x.pow(3) % 679u32, n(246));
        }
    }

    #[test]
    fn decrypt_examples() {
        let (p13, k13) = keys(Mode::Prime3, 13, None);
        let word = |t| Codeword::new(n(t), p13.moduli().clone()).unwrap();
        assert_eq!(decrypt(&word(14), &k13, &p13).unwrap(), n(9));
        assert_eq!(decrypt(&word(27), &k13, &p13).unwrap(), n(1));
        // T = 0 decodes to c = 0, which has no unit cube root
        assert!(decrypt(&word(0), &k13, &p13).is_err());
    }

    #[test]
    fn decrypt_rejects_unaddressable_index() {
        // r = 4 when 3 | s: index 3 names no companion
        let p = n(7);
        let q = n(3);
        let (public, private) = keygen(
            &KeygenParams::with_primes(Mode::Composite3, p, Some(q)),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(*public.moduli().r(), n(4));
        // payload 8 under s = 21, index 3 under r = 4
        let t = crt_pair(&n(8), &n(21), &n(3), &n(4)).unwrap();
        let word = Codeword::new(t, public.moduli().clone()).unwrap();
        assert!(matches!(
            decrypt(&word, &private, &public),
            Err(Error::InvalidIndex { count: 3, .. })
        ));
    }

    #[test]
    fn round_trip_533() {
        let (public, private) = keys(Mode::Composite3, 13, Some(41));
        for m in (1..533u64).filter(|m| m % 13 != 0 && m % 41 != 0) {
            let w = encrypt(&n(m), &public).unwrap();
            assert_eq!(decrypt(&w, &private, &public).unwrap(), n(m));
        }
    }

    #[test]
    fn mismatched_keys_rejected() {
        let (p13, _) = keys(Mode::Prime3, 13, None);
        let (_, k533) = keys(Mode::Composite3, 13, Some(41));
        let w = encrypt(&n(9), &p13).unwrap();
        assert!(decrypt(&w, &k533, &p13).is_err());
    }

    #[test]
    fn random_keygen_all_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mode in [Mode::Prime3, Mode::Composite3, Mode::Composite9] {
            for bits in [6u64, 12, 64] {
                let params = KeygenParams::new(mode, bits).watermark(Some(n(101)));
                let (public, private) = keygen(&params, &mut rng).unwrap();
                assert_eq!(Mode::infer(private.p(), private.q()).unwrap(), mode);
                assert_eq!(public.roots().len(), mode.root_count());
                assert_eq!(private.p().bits(), bits);
                let m = n(1_000_003) % public.s();
                if m.gcd(public.s()).is_one() && !m.is_zero() {
                    let w = encrypt(&m, &public).unwrap();
                    assert_eq!(decrypt(&w, &private, &public).unwrap(), m);
                }
            }
        }
        let too_small = KeygenParams::new(Mode::Prime3, 3);
        assert!(keygen(&too_small, &mut rng).is_err());
    }

    #[test]
    fn from_parts_checks_consistency() {
        let (_, k) = keys(Mode::Composite3, 13, Some(41));
        assert!(PrivateKey::from_parts(Mode::Composite3, n(13), Some(n(41)), n(480), nats(&[107])).is_ok());
        assert!(PrivateKey::from_parts(Mode::Composite3, n(13), Some(n(41)), n(481), nats(&[107])).is_err());
        assert!(PrivateKey::from_parts(Mode::Composite3, n(13), Some(n(41)), n(480), nats(&[106])).is_err());
        assert_eq!(k.modulus(), n(533));
    }
}
