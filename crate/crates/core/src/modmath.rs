//! Modular arithmetic on [`Nat`]: powers, inverses, CRT, square roots and primes.
//!
//! Everything here is a pure function on immutable values. Randomised routines take
//! the random source from the caller.

use num_bigint::{BigInt, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::Nat;

pub const DEFAULT_MR_ROUNDS: usize = 64;
pub const DEFAULT_PRIME_ATTEMPTS: usize = 100_000;

const SMALL_PRIMES: [u32; 46] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199,
];

/// A residue and its modulus, `0 <= a < m`, `m >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPair {
    a: Nat,
    m: Nat,
}

impl ModPair {
    pub fn new(a: Nat, m: Nat) -> Result<Self> {
        check_modulus(&m)?;
        if a >= m {
            return Err(Error::OutOfRange {
                what: "residue",
                value: a,
                bound: m,
            });
        }
        Ok(Self { a, m })
    }

    pub fn residue(&self) -> &Nat {
        &self.a
    }

    pub fn modulus(&self) -> &Nat {
        &self.m
    }
}

pub(crate) fn check_modulus(m: &Nat) -> Result<()> {
    if *m < Nat::from(2u32) {
        Err(Error::InvalidModulus(m.clone()))
    } else {
        Ok(())
    }
}

/// `base^exp mod modulus` by left-to-right square-and-multiply. `0^0 = 1`.
pub fn mod_pow(base: &Nat, exp: &Nat, modulus: &Nat) -> Result<Nat> {
    check_modulus(modulus)?;
    let base = base % modulus;
    let mut acc = Nat::one();
    for i in (0..exp.bits()).rev() {
        acc = &acc * &acc % modulus;
        if exp.bit(i) {
            acc = acc * &base % modulus;
        }
    }
    Ok(acc)
}

/// Inverse of `a` modulo `modulus` via the extended Euclidean algorithm.
pub fn mod_inv(a: &Nat, modulus: &Nat) -> Result<Nat> {
    check_modulus(modulus)?;
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    // old_r = gcd(a, m) and old_s * a = gcd (mod m)
    if !old_r.is_one() {
        return Err(Error::NotInvertible {
            value: a.clone(),
            modulus: modulus.clone(),
            gcd: old_r.magnitude().clone(),
        });
    }
    Ok(old_s.mod_floor(&m).magnitude().clone())
}

/// The unique `T < p*q` with `T = a_p (mod p)` and `T = a_q (mod q)`.
pub fn crt_pair(a_p: &Nat, p: &Nat, a_q: &Nat, q: &Nat) -> Result<Nat> {
    check_modulus(p)?;
    check_modulus(q)?;
    if !p.gcd(q).is_one() {
        return Err(Error::ModuliNotCoprime {
            a: p.clone(),
            b: q.clone(),
        });
    }
    for (a, m) in [(a_p, p), (a_q, q)] {
        if a >= m {
            return Err(Error::OutOfRange {
                what: "residue",
                value: a.clone(),
                bound: m.clone(),
            });
        }
    }
    let n = p * q;
    let q_inv = mod_inv(&(q % p), p)?;
    let p_inv = mod_inv(&(p % q), q)?;
    Ok((a_p * q * q_inv + a_q * p * p_inv) % n)
}

/// Square root of `a` modulo the odd prime `p`, or `None` for a non-residue.
///
/// Returns the smaller of the two roots. Uses `a^((p+1)/4)` when `p = 3 (mod 4)`
/// and Tonelli-Shanks otherwise. The result is unspecified if `p` is not prime.
pub fn mod_sqrt(a: &Nat, p: &Nat) -> Result<Option<Nat>> {
    check_modulus(p)?;
    if p.is_even() {
        return Err(Error::InvalidModulus(p.clone()));
    }
    if a >= p {
        return Err(Error::OutOfRange {
            what: "residue",
            value: a.clone(),
            bound: p.clone(),
        });
    }
    if a.is_zero() {
        return Ok(Some(Nat::zero()));
    }
    let one = Nat::one();
    let p_minus_1 = p - &one;
    if mod_pow(a, &(&p_minus_1 >> 1), p)? != one {
        return Ok(None);
    }

    let root = if (p % 4u32) == Nat::from(3u32) {
        mod_pow(a, &((p + &one) >> 2), p)?
    } else {
        tonelli_shanks(a, p)?
    };
    let other = p - &root;
    Ok(Some(root.min(other)))
}

fn tonelli_shanks(a: &Nat, p: &Nat) -> Result<Nat> {
    let one = Nat::one();
    let p_minus_1 = p - &one;
    let twos = p_minus_1.trailing_zeros().unwrap_or(0);
    let odd = &p_minus_1 >> twos;

    // any quadratic non-residue
    let half = &p_minus_1 >> 1;
    let mut z = Nat::from(2u32);
    while mod_pow(&z, &half, p)? != p_minus_1 {
        z += 1u32;
    }

    let mut m = twos;
    let mut c = mod_pow(&z, &odd, p)?;
    let mut t = mod_pow(a, &odd, p)?;
    let mut r = mod_pow(a, &((&odd + &one) >> 1), p)?;
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = &t2 * &t2 % p;
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = &b * &b % p;
        }
        m = i;
        c = &b * &b % p;
        t = t * &c % p;
        r = r * b % p;
    }
    Ok(r)
}

/// Miller-Rabin with `rounds` bases drawn from the thread-local generator.
pub fn is_probable_prime(n: &Nat, rounds: usize) -> bool {
    is_probable_prime_with(n, rounds, &mut rand::thread_rng())
}

/// Miller-Rabin with `rounds` random bases from `rng`, after trial division by
/// the primes below 200.
pub fn is_probable_prime_with<R: Rng + ?Sized>(n: &Nat, rounds: usize, rng: &mut R) -> bool {
    let rounds = rounds.max(1);
    if let Some(small) = n.to_u32() {
        if small < 2 {
            return false;
        }
        if SMALL_PRIMES.contains(&small) {
            return true;
        }
    }
    if SMALL_PRIMES.iter().any(|&sp| (n % sp).is_zero()) {
        return false;
    }
    if *n < Nat::from(200u32 * 200) {
        // trial division above was exhaustive
        return true;
    }

    let one = Nat::one();
    let two = Nat::from(2u32);
    let n_minus_1 = n - &one;
    let twos = n_minus_1.trailing_zeros().unwrap_or(0);
    let odd = &n_minus_1 >> twos;

    'witness: for _ in 0..rounds {
        let base = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = base.modpow(&odd, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..twos {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A congruence condition `n = residue (mod modulus)`, or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
    pub holds: bool,
}

impl Congruence {
    pub fn is(residue: u64, modulus: u64) -> Self {
        Self {
            residue,
            modulus,
            holds: true,
        }
    }

    pub fn is_not(residue: u64, modulus: u64) -> Self {
        Self {
            residue,
            modulus,
            holds: false,
        }
    }

    pub fn accepts(&self, n: &Nat) -> bool {
        let r = (n % self.modulus).to_u64().unwrap_or(u64::MAX);
        (r == self.residue % self.modulus) == self.holds
    }
}

/// A probable prime of exactly `bits` bits meeting every congruence.
///
/// Gives up with [`Error::GenerationFailed`] after `max_attempts` candidates.
pub fn random_prime<R: Rng + ?Sized>(
    bits: u64,
    constraints: &[Congruence],
    rng: &mut R,
    max_attempts: usize,
) -> Result<Nat> {
    if bits < 4 {
        return Err(Error::UnsupportedModulus(format!(
            "prime size {bits} bits is below the 4-bit minimum"
        )));
    }
    for _ in 0..max_attempts {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if constraints.iter().all(|c| c.accepts(&candidate))
            && is_probable_prime_with(&candidate, DEFAULT_MR_ROUNDS, rng)
        {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationFailed {
        attempts: max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n(x: u64) -> Nat {
        Nat::from(x)
    }

    #[test]
    fn mod_pow_table_values() {
        assert_eq!(mod_pow(&n(2), &n(3), &n(13)).unwrap(), n(8));
        assert_eq!(mod_pow(&n(8), &n(3), &n(13)).unwrap(), n(5));
        assert_eq!(mod_pow(&n(0), &n(0), &n(13)).unwrap(), n(1));
        assert_eq!(mod_pow(&n(7), &n(0), &n(10)).unwrap(), n(1));
    }

    #[test]
    fn mod_pow_rejects_small_modulus() {
        assert!(matches!(
            mod_pow(&n(2), &n(3), &n(1)),
            Err(Error::InvalidModulus(_))
        ));
        assert!(mod_pow(&n(2), &n(3), &n(0)).is_err());
    }

    #[test]
    fn mod_pow_matches_naive_multiplication() {
        for m in (2u64..=1000).step_by(37).chain([999, 1000]) {
            for base in [0u64, 1, 2, 3, 17, 500, 999] {
                let mut naive = 1 % m;
                for e in 0u64..=1000 {
                    if e % 97 == 0 || e == 1000 {
                        assert_eq!(
                            mod_pow(&n(base), &n(e), &n(m)).unwrap(),
                            n(naive),
                            "{base}^{e} mod {m}"
                        );
                    }
                    naive = naive * (base % m) % m;
                }
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inv(&n(13), &n(41)).unwrap(), n(19));
        assert_eq!(mod_inv(&n(41), &n(13)).unwrap(), n(7));
        assert_eq!(mod_inv(&n(1), &n(99)).unwrap(), n(1));
    }

    #[test]
    fn inverse_reports_gcd() {
        match mod_inv(&n(6), &n(15)) {
            Err(Error::NotInvertible { gcd, .. }) => assert_eq!(gcd, n(3)),
            other => panic!("expected NotInvertible, got {other:?}"),
        }
        assert!(mod_inv(&n(0), &n(7)).is_err());
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_pair(&n(1), &n(13), &n(2), &n(3)).unwrap(), n(14));
        assert_eq!(crt_pair(&n(3), &n(13), &n(1), &n(41)).unwrap(), n(42));
        assert_eq!(crt_pair(&n(0), &n(7), &n(0), &n(97)).unwrap(), n(0));
        assert!(matches!(
            crt_pair(&n(1), &n(6), &n(1), &n(9)),
            Err(Error::ModuliNotCoprime { .. })
        ));
        assert!(crt_pair(&n(13), &n(13), &n(1), &n(3)).is_err());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(mod_sqrt(&n(10), &n(13)).unwrap(), Some(n(6)));
        assert_eq!(mod_sqrt(&n(0), &n(13)).unwrap(), Some(n(0)));
        // brute-force scan of [0, 907): roots of 904 are 138 and 769
        assert_eq!(mod_sqrt(&n(904), &n(907)).unwrap(), Some(n(138)));
        // 2 is a non-residue mod 13
        assert_eq!(mod_sqrt(&n(2), &n(13)).unwrap(), None);
        assert!(matches!(
            mod_sqrt(&n(1), &n(14)),
            Err(Error::InvalidModulus(_))
        ));
    }

    #[test]
    fn sqrt_agrees_with_scan_for_small_primes() {
        for p in [3u64, 5, 7, 13, 17, 41, 97, 113, 193, 257, 641, 907, 7681] {
            for a in 0..p.min(400) {
                let scan = (0..p).find(|x| x * x % p == a);
                let got = mod_sqrt(&n(a), &n(p)).unwrap();
                assert_eq!(got, scan.map(n), "sqrt({a}) mod {p}");
            }
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_probable_prime(&n(907), 64));
        assert!(!is_probable_prime(&n(1), 64));
        assert!(!is_probable_prime(&n(0), 64));
        assert!(!is_probable_prime(&n(533), 64));
        assert!(is_probable_prime(&n(2), 1));
        // Carmichael numbers
        assert!(!is_probable_prime(&n(561), 64));
        assert!(!is_probable_prime(&n(41041), 64));
        // 2^61 - 1
        assert!(is_probable_prime(&n((1 << 61) - 1), 64));
        assert!(!is_probable_prime(&(n((1 << 61) - 1) * n(1_000_003)), 64));
    }

    #[test]
    fn primality_matches_sieve() {
        let limit = 50_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (i, &prime) in sieve.iter().enumerate() {
            assert_eq!(
                is_probable_prime_with(&n(i as u64), 8, &mut rng),
                prime,
                "{i}"
            );
        }
    }

    #[test]
    fn four_bit_constrained_prime() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cs = [Congruence::is(1, 3), Congruence::is_not(1, 9)];
        // 13 is the only 4-bit prime meeting both constraints
        for _ in 0..10 {
            assert_eq!(random_prime(4, &cs, &mut rng, 10_000).unwrap(), n(13));
        }
    }

    #[test]
    fn unsatisfiable_constraints_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let err = random_prime(16, &[Congruence::is(0, 4)], &mut rng, 5_000).unwrap_err();
        assert!(matches!(err, Error::GenerationFailed { attempts: 5_000 }));
        assert!(random_prime(3, &[], &mut rng, 10).is_err());
    }

    #[test]
    fn ten_bit_prime_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q = random_prime(10, &[Congruence::is(1, 3)], &mut rng, 10_000).unwrap();
            let v = q.to_u64().unwrap();
            assert!((512..1024).contains(&v));
            assert_eq!(v % 3, 1);
            assert!((2..v).take_while(|d| d * d <= v).all(|d| v % d != 0));
        }
    }

    #[test]
    fn mod_pair_invariants() {
        assert!(ModPair::new(n(3), n(5)).is_ok());
        assert!(ModPair::new(n(5), n(5)).is_err());
        assert!(ModPair::new(n(0), n(1)).is_err());
    }
}
