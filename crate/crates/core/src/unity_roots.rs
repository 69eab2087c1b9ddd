//! Cube roots of unity modulo a prime or a product of two distinct primes.

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::modmath::{self, crt_pair, mod_inv, mod_pow, mod_sqrt};
use crate::Nat;

/// All `x` with `x^3 = 1 (mod modulus)`, strictly ascending. Always contains 1;
/// has 1, 3 or 9 elements and is closed under multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootsOfUnity {
    modulus: Nat,
    roots: Vec<Nat>,
}

impl RootsOfUnity {
    /// Builds the set from an explicit list, checking every invariant.
    pub fn from_list(modulus: Nat, mut roots: Vec<Nat>) -> Result<Self> {
        modmath::check_modulus(&modulus)?;
        roots.sort();
        roots.dedup();
        if ![1, 3, 9].contains(&roots.len()) {
            return Err(Error::InvalidKey(format!(
                "{} roots of unity listed, expected 1, 3 or 9",
                roots.len()
            )));
        }
        if roots[0] != Nat::one() {
            return Err(Error::InvalidKey("roots of unity must include 1".into()));
        }
        let three = Nat::from(3u32);
        for x in &roots {
            if *x >= modulus || !mod_pow(x, &three, &modulus)?.is_one() {
                return Err(Error::InvalidKey(format!(
                    "{x} is not a cube root of unity modulo {modulus}"
                )));
            }
        }
        for a in &roots {
            for b in &roots {
                if roots.binary_search(&(a * b % &modulus)).is_err() {
                    return Err(Error::InvalidKey(
                        "roots of unity are not closed under multiplication".into(),
                    ));
                }
            }
        }
        Ok(Self { modulus, roots })
    }

    pub fn modulus(&self) -> &Nat {
        &self.modulus
    }

    pub fn roots(&self) -> &[Nat] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// The cube roots of unity modulo an odd prime `p`.
///
/// When `p = 1 (mod 3)` the nontrivial roots solve `x^2 + x + 1 = 0`, so they are
/// `(-1 +/- sqrt(-3)) / 2`. Otherwise only 1 is a root. Primality is not checked.
pub fn cube_roots_of_unity_prime(p: &Nat) -> Result<RootsOfUnity> {
    modmath::check_modulus(p)?;
    if p.is_even() {
        return Err(Error::InvalidModulus(p.clone()));
    }
    let one = Nat::one();
    if !((p - &one) % 3u32).is_zero() {
        return Ok(RootsOfUnity {
            modulus: p.clone(),
            roots: vec![one],
        });
    }
    let minus_three = p - Nat::from(3u32);
    let s = mod_sqrt(&minus_three, p)?.ok_or_else(|| {
        Error::UnsupportedModulus(format!("-3 has no square root modulo {p}; is it prime?"))
    })?;
    let half = mod_inv(&Nat::from(2u32), p)?;
    let alpha = (p - &one + &s) * &half % p;
    let alpha_sq = &alpha * &alpha % p;
    let mut roots = vec![one, alpha, alpha_sq];
    roots.sort();
    Ok(RootsOfUnity {
        modulus: p.clone(),
        roots,
    })
}

/// Like [`cube_roots_of_unity_prime`] but rejects a composite `p`.
pub fn cube_roots_of_unity_prime_checked(p: &Nat) -> Result<RootsOfUnity> {
    if !modmath::is_probable_prime(p, modmath::DEFAULT_MR_ROUNDS) {
        return Err(Error::UnsupportedModulus(format!("{p} is not prime")));
    }
    cube_roots_of_unity_prime(p)
}

/// The cube roots of unity modulo `p*q`: every CRT combination of the per-prime roots.
pub fn cube_roots_of_unity_composite(p: &Nat, q: &Nat) -> Result<RootsOfUnity> {
    if p == q {
        return Err(Error::UnsupportedModulus(format!(
            "repeated prime factor {p}"
        )));
    }
    let rp = cube_roots_of_unity_prime(p)?;
    let rq = cube_roots_of_unity_prime(q)?;
    let mut roots = Vec::with_capacity(rp.len() * rq.len());
    for a in rp.roots() {
        for b in rq.roots() {
            roots.push(crt_pair(a, p, b, q)?);
        }
    }
    roots.sort();
    Ok(RootsOfUnity {
        modulus: p * q,
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats(xs: &[u64]) -> Vec<Nat> {
        xs.iter().map(|&x| Nat::from(x)).collect()
    }

    fn scan(m: u64) -> Vec<Nat> {
        nats(&(1..m).filter(|x| x * x % m * x % m == 1).collect::<Vec<_>>())
    }

    #[test]
    fn prime_examples() {
        let r13 = cube_roots_of_unity_prime(&Nat::from(13u32)).unwrap();
        assert_eq!(r13.roots(), nats(&[1, 3, 9]));
        let r7 = cube_roots_of_unity_prime(&Nat::from(7u32)).unwrap();
        assert_eq!(r7.roots(), nats(&[1, 2, 4]));
        let r5 = cube_roots_of_unity_prime(&Nat::from(5u32)).unwrap();
        assert_eq!(r5.roots(), nats(&[1]));
        let r3 = cube_roots_of_unity_prime(&Nat::from(3u32)).unwrap();
        assert_eq!(r3.roots(), nats(&[1]));
    }

    #[test]
    fn composite_examples() {
        let r = cube_roots_of_unity_composite(&Nat::from(13u32), &Nat::from(41u32)).unwrap();
        assert_eq!(r.roots(), nats(&[1, 42, 165]));
        assert_eq!(*r.modulus(), Nat::from(533u32));
        let r = cube_roots_of_unity_composite(&Nat::from(7u32), &Nat::from(97u32)).unwrap();
        assert_eq!(
            r.roots(),
            nats(&[1, 158, 326, 352, 389, 449, 520, 583, 617])
        );
        let r = cube_roots_of_unity_composite(&Nat::from(5u32), &Nat::from(11u32)).unwrap();
        assert_eq!(r.roots(), nats(&[1]));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(cube_roots_of_unity_composite(&Nat::from(13u32), &Nat::from(13u32)).is_err());
        assert!(cube_roots_of_unity_prime(&Nat::from(12u32)).is_err());
        assert!(cube_roots_of_unity_prime_checked(&Nat::from(91u32)).is_err());
        assert!(cube_roots_of_unity_prime_checked(&Nat::from(907u32)).is_ok());
    }

    #[test]
    fn matches_scan_for_small_moduli() {
        let primes: Vec<u64> = (3..200u64)
            .filter(|&n| (2..n).all(|d| n % d != 0))
            .collect();
        for &p in &primes {
            let got = cube_roots_of_unity_prime(&Nat::from(p)).unwrap();
            assert_eq!(got.roots(), scan(p), "p = {p}");
        }
        for (i, &p) in primes.iter().enumerate() {
            for &q in primes[i + 1..].iter().step_by(3) {
                if p * q > 10_000 {
                    break;
                }
                let got = cube_roots_of_unity_composite(&Nat::from(p), &Nat::from(q)).unwrap();
                let expected = scan(p * q);
                assert_eq!(got.roots(), expected, "n = {p}*{q}");
                let k = usize::from((p - 1) % 3 == 0) + usize::from((q - 1) % 3 == 0);
                assert_eq!(got.len(), [1, 3, 9][k]);
            }
        }
    }

    #[test]
    fn from_list_validates() {
        let m = Nat::from(13u32);
        assert!(RootsOfUnity::from_list(m.clone(), nats(&[9, 1, 3])).is_ok());
        assert!(RootsOfUnity::from_list(m.clone(), nats(&[1, 3, 4])).is_err());
        assert!(RootsOfUnity::from_list(m.clone(), nats(&[3, 9])).is_err());
        assert!(RootsOfUnity::from_list(Nat::from(679u32), nats(&[1, 538, 389, 99, 2, 487, 197, 100, 585])).is_err());
    }
}
