#![allow(dead_code)]

use cubic_rns::cubic::{keygen, KeygenParams, Mode};
use cubic_rns::{Nat, PrivateKey, PublicKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn n(x: u64) -> Nat {
    Nat::from(x)
}

pub fn nats(xs: &[u64]) -> Vec<Nat> {
    xs.iter().map(|&x| n(x)).collect()
}

/// Keys for fixed primes, with an optional watermark modulus.
pub fn fixed_keys(p: u64, q: Option<u64>, t: Option<u64>) -> (PublicKey, PrivateKey) {
    let mode = Mode::infer(&n(p), q.map(n).as_ref()).expect("admissible primes");
    let params = KeygenParams::with_primes(mode, n(p), q.map(n)).watermark(t.map(n));
    keygen(&params, &mut ChaCha8Rng::seed_from_u64(0)).expect("keygen")
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn units(s: u64) -> impl Iterator<Item = u64> {
    (1..s).filter(move |&m| gcd(m, s) == 1)
}
