//! Watermark channel: a keyed tag in a third RNS residue.
//!
//! The tag is `w = (k1·(c + i) + k2) mod t`. It binds both the ciphertext residue
//! and the companion index, so changing either channel in transit breaks it with
//! probability about `1 - 1/t`. This is a demonstration of the channel, not a MAC.

use num_traits::{One, Zero};

use crate::cubic::{self, PrivateKey, PublicKey};
use crate::error::{Error, Result};
use crate::modmath::check_modulus;
use crate::rns::{self, Codeword};
use crate::Nat;

/// Shared secret `(k1, k2)` and the tag modulus `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkKey {
    k1: Nat,
    k2: Nat,
    t: Nat,
}

impl WatermarkKey {
    pub fn new(k1: Nat, k2: Nat, t: Nat) -> Result<Self> {
        check_modulus(&t)?;
        if k1.is_zero() || k1 >= t {
            return Err(Error::InvalidKey(format!("k1 must satisfy 0 < k1 < {t}")));
        }
        if k2 >= t {
            return Err(Error::InvalidKey(format!("k2 must satisfy k2 < {t}")));
        }
        Ok(Self { k1, k2, t })
    }

    pub fn k1(&self) -> &Nat {
        &self.k1
    }

    pub fn k2(&self) -> &Nat {
        &self.k2
    }

    pub fn t(&self) -> &Nat {
        &self.t
    }

    fn ensure_matches(&self, public: &PublicKey) -> Result<()> {
        match public.moduli().t() {
            Some(t) if *t == self.t => Ok(()),
            Some(t) => Err(Error::InvalidKey(format!(
                "watermark modulus {} differs from the public key's {t}",
                self.t
            ))),
            None => Err(Error::InvalidKey(
                "public key has no watermark modulus".into(),
            )),
        }
    }
}

pub fn derive_tag(c: &Nat, i: &Nat, key: &WatermarkKey) -> Nat {
    (&key.k1 * (c + i) + &key.k2) % &key.t
}

/// Encrypts `m` and attaches the tag as the third residue.
pub fn seal(m: &Nat, public: &PublicKey, key: &WatermarkKey) -> Result<Codeword> {
    key.ensure_matches(public)?;
    let (c, i) = cubic::cube_and_rank(m, public)?;
    let i = Nat::from(i);
    let w = derive_tag(&c, &i, key);
    rns::encode3(&c, &i, &w, public.moduli())
}

/// Outcome of [`unseal`]. `message` is absent when the payload did not decrypt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unsealed {
    pub message: Option<Nat>,
    pub authentic: bool,
}

impl Unsealed {
    /// The message, only if the tag verified.
    pub fn accepted(&self) -> Option<&Nat> {
        self.message.as_ref().filter(|_| self.authentic)
    }
}

/// Decrypts and checks the tag. Decryption failures come back as
/// `authentic = false` rather than as errors; only key misuse is an error.
pub fn unseal(
    word: &Codeword,
    private: &PrivateKey,
    public: &PublicKey,
    key: &WatermarkKey,
) -> Result<Unsealed> {
    key.ensure_matches(public)?;
    if word.moduli() != public.moduli() {
        return Err(Error::InvalidKey(
            "codeword moduli do not match the public key".into(),
        ));
    }
    let (c, i, w) = rns::decode3(word)?;
    let tag_ok = w == derive_tag(&c, &i, key);
    match cubic::select_companion(&c, &i, private, public) {
        Ok(m) => Ok(Unsealed {
            message: Some(m),
            authentic: tag_ok,
        }),
        Err(Error::InvalidKey(msg)) => Err(Error::InvalidKey(msg)),
        Err(_) => Ok(Unsealed {
            message: None,
            authentic: false,
        }),
    }
}

/// A key with `k1 = 1, k2 = 0`: the tag is just `(c + i) mod t`.
pub fn identity_key(t: Nat) -> Result<WatermarkKey> {
    WatermarkKey::new(Nat::one(), Nat::zero(), t)
}
