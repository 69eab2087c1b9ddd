//! Residue-number-system coding of `(c, i)` and `(c, i, w)` into one codeword.
//!
//! A codeword `T` satisfies `T mod s = c` (payload), `T mod r = i` (index) and,
//! when a watermark modulus is present, `T mod t = w`.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modmath::{check_modulus, mod_inv};
use crate::Nat;

/// Default watermark modulus.
pub const DEFAULT_WATERMARK_MODULUS: u32 = 101;

/// Pairwise coprime moduli `s` (payload), `r` (index) and optional `t` (watermark).
///
/// The CRT basis is computed once at construction; clones share it.
#[derive(Debug, Clone)]
pub struct ModuliSet(Arc<Inner>);

#[derive(Debug)]
struct Inner {
    s: Nat,
    r: Nat,
    t: Option<Nat>,
    product: Nat,
    /// `basis[k] = 1 (mod m_k)` and `0` modulo the other moduli.
    basis: Vec<Nat>,
    small: Option<SmallBasis>,
    /// The `(s, r)` set, present only when `t` is.
    pair: Option<ModuliSet>,
}

/// Word-sized copy of the basis, used when the product fits in a `u64`.
#[derive(Debug)]
struct SmallBasis {
    moduli: Vec<u64>,
    product: u64,
    basis: Vec<u64>,
}

impl SmallBasis {
    fn new(moduli: &[&Nat], product: &Nat, basis: &[Nat]) -> Option<Self> {
        Some(Self {
            moduli: moduli.iter().map(|m| m.to_u64()).collect::<Option<_>>()?,
            product: product.to_u64()?,
            basis: basis.iter().map(|b| b.to_u64()).collect::<Option<_>>()?,
        })
    }

    fn combine(&self, residues: &[&Nat]) -> Nat {
        let m = u128::from(self.product);
        let mut acc = 0u128;
        for (x, b) in residues.iter().zip(&self.basis) {
            let x = x.to_u64().expect("residue checked against its modulus");
            acc = (acc + u128::from(x) * u128::from(*b) % m) % m;
        }
        Nat::from(acc as u64)
    }
}

impl PartialEq for ModuliSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.s == other.0.s && self.0.r == other.0.r && self.0.t == other.0.t)
    }
}

impl Eq for ModuliSet {}

impl ModuliSet {
    pub fn new(s: Nat, r: Nat, t: Option<Nat>) -> Result<Self> {
        check_modulus(&s)?;
        check_modulus(&r)?;
        ensure_coprime(&s, &r)?;
        if let Some(t) = &t {
            check_modulus(t)?;
            ensure_coprime(&s, t)?;
            ensure_coprime(&r, t)?;
        }
        let pair = match t {
            Some(_) => Some(Self::build(s.clone(), r.clone(), None, None)?),
            None => None,
        };
        Self::build(s, r, t, pair)
    }

    fn build(s: Nat, r: Nat, t: Option<Nat>, pair: Option<ModuliSet>) -> Result<Self> {
        let mut moduli = vec![&s, &r];
        moduli.extend(t.as_ref());
        let product: Nat = moduli.iter().copied().product();
        let basis = moduli
            .iter()
            .map(|m| {
                let rest = &product / *m;
                Ok(mod_inv(&rest, m)? * rest)
            })
            .collect::<Result<Vec<_>>>()?;
        let small = SmallBasis::new(&moduli, &product, &basis);
        Ok(Self(Arc::new(Inner {
            s,
            r,
            t,
            product,
            basis,
            small,
            pair,
        })))
    }

    pub fn pair(s: Nat, r: Nat) -> Result<Self> {
        Self::new(s, r, None)
    }

    pub fn s(&self) -> &Nat {
        &self.0.s
    }

    pub fn r(&self) -> &Nat {
        &self.0.r
    }

    pub fn t(&self) -> Option<&Nat> {
        self.0.t.as_ref()
    }

    /// Product of all present moduli.
    pub fn product(&self) -> &Nat {
        &self.0.product
    }

    /// The same set with the watermark channel dropped.
    pub fn without_watermark(&self) -> Self {
        self.0.pair.clone().unwrap_or_else(|| self.clone())
    }

    /// The unique `T < product` with the given residues, in modulus order.
    fn combine(&self, residues: &[&Nat]) -> Nat {
        if let Some(small) = &self.0.small {
            return small.combine(residues);
        }
        let mut acc = Nat::zero();
        for (x, b) in residues.iter().zip(&self.0.basis) {
            acc += *x * b;
        }
        acc % &self.0.product
    }

    fn modulus(&self, k: usize) -> &Nat {
        match k {
            0 => &self.0.s,
            1 => &self.0.r,
            _ => self.0.t.as_ref().expect("watermark modulus"),
        }
    }

    /// `T mod m_k` for the first `N` moduli.
    fn split<const N: usize>(&self, value: &Nat) -> [Nat; N] {
        let fast = self.0.small.as_ref().zip(value.to_u64());
        std::array::from_fn(|k| match fast {
            Some((small, v)) => Nat::from(v % small.moduli[k]),
            None => value % self.modulus(k),
        })
    }
}

fn ensure_coprime(a: &Nat, b: &Nat) -> Result<()> {
    if a.gcd(b).is_one() {
        Ok(())
    } else {
        Err(Error::ModuliNotCoprime {
            a: a.clone(),
            b: b.clone(),
        })
    }
}

/// Smallest `r >= count` with `gcd(r, s) = 1` (and `r >= 2`).
pub fn index_modulus_for(count: usize, s: &Nat) -> Nat {
    let mut r = Nat::from(count.max(2));
    while !r.gcd(s).is_one() {
        r += 1u32;
    }
    r
}

/// A transmitted integer together with the moduli it is coded under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    value: Nat,
    moduli: ModuliSet,
}

impl Codeword {
    pub fn new(value: Nat, moduli: ModuliSet) -> Result<Self> {
        if value >= *moduli.product() {
            return Err(Error::OutOfRange {
                what: "codeword",
                value,
                bound: moduli.product().clone(),
            });
        }
        Ok(Self { value, moduli })
    }

    pub fn value(&self) -> &Nat {
        &self.value
    }

    pub fn moduli(&self) -> &ModuliSet {
        &self.moduli
    }

    /// Minimal big-endian bytes of `T` (a single zero byte for `T = 0`).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.value.to_bytes_be()
    }

    /// Parses big-endian bytes; an empty slice reads as zero.
    pub fn from_bytes(bytes: &[u8], moduli: ModuliSet) -> Result<Self> {
        Self::new(Nat::from_bytes_be(bytes), moduli)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

fn check_residue(what: &'static str, value: &Nat, bound: &Nat) -> Result<()> {
    if value >= bound {
        Err(Error::OutOfRange {
            what,
            value: value.clone(),
            bound: bound.clone(),
        })
    } else {
        Ok(())
    }
}

/// Codes `(c, i)` under `(s, r)`. A watermark modulus in `moduli` is ignored and
/// the returned codeword carries only the pair.
pub fn encode(c: &Nat, i: &Nat, moduli: &ModuliSet) -> Result<Codeword> {
    check_residue("payload residue", c, moduli.s())?;
    check_residue("index", i, moduli.r())?;
    let pair = moduli.without_watermark();
    let value = pair.combine(&[c, i]);
    Ok(Codeword { value, moduli: pair })
}

/// `(T mod s, T mod r)`.
pub fn decode(word: &Codeword) -> (Nat, Nat) {
    let [c, i] = word.moduli.split(&word.value);
    (c, i)
}

/// Codes `(c, i, w)` under `(s, r, t)`.
pub fn encode3(c: &Nat, i: &Nat, w: &Nat, moduli: &ModuliSet) -> Result<Codeword> {
    let t = moduli.t().ok_or_else(|| {
        Error::UnsupportedModulus("three-channel coding needs a watermark modulus".into())
    })?;
    check_residue("payload residue", c, moduli.s())?;
    check_residue("index", i, moduli.r())?;
    check_residue("watermark", w, t)?;
    let value = moduli.combine(&[c, i, w]);
    Ok(Codeword {
        value,
        moduli: moduli.clone(),
    })
}

/// `(T mod s, T mod r, T mod t)`.
pub fn decode3(word: &Codeword) -> Result<(Nat, Nat, Nat)> {
    if word.moduli.t().is_none() {
        return Err(Error::UnsupportedModulus(
            "codeword has no watermark channel".into(),
        ));
    }
    let [c, i, w] = word.moduli.split(&word.value);
    Ok((c, i, w))
}
