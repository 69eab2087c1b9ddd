//! Line-oriented `key=value` files for public, private and watermark keys.
//!
//! Numbers are decimal on output; input also accepts a `0x` hex prefix. Blank
//! lines and lines starting with `#` are ignored. Lists are comma separated.
//!
//! ```text
//! mode=composite3
//! s=533
//! roots=1,42,165
//! r=3
//! t=101
//! ```

use std::collections::BTreeMap;

use num_traits::Num;

use crate::cubic::{Mode, PrivateKey, PublicKey};
use crate::error::{Error, Result};
use crate::rns::ModuliSet;
use crate::unity_roots::RootsOfUnity;
use crate::watermark::WatermarkKey;
use crate::Nat;

/// Parses a decimal or `0x`-prefixed hexadecimal number.
pub fn parse_nat(text: &str) -> Result<Nat> {
    let text = text.trim();
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => Nat::from_str_radix(hex, 16),
        None => Nat::from_str_radix(text, 10),
    };
    parsed.map_err(|_| Error::Parse(format!("not a number: {text:?}")))
}

fn parse_list(text: &str) -> Result<Vec<Nat>> {
    text.split(',').map(parse_nat).collect()
}

fn join(xs: &[Nat]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key=value", lineno + 1))
            })?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(Error::Parse(format!("line {}: unknown field {k:?}", lineno + 1)));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate field {k:?}")));
            }
        }
        Ok(Self(map))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
    }

    fn nat(&self, key: &str) -> Result<Nat> {
        parse_nat(self.require(key)?)
    }

    fn opt_nat(&self, key: &str) -> Result<Option<Nat>> {
        self.get(key).map(parse_nat).transpose()
    }
}

pub fn public_key_to_string(key: &PublicKey) -> String {
    let mut out = format!(
        "mode={}\ns={}\nroots={}\nr={}\n",
        key.mode(),
        key.s(),
        join(key.roots().roots()),
        key.moduli().r()
    );
    if let Some(t) = key.moduli().t() {
        out.push_str(&format!("t={t}\n"));
    }
    out
}

pub fn public_key_from_str(text: &str) -> Result<PublicKey> {
    let f = Fields::parse(text, &["mode", "s", "roots", "r", "t"])?;
    let mode: Mode = f.require("mode")?.parse()?;
    let s = f.nat("s")?;
    let roots = RootsOfUnity::from_list(s.clone(), parse_list(f.require("roots")?)?)?;
    let moduli = ModuliSet::new(s, f.nat("r")?, f.opt_nat("t")?)?;
    PublicKey::new(mode, roots, moduli)
}

pub fn private_key_to_string(key: &PrivateKey) -> String {
    let mut out = format!("mode={}\np={}\n", key.mode(), key.p());
    if let Some(q) = key.q() {
        out.push_str(&format!("q={q}\n"));
    }
    out.push_str(&format!(
        "phi={}\nexponents={}\n",
        key.phi(),
        join(key.exponents())
    ));
    out
}

pub fn private_key_from_str(text: &str) -> Result<PrivateKey> {
    let f = Fields::parse(text, &["mode", "p", "q", "phi", "exponents"])?;
    PrivateKey::from_parts(
        f.require("mode")?.parse()?,
        f.nat("p")?,
        f.opt_nat("q")?,
        f.nat("phi")?,
        parse_list(f.require("exponents")?)?,
    )
}

pub fn watermark_key_to_string(key: &WatermarkKey) -> String {
    format!("k1={}\nk2={}\nt={}\n", key.k1(), key.k2(), key.t())
}

pub fn watermark_key_from_str(text: &str) -> Result<WatermarkKey> {
    let f = Fields::parse(text, &["k1", "k2", "t"])?;
    WatermarkKey::new(f.nat("k1")?, f.nat("k2")?, f.nat("t")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::{keygen, KeygenParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn public_key_text_is_stable() {
        let params = KeygenParams::with_primes(Mode::Composite3, Nat::from(13u32), Some(Nat::from(41u32)))
            .watermark(Some(Nat::from(101u32)));
        let (public, private) = keygen(&params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let text = public_key_to_string(&public);
        assert_eq!(text, "mode=composite3\ns=533\nroots=1,42,165\nr=3\nt=101\n");
        assert_eq!(public_key_from_str(&text).unwrap(), public);
        let text = private_key_to_string(&private);
        assert_eq!(text, "mode=composite3\np=13\nq=41\nphi=480\nexponents=107\n");
        assert_eq!(private_key_from_str(&text).unwrap(), private);
    }

    #[test]
    fn parses_hex_comments_and_blank_lines() {
        let text = "# prime example\n\nmode=prime3\ns=0xd\nroots=1, 3, 9\nr=3\n";
        let key = public_key_from_str(text).unwrap();
        assert_eq!(*key.s(), Nat::from(13u32));
        assert!(key.moduli().t().is_none());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(public_key_from_str("mode=prime3\ns=13\nroots=1,3,9\n").is_err());
        assert!(public_key_from_str("mode=prime3\ns=13\nroots=1,3,4\nr=3\n").is_err());
        assert!(public_key_from_str("mode=prime3\ns=13\nroots=1,3,9\nr=3\nbogus=1\n").is_err());
        assert!(public_key_from_str("mode=prime3\ns=13\ns=13\nroots=1,3,9\nr=3\n").is_err());
        assert!(public_key_from_str("mode=prime3\ns=13\nroots=1,3,9\nr=2\n").is_err());
        assert!(private_key_from_str("mode=prime3\np=13\nphi=12\nexponents=4\n").is_err());
        assert!(private_key_from_str("mode=prime3\np=13\nphi=12\nexponents=3\n").is_ok());
        assert!(watermark_key_from_str("k1=0\nk2=1\nt=101\n").is_err());
        assert!(parse_nat("12a").is_err());
        assert_eq!(parse_nat("0x1F").unwrap(), Nat::from(31u32));
    }

    #[test]
    fn watermark_round_trip() {
        let key = WatermarkKey::new(Nat::from(7u32), Nat::from(11u32), Nat::from(101u32)).unwrap();
        let text = watermark_key_to_string(&key);
        assert_eq!(text, "k1=7\nk2=11\nt=101\n");
        assert_eq!(watermark_key_from_str(&text).unwrap(), key);
    }
}
