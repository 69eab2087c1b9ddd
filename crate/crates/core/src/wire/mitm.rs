//! A man-in-the-middle relay that rewrites CIPHERTEXT payloads.
//!
//! The protocol is strictly request/response, so the relay reads one frame from
//! the sender, forwards it (possibly modified), then relays exactly one reply.
//! It learns the coding moduli from the PUBKEY frame passing through.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::RandBigInt;
use rand::Rng;

use crate::error::Error;
use crate::keyfile;
use crate::rns::ModuliSet;
use crate::Nat;

use super::frame::{Frame, FrameKind};
use super::session::{Direction, SessionTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperPolicy {
    Passthrough,
    /// `T + s mod M`: same payload residue, index moved by one.
    FlipIndex,
    /// Uniform `T' ≠ T` in `[0, M)`.
    RandomizeT,
    /// One random bit of the payload flipped.
    BitflipPayload,
}

impl TamperPolicy {
    pub fn name(self) -> &'static str {
        match self {
            TamperPolicy::Passthrough => "passthrough",
            TamperPolicy::FlipIndex => "flip-index",
            TamperPolicy::RandomizeT => "randomize-T",
            TamperPolicy::BitflipPayload => "bitflip-payload",
        }
    }
}

impl fmt::Display for TamperPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TamperPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "passthrough" => Ok(TamperPolicy::Passthrough),
            "flip-index" => Ok(TamperPolicy::FlipIndex),
            "randomize-t" => Ok(TamperPolicy::RandomizeT),
            "bitflip-payload" => Ok(TamperPolicy::BitflipPayload),
            _ => Err(Error::Parse(format!("unknown policy {s:?}"))),
        }
    }
}

/// Codeword before and after tampering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamperRecord {
    pub original: Nat,
    pub modified: Nat,
}

#[derive(Debug, Clone, Default)]
pub struct MitmReport {
    /// Frames as forwarded, i.e. after tampering.
    pub transcript: SessionTranscript,
    pub tampers: Vec<TamperRecord>,
}

fn tamper<R: Rng + ?Sized>(
    policy: TamperPolicy,
    payload: &[u8],
    moduli: Option<&ModuliSet>,
    rng: &mut R,
) -> Vec<u8> {
    let value = Nat::from_bytes_be(payload);
    match (policy, moduli) {
        (TamperPolicy::Passthrough, _) => payload.to_vec(),
        (TamperPolicy::BitflipPayload, _) => {
            let mut out = payload.to_vec();
            if out.is_empty() {
                out.push(0);
            }
            let bit = rng.gen_range(0..out.len() * 8);
            out[bit / 8] ^= 1 << (bit % 8);
            out
        }
        (TamperPolicy::FlipIndex, Some(m)) => ((value + m.s()) % m.product()).to_bytes_be(),
        (TamperPolicy::RandomizeT, Some(m)) => {
            let bound = m.product();
            loop {
                let candidate = rng.gen_biguint_below(bound);
                if candidate != value || bound <= &Nat::from(1u32) {
                    break candidate.to_bytes_be();
                }
            }
        }
        // no PUBKEY seen yet, nothing to aim at
        (_, None) => payload.to_vec(),
    }
}

/// Relays one session between `client` (Alice) and `upstream` (Bob).
pub fn run_mitm<A, B, R>(
    mut client: A,
    mut upstream: B,
    policy: TamperPolicy,
    rng: &mut R,
) -> MitmReport
where
    A: Read + Write,
    B: Read + Write,
    R: Rng + ?Sized,
{
    let mut report = MitmReport::default();
    let mut moduli: Option<ModuliSet> = None;
    loop {
        let mut frame = match Frame::read_from(&mut client) {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) => {
                report.transcript.error = Some(format!("sender side: {e}"));
                break;
            }
        };
        if frame.kind == FrameKind::Ciphertext {
            let modified = tamper(policy, &frame.payload, moduli.as_ref(), rng);
            report.tampers.push(TamperRecord {
                original: Nat::from_bytes_be(&frame.payload),
                modified: Nat::from_bytes_be(&modified),
            });
            frame.payload = modified;
        }
        if let Err(e) = frame.write_to(&mut upstream) {
            report.transcript.error = Some(format!("receiver side: {e}"));
            break;
        }
        report.transcript.record(Direction::ToReceiver, &frame);

        let reply = match Frame::read_from(&mut upstream) {
            Ok(Some(f)) => f,
            Ok(None) => {
                report.transcript.error = Some("receiver closed the connection".into());
                break;
            }
            Err(e) => {
                report.transcript.error = Some(format!("receiver side: {e}"));
                break;
            }
        };
        if reply.kind == FrameKind::PubKey {
            moduli = std::str::from_utf8(&reply.payload)
                .ok()
                .and_then(|text| keyfile::public_key_from_str(text).ok())
                .map(|key| key.moduli().clone());
        }
        if let Err(e) = reply.write_to(&mut client) {
            report.transcript.error = Some(format!("sender side: {e}"));
            break;
        }
        report.transcript.record(Direction::ToSender, &reply);
    }
    report
}

impl MitmReport {
    /// Tamper records where the codeword actually changed.
    pub fn changed(&self) -> usize {
        self.tampers
            .iter()
            .filter(|t| t.original != t.modified)
            .count()
    }
}
