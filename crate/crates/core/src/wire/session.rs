//! Alice (sender) and Bob (receiver) sessions over any byte stream.
//!
//! ```text
//! Alice                         Bob
//!   |-- HELLO ------------------->|
//!   |<----------------- PUBKEY ---|
//!   |-- CIPHERTEXT(T) ----------->|   decode, cube root, pick companion
//!   |<------------ ACK | ERROR ---|
//!   |   ... one CIPHERTEXT per message ...
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::cubic::{self, PrivateKey, PublicKey};
use crate::error::{Error, Result};
use crate::keyfile;
use crate::rns::Codeword;
use crate::watermark::{self, WatermarkKey};
use crate::Nat;

use super::frame::{Frame, FrameError, FrameKind};

/// Direction of travel, the same for every party's transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToReceiver,
    ToSender,
}

impl Direction {
    fn tag(self) -> &'static str {
        match self {
            Direction::ToReceiver => "a->b",
            Direction::ToSender => "b->a",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub frame: Frame,
    pub timestamp: SystemTime,
}

/// Ordered record of one session. Timestamps are informational only.
#[derive(Debug, Clone, Default)]
pub struct SessionTranscript {
    pub entries: Vec<TranscriptEntry>,
    /// Set when the session ended on a transport or framing error.
    pub error: Option<String>,
}

impl SessionTranscript {
    pub(crate) fn record(&mut self, direction: Direction, frame: &Frame) {
        self.entries.push(TranscriptEntry {
            direction,
            frame: frame.clone(),
            timestamp: SystemTime::now(),
        });
    }

    /// `(direction, frame)` pairs, for content comparison across parties.
    pub fn frames(&self) -> Vec<(Direction, &Frame)> {
        self.entries.iter().map(|e| (e.direction, &e.frame)).collect()
    }

    pub fn kinds(&self) -> Vec<FrameKind> {
        self.entries.iter().map(|e| e.frame.kind).collect()
    }

    pub fn count(&self, kind: FrameKind) -> usize {
        self.entries.iter().filter(|e| e.frame.kind == kind).count()
    }

    /// Starts with HELLO, PUBKEY and answers every CIPHERTEXT with ACK or ERROR.
    pub fn is_well_formed(&self) -> bool {
        let kinds = self.kinds();
        if kinds.len() < 2 || kinds[0] != FrameKind::Hello || kinds[1] != FrameKind::PubKey {
            return false;
        }
        kinds.iter().enumerate().all(|(idx, k)| {
            *k != FrameKind::Ciphertext
                || matches!(kinds.get(idx + 1), Some(FrameKind::Ack | FrameKind::Error))
        })
    }

    /// One line per frame: `unix_ms direction KIND hex-payload`.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let ms = e
                .timestamp
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0);
            let hex: String = e.frame.payload.iter().map(|b| format!("{b:02x}")).collect();
            let hex = if hex.is_empty() { "-".to_string() } else { hex };
            let _ = writeln!(out, "{ms}\t{}\t{}\t{hex}", e.direction.tag(), e.frame.kind);
        }
        if let Some(err) = &self.error {
            let _ = writeln!(out, "#error\t{err}");
        }
        out
    }
}

/// Bob's configuration. With a watermark key every ciphertext is unsealed.
#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    public: PublicKey,
    private: PrivateKey,
    watermark: Option<WatermarkKey>,
    echo: bool,
}

impl ReceiverConfig {
    pub fn new(
        public: PublicKey,
        private: PrivateKey,
        watermark: Option<WatermarkKey>,
        echo: bool,
    ) -> Result<Self> {
        if private.modulus() != *public.s() || private.mode() != public.mode() {
            return Err(Error::InvalidKey("private key does not match public key".into()));
        }
        if let Some(key) = &watermark {
            if public.moduli().t() != Some(key.t()) {
                return Err(Error::InvalidKey(
                    "watermark modulus differs from the public key".into(),
                ));
            }
        }
        Ok(Self {
            public,
            private,
            watermark,
            echo,
        })
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    fn handle_ciphertext(&self, payload: &[u8]) -> Frame {
        match self.recover(payload) {
            Ok(m) => {
                let body = if self.echo { m.to_bytes_be() } else { Vec::new() };
                Frame::new(FrameKind::Ack, body)
            }
            Err(reason) => Frame::new(FrameKind::Error, reason.into_bytes()),
        }
    }

    fn recover(&self, payload: &[u8]) -> std::result::Result<Nat, String> {
        let moduli = match self.watermark {
            Some(_) => self.public.moduli().clone(),
            None => self.public.moduli().without_watermark(),
        };
        let word = Codeword::from_bytes(payload, moduli).map_err(|e| e.to_string())?;
        match &self.watermark {
            Some(key) => {
                let out = watermark::unseal(&word, &self.private, &self.public, key)
                    .map_err(|e| e.to_string())?;
                match (out.authentic, out.message) {
                    (true, Some(m)) => Ok(m),
                    (false, Some(_)) => Err("watermark mismatch".into()),
                    _ => Err("codeword does not decrypt".into()),
                }
            }
            None => cubic::decrypt(&word, &self.private, &self.public).map_err(|e| e.to_string()),
        }
    }
}

/// Serves one session until the peer closes. Never panics on bad input; errors
/// end up in the transcript.
pub fn run_receiver<S: Read + Write>(config: &ReceiverConfig, mut stream: S) -> SessionTranscript {
    let mut transcript = SessionTranscript::default();
    loop {
        let frame = match Frame::read_from(&mut stream) {
            Ok(Some(frame)) => frame,
            Ok(None) => break,
            Err(e) => {
                if !matches!(e, FrameError::Io(_)) {
                    let reply = Frame::new(FrameKind::Error, e.to_string().into_bytes());
                    if reply.write_to(&mut stream).is_ok() {
                        transcript.record(Direction::ToSender, &reply);
                    }
                }
                transcript.error = Some(e.to_string());
                break;
            }
        };
        transcript.record(Direction::ToReceiver, &frame);
        let reply = match frame.kind {
            FrameKind::Hello => Frame::new(
                FrameKind::PubKey,
                keyfile::public_key_to_string(&config.public).into_bytes(),
            ),
            FrameKind::Ciphertext => config.handle_ciphertext(&frame.payload),
            other => Frame::new(
                FrameKind::Error,
                format!("unexpected {other} frame").into_bytes(),
            ),
        };
        if let Err(e) = reply.write_to(&mut stream) {
            transcript.error = Some(e.to_string());
            break;
        }
        transcript.record(Direction::ToSender, &reply);
    }
    transcript
}

/// Alice's configuration. A supplied public key must match the one Bob serves.
#[derive(Debug, Clone, Default)]
pub struct SenderConfig {
    pub public: Option<PublicKey>,
    pub watermark: Option<WatermarkKey>,
}

/// Bob's answer to one ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delivery {
    /// ACK; carries the plaintext when the receiver echoes.
    Accepted { echoed: Option<Nat> },
    Rejected { reason: String },
}

#[derive(Debug, Clone)]
pub struct SenderReport {
    pub transcript: SessionTranscript,
    pub deliveries: Vec<Delivery>,
    pub public: PublicKey,
}

fn exchange<S: Read + Write>(
    stream: &mut S,
    transcript: &mut SessionTranscript,
    frame: Frame,
) -> Result<Frame> {
    frame.write_to(stream)?;
    transcript.record(Direction::ToReceiver, &frame);
    let reply = Frame::read_from(stream)?
        .ok_or_else(|| Error::Protocol("receiver closed the connection".into()))?;
    transcript.record(Direction::ToSender, &reply);
    Ok(reply)
}

/// Runs HELLO/PUBKEY, then sends one CIPHERTEXT per message.
pub fn run_sender<S: Read + Write>(
    config: &SenderConfig,
    messages: &[Nat],
    mut stream: S,
) -> Result<SenderReport> {
    let mut transcript = SessionTranscript::default();
    let reply = exchange(&mut stream, &mut transcript, Frame::empty(FrameKind::Hello))?;
    if reply.kind != FrameKind::PubKey {
        return Err(Error::Protocol(format!("expected PUBKEY, got {}", reply.kind)));
    }
    let text = String::from_utf8(reply.payload)
        .map_err(|_| Error::Protocol("public key is not UTF-8".into()))?;
    let served = keyfile::public_key_from_str(&text)?;
    if let Some(expected) = &config.public {
        if *expected != served {
            return Err(Error::Protocol(
                "served public key differs from the expected one".into(),
            ));
        }
    }

    let words = messages
        .iter()
        .map(|m| match &config.watermark {
            Some(key) => watermark::seal(m, &served, key),
            None => cubic::encrypt(m, &served),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut deliveries = Vec::with_capacity(words.len());
    for word in &words {
        let reply = exchange(
            &mut stream,
            &mut transcript,
            Frame::new(FrameKind::Ciphertext, word.to_bytes()),
        )?;
        deliveries.push(match reply.kind {
            FrameKind::Ack if reply.payload.is_empty() => Delivery::Accepted { echoed: None },
            FrameKind::Ack => Delivery::Accepted {
                echoed: Some(Nat::from_bytes_be(&reply.payload)),
            },
            FrameKind::Error => Delivery::Rejected {
                reason: String::from_utf8_lossy(&reply.payload).into_owned(),
            },
            other => {
                return Err(Error::Protocol(format!(
                    "expected ACK or ERROR, got {other}"
                )))
            }
        });
    }
    Ok(SenderReport {
        transcript,
        deliveries,
        public: served,
    })
}
