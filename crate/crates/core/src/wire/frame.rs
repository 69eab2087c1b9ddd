//! Length-prefixed frames.
//!
//! ```text
//! +---------+------+----------------+-----------------+
//! | "CT01"  | kind | length (u32 BE)| payload (length)|
//! +---------+------+----------------+-----------------+
//! ```

use std::fmt;
use std::io::{self, Read, Write};

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"CT01";
pub const HEADER_LEN: usize = 9;
/// Cap on payloads accepted from a stream.
pub const MAX_READ_PAYLOAD: usize = 16 << 20;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unknown frame kind 0x{0:02x}")]
    UnknownKind(u8),
    #[error("truncated frame: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("payload of {0} bytes is too large")]
    Oversize(usize),
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("transport: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameKind {
    Hello = 0x01,
    PubKey = 0x02,
    Ciphertext = 0x03,
    Ack = 0x04,
    Error = 0x05,
}

impl FrameKind {
    pub const ALL: [FrameKind; 5] = [
        FrameKind::Hello,
        FrameKind::PubKey,
        FrameKind::Ciphertext,
        FrameKind::Ack,
        FrameKind::Error,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameKind::Hello => "HELLO",
            FrameKind::PubKey => "PUBKEY",
            FrameKind::Ciphertext => "CIPHERTEXT",
            FrameKind::Ack => "ACK",
            FrameKind::Error => "ERROR",
        }
    }
}

impl TryFrom<u8> for FrameKind {
    type Error = FrameError;

    fn try_from(b: u8) -> Result<Self, FrameError> {
        FrameKind::ALL
            .into_iter()
            .find(|k| *k as u8 == b)
            .ok_or(FrameError::UnknownKind(b))
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameKind, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn empty(kind: FrameKind) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn encode(&self) -> Result<Vec<u8>, FrameError> {
        let len = u32::try_from(self.payload.len())
            .map_err(|_| FrameError::Oversize(self.payload.len()))?;
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(self.kind as u8);
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Decodes one frame that must span `bytes` exactly.
    pub fn decode(bytes: &[u8]) -> Result<Frame, FrameError> {
        let (frame, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(FrameError::TrailingBytes(bytes.len() - used));
        }
        Ok(frame)
    }

    /// Decodes the frame at the start of `bytes`, returning it with its encoded size.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Frame, usize), FrameError> {
        let header: &[u8; HEADER_LEN] = bytes
            .get(..HEADER_LEN)
            .and_then(|h| h.try_into().ok())
            .ok_or(FrameError::Truncated {
                needed: HEADER_LEN,
                available: bytes.len(),
            })?;
        let (kind, len) = parse_header(header)?;
        let end = HEADER_LEN + len;
        let payload = bytes.get(HEADER_LEN..end).ok_or(FrameError::Truncated {
            needed: end,
            available: bytes.len(),
        })?;
        Ok((Frame::new(kind, payload.to_vec()), end))
    }

    /// Reads one frame. `Ok(None)` on a clean end of stream before any header byte.
    pub fn read_from<R: Read>(reader: &mut R) -> Result<Option<Frame>, FrameError> {
        let mut header = [0u8; HEADER_LEN];
        let mut filled = 0;
        while filled < HEADER_LEN {
            match reader.read(&mut header[filled..]) {
                Ok(0) if filled == 0 => return Ok(None),
                Ok(0) => {
                    return Err(FrameError::Truncated {
                        needed: HEADER_LEN,
                        available: filled,
                    })
                }
                Ok(k) => filled += k,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        let (kind, len) = parse_header(&header)?;
        if len > MAX_READ_PAYLOAD {
            return Err(FrameError::Oversize(len));
        }
        let mut payload = vec![0u8; len];
        reader.read_exact(&mut payload).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => FrameError::Truncated {
                needed: HEADER_LEN + len,
                available: HEADER_LEN,
            },
            _ => e.into(),
        })?;
        Ok(Some(Frame::new(kind, payload)))
    }

    pub fn write_to<W: Write>(&self, writer: &mut W) -> Result<(), FrameError> {
        writer.write_all(&self.encode()?)?;
        writer.flush()?;
        Ok(())
    }
}

fn parse_header(header: &[u8; HEADER_LEN]) -> Result<(FrameKind, usize), FrameError> {
    let magic: [u8; 4] = header[..4].try_into().expect("4-byte slice");
    if magic != MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    let kind = FrameKind::try_from(header[4])?;
    let len = u32::from_be_bytes(header[5..9].try_into().expect("4-byte slice"));
    Ok((kind, len as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_header_bytes() {
        let bytes = Frame::empty(FrameKind::Ack).encode().unwrap();
        assert_eq!(bytes, [0x43, 0x54, 0x30, 0x31, 0x04, 0, 0, 0, 0]);
    }

    #[test]
    fn ciphertext_round_trip() {
        let bytes = Frame::new(FrameKind::Ciphertext, vec![0x0e]).encode().unwrap();
        let frame = Frame::decode(&bytes).unwrap();
        assert_eq!(frame.kind, FrameKind::Ciphertext);
        assert_eq!(frame.payload, [14]);
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(
            Frame::decode(b"XXXX\x01\0\0\0\0"),
            Err(FrameError::BadMagic(_))
        ));
        assert!(matches!(
            Frame::decode(b"CT01\x01\0\0"),
            Err(FrameError::Truncated { .. })
        ));
        assert!(matches!(
            Frame::decode(b"CT01\x03\0\0\0\x02\x01"),
            Err(FrameError::Truncated { needed: 11, available: 10 })
        ));
        assert!(matches!(
            Frame::decode(b"CT01\x09\0\0\0\0"),
            Err(FrameError::UnknownKind(9))
        ));
        assert!(matches!(
            Frame::decode(b"CT01\x04\0\0\0\0\0"),
            Err(FrameError::TrailingBytes(1))
        ));
    }

    #[test]
    fn stream_reads() {
        let mut buf = Vec::new();
        Frame::empty(FrameKind::Hello).write_to(&mut buf).unwrap();
        Frame::new(FrameKind::Ack, vec![9]).write_to(&mut buf).unwrap();
        let mut cursor = io::Cursor::new(buf);
        assert_eq!(Frame::read_from(&mut cursor).unwrap().unwrap().kind, FrameKind::Hello);
        assert_eq!(Frame::read_from(&mut cursor).unwrap().unwrap().payload, [9]);
        assert!(Frame::read_from(&mut cursor).unwrap().is_none());

        let mut short = io::Cursor::new(b"CT01\x03\0\0\0\x05ab".to_vec());
        assert!(matches!(
            Frame::read_from(&mut short),
            Err(FrameError::Truncated { .. })
        ));
        let mut huge = io::Cursor::new(b"CT01\x03\xff\xff\xff\xff".to_vec());
        assert!(matches!(Frame::read_from(&mut huge), Err(FrameError::Oversize(_))));
    }
}
