//! Payload frames and the side header, the two bit layouts written into
//! carrier LSBs.
//!
//! Payload frame, big-endian:
//!
//! ```text
//! "RDH1" | version 0x01 | segment_index u16 | segment_count u16 | ct_len u32 | iv [16] | ciphertext | crc32
//! ```
//!
//! The CRC covers every preceding frame byte.

use thiserror::Error;

use crate::bitio::{bits_to_bytes, bytes_to_bits};
use crate::crc32::crc32;

pub const FRAME_MAGIC: &[u8; 4] = b"RDH1";
pub const FRAME_VERSION: u8 = 0x01;
/// Fixed bytes around the ciphertext: magic, version, index, count, length, IV, CRC.
pub const FRAME_OVERHEAD: usize = 4 + 1 + 2 + 2 + 4 + 16 + 4;
const PREFIX_LEN: usize = 13;

pub const SIDE_HEADER_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("no payload frame found (bad magic)")]
    BadMagic,
    #[error("unsupported frame version {0}")]
    BadVersion(u8),
    #[error("payload frame CRC mismatch (corrupted payload)")]
    BadCrc,
    #[error("payload frame declares {needed} bits but only {available} are available")]
    Truncated { needed: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadFrame {
    pub segment_index: u16,
    pub segment_count: u16,
    pub iv: [u8; 16],
    pub ciphertext: Vec<u8>,
}

impl PayloadFrame {
    pub fn byte_len(&self) -> usize {
        FRAME_OVERHEAD + self.ciphertext.len()
    }

    pub fn bit_len(&self) -> usize {
        8 * self.byte_len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        out.extend_from_slice(FRAME_MAGIC);
        out.push(FRAME_VERSION);
        out.extend_from_slice(&self.segment_index.to_be_bytes());
        out.extend_from_slice(&self.segment_count.to_be_bytes());
        out.extend_from_slice(&(self.ciphertext.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.iv);
        out.extend_from_slice(&self.ciphertext);
        let crc = crc32(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn to_bits(&self) -> Vec<bool> {
        bytes_to_bits(&self.to_bytes())
    }

    /// Parses a frame from the front of `bytes`; trailing bytes are ignored.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FrameError> {
        let total = check_prefix(bytes)?;
        if bytes.len() < total {
            return Err(FrameError::Truncated {
                needed: 8 * total,
                available: 8 * bytes.len(),
            });
        }
        let body = &bytes[..total - 4];
        let crc = u32::from_be_bytes(bytes[total - 4..total].try_into().unwrap());
        if crc32(body) != crc {
            return Err(FrameError::BadCrc);
        }
        Ok(PayloadFrame {
            segment_index: u16::from_be_bytes([bytes[5], bytes[6]]),
            segment_count: u16::from_be_bytes([bytes[7], bytes[8]]),
            iv: bytes[13..29].try_into().unwrap(),
            ciphertext: bytes[29..total - 4].to_vec(),
        })
    }
}

/// Validates magic and version and returns the total frame length in bytes.
fn check_prefix(bytes: &[u8]) -> Result<usize, FrameError> {
    if bytes.len() < 4 || &bytes[..4] != FRAME_MAGIC {
        return Err(FrameError::BadMagic);
    }
    if bytes.len() < PREFIX_LEN {
        return Err(FrameError::Truncated {
            needed: 8 * PREFIX_LEN,
            available: 8 * bytes.len(),
        });
    }
    if bytes[4] != FRAME_VERSION {
        return Err(FrameError::BadVersion(bytes[4]));
    }
    let ct_len = u32::from_be_bytes(bytes[9..13].try_into().unwrap()) as usize;
    Ok(FRAME_OVERHEAD + ct_len)
}

pub fn parse_frame(bits: &[bool]) -> Result<PayloadFrame, FrameError> {
    // only whole bytes can belong to a frame
    let whole = bits.len() - bits.len() % 8;
    PayloadFrame::from_bytes(&bits_to_bytes(&bits[..whole]))
}

/// Reads a frame from the LSBs of `samples`, starting at sample 0, touching
/// only as many samples as the frame declares.
pub fn read_frame_lsbs(samples: &[u8]) -> Result<PayloadFrame, FrameError> {
    let lsb_bytes = |n: usize| -> Vec<u8> {
        let bits: Vec<bool> = samples[..8 * n].iter().map(|&s| s & 1 == 1).collect();
        bits_to_bytes(&bits)
    };
    let avail_bytes = samples.len() / 8;
    let prefix = lsb_bytes(avail_bytes.min(PREFIX_LEN));
    let total = check_prefix(&prefix)?;
    if total > avail_bytes {
        return Err(FrameError::Truncated {
            needed: 8 * total,
            available: samples.len(),
        });
    }
    PayloadFrame::from_bytes(&lsb_bytes(total))
}

/// Bookkeeping written into the reserved header slots: the histogram-shift
/// bins and the region A length, guarded by an RFC 1071 style checksum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideHeader {
    pub peak: u8,
    pub zero: u8,
    pub region_a_bits: u32,
}

fn ones_complement_checksum(bytes: &[u8; 6]) -> u16 {
    let mut sum: u32 = 0;
    for pair in bytes.chunks_exact(2) {
        sum += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    while sum > 0xFFFF {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    !(sum as u16)
}

impl SideHeader {
    fn body(&self) -> [u8; 6] {
        let l = self.region_a_bits.to_be_bytes();
        [self.peak, self.zero, l[0], l[1], l[2], l[3]]
    }

    pub fn to_bytes(&self) -> [u8; 8] {
        let body = self.body();
        let sum = ones_complement_checksum(&body).to_be_bytes();
        let mut out = [0u8; 8];
        out[..6].copy_from_slice(&body);
        out[6..].copy_from_slice(&sum);
        out
    }

    pub fn to_bits(&self) -> Vec<bool> {
        bytes_to_bits(&self.to_bytes())
    }

    /// `None` when the checksum does not validate.
    pub fn from_bytes(bytes: &[u8; 8]) -> Option<Self> {
        let body: [u8; 6] = bytes[..6].try_into().unwrap();
        let stored = u16::from_be_bytes([bytes[6], bytes[7]]);
        if ones_complement_checksum(&body) != stored {
            return None;
        }
        Some(SideHeader {
            peak: body[0],
            zero: body[1],
            region_a_bits: u32::from_be_bytes(body[2..6].try_into().unwrap()),
        })
    }

    pub fn from_bits(bits: &[bool]) -> Option<Self> {
        if bits.len() != SIDE_HEADER_BITS {
            return None;
        }
        Self::from_bytes(&bits_to_bytes(bits).try_into().unwrap())
    }
}
