//! Reversible data hiding in encrypted images and YUV4MPEG2 video.
//!
//! A secret is Huffman-compressed and AES-128-CBC encrypted, the cover's
//! red plane (or each frame's luma plane) reserves room by histogram shift,
//! the cover is encrypted with a Blowfish counter-mode keystream, and the
//! payload frame is written into the encrypted LSBs. The data key extracts
//! the secret; the image key independently recovers the cover bit-exactly.

pub mod aes;
pub mod bitio;
pub mod blowfish;
mod blowfish_consts;
pub mod cli;
pub mod crc32;
pub mod frame;
pub mod huffman;
pub mod imagefmt;
pub mod metrics;
pub mod reversible;
pub mod stego;
pub mod video;
