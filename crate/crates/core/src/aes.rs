//! AES-128 block cipher and CBC/PKCS#7 mode for payload encryption.
//!
//! The state is 16 bytes in column-major order: byte `4 * c + r` is row `r`
//! of column `c`.

use thiserror::Error;

pub const BLOCK_LEN: usize = 16;
pub const ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AesError {
    #[error("AES-128 key must be 16 bytes, got {0}")]
    BadKeyLength(usize),
    #[error("ciphertext length {0} is not a positive multiple of 16")]
    BadLength(usize),
    #[error("invalid padding (wrong key or corrupted ciphertext)")]
    BadPadding,
}

#[rustfmt::skip]
const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

const INV_SBOX: [u8; 256] = invert(&SBOX);

const RCON: [u8; 10] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36];

const fn invert(table: &[u8; 256]) -> [u8; 256] {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[table[i] as usize] = i as u8;
        i += 1;
    }
    inv
}

/// Multiply by x in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
#[inline]
fn xtime(b: u8) -> u8 {
    (b << 1) ^ if b & 0x80 != 0 { 0x1b } else { 0 }
}

fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    p
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct AesKey(pub [u8; 16]);

impl AesKey {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, AesError> {
        let arr: [u8; 16] = bytes.try_into().map_err(|_| AesError::BadKeyLength(bytes.len()))?;
        Ok(AesKey(arr))
    }
}

impl std::fmt::Debug for AesKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AesKey(..)")
    }
}

pub type AesState = [u8; BLOCK_LEN];

#[derive(Clone, PartialEq, Eq)]
pub struct AesKeySchedule {
    pub round_keys: [[u8; BLOCK_LEN]; ROUNDS + 1],
}

impl std::fmt::Debug for AesKeySchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AesKeySchedule(..)")
    }
}

pub fn expand_key(key: &AesKey) -> AesKeySchedule {
    let mut w = [[0u8; 4]; 4 * (ROUNDS + 1)];
    for (i, word) in key.0.chunks_exact(4).enumerate() {
        w[i].copy_from_slice(word);
    }
    for i in 4..w.len() {
        let mut t = w[i - 1];
        if i % 4 == 0 {
            t.rotate_left(1);
            for b in &mut t {
                *b = SBOX[*b as usize];
            }
            t[0] ^= RCON[i / 4 - 1];
        }
        for j in 0..4 {
            w[i][j] = w[i - 4][j] ^ t[j];
        }
    }
    let mut round_keys = [[0u8; BLOCK_LEN]; ROUNDS + 1];
    for (r, rk) in round_keys.iter_mut().enumerate() {
        for c in 0..4 {
            rk[4 * c..4 * c + 4].copy_from_slice(&w[4 * r + c]);
        }
    }
    AesKeySchedule { round_keys }
}

pub(crate) fn sub_bytes(s: &mut AesState) {
    for b in s.iter_mut() {
        *b = SBOX[*b as usize];
    }
}

fn inv_sub_bytes(s: &mut AesState) {
    for b in s.iter_mut() {
        *b = INV_SBOX[*b as usize];
    }
}

/// Row r rotates left by r columns.
pub(crate) fn shift_rows(s: &mut AesState) {
    let t = *s;
    for c in 0..4 {
        for r in 0..4 {
            s[4 * c + r] = t[4 * ((c + r) % 4) + r];
        }
    }
}

fn inv_shift_rows(s: &mut AesState) {
    let t = *s;
    for c in 0..4 {
        for r in 0..4 {
            s[4 * ((c + r) % 4) + r] = t[4 * c + r];
        }
    }
}

fn mix_columns(s: &mut AesState) {
    for col in s.chunks_exact_mut(4) {
        let [a0, a1, a2, a3] = [col[0], col[1], col[2], col[3]];
        let all = a0 ^ a1 ^ a2 ^ a3;
        col[0] ^= all ^ xtime(a0 ^ a1);
        col[1] ^= all ^ xtime(a1 ^ a2);
        col[2] ^= all ^ xtime(a2 ^ a3);
        col[3] ^= all ^ xtime(a3 ^ a0);
    }
}

fn inv_mix_columns(s: &mut AesState) {
    for col in s.chunks_exact_mut(4) {
        let a = [col[0], col[1], col[2], col[3]];
        for r in 0..4 {
            col[r] =
                gmul(a[r], 0x0e) ^ gmul(a[(r + 1) % 4], 0x0b) ^ gmul(a[(r + 2) % 4], 0x0d) ^ gmul(a[(r + 3) % 4], 0x09);
        }
    }
}

pub(crate) fn add_round_key(s: &mut AesState, rk: &[u8; BLOCK_LEN]) {
    for (b, k) in s.iter_mut().zip(rk) {
        *b ^= k;
    }
}

/// One encryption round; the final round (`last`) omits MixColumns.
pub fn aes_round(state: &mut AesState, rk: &[u8; BLOCK_LEN], last: bool) {
    sub_bytes(state);
    shift_rows(state);
    if !last {
        mix_columns(state);
    }
    add_round_key(state, rk);
}

pub fn encrypt_block(block: &[u8; BLOCK_LEN], ks: &AesKeySchedule) -> [u8; BLOCK_LEN] {
    let mut state = *block;
    add_round_key(&mut state, &ks.round_keys[0]);
    for rk in &ks.round_keys[1..ROUNDS] {
        aes_round(&mut state, rk, false);
    }
    aes_round(&mut state, &ks.round_keys[ROUNDS], true);
    state
}

pub fn decrypt_block(block: &[u8; BLOCK_LEN], ks: &AesKeySchedule) -> [u8; BLOCK_LEN] {
    let mut state = *block;
    add_round_key(&mut state, &ks.round_keys[ROUNDS]);
    inv_shift_rows(&mut state);
    inv_sub_bytes(&mut state);
    for rk in ks.round_keys[1..ROUNDS].iter().rev() {
        add_round_key(&mut state, rk);
        inv_mix_columns(&mut state);
        inv_shift_rows(&mut state);
        inv_sub_bytes(&mut state);
    }
    add_round_key(&mut state, &ks.round_keys[0]);
    state
}

/// CBC encryption with PKCS#7 padding. Output is always
/// `(len / 16 + 1) * 16` bytes.
pub fn aes_cbc_encrypt(data: &[u8], key: &AesKey, iv: &[u8; BLOCK_LEN]) -> Vec<u8> {
    let ks = expand_key(key);
    let pad = BLOCK_LEN - data.len() % BLOCK_LEN;
    let mut padded = data.to_vec();
    padded.resize(data.len() + pad, pad as u8);

    let mut out = Vec::with_capacity(padded.len());
    let mut chain = *iv;
    for chunk in padded.chunks_exact(BLOCK_LEN) {
        let mut block = [0u8; BLOCK_LEN];
        for i in 0..BLOCK_LEN {
            block[i] = chunk[i] ^ chain[i];
        }
        chain = encrypt_block(&block, &ks);
        out.extend_from_slice(&chain);
    }
    out
}

pub fn aes_cbc_decrypt(data: &[u8], key: &AesKey, iv: &[u8; BLOCK_LEN]) -> Result<Vec<u8>, AesError> {
    if data.is_empty() || !data.len().is_multiple_of(BLOCK_LEN) {
        return Err(AesError::BadLength(data.len()));
    }
    let ks = expand_key(key);
    let mut out = Vec::with_capacity(data.len());
    let mut chain = *iv;
    for chunk in data.chunks_exact(BLOCK_LEN) {
        let block: [u8; BLOCK_LEN] = chunk.try_into().unwrap();
        let plain = decrypt_block(&block, &ks);
        out.extend(plain.iter().zip(&chain).map(|(p, c)| p ^ c));
        chain = block;
    }
    let pad = *out.last().unwrap() as usize;
    if pad == 0 || pad > BLOCK_LEN || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
        return Err(AesError::BadPadding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}
