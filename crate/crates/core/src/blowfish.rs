//! Blowfish block cipher and a counter-mode keystream for image encryption.
//!
//! Images are encrypted with the keystream rather than block-by-block so
//! that flipping one ciphertext bit flips exactly one plaintext bit. The
//! embedder relies on this to overwrite LSBs in the encrypted domain.

use thiserror::Error;

use crate::blowfish_consts::{P_INIT, S_INIT};

pub const MIN_KEY_LEN: usize = 4;
pub const MAX_KEY_LEN: usize = 56;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlowfishError {
    #[error("Blowfish key must be {MIN_KEY_LEN}..={MAX_KEY_LEN} bytes, got {0}")]
    BadKeyLength(usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct BlowfishKey(Vec<u8>);

impl BlowfishKey {
    pub fn new(bytes: &[u8]) -> Result<Self, BlowfishError> {
        if !(MIN_KEY_LEN..=MAX_KEY_LEN).contains(&bytes.len()) {
            return Err(BlowfishError::BadKeyLength(bytes.len()));
        }
        Ok(BlowfishKey(bytes.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Debug for BlowfishKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BlowfishKey({} bytes)", self.0.len())
    }
}

/// Big-endian halves of a 64-bit block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfHalves {
    pub left: u32,
    pub right: u32,
}

impl BfHalves {
    pub fn from_block(block: &[u8; 8]) -> Self {
        BfHalves {
            left: u32::from_be_bytes(block[..4].try_into().unwrap()),
            right: u32::from_be_bytes(block[4..].try_into().unwrap()),
        }
    }

    pub fn to_block(self) -> [u8; 8] {
        let mut out = [0u8; 8];
        out[..4].copy_from_slice(&self.left.to_be_bytes());
        out[4..].copy_from_slice(&self.right.to_be_bytes());
        out
    }
}

#[derive(Clone)]
pub struct BlowfishState {
    p: [u32; 18],
    s: [[u32; 256]; 4],
}

impl std::fmt::Debug for BlowfishState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BlowfishState(..)")
    }
}

impl PartialEq for BlowfishState {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.s == other.s
    }
}

impl BlowfishState {
    /// The unkeyed state: P and S filled with the hex digits of pi.
    pub fn initial() -> Self {
        BlowfishState { p: P_INIT, s: S_INIT }
    }

    pub fn p_array(&self) -> &[u32; 18] {
        &self.p
    }

    pub fn s_boxes(&self) -> &[[u32; 256]; 4] {
        &self.s
    }

    pub fn f(&self, x: u32) -> u32 {
        let [a, b, c, d] = x.to_be_bytes();
        (self.s[0][a as usize].wrapping_add(self.s[1][b as usize]) ^ self.s[2][c as usize])
            .wrapping_add(self.s[3][d as usize])
    }

    pub fn encrypt_halves(&self, h: BfHalves) -> BfHalves {
        let (mut l, mut r) = (h.left, h.right);
        for i in 0..16 {
            l ^= self.p[i];
            r ^= self.f(l);
            std::mem::swap(&mut l, &mut r);
        }
        std::mem::swap(&mut l, &mut r);
        r ^= self.p[16];
        l ^= self.p[17];
        BfHalves { left: l, right: r }
    }

    pub fn decrypt_halves(&self, h: BfHalves) -> BfHalves {
        let (mut l, mut r) = (h.left, h.right);
        for i in (2..18).rev() {
            l ^= self.p[i];
            r ^= self.f(l);
            std::mem::swap(&mut l, &mut r);
        }
        std::mem::swap(&mut l, &mut r);
        r ^= self.p[1];
        l ^= self.p[0];
        BfHalves { left: l, right: r }
    }

    pub fn encrypt_block(&self, block: &[u8; 8]) -> [u8; 8] {
        self.encrypt_halves(BfHalves::from_block(block)).to_block()
    }

    pub fn decrypt_block(&self, block: &[u8; 8]) -> [u8; 8] {
        self.decrypt_halves(BfHalves::from_block(block)).to_block()
    }
}

pub fn bf_key_schedule(key: &BlowfishKey) -> BlowfishState {
    let mut st = BlowfishState::initial();
    let key = key.as_bytes();
    let mut pos = 0;
    for p in st.p.iter_mut() {
        let mut word = 0u32;
        for _ in 0..4 {
            word = (word << 8) | u32::from(key[pos]);
            pos = (pos + 1) % key.len();
        }
        *p ^= word;
    }

    let mut h = BfHalves { left: 0, right: 0 };
    for i in (0..18).step_by(2) {
        h = st.encrypt_halves(h);
        st.p[i] = h.left;
        st.p[i + 1] = h.right;
    }
    for sbox in 0..4 {
        for i in (0..256).step_by(2) {
            h = st.encrypt_halves(h);
            st.s[sbox][i] = h.left;
            st.s[sbox][i + 1] = h.right;
        }
    }
    st
}

pub fn bf_f(state: &BlowfishState, x: u32) -> u32 {
    state.f(x)
}

pub fn bf_encrypt_block(state: &BlowfishState, block: &[u8; 8]) -> [u8; 8] {
    state.encrypt_block(block)
}

pub fn bf_decrypt_block(state: &BlowfishState, block: &[u8; 8]) -> [u8; 8] {
    state.decrypt_block(block)
}

/// XORs `data` with the keystream `E(nonce), E(nonce + 1), ...` where each
/// counter is a big-endian u64 wrapping modulo 2^64. Applying it twice is
/// the identity.
pub fn bf_ctr_transform(state: &BlowfishState, nonce: u64, data: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    bf_ctr_apply(state, nonce, &mut out);
    out
}

pub fn bf_ctr_apply(state: &BlowfishState, nonce: u64, data: &mut [u8]) {
    for (i, chunk) in data.chunks_mut(8).enumerate() {
        let counter = nonce.wrapping_add(i as u64);
        let ks = state.encrypt_block(&counter.to_be_bytes());
        for (b, k) in chunk.iter_mut().zip(ks) {
            *b ^= k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(key_hex: &str) -> BlowfishState {
        bf_key_schedule(&BlowfishKey::new(&hex::decode(key_hex).unwrap()).unwrap())
    }

    fn block(h: &str) -> [u8; 8] {
        hex::decode(h).unwrap().try_into().unwrap()
    }

    /// Hex digit `n` (0-based, after the point) of pi via the
    /// Bailey-Borwein-Plouffe digit-extraction formula.
    fn pi_hex_digit(n: u64) -> u32 {
        fn series(j: u64, n: u64) -> f64 {
            let mut s = 0.0;
            for k in 0..=n {
                let denom = 8 * k + j;
                let mut pow = 1u64;
                let (mut base, mut e) = (16 % denom, n - k);
                while e > 0 {
                    if e & 1 == 1 {
                        pow = pow * base % denom;
                    }
                    base = base * base % denom;
                    e >>= 1;
                }
                s = (s + pow as f64 / denom as f64).fract();
            }
            let mut k = n + 1;
            loop {
                let term = 16f64.powi(-((k - n) as i32)) / (8 * k + j) as f64;
                if term < 1e-17 {
                    break;
                }
                s += term;
                k += 1;
            }
            s.fract()
        }
        let x = (4.0 * series(1, n) - 2.0 * series(4, n) - series(5, n) - series(6, n)).rem_euclid(1.0);
        (x * 16.0) as u32
    }

    #[test]
    fn initial_tables_are_pi_digits() {
        let st = BlowfishState::initial();
        assert_eq!(st.p_array()[0], 0x243f_6a88);
        assert_eq!(st.p_array()[1], 0x85a3_08d3);
        assert_eq!(st.s_boxes()[0][0], 0xd131_0ba6);
        assert_eq!(st.s_boxes()[3][255], 0x3ac3_72e6);
        // sample words across the whole table against BBP
        let words: Vec<u32> = st
            .p_array()
            .iter()
            .chain(st.s_boxes().iter().flatten())
            .copied()
            .collect();
        assert_eq!(words.len(), 1042);
        for idx in [0usize, 1, 17, 18, 100, 273, 530, 777, 1000, 1041] {
            let expect = (0..8).fold(0u32, |acc, d| (acc << 4) | pi_hex_digit((8 * idx + d) as u64));
            assert_eq!(words[idx], expect, "word {idx}");
        }
    }

    // (key, plaintext, ciphertext), reference ECB vectors
    const VECTORS: &[(&str, &str, &str)] = &[
        ("0000000000000000", "0000000000000000", "4ef997456198dd78"),
        ("ffffffffffffffff", "ffffffffffffffff", "51866fd5b85ecb8a"),
        ("3000000000000000", "1000000000000001", "7d856f9a613063f2"),
        ("1111111111111111", "1111111111111111", "2466dd878b963c9d"),
        ("0123456789abcdef", "1111111111111111", "61f9c3802281b096"),
        ("1111111111111111", "0123456789abcdef", "7d0cc630afda1ec7"),
        ("fedcba9876543210", "0123456789abcdef", "0aceab0fc6a0a28d"),
        ("7ca110454a1a6e57", "01a1d6d039776742", "59c68245eb05282b"),
        ("0131d9619dc1376e", "5cd54ca83def57da", "b1b8cc0b250f09a0"),
    ];

    #[test]
    fn reference_vectors() {
        for &(k, p, c) in VECTORS {
            let st = state(k);
            assert_eq!(bf_encrypt_block(&st, &block(p)), block(c), "key {k}");
            assert_eq!(bf_decrypt_block(&st, &block(c)), block(p), "key {k}");
        }
        let st = bf_key_schedule(&BlowfishKey::new(b"abcdefghijklmnopqrstuvwxyz").unwrap());
        assert_eq!(bf_encrypt_block(&st, b"BLOWFISH"), block("324ed0fef413a203"));
    }

    #[test]
    fn key_length_bounds() {
        assert_eq!(BlowfishKey::new(b"abc"), Err(BlowfishError::BadKeyLength(3)));
        assert!(BlowfishKey::new(&[0; 4]).is_ok());
        assert!(BlowfishKey::new(&[0; 56]).is_ok());
        assert_eq!(BlowfishKey::new(&[0; 57]), Err(BlowfishError::BadKeyLength(57)));
    }

    #[test]
    fn schedule_is_deterministic() {
        assert_eq!(state("0123456789abcdef"), state("0123456789abcdef"));
        assert_ne!(state("0123456789abcdef"), state("0123456789abcdee"));
    }

    #[test]
    fn f_depends_on_key() {
        let a = state("0011223344556677");
        let b = state("0011223344556678");
        assert_eq!(bf_f(&a, 0xdead_beef), bf_f(&a, 0xdead_beef));
        let differing = (0..64u32)
            .filter(|&x| bf_f(&a, x * 0x0101_0101) != bf_f(&b, x * 0x0101_0101))
            .count();
        assert!(differing > 60);
    }

    #[test]
    fn random_round_trip_and_wrong_key() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = bf_key_schedule(&BlowfishKey::new(&rng.gen::<[u8; 16]>()).unwrap());
        let other = bf_key_schedule(&BlowfishKey::new(&rng.gen::<[u8; 16]>()).unwrap());
        for _ in 0..1000 {
            let b: [u8; 8] = rng.gen();
            let c = bf_encrypt_block(&st, &b);
            assert_eq!(bf_decrypt_block(&st, &c), b);
            assert_ne!(bf_decrypt_block(&other, &c), b);
        }
    }

    #[test]
    fn ctr_keystream() {
        let st = state("0000000000000000");
        assert_eq!(bf_ctr_transform(&st, 0, &[0; 8]), block("4ef997456198dd78"));
        assert!(bf_ctr_transform(&st, 0, &[]).is_empty());
        // second block is E(1)
        let ks = bf_ctr_transform(&st, 0, &[0; 16]);
        assert_eq!(&ks[8..], &bf_encrypt_block(&st, &1u64.to_be_bytes()));
        // counter wraps
        let ks = bf_ctr_transform(&st, u64::MAX, &[0; 16]);
        assert_eq!(&ks[8..], &block("4ef997456198dd78"));
    }

    #[test]
    fn ctr_involution_and_bit_locality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let st = state("fedcba9876543210");
        for len in [0usize, 1, 7, 8, 9, 100, 513] {
            let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let nonce = rng.gen();
            let ct = bf_ctr_transform(&st, nonce, &data);
            assert_eq!(ct.len(), len);
            assert_eq!(bf_ctr_transform(&st, nonce, &ct), data);
            if len > 0 {
                let k = rng.gen_range(0..8 * len);
                let mut flipped = ct.clone();
                flipped[k / 8] ^= 0x80 >> (k % 8);
                let back = bf_ctr_transform(&st, nonce, &flipped);
                let diff: u32 = back.iter().zip(&data).map(|(a, b)| (a ^ b).count_ones()).sum();
                assert_eq!(diff, 1);
                assert_eq!(back[k / 8] ^ data[k / 8], 0x80 >> (k % 8));
            }
        }
    }
}
