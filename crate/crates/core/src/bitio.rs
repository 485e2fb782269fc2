//! MSB-first bit packing over byte buffers.
//!
//! Every bitstream in the crate (Huffman codewords, payload frames, side
//! headers) goes through these two types. A partial trailing byte is
//! zero-padded, so the logical bit count must travel out of band.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("out of bits: requested {requested}, {remaining} remaining")]
    OutOfBits { requested: u32, remaining: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    buffer: Vec<u8>,
    bit_count: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, most significant first.
    ///
    /// Panics if `n > 64`.
    pub fn write_bits(&mut self, value: u64, n: u32) {
        assert!(n <= 64, "write_bits: n = {n} exceeds 64");
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn write_bit(&mut self, bit: bool) {
        let offset = (self.bit_count % 8) as u8;
        if offset == 0 {
            self.buffer.push(0);
        }
        if bit {
            *self.buffer.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.bit_count += 1;
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        if self.bit_count.is_multiple_of(8) {
            self.buffer.extend_from_slice(bytes);
            self.bit_count += 8 * bytes.len() as u64;
        } else {
            for &b in bytes {
                self.write_bits(u64::from(b), 8);
            }
        }
    }

    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buffer
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buffer
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    source: &'a [u8],
    cursor: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(source: &'a [u8]) -> Self {
        Self { source, cursor: 0 }
    }

    pub fn total_bits(&self) -> u64 {
        8 * self.source.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.total_bits() - self.cursor
    }

    pub fn position(&self) -> u64 {
        self.cursor
    }

    /// Reads the next `n` bits as an MSB-first integer.
    ///
    /// Panics if `n > 64`.
    pub fn read_bits(&mut self, n: u32) -> Result<u64, BitError> {
        assert!(n <= 64, "read_bits: n = {n} exceeds 64");
        if u64::from(n) > self.remaining() {
            return Err(BitError::OutOfBits {
                requested: n,
                remaining: self.remaining(),
            });
        }
        let mut value = 0u64;
        for _ in 0..n {
            value = (value << 1) | u64::from(self.next_bit());
        }
        Ok(value)
    }

    pub fn read_bit(&mut self) -> Result<bool, BitError> {
        if self.remaining() == 0 {
            return Err(BitError::OutOfBits {
                requested: 1,
                remaining: 0,
            });
        }
        Ok(self.next_bit() == 1)
    }

    fn next_bit(&mut self) -> u8 {
        let byte = self.source[(self.cursor / 8) as usize];
        let bit = (byte >> (7 - (self.cursor % 8))) & 1;
        self.cursor += 1;
        bit
    }
}

/// Expands bytes into individual bits, MSB-first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Packs bits MSB-first, zero-padding the final byte.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    let mut w = BitWriter::new();
    for &b in bits {
        w.write_bit(b);
    }
    w.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_bit_is_msb() {
        let mut w = BitWriter::new();
        w.write_bits(0b1, 1);
        assert_eq!(w.as_bytes(), &[0x80]);
        assert_eq!(w.bit_count(), 1);
    }

    #[test]
    fn whole_byte() {
        let mut w = BitWriter::new();
        w.write_bits(0xA5, 8);
        assert_eq!(w.as_bytes(), &[0xA5]);
    }

    #[test]
    fn hand_packed_partial_byte() {
        let mut w = BitWriter::new();
        w.write_bits(0b101, 3);
        w.write_bits(0b11, 2);
        assert_eq!(w.as_bytes(), &[0b1011_1000]);
        assert_eq!(w.bit_count(), 5);
    }

    #[test]
    fn only_low_bits_count() {
        let mut w = BitWriter::new();
        w.write_bits(0xFF, 2);
        assert_eq!(w.as_bytes(), &[0b1100_0000]);
    }

    #[test]
    fn zero_and_full_width() {
        let mut w = BitWriter::new();
        w.write_bits(u64::MAX, 0);
        assert_eq!(w.bit_count(), 0);
        w.write_bits(0x0123_4567_89ab_cdef, 64);
        let mut r = BitReader::new(w.as_bytes());
        assert_eq!(r.read_bits(64).unwrap(), 0x0123_4567_89ab_cdef);
    }

    #[test]
    fn reads() {
        assert_eq!(BitReader::new(&[0x80]).read_bits(1).unwrap(), 1);
        assert_eq!(BitReader::new(&[0xA5]).read_bits(8).unwrap(), 0xA5);
    }

    #[test]
    fn reading_past_end_is_an_error() {
        let mut r = BitReader::new(&[0xFF]);
        r.read_bits(5).unwrap();
        assert_eq!(
            r.read_bits(4),
            Err(BitError::OutOfBits {
                requested: 4,
                remaining: 3
            })
        );
        // a failed read does not consume anything
        assert_eq!(r.read_bits(3).unwrap(), 0b111);
        assert!(r.read_bit().is_err());
    }

    #[test]
    #[should_panic]
    fn oversized_write_rejected() {
        BitWriter::new().write_bits(0, 65);
    }

    proptest! {
        #[test]
        fn round_trip(fields in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..40)) {
            let mut w = BitWriter::new();
            for &(v, n) in &fields {
                w.write_bits(v, n);
            }
            let total: u64 = fields.iter().map(|&(_, n)| u64::from(n)).sum();
            prop_assert_eq!(w.bit_count(), total);
            prop_assert_eq!(w.as_bytes().len() as u64, total.div_ceil(8));

            let mut again = BitWriter::new();
            for &(v, n) in &fields {
                again.write_bits(v, n);
            }
            prop_assert_eq!(&again, &w);

            let mut r = BitReader::new(w.as_bytes());
            for &(v, n) in &fields {
                let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                prop_assert_eq!(r.read_bits(n).unwrap(), v & mask);
            }
            // padding bits are zero
            let pad = (8 - total % 8) % 8;
            prop_assert_eq!(r.read_bits(pad as u32).unwrap(), 0);
        }

        #[test]
        fn bit_vector_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(bits_to_bytes(&bytes_to_bits(&bytes)), bytes);
        }
    }
}
