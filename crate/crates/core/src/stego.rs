//! Hide and reveal: payload framing, room reservation before encryption,
//! encrypted-domain LSB embedding, and exact cover recovery.
//!
//! Carrier layout over the `n` carrier samples (red components of an image,
//! or the luma plane of a video frame), row-major:
//!
//! ```text
//! [0, L)          region A: payload frame bits, written into LSBs after encryption
//! [L, n - 64)     region B: histogram-shift host for the displaced LSBs
//! [n - 64, n)     header slots: SideHeader bits, written into LSBs before encryption
//! ```
//!
//! Before encryption the original LSBs of the header slots and of region A
//! are histogram-shift embedded into region B, and the side header is
//! written into the header slots. The carrier is then encrypted with the
//! Blowfish keystream, and the payload frame overwrites the region A LSBs.
//! Because the keystream is a bitwise XOR, decryption restores every bit
//! the embedder did not touch; the header tells the recoverer how to undo
//! the histogram shift and put the displaced LSBs back.

use thiserror::Error;

use crate::aes::{aes_cbc_decrypt, aes_cbc_encrypt, AesError, AesKey};
use crate::blowfish::{bf_ctr_apply, bf_key_schedule, BlowfishKey};
use crate::frame::{read_frame_lsbs, FrameError, PayloadFrame, SideHeader, FRAME_OVERHEAD, SIDE_HEADER_BITS};
use crate::huffman;
use crate::imagefmt::{red_plane, set_red_plane, GrayPlane, RgbImage};
use crate::metrics;
use crate::reversible::{
    histogram, hs_embed_samples, hs_extract_samples, lsb_read_samples, lsb_replace_samples, plan_hs_samples,
    HsSideInfo, RdhError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StegoError {
    #[error("cover too small: {needed} carrier samples needed, {available} available")]
    CoverTooSmall { needed: usize, available: usize },
    #[error("capacity exceeded: need {needed} bits, {available} available")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("histogram-shift region uses all 256 values; no zero bin")]
    NoZeroBin,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("payload decryption failed (wrong data key)")]
    BadPadding,
    #[error("side header checksum failed (wrong image key, wrong nonce, or not a marked cover)")]
    HeaderChecksum,
    #[error("cover damaged: {0}")]
    DamagedCover(RdhError),
    #[error("payload segment {0} missing")]
    MissingSegment(u16),
    #[error("too many segments: {0}")]
    TooManySegments(usize),
    #[error("payload too large: {0}")]
    PayloadTooLarge(String),
    #[error("frame {index}: {source}")]
    VideoFrame {
        index: usize,
        #[source]
        source: Box<StegoError>,
    },
}

impl StegoError {
    /// Strips any per-frame wrapper.
    pub fn root(&self) -> &StegoError {
        match self {
            StegoError::VideoFrame { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StegoKeys {
    pub data_key: AesKey,
    pub image_key: BlowfishKey,
    pub nonce: u64,
}

/// Whether the carrier is encrypted before embedding. `Disabled` is a
/// debugging aid that exposes the plain-domain marked image directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageEncryption {
    #[default]
    Blowfish,
    Disabled,
}

#[derive(Debug, Clone, Default)]
pub struct HideOptions {
    /// CBC IV for the payload; drawn from the OS RNG when absent.
    pub iv: Option<[u8; 16]>,
    pub encryption: ImageEncryption,
}

impl HideOptions {
    pub(crate) fn resolve_iv(&self) -> [u8; 16] {
        self.iv.unwrap_or_else(rand::random)
    }
}

#[derive(Debug, Clone)]
pub struct HideOutcome {
    pub marked: RgbImage,
    pub nonce: u64,
    /// Region A length actually used.
    pub frame_bits: usize,
    /// Largest region A the cover could have hosted.
    pub capacity_bits: usize,
    /// Original vs plain-domain marked image.
    pub psnr: f64,
}

/// Huffman-compresses then AES-CBC encrypts the secret.
pub fn encrypt_payload(secret: &[u8], data_key: &AesKey, iv: &[u8; 16]) -> Result<Vec<u8>, StegoError> {
    let container = huffman::compress_bytes(secret).map_err(|e| StegoError::PayloadTooLarge(e.to_string()))?;
    Ok(aes_cbc_encrypt(&container, data_key, iv))
}

/// Inverse of [`encrypt_payload`]. The frame CRC has already vouched for
/// the ciphertext, so any padding or container failure means the key is
/// wrong.
pub fn decrypt_payload(ciphertext: &[u8], data_key: &AesKey, iv: &[u8; 16]) -> Result<Vec<u8>, StegoError> {
    let container = aes_cbc_decrypt(ciphertext, data_key, iv).map_err(|e| match e {
        AesError::BadLength(_) | AesError::BadPadding | AesError::BadKeyLength(_) => StegoError::BadPadding,
    })?;
    huffman::decompress_bytes(&container).map_err(|_| StegoError::BadPadding)
}

/// Splits ciphertext greedily over carrier units. Unit `u` gets a frame with
/// `segment_index = u` holding as much ciphertext as fits `capacities[u]`
/// bits; units past the last nonempty segment carry empty frames.
pub fn split_frames(ciphertext: &[u8], iv: &[u8; 16], capacities: &[usize]) -> Result<Vec<PayloadFrame>, StegoError> {
    if capacities.len() > usize::from(u16::MAX) {
        return Err(StegoError::TooManySegments(capacities.len()));
    }
    let total_available: usize = capacities.iter().sum();
    let needed = 8 * (ciphertext.len() + FRAME_OVERHEAD * capacities.len().max(1));
    let exceeded = || StegoError::CapacityExceeded {
        needed,
        available: total_available,
    };

    let mut sizes = Vec::with_capacity(capacities.len());
    let mut rest = ciphertext.len();
    for &cap in capacities {
        let room = (cap / 8).checked_sub(FRAME_OVERHEAD).ok_or_else(exceeded)?;
        let take = room.min(rest);
        sizes.push(take);
        rest -= take;
    }
    if rest > 0 || capacities.is_empty() {
        return Err(exceeded());
    }

    let segment_count = sizes.iter().rposition(|&s| s > 0).map_or(0, |i| i + 1) as u16;
    let mut offset = 0;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(u, &len)| {
            let frame = PayloadFrame {
                segment_index: u as u16,
                segment_count,
                iv: *iv,
                ciphertext: ciphertext[offset..offset + len].to_vec(),
            };
            offset += len;
            frame
        })
        .collect())
}

pub fn build_frames(
    secret: &[u8],
    data_key: &AesKey,
    iv: &[u8; 16],
    capacities: &[usize],
) -> Result<Vec<PayloadFrame>, StegoError> {
    let ct = encrypt_payload(secret, data_key, iv)?;
    split_frames(&ct, iv, capacities)
}

/// Reassembles segment ciphertext by index and decrypts it.
pub fn assemble_payload(frames: &[PayloadFrame], data_key: &AesKey) -> Result<Vec<u8>, StegoError> {
    let first = frames
        .iter()
        .find(|f| f.segment_index == 0)
        .ok_or(StegoError::MissingSegment(0))?;
    let count = first.segment_count;
    let mut ct = Vec::new();
    for idx in 0..count {
        let seg = frames
            .iter()
            .find(|f| f.segment_index == idx)
            .ok_or(StegoError::MissingSegment(idx))?;
        ct.extend_from_slice(&seg.ciphertext);
    }
    decrypt_payload(&ct, data_key, &first.iv)
}

fn hs_capacity_at(samples: &[u8], region_a: usize) -> usize {
    let n = samples.len();
    if region_a + SIDE_HEADER_BITS > n {
        return 0;
    }
    histogram(&samples[region_a..n - SIDE_HEADER_BITS])
        .iter()
        .copied()
        .max()
        .unwrap_or(0)
}

/// Largest region A length `L` whose histogram-shift host (the samples
/// between region A and the header slots) can absorb `64 + L` bits.
///
/// The host's peak count can only fall as `L` grows while the demand
/// rises, so the feasible lengths form a prefix and a binary search finds
/// the boundary.
pub fn carrier_capacity(samples: &[u8]) -> usize {
    let n = samples.len();
    if n < SIDE_HEADER_BITS {
        return 0;
    }
    let fits = |l: usize| hs_capacity_at(samples, l) >= SIDE_HEADER_BITS + l;
    if !fits(0) {
        return 0;
    }
    let (mut lo, mut hi) = (0, n - SIDE_HEADER_BITS);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Moves the LSBs of the header slots and region A into region B by
/// histogram shift and writes the side header. Only carrier samples change.
pub fn reserve_room_samples(samples: &mut [u8], region_a: usize) -> Result<HsSideInfo, StegoError> {
    let n = samples.len();
    let needed_samples = region_a + SIDE_HEADER_BITS;
    if needed_samples > n {
        return Err(StegoError::CoverTooSmall {
            needed: needed_samples,
            available: n,
        });
    }
    let header_at = n - SIDE_HEADER_BITS;
    let region_a_bits = u32::try_from(region_a).map_err(|_| StegoError::PayloadTooLarge(format!("{region_a} bits")))?;

    let plan = plan_hs_samples(&samples[region_a..header_at]).map_err(|e| match e {
        RdhError::NoZeroBin => StegoError::NoZeroBin,
        _ => StegoError::CapacityExceeded {
            needed: needed_samples,
            available: 0,
        },
    })?;
    if plan.capacity < needed_samples {
        return Err(StegoError::CapacityExceeded {
            needed: needed_samples,
            available: plan.capacity,
        });
    }

    let mut displaced = lsb_read_samples(samples, header_at, SIDE_HEADER_BITS).expect("in range");
    displaced.extend(lsb_read_samples(samples, 0, region_a).expect("in range"));
    hs_embed_samples(&mut samples[region_a..header_at], &displaced, plan.peak, plan.zero)
        .map_err(StegoError::DamagedCover)?;

    let header = SideHeader {
        peak: plan.peak,
        zero: plan.zero,
        region_a_bits,
    };
    lsb_replace_samples(samples, header_at, &header.to_bits()).expect("in range");
    Ok(HsSideInfo {
        peak: plan.peak,
        zero: plan.zero,
        payload_bits: needed_samples as u32,
    })
}

/// Reads the side header from decrypted carrier samples, undoes the
/// histogram shift and restores the displaced LSBs. Returns the header.
pub fn restore_samples(samples: &mut [u8]) -> Result<SideHeader, StegoError> {
    let n = samples.len();
    if n < SIDE_HEADER_BITS {
        return Err(StegoError::HeaderChecksum);
    }
    let header_at = n - SIDE_HEADER_BITS;
    let header_bits = lsb_read_samples(samples, header_at, SIDE_HEADER_BITS).expect("in range");
    let header = SideHeader::from_bits(&header_bits).ok_or(StegoError::HeaderChecksum)?;
    let region_a = header.region_a_bits as usize;
    if header.peak == header.zero || region_a > header_at {
        return Err(StegoError::HeaderChecksum);
    }

    let side = HsSideInfo {
        peak: header.peak,
        zero: header.zero,
        payload_bits: (region_a + SIDE_HEADER_BITS) as u32,
    };
    let displaced = hs_extract_samples(&mut samples[region_a..header_at], &side).map_err(StegoError::DamagedCover)?;
    lsb_replace_samples(samples, header_at, &displaced[..SIDE_HEADER_BITS]).expect("in range");
    lsb_replace_samples(samples, 0, &displaced[SIDE_HEADER_BITS..]).expect("in range");
    Ok(header)
}

/// Image-level room reservation on the red plane.
pub fn reserve_room(img: &RgbImage, frame_bits: usize) -> Result<(RgbImage, HsSideInfo), StegoError> {
    let mut red = red_plane(img);
    let side = reserve_room_samples(red.samples_mut(), frame_bits)?;
    Ok((set_red_plane(img, &red).expect("same dimensions"), side))
}

fn write_red_lsbs(img: &mut RgbImage, bits: &[bool]) {
    for (px, &b) in img.as_bytes_mut().chunks_exact_mut(3).zip(bits) {
        px[0] = (px[0] & 0xFE) | u8::from(b);
    }
}

pub(crate) fn apply_image_cipher(data: &mut [u8], key: &BlowfishKey, nonce: u64, enc: ImageEncryption) {
    if enc == ImageEncryption::Blowfish {
        bf_ctr_apply(&bf_key_schedule(key), nonce, data);
    }
}

/// Embeds `secret` into `img`; see the module docs for the layout.
pub fn hide(img: &RgbImage, secret: &[u8], keys: &StegoKeys, opts: &HideOptions) -> Result<HideOutcome, StegoError> {
    let iv = opts.resolve_iv();
    let n = img.pixel_count();
    let ct = encrypt_payload(secret, &keys.data_key, &iv)?;
    let frame_bits = 8 * (FRAME_OVERHEAD + ct.len());
    if frame_bits + SIDE_HEADER_BITS > n {
        return Err(StegoError::CoverTooSmall {
            needed: frame_bits + SIDE_HEADER_BITS,
            available: n,
        });
    }
    let frames = split_frames(&ct, &iv, &[n - SIDE_HEADER_BITS])?;
    let frame = &frames[0];
    debug_assert_eq!(frame.bit_len(), frame_bits);

    let red = red_plane(img);
    let capacity_bits = carrier_capacity(red.samples());
    if frame_bits > capacity_bits {
        return Err(StegoError::CapacityExceeded {
            needed: frame_bits,
            available: capacity_bits,
        });
    }
    let (mut marked, _) = reserve_room(img, frame_bits)?;
    apply_image_cipher(marked.as_bytes_mut(), &keys.image_key, keys.nonce, opts.encryption);
    write_red_lsbs(&mut marked, &frame.to_bits());

    let mut plain = marked.clone();
    apply_image_cipher(plain.as_bytes_mut(), &keys.image_key, keys.nonce, opts.encryption);
    let psnr = metrics::psnr(img, &plain).expect("same dimensions");

    Ok(HideOutcome {
        marked,
        nonce: keys.nonce,
        frame_bits,
        capacity_bits,
        psnr,
    })
}

/// Reads the payload frame from a marked image's red LSBs. No keys needed.
pub fn read_frame(marked: &RgbImage) -> Result<PayloadFrame, StegoError> {
    Ok(read_frame_lsbs(red_plane(marked).samples())?)
}

/// Data extraction only; needs just the data key.
pub fn extract_secret(marked: &RgbImage, data_key: &AesKey) -> Result<Vec<u8>, StegoError> {
    let frame = read_frame(marked)?;
    if frame.segment_count != 1 || frame.segment_index != 0 {
        return Err(StegoError::MissingSegment(1));
    }
    assemble_payload(std::slice::from_ref(&frame), data_key)
}

/// Image recovery only; needs just the image key and nonce.
pub fn recover_original(
    marked: &RgbImage,
    image_key: &BlowfishKey,
    nonce: u64,
    encryption: ImageEncryption,
) -> Result<RgbImage, StegoError> {
    let mut plain = marked.clone();
    apply_image_cipher(plain.as_bytes_mut(), image_key, nonce, encryption);
    let mut red: GrayPlane = red_plane(&plain);
    restore_samples(red.samples_mut())?;
    Ok(set_red_plane(&plain, &red).expect("same dimensions"))
}

pub fn reveal(
    marked: &RgbImage,
    keys: &StegoKeys,
    encryption: ImageEncryption,
) -> Result<(Vec<u8>, RgbImage), StegoError> {
    let secret = extract_secret(marked, &keys.data_key)?;
    let original = recover_original(marked, &keys.image_key, keys.nonce, encryption)?;
    Ok((secret, original))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn keys(rng: &mut ChaCha8Rng) -> StegoKeys {
        let len = rng.gen_range(4..=56);
        let image_key: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        StegoKeys {
            data_key: AesKey(rng.gen()),
            image_key: BlowfishKey::new(&image_key).unwrap(),
            nonce: rng.gen(),
        }
    }

    /// Red channel concentrated around one value, green/blue uniform.
    fn peaked_cover(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RgbImage {
        let base: u8 = rng.gen_range(20..230);
        let data = (0..w * h)
            .flat_map(|_| {
                let r = if rng.gen_bool(0.85) {
                    base
                } else {
                    base.wrapping_add(rng.gen_range(0..7)).wrapping_sub(3)
                };
                [r, rng.gen(), rng.gen()]
            })
            .collect();
        RgbImage::new(w, h, data).unwrap()
    }

    fn opts(iv: [u8; 16]) -> HideOptions {
        HideOptions {
            iv: Some(iv),
            encryption: ImageEncryption::Blowfish,
        }
    }

    #[test]
    fn single_frame_with_ample_capacity() {
        let key = AesKey([1; 16]);
        let frames = build_frames(b"hello", &key, &[2; 16], &[100_000]).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!((frames[0].segment_index, frames[0].segment_count), (0, 1));
        assert_eq!(assemble_payload(&frames, &key).unwrap(), b"hello");
    }

    #[test]
    fn empty_secret_frame() {
        let key = AesKey([1; 16]);
        let frames = build_frames(b"", &key, &[2; 16], &[100_000]).unwrap();
        assert_eq!(frames[0].ciphertext.len(), 16);
        assert_eq!(
            frames[0].ciphertext,
            aes_cbc_encrypt(b"HUF1\0\0\0\0\0\0", &key, &[2; 16])
        );
    }

    /// Exhaustive split oracle: among all splits that fit, the greedy rule
    /// is the lexicographically largest.
    fn brute_force_split(ct_len: usize, caps: &[usize]) -> Option<Vec<usize>> {
        fn go(rest: usize, caps: &[usize], acc: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
            if caps.is_empty() {
                if rest == 0 && best.as_ref().is_none_or(|b| *acc > *b) {
                    *best = Some(acc.clone());
                }
                return;
            }
            for take in 0..=rest {
                if 8 * (take + FRAME_OVERHEAD) <= caps[0] {
                    acc.push(take);
                    go(rest - take, &caps[1..], acc, best);
                    acc.pop();
                }
            }
        }
        let mut best = None;
        go(ct_len, caps, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn greedy_split_matches_oracle() {
        let ct: Vec<u8> = (0..100u8).collect();
        let frames = split_frames(&ct, &[0; 16], &[900, 2000]).unwrap();
        let sizes: Vec<usize> = frames.iter().map(|f| f.ciphertext.len()).collect();
        assert_eq!(sizes, brute_force_split(100, &[900, 2000]).unwrap());
        assert_eq!(sizes, vec![79, 21]);
        assert!(frames.iter().all(|f| f.segment_count == 2));

        for caps in [
            vec![264, 400, 300],
            vec![500, 264, 1000],
            vec![700, 700, 700, 700],
            vec![300],
        ] {
            for len in [0usize, 1, 16, 40, 90] {
                let ct = vec![7u8; len];
                let got = split_frames(&ct, &[0; 16], &caps)
                    .ok()
                    .map(|fs| fs.iter().map(|f| f.ciphertext.len()).collect::<Vec<_>>());
                let oracle = brute_force_split(len, &caps);
                assert_eq!(got, oracle, "caps {caps:?} len {len}");
            }
        }
    }

    #[test]
    fn split_capacity_errors() {
        assert!(matches!(
            split_frames(&[0; 100], &[0; 16], &[900]),
            Err(StegoError::CapacityExceeded { .. })
        ));
        assert!(matches!(
            split_frames(&[0; 1], &[0; 16], &[200]),
            Err(StegoError::CapacityExceeded { .. })
        ));
        assert!(matches!(
            split_frames(&[], &[0; 16], &[]),
            Err(StegoError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn round_trip_small_cover() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cover = peaked_cover(&mut rng, 48, 40);
        let k = keys(&mut rng);
        let out = hide(&cover, b"attack at dawn", &k, &opts([3; 16])).unwrap();
        assert_ne!(out.marked, cover);
        let (secret, original) = reveal(&out.marked, &k, ImageEncryption::Blowfish).unwrap();
        assert_eq!(secret, b"attack at dawn");
        assert_eq!(original, cover);
        assert!(out.frame_bits <= out.capacity_bits);
    }

    #[test]
    fn empty_payload_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cover = peaked_cover(&mut rng, 40, 32);
        let k = keys(&mut rng);
        let out = hide(&cover, b"", &k, &opts([0; 16])).unwrap();
        let (secret, original) = reveal(&out.marked, &k, ImageEncryption::Blowfish).unwrap();
        assert!(secret.is_empty());
        assert_eq!(original, cover);
    }

    #[test]
    fn zero_length_region_a_reservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cover = peaked_cover(&mut rng, 16, 16);
        let (reserved, side) = reserve_room(&cover, 0).unwrap();
        assert_eq!(side.payload_bits, 64);
        let mut red = red_plane(&reserved);
        let header = restore_samples(red.samples_mut()).unwrap();
        assert_eq!(header.region_a_bits, 0);
        assert_eq!(set_red_plane(&reserved, &red).unwrap(), cover);
    }

    #[test]
    fn reserve_room_touches_only_red() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cover = peaked_cover(&mut rng, 32, 32);
        let (reserved, _) = reserve_room(&cover, 300).unwrap();
        for (i, (a, b)) in cover.as_bytes().iter().zip(reserved.as_bytes()).enumerate() {
            if i % 3 != 0 {
                assert_eq!(a, b);
            } else {
                assert!(a.abs_diff(*b) <= 1);
            }
        }
    }

    #[test]
    fn tiny_cover_too_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cover = peaked_cover(&mut rng, 8, 8);
        let k = keys(&mut rng);
        assert!(matches!(
            hide(&cover, b"x", &k, &opts([0; 16])),
            Err(StegoError::CoverTooSmall { .. })
        ));
    }

    #[test]
    fn no_zero_bin() {
        let data: Vec<u8> = (0..64 * 64).flat_map(|i| [(i % 256) as u8, 0, 0]).collect();
        let cover = RgbImage::new(64, 64, data).unwrap();
        assert_eq!(reserve_room(&cover, 0).map(|_| ()), Err(StegoError::NoZeroBin));
    }

    #[test]
    fn capacity_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let w = rng.gen_range(10..40);
            let cover = peaked_cover(&mut rng, w, 20);
            let red = red_plane(&cover);
            let s = red.samples();
            let n = s.len();
            let brute = (0..=n.saturating_sub(64))
                .filter(|&l| {
                    let mut h = [0usize; 256];
                    for &v in &s[l..n - 64] {
                        h[v as usize] += 1;
                    }
                    *h.iter().max().unwrap() >= 64 + l
                })
                .max()
                .unwrap_or(0);
            assert_eq!(carrier_capacity(s), brute);
        }
    }

    #[test]
    fn key_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let cover = peaked_cover(&mut rng, 64, 48);
        let k = keys(&mut rng);
        let out = hide(&cover, b"key separation", &k, &opts([5; 16])).unwrap();

        let wrong_data = StegoKeys {
            data_key: AesKey([0xEE; 16]),
            ..k.clone()
        };
        assert_eq!(
            reveal(&out.marked, &wrong_data, ImageEncryption::Blowfish).unwrap_err(),
            StegoError::BadPadding
        );
        assert_eq!(
            recover_original(&out.marked, &wrong_data.image_key, k.nonce, ImageEncryption::Blowfish).unwrap(),
            cover
        );

        let wrong_image = StegoKeys {
            image_key: BlowfishKey::new(b"not the key").unwrap(),
            ..k.clone()
        };
        assert_eq!(
            reveal(&out.marked, &wrong_image, ImageEncryption::Blowfish).unwrap_err(),
            StegoError::HeaderChecksum
        );
        // data extraction never needs the image key
        assert_eq!(extract_secret(&out.marked, &k.data_key).unwrap(), b"key separation");
    }

    #[test]
    fn unmarked_image_fails_checksum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cover = peaked_cover(&mut rng, 32, 32);
        let k = keys(&mut rng);
        assert_eq!(
            recover_original(&cover, &k.image_key, 0, ImageEncryption::Blowfish),
            Err(StegoError::HeaderChecksum)
        );
        assert_eq!(
            reveal(&cover, &k, ImageEncryption::Blowfish).unwrap_err(),
            StegoError::Frame(FrameError::BadMagic)
        );
    }

    #[test]
    fn deterministic_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let cover = peaked_cover(&mut rng, 40, 40);
        let k = keys(&mut rng);
        let a = hide(&cover, b"same", &k, &opts([9; 16])).unwrap();
        let b = hide(&cover, b"same", &k, &opts([9; 16])).unwrap();
        assert_eq!(a.marked, b.marked);
    }

    #[test]
    fn plain_mode_round_trip_and_psnr() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let cover = peaked_cover(&mut rng, 64, 64);
        let k = keys(&mut rng);
        let o = HideOptions {
            iv: Some([1; 16]),
            encryption: ImageEncryption::Disabled,
        };
        let out = hide(&cover, b"plain", &k, &o).unwrap();
        // marked differs from cover by at most one per red sample
        for (a, b) in cover.as_bytes().iter().zip(out.marked.as_bytes()) {
            assert!(a.abs_diff(*b) <= 1);
        }
        assert_eq!(out.psnr, metrics::psnr(&cover, &out.marked).unwrap());
        let (s, orig) = reveal(&out.marked, &k, ImageEncryption::Disabled).unwrap();
        assert_eq!((s.as_slice(), orig), (&b"plain"[..], cover));
    }
}
