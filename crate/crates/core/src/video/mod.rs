//! Reversible hiding across the luma planes of a YUV4MPEG2 stream.
//!
//! Each frame is an independent carrier unit: its Y plane hosts one payload
//! frame with the same layout as a still image's red plane, and the whole
//! frame (Y, U and V) is encrypted with the keystream for `nonce + index`.

pub mod color;
pub mod y4m;

pub use color::{frame_to_rgb_image, rgb_image_to_frame, rgb_to_yuv, yuv_to_rgb};
pub use y4m::{parse_y4m, write_y4m, Colorspace, FrameRate, Y4mError, Y4mVideo, YuvFrame};

use crate::aes::AesKey;
use crate::blowfish::BlowfishKey;
use crate::frame::{read_frame_lsbs, PayloadFrame};
use crate::reversible::lsb_replace_samples;
use crate::stego::{
    apply_image_cipher, assemble_payload, carrier_capacity, encrypt_payload, reserve_room_samples, restore_samples,
    split_frames, HideOptions, ImageEncryption, StegoError, StegoKeys,
};

#[derive(Debug, Clone)]
pub struct VideoHideOutcome {
    pub video: Y4mVideo,
    pub nonce: u64,
    /// Region A length used in each frame.
    pub frame_bits: Vec<usize>,
    /// Largest region A each frame could have hosted.
    pub capacity_bits: Vec<usize>,
    /// Number of frames carrying ciphertext.
    pub segments_used: usize,
}

fn frame_nonce(nonce: u64, index: usize) -> u64 {
    nonce.wrapping_add(index as u64)
}

fn in_frame(index: usize) -> impl Fn(StegoError) -> StegoError {
    move |e| StegoError::VideoFrame {
        index,
        source: Box::new(e),
    }
}

fn cipher_frame(frame: &mut YuvFrame, key: &BlowfishKey, nonce: u64, enc: ImageEncryption) {
    let mut bytes = frame.to_bytes();
    apply_image_cipher(&mut bytes, key, nonce, enc);
    frame.copy_from_bytes(&bytes);
}

/// Spreads `secret` over the frames of `video`, filling frames in order.
pub fn video_hide(
    video: &Y4mVideo,
    secret: &[u8],
    keys: &StegoKeys,
    opts: &HideOptions,
) -> Result<VideoHideOutcome, StegoError> {
    let iv = opts.resolve_iv();
    let capacity_bits: Vec<usize> = video.frames.iter().map(|f| carrier_capacity(f.y.samples())).collect();
    let ct = encrypt_payload(secret, &keys.data_key, &iv)?;
    let frames = split_frames(&ct, &iv, &capacity_bits)?;

    let mut out = video.clone();
    for (index, (yuv, pf)) in out.frames.iter_mut().zip(&frames).enumerate() {
        let bits = pf.to_bits();
        reserve_room_samples(yuv.y.samples_mut(), bits.len()).map_err(in_frame(index))?;
        cipher_frame(yuv, &keys.image_key, frame_nonce(keys.nonce, index), opts.encryption);
        lsb_replace_samples(yuv.y.samples_mut(), 0, &bits).expect("region A fits the plane");
    }
    Ok(VideoHideOutcome {
        video: out,
        nonce: keys.nonce,
        frame_bits: frames.iter().map(PayloadFrame::bit_len).collect(),
        capacity_bits,
        segments_used: frames.first().map_or(0, |f| usize::from(f.segment_count)),
    })
}

/// Reads the payload frame of every video frame. No keys needed.
pub fn video_read_frames(video: &Y4mVideo) -> Result<Vec<PayloadFrame>, StegoError> {
    video
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| read_frame_lsbs(f.y.samples()).map_err(|e| in_frame(i)(e.into())))
        .collect()
}

/// Reassembles the secret from payload frames in any frame order.
pub fn video_extract_secret(video: &Y4mVideo, data_key: &AesKey) -> Result<Vec<u8>, StegoError> {
    assemble_payload(&video_read_frames(video)?, data_key)
}

/// Decrypts every frame and undoes the room reservation.
pub fn video_recover(
    marked: &Y4mVideo,
    image_key: &BlowfishKey,
    nonce: u64,
    encryption: ImageEncryption,
) -> Result<Y4mVideo, StegoError> {
    let mut out = marked.clone();
    for (index, yuv) in out.frames.iter_mut().enumerate() {
        cipher_frame(yuv, image_key, frame_nonce(nonce, index), encryption);
        restore_samples(yuv.y.samples_mut()).map_err(in_frame(index))?;
    }
    Ok(out)
}

pub fn video_reveal(
    marked: &Y4mVideo,
    keys: &StegoKeys,
    encryption: ImageEncryption,
) -> Result<(Vec<u8>, Y4mVideo), StegoError> {
    let secret = video_extract_secret(marked, &keys.data_key)?;
    let original = video_recover(marked, &keys.image_key, keys.nonce, encryption)?;
    Ok((secret, original))
}
