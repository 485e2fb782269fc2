//! Full-range BT.601 RGB <-> YUV conversion.
//!
//! Rounding makes the round trip lossy (up to 2 per component), so
//! reversible embedding is only guaranteed on YUV-native input.

use super::y4m::YuvFrame;
use crate::imagefmt::{GrayPlane, RgbImage};

fn to_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_yuv([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    [
        to_u8(0.299 * r + 0.587 * g + 0.114 * b),
        to_u8(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0),
        to_u8(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0),
    ]
}

pub fn yuv_to_rgb([y, u, v]: [u8; 3]) -> [u8; 3] {
    let (y, u, v) = (f64::from(y), f64::from(u) - 128.0, f64::from(v) - 128.0);
    [
        to_u8(y + 1.402 * v),
        to_u8(y - 0.344136 * u - 0.714136 * v),
        to_u8(y + 1.772 * u),
    ]
}

/// Converts an RGB image into a 4:4:4 frame.
pub fn rgb_image_to_frame(img: &RgbImage) -> YuvFrame {
    let n = img.pixel_count();
    let (mut y, mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for px in img.as_bytes().chunks_exact(3) {
        let [a, b, c] = rgb_to_yuv([px[0], px[1], px[2]]);
        y.push(a);
        u.push(b);
        v.push(c);
    }
    let (w, h) = (img.width(), img.height());
    YuvFrame {
        y: GrayPlane::new(w, h, y).unwrap(),
        u: GrayPlane::new(w, h, u).unwrap(),
        v: GrayPlane::new(w, h, v).unwrap(),
        params: String::new(),
    }
}

/// Converts a 4:4:4 frame back to RGB. `None` if the chroma planes are
/// subsampled.
pub fn frame_to_rgb_image(frame: &YuvFrame) -> Option<RgbImage> {
    if frame.u.len() != frame.y.len() || frame.v.len() != frame.y.len() {
        return None;
    }
    let data = frame
        .y
        .samples()
        .iter()
        .zip(frame.u.samples())
        .zip(frame.v.samples())
        .flat_map(|((&y, &u), &v)| yuv_to_rgb([y, u, v]))
        .collect();
    RgbImage::new(frame.y.width(), frame.y.height(), data).ok()
}
