//! Mean squared error and PSNR between equally sized images.
//!
//! Colour MSE averages over every sample (width x height x 3), so an image
//! whose components are all off by one has MSE exactly 1.

use thiserror::Error;

use crate::imagefmt::{GrayPlane, RgbImage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("dimension mismatch: {a_w}x{a_h} vs {b_w}x{b_h}")]
pub struct DimensionMismatch {
    pub a_w: usize,
    pub a_h: usize,
    pub b_w: usize,
    pub b_h: usize,
}

/// Two images of identical dimensions.
#[derive(Debug, Clone, Copy)]
pub struct ImagePair<'a> {
    a: &'a RgbImage,
    b: &'a RgbImage,
}

impl<'a> ImagePair<'a> {
    pub fn new(a: &'a RgbImage, b: &'a RgbImage) -> Result<Self, DimensionMismatch> {
        if a.width() != b.width() || a.height() != b.height() {
            return Err(DimensionMismatch {
                a_w: a.width(),
                a_h: a.height(),
                b_w: b.width(),
                b_h: b.height(),
            });
        }
        Ok(ImagePair { a, b })
    }

    pub fn mse(&self) -> f64 {
        mse_samples(self.a.as_bytes(), self.b.as_bytes())
    }

    pub fn psnr(&self) -> f64 {
        psnr_from_mse(self.mse())
    }
}

fn mse_samples(a: &[u8], b: &[u8]) -> f64 {
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    sum as f64 / a.len() as f64
}

pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64, DimensionMismatch> {
    Ok(ImagePair::new(a, b)?.mse())
}

/// PSNR in dB; identical images give `f64::INFINITY`.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64, DimensionMismatch> {
    Ok(ImagePair::new(a, b)?.psnr())
}

pub fn mse_gray(a: &GrayPlane, b: &GrayPlane) -> Result<f64, DimensionMismatch> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(DimensionMismatch {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    Ok(mse_samples(a.samples(), b.samples()))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// Two decimals, or `inf`.
pub fn format_psnr(db: f64) -> String {
    if db.is_infinite() {
        "inf".to_string()
    } else {
        format!("{db:.2}")
    }
}
