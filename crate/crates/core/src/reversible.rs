//! Histogram-shift reversible embedding and plain LSB substitution on gray
//! planes.
//!
//! Histogram shift picks the most frequent sample value (peak) and the
//! nearest absent value (zero). Samples strictly between them move one step
//! towards the zero bin, which frees the bin next to the peak; each peak
//! sample then carries one bit (stay = 0, step = 1). Every sample changes
//! by at most one and the whole process is exactly invertible.

use thiserror::Error;

use crate::imagefmt::GrayPlane;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdhError {
    #[error("histogram has no empty bin; histogram shift impossible")]
    NoZeroBin,
    #[error("payload of {needed} bits exceeds capacity of {available}")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("zero bin {0} is not empty")]
    ZeroBinNotEmpty(u8),
    #[error("peak and zero bins must differ (both {0})")]
    PeakEqualsZero(u8),
    #[error("only {found} embedding candidates found, side info claims {expected}")]
    PayloadOverrun { found: usize, expected: usize },
    #[error("range {start}..{end} outside plane of {len} samples")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("cannot plan histogram shift on an empty plane")]
    EmptyPlane,
}

/// Everything needed to undo one histogram-shift embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HsSideInfo {
    pub peak: u8,
    pub zero: u8,
    pub payload_bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HsPlan {
    pub peak: u8,
    pub zero: u8,
    pub capacity: usize,
}

pub fn histogram(samples: &[u8]) -> [usize; 256] {
    let mut h = [0usize; 256];
    for &s in samples {
        h[s as usize] += 1;
    }
    h
}

/// Peak = most frequent value (smallest on ties); zero = nearest empty bin
/// above the peak, falling back to the nearest below.
pub fn plan_hs_samples(samples: &[u8]) -> Result<HsPlan, RdhError> {
    if samples.is_empty() {
        return Err(RdhError::EmptyPlane);
    }
    plan_from_histogram(&histogram(samples))
}

pub(crate) fn plan_from_histogram(h: &[usize; 256]) -> Result<HsPlan, RdhError> {
    let mut peak = 0usize;
    for v in 1..256 {
        if h[v] > h[peak] {
            peak = v;
        }
    }
    let zero = (peak + 1..256)
        .find(|&v| h[v] == 0)
        .or_else(|| (0..peak).rev().find(|&v| h[v] == 0))
        .ok_or(RdhError::NoZeroBin)?;
    Ok(HsPlan {
        peak: peak as u8,
        zero: zero as u8,
        capacity: h[peak],
    })
}

pub fn plan_hs(plane: &GrayPlane) -> Result<HsPlan, RdhError> {
    plan_hs_samples(plane.samples())
}

/// In-place histogram-shift embedding over raw samples.
pub fn hs_embed_samples(samples: &mut [u8], bits: &[bool], peak: u8, zero: u8) -> Result<(), RdhError> {
    if peak == zero {
        return Err(RdhError::PeakEqualsZero(peak));
    }
    let h = histogram(samples);
    if h[zero as usize] != 0 {
        return Err(RdhError::ZeroBinNotEmpty(zero));
    }
    if bits.len() > h[peak as usize] {
        return Err(RdhError::CapacityExceeded {
            needed: bits.len(),
            available: h[peak as usize],
        });
    }
    let up = peak < zero;
    let mut next = bits.iter();
    for s in samples.iter_mut() {
        let v = *s;
        if up && v > peak && v < zero {
            *s = v + 1;
        } else if !up && v < peak && v > zero {
            *s = v - 1;
        } else if v == peak {
            if let Some(&bit) = next.next() {
                if bit {
                    *s = if up { peak + 1 } else { peak - 1 };
                }
            }
        }
    }
    Ok(())
}

/// Inverse of [`hs_embed_samples`]: returns the embedded bits and restores
/// the samples in place.
pub fn hs_extract_samples(samples: &mut [u8], side: &HsSideInfo) -> Result<Vec<bool>, RdhError> {
    let HsSideInfo {
        peak,
        zero,
        payload_bits,
    } = *side;
    if peak == zero {
        return Err(RdhError::PeakEqualsZero(peak));
    }
    let expected = payload_bits as usize;
    let up = peak < zero;
    let marked = if up { peak.wrapping_add(1) } else { peak.wrapping_sub(1) };

    let mut bits = Vec::with_capacity(expected);
    for &s in samples.iter() {
        if bits.len() == expected {
            break;
        }
        if s == peak {
            bits.push(false);
        } else if s == marked {
            bits.push(true);
        }
    }
    if bits.len() < expected {
        return Err(RdhError::PayloadOverrun {
            found: bits.len(),
            expected,
        });
    }

    for s in samples.iter_mut() {
        let v = *s;
        if up && v > peak && v <= zero {
            *s = v - 1;
        } else if !up && v < peak && v >= zero {
            *s = v + 1;
        }
    }
    Ok(bits)
}

pub fn hs_embed(plane: &GrayPlane, bits: &[bool], peak: u8, zero: u8) -> Result<GrayPlane, RdhError> {
    let mut out = plane.clone();
    hs_embed_samples(out.samples_mut(), bits, peak, zero)?;
    Ok(out)
}

pub fn hs_extract(plane: &GrayPlane, side: &HsSideInfo) -> Result<(GrayPlane, Vec<bool>), RdhError> {
    let mut out = plane.clone();
    let bits = hs_extract_samples(out.samples_mut(), side)?;
    Ok((out, bits))
}

fn check_range(len: usize, start: usize, n: usize) -> Result<(), RdhError> {
    match start.checked_add(n) {
        Some(end) if end <= len => Ok(()),
        _ => Err(RdhError::OutOfRange {
            start,
            end: start.saturating_add(n),
            len,
        }),
    }
}

pub fn lsb_replace_samples(samples: &mut [u8], start: usize, bits: &[bool]) -> Result<(), RdhError> {
    check_range(samples.len(), start, bits.len())?;
    for (s, &b) in samples[start..].iter_mut().zip(bits) {
        *s = (*s & 0xFE) | u8::from(b);
    }
    Ok(())
}

pub fn lsb_read_samples(samples: &[u8], start: usize, n: usize) -> Result<Vec<bool>, RdhError> {
    check_range(samples.len(), start, n)?;
    Ok(samples[start..start + n].iter().map(|&s| s & 1 == 1).collect())
}

pub fn lsb_replace(plane: &GrayPlane, start: usize, bits: &[bool]) -> Result<GrayPlane, RdhError> {
    let mut out = plane.clone();
    lsb_replace_samples(out.samples_mut(), start, bits)?;
    Ok(out)
}

pub fn lsb_read(plane: &GrayPlane, start: usize, n: usize) -> Result<Vec<bool>, RdhError> {
    lsb_read_samples(plane.samples(), start, n)
}
