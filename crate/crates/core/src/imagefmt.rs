//! Binary netpbm images (P6 colour, P5 gray), maxval 255 only.
//!
//! The writer is canonical: `P6\n`, an optional `# RDHCTR <16 hex>\n` line
//! carrying the image-encryption counter nonce, `<w> <h>\n255\n`, then raw
//! samples. The reader accepts any netpbm whitespace and comments, but the
//! nonce line is only honoured directly after the magic.

use thiserror::Error;

const NONCE_TAG: &str = "# RDHCTR ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("bad magic: expected {expected}")]
    BadMagic { expected: &'static str },
    #[error("unsupported maxval {0}, only 255 is accepted")]
    BadMaxval(u32),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("pixel data truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    /// Interleaved R, G, B bytes, row-major.
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::DimensionMismatch(format!("empty image {width}x{height}")));
        }
        if data.len() != 3 * width * height {
            return Err(ImageError::DimensionMismatch(format!(
                "{}x{} image needs {} bytes, got {}",
                width,
                height,
                3 * width * height,
                data.len()
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(3 * width * height).collect();
        RgbImage::new(width, height, data).expect("valid dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayPlane {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayPlane {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self, ImageError> {
        if samples.len() != width * height {
            return Err(ImageError::DimensionMismatch(format!(
                "{}x{} plane needs {} samples, got {}",
                width,
                height,
                width * height,
                samples.len()
            )));
        }
        Ok(GrayPlane { width, height, samples })
    }

    /// A single-row plane.
    pub fn from_samples(samples: Vec<u8>) -> Self {
        GrayPlane {
            width: samples.len(),
            height: 1,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }
}

pub fn red_plane(img: &RgbImage) -> GrayPlane {
    GrayPlane {
        width: img.width,
        height: img.height,
        samples: img.data.iter().step_by(3).copied().collect(),
    }
}

pub fn set_red_plane(img: &RgbImage, plane: &GrayPlane) -> Result<RgbImage, ImageError> {
    if plane.width != img.width || plane.height != img.height {
        return Err(ImageError::DimensionMismatch(format!(
            "plane {}x{} vs image {}x{}",
            plane.width, plane.height, img.width, img.height
        )));
    }
    let mut out = img.clone();
    for (px, &r) in out.data.chunks_exact_mut(3).zip(&plane.samples) {
        px[0] = r;
    }
    Ok(out)
}

/// Cursor over a netpbm header.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ImageError::MalformedHeader(format!("{what} out of range")))
    }

    /// Exactly one whitespace byte separates maxval from the raster.
    fn raster_separator(&mut self) -> Result<(), ImageError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(ImageError::MalformedHeader("no whitespace after maxval".into())),
            None => Err(ImageError::Truncated {
                needed: 1,
                available: 0,
            }),
        }
    }
}

/// Parses the nonce comment if it immediately follows the magic.
fn nonce_comment(bytes: &[u8]) -> Result<Option<u64>, ImageError> {
    let rest = &bytes[3..];
    if !rest.starts_with(NONCE_TAG.as_bytes()) {
        return Ok(None);
    }
    let digits = &rest[NONCE_TAG.len()..];
    let end = digits
        .iter()
        .position(|&b| b == b'\n' || b == b'\r')
        .unwrap_or(digits.len());
    let field =
        std::str::from_utf8(&digits[..end]).map_err(|_| ImageError::MalformedHeader("non-ASCII nonce".into()))?;
    if field.len() != 16 || !field.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ImageError::MalformedHeader(format!("bad nonce comment {field:?}")));
    }
    Ok(Some(u64::from_str_radix(field, 16).unwrap()))
}

struct Netpbm<'a> {
    width: usize,
    height: usize,
    raster: &'a [u8],
    nonce: Option<u64>,
}

fn parse_netpbm<'a>(bytes: &'a [u8], magic: &'static str, channels: usize) -> Result<Netpbm<'a>, ImageError> {
    if bytes.len() < 3 || &bytes[..2] != magic.as_bytes() || !bytes[2].is_ascii_whitespace() {
        return Err(ImageError::BadMagic { expected: magic });
    }
    let nonce = nonce_comment(bytes)?;
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(ImageError::BadMaxval(maxval));
    }
    h.raster_separator()?;
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| ImageError::MalformedHeader("dimensions overflow".into()))?;
    let raster = &bytes[h.pos..];
    if raster.len() < needed {
        return Err(ImageError::Truncated {
            needed,
            available: raster.len(),
        });
    }
    Ok(Netpbm {
        width,
        height,
        raster: &raster[..needed],
        nonce,
    })
}

pub fn load_ppm(bytes: &[u8]) -> Result<(RgbImage, Option<u64>), ImageError> {
    let p = parse_netpbm(bytes, "P6", 3)?;
    Ok((RgbImage::new(p.width, p.height, p.raster.to_vec())?, p.nonce))
}

pub fn save_ppm(img: &RgbImage, nonce: Option<u64>) -> Vec<u8> {
    let mut out = b"P6\n".to_vec();
    if let Some(n) = nonce {
        out.extend_from_slice(format!("{NONCE_TAG}{n:016x}\n").as_bytes());
    }
    out.extend_from_slice(format!("{} {}\n255\n", img.width, img.height).as_bytes());
    out.extend_from_slice(&img.data);
    out
}

pub fn load_pgm(bytes: &[u8]) -> Result<GrayPlane, ImageError> {
    let p = parse_netpbm(bytes, "P5", 1)?;
    GrayPlane::new(p.width, p.height, p.raster.to_vec())
}

pub fn save_pgm(plane: &GrayPlane) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", plane.width, plane.height).into_bytes();
    out.extend_from_slice(&plane.samples);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimal() -> Vec<u8> {
        let mut f = b"P6\n2 1\n255\n".to_vec();
        f.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        f
    }

    #[test]
    fn minimal_file() {
        let (img, nonce) = load_ppm(&minimal()).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixel(0, 0), [1, 2, 3]);
        assert_eq!(img.pixel(1, 0), [4, 5, 6]);
        assert_eq!(nonce, None);
        let saved = save_ppm(&img, None);
        // "P6\n" + "2 1\n" + "255\n" is 11 header bytes, plus 6 samples
        assert_eq!(saved.len(), 17);
        assert_eq!(saved, minimal());
    }

    #[test]
    fn nonce_comment_parsed() {
        let mut f = b"P6\n# RDHCTR 00000000000000ff\n2 1\n255\n".to_vec();
        f.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let (img, nonce) = load_ppm(&f).unwrap();
        assert_eq!(nonce, Some(255));
        assert_eq!(img, load_ppm(&minimal()).unwrap().0);
        assert_eq!(save_ppm(&img, Some(255)), f);
    }

    #[test]
    fn other_comments_and_whitespace() {
        let mut f = b"P6 # hello\n  2\t# w\n1 255 ".to_vec();
        f.extend_from_slice(&[9; 6]);
        let (img, nonce) = load_ppm(&f).unwrap();
        assert_eq!(nonce, None);
        assert_eq!(img.pixel(1, 0), [9, 9, 9]);
        // a nonce-looking comment later in the header is just a comment
        let mut f = b"P6\n2 # RDHCTR 00000000000000ff\n1\n255\n".to_vec();
        f.extend_from_slice(&[0; 6]);
        assert_eq!(load_ppm(&f).unwrap().1, None);
    }

    #[test]
    fn raster_starting_with_whitespace_byte() {
        let mut f = b"P6\n1 1\n255\n".to_vec();
        f.extend_from_slice(b"\n #");
        assert_eq!(load_ppm(&f).unwrap().0.pixel(0, 0), [b'\n', b' ', b'#']);
    }

    #[test]
    fn errors() {
        assert_eq!(
            load_ppm(b"P5\n1 1\n255\n\0"),
            Err(ImageError::BadMagic { expected: "P6" })
        );
        assert_eq!(load_ppm(b""), Err(ImageError::BadMagic { expected: "P6" }));
        assert_eq!(load_ppm(b"P6\n1 1\n65535\n"), Err(ImageError::BadMaxval(65535)));
        assert!(matches!(
            load_ppm(b"P6\n2 1\n255\n\x01\x02"),
            Err(ImageError::Truncated {
                needed: 6,
                available: 2
            })
        ));
        assert!(matches!(
            load_ppm(b"P6\nx 1\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_ppm(b"P6\n0 1\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_ppm(b"P6\n99999999999999999999 1\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            load_ppm(b"P6\n# RDHCTR 12\n1 1\n255\n\0\0\0"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(load_ppm(b"P6\n1 1\n255"), Err(ImageError::Truncated { .. })));
    }

    #[test]
    fn planes() {
        let img = RgbImage::filled(3, 2, [7, 8, 9]);
        let red = red_plane(&img);
        assert_eq!(red.samples(), &[7; 6]);
        assert_eq!(set_red_plane(&img, &red).unwrap(), img);
        let bad = GrayPlane::new(2, 3, vec![0; 6]).unwrap();
        assert!(matches!(
            set_red_plane(&img, &bad),
            Err(ImageError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pgm_round_trip() {
        let p = GrayPlane::new(3, 2, vec![0, 1, 2, 253, 254, 255]).unwrap();
        assert_eq!(load_pgm(&save_pgm(&p)).unwrap(), p);
        assert!(matches!(load_pgm(&minimal()), Err(ImageError::BadMagic { .. })));
    }

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), 3 * w * h).prop_map(move |d| RgbImage::new(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn ppm_round_trip(img in arb_image(), nonce in proptest::option::of(any::<u64>())) {
            let bytes = save_ppm(&img, nonce);
            prop_assert_eq!(&bytes, &save_ppm(&img, nonce));
            prop_assert_eq!(load_ppm(&bytes).unwrap(), (img, nonce));
        }

        #[test]
        fn set_red_plane_leaves_green_blue(img in arb_image(), seed in any::<u8>()) {
            let samples: Vec<u8> = (0..img.pixel_count()).map(|i| (i as u8).wrapping_mul(31) ^ seed).collect();
            let plane = GrayPlane::new(img.width(), img.height(), samples).unwrap();
            let out = set_red_plane(&img, &plane).unwrap();
            for (i, (a, b)) in img.as_bytes().iter().zip(out.as_bytes()).enumerate() {
                if i % 3 != 0 {
                    prop_assert_eq!(a, b);
                }
            }
            prop_assert_eq!(red_plane(&out), plane);
        }

        #[test]
        fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = load_ppm(&bytes);
            let mut with_magic = b"P6\n".to_vec();
            with_magic.extend_from_slice(&bytes);
            let _ = load_ppm(&with_magic);
            let _ = load_pgm(&with_magic);
        }
    }
}
