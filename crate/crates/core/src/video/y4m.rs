//! YUV4MPEG2 reader and writer.
//!
//! Header parameters and per-frame parameters are kept verbatim so that a
//! parse/write cycle is byte-identical. Only 8-bit 4:2:0 and 4:4:4 streams
//! are accepted.

use thiserror::Error;

use crate::imagefmt::GrayPlane;

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Y4mError {
    #[error("missing YUV4MPEG2 signature")]
    BadSignature,
    #[error("unsupported colorspace: {0}")]
    UnsupportedColorspace(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("frame {index} truncated")]
    TruncatedFrame { index: usize },
    #[error("frame {index}: {reason}")]
    BadFrame { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colorspace {
    C420,
    C444,
}

impl Colorspace {
    fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "420" | "420jpeg" | "420paldv" | "420mpeg2" => Some(Colorspace::C420),
            "444" => Some(Colorspace::C444),
            _ => None,
        }
    }

    /// Chroma plane dimensions for a luma plane of `w` x `h`.
    pub fn chroma_dims(self, w: usize, h: usize) -> (usize, usize) {
        match self {
            Colorspace::C420 => (w / 2, h / 2),
            Colorspace::C444 => (w, h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YuvFrame {
    pub y: GrayPlane,
    pub u: GrayPlane,
    pub v: GrayPlane,
    /// Everything between `FRAME` and the newline, verbatim.
    pub params: String,
}

impl YuvFrame {
    /// Y, U and V bytes back to back, as stored in the stream.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.y.len() + self.u.len() + self.v.len());
        out.extend_from_slice(self.y.samples());
        out.extend_from_slice(self.u.samples());
        out.extend_from_slice(self.v.samples());
        out
    }

    pub fn copy_from_bytes(&mut self, bytes: &[u8]) {
        let (y, rest) = bytes.split_at(self.y.len());
        let (u, v) = rest.split_at(self.u.len());
        self.y.samples_mut().copy_from_slice(y);
        self.u.samples_mut().copy_from_slice(u);
        self.v.samples_mut().copy_from_slice(v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Y4mVideo {
    pub width: usize,
    pub height: usize,
    pub frame_rate: FrameRate,
    pub colorspace: Colorspace,
    /// Header tokens after the signature, verbatim (including W, H, F, C).
    pub params: Vec<String>,
    pub frames: Vec<YuvFrame>,
}

impl Y4mVideo {
    /// A stream with the canonical header `W H F C` for the given geometry.
    pub fn new(width: usize, height: usize, frame_rate: FrameRate, colorspace: Colorspace) -> Result<Self, Y4mError> {
        let c = match colorspace {
            Colorspace::C420 => "C420jpeg",
            Colorspace::C444 => "C444",
        };
        let header = format!("W{width} H{height} F{}:{} {c}", frame_rate.num, frame_rate.den);
        let params: Vec<String> = header.split(' ').map(str::to_string).collect();
        check_geometry(width, height, colorspace)?;
        Ok(Y4mVideo {
            width,
            height,
            frame_rate,
            colorspace,
            params,
            frames: Vec::new(),
        })
    }

    pub fn blank_frame(&self) -> YuvFrame {
        let (cw, ch) = self.colorspace.chroma_dims(self.width, self.height);
        YuvFrame {
            y: GrayPlane::new(self.width, self.height, vec![0; self.width * self.height]).unwrap(),
            u: GrayPlane::new(cw, ch, vec![128; cw * ch]).unwrap(),
            v: GrayPlane::new(cw, ch, vec![128; cw * ch]).unwrap(),
            params: String::new(),
        }
    }

    pub fn frame_len(&self) -> usize {
        let (cw, ch) = self.colorspace.chroma_dims(self.width, self.height);
        self.width * self.height + 2 * cw * ch
    }
}

fn check_geometry(width: usize, height: usize, cs: Colorspace) -> Result<(), Y4mError> {
    if width == 0 || height == 0 {
        return Err(Y4mError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if cs == Colorspace::C420 && (!width.is_multiple_of(2) || !height.is_multiple_of(2)) {
        return Err(Y4mError::UnsupportedColorspace(format!(
            "4:2:0 needs even dimensions, got {width}x{height}"
        )));
    }
    Ok(())
}

fn parse_dim(tok: &str, what: &str) -> Result<usize, Y4mError> {
    tok.parse()
        .map_err(|_| Y4mError::MalformedHeader(format!("bad {what} {tok:?}")))
}

pub fn parse_y4m(bytes: &[u8]) -> Result<Y4mVideo, Y4mError> {
    if !bytes.starts_with(SIGNATURE) {
        return Err(Y4mError::BadSignature);
    }
    let eol = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Y4mError::MalformedHeader("unterminated header".into()))?;
    let line = std::str::from_utf8(&bytes[SIGNATURE.len()..eol])
        .map_err(|_| Y4mError::MalformedHeader("non-UTF-8 header".into()))?;
    if !line.is_empty() && !line.starts_with(' ') {
        return Err(Y4mError::BadSignature);
    }
    let params: Vec<String> = line.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect();

    let (mut width, mut height, mut rate) = (None, None, None);
    let mut colorspace = Colorspace::C420;
    for p in &params {
        let (tag, val) = p.split_at(1);
        match tag {
            "W" => width = Some(parse_dim(val, "width")?),
            "H" => height = Some(parse_dim(val, "height")?),
            "F" => {
                let (n, d) = val
                    .split_once(':')
                    .ok_or_else(|| Y4mError::MalformedHeader(format!("bad frame rate {val:?}")))?;
                rate = Some(FrameRate {
                    num: parse_dim(n, "frame rate")? as u32,
                    den: parse_dim(d, "frame rate")? as u32,
                });
            }
            "C" => {
                colorspace =
                    Colorspace::from_token(val).ok_or_else(|| Y4mError::UnsupportedColorspace(val.to_string()))?
            }
            _ => {}
        }
    }
    let width = width.ok_or_else(|| Y4mError::MalformedHeader("missing W".into()))?;
    let height = height.ok_or_else(|| Y4mError::MalformedHeader("missing H".into()))?;
    let frame_rate = rate.ok_or_else(|| Y4mError::MalformedHeader("missing F".into()))?;
    check_geometry(width, height, colorspace)?;

    let mut video = Y4mVideo {
        width,
        height,
        frame_rate,
        colorspace,
        params,
        frames: Vec::new(),
    };
    let frame_len = video.frame_len();
    let (cw, ch) = colorspace.chroma_dims(width, height);

    let mut pos = eol + 1;
    while pos < bytes.len() {
        let index = video.frames.len();
        let rest = &bytes[pos..];
        if !rest.starts_with(FRAME_TAG) {
            return Err(Y4mError::BadFrame {
                index,
                reason: "missing FRAME marker".into(),
            });
        }
        let eol = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(Y4mError::TruncatedFrame { index })?;
        let params = std::str::from_utf8(&rest[FRAME_TAG.len()..eol])
            .map_err(|_| Y4mError::BadFrame {
                index,
                reason: "non-UTF-8 frame header".into(),
            })?
            .to_string();
        if !params.is_empty() && !params.starts_with(' ') {
            return Err(Y4mError::BadFrame {
                index,
                reason: "garbage after FRAME".into(),
            });
        }
        let data = &rest[eol + 1..];
        if data.len() < frame_len {
            return Err(Y4mError::TruncatedFrame { index });
        }
        let y_len = width * height;
        let c_len = cw * ch;
        video.frames.push(YuvFrame {
            y: GrayPlane::new(width, height, data[..y_len].to_vec()).unwrap(),
            u: GrayPlane::new(cw, ch, data[y_len..y_len + c_len].to_vec()).unwrap(),
            v: GrayPlane::new(cw, ch, data[y_len + c_len..frame_len].to_vec()).unwrap(),
            params,
        });
        pos += eol + 1 + frame_len;
    }
    Ok(video)
}

pub fn write_y4m(video: &Y4mVideo) -> Vec<u8> {
    let mut out = SIGNATURE.to_vec();
    for p in &video.params {
        out.push(b' ');
        out.extend_from_slice(p.as_bytes());
    }
    out.push(b'\n');
    for f in &video.frames {
        out.extend_from_slice(FRAME_TAG);
        out.extend_from_slice(f.params.as_bytes());
        out.push(b'\n');
        out.extend_from_slice(&f.to_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_stream() {
        let mut s = b"YUV4MPEG2 W2 H2 F25:1 C444\nFRAME\n".to_vec();
        s.extend(0..12u8);
        let v = parse_y4m(&s).unwrap();
        assert_eq!(v.frames.len(), 1);
        assert_eq!((v.width, v.height), (2, 2));
        assert_eq!(v.frame_rate, FrameRate { num: 25, den: 1 });
        assert_eq!(v.colorspace, Colorspace::C444);
        assert_eq!(v.frames[0].y.samples(), &[0, 1, 2, 3]);
        assert_eq!(v.frames[0].v.samples(), &[8, 9, 10, 11]);
        assert_eq!(write_y4m(&v), s);
    }

    #[test]
    fn unknown_parameters_preserved() {
        let mut s = b"YUV4MPEG2 W4 H2 F30000:1001 Ip A1:1 C420mpeg2 XYSCSS=420MPEG2 XCOLORRANGE=FULL\n".to_vec();
        for i in 0..2u8 {
            s.extend_from_slice(b"FRAME Ixyz\n");
            s.extend(std::iter::repeat_n(i, 12));
        }
        let v = parse_y4m(&s).unwrap();
        assert_eq!(v.colorspace, Colorspace::C420);
        assert_eq!(v.frames.len(), 2);
        assert_eq!(v.frames[1].params, " Ixyz");
        assert_eq!(v.frames[0].u.len(), 2);
        assert_eq!(write_y4m(&v), s);
    }

    #[test]
    fn default_colorspace_is_420() {
        let mut s = b"YUV4MPEG2 W2 H2 F1:1\nFRAME\n".to_vec();
        s.extend([0; 6]);
        assert_eq!(parse_y4m(&s).unwrap().colorspace, Colorspace::C420);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_y4m(b"YUV4MPEG W2 H2 F1:1\n"), Err(Y4mError::BadSignature));
        assert_eq!(parse_y4m(b"YUV4MPEG2X W2 H2 F1:1\n"), Err(Y4mError::BadSignature));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W3 H2 F1:1 C420\n"),
            Err(Y4mError::UnsupportedColorspace(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1:1 C422\n"),
            Err(Y4mError::UnsupportedColorspace(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1:1 C444p10\n"),
            Err(Y4mError::UnsupportedColorspace(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 H2 F1:1\n"),
            Err(Y4mError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1\n"),
            Err(Y4mError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1:1"),
            Err(Y4mError::MalformedHeader(_))
        ));
        assert_eq!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1:1 C444\nFRAME\n\0\0\0"),
            Err(Y4mError::TruncatedFrame { index: 0 })
        );
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F1:1 C444\nFRAMX\n"),
            Err(Y4mError::BadFrame { index: 0, .. })
        ));
    }

    #[test]
    fn zero_frames() {
        let v = parse_y4m(b"YUV4MPEG2 W2 H2 F1:1\n").unwrap();
        assert!(v.frames.is_empty());
        assert_eq!(write_y4m(&v), b"YUV4MPEG2 W2 H2 F1:1\n");
    }

    #[test]
    fn constructed_video_round_trips() {
        let mut v = Y4mVideo::new(4, 4, FrameRate { num: 24, den: 1 }, Colorspace::C420).unwrap();
        let mut f = v.blank_frame();
        f.y.samples_mut()[3] = 77;
        v.frames.push(f);
        assert_eq!(parse_y4m(&write_y4m(&v)).unwrap(), v);
        assert!(Y4mVideo::new(3, 4, FrameRate { num: 24, den: 1 }, Colorspace::C420).is_err());
    }
}
