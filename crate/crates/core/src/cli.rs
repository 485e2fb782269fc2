//! Command-line front end.
//!
//! Every command prints `KEY: VALUE` summary lines on stdout. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | any other failure (I/O, usage) |
//! | 2 | capacity exceeded or cover too small |
//! | 3 | bad magic, CRC, checksum or padding (wrong key or unmarked file) |
//! | 4 | malformed image or video file |
//! | 5 | bad key, nonce or IV encoding |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::aes::AesKey;
use crate::blowfish::BlowfishKey;
use crate::frame::FrameError;
use crate::imagefmt::{load_ppm, red_plane, save_ppm, ImageError};
use crate::metrics::{self, format_psnr, DimensionMismatch};
use crate::stego::{self, carrier_capacity, HideOptions, ImageEncryption, StegoError, StegoKeys};
use crate::video::{self, parse_y4m, write_y4m, Colorspace, Y4mError, Y4mVideo};

/// Header token carrying the keystream nonce of a marked Y4M stream.
const Y4M_NONCE_PREFIX: &str = "XRDHCTR=";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Stego(#[from] StegoError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Video(#[from] Y4mError),
    #[error(transparent)]
    Dimensions(#[from] DimensionMismatch),
    #[error("{0}")]
    Encoding(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Stego(e) => match e.root() {
                StegoError::CoverTooSmall { .. }
                | StegoError::CapacityExceeded { .. }
                | StegoError::NoZeroBin
                | StegoError::PayloadTooLarge(_)
                | StegoError::TooManySegments(_) => 2,
                StegoError::Frame(_)
                | StegoError::BadPadding
                | StegoError::HeaderChecksum
                | StegoError::DamagedCover(_)
                | StegoError::MissingSegment(_) => 3,
                StegoError::VideoFrame { .. } => 1,
            },
            CliError::Image(_) | CliError::Video(_) | CliError::Dimensions(_) => 4,
            CliError::Encoding(_) => 5,
            CliError::Usage(_) | CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rdh",
    version,
    about = "Reversible data hiding in encrypted images and Y4M video"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a payload in a PPM cover
    Hide(HideArgs),
    /// Extract the payload and/or recover the original from a marked PPM
    Reveal(RevealArgs),
    /// Recover the original PPM using only the image key
    RecoverImage(RecoverArgs),
    /// PSNR between two PPM images
    Psnr { a: PathBuf, b: PathBuf },
    /// Hide a payload across the frames of a Y4M video
    VideoHide(HideArgs),
    /// Extract the payload and/or recover the original from a marked Y4M video
    VideoReveal(RevealArgs),
    /// Describe a PPM or Y4M file without modifying it
    Inspect { path: PathBuf },
}

#[derive(Debug, Args)]
struct DataKeyArgs {
    /// AES-128 data key, 32 hex digits
    #[arg(long, conflicts_with = "data_key_file")]
    data_key: Option<String>,
    /// File holding the data key in hex
    #[arg(long)]
    data_key_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImageKeyArgs {
    /// Blowfish image key, 8 to 112 hex digits
    #[arg(long, conflicts_with = "image_key_file")]
    image_key: Option<String>,
    /// File holding the image key in hex
    #[arg(long)]
    image_key_file: Option<PathBuf>,
    /// Keystream nonce, 16 hex digits (default: from the file, else 0)
    #[arg(long)]
    nonce: Option<String>,
    /// Debug mode: leave the carrier unencrypted
    #[arg(long)]
    skip_image_encryption: bool,
}

#[derive(Debug, Args)]
struct HideArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    data_key: DataKeyArgs,
    #[command(flatten)]
    image_key: ImageKeyArgs,
    /// CBC IV, 32 hex digits (default: random)
    #[arg(long)]
    iv: Option<String>,
}

#[derive(Debug, Args)]
struct RevealArgs {
    /// Marked file
    #[arg(long, alias = "marked")]
    input: PathBuf,
    /// Where to write the extracted payload (needs the data key)
    #[arg(long)]
    data_out: Option<PathBuf>,
    /// Where to write the recovered original (needs the image key)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    data_key: DataKeyArgs,
    #[command(flatten)]
    image_key: ImageKeyArgs,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[arg(long, alias = "marked")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    image_key: ImageKeyArgs,
}

fn decode_hex(what: &str, text: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(text.trim()).map_err(|e| CliError::Encoding(format!("{what}: {e}")))
}

fn hex_or_file(what: &str, value: &Option<String>, file: &Option<PathBuf>) -> Result<Option<Vec<u8>>, CliError> {
    match (value, file) {
        (Some(v), _) => decode_hex(what, v).map(Some),
        (None, Some(path)) => {
            let bytes = read_file(path)?;
            let text = String::from_utf8(bytes).map_err(|_| CliError::Encoding(format!("{what}: not text")))?;
            decode_hex(what, &text).map(Some)
        }
        (None, None) => Ok(None),
    }
}

fn parse_data_key(args: &DataKeyArgs) -> Result<Option<AesKey>, CliError> {
    hex_or_file("data key", &args.data_key, &args.data_key_file)?
        .map(|b| AesKey::from_slice(&b).map_err(|_| CliError::Encoding("data key: expected 32 hex digits".into())))
        .transpose()
}

fn parse_image_key(args: &ImageKeyArgs) -> Result<Option<BlowfishKey>, CliError> {
    hex_or_file("image key", &args.image_key, &args.image_key_file)?
        .map(|b| BlowfishKey::new(&b).map_err(|_| CliError::Encoding("image key: expected 8 to 112 hex digits".into())))
        .transpose()
}

fn parse_fixed<const N: usize>(what: &str, text: &str) -> Result<[u8; N], CliError> {
    decode_hex(what, text)?
        .try_into()
        .map_err(|_| CliError::Encoding(format!("{what}: expected {} hex digits", 2 * N)))
}

fn parse_nonce(text: &Option<String>) -> Result<Option<u64>, CliError> {
    text.as_deref()
        .map(|t| parse_fixed::<8>("nonce", t).map(u64::from_be_bytes))
        .transpose()
}

fn encryption(args: &ImageKeyArgs) -> ImageEncryption {
    if args.skip_image_encryption {
        ImageEncryption::Disabled
    } else {
        ImageEncryption::Blowfish
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Output files staged next to their destination and renamed into place
/// only after every output has been written.
struct Staged(Vec<(tempfile::NamedTempFile, PathBuf)>);

impl Staged {
    fn new() -> Self {
        Staged(Vec::new())
    }

    fn add(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        self.0.push((tmp, path.to_path_buf()));
        Ok(())
    }

    fn commit(self) -> Result<(), CliError> {
        for (tmp, path) in self.0 {
            tmp.persist(&path).map_err(|e| CliError::Io { path, source: e.error })?;
        }
        Ok(())
    }
}

fn hide_keys(args: &HideArgs) -> Result<(StegoKeys, HideOptions), CliError> {
    let data_key = require(parse_data_key(&args.data_key)?, "--data-key")?;
    let image_key = require(parse_image_key(&args.image_key)?, "--image-key")?;
    let nonce = parse_nonce(&args.image_key.nonce)?.unwrap_or(0);
    let iv = args.iv.as_deref().map(|t| parse_fixed::<16>("IV", t)).transpose()?;
    Ok((
        StegoKeys {
            data_key,
            image_key,
            nonce,
        },
        HideOptions {
            iv,
            encryption: encryption(&args.image_key),
        },
    ))
}

fn percent(used: usize, total: usize) -> String {
    if total == 0 {
        "0.00%".into()
    } else {
        format!("{:.2}%", 100.0 * used as f64 / total as f64)
    }
}

fn cmd_hide(args: &HideArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (keys, opts) = hide_keys(args)?;
    let (cover, _) = load_ppm(&read_file(&args.cover)?)?;
    let secret = read_file(&args.data)?;
    let res = stego::hide(&cover, &secret, &keys, &opts)?;
    let mut staged = Staged::new();
    staged.add(&args.out, &save_ppm(&res.marked, Some(res.nonce)))?;
    staged.commit()?;
    writeln!(out, "COVER: {}x{}", cover.width(), cover.height()).ok();
    writeln!(out, "PAYLOAD_BYTES: {}", secret.len()).ok();
    writeln!(out, "FRAME_BITS: {}", res.frame_bits).ok();
    writeln!(out, "CAPACITY_BITS: {}", res.capacity_bits).ok();
    writeln!(out, "CAPACITY_USED: {}", percent(res.frame_bits, res.capacity_bits)).ok();
    writeln!(out, "NONCE: {:016x}", res.nonce).ok();
    writeln!(out, "PSNR(plain-marked): {} dB", format_psnr(res.psnr)).ok();
    Ok(())
}

fn cmd_reveal(args: &RevealArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data_key = parse_data_key(&args.data_key)?;
    let image_key = parse_image_key(&args.image_key)?;
    let cli_nonce = parse_nonce(&args.image_key.nonce)?;
    if args.data_out.is_some() && data_key.is_none() {
        return Err(CliError::Usage("--data-out needs a data key".into()));
    }
    if args.out.is_some() && image_key.is_none() {
        return Err(CliError::Usage("--out needs an image key".into()));
    }
    if data_key.is_none() && image_key.is_none() {
        return Err(CliError::Usage("give a data key, an image key, or both".into()));
    }
    let (marked, file_nonce) = load_ppm(&read_file(&args.input)?)?;
    let nonce = cli_nonce.or(file_nonce).unwrap_or(0);

    let mut staged = Staged::new();
    let mut lines = Vec::new();
    if let Some(key) = &data_key {
        let secret = stego::extract_secret(&marked, key)?;
        lines.push(format!("PAYLOAD_BYTES: {}", secret.len()));
        if let Some(p) = &args.data_out {
            staged.add(p, &secret)?;
        }
    }
    if let Some(key) = &image_key {
        let original = stego::recover_original(&marked, key, nonce, encryption(&args.image_key))?;
        lines.push(format!("RECOVERED: {}x{}", original.width(), original.height()));
        lines.push(format!("NONCE: {nonce:016x}"));
        if let Some(p) = &args.out {
            staged.add(p, &save_ppm(&original, None))?;
        }
    }
    staged.commit()?;
    for l in lines {
        writeln!(out, "{l}").ok();
    }
    Ok(())
}

fn cmd_recover(args: &RecoverArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let image_key = require(parse_image_key(&args.image_key)?, "--image-key")?;
    let cli_nonce = parse_nonce(&args.image_key.nonce)?;
    let (marked, file_nonce) = load_ppm(&read_file(&args.input)?)?;
    let nonce = cli_nonce.or(file_nonce).unwrap_or(0);
    let original = stego::recover_original(&marked, &image_key, nonce, encryption(&args.image_key))?;
    let mut staged = Staged::new();
    staged.add(&args.out, &save_ppm(&original, None))?;
    staged.commit()?;
    writeln!(out, "RECOVERED: {}x{}", original.width(), original.height()).ok();
    writeln!(out, "NONCE: {nonce:016x}").ok();
    Ok(())
}

fn cmd_psnr(a: &Path, b: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (ia, _) = load_ppm(&read_file(a)?)?;
    let (ib, _) = load_ppm(&read_file(b)?)?;
    let pair = metrics::ImagePair::new(&ia, &ib)?;
    writeln!(out, "MSE: {:.6}", pair.mse()).ok();
    let db = pair.psnr();
    if db.is_infinite() {
        writeln!(out, "PSNR: inf").ok();
    } else {
        writeln!(out, "PSNR: {} dB", format_psnr(db)).ok();
    }
    Ok(())
}

fn y4m_nonce(video: &Y4mVideo) -> Result<Option<u64>, CliError> {
    video
        .params
        .iter()
        .find_map(|p| p.strip_prefix(Y4M_NONCE_PREFIX))
        .map(|hex| parse_fixed::<8>("stream nonce", hex).map(u64::from_be_bytes))
        .transpose()
}

fn strip_y4m_nonce(video: &mut Y4mVideo) {
    video.params.retain(|p| !p.starts_with(Y4M_NONCE_PREFIX));
}

fn cmd_video_hide(args: &HideArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (keys, opts) = hide_keys(args)?;
    let cover = parse_y4m(&read_file(&args.cover)?)?;
    if y4m_nonce(&cover).is_ok_and(|n| n.is_some()) {
        return Err(CliError::Usage("cover already carries a stream nonce".into()));
    }
    let secret = read_file(&args.data)?;
    let mut res = video::video_hide(&cover, &secret, &keys, &opts)?;
    res.video.params.push(format!("{Y4M_NONCE_PREFIX}{:016x}", res.nonce));
    let mut staged = Staged::new();
    staged.add(&args.out, &write_y4m(&res.video))?;
    staged.commit()?;
    let used: usize = res.frame_bits.iter().sum();
    let total: usize = res.capacity_bits.iter().sum();
    writeln!(out, "FRAMES: {}", cover.frames.len()).ok();
    writeln!(out, "SEGMENTS: {}", res.segments_used).ok();
    writeln!(out, "PAYLOAD_BYTES: {}", secret.len()).ok();
    writeln!(out, "FRAME_BITS: {used}").ok();
    writeln!(out, "CAPACITY_BITS: {total}").ok();
    writeln!(out, "CAPACITY_USED: {}", percent(used, total)).ok();
    writeln!(out, "NONCE: {:016x}", res.nonce).ok();
    Ok(())
}

fn cmd_video_reveal(args: &RevealArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data_key = parse_data_key(&args.data_key)?;
    let image_key = parse_image_key(&args.image_key)?;
    let cli_nonce = parse_nonce(&args.image_key.nonce)?;
    if args.data_out.is_some() && data_key.is_none() {
        return Err(CliError::Usage("--data-out needs a data key".into()));
    }
    if args.out.is_some() && image_key.is_none() {
        return Err(CliError::Usage("--out needs an image key".into()));
    }
    if data_key.is_none() && image_key.is_none() {
        return Err(CliError::Usage("give a data key, an image key, or both".into()));
    }
    let mut marked = parse_y4m(&read_file(&args.input)?)?;
    let nonce = cli_nonce.or(y4m_nonce(&marked)?).unwrap_or(0);
    strip_y4m_nonce(&mut marked);

    let mut staged = Staged::new();
    let mut lines = Vec::new();
    if let Some(key) = &data_key {
        let secret = video::video_extract_secret(&marked, key)?;
        lines.push(format!("PAYLOAD_BYTES: {}", secret.len()));
        if let Some(p) = &args.data_out {
            staged.add(p, &secret)?;
        }
    }
    if let Some(key) = &image_key {
        let original = video::video_recover(&marked, key, nonce, encryption(&args.image_key))?;
        lines.push(format!("FRAMES: {}", original.frames.len()));
        lines.push(format!("NONCE: {nonce:016x}"));
        if let Some(p) = &args.out {
            staged.add(p, &write_y4m(&original))?;
        }
    }
    staged.commit()?;
    for l in lines {
        writeln!(out, "{l}").ok();
    }
    Ok(())
}

fn frame_summary(res: Result<crate::frame::PayloadFrame, FrameError>) -> String {
    match res {
        Ok(f) => format!(
            "segment {}/{}, {} ciphertext bytes",
            f.segment_index,
            f.segment_count,
            f.ciphertext.len()
        ),
        Err(e) => format!("none ({e})"),
    }
}

fn cmd_inspect(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let bytes = read_file(path)?;
    if bytes.starts_with(b"YUV4MPEG2") {
        let v = parse_y4m(&bytes)?;
        writeln!(out, "FORMAT: y4m").ok();
        writeln!(out, "SIZE: {}x{}", v.width, v.height).ok();
        let cs = match v.colorspace {
            Colorspace::C420 => "420",
            Colorspace::C444 => "444",
        };
        writeln!(out, "COLORSPACE: {cs}").ok();
        writeln!(out, "FRAME_RATE: {}:{}", v.frame_rate.num, v.frame_rate.den).ok();
        writeln!(out, "FRAMES: {}", v.frames.len()).ok();
        if let Some(n) = y4m_nonce(&v)? {
            writeln!(out, "NONCE: {n:016x}").ok();
        }
        for (i, f) in v.frames.iter().enumerate() {
            let frame = crate::frame::read_frame_lsbs(f.y.samples());
            writeln!(out, "FRAME_{i}: {}", frame_summary(frame)).ok();
            writeln!(out, "CAPACITY_BITS_{i}: {}", carrier_capacity(f.y.samples())).ok();
        }
    } else {
        let (img, nonce) = load_ppm(&bytes)?;
        writeln!(out, "FORMAT: ppm").ok();
        writeln!(out, "SIZE: {}x{}", img.width(), img.height()).ok();
        if let Some(n) = nonce {
            writeln!(out, "NONCE: {n:016x}").ok();
        }
        let red = red_plane(&img);
        let frame = crate::frame::read_frame_lsbs(red.samples());
        writeln!(out, "PAYLOAD_FRAME: {}", frame_summary(frame)).ok();
        writeln!(out, "CAPACITY_BITS: {}", carrier_capacity(red.samples())).ok();
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Hide(a) => cmd_hide(a, out),
        Command::Reveal(a) => cmd_reveal(a, out),
        Command::RecoverImage(a) => cmd_recover(a, out),
        Command::Psnr { a, b } => cmd_psnr(a, b, out),
        Command::VideoHide(a) => cmd_video_hide(a, out),
        Command::VideoReveal(a) => cmd_video_reveal(a, out),
        Command::Inspect { path } => cmd_inspect(path, out),
    }
}

/// Parses `args` (including the program name) and runs one command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            e.print().ok();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match dispatch(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cap = CliError::Stego(StegoError::CapacityExceeded {
            needed: 1,
            available: 0,
        });
        assert_eq!(cap.exit_code(), 2);
        let wrapped = CliError::Stego(StegoError::VideoFrame {
            index: 3,
            source: Box::new(StegoError::HeaderChecksum),
        });
        assert_eq!(wrapped.exit_code(), 3);
        assert_eq!(CliError::Stego(StegoError::Frame(FrameError::BadMagic)).exit_code(), 3);
        assert_eq!(CliError::Image(ImageError::BadMaxval(7)).exit_code(), 4);
        assert_eq!(CliError::Encoding("x".into()).exit_code(), 5);
    }

    #[test]
    fn key_parsing() {
        let ok = DataKeyArgs {
            data_key: Some("000102030405060708090a0b0c0d0e0f".into()),
            data_key_file: None,
        };
        assert_eq!(parse_data_key(&ok).unwrap().unwrap().0[15], 15);
        let short = DataKeyArgs {
            data_key: Some("0001".into()),
            data_key_file: None,
        };
        assert_eq!(parse_data_key(&short).unwrap_err().exit_code(), 5);
        let img = |s: &str| ImageKeyArgs {
            image_key: Some(s.into()),
            image_key_file: None,
            nonce: None,
            skip_image_encryption: false,
        };
        assert!(parse_image_key(&img("0011223344556677")).is_ok());
        assert_eq!(parse_image_key(&img("001122")).unwrap_err().exit_code(), 5);
        assert_eq!(parse_image_key(&img("00112233x")).unwrap_err().exit_code(), 5);
        assert_eq!(parse_image_key(&img(&"ab".repeat(57))).unwrap_err().exit_code(), 5);
        assert_eq!(parse_nonce(&Some("0000000000000102".into())).unwrap(), Some(258));
        assert_eq!(parse_nonce(&Some("01".into())).unwrap_err().exit_code(), 5);
    }
}
