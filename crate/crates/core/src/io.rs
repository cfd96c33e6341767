//! Signal CSV, binary PGM/PPM, raw float planes and the super-resolution payload container.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::base::{Image, Plane};
use crate::error::{Error, Result};
use crate::multires::Basis;
use crate::superres::{Media, SrPayload, Version};

/// Writes via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(Error::from)
}

pub fn format_csv(samples: &[f64]) -> String {
    let mut out = String::with_capacity(samples.len() * 20);
    for v in samples {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("not a number: {t:?}") })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_csv(path: &Path, samples: &[f64]) -> Result<()> {
    write_atomic(path, format_csv(samples).as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Vec<f64>> {
    parse_csv(&fs::read_to_string(path)?)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))
    }
}

/// Decodes binary P5 (gray) or P6 (RGB) with maxval 255.
pub fn decode_netpbm(bytes: &[u8]) -> Result<Image> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::MalformedHeader("expected P5 or P6".into())),
    };
    let mut h = Header { bytes, pos: 2 };
    let cols = h.number("width")? as usize;
    let rows = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::MalformedHeader("no whitespace after maxval".into())),
    }
    let expected = rows * cols * channels;
    let data = &bytes[h.pos..];
    if data.len() < expected {
        return Err(Error::ShortFile { expected, found: data.len() });
    }
    let planes = (0..channels)
        .map(|c| Plane::from_fn(rows, cols, |r, k| data[(r * cols + k) * channels + c] as f64))
        .collect();
    Image::new(planes)
}

/// Rounds and clamps to 0..=255.
pub fn encode_netpbm(img: &Image) -> Vec<u8> {
    let ch = img.channels();
    let magic = if ch == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.reserve(img.rows() * img.cols() * ch);
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            for p in img.planes() {
                out.push(p.get(r, c).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

pub fn read_image(path: &Path) -> Result<Image> {
    decode_netpbm(&fs::read(path)?)
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    write_atomic(path, &encode_netpbm(img))
}

/// Linear min-max mapping to 0..=255; a constant plane maps to 0.
pub fn render_8bit(p: &Plane) -> Plane {
    let (lo, hi) = (p.min(), p.max());
    if hi - lo <= 0.0 || !(hi - lo).is_finite() {
        return Plane::zeros(p.rows(), p.cols());
    }
    p.map(|v| (v - lo) / (hi - lo) * 255.0)
}

pub fn encode_raw_f32(p: &Plane) -> Vec<u8> {
    p.data().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

pub fn decode_raw_f32(bytes: &[u8], rows: usize, cols: usize) -> Result<Plane> {
    let expected = rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::ShortFile { expected, found: bytes.len() });
    }
    let data = bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64).collect();
    Plane::new(rows, cols, data)
}

pub fn write_raw_f32(path: &Path, p: &Plane) -> Result<()> {
    write_atomic(path, &encode_raw_f32(p))
}

pub fn read_raw_f32(path: &Path, rows: usize, cols: usize) -> Result<Plane> {
    decode_raw_f32(&fs::read(path)?, rows, cols)
}

pub const MAGIC: &[u8; 6] = b"FITSR1";
const FIXED_HEADER: usize = 6 + 4 + 8 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

pub fn encode_container(p: &SrPayload, precision: Precision) -> Result<Vec<u8>> {
    let channels = u8::try_from(p.channels()).map_err(|_| Error::InvalidParameter("too many channels".into()))?;
    let nscalars = u8::try_from(p.scalars.len()).map_err(|_| Error::InvalidParameter("too many scalars".into()))?;
    let dim = |d: usize| u32::try_from(d).map_err(|_| Error::InvalidParameter(format!("dimension {d} too large")));
    let mut out = Vec::with_capacity(FIXED_HEADER + 8 * p.scalars.len() + 8 * p.payload_samples());
    out.extend_from_slice(MAGIC);
    out.push(p.version.id());
    out.push(match p.basis {
        Basis::Haar => 0,
        Basis::Coslet => 1,
    });
    out.push(match p.media {
        Media::Signal => 0,
        Media::Image => 1,
    });
    out.push(channels);
    out.extend_from_slice(&dim(p.dims.0)?.to_le_bytes());
    out.extend_from_slice(&dim(p.dims.1)?.to_le_bytes());
    out.push(nscalars);
    for s in &p.scalars {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for ch in &p.ll {
        for &v in ch {
            match precision {
                Precision::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Precision::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    Ok(out)
}

/// Parses a container; the sample precision follows from the payload length.
pub fn decode_container(bytes: &[u8]) -> Result<(SrPayload, Precision)> {
    if bytes.len() < MAGIC.len() || &bytes[..6] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < FIXED_HEADER {
        return Err(Error::ShortFile { expected: FIXED_HEADER, found: bytes.len() });
    }
    let version = Version::from_id(bytes[6]).map_err(|_| Error::MalformedHeader(format!("version {}", bytes[6])))?;
    let basis = match bytes[7] {
        0 => Basis::Haar,
        1 => Basis::Coslet,
        b => return Err(Error::MalformedHeader(format!("basis {b}"))),
    };
    let media = match bytes[8] {
        0 => Media::Signal,
        1 => Media::Image,
        b => return Err(Error::MalformedHeader(format!("media {b}"))),
    };
    let channels = bytes[9] as usize;
    let rows = u32::from_le_bytes(bytes[10..14].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[14..18].try_into().expect("4 bytes")) as usize;
    let nscalars = bytes[18] as usize;
    let ok_dims = match media {
        Media::Signal => cols == 1 && rows >= 2 && rows.is_multiple_of(2) && channels == 1,
        Media::Image => rows >= 2 && cols >= 2 && rows.is_multiple_of(2) && cols.is_multiple_of(2) && (channels == 1 || channels == 3),
    };
    if !ok_dims {
        return Err(Error::MalformedHeader(format!("{channels} channel(s) of {rows}x{cols}")));
    }
    let scalar_end = FIXED_HEADER + 8 * nscalars;
    if bytes.len() < scalar_end {
        return Err(Error::ShortFile { expected: scalar_end, found: bytes.len() });
    }
    let scalars = bytes[FIXED_HEADER..scalar_end]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    let per_channel = match media {
        Media::Signal => rows / 2,
        Media::Image => (rows / 2) * (cols / 2),
    };
    let count = per_channel * channels;
    let rest = &bytes[scalar_end..];
    let precision = if rest.len() == 4 * count {
        Precision::F32
    } else if rest.len() == 8 * count {
        Precision::F64
    } else if rest.len() < 4 * count {
        return Err(Error::ShortFile { expected: 4 * count, found: rest.len() });
    } else {
        return Err(Error::MalformedHeader(format!("{} payload bytes for {count} samples", rest.len())));
    };
    let values: Vec<f64> = match precision {
        Precision::F32 => rest.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64).collect(),
        Precision::F64 => rest.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect(),
    };
    let ll = values.chunks(per_channel).map(<[f64]>::to_vec).collect();
    Ok((SrPayload { basis, version, media, dims: (rows, cols), ll, scalars }, precision))
}

pub fn write_container(path: &Path, p: &SrPayload, precision: Precision) -> Result<()> {
    write_atomic(path, &encode_container(p, precision)?)
}

pub fn read_container(path: &Path) -> Result<(SrPayload, Precision)> {
    decode_container(&fs::read(path)?)
}
