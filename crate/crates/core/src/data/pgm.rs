//! Binary PGM (P5) images.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pgm {
    /// Samples scaled to `[0, 1]`.
    pub fn to_unit(&self) -> Vec<f64> {
        let max = f64::from(self.maxval);
        self.samples.iter().map(|&s| f64::from(s) / max).collect()
    }
}

/// 8-bit P5 encoding.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if width == 0 || height == 0 || pixels.len() != width * height {
        return Err(Error::format(
            "pgm",
            format!("{} pixels for a {width}×{height} image", pixels.len()),
        ));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format("pgm", format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("pgm", format!("{what} out of range")))
    }
}

/// Parses a P5 image with 8- or 16-bit (big-endian) samples.
pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::format("pgm", "missing P5 magic"));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format("pgm", "zero image extent"));
    }
    if maxval == 0 || maxval > usize::from(u16::MAX) {
        return Err(Error::format("pgm", format!("maxval {maxval} not in 1..=65535")));
    }
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format("pgm", "missing whitespace after header"));
    }
    let body = &bytes[h.pos + 1..];
    let depth = if maxval < 256 { 1 } else { 2 };
    let count = width
        .checked_mul(height)
        .filter(|n| n.checked_mul(depth).is_some_and(|b| b <= body.len()))
        .ok_or_else(|| Error::format("pgm", "pixel data truncated"))?;
    let samples: Vec<u16> = if depth == 1 {
        body[..count].iter().map(|&b| u16::from(b)).collect()
    } else {
        body[..2 * count]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some(&s) = samples.iter().find(|&&s| usize::from(s) > maxval) {
        return Err(Error::format("pgm", format!("sample {s} exceeds maxval {maxval}")));
    }
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}
