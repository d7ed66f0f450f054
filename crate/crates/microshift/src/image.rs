//! 8-bit image planes and binary PGM (P5) / PPM (P6) i/o.
//!
//! Only maxval-255 binary netpbm files are supported; anything else is a
//! conversion concern for external tooling. The writer emits exactly one
//! whitespace byte after each header token, so written files are
//! byte-reproducible.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// A single row-major 8-bit intensity plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePlane {
    width: u16,
    height: u16,
    samples: Vec<u8>,
}

impl ImagePlane {
    pub fn new(width: u16, height: u16, samples: Vec<u8>) -> Result<Self> {
        let expect = width as usize * height as usize;
        if samples.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "plane is {}x{} but has {} samples",
                width,
                height,
                samples.len()
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams("zero-sized plane".into()));
        }
        Ok(Self { width, height, samples })
    }

    pub fn filled(width: u16, height: u16, value: u8) -> Self {
        Self { width, height, samples: vec![value; width as usize * height as usize] }
    }

    pub fn from_fn(width: u16, height: u16, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut samples = Vec::with_capacity(width as usize * height as usize);
        for r in 0..height as usize {
            for c in 0..width as usize {
                samples.push(f(r, c));
            }
        }
        Self { width, height, samples }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn dims(&self) -> (u16, u16) {
        (self.width, self.height)
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.samples[row * self.width as usize + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.samples.chunks_exact(self.width as usize)
    }
}

/// Whether an image is grayscale or RGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    Gray,
    Rgb,
}

/// A grayscale (1 plane) or RGB (3 planes, R/G/B order) image.
///
/// Color images are processed plane by plane; no color transform is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPlaneImage {
    planes: Vec<ImagePlane>,
}

impl MultiPlaneImage {
    pub fn gray(plane: ImagePlane) -> Self {
        Self { planes: vec![plane] }
    }

    pub fn rgb(r: ImagePlane, g: ImagePlane, b: ImagePlane) -> Result<Self> {
        if r.dims() != g.dims() || g.dims() != b.dims() {
            return Err(Error::DimensionMismatch("rgb planes differ in size".into()));
        }
        Ok(Self { planes: vec![r, g, b] })
    }

    pub fn kind(&self) -> ImageKind {
        if self.planes.len() == 1 {
            ImageKind::Gray
        } else {
            ImageKind::Rgb
        }
    }

    pub fn planes(&self) -> &[ImagePlane] {
        &self.planes
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn dims(&self) -> (u16, u16) {
        self.planes[0].dims()
    }
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    // Next whitespace-delimited token, skipping `#` comments to end of line.
    fn token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.data.len() && self.data[self.pos] == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::BadHeader("unexpected end of header".into()));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self) -> Result<u32> {
        let tok = self.token()?;
        let s = std::str::from_utf8(tok)
            .map_err(|_| Error::BadHeader("non-ascii header token".into()))?;
        s.parse::<u32>()
            .map_err(|_| Error::BadHeader(format!("expected number, found {s:?}")))
    }
}

fn parse_netpbm(data: &[u8]) -> Result<MultiPlaneImage> {
    if data.len() < 2 {
        return Err(Error::BadMagic { expected: "P5 or P6" });
    }
    let channels = match &data[..2] {
        b"P5" => 1usize,
        b"P6" => 3usize,
        _ => return Err(Error::BadMagic { expected: "P5 or P6" }),
    };
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 || width > u16::MAX as u32 || height > u16::MAX as u32 {
        return Err(Error::BadHeader(format!("unsupported dimensions {width}x{height}")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
        return Err(Error::BadHeader("missing whitespace before payload".into()));
    }
    cur.pos += 1;

    let n = width as usize * height as usize;
    let payload = &data[cur.pos..];
    if payload.len() < n * channels {
        return Err(Error::TruncatedPayload { expected: n * channels, found: payload.len() });
    }
    let payload = &payload[..n * channels];

    if channels == 1 {
        Ok(MultiPlaneImage::gray(ImagePlane::new(width as u16, height as u16, payload.to_vec())?))
    } else {
        let mut r = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for px in payload.chunks_exact(3) {
            r.push(px[0]);
            g.push(px[1]);
            b.push(px[2]);
        }
        MultiPlaneImage::rgb(
            ImagePlane::new(width as u16, height as u16, r)?,
            ImagePlane::new(width as u16, height as u16, g)?,
            ImagePlane::new(width as u16, height as u16, b)?,
        )
    }
}

fn encode_netpbm(img: &MultiPlaneImage) -> Vec<u8> {
    let (w, h) = img.dims();
    let magic: &[u8] = match img.kind() {
        ImageKind::Gray => b"P5",
        ImageKind::Rgb => b"P6",
    };
    let mut out = Vec::new();
    out.extend_from_slice(magic);
    out.extend_from_slice(format!("\n{w} {h}\n255\n").as_bytes());
    match img.kind() {
        ImageKind::Gray => out.extend_from_slice(img.planes()[0].samples()),
        ImageKind::Rgb => {
            let [r, g, b] = [&img.planes()[0], &img.planes()[1], &img.planes()[2]];
            for i in 0..w as usize * h as usize {
                out.push(r.samples()[i]);
                out.push(g.samples()[i]);
                out.push(b.samples()[i]);
            }
        }
    }
    out
}

/// Read a binary PGM (P5) or PPM (P6) file with maxval 255.
pub fn read_image(path: impl AsRef<Path>) -> Result<MultiPlaneImage> {
    parse_netpbm(&fs::read(path)?)
}

/// Write `img` as binary PGM (gray) or PPM (rgb).
pub fn write_image(img: &MultiPlaneImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_netpbm(img))?;
    Ok(())
}

/// Parse netpbm data already in memory.
pub fn decode_image_bytes(data: &[u8]) -> Result<MultiPlaneImage> {
    parse_netpbm(data)
}

/// Encode to netpbm bytes without touching the filesystem.
pub fn encode_image_bytes(img: &MultiPlaneImage) -> Vec<u8> {
    encode_netpbm(img)
}
