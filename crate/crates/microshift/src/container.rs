//! Compressed container: a fixed little-endian header followed by, per
//! plane, N^2 length-prefixed subimage bitstreams in subimage order. The
//! strict subimage ordering is what makes prefix (progressive) decoding
//! possible.

use crate::quant::CodecParams;
use crate::{Error, Result};

pub const CONTAINER_MAGIC: &[u8; 4] = b"MSH1";
pub const CONTAINER_VERSION: u8 = 1;
/// magic + version + M + N + planes + width + height + table crc + reserved
pub const HEADER_LEN: usize = 4 + 1 + 1 + 1 + 1 + 2 + 2 + 4 + 3;

/// An encoded image: header fields plus one padded bitstream per
/// (plane, subimage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedContainer {
    pub m: u8,
    pub n: u8,
    pub width: u16,
    pub height: u16,
    pub table_crc: u32,
    /// `streams[plane][j - 1]` is subimage `j`'s bitstream.
    pub streams: Vec<Vec<Vec<u8>>>,
}

impl CompressedContainer {
    pub fn planes(&self) -> usize {
        self.streams.len()
    }

    pub fn params(&self) -> Result<CodecParams> {
        CodecParams::new(self.m, self.n)
    }

    /// Total payload bytes across all streams (excluding header and
    /// length prefixes).
    pub fn payload_bytes(&self) -> usize {
        self.streams.iter().flatten().map(Vec::len).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload_bytes());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.push(CONTAINER_VERSION);
        out.push(self.m);
        out.push(self.n);
        out.push(self.streams.len() as u8);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.table_crc.to_le_bytes());
        out.extend_from_slice(&[0, 0, 0]);
        for plane in &self.streams {
            for stream in plane {
                out.extend_from_slice(&(stream.len() as u32).to_le_bytes());
                out.extend_from_slice(stream);
            }
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 4 || &data[..4] != CONTAINER_MAGIC {
            return Err(Error::BadMagic { expected: "MSH1" });
        }
        if data.len() < HEADER_LEN {
            return Err(Error::BadContainer("header truncated".into()));
        }
        if data[4] != CONTAINER_VERSION {
            return Err(Error::BadContainer(format!("unsupported version {}", data[4])));
        }
        let m = data[5];
        let n = data[6];
        let planes = data[7] as usize;
        if planes != 1 && planes != 3 {
            return Err(Error::BadContainer(format!("plane count {planes} not in {{1, 3}}")));
        }
        let width = u16::from_le_bytes([data[8], data[9]]);
        let height = u16::from_le_bytes([data[10], data[11]]);
        if width == 0 || height == 0 {
            return Err(Error::BadContainer("zero dimensions".into()));
        }
        let table_crc = u32::from_le_bytes([data[12], data[13], data[14], data[15]]);
        // Validates M and N ranges.
        CodecParams::new(m, n)?;
        let subimages = n as usize * n as usize;

        let mut pos = HEADER_LEN;
        let mut streams = Vec::with_capacity(planes);
        for _ in 0..planes {
            let mut plane = Vec::with_capacity(subimages);
            for _ in 0..subimages {
                if pos + 4 > data.len() {
                    return Err(Error::BadContainer("stream table truncated".into()));
                }
                let len =
                    u32::from_le_bytes([data[pos], data[pos + 1], data[pos + 2], data[pos + 3]])
                        as usize;
                pos += 4;
                if pos + len > data.len() {
                    return Err(Error::TruncatedPayload {
                        expected: len,
                        found: data.len() - pos,
                    });
                }
                plane.push(data[pos..pos + len].to_vec());
                pos += len;
            }
            streams.push(plane);
        }
        if pos != data.len() {
            return Err(Error::BadContainer(format!("{} trailing bytes", data.len() - pos)));
        }
        Ok(Self { m, n, width, height, table_crc, streams })
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
