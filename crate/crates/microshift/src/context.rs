//! Context modeling for subimage coding: the five-pixel causal template,
//! texture quantization into 313 sign-merged contexts, the learned
//! predictor table with its file format, and the cross-subimage predictor.

use crate::image::ImagePlane;
use crate::quant::{heuristic_estimate, microshift_quantize, CodecParams};
use crate::{Error, Result};

/// Number of merged texture contexts: (5^4 - 1) / 2 + 1.
pub const CONTEXT_COUNT: usize = 313;
/// Texture bucket clamp `T`.
pub const TEXTURE_CLAMP: i32 = 2;

const TABLE_MAGIC: &[u8; 4] = b"MSHD";
const TABLE_VERSION: u8 = 1;

/// Resolved causal template of a subimage pixel `X`. In subimage
/// coordinates: `A` left, `B` above, `C` above-left, `D` above-right,
/// `E` left-left; all within two subimage pixels of `X` and within the
/// current or previous subimage row, so a raster-scan encoder never needs
/// more than one subimage row of history.
///
/// Missing neighbors are substituted before construction: neighbors missing
/// because there is no subimage row above take the value of `A`; neighbors
/// missing on the left (or right, for `D`) take the value of `B`; the first
/// pixel of a subimage sees the mid level everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalTemplate {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub d: u8,
    pub e: u8,
    /// True only for the subimage's first pixel (no causal neighbors).
    pub first: bool,
}

/// Build the template for the pixel at image position (`row`, `col`);
/// `level_at` must resolve already-coded levels at image coordinates.
/// Template neighbors live `n` image pixels apart (one subimage step).
pub fn subimage_template(
    level_at: &impl Fn(usize, usize) -> u8,
    width: usize,
    row: usize,
    col: usize,
    params: &CodecParams,
) -> CausalTemplate {
    let n = params.n();
    let mid = 1u8 << (params.m() - 1);
    let has_up = row >= n;
    let has_left = col >= n;
    if !has_up && !has_left {
        return CausalTemplate { a: mid, b: mid, c: mid, d: mid, e: mid, first: true };
    }
    if !has_up {
        let a = level_at(row, col - n);
        let e = if col >= 2 * n { level_at(row, col - 2 * n) } else { a };
        return CausalTemplate { a, b: a, c: a, d: a, e, first: false };
    }
    if !has_left {
        let b = level_at(row - n, col);
        let d = if col + n < width { level_at(row - n, col + n) } else { b };
        return CausalTemplate { a: b, b, c: b, d, e: b, first: false };
    }
    let a = level_at(row, col - n);
    let b = level_at(row - n, col);
    let c = level_at(row - n, col - n);
    let d = if col + n < width { level_at(row - n, col + n) } else { b };
    let e = if col >= 2 * n { level_at(row, col - 2 * n) } else { b };
    CausalTemplate { a, b, c, d, e, first: false }
}

/// Texture vector `(A-C, C-B, D-A, B-E)` in level-index units.
#[inline]
pub fn texture_vector(t: &CausalTemplate) -> [i32; 4] {
    let (a, b, c, d, e) = (t.a as i32, t.b as i32, t.c as i32, t.d as i32, t.e as i32);
    [a - c, c - b, d - a, b - e]
}

/// A merged context: the canonical index in `[0, 312]` plus the sign that
/// maps the observed texture onto its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextId {
    pub index: u16,
    pub sign: i8,
}

/// Quantize a texture vector into its merged context. Buckets are the
/// clamp of each component to `[-T, T]`; a vector whose first nonzero
/// bucket is negative is negated and carries sign -1.
pub fn context_id(v: [i32; 4]) -> ContextId {
    let mut b = [0i32; 4];
    for i in 0..4 {
        b[i] = v[i].clamp(-TEXTURE_CLAMP, TEXTURE_CLAMP);
    }
    let sign = match b.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => -1i8,
        _ => 1i8,
    };
    if sign < 0 {
        for x in &mut b {
            *x = -*x;
        }
    }
    let raw = (((b[0] + 2) * 5 + (b[1] + 2)) * 5 + (b[2] + 2)) * 5 + (b[3] + 2);
    debug_assert!((312..=624).contains(&raw));
    ContextId { index: (raw - 312) as u16, sign }
}

/// The learned most-probable `X - B` per canonical context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictorTable {
    m: u8,
    entries: Vec<i8>,
}

impl PredictorTable {
    pub fn new(m: u8, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != CONTEXT_COUNT {
            return Err(Error::BadTable(format!("expected 313 entries, got {}", entries.len())));
        }
        let max = (1i32 << m) - 1;
        if entries.iter().any(|&e| (e as i32).abs() > max) {
            return Err(Error::BadTable("entry outside residue range".into()));
        }
        Ok(Self { m, entries })
    }

    pub fn zeroed(m: u8) -> Self {
        Self { m, entries: vec![0; CONTEXT_COUNT] }
    }

    #[inline]
    pub fn m(&self) -> u8 {
        self.m
    }

    #[inline]
    pub fn entry(&self, index: u16) -> i8 {
        self.entries[index as usize]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// CRC-32 (IEEE) over the 313 entry bytes; embedded in both the table
    /// file and every container header.
    pub fn crc32(&self) -> u32 {
        crc32(&self.entry_bytes())
    }

    fn entry_bytes(&self) -> Vec<u8> {
        self.entries.iter().map(|&e| e as u8).collect()
    }

    /// Serialize: magic `MSHD`, version, M, T, entry count (u16 le),
    /// 313 signed bytes, CRC-32 of those bytes (u32 le).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 1 + 1 + 1 + 2 + CONTEXT_COUNT + 4);
        out.extend_from_slice(TABLE_MAGIC);
        out.push(TABLE_VERSION);
        out.push(self.m);
        out.push(TEXTURE_CLAMP as u8);
        out.extend_from_slice(&(CONTEXT_COUNT as u16).to_le_bytes());
        out.extend_from_slice(&self.entry_bytes());
        out.extend_from_slice(&self.crc32().to_le_bytes());
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 4 || &data[..4] != TABLE_MAGIC {
            return Err(Error::BadMagic { expected: "MSHD" });
        }
        if data.len() != 4 + 1 + 1 + 1 + 2 + CONTEXT_COUNT + 4 {
            return Err(Error::BadTable(format!("unexpected size {}", data.len())));
        }
        if data[4] != TABLE_VERSION {
            return Err(Error::BadTable(format!("unsupported version {}", data[4])));
        }
        let m = data[5];
        if !(2..=4).contains(&m) {
            return Err(Error::BadTable(format!("bad M {m}")));
        }
        if data[6] != TEXTURE_CLAMP as u8 {
            return Err(Error::BadTable(format!("unsupported texture clamp {}", data[6])));
        }
        let count = u16::from_le_bytes([data[7], data[8]]) as usize;
        if count != CONTEXT_COUNT {
            return Err(Error::BadTable(format!("bad entry count {count}")));
        }
        let body = &data[9..9 + CONTEXT_COUNT];
        let stored_crc = u32::from_le_bytes(data[9 + CONTEXT_COUNT..].try_into().unwrap());
        if crc32(body) != stored_crc {
            return Err(Error::BadTable("checksum mismatch".into()));
        }
        Self::new(m, body.iter().map(|&b| b as i8).collect())
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Predict the level of `X` from its template: `B` plus the signed table
/// entry of the merged context, clamped to the level range.
pub fn predict_intra(t: &CausalTemplate, table: &PredictorTable) -> u8 {
    let ctx = context_id(texture_vector(t));
    let max = (1i32 << table.m) - 1;
    (t.b as i32 + ctx.sign as i32 * table.entry(ctx.index) as i32).clamp(0, max) as u8
}

/// Predict the level of a subimage-`j` pixel from the already-coded
/// `(level, shift)` observations of its own N x N block, ordered by
/// proximity: heuristically estimate the original intensity, re-apply the
/// target shift, and re-quantize.
pub fn predict_inter(block_obs: &[(u8, u8)], shift_j: u8, params: &CodecParams) -> Result<u8> {
    let (estimate, _) = heuristic_estimate(block_obs, params)?;
    Ok(params.quantize_level(estimate.wrapping_add(shift_j)))
}

/// Median edge detector, used only as a comparison predictor for the
/// residue-entropy metric.
pub fn med_predict(t: &CausalTemplate) -> u8 {
    let (a, b, c) = (t.a, t.b, t.c);
    if c >= a.max(b) {
        a.min(b)
    } else if c <= a.min(b) {
        a.max(b)
    } else {
        (a as i32 + b as i32 - c as i32) as u8
    }
}

/// Train a predictor table: every corpus plane is microshift-quantized,
/// its first subimage scanned in raster order, and the signed difference
/// `sign * (X - B)` accumulated into the histogram of the merged context.
/// Each entry is the histogram argmax; ties prefer the smaller magnitude,
/// then the positive value; unseen contexts predict 0. The subimage's
/// first pixel has no causal `B` and is skipped.
pub fn train_table(corpus: &[ImagePlane], params: &CodecParams) -> Result<PredictorTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let m = params.m();
    let span = (2 * ((1usize << m) - 1)) + 1; // difference range [-(2^M-1), 2^M-1]
    let offset = ((1i32 << m) - 1) as usize;
    let mut hist = vec![0u64; CONTEXT_COUNT * span];

    for plane in corpus {
        let q = microshift_quantize(plane, params);
        let n = params.n();
        let width = q.width();
        let level_at = |r: usize, c: usize| q.level(r, c);
        for row in (0..q.height()).step_by(n) {
            for col in (0..width).step_by(n) {
                let t = subimage_template(&level_at, width, row, col, params);
                if t.first {
                    continue;
                }
                let ctx = context_id(texture_vector(&t));
                let diff = ctx.sign as i32 * (q.level(row, col) as i32 - t.b as i32);
                hist[ctx.index as usize * span + (diff + offset as i32) as usize] += 1;
            }
        }
    }

    let mut entries = vec![0i8; CONTEXT_COUNT];
    for (l, entry) in entries.iter_mut().enumerate() {
        let h = &hist[l * span..(l + 1) * span];
        let mut best = 0i32; // value 0 with count h[offset]
        let mut best_count = h[offset];
        for (slot, &count) in h.iter().enumerate() {
            let value = slot as i32 - offset as i32;
            if count > best_count
                || (count == best_count
                    && count > 0
                    && (value.abs() < best.abs() || (value.abs() == best.abs() && value > best)))
            {
                best = value;
                best_count = count;
            }
        }
        *entry = best as i8;
    }
    PredictorTable::new(m, entries)
}

/// CRC-32 (IEEE 802.3, reflected, poly 0xEDB88320).
pub fn crc32(data: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &byte in data {
        crc ^= byte as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}
