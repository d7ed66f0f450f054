//! Microshift sub-quantization: the shift pattern, the coarse level
//! quantizer with modulo wrap, subimage geometry, circular uncertainty
//! intervals, and the interval-intersection estimator shared by the
//! decoders and the inter-predictor.
//!
//! All intervals live on the mod-256 circle so that values wrapped by the
//! modulo quantizer are handled uniformly: the non-wrapping case is simply
//! the interval that happens not to cross 255/0.

use crate::image::ImagePlane;
use crate::{Error, Result};

/// Codec configuration: quantizer resolution `M` (bits), microshift block
/// side `N`, the derived step `delta = 256 / 2^M`, and the shift table
/// `shifts[t] = round(t * delta / N^2)` (round half up).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecParams {
    m: u8,
    n: u8,
    delta: u8,
    shifts: Vec<u8>,
}

impl CodecParams {
    /// `M` must be 2..=4 and `N` 3..=4; the default configuration is (3, 3).
    pub fn new(m: u8, n: u8) -> Result<Self> {
        if !(2..=4).contains(&m) {
            return Err(Error::InvalidParams(format!("M must be in 2..=4, got {m}")));
        }
        if !(3..=4).contains(&n) {
            return Err(Error::InvalidParams(format!("N must be 3 or 4, got {n}")));
        }
        let delta = (256u16 >> m) as u8;
        let nn = n as usize * n as usize;
        let shifts = (0..nn)
            .map(|t| ((2 * t * delta as usize + nn) / (2 * nn)) as u8)
            .collect();
        Ok(Self { m, n, delta, shifts })
    }

    #[inline]
    pub fn m(&self) -> u8 {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Quantization step `delta = 256 / 2^M`.
    #[inline]
    pub fn delta(&self) -> u8 {
        self.delta
    }

    /// Number of quantization levels, `2^M`.
    #[inline]
    pub fn level_count(&self) -> usize {
        1usize << self.m
    }

    /// Number of subimages, `N^2`.
    #[inline]
    pub fn subimage_count(&self) -> usize {
        self.n as usize * self.n as usize
    }

    #[inline]
    pub fn shifts(&self) -> &[u8] {
        &self.shifts
    }

    /// Shift applied at image position (row, col).
    #[inline]
    pub fn shift_at(&self, row: usize, col: usize) -> u8 {
        self.shifts[pattern_index(row, col, self.n as usize)]
    }

    /// Reconstruction value of level index `k`: `L_k = k * delta`.
    #[inline]
    pub fn level_value(&self, k: u8) -> u8 {
        k << (8 - self.m)
    }

    /// Coarse quantizer: `floor(v / delta)`.
    #[inline]
    pub fn quantize_level(&self, v: u8) -> u8 {
        v >> (8 - self.m)
    }

    /// Compression ratio of the sub-quantization stage alone, `8 / M`.
    pub fn cr1(&self) -> f64 {
        8.0 / self.m as f64
    }
}

impl Default for CodecParams {
    fn default() -> Self {
        Self::new(3, 3).expect("default params are valid")
    }
}

/// Zero-based position of (row, col) within the tiled N x N pattern.
#[inline]
pub fn pattern_index(row: usize, col: usize, n: usize) -> usize {
    (row % n) * n + col % n
}

/// One-based subimage index of (row, col): pixels with equal index share
/// the shift `shifts[index - 1]`.
#[inline]
pub fn subimage_of(row: usize, col: usize, n: usize) -> usize {
    pattern_index(row, col, n) + 1
}

/// The micro-shifted M-bit level image, optionally partial: `mask` marks
/// which positions carry decoded levels (progressive decoding yields
/// prefixes of subimages).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: u16,
    height: u16,
    levels: Vec<u8>,
    mask: Vec<bool>,
    params: CodecParams,
}

impl QuantizedImage {
    pub fn new(
        width: u16,
        height: u16,
        levels: Vec<u8>,
        mask: Vec<bool>,
        params: CodecParams,
    ) -> Result<Self> {
        let n = width as usize * height as usize;
        if levels.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch("level/mask size mismatch".into()));
        }
        if levels.iter().any(|&l| l as usize >= params.level_count()) {
            return Err(Error::InvalidParams("level out of range".into()));
        }
        Ok(Self { width, height, levels, mask, params })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height as usize
    }

    #[inline]
    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    #[inline]
    pub fn level(&self, row: usize, col: usize) -> u8 {
        self.levels[row * self.width as usize + col]
    }

    #[inline]
    pub fn present(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.width as usize + col]
    }

    #[inline]
    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn full_mask(&self) -> bool {
        self.mask.iter().all(|&p| p)
    }
}

/// Quantize a plane with the modulo microshift: at every position the shift
/// for its pattern phase is added mod 256 before coarse quantization, so
/// overflowing bright pixels wrap to dark levels instead of clipping.
pub fn microshift_quantize(plane: &ImagePlane, params: &CodecParams) -> QuantizedImage {
    let (w, h) = (plane.width(), plane.height());
    let n = params.n();
    let mut levels = Vec::with_capacity(w * h);
    for r in 0..h {
        let row = &plane.samples()[r * w..(r + 1) * w];
        for (c, &v) in row.iter().enumerate() {
            let shifted = v.wrapping_add(params.shifts[pattern_index(r, c, n)]);
            levels.push(params.quantize_level(shifted));
        }
    }
    QuantizedImage {
        width: w as u16,
        height: h as u16,
        levels,
        mask: vec![true; w * h],
        params: params.clone(),
    }
}

/// A circular set of consecutive intensities `{lo, lo+1, ..., lo+width-1}`
/// on the mod-256 circle. Widths never exceed 256.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UncertaintyInterval {
    pub lo: u8,
    pub width: u16,
}

impl UncertaintyInterval {
    #[inline]
    pub fn contains(&self, v: u8) -> bool {
        (v.wrapping_sub(self.lo) as u16) < self.width
    }

    /// Intersect two circular intervals. Both operands have width <= 128 in
    /// this codec, which guarantees the intersection is a single arc (or
    /// empty); the full-circle case is handled for completeness.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.width >= 256 {
            return Some(*other);
        }
        if other.width >= 256 {
            return Some(*self);
        }
        let d = other.lo.wrapping_sub(self.lo) as u16;
        if d < self.width {
            let end = (d + other.width).min(self.width);
            return Some(Self { lo: self.lo.wrapping_add(d as u8), width: end - d });
        }
        if d + other.width > 256 {
            let end = (d + other.width - 256).min(self.width);
            return Some(Self { lo: self.lo, width: end });
        }
        None
    }

    /// Lower median of the integer set (deterministic for even widths).
    #[inline]
    pub fn midpoint(&self) -> u8 {
        self.lo.wrapping_add(((self.width - 1) / 2) as u8)
    }
}

/// Uncertainty range of a pixel observed at `level` under `shift`: the
/// original intensity lies in `{L_level - shift, ...}` of width `delta`,
/// taken on the mod-256 circle.
pub fn uncertainty_of(level: u8, shift: u8, params: &CodecParams) -> UncertaintyInterval {
    UncertaintyInterval {
        lo: params.level_value(level).wrapping_sub(shift),
        width: params.delta as u16,
    }
}

/// Estimate an intensity from `(level, shift)` observations ordered by
/// spatial proximity; the first observation anchors the running interval
/// (the pixel's own observation when one exists).
///
/// Each subsequent interval is intersected greedily; an observation whose
/// interval would empty the running intersection is skipped, so the
/// estimate always stays inside the anchor interval. Returns the lower
/// median of the surviving set together with the interval itself.
pub fn heuristic_estimate(
    observations: &[(u8, u8)],
    params: &CodecParams,
) -> Result<(u8, UncertaintyInterval)> {
    let (&(k0, d0), rest) = observations.split_first().ok_or(Error::NoObservations)?;
    let mut cur = uncertainty_of(k0, d0, params);
    for &(k, d) in rest {
        if let Some(narrowed) = cur.intersect(&uncertainty_of(k, d, params)) {
            cur = narrowed;
        }
    }
    Ok((cur.midpoint(), cur))
}

/// Circular distance between two intensities on the mod-256 circle.
#[inline]
pub fn circular_distance(a: u8, b: u8) -> u8 {
    let d = a.wrapping_sub(b);
    d.min(b.wrapping_sub(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shift_table() {
        let p = CodecParams::new(3, 3).unwrap();
        assert_eq!(p.delta(), 32);
        assert_eq!(p.shifts(), &[0, 4, 7, 11, 14, 18, 21, 25, 28]);
    }

    #[test]
    fn m2_shift_table() {
        let p = CodecParams::new(2, 3).unwrap();
        assert_eq!(p.delta(), 64);
        assert_eq!(p.shifts()[1], 7);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CodecParams::new(3, 1).is_err());
        assert!(CodecParams::new(5, 3).is_err());
        assert!(CodecParams::new(1, 3).is_err());
    }

    #[test]
    fn shift_table_monotone_and_bounded() {
        for m in 2..=4u8 {
            for n in 3..=4u8 {
                let p = CodecParams::new(m, n).unwrap();
                assert_eq!(p.shifts()[0], 0);
                for w in p.shifts().windows(2) {
                    assert!(w[0] < w[1]);
                }
                assert!(*p.shifts().last().unwrap() <= p.delta());
            }
        }
    }

    #[test]
    fn quantize_level_cases() {
        let p = CodecParams::new(3, 3).unwrap();
        assert_eq!(p.quantize_level(0), 0);
        assert_eq!(p.quantize_level(31), 0);
        assert_eq!(p.quantize_level(32), 1);
        assert_eq!(p.quantize_level(255), 7);
    }

    #[test]
    fn quantize_level_monotone() {
        let p = CodecParams::new(3, 3).unwrap();
        for v in 0..255u8 {
            assert!(p.quantize_level(v) <= p.quantize_level(v + 1));
        }
    }

    #[test]
    fn microshift_examples() {
        let p = CodecParams::new(3, 3).unwrap();
        // pixel 100 at pattern position t=4 (shift 14) -> level 3
        let plane = ImagePlane::filled(3, 3, 100);
        let q = microshift_quantize(&plane, &p);
        assert_eq!(q.level(1, 1), 3);
        // pixel 250 at t=8 (shift 28) wraps: (250+28) mod 256 = 22 -> level 0
        let plane = ImagePlane::filled(3, 3, 250);
        let q = microshift_quantize(&plane, &p);
        assert_eq!(q.level(2, 2), 0);
        // zero pixel at t=0 -> level 0
        let plane = ImagePlane::filled(3, 3, 0);
        let q = microshift_quantize(&plane, &p);
        assert_eq!(q.level(0, 0), 0);
    }

    #[test]
    fn subimage_indexing() {
        assert_eq!(subimage_of(0, 0, 3), 1);
        assert_eq!(subimage_of(1, 2, 3), 6);
        assert_eq!(subimage_of(3, 3, 3), 1);
    }

    #[test]
    fn uncertainty_examples() {
        let p = CodecParams::new(3, 3).unwrap();
        let u = uncertainty_of(2, 4, &p);
        assert_eq!((u.lo, u.width), (60, 32));
        let u = uncertainty_of(0, 28, &p);
        assert_eq!((u.lo, u.width), (228, 32));
        assert!(u.contains(250) && u.contains(3) && !u.contains(100));
        let u = uncertainty_of(0, 0, &p);
        assert_eq!((u.lo, u.width), (0, 32));
    }

    #[test]
    fn heuristic_constant_block() {
        let p = CodecParams::new(3, 3).unwrap();
        // All nine observations of a block with constant value 70.
        let obs: Vec<(u8, u8)> = p
            .shifts()
            .iter()
            .map(|&d| (p.quantize_level(70u8.wrapping_add(d)), d))
            .collect();
        let (est, iv) = heuristic_estimate(&obs, &p).unwrap();
        assert_eq!((iv.lo, iv.width), (68, 3));
        assert_eq!(est, 69);
        assert!(circular_distance(est, 70) <= 2);
    }

    #[test]
    fn heuristic_single_observation() {
        let p = CodecParams::new(3, 3).unwrap();
        let (est, iv) = heuristic_estimate(&[(2, 0)], &p).unwrap();
        assert_eq!((iv.lo, iv.width), (64, 32));
        assert_eq!(est, 79);
    }

    #[test]
    fn heuristic_skips_disjoint() {
        let p = CodecParams::new(3, 3).unwrap();
        // own {0..31}, neighbor {128..159}: disjoint, neighbor skipped
        let (est, _) = heuristic_estimate(&[(0, 0), (4, 0)], &p).unwrap();
        assert_eq!(est, 15);
    }

    #[test]
    fn heuristic_empty_errors() {
        let p = CodecParams::default();
        assert!(matches!(heuristic_estimate(&[], &p), Err(Error::NoObservations)));
    }

    #[test]
    fn estimate_stays_in_anchor_interval() {
        // Random observation lists: the estimate must stay inside the
        // anchor interval regardless of what follows.
        let p = CodecParams::new(3, 3).unwrap();
        let mut state = 0x12345678u32;
        let mut next = || {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            (state >> 16) as u8
        };
        for _ in 0..2000 {
            let len = 1 + (next() % 9) as usize;
            let obs: Vec<(u8, u8)> = (0..len)
                .map(|_| (next() & 7, p.shifts()[(next() % 9) as usize]))
                .collect();
            let own = uncertainty_of(obs[0].0, obs[0].1, &p);
            let (est, _) = heuristic_estimate(&obs, &p).unwrap();
            assert!(own.contains(est));
        }
    }

    #[test]
    fn circular_intersection_wraps() {
        let a = UncertaintyInterval { lo: 240, width: 32 }; // {240..255, 0..15}
        let b = UncertaintyInterval { lo: 250, width: 32 }; // {250..255, 0..25}
        let i = a.intersect(&b).unwrap();
        assert_eq!((i.lo, i.width), (250, 22));
        let c = UncertaintyInterval { lo: 100, width: 32 };
        assert!(a.intersect(&c).is_none());
    }
}
