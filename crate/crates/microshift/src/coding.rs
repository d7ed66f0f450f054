//! Bit-exact entropy coding primitives: MSB-first bit cursors, Rice codes
//! with a bounded escape, the adaptive Rice parameter state, run-length
//! state, and the bounded residue zigzag map.

use crate::{Error, Result};

/// MSB-first bit sink. `finish` pads the final byte with zero bits.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    cur: u8,
    fill: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.cur = (self.cur << 1) | bit as u8;
        self.fill += 1;
        if self.fill == 8 {
            self.bytes.push(self.cur);
            self.cur = 0;
            self.fill = 0;
        }
    }

    /// Write the low `count` bits of `v`, most significant first.
    pub fn write_bits(&mut self, v: u32, count: u32) {
        debug_assert!(count <= 32);
        for i in (0..count).rev() {
            self.write_bit((v >> i) & 1 != 0);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + self.fill as usize
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.fill > 0 {
            self.bytes.push(self.cur << (8 - self.fill));
        }
        self.bytes
    }
}

/// MSB-first bit source over a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize, // bit index
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        let byte = self.pos / 8;
        if byte >= self.bytes.len() {
            return Err(Error::TruncatedStream);
        }
        let bit = (self.bytes[byte] >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(bit != 0)
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..count {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }
}

/// Unary quotients are capped here; longer codes switch to a raw escape.
pub const RICE_ESCAPE_QUOTIENT: u32 = 24;

/// Rice-encode `v` with parameter `k`: `v >> k` ones, a zero, then the low
/// `k` bits of `v`. Quotients of 24 or more escape to `24` ones, a zero,
/// and `v` as a raw 16-bit value, bounding the worst-case code length.
pub fn rice_encode(w: &mut BitWriter, k: u32, v: u32) {
    debug_assert!(k <= 15);
    debug_assert!(v <= u16::MAX as u32, "rice values must fit the escape field");
    let q = v >> k;
    if q >= RICE_ESCAPE_QUOTIENT {
        for _ in 0..RICE_ESCAPE_QUOTIENT {
            w.write_bit(true);
        }
        w.write_bit(false);
        w.write_bits(v, 16);
    } else {
        for _ in 0..q {
            w.write_bit(true);
        }
        w.write_bit(false);
        w.write_bits(v & ((1 << k) - 1), k);
    }
}

pub fn rice_decode(r: &mut BitReader, k: u32) -> Result<u32> {
    let mut q = 0u32;
    while q < RICE_ESCAPE_QUOTIENT {
        if !r.read_bit()? {
            return Ok((q << k) | r.read_bits(k)?);
        }
        q += 1;
    }
    // Escape: the encoder always terminates the 24 ones with a zero.
    if r.read_bit()? {
        return Err(Error::MalformedStream("unterminated rice escape".into()));
    }
    r.read_bits(16)
}

/// Adaptive Rice parameter: tracks the count and the sum of coded values;
/// the parameter is the smallest `k` with `count * 2^k >= acc`. Both are
/// halved (rounding up) when the count reaches 64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiceState {
    count: u32,
    acc: u64,
}

impl RiceState {
    pub fn new() -> Self {
        Self { count: 1, acc: 0 }
    }

    /// Parameter for the next sample.
    pub fn k(&self) -> u32 {
        let mut k = 0u32;
        while k < 15 && (self.count as u64) << k < self.acc {
            k += 1;
        }
        k
    }

    pub fn update(&mut self, v: u32) {
        self.acc += v as u64;
        self.count += 1;
        if self.count == 64 {
            self.count = 32;
            self.acc = self.acc.div_ceil(2);
        }
    }
}

impl Default for RiceState {
    fn default() -> Self {
        Self::new()
    }
}

/// Run-mode state of one subimage stream. `active` implies the previous
/// coded sample had a uniform context and equaled its template `B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunState {
    pub active: bool,
    pub length: u32,
}

/// Encode a flushed run length with the stream's dedicated length state.
pub fn run_length_encode(w: &mut BitWriter, st: &mut RiceState, length: u32) {
    let k = st.k();
    rice_encode(w, k, length);
    st.update(length);
}

pub fn run_length_decode(r: &mut BitReader, st: &mut RiceState) -> Result<u32> {
    let k = st.k();
    let length = rice_decode(r, k)?;
    st.update(length);
    Ok(length)
}

#[inline]
fn feasible_range(xhat: u8, m: u8) -> (i32, i32) {
    (-(xhat as i32), ((1i32 << m) - 1) - xhat as i32)
}

// The zigzag order over the feasible residue set for a given prediction:
// starts at 0, then alternates sides (positive first for xhat < 2^(M-1),
// negative first otherwise); once a side is exhausted the enumeration
// continues down the remaining side.
fn zigzag(xhat: u8, m: u8, mut visit: impl FnMut(i32, u8) -> bool) {
    let (lo, hi) = feasible_range(xhat, m);
    let positive_first = (xhat as i32) < 1 << (m - 1);
    let mut code = 0u8;
    if visit(0, code) {
        return;
    }
    for step in 1..=(1i32 << m) {
        let (first, second) = if positive_first { (step, -step) } else { (-step, step) };
        for eps in [first, second] {
            if eps >= lo && eps <= hi {
                code += 1;
                if visit(eps, code) {
                    return;
                }
            }
        }
    }
}

/// Map a prediction residue to its code index in `[0, 2^M - 1]`; the map is
/// a bijection from the feasible residue set `[-xhat, 2^M - 1 - xhat]`.
pub fn map_residue(eps: i32, xhat: u8, m: u8) -> Result<u8> {
    let (lo, hi) = feasible_range(xhat, m);
    if eps < lo || eps > hi {
        return Err(Error::InvalidParams(format!(
            "residue {eps} outside feasible range [{lo}, {hi}]"
        )));
    }
    let mut found = 0u8;
    zigzag(xhat, m, |e, code| {
        if e == eps {
            found = code;
            true
        } else {
            false
        }
    });
    Ok(found)
}

/// Inverse of [`map_residue`]. `code` must be in `[0, 2^M - 1]`.
pub fn unmap_residue(code: u8, xhat: u8, m: u8) -> i32 {
    debug_assert!((code as i32) < (1 << m));
    let mut found = 0i32;
    zigzag(xhat, m, |e, c| {
        if c == code {
            found = e;
            true
        } else {
            false
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn map_examples_m3() {
        // xhat=3 (< 4): order 0,1,-1,2,-2,3,-3,4
        assert_eq!(map_residue(-2, 3, 3).unwrap(), 4);
        assert_eq!(map_residue(4, 3, 3).unwrap(), 7);
        // xhat=6 (>= 4): order 0,-1,1,-2,-3,-4,-5,-6
        assert_eq!(map_residue(-3, 6, 3).unwrap(), 4);
        // zero maps to zero for every xhat
        for xhat in 0..8 {
            assert_eq!(map_residue(0, xhat, 3).unwrap(), 0);
        }
        assert_eq!(unmap_residue(7, 3, 3), 4);
        assert_eq!(unmap_residue(0, 5, 3), 0);
    }

    #[test]
    fn map_rejects_infeasible() {
        assert!(map_residue(5, 3, 3).is_err());
        assert!(map_residue(-4, 3, 3).is_err());
    }

    #[test]
    fn map_unmap_bijection_exhaustive() {
        for m in 2..=4u8 {
            let levels = 1i32 << m;
            for xhat in 0..levels as u8 {
                let mut seen = vec![false; levels as usize];
                for eps in -(xhat as i32)..=(levels - 1 - xhat as i32) {
                    let code = map_residue(eps, xhat, m).unwrap();
                    assert!((code as i32) < levels);
                    assert!(!seen[code as usize], "collision m={m} xhat={xhat} eps={eps}");
                    seen[code as usize] = true;
                    assert_eq!(unmap_residue(code, xhat, m), eps);
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn rice_examples() {
        let cases = [(2u32, 0u32, "000"), (2, 5, "1001"), (0, 3, "1110")];
        for (k, v, bits) in cases {
            let mut w = BitWriter::new();
            rice_encode(&mut w, k, v);
            assert_eq!(w.bit_len(), bits.len(), "k={k} v={v}");
            let bytes = w.finish();
            for (i, ch) in bits.chars().enumerate() {
                let bit = (bytes[i / 8] >> (7 - i % 8)) & 1;
                assert_eq!(bit == 1, ch == '1', "k={k} v={v} bit {i}");
            }
        }
    }

    #[test]
    fn rice_roundtrip_exhaustive() {
        for k in 0..=7u32 {
            let mut w = BitWriter::new();
            for v in 0..=1023u32 {
                rice_encode(&mut w, k, v);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for v in 0..=1023u32 {
                assert_eq!(rice_decode(&mut r, k).unwrap(), v, "k={k}");
            }
        }
    }

    #[test]
    fn rice_escape_is_bounded() {
        let mut w = BitWriter::new();
        rice_encode(&mut w, 0, 60000);
        assert_eq!(w.bit_len(), RICE_ESCAPE_QUOTIENT as usize + 1 + 16);
        let bytes = w.finish();
        assert_eq!(rice_decode(&mut BitReader::new(&bytes), 0).unwrap(), 60000);
    }

    #[test]
    fn rice_decode_past_end_errors() {
        let mut r = BitReader::new(&[0b1111_1111]);
        assert!(matches!(rice_decode(&mut r, 0), Err(Error::TruncatedStream)));
    }

    #[test]
    fn adapt_examples() {
        let st = RiceState::new();
        assert_eq!((st.count, st.acc), (1, 0));
        assert_eq!(st.k(), 0);

        let st = RiceState { count: 4, acc: 9 };
        assert_eq!(st.k(), 2);

        let mut st = RiceState { count: 63, acc: 100 };
        st.update(1);
        assert_eq!(st.count, 32);
        assert_eq!(st.acc, 51); // ceil(101 / 2)
    }

    #[test]
    fn run_length_roundtrip() {
        let lengths: Vec<u32> = (0..500).map(|i| (i * 7919) % 1001).collect();
        let mut w = BitWriter::new();
        let mut enc = RiceState::new();
        for &l in &lengths {
            run_length_encode(&mut w, &mut enc, l);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        let mut dec = RiceState::new();
        for &l in &lengths {
            assert_eq!(run_length_decode(&mut r, &mut dec).unwrap(), l);
        }
        assert_eq!(enc, dec);
    }

    proptest! {
        #[test]
        fn bit_cursor_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..4000)) {
            let mut w = BitWriter::new();
            for &b in &bits {
                w.write_bit(b);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &b in &bits {
                prop_assert_eq!(r.read_bit().unwrap(), b);
            }
        }

        #[test]
        fn rice_roundtrip_random(k in 0u32..=15, vs in proptest::collection::vec(0u32..=65535, 1..200)) {
            let mut w = BitWriter::new();
            for &v in &vs {
                rice_encode(&mut w, k, v);
            }
            let bytes = w.finish();
            let mut r = BitReader::new(&bytes);
            for &v in &vs {
                prop_assert_eq!(rice_decode(&mut r, k).unwrap(), v);
            }
        }
    }

    #[test]
    fn bit_cursor_megabit() {
        // Deterministic long-sequence check beyond what proptest covers.
        let mut state = 0x9e3779b9u32;
        let mut bits = Vec::with_capacity(1_000_000);
        for _ in 0..1_000_000 {
            state ^= state << 13;
            state ^= state >> 17;
            state ^= state << 5;
            bits.push(state & 1 != 0);
        }
        let mut w = BitWriter::new();
        for &b in &bits {
            w.write_bit(b);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for &b in &bits {
            assert_eq!(r.read_bit().unwrap(), b);
        }
        assert!(matches!(r.read_bits(8), Ok(0)) || r.read_bit().is_err());
    }
}
