//! Streaming raster-scan encoder.
//!
//! Pixels are consumed row by row, quantized with the modulo microshift,
//! and routed to their subimage's bitstream. Each stream carries its own
//! Rice adaptation, run-length state, and sink, so the whole encoder
//! retains only `N + 1` rows of quantized levels regardless of image
//! height - the template reaches one subimage row up and the
//! cross-subimage predictor stays inside the current N x N block.

use crate::coding::{map_residue, rice_encode, run_length_encode, BitWriter, RiceState, RunState};
use crate::container::CompressedContainer;
use crate::context::{predict_inter, predict_intra, subimage_template, texture_vector, PredictorTable};
use crate::image::{ImagePlane, MultiPlaneImage};
use crate::quant::{pattern_index, CodecParams};
use crate::{Error, Result};

/// Size probe for the streaming contract: the retained quantized-level
/// storage is a fixed number of rows, independent of image height.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderStats {
    pub retained_level_rows: usize,
    pub retained_level_samples: usize,
}

struct StreamCoder {
    sink: BitWriter,
    rice: RiceState,
    run_rice: RiceState,
    run: RunState,
}

impl StreamCoder {
    fn new() -> Self {
        Self {
            sink: BitWriter::new(),
            rice: RiceState::new(),
            run_rice: RiceState::new(),
            run: RunState::default(),
        }
    }

    fn flush_run(&mut self) {
        if self.run.active {
            run_length_encode(&mut self.sink, &mut self.run_rice, self.run.length);
            self.run = RunState::default();
        }
    }
}

/// Relative in-block positions of the already-coded subimages `1..j`,
/// ordered by Euclidean distance to subimage `j`'s position (ties
/// row-major). Index 0 of the outer vec corresponds to `j = 1` (empty).
pub(crate) fn inter_observation_order(n: usize) -> Vec<Vec<(usize, usize, usize)>> {
    let nn = n * n;
    let mut orders = Vec::with_capacity(nn);
    for j in 1..=nn {
        let (tr, tc) = ((j - 1) / n, (j - 1) % n);
        let mut obs: Vec<(usize, usize, usize)> = (1..j)
            .map(|i| ((i - 1) / n, (i - 1) % n, i - 1))
            .collect();
        obs.sort_by_key(|&(r, c, _)| {
            let dr = r as i64 - tr as i64;
            let dc = c as i64 - tc as i64;
            (dr * dr + dc * dc, r, c)
        });
        orders.push(obs);
    }
    orders
}

/// Encode one plane supplied row by row; the producer may discard each row
/// after yielding it. Returns the `N^2` subimage bitstreams plus the
/// state-size probe.
pub fn encode_plane_rows(
    rows: impl IntoIterator<Item = Vec<u8>>,
    width: u16,
    height: u16,
    params: &CodecParams,
    table: &PredictorTable,
) -> Result<(Vec<Vec<u8>>, EncoderStats)> {
    if table.m() != params.m() {
        return Err(Error::InvalidParams(format!(
            "table trained for M={}, codec uses M={}",
            table.m(),
            params.m()
        )));
    }
    let w = width as usize;
    let h = height as usize;
    if w == 0 || h == 0 {
        return Err(Error::InvalidParams("empty image".into()));
    }
    let n = params.n();
    let m = params.m();
    let mid = 1u8 << (m - 1);
    let shifts = params.shifts().to_vec();
    let obs_order = inter_observation_order(n);

    let ring_rows = (n + 1).min(h);
    let mut ring: Vec<Vec<u8>> = vec![vec![0u8; w]; ring_rows];
    let mut coders: Vec<StreamCoder> = (0..n * n).map(|_| StreamCoder::new()).collect();
    let mut obs_buf: Vec<(u8, u8)> = Vec::with_capacity(n * n);

    let mut rows_seen = 0usize;
    for (row_idx, row) in rows.into_iter().enumerate() {
        if row_idx >= h {
            return Err(Error::DimensionMismatch("producer yielded extra rows".into()));
        }
        if row.len() != w {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} samples, expected {}",
                row_idx,
                row.len(),
                w
            )));
        }
        rows_seen += 1;
        let slot = row_idx % (n + 1);
        {
            let dst = &mut ring[slot % ring_rows];
            for (c, &v) in row.iter().enumerate() {
                dst[c] = params.quantize_level(v.wrapping_add(shifts[pattern_index(row_idx, c, n)]));
            }
        }
        drop(row);

        let ring_ref = &ring;
        let level_at = move |r: usize, c: usize| ring_ref[(r % (n + 1)) % ring_rows][c];

        let block_row0 = row_idx - row_idx % n;
        for col in 0..w {
            let s = pattern_index(row_idx, col, n);
            let j = s + 1;
            let x = level_at(row_idx, col);
            let tpl = subimage_template(&level_at, w, row_idx, col, params);
            let uniform = texture_vector(&tpl) == [0, 0, 0, 0];

            let coder = &mut coders[s];
            if coder.run.active {
                if uniform && x == tpl.b {
                    coder.run.length += 1;
                    continue;
                }
                coder.flush_run();
            }

            let xhat = if j == 1 {
                if tpl.first {
                    mid
                } else {
                    predict_intra(&tpl, table)
                }
            } else {
                let block_col0 = col - col % n;
                obs_buf.clear();
                for &(ir, ic, t) in &obs_order[s] {
                    let oc = block_col0 + ic;
                    if oc < w {
                        obs_buf.push((level_at(block_row0 + ir, oc), shifts[t]));
                    }
                }
                predict_inter(&obs_buf, shifts[s], params)?
            };

            let mapped = map_residue(x as i32 - xhat as i32, xhat, m)?;
            let k = coder.rice.k();
            rice_encode(&mut coder.sink, k, mapped as u32);
            coder.rice.update(mapped as u32);

            // A uniform-context sample equal to its B opens a run over the
            // following samples of this subimage row.
            let last_col = col + n >= w;
            if uniform && x == tpl.b && !last_col {
                coder.run = RunState { active: true, length: 0 };
            }
        }

        // Runs never span subimage rows: flush the streams whose subimage
        // row ends with this image row.
        for j_in_row in 0..n {
            let s = (row_idx % n) * n + j_in_row;
            coders[s].flush_run();
        }
    }
    if rows_seen != h {
        return Err(Error::DimensionMismatch(format!(
            "producer yielded {rows_seen} rows, expected {h}"
        )));
    }

    let stats = EncoderStats {
        retained_level_rows: ring_rows,
        retained_level_samples: ring_rows * w,
    };
    debug_assert!(stats.retained_level_samples <= (2 * n + 1) * w);
    let streams = coders.into_iter().map(|c| c.sink.finish()).collect();
    Ok((streams, stats))
}

/// Encode a plane already in memory.
pub fn encode_plane(
    plane: &ImagePlane,
    params: &CodecParams,
    table: &PredictorTable,
) -> Result<Vec<Vec<u8>>> {
    let (streams, _) = encode_plane_rows(
        plane.rows().map(|r| r.to_vec()),
        plane.width() as u16,
        plane.height() as u16,
        params,
        table,
    )?;
    Ok(streams)
}

/// Encode a gray or RGB image; planes are compressed independently and laid
/// out in reading order.
pub fn encode_image(
    img: &MultiPlaneImage,
    params: &CodecParams,
    table: &PredictorTable,
) -> Result<CompressedContainer> {
    let (width, height) = img.dims();
    let mut streams = Vec::with_capacity(img.planes().len());
    for plane in img.planes() {
        streams.push(encode_plane(plane, params, table)?);
    }
    Ok(CompressedContainer {
        m: params.m(),
        n: params.n() as u8,
        width,
        height,
        table_crc: table.crc32(),
        streams,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observation_order_is_causal_and_sorted() {
        for n in [3usize, 4] {
            let orders = inter_observation_order(n);
            assert!(orders[0].is_empty());
            for (s, order) in orders.iter().enumerate() {
                assert_eq!(order.len(), s);
                let (tr, tc) = (s / n, s % n);
                let d2 = |(r, c): (usize, usize)| {
                    let dr = r as i64 - tr as i64;
                    let dc = c as i64 - tc as i64;
                    dr * dr + dc * dc
                };
                for w in order.windows(2) {
                    assert!(d2((w[0].0, w[0].1)) <= d2((w[1].0, w[1].1)));
                }
                for &(r, c, t) in order {
                    assert_eq!(t, r * n + c);
                    assert!(r * n + c < s, "observation must precede target in raster order");
                }
            }
        }
    }

    #[test]
    fn single_pixel_image() {
        let params = CodecParams::default();
        let table = PredictorTable::zeroed(3);
        let plane = ImagePlane::filled(1, 1, 200);
        let streams = encode_plane(&plane, &params, &table).unwrap();
        assert_eq!(streams.len(), 9);
        assert!(!streams[0].is_empty(), "subimage 1 holds the sample");
        assert!(streams[1..].iter().all(|s| s.is_empty()));
    }

    #[test]
    fn gray_and_rgb_layout() {
        let params = CodecParams::default();
        let table = PredictorTable::zeroed(3);
        let gray = MultiPlaneImage::gray(ImagePlane::filled(6, 6, 100));
        let c = encode_image(&gray, &params, &table).unwrap();
        assert_eq!(c.planes(), 1);
        assert_eq!(c.streams[0].len(), 9);

        let rgb = MultiPlaneImage::rgb(
            ImagePlane::filled(6, 6, 10),
            ImagePlane::filled(6, 6, 20),
            ImagePlane::filled(6, 6, 30),
        )
        .unwrap();
        let c = encode_image(&rgb, &params, &table).unwrap();
        assert_eq!(c.planes(), 3);
        assert_eq!(c.table_crc, table.crc32());
    }

    #[test]
    fn row_count_mismatch_errors() {
        let params = CodecParams::default();
        let table = PredictorTable::zeroed(3);
        let rows: Vec<Vec<u8>> = vec![vec![0u8; 4]; 3];
        assert!(encode_plane_rows(rows, 4, 5, &params, &table).is_err());
        let rows: Vec<Vec<u8>> = vec![vec![0u8; 3]; 5];
        assert!(encode_plane_rows(rows, 4, 5, &params, &table).is_err());
    }

    #[test]
    fn deterministic() {
        let params = CodecParams::default();
        let table = PredictorTable::zeroed(3);
        let plane = ImagePlane::from_fn(40, 40, |r, c| ((r * 31 + c * 17) % 256) as u8);
        let a = encode_plane(&plane, &params, &table).unwrap();
        let b = encode_plane(&plane, &params, &table).unwrap();
        assert_eq!(a, b);
    }
}
