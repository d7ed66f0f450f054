//! Exact inversion of the lossless stage: reconstruct the level image (or
//! any prefix of its subimages) from a container by replaying the encoder's
//! per-stream state machines.

use crate::coding::{rice_decode, run_length_decode, unmap_residue, BitReader, RiceState};
use crate::container::CompressedContainer;
use crate::context::{predict_inter, predict_intra, subimage_template, texture_vector, PredictorTable};
use crate::encoder::inter_observation_order;
use crate::quant::QuantizedImage;
use crate::{Error, Result};

/// Result of a (possibly partial) lossless decode.
#[derive(Debug, Clone)]
pub struct DecodedLevels {
    /// One partially-filled level image per plane.
    pub planes: Vec<QuantizedImage>,
    /// Whether the container was produced with the supplied table
    /// (checksum comparison). A mismatch is survivable for the caller to
    /// warn about, but the decoded levels are then unreliable.
    pub table_crc_matches: bool,
}

/// Decode subimages `1..=upto` of every plane. With `upto == N^2` the
/// result equals the encoder-side quantized image bit-exactly.
pub fn decode_levels(
    container: &CompressedContainer,
    table: &PredictorTable,
    upto: usize,
) -> Result<DecodedLevels> {
    let params = container.params()?;
    if table.m() != params.m() {
        return Err(Error::InvalidParams(format!(
            "table trained for M={}, container uses M={}",
            table.m(),
            params.m()
        )));
    }
    let nn = params.subimage_count();
    if upto == 0 || upto > nn {
        return Err(Error::InvalidParams(format!("subimage count {upto} not in 1..={nn}")));
    }

    let w = container.width as usize;
    let h = container.height as usize;
    let n = params.n();
    let m = params.m();
    let mid = 1u8 << (m - 1);
    let level_count = params.level_count() as u32;
    let shifts = params.shifts().to_vec();
    let obs_order = inter_observation_order(n);

    let mut planes = Vec::with_capacity(container.planes());
    for plane_streams in &container.streams {
        let mut levels = vec![0u8; w * h];
        let mut mask = vec![false; w * h];
        let mut obs_buf: Vec<(u8, u8)> = Vec::with_capacity(nn);

        for j in 1..=upto {
            let s = j - 1;
            let (pr, pc) = (s / n, s % n);
            if pc >= w || pr >= h {
                continue; // clipped subimage: no samples
            }
            let mut reader = BitReader::new(&plane_streams[s]);
            let mut rice = RiceState::new();
            let mut run_rice = RiceState::new();

            let cols: Vec<usize> = (pc..w).step_by(n).collect();
            for row in (pr..h).step_by(n) {
                let block_row0 = row - row % n;
                let mut ci = 0usize;
                while ci < cols.len() {
                    let col = cols[ci];
                    let (tpl, uniform, x) = {
                        let level_at = |r: usize, c: usize| levels[r * w + c];
                        let tpl = subimage_template(&level_at, w, row, col, &params);
                        let uniform = texture_vector(&tpl) == [0, 0, 0, 0];

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
                            predict_inter(&obs_buf, shifts[s], &params)?
                        };

                        let k = rice.k();
                        let v = rice_decode(&mut reader, k)?;
                        if v >= level_count {
                            return Err(Error::MalformedStream(format!(
                                "residue code {v} out of range"
                            )));
                        }
                        rice.update(v);
                        let x = (xhat as i32 + unmap_residue(v as u8, xhat, m)) as u8;
                        (tpl, uniform, x)
                    };
                    levels[row * w + col] = x;
                    mask[row * w + col] = true;

                    let last_col = ci + 1 == cols.len();
                    if uniform && x == tpl.b && !last_col {
                        let len = run_length_decode(&mut reader, &mut run_rice)? as usize;
                        if ci + len >= cols.len() {
                            return Err(Error::MalformedStream("run overruns subimage row".into()));
                        }
                        for step in 1..=len {
                            let rc = cols[ci + step];
                            let level_at = |r: usize, c: usize| levels[r * w + c];
                            let tpl = subimage_template(&level_at, w, row, rc, &params);
                            levels[row * w + rc] = tpl.b;
                            mask[row * w + rc] = true;
                        }
                        ci += len + 1;
                    } else {
                        ci += 1;
                    }
                }
            }
        }
        planes.push(QuantizedImage::new(w as u16, h as u16, levels, mask, params.clone())?);
    }

    Ok(DecodedLevels { planes, table_crc_matches: container.table_crc == table.crc32() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::train_table;
    use crate::encoder::encode_image;
    use crate::image::{ImagePlane, MultiPlaneImage};
    use crate::quant::{microshift_quantize, CodecParams};

    fn lcg_plane(seed: u32, w: u16, h: u16) -> ImagePlane {
        let mut state = seed;
        ImagePlane::from_fn(w, h, |_, _| {
            state = state.wrapping_mul(1664525).wrapping_add(1013904223);
            (state >> 24) as u8
        })
    }

    #[test]
    fn lossless_roundtrip_random_sizes() {
        let params = CodecParams::default();
        let table = crate::default_table();
        for (i, (w, h)) in
            [(1u16, 1u16), (1, 7), (7, 1), (2, 2), (3, 3), (9, 9), (10, 7), (37, 23), (64, 64)]
                .iter()
                .enumerate()
        {
            let plane = lcg_plane(i as u32 + 1, *w, *h);
            let img = MultiPlaneImage::gray(plane.clone());
            let c = encode_image(&img, &params, &table).unwrap();
            let out = decode_levels(&c, &table, 9).unwrap();
            assert!(out.table_crc_matches);
            let expect = microshift_quantize(&plane, &params);
            assert_eq!(out.planes[0].levels(), expect.levels(), "size {w}x{h}");
            assert!(out.planes[0].full_mask());
        }
    }

    #[test]
    fn lossless_roundtrip_other_params() {
        for m in 2..=4u8 {
            for n in 3..=4u8 {
                let params = CodecParams::new(m, n).unwrap();
                let table = crate::context::PredictorTable::zeroed(m);
                let plane = lcg_plane(99, 30, 22);
                let img = MultiPlaneImage::gray(plane.clone());
                let c = encode_image(&img, &params, &table).unwrap();
                let out = decode_levels(&c, &table, (n as usize).pow(2)).unwrap();
                let expect = microshift_quantize(&plane, &params);
                assert_eq!(out.planes[0].levels(), expect.levels(), "M={m} N={n}");
            }
        }
    }

    #[test]
    fn roundtrip_with_trained_table() {
        let params = CodecParams::default();
        let corpus: Vec<ImagePlane> = (0..6).map(|i| lcg_plane(100 + i, 45, 36)).collect();
        let table = train_table(&corpus, &params).unwrap();
        let plane = lcg_plane(7, 50, 40);
        let img = MultiPlaneImage::gray(plane.clone());
        let c = encode_image(&img, &params, &table).unwrap();
        let out = decode_levels(&c, &table, 9).unwrap();
        assert_eq!(out.planes[0].levels(), microshift_quantize(&plane, &params).levels());
    }

    #[test]
    fn prefix_decode_touches_only_first_subimage() {
        let params = CodecParams::default();
        let table = crate::default_table();
        let plane = lcg_plane(5, 20, 20);
        let c = encode_image(&MultiPlaneImage::gray(plane), &params, &table).unwrap();
        let out = decode_levels(&c, &table, 1).unwrap();
        let q = &out.planes[0];
        for r in 0..20 {
            for col in 0..20 {
                assert_eq!(q.present(r, col), r % 3 == 0 && col % 3 == 0);
            }
        }
    }

    #[test]
    fn prefix_agrees_with_full_decode() {
        let params = CodecParams::default();
        let table = crate::default_table();
        let plane = lcg_plane(11, 33, 27);
        let c = encode_image(&MultiPlaneImage::gray(plane), &params, &table).unwrap();
        let full = decode_levels(&c, &table, 9).unwrap();
        for k in 1..=9 {
            let part = decode_levels(&c, &table, k).unwrap();
            for (i, present) in part.planes[0].mask().iter().enumerate() {
                if *present {
                    assert_eq!(part.planes[0].levels()[i], full.planes[0].levels()[i]);
                }
            }
        }
    }

    #[test]
    fn crc_mismatch_is_reported() {
        let params = CodecParams::default();
        let table = crate::default_table();
        let plane = lcg_plane(3, 12, 12);
        let mut c = encode_image(&MultiPlaneImage::gray(plane), &params, &table).unwrap();
        c.table_crc ^= 1;
        let out = decode_levels(&c, &table, 9).unwrap();
        assert!(!out.table_crc_matches);
    }

    #[test]
    fn truncated_stream_is_hard_error() {
        let params = CodecParams::default();
        let table = crate::default_table();
        let plane = lcg_plane(8, 24, 24);
        let mut c = encode_image(&MultiPlaneImage::gray(plane), &params, &table).unwrap();
        let s0 = &mut c.streams[0][0];
        s0.truncate(s0.len() / 2);
        assert!(decode_levels(&c, &table, 9).is_err());
    }

    #[test]
    fn rgb_roundtrip() {
        let params = CodecParams::default();
        let table = crate::default_table();
        let img = MultiPlaneImage::rgb(
            lcg_plane(21, 17, 13),
            lcg_plane(22, 17, 13),
            lcg_plane(23, 17, 13),
        )
        .unwrap();
        let c = encode_image(&img, &params, &table).unwrap();
        let out = decode_levels(&c, &table, 9).unwrap();
        for (plane, q) in img.planes().iter().zip(&out.planes) {
            assert_eq!(q.levels(), microshift_quantize(plane, &params).levels());
        }
    }
}
