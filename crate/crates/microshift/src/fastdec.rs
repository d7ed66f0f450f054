//! FAST reconstruction: full-image heuristic decoding by uncertainty
//! intersection, separable bilinear fill for progressive prefixes, and an
//! iterated edge-preserving weighted-least-squares smoother.

use crate::image::ImagePlane;
use crate::quant::{heuristic_estimate, QuantizedImage};
use crate::real::Real;
use crate::{Error, Result};

/// Parameters of the iterated WLS smoother. The per-iteration smoothing
/// strength follows the geometric schedule
/// `lambda_t = (3/2) * lambda * 4^(T-t) / (4^T - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsParams<F: Real = f64> {
    pub iterations: u32,
    pub lambda: F,
    pub sigma_c: F,
}

impl<F: Real> Default for WlsParams<F> {
    fn default() -> Self {
        Self { iterations: 8, lambda: F::c(5.0), sigma_c: F::c(7.0) }
    }
}

impl<F: Real> WlsParams<F> {
    fn validate(&self) -> Result<()> {
        if self.iterations < 1 || self.lambda <= F::zero() || self.sigma_c <= F::zero() {
            return Err(Error::InvalidParams("wls parameters out of range".into()));
        }
        Ok(())
    }
}

// Start of the length-`n` window around `center` along an axis of extent
// `extent`, clamped so the window stays inside the image. The clamping
// keeps all N^2 shift phases visible at the borders too.
#[inline]
fn window_start(center: usize, n: usize, extent: usize) -> usize {
    let half = (n - 1) / 2;
    let start = center.saturating_sub(half);
    start.min(extent.saturating_sub(n))
}

/// Estimate every present pixel as the midpoint of the greedy intersection
/// of the uncertainty intervals observed in its N x N window (centered,
/// clamped inside the image), nearest observations first. Absent pixels
/// are left at zero; consult the image's mask for which outputs are
/// meaningful.
pub fn heuristic_decode(q: &QuantizedImage) -> Result<ImagePlane> {
    if !q.mask().iter().any(|&p| p) {
        return Err(Error::InvalidParams("no subimage present".into()));
    }
    let (w, h) = (q.width(), q.height());
    let n = q.params().n();

    let mut out = vec![0u8; w * h];
    let mut cells: Vec<(i64, usize, usize)> = Vec::with_capacity(n * n);
    let mut obs: Vec<(u8, u8)> = Vec::with_capacity(n * n);
    for r in 0..h {
        let rs = window_start(r, n, h);
        let re = (rs + n).min(h);
        for c in 0..w {
            if !q.present(r, c) {
                continue;
            }
            let cs = window_start(c, n, w);
            let ce = (cs + n).min(w);
            cells.clear();
            for rr in rs..re {
                for cc in cs..ce {
                    if q.present(rr, cc) {
                        let dr = rr as i64 - r as i64;
                        let dc = cc as i64 - c as i64;
                        cells.push((dr * dr + dc * dc, rr, cc));
                    }
                }
            }
            cells.sort_unstable();
            obs.clear();
            obs.extend(
                cells
                    .iter()
                    .map(|&(_, rr, cc)| (q.level(rr, cc), q.params().shift_at(rr, cc))),
            );
            let (est, _) = heuristic_estimate(&obs, q.params())?;
            out[r * w + c] = est;
        }
    }
    ImagePlane::new(w as u16, h as u16, out)
}

/// Heuristic decode plus separable bilinear interpolation of the absent
/// positions: rows containing present pixels are interpolated horizontally
/// (nearest value beyond the outermost present pixels), remaining rows
/// vertically between their nearest filled rows.
pub fn heuristic_fill(q: &QuantizedImage) -> Result<ImagePlane> {
    let decoded = heuristic_decode(q)?;
    if q.full_mask() {
        return Ok(decoded);
    }
    let (w, h) = (q.width(), q.height());
    let mut grid = vec![0f64; w * h];
    let mut row_filled = vec![false; h];

    for r in 0..h {
        let present: Vec<usize> = (0..w).filter(|&c| q.present(r, c)).collect();
        if present.is_empty() {
            continue;
        }
        row_filled[r] = true;
        let row = &mut grid[r * w..(r + 1) * w];
        let last = *present.last().unwrap();
        let mut pi = 0usize;
        for (c, cell) in row.iter_mut().enumerate() {
            while pi + 1 < present.len() && present[pi + 1] <= c {
                pi += 1;
            }
            let sample = |cc: usize| decoded.get(r, cc) as f64;
            *cell = if c <= present[0] {
                sample(present[0])
            } else if c >= last {
                sample(last)
            } else {
                let (left, right) = (present[pi], present[pi + 1]);
                let t = (c - left) as f64 / (right - left) as f64;
                sample(left) * (1.0 - t) + sample(right) * t
            };
        }
    }

    let filled_rows: Vec<usize> = (0..h).filter(|&r| row_filled[r]).collect();
    if filled_rows.is_empty() {
        return Err(Error::InvalidParams("no subimage present".into()));
    }
    let mut out = vec![0u8; w * h];
    let mut fi = 0usize;
    for r in 0..h {
        if !row_filled[r] {
            while fi + 1 < filled_rows.len() && filled_rows[fi + 1] <= r {
                fi += 1;
            }
            for c in 0..w {
                let v = if r <= filled_rows[0] {
                    grid[filled_rows[0] * w + c]
                } else if r >= *filled_rows.last().unwrap() {
                    grid[filled_rows.last().unwrap() * w + c]
                } else {
                    let (above, below) = (filled_rows[fi], filled_rows[fi + 1]);
                    let t = (r - above) as f64 / (below - above) as f64;
                    grid[above * w + c] * (1.0 - t) + grid[below * w + c] * t
                };
                out[r * w + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        } else {
            for c in 0..w {
                out[r * w + c] = grid[r * w + c].round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    ImagePlane::new(w as u16, h as u16, out)
}

// One weighted 1D least-squares solve (I + lambda * L_w) u = f along a line,
// via the Thomas algorithm. `weight(i)` couples element i and i+1.
fn solve_line<F: Real>(
    f: &[F],
    lambda: F,
    weight: impl Fn(usize) -> F,
    out: &mut [F],
    cp: &mut Vec<F>,
    dp: &mut Vec<F>,
) {
    let n = f.len();
    if n == 1 {
        out[0] = f[0];
        return;
    }
    cp.clear();
    dp.clear();
    let w0 = weight(0);
    let b0 = F::one() + lambda * w0;
    cp.push(-lambda * w0 / b0);
    dp.push(f[0] / b0);
    for i in 1..n {
        let wl = weight(i - 1);
        let wr = if i + 1 < n { weight(i) } else { F::zero() };
        let a = -lambda * wl;
        let b = F::one() + lambda * (wl + wr);
        let c = -lambda * wr;
        let m = b - a * cp[i - 1];
        cp.push(c / m);
        dp.push((f[i] - a * dp[i - 1]) / m);
    }
    out[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = dp[i] - cp[i] * out[i + 1];
    }
}

/// Iterated global smoother: each iteration runs one horizontal and one
/// vertical 1D weighted-least-squares pass with weights
/// `exp(-|guide_p - guide_q| / sigma_c)`; the output is clamped and rounded
/// once at the end.
pub fn wls_smooth<F: Real>(
    img: &ImagePlane,
    guide: &ImagePlane,
    p: &WlsParams<F>,
) -> Result<ImagePlane> {
    p.validate()?;
    if img.dims() != guide.dims() {
        return Err(Error::DimensionMismatch("image and guide differ in size".into()));
    }
    let (w, h) = (img.width(), img.height());
    let t_total = p.iterations;

    let mut wlut = [F::zero(); 256];
    for (d, entry) in wlut.iter_mut().enumerate() {
        *entry = (-F::c(d as f64) / p.sigma_c).exp();
    }

    let mut buf: Vec<F> = img.samples().iter().map(|&v| F::c(v as f64)).collect();
    let mut line_in: Vec<F> = Vec::new();
    let mut line_out: Vec<F> = vec![F::zero(); w.max(h)];
    let mut cp: Vec<F> = Vec::with_capacity(w.max(h));
    let mut dp: Vec<F> = Vec::with_capacity(w.max(h));

    let four = F::c(4.0);
    let denom = four.powi(t_total as i32) - F::one();
    for t in 1..=t_total {
        let lambda_t = F::c(1.5) * p.lambda * four.powi((t_total - t) as i32) / denom;

        for r in 0..h {
            line_in.clear();
            line_in.extend_from_slice(&buf[r * w..(r + 1) * w]);
            let gw = |i: usize| {
                let d = guide.get(r, i).abs_diff(guide.get(r, i + 1));
                wlut[d as usize]
            };
            solve_line(&line_in, lambda_t, gw, &mut line_out[..w], &mut cp, &mut dp);
            buf[r * w..(r + 1) * w].copy_from_slice(&line_out[..w]);
        }

        for c in 0..w {
            line_in.clear();
            line_in.extend((0..h).map(|r| buf[r * w + c]));
            let gw = |i: usize| {
                let d = guide.get(i, c).abs_diff(guide.get(i + 1, c));
                wlut[d as usize]
            };
            solve_line(&line_in, lambda_t, gw, &mut line_out[..h], &mut cp, &mut dp);
            for r in 0..h {
                buf[r * w + c] = line_out[r];
            }
        }
    }

    let samples = buf
        .iter()
        .map(|&v| {
            v.to_f64()
                .map(|x| x.round().clamp(0.0, 255.0) as u8)
                .unwrap_or(0)
        })
        .collect();
    ImagePlane::new(w as u16, h as u16, samples)
}

/// The FAST decoder: heuristic reconstruction smoothed by WLS, guided by
/// the heuristic output itself. Requires a complete level image.
pub fn fast_decode<F: Real>(q: &QuantizedImage, p: &WlsParams<F>) -> Result<ImagePlane> {
    if !q.full_mask() {
        return Err(Error::InvalidParams(
            "fast_decode needs all subimages; use progressive_fast".into(),
        ));
    }
    let base = heuristic_decode(q)?;
    wls_smooth(&base, &base, p)
}

/// Progressive FAST: heuristic decode of the present subimages, bilinear
/// fill of the rest, then WLS. With a full mask this equals
/// [`fast_decode`] bit for bit.
pub fn progressive_fast<F: Real>(q: &QuantizedImage, p: &WlsParams<F>) -> Result<ImagePlane> {
    let base = heuristic_fill(q)?;
    wls_smooth(&base, &base, p)
}
