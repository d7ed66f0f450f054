//! Rate and quality measurement: PSNR, SSIM, bits per pixel, and the
//! residue-entropy comparison between the learned predictor and MED.

use crate::coding::map_residue;
use crate::container::CompressedContainer;
use crate::context::{med_predict, predict_intra, subimage_template, PredictorTable};
use crate::image::ImagePlane;
use crate::quant::{microshift_quantize, CodecParams};
use crate::real::Real;
use crate::{Error, Result};

/// PSNR cap reported for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

/// Peak signal-to-noise ratio in dB, capped at 99.0.
pub fn psnr<F: Real>(a: &ImagePlane, b: &ImagePlane) -> Result<F> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch("psnr operands differ in size".into()));
    }
    let sq: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sq == 0 {
        return Ok(F::c(PSNR_CAP_DB));
    }
    let mse = sq as f64 / a.samples().len() as f64;
    Ok(F::c((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP_DB)))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

// Symmetric (edge-inclusive reflection) index: ..2 1 0 | 0 1 2.. | n-1 n-1..
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i - 1;
    }
    if i >= n {
        i = 2 * n - 1 - i;
    }
    i as usize
}

fn gaussian_kernel<F: Real>() -> [F; SSIM_WINDOW] {
    let mut k = [F::zero(); SSIM_WINDOW];
    let mut sum = F::zero();
    for (i, v) in k.iter_mut().enumerate() {
        let x = i as f64 - (SSIM_WINDOW as f64 - 1.0) / 2.0;
        *v = F::c((-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        sum = sum + *v;
    }
    for v in &mut k {
        *v = *v / sum;
    }
    k
}

// Separable gaussian filter with symmetric boundary padding.
fn gauss_filter<F: Real>(src: &[F], w: usize, h: usize) -> Vec<F> {
    let k = gaussian_kernel::<F>();
    let r = SSIM_WINDOW as isize / 2;
    let mut tmp = vec![F::zero(); w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = F::zero();
            for (i, &kv) in k.iter().enumerate() {
                let cc = reflect(col as isize + i as isize - r, w);
                acc = acc + kv * src[row * w + cc];
            }
            tmp[row * w + col] = acc;
        }
    }
    let mut out = vec![F::zero(); w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = F::zero();
            for (i, &kv) in k.iter().enumerate() {
                let rr = reflect(row as isize + i as isize - r, h);
                acc = acc + kv * tmp[rr * w + col];
            }
            out[row * w + col] = acc;
        }
    }
    out
}

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// `C1 = (0.01*255)^2`, `C2 = (0.03*255)^2`, symmetric boundary padding.
pub fn ssim<F: Real>(a: &ImagePlane, b: &ImagePlane) -> Result<F> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch("ssim operands differ in size".into()));
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidParams(format!("ssim needs at least {SSIM_WINDOW} px per side")));
    }
    let fa: Vec<F> = a.samples().iter().map(|&v| F::c(v as f64)).collect();
    let fb: Vec<F> = b.samples().iter().map(|&v| F::c(v as f64)).collect();
    let aa: Vec<F> = fa.iter().map(|&v| v * v).collect();
    let bb: Vec<F> = fb.iter().map(|&v| v * v).collect();
    let ab: Vec<F> = fa.iter().zip(&fb).map(|(&x, &y)| x * y).collect();

    let mu_a = gauss_filter(&fa, w, h);
    let mu_b = gauss_filter(&fb, w, h);
    let m_aa = gauss_filter(&aa, w, h);
    let m_bb = gauss_filter(&bb, w, h);
    let m_ab = gauss_filter(&ab, w, h);

    let c1 = F::c((0.01 * 255.0) * (0.01 * 255.0));
    let c2 = F::c((0.03 * 255.0) * (0.03 * 255.0));
    let two = F::c(2.0);
    let mut sum = F::zero();
    for i in 0..w * h {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = m_aa[i] - ma * ma;
        let vb = m_bb[i] - mb * mb;
        let cov = m_ab[i] - ma * mb;
        let s = ((two * ma * mb + c1) * (two * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        sum = sum + s;
    }
    Ok(sum / F::c((w * h) as f64))
}

/// Bits per source pixel of a container: payload bits only, header and
/// stream framing excluded.
pub fn bpp(container: &CompressedContainer) -> f64 {
    let pixels =
        container.width as f64 * container.height as f64 * container.planes() as f64;
    8.0 * container.payload_bytes() as f64 / pixels
}

/// Which intra predictor the residue entropy is measured under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    Learned,
    Med,
}

/// Empirical Shannon entropy of the mapped intra residues of subimage 1,
/// normalized by the pixel count of the whole image.
pub fn residue_entropy<F: Real>(
    plane: &ImagePlane,
    predictor: Predictor,
    params: &CodecParams,
    table: &PredictorTable,
) -> Result<F> {
    let q = microshift_quantize(plane, params);
    let n = params.n();
    let m = params.m();
    let mid = 1u8 << (m - 1);
    let w = q.width();
    let level_at = |r: usize, c: usize| q.level(r, c);

    let mut hist = vec![0u64; params.level_count()];
    let mut count = 0u64;
    for row in (0..q.height()).step_by(n) {
        for col in (0..w).step_by(n) {
            let tpl = subimage_template(&level_at, w, row, col, params);
            let xhat = if tpl.first {
                mid
            } else {
                match predictor {
                    Predictor::Learned => predict_intra(&tpl, table),
                    Predictor::Med => med_predict(&tpl),
                }
            };
            let x = q.level(row, col);
            let mapped = map_residue(x as i32 - xhat as i32, xhat, m)?;
            hist[mapped as usize] += 1;
            count += 1;
        }
    }

    let mut bits = 0.0f64;
    for &c in &hist {
        if c > 0 {
            let p = c as f64 / count as f64;
            bits -= p * p.log2();
        }
    }
    Ok(F::c(bits * count as f64 / (plane.width() * plane.height()) as f64))
}

/// key=value lines consumed by the evaluation tooling.
pub fn format_report(psnr_db: Option<f64>, ssim_v: Option<f64>, bpp_v: Option<f64>) -> String {
    let mut out = String::new();
    if let Some(v) = psnr_db {
        out.push_str(&format!("psnr_db={v:.4}\n"));
    }
    if let Some(v) = ssim_v {
        out.push_str(&format!("ssim={v:.6}\n"));
    }
    if let Some(v) = bpp_v {
        out.push_str(&format!("bpp={v:.4}\n"));
    }
    out
}
