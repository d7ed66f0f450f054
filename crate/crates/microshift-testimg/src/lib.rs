//! Deterministic procedural grayscale scenes with natural-image statistics:
//! smooth illumination, piecewise-smooth objects with hard and soft edges,
//! band-limited texture, and mild sensor grain. The standard image set and
//! the training corpus draw from disjoint seed spaces.
//!
//! The classic USC-SIPI / Kodak test photographs are not redistributable
//! fixtures, so the evaluation suite runs on these stand-ins; the named
//! entries of [`standard_test_images`] are tuned to the complexity regime
//! of their namesakes (BPP around 1.0-1.7 at M=3, N=3, heuristic PSNR in
//! the low thirties).

use microshift::image::{ImagePlane, MultiPlaneImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Content knobs for one synthesized scene.
#[derive(Debug, Clone, Copy)]
pub struct SceneProfile {
    /// Number of solid objects (ellipses / rectangles / bars).
    pub shapes: usize,
    /// Amplitude of the band-limited value noise, in intensity units.
    pub texture_amp: f64,
    /// Fraction of shapes that carry extra fine texture.
    pub textured_fraction: f64,
    /// Standard deviation of the per-pixel sensor grain.
    pub grain_sigma: f64,
    /// Include a bright sky-like gradient reaching 255 (exercises the
    /// modulo wrap).
    pub bright_region: bool,
}

impl SceneProfile {
    pub fn smooth() -> Self {
        Self {
            shapes: 12,
            texture_amp: 12.0,
            textured_fraction: 0.4,
            grain_sigma: 2.2,
            bright_region: true,
        }
    }

    pub fn medium() -> Self {
        Self {
            shapes: 20,
            texture_amp: 18.0,
            textured_fraction: 0.6,
            grain_sigma: 2.8,
            bright_region: false,
        }
    }

    pub fn busy() -> Self {
        Self {
            shapes: 55,
            texture_amp: 12.0,
            textured_fraction: 0.5,
            grain_sigma: 1.6,
            bright_region: false,
        }
    }
}

// Bilinearly interpolated random lattice (one octave of value noise).
fn value_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, cell: usize, amp: f64) -> Vec<f64> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; w * h];
    for r in 0..h {
        let gy = r as f64 / cell as f64;
        let y0 = gy as usize;
        let fy = gy - y0 as f64;
        for c in 0..w {
            let gx = c as f64 / cell as f64;
            let x0 = gx as usize;
            let fx = gx - x0 as f64;
            let v00 = grid[y0 * gw + x0];
            let v01 = grid[y0 * gw + x0 + 1];
            let v10 = grid[(y0 + 1) * gw + x0];
            let v11 = grid[(y0 + 1) * gw + x0 + 1];
            let top = v00 * (1.0 - fx) + v01 * fx;
            let bot = v10 * (1.0 - fx) + v11 * fx;
            out[r * w + c] = amp * (top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

enum Shape {
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Bar { cx: f64, cy: f64, half_w: f64, angle: f64 },
}

impl Shape {
    // Signed distance-ish coverage: 1 inside, 0 outside, ramp of `soft` px.
    fn coverage(&self, x: f64, y: f64, soft: f64) -> f64 {
        let d = match self {
            Shape::Ellipse { cx, cy, rx, ry } => {
                let nx = (x - cx) / rx;
                let ny = (y - cy) / ry;
                (1.0 - (nx * nx + ny * ny).sqrt()) * rx.min(*ry)
            }
            Shape::Rect { x0, y0, x1, y1 } => {
                let dx = (x - x0).min(x1 - x);
                let dy = (y - y0).min(y1 - y);
                dx.min(dy)
            }
            Shape::Bar { cx, cy, half_w, angle } => {
                let (s, c) = angle.sin_cos();
                half_w - ((x - cx) * s - (y - cy) * c).abs()
            }
        };
        if soft <= 0.0 {
            if d >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            ((d / soft) + 0.5).clamp(0.0, 1.0)
        }
    }
}

/// Synthesize one grayscale plane. Scene geometry and fine detail draw
/// from separate streams of the seed, so detail knobs can change without
/// reshuffling the layout.
pub fn synth_plane(seed: u64, width: u16, height: u16, profile: &SceneProfile) -> ImagePlane {
    let mut layout = ChaCha8Rng::seed_from_u64(seed);
    let mut detail = ChaCha8Rng::seed_from_u64(seed ^ 0x00DE_7A11);
    let (w, h) = (width as usize, height as usize);

    // Large-scale illumination: coarse random lattice in [60, 190].
    let base_lattice = value_noise(&mut layout, w, h, (w.max(h) / 3).max(4), 60.0);
    let base_level = layout.gen_range(100.0..150.0);
    let mut img: Vec<f64> = base_lattice.iter().map(|v| base_level + v).collect();

    if profile.bright_region {
        // Sky band at the top fading to bright.
        let sky_h = h as f64 * layout.gen_range(0.2..0.4);
        for r in 0..h {
            if (r as f64) < sky_h {
                let t = 1.0 - r as f64 / sky_h;
                for c in 0..w {
                    let target = 215.0 + 40.0 * t;
                    let a = (t * 1.5).min(1.0);
                    img[r * w + c] = img[r * w + c] * (1.0 - a) + target * a;
                }
            }
        }
    }

    // Mid- to high-frequency undulation.
    for (cell, amp) in [(48usize, 0.8), (24, 0.5), (12, 0.3), (6, 0.25), (3, 0.35)] {
        if w > cell && h > cell {
            let layer = value_noise(&mut detail, w, h, cell, profile.texture_amp * amp);
            for (dst, v) in img.iter_mut().zip(&layer) {
                *dst += v;
            }
        }
    }

    // Objects, farthest first so later shapes overlap earlier ones.
    for _ in 0..profile.shapes {
        let kind = layout.gen_range(0..3);
        let shape = match kind {
            0 => Shape::Ellipse {
                cx: layout.gen_range(0.0..w as f64),
                cy: layout.gen_range(0.0..h as f64),
                rx: layout.gen_range(w as f64 * 0.04..w as f64 * 0.22),
                ry: layout.gen_range(h as f64 * 0.04..h as f64 * 0.22),
            },
            1 => {
                let x0 = layout.gen_range(0.0..w as f64 * 0.9);
                let y0 = layout.gen_range(0.0..h as f64 * 0.9);
                Shape::Rect {
                    x0,
                    y0,
                    x1: x0 + layout.gen_range(w as f64 * 0.05..w as f64 * 0.35),
                    y1: y0 + layout.gen_range(h as f64 * 0.05..h as f64 * 0.35),
                }
            }
            _ => Shape::Bar {
                cx: layout.gen_range(0.0..w as f64),
                cy: layout.gen_range(0.0..h as f64),
                half_w: layout.gen_range(1.5..w as f64 * 0.03),
                angle: layout.gen_range(0.0..std::f64::consts::PI),
            },
        };
        let intensity = layout.gen_range(25.0..235.0);
        let soft = if layout.gen_bool(0.6) { 0.0 } else { layout.gen_range(1.0..3.0) };
        let shading = layout.gen_range(-0.15..0.15);
        let textured = detail.gen_bool(profile.textured_fraction);
        let tex = if textured {
            Some(value_noise(&mut detail, w, h, 5, profile.texture_amp * 1.5))
        } else {
            None
        };
        for r in 0..h {
            for c in 0..w {
                let a = shape.coverage(c as f64, r as f64, soft);
                if a > 0.0 {
                    let mut v = intensity + shading * (r as f64 + c as f64) * 0.5;
                    if let Some(t) = &tex {
                        v += t[r * w + c];
                    }
                    let dst = &mut img[r * w + c];
                    *dst = *dst * (1.0 - a) + v * a;
                }
            }
        }
    }

    // Sensor grain.
    if profile.grain_sigma > 0.0 {
        let normal = Normal::new(0.0, profile.grain_sigma).unwrap();
        for v in &mut img {
            *v += normal.sample(&mut detail);
        }
    }

    let samples: Vec<u8> = img.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();
    ImagePlane::new(width, height, samples).expect("valid synth plane")
}

/// Uniform random noise plane (worst-case coding input).
pub fn noise_plane(seed: u64, width: u16, height: u16) -> ImagePlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_A5A5);
    let samples: Vec<u8> = (0..width as usize * height as usize).map(|_| rng.gen()).collect();
    ImagePlane::new(width, height, samples).expect("valid noise plane")
}

/// RGB scene: one luminance scene plus correlated per-channel offsets.
pub fn synth_rgb(seed: u64, width: u16, height: u16) -> MultiPlaneImage {
    let luma = synth_plane(seed, width, height, &SceneProfile::medium());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0C01_0C01);
    let chroma = value_noise(&mut rng, width as usize, height as usize, 32, 18.0);
    let shift = |p: &ImagePlane, s: f64, chroma_sign: f64| {
        let samples: Vec<u8> = p
            .samples()
            .iter()
            .zip(&chroma)
            .map(|(&v, &cband)| (v as f64 + s + chroma_sign * cband).round().clamp(0.0, 255.0) as u8)
            .collect();
        ImagePlane::new(width, height, samples).unwrap()
    };
    MultiPlaneImage::rgb(shift(&luma, 4.0, 1.0), shift(&luma, 0.0, -0.3), shift(&luma, -6.0, -1.0))
        .unwrap()
}

const TRAIN_SEED_BASE: u64 = 0x7123_0000;
const TEST_SEED_BASE: u64 = 0xA11C_E000;

/// Training corpus: `count` mixed-profile scenes at `size` x `size`,
/// seed-disjoint from every test image.
pub fn training_corpus(count: usize, size: u16) -> Vec<ImagePlane> {
    (0..count)
        .map(|i| {
            let profile = match i % 3 {
                0 => SceneProfile::smooth(),
                1 => SceneProfile::medium(),
                _ => SceneProfile::busy(),
            };
            synth_plane(TRAIN_SEED_BASE + i as u64, size, size, &profile)
        })
        .collect()
}

// Per-image content knobs: (shapes, texture_amp, textured_fraction,
// grain_sigma, bright_region). The three images with pinned evaluation
// bands (lena, peppers, airplane) are tuned to their namesakes' regime.
const STANDARD_SET: [(&str, (usize, f64, f64, f64, bool)); 12] = [
    ("lena", (30, 12.0, 0.35, 3.5, false)),
    ("peppers", (34, 10.0, 0.3, 3.4, false)),
    ("airplane", (30, 8.0, 0.25, 1.9, true)),
    ("boats", (36, 9.0, 0.3, 2.0, false)),
    ("goldhill", (36, 10.0, 0.35, 2.0, false)),
    ("barbara", (55, 12.0, 0.5, 2.2, false)),
    ("cameraman", (26, 7.0, 0.2, 1.6, true)),
    ("sailboat", (44, 9.0, 0.3, 2.0, false)),
    ("yacht", (38, 9.0, 0.3, 2.0, false)),
    ("man", (55, 12.0, 0.5, 2.2, false)),
    ("house", (26, 7.0, 0.2, 1.6, true)),
    ("milkdrop", (30, 8.0, 0.25, 1.8, false)),
];

/// The named 512x512 evaluation set (stand-ins for the usual photographic
/// test suite). Deterministic: repeated calls return identical pixels.
pub fn standard_test_images() -> Vec<(&'static str, ImagePlane)> {
    STANDARD_SET
        .iter()
        .enumerate()
        .map(|(i, (name, (shapes, texture_amp, textured_fraction, grain_sigma, bright_region)))| {
            let profile = SceneProfile {
                shapes: *shapes,
                texture_amp: *texture_amp,
                textured_fraction: *textured_fraction,
                grain_sigma: *grain_sigma,
                bright_region: *bright_region,
            };
            (*name, synth_plane(TEST_SEED_BASE + i as u64, 512, 512, &profile))
        })
        .collect()
}

/// One named standard image.
pub fn standard_image(name: &str) -> ImagePlane {
    standard_test_images()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p)
        .unwrap_or_else(|| panic!("unknown standard image {name}"))
}
