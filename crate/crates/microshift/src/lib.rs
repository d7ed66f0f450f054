//! Microshift image codec.
//!
//! The encoder adds a periodic per-pixel shift pattern before coarse
//! M-bit quantization (with modulo wrap instead of clipping), then
//! losslessly compresses the N^2 subimages with context-predictive coding:
//! a learned 313-context predictor for the first subimage, cross-subimage
//! prediction for the rest, adaptive Rice codes, and a run mode for
//! uniform regions. Encoding is a single raster scan whose retained state
//! is bounded by a few image rows.
//!
//! Three reconstructions are provided: per-pixel uncertainty-interval
//! intersection ([`fastdec::heuristic_decode`]), the same followed by an
//! edge-preserving weighted-least-squares smoother ([`fastdec::fast_decode`]),
//! and MAP estimation over a Markov random field solved by alpha-expansion
//! graph cuts ([`mrf::mrf_decode`]). All decoders also run from a prefix of
//! subimage streams for progressive transmission.
//!
//! Floating-point lanes (smoothing, MRF energies, metrics) are generic
//! over the [`real::Real`] scalar; the codec lane is integer and bit-exact.

pub mod coding;
pub mod container;
pub mod context;
pub mod decoder;
pub mod encoder;
mod error;
pub mod fastdec;
pub mod image;
pub mod metrics;
pub mod mrf;
pub mod quant;
pub mod real;

pub use error::{Error, Result};

/// Default scalar for the floating-point lanes.
pub type Scalar = f64;

/// WLS smoother parameters in the default scalar.
pub type WlsParamsF64 = fastdec::WlsParams<f64>;
/// WLS smoother parameters in f32.
pub type WlsParamsF32 = fastdec::WlsParams<f32>;
/// MRF decoder parameters in the default scalar.
pub type MrfParamsF64 = mrf::MrfParams<f64>;
/// MRF decoder parameters in f32.
pub type MrfParamsF32 = mrf::MrfParams<f32>;

/// The predictor table shipped with the crate, trained on a synthetic
/// natural-statistics corpus disjoint from the test images.
pub fn default_table() -> context::PredictorTable {
    context::PredictorTable::from_bytes(include_bytes!("default_table.bin"))
        .expect("embedded table is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn embedded_table_parses() {
        let t = super::default_table();
        assert_eq!(t.m(), 3);
    }
}
