//! Scalar abstraction for the floating-point lanes (smoothing, MRF
//! energies, metrics). The integer codec path is deliberately concrete;
//! everything that does real arithmetic is generic over [`Real`] so the
//! same code runs in f32 or f64.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar with the few extras the codec needs beyond
/// `num_traits::Float`.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Conversion from an f64 constant; infallible for f32/f64.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable")
    }

    /// Complementary error function, fractional accuracy about 1.2e-7
    /// everywhere (Chebyshev fit on t = 1/(1 + x/2)), which keeps deep
    /// tails meaningful where naive `1 - erf` underflows.
    fn erfc(self) -> Self {
        let z = self.abs();
        let t = Self::one() / (Self::one() + z / Self::c(2.0));
        let poly = Self::c(-1.26551223)
            + t * (Self::c(1.00002368)
                + t * (Self::c(0.37409196)
                    + t * (Self::c(0.09678418)
                        + t * (Self::c(-0.18628806)
                            + t * (Self::c(0.27886807)
                                + t * (Self::c(-1.13520398)
                                    + t * (Self::c(1.48851587)
                                        + t * (Self::c(-0.82215223)
                                            + t * Self::c(0.17087277)))))))));
        let ans = t * (-z * z + poly).exp();
        if self >= Self::zero() {
            ans
        } else {
            Self::c(2.0) - ans
        }
    }

    fn erf(self) -> Self {
        Self::one() - self.erfc()
    }
}

impl<T: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static> Real for T {}
