//! Scalar abstraction shared by every density, sampler and generator in the crate.
//!
//! All model arithmetic is written against [`Real`], which `f32` and `f64`
//! implement. Random variates are drawn through the trait so that generic code
//! does not need to restate `rand_distr` bounds at every call site.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Beta, Distribution, Open01, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the model can be evaluated in.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn of(x: f64) -> Self;

    /// Lossless (for `f64`) widening used by reports and file output.
    fn as_f64(self) -> f64;

    /// One standard normal variate (ziggurat method of `rand_distr`).
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One variate uniform on the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One Beta(a, b) variate.
    fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self {
                // Parameters are validated by `Hyperparams::validate`; a failure
                // here is a programming error.
                Beta::new(a, b)
                    .expect("beta parameters must be positive and finite")
                    .sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
