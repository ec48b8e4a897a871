//! Scalar abstraction for the pointwise potential math.
//!
//! Everything in this crate is written against [`Real`] so the formulas can be
//! instantiated at `f32` or `f64`. The solver crates downstream pin `f64`
//! (their tolerance contracts are only meaningful there); the generic layer
//! exists so the core formulas stay precision-agnostic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable in the potential formulas.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-as-possible conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
