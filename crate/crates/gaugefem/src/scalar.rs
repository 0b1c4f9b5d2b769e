//! Floating-point scalar abstraction: every numerical kernel in this crate is
//! generic over [`Real`], instantiated as `f32` or `f64`.

use num_traits as nt;

/// Scalar type for all field arithmetic.
pub trait Real:
    nt::Float
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal conversion")
    }

    /// Convert a `usize` count into this scalar type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
