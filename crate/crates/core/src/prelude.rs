pub(crate) use alloc::{format, string::String, vec, vec::Vec};
pub(crate) use num_complex::Complex64;
#[allow(unused_imports)]
pub(crate) use num_traits::Float;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
