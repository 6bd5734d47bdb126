//! Scalar abstraction shared by every numerical module.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::FromPrimitive;

/// Real floating-point scalar usable by the dense kernels: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + rustfft::FftNum {}

impl Real for f32 {}
impl Real for f64 {}

/// Complex dense matrix over a real scalar.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Complex dense column vector over a real scalar.
pub type CVector<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_subset(&x)
}

/// Converts the working scalar into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

/// A tolerance that never drops below what the scalar can resolve.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    let floor = T::default_epsilon() * lit::<T>(256.0);
    let t = lit::<T>(x);
    if t > floor {
        t
    } else {
        floor
    }
}

/// Real number lifted into the complex plane.
#[inline]
pub fn cx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Neumaier compensated accumulator; summation order is fixed by the caller.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }
}

impl<T: Real> KahanSum<T> {
    /// Adds one term.
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Compensated total.
    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence in iteration order.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut acc = KahanSum::default();
    for x in it {
        acc.add(x);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn tolerance_floor_for_single_precision() {
        assert!(tol::<f32>(1e-12) > 1e-6);
        assert_eq!(tol::<f64>(1e-12), 1e-12);
    }
}
