//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point type the library computes in: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + NumAssign
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    #[inline]
    fn from_int(k: i64) -> Self {
        Self::from_i64(k).expect("integer is representable")
    }

    #[inline]
    fn from_usize_(k: usize) -> Self {
        Self::from_usize(k).expect("integer is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `exp(2πi·turns)`, exact at multiples of a quarter turn.
///
/// The argument is reduced modulo one before the trigonometric call, so
/// phases such as `k·c` with rational `c` hit 0, ±1 and ±i exactly.
pub fn cis_turns<T: Scalar>(turns: T) -> Complex<T> {
    let r = turns - turns.floor();
    let four = T::lit(4.0);
    let quarter = (r * four).round();
    let d = r - quarter / four;
    let (s, c) = (T::two_pi() * d).sin_cos();
    match quarter.to_i64().unwrap_or(0).rem_euclid(4) {
        0 => Complex::new(c, s),
        1 => Complex::new(-s, c),
        2 => Complex::new(-c, -s),
        _ => Complex::new(s, -c),
    }
}

/// `exp(2πi·num/den)` with the fraction reduced in integer arithmetic first.
pub fn cis_rational<T: Scalar>(num: i64, den: i64) -> Complex<T> {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    if r == 0 {
        return Complex::new(T::one(), T::zero());
    }
    cis_turns(T::from_int(r) / T::from_int(den))
}

/// Least-squares fit of `y = slope·x + intercept`; returns `(slope, intercept, r²)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}
