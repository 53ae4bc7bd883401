use num_complex::Complex;
use rustfft::FftPlanner;

use super::FourierTable;
use crate::scalar::czero;
use crate::{Error, Result, Scalar};

/// Fourier data of `Q(x) = ∫₀ˣ q` and `S(x) = Q(x)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedCoeffTable<T> {
    k_max: usize,
    conv_width: usize,
    q0: T,
    antiderivative: Vec<Complex<T>>,
    square: Vec<Complex<T>>,
    q0_tail: T,
    conv_tail: T,
}

impl<T: Scalar> DerivedCoeffTable<T> {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Convolution width actually used for `S_k`.
    pub fn conv_width(&self) -> usize {
        self.conv_width
    }

    /// `Q_0 = ∫₀¹ Q(x) dx`.
    pub fn q0(&self) -> T {
        self.q0
    }

    /// `Q_k`; `Q_0` at `k = 0`, zero outside the table.
    pub fn antiderivative(&self, k: i64) -> Complex<T> {
        self.lookup(&self.antiderivative, k)
    }

    /// `S_k`, zero outside the table.
    pub fn square(&self, k: i64) -> Complex<T> {
        self.lookup(&self.square, k)
    }

    /// Magnitude of the partial-sum tail removed from the `Q_0` series.
    pub fn q0_tail(&self) -> T {
        self.q0_tail
    }

    /// Estimated bound on the neglected convolution terms of `S_k`.
    pub fn conv_tail(&self) -> T {
        self.conv_tail
    }

    fn lookup(&self, v: &[Complex<T>], k: i64) -> Complex<T> {
        if k.unsigned_abs() as usize > self.k_max {
            czero()
        } else {
            v[(k + self.k_max as i64) as usize]
        }
    }
}

/// Computes `Q_k = q_k / (2πik)`, `Q_0 = −Σ_{k≠0} Q_k` and
/// `S_k = Σ_m Q_m Q_{k−m}` (including the `Q_0` terms).
///
/// For tables without finite support the `Q_0` series is extrapolated as
/// `2·P_K − P_{K/2}` from its partial sums, which cancels the `1/K` tail
/// produced by a jump of `q` at the origin.
pub fn derived_coeffs<T: Scalar>(t: &FourierTable<T>, k_conv: usize) -> Result<DerivedCoeffTable<T>> {
    let k_max = t.k_max();
    if k_conv < k_max {
        return Err(Error::InvalidArgument(format!(
            "convolution width {k_conv} is below the table half-width {k_max}"
        )));
    }
    let ki = k_max as i64;
    let mut big_q = vec![czero::<T>(); 2 * k_max + 1];
    for k in 1..=ki {
        let v = t.get(k) / Complex::new(T::zero(), T::two_pi() * T::from_int(k));
        big_q[(ki + k) as usize] = v;
        big_q[(ki - k) as usize] = v.conj();
    }

    // Σ_{k≠0} Q_k = 2 Re Σ_{k>0} Q_k, summed from the small end.
    let partial = |upto: usize| -> T {
        let mut s = T::zero();
        for k in (1..=upto as i64).rev() {
            s += big_q[(ki + k) as usize].re;
        }
        s + s
    };
    let (q0, q0_tail) = match t.support() {
        Some(d) => (-partial(d.min(k_max)), T::zero()),
        None => {
            let full = partial(k_max);
            let half = partial(k_max / 2);
            let tail = (full - half).abs();
            if k_max >= 4 {
                (-(full + full - half), tail)
            } else {
                (-full, tail)
            }
        }
    };
    big_q[k_max] = Complex::new(q0, T::zero());

    let conv_width = k_conv.min(k_max);
    let square = convolve_square(&big_q, k_max);

    let conv_tail = if t.is_finite_support() {
        T::zero()
    } else {
        // |q_m| ≲ A/|m| on the last octave ⇒ Σ_{|m|>K} |Q_m| ≤ A/(πK).
        let mut envelope = T::zero();
        for m in (k_max / 2 + 1)..=k_max {
            envelope = envelope.max(T::from_usize_(m) * t.modulus(m as i64));
        }
        let tail_q = envelope / (T::PI() * T::from_usize_(k_max));
        let sup_q: T = big_q.iter().map(|c| c.norm()).sum::<T>() + tail_q;
        (tail_q + tail_q) * sup_q
    };

    Ok(DerivedCoeffTable {
        k_max,
        conv_width,
        q0,
        antiderivative: big_q,
        square,
        q0_tail,
        conv_tail,
    })
}

/// `S_k = Σ_{|m|,|k−m| ≤ K} Q_m Q_{k−m}` for `|k| ≤ K` by zero-padded FFT.
fn convolve_square<T: Scalar>(big_q: &[Complex<T>], k_max: usize) -> Vec<Complex<T>> {
    let len = big_q.len();
    let fft_len = (2 * len - 1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);
    let mut buf = vec![czero::<T>(); fft_len];
    buf[..len].copy_from_slice(big_q);
    forward.process(&mut buf);
    for z in buf.iter_mut() {
        *z = *z * *z;
    }
    inverse.process(&mut buf);
    let scale = T::one() / T::from_usize_(fft_len);
    // Entry i of the linear convolution holds index k = i − 2K.
    let mut out = vec![czero::<T>(); len];
    let ki = k_max as i64;
    for k in 0..=ki {
        let v = buf[(k + 2 * ki) as usize] * scale;
        out[(ki + k) as usize] = v;
        out[(ki - k) as usize] = v.conj();
    }
    out[k_max] = Complex::new(out[k_max].re, T::zero());
    out
}
