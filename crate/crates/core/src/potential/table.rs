use num_complex::Complex;

use super::Potential;
use crate::scalar::czero;
use crate::{Error, Result, Scalar};

/// Two-sided Fourier coefficients `q_k`, `|k| ≤ K_max`, of a mean-zero real
/// potential. `q_0 = 0` and `q_{-k} = conj(q_k)` hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable<T> {
    k_max: usize,
    coeffs: Vec<Complex<T>>,
    support: Option<usize>,
    mean_shift: T,
}

impl<T: Scalar> FourierTable<T> {
    /// Table from the coefficients `q_1..q_{K_max}`; negative indices are
    /// the conjugates. `support` marks a table whose coefficients vanish
    /// beyond that degree.
    pub fn from_positive(positive: &[Complex<T>], support: Option<usize>) -> Self {
        let k_max = positive.len();
        let mut coeffs = vec![czero(); 2 * k_max + 1];
        for (i, &c) in positive.iter().enumerate() {
            coeffs[k_max + i + 1] = c;
            coeffs[k_max - i - 1] = c.conj();
        }
        let support = support.map(|d| d.min(k_max));
        Self {
            k_max,
            coeffs,
            support,
            mean_shift: T::zero(),
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Degree of the potential when it is a trigonometric polynomial.
    pub fn support(&self) -> Option<usize> {
        self.support
    }

    pub fn is_finite_support(&self) -> bool {
        self.support.is_some()
    }

    /// Largest index that can carry a nonzero coefficient.
    pub fn effective_width(&self) -> usize {
        self.support.unwrap_or(self.k_max)
    }

    /// Mean removed from the potential before tabulation.
    pub fn mean_shift(&self) -> T {
        self.mean_shift
    }

    /// `q_k`, or zero outside the table.
    #[inline]
    pub fn get(&self, k: i64) -> Complex<T> {
        let a = k.unsigned_abs() as usize;
        if a > self.k_max {
            czero()
        } else {
            self.coeffs[(k + self.k_max as i64) as usize]
        }
    }

    /// `q_k` if the table determines it: inside the table, or anywhere for
    /// finite support.
    pub fn try_get(&self, k: i64) -> Option<Complex<T>> {
        if k.unsigned_abs() as usize <= self.k_max || self.support.is_some() {
            Some(self.get(k))
        } else {
            None
        }
    }

    /// Whether every `q_k` with `|k| ≤ width` is known.
    pub fn covers(&self, width: usize) -> bool {
        self.support.is_some() || width <= self.k_max
    }

    pub fn modulus(&self, k: i64) -> T {
        self.get(k).norm()
    }

    pub fn phase(&self, k: i64) -> Result<T> {
        let q = self.get(k);
        if q.norm() == T::zero() {
            return Err(Error::PhaseUndefined { index: k });
        }
        Ok(q.arg())
    }

    /// `Σ_k |q_k|` over the table, a proxy for the size of the potential.
    pub fn l1_mass(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Largest `|q_{-k} − conj(q_k)|` together with `|q_0|`.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = self.get(0).norm();
        for k in 1..=self.k_max as i64 {
            worst = worst.max((self.get(-k) - self.get(k).conj()).norm());
        }
        worst
    }

    /// Coefficients as a slice indexed by `k + K_max`.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.coeffs
    }
}

/// Tabulates `q_k` for `|k| ≤ K_max` of the mean-normalised potential.
pub fn fourier_table<T: Scalar>(p: &Potential<T>, k_max: usize) -> Result<FourierTable<T>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("K_max must be at least 1".into()));
    }
    if let Potential::Sampled(s) = p {
        if k_max > s.nyquist_limit() {
            return Err(Error::NyquistExceeded {
                samples: s.samples().len(),
                k_max,
                limit: s.nyquist_limit(),
            });
        }
    }
    let (normalized, shift) = p.normalize_mean_zero();
    let positive: Vec<Complex<T>> = (1..=k_max as i64)
        .map(|k| normalized.fourier_coeff(k))
        .collect();
    let mut table = FourierTable::from_positive(&positive, normalized.finite_support());
    table.mean_shift = shift;
    Ok(table)
}
