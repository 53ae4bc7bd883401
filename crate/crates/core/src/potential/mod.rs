//! One-periodic real potentials and their Fourier data.
//!
//! Coefficients follow `q_k = ∫₀¹ q(x) e^{-2πikx} dx`. Every table built here
//! is for the mean-zero potential; the removed mean is kept as an additive
//! eigenvalue shift.

mod derived;
mod file;
mod table;

pub use derived::{derived_coeffs, DerivedCoeffTable};
pub use file::PotentialFile;
pub use table::{fourier_table, FourierTable};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{cis_rational, cis_turns, czero};
use crate::{Error, Result, Scalar};

/// Finite real trigonometric polynomial, stored by its non-negative
/// frequencies; `c_{-k} = conj(c_k)` holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> TrigPoly<T> {
    pub fn zero() -> Self {
        Self {
            coeffs: vec![czero()],
        }
    }

    /// `constant + Σ_k (c_k e^{2πikx} + conj(c_k) e^{-2πikx})` for `k ≥ 1`.
    pub fn from_positive(constant: T, terms: &[(usize, Complex<T>)]) -> Self {
        let degree = terms.iter().map(|&(k, _)| k).max().unwrap_or(0);
        let mut coeffs = vec![czero(); degree + 1];
        coeffs[0] = Complex::new(constant, T::zero());
        for &(k, c) in terms {
            if k > 0 {
                coeffs[k] += c;
            }
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    /// Builds from two-sided `(k, c_k)` pairs. A frequency given on one side
    /// only is mirrored; given on both sides it must be conjugate-symmetric.
    pub fn from_terms(terms: &[(i64, Complex<T>)]) -> Result<Self> {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<i64, Complex<T>> = BTreeMap::new();
        for &(k, c) in terms {
            *map.entry(k).or_insert_with(czero) += c;
        }
        let degree = map.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let tol = T::lit(1e-12);
        let mut coeffs = vec![czero(); degree + 1];
        if let Some(c0) = map.get(&0) {
            if c0.im.abs() > tol * (T::one() + c0.re.abs()) {
                return Err(Error::InvalidPotential(
                    "constant term of a real potential must be real".into(),
                ));
            }
            coeffs[0] = Complex::new(c0.re, T::zero());
        }
        for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
            let k = k as i64;
            *slot = match (map.get(&k), map.get(&-k)) {
                (Some(&p), Some(&m)) => {
                    let scale = T::one() + p.norm();
                    if (p - m.conj()).norm() > tol * scale {
                        return Err(Error::InvalidPotential(format!(
                            "coefficients at ±{k} are not conjugate: potential is not real"
                        )));
                    }
                    p
                }
                (Some(&p), None) => p,
                (None, Some(&m)) => m.conj(),
                (None, None) => czero(),
            };
        }
        let mut p = Self { coeffs };
        p.trim();
        Ok(p)
    }

    /// `2·amplitude·cos(2πkx)`, i.e. `c_{±k} = amplitude`.
    pub fn cosine(amplitude: T, k: usize) -> Self {
        Self::from_positive(T::zero(), &[(k, Complex::new(amplitude, T::zero()))])
    }

    /// Mean-zero polynomial with independent Gaussian-like coefficients of
    /// size `scale`, reproducible from `seed`.
    pub fn random(degree: usize, scale: T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<(usize, Complex<T>)> = (1..=degree)
            .map(|k| {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                (k, Complex::new(T::lit(re) * scale, T::lit(im) * scale))
            })
            .collect();
        Self::from_positive(T::zero(), &terms)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.norm_sqr().is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        let a = k.unsigned_abs() as usize;
        match self.coeffs.get(a) {
            None => czero(),
            Some(&c) if k >= 0 => c,
            Some(&c) => c.conj(),
        }
    }
}

/// Step function: piece `i` takes `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// the last piece wrapping through `x = 1 ≡ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> PiecewiseConstant<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidPotential(
                "piecewise potential needs one value per breakpoint".into(),
            ));
        }
        if breakpoints
            .iter()
            .any(|&x| !(x >= T::zero() && x < T::one()))
        {
            return Err(Error::InvalidPotential("breakpoints must lie in [0, 1)".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPotential("breakpoints must be strictly ascending".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("piece values must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: T) -> Self {
        Self {
            breakpoints: vec![T::zero()],
            values: vec![value],
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn lengths(&self) -> impl Iterator<Item = T> + '_ {
        let n = self.breakpoints.len();
        (0..n).map(move |i| {
            let end = if i + 1 < n {
                self.breakpoints[i + 1]
            } else {
                self.breakpoints[0] + T::one()
            };
            end - self.breakpoints[i]
        })
    }

    fn mean(&self) -> T {
        self.values.iter().zip(self.lengths()).map(|(&v, l)| v * l).sum()
    }

    /// Closed form via the jumps: `q_k = Σ_i (v_i − v_{i−1}) e^{-2πikx_i} / (2πik)`.
    fn coeff(&self, k: i64) -> Complex<T> {
        if k == 0 {
            return Complex::new(self.mean(), T::zero());
        }
        let n = self.values.len();
        let kk = T::from_int(k);
        let mut acc = czero::<T>();
        for i in 0..n {
            let jump = self.values[i] - self.values[(i + n - 1) % n];
            if jump != T::zero() {
                acc += cis_turns(-kk * self.breakpoints[i]) * jump;
            }
        }
        acc / Complex::new(T::zero(), T::two_pi() * kk)
    }

    fn value(&self, x: T) -> T {
        let x = x - x.floor();
        match self.breakpoints.iter().rposition(|&b| b <= x) {
            Some(i) => self.values[i],
            None => *self.values.last().expect("nonempty"),
        }
    }
}

/// Real samples `q(j/N)`, `j = 0..N`, on a uniform grid over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled<T> {
    samples: Vec<T>,
}

impl<T: Scalar> Sampled<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPotential("need at least two samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("samples must be finite".into()));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let nn = T::from_usize_(n);
        Self::new((0..n).map(|j| f(T::from_usize_(j) / nn)).collect())
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// Largest `K_max` with `2·K_max < N`.
    pub fn nyquist_limit(&self) -> usize {
        (self.samples.len() - 1) / 2
    }

    fn mean(&self) -> T {
        self.samples.iter().copied().sum::<T>() / T::from_usize_(self.samples.len())
    }

    /// Trapezoidal rule on the periodic grid (a DFT). Exact when the
    /// potential is band-limited below Nyquist; otherwise the error is the
    /// aliased mass `Σ_{l≠0} |q_{k+lN}|`.
    fn coeff(&self, k: i64) -> Complex<T> {
        let n = self.samples.len() as i64;
        let mut acc = czero::<T>();
        for (j, &v) in self.samples.iter().enumerate() {
            acc += cis_rational::<T>(-k * j as i64, n) * v;
        }
        acc / T::from_int(n)
    }

    fn value(&self, x: T) -> T {
        let n = self.samples.len();
        let pos = (x - x.floor()) * T::from_usize_(n);
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 1);
        let frac = pos - T::from_usize_(i);
        self.samples[i] * (T::one() - frac) + self.samples[(i + 1) % n] * frac
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential<T> {
    TrigPoly(TrigPoly<T>),
    PiecewiseConstant(PiecewiseConstant<T>),
    Sampled(Sampled<T>),
}

impl<T: Scalar> Potential<T> {
    pub fn zero() -> Self {
        Potential::TrigPoly(TrigPoly::zero())
    }

    /// `q(x) = 2a·cos(2πx)`, the Mathieu potential.
    pub fn mathieu(a: T) -> Self {
        Potential::TrigPoly(TrigPoly::cosine(a, 1))
    }

    /// Two-valued step with `b` on `(c, 1]` and the `a` that makes the mean
    /// zero; for floating `c` (use [`crate::KpParams`] for exact rational c).
    pub fn step(b: T, c: T) -> Result<Self> {
        if !(c > T::zero() && c < T::one()) {
            return Err(Error::InvalidPotential("step position must lie in (0, 1)".into()));
        }
        let a = -b * (T::one() - c) / c;
        Ok(Potential::PiecewiseConstant(PiecewiseConstant::new(
            vec![T::zero(), c],
            vec![a, b],
        )?))
    }

    /// Evaluates `q(x)`; sampled potentials interpolate linearly.
    pub fn value(&self, x: T) -> T {
        match self {
            Potential::TrigPoly(p) => {
                let mut acc = p.coeffs[0].re;
                for (k, c) in p.coeffs.iter().enumerate().skip(1) {
                    let z = cis_turns(T::from_usize_(k) * x) * *c;
                    acc += z.re + z.re;
                }
                acc
            }
            Potential::PiecewiseConstant(p) => p.value(x),
            Potential::Sampled(p) => p.value(x),
        }
    }

    pub fn mean(&self) -> T {
        match self {
            Potential::TrigPoly(p) => p.coeffs[0].re,
            Potential::PiecewiseConstant(p) => p.mean(),
            Potential::Sampled(p) => p.mean(),
        }
    }

    /// Degree of a trigonometric polynomial; `None` for potentials whose
    /// spectrum is not known to be finite.
    pub fn finite_support(&self) -> Option<usize> {
        match self {
            Potential::TrigPoly(p) => Some(p.degree()),
            _ => None,
        }
    }

    /// Subtracts the mean; every eigenvalue of the original operator equals
    /// the corresponding eigenvalue of the returned one plus `shift`.
    pub fn normalize_mean_zero(&self) -> (Self, T) {
        let shift = self.mean();
        let p = match self {
            Potential::TrigPoly(p) => {
                let mut p = p.clone();
                p.coeffs[0] = czero();
                p.trim();
                Potential::TrigPoly(p)
            }
            Potential::PiecewiseConstant(p) => Potential::PiecewiseConstant(PiecewiseConstant {
                breakpoints: p.breakpoints.clone(),
                values: p.values.iter().map(|&v| v - shift).collect(),
            }),
            Potential::Sampled(p) => Potential::Sampled(Sampled {
                samples: p.samples.iter().map(|&v| v - shift).collect(),
            }),
        };
        (p, shift)
    }

    /// `∫₀¹ q(x) e^{-2πikx} dx`: exact for trigonometric polynomials and
    /// step functions, trapezoidal for sampled potentials.
    pub fn fourier_coeff(&self, k: i64) -> Complex<T> {
        match self {
            Potential::TrigPoly(p) => p.coeff(k),
            Potential::PiecewiseConstant(p) => p.coeff(k),
            Potential::Sampled(p) => p.coeff(k),
        }
    }
}

pub fn normalize_mean_zero<T: Scalar>(p: &Potential<T>) -> (Potential<T>, T) {
    p.normalize_mean_zero()
}

pub fn fourier_coeff<T: Scalar>(p: &Potential<T>, k: i64) -> Complex<T> {
    p.fourier_coeff(k)
}
