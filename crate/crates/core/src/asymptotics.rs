//! Eigenvalue and gap estimates built only from Fourier coefficients.
//!
//! Pair `n` of a given parity sits near the free level `(πκ)²` with
//! `κ = 2n` (periodic) or `κ = 2n + 1` (antiperiodic). Spectral parameters
//! are passed as offsets `x = λ − (πκ)²`; the denominator belonging to a
//! partial index sum `P` is then `λ − (π(κ − 2P))² = x + 4π²P(κ − P)`, free
//! of cancellation.
//!
//! The iterated sums are
//!
//! ```text
//! a_k(x) = Σ q_{n_1}…q_{n_k} q_{−P_k} / Π_s D(P_s)
//! b_k(x) = Σ q_{n_1}…q_{n_k} q_{κ−P_k} / Π_s D(P_s)
//! ```
//!
//! over `n_s ≠ 0`, partial sums `P_s = n_1 + … + n_s ∉ {0, κ}` and
//! `|n_s| ≤ K`. They are evaluated by a transfer over `P`, which is exact
//! for trigonometric polynomials and costs `O(k·K²)` instead of `K^k`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::potential::{DerivedCoeffTable, FourierTable};
use crate::scalar::czero;
use crate::{Error, Parity, Result, Scalar};

/// Truncation and guard for the iterated sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    /// Cutoff `K` on every summation index `|n_s|`.
    pub cutoff: usize,
    /// Smallest allowed `|D(P)|` relative to `(πκ)²`.
    pub guard: f64,
}

impl SeriesParams {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, guard: 1e-8 }
    }

    /// Cutoff equal to the table half-width.
    pub fn for_table<T: Scalar>(t: &FourierTable<T>) -> Self {
        Self::new(t.k_max())
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::InvalidArgument("series cutoff must be at least 1".into()));
        }
        if !(self.guard > 0.0) {
            return Err(Error::InvalidArgument("denominator guard must be positive".into()));
        }
        Ok(())
    }
}

/// One eigenvalue estimate `λ ≈ (πκ)² + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate<T> {
    pub n: usize,
    pub j: usize,
    pub parity: Parity,
    pub order: usize,
    /// Offset from the free level `(πκ)²` of the mean-zero operator.
    pub offset: T,
    /// `(πκ)² + offset + mean shift`, comparable with oracle eigenvalues.
    pub value: T,
    pub a_part: Complex<T>,
    pub b_part: Complex<T>,
    /// The modulus term `|q_κ + B|` (or its second-order replacement).
    pub modulus: T,
    /// Estimated size of the contribution from indices beyond the cutoff.
    pub tail: T,
}

/// Iterated terms `a_1..a_k`, `b_1..b_k` at one offset.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerms<T> {
    pub a: Vec<Complex<T>>,
    pub b: Vec<Complex<T>>,
    pub cutoff: usize,
    pub tail: T,
}

impl<T: Scalar> SeriesTerms<T> {
    pub fn a_partial(&self) -> Complex<T> {
        self.a.iter().fold(czero(), |s, &v| s + v)
    }

    pub fn b_partial(&self) -> Complex<T> {
        self.b.iter().fold(czero(), |s, &v| s + v)
    }
}

fn sign<T: Scalar>(j: usize) -> T {
    if j == 1 {
        -T::one()
    } else {
        T::one()
    }
}

fn check_j(j: usize) -> Result<()> {
    if j == 1 || j == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("j must be 1 or 2".into()))
    }
}

/// Index cutoff actually summed: `min(K, K_max, degree)`.
fn effective_cutoff<T: Scalar>(t: &FourierTable<T>, sp: &SeriesParams) -> usize {
    sp.cutoff.min(t.effective_width())
}

/// Rough size of the neglected first-order terms, from the `|q_m| ≲ A/m`
/// envelope on the last octave below the cutoff.
fn tail_estimate<T: Scalar>(t: &FourierTable<T>, cutoff: usize) -> T {
    if t.support().is_some_and(|d| d <= cutoff) || cutoff == 0 {
        return T::zero();
    }
    let mut envelope = T::zero();
    for m in (cutoff / 2 + 1)..=cutoff {
        envelope = envelope.max(T::from_usize_(m) * t.modulus(m as i64));
    }
    let k = T::from_usize_(cutoff);
    envelope * envelope / (T::lit(6.0) * T::PI() * T::PI() * k * k * k)
}

/// `a_1..a_order` and `b_1..b_order` at offset `x` for pair `n`.
pub fn series_terms<T: Scalar>(
    t: &FourierTable<T>,
    parity: Parity,
    n: usize,
    x: T,
    order: usize,
    sp: &SeriesParams,
) -> Result<SeriesTerms<T>> {
    sp.validate()?;
    let kappa = parity.kappa(n);
    let k = effective_cutoff(t, sp) as i64;
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let guard = T::lit(sp.guard) * parity.free_level::<T>(n).max(T::one());
    let q = |m: i64| -> Complex<T> {
        if m.abs() > k {
            czero()
        } else {
            t.get(m)
        }
    };
    let denom = |p: i64| -> Result<T> {
        let d = x + four_pi2 * T::from_int(p) * T::from_int(kappa - p);
        if d.abs() < guard {
            return Err(Error::DenominatorGuard {
                partial_sum: p,
                denominator: d.as_f64(),
            });
        }
        Ok(d)
    };

    let mut a = Vec::with_capacity(order);
    let mut b = Vec::with_capacity(order);
    // w[P + off] holds the weight of partial sum P after s steps.
    let mut lo = 0_i64;
    let mut w: Vec<Complex<T>> = vec![Complex::new(T::one(), T::zero())];
    for _ in 0..order {
        let (nlo, nhi) = (lo - k, lo + w.len() as i64 - 1 + k);
        let mut next = vec![czero::<T>(); (nhi - nlo + 1) as usize];
        for (i, &wp) in w.iter().enumerate() {
            if wp.norm_sqr() == T::zero() {
                continue;
            }
            let p = lo + i as i64;
            for step in -k..=k {
                let qs = q(step);
                if step == 0 || qs.norm_sqr() == T::zero() {
                    continue;
                }
                let p2 = p + step;
                if p2 == 0 || p2 == kappa {
                    continue;
                }
                next[(p2 - nlo) as usize] += wp * qs;
            }
        }
        for (i, v) in next.iter_mut().enumerate() {
            if v.norm_sqr() != T::zero() {
                *v = *v / denom(nlo + i as i64)?;
            }
        }
        lo = nlo;
        w = next;
        let mut sa = czero::<T>();
        let mut sb = czero::<T>();
        for (i, &wp) in w.iter().enumerate() {
            if wp.norm_sqr() == T::zero() {
                continue;
            }
            let p = lo + i as i64;
            sa += wp * q(-p);
            sb += wp * q(kappa - p);
        }
        a.push(sa);
        b.push(sb);
    }
    Ok(SeriesTerms {
        a,
        b,
        cutoff: k as usize,
        tail: tail_estimate(t, k as usize),
    })
}

/// `a_k(x)` for pair `n`.
pub fn a_term<T: Scalar>(t: &FourierTable<T>, k_order: usize, parity: Parity, n: usize, x: T, sp: &SeriesParams) -> Result<Complex<T>> {
    order_at_least_one(k_order)?;
    Ok(series_terms(t, parity, n, x, k_order, sp)?.a[k_order - 1])
}

/// `b_k(x)` for pair `n`.
pub fn b_term<T: Scalar>(t: &FourierTable<T>, k_order: usize, parity: Parity, n: usize, x: T, sp: &SeriesParams) -> Result<Complex<T>> {
    order_at_least_one(k_order)?;
    Ok(series_terms(t, parity, n, x, k_order, sp)?.b[k_order - 1])
}

fn order_at_least_one(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidArgument("series order must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `A_m(x) = a_1 + … + a_m`.
pub fn a_partial<T: Scalar>(t: &FourierTable<T>, m: usize, parity: Parity, n: usize, x: T, sp: &SeriesParams) -> Result<Complex<T>> {
    if m == 0 {
        return Ok(czero());
    }
    Ok(series_terms(t, parity, n, x, m, sp)?.a_partial())
}

/// `B_m(x) = b_1 + … + b_m`.
pub fn b_partial<T: Scalar>(t: &FourierTable<T>, m: usize, parity: Parity, n: usize, x: T, sp: &SeriesParams) -> Result<Complex<T>> {
    if m == 0 {
        return Ok(czero());
    }
    Ok(series_terms(t, parity, n, x, m, sp)?.b_partial())
}

/// Grouped form of `a_1` at the free level:
/// `(1/2π²)·Σ_{k≥1, k≠κ} |q_k|²/((κ−k)(κ+k)) − |q_κ|²/(8π²κ²)`.
///
/// The last term is the unpaired index `n_1 = −κ`, whose partner `κ` is
/// excluded from the sum.
pub fn a1_closed<T: Scalar>(t: &FourierTable<T>, parity: Parity, n: usize) -> T {
    let kappa = parity.kappa(n);
    let pi2 = T::PI() * T::PI();
    let mut s = T::zero();
    for k in 1..=t.effective_width() as i64 {
        if k == kappa {
            continue;
        }
        let q2 = t.get(k).norm_sqr();
        if q2 != T::zero() {
            s += q2 / (T::from_int(kappa - k) * T::from_int(kappa + k));
        }
    }
    let kk = T::from_int(kappa);
    s / (T::lit(2.0) * pi2) - t.get(kappa).norm_sqr() / (T::lit(8.0) * pi2 * kk * kk)
}

/// `2|q_k|`.
pub fn gap_first_order<T: Scalar>(t: &FourierTable<T>, k: i64) -> T {
    t.get(k).norm() * T::lit(2.0)
}

/// `q_k − S_k + 2Q_0Q_k`.
pub fn second_order_coupling<T: Scalar>(t: &FourierTable<T>, d: &DerivedCoeffTable<T>, k: i64) -> Complex<T> {
    t.get(k) - d.square(k) + d.antiderivative(k) * (d.q0() * T::lit(2.0))
}

/// `2|q_k − S_k + 2Q_0Q_k|`.
pub fn gap_second_order<T: Scalar>(t: &FourierTable<T>, d: &DerivedCoeffTable<T>, k: i64) -> T {
    second_order_coupling(t, d, k).norm() * T::lit(2.0)
}

fn estimate<T: Scalar>(
    t: &FourierTable<T>,
    parity: Parity,
    n: usize,
    j: usize,
    order: usize,
    offset: T,
    parts: (Complex<T>, Complex<T>, T, T),
) -> AsymptoticEstimate<T> {
    AsymptoticEstimate {
        n,
        j,
        parity,
        order,
        offset,
        value: parity.free_level::<T>(n) + offset + t.mean_shift(),
        a_part: parts.0,
        b_part: parts.1,
        modulus: parts.2,
        tail: parts.3,
    }
}

/// `(πκ)² + (−1)^j |q_κ|`.
pub fn eig_first_order<T: Scalar>(t: &FourierTable<T>, n: usize, j: usize, parity: Parity) -> Result<AsymptoticEstimate<T>> {
    check_j(j)?;
    let kappa = parity.kappa(n);
    let modulus = t.get(kappa).norm();
    Ok(estimate(t, parity, n, j, 1, sign::<T>(j) * modulus, (czero(), czero(), modulus, T::zero())))
}

/// `(πκ)² + A_2(0) + (−1)^j |q_κ − S_κ + 2Q_0Q_κ|`.
pub fn eig_second_order<T: Scalar>(
    t: &FourierTable<T>,
    d: &DerivedCoeffTable<T>,
    n: usize,
    j: usize,
    parity: Parity,
    sp: &SeriesParams,
) -> Result<AsymptoticEstimate<T>> {
    check_j(j)?;
    let kappa = parity.kappa(n);
    let terms = series_terms(t, parity, n, T::zero(), 2, sp)?;
    let a2 = terms.a_partial();
    let coupling = second_order_coupling(t, d, kappa);
    let modulus = coupling.norm();
    let offset = a2.re + sign::<T>(j) * modulus;
    Ok(estimate(t, parity, n, j, 2, offset, (a2, coupling - t.get(kappa), modulus, terms.tail)))
}

/// Result of the `E` recursion with every iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recursion<T> {
    pub estimate: AsymptoticEstimate<T>,
    /// Offsets of `E_0, …, E_m` from the free level.
    pub trace: Vec<T>,
}

/// `E_0 = (πκ)²`, `E_k = (πκ)² + Re A_k(E_{k−1}) + (−1)^j |q_κ + B_k(E_{k−1})|`.
pub fn e_recursion<T: Scalar>(
    t: &FourierTable<T>,
    parity: Parity,
    n: usize,
    j: usize,
    m: usize,
    sp: &SeriesParams,
) -> Result<Recursion<T>> {
    check_j(j)?;
    sp.validate()?;
    let kappa = parity.kappa(n);
    let qk = t.get(kappa);
    let mut x = T::zero();
    let mut trace = vec![x];
    let mut parts = (czero(), czero(), qk.norm(), T::zero());
    for k in 1..=m {
        let terms = series_terms(t, parity, n, x, k, sp)?;
        let (ak, bk) = (terms.a_partial(), terms.b_partial());
        let modulus = (qk + bk).norm();
        x = ak.re + sign::<T>(j) * modulus;
        parts = (ak, bk, modulus, terms.tail);
        trace.push(x);
    }
    Ok(Recursion {
        estimate: estimate(t, parity, n, j, m, x, parts),
        trace,
    })
}

/// `E_{n,2,m} − E_{n,1,m}`, floored at zero; `m ≥ 2`.
pub fn gap_order_m<T: Scalar>(t: &FourierTable<T>, n: usize, m: usize, parity: Parity, sp: &SeriesParams) -> Result<T> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "gap_order_m needs m >= 2; use gap_first_order or gap_second_order".into(),
        ));
    }
    let lower = e_recursion(t, parity, n, 1, m, sp)?.estimate.offset;
    let upper = e_recursion(t, parity, n, 2, m, sp)?.estimate.offset;
    Ok((upper - lower).max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    /// `|q_κ| ≥ ε/n`
    #[serde(rename = "43")]
    FirstOrder,
    /// `|q_κ − S_κ + 2Q_0Q_κ| ≥ ε/n²`
    #[serde(rename = "49")]
    SecondOrder,
    /// `|q_κ + B_m(E_{n,j,m−1})| ≥ ε/n^m` for both `j`
    #[serde(rename = "52")]
    Recursion,
}

impl std::str::FromStr for ConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "43" => Ok(ConditionKind::FirstOrder),
            "49" => Ok(ConditionKind::SecondOrder),
            "52" => Ok(ConditionKind::Recursion),
            other => Err(Error::InvalidArgument(format!("unknown condition kind '{other}'"))),
        }
    }
}

/// Evaluates the non-degeneracy condition of the requested kind at pair `n`.
#[allow(clippy::too_many_arguments)]
pub fn condition_check<T: Scalar>(
    t: &FourierTable<T>,
    d: &DerivedCoeffTable<T>,
    parity: Parity,
    n: usize,
    eps: T,
    kind: ConditionKind,
    m: usize,
    sp: &SeriesParams,
) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("condition needs n >= 1".into()));
    }
    let kappa = parity.kappa(n);
    let nn = T::from_usize_(n);
    Ok(match kind {
        ConditionKind::FirstOrder => t.get(kappa).norm() >= eps / nn,
        ConditionKind::SecondOrder => second_order_coupling(t, d, kappa).norm() >= eps / (nn * nn),
        ConditionKind::Recursion => {
            if m == 0 {
                return Err(Error::InvalidArgument("condition 52 needs m >= 1".into()));
            }
            let bound = eps / nn.powi(m as i32);
            let mut ok = true;
            for j in 1..=2 {
                let prev = e_recursion(t, parity, n, j, m - 1, sp)?.estimate.offset;
                let bm = b_partial(t, m, parity, n, prev, sp)?;
                ok &= (t.get(kappa) + bm).norm() >= bound;
            }
            ok
        }
    })
}

/// `√2·sin(θx + α/2)` for `j = 1`, `√2·cos(θx + α/2)` for `j = 2`, with
/// `θ = πκ` and `α = arg q_κ`.
pub fn eigenfunction_model<T: Scalar>(t: &FourierTable<T>, n: usize, j: usize, parity: Parity, x: T) -> Result<T> {
    check_j(j)?;
    let kappa = parity.kappa(n);
    let alpha = t.phase(kappa)?;
    let arg = T::PI() * T::from_int(kappa) * x + alpha / T::lit(2.0);
    let s2 = T::lit(2.0).sqrt();
    Ok(if j == 1 { s2 * arg.sin() } else { s2 * arg.cos() })
}

#[cfg(test)]
mod tests;
