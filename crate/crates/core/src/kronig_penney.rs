//! Closed forms for the two-valued step potential: `a` on `[0, c]`, `b` on
//! `(c, 1]`, with `ac + (1 − c)b = 0`.

use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::potential::{PiecewiseConstant, Potential};
use crate::scalar::cis_rational;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpParams {
    pub a: f64,
    pub b: f64,
    pub c: Ratio<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapRate {
    /// `δ_k ~ 1/k²`
    Quadratic,
    /// `δ_k ~ 1/k`
    Linear,
}

impl GapRate {
    pub fn name(self) -> &'static str {
        match self {
            GapRate::Quadratic => "quadratic",
            GapRate::Linear => "linear",
        }
    }
}

/// `(Q_0, Q_k, leading term of S_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KpDerived<T> {
    pub q0: T,
    pub qk: Complex<T>,
    pub sk_leading: Complex<T>,
}

fn check_cut(c: Ratio<i64>) -> Result<()> {
    if !(c > Ratio::from_integer(0) && c < Ratio::from_integer(1)) {
        return Err(Error::InvalidPotential(format!("cut position {c} must lie in (0, 1)")));
    }
    Ok(())
}

impl KpParams {
    /// Validates explicit `(a, b, c)`.
    pub fn new(a: f64, b: f64, c: Ratio<i64>) -> Result<Self> {
        check_cut(c)?;
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::InvalidPotential("need a < 0 < b".into()));
        }
        let cf = ratio_f64(c);
        let mean = a * cf + (1.0 - cf) * b;
        if mean.abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
            return Err(Error::InvalidPotential(format!(
                "ac + (1 - c)b = {mean:e}, the potential must have zero mean"
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn c_f64(&self) -> f64 {
        ratio_f64(self.c)
    }

    /// Denominator `m` of `c = p/m` in lowest terms.
    pub fn denominator(&self) -> i64 {
        *self.c.reduced().denom()
    }

    /// The equivalent piecewise-constant potential.
    pub fn potential<T: Scalar>(&self) -> Potential<T> {
        Potential::PiecewiseConstant(
            PiecewiseConstant::new(
                vec![T::zero(), T::lit(self.c_f64())],
                vec![T::lit(self.a), T::lit(self.b)],
            )
            .expect("validated step"),
        )
    }

    /// `e^{-2πikc}` with the exact rational phase.
    fn phase<T: Scalar>(&self, k: i64) -> Complex<T> {
        let c = self.c.reduced();
        cis_rational(-k * c.numer(), *c.denom())
    }
}

fn ratio_f64(c: Ratio<i64>) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

/// Parameters with `a = −b(1 − c)/c`, the unique value giving zero mean.
pub fn kp_make(b: f64, c: Ratio<i64>) -> Result<KpParams> {
    check_cut(c)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidPotential("b must be positive".into()));
    }
    let c = c.reduced();
    let (p, m) = (*c.numer() as f64, *c.denom() as f64);
    let a = -b * (m - p) / p;
    KpParams::new(a, b, c)
}

fn nonzero(k: i64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be nonzero".into()));
    }
    Ok(())
}

/// `q_k = (a − b)/(2πki) · (1 − e^{−2πikc})`.
pub fn kp_qk<T: Scalar>(params: &KpParams, k: i64) -> Result<Complex<T>> {
    nonzero(k)?;
    let one = Complex::new(T::one(), T::zero());
    let denom = Complex::new(T::zero(), T::two_pi() * T::from_int(k));
    Ok((one - params.phase::<T>(k)) * T::lit(params.a - params.b) / denom)
}

/// `Q_0 = b(c − 1)/2`, `Q_k = (a − b)/(2πk)² · (e^{−2πikc} − 1)` and
/// `S_k ≈ −2ab·e^{−2πikc}/(2πk)²`.
pub fn kp_derived<T: Scalar>(params: &KpParams, k: i64) -> Result<KpDerived<T>> {
    nonzero(k)?;
    let w = T::two_pi() * T::from_int(k);
    let w2 = w * w;
    let e = params.phase::<T>(k);
    let one = Complex::new(T::one(), T::zero());
    Ok(KpDerived {
        q0: T::lit(params.b * (params.c_f64() - 1.0) / 2.0),
        qk: (e - one) * (T::lit(params.a - params.b) / w2),
        sk_leading: e * (T::lit(-2.0 * params.a * params.b) / w2),
    })
}

/// `2|q_k − S_k + 2Q_0Q_k|` with the closed forms above.
pub fn kp_gap_leading<T: Scalar>(params: &KpParams, k: i64) -> Result<T> {
    let q = kp_qk::<T>(params, k)?;
    let d = kp_derived::<T>(params, k)?;
    let two = T::lit(2.0);
    Ok((q - d.sk_leading + d.qk * (two * d.q0)).norm() * two)
}

/// Quadratic decay exactly when the denominator of `c` divides `k`.
pub fn kp_rate_classify(params: &KpParams, k: i64) -> GapRate {
    if k % params.denominator() == 0 {
        GapRate::Quadratic
    } else {
        GapRate::Linear
    }
}

/// Parses `"p/q"` or an integer into a reduced rational.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let bad = || Error::InvalidArgument(format!("'{s}' is not a rational p/q"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}
