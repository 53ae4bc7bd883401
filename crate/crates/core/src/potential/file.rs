use std::path::Path;

use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{PiecewiseConstant, Potential, Sampled, TrigPoly};
use crate::{Error, KpParams, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// On-disk potential description, tagged by `kind`:
///
/// ```json
/// {"kind": "trig_poly", "coefficients": [{"k": 1, "re": 0.5, "im": 0.0}]}
/// {"kind": "piecewise", "breakpoints": [0.0, 0.5], "values": [-1.0, 1.0]}
/// {"kind": "sampled", "samples": [0.0, 1.0, 0.0, -1.0]}
/// {"kind": "kronig_penney", "a": -1.0, "b": 1.0, "c_num": 1, "c_den": 2}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialFile {
    TrigPoly { coefficients: Vec<TrigTerm> },
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    Sampled { samples: Vec<f64> },
    KronigPenney { a: f64, b: f64, c_num: i64, c_den: i64 },
}

impl PotentialFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_potential<T: Scalar>(&self) -> Result<Potential<T>> {
        match self {
            PotentialFile::TrigPoly { coefficients } => {
                let terms: Vec<(i64, Complex<T>)> = coefficients
                    .iter()
                    .map(|t| (t.k, Complex::new(T::lit(t.re), T::lit(t.im))))
                    .collect();
                Ok(Potential::TrigPoly(TrigPoly::from_terms(&terms)?))
            }
            PotentialFile::Piecewise { breakpoints, values } => Ok(Potential::PiecewiseConstant(
                PiecewiseConstant::new(
                    breakpoints.iter().map(|&x| T::lit(x)).collect(),
                    values.iter().map(|&v| T::lit(v)).collect(),
                )?,
            )),
            PotentialFile::Sampled { samples } => Ok(Potential::Sampled(Sampled::new(
                samples.iter().map(|&v| T::lit(v)).collect(),
            )?)),
            PotentialFile::KronigPenney { .. } => Ok(self.kronig_penney()?.expect("kp").potential()),
        }
    }

    /// Validated step parameters when this is a `kronig_penney` file.
    pub fn kronig_penney(&self) -> Result<Option<KpParams>> {
        match *self {
            PotentialFile::KronigPenney { a, b, c_num, c_den } => {
                if c_den == 0 {
                    return Err(Error::InvalidPotential("c_den must be nonzero".into()));
                }
                Ok(Some(KpParams::new(a, b, Ratio::new(c_num, c_den))?))
            }
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let trig = PotentialFile::parse(r#"{"kind":"trig_poly","coefficients":[{"k":1,"re":1.0}]}"#).unwrap();
        let p: Potential<f64> = trig.to_potential().unwrap();
        assert_eq!(p.fourier_coeff(-1), Complex::new(1.0, 0.0));

        let pw = PotentialFile::parse(r#"{"kind":"piecewise","breakpoints":[0.0,0.5],"values":[-1.0,1.0]}"#).unwrap();
        assert!(pw.to_potential::<f64>().is_ok());

        let s = PotentialFile::parse(r#"{"kind":"sampled","samples":[0.0,1.0,0.0,-1.0]}"#).unwrap();
        assert!(s.to_potential::<f32>().is_ok());

        let kp = PotentialFile::parse(r#"{"kind":"kronig_penney","a":-1.0,"b":1.0,"c_num":1,"c_den":2}"#).unwrap();
        let p: Potential<f64> = kp.to_potential().unwrap();
        assert!((p.fourier_coeff(1).im - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PotentialFile::parse(r#"{"kind":"square"}"#).is_err());
        let kp = PotentialFile::parse(r#"{"kind":"kronig_penney","a":-1.0,"b":2.0,"c_num":1,"c_den":2}"#).unwrap();
        assert!(kp.to_potential::<f64>().is_err());
        let kp = PotentialFile::parse(r#"{"kind":"kronig_penney","a":-1.0,"b":1.0,"c_num":1,"c_den":0}"#).unwrap();
        assert!(kp.to_potential::<f64>().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let f = PotentialFile::KronigPenney { a: -4.0, b: 2.0, c_num: 1, c_den: 3 };
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains(r#""kind":"kronig_penney""#));
        assert_eq!(PotentialFile::parse(&text).unwrap(), f);
    }
}
