use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Boundary condition `y(1) = e^{it} y(0)` with `t = 0` or `t = π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Periodic,
    Antiperiodic,
}

impl Parity {
    /// Offset of the basis frequencies: `2πm + π·tau`.
    pub fn tau(self) -> i64 {
        match self {
            Parity::Periodic => 0,
            Parity::Antiperiodic => 1,
        }
    }

    /// Fourier index of the gap: `2n` or `2n + 1`.
    pub fn kappa(self, n: usize) -> i64 {
        2 * n as i64 + self.tau()
    }

    pub fn quasimomentum<T: Scalar>(self) -> T {
        T::PI() * T::from_int(self.tau())
    }

    /// Unperturbed double eigenvalue `(πκ)²` around which pair `n` sits.
    pub fn free_level<T: Scalar>(self, n: usize) -> T {
        let w = T::PI() * T::from_int(self.kappa(n));
        w * w
    }

    /// Galerkin basis indices carrying the frequencies `+πκ` and `−πκ`.
    pub fn basis_indices(self, n: usize) -> (i64, i64) {
        let n = n as i64;
        match self {
            Parity::Periodic => (n, -n),
            Parity::Antiperiodic => (n, -n - 1),
        }
    }

    /// `(2πm + t)² − (πκ)²`, formed as an integer product times `π²` so the
    /// difference carries no cancellation error.
    pub fn detuning<T: Scalar>(self, m: i64, kappa: i64) -> T {
        let f = 2 * m + self.tau();
        T::PI() * T::PI() * T::from_int(f - kappa) * T::from_int(f + kappa)
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Periodic => "periodic",
            Parity::Antiperiodic => "antiperiodic",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Parity {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(Parity::Periodic),
            "antiperiodic" => Ok(Parity::Antiperiodic),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown parity '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_carry_the_gap_frequencies() {
        let (p, m) = Parity::Antiperiodic.basis_indices(3);
        assert_eq!(2 * p + 1, 7);
        assert_eq!(2 * m + 1, -7);
        assert_eq!(Parity::Periodic.kappa(5), 10);
        assert_eq!(Parity::Antiperiodic.detuning::<f64>(3, 7), 0.0);
        assert_eq!(Parity::Periodic.detuning::<f64>(-4, 8), 0.0);
    }

    #[test]
    fn detuning_matches_direct_difference() {
        let pi = std::f64::consts::PI;
        let d: f64 = Parity::Periodic.detuning(7, 6);
        assert!((d - ((2.0 * pi * 7.0).powi(2) - (6.0 * pi).powi(2))).abs() < 1e-9);
    }
}
