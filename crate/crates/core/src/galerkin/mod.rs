//! Fourier–Galerkin oracle for `L_t(q) = −d²/dx² + q` on `y(1) = e^{it}y(0)`.
//!
//! The basis is `e^{i(2πm + t)x}`, `|m| ≤ M`, in which the operator is the
//! Hermitian matrix `H[m, m'] = (2πm + t)²δ_{mm'} + q_{m−m'}`.

mod refine;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianMatrix};
use crate::potential::{fourier_table, FourierTable, Potential};
use crate::scalar::czero;
use crate::{Error, Parity, Result, Scalar};

pub use refine::PairRefiner;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GalerkinConfig<T> {
    /// Quasimomentum in `(−π, π]`.
    pub t: T,
    /// Truncation half-width `M`; the matrix has size `2M + 1`.
    pub half_width: usize,
    /// Bound on every eigenpair residual `‖Hv − λv‖`.
    pub eigen_tolerance: T,
    /// `C` in the pair validation `|λ − (πκ)²| ≤ C·n^{1/2}`; `None` uses
    /// `50·(1 + Σ|q_k|)`.
    pub validation_constant: Option<T>,
    /// Half-width of the matrix-free pair refinement, if any.
    pub refine_half_width: Option<usize>,
}

impl<T: Scalar> GalerkinConfig<T> {
    pub fn new(t: T, half_width: usize) -> Self {
        // backward error of a dense solve grows like √dim·eps·‖H‖
        let top = T::two_pi() * T::from_usize_(half_width + 1);
        let dim = T::from_usize_(2 * half_width + 1);
        let tol = T::lit(1e-8).max(T::lit(4.0) * dim.sqrt() * T::epsilon() * top * top);
        Self {
            t,
            half_width,
            eigen_tolerance: tol,
            validation_constant: None,
            refine_half_width: None,
        }
    }

    pub fn for_parity(parity: Parity, half_width: usize) -> Self {
        Self::new(parity.quasimomentum(), half_width)
    }

    pub fn periodic(half_width: usize) -> Self {
        Self::for_parity(Parity::Periodic, half_width)
    }

    pub fn antiperiodic(half_width: usize) -> Self {
        Self::for_parity(Parity::Antiperiodic, half_width)
    }

    pub fn with_refinement(mut self, half_width: usize) -> Self {
        self.refine_half_width = Some(half_width);
        self
    }

    pub fn with_validation_constant(mut self, c: T) -> Self {
        self.validation_constant = Some(c);
        self
    }

    pub fn with_eigen_tolerance(mut self, tol: T) -> Self {
        self.eigen_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width < 4 {
            return Err(Error::InvalidArgument("truncation half-width M must be at least 4".into()));
        }
        if !(self.eigen_tolerance > T::zero()) {
            return Err(Error::InvalidArgument("eigen tolerance must be positive".into()));
        }
        if !(self.t > -T::PI() && self.t <= T::PI()) {
            return Err(Error::InvalidArgument("quasimomentum must lie in (-pi, pi]".into()));
        }
        if let Some(r) = self.refine_half_width {
            if r < self.half_width {
                return Err(Error::InvalidArgument(
                    "refinement half-width must be at least M".into(),
                ));
            }
        }
        Ok(())
    }

    /// The boundary condition selected by `t`, if it is `0` or `π`.
    pub fn parity(&self) -> Result<Parity> {
        let tol = T::lit(1e-12);
        if self.t.abs() <= tol {
            Ok(Parity::Periodic)
        } else if (self.t - T::PI()).abs() <= tol {
            Ok(Parity::Antiperiodic)
        } else {
            Err(Error::InvalidArgument(
                "pairs need t = 0 (periodic) or t = pi (antiperiodic)".into(),
            ))
        }
    }

    /// Fourier half-width needed by the dense matrix and the refinement.
    pub fn table_width(&self) -> usize {
        2 * self.half_width.max(self.refine_half_width.unwrap_or(0))
    }
}

/// One eigenvalue pair of the periodic or antiperiodic problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair<T> {
    pub n: usize,
    /// `λ_{n,1} ≤ λ_{n,2}` of the operator with the original (unshifted) potential.
    pub lower: T,
    pub upper: T,
    /// Offsets `λ − shift − (πκ)²` of the mean-zero operator, free of
    /// the cancellation in `lower − (πκ)²`.
    pub offset_lower: T,
    pub offset_upper: T,
    pub gap: T,
    /// Eigenvector components at the basis functions of frequency `+πκ`
    /// and `−πκ`, for `j = 1, 2`.
    pub u_plus: [Complex<T>; 2],
    pub u_minus: [Complex<T>; 2],
    pub residual: T,
    /// Perturbative size of the eigenvalue shift from the discarded modes.
    pub trunc_err: T,
    pub refined: bool,
}

impl<T: Scalar> SpectralPair<T> {
    pub fn eigenvalue(&self, j: usize) -> T {
        if j == 1 {
            self.lower
        } else {
            self.upper
        }
    }

    pub fn offset(&self, j: usize) -> T {
        if j == 1 {
            self.offset_lower
        } else {
            self.offset_upper
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPairTable<T> {
    pub parity: Parity,
    pub half_width: usize,
    pub mean_shift: T,
    /// Lowest periodic eigenvalue (periodic tables only).
    pub ground: Option<T>,
    pub pairs: Vec<SpectralPair<T>>,
}

impl<T: Scalar> SpectralPairTable<T> {
    pub fn pair(&self, n: usize) -> Option<&SpectralPair<T>> {
        self.pairs.iter().find(|p| p.n == n)
    }

    pub fn max_residual(&self) -> T {
        self.pairs.iter().fold(T::zero(), |m, p| m.max(p.residual))
    }
}

fn basis_index(m: i64, half_width: usize) -> usize {
    (m + half_width as i64) as usize
}

fn check_coverage<T: Scalar>(table: &FourierTable<T>, needed: usize) -> Result<()> {
    if table.covers(needed) {
        Ok(())
    } else {
        Err(Error::InsufficientTable {
            needed,
            available: table.k_max(),
        })
    }
}

/// `H[m, m'] = (2πm + t)²δ + q_{m−m'}` for `|m|, |m'| ≤ M`.
pub fn build_operator_matrix<T: Scalar>(
    table: &FourierTable<T>,
    cfg: &GalerkinConfig<T>,
) -> Result<HermitianMatrix<T>> {
    cfg.validate()?;
    let m = cfg.half_width;
    check_coverage(table, 2 * m)?;
    let mi = m as i64;
    // at t = 0, π the frequency is an integer multiple of π, so the two
    // modes of a pair get bit-identical diagonal entries
    let tau = cfg.parity().ok().map(Parity::tau);
    Ok(HermitianMatrix::from_fn(2 * m + 1, |i, j| {
        let (a, b) = (i as i64 - mi, j as i64 - mi);
        let mut h = table.get(a - b);
        if i == j {
            let w = match tau {
                Some(tau) => T::PI() * T::from_int(2 * a + tau),
                None => T::two_pi() * T::from_int(a) + cfg.t,
            };
            h += Complex::new(w * w, T::zero());
        }
        h
    }))
}

/// All eigenvalues of the truncated mean-zero operator, ascending.
pub fn operator_spectrum<T: Scalar>(table: &FourierTable<T>, cfg: &GalerkinConfig<T>) -> Result<Vec<T>> {
    hermitian_eigenvalues(&build_operator_matrix(table, cfg)?)
}

fn default_validation_constant<T: Scalar>(table: &FourierTable<T>) -> T {
    T::lit(50.0) * (T::one() + table.l1_mass())
}

/// Perturbative shift `Σ |q_{m−i}|² / |(2πm + t)² − (πκ)²|` over modes
/// `|m| > width` coupled to the pair, maximised over the two pair indices.
fn truncation_estimate<T: Scalar>(table: &FourierTable<T>, parity: Parity, n: usize, width: usize) -> T {
    let kappa = parity.kappa(n);
    let reach = table.effective_width() as i64;
    let w = width as i64;
    let (ip, im) = parity.basis_indices(n);
    let mut worst = T::zero();
    for i in [ip, im] {
        let mut s = T::zero();
        let ranges = [(w + 1, i + reach), (i - reach, -w - 1)];
        for (lo, hi) in ranges {
            for m in lo..=hi {
                let q = table.modulus(m - i);
                if q > T::zero() {
                    s += q * q / parity.detuning::<T>(m, kappa).abs();
                }
            }
        }
        worst = worst.max(s);
    }
    worst
}

/// Phase making the pair components satisfy `u_− = conj(u_+)`, the gauge of
/// real eigenfunctions.
fn real_gauge<T: Scalar>(plus: Complex<T>, minus: Complex<T>) -> (Complex<T>, Complex<T>) {
    let prod = plus * minus;
    if prod.norm() == T::zero() {
        return (plus, minus);
    }
    let rot = Complex::from_polar(T::one(), -prod.arg() / T::lit(2.0));
    (plus * rot, minus * rot)
}

/// Pairs `n = n_start..=n_max` of one parity from a Fourier table.
pub fn spectral_pairs<T: Scalar>(
    table: &FourierTable<T>,
    parity: Parity,
    n_max: usize,
    cfg: &GalerkinConfig<T>,
) -> Result<SpectralPairTable<T>> {
    cfg.validate()?;
    if cfg.parity()? != parity {
        return Err(Error::InvalidArgument(format!(
            "configuration quasimomentum does not match {parity} boundary conditions"
        )));
    }
    let m = cfg.half_width;
    if m < 2 * n_max + 16 {
        return Err(Error::InvalidArgument(format!(
            "M = {m} is below 2·n_max + 16 = {}",
            2 * n_max + 16
        )));
    }
    let h = build_operator_matrix(table, cfg)?;
    let eig = hermitian_eigen(&h)?;
    let worst = eig.max_residual();
    if !(worst <= cfg.eigen_tolerance) {
        return Err(Error::ResidualTooLarge {
            residual: worst.as_f64(),
            tolerance: cfg.eigen_tolerance.as_f64(),
        });
    }
    let c = cfg
        .validation_constant
        .unwrap_or_else(|| default_validation_constant(table));
    let shift = table.mean_shift();
    let values = eig.values();

    let first = match parity {
        Parity::Periodic => 1,
        Parity::Antiperiodic => 0,
    };
    let mut pairs = Vec::with_capacity(n_max + 1);
    for n in first..=n_max {
        let (i1, i2) = match parity {
            Parity::Periodic => (2 * n - 1, 2 * n),
            Parity::Antiperiodic => (2 * n, 2 * n + 1),
        };
        let free = parity.free_level::<T>(n);
        let (x1, x2) = (values[i1] - free, values[i2] - free);
        let bound = c * T::from_usize_(n.max(1)).sqrt();
        let deviation = x1.abs().max(x2.abs());
        if !(deviation <= bound) {
            return Err(Error::PairValidation {
                parity,
                n,
                deviation: deviation.as_f64(),
                bound: bound.as_f64(),
            });
        }
        let (bp, bm) = parity.basis_indices(n);
        let (pp, pm) = (basis_index(bp, m), basis_index(bm, m));
        let mut u_plus = [czero(); 2];
        let mut u_minus = [czero(); 2];
        for (j, &col) in [i1, i2].iter().enumerate() {
            let v = eig.vector(col);
            let (a, b) = real_gauge(v[pp], v[pm]);
            u_plus[j] = a;
            u_minus[j] = b;
        }
        pairs.push(SpectralPair {
            n,
            lower: values[i1] + shift,
            upper: values[i2] + shift,
            offset_lower: x1,
            offset_upper: x2,
            gap: (x2 - x1).max(T::zero()),
            u_plus,
            u_minus,
            residual: eig.residuals()[i1].max(eig.residuals()[i2]),
            trunc_err: truncation_estimate(table, parity, n, m),
            refined: false,
        });
    }

    if let Some(r) = cfg.refine_half_width {
        check_coverage(table, 2 * r)?;
        let refiner = PairRefiner::new(table, r);
        let tol = T::lit(1e-2) * (T::one() + table.l1_mass());
        let refined: Result<Vec<SpectralPair<T>>> = pairs
            .par_iter()
            .map(|p| {
                let (x1, x2, up, um) = refiner.refine(parity, p.n, p.offset_lower, p.offset_upper)?;
                for (new, old) in [(x1, p.offset_lower), (x2, p.offset_upper)] {
                    if !((new - old).abs() <= tol) {
                        return Err(Error::Refinement {
                            parity,
                            n: p.n,
                            reason: format!(
                                "refined offset {:e} strays from the dense value {:e}",
                                new.as_f64(),
                                old.as_f64()
                            ),
                        });
                    }
                }
                let free = parity.free_level::<T>(p.n);
                let mut q = p.clone();
                q.offset_lower = x1;
                q.offset_upper = x2;
                q.lower = free + x1 + shift;
                q.upper = free + x2 + shift;
                q.gap = (x2 - x1).max(T::zero());
                for j in 0..2 {
                    let (a, b) = real_gauge(up[j], um[j]);
                    q.u_plus[j] = a;
                    q.u_minus[j] = b;
                }
                q.trunc_err = truncation_estimate(table, parity, p.n, r);
                q.refined = true;
                Ok(q)
            })
            .collect();
        pairs = refined?;
    }

    Ok(SpectralPairTable {
        parity,
        half_width: m,
        mean_shift: shift,
        ground: match parity {
            Parity::Periodic => Some(values[0] + shift),
            Parity::Antiperiodic => None,
        },
        pairs,
    })
}

fn pairs_for_potential<T: Scalar>(
    p: &Potential<T>,
    parity: Parity,
    n_max: usize,
    cfg: &GalerkinConfig<T>,
) -> Result<SpectralPairTable<T>> {
    cfg.validate()?;
    let table = fourier_table(p, cfg.table_width())?;
    spectral_pairs(&table, parity, n_max, cfg)
}

/// Periodic pairs `n = 1..=n_max` plus the ground level; `cfg.t` must be 0.
pub fn periodic_pairs<T: Scalar>(p: &Potential<T>, n_max: usize, cfg: &GalerkinConfig<T>) -> Result<SpectralPairTable<T>> {
    pairs_for_potential(p, Parity::Periodic, n_max, cfg)
}

/// Antiperiodic pairs `n = 0..=n_max`; `cfg.t` must be π.
pub fn antiperiodic_pairs<T: Scalar>(
    p: &Potential<T>,
    n_max: usize,
    cfg: &GalerkinConfig<T>,
) -> Result<SpectralPairTable<T>> {
    pairs_for_potential(p, Parity::Antiperiodic, n_max, cfg)
}

/// `(n, λ_{n,2} − λ_{n,1})` for every pair in the table.
pub fn gap_table<T: Scalar>(pairs: &SpectralPairTable<T>) -> Vec<(usize, T)> {
    pairs.pairs.iter().map(|p| (p.n, p.gap)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band<T> {
    pub index: usize,
    pub min: T,
    pub max: T,
}

/// Range of the `j`-th eigenvalue of `L_t` over `t_grid`, for `j < bands`.
pub fn band_structure<T: Scalar>(
    p: &Potential<T>,
    t_grid: &[T],
    bands: usize,
    cfg: &GalerkinConfig<T>,
) -> Result<Vec<Band<T>>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty quasimomentum grid".into()));
    }
    if bands > 2 * cfg.half_width + 1 {
        return Err(Error::InvalidArgument("more bands requested than basis functions".into()));
    }
    let table = fourier_table(p, 2 * cfg.half_width)?;
    let spectra: Result<Vec<Vec<T>>> = t_grid
        .par_iter()
        .map(|&t| {
            let c = GalerkinConfig { t, ..*cfg };
            operator_spectrum(&table, &c)
        })
        .collect();
    let spectra = spectra?;
    let shift = table.mean_shift();
    Ok((0..bands)
        .map(|j| {
            let (lo, hi) = spectra.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), s| {
                (lo.min(s[j]), hi.max(s[j]))
            });
            Band {
                index: j,
                min: lo + shift,
                max: hi + shift,
            }
        })
        .collect())
}

/// Largest change of the pair `n` between truncations `M` and `2M`.
pub fn convergence_check<T: Scalar>(p: &Potential<T>, n: usize, cfg: &GalerkinConfig<T>) -> Result<T> {
    cfg.validate()?;
    let parity = cfg.parity()?;
    let table = fourier_table(p, 4 * cfg.half_width)?;
    let (i1, i2) = match parity {
        Parity::Periodic => (2 * n.max(1) - 1, 2 * n.max(1)),
        Parity::Antiperiodic => (2 * n, 2 * n + 1),
    };
    let coarse = operator_spectrum(&table, cfg)?;
    let fine_cfg = GalerkinConfig {
        half_width: 2 * cfg.half_width,
        ..*cfg
    };
    let fine = operator_spectrum(&table, &fine_cfg)?;
    if i2 >= coarse.len() {
        return Err(Error::InvalidArgument(format!("pair {n} is outside the truncation")));
    }
    Ok((coarse[i1] - fine[i1]).abs().max((coarse[i2] - fine[i2]).abs()))
}

/// Squared overlap of the oracle eigenvector, restricted to the two pair
/// modes, with the first-order model `√2·sin(θx + α/2)` (`j = 1`) or
/// `√2·cos(θx + α/2)` (`j = 2`), `α = arg q_κ`.
pub fn eigenvector_overlap<T: Scalar>(
    pairs: &SpectralPairTable<T>,
    n: usize,
    j: usize,
    table: &FourierTable<T>,
) -> Result<T> {
    if j != 1 && j != 2 {
        return Err(Error::InvalidArgument("j must be 1 or 2".into()));
    }
    let kappa = pairs.parity.kappa(n);
    let alpha = table.phase(kappa)?;
    let pair = pairs
        .pair(n)
        .ok_or_else(|| Error::InvalidArgument(format!("pair {n} not in table")))?;
    let (wp, wm) = model_components(alpha, j);
    let dot = wp.conj() * pair.u_plus[j - 1] + wm.conj() * pair.u_minus[j - 1];
    Ok(dot.norm_sqr().min(T::one()))
}

/// Components of the sine/cosine model on `e^{±iθx}`.
pub(crate) fn model_components<T: Scalar>(alpha: T, j: usize) -> (Complex<T>, Complex<T>) {
    let r = T::one() / T::lit(2.0).sqrt();
    let h = Complex::from_polar(r, alpha / T::lit(2.0));
    if j == 1 {
        // sin z = (e^{iz} − e^{−iz}) / 2i
        let i = Complex::new(T::zero(), T::one());
        (h / i, -h.conj() / i)
    } else {
        (h, h.conj())
    }
}

/// `ground < μ_{0,1} ≤ μ_{0,2} < λ_{1,1} ≤ λ_{1,2} < μ_{1,1} ≤ …` over the
/// pairs both tables share.
pub fn band_ordering_holds<T: Scalar>(periodic: &SpectralPairTable<T>, antiperiodic: &SpectralPairTable<T>) -> bool {
    let mut seq = Vec::new();
    if let Some(g) = periodic.ground {
        seq.push((g, g));
    }
    let top = periodic
        .pairs
        .iter()
        .map(|p| p.n)
        .max()
        .unwrap_or(0)
        .min(antiperiodic.pairs.iter().map(|p| p.n).max().unwrap_or(0));
    for n in 0..=top {
        if let Some(p) = antiperiodic.pair(n) {
            seq.push((p.lower, p.upper));
        }
        if let Some(p) = periodic.pair(n + 1) {
            if n < top {
                seq.push((p.lower, p.upper));
            }
        }
    }
    seq.iter().all(|(a, b)| a <= b) && seq.windows(2).all(|w| w[0].1 < w[1].0)
}
