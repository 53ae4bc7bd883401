//! Matrix-free refinement of one eigenvalue pair.
//!
//! With `P` the two modes of frequency `±πκ` and `Q` the rest of a
//! truncation `|m| ≤ R`, an eigenvalue `λ = (πκ)² + x` of `H` solves
//! `x = eig_j F(x)`, `F(x) = H'_PP + H'_PQ (x − H'_QQ)^{-1} H'_QP`, where
//! `H' = H − (πκ)²`. The `Q`-block solve is a Jacobi iteration whose
//! Toeplitz products run through an FFT, so `R` can be in the thousands.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::potential::FourierTable;
use crate::scalar::czero;
use crate::{Error, Parity, Result, Scalar};

/// Precomputed spectrum of the Toeplitz kernel `q_{m−m'}`, `|m|, |m'| ≤ R`.
pub struct PairRefiner<T: Scalar> {
    half_width: usize,
    fft_len: usize,
    kernel_hat: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    coupling: T,
    table: FourierTable<T>,
}

const MAX_SWEEPS: usize = 400;
const MAX_OUTER: usize = 60;

impl<T: Scalar> PairRefiner<T> {
    /// `table` must determine `q_k` for `|k| ≤ 2R`.
    pub fn new(table: &FourierTable<T>, half_width: usize) -> Self {
        let size = 2 * half_width + 1;
        let fft_len = (2 * size - 1).next_power_of_two();
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut kernel = vec![czero::<T>(); fft_len];
        let reach = 2 * half_width as i64;
        for d in -reach..=reach {
            kernel[d.rem_euclid(fft_len as i64) as usize] = table.get(d);
        }
        forward.process(&mut kernel);
        let coupling = (-reach..=reach).map(|d| table.modulus(d)).sum();
        Self {
            half_width,
            fft_len,
            kernel_hat: kernel,
            forward,
            inverse,
            coupling,
            table: table.clone(),
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// `z_m = Σ_{m'} q_{m−m'} y_{m'}` on the truncation.
    fn toeplitz(&self, y: &[Complex<T>], buf: &mut Vec<Complex<T>>, out: &mut [Complex<T>]) {
        buf.clear();
        buf.extend_from_slice(y);
        buf.resize(self.fft_len, czero());
        self.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b = *b * *k;
        }
        self.inverse.process(buf);
        let scale = T::one() / T::from_usize_(self.fft_len);
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = *b * scale;
        }
    }

    /// Refined offsets `(x_1, x_2)` from the free level and the pair
    /// components `(u_+, u_−)` of the normalised eigenvectors.
    #[allow(clippy::type_complexity)]
    pub fn refine(
        &self,
        parity: Parity,
        n: usize,
        start_lower: T,
        start_upper: T,
    ) -> Result<(T, T, [Complex<T>; 2], [Complex<T>; 2])> {
        let r = self.half_width as i64;
        let size = 2 * self.half_width + 1;
        let kappa = parity.kappa(n);
        let (ip, im) = parity.basis_indices(n);
        if ip.abs() > r || im.abs() > r {
            return Err(Error::Refinement {
                parity,
                n,
                reason: "pair lies outside the refinement truncation".into(),
            });
        }
        let fail = |reason: String| Error::Refinement { parity, n, reason };
        let pos = |m: i64| (m + r) as usize;
        let (pp, pm) = (pos(ip), pos(im));

        let detune: Vec<T> = (-r..=r).map(|m| parity.detuning::<T>(m, kappa)).collect();
        let gap_to_q = detune
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pp && i != pm)
            .fold(T::infinity(), |g, (_, d)| g.min(d.abs()));

        // Columns of H'_QP.
        let column = |p: i64| -> Vec<Complex<T>> {
            (-r..=r)
                .map(|m| {
                    let i = pos(m);
                    if i == pp || i == pm {
                        czero()
                    } else {
                        self.table.get(m - p)
                    }
                })
                .collect()
        };
        let b = [column(ip), column(im)];
        let q_k = self.table.get(kappa);

        let mut y = [vec![czero::<T>(); size], vec![czero::<T>(); size]];
        let mut buf = Vec::with_capacity(self.fft_len);
        let mut tz = vec![czero::<T>(); size];
        let eps = T::epsilon();

        let mut solve = |x: T, y: &mut [Vec<Complex<T>>; 2]| -> Result<()> {
            let margin = gap_to_q - x.abs();
            if !(self.coupling < T::lit(0.95) * margin) {
                return Err(fail(format!(
                    "Jacobi iteration not contractive (coupling {:e}, spectral margin {:e})",
                    self.coupling.as_f64(),
                    margin.as_f64()
                )));
            }
            for (yr, br) in y.iter_mut().zip(&b) {
                let mut converged = false;
                for _ in 0..MAX_SWEEPS {
                    self.toeplitz(yr, &mut buf, &mut tz);
                    let mut delta = T::zero();
                    let mut size_y = T::zero();
                    for i in 0..size {
                        if i == pp || i == pm {
                            continue;
                        }
                        let new = (br[i] + tz[i]) / (x - detune[i]);
                        delta = delta.max((new - yr[i]).norm());
                        size_y = size_y.max(new.norm());
                        yr[i] = new;
                    }
                    if delta <= T::lit(4.0) * eps * size_y || size_y == T::zero() {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(fail("Jacobi iteration did not converge".into()));
                }
            }
            Ok(())
        };

        // F(x) from the solved columns: F_pq = H'_pq + Σ_m conj(b_p[m]) y_q[m].
        let schur = |y: &[Vec<Complex<T>>; 2]| -> [[Complex<T>; 2]; 2] {
            let dot = |a: &[Complex<T>], c: &[Complex<T>]| {
                a.iter().zip(c).fold(czero::<T>(), |acc, (u, v)| acc + u.conj() * *v)
            };
            let f11 = dot(&b[0], &y[0]);
            let f12 = q_k + dot(&b[0], &y[1]);
            let f21 = q_k.conj() + dot(&b[1], &y[0]);
            let f22 = dot(&b[1], &y[1]);
            [[f11, f12], [f21, f22]]
        };

        let two = T::lit(2.0);
        let eig2 = |f: &[[Complex<T>; 2]; 2], j: usize| -> T {
            let (a, d) = (f[0][0].re, f[1][1].re);
            let off = (f[0][1] + f[1][0].conj()) / two;
            let mean = (a + d) / two;
            let half = (a - d) / two;
            let rad = (half * half + off.norm_sqr()).sqrt();
            if j == 1 {
                mean - rad
            } else {
                mean + rad
            }
        };

        let mut xs = [start_lower, start_upper];
        let mut comps = [[czero::<T>(); 2]; 2];
        for j in 1..=2 {
            let mut x = xs[j - 1];
            let mut done = false;
            for _ in 0..MAX_OUTER {
                solve(x, &mut y)?;
                let f = schur(&y);
                let next = eig2(&f, j);
                let scale = next.abs() + f[0][1].norm() + f[0][0].norm() + f[1][1].norm();
                let step = (next - x).abs();
                x = next;
                if step <= T::lit(4.0) * eps * scale || scale == T::zero() {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(fail("pair fixed point did not converge".into()));
            }
            solve(x, &mut y)?;
            let f = schur(&y);
            // eigenvector (v_+, v_−) of the 2×2 F at its j-th eigenvalue
            let (a, d) = (f[0][0].re, f[1][1].re);
            let off = (f[0][1] + f[1][0].conj()) / two;
            let lam = eig2(&f, j);
            let (vp, vm) = if off.norm() > T::zero() {
                let c1 = (off, Complex::new(lam - a, T::zero()));
                let c2 = (Complex::new(lam - d, T::zero()), off.conj());
                if c1.0.norm_sqr() + c1.1.norm_sqr() >= c2.0.norm_sqr() + c2.1.norm_sqr() {
                    c1
                } else {
                    c2
                }
            } else if (j == 1) == (a <= d) {
                (Complex::new(T::one(), T::zero()), czero())
            } else {
                (czero(), Complex::new(T::one(), T::zero()))
            };
            let mut norm2 = vp.norm_sqr() + vm.norm_sqr();
            for i in 0..size {
                if i != pp && i != pm {
                    norm2 += (y[0][i] * vp + y[1][i] * vm).norm_sqr();
                }
            }
            let s = T::one() / norm2.sqrt();
            comps[j - 1] = [vp * s, vm * s];
            xs[j - 1] = x;
        }
        let (x1, x2) = (xs[0].min(xs[1]), xs[0].max(xs[1]));
        Ok((
            x1,
            x2,
            [comps[0][0], comps[1][0]],
            [comps[0][1], comps[1][1]],
        ))
    }
}
