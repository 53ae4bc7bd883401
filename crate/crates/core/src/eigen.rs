//! Dense Hermitian eigensolver: Householder reduction to real tridiagonal
//! form followed by the implicit QL iteration.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::czero;
use crate::{Error, Result, Scalar};

/// Square complex matrix in row-major storage, expected to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self::from_fn(n, |i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `max |H_ij − conj(H_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (a, x)| acc + *a * *x)
            })
            .collect()
    }
}

/// Ascending eigenvalues, orthonormal eigenvectors and their residuals
/// `‖Hv − λv‖₂`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    n: usize,
    values: Vec<T>,
    vectors: Vec<Complex<T>>,
    residuals: Vec<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Eigenvector belonging to `values()[j]`.
    pub fn vector(&self, j: usize) -> &[Complex<T>] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }

    /// `max |⟨v_i, v_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let dot = self
                    .vector(i)
                    .iter()
                    .zip(self.vector(j))
                    .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * *b);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

struct Reflector<T> {
    start: usize,
    tau: T,
    v: Vec<Complex<T>>,
}

/// Reduces `h` to a real symmetric tridiagonal `(d, e)` with `e[i] = T[i+1][i]`,
/// returning the reflectors and the diagonal phase that make up the unitary
/// `Q·D` with `H = (QD)·T·(QD)^H`.
fn tridiagonalize<T: Scalar>(
    h: &HermitianMatrix<T>,
) -> (Vec<T>, Vec<T>, Vec<Reflector<T>>, Vec<Complex<T>>) {
    let n = h.n;
    let mut a = h.data.clone();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut sub = vec![czero::<T>(); n.saturating_sub(1)];
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(1) {
        let start = k + 1;
        let len = n - start;
        let x0 = a[start * n + k];
        let rest: T = (start + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if len < 2 || rest == T::zero() {
            sub[k] = x0;
            continue;
        }
        let alpha = (rest + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * alpha;
        let mut v: Vec<Complex<T>> = (start..n).map(|i| a[i * n + k]).collect();
        v[0] -= beta;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = two / vnorm2;

        // p = τ A v on the trailing block
        let mut p: Vec<Complex<T>> = (start..n)
            .map(|i| {
                let row = &a[i * n + start..i * n + n];
                row.iter().zip(&v).fold(czero::<T>(), |acc, (x, y)| acc + *x * *y) * tau
            })
            .collect();
        let vhp = v
            .iter()
            .zip(&p)
            .fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * *y);
        let kk = tau * vhp.re / two;
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= *vi * kk;
        }
        for i in 0..len {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(start + i) * n + start..(start + i) * n + n];
            for j in 0..len {
                row[j] -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        sub[k] = beta;
        reflectors.push(Reflector { start, tau, v });
    }

    let d: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut phases = vec![Complex::new(T::one(), T::zero()); n];
    let mut e = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let m = sub[k].norm();
        e[k] = m;
        phases[k + 1] = if m == T::zero() {
            phases[k]
        } else {
            phases[k] * sub[k] / m
        };
    }
    (d, e, reflectors, phases)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix. `z`, when given, holds row-wise vectors that receive the
/// rotations. Returns `false` when the iteration budget is exhausted.
fn tql2<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> bool {
    let n = d.len();
    if n == 0 {
        return true;
    }
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return false;
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (e[l] + e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    true
}

fn check_hermitian<T: Scalar>(h: &HermitianMatrix<T>) -> Result<()> {
    let scale = T::one().max(h.max_abs());
    let defect = h.hermitian_defect();
    if !(defect <= T::lit(1e-12) * scale) {
        return Err(Error::NotHermitian {
            defect: defect.as_f64(),
        });
    }
    Ok(())
}

fn ascending_order<T: Scalar>(d: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
    order
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues<T: Scalar>(h: &HermitianMatrix<T>) -> Result<Vec<T>> {
    check_hermitian(h)?;
    let (mut d, mut e, _, _) = tridiagonalize(h);
    if !tql2(&mut d, &mut e, None) {
        return Err(Error::NoConvergence {
            worst_residual: f64::NAN,
        });
    }
    let order = ascending_order(&d);
    Ok(order.into_iter().map(|i| d[i]).collect())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen<T: Scalar>(h: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    check_hermitian(h)?;
    let n = h.n;
    let (mut d, mut e, reflectors, phases) = tridiagonalize(h);
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    let converged = tql2(&mut d, &mut e, Some(&mut z));
    let order = ascending_order(&d);
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();

    // Row i of z holds the i-th eigenvector of the real tridiagonal matrix.
    let mut vectors = vec![czero::<T>(); n * n];
    vectors
        .par_chunks_mut(n.max(1))
        .zip(order.par_iter())
        .for_each(|(col, &src)| {
            let zrow = &z[src * n..(src + 1) * n];
            for i in 0..n {
                col[i] = phases[i] * zrow[i];
            }
            for r in reflectors.iter().rev() {
                let tail = &mut col[r.start..];
                let dot = r
                    .v
                    .iter()
                    .zip(tail.iter())
                    .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * *b)
                    * r.tau;
                for (y, v) in tail.iter_mut().zip(&r.v) {
                    *y -= *v * dot;
                }
            }
        });

    let residuals: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| {
            let v = &vectors[j * n..(j + 1) * n];
            let hv = h.matvec(v);
            hv.iter()
                .zip(v)
                .map(|(a, b)| (*a - *b * values[j]).norm_sqr())
                .sum::<T>()
                .sqrt()
        })
        .collect();

    let out = EigenDecomposition {
        n,
        values,
        vectors,
        residuals,
    };
    if !converged {
        return Err(Error::NoConvergence {
            worst_residual: out.max_residual().as_f64(),
        });
    }
    Ok(out)
}
