//! Dense general complex eigensolver.
//!
//! Balancing (Parlett–Reinsch, radix 2), Householder reduction to upper
//! Hessenberg form, then single-shift complex QR with Wilkinson shifts until
//! the matrix is upper triangular (complex Schur form). Eigenvectors come
//! from back-substitution on the triangular factor.
//!
//! Balancing matters here: gauge-transformed rings carry corner entries
//! `g e^{±Nφ}` that differ by many orders of magnitude, and open chains are
//! strongly non-normal until rescaled.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::{Spectrum, SpectrumSource};
use crate::error::{Error, Result};
use crate::lattice::HamiltonianMatrix;

/// Largest matrix dimension accepted by the solver.
pub const MAX_DIMENSION: usize = 1024;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;
const RADIX: f64 = 2.0;

/// Eigenvalues with matching unit-norm right eigenvectors, both in
/// canonical spectrum order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub spectrum: Spectrum,
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    /// Largest `‖H v - E v‖ / ‖H‖_F` over all pairs.
    pub fn max_relative_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let scale = h.norm_fro().max(f64::MIN_POSITIVE);
        self.spectrum
            .eigenvalues()
            .iter()
            .zip(&self.vectors)
            .map(|(e, v)| residual_norm(h, *e, v) / scale)
            .fold(0.0, f64::max)
    }
}

/// `‖H v - E v‖_2 / ‖v‖_2`.
pub fn residual_norm(h: &HamiltonianMatrix, e: Complex64, v: &[Complex64]) -> f64 {
    let hv = h.apply(v);
    let r: f64 = hv.iter().zip(v).map(|(a, x)| (a - e * x).norm_sqr()).sum();
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    (r / nv).sqrt()
}

/// All eigenvalues of `h`, canonically ordered.
///
/// `h` and its transpose share eigenvalues. QR loses accuracy on strongly
/// non-normal input whose weight sits below the diagonal, so the heavier
/// strict triangle is moved above it first.
pub fn dense_eigensolve(h: &HamiltonianMatrix) -> Result<Spectrum> {
    let n = h.dim();
    let (mut lower, mut upper) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..i {
            lower += h[(i, j)].norm();
            upper += h[(j, i)].norm();
        }
    }
    let schur = if lower > upper {
        Schur::compute(&HamiltonianMatrix::from_fn(n, |i, j| h[(j, i)]), false)?
    } else {
        Schur::compute(h, false)?
    };
    Ok(Spectrum::new(schur.diagonal(), SpectrumSource::Oracle))
}

/// Eigenvalues together with right eigenvectors.
pub fn dense_eigensystem(h: &HamiltonianMatrix) -> Result<EigenSystem> {
    let schur = Schur::compute(h, true)?;
    let values = schur.diagonal();
    let vectors = schur.eigenvectors();
    let mut pairs: Vec<(Complex64, Vec<Complex64>)> = values.into_iter().zip(vectors).collect();
    pairs.sort_by(|a, b| super::canonical_cmp(&a.0, &b.0));
    let (values, vectors): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(EigenSystem {
        spectrum: Spectrum::new(values, SpectrumSource::Oracle),
        vectors,
    })
}

/// Square work matrix, row-major.
#[derive(Clone)]
struct Work {
    n: usize,
    a: Vec<Complex64>,
}

impl Work {
    fn identity(n: usize) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, a }
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.n + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.a[r * self.n + c] = v;
    }
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

struct Schur {
    /// Upper triangular factor T (balanced coordinates).
    t: Work,
    /// Accumulated unitary transform, `B = Z T Z^H`; absent when vectors
    /// were not requested.
    z: Option<Work>,
    /// Balancing scales, `A = D B D^{-1}`.
    scale: Vec<f64>,
}

impl Schur {
    fn compute(h: &HamiltonianMatrix, want_vectors: bool) -> Result<Self> {
        let n = h.dim();
        if n > MAX_DIMENSION {
            return Err(Error::MatrixTooLarge {
                size: n,
                limit: MAX_DIMENSION,
            });
        }
        if h.entries().iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFiniteMatrix);
        }
        let mut a = Work {
            n,
            a: h.entries().to_vec(),
        };
        let scale = balance(&mut a);
        let mut z = want_vectors.then(|| Work::identity(n));
        hessenberg(&mut a, z.as_mut());
        qr_iterate(&mut a, z.as_mut())?;
        Ok(Self { t: a, z, scale })
    }

    fn diagonal(&self) -> Vec<Complex64> {
        (0..self.t.n).map(|i| self.t.get(i, i)).collect()
    }

    fn eigenvectors(&self) -> Vec<Vec<Complex64>> {
        let n = self.t.n;
        let z = self.z.as_ref().expect("Schur vectors were not accumulated");
        let t = &self.t;
        let tnorm = t.a.iter().map(|v| abs1(*v)).fold(0.0, f64::max);
        let small = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e10);

        (0..n)
            .map(|k| {
                let lambda = t.get(k, k);
                // Solve (T - λ I) x = 0 with x_k = 1, x_j = 0 for j > k.
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                x[k] = Complex64::new(1.0, 0.0);
                for i in (0..k).rev() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for m in i + 1..=k {
                        s += t.get(i, m) * x[m];
                    }
                    let mut d = t.get(i, i) - lambda;
                    if abs1(d) < small {
                        d = Complex64::new(small, 0.0);
                    }
                    x[i] = -s / d;
                    let big = x[i..=k].iter().map(|v| abs1(*v)).fold(0.0, f64::max);
                    if big > 1e100 {
                        for v in &mut x[i..=k] {
                            *v /= big;
                        }
                    }
                }
                // Back to the original basis: v = D Z x.
                let mut v: Vec<Complex64> = (0..n)
                    .map(|r| {
                        let s: Complex64 = (0..=k).map(|m| z.get(r, m) * x[m]).sum();
                        s * self.scale[r]
                    })
                    .collect();
                normalize(&mut v);
                v
            })
            .collect()
    }
}

fn normalize(v: &mut [Complex64]) {
    let big = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        *x /= big;
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Replaces `a` with `D^{-1} a D` and returns the diagonal of `D`.
fn balance(a: &mut Work) -> Vec<f64> {
    let n = a.n;
    let mut scale = vec![1.0; n];
    let sq = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a.get(j, i));
                    r += abs1(a.get(i, j));
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sq;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= sq;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                for j in 0..n {
                    let v = a.get(i, j) / f;
                    a.set(i, j, v);
                    let v = a.get(j, i) * f;
                    a.set(j, i, v);
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// reflectors into `z` when present.
fn hessenberg(a: &mut Work, mut z: Option<&mut Work>) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n - 2 {
        let norm: f64 = (col + 1..n).map(|r| a.get(r, col).norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a.get(col + 1, col);
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // u = x + e^{i arg x0} ‖x‖ e_1, P = I - 2 u u^H / (u^H u)
        for r in col + 1..n {
            u[r] = a.get(r, col);
        }
        u[col + 1] += phase * norm;
        let unorm2: f64 = (col + 1..n).map(|r| u[r].norm_sqr()).sum();
        if unorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / unorm2;

        // A <- P A (rows col+1..n)
        for c in col..n {
            let s: Complex64 = (col + 1..n).map(|r| u[r].conj() * a.get(r, c)).sum();
            let s = s * tau;
            for r in col + 1..n {
                let v = a.get(r, c) - u[r] * s;
                a.set(r, c, v);
            }
        }
        // A <- A P (columns col+1..n)
        for r in 0..n {
            let s: Complex64 = (col + 1..n).map(|c| a.get(r, c) * u[c]).sum();
            let s = s * tau;
            for c in col + 1..n {
                let v = a.get(r, c) - s * u[c].conj();
                a.set(r, c, v);
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for r in 0..n {
                let s: Complex64 = (col + 1..n).map(|c| z.get(r, c) * u[c]).sum();
                let s = s * tau;
                for c in col + 1..n {
                    let v = z.get(r, c) - s * u[c].conj();
                    z.set(r, c, v);
                }
            }
        }
        for r in col + 2..n {
            a.set(r, col, Complex64::new(0.0, 0.0));
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let disc = (p * p + b * c).sqrt();
    let plus = p + disc;
    let minus = p - disc;
    let denom = if plus.norm() >= minus.norm() { plus } else { minus };
    if denom.norm() == 0.0 {
        d
    } else {
        d - b * c / denom
    }
}

/// Reduces the Hessenberg matrix in `h` to upper triangular form.
fn qr_iterate(h: &mut Work, mut z: Option<&mut Work>) -> Result<()> {
    let n = h.n;
    if n == 0 {
        return Ok(());
    }
    let hnorm = h.a.iter().map(|v| abs1(*v)).fold(0.0, f64::max);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut total = 0usize;
    let max_total = MAX_SWEEPS_PER_EIGENVALUE * n.max(1);

    while hi > 0 {
        // Locate the top of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1);
            let mut s = abs1(h.get(lo - 1, lo - 1)) + abs1(h.get(lo, lo));
            if s == 0.0 {
                s = hnorm;
            }
            if abs1(sub) <= eps * s || abs1(sub) < f64::MIN_POSITIVE {
                h.set(lo, lo - 1, Complex64::new(0.0, 0.0));
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }

        sweeps += 1;
        total += 1;
        if total > max_total || sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                iterations: total,
                row: hi,
            });
        }

        let shift = if sweeps.is_multiple_of(10) {
            h.get(hi, hi) + Complex64::new(0.75 * h.get(hi, hi - 1).re.abs(), 0.0)
        } else {
            wilkinson_shift(
                h.get(hi - 1, hi - 1),
                h.get(hi - 1, hi),
                h.get(hi, hi - 1),
                h.get(hi, hi),
            )
        };

        // Implicit single-shift sweep on rows/cols lo..=hi.
        let mut x = h.get(lo, lo) - shift;
        let mut y = h.get(lo + 1, lo);
        for k in lo..hi {
            if k > lo {
                x = h.get(k, k - 1);
                y = h.get(k + 1, k - 1);
            }
            let (c, s) = givens(x, y);
            let first_col = if k > lo { k - 1 } else { lo };
            for col in first_col..n {
                let a = h.get(k, col);
                let b = h.get(k + 1, col);
                h.set(k, col, a * c + s * b);
                h.set(k + 1, col, -s.conj() * a + b * c);
            }
            let last_row = (k + 2).min(hi);
            for row in 0..=last_row {
                let a = h.get(row, k);
                let b = h.get(row, k + 1);
                h.set(row, k, a * c + b * s.conj());
                h.set(row, k + 1, -a * s + b * c);
            }
            if let Some(z) = z.as_deref_mut() {
                for row in 0..n {
                    let a = z.get(row, k);
                    let b = z.get(row, k + 1);
                    z.set(row, k, a * c + b * s.conj());
                    z.set(row, k + 1, -a * s + b * c);
                }
            }
            if k > lo {
                h.set(k + 1, k - 1, Complex64::new(0.0, 0.0));
            }
        }
    }
    Ok(())
}
