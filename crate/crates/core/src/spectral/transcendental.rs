//! Momentum quantization of the defect ring.
//!
//! Eigenvalues of the defect ring are `E = 2g cos k`, where `k` solves
//! `R(k) = sin[k(1+N)] + J² sin[k(1-N)] - 2J cosh(φN) sin k = 0`.
//! Writing `k_n = 2πn/N + θ_n`, a complex offset `θ_n` marks a complex level.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{dense_eigensolve, Spectrum, SpectrumSource};
use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, derived_params, ModelSpec, Variant};

pub const NEWTON_MAX_ITERATIONS: usize = 100;
pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const MIN_DERIVATIVE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumEquation {
    pub size: usize,
    pub defect_j: f64,
    pub phi: f64,
}

impl MomentumEquation {
    pub fn new(size: usize, defect_j: f64, phi: f64) -> Self {
        Self { size, defect_j, phi }
    }

    pub fn for_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.variant() != Variant::DefectRing {
            return Err(Error::WrongVariant {
                expected: "defect-ring",
                actual: spec.variant(),
            });
        }
        let (_, phi) = derived_params(spec);
        Ok(Self::new(spec.size(), spec.defect_factor(), phi))
    }

    fn coefficients(&self) -> (f64, f64, f64) {
        let n = self.size as f64;
        let j = self.defect_j;
        (n, j * j, 2.0 * j * (self.phi * n).cosh())
    }

    pub fn residual(&self, k: Complex64) -> Complex64 {
        let (n, j2, c) = self.coefficients();
        (k * (1.0 + n)).sin() + j2 * (k * (1.0 - n)).sin() - c * k.sin()
    }

    pub fn derivative(&self, k: Complex64) -> Complex64 {
        let (n, j2, c) = self.coefficients();
        (1.0 + n) * (k * (1.0 + n)).cos() + j2 * (1.0 - n) * (k * (1.0 - n)).cos() - c * k.cos()
    }

    /// Sum of the magnitudes of the three terms of `R(k)`.
    pub fn term_scale(&self, k: Complex64) -> f64 {
        let (n, j2, c) = self.coefficients();
        (k * (1.0 + n)).sin().norm() + j2 * (k * (1.0 - n)).sin().norm() + c.abs() * k.sin().norm()
    }

    /// Inverts `E = 2g cos k`. Of the candidates `±k₀` and `±k₀ + 2π` the
    /// one with smallest `|R|` wins; ties go to smaller `|Im k|`, then to
    /// smaller `Re k` inside `(0, 2π]`.
    pub fn momentum_for_energy(&self, energy: Complex64, g: f64) -> Complex64 {
        let k0 = (energy / (2.0 * g)).acos();
        let two_pi = Complex64::new(2.0 * PI, 0.0);
        let candidates = [k0, -k0, k0 + two_pi, two_pi - k0];
        let scored: Vec<(Complex64, f64)> = candidates.iter().map(|&k| (k, self.residual(k).norm())).collect();
        let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let cutoff = best * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        let in_range = |k: &Complex64| k.re > 0.0 && k.re <= 2.0 * PI;
        scored
            .into_iter()
            .filter(|s| s.1 <= cutoff)
            .map(|s| s.0)
            .min_by(|a, b| {
                let ia = (a.im.abs() * 1e9).round();
                let ib = (b.im.abs() * 1e9).round();
                ia.total_cmp(&ib)
                    .then(in_range(b).cmp(&in_range(a)))
                    .then(a.re.total_cmp(&b.re))
            })
            .expect("four candidates")
    }

    /// Newton iteration on `R` from `seed` until `|R| < 1e-12`.
    pub fn refine(&self, seed: Complex64) -> Result<Complex64> {
        let mut k = seed;
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let r = self.residual(k);
            if r.norm() < NEWTON_TOLERANCE {
                return Ok(k);
            }
            let d = self.derivative(k);
            if d.norm() < MIN_DERIVATIVE {
                return Err(Error::NearDegenerateRoot {
                    k_re: k.re,
                    k_im: k.im,
                    derivative: d.norm(),
                });
            }
            let step = r / d;
            k -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + k.norm()) {
                // Stagnated at rounding level: accept if |R| is at the
                // rounding floor of its own terms.
                let r = self.residual(k).norm();
                if r < NEWTON_TOLERANCE * self.term_scale(k).max(1.0) {
                    return Ok(k);
                }
                return Err(Error::NewtonNoConvergence {
                    iterations: NEWTON_MAX_ITERATIONS,
                    residual: r,
                });
            }
        }
        let residual = self.residual(k).norm();
        if residual < NEWTON_TOLERANCE {
            return Ok(k);
        }
        Err(Error::NewtonNoConvergence {
            iterations: NEWTON_MAX_ITERATIONS,
            residual,
        })
    }
}

pub fn transcendental_residual(k: Complex64, defect_j: f64, phi: f64, size: usize) -> Complex64 {
    MomentumEquation::new(size, defect_j, phi).residual(k)
}

pub fn refine_momentum(seed: Complex64, defect_j: f64, phi: f64, size: usize) -> Result<Complex64> {
    MomentumEquation::new(size, defect_j, phi).refine(seed)
}

/// Defect-ring momenta with their energies.
#[derive(Debug, Clone)]
pub struct MomentumSolution {
    pub momenta: Vec<Complex64>,
    pub spectrum: Spectrum,
}

/// Seeds every level from the oracle spectrum, refines its momentum with
/// Newton's method and maps back through `E = 2g cos k`.
pub fn defect_ring_momenta(spec: &ModelSpec) -> Result<MomentumSolution> {
    let eq = MomentumEquation::for_spec(spec)?;
    let (g, _) = derived_params(spec);
    let oracle = dense_eigensolve(&build_hamiltonian(spec))?;
    let momenta = oracle
        .eigenvalues()
        .iter()
        .map(|&e| eq.refine(eq.momentum_for_energy(e, g)))
        .collect::<Result<Vec<_>>>()?;
    let energies = momenta.iter().map(|k| 2.0 * g * k.cos()).collect();
    Ok(MomentumSolution {
        momenta,
        spectrum: Spectrum::new(energies, SpectrumSource::Transcendental),
    })
}
