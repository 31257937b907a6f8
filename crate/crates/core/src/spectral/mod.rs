//! Spectra and eigenstates: closed forms for the uniform ring and the open
//! chain, a dense eigensolver used as the oracle, and the momentum equation
//! of the defect ring.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{derived_params, HamiltonianMatrix, Model, ModelSpec, Variant, MAX_FLUX_EXPONENT};

pub mod dense;
pub mod transcendental;

pub use dense::{dense_eigensolve, dense_eigensystem, EigenSystem};
pub use transcendental::{refine_momentum, transcendental_residual, MomentumEquation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    ClosedForm,
    Oracle,
    Transcendental,
}

/// Lexicographic order on (Re, Im).
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Multiset of eigenvalues in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    source: SpectrumSource,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<Complex64>, source: SpectrumSource) -> Self {
        eigenvalues.sort_by(canonical_cmp);
        Self { eigenvalues, source }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.eigenvalues.iter().map(|e| -e).collect(), self.source)
    }

    pub fn conjugated(&self) -> Self {
        Self::new(self.eigenvalues.iter().map(|e| e.conj()).collect(), self.source)
    }

    /// Multiset distance: each eigenvalue is matched to its nearest
    /// not-yet-used partner and the largest matched distance is returned.
    /// Infinite when the lengths differ.
    pub fn max_deviation(&self, other: &Spectrum) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let pairs = match_multisets(&self.eigenvalues, &other.eigenvalues);
        pairs
            .iter()
            .enumerate()
            .map(|(i, &j)| (self.eigenvalues[i] - other.eigenvalues[j]).norm())
            .fold(0.0, f64::max)
    }
}

/// Greedy nearest matching: `result[i]` is the index in `b` paired with
/// `a[i]`. Both slices must have equal length.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    a.iter()
        .map(|x| {
            let (j, _) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("slices have equal length");
            used[j] = true;
            j
        })
        .collect()
}

/// One level of a closed-form spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Quantum number n in 1..=N.
    pub index: usize,
    pub momentum: f64,
    pub energy: Complex64,
}

fn wrong_variant(expected: &'static str, spec: &ModelSpec) -> Error {
    Error::WrongVariant {
        expected,
        actual: spec.variant(),
    }
}

/// Ring levels `E_n = 2g cos(k_n - iφ)` (asymmetric ring) or
/// `E_n = 2κ cos(k_n + φ)` (flux ring) with `k_n = 2πn/N`.
pub fn ring_levels(spec: &ModelSpec) -> Result<Vec<Level>> {
    let n = spec.size();
    if n < 3 {
        return Err(Error::SizeTooSmall { size: n, min: 3 });
    }
    let momenta = (1..=n).map(|i| (i, 2.0 * PI * i as f64 / n as f64));
    let levels = match *spec.model() {
        Model::HermitianFluxRing { kappa, flux } => momenta
            .map(|(index, k)| Level {
                index,
                momentum: k,
                energy: Complex64::new(2.0 * kappa * (k + flux).cos(), 0.0),
            })
            .collect(),
        Model::AsymmetricRing { .. } => {
            let (g, phi) = derived_params(spec);
            momenta
                .map(|(index, k)| Level {
                    index,
                    momentum: k,
                    energy: 2.0 * g * Complex64::new(k, -phi).cos(),
                })
                .collect()
        }
        _ => return Err(wrong_variant("asymmetric-ring or hermitian-flux-ring", spec)),
    };
    Ok(levels)
}

pub fn ring_spectrum_closed_form(spec: &ModelSpec) -> Result<Spectrum> {
    let levels = ring_levels(spec)?;
    Ok(Spectrum::new(
        levels.into_iter().map(|l| l.energy).collect(),
        SpectrumSource::ClosedForm,
    ))
}

/// Open-chain levels `2g cos(nπ/(N+1))`, independent of φ.
pub fn open_chain_levels(spec: &ModelSpec) -> Result<Vec<Level>> {
    if spec.variant() != Variant::OpenChain {
        return Err(wrong_variant("open-chain", spec));
    }
    let n = spec.size();
    let (g, _) = derived_params(spec);
    Ok((1..=n)
        .map(|index| {
            let k = chain_momentum(index, n);
            Level {
                index,
                momentum: k,
                energy: Complex64::new(2.0 * g * k.cos(), 0.0),
            }
        })
        .collect())
}

pub fn open_chain_spectrum_closed_form(spec: &ModelSpec) -> Result<Spectrum> {
    let levels = open_chain_levels(spec)?;
    Ok(Spectrum::new(
        levels.into_iter().map(|l| l.energy).collect(),
        SpectrumSource::ClosedForm,
    ))
}

/// `k_n = nπ/(N+1)`.
pub fn chain_momentum(mode: usize, size: usize) -> f64 {
    mode as f64 * PI / (size as f64 + 1.0)
}

/// Amplitudes below this are flushed to zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-300;

/// `e^{-φ (j - shift)} sin(k j)` for `j = 1..=N`. A nonzero `shift` only
/// rescales the vector and keeps large-`|φ|N` amplitudes in range.
pub fn chain_right_amplitudes(mode: usize, size: usize, phi: f64, shift: f64) -> Vec<f64> {
    let k = chain_momentum(mode, size);
    (1..=size)
        .map(|j| {
            let j = j as f64;
            let f = (-phi * (j - shift)).exp() * (k * j).sin();
            if f.abs() < AMPLITUDE_FLOOR {
                0.0
            } else {
                f
            }
        })
        .collect()
}

/// Site of largest envelope: 1 for φ ≥ 0, N otherwise.
pub fn envelope_peak_site(size: usize, phi: f64) -> f64 {
    if phi >= 0.0 {
        1.0
    } else {
        size as f64
    }
}

/// Sum of `values` taken in descending magnitude.
fn sum_descending(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    values.into_iter().sum()
}

/// Closed-form right and left eigenstates of the open chain.
///
/// `right[n-1][j-1] = e^{-φj} sin(k_n j)` and `left[n-1][j-1] = e^{φj} sin(k_n j)`
/// are unnormalized. `dirac_norms[n-1]` is `Ω_n = sqrt(Σ_j f_j²)` and
/// `biorth_norms[n-1]` is `Λ_n = Σ_j |f̃_j f_j|`. The normalized states are
/// `f/Ω` (right) and `(Ω/Λ) f̃` (left).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub size: usize,
    pub g: f64,
    pub phi: f64,
    pub momenta: Vec<f64>,
    pub energies: Vec<f64>,
    pub right: Vec<Vec<f64>>,
    pub left: Vec<Vec<f64>>,
    pub dirac_norms: Vec<f64>,
    pub biorth_norms: Vec<f64>,
}

pub fn open_chain_eigenpairs(spec: &ModelSpec) -> Result<ModeSet> {
    if spec.variant() != Variant::OpenChain {
        return Err(wrong_variant("open-chain", spec));
    }
    let n = spec.size();
    let (g, phi) = derived_params(spec);
    let exponent = phi.abs() * n as f64;
    if exponent > MAX_FLUX_EXPONENT {
        return Err(Error::FluxOverflow { exponent });
    }
    let momenta: Vec<f64> = (1..=n).map(|m| chain_momentum(m, n)).collect();
    let energies = momenta.iter().map(|k| 2.0 * g * k.cos()).collect();
    let right: Vec<Vec<f64>> = (1..=n).map(|m| chain_right_amplitudes(m, n, phi, 0.0)).collect();
    let left: Vec<Vec<f64>> = (1..=n).map(|m| chain_right_amplitudes(m, n, -phi, 0.0)).collect();
    let dirac_norms = right
        .iter()
        .map(|f| sum_descending(f.iter().map(|x| x * x).collect()).sqrt())
        .collect();
    let biorth_norms = right
        .iter()
        .zip(&left)
        .map(|(f, l)| sum_descending(f.iter().zip(l).map(|(a, b)| (a * b).abs()).collect()))
        .collect();
    Ok(ModeSet {
        size: n,
        g,
        phi,
        momenta,
        energies,
        right,
        left,
        dirac_norms,
        biorth_norms,
    })
}

impl ModeSet {
    fn check_mode(&self, mode: usize) -> Result<usize> {
        if (1..=self.size).contains(&mode) {
            Ok(mode - 1)
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                size: self.size,
            })
        }
    }

    /// Dirac-normalized right state `f/Ω` of mode `n` (1-based).
    pub fn normalized_right(&self, mode: usize) -> Result<Vec<f64>> {
        let i = self.check_mode(mode)?;
        let omega = self.dirac_norms[i];
        Ok(self.right[i].iter().map(|f| f / omega).collect())
    }

    /// Left state `(Ω/Λ) f̃` paired with [`Self::normalized_right`].
    pub fn normalized_left(&self, mode: usize) -> Result<Vec<f64>> {
        let i = self.check_mode(mode)?;
        let factor = self.dirac_norms[i] / self.biorth_norms[i];
        Ok(self.left[i].iter().map(|f| f * factor).collect())
    }

    /// Overlaps `<ψ_m^L | ψ_n^R>`, row m, column n.
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        let lefts: Vec<Vec<f64>> = (1..=self.size).map(|m| self.normalized_left(m).unwrap()).collect();
        let rights: Vec<Vec<f64>> = (1..=self.size).map(|m| self.normalized_right(m).unwrap()).collect();
        lefts
            .iter()
            .map(|l| {
                rights
                    .iter()
                    .map(|r| l.iter().zip(r).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect()
    }

    /// Largest `|G_mn - δ_mn|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        self.gram_matrix()
            .iter()
            .enumerate()
            .flat_map(|(m, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(n, g)| (g - if m == n { 1.0 } else { 0.0 }).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative residual `‖H ψ - ε ψ‖ / ‖H‖_F` over right states,
    /// and over left states against `H^†`.
    pub fn max_relative_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let ht = h.conj_transpose();
        let scale = h.norm_fro();
        let to_c = |v: Vec<f64>| -> Vec<Complex64> { v.into_iter().map(|x| Complex64::new(x, 0.0)).collect() };
        (1..=self.size)
            .flat_map(|m| {
                let e = Complex64::new(self.energies[m - 1], 0.0);
                let r = dense::residual_norm(h, e, &to_c(self.normalized_right(m).unwrap()));
                let l = dense::residual_norm(&ht, e, &to_c(self.normalized_left(m).unwrap()));
                [r / scale, l / scale]
            })
            .fold(0.0, f64::max)
    }
}
