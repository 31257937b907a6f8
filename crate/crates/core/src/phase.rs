//! Real-to-complex spectral transitions of the defect ring.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, HamiltonianMatrix, ModelSpec, Variant};
use crate::spectral::{dense_eigensolve, Spectrum};

/// Relative part of the default imaginary-part tolerance.
pub const DEFAULT_TOL_SCALE: f64 = 1e-9;

/// `1e-9 * max(1, ‖H‖_∞)`.
pub fn default_tol_imag(h: &HamiltonianMatrix) -> f64 {
    DEFAULT_TOL_SCALE * h.norm_inf().max(1.0)
}

/// How the imaginary-part threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImagTolerance {
    /// [`default_tol_imag`] of each matrix.
    #[default]
    Auto,
    Fixed(f64),
}

impl ImagTolerance {
    pub fn resolve(self, h: &HamiltonianMatrix) -> f64 {
        match self {
            ImagTolerance::Auto => default_tol_imag(h),
            ImagTolerance::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseClassification {
    pub n_complex: usize,
    pub size: usize,
    /// Degree of complex levels, `n_complex / N`.
    pub degree: f64,
    pub entirely_real: bool,
    pub tol_imag: f64,
}

pub fn classify_spectrum(spectrum: &Spectrum, tol_imag: f64) -> Result<PhaseClassification> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(tol_imag > 0.0) {
        return Err(Error::InvalidTolerance(tol_imag));
    }
    let n_complex = spectrum
        .eigenvalues()
        .iter()
        .filter(|e| e.im.abs() > tol_imag)
        .count();
    Ok(PhaseClassification {
        n_complex,
        size: spectrum.len(),
        degree: n_complex as f64 / spectrum.len() as f64,
        entirely_real: n_complex == 0,
        tol_imag,
    })
}

/// Classifies the oracle spectrum of `spec`.
pub fn classify_model(spec: &ModelSpec, tol: ImagTolerance) -> Result<PhaseClassification> {
    let h = build_hamiltonian(spec);
    classify_spectrum(&dense_eigensolve(&h)?, tol.resolve(&h))
}

/// Auxiliary angle `η_n` and amplitude `ξ_n` of the large-N reduction
/// `sin(η_n + N θ_n) = 2J cosh(φN) sin(2nπ/N) / ξ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticLevel {
    pub eta: f64,
    pub xi: f64,
}

pub fn asymptotic_level(level: usize, j: f64, size: usize) -> AsymptoticLevel {
    let q = 2.0 * PI * level as f64 / size as f64;
    let j2 = j * j;
    let xi = ((1.0 - j2).powi(2) + 4.0 * j2 * q.sin().powi(2)).sqrt();
    let eta = ((1.0 + j2) * q.sin()).atan2((1.0 - j2) * q.cos());
    AsymptoticLevel { eta, xi }
}

/// Large-N prediction that level `n` is complex:
/// `sinh²(φN) > (1 - J²)² / (4 J² sin²(2nπ/N))`, i.e. the right-hand side
/// of the η/ξ reduction exceeds 1 in magnitude.
pub fn complex_level_condition(level: usize, j: f64, phi: f64, size: usize) -> Result<bool> {
    let excluded = level == 0 || level >= size || (size.is_multiple_of(2) && level == size / 2);
    if excluded {
        return Err(Error::ExcludedLevel { level, size });
    }
    if j == 0.0 {
        return Err(Error::ZeroDefect);
    }
    let s = (2.0 * PI * level as f64 / size as f64).sin();
    let lhs = 4.0 * j * j * s * s * (phi * size as f64).sinh().powi(2);
    Ok(lhs > (1.0 - j * j).powi(2))
}

/// `±e^{±φN}` in ascending order, for `N` divisible by 4.
pub fn critical_couplings(phi: f64, size: usize) -> Result<[f64; 4]> {
    if size == 0 || !size.is_multiple_of(4) {
        return Err(Error::SizeNotMultipleOfFour(size));
    }
    let big = (phi.abs() * size as f64).exp();
    let small = 1.0 / big;
    Ok([-big, -small, small, big])
}

/// Defect rings of fixed size and symmetric coupling `g`, parameterized by
/// the defect factor `J` and gauge field `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectRingFamily {
    pub size: usize,
    pub g: f64,
}

impl DefectRingFamily {
    pub fn new(size: usize, g: f64) -> Result<Self> {
        ModelSpec::from_gauge(Variant::DefectRing, size, g, 0.0, 1.0)?;
        Ok(Self { size, g })
    }

    /// Family with `g = sqrt(αβ)`.
    pub fn from_product(size: usize, alpha_beta: f64) -> Result<Self> {
        if !(alpha_beta > 0.0 && alpha_beta.is_finite()) {
            return Err(Error::NonPositiveCoupling {
                name: "alpha*beta",
                value: alpha_beta,
            });
        }
        Self::new(size, alpha_beta.sqrt())
    }

    pub fn spec(&self, j: f64, phi: f64) -> Result<ModelSpec> {
        ModelSpec::from_gauge(Variant::DefectRing, self.size, self.g, phi, j)
    }

    pub fn classify(&self, j: f64, phi: f64, tol: ImagTolerance) -> Result<PhaseClassification> {
        classify_model(&self.spec(j, phi)?, tol)
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("{name} grid is not increasing")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub j_index: usize,
    pub phi_index: usize,
    pub j: f64,
    pub phi: f64,
    /// `None` when the eigensolver failed; see `error`.
    pub classification: Option<PhaseClassification>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub phi_index: usize,
    pub phi: f64,
    /// Grid values bracketing the transition.
    pub j_lo: f64,
    pub j_hi: f64,
    pub j_boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub family: DefectRingFamily,
    pub j_axis: Vec<f64>,
    pub phi_axis: Vec<f64>,
    /// Row-major: all J values for `phi_axis[0]`, then the next row.
    pub cells: Vec<PhaseCell>,
    pub boundaries: Vec<Boundary>,
}

impl PhaseDiagram {
    pub fn cell(&self, j_index: usize, phi_index: usize) -> &PhaseCell {
        &self.cells[phi_index * self.j_axis.len() + j_index]
    }
}

/// Classifies every `(J, φ)` grid cell and bisects each real/complex
/// change along a row down to `tol_j`. Cells are evaluated in parallel on
/// the current rayon pool and merged in grid order.
pub fn phase_diagram_sweep(
    family: DefectRingFamily,
    j_grid: &[f64],
    phi_grid: &[f64],
    tol: ImagTolerance,
    tol_j: f64,
) -> Result<PhaseDiagram> {
    check_grid("J", j_grid)?;
    check_grid("phi", phi_grid)?;
    if let ImagTolerance::Fixed(t) = tol {
        if !(t > 0.0) {
            return Err(Error::InvalidTolerance(t));
        }
    }
    let nj = j_grid.len();
    let cells: Vec<PhaseCell> = (0..nj * phi_grid.len())
        .into_par_iter()
        .map(|idx| {
            let (phi_index, j_index) = (idx / nj, idx % nj);
            let (j, phi) = (j_grid[j_index], phi_grid[phi_index]);
            let (classification, error) = match family.classify(j, phi, tol) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            PhaseCell {
                j_index,
                phi_index,
                j,
                phi,
                classification,
                error,
            }
        })
        .collect();

    let brackets: Vec<(usize, f64, f64, f64)> = cells
        .chunks(nj)
        .flat_map(|row| {
            row.windows(2).filter_map(|w| match (&w[0].classification, &w[1].classification) {
                (Some(a), Some(b)) if a.entirely_real != b.entirely_real => {
                    Some((w[0].phi_index, w[0].phi, w[0].j, w[1].j))
                }
                _ => None,
            })
        })
        .collect();
    let boundaries = brackets
        .into_par_iter()
        .filter_map(|(phi_index, phi, lo, hi)| {
            boundary_bisect(family, phi, lo, hi, tol, tol_j)
                .ok()
                .map(|j_boundary| Boundary {
                    phi_index,
                    phi,
                    j_lo: lo,
                    j_hi: hi,
                    j_boundary,
                })
        })
        .collect();

    Ok(PhaseDiagram {
        family,
        j_axis: j_grid.to_vec(),
        phi_axis: phi_grid.to_vec(),
        cells,
        boundaries,
    })
}

/// Bisects on `J` between two couplings of opposite classification until
/// the bracket is narrower than `tol_j`; returns the bracket midpoint.
pub fn boundary_bisect(
    family: DefectRingFamily,
    phi: f64,
    j_lo: f64,
    j_hi: f64,
    tol: ImagTolerance,
    tol_j: f64,
) -> Result<f64> {
    if !(tol_j > 0.0) {
        return Err(Error::InvalidTolerance(tol_j));
    }
    let (mut a, mut b) = (j_lo, j_hi);
    let real_a = family.classify(a, phi, tol)?.entirely_real;
    let real_b = family.classify(b, phi, tol)?.entirely_real;
    if real_a == real_b {
        return Err(Error::InvalidBracket { lo: j_lo, hi: j_hi });
    }
    while (b - a).abs() >= tol_j {
        let mid = 0.5 * (a + b);
        if family.classify(mid, phi, tol)?.entirely_real == real_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreePoint {
    pub j: f64,
    pub degree: f64,
    pub n_complex: usize,
}

/// Degree of complex levels along one `φ` row. The plateaus are reported
/// as computed.
pub fn degree_curve(
    family: DefectRingFamily,
    phi: f64,
    j_grid: &[f64],
    tol: ImagTolerance,
) -> Result<Vec<DegreePoint>> {
    check_grid("J", j_grid)?;
    j_grid
        .par_iter()
        .map(|&j| {
            let c = family.classify(j, phi, tol)?;
            Ok(DegreePoint {
                j,
                degree: c.degree,
                n_complex: c.n_complex,
            })
        })
        .collect()
}
