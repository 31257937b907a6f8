//! Lattice variants and their Hamiltonian matrices.
//!
//! Matrix convention: the entry at `(r, c)` is the amplitude of the hopping
//! term `a_r^† a_c`, i.e. what site `c` contributes to site `r` in `H ψ`.
//! With this choice the forward coupling α of `α a_j^† a_{j+1}` sits on the
//! superdiagonal `(j, j+1)` and the backward coupling β on the subdiagonal.
//! Sites are 1-based in formulas and 0-based in indices.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|phi| * N` for which `e^{±N phi}` is representable.
pub const MAX_FLUX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    HermitianFluxRing,
    AsymmetricRing,
    OpenChain,
    DefectRing,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::HermitianFluxRing => "hermitian-flux-ring",
            Variant::AsymmetricRing => "asymmetric-ring",
            Variant::OpenChain => "open-chain",
            Variant::DefectRing => "defect-ring",
        }
    }

    pub fn is_ring(self) -> bool {
        !matches!(self, Variant::OpenChain)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Couplings of one lattice variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Model {
    /// Uniform ring with coupling κ and a real Peierls phase per bond.
    HermitianFluxRing { kappa: f64, flux: f64 },
    /// Uniform ring, forward coupling α and backward coupling β.
    AsymmetricRing { alpha: f64, beta: f64 },
    /// Same couplings as the asymmetric ring without the head-tail bond.
    OpenChain { alpha: f64, beta: f64 },
    /// Asymmetric ring whose head-tail bond is rescaled by `j`.
    DefectRing { alpha: f64, beta: f64, j: f64 },
}

impl Model {
    pub fn variant(&self) -> Variant {
        match self {
            Model::HermitianFluxRing { .. } => Variant::HermitianFluxRing,
            Model::AsymmetricRing { .. } => Variant::AsymmetricRing,
            Model::OpenChain { .. } => Variant::OpenChain,
            Model::DefectRing { .. } => Variant::DefectRing,
        }
    }
}

/// A validated lattice description. Fields are private so every instance
/// satisfies `N >= 2` and positive, finite couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec")]
pub struct ModelSpec {
    size: usize,
    #[serde(flatten)]
    model: Model,
}

#[derive(Deserialize)]
struct RawModelSpec {
    size: usize,
    #[serde(flatten)]
    model: Model,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = Error;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        Self::new(raw.size, raw.model)
    }
}

impl ModelSpec {
    pub fn new(size: usize, model: Model) -> Result<Self> {
        if size < 2 {
            return Err(Error::SizeTooSmall { size, min: 2 });
        }
        match model {
            Model::HermitianFluxRing { kappa, flux } => {
                positive("kappa", kappa)?;
                finite("flux", flux)?;
            }
            Model::AsymmetricRing { alpha, beta } | Model::OpenChain { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
            }
            Model::DefectRing { alpha, beta, j } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                finite("J", j)?;
            }
        }
        Ok(Self { size, model })
    }

    pub fn flux_ring(size: usize, kappa: f64, flux: f64) -> Result<Self> {
        Self::new(size, Model::HermitianFluxRing { kappa, flux })
    }

    pub fn asymmetric_ring(size: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(size, Model::AsymmetricRing { alpha, beta })
    }

    pub fn open_chain(size: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(size, Model::OpenChain { alpha, beta })
    }

    pub fn defect_ring(size: usize, alpha: f64, beta: f64, j: f64) -> Result<Self> {
        Self::new(size, Model::DefectRing { alpha, beta, j })
    }

    /// Builds the asymmetric couplings α = g e^φ, β = g e^{-φ} for `variant`.
    /// `j` is only read for the defect ring.
    pub fn from_gauge(variant: Variant, size: usize, g: f64, phi: f64, j: f64) -> Result<Self> {
        positive("g", g)?;
        finite("phi", phi)?;
        let (alpha, beta) = (g * phi.exp(), g * (-phi).exp());
        let model = match variant {
            Variant::AsymmetricRing => Model::AsymmetricRing { alpha, beta },
            Variant::OpenChain => Model::OpenChain { alpha, beta },
            Variant::DefectRing => Model::DefectRing { alpha, beta, j },
            Variant::HermitianFluxRing => {
                return Err(Error::WrongVariant {
                    expected: "an asymmetric-coupling model",
                    actual: variant,
                })
            }
        };
        Self::new(size, model)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn variant(&self) -> Variant {
        self.model.variant()
    }

    /// Forward and backward couplings; `None` for the flux ring.
    pub fn couplings(&self) -> Option<(f64, f64)> {
        match self.model {
            Model::HermitianFluxRing { .. } => None,
            Model::AsymmetricRing { alpha, beta }
            | Model::OpenChain { alpha, beta }
            | Model::DefectRing { alpha, beta, .. } => Some((alpha, beta)),
        }
    }

    /// Head-tail coupling factor: `J` for the defect ring, 1 for the
    /// uniform ring, 0 for the open chain.
    pub fn defect_factor(&self) -> f64 {
        match self.model {
            Model::DefectRing { j, .. } => j,
            Model::OpenChain { .. } => 0.0,
            _ => 1.0,
        }
    }

    /// Same model with a different head-tail factor (defect ring only).
    pub fn with_defect(&self, j: f64) -> Result<Self> {
        match self.model {
            Model::DefectRing { alpha, beta, .. } => Self::defect_ring(self.size, alpha, beta, j),
            _ => Err(Error::WrongVariant {
                expected: "defect-ring",
                actual: self.variant(),
            }),
        }
    }

    /// Effective imaginary flux Φ = -i N φ enclosed by a ring.
    pub fn imaginary_flux(&self) -> Complex64 {
        let (_, phi) = derived_params(self);
        Complex64::new(0.0, -(self.size as f64) * phi)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling { name, value })
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

/// Symmetric coupling `g = sqrt(αβ)` and imaginary gauge field
/// `φ = ln sqrt(α/β)`. The flux ring has no asymmetry: `(κ, 0)`.
pub fn derived_params(spec: &ModelSpec) -> (f64, f64) {
    match spec.couplings() {
        Some((alpha, beta)) => ((alpha * beta).sqrt(), 0.5 * (alpha / beta).ln()),
        None => match spec.model {
            Model::HermitianFluxRing { kappa, .. } => (kappa, 0.0),
            _ => unreachable!(),
        },
    }
}

/// Dense complex `N x N` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl HamiltonianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push(f(r, c));
            }
        }
        Self { n, entries }
    }

    /// Real matrix from rows; panics if the rows are not square.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self::from_fn(n, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    fn add(&mut self, r: usize, c: usize, value: Complex64) {
        self.entries[r * self.n + c] += value;
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.entries
            .chunks(self.n.max(1))
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)].conj())
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Largest entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for HamiltonianMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.n + c]
    }
}

/// Realizes `spec` as a dense matrix. Hoppings across the head-tail bond
/// are added onto the corners, so for N = 2 the corner and bulk bonds
/// between the same two sites are summed.
pub fn build_hamiltonian(spec: &ModelSpec) -> HamiltonianMatrix {
    let n = spec.size();
    let mut h = HamiltonianMatrix::zeros(n);
    let (forward, backward, corner) = match *spec.model() {
        Model::HermitianFluxRing { kappa, flux } => {
            let f = Complex64::from_polar(kappa, flux);
            (f, f.conj(), 1.0)
        }
        Model::AsymmetricRing { alpha, beta } => (real(alpha), real(beta), 1.0),
        Model::OpenChain { alpha, beta } => (real(alpha), real(beta), 0.0),
        Model::DefectRing { alpha, beta, j } => (real(alpha), real(beta), j),
    };
    for s in 0..n - 1 {
        h.add(s, s + 1, forward);
        h.add(s + 1, s, backward);
    }
    if corner != 0.0 {
        h.add(n - 1, 0, forward * corner);
        h.add(0, n - 1, backward * corner);
    }
    h
}

/// Applies the imaginary gauge transformation `b_j = e^{jφ} a_j`, which
/// symmetrizes every bulk bond to `g` and pushes the accumulated factor
/// into the corners: `g J e^{Nφ}` at `(N, 1)` and `g J e^{-Nφ}` at `(1, N)`.
pub fn gauge_transform_to_corner(spec: &ModelSpec) -> Result<HamiltonianMatrix> {
    match spec.variant() {
        Variant::AsymmetricRing | Variant::DefectRing => {}
        other => {
            return Err(Error::WrongVariant {
                expected: "asymmetric-ring or defect-ring",
                actual: other,
            })
        }
    }
    let n = spec.size();
    let (g, phi) = derived_params(spec);
    let exponent = n as f64 * phi;
    if exponent.abs() > MAX_FLUX_EXPONENT {
        return Err(Error::FluxOverflow {
            exponent: exponent.abs(),
        });
    }
    let j = spec.defect_factor();
    let mut h = HamiltonianMatrix::zeros(n);
    for s in 0..n - 1 {
        h.add(s, s + 1, real(g));
        h.add(s + 1, s, real(g));
    }
    h.add(n - 1, 0, real(g * j * exponent.exp()));
    h.add(0, n - 1, real(g * j * (-exponent).exp()));
    Ok(h)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn re(h: &HamiltonianMatrix, r: usize, c: usize) -> f64 {
        assert_eq!(h[(r, c)].im, 0.0);
        h[(r, c)].re
    }

    #[test]
    fn open_chain_dimer() {
        let spec = ModelSpec::open_chain(2, 4.0, 1.0).unwrap();
        let h = build_hamiltonian(&spec);
        let expected = HamiltonianMatrix::from_real_rows(&[&[0.0, 4.0], &[1.0, 0.0]]);
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn flux_ring_zero_phase_is_three_cycle() {
        let h = build_hamiltonian(&ModelSpec::flux_ring(3, 1.0, 0.0).unwrap());
        let expected = HamiltonianMatrix::from_real_rows(&[
            &[0.0, 1.0, 1.0],
            &[1.0, 0.0, 1.0],
            &[1.0, 1.0, 0.0],
        ]);
        assert_eq!(h, expected);
    }

    #[test]
    fn flux_ring_is_hermitian() {
        for flux in [0.0, 0.3, 1.7, std::f64::consts::PI] {
            let h = build_hamiltonian(&ModelSpec::flux_ring(7, 1.3, flux).unwrap());
            assert!(h.max_abs_diff(&h.conj_transpose()) < 1e-15);
        }
    }

    #[test]
    fn unit_defect_is_uniform_ring() {
        let a = build_hamiltonian(&ModelSpec::defect_ring(4, 1.0, 1.0, 1.0).unwrap());
        let b = build_hamiltonian(&ModelSpec::asymmetric_ring(4, 1.0, 1.0).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn zero_defect_is_open_chain() {
        let a = build_hamiltonian(&ModelSpec::defect_ring(9, 2.0, 0.7, 0.0).unwrap());
        let b = build_hamiltonian(&ModelSpec::open_chain(9, 2.0, 0.7).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn asymmetric_ring_entries() {
        let h = build_hamiltonian(&ModelSpec::asymmetric_ring(5, 3.0, 0.5).unwrap());
        for s in 0..4 {
            assert_eq!(re(&h, s, s + 1), 3.0);
            assert_eq!(re(&h, s + 1, s), 0.5);
        }
        assert_eq!(re(&h, 4, 0), 3.0);
        assert_eq!(re(&h, 0, 4), 0.5);
        assert_eq!(re(&h, 2, 2), 0.0);
    }

    #[test]
    fn corner_form_entries() {
        let spec = ModelSpec::asymmetric_ring(4, 4.0, 1.0).unwrap();
        let h = gauge_transform_to_corner(&spec).unwrap();
        for s in 0..3 {
            assert_relative_eq!(re(&h, s, s + 1), 2.0, max_relative = 1e-15);
            assert_relative_eq!(re(&h, s + 1, s), 2.0, max_relative = 1e-15);
        }
        assert_relative_eq!(re(&h, 3, 0), 32.0, max_relative = 1e-14);
        assert_relative_eq!(re(&h, 0, 3), 0.125, max_relative = 1e-14);

        let h = gauge_transform_to_corner(&ModelSpec::defect_ring(3, 1.0, 1.0, 2.0).unwrap()).unwrap();
        let expected = HamiltonianMatrix::from_real_rows(&[
            &[0.0, 1.0, 2.0],
            &[1.0, 0.0, 1.0],
            &[2.0, 1.0, 0.0],
        ]);
        assert_eq!(h, expected);
    }

    #[test]
    fn corner_form_of_symmetric_dimer_is_unchanged() {
        let spec = ModelSpec::asymmetric_ring(2, 1.0, 1.0).unwrap();
        assert_eq!(gauge_transform_to_corner(&spec).unwrap(), build_hamiltonian(&spec));
    }

    #[test]
    fn corner_form_rejects_chain_and_overflow() {
        let chain = ModelSpec::open_chain(4, 2.0, 1.0).unwrap();
        assert!(matches!(
            gauge_transform_to_corner(&chain),
            Err(Error::WrongVariant { .. })
        ));
        let big = ModelSpec::from_gauge(Variant::AsymmetricRing, 100, 1.0, 7.5, 1.0).unwrap();
        assert!(matches!(
            gauge_transform_to_corner(&big),
            Err(Error::FluxOverflow { .. })
        ));
        assert!(build_hamiltonian(&big).entries().iter().all(|z| z.is_finite()));
    }

    #[test]
    fn derived_parameters() {
        let (g, phi) = derived_params(&ModelSpec::open_chain(3, 4.0, 1.0).unwrap());
        assert_relative_eq!(g, 2.0);
        assert_relative_eq!(phi, std::f64::consts::LN_2, max_relative = 1e-15);

        let (g, phi) = derived_params(&ModelSpec::open_chain(3, 1.0, 1.0).unwrap());
        assert_eq!((g, phi), (1.0, 0.0));

        let (_, phi) = derived_params(&ModelSpec::open_chain(20, 1.1025, 1.0).unwrap());
        assert_relative_eq!(phi.exp(), 1.05, max_relative = 1e-15);
    }

    #[test]
    fn validation() {
        assert_eq!(
            ModelSpec::open_chain(1, 1.0, 1.0),
            Err(Error::SizeTooSmall { size: 1, min: 2 })
        );
        assert!(ModelSpec::open_chain(4, 0.0, 1.0).is_err());
        assert!(ModelSpec::asymmetric_ring(4, 1.0, -1.0).is_err());
        assert!(ModelSpec::flux_ring(4, 0.0, 0.1).is_err());
        assert!(ModelSpec::defect_ring(4, 1.0, 1.0, f64::NAN).is_err());
        assert!(ModelSpec::defect_ring(4, 1.0, 1.0, -3.0).is_ok());
    }

    #[test]
    fn imaginary_flux_report() {
        let spec = ModelSpec::asymmetric_ring(10, 4.0, 1.0).unwrap();
        let flux = spec.imaginary_flux();
        assert_eq!(flux.re, 0.0);
        assert_relative_eq!(flux.im, -10.0 * std::f64::consts::LN_2, max_relative = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gauge_round_trip(alpha in 0.01f64..100.0, beta in 0.01f64..100.0) {
                let spec = ModelSpec::open_chain(3, alpha, beta).unwrap();
                let (g, phi) = derived_params(&spec);
                prop_assert!((g * phi.exp() - alpha).abs() <= 4.0 * f64::EPSILON * alpha);
                prop_assert!((g * (-phi).exp() - beta).abs() <= 4.0 * f64::EPSILON * beta);
            }

            #[test]
            fn real_couplings_give_real_matrices(
                n in 2usize..12, alpha in 0.1f64..5.0, beta in 0.1f64..5.0, j in -3.0f64..3.0
            ) {
                let h = build_hamiltonian(&ModelSpec::defect_ring(n, alpha, beta, j).unwrap());
                prop_assert!(h.is_real());
                let c = gauge_transform_to_corner(&ModelSpec::defect_ring(n, alpha, beta, j).unwrap()).unwrap();
                prop_assert!(c.is_real());
            }
        }
    }
}
