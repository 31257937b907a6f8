//! Invariant suites behind `nhspec verify`.
//!
//! Every suite covers N = 3..=12 exhaustively and spot checks N = 20, 30, 50.
//! A computation error inside a check counts as an infinite deviation.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nhspec_core::lattice::{build_hamiltonian, gauge_transform_to_corner, ModelSpec, Variant};
use nhspec_core::localization::{
    averaged_biorthogonal_ipr, averaged_ipr, asymptotic_ipr, dirac_ipr, mode_profile, per_mode_biorthogonal_ipr,
    per_mode_ipr,
};
use nhspec_core::phase::{boundary_bisect, classify_model, critical_couplings, DefectRingFamily, ImagTolerance};
use nhspec_core::spectral::transcendental::MomentumEquation;
use nhspec_core::spectral::{
    chain_right_amplitudes, dense_eigensolve, open_chain_eigenpairs, open_chain_spectrum_closed_form,
    ring_spectrum_closed_form, Spectrum,
};
use nhspec_core::Result as CoreResult;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

pub const SUITES: [&str; 4] = ["lattice", "spectral", "phase", "ipr"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub suite: String,
    pub name: String,
    pub instances: usize,
    pub max_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Parameters of the instance with the largest deviation.
    pub worst_case: String,
}

impl InvariantResult {
    pub fn line(&self) -> String {
        format!(
            "{}/{} instances={} max_dev={:.3e} tol={:.1e} {}{}",
            self.suite,
            self.name,
            self.instances,
            self.max_dev,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" },
            if self.pass {
                String::new()
            } else {
                format!(" worst={}", self.worst_case)
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub results: Vec<InvariantResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn text(&self) -> String {
        let mut s: String = self.results.iter().map(|r| r.line() + "\n").collect();
        let failed = self.results.iter().filter(|r| !r.pass).count();
        s.push_str(&format!(
            "{} invariants, {} failed: {}\n",
            self.results.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        ));
        s
    }

    /// Text to stdout; a copy goes to `out` as JSON or text.
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.text();
        print!("{text}");
        std::io::stdout().flush()?;
        if let Some(path) = out {
            let mut f = File::create(path)?;
            match format {
                Format::Json => crate::output::write_json(self, &mut f)?,
                Format::Csv => f.write_all(text.as_bytes())?,
            }
        }
        Ok(())
    }
}

/// Runs the selected suites, or all of them.
pub fn run_verify(only: Option<&[String]>) -> Result<VerifyReport, CliError> {
    let selected: Vec<&str> = match only {
        None => SUITES.to_vec(),
        Some(names) => {
            for n in names {
                if !SUITES.contains(&n.as_str()) {
                    return Err(CliError::Config(format!(
                        "unknown verify suite {n:?}; expected one of {}",
                        SUITES.join(", ")
                    )));
                }
            }
            SUITES.iter().copied().filter(|s| names.iter().any(|n| n == s)).collect()
        }
    };
    let mut results = Vec::new();
    for suite in selected {
        results.extend(match suite {
            "lattice" => lattice_suite(),
            "spectral" => spectral_suite(),
            "phase" => phase_suite(),
            _ => ipr_suite(),
        });
    }
    Ok(VerifyReport { results })
}

fn sizes() -> Vec<usize> {
    (3..=12).chain([20, 30, 50]).collect()
}

/// Evaluates `dev` on every case in parallel; errors count as infinite.
fn check<T: Sync + std::fmt::Debug>(
    suite: &str,
    name: &str,
    tolerance: f64,
    cases: &[T],
    dev: impl Fn(&T) -> CoreResult<f64> + Sync,
) -> InvariantResult {
    let devs: Vec<f64> = cases
        .par_iter()
        .map(|c| match dev(c) {
            Ok(d) if d.is_nan() => f64::INFINITY,
            Ok(d) => d,
            Err(_) => f64::INFINITY,
        })
        .collect();
    let worst = (0..devs.len()).max_by(|&a, &b| devs[a].total_cmp(&devs[b]));
    let max_dev = worst.map_or(0.0, |i| devs[i]);
    InvariantResult {
        worst_case: worst.map(|i| format!("{:?}", cases[i])).unwrap_or_default(),
        suite: suite.into(),
        name: name.into(),
        instances: cases.len(),
        max_dev,
        tolerance,
        pass: !cases.is_empty() && max_dev <= tolerance,
    }
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn oracle(spec: &ModelSpec) -> CoreResult<Spectrum> {
    dense_eigensolve(&build_hamiltonian(spec))
}

fn gauge(variant: Variant, n: usize, phi: f64, j: f64) -> CoreResult<ModelSpec> {
    ModelSpec::from_gauge(variant, n, 1.0, phi, j)
}

fn lattice_suite() -> Vec<InvariantResult> {
    let mut gauge_cases = Vec::new();
    for n in sizes() {
        for phi in [0.0, 0.05, 0.1] {
            gauge_cases.push((Variant::AsymmetricRing, n, phi, 1.0));
            for j in [0.5, -1.3, 2.0] {
                gauge_cases.push((Variant::DefectRing, n, phi, j));
            }
        }
    }
    let mut real_cases = Vec::new();
    for n in sizes() {
        for phi in [0.0, 0.3, -0.7] {
            real_cases.push((Variant::AsymmetricRing, n, phi, 1.0));
            real_cases.push((Variant::OpenChain, n, phi, 0.0));
            real_cases.push((Variant::DefectRing, n, phi, 1.7));
        }
    }
    let chain_cases: Vec<(usize, f64)> = sizes().into_iter().flat_map(|n| [(n, 0.0), (n, 0.4), (n, -1.1)]).collect();
    let flux_cases: Vec<(usize, f64)> = sizes()
        .into_iter()
        .flat_map(|n| [(n, 0.0), (n, 0.3), (n, 1.7), (n, std::f64::consts::PI / n as f64)])
        .collect();
    vec![
        check("lattice", "gauge_invariance", 1e-9, &gauge_cases, |&(v, n, phi, j)| {
            let spec = gauge(v, n, phi, j)?;
            let a = oracle(&spec)?;
            let b = dense_eigensolve(&gauge_transform_to_corner(&spec)?)?;
            Ok(a.max_deviation(&b))
        }),
        check("lattice", "real_matrix", 0.0, &real_cases, |&(v, n, phi, j)| {
            Ok(flag(build_hamiltonian(&gauge(v, n, phi, j)?).is_real()))
        }),
        check("lattice", "conjugate_pairs", 1e-9, &real_cases, |&(v, n, phi, j)| {
            let s = oracle(&gauge(v, n, phi, j)?)?;
            Ok(s.max_deviation(&s.conjugated()))
        }),
        check("lattice", "zero_defect_is_chain", 0.0, &chain_cases, |&(n, phi)| {
            let a = build_hamiltonian(&gauge(Variant::DefectRing, n, phi, 0.0)?);
            let b = build_hamiltonian(&gauge(Variant::OpenChain, n, phi, 0.0)?);
            Ok(a.max_abs_diff(&b))
        }),
        check("lattice", "flux_ring_hermitian", 0.0, &flux_cases, |&(n, flux)| {
            let h = build_hamiltonian(&ModelSpec::flux_ring(n, 1.0, flux)?);
            Ok(h.max_abs_diff(&h.conj_transpose()))
        }),
    ]
}

fn spectral_suite() -> Vec<InvariantResult> {
    let phis = [0.0, 0.3, 0.7, 1.0];
    let ring_cases: Vec<(usize, f64)> = sizes().into_iter().flat_map(|n| phis.map(|p| (n, p))).collect();
    let flux_cases: Vec<(usize, f64)> = sizes().into_iter().flat_map(|n| [(n, 0.0), (n, 0.4), (n, 2.5)]).collect();
    let count_cases: Vec<(usize, f64)> = sizes().into_iter().flat_map(|n| [(n, 0.1), (n, 0.5)]).collect();
    let chain_cases: Vec<(usize, f64)> = sizes()
        .into_iter()
        .flat_map(|n| [(n, 0.2), (n, std::f64::consts::LN_2), (n, -0.5)])
        .collect();
    let mode_cases: Vec<(usize, f64)> = sizes()
        .into_iter()
        .flat_map(|n| [(n, 0.0), (n, 0.3), (n, std::f64::consts::LN_2)])
        .collect();
    let defect_cases: Vec<(usize, f64, f64)> = sizes()
        .into_iter()
        .flat_map(|n| [0.5, 1.0, 2.0].into_iter().flat_map(move |j| [(n, 1.05f64.ln(), j), (n, 0.02, j)]))
        .collect();
    let small_defect_cases: Vec<(usize, f64, f64)> = defect_cases.iter().copied().filter(|c| c.0 <= 20).collect();
    vec![
        check("spectral", "ring_closed_form_vs_oracle", 1e-9, &ring_cases, |&(n, phi)| {
            let spec = gauge(Variant::AsymmetricRing, n, phi, 1.0)?;
            Ok(ring_spectrum_closed_form(&spec)?.max_deviation(&oracle(&spec)?))
        }),
        check("spectral", "flux_ring_closed_form_vs_oracle", 1e-9, &flux_cases, |&(n, flux)| {
            let spec = ModelSpec::flux_ring(n, 1.0, flux)?;
            Ok(ring_spectrum_closed_form(&spec)?.max_deviation(&oracle(&spec)?))
        }),
        check("spectral", "chain_closed_form_vs_oracle", 1e-9, &ring_cases, |&(n, phi)| {
            let spec = gauge(Variant::OpenChain, n, phi, 0.0)?;
            Ok(open_chain_spectrum_closed_form(&spec)?.max_deviation(&oracle(&spec)?))
        }),
        check("spectral", "ring_real_level_count", 0.0, &count_cases, |&(n, phi)| {
            let c = classify_model(&gauge(Variant::AsymmetricRing, n, phi, 1.0)?, ImagTolerance::Auto)?;
            let expected = if n % 2 == 0 { 2 } else { 1 };
            Ok((n - c.n_complex).abs_diff(expected) as f64)
        }),
        check("spectral", "chain_flux_independence", 1e-9, &chain_cases, |&(n, phi)| {
            let reference = oracle(&gauge(Variant::OpenChain, n, 0.0, 0.0)?)?;
            Ok(oracle(&gauge(Variant::OpenChain, n, phi, 0.0)?)?.max_deviation(&reference))
        }),
        check("spectral", "chain_real_spectrum", 1e-10, &chain_cases, |&(n, phi)| {
            let h = build_hamiltonian(&gauge(Variant::OpenChain, n, phi, 0.0)?);
            Ok(dense_eigensolve(&h)?.max_abs_imag() / h.norm_inf())
        }),
        check("spectral", "eigenvector_residuals", 1e-10, &mode_cases, |&(n, phi)| {
            let spec = gauge(Variant::OpenChain, n, phi, 0.0)?;
            Ok(open_chain_eigenpairs(&spec)?.max_relative_residual(&build_hamiltonian(&spec)))
        }),
        check("spectral", "biorthogonality", 1e-9, &mode_cases, |&(n, phi)| {
            Ok(open_chain_eigenpairs(&gauge(Variant::OpenChain, n, phi, 0.0)?)?.biorthogonality_defect())
        }),
        check("spectral", "transcendental_residual", 1e-8, &small_defect_cases, |&(n, phi, j)| {
            momentum_residual(n, phi, j, false)
        }),
        check("spectral", "transcendental_residual_relative", 1e-10, &defect_cases, |&(n, phi, j)| {
            momentum_residual(n, phi, j, true)
        }),
    ]
}

/// Largest `|R(k)|` over the oracle levels, optionally divided by the
/// magnitude of the terms of `R`, which grows like `e^{|Im k| N}` for
/// bound states.
fn momentum_residual(n: usize, phi: f64, j: f64, relative: bool) -> CoreResult<f64> {
    let spec = gauge(Variant::DefectRing, n, phi, j)?;
    let eq = MomentumEquation::for_spec(&spec)?;
    Ok(oracle(&spec)?
        .eigenvalues()
        .iter()
        .map(|&e| {
            let k = eq.momentum_for_energy(e, 1.0);
            let r = eq.residual(k).norm();
            if relative {
                r / eq.term_scale(k).max(1.0)
            } else {
                r
            }
        })
        .fold(0.0, f64::max))
}

fn phase_suite() -> Vec<InvariantResult> {
    let odd: Vec<usize> = vec![3, 5, 7, 9, 11, 21];
    let inversion_cases: Vec<(usize, f64, f64)> = odd
        .iter()
        .flat_map(|&n| {
            [0.3, 0.7, 1.5, 3.0]
                .into_iter()
                .flat_map(move |j| [0.0, 0.05, 0.2].map(|phi| (n, j, phi)))
        })
        .collect();
    let pairing_cases: Vec<(usize, f64)> = sizes()
        .into_iter()
        .flat_map(|n| [-2.0, -1.0, 0.5, 1.0, 2.0].map(|j| (n, j)))
        .collect();
    let threshold_cases: Vec<(usize, f64, usize)> = [4usize, 8, 12, 20]
        .into_iter()
        .flat_map(|n| [0.2, 0.5, 1.0, 2.0, 3.0].into_iter().flat_map(move |x| [(n, x, 2), (n, x, 3)]))
        .collect();
    let phi105 = 1.05f64.ln();
    let (jc_small, jc_big) = ((-20.0 * phi105).exp(), (20.0 * phi105).exp());
    let region_cases: Vec<f64> = (0..=240)
        .map(|i| -6.0 + 0.05 * i as f64)
        .filter(|j: &f64| j.abs() < 0.95 * jc_small || j.abs() > 1.05 * jc_big)
        .collect();
    let limit_cases: Vec<(usize, f64, f64)> = sizes()
        .into_iter()
        .flat_map(|n| {
            [0.05, 0.3].into_iter().flat_map(move |phi| {
                let j = 1e-3 * (-phi * n as f64).exp();
                [(n, phi, j), (n, phi, -j)]
            })
        })
        .collect();
    vec![
        check("phase", "odd_size_inversion", 1e-9, &inversion_cases, |&(n, j, phi)| {
            let plus = oracle(&gauge(Variant::DefectRing, n, phi, j)?)?;
            let minus = oracle(&gauge(Variant::DefectRing, n, phi, -j)?)?;
            Ok(minus.max_deviation(&plus.negated()))
        }),
        check("phase", "conjugate_pairing", 0.0, &pairing_cases, |&(n, j)| {
            let c = classify_model(&gauge(Variant::DefectRing, n, 0.05, j)?, ImagTolerance::Auto)?;
            Ok((c.n_complex % 2) as f64)
        }),
        check("phase", "threshold_consistency", 0.01, &threshold_cases, |&(n, phi_n, which)| {
            let phi = phi_n / n as f64;
            let jc = critical_couplings(phi, n)?[which];
            let family = DefectRingFamily::new(n, 1.0)?;
            let b = boundary_bisect(family, phi, 0.95 * jc, 1.05 * jc, ImagTolerance::Auto, 1e-9)?;
            Ok(((b - jc) / jc).abs())
        }),
        check("phase", "entirely_real_regions", 0.0, &region_cases, |&j| {
            Ok(flag(classify_model(&gauge(Variant::DefectRing, 20, phi105, j)?, ImagTolerance::Auto)?.entirely_real))
        }),
        check("phase", "small_defect_limit", 0.0, &limit_cases, |&(n, phi, j)| {
            Ok(classify_model(&gauge(Variant::DefectRing, n, phi, j)?, ImagTolerance::Auto)?.degree)
        }),
    ]
}

fn ipr_suite() -> Vec<InvariantResult> {
    let chain_cases: Vec<(usize, f64)> = sizes()
        .into_iter()
        .chain([2])
        .flat_map(|n| [-1.0, 0.0, 0.3, 1.0, 2.0].map(|phi| (n, phi)))
        .collect();
    let mode_cases: Vec<(usize, usize)> = sizes()
        .into_iter()
        .flat_map(|n| (1..=n).map(move |m| (n, m)))
        .collect();
    let convergence_cases = [1.1f64.ln(), 1.5f64.ln(), 2f64.ln()];
    vec![
        check("ipr", "ipr_bounds", 1e-12, &chain_cases, |&(n, phi)| {
            let lo = 1.0 / n as f64;
            Ok(per_mode_ipr(&gauge(Variant::OpenChain, n, phi, 0.0)?)?
                .into_iter()
                .map(|c| (lo - c).max(c - 1.0).max(0.0))
                .fold(0.0, f64::max))
        }),
        check("ipr", "ipr_scale_invariance", 1e-12, &mode_cases, |&(n, m)| {
            let f = chain_right_amplitudes(m, n, 0.4, 0.0);
            let base = dirac_ipr(&f)?;
            [1e-3, -2.0, 1e5].into_iter().try_fold(0.0f64, |acc, c| {
                let scaled: Vec<f64> = f.iter().map(|x| c * x).collect();
                Ok(acc.max((dirac_ipr(&scaled)? - base).abs()))
            })
        }),
        check("ipr", "biorth_phi_independence", 1e-12, &sizes(), |&n| {
            let reference = per_mode_biorthogonal_ipr(&gauge(Variant::OpenChain, n, 0.0, 0.0)?)?;
            [0.1, 0.5, 1.0].into_iter().try_fold(0.0f64, |acc, phi| {
                let other = per_mode_biorthogonal_ipr(&gauge(Variant::OpenChain, n, phi, 0.0)?)?;
                Ok(reference.iter().zip(&other).map(|(a, b)| (a - b).abs()).fold(acc, f64::max))
            })
        }),
        check("ipr", "averaged_biorth_closed_form", 1e-12, &chain_cases, |&(n, phi)| {
            let nf = n as f64;
            let expected = if n % 2 == 0 {
                1.5 / (nf + 1.0)
            } else {
                (3.0 * nf + 1.0) / (2.0 * nf * (nf + 1.0))
            };
            Ok((averaged_biorthogonal_ipr(&gauge(Variant::OpenChain, n, phi, 0.0)?)? - expected).abs())
        }),
        check("ipr", "skin_side_flip", 1e-12, &mode_cases, |&(n, m)| {
            let plus = mode_profile(&gauge(Variant::OpenChain, n, 0.6, 0.0)?, m)?;
            let minus = mode_profile(&gauge(Variant::OpenChain, n, -0.6, 0.0)?, m)?;
            Ok((0..n)
                .map(|j| (plus.dirac_distribution[j] - minus.dirac_distribution[n - 1 - j]).abs())
                .fold(0.0, f64::max))
        }),
        check("ipr", "dirac_normalization", 1e-12, &mode_cases, |&(n, m)| {
            let p = mode_profile(&gauge(Variant::OpenChain, n, 0.9, 0.0)?, m)?;
            Ok((p.dirac_distribution.iter().sum::<f64>() - 1.0).abs())
        }),
        check("ipr", "plateau_convergence", 0.0, &convergence_cases, |&phi| {
            let chi_c = asymptotic_ipr(phi);
            let gaps = (1..=20)
                .map(|i| Ok((averaged_ipr(&gauge(Variant::OpenChain, 20 * i, phi, 0.0)?)? - chi_c).abs()))
                .collect::<CoreResult<Vec<f64>>>()?;
            Ok(gaps.windows(2).filter(|w| w[1] >= w[0]).count() as f64)
        }),
        check("ipr", "asymptotic_monotone", 0.0, &[()], |_| {
            let values: Vec<f64> = (0..100).map(|i| asymptotic_ipr(5.0 * i as f64 / 99.0)).collect();
            Ok(values.windows(2).filter(|w| w[1] <= w[0]).count() as f64)
        }),
    ]
}
