//! Dispatch of each subcommand to the core library.

use nhspec_core::lattice::{build_hamiltonian, derived_params, Model, ModelSpec, Variant};
use nhspec_core::localization::{asymmetry_point, mode_profile, scaling_study};
use nhspec_core::phase::{critical_couplings, phase_diagram_sweep, DefectRingFamily, ImagTolerance};
use nhspec_core::spectral::transcendental::MomentumEquation;
use nhspec_core::spectral::{
    dense_eigensolve, match_multisets, open_chain_eigenpairs, open_chain_levels, ring_levels, Level,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, ModelKind, RunConfig};
use crate::output::{emit, num, opt, sibling_path, Record};
use crate::verify::run_verify;
use crate::CliError;

/// Bracket width at which boundary bisection stops.
pub const BOUNDARY_TOL_J: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
}

impl ModelKind {
    pub fn variant(self) -> Variant {
        match self {
            ModelKind::Ring => Variant::AsymmetricRing,
            ModelKind::Chain => Variant::OpenChain,
            ModelKind::DefectRing => Variant::DefectRing,
            ModelKind::FluxRing => Variant::HermitianFluxRing,
        }
    }
}

fn config_err(e: nhspec_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Spec at one sweep point. `phi` replaces the flux (flux ring) or the
/// gauge field at fixed `g = sqrt(αβ)`; `j` replaces the defect factor.
pub fn model_at(cfg: &RunConfig, phi: Option<f64>, j: Option<f64>) -> Result<ModelSpec, CliError> {
    let n = cfg.size;
    let j = j.unwrap_or(cfg.j);
    let spec = match (cfg.model, phi) {
        (ModelKind::FluxRing, phi) => ModelSpec::flux_ring(n, cfg.kappa, phi.unwrap_or(cfg.flux)),
        (kind, Some(phi)) => {
            let g = checked_g(cfg)?;
            ModelSpec::from_gauge(kind.variant(), n, g, phi, j)
        }
        (ModelKind::Ring, None) => ModelSpec::asymmetric_ring(n, cfg.alpha, cfg.beta),
        (ModelKind::Chain, None) => ModelSpec::open_chain(n, cfg.alpha, cfg.beta),
        (ModelKind::DefectRing, None) => ModelSpec::defect_ring(n, cfg.alpha, cfg.beta, j),
    };
    spec.map_err(config_err)
}

fn checked_g(cfg: &RunConfig) -> Result<f64, CliError> {
    for (name, v) in [("alpha", cfg.alpha), ("beta", cfg.beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok((cfg.alpha * cfg.beta).sqrt())
}

/// Gauge field of `spec`, or the flux of a flux ring.
pub fn phase_of(spec: &ModelSpec) -> f64 {
    match *spec.model() {
        Model::HermitianFluxRing { flux, .. } => flux,
        _ => derived_params(spec).1,
    }
}

fn imag_tolerance(cfg: &RunConfig) -> ImagTolerance {
    cfg.tol_imag.map_or(ImagTolerance::Auto, ImagTolerance::Fixed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub phi: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub index: usize,
    pub k_re: Option<f64>,
    pub k_im: Option<f64>,
    pub re_e: Option<f64>,
    pub im_e: Option<f64>,
    pub abs_e: Option<f64>,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub oracle_abs: f64,
}

impl Record for SpectrumRow {
    const HEADER: &'static [&'static str] = &[
        "phi", "J", "index", "k_re", "k_im", "re_E", "im_E", "abs_E", "oracle_re", "oracle_im", "oracle_abs",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.phi),
            num(self.j),
            self.index.to_string(),
            opt(self.k_re),
            opt(self.k_im),
            opt(self.re_e),
            opt(self.im_e),
            opt(self.abs_e),
            num(self.oracle_re),
            num(self.oracle_im),
            num(self.oracle_abs),
        ]
    }
}

/// Closed-form (rings, chain) or momentum-equation (defect ring) levels
/// alongside the matched oracle eigenvalues.
pub fn spectrum_rows(spec: &ModelSpec, phi: f64) -> nhspec_core::Result<Vec<SpectrumRow>> {
    let oracle = dense_eigensolve(&build_hamiltonian(spec))?;
    let j = spec.defect_factor();
    let closed: Option<Vec<Level>> = match spec.variant() {
        Variant::OpenChain => Some(open_chain_levels(spec)?),
        _ if spec.variant().is_ring() && spec.size() >= 3 && spec.variant() != Variant::DefectRing => {
            Some(ring_levels(spec)?)
        }
        _ => None,
    };
    let row = |index, k: Option<num_complex::Complex64>, e: Option<num_complex::Complex64>, o: num_complex::Complex64| SpectrumRow {
        phi,
        j,
        index,
        k_re: k.map(|k| k.re),
        k_im: k.map(|k| k.im),
        re_e: e.map(|e| e.re),
        im_e: e.map(|e| e.im),
        abs_e: e.map(|e| e.norm()),
        oracle_re: o.re,
        oracle_im: o.im,
        oracle_abs: o.norm(),
    };
    let rows = match closed {
        Some(levels) => {
            let energies: Vec<_> = levels.iter().map(|l| l.energy).collect();
            let matched = match_multisets(&energies, oracle.eigenvalues());
            levels
                .iter()
                .zip(matched)
                .map(|(l, m)| {
                    row(
                        l.index,
                        Some(num_complex::Complex64::new(l.momentum, 0.0)),
                        Some(l.energy),
                        oracle.eigenvalues()[m],
                    )
                })
                .collect()
        }
        None if spec.variant() == Variant::DefectRing => {
            let eq = MomentumEquation::for_spec(spec)?;
            let (g, _) = derived_params(spec);
            oracle
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    let seed = eq.momentum_for_energy(e, g);
                    let k = eq.refine(seed).unwrap_or(seed);
                    row(i + 1, Some(k), Some(2.0 * g * k.cos()), e)
                })
                .collect()
        }
        None => oracle
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, &e)| row(i + 1, None, None, e))
            .collect(),
    };
    Ok(rows)
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<Vec<SpectrumRow>, CliError> {
    if cfg.sweep_j.is_some() && cfg.model != ModelKind::DefectRing {
        return Err(CliError::Config("--sweep-J applies only to --model defect-ring".into()));
    }
    let phis: Vec<Option<f64>> = cfg.sweep_phi.map_or(vec![None], |g| g.points().into_iter().map(Some).collect());
    let js: Vec<Option<f64>> = cfg.sweep_j.map_or(vec![None], |g| g.points().into_iter().map(Some).collect());
    let mut specs = Vec::with_capacity(phis.len() * js.len());
    for &phi in &phis {
        for &j in &js {
            let spec = model_at(cfg, phi, j)?;
            specs.push((phi.unwrap_or_else(|| phase_of(&spec)), spec));
        }
    }
    let blocks = specs
        .par_iter()
        .map(|(phi, spec)| spectrum_rows(spec, *phi))
        .collect::<nhspec_core::Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenstateRow {
    pub n: usize,
    pub k: f64,
    pub energy: f64,
    pub j: usize,
    pub right: f64,
    pub left: f64,
    pub dirac_prob: f64,
    pub biorth_prob: f64,
}

impl Record for EigenstateRow {
    const HEADER: &'static [&'static str] = &["n", "k", "energy", "j", "right", "left", "dirac_prob", "biorth_prob"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            num(self.k),
            num(self.energy),
            self.j.to_string(),
            num(self.right),
            num(self.left),
            num(self.dirac_prob),
            num(self.biorth_prob),
        ]
    }
}

/// Normalized open-chain states, one row per (mode, site).
pub fn run_eigenstates(cfg: &RunConfig) -> Result<Vec<EigenstateRow>, CliError> {
    if cfg.model != ModelKind::Chain {
        return Err(CliError::Config("eigenstates supports --model chain only".into()));
    }
    if cfg.sweep_phi.is_some() || cfg.sweep_j.is_some() {
        return Err(CliError::Config("eigenstates takes no sweeps".into()));
    }
    let spec = model_at(cfg, None, None)?;
    let modes = open_chain_eigenpairs(&spec)?;
    let blocks = (1..=spec.size())
        .into_par_iter()
        .map(|m| -> nhspec_core::Result<Vec<EigenstateRow>> {
            let right = modes.normalized_right(m)?;
            let left = modes.normalized_left(m)?;
            let profile = mode_profile(&spec, m)?;
            Ok((0..spec.size())
                .map(|s| EigenstateRow {
                    n: m,
                    k: modes.momenta[m - 1],
                    energy: modes.energies[m - 1],
                    j: s + 1,
                    right: right[s],
                    left: left[s],
                    dirac_prob: profile.dirac_distribution[s],
                    biorth_prob: profile.biorth_distribution[s],
                })
                .collect())
        })
        .collect::<nhspec_core::Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    #[serde(rename = "J")]
    pub j: f64,
    pub phi: f64,
    pub n_complex: Option<usize>,
    pub degree: Option<f64>,
    pub entirely_real: Option<bool>,
    pub valid: bool,
}

impl Record for PhaseRow {
    const HEADER: &'static [&'static str] = &["J", "phi", "n_complex", "degree", "entirely_real", "valid"];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.j),
            num(self.phi),
            self.n_complex.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.degree),
            self.entirely_real.map(|b| b.to_string()).unwrap_or_default(),
            self.valid.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub phi: f64,
    #[serde(rename = "J_boundary")]
    pub j_boundary: f64,
    /// Nearest of `±e^{±φN}`.
    #[serde(rename = "J_c_formula")]
    pub j_c_formula: f64,
    pub rel_error: f64,
}

impl Record for BoundaryRow {
    const HEADER: &'static [&'static str] = &["phi", "J_boundary", "J_c_formula", "rel_error"];

    fn fields(&self) -> Vec<String> {
        vec![num(self.phi), num(self.j_boundary), num(self.j_c_formula), num(self.rel_error)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutput {
    pub cells: Vec<PhaseRow>,
    /// `None` unless N is a multiple of 4.
    pub boundaries: Option<Vec<BoundaryRow>>,
}

pub fn run_phase_diagram(cfg: &RunConfig) -> Result<PhaseOutput, CliError> {
    if cfg.model != ModelKind::DefectRing {
        return Err(CliError::Config("phase-diagram requires --model defect-ring".into()));
    }
    let (Some(j_grid), Some(phi_grid)) = (cfg.sweep_j, cfg.sweep_phi) else {
        return Err(CliError::Config("phase-diagram requires --sweep-J and --sweep-phi grids".into()));
    };
    let family = DefectRingFamily::new(cfg.size, checked_g(cfg)?).map_err(config_err)?;
    let j_points = j_grid.points();
    let phi_points = phi_grid.points();
    let diagram = phase_diagram_sweep(family, &j_points, &phi_points, imag_tolerance(cfg), BOUNDARY_TOL_J)?;
    let cells = diagram
        .cells
        .iter()
        .map(|c| PhaseRow {
            j: c.j,
            phi: c.phi,
            n_complex: c.classification.map(|k| k.n_complex),
            degree: c.classification.map(|k| k.degree),
            entirely_real: c.classification.map(|k| k.entirely_real),
            valid: c.classification.is_some(),
        })
        .collect();
    let boundaries = if cfg.size.is_multiple_of(4) {
        let rows = diagram
            .boundaries
            .iter()
            .map(|b| {
                let jc = critical_couplings(b.phi, cfg.size)?;
                let nearest = jc
                    .into_iter()
                    .min_by(|x, y| (x - b.j_boundary).abs().total_cmp(&(y - b.j_boundary).abs()))
                    .expect("four couplings");
                Ok(BoundaryRow {
                    phi: b.phi,
                    j_boundary: b.j_boundary,
                    j_c_formula: nearest,
                    rel_error: ((b.j_boundary - nearest) / nearest).abs(),
                })
            })
            .collect::<nhspec_core::Result<Vec<_>>>()?;
        Some(rows)
    } else {
        None
    };
    Ok(PhaseOutput { cells, boundaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IprRow {
    pub phi: f64,
    /// `sqrt(α/β)`.
    pub ratio: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub averaged_ipr: f64,
    pub averaged_biorth_ipr: Option<f64>,
    pub chi_c: f64,
    pub abs_ratio_minus_one: f64,
    pub chi_c_small_phi: f64,
}

impl Record for IprRow {
    const HEADER: &'static [&'static str] = &[
        "phi",
        "ratio",
        "N",
        "averaged_ipr",
        "averaged_biorth_ipr",
        "chi_c",
        "abs_ratio_minus_one",
        "chi_c_small_phi",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.phi),
            num(self.ratio),
            self.n.to_string(),
            num(self.averaged_ipr),
            opt(self.averaged_biorth_ipr),
            num(self.chi_c),
            num(self.abs_ratio_minus_one),
            num(self.chi_c_small_phi),
        ]
    }
}

/// Averaged IPRs of open chains for every `(φ, N)`, with the plateau
/// value and its small-φ expansion per `φ`.
pub fn run_ipr_scaling(cfg: &RunConfig) -> Result<Vec<IprRow>, CliError> {
    if cfg.model != ModelKind::Chain {
        return Err(CliError::Config("ipr-scaling supports --model chain only".into()));
    }
    let g = checked_g(cfg)?;
    let phis = match cfg.sweep_phi {
        Some(grid) => grid.points(),
        None => vec![0.5 * (cfg.alpha / cfg.beta).ln()],
    };
    let sizes = cfg.n_list.clone().unwrap_or_else(|| vec![cfg.size]);
    let reports = scaling_study(g, &phis, &sizes)?;
    Ok(reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let phi = phis[i / sizes.len()];
            let insert = asymmetry_point(phi);
            IprRow {
                phi,
                ratio: insert.ratio,
                n: r.size,
                averaged_ipr: r.averaged_ipr,
                averaged_biorth_ipr: r.averaged_biorth_ipr,
                chi_c: insert.chi_c,
                abs_ratio_minus_one: insert.abs_ratio_minus_one,
                chi_c_small_phi: insert.chi_c_small_phi,
            }
        })
        .collect())
}

fn dispatch(cfg: &RunConfig) -> Result<Status, CliError> {
    let out = cfg.out.as_deref();
    match cfg.command {
        Command::Spectrum => emit(&run_spectrum(cfg)?, cfg.format, out)?,
        Command::Eigenstates => emit(&run_eigenstates(cfg)?, cfg.format, out)?,
        Command::PhaseDiagram => {
            let result = run_phase_diagram(cfg)?;
            emit(&result.cells, cfg.format, out)?;
            if let (Some(rows), Some(path)) = (&result.boundaries, out) {
                emit(rows, cfg.format, Some(&sibling_path(path, "boundaries", cfg.format)))?;
            }
        }
        Command::IprScaling => emit(&run_ipr_scaling(cfg)?, cfg.format, out)?,
        Command::Verify => {
            let report = run_verify(cfg.only.as_deref())?;
            report.write(cfg.format, out)?;
            return Ok(if report.passed() {
                Status::Success
            } else {
                Status::VerificationFailed
            });
        }
    }
    Ok(Status::Success)
}

/// Runs `cfg` on a pool of `cfg.threads` workers.
pub fn execute(cfg: &RunConfig) -> Result<Status, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.threads)))?;
    pool.install(|| dispatch(cfg))
}
