//! Skin-effect localization of open-chain eigenstates.
//!
//! Right states `f_j = e^{-φj} sin(k_n j)` pile up at one end of the chain.
//! Their Dirac IPR tends to a φ-dependent plateau at large N, while the
//! biorthogonal IPR built from `f̃_j f_j = sin²(k_n j)` stays extended.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{derived_params, ModelSpec, Variant, MAX_FLUX_EXPONENT};
use crate::spectral::{chain_momentum, chain_right_amplitudes, envelope_peak_site};

/// Envelope points below this fraction of the largest amplitude are not fitted.
pub const FIT_AMPLITUDE_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 10;

fn open_chain_only(spec: &ModelSpec) -> Result<()> {
    if spec.variant() == Variant::OpenChain {
        Ok(())
    } else {
        Err(Error::WrongVariant {
            expected: "open-chain",
            actual: spec.variant(),
        })
    }
}

/// `Σ|f|⁴ / (Σ|f|²)²`.
pub fn dirac_ipr(amplitudes: &[f64]) -> Result<f64> {
    let max = amplitudes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(max > 0.0) {
        return Err(Error::ZeroVector);
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for x in amplitudes {
        let p = (x / max).powi(2);
        s2 += p;
        s4 += p * p;
    }
    Ok(s4 / (s2 * s2))
}

/// `Σ|f̃ f|² / (Σ|f̃ f|)²`.
pub fn biorthogonal_ipr(left: &[f64], right: &[f64]) -> Result<f64> {
    if left.len() != right.len() {
        return Err(Error::LengthMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    let products: Vec<f64> = left.iter().zip(right).map(|(a, b)| (a * b).abs()).collect();
    let max = products.iter().fold(0.0f64, |m, &x| m.max(x));
    if !(max > 0.0) {
        return Err(Error::ZeroOverlap);
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for p in products {
        let p = p / max;
        s1 += p;
        s2 += p * p;
    }
    Ok(s2 / (s1 * s1))
}

/// Dirac IPR of every mode, amplitudes shifted so the envelope peaks at 1.
pub fn per_mode_ipr(spec: &ModelSpec) -> Result<Vec<f64>> {
    open_chain_only(spec)?;
    let n = spec.size();
    let (_, phi) = derived_params(spec);
    let shift = envelope_peak_site(n, phi);
    (1..=n)
        .map(|m| dirac_ipr(&chain_right_amplitudes(m, n, phi, shift)))
        .collect()
}

/// `(1/N) Σ_n χ_n`.
pub fn averaged_ipr(spec: &ModelSpec) -> Result<f64> {
    let per_mode = per_mode_ipr(spec)?;
    Ok(per_mode.iter().sum::<f64>() / per_mode.len() as f64)
}

/// Large-N plateau of the averaged IPR,
/// `χ_c = ¼ tanh φ (sech⁴φ tanh φ - 8 tanh φ + 6 tanh²φ + 6)`, evaluated at `|φ|`.
pub fn asymptotic_ipr(phi: f64) -> f64 {
    let t = phi.abs().tanh();
    let sech2 = 1.0 - t * t;
    0.25 * t * (sech2 * sech2 * t - 8.0 * t + 6.0 * t * t + 6.0)
}

/// Second-order expansion `1.5φ - 1.75φ²` of [`asymptotic_ipr`] at `|φ|`.
pub fn asymptotic_ipr_small_phi(phi: f64) -> f64 {
    let p = phi.abs();
    1.5 * p - 1.75 * p * p
}

/// Left and right amplitudes both centered on the middle of the chain, so
/// both stay within `e^{±|φ|N/2}`. No flushing: every product is kept.
fn centered_pair(mode: usize, size: usize, phi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let exponent = 0.5 * phi.abs() * size as f64;
    if exponent > MAX_FLUX_EXPONENT {
        return Err(Error::FluxOverflow { exponent });
    }
    let mid = 0.5 * (size as f64 + 1.0);
    let k = chain_momentum(mode, size);
    let envelope = |sign: f64| -> Vec<f64> {
        (1..=size)
            .map(|j| (sign * phi * (j as f64 - mid)).exp() * (k * j as f64).sin())
            .collect()
    };
    Ok((envelope(1.0), envelope(-1.0)))
}

pub fn per_mode_biorthogonal_ipr(spec: &ModelSpec) -> Result<Vec<f64>> {
    open_chain_only(spec)?;
    let n = spec.size();
    let (_, phi) = derived_params(spec);
    (1..=n)
        .map(|m| {
            let (left, right) = centered_pair(m, n, phi)?;
            biorthogonal_ipr(&left, &right)
        })
        .collect()
}

/// `(1/N) Σ_n χ̃_n` by direct summation. Equals `3/(2(N+1))` for even N and
/// `(3N+1)/(2N(N+1))` for odd N, whose `k = π/2` mode contributes `2/(N+1)`.
pub fn averaged_biorthogonal_ipr(spec: &ModelSpec) -> Result<f64> {
    let per_mode = per_mode_biorthogonal_ipr(spec)?;
    Ok(per_mode.iter().sum::<f64>() / per_mode.len() as f64)
}

/// `3/(2(N+1))`.
pub fn biorthogonal_ipr_closed_form(size: usize) -> f64 {
    1.5 / (size as f64 + 1.0)
}

/// Site probabilities of one open-chain mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub mode: usize,
    pub size: usize,
    pub momentum: f64,
    pub phi: f64,
    /// `|f_j|² / Ω²`.
    pub dirac_distribution: Vec<f64>,
    /// `f̃_j f_j / Λ`, which is `sin²(k j)` up to normalization.
    pub biorth_distribution: Vec<f64>,
}

fn normalize_sum(mut values: Vec<f64>) -> Vec<f64> {
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let total: f64 = sorted.into_iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    values
}

pub fn mode_profile(spec: &ModelSpec, mode: usize) -> Result<ModeProfile> {
    open_chain_only(spec)?;
    let n = spec.size();
    if !(1..=n).contains(&mode) {
        return Err(Error::ModeOutOfRange { mode, size: n });
    }
    let (_, phi) = derived_params(spec);
    let right = chain_right_amplitudes(mode, n, phi, envelope_peak_site(n, phi));
    let k = chain_momentum(mode, n);
    let sines: Vec<f64> = (1..=n).map(|j| (k * j as f64).sin().powi(2)).collect();
    Ok(ModeProfile {
        mode,
        size: n,
        momentum: k,
        phi,
        dirac_distribution: normalize_sum(right.iter().map(|f| f * f).collect()),
        biorth_distribution: normalize_sum(sines),
    })
}

/// Decay of `|f_j| ∝ e^{-rate·j}` fitted over envelope maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFit {
    pub decay_rate: f64,
    /// `1 / |decay_rate|`.
    pub length: f64,
    pub points: usize,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    linear_fit(&logs).0
}

/// Fits `ln|f_j|` at the sine antinodes. Candidates are the maxima of
/// sliding windows one half-period wide that are also local maxima of
/// `|f|` and lie above [`FIT_AMPLITUDE_FLOOR`] of the peak.
pub fn localization_length_fit(profile: &ModeProfile) -> Result<LocalizationFit> {
    let amp: Vec<f64> = profile.dirac_distribution.iter().map(|p| p.sqrt()).collect();
    let n = amp.len();
    let peak = amp.iter().fold(0.0f64, |m, &x| m.max(x));
    let k = profile.momentum;
    let half_period = std::f64::consts::PI / k.min(std::f64::consts::PI - k);
    let width = (half_period.round() as usize).clamp(2, n.max(2));

    let mut sites: Vec<usize> = Vec::new();
    if n >= width {
        for start in 0..=n - width {
            let best = (start..start + width)
                .max_by(|&a, &b| amp[a].total_cmp(&amp[b]))
                .expect("nonempty window");
            let left_ok = best == 0 || amp[best] >= amp[best - 1];
            let right_ok = best + 1 == n || amp[best] >= amp[best + 1];
            if left_ok && right_ok && amp[best] > FIT_AMPLITUDE_FLOOR * peak && sites.last() != Some(&best) {
                sites.push(best);
            }
        }
    }
    sites.dedup();
    if sites.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            found: sites.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let points: Vec<(f64, f64)> = sites.iter().map(|&i| ((i + 1) as f64, amp[i].ln())).collect();
    let (slope, _) = linear_fit(&points);
    let decay_rate = -slope;
    Ok(LocalizationFit {
        decay_rate,
        length: 1.0 / decay_rate.abs(),
        points: points.len(),
    })
}

/// IPR summary of one open chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IprReport {
    pub size: usize,
    pub phi: f64,
    pub per_mode_ipr: Vec<f64>,
    pub averaged_ipr: f64,
    /// `None` when `|φ|N/2` overflows the centered amplitudes.
    pub per_mode_biorth_ipr: Option<Vec<f64>>,
    pub averaged_biorth_ipr: Option<f64>,
    pub asymptotic_chi_c: f64,
}

pub fn ipr_report(spec: &ModelSpec) -> Result<IprReport> {
    let per_mode = per_mode_ipr(spec)?;
    let averaged = per_mode.iter().sum::<f64>() / per_mode.len() as f64;
    let biorth = match per_mode_biorthogonal_ipr(spec) {
        Ok(v) => Some(v),
        Err(Error::FluxOverflow { .. }) => None,
        Err(e) => return Err(e),
    };
    let (_, phi) = derived_params(spec);
    Ok(IprReport {
        size: spec.size(),
        phi,
        averaged_biorth_ipr: biorth.as_ref().map(|v| v.iter().sum::<f64>() / v.len() as f64),
        per_mode_biorth_ipr: biorth,
        per_mode_ipr: per_mode,
        averaged_ipr: averaged,
        asymptotic_chi_c: asymptotic_ipr(phi),
    })
}

/// Reports for every `(φ, N)` pair with coupling `g`, ordered by `φ` then `N`.
pub fn scaling_study(g: f64, phi_list: &[f64], n_list: &[usize]) -> Result<Vec<IprReport>> {
    if phi_list.is_empty() || n_list.is_empty() {
        return Err(Error::InvalidGrid("empty phi or N list".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("N list is not increasing".into()));
    }
    let pairs: Vec<(f64, usize)> = phi_list
        .iter()
        .flat_map(|&phi| n_list.iter().map(move |&n| (phi, n)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(phi, n)| ipr_report(&ModelSpec::from_gauge(Variant::OpenChain, n, g, phi, 0.0)?))
        .collect()
}

/// One point of the plateau-versus-asymmetry relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryPoint {
    /// `sqrt(α/β) = e^φ`.
    pub ratio: f64,
    pub phi: f64,
    pub chi_c: f64,
    pub abs_ratio_minus_one: f64,
    pub chi_c_small_phi: f64,
}

pub fn asymmetry_point(phi: f64) -> AsymmetryPoint {
    let ratio = phi.exp();
    AsymmetryPoint {
        ratio,
        phi,
        chi_c: asymptotic_ipr(phi),
        abs_ratio_minus_one: (ratio - 1.0).abs(),
        chi_c_small_phi: asymptotic_ipr_small_phi(phi),
    }
}
