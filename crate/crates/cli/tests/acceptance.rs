//! Acceptance criteria 1-11. Each test prints one `criterion N: PASS|FAIL`
//! line (bypassing output capture) and then asserts.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use nhspec_core::lattice::{build_hamiltonian, ModelSpec, Variant};
use nhspec_core::localization::{
    asymptotic_ipr, averaged_biorthogonal_ipr, averaged_ipr, localization_length_fit, log_log_slope, mode_profile,
    per_mode_biorthogonal_ipr,
};
use nhspec_core::phase::{phase_diagram_sweep, DefectRingFamily, ImagTolerance};
use nhspec_core::spectral::transcendental::{defect_ring_momenta, MomentumEquation};
use nhspec_core::spectral::{
    dense_eigensolve, open_chain_eigenpairs, open_chain_spectrum_closed_form, ring_spectrum_closed_form,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, budget: Duration, start: Instant, ok: bool, detail: String) {
    let elapsed = start.elapsed();
    let pass = ok && elapsed < budget;
    let line = format!(
        "criterion {id:>2}: {} ({detail}; {:.2}s of {:.0}s)\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    lock.write_all(line.as_bytes()).unwrap();
    lock.flush().unwrap();
    assert!(pass, "{}", line.trim_end());
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn oracle(spec: &ModelSpec) -> nhspec_core::Spectrum {
    dense_eigensolve(&build_hamiltonian(spec)).unwrap()
}

fn phi105() -> f64 {
    1.05f64.ln()
}

#[test]
fn criterion_01_ring_closed_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for ratio in [1.0, 1.05, 2.0] {
        let spec = ModelSpec::asymmetric_ring(20, ratio, 1.0 / ratio).unwrap();
        worst = worst.max(ring_spectrum_closed_form(&spec).unwrap().max_deviation(&oracle(&spec)));
    }
    report(1, secs(1), start, worst < 1e-9, format!("max deviation {worst:.2e}"));
}

#[test]
fn criterion_02_chain_flux_independence() {
    let start = Instant::now();
    let spectra: Vec<_> = [0.0, 0.2, 2f64.ln()]
        .iter()
        .map(|&phi| oracle(&ModelSpec::from_gauge(Variant::OpenChain, 20, 1.0, phi, 0.0).unwrap()))
        .collect();
    let reference = open_chain_spectrum_closed_form(&ModelSpec::open_chain(20, 1.0, 1.0).unwrap()).unwrap();
    let dev = spectra.iter().map(|s| s.max_deviation(&reference)).fold(0.0, f64::max);
    let imag = spectra.iter().map(|s| s.max_abs_imag()).fold(0.0, f64::max);
    report(
        2,
        secs(1),
        start,
        dev < 1e-9 && imag < 1e-10,
        format!("max deviation {dev:.2e}, max |Im E| {imag:.2e}"),
    );
}

#[test]
fn criterion_03_transition_thresholds() {
    let start = Instant::now();
    let phi = phi105();
    let family = DefectRingFamily::new(20, 1.0).unwrap();
    let j_grid: Vec<f64> = (0..401).map(|i| -5.0 + 0.025 * i as f64).collect();
    let diagram = phase_diagram_sweep(family, &j_grid, &[phi], ImagTolerance::Auto, 1e-7).unwrap();
    let mut found: Vec<f64> = diagram.boundaries.iter().map(|b| b.j_boundary).collect();
    found.sort_by(f64::total_cmp);
    let big = 1.05f64.powi(20);
    let expected = [-big, -1.0 / big, 1.0 / big, big];
    let errors: Vec<f64> = found.iter().zip(expected).map(|(f, e)| ((f - e) / e).abs()).collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    report(
        3,
        secs(10),
        start,
        found.len() == 4 && worst < 0.01,
        format!("boundaries {found:.5?}, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_04_special_points() {
    let start = Instant::now();
    let family = DefectRingFamily::new(20, 1.0).unwrap();
    let at = |j: f64| family.classify(j, phi105(), ImagTolerance::Auto).unwrap();
    let (a, b, c, d) = (at(0.2), at(4.0), at(1.0), at(-1.0));
    let ok = a.entirely_real && b.entirely_real && c.n_complex == 18 && c.degree == 0.9 && d.degree == 1.0;
    report(
        4,
        secs(2),
        start,
        ok,
        format!(
            "complex levels J=0.2:{} J=4:{} J=1:{} J=-1:{}",
            a.n_complex, b.n_complex, c.n_complex, d.n_complex
        ),
    );
}

#[test]
fn criterion_05_odd_size_inversion() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = [5usize, 9, 21][rng.gen_range(0..3)];
        let j = rng.gen_range(0.3..=3.0);
        let plus = oracle(&ModelSpec::from_gauge(Variant::DefectRing, n, 1.0, phi105(), j).unwrap());
        let minus = oracle(&ModelSpec::from_gauge(Variant::DefectRing, n, 1.0, phi105(), -j).unwrap());
        worst = worst.max(minus.max_deviation(&plus.negated()));
    }
    report(5, secs(5), start, worst < 1e-9, format!("100 trials, max deviation {worst:.2e}"));
}

#[test]
fn criterion_06_transcendental_round_trip() {
    let start = Instant::now();
    let (mut residual, mut dev) = (0.0f64, 0.0f64);
    for j in [0.5, 1.0, 2.0] {
        let spec = ModelSpec::from_gauge(Variant::DefectRing, 20, 1.0, phi105(), j).unwrap();
        let eq = MomentumEquation::for_spec(&spec).unwrap();
        let o = oracle(&spec);
        for &e in o.eigenvalues() {
            residual = residual.max(eq.residual(eq.momentum_for_energy(e, 1.0)).norm());
        }
        dev = dev.max(defect_ring_momenta(&spec).unwrap().spectrum.max_deviation(&o));
    }
    report(
        6,
        secs(2),
        start,
        residual < 1e-8 && dev < 1e-8,
        format!("max |R(k)| {residual:.2e}, Newton spectrum deviation {dev:.2e}"),
    );
}

#[test]
fn criterion_07_ipr_plateau_and_slope() {
    let start = Instant::now();
    let chi = averaged_ipr(&ModelSpec::open_chain(500, 2.5 * 2.5, 1.0).unwrap()).unwrap();
    let chi_c = asymptotic_ipr(2.5f64.ln());
    let plateau_err = (chi / chi_c - 1.0).abs();
    let points: Vec<(f64, f64)> = (8..=40)
        .map(|n| {
            let spec = ModelSpec::open_chain(n, 1.02 * 1.02, 1.0).unwrap();
            (n as f64, averaged_ipr(&spec).unwrap())
        })
        .collect();
    let slope = log_log_slope(&points);
    let ok = plateau_err < 0.02 && (-1.05..=-0.85).contains(&slope);
    report(
        7,
        secs(30),
        start,
        ok,
        format!("plateau error {plateau_err:.2e}, slope over N=8..40 {slope:.4} (window [-1.05, -0.85])"),
    );
}

#[test]
fn criterion_08_plateau_limits() {
    let start = Instant::now();
    let zero = asymptotic_ipr(0.0);
    let far = (asymptotic_ipr(12.0) - 1.0).abs();
    let values: Vec<f64> = (0..100).map(|i| asymptotic_ipr(5.0 * i as f64 / 99.0)).collect();
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    report(
        8,
        secs(1),
        start,
        zero == 0.0 && far < 1e-6 && monotone,
        format!("chi_c(0)={zero}, |chi_c(12)-1|={far:.2e}, monotone={monotone}"),
    );
}

#[test]
fn criterion_09_biorthogonal_suite() {
    let start = Instant::now();
    let target = 3.0 / 82.0;
    let (mut gram, mut avg_err) = (0.0f64, 0.0f64);
    let mut per_mode = Vec::new();
    for phi in [0.0, 0.3, 2f64.ln()] {
        let spec = ModelSpec::from_gauge(Variant::OpenChain, 40, 1.0, phi, 0.0).unwrap();
        gram = gram.max(open_chain_eigenpairs(&spec).unwrap().biorthogonality_defect());
        avg_err = avg_err.max((averaged_biorthogonal_ipr(&spec).unwrap() - target).abs());
        per_mode.push(per_mode_biorthogonal_ipr(&spec).unwrap());
    }
    let spread = per_mode[1..]
        .iter()
        .flat_map(|v| v.iter().zip(&per_mode[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    report(
        9,
        secs(5),
        start,
        gram < 1e-9 && avg_err < 1e-12 && spread < 1e-12,
        format!("Gram defect {gram:.2e}, |avg - 3/82| {avg_err:.2e}, phi spread {spread:.2e}"),
    );
}

#[test]
fn criterion_10_localization_length() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rates = Vec::new();
    for ratio in [1.25f64, 2.0] {
        let spec = ModelSpec::open_chain(40, ratio * ratio, 1.0).unwrap();
        let fit = localization_length_fit(&mode_profile(&spec, 20).unwrap()).unwrap();
        worst = worst.max((fit.decay_rate / ratio.ln() - 1.0).abs());
        rates.push(fit.decay_rate);
    }
    report(
        10,
        secs(2),
        start,
        worst < 0.02,
        format!("decay rates {rates:.5?}, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_11_verify_and_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_nhspec");
    let verify = Command::new(bin).arg("verify").output().unwrap();
    let verify_ok = verify.status.code() == Some(0);
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let runs: [&[&str]; 2] = [
        &["phase-diagram", "--size", "20", "--alpha", "1.1025", "--sweep-J", "-5:5:101", "--sweep-phi", "0:0.1:5"],
        &["spectrum", "--model", "ring", "--size", "20", "--sweep-phi", "0:0.5:50"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let path = dir.path().join(format!("run{i}_{threads}.csv"));
            let status = Command::new(bin)
                .args(*args)
                .args(["--threads", threads, "--out"])
                .arg(&path)
                .status()
                .unwrap();
            identical &= status.success();
            outputs.push(std::fs::read(&path).unwrap_or_default());
        }
        identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
    }
    report(
        11,
        secs(60),
        start,
        verify_ok && identical,
        format!("verify exit {:?}, CSV identical across 1/8 threads: {identical}", verify.status.code()),
    );
}
