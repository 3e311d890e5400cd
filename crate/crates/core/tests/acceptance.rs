//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process fails if any
//! criterion fails.

use std::f64::consts::SQRT_2;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use qutrit_codec::codec::{
    average_performance, conditional_performance, decode_single, encode, f1_analytic, p1_analytic, QubitIndex,
};
use qutrit_codec::config::{ExperimentConfig, SimulationMode};
use qutrit_codec::ladder::{decode_nth_qubit, decode_qutrit, encode_n_qubits, encode_two_qutrits};
use qutrit_codec::optics::encoder::filtered_success_probability;
use qutrit_codec::optics::hom::{hom_dip_scan, overlap_for_visibility, symmetric_delays};
use qutrit_codec::optics::{damping_factors, optimal_splitting_ratio, run_experiment, simulate_encoding, ImperfectionParams};
use qutrit_codec::optimizer::{evaluate_decoder, optimize_decoder, OptimizeOptions};
use qutrit_codec::statekit::{sample_bloch_uniform, seeded_rng, BlochAngles, PureState, C64};

const SEED: u64 = 20_260_101;

fn target_fidelity() -> f64 {
    (4.0 + SQRT_2) / 6.0
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within_time(v: Verdict, elapsed: Duration, limit: Duration) -> Verdict {
    let pass = v.pass && elapsed < limit;
    check(pass, format!("{} [{:.2}s of {}s]", v.detail, elapsed.as_secs_f64(), limit.as_secs()))
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn joint_fidelity() -> Verdict {
    let start = Instant::now();
    let perf = average_performance(100_000, SEED).unwrap();
    let f = perf.symmetric_fidelity();
    let v = check(
        (f - target_fidelity()).abs() < 3e-3,
        format!("F = {f:.5} vs {:.5}", target_fidelity()),
    );
    within_time(v, start.elapsed(), Duration::from_secs(10))
}

fn success_probability() -> Verdict {
    let perf = average_performance(100_000, SEED + 1).unwrap();
    let [s1, s2] = perf.single_probability;
    let j = perf.joint_probability;
    let ok = [s1, s2, j].iter().all(|p| (p - 0.5).abs() < 5e-3);
    check(ok, format!("single = ({s1:.5}, {s2:.5}), joint = {j:.5}"))
}

fn analytic_curves() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..=18u64 {
        let deg = 10.0 * k as f64;
        let theta = deg.to_radians();
        let est = conditional_performance(theta, 100_000, SEED + 100 + k).unwrap();
        for (name, value, se, exact) in [
            ("P1", est.p1, est.p1_stderr, p1_analytic(theta)),
            ("F1", est.f1, est.f1_stderr, f1_analytic(theta)),
        ] {
            let z = if se > 0.0 { (value - exact).abs() / se } else if (value - exact).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("{name}({deg}°) z = {z:.2}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("38 comparisons, largest |z| = {worst:.2}{}", if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }),
    )
}

fn optics_equivalence() -> Verdict {
    let start = Instant::now();
    let (eta1, eta4) = damping_factors(0.25);
    let mut worst_fid: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    let thetas: Vec<f64> = (0..10).map(|k| 9.0 + 18.0 * k as f64).collect();
    let phis: Vec<f64> = (0..10).map(|k| 36.0 * k as f64).collect();
    for &t1 in &thetas {
        for &p1 in &phis {
            for &t2 in &thetas {
                for &p2 in &phis {
                    let a1 = BlochAngles::from_degrees(t1, p1).unwrap();
                    let a2 = BlochAngles::from_degrees(t2, p2).unwrap();
                    let sim = simulate_encoding(a1, a2, 0.25, true).unwrap();
                    let target = encode(&a1.state(), &a2.state()).unwrap();
                    let fid = sim.qutrit.unwrap().overlap(&target.qutrit).unwrap();
                    worst_fid = worst_fid.max(1.0 - fid);
                    let p = filtered_success_probability(0.25, &a1.state(), &a2.state());
                    worst_p = worst_p.max((sim.success_probability - p).abs());
                }
            }
        }
    }
    let ok = (eta1 - 1.0).abs() < 1e-12 && (eta4 - 1.0 / 3.0).abs() < 1e-12 && worst_fid <= 1e-10 && worst_p <= 1e-10;
    let v = check(
        ok,
        format!("η = ({eta1:.3}, {eta4:.4}), max 1−F = {worst_fid:.1e}, max |ΔP| = {worst_p:.1e} on 10⁴ inputs"),
    );
    within_time(v, start.elapsed(), Duration::from_secs(60))
}

fn optimal_ratio() -> Verdict {
    let r = optimal_splitting_ratio(1e-4).unwrap();
    check((r - 0.25).abs() <= 1e-4, format!("R* = {r:.6}"))
}

fn hom_visibility() -> Verdict {
    let ideal = ImperfectionParams::ideal();
    let delays = symmetric_delays(10.0 * ideal.coherence_time, 401);
    let quarter = hom_dip_scan(0.25, &delays, &ideal).unwrap().visibility();
    let balanced = hom_dip_scan(0.5, &delays, &ideal).unwrap().visibility();
    let mut degraded = ideal;
    degraded.mode_overlap = overlap_for_visibility(0.5, 0.98).unwrap();
    let lab_a = hom_dip_scan(0.5, &delays, &degraded).unwrap().visibility();
    let lab_b = hom_dip_scan(0.5, &delays, &degraded).unwrap().visibility();
    let ok = (quarter - 3.0 / 7.0).abs() < 1e-3 && (balanced - 1.0).abs() < 1e-12 && (lab_a - 0.98).abs() < 1e-3 && lab_a == lab_b;
    check(
        ok,
        format!("R=0.25: {quarter:.4} (3/7 = {:.4}), R=0.5: {balanced:.6}, degraded overlap {:.5}: {lab_a:.4}", 3.0 / 7.0, degraded.mode_overlap),
    )
}

fn decoder_optimality() -> Verdict {
    let start = Instant::now();
    let result = optimize_decoder(&OptimizeOptions::new(20, 1e-9, SEED)).unwrap();
    let mc = evaluate_decoder(&result.best, 100_000, SEED).unwrap();
    let f_mc = mc.fidelity();
    let se = 0.5 * (mc.f1_stderr + mc.f2_stderr);
    let ok = (result.fidelity - target_fidelity()).abs() < 1e-3
        && result.fidelity <= target_fidelity() + 1e-9
        && f_mc <= target_fidelity() + 3.0 * se;
    let v = check(
        ok,
        format!(
            "best F = {:.8} (gap {:+.1e}); Monte Carlo {f_mc:.5} ± {se:.5}",
            result.fidelity,
            result.fidelity - target_fidelity()
        ),
    );
    within_time(v, start.elapsed(), Duration::from_secs(300))
}

fn random_qubit(rng: &mut rand_chacha::ChaCha8Rng) -> PureState {
    sample_bloch_uniform(rng).state()
}

fn random_qutrit(rng: &mut rand_chacha::ChaCha8Rng) -> PureState {
    use rand::Rng;
    let amps = (0..3).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    PureState::new(amps).unwrap()
}

fn round_trips() -> Verdict {
    let mut rng = seeded_rng(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q1 = random_qubit(&mut rng);
        let q2 = random_qubit(&mut rng);
        let enc = encode(&q1, &q2).unwrap();
        for (which, q) in [(QubitIndex::First, &q1), (QubitIndex::Second, &q2)] {
            if let Some(d) = decode_single(&enc.qutrit, which).unwrap().qubit {
                worst = worst.max(1.0 - d.overlap(q).unwrap());
            }
        }
        for n in 3..=5 {
            let qs: Vec<PureState> = (0..n).map(|_| random_qubit(&mut rng)).collect();
            let enc = encode_n_qubits(&qs).unwrap();
            for (k, q) in qs.iter().enumerate() {
                if let Some(d) = decode_nth_qubit(&enc.state, k + 1).unwrap().system {
                    worst = worst.max(1.0 - d.overlap(q).unwrap());
                }
            }
        }
        let t1 = random_qutrit(&mut rng);
        let t2 = random_qutrit(&mut rng);
        let enc = encode_two_qutrits(&t1, &t2).unwrap();
        for (which, t) in [(QubitIndex::First, &t1), (QubitIndex::Second, &t2)] {
            if let Some(d) = decode_qutrit(&enc.state, which).unwrap().system {
                worst = worst.max(1.0 - d.overlap(t).unwrap());
            }
        }
    }
    check(worst.abs() <= 1e-12, format!("max |1−F| = {worst:.1e} over 10³ inputs per code"))
}

fn figure_reproduction() -> Verdict {
    let lab = ExperimentConfig::load(&config_path("lab.json")).unwrap();
    let rows = run_experiment(&lab).unwrap();
    let (lo, hi) = rows.iter().fold((1.0f64, 0.0f64), |(l, h), r| (l.min(r.fidelity), h.max(r.fidelity)));
    let in_band = rows.iter().all(|r| (0.96..=0.995).contains(&r.fidelity));
    let flat = rows
        .chunk_by(|a, b| a.qubit == b.qubit && a.theta_deg == b.theta_deg)
        .all(|g| g.iter().all(|r| (r.fidelity - g[0].fidelity).abs() < 1e-9));

    // shot-noise run: each family consistent with a constant within 4σ
    let mut noisy = lab.clone();
    noisy.mode = SimulationMode::ShotNoise;
    let noisy_rows = run_experiment(&noisy).unwrap();
    let mut worst_z: f64 = 0.0;
    for g in noisy_rows.chunk_by(|a, b| a.qubit == b.qubit && a.theta_deg == b.theta_deg) {
        let plus: f64 = g.iter().map(|r| r.counts_plus).sum();
        let total: f64 = g.iter().map(|r| r.counts_plus + r.counts_minus).sum();
        let mean = plus / total;
        for r in g {
            let n = r.counts_plus + r.counts_minus;
            let se = (mean * (1.0 - mean) / n).sqrt();
            worst_z = worst_z.max((r.fidelity - mean).abs() / se);
        }
    }

    let ideal = ExperimentConfig::load(&config_path("ideal.json")).unwrap();
    let ideal_ok = run_experiment(&ideal).unwrap().iter().all(|r| (r.fidelity - 1.0).abs() < 1e-12);
    check(
        in_band && flat && worst_z < 4.0 && ideal_ok,
        format!(
            "lab fidelities in [{lo:.4}, {hi:.4}] over {} points, flat in φ; shot-noise max |z| = {worst_z:.2}; ideal = 1: {ideal_ok}",
            rows.len()
        ),
    )
}

fn determinism() -> Verdict {
    let lab = config_path("lab.json").to_string_lossy().into_owned();
    let noisy = config_path("lab_shot_noise.json").to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["codec", "--theta1", "78.46", "--phi1", "40", "--theta2", "70.53", "--phi2", "-20", "--decode", "joint"],
        vec!["codec", "--decode", "joint", "--average", "--samples", "20000", "--seed", "7"],
        vec!["codec", "--n", "4", "--decode", "3", "--theta", "30,60,90,120", "--format", "json"],
        vec!["hom", "--reflectance", "0.25", "--lab"],
        vec!["experiment", "--config", &lab],
        vec!["experiment", "--config", &noisy, "--seed", "3"],
        vec!["optimize", "--restarts", "1", "--seed", "1", "--samples", "10000"],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_qutrit-codec")).args(args).output().unwrap();
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        if run() != run() {
            mismatches.push(args[0]);
        }
    }
    check(
        mismatches.is_empty(),
        format!("{} commands run twice, {} byte mismatches {:?}", commands.len(), mismatches.len(), mismatches),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("joint-decoder fidelity", joint_fidelity),
        ("average success probability", success_probability),
        ("analytic curves", analytic_curves),
        ("optics-codec equivalence", optics_equivalence),
        ("optimal splitting ratio", optimal_ratio),
        ("HOM visibility", hom_visibility),
        ("decoder optimality probe", decoder_optimality),
        ("round-trip properties", round_trips),
        ("figure reproduction", figure_reproduction),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<30} {}  {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
