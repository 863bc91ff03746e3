// SPDX-License-Identifier: Apache-2.0
//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! budget, prints one line per criterion and exits nonzero if any fails.

use qlab_core::arrow::{
    detailed_ft_check, enumerate_paths, equilibrium, integral_ft_and_second_law,
    run_feedback_ensemble, weak_ensemble, DiscreteProtocol, FeedbackConfig, FeedbackProtocol,
    PriorMode, ProtocolOp,
};
use qlab_core::cqed::{dispersive_params, qubit_shift, vacuum_rabi_splitting, JcParams};
use qlab_core::entropic::{
    deutsch_bound, eur_bound, exact_eur_entropies, maassen_uffink_bound, shannon_bits,
    simulate_eur, simulate_eur_point, weak_value, weak_value_sampled, EurNoise, EurSimConfig,
};
use qlab_core::junction::{
    ambegaokar_baratoff, cabrera_mott, multilayer_resistance, OxidationParams,
};
use qlab_core::pulse::{
    add_sweep, compile_rabi, decode, encode, ChannelList, Pulse, RabiConfig, SweepSpec, Target,
};
use qlab_core::qubit::{Bloch, MeasurementAxis, Outcome, QubitState};
use qlab_core::rng::{domain, StreamFactory};
use qlab_core::stats::mean_and_sem;
use qlab_core::weak::{
    bayesian_update, kraus_operator, kraus_update, MeasurementStrength, ReadoutModel,
};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

type Check = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Check, Duration);

fn line(ok: bool, what: String) -> (bool, String) {
    (ok, what)
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn c1_entropy_value() -> Check {
    let h = shannon_bits(&[0.98, 0.02]);
    Ok(line(
        (h - 0.14144).abs() <= 1e-5,
        format!("H(0.98, 0.02) = {h:.7} bits"),
    ))
}

fn c2_bound_ladder() -> Check {
    let z = MeasurementAxis::z();
    let mut ordered = true;
    for theta in linspace(0.0, PI, 25) {
        let b = MeasurementAxis::new(theta).map_err(|e| e.to_string())?;
        let (d, mu) = (deutsch_bound(&z, &b), maassen_uffink_bound(&z, &b));
        ordered &= d >= 0.0 && d <= mu + 1e-15;
    }
    let x = MeasurementAxis::x();
    let (d, mu) = (deutsch_bound(&z, &x), maassen_uffink_bound(&z, &x));
    let ok = ordered && mu == 1.0 && (d - 0.45689).abs() <= 1e-5;
    Ok(line(
        ok,
        format!("0 <= deutsch <= mu on grid: {ordered}; MU(z,x) = {mu}; Deutsch(z,x) = {d:.7}"),
    ))
}

fn c3_kraus_oracle() -> Check {
    let mut rng = StreamFactory::new(3).stream(0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z0: f64 = rng.random_range(-0.999..0.999);
        let j: f64 = rng.random_range(-4.0..4.0);
        let s: f64 = rng.random_range(0.01..2.0);
        let (z, x) = bayesian_update(z0, j, s, 0.0, 0.0).map_err(|e| e.to_string())?;
        let rho = QubitState::from_bloch(Bloch::new((1.0 - z0 * z0).sqrt(), 0.0, z0))
            .map_err(|e| e.to_string())?;
        let k = kraus_operator(
            j,
            MeasurementStrength::new(s).map_err(|e| e.to_string())?,
            MeasurementAxis::z(),
        )
        .map_err(|e| e.to_string())?;
        let b = kraus_update(&rho, &k).map_err(|e| e.to_string())?.bloch();
        worst = worst.max((b.z - z).abs()).max((b.x - x).abs());
    }
    Ok(line(
        worst <= 1e-10,
        format!("max |Bayes - Kraus| over 1000 triples = {worst:.2e}"),
    ))
}

fn c4_eur_sweep() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let (s, shots) = (0.2, 100_000);
    let readout = ReadoutModel::default();
    let noise = EurNoise::default();
    let strength = MeasurementStrength::new(s).map_err(err)?;
    let base = EurSimConfig {
        theta_rho: 0.0,
        theta_a: 0.0,
        theta_f: 0.0,
        s,
        shots,
        readout,
        noise,
    };
    let streams = StreamFactory::new(2024);
    let reference = simulate_eur(&base, &streams).map_err(err)?.h_af_reference;
    let axis = linspace(0.0, PI, 13);
    let grid: Vec<(usize, usize)> = (0..13).flat_map(|a| (0..13).map(move |f| (a, f))).collect();
    let grid_streams = streams.derive(domain::GRID);
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(ia, jf))| {
            let (a, f) = (axis[ia], axis[jf]);
            let est = simulate_eur_point(
                &EurSimConfig {
                    theta_a: a,
                    theta_f: f,
                    ..base
                },
                reference,
                &grid_streams.derive(k as u64),
            )?;
            let bound = eur_bound(a, f, strength, &readout)?.value;
            let exact = exact_eur_entropies(0.0, a, f, strength, &readout, &noise)?.1;
            Ok((est, bound, exact))
        })
        .collect::<Result<Vec<_>, qlab_core::Error>>()
        .map_err(err)?;
    let at = |ia: usize, jf: usize| &rows[ia * 13 + jf];

    let worst = rows
        .iter()
        .map(|(e, b, _)| (e.h_i + e.h_af - b) / e.sigma())
        .fold(f64::INFINITY, f64::min);
    let bound_ok = worst >= -3.0;

    let exact_min = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let mc_min = rows.iter().map(|r| r.0.h_af).fold(f64::INFINITY, f64::min);
    let corners = [at(0, 0), at(12, 12)];
    let min_ok = corners
        .iter()
        .all(|r| (r.2 - exact_min).abs() < 1e-9 && r.0.h_af - mc_min <= 3.0 * r.0.h_af_sigma);

    let band_ok = (0..13).all(|ia| {
        let arg = (0..13)
            .max_by(|&x, &y| at(ia, x).0.h_af.total_cmp(&at(ia, y).0.h_af))
            .unwrap_or(0);
        arg.abs_diff(6) <= 1
    });

    let (dip, flat) = (at(3, 6), at(0, 6));
    let dip_sigma = dip.0.h_af_sigma.hypot(flat.0.h_af_sigma);
    let dip_ok = dip.0.h_af < flat.0.h_af && dip.2 < flat.2;
    let ok = bound_ok && min_ok && band_ok && dip_ok;
    Ok(line(
        ok,
        format!(
            "bound >= -3 sigma [{}] (smallest margin {worst:.2} sigma); minimum at (0,0),(pi,pi) [{}]; max band near thetaF = pi/2 [{}]; \
             dip H(AF)(pi/4,pi/2) < H(AF)(0,pi/2) [{}] (MC {:.5} vs {:.5}, difference sigma {dip_sigma:.4}; exact {:.5} vs {:.5})",
            mark(bound_ok),
            mark(min_ok),
            mark(band_ok),
            mark(dip_ok),
            dip.0.h_af,
            flat.0.h_af,
            dip.2,
            flat.2
        ),
    ))
}

fn c5_weak_value() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let (a_axis, f_axis) = (
        MeasurementAxis::new(FRAC_PI_4).map_err(err)?,
        MeasurementAxis::new(5.0 * PI / 6.0).map_err(err)?,
    );
    let w = weak_value(
        &MeasurementAxis::z(),
        Outcome::Plus,
        &f_axis,
        Outcome::Plus,
        &a_axis,
    )
    .map_err(err)?;
    let strength = MeasurementStrength::new(0.05).map_err(err)?;
    let est = weak_value_sampled(
        Outcome::Plus,
        &f_axis,
        Outcome::Plus,
        &a_axis,
        strength,
        10_000_000,
        &StreamFactory::new(5),
    )
    .map_err(err)?;
    let rel = (est.estimate - w.re).abs() / w.re.abs();
    let exact_ok = (w.re - 3.34607).abs() <= 1e-4 && w.anomalous;
    let ok = exact_ok && rel <= 0.05;
    Ok(line(
        ok,
        format!(
            "A_wv = {:.6} anomalous={} [{}]; sampled {:.4} +- {:.4} (raw {:.4}), rel err {:.2}% [{}]",
            w.re,
            w.anomalous,
            mark(exact_ok),
            est.estimate,
            est.stderr,
            est.raw,
            100.0 * rel,
            mark(rel <= 0.05)
        ),
    ))
}

fn c6_fluctuation_theorem() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let s = 0.375;
    let streams = StreamFactory::new(6);
    let prior = Bloch::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
    let qs =
        weak_ensemble(prior, s, 1_000_000, PriorMode::EigenstateResolved, &streams).map_err(err)?;
    let dft = detailed_ft_check(&qs, 0.1).map_err(err)?;
    let slope_ok = (dft.slope - 1.0).abs() <= 0.05;
    let coherent =
        weak_ensemble(prior, s, 1_000_000, PriorMode::Coherent, &streams).map_err(err)?;
    let coherent_slope = detailed_ft_check(&coherent, 0.1)
        .map(|d| d.slope)
        .unwrap_or(f64::NAN);

    let q0 = weak_ensemble(
        Bloch::new(1.0, 0.0, 0.0),
        s,
        1_000_000,
        PriorMode::EigenstateResolved,
        &streams,
    )
    .map_err(err)?;
    let ift = integral_ft_and_second_law(&q0).map_err(err)?;
    let ift_ok = (ift.mean_exp_neg_q - 1.0).abs() <= 0.02;

    let mean_q = |protocol| -> Result<(f64, f64), String> {
        let ens = run_feedback_ensemble(&FeedbackConfig::new(protocol, 1_000_000, s), &streams)
            .map_err(err)?;
        Ok(mean_and_sem(&ens.accepted_q()))
    };
    let (cof, cof_err) = mean_q(FeedbackProtocol::Cof)?;
    let (acof, acof_err) = mean_q(FeedbackProtocol::Acof)?;
    let sign_ok = cof > 5.0 * cof_err && acof < -5.0 * acof_err;
    let ok = slope_ok && ift_ok && sign_ok;
    Ok(line(
        ok,
        format!(
            "DFT slope {:.4} +- {:.4} [{}] (coherent prior {coherent_slope:.3}); <e^-Q> = {:.4} +- {:.4} [{}]; \
             COF <Q> = {cof:.4} +- {cof_err:.4}, ACOF <Q> = {acof:.4} +- {acof_err:.4} [{}]",
            dft.slope,
            dft.slope_err,
            mark(slope_ok),
            ift.mean_exp_neg_q,
            ift.jackknife_err,
            mark(ift_ok),
            mark(sign_ok)
        ),
    ))
}

fn c7_classical_ft() -> Check {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for relax in 1..=7 {
        let energies: Vec<Vec<f64>> = (0..=relax)
            .map(|k| vec![0.0, 0.5 + 1.5 * k as f64 / relax as f64])
            .collect();
        let mut ops = Vec::new();
        for e in &energies[1..] {
            ops.push(ProtocolOp::Switch(e.clone()));
            ops.push(ProtocolOp::Relax);
        }
        let p = DiscreteProtocol {
            temperature: 0.8,
            gamma: 0.6,
            initial_energies: energies[0].clone(),
            ops,
        };
        let r = enumerate_paths(
            &p,
            &equilibrium(&energies[0], 0.8),
            &equilibrium(&energies[relax], 0.8),
        )
        .map_err(|e| e.to_string())?;
        for e in &energies {
            let (m, eq) = (p.transition_matrix(e), equilibrium(e, 0.8));
            worst.3 = worst.3.max((m[1][0] * eq[0] - m[0][1] * eq[1]).abs());
        }
        worst.0 = worst.0.max((r.total_probability - 1.0).abs());
        worst.1 = worst.1.max(r.max_path_error).max(r.max_crooks_error);
        worst.2 = worst.2.max((r.jarzynski_lhs / r.jarzynski_rhs - 1.0).abs());
    }
    let ok = worst.0 <= 1e-12 && worst.1 <= 1e-10 && worst.2 <= 1e-10 && worst.3 <= 1e-15;
    Ok(line(
        ok,
        format!(
            "paths up to length 8: |sum P - 1| = {:.1e}, FT ratio err = {:.1e}, Jarzynski rel err = {:.1e}, detailed balance err = {:.1e}",
            worst.0, worst.1, worst.2, worst.3
        ),
    ))
}

fn c8_jc_spectrum() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let (wc, g) = (5.8, 0.1);
    let split = vacuum_rabi_splitting(&JcParams::new(wc, wc, g, 10).map_err(err)?).map_err(err)?;
    let split_rel = (split - 2.0 * g).abs() / (2.0 * g);
    let delta = 20.0 * g;
    let shift = qubit_shift(&JcParams::new(wc, wc + delta, g, 10).map_err(err)?).map_err(err)?;
    let shift_rel = (shift - g * g / delta).abs() / (g * g / delta);
    let (_, n_crit) = dispersive_params(0.25, 2.5).map_err(err)?;
    let ok = split_rel <= 1e-9 && shift_rel <= 0.02 && n_crit == 25.0;
    Ok(line(
        ok,
        format!("splitting/2g - 1 = {split_rel:.1e}; shift vs g^2/Delta at 20g: {:.3}%; n_crit(10g) = {n_crit}", 100.0 * shift_rel),
    ))
}

fn c9_pulse_compiler() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let cfg = RabiConfig::default();
    let (cl, _) = compile_rabi(&cfg).map_err(err)?;
    let shapes_ok = cl.steps() == 51
        && cl.points() == 8192
        && cl
            .ports()
            .all(|m| m.steps() == 51 && m.points() == 8192 && m.data().len() == 51 * 8192);
    let rejected = RabiConfig {
        points: 8000,
        ..RabiConfig::default()
    }
    .validate()
    .is_err()
        && ChannelList::new(51, 8000).is_err();

    let long = Pulse::with_ssm(600, 1000, 0.8, cfg.ssm_freq, 0.3).map_err(err)?;
    let mut whole = ChannelList::new(1, 2048).map_err(err)?;
    add_sweep(&mut whole, 1, Target::Channel, &long, &SweepSpec::none()).map_err(err)?;
    let mut coherent = true;
    for cut in [1, 137, 300, 599] {
        let mut split = ChannelList::new(1, 2048).map_err(err)?;
        add_sweep(
            &mut split,
            1,
            Target::Channel,
            &Pulse {
                duration: cut,
                ..long
            },
            &SweepSpec::none(),
        )
        .map_err(err)?;
        let tail = Pulse {
            start_time: long.start_time + cut,
            duration: long.duration - cut,
            ..long
        };
        add_sweep(&mut split, 1, Target::Channel, &tail, &SweepSpec::none()).map_err(err)?;
        coherent &= split[0][0].data() == whole[0][0].data();
    }

    let bytes = encode(&cl).map_err(err)?;
    let back = decode(&bytes).map_err(err)?;
    let roundtrip = encode(&back).map_err(err)? == bytes
        && back
            .ports()
            .zip(cl.ports())
            .all(|(a, b)| a.data() == b.data());
    let size_ok = bytes.len() == 14 + 12 * 51 * 8192 * 4;
    let ok = shapes_ok && rejected && coherent && roundtrip && size_ok;
    Ok(line(
        ok,
        format!(
            "12 matrices 51x8192 [{}]; 8000 points rejected [{}]; split SSM pulses sample-exact [{}]; QSEQ roundtrip ({} bytes) [{}]",
            mark(shapes_ok),
            mark(rejected),
            mark(coherent),
            bytes.len(),
            mark(roundtrip && size_ok)
        ),
    ))
}

fn c10_junction_models() -> Check {
    let err = |e: qlab_core::Error| e.to_string();
    let ic = ambegaokar_baratoff(32.48e3, 50e9).map_err(err)?;
    let ic_ok = (ic / 10e-9 - 1.0).abs() <= 0.005;
    let r10 = multilayer_resistance(10, 10e3, 1e3, 2.0, false).map_err(err)?;
    let sat_ok = (r10 - 10e3).abs() / 10e3 <= 0.01;
    let params = OxidationParams::default();
    let curve = cabrera_mott(&params, 301).map_err(err)?;
    let monotone = curve.windows(2).all(|w| w[1].x > w[0].x && w[1].t > w[0].t);
    let ratio = params.thickness_at(0.1 * params.t_span).map_err(err)?
        / params.thickness_at(params.t_span).map_err(err)?;
    let ok = ic_ok && sat_ok && monotone && ratio >= 0.9;
    Ok(line(
        ok,
        format!(
            "I_c = {:.4} nA [{}]; R(10 layers) = {r10:.2} ohm [{}]; oxide curve monotone [{}], X(3 min)/X(30 min) = {ratio:.4} [{}]",
            ic * 1e9,
            mark(ic_ok),
            mark(sat_ok),
            mark(monotone),
            mark(ratio >= 0.9)
        ),
    ))
}

fn qlab(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QTHESIS_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "qlab {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn c11_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(
        dir.path().join("tls.json"),
        r#"{"synthetic": {"n": 300, "sigma": 0.5, "g_max": 60.0}}"#,
    )
    .map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str], &str); 10] = [
        ("eur-bound", &["eur-bound", "--grid", "7"], "csv"),
        (
            "eur-sim",
            &["eur-sim", "--grid", "3", "--shots", "100000"],
            "csv",
        ),
        (
            "traj-ensemble",
            &["traj-ensemble", "--protocol", "cof", "--shots", "20000"],
            "csv",
        ),
        (
            "ft-check",
            &["ft-check", "--protocol", "acof", "--shots", "200000"],
            "json",
        ),
        ("ft-check-none", &["ft-check", "--shots", "100000"], "csv"),
        (
            "jc-spectrum",
            &[
                "jc-spectrum",
                "--delta-start=-1",
                "--delta-stop",
                "1",
                "--delta-points",
                "41",
            ],
            "csv",
        ),
        (
            "transmon",
            &["transmon", "--e-j", "15", "--e-c", "0.3"],
            "json",
        ),
        ("pulse-compile", &["pulse-compile"], "qseq"),
        ("jj-model", &["jj-model", "--model", "cabrera_mott"], "csv"),
        ("tls-fit", &["tls-fit", "tls.json"], "csv"),
    ];
    let mut mismatched = Vec::new();
    for (name, args, ext) in runs {
        let mut outputs = Vec::new();
        for jobs in ["1", "2", "8"] {
            let out = format!("{name}_{jobs}.{ext}");
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--seed", "42", "--jobs", jobs, "--out", &out]);
            qlab(&full, dir.path())?;
            outputs.push(std::fs::read(dir.path().join(&out)).map_err(|e| e.to_string())?);
        }
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            mismatched.push(name);
        }
    }
    Ok(line(
        mismatched.is_empty(),
        format!("10 runs x jobs {{1, 2, 8}} byte-identical; mismatched: {mismatched:?}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            1,
            "entropy value",
            c1_entropy_value,
            Duration::from_millis(1),
        ),
        (2, "bound ladder", c2_bound_ladder, Duration::from_secs(1)),
        (
            3,
            "Kraus/Bayes oracle",
            c3_kraus_oracle,
            Duration::from_secs(1),
        ),
        (
            4,
            "EUR inequality sweep",
            c4_eur_sweep,
            Duration::from_secs(600),
        ),
        (
            5,
            "anomalous weak value",
            c5_weak_value,
            Duration::from_secs(120),
        ),
        (
            6,
            "fluctuation theorems",
            c6_fluctuation_theorem,
            Duration::from_secs(300),
        ),
        (
            7,
            "classical brute-force FT",
            c7_classical_ft,
            Duration::from_secs(10),
        ),
        (8, "JC spectrum", c8_jc_spectrum, Duration::from_secs(5)),
        (
            9,
            "pulse compiler",
            c9_pulse_compiler,
            Duration::from_secs(5),
        ),
        (
            10,
            "junction models",
            c10_junction_models,
            Duration::from_secs(10),
        ),
        (
            11,
            "CLI determinism",
            c11_determinism,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (n, name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {detail} ({:.3} s, limit {} s{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
