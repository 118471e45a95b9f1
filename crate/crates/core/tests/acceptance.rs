//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stderr (bypassing the harness's capture) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use gkp_repeater::analytic::achievable_distance_fixed_spacing;
use gkp_repeater::codes::CodeName;
use gkp_repeater::cost::{default_configs, optimize, Constraint, LayoutEstimate, Objective};
use gkp_repeater::keyrate::{ad_key_rate, key_per_mode, key_rate_from_flips, plob, BellDiagonal};
use gkp_repeater::mc::chain::{ChainConfig, ChainPlan, Scheme};
use gkp_repeater::mc::estimate::{achievable_distance_mc, estimate, EstimateOptions, SimEstimate};
use gkp_repeater::mc::ops::{gkp_correct, ModeState};
use gkp_repeater::mc::schedule::{build_schedule, Quad, StationType};
use gkp_repeater::mc::single_link::{default_gammas, single_link_point, CurvePoint, SingleLinkScheme};
use gkp_repeater::quad::{FiberParams, RandomStream, Squeezing};
use gkp_repeater::rescale::{
    postponed_to_realtime, realtime_to_postponed, single_round_c, solve_chain, steady_state_c, NoiseChainSpec,
    DEFAULT_DIGITS,
};

fn report(n: u32, pass: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "criterion {n}: {} ({:.1} s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_plob_crossing() {
    let t = Instant::now();
    let (a, b) = (plob(109.0), plob(110.0));
    let pass = a > 0.01 && b <= 0.01 && t.elapsed() < Duration::from_secs(1);
    report(1, pass, t.elapsed(), &format!("K(109 km) = {a:.6}, K(110 km) = {b:.6}"));
}

#[test]
fn criterion_2_station_costs() {
    let t = Instant::now();
    let b = build_schedule(StationType::B);
    let c4 = build_schedule(StationType::A(CodeName::C4));
    let st = build_schedule(StationType::A(CodeName::Steane7));
    let steps = [b.steps_per_mode(), c4.steps_per_mode(), st.steps_per_mode()];
    let totals = [b.total_cost(), c4.total_cost(), st.total_cost()];
    let pass = steps == [2, 11, 40] && totals == [4, 68, 311];
    report(
        2,
        pass,
        t.elapsed(),
        &format!(
            "steps {steps:?} (want [2, 11, 40]), totals {totals:?} (want [4, 68, 311]); steane7 breakdown {:?}",
            st.costs
        ),
    );
}

/// Independent oracle: residual variance of two real-time corrections.
fn two_step_variance(v0: f64, n: [f64; 2], g: f64, c: [f64; 2]) -> f64 {
    let mut v = v0;
    for k in 0..2 {
        let d = v + n[k];
        v = (1.0 - c[k]).powi(2) * d + c[k].powi(2) * g;
    }
    v
}

/// Coordinate-wise golden-section minimisation on [0, 1]², iterated to convergence.
fn brute_force_two(v0: f64, n: [f64; 2], g: f64) -> [f64; 2] {
    let golden = |f: &dyn Fn(f64) -> f64| {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - r * (hi - lo);
            let x2 = lo + r * (hi - lo);
            if f(x1) < f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    };
    let mut c = [0.5, 0.5];
    for _ in 0..200 {
        let c0 = golden(&|x| two_step_variance(v0, n, g, [x, c[1]]));
        let c1 = golden(&|x| two_step_variance(v0, n, g, [c0, x]));
        c = [c0, c1];
    }
    c
}

#[test]
fn criterion_3_rescaling_solver() {
    let t = Instant::now();
    let mut notes = Vec::new();

    // (a) one correction reduces to the single-round optimum
    let mut a_err: f64 = 0.0;
    for (v0, n, sg) in [(0.0, 0.01, 0.1), (0.003, 0.02, 0.08), (0.01, 0.005, 0.15)] {
        let set = solve_chain(&NoiseChainSpec::new(sg, vec![n], v0).unwrap(), DEFAULT_DIGITS).unwrap();
        a_err = a_err.max((set.realtime[0] - single_round_c(((v0 + n) as f64).sqrt(), sg)).abs());
    }
    let a_ok = a_err <= 1e-12;
    notes.push(format!("(a) max |c - c_single| = {a_err:.2e}"));

    // (b) middle of a uniform 40-step chain sits at the steady state
    let mut b_err: f64 = 0.0;
    for (n, sg) in [(0.02f64, 0.1f64), (0.005, 0.08), (0.01, 0.12)] {
        let set = solve_chain(&NoiseChainSpec::new(sg, vec![n; 40], 0.0).unwrap(), DEFAULT_DIGITS).unwrap();
        let c_inf = steady_state_c(n.sqrt(), sg);
        for c in &set.realtime[15..25] {
            b_err = b_err.max((c - c_inf).abs());
        }
    }
    let b_ok = b_err <= 1e-6;
    notes.push(format!("(b) max |c_mid - c_steady| = {b_err:.2e}"));

    // (c) both conversion directions are inverse
    let mut c_err: f64 = 0.0;
    for list in [vec![0.3, 0.5, 0.7, 0.6], vec![0.9], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]] {
        let back = postponed_to_realtime(&realtime_to_postponed(&list)).unwrap();
        let fwd = realtime_to_postponed(&postponed_to_realtime(&list).unwrap_or_else(|_| list.clone()));
        for (x, y) in list.iter().zip(&back) {
            c_err = c_err.max((x - y).abs());
        }
        if postponed_to_realtime(&list).is_ok() {
            for (x, y) in list.iter().zip(&fwd) {
                c_err = c_err.max((x - y).abs());
            }
        }
    }
    let c_ok = c_err <= 1e-12;
    notes.push(format!("(c) round-trip error = {c_err:.2e}"));

    // (d) two corrections agree with brute-force minimisation
    let mut d_err: f64 = 0.0;
    for (v0, n, sg) in [(0.0, [0.01, 0.02], 0.1), (0.004, [0.03, 0.001], 0.09), (0.01, [0.005, 0.005], 0.15)] {
        let set = solve_chain(&NoiseChainSpec::new(sg, n.to_vec(), v0).unwrap(), DEFAULT_DIGITS).unwrap();
        let oracle = brute_force_two(v0, n, sg * sg);
        for k in 0..2 {
            d_err = d_err.max((set.realtime[k] - oracle[k]).abs());
        }
    }
    let d_ok = d_err <= 1e-6;
    notes.push(format!("(d) max |c - c_brute| = {d_err:.2e}"));

    let pass = a_ok && b_ok && c_ok && d_ok && t.elapsed() < Duration::from_secs(10);
    report(3, pass, t.elapsed(), &notes.join("; "));
}

#[test]
fn criterion_4_gkp_correction_variance() {
    let t = Instant::now();
    const SAMPLES: u64 = 10_000_000;
    const CHUNK: u64 = 100_000;
    let sigmas = [0.05, 0.10, 0.15];
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (ci, &sd) in sigmas.iter().enumerate() {
        for (gi, &sg) in sigmas.iter().enumerate() {
            let c = single_round_c(sd, sg);
            let case = (ci * 3 + gi) as u64;
            let sum_sq: f64 = (0..SAMPLES / CHUNK)
                .into_par_iter()
                .map(|chunk| {
                    let mut s = RandomStream::new(0xC0FFEE + case, chunk);
                    let mut acc = 0.0;
                    for _ in 0..CHUNK {
                        let mut m = ModeState { dq: sd * s.normal(), dp: 0.0 };
                        gkp_correct(&mut m, Quad::Q, c, sg, 0.0, &mut s);
                        acc += m.dq * m.dq;
                    }
                    acc
                })
                .sum();
            let var = sum_sq / SAMPLES as f64;
            let want = c * sg * sg;
            let rel = (var / want - 1.0).abs();
            worst = worst.max(rel);
            notes.push(format!("({sd},{sg}) {:.3}%", 100.0 * rel));
        }
    }
    let pass = worst <= 0.02 && t.elapsed() < Duration::from_secs(60);
    report(4, pass, t.elapsed(), &format!("relative deviation {}", notes.join(", ")));
}

fn gkp_only_estimate(eta0: f64, sigma: f64, b: f64, seed: u64) -> SimEstimate {
    let cfg = ChainConfig::new(
        FiberParams::new(eta0).unwrap(),
        Squeezing::from_sigma(sigma).unwrap(),
        Scheme::GkpOnly,
        40,
        40,
    )
    .unwrap();
    let plan = ChainPlan::new(cfg, DEFAULT_DIGITS).unwrap();
    estimate(&plan, &EstimateOptions::new(b, seed).unwrap()).unwrap()
}

#[test]
fn criterion_5_analytic_vs_mc() {
    let t = Instant::now();
    // the analytic distance is resolved to ~10 km by ten bisection steps
    const BISECTION_KM: f64 = 10.0;
    let mut pass = true;
    let mut notes = Vec::new();
    for sigma in [0.08, 0.09] {
        let analytic = achievable_distance_fixed_spacing(
            FiberParams::new(0.98).unwrap(),
            Squeezing::from_sigma(sigma).unwrap(),
            0.25,
            0.01,
        );
        let est = gkp_only_estimate(0.98, sigma, 0.1, 5);
        let (point, lower, upper) = achievable_distance_mc(&est, 0.25, 1, 0.01);
        let ok = est.converged && lower - BISECTION_KM <= analytic && analytic <= upper + BISECTION_KM;
        pass &= ok;
        notes.push(format!(
            "sigma {sigma}: analytic {analytic:.0} km, MC {point:.0} km [{lower:.0}, {upper:.0}] ({} trials)",
            est.trials
        ));
    }
    report(5, pass, t.elapsed(), &notes.join("; "));
}

/// Refine both points until they are separated by three combined standard
/// errors or the relative error target reaches `floor`.
fn separated(
    better: SingleLinkScheme,
    worse: SingleLinkScheme,
    gamma: f64,
    point: u64,
    floor: f64,
) -> (bool, CurvePoint, CurvePoint) {
    let mut b = 0.15;
    loop {
        let opts = EstimateOptions::new(b, 2024).unwrap().with_budget(200_000_000);
        let pb = single_link_point(better, gamma, point, &opts).unwrap();
        let pw = single_link_point(worse, gamma, point, &opts).unwrap();
        let gap = pw.p_err - pb.p_err;
        let se = (pb.stderr.powi(2) + pw.stderr.powi(2)).sqrt();
        if gap >= 3.0 * se {
            return (true, pb, pw);
        }
        if b <= floor {
            return (false, pb, pw);
        }
        b = (b / 2.0).max(floor);
    }
}

#[test]
fn criterion_6_single_link_orderings() {
    use SingleLinkScheme::*;
    let t = Instant::now();
    let gammas = default_gammas(10);
    let mut failures = Vec::new();
    let mut checks = 0;
    for (i, &g) in gammas.iter().enumerate() {
        for (better, worse) in [
            (C4Analog, GkpOnly),
            (Steane7Analog, GkpOnly),
            (Steane7NoAnalog, GkpOnly),
            (Steane7Analog, Steane7NoAnalog),
        ] {
            checks += 1;
            let (ok, pb, pw) = separated(better, worse, g, i as u64, 0.02);
            if !ok {
                failures.push(format!(
                    "gamma {g:.4}: {} {:.3e}±{:.1e} vs {} {:.3e}±{:.1e}",
                    better.as_str(),
                    pb.p_err,
                    pb.stderr,
                    worse.as_str(),
                    pw.p_err,
                    pw.stderr
                ));
            }
        }
    }
    checks += 1;
    let (ok, pb, pw) = separated(C4Analog, Steane7NoAnalog, 0.18, 1000, 0.02);
    let at_018 = format!(
        "at gamma 0.18: c4 {:.4}±{:.4} vs steane7-no-analog {:.4}±{:.4}",
        pb.p_err, pb.stderr, pw.p_err, pw.stderr
    );
    if !ok {
        failures.push(at_018.clone());
    }
    let pass = failures.is_empty() && t.elapsed() < Duration::from_secs(1800);
    report(
        6,
        pass,
        t.elapsed(),
        &format!("{} of {checks} orderings at >= 3 SE; {at_018}; {}", checks - failures.len(), failures.join("; ")),
    );
}

#[test]
#[ignore = "extended: 158 layouts of 100-link Monte Carlo, a few hours"]
fn criterion_7_steane_at_1000_km() {
    let t = Instant::now();
    let squeezing = Squeezing::from_db(14.7).unwrap();
    let fiber = FiberParams::new(0.97).unwrap();
    let opts = EstimateOptions::new(0.3, 7).unwrap();
    let mut estimates = Vec::new();
    for layout in default_configs() {
        let cfg = ChainConfig::new(fiber, squeezing, Scheme::Steane7, layout.n_multi, layout.n_all).unwrap();
        let plan = ChainPlan::new(cfg, DEFAULT_DIGITS).unwrap();
        let e = estimate(&plan, &opts).unwrap();
        let (p_link_x, p_link_z) = e.per_link();
        estimates.push(LayoutEstimate {
            layout,
            p_link_x,
            p_link_z,
        });
    }
    let best = optimize(Scheme::Steane7, &estimates, 1000.0, Objective::MaxKey, Constraint::Hybrid);
    let (pass, detail) = match best {
        Ok(r) => (
            r.key_per_mode > 0.01,
            format!(
                "sigma {:.4}: best layout ({}, {}) key/mode {:.4} at 1000 km",
                squeezing.sigma_gkp, r.n_multi, r.n_all, r.key_per_mode
            ),
        ),
        Err(e) => (false, e.to_string()),
    };
    report(7, pass, t.elapsed(), &detail);
}

#[test]
fn criterion_8_key_rate_formula() {
    let t = Instant::now();
    let perfect = ad_key_rate(&BellDiagonal::new(1.0, 0.0, 0.0, 0.0).unwrap());
    let uniform = ad_key_rate(&BellDiagonal::new(0.25, 0.25, 0.25, 0.25).unwrap());
    let r = key_rate_from_flips(0.0, 0.0);
    let (k4, k7) = (key_per_mode(r, 4), key_per_mode(r, 7));
    let pass = perfect == 1.0 && uniform == 0.0 && k4 == 0.25 && k7 == 1.0 / 7.0 && t.elapsed() < Duration::from_secs(1);
    report(
        8,
        pass,
        t.elapsed(),
        &format!("r(perfect) = {perfect}, r(uniform) = {uniform}, r'max = {k4}, {k7:.6}"),
    );
}

/// Stand-in for the full-scale numbers: estimates are bit-identical whatever
/// the number of worker threads.
#[test]
fn criterion_9_determinism() {
    let t = Instant::now();
    let cfg = ChainConfig::new(
        FiberParams::new(0.97).unwrap(),
        Squeezing::from_sigma(0.11).unwrap(),
        Scheme::Steane7,
        2,
        8,
    )
    .unwrap();
    let plan = ChainPlan::new(cfg, DEFAULT_DIGITS).unwrap();
    let opts = EstimateOptions::new(0.3, 99).unwrap().with_budget(100_000);
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| estimate(&plan, &opts).unwrap())
    };
    let (a, b, c) = (run(1), run(2), run(5));
    let pass = a == b && b == c;
    report(
        9,
        pass,
        t.elapsed(),
        &format!("1/2/5 threads: p_x = {:e}, p_z = {:e}, trials {}", a.p_err_x, a.p_err_z, a.trials),
    );
}
