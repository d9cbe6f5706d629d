//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Built with `harness = false` so the lines are always printed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dwell_core::lyapunov::{
    is_irreducible, lambda_periodic, lambda_periodic_sweep, lambda_random, PeriodicSearch,
};
use dwell_core::pdmp::{
    chi_integral, chi_time_average, invariant_histogram, mu_support_check, nu_support_check, sample_dwell,
    scaling_check, simulate, simulate_until, PdmpConfig,
};
use dwell_core::projective::{proj_flow, radial_log_growth};
use dwell_core::reach::{
    connectivity_transition, example31_modes, example31_oracle, hausdorff, ics_compute, step_reach, GridSet,
    ReachConfig,
};
use dwell_core::signals::sample_random;
use dwell_core::{expm, spectral_abscissa, Angle, Mat, ModeSet, ProjPoint};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn regression() -> ModeSet {
    let a1 = Mat::diag(&[1.0, -1.0]);
    let r = Mat::rotation(PI / 3.0);
    let a2 = &(&r * &a1) * &r.transpose();
    ModeSet::new(vec![a1, a2]).unwrap()
}

fn diag_rotation() -> ModeSet {
    ModeSet::new(vec![Mat::diag(&[1.0, -1.0]), Mat::from_array([[0.0, 1.0], [-1.0, 0.0]])]).unwrap()
}

fn example31_config(tau: f64, n: usize) -> ReachConfig {
    let mut cfg = ReachConfig::new(tau, n);
    cfg.n_durations = 32;
    cfg
}

fn union(sets: &[GridSet], n: usize) -> GridSet {
    sets.iter().fold(GridSet::empty(n).unwrap(), |u, s| u.union(s))
}

fn criterion_1() -> Outcome {
    let (a, b) = (Angle::new(0.0), Angle::new(PI / 2.0));
    let modes = example31_modes(a, b);
    let n = 1024;
    let tol = 2.0 * PI / n as f64;
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in [0.05, 0.5, 1.0, 3.0] {
        let start = Instant::now();
        let sets = ics_compute(&modes, &example31_config(tau, n)).unwrap();
        let took = start.elapsed();
        let h = hausdorff(&union(&sets, n).arcs(), &example31_oracle(tau, a, b).unwrap().arcs());
        pass &= h <= tol && took <= Duration::from_secs(60);
        parts.push(format!("tau={tau}: H={h:.2e} in {:.2}s", took.as_secs_f64()));
    }
    outcome(pass, format!("{} (tol {tol:.2e})", parts.join(", ")))
}

fn criterion_2() -> Outcome {
    let (a, b) = (Angle::new(0.0), Angle::new(PI / 2.0));
    let modes = example31_modes(a, b);
    let star = example31_oracle(0.0, a, b).unwrap().tau_critical;
    let components = |tau: f64| {
        let sets = ics_compute(&modes, &example31_config(tau, 1024)).unwrap();
        union(&sets, 1024).components().len()
    };
    let (low, high) = (components(0.5 * star), components(2.0 * star));
    let detected = connectivity_transition(&modes, 0.5 * star, 2.0 * star, 14, |t| example31_config(t, 1024)).unwrap();
    let rel = (detected - star).abs() / star;
    outcome(
        low == 1 && high == 2 && rel <= 0.05,
        format!("tau*={star:.6}: components {low} at tau*/2, {high} at 2tau*; detected {detected:.5} ({:.2}% off)", 100.0 * rel),
    )
}

fn criterion_3() -> Outcome {
    let modes = diag_rotation();
    let search = PeriodicSearch::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in [0.1, 1.0] {
        let r = lambda_random(&modes, tau, 2000, 200.0, 7).unwrap().value;
        let p = lambda_periodic(&modes, tau, &search).unwrap().value;
        pass &= (r - p).abs() <= 0.05;
        parts.push(format!("tau={tau}: random {r:.4} periodic {p:.4}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let raw = Mat::new(2, (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let a = raw.scale(rng.gen_range(0.2..2.0) / raw.norm_2());
        let single = ModeSet::new(vec![a.clone()]).unwrap();
        let alpha = spectral_abscissa(&a).unwrap();
        let r = lambda_random(&single, 1.0, 2000, 200.0, k).unwrap().value;
        let p = lambda_periodic(&single, 1.0, &search).unwrap().value;
        worst = worst.max((r - alpha).abs()).max((p - alpha).abs());
    }
    pass &= worst <= 0.02;
    parts.push(format!("single-mode worst deviation {worst:.2e} over 10 matrices"));
    outcome(pass, parts.join("; "))
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + 1e-6)
}

fn criterion_4() -> Outcome {
    let taus = [0.0, 0.25, 0.5, 1.0, 2.0];
    // one duration grid for every tau; entries below tau are dropped, so
    // the candidate sets are nested
    let grid = vec![0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 22.0];
    let search = PeriodicSearch {
        duration_grid: Some(grid),
        t_max: Some(22.0),
        ..PeriodicSearch::default()
    };
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
    let reg: Vec<f64> = lambda_periodic_sweep(&regression(), &taus, &search)
        .unwrap()
        .iter()
        .map(|e| e.value)
        .collect();
    let nn_modes = ModeSet::new(vec![
        Mat::from_array([[-0.1, 1.0], [-2.0, -0.1]]),
        Mat::from_array([[-0.1, 2.0], [-1.0, -0.1]]),
    ])
    .unwrap();
    let nn: Vec<f64> = lambda_periodic_sweep(&nn_modes, &taus, &search)
        .unwrap()
        .iter()
        .map(|e| e.value)
        .collect();
    outcome(
        non_increasing(&reg) && non_increasing(&nn),
        format!("regression [{}]; non-normal pair [{}]", fmt(&reg), fmt(&nn)),
    )
}

fn criterion_5() -> Outcome {
    let cfg = PdmpConfig::uniform(regression(), 1.0, 1.0, 5).unwrap();
    let horizon = 1e4;
    let trace = simulate_until(&cfg, horizon).unwrap();
    let rate = trace.jumps_until(horizon) as f64 / horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mean = (0..100_000).map(|_| sample_dwell(1.0, 1.0, &mut rng).unwrap()).sum::<f64>() / 1e5;
    outcome(
        (0.48..=0.52).contains(&rate) && (1.98..=2.02).contains(&mean),
        format!("N_t/t = {rate:.4}; mean dwell = {mean:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let cfg = PdmpConfig::uniform(regression(), 1.0, 1.0, 42).unwrap();
    let trace = simulate(&cfg, 100_000).unwrap();
    let time = chi_time_average(&trace).unwrap();
    let hist = invariant_histogram(&trace, 10_000, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let integral = chi_integral(&cfg, &hist, 100_000, &mut rng).unwrap();
    let sigma = (time.stderr.powi(2) + integral.stderr.powi(2)).sqrt();
    let agree = (time.value - integral.value).abs() <= 3.0 * sigma;
    let norm = integral.normalization;
    let norm_ok = (norm.value - 1.0).abs() <= 3.0 * norm.stderr;
    let sc = scaling_check(&cfg, &trace).unwrap();
    let scaling_ok = sc.difference.value.abs() <= 3.0 * sc.difference.stderr;
    outcome(
        agree && norm_ok && scaling_ok,
        format!(
            "chi_time {:.5}±{:.5}, chi_integral {:.5}±{:.5}; normalization {:.4}±{:.4}; chi_d·rate {:.5} (diff {:.2e}±{:.2e})",
            time.value,
            time.stderr,
            integral.value,
            integral.stderr,
            norm.value,
            norm.stderr,
            sc.chi_jump.value * sc.jump_rate,
            sc.difference.value,
            sc.difference.stderr
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = PdmpConfig::uniform(regression(), 1.0, 1.0, 42).unwrap();
    let trace = simulate(&cfg, 100_000).unwrap();
    let n = 512;
    let d = union(&ics_compute(&cfg.modes, &ReachConfig::new(1.0, n)).unwrap(), n);
    let mu = mu_support_check(&trace, 10_000, &d, 2).unwrap();
    let hist = invariant_histogram(&trace, 10_000, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let integral = chi_integral(&cfg, &hist, 20_000, &mut rng).unwrap();
    let nu = nu_support_check(&cfg, &integral.nu_samples, &d).unwrap();
    outcome(
        1.0 - mu.outside_fraction >= 0.99 && nu.outside_fraction <= 0.01,
        format!(
            "mu inside {:.4}% of {} samples; nu outside {:.4}% of {} samples",
            100.0 * (1.0 - mu.outside_fraction),
            mu.n_samples,
            100.0 * nu.outside_fraction,
            nu.n_samples
        ),
    )
}

/// Seeded spot checks of the property suites; the exhaustive versions run
/// as proptests in the unit tests.
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut results: Vec<(String, bool)> = Vec::new();
    let mut check = |name: &str, ok: bool| results.push((name.to_string(), ok));

    let semigroup = (0..50).all(|_| {
        let a = Mat::new(3, (0..9).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let (s, t) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let lhs = expm(&a, s + t).unwrap();
        let rhs = &expm(&a, s).unwrap() * &expm(&a, t).unwrap();
        lhs.max_abs_diff(&rhs) <= 1e-9 * lhs.norm_fro().max(1.0)
    });
    check("expm semigroup", semigroup);

    let assoc = (0..50u64).all(|k| {
        let sig = |j: u64| sample_random(0.5, 3, 4.0, 100 * k + j, 1.0).unwrap();
        let (a, b, c) = (sig(0), sig(1), sig(2));
        let left = a.concat(&b).unwrap().concat(&c).unwrap();
        let right = a.concat(&b.concat(&c).unwrap()).unwrap();
        left == right && left.is_valid()
    });
    check("concat associativity", assoc);

    let modes = regression();
    let additive = (0..50u64).all(|k| {
        let a = sample_random(1.0, 2, 5.0, k, 1.0).unwrap();
        let b = sample_random(1.0, 2, 3.0, k + 1000, 1.0).unwrap();
        let x0 = ProjPoint::from_angle(0.1 * k as f64);
        let (ga, xa) = radial_log_growth(&a, &modes, &x0).unwrap();
        let (gb, _) = radial_log_growth(&b, &modes, &xa).unwrap();
        let (gab, _) = radial_log_growth(&a.concat(&b).unwrap(), &modes, &x0).unwrap();
        (gab - ga - gb).abs() <= 1e-9 * (1.0 + gab.abs())
    });
    check("radial-growth additivity", additive);

    let f1 = example31_modes(Angle::new(0.0), Angle::new(PI / 2.0)).get(0).unwrap().clone();
    let cot_law = (0..50).all(|_| {
        let psi0 = rng.gen_range(0.05..PI - 0.05);
        let t = rng.gen_range(0.0..20.0);
        let psi = proj_flow(&f1, t, &ProjPoint::from_angle(psi0)).unwrap().angle().unwrap().value();
        let expected = Angle::new(PI / 2.0 - (1.0 / psi0.tan() + t).atan()).value();
        Angle::new(psi).diff(Angle::new(expected)).abs() <= 1e-9
    });
    check("cot-law flow match", cot_law);

    let c = 0.37;
    let shifted = regression().shifted(c);
    let search = PeriodicSearch::default();
    let lp = |m: &ModeSet| lambda_periodic(m, 0.5, &search).unwrap().value;
    let lr = |m: &ModeSet| lambda_random(m, 0.5, 200, 50.0, 1).unwrap().value;
    check("shift covariance of lambda_periodic", (lp(&shifted) - lp(&modes) - c).abs() <= 1e-9);
    check("shift covariance of lambda_random", (lr(&shifted) - lr(&modes) - c).abs() <= 1e-9);

    let base = PdmpConfig::uniform(regression(), 1.0, 1.0, 3).unwrap();
    let moved = PdmpConfig {
        modes: base.modes.shifted(c),
        ..base.clone()
    };
    let (t0, t1) = (simulate(&base, 5000).unwrap(), simulate(&moved, 5000).unwrap());
    let chi_t = chi_time_average(&t1).unwrap().value - chi_time_average(&t0).unwrap().value;
    check("shift covariance of chi_time_average", (chi_t - c).abs() <= 1e-10);
    let h = invariant_histogram(&t0, 500, 128).unwrap();
    let i0 = chi_integral(&base, &h, 2000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let i1 = chi_integral(&moved, &h, 2000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    check("shift covariance of chi_integral", (i1.self_normalized - i0.self_normalized - c).abs() <= 1e-7);

    let ex = example31_modes(Angle::new(0.0), Angle::new(PI / 2.0));
    let invariant = [(ex.clone(), 0.5), (ex.clone(), 3.0), (regression(), 1.0)]
        .into_iter()
        .all(|(m, tau)| {
            let cfg = ReachConfig::new(tau, 512);
            ics_compute(&m, &cfg)
                .unwrap()
                .iter()
                .all(|d| step_reach(d, &m, &cfg).unwrap().is_subset(&d.thickened(1)))
        });
    check("tau-ICS dwell-positive invariance", invariant);

    let refinement = [0.5, 3.0].into_iter().all(|tau| {
        let oracle = example31_oracle(tau, Angle::new(0.0), Angle::new(PI / 2.0)).unwrap().arcs();
        let h: Vec<f64> = [256, 512, 1024]
            .iter()
            .map(|&n| hausdorff(&union(&ics_compute(&ex, &ReachConfig::new(tau, n)).unwrap(), n).arcs(), &oracle))
            .collect();
        (h[1] - h[0]).abs() <= PI / 256.0 && (h[2] - h[1]).abs() <= PI / 512.0
    });
    check("grid-refinement convergence", refinement);

    let determinism = simulate(&base, 2000).unwrap() == simulate(&base, 2000).unwrap()
        && lambda_random(&modes, 0.5, 100, 50.0, 9).unwrap() == lambda_random(&modes, 0.5, 100, 50.0, 9).unwrap();
    check("seed determinism", determinism);

    let conj = (0..20).all(|_| {
        let r = Mat::new(2, (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        if r.det().abs() < 0.1 {
            return true;
        }
        [diag_rotation(), regression(), ModeSet::new(vec![Mat::diag(&[1.0, 2.0]), Mat::diag(&[0.0, 1.0])]).unwrap()]
            .iter()
            .all(|m| is_irreducible(m).is_irreducible == is_irreducible(&m.conjugated_by(&r).unwrap()).is_irreducible)
    });
    check("irreducibility conjugation invariance", conj);

    let total = results.len();
    let failed: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{total}/{total} property checks")
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("two-shear control set vs closed form", criterion_1),
        ("connectivity transition", criterion_2),
        ("periodization consistency", criterion_3),
        ("monotonicity in tau", criterion_4),
        ("PDMP jump statistics", criterion_5),
        ("stochastic exponent cross-validation", criterion_6),
        ("measure support", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut all = true;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance total {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
