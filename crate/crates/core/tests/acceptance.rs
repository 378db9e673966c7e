//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fail.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{complete_network, max_abs, random_leader_network, random_network, rng};
use consensus_game::closed_form::{complete_limit, gamma, leader_limit, ClosedForm};
use consensus_game::kernels::{kernel_cosh, kernel_coshm1, kernel_sinhc};
use consensus_game::presets::{self, initial_opinions};
use consensus_game::solver::{assemble_system, solve_equilibrium, transition_blocks};
use consensus_game::verify::{deviation_test, evaluate_cost, nash_residual, quadratic_cost};
use consensus_game::{build_matrices, CompleteParams, Network, StarParams, Trajectory};
use rand::Rng;

const SAMPLES: usize = 501;
const SEED: u64 = 0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(name: &str) -> Network {
    presets::preset(name).expect("preset").network
}

fn solve(net: &Network) -> Trajectory {
    solve_equilibrium(net, SAMPLES).expect("solver")
}

/// Sup-norm over the grid between the solver and the matching closed form.
fn closed_form_gap(net: &Network) -> f64 {
    let cf = ClosedForm::for_network(net).unwrap().expect("closed form");
    let traj = solve(net);
    let mut worst = 0.0f64;
    for (r, &t) in traj.grid.iter().enumerate() {
        let exact = cf.at(&net.x0, t).unwrap();
        worst = worst.max(max_abs(exact.iter().zip(traj.x.row(r)).map(|(a, b)| a - b)));
    }
    worst
}

fn random_general(count: usize, seed: u64) -> Vec<Network> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(2..=12);
            random_network(&mut r, n, 0.5, 5.0)
        })
        .collect()
}

fn heterogeneous_leader() -> Network {
    random_leader_network(&mut rng(SEED), 10, 5.0)
}

fn criterion_1() -> Outcome {
    let gaps: Vec<f64> = ["fig1b", "fig1c"].iter().map(|p| closed_form_gap(&preset(p))).collect();
    let worst = max_abs(gaps.iter().copied());
    outcome(worst <= 1e-8, format!("fig1b {:.2e}, fig1c {:.2e} (bound 1e-8)", gaps[0], gaps[1]))
}

fn criterion_2() -> Outcome {
    let nets = [preset("fig2b"), preset("fig2c"), heterogeneous_leader()];
    let gaps: Vec<f64> = nets.iter().map(closed_form_gap).collect();
    outcome(
        max_abs(gaps.iter().copied()) <= 1e-8,
        format!("fig2b {:.2e}, fig2c {:.2e}, random leader {:.2e} (bound 1e-8)", gaps[0], gaps[1], gaps[2]),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(SEED + 3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = r.random_range(1..=12);
        let net = random_network(&mut r, n, 0.5, 5.0);
        let gm = build_matrices(&net).unwrap();
        let sys = assemble_system(&gm);
        for _ in 0..10 {
            let t = r.random_range(0.0..=net.horizon);
            worst = worst.max(transition_blocks(&sys, &gm, t).unwrap().identity_defect(&gm.w));
        }
    }
    outcome(worst <= 1e-10, format!("worst relative defect {worst:.2e} over 20 networks x 10 times (bound 1e-10)"))
}

fn all_instances() -> Vec<Network> {
    let mut nets: Vec<Network> = presets::preset_names().iter().map(|p| preset(p)).collect();
    nets.push(heterogeneous_leader());
    nets.extend(random_general(20, SEED + 4));
    nets
}

fn criterion_4() -> Outcome {
    let nets = all_instances();
    let mut worst_p = 0.0f64;
    let mut exact_start = true;
    for net in &nets {
        let traj = solve(net);
        worst_p = worst_p.max(max_abs(traj.p.row(SAMPLES - 1).iter().copied()));
        exact_start &= traj.x.row(0) == net.x0.as_slice();
    }
    outcome(
        worst_p <= 1e-8 && exact_start,
        format!("{} instances: max |p(T)| {worst_p:.2e} (bound 1e-8), x(0) == x0 exactly: {exact_start}", nets.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut nets: Vec<Network> = ["fig1b", "fig2b", "fig3b", "fig3c"].iter().map(|p| preset(p)).collect();
    nets.extend(random_general(10, SEED + 5));
    let worst = nets.iter().map(|n| nash_residual(n, &solve(n)).unwrap()).fold(f64::MIN, f64::max);

    let fig = preset("fig1b");
    let residuals: Vec<f64> =
        [101, 201, 401].iter().map(|&m| nash_residual(&fig, &solve_equilibrium(&fig, m).unwrap()).unwrap()).collect();
    let ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]];
    let rate_ok = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    outcome(
        worst <= 1e-6 && rate_ok,
        format!(
            "max residual at m=501 over {} instances {worst:.2e} (bound 1e-6); fig1b m=101/201/401 residuals \
             {:.2e}/{:.2e}/{:.2e}, doubling ratios {:.2}/{:.2} (required in [3, 5])",
            nets.len(),
            residuals[0],
            residuals[1],
            residuals[2],
            ratios[0],
            ratios[1]
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut worst = f64::MIN;
    let mut pass = true;
    for name in ["fig1b", "fig3b"] {
        let net = preset(name);
        let traj = solve(&net);
        for i in 0..net.n {
            let out = deviation_test(&net, &traj, i, 100, SEED, 1e-9).unwrap();
            worst = worst.max(out.worst_gain);
            pass &= out.passed;
        }
    }
    outcome(pass, format!("worst deviation gain {worst:.2e} over 2 x 10 agents x 100 deviations (bound 1e-9)"))
}

fn criterion_7() -> Outcome {
    let x0 = initial_opinions();
    let mean = x0.iter().sum::<f64>() / x0.len() as f64;
    let spread = max_abs(x0.iter().map(|x| x - mean));

    let free = complete_network(10, 2.0, 0.0, 50.0, x0.clone());
    let free_dev = max_abs(solve(&free).terminal().iter().map(|x| x - mean));
    let free_ok = free_dev <= 1e-6;

    let mut stubborn_excess = f64::MIN;
    for horizon in [5.0, 50.0] {
        let net = complete_network(10, 2.0, 0.2, horizon, x0.clone());
        let p = CompleteParams::from_network(&net).unwrap();
        let lim = complete_limit(&p, &x0).unwrap();
        let bound = (gamma(&p, horizon).unwrap() - p.k / p.lambda1).abs() * spread + 1e-8;
        let dev = max_abs(solve(&net).terminal().iter().zip(&lim).map(|(a, b)| a - b));
        stubborn_excess = stubborn_excess.max(dev - bound);
    }

    let mut leader_excess = f64::MIN;
    for net in [preset("fig2b"), preset("fig2c"), heterogeneous_leader()] {
        let p = StarParams::from_network(&net).unwrap();
        let lim = leader_limit(&p, &net.x0).unwrap();
        let terminal = solve(&net).terminal().to_vec();
        for i in 0..net.n {
            let bound = p.xi(i, net.horizon).abs() * (net.x0[i] - net.x0[0]).abs() + 1e-8;
            leader_excess = leader_excess.max((terminal[i] - lim[i]).abs() - bound);
        }
    }
    outcome(
        free_ok && stubborn_excess <= 0.0 && leader_excess <= 0.0,
        format!(
            "k=0,T=50 max |x(T)-mean| {free_dev:.2e} (bound 1e-6); complete-limit bound slack {:.2e}; \
             leader-limit bound slack {:.2e}",
            -stubborn_excess, -leader_excess
        ),
    )
}

fn criterion_8() -> Outcome {
    let nets = all_instances();
    let mut worst = 0.0f64;
    for net in &nets {
        let traj = solve(net);
        for i in 0..net.n {
            let a = evaluate_cost(net, &traj, i).unwrap().total;
            let b = quadratic_cost(net, &traj, i).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |evaluate - quadratic| {worst:.2e} over {} instances (bound 1e-9)", nets.len()))
}

fn pairwise_spread(x: &[f64]) -> f64 {
    let hi = x.iter().copied().fold(f64::MIN, f64::max);
    let lo = x.iter().copied().fold(f64::MAX, f64::min);
    hi - lo
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn criterion_9() -> Outcome {
    let (b, c) = (preset("fig1b"), preset("fig1c"));
    let lim_b = ClosedForm::for_network(&b).unwrap().unwrap().limit(&b.x0).unwrap();
    let lim_c = ClosedForm::for_network(&c).unwrap().unwrap().limit(&c.x0).unwrap();
    let same_limit = max_abs(lim_b.iter().zip(&lim_c).map(|(x, y)| x - y)) <= 1e-15;
    let at_two = (2.0 / b.horizon * (SAMPLES - 1) as f64).round() as usize;
    let (db, dc) = (pairwise_spread(solve(&b).x.row(at_two)), pairwise_spread(solve(&c).x.row(at_two)));

    let groups = |name: &str| {
        let x = solve(&preset(name)).terminal().to_vec();
        let f1 = mean(&x[1..5]);
        let f10 = mean(&x[5..9]);
        ((f10 - f1).abs(), (f10 - x[9]).abs())
    };
    let (b_to_f1, b_to_l10) = groups("fig3b");
    let (c_to_f1, c_to_l10) = groups("fig3c");
    outcome(
        same_limit && dc > db && c_to_f1 < c_to_l10 && b_to_l10 < b_to_f1,
        format!(
            "identical limits: {same_limit}; spread at t=2 fig1b {db:.4} < fig1c {dc:.4}; followers-10 distance \
             to followers-1/leader-10: fig3b {b_to_f1:.4}/{b_to_l10:.4}, fig3c {c_to_f1:.4}/{c_to_l10:.4}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut exact = 0.0f64;
    let mut continuity_excess = f64::MIN;
    for t in [0.0f64, 0.1, 0.5, 1.0, 2.0, 5.0] {
        exact = exact
            .max((kernel_cosh(0.0, t) - 1.0).abs())
            .max((kernel_sinhc(0.0, t) - t).abs())
            .max((kernel_coshm1(0.0, t) - t * t / 2.0).abs());
        // First-order Taylor coefficients in λ bound the change over |λ| = 1e-9.
        let slopes = [t * t / 2.0, t.powi(3) / 6.0, t.powi(4) / 24.0];
        let kernels: [fn(f64, f64) -> f64; 3] = [kernel_cosh, kernel_sinhc, kernel_coshm1];
        for (f, slope) in kernels.iter().zip(slopes) {
            for lambda in [1e-9, -1e-9] {
                let change = (f(lambda, t) - f(0.0, t)).abs();
                continuity_excess = continuity_excess.max(change - (2e-9 * slope + 1e-15));
            }
        }
    }
    outcome(
        exact <= 1e-12 && continuity_excess <= 0.0,
        format!("lambda=0 error {exact:.2e} (bound 1e-12); continuity slack {:.2e}", -continuity_excess),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 closed form vs solver, complete graph", criterion_1),
        ("2 closed form vs solver, single leader", criterion_2),
        ("3 transition block identities", criterion_3),
        ("4 boundary conditions", criterion_4),
        ("5 Nash certification", criterion_5),
        ("6 random deviations", criterion_6),
        ("7 consensus limits", criterion_7),
        ("8 cost identity", criterion_8),
        ("9 figure reproduction", criterion_9),
        ("10 kernel limits", criterion_10),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {e:?}")));
        let secs = start.elapsed().as_secs_f64();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} [{secs:.2}s] {}", result.detail);
        failures += usize::from(!result.pass);
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
