//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::time::{Duration, Instant};

use bandit_inertia::bounds::{self, ClosedForm};
use bandit_inertia::forge::{self, check_inertia_condition, first_inertia_failure};
use bandit_inertia::policy::{init_policy, PolicySpec, Stream, TieResolver, TieRule, UcbVariant};
use bandit_inertia::sim::{self, RegretReport, Trajectory};
use bandit_inertia::verify::{self, VarianceEstimate};
use bandit_inertia::DEFAULT_SEED;
use rand::{Rng, SeedableRng};

const SIGMAS: f64 = 3.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(id: u32, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = v.pass && in_time;
    println!(
        "criterion {id}: {} ({}; {:.2}s of {}s allowed)",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn c1_etc_exact() -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    for m in [1usize, 10, 20, 50, 250] {
        let inst = forge::forge_etc(1000, 2, m).unwrap();
        let traj = sim::run_episode(&inst, &PolicySpec::Etc { m }, DEFAULT_SEED, TieRule::Uniform, false).unwrap();
        let target = (1000 - m) as f64;
        pass &= traj.regret == target;
        details.push(format!("m={m}: {}", traj.regret));
    }
    Verdict { pass, detail: details.join(", ") }
}

fn c2_eg_early() -> Verdict {
    let (t, k, eps) = (1000, 2, 0.1);
    let inst = forge::forge_eg_early(t, k).unwrap();
    let spec = PolicySpec::EpsilonGreedy { eps };
    let report = sim::monte_carlo_regret(&inst, &spec, 100_000, DEFAULT_SEED).unwrap();
    let closed = verify::eg_tau_closed_form(t, k, eps);
    let bound = bounds::eg_bound_early(t, k, eps).value;
    let near_closed = report.agrees_with(closed, SIGMAS);
    let above_bound = report.mean >= bound - SIGMAS * report.stderr;

    let tau = verify::eg_early_discovery_samples(t, k, eps, 100_000, DEFAULT_SEED).unwrap();
    let tau = RegretReport::from_samples(&tau, DEFAULT_SEED);
    Verdict {
        pass: near_closed && above_bound,
        detail: format!(
            "total regret {:.3} +/- {:.3} vs closed form {closed:.3}: {}; vs bound {bound:.3}: {}; \
             discovery time {:.3} +/- {:.3}: {}",
            report.mean,
            report.stderr,
            if near_closed { "within 3 se" } else { "outside 3 se" },
            if above_bound { "ok" } else { "below" },
            tau.mean,
            tau.stderr,
            if tau.agrees_with(closed, SIGMAS) { "within 3 se of closed form" } else { "outside 3 se of closed form" },
        ),
    }
}

fn c3_eg_mid() -> Verdict {
    let (t, k, eps) = (1000, 2, 0.1);
    let inst = forge::forge_eg_mid(t, k).unwrap();
    let report = sim::monte_carlo_regret(&inst, &PolicySpec::EpsilonGreedy { eps }, 10_000, DEFAULT_SEED).unwrap();
    let bound = bounds::eg_bound_mid(t, k, eps).unwrap().value;
    let regret_ok = report.mean >= bound - SIGMAS * report.stderr;
    let taus = verify::eg_mid_tau_samples(t, k, eps, 10_000, DEFAULT_SEED).unwrap();
    let var = VarianceEstimate::from_samples(&taus);
    let var_ok = verify::eg_var_bound_check(t, k, eps, &var);
    Verdict {
        pass: regret_ok && var_ok && (bound - 214.64).abs() < 1e-2,
        detail: format!(
            "regret {:.2} +/- {:.2} vs {bound:.2}; Var(tau) {:.0} +/- {:.0} vs {}",
            report.mean,
            report.stderr,
            var.variance,
            var.stderr,
            k as f64 / eps * t as f64
        ),
    }
}

fn c4_eg_combined() -> Verdict {
    let bound = bounds::eg_bound_combined(1000).value;
    let mut pass = (bound - 125.0).abs() < 1e-12;
    let mut worst = f64::INFINITY;
    let mut worst_eps = 0.0;
    for eps in verify::DEFAULT_EPS_GRID {
        let cell = verify::eg_cell(1000, 2, eps, 10_000, DEFAULT_SEED).unwrap();
        let best = cell.best();
        let margin = best.mean + SIGMAS * best.stderr - bound;
        pass &= margin >= 0.0;
        if margin < worst {
            worst = margin;
            worst_eps = eps;
        }
    }
    Verdict { pass, detail: format!("smallest margin over T/8 is {worst:.2} at eps={worst_eps}") }
}

fn c5_ucb_lock_in() -> Verdict {
    let (inst, p) = forge::forge_ucb(1000, 2).unwrap();
    let params_ok = p.c == 96 && (p.delta - 0.37936).abs() <= 1e-4 && p.breakpoint == 193;
    let conditions = [UcbVariant::KnownHorizon, UcbVariant::Anytime]
        .into_iter()
        .all(|v| check_inertia_condition(p.c, p.delta, 1000, 2, v) && first_inertia_failure(p.c, p.delta, 1000, 2, v).is_none());
    let lose = sim::run_episode(&inst, &PolicySpec::UcbKnownHorizon, DEFAULT_SEED, TieRule::Fixed(1), false).unwrap();
    let unpulled = lose.steps.iter().filter(|s| s.outcome.round > 193).all(|s| s.outcome.arm != 0);
    let exact = sim::exact_ucb_regret(&p, UcbVariant::KnownHorizon).unwrap();
    let mc = sim::monte_carlo_regret(&inst, &PolicySpec::UcbKnownHorizon, 10_000, DEFAULT_SEED).unwrap();
    let floor = bounds::ucb_floor(1000, 2);
    let exact_ok = (exact.value - 250.74).abs() < 1e-2 && mc.agrees_with(exact.value, SIGMAS) && exact.value >= floor;
    Verdict {
        pass: params_ok && conditions && unpulled && exact_ok,
        detail: format!(
            "c={} delta={:.5} breakpoint={}; conditions {}; arm 1 idle after 193: {unpulled}; exact {:.2}, MC {:.2} +/- {:.2}, floor {floor}",
            p.c,
            p.delta,
            p.breakpoint,
            if conditions { "hold" } else { "fail" },
            exact.value,
            mc.mean,
            mc.stderr
        ),
    }
}

fn c6_ucb_grid() -> Verdict {
    let mut pass = true;
    let mut cells = Vec::new();
    for t in [500usize, 1000, 5000] {
        for k in [2usize, 3, 5] {
            if (t as f64) <= 4.0 * k as f64 * (t as f64).ln() {
                cells.push(format!("({t},{k}) skipped"));
                continue;
            }
            let (_, p) = match forge::forge_ucb(t, k) {
                Ok(x) => x,
                Err(e) => {
                    pass = false;
                    cells.push(format!("({t},{k}) forge error {e}"));
                    continue;
                }
            };
            let both = check_inertia_condition(p.c, p.delta, t, k, UcbVariant::KnownHorizon)
                && check_inertia_condition(p.c, p.delta, t, k, UcbVariant::Anytime);
            let exact = sim::exact_ucb_regret(&p, UcbVariant::KnownHorizon).unwrap().value;
            let anytime = sim::exact_ucb_regret(&p, UcbVariant::Anytime).unwrap().value;
            let floor = bounds::ucb_floor(t, k);
            let printed = bounds::ucb_bound_closed(t, k, ClosedForm::Printed).unwrap().value;
            pass &= both && exact >= floor && anytime >= floor;
            cells.push(format!("({t},{k}) exact {exact:.1} >= {floor:.1}, printed form {printed:.1}"));
        }
    }
    Verdict { pass, detail: cells.join("; ") }
}

fn c7_restart_calculators() -> Verdict {
    let stationary = bounds::restart_stationary_bound(2, 4, 4000).unwrap().value;
    let change = bounds::restart_change_bound(0.035, 4000, 4, 2, 2).unwrap().value;
    let continuity = verify::restart_bound_audit(0.035, 4000, 4, 2).unwrap();
    let stationary_ok = (stationary - 8.944).abs() <= 1e-3;
    let change_ok = (change - 144.47).abs() <= 1e-2;
    Verdict {
        pass: stationary_ok && change_ok && continuity,
        detail: format!(
            "stationary {stationary:.4} (target 8.944): {}; change {change:.4} (target 144.47): {}; continuity at gamma=d: {continuity}",
            if stationary_ok { "ok" } else { "off" },
            if change_ok { "ok" } else { "off" }
        ),
    }
}

fn c8_restarted_ucb() -> Verdict {
    let inst = forge::forge_restart_composite(4000, 2, 4, 2, forge::SingleChange::Ucb).unwrap();
    let spec = PolicySpec::restarted(PolicySpec::UcbKnownHorizon, 4);
    let report = sim::monte_carlo_regret(&inst, &spec, 10_000, DEFAULT_SEED).unwrap();
    let target = 0.07 * (2.0 / 4.0) * 0.5 * 4000.0;
    Verdict {
        pass: report.mean >= target - SIGMAS * report.stderr,
        detail: format!("regret {:.2} +/- {:.2} vs {target}", report.mean, report.stderr),
    }
}

fn water_filling_ok(variant: UcbVariant, arms: usize, seed: u64) -> bool {
    let horizon = 40 * arms;
    let spec = match variant {
        UcbVariant::KnownHorizon => PolicySpec::UcbKnownHorizon,
        UcbVariant::Anytime => PolicySpec::UcbAnytime,
    };
    let mut p = init_policy(&spec, arms, horizon).unwrap();
    let mut rng = Stream::seed_from_u64(seed);
    let mut ties = TieResolver::new(TieRule::Uniform, Stream::seed_from_u64(seed.wrapping_add(1)));
    for _ in 0..horizon {
        let a = p.select_arm(&mut rng, &mut ties).unwrap();
        p.observe(a, 0.0).unwrap();
        let c = p.stats().counts();
        if c.iter().max().unwrap() - c.iter().min().unwrap() > 1 {
            return false;
        }
    }
    true
}

fn c9_properties() -> Verdict {
    let mut parts = Vec::new();

    let water = [2usize, 3, 5].into_iter().all(|k| {
        (0..100u64).all(|s| water_filling_ok(UcbVariant::KnownHorizon, k, s) && water_filling_ok(UcbVariant::Anytime, k, s))
    });
    parts.push(("water-filling", water));

    let mut lemma = true;
    for i in 0..=40 {
        let x = 10f64.powf(-4.0 + 4.0 * i as f64 / 40.0);
        for r in (0..=100).map(|j| j * 100).chain(0..100) {
            lemma &= verify::lemma2_check(x, r);
        }
    }
    parts.push(("lemma 2 grid", lemma));

    let mut rng = Stream::seed_from_u64(DEFAULT_SEED);
    let mut implication = true;
    let mut tested = 0;
    while tested < 200 {
        let k = rng.gen_range(2..=5usize);
        let t = rng.gen_range(100..=3000usize);
        let c = rng.gen_range(1..=(t / k).max(1));
        if k * c + 1 > t {
            continue;
        }
        let delta = rng.gen_range(0.0..1.0);
        tested += 1;
        if check_inertia_condition(c, delta, t, k, UcbVariant::KnownHorizon) {
            implication &= check_inertia_condition(c, delta, t, k, UcbVariant::Anytime);
        }
    }
    parts.push(("known implies anytime", implication));

    let mut oracle = true;
    for (t, k) in [(1000usize, 2usize), (500, 3), (2000, 5)] {
        let (inst, _) = forge::forge_ucb(t, k).unwrap();
        let arms: Vec<usize> = (1..=t).map(|r| inst.optimal_arm(r).unwrap()).collect();
        oracle &= Trajectory::replay(&inst, &arms).unwrap().regret == 0.0;
    }
    let etc = forge::forge_etc(1000, 3, 20).unwrap();
    let arms: Vec<usize> = (1..=1000).map(|r| etc.optimal_arm(r).unwrap()).collect();
    oracle &= Trajectory::replay(&etc, &arms).unwrap().regret == 0.0;
    parts.push(("oracle follower", oracle));

    let (ucb, _) = forge::forge_ucb(1000, 2).unwrap();
    let composite = forge::forge_restart_composite(4000, 2, 4, 2, forge::SingleChange::Ucb).unwrap();
    let monotone = ucb.validate_with_budget(2).ok
        && (1..6).all(|b| ucb.validate_with_budget(b).ok)
        && !ucb.validate_with_budget(0).ok
        && (3..8).all(|b| composite.validate_with_budget(b).ok)
        && !composite.validate_with_budget(2).ok;
    parts.push(("class monotonicity", monotone));

    Verdict {
        pass: parts.iter().all(|(_, ok)| *ok),
        detail: parts.iter().map(|(n, ok)| format!("{n}: {}", if *ok { "ok" } else { "fail" })).collect::<Vec<_>>().join(", "),
    }
}

#[test]
fn acceptance() {
    let results = [
        check(1, Duration::from_secs(1), c1_etc_exact),
        check(2, Duration::from_secs(60), c2_eg_early),
        check(3, Duration::from_secs(60), c3_eg_mid),
        check(4, Duration::from_secs(300), c4_eg_combined),
        check(5, Duration::from_secs(60), c5_ucb_lock_in),
        check(6, Duration::from_secs(60), c6_ucb_grid),
        check(7, Duration::from_secs(1), c7_restart_calculators),
        check(8, Duration::from_secs(300), c8_restarted_ucb),
        check(9, Duration::from_secs(60), c9_properties),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
