//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Oracles are written out here independently of the
//! library wherever that is practical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qre_defense::experiments::{builtin_space, run_lambda_sweep, BuiltinSpace, SweepKind, SweepSpec};
use qre_defense::quantal::classify_loss_case;
use qre_defense::{
    defender_response, pobw, poqa, sigma_lambda_derivative, sigma_loss_sensitivity, theorem_case, SecurityGame,
    SensitivityMethod, StrategySpace, TheoremCase,
};
use qre_defense_cli::run_with;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn loss_exp(budget: f64, a: f64, r: f64) -> f64 {
    f64::max((-r).exp(), a * (-(budget - r)).exp())
}

/// Logit over `-lambda * L` via log-sum-exp.
fn softmax_min(losses: &[f64], lambda: f64) -> Vec<f64> {
    let z: Vec<f64> = losses.iter().map(|l| -lambda * l).collect();
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    z.iter().map(|x| (x - lse).exp()).collect()
}

fn space_b_sigma3(a: f64, lambda: f64) -> f64 {
    let r3 = (10.0 - a.ln()) / 2.0;
    let losses: Vec<f64> = [7.0, 5.4, r3, 6.5, 10.0].iter().map(|&r| loss_exp(10.0, a, r)).collect();
    softmax_min(&losses, lambda)[2]
}

/// Random menu of `n` distinct allocations in `[0, R]`.
fn random_space(rng: &mut ChaCha8Rng, budget: f64, n: usize) -> StrategySpace<f64> {
    loop {
        let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=budget)).collect();
        r.sort_by(f64::total_cmp);
        if r.windows(2).all(|w| w[1] - w[0] > 1e-9) {
            return StrategySpace::new(budget, r).unwrap();
        }
    }
}

fn criterion_1() -> Check {
    let res = run_lambda_sweep(&SweepSpec::default_for(SweepKind::LambdaSweep)).map_err(|e| e.to_string())?;
    let lambdas = res.table.float_column("lambda").unwrap();
    let s3 = res.table.float_column("sigma_r3").unwrap();
    ensure(lambdas[0] == 0.0 && lambdas.len() == 101, || "grid is not lambda = 0 plus 100 log points".into())?;
    ensure(lambdas[1] == 1e-3 && *lambdas.last().unwrap() == 1e4, || "grid endpoints".into())?;
    let min_step = s3.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    ensure((s3[0] - 0.2).abs() <= 1e-12, || format!("sigma(r3) at 0 = {}", s3[0]))?;
    ensure(*s3.last().unwrap() >= 0.999, || format!("sigma(r3) at 1e4 = {}", s3.last().unwrap()))?;
    ensure(min_step >= -1e-12, || format!("min consecutive difference {min_step:e}"))?;
    Ok(format!("start {:.15}, end {:.9}, min step {min_step:.3e}", s3[0], s3.last().unwrap()))
}

fn criterion_2() -> Check {
    let mut sig = Vec::new();
    for a in [0.5, 1.0, 1.5] {
        let game = SecurityGame::exponential(10.0, a).unwrap();
        let space = builtin_space(BuiltinSpace::A, a).unwrap();
        classify_loss_case(&game, &space)
            .and_then(|c| c.require_site_one_dominant(&space))
            .map_err(|e| format!("A = {a}: {e}"))?;
        sig.push(defender_response(&game, &space, 50.0).unwrap().get(2));
    }
    let gaps = [sig[0] - sig[1], sig[1] - sig[2]];
    ensure(gaps.iter().all(|g| *g > 1e-6), || format!("sigma = {sig:?}"))?;
    Ok(format!("sigma(r3) = {:.6} > {:.6} > {:.6}", sig[0], sig[1], sig[2]))
}

fn criterion_3() -> Check {
    let grid = [0.5, 0.75, 1.0, 1.25, 1.5];
    let sig: Vec<f64> = grid
        .iter()
        .map(|&a| {
            let game = SecurityGame::exponential(10.0, a).unwrap();
            defender_response(&game, &builtin_space(BuiltinSpace::B, a).unwrap(), 50.0).unwrap().get(2)
        })
        .collect();
    ensure(sig.windows(2).all(|w| w[1] > w[0]), || format!("sigma(r3) not increasing: {sig:?}"))?;
    let mut worst = 0f64;
    for &a in &grid {
        let game = SecurityGame::exponential(10.0, a).unwrap();
        let space = builtin_space(BuiltinSpace::B, a).unwrap();
        classify_loss_case(&game, &space)
            .and_then(|c| c.require_site_two_dominant(&space))
            .map_err(|e| format!("A = {a}: {e}"))?;
        let closed = sigma_loss_sensitivity(&game, &space, 50.0, SensitivityMethod::ClosedForm).unwrap();
        let h = 1e-4;
        let fd = (space_b_sigma3(a + h, 50.0) - space_b_sigma3(a - h, 50.0)) / (2.0 * h);
        ensure(closed > 0.0, || format!("A = {a}: closed form {closed} not positive"))?;
        let rel = ((closed - fd) / fd).abs();
        ensure(rel < 1e-5, || format!("A = {a}: closed {closed}, fd {fd}, rel {rel:e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("sigma(r3) {:.5} .. {:.5}, worst rel err {worst:.2e}", sig[0], sig[4]))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0f64;
    for trial in 0..1000 {
        let budget = rng.gen_range(1.0..=8.0);
        let a = rng.gen_range(0.1..=10.0);
        let n = rng.gen_range(2..=8);
        let lambda = rng.gen_range(0.0..=1e3);
        let game = SecurityGame::exponential(budget, a).unwrap();
        let space = random_space(&mut rng, budget, n);
        let value = poqa(&game, &space, lambda).unwrap().value;
        let bound = f64::max(a, 1.0 / a) * n as f64 * budget.exp();
        ensure(value <= bound, || format!("trial {trial}: PoQA {value} > {bound}"))?;
        worst = worst.max(value / bound);
    }
    Ok(format!("1000 trials, 0 violations, max PoQA/bound {worst:.3e}"))
}

fn criterion_5() -> Check {
    let space = builtin_space(BuiltinSpace::C, 1.0).unwrap();
    let at = |a: f64, lambda: f64| poqa(&SecurityGame::exponential(10.0, a).unwrap(), &space, lambda).unwrap().value;
    let (p05, p1, p15) = (at(0.5, 10.0), at(1.0, 10.0), at(1.5, 10.0));
    ensure(p05 > p1 && p05 > p15, || format!("PoQA at lambda 10: {p05}, {p1}, {p15}"))?;
    let limit = at(1.0, 1e6);
    ensure((limit - 1.0).abs() <= 1e-6, || format!("PoQA(A=1, 1e6) = {limit}"))?;
    Ok(format!("PoQA(0.5) {p05:.4} > PoQA(1) {p1:.4}, PoQA(1.5) {p15:.4}; limit {limit:.12}"))
}

fn criterion_6() -> Check {
    let mut worst = 0f64;
    for k in 0..50 {
        let ln_a = -9.0 + 18.0 * (k + 1) as f64 / 51.0;
        let game = SecurityGame::exponential(10.0, ln_a.exp()).unwrap();
        let err = (game.optimal_allocation().site1 - (10.0 - ln_a) / 2.0).abs();
        ensure(err < 1e-8, || format!("ln A = {ln_a}: error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("50 losses, max |bisection - closed form| {worst:.2e}"))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0f64;
    for trial in 0..50 {
        let budget = rng.gen_range(1.0..=12.0);
        let a = f64::exp(rng.gen_range(-3.0..=3.0));
        let n = rng.gen_range(2..=8);
        let game = SecurityGame::exponential(budget, a).unwrap();
        let space = random_space(&mut rng, budget, n);
        let losses: Vec<f64> = space.iter().map(|x| loss_exp(budget, a, x.site1)).collect();
        let spread = losses.iter().copied().fold(f64::MIN, f64::max) - losses.iter().copied().fold(f64::MAX, f64::min);
        // Keep lambda * spread moderate so the difference quotient is
        // well conditioned; the saturated regime is covered below.
        let lambda = if trial == 0 { 0.0 } else { rng.gen_range(0.0..=10.0) / spread };
        let h = 1e-4 / spread;
        // The oracle softmax is defined for negative lambda, so the
        // difference stays central at lambda = 0.
        let lo = softmax_min(&losses, lambda - h);
        let hi = softmax_min(&losses, lambda + h);
        let fd: Vec<f64> = hi.iter().zip(&lo).map(|(p, q)| (p - q) / (2.0 * h)).collect();
        let d = sigma_lambda_derivative(&game, &space, lambda).unwrap();
        let scale = fd.iter().fold(0f64, |m, x| m.max(x.abs()));
        let err = d.iter().zip(&fd).fold(0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
        ensure(err < 1e-6, || format!("trial {trial}: relative error {err:e} (lambda {lambda})"))?;
        worst = worst.max(err);
    }
    let mut checked = 0;
    for _ in 0..500 {
        let budget = rng.gen_range(1.0..=12.0);
        let a = f64::exp(rng.gen_range(-3.0..=3.0));
        let n = rng.gen_range(1..=8);
        let game = SecurityGame::exponential(budget, a).unwrap();
        let space = random_space(&mut rng, budget, n);
        let losses = space.losses(&game).unwrap();
        let best = (0..n).min_by(|&i, &j| losses[i].total_cmp(&losses[j])).unwrap();
        for lambda in [0.0, rng.gen_range(0.0..=1e3), 1e4, 1e8] {
            let d = sigma_lambda_derivative(&game, &space, lambda).unwrap()[best];
            ensure(d >= 0.0, || format!("argmin derivative {d} at lambda {lambda}"))?;
            checked += 1;
        }
    }
    Ok(format!("50 configs, worst vector rel err {worst:.2e}; argmin entry >= 0 at {checked} points"))
}

/// `r_hat` by bisection on the weighted difference, independent of the library.
fn perceived_optimum(budget: f64, a: f64, alpha: f64) -> f64 {
    let w = |p: f64| (-(-p.ln()).powf(alpha)).exp();
    let d = |r: f64| w((-r).exp()) - a * w((-(budget - r)).exp());
    if d(0.0) <= 0.0 {
        return 0.0;
    }
    if d(budget) >= 0.0 {
        return budget;
    }
    let (mut lo, mut hi) = (0.0, budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_8() -> Check {
    let g1 = SecurityGame::<f64>::exponential(10.0, 1.0).unwrap();
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let hat = qre_defense::behavioral_optimal(&g1, alpha).unwrap().site1;
        ensure((hat - 5.0).abs() < 1e-8, || format!("A = 1, alpha {alpha}: r_hat {hat}"))?;
        ensure(theorem_case(&g1, alpha).unwrap() == TheoremCase::Equal, || "A = 1 not classified equal".into())?;
    }
    let g = SecurityGame::<f64>::exponential(10.0, 0.5).unwrap();
    let hat = qre_defense::behavioral_optimal(&g, 0.5).unwrap().site1;
    let star = g.optimal_allocation().site1;
    ensure((hat - 6.531).abs() <= 1e-3 && hat > star, || format!("A = 0.5: r_hat {hat}, r* {star}"))?;
    let g = SecurityGame::exponential(10.0, 1.5).unwrap();
    let hat15 = qre_defense::behavioral_optimal(&g, 0.5).unwrap().site1;
    let star15 = g.optimal_allocation().site1;
    ensure(hat15 < star15, || format!("A = 1.5: r_hat {hat15}, r* {star15}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 200 {
        let budget: f64 = rng.gen_range(4.0..=12.0);
        let ln_a: f64 = rng.gen_range(-budget + 0.5..=budget - 2.5);
        if ln_a.abs() <= 0.01 {
            continue;
        }
        let a = ln_a.exp();
        let alpha = rng.gen_range(0.05..0.95);
        let star = (budget - ln_a) / 2.0;
        ensure((-star).exp() < (-1f64).exp(), || format!("p1(r*) >= 1/e at R {budget}, ln A {ln_a}"))?;
        let hat = perceived_optimum(budget, a, alpha);
        let predicted_greater = a < 1.0;
        ensure((hat > star) == predicted_greater && hat != star, || {
            format!("R {budget}, A {a}, alpha {alpha}: r_hat {hat}, r* {star}")
        })?;
        let game = SecurityGame::exponential(budget, a).unwrap();
        let lib_hat = qre_defense::behavioral_optimal(&game, alpha).unwrap().site1;
        ensure((lib_hat - hat).abs() < 1e-8, || format!("library r_hat {lib_hat} vs oracle {hat}"))?;
        let case = theorem_case(&game, alpha).unwrap();
        ensure(case.consistent_with(lib_hat, star, 1e-9) == Some(true), || format!("{case:?} inconsistent"))?;
        done += 1;
    }
    Ok(format!("A = 1 equal; r_hat(0.5) = {hat:.4} > r* {star:.4}; r_hat(1.5) = {hat15:.4} < {star15:.4}; 200 random signs ok"))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0f64;
    let mut unit_err = 0f64;
    for trial in 0..1000 {
        let budget = rng.gen_range(1.0..=8.0);
        let a = rng.gen_range(0.1..=10.0);
        let alpha = rng.gen_range(0.01..=1.0);
        let game = SecurityGame::exponential(budget, a).unwrap();
        let value = pobw(&game, alpha).unwrap().value;
        let bound = f64::max(a, 1.0 / a) * budget.exp();
        ensure(value <= bound, || format!("trial {trial}: PoBW {value} > {bound}"))?;
        worst = worst.max(value / bound);
        let unit = pobw(&game, 1.0).unwrap().value;
        unit_err = unit_err.max((unit - 1.0).abs());
    }
    ensure(unit_err <= 1e-9, || format!("alpha = 1: |PoBW - 1| up to {unit_err:e}"))?;
    Ok(format!("1000 trials, 0 violations, max PoBW/bound {worst:.3e}; alpha = 1 err {unit_err:.1e}"))
}

fn criterion_10() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"space": "C", "A": 1.0, "R": 10}"#).unwrap();
    let mut bytes = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let argv = ["qre-defense", "sweep-lambda", "--config", cfg.to_str().unwrap(), "--seed", "11", "--out", out.to_str().unwrap()];
        let code = run_with(argv, &mut std::io::sink());
        ensure(code == 0, || format!("exit code {code}"))?;
        bytes.push(std::fs::read(&out).unwrap());
    }
    ensure(bytes[0] == bytes[1], || "outputs differ".into())?;
    Ok(format!("two runs, {} identical bytes", bytes[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("lambda monotonicity on space C", criterion_1),
        ("case i ordering on space A", criterion_2),
        ("case ii ordering and loss sensitivity on space B", criterion_3),
        ("PoQA bound, 1000 random configurations", criterion_4),
        ("PoQA ordering and rational limit on space C", criterion_5),
        ("bisection against closed-form optimum", criterion_6),
        ("lambda derivative against finite differences", criterion_7),
        ("probability-weighting optimum predictions", criterion_8),
        ("PoBW bound and alpha = 1", criterion_9),
        ("sweep-lambda determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
