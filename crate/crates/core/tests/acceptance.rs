//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use offload_bargain::bargaining::{self, bargain, virtual_marginal_welfare, NbsConfig};
use offload_bargain::optimizer::{socially_optimal, OptimizerConfig};
use offload_bargain::oracle::{backward_induction_nbs, grid_nbs};
use offload_bargain::scenario::{generate, GeneratorSpec};
use offload_bargain::stackelberg::{apo_best_response, apo_payoff, compare_nbs_ne, mno_optimal_prices, Binding};
use offload_bargain::welfare::{SymmetricTableWelfare, WelfareFn};
use offload_bargain::{CostModel, GroupingStructure, MnoParams, Protocol, Scenario};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn one_to_one_split() -> Outcome {
    let mut r = rng(1);
    let mut worst_half = 0.0f64;
    let mut worst_grid = 0.0f64;
    let mut positive = 0;
    for case in 0..100 {
        let s = single_apo_scenario(&mut r);
        let out = bargaining::one_to_one_nbs(&s, &NbsConfig::default()).map_err(|e| e.to_string())?;
        let half = (out.pi[0] - out.welfare / 2.0).abs();
        worst_half = worst_half.max(half);
        check(half <= 1e-9, || format!("case {case}: pi {} vs half of {}", out.pi[0], out.welfare))?;
        if out.welfare > 0.0 {
            positive += 1;
        }
        let g = grid_nbs(&s, 1000).map_err(|e| e.to_string())?;
        let gap = (g.pi - out.pi[0]).abs();
        worst_grid = worst_grid.max(gap / g.pi_cell.max(f64::MIN_POSITIVE));
        check(gap <= g.pi_cell + 1e-12, || {
            format!("case {case}: grid {} vs {} (cell {})", g.pi, out.pi[0], g.pi_cell)
        })?;
    }
    Ok(format!(
        "{positive} with positive welfare, max |pi - Psi/2| = {worst_half:.1e}, grid gap <= {worst_grid:.2} cells"
    ))
}

fn golden_values() -> Outcome {
    let cfg = NbsConfig::default();
    let table = SymmetricTableWelfare::new(4, vec![0.0, 1.0, 1.8, 2.4, 2.8]);
    let real = golden_scenario();
    let x_real = socially_optimal(&real, &cfg.optimizer).map_err(|e| e.to_string())?;
    check(close(&x_real, &[1.0; 4], 1e-12), || format!("optimum {x_real:?}"))?;
    let singles = GroupingStructure::singletons(4);
    for (name, w, x) in
        [("table", &table as &dyn WelfareFn, vec![1.0; 4]), ("scenario", &real as &dyn WelfareFn, x_real)]
    {
        let seq = bargaining::divide(w, &x, &singles, Protocol::Sequential, &cfg).map_err(|e| e.to_string())?;
        check(close(&seq.pi, &[0.35, 0.30, 0.25, 0.20], 1e-12), || format!("{name} sequential {:?}", seq.pi))?;
        check((seq.mno_payoff - 1.7).abs() <= 1e-12, || format!("{name} sequential U {}", seq.mno_payoff))?;
        let con = bargaining::divide(w, &x, &singles, Protocol::Concurrent, &cfg).map_err(|e| e.to_string())?;
        check(close(&con.pi, &[0.2; 4], 1e-12), || format!("{name} concurrent {:?}", con.pi))?;
        check((con.mno_payoff - 2.0).abs() <= 1e-12, || format!("{name} concurrent U {}", con.mno_payoff))?;
    }
    Ok("sequential (0.35, 0.30, 0.25, 0.20) U 1.7; concurrent 0.2 each U 2.0".into())
}

fn full_group_half() -> Outcome {
    let mut r = rng(3);
    let mut scenarios: Vec<Scenario> = (0..30)
        .map(|_| {
            let n = r.random_range(1..=8);
            random_scenario(&mut r, n)
        })
        .collect();
    scenarios.push(golden_scenario());
    scenarios.push(generate(&GeneratorSpec { seed: 3, ..GeneratorSpec::default() }).map_err(|e| e.to_string())?);
    let mut worst = 0.0f64;
    for (k, s) in scenarios.iter().enumerate() {
        for protocol in [Protocol::Sequential, Protocol::Concurrent] {
            let out = bargain(s, &GroupingStructure::single_block(s.n()), protocol, &NbsConfig::default())
                .map_err(|e| e.to_string())?;
            let gap = (out.mno_payoff - out.welfare / 2.0).abs();
            worst = worst.max(gap);
            check(gap <= 1e-9, || format!("scenario {k} {protocol}: {} vs {}", out.mno_payoff, out.welfare / 2.0))?;
        }
    }
    Ok(format!("{} scenarios, max gap {worst:.1e}", scenarios.len()))
}

fn properties_suite() -> Outcome {
    let mut r = rng(2024);
    for case in 0..50 {
        let n = r.random_range(1..=8);
        let s = random_scenario(&mut r, n);
        check_properties(&s, &mut r).map_err(|e| format!("case {case} (N = {n}): {e}"))?;
    }
    Ok("50 scenarios, N <= 8, exact enumeration".into())
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(5);
    let cfg = NbsConfig::default();
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for case in 0..10 {
            let s = random_scenario(&mut r, n);
            let x = socially_optimal(&s, &cfg.optimizer).map_err(|e| e.to_string())?;
            let mut order: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(&mut order[..], &mut r);
            let g = GroupingStructure::from_order(&order, n).unwrap();
            let seq = bargaining::divide(&s, &x, &g, Protocol::Sequential, &cfg).map_err(|e| e.to_string())?;
            let b = backward_induction_nbs(&s, &x, &order, 20_000).map_err(|e| e.to_string())?;
            let tol = n as f64 * b.step;
            for i in 0..n {
                let gap = (b.pi[i] - seq.pi[i]).abs();
                worst = worst.max(gap / b.step);
                check(gap <= tol + 1e-12, || {
                    format!("N = {n} case {case} APO {i}: oracle {} vs {}", b.pi[i], seq.pi[i])
                })?;
            }
            check((b.mno_payoff - seq.mno_payoff).abs() <= tol + 1e-12, || {
                format!("N = {n} case {case}: operator payoff")
            })?;
        }
    }
    Ok(format!("30 scenarios, max gap {worst:.2} grid steps"))
}

fn stackelberg_checks() -> Outcome {
    let mut r = rng(6);
    let mut worst_br = 0.0f64;
    for case in 0..20 {
        let a = random_apo(&mut r, true, false);
        let p = r.random_range(0.0..a.w_n);
        let br = apo_best_response(&a, p);
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for k in 0..=1_000_000 {
            let x = a.b_n * k as f64 / 1e6;
            let v = apo_payoff(&a, p, x);
            if v > best {
                best = v;
                arg = x;
            }
        }
        worst_br = worst_br.max((arg - br).abs());
        check((arg - br).abs() <= 1e-4, || format!("APO {case} at p = {p}: formula {br} vs grid {arg}"))?;
    }
    let mut worst_foc = 0.0f64;
    let mut worst_mp = 0.0f64;
    for case in 0..20 {
        let n = r.random_range(2..=6);
        let apos = (0..n).map(|_| random_apo(&mut r, true, false)).collect();
        let mno = MnoParams {
            s0: r.random_range(0.0..5.0),
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(random_coupled_shape(&mut r)),
        };
        let s = Scenario::new(mno, apos).unwrap();
        let out = mno_optimal_prices(&s, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
        worst_foc = worst_foc.max(out.foc_residual);
        check(out.foc_residual <= 1e-6, || format!("scenario {case}: residual {}", out.foc_residual))?;
        let interior: Vec<f64> =
            (0..n).filter(|&i| out.binding[i] == Binding::Interior).map(|i| out.marginal_payments[i]).collect();
        if let Some(&first) = interior.first() {
            for &mp in &interior {
                let rel = (mp - first).abs() / first.abs().max(1.0);
                worst_mp = worst_mp.max(rel);
                check(rel <= 1e-6, || format!("scenario {case}: marginal payments {interior:?}"))?;
            }
        }
    }
    Ok(format!("best response within {worst_br:.1e}, residual {worst_foc:.1e}, payment spread {worst_mp:.1e}"))
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

fn equilibrium_gap() -> Outcome {
    let cfg = OptimizerConfig::default();
    let mut mean_diff = 0.0;
    for seed in 0..20 {
        let s = generate(&GeneratorSpec { seed, ..GeneratorSpec::default() }).map_err(|e| e.to_string())?;
        let rep = compare_nbs_ne(&s, &cfg).map_err(|e| e.to_string())?;
        mean_diff += rep.weighted_difference / 20.0;
        check(rep.weighted_difference >= 0.0, || format!("seed {seed}: difference {}", rep.weighted_difference))?;
        check(rep.welfare_ne <= rep.welfare_nbs + 1e-9, || {
            format!("seed {seed}: {} > {}", rep.welfare_ne, rep.welfare_nbs)
        })?;
        // sweep the APO that offloads most at the optimum
        let i = (0..s.n()).max_by(|&a, &b| rep.x_nbs[a].total_cmp(&rep.x_nbs[b])).unwrap();
        for param in ["theta", "c"] {
            let values: Vec<f64> = match param {
                "theta" => (0..=14).map(|k| 0.5 + 0.25 * k as f64).collect(),
                _ => (0..=16).map(|k| 0.2 + (s.apos[i].w_n - 0.25) * k as f64 / 16.0).collect(),
            };
            let (mut xo, mut xe) = (Vec::new(), Vec::new());
            for v in values {
                let mut t = s.clone();
                if param == "theta" {
                    t.apos[i].theta_n = v;
                } else {
                    t.apos[i].c_n = v;
                }
                let r = compare_nbs_ne(&t, &cfg).map_err(|e| e.to_string())?;
                xo.push(r.x_nbs[i]);
                xe.push(r.x_ne[i]);
            }
            check(nonincreasing(&xo), || format!("seed {seed}: optimum not monotone in {param}: {xo:?}"))?;
            check(nonincreasing(&xe), || format!("seed {seed}: equilibrium not monotone in {param}: {xe:?}"))?;
        }
    }
    Ok(format!("20 scenarios, mean weighted difference {:.1}%", 100.0 * mean_diff))
}

fn monte_carlo_fidelity() -> Outcome {
    let mut r = rng(8);
    let s = random_scenario(&mut r, 13);
    let x = socially_optimal(&s, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    check(x.iter().filter(|&&v| v > 0.0).count() >= 6, || format!("too few offloading APOs: {x:?}"))?;
    let g = GroupingStructure::singletons(13);
    let exact = virtual_marginal_welfare(&s, &x, &g, 0, &NbsConfig::default()).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for seed in 0..100 {
        let cfg = NbsConfig { exact_cutoff: 11, mc_samples: 100_000, seed, ..NbsConfig::default() };
        let est = virtual_marginal_welfare(&s, &x, &g, 0, &cfg).map_err(|e| e.to_string())?;
        let se = est.stderr.ok_or("sampling path not taken")?;
        if (est.mean - exact.mean).abs() <= 4.0 * se {
            hits += 1;
        }
    }
    check(hits >= 99, || format!("only {hits}/100 seeds within 4 standard errors"))?;
    Ok(format!("{hits}/100 seeds within 4 standard errors"))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status =
        Command::new(env!("CARGO_BIN_EXE_offload")).args(args).current_dir(dir).status().map_err(|e| e.to_string())?;
    check(status.success(), || format!("`offload {}` exited with {status}", args.join(" ")))
}

fn cli_determinism() -> Outcome {
    let runs: Vec<Vec<&[&str]>> = vec![
        vec![&["gen", "--seed", "11", "--apos", "24", "--out", "s.json"]],
        vec![&[
            "bargain",
            "--scenario",
            "s.json",
            "--protocol",
            "sequential",
            "--seed",
            "4",
            "--workers",
            "1",
            "--out",
            "seq.json",
            "--csv",
            "seq.csv",
        ]],
        vec![&["gen", "--seed", "12", "--apos", "6", "--out", "small.json"]],
        vec![&[
            "bargain",
            "--scenario",
            "small.json",
            "--protocol",
            "concurrent",
            "--groups",
            "[1,2],[3],[4,5,6]",
            "--out",
            "con.json",
            "--csv",
            "con.csv",
        ]],
        vec![&[
            "bargain",
            "--scenario",
            "small.json",
            "--protocol",
            "sequential",
            "--order",
            "3,1,2,6,5,4",
            "--out",
            "ord.json",
        ]],
        vec![&["stackelberg", "--scenario", "s.json", "--out", "st.json", "--csv", "st.csv"]],
        vec![&["compare", "--scenario", "s.json", "--out", "cmp.json", "--csv", "cmp.csv"]],
        vec![&[
            "compare",
            "--scenario",
            "s.json",
            "--sweep",
            "c",
            "--apo",
            "2",
            "--range",
            "0.2:1.6:0.2",
            "--workers",
            "1",
            "--out",
            "sw.json",
            "--csv",
            "sw.csv",
        ]],
    ];
    let files = [
        "s.json",
        "small.json",
        "ord.json",
        "seq.json",
        "seq.csv",
        "con.json",
        "con.csv",
        "st.json",
        "st.csv",
        "cmp.json",
        "cmp.csv",
        "sw.json",
        "sw.csv",
    ];
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        for cmd in runs.iter().flatten() {
            run_cli(dir.path(), cmd)?;
        }
        let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default()).collect();
        outputs.push(bytes);
    }
    for (k, f) in files.iter().enumerate() {
        check(!outputs[0][k].is_empty(), || format!("{f} missing"))?;
        check(outputs[0][k] == outputs[1][k], || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} commands, {} files byte-identical", runs.len(), files.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("one-to-one split", one_to_one_split),
        ("golden four-APO values", golden_values),
        ("whole group leaves the operator half", full_group_half),
        ("bargaining properties", properties_suite),
        ("backward induction oracle", oracle_equivalence),
        ("pricing equilibrium", stackelberg_checks),
        ("equilibrium versus optimum", equilibrium_gap),
        ("Monte Carlo fidelity", monte_carlo_fidelity),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} ({secs:.2} s)", k + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {e} ({secs:.2} s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
