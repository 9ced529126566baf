//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hsumma::cost::{hsumma_cost_derivative, vdg_sqrt_p_comm_cost, Sign};
use hsumma::experiment::{cli, simulate_groups, Setup};
use hsumma::grid::{gather_matrix, scatter_matrix};
use hsumma::{
    hsumma_comm_cost, hsumma_cost_derivative_sign, make_grid, make_schedule, measured_vs_model, optimal_groups,
    regime_check, run_hsumma, run_summa, simulate_schedule, summa_comm_cost, BroadcastAlg, ClockState,
    HockneyParams, Matrix, ModelProblem, Regime, SimConfig,
};

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const SCHEDULE_TOL: f64 = 1e-9;
const SQRT_P_FORM_TOL: f64 = 1e-13;
const MODEL_SIM_TOL: f64 = 0.01;
const EXASCALE_TOL: f64 = 0.01;

// Exact rational evaluation of the exascale closed forms.
const EXASCALE_SUMMA_TOTAL: f64 = 17.611336416208356;
const EXASCALE_HSUMMA_MIN: f64 = 2.5112285992483554;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn naive_product(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    Matrix::from_fn(n, n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

fn frobenius_rel(c: &Matrix, reference: &Matrix) -> f64 {
    let (mut diff, mut norm) = (0.0, 0.0);
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            diff += (c[(i, j)] - reference[(i, j)]).powi(2);
            norm += reference[(i, j)].powi(2);
        }
    }
    (diff / norm).sqrt()
}

fn isqrt(v: usize) -> usize {
    (v as f64).sqrt().round() as usize
}

fn divisors(v: usize) -> Vec<usize> {
    (1..=v).filter(|d| v % d == 0).collect()
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let params = HockneyParams::new(1e-6, 1e-9, 1e-12).unwrap();
    let (mut runs, mut worst) = (0usize, 0.0f64);
    for n in [8usize, 16, 64, 256] {
        let a = Matrix::random(n, n, 1000 + n as u64);
        let b = Matrix::random(n, n, 2000 + n as u64);
        let reference = naive_product(&a, &b);
        for p in [1usize, 4, 16, 64] {
            let side = isqrt(p);
            let tile = n / side;
            let grid = make_grid(side, side).unwrap();
            // Sampled block sizes: the smallest, one in between and the largest.
            let tile_divs = divisors(tile);
            let mut blocks = vec![tile_divs[0], tile_divs[tile_divs.len() / 2], tile];
            blocks.dedup();
            for alg in BroadcastAlg::ALL {
                for &bs in &blocks {
                    let outers: Vec<usize> = tile_divs.iter().copied().filter(|d| d % bs == 0).collect();
                    let mut sampled = vec![bs, outers[outers.len() / 2], tile];
                    sampled.dedup();
                    for &outer in &sampled {
                        for g in divisors(side) {
                            let cfg = SimConfig::new(grid, (g, g), n, bs, outer, alg, params).unwrap();
                            let layout = cfg.layout().unwrap();
                            let da = scatter_matrix(&a, layout).unwrap();
                            let db = scatter_matrix(&b, layout).unwrap();
                            let (c, _) = run_hsumma(&da, &db, &cfg).unwrap();
                            let err = frobenius_rel(&gather_matrix(&c), &reference);
                            ensure(err <= ORACLE_TOL, format!("{alg} n={n} p={p} b={bs} B={outer} G={}: {err:e}", g * g))?;
                            worst = worst.max(err);
                            runs += 1;
                        }
                    }
                    let cfg = SimConfig::new(grid, (1, 1), n, bs, bs, alg, params).unwrap();
                    let layout = cfg.layout().unwrap();
                    let (c, _) = run_summa(&scatter_matrix(&a, layout).unwrap(), &scatter_matrix(&b, layout).unwrap(), &cfg).unwrap();
                    let err = frobenius_rel(&gather_matrix(&c), &reference);
                    ensure(err <= ORACLE_TOL, format!("SUMMA {alg} n={n} p={p} b={bs}: {err:e}"))?;
                    worst = worst.max(err);
                    runs += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < ORACLE_BUDGET, format!("took {elapsed:?}, budget {ORACLE_BUDGET:?}"))?;
    Ok(format!("{runs} runs, max relative Frobenius error {worst:.2e} (tol {ORACLE_TOL:e}), {:.1} s", elapsed.as_secs_f64()))
}

fn schedule_formula_agreement() -> Outcome {
    let params = HockneyParams::new(2e-6, 3e-9, 0.0).unwrap();
    let (a, bt) = (params.alpha, params.beta);
    let (mut cases, mut worst) = (0, 0.0f64);
    for q in [2usize, 4, 8, 16, 32] {
        let lg = (q as f64).log2();
        let ranks: Vec<usize> = (0..q).map(|r| 5 * r + 2).collect();
        for m in [0usize, 1, 1_000, 1_000_000] {
            let mf = m as f64;
            let mut forms = vec![(BroadcastAlg::BinomialTree, lg * (a + mf * bt))];
            if m % q == 0 {
                let qf = q as f64;
                forms.push((BroadcastAlg::VanDeGeijn, (lg + qf - 1.0) * a + 2.0 * ((qf - 1.0) / qf) * mf * bt));
            }
            for (alg, want) in forms {
                let sched = make_schedule(alg, ranks[0], &ranks, m).unwrap();
                let clocks = ClockState::from_times(vec![0.0; 5 * q + 2]);
                let got = simulate_schedule(&sched, &params, &clocks).unwrap().makespan();
                let d = rel(got, want);
                ensure(d <= SCHEDULE_TOL, format!("{alg} q={q} m={m}: {got} vs {want}"))?;
                worst = worst.max(d);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases, max relative deviation {worst:.2e} (tol {SCHEDULE_TOL:e})"))
}

fn degeneracy() -> Outcome {
    let params = HockneyParams::new(4e-6, 2e-9, 1e-12).unwrap();
    let mut model_cases = 0;
    for (n, p, b) in [(64u64, 16u64, 4u64), (4096, 1024, 64), (1 << 22, 1 << 20, 256)] {
        let prob = ModelProblem::new(n, p, b).unwrap();
        for alg in BroadcastAlg::ALL {
            let summa = summa_comm_cost(&prob, &params, alg.cost_model());
            for g in [1, p] {
                let h = hsumma_comm_cost(&prob, &params, alg.cost_model(), g).unwrap();
                ensure(
                    h.latency_s == summa.latency_s && h.bandwidth_s == summa.bandwidth_s && h.total_s == summa.total_s,
                    format!("model {alg} n={n} p={p} G={g} differs from SUMMA"),
                )?;
                model_cases += 1;
            }
        }
    }
    let mut sim_cases = 0;
    for (side, n, b, outer) in [(2usize, 16usize, 2usize, 8usize), (4, 32, 2, 4), (4, 64, 4, 16)] {
        for alg in BroadcastAlg::ALL {
            let cfg = SimConfig::new(make_grid(side, side).unwrap(), (1, 1), n, b, outer, alg, params)
                .unwrap()
                .with_seed(9)
                .with_trace(true);
            let (a, bm) = cfg.random_inputs().unwrap();
            let (ch, h) = run_hsumma(&a, &bm, &cfg).unwrap();
            let (cs, s) = run_summa(&a, &bm, &cfg).unwrap();
            ensure(h.same_events_as(&s), format!("simulated {alg} p={} G=1 differs from SUMMA", side * side))?;
            ensure(ch == cs, format!("simulated {alg} p={} G=1 product differs", side * side))?;
            ensure(!h.trace.is_empty() || side == 1, "empty trace")?;
            sim_cases += 1;
        }
    }
    Ok(format!("{model_cases} model cases exact at G=1 and G=p, {sim_cases} simulations event-for-event equal at G=1"))
}

fn exascale() -> (ModelProblem, HockneyParams) {
    (
        ModelProblem::new(1 << 22, 1 << 20, 256).unwrap(),
        HockneyParams::new(5e-7, 1e-11, 1e-18).unwrap(),
    )
}

fn extremum_reproduction() -> Outcome {
    let (prob, params) = exascale();
    ensure(params.alpha / params.beta > 2.0 * prob.n as f64 * prob.b as f64 / prob.p as f64, "alpha/beta inequality")?;
    let regime = regime_check(&prob, &params);
    ensure(regime == Regime::InteriorMinimum, format!("regime {regime}"))?;
    let candidates: Vec<u64> = (0..=10).map(|k| 4u64.pow(k)).collect();
    let (g, _) = optimal_groups(&prob, &params, hsumma::BcastCostModel::VanDeGeijn, &candidates).unwrap();
    ensure(g == 1024, format!("optimal G {g}"))?;
    let below = [1.5, 4.0, 37.0, 512.0, 1000.0];
    let above = [1050.0, 2048.0, 65536.0, 500_000.0, 1_048_000.0];
    for &x in &below {
        ensure(hsumma_cost_derivative_sign(&prob, &params, x) == Sign::Negative, format!("sign at G={x}"))?;
        ensure(hsumma_cost_derivative(&prob, &params, hsumma::BcastCostModel::VanDeGeijn, x) < 0.0, format!("slope at G={x}"))?;
    }
    for &x in &above {
        ensure(hsumma_cost_derivative_sign(&prob, &params, x) == Sign::Positive, format!("sign at G={x}"))?;
        ensure(hsumma_cost_derivative(&prob, &params, hsumma::BcastCostModel::VanDeGeijn, x) > 0.0, format!("slope at G={x}"))?;
    }
    Ok(format!("regime {regime}, G* = {g}, slope negative at {below:?}, positive at {above:?}"))
}

fn sqrt_p_closed_form() -> Outcome {
    let (_, params) = exascale();
    let mut worst = 0.0f64;
    for p in [16u64, 256, 4096, 1 << 20] {
        let (n, b) = (1u64 << 22, 256u64);
        let prob = ModelProblem::new(n, p, b).unwrap();
        let (nf, pf, bf) = (n as f64, p as f64, b as f64);
        let r4 = pf.powf(0.25);
        let table = (pf.log2() + 4.0 * (r4 - 1.0)) * (nf / bf) * params.alpha
            + 8.0 * (1.0 - 1.0 / r4) * (nf * nf / pf.sqrt()) * params.beta;
        let general = hsumma_comm_cost(&prob, &params, hsumma::BcastCostModel::VanDeGeijn, isqrt(p as usize) as u64)
            .unwrap()
            .comm_s();
        let d = rel(general, table).max(rel(vdg_sqrt_p_comm_cost(&prob, &params), table));
        ensure(d <= SQRT_P_FORM_TOL, format!("p={p}: {general} vs {table}"))?;
        worst = worst.max(d);
    }
    Ok(format!("p in {{16, 256, 4096, 2^20}}, max relative deviation {worst:.2e} (tol {SQRT_P_FORM_TOL:e})"))
}

fn sim_setup(p: u64, alg: BroadcastAlg) -> Setup {
    Setup {
        n: 256,
        p,
        b: 8,
        outer_b: 8,
        alg,
        params: HockneyParams::new(1e-4, 1e-9, 0.0).unwrap(),
        seed: 4,
    }
}

fn model_vs_simulation() -> Outcome {
    let mut parts = Vec::new();
    for alg in [BroadcastAlg::BinomialTree, BroadcastAlg::VanDeGeijn] {
        let mut worst = 0.0f64;
        for p in [16u64, 64, 256] {
            let setup = sim_setup(p, alg);
            let prob = setup.problem().unwrap();
            let side = isqrt(p as usize);
            for g in divisors(side) {
                let groups = (g * g) as u64;
                let m = simulate_groups(&setup, groups).unwrap();
                let model = hsumma_comm_cost(&prob, &setup.params, alg.cost_model(), groups).unwrap();
                let dev = measured_vs_model(&m, &model).unwrap().comm_deviation();
                ensure(dev <= MODEL_SIM_TOL, format!("{alg} p={p} G={groups}: deviation {dev}"))?;
                worst = worst.max(dev);
            }
        }
        parts.push(format!("{alg} max deviation {worst:.2e}"));
    }

    let setup = sim_setup(256, BroadcastAlg::VanDeGeijn);
    let regime = regime_check(&setup.problem().unwrap(), &setup.params);
    ensure(regime == Regime::InteriorMinimum, format!("regime {regime}"))?;
    let curve: Vec<(u64, f64)> = [1u64, 4, 16, 64, 256]
        .iter()
        .map(|&g| (g, simulate_groups(&setup, g).unwrap().comm_time_s))
        .collect();
    let min = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let at16 = curve.iter().find(|c| c.0 == 16).unwrap().1;
    ensure(at16 == min, format!("simulated curve {curve:?}"))?;
    parts.push("p=256 n=256 simulated minimum at G=16".into());

    let mut flat = 0.0f64;
    for p in [16u64, 64, 256] {
        let setup = sim_setup(p, BroadcastAlg::Flat);
        let prob = setup.problem().unwrap();
        for g in [1u64, p] {
            let m = simulate_groups(&setup, g).unwrap();
            let model = hsumma_comm_cost(&prob, &setup.params, BroadcastAlg::Flat.cost_model(), g).unwrap();
            flat = flat.max(measured_vs_model(&m, &model).unwrap().comm_deviation());
        }
    }
    println!("INFO model_vs_simulation: flat broadcast is not covered by the analysed closed forms; it deviates up to {flat:.3} from (q-1)(alpha+m*beta)");
    Ok(parts.join("; "))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("hsumma").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn exascale_figure() -> Outcome {
    let (code, csv) = run_cli(&["predict-exascale"]);
    ensure(code == 0, format!("exit {code}"))?;
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (gi, hi, si) = (col("NB_groups"), col("time_mean"), col("summa_time_mean"));
    let rows: Vec<(u64, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[gi].parse().unwrap(), f[hi].parse().unwrap(), f[si].parse().unwrap())
        })
        .collect();
    let p = 1u64 << 20;
    ensure(rows.len() == 21 && rows[0].0 == 1 && rows[20].0 == p, "G grid is 1, 2, ..., 2^20")?;
    let summa = rows[0].2;
    ensure(rows.iter().all(|r| r.2 == summa), "SUMMA value not constant")?;
    ensure(rel(summa, EXASCALE_SUMMA_TOTAL) <= EXASCALE_TOL, format!("SUMMA {summa}"))?;
    ensure(rel(summa, 17.6) <= EXASCALE_TOL, format!("SUMMA {summa} vs 17.6"))?;
    let (gmin, hmin, _) = *rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    ensure(gmin == 1024, format!("HSUMMA minimum at G={gmin}"))?;
    ensure(rel(hmin, EXASCALE_HSUMMA_MIN) <= EXASCALE_TOL, format!("HSUMMA minimum {hmin}"))?;
    for w in rows.windows(2) {
        let (g, h) = (w[1].0, w[1].1);
        if g <= 1024 {
            ensure(h < w[0].1, format!("not decreasing at G={g}"))?;
        } else {
            ensure(h > w[0].1, format!("not increasing at G={g}"))?;
        }
    }
    for &(g, h, s) in &rows {
        if g == 1 || g == p {
            ensure(rel(h, s) <= 1e-12, format!("G={g} should equal SUMMA"))?;
        } else {
            ensure(h < s, format!("HSUMMA not below SUMMA at G={g}"))?;
        }
    }
    Ok(format!(
        "SUMMA {summa:.4} s constant; HSUMMA U-shaped, minimum {hmin:.4} s at G={gmin} (oracle {EXASCALE_HSUMMA_MIN:.4}, tol 1%); below SUMMA except G=1 and G=p"
    ))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 5] = [
        &["validate"],
        &["sweep-groups", "--n", "256", "--p", "64", "--b", "8", "--alpha", "1e-4", "--beta", "1e-9", "--mode", "both", "--seed", "3"],
        &["sweep-procs", "--preset", "exascale", "--rule", "best"],
        &["sweep-procs", "--n", "128", "--b", "4", "--alpha", "1e-5", "--beta", "1e-9", "--mode", "simulate", "--procs", "4,16,64"],
        &["simulate", "--n", "64", "--grid", "4x4", "--groups", "2x2", "--b", "4", "--B", "8", "--alpha", "1e-4", "--beta", "1e-9", "--seed", "11"],
    ];
    for args in commands {
        let (c1, first) = run_cli(args);
        let (c2, second) = run_cli(args);
        ensure(c1 == 0 && c2 == 0, format!("{args:?} exit {c1}/{c2}"))?;
        ensure(!first.is_empty() && first == second, format!("{args:?} output differs between runs"))?;
    }
    Ok(format!("{} commands byte-identical across two runs (validate included)", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle_equivalence", oracle_equivalence),
        ("schedule_formula_agreement", schedule_formula_agreement),
        ("degeneracy", degeneracy),
        ("extremum_reproduction", extremum_reproduction),
        ("sqrt_p_closed_form", sqrt_p_closed_form),
        ("model_vs_simulation", model_vs_simulation),
        ("exascale_figure", exascale_figure),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
