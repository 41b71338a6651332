//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any failure.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{rel_diff, Diagonal};
use heurstop::diagnostics::{
    muckenhoupt_constant, regularity_constant, tcc_ratio, Constant, FilterSpec, SingularSystem,
};
use heurstop::experiment::{emit_csv, median, run_experiment, ExperimentConfig, ExperimentReport, ReportRow};
use heurstop::landweber::run_store_all;
use heurstop::noise::add_noise;
use heurstop::par::Execution;
use heurstop::problems::{autoconv_apply, diffusion_solve, hammerstein_apply, PROBLEM_NAMES};
use heurstop::rules::{discrepancy_stop, select_kstar, PsiSeries};
use heurstop::{
    auto_stepsize, operator_gates, problem_by_name, run_paired, Grid, GridFunction, IterationConfig,
    NonlinearProblem, PairedTrace, Rule, Space, Termination,
};

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, cond: bool, note: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(note.into());
        }
    }

    fn info(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn within(&mut self, elapsed: Duration, limit_s: f64) {
        let s = elapsed.as_secs_f64();
        self.require(s < limit_s, format!("runtime {s:.1}s over {limit_s}s"));
    }
}

fn sweep(problem: &str) -> ExperimentReport {
    let cfg = ExperimentConfig::for_problem(problem).unwrap();
    let rep = run_experiment(&cfg).unwrap();
    assert!(rep.failures.is_empty(), "{problem}: {:?}", rep.failures);
    rep
}

fn rows(rep: &ExperimentReport, rule: Rule) -> Vec<&ReportRow> {
    rep.rows.iter().filter(|r| r.rule == rule).collect()
}

fn median_ratio(rep: &ExperimentReport, rule: Rule) -> f64 {
    let v: Vec<f64> = rows(rep, rule).iter().filter_map(|r| r.error_ratio).collect();
    median(&v).unwrap_or(f64::INFINITY)
}

fn interior(r: &ReportRow) -> bool {
    r.attained() && !r.boundary_hit
}

fn distinct_deltas(rep: &ExperimentReport) -> Vec<f64> {
    let mut d: Vec<f64> = Vec::new();
    for r in &rep.rows {
        if !d.contains(&r.delta_rel) {
            d.push(r.delta_rel);
        }
    }
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

fn c1_gates() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    for name in PROBLEM_NAMES {
        let p = problem_by_name(name, None).unwrap();
        let g = operator_gates(p.as_ref(), 5, 0).unwrap();
        let adj = g.points.iter().map(|q| q.adjoint_mismatch).fold(0.0, f64::max);
        let fd = g.points.iter().map(|q| q.fd_rel_err).fold(0.0, f64::max);
        c.require(g.points.len() == 7, format!("{name}: {} points", g.points.len()));
        c.require(adj <= 1e-10, format!("{name}: adjoint {adj:.1e}"));
        c.require(fd <= p.fd_tolerance(), format!("{name}: fd {fd:.1e} > {:.0e}", p.fd_tolerance()));
        c.info(format!("{name} adj {adj:.1e} fd {fd:.1e}"));
    }
    c.within(t.elapsed(), 10.0);
    c
}

fn c2_analytic() -> Check {
    let mut c = Check::new();
    let t = Instant::now();

    let g = Grid::nodal(50).unwrap();
    let one = GridFunction::constant(g, Space::H1, 1.0).unwrap();
    let u = diffusion_solve(&one, &GridFunction::constant(g, Space::L2, 2.0).unwrap()).unwrap();
    let quad = g.points().iter().zip(u.values()).map(|(s, v)| (v - s * (1.0 - s)).abs()).fold(0.0, f64::max);
    c.require(quad < 1e-14, format!("quadratic {quad:.1e}"));

    let errs: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|&n| {
            let g = Grid::nodal(n).unwrap();
            let a = GridFunction::constant(g, Space::H1, 1.0).unwrap();
            let f = GridFunction::from_fn(g, Space::L2, |s| PI * PI * (PI * s).sin()).unwrap();
            let u = diffusion_solve(&a, &f).unwrap();
            g.points().iter().zip(u.values()).map(|(s, v)| (v - (PI * s).sin()).abs()).fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        c.require((order - 2.0).abs() <= 0.2, format!("order {order:.3}"));
        c.info(format!("order {order:.3}"));
    }

    let g = Grid::periodic(60).unwrap();
    let x = GridFunction::from_fn(g, Space::L2, |s| (2.0 * PI * s).cos()).unwrap();
    let y = autoconv_apply(&x).unwrap();
    let ac = g.points().iter().zip(y.values()).map(|(s, v)| (v - 0.5 * (2.0 * PI * s).cos()).abs()).fold(0.0, f64::max);
    c.require(ac < 1e-12, format!("autoconv {ac:.1e}"));

    let g = Grid::nodal(128).unwrap();
    let y = hammerstein_apply(&GridFunction::constant(g, Space::H1, 2.0).unwrap()).unwrap();
    let hm = g.points().iter().zip(y.values()).map(|(s, v)| (v - 8.0 * s).abs()).fold(0.0, f64::max);
    c.require(hm < 1e-13, format!("hammerstein {hm:.1e}"));
    c.within(t.elapsed(), 5.0);
    c
}

fn worst_pair_mismatch(p: &dyn NonlinearProblem, tr: &PairedTrace, xs: &[GridFunction], y: &GridFunction) -> f64 {
    let b = p.benchmark();
    let (xn, yn) = (p.domain(), p.range());
    let mut worst: f64 = 0.0;
    for k in 0..=tr.defined_up_to() {
        let rk = y.sub(&p.apply(&xs[k]).unwrap());
        let r2k = y.sub(&p.apply(&xs[2 * k]).unwrap());
        let d = xs[2 * k].sub(&xs[k]);
        let pairs = [
            (tr.residual_norm[k], yn.norm(&rk).unwrap()),
            (tr.error.as_ref().unwrap()[k], xn.norm(&xs[k].sub(&b.x_dagger)).unwrap()),
            (tr.dist_to_x0[k], xn.norm(&xs[k].sub(&b.x0)).unwrap()),
            (tr.qo[k], xn.norm(&d).unwrap()),
            (tr.ls[k], xn.inner(&xs[k], &d).unwrap()),
            (tr.hr_pair[k], yn.inner(&r2k, &rk).unwrap()),
        ];
        for (a, e) in pairs {
            if a != e {
                worst = worst.max(rel_diff(a, e));
            }
        }
    }
    worst
}

fn c3_tortoise_hare() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let kmax = 50;
    for name in PROBLEM_NAMES {
        let p = problem_by_name(name, None).unwrap();
        let b = p.benchmark();
        let (y, _) = add_noise(&p.exact_data().unwrap(), b.delta_rel_list[0], 0).unwrap();
        let omega = auto_stepsize(p.as_ref(), &b.x_dagger, 1.0).unwrap();
        let cfg = IterationConfig::benchmark(p.as_ref(), omega, kmax).unwrap();
        let tr = run_paired(p.as_ref(), &y, &b.x0, &cfg, Some(&b.x_dagger)).unwrap();
        c.require(tr.defined_up_to() == kmax, format!("{name}: trace ends at {}", tr.defined_up_to()));
        let xs = run_store_all(p.as_ref(), &y, &b.x0, omega, 2 * kmax).unwrap();
        let worst = worst_pair_mismatch(p.as_ref(), &tr, &xs, &y);
        c.require(worst <= 1e-12, format!("{name}: {worst:.1e}"));
        c.info(format!("{name} {worst:.1e}"));
    }
    c.within(t.elapsed(), 30.0);
    c
}

fn c4_rules(benchmarks: &[&ExperimentReport]) -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..300);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lo = rng.random_range(1..=n);
        let hi = rng.random_range(lo..=n);
        let got = select_kstar(&PsiSeries::new(Rule::Qo, v.clone()).unwrap(), lo, hi).unwrap().k_star;
        let best = (lo..=hi).fold(lo, |b, k| if v[k - 1] < v[b - 1] { k } else { b });
        mismatches += usize::from(got != Some(best));
    }
    c.require(mismatches == 0, format!("select_kstar: {mismatches}/1000 mismatches"));

    let mut dp_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..200);
        let res: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let delta = rng.random_range(0.0..1.0);
        let tau = rng.random_range(1.0..2.0);
        let tr = PairedTrace {
            residual_norm: res.clone(),
            error: None,
            dist_to_x0: vec![0.0; n],
            qo: vec![0.0; n],
            ls: vec![0.0; n],
            hr_pair: vec![0.0; n],
            termination: Termination::Completed,
            kmax: n - 1,
            steps: 0,
            forward_evals: 0,
        };
        let got = discrepancy_stop(&tr, delta, tau).unwrap().k_star;
        let mut want = None;
        for (k, &r) in res.iter().enumerate() {
            if r <= tau * delta {
                want = Some(k);
                break;
            }
        }
        dp_bad += usize::from(got != want);
    }
    c.require(dp_bad == 0, format!("discrepancy: {dp_bad}/1000 mismatches"));

    let mut runs = 0;
    for rep in benchmarks {
        for r in &rep.rows {
            let opt = rep
                .rows
                .iter()
                .find(|o| o.rule == Rule::Opt && o.delta_rel == r.delta_rel && o.seed == r.seed)
                .and_then(|o| o.abs_error)
                .unwrap();
            if let Some(e) = r.abs_error {
                runs += 1;
                c.require(opt <= e, format!("{} {} δ={} seed {}: opt {opt} > {e}", r.problem, r.rule, r.delta_rel, r.seed));
            }
        }
    }
    c.info(format!("oracle checked on {runs} rows"));
    c
}

fn c5_hammerstein(rep: &ExperimentReport, elapsed: Duration) -> Check {
    let mut c = Check::new();
    let deltas = distinct_deltas(rep);
    c.require(deltas.len() == 8, format!("{} δ levels", deltas.len()));
    for rule in [Rule::Qo, Rule::Ls] {
        for r in rows(rep, rule) {
            c.require(interior(r), format!("{rule} δ={} seed {}: k*={:?} boundary={}", r.delta_rel, r.seed, r.k_star, r.boundary_hit));
        }
        let m = median_ratio(rep, rule);
        c.require(m <= 3.0, format!("{rule} median error_ratio {m:.3}"));
        c.info(format!("{rule} median {m:.3}"));
    }
    let small = &deltas[deltas.len() - 2..];
    let largest = deltas[0];
    for rule in [Rule::Hd, Rule::Hr] {
        for r in rows(rep, rule) {
            if small.contains(&r.delta_rel) {
                c.require(interior(r), format!("{rule} δ={} seed {}: no interior minimum", r.delta_rel, r.seed));
            }
            if r.delta_rel == largest {
                c.require(r.boundary_hit, format!("{rule} δ={} seed {}: interior k*={:?}", r.delta_rel, r.seed, r.k_star));
            }
        }
    }
    c.within(elapsed, 600.0);
    c
}

/// Consecutive increases of `abs_error` along decreasing δ, per seed.
fn dp_inversions(rep: &ExperimentReport) -> usize {
    let deltas = distinct_deltas(rep);
    let mut seeds: Vec<u64> = rep.rows.iter().map(|r| r.seed).collect();
    seeds.dedup();
    seeds.sort_unstable();
    seeds.dedup();
    let mut count = 0;
    for s in seeds {
        let errs: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                rep.rows
                    .iter()
                    .find(|r| r.rule == Rule::Dp && r.seed == s && r.delta_rel == d)
                    .and_then(|r| r.abs_error)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        count += errs.windows(2).filter(|w| w[1] > w[0]).count();
    }
    count
}

fn c6_diffusion(rep: &ExperimentReport, elapsed: Duration) -> Check {
    let mut c = Check::new();
    for r in rows(rep, Rule::Dp) {
        c.require(r.attained(), format!("dp δ={} seed {} not attained", r.delta_rel, r.seed));
    }
    let inv = dp_inversions(rep);
    c.require(inv <= 1, format!("dp abs_error inversions {inv}"));
    c.info(format!("dp inversions {inv}"));
    for rule in [Rule::Qo, Rule::Ls] {
        let m = median_ratio(rep, rule);
        c.require(m <= 2.0, format!("{rule} median error_ratio {m:.3}"));
        c.info(format!("{rule} median {m:.3}"));
    }
    c.within(elapsed, 900.0);
    c
}

fn c7_autoconv(rep: &ExperimentReport, elapsed: Duration) -> Check {
    let mut c = Check::new();
    for r in rows(rep, Rule::Hd) {
        c.require(interior(r), format!("hd δ={} seed {}: k*={:?} boundary={}", r.delta_rel, r.seed, r.k_star, r.boundary_hit));
    }
    let m = median_ratio(rep, Rule::Hd);
    c.require(m <= 2.0, format!("hd median error_ratio {m:.3}"));
    c.info(format!("hd median {m:.3}"));
    for rule in [Rule::Qo, Rule::Ls] {
        let hits = rows(rep, rule).iter().filter(|r| r.boundary_hit).count();
        let total = rows(rep, rule).len();
        c.require(hits == total, format!("{rule} boundary_hit {hits}/{total}"));
    }
    c.within(elapsed, 600.0);
    c
}

fn c8_diagnostics() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let n = 200;
    let sigma: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let ss = SingularSystem::new(sigma.clone(), e.clone(), x.clone(), None).unwrap();

    for p in [1u32, 2] {
        let grid = ss.muckenhoupt_grid();
        let got = muckenhoupt_constant(&ss, p, &grid).unwrap().constant.value();
        let mut want = f64::NEG_INFINITY;
        for &t in &grid {
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for i in 0..n {
                let s2 = sigma[i] * sigma[i];
                if s2 >= t {
                    lhs += t / s2 * e[i] * e[i];
                } else {
                    rhs += (s2 / t).powi(p as i32 - 1) * e[i] * e[i];
                }
            }
            want = want.max(lhs / rhs);
        }
        c.require(rel_diff(got, want) <= 1e-12, format!("muckenhoupt p={p}: {got} vs {want}"));

        let grid = ss.regularity_grid();
        let got = regularity_constant(&ss, p, FilterSpec::Tikhonov, &grid).unwrap().constant.value();
        let mut want = f64::NEG_INFINITY;
        for &t in &grid {
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..n {
                let s2 = sigma[i] * sigma[i];
                if s2 <= t {
                    num += x[i] * x[i];
                } else {
                    den += (s2 / t).powi(p as i32 - 1) * (t / (t + s2)).powi(2) * x[i] * x[i];
                }
            }
            want = want.max(num / den);
        }
        c.require(rel_diff(got, want) <= 1e-12, format!("regularity p={p}: {got} vs {want}"));
    }

    // error living only on the leading singular directions
    let smooth: Vec<f64> = (0..n).map(|i| if i < 20 { 1.0 } else { 0.0 }).collect();
    let ss = SingularSystem::new(sigma, smooth, x, None).unwrap();
    let m = muckenhoupt_constant(&ss, 1, &ss.muckenhoupt_grid()).unwrap().constant;
    c.require(m == Constant::Infinite, format!("smooth error gave {m}"));

    let lin = Diagonal::new((1..=32).map(|i| 1.0 / i as f64).collect());
    let eta = tcc_ratio(&lin, &lin.benchmark().x_dagger, 0.1, 200, 0, Execution::Parallel).unwrap().eta_max;
    c.require(eta < 1e-12, format!("linear eta {eta:.1e}"));

    let p = problem_by_name("hammerstein", None).unwrap();
    let eta = tcc_ratio(p.as_ref(), &p.benchmark().x_dagger, 0.1, 200, 0, Execution::Parallel).unwrap().eta_max;
    c.require(eta < 0.5, format!("hammerstein eta {eta:.3}"));
    c.info(format!("hammerstein eta_max {eta:.4}"));
    c.within(t.elapsed(), 60.0);
    c
}

fn c9_determinism(first: &ExperimentReport) -> Check {
    let mut c = Check::new();
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let a = dir.join("hammerstein_a.csv");
    let b = dir.join("hammerstein_b.csv");
    emit_csv(first, &a).unwrap();
    emit_csv(&sweep("hammerstein"), &b).unwrap();
    let same = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    c.require(same, "CSV bytes differ");
    c
}

fn main() -> ExitCode {
    let mut results: Vec<(u8, &str, Check)> = Vec::new();
    results.push((1, "operator gates", c1_gates()));
    results.push((2, "analytic oracles", c2_analytic()));
    results.push((3, "tortoise-hare equivalence", c3_tortoise_hare()));

    let t = Instant::now();
    let ham = sweep("hammerstein");
    let t_ham = t.elapsed();
    let t = Instant::now();
    let dif = sweep("diffusion1d");
    let t_dif = t.elapsed();
    let t = Instant::now();
    let ac = sweep("autoconv");
    let t_ac = t.elapsed();

    results.push((4, "rule correctness", c4_rules(&[&ham, &dif, &ac])));
    results.push((5, "hammerstein sweep", c5_hammerstein(&ham, t_ham)));
    results.push((6, "diffusion sweep", c6_diffusion(&dif, t_dif)));
    results.push((7, "auto-convolution sweep", c7_autoconv(&ac, t_ac)));
    results.push((8, "diagnostics oracles", c8_diagnostics()));
    results.push((9, "determinism", c9_determinism(&ham)));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, c) in &results {
        let status = if c.ok { "PASS" } else { "FAIL" };
        failed += usize::from(!c.ok);
        println!("criterion {id} [{name}]: {status}  {}", c.notes.join("; "));
    }
    println!("sweep times: hammerstein {:.1}s, diffusion1d {:.1}s, autoconv {:.1}s", t_ham.as_secs_f64(), t_dif.as_secs_f64(), t_ac.as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
