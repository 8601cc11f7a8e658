//! Acceptance criteria, one PASS/FAIL line each at the pinned tolerances.
//! Runs as a plain binary; pass criterion ids (`AC3 AC8`) to run a subset.
//! Exits non-zero when any criterion fails.

use ising_rc::bounds::{
    decay_rate_bound, eigenvalue_tail_check, entropy_bound_pipeline, fit_decay_rate, simulate_branching, BranchingParams,
    EntropyBoundInputs,
};
use ising_rc::disorder::{
    compute_xl, disorder_events_experiment, disordered_decay_scan, sample_environment, DisorderEventsConfig, Distribution,
    Environment, EnvironmentSpec, ScanConfig,
};
use ising_rc::estimators::{
    beta_extrapolate, entropy_scaling_experiment, estimate_rdm, exact_ground_rdm, exact_norm_table, exact_thermal_rdm,
    fit_norm_envelope, norm_decay_experiment, strictly_decreasing_beyond_noise, BetaRule, EntropyScalingConfig, MRule,
    NormDecayConfig, SlitRun, TallyMode,
};
use ising_rc::geometry::SpaceTimeBox;
use ising_rc::mixing::{boundary_influence, exact_boundary_influence, exact_factorization_deviation, factorization_ratio, SlitEvent};
use ising_rc::percolation::{estimate_connectivity, BoundaryRule, ClusterLabelling, Configuration};
use ising_rc::quantum_oracle::{
    block_qubits, entropy, op_norm_diff, reduce, schmidt_block, DensityMatrix, IsingChain,
};
use ising_rc::rc_sampler::{importance_estimate, ChainState};
use ising_rc::report::{csv_body, write_csv};
use ising_rc::rng::Rng;
use ising_rc::stats::{batch_means, normal_quantile};
use ising_rc::Error;
use std::time::Instant;

struct Outcome {
    pass: bool,
    summary: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome { pass, summary: summary.into(), info: Vec::new() }
    }
    fn info(mut self, line: impl Into<String>) -> Self {
        self.info.push(line.into());
        self
    }
}

fn fmt_seq(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

const THETAS: [f64; 3] = [0.25, 0.5, 1.0];

fn ac1() -> Outcome {
    let mut pass = true;
    let mut out = Vec::new();
    for (i, &theta) in THETAS.iter().enumerate() {
        let t = Instant::now();
        let run = SlitRun { sweeps: 100_000, chains: 8, seed: 11 + i as u64, ..SlitRun::new(1, 0, 6.0, theta, 1.0) };
        let est = estimate_rdm(&run).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let exact = exact_thermal_rdm(1, 0, 6.0, theta, 1.0).unwrap();
        let z = est.max_z(exact.operator());
        let s_exact = entropy(&exact);
        let s_z = (est.entropy - s_exact).abs() / est.entropy_se;
        let ok = z <= 3.0 && s_z <= 3.0 && secs < 120.0;
        pass &= ok;
        out.push(format!("θ={theta}: max entry |z|={z:.2}, entropy |z|={s_z:.2}, {secs:.1}s"));
    }
    Outcome::new(pass, format!("ρ̂ vs e^(−βH) oracle, tol 3 SE, <120 s/point; {}", out.join("; ")))
}

fn ac2() -> Outcome {
    let mut pass = true;
    let mut out = Outcome::new(true, "");
    let mut parts = Vec::new();
    for (i, &theta) in THETAS.iter().enumerate() {
        let (ground, gap) = exact_ground_rdm(1, 0, theta, 1.0).unwrap();
        let gap = gap.unwrap();
        let schedule = [40.0 / gap, 60.0 / gap, 80.0 / gap];
        let base = SlitRun { sweeps: 100_000, chains: 8, seed: 21 + i as u64, ..SlitRun::new(1, 0, schedule[0], theta, 1.0) };
        match beta_extrapolate(&base, &schedule, 0.0) {
            Ok(x) => {
                let z = x.estimate.max_z(ground.operator());
                let ok = z <= 3.0 && x.beta * gap >= 40.0;
                pass &= ok;
                parts.push(format!("θ={theta}: β={:.1} (βΔ={:.0}), max |z| vs ground={z:.2}", x.beta, x.beta * gap));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("θ={theta}: {e}"));
            }
        }
    }
    out.pass = pass;
    out.summary = format!("β-extrapolated ρ̂ vs ground state, tol 3 SE, βΔ ≥ 40; {}", parts.join("; "));
    out
}

fn ac3() -> Outcome {
    let t = Instant::now();
    let run = SlitRun { sweeps: 250_000, chains: 4, seed: 31, mode: TallyMode::ClusterAveraged, ..SlitRun::new(1, 1, 1.0, 0.25, 1.0) };
    let cfg = NormDecayConfig { theta: 0.25, l: 1, m_list: (1..=5).collect(), beta_rule: BetaRule::Default, run };
    let res = norm_decay_experiment(&cfg).unwrap();
    let body: Vec<_> = res.rows.iter().filter(|r| r.m < 5).collect();
    let decreasing = strictly_decreasing_beyond_noise(&body.iter().map(|r| (r.norm, r.se)).collect::<Vec<_>>(), 2.0);
    let bounded = res.rows.iter().all(|r| r.norm <= 2.0);
    let slope_ok = res.fit.as_ref().is_some_and(|f| f.gamma > 0.0 && f.gamma > 2.0 * f.gamma_se);
    let fit = match &res.fit {
        Some(f) => format!("γ̂={:.3} ± {:.3}", f.gamma, f.gamma_se),
        None => "no fit (censored rows)".to_string(),
    };
    let reference = exact_ground_rdm(5, 1, 0.25, 1.0).unwrap().0;
    let exact: Vec<f64> =
        (1..5).map(|m| op_norm_diff(&exact_ground_rdm(m, 1, 0.25, 1.0).unwrap().0, &reference).unwrap()).collect();
    Outcome::new(
        decreasing && slope_ok && bounded,
        format!(
            "‖ρ̂_m − ρ̂_5‖, θ=0.25, L=1, 10⁶ sweeps per m: strictly decreasing (2 SE) {decreasing}, {fit}, all ≤ 2 {bounded}; {:.0}s",
            t.elapsed().as_secs_f64()
        ),
    )
    .info(format!("norms m=1..4: {}", fmt_seq(&body.iter().map(|r| r.norm).collect::<Vec<_>>())))
    .info(format!("SE m=1..4:    {}", fmt_seq(&body.iter().map(|r| r.se).collect::<Vec<_>>())))
    .info(format!("censored: {:?}", body.iter().map(|r| r.censored).collect::<Vec<_>>()))
    .info(format!("exact ground-state norms m=1..4: {}", fmt_seq(&exact)))
}

fn connectivity_fit(lambda: f64, delta: f64, ms: std::ops::RangeInclusive<u32>, trials: u64, seed: u64) -> (f64, f64, Vec<f64>) {
    let rows: Vec<(f64, f64, f64)> = ms
        .map(|m| {
            let e = estimate_connectivity(lambda, delta, m, trials, Rng::stream(seed, &[u64::from(m)]).next_u64()).unwrap();
            (f64::from(m), e.p, e.se)
        })
        .collect();
    let f = fit_decay_rate(&rows).unwrap();
    (f.gamma, f.gamma_se, rows.iter().map(|r| r.1).collect())
}

fn ac4() -> Outcome {
    let t = Instant::now();
    let (g, se, _) = connectivity_fit(0.25, 1.0, 2..=8, 100_000, 41);
    // At 4λ/δ = 1 the branching comparison is critical and its exponential
    // rate is the limit 0 from below.
    let (bound, note) = match decay_rate_bound(0.25, 1.0) {
        Ok(b) => (b.gamma_lower, "bound".to_string()),
        Err(Error::Domain(msg)) => (0.0, format!("bound 0 (critical branching: {msg})")),
        Err(e) => panic!("{e}"),
    };
    let first = g > 0.0 && g >= bound - 2.0 * se;
    let mut gammas = Vec::new();
    for (i, delta) in [8.0, 16.0, 32.0].into_iter().enumerate() {
        gammas.push(connectivity_fit(1.0, delta, 1..=6, 200_000, 42 + i as u64));
    }
    let increasing = gammas.windows(2).all(|w| w[1].0 > w[0].0);
    let secs = t.elapsed().as_secs_f64();
    Outcome::new(
        first && increasing && secs < 300.0,
        format!(
            "λ=0.25,δ=1: γ̂={g:.3} ± {se:.3} vs {note} = {bound:.3}; λ=1, δ=8,16,32: γ̂ = {} increasing {increasing}; {secs:.0}s",
            gammas.iter().map(|x| format!("{:.3}±{:.3}", x.0, x.1)).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn ac5() -> Outcome {
    let theta = 0.25;
    let l_list: Vec<u32> = (1..=5).collect();
    let env = fit_norm_envelope(&exact_norm_table(theta, &l_list).unwrap().into_iter().filter(|p| p.2 > 1e-13).collect::<Vec<_>>())
        .unwrap();
    let mut pass = true;
    let mut info = Vec::new();
    // Tail cascade on exact chains of at most 9 sites, starting at K = 1.
    for l in 0..=2usize {
        let rhos: Vec<DensityMatrix> = (1..)
            .map(|m| (m, 2 * m + l + 1))
            .take_while(|&(_, n)| n <= 9)
            .map(|(m, n)| {
                let g = IsingChain::uniform(n, theta, 1.0).unwrap().ground_state().unwrap();
                reduce(&g.vector, block_qubits(m, l), n).unwrap()
            })
            .collect();
        let rep = eigenvalue_tail_check(&rhos, env.gamma, 1).unwrap();
        pass &= rep.all_ok();
        info.push(format!("tail check L={l}, m=1..{}: ok={} {:?}", rhos.len(), rep.all_ok(), rep.violations));
    }
    // Rank-cap branch: the bound is exactly 2m for m ≤ K.
    let explicit = EntropyBoundInputs::new(3.0, 1.0, 1.0, 50).unwrap();
    let fitted = EntropyBoundInputs::new(env.gamma, 2.0 * env.alpha, env.c, 4).unwrap();
    for inp in [explicit, fitted] {
        for m in 0..=inp.k() {
            let b = entropy_bound_pipeline(&inp, m).unwrap();
            pass &= b.bound == 2.0 * m as f64;
        }
        info.push(format!("rank cap γ={:.3} α={:.3} C={:.3e} L={}: K={}", inp.gamma, inp.alpha, inp.c, inp.l, inp.k()));
    }
    // Bound above exact entropies at every tested point.
    let mut worst = f64::INFINITY;
    let mut points = 0;
    for l in 0..=4u32 {
        let inp = EntropyBoundInputs::new(env.gamma, 2.0 * env.alpha, env.c, l.max(1)).unwrap();
        for m in 1..=(13 - l) / 2 {
            let s = entropy(&exact_ground_rdm(m, l, theta, 1.0).unwrap().0);
            let b = entropy_bound_pipeline(&inp, u64::from(m)).unwrap().bound;
            worst = worst.min(b - s);
            points += 1;
        }
    }
    pass &= worst >= 0.0;
    let mut o = Outcome::new(
        pass,
        format!(
            "fitted γ̂={:.3} α̂={:.3} Ĉ={:.3e}; Weyl/rank/zero cascade, 2m branch exact, min(bound − S) = {worst:.3} over {points} points",
            env.gamma, env.alpha, env.c
        ),
    );
    o.info = info;
    o
}

fn ac6() -> Outcome {
    let mut rng = Rng::new(61);
    let (mut worst_spec, mut rank_ok) = (0.0f64, true);
    for _ in 0..500 {
        let n = 2 + rng.below(9) as usize;
        let lo = rng.below(n as u64) as usize;
        let hi = lo + rng.below((n - lo) as u64) as usize;
        let v: Vec<f64> = (0..1usize << n).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let psi: Vec<f64> = v.iter().map(|x| x / norm).collect();
        let ev = reduce(&psi, (lo, hi), n).unwrap().spectrum().values.clone();
        let sv = schmidt_block(&psi, n, lo, hi).unwrap();
        for (j, &e) in ev.iter().enumerate() {
            let s2 = sv.get(j).map_or(0.0, |s| s * s);
            worst_spec = worst_spec.max((e - s2).abs());
        }
        let kept = hi - lo + 1;
        let rank = sv.iter().filter(|&&s| s * s > 1e-12).count();
        rank_ok &= rank <= (1usize << kept).min(1 << (n - kept));
    }
    // Slit geometry: block L + 1 against the 2m margin sites.
    for (m, l) in [(1usize, 0usize), (1, 2), (2, 1), (3, 2)] {
        let n = 2 * m + l + 1;
        let g = IsingChain::uniform(n, 0.5, 1.0).unwrap().ground_state().unwrap();
        let (lo, hi) = block_qubits(m, l);
        let sv = schmidt_block(&g.vector, n, lo, hi).unwrap();
        rank_ok &= sv.iter().filter(|&&s| s * s > 1e-12).count() <= (1usize << (l + 1)).min(1 << (2 * m));
    }
    let mut worst_entropy = 0.0f64;
    for d in [2usize, 4, 8, 64, 1024] {
        worst_entropy = worst_entropy.max((entropy(&DensityMatrix::maximally_mixed(d)) - (d as f64).log2()).abs());
    }
    let mut r2 = Rng::new(62);
    for n in 1..=10usize {
        let v: Vec<f64> = (0..1usize << n).map(|_| r2.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let psi: Vec<f64> = v.iter().map(|x| x / norm).collect();
        worst_entropy = worst_entropy.max(entropy(&DensityMatrix::pure(&psi).unwrap()).abs());
    }
    Outcome::new(
        worst_spec <= 1e-10 && rank_ok && worst_entropy <= 1e-12,
        format!(
            "500 random states: max |λ_j − s_j²| = {worst_spec:.1e} (tol 1e-10), rank caps {rank_ok}, entropy identities max err {worst_entropy:.1e} (tol 1e-12)"
        ),
    )
}

fn ac7() -> Outcome {
    const SEEDS: u64 = 20;
    let boxes = [
        (SpaceTimeBox::new(0, 1, 0.0, 1.0).unwrap().periodic(), 2.0, 1.5),
        (SpaceTimeBox::new(0, 1, 0.0, 1.5).unwrap().periodic(), 1.0, 1.0),
        (SpaceTimeBox::new(0, 2, 0.0, 1.0).unwrap(), 0.8, 1.2),
    ];
    // Šidák-corrected 3 SE across the seeds of one series.
    let crit = normal_quantile(1.0 - 0.00135 / SEEDS as f64);
    let mut pass = true;
    let mut info = Vec::new();
    for (b, (bx, lambda, delta)) in boxes.iter().enumerate() {
        let observables: [(&str, fn(&Configuration, &ClusterLabelling) -> f64); 2] =
            [("k", |_, l| l.num_clusters() as f64), ("bridges", |c, _| c.num_bridges() as f64)];
        let mut series = vec![Vec::new(); 2];
        for seed in 0..SEEDS {
            let mut ch = ChainState::uniform(bx, *lambda, *delta, BoundaryRule::Free, 700 + 31 * b as u64 + seed).unwrap();
            ch.run(1000).unwrap();
            let mut obs = [Vec::with_capacity(20_000), Vec::with_capacity(20_000)];
            for _ in 0..20_000 {
                ch.sweep().unwrap();
                obs[0].push(observables[0].1(ch.config(), ch.labelling()));
                obs[1].push(observables[1].1(ch.config(), ch.labelling()));
            }
            for j in 0..2 {
                series[j].push(batch_means(&obs[j], 50));
            }
        }
        for (j, (name, f)) in observables.iter().enumerate() {
            let imp = importance_estimate(bx, &BoundaryRule::Free, *lambda, *delta, 2.0, f, 400_000, 77 + b as u64).unwrap();
            let zs: Vec<f64> = series[j].iter().map(|(m, se)| (m - imp.estimate) / (se * se + imp.se * imp.se).sqrt()).collect();
            let max_z = zs.iter().fold(0.0f64, |a, z| a.max(z.abs()));
            let pooled_mean = series[j].iter().map(|p| p.0).sum::<f64>() / SEEDS as f64;
            let pooled_se = (series[j].iter().map(|p| p.1 * p.1).sum::<f64>()).sqrt() / SEEDS as f64;
            let pooled_z = (pooled_mean - imp.estimate) / (pooled_se * pooled_se + imp.se * imp.se).sqrt();
            let ok = max_z <= crit && pooled_z.abs() <= 3.0 && !imp.unreliable;
            pass &= ok;
            info.push(format!(
                "box {b} ({} lines, β={}, {name}, ESS {:.0}): SW {pooled_mean:.4} vs importance {:.4} ± {:.4}; max seed |z|={max_z:.2}, pooled z={pooled_z:.2}",
                bx.num_lines(),
                bx.t_max() - bx.t_min(),
                imp.effective_sample_size,
                imp.estimate,
                imp.se
            ));
        }
    }
    let mut o = Outcome::new(pass, format!("SW vs importance (q=2), 20 seeds per series, per-seed tol {crit:.2} SE (Šidák), pooled tol 3 SE"));
    o.info = info;
    o
}

fn ac8() -> Outcome {
    let (beta, delta) = (2.5, 1.0);
    let f0 = factorization_ratio(&SlitRun { sweeps: 100_000, seed: 81, ..SlitRun::new(1, 0, beta, 0.0, delta) }, None).unwrap();
    let cell = f0.cell(0, 0).unwrap();
    let p = (-2.0 * delta * beta).exp();
    let literal = (-delta * beta).exp();
    let z0 = (cell.ratio - 1.0 - p) / cell.se;
    let z_literal = (cell.ratio - 1.0 - literal) / cell.se;
    let first = z0.abs() <= 3.0;

    let (m, l) = (1u32, 4u32);
    let beta_f = 4.0 * f64::from(m + l + 1);
    let run = SlitRun { sweeps: 100_000, chains: 4, seed: 82, ..SlitRun::new(m, l, beta_f, 0.25, 1.0) };
    let by_k: Vec<(f64, f64)> =
        (0..=2).map(|k| factorization_ratio(&run, Some(k)).map(|f| (f.max_deviation, f.max_se)).unwrap()).collect();
    let exact_k: Vec<f64> = (0..=2).map(|k| exact_factorization_deviation(m, l, beta_f, 0.25, 1.0, k).unwrap()).collect();
    let second = strictly_decreasing_beyond_noise(&by_k, 2.0);

    let ms = [1u32, 2, 3, 4];
    let by_m: Vec<(f64, f64)> = ms
        .iter()
        .map(|&m| {
            let r = SlitRun { sweeps: 100_000, chains: 4, seed: 83 + u64::from(m), ..SlitRun::new(m, 0, 4.0 * f64::from(m + 1), 0.25, 1.0) };
            let b = boundary_influence(&r, &SlitEvent::Diagonal).unwrap();
            (b.deviation.abs(), b.se)
        })
        .collect();
    let exact_m: Vec<f64> = ms
        .iter()
        .map(|&m| exact_boundary_influence(m, 0, 4.0 * f64::from(m + 1), 0.25, 1.0, &SlitEvent::Diagonal).unwrap().abs())
        .collect();
    let third = strictly_decreasing_beyond_noise(&by_m, 2.0);
    Outcome::new(
        first && second && third,
        format!(
            "λ=0 ratio − 1 = {:.4e} ± {:.1e} vs e^(−2δβ) = {p:.4e} (z={z0:.2}) {first}; max ratio decreasing in K (2 SE) {second}; boundary influence decreasing in m (2 SE) {third}",
            cell.ratio - 1.0,
            cell.se
        ),
    )
    .info(format!("literal e^(−δβ) = {literal:.4e}: z = {z_literal:.1}"))
    .info(format!("K=0,1,2 (m=1, L=4, β={beta_f}): MC {} ± {}", fmt_seq(&by_k.iter().map(|x| x.0).collect::<Vec<_>>()), fmt_seq(&by_k.iter().map(|x| x.1).collect::<Vec<_>>())))
    .info(format!("K=0,1,2 exact: {}", fmt_seq(&exact_k)))
    .info(format!("m=1..4 (L=0, β=4(m+1)): MC {} ± {}", fmt_seq(&by_m.iter().map(|x| x.0).collect::<Vec<_>>()), fmt_seq(&by_m.iter().map(|x| x.1).collect::<Vec<_>>())))
    .info(format!("m=1..4 exact: {}", fmt_seq(&exact_m)))
}

fn events_config(lambda: Distribution) -> DisorderEventsConfig {
    DisorderEventsConfig {
        spec: EnvironmentSpec { lambda, delta: Distribution::PointMass { value: 1.0 } },
        l_list: vec![8, 21, 55, 149],
        m_list: vec![2],
        environments: 200,
        trials: 200,
        gamma: 1.0,
        max_distance: None,
        rho: None,
        beta: None,
        seed: 9,
        workers: None,
    }
}

fn ac9() -> Outcome {
    let mut worst = 0.0f64;
    for (lambda, delta) in [(0.1, 1.0), (0.5, 2.0), (0.3, 0.7)] {
        for l in [8u32, 21, 55, 149, 1000] {
            let env = Environment::constant(-2, i64::from(l) + 2, lambda, delta).unwrap();
            let tr = compute_xl(&env, l, None).unwrap();
            let closed = -4.0 * f64::from(tr.k) * (1.0 + 2.0 * lambda / delta).ln();
            worst = worst.max(((tr.ln_x_l - closed) / closed).abs());
        }
    }
    let first = worst <= 1e-14;
    let t = Instant::now();
    let light = disorder_events_experiment(&events_config(Distribution::LogNormal { mu: -3.0, sigma: 0.5 })).unwrap();
    let pa: Vec<f64> = light.frequencies.iter().map(|f| f.p_a).collect();
    let monotone = pa.windows(2).all(|w| w[1] >= w[0]);
    let secs = t.elapsed().as_secs_f64();
    let heavy = disorder_events_experiment(&events_config(Distribution::LogNormal { mu: -2.3, sigma: 0.75 })).unwrap();
    let pa_heavy: Vec<f64> = heavy.frequencies.iter().map(|f| f.p_a).collect();
    Outcome::new(
        first && monotone,
        format!(
            "X_L closed form max rel err {worst:.1e} (tol 1e-14); P̂(A_L), λ~LogNormal(−3, 0.5), δ=1, L=8,21,55,149: {pa:?} non-decreasing {monotone}; {secs:.0}s"
        ),
    )
    .info(format!("heavier λ~LogNormal(−2.3, 0.75): P̂(A_L) = {pa_heavy:?}"))
}

/// Two renders of the same experiment, bodies compared byte for byte.
fn same<T: serde::Serialize>(name: &str, a: &[T], b: &[T], bad: &mut Vec<String>) {
    let header = serde_json::json!({ "experiment": name });
    let (x, y) = (write_csv(&header, a).unwrap(), write_csv(&header, b).unwrap());
    if csv_body(&x) != csv_body(&y) || x.is_empty() {
        bad.push(name.to_string());
    }
}

fn ac10() -> Outcome {
    let mut bad = Vec::new();
    let mut names = 0;
    let mut check = |name: &str, f: &dyn Fn(usize) -> String| {
        names += 1;
        let (a, b) = (f(1), f(2));
        if a != b || a.is_empty() {
            bad.push(name.to_string());
        }
    };
    check("decay-scan", &|_| {
        let rows: Vec<_> = (2..=5).map(|m| estimate_connectivity(0.25, 1.0, m, 5_000, u64::from(m)).unwrap()).collect();
        write_csv(&(), &rows).map(|s| csv_body(&s).to_string()).unwrap()
    });
    check("rdm", &|w| {
        let est = estimate_rdm(&SlitRun { sweeps: 2_000, chains: 3, workers: w, seed: 5, ..SlitRun::new(1, 1, 4.0, 0.5, 1.0) }).unwrap();
        est.rho.operator().to_csv()
    });
    check("norm-decay", &|w| {
        let run = SlitRun { sweeps: 1_000, chains: 2, workers: w, seed: 6, ..SlitRun::new(1, 0, 1.0, 0.25, 1.0) };
        let r = norm_decay_experiment(&NormDecayConfig { theta: 0.25, l: 0, m_list: vec![1, 2], beta_rule: BetaRule::Default, run }).unwrap();
        write_csv(&(), &r.rows).map(|s| csv_body(&s).to_string()).unwrap()
    });
    check("entropy-scan", &|w| {
        let run = SlitRun { sweeps: 1_000, chains: 2, workers: w, seed: 7, ..SlitRun::new(1, 0, 1.0, 0.25, 1.0) };
        let r = entropy_scaling_experiment(&EntropyScalingConfig {
            theta: 0.25,
            l_list: vec![1, 2],
            m_rule: MRule::EqualToL,
            beta_rule: BetaRule::Default,
            run: Some(run),
            exact: true,
            envelope: None,
        })
        .unwrap();
        write_csv(&(), &r.rows).map(|s| csv_body(&s).to_string()).unwrap()
    });
    check("mixing-check", &|w| {
        let f = factorization_ratio(&SlitRun { sweeps: 1_000, chains: 2, workers: w, seed: 8, ..SlitRun::new(1, 2, 6.0, 0.25, 1.0) }, Some(1))
            .unwrap();
        format!("{:?}", (f.max_deviation, f.max_se, f.cells.len()))
    });
    check("branching", &|_| {
        let s = simulate_branching(&BranchingParams::new(1.0, 8.0).unwrap(), 5_000, 9);
        format!("{:?}", (1..10).map(|m| s.progeny_tail(m)).collect::<Vec<_>>())
    });
    check("disorder-scan", &|w| {
        let mut cfg = events_config(Distribution::LogNormal { mu: -3.0, sigma: 0.5 });
        cfg.environments = 3;
        cfg.trials = 30;
        cfg.l_list = vec![8];
        cfg.workers = Some(w);
        let r = disorder_events_experiment(&cfg).unwrap();
        let spec = cfg.spec.clone();
        let env = sample_environment(&spec, (-10, 30), 3).unwrap();
        let scan = disordered_decay_scan(
            &env,
            &ScanConfig { sites: (0, 20), distances: vec![1, 2, 3], trials: 50, gamma: 1.0, q: 1.0, seed: 4, workers: Some(w) },
        )
        .unwrap();
        let a = write_csv(&(), &r.rows).unwrap();
        let b = write_csv(&(), &scan.rows).unwrap();
        format!("{}{}", csv_body(&a), csv_body(&b))
    });
    check("oracle", &|_| exact_ground_rdm(1, 1, 0.5, 1.0).unwrap().0.operator().to_csv());
    let mut serde_bad = Vec::new();
    let rows: Vec<_> = (2..=3).map(|m| estimate_connectivity(0.25, 1.0, m, 1_000, 1).unwrap()).collect();
    same("report", &rows, &rows.clone(), &mut serde_bad);
    bad.extend(serde_bad);
    Outcome::new(
        bad.is_empty(),
        format!("{names} experiments rerun with equal seeds (1 then 2 workers): identical bodies; mismatches {bad:?}"),
    )
}

fn main() {
    let which: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).map(|a| a.to_uppercase()).collect();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
    ];
    let mut failed = Vec::new();
    for (id, f) in criteria {
        if !which.is_empty() && !which.iter().any(|w| w == id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        println!("{id} {} {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.summary, t.elapsed().as_secs_f64());
        for line in &o.info {
            println!("    {line}");
        }
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: FAILED {}", failed.join(" "));
        std::process::exit(1);
    }
}
