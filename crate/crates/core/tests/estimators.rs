use ising_rc::estimators::*;
use ising_rc::percolation::BoundaryRule;
use ising_rc::quantum_oracle::{entropy, op_norm_diff, DenseOperator};
use ising_rc::rc_sampler::ChainState;
use ising_rc::stats::{normal_quantile, variance};
use ising_rc::Error;
use proptest::prelude::*;

fn run(m: u32, l: u32, beta: f64, lambda: f64, sweeps: u64, seed: u64) -> SlitRun {
    SlitRun { sweeps, seed, ..SlitRun::new(m, l, beta, lambda, 1.0) }
}

/// z-threshold for `k` simultaneous two-sided 3σ-level tests.
fn corrected_z(k: usize) -> f64 {
    normal_quantile(1.0 - 0.00135 / k as f64)
}

/// Difference of two cells and its batch-means standard error.
fn cell_difference(h: &SlitHistogram, a: usize, b: usize) -> (f64, f64) {
    let per: Vec<f64> = h.batches.iter().map(|x| x[a] - x[b]).collect();
    let total: f64 = per.iter().sum();
    (total, (per.len() as f64 * variance(&per)).sqrt())
}

fn assert_paired_cells_agree(h: &SlitHistogram, partner: impl Fn(usize, usize) -> (usize, usize)) {
    let d = h.dim();
    let mut pairs = Vec::new();
    for ep in 0..d {
        for em in 0..d {
            let (p, q) = partner(ep, em);
            let (a, b) = (ep * d + em, p * d + q);
            if a < b {
                pairs.push((a, b));
            }
        }
    }
    let z = corrected_z(pairs.len());
    for (a, b) in pairs {
        let (diff, se) = cell_difference(h, a, b);
        assert!(diff.abs() <= z * se + 1e-9, "cells {a},{b}: diff {diff} se {se}");
    }
}

#[test]
fn histogram_is_flip_symmetric() {
    let h = estimate_slit_histogram(&run(1, 1, 4.0, 0.5, 20_000, 1)).unwrap();
    let mask = h.dim() - 1;
    assert_paired_cells_agree(&h, |p, m| (p ^ mask, m ^ mask));
}

#[test]
fn histogram_is_reflection_symmetric() {
    let h = estimate_slit_histogram(&run(1, 1, 4.0, 0.5, 20_000, 2)).unwrap();
    assert_paired_cells_agree(&h, |p, m| (m, p));
}

#[test]
fn histogram_totals_and_guards() {
    let h = estimate_slit_histogram(&run(0, 1, 2.0, 0.5, 1_000, 3)).unwrap();
    assert_eq!(h.total, 4_000.0);
    assert!((h.counts.iter().sum::<f64>() - h.total).abs() < 1e-9);
    assert!(h.counts.iter().all(|&c| c >= 0.0));
    assert!(h.regime_warning.is_none());
    let warned = estimate_slit_histogram(&run(2, 1, 4.0, 0.5, 100, 3)).unwrap();
    assert!(warned.regime_warning.is_some());
    assert!(matches!(estimate_slit_histogram(&run(0, 5, 2.0, 0.5, 100, 3)), Err(Error::Size(_))));
}

#[test]
fn a_hat_at_zero_coupling_matches_back_connection_law() {
    // Under the q = 2 weight the slit line is death-free with probability e^{−2δβ}.
    let (beta, delta) = (0.5, 1.0);
    let h = estimate_slit_histogram(&SlitRun { delta, ..run(1, 0, beta, 0.0, 40_000, 4) }).unwrap();
    let (a, se) = estimate_a(&h).unwrap();
    let exact = (1.0 + (-2.0 * delta * beta).exp()) / 2.0;
    assert!((a - exact).abs() < 3.0 * se, "a {a} se {se} exact {exact}");
}

#[test]
fn a_hat_identity_with_measured_back_connection() {
    let sr = run(1, 0, 0.8, 0.0, 1, 5);
    let bx = sr.slit_box().unwrap();
    let mut ch = ChainState::uniform(&bx, 0.0, 1.0, BoundaryRule::Free, 5).unwrap();
    ch.run(500).unwrap();
    let n = 40_000;
    let (mut agree, mut connected) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        ch.sweep().unwrap();
        let lab = ch.labelling();
        let (p, m) = (lab.slit_plus(0), lab.slit_minus(0));
        agree.push(f64::from(u8::from(ch.spins().interval_spin(p) == ch.spins().interval_spin(m))));
        connected.push(f64::from(u8::from(lab.cluster_of(p) == lab.cluster_of(m))));
    }
    let diff: Vec<f64> = agree.iter().zip(&connected).map(|(a, c)| a - (1.0 + c) / 2.0).collect();
    let (mean, se) = ising_rc::stats::batch_means(&diff, 40);
    assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn estimate_a_trivial_cases() {
    let sr = run(0, 1, 1.0, 0.0, 1, 0);
    let d = sr.dim();
    let mut diag = vec![0.0; d * d];
    diag[5] = 10.0;
    let h = SlitHistogram::from_counts(sr.clone(), diag, None).unwrap();
    assert_eq!(estimate_a(&h).unwrap().0, 1.0);
    let uniform = SlitHistogram::from_counts(sr.clone(), vec![3.0; d * d], None).unwrap();
    assert!((estimate_a(&uniform).unwrap().0 - 0.25).abs() < 1e-15);
    let empty = SlitHistogram::from_counts(sr, vec![0.0; d * d], None).unwrap();
    assert!(matches!(estimate_a(&empty), Err(Error::InsufficientData(_))));
}

#[test]
fn unreliable_normalizer_is_rejected() {
    let sr = run(0, 0, 1.0, 0.0, 1, 0);
    let batches = vec![vec![0.0, 5.0, 5.0, 0.0], vec![1.0, 5.0, 5.0, 0.0], vec![0.0, 5.0, 5.0, 0.0]];
    let counts = vec![1.0, 15.0, 15.0, 0.0];
    let h = SlitHistogram::from_counts(sr, counts, Some(batches)).unwrap();
    assert!(matches!(rdm_from_histogram(&h), Err(Error::Conditioning(_))));
}

#[test]
fn rdm_has_unit_trace_and_valid_spectrum() {
    let est = estimate_rdm(&run(1, 1, 4.0, 0.5, 5_000, 6)).unwrap();
    assert!(est.trace_drift < 1e-12);
    assert!((est.rho.trace() - 1.0).abs() < 1e-10);
    assert!(est.rho.min_eigenvalue() >= -1e-12);
    assert!(est.a_hat > 0.0 && est.a_hat <= 1.0);
}

#[test]
fn three_spin_rdm_matches_thermal_oracle() {
    let est = estimate_rdm(&SlitRun { chains: 4, ..run(1, 0, 6.0, 1.0, 25_000, 7) }).unwrap();
    let exact = exact_thermal_rdm(1, 0, 6.0, 1.0, 1.0).unwrap();
    let z = est.max_z(exact.operator());
    assert!(z < 3.0, "max z {z}\n{:?}\n{:?}", est.rho.operator(), exact.operator());
}

#[test]
fn four_spin_entropy_matches_oracle() {
    let est = estimate_rdm(&run(1, 1, 8.0, 0.5, 25_000, 8)).unwrap();
    let exact = entropy(&exact_thermal_rdm(1, 1, 8.0, 0.5, 1.0).unwrap());
    assert!((est.entropy - exact).abs() < 3.0 * est.entropy_se, "{} ± {} vs {exact}", est.entropy, est.entropy_se);
}

#[test]
fn cluster_averaged_tally_agrees_with_spins() {
    let a = estimate_rdm(&run(1, 1, 4.0, 0.5, 10_000, 9)).unwrap();
    let b = estimate_rdm(&SlitRun { mode: TallyMode::ClusterAveraged, ..run(1, 1, 4.0, 0.5, 10_000, 10) }).unwrap();
    let (d, se) = norm_diff_with_se(&a, &b).unwrap();
    assert!(d < 3.0 * se + noise_floor(&a, &b), "d {d} se {se}");
    // Averaging over the free clusters can only reduce the spread.
    let sum = |e: &RdmEstimate| e.se.data().iter().sum::<f64>();
    assert!(sum(&b) < sum(&a));
}

fn reverse_bits(e: usize, bits: u32) -> usize {
    (0..bits).fold(0, |acc, i| acc | (((e >> i) & 1) << (bits - 1 - i)))
}

fn reflect(h: &SlitHistogram) -> SlitHistogram {
    let d = h.dim();
    let bits = h.l() + 1;
    let map = |v: &Vec<f64>| -> Vec<f64> {
        let mut out = vec![0.0; d * d];
        for p in 0..d {
            for m in 0..d {
                out[reverse_bits(p, bits) * d + reverse_bits(m, bits)] = v[p * d + m];
            }
        }
        out
    };
    SlitHistogram::from_counts(h.run.clone(), map(&h.counts), Some(h.batches.iter().map(map).collect())).unwrap()
}

#[test]
fn rdm_is_equivariant_under_site_reversal() {
    let h = estimate_slit_histogram(&run(1, 2, 6.0, 0.5, 2_000, 11)).unwrap();
    let a = rdm_from_histogram(&h).unwrap();
    let b = rdm_from_histogram(&reflect(&h)).unwrap();
    let d = a.dim();
    for i in 0..d {
        for j in 0..d {
            let (ri, rj) = (reverse_bits(i, 3), reverse_bits(j, 3));
            assert!((a.rho.get(i, j) - b.rho.get(ri, rj)).abs() < 1e-12);
            assert!((a.se.get(i, j) - b.se.get(ri, rj)).abs() < 1e-12);
        }
    }
}

#[test]
fn reflected_geometry_gives_the_same_state() {
    // [0, L] reversed maps the slit box onto itself, so ρ̂ and its reversal
    // estimate the same matrix.
    let a = estimate_rdm(&run(1, 1, 4.0, 0.5, 10_000, 12)).unwrap();
    let h = estimate_slit_histogram(&run(1, 1, 4.0, 0.5, 10_000, 13)).unwrap();
    let b = rdm_from_histogram(&reflect(&h)).unwrap();
    let (dist, se) = norm_diff_with_se(&a, &b).unwrap();
    assert!(dist < 3.0 * se + noise_floor(&a, &b), "dist {dist} se {se}");
}

fn random_histogram(seed: u64) -> SlitHistogram {
    let mut rng = ising_rc::rng::Rng::new(seed);
    let sr = run(0, 1, 1.0, 0.0, 1, seed);
    let counts: Vec<f64> = (0..16).map(|_| rng.below(50) as f64).collect();
    SlitHistogram::from_counts(sr, counts, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_is_associative_and_commutative(s in 0u64..10_000) {
        let (a, b, c) = (random_histogram(s), random_histogram(s + 1), random_histogram(s + 2));
        let left = a.clone().merge(&b).unwrap().merge(&c).unwrap();
        let right = a.clone().merge(&b.clone().merge(&c).unwrap()).unwrap();
        let swapped = b.clone().merge(&a).unwrap();
        prop_assert_eq!(&left.counts, &right.counts);
        prop_assert_eq!(left.total, right.total);
        prop_assert_eq!(&a.merge(&b).unwrap().counts, &swapped.counts);
    }

    #[test]
    fn projected_estimate_is_a_density_matrix(s in 0u64..10_000) {
        let mut h = random_histogram(s);
        for e in 0..4 {
            h.counts[e * 4 + e] += 20.0;
        }
        h.total = h.counts.iter().sum();
        h.batches = vec![h.counts.clone()];
        let est = rdm_from_histogram(&h).unwrap();
        prop_assert!((est.rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(est.rho.min_eigenvalue() >= -1e-12);
    }
}

#[test]
fn merged_runs_match_pooled_counts() {
    let a = estimate_slit_histogram(&run(0, 0, 1.0, 0.0, 500, 1)).unwrap();
    let b = estimate_slit_histogram(&run(0, 0, 1.0, 0.0, 500, 2)).unwrap();
    let m = a.clone().merge(&b).unwrap();
    assert_eq!(m.total, a.total + b.total);
    assert_eq!(m.batches.len(), a.batches.len() + b.batches.len());
    let other = estimate_slit_histogram(&run(0, 1, 1.0, 0.0, 500, 2)).unwrap();
    assert!(a.merge(&other).is_err());
}

#[test]
fn runs_are_reproducible_and_worker_independent() {
    let a = estimate_slit_histogram(&SlitRun { workers: 1, ..run(1, 1, 4.0, 0.5, 500, 14) }).unwrap();
    let b = estimate_slit_histogram(&SlitRun { workers: 3, ..run(1, 1, 4.0, 0.5, 500, 14) }).unwrap();
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.chain_seeds, b.chain_seeds);
}

#[test]
fn beta_rule_honours_both_floors() {
    assert_eq!(BetaRule::Default.beta(1, 1, 0.25, 1.0), 40.0 / 1.75);
    assert_eq!(BetaRule::Default.beta(5, 1, 0.25, 1.0), 28.0);
    assert_eq!(BetaRule::Default.beta(1, 1, 2.0, 1.0), 1000.0);
    assert_eq!(BetaRule::Fixed(3.0).beta(9, 9, 0.0, 1.0), 3.0);
}

#[test]
fn beta_extrapolate_with_infinite_tolerance_returns_first_level() {
    let base = run(0, 0, 1.0, 0.5, 500, 15);
    let out = beta_extrapolate(&base, &[2.0, 4.0, 8.0], f64::INFINITY).unwrap();
    assert_eq!(out.beta, 2.0);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn beta_extrapolate_reports_exhausted_schedule() {
    let base = run(0, 0, 1.0, 0.5, 500, 16);
    assert!(matches!(beta_extrapolate(&base, &[2.0], 0.1), Err(Error::NonConvergence(_))));
    assert!(matches!(beta_extrapolate(&base, &[2.0, 1.0], 0.1), Err(Error::Parameter(_))));
}

#[test]
fn beta_extrapolate_reaches_ground_state_on_four_spins() {
    let (lambda, m, l) = (0.5, 1, 1);
    let base = run(m, l, 1.0, lambda, 20_000, 17);
    let out = beta_extrapolate(&base, &[4.0, 16.0, 32.0, 64.0], 0.02).unwrap();
    let (ground, gap) = exact_ground_rdm(m, l, lambda, 1.0).unwrap();
    assert!(out.beta * gap.unwrap() >= 10.0, "β {} gap {gap:?}", out.beta);
    let z = out.estimate.max_z(ground.operator());
    assert!(z < corrected_z(10), "max z {z} at β {}", out.beta);
}

#[test]
fn norm_decay_rows_are_bounded_and_reference_is_zero() {
    let cfg = NormDecayConfig {
        theta: 0.25,
        l: 0,
        m_list: vec![0, 1, 2],
        beta_rule: BetaRule::Fixed(8.0),
        run: run(0, 0, 1.0, 0.0, 3_000, 18),
    };
    let out = norm_decay_experiment(&cfg).unwrap();
    assert_eq!(out.rows.len(), 3);
    let last = out.rows.last().unwrap();
    assert_eq!((last.m, last.norm, last.censored), (2, 0.0, false));
    for r in &out.rows {
        assert!(r.norm <= 2.0 + 3.0 * r.se);
        assert_eq!(r.n, 2);
        assert!(r.oracle_max_z.is_some());
    }
    assert!(norm_decay_experiment(&NormDecayConfig { m_list: vec![2, 1], ..cfg }).is_err());
}

#[test]
fn exact_entropy_grows_with_block_and_stays_under_bound() {
    let cfg = EntropyScalingConfig {
        theta: 0.25,
        l_list: vec![1, 2, 3, 4, 5],
        m_rule: MRule::EqualToL,
        beta_rule: BetaRule::Default,
        run: None,
        exact: true,
        envelope: None,
    };
    let out = entropy_scaling_experiment(&cfg).unwrap();
    let env = out.envelope.expect("fitted envelope");
    assert!(env.gamma > 0.0);
    let s: Vec<f64> = out.rows.iter().map(|r| r.s_exact.unwrap()).collect();
    assert!(s.windows(2).all(|w| w[1] > w[0]), "{s:?}");
    for r in &out.rows {
        assert!(r.s_exact.unwrap() <= r.bound.expect("bound"), "{r:?}");
    }
}

#[test]
fn margin_zero_gives_pure_block_state() {
    for l in [0, 2, 4] {
        let (rho, _) = exact_ground_rdm(0, l, 0.25, 1.0).unwrap();
        assert!(entropy(&rho).abs() < 1e-9);
    }
}

#[test]
fn entropy_converges_in_margin() {
    let s: Vec<f64> = (1..=6).map(|m| entropy(&exact_ground_rdm(m, 2, 0.25, 1.0).unwrap().0)).collect();
    let steps: Vec<f64> = s.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{steps:?}");
    assert!(steps.last().unwrap() < &1e-6);
}

#[test]
fn exact_norm_table_decays_in_margin() {
    let t = exact_norm_table(0.25, &[1]).unwrap();
    assert!(t.windows(2).all(|w| w[1].2 < w[0].2), "{t:?}");
    let used: Vec<_> = t.iter().copied().filter(|p| p.2 > 1e-13).collect();
    let fit = fit_norm_envelope(&used).unwrap();
    for &(m, l, v) in &used {
        let env = fit.c * f64::from(l).powf(fit.alpha) * (-fit.gamma * f64::from(m)).exp();
        assert!(v <= env * (1.0 + 1e-9), "{t:?} {fit:?}");
    }
}

#[test]
fn strict_decrease_uses_combined_errors() {
    assert!(strictly_decreasing_beyond_noise(&[(1.0, 0.01), (0.5, 0.01), (0.2, 0.01)], 3.0));
    assert!(!strictly_decreasing_beyond_noise(&[(1.0, 0.2), (0.5, 0.2)], 3.0));
}

#[test]
fn block_index_puts_site_zero_first() {
    assert_eq!(block_index(&[1, 1]), 0);
    assert_eq!(block_index(&[-1, 1]), 2);
    assert_eq!(block_index(&[1, -1]), 1);
    let id = DenseOperator::identity(2);
    assert_eq!(op_norm_diff(&id, &id).unwrap(), 0.0);
}
