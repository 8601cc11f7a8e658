use ising_rc::bounds::*;
use ising_rc::quantum_oracle::{block_qubits, reduce, DensityMatrix, IsingChain};
use ising_rc::rng::Rng;
use ising_rc::stats::{chi_square_sf, line_fit};
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn bp(lambda: f64, delta: f64) -> BranchingParams {
    BranchingParams::new(lambda, delta).unwrap()
}

/// R = max_x x/G(x), attained at x* = (δ + 2λ)/(6λ).
fn closed_form_nu(lambda: f64, delta: f64) -> f64 {
    let x = (delta + 2.0 * lambda) / (6.0 * lambda);
    (x * (delta - 2.0 * lambda * (x - 1.0)).powi(2) / (delta * delta)).ln()
}

/// θ_max = max_y δ + 2λ − 2λy − δ/√y, attained at y* = (δ/(4λ))^{2/3}.
fn closed_form_mu(lambda: f64, delta: f64) -> f64 {
    let y = (delta / (4.0 * lambda)).powf(2.0 / 3.0);
    delta + 2.0 * lambda - 2.0 * lambda * y - delta / y.sqrt()
}

#[test]
fn pgf_examples() {
    let p = bp(1.0, 4.0);
    assert_eq!(offspring_pgf(&p, 1.0).unwrap(), 1.0);
    assert!((offspring_pgf(&p, 0.0).unwrap() - 4.0 / 9.0).abs() < 1e-15);
    let h = 1e-6;
    for (l, d) in [(1.0, 4.0), (0.3, 2.0), (0.05, 1.0)] {
        let p = bp(l, d);
        let fd = (offspring_pgf(&p, 1.0 + h).unwrap() - offspring_pgf(&p, 1.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - 4.0 * l / d).abs() < 1e-6);
    }
    assert!(offspring_pgf(&p, 3.0).is_err());
    assert!(BranchingParams::new(1.0, 0.0).is_err());
}

#[test]
fn pmf_is_the_series_of_the_pgf() {
    let p = bp(1.0, 4.0);
    for s in [-1.0, -0.3, 0.0, 0.5, 0.9] {
        let series: f64 = (0..400).map(|k| offspring_pmf(&p, k) * f64::powi(s, k as i32)).sum();
        assert!((series - offspring_pgf(&p, s).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn simulated_offspring_match_the_pmf() {
    let p = bp(1.0, 4.0);
    let n = 200_000;
    let draws = simulate_offspring(&p, n, 3);
    let bins = 8;
    let mut obs = vec![0.0; bins + 1];
    for d in draws {
        obs[(d as usize).min(bins)] += 1.0;
    }
    let mut chi2 = 0.0;
    let mut tail = 1.0;
    for (k, o) in obs.iter().enumerate() {
        let e = if k < bins { offspring_pmf(&p, k as u64) } else { tail } * n as f64;
        if k < bins {
            tail -= offspring_pmf(&p, k as u64);
        }
        chi2 += (o - e).powi(2) / e;
    }
    assert!(chi_square_sf(chi2, bins as f64) > 1e-3, "chi2 = {chi2}");
}

#[test]
fn no_bridges_means_a_single_individual() {
    let s = simulate_branching(&bp(0.0, 2.0), 20_000, 1);
    assert!(s.progeny.iter().all(|&m| m == 1));
    let mean = s.lifetime.iter().sum::<f64>() / s.lifetime.len() as f64;
    // Sum of two Exp(2): mean 1, variance 1/2.
    assert!((mean - 1.0).abs() < 4.0 * (0.5f64 / 20_000.0).sqrt());
    assert_eq!(s.truncated, 0);
}

#[test]
fn mean_progeny_is_geometric_sum() {
    let p = bp(1.0, 8.0);
    let s = simulate_branching(&p, 100_000, 2);
    let xs: Vec<f64> = s.progeny.iter().map(|&m| m as f64).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 2.0).abs() < 3.0 * (var / n).sqrt(), "{mean}");
}

#[test]
fn supercritical_runs_are_truncated() {
    let s = simulate_branching(&bp(1.0, 1.0), 5, 4);
    assert!(s.truncated > 0);
    assert!(progeny_tail_exponent(&bp(1.0, 1.0)).is_err());
}

#[test]
fn progeny_exponent_increases_with_delta() {
    let nus: Vec<f64> = [4.5, 8.0, 16.0, 32.0].iter().map(|&d| progeny_tail_exponent(&bp(1.0, d)).unwrap()).collect();
    assert!(nus.windows(2).all(|w| w[1] > w[0]), "{nus:?}");
}

#[test]
fn progeny_exponent_is_continuous() {
    let a = progeny_tail_exponent(&bp(1.0, 8.0)).unwrap();
    let b = progeny_tail_exponent(&bp(1.0 + 1e-4, 8.0)).unwrap();
    assert!((a - b).abs() <= 1e-2);
}

#[test]
fn simulated_progeny_tail_slope() {
    let p = bp(1.0, 8.0);
    let nu = progeny_tail_exponent(&p).unwrap();
    let s = simulate_branching(&p, 1_000_000, 5);
    let ms: Vec<f64> = (5..=25).map(f64::from).collect();
    let lp: Vec<f64> = ms.iter().map(|&m| s.progeny_tail(m as u64 + 1).0.ln()).collect();
    let slope = line_fit(&ms, &lp).unwrap().slope;
    assert!(slope >= -nu - 0.15 && slope <= -nu + 0.15, "slope {slope}, ν {nu}");
}

#[test]
fn zero_bridge_rate_limits() {
    let b = decay_rate_bound(0.0, 3.0).unwrap();
    assert!(b.nu.is_infinite());
    assert_eq!(b.mu, 3.0);
    assert_eq!(b.gamma_lower, 3.0);
}

#[test]
fn decay_bound_guard_sits_at_mean_one() {
    assert!(decay_rate_bound(0.25, 1.0).is_err());
    assert!(decay_rate_bound(0.3, 1.0).is_err());
    let b = decay_rate_bound(0.2499, 1.0).unwrap();
    assert!(b.gamma_lower > 0.0 && b.gamma_lower < 1e-3);
}

#[test]
fn decay_bound_grows_with_delta() {
    let g: Vec<f64> = [4.1, 6.0, 8.0, 16.0, 32.0, 128.0]
        .iter()
        .map(|&d| decay_rate_bound(1.0, d).unwrap().gamma_lower)
        .collect();
    assert!(g.windows(2).all(|w| w[1] >= w[0]), "{g:?}");
    let b = decay_rate_bound(0.25, 2.0).unwrap();
    assert!((b.nu - 0.146).abs() < 2e-3 && (b.mu - 0.119).abs() < 2e-3, "{b:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponents_match_closed_forms(lambda in 0.01f64..2.0, ratio in 0.05f64..0.95) {
        let delta = 4.0 * lambda / ratio;
        let p = bp(lambda, delta);
        let nu = progeny_tail_exponent(&p).unwrap();
        let mu = lifetime_tail_exponent(&p).unwrap();
        prop_assert!((nu - closed_form_nu(lambda, delta)).abs() <= 1e-6 * nu.max(1.0), "{} vs {}", nu, closed_form_nu(lambda, delta));
        prop_assert!((mu - closed_form_mu(lambda, delta)).abs() <= 1e-6 * mu.max(1.0), "{} vs {}", mu, closed_form_mu(lambda, delta));
    }

    #[test]
    fn pgf_is_increasing_and_convex_on_the_unit_interval(lambda in 0.0f64..3.0, delta in 0.1f64..10.0) {
        let p = bp(lambda, delta);
        let g: Vec<f64> = (0..=100).map(|i| offspring_pgf(&p, i as f64 / 100.0).unwrap()).collect();
        prop_assert!(g.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(g.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-12));
    }

    #[test]
    fn entropy_bound_grows_with_l_and_c(gamma in 2.8f64..8.0, alpha in 0.1f64..3.0, c in 0.1f64..50.0) {
        let mut prev_l = f64::NEG_INFINITY;
        for l in 1..200u32 {
            let b = entropy_bound_uniform(&EntropyBoundInputs::new(gamma, alpha, c, l).unwrap()).unwrap();
            prop_assert!(b.bound >= prev_l - 1e-12);
            prev_l = b.bound;
        }
        let mut prev_c = f64::NEG_INFINITY;
        for i in 0..50 {
            let cc = c * 1.2f64.powi(i);
            let b = entropy_bound_uniform(&EntropyBoundInputs::new(gamma, alpha, cc, 7).unwrap()).unwrap();
            prop_assert!(b.bound >= prev_c - 1e-12);
            prev_c = b.bound;
        }
    }
}

#[test]
fn entropy_bound_near_the_threshold() {
    let g = 4.0 * LN_2 + 1e-6;
    let b = entropy_bound_pipeline(&EntropyBoundInputs::new(g, 1.0, 1.0, 10).unwrap(), 100).unwrap();
    assert!(b.c0 <= 4.0 / 3.0);
    assert!((b.c0 - 16.0 / 15.0).abs() < 1e-6);
    assert!(b.xi > 2.0);
    let below = EntropyBoundInputs::new(4.0 * LN_2, 1.0, 1.0, 10).unwrap();
    assert!(entropy_bound_pipeline(&below, 100).is_err());
}

#[test]
fn rank_cap_branch_is_exact() {
    let inp = EntropyBoundInputs::new(3.0, 2.0, 5.0, 100).unwrap();
    let k = inp.k();
    assert_eq!(k, ((5.0f64.ln() + 2.0 * 100f64.ln()) / 3.0).ceil() as u64);
    for m in 0..=k {
        let b = entropy_bound_pipeline(&inp, m).unwrap();
        assert_eq!(b.bound, 2.0 * m as f64);
        assert_eq!(b.branch, BoundBranch::RankCap);
    }
    assert_eq!(entropy_bound_pipeline(&inp, k + 1).unwrap().branch, BoundBranch::Tail);
}

#[test]
fn entropy_bound_is_logarithmic_in_l() {
    let ratios: Vec<f64> = (3..=20)
        .map(|e| {
            let l = 1u32 << e;
            let b = entropy_bound_uniform(&EntropyBoundInputs::new(3.0, 1.0, 1.0, l).unwrap()).unwrap();
            b.bound / f64::from(l).log2()
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r < 7.0), "{ratios:?}");
    assert!(ratios[ratios.len() - 1] < ratios[0]);
}

#[test]
fn tail_term_dominates_the_brute_force_sum() {
    for (gamma, alpha, c, l) in [(3.0, 1.0, 1.0, 8), (4.8, 2.0, 10.0, 30), (6.0, 0.5, 2.0, 3)] {
        let b = entropy_bound_uniform(&EntropyBoundInputs::new(gamma, alpha, c, l).unwrap()).unwrap();
        let nu = b.nu as u64;
        let sum: f64 = (nu + 1..nu + 2_000_000)
            .map(|j| b.c0_prime * (j as f64).powf(-b.xi))
            .map(|v| if v > 0.0 { -v * v.log2() } else { 0.0 })
            .sum();
        assert!(sum <= b.s2, "γ={gamma}: sum {sum} > bound {}", b.s2);
    }
}

#[test]
fn per_m_bound_drops_when_k_overtakes_m() {
    // For fixed m, growing L (or C) can move m into the rank-cap branch, so
    // only the m-uniform bound is monotone.
    let lo = entropy_bound_pipeline(&EntropyBoundInputs::new(3.0, 1.0, 1.0, 2).unwrap(), 2).unwrap();
    let hi = entropy_bound_pipeline(&EntropyBoundInputs::new(3.0, 1.0, 1.0, 100).unwrap(), 2).unwrap();
    assert_eq!((lo.branch, hi.branch), (BoundBranch::Tail, BoundBranch::RankCap));
    assert!(hi.bound < lo.bound);
}

#[test]
fn entropy_bound_is_not_monotone_in_gamma() {
    // Raising γ lowers K by at most one step but multiplies e^{γ(K+1)} when K
    // stays put, so log₂ν can grow. The stated monotonicity in γ fails.
    let at = |g: f64| entropy_bound_pipeline(&EntropyBoundInputs::new(g, 1.0, 1.0, 50).unwrap(), 10).unwrap();
    let (a, b) = (at(3.5), at(3.9));
    assert_eq!(a.k, b.k);
    assert!(b.bound > a.bound);
}

#[test]
fn eigenvalue_cascade_holds_on_exact_chains() {
    let (theta, l, k) = (0.25, 2usize, 1u64);
    let rhos: Vec<DensityMatrix> = (k as usize..=k as usize + 2)
        .map(|m| {
            let n = 2 * m + l + 1;
            let g = IsingChain::uniform(n, theta, 1.0).unwrap().ground_state().unwrap();
            reduce(&g.vector, block_qubits(m, l), n).unwrap()
        })
        .collect();
    let rep = eigenvalue_tail_check(&rhos, 4.8, k).unwrap();
    assert!(rep.all_ok(), "{:?}", rep.violations);
    assert_eq!(rep.eps.len(), 2);
    // Rank of ρ_1 on three sites is at most 4.
    assert!(rhos[0].spectrum().values[4..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn cascade_flags_a_doctored_spectrum() {
    let a = DensityMatrix::maximally_mixed(8);
    let b = DensityMatrix::maximally_mixed(8);
    // K = 0: a rank-8 state at r = 1 breaks the case (iii) cap of 4.
    let rep = eigenvalue_tail_check(&[a, b], 1.0, 0).unwrap();
    assert!(!rep.case_iii_ok && !rep.all_ok());
}

#[test]
fn exact_exponential_decay_fit() {
    let table: Vec<(f64, f64, f64)> = (1..=6).map(|m| (f64::from(m), (-2.0 * f64::from(m)).exp(), 0.0)).collect();
    let f = fit_decay_rate(&table).unwrap();
    assert!((f.gamma - 2.0).abs() < 1e-9);
    assert!(!f.non_decaying);
}

#[test]
fn noisy_decay_fit_recovers_the_slope() {
    let mut rng = Rng::new(77);
    let mut hits = 0;
    for _ in 0..100 {
        let table: Vec<(f64, f64, f64)> = (1..=6)
            .map(|m| {
                let v = (-1.5 * f64::from(m)).exp();
                (f64::from(m), v * (1.0 + 0.05 * rng.normal()), 0.05 * v)
            })
            .collect();
        let g = fit_decay_rate(&table).unwrap().gamma;
        hits += usize::from((1.35..=1.65).contains(&g));
    }
    assert!(hits >= 95, "{hits}");
}

#[test]
fn constant_input_does_not_decay() {
    let f = fit_decay_rate(&[(1.0, 0.3, 0.01), (2.0, 0.3, 0.01), (3.0, 0.3, 0.01)]).unwrap();
    assert!(f.gamma.abs() < 1e-12);
    assert!(f.non_decaying);
    assert!(fit_decay_rate(&[(1.0, 0.3, 0.01), (2.0, 0.001, 0.01), (3.0, 0.3, 0.01)]).is_err());
}
