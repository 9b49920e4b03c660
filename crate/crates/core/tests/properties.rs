//! Standalone property suite: rank invariance, Frechet bounds, sampler/CDF
//! coherence, resampling goodness of fit, consistency of the estimators and
//! determinism across parallelism degrees.

use abscop_core::*;
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn study_specs() -> Vec<CopulaSpec> {
    vec![
        CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap(),
        CopulaSpec::new(CopulaFamily::Frank, 3.45, 2).unwrap(),
        CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap(),
        CopulaSpec::new(CopulaFamily::Gaussian, pearson_from_spearman(0.8), 2).unwrap(),
        CopulaSpec::new(CopulaFamily::Independence, 0.0, 2).unwrap(),
    ]
}

#[test]
fn frechet_bounds_hold_everywhere() {
    let mut rng = rng::stream_rng(101, 0);
    let mut specs = study_specs();
    specs.push(CopulaSpec::new(CopulaFamily::Clayton, -0.7, 2).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Frank, -3.45, 2).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Clayton, 1.076, 4).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Gaussian, -0.3, 3).unwrap());
    for spec in &specs {
        for _ in 0..1000 {
            let u: Vec<f64> = (0..spec.dim).map(|_| rng.random::<f64>()).collect();
            let c = copula_cdf(spec, &u).unwrap();
            let lower = (u.iter().sum::<f64>() - spec.dim as f64 + 1.0).max(0.0);
            let upper = u.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(
                (lower - 1e-12..=upper + 1e-12).contains(&c),
                "{spec:?} at {u:?}: C = {c}, bounds [{lower}, {upper}]"
            );
        }
    }
}

#[test]
fn sampler_and_cdf_agree() {
    // empirical CDF of 10^6 draws vs copula_cdf at 20 points, 3 sigma
    let n = 1_000_000usize;
    let mut specs = study_specs();
    specs.push(CopulaSpec::new(CopulaFamily::Clayton, 1.076, 4).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 4).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Frank, 3.45, 4).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Gaussian, 0.5, 3).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Clayton, -0.7, 2).unwrap());
    specs.push(CopulaSpec::new(CopulaFamily::Frank, -3.45, 2).unwrap());
    for (si, spec) in specs.iter().enumerate() {
        let u = sample_copula(spec, n, &mut rng::stream_rng(102, si as u64)).unwrap();
        let mut point_rng = rng::stream_rng(103, si as u64);
        // the 20 points share one sample, so their z-scores are correlated;
        // the median tracks the 3-sigma coherence target while a hard 4-sigma
        // cap guards every point
        let mut zs = Vec::with_capacity(20);
        for _ in 0..20 {
            // avoid extreme corners where the count variance vanishes
            let point: Vec<f64> = (0..spec.dim)
                .map(|_| 0.05 + 0.9 * point_rng.random::<f64>())
                .collect();
            let c = copula_cdf(spec, &point).unwrap();
            let hits = (0..n)
                .filter(|&i| (0..spec.dim).all(|j| u.get(i, j) <= point[j]))
                .count();
            let freq = hits as f64 / n as f64;
            let se = (c * (1.0 - c) / n as f64).sqrt().max(1e-9);
            let z = (freq - c).abs() / se;
            assert!(
                z <= 4.0,
                "{spec:?} at {point:?}: freq {freq} vs cdf {c} (z {z:.2})"
            );
            zs.push(z);
        }
        zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(zs[10] <= 3.0, "{spec:?}: median z-score {}", zs[10]);
    }
}

#[test]
fn estimators_are_rank_invariant() {
    let spec = CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap();
    let u = sample_copula(&spec, 400, &mut rng::stream_rng(104, 0)).unwrap();
    let raw = DataMatrix::new(u.matrix().values().to_vec(), 400, 2).unwrap();
    // strictly increasing, wildly different margins
    let transformed = DataMatrix::new(
        (0..400)
            .flat_map(|i| {
                let r = raw.row(i);
                [r[0].powi(3) * 10.0 + r[0], (5.0 * r[1]).exp()]
            })
            .collect(),
        400,
        2,
    )
    .unwrap();
    let pa = pseudo_observations(&raw).unwrap();
    let pb = pseudo_observations(&transformed).unwrap();
    for kind in [
        FunctionalKind::SpearmanRho,
        FunctionalKind::Rho1,
        FunctionalKind::Rho2,
        FunctionalKind::LambdaUpper { k: None },
        FunctionalKind::LambdaLower { k: None },
    ] {
        let a = estimate(&kind, &pa).unwrap();
        let b = estimate(&kind, &pb).unwrap();
        assert!((a - b).abs() < 1e-14, "{kind:?}: {a} vs {b}");
    }
}

#[test]
fn consistency_sweep_at_large_n() {
    // estimates at n = 10^5 fall within 3 bootstrap standard errors of the
    // population oracle for each experimental design
    let n = 100_000usize;
    let cases: Vec<(CopulaSpec, FunctionalKind)> = vec![
        (
            CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap(),
            FunctionalKind::SpearmanRho,
        ),
        (
            CopulaSpec::new(CopulaFamily::Frank, 3.45, 2).unwrap(),
            FunctionalKind::SpearmanRho,
        ),
        (
            CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap(),
            FunctionalKind::SpearmanRho,
        ),
        (
            CopulaSpec::new(CopulaFamily::Gaussian, pearson_from_spearman(0.8), 2).unwrap(),
            FunctionalKind::SpearmanRho,
        ),
        (
            CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap(),
            FunctionalKind::LambdaLower { k: None },
        ),
        (
            CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap(),
            FunctionalKind::LambdaUpper { k: None },
        ),
        (
            CopulaSpec::new(CopulaFamily::Clayton, 1.076, 6).unwrap(),
            FunctionalKind::Rho1,
        ),
        (
            CopulaSpec::new(CopulaFamily::Clayton, 1.076, 6).unwrap(),
            FunctionalKind::Rho2,
        ),
    ];
    for (ci, (spec, kind)) in cases.iter().enumerate() {
        let truth = true_functional(spec, kind).unwrap();
        let u = sample_copula(spec, n, &mut rng::stream_rng(105, ci as u64)).unwrap();
        let est = estimate(kind, &u).unwrap();
        // bootstrap SE of the estimator itself
        let mut boot_rng = rng::stream_rng(106, ci as u64);
        let reps = 30;
        let d = spec.dim;
        let mut boots = Vec::with_capacity(reps);
        let mut rows = vec![0.0f64; n * d];
        for _ in 0..reps {
            for i in 0..n {
                let pick = boot_rng.random_range(0..n);
                rows[i * d..(i + 1) * d].copy_from_slice(u.row(pick));
            }
            let resampled = DataMatrix::new(rows.clone(), n, d).unwrap();
            boots.push(estimate(kind, &pseudo_observations(&resampled).unwrap()).unwrap());
        }
        let mean = boots.iter().sum::<f64>() / reps as f64;
        let se =
            (boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        // tail estimators carry O(k/n) threshold bias on top of noise
        let slack = if kind.is_tail() { 0.02 } else { 1e-3 };
        assert!(
            (est - truth).abs() <= 3.0 * se + slack,
            "{:?} {kind:?}: est {est} truth {truth} se {se}",
            spec.family
        );
    }
}

#[test]
fn empirical_copula_respects_frechet_bounds() {
    // on rank pseudo-observations, where the counts are capped by the rank
    // grid rather than by sampling noise
    let spec = CopulaSpec::new(CopulaFamily::Frank, 3.45, 3).unwrap();
    let raw = sample_copula(&spec, 500, &mut rng::stream_rng(107, 0)).unwrap();
    let u = pseudo_observations(raw.matrix()).unwrap();
    let mut rng = rng::stream_rng(107, 1);
    for _ in 0..500 {
        let point: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let c = empirical_copula_at(&u, &point);
        let lower = (point.iter().sum::<f64>() - 2.0).max(0.0);
        let upper = point.iter().cloned().fold(f64::INFINITY, f64::min);
        // rank granularity costs up to 1/(n+1) per coordinate against the
        // continuous bounds
        assert!(
            c >= lower - 3.0 / 500.0 - 1e-12 && c <= upper + 1.0 / 500.0 + 1e-12,
            "C = {c} outside [{lower}, {upper}] at {point:?}"
        );
    }
}

#[test]
fn exchangeability_of_archimedean_samples() {
    // rank-sum test comparing a pairwise statistic before and after a
    // coordinate rotation, across independent replicates
    let spec = CopulaSpec::new(CopulaFamily::Clayton, 1.076, 3).unwrap();
    let reps = 100;
    let mut s_orig = Vec::with_capacity(reps);
    let mut s_perm = Vec::with_capacity(reps);
    for r in 0..reps {
        let a = sample_copula(&spec, 300, &mut rng::stream_rng(108, r as u64)).unwrap();
        let b = sample_copula(&spec, 300, &mut rng::stream_rng(109, r as u64)).unwrap();
        let pair_rho = |m: &PseudoData, c0: usize, c1: usize| {
            let vals: Vec<f64> = (0..m.n())
                .flat_map(|i| [m.get(i, c0), m.get(i, c1)])
                .collect();
            let p = PseudoData::from_unit_values(vals, m.n(), 2).unwrap();
            estimate(&FunctionalKind::SpearmanRho, &p).unwrap()
        };
        s_orig.push(pair_rho(&a, 0, 2));
        s_perm.push(pair_rho(&b, 2, 1)); // rotated coordinates
    }
    // Wilcoxon rank-sum normal approximation
    let mut pooled: Vec<(f64, usize)> = s_orig
        .iter()
        .map(|&v| (v, 0usize))
        .chain(s_perm.iter().map(|&v| (v, 1usize)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let w: f64 = pooled
        .iter()
        .enumerate()
        .filter(|(_, (_, g))| *g == 0)
        .map(|(i, _)| (i + 1) as f64)
        .sum();
    let n1 = reps as f64;
    let n2 = reps as f64;
    let mean = n1 * (n1 + n2 + 1.0) / 2.0;
    let sd = (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt();
    let z = (w - mean) / sd;
    assert!(z.abs() < 3.29, "rank-sum z = {z}");
}

#[test]
fn sir_uniform_weights_pass_chi_square() {
    let b = 2000usize;
    let proposals: Vec<f64> = (0..b).map(|i| i as f64).collect();
    let log_weights = vec![-1.0; b];
    let out = resample(&proposals, &log_weights, &mut rng::stream_rng(110, 0)).unwrap();
    let bins = 20usize;
    let mut counts = vec![0usize; bins];
    for v in out {
        counts[(v as usize * bins) / b] += 1;
    }
    let expected = b as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2 {chi2}, p {p}");
}

#[test]
fn dual_residual_tolerance_on_random_vectors() {
    let mut rng = rng::stream_rng(111, 0);
    for _ in 0..100 {
        let n = rng.random_range(5..400);
        let scale = 10.0f64.powi(rng.random_range(-4..5));
        let h: Vec<f64> = (0..n)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
            .collect();
        let sol = solve_moments(&h);
        if sol.status != BetelStatus::Converged || sol.probabilities.is_empty() {
            continue;
        }
        let resid: f64 = sol.probabilities.iter().zip(&h).map(|(p, x)| p * x).sum();
        let hmax = h.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!(
            resid.abs() <= 1e-8 * hmax,
            "residual {resid} at scale {hmax}"
        );
    }
}

#[test]
fn engine_is_deterministic_across_parallelism_degrees() {
    let spec = CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap();
    let u = sample_copula(&spec, 400, &mut rng::stream_rng(112, 0)).unwrap();
    let data = DataMatrix::new(u.matrix().values().to_vec(), 400, 2).unwrap();
    let run = || {
        run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &FunctionalKind::SpearmanRho,
            &PriorSpec::default_for(&FunctionalKind::SpearmanRho),
            800,
            0.95,
            2024,
        )
        .unwrap()
    };
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(serial.proposals, parallel.proposals);
    assert_eq!(serial.log_weights, parallel.log_weights);
    assert_eq!(serial.resampled, parallel.resampled);
    assert_eq!(serial.summary, parallel.summary);
}

#[test]
fn marginal_uncertainty_widens_intervals() {
    // dispersed posterior draws vs the same file collapsed to its mean, on
    // 20 seeds; the dispersed source must not produce shorter intervals in
    // more than 4 of them
    let spec = CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap();
    let mut wins = 0usize;
    for seed in 0..20u64 {
        let u = sample_copula(&spec, 300, &mut rng::stream_rng(113, seed)).unwrap();
        // latent data on the normal scale; margins N(0, 1)
        let normal = statrs::distribution::Normal::standard();
        use statrs::distribution::ContinuousCDF as _;
        let data = DataMatrix::new(
            u.matrix()
                .values()
                .iter()
                .map(|&p| normal.inverse_cdf(p))
                .collect(),
            300,
            2,
        )
        .unwrap();
        let dispersed_draws: Vec<Vec<f64>> =
            (0..40).map(|i| vec![-0.4 + 0.02 * i as f64, 1.0]).collect();
        let mean_draw = vec![vec![-0.01, 1.0]];
        let column = |draws: Vec<Vec<f64>>| ColumnPosterior {
            family: MarginalFamily::Normal,
            draws,
        };
        let dispersed = MarginalSource::Parametric(vec![
            column(dispersed_draws.clone()),
            column(dispersed_draws.clone()),
        ]);
        let collapsed =
            MarginalSource::Parametric(vec![column(mean_draw.clone()), column(mean_draw.clone())]);
        let run = |source: &MarginalSource| {
            run_abscop(
                &data,
                source,
                &FunctionalKind::Rho1,
                &PriorSpec::default_for(&FunctionalKind::Rho1),
                1500,
                0.95,
                500 + seed,
            )
            .unwrap()
            .summary
            .length()
        };
        if run(&dispersed) >= run(&collapsed) {
            wins += 1;
        }
    }
    assert!(wins >= 16, "dispersed source wider in only {wins}/20 seeds");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranks_sum_identity(col in prop::collection::vec(-1e3f64..1e3, 1..80)) {
        let r = ranks(&col);
        let n = col.len() as f64;
        let total: f64 = r.iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
        prop_assert!(r.iter().all(|&x| (1.0..=n).contains(&x)));
    }

    #[test]
    fn pseudo_observations_stay_interior(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)
    ) {
        let data = DataMatrix::from_rows(&rows).unwrap();
        let u = pseudo_observations(&data).unwrap();
        for i in 0..u.n() {
            for j in 0..u.d() {
                prop_assert!(u.get(i, j) > 0.0 && u.get(i, j) < 1.0);
            }
        }
    }

    #[test]
    fn empirical_copula_monotone_in_each_coordinate(
        seed in 0u64..50,
        base in 0.05f64..0.9,
        bump in 0.01f64..0.1,
    ) {
        let spec = CopulaSpec::new(CopulaFamily::Frank, 3.45, 2).unwrap();
        let u = sample_copula(&spec, 60, &mut rng::stream_rng(114, seed)).unwrap();
        let c0 = empirical_copula_at(&u, &[base, 0.5]);
        let c1 = empirical_copula_at(&u, &[(base + bump).min(1.0), 0.5]);
        prop_assert!(c1 >= c0);
        let c2 = empirical_copula_at(&u, &[0.5, base]);
        let c3 = empirical_copula_at(&u, &[0.5, (base + bump).min(1.0)]);
        prop_assert!(c3 >= c2);
    }

    #[test]
    fn moment_mean_matches_estimate_offset(seed in 0u64..100, phi in -0.9f64..0.9) {
        let spec = CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap();
        let u = sample_copula(&spec, 50, &mut rng::stream_rng(115, seed)).unwrap();
        for kind in [FunctionalKind::SpearmanRho, FunctionalKind::Rho1, FunctionalKind::Rho2] {
            let est = estimate(&kind, &u).unwrap();
            let mv = moment_vector(&kind, &u, phi).unwrap();
            let mean = mv.h.iter().sum::<f64>() / mv.h.len() as f64;
            prop_assert!((mean - (est - phi)).abs() < 1e-10);
        }
    }
}
