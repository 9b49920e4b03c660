//! End-to-end posterior approximation: propose functional values from the
//! prior, weight each by the tilted empirical likelihood of a fresh
//! pseudo-data realization, then resample with replacement.

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::ContinuousCDF;

use crate::betel::{solve_moments, BetelStatus};
use crate::data::{DataMatrix, PseudoData, OPEN_INTERVAL_EPS};
use crate::error::{Error, Result};
use crate::functionals::{pseudo_observations, FunctionalKind, MomentBasis};
use crate::rng::{derive_seed, stream_rng};

// ---------------------------------------------------------------------------
// Marginal sources
// ---------------------------------------------------------------------------

/// Parametric families accepted for marginal posterior draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalFamily {
    /// params: mean, sd
    Normal,
    /// params: log-mean, log-sd
    LogNormal,
    /// params: degrees of freedom, location, scale
    StudentT,
    /// params: rate
    Exponential,
    /// params: lower, upper
    Uniform,
}

impl MarginalFamily {
    pub fn param_count(&self) -> usize {
        match self {
            MarginalFamily::Normal | MarginalFamily::LogNormal | MarginalFamily::Uniform => 2,
            MarginalFamily::StudentT => 3,
            MarginalFamily::Exponential => 1,
        }
    }

    /// CDF transform for one parameter draw; clamped into the open interval.
    pub fn cdf(&self, params: &[f64], x: f64) -> Result<f64> {
        let bad = |reason: String| Error::MarginalConfig { reason };
        let v = match self {
            MarginalFamily::Normal => statrs::distribution::Normal::new(params[0], params[1])
                .map_err(|e| bad(format!("normal({}, {}): {e}", params[0], params[1])))?
                .cdf(x),
            MarginalFamily::LogNormal => statrs::distribution::LogNormal::new(params[0], params[1])
                .map_err(|e| bad(format!("lognormal: {e}")))?
                .cdf(x),
            MarginalFamily::StudentT => {
                statrs::distribution::StudentsT::new(params[1], params[2], params[0])
                    .map_err(|e| bad(format!("student_t: {e}")))?
                    .cdf(x)
            }
            MarginalFamily::Exponential => statrs::distribution::Exp::new(params[0])
                .map_err(|e| bad(format!("exponential: {e}")))?
                .cdf(x),
            MarginalFamily::Uniform => statrs::distribution::Uniform::new(params[0], params[1])
                .map_err(|e| bad(format!("uniform: {e}")))?
                .cdf(x),
        };
        Ok(v.clamp(OPEN_INTERVAL_EPS, 1.0 - OPEN_INTERVAL_EPS))
    }
}

/// Posterior draws of one column's marginal parameters.
#[derive(Debug, Clone)]
pub struct ColumnPosterior {
    pub family: MarginalFamily,
    /// Each inner vector is one parameter draw.
    pub draws: Vec<Vec<f64>>,
}

impl ColumnPosterior {
    pub fn validate(&self) -> Result<()> {
        if self.draws.is_empty() {
            return Err(Error::MarginalConfig {
                reason: "posterior file must supply at least one draw per column".to_string(),
            });
        }
        let want = self.family.param_count();
        if let Some(bad) = self.draws.iter().position(|d| d.len() != want) {
            return Err(Error::MarginalConfig {
                reason: format!(
                    "draw {bad} has {} parameters, {:?} needs {want}",
                    self.draws[bad].len(),
                    self.family
                ),
            });
        }
        Ok(())
    }

    /// Evaluates every draw once so invalid parameter values (negative
    /// scales, inverted bounds) surface before any sampling loop.
    pub fn validate_params(&self) -> Result<()> {
        self.validate()?;
        for (i, draw) in self.draws.iter().enumerate() {
            self.family
                .cdf(draw, 0.5)
                .map_err(|e| Error::MarginalConfig {
                    reason: format!("draw {i}: {e}"),
                })?;
        }
        Ok(())
    }
}

/// Precomputed pseudo-data tensor: `draws` stacked n-by-d matrices.
#[derive(Debug, Clone)]
pub struct PseudoTensor {
    draws: usize,
    n: usize,
    d: usize,
    values: Vec<f64>, // [s][i][j] layout
}

impl PseudoTensor {
    pub fn new(draws: usize, n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if draws == 0 || values.len() != draws * n * d {
            return Err(Error::MarginalConfig {
                reason: format!(
                    "tensor needs draws*n*d = {} values, got {}",
                    draws * n * d,
                    values.len()
                ),
            });
        }
        if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::MarginalConfig {
                reason: "tensor entries must lie in [0,1]".to_string(),
            });
        }
        Ok(Self {
            draws,
            n,
            d,
            values,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    fn get(&self, s: usize, i: usize, j: usize) -> f64 {
        self.values[(s * self.n + i) * self.d + j]
    }
}

/// Where the uniform pseudo-data comes from on each pass.
#[derive(Debug, Clone)]
pub enum MarginalSource {
    /// The data matrix already holds uniform values (known margins).
    KnownUniform,
    /// Rank-based pseudo-observations; deterministic.
    EmpiricalCdf,
    /// Parametric marginal posteriors; one draw index per column per call.
    Parametric(Vec<ColumnPosterior>),
    /// Externally produced pseudo-data; one tensor slice per column per call.
    Tensor(PseudoTensor),
}

impl MarginalSource {
    /// True when repeated draws return identical pseudo-data.
    pub fn is_deterministic(&self) -> bool {
        match self {
            MarginalSource::KnownUniform | MarginalSource::EmpiricalCdf => true,
            MarginalSource::Parametric(cols) => cols.iter().all(|c| c.draws.len() == 1),
            MarginalSource::Tensor(t) => t.draws() == 1,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            MarginalSource::KnownUniform => "known_uniform",
            MarginalSource::EmpiricalCdf => "empirical_cdf",
            MarginalSource::Parametric(_) => "posterior_file",
            MarginalSource::Tensor(_) => "pseudo_tensor",
        }
    }
}

/// One realization of the pseudo-data matrix under the marginal source.
/// Per-column draw indices are re-drawn uniformly (and independently across
/// columns) on every call.
pub fn draw_pseudo_data<R: Rng + ?Sized>(
    data: &DataMatrix,
    source: &MarginalSource,
    rng: &mut R,
) -> Result<PseudoData> {
    let (n, d) = (data.n(), data.d());
    match source {
        MarginalSource::KnownUniform => PseudoData::from_unit_values(data.values().to_vec(), n, d),
        MarginalSource::EmpiricalCdf => pseudo_observations(data),
        MarginalSource::Parametric(cols) => {
            if cols.len() != d {
                return Err(Error::MarginalConfig {
                    reason: format!("{} posterior columns for d = {d} data", cols.len()),
                });
            }
            for c in cols {
                c.validate()?;
            }
            let mut values = vec![0.0f64; n * d];
            for (j, col) in cols.iter().enumerate() {
                let s = rng.random_range(0..col.draws.len());
                let params = &col.draws[s];
                for i in 0..n {
                    values[i * d + j] = col.family.cdf(params, data.get(i, j))?;
                }
            }
            PseudoData::from_unit_values(values, n, d)
        }
        MarginalSource::Tensor(t) => {
            if t.d() != d || t.n() != n {
                return Err(Error::MarginalConfig {
                    reason: format!(
                        "tensor shape ({}, {}) does not match data ({n}, {d})",
                        t.n(),
                        t.d()
                    ),
                });
            }
            let mut values = vec![0.0f64; n * d];
            for j in 0..d {
                let s = rng.random_range(0..t.draws());
                for i in 0..n {
                    values[i * d + j] = t.get(s, i, j);
                }
            }
            PseudoData::from_unit_values(values, n, d)
        }
    }
}

// ---------------------------------------------------------------------------
// Prior and posterior containers
// ---------------------------------------------------------------------------

/// Uniform prior interval over the functional.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PriorSpec {
    pub lower: f64,
    pub upper: f64,
}

impl PriorSpec {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidArgument {
                name: "prior",
                reason: format!("need finite lower < upper, got ({lower}, {upper})"),
            });
        }
        Ok(Self { lower, upper })
    }

    /// U(-1,1) for the rho family, U(0,1) for the tail indices.
    pub fn default_for(kind: &FunctionalKind) -> Self {
        if kind.is_tail() {
            Self {
                lower: 0.0,
                upper: 1.0,
            }
        } else {
            Self {
                lower: -1.0,
                upper: 1.0,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PosteriorSummary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl PosteriorSummary {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Weighted and resampled posterior for one functional.
#[derive(Debug, Clone)]
pub struct WeightedPosterior {
    pub proposals: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub resampled: Vec<f64>,
    pub ess: f64,
    pub summary: PosteriorSummary,
    /// Tilt solves that hit the iteration cap (diagnostic; never fatal).
    pub non_converged: usize,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Type-7 quantile (linear interpolation between order statistics).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let pos = q * (m as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Median and equal-tail interval of a posterior sample at the given level.
pub fn summarize(sample: &[f64], level: f64) -> Result<PosteriorSummary> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument {
            name: "sample",
            reason: "cannot summarize an empty sample".to_string(),
        });
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument {
            name: "level",
            reason: format!("level must lie in (0,1), got {level}"),
        });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let tail = (1.0 - level) / 2.0;
    Ok(PosteriorSummary {
        median: quantile_sorted(&sorted, 0.5),
        lower: quantile_sorted(&sorted, tail),
        upper: quantile_sorted(&sorted, 1.0 - tail),
        level,
    })
}

/// Multinomial resampling proportional to exp(log_weight), max-shifted.
pub fn resample<R: Rng + ?Sized>(
    proposals: &[f64],
    log_weights: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    assert_eq!(proposals.len(), log_weights.len());
    let max = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegeneratePosterior {
            lower: proposals.iter().cloned().fold(f64::INFINITY, f64::min),
            upper: proposals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let mut cumulative = Vec::with_capacity(log_weights.len());
    let mut total = 0.0;
    for &lw in log_weights {
        total += (lw - max).exp();
        cumulative.push(total);
    }
    let out = (0..proposals.len())
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c < target);
            proposals[idx.min(proposals.len() - 1)]
        })
        .collect();
    Ok(out)
}

/// Effective sample size of normalized importance weights: 1 / sum w_i^2.
pub fn effective_sample_size(log_weights: &[f64]) -> f64 {
    let max = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &lw in log_weights {
        let w = (lw - max).exp();
        sum += w;
        sum_sq += w * w;
    }
    sum * sum / sum_sq
}

/// Full sampling-importance-resampling pass for one functional.
///
/// Each proposal b draws its tilt weight on a fresh pseudo-data realization,
/// so marginal uncertainty is integrated across proposals. Iterations run on
/// independent streams derived from `(seed, b)`; the result is identical for
/// any parallelism degree.
pub fn run_abscop(
    data: &DataMatrix,
    source: &MarginalSource,
    kind: &FunctionalKind,
    prior: &PriorSpec,
    proposals: usize,
    level: f64,
    seed: u64,
) -> Result<WeightedPosterior> {
    if proposals < 100 {
        return Err(Error::InvalidArgument {
            name: "proposals",
            reason: format!("need at least 100 proposals, got {proposals}"),
        });
    }
    PriorSpec::new(prior.lower, prior.upper)?;
    if let MarginalSource::Parametric(cols) = source {
        for c in cols {
            c.validate_params()?;
        }
    }
    // A deterministic source admits one shared basis for every proposal.
    let shared_basis = if source.is_deterministic() {
        let pseudo = draw_pseudo_data(data, source, &mut stream_rng(seed, u64::MAX))?;
        Some(MomentBasis::new(kind, &pseudo)?)
    } else {
        // surface configuration errors before the parallel loop
        let probe = draw_pseudo_data(data, source, &mut stream_rng(seed, u64::MAX))?;
        MomentBasis::new(kind, &probe)?;
        None
    };

    let results: Vec<(f64, f64, bool)> = (0..proposals)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let phi = prior.lower + (prior.upper - prior.lower) * rng.random::<f64>();
            let solution = match &shared_basis {
                Some(basis) => solve_moments(&basis.moment_vector(phi)),
                None => {
                    let pseudo = draw_pseudo_data(data, source, &mut rng).expect("probed source");
                    let basis = MomentBasis::new(kind, &pseudo).expect("probed source");
                    solve_moments(&basis.moment_vector(phi))
                }
            };
            (
                phi,
                solution.log_likelihood,
                solution.status == BetelStatus::NonConverged,
            )
        })
        .collect();

    let proposals_vec: Vec<f64> = results.iter().map(|r| r.0).collect();
    let log_weights: Vec<f64> = results.iter().map(|r| r.1).collect();
    let non_converged = results.iter().filter(|r| r.2).count();
    if log_weights.iter().all(|w| !w.is_finite()) {
        return Err(Error::DegeneratePosterior {
            lower: prior.lower,
            upper: prior.upper,
        });
    }

    let mut resample_rng = stream_rng(derive_seed(seed, 0x5152), proposals as u64);
    let resampled = resample(&proposals_vec, &log_weights, &mut resample_rng)?;
    let summary = summarize(&resampled, level)?;
    let ess = effective_sample_size(&log_weights);
    Ok(WeightedPosterior {
        proposals: proposals_vec,
        log_weights,
        resampled,
        ess,
        summary,
        non_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{sample_copula, CopulaFamily, CopulaSpec};
    use crate::functionals::estimate;
    use approx::assert_abs_diff_eq;

    fn uniform_data(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = stream_rng(seed, 0);
        DataMatrix::new((0..n * d).map(|_| rng.random::<f64>()).collect(), n, d).unwrap()
    }

    #[test]
    fn known_uniform_is_identity() {
        let data = uniform_data(20, 2, 31);
        let u =
            draw_pseudo_data(&data, &MarginalSource::KnownUniform, &mut stream_rng(1, 1)).unwrap();
        assert_eq!(u.matrix().values(), data.values());
    }

    #[test]
    fn empirical_mode_delegates_to_pseudo_observations() {
        let data = uniform_data(20, 2, 32);
        let u =
            draw_pseudo_data(&data, &MarginalSource::EmpiricalCdf, &mut stream_rng(1, 2)).unwrap();
        assert_eq!(u, pseudo_observations(&data).unwrap());
    }

    #[test]
    fn single_draw_posterior_is_deterministic() {
        let data = uniform_data(15, 2, 33);
        let source = MarginalSource::Parametric(vec![
            ColumnPosterior {
                family: MarginalFamily::Uniform,
                draws: vec![vec![-0.2, 1.3]],
            },
            ColumnPosterior {
                family: MarginalFamily::Normal,
                draws: vec![vec![0.5, 1.0]],
            },
        ]);
        assert!(source.is_deterministic());
        let a = draw_pseudo_data(&data, &source, &mut stream_rng(9, 1)).unwrap();
        let b = draw_pseudo_data(&data, &source, &mut stream_rng(10, 77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_posterior_draw_is_rejected_upfront() {
        let data = uniform_data(20, 2, 35);
        let bad = MarginalSource::Parametric(vec![
            ColumnPosterior {
                family: MarginalFamily::Normal,
                draws: vec![vec![0.0, 1.0], vec![0.0, -2.0]], // negative sd
            },
            ColumnPosterior {
                family: MarginalFamily::Normal,
                draws: vec![vec![0.0, 1.0]],
            },
        ]);
        let err = run_abscop(
            &data,
            &bad,
            &FunctionalKind::Rho1,
            &PriorSpec::default_for(&FunctionalKind::Rho1),
            200,
            0.95,
            82,
        );
        assert!(matches!(err, Err(Error::MarginalConfig { .. })), "{err:?}");
    }

    #[test]
    fn mismatched_posterior_columns_error() {
        let data = uniform_data(15, 3, 34);
        let source = MarginalSource::Parametric(vec![ColumnPosterior {
            family: MarginalFamily::Normal,
            draws: vec![vec![0.0, 1.0]],
        }]);
        assert!(draw_pseudo_data(&data, &source, &mut stream_rng(1, 1)).is_err());
    }

    #[test]
    fn summarize_order_statistics() {
        let sample: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = summarize(&sample, 0.95).unwrap();
        assert_abs_diff_eq!(s.lower, 3.475, epsilon = 1e-12);
        assert_abs_diff_eq!(s.upper, 97.525, epsilon = 1e-12);
        assert_abs_diff_eq!(s.median, 50.5, epsilon = 1e-12);

        let constant = summarize(&[2.5, 2.5, 2.5], 0.9).unwrap();
        assert_eq!(constant.length(), 0.0);
        assert_eq!(constant.median, 2.5);

        // symmetric sample: median near zero
        let mut rng = stream_rng(30, 0);
        let sym: Vec<f64> = (0..20_000)
            .map(|i| {
                let v = rng.random::<f64>();
                if i % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        assert!(summarize(&sym, 0.95).unwrap().median.abs() < 0.02);
    }

    #[test]
    fn resample_single_finite_weight() {
        let proposals = vec![0.1, 0.2, 0.3];
        let lw = vec![f64::NEG_INFINITY, -3.0, f64::NEG_INFINITY];
        let out = resample(&proposals, &lw, &mut stream_rng(2, 2)).unwrap();
        assert!(out.iter().all(|&x| x == 0.2));
    }

    #[test]
    fn resample_two_point_frequencies() {
        let b = 100_000usize;
        let proposals: Vec<f64> = (0..b).map(|i| if i == 0 { 1.0 } else { 2.0 }).collect();
        // weight 0.9 on proposal 0, 0.1 spread over the rest
        let mut lw = vec![(0.1 / (b as f64 - 1.0)).ln(); b];
        lw[0] = 0.9f64.ln();
        let out = resample(&proposals, &lw, &mut stream_rng(3, 3)).unwrap();
        let freq = out.iter().filter(|&&x| x == 1.0).count() as f64 / b as f64;
        assert!((freq - 0.9).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn resample_all_infinite_is_degenerate() {
        let err = resample(&[0.0, 1.0], &[f64::NEG_INFINITY; 2], &mut stream_rng(4, 4));
        assert!(matches!(err, Err(Error::DegeneratePosterior { .. })));
    }

    #[test]
    fn ess_is_b_for_equal_weights() {
        let lw = vec![-1.234; 500];
        assert_abs_diff_eq!(effective_sample_size(&lw), 500.0, epsilon = 1e-9);
    }

    #[test]
    fn abscop_recovers_spearman_on_clayton_data() {
        let spec = CopulaSpec::new(CopulaFamily::Clayton, 1.076, 2).unwrap();
        let u = sample_copula(&spec, 1000, &mut stream_rng(41, 0)).unwrap();
        let data = DataMatrix::new(u.matrix().values().to_vec(), 1000, 2).unwrap();
        let post = run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &FunctionalKind::SpearmanRho,
            &PriorSpec::default_for(&FunctionalKind::SpearmanRho),
            4000,
            0.95,
            77,
        )
        .unwrap();
        assert!(
            (post.summary.median - 0.5).abs() < 0.06,
            "median {}",
            post.summary.median
        );
        assert!(post.summary.covers(0.5));
        assert!(post.ess > 100.0);
        // every resampled value respects the prior support
        assert!(post.resampled.iter().all(|&p| (-1.0..=1.0).contains(&p)));
    }

    #[test]
    fn abscop_tail_interval_covers_gumbel_upper_index() {
        let spec = CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap();
        let u = sample_copula(&spec, 1000, &mut stream_rng(46, 0)).unwrap();
        let data = DataMatrix::new(u.matrix().values().to_vec(), 1000, 2).unwrap();
        let kind = FunctionalKind::LambdaUpper { k: None };
        let post = run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &kind,
            &PriorSpec::default_for(&kind),
            10_000,
            0.95,
            81,
        )
        .unwrap();
        // population upper index is 2 - 2^(1/theta)
        let truth = 2.0 - (2.0f64).powf(0.5);
        assert!(
            post.summary.covers(truth),
            "{:?} misses {truth}",
            post.summary
        );
    }

    #[test]
    fn abscop_interval_contains_zero_under_independence() {
        let data = uniform_data(800, 2, 42);
        let post = run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &FunctionalKind::SpearmanRho,
            &PriorSpec::default_for(&FunctionalKind::SpearmanRho),
            2000,
            0.95,
            78,
        )
        .unwrap();
        assert!(post.summary.covers(0.0));
    }

    #[test]
    fn best_weight_sits_near_the_point_estimate() {
        let spec = CopulaSpec::new(CopulaFamily::Gumbel, 2.0, 2).unwrap();
        let u = sample_copula(&spec, 1000, &mut stream_rng(43, 0)).unwrap();
        let data = DataMatrix::new(u.matrix().values().to_vec(), 1000, 2).unwrap();
        let kind = FunctionalKind::SpearmanRho;
        let post = run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &kind,
            &PriorSpec::default_for(&kind),
            5000,
            0.95,
            79,
        )
        .unwrap();
        let best = post
            .log_weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| post.proposals[i])
            .unwrap();
        let est = estimate(&kind, &pseudo_observations(&data).unwrap()).unwrap();
        assert!((best - est).abs() < 0.05, "best {best} vs estimate {est}");
    }

    #[test]
    fn degenerate_prior_range_errors() {
        // data confined to the upper-right quadrant: the joint lower tail is
        // empty, so every positive tail-index proposal is infeasible
        let mut rng = stream_rng(44, 0);
        let values: Vec<f64> = (0..200).map(|_| 0.5 + 0.5 * rng.random::<f64>()).collect();
        let data = DataMatrix::new(values, 100, 2).unwrap();
        let err = run_abscop(
            &data,
            &MarginalSource::KnownUniform,
            &FunctionalKind::LambdaLower { k: Some(5) },
            &PriorSpec::new(0.5, 0.9).unwrap(),
            200,
            0.95,
            80,
        );
        assert!(matches!(err, Err(Error::DegeneratePosterior { .. })));
    }

    #[test]
    fn seed_determinism() {
        let data = uniform_data(150, 2, 45);
        let run = || {
            run_abscop(
                &data,
                &MarginalSource::EmpiricalCdf,
                &FunctionalKind::Rho1,
                &PriorSpec::default_for(&FunctionalKind::Rho1),
                500,
                0.95,
                99,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.proposals, b.proposals);
        assert_eq!(a.log_weights, b.log_weights);
        assert_eq!(a.resampled, b.resampled);
    }
}
