//! Frequentist competitors and the fully parametric Bayesian comparison:
//! the plug-in asymptotic variance of the rank correlation, bootstrap
//! intervals, and a random-walk posterior sampler for bivariate copula
//! parameters.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::OnceLock;

use crate::copula::{log_density_unchecked, true_functional, CopulaFamily, CopulaSpec};
use crate::data::{DataMatrix, PseudoData};
use crate::error::{Error, Result};
use crate::functionals::{estimate, pseudo_observations, FunctionalKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqMethod {
    AsymptoticRho,
    Bootstrap,
}

/// Point estimate with a variance that may legally be negative: negativity
/// of the plug-in is a reportable outcome, not a failure.
#[derive(Debug, Clone, Copy)]
pub struct FrequentistInterval {
    pub point: f64,
    /// Estimated variance of the point estimator (already on the 1/n scale).
    pub variance: f64,
    pub interval: Option<(f64, f64)>,
    pub method: FreqMethod,
    pub valid: bool,
}

// ---------------------------------------------------------------------------
// Plug-in asymptotic variance of the rank correlation
// ---------------------------------------------------------------------------

/// Plug-in estimate of the asymptotic variance of sqrt(n) times the rank
/// correlation: 144(-9 t1^2 + t2 + 2 t3 + 2 t4 + 2 t5), returned unclipped.
///
/// t1, t2 are single-index means; t3-t5 are V-statistics over ordered pairs
/// (i, j), i != j, with empirical-CDF plug-ins, evaluated in O(n log n) via
/// suffix sums and a Fenwick tree. The third term couples the observations
/// through the joint survival function.
pub fn rho_asymptotic_variance(pseudo: &PseudoData) -> Result<f64> {
    let t = rho_variance_components(pseudo)?;
    Ok(144.0 * (-9.0 * t[0] * t[0] + t[1] + 2.0 * (t[2] + t[3] + t[4])))
}

/// The five plug-in components feeding the variance formula.
pub fn rho_variance_components(pseudo: &PseudoData) -> Result<[f64; 5]> {
    if pseudo.d() != 2 {
        return Err(Error::UnsupportedDimension {
            what: "rho_asymptotic_variance",
            dim: pseudo.d(),
            reason: "the rank-correlation variance is bivariate".to_string(),
        });
    }
    let n = pseudo.n();
    if n < 4 {
        return Err(Error::InvalidArgument {
            name: "n",
            reason: "variance plug-in needs n >= 4".to_string(),
        });
    }
    let nf = n as f64;
    let cx = max_ranks(&pseudo.column(0));
    let cy = max_ranks(&pseudo.column(1));
    let f1: Vec<f64> = cx.iter().map(|&c| c as f64 / nf).collect();
    let f2: Vec<f64> = cy.iter().map(|&c| c as f64 / nf).collect();
    let a: Vec<f64> = f1.iter().map(|v| 1.0 - v).collect();
    let b: Vec<f64> = f2.iter().map(|v| 1.0 - v).collect();

    let t1 = (0..n).map(|i| f1[i] * f2[i]).sum::<f64>() / nf;
    let t2 = (0..n).map(|i| (a[i] * b[i]).powi(2)).sum::<f64>() / nf;

    let pairs = nf * (nf - 1.0);

    // t3: sum over ordered pairs of survival(x_i, y_j) * a_j * b_i.
    // Expand survival(x_i, y_j) = (n - cx_i - cy_j + T_ij)/n and use
    // sum_{ij} b_i a_j T_ij = sum_k BX_k AY_k with suffix sums.
    let bx = suffix_sums_by_rank(&cx, &b, n); // BX[k] = sum_{i: cx_i >= k} b_i
    let ay = suffix_sums_by_rank(&cy, &a, n);
    let sum_a: f64 = a.iter().sum();
    let sum_b: f64 = b.iter().sum();
    let sum_b_cx: f64 = (0..n).map(|i| b[i] * cx[i] as f64).sum();
    let sum_a_cy: f64 = (0..n).map(|j| a[j] * cy[j] as f64).sum();
    let coupling: f64 = (0..n).map(|k| bx[cx[k]] * ay[cy[k]]).sum();
    let s3_all = (nf * sum_b * sum_a - sum_b_cx * sum_a - sum_b * sum_a_cy + coupling) / nf;
    let t_diag = dominance_counts(&cx, &cy);
    let s3_diag: f64 = (0..n)
        .map(|i| (nf - cx[i] as f64 - cy[i] as f64 + t_diag[i] as f64) / nf * a[i] * b[i])
        .sum();
    let t3 = (s3_all - s3_diag) / pairs;

    let t4 = max_rank_pair_sum(&cx, &b, n) / pairs;
    let t5 = max_rank_pair_sum(&cy, &a, n) / pairs;
    Ok([t1, t2, t3, t4, t5])
}

/// Ranks with ties assigned the maximum rank of the tie group, so that
/// x_k <= x_i iff rank_k <= rank_i.
fn max_ranks(column: &[f64]) -> Vec<usize> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| column[p].partial_cmp(&column[q]).expect("no NaN"));
    let mut out = vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && column[order[j + 1]] == column[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            out[idx] = j + 1;
        }
        i = j + 1;
    }
    out
}

/// suffix[k] = sum of weights over observations with rank >= k, k in 1..=n.
fn suffix_sums_by_rank(rank: &[usize], weight: &[f64], n: usize) -> Vec<f64> {
    let mut bucket = vec![0.0f64; n + 2];
    for (r, w) in rank.iter().zip(weight) {
        bucket[*r] += w;
    }
    let mut out = vec![0.0f64; n + 2];
    for k in (1..=n).rev() {
        out[k] = out[k + 1] + bucket[k];
    }
    out
}

/// sum over ordered pairs i != j of (1 - max(rank_i, rank_j)/n) w_i w_j,
/// grouping rank ties so the maximum is taken exactly.
fn max_rank_pair_sum(rank: &[usize], weight: &[f64], n: usize) -> f64 {
    let nf = n as f64;
    let mut order: Vec<usize> = (0..rank.len()).collect();
    order.sort_by_key(|&i| rank[i]);
    let mut prefix = 0.0f64; // weights with strictly smaller rank
    let mut total = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && rank[order[j + 1]] == rank[order[i]] {
            j += 1;
        }
        let m = 1.0 - rank[order[i]] as f64 / nf;
        let group: Vec<f64> = order[i..=j].iter().map(|&idx| weight[idx]).collect();
        let gsum: f64 = group.iter().sum();
        let gsq: f64 = group.iter().map(|w| w * w).sum();
        total += m * (2.0 * gsum * prefix + gsum * gsum - gsq);
        prefix += gsum;
        i = j + 1;
    }
    total
}

/// T_ii = #{k : x_k <= x_i and y_k <= y_i} for every i, via a Fenwick tree
/// over the y-ranks swept in x-rank order (tie groups handled jointly).
fn dominance_counts(cx: &[usize], cy: &[usize]) -> Vec<usize> {
    let n = cx.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| cx[i]);
    let mut fenwick = Fenwick::new(n);
    let mut out = vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && cx[order[j + 1]] == cx[order[i]] {
            j += 1;
        }
        let group = &order[i..=j];
        let mut group_cy: Vec<usize> = group.iter().map(|&idx| cy[idx]).collect();
        group_cy.sort_unstable();
        for &idx in group {
            let within = group_cy.partition_point(|&c| c <= cy[idx]);
            out[idx] = fenwick.prefix(cy[idx]) + within;
        }
        for &idx in group {
            fenwick.add(cy[idx]);
        }
        i = j + 1;
    }
    out
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> usize {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Interval construction
// ---------------------------------------------------------------------------

/// Confidence interval for the functional.
///
/// `AsymptoticRho` divides the plug-in asymptotic variance by n and refuses
/// the interval when the estimate is negative. `Bootstrap` resamples rows,
/// recomputes pseudo-observations and the estimate per replicate, and scales
/// the replicate variance by 1/n — reproducing the severely narrow intervals
/// this procedure is known for on these functionals.
pub fn freq_interval<R: Rng + ?Sized>(
    kind: &FunctionalKind,
    pseudo: &PseudoData,
    level: f64,
    method: FreqMethod,
    boot_reps: usize,
    rng: &mut R,
) -> Result<FrequentistInterval> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument {
            name: "level",
            reason: format!("level must lie in (0,1), got {level}"),
        });
    }
    let n = pseudo.n();
    let point = estimate(kind, pseudo)?;
    let variance = match method {
        FreqMethod::AsymptoticRho => {
            if !matches!(kind, FunctionalKind::SpearmanRho) {
                return Err(Error::InvalidArgument {
                    name: "method",
                    reason: "asymptotic_rho applies to the bivariate rank correlation only"
                        .to_string(),
                });
            }
            rho_asymptotic_variance(pseudo)? / n as f64
        }
        FreqMethod::Bootstrap => {
            if boot_reps < 2 {
                return Err(Error::InvalidArgument {
                    name: "boot_reps",
                    reason: "need at least 2 bootstrap replicates".to_string(),
                });
            }
            let d = pseudo.d();
            let mut estimates = Vec::with_capacity(boot_reps);
            let mut rows = vec![0.0f64; n * d];
            for _ in 0..boot_reps {
                for i in 0..n {
                    let pick = rng.random_range(0..n);
                    rows[i * d..(i + 1) * d].copy_from_slice(pseudo.row(pick));
                }
                let resampled = DataMatrix::new(rows.clone(), n, d)?;
                estimates.push(estimate(kind, &pseudo_observations(&resampled)?)?);
            }
            let mean = estimates.iter().sum::<f64>() / boot_reps as f64;
            let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
                / (boot_reps as f64 - 1.0);
            var / n as f64
        }
    };
    let valid = variance >= 0.0;
    let interval = if valid {
        let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
        let half = z * variance.sqrt();
        Some((point - half, point + half))
    } else {
        None
    };
    Ok(FrequentistInterval {
        point,
        variance,
        interval,
        method,
        valid,
    })
}

// ---------------------------------------------------------------------------
// Parametric Bayes: random-walk posterior for the copula parameter
// ---------------------------------------------------------------------------

/// Truncated normal prior; infinite bounds express one-sided truncation and
/// the plain normal.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TruncNormalPrior {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncNormalPrior {
    pub fn log_density_unnorm(&self, theta: f64) -> f64 {
        if theta < self.lower || theta > self.upper {
            return f64::NEG_INFINITY;
        }
        let z = (theta - self.mean) / self.sd;
        -0.5 * z * z
    }

    /// The priors used in the parametric comparison.
    pub fn default_for(family: CopulaFamily) -> Result<Self> {
        match family {
            CopulaFamily::Clayton => Ok(Self {
                mean: 0.0,
                sd: 10.0,
                lower: -1.0,
                upper: f64::INFINITY,
            }),
            CopulaFamily::Gumbel => Ok(Self {
                mean: 1.0,
                sd: 10.0,
                lower: 1.0,
                upper: f64::INFINITY,
            }),
            CopulaFamily::Frank => Ok(Self {
                mean: 0.0,
                sd: 10.0,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            }),
            other => Err(Error::InvalidArgument {
                name: "family",
                reason: format!("no parametric-posterior prior defined for {other}"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThetaChain {
    pub family: CopulaFamily,
    /// Post burn-in draws.
    pub draws: Vec<f64>,
    pub acceptance_rate: f64,
}

/// Random-walk Metropolis targeting prior(theta) * prod_i c(u_i; theta) on
/// bivariate pseudo-data rows. The step size adapts toward 0.3 acceptance
/// during burn-in and is frozen afterwards. An empty row slice leaves the
/// prior as the target.
pub fn mh_theta_chain<R: Rng + ?Sized>(
    rows: &[[f64; 2]],
    family: CopulaFamily,
    prior: &TruncNormalPrior,
    iters: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<ThetaChain> {
    if !matches!(
        family,
        CopulaFamily::Clayton | CopulaFamily::Frank | CopulaFamily::Gumbel
    ) {
        return Err(Error::InvalidArgument {
            name: "family",
            reason: format!("parametric posterior supports the Archimedean models, not {family}"),
        });
    }
    if iters <= burn_in {
        return Err(Error::InvalidArgument {
            name: "iters",
            reason: format!("need iters > burn_in ({iters} <= {burn_in})"),
        });
    }
    let domain_lower = match family {
        CopulaFamily::Clayton => -1.0,
        CopulaFamily::Gumbel => 1.0,
        _ => f64::NEG_INFINITY,
    };
    let log_target = |theta: f64| -> f64 {
        if theta <= domain_lower {
            return f64::NEG_INFINITY;
        }
        let lp = prior.log_density_unnorm(theta);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        let mut ll = 0.0;
        for row in rows {
            ll += log_density_unchecked(family, theta, row[0], row[1]);
            if ll == f64::NEG_INFINITY {
                return ll;
            }
        }
        lp + ll
    };

    let mut theta = (domain_lower + 0.5).max(prior.mean.min(prior.upper));
    if !log_target(theta).is_finite() {
        theta = domain_lower + 0.5;
    }
    let mut current = log_target(theta);
    let mut step = 0.5f64;
    let mut draws = Vec::with_capacity(iters - burn_in);
    let mut accepted_post = 0usize;
    let mut window_accepts = 0usize;
    const WINDOW: usize = 50;
    let normal = rand_distr::StandardNormal;
    for it in 0..iters {
        let proposal = theta + step * rng.sample::<f64, _>(normal);
        let cand = log_target(proposal);
        let accept = cand.is_finite() && {
            let lr = cand - current;
            lr >= 0.0 || rng.random::<f64>().ln() < lr
        };
        if accept {
            theta = proposal;
            current = cand;
        }
        if it < burn_in {
            if accept {
                window_accepts += 1;
            }
            if (it + 1) % WINDOW == 0 {
                let rate = window_accepts as f64 / WINDOW as f64;
                step = (step * (rate - 0.3).exp()).clamp(1e-4, 50.0);
                window_accepts = 0;
            }
        } else {
            if accept {
                accepted_post += 1;
            }
            draws.push(theta);
        }
    }
    let kept = iters - burn_in;
    let acceptance_rate = accepted_post as f64 / kept as f64;
    if accepted_post == 0 && kept >= 100 {
        return Err(Error::Tuning {
            reason: format!(
                "zero acceptance over {kept} post-burn-in iterations (family {family}, step {step:.3e}, theta {theta:.4})"
            ),
        });
    }
    Ok(ThetaChain {
        family,
        draws,
        acceptance_rate,
    })
}

// ---------------------------------------------------------------------------
// Mapping parameter chains to the rank correlation scale
// ---------------------------------------------------------------------------

/// rho(theta) for the chain's family, evaluated through a cached monotone
/// interpolation of the population-value oracle.
pub fn chain_to_rho(chain: &ThetaChain) -> Vec<f64> {
    chain
        .draws
        .iter()
        .map(|&t| spearman_from_theta(chain.family, t))
        .collect()
}

/// Population rank correlation as a function of the family parameter,
/// linearly interpolated on a dense precomputed grid (clamped outside).
pub fn spearman_from_theta(family: CopulaFamily, theta: f64) -> f64 {
    match family {
        CopulaFamily::Independence => 0.0,
        CopulaFamily::Gaussian => {
            6.0 / std::f64::consts::PI * (theta.clamp(-1.0, 1.0) / 2.0).asin()
        }
        CopulaFamily::Frank => {
            // odd function of theta; the grid covers the positive half
            let curve = frank_curve();
            let v = interp(curve, theta.abs());
            if theta < 0.0 {
                -v
            } else {
                v
            }
        }
        CopulaFamily::Clayton => interp(clayton_curve(), theta),
        CopulaFamily::Gumbel => interp(gumbel_curve(), theta),
    }
}

fn interp(curve: &[(f64, f64)], x: f64) -> f64 {
    if x <= curve[0].0 {
        return curve[0].1;
    }
    if x >= curve[curve.len() - 1].0 {
        return curve[curve.len() - 1].1;
    }
    let idx = curve.partition_point(|&(t, _)| t < x);
    let (x0, y0) = curve[idx - 1];
    let (x1, y1) = curve[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn build_curve(family: CopulaFamily, grid: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    grid.map(|t| {
        let spec = CopulaSpec::new(family, t, 2).expect("grid inside domain");
        let rho = true_functional(&spec, &FunctionalKind::SpearmanRho).expect("oracle");
        (t, rho)
    })
    .collect()
}

fn positive_grid() -> impl Iterator<Item = f64> {
    // dense to 20, sparser to 80; the correlation saturates slowly above
    let fine = (1..=1000).map(|i| i as f64 * 0.02);
    let coarse = (1..=120).map(|i| 20.0 + i as f64 * 0.5);
    std::iter::once(1e-3).chain(fine).chain(coarse)
}

fn clayton_curve() -> &'static [(f64, f64)] {
    static CURVE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CURVE.get_or_init(|| {
        let negative = (1..99).rev().map(|i| -(i as f64) * 0.01);
        build_curve(
            CopulaFamily::Clayton,
            negative
                .chain(std::iter::once(-1e-3))
                .chain(positive_grid()),
        )
    })
}

fn gumbel_curve() -> &'static [(f64, f64)] {
    static CURVE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CURVE.get_or_init(|| {
        build_curve(
            CopulaFamily::Gumbel,
            std::iter::once(1.0 + 1e-9)
                .chain((1..=950).map(|i| 1.0 + i as f64 * 0.02))
                .chain((1..=120).map(|i| 20.0 + i as f64 * 0.5)),
        )
    })
}

fn frank_curve() -> &'static [(f64, f64)] {
    static CURVE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CURVE.get_or_init(|| build_curve(CopulaFamily::Frank, positive_grid()))
}
