//! Copula families used as data-generating truths: exact samplers,
//! distribution functions, bivariate densities and population functionals.

use rand::Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

use crate::data::PseudoData;
use crate::error::{Error, Result};
use crate::functionals::{rho_normalizer, FunctionalKind};
use crate::quad::{gauss_legendre, gauss_legendre_unit};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Clayton,
    Frank,
    Gumbel,
    Gaussian,
    Independence,
}

impl CopulaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Independence => "independence",
        }
    }
}

impl std::fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A copula family with its scalar parameter and dimension.
///
/// The Gaussian family is parameterized by the pairwise Pearson correlation
/// of an equicorrelation matrix; use [`pearson_from_spearman`] to specify a
/// study by its Spearman's rho instead.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub theta: f64,
    pub dim: usize,
}

/// Pearson correlation of a bivariate Gaussian copula with the given
/// Spearman's rho: r = 2 sin(pi * rho / 6).
pub fn pearson_from_spearman(rho_s: f64) -> f64 {
    2.0 * (PI * rho_s / 6.0).sin()
}

impl CopulaSpec {
    pub fn new(family: CopulaFamily, theta: f64, dim: usize) -> Result<Self> {
        let spec = Self { family, theta, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidCopulaParameter {
            family: self.family.name(),
            theta: self.theta,
            dim: self.dim,
            reason,
        };
        if self.dim < 2 {
            return Err(fail("dimension must be at least 2".to_string()));
        }
        if !self.theta.is_finite() {
            return Err(fail("parameter must be finite".to_string()));
        }
        match self.family {
            CopulaFamily::Clayton => {
                if self.theta == 0.0 {
                    return Err(fail("theta must be nonzero".to_string()));
                }
                if self.dim == 2 {
                    if self.theta <= -1.0 {
                        return Err(fail("theta must exceed -1 when d = 2".to_string()));
                    }
                } else if self.theta <= 0.0 {
                    return Err(fail("theta must be positive when d > 2".to_string()));
                }
            }
            CopulaFamily::Frank => {
                if self.theta == 0.0 {
                    return Err(fail("theta must be nonzero".to_string()));
                }
                // The generator is completely monotone only for positive
                // theta, so negative dependence is a d = 2 concept.
                if self.dim > 2 && self.theta < 0.0 {
                    return Err(fail("negative theta requires d = 2".to_string()));
                }
            }
            CopulaFamily::Gumbel => {
                if self.theta < 1.0 {
                    return Err(fail("theta must be at least 1".to_string()));
                }
            }
            CopulaFamily::Gaussian => {
                let r = self.theta;
                if !(-1.0 < r && r < 1.0) {
                    return Err(fail("correlation must lie in (-1, 1)".to_string()));
                }
                let lower = -1.0 / (self.dim as f64 - 1.0);
                if r <= lower {
                    return Err(fail(format!(
                        "equicorrelation must exceed {lower:.6} for d = {}",
                        self.dim
                    )));
                }
            }
            CopulaFamily::Independence => {}
        }
        Ok(())
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws `n` rows from the copula. Frailty constructions for the Archimedean
/// families, correlated normals for the Gaussian family; exact, no rejection
/// loops. Deterministic given the generator state.
pub fn sample_copula<R: Rng + ?Sized>(
    spec: &CopulaSpec,
    n: usize,
    rng: &mut R,
) -> Result<PseudoData> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument {
            name: "n",
            reason: "need n >= 2 rows of pseudo-data".to_string(),
        });
    }
    let d = spec.dim;
    let mut values = vec![0.0f64; n * d];
    match spec.family {
        CopulaFamily::Independence => {
            for v in values.iter_mut() {
                *v = rng.random::<f64>();
            }
        }
        CopulaFamily::Clayton if spec.theta > 0.0 => {
            let theta = spec.theta;
            let gamma = Gamma::new(1.0 / theta, 1.0).expect("valid gamma shape");
            for i in 0..n {
                let frailty: f64 = rng.sample(gamma);
                for j in 0..d {
                    let e: f64 = rng.sample(Exp1);
                    values[i * d + j] = (1.0 + e / frailty).powf(-1.0 / theta);
                }
            }
        }
        CopulaFamily::Clayton => {
            // d = 2, theta in (-1, 0): conditional inversion.
            let theta = spec.theta;
            for i in 0..n {
                let u: f64 = rng.random();
                let w: f64 = rng.random();
                let v = ((w.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0)
                    .powf(-1.0 / theta);
                values[i * d] = u;
                values[i * d + 1] = v;
            }
        }
        CopulaFamily::Gumbel => {
            let theta = spec.theta;
            if theta == 1.0 {
                for v in values.iter_mut() {
                    *v = rng.random::<f64>();
                }
            } else {
                let alpha = 1.0 / theta;
                for i in 0..n {
                    let frailty = sample_positive_stable(alpha, rng);
                    for j in 0..d {
                        let e: f64 = rng.sample(Exp1);
                        values[i * d + j] = (-(e / frailty).powf(alpha)).exp();
                    }
                }
            }
        }
        CopulaFamily::Frank if spec.theta > 0.0 => {
            let theta = spec.theta;
            let p = -(-theta).exp_m1(); // 1 - e^{-theta}
            let em1 = (-theta).exp_m1(); // e^{-theta} - 1
            for i in 0..n {
                let frailty = sample_log_series(p, rng) as f64;
                for j in 0..d {
                    let e: f64 = rng.sample(Exp1);
                    values[i * d + j] = -(((-e / frailty).exp() * em1).ln_1p()) / theta;
                }
            }
        }
        CopulaFamily::Frank => {
            // d = 2, theta < 0: conditional inversion.
            let theta = spec.theta;
            let em1 = (-theta).exp_m1();
            for i in 0..n {
                let u: f64 = rng.random();
                let w: f64 = rng.random();
                let a = (-theta * u).exp();
                let v = -((w * em1 / (a * (1.0 - w) + w)).ln_1p()) / theta;
                values[i * d] = u;
                values[i * d + 1] = v;
            }
        }
        CopulaFamily::Gaussian => {
            let chol = equicorrelation_cholesky(d, spec.theta)?;
            let normal = std_normal();
            let mut z = vec![0.0f64; d];
            for i in 0..n {
                for zj in z.iter_mut() {
                    *zj = rng.sample(StandardNormal);
                }
                for j in (0..d).rev() {
                    let mut acc = 0.0;
                    for (k, zk) in z.iter().take(j + 1).enumerate() {
                        acc += chol[j][k] * zk;
                    }
                    values[i * d + j] = normal.cdf(acc);
                }
            }
        }
    }
    PseudoData::from_unit_values(values, n, d)
}

/// Positive alpha-stable variate with Laplace transform exp(-s^alpha),
/// alpha in (0,1); Chambers-Mallows-Stuck construction.
fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let w = rng.random::<f64>() * PI;
    let e: f64 = rng.sample(Exp1);
    (alpha * w).sin() / w.sin().powf(1.0 / alpha)
        * (((1.0 - alpha) * w).sin() / e).powf((1.0 - alpha) / alpha)
}

/// Logarithmic-series variate with pmf p^k / (-k ln(1-p)); Kemp's sampler.
fn sample_log_series<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    debug_assert!((0.0..1.0).contains(&p));
    let r = (1.0 - p).ln();
    loop {
        let v: f64 = rng.random();
        if v >= p {
            return 1;
        }
        let u: f64 = rng.random();
        let q = -(r * u).exp_m1(); // 1 - (1-p)^u, in (0, p)
        if v <= q * q {
            let k = (1.0 + v.ln() / q.ln()).floor();
            if k >= 1.0 && k.is_finite() {
                return k as u64;
            }
            continue;
        }
        return if v >= q { 1 } else { 2 };
    }
}

fn equicorrelation_cholesky(d: usize, r: f64) -> Result<Vec<Vec<f64>>> {
    let mut a = vec![vec![0.0f64; d]; d];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = if i == j { 1.0 } else { r };
        }
    }
    let mut l = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i][j];
            for (k, ljk) in l[j].iter().enumerate().take(j) {
                sum -= l[i][k] * ljk;
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::InvalidCopulaParameter {
                        family: "gaussian",
                        theta: r,
                        dim: d,
                        reason: "equicorrelation matrix is not positive definite".to_string(),
                    });
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

// ---------------------------------------------------------------------------
// Distribution function
// ---------------------------------------------------------------------------

/// C(u) for the given family, with the Frechet-Hoeffding bounds enforced on
/// the returned value.
pub fn copula_cdf(spec: &CopulaSpec, u: &[f64]) -> Result<f64> {
    spec.validate()?;
    if u.len() != spec.dim {
        return Err(Error::InvalidArgument {
            name: "u",
            reason: format!("expected {} coordinates, got {}", spec.dim, u.len()),
        });
    }
    if u.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidArgument {
            name: "u",
            reason: "coordinates must lie in [0,1]".to_string(),
        });
    }
    if u.contains(&0.0) {
        return Ok(0.0);
    }
    // Coordinates equal to one drop out of every family below.
    let raw = match spec.family {
        CopulaFamily::Independence => u.iter().product(),
        CopulaFamily::Clayton => {
            // base can drop to zero for negative theta (truncated support)
            let theta = spec.theta;
            let s: f64 = u.iter().map(|&x| x.powf(-theta) - 1.0).sum();
            let base = 1.0 + s;
            if base <= 0.0 {
                0.0
            } else {
                base.powf(-1.0 / theta)
            }
        }
        CopulaFamily::Frank => {
            let theta = spec.theta;
            let mut prod = 1.0f64;
            for &x in u {
                prod *= (-theta * x).exp_m1();
            }
            let denom = (-theta).exp_m1().powi(spec.dim as i32 - 1);
            -(prod / denom).ln_1p() / theta
        }
        CopulaFamily::Gumbel => {
            let theta = spec.theta;
            let s: f64 = u.iter().map(|&x| (-x.ln()).powf(theta)).sum();
            (-s.powf(1.0 / theta)).exp()
        }
        CopulaFamily::Gaussian => gaussian_cdf(spec, u)?,
    };
    let lower = (u.iter().sum::<f64>() - spec.dim as f64 + 1.0).max(0.0);
    let upper = u.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(raw.clamp(lower, upper))
}

fn gaussian_cdf(spec: &CopulaSpec, u: &[f64]) -> Result<f64> {
    let r = spec.theta;
    let normal = std_normal();
    // Coordinates at 1 contribute nothing; the margin of an equicorrelated
    // Gaussian copula is the same family in lower dimension.
    let z: Vec<f64> = u
        .iter()
        .filter(|&&x| x < 1.0)
        .map(|&x| normal.inverse_cdf(x))
        .collect();
    match z.len() {
        0 => Ok(1.0),
        1 => Ok(normal.cdf(z[0])),
        2 => Ok(bivariate_normal_cdf(z[0], z[1], r)),
        _ if r >= 0.0 => Ok(gaussian_cdf_one_factor(&z, r)),
        _ => Ok(gaussian_cdf_monte_carlo(&z, r, spec.dim)),
    }
}

/// P(X <= x, Y <= y) for standard bivariate normals with correlation `r`,
/// via the Drezner-Wesolowsky angle integral with panels refined toward the
/// endpoint so that correlations near +-1 stay accurate.
pub fn bivariate_normal_cdf(x: f64, y: f64, r: f64) -> f64 {
    let normal = std_normal();
    let px = normal.cdf(x);
    let py = normal.cdf(y);
    if r == 0.0 {
        return px * py;
    }
    let a = r.asin();
    let (nodes, weights) = gauss_legendre(24);
    let mut integral = 0.0;
    // geometric panels accumulating toward the asin(r) endpoint
    let fractions = [0.0, 0.5, 0.8, 0.95, 0.99, 0.999, 1.0];
    for w in fractions.windows(2) {
        let (lo, hi) = (a * w[0], a * w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (t, wt) in nodes.iter().zip(&weights) {
            let theta = mid + half * t;
            let (s, c) = theta.sin_cos();
            integral += wt * half * (-(x * x + y * y - 2.0 * x * y * s) / (2.0 * c * c)).exp();
        }
    }
    (px * py + integral / (2.0 * PI)).clamp(0.0, 1.0)
}

/// Equicorrelated Gaussian orthant probability via the one-factor
/// representation Z_j = sqrt(r) T + sqrt(1-r) e_j, valid for r >= 0.
fn gaussian_cdf_one_factor(z: &[f64], r: f64) -> f64 {
    let normal = std_normal();
    let sr = r.sqrt();
    let s1 = (1.0 - r).sqrt();
    let (nodes, weights) = gauss_legendre(96);
    let half = 8.5;
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let x = half * t;
        let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let mut prod = 1.0;
        for &zj in z {
            prod *= normal.cdf((zj - sr * x) / s1);
        }
        acc += w * half * phi * prod;
    }
    acc.clamp(0.0, 1.0)
}

/// Negative equicorrelation in d > 2 has no one-factor form; fixed-seed
/// Monte Carlo keeps the value deterministic per input.
fn gaussian_cdf_monte_carlo(z: &[f64], r: f64, dim: usize) -> f64 {
    let mut tag = 0u64;
    for &zi in z {
        tag = tag.wrapping_mul(0x100000001b3).wrapping_add(zi.to_bits());
    }
    tag = tag.wrapping_mul(0x100000001b3).wrapping_add(r.to_bits());
    let mut rng = stream_rng(0x6f8a_c001, tag);
    let d = z.len();
    let chol = equicorrelation_cholesky(dim, r).expect("validated spec");
    let reps = 200_000;
    let mut hits = 0usize;
    let mut g = vec![0.0f64; d];
    for _ in 0..reps {
        for gj in g.iter_mut() {
            *gj = rng.sample(StandardNormal);
        }
        let mut inside = true;
        for j in 0..d {
            let mut acc = 0.0;
            for (k, gk) in g.iter().take(j + 1).enumerate() {
                acc += chol[j][k] * gk;
            }
            if acc > z[j] {
                inside = false;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    hits as f64 / reps as f64
}

// ---------------------------------------------------------------------------
// Bivariate log-density
// ---------------------------------------------------------------------------

/// log c(u, v) for the bivariate families; the parametric posterior sampler
/// in `baselines` evaluates this inside its Metropolis loop.
pub fn copula_log_density(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    if spec.dim != 2 {
        return Err(Error::UnsupportedDimension {
            what: "copula_log_density",
            dim: spec.dim,
            reason: "densities are provided for d = 2 only".to_string(),
        });
    }
    if !(0.0 < u && u < 1.0 && 0.0 < v && v < 1.0) {
        return Err(Error::InvalidArgument {
            name: "u",
            reason: "point must lie in the open unit square".to_string(),
        });
    }
    Ok(log_density_unchecked(spec.family, spec.theta, u, v))
}

/// Density kernel without spec validation; the Metropolis sampler calls this
/// on proposal values that may sit outside the family domain and expects
/// -inf there rather than an error.
pub(crate) fn log_density_unchecked(family: CopulaFamily, theta: f64, u: f64, v: f64) -> f64 {
    const THETA_TINY: f64 = 1e-10;
    match family {
        CopulaFamily::Independence => 0.0,
        CopulaFamily::Clayton => {
            if theta <= -1.0 {
                return f64::NEG_INFINITY;
            }
            if theta.abs() < THETA_TINY {
                return 0.0;
            }
            let s = u.powf(-theta) + v.powf(-theta) - 1.0;
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            (1.0 + theta).ln() - (theta + 1.0) * (u.ln() + v.ln()) - (2.0 + 1.0 / theta) * s.ln()
        }
        CopulaFamily::Frank => {
            if theta.abs() < THETA_TINY {
                return 0.0;
            }
            let em1 = (-theta).exp_m1(); // e^{-theta} - 1
            let du = (-theta * u).exp_m1();
            let dv = (-theta * v).exp_m1();
            // (1-e^{-theta}) - (1-e^{-theta u})(1-e^{-theta v}) = -(em1 + du dv)
            let denom = em1 + du * dv;
            // theta * (e^{-theta} - 1) is negative for both signs of theta
            (-theta * em1).ln() - theta * (u + v) - 2.0 * denom.abs().ln()
        }
        CopulaFamily::Gumbel => {
            if theta < 1.0 {
                return f64::NEG_INFINITY;
            }
            if theta == 1.0 {
                return 0.0;
            }
            let x = -u.ln();
            let y = -v.ln();
            let a = x.powf(theta) + y.powf(theta);
            let s = a.powf(1.0 / theta);
            -s + x
                + y
                + (theta - 1.0) * (x.ln() + y.ln())
                + (1.0 / theta - 2.0) * a.ln()
                + (s + theta - 1.0).ln()
        }
        CopulaFamily::Gaussian => {
            if theta.abs() >= 1.0 {
                return f64::NEG_INFINITY;
            }
            if theta.abs() < THETA_TINY {
                return 0.0;
            }
            let normal = std_normal();
            let x = normal.inverse_cdf(u);
            let y = normal.inverse_cdf(v);
            let r2 = theta * theta;
            let om = 1.0 - r2;
            -0.5 * om.ln() - (r2 * (x * x + y * y) - 2.0 * theta * x * y) / (2.0 * om)
        }
    }
}

// ---------------------------------------------------------------------------
// Population functionals
// ---------------------------------------------------------------------------

const ORACLE_SEED: u64 = 0x0c0a_u64;
const ORACLE_SAMPLES: usize = 10_000_000;
const QUAD_NODES: usize = 64;

/// Population value of the functional under the spec. Tail indices come from
/// the family closed forms; the rho family is integrated by Gauss-Legendre
/// product quadrature for d <= 3 and by fixed-seed Monte Carlo above that.
pub fn true_functional(spec: &CopulaSpec, kind: &FunctionalKind) -> Result<f64> {
    spec.validate()?;
    kind.check_dimension(spec.dim)?;
    match kind {
        FunctionalKind::LambdaLower { .. } => Ok(lambda_lower_closed_form(spec)),
        FunctionalKind::LambdaUpper { .. } => Ok(lambda_upper_closed_form(spec)),
        FunctionalKind::SpearmanRho => rho1_population(spec),
        FunctionalKind::Rho1 => rho1_population(spec),
        FunctionalKind::Rho2 => rho2_population(spec),
    }
}

fn lambda_lower_closed_form(spec: &CopulaSpec) -> f64 {
    match spec.family {
        CopulaFamily::Clayton if spec.theta > 0.0 => (spec.dim as f64).powf(-1.0 / spec.theta),
        _ => 0.0,
    }
}

fn lambda_upper_closed_form(spec: &CopulaSpec) -> f64 {
    match spec.family {
        CopulaFamily::Gumbel => {
            let d = spec.dim as i64;
            let mut sum = 0.0;
            let mut binom = 1.0f64;
            for r in 1..=d {
                binom = binom * (d - r + 1) as f64 / r as f64;
                let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
                sum += sign * binom * (r as f64).powf(1.0 / spec.theta);
            }
            sum
        }
        _ => 0.0,
    }
}

fn rho1_population(spec: &CopulaSpec) -> Result<f64> {
    let d = spec.dim;
    let h = rho_normalizer(d);
    if d <= 3 {
        let c_int = integral_of_cdf(spec, d)?;
        Ok(h * ((2.0f64).powi(d as i32) * c_int - 1.0))
    } else {
        let (m1, _) = oracle_moments(spec);
        Ok(h * ((2.0f64).powi(d as i32) * m1 - 1.0))
    }
}

fn rho2_population(spec: &CopulaSpec) -> Result<f64> {
    let d = spec.dim;
    let h = rho_normalizer(d);
    if d == 2 {
        // E[UV] equals the integral of C over the square in two dimensions.
        let c_int = integral_of_cdf(spec, 2)?;
        Ok(h * (4.0 * c_int - 1.0))
    } else if d == 3 {
        // inclusion-exclusion over the survival function, with the bivariate
        // margin obtained by fixing the third coordinate at one
        let i3 = integral_of_cdf(spec, 3)?;
        let i2 = integral_of_margin_cdf(spec)?;
        let e_prod = -0.5 + 3.0 * i2 - i3;
        Ok(h * (8.0 * e_prod - 1.0))
    } else {
        let (_, m2) = oracle_moments(spec);
        Ok(h * ((2.0f64).powi(d as i32) * m2 - 1.0))
    }
}

/// Integral of C(u) over the unit cube by tensor Gauss-Legendre.
fn integral_of_cdf(spec: &CopulaSpec, d: usize) -> Result<f64> {
    let (x, w) = gauss_legendre_unit(QUAD_NODES);
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0f64; d];
    loop {
        let mut wt = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            point[k] = x[i];
            wt *= w[i];
        }
        total += wt * copula_cdf(spec, &point)?;
        // odometer increment
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < QUAD_NODES {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return Ok(total);
            }
        }
    }
}

fn integral_of_margin_cdf(spec: &CopulaSpec) -> Result<f64> {
    let (x, w) = gauss_legendre_unit(QUAD_NODES);
    let mut total = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            total += w[i] * w[j] * copula_cdf(spec, &[xi, xj, 1.0])?;
        }
    }
    Ok(total)
}

/// Fixed-seed Monte Carlo moments E[prod(1-U_j)] and E[prod U_j].
fn oracle_moments(spec: &CopulaSpec) -> (f64, f64) {
    let mut rng = stream_rng(ORACLE_SEED, spec.theta.to_bits() ^ spec.dim as u64);
    let d = spec.dim;
    let chunk = 100_000;
    let mut sum1 = 0.0f64;
    let mut sum2 = 0.0f64;
    let mut done = 0usize;
    while done < ORACLE_SAMPLES {
        let m = chunk.min(ORACLE_SAMPLES - done);
        let u = sample_copula(spec, m, &mut rng).expect("validated spec");
        for i in 0..m {
            let mut p1 = 1.0;
            let mut p2 = 1.0;
            for j in 0..d {
                let v = u.get(i, j);
                p1 *= 1.0 - v;
                p2 *= v;
            }
            sum1 += p1;
            sum2 += p2;
        }
        done += m;
    }
    (sum1 / done as f64, sum2 / done as f64)
}
