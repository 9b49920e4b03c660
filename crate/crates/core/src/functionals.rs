//! Rank machinery, the empirical copula, point estimators of the dependence
//! functionals, and the per-observation moment vectors that feed the tilted
//! likelihood solver.

use crate::data::{DataMatrix, PseudoData};
use crate::error::{Error, Result};

/// Normalizer h(d) = (d+1) / (2^d - (d+1)) shared by the two multivariate
/// extensions of Spearman's rho.
pub fn rho_normalizer(d: usize) -> f64 {
    let dd = d as f64;
    (dd + 1.0) / ((2.0f64).powi(d as i32) - (dd + 1.0))
}

/// The scalar dependence functionals handled by the pipeline. Tail kinds
/// carry their tuning parameter `k`; `None` means the floor(sqrt(n)) default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FunctionalKind {
    SpearmanRho,
    Rho1,
    Rho2,
    LambdaUpper { k: Option<usize> },
    LambdaLower { k: Option<usize> },
}

impl FunctionalKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionalKind::SpearmanRho => "spearman_rho",
            FunctionalKind::Rho1 => "rho1",
            FunctionalKind::Rho2 => "rho2",
            FunctionalKind::LambdaUpper { .. } => "lambda_upper",
            FunctionalKind::LambdaLower { .. } => "lambda_lower",
        }
    }

    pub fn is_tail(&self) -> bool {
        matches!(
            self,
            FunctionalKind::LambdaUpper { .. } | FunctionalKind::LambdaLower { .. }
        )
    }

    pub fn check_dimension(&self, d: usize) -> Result<()> {
        if matches!(self, FunctionalKind::SpearmanRho) && d != 2 {
            return Err(Error::UnsupportedDimension {
                what: "spearman_rho",
                dim: d,
                reason: "the rank-correlation form is bivariate; use rho1/rho2 for d > 2"
                    .to_string(),
            });
        }
        Ok(())
    }

    /// Tail tuning parameter for a sample of size n; errors when an explicit
    /// k violates 0 < k <= n.
    pub fn resolve_k(&self, n: usize) -> Result<usize> {
        let k = match self {
            FunctionalKind::LambdaUpper { k } | FunctionalKind::LambdaLower { k } => {
                k.unwrap_or_else(|| (n as f64).sqrt().floor() as usize)
            }
            _ => return Ok(0),
        };
        if k == 0 || k > n {
            return Err(Error::InvalidArgument {
                name: "k",
                reason: format!("tail tuning must satisfy 0 < k <= n (k={k}, n={n})"),
            });
        }
        Ok(k)
    }
}

impl std::fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Midranks of a column: average rank across ties, values in [1, n] summing
/// to n(n+1)/2.
pub fn ranks(column: &[f64]) -> Vec<f64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).expect("no NaN in ranks"));
    let mut out = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && column[order[j + 1]] == column[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = midrank;
        }
        i = j + 1;
    }
    out
}

/// Rank-based pseudo-observations u_ij = rank(x_ij) / (n + 1), columnwise.
pub fn pseudo_observations(data: &DataMatrix) -> Result<PseudoData> {
    let (n, d) = (data.n(), data.d());
    if n < 2 || d < 2 {
        return Err(Error::InvalidMatrix {
            n,
            d,
            reason: "pseudo-observations need n >= 2 and d >= 2".to_string(),
        });
    }
    let mut values = vec![0.0f64; n * d];
    for j in 0..d {
        let col = data.column(j);
        let r = ranks(&col);
        for i in 0..n {
            values[i * d + j] = r[i] / (n as f64 + 1.0);
        }
    }
    PseudoData::new(DataMatrix::new(values, n, d)?)
}

/// Empirical copula at `u`: the fraction of rows dominated by `u` in every
/// coordinate.
pub fn empirical_copula_at(pseudo: &PseudoData, u: &[f64]) -> f64 {
    assert_eq!(u.len(), pseudo.d(), "evaluation point dimension mismatch");
    let n = pseudo.n();
    let mut count = 0usize;
    for i in 0..n {
        let row = pseudo.row(i);
        if row.iter().zip(u).all(|(&x, &b)| x <= b) {
            count += 1;
        }
    }
    count as f64 / n as f64
}

/// Point estimate of the functional on the pseudo-data.
pub fn estimate(kind: &FunctionalKind, pseudo: &PseudoData) -> Result<f64> {
    let basis = MomentBasis::new(kind, pseudo)?;
    Ok(basis.point_estimate())
}

/// Per-observation moment vector h(u_i, phi); its mean vanishes exactly at
/// the point estimate for the mean-form kinds.
#[derive(Debug, Clone)]
pub struct MomentVector {
    pub h: Vec<f64>,
    pub kind: FunctionalKind,
    pub phi: f64,
}

pub fn moment_vector(kind: &FunctionalKind, pseudo: &PseudoData, phi: f64) -> Result<MomentVector> {
    if !phi.is_finite() {
        return Err(Error::InvalidArgument {
            name: "phi",
            reason: "candidate functional value must be finite".to_string(),
        });
    }
    let basis = MomentBasis::new(kind, pseudo)?;
    Ok(MomentVector {
        h: basis.moment_vector(phi),
        kind: *kind,
        phi,
    })
}

/// Precomputed phi-independent part of the moment condition, so the
/// proposal loop only shifts a vector per candidate value.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    form: Form,
}

#[derive(Debug, Clone)]
enum Form {
    /// h_i = stat_i - phi
    Mean(Vec<f64>),
    /// h_i = all_i - phi * cond_i (multivariate tail ratio)
    Ratio { all: Vec<f64>, cond: Vec<f64> },
}

impl MomentBasis {
    pub fn new(kind: &FunctionalKind, pseudo: &PseudoData) -> Result<Self> {
        kind.check_dimension(pseudo.d())?;
        let n = pseudo.n();
        let d = pseudo.d();
        let nf = n as f64;
        let form = match kind {
            FunctionalKind::SpearmanRho => {
                let r = ranks(&pseudo.column(0));
                let q = ranks(&pseudo.column(1));
                let scale = 12.0 / (nf * nf - 1.0);
                let shift = 3.0 * (nf + 1.0) / (nf - 1.0);
                Form::Mean((0..n).map(|i| scale * r[i] * q[i] - shift).collect())
            }
            FunctionalKind::Rho1 => {
                let h = rho_normalizer(d);
                let two_d = (2.0f64).powi(d as i32);
                Form::Mean(
                    (0..n)
                        .map(|i| {
                            let prod: f64 = pseudo.row(i).iter().map(|&u| 1.0 - u).product();
                            h * (two_d * prod - 1.0)
                        })
                        .collect(),
                )
            }
            FunctionalKind::Rho2 => {
                let h = rho_normalizer(d);
                let two_d = (2.0f64).powi(d as i32);
                Form::Mean(
                    (0..n)
                        .map(|i| {
                            let prod: f64 = pseudo.row(i).iter().product();
                            h * (two_d * prod - 1.0)
                        })
                        .collect(),
                )
            }
            FunctionalKind::LambdaUpper { .. } => {
                let k = kind.resolve_k(n)? as f64;
                if d == 2 {
                    let thr = (nf - k) / nf;
                    Form::Mean(
                        (0..n)
                            .map(|i| {
                                let joint = pseudo.get(i, 0) <= thr && pseudo.get(i, 1) <= thr;
                                2.0 - nf / k * (1.0 - f64::from(u8::from(joint)))
                            })
                            .collect(),
                    )
                } else {
                    let thr = (nf - k) / nf;
                    Self::tail_ratio(pseudo, |u| u > thr)
                }
            }
            FunctionalKind::LambdaLower { .. } => {
                let k = kind.resolve_k(n)? as f64;
                if d == 2 {
                    let thr = k / nf;
                    Form::Mean(
                        (0..n)
                            .map(|i| {
                                let joint = pseudo.get(i, 0) <= thr && pseudo.get(i, 1) <= thr;
                                nf / k * f64::from(u8::from(joint))
                            })
                            .collect(),
                    )
                } else {
                    let thr = k / nf;
                    Self::tail_ratio(pseudo, |u| u <= thr)
                }
            }
        };
        Ok(Self { form })
    }

    /// Ratio moment for the d > 2 tail indices: conditioning coordinates are
    /// 2..d, the target coordinate is the first.
    fn tail_ratio(pseudo: &PseudoData, in_tail: impl Fn(f64) -> bool) -> Form {
        let n = pseudo.n();
        let mut all = vec![0.0f64; n];
        let mut cond = vec![0.0f64; n];
        for i in 0..n {
            let row = pseudo.row(i);
            let rest = row[1..].iter().all(|&u| in_tail(u));
            if rest {
                cond[i] = 1.0;
                if in_tail(row[0]) {
                    all[i] = 1.0;
                }
            }
        }
        Form::Ratio { all, cond }
    }

    pub fn moment_vector(&self, phi: f64) -> Vec<f64> {
        match &self.form {
            Form::Mean(stat) => stat.iter().map(|s| s - phi).collect(),
            Form::Ratio { all, cond } => all.iter().zip(cond).map(|(a, c)| a - phi * c).collect(),
        }
    }

    /// The estimator value: the mean of the statistic for mean-form kinds,
    /// the ratio of tail counts otherwise (zero when the conditioning count
    /// is zero). Tail estimates are clipped into [0, 1].
    pub fn point_estimate(&self) -> f64 {
        match &self.form {
            Form::Mean(stat) => stat.iter().sum::<f64>() / stat.len() as f64,
            Form::Ratio { all, cond } => {
                let num: f64 = all.iter().sum();
                let den: f64 = cond.iter().sum();
                if den == 0.0 {
                    0.0
                } else {
                    (num / den).clamp(0.0, 1.0)
                }
            }
        }
    }

    pub fn is_mean_form(&self) -> bool {
        matches!(self.form, Form::Mean(_))
    }
}
