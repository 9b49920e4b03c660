//! Study execution: seeded simulation loops and real-data analysis, with
//! per-repetition random streams so results match at any parallelism degree.

use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::Path;

use abscop_core::rng::{derive_seed, stream_rng};
use abscop_core::{
    chain_to_rho, estimate, freq_interval, mh_theta_chain, pseudo_observations, run_abscop,
    sample_copula, summarize, true_functional, ColumnPosterior, DataMatrix, FreqMethod,
    FunctionalKind, MarginalSource, PseudoData, PseudoTensor, TruncNormalPrior,
};

use crate::config::{ExperimentConfig, MarginalMode};
use crate::error::{HarnessError, Result};
use crate::results::{aggregate, Failure, PosteriorDrawSet, RepRecord, StudyResult};

const STREAM_DATA: u64 = 0;
const TAG_ABSCOP: u64 = 1000;
const TAG_BOOT: u64 = 2000;
const TAG_MCMC: u64 = 3000;
const TAG_FREQ: u64 = 4000;

/// Loads the marginal source described by the config (posterior CSVs and
/// tensors are resolved relative to the config file).
pub fn load_marginal_source(
    config: &ExperimentConfig,
    expected_d: usize,
    expected_n: usize,
) -> Result<MarginalSource> {
    match &config.marginal_mode {
        MarginalMode::KnownUniform => Ok(MarginalSource::KnownUniform),
        MarginalMode::EmpiricalCdf => Ok(MarginalSource::EmpiricalCdf),
        MarginalMode::PosteriorFiles { files, families } => {
            if files.len() != expected_d {
                return Err(HarnessError::Config {
                    field: "marginals.posterior_files".to_string(),
                    constraint: format!(
                        "need one file per data column ({} files, d = {expected_d})",
                        files.len()
                    ),
                });
            }
            let mut columns = Vec::with_capacity(files.len());
            for (file, family) in files.iter().zip(families) {
                let path = config.base_dir.join(file);
                let mut reader =
                    csv::Reader::from_path(&path).map_err(|e| match e.into_kind() {
                        csv::ErrorKind::Io(io) => HarnessError::Io {
                            path: path.clone(),
                            source: io,
                        },
                        other => HarnessError::Other(format!("{}: {other:?}", path.display())),
                    })?;
                let mut draws = Vec::new();
                for (ri, record) in reader.records().enumerate() {
                    let record = record.map_err(|e| HarnessError::Other(e.to_string()))?;
                    let mut row = Vec::with_capacity(record.len());
                    for (ci, cell) in record.iter().enumerate() {
                        row.push(
                            cell.trim()
                                .parse::<f64>()
                                .map_err(|_| HarnessError::Ingest {
                                    row: ri + 2,
                                    column: format!("{}:{}", path.display(), ci + 1),
                                    reason: format!("not numeric: {cell:?}"),
                                })?,
                        );
                    }
                    draws.push(row);
                }
                columns.push(ColumnPosterior {
                    family: *family,
                    draws,
                });
            }
            for c in &columns {
                c.validate()?;
            }
            Ok(MarginalSource::Parametric(columns))
        }
        MarginalMode::PseudoTensor(file) => {
            let path = config.base_dir.join(file);
            let mut reader = csv::Reader::from_path(&path).map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => HarnessError::Io {
                    path: path.clone(),
                    source: io,
                },
                other => HarnessError::Other(format!("{}: {other:?}", path.display())),
            })?;
            let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
            for (ri, record) in reader.records().enumerate() {
                let record = record.map_err(|e| HarnessError::Other(e.to_string()))?;
                let parse_idx = |i: usize, name: &str| -> Result<usize> {
                    record[i]
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| HarnessError::Ingest {
                            row: ri + 2,
                            column: name.to_string(),
                            reason: format!("not an index: {:?}", &record[i]),
                        })
                };
                let s = parse_idx(0, "draw")?;
                let i = parse_idx(1, "row")?;
                let j = parse_idx(2, "col")?;
                let v = record[3]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| HarnessError::Ingest {
                        row: ri + 2,
                        column: "value".to_string(),
                        reason: format!("not numeric: {:?}", &record[3]),
                    })?;
                entries.push((s, i, j, v));
            }
            let draws = entries.iter().map(|e| e.0).max().map_or(0, |m| m + 1);
            let n = entries.iter().map(|e| e.1).max().map_or(0, |m| m + 1);
            let d = entries.iter().map(|e| e.2).max().map_or(0, |m| m + 1);
            if entries.len() != draws * n * d {
                return Err(HarnessError::Config {
                    field: "marginals.pseudo_tensor".to_string(),
                    constraint: format!(
                        "tensor incomplete: {} entries for draws={draws}, n={n}, d={d}",
                        entries.len()
                    ),
                });
            }
            let mut values = vec![f64::NAN; draws * n * d];
            for (s, i, j, v) in entries {
                values[(s * n + i) * d + j] = v;
            }
            if values.iter().any(|v| v.is_nan()) {
                return Err(HarnessError::Config {
                    field: "marginals.pseudo_tensor".to_string(),
                    constraint: "duplicate or missing (draw,row,col) cells".to_string(),
                });
            }
            if n != expected_n || d != expected_d {
                return Err(HarnessError::Config {
                    field: "marginals.pseudo_tensor".to_string(),
                    constraint: format!(
                        "tensor slices are {n}x{d}, data is {expected_n}x{expected_d}"
                    ),
                });
            }
            Ok(MarginalSource::Tensor(PseudoTensor::new(
                draws, n, d, values,
            )?))
        }
    }
}

/// Pseudo-data handed to the frequentist and parametric baselines: the data
/// itself under known-uniform margins, rank pseudo-observations otherwise.
fn baseline_pseudo(data: &DataMatrix, mode: &MarginalMode) -> Result<PseudoData> {
    match mode {
        MarginalMode::KnownUniform => Ok(PseudoData::from_unit_values(
            data.values().to_vec(),
            data.n(),
            data.d(),
        )?),
        _ => Ok(pseudo_observations(data)?),
    }
}

struct RepOutput {
    records: Vec<RepRecord>,
    draws: Vec<PosteriorDrawSet>,
    failures: Vec<Failure>,
}

#[allow(clippy::too_many_arguments)]
fn run_repetition(
    rep: usize,
    config: &ExperimentConfig,
    data: &DataMatrix,
    source: &MarginalSource,
    truth: &BTreeMap<String, f64>,
    keep_draws: bool,
) -> RepOutput {
    let rep_seed = derive_seed(config.seed, rep as u64);
    let mut records = Vec::new();
    let mut draws = Vec::new();
    let mut failures = Vec::new();
    let mut fail = |kind: &FunctionalKind, method: &str, err: String| {
        failures.push(Failure {
            rep,
            kind: kind.name().to_string(),
            method: method.to_string(),
            reason: err,
        });
    };

    let pseudo = match baseline_pseudo(data, &config.marginal_mode) {
        Ok(p) => Some(p),
        Err(e) => {
            for kind in &config.functionals {
                fail(kind, "baseline_pseudo", e.to_string());
            }
            None
        }
    };

    for (ki, kind) in config.functionals.iter().enumerate() {
        let truth_value = truth.get(kind.name()).copied();
        // posterior pass
        match run_abscop(
            data,
            source,
            kind,
            &config.prior_for(kind),
            config.proposals,
            config.level,
            derive_seed(rep_seed, TAG_ABSCOP + ki as u64),
        ) {
            Ok(post) => {
                records.push(RepRecord {
                    rep,
                    kind: kind.name().to_string(),
                    method: "abscop".to_string(),
                    point: post.summary.median,
                    lower: Some(post.summary.lower),
                    upper: Some(post.summary.upper),
                    valid: true,
                    covered: truth_value.map(|t| post.summary.covers(t)),
                    variance: None,
                    ess: Some(post.ess),
                });
                if keep_draws {
                    draws.push(PosteriorDrawSet {
                        rep,
                        kind: kind.name().to_string(),
                        draws: post.resampled,
                    });
                }
            }
            Err(e) => fail(kind, "abscop", e.to_string()),
        }

        let Some(pseudo) = &pseudo else { continue };

        if config.baselines.asymptotic_rho && matches!(kind, FunctionalKind::SpearmanRho) {
            let mut rng = stream_rng(rep_seed, TAG_FREQ + ki as u64);
            match freq_interval(
                kind,
                pseudo,
                config.level,
                FreqMethod::AsymptoticRho,
                0,
                &mut rng,
            ) {
                Ok(iv) => records.push(RepRecord {
                    rep,
                    kind: kind.name().to_string(),
                    method: "freq_asymptotic".to_string(),
                    point: iv.point,
                    lower: iv.interval.map(|i| i.0),
                    upper: iv.interval.map(|i| i.1),
                    valid: iv.valid,
                    covered: truth_value
                        .and_then(|t| iv.interval.map(|(lo, hi)| lo <= t && t <= hi)),
                    variance: Some(iv.variance),
                    ess: None,
                }),
                Err(e) => fail(kind, "freq_asymptotic", e.to_string()),
            }
        }

        if config.baselines.bootstrap {
            let mut rng = stream_rng(rep_seed, TAG_BOOT + ki as u64);
            match freq_interval(
                kind,
                pseudo,
                config.level,
                FreqMethod::Bootstrap,
                config.baselines.bootstrap_replicates,
                &mut rng,
            ) {
                Ok(iv) => records.push(RepRecord {
                    rep,
                    kind: kind.name().to_string(),
                    method: "freq_bootstrap".to_string(),
                    point: iv.point,
                    lower: iv.interval.map(|i| i.0),
                    upper: iv.interval.map(|i| i.1),
                    valid: iv.valid,
                    covered: truth_value
                        .and_then(|t| iv.interval.map(|(lo, hi)| lo <= t && t <= hi)),
                    variance: Some(iv.variance),
                    ess: None,
                }),
                Err(e) => fail(kind, "freq_bootstrap", e.to_string()),
            }
        }

        // fully parametric posterior comparison, bivariate rank correlation
        if matches!(kind, FunctionalKind::SpearmanRho) && !config.parametric_models.is_empty() {
            let rows: Vec<[f64; 2]> = (0..pseudo.n())
                .map(|i| [pseudo.get(i, 0), pseudo.get(i, 1)])
                .collect();
            for (mi, family) in config.parametric_models.iter().enumerate() {
                let method = format!("param_{}", family.name());
                let result = TruncNormalPrior::default_for(*family)
                    .and_then(|prior| {
                        mh_theta_chain(
                            &rows,
                            *family,
                            &prior,
                            config.baselines.mcmc_iterations,
                            config.baselines.mcmc_burn_in,
                            &mut stream_rng(rep_seed, TAG_MCMC + mi as u64),
                        )
                    })
                    .and_then(|chain| {
                        let rhos = chain_to_rho(&chain);
                        summarize(&rhos, config.level).map(|s| (s, chain.acceptance_rate))
                    });
                match result {
                    Ok((summary, _rate)) => records.push(RepRecord {
                        rep,
                        kind: kind.name().to_string(),
                        method,
                        point: summary.median,
                        lower: Some(summary.lower),
                        upper: Some(summary.upper),
                        valid: true,
                        covered: truth_value.map(|t| summary.covers(t)),
                        variance: None,
                        ess: None,
                    }),
                    Err(e) => fail(kind, &method, e.to_string()),
                }
            }
        }
    }
    RepOutput {
        records,
        draws,
        failures,
    }
}

fn base_metadata(config: &ExperimentConfig) -> serde_json::Value {
    json!({
        "study": config.study,
        "seed": config.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": crate::config::SCHEMA_VERSION,
        "config": serde_json::to_value(&config.raw).expect("serializable config"),
        "conventions": {
            "quantile_rule": "type-7 linear interpolation between order statistics",
            "pseudo_observations": "rank/(n+1), midranks for ties",
            "multivariate_tail_conditioning": "target coordinate 1 given coordinates 2..d in the tail",
            "marginal_draw_indices": "independent per column on every pass",
            "gaussian_parameterization": "pairwise Pearson correlation of an equicorrelation matrix; r = 2 sin(pi rho_s / 6)",
            "bootstrap_variance": "replicate variance of the estimate scaled by 1/n",
            "tail_tuning_default": "k = floor(sqrt(n))",
        },
        "effective": {
            "n": config.n,
            "repetitions": config.repetitions,
            "proposals": config.proposals,
            "level": config.level,
            "parallelism": config.parallelism,
            "marginal_mode": config.marginal_mode.name(),
            "truth_theta": config.truth.map(|t| t.theta),
        },
    })
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if parallelism > 0 {
        builder = builder.num_threads(parallelism);
    }
    builder
        .build()
        .map_err(|e| HarnessError::Other(format!("thread pool: {e}")))
}

/// Runs the configured simulation study: R repetitions of simulate, weight,
/// resample and the requested baselines, then aggregates. Per-repetition
/// failures are collected, never fatal.
pub fn run_study(config: &ExperimentConfig) -> Result<StudyResult> {
    let truth_spec = config.truth.ok_or_else(|| HarnessError::Config {
        field: "truth".to_string(),
        constraint: "simulation studies need a data-generating copula".to_string(),
    })?;
    let mut truth = BTreeMap::new();
    for kind in &config.functionals {
        truth.insert(kind.name().to_string(), true_functional(&truth_spec, kind)?);
    }
    let source = load_marginal_source(config, truth_spec.dim, config.n)?;
    let pool = build_pool(config.parallelism)?;

    let outputs: Vec<std::result::Result<RepOutput, (usize, String)>> = pool.install(|| {
        (0..config.repetitions)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(config.seed, rep as u64);
                let data = sample_copula(
                    &truth_spec,
                    config.n,
                    &mut stream_rng(rep_seed, STREAM_DATA),
                )
                .map_err(|e| (rep, e.to_string()))?;
                let matrix = data.matrix().clone();
                Ok(run_repetition(rep, config, &matrix, &source, &truth, true))
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut draws = Vec::new();
    let mut failures = Vec::new();
    for out in outputs {
        match out {
            Ok(mut o) => {
                records.append(&mut o.records);
                draws.append(&mut o.draws);
                failures.append(&mut o.failures);
            }
            Err((rep, reason)) => failures.push(Failure {
                rep,
                kind: "-".to_string(),
                method: "simulate".to_string(),
                reason,
            }),
        }
    }

    let aggregates = aggregate(&records);
    Ok(StudyResult {
        study: config.study.clone(),
        truth,
        records,
        aggregates,
        failures,
        posterior_draws: draws,
        metadata: base_metadata(config),
    })
}

/// Reads a CSV with a header row and d numeric columns.
pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::Io {
                path: path.to_path_buf(),
                source: io,
            },
            other => HarnessError::Other(format!("{}: {other:?}", path.display())),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::Other(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let d = headers.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record.map_err(|e| HarnessError::Other(e.to_string()))?;
        if record.len() != d {
            return Err(HarnessError::Ingest {
                row: ri + 2,
                column: "-".to_string(),
                reason: format!("ragged row: {} cells, header has {d}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for (ci, cell) in record.iter().enumerate() {
            row.push(
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| HarnessError::Ingest {
                        row: ri + 2,
                        column: headers[ci].clone(),
                        reason: format!("not numeric: {cell:?}"),
                    })?,
            );
        }
        rows.push(row);
    }
    DataMatrix::from_rows(&rows).map_err(HarnessError::Core)
}

/// Analyzes a real multivariate series: posterior summaries for each
/// requested functional plus frequentist point estimates, single repetition.
pub fn run_real_data(csv_path: &Path, config: &ExperimentConfig) -> Result<StudyResult> {
    let data = read_data_csv(csv_path)?;
    if data.n() < 2 || data.d() < 2 {
        return Err(HarnessError::Ingest {
            row: data.n() + 1,
            column: "-".to_string(),
            reason: format!(
                "need at least 2 rows and 2 columns, got {}x{}",
                data.n(),
                data.d()
            ),
        });
    }
    let source = load_marginal_source(config, data.d(), data.n())?;
    let pool = build_pool(config.parallelism)?;

    // degenerate columns are legal (midranks map them to 1/2) but worth a
    // recorded warning: dependence with a constant column is vacuous
    let mut warnings = Vec::new();
    for j in 0..data.d() {
        let col = data.column(j);
        if col.iter().all(|&v| v == col[0]) {
            warnings.push(format!(
                "column {j} is constant; its pseudo-observations collapse to 0.5 and dependence with it is degenerate"
            ));
        }
    }

    let truth = BTreeMap::new();
    let out = pool.install(|| run_repetition(0, config, &data, &source, &truth, true));

    let mut records = out.records;
    // frequentist point estimates alongside the posterior summaries
    if let Ok(pseudo) = baseline_pseudo(&data, &config.marginal_mode) {
        for kind in &config.functionals {
            if let Ok(point) = estimate(kind, &pseudo) {
                records.push(RepRecord {
                    rep: 0,
                    kind: kind.name().to_string(),
                    method: "freq_point".to_string(),
                    point,
                    lower: None,
                    upper: None,
                    valid: false,
                    covered: None,
                    variance: None,
                    ess: None,
                });
            }
        }
    }

    let aggregates = aggregate(&records);
    let mut metadata = base_metadata(config);
    if let serde_json::Value::Object(map) = &mut metadata {
        map.insert(
            "data_file".to_string(),
            json!(csv_path.display().to_string()),
        );
        map.insert("data_rows".to_string(), json!(data.n()));
        map.insert("data_columns".to_string(), json!(data.d()));
        map.insert("warnings".to_string(), json!(warnings));
    }
    Ok(StudyResult {
        study: config.study.clone(),
        truth,
        records,
        aggregates,
        failures: out.failures,
        posterior_draws: out.draws,
        metadata,
    })
}
