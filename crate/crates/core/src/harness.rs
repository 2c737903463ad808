//! Monte Carlo experiments: estimator quality and block error rates under
//! different assumptions about the channel.
//!
//! Each trial draws its randomness from a stream derived from
//! `(experiment tag, p, trial index)`. Per-trial results are collected in
//! trial order and reduced sequentially, so reports (and the CSV written from
//! them) are byte-identical for any number of workers.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{sample_bsc_error, RngStream};
use crate::decoder::{sum_product_decode, DecodeResult, TannerGraph};
use crate::error::{Error, Result};
use crate::estimator::estimate_noise;
use crate::gf2::{BitMatrix, BitVector};

/// Default channel grid: 0.0175 to 0.0325 in steps of 0.0025.
pub const DEFAULT_P_GRID: [f64; 7] = [0.0175, 0.02, 0.0225, 0.025, 0.0275, 0.03, 0.0325];

/// Priors handed to the decoder are kept inside `[PRIOR_FLOOR, 1/2 - PRIOR_FLOOR]`.
pub const PRIOR_FLOOR: f64 = 1e-9;

const MSE_TAG: &str = "mse";
const BLER_TAG: &str = "bler";

/// What the decoder is told about the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// A fixed assumed flip probability, whatever the channel does.
    Fixed(f64),
    /// The true channel parameter.
    Perfect,
    /// The per-block estimate from the syndrome weight.
    Estimated,
}

impl Scenario {
    pub fn fixed(p_assumed: f64) -> Result<Self> {
        if !(p_assumed > 0.0 && p_assumed < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "fixed scenario needs 0 < p < 1/2, got {p_assumed}"
            )));
        }
        Ok(Self::Fixed(p_assumed))
    }

    /// The three scenarios compared in the reference experiment.
    pub fn standard() -> Vec<Self> {
        vec![Self::Fixed(0.02), Self::Perfect, Self::Estimated]
    }

    /// Parses a comma-separated list such as `fixed:0.02,perfect,estimated`.
    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        text.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(p) => write!(f, "fixed:{p}"),
            Self::Perfect => f.write_str("perfect"),
            Self::Estimated => f.write_str("estimated"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Self::Perfect),
            "estimated" => Ok(Self::Estimated),
            _ => {
                let p = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown scenario `{s}` (expected fixed:<p>, perfect or estimated)"
                        ))
                    })?;
                Self::fixed(p)
            }
        }
    }
}

/// Shape of a code usable by the estimator: `n`, `m` and uniform row weight `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
}

impl CodeParams {
    pub fn of(h: &BitMatrix) -> Result<Self> {
        let r = h.uniform_row_weight().ok_or_else(|| {
            Error::InvalidParameter(
                "the estimator needs a parity-check matrix with uniform row weight".into(),
            )
        })?;
        if r == 0 {
            return Err(Error::InvalidParameter("row weight must be >= 1".into()));
        }
        Ok(Self {
            n: h.num_cols(),
            m: h.num_rows(),
            r,
        })
    }
}

fn sorted_p_list(p_list: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_list.iter().find(|p| !(0.0..0.5).contains(*p)) {
        return Err(Error::InvalidParameter(format!(
            "channel probabilities must lie in [0, 1/2), got {p}"
        )));
    }
    let mut ps = p_list.to_vec();
    ps.sort_by(f64::total_cmp);
    Ok(ps)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Mean and standard error of the mean.
fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let count = values.clone().count();
    if count == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = values.clone().sum::<f64>() / count as f64;
    if count == 1 {
        return (mean, 0.0, 1);
    }
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64;
    (mean, (var / count as f64).sqrt(), count)
}

// ---------------------------------------------------------------------------
// Estimator quality

/// One row of the estimator-quality report.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub p: f64,
    pub trials: u64,
    /// Mean of `(p_hat - wt(e)/n)^2`: discrepancy from the realised noise level.
    pub mse_phat: f64,
    pub mse_phat_se: f64,
    /// Mean of `(p_hat - p)^2`.
    pub mse_phat_vs_p: f64,
    pub mse_phat_vs_p_se: f64,
    /// `p(1 - p)/n`, the same discrepancy for an estimator that always says `p`.
    pub mse_perfect_ref: f64,
    /// Empirical mean of `(p - wt(e)/n)^2`.
    pub mse_perfect_emp: f64,
    pub mse_perfect_emp_se: f64,
    /// Mean of `n * p_hat / wt(e)` over trials with `wt(e) > 0`.
    pub mean_ratio: f64,
    pub mean_ratio_se: f64,
    /// Trials left out of `mean_ratio` because `wt(e) = 0`.
    pub ratio_excluded: u64,
    pub mean_syndrome_weight: f64,
    /// Unbiased sample variance of the syndrome weight.
    pub var_syndrome_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseReport {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub rows: Vec<MseRow>,
}

#[derive(Debug, Clone, Copy)]
struct MseTrial {
    error_weight: usize,
    syndrome_weight: usize,
    p_hat: f64,
}

/// Estimator-quality experiment over binary symmetric channels.
pub fn run_mse_experiment(
    h: &BitMatrix,
    p_list: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<MseReport> {
    let code = CodeParams::of(h)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let graph = TannerGraph::new(h);
    let mut rows = Vec::new();
    for p in sorted_p_list(p_list)? {
        log::info!("mse: p = {p}, {trials} trials");
        let samples: Vec<MseTrial> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let stream = RngStream::for_trial(master_seed, MSE_TAG, p, t);
                let e = sample_bsc_error(code.n, p, &stream)?;
                let s = graph.syndrome(&e)?;
                let est = estimate_noise(s.weight(), code.m, code.r)?;
                Ok(MseTrial {
                    error_weight: e.weight(),
                    syndrome_weight: s.weight(),
                    p_hat: est.p_hat,
                })
            })
            .collect::<Result<_>>()?;
        rows.push(summarize_mse(code, p, &samples));
    }
    Ok(MseReport {
        n: code.n,
        m: code.m,
        r: code.r,
        rows,
    })
}

fn summarize_mse(code: CodeParams, p: f64, samples: &[MseTrial]) -> MseRow {
    let n = code.n as f64;
    let level = |t: &MseTrial| t.error_weight as f64 / n;
    let (mse_phat, mse_phat_se, _) =
        mean_and_se(samples.iter().map(|t| (t.p_hat - level(t)).powi(2)));
    let (mse_phat_vs_p, mse_phat_vs_p_se, _) =
        mean_and_se(samples.iter().map(|t| (t.p_hat - p).powi(2)));
    let (mse_perfect_emp, mse_perfect_emp_se, _) =
        mean_and_se(samples.iter().map(|t| (p - level(t)).powi(2)));
    let (mean_ratio, mean_ratio_se, counted) = mean_and_se(
        samples
            .iter()
            .filter(|t| t.error_weight > 0)
            .map(|t| n * t.p_hat / t.error_weight as f64),
    );
    let weights = samples.iter().map(|t| t.syndrome_weight as f64);
    let (mean_syndrome_weight, sw_se, _) = mean_and_se(weights);
    let count = samples.len() as f64;
    MseRow {
        p,
        trials: samples.len() as u64,
        mse_phat,
        mse_phat_se,
        mse_phat_vs_p,
        mse_phat_vs_p_se,
        mse_perfect_ref: p * (1.0 - p) / n,
        mse_perfect_emp,
        mse_perfect_emp_se,
        mean_ratio,
        mean_ratio_se,
        ratio_excluded: (samples.len() - counted) as u64,
        mean_syndrome_weight,
        var_syndrome_weight: sw_se * sw_se * count,
    }
}

// ---------------------------------------------------------------------------
// Block error rates

#[derive(Debug, Clone, PartialEq)]
pub struct BlerRow {
    pub scenario: Scenario,
    pub p: f64,
    pub trials: u64,
    pub block_errors: u64,
    /// Decodes that stopped at the iteration cap.
    pub not_converged: u64,
    pub bler: f64,
    /// Binomial standard error `sqrt(bler (1 - bler) / trials)`.
    pub bler_se: f64,
    /// 95% upper bound: `3 / trials` when no errors were seen, else
    /// `bler + 1.96 se`.
    pub bler_upper95: f64,
    /// `1 - (1 - bler)^2`: both X and Z decoded separately under a
    /// depolarizing channel with marginal flip probability `p`.
    pub depolarizing_bler: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerReport {
    pub scenarios: Vec<Scenario>,
    pub max_iters: usize,
    pub rows: Vec<BlerRow>,
}

impl BlerReport {
    pub fn row(&self, scenario: Scenario, p: f64) -> Option<&BlerRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.p == p)
    }
}

/// Everything that happened in one paired trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerTrial {
    pub error: BitVector,
    pub syndrome: BitVector,
    /// Prior handed to the decoder, per scenario.
    pub priors: Vec<f64>,
    pub results: Vec<DecodeResult>,
}

impl BlerTrial {
    /// Block error: the decoder did not converge or inferred a different error.
    pub fn block_error(&self, scenario_index: usize) -> bool {
        let r = &self.results[scenario_index];
        !r.converged || r.error_estimate != self.error
    }
}

fn clamp_prior(p: f64) -> f64 {
    p.clamp(PRIOR_FLOOR, 0.5 - PRIOR_FLOOR)
}

/// Runs one paired trial: one error draw, one syndrome, one decode per scenario.
pub fn run_bler_trial(
    graph: &TannerGraph,
    code: CodeParams,
    p: f64,
    scenarios: &[Scenario],
    trial: u64,
    max_iters: usize,
    master_seed: u64,
) -> Result<BlerTrial> {
    let stream = RngStream::for_trial(master_seed, BLER_TAG, p, trial);
    let error = sample_bsc_error(code.n, p, &stream)?;
    let syndrome = graph.syndrome(&error)?;
    let estimate = estimate_noise(syndrome.weight(), code.m, code.r)?;
    let priors: Vec<f64> = scenarios
        .iter()
        .map(|sc| match *sc {
            Scenario::Fixed(pa) => pa,
            Scenario::Perfect => clamp_prior(p),
            Scenario::Estimated => clamp_prior(estimate.p_hat),
        })
        .collect();
    let results = priors
        .iter()
        .map(|&prior| sum_product_decode(graph, &syndrome, prior, max_iters))
        .collect::<Result<_>>()?;
    Ok(BlerTrial {
        error,
        syndrome,
        priors,
        results,
    })
}

#[derive(Debug, Clone)]
struct TrialSummary {
    block_error: Vec<bool>,
    converged: Vec<bool>,
    iterations: Vec<usize>,
}

/// Block-error-rate experiment comparing decoder scenarios on the same errors.
pub fn run_bler_experiment(
    h: &BitMatrix,
    p_list: &[f64],
    scenarios: &[Scenario],
    trials: u64,
    max_iters: usize,
    master_seed: u64,
) -> Result<BlerReport> {
    let code = CodeParams::of(h)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
    }
    let graph = TannerGraph::new(h);
    let mut rows = Vec::new();
    for p in sorted_p_list(p_list)? {
        log::info!("bler: p = {p}, {trials} trials x {} scenarios", scenarios.len());
        let summaries: Vec<TrialSummary> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let trial = run_bler_trial(&graph, code, p, scenarios, t, max_iters, master_seed)?;
                Ok(TrialSummary {
                    block_error: (0..scenarios.len()).map(|k| trial.block_error(k)).collect(),
                    converged: trial.results.iter().map(|r| r.converged).collect(),
                    iterations: trial.results.iter().map(|r| r.iterations_used).collect(),
                })
            })
            .collect::<Result<_>>()?;
        for (k, &scenario) in scenarios.iter().enumerate() {
            let errors = summaries.iter().filter(|s| s.block_error[k]).count() as u64;
            let not_converged = summaries.iter().filter(|s| !s.converged[k]).count() as u64;
            let iterations: usize = summaries.iter().map(|s| s.iterations[k]).sum();
            rows.push(bler_row(scenario, p, trials, errors, not_converged, iterations));
        }
    }
    Ok(BlerReport {
        scenarios: scenarios.to_vec(),
        max_iters,
        rows,
    })
}

fn bler_row(
    scenario: Scenario,
    p: f64,
    trials: u64,
    block_errors: u64,
    not_converged: u64,
    iterations: usize,
) -> BlerRow {
    let n = trials as f64;
    let bler = block_errors as f64 / n;
    let bler_se = (bler * (1.0 - bler) / n).sqrt();
    let bler_upper95 = if block_errors == 0 {
        3.0 / n
    } else {
        (bler + 1.96 * bler_se).min(1.0)
    };
    BlerRow {
        scenario,
        p,
        trials,
        block_errors,
        not_converged,
        bler,
        bler_se,
        bler_upper95,
        depolarizing_bler: 1.0 - (1.0 - bler) * (1.0 - bler),
        mean_iterations: iterations as f64 / n,
    }
}

/// z-statistic for `errors_b / trials_b` exceeding `errors_a / trials_a`,
/// using the pooled-variance two-proportion test.
///
/// Zero when the pooled proportion is 0 or 1.
pub fn two_proportion_sigma(errors_a: u64, trials_a: u64, errors_b: u64, trials_b: u64) -> Result<f64> {
    if trials_a == 0 || trials_b == 0 {
        return Err(Error::InvalidParameter("trial counts must be positive".into()));
    }
    if errors_a > trials_a || errors_b > trials_b {
        return Err(Error::InvalidParameter("more errors than trials".into()));
    }
    let (na, nb) = (trials_a as f64, trials_b as f64);
    let pooled = (errors_a + errors_b) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return Ok(0.0);
    }
    Ok((errors_b as f64 / nb - errors_a as f64 / na) / se)
}

// ---------------------------------------------------------------------------
// CSV

/// Reports that serialize to a header plus one record per row.
pub trait CsvReport {
    fn header(&self) -> Vec<&'static str>;
    fn records(&self) -> Vec<Vec<String>>;

    fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for rec in self.records() {
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }
}

pub const MSE_CSV_HEADER: [&str; 15] = [
    "p",
    "trials",
    "mse_phat",
    "mse_phat_se",
    "mse_phat_vs_p",
    "mse_phat_vs_p_se",
    "mse_perfect_ref",
    "mse_perfect_emp",
    "mse_perfect_emp_se",
    "mean_ratio",
    "mean_ratio_se",
    "ratio_excluded",
    "mean_syndrome_weight",
    "var_syndrome_weight",
    "n",
];

pub const BLER_CSV_HEADER: [&str; 11] = [
    "scenario",
    "p",
    "trials",
    "block_errors",
    "bler",
    "bler_se",
    "bler_upper95",
    "depolarizing_bler",
    "not_converged",
    "mean_iterations",
    "max_iters",
];

impl CsvReport for MseReport {
    fn header(&self) -> Vec<&'static str> {
        MSE_CSV_HEADER.to_vec()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.p.to_string(),
                    r.trials.to_string(),
                    r.mse_phat.to_string(),
                    r.mse_phat_se.to_string(),
                    r.mse_phat_vs_p.to_string(),
                    r.mse_phat_vs_p_se.to_string(),
                    r.mse_perfect_ref.to_string(),
                    r.mse_perfect_emp.to_string(),
                    r.mse_perfect_emp_se.to_string(),
                    r.mean_ratio.to_string(),
                    r.mean_ratio_se.to_string(),
                    r.ratio_excluded.to_string(),
                    r.mean_syndrome_weight.to_string(),
                    r.var_syndrome_weight.to_string(),
                    self.n.to_string(),
                ]
            })
            .collect()
    }
}

impl CsvReport for BlerReport {
    fn header(&self) -> Vec<&'static str> {
        BLER_CSV_HEADER.to_vec()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.scenario.to_string(),
                    r.p.to_string(),
                    r.trials.to_string(),
                    r.block_errors.to_string(),
                    r.bler.to_string(),
                    r.bler_se.to_string(),
                    r.bler_upper95.to_string(),
                    r.depolarizing_bler.to_string(),
                    r.not_converged.to_string(),
                    r.mean_iterations.to_string(),
                    self.max_iters.to_string(),
                ]
            })
            .collect()
    }
}
