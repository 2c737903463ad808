use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qce::codegen::{
    construct_dual_containing_ldpc, matrix_diagnostics, read_alist, write_alist, CodeSpec,
    MatrixDiagnostics,
};
use qce::decoder::{build_tanner, sum_product_decode, DEFAULT_MAX_ITERS};
use qce::estimator::estimate_noise;
use qce::harness::{
    run_bler_experiment, run_mse_experiment, with_workers, CodeParams, CsvReport, Scenario,
    DEFAULT_P_GRID,
};
use qce::{BitVector, Error, Result};

/// Syndrome-based noise estimation and decoding experiments for
/// dual-containing LDPC / CSS codes.
#[derive(Debug, Parser)]
#[command(name = "qce", version)]
struct Cli {
    /// Worker threads for Monte Carlo runs [default: available cores]
    #[arg(long, global = true, env = "QCE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct a dual-containing circulant LDPC parity-check matrix.
    Construct {
        #[arg(long, default_value_t = 3786)]
        n: usize,
        /// Syndrome length (n - k1).
        #[arg(long, default_value_t = 1420)]
        rows: usize,
        #[arg(long, default_value_t = 24)]
        row_weight: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print structural diagnostics of an alist matrix.
    Validate { matrix: PathBuf },
    /// Estimate the flip probability from a syndrome weight.
    Estimate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        syndrome_weight: usize,
    },
    /// Decode one syndrome with sum-product.
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        /// File holding the syndrome as 0/1 characters; whitespace is ignored.
        #[arg(long)]
        syndrome: PathBuf,
        /// Prior flip probability handed to the decoder.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Estimator-quality Monte Carlo experiment.
    Mse {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated channel probabilities [default: 0.0175..0.0325 step 0.0025]
        #[arg(long)]
        p_list: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Block-error-rate Monte Carlo experiment over decoder scenarios.
    Bler {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p_list: Option<String>,
        /// Comma-separated scenarios: fixed:<p>, perfect, estimated.
        #[arg(long, default_value = "fixed:0.02,perfect,estimated")]
        scenarios: String,
        #[arg(long, default_value_t = 3000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_p_list(text: Option<&str>) -> Result<Vec<f64>> {
    let Some(text) = text else {
        return Ok(DEFAULT_P_GRID.to_vec());
    };
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("`{t}` is not a probability")))
        })
        .collect()
}

fn read_syndrome(path: &Path) -> Result<BitVector> {
    let text = std::fs::read_to_string(path)?;
    let bits = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            other => Err(Error::InvalidParameter(format!(
                "syndrome file may only hold 0 and 1, found `{other}`"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BitVector::from_bits(&bits))
}

fn print_diagnostics(d: &MatrixDiagnostics) {
    let fmt_hist = |h: &std::collections::BTreeMap<usize, usize>| {
        h.iter()
            .map(|(w, c)| format!("{w}:{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("rows {}", d.rows);
    println!("cols {}", d.cols);
    println!("rank {}", d.rank);
    match d.uniform_row_weight() {
        Some(w) => println!("row weight {w}"),
        None => println!("row weight non-uniform ({})", fmt_hist(&d.row_weights)),
    }
    println!("column weights {}", fmt_hist(&d.col_weights));
    println!("mean column weight {:.4}", d.mean_col_weight);
    println!("max pairwise row overlap {}", d.max_pairwise_row_overlap);
    println!("overlapping row pairs {}", d.num_overlapping_row_pairs);
    println!("overlap histogram {}", fmt_hist(&d.overlap_histogram));
    println!("self_orthogonal {}", d.self_orthogonal);
    if d.self_orthogonal && d.full_rank() {
        let k1 = d.cols - d.rank;
        if 2 * k1 >= d.cols {
            println!("css code [[{}, {}]]", d.cols, 2 * k1 - d.cols);
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Construct { n, rows, row_weight, seed, out } => {
            let spec = CodeSpec { n, m_target: rows, row_weight, seed };
            eprintln!("config: construct {spec:?} -> {}", out.display());
            let h = construct_dual_containing_ldpc(&spec)?;
            write_alist(&h, &out)?;
            eprintln!("wrote {}x{} matrix to {}", h.num_rows(), h.num_cols(), out.display());
        }
        Command::Validate { matrix } => {
            eprintln!("config: validate {}", matrix.display());
            let d = matrix_diagnostics(&read_alist(&matrix)?);
            print_diagnostics(&d);
            if !(d.self_orthogonal && d.full_rank()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Estimate { matrix, syndrome_weight } => {
            eprintln!(
                "config: estimate matrix={} syndrome_weight={syndrome_weight}",
                matrix.display()
            );
            let code = CodeParams::of(&read_alist(&matrix)?)?;
            let est = estimate_noise(syndrome_weight, code.m, code.r)?;
            println!("n {} m {} r {}", code.n, code.m, code.r);
            println!("p_hat {}", est.p_hat);
            println!("estimated_error_count {}", est.estimated_error_count(code.n));
        }
        Command::Decode { matrix, syndrome, p, max_iters } => {
            eprintln!(
                "config: decode matrix={} syndrome={} p={p} max_iters={max_iters}",
                matrix.display(),
                syndrome.display()
            );
            let h = read_alist(&matrix)?;
            let s = read_syndrome(&syndrome)?;
            let result = sum_product_decode(&build_tanner(&h), &s, p, max_iters)?;
            println!("converged {}", result.converged);
            println!("iterations {}", result.iterations_used);
            println!("weight {}", result.error_estimate.weight());
            println!("error {}", result.error_estimate);
        }
        Command::Mse { matrix, p_list, trials, seed, out } => {
            let ps = parse_p_list(p_list.as_deref())?;
            eprintln!(
                "config: mse matrix={} p_list={ps:?} trials={trials} seed={seed} workers={workers} \
                 streams=(seed, mix(\"mse\", p, trial)) out={}",
                matrix.display(),
                out.display()
            );
            let h = read_alist(&matrix)?;
            let report = with_workers(workers, || run_mse_experiment(&h, &ps, trials, seed))??;
            report.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), out.display());
        }
        Command::Bler { matrix, p_list, scenarios, trials, max_iters, seed, out } => {
            let ps = parse_p_list(p_list.as_deref())?;
            let scenarios = Scenario::parse_list(&scenarios)?;
            eprintln!(
                "config: bler matrix={} p_list={ps:?} scenarios={} trials={trials} \
                 max_iters={max_iters} seed={seed} workers={workers} \
                 streams=(seed, mix(\"bler\", p, trial)) out={}",
                matrix.display(),
                scenarios.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
                out.display()
            );
            let h = read_alist(&matrix)?;
            let report = with_workers(workers, || {
                run_bler_experiment(&h, &ps, &scenarios, trials, max_iters, seed)
            })??;
            report.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
