//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.
//!
//! Run with `cargo test -p qce-cli --test acceptance`.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qce::codegen::{
    construct_dual_containing_ldpc, matrix_diagnostics, read_alist, write_alist, CodeSpec,
};
use qce::decoder::{build_tanner, sum_product_decode, DEFAULT_MAX_ITERS};
use qce::estimator::{estimate_noise, estimator_mse, syndrome_flip_prob};
use qce::harness::{run_bler_experiment, run_mse_experiment, two_proportion_sigma, Scenario};
use qce::{BitMatrix, BitVector};

const FLAGSHIP_SEED: u64 = 1;
const MASTER_SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Odd-term binomial sum for the probability that a weight-`r` check fires.
fn odd_term_sum(r: usize, p: f64) -> f64 {
    let mut total = 0.0;
    let mut choose = 1.0f64;
    for i in 0..=r {
        if i > 0 {
            choose = choose * (r - i + 1) as f64 / i as f64;
        }
        if i % 2 == 1 {
            total += choose * p.powi(i as i32) * (1.0 - p).powi((r - i) as i32);
        }
    }
    total
}

/// `E[(p_hat - p)^2]` summed over every syndrome weight `0..=m`.
fn direct_mse(m: usize, r: usize, p: f64) -> f64 {
    let q = odd_term_sum(r, p);
    let mut choose = 1.0f64;
    let mut total = 0.0;
    for i in 0..=m {
        if i > 0 {
            choose = choose * (m - i + 1) as f64 / i as f64;
        }
        let ph = if 2 * i <= m {
            0.5 - 0.5 * (1.0 - 2.0 * i as f64 / m as f64).powf(1.0 / r as f64)
        } else {
            0.5
        };
        total += choose * q.powi(i as i32) * (1.0 - q).powi((m - i) as i32) * (ph - p).powi(2);
    }
    total
}

fn all_vectors(n: usize) -> impl Iterator<Item = BitVector> {
    (0u32..1 << n).map(move |mask| BitVector::from_bools((0..n).map(|i| mask >> i & 1 == 1)))
}

/// Minimum distance by enumerating the null space.
fn min_distance(h: &BitMatrix) -> Option<usize> {
    all_vectors(h.num_cols())
        .filter(|c| !c.is_zero() && h.syndrome(c).unwrap().is_zero())
        .map(|c| c.weight())
        .min()
}

/// All minimum-weight vectors with syndrome `s`.
fn coset_leaders(h: &BitMatrix, s: &BitVector) -> Vec<BitVector> {
    let coset: Vec<BitVector> = all_vectors(h.num_cols())
        .filter(|e| h.syndrome(e).unwrap() == *s)
        .collect();
    let w = coset.iter().map(BitVector::weight).min().unwrap();
    coset.into_iter().filter(|e| e.weight() == w).collect()
}

// ---------------------------------------------------------------------------
// Criteria

fn closed_form_fidelity() -> Outcome {
    let mut worst = 0.0f64;
    for r in 1..=64 {
        for k in 1..=499 {
            let p = k as f64 * 0.001;
            let diff = (syndrome_flip_prob(r, p).unwrap() - odd_term_sum(r, p)).abs();
            worst = worst.max(diff);
        }
    }
    outcome(worst <= 1e-12, format!("max |closed - sum| = {worst:.3e} (tol 1e-12)"))
}

fn round_trip_inversion() -> Outcome {
    let (m, r) = (1420usize, 24usize);
    let tol = 1.0 / m as f64;
    let mut failures = Vec::new();
    let mut worst = (0.0f64, 0.0f64);
    for k in 1..=90 {
        let p = 0.005 * k as f64;
        let q = syndrome_flip_prob(r, p).unwrap();
        let s = (m as f64 * q).round() as usize;
        let err = (estimate_noise(s, m, r).unwrap().p_hat - p).abs();
        if err > worst.0 {
            worst = (err, p);
        }
        if err > tol {
            failures.push(p);
        }
    }
    let detail = match failures.first() {
        None => format!("all 90 grid points within 1/m; max error {:.3e}", worst.0),
        Some(first) => format!(
            "{} of 90 grid points exceed 1/m = {tol:.3e}, first at p = {first}; \
             max error {:.3e} at p = {}",
            failures.len(),
            worst.0,
            worst.1
        ),
    };
    outcome(failures.is_empty(), detail)
}

fn mse_closed_form_matches_direct() -> Outcome {
    let mut worst = 0.0f64;
    for m in 1..=200 {
        for r in [2, 10, 24] {
            for p in [0.01, 0.1, 0.3] {
                let diff = (estimator_mse(m, r, p).unwrap() - direct_mse(m, r, p)).abs();
                worst = worst.max(diff);
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |closed - direct| = {worst:.3e} (tol 1e-12)"))
}

fn syndrome_weight_law(h: &BitMatrix) -> Outcome {
    let report = run_mse_experiment(h, &[0.02], 100_000, MASTER_SEED).unwrap();
    let row = &report.rows[0];
    let m = h.num_rows() as f64;
    let q = syndrome_flip_prob(24, 0.02).unwrap();
    let (mean_ref, var_ref) = (m * q, m * q * (1.0 - q));
    let mean_ok = (row.mean_syndrome_weight / mean_ref - 1.0).abs() <= 0.01;
    let var_ok = (row.var_syndrome_weight / var_ref - 1.0).abs() <= 0.20;
    outcome(
        mean_ok && var_ok,
        format!(
            "mean wt(s) {:.2} vs {mean_ref:.2} (1%: {}); var {:.1} vs {var_ref:.1} (20%: {})",
            row.mean_syndrome_weight,
            if mean_ok { "ok" } else { "FAIL" },
            row.var_syndrome_weight,
            if var_ok { "ok" } else { "FAIL" },
        ),
    )
}

fn estimator_quality(h: &BitMatrix) -> Outcome {
    let report = run_mse_experiment(h, &[0.02], 10_000, MASTER_SEED).unwrap();
    let row = &report.rows[0];
    let mse_ok = row.mse_phat >= 1.4e-6 / 2.0 && row.mse_phat <= 1.4e-6 * 2.0;
    let ref_ok = (row.mse_perfect_ref / 5.1e-6 - 1.0).abs() <= 0.10;
    let ratio_ok = (1.000..=1.020).contains(&row.mean_ratio);
    outcome(
        mse_ok && ref_ok && ratio_ok,
        format!(
            "MSE(p_hat) {:.3e} (reference 1.4e-6, x2); MSE(p) {:.3e} (reference 5.1e-6, 10%); \
             ratio {:.4} (reference 1.008, [1.000, 1.020]); MSE vs p {:.3e}",
            row.mse_phat, row.mse_perfect_ref, row.mean_ratio, row.mse_phat_vs_p
        ),
    )
}

fn hamming_oracle() -> Outcome {
    let rows: Vec<Vec<u8>> = (0..3)
        .map(|bit| (1..=7u8).map(|c| (c >> bit) & 1).collect())
        .collect();
    let h = BitMatrix::from_dense(&rows).unwrap();
    let g = build_tanner(&h);
    let mut exact = 0;
    let mut errors: Vec<BitVector> = vec![BitVector::zeros(7)];
    errors.extend((0..7).map(|j| BitVector::from_support(7, &[j]).unwrap()));
    for e in &errors {
        let s = h.syndrome(e).unwrap();
        let leaders = coset_leaders(&h, &s);
        let r = sum_product_decode(&g, &s, 0.05, DEFAULT_MAX_ITERS).unwrap();
        if leaders.len() == 1 && r.converged && r.error_estimate == leaders[0] {
            exact += 1;
        }
    }
    outcome(exact == 8, format!("{exact}/8 syndromes decoded to the coset leader"))
}

fn random_small_code(rng: &mut ChaCha8Rng) -> (BitMatrix, usize) {
    loop {
        let n = rng.random_range(6..=12);
        let m = rng.random_range(3..n);
        let rows: Vec<Vec<u8>> = (0..m)
            .map(|_| (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect())
            .collect();
        let Ok(h) = BitMatrix::from_dense(&rows) else { continue };
        if h.row_weights().contains(&0) {
            continue;
        }
        if let Some(d) = min_distance(&h) {
            if d >= 3 {
                return (h, (d - 1) / 2);
            }
        }
    }
}

fn random_code_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let trials = 10_000;
    let mut agree = 0;
    let mut code = random_small_code(&mut rng);
    for t in 0..trials {
        if t % 20 == 0 {
            code = random_small_code(&mut rng);
        }
        let (h, radius) = &code;
        let n = h.num_cols();
        let weight = rng.random_range(0..=*radius);
        let mut positions: Vec<usize> = (0..n).collect();
        for i in 0..weight {
            let j = rng.random_range(i..n);
            positions.swap(i, j);
        }
        let e = BitVector::from_support(n, &positions[..weight]).unwrap();
        let s = h.syndrome(&e).unwrap();
        let leaders = coset_leaders(h, &s);
        assert_eq!(leaders, vec![e.clone()], "error within the packing radius is the unique leader");
        let r = sum_product_decode(&build_tanner(h), &s, 0.05, DEFAULT_MAX_ITERS).unwrap();
        if r.converged && r.error_estimate == leaders[0] {
            agree += 1;
        }
    }
    let rate = agree as f64 / trials as f64;
    outcome(
        rate >= 0.99,
        format!("{agree}/{trials} = {:.2}% agree with the ML coset leader (need 99%)", rate * 100.0),
    )
}

fn scenario_ordering(h: &BitMatrix) -> Outcome {
    let scenarios = Scenario::standard();
    let trials = 3000;
    let report =
        run_bler_experiment(h, &[0.03], &scenarios, trials, DEFAULT_MAX_ITERS, MASTER_SEED)
            .unwrap();
    let fixed = report.row(scenarios[0], 0.03).unwrap();
    let perfect = report.row(Scenario::Perfect, 0.03).unwrap();
    let estimated = report.row(Scenario::Estimated, 0.03).unwrap();
    let z_fixed = two_proportion_sigma(estimated.block_errors, trials, fixed.block_errors, trials)
        .unwrap();
    let z_perfect =
        two_proportion_sigma(perfect.block_errors, trials, estimated.block_errors, trials)
            .unwrap();
    outcome(
        z_fixed >= 3.0 && z_perfect <= 2.0,
        format!(
            "BLER fixed:0.02 {:.4}, perfect {:.4}, estimated {:.4}; \
             fixed over estimated {z_fixed:.2} sigma (need >= 3); \
             estimated over perfect {z_perfect:.2} sigma (need <= 2)",
            fixed.bler, perfect.bler, estimated.bler
        ),
    )
}

fn construction(h: &BitMatrix) -> Outcome {
    let d = matrix_diagnostics(h);
    let k1 = d.cols - d.rank;
    let css_k = 2 * k1 - d.cols;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flagship.alist");
    write_alist(h, &path).unwrap();
    let round_trip = read_alist(&path).unwrap() == *h;
    let pass = d.rank == 1420
        && d.uniform_row_weight() == Some(24)
        && d.self_orthogonal
        && (d.cols, css_k) == (3786, 946)
        && round_trip;
    outcome(
        pass,
        format!(
            "rank {}, row weight {:?}, H·Hᵀ=0 {}, [[{}, {css_k}]], mean column weight {:.4}, \
             max row overlap {}, alist round-trip {}",
            d.rank,
            d.uniform_row_weight(),
            d.self_orthogonal,
            d.cols,
            d.mean_col_weight,
            d.max_pairwise_row_overlap,
            round_trip
        ),
    )
}

fn cli_determinism(h: &BitMatrix) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("h.alist");
    write_alist(h, &matrix).unwrap();
    let run = |workers: &str, out: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_qce"))
            .args(["bler", "--matrix"])
            .arg(&matrix)
            .args(["--p-list", "0.025,0.03", "--trials", "40", "--max-iters", "40"])
            .args(["--seed", "7", "--workers", workers, "--out"])
            .arg(&out)
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    outcome(
        a == b && !a.is_empty(),
        format!("1 worker vs 4 workers: {} bytes, identical = {}", a.len(), a == b),
    )
}

fn main() {
    let h = construct_dual_containing_ldpc(&CodeSpec::flagship(FLAGSHIP_SEED)).unwrap();

    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("estimator closed form vs odd-term sum", Box::new(closed_form_fidelity)),
        ("round-trip inversion (m=1420, r=24)", Box::new(round_trip_inversion)),
        ("MSE closed form vs direct expectation", Box::new(mse_closed_form_matches_direct)),
        ("syndrome weight ~ Binomial(m, q) at p=0.02", Box::new(|| syndrome_weight_law(&h))),
        ("estimator quality at p=0.02", Box::new(|| estimator_quality(&h))),
        ("decoder vs coset leader: Hamming(7,4)", Box::new(hamming_oracle)),
        ("decoder vs coset leader: random n<=12", Box::new(random_code_oracle)),
        ("scenario BLER ordering at p=0.03", Box::new(|| scenario_ordering(&h))),
        ("flagship code construction", Box::new(|| construction(&h))),
        ("bler CSV determinism across workers", Box::new(|| cli_determinism(&h))),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
