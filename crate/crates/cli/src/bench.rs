//! Solver timing on random scale programs.

use std::time::Instant;

use linscale::sdlp::{self, LowDimLP, SolverParams, MAX_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CliError, CliResult};

pub const MAX_BENCH_M: usize = 1_000_000;

/// A scale program with `m` point rows in `dim` LP variables (`dim − 1` spatial): half the
/// rows are body points around the seed, half are obstacle points about 3 units away.
pub fn scale_instance(dim: usize, m: usize, rng: &mut ChaCha8Rng) -> LowDimLP {
    let n = dim - 1;
    let mut objective = vec![0.0; dim];
    objective[n] = 1.0;
    let mut lp = LowDimLP::with_capacity(dim, &objective, m + 2 * n + 1).expect("valid dimension");
    let mut row = vec![0.0; dim];
    // Axis points keep the seed strictly inside the body.
    for k in 0..2 * n {
        row.fill(0.0);
        row[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
        lp.add_constraint(&row, 1.0).unwrap();
    }
    let n_body = m / 2;
    for _ in 0..n_body {
        for v in row.iter_mut().take(n) {
            *v = rng.random_range(-1.0..1.0);
        }
        row[n] = 0.0;
        lp.add_constraint(&row, 1.0).unwrap();
    }
    for _ in n_body..m {
        for (k, v) in row.iter_mut().take(n).enumerate() {
            let center = if k == 0 { 3.0 } else { 0.0 };
            *v = -(center + rng.random_range(-1.0..1.0));
        }
        row[n] = 1.0;
        lp.add_constraint(&row, 0.0).unwrap();
    }
    row.fill(0.0);
    row[n] = -1.0;
    lp.add_constraint(&row, 0.0).unwrap();
    lp
}

fn percentile(sorted: &[u128], p: f64) -> u128 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

/// Median and 95th-percentile solve times per size; instances depend only on the seed.
pub fn measure(dim: usize, m_list: &[usize], trials: usize, rng_seed: u64) -> CliResult<Vec<(usize, u128, u128)>> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(CliError::Validation(format!("--dim: must be in 2..={MAX_DIM}, got {dim}")));
    }
    if trials == 0 {
        return Err(CliError::Validation("--trials: must be positive".into()));
    }
    if let Some(m) = m_list.iter().find(|&&m| m == 0 || m > MAX_BENCH_M) {
        return Err(CliError::Validation(format!("--m-list: sizes must be in 1..={MAX_BENCH_M}, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut times = Vec::with_capacity(trials);
        for trial in 0..trials {
            let lp = scale_instance(dim, m, &mut rng);
            let params = SolverParams { rng_seed: trial as u64, ..SolverParams::default() };
            let clock = Instant::now();
            let sol = sdlp::solve(&lp, &params)?;
            times.push(clock.elapsed().as_nanos());
            std::hint::black_box(sol);
        }
        times.sort_unstable();
        rows.push((m, percentile(&times, 0.5), percentile(&times, 0.95)));
    }
    Ok(rows)
}

pub fn cmd_bench(dim: usize, m_list: &[usize], trials: usize, rng_seed: u64) -> CliResult<String> {
    let mut out = String::from("m,median_ns,p95_ns\n");
    for (m, median, p95) in measure(dim, m_list, trials, rng_seed)? {
        out.push_str(&format!("{m},{median},{p95}\n"));
    }
    Ok(out)
}

/// Least-squares slope of `log(time)` against `log(m)`.
pub fn log_log_slope(rows: &[(usize, u128, u128)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(m, t, _)| ((m as f64).ln(), (t.max(1) as f64).ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}
