//! Finite-shot estimation and preparation-cost comparison.

use rand::Rng;
use serde::Serialize;

use crate::channel::{unitary_channel, Channel};
use crate::error::{QforkError, Result};
use crate::fork::{run_sampled, run_with, Backend, ForkSpec, Measurement};
use crate::format::fmt_num;
use crate::gates;
use crate::protocols::power_sum_spec;
use crate::random::{random_unitary, stream_rng};
use crate::state::{outcome_distribution_with, sample_distribution};
use crate::tensor::{ComplexMatrix, ComplexVector};

/// Sample mean of a batch of measurement outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub shots: usize,
    pub seed: u64,
    /// Target-state preparations consumed.
    pub prep_count: usize,
    /// Standard error of `mean`.
    pub stderr: f64,
}

impl EstimateResult {
    pub fn from_samples(samples: &[f64], seed: u64, prep_count: usize) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            shots: n,
            seed,
            prep_count,
            stderr,
        }
    }
}

/// QFS estimate from `shots` samples of the forking circuit's readout.
pub fn estimate_qfs(spec: &ForkSpec, shots: usize, seed: u64) -> Result<EstimateResult> {
    run_sampled(spec, shots, seed)
}

/// Branch-by-branch estimate: each branch `i` gets `q·shots_per_branch`
/// fresh samples of `obs` on Λᵢ(ρ) (stream `i + 1` of `seed`), and the
/// result is Σᵢ pᵢ (mean̂ᵢ)^q. Consumes `d·q·shots_per_branch` preparations.
pub fn estimate_naive(
    weights: &[f64],
    channels: &[Channel],
    obs: &ComplexMatrix,
    q: usize,
    rho: &ComplexMatrix,
    shots_per_branch: usize,
    seed: u64,
) -> Result<EstimateResult> {
    crate::channel::validate_weights(weights)?;
    if channels.len() != weights.len() {
        return Err(QforkError::DimensionMismatch(format!(
            "{} channels for {} weights",
            channels.len(),
            weights.len()
        )));
    }
    if shots_per_branch == 0 || q == 0 {
        return Err(QforkError::param("shots_per_branch", "must be at least 1"));
    }
    let n = q * shots_per_branch;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (i, (&p, ch)) in weights.iter().zip(channels).enumerate() {
        let out = ch.apply(rho)?;
        let dist = outcome_distribution_with(obs, |proj| Ok(proj.trace_product(&out)?.re))?;
        let samples = sample_distribution(&dist, n, &mut stream_rng(seed, i as u64 + 1));
        let branch = EstimateResult::from_samples(&samples, seed, n);
        mean += p * branch.mean.powi(q as i32);
        let slope = q as f64 * branch.mean.powi(q as i32 - 1);
        var += (p * slope * branch.stderr).powi(2);
    }
    let total = weights.len() * n;
    Ok(EstimateResult {
        mean,
        shots: total,
        seed,
        prep_count: total,
        stderr: var.sqrt(),
    })
}

/// Fixed problem for the preparation-cost comparison.
#[derive(Clone, Debug)]
pub struct ComplexityInstance {
    pub q: usize,
    pub weights: Vec<f64>,
    pub channels: Vec<Channel>,
    pub obs: ComplexMatrix,
    pub rho: ComplexMatrix,
}

impl ComplexityInstance {
    /// `d` Haar-random unitary branches with equal weights, ψ = |0⟩, M = σ_z.
    pub fn haar(d: usize, q: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let channels = (0..d)
            .map(|_| unitary_channel(&random_unitary(2, &mut rng)).expect("Haar unitary"))
            .collect();
        Self {
            q,
            weights: vec![1.0 / d as f64; d],
            channels,
            obs: gates::pauli_z(),
            rho: ComplexVector::basis(2, 0).projector(),
        }
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }
}

impl Default for ComplexityInstance {
    /// d = 4, q = 1, unitaries drawn with seed 0.
    fn default() -> Self {
        Self::haar(4, 1, 0)
    }
}

pub const DEFAULT_EPSILONS: [f64; 5] = [0.1, 0.07, 0.05, 0.035, 0.025];

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityReport {
    pub epsilon_grid: Vec<f64>,
    pub naive_preps: Vec<usize>,
    pub qfs_preps: Vec<usize>,
    pub ratio: Vec<f64>,
    pub delta: f64,
    pub reps: usize,
    /// Budgets at which the QFS root-mean-square error was measured.
    pub rmse_budgets: Vec<usize>,
    pub qfs_rmse: Vec<f64>,
    /// Least-squares slope of log RMSE against log budget.
    pub qfs_rmse_slope: f64,
}

impl ComplexityReport {
    pub fn median_ratio(&self) -> f64 {
        median(&self.ratio)
    }

    /// `epsilon,naive_preps,qfs_preps,ratio` with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,naive_preps,qfs_preps,ratio\n");
        for i in 0..self.epsilon_grid.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_num(self.epsilon_grid[i]),
                self.naive_preps[i],
                self.qfs_preps[i],
                fmt_num(self.ratio[i])
            ));
        }
        s
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Geometric budget grid 1 ..= max with eight points per doubling.
fn budget_grid(max: usize) -> Vec<usize> {
    let mut out = vec![1usize];
    let mut k = 1;
    loop {
        let b = 2f64.powf(k as f64 / 8.0).round() as usize;
        k += 1;
        if b > max {
            break;
        }
        if b > *out.last().expect("nonempty") {
            out.push(b);
        }
    }
    out
}

/// Absolute errors `|mean of first B draws − exact|` at every grid budget,
/// one row per repetition; rep `r` reads stream `stream_base + r`.
fn error_table(
    dist: &[(f64, f64)],
    exact: f64,
    grid: &[usize],
    reps: usize,
    seed: u64,
    stream_base: u64,
) -> Vec<Vec<f64>> {
    let mut cumulative = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for (_, p) in dist {
        acc += p;
        cumulative.push(acc);
    }
    (0..reps)
        .map(|r| {
            let mut rng = stream_rng(seed, stream_base + r as u64);
            let mut sum = 0.0;
            let mut drawn = 0;
            grid.iter()
                .map(|&b| {
                    while drawn < b {
                        let u: f64 = rng.random::<f64>() * acc;
                        let k = cumulative.partition_point(|&c| c <= u).min(dist.len() - 1);
                        sum += dist[k].0;
                        drawn += 1;
                    }
                    (sum / b as f64 - exact).abs()
                })
                .collect()
        })
        .collect()
}

/// Upper (1−δ) empirical quantile of each grid column.
fn quantiles(table: &[Vec<f64>], delta: f64) -> Vec<f64> {
    let reps = table.len();
    let idx = (((1.0 - delta) * reps as f64).ceil() as usize).clamp(1, reps) - 1;
    (0..table[0].len())
        .map(|j| {
            let mut col: Vec<f64> = table.iter().map(|row| row[j]).collect();
            col.sort_by(f64::total_cmp);
            col[idx]
        })
        .collect()
}

/// Smallest grid budget from which every larger grid budget also meets `eps`.
fn first_sustained(grid: &[usize], q: &[f64], eps: f64) -> Option<usize> {
    let mut best = None;
    for j in (0..grid.len()).rev() {
        if q[j] <= eps {
            best = Some(grid[j]);
        } else {
            break;
        }
    }
    best
}

/// For each ε, the smallest preparation budget at which the (1−δ)-quantile
/// of the absolute error over `reps` repetitions is at most ε.
///
/// QFS spends its whole budget on the single forking readout. The naive
/// strategy estimates every branch term separately, each to accuracy ε with
/// the same per-branch sample count N, and spends d·q·N preparations.
pub fn complexity_sweep(
    instance: &ComplexityInstance,
    epsilons: &[f64],
    delta: f64,
    reps: usize,
    seed: u64,
) -> Result<ComplexityReport> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(QforkError::param("delta", "must lie in (0, 1)"));
    }
    if reps < 2 || epsilons.is_empty() || epsilons.iter().any(|e| *e <= 0.0) {
        return Err(QforkError::param(
            "epsilons",
            "need positive tolerances and at least two repetitions",
        ));
    }
    let ComplexityInstance {
        q,
        weights,
        channels,
        obs,
        rho,
    } = instance;
    let (q, d) = (*q, weights.len());
    let spec = power_sum_spec(q, weights, channels, obs, rho)?;
    let out = run_with(&spec, Backend::Auto)?;
    let Measurement::Expectation(joint) = &spec.measurement else {
        unreachable!("power sums measure an observable")
    };
    let qfs_dist =
        outcome_distribution_with(joint, |p| Ok(p.trace_product(&out.target_state)?.re))?;

    let eig = obs.hermitian_eig()?;
    let half_range = (eig.values[eig.values.len() - 1] - eig.values[0]).max(1e-12) / 2.0;
    let joint_range = half_range.powi(q as i32).max(half_range);
    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let max_budget = (16.0 * joint_range * joint_range / (eps_min * eps_min)).ceil() as usize;
    let grid = budget_grid(max_budget.max(64));

    let qfs_table = error_table(&qfs_dist, out.value, &grid, reps, seed, 0);
    let qfs_q = quantiles(&qfs_table, delta);

    let mut branch_q = Vec::with_capacity(d);
    for (i, ch) in channels.iter().enumerate() {
        let state = ch.apply(rho)?;
        let dist = outcome_distribution_with(obs, |p| Ok(p.trace_product(&state)?.re))?;
        let exact = obs.trace_product(&state)?.re;
        let table = error_table(&dist, exact, &grid, reps, seed, ((i + 1) * reps) as u64);
        branch_q.push(quantiles(&table, delta));
    }
    // the naive estimate is within ε only when every branch is
    let naive_q: Vec<f64> = (0..grid.len())
        .map(|j| branch_q.iter().map(|b| b[j]).fold(0.0, f64::max))
        .collect();

    let mut naive_preps = Vec::new();
    let mut qfs_preps = Vec::new();
    let mut ratio = Vec::new();
    for &eps in epsilons {
        let b = first_sustained(&grid, &qfs_q, eps).ok_or_else(|| {
            QforkError::param(
                "epsilons",
                format!("no QFS budget up to {max_budget} reaches {eps}"),
            )
        })?;
        let n = first_sustained(&grid, &naive_q, eps).ok_or_else(|| {
            QforkError::param(
                "epsilons",
                format!("no naive budget up to {max_budget} reaches {eps}"),
            )
        })?;
        let naive = d * q * n;
        naive_preps.push(naive);
        qfs_preps.push(b);
        ratio.push(naive as f64 / b as f64);
    }

    let rmse: Vec<f64> = (0..grid.len())
        .map(|j| (qfs_table.iter().map(|r| r[j] * r[j]).sum::<f64>() / reps as f64).sqrt())
        .collect();
    let fit: Vec<usize> = (0..grid.len()).filter(|&j| grid[j] >= 16).collect();
    let xs: Vec<f64> = fit.iter().map(|&j| (grid[j] as f64).ln()).collect();
    let ys: Vec<f64> = fit.iter().map(|&j| rmse[j].max(1e-300).ln()).collect();
    Ok(ComplexityReport {
        epsilon_grid: epsilons.to_vec(),
        naive_preps,
        qfs_preps,
        ratio,
        delta,
        reps,
        rmse_budgets: fit.iter().map(|&j| grid[j]).collect(),
        qfs_rmse: fit.iter().map(|&j| rmse[j]).collect(),
        qfs_rmse_slope: fit_slope(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fork::ControlSpec;
    use crate::oracle::oracle_power_sum;
    use crate::state::QuantumState;

    fn linear_spec() -> ForkSpec {
        let h = unitary_channel(&gates::hadamard()).unwrap();
        power_sum_spec(
            1,
            &[0.5, 0.5],
            &[h, Channel::identity(2)],
            &gates::pauli_z(),
            &ComplexVector::basis(2, 0).projector(),
        )
        .unwrap()
    }

    #[test]
    fn qfs_estimates() {
        let shots = 100_000;
        let e = estimate_qfs(&linear_spec(), shots, 3).unwrap();
        assert!((e.mean - 0.5).abs() <= 5.0 * e.stderr);
        assert_eq!(e.prep_count, shots);
        assert_eq!(e, estimate_qfs(&linear_spec(), shots, 3).unwrap());
        let det = ForkSpec::new(
            1,
            1,
            2,
            ControlSpec::PureWeights(vec![1.0]),
            QuantumState::single_pure(ComplexVector::basis(2, 1)).unwrap(),
            Measurement::Expectation(gates::pauli_z()),
        )
        .unwrap();
        let e = estimate_qfs(&det, 500, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (-1.0, 0.0));
    }

    #[test]
    fn naive_estimates() {
        let h = unitary_channel(&gates::hadamard()).unwrap();
        let chans = [h, Channel::identity(2)];
        let z = gates::pauli_z();
        let rho = ComplexVector::basis(2, 0).projector();
        let e = estimate_naive(&[0.5, 0.5], &chans, &z, 1, &rho, 100_000, 4).unwrap();
        assert!((e.mean - 0.5).abs() <= 5.0 * e.stderr);
        assert_eq!(e.prep_count, 2 * 100_000);

        let same = [Channel::identity(2), Channel::identity(2)];
        let plus = ComplexVector::real(&[1.0, 1.0])
            .unwrap()
            .normalized()
            .projector();
        let x = gates::pauli_x();
        let e = estimate_naive(&[0.3, 0.7], &same, &x, 1, &plus, 10, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));

        // plug-in bias of the square shrinks with the sample count
        let exact = oracle_power_sum(&[0.5, 0.5], &chans, &z, 2, &rho).unwrap();
        let bias = |n: usize| -> f64 {
            let reps = 400;
            (0..reps)
                .map(|s| {
                    estimate_naive(&[0.5, 0.5], &chans, &z, 2, &rho, n, s)
                        .unwrap()
                        .mean
                        - exact
                })
                .sum::<f64>()
                / reps as f64
        };
        let (b8, b64) = (bias(8), bias(64));
        assert!(b8 > b64 && b8 > 0.0);
        assert!(b64.abs() <= 3.0 / 64.0);
    }

    #[test]
    fn sweep_shape_and_monotonicity() {
        let inst = ComplexityInstance::default();
        let eps = [0.1, 0.05];
        let a = complexity_sweep(&inst, &eps, 0.1, 100, 5).unwrap();
        let b = complexity_sweep(&inst, &eps, 0.02, 100, 5).unwrap();
        for i in 0..eps.len() {
            assert!(b.qfs_preps[i] >= a.qfs_preps[i]);
            assert!(b.naive_preps[i] >= a.naive_preps[i]);
            assert!(a.ratio[i] > 0.0);
        }
        assert!(a.qfs_preps[1] > a.qfs_preps[0]);
        let csv = a.to_csv();
        assert!(csv.starts_with("epsilon,naive_preps,qfs_preps,ratio\n"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(a, complexity_sweep(&inst, &eps, 0.1, 100, 5).unwrap());
    }

    #[test]
    fn slope_and_median_helpers() {
        let xs = [0.0, 1.0, 2.0];
        assert!((fit_slope(&xs, &[1.0, 0.5, 0.0]) + 0.5).abs() < 1e-15);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let g = budget_grid(100);
        assert_eq!(g[0], 1);
        assert!(g.windows(2).all(|w| w[1] > w[0]) && *g.last().unwrap() <= 100);
    }
}
