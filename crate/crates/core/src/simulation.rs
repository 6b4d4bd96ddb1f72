//! Synthetic rank-one instances, multiplicative noise, and Monte-Carlo studies.
//!
//! Every random draw comes from a ChaCha stream whose seed is derived from the
//! caller's seed and the draw's role (mask index, noise level, trial index), so
//! results do not depend on how work is scheduled across threads.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    kernel_system, optimal_alpha, path_kernel, KernelSystem, NoiseSpec, Observations,
};
use crate::mask_graph::{CompletionGraph, Entry, Mask};
use crate::path_basis::{path_space_basis, shortest_path_chain, PathBasis, PathChain};

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the sub-stream `path` under `seed`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rank-one matrix `A = u w^T` with no zero entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneInstance {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl RankOneInstance {
    pub fn rows(&self) -> usize {
        self.u.len()
    }

    pub fn cols(&self) -> usize {
        self.w.len()
    }

    pub fn value(&self, (i, j): Entry) -> f64 {
        self.u[i] * self.w[j]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.u
            .iter()
            .map(|&a| self.w.iter().map(|&b| a * b).collect())
            .collect()
    }

    /// Noise-free observations on the graph's known entries.
    pub fn observe_exact(&self, graph: &CompletionGraph) -> Observations {
        Observations::on_graph(graph, |e| self.value(e))
    }
}

fn magnitudes(len: usize, rng: &mut ChaCha8Rng, signed: bool) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let m = rng.random_range(0.5..=2.0);
            if signed && rng.random_bool(0.5) {
                -m
            } else {
                m
            }
        })
        .collect()
}

/// Positive rank-one instance with `u_i, w_j` uniform in `[0.5, 2]`.
pub fn sample_instance(rows: usize, cols: usize, seed: u64) -> RankOneInstance {
    let mut rng = rng_for(derive_seed(seed, &[0]));
    let u = magnitudes(rows, &mut rng, false);
    let w = magnitudes(cols, &mut rng, false);
    RankOneInstance { u, w }
}

/// As [`sample_instance`], with independent random signs on `u` and `w`.
pub fn sample_signed_instance(rows: usize, cols: usize, seed: u64) -> RankOneInstance {
    let mut rng = rng_for(derive_seed(seed, &[1]));
    let u = magnitudes(rows, &mut rng, true);
    let w = magnitudes(cols, &mut rng, true);
    RankOneInstance { u, w }
}

/// `known` distinct positions drawn uniformly without replacement.
pub fn sample_mask(rows: usize, cols: usize, known: usize, seed: u64) -> Result<Mask> {
    let total = rows * cols;
    if known > total {
        return Err(Error::TooManyEntries {
            k: known,
            rows,
            cols,
        });
    }
    let mut rng = rng_for(derive_seed(seed, &[2]));
    let picks = index::sample(&mut rng, total, known);
    Mask::new(rows, cols, picks.into_iter().map(|k| (k / cols, k % cols)))
}

/// A mask whose completion graph is connected: a random spanning tree plus
/// `known - (rows + cols - 1)` further uniform positions.
pub fn sample_connected_mask(rows: usize, cols: usize, known: usize, seed: u64) -> Result<Mask> {
    let total = rows * cols;
    if known > total {
        return Err(Error::TooManyEntries {
            k: known,
            rows,
            cols,
        });
    }
    if rows == 0 || cols == 0 || known < rows + cols - 1 {
        return Err(Error::InvalidArgument(format!(
            "a connected {rows}x{cols} mask needs at least {} entries",
            (rows + cols).saturating_sub(1)
        )));
    }
    let mut rng = rng_for(derive_seed(seed, &[3]));
    let mut chosen = vec![false; total];
    // vertices in random order; each new vertex hooks onto an earlier one of the other colour
    let mut order: Vec<usize> = (0..rows + cols).collect();
    for k in (1..order.len()).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let first_blue = order.iter().position(|&v| v < rows).expect("rows >= 1");
    let first_red = order.iter().position(|&v| v >= rows).expect("cols >= 1");
    let (b0, r0) = (order[first_blue], order[first_red] - rows);
    chosen[b0 * cols + r0] = true;
    let mut blues = vec![b0];
    let mut reds = vec![r0];
    for (pos, &v) in order.iter().enumerate() {
        if pos == first_blue || pos == first_red {
            continue;
        }
        if v < rows {
            let r = reds[rng.random_range(0..reds.len())];
            chosen[v * cols + r] = true;
            blues.push(v);
        } else {
            let b = blues[rng.random_range(0..blues.len())];
            chosen[b * cols + (v - rows)] = true;
            reds.push(v - rows);
        }
    }
    let free: Vec<usize> = (0..total).filter(|&k| !chosen[k]).collect();
    let extra = known - (rows + cols - 1);
    for k in index::sample(&mut rng, free.len(), extra) {
        chosen[free[k]] = true;
    }
    Mask::new(
        rows,
        cols,
        (0..total)
            .filter(|&k| chosen[k])
            .map(|k| (k / cols, k % cols)),
    )
}

/// Zero-mean law of `log eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// `log eps ~ N(0, sigma)`.
    #[default]
    LogNormal,
    /// `log eps = +-sqrt(sigma)` with equal probability.
    TwoPoint,
}

impl NoiseLaw {
    fn draw(self, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        let sd = sigma.sqrt();
        match self {
            NoiseLaw::LogNormal => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            NoiseLaw::TwoPoint => {
                if rng.random_bool(0.5) {
                    sd
                } else {
                    -sd
                }
            }
        }
    }
}

/// Multiplicative noise: `B_e = A_e * exp(z_e)` with `z_e` drawn from `law` at variance `sigma_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub law: NoiseLaw,
    pub sigma: NoiseSpec,
}

impl NoiseModel {
    pub fn log_normal(sigma: f64) -> Result<Self> {
        Ok(NoiseModel {
            law: NoiseLaw::LogNormal,
            sigma: NoiseSpec::uniform(sigma)?,
        })
    }
}

/// Noisy observations of `instance` on the known entries of `mask`.
pub fn apply_noise(
    instance: &RankOneInstance,
    mask: &Mask,
    model: &NoiseModel,
    seed: u64,
) -> Result<Observations> {
    let mut rng = rng_for(seed);
    noisy_observations(instance, mask, model, &mut rng)
}

fn noisy_observations(
    instance: &RankOneInstance,
    mask: &Mask,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Result<Observations> {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut values = vec![None; rows * cols];
    for &(i, j) in mask.known() {
        let s = model.sigma.sigma((i, j))?;
        let z = model.law.draw(s, rng);
        values[i * cols + j] = Some(instance.value((i, j)) * z.exp());
    }
    Observations::new(rows, cols, values)
}

/// The estimators compared in the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Variance-minimizing weights over the path basis.
    Optimal,
    /// Equal weights `1/p` over the same basis.
    UniformAlpha,
    /// A single minimum-edge-count path.
    ShortestPath,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Optimal, Method::UniformAlpha, Method::ShortestPath];

    pub fn name(self) -> &'static str {
        match self {
            Method::Optimal => "optimal",
            Method::UniformAlpha => "uniform_alpha",
            Method::ShortestPath => "shortest_path",
        }
    }
}

fn uniform_weights(basis: &PathBasis) -> Vec<(Entry, f64)> {
    let share = 1.0 / basis.len() as f64;
    let total = basis
        .chains
        .iter()
        .fold(PathChain::default(), |acc, c| acc.add(c));
    // every chain gets weight 1/p, so the summed chain scaled by 1/p is the estimator
    total
        .terms()
        .iter()
        .map(|&(e, c)| (e, c as f64 * share))
        .collect()
}

fn chain_weights(chain: &PathChain) -> Vec<(Entry, f64)> {
    chain.terms().iter().map(|&(e, c)| (e, c as f64)).collect()
}

/// Per-edge weights of each method for one target, plus the optimal variance.
struct TargetWeights {
    predicted: f64,
    /// Indexed like [`Method::ALL`].
    weights: [Vec<(Entry, f64)>; 3],
    negative: bool,
}

fn target_weights(
    basis: &PathBasis,
    shortest: &PathChain,
    noise: &NoiseSpec,
    signs: &dyn Fn(Entry) -> bool,
) -> Result<TargetWeights> {
    let system = optimal_alpha(path_kernel(basis.clone(), noise)?)?;
    let negative = shortest
        .terms()
        .iter()
        .filter(|&&(e, c)| c % 2 != 0 && signs(e))
        .count()
        % 2
        == 1;
    Ok(TargetWeights {
        predicted: system.variance,
        weights: [
            system.edge_weights(),
            uniform_weights(basis),
            chain_weights(shortest),
        ],
        negative,
    })
}

/// Empirical moments of one estimator's log-domain error over many trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMoments {
    pub trials: usize,
    /// Mean of `log |A_hat| - log |A|`.
    pub mean_error: f64,
    /// Standard error of `mean_error`.
    pub mean_std_error: f64,
    /// Sample variance of `log |A_hat|`.
    pub variance: f64,
    /// Standard error of `variance` from the fourth central moment.
    pub variance_std_error: f64,
}

impl ErrorMoments {
    /// Moments of `errors`, accumulated as offsets from the first sample so
    /// identical samples give a variance of exactly zero.
    pub fn from_errors(errors: &[f64]) -> Self {
        let n = errors.len();
        if n == 0 {
            return ErrorMoments {
                trials: 0,
                mean_error: f64::NAN,
                mean_std_error: f64::NAN,
                variance: f64::NAN,
                variance_std_error: f64::NAN,
            };
        }
        let shift = errors[0];
        let nf = n as f64;
        let mean_d = errors.iter().map(|&e| e - shift).sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &e in errors {
            let d = e - shift - mean_d;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        let variance = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
        let pop2 = m2 / nf;
        let pop4 = m4 / nf;
        ErrorMoments {
            trials: n,
            mean_error: shift + mean_d,
            mean_std_error: (variance / nf).sqrt(),
            variance,
            variance_std_error: ((pop4 - pop2 * pop2).max(0.0) / nf).sqrt(),
        }
    }
}

/// Empirical and predicted variance of the optimal log-estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub empirical_variance: f64,
    pub predicted_variance: f64,
    pub moments: ErrorMoments,
}

/// Monte-Carlo study of one entry: per-method error moments over `trials`
/// independent noise draws, the instance held fixed.
pub fn monte_carlo_methods(
    instance: &RankOneInstance,
    mask: &Mask,
    entry: Entry,
    model: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<(f64, [ErrorMoments; 3])> {
    let graph = CompletionGraph::build(mask);
    let system: KernelSystem = kernel_system(&graph, entry, &model.sigma)?;
    let uniform = uniform_weights(&system.basis);
    let shortest = shortest_path_chain(&graph, entry)?.ok_or(Error::NotReconstructible(entry))?;
    let shortest = chain_weights(&shortest);
    let truth = instance.value(entry).abs().ln();

    let per_trial: Vec<[f64; 3]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<[f64; 3]> {
            let obs = apply_noise(instance, mask, model, derive_seed(seed, &[4, t]))?;
            let eval = |w: &[(Entry, f64)]| -> Result<f64> {
                w.iter()
                    .map(|&(e, c)| obs.log_abs(e).map(|(b, _)| c * b))
                    .sum::<Result<f64>>()
            };
            Ok([
                system.log_magnitude(&obs)? - truth,
                eval(&uniform)? - truth,
                eval(&shortest)? - truth,
            ])
        })
        .collect::<Result<_>>()?;

    let moments = std::array::from_fn(|k| {
        let errs: Vec<f64> = per_trial.iter().map(|r| r[k]).collect();
        ErrorMoments::from_errors(&errs)
    });
    Ok((system.variance, moments))
}

/// Empirical variance of the optimal log-estimate against its predicted value.
pub fn monte_carlo_variance(
    instance: &RankOneInstance,
    mask: &Mask,
    entry: Entry,
    model: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    let (predicted, moments) = monte_carlo_methods(instance, mask, entry, model, trials, seed)?;
    Ok(MonteCarloResult {
        empirical_variance: moments[0].variance,
        predicted_variance: predicted,
        moments: moments[0],
    })
}

/// Parameters of a noise-level sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub rows: usize,
    pub cols: usize,
    pub known: usize,
    pub masks: usize,
    pub levels: Vec<f64>,
    /// Noise draws per mask and level.
    pub trials: usize,
    pub seed: u64,
    pub law: NoiseLaw,
}

/// Below this many trials per entry the report is flagged low-confidence.
pub const LOW_CONFIDENCE_TRIALS: usize = 10;

/// One method's errors on one entry, over the trials of a level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    /// Estimate from the first trial.
    pub estimate: f64,
    /// Mean of `log |A_hat| - log |A|`.
    pub mean_error: f64,
    pub mean_sq_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub mask: usize,
    pub level: f64,
    pub entry: Entry,
    pub truth: f64,
    pub predicted_variance: f64,
    /// Indexed like [`Method::ALL`].
    pub outcomes: [MethodOutcome; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: f64,
    pub method: Method,
    pub entries: usize,
    pub mse: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: SweepConfig,
    pub records: Vec<EntryRecord>,
    pub mse: Vec<LevelSummary>,
    pub low_confidence: bool,
}

impl TrialReport {
    pub fn summary(&self, level: f64, method: Method) -> Option<&LevelSummary> {
        self.mse
            .iter()
            .find(|s| s.level == level && s.method == method)
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = ErrorMoments::from_errors(values);
    (
        m.mean_error,
        if values.len() > 1 {
            m.mean_std_error
        } else {
            0.0
        },
    )
}

/// Completes every reconstructible missing entry of random masks at each
/// noise level with the optimal estimator and both baselines.
pub fn noise_sweep(config: &SweepConfig) -> Result<TrialReport> {
    if config.levels.is_empty() {
        return Err(Error::InvalidArgument("no noise levels given".into()));
    }
    if config.trials == 0 || config.masks == 0 {
        return Err(Error::InvalidArgument(
            "trials and masks must be positive".into(),
        ));
    }
    for &level in &config.levels {
        NoiseSpec::uniform(level)?;
    }
    let instance = sample_instance(config.rows, config.cols, config.seed);
    let mut records = Vec::new();

    for mask_idx in 0..config.masks {
        let mask = sample_mask(
            config.rows,
            config.cols,
            config.known,
            derive_seed(config.seed, &[5, mask_idx as u64]),
        )?;
        let graph = CompletionGraph::build(&mask);
        let targets: Vec<Entry> = graph
            .reconstructible_set()
            .into_iter()
            .filter(|&e| !graph.has_edge(e))
            .collect();
        let prepared: Vec<(PathBasis, PathChain)> = targets
            .par_iter()
            .map(|&e| {
                let basis = path_space_basis(&graph, e)?;
                let shortest =
                    shortest_path_chain(&graph, e)?.ok_or(Error::NotReconstructible(e))?;
                Ok((basis, shortest))
            })
            .collect::<Result<_>>()?;

        let k = graph.edges().len();
        let log_truth: Vec<f64> = graph
            .edges()
            .iter()
            .map(|&e| instance.value(e).abs().ln())
            .collect();
        let signs = |e: Entry| instance.value(e) < 0.0;

        for (level_idx, &level) in config.levels.iter().enumerate() {
            let noise = NoiseSpec::Uniform(level);
            let weights: Vec<TargetWeights> = prepared
                .par_iter()
                .map(|(basis, shortest)| target_weights(basis, shortest, &noise, &signs))
                .collect::<Result<_>>()?;

            // observed log-entries, one column per trial
            let mut logs = DMatrix::<f64>::zeros(k, config.trials);
            for t in 0..config.trials {
                let mut rng = rng_for(derive_seed(
                    config.seed,
                    &[6, mask_idx as u64, level_idx as u64, t as u64],
                ));
                for e in 0..k {
                    logs[(e, t)] = log_truth[e] + config.law.draw(level, &mut rng);
                }
            }

            let mut outcomes = vec![
                [MethodOutcome {
                    estimate: 0.0,
                    mean_error: 0.0,
                    mean_sq_error: 0.0,
                }; 3];
                targets.len()
            ];
            for m in 0..3 {
                let mut w = DMatrix::<f64>::zeros(targets.len(), k);
                for (row, tw) in weights.iter().enumerate() {
                    for &(e, c) in &tw.weights[m] {
                        w[(row, graph.edge_id(e).expect("weights live on mask edges"))] = c;
                    }
                }
                let estimates = &w * &logs;
                for (row, &target) in targets.iter().enumerate() {
                    let truth = instance.value(target).abs().ln();
                    let (mut sum, mut sq) = (0.0, 0.0);
                    for t in 0..config.trials {
                        let err = estimates[(row, t)] - truth;
                        sum += err;
                        sq += err * err;
                    }
                    let magnitude = estimates[(row, 0)].exp();
                    outcomes[row][m] = MethodOutcome {
                        estimate: if weights[row].negative {
                            -magnitude
                        } else {
                            magnitude
                        },
                        mean_error: sum / config.trials as f64,
                        mean_sq_error: sq / config.trials as f64,
                    };
                }
            }

            for (row, &target) in targets.iter().enumerate() {
                records.push(EntryRecord {
                    mask: mask_idx,
                    level,
                    entry: target,
                    truth: instance.value(target),
                    predicted_variance: weights[row].predicted,
                    outcomes: outcomes[row],
                });
            }
        }
    }

    let mut mse = Vec::new();
    for &level in &config.levels {
        for (m, &method) in Method::ALL.iter().enumerate() {
            let sq: Vec<f64> = records
                .iter()
                .filter(|r| r.level == level)
                .map(|r| r.outcomes[m].mean_sq_error)
                .collect();
            let (mean, se) = mean_and_se(&sq);
            mse.push(LevelSummary {
                level,
                method,
                entries: sq.len(),
                mse: mean,
                std_error: se,
            });
        }
    }

    Ok(TrialReport {
        config: config.clone(),
        records,
        mse,
        low_confidence: config.trials < LOW_CONFIDENCE_TRIALS,
    })
}

/// One (predicted variance, realized error) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub predicted: f64,
    pub error: f64,
    pub sq_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBin {
    pub index: usize,
    pub count: usize,
    pub min_predicted: f64,
    pub mean_predicted: f64,
    pub mean_error: f64,
    pub mean_abs_error: f64,
    pub mean_sq_error: f64,
}

/// Sorts points by predicted variance and splits them into `bins` groups
/// whose sizes differ by at most one.
pub fn bin_points(mut points: Vec<ErrorPoint>, bins: usize) -> Result<Vec<ErrorBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    if points.len() < bins {
        return Err(Error::TooFewPoints {
            needed: bins,
            got: points.len(),
        });
    }
    points.sort_by(|a, b| a.predicted.total_cmp(&b.predicted));
    let base = points.len() / bins;
    let extra = points.len() % bins;
    let mut out = Vec::with_capacity(bins);
    let mut start = 0;
    for index in 0..bins {
        let len = base + usize::from(index < extra);
        let chunk = &points[start..start + len];
        start += len;
        let n = len as f64;
        out.push(ErrorBin {
            index,
            count: len,
            min_predicted: chunk[0].predicted,
            mean_predicted: chunk.iter().map(|p| p.predicted).sum::<f64>() / n,
            mean_error: chunk.iter().map(|p| p.error).sum::<f64>() / n,
            mean_abs_error: chunk.iter().map(|p| p.error.abs()).sum::<f64>() / n,
            mean_sq_error: chunk.iter().map(|p| p.sq_error).sum::<f64>() / n,
        });
    }
    Ok(out)
}

/// Bins one method's realized errors by the optimal predicted variance.
pub fn bin_error_vs_variance(
    report: &TrialReport,
    method: Method,
    bins: usize,
) -> Result<Vec<ErrorBin>> {
    let m = Method::ALL
        .iter()
        .position(|&x| x == method)
        .expect("known method");
    let points = report
        .records
        .iter()
        .map(|r| ErrorPoint {
            predicted: r.predicted_variance,
            error: r.outcomes[m].mean_error,
            sq_error: r.outcomes[m].mean_sq_error,
        })
        .collect();
    bin_points(points, bins)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // 1-based average rank of the tie group
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            r[k] = avg;
        }
        start = end;
    }
    r
}

/// Spearman rank correlation; ties get average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
