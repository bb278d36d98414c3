//! Discrete Differential Evolution over integer vectors.
//!
//! Individuals live in integer space. Each generation they are mapped to
//! reals with the forward transform, perturbed with the DE/best/1 mutant and
//! binomial crossover, mapped back with the backward transform (rounding to
//! the nearest integer) and kept only if they do not worsen the target.
//! Vectors that leave `[lower_bound, upper_bound]` are assigned
//! `penalty_cost` without calling the objective.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum DdeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value {0} in backward transform")]
    NonFinite(f64),
    #[error("objective failed at generation {generation}, individual {individual}: {source}")]
    Objective {
        generation: usize,
        individual: usize,
        #[source]
        source: BoxError,
    },
}

/// Cost function over integer vectors; lower is better.
///
/// Implemented for every `Fn(&[i64]) -> f64 + Sync`. Implement it directly
/// when evaluation can fail.
pub trait Objective: Sync {
    fn evaluate(&self, candidate: &[i64]) -> Result<f64, BoxError>;
}

impl<F> Objective for F
where
    F: Fn(&[i64]) -> f64 + Sync,
{
    fn evaluate(&self, candidate: &[i64]) -> Result<f64, BoxError> {
        Ok(self(candidate))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdeConfig {
    /// Mutation scale factor F.
    pub f: f64,
    /// Crossover constant Cr.
    pub cr: f64,
    pub pop_size: usize,
    pub dim: usize,
    pub lower_bound: i64,
    pub upper_bound: i64,
    pub max_generations: usize,
    /// Transform factor h.
    pub h: f64,
    /// Upper range B of the integer/real transforms. Raised automatically
    /// when `upper_bound >= transform_cap`, see [`DdeConfig::effective_transform_cap`].
    pub transform_cap: i64,
    pub penalty_cost: f64,
    /// Stop as soon as the best objective is `<=` this value.
    pub target_objective: Option<f64>,
    pub seed: u64,
    /// Evaluate each generation's trials on the rayon pool. Ignored without
    /// the `parallel` feature; results are identical either way.
    pub parallel: bool,
}

impl Default for DdeConfig {
    fn default() -> Self {
        Self {
            f: 0.25,
            cr: 0.80,
            pop_size: 30,
            dim: 3,
            lower_bound: 1,
            upper_bound: 999,
            max_generations: 100,
            h: 100.0,
            transform_cap: 1000,
            penalty_cost: 2.0,
            target_objective: None,
            seed: 0,
            parallel: true,
        }
    }
}

impl DdeConfig {
    pub fn validate(&self) -> Result<(), DdeError> {
        let err = |m: String| Err(DdeError::Config(m));
        if !(self.f > 0.0 && self.f.is_finite()) {
            return err(format!("f must be > 0, got {}", self.f));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return err(format!("cr must lie in [0, 1], got {}", self.cr));
        }
        if self.pop_size < 4 {
            return err(format!("pop_size must be >= 4, got {}", self.pop_size));
        }
        if self.dim < 1 {
            return err("dim must be >= 1".into());
        }
        if self.upper_bound < self.lower_bound {
            return err(format!(
                "upper_bound {} < lower_bound {}",
                self.upper_bound, self.lower_bound
            ));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return err(format!("h must be > 0, got {}", self.h));
        }
        if self.transform_cap < 2 {
            return err(format!("transform_cap must be >= 2, got {}", self.transform_cap));
        }
        if !self.penalty_cost.is_finite() {
            return err("penalty_cost must be finite".into());
        }
        Ok(())
    }

    /// `transform_cap`, or the smallest power of ten exceeding `upper_bound`
    /// when the configured cap is not larger than it.
    pub fn effective_transform_cap(&self) -> i64 {
        if self.upper_bound < self.transform_cap {
            return self.transform_cap;
        }
        let mut cap: i64 = 10;
        while cap <= self.upper_bound {
            cap = cap.saturating_mul(10);
        }
        cap
    }

    pub fn transform(&self) -> Transform {
        Transform {
            h: self.h,
            cap: self.effective_transform_cap(),
        }
    }
}

/// Affine integer/real conversion pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub h: f64,
    pub cap: i64,
}

impl Transform {
    /// `-1 + x·h·5 / (B - 1)`
    pub fn forward(&self, x: i64) -> f64 {
        -1.0 + (x as f64 * self.h * 5.0) / (self.cap - 1) as f64
    }

    /// `(1 + x')·(B - 1) / (5·h)`, rounded half away from zero.
    pub fn backward(&self, x: f64) -> Result<i64, DdeError> {
        if !x.is_finite() {
            return Err(DdeError::NonFinite(x));
        }
        let scale = (self.cap - 1) as f64 / (5.0 * self.h);
        // Error bound of `(1 + x)·scale`, dominated by cancellation in `1 + x`.
        let tol = 16.0 * f64::EPSILON * scale * (1.0 + x.abs());
        Ok(round_half_away((1.0 + x) * scale, tol))
    }
}

/// Rounds half away from zero, treating values within `tol` of a
/// half-integer as exactly on it. The forward/backward pair is affine, so
/// `best + f·(a − b)` with integer `a − b` often lands on `k + 0.5` in exact
/// arithmetic; plain rounding of the float result would then go up or down
/// depending on representation error and bias the search.
pub fn round_half_away(v: f64, tol: f64) -> i64 {
    let half = (v * 2.0).round() / 2.0;
    if (v - half).abs() <= tol {
        half.round() as i64
    } else {
        v.round() as i64
    }
}

pub fn forward_transform(x: i64, cfg: &DdeConfig) -> f64 {
    cfg.transform().forward(x)
}

pub fn backward_transform(x: f64, cfg: &DdeConfig) -> Result<i64, DdeError> {
    cfg.transform().backward(x)
}

/// Uniform integer population in `[lower_bound, upper_bound]`.
pub fn init_population<R: Rng + ?Sized>(cfg: &DdeConfig, rng: &mut R) -> Result<Vec<Vec<i64>>, DdeError> {
    cfg.validate()?;
    Ok((0..cfg.pop_size)
        .map(|_| {
            (0..cfg.dim)
                .map(|_| rng.gen_range(cfg.lower_bound..=cfg.upper_bound))
                .collect()
        })
        .collect())
}

/// `best + f·(xr1 − xr2)`
///
/// # Panics
/// If the three vectors differ in length.
pub fn mutate(best: &[f64], xr1: &[f64], xr2: &[f64], f: f64) -> Vec<f64> {
    assert!(
        best.len() == xr1.len() && xr1.len() == xr2.len(),
        "mutate: dimension mismatch"
    );
    best.iter()
        .zip(xr1.iter().zip(xr2))
        .map(|(b, (a, c))| b + f * (a - c))
        .collect()
}

/// Binomial crossover: coordinate j comes from the mutant when a fresh
/// uniform draw is `<= cr` or `j` is the forced index `j_rand`.
pub fn crossover<R: Rng + ?Sized>(target: &[f64], mutant: &[f64], cr: f64, rng: &mut R) -> Vec<f64> {
    assert_eq!(target.len(), mutant.len(), "crossover: dimension mismatch");
    let j_rand = rng.gen_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| {
            let draw: f64 = rng.gen();
            if draw <= cr || j == j_rand {
                m
            } else {
                t
            }
        })
        .collect()
}

/// Greedy replacement: the trial wins ties.
pub fn select<T>(target: T, trial: T, j_target: f64, j_trial: f64) -> (T, f64) {
    if j_trial <= j_target {
        (trial, j_trial)
    } else {
        (target, j_target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Penalized,
}

pub fn validate(v: &[i64], cfg: &DdeConfig) -> Feasibility {
    if v.iter().all(|x| (cfg.lower_bound..=cfg.upper_bound).contains(x)) {
        Feasibility::Feasible
    } else {
        Feasibility::Penalized
    }
}

/// Two distinct population indices, both different from `target`, drawn
/// uniformly without replacement.
pub fn sample_donors<R: Rng + ?Sized>(rng: &mut R, pop_size: usize, target: usize) -> (usize, usize) {
    debug_assert!(pop_size >= 3 && target < pop_size);
    let mut r1 = rng.gen_range(0..pop_size - 1);
    if r1 >= target {
        r1 += 1;
    }
    let (lo, hi) = if r1 < target { (r1, target) } else { (target, r1) };
    let mut r2 = rng.gen_range(0..pop_size - 2);
    if r2 >= lo {
        r2 += 1;
    }
    if r2 >= hi {
        r2 += 1;
    }
    (r1, r2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub best: Vec<i64>,
    pub best_objective: f64,
    pub generations_run: usize,
    /// Best objective after initialization, then after every generation
    /// (`generations_run + 1` entries).
    pub objective_trace: Vec<f64>,
    /// Calls made to the objective (penalized vectors excluded).
    pub evaluations: usize,
}

/// Runs the full DDE loop and returns the best individual found.
pub fn evolve<O, R>(objective: &O, cfg: &DdeConfig, rng: &mut R) -> Result<EvolutionResult, DdeError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let tf = cfg.transform();
    let n = cfg.pop_size;

    let mut population = init_population(cfg, rng)?;
    let (mut scores, mut evaluations) = evaluate_all(objective, cfg, &population, 0)?;
    let mut best = argmin(&scores);
    let mut trace = vec![scores[best]];
    let reached = |v: f64| cfg.target_objective.is_some_and(|t| v <= t);

    let mut generation = 0;
    while generation < cfg.max_generations && !reached(scores[best]) {
        generation += 1;

        let real: Vec<Vec<f64>> = population
            .iter()
            .map(|v| v.iter().map(|&x| tf.forward(x)).collect())
            .collect();

        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let (r1, r2) = sample_donors(rng, n, i);
            let mutant = mutate(&real[best], &real[r1], &real[r2], cfg.f);
            let trial = crossover(&real[i], &mutant, cfg.cr, rng);
            let ints = trial
                .into_iter()
                .map(|x| tf.backward(x))
                .collect::<Result<Vec<i64>, _>>()?;
            trials.push(ints);
        }

        let (trial_scores, calls) = evaluate_all(objective, cfg, &trials, generation)?;
        evaluations += calls;

        for (i, (trial, j_trial)) in trials.into_iter().zip(trial_scores).enumerate() {
            if j_trial <= scores[i] {
                population[i] = trial;
                scores[i] = j_trial;
            }
        }

        let gen_best = argmin(&scores);
        if scores[gen_best] < scores[best] {
            best = gen_best;
        }
        trace.push(scores[best]);
    }

    Ok(EvolutionResult {
        best: population[best].clone(),
        best_objective: scores[best],
        generations_run: generation,
        objective_trace: trace,
        evaluations,
    })
}

fn evaluate_all<O>(
    objective: &O,
    cfg: &DdeConfig,
    vectors: &[Vec<i64>],
    generation: usize,
) -> Result<(Vec<f64>, usize), DdeError>
where
    O: Objective + ?Sized,
{
    let results = par::map_indexed(cfg.parallel, vectors.len(), |i| {
        let v = &vectors[i];
        match validate(v, cfg) {
            Feasibility::Penalized => Ok((cfg.penalty_cost, false)),
            Feasibility::Feasible => match objective.evaluate(v) {
                Ok(x) if x.is_finite() => Ok((x, true)),
                Ok(x) => Err((i, format!("non-finite objective value {x}").into())),
                Err(e) => Err((i, e)),
            },
        }
    });
    let mut scores = Vec::with_capacity(vectors.len());
    let mut calls = 0;
    for r in results {
        match r {
            Ok((s, called)) => {
                scores.push(s);
                calls += called as usize;
            }
            Err((individual, source)) => {
                return Err(DdeError::Objective {
                    generation,
                    individual,
                    source,
                })
            }
        }
    }
    Ok((scores, calls))
}

// First index of the minimum.
fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}
