//! Exhaustive context-set sweeps and evaluation timing.
//!
//! Context sets are enumerated by binary counting over the model's declared
//! context order: set number `i` activates context `j` iff bit `j` of `i`
//! is one. Set 0 has nothing active; the last set has everything active.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::context::{ContextSet, EffectiveConstraints};
use crate::genmodel::{random_model, worst_case_model, GenError, GeneratorConfig};
use crate::model::CgmModel;
use crate::reasoner::{check_model, EvalStats, ReasonError};
use crate::scalar::Scalar;

/// Sweeps enumerate at most this many contexts (2^64 sets).
pub const MAX_SWEEP_CONTEXTS: usize = 64;

/// Warm-up evaluations excluded from timing statistics by default.
pub const DEFAULT_WARMUP: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Reason(#[from] ReasonError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("cannot sweep {0} contexts; at most {MAX_SWEEP_CONTEXTS} are supported")]
    TooManyContexts(usize),
    #[error("run count must be at least 1")]
    NoRuns,
    #[error("verdict changed between timing runs ({first} then {later})")]
    UnstableVerdict { first: bool, later: bool },
    #[error("scaling series needs a positive step and from <= to")]
    BadSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub total_sets: u128,
    pub evaluated_sets: u128,
    /// In canonical enumeration order.
    pub unachievable_sets: Vec<ContextSet>,
    pub coverage: f64,
    pub elapsed: Duration,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.evaluated_sets == self.total_sets
    }
}

fn context_names<S: Scalar>(model: &CgmModel<S>) -> Result<Vec<String>, SweepError> {
    let names: Vec<String> = model.context_names().map(str::to_owned).collect();
    if names.len() > MAX_SWEEP_CONTEXTS {
        return Err(SweepError::TooManyContexts(names.len()));
    }
    Ok(names)
}

/// Evaluates `range` in order until done or `deadline` passes. At least one
/// set is evaluated and at most one evaluation starts after the deadline.
fn sweep_range<S: Scalar>(
    model: &CgmModel<S>,
    names: &[String],
    root: &EffectiveConstraints<S>,
    range: std::ops::Range<u128>,
    deadline: Instant,
) -> Result<(u128, Vec<(u128, ContextSet)>), SweepError> {
    let mut evaluated = 0;
    let mut failing = Vec::new();
    let mut mask = range.start;
    while mask < range.end {
        let ctx = ContextSet::from_mask(names, mask);
        let eval = check_model(model, &ctx, root)?;
        evaluated += 1;
        if !eval.outcome.is_achievable() {
            failing.push((mask, ctx));
        }
        mask += 1;
        if Instant::now() >= deadline {
            break;
        }
    }
    Ok((evaluated, failing))
}

/// Runs the reasoner on the root under every context set, in canonical
/// order, until all are done or `budget` has elapsed.
pub fn sweep_contexts<S: Scalar>(
    model: &CgmModel<S>,
    budget: Duration,
    root_constraints: &EffectiveConstraints<S>,
) -> Result<SweepReport, SweepError> {
    sweep_contexts_parallel(model, budget, root_constraints, 1)
}

/// Like [`sweep_contexts`], splitting the enumeration into `jobs` contiguous
/// ranges evaluated on separate threads. The report lists unachievable sets
/// in canonical order regardless of `jobs`. Under a tight budget each range
/// covers a prefix of itself, so the evaluated sets need not form a prefix
/// of the whole enumeration.
pub fn sweep_contexts_parallel<S: Scalar>(
    model: &CgmModel<S>,
    budget: Duration,
    root_constraints: &EffectiveConstraints<S>,
    jobs: usize,
) -> Result<SweepReport, SweepError> {
    let names = context_names(model)?;
    let total: u128 = 1u128 << names.len();
    let start = Instant::now();
    let deadline = start + budget;
    let jobs = (jobs.max(1) as u128).min(total);

    let results = if jobs == 1 {
        vec![sweep_range(model, &names, root_constraints, 0..total, deadline)?]
    } else {
        let chunk = total.div_ceil(jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|j| {
                    let range = (j * chunk).min(total)..((j + 1) * chunk).min(total);
                    let names = &names;
                    scope.spawn(move || sweep_range(model, names, root_constraints, range, deadline))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?
    };

    let mut evaluated_sets = 0;
    let mut failing = Vec::new();
    for (count, sets) in results {
        evaluated_sets += count;
        failing.extend(sets);
    }
    failing.sort_by_key(|(mask, _)| *mask);
    Ok(SweepReport {
        total_sets: total,
        evaluated_sets,
        unachievable_sets: failing.into_iter().map(|(_, ctx)| ctx).collect(),
        coverage: evaluated_sets as f64 / total as f64,
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub runs: usize,
    pub mean: Duration,
    pub min: Duration,
    pub max: Duration,
    pub node_count: usize,
    pub context_count: usize,
    pub achievable: bool,
    /// Identical on every run.
    pub stats: EvalStats,
}

/// Running timing statistics for one model.
struct Timer<'m, S> {
    model: &'m CgmModel<S>,
    ctx: ContextSet,
    total: Duration,
    min: Duration,
    max: Duration,
    runs: usize,
    reference: Option<(bool, EvalStats)>,
}

impl<'m, S: Scalar> Timer<'m, S> {
    fn new(model: &'m CgmModel<S>, ctx: ContextSet) -> Self {
        Timer {
            model,
            ctx,
            total: Duration::ZERO,
            min: Duration::MAX,
            max: Duration::ZERO,
            runs: 0,
            reference: None,
        }
    }

    fn warm(&self, root: &EffectiveConstraints<S>, warmup: usize) -> Result<(), SweepError> {
        for _ in 0..warmup {
            std::hint::black_box(check_model(self.model, &self.ctx, root)?);
        }
        Ok(())
    }

    fn run(&mut self, root: &EffectiveConstraints<S>) -> Result<(), SweepError> {
        let started = Instant::now();
        let eval = std::hint::black_box(check_model(self.model, &self.ctx, root)?);
        let took = started.elapsed();
        self.total += took;
        self.min = self.min.min(took);
        self.max = self.max.max(took);
        self.runs += 1;
        let observed = (eval.outcome.is_achievable(), eval.stats);
        match self.reference {
            None => self.reference = Some(observed),
            Some(first) if first != observed => {
                return Err(SweepError::UnstableVerdict { first: first.0, later: observed.0 });
            }
            Some(_) => {}
        }
        Ok(())
    }

    fn report(&self) -> TimingReport {
        let (achievable, stats) = self.reference.expect("at least one run");
        let mean = self.total / self.runs as u32;
        TimingReport {
            runs: self.runs,
            mean: mean.clamp(self.min, self.max),
            min: self.min,
            max: self.max,
            node_count: self.model.node_count(),
            context_count: self.model.contexts.len(),
            achievable,
            stats,
        }
    }
}

/// Times `runs` evaluations of the root (after `warmup` untimed ones) on a
/// monotonic clock. Fails if the verdict or work counters differ between runs.
pub fn measure_achievability<S: Scalar>(
    model: &CgmModel<S>,
    ctx: &ContextSet,
    root_constraints: &EffectiveConstraints<S>,
    runs: usize,
    warmup: usize,
) -> Result<TimingReport, SweepError> {
    if runs == 0 {
        return Err(SweepError::NoRuns);
    }
    let mut timer = Timer::new(model, ctx.clone());
    timer.warm(root_constraints, warmup)?;
    for _ in 0..runs {
        timer.run(root_constraints)?;
    }
    Ok(timer.report())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingConfig {
    pub nodes_from: usize,
    pub nodes_to: usize,
    pub step: usize,
    pub contexts: usize,
    pub runs: usize,
    pub warmup: usize,
    pub worst_case: bool,
    pub seed: u64,
}

impl ScalingConfig {
    pub fn new(nodes_from: usize, nodes_to: usize, step: usize, contexts: usize) -> Self {
        ScalingConfig {
            nodes_from,
            nodes_to,
            step,
            contexts,
            runs: 100,
            warmup: DEFAULT_WARMUP,
            worst_case: true,
            seed: 0,
        }
    }
}

/// Measures one generated model per size. Each model is evaluated under
/// the context set with every odd-numbered context (C1, C3, ...) active.
/// The model at position `i` of the series uses seed `seed + i`.
///
/// Runs are interleaved: each of the `runs` rounds times one evaluation of
/// every model in turn, so slow phases of the host spread over all sizes
/// instead of skewing whichever size was being measured.
pub fn scaling_series<S: Scalar>(cfg: &ScalingConfig) -> Result<Vec<TimingReport>, SweepError> {
    if cfg.step == 0 || cfg.nodes_from > cfg.nodes_to {
        return Err(SweepError::BadSeries);
    }
    if cfg.runs == 0 {
        return Err(SweepError::NoRuns);
    }
    let mut models = Vec::new();
    for (i, nodes) in (cfg.nodes_from..=cfg.nodes_to).step_by(cfg.step).enumerate() {
        let gen = GeneratorConfig::new(nodes, cfg.contexts, cfg.seed.wrapping_add(i as u64));
        let model: CgmModel<S> = if cfg.worst_case { worst_case_model(&gen)? } else { random_model(&gen)? };
        models.push(model);
    }
    let none = EffectiveConstraints::none();
    let mut timers = Vec::with_capacity(models.len());
    for model in &models {
        let names: Vec<&str> = model.context_names().collect();
        let active = names.iter().copied().step_by(2);
        let ctx = ContextSet::new(names.iter().copied(), active).map_err(ReasonError::from)?;
        let timer = Timer::new(model, ctx);
        timer.warm(&none, cfg.warmup)?;
        timers.push(timer);
    }
    for _ in 0..cfg.runs {
        for timer in &mut timers {
            timer.run(&none)?;
        }
    }
    Ok(timers.iter().map(Timer::report).collect())
}

/// Two-column `nodes mean_ns` table with a header line.
pub fn scaling_table(series: &[TimingReport]) -> String {
    let mut out = String::from("nodes\tmean_ns\n");
    for r in series {
        out.push_str(&format!("{}\t{}\n", r.node_count, r.mean.as_nanos()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`. `None` with fewer
/// than two points or when all `x` are equal. With constant `y` the fit is
/// exact and `r_squared` is 1.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit { slope, intercept, r_squared })
}
