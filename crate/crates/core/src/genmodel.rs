//! Seeded random and worst-case model generators.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(cfg.seed)`. Raw 64-bit words are mapped to draws by this
//! module, not by a distribution library, so equal configs produce
//! bit-identical models on every platform:
//!
//! * `unit()` = `(next_u64() >> 11) * 2^-53`, a float in `[0, 1)`;
//! * `chance(p)` = `unit() < p`;
//! * `below(n)` = `(next_u64() as u128 * n) >> 64`.
//!
//! Tree shape: nodes are created breadth-first. Each goal receives
//! `2 + below(maxChildren - 1)` refinements, capped by the nodes left to
//! place; each refinement becomes a goal with probability one half unless
//! that would overrun `nodeCount` or a goal is needed to keep growing. The
//! result has exactly `cfg.node_count` refinements. Attributes are drawn
//! afterwards in creation order: decomposition, applicability (one literal,
//! or a conjunction of two with probability 0.3), interpretation and
//! provided quality. All generated constraints are upper bounds on integer
//! thresholds. Leaves are delegations with probability 0.1.

use std::collections::VecDeque;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    CgmModel, Comparison, Condition, ContextLabel, Decomposition, Interpretation, NodeId, ProvidedQuality,
    QualityConstraint, RefinementNode,
};
use crate::scalar::Scalar;

const GOAL_CHILD_PROBABILITY: f64 = 0.5;
const DELEGATION_PROBABILITY: f64 = 0.1;
const CONJUNCTION_PROBABILITY: f64 = 0.3;
const CONTEXTUAL_PROVIDED_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("node count must be at least 1")]
    NoNodes,
    #[error("{name} must lie in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("max children must be at least 2, got {0}")]
    MaxChildren(usize),
    #[error("at least one metric is required")]
    NoMetrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub node_count: usize,
    pub context_count: usize,
    pub seed: u64,
    pub or_probability: f64,
    pub pragmatic_probability: f64,
    pub max_children: usize,
    pub applicability_condition_rate: f64,
    pub metrics: Vec<String>,
}

impl GeneratorConfig {
    pub fn new(node_count: usize, context_count: usize, seed: u64) -> Self {
        GeneratorConfig {
            node_count,
            context_count,
            seed,
            or_probability: 0.5,
            pragmatic_probability: 0.3,
            max_children: 4,
            applicability_condition_rate: 0.5,
            metrics: vec!["timeSeconds".to_owned()],
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.node_count < 1 {
            return Err(GenError::NoNodes);
        }
        for (name, value) in [
            ("or probability", self.or_probability),
            ("pragmatic probability", self.pragmatic_probability),
            ("applicability condition rate", self.applicability_condition_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::Probability { name, value });
            }
        }
        if self.max_children < 2 {
            return Err(GenError::MaxChildren(self.max_children));
        }
        if self.metrics.is_empty() {
            return Err(GenError::NoMetrics);
        }
        Ok(())
    }
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64) -> Self {
        Stream(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform integer in `lo..=hi`.
    fn between(&mut self, lo: u32, hi: u32) -> u32 {
        lo + self.below((hi - lo + 1) as usize) as u32
    }
}

/// Which generator is running; they share the tree shape and differ in
/// how attributes are drawn.
#[derive(Clone, Copy, PartialEq)]
enum Flavor {
    Random,
    WorstCase,
}

struct Shape {
    children: Vec<Vec<usize>>,
    is_goal: Vec<bool>,
}

fn draw_shape(cfg: &GeneratorConfig, rng: &mut Stream) -> Shape {
    let n = cfg.node_count;
    let mut children = vec![Vec::new()];
    let mut is_goal = vec![n > 1];
    let mut queue = VecDeque::new();
    if n > 1 {
        queue.push_back(0);
    }
    let mut remaining = n - 1;
    while let Some(goal) = queue.pop_front() {
        // Nodes not yet placed, beyond the one child each queued goal still needs.
        let mut slack = remaining - queue.len();
        let k = (2 + rng.below(cfg.max_children - 1)).min(slack);
        for j in 0..k {
            let siblings_left = k - j - 1;
            let must_grow = siblings_left == 0 && queue.is_empty() && remaining > 1;
            let may_grow = slack >= 2 + siblings_left;
            let child_is_goal = must_grow || (may_grow && rng.chance(GOAL_CHILD_PROBABILITY));
            remaining -= 1;
            slack -= if child_is_goal { 2 } else { 1 };
            let idx = children.len();
            children.push(Vec::new());
            is_goal.push(child_is_goal);
            children[goal].push(idx);
            if child_is_goal {
                queue.push_back(idx);
            }
        }
    }
    debug_assert_eq!(remaining, 0);
    Shape { children, is_goal }
}

struct Attributes<S> {
    decomposition: Decomposition,
    applicability: Condition,
    interpretation: Option<Interpretation<S>>,
    delegation: bool,
    provided: ProvidedQuality<S>,
}

fn literal(rng: &mut Stream, contexts: &[String]) -> Condition {
    let atom = Condition::atom(contexts[rng.below(contexts.len())].clone());
    if rng.chance(0.5) {
        Condition::not(atom)
    } else {
        atom
    }
}

fn applicability(rng: &mut Stream, contexts: &[String]) -> Condition {
    let first = literal(rng, contexts);
    if contexts.len() > 1 && rng.chance(CONJUNCTION_PROBABILITY) {
        let second = literal(rng, contexts);
        Condition::And(vec![first, second])
    } else {
        first
    }
}

fn upper_bound<S: Scalar>(rng: &mut Stream, metric: &str, lo: u32, hi: u32) -> QualityConstraint<S> {
    let comparison = if rng.chance(0.5) { Comparison::LessThan } else { Comparison::LessOrEqual };
    let threshold = S::from_u32(rng.between(lo, hi)).unwrap();
    QualityConstraint::new(metric, comparison, threshold)
}

fn draw_attributes<S: Scalar>(
    cfg: &GeneratorConfig,
    flavor: Flavor,
    contexts: &[String],
    is_root: bool,
    is_goal: bool,
    rng: &mut Stream,
) -> Attributes<S> {
    let has_contexts = !contexts.is_empty();
    // Worst-case thresholds sit in [50, 100] and provided values in [0, 49],
    // so every leaf satisfies every bound.
    let (threshold_lo, threshold_hi, row_lo, row_hi, value_hi) = match flavor {
        Flavor::Random => (40, 100, 20, 120, 100),
        Flavor::WorstCase => (50, 100, 50, 100, 49),
    };

    let decomposition = match flavor {
        Flavor::Random if is_goal && rng.chance(cfg.or_probability) => Decomposition::Or,
        _ => Decomposition::And,
    };

    let applicability = if flavor == Flavor::Random
        && !is_root
        && has_contexts
        && rng.chance(cfg.applicability_condition_rate)
    {
        applicability(rng, contexts)
    } else {
        Condition::True
    };

    let mut interpretation = None;
    let mut delegation = false;
    let mut provided = ProvidedQuality::new();
    if is_goal {
        if rng.chance(cfg.pragmatic_probability) {
            let baseline =
                cfg.metrics.iter().map(|m| upper_bound(rng, m, threshold_lo, threshold_hi)).collect();
            let mut interp = Interpretation::new().row(Condition::True, baseline);
            if has_contexts {
                for _ in 0..rng.below(3) {
                    let cond = literal(rng, contexts);
                    let metric = &cfg.metrics[rng.below(cfg.metrics.len())];
                    let qc = upper_bound(rng, metric, row_lo, row_hi);
                    interp = interp.row(cond, vec![qc]);
                }
            }
            interpretation = Some(interp);
        }
    } else {
        delegation = rng.chance(DELEGATION_PROBABILITY);
        for metric in &cfg.metrics {
            if has_contexts && rng.chance(CONTEXTUAL_PROVIDED_PROBABILITY) {
                let cond = literal(rng, contexts);
                let value = S::from_u32(rng.between(0, value_hi)).unwrap();
                provided = provided.row(cond, metric.clone(), value);
            }
            let value = S::from_u32(rng.between(0, value_hi)).unwrap();
            provided = provided.value(metric.clone(), value);
        }
    }

    Attributes { decomposition, applicability, interpretation, delegation, provided }
}

fn generate<S: Scalar>(cfg: &GeneratorConfig, flavor: Flavor) -> Result<CgmModel<S>, GenError> {
    cfg.validate()?;
    let mut rng = Stream::new(cfg.seed);
    let contexts: Vec<String> = (1..=cfg.context_count).map(|i| format!("C{i}")).collect();
    let shape = draw_shape(cfg, &mut rng);
    let mut attrs: Vec<Option<Attributes<S>>> = (0..shape.is_goal.len())
        .map(|i| Some(draw_attributes(cfg, flavor, &contexts, i == 0, shape.is_goal[i], &mut rng)))
        .collect();

    // Children always have larger indices than their parent, so building in
    // reverse index order finishes every subtree before its parent needs it.
    let mut built: Vec<Option<RefinementNode<S>>> = (0..attrs.len()).map(|_| None).collect();
    for idx in (0..attrs.len()).rev() {
        let a = attrs[idx].take().unwrap();
        let id = NodeId::new(format!("n{idx}"));
        let node = if shape.is_goal[idx] {
            let kids = shape.children[idx].iter().map(|&c| built[c].take().unwrap()).collect();
            let label = format!("goal {idx}");
            let mut goal = RefinementNode::goal(id, label, a.decomposition, kids);
            if let Some(interp) = a.interpretation {
                goal = goal.interpreted(interp);
            }
            goal
        } else if a.delegation {
            RefinementNode::delegation(id, format!("delegation {idx}"), a.provided)
        } else {
            RefinementNode::task(id, format!("task {idx}"), a.provided)
        };
        built[idx] = Some(node.when(a.applicability));
    }

    let contexts = contexts
        .into_iter()
        .enumerate()
        .map(|(i, name)| ContextLabel::with_description(name, format!("generated context {}", i + 1)))
        .collect();
    Ok(CgmModel::new(contexts, built[0].take().unwrap()))
}

/// Random model with exactly `cfg.node_count` refinements.
pub fn random_model<S: Scalar>(cfg: &GeneratorConfig) -> Result<CgmModel<S>, GenError> {
    generate(cfg, Flavor::Random)
}

/// AND-only model where every node is always applicable and every leaf
/// meets every constraint on its root path, so evaluation visits all nodes.
/// `or_probability` and `applicability_condition_rate` are ignored.
pub fn worst_case_model<S: Scalar>(cfg: &GeneratorConfig) -> Result<CgmModel<S>, GenError> {
    generate(cfg, Flavor::WorstCase)
}
