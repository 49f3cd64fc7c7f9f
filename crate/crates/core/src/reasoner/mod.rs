//! Achievability of a pragmatic goal tree under a context set.
//!
//! [`is_achievable`] walks the tree once: inapplicable nodes fail, leaves
//! compare their provided quality against the constraints accumulated on
//! the way down, OR goals return the first achievable refinement and AND
//! goals union every refinement's plan, failing on the first miss.
//! [`oracle`] enumerates every variant instead and is used to check it.

pub mod oracle;

use std::borrow::Cow;

use thiserror::Error;

use crate::context::{
    effective_constraints, eval_condition, first_violation, merge_constraints, ContextError, ContextSet,
    EffectiveConstraints,
};
use crate::model::{
    AchievabilityOutcome, CgmModel, Decomposition, FailureReason, NodeId, NodeKind, Plan, RefinementNode,
    TraceEntry,
};
use crate::scalar::Scalar;

pub use oracle::{brute_force_achievable, brute_force_achievable_bounded, DEFAULT_NODE_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("node `{0}` is not a goal")]
    NotAGoal(NodeId),
    #[error("model has {nodes} nodes, above the enumeration bound of {bound}")]
    OracleBound { nodes: usize, bound: usize },
}

/// Work done by one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Refinements entered, including ones rejected as inapplicable.
    pub nodes_visited: usize,
    pub leaves_checked: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<S> {
    pub outcome: AchievabilityOutcome<S>,
    pub stats: EvalStats,
}

pub fn plan_union(mut a: Plan, mut b: Plan) -> Plan {
    if a.leaves.len() < b.leaves.len() {
        std::mem::swap(&mut a, &mut b);
    }
    a.leaves.extend(b.leaves);
    a
}

/// Children of a goal whose applicability holds, in declaration order.
pub fn applicable_children<'a, S: Scalar>(
    node: &'a RefinementNode<S>,
    ctx: &ContextSet,
) -> Result<Vec<&'a RefinementNode<S>>, ReasonError> {
    let goal = node.as_goal().ok_or_else(|| ReasonError::NotAGoal(node.id.clone()))?;
    let mut out = Vec::with_capacity(goal.children.len());
    for child in &goal.children {
        if eval_condition(&child.applicability, ctx)? {
            out.push(child);
        }
    }
    Ok(out)
}

/// Decides whether `node` is achievable under `ctx` given the inherited
/// requirements `req`, and if so returns an execution plan.
pub fn is_achievable<S: Scalar>(
    node: &RefinementNode<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
) -> Result<Evaluation<S>, ReasonError> {
    let mut stats = EvalStats::default();
    let mut leaves = Vec::new();
    let outcome = match evaluate(node, ctx, req, &mut stats, &mut leaves)? {
        None => AchievabilityOutcome::Achievable(leaves.into_iter().collect()),
        Some(trace) => AchievabilityOutcome::Unachievable(trace),
    };
    Ok(Evaluation { outcome, stats })
}

/// [`is_achievable`] on the model root.
pub fn check_model<S: Scalar>(
    model: &CgmModel<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
) -> Result<Evaluation<S>, ReasonError> {
    is_achievable(&model.root, ctx, req)
}

type Trace<S> = Vec<TraceEntry<S>>;

fn fail<S>(node: &RefinementNode<S>, reason: FailureReason<S>) -> Option<Trace<S>> {
    Some(vec![TraceEntry { node: node.id.clone(), reason }])
}

/// Appends the plan leaves of `node` to `leaves` and returns `None`, or
/// returns the failure trace. On failure `leaves` may hold partial output;
/// OR goals truncate it before trying the next refinement.
fn evaluate<S: Scalar>(
    node: &RefinementNode<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
    stats: &mut EvalStats,
    leaves: &mut Vec<NodeId>,
) -> Result<Option<Trace<S>>, ReasonError> {
    stats.nodes_visited += 1;
    if !eval_condition(&node.applicability, ctx)? {
        return Ok(fail(node, FailureReason::Inapplicable));
    }

    let goal = match &node.kind {
        NodeKind::Task(pq) | NodeKind::Delegation(pq) => {
            stats.leaves_checked += 1;
            return Ok(match first_violation(pq, ctx, req)? {
                None => {
                    leaves.push(node.id.clone());
                    None
                }
                Some((qc, provided)) => {
                    fail(node, FailureReason::QcViolated { required: qc.clone(), provided })
                }
            });
        }
        NodeKind::Goal(goal) => goal,
    };

    let considered: Cow<'_, EffectiveConstraints<S>> = match &goal.interpretation {
        Some(interp) => Cow::Owned(merge_constraints(req, &effective_constraints(interp, ctx)?)?),
        None => Cow::Borrowed(req),
    };

    let children = applicable_children(node, ctx)?;
    if children.is_empty() {
        return Ok(fail(node, FailureReason::NoApplicableRefinement));
    }

    let mut trace = match goal.decomposition {
        Decomposition::Or => {
            let mark = leaves.len();
            let mut trace = Vec::new();
            for child in children {
                match evaluate(child, ctx, &considered, stats, leaves)? {
                    None => return Ok(None),
                    Some(t) => {
                        leaves.truncate(mark);
                        trace.extend(t);
                    }
                }
            }
            trace
        }
        Decomposition::And => {
            let mut failed = None;
            for child in children {
                if let Some(t) = evaluate(child, ctx, &considered, stats, leaves)? {
                    failed = Some(t);
                    break;
                }
            }
            match failed {
                None => return Ok(None),
                Some(t) => t,
            }
        }
    };
    trace.push(TraceEntry { node: node.id.clone(), reason: FailureReason::ChildFailed });
    Ok(Some(trace))
}
