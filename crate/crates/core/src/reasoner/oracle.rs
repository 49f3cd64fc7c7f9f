//! Exhaustive enumeration of every valid plan, for checking the fast
//! algorithm on small models.
//!
//! A variant picks one applicable refinement per OR goal and all applicable
//! refinements per AND goal. The plans returned are those whose leaves all
//! meet the constraints accumulated along their root path.

use std::collections::BTreeSet;

use super::{plan_union, ReasonError};
use crate::context::{
    can_fulfill, effective_constraints, eval_condition, merge_constraints, ContextSet, EffectiveConstraints,
};
use crate::model::{CgmModel, Decomposition, NodeKind, Plan, RefinementNode};
use crate::scalar::Scalar;

pub const DEFAULT_NODE_BOUND: usize = 20;

/// All valid plans for the model root; empty means unachievable. Refuses
/// models above [`DEFAULT_NODE_BOUND`] nodes.
pub fn brute_force_achievable<S: Scalar>(
    model: &CgmModel<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
) -> Result<BTreeSet<Plan>, ReasonError> {
    brute_force_achievable_bounded(model, ctx, req, DEFAULT_NODE_BOUND)
}

pub fn brute_force_achievable_bounded<S: Scalar>(
    model: &CgmModel<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
    node_bound: usize,
) -> Result<BTreeSet<Plan>, ReasonError> {
    let nodes = model.node_count();
    if nodes > node_bound {
        return Err(ReasonError::OracleBound { nodes, bound: node_bound });
    }
    all_plans(&model.root, ctx, req)
}

fn all_plans<S: Scalar>(
    node: &RefinementNode<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
) -> Result<BTreeSet<Plan>, ReasonError> {
    if !eval_condition(&node.applicability, ctx)? {
        return Ok(BTreeSet::new());
    }
    let goal = match &node.kind {
        NodeKind::Task(pq) | NodeKind::Delegation(pq) => {
            let mut out = BTreeSet::new();
            if can_fulfill(pq, ctx, req)? {
                out.insert(Plan::single(node.id.clone()));
            }
            return Ok(out);
        }
        NodeKind::Goal(goal) => goal,
    };

    let considered = match &goal.interpretation {
        Some(interp) => merge_constraints(req, &effective_constraints(interp, ctx)?)?,
        None => req.clone(),
    };

    let mut per_child = Vec::new();
    for child in &goal.children {
        if eval_condition(&child.applicability, ctx)? {
            per_child.push(all_plans(child, ctx, &considered)?);
        }
    }
    if per_child.is_empty() {
        return Ok(BTreeSet::new());
    }

    Ok(match goal.decomposition {
        Decomposition::Or => per_child.into_iter().flatten().collect(),
        Decomposition::And => {
            let mut acc = BTreeSet::from([Plan::empty()]);
            for options in per_child {
                let mut next = BTreeSet::new();
                for partial in &acc {
                    for option in &options {
                        next.insert(plan_union(partial.clone(), option.clone()));
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContextLabel, ProvidedQuality};

    fn task(id: &str) -> RefinementNode<f64> {
        RefinementNode::task(id, id, ProvidedQuality::new().value("timeSeconds", 1.0))
    }

    #[test]
    fn or_goal_enumerates_each_choice() {
        let m = CgmModel::new(
            vec![],
            RefinementNode::goal("g", "", Decomposition::Or, vec![task("t1"), task("t2")]),
        );
        let ctx = ContextSet::for_model(&m, Vec::<&str>::new()).unwrap();
        let plans = brute_force_achievable(&m, &ctx, &EffectiveConstraints::none()).unwrap();
        assert_eq!(plans, BTreeSet::from([Plan::single("t1"), Plan::single("t2")]));
    }

    #[test]
    fn and_of_ors_is_a_product() {
        let or = |id: &str, a: &str, b: &str| {
            RefinementNode::goal(id, "", Decomposition::Or, vec![task(a), task(b)])
        };
        let m = CgmModel::new(
            vec![],
            RefinementNode::goal("g", "", Decomposition::And, vec![or("x", "a", "b"), or("y", "c", "d")]),
        );
        let ctx = ContextSet::for_model(&m, Vec::<&str>::new()).unwrap();
        let plans = brute_force_achievable(&m, &ctx, &EffectiveConstraints::none()).unwrap();
        assert_eq!(plans.len(), 4);
        assert!(plans.contains(&["b", "c"].into_iter().collect::<Plan>()));
    }

    #[test]
    fn inapplicable_root_has_no_plans() {
        let m =
            CgmModel::new(vec![ContextLabel::new("X")], task("t").when(crate::model::Condition::atom("X")));
        let ctx = ContextSet::for_model(&m, Vec::<&str>::new()).unwrap();
        assert!(brute_force_achievable(&m, &ctx, &EffectiveConstraints::none()).unwrap().is_empty());
    }

    #[test]
    fn refuses_large_models() {
        let children = (0..25).map(|i| task(&format!("t{i}"))).collect();
        let m = CgmModel::new(vec![], RefinementNode::goal("g", "", Decomposition::Or, children));
        let ctx = ContextSet::for_model(&m, Vec::<&str>::new()).unwrap();
        assert_eq!(
            brute_force_achievable(&m, &ctx, &EffectiveConstraints::none()).unwrap_err(),
            ReasonError::OracleBound { nodes: 26, bound: DEFAULT_NODE_BOUND }
        );
        assert_eq!(
            brute_force_achievable_bounded(&m, &ctx, &EffectiveConstraints::none(), 30).unwrap().len(),
            25
        );
    }
}
