use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::{CgmModel, Condition, NodeKind, RefinementNode};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    InvalidContextName,
    DuplicateContext,
    EmptyNodeId,
    DuplicateNodeId,
    UndeclaredContext,
    EmptyConnective,
    GoalWithoutChildren,
    MissingBaseline,
    MultipleBaselines,
    DuplicateMetricInRow,
    EmptyMetric,
    NonFiniteValue,
    MissingDefaultProvided,
}

/// A broken structural invariant. `node` is `None` for model-level issues
/// such as context declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: Option<String>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(id) => write!(f, "node `{id}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "and" | "or" | "not" | "true")
}

/// Reports every structural violation in pre-order; empty means valid.
pub fn validate_model<S: Scalar>(model: &CgmModel<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut declared = HashSet::new();
    for ctx in &model.contexts {
        if !is_identifier(&ctx.name) {
            out.push(Violation {
                node: None,
                kind: ViolationKind::InvalidContextName,
                message: format!("context name `{}` is not a valid identifier", ctx.name),
            });
        }
        if !declared.insert(ctx.name.as_str()) {
            out.push(Violation {
                node: None,
                kind: ViolationKind::DuplicateContext,
                message: format!("context `{}` declared more than once", ctx.name),
            });
        }
    }

    let mut seen_ids = HashSet::new();
    for node in model.root.iter() {
        check_node(node, &declared, &mut seen_ids, &mut out);
    }
    out
}

fn check_node<'a, S: Scalar>(
    node: &'a RefinementNode<S>,
    declared: &HashSet<&str>,
    seen_ids: &mut HashSet<&'a str>,
    out: &mut Vec<Violation>,
) {
    let id = node.id.as_str();
    let mut push = |kind, message: String| {
        out.push(Violation { node: Some(id.to_owned()), kind, message });
    };

    if id.is_empty() {
        push(ViolationKind::EmptyNodeId, "node id is empty".into());
    }
    if !seen_ids.insert(id) {
        push(ViolationKind::DuplicateNodeId, format!("duplicate node id `{id}`"));
    }

    let mut conditions: Vec<(&str, &Condition)> = vec![("applicability", &node.applicability)];
    match &node.kind {
        NodeKind::Goal(goal) => {
            if goal.children.is_empty() {
                push(ViolationKind::GoalWithoutChildren, "goal has no refinements".into());
            }
            if let Some(interp) = &goal.interpretation {
                let baselines = interp.rows.iter().filter(|r| r.applicable_context.is_true()).count();
                if baselines == 0 {
                    push(ViolationKind::MissingBaseline, "interpretation has no `true` baseline row".into());
                } else if baselines > 1 {
                    push(
                        ViolationKind::MultipleBaselines,
                        format!("interpretation has {baselines} baseline rows"),
                    );
                }
                for (row_idx, row) in interp.rows.iter().enumerate() {
                    conditions.push(("interpretation row", &row.applicable_context));
                    let mut metrics = BTreeSet::new();
                    for qc in &row.constraints {
                        if qc.metric.is_empty() {
                            push(
                                ViolationKind::EmptyMetric,
                                format!("interpretation row {row_idx} has an empty metric"),
                            );
                        }
                        if !metrics.insert(qc.metric.as_str()) {
                            push(
                                ViolationKind::DuplicateMetricInRow,
                                format!("interpretation row {row_idx} constrains `{}` twice", qc.metric),
                            );
                        }
                        if !qc.threshold.is_finite() {
                            push(
                                ViolationKind::NonFiniteValue,
                                format!("threshold for `{}` is not finite", qc.metric),
                            );
                        }
                    }
                }
            }
        }
        NodeKind::Task(pq) | NodeKind::Delegation(pq) => {
            let mut has_default: BTreeMap<&str, bool> = BTreeMap::new();
            for row in &pq.rows {
                conditions.push(("provided quality row", &row.applicable_context));
                if row.metric.is_empty() {
                    push(ViolationKind::EmptyMetric, "provided quality row has an empty metric".into());
                }
                if !row.value.is_finite() {
                    push(
                        ViolationKind::NonFiniteValue,
                        format!("provided value for `{}` is not finite", row.metric),
                    );
                }
                *has_default.entry(row.metric.as_str()).or_default() |= row.applicable_context.is_true();
            }
            for (metric, ok) in has_default {
                if !ok {
                    push(
                        ViolationKind::MissingDefaultProvided,
                        format!("metric `{metric}` has no default (`true`) provided value"),
                    );
                }
            }
        }
    }

    for (what, cond) in conditions {
        for atom in cond.atoms() {
            if !declared.contains(atom) {
                push(
                    ViolationKind::UndeclaredContext,
                    format!("{what} references undeclared context `{atom}`"),
                );
            }
        }
        let mut arities = Vec::new();
        cond.connective_arities(&mut arities);
        for (op, n) in arities {
            if n == 0 {
                push(ViolationKind::EmptyConnective, format!("{what} has an `{op}` with no operands"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Comparison, ContextLabel, Decomposition, Interpretation, ProvidedQuality, QualityConstraint,
    };

    fn leaf(id: &str) -> RefinementNode<f64> {
        RefinementNode::task(id, id, ProvidedQuality::new().value("timeSeconds", 1.0))
    }

    #[test]
    fn single_task_is_valid() {
        let m = CgmModel::new(vec![], leaf("t"));
        assert_eq!(validate_model(&m), vec![]);
    }

    #[test]
    fn goal_without_children() {
        let m = CgmModel::new(vec![], RefinementNode::<f64>::goal("g", "", Decomposition::And, vec![]));
        let v = validate_model(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::GoalWithoutChildren);
        assert_eq!(v[0].node.as_deref(), Some("g"));
    }

    #[test]
    fn undeclared_context_atom() {
        let m = CgmModel::new(vec![ContextLabel::new("C1")], leaf("t").when(Condition::atom("C99")));
        let v = validate_model(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::UndeclaredContext);
        assert!(v[0].message.contains("C99"));
    }

    #[test]
    fn duplicate_ids_and_contexts() {
        let m = CgmModel::new(
            vec![ContextLabel::new("C1"), ContextLabel::new("C1"), ContextLabel::new("9x")],
            RefinementNode::goal("g", "", Decomposition::Or, vec![leaf("t"), leaf("t")]),
        );
        let kinds: Vec<_> = validate_model(&m).into_iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            [
                ViolationKind::DuplicateContext,
                ViolationKind::InvalidContextName,
                ViolationKind::DuplicateNodeId
            ]
        );
    }

    #[test]
    fn interpretation_and_provided_rules() {
        let interp = Interpretation::new().row(
            Condition::atom("C1"),
            vec![
                QualityConstraint::new("t", Comparison::LessThan, 1.0),
                QualityConstraint::new("t", Comparison::LessThan, f64::INFINITY),
            ],
        );
        let bad_leaf = RefinementNode::task(
            "x",
            "",
            ProvidedQuality::new().row(Condition::atom("C1"), "t", 3.0).value("u", f64::NAN),
        );
        let m = CgmModel::new(
            vec![ContextLabel::new("C1")],
            RefinementNode::goal("g", "", Decomposition::And, vec![bad_leaf])
                .interpreted(interp)
                .when(Condition::And(vec![])),
        );
        let kinds: Vec<_> = validate_model(&m).into_iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            [
                ViolationKind::MissingBaseline,
                ViolationKind::DuplicateMetricInRow,
                ViolationKind::NonFiniteValue,
                ViolationKind::EmptyConnective,
                ViolationKind::NonFiniteValue,
                ViolationKind::MissingDefaultProvided,
            ]
        );
    }

    #[test]
    fn validation_is_idempotent() {
        let m = CgmModel::new(vec![ContextLabel::new("and")], leaf("").when(Condition::atom("Q")));
        assert_eq!(validate_model(&m), validate_model(&m));
        assert_eq!(validate_model(&m).len(), 3);
    }
}
