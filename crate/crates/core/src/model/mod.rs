//! Domain types of a pragmatic contextual goal model.
//!
//! A model is a tree of refinements: goals decompose into child refinements
//! (AND or OR), while tasks and delegations are the executable leaves and
//! advertise the quality they deliver. A goal carrying an [`Interpretation`]
//! is *pragmatic*: reaching it requires meeting context-dependent quality
//! constraints, not only completing its refinements.

mod condition;
mod validate;

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use condition::{Condition, ConditionParseError};
pub use validate::{validate_model, Violation, ViolationKind};

use crate::scalar::Scalar;

/// Author-assigned node identifier. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Arc<str>);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.into())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextLabel {
    pub name: String,
    pub description: Option<String>,
}

impl ContextLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ContextLabel { name: name.into(), description: None }
    }

    pub fn with_description(name: impl Into<String>, description: impl Into<String>) -> Self {
        ContextLabel { name: name.into(), description: Some(description.into()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    LessThan,
    LessOrEqual,
    GreaterThan,
    GreaterOrEqual,
}

/// Whether a comparison caps a metric from above or from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

impl Comparison {
    pub const ALL: [Comparison; 4] =
        [Comparison::LessThan, Comparison::LessOrEqual, Comparison::GreaterThan, Comparison::GreaterOrEqual];

    pub fn direction(self) -> Direction {
        match self {
            Comparison::LessThan | Comparison::LessOrEqual => Direction::Upper,
            Comparison::GreaterThan | Comparison::GreaterOrEqual => Direction::Lower,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Comparison::LessThan | Comparison::GreaterThan)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::LessThan => "<",
            Comparison::LessOrEqual => "<=",
            Comparison::GreaterThan => ">",
            Comparison::GreaterOrEqual => ">=",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Comparison> {
        Comparison::ALL.into_iter().find(|c| c.symbol() == symbol)
    }

    /// `value <op> threshold`.
    pub fn holds<S: Scalar>(self, value: S, threshold: S) -> bool {
        match self {
            Comparison::LessThan => value < threshold,
            Comparison::LessOrEqual => value <= threshold,
            Comparison::GreaterThan => value > threshold,
            Comparison::GreaterOrEqual => value >= threshold,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A metric bound such as `errorMeters < 500`.
///
/// The context gating a constraint is carried by the enclosing
/// [`InterpretationRow`].
#[derive(Clone, Debug, PartialEq)]
pub struct QualityConstraint<S> {
    pub metric: String,
    pub comparison: Comparison,
    pub threshold: S,
}

impl<S: Scalar> QualityConstraint<S> {
    pub fn new(metric: impl Into<String>, comparison: Comparison, threshold: S) -> Self {
        QualityConstraint { metric: metric.into(), comparison, threshold }
    }

    pub fn is_satisfied_by(&self, value: S) -> bool {
        self.comparison.holds(value, self.threshold)
    }
}

impl<S: Scalar> fmt::Display for QualityConstraint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.metric, self.comparison, self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpretationRow<S> {
    pub applicable_context: Condition,
    pub constraints: Vec<QualityConstraint<S>>,
}

/// Context-dependent achievement criteria of a pragmatic goal. The row whose
/// condition is `true` is the baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation<S> {
    pub rows: Vec<InterpretationRow<S>>,
}

impl<S: Scalar> Interpretation<S> {
    pub fn new() -> Self {
        Interpretation { rows: Vec::new() }
    }

    pub fn row(mut self, applicable_context: Condition, constraints: Vec<QualityConstraint<S>>) -> Self {
        self.rows.push(InterpretationRow { applicable_context, constraints });
        self
    }

    pub fn baseline(&self) -> Option<&InterpretationRow<S>> {
        self.rows.iter().find(|r| r.applicable_context.is_true())
    }
}

impl<S: Scalar> Default for Interpretation<S> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProvidedRow<S> {
    pub applicable_context: Condition,
    pub metric: String,
    pub value: S,
}

/// Quality a leaf delivers per metric. Rows resolve first-match in
/// declaration order; every metric needs a `true` default row.
#[derive(Clone, Debug, PartialEq)]
pub struct ProvidedQuality<S> {
    pub rows: Vec<ProvidedRow<S>>,
}

impl<S: Scalar> ProvidedQuality<S> {
    pub fn new() -> Self {
        ProvidedQuality { rows: Vec::new() }
    }

    pub fn row(mut self, applicable_context: Condition, metric: impl Into<String>, value: S) -> Self {
        self.rows.push(ProvidedRow { applicable_context, metric: metric.into(), value });
        self
    }

    /// Shorthand for a default (`true`) row.
    pub fn value(self, metric: impl Into<String>, value: S) -> Self {
        self.row(Condition::True, metric, value)
    }

    pub fn metrics(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.metric.as_str()).collect()
    }

    pub fn declares(&self, metric: &str) -> bool {
        self.rows.iter().any(|r| r.metric == metric)
    }
}

impl<S: Scalar> Default for ProvidedQuality<S> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decomposition {
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKindTag {
    Goal,
    Task,
    Delegation,
}

impl fmt::Display for NodeKindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKindTag::Goal => "goal",
            NodeKindTag::Task => "task",
            NodeKindTag::Delegation => "delegation",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal<S> {
    pub decomposition: Decomposition,
    pub children: Vec<RefinementNode<S>>,
    pub interpretation: Option<Interpretation<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind<S> {
    Goal(Goal<S>),
    Task(ProvidedQuality<S>),
    /// Fulfilled by an external actor; only its promised quality is visible.
    Delegation(ProvidedQuality<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementNode<S> {
    pub id: NodeId,
    pub label: String,
    pub actor: Option<String>,
    pub applicability: Condition,
    pub kind: NodeKind<S>,
}

impl<S: Scalar> RefinementNode<S> {
    fn new(id: impl Into<NodeId>, label: impl Into<String>, kind: NodeKind<S>) -> Self {
        RefinementNode {
            id: id.into(),
            label: label.into(),
            actor: None,
            applicability: Condition::True,
            kind,
        }
    }

    pub fn goal(
        id: impl Into<NodeId>,
        label: impl Into<String>,
        decomposition: Decomposition,
        children: Vec<RefinementNode<S>>,
    ) -> Self {
        Self::new(id, label, NodeKind::Goal(Goal { decomposition, children, interpretation: None }))
    }

    pub fn task(id: impl Into<NodeId>, label: impl Into<String>, provided: ProvidedQuality<S>) -> Self {
        Self::new(id, label, NodeKind::Task(provided))
    }

    pub fn delegation(id: impl Into<NodeId>, label: impl Into<String>, provided: ProvidedQuality<S>) -> Self {
        Self::new(id, label, NodeKind::Delegation(provided))
    }

    pub fn when(mut self, applicability: Condition) -> Self {
        self.applicability = applicability;
        self
    }

    pub fn by(mut self, actor: impl Into<String>) -> Self {
        self.actor = Some(actor.into());
        self
    }

    /// Makes a goal pragmatic. No effect on leaves.
    pub fn interpreted(mut self, interpretation: Interpretation<S>) -> Self {
        if let NodeKind::Goal(goal) = &mut self.kind {
            goal.interpretation = Some(interpretation);
        }
        self
    }

    pub fn tag(&self) -> NodeKindTag {
        match self.kind {
            NodeKind::Goal(_) => NodeKindTag::Goal,
            NodeKind::Task(_) => NodeKindTag::Task,
            NodeKind::Delegation(_) => NodeKindTag::Delegation,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self.kind, NodeKind::Goal(_))
    }

    pub fn as_goal(&self) -> Option<&Goal<S>> {
        match &self.kind {
            NodeKind::Goal(g) => Some(g),
            _ => None,
        }
    }

    pub fn provided(&self) -> Option<&ProvidedQuality<S>> {
        match &self.kind {
            NodeKind::Task(pq) | NodeKind::Delegation(pq) => Some(pq),
            NodeKind::Goal(_) => None,
        }
    }

    pub fn children(&self) -> &[RefinementNode<S>] {
        match &self.kind {
            NodeKind::Goal(g) => &g.children,
            _ => &[],
        }
    }

    /// Pre-order depth-first iterator over this subtree.
    pub fn iter(&self) -> impl Iterator<Item = &RefinementNode<S>> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children().iter().rev());
            Some(node)
        })
    }

    pub fn find(&self, id: &str) -> Option<&RefinementNode<S>> {
        self.iter().find(|n| n.id.as_str() == id)
    }

    pub fn count(&self) -> usize {
        self.iter().count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgmModel<S> {
    pub contexts: Vec<ContextLabel>,
    pub root: RefinementNode<S>,
    /// Free-form documentation carried through (de)serialization.
    pub notes: Vec<String>,
}

impl<S: Scalar> CgmModel<S> {
    pub fn new(contexts: Vec<ContextLabel>, root: RefinementNode<S>) -> Self {
        CgmModel { contexts, root, notes: Vec::new() }
    }

    pub fn context_names(&self) -> impl Iterator<Item = &str> {
        self.contexts.iter().map(|c| c.name.as_str())
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn find(&self, id: &str) -> Option<&RefinementNode<S>> {
        self.root.find(id)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_model(self)
    }
}

/// The set of leaves (tasks and delegations) to execute.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Plan {
    pub leaves: BTreeSet<NodeId>,
}

impl Plan {
    pub fn empty() -> Self {
        Plan::default()
    }

    pub fn single(id: impl Into<NodeId>) -> Self {
        Plan { leaves: BTreeSet::from([id.into()]) }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.leaves.contains(id)
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeId> {
        self.leaves.iter()
    }
}

impl<I: Into<NodeId>> FromIterator<I> for Plan {
    fn from_iter<T: IntoIterator<Item = I>>(iter: T) -> Self {
        Plan { leaves: iter.into_iter().map(Into::into).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FailureReason<S> {
    /// The node's applicability condition is false.
    Inapplicable,
    /// A goal is applicable but none of its refinements is.
    NoApplicableRefinement,
    /// A leaf's provided quality misses a required bound; `provided` is
    /// `None` when the leaf does not declare the metric at all.
    QcViolated {
        required: QualityConstraint<S>,
        provided: Option<S>,
    },
    ChildFailed,
}

impl<S: Scalar> fmt::Display for FailureReason<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::Inapplicable => f.write_str("inapplicable"),
            FailureReason::NoApplicableRefinement => f.write_str("no applicable refinement"),
            FailureReason::QcViolated { required, provided: Some(v) } => {
                write!(f, "quality constraint violated: requires {required}, provides {v}")
            }
            FailureReason::QcViolated { required, provided: None } => {
                write!(f, "quality constraint violated: requires {required}, metric not provided")
            }
            FailureReason::ChildFailed => f.write_str("refinement failed"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry<S> {
    pub node: NodeId,
    pub reason: FailureReason<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AchievabilityOutcome<S> {
    Achievable(Plan),
    /// Trace lists the deepest failing nodes first.
    Unachievable(Vec<TraceEntry<S>>),
}

impl<S> AchievabilityOutcome<S> {
    pub fn is_achievable(&self) -> bool {
        matches!(self, AchievabilityOutcome::Achievable(_))
    }

    pub fn plan(&self) -> Option<&Plan> {
        match self {
            AchievabilityOutcome::Achievable(p) => Some(p),
            AchievabilityOutcome::Unachievable(_) => None,
        }
    }

    pub fn trace(&self) -> &[TraceEntry<S>] {
        match self {
            AchievabilityOutcome::Achievable(_) => &[],
            AchievabilityOutcome::Unachievable(t) => t,
        }
    }
}
