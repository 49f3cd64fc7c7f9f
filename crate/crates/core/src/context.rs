//! Context evaluation and the quality-constraint algebra.
//!
//! Everything here is a pure function of its inputs.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{
    CgmModel, Comparison, Condition, Direction, Interpretation, ProvidedQuality, QualityConstraint,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("context `{0}` is not declared")]
    UndeclaredContext(String),
    #[error("cannot compare constraints on different metrics `{left}` and `{right}`")]
    MetricMismatch { left: String, right: String },
    #[error("constraints on `{metric}` mix upper and lower bounds")]
    DirectionMismatch { metric: String },
    #[error("no applicable provided value for metric `{0}`")]
    MissingMetric(String),
}

/// Truth assignment over a model's declared contexts: listed labels hold,
/// all other declared labels do not.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextSet {
    values: BTreeMap<String, bool>,
}

impl ContextSet {
    /// Fails if an active label is not among `declared`.
    pub fn new<D, A>(declared: D, active: A) -> Result<Self, ContextError>
    where
        D: IntoIterator,
        D::Item: AsRef<str>,
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        let mut values: BTreeMap<String, bool> =
            declared.into_iter().map(|d| (d.as_ref().to_owned(), false)).collect();
        for name in active {
            let name = name.as_ref();
            match values.get_mut(name) {
                Some(v) => *v = true,
                None => return Err(ContextError::UndeclaredContext(name.to_owned())),
            }
        }
        Ok(ContextSet { values })
    }

    pub fn for_model<S: Scalar, A>(model: &CgmModel<S>, active: A) -> Result<Self, ContextError>
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        Self::new(model.context_names(), active)
    }

    /// Bit `i` of `mask` activates `declared[i]`.
    pub fn from_mask<D: AsRef<str>>(declared: &[D], mask: u128) -> Self {
        let values = declared
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_ref().to_owned(), i < 128 && (mask >> i) & 1 == 1))
            .collect();
        ContextSet { values }
    }

    pub fn is_active(&self, name: &str) -> Result<bool, ContextError> {
        self.values.get(name).copied().ok_or_else(|| ContextError::UndeclaredContext(name.to_owned()))
    }

    /// Active labels in sorted order.
    pub fn active(&self) -> impl Iterator<Item = &str> {
        self.values.iter().filter(|(_, v)| **v).map(|(k, _)| k.as_str())
    }

    pub fn declared(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

impl fmt::Display for ContextSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, name) in self.active().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(name)?;
        }
        f.write_str("}")
    }
}

pub fn eval_condition(cond: &Condition, ctx: &ContextSet) -> Result<bool, ContextError> {
    Ok(match cond {
        Condition::True => true,
        Condition::Atom(name) => ctx.is_active(name)?,
        Condition::Not(inner) => !eval_condition(inner, ctx)?,
        Condition::And(items) => {
            for item in items {
                if !eval_condition(item, ctx)? {
                    return Ok(false);
                }
            }
            true
        }
        Condition::Or(items) => {
            for item in items {
                if eval_condition(item, ctx)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// The tighter of two bounds on the same metric. Equal thresholds prefer a
/// strict comparator; a full tie returns `a`.
pub fn stricter_quality_constraint<'a, S: Scalar>(
    a: &'a QualityConstraint<S>,
    b: &'a QualityConstraint<S>,
) -> Result<&'a QualityConstraint<S>, ContextError> {
    if a.metric != b.metric {
        return Err(ContextError::MetricMismatch { left: a.metric.clone(), right: b.metric.clone() });
    }
    let direction = a.comparison.direction();
    if direction != b.comparison.direction() {
        return Err(ContextError::DirectionMismatch { metric: a.metric.clone() });
    }
    let b_tighter = match direction {
        Direction::Upper => b.threshold < a.threshold,
        Direction::Lower => b.threshold > a.threshold,
    };
    if b_tighter || (b.threshold == a.threshold && b.comparison.is_strict() && !a.comparison.is_strict()) {
        Ok(b)
    } else {
        Ok(a)
    }
}

/// Resolved per-metric requirements at one point of the tree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EffectiveConstraints<S> {
    per_metric: BTreeMap<String, QualityConstraint<S>>,
}

impl<S: Scalar> EffectiveConstraints<S> {
    pub fn none() -> Self {
        EffectiveConstraints { per_metric: BTreeMap::new() }
    }

    /// Folds `constraints` with [`stricter_quality_constraint`].
    pub fn from_constraints<I>(constraints: I) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = QualityConstraint<S>>,
    {
        let mut out = Self::none();
        for qc in constraints {
            out.tighten(qc)?;
        }
        Ok(out)
    }

    /// Adds `qc`, keeping the stricter bound when the metric is already present.
    pub fn tighten(&mut self, qc: QualityConstraint<S>) -> Result<(), ContextError> {
        match self.per_metric.entry(qc.metric.clone()) {
            Entry::Vacant(slot) => {
                slot.insert(qc);
            }
            Entry::Occupied(mut slot) => {
                let current = slot.get();
                if !std::ptr::eq(stricter_quality_constraint(current, &qc)?, current) {
                    slot.insert(qc);
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, metric: &str) -> Option<&QualityConstraint<S>> {
        self.per_metric.get(metric)
    }

    pub fn len(&self) -> usize {
        self.per_metric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_metric.is_empty()
    }

    /// Constraints in metric order.
    pub fn iter(&self) -> impl Iterator<Item = &QualityConstraint<S>> {
        self.per_metric.values()
    }
}

impl<S: Scalar> fmt::Display for EffectiveConstraints<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, qc) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{qc}")?;
        }
        f.write_str("}")
    }
}

/// Constraints a pragmatic goal imposes under `ctx`.
///
/// Every applicable non-baseline row participates; per metric the strictest
/// of their bounds wins and replaces the baseline. Baseline bounds fill in
/// metrics no applicable row mentions.
pub fn effective_constraints<S: Scalar>(
    interp: &Interpretation<S>,
    ctx: &ContextSet,
) -> Result<EffectiveConstraints<S>, ContextError> {
    let mut out = EffectiveConstraints::none();
    for row in interp.rows.iter().filter(|r| !r.applicable_context.is_true()) {
        if eval_condition(&row.applicable_context, ctx)? {
            for qc in &row.constraints {
                out.tighten(qc.clone())?;
            }
        }
    }
    for row in interp.rows.iter().filter(|r| r.applicable_context.is_true()) {
        for qc in &row.constraints {
            if !out.per_metric.contains_key(&qc.metric) {
                out.per_metric.insert(qc.metric.clone(), qc.clone());
            }
        }
    }
    Ok(out)
}

/// Union of both sets; shared metrics keep the stricter bound.
pub fn merge_constraints<S: Scalar>(
    inherited: &EffectiveConstraints<S>,
    own: &EffectiveConstraints<S>,
) -> Result<EffectiveConstraints<S>, ContextError> {
    let mut out = own.clone();
    for qc in inherited.iter() {
        out.tighten(qc.clone())?;
    }
    Ok(out)
}

/// Value of the first row for `metric` whose condition holds.
pub fn provided_value<S: Scalar>(
    pq: &ProvidedQuality<S>,
    metric: &str,
    ctx: &ContextSet,
) -> Result<S, ContextError> {
    for row in pq.rows.iter().filter(|r| r.metric == metric) {
        if eval_condition(&row.applicable_context, ctx)? {
            return Ok(row.value);
        }
    }
    Err(ContextError::MissingMetric(metric.to_owned()))
}

/// A failed requirement and the value the leaf provides for it, if any.
pub type Violation<'r, S> = (&'r QualityConstraint<S>, Option<S>);

/// First requirement (in metric order) that `pq` fails, with the value it
/// provides if any.
pub fn first_violation<'r, S: Scalar>(
    pq: &ProvidedQuality<S>,
    ctx: &ContextSet,
    req: &'r EffectiveConstraints<S>,
) -> Result<Option<Violation<'r, S>>, ContextError> {
    for qc in req.iter() {
        match provided_value(pq, &qc.metric, ctx) {
            Ok(v) if qc.is_satisfied_by(v) => {}
            Ok(v) => return Ok(Some((qc, Some(v)))),
            Err(ContextError::MissingMetric(_)) => return Ok(Some((qc, None))),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Whether `pq` meets every requirement in `req`. A required metric the leaf
/// does not declare is a failure.
pub fn can_fulfill<S: Scalar>(
    pq: &ProvidedQuality<S>,
    ctx: &ContextSet,
    req: &EffectiveConstraints<S>,
) -> Result<bool, ContextError> {
    Ok(first_violation(pq, ctx, req)?.is_none())
}

/// Convenience for building constraints from `(metric, comparison, threshold)`.
pub fn constraints<S: Scalar>(
    items: &[(&str, Comparison, S)],
) -> Result<EffectiveConstraints<S>, ContextError> {
    EffectiveConstraints::from_constraints(items.iter().map(|(m, c, t)| QualityConstraint::new(*m, *c, *t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Comparison::*;

    fn ctx(declared: &[&str], active: &[&str]) -> ContextSet {
        ContextSet::new(declared, active).unwrap()
    }

    fn qc(m: &str, c: Comparison, t: f64) -> QualityConstraint<f64> {
        QualityConstraint::new(m, c, t)
    }

    fn table1() -> Interpretation<f64> {
        Interpretation::new()
            .row(
                Condition::True,
                vec![qc("errorMeters", LessThan, 500.0), qc("timeSeconds", LessThan, 120.0)],
            )
            .row(
                Condition::atom("C5"),
                vec![qc("errorMeters", LessThan, 20.0), qc("timeSeconds", LessThan, 120.0)],
            )
            .row(
                Condition::atom("C9"),
                vec![qc("errorMeters", LessThan, 500.0), qc("timeSeconds", LessThan, 240.0)],
            )
            .row(
                Condition::atom("C10"),
                vec![qc("errorMeters", LessThan, 200.0), qc("timeSeconds", LessThan, 20.0)],
            )
    }

    const TABLE_CTX: [&str; 4] = ["C2", "C5", "C9", "C10"];

    #[test]
    fn eval_condition_examples() {
        let all = ["C2", "C5", "C10"];
        assert!(eval_condition(&Condition::atom("C5"), &ctx(&all, &["C5"])).unwrap());
        let c = Condition::parse("not C2 and not C5 and C10").unwrap();
        assert!(eval_condition(&c, &ctx(&all, &["C10"])).unwrap());
        assert!(!eval_condition(&c, &ctx(&all, &["C2", "C10"])).unwrap());
        assert!(eval_condition(&Condition::True, &ctx(&[], &[])).unwrap());
    }

    #[test]
    fn undeclared_atom_faults() {
        let err = eval_condition(&Condition::atom("C99"), &ctx(&["C1"], &[])).unwrap_err();
        assert_eq!(err, ContextError::UndeclaredContext("C99".into()));
        assert!(ContextSet::new(["C1"], ["C2"]).is_err());
    }

    #[test]
    fn stricter_examples() {
        let (e500, e200) = (qc("errorMeters", LessThan, 500.0), qc("errorMeters", LessThan, 200.0));
        assert_eq!(stricter_quality_constraint(&e500, &e200).unwrap(), &e200);
        let a = qc("timeSeconds", LessThan, 120.0);
        assert_eq!(stricter_quality_constraint(&a, &a.clone()).unwrap(), &a);
        let (low, high) =
            (qc("availability", GreaterOrEqual, 0.95), qc("availability", GreaterOrEqual, 0.99));
        assert_eq!(stricter_quality_constraint(&low, &high).unwrap(), &high);
    }

    #[test]
    fn stricter_tie_breaks() {
        let strict = qc("m", LessThan, 5.0);
        let loose = qc("m", LessOrEqual, 5.0);
        assert_eq!(stricter_quality_constraint(&loose, &strict).unwrap(), &strict);
        assert_eq!(stricter_quality_constraint(&strict, &loose).unwrap(), &strict);
        let a = qc("m", GreaterThan, 1.0);
        let b = qc("m", GreaterThan, 1.0);
        assert!(std::ptr::eq(stricter_quality_constraint(&a, &b).unwrap(), &a));
    }

    #[test]
    fn stricter_rejects_mismatches() {
        assert!(matches!(
            stricter_quality_constraint(&qc("a", LessThan, 1.0), &qc("b", LessThan, 1.0)),
            Err(ContextError::MetricMismatch { .. })
        ));
        assert!(matches!(
            stricter_quality_constraint(&qc("a", LessThan, 1.0), &qc("a", GreaterThan, 1.0)),
            Err(ContextError::DirectionMismatch { .. })
        ));
    }

    #[test]
    fn table1_effective_constraints() {
        let t = table1();
        let base = effective_constraints(&t, &ctx(&TABLE_CTX, &[])).unwrap();
        assert_eq!(
            base,
            constraints(&[("errorMeters", LessThan, 500.0), ("timeSeconds", LessThan, 120.0)]).unwrap()
        );

        let all = effective_constraints(&t, &ctx(&TABLE_CTX, &["C5", "C9", "C10"])).unwrap();
        assert_eq!(
            all,
            constraints(&[("errorMeters", LessThan, 20.0), ("timeSeconds", LessThan, 20.0)]).unwrap()
        );

        let relaxed = effective_constraints(&t, &ctx(&TABLE_CTX, &["C9"])).unwrap();
        assert_eq!(
            relaxed,
            constraints(&[("errorMeters", LessThan, 500.0), ("timeSeconds", LessThan, 240.0)]).unwrap()
        );
    }

    #[test]
    fn baseline_fills_unmentioned_metrics() {
        let t = Interpretation::new()
            .row(Condition::True, vec![qc("a", LessThan, 10.0), qc("b", LessThan, 10.0)])
            .row(Condition::atom("X"), vec![qc("a", LessThan, 50.0)]);
        let e = effective_constraints(&t, &ctx(&["X"], &["X"])).unwrap();
        assert_eq!(e, constraints(&[("a", LessThan, 50.0), ("b", LessThan, 10.0)]).unwrap());
    }

    #[test]
    fn mixed_direction_rows_fault() {
        let t = Interpretation::new()
            .row(Condition::True, vec![])
            .row(Condition::atom("X"), vec![qc("a", LessThan, 50.0)])
            .row(Condition::atom("Y"), vec![qc("a", GreaterThan, 5.0)]);
        assert!(effective_constraints(&t, &ctx(&["X", "Y"], &["X"])).is_ok());
        assert_eq!(
            effective_constraints(&t, &ctx(&["X", "Y"], &["X", "Y"])).unwrap_err(),
            ContextError::DirectionMismatch { metric: "a".into() }
        );
    }

    #[test]
    fn merge_examples() {
        let e500 = constraints(&[("errorMeters", LessThan, 500.0)]).unwrap();
        let e20 = constraints(&[("errorMeters", LessThan, 20.0)]).unwrap();
        assert_eq!(merge_constraints(&e500, &e20).unwrap(), e20);

        let t120 = constraints(&[("timeSeconds", LessThan, 120.0)]).unwrap();
        assert_eq!(merge_constraints(&t120, &EffectiveConstraints::none()).unwrap(), t120);

        let t240 = constraints(&[("timeSeconds", LessThan, 240.0)]).unwrap();
        assert_eq!(
            merge_constraints(&e500, &t240).unwrap(),
            constraints(&[("errorMeters", LessThan, 500.0), ("timeSeconds", LessThan, 240.0)]).unwrap()
        );

        let lower = constraints(&[("errorMeters", GreaterThan, 1.0)]).unwrap();
        assert!(merge_constraints(&e500, &lower).is_err());
    }

    #[test]
    fn provided_value_first_match() {
        let pq = ProvidedQuality::new()
            .row(Condition::atom("C5"), "errorMeters", 10.0)
            .value("errorMeters", 400.0);
        assert_eq!(provided_value(&pq, "errorMeters", &ctx(&["C5"], &["C5"])).unwrap(), 10.0);
        assert_eq!(provided_value(&pq, "errorMeters", &ctx(&["C5"], &[])).unwrap(), 400.0);
        let pq = ProvidedQuality::new().value("timeSeconds", 30.0);
        assert_eq!(provided_value(&pq, "timeSeconds", &ctx(&["C9"], &["C9"])).unwrap(), 30.0);
        assert_eq!(
            provided_value(&pq, "errorMeters", &ctx(&[], &[])).unwrap_err(),
            ContextError::MissingMetric("errorMeters".into())
        );
    }

    #[test]
    fn can_fulfill_examples() {
        let empty = ctx(&[], &[]);
        let req = constraints(&[("errorMeters", LessThan, 20.0), ("timeSeconds", LessThan, 20.0)]).unwrap();
        let pq = ProvidedQuality::new().value("errorMeters", 15.0).value("timeSeconds", 10.0);
        assert!(can_fulfill(&pq, &empty, &req).unwrap());

        let pq = ProvidedQuality::new().value("errorMeters", 400.0);
        let req200 = constraints(&[("errorMeters", LessThan, 200.0)]).unwrap();
        assert!(!can_fulfill(&pq, &empty, &req200).unwrap());

        let pq = ProvidedQuality::new().value("errorMeters", 15.0);
        assert!(!can_fulfill(&pq, &empty, &req).unwrap());
        let (missing, provided) = first_violation(&pq, &empty, &req).unwrap().unwrap();
        assert_eq!(missing.metric, "timeSeconds");
        assert_eq!(provided, None);
    }

    #[test]
    fn display_forms() {
        let c = ctx(&["C2", "C5", "C10"], &["C10", "C2"]);
        assert_eq!(c.to_string(), "{C10, C2}");
        let e = constraints(&[("timeSeconds", LessOrEqual, 2.5), ("errorMeters", LessThan, 20.0)]).unwrap();
        assert_eq!(e.to_string(), "{errorMeters < 20, timeSeconds <= 2.5}");
    }
}
