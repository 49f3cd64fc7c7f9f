//! Property bodies shared by the proptest suite and the acceptance harness.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use pcgm::context::{
    can_fulfill, effective_constraints, eval_condition, stricter_quality_constraint, ContextSet,
};
use pcgm::genmodel::{random_model, worst_case_model, GeneratorConfig};
use pcgm::model::{CgmModel, Comparison, Condition, Direction};
use pcgm::{
    parse_model, serialize_model, EffectiveConstraints, Interpretation, ProvidedQuality, QualityConstraint,
};

pub const LABELS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

pub fn condition() -> impl Strategy<Value = Condition> {
    let leaf =
        prop_oneof![Just(Condition::True), (0..LABELS.len()).prop_map(|i| Condition::atom(LABELS[i])),];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Condition::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Condition::And),
            prop::collection::vec(inner, 2..4).prop_map(Condition::Or),
        ]
    })
}

pub fn every_context_set() -> Vec<ContextSet> {
    (0..1u128 << LABELS.len()).map(|m| ContextSet::from_mask(&LABELS, m)).collect()
}

pub fn de_morgan(a: &Condition, b: &Condition) -> Result<(), TestCaseError> {
    let both = || vec![a.clone(), b.clone()];
    let negated = || vec![Condition::not(a.clone()), Condition::not(b.clone())];
    for ctx in every_context_set() {
        let eval = |c: &Condition| eval_condition(c, &ctx).unwrap();
        prop_assert_eq!(eval(&Condition::not(Condition::And(both()))), eval(&Condition::Or(negated())));
        prop_assert_eq!(eval(&Condition::not(Condition::Or(both()))), eval(&Condition::And(negated())));
    }
    Ok(())
}

pub fn same_direction_triple() -> impl Strategy<Value = [QualityConstraint; 3]> {
    (any::<bool>(), prop::array::uniform3((any::<bool>(), 0i32..20))).prop_map(|(lower, items)| {
        items.map(|(strict, t)| {
            let comparison = match (lower, strict) {
                (false, true) => Comparison::LessThan,
                (false, false) => Comparison::LessOrEqual,
                (true, true) => Comparison::GreaterThan,
                (true, false) => Comparison::GreaterOrEqual,
            };
            QualityConstraint::new("m", comparison, t as f64)
        })
    })
}

pub fn stricter_algebra([a, b, c]: &[QualityConstraint; 3]) -> Result<(), TestCaseError> {
    let s = |x: &QualityConstraint, y: &QualityConstraint| stricter_quality_constraint(x, y).unwrap().clone();
    let key = |q: &QualityConstraint| (q.threshold, q.comparison.is_strict());
    prop_assert_eq!(key(&s(a, b)), key(&s(b, a)));
    prop_assert_eq!(key(&s(&s(a, b), c)), key(&s(a, &s(b, c))));
    prop_assert_eq!(&s(a, a), a);
    let r = s(a, b);
    prop_assert!(&r == a || &r == b);
    Ok(())
}

pub type MonotoneCase = (Vec<(usize, i32)>, Vec<(usize, Comparison, i32, i32)>, Vec<bool>);

pub fn monotone_case() -> impl Strategy<Value = MonotoneCase> {
    (
        prop::collection::vec((0usize..3, 0i32..100), 0..4),
        prop::collection::vec(
            (0usize..3, prop::sample::select(Comparison::ALL.to_vec()), 0i32..100, 0i32..30),
            0..4,
        ),
        prop::collection::vec(any::<bool>(), 2),
    )
}

/// Tightening every required bound never turns a failing leaf into a passing one.
pub fn can_fulfill_monotone((provided, req, active): &MonotoneCase) -> Result<(), TestCaseError> {
    let metrics = ["a", "b", "c"];
    let ctx =
        ContextSet::new(["X", "Y"], ["X", "Y"].iter().zip(active).filter(|p| *p.1).map(|p| *p.0)).unwrap();
    let mut pq = ProvidedQuality::new();
    for (m, v) in provided {
        pq = pq.row(Condition::atom("X"), metrics[*m], *v as f64 - 5.0).value(metrics[*m], *v as f64);
    }
    let mut loose = EffectiveConstraints::none();
    let mut tight = EffectiveConstraints::none();
    for (m, cmp, t, delta) in req {
        if loose.get(metrics[*m]).is_some() {
            continue;
        }
        let t = *t as f64;
        let shift = match cmp.direction() {
            Direction::Upper => -(*delta as f64),
            Direction::Lower => *delta as f64,
        };
        loose.tighten(QualityConstraint::new(metrics[*m], *cmp, t)).unwrap();
        tight.tighten(QualityConstraint::new(metrics[*m], *cmp, t + shift)).unwrap();
    }
    if can_fulfill(&pq, &ctx, &tight).unwrap() {
        prop_assert!(can_fulfill(&pq, &ctx, &loose).unwrap());
    }
    Ok(())
}

pub fn baseline_row() -> impl Strategy<Value = Vec<QualityConstraint>> {
    let metrics = ["a", "b", "c", "d"];
    prop::collection::btree_map(
        0usize..4,
        (prop_oneof![Just(Comparison::LessThan), Just(Comparison::LessOrEqual)], 0i32..1000),
        0..4,
    )
    .prop_map(move |m| {
        m.into_iter().map(|(k, (c, t))| QualityConstraint::new(metrics[k], c, t as f64)).collect()
    })
}

pub fn baseline_applies_alone(row: &[QualityConstraint]) -> Result<(), TestCaseError> {
    let interp = Interpretation::new().row(Condition::True, row.to_vec());
    let empty = ContextSet::new(LABELS, Vec::<&str>::new()).unwrap();
    let got = effective_constraints(&interp, &empty).unwrap();
    prop_assert_eq!(got, EffectiveConstraints::from_constraints(row.to_vec()).unwrap());
    Ok(())
}

/// Serializes 100 generated models and checks parse(serialize(m)) == m and
/// that serialization is a fixed point.
pub fn round_trip_100_models() -> Result<(), String> {
    for seed in 0..100u64 {
        let cfg = GeneratorConfig {
            metrics: vec!["timeSeconds".into(), "errorMeters".into()],
            ..GeneratorConfig::new(5 + seed as usize * 7, (seed % 8) as usize, seed)
        };
        let m: CgmModel<f64> = random_model(&cfg).map_err(|e| e.to_string())?;
        let text = serialize_model(&m);
        let back: CgmModel<f64> = parse_model(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        if back != m {
            return Err(format!("seed {seed}: model changed"));
        }
        if serialize_model(&back) != text {
            return Err(format!("seed {seed}: text changed"));
        }
    }
    Ok(())
}

pub fn generators_deterministic() -> Result<(), String> {
    for seed in [0, 1, 42, u64::MAX] {
        for nodes in [1, 12, 100, 1000] {
            let cfg = GeneratorConfig::new(nodes, 5, seed);
            let r = |c: &GeneratorConfig| serialize_model(&random_model::<f64>(c).unwrap());
            let w = |c: &GeneratorConfig| serialize_model(&worst_case_model::<f64>(c).unwrap());
            if r(&cfg) != r(&cfg) || w(&cfg) != w(&cfg) {
                return Err(format!("seed {seed}, {nodes} nodes"));
            }
        }
    }
    let a = serialize_model(&random_model::<f64>(&GeneratorConfig::new(100, 5, 1)).unwrap());
    let b = serialize_model(&random_model::<f64>(&GeneratorConfig::new(100, 5, 2)).unwrap());
    if a == b {
        return Err("different seeds gave the same model".into());
    }
    Ok(())
}
