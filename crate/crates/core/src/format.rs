//! The model document: a JSON file describing contexts and the refinement tree.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "notes": ["optional free text"],
//!   "contexts": [{ "name": "C5", "description": "mobile data available" }],
//!   "root": {
//!     "id": "g_loc",
//!     "label": "[p] location is identified",
//!     "kind": "goal",
//!     "applicability": "true",
//!     "decomposition": "or",
//!     "interpretation": [
//!       { "context": "true",
//!         "constraints": [{ "metric": "errorMeters", "comparison": "<", "threshold": 500.0 }] }
//!     ],
//!     "children": [
//!       { "id": "t_gps", "label": "GPS lock", "kind": "task", "applicability": "C5",
//!         "provided": [{ "context": "true", "metric": "errorMeters", "value": 10.0 }] }
//!     ]
//!   }
//! }
//! ```
//!
//! `kind` is `goal`, `task` or `delegation`; `decomposition` (`and`/`or`)
//! and `children` are required on goals and rejected on leaves;
//! `interpretation` is only allowed on goals and `provided` only on leaves.
//! Comparisons are `<`, `<=`, `>` or `>=`. Conditions use the grammar
//! documented on [`Condition`]. Unknown fields are rejected.
//!
//! [`serialize_model`] emits a canonical form: fixed key order, children
//! and rows in model order, optional fields omitted when empty, two-space
//! indentation and a trailing newline. Documents nest two JSON levels per
//! tree level and the reader stops at 128 levels, so trees deeper than
//! about 60 refinements cannot be read back.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_model, CgmModel, Comparison, Condition, ConditionParseError, ContextLabel, Decomposition, Goal,
    Interpretation, InterpretationRow, NodeId, NodeKind, ProvidedQuality, ProvidedRow, QualityConstraint,
    RefinementNode, Violation,
};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("node `{node}`: invalid {field} condition: {source}")]
    Condition {
        node: String,
        field: &'static str,
        #[source]
        source: ConditionParseError,
    },
    #[error("node `{node}`: {message}")]
    Structure { node: String, message: String },
    #[error("invalid model: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentDto {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    #[serde(default)]
    contexts: Vec<ContextDto>,
    root: NodeDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextDto {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum KindDto {
    Goal,
    Task,
    Delegation,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum DecompositionDto {
    And,
    Or,
}

fn true_condition() -> String {
    "true".to_owned()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDto {
    id: String,
    #[serde(default)]
    label: String,
    kind: KindDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actor: Option<String>,
    #[serde(default = "true_condition")]
    applicability: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decomposition: Option<DecompositionDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interpretation: Option<Vec<InterpretationRowDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provided: Option<Vec<ProvidedRowDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeDto>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpretationRowDto {
    context: String,
    constraints: Vec<ConstraintDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDto {
    metric: String,
    comparison: String,
    threshold: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvidedRowDto {
    context: String,
    metric: String,
    value: f64,
}

/// Parses and validates a model document.
pub fn parse_model<S: Scalar>(text: &str) -> Result<CgmModel<S>, FormatError> {
    parse_model_bytes(text.as_bytes())
}

/// Like [`parse_model`] for raw bytes; invalid UTF-8 is a syntax error.
pub fn parse_model_bytes<S: Scalar>(bytes: &[u8]) -> Result<CgmModel<S>, FormatError> {
    let doc: DocumentDto = serde_json::from_slice(bytes).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format_version));
    }
    let contexts =
        doc.contexts.into_iter().map(|c| ContextLabel { name: c.name, description: c.description }).collect();
    let model = CgmModel { contexts, root: node_from_dto(doc.root)?, notes: doc.notes };
    let violations = validate_model(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(FormatError::Invalid(violations))
    }
}

fn condition(node: &str, field: &'static str, text: &str) -> Result<Condition, FormatError> {
    Condition::parse(text).map_err(|source| FormatError::Condition { node: node.to_owned(), field, source })
}

fn structure(node: &str, message: impl Into<String>) -> FormatError {
    FormatError::Structure { node: node.to_owned(), message: message.into() }
}

fn node_from_dto<S: Scalar>(dto: NodeDto) -> Result<RefinementNode<S>, FormatError> {
    let id = dto.id;
    let applicability = condition(&id, "applicability", &dto.applicability)?;
    let kind = match dto.kind {
        KindDto::Goal => {
            if dto.provided.is_some() {
                return Err(structure(&id, "goals cannot declare provided quality"));
            }
            let decomposition = match dto.decomposition {
                Some(DecompositionDto::And) => Decomposition::And,
                Some(DecompositionDto::Or) => Decomposition::Or,
                None => return Err(structure(&id, "goal is missing `decomposition`")),
            };
            let children = dto
                .children
                .ok_or_else(|| structure(&id, "goal is missing `children`"))?
                .into_iter()
                .map(node_from_dto)
                .collect::<Result<Vec<_>, _>>()?;
            let interpretation = match dto.interpretation {
                None => None,
                Some(rows) => Some(Interpretation {
                    rows: rows
                        .into_iter()
                        .map(|row| {
                            Ok(InterpretationRow {
                                applicable_context: condition(&id, "interpretation", &row.context)?,
                                constraints: row
                                    .constraints
                                    .into_iter()
                                    .map(|c| {
                                        let comparison =
                                            Comparison::from_symbol(&c.comparison).ok_or_else(|| {
                                                structure(
                                                    &id,
                                                    format!("unknown comparison `{}`", c.comparison),
                                                )
                                            })?;
                                        Ok(QualityConstraint {
                                            metric: c.metric,
                                            comparison,
                                            threshold: S::from_f64_lossy(c.threshold),
                                        })
                                    })
                                    .collect::<Result<_, FormatError>>()?,
                            })
                        })
                        .collect::<Result<_, FormatError>>()?,
                }),
            };
            NodeKind::Goal(Goal { decomposition, children, interpretation })
        }
        KindDto::Task | KindDto::Delegation => {
            for (present, field) in [
                (dto.decomposition.is_some(), "decomposition"),
                (dto.children.is_some(), "children"),
                (dto.interpretation.is_some(), "interpretation"),
            ] {
                if present {
                    return Err(structure(&id, format!("leaves cannot have `{field}`")));
                }
            }
            let rows = dto
                .provided
                .unwrap_or_default()
                .into_iter()
                .map(|row| {
                    Ok(ProvidedRow {
                        applicable_context: condition(&id, "provided", &row.context)?,
                        metric: row.metric,
                        value: S::from_f64_lossy(row.value),
                    })
                })
                .collect::<Result<_, FormatError>>()?;
            let pq = ProvidedQuality { rows };
            if dto.kind == KindDto::Task {
                NodeKind::Task(pq)
            } else {
                NodeKind::Delegation(pq)
            }
        }
    };
    Ok(RefinementNode { id: NodeId::new(id), label: dto.label, actor: dto.actor, applicability, kind })
}

fn node_to_dto<S: Scalar>(node: &RefinementNode<S>) -> NodeDto {
    let mut dto = NodeDto {
        id: node.id.to_string(),
        label: node.label.clone(),
        kind: KindDto::Task,
        actor: node.actor.clone(),
        applicability: node.applicability.to_string(),
        decomposition: None,
        interpretation: None,
        provided: None,
        children: None,
    };
    match &node.kind {
        NodeKind::Goal(goal) => {
            dto.kind = KindDto::Goal;
            dto.decomposition = Some(match goal.decomposition {
                Decomposition::And => DecompositionDto::And,
                Decomposition::Or => DecompositionDto::Or,
            });
            dto.interpretation = goal.interpretation.as_ref().map(|interp| {
                interp
                    .rows
                    .iter()
                    .map(|row| InterpretationRowDto {
                        context: row.applicable_context.to_string(),
                        constraints: row
                            .constraints
                            .iter()
                            .map(|c| ConstraintDto {
                                metric: c.metric.clone(),
                                comparison: c.comparison.symbol().to_owned(),
                                threshold: c.threshold.as_f64(),
                            })
                            .collect(),
                    })
                    .collect()
            });
            dto.children = Some(goal.children.iter().map(node_to_dto).collect());
        }
        NodeKind::Task(pq) | NodeKind::Delegation(pq) => {
            if matches!(node.kind, NodeKind::Delegation(_)) {
                dto.kind = KindDto::Delegation;
            }
            if !pq.rows.is_empty() {
                dto.provided = Some(
                    pq.rows
                        .iter()
                        .map(|r| ProvidedRowDto {
                            context: r.applicable_context.to_string(),
                            metric: r.metric.clone(),
                            value: r.value.as_f64(),
                        })
                        .collect(),
                );
            }
        }
    }
    dto
}

/// Canonical document text for `model`.
pub fn serialize_model<S: Scalar>(model: &CgmModel<S>) -> String {
    let doc = DocumentDto {
        format_version: FORMAT_VERSION,
        notes: model.notes.clone(),
        contexts: model
            .contexts
            .iter()
            .map(|c| ContextDto { name: c.name.clone(), description: c.description.clone() })
            .collect(),
        root: node_to_dto(&model.root),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model documents always serialize");
    text.push('\n');
    text
}
