//! On-disk document formats: JSON schemas for systems, nets, schemes,
//! morphisms and spans, plus the plain-text matrix format.
//!
//! The documents keep declaration order (arrays, not sets) so files stay
//! diffable; the in-memory types normalize on construction. Unknown JSON
//! fields are rejected everywhere, which catches typos like `labls` early.

use crate::bisim::{Span, SystemMorphism};
use crate::ident::{EventId, Label, PlaceId, StateId};
use crate::lts::{AsyncSystem, IndependenceRelation, LabelledAsyncSystem, SystemError};
use crate::petri::{LabelledPetriNet, NetError, PetriNet};
use crate::scheme::{SchemeError, SimplicialScheme};
use crate::snf::{IntegerMatrix, SmithForm};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("pre/post matrix must have {events} rows (one per event) of {places} columns (one per place)")]
    TokenMatrixShape { events: usize, places: usize },
    #[error("matrix text, line {line}: {message}")]
    MatrixText { line: usize, message: String },
    #[error(
        "the document is neither a system (`states`), a net (`places`) nor a scheme (`vertices`)"
    )]
    UnknownKind,
}

/// What a JSON input file describes, detected by its top-level fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    System,
    Net,
    Scheme,
}

/// Reads the distinguishing top-level field of a document.
pub fn detect_kind(text: &str) -> Result<DocKind, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let Some(object) = value.as_object() else {
        return Err(FormatError::UnknownKind);
    };
    if object.contains_key("states") {
        Ok(DocKind::System)
    } else if object.contains_key("places") {
        Ok(DocKind::Net)
    } else if object.contains_key("vertices") {
        Ok(DocKind::Scheme)
    } else {
        Err(FormatError::UnknownKind)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: StateId,
    pub event: EventId,
    pub to: StateId,
}

/// JSON document for a labelled asynchronous system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub states: Vec<StateId>,
    pub initial: StateId,
    pub events: Vec<EventId>,
    pub independence: Vec<(EventId, EventId)>,
    pub transitions: Vec<TransitionDoc>,
    pub labels: BTreeMap<EventId, Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<Label>>,
}

impl SystemDoc {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_system(self) -> Result<LabelledAsyncSystem, FormatError> {
        let system = AsyncSystem::new(
            self.states,
            self.initial,
            self.events,
            IndependenceRelation::from_pairs(self.independence)?,
            self.transitions
                .into_iter()
                .map(|t| (t.from, t.event, t.to))
                .collect::<Vec<_>>(),
        )?;
        let labelled = LabelledAsyncSystem::new(
            system,
            self.labels,
            self.alphabet.map(|a| a.into_iter().collect()),
        )?;
        Ok(labelled)
    }
}

impl From<&LabelledAsyncSystem> for SystemDoc {
    fn from(labelled: &LabelledAsyncSystem) -> Self {
        let system = labelled.system();
        Self {
            states: system.states().iter().cloned().collect(),
            initial: system.initial().clone(),
            events: system.events().iter().cloned().collect(),
            independence: system.independence().pairs().cloned().collect(),
            transitions: system
                .transitions()
                .map(|(from, event, to)| TransitionDoc {
                    from: from.clone(),
                    event: event.clone(),
                    to: to.clone(),
                })
                .collect(),
            labels: labelled.labels().clone(),
            alphabet: Some(labelled.alphabet().iter().cloned().collect()),
        }
    }
}

/// Token counts per event, either named sparsely or as a dense matrix whose
/// rows follow the declared event order and columns the declared place
/// order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TokenTable {
    ByName(BTreeMap<EventId, BTreeMap<PlaceId, u64>>),
    Matrix(Vec<Vec<u64>>),
}

impl TokenTable {
    fn into_by_name(
        self,
        events: &[EventId],
        places: &[PlaceId],
    ) -> Result<BTreeMap<EventId, BTreeMap<PlaceId, u64>>, FormatError> {
        match self {
            TokenTable::ByName(map) => Ok(map),
            TokenTable::Matrix(rows) => {
                if rows.len() != events.len() || rows.iter().any(|r| r.len() != places.len()) {
                    return Err(FormatError::TokenMatrixShape {
                        events: events.len(),
                        places: places.len(),
                    });
                }
                Ok(events
                    .iter()
                    .zip(rows)
                    .map(|(event, row)| {
                        let counts = places
                            .iter()
                            .zip(row)
                            .filter(|(_, count)| *count > 0)
                            .map(|(place, count)| (place.clone(), count))
                            .collect();
                        (event.clone(), counts)
                    })
                    .collect())
            }
        }
    }
}

/// JSON document for a labelled Petri net.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDoc {
    pub places: Vec<PlaceId>,
    pub events: Vec<EventId>,
    pub pre: TokenTable,
    pub post: TokenTable,
    pub initial_marking: BTreeMap<PlaceId, u64>,
    pub labels: BTreeMap<EventId, Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<Label>>,
}

impl NetDoc {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_net(self) -> Result<LabelledPetriNet, FormatError> {
        let pre = self.pre.into_by_name(&self.events, &self.places)?;
        let post = self.post.into_by_name(&self.events, &self.places)?;
        let net = PetriNet::new(self.places, self.events, pre, post, self.initial_marking)?;
        let labelled = LabelledPetriNet::new(
            net,
            self.labels,
            self.alphabet.map(|a| a.into_iter().collect()),
        )?;
        Ok(labelled)
    }
}

impl From<&LabelledPetriNet> for NetDoc {
    fn from(labelled: &LabelledPetriNet) -> Self {
        let net = labelled.net();
        let sparse = |vector_of: &dyn Fn(&EventId) -> BTreeMap<PlaceId, u64>| {
            net.events()
                .iter()
                .map(|event| (event.clone(), vector_of(event)))
                .filter(|(_, counts)| !counts.is_empty())
                .collect::<BTreeMap<_, _>>()
        };
        let nonzero = |marking: &crate::petri::Marking| {
            marking
                .iter()
                .filter(|(_, count)| *count > 0)
                .map(|(place, count)| (place.clone(), count))
                .collect::<BTreeMap<PlaceId, u64>>()
        };
        Self {
            places: net.places().iter().cloned().collect(),
            events: net.events().iter().cloned().collect(),
            pre: TokenTable::ByName(sparse(&|e| {
                nonzero(net.pre(e).expect("event comes from the net"))
            })),
            post: TokenTable::ByName(sparse(&|e| {
                nonzero(net.post(e).expect("event comes from the net"))
            })),
            initial_marking: nonzero(net.initial_marking()),
            labels: labelled.labels().clone(),
            alphabet: Some(labelled.alphabet().iter().cloned().collect()),
        }
    }
}

/// JSON document for a simplicial scheme: facets only, closure on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDoc {
    pub vertices: Vec<Label>,
    pub facets: Vec<Vec<Label>>,
}

impl SchemeDoc {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_scheme(self) -> Result<SimplicialScheme, FormatError> {
        let scheme = SimplicialScheme::from_facets(
            self.vertices,
            self.facets
                .into_iter()
                .map(|facet| facet.into_iter().collect::<BTreeSet<Label>>()),
        )?;
        Ok(scheme)
    }
}

impl From<&SimplicialScheme> for SchemeDoc {
    fn from(scheme: &SimplicialScheme) -> Self {
        Self {
            vertices: scheme.vertices().iter().cloned().collect(),
            facets: scheme
                .facets()
                .into_iter()
                .map(|facet| facet.to_vec())
                .collect(),
        }
    }
}

/// JSON document for a morphism between two systems given elsewhere.
/// Events absent from `eta` are unmapped.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub sigma: BTreeMap<StateId, StateId>,
    pub eta: BTreeMap<EventId, EventId>,
}

impl MorphismDoc {
    pub fn into_morphism(
        self,
        source: LabelledAsyncSystem,
        target: LabelledAsyncSystem,
    ) -> SystemMorphism {
        SystemMorphism::new(source, target, self.sigma, self.eta)
    }
}

/// JSON document for a span: the apex system and its two legs. The targets
/// of the legs are the two systems under comparison, supplied separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanDoc {
    pub apex: SystemDoc,
    pub left: MorphismDoc,
    pub right: MorphismDoc,
}

impl SpanDoc {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_span(
        self,
        left_target: LabelledAsyncSystem,
        right_target: LabelledAsyncSystem,
    ) -> Result<Span, FormatError> {
        let apex = self.apex.into_system()?;
        Ok(Span {
            left: self.left.into_morphism(apex.clone(), left_target),
            right: self.right.into_morphism(apex, right_target),
        })
    }
}

/// Renders one named matrix block: a `name rows cols` header, the entries
/// row by row, and (when given) a trailing `snf name: ...` line with the
/// diagonal.
pub fn render_matrix_block(name: &str, matrix: &IntegerMatrix, snf: Option<&SmithForm>) -> String {
    let mut out = String::new();
    writeln!(out, "{name} {} {}", matrix.rows(), matrix.cols()).unwrap();
    write!(out, "{matrix}").unwrap();
    if let Some(snf) = snf {
        writeln!(out, "snf {name}: {snf}").unwrap();
    }
    out
}

/// Parses matrix text: named blocks introduced by `name rows cols` headers,
/// or a single anonymous block of bare integer rows. `snf ...` trailers,
/// `#` comments and blank lines are skipped, so a dumped block reads back.
pub fn parse_matrix_blocks(text: &str) -> Result<Vec<(String, IntegerMatrix)>, FormatError> {
    struct Block {
        name: String,
        declared: Option<(usize, usize)>,
        rows: Vec<Vec<BigInt>>,
        line: usize,
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("snf") {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if BigInt::from_str(tokens[0]).is_err() {
            // header line: name, row count, column count
            if tokens.len() != 3 {
                return Err(FormatError::MatrixText {
                    line,
                    message: "expected `name rows cols`".into(),
                });
            }
            let parse_count = |token: &str| {
                token.parse::<usize>().map_err(|_| FormatError::MatrixText {
                    line,
                    message: format!("`{token}` is not a count"),
                })
            };
            blocks.push(Block {
                name: tokens[0].to_string(),
                declared: Some((parse_count(tokens[1])?, parse_count(tokens[2])?)),
                rows: Vec::new(),
                line,
            });
            continue;
        }
        let row = tokens
            .iter()
            .map(|t| {
                BigInt::from_str(t).map_err(|_| FormatError::MatrixText {
                    line,
                    message: format!("`{t}` is not an integer"),
                })
            })
            .collect::<Result<Vec<BigInt>, FormatError>>()?;
        if blocks.is_empty() {
            blocks.push(Block {
                name: String::new(),
                declared: None,
                rows: Vec::new(),
                line,
            });
        }
        let block = blocks.last_mut().unwrap();
        if block
            .rows
            .last()
            .is_some_and(|prev| prev.len() != row.len())
        {
            return Err(FormatError::MatrixText {
                line,
                message: "row length differs from the previous row".into(),
            });
        }
        block.rows.push(row);
    }
    blocks
        .into_iter()
        .map(|block| {
            let matrix = IntegerMatrix::from_rows(block.rows);
            if let Some((rows, cols)) = block.declared {
                if matrix.rows() != rows || (matrix.rows() > 0 && matrix.cols() != cols) {
                    return Err(FormatError::MatrixText {
                        line: block.line,
                        message: format!(
                            "header of `{}` declares {rows}x{cols}, found {}x{}",
                            block.name,
                            matrix.rows(),
                            matrix.cols()
                        ),
                    });
                }
            }
            Ok((block.name, matrix))
        })
        .collect()
}
