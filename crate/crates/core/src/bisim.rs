//! Morphisms of labelled asynchronous systems, open maps, spans, and the
//! homology-based refutation of label-preserving bisimilarity.
//!
//! A span of open morphisms out of a common apex certifies that two systems
//! are bisimilar. In the other direction, bisimilar systems have matching
//! sets of residual homology signatures layer by layer, so a mismatch in
//! some layer refutes bisimilarity with a concrete witness word. Neither
//! procedure is complete: a failed certification attempt or an exhausted
//! search is inconclusive, never evidence.

use crate::homology::{homology, HomologySignature};
use crate::ident::{EventId, StateId};
use crate::lts::{LabelledAsyncSystem, StepTuple, SystemError};
use crate::scheme::scheme_of_system;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("the systems use different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Why a claimed morphism is not one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    AlphabetMismatch,
    SigmaMissing {
        state: StateId,
    },
    SigmaUnknownSource {
        state: StateId,
    },
    SigmaUnknownImage {
        state: StateId,
        image: StateId,
    },
    EtaUnknownSource {
        event: EventId,
    },
    EtaUnknownImage {
        event: EventId,
        image: EventId,
    },
    InitialMismatch {
        image: StateId,
        expected: StateId,
    },
    TransitionNotPreserved {
        from: StateId,
        event: EventId,
        to: StateId,
    },
    TransitionNotCollapsed {
        from: StateId,
        event: EventId,
        to: StateId,
    },
    IndependenceNotPreserved {
        first: EventId,
        second: EventId,
    },
    LabelMismatch {
        event: EventId,
        image: EventId,
    },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MorphismViolation::*;
        match self {
            AlphabetMismatch => write!(f, "source and target use different alphabets"),
            SigmaMissing { state } => write!(f, "the state map is undefined on `{state}`"),
            SigmaUnknownSource { state } => {
                write!(f, "the state map mentions unknown state `{state}`")
            }
            SigmaUnknownImage { state, image } => {
                write!(f, "state `{state}` maps to unknown target state `{image}`")
            }
            EtaUnknownSource { event } => {
                write!(f, "the event map mentions unknown event `{event}`")
            }
            EtaUnknownImage { event, image } => {
                write!(f, "event `{event}` maps to unknown target event `{image}`")
            }
            InitialMismatch { image, expected } => write!(
                f,
                "the initial state maps to `{image}` instead of `{expected}`"
            ),
            TransitionNotPreserved { from, event, to } => write!(
                f,
                "the image of transition {from} -{event}-> {to} is not a target transition"
            ),
            TransitionNotCollapsed { from, event, to } => write!(
                f,
                "event `{event}` has no image, yet {from} and {to} map to different states"
            ),
            IndependenceNotPreserved { first, second } => write!(
                f,
                "independent events `{first}` and `{second}` have dependent images"
            ),
            LabelMismatch { event, image } => write!(
                f,
                "event `{event}` and its image `{image}` carry different labels"
            ),
        }
    }
}

/// Why a morphism fails to be open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpennessViolation {
    EtaNotTotal {
        event: EventId,
    },
    LiftMissing {
        state: StateId,
        target_event: EventId,
    },
    IndependenceNotReflected {
        first: EventId,
        second: EventId,
        at_state: StateId,
    },
}

impl fmt::Display for OpennessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use OpennessViolation::*;
        match self {
            EtaNotTotal { event } => {
                write!(f, "event `{event}` has no image, so nothing above it lifts")
            }
            LiftMissing { state, target_event } => write!(
                f,
                "target event `{target_event}` is enabled under the image of `{state}` but has no lift there"
            ),
            IndependenceNotReflected { first, second, at_state } => write!(
                f,
                "events `{first}` and `{second}` at `{at_state}` have independent images but are dependent themselves"
            ),
        }
    }
}

/// A map of labelled asynchronous systems: a total state map `sigma` and a
/// partial event map `eta`. Events outside `eta` are silent in the target,
/// so their transitions must not move the image state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemMorphism {
    source: LabelledAsyncSystem,
    target: LabelledAsyncSystem,
    sigma: BTreeMap<StateId, StateId>,
    eta: BTreeMap<EventId, EventId>,
}

impl SystemMorphism {
    /// Packs the data without judging it; see [`SystemMorphism::validate`].
    pub fn new(
        source: LabelledAsyncSystem,
        target: LabelledAsyncSystem,
        sigma: BTreeMap<StateId, StateId>,
        eta: BTreeMap<EventId, EventId>,
    ) -> Self {
        Self {
            source,
            target,
            sigma,
            eta,
        }
    }

    pub fn source(&self) -> &LabelledAsyncSystem {
        &self.source
    }

    pub fn target(&self) -> &LabelledAsyncSystem {
        &self.target
    }

    pub fn sigma(&self) -> &BTreeMap<StateId, StateId> {
        &self.sigma
    }

    pub fn eta(&self) -> &BTreeMap<EventId, EventId> {
        &self.eta
    }

    /// Everything that stops this from being a morphism, in a deterministic
    /// order; empty means it is one.
    pub fn validate(&self) -> Vec<MorphismViolation> {
        let mut out = Vec::new();
        let src = self.source.system();
        let tgt = self.target.system();
        if self.source.alphabet() != self.target.alphabet() {
            out.push(MorphismViolation::AlphabetMismatch);
        }
        for state in src.states() {
            if !self.sigma.contains_key(state) {
                out.push(MorphismViolation::SigmaMissing {
                    state: state.clone(),
                });
            }
        }
        for (state, image) in &self.sigma {
            if !src.states().contains(state) {
                out.push(MorphismViolation::SigmaUnknownSource {
                    state: state.clone(),
                });
            }
            if !tgt.states().contains(image) {
                out.push(MorphismViolation::SigmaUnknownImage {
                    state: state.clone(),
                    image: image.clone(),
                });
            }
        }
        for (event, image) in &self.eta {
            if !src.events().contains(event) {
                out.push(MorphismViolation::EtaUnknownSource {
                    event: event.clone(),
                });
            }
            if !tgt.events().contains(image) {
                out.push(MorphismViolation::EtaUnknownImage {
                    event: event.clone(),
                    image: image.clone(),
                });
            }
        }
        if let Some(image) = self.state_image(src.initial()) {
            if image != tgt.initial() {
                out.push(MorphismViolation::InitialMismatch {
                    image: image.clone(),
                    expected: tgt.initial().clone(),
                });
            }
        }
        for (from, event, to) in src.transitions() {
            let (Some(from_img), Some(to_img)) = (self.state_image(from), self.state_image(to))
            else {
                continue; // already reported above
            };
            match self.event_image(event) {
                Some(image) => {
                    if tgt.successor(from_img, image) != Some(to_img) {
                        out.push(MorphismViolation::TransitionNotPreserved {
                            from: from.clone(),
                            event: event.clone(),
                            to: to.clone(),
                        });
                    }
                }
                None => {
                    if from_img != to_img {
                        out.push(MorphismViolation::TransitionNotCollapsed {
                            from: from.clone(),
                            event: event.clone(),
                            to: to.clone(),
                        });
                    }
                }
            }
        }
        for (first, second) in src.independence().pairs() {
            if let (Some(a), Some(b)) = (self.event_image(first), self.event_image(second)) {
                if !tgt.independence().contains(a, b) {
                    out.push(MorphismViolation::IndependenceNotPreserved {
                        first: first.clone(),
                        second: second.clone(),
                    });
                }
            }
        }
        for event in src.events() {
            let Some(image) = self.event_image(event) else {
                continue;
            };
            if !tgt.events().contains(image) {
                continue; // already reported above
            }
            if self.source.label(event) != self.target.label(image) {
                out.push(MorphismViolation::LabelMismatch {
                    event: event.clone(),
                    image: image.clone(),
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Everything that stops a (valid) morphism from being open: the event
    /// map must be total, every target transition under the image of a state
    /// must lift to that state, and independence of images must already hold
    /// between the events themselves.
    pub fn openness_violations(&self) -> Vec<OpennessViolation> {
        let mut out = Vec::new();
        let src = self.source.system();
        let tgt = self.target.system();
        for event in src.events() {
            if !self.eta.contains_key(event) {
                out.push(OpennessViolation::EtaNotTotal {
                    event: event.clone(),
                });
            }
        }
        for state in src.states() {
            let Some(image) = self.state_image(state) else {
                continue;
            };
            for (target_event, _) in tgt.transitions_from(image) {
                let lifts = src
                    .transitions_from(state)
                    .any(|(event, _)| self.event_image(event) == Some(target_event));
                if !lifts {
                    out.push(OpennessViolation::LiftMissing {
                        state: state.clone(),
                        target_event: target_event.clone(),
                    });
                }
            }
        }
        for state in src.states() {
            for (first, _) in src.transitions_from(state) {
                for (second, _) in src.transitions_from(state) {
                    if first == second || src.independence().contains(first, second) {
                        continue;
                    }
                    let (Some(a), Some(b)) = (self.event_image(first), self.event_image(second))
                    else {
                        continue;
                    };
                    if tgt.independence().contains(a, b) {
                        out.push(OpennessViolation::IndependenceNotReflected {
                            first: first.clone(),
                            second: second.clone(),
                            at_state: state.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_open(&self) -> bool {
        self.openness_violations().is_empty()
    }

    /// Checks that every target tuple of `n` pairwise independent events is
    /// the image of a source tuple; returns the first target tuple that is
    /// not. Surjectivity on these tuples is necessary for openness but not
    /// sufficient, which is exactly why open maps are checked structurally.
    pub fn surjective_on_steps(&self, n: usize) -> Result<(), StepTuple> {
        let image: BTreeSet<StepTuple> = self
            .source
            .system()
            .steps(n)
            .into_iter()
            .filter_map(|tuple| {
                let state = self.state_image(&tuple.state)?.clone();
                let events = tuple
                    .events
                    .iter()
                    .map(|e| self.event_image(e).cloned())
                    .collect::<Option<Vec<EventId>>>()?;
                Some(StepTuple { state, events })
            })
            .collect();
        for tuple in self.target.system().steps(n) {
            if !image.contains(&tuple) {
                return Err(tuple);
            }
        }
        Ok(())
    }

    fn state_image(&self, state: &StateId) -> Option<&StateId> {
        self.sigma.get(state)
    }

    fn event_image(&self, event: &EventId) -> Option<&EventId> {
        self.eta.get(event)
    }
}

/// Two morphisms out of one apex system.
#[derive(Debug, Clone)]
pub struct Span {
    pub left: SystemMorphism,
    pub right: SystemMorphism,
}

/// Which of the two compared systems a witness belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// Outcome of a bisimilarity check. `Certified` and `NotBisimilar` are
/// definitive; everything else is `Inconclusive` with the reason spelled
/// out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    NotBisimilar {
        length: usize,
        witness: Vec<EventId>,
        side: Side,
    },
    Inconclusive {
        reason: String,
    },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified => write!(f, "certified bisimilar"),
            Verdict::NotBisimilar {
                length,
                witness,
                side,
            } => {
                let word: Vec<&str> = witness.iter().map(|e| e.as_str()).collect();
                write!(
                    f,
                    "not bisimilar: homology signatures differ after {length} step(s), witness `{}` on the {side} side",
                    word.join(" ")
                )
            }
            Verdict::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

/// Checks a claimed span: both legs must share the apex, be morphisms, and
/// be open. Success certifies bisimilarity of the two targets; any defect is
/// merely inconclusive.
pub fn certify(span: &Span) -> Verdict {
    if span.left.source() != span.right.source() {
        return Verdict::Inconclusive {
            reason: "the two legs do not start from the same apex system".into(),
        };
    }
    for (name, leg) in [("left", &span.left), ("right", &span.right)] {
        let violations = leg.validate();
        if let Some(first) = violations.first() {
            return Verdict::Inconclusive {
                reason: format!("the {name} leg is not a morphism: {first}"),
            };
        }
        let openness = leg.openness_violations();
        if let Some(first) = openness.first() {
            return Verdict::Inconclusive {
                reason: format!("the {name} leg is not open: {first}"),
            };
        }
    }
    Verdict::Certified
}

/// Searches for a layer of reachable states whose sets of residual homology
/// signatures differ between the two systems. Bisimilar systems agree on
/// every layer, so a difference refutes bisimilarity; the witness is the
/// least word of that length reaching a state whose signature the other
/// side cannot match. Agreement up to `max_len` (default: the total state
/// count) proves nothing.
pub fn refute(
    left: &LabelledAsyncSystem,
    right: &LabelledAsyncSystem,
    max_len: Option<usize>,
) -> Result<Verdict, BisimError> {
    if left.alphabet() != right.alphabet() {
        return Err(BisimError::AlphabetMismatch);
    }
    let max_len = max_len.unwrap_or(left.system().states().len() + right.system().states().len());
    let layers_left = left
        .system()
        .reachable_layers(left.system().initial(), Some(max_len))?;
    let layers_right = right
        .system()
        .reachable_layers(right.system().initial(), Some(max_len))?;
    let mut cache_left = BTreeMap::new();
    let mut cache_right = BTreeMap::new();
    for k in 0..=max_len {
        let sigs_left = layer_signatures(left, &layers_left, k, &mut cache_left)?;
        let sigs_right = layer_signatures(right, &layers_right, k, &mut cache_right)?;
        if sigs_left.is_empty() && sigs_right.is_empty() {
            return Ok(Verdict::Inconclusive {
                reason: format!(
                    "signatures agree on every layer and neither system has a word of length {k}"
                ),
            });
        }
        if sigs_left != sigs_right {
            let on_left = least_unmatched(&layers_left, k, &cache_left, &sigs_right);
            let (side, witness) = match on_left {
                Some(witness) => (Side::Left, witness),
                None => (
                    Side::Right,
                    least_unmatched(&layers_right, k, &cache_right, &sigs_left)
                        .expect("unequal signature sets leave a witness on some side"),
                ),
            };
            return Ok(Verdict::NotBisimilar {
                length: k,
                witness,
                side,
            });
        }
    }
    Ok(Verdict::Inconclusive {
        reason: format!("signatures agree on all layers up to length {max_len}"),
    })
}

/// Homology signatures of the residual systems at every state in layer `k`.
fn layer_signatures(
    system: &LabelledAsyncSystem,
    layers: &crate::lts::ReachableLayers,
    k: usize,
    cache: &mut BTreeMap<StateId, HomologySignature>,
) -> Result<BTreeSet<HomologySignature>, BisimError> {
    let mut out = BTreeSet::new();
    for state in layers.layer(k) {
        if !cache.contains_key(state) {
            let residual = system.residual(state)?;
            cache.insert(state.clone(), homology(&scheme_of_system(&residual)));
        }
        out.insert(cache[state].clone());
    }
    Ok(out)
}

/// The least witness word in layer `k` whose state's signature the other
/// side does not have.
fn least_unmatched(
    layers: &crate::lts::ReachableLayers,
    k: usize,
    cache: &BTreeMap<StateId, HomologySignature>,
    other: &BTreeSet<HomologySignature>,
) -> Option<Vec<EventId>> {
    layers
        .layer(k)
        .filter(|state| !other.contains(&cache[*state]))
        .filter_map(|state| layers.witness(k, state))
        .map(|word| word.to_vec())
        .min()
}
