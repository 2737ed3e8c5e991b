//! Asynchronous transition systems: states, events and an independence
//! relation, with a partial action of event words on states.
//!
//! A system is kept structurally sound by its constructor (all references
//! resolve, the action is a partial function). The behavioural axioms, i.e.
//! the diamond completion property and occurrence of every event, are the
//! business of [`AsyncSystem::validate`], which reports every violation
//! instead of failing fast.

use crate::ident::{EventId, Label, StateId};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Errors for malformed inputs. These are distinct from axiom violations,
/// which are collected in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("initial state `{0}` is not in the state set")]
    UnknownInitial(StateId),
    #[error("transition ({0}, {1}, {2}) mentions an unknown state or event")]
    DanglingTransition(StateId, EventId, StateId),
    #[error(
        "state `{0}` has two transitions for event `{1}`; the action must be a partial function"
    )]
    NondeterministicTransition(StateId, EventId),
    #[error("event `{0}` cannot be independent of itself")]
    ReflexiveIndependence(EventId),
    #[error("independence pair ({0}, {1}) mentions an unknown event")]
    UnknownIndependenceEvent(EventId, EventId),
    #[error("event `{0}` has no label")]
    MissingLabel(EventId),
    #[error("label map mentions unknown event `{0}`")]
    LabelForUnknownEvent(EventId),
    #[error("label `{0}` of event `{1}` is not in the declared alphabet")]
    LabelOutsideAlphabet(Label, EventId),
    #[error("state `{0}` is not reachable from the initial state")]
    UnreachableState(StateId),
}

/// A symmetric, irreflexive relation on events, stored as unordered pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndependenceRelation {
    pairs: BTreeSet<(EventId, EventId)>,
}

impl IndependenceRelation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `a` and `b` as independent. Rejects reflexive pairs.
    pub fn insert(&mut self, a: EventId, b: EventId) -> Result<(), SystemError> {
        if a == b {
            return Err(SystemError::ReflexiveIndependence(a));
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        self.pairs.insert(pair);
        Ok(())
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (EventId, EventId)>,
    ) -> Result<Self, SystemError> {
        let mut rel = Self::new();
        for (a, b) in pairs {
            rel.insert(a, b)?;
        }
        Ok(rel)
    }

    /// Symmetric lookup.
    pub fn contains(&self, a: &EventId, b: &EventId) -> bool {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.pairs.contains(&key)
    }

    /// The unordered pairs, each normalized so the smaller event comes first.
    pub fn pairs(&self) -> impl Iterator<Item = &(EventId, EventId)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Restriction to the given event set.
    pub fn restricted_to(&self, events: &BTreeSet<EventId>) -> Self {
        Self {
            pairs: self
                .pairs
                .iter()
                .filter(|(a, b)| events.contains(a) && events.contains(b))
                .cloned()
                .collect(),
        }
    }
}

/// An asynchronous transition system with a deterministic partial action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsyncSystem {
    states: BTreeSet<StateId>,
    initial: StateId,
    events: BTreeSet<EventId>,
    independence: IndependenceRelation,
    // state -> event -> successor; absence means the action is undefined
    transitions: BTreeMap<StateId, BTreeMap<EventId, StateId>>,
}

impl AsyncSystem {
    pub fn new(
        states: impl IntoIterator<Item = StateId>,
        initial: StateId,
        events: impl IntoIterator<Item = EventId>,
        independence: IndependenceRelation,
        transitions: impl IntoIterator<Item = (StateId, EventId, StateId)>,
    ) -> Result<Self, SystemError> {
        let states: BTreeSet<StateId> = states.into_iter().collect();
        let events: BTreeSet<EventId> = events.into_iter().collect();
        if !states.contains(&initial) {
            return Err(SystemError::UnknownInitial(initial));
        }
        for (a, b) in independence.pairs() {
            if !events.contains(a) || !events.contains(b) {
                return Err(SystemError::UnknownIndependenceEvent(a.clone(), b.clone()));
            }
        }
        let mut table: BTreeMap<StateId, BTreeMap<EventId, StateId>> = BTreeMap::new();
        for (from, event, to) in transitions {
            if !states.contains(&from) || !states.contains(&to) || !events.contains(&event) {
                return Err(SystemError::DanglingTransition(from, event, to));
            }
            let row = table.entry(from.clone()).or_default();
            match row.get(&event) {
                Some(prev) if *prev != to => {
                    return Err(SystemError::NondeterministicTransition(from, event))
                }
                _ => {
                    row.insert(event, to);
                }
            }
        }
        Ok(Self {
            states,
            initial,
            events,
            independence,
            transitions: table,
        })
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn events(&self) -> &BTreeSet<EventId> {
        &self.events
    }

    pub fn independence(&self) -> &IndependenceRelation {
        &self.independence
    }

    /// Successor of `state` under a single event, if defined.
    pub fn successor(&self, state: &StateId, event: &EventId) -> Option<&StateId> {
        self.transitions.get(state).and_then(|row| row.get(event))
    }

    /// Transitions leaving `state`, in event order.
    pub fn transitions_from(&self, state: &StateId) -> impl Iterator<Item = (&EventId, &StateId)> {
        self.transitions
            .get(state)
            .into_iter()
            .flat_map(|row| row.iter())
    }

    /// All transitions as (from, event, to), ordered by state then event.
    pub fn transitions(&self) -> impl Iterator<Item = (&StateId, &EventId, &StateId)> {
        self.transitions
            .iter()
            .flat_map(|(from, row)| row.iter().map(move |(e, to)| (from, e, to)))
    }

    /// Applies a word of events to a state. `Ok(None)` means the action is
    /// undefined along the word; unknown names are reported as errors instead.
    pub fn act(&self, from: &StateId, word: &[EventId]) -> Result<Option<StateId>, SystemError> {
        if !self.states.contains(from) {
            return Err(SystemError::UnknownState(from.clone()));
        }
        for event in word {
            if !self.events.contains(event) {
                return Err(SystemError::UnknownEvent(event.clone()));
            }
        }
        let mut current = from;
        for event in word {
            match self.successor(current, event) {
                Some(next) => current = next,
                None => return Ok(None),
            }
        }
        Ok(Some(current.clone()))
    }

    /// States reachable from `from` by any word, including `from` itself.
    pub fn reachable_set(&self, from: &StateId) -> Result<BTreeSet<StateId>, SystemError> {
        if !self.states.contains(from) {
            return Err(SystemError::UnknownState(from.clone()));
        }
        let mut seen: BTreeSet<StateId> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(from.clone());
        queue.push_back(from.clone());
        while let Some(state) = queue.pop_front() {
            for (_, to) in self.transitions_from(&state) {
                if seen.insert(to.clone()) {
                    queue.push_back(to.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Words of length exactly `k` may revisit states, so the layers are
    /// computed per length, each state paired with the lexicographically
    /// least witness word of that length. `max_len` defaults to the number
    /// of states.
    pub fn reachable_layers(
        &self,
        from: &StateId,
        max_len: Option<usize>,
    ) -> Result<ReachableLayers, SystemError> {
        if !self.states.contains(from) {
            return Err(SystemError::UnknownState(from.clone()));
        }
        let max_len = max_len.unwrap_or(self.states.len());
        let mut layers: Vec<BTreeMap<StateId, Vec<EventId>>> = Vec::with_capacity(max_len + 1);
        layers.push(BTreeMap::from([(from.clone(), Vec::new())]));
        for _ in 1..=max_len {
            let mut next: BTreeMap<StateId, Vec<EventId>> = BTreeMap::new();
            for (state, word) in layers.last().unwrap() {
                for (event, to) in self.transitions_from(state) {
                    let mut candidate = word.clone();
                    candidate.push(event.clone());
                    match next.get(to) {
                        Some(best) if *best <= candidate => {}
                        _ => {
                            next.insert(to.clone(), candidate);
                        }
                    }
                }
            }
            if next.is_empty() {
                break; // no words of this length at all, so none longer either
            }
            layers.push(next);
        }
        Ok(ReachableLayers { layers })
    }

    /// All tuples (s, e_1..e_n) with s reachable from the initial state, the
    /// events pairwise independent and the whole word defined at s. Tuples
    /// are ordered, so each executable independent set shows up once per
    /// admissible permutation.
    pub fn steps(&self, n: usize) -> Vec<StepTuple> {
        let reachable = self
            .reachable_set(&self.initial)
            .expect("initial state is always known");
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        for state in &reachable {
            self.extend_steps(state, state, &mut chosen, n, &mut out);
        }
        out
    }

    fn extend_steps(
        &self,
        base: &StateId,
        current: &StateId,
        chosen: &mut Vec<EventId>,
        n: usize,
        out: &mut Vec<StepTuple>,
    ) {
        if chosen.len() == n {
            out.push(StepTuple {
                state: base.clone(),
                events: chosen.clone(),
            });
            return;
        }
        for (event, to) in self.transitions_from(current) {
            if chosen.iter().all(|p| self.independence.contains(p, event)) {
                chosen.push(event.clone());
                self.extend_steps(base, to, chosen, n, out);
                chosen.pop();
            }
        }
    }

    /// Checks the diamond completion axiom and occurrence of every event.
    ///
    /// Referential shape is already enforced by the constructor; it is
    /// scanned once more here so that a clean report is complete evidence by
    /// itself.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if !self.states.contains(&self.initial) {
            violations.push(Violation::InitialMissing {
                state: self.initial.clone(),
            });
        }
        for (a, b) in self.independence.pairs() {
            if a == b {
                violations.push(Violation::ReflexiveIndependence { event: a.clone() });
            }
            if !self.events.contains(a) || !self.events.contains(b) {
                violations.push(Violation::IndependenceOutsideEvents {
                    first: a.clone(),
                    second: b.clone(),
                });
            }
        }
        for state in &self.states {
            for (a, b) in self.independence.pairs() {
                for (first, second) in [(a, b), (b, a)] {
                    let Some(mid) = self.successor(state, first) else {
                        continue;
                    };
                    let Some(end) = self.successor(mid, second) else {
                        continue;
                    };
                    let completed = self
                        .successor(state, second)
                        .and_then(|other| self.successor(other, first));
                    if completed != Some(end) {
                        violations.push(Violation::DiamondFailure {
                            state: state.clone(),
                            first: first.clone(),
                            second: second.clone(),
                        });
                    }
                }
            }
        }
        let mut occurring: BTreeSet<&EventId> = BTreeSet::new();
        for (_, event, _) in self.transitions() {
            occurring.insert(event);
        }
        for event in &self.events {
            if !occurring.contains(event) {
                violations.push(Violation::EventNeverOccurs {
                    event: event.clone(),
                });
            }
        }
        ValidationReport { violations }
    }
}

/// A reachable state together with a word of pairwise independent events
/// that is defined there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepTuple {
    pub state: StateId,
    pub events: Vec<EventId>,
}

impl fmt::Display for StepTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.state)?;
        for e in &self.events {
            write!(f, ", {e}")?;
        }
        write!(f, ")")
    }
}

/// States indexed by the exact word length needed to reach them.
#[derive(Debug, Clone)]
pub struct ReachableLayers {
    // layer k maps each state reachable by a length-k word to the
    // lexicographically least such word
    layers: Vec<BTreeMap<StateId, Vec<EventId>>>,
}

impl ReachableLayers {
    /// Number of computed layers (lengths 0..len-1); higher layers are empty.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// States reachable by a word of length exactly `k`.
    pub fn layer(&self, k: usize) -> impl Iterator<Item = &StateId> {
        self.layers.get(k).into_iter().flat_map(|m| m.keys())
    }

    /// The lexicographically least word of length `k` reaching `state`.
    pub fn witness(&self, k: usize, state: &StateId) -> Option<&[EventId]> {
        self.layers
            .get(k)
            .and_then(|m| m.get(state))
            .map(|w| w.as_slice())
    }

    /// Union of all computed layers.
    pub fn union(&self) -> BTreeSet<StateId> {
        self.layers.iter().flat_map(|m| m.keys().cloned()).collect()
    }
}

/// One axiom violation found by [`AsyncSystem::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// (first, second) are independent, `state . first . second` is defined,
    /// but the completion through `state . second` is missing or lands wrong.
    DiamondFailure {
        state: StateId,
        first: EventId,
        second: EventId,
    },
    EventNeverOccurs {
        event: EventId,
    },
    ReflexiveIndependence {
        event: EventId,
    },
    IndependenceOutsideEvents {
        first: EventId,
        second: EventId,
    },
    InitialMissing {
        state: StateId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DiamondFailure {
                state,
                first,
                second,
            } => write!(
                f,
                "diamond violation at ({state}, {first}, {second}): no matching completion via {second} then {first}"
            ),
            Violation::EventNeverOccurs { event } => {
                write!(f, "event `{event}` has no transition")
            }
            Violation::ReflexiveIndependence { event } => {
                write!(f, "event `{event}` is declared independent of itself")
            }
            Violation::IndependenceOutsideEvents { first, second } => {
                write!(f, "independence pair ({first}, {second}) mentions unknown events")
            }
            Violation::InitialMissing { state } => {
                write!(f, "initial state `{state}` is missing from the state set")
            }
        }
    }
}

/// Outcome of [`AsyncSystem::validate`]: empty means the system satisfies
/// the asynchronous transition system axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid: all axioms hold")
        } else {
            writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

/// An asynchronous transition system with an event labelling into a fixed
/// alphabet. The alphabet may be larger than the label image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledAsyncSystem {
    system: AsyncSystem,
    labels: BTreeMap<EventId, Label>,
    alphabet: BTreeSet<Label>,
}

impl LabelledAsyncSystem {
    /// Wraps a system with a total labelling. When `alphabet` is `None` it
    /// defaults to the image of the labelling.
    pub fn new(
        system: AsyncSystem,
        labels: BTreeMap<EventId, Label>,
        alphabet: Option<BTreeSet<Label>>,
    ) -> Result<Self, SystemError> {
        for event in labels.keys() {
            if !system.events().contains(event) {
                return Err(SystemError::LabelForUnknownEvent(event.clone()));
            }
        }
        for event in system.events() {
            if !labels.contains_key(event) {
                return Err(SystemError::MissingLabel(event.clone()));
            }
        }
        let image: BTreeSet<Label> = labels.values().cloned().collect();
        let alphabet = match alphabet {
            Some(alphabet) => {
                for event in system.events() {
                    let label = &labels[event];
                    if !alphabet.contains(label) {
                        return Err(SystemError::LabelOutsideAlphabet(
                            label.clone(),
                            event.clone(),
                        ));
                    }
                }
                alphabet
            }
            None => image,
        };
        Ok(Self {
            system,
            labels,
            alphabet,
        })
    }

    pub fn system(&self) -> &AsyncSystem {
        &self.system
    }

    pub fn labels(&self) -> &BTreeMap<EventId, Label> {
        &self.labels
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        &self.alphabet
    }

    pub fn label(&self, event: &EventId) -> &Label {
        &self.labels[event]
    }

    /// The system re-based at a reachable state `s`: states are those
    /// reachable from `s`, events that no longer occur are dropped together
    /// with their labels, and the alphabet is kept so that residuals of
    /// systems over one alphabet stay comparable.
    pub fn residual(&self, state: &StateId) -> Result<LabelledAsyncSystem, SystemError> {
        if !self.system.states().contains(state) {
            return Err(SystemError::UnknownState(state.clone()));
        }
        let from_initial = self.system.reachable_set(self.system.initial())?;
        if !from_initial.contains(state) {
            return Err(SystemError::UnreachableState(state.clone()));
        }
        let states = self.system.reachable_set(state)?;
        let transitions: Vec<(StateId, EventId, StateId)> = self
            .system
            .transitions()
            .filter(|(from, _, _)| states.contains(*from))
            .map(|(from, event, to)| (from.clone(), event.clone(), to.clone()))
            .collect();
        let events: BTreeSet<EventId> = transitions.iter().map(|(_, e, _)| e.clone()).collect();
        let independence = self.system.independence().restricted_to(&events);
        let labels: BTreeMap<EventId, Label> = self
            .labels
            .iter()
            .filter(|(e, _)| events.contains(*e))
            .map(|(e, l)| (e.clone(), l.clone()))
            .collect();
        let system = AsyncSystem::new(states, state.clone(), events, independence, transitions)?;
        LabelledAsyncSystem::new(system, labels, Some(self.alphabet.clone()))
    }

    /// Labels of events enabled at some reachable state.
    pub fn active_labels(&self) -> BTreeSet<Label> {
        let reachable = self
            .system
            .reachable_set(self.system.initial())
            .expect("initial state is always known");
        let mut labels = BTreeSet::new();
        for state in &reachable {
            for (event, _) in self.system.transitions_from(state) {
                labels.insert(self.labels[event].clone());
            }
        }
        labels
    }
}
