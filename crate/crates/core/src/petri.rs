//! Petri nets under the token game, their derived independence relation,
//! and the bounded expansion into an asynchronous transition system.

use crate::ident::{EventId, Label, PlaceId, StateId};
use crate::lts::{AsyncSystem, IndependenceRelation, LabelledAsyncSystem, SystemError};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown place `{0}`")]
    UnknownPlace(PlaceId),
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("marking is not over this net's places")]
    MarkingMismatch,
    #[error("event `{event}` is not enabled at {marking}")]
    NotEnabled { event: EventId, marking: Marking },
    #[error("state limit {limit} exceeded while adding {marking}")]
    StateLimitExceeded { limit: usize, marking: Marking },
    #[error("token limit {limit} exceeded at place `{place}` in {marking}")]
    TokenLimitExceeded {
        limit: u64,
        place: PlaceId,
        marking: Marking,
    },
    #[error("event `{0}` has no label")]
    MissingLabel(EventId),
    #[error("label map mentions unknown event `{0}`")]
    LabelForUnknownEvent(EventId),
    #[error("label `{0}` of event `{1}` is not in the declared alphabet")]
    LabelOutsideAlphabet(Label, EventId),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// A token count for every place of the net that produced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Marking {
    counts: BTreeMap<PlaceId, u64>,
}

impl Marking {
    pub fn get(&self, place: &PlaceId) -> u64 {
        self.counts.get(place).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlaceId, u64)> {
        self.counts.iter().map(|(p, &c)| (p, c))
    }

    /// Pointwise greater-or-equal.
    pub fn dominates(&self, other: &Marking) -> bool {
        other.counts.iter().all(|(p, &c)| self.get(p) >= c)
    }

    /// Whether the token vectors have disjoint support; for non-negative
    /// vectors this is exactly a zero scalar product.
    pub fn orthogonal(&self, other: &Marking) -> bool {
        self.counts
            .iter()
            .all(|(p, &c)| c == 0 || other.get(p) == 0)
    }

    fn sum(&self, other: &Marking) -> Marking {
        let counts = self
            .counts
            .iter()
            .map(|(p, &c)| (p.clone(), c + other.get(p)))
            .collect();
        Marking { counts }
    }

    /// Identifier used for this marking as a state of the expanded system:
    /// the token counts in place order, joined as decimal text.
    pub fn state_id(&self) -> StateId {
        let encoded: Vec<String> = self.counts.values().map(|c| c.to_string()).collect();
        StateId::new(encoded.join(","))
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (place, count)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{place}: {count}")?;
        }
        write!(f, ")")
    }
}

/// A place/transition net with explicit pre and post token vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: BTreeSet<PlaceId>,
    events: BTreeSet<EventId>,
    pre: BTreeMap<EventId, Marking>,
    post: BTreeMap<EventId, Marking>,
    initial: Marking,
}

impl PetriNet {
    /// Builds a net. The token vectors may omit places (count zero) and
    /// whole events (all-zero vector), but must not mention unknown names.
    pub fn new(
        places: impl IntoIterator<Item = PlaceId>,
        events: impl IntoIterator<Item = EventId>,
        pre: BTreeMap<EventId, BTreeMap<PlaceId, u64>>,
        post: BTreeMap<EventId, BTreeMap<PlaceId, u64>>,
        initial: BTreeMap<PlaceId, u64>,
    ) -> Result<Self, NetError> {
        let places: BTreeSet<PlaceId> = places.into_iter().collect();
        let events: BTreeSet<EventId> = events.into_iter().collect();
        let complete = |vectors: BTreeMap<EventId, BTreeMap<PlaceId, u64>>| -> Result<_, NetError> {
            for event in vectors.keys() {
                if !events.contains(event) {
                    return Err(NetError::UnknownEvent(event.clone()));
                }
            }
            events
                .iter()
                .map(|event| {
                    let counts = vectors.get(event).cloned().unwrap_or_default();
                    Ok((event.clone(), total_marking(&places, counts)?))
                })
                .collect::<Result<BTreeMap<EventId, Marking>, NetError>>()
        };
        let pre = complete(pre)?;
        let post = complete(post)?;
        let initial = total_marking(&places, initial)?;
        Ok(Self {
            places,
            events,
            pre,
            post,
            initial,
        })
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    pub fn events(&self) -> &BTreeSet<EventId> {
        &self.events
    }

    pub fn pre(&self, event: &EventId) -> Result<&Marking, NetError> {
        self.pre
            .get(event)
            .ok_or_else(|| NetError::UnknownEvent(event.clone()))
    }

    pub fn post(&self, event: &EventId) -> Result<&Marking, NetError> {
        self.post
            .get(event)
            .ok_or_else(|| NetError::UnknownEvent(event.clone()))
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    /// A total marking of this net from possibly partial counts.
    pub fn marking(&self, counts: BTreeMap<PlaceId, u64>) -> Result<Marking, NetError> {
        total_marking(&self.places, counts)
    }

    /// Events whose pre vector is dominated by `marking`.
    pub fn enabled(&self, marking: &Marking) -> Result<BTreeSet<EventId>, NetError> {
        self.check_marking(marking)?;
        Ok(self
            .events
            .iter()
            .filter(|e| marking.dominates(&self.pre[*e]))
            .cloned()
            .collect())
    }

    /// Fires `event`: the new marking is `marking - pre(event) + post(event)`.
    pub fn fire(&self, marking: &Marking, event: &EventId) -> Result<Marking, NetError> {
        self.check_marking(marking)?;
        let pre = self.pre(event)?;
        let post = self.post(event)?;
        if !marking.dominates(pre) {
            return Err(NetError::NotEnabled {
                event: event.clone(),
                marking: marking.clone(),
            });
        }
        let counts = marking
            .counts
            .iter()
            .map(|(p, &c)| (p.clone(), c - pre.get(p) + post.get(p)))
            .collect();
        Ok(Marking { counts })
    }

    /// Two events are independent when the scalar product of their combined
    /// pre+post token vectors is zero, i.e. they touch disjoint places.
    pub fn independence(&self) -> IndependenceRelation {
        let combined: BTreeMap<&EventId, Marking> = self
            .events
            .iter()
            .map(|e| (e, self.pre[e].sum(&self.post[e])))
            .collect();
        let mut relation = IndependenceRelation::new();
        let events: Vec<&EventId> = self.events.iter().collect();
        for (i, a) in events.iter().enumerate() {
            for b in &events[i + 1..] {
                if combined[*a].orthogonal(&combined[*b]) {
                    relation
                        .insert((*a).clone(), (*b).clone())
                        .expect("distinct events");
                }
            }
        }
        relation
    }

    fn check_marking(&self, marking: &Marking) -> Result<(), NetError> {
        if marking.counts.len() != self.places.len()
            || !marking.counts.keys().eq(self.places.iter())
        {
            return Err(NetError::MarkingMismatch);
        }
        Ok(())
    }
}

fn total_marking(
    places: &BTreeSet<PlaceId>,
    counts: BTreeMap<PlaceId, u64>,
) -> Result<Marking, NetError> {
    for place in counts.keys() {
        if !places.contains(place) {
            return Err(NetError::UnknownPlace(place.clone()));
        }
    }
    let counts = places
        .iter()
        .map(|p| (p.clone(), counts.get(p).copied().unwrap_or(0)))
        .collect();
    Ok(Marking { counts })
}

/// Exploration bounds for the reachable-marking expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_tokens: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_states: 100_000,
            max_tokens: 64,
        }
    }
}

/// The asynchronous system of a labelled net, together with the events that
/// never became enabled and were therefore dropped.
#[derive(Debug, Clone)]
pub struct NetExpansion {
    pub system: LabelledAsyncSystem,
    pub dropped_events: Vec<EventId>,
}

/// A Petri net with labelled events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledPetriNet {
    net: PetriNet,
    labels: BTreeMap<EventId, Label>,
    alphabet: BTreeSet<Label>,
}

impl LabelledPetriNet {
    pub fn new(
        net: PetriNet,
        labels: BTreeMap<EventId, Label>,
        alphabet: Option<BTreeSet<Label>>,
    ) -> Result<Self, NetError> {
        for event in labels.keys() {
            if !net.events().contains(event) {
                return Err(NetError::LabelForUnknownEvent(event.clone()));
            }
        }
        for event in net.events() {
            if !labels.contains_key(event) {
                return Err(NetError::MissingLabel(event.clone()));
            }
        }
        let image: BTreeSet<Label> = labels.values().cloned().collect();
        let alphabet = match alphabet {
            Some(alphabet) => {
                for event in net.events() {
                    let label = &labels[event];
                    if !alphabet.contains(label) {
                        return Err(NetError::LabelOutsideAlphabet(label.clone(), event.clone()));
                    }
                }
                alphabet
            }
            None => image,
        };
        Ok(Self {
            net,
            labels,
            alphabet,
        })
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn labels(&self) -> &BTreeMap<EventId, Label> {
        &self.labels
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        &self.alphabet
    }

    /// Breadth-first expansion of the reachable markings into a labelled
    /// asynchronous system. States are markings (encoded by their token
    /// counts in place order), events keep their identity and labels, and
    /// independence is the net's relation restricted to the events that
    /// actually occur. Exploration refuses to cross either limit rather
    /// than returning a silently truncated system.
    pub fn expand(&self, limits: &Limits) -> Result<NetExpansion, NetError> {
        let initial = self.net.initial_marking().clone();
        check_tokens(&initial, limits)?;
        let mut markings: BTreeSet<Marking> = BTreeSet::from([initial.clone()]);
        let mut queue: VecDeque<Marking> = VecDeque::from([initial.clone()]);
        let mut transitions: Vec<(StateId, EventId, StateId)> = Vec::new();
        while let Some(marking) = queue.pop_front() {
            for event in self.net.enabled(&marking)? {
                let next = self.net.fire(&marking, &event)?;
                transitions.push((marking.state_id(), event, next.state_id()));
                if !markings.contains(&next) {
                    check_tokens(&next, limits)?;
                    if markings.len() == limits.max_states {
                        return Err(NetError::StateLimitExceeded {
                            limit: limits.max_states,
                            marking: next,
                        });
                    }
                    markings.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
        let occurring: BTreeSet<EventId> = transitions.iter().map(|(_, e, _)| e.clone()).collect();
        let dropped_events: Vec<EventId> = self
            .net
            .events()
            .iter()
            .filter(|e| !occurring.contains(*e))
            .cloned()
            .collect();
        let independence = self.net.independence().restricted_to(&occurring);
        let states: BTreeSet<StateId> = markings.iter().map(Marking::state_id).collect();
        let system = AsyncSystem::new(
            states,
            initial.state_id(),
            occurring.clone(),
            independence,
            transitions,
        )?;
        let labels: BTreeMap<EventId, Label> = self
            .labels
            .iter()
            .filter(|(e, _)| occurring.contains(*e))
            .map(|(e, l)| (e.clone(), l.clone()))
            .collect();
        let system = LabelledAsyncSystem::new(system, labels, Some(self.alphabet.clone()))?;
        Ok(NetExpansion {
            system,
            dropped_events,
        })
    }
}

fn check_tokens(marking: &Marking, limits: &Limits) -> Result<(), NetError> {
    for (place, count) in marking.iter() {
        if count > limits.max_tokens {
            return Err(NetError::TokenLimitExceeded {
                limit: limits.max_tokens,
                place: place.clone(),
                marking: marking.clone(),
            });
        }
    }
    Ok(())
}
