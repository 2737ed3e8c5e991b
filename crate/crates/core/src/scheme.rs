//! Finite simplicial schemes: downward closed families of nonempty finite
//! vertex sets, together with the two constructions used throughout the
//! crate, the scheme spanned by a system's independence structure and the
//! barycentric subdivision.

use crate::ident::{EventId, Label, StateId};
use crate::lts::LabelledAsyncSystem;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("simplex mentions undeclared vertex `{0}`")]
    UnknownVertex(Label),
    #[error("simplices must be nonempty")]
    EmptySimplex,
}

/// A simplicial scheme. Simplices are stored as strictly increasing vertex
/// lists; the family is downward closed and contains a singleton for every
/// vertex, including isolated ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplicialScheme {
    vertices: BTreeSet<Label>,
    simplices: BTreeSet<Vec<Label>>,
}

impl SimplicialScheme {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the scheme generated by `facets`: their downward closure plus
    /// a singleton per declared vertex.
    pub fn from_facets(
        vertices: impl IntoIterator<Item = Label>,
        facets: impl IntoIterator<Item = BTreeSet<Label>>,
    ) -> Result<Self, SchemeError> {
        let vertices: BTreeSet<Label> = vertices.into_iter().collect();
        let mut simplices: BTreeSet<Vec<Label>> = BTreeSet::new();
        for facet in facets {
            if facet.is_empty() {
                return Err(SchemeError::EmptySimplex);
            }
            for v in &facet {
                if !vertices.contains(v) {
                    return Err(SchemeError::UnknownVertex(v.clone()));
                }
            }
            insert_with_faces(&mut simplices, &facet);
        }
        for v in &vertices {
            simplices.insert(vec![v.clone()]);
        }
        Ok(Self {
            vertices,
            simplices,
        })
    }

    pub fn vertices(&self) -> &BTreeSet<Label> {
        &self.vertices
    }

    /// All simplices, lexicographically ordered (shorter prefixes first).
    pub fn simplices(&self) -> impl Iterator<Item = &Vec<Label>> {
        self.simplices.iter()
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    pub fn contains(&self, simplex: &[Label]) -> bool {
        self.simplices.contains(simplex)
    }

    /// Largest simplex dimension, or `None` for the empty scheme.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }

    /// The simplices with exactly `len` vertices, each as an increasing
    /// tuple, in lexicographic order.
    pub fn simplices_with_len(&self, len: usize) -> Vec<&[Label]> {
        self.simplices
            .iter()
            .filter(|s| s.len() == len)
            .map(|s| s.as_slice())
            .collect()
    }

    /// The inclusion-maximal simplices.
    pub fn facets(&self) -> Vec<&[Label]> {
        self.simplices
            .iter()
            .filter(|s| {
                !self
                    .simplices
                    .iter()
                    .any(|t| t.len() > s.len() && is_subset(s, t))
            })
            .map(|s| s.as_slice())
            .collect()
    }
}

fn insert_with_faces(family: &mut BTreeSet<Vec<Label>>, simplex: &BTreeSet<Label>) {
    let elements: Vec<Label> = simplex.iter().cloned().collect();
    // all nonempty subsets, via the bit patterns of the element list
    let n = elements.len();
    for mask in 1u64..(1 << n) {
        let face: Vec<Label> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| elements[i].clone())
            .collect();
        family.insert(face);
    }
}

pub(crate) fn is_subset(small: &[Label], big: &[Label]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

/// The simplicial scheme of a labelled system: vertices are labels of events
/// enabled somewhere reachable, and a label set is a simplex when some
/// reachable state executes a word of pairwise independent events carrying
/// those labels.
///
/// The system must satisfy the asynchronous axioms (check with
/// [`crate::lts::AsyncSystem::validate`] first); the diamond property is
/// what lets the search consider each independent event set in a single
/// order.
pub fn scheme_of_system(labelled: &LabelledAsyncSystem) -> SimplicialScheme {
    let system = labelled.system();
    let reachable = system
        .reachable_set(system.initial())
        .expect("initial state is always known");
    let mut collected: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    let mut chosen: Vec<EventId> = Vec::new();
    for state in &reachable {
        collect_independent_sets(labelled, state, &mut chosen, &mut collected);
    }
    let vertices = labelled.active_labels();
    SimplicialScheme::from_facets(vertices, collected)
        .expect("labels of collected steps are active by construction")
}

fn collect_independent_sets(
    labelled: &LabelledAsyncSystem,
    current: &StateId,
    chosen: &mut Vec<EventId>,
    out: &mut BTreeSet<BTreeSet<Label>>,
) {
    let system = labelled.system();
    for (event, to) in system.transitions_from(current) {
        // grow strictly, so each event set is visited exactly once
        if let Some(last) = chosen.last() {
            if event <= last {
                continue;
            }
        }
        if !chosen
            .iter()
            .all(|p| system.independence().contains(p, event))
        {
            continue;
        }
        chosen.push(event.clone());
        out.insert(chosen.iter().map(|e| labelled.label(e).clone()).collect());
        collect_independent_sets(labelled, to, chosen, out);
        chosen.pop();
    }
}

/// The barycentric subdivision: one vertex per simplex, named by the sorted
/// vertex list it stands for, and one simplex per chain of strict
/// inclusions.
pub fn barycentric_subdivision(scheme: &SimplicialScheme) -> SimplicialScheme {
    let simplices: Vec<&Vec<Label>> = scheme.simplices().collect();
    let names: Vec<Label> = simplices.iter().map(|s| chain_vertex_name(s)).collect();
    let name_set: BTreeSet<Label> = names.iter().cloned().collect();
    let mut chains: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..simplices.len() {
        stack.push(start);
        collect_chains(&simplices, &names, &mut stack, &mut chains);
        stack.pop();
    }
    SimplicialScheme::from_facets(name_set, chains)
        .expect("chain vertices are exactly the declared names")
}

fn collect_chains(
    simplices: &[&Vec<Label>],
    names: &[Label],
    stack: &mut Vec<usize>,
    out: &mut BTreeSet<BTreeSet<Label>>,
) {
    out.insert(stack.iter().map(|&i| names[i].clone()).collect());
    let top = *stack.last().unwrap();
    for next in 0..simplices.len() {
        if simplices[next].len() > simplices[top].len()
            && is_subset(simplices[top], simplices[next])
        {
            stack.push(next);
            collect_chains(simplices, names, stack, out);
            stack.pop();
        }
    }
}

/// Canonical subdivision vertex name for a simplex, e.g. `{a,b}`.
pub fn chain_vertex_name(simplex: &[Label]) -> Label {
    let mut out = String::from("{");
    for (i, v) in simplex.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(v.as_str());
    }
    out.push('}');
    Label::new(out)
}
