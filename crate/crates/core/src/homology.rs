//! Integer homology of simplicial schemes, computed from boundary matrices
//! over the ordered simplex bases via Smith normal form.

use crate::ident::Label;
use crate::petri::{LabelledPetriNet, Limits, NetError};
use crate::scheme::{scheme_of_system, SimplicialScheme};
use crate::snf::{smith_normal_form, IntegerMatrix};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt;

/// The matrix of the boundary operator in the given degree (at least 1):
/// columns are the simplices with `degree + 1` vertices, rows those with
/// `degree`, both in lexicographic order. Deleting the `i`-th vertex of a
/// column's simplex contributes `(-1)^i` in the row of the resulting face.
pub fn boundary_matrix(scheme: &SimplicialScheme, degree: usize) -> IntegerMatrix {
    assert!(degree >= 1, "the boundary operator starts in degree 1");
    let rows = scheme.simplices_with_len(degree);
    let cols = scheme.simplices_with_len(degree + 1);
    let row_index: BTreeMap<&[Label], usize> =
        rows.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut matrix = IntegerMatrix::zero(rows.len(), cols.len());
    let mut face = Vec::with_capacity(degree);
    for (j, simplex) in cols.iter().enumerate() {
        for omit in 0..simplex.len() {
            face.clear();
            face.extend_from_slice(&simplex[..omit]);
            face.extend_from_slice(&simplex[omit + 1..]);
            let i = row_index[face.as_slice()];
            let sign = if omit % 2 == 0 { 1 } else { -1 };
            matrix.set(i, j, BigInt::from(sign));
        }
    }
    matrix
}

/// One homology group: a free rank and the nontrivial cyclic orders, the
/// latter sorted and each dividing the next.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn new(betti: usize, torsion: Vec<BigInt>) -> Self {
        HomologyGroup { betti, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".into()),
            k => parts.push(format!("Z^{k}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// The homology groups of a scheme, degree by degree, with trailing trivial
/// groups trimmed so that equal signatures compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HomologySignature {
    groups: Vec<HomologyGroup>,
}

impl HomologySignature {
    pub fn trivial() -> Self {
        Self::default()
    }

    fn from_groups(mut groups: Vec<HomologyGroup>) -> Self {
        while groups.last().is_some_and(HomologyGroup::is_trivial) {
            groups.pop();
        }
        Self { groups }
    }

    /// The stored groups; degrees past the end are trivial.
    pub fn groups(&self) -> &[HomologyGroup] {
        &self.groups
    }

    pub fn group(&self, degree: usize) -> HomologyGroup {
        self.groups.get(degree).cloned().unwrap_or_default()
    }

    pub fn is_trivial(&self) -> bool {
        self.groups.is_empty()
    }
}

impl fmt::Display for HomologySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return write!(f, "trivial");
        }
        for (degree, group) in self.groups.iter().enumerate() {
            if degree > 0 {
                writeln!(f)?;
            }
            write!(f, "H_{degree} = {group}")?;
        }
        Ok(())
    }
}

/// Homology of a scheme. In each degree the free rank is the simplex count
/// minus the ranks of the two adjacent boundary matrices (the operator out
/// of degree 0 is zero), and the torsion is the set of nontrivial invariant
/// factors of the boundary matrix arriving from one degree higher.
pub fn homology(scheme: &SimplicialScheme) -> HomologySignature {
    let Some(dimension) = scheme.dimension() else {
        return HomologySignature::trivial();
    };
    let forms: Vec<_> = (1..=dimension)
        .map(|n| smith_normal_form(&boundary_matrix(scheme, n)))
        .collect();
    let rank = |n: usize| {
        if n == 0 || n > dimension {
            0
        } else {
            forms[n - 1].rank()
        }
    };
    let groups = (0..=dimension)
        .map(|n| {
            let simplices = scheme.simplices_with_len(n + 1).len();
            let betti = simplices - rank(n) - rank(n + 1);
            let torsion = if n < dimension {
                forms[n].torsion_factors()
            } else {
                Vec::new()
            };
            HomologyGroup { betti, torsion }
        })
        .collect();
    HomologySignature::from_groups(groups)
}

/// Homology of a net: expand the reachable markings, derive the scheme of
/// the resulting system, and compute its homology.
pub fn homology_of_net(
    net: &LabelledPetriNet,
    limits: &Limits,
) -> Result<HomologySignature, NetError> {
    let expansion = net.expand(limits)?;
    Ok(homology(&scheme_of_system(&expansion.system)))
}
