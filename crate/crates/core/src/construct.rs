//! Building a labelled Petri net that realizes a scheme's homology, plus
//! the fixture schemes used to exercise it.
//!
//! The net has one event and one private place per vertex of the scheme's
//! barycentric subdivision (each event consumes its own place once, so it
//! fires at most once), and one shared conflict place per incomparable pair
//! of subdivision vertices, consumed by both events of the pair. Disjoint
//! pre sets then make exactly the comparable pairs independent, and the
//! jointly fireable event sets are exactly the inclusion chains, so the
//! expanded system's scheme is the subdivision itself.

use crate::homology::{homology, homology_of_net, HomologySignature};
use crate::ident::{EventId, Label, PlaceId};
use crate::petri::{LabelledPetriNet, Limits, NetError, PetriNet};
use crate::scheme::{
    barycentric_subdivision, chain_vertex_name, is_subset, SchemeError, SimplicialScheme,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("cannot build a net from the empty scheme")]
    EmptyScheme,
    #[error("bad fixture expression `{expr}`: {message}")]
    BadFixture { expr: String, message: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// The conflict gadget: a place consumed by both events of an incomparable
/// pair, so at most one of them ever fires.
fn conflict_place(a: &Label, b: &Label) -> PlaceId {
    let (first, second) = if a <= b { (a, b) } else { (b, a) };
    PlaceId::new(format!("{first}|{second}"))
}

/// One event and one private place per simplex of `scheme`, one conflict
/// place per pair of incomparable simplices, every place initially marked
/// with a single token, and identity labels.
pub fn net_from_scheme(scheme: &SimplicialScheme) -> Result<LabelledPetriNet, ConstructError> {
    if scheme.simplex_count() == 0 {
        return Err(ConstructError::EmptyScheme);
    }
    let simplices: Vec<&Vec<Label>> = scheme.simplices().collect();
    let names: Vec<Label> = simplices.iter().map(|s| chain_vertex_name(s)).collect();
    let mut places: BTreeSet<PlaceId> = names.iter().map(|n| PlaceId::new(n.as_str())).collect();
    let events: Vec<EventId> = names.iter().map(|n| EventId::new(n.as_str())).collect();
    let mut pre: BTreeMap<EventId, BTreeMap<PlaceId, u64>> = names
        .iter()
        .zip(&events)
        .map(|(name, event)| {
            (
                event.clone(),
                BTreeMap::from([(PlaceId::new(name.as_str()), 1)]),
            )
        })
        .collect();
    for i in 0..simplices.len() {
        for j in (i + 1)..simplices.len() {
            if is_subset(simplices[i], simplices[j]) || is_subset(simplices[j], simplices[i]) {
                continue;
            }
            let shared = conflict_place(&names[i], &names[j]);
            assert!(
                places.insert(shared.clone()),
                "conflict place `{shared}` collides with an existing place"
            );
            pre.get_mut(&events[i]).unwrap().insert(shared.clone(), 1);
            pre.get_mut(&events[j]).unwrap().insert(shared, 1);
        }
    }
    let initial: BTreeMap<PlaceId, u64> = places.iter().map(|p| (p.clone(), 1)).collect();
    let net = PetriNet::new(
        places,
        events.iter().cloned().collect::<BTreeSet<_>>(),
        pre,
        BTreeMap::new(),
        initial,
    )?;
    let labels = events
        .iter()
        .map(|e| (e.clone(), Label::new(e.as_str())))
        .collect();
    Ok(LabelledPetriNet::new(net, labels, None)?)
}

/// The three homology signatures the realization is judged by: they must
/// all agree, since subdivision preserves homology and the net's expanded
/// system has the subdivision as its scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionCheck {
    pub scheme_signature: HomologySignature,
    pub subdivision_signature: HomologySignature,
    pub net_signature: HomologySignature,
}

impl ConstructionCheck {
    pub fn agrees(&self) -> bool {
        self.scheme_signature == self.subdivision_signature
            && self.subdivision_signature == self.net_signature
    }
}

/// Runs the full pipeline: homology of the scheme, of its barycentric
/// subdivision, and of the net built from the scheme.
pub fn verify_construction(
    scheme: &SimplicialScheme,
    limits: &Limits,
) -> Result<ConstructionCheck, ConstructError> {
    let net = net_from_scheme(scheme)?;
    Ok(ConstructionCheck {
        scheme_signature: homology(scheme),
        subdivision_signature: homology(&barycentric_subdivision(scheme)),
        net_signature: homology_of_net(&net, limits)?,
    })
}

/// A generator expression for the shipped example schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixtureExpr {
    /// `sphere:n`, the boundary of the (n+1)-simplex.
    Sphere(usize),
    /// `rp2`, the six-vertex triangulation of the projective plane.
    ProjectivePlane,
    /// `wedge(...)`, components glued at one point.
    Wedge(Vec<FixtureExpr>),
    /// `union(...)`, disjoint components.
    Union(Vec<FixtureExpr>),
}

impl fmt::Display for FixtureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureExpr::Sphere(n) => write!(f, "sphere:{n}"),
            FixtureExpr::ProjectivePlane => write!(f, "rp2"),
            FixtureExpr::Wedge(parts) | FixtureExpr::Union(parts) => {
                let keyword = if matches!(self, FixtureExpr::Wedge(_)) {
                    "wedge"
                } else {
                    "union"
                };
                write!(f, "{keyword}(")?;
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{part}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for FixtureExpr {
    type Err = ConstructError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = ExprParser { text: s, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.fail("unexpected trailing input"));
        }
        Ok(expr)
    }
}

struct ExprParser<'a> {
    text: &'a str,
    pos: usize,
}

impl ExprParser<'_> {
    fn fail(&self, message: impl Into<String>) -> ConstructError {
        ConstructError::BadFixture {
            expr: self.text.to_string(),
            message: message.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        self.pos += self.rest().len() - self.rest().trim_start().len();
    }

    fn eat(&mut self, token: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let end = self
            .rest()
            .find(|c: char| !c.is_ascii_alphanumeric())
            .unwrap_or(self.rest().len());
        let word = self.text[self.pos..self.pos + end].to_string();
        self.pos += end;
        word
    }

    fn expr(&mut self) -> Result<FixtureExpr, ConstructError> {
        match self.word().as_str() {
            "sphere" => {
                if !self.eat(':') {
                    return Err(self.fail("expected `:` after `sphere`"));
                }
                let n: usize = self
                    .word()
                    .parse()
                    .map_err(|_| self.fail("expected a dimension after `sphere:`"))?;
                if n == 0 {
                    return Err(self.fail("sphere dimension must be at least 1"));
                }
                Ok(FixtureExpr::Sphere(n))
            }
            "rp2" => Ok(FixtureExpr::ProjectivePlane),
            keyword @ ("wedge" | "union") => {
                let wedge = keyword == "wedge";
                if !self.eat('(') {
                    return Err(self.fail(format!("expected `(` after `{keyword}`")));
                }
                let mut parts = vec![self.expr()?];
                while self.eat(',') {
                    parts.push(self.expr()?);
                }
                if !self.eat(')') {
                    return Err(self.fail("expected `)`"));
                }
                Ok(if wedge {
                    FixtureExpr::Wedge(parts)
                } else {
                    FixtureExpr::Union(parts)
                })
            }
            "" => Err(self.fail("expected a fixture expression")),
            other => Err(self.fail(format!(
                "unknown fixture `{other}` (try sphere:n, rp2, wedge(...), union(...))"
            ))),
        }
    }
}

/// Builds the scheme a fixture expression describes.
pub fn fixture_scheme(expr: &FixtureExpr) -> SimplicialScheme {
    match expr {
        FixtureExpr::Sphere(n) => sphere(*n),
        FixtureExpr::ProjectivePlane => projective_plane(),
        FixtureExpr::Wedge(parts) => glue(parts, true),
        FixtureExpr::Union(parts) => glue(parts, false),
    }
}

/// Boundary of the (n+1)-simplex: all proper nonempty subsets of n+2
/// vertices. Its homology is that of the n-sphere.
fn sphere(n: usize) -> SimplicialScheme {
    let vertices: Vec<Label> = (0..n + 2).map(|i| Label::new(format!("v{i}"))).collect();
    let facets = (0..vertices.len()).map(|omit| {
        vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != omit)
            .map(|(_, v)| v.clone())
            .collect::<BTreeSet<Label>>()
    });
    SimplicialScheme::from_facets(vertices.clone(), facets)
        .expect("sphere facets only use declared vertices")
}

/// The minimal triangulation of the projective plane: six vertices, ten
/// triangles, every edge shared by exactly two of them.
fn projective_plane() -> SimplicialScheme {
    const FACES: [[&str; 3]; 10] = [
        ["1", "2", "3"],
        ["1", "2", "4"],
        ["1", "3", "5"],
        ["1", "4", "6"],
        ["1", "5", "6"],
        ["2", "3", "6"],
        ["2", "4", "5"],
        ["2", "5", "6"],
        ["3", "4", "5"],
        ["3", "4", "6"],
    ];
    SimplicialScheme::from_facets(
        (1..=6).map(|i| Label::new(i.to_string())),
        FACES
            .iter()
            .map(|face| face.iter().map(|v| Label::new(*v)).collect::<BTreeSet<_>>()),
    )
    .expect("face list only uses the six vertices")
}

/// Disjoint components with vertices renamed `<i>.<v>`; with `wedge`, each
/// component's least vertex is identified into a single basepoint `*`.
fn glue(parts: &[FixtureExpr], wedge: bool) -> SimplicialScheme {
    let mut vertices: BTreeSet<Label> = BTreeSet::new();
    let mut facets: Vec<BTreeSet<Label>> = Vec::new();
    for (index, part) in parts.iter().enumerate() {
        let component = fixture_scheme(part);
        let basepoint = component.vertices().iter().next().cloned();
        let rename = |v: &Label| -> Label {
            if wedge && Some(v) == basepoint.as_ref() {
                Label::new("*")
            } else {
                Label::new(format!("{}.{}", index + 1, v))
            }
        };
        vertices.extend(component.vertices().iter().map(rename));
        facets.extend(
            component
                .facets()
                .into_iter()
                .map(|facet| facet.iter().map(rename).collect::<BTreeSet<_>>()),
        );
    }
    SimplicialScheme::from_facets(vertices, facets)
        .expect("renaming keeps facets inside the vertex set")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> FixtureExpr {
        s.parse().unwrap()
    }

    #[test]
    fn expressions_parse_and_render() {
        assert_eq!(parse("sphere:1"), FixtureExpr::Sphere(1));
        assert_eq!(parse("rp2"), FixtureExpr::ProjectivePlane);
        assert_eq!(
            parse(" wedge( sphere:1 , sphere:2 ) "),
            FixtureExpr::Wedge(vec![FixtureExpr::Sphere(1), FixtureExpr::Sphere(2)])
        );
        let nested = parse("union(wedge(sphere:1,rp2),sphere:3)");
        assert_eq!(nested.to_string(), "union(wedge(sphere:1,rp2),sphere:3)");
    }

    #[test]
    fn bad_expressions_are_rejected_with_reasons() {
        for (input, needle) in [
            ("sphere:0", "at least 1"),
            ("sphere", "expected `:`"),
            ("moore", "unknown fixture"),
            ("wedge(", "expected a fixture expression"),
            ("wedge(sphere:1", "expected `)`"),
            ("rp2 rp2", "trailing"),
            ("", "expected a fixture expression"),
        ] {
            match input.parse::<FixtureExpr>() {
                Err(ConstructError::BadFixture { message, .. }) => {
                    assert!(message.contains(needle), "`{input}`: {message}")
                }
                other => panic!("`{input}` gave {other:?}"),
            }
        }
    }

    #[test]
    fn sphere_one_is_the_hollow_triangle() {
        let scheme = fixture_scheme(&FixtureExpr::Sphere(1));
        assert_eq!(scheme.vertices().len(), 3);
        assert_eq!(scheme.simplex_count(), 6);
        assert_eq!(scheme.dimension(), Some(1));
    }

    #[test]
    fn projective_plane_has_the_expected_counts() {
        let scheme = projective_plane();
        assert_eq!(scheme.vertices().len(), 6);
        assert_eq!(scheme.simplices_with_len(2).len(), 15);
        assert_eq!(scheme.simplices_with_len(3).len(), 10);
        assert_eq!(scheme.simplex_count(), 31);
    }

    #[test]
    fn wedge_identifies_one_point_per_component() {
        let scheme = fixture_scheme(&parse("wedge(sphere:1,sphere:1)"));
        // 3 + 3 vertices, two of them merged into the basepoint
        assert_eq!(scheme.vertices().len(), 5);
        assert!(scheme.vertices().contains(&Label::new("*")));
        let sig = homology(&scheme);
        assert_eq!(sig.group(0).betti, 1);
        assert_eq!(sig.group(1).betti, 2);
    }

    #[test]
    fn union_keeps_components_apart() {
        let scheme = fixture_scheme(&parse("union(sphere:1,sphere:1)"));
        assert_eq!(scheme.vertices().len(), 6);
        let sig = homology(&scheme);
        assert_eq!(sig.group(0).betti, 2);
        assert_eq!(sig.group(1).betti, 2);
    }

    #[test]
    fn empty_scheme_is_refused() {
        assert_eq!(
            net_from_scheme(&SimplicialScheme::empty()),
            Err(ConstructError::EmptyScheme)
        );
    }

    #[test]
    fn single_vertex_gives_a_one_place_net() {
        let scheme =
            SimplicialScheme::from_facets([Label::new("a")], [BTreeSet::from([Label::new("a")])])
                .unwrap();
        let net = net_from_scheme(&scheme).unwrap();
        assert_eq!(net.net().places().len(), 1);
        assert_eq!(net.net().events().len(), 1);
        let check = verify_construction(&scheme, &Limits::default()).unwrap();
        assert!(check.agrees());
        assert_eq!(check.net_signature.group(0).betti, 1);
    }

    #[test]
    fn edge_net_has_private_places_and_one_conflict() {
        let scheme = SimplicialScheme::from_facets(
            ["x", "y"].map(Label::new),
            [BTreeSet::from(["x", "y"].map(Label::new))],
        )
        .unwrap();
        let net = net_from_scheme(&scheme).unwrap();
        // subdivision vertices {x}, {y}, {x,y}; only {x} vs {y} conflict
        assert_eq!(net.net().events().len(), 3);
        assert_eq!(net.net().places().len(), 4);
        assert!(net.net().places().contains(&PlaceId::new("{x}|{y}")));

        let independence = net.net().independence();
        let e = |s: &str| EventId::new(s);
        assert!(independence.contains(&e("{x}"), &e("{x,y}")));
        assert!(independence.contains(&e("{y}"), &e("{x,y}")));
        assert!(!independence.contains(&e("{x}"), &e("{y}")));

        // reachable markings are exactly the chains in the subdivision order
        let expansion = net.expand(&Limits::default()).unwrap();
        assert_eq!(expansion.system.system().states().len(), 6);
        assert!(expansion.dropped_events.is_empty());
        assert!(expansion.system.system().validate().is_valid());
    }

    #[test]
    fn every_constructed_event_fires_at_most_once() {
        let scheme = fixture_scheme(&FixtureExpr::Sphere(1));
        let net = net_from_scheme(&scheme).unwrap();
        let expansion = net.expand(&Limits::default()).unwrap();
        let system = expansion.system.system();
        // an event's private place holds a token iff the event has not fired,
        // so no path may use an event twice; check by decoding the marking
        // state ids (token counts in place order)
        let places: Vec<&PlaceId> = net.net().places().iter().collect();
        for (from, event, _) in system.transitions() {
            let counts: Vec<&str> = from.as_str().split(',').collect();
            let private = places
                .iter()
                .position(|p| p.as_str() == event.as_str())
                .expect("every event has a private place of the same name");
            assert_eq!(counts[private], "1", "{event} fired twice via {from}");
        }
    }

    #[test]
    fn expanded_scheme_is_the_barycentric_subdivision() {
        let scheme = fixture_scheme(&FixtureExpr::Sphere(1));
        let net = net_from_scheme(&scheme).unwrap();
        let expansion = net.expand(&Limits::default()).unwrap();
        let derived = crate::scheme::scheme_of_system(&expansion.system);
        assert_eq!(derived, barycentric_subdivision(&scheme));
    }

    #[test]
    fn edge_construction_verifies() {
        let scheme = SimplicialScheme::from_facets(
            ["x", "y"].map(Label::new),
            [BTreeSet::from(["x", "y"].map(Label::new))],
        )
        .unwrap();
        let check = verify_construction(&scheme, &Limits::default()).unwrap();
        assert!(check.agrees());
        assert_eq!(check.scheme_signature.groups().len(), 1);
    }
}
