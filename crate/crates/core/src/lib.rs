//! Homology and bisimulation tools for concurrent systems.
//!
//! The library models labelled asynchronous transition systems and labelled
//! Petri nets, derives the simplicial scheme spanned by their independence
//! structure, and computes integer homology signatures via Smith normal form.
//! On top of that it offers a bisimilarity refuter driven by residual
//! homology, a span-based certifier, and a constructor that realizes a
//! finite simplicial scheme as a safe Petri net.

pub mod bisim;
pub mod construct;
pub mod formats;
pub mod homology;
pub mod ident;
pub mod lts;
pub mod petri;
pub mod scheme;
pub mod snf;

pub use ident::{EventId, Label, PlaceId, StateId};
