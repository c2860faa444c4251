//! Symbolic music as evolving oriented simplicial complexes.
//!
//! The pipeline reads standard MIDI files into a note-event table
//! ([`ingest`]), groups events into notes and chords with root-note
//! transitions ([`score`]), folds those into an oriented simplicial complex
//! closed under faces ([`complex`]), and computes topological invariants
//! (Betti numbers, Euler characteristic, [`homology`]) together with discrete
//! geometric quantities (Forman-Ricci and vertex curvature, [`curvature`]).
//! Temporal drivers ([`evolution`]) produce cumulative and sliding-window
//! series, and [`fitting`] recovers the trend models (linear, polynomial,
//! exponential) used to characterize them.

pub mod complex;
pub mod curvature;
pub mod evolution;
pub mod fitting;
pub mod homology;
pub mod ingest;
pub mod rational;
pub mod score;

pub use rational::Beats;
