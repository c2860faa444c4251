//! Oriented simplicial complexes over MIDI pitches.
//!
//! Vertices are MIDI pitch numbers, so node ids are stable across runs and
//! pieces. The canonical orientation of every simplex is ascending pitch
//! order; a permuted vertex list canonicalizes with a parity sign. The
//! complex keeps one insertion-ordered, deduplicated registry per dimension
//! and is closed under taking faces after every mutation.

use std::collections::BTreeMap;

use indexmap::IndexSet;
use itertools::Itertools;
use serde_json::json;
use thiserror::Error;

use crate::score::MusicalElement;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("a simplex needs at least one vertex")]
    Empty,
    #[error("duplicate vertex {0} in simplex")]
    DuplicateVertex(u8),
    #[error("simplex {0:?} is not in the complex")]
    Missing(Vec<u8>),
}

/// An oriented simplex in canonical (ascending) vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<u8>,
}

impl Simplex {
    /// Build from vertices already strictly ascending.
    pub fn new(vertices: Vec<u8>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::Empty);
        }
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return Err(ComplexError::DuplicateVertex(w[0]));
            }
            debug_assert!(w[0] < w[1], "vertices must be ascending");
        }
        Ok(Simplex { vertices })
    }

    /// Canonicalize an arbitrarily ordered vertex list, returning the simplex
    /// together with the parity sign (−1)^σ of the sorting permutation.
    pub fn oriented(vertices: &[u8]) -> Result<(Self, i8), ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::Empty);
        }
        let mut v = vertices.to_vec();
        // count inversions removed while insertion-sorting: each adjacent
        // swap flips the orientation sign
        let mut sign = 1i8;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(ComplexError::DuplicateVertex(w[0]));
            }
        }
        Ok((Simplex { vertices: v }, sign))
    }

    pub fn vertex(v: u8) -> Self {
        Simplex { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[u8] {
        &self.vertices
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The codimension-one faces in boundary order: the p-th face omits the
    /// p-th vertex of the canonical ordering.
    pub fn faces(&self) -> Vec<Simplex> {
        if self.vertices.len() == 1 {
            return Vec::new();
        }
        (0..self.vertices.len())
            .map(|p| {
                let mut v = self.vertices.clone();
                v.remove(p);
                Simplex { vertices: v }
            })
            .collect()
    }

    /// Every nonempty subset of the vertices, i.e. the closure of `self`.
    fn subsets(&self) -> Vec<Simplex> {
        (1..=self.vertices.len())
            .flat_map(|k| {
                self.vertices
                    .iter()
                    .copied()
                    .combinations(k)
                    .map(|vertices| Simplex { vertices })
            })
            .collect()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.vertices.binary_search(v).is_ok())
    }

    /// Label form used in CSV exports, e.g. `60-64-67`.
    pub fn label(&self) -> String {
        self.vertices.iter().map(|v| v.to_string()).join("-")
    }
}

/// A simplicial complex with insertion-ordered per-dimension registries.
#[derive(Debug, Clone, Default)]
pub struct SimplicialComplex {
    registries: Vec<IndexSet<Simplex>>,
}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Maximum dimension of any stored simplex; `None` when empty.
    pub fn dimension(&self) -> Option<usize> {
        self.registries
            .iter()
            .rposition(|registry| !registry.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        self.dimension().is_none()
    }

    /// (N_0, …, N_d); empty for the empty complex.
    pub fn simplex_counts(&self) -> Vec<usize> {
        match self.dimension() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|k| self.registries[k].len()).collect(),
        }
    }

    pub fn count(&self, dim: usize) -> usize {
        self.registries.get(dim).map_or(0, IndexSet::len)
    }

    pub fn simplices(&self, dim: usize) -> impl Iterator<Item = &Simplex> {
        self.registries.get(dim).into_iter().flatten()
    }

    /// Nodes (0-simplices) in insertion order.
    pub fn nodes(&self) -> impl Iterator<Item = u8> + '_ {
        self.simplices(0).map(|s| s.vertices[0])
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.registries
            .get(s.dimension())
            .is_some_and(|r| r.contains(s))
    }

    /// Registry index of a simplex within its dimension.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.registries.get(s.dimension())?.get_index_of(s)
    }

    /// Insert a simplex together with all of its faces. Returns only the
    /// simplices that were not already present; idempotent.
    pub fn insert_closed(&mut self, s: Simplex) -> Vec<Simplex> {
        let mut created = Vec::new();
        for sub in s.subsets() {
            let dim = sub.dimension();
            if self.registries.len() <= dim {
                self.registries.resize_with(dim + 1, IndexSet::new);
            }
            if self.registries[dim].insert(sub.clone()) {
                created.push(sub);
            }
        }
        #[cfg(debug_assertions)]
        self.verify_closure();
        created
    }

    /// Insert the simplex spanned by a musical element's pitch set.
    pub fn insert_element(&mut self, element: &MusicalElement) -> Vec<Simplex> {
        let s = Simplex::new(element.pitches.clone())
            .expect("element pitches are nonempty, sorted and deduplicated");
        self.insert_closed(s)
    }

    /// Insert a transition edge; a degenerate pair contributes only its vertex.
    pub fn insert_transition(&mut self, from: u8, to: u8) -> Vec<Simplex> {
        if from == to {
            self.insert_closed(Simplex::vertex(from))
        } else {
            let (edge, _) = Simplex::oriented(&[from, to]).expect("two distinct vertices");
            self.insert_closed(edge)
        }
    }

    /// Cofaces (dimension +1) and faces (dimension −1) of a stored simplex.
    pub fn star_and_faces(&self, s: &Simplex) -> Result<(Vec<Simplex>, Vec<Simplex>), ComplexError> {
        if !self.contains(s) {
            return Err(ComplexError::Missing(s.vertices.clone()));
        }
        Ok((self.cofaces(s), s.faces()))
    }

    /// Stored simplices of dimension `dim(s)+1` having `s` as a face.
    pub fn cofaces(&self, s: &Simplex) -> Vec<Simplex> {
        self.simplices(s.dimension() + 1)
            .filter(|c| s.is_face_of(c))
            .cloned()
            .collect()
    }

    /// Number of 1-skeleton edges incident to a vertex.
    pub fn degree(&self, v: u8) -> usize {
        self.simplices(1)
            .filter(|e| e.vertices().contains(&v))
            .count()
    }

    /// Closure invariant: every face of every stored simplex is stored.
    /// Checked after each mutation in debug builds.
    pub fn verify_closure(&self) {
        for registry in self.registries.iter().skip(1) {
            for s in registry {
                for face in s.faces() {
                    assert!(
                        self.contains(&face),
                        "closure violated: face {face:?} of {s:?} missing"
                    );
                }
            }
        }
    }

    /// JSON snapshot: `{nodes: [pitch…], simplices: {dim: [[v…]…]}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut simplices = BTreeMap::new();
        if let Some(d) = self.dimension() {
            for k in 0..=d {
                simplices.insert(
                    k.to_string(),
                    self.simplices(k)
                        .map(|s| s.vertices.clone())
                        .collect::<Vec<_>>(),
                );
            }
        }
        json!({
            "nodes": self.nodes().collect::<Vec<_>>(),
            "simplices": simplices,
        })
    }
}
