//! Shared test fixtures: randomized complexes, independent oracles, and
//! synthesized scores with known structure.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use simploscore::complex::{Simplex, SimplicialComplex};
use simploscore::score::{chord_root, ElementKind, MusicalElement};
use simploscore::Beats;
use simploscore_testkit::ScoreSpec;

/// Build a musical element from raw pitches (any order).
pub fn element(measure: usize, onset: Beats, pitches: &[u8]) -> MusicalElement {
    let mut sorted = pitches.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    MusicalElement {
        kind: if sorted.len() > 1 {
            ElementKind::Chord
        } else {
            ElementKind::Note
        },
        representative: chord_root(&sorted).unwrap(),
        pitches: sorted,
        onset_beats: onset,
        measure: Some(measure),
    }
}

/// Chords and transition edges to replay into a complex.
#[derive(Debug, Clone)]
pub struct ComplexSpec {
    pub chords: Vec<Vec<u8>>,
    pub transitions: Vec<(u8, u8)>,
    pub lone_vertices: Vec<u8>,
}

impl ComplexSpec {
    pub fn build(&self) -> SimplicialComplex {
        let mut c = SimplicialComplex::new();
        for v in &self.lone_vertices {
            c.insert_closed(Simplex::vertex(*v));
        }
        for chord in &self.chords {
            c.insert_element(&element(0, Beats::from_integer(0), chord));
        }
        for &(a, b) in &self.transitions {
            c.insert_transition(a, b);
        }
        c
    }

    /// Apply a pitch bijection; the result builds an isomorphic complex.
    pub fn relabel(&self, map: impl Fn(u8) -> u8) -> ComplexSpec {
        ComplexSpec {
            chords: self
                .chords
                .iter()
                .map(|c| c.iter().map(|&p| map(p)).collect())
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|&(a, b)| (map(a), map(b)))
                .collect(),
            lone_vertices: self.lone_vertices.iter().map(|&p| map(p)).collect(),
        }
    }
}

/// Random complex in the shape the pipeline produces: up to 12 vertices,
/// random chords of size 2-4 (dimension ≤ 3) plus random transition edges
/// and a few isolated vertices.
pub fn random_complex_spec(rng: &mut impl Rng) -> ComplexSpec {
    let nv: usize = rng.gen_range(1..=12);
    let mut pitches: Vec<u8> = (40..90).collect();
    pitches.shuffle(rng);
    pitches.truncate(nv);

    let mut lone_vertices = Vec::new();
    for &p in &pitches {
        if rng.gen_bool(0.25) {
            lone_vertices.push(p);
        }
    }
    let mut chords = Vec::new();
    if nv >= 2 {
        for _ in 0..rng.gen_range(0..=8) {
            let size = rng.gen_range(2..=4.min(nv));
            let mut chord = pitches.clone();
            chord.shuffle(rng);
            chord.truncate(size);
            chords.push(chord);
        }
    }
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(0..=10) {
        let a = pitches[rng.gen_range(0..nv)];
        let b = pitches[rng.gen_range(0..nv)];
        transitions.push((a, b));
    }
    ComplexSpec {
        chords,
        transitions,
        lone_vertices,
    }
}

pub fn random_complex(rng: &mut impl Rng) -> SimplicialComplex {
    random_complex_spec(rng).build()
}

/// Triangle-free by construction: a random bipartite graph.
pub fn random_bipartite_graph(rng: &mut impl Rng) -> SimplicialComplex {
    let left: usize = rng.gen_range(1..=6);
    let right: usize = rng.gen_range(1..=6);
    let mut c = SimplicialComplex::new();
    for i in 0..left {
        c.insert_closed(Simplex::vertex(40 + i as u8));
    }
    for j in 0..right {
        c.insert_closed(Simplex::vertex(70 + j as u8));
    }
    for i in 0..left {
        for j in 0..right {
            if rng.gen_bool(0.5) {
                c.insert_transition(40 + i as u8, 70 + j as u8);
            }
        }
    }
    c
}

/// Pure 2-complex: random filled triangles only, so every maximal simplex
/// is 2-dimensional.
pub fn random_pure_two_complex(rng: &mut impl Rng) -> SimplicialComplex {
    let nv: usize = rng.gen_range(3..=10);
    let mut pitches: Vec<u8> = (40..90).collect();
    pitches.shuffle(rng);
    pitches.truncate(nv);
    let mut c = SimplicialComplex::new();
    for _ in 0..rng.gen_range(1..=12) {
        let mut tri = pitches.clone();
        tri.shuffle(rng);
        tri.truncate(3);
        c.insert_element(&element(0, Beats::from_integer(0), &tri));
    }
    c
}

/// Connected-component count of the 1-skeleton by plain union-find,
/// independent of any boundary-matrix machinery.
pub fn union_find_components(c: &SimplicialComplex) -> usize {
    let nodes: Vec<u8> = c.nodes().collect();
    let index = |v: u8| nodes.iter().position(|&n| n == v).unwrap();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in c.simplices(1) {
        let a = find(&mut parent, index(e.vertices()[0]));
        let b = find(&mut parent, index(e.vertices()[1]));
        if a != b {
            parent[a] = b;
        }
    }
    (0..nodes.len())
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

/// The octahedron surface: 6 vertices, 12 edges, 8 triangles, χ = 2.
pub fn octahedron() -> SimplicialComplex {
    let mut c = SimplicialComplex::new();
    let equator = [61u8, 62, 63, 64];
    for i in 0..4 {
        let a = equator[i];
        let b = equator[(i + 1) % 4];
        for pole in [60u8, 65] {
            c.insert_element(&element(0, Beats::from_integer(0), &[pole, a, b]));
        }
    }
    c
}

/// Hollow tetrahedron: four filled triangles, no solid.
pub fn hollow_tetrahedron() -> SimplicialComplex {
    let mut c = SimplicialComplex::new();
    for tri in [[60, 64, 67], [60, 64, 72], [60, 67, 72], [64, 67, 72]] {
        c.insert_element(&element(0, Beats::from_integer(0), &tri));
    }
    c
}

/// Minimal 7-vertex torus triangulation (K7 with 14 triangles).
pub fn seven_vertex_torus() -> SimplicialComplex {
    let mut c = SimplicialComplex::new();
    for i in 0u8..7 {
        for tri in [
            [i, (i + 1) % 7, (i + 3) % 7],
            [i, (i + 2) % 7, (i + 3) % 7],
        ] {
            let pitched: Vec<u8> = tri.iter().map(|v| 60 + v).collect();
            c.insert_element(&element(0, Beats::from_integer(0), &pitched));
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Synthesized scores (as real MIDI files via the byte-level writer)
// ---------------------------------------------------------------------------

const PPQ: u16 = 480;

struct ScoreSketch {
    spec: ScoreSpec,
}

impl ScoreSketch {
    fn new() -> Self {
        ScoreSketch {
            spec: ScoreSpec::new(PPQ).time_signature(4, 4),
        }
    }

    /// Eighth notes filling measure `m` (beats m·4 + 0, 0.5, …, 3.5).
    fn eighths(&mut self, measure: u32, pitches: &[u8]) {
        assert_eq!(pitches.len(), 8);
        for (i, &p) in pitches.iter().enumerate() {
            let onset = (measure * 8 + i as u32, 2u32);
            self.spec = self.spec.clone().note_beats(onset, (1, 2), p, 80);
        }
    }

    /// Quarter-note measure `[a, dyad(p,q), b, c]`.
    fn quarters_with_dyad(&mut self, measure: u32, a: u8, dyad: (u8, u8), b: u8, c: u8) {
        let base = measure * 4;
        let mut push = |beat: u32, pitch: u8| {
            self.spec = self.spec.clone().note_beats((base + beat, 1), (1, 1), pitch, 80);
        };
        push(0, a);
        push(1, dyad.0);
        push(1, dyad.1);
        push(2, b);
        push(3, c);
    }

    /// Quarter-note chord at a beat offset inside a measure.
    fn chord_at(&mut self, measure: u32, beat: u32, pitches: &[u8]) {
        for &p in pitches {
            self.spec = self
                .spec
                .clone()
                .note_beats((measure * 4 + beat, 1), (1, 1), p, 80);
        }
    }
}

/// Binary-form piece in performance order A A B B (two 8-measure themes,
/// each repeated exactly).
///
/// Construction guarantees, relied on by form-detection tests:
/// - each theme starts and ends on its anchor pitch, so the bridge into a
///   repeat is a degenerate transition;
/// - every measure inside a first statement adds at least one new edge
///   between existing pitches and introduces no lone new vertices, so Δχ < 0
///   there (measure 16 additionally bridges into the new B pitch set with
///   one more edge than vertex);
/// - repeats re-create only existing simplices, so Δχ = 0 on measures 8-15
///   and 24-31 exactly.
pub fn binary_form_score() -> ScoreSpec {
    let mut sketch = ScoreSketch::new();
    // theme A on {60,62,64,65,67,69,71,72}, anchored at 60; the filler
    // single is the constant 62 so its transitions only revisit old edges
    // (or the m2 dyad) and never pre-create a later measure's dyad pair
    let theme_a = |sketch: &mut ScoreSketch, start: u32| {
        sketch.eighths(start, &[60, 62, 64, 65, 67, 69, 71, 72]);
        let dyads = [
            (60, 64),
            (62, 65),
            (64, 67),
            (65, 69),
            (67, 71),
            (69, 72),
            (60, 72),
        ];
        for (k, &dyad) in dyads.iter().enumerate() {
            let m = start + 1 + k as u32;
            let last = if k == dyads.len() - 1 { 60 } else { 62 };
            sketch.quarters_with_dyad(m, 62, dyad, 62, last);
        }
    };
    // theme B on {48,50,52,53,55,57,59}, anchored at 48, filler single 50
    let theme_b = |sketch: &mut ScoreSketch, start: u32| {
        sketch.eighths(start, &[48, 50, 52, 53, 55, 57, 59, 48]);
        let dyads = [
            (48, 52),
            (50, 53),
            (52, 55),
            (53, 57),
            (55, 59),
            (48, 53),
            (48, 55),
        ];
        for (k, &dyad) in dyads.iter().enumerate() {
            let m = start + 1 + k as u32;
            let last = if k == dyads.len() - 1 { 48 } else { 50 };
            sketch.quarters_with_dyad(m, 50, dyad, 50, last);
        }
    };
    theme_a(&mut sketch, 0);
    theme_a(&mut sketch, 8);
    theme_b(&mut sketch, 16);
    theme_b(&mut sketch, 24);
    sketch.spec
}

/// Five measures of triad chords whose complex stays a pure 2-complex at
/// every snapshot while χ moves through 1, 2, 1, 0, −1. Every transition
/// edge lies inside an already-present triangle (or is degenerate), so
/// nothing 1-dimensional is ever maximal.
pub fn pure_two_complex_score() -> ScoreSpec {
    let mut sketch = ScoreSketch::new();
    sketch.chord_at(0, 0, &[60, 64, 67]);
    sketch.chord_at(0, 1, &[60, 67, 72]);
    sketch.chord_at(0, 2, &[64, 67, 72]);
    sketch.chord_at(1, 0, &[60, 64, 72]);
    sketch.chord_at(2, 0, &[72, 76, 79]);
    sketch.chord_at(2, 1, &[60, 76, 79]);
    sketch.chord_at(3, 0, &[64, 76, 79]);
    sketch.chord_at(4, 0, &[67, 76, 79]);
    sketch.spec
}

/// Expected χ per measure of [`pure_two_complex_score`].
pub const PURE_TWO_EULER: [i64; 5] = [1, 2, 1, 0, -1];

/// Parse MIDI bytes and run the standard pipeline up to an element sequence.
pub fn pipeline_elements(
    bytes: &[u8],
) -> (
    simploscore::ingest::ParsedPiece,
    simploscore::score::ElementSequence,
) {
    let mut piece = simploscore::ingest::parse_midi(bytes).expect("valid test MIDI");
    let meter = piece.meter.expect("test scores carry a time signature");
    simploscore::ingest::assign_measures(&mut piece.events, &meter, Beats::from_integer(0));
    let seq = simploscore::score::detect_simultaneities(&piece.events, Beats::new(1, 16));
    (piece, seq)
}
