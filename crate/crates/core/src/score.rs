//! Grouping note events into musical elements.
//!
//! Events whose onsets coincide within a tolerance become one chord; each
//! element carries a representative pitch (the note itself, or the chord
//! root found by stacked-thirds scoring) from which melodic transition edges
//! are drawn.

use num_traits::Zero;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::ingest::NoteEvent;
use crate::rational::{beats_to_f64, Beats};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("chord root of an empty pitch set is undefined")]
    EmptyChord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Note,
    Chord,
}

/// A note or chord in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicalElement {
    pub kind: ElementKind,
    /// Strictly ascending, deduplicated MIDI pitches.
    pub pitches: Vec<u8>,
    pub onset_beats: Beats,
    pub measure: Option<usize>,
    /// The note itself, or the chord root. Always a member of `pitches`.
    pub representative: u8,
}

/// Time-ordered elements of a piece.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ElementSequence {
    pub elements: Vec<MusicalElement>,
}

impl ElementSequence {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// JSON form: array of `{onset, measure, pitches, root}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .elements
            .iter()
            .map(|e| {
                json!({
                    "onset": beats_to_f64(e.onset_beats),
                    "measure": e.measure,
                    "pitches": e.pitches,
                    "root": e.representative,
                })
            })
            .collect::<Vec<_>>())
    }
}

/// Group time-sorted events into notes and chords.
///
/// Clustering is by chained onset proximity: an event joins the current
/// cluster when its onset is within `epsilon_beats` of the previous event's.
/// With `epsilon_beats = 0` exactly-equal rational onsets group together.
/// Duplicate pitches inside a cluster are merged.
pub fn detect_simultaneities(events: &[NoteEvent], epsilon_beats: Beats) -> ElementSequence {
    debug_assert!(epsilon_beats >= Beats::zero());
    debug_assert!(events.windows(2).all(|w| w[0].onset_beats <= w[1].onset_beats));

    let mut elements = Vec::new();
    let mut cluster: Vec<&NoteEvent> = Vec::new();
    for ev in events {
        if let Some(last) = cluster.last() {
            if ev.onset_beats - last.onset_beats <= epsilon_beats {
                cluster.push(ev);
                continue;
            }
            elements.push(finish_cluster(&cluster));
            cluster.clear();
        }
        cluster.push(ev);
    }
    if !cluster.is_empty() {
        elements.push(finish_cluster(&cluster));
    }
    ElementSequence { elements }
}

fn finish_cluster(cluster: &[&NoteEvent]) -> MusicalElement {
    let mut pitches: Vec<u8> = cluster.iter().map(|e| e.pitch).collect();
    pitches.sort_unstable();
    pitches.dedup();
    let representative = chord_root(&pitches).expect("cluster is nonempty");
    MusicalElement {
        kind: if pitches.len() > 1 {
            ElementKind::Chord
        } else {
            ElementKind::Note
        },
        pitches,
        onset_beats: cluster[0].onset_beats,
        measure: cluster[0].measure,
        representative,
    }
}

/// Interval classes (semitones above a candidate root, mod 12) that count as
/// chord tones when scoring stacked thirds: unison, minor/major third,
/// fifth, minor/major seventh.
const CHORD_TONES: [u8; 6] = [0, 3, 4, 7, 10, 11];

/// Root of a chord given as a strictly ascending pitch set.
///
/// Singletons are their own root. Dyads use the pitch-class interval: thirds,
/// fifths and sevenths keep the lower note as root; fourths, sixths and
/// seconds invert so the upper note is the root; unison-class and tritone
/// fall back to the lower note. Larger chords score every present pitch
/// class as a stacked-thirds candidate and the best-supported class wins,
/// ties going to the lowest sounding pitch. The returned root is the lowest
/// sounding pitch in the winning class.
pub fn chord_root(pitches: &[u8]) -> Result<u8, ScoreError> {
    debug_assert!(pitches.windows(2).all(|w| w[0] < w[1]));
    match pitches {
        [] => Err(ScoreError::EmptyChord),
        [p] => Ok(*p),
        [low, high] => {
            let interval = (high - low) % 12;
            match interval {
                3 | 4 | 7 | 10 | 11 => Ok(*low),
                1 | 2 | 5 | 8 | 9 => Ok(*high),
                _ => Ok(*low), // unison class or tritone: tie rule
            }
        }
        _ => {
            let mut best: Option<(usize, u8, u8)> = None; // (score, lowest pitch of class, class)
            let mut seen = [false; 12];
            for &candidate in pitches {
                let class = candidate % 12;
                if seen[usize::from(class)] {
                    continue;
                }
                seen[usize::from(class)] = true;
                let score = pitches
                    .iter()
                    .filter(|&&p| CHORD_TONES.contains(&((p + 12 - class) % 12)))
                    .count();
                let lowest = *pitches.iter().find(|&&p| p % 12 == class).unwrap();
                let better = match best {
                    None => true,
                    Some((s, l, _)) => score > s || (score == s && lowest < l),
                };
                if better {
                    best = Some((score, lowest, class));
                }
            }
            Ok(best.unwrap().1)
        }
    }
}

/// An ordered pair of representatives between consecutive elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransitionPair {
    pub from: u8,
    pub to: u8,
    /// Equal endpoints: no 1-simplex results downstream.
    pub degenerate: bool,
}

/// One pair per consecutive element pair; `|seq| − 1` in total.
pub fn transition_pairs(seq: &ElementSequence) -> Vec<TransitionPair> {
    seq.elements
        .windows(2)
        .map(|w| {
            let from = w[0].representative;
            let to = w[1].representative;
            TransitionPair {
                from,
                to,
                degenerate: from == to,
            }
        })
        .collect()
}
