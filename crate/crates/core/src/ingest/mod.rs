//! MIDI ingestion: parse files into a time-ordered note-event table.
//!
//! The table mirrors the classic seven-column note matrix: onset and duration
//! in beats (exact rationals), channel, pitch, velocity, and onset/duration in
//! seconds derived from the tempo map. Beats come from the file's PPQ division
//! with no float rounding, since exact onset equality drives chord detection.

pub mod midi;

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Beats};
pub use midi::MidiError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Midi(#[from] MidiError),
    #[error("MIDI pitch {0} out of range 0-127")]
    PitchOutOfRange(u8),
    #[error("note table CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// One matched note: a row of the note table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    #[serde(with = "rational::beats_serde")]
    pub onset_beats: Beats,
    #[serde(with = "rational::beats_serde")]
    pub duration_beats: Beats,
    pub channel: u8,
    pub pitch: u8,
    pub velocity: u8,
    pub onset_seconds: f64,
    pub duration_seconds: f64,
    /// Filled by [`assign_measures`]; `None` until the meter is known.
    pub measure: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeterSource {
    MidiMeta,
    CliOverride,
}

/// Beats per measure and where the value came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterSpec {
    #[serde(with = "rational::beats_serde")]
    pub beats_per_measure: Beats,
    pub source: MeterSource,
}

impl MeterSpec {
    pub fn new(beats_per_measure: Beats, source: MeterSource) -> Self {
        debug_assert!(beats_per_measure > Beats::zero());
        MeterSpec {
            beats_per_measure,
            source,
        }
    }
}

/// Result of parsing one MIDI file.
#[derive(Debug, Clone)]
pub struct ParsedPiece {
    pub events: Vec<NoteEvent>,
    /// From the first time-signature meta event; `None` when the file has
    /// none (measure segmentation then needs a CLI override).
    pub meter: Option<MeterSpec>,
    pub ppq: u16,
    pub format: u16,
    pub warnings: Vec<String>,
}

/// Piecewise-constant tempo, integrated to microseconds per tick position.
struct TempoMap {
    /// (tick, us_per_quarter, accumulated microseconds at tick)
    segments: Vec<(u64, u32, f64)>,
    ppq: f64,
}

const DEFAULT_US_PER_QUARTER: u32 = 500_000; // 120 BPM

impl TempoMap {
    fn new(mut changes: Vec<(u64, u32)>, ppq: u16) -> Self {
        changes.sort_by_key(|&(tick, _)| tick);
        let ppq = f64::from(ppq);
        let mut segments: Vec<(u64, u32, f64)> = vec![(0, DEFAULT_US_PER_QUARTER, 0.0)];
        for (tick, us) in changes {
            let &(last_tick, last_us, last_acc) = segments.last().unwrap();
            if tick == last_tick {
                // simultaneous (or tick-0) change: the later event wins
                *segments.last_mut().unwrap() = (tick, us, last_acc);
            } else {
                let acc = last_acc + (tick - last_tick) as f64 / ppq * f64::from(last_us);
                segments.push((tick, us, acc));
            }
        }
        TempoMap { segments, ppq }
    }

    fn seconds_at(&self, tick: u64) -> f64 {
        let idx = match self.segments.binary_search_by_key(&tick, |&(t, _, _)| t) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let (seg_tick, us, acc) = self.segments[idx];
        (acc + (tick - seg_tick) as f64 / self.ppq * f64::from(us)) / 1e6
    }
}

/// Parse raw SMF bytes into the note table plus meter metadata.
///
/// Note-ons are matched to note-offs per channel and pitch (first on, first
/// off) across all tracks; a dangling note-on is closed at its track's end
/// with a warning. Events come back sorted by (onset, pitch).
pub fn parse_midi(bytes: &[u8]) -> Result<ParsedPiece, IngestError> {
    let smf = midi::parse(bytes)?;
    let mut warnings = smf.warnings.clone();

    // merge tracks preserving (tick, track, position) order
    let mut merged: Vec<(u64, usize, usize, midi::Message)> = Vec::new();
    for (track_idx, track) in smf.tracks.iter().enumerate() {
        for (pos, ev) in track.events.iter().enumerate() {
            merged.push((ev.tick, track_idx, pos, ev.message));
        }
    }
    merged.sort_by_key(|&(tick, track, pos, _)| (tick, track, pos));

    let mut tempo_changes = Vec::new();
    let mut meter: Option<MeterSpec> = None;
    let mut open: HashMap<(u8, u8), VecDeque<(u64, u8, usize)>> = HashMap::new();
    let mut notes: Vec<(u64, u64, u8, u8, u8)> = Vec::new(); // (on, off, ch, pitch, vel)

    for &(tick, track_idx, _, message) in &merged {
        match message {
            midi::Message::Tempo { us_per_quarter } => {
                tempo_changes.push((tick, us_per_quarter));
            }
            midi::Message::TimeSignature {
                numerator,
                denom_pow,
            } => {
                let beats = Beats::new(i64::from(numerator) * 4, 1i64 << denom_pow.min(30));
                if meter.is_none() {
                    meter = Some(MeterSpec::new(beats, MeterSource::MidiMeta));
                } else if meter.map(|m| m.beats_per_measure) != Some(beats) {
                    warnings.push(format!(
                        "time signature change at tick {tick} ignored (segmentation uses the first)"
                    ));
                }
            }
            midi::Message::NoteOn {
                channel,
                pitch,
                velocity,
            } => {
                open.entry((channel, pitch))
                    .or_default()
                    .push_back((tick, velocity, track_idx));
            }
            midi::Message::NoteOff { channel, pitch } => {
                match open.get_mut(&(channel, pitch)).and_then(VecDeque::pop_front) {
                    Some((on_tick, velocity, _)) => {
                        notes.push((on_tick, tick, channel, pitch, velocity));
                    }
                    None => warnings.push(format!(
                        "unmatched note-off for pitch {pitch} on channel {channel} at tick {tick}"
                    )),
                }
            }
        }
    }

    for ((channel, pitch), queue) in open {
        for (on_tick, velocity, track_idx) in queue {
            let end = smf.tracks[track_idx].end_tick.max(on_tick);
            warnings.push(format!(
                "dangling note-on for pitch {pitch} on channel {channel} at tick {on_tick}, closed at track end"
            ));
            notes.push((on_tick, end, channel, pitch, velocity));
        }
    }

    let tempo = TempoMap::new(tempo_changes, smf.ppq);
    let ppq = i64::from(smf.ppq);
    let mut events: Vec<NoteEvent> = Vec::with_capacity(notes.len());
    for (on, off, channel, pitch, velocity) in notes {
        if off <= on {
            warnings.push(format!(
                "zero-duration note for pitch {pitch} at tick {on} dropped"
            ));
            continue;
        }
        let onset_seconds = tempo.seconds_at(on);
        events.push(NoteEvent {
            onset_beats: Beats::new(on as i64, ppq),
            duration_beats: Beats::new((off - on) as i64, ppq),
            channel,
            pitch,
            velocity,
            onset_seconds,
            duration_seconds: tempo.seconds_at(off) - onset_seconds,
            measure: None,
        });
    }
    events.sort_by(|a, b| {
        (a.onset_beats, a.pitch, a.channel, a.duration_beats).cmp(&(
            b.onset_beats,
            b.pitch,
            b.channel,
            b.duration_beats,
        ))
    });

    for w in &warnings {
        log::warn!("{w}");
    }

    Ok(ParsedPiece {
        events,
        meter,
        ppq: smf.ppq,
        format: smf.format,
        warnings,
    })
}

const PITCH_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Scientific pitch name for a MIDI pitch number; sharps for black keys.
pub fn pitch_name(pitch: u8) -> Result<String, IngestError> {
    if pitch > 127 {
        return Err(IngestError::PitchOutOfRange(pitch));
    }
    let octave = i32::from(pitch / 12) - 1;
    Ok(format!("{}{}", PITCH_NAMES[usize::from(pitch % 12)], octave))
}

/// Annotate events with 0-based measure indices.
///
/// `measure = floor((onset − pickup) / beats_per_measure)`, clamped at zero
/// so anacrusis events (onsets before the pickup offset) join the first full
/// measure.
pub fn assign_measures(events: &mut [NoteEvent], meter: &MeterSpec, pickup_beats: Beats) {
    debug_assert!(meter.beats_per_measure > Beats::zero());
    for ev in events {
        let idx = rational::floor_div(ev.onset_beats - pickup_beats, meter.beats_per_measure);
        ev.measure = Some(idx.max(0) as usize);
    }
}

pub const NOTE_CSV_HEADER: &str =
    "onset_beats,duration_beats,channel,pitch,velocity,onset_seconds,duration_seconds,measure";

/// Serialize the note table to CSV. Beats use the exact decimal / `n/d`
/// form; an unassigned measure is an empty field.
pub fn events_to_csv(events: &[NoteEvent]) -> String {
    let mut out = String::from(NOTE_CSV_HEADER);
    out.push('\n');
    for ev in events {
        let measure = ev.measure.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            rational::format_beats(ev.onset_beats),
            rational::format_beats(ev.duration_beats),
            ev.channel,
            ev.pitch,
            ev.velocity,
            ev.onset_seconds,
            ev.duration_seconds,
            measure
        ));
    }
    out
}

/// Inverse of [`events_to_csv`]; exact round-trip.
pub fn events_from_csv(text: &str) -> Result<Vec<NoteEvent>, IngestError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IngestError::Csv {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.trim() != NOTE_CSV_HEADER {
        return Err(IngestError::Csv {
            line: 1,
            message: format!("expected header `{NOTE_CSV_HEADER}`"),
        });
    }
    let mut events = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(IngestError::Csv {
                line: lineno,
                message: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let csv_err = |message: String| IngestError::Csv {
            line: lineno,
            message,
        };
        let beats = |s: &str| {
            rational::parse_beats(s).map_err(|e| csv_err(format!("bad beats value: {e}")))
        };
        events.push(NoteEvent {
            onset_beats: beats(fields[0])?,
            duration_beats: beats(fields[1])?,
            channel: fields[2]
                .parse()
                .map_err(|_| csv_err(format!("bad channel `{}`", fields[2])))?,
            pitch: fields[3]
                .parse()
                .map_err(|_| csv_err(format!("bad pitch `{}`", fields[3])))?,
            velocity: fields[4]
                .parse()
                .map_err(|_| csv_err(format!("bad velocity `{}`", fields[4])))?,
            onset_seconds: fields[5]
                .parse()
                .map_err(|_| csv_err(format!("bad onset_seconds `{}`", fields[5])))?,
            duration_seconds: fields[6]
                .parse()
                .map_err(|_| csv_err(format!("bad duration_seconds `{}`", fields[6])))?,
            measure: if fields[7].trim().is_empty() {
                None
            } else {
                Some(
                    fields[7]
                        .parse()
                        .map_err(|_| csv_err(format!("bad measure `{}`", fields[7])))?,
                )
            },
        });
    }
    Ok(events)
}
