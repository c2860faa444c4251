//! Byte-level standard MIDI file writer.
//!
//! Deliberately independent of the parser it is used to test: events are
//! serialized straight from tick arithmetic with no shared code. Supports
//! format 0 (single track) and format 1 (meta track + one track per channel).

/// One note to be emitted as a note-on/note-off pair.
#[derive(Debug, Clone, Copy)]
pub struct NoteSpec {
    pub onset_ticks: u32,
    pub duration_ticks: u32,
    pub channel: u8,
    pub pitch: u8,
    pub velocity: u8,
}

/// A complete score to serialize.
#[derive(Debug, Clone)]
pub struct ScoreSpec {
    pub ppq: u16,
    /// Time signature as (numerator, denominator), e.g. (4, 4) or (6, 8).
    pub time_signature: Option<(u8, u8)>,
    /// Tempo in microseconds per quarter note.
    pub tempo_us_per_qn: Option<u32>,
    pub notes: Vec<NoteSpec>,
}

impl ScoreSpec {
    pub fn new(ppq: u16) -> Self {
        ScoreSpec {
            ppq,
            time_signature: None,
            tempo_us_per_qn: None,
            notes: Vec::new(),
        }
    }

    pub fn time_signature(mut self, numerator: u8, denominator: u8) -> Self {
        self.time_signature = Some((numerator, denominator));
        self
    }

    pub fn tempo(mut self, us_per_qn: u32) -> Self {
        self.tempo_us_per_qn = Some(us_per_qn);
        self
    }

    /// Add a note with onset/duration given in beats as a fraction (num/den).
    /// Panics if the tick count is not exact for this ppq.
    pub fn note_beats(
        mut self,
        onset: (u32, u32),
        duration: (u32, u32),
        pitch: u8,
        velocity: u8,
    ) -> Self {
        let ticks = |(num, den): (u32, u32)| -> u32 {
            let t = u64::from(num) * u64::from(self.ppq);
            assert!(
                t % u64::from(den) == 0,
                "beats {num}/{den} not representable at ppq {}",
                self.ppq
            );
            (t / u64::from(den)) as u32
        };
        self.notes.push(NoteSpec {
            onset_ticks: ticks(onset),
            duration_ticks: ticks(duration),
            channel: 0,
            pitch,
            velocity,
        });
        self
    }

    pub fn note_ticks(mut self, note: NoteSpec) -> Self {
        self.notes.push(note);
        self
    }
}

fn push_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// Encode a variable-length quantity, most significant septet first.
pub fn push_vlq(out: &mut Vec<u8>, mut v: u32) {
    let mut stack = [0u8; 5];
    let mut n = 0;
    loop {
        stack[n] = (v & 0x7f) as u8;
        v >>= 7;
        n += 1;
        if v == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        let mut byte = stack[i];
        if i != 0 {
            byte |= 0x80;
        }
        out.push(byte);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // Variant order doubles as the tie-break at equal ticks: meta events first,
    // then note-offs before note-ons so back-to-back repeats stay well formed.
    Meta,
    NoteOff,
    NoteOn,
}

#[derive(Debug, Clone)]
struct TrackEvent {
    tick: u32,
    kind: EventKind,
    bytes: Vec<u8>,
}

fn serialize_track(mut events: Vec<TrackEvent>, end_tick: u32) -> Vec<u8> {
    events.sort_by_key(|a| (a.tick, a.kind));
    let mut body = Vec::new();
    let mut cursor = 0u32;
    for ev in &events {
        push_vlq(&mut body, ev.tick - cursor);
        body.extend_from_slice(&ev.bytes);
        cursor = ev.tick;
    }
    // end of track
    push_vlq(&mut body, end_tick.saturating_sub(cursor));
    body.extend_from_slice(&[0xff, 0x2f, 0x00]);

    let mut out = Vec::new();
    out.extend_from_slice(b"MTrk");
    push_u32(&mut out, body.len() as u32);
    out.extend_from_slice(&body);
    out
}

fn meta_events(spec: &ScoreSpec) -> Vec<TrackEvent> {
    let mut events = Vec::new();
    if let Some((nn, dd)) = spec.time_signature {
        let pow = dd.trailing_zeros() as u8;
        assert_eq!(1u8 << pow, dd, "time signature denominator must be a power of two");
        events.push(TrackEvent {
            tick: 0,
            kind: EventKind::Meta,
            bytes: vec![0xff, 0x58, 0x04, nn, pow, 24, 8],
        });
    }
    if let Some(tempo) = spec.tempo_us_per_qn {
        let b = tempo.to_be_bytes();
        events.push(TrackEvent {
            tick: 0,
            kind: EventKind::Meta,
            bytes: vec![0xff, 0x51, 0x03, b[1], b[2], b[3]],
        });
    }
    events
}

fn note_events(notes: &[NoteSpec]) -> Vec<TrackEvent> {
    let mut events = Vec::new();
    for n in notes {
        events.push(TrackEvent {
            tick: n.onset_ticks,
            kind: EventKind::NoteOn,
            bytes: vec![0x90 | (n.channel & 0x0f), n.pitch, n.velocity.max(1)],
        });
        events.push(TrackEvent {
            tick: n.onset_ticks + n.duration_ticks,
            kind: EventKind::NoteOff,
            bytes: vec![0x80 | (n.channel & 0x0f), n.pitch, 0x40],
        });
    }
    events
}

fn header(format: u16, ntrks: u16, ppq: u16) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"MThd");
    push_u32(&mut out, 6);
    push_u16(&mut out, format);
    push_u16(&mut out, ntrks);
    push_u16(&mut out, ppq);
    out
}

fn max_tick(spec: &ScoreSpec) -> u32 {
    spec.notes
        .iter()
        .map(|n| n.onset_ticks + n.duration_ticks)
        .max()
        .unwrap_or(0)
}

/// Serialize as a format-0 file: all events on one track.
pub fn write_format0(spec: &ScoreSpec) -> Vec<u8> {
    let mut events = meta_events(spec);
    events.extend(note_events(&spec.notes));
    let mut out = header(0, 1, spec.ppq);
    out.extend(serialize_track(events, max_tick(spec)));
    out
}

/// Serialize as a format-1 file: track 0 carries the meta events, then one
/// track per channel present in the score (ascending channel order).
pub fn write_format1(spec: &ScoreSpec) -> Vec<u8> {
    let mut channels: Vec<u8> = spec.notes.iter().map(|n| n.channel).collect();
    channels.sort_unstable();
    channels.dedup();
    if channels.is_empty() {
        channels.push(0);
    }

    let end = max_tick(spec);
    let mut tracks = vec![serialize_track(meta_events(spec), end)];
    for ch in &channels {
        let notes: Vec<NoteSpec> = spec
            .notes
            .iter()
            .copied()
            .filter(|n| n.channel == *ch)
            .collect();
        tracks.push(serialize_track(note_events(&notes), end));
    }

    let mut out = header(1, tracks.len() as u16, spec.ppq);
    for t in tracks {
        out.extend(t);
    }
    out
}
