//! Standard MIDI file (SMF) chunk and event parsing.
//!
//! Only what the note table needs survives the parse: note-on/note-off,
//! tempo, and time-signature meta events, each stamped with its absolute
//! tick. Everything else (controllers, sysex, other metas) is length-decoded
//! and skipped. Errors carry the byte offset where decoding failed.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MidiError {
    #[error("not a standard MIDI file: missing MThd at byte {offset}")]
    NotAMidiFile { offset: usize },
    #[error("truncated file at byte {offset} while reading {context}")]
    Truncated { offset: usize, context: &'static str },
    #[error("bad MThd length {length} at byte {offset}")]
    BadHeaderLength { offset: usize, length: u32 },
    #[error("unsupported MIDI format {format} (only 0 and 1 are accepted)")]
    UnsupportedFormat { format: u16 },
    #[error("SMPTE time division at byte {offset} is unsupported (beats require PPQ division)")]
    SmpteDivision { offset: usize },
    #[error("invalid zero PPQ division at byte {offset}")]
    ZeroDivision { offset: usize },
    #[error("file contains no MTrk chunks")]
    NoTracks,
    #[error("data byte {byte:#04x} at byte {offset} where a status byte was expected and no running status is active")]
    MissingStatus { offset: usize, byte: u8 },
    #[error("invalid data byte {byte:#04x} at byte {offset}")]
    BadDataByte { offset: usize, byte: u8 },
    #[error("unknown status byte {status:#04x} at byte {offset}")]
    BadStatus { offset: usize, status: u8 },
}

/// Channel/meta content we keep, stripped to the fields used downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    NoteOn { channel: u8, pitch: u8, velocity: u8 },
    NoteOff { channel: u8, pitch: u8 },
    Tempo { us_per_quarter: u32 },
    /// Numerator and denominator exponent from the time-signature meta:
    /// the musical denominator is `2^denom_pow`.
    TimeSignature { numerator: u8, denom_pow: u8 },
}

#[derive(Debug, Clone, Copy)]
pub struct TimedMessage {
    pub tick: u64,
    pub message: Message,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub events: Vec<TimedMessage>,
    /// Tick of the end-of-track meta (or of the last event when absent);
    /// dangling note-ons are closed here.
    pub end_tick: u64,
}

#[derive(Debug, Clone)]
pub struct Smf {
    pub format: u16,
    pub ppq: u16,
    pub tracks: Vec<Track>,
    pub warnings: Vec<String>,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    fn u8(&mut self, context: &'static str) -> Result<u8, MidiError> {
        let b = *self.data.get(self.pos).ok_or(MidiError::Truncated {
            offset: self.pos,
            context,
        })?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self, context: &'static str) -> Result<u16, MidiError> {
        Ok(u16::from_be_bytes([self.u8(context)?, self.u8(context)?]))
    }

    fn u32(&mut self, context: &'static str) -> Result<u32, MidiError> {
        let b = self.bytes(4, context)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn bytes(&mut self, n: usize, context: &'static str) -> Result<&'a [u8], MidiError> {
        if self.remaining() < n {
            return Err(MidiError::Truncated {
                offset: self.pos,
                context,
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn vlq(&mut self, context: &'static str) -> Result<u32, MidiError> {
        let mut value: u32 = 0;
        for _ in 0..4 {
            let b = self.u8(context)?;
            value = (value << 7) | u32::from(b & 0x7f);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(MidiError::BadDataByte {
            offset: self.pos - 1,
            byte: self.data[self.pos - 1],
        })
    }

    fn data_byte(&mut self, context: &'static str) -> Result<u8, MidiError> {
        let offset = self.pos;
        let b = self.u8(context)?;
        if b & 0x80 != 0 {
            return Err(MidiError::BadDataByte { offset, byte: b });
        }
        Ok(b)
    }
}

/// Parse the chunk structure of an SMF byte stream.
pub fn parse(bytes: &[u8]) -> Result<Smf, MidiError> {
    let mut r = Reader::new(bytes);
    let mut warnings = Vec::new();

    let magic = r.bytes(4, "MThd magic").map_err(|_| MidiError::NotAMidiFile { offset: 0 })?;
    if magic != b"MThd" {
        return Err(MidiError::NotAMidiFile { offset: 0 });
    }
    let header_len_offset = r.pos;
    let header_len = r.u32("MThd length")?;
    if header_len < 6 {
        return Err(MidiError::BadHeaderLength {
            offset: header_len_offset,
            length: header_len,
        });
    }
    let format = r.u16("format")?;
    if format > 1 {
        return Err(MidiError::UnsupportedFormat { format });
    }
    let declared_tracks = r.u16("track count")?;
    let division_offset = r.pos;
    let division = r.u16("division")?;
    if division & 0x8000 != 0 {
        return Err(MidiError::SmpteDivision {
            offset: division_offset,
        });
    }
    if division == 0 {
        return Err(MidiError::ZeroDivision {
            offset: division_offset,
        });
    }
    // tolerate (and skip) header bytes beyond the standard six
    r.bytes(header_len as usize - 6, "MThd extension")?;

    let mut tracks = Vec::new();
    while r.remaining() > 0 {
        let chunk_offset = r.pos;
        let fourcc = r.bytes(4, "chunk type")?.to_vec();
        let length = r.u32("chunk length")? as usize;
        let body = r.bytes(length, "chunk body")?;
        if fourcc == b"MTrk" {
            tracks.push(parse_track(body, chunk_offset + 8, &mut warnings)?);
        } else {
            warnings.push(format!(
                "skipping unknown chunk `{}` at byte {chunk_offset}",
                String::from_utf8_lossy(&fourcc)
            ));
        }
    }

    if tracks.is_empty() {
        return Err(MidiError::NoTracks);
    }
    if tracks.len() != declared_tracks as usize {
        warnings.push(format!(
            "header declares {declared_tracks} tracks, found {}",
            tracks.len()
        ));
    }

    Ok(Smf {
        format,
        ppq: division,
        tracks,
        warnings,
    })
}

/// Decode one MTrk body. `base` is the chunk body's offset in the whole file,
/// so reported error offsets are file positions.
fn parse_track(body: &[u8], base: usize, warnings: &mut Vec<String>) -> Result<Track, MidiError> {
    let mut r = Reader::new(body);
    let mut events = Vec::new();
    let mut tick: u64 = 0;
    let mut running_status: Option<u8> = None;
    let mut saw_end = false;

    while r.remaining() > 0 {
        let delta = r.vlq("delta time").map_err(|e| offset_err(e, base))?;
        tick += u64::from(delta);

        let status_offset = base + r.pos;
        let first = r.u8("event status").map_err(|e| offset_err(e, base))?;
        let (status, first_data) = if first & 0x80 != 0 {
            (first, None)
        } else {
            let Some(rs) = running_status else {
                return Err(MidiError::MissingStatus {
                    offset: status_offset,
                    byte: first,
                });
            };
            (rs, Some(first))
        };

        match status {
            0x80..=0xef => {
                running_status = Some(status);
                let kind = status & 0xf0;
                let channel = status & 0x0f;
                let d1 = match first_data {
                    Some(b) => b,
                    None => r.data_byte("data byte").map_err(|e| offset_err(e, base))?,
                };
                let d2 = if matches!(kind, 0xc0 | 0xd0) {
                    0
                } else {
                    r.data_byte("data byte").map_err(|e| offset_err(e, base))?
                };
                match kind {
                    0x90 if d2 > 0 => events.push(TimedMessage {
                        tick,
                        message: Message::NoteOn {
                            channel,
                            pitch: d1,
                            velocity: d2,
                        },
                    }),
                    // note-on with velocity 0 is a note-off by convention
                    0x80 | 0x90 => events.push(TimedMessage {
                        tick,
                        message: Message::NoteOff { channel, pitch: d1 },
                    }),
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                running_status = None;
                let len = r.vlq("sysex length").map_err(|e| offset_err(e, base))?;
                r.bytes(len as usize, "sysex body")
                    .map_err(|e| offset_err(e, base))?;
            }
            0xff => {
                running_status = None;
                let meta_type = r.u8("meta type").map_err(|e| offset_err(e, base))?;
                let len = r.vlq("meta length").map_err(|e| offset_err(e, base))? as usize;
                let data = r.bytes(len, "meta body").map_err(|e| offset_err(e, base))?;
                match meta_type {
                    0x2f => {
                        saw_end = true;
                        if r.remaining() > 0 {
                            warnings.push(format!(
                                "{} bytes after end-of-track at byte {} ignored",
                                r.remaining(),
                                base + r.pos
                            ));
                        }
                        break;
                    }
                    0x51 if len >= 3 => events.push(TimedMessage {
                        tick,
                        message: Message::Tempo {
                            us_per_quarter: u32::from(data[0]) << 16
                                | u32::from(data[1]) << 8
                                | u32::from(data[2]),
                        },
                    }),
                    0x58 if len >= 2 => events.push(TimedMessage {
                        tick,
                        message: Message::TimeSignature {
                            numerator: data[0],
                            denom_pow: data[1],
                        },
                    }),
                    _ => {}
                }
            }
            _ => {
                return Err(MidiError::BadStatus {
                    offset: status_offset,
                    status,
                });
            }
        }
    }

    if !saw_end {
        warnings.push(format!(
            "track chunk at byte {} has no end-of-track meta",
            base - 8
        ));
    }
    Ok(Track {
        end_tick: tick,
        events,
    })
}

fn offset_err(e: MidiError, base: usize) -> MidiError {
    match e {
        MidiError::Truncated { offset, context } => MidiError::Truncated {
            offset: offset + base,
            context,
        },
        MidiError::BadDataByte { offset, byte } => MidiError::BadDataByte {
            offset: offset + base,
            byte,
        },
        other => other,
    }
}
