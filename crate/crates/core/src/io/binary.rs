use std::io::{Read, Seek, SeekFrom, Write};

use crate::error::{invalid, Error, Result};
use crate::model::{Event, Polarity};

pub const EVENT_MAGIC: [u8; 4] = *b"EVG1";
pub const HEADER_LEN: usize = 16;
/// u64 timestamp, u16 x, u16 y, i8 polarity.
pub const RECORD_LEN: usize = 13;

/// Fixed 16-byte header: magic, sensor width and height, event count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventFileHeader {
    pub width: u16,
    pub height: u16,
    pub event_count: u64,
}

impl EventFileHeader {
    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..4].copy_from_slice(&EVENT_MAGIC);
        b[4..6].copy_from_slice(&self.width.to_le_bytes());
        b[6..8].copy_from_slice(&self.height.to_le_bytes());
        b[8..16].copy_from_slice(&self.event_count.to_le_bytes());
        b
    }

    fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self> {
        let magic: [u8; 4] = b[..4].try_into().unwrap();
        if magic != EVENT_MAGIC {
            return Err(Error::BadMagic {
                expected: EVENT_MAGIC,
                found: magic,
            });
        }
        Ok(Self {
            width: u16::from_le_bytes([b[4], b[5]]),
            height: u16::from_le_bytes([b[6], b[7]]),
            event_count: u64::from_le_bytes(b[8..16].try_into().unwrap()),
        })
    }
}

fn encode(e: &Event) -> [u8; RECORD_LEN] {
    let mut r = [0u8; RECORD_LEN];
    r[..8].copy_from_slice(&e.t.to_le_bytes());
    r[8..10].copy_from_slice(&e.x.to_le_bytes());
    r[10..12].copy_from_slice(&e.y.to_le_bytes());
    r[12] = e.polarity.sign() as u8;
    r
}

/// Streaming binary writer. The event count in the header is patched in
/// [`finish`](Self::finish).
pub struct BinaryEventWriter<W: Write + Seek> {
    out: W,
    header: EventFileHeader,
    last_t: u64,
}

impl<W: Write + Seek> BinaryEventWriter<W> {
    pub fn new(mut out: W, width: u16, height: u16) -> Result<Self> {
        let header = EventFileHeader {
            width,
            height,
            event_count: 0,
        };
        out.write_all(&header.to_bytes())?;
        Ok(Self { out, header, last_t: 0 })
    }

    pub fn write(&mut self, events: &[Event]) -> Result<()> {
        let mut buf = Vec::with_capacity(events.len() * RECORD_LEN);
        for e in events {
            if e.x >= self.header.width || e.y >= self.header.height {
                return Err(invalid(format!(
                    "event at ({}, {}) outside {}x{} sensor",
                    e.x, e.y, self.header.width, self.header.height
                )));
            }
            if e.t < self.last_t {
                return Err(invalid(format!("event time {} precedes {}", e.t, self.last_t)));
            }
            self.last_t = e.t;
            buf.extend_from_slice(&encode(e));
        }
        self.out.write_all(&buf)?;
        self.header.event_count += events.len() as u64;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.header.event_count
    }

    pub fn finish(mut self) -> Result<W> {
        let end = self.out.stream_position()?;
        self.out.seek(SeekFrom::Start(0))?;
        self.out.write_all(&self.header.to_bytes())?;
        self.out.seek(SeekFrom::Start(end))?;
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_events_binary<W: Write + Seek>(events: &[Event], width: u16, height: u16, out: W) -> Result<()> {
    let mut w = BinaryEventWriter::new(out, width, height)?;
    w.write(events)?;
    w.finish()?;
    Ok(())
}

/// Reads and validates a binary event file.
pub fn read_events_binary<R: Read>(mut input: R) -> Result<(EventFileHeader, Vec<Event>)> {
    let mut hb = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match input.read(&mut hb[got..])? {
            0 => {
                return Err(invalid(format!("file too short for header ({got} bytes)")));
            }
            n => got += n,
        }
    }
    let header = EventFileHeader::from_bytes(&hb)?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let expected = header.event_count.saturating_mul(RECORD_LEN as u64);
    if (payload.len() as u64) < expected {
        return Err(Error::Truncated {
            declared: header.event_count,
            available: (payload.len() / RECORD_LEN) as u64,
        });
    }
    if payload.len() as u64 > expected {
        return Err(invalid(format!(
            "payload holds {} bytes beyond the declared {} events",
            payload.len() as u64 - expected,
            header.event_count
        )));
    }
    let mut events = Vec::with_capacity(header.event_count as usize);
    let mut last = 0u64;
    for (i, r) in payload.chunks_exact(RECORD_LEN).enumerate() {
        let t = u64::from_le_bytes(r[..8].try_into().unwrap());
        let x = u16::from_le_bytes([r[8], r[9]]);
        let y = u16::from_le_bytes([r[10], r[11]]);
        let bad = |reason: String| Error::MalformedRecord { line: i, reason };
        let polarity =
            Polarity::from_sign(r[12] as i8 as i64).ok_or_else(|| bad(format!("polarity byte {}", r[12])))?;
        if x >= header.width || y >= header.height {
            return Err(bad(format!("coordinate ({x}, {y}) outside sensor")));
        }
        if t < last {
            return Err(bad(format!("timestamp {t} precedes {last}")));
        }
        last = t;
        events.push(Event::new(t, x, y, polarity));
    }
    Ok((header, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn to_bytes(events: &[Event], w: u16, h: u16) -> Vec<u8> {
        let mut c = Cursor::new(Vec::new());
        write_events_binary(events, w, h, &mut c).unwrap();
        c.into_inner()
    }

    #[test]
    fn sizes() {
        assert_eq!(to_bytes(&[], 10, 10).len(), 16);
        let one = to_bytes(&[Event::new(1000, 5, 7, Polarity::On)], 10, 10);
        assert_eq!(one.len(), 29);
        assert_eq!(&one[..4], b"EVG1");
        assert_eq!(u64::from_le_bytes(one[8..16].try_into().unwrap()), 1);
        assert_eq!(one[28], 1);
    }

    #[test]
    fn roundtrip_small() {
        let ev = vec![
            Event::new(1, 0, 0, Polarity::Off),
            Event::new(1, 3, 2, Polarity::On),
            Event::new(9_000_000_000, 345, 259, Polarity::Off),
        ];
        let (h, back) = read_events_binary(&to_bytes(&ev, 346, 260)[..]).unwrap();
        assert_eq!((h.width, h.height, h.event_count), (346, 260, 3));
        assert_eq!(back, ev);
    }

    #[test]
    fn rejects_corruption() {
        let ev = vec![Event::new(5, 1, 1, Polarity::On), Event::new(6, 1, 1, Polarity::Off)];
        let good = to_bytes(&ev, 4, 4);

        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(read_events_binary(&magic[..]), Err(Error::BadMagic { .. })));

        let short = &good[..good.len() - 3];
        assert!(matches!(read_events_binary(short), Err(Error::Truncated { .. })));
        let shorter = &good[..good.len() - RECORD_LEN];
        assert!(matches!(read_events_binary(shorter), Err(Error::Truncated { .. })));

        let mut extra = good.clone();
        extra.push(0);
        assert!(read_events_binary(&extra[..]).is_err());

        let mut disorder = good.clone();
        disorder[16..24].copy_from_slice(&100u64.to_le_bytes());
        assert!(matches!(
            read_events_binary(&disorder[..]),
            Err(Error::MalformedRecord { .. })
        ));

        let mut pol = good.clone();
        pol[28] = 0;
        assert!(read_events_binary(&pol[..]).is_err());

        assert!(read_events_binary(&good[..10]).is_err());
    }

    #[test]
    fn writer_validates() {
        let mut c = Cursor::new(Vec::new());
        let mut w = BinaryEventWriter::new(&mut c, 2, 2).unwrap();
        assert!(w.write(&[Event::new(1, 2, 0, Polarity::On)]).is_err());
        w.write(&[Event::new(5, 0, 0, Polarity::On)]).unwrap();
        assert!(w.write(&[Event::new(4, 0, 0, Polarity::On)]).is_err());
    }
}
