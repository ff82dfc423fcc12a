use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{Event, Polarity};

/// Writes `t_us x y p` lines, one event per line.
pub struct TextEventWriter<W: Write> {
    out: W,
    count: u64,
}

impl<W: Write> TextEventWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, count: 0 }
    }

    pub fn write(&mut self, events: &[Event]) -> Result<()> {
        for e in events {
            writeln!(self.out, "{} {} {} {}", e.t, e.x, e.y, e.polarity.sign())?;
        }
        self.count += events.len() as u64;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_events_text<W: Write>(events: &[Event], out: W) -> Result<()> {
    let mut w = TextEventWriter::new(out);
    w.write(events)?;
    w.finish()?;
    Ok(())
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::MalformedRecord {
        line,
        reason: format!("missing {name}"),
    })?;
    tok.parse().map_err(|_| Error::MalformedRecord {
        line,
        reason: format!("bad {name} `{tok}`"),
    })
}

/// Parses the text format. Blank lines are skipped; timestamps must not
/// decrease.
pub fn read_events_text<R: BufRead>(input: R) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    let mut last = 0u64;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split_ascii_whitespace();
        let t: u64 = field(toks.next(), n, "timestamp")?;
        let x: u16 = field(toks.next(), n, "x")?;
        let y: u16 = field(toks.next(), n, "y")?;
        let p: i64 = field(toks.next(), n, "polarity")?;
        if toks.next().is_some() {
            return Err(Error::MalformedRecord {
                line: n,
                reason: "trailing fields".into(),
            });
        }
        let polarity = Polarity::from_sign(p).ok_or_else(|| Error::MalformedRecord {
            line: n,
            reason: format!("polarity must be 1 or -1, got {p}"),
        })?;
        if t < last {
            return Err(Error::MalformedRecord {
                line: n,
                reason: format!("timestamp {t} precedes {last}"),
            });
        }
        last = t;
        events.push(Event::new(t, x, y, polarity));
    }
    Ok(events)
}
