use crate::model::Event;

/// Signed per-pixel event count over a time window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<i32>,
    pub start_us: u64,
    pub end_us: u64,
}

impl EventFrame {
    fn empty(width: usize, height: usize, start_us: u64, end_us: u64) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
            start_us,
            end_us,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.data[y * self.width + x]
    }

    /// Gray rendering: 128 is zero, each count moves `step` levels.
    pub fn to_gray8(&self, step: i32) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (128 + v * step).clamp(0, 255) as u8)
            .collect()
    }

    fn accumulate(&mut self, events: &[Event]) {
        for e in events {
            if e.t < self.start_us || e.t >= self.end_us {
                continue;
            }
            let (x, y) = (e.x as usize, e.y as usize);
            if x < self.width && y < self.height {
                self.data[y * self.width + x] += e.polarity.sign() as i32;
            }
        }
    }
}

fn seconds_to_us(s: f64) -> u64 {
    (s * 1e6).round().max(0.0) as u64
}

/// Polarity histogram of events with `start <= t < start + len` (seconds).
pub fn render_event_frame(
    events: &[Event],
    window_start: f64,
    window_len: f64,
    height: usize,
    width: usize,
) -> EventFrame {
    assert!(window_len > 0.0, "window length must be positive");
    let start = seconds_to_us(window_start);
    let end = start + seconds_to_us(window_len).max(1);
    let mut f = EventFrame::empty(width, height, start, end);
    f.accumulate(events);
    f
}

/// Consecutive non-overlapping windows of `window_len` seconds starting at the
/// first event, covering the whole (time-ordered) stream.
pub fn render_windows(events: &[Event], window_len: f64, height: usize, width: usize) -> Vec<EventFrame> {
    assert!(window_len > 0.0, "window length must be positive");
    let (Some(first), Some(last)) = (events.first(), events.last()) else {
        return Vec::new();
    };
    let len = seconds_to_us(window_len).max(1);
    let t0 = first.t;
    let count = ((last.t - t0) / len + 1) as usize;
    let mut frames: Vec<EventFrame> = (0..count as u64)
        .map(|k| EventFrame::empty(width, height, t0 + k * len, t0 + (k + 1) * len))
        .collect();
    for e in events {
        let k = ((e.t - t0) / len) as usize;
        frames[k].accumulate(std::slice::from_ref(e));
    }
    frames
}
