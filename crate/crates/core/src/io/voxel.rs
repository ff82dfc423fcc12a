use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::model::Event;

pub const VOXEL_MAGIC: [u8; 4] = *b"VXG1";

/// `depth` time slices of polarity-summed events, slice-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub height: usize,
    pub width: usize,
    pub depth: usize,
    pub data: Vec<f32>,
    /// Exposure of one slice, `(N / R) / D`, seconds.
    pub slice_duration: f64,
    /// Mean event rate `R` of the window, events per second.
    pub event_rate: f64,
}

impl VoxelGrid {
    #[inline]
    pub fn index(&self, slice: usize, y: usize, x: usize) -> usize {
        (slice * self.height + y) * self.width + x
    }

    pub fn get(&self, slice: usize, y: usize, x: usize) -> f32 {
        self.data[self.index(slice, y, x)]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }
}

/// Histograms a window of exactly `n` events into `depth` equal time slices.
///
/// Slices are half-open except the last, which includes the final event.
pub fn build_voxel_grid(events: &[Event], height: usize, width: usize, depth: usize, n: usize) -> Result<VoxelGrid> {
    if n == 0 {
        return Err(invalid("voxel window needs N > 0 events"));
    }
    if events.len() != n {
        return Err(invalid(format!(
            "expected a window of {n} events, got {}",
            events.len()
        )));
    }
    if depth == 0 || height == 0 || width == 0 {
        return Err(invalid("voxel grid dimensions must be non-zero"));
    }
    let t0 = events[0].t;
    let t1 = events[events.len() - 1].t;
    if t1 < t0 {
        return Err(invalid("events must be time-ordered"));
    }
    let span = t1 - t0;
    if span == 0 && depth > 1 {
        return Err(invalid("zero time span cannot be split into several slices"));
    }
    let mut data = vec![0f32; depth * height * width];
    for e in events {
        let (x, y) = (e.x as usize, e.y as usize);
        if x >= width || y >= height {
            return Err(invalid(format!("event at ({x}, {y}) outside {width}x{height}")));
        }
        if e.t < t0 || e.t > t1 {
            return Err(invalid("events must be time-ordered"));
        }
        let slice = if span == 0 {
            0
        } else {
            (((e.t - t0) as u128 * depth as u128 / span as u128) as usize).min(depth - 1)
        };
        data[(slice * height + y) * width + x] += e.polarity.sign() as f32;
    }
    let span_s = span as f64 * 1e-6;
    let event_rate = n as f64 / span_s;
    let slice_duration = if span == 0 {
        0.0
    } else {
        n as f64 / event_rate / depth as f64
    };
    Ok(VoxelGrid {
        height,
        width,
        depth,
        data,
        slice_duration,
        event_rate,
    })
}

/// Header (magic, u16 H, u16 W, u16 D, 6 zero bytes) then little-endian f32 cells.
pub fn write_voxel_grid<W: Write>(grid: &VoxelGrid, mut out: W) -> Result<()> {
    let dim = |v: usize, name: &str| -> Result<u16> {
        u16::try_from(v).map_err(|_| invalid(format!("{name} {v} does not fit the voxel header")))
    };
    let mut header = [0u8; 16];
    header[..4].copy_from_slice(&VOXEL_MAGIC);
    header[4..6].copy_from_slice(&dim(grid.height, "height")?.to_le_bytes());
    header[6..8].copy_from_slice(&dim(grid.width, "width")?.to_le_bytes());
    header[8..10].copy_from_slice(&dim(grid.depth, "depth")?.to_le_bytes());
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(grid.data.len() * 4);
    for v in &grid.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Reads a voxel file. Timing fields are not stored and come back as 0.
pub fn read_voxel_grid<R: Read>(mut input: R) -> Result<VoxelGrid> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    let magic: [u8; 4] = header[..4].try_into().unwrap();
    if magic != VOXEL_MAGIC {
        return Err(Error::BadMagic {
            expected: VOXEL_MAGIC,
            found: magic,
        });
    }
    let height = u16::from_le_bytes([header[4], header[5]]) as usize;
    let width = u16::from_le_bytes([header[6], header[7]]) as usize;
    let depth = u16::from_le_bytes([header[8], header[9]]) as usize;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let cells = height * width * depth;
    if payload.len() != cells * 4 {
        return Err(invalid(format!(
            "voxel payload is {} bytes, expected {}",
            payload.len(),
            cells * 4
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(VoxelGrid {
        height,
        width,
        depth,
        data,
        slice_duration: 0.0,
        event_rate: 0.0,
    })
}
