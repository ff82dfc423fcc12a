//! Event stream files, event-frame rendering and voxel grids.

mod binary;
mod render;
mod text;
mod voxel;

pub use binary::{
    read_events_binary, write_events_binary, BinaryEventWriter, EventFileHeader, EVENT_MAGIC, HEADER_LEN, RECORD_LEN,
};
pub use render::{render_event_frame, render_windows, EventFrame};
pub use text::{read_events_text, write_events_text, TextEventWriter};
pub use voxel::{build_voxel_grid, read_voxel_grid, write_voxel_grid, VoxelGrid, VOXEL_MAGIC};
