mod constraints;
mod interval;
mod line;
mod scan;

pub use constraints::*;
pub use interval::{Interval, IntervalSet};
pub use line::{compute_line, LineSlice};
pub use scan::{scan_oracle, EventReplay};
