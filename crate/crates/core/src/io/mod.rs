pub mod render;
pub mod rulefile;
pub mod tracefile;

pub use render::{render_frame, FrameFormat, Viewport};
pub use rulefile::{parse_rule_file, serialize_rule_set};
pub use tracefile::{parse_trace, serialize_trace, TraceFile, TraceHeader};
