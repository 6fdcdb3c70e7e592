//! Binary protocol between the engine service and its consumers.
//!
//! Every message is a fixed 32-byte little-endian header followed by an
//! opaque payload whose length the header declares. The same framing runs
//! over TCP and over the in-process byte-channel transport, so tests and
//! production traffic exercise one codec.
//!
//! Header layout (all integers little-endian):
//!
//! ```text
//! offset size field
//!      0    4 magic "G2RL"
//!      4    2 version (currently 1)
//!      6    1 message kind
//!      7    1 sensor channel (sensor frames, else 0)
//!      8    1 aux: buffer code or stream group (sensor frames, else 0)
//!      9    1 channel count (sensor frames, else 0)
//!     10    1 sample precision (sensor frames, else 0)
//!     11    1 reserved, must be 0
//!     12    8 frame id
//!     20    4 payload length in bytes
//!     24    4 width
//!     28    4 height
//! ```

pub mod error;
pub mod header;
pub mod message;
pub mod transport;

pub use error::WireError;
pub use header::{MessageKind, SensorChannel, WireHeader, HEADER_LEN, MAGIC, MAX_PAYLOAD, VERSION};
pub use message::{
    decode_message, encode_message, read_message, write_message, ControlCommand, Hello, Message,
    SensorFrame, SensorSelect, ServiceMode,
};
pub use transport::{
    in_process_pair, tcp_split, InProcSink, InProcSource, MessageSink, MessageSource, TcpSink,
    TcpSource,
};
