//! Pluggable photorealism enhancement. The trait seam takes an assembled
//! enhancer input (color, one-hot semantics, stacked buffer streams) and
//! returns an enhanced color image. Ships a pass-through baseline, a
//! per-group color statistics matcher, reduced-precision emulation with
//! int8 calibration, and a deadline-guarded bridge to external peers.

pub mod enhancer;
pub mod error;
pub mod external;
pub mod precision;
pub mod stats;

pub use enhancer::{Enhancer, IdentityEnhancer};
pub use error::EnhanceError;
pub use external::{serve_peer, ExternalEnhancer};
pub use precision::{
    dequantize_int8, f16_round_trip, int8_round_trip, quantize_int8, Calibrator, Int8Params,
    PrecisionEmulator, PrecisionMode, SimulatedCost,
};
pub use stats::{ChannelStats, ColorStats, GroupStats, StatsAccumulator, StatsMatchEnhancer};
