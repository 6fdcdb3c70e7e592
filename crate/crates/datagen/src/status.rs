//! Per-capture status records: ego controls and speed, plus the world
//! conditions the frame was produced under.

use g2r_core::VehicleStatus;
use serde::{Deserialize, Serialize};

/// World conditions at capture time. The client knows these from its own
/// session configuration, no extra channel is needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldStatusRecord {
    pub weather: String,
    pub tick: u64,
    pub seed: u64,
    pub town_profile: String,
}

pub fn vehicle_json(status: &VehicleStatus) -> String {
    serde_json::to_string_pretty(status).expect("vehicle status serialize")
}

pub fn world_json(status: &WorldStatusRecord) -> String {
    serde_json::to_string_pretty(status).expect("world status serialize")
}
