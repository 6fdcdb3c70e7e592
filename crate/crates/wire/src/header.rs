//! The fixed 32-byte frame header.

use g2r_core::{GBufferId, Precision, GROUP_COUNT};

use crate::error::WireError;

pub const MAGIC: [u8; 4] = *b"G2RL";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

/// Upper bound on a declared payload. Guards allocation against corrupted
/// or hostile length fields; generous enough for full-resolution stacks.
pub const MAX_PAYLOAD: u32 = 256 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    Hello,
    TickRequest,
    TickAck,
    SensorData,
    Control,
    Bye,
}

impl MessageKind {
    pub fn code(self) -> u8 {
        match self {
            MessageKind::Hello => 0,
            MessageKind::TickRequest => 1,
            MessageKind::TickAck => 2,
            MessageKind::SensorData => 3,
            MessageKind::Control => 4,
            MessageKind::Bye => 5,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, WireError> {
        Ok(match code {
            0 => MessageKind::Hello,
            1 => MessageKind::TickRequest,
            2 => MessageKind::TickAck,
            3 => MessageKind::SensorData,
            4 => MessageKind::Control,
            5 => MessageKind::Bye,
            other => return Err(WireError::UnknownKind(other)),
        })
    }
}

/// What a sensor frame carries. The aux header byte disambiguates buffers
/// and stream groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorChannel {
    /// Tone-mapped color image, interleaved.
    Rgb,
    /// One deferred-rendering buffer, interleaved.
    GBuffer(GBufferId),
    /// Planar one-hot group masks, one byte per pixel per group.
    OneHot,
    /// Lidar sweep; each return is a fixed 24-byte record.
    Lidar,
    /// Ego vehicle state, four f32 values.
    VehicleStatus,
    /// Per-group stacked tensor, channel-major. Aux byte is the group.
    Stream(u8),
    /// Per-pixel actor ids, eight bytes per pixel.
    ActorIds,
}

impl SensorChannel {
    pub fn code(self) -> u8 {
        match self {
            SensorChannel::Rgb => 0,
            SensorChannel::GBuffer(_) => 1,
            SensorChannel::OneHot => 2,
            SensorChannel::Lidar => 3,
            SensorChannel::VehicleStatus => 4,
            SensorChannel::Stream(_) => 5,
            SensorChannel::ActorIds => 6,
        }
    }

    pub fn aux(self) -> u8 {
        match self {
            SensorChannel::GBuffer(id) => id.code(),
            SensorChannel::Stream(group) => group,
            _ => 0,
        }
    }

    pub fn from_codes(code: u8, aux: u8) -> Result<Self, WireError> {
        Ok(match code {
            0 => SensorChannel::Rgb,
            1 => SensorChannel::GBuffer(
                GBufferId::from_code(aux).ok_or(WireError::UnknownBuffer(aux))?,
            ),
            2 => SensorChannel::OneHot,
            3 => SensorChannel::Lidar,
            4 => SensorChannel::VehicleStatus,
            5 => {
                if aux as usize >= GROUP_COUNT {
                    return Err(WireError::BadStreamGroup(aux));
                }
                SensorChannel::Stream(aux)
            }
            6 => SensorChannel::ActorIds,
            other => return Err(WireError::UnknownSensor(other)),
        })
    }
}

pub(crate) fn precision_code(p: Precision) -> u8 {
    match p {
        Precision::F32 => 0,
        Precision::F16 => 1,
        Precision::U8 => 2,
    }
}

pub(crate) fn precision_from_code(code: u8) -> Result<Precision, WireError> {
    Ok(match code {
        0 => Precision::F32,
        1 => Precision::F16,
        2 => Precision::U8,
        other => return Err(WireError::UnknownPrecision(other)),
    })
}

/// Decoded header fields, still unvalidated against any payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireHeader {
    pub kind: MessageKind,
    pub sensor: u8,
    pub aux: u8,
    pub channels: u8,
    pub precision: u8,
    pub frame_id: u64,
    pub payload_len: u32,
    pub width: u32,
    pub height: u32,
}

impl WireHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut buf = [0u8; HEADER_LEN];
        buf[0..4].copy_from_slice(&MAGIC);
        buf[4..6].copy_from_slice(&VERSION.to_le_bytes());
        buf[6] = self.kind.code();
        buf[7] = self.sensor;
        buf[8] = self.aux;
        buf[9] = self.channels;
        buf[10] = self.precision;
        buf[11] = 0;
        buf[12..20].copy_from_slice(&self.frame_id.to_le_bytes());
        buf[20..24].copy_from_slice(&self.payload_len.to_le_bytes());
        buf[24..28].copy_from_slice(&self.width.to_le_bytes());
        buf[28..32].copy_from_slice(&self.height.to_le_bytes());
        buf
    }

    pub fn decode(buf: &[u8]) -> Result<Self, WireError> {
        if buf.len() < HEADER_LEN {
            return Err(WireError::TruncatedHeader {
                expected: HEADER_LEN,
                got: buf.len(),
            });
        }
        let magic: [u8; 4] = buf[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(WireError::BadMagic(magic));
        }
        let version = u16::from_le_bytes(buf[4..6].try_into().unwrap());
        if version != VERSION {
            return Err(WireError::UnsupportedVersion(version));
        }
        if buf[11] != 0 {
            return Err(WireError::ReservedByteSet(buf[11]));
        }
        let kind = MessageKind::from_code(buf[6])?;
        let payload_len = u32::from_le_bytes(buf[20..24].try_into().unwrap());
        if payload_len > MAX_PAYLOAD {
            return Err(WireError::PayloadTooLarge {
                len: payload_len,
                max: MAX_PAYLOAD,
            });
        }
        Ok(WireHeader {
            kind,
            sensor: buf[7],
            aux: buf[8],
            channels: buf[9],
            precision: buf[10],
            frame_id: u64::from_le_bytes(buf[12..20].try_into().unwrap()),
            payload_len,
            width: u32::from_le_bytes(buf[24..28].try_into().unwrap()),
            height: u32::from_le_bytes(buf[28..32].try_into().unwrap()),
        })
    }
}
