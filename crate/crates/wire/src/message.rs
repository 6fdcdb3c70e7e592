//! Typed messages and their byte-level codec.

use std::io::{Read, Write};

use half::f16;
use serde::{Deserialize, Serialize};

use g2r_core::{
    GBufferId, ImagePlane, LidarPoint, LidarScan, OneHotStack, PlanarTensor, Precision,
    VehicleStatus, GROUP_COUNT,
};

use crate::error::WireError;
use crate::header::{
    precision_code, precision_from_code, MessageKind, SensorChannel, WireHeader, HEADER_LEN,
    MAX_PAYLOAD,
};

/// Service mode the engine runs in. Sync advances only on tick requests;
/// async free-runs at its own cadence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceMode {
    Sync,
    Async,
}

/// Sensor channels a client can subscribe to in the handshake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorSelect {
    Rgb,
    GBuffers,
    Stencil,
    Lidar,
    VehicleStatus,
    ActorIds,
}

/// Handshake bodies, JSON-encoded in the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Hello {
    /// Client's opening message: what it wants and how it will drive time.
    Subscribe {
        subscriptions: Vec<SensorSelect>,
        mode: ServiceMode,
    },
    /// Server's reply: the stream geometry the client should expect.
    StreamInfo {
        fixed_dt: f64,
        width: u32,
        height: u32,
    },
}

/// Ego control inputs, all in `[-1, 1]` or `[0, 1]` as appropriate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlCommand {
    pub throttle: f32,
    pub brake: f32,
    pub steer: f32,
}

/// One sensor frame: raw payload bytes plus the geometry to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub frame_id: u64,
    pub channel: SensorChannel,
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub precision: Precision,
    pub payload: Vec<u8>,
}

/// Every message the protocol can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello(Hello),
    TickRequest { frame_id: u64 },
    TickAck { frame_id: u64 },
    Sensor(SensorFrame),
    Control { frame_id: u64, command: ControlCommand },
    Bye,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Hello(_) => MessageKind::Hello,
            Message::TickRequest { .. } => MessageKind::TickRequest,
            Message::TickAck { .. } => MessageKind::TickAck,
            Message::Sensor(_) => MessageKind::SensorData,
            Message::Control { .. } => MessageKind::Control,
            Message::Bye => MessageKind::Bye,
        }
    }

    pub fn frame_id(&self) -> u64 {
        match self {
            Message::Hello(_) | Message::Bye => 0,
            Message::TickRequest { frame_id }
            | Message::TickAck { frame_id }
            | Message::Control { frame_id, .. } => *frame_id,
            Message::Sensor(frame) => frame.frame_id,
        }
    }
}

fn bytes_per_sample(p: Precision) -> u64 {
    p.bytes_per_sample() as u64
}

/// Expected payload size for a sensor header, or an error when the geometry
/// itself is inconsistent.
fn expected_sensor_len(h: &WireHeader, channel: SensorChannel) -> Result<u64, WireError> {
    let precision = precision_from_code(h.precision)?;
    let len = match channel {
        SensorChannel::Lidar => {
            // Width counts returns, one 24-byte record each; height must be 1
            // (0 only for an empty sweep) and stride is pinned in `channels`.
            if h.channels != LIDAR_RECORD_LEN as u8 || h.height > 1 {
                return Err(WireError::MalformedPayload {
                    kind: "lidar",
                    detail: format!("channels={} height={}", h.channels, h.height),
                });
            }
            h.width as u64 * LIDAR_RECORD_LEN as u64
        }
        SensorChannel::VehicleStatus => {
            if (h.width, h.height, h.channels) != (1, 1, 4) || precision != Precision::F32 {
                return Err(WireError::MalformedPayload {
                    kind: "vehicle_status",
                    detail: "geometry must be 1x1x4 f32".into(),
                });
            }
            16
        }
        SensorChannel::ActorIds => {
            if h.channels != 8 || precision != Precision::U8 {
                return Err(WireError::MalformedPayload {
                    kind: "actor_ids",
                    detail: "stride must be 8 bytes at u8 precision".into(),
                });
            }
            h.width as u64 * h.height as u64 * 8
        }
        SensorChannel::OneHot => {
            if h.channels as usize != GROUP_COUNT || precision != Precision::U8 {
                return Err(WireError::MalformedPayload {
                    kind: "onehot",
                    detail: format!("channels={} precision={:?}", h.channels, precision),
                });
            }
            h.width as u64 * h.height as u64 * GROUP_COUNT as u64
        }
        SensorChannel::Rgb | SensorChannel::GBuffer(_) | SensorChannel::Stream(_) => {
            if h.channels == 0 {
                return Err(WireError::MalformedPayload {
                    kind: "raster",
                    detail: "zero channels".into(),
                });
            }
            if let SensorChannel::GBuffer(id) = channel {
                if h.channels != id.channels() {
                    return Err(WireError::MalformedPayload {
                        kind: "gbuffer",
                        detail: format!(
                            "{:?} carries {} channels, header says {}",
                            id,
                            id.channels(),
                            h.channels
                        ),
                    });
                }
            }
            h.width as u64 * h.height as u64 * h.channels as u64 * bytes_per_sample(precision)
        }
    };
    Ok(len)
}

/// Serialize a message to a fresh byte vector.
pub fn encode_message(msg: &Message) -> Vec<u8> {
    let (header, payload): (WireHeader, Vec<u8>) = match msg {
        Message::Hello(hello) => {
            let payload = serde_json::to_vec(hello).expect("hello serializes");
            (
                WireHeader {
                    kind: MessageKind::Hello,
                    sensor: 0,
                    aux: 0,
                    channels: 0,
                    precision: 0,
                    frame_id: 0,
                    payload_len: payload.len() as u32,
                    width: 0,
                    height: 0,
                },
                payload,
            )
        }
        Message::TickRequest { frame_id } | Message::TickAck { frame_id } => (
            WireHeader {
                kind: msg.kind(),
                sensor: 0,
                aux: 0,
                channels: 0,
                precision: 0,
                frame_id: *frame_id,
                payload_len: 0,
                width: 0,
                height: 0,
            },
            Vec::new(),
        ),
        Message::Bye => (
            WireHeader {
                kind: MessageKind::Bye,
                sensor: 0,
                aux: 0,
                channels: 0,
                precision: 0,
                frame_id: 0,
                payload_len: 0,
                width: 0,
                height: 0,
            },
            Vec::new(),
        ),
        Message::Control { frame_id, command } => {
            let mut payload = Vec::with_capacity(12);
            payload.extend_from_slice(&command.throttle.to_le_bytes());
            payload.extend_from_slice(&command.brake.to_le_bytes());
            payload.extend_from_slice(&command.steer.to_le_bytes());
            (
                WireHeader {
                    kind: MessageKind::Control,
                    sensor: 0,
                    aux: 0,
                    channels: 0,
                    precision: 0,
                    frame_id: *frame_id,
                    payload_len: 12,
                    width: 0,
                    height: 0,
                },
                payload,
            )
        }
        Message::Sensor(frame) => (
            WireHeader {
                kind: MessageKind::SensorData,
                sensor: frame.channel.code(),
                aux: frame.channel.aux(),
                channels: frame.channels,
                precision: precision_code(frame.precision),
                frame_id: frame.frame_id,
                payload_len: frame.payload.len() as u32,
                width: frame.width,
                height: frame.height,
            },
            frame.payload.clone(),
        ),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&header.encode());
    out.extend_from_slice(&payload);
    out
}

/// Decode one message from the front of `buf`. Returns the message and the
/// number of bytes consumed. Truncation is reported, never panicked on, and
/// no allocation exceeds the validated payload bound.
pub fn decode_message(buf: &[u8]) -> Result<(Message, usize), WireError> {
    let header = WireHeader::decode(buf)?;
    let total = HEADER_LEN + header.payload_len as usize;
    if buf.len() < total {
        return Err(WireError::TruncatedPayload {
            expected: total,
            got: buf.len(),
        });
    }
    let payload = &buf[HEADER_LEN..total];
    let msg = decode_body(&header, payload)?;
    Ok((msg, total))
}

fn decode_body(header: &WireHeader, payload: &[u8]) -> Result<Message, WireError> {
    match header.kind {
        MessageKind::Hello => {
            let hello: Hello =
                serde_json::from_slice(payload).map_err(|e| WireError::MalformedPayload {
                    kind: "hello",
                    detail: e.to_string(),
                })?;
            Ok(Message::Hello(hello))
        }
        MessageKind::TickRequest => Ok(Message::TickRequest {
            frame_id: header.frame_id,
        }),
        MessageKind::TickAck => Ok(Message::TickAck {
            frame_id: header.frame_id,
        }),
        MessageKind::Bye => Ok(Message::Bye),
        MessageKind::Control => {
            if payload.len() != 12 {
                return Err(WireError::LengthMismatch {
                    expected: 12,
                    actual: payload.len() as u32,
                });
            }
            let f = |i: usize| f32::from_le_bytes(payload[i..i + 4].try_into().unwrap());
            let command = ControlCommand {
                throttle: f(0),
                brake: f(4),
                steer: f(8),
            };
            for v in [command.throttle, command.brake, command.steer] {
                if !v.is_finite() {
                    return Err(WireError::MalformedPayload {
                        kind: "control",
                        detail: format!("non-finite input {v}"),
                    });
                }
            }
            Ok(Message::Control {
                frame_id: header.frame_id,
                command,
            })
        }
        MessageKind::SensorData => {
            let channel = SensorChannel::from_codes(header.sensor, header.aux)?;
            let expected = expected_sensor_len(header, channel)?;
            if expected > MAX_PAYLOAD as u64 || expected != header.payload_len as u64 {
                return Err(WireError::LengthMismatch {
                    expected,
                    actual: header.payload_len,
                });
            }
            Ok(Message::Sensor(SensorFrame {
                frame_id: header.frame_id,
                channel,
                width: header.width,
                height: header.height,
                channels: header.channels,
                precision: precision_from_code(header.precision)?,
                payload: payload.to_vec(),
            }))
        }
    }
}

/// Write one message to a byte stream.
pub fn write_message<W: Write>(writer: &mut W, msg: &Message) -> Result<(), WireError> {
    let bytes = encode_message(msg);
    writer.write_all(&bytes)?;
    Ok(())
}

/// Read one message from a byte stream. A clean EOF before any header byte
/// maps to `Disconnected`; EOF mid-message is an I/O error.
pub fn read_message<R: Read>(reader: &mut R) -> Result<Message, WireError> {
    let mut header_buf = [0u8; HEADER_LEN];
    let mut filled = 0usize;
    while filled < HEADER_LEN {
        let n = reader.read(&mut header_buf[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Err(WireError::Disconnected);
            }
            return Err(WireError::TruncatedHeader {
                expected: HEADER_LEN,
                got: filled,
            });
        }
        filled += n;
    }
    let header = WireHeader::decode(&header_buf)?;
    let mut payload = vec![0u8; header.payload_len as usize];
    reader.read_exact(&mut payload)?;
    decode_body(&header, &payload)
}

const LIDAR_RECORD_LEN: usize = 24;

impl SensorFrame {
    /// Decode the payload to f32 samples according to the precision tag.
    pub fn decode_samples(&self) -> Result<Vec<f32>, WireError> {
        let bps = self.precision.bytes_per_sample();
        debug_assert_eq!(self.payload.len() % bps, 0);
        let n = self.payload.len() / bps;
        let mut out = Vec::with_capacity(n);
        match self.precision {
            Precision::F32 => {
                for chunk in self.payload.chunks_exact(4) {
                    out.push(f32::from_le_bytes(chunk.try_into().unwrap()));
                }
            }
            Precision::F16 => {
                for chunk in self.payload.chunks_exact(2) {
                    out.push(f16::from_le_bytes(chunk.try_into().unwrap()).to_f32());
                }
            }
            Precision::U8 => {
                for &b in &self.payload {
                    out.push(b as f32 / 255.0);
                }
            }
        }
        Ok(out)
    }

    fn encode_samples(samples: &[f32], precision: Precision) -> Vec<u8> {
        match precision {
            Precision::F32 => samples.iter().flat_map(|v| v.to_le_bytes()).collect(),
            Precision::F16 => samples
                .iter()
                .flat_map(|&v| f16::from_f32(v).to_le_bytes())
                .collect(),
            Precision::U8 => samples.iter().map(|&v| (v * 255.0).round() as u8).collect(),
        }
    }

    /// Interleaved raster frame (RGB or a single G-buffer).
    pub fn from_image_plane(frame_id: u64, channel: SensorChannel, plane: &ImagePlane) -> Self {
        debug_assert!(matches!(
            channel,
            SensorChannel::Rgb | SensorChannel::GBuffer(_)
        ));
        SensorFrame {
            frame_id,
            channel,
            width: plane.width(),
            height: plane.height(),
            channels: plane.channels(),
            precision: plane.precision(),
            payload: Self::encode_samples(plane.data(), plane.precision()),
        }
    }

    /// Interpret an interleaved raster payload as an image plane.
    pub fn to_image_plane(&self) -> Result<ImagePlane, WireError> {
        let samples = self.decode_samples()?;
        Ok(ImagePlane::new(
            self.width,
            self.height,
            self.channels,
            self.precision,
            samples,
        )?)
    }

    /// Channel-major stream tensor for one group.
    pub fn from_planar(frame_id: u64, group: u8, tensor: &PlanarTensor) -> Self {
        SensorFrame {
            frame_id,
            channel: SensorChannel::Stream(group),
            width: tensor.width(),
            height: tensor.height(),
            channels: tensor.channels() as u8,
            precision: Precision::F32,
            payload: Self::encode_samples(tensor.data(), Precision::F32),
        }
    }

    pub fn to_planar(&self) -> Result<PlanarTensor, WireError> {
        let samples = self.decode_samples()?;
        // Stream payloads skip the [0, 1] plane invariant: masked stacks are
        // zero-filled and may hold any finite value after enhancement math.
        for (i, &v) in samples.iter().enumerate() {
            if !v.is_finite() {
                return Err(WireError::MalformedPayload {
                    kind: "stream",
                    detail: format!("non-finite sample at {i}"),
                });
            }
        }
        Ok(PlanarTensor::new(
            self.width,
            self.height,
            self.channels as u16,
            samples,
        )?)
    }

    pub fn from_onehot(frame_id: u64, onehot: &OneHotStack) -> Self {
        SensorFrame {
            frame_id,
            channel: SensorChannel::OneHot,
            width: onehot.width(),
            height: onehot.height(),
            channels: GROUP_COUNT as u8,
            precision: Precision::U8,
            payload: onehot.data().to_vec(),
        }
    }

    pub fn to_onehot(&self) -> Result<OneHotStack, WireError> {
        Ok(OneHotStack::new(
            self.width,
            self.height,
            self.payload.clone(),
        )?)
    }

    pub fn from_lidar(scan: &LidarScan) -> Self {
        let mut payload = Vec::with_capacity(scan.points.len() * LIDAR_RECORD_LEN);
        for p in &scan.points {
            payload.extend_from_slice(&p.azimuth.to_le_bytes());
            payload.extend_from_slice(&p.elevation.to_le_bytes());
            payload.extend_from_slice(&p.range.to_le_bytes());
            payload.extend_from_slice(&(p.class_id as u32).to_le_bytes());
            payload.extend_from_slice(&p.actor_id.to_le_bytes());
        }
        SensorFrame {
            frame_id: scan.frame_id,
            channel: SensorChannel::Lidar,
            width: scan.points.len() as u32,
            height: if scan.points.is_empty() { 0 } else { 1 },
            channels: LIDAR_RECORD_LEN as u8,
            precision: Precision::U8,
            payload,
        }
    }

    pub fn to_lidar(&self) -> Result<LidarScan, WireError> {
        let mut points = Vec::with_capacity(self.width as usize);
        for (i, rec) in self.payload.chunks_exact(LIDAR_RECORD_LEN).enumerate() {
            let f = |o: usize| f32::from_le_bytes(rec[o..o + 4].try_into().unwrap());
            let class_raw = u32::from_le_bytes(rec[12..16].try_into().unwrap());
            if class_raw >= g2r_core::CLASS_COUNT as u32 {
                return Err(WireError::MalformedPayload {
                    kind: "lidar",
                    detail: format!("record {i} carries class {class_raw}"),
                });
            }
            let (azimuth, elevation, range) = (f(0), f(4), f(8));
            if !azimuth.is_finite() || !elevation.is_finite() || !range.is_finite() || range < 0.0
            {
                return Err(WireError::MalformedPayload {
                    kind: "lidar",
                    detail: format!("record {i} carries bad geometry"),
                });
            }
            points.push(LidarPoint {
                azimuth,
                elevation,
                range,
                class_id: class_raw as u8,
                actor_id: u64::from_le_bytes(rec[16..24].try_into().unwrap()),
            });
        }
        Ok(LidarScan {
            frame_id: self.frame_id,
            points,
        })
    }

    pub fn from_vehicle_status(frame_id: u64, status: &VehicleStatus) -> Self {
        let mut payload = Vec::with_capacity(16);
        for v in [status.steer, status.throttle, status.brake, status.speed_mps] {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        SensorFrame {
            frame_id,
            channel: SensorChannel::VehicleStatus,
            width: 1,
            height: 1,
            channels: 4,
            precision: Precision::F32,
            payload,
        }
    }

    pub fn to_vehicle_status(&self) -> Result<VehicleStatus, WireError> {
        if self.payload.len() != 16 {
            return Err(WireError::LengthMismatch {
                expected: 16,
                actual: self.payload.len() as u32,
            });
        }
        let f = |o: usize| f32::from_le_bytes(self.payload[o..o + 4].try_into().unwrap());
        Ok(VehicleStatus {
            steer: f(0),
            throttle: f(4),
            brake: f(8),
            speed_mps: f(12),
        })
    }

    pub fn from_actor_ids(frame_id: u64, width: u32, height: u32, ids: &[u64]) -> Self {
        let payload = ids.iter().flat_map(|v| v.to_le_bytes()).collect();
        SensorFrame {
            frame_id,
            channel: SensorChannel::ActorIds,
            width,
            height,
            channels: 8,
            precision: Precision::U8,
            payload,
        }
    }

    pub fn to_actor_ids(&self) -> Result<Vec<u64>, WireError> {
        Ok(self
            .payload
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    /// The buffer this frame carries, when it is a G-buffer frame.
    pub fn gbuffer_id(&self) -> Option<GBufferId> {
        match self.channel {
            SensorChannel::GBuffer(id) => Some(id),
            _ => None,
        }
    }
}
