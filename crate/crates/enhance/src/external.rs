//! Bridge to an out-of-process enhancer. The input's color image and
//! per-group feature streams travel over any message transport; the peer
//! answers with an enhanced color frame for the same frame id within a
//! deadline, or the frame is declared lost.

use std::time::{Duration, Instant};

use g2r_core::{EnhancerInput, ImagePlane};
use g2r_wire::{Message, MessageSink, MessageSource, SensorChannel, SensorFrame};

use crate::enhancer::Enhancer;
use crate::error::EnhanceError;

pub struct ExternalEnhancer {
    tx: Box<dyn MessageSink>,
    rx: Box<dyn MessageSource>,
    deadline: Duration,
    /// Also ship the per-group stacked buffers, not just color.
    send_streams: bool,
}

impl ExternalEnhancer {
    pub fn new(
        tx: Box<dyn MessageSink>,
        rx: Box<dyn MessageSource>,
        deadline: Duration,
        send_streams: bool,
    ) -> Self {
        ExternalEnhancer {
            tx,
            rx,
            deadline,
            send_streams,
        }
    }

    /// Tell the peer to shut down. Consumes the bridge.
    pub fn shutdown(mut self) {
        let _ = self.tx.send(&Message::Bye);
    }
}

impl Enhancer for ExternalEnhancer {
    fn name(&self) -> &str {
        "external"
    }

    fn enhance(&mut self, input: &EnhancerInput) -> Result<ImagePlane, EnhanceError> {
        let frame_id = input.frame_id;
        self.tx.send(&Message::Sensor(SensorFrame::from_image_plane(
            frame_id,
            SensorChannel::Rgb,
            &input.rgb,
        )))?;
        if self.send_streams {
            for (&group, tensor) in &input.streams {
                self.tx.send(&Message::Sensor(SensorFrame::from_planar(
                    frame_id, group, tensor,
                )))?;
            }
        }
        self.tx.send(&Message::TickRequest { frame_id })?;

        let started = Instant::now();
        loop {
            let left = self.deadline.checked_sub(started.elapsed()).ok_or(
                EnhanceError::ExternalTimeout {
                    waited_ms: self.deadline.as_millis() as u64,
                },
            )?;
            match self.rx.recv_timeout(left)? {
                None => {
                    return Err(EnhanceError::ExternalTimeout {
                        waited_ms: self.deadline.as_millis() as u64,
                    })
                }
                Some(Message::Sensor(frame)) => {
                    if frame.channel != SensorChannel::Rgb {
                        return Err(EnhanceError::ExternalProtocol(format!(
                            "expected a color reply, got {:?}",
                            frame.channel
                        )));
                    }
                    if frame.frame_id != frame_id {
                        // A late reply for an earlier frame; skip it and
                        // keep waiting for ours.
                        continue;
                    }
                    return Ok(frame.to_image_plane()?);
                }
                Some(other) => {
                    return Err(EnhanceError::ExternalProtocol(format!(
                        "unexpected {:?} while waiting for frame {frame_id}",
                        other.kind()
                    )))
                }
            }
        }
    }
}

/// Serve the peer side of the bridge with a local enhancer: receive
/// frames, enhance, reply. Returns when the counterpart hangs up. Tests
/// and the reference external worker both run on this.
pub fn serve_peer(
    rx: &mut dyn MessageSource,
    tx: &mut dyn MessageSink,
    enhancer: &mut dyn Enhancer,
) -> Result<(), EnhanceError> {
    let mut pending: Option<(u64, ImagePlane)> = None;
    loop {
        match rx.recv() {
            Ok(Message::Sensor(frame)) => {
                if frame.channel == SensorChannel::Rgb {
                    pending = Some((frame.frame_id, frame.to_image_plane()?));
                }
                // Feature streams are accepted and dropped: this reference
                // peer enhances from color alone.
            }
            Ok(Message::TickRequest { frame_id }) => {
                let (pending_id, rgb) = pending.take().ok_or_else(|| {
                    EnhanceError::ExternalProtocol(format!(
                        "tick for frame {frame_id} arrived before its color frame"
                    ))
                })?;
                if pending_id != frame_id {
                    return Err(EnhanceError::ExternalProtocol(format!(
                        "tick for frame {frame_id} but staged frame is {pending_id}"
                    )));
                }
                let onehot = g2r_core::OneHotStack::new(
                    rgb.width(),
                    rgb.height(),
                    single_group_onehot(rgb.width(), rgb.height()),
                )?;
                let input = EnhancerInput {
                    frame_id,
                    rgb,
                    onehot,
                    streams: Default::default(),
                };
                let out = enhancer.enhance(&input)?;
                tx.send(&Message::Sensor(SensorFrame::from_image_plane(
                    frame_id,
                    SensorChannel::Rgb,
                    &out,
                )))?;
            }
            Ok(Message::Bye) => return Ok(()),
            Ok(other) => {
                return Err(EnhanceError::ExternalProtocol(format!(
                    "unexpected {:?} on the peer side",
                    other.kind()
                )))
            }
            Err(e) if e.is_disconnect() => return Ok(()),
            Err(e) => return Err(e.into()),
        }
    }
}

/// All pixels in group 0: the placeholder grouping for peers that only
/// see color.
fn single_group_onehot(width: u32, height: u32) -> Vec<u8> {
    let n = width as usize * height as usize;
    let mut data = vec![0u8; n * g2r_core::GROUP_COUNT];
    data[..n].fill(1);
    data
}
