//! Wire service around a world: handshake, sync tick serving, async
//! free-running, over the in-process transport or TCP.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use g2r_wire::{
    in_process_pair, tcp_split, Hello, Message, MessageSink, MessageSource, SensorChannel,
    SensorFrame, SensorSelect, ServiceMode,
};

use crate::error::EngineError;
use crate::lidar::{self, LidarConfig};
use crate::render::render_sensors;
use crate::world::{World, WorldConfig};

/// Mutation applied to the world before every tick; the scenario runner
/// compiles to one of these.
pub type TickHook = Box<dyn FnMut(&mut World) + Send>;

pub struct ServiceOptions {
    /// Also stream the velocity and E/F payload buffers.
    pub include_exotic: bool,
    pub lidar: LidarConfig,
    /// Async mode pacing between frames; `None` free-runs flat out.
    pub async_interval: Option<Duration>,
    pub hook: Option<TickHook>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            include_exotic: false,
            lidar: LidarConfig::default(),
            async_interval: None,
            hook: None,
        }
    }
}

/// Running service thread. Joining returns the serve outcome; `stop`
/// interrupts async free-running between frames.
pub struct ServerHandle {
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<Result<(), EngineError>>>,
}

impl ServerHandle {
    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn join(mut self) -> Result<(), EngineError> {
        match self.join.take().expect("joined once").join() {
            Ok(result) => result,
            Err(_) => Err(EngineError::ServicePanicked),
        }
    }
}

struct Subscription {
    rgb: bool,
    gbuffers: bool,
    stencil: bool,
    lidar: bool,
    vehicle: bool,
    actor_ids: bool,
}

impl Subscription {
    fn from_list(list: &[SensorSelect]) -> Self {
        Subscription {
            rgb: list.contains(&SensorSelect::Rgb),
            gbuffers: list.contains(&SensorSelect::GBuffers),
            stencil: list.contains(&SensorSelect::Stencil),
            lidar: list.contains(&SensorSelect::Lidar),
            vehicle: list.contains(&SensorSelect::VehicleStatus),
            actor_ids: list.contains(&SensorSelect::ActorIds),
        }
    }
}

fn send_frame_sensors(
    world: &World,
    subs: &Subscription,
    opts: &ServiceOptions,
    tx: &mut dyn MessageSink,
) -> Result<(), EngineError> {
    let out = render_sensors(world, opts.include_exotic)?;
    let frame_id = world.frame_id;

    if subs.rgb {
        tx.send(&Message::Sensor(SensorFrame::from_image_plane(
            frame_id,
            SensorChannel::Rgb,
            &out.rgb,
        )))?;
    }
    if subs.gbuffers {
        for (id, plane) in out.gbuffers.iter() {
            if id == g2r_core::GBufferId::CustomStencil {
                continue; // carried by the stencil subscription
            }
            tx.send(&Message::Sensor(SensorFrame::from_image_plane(
                frame_id,
                SensorChannel::GBuffer(id),
                plane,
            )))?;
        }
    }
    if subs.stencil {
        let stencil = out.gbuffers.require(g2r_core::GBufferId::CustomStencil)?;
        tx.send(&Message::Sensor(SensorFrame::from_image_plane(
            frame_id,
            SensorChannel::GBuffer(g2r_core::GBufferId::CustomStencil),
            stencil,
        )))?;
    }
    if subs.lidar {
        let scan = lidar::sweep(world, &opts.lidar);
        tx.send(&Message::Sensor(SensorFrame::from_lidar(&scan)))?;
    }
    if subs.vehicle {
        tx.send(&Message::Sensor(SensorFrame::from_vehicle_status(
            frame_id,
            &world.vehicle_status(),
        )))?;
    }
    if subs.actor_ids {
        tx.send(&Message::Sensor(SensorFrame::from_actor_ids(
            frame_id,
            world.config.width,
            world.config.height,
            &out.actor_ids,
        )))?;
    }
    Ok(())
}

fn advance(world: &mut World, opts: &mut ServiceOptions) {
    if let Some(hook) = opts.hook.as_mut() {
        hook(world);
    }
    world.tick();
}

fn sync_loop(
    world: &mut World,
    opts: &mut ServiceOptions,
    subs: &Subscription,
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
) -> Result<(), EngineError> {
    loop {
        match rx.recv() {
            Ok(Message::TickRequest { frame_id }) => {
                if frame_id <= world.frame_id {
                    return Err(EngineError::NonMonotonicTick {
                        current: world.frame_id,
                        requested: frame_id,
                    });
                }
                while world.frame_id < frame_id {
                    advance(world, opts);
                }
                send_frame_sensors(world, subs, opts, tx)?;
                tx.send(&Message::TickAck { frame_id })?;
            }
            Ok(Message::Control { command, .. }) => {
                world.apply_controls(
                    command.throttle as f64,
                    command.brake as f64,
                    command.steer as f64,
                );
            }
            Ok(Message::Bye) => return Ok(()),
            Ok(other) => {
                return Err(EngineError::BadHandshake(format!(
                    "unexpected {:?} in sync serving",
                    other.kind()
                )))
            }
            Err(e) if e.is_disconnect() => return Ok(()),
            Err(e) => return Err(e.into()),
        }
    }
}

fn async_loop(
    world: &mut World,
    opts: &mut ServiceOptions,
    subs: &Subscription,
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    stop: &AtomicBool,
) -> Result<(), EngineError> {
    loop {
        if stop.load(Ordering::SeqCst) {
            let _ = tx.send(&Message::Bye);
            return Ok(());
        }
        // Drain pending control traffic without blocking the frame clock.
        loop {
            match rx.try_recv() {
                Ok(Some(Message::Control { command, .. })) => {
                    world.apply_controls(
                        command.throttle as f64,
                        command.brake as f64,
                        command.steer as f64,
                    );
                }
                Ok(Some(Message::Bye)) => return Ok(()),
                Ok(Some(other)) => {
                    return Err(EngineError::BadHandshake(format!(
                        "unexpected {:?} in async serving",
                        other.kind()
                    )))
                }
                Ok(None) => break,
                Err(e) if e.is_disconnect() => return Ok(()),
                Err(e) => return Err(e.into()),
            }
        }

        advance(world, opts);
        match send_frame_sensors(world, subs, opts, tx) {
            Ok(()) => {}
            Err(EngineError::Wire(e)) if e.is_disconnect() => return Ok(()),
            Err(e) => return Err(e),
        }

        if let Some(interval) = opts.async_interval {
            std::thread::sleep(interval);
        }
    }
}

fn serve_connection(
    config: WorldConfig,
    mut opts: ServiceOptions,
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    stop: &AtomicBool,
) -> Result<(), EngineError> {
    let (subscriptions, mode) = match rx.recv() {
        Ok(Message::Hello(Hello::Subscribe {
            subscriptions,
            mode,
        })) => (subscriptions, mode),
        Ok(other) => {
            return Err(EngineError::BadHandshake(format!(
                "expected subscribe hello, got {:?}",
                other.kind()
            )))
        }
        Err(e) => return Err(EngineError::BadHandshake(format!("no hello: {e}"))),
    };
    tx.send(&Message::Hello(Hello::StreamInfo {
        fixed_dt: config.fixed_dt,
        width: config.width,
        height: config.height,
    }))?;

    let subs = Subscription::from_list(&subscriptions);
    let mut world = World::new(config);
    match mode {
        ServiceMode::Sync => sync_loop(&mut world, &mut opts, &subs, tx, rx),
        ServiceMode::Async => async_loop(&mut world, &mut opts, &subs, tx, rx, stop),
    }
}

/// Start a service thread talking over in-process channels. Returns the
/// client-side transport halves.
pub fn start_in_process(
    config: WorldConfig,
    opts: ServiceOptions,
) -> (Box<dyn MessageSink>, Box<dyn MessageSource>, ServerHandle) {
    let ((client_tx, client_rx), (server_tx, server_rx)) = in_process_pair(256);
    let stop = Arc::new(AtomicBool::new(false));
    let stop_thread = Arc::clone(&stop);
    let join = std::thread::Builder::new()
        .name("engine-service".into())
        .spawn(move || {
            let mut tx = server_tx;
            let mut rx = server_rx;
            serve_connection(config, opts, &mut tx, &mut rx, &stop_thread)
        })
        .expect("spawn engine service");
    (
        Box::new(client_tx),
        Box::new(client_rx),
        ServerHandle {
            stop,
            join: Some(join),
        },
    )
}

/// Bind a TCP listener and serve the first connection that arrives.
pub fn start_tcp(
    config: WorldConfig,
    opts: ServiceOptions,
    bind: &str,
) -> Result<(SocketAddr, ServerHandle), EngineError> {
    let listener = std::net::TcpListener::bind(bind)?;
    let addr = listener.local_addr()?;
    listener.set_nonblocking(true)?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_thread = Arc::clone(&stop);
    let join = std::thread::Builder::new()
        .name("engine-service-tcp".into())
        .spawn(move || {
            let stream = loop {
                if stop_thread.load(Ordering::SeqCst) {
                    return Ok(());
                }
                match listener.accept() {
                    Ok((stream, _)) => break stream,
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(Duration::from_millis(10));
                    }
                    Err(e) => return Err(e.into()),
                }
            };
            stream.set_nonblocking(false)?;
            let (mut tx, mut rx) = tcp_split(stream)?;
            serve_connection(config, opts, &mut tx, &mut rx, &stop_thread)
        })
        .expect("spawn engine service");
    Ok((
        addr,
        ServerHandle {
            stop,
            join: Some(join),
        },
    ))
}
