//! Transports: the same framed protocol over TCP sockets or an in-process
//! byte channel. The in-process pair still encodes and decodes every
//! message, so hermetic tests exercise the real codec.

use std::collections::VecDeque;
use std::io::{BufReader, BufWriter, Write};
use std::net::TcpStream;
use std::sync::mpsc::{sync_channel, Receiver, RecvTimeoutError, SyncSender, TryRecvError};
use std::time::Duration;

use crate::error::WireError;
use crate::message::{decode_message, encode_message, read_message, write_message, Message};

/// Sending half of a connection.
pub trait MessageSink: Send {
    fn send(&mut self, msg: &Message) -> Result<(), WireError>;
}

/// Receiving half of a connection.
pub trait MessageSource: Send {
    /// Block until a message arrives or the peer goes away.
    fn recv(&mut self) -> Result<Message, WireError>;

    /// Wait at most `timeout`; `Ok(None)` on expiry. A timeout mid-message
    /// poisons stream transports, so callers treat it as frame loss.
    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Message>, WireError>;

    /// Non-blocking poll; `Ok(None)` when nothing is pending.
    fn try_recv(&mut self) -> Result<Option<Message>, WireError>;
}

// In-process transport.

pub struct InProcSink {
    tx: SyncSender<Vec<u8>>,
}

pub struct InProcSource {
    rx: Receiver<Vec<u8>>,
    pending: VecDeque<Vec<u8>>,
}

/// Two connected duplex endpoints as (sink, source) pairs. `capacity` bounds
/// each direction; senders block when the peer stops draining.
pub fn in_process_pair(
    capacity: usize,
) -> ((InProcSink, InProcSource), (InProcSink, InProcSource)) {
    let (a_tx, b_rx) = sync_channel(capacity);
    let (b_tx, a_rx) = sync_channel(capacity);
    (
        (
            InProcSink { tx: a_tx },
            InProcSource {
                rx: a_rx,
                pending: VecDeque::new(),
            },
        ),
        (
            InProcSink { tx: b_tx },
            InProcSource {
                rx: b_rx,
                pending: VecDeque::new(),
            },
        ),
    )
}

impl MessageSink for InProcSink {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        self.tx
            .send(encode_message(msg))
            .map_err(|_| WireError::Disconnected)
    }
}

impl InProcSource {
    fn decode(bytes: Vec<u8>) -> Result<Message, WireError> {
        let (msg, consumed) = decode_message(&bytes)?;
        if consumed != bytes.len() {
            return Err(WireError::MalformedPayload {
                kind: "in-process frame",
                detail: format!("{} trailing bytes", bytes.len() - consumed),
            });
        }
        Ok(msg)
    }
}

impl MessageSource for InProcSource {
    fn recv(&mut self) -> Result<Message, WireError> {
        if let Some(bytes) = self.pending.pop_front() {
            return Self::decode(bytes);
        }
        match self.rx.recv() {
            Ok(bytes) => Self::decode(bytes),
            Err(_) => Err(WireError::Disconnected),
        }
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Message>, WireError> {
        if let Some(bytes) = self.pending.pop_front() {
            return Self::decode(bytes).map(Some);
        }
        match self.rx.recv_timeout(timeout) {
            Ok(bytes) => Self::decode(bytes).map(Some),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(WireError::Disconnected),
        }
    }

    fn try_recv(&mut self) -> Result<Option<Message>, WireError> {
        if let Some(bytes) = self.pending.pop_front() {
            return Self::decode(bytes).map(Some);
        }
        match self.rx.try_recv() {
            Ok(bytes) => Self::decode(bytes).map(Some),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(WireError::Disconnected),
        }
    }
}

// TCP transport.

pub struct TcpSink {
    writer: BufWriter<TcpStream>,
}

pub struct TcpSource {
    reader: BufReader<TcpStream>,
}

/// Split a connected stream into framed halves.
pub fn tcp_split(stream: TcpStream) -> Result<(TcpSink, TcpSource), WireError> {
    stream.set_nodelay(true)?;
    let write_half = stream.try_clone()?;
    Ok((
        TcpSink {
            writer: BufWriter::new(write_half),
        },
        TcpSource {
            reader: BufReader::new(stream),
        },
    ))
}

impl MessageSink for TcpSink {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        write_message(&mut self.writer, msg)?;
        self.writer.flush()?;
        Ok(())
    }
}

impl TcpSource {
    fn set_timeout(&mut self, timeout: Option<Duration>) -> Result<(), WireError> {
        self.reader.get_ref().set_read_timeout(timeout)?;
        Ok(())
    }
}

impl MessageSource for TcpSource {
    fn recv(&mut self) -> Result<Message, WireError> {
        self.set_timeout(None)?;
        read_message(&mut self.reader)
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Message>, WireError> {
        self.set_timeout(Some(timeout))?;
        match read_message(&mut self.reader) {
            Ok(msg) => Ok(Some(msg)),
            Err(WireError::Io(e))
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) =>
            {
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn try_recv(&mut self) -> Result<Option<Message>, WireError> {
        self.recv_timeout(Duration::from_micros(1))
    }
}

impl MessageSink for Box<dyn MessageSink> {
    fn send(&mut self, msg: &Message) -> Result<(), WireError> {
        (**self).send(msg)
    }
}

impl MessageSource for Box<dyn MessageSource> {
    fn recv(&mut self) -> Result<Message, WireError> {
        (**self).recv()
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Message>, WireError> {
        (**self).recv_timeout(timeout)
    }

    fn try_recv(&mut self) -> Result<Option<Message>, WireError> {
        (**self).try_recv()
    }
}
