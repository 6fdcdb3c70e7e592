//! A message source wrapper that reorders delivery within a bounded
//! window. Messages are taken in chunks of `window + 1` and shuffled
//! inside each chunk, so no message moves more than `window` positions
//! from where the transport delivered it.
//!
//! The assembler tolerates any reorder smaller than the per-tick frame
//! count; this wrapper exists to prove that under test. Wrap the source
//! only after the handshake, the hello exchange assumes strict order.

use std::collections::VecDeque;
use std::time::Duration;

use g2r_wire::{Message, MessageSource, WireError};

pub struct JitterSource {
    inner: Box<dyn MessageSource>,
    window: usize,
    queue: VecDeque<Message>,
    /// Disconnect seen mid-fill; replayed once the queue drains.
    pending_err: Option<WireError>,
    state: u64,
}

impl JitterSource {
    /// `window` is the maximum displacement; 0 passes messages through
    /// untouched. `seed` makes the shuffle reproducible.
    pub fn new(inner: Box<dyn MessageSource>, window: usize, seed: u64) -> Self {
        JitterSource {
            inner,
            window,
            queue: VecDeque::new(),
            pending_err: None,
            state: seed,
        }
    }

    fn next_u64(&mut self) -> u64 {
        // SplitMix64; a full RNG dependency is overkill for a test shim.
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn shuffle(&mut self, chunk: &mut [Message]) {
        for i in (1..chunk.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            chunk.swap(i, j);
        }
    }

    /// Refill the queue with one shuffled chunk. `block` controls whether
    /// the first message may wait; the rest are taken without blocking so
    /// a chunk never stalls on a quiet transport.
    fn fill(&mut self, block: Option<Duration>) -> Result<(), WireError> {
        if !self.queue.is_empty() || self.pending_err.is_some() {
            return Ok(());
        }
        let mut chunk = Vec::with_capacity(self.window + 1);
        let first = match block {
            None => self.inner.try_recv(),
            Some(timeout) if timeout == Duration::MAX => self.inner.recv().map(Some),
            Some(timeout) => self.inner.recv_timeout(timeout),
        };
        match first {
            Ok(Some(msg)) => chunk.push(msg),
            Ok(None) => return Ok(()),
            Err(err) if err.is_disconnect() => {
                self.pending_err = Some(err);
                return Ok(());
            }
            Err(err) => return Err(err),
        }
        while chunk.len() < self.window + 1 {
            match self.inner.try_recv() {
                Ok(Some(msg)) => chunk.push(msg),
                Ok(None) => break,
                Err(err) if err.is_disconnect() => {
                    self.pending_err = Some(err);
                    break;
                }
                Err(err) => return Err(err),
            }
        }
        self.shuffle(&mut chunk);
        self.queue.extend(chunk);
        Ok(())
    }

    fn pop_or_err(&mut self) -> Result<Option<Message>, WireError> {
        if let Some(msg) = self.queue.pop_front() {
            return Ok(Some(msg));
        }
        if let Some(err) = self.pending_err.take() {
            return Err(err);
        }
        Ok(None)
    }
}

impl MessageSource for JitterSource {
    fn recv(&mut self) -> Result<Message, WireError> {
        loop {
            self.fill(Some(Duration::MAX))?;
            match self.pop_or_err()? {
                Some(msg) => return Ok(msg),
                None => continue,
            }
        }
    }

    fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<Message>, WireError> {
        self.fill(Some(timeout))?;
        self.pop_or_err()
    }

    fn try_recv(&mut self) -> Result<Option<Message>, WireError> {
        self.fill(None)?;
        self.pop_or_err()
    }
}
