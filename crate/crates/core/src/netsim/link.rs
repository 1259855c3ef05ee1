use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::scenario::GilbertLoss;

/// Per-link loss process: independent losses, then an optional burst model.
#[derive(Debug, Clone)]
pub struct LossProcess {
    iid: f64,
    burst: Option<GilbertLoss>,
    bad: bool,
    rng: ChaCha8Rng,
}

impl LossProcess {
    pub fn new(iid: f64, burst: Option<GilbertLoss>, rng: ChaCha8Rng) -> Self {
        Self {
            iid,
            burst,
            bad: false,
            rng,
        }
    }

    /// Whether the next packet is lost.
    pub fn lose(&mut self) -> bool {
        let mut lost = self.iid > 0.0 && self.rng.gen::<f64>() < self.iid;
        if let Some(b) = self.burst {
            let flip = if self.bad { b.p_exit } else { b.p_enter };
            if self.rng.gen::<f64>() < flip {
                self.bad = !self.bad;
            }
            lost |= self.bad;
        }
        lost
    }
}

/// Packet and byte counters of one link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounters {
    pub offered_packets: u64,
    pub offered_bytes: u64,
    pub delivered_packets: u64,
    pub delivered_bytes: u64,
    pub queue_dropped_packets: u64,
    pub queue_dropped_bytes: u64,
    pub lost_packets: u64,
    pub lost_bytes: u64,
    pub in_queue_packets: u64,
    pub in_queue_bytes: u64,
}

impl LinkCounters {
    /// delivered + dropped + lost + in-queue = offered, in packets and bytes.
    pub fn is_balanced(&self) -> bool {
        self.delivered_packets
            + self.queue_dropped_packets
            + self.lost_packets
            + self.in_queue_packets
            == self.offered_packets
            && self.delivered_bytes
                + self.queue_dropped_bytes
                + self.lost_bytes
                + self.in_queue_bytes
                == self.offered_bytes
    }
}

/// Drop-tail FIFO served at a fixed bit rate.
#[derive(Debug)]
pub struct Link<P> {
    rate: f64,
    capacity: usize,
    queue: VecDeque<(P, usize)>,
    counters: LinkCounters,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Enqueued {
    /// Link was idle: service of this packet completes after the returned
    /// number of nanoseconds.
    StartService(u64),
    Queued,
    Dropped,
}

impl<P> Link<P> {
    pub fn new(rate: f64, capacity: usize) -> Self {
        Self {
            rate,
            capacity,
            queue: VecDeque::new(),
            counters: LinkCounters::default(),
        }
    }

    pub fn counters(&self) -> LinkCounters {
        self.counters
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn serialization_ns(&self, bytes: usize) -> u64 {
        (bytes as f64 * 8.0 / self.rate * 1e9).round() as u64
    }

    pub fn offer(&mut self, packet: P, bytes: usize) -> Enqueued {
        let c = &mut self.counters;
        c.offered_packets += 1;
        c.offered_bytes += bytes as u64;
        if self.queue.len() >= self.capacity {
            c.queue_dropped_packets += 1;
            c.queue_dropped_bytes += bytes as u64;
            return Enqueued::Dropped;
        }
        c.in_queue_packets += 1;
        c.in_queue_bytes += bytes as u64;
        self.queue.push_back((packet, bytes));
        if self.queue.len() == 1 {
            Enqueued::StartService(self.serialization_ns(bytes))
        } else {
            Enqueued::Queued
        }
    }

    /// Completes service of the head packet. Returns it, whether it was lost
    /// on the wire, and the service time of the next packet if any.
    pub fn complete(&mut self, loss: &mut LossProcess) -> Option<(P, bool, Option<u64>)> {
        let (packet, bytes) = self.queue.pop_front()?;
        let lost = loss.lose();
        let c = &mut self.counters;
        c.in_queue_packets -= 1;
        c.in_queue_bytes -= bytes as u64;
        if lost {
            c.lost_packets += 1;
            c.lost_bytes += bytes as u64;
        } else {
            c.delivered_packets += 1;
            c.delivered_bytes += bytes as u64;
        }
        let next = self.queue.front().map(|(_, b)| self.serialization_ns(*b));
        Some((packet, lost, next))
    }
}
