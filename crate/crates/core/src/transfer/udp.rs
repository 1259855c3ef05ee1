//! Real-socket backend: one UDP port per physical group slot.
//!
//! Slot `p` is sent to `base_port + p` on the destination address, which
//! may be a multicast group. The receiver listens on every slot and does not
//! adapt its subscription.

use std::net::{IpAddr, Ipv4Addr, SocketAddr, UdpSocket};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::{FileReceiver, Progress, SendSession, SessionParams, TransferCounters, TransferError};
use crate::netsim::PacketSource;
use crate::wire::PacketHeader;
use crate::ChannelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UdpEndpoint {
    pub addr: IpAddr,
    pub base_port: u16,
}

impl UdpEndpoint {
    fn slot(&self, slot: u16) -> SocketAddr {
        SocketAddr::new(self.addr, self.base_port + slot)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SendStats {
    pub packets: u64,
    pub bytes: u64,
}

/// Paces the carousel onto sockets in real time for `duration` seconds.
pub fn send(
    session: &SendSession,
    channel: &ChannelConfig,
    to: UdpEndpoint,
    duration: f64,
    session_id: u32,
) -> Result<SendStats, TransferError> {
    let socket = UdpSocket::bind(SocketAddr::new(
        if to.addr.is_ipv4() {
            IpAddr::V4(Ipv4Addr::UNSPECIFIED)
        } else {
            IpAddr::V6(std::net::Ipv6Addr::UNSPECIFIED)
        },
        0,
    ))?;
    if to.addr.is_multicast() {
        socket.set_multicast_loop_v4(true)?;
    }
    let mut source = session.source(channel, 0.0, session_id)?;
    let start = Instant::now();
    let mut stats = SendStats::default();
    while let Some(e) = source.next_emission()? {
        if e.time > duration {
            break;
        }
        let due = Duration::from_secs_f64(e.time);
        if let Some(wait) = due.checked_sub(start.elapsed()) {
            thread::sleep(wait);
        }
        let slot = PacketHeader::decode(&e.datagram)
            .map(|h| h.group)
            .unwrap_or(0);
        socket.send_to(&e.datagram, to.slot(slot))?;
        stats.packets += 1;
        stats.bytes += e.datagram.len() as u64;
    }
    Ok(stats)
}

/// Listens on `slots` consecutive ports until the file decodes or
/// `timeout` elapses. The decoding wall time feeds the `comp` criterion.
pub fn receive(
    params: SessionParams,
    listen: UdpEndpoint,
    slots: u16,
    multicast: Option<Ipv4Addr>,
    timeout: Duration,
) -> Result<(Vec<u8>, TransferCounters), TransferError> {
    let (tx, rx) = mpsc::channel::<(Instant, Vec<u8>)>();
    for p in 0..slots {
        let socket = UdpSocket::bind(listen.slot(p))?;
        if let Some(group) = multicast {
            socket.join_multicast_v4(&group, &Ipv4Addr::UNSPECIFIED)?;
        }
        socket.set_read_timeout(Some(Duration::from_millis(200)))?;
        let tx = tx.clone();
        thread::spawn(move || {
            let mut buf = vec![0u8; 65_536];
            loop {
                match socket.recv(&mut buf) {
                    Ok(n) => {
                        if tx.send((Instant::now(), buf[..n].to_vec())).is_err() {
                            return;
                        }
                    }
                    Err(e)
                        if matches!(
                            e.kind(),
                            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                        ) =>
                    {
                        // wake up to notice a dropped receiver
                        if tx.send((Instant::now(), Vec::new())).is_err() {
                            return;
                        }
                    }
                    Err(_) => return,
                }
            }
        });
    }
    drop(tx);

    let mut receiver = FileReceiver::new(params, 0.0)?;
    let mut first: Option<Instant> = None;
    let deadline = Instant::now() + timeout;
    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return receiver.finish(0.0);
        }
        let Ok((at, datagram)) = rx.recv_timeout(left) else {
            return receiver.finish(0.0);
        };
        if datagram.is_empty() {
            continue;
        }
        let t0 = *first.get_or_insert(at);
        let t = at.duration_since(t0).as_secs_f64();
        if receiver.on_datagram(t, &datagram)? == Progress::Decodable {
            let started = Instant::now();
            let mut out = receiver.finish(0.0)?;
            let compute = started.elapsed().as_secs_f64();
            out.1.time = out.1.network_time + compute;
            return Ok(out);
        }
    }
}
