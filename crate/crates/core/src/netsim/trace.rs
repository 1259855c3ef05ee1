use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Delivered,
    QueueDrop,
    Lost,
    Join,
    /// Emitted by the source; only in sender-side traces.
    Sent,
}

impl TraceEvent {
    pub fn name(self) -> &'static str {
        match self {
            TraceEvent::Delivered => "delivered",
            TraceEvent::QueueDrop => "queue_drop",
            TraceEvent::Lost => "lost",
            TraceEvent::Join => "join",
            TraceEvent::Sent => "sent",
        }
    }
}

impl FromStr for TraceEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "delivered" => TraceEvent::Delivered,
            "queue_drop" => TraceEvent::QueueDrop,
            "lost" => TraceEvent::Lost,
            "join" => TraceEvent::Join,
            "sent" => TraceEvent::Sent,
            other => return Err(format!("unknown event {other:?}")),
        })
    }
}

/// One trace line: `time_us group buffer_id offset len event`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceRecord {
    pub time_us: u64,
    pub group: u64,
    pub buffer_id: u32,
    pub offset: u32,
    pub len: u32,
    pub event: TraceEvent,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.time_us,
            self.group,
            self.buffer_id,
            self.offset,
            self.len,
            self.event.name()
        )
    }
}

pub fn parse_trace_line(line: &str) -> Result<TraceRecord, String> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 6 {
        return Err(format!("expected 6 fields, got {}", f.len()));
    }
    let n = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number {s:?}"));
    let n32 = |s: &str| s.parse::<u32>().map_err(|_| format!("bad number {s:?}"));
    Ok(TraceRecord {
        time_us: n(f[0])?,
        group: n(f[1])?,
        buffer_id: n32(f[2])?,
        offset: n32(f[3])?,
        len: n32(f[4])?,
        event: f[5].parse()?,
    })
}

pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        writeln!(w, "{r}")?;
    }
    Ok(())
}
