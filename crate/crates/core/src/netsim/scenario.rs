use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::ChannelError;
use crate::ChannelConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Two-state Gilbert loss: every packet sent in the bad state is lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GilbertLoss {
    /// Per-packet probability of moving from good to bad.
    pub p_enter: f64,
    /// Per-packet probability of moving from bad to good.
    pub p_exit: f64,
}

impl GilbertLoss {
    /// About 10% loss in bursts of 3.3 packets on average.
    pub const DEFAULT: GilbertLoss = GilbertLoss {
        p_enter: 1.0 / 30.0,
        p_exit: 0.3,
    };

    /// Long-run fraction of packets lost.
    pub fn mean_loss(&self) -> f64 {
        self.p_enter / (self.p_enter + self.p_exit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverSpec {
    /// Rate the join policy aims for, bits/s.
    pub target_rate: f64,
    /// Session join time, seconds.
    pub start_time: f64,
}

/// Full description of one simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelConfig,
    /// Rate of each receiver's access link, bits/s.
    pub bottleneck_rate: f64,
    /// Drop-tail limit, in packets, including the one in service.
    pub queue_capacity: usize,
    pub iid_loss: f64,
    pub burst_loss: Option<GilbertLoss>,
    pub receivers: Vec<ReceiverSpec>,
    pub duration: f64,
    pub rng_seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::default(),
            bottleneck_rate: 4_000_000.0,
            queue_capacity: 25,
            iid_loss: 0.0,
            burst_loss: None,
            receivers: vec![ReceiverSpec {
                target_rate: 4_000_000.0,
                start_time: 0.0,
            }],
            duration: 60.0,
            rng_seed: 1,
        }
    }
}

fn prob(name: &str, p: f64) -> Result<(), ScenarioError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ScenarioError::Invalid(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.channel.validate()?;
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.bottleneck_rate > 0.0) || !self.bottleneck_rate.is_finite() {
            return invalid(format!("bottleneck_rate = {}", self.bottleneck_rate));
        }
        if self.queue_capacity < 1 {
            return invalid("queue_capacity must be at least 1".into());
        }
        prob("iid_loss", self.iid_loss)?;
        if let Some(b) = self.burst_loss {
            prob("burst_enter", b.p_enter)?;
            prob("burst_exit", b.p_exit)?;
            if b.p_enter > 0.0 && b.p_exit == 0.0 {
                return invalid("burst_exit = 0 traps the link in the loss state".into());
            }
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return invalid(format!("duration = {}", self.duration));
        }
        for r in &self.receivers {
            if !(r.target_rate >= 0.0) || !(r.start_time >= 0.0) {
                return invalid(format!("receiver {} {}", r.target_rate, r.start_time));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. `receiver` may
    /// repeat and takes `target_rate start_time`; when present it replaces
    /// the default receiver list.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut s = Scenario {
            receivers: Vec::new(),
            ..Scenario::default()
        };
        let mut burst = GilbertLoss::DEFAULT;
        let mut burst_on = false;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ScenarioError::Parse { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            fn num<T: FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("bad number {v:?}"))
            }
            let c = &mut s.channel;
            let r: Result<(), String> = (|| {
                match key {
                    "base_rate" => c.base_rate = num(value)?,
                    "max_cumulative_rate" => c.max_cumulative_rate = num(value)?,
                    "decay_ratio" => c.decay_ratio = num(value)?,
                    "tsd" => c.tsd = num(value)?,
                    "groups_per_tsi" => c.groups_per_tsi = num(value)?,
                    "packet_size" => c.packet_size = num(value)?,
                    "group_count" => c.group_count = num(value)?,
                    "bottleneck_rate" => s.bottleneck_rate = num(value)?,
                    "queue_capacity" => s.queue_capacity = num(value)?,
                    "iid_loss" => s.iid_loss = num(value)?,
                    "burst_loss" => {
                        burst_on = match value {
                            "on" | "true" => true,
                            "off" | "false" => false,
                            _ => return Err(format!("expected on/off, got {value:?}")),
                        }
                    }
                    "burst_enter" => {
                        burst.p_enter = num(value)?;
                        burst_on = true;
                    }
                    "burst_exit" => {
                        burst.p_exit = num(value)?;
                        burst_on = true;
                    }
                    "duration" => s.duration = num(value)?,
                    "rng_seed" => s.rng_seed = num(value)?,
                    "receiver" => {
                        let f: Vec<&str> = value.split_whitespace().collect();
                        if f.is_empty() || f.len() > 2 {
                            return Err("expected receiver = target_rate [start_time]".into());
                        }
                        s.receivers.push(ReceiverSpec {
                            target_rate: num(f[0])?,
                            start_time: f.get(1).map(|v| num(v)).transpose()?.unwrap_or(0.0),
                        });
                    }
                    other => return Err(format!("unknown key {other:?}")),
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        if s.receivers.is_empty() {
            s.receivers = Scenario::default().receivers;
        }
        s.burst_loss = burst_on.then_some(burst);
        s.validate()?;
        Ok(s)
    }

    /// Inverse of [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let c = &self.channel;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("base_rate", c.base_rate.to_string());
        kv("max_cumulative_rate", c.max_cumulative_rate.to_string());
        kv("decay_ratio", c.decay_ratio.to_string());
        kv("tsd", c.tsd.to_string());
        kv("groups_per_tsi", c.groups_per_tsi.to_string());
        kv("packet_size", c.packet_size.to_string());
        kv("group_count", c.group_count.to_string());
        kv("bottleneck_rate", self.bottleneck_rate.to_string());
        kv("queue_capacity", self.queue_capacity.to_string());
        kv("iid_loss", self.iid_loss.to_string());
        if let Some(b) = self.burst_loss {
            kv("burst_enter", b.p_enter.to_string());
            kv("burst_exit", b.p_exit.to_string());
        }
        kv("duration", self.duration.to_string());
        kv("rng_seed", self.rng_seed.to_string());
        for r in &self.receivers {
            kv("receiver", format!("{} {}", r.target_rate, r.start_time));
        }
        out
    }
}
