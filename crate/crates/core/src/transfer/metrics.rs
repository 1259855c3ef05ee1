//! File transfer evaluation criteria and their confidence intervals.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric {0} is undefined for these counters (division by zero)")]
    MetricUndefined(&'static str),
    #[error("a confidence interval needs at least 2 runs, got {0}")]
    NeedMoreRuns(usize),
    #[error("metrics file: {0}")]
    Parse(String),
}

/// Raw counters of one receiver's download, up to the decoding symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransferCounters {
    /// Bytes of the original file.
    pub file_length: u64,
    pub k: u64,
    /// Distinct symbols beyond `k` the decoder needed.
    pub epsilon: u64,
    /// Symbol-carrying packets received, duplicates included.
    pub received_symbols: u64,
    /// Datagram length, header included.
    pub packet_length: u64,
    /// Application bytes per datagram.
    pub applicative_data: u64,
    /// Datagram bytes received at the link level.
    pub link_nb_data: u64,
    /// Packets sent towards the receiver and packets of those lost or dropped.
    pub link_packets: u64,
    pub link_lost: u64,
    /// Seconds until the last needed symbol arrived.
    pub network_time: f64,
    /// Seconds until the file was recovered.
    pub time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransferMetrics {
    pub time: f64,
    pub gput: f64,
    pub tput: f64,
    pub loss: f64,
    pub dup: f64,
    pub sym: f64,
    pub head: f64,
    pub net: f64,
    pub comp: f64,
}

pub const METRIC_NAMES: [&str; 9] = [
    "time", "gput", "tput", "loss", "dup", "sym", "head", "net", "comp",
];

impl TransferMetrics {
    pub fn values(&self) -> [f64; 9] {
        [
            self.time, self.gput, self.tput, self.loss, self.dup, self.sym, self.head, self.net,
            self.comp,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        Self {
            time: v[0],
            gput: v[1],
            tput: v[2],
            loss: v[3],
            dup: v[4],
            sym: v[5],
            head: v[6],
            net: v[7],
            comp: v[8],
        }
    }

    /// `name value` lines in fixed order.
    pub fn to_text(&self) -> String {
        METRIC_NAMES
            .iter()
            .zip(self.values())
            .map(|(n, v)| format!("{n} {v}\n"))
            .collect()
    }

    /// Reads the first two columns of `name value [ci]` lines.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut v = [f64::NAN; 9];
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut f = line.split_whitespace();
            let (Some(name), Some(value)) = (f.next(), f.next()) else {
                return Err(MetricError::Parse(format!("bad line {line:?}")));
            };
            let i = METRIC_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| MetricError::Parse(format!("unknown metric {name:?}")))?;
            v[i] = value
                .parse()
                .map_err(|_| MetricError::Parse(format!("bad value {value:?}")))?;
        }
        if let Some(i) = v.iter().position(|x| x.is_nan()) {
            return Err(MetricError::Parse(format!(
                "missing metric {}",
                METRIC_NAMES[i]
            )));
        }
        Ok(Self::from_values(v))
    }
}

/// `(packet_length / applicative_data - 1) * 100`.
pub fn header_overhead(packet_length: u64, applicative_data: u64) -> Result<f64, MetricError> {
    ratio_pct("head", packet_length as f64, applicative_data as f64)
}

fn ratio_pct(name: &'static str, num: f64, den: f64) -> Result<f64, MetricError> {
    if den == 0.0 {
        return Err(MetricError::MetricUndefined(name));
    }
    Ok((num / den - 1.0) * 100.0)
}

fn kbps(name: &'static str, bytes: u64, secs: f64) -> Result<f64, MetricError> {
    if secs <= 0.0 {
        return Err(MetricError::MetricUndefined(name));
    }
    Ok(bytes as f64 * 8.0 / secs / 1000.0)
}

pub fn compute_metrics(c: &TransferCounters) -> Result<TransferMetrics, MetricError> {
    let needed = (c.k + c.epsilon) as f64;
    if c.link_packets == 0 {
        return Err(MetricError::MetricUndefined("loss"));
    }
    Ok(TransferMetrics {
        time: c.time,
        gput: kbps("gput", c.file_length, c.time)?,
        tput: kbps("tput", c.link_nb_data, c.time)?,
        loss: c.link_lost as f64 / c.link_packets as f64 * 100.0,
        dup: ratio_pct("dup", c.received_symbols as f64, needed)?,
        sym: ratio_pct("sym", needed, c.k as f64)?,
        head: header_overhead(c.packet_length, c.applicative_data)?,
        net: ratio_pct("net", c.link_nb_data as f64, c.file_length as f64)?,
        comp: ratio_pct("comp", c.time, c.network_time)?,
    })
}

/// Mean and half-width of the 95% Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci: f64,
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(2);
        write!(f, "{:.p$} (±{:.p$})", self.mean, self.ci)
    }
}

pub fn confidence_interval(samples: &[f64]) -> Result<Estimate, MetricError> {
    let r = samples.len();
    if r < 2 {
        return Err(MetricError::NeedMoreRuns(r));
    }
    // shifted by the first sample so identical runs give exactly zero spread
    let x0 = samples[0];
    let shift = samples.iter().map(|x| x - x0).sum::<f64>() / r as f64;
    let mean = x0 + shift;
    let var = samples
        .iter()
        .map(|x| (x - x0 - shift).powi(2))
        .sum::<f64>()
        / (r - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (r - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    Ok(Estimate {
        mean,
        ci: t * (var / r as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub runs: usize,
    pub estimates: [Estimate; 9],
}

pub fn report(runs: &[TransferMetrics]) -> Result<MetricsReport, MetricError> {
    if runs.len() < 2 {
        return Err(MetricError::NeedMoreRuns(runs.len()));
    }
    let mut estimates = [Estimate { mean: 0.0, ci: 0.0 }; 9];
    for (i, e) in estimates.iter_mut().enumerate() {
        let col: Vec<f64> = runs.iter().map(|m| m.values()[i]).collect();
        *e = confidence_interval(&col)?;
    }
    Ok(MetricsReport {
        runs: runs.len(),
        estimates,
    })
}

impl MetricsReport {
    /// `name value ci` lines in fixed order.
    pub fn to_text(&self) -> String {
        METRIC_NAMES
            .iter()
            .zip(&self.estimates)
            .map(|(n, e)| format!("{n} {} {}\n", e.mean, e.ci))
            .collect()
    }

    /// Table rows in `value (±ci)` form.
    pub fn to_table(&self) -> String {
        METRIC_NAMES
            .iter()
            .zip(&self.estimates)
            .map(|(n, e)| format!("{n:<5} {e}\n"))
            .collect()
    }
}
