//! Delayed-join rate adaptation.
//!
//! A receiver holds the base group and every active dynamic group up to its
//! highest joined group. It never leaves: its groups drop out on their own as
//! they turn quiescent, which lowers its rate over time. At each sub_TSI
//! boundary it joins the next younger group when its average rate since it
//! entered the session, extended by one more interval at the new
//! subscription, would stay within its target.

use crate::ChannelConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverState {
    /// Highest joined group; 0 when only the base group is held.
    pub highest: u64,
    /// Session entry time.
    pub window_start: f64,
    /// Nominal bits received since `window_start`.
    pub window_bits: f64,
    /// Time up to which `window_bits` is accounted.
    pub accounted_to: f64,
}

impl ReceiverState {
    pub fn new(start_time: f64) -> Self {
        Self {
            highest: 0,
            window_start: start_time,
            window_bits: 0.0,
            accounted_to: start_time,
        }
    }

    /// Whether a packet of `group` reaches this receiver.
    pub fn subscribed(&self, group: u64) -> bool {
        group == 0 || group <= self.highest
    }

    /// Hierarchy level held at `interval`, 0 when only the base remains.
    pub fn level(&self, cfg: &ChannelConfig, interval: u64) -> u32 {
        let oldest = *cfg.active_groups(interval).start();
        if self.highest < oldest {
            0
        } else {
            cfg.level(self.highest, interval).unwrap_or(0)
        }
    }
}

/// Runs the join decision at boundary `t` and returns the groups joined, in
/// order.
pub fn receiver_policy_step(
    state: &mut ReceiverState,
    t: f64,
    cfg: &ChannelConfig,
    target_rate: f64,
) -> Vec<u64> {
    if t > state.accounted_to {
        state.window_bits += cfg.subscription_bits(state.highest, state.accounted_to, t);
        state.accounted_to = t;
    }
    let d = cfg.sub_tsi();
    let interval = cfg.interval_at(t);
    let active = cfg.active_groups(interval);
    let mut joined = Vec::new();
    loop {
        let candidate = (state.highest + 1).max(*active.start());
        if candidate > *active.end() {
            break;
        }
        let next_bits = cfg.subscription_bits(candidate, t, t + d);
        let elapsed = t + d - state.window_start;
        if state.window_bits + next_bits > target_rate * elapsed {
            break;
        }
        state.highest = candidate;
        joined.push(candidate);
    }
    joined
}
