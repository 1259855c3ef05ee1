//! Rate model of the source's dynamic multicast groups.
//!
//! Group 0 is the base group: it sends at `base_rate` forever. Every other
//! group is dynamic. A new dynamic group starts every sub_TSI (`tsd / K`
//! seconds) at `max_cumulative_rate`; from then on its cumulative rate decays
//! by `decay_ratio` per sub_TSI of age, continuously:
//!
//! ```text
//! cum(g, t) = max_cumulative_rate * decay_ratio ^ ((t - start(g)) / sub_tsi)
//! ```
//!
//! After `G - 1` sub_TSIs the group becomes quiescent, exactly when its
//! replacement starts, so `G - 1` dynamic groups plus the base group are
//! active at every instant.
//!
//! Dynamic group ids are absolute and ever increasing. Group `g >= 1` starts
//! at `(g - G) * sub_tsi` and is quiescent from `(g - 1) * sub_tsi` on, so
//! during sub_TSI interval `i` the active dynamic groups are
//! `i + 2 ..= i + G`, ordered from the oldest (lowest cumulative rate) to the
//! youngest. The session clock starts at `t = 0` with a full ladder.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::scalar::{slack_floor, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
    #[error("group {group} is not active at t = {time} s")]
    QuiescentGroup { group: u64, time: f64 },
    #[error("time {0} s is before the session start")]
    BeforeSessionStart(f64),
}

/// Parameters of the source's group ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig<T> {
    /// Rate of the never-quiescent base group, bits/s.
    pub base_rate: T,
    /// Cumulative rate of a dynamic group when it starts, bits/s.
    pub max_cumulative_rate: T,
    /// Per-sub_TSI decay factor of a dynamic group's cumulative rate.
    pub decay_ratio: T,
    /// Time slot duration in seconds.
    pub tsd: T,
    /// Groups retired (and started) per TSI, the `K` parameter.
    pub groups_per_tsi: u32,
    /// Bytes budgeted per packet when converting rates into packet counts.
    pub packet_size: u32,
    /// Number of simultaneously active groups, base group included.
    pub group_count: u32,
}

impl<T: Real> Default for ChannelConfig<T> {
    fn default() -> Self {
        Self {
            base_rate: T::lit(64_000.0),
            max_cumulative_rate: T::lit(4_000_000.0),
            decay_ratio: T::lit(0.85),
            tsd: T::lit(1.0),
            groups_per_tsi: 1,
            packet_size: 1480,
            group_count: 26,
        }
    }
}

/// One group during one sub_TSI interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileId {
    pub group: u64,
    pub interval: u64,
}

/// A tile, possibly clipped to a window, with its packet budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileBudget<T> {
    pub tile: TileId,
    pub packet_count: u64,
    pub min_cum_rate: T,
    pub max_cum_rate: T,
    /// Clipped slice of the interval covered by this budget, seconds.
    pub start: T,
    pub end: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupEventKind {
    Quiescent,
    Started,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupEvent<T> {
    pub group: u64,
    pub time: T,
    pub kind: GroupEventKind,
}

/// Per-group fractional packet carry between consecutive budget windows.
#[derive(Debug, Clone, Default)]
pub struct CarryState<T> {
    carry: BTreeMap<u64, T>,
}

impl<T: Real> CarryState<T> {
    pub fn new() -> Self {
        Self {
            carry: BTreeMap::new(),
        }
    }

    /// Forgets the carry of groups that have become quiescent before `interval`.
    fn prune(&mut self, interval: u64) {
        self.carry.retain(|&g, _| g == 0 || g >= interval + 2);
    }
}

impl<T: Real> ChannelConfig<T> {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: &str| Err(ChannelError::InvalidConfig(msg.to_string()));
        let rho = self.decay_ratio;
        if !(rho > T::zero() && rho < T::one()) {
            return bad("decay_ratio must lie in (0, 1)");
        }
        if !(self.base_rate > T::zero()) {
            return bad("base_rate must be positive");
        }
        if !(self.base_rate < self.max_cumulative_rate) {
            return bad("base_rate must be below max_cumulative_rate");
        }
        if !(self.tsd > T::zero()) || !self.tsd.is_finite() {
            return bad("tsd must be positive");
        }
        if self.groups_per_tsi < 1 {
            return bad("groups_per_tsi must be at least 1");
        }
        if self.group_count < 2 {
            return bad("group_count must be at least 2");
        }
        if self.packet_size == 0 {
            return bad("packet_size must be positive");
        }
        let floor = self.max_cumulative_rate * rho.powi(self.group_count as i32 - 1);
        if floor < self.base_rate {
            return bad("max_cumulative_rate * decay_ratio^(G-1) must be >= base_rate");
        }
        Ok(())
    }

    /// Duration of one sub_TSI, `tsd / K`.
    pub fn sub_tsi(&self) -> T {
        self.tsd / T::from_count(self.groups_per_tsi as u64)
    }

    pub fn dynamic_group_count(&self) -> u64 {
        self.group_count as u64 - 1
    }

    /// Index of the sub_TSI interval containing `t` (`t >= 0`).
    pub fn interval_at(&self, t: T) -> u64 {
        let d = self.sub_tsi();
        let mut i = (t / d).floor().to_u64().unwrap_or(0);
        // Division can land one ulp on the wrong side of a boundary.
        while i > 0 && self.interval_start(i) > t {
            i -= 1;
        }
        while self.interval_start(i + 1) <= t {
            i += 1;
        }
        i
    }

    pub fn interval_start(&self, interval: u64) -> T {
        T::from_count(interval) * self.sub_tsi()
    }

    /// First sub_TSI boundary at or after `t`.
    pub fn align_up(&self, t: T) -> T {
        let t = t.max(T::zero());
        let i = self.interval_at(t);
        let start = self.interval_start(i);
        if start == t {
            start
        } else {
            self.interval_start(i + 1)
        }
    }

    /// Time slot index at `t`.
    pub fn tsi_at(&self, t: T) -> u64 {
        self.interval_at(t) / self.groups_per_tsi as u64
    }

    /// Start time of dynamic group `group` (may precede the session start).
    pub fn group_start(&self, group: u64) -> T {
        T::from_index(group as i64 - self.group_count as i64) * self.sub_tsi()
    }

    /// Time at which dynamic group `group` becomes quiescent.
    pub fn group_end(&self, group: u64) -> T {
        T::from_index(group as i64 - 1) * self.sub_tsi()
    }

    /// Dynamic groups active during `interval`, oldest first.
    pub fn active_groups(&self, interval: u64) -> RangeInclusive<u64> {
        (interval + 2)..=(interval + self.group_count as u64)
    }

    pub fn is_active(&self, group: u64, interval: u64) -> bool {
        group == 0 || self.active_groups(interval).contains(&group)
    }

    /// Hierarchy level of an active group: 0 for the base, 1 for the oldest
    /// dynamic group, `G - 1` for the youngest.
    pub fn level(&self, group: u64, interval: u64) -> Option<u32> {
        if group == 0 {
            return Some(0);
        }
        self.is_active(group, interval)
            .then(|| (group - interval - 1) as u32)
    }

    pub fn group_at_level(&self, level: u32, interval: u64) -> u64 {
        if level == 0 {
            0
        } else {
            interval + 1 + level as u64
        }
    }

    /// Reusable multicast slot carrying `group`: 0 for the base group and
    /// `1..G` for dynamic groups, recycled as groups retire.
    pub fn physical_slot(&self, group: u64) -> u32 {
        if group == 0 {
            0
        } else {
            1 + ((group - 1) % self.dynamic_group_count()) as u32
        }
    }

    /// Whole sub_TSIs of age of `group` at the start of `interval`.
    fn age_index(&self, group: u64, interval: u64) -> i32 {
        (interval as i64 + self.group_count as i64 - group as i64) as i32
    }

    /// Cumulative rate at `age` whole sub_TSIs plus `frac` of one.
    fn cum_at_age(&self, age: i32, frac: T) -> T {
        let ladder = self.max_cumulative_rate * self.decay_ratio.powi(age);
        if frac == T::zero() {
            ladder
        } else {
            ladder * self.decay_ratio.powf(frac)
        }
    }

    /// Integral of the cumulative rate of a group aged `age` at the interval
    /// start, between fractional positions `fa` and `fb` of the interval.
    fn cum_integral(&self, age: i32, fa: T, fb: T) -> T {
        let rho = self.decay_ratio;
        self.max_cumulative_rate * rho.powi(age) * self.sub_tsi() * (rho.powf(fb) - rho.powf(fa))
            / rho.ln()
    }

    fn position(&self, t: T, interval: u64) -> T {
        (t - self.interval_start(interval)) / self.sub_tsi()
    }

    /// Cumulative rate of `group`, i.e. the rate received by a receiver
    /// subscribed to every group from the base up to `group`.
    pub fn cumulative_rate(&self, group: u64, t: T) -> Result<T, ChannelError> {
        if t < T::zero() {
            return Err(ChannelError::BeforeSessionStart(t.as_f64()));
        }
        if group == 0 {
            return Ok(self.base_rate);
        }
        let i = self.interval_at(t);
        if !self.is_active(group, i) {
            return Err(ChannelError::QuiescentGroup {
                group,
                time: t.as_f64(),
            });
        }
        Ok(self.cum_at_age(self.age_index(group, i), self.position(t, i)))
    }

    /// Rate of `group` alone: its cumulative rate minus the cumulative rate
    /// of the group just below it in the hierarchy.
    pub fn group_rate(&self, group: u64, t: T) -> Result<T, ChannelError> {
        let cum = self.cumulative_rate(group, t)?;
        if group == 0 {
            return Ok(cum);
        }
        let below = if self.is_active(group - 1, self.interval_at(t)) {
            group - 1
        } else {
            0
        };
        Ok(cum - self.cumulative_rate(below, t)?)
    }

    /// Cumulative rate of the youngest active group at `t`.
    pub fn top_cumulative_rate(&self, t: T) -> T {
        let i = self.interval_at(t.max(T::zero()));
        let top = *self.active_groups(i).end();
        self.cumulative_rate(top, t.max(T::zero()))
            .unwrap_or(self.max_cumulative_rate)
    }

    /// Bits delivered over `[t0, t1)` to a receiver whose highest joined
    /// group is `highest`. Intervals where `highest` is quiescent count at
    /// the base rate only.
    pub fn subscription_bits(&self, highest: u64, t0: T, t1: T) -> T {
        let mut total = T::zero();
        for (i, a, b) in self.slices(t0, t1) {
            if highest != 0 && self.is_active(highest, i) {
                let age = self.age_index(highest, i);
                total = total + self.cum_integral(age, self.position(a, i), self.position(b, i));
            } else {
                total = total + self.base_rate * (b - a);
            }
        }
        total
    }

    /// Splits `[t0, t1)` into `(interval, start, end)` slices.
    fn slices(&self, t0: T, t1: T) -> Vec<(u64, T, T)> {
        let t0 = t0.max(T::zero());
        let mut out = Vec::new();
        if !(t1 > t0) {
            return out;
        }
        let mut i = self.interval_at(t0);
        loop {
            let lo = self.interval_start(i).max(t0);
            let hi = self.interval_start(i + 1).min(t1);
            if lo >= t1 {
                break;
            }
            if hi > lo {
                out.push((i, lo, hi));
            }
            i += 1;
        }
        out
    }

    /// Tiles overlapping `[t0, t1)` with their packet budgets, in
    /// chronological order and by ascending group within an interval.
    pub fn tiles_in_window(&self, t0: T, t1: T) -> Vec<TileBudget<T>> {
        self.tiles_in_window_with_carry(t0, t1, &mut CarryState::new())
    }

    /// Like [`tiles_in_window`](Self::tiles_in_window), threading the
    /// fractional packet carry through consecutive windows.
    pub fn tiles_in_window_with_carry(
        &self,
        t0: T,
        t1: T,
        carry: &mut CarryState<T>,
    ) -> Vec<TileBudget<T>> {
        let bits_per_packet = T::from_count(self.packet_size as u64 * 8);
        let mut out = Vec::new();
        for (i, a, b) in self.slices(t0, t1) {
            carry.prune(i);
            let fa = self.position(a, i);
            let full_end = b == self.interval_start(i + 1);
            let fb = if full_end {
                T::one()
            } else {
                self.position(b, i)
            };

            let mut budget = |group: u64, bits: T, min_cum: T, max_cum: T| {
                let acc = carry.carry.entry(group).or_insert_with(T::zero);
                let exact = bits / bits_per_packet + *acc;
                let count = slack_floor(exact).max(T::zero());
                *acc = exact - count;
                out.push(TileBudget {
                    tile: TileId { group, interval: i },
                    packet_count: count.to_u64().unwrap_or(0),
                    min_cum_rate: min_cum,
                    max_cum_rate: max_cum,
                    start: a,
                    end: b,
                });
            };

            budget(0, self.base_rate * (b - a), self.base_rate, self.base_rate);

            let oldest = *self.active_groups(i).start();
            for g in self.active_groups(i) {
                let age = self.age_index(g, i);
                let max_cum = self.cum_at_age(age, fa);
                let min_cum = if full_end {
                    self.cum_at_age(age + 1, T::zero())
                } else {
                    self.cum_at_age(age, fb)
                };
                let cum_bits = self.cum_integral(age, fa, fb);
                let below_bits = if g == oldest {
                    self.base_rate * (b - a)
                } else {
                    self.cum_integral(age + 1, fa, fb)
                };
                budget(g, (cum_bits - below_bits).max(T::zero()), min_cum, max_cum);
            }
        }
        out
    }

    /// Group retirements and starts at sub_TSI boundaries inside `[t0, t1)`.
    pub fn quiescence_events(&self, t0: T, t1: T) -> Vec<GroupEvent<T>> {
        let mut out = Vec::new();
        if !(t1 > t0) {
            return out;
        }
        let mut i = self.interval_at(self.align_up(t0));
        while self.interval_start(i) < t1 {
            let time = self.interval_start(i);
            out.push(GroupEvent {
                group: i + 1,
                time,
                kind: GroupEventKind::Quiescent,
            });
            out.push(GroupEvent {
                group: i + self.group_count as u64,
                time,
                kind: GroupEventKind::Started,
            });
            i += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(rho: f64, max: f64, g: u32) -> ChannelConfig<f64> {
        ChannelConfig {
            base_rate: 10_000.0,
            max_cumulative_rate: max,
            decay_ratio: rho,
            tsd: 2.0,
            groups_per_tsi: 1,
            packet_size: 1000,
            group_count: g,
        }
    }

    fn rel_eq(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
    }

    #[test]
    fn default_config_is_valid() {
        ChannelConfig::<f64>::default().validate().unwrap();
        ChannelConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = cfg(0.5, 8e6, 3);
        c.decay_ratio = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg(0.5, 8e6, 3);
        c.group_count = 1;
        assert!(c.validate().is_err());
        let mut c = cfg(0.5, 8e6, 3);
        c.groups_per_tsi = 0;
        assert!(c.validate().is_err());
        // 8e6 * 0.5^9 = 15625 >= 10000 but 0.5^10 is not
        assert!(cfg(0.5, 8e6, 10).validate().is_ok());
        assert!(cfg(0.5, 8e6, 11).validate().is_err());
    }

    #[test]
    fn base_group_is_constant() {
        let c = cfg(0.5, 8e6, 4);
        for t in [0.0, 0.3, 7.9, 100.0] {
            assert_eq!(c.cumulative_rate(0, t).unwrap(), 10_000.0);
            assert_eq!(c.group_rate(0, t).unwrap(), 10_000.0);
        }
    }

    #[test]
    fn cumulative_rate_closed_form() {
        // 8 Mb/s halving per sub_TSI, two sub_TSIs after start -> 2 Mb/s
        let c = cfg(0.5, 8e6, 4);
        let g = 10;
        let t = c.group_start(g) + 2.0 * c.sub_tsi();
        assert!(rel_eq(c.cumulative_rate(g, t).unwrap(), 2e6));
    }

    #[test]
    fn group_rate_is_difference_of_ladder_rungs() {
        let c = cfg(0.5, 8e6, 4);
        // at the start of interval 5 group 9 is aged 0, 8 aged 1, 7 aged 2
        let t = c.interval_start(5);
        assert!(rel_eq(c.group_rate(8, t).unwrap(), 4e6 - 2e6));
        assert!(rel_eq(c.group_rate(9, t).unwrap(), 8e6 - 4e6));
        assert!(rel_eq(c.group_rate(7, t).unwrap(), 2e6 - 10_000.0));
    }

    #[test]
    fn quiescent_group_is_an_error() {
        let c = cfg(0.5, 8e6, 4);
        assert!(matches!(
            c.cumulative_rate(1, 0.0),
            Err(ChannelError::QuiescentGroup { group: 1, .. })
        ));
        // group 5 starts at (5 - 4) * 2 = 2 s
        assert!(c.cumulative_rate(5, 1.9).is_err());
        assert!(c.cumulative_rate(5, 2.0).is_ok());
        assert!(matches!(
            c.cumulative_rate(0, -1.0),
            Err(ChannelError::BeforeSessionStart(_))
        ));
    }

    #[test]
    fn one_tile_per_group_per_sub_tsi() {
        let c = cfg(0.5, 8e6, 3);
        let tiles = c.tiles_in_window(0.0, c.sub_tsi());
        assert_eq!(tiles.len(), 3);
        let tiles = c.tiles_in_window(0.5, 0.5 + 2.0 * c.sub_tsi());
        // partial, full, partial intervals
        assert_eq!(tiles.len(), 9);
    }

    #[test]
    fn base_budget_one_packet_per_second() {
        let mut c = cfg(0.5, 8e6, 3);
        c.base_rate = 11_584.0;
        c.packet_size = 1448;
        c.tsd = 1.0;
        let tiles = c.tiles_in_window(0.0, 1.0);
        assert_eq!(tiles[0].tile.group, 0);
        assert_eq!(tiles[0].packet_count, 1);

        // split into quarters the carry accumulates to the same packet
        c.groups_per_tsi = 4;
        let base: u64 = c
            .tiles_in_window(0.0, 1.0)
            .iter()
            .filter(|t| t.tile.group == 0)
            .map(|t| t.packet_count)
            .sum();
        assert_eq!(base, 1);
    }

    /// Composite Simpson quadrature of `group_rate`, independent of the
    /// closed-form integrals used by the budget code.
    fn simpson_group_bits(c: &ChannelConfig<f64>, g: u64, a: f64, b: f64) -> f64 {
        let n = 2000;
        let h = (b - a) / n as f64;
        let f = |t: f64| c.group_rate(g, t).unwrap_or(0.0);
        let mut s = f(a) + f(b - 1e-12);
        for k in 1..n {
            let t = a + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        s * h / 3.0
    }

    #[test]
    fn long_run_budgets_match_rate_integral() {
        let c = ChannelConfig::<f64> {
            tsd: 1.0,
            ..ChannelConfig::default()
        };
        let d = c.sub_tsi();
        let tiles = c.tiles_in_window(0.0, 100.0 * d);
        let bits_per_packet = c.packet_size as f64 * 8.0;
        let mut per_group: BTreeMap<u64, (u64, f64)> = BTreeMap::new();
        for t in &tiles {
            let e = per_group.entry(t.tile.group).or_default();
            e.0 += t.packet_count;
            e.1 += simpson_group_bits(&c, t.tile.group, t.start, t.end);
        }
        for (g, (count, bits)) in per_group {
            let expected = bits / bits_per_packet;
            assert!(
                (count as f64 - expected).abs() <= 1.0,
                "group {g}: {count} packets vs integral {expected}"
            );
        }
    }

    #[test]
    fn quiescence_events_per_tsd() {
        let mut c = cfg(0.5, 8e6, 4);
        c.groups_per_tsi = 2;
        let ev = c.quiescence_events(0.0, c.tsd);
        let q = ev
            .iter()
            .filter(|e| e.kind == GroupEventKind::Quiescent)
            .count();
        let s = ev
            .iter()
            .filter(|e| e.kind == GroupEventKind::Started)
            .count();
        assert_eq!((q, s), (2, 2));
        assert!(ev.iter().all(|e| e.group != 0));

        c.groups_per_tsi = 1;
        let ev = c.quiescence_events(0.0, 3.0 * c.tsd);
        assert_eq!(
            ev.iter()
                .filter(|e| e.kind == GroupEventKind::Quiescent)
                .count(),
            3
        );
    }

    #[test]
    fn started_groups_take_the_highest_rates() {
        let mut c = cfg(0.5, 8e6, 6);
        c.groups_per_tsi = 2;
        for e in c.quiescence_events(0.0, 3.0 * c.tsd) {
            if e.kind != GroupEventKind::Started {
                continue;
            }
            let at_start = c.cumulative_rate(e.group, e.time).unwrap();
            assert_eq!(at_start, c.max_cumulative_rate);
            // the K groups started within the last TSD hold the K highest rates
            let i = c.interval_at(e.time);
            let mut rates: Vec<(f64, u64)> = c
                .active_groups(i)
                .map(|g| (c.cumulative_rate(g, e.time).unwrap(), g))
                .collect();
            rates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let top: Vec<u64> = rates.iter().take(2).map(|r| r.1).collect();
            assert!(top.contains(&e.group));
            assert!(top.contains(&(e.group - 1)));
        }
    }

    #[test]
    fn physical_slots_recycle() {
        let c = cfg(0.5, 8e6, 4);
        let i = 7;
        let mut slots: Vec<u32> = c.active_groups(i).map(|g| c.physical_slot(g)).collect();
        slots.sort();
        assert_eq!(slots, vec![1, 2, 3]);
        assert_eq!(c.physical_slot(0), 0);
    }

    #[test]
    fn subscription_bits_for_base_only() {
        let c = cfg(0.5, 8e6, 4);
        assert!(rel_eq(c.subscription_bits(0, 0.0, 5.0), 50_000.0));
    }

    #[test]
    fn works_with_f32() {
        let c = ChannelConfig::<f32>::default();
        let t = c.interval_start(3);
        let tiles = c.tiles_in_window(t, t + c.sub_tsi());
        assert_eq!(tiles.len(), c.group_count as usize);
        for w in tiles.windows(2).skip(1) {
            assert_eq!(w[0].max_cum_rate, w[1].min_cum_rate);
        }
    }

    proptest! {
        #[test]
        fn dynamic_groups_decay_monotonically(
            rho in 0.3f64..0.95,
            t1 in 0.0f64..40.0,
            dt in 1e-3f64..10.0,
        ) {
            let c = ChannelConfig { decay_ratio: rho, group_count: 3, ..ChannelConfig::default() };
            let i = c.interval_at(t1 + dt);
            for g in c.active_groups(i) {
                if c.group_start(g) <= t1 {
                    let a = c.cumulative_rate(g, t1).unwrap();
                    let b = c.cumulative_rate(g, t1 + dt).unwrap();
                    prop_assert!(b < a);
                }
            }
        }

        #[test]
        fn group_rates_telescope(t in 0.0f64..200.0) {
            let c = ChannelConfig::<f64>::default();
            let i = c.interval_at(t);
            let sum: f64 = std::iter::once(0)
                .chain(c.active_groups(i))
                .map(|g| c.group_rate(g, t).unwrap())
                .sum();
            let top = c.top_cumulative_rate(t);
            prop_assert!(((sum - top) / top).abs() < 1e-12);
            for g in c.active_groups(i) {
                prop_assert!(c.group_rate(g, t).unwrap() >= 0.0);
            }
        }

        #[test]
        fn tile_budgets_are_deterministic(t0 in 0.0f64..50.0, len in 0.01f64..20.0) {
            let c = ChannelConfig::<f64>::default();
            prop_assert_eq!(c.tiles_in_window(t0, t0 + len), c.tiles_in_window(t0, t0 + len));
        }
    }
}
