//! Delay schedules and feedback routing.
//!
//! A gradient queried at round `k` with delay `d_k` becomes available to the
//! learner at the end of round `k + d_k - 1`; delay 1 recovers the standard
//! undelayed setting. For a horizon `T` the arrival sets
//!
//! ```text
//! F_t = { k in [T] : k + d_k - 1 = t },   t = 1, ..., T + d_max - 1
//! ```
//!
//! partition `[T]`: every query arrives exactly once, possibly after the
//! horizon, in which case the update happens during the virtual rounds
//! `T + 1, ..., T + d_max - 1` that flush the buffer.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Round at which the feedback queried at `origin` with delay `delay`
/// becomes available. Delay 1 means availability at the end of the same
/// round.
#[inline]
pub fn arrival_round(origin: u64, delay: u32) -> u64 {
    origin + u64::from(delay) - 1
}

/// A fixed, known delay for every query round of a finite horizon.
#[derive(Debug, Clone)]
pub struct DelaySchedule {
    delays: Vec<u32>,
    d_max: u32,
    /// Arrival sets in compressed form: `items[offsets[t-1]..offsets[t]]`
    /// lists the origins in `F_t`, ascending. Index `t` runs over
    /// `1..=horizon + d_max - 1`.
    offsets: Vec<usize>,
    items: Vec<u64>,
}

impl DelaySchedule {
    /// Builds a schedule from per-round delays `d_1, ..., d_T`, each at
    /// least 1.
    pub fn new(delays: Vec<u32>) -> Result<Self> {
        if delays.is_empty() {
            return Err(Error::InvalidParameter {
                name: "delays",
                reason: "horizon must be at least 1".into(),
            });
        }
        if let Some(pos) = delays.iter().position(|&d| d == 0) {
            return Err(Error::InvalidParameter {
                name: "delays",
                reason: format!("delay at round {} must be at least 1", pos + 1),
            });
        }
        let d_max = *delays.iter().max().expect("nonempty");
        let horizon = delays.len() as u64;
        let last_arrival = horizon + u64::from(d_max) - 1;

        // Bucket origins by arrival round (counting sort keeps this O(T)).
        let slots = last_arrival as usize;
        let mut counts = vec![0_usize; slots];
        for (idx, &d) in delays.iter().enumerate() {
            let t = arrival_round(idx as u64 + 1, d);
            counts[(t - 1) as usize] += 1;
        }
        let mut offsets = vec![0_usize; slots + 1];
        for i in 0..slots {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let mut items = vec![0_u64; delays.len()];
        let mut cursor = offsets.clone();
        for (idx, &d) in delays.iter().enumerate() {
            let origin = idx as u64 + 1;
            let t = (arrival_round(origin, d) - 1) as usize;
            items[cursor[t]] = origin;
            cursor[t] += 1;
        }
        // Origins enter each bucket in increasing order by construction.

        Ok(Self {
            delays,
            d_max,
            offsets,
            items,
        })
    }

    /// A constant delay `d` for every round.
    pub fn constant(delay: u32, horizon: u64) -> Result<Self> {
        Self::new(vec![delay; horizon as usize])
    }

    /// Delays drawn independently and uniformly from `{1, ..., max_delay}`.
    pub fn uniform<R: Rng + ?Sized>(max_delay: u32, horizon: u64, rng: &mut R) -> Result<Self> {
        if max_delay == 0 {
            return Err(Error::InvalidParameter {
                name: "max_delay",
                reason: "must be at least 1".into(),
            });
        }
        let delays = (0..horizon)
            .map(|_| rng.random_range(1..=max_delay))
            .collect();
        Self::new(delays)
    }

    /// Number of query rounds `T`.
    pub fn horizon(&self) -> u64 {
        self.delays.len() as u64
    }

    /// Largest delay in the schedule.
    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    /// Delay of the query issued at round `t` (1-based).
    pub fn delay(&self, t: u64) -> u32 {
        self.delays[(t - 1) as usize]
    }

    /// Arrival round of the query issued at round `t`.
    pub fn arrival_of(&self, t: u64) -> u64 {
        arrival_round(t, self.delay(t))
    }

    /// Last round at which any feedback arrives, `T + d_max - 1`.
    pub fn last_arrival(&self) -> u64 {
        self.horizon() + u64::from(self.d_max) - 1
    }

    /// The arrival set `F_t`: origins whose feedback becomes available at
    /// the end of round `t`, in increasing order. Empty slice for `t`
    /// outside `[1, T + d_max - 1]`.
    pub fn arrivals_at(&self, t: u64) -> &[u64] {
        if t == 0 || t > self.last_arrival() {
            return &[];
        }
        let i = (t - 1) as usize;
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }

    /// First round with a nonempty arrival set. Always at most `d_max`,
    /// since the query from round 1 arrives at round `d_1 <= d_max`.
    pub fn first_arrival(&self) -> u64 {
        (1..=self.last_arrival())
            .find(|&t| !self.arrivals_at(t).is_empty())
            .expect("a nonempty schedule has arrivals")
    }
}

/// Holds feedback items until their arrival round.
///
/// The run loop pushes each item under its arrival round and drains rounds
/// in increasing order; draining a round twice, or pushing an item whose
/// arrival round has already been drained, is a logic error and is reported
/// as such.
#[derive(Debug, Clone)]
pub struct FeedbackBuffer<T> {
    pending: BTreeMap<u64, Vec<T>>,
    next_round: u64,
}

impl<T> Default for FeedbackBuffer<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> FeedbackBuffer<T> {
    /// Empty buffer positioned before round 1.
    pub fn new() -> Self {
        Self {
            pending: BTreeMap::new(),
            next_round: 1,
        }
    }

    /// Registers an item that becomes available at the end of `arrival`.
    pub fn push(&mut self, arrival: u64, item: T) -> Result<()> {
        if arrival < self.next_round {
            return Err(Error::InvalidParameter {
                name: "arrival",
                reason: format!(
                    "arrival round {arrival} already drained (next is {})",
                    self.next_round
                ),
            });
        }
        self.pending.entry(arrival).or_default().push(item);
        Ok(())
    }

    /// Removes and returns everything arriving at the end of round `t`, in
    /// insertion order. Rounds must be drained in increasing order.
    pub fn drain_round(&mut self, t: u64) -> Result<Vec<T>> {
        if t < self.next_round {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!(
                    "round {t} already drained (next is {})",
                    self.next_round
                ),
            });
        }
        self.next_round = t + 1;
        Ok(self.pending.remove(&t).unwrap_or_default())
    }

    /// Number of items still waiting.
    pub fn pending_len(&self) -> usize {
        self.pending.values().map(Vec::len).sum()
    }

    /// True when nothing is waiting.
    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arrival_formula() {
        assert_eq!(arrival_round(1, 1), 1);
        assert_eq!(arrival_round(1, 4), 4);
        assert_eq!(arrival_round(7, 3), 9);
    }

    #[test]
    fn unit_delays_give_identity_routing() {
        let s = DelaySchedule::constant(1, 5).unwrap();
        assert_eq!(s.last_arrival(), 5);
        assert_eq!(s.first_arrival(), 1);
        for t in 1..=5 {
            assert_eq!(s.arrivals_at(t), &[t]);
        }
    }

    #[test]
    fn mixed_delays_route_as_computed_by_hand() {
        // d = [3, 1, 2, 1]: arrivals 3, 2, 4, 4.
        let s = DelaySchedule::new(vec![3, 1, 2, 1]).unwrap();
        assert_eq!(s.d_max(), 3);
        assert_eq!(s.arrivals_at(1), &[] as &[u64]);
        assert_eq!(s.arrivals_at(2), &[2]);
        assert_eq!(s.arrivals_at(3), &[1]);
        assert_eq!(s.arrivals_at(4), &[3, 4]);
        assert_eq!(s.arrivals_at(5), &[] as &[u64]);
        assert_eq!(s.arrivals_at(6), &[] as &[u64]);
        assert_eq!(s.first_arrival(), 2);
    }

    #[test]
    fn rejects_zero_delay_and_empty_horizon() {
        assert!(DelaySchedule::new(vec![]).is_err());
        assert!(DelaySchedule::new(vec![1, 0, 2]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(DelaySchedule::uniform(0, 5, &mut rng).is_err());
    }

    #[test]
    fn buffer_enforces_forward_draining() {
        let mut buf: FeedbackBuffer<u64> = FeedbackBuffer::new();
        buf.push(3, 30).unwrap();
        buf.push(2, 20).unwrap();
        buf.push(3, 31).unwrap();
        assert_eq!(buf.drain_round(1).unwrap(), Vec::<u64>::new());
        assert_eq!(buf.drain_round(2).unwrap(), vec![20]);
        assert!(buf.push(2, 99).is_err());
        assert_eq!(buf.drain_round(3).unwrap(), vec![30, 31]);
        assert!(buf.drain_round(3).is_err());
        assert!(buf.is_empty());
    }

    proptest! {
        /// Arrival sets partition the query rounds: every k in [T] shows up
        /// exactly once across F_1, ..., F_{T + d_max - 1}.
        #[test]
        fn arrival_sets_partition_the_horizon(
            delays in proptest::collection::vec(1_u32..=6, 1..40),
        ) {
            let horizon = delays.len() as u64;
            let s = DelaySchedule::new(delays).unwrap();
            let mut seen = vec![0_u32; horizon as usize];
            for t in 1..=s.last_arrival() {
                for &k in s.arrivals_at(t) {
                    prop_assert_eq!(s.arrival_of(k), t);
                    seen[(k - 1) as usize] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert!(s.first_arrival() <= u64::from(s.d_max()));
        }

        /// Summing any per-round quantity over the partition reproduces the
        /// plain sum over rounds.
        #[test]
        fn partition_preserves_sums(
            values in proptest::collection::vec(-10.0_f64..10.0, 1..40),
            seed in 0_u64..1000,
        ) {
            let horizon = values.len() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = DelaySchedule::uniform(5, horizon, &mut rng).unwrap();
            let direct: f64 = values.iter().sum();
            let mut routed = 0.0;
            for t in 1..=s.last_arrival() {
                for &k in s.arrivals_at(t) {
                    routed += values[(k - 1) as usize];
                }
            }
            prop_assert!((direct - routed).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}
