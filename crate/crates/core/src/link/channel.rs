use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    /// Mean one-way delay, seconds.
    pub latency: f64,
    /// Standard deviation of the delay, seconds.
    pub jitter_sd: f64,
    pub drop_probability: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            latency: 0.02,
            jitter_sd: 0.005,
            drop_probability: 0.0,
        }
    }
}

impl LinkParams {
    pub fn ideal() -> Self {
        Self {
            latency: 0.0,
            jitter_sd: 0.0,
            drop_probability: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err("latency must be finite and >= 0".into());
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd.is_finite()) {
            return Err("jitter_sd must be finite and >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err("drop_probability must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// One-directional datagram channel driven by the simulation clock.
///
/// Loss and delay are drawn when a datagram is sent. A survivor is never
/// delivered before one sent earlier, so per-sender order is preserved.
#[derive(Debug, Clone)]
pub struct Channel<T> {
    params: LinkParams,
    in_flight: VecDeque<(f64, T)>,
    last_delivery: f64,
    sent: u64,
    dropped: u64,
}

impl<T> Channel<T> {
    pub fn new(params: LinkParams) -> Self {
        Self {
            params,
            in_flight: VecDeque::new(),
            last_delivery: f64::NEG_INFINITY,
            sent: 0,
            dropped: 0,
        }
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn send<R: Rng + ?Sized>(&mut self, msg: T, now: f64, rng: &mut R) {
        self.sent += 1;
        // both draws happen for every message so the stream stays aligned
        let lost = rng.random::<f64>() < self.params.drop_probability;
        let jitter = if self.params.jitter_sd > 0.0 {
            Normal::new(0.0, self.params.jitter_sd).expect("validated sd").sample(rng)
        } else {
            0.0
        };
        if lost {
            self.dropped += 1;
            return;
        }
        let at = (now + (self.params.latency + jitter).max(0.0)).max(self.last_delivery);
        self.last_delivery = at;
        self.in_flight.push_back((at, msg));
    }

    /// Everything due at or before `now`, oldest first.
    pub fn deliver(&mut self, now: f64) -> Vec<T> {
        let mut out = Vec::new();
        while self.in_flight.front().is_some_and(|(at, _)| *at <= now) {
            out.push(self.in_flight.pop_front().expect("checked front").1);
        }
        out
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}
