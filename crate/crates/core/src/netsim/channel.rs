use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::NetsimError;
use crate::reckoning::EntityStatePdu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Jitter {
    None,
    /// Uniform on `±half_width` seconds.
    Uniform { half_width: f64 },
    /// Zero-mean normal with deviation `sigma` seconds; the total delay is floored at 0.
    TruncatedNormal { sigma: f64 },
}

/// Channel parameters. Times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkModel {
    pub base_delay: f64,
    pub jitter: Jitter,
    pub loss_prob: f64,
    pub seed: u64,
    /// Never deliver a packet before one delivered earlier.
    pub enforce_fifo: bool,
}

impl NetworkModel {
    pub fn ideal() -> Self {
        Self {
            base_delay: 0.0,
            jitter: Jitter::None,
            loss_prob: 0.0,
            seed: 0,
            enforce_fifo: false,
        }
    }

    pub fn new(base_delay: f64, jitter: Jitter, loss_prob: f64, seed: u64) -> Result<Self, NetsimError> {
        let m = Self {
            base_delay,
            jitter,
            loss_prob,
            seed,
            enforce_fifo: false,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        let bad = |m: String| Err(NetsimError::InvalidNetwork(m));
        if !(self.base_delay.is_finite() && self.base_delay >= 0.0) {
            return bad(format!("base delay must be nonnegative, got {}", self.base_delay));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return bad(format!("loss probability must lie in [0, 1], got {}", self.loss_prob));
        }
        match self.jitter {
            Jitter::None => {}
            Jitter::Uniform { half_width: w } | Jitter::TruncatedNormal { sigma: w } => {
                if !(w.is_finite() && w >= 0.0) {
                    return bad(format!("jitter width must be nonnegative, got {w}"));
                }
            }
        }
        Ok(())
    }

    /// Largest delay the channel can produce, if bounded.
    pub fn max_delay(&self) -> Option<f64> {
        match self.jitter {
            Jitter::None => Some(self.base_delay),
            Jitter::Uniform { half_width } => Some(self.base_delay + half_width),
            Jitter::TruncatedNormal { sigma: 0.0 } => Some(self.base_delay),
            Jitter::TruncatedNormal { .. } => None,
        }
    }
}

/// A channel instance with its own random stream.
///
/// Every send draws the loss sample and then the jitter sample, dropped or not, so the
/// delay of the k-th packet does not depend on the loss probability.
#[derive(Debug, Clone)]
pub struct Channel {
    pub model: NetworkModel,
    rng: ChaCha8Rng,
    last_arrival: f64,
}

impl Channel {
    pub fn new(model: NetworkModel) -> Result<Self, NetsimError> {
        model.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            model,
            last_arrival: f64::NEG_INFINITY,
        })
    }

    /// Arrival time of `pdu` sent at `t_send`, or `None` if the packet is lost.
    pub fn transmit(&mut self, pdu: EntityStatePdu, t_send: f64) -> Option<(EntityStatePdu, f64)> {
        let lost = self.rng.random::<f64>() < self.model.loss_prob;
        let jitter = match self.model.jitter {
            Jitter::None => 0.0,
            Jitter::Uniform { half_width } if half_width > 0.0 => self.rng.random_range(-half_width..=half_width),
            Jitter::Uniform { .. } => 0.0,
            Jitter::TruncatedNormal { sigma } if sigma > 0.0 => {
                Normal::new(0.0, sigma).expect("validated sigma").sample(&mut self.rng)
            }
            Jitter::TruncatedNormal { .. } => 0.0,
        };
        if lost {
            return None;
        }
        let mut t_arrive = t_send + (self.model.base_delay + jitter).max(0.0);
        if self.model.enforce_fifo {
            t_arrive = t_arrive.max(self.last_arrival);
        }
        self.last_arrival = self.last_arrival.max(t_arrive);
        Some((pdu, t_arrive))
    }
}

pub fn transmit(channel: &mut Channel, pdu: EntityStatePdu, t_send: f64) -> Option<(EntityStatePdu, f64)> {
    channel.transmit(pdu, t_send)
}
