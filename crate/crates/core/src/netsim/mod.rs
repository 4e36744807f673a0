//! Deterministic sender-to-receiver channel with delay, jitter and loss, the event
//! loop that drives a full scenario, and QoS-profile checks.

mod channel;
mod metrics;
mod qos;
mod queue;
mod scenario;

use thiserror::Error;

use crate::kinematics::KinematicsError;
use crate::reckoning::ReckoningError;

pub use channel::{transmit, Channel, Jitter, NetworkModel};
pub use metrics::{Delivery, MetricsReport, Sample};
pub use qos::{qos_check, Coupling, QoSProfile, QosViolation};
pub use queue::EventQueue;
pub use scenario::{run_scenario, Scenario, SenderConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetsimError {
    #[error("invalid network model: {0}")]
    InvalidNetwork(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Reckoning(#[from] ReckoningError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}
