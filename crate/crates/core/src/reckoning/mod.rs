//! Sender and receiver dead-reckoning state machines and the threshold policies
//! that decide when the sender must transmit.

mod mirror;
mod pdu;
mod policy;
mod receiver;
mod sender;

use thiserror::Error;

use crate::kinematics::{KinematicsError, Vec3};

pub use mirror::{DeadReckonMirror, DEFAULT_HISTORY_CAPACITY};
pub use pdu::{EntityStatePdu, PDU_SIZE};
pub use policy::{current_threshold, Band, ThresholdContext, ThresholdPolicy, Thresholds, ORIENTATION_DISABLED};
pub use receiver::{receiver_apply, receiver_estimate, ApplyOutcome, Convergence, ReceiverSite, DEFAULT_BLEND_WINDOW};
pub use sender::{sender_tick, EmitReason, Emission, SenderSite, TickReport, DEFAULT_HEARTBEAT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReckoningError {
    #[error("no update has been applied yet")]
    NotInitialized,
    #[error("invalid threshold policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time {t} s precedes {previous} s")]
    TimeRegression { t: f64, previous: f64 },
    #[error("update at {t} s is older than the current base at {base} s")]
    BaseRegression { t: f64, base: f64 },
    #[error("pdu codec: {0}")]
    Codec(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Euclidean distance between the actual and estimated positions.
pub fn position_error(actual: Vec3, estimated: Vec3) -> f64 {
    actual.distance(estimated)
}

/// `|diff|`, negated when the error points against the direction of motion.
pub fn signed_error(diff: Vec3, velocity: Vec3) -> f64 {
    let e = diff.norm();
    if diff.dot(velocity) < 0.0 {
        -e
    } else {
        e
    }
}
