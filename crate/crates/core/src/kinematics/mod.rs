//! Ground-truth trajectories and the dead-reckoning extrapolation equations.
//!
//! Second-order extrapolation uses the kinematic form
//! `P(t) = P_i + V_i·Δt + ½·A_i·Δt²`. [`DrModel::literal`] switches to the
//! variant without the ½ factor on the acceleration term, kept for comparison
//! runs against that form.

mod history;
mod trajectory;
mod vec3;

use thiserror::Error;

pub use history::{fit_history_quadratic, PositionHistory};
pub use trajectory::{heading, Segment, Trajectory, TrajectoryKind};
pub use vec3::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("time {t} s is outside the trajectory span [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },
    #[error("extrapolation target {t} s precedes the base timestamp {base} s")]
    NegativeElapsed { t: f64, base: f64 },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("history fit needs 3 samples, have {have}")]
    InsufficientData { have: usize },
    #[error("history samples have duplicate timestamps")]
    DegenerateFit,
    #[error("history timestamp {t} s does not follow the newest sample at {newest} s")]
    NonIncreasingTimestamp { t: f64, newest: f64 },
    #[error("history capacity must be at least 3, got {0}")]
    HistoryCapacity(usize),
}

/// Entity state sample at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    /// Heading in radians, `[-π, π]`.
    pub orientation: f64,
    /// Seconds.
    pub timestamp: f64,
}

impl KinematicState {
    pub fn new(position: Vec3, velocity: Vec3, acceleration: Vec3, orientation: f64, timestamp: f64) -> Self {
        Self {
            position,
            velocity,
            acceleration,
            orientation,
            timestamp,
        }
    }

    /// State at rest at `position`.
    pub fn at_rest(position: Vec3, timestamp: f64) -> Self {
        Self::new(position, Vec3::ZERO, Vec3::ZERO, 0.0, timestamp)
    }
}

/// Polynomial order of the extrapolator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExtrapolationOrder {
    Zero,
    #[default]
    First,
    Second,
}

impl ExtrapolationOrder {
    pub fn from_index(order: u8) -> Option<Self> {
        match order {
            0 => Some(Self::Zero),
            1 => Some(Self::First),
            2 => Some(Self::Second),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Zero => 0,
            Self::First => 1,
            Self::Second => 2,
        }
    }
}

/// Extrapolator configuration shared by a sender and its remote mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DrModel {
    pub order: ExtrapolationOrder,
    /// Drop the ½ on the acceleration term.
    pub unhalved_acceleration: bool,
}

impl DrModel {
    pub fn new(order: ExtrapolationOrder) -> Self {
        Self {
            order,
            unhalved_acceleration: false,
        }
    }

    pub fn literal(order: ExtrapolationOrder) -> Self {
        Self {
            order,
            unhalved_acceleration: true,
        }
    }

    fn accel_factor(&self) -> f64 {
        if self.unhalved_acceleration {
            1.0
        } else {
            0.5
        }
    }

    pub fn extrapolate(&self, base: &KinematicState, t: f64) -> Result<Vec3, KinematicsError> {
        Ok(self.extrapolate_state(base, t)?.position)
    }

    /// Full extrapolated state. Velocity follows the same polynomial; the heading tracks
    /// the extrapolated velocity for orders ≥ 1 and stays frozen for order 0.
    pub fn extrapolate_state(&self, base: &KinematicState, t: f64) -> Result<KinematicState, KinematicsError> {
        let dt = t - base.timestamp;
        if dt < 0.0 {
            return Err(KinematicsError::NegativeElapsed {
                t,
                base: base.timestamp,
            });
        }
        let (position, velocity, acceleration) = match self.order {
            ExtrapolationOrder::Zero => (base.position, Vec3::ZERO, Vec3::ZERO),
            ExtrapolationOrder::First => (base.position + base.velocity * dt, base.velocity, Vec3::ZERO),
            ExtrapolationOrder::Second => (
                base.position + base.velocity * dt + base.acceleration * (self.accel_factor() * dt * dt),
                base.velocity + base.acceleration * (2.0 * self.accel_factor() * dt),
                base.acceleration,
            ),
        };
        let orientation = if self.order == ExtrapolationOrder::Zero || (velocity.x == 0.0 && velocity.y == 0.0) {
            base.orientation
        } else {
            heading(velocity)
        };
        Ok(KinematicState::new(position, velocity, acceleration, orientation, t))
    }
}

/// Standard-form extrapolation of `base` to time `t`.
pub fn extrapolate(base: &KinematicState, t: f64, order: ExtrapolationOrder) -> Result<Vec3, KinematicsError> {
    DrModel::new(order).extrapolate(base, t)
}

/// Samples `traj` at `t`.
pub fn sample_state(traj: &Trajectory, t: f64) -> Result<KinematicState, KinematicsError> {
    traj.sample_state(t)
}

/// Smallest absolute angular difference, in `[0, π]`.
pub fn wrapped_angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}
