use super::{KinematicState, KinematicsError, Vec3};

/// Shape of a ground-truth path.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    /// `(r cos ωt, r sin ωt, 0)` about the origin.
    Circular { radius: f64, angular_rate: f64 },
    /// Drift along +x with a lateral `amplitude · sin(ωt)` swing along y.
    Sinusoidal {
        amplitude: f64,
        angular_rate: f64,
        drift_velocity: f64,
    },
    /// Constant velocity from the origin.
    Linear { v0: Vec3 },
    /// Constant acceleration from the origin.
    ConstantAccel { v0: Vec3, a0: Vec3 },
    /// Consecutive segments joined end to end in position. Velocity may jump at a joint.
    Piecewise(Vec<Segment>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub kind: TrajectoryKind,
    pub duration: f64,
}

/// A parametric path with a finite time span `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: TrajectoryKind,
    duration: f64,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, duration: f64) -> Result<Self, KinematicsError> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(KinematicsError::InvalidTrajectory(format!(
                "duration must be positive and finite, got {duration}"
            )));
        }
        validate_kind(&kind, true)?;
        if let TrajectoryKind::Piecewise(segments) = &kind {
            let total: f64 = segments.iter().map(|s| s.duration).sum();
            if total + 1e-9 < duration {
                return Err(KinematicsError::InvalidTrajectory(format!(
                    "segments cover {total} s but duration is {duration} s"
                )));
            }
        }
        Ok(Self { kind, duration })
    }

    pub fn circular(radius: f64, angular_rate: f64, duration: f64) -> Result<Self, KinematicsError> {
        Self::new(TrajectoryKind::Circular { radius, angular_rate }, duration)
    }

    pub fn sinusoidal(
        amplitude: f64,
        angular_rate: f64,
        drift_velocity: f64,
        duration: f64,
    ) -> Result<Self, KinematicsError> {
        Self::new(
            TrajectoryKind::Sinusoidal {
                amplitude,
                angular_rate,
                drift_velocity,
            },
            duration,
        )
    }

    pub fn linear(v0: Vec3, duration: f64) -> Result<Self, KinematicsError> {
        Self::new(TrajectoryKind::Linear { v0 }, duration)
    }

    pub fn constant_accel(v0: Vec3, a0: Vec3, duration: f64) -> Result<Self, KinematicsError> {
        Self::new(TrajectoryKind::ConstantAccel { v0, a0 }, duration)
    }

    pub fn kind(&self) -> &TrajectoryKind {
        &self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Exact analytic state at `t`. Orientation is the heading of the velocity in the xy-plane.
    pub fn sample_state(&self, t: f64) -> Result<KinematicState, KinematicsError> {
        if !(t >= 0.0 && t <= self.duration) {
            return Err(KinematicsError::OutOfRange {
                t,
                duration: self.duration,
            });
        }
        let (p, v, a) = eval_kind(&self.kind, t);
        Ok(KinematicState::new(p, v, a, heading(v), t))
    }

    /// Upper bound on speed over `[0, duration]`.
    pub fn max_speed(&self) -> f64 {
        max_speed(&self.kind, self.duration)
    }

    /// Upper bound on acceleration magnitude over `[0, duration]`.
    pub fn max_acceleration(&self) -> f64 {
        max_accel(&self.kind)
    }

    /// Upper bound on jerk magnitude; zero for polynomial paths of degree ≤ 2.
    pub fn max_jerk(&self) -> f64 {
        max_jerk(&self.kind)
    }
}

/// Heading of `v` in `[-π, π]`, zero for a vanishing planar velocity.
pub fn heading(v: Vec3) -> f64 {
    if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        v.y.atan2(v.x)
    }
}

fn validate_kind(kind: &TrajectoryKind, top_level: bool) -> Result<(), KinematicsError> {
    let bad = |msg: String| Err(KinematicsError::InvalidTrajectory(msg));
    match kind {
        TrajectoryKind::Circular { radius, angular_rate } => {
            if !(radius.is_finite() && *radius > 0.0 && angular_rate.is_finite()) {
                return bad(format!("circular needs radius > 0 and finite rate, got r={radius}, ω={angular_rate}"));
            }
        }
        TrajectoryKind::Sinusoidal {
            amplitude,
            angular_rate,
            drift_velocity,
        } => {
            if !(amplitude.is_finite() && angular_rate.is_finite() && drift_velocity.is_finite()) {
                return bad("sinusoidal parameters must be finite".into());
            }
        }
        TrajectoryKind::Linear { v0 } => {
            if !v0.is_finite() {
                return bad("linear velocity must be finite".into());
            }
        }
        TrajectoryKind::ConstantAccel { v0, a0 } => {
            if !(v0.is_finite() && a0.is_finite()) {
                return bad("constant-acceleration parameters must be finite".into());
            }
        }
        TrajectoryKind::Piecewise(segments) => {
            if !top_level {
                return bad("piecewise segments cannot nest".into());
            }
            if segments.is_empty() {
                return bad("piecewise trajectory needs at least one segment".into());
            }
            for s in segments {
                if !(s.duration.is_finite() && s.duration > 0.0) {
                    return bad(format!("segment duration must be positive, got {}", s.duration));
                }
                validate_kind(&s.kind, false)?;
            }
        }
    }
    Ok(())
}

fn eval_kind(kind: &TrajectoryKind, t: f64) -> (Vec3, Vec3, Vec3) {
    match *kind {
        TrajectoryKind::Circular { radius: r, angular_rate: w } => {
            let (s, c) = (w * t).sin_cos();
            (
                Vec3::new(r * c, r * s, 0.0),
                Vec3::new(-r * w * s, r * w * c, 0.0),
                Vec3::new(-r * w * w * c, -r * w * w * s, 0.0),
            )
        }
        TrajectoryKind::Sinusoidal {
            amplitude: amp,
            angular_rate: w,
            drift_velocity: drift,
        } => {
            let (s, c) = (w * t).sin_cos();
            (
                Vec3::new(drift * t, amp * s, 0.0),
                Vec3::new(drift, amp * w * c, 0.0),
                Vec3::new(0.0, -amp * w * w * s, 0.0),
            )
        }
        TrajectoryKind::Linear { v0 } => (v0 * t, v0, Vec3::ZERO),
        TrajectoryKind::ConstantAccel { v0, a0 } => (v0 * t + a0 * (0.5 * t * t), v0 + a0 * t, a0),
        TrajectoryKind::Piecewise(ref segments) => {
            let mut offset = Vec3::ZERO;
            let mut start = 0.0;
            let last = segments.len() - 1;
            for (i, seg) in segments.iter().enumerate() {
                let end = start + seg.duration;
                let origin = eval_kind(&seg.kind, 0.0).0;
                if t <= end || i == last {
                    let (p, v, a) = eval_kind(&seg.kind, t - start);
                    let p = if i == 0 { p } else { offset + (p - origin) };
                    return (p, v, a);
                }
                let p_end = eval_kind(&seg.kind, seg.duration).0;
                offset = if i == 0 { p_end } else { offset + (p_end - origin) };
                start = end;
            }
            unreachable!("piecewise trajectory has at least one segment")
        }
    }
}

fn max_speed(kind: &TrajectoryKind, duration: f64) -> f64 {
    match *kind {
        TrajectoryKind::Circular { radius, angular_rate } => radius * angular_rate.abs(),
        TrajectoryKind::Sinusoidal {
            amplitude,
            angular_rate,
            drift_velocity,
        } => drift_velocity.hypot(amplitude * angular_rate),
        TrajectoryKind::Linear { v0 } => v0.norm(),
        // |v0 + a t| is convex in t, so the maximum sits at an endpoint.
        TrajectoryKind::ConstantAccel { v0, a0 } => v0.norm().max((v0 + a0 * duration).norm()),
        TrajectoryKind::Piecewise(ref segments) => segments
            .iter()
            .map(|s| max_speed(&s.kind, s.duration))
            .fold(0.0, f64::max),
    }
}

fn max_accel(kind: &TrajectoryKind) -> f64 {
    match *kind {
        TrajectoryKind::Circular { radius, angular_rate } => radius * angular_rate * angular_rate,
        TrajectoryKind::Sinusoidal {
            amplitude,
            angular_rate,
            ..
        } => (amplitude * angular_rate * angular_rate).abs(),
        TrajectoryKind::Linear { .. } => 0.0,
        TrajectoryKind::ConstantAccel { a0, .. } => a0.norm(),
        TrajectoryKind::Piecewise(ref segments) => {
            segments.iter().map(|s| max_accel(&s.kind)).fold(0.0, f64::max)
        }
    }
}

fn max_jerk(kind: &TrajectoryKind) -> f64 {
    match *kind {
        TrajectoryKind::Circular { radius, angular_rate } => radius * angular_rate.abs().powi(3),
        TrajectoryKind::Sinusoidal {
            amplitude,
            angular_rate,
            ..
        } => (amplitude * angular_rate.powi(3)).abs(),
        TrajectoryKind::Linear { .. } | TrajectoryKind::ConstantAccel { .. } => 0.0,
        TrajectoryKind::Piecewise(ref segments) => {
            segments.iter().map(|s| max_jerk(&s.kind)).fold(0.0, f64::max)
        }
    }
}
