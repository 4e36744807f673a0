use super::{policy::ThresholdContext, signed_error, DeadReckonMirror, EntityStatePdu, ReckoningError, ThresholdPolicy, Thresholds};
use crate::kinematics::{wrapped_angle_gap, Trajectory, Vec3};

pub const DEFAULT_HEARTBEAT: f64 = 5.0;

/// Slack on the heartbeat comparison so that accumulated tick times still fire on schedule.
const HEARTBEAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmitReason {
    Initial,
    Position,
    Orientation,
    Heartbeat,
}

impl EmitReason {
    /// Whether the update was forced by a threshold crossing.
    pub fn is_threshold(self) -> bool {
        matches!(self, Self::Position | Self::Orientation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub pdu: EntityStatePdu,
    pub reason: EmitReason,
}

/// Outcome of one sender tick, including the pre-emission error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickReport {
    pub t: f64,
    pub e_pos: f64,
    pub e_or: f64,
    /// `e_pos` signed by its projection on the direction of motion.
    pub e_signed: f64,
    pub thresholds: Thresholds,
    pub emission: Option<Emission>,
}

#[derive(Debug, Clone)]
pub struct SenderSite {
    pub trajectory: Trajectory,
    pub mirror: DeadReckonMirror,
    pub policy: ThresholdPolicy,
    pub heartbeat_period: f64,
    pub tick_dt: f64,
    pub entity_id: u32,
    /// Observing site used for the viewer-distance input.
    pub viewer: Vec3,
    last_send_time: Option<f64>,
    last_tick: Option<f64>,
    sequence: u32,
    thresholds: Option<Thresholds>,
}

impl SenderSite {
    pub fn new(
        trajectory: Trajectory,
        mirror: DeadReckonMirror,
        policy: ThresholdPolicy,
        heartbeat_period: f64,
        tick_dt: f64,
    ) -> Result<Self, ReckoningError> {
        if !(heartbeat_period.is_finite() && heartbeat_period > 0.0) {
            return Err(ReckoningError::InvalidConfig(format!(
                "heartbeat period must be positive, got {heartbeat_period}"
            )));
        }
        if !(tick_dt.is_finite() && tick_dt > 0.0) {
            return Err(ReckoningError::InvalidConfig(format!("tick_dt must be positive, got {tick_dt}")));
        }
        policy.validate()?;
        Ok(Self {
            trajectory,
            mirror,
            policy,
            heartbeat_period,
            tick_dt,
            entity_id: 1,
            viewer: Vec3::ZERO,
            last_send_time: None,
            last_tick: None,
            sequence: 0,
            thresholds: None,
        })
    }

    pub fn with_viewer(mut self, viewer: Vec3) -> Self {
        self.viewer = viewer;
        self
    }

    pub fn last_send_time(&self) -> Option<f64> {
        self.last_send_time
    }

    pub fn sequence(&self) -> u32 {
        self.sequence
    }

    /// Thresholds computed at the latest tick.
    pub fn thresholds(&self) -> Option<Thresholds> {
        self.thresholds
    }

    /// Sender-side error against the local mirror, without side effects.
    pub fn local_error(&self, t: f64) -> Result<f64, ReckoningError> {
        Ok(self.local_offset(t)?.norm())
    }

    /// Actual minus mirrored position at `t`.
    pub fn local_offset(&self, t: f64) -> Result<Vec3, ReckoningError> {
        let actual = self.trajectory.sample_state(t)?;
        let est = self.mirror.estimate(t)?;
        Ok(actual.position - est.position)
    }

    /// Advances to `t`, emitting an update if a threshold or the heartbeat requires one.
    pub fn tick(&mut self, t: f64) -> Result<TickReport, ReckoningError> {
        if let Some(prev) = self.last_tick {
            if t < prev {
                return Err(ReckoningError::TimeRegression { t, previous: prev });
            }
        }
        let actual = self.trajectory.sample_state(t)?;
        let (e_pos, e_or, e_signed) = match self.mirror.base() {
            Some(_) => {
                let est = self.mirror.estimate(t)?;
                let diff = actual.position - est.position;
                (
                    diff.norm(),
                    wrapped_angle_gap(actual.orientation, est.orientation),
                    signed_error(diff, actual.velocity),
                )
            }
            None => (0.0, 0.0, 0.0),
        };
        let ctx = ThresholdContext {
            viewer_distance: actual.position.distance(self.viewer),
            position_error: e_signed,
            speed: actual.velocity.norm(),
            acceleration: actual.acceleration.norm(),
        };
        let th = self.policy.current(&ctx);
        self.thresholds = Some(th);
        self.last_tick = Some(t);

        let reason = match self.last_send_time {
            None => Some(EmitReason::Initial),
            Some(_) if e_pos > th.pos => Some(EmitReason::Position),
            Some(_) if e_or > th.or => Some(EmitReason::Orientation),
            Some(last) if t - last >= self.heartbeat_period - HEARTBEAT_SLACK => Some(EmitReason::Heartbeat),
            Some(_) => None,
        };
        let emission = match reason {
            Some(reason) => {
                self.mirror.apply(actual)?;
                self.last_send_time = Some(t);
                self.sequence = self.sequence.wrapping_add(1);
                Some(Emission {
                    pdu: EntityStatePdu {
                        entity_id: self.entity_id,
                        sequence: self.sequence,
                        send_time: t,
                        state: actual,
                    },
                    reason,
                })
            }
            None => None,
        };
        Ok(TickReport {
            t,
            e_pos,
            e_or,
            e_signed,
            thresholds: th,
            emission,
        })
    }
}

/// Free-function form of [`SenderSite::tick`], returning only the emitted PDU.
pub fn sender_tick(s: &mut SenderSite, t: f64) -> Result<Option<EntityStatePdu>, ReckoningError> {
    Ok(s.tick(t)?.emission.map(|e| e.pdu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{ExtrapolationOrder, Trajectory};

    fn run(traj: Trajectory, order: ExtrapolationOrder, th: f64, dt: f64) -> Vec<(f64, EmitReason)> {
        let duration = traj.duration();
        let mut s = SenderSite::new(
            traj,
            DeadReckonMirror::with_order(order),
            ThresholdPolicy::fixed(th).unwrap(),
            DEFAULT_HEARTBEAT,
            dt,
        )
        .unwrap();
        let n = (duration / dt).round() as usize;
        let mut out = Vec::new();
        for k in 0..=n {
            let t = k as f64 * dt;
            if let Some(e) = s.tick(t).unwrap().emission {
                out.push((t, e.reason));
            }
        }
        out
    }

    #[test]
    fn linear_motion_sends_heartbeats_only() {
        let traj = Trajectory::linear(Vec3::new(2.0, -1.0, 0.5), 12.0).unwrap();
        let sent = run(traj, ExtrapolationOrder::First, 0.5, 0.01);
        let times: Vec<f64> = sent.iter().map(|s| s.0).collect();
        assert_eq!(sent.len(), 3);
        assert!((times[0] - 0.0).abs() < 1e-9 && (times[1] - 5.0).abs() < 1e-9 && (times[2] - 10.0).abs() < 1e-9);
        assert_eq!(sent[0].1, EmitReason::Initial);
        assert!(sent[1..].iter().all(|s| s.1 == EmitReason::Heartbeat));
    }

    #[test]
    fn constant_accel_second_order_sends_heartbeats_only() {
        let traj = Trajectory::constant_accel(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0), 12.0).unwrap();
        let sent = run(traj, ExtrapolationOrder::Second, 0.01, 0.01);
        assert_eq!(sent.len(), 3);
        assert!(sent[1..].iter().all(|s| s.1 == EmitReason::Heartbeat));
    }

    #[test]
    fn error_resets_after_emission() {
        let traj = Trajectory::sinusoidal(5.0, 1.0, 1.0, 20.0).unwrap();
        let mut s = SenderSite::new(
            traj,
            DeadReckonMirror::with_order(ExtrapolationOrder::First),
            ThresholdPolicy::fixed(0.5).unwrap(),
            DEFAULT_HEARTBEAT,
            0.01,
        )
        .unwrap();
        let mut fired = 0;
        for k in 0..=2000 {
            let t = k as f64 * 0.01;
            if s.tick(t).unwrap().emission.is_some() {
                fired += 1;
                assert!(s.local_error(t).unwrap() < 1e-12);
            }
        }
        assert!(fired > 3);
    }

    #[test]
    fn time_must_not_go_backwards() {
        let traj = Trajectory::linear(Vec3::new(1.0, 0.0, 0.0), 10.0).unwrap();
        let mut s = SenderSite::new(
            traj,
            DeadReckonMirror::with_order(ExtrapolationOrder::First),
            ThresholdPolicy::fixed(0.5).unwrap(),
            DEFAULT_HEARTBEAT,
            0.01,
        )
        .unwrap();
        s.tick(1.0).unwrap();
        assert!(s.tick(0.5).is_err());
    }

    #[test]
    fn rejects_bad_periods() {
        let traj = Trajectory::linear(Vec3::new(1.0, 0.0, 0.0), 10.0).unwrap();
        let m = DeadReckonMirror::with_order(ExtrapolationOrder::First);
        let p = ThresholdPolicy::fixed(0.5).unwrap();
        assert!(SenderSite::new(traj.clone(), m.clone(), p.clone(), 0.0, 0.01).is_err());
        assert!(SenderSite::new(traj, m, p, 5.0, -0.01).is_err());
    }
}
