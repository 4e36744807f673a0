use super::{DeadReckonMirror, EntityStatePdu, ReckoningError};
use crate::kinematics::{DrModel, KinematicState, Vec3};

pub const DEFAULT_BLEND_WINDOW: f64 = 0.2;

/// How the receiver moves from its old estimate to a newly received one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convergence {
    /// Jump to the new extrapolation at once.
    Snap,
    /// Interpolate linearly from the pre-update estimate to the new extrapolation over
    /// `window` seconds.
    Linear { window: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyOutcome {
    Applied,
    Stale,
}

/// Estimate source. A blend that is still running when the next update arrives becomes
/// the `from` side of the next blend, which keeps the estimate continuous.
#[derive(Debug, Clone, PartialEq)]
enum Estimator {
    Base(KinematicState),
    Blend {
        from: Box<Estimator>,
        to: KinematicState,
        start: f64,
        end: f64,
    },
}

impl Estimator {
    fn eval(&self, model: &DrModel, t: f64) -> Result<Vec3, ReckoningError> {
        match self {
            Self::Base(s) => Ok(model.extrapolate(s, t)?),
            Self::Blend { from, to, start, end } => {
                let new = model.extrapolate(to, t)?;
                if t >= *end {
                    return Ok(new);
                }
                let old = from.eval(model, t)?;
                let w = ((t - start) / (end - start)).clamp(0.0, 1.0);
                Ok(old.lerp(new, w))
            }
        }
    }

    fn collapse(self, t: f64) -> Self {
        match self {
            Self::Blend { to, end, .. } if t >= end => Self::Base(to),
            Self::Blend { from, to, start, end } => Self::Blend {
                from: Box::new(from.collapse(t)),
                to,
                start,
                end,
            },
            base => base,
        }
    }

    fn depth(&self) -> usize {
        match self {
            Self::Base(_) => 0,
            Self::Blend { from, .. } => 1 + from.depth(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReceiverSite {
    pub mirror: DeadReckonMirror,
    pub convergence: Convergence,
    estimator: Option<Estimator>,
    highest_sequence_applied: Option<u32>,
    stale_discarded: u64,
}

impl ReceiverSite {
    pub fn new(mirror: DeadReckonMirror, convergence: Convergence) -> Result<Self, ReckoningError> {
        if let Convergence::Linear { window } = convergence {
            if !(window.is_finite() && window >= 0.0) {
                return Err(ReckoningError::InvalidConfig(format!(
                    "blend window must be nonnegative, got {window}"
                )));
            }
        }
        Ok(Self {
            mirror,
            convergence,
            estimator: None,
            highest_sequence_applied: None,
            stale_discarded: 0,
        })
    }

    pub fn highest_sequence_applied(&self) -> Option<u32> {
        self.highest_sequence_applied
    }

    pub fn stale_discarded(&self) -> u64 {
        self.stale_discarded
    }

    pub fn is_initialized(&self) -> bool {
        self.estimator.is_some()
    }

    /// Number of blends still stacked behind the current estimate.
    pub fn blend_depth(&self) -> usize {
        self.estimator.as_ref().map_or(0, Estimator::depth)
    }

    /// Applies `pdu` received at `t_arrive`. Updates whose sequence does not exceed the
    /// highest applied one are discarded and counted.
    pub fn apply(&mut self, pdu: &EntityStatePdu, t_arrive: f64) -> Result<ApplyOutcome, ReckoningError> {
        if t_arrive < pdu.send_time {
            return Err(ReckoningError::TimeRegression {
                t: t_arrive,
                previous: pdu.send_time,
            });
        }
        if self.highest_sequence_applied.is_some_and(|h| pdu.sequence <= h) {
            self.stale_discarded += 1;
            return Ok(ApplyOutcome::Stale);
        }
        let previous = self.estimator.take().map(|e| e.collapse(t_arrive));
        if let Err(e) = self.mirror.apply(pdu.state) {
            self.estimator = previous;
            return Err(e);
        }
        let to = *self.mirror.base().expect("mirror holds the applied state");
        self.estimator = Some(match (self.convergence, previous) {
            (Convergence::Linear { window }, Some(from)) if window > 0.0 => Estimator::Blend {
                from: Box::new(from),
                to,
                start: t_arrive,
                end: t_arrive + window,
            },
            _ => Estimator::Base(to),
        });
        self.highest_sequence_applied = Some(pdu.sequence);
        Ok(ApplyOutcome::Applied)
    }

    /// Estimated position at `t`.
    pub fn estimate(&self, t: f64) -> Result<Vec3, ReckoningError> {
        self.estimator
            .as_ref()
            .ok_or(ReckoningError::NotInitialized)?
            .eval(&self.mirror.model, t)
    }
}

pub fn receiver_apply(r: &mut ReceiverSite, pdu: &EntityStatePdu, t_arrive: f64) -> Result<ApplyOutcome, ReckoningError> {
    r.apply(pdu, t_arrive)
}

pub fn receiver_estimate(r: &ReceiverSite, t: f64) -> Result<Vec3, ReckoningError> {
    r.estimate(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{extrapolate, ExtrapolationOrder};

    fn pdu(seq: u32, t: f64, p: Vec3, v: Vec3) -> EntityStatePdu {
        EntityStatePdu {
            entity_id: 1,
            sequence: seq,
            send_time: t,
            state: KinematicState::new(p, v, Vec3::ZERO, 0.0, t),
        }
    }

    fn receiver(c: Convergence) -> ReceiverSite {
        ReceiverSite::new(DeadReckonMirror::with_order(ExtrapolationOrder::First), c).unwrap()
    }

    #[test]
    fn not_initialized() {
        assert_eq!(receiver(Convergence::Snap).estimate(0.0), Err(ReckoningError::NotInitialized));
    }

    #[test]
    fn snap_extrapolates_new_state() {
        let mut r = receiver(Convergence::Snap);
        let p = pdu(1, 1.0, Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 0.0, 0.0));
        r.apply(&p, 1.0).unwrap();
        assert_eq!(r.estimate(1.0).unwrap(), p.state.position);
        r.apply(&p, 1.0).unwrap();
        let later = pdu(2, 1.5, Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0));
        r.apply(&later, 1.6).unwrap();
        let want = extrapolate(&later.state, 1.6, ExtrapolationOrder::First).unwrap();
        assert_eq!(r.estimate(1.6).unwrap(), want);
    }

    #[test]
    fn stale_and_duplicate_packets_are_ignored() {
        let mut r = receiver(Convergence::Snap);
        let fifth = pdu(5, 5.0, Vec3::new(5.0, 0.0, 0.0), Vec3::ZERO);
        r.apply(&fifth, 5.0).unwrap();
        let before = r.estimate(6.0).unwrap();
        let third = pdu(3, 5.5, Vec3::new(-9.0, 0.0, 0.0), Vec3::ZERO);
        assert_eq!(r.apply(&third, 5.5).unwrap(), ApplyOutcome::Stale);
        assert_eq!(r.apply(&fifth, 5.7).unwrap(), ApplyOutcome::Stale);
        assert_eq!(r.estimate(6.0).unwrap(), before);
        assert_eq!(r.stale_discarded(), 2);
        assert_eq!(r.highest_sequence_applied(), Some(5));
    }

    #[test]
    fn linear_blend_endpoints_and_midpoint() {
        let mut r = receiver(Convergence::Linear { window: 0.2 });
        let first = pdu(1, 0.0, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
        r.apply(&first, 0.0).unwrap();
        let second = pdu(2, 1.0, Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let ta = 1.05;
        let old_at = |t: f64| extrapolate(&first.state, t, ExtrapolationOrder::First).unwrap();
        let new_at = |t: f64| extrapolate(&second.state, t, ExtrapolationOrder::First).unwrap();
        let pre = r.estimate(ta).unwrap();
        r.apply(&second, ta).unwrap();
        assert_eq!(r.estimate(ta).unwrap(), pre);
        assert_eq!(r.estimate(ta + 0.2).unwrap(), new_at(ta + 0.2));
        let mid = r.estimate(ta + 0.1).unwrap();
        let mean = (old_at(ta + 0.1) + new_at(ta + 0.1)) * 0.5;
        assert!(mid.distance(mean) < 1e-12);
    }

    #[test]
    fn overlapping_blends_stay_continuous() {
        let mut r = receiver(Convergence::Linear { window: 0.5 });
        r.apply(&pdu(1, 0.0, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)), 0.0).unwrap();
        r.apply(&pdu(2, 0.1, Vec3::new(0.0, 1.0, 0.0), Vec3::ZERO), 0.1).unwrap();
        let before = r.estimate(0.2).unwrap();
        r.apply(&pdu(3, 0.2, Vec3::new(0.0, -1.0, 0.0), Vec3::ZERO), 0.2).unwrap();
        assert_eq!(r.blend_depth(), 2);
        assert!(r.estimate(0.2).unwrap().distance(before) < 1e-15);
        r.apply(&pdu(4, 2.0, Vec3::ZERO, Vec3::ZERO), 2.0).unwrap();
        assert_eq!(r.blend_depth(), 1);
    }

    #[test]
    fn negative_delay_rejected() {
        let mut r = receiver(Convergence::Snap);
        assert!(r.apply(&pdu(1, 1.0, Vec3::ZERO, Vec3::ZERO), 0.5).is_err());
    }
}
