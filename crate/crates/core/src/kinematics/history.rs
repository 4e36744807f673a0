use std::collections::VecDeque;

use super::{heading, KinematicState, KinematicsError, Vec3};

/// Bounded ring of timestamped positions, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionHistory {
    capacity: usize,
    samples: VecDeque<(f64, Vec3)>,
}

impl PositionHistory {
    pub fn new(capacity: usize) -> Result<Self, KinematicsError> {
        if capacity < 3 {
            return Err(KinematicsError::HistoryCapacity(capacity));
        }
        Ok(Self {
            capacity,
            samples: VecDeque::with_capacity(capacity),
        })
    }

    /// Appends a sample, evicting the oldest when full. Timestamps must strictly increase.
    pub fn push(&mut self, t: f64, position: Vec3) -> Result<(), KinematicsError> {
        if let Some(&(newest, _)) = self.samples.back() {
            if !(t > newest) {
                return Err(KinematicsError::NonIncreasingTimestamp { t, newest });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((t, position));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, Vec3)> {
        self.samples.iter()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    /// Builds a history without the monotonicity check, for exercising the fit's guards.
    #[doc(hidden)]
    pub fn from_raw(samples: Vec<(f64, Vec3)>) -> Self {
        Self {
            capacity: samples.len().max(3),
            samples: samples.into(),
        }
    }
}

/// Quadratic through the newest three samples, expressed about the newest timestamp.
///
/// Uses Newton divided differences: with `d₁`, `d₂` the first differences and
/// `q = (d₂ − d₁)/(t₂ − t₀)`, the curve is `p₂ + d₂(t − t₂) + q(t − t₂)(t − t₁)`,
/// so `V = d₂ + q(t₂ − t₁)` and `A = 2q`.
pub fn fit_history_quadratic(history: &PositionHistory) -> Result<KinematicState, KinematicsError> {
    let n = history.samples.len();
    if n < 3 {
        return Err(KinematicsError::InsufficientData { have: n });
    }
    let (t0, p0) = history.samples[n - 3];
    let (t1, p1) = history.samples[n - 2];
    let (t2, p2) = history.samples[n - 1];
    let (h01, h12, h02) = (t1 - t0, t2 - t1, t2 - t0);
    if h01 == 0.0 || h12 == 0.0 || h02 == 0.0 {
        return Err(KinematicsError::DegenerateFit);
    }
    let d1 = (p1 - p0) * (1.0 / h01);
    let d2 = (p2 - p1) * (1.0 / h12);
    let q = (d2 - d1) * (1.0 / h02);
    let velocity = d2 + q * h12;
    let acceleration = q * 2.0;
    Ok(KinematicState::new(p2, velocity, acceleration, heading(velocity), t2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{extrapolate, ExtrapolationOrder, Trajectory};

    fn history(samples: &[(f64, f64)]) -> PositionHistory {
        let mut h = PositionHistory::new(4).unwrap();
        for &(t, x) in samples {
            h.push(t, Vec3::new(x, 0.0, 0.0)).unwrap();
        }
        h
    }

    #[test]
    fn collinear_samples() {
        let s = fit_history_quadratic(&history(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])).unwrap();
        assert_eq!(s.velocity, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.acceleration, Vec3::ZERO);
        assert_eq!(s.timestamp, 2.0);
    }

    #[test]
    fn parabola_about_newest() {
        // Vandermonde solve by hand for x = t²: about t = 2, P = 4, V = 4, A = 2.
        let s = fit_history_quadratic(&history(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)])).unwrap();
        assert_eq!(s.position, Vec3::new(4.0, 0.0, 0.0));
        assert_eq!(s.velocity, Vec3::new(4.0, 0.0, 0.0));
        assert_eq!(s.acceleration, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn uses_only_newest_three() {
        let h = history(&[(0.0, 100.0), (1.0, 0.0), (2.0, 1.0), (3.0, 4.0)]);
        let s = fit_history_quadratic(&h).unwrap();
        assert_eq!(s.acceleration, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut h = PositionHistory::new(3).unwrap();
        for i in 0..5 {
            h.push(i as f64, Vec3::ZERO).unwrap();
        }
        assert_eq!(h.len(), 3);
        assert_eq!(h.iter().next().unwrap().0, 2.0);
    }

    #[test]
    fn insufficient_and_degenerate() {
        let h = history(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(fit_history_quadratic(&h), Err(KinematicsError::InsufficientData { have: 2 }));
        let raw = PositionHistory::from_raw(vec![
            (0.0, Vec3::ZERO),
            (1.0, Vec3::ZERO),
            (1.0, Vec3::ZERO),
        ]);
        assert_eq!(fit_history_quadratic(&raw), Err(KinematicsError::DegenerateFit));
    }

    #[test]
    fn push_rejects_non_increasing() {
        let mut h = PositionHistory::new(3).unwrap();
        h.push(1.0, Vec3::ZERO).unwrap();
        assert!(h.push(1.0, Vec3::ZERO).is_err());
        assert!(h.push(0.5, Vec3::ZERO).is_err());
        assert!(PositionHistory::new(2).is_err());
    }

    #[test]
    fn circle_history_predicts_next_sample() {
        let traj = Trajectory::circular(1.0, 1.0, 1.0).unwrap();
        let mut h = PositionHistory::new(3).unwrap();
        for t in [0.0, 0.01, 0.02] {
            h.push(t, traj.sample_state(t).unwrap().position).unwrap();
        }
        let s = fit_history_quadratic(&h).unwrap();
        let est = extrapolate(&s, 0.03, ExtrapolationOrder::Second).unwrap();
        assert!(traj.sample_state(0.03).unwrap().position.distance(est) < 1e-5);
    }
}
