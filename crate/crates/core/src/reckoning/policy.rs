use std::f64::consts::PI;

use super::ReckoningError;
use crate::anfis::AnfisNetwork;

/// Orientation threshold used by policies that only gate on position. The wrapped
/// orientation gap never exceeds π, so a strict `>` comparison never fires.
pub const ORIENTATION_DISABLED: f64 = PI;

/// Position and orientation thresholds in force at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Meters.
    pub pos: f64,
    /// Radians.
    pub or: f64,
}

/// One distance band of a multi-level policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    /// Viewer distance upper bound, meters.
    pub max_distance: f64,
    pub th_pos: f64,
}

/// What the sender knows when it picks a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThresholdContext {
    /// Distance from the entity to the observing site, meters.
    pub viewer_distance: f64,
    /// Position error magnitude, signed by its projection on the direction of motion.
    pub position_error: f64,
    /// Speed, m/s.
    pub speed: f64,
    /// Acceleration magnitude, m/s².
    pub acceleration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdPolicy {
    Fixed {
        th_pos: f64,
        th_or: f64,
    },
    /// Threshold chosen by viewer distance: close entities get tight thresholds.
    MultiLevel {
        bands: Vec<Band>,
    },
    /// Threshold predicted by a neuro-fuzzy network from the current error and kinematics,
    /// clamped to `[th_min, th_max]`.
    AnfisAdaptive {
        network: Box<AnfisNetwork>,
        th_min: f64,
        th_max: f64,
    },
}

impl ThresholdPolicy {
    /// Position-only fixed threshold.
    pub fn fixed(th_pos: f64) -> Result<Self, ReckoningError> {
        Self::fixed_with_orientation(th_pos, ORIENTATION_DISABLED)
    }

    pub fn fixed_with_orientation(th_pos: f64, th_or: f64) -> Result<Self, ReckoningError> {
        let p = Self::Fixed { th_pos, th_or };
        p.validate()?;
        Ok(p)
    }

    pub fn multi_level(bands: Vec<Band>) -> Result<Self, ReckoningError> {
        let p = Self::MultiLevel { bands };
        p.validate()?;
        Ok(p)
    }

    pub fn anfis(network: AnfisNetwork, th_min: f64, th_max: f64) -> Result<Self, ReckoningError> {
        let p = Self::AnfisAdaptive {
            network: Box::new(network),
            th_min,
            th_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ReckoningError> {
        let bad = |m: String| Err(ReckoningError::InvalidPolicy(m));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self {
            Self::Fixed { th_pos, th_or } => {
                if !positive(*th_pos) || !positive(*th_or) {
                    return bad(format!("fixed thresholds must be positive, got ({th_pos}, {th_or})"));
                }
            }
            Self::MultiLevel { bands } => {
                if bands.is_empty() {
                    return bad("multi-level policy needs at least one band".into());
                }
                for w in bands.windows(2) {
                    if !(w[0].max_distance < w[1].max_distance) {
                        return bad("bands must be sorted by strictly increasing distance".into());
                    }
                    if w[0].th_pos > w[1].th_pos {
                        return bad("band thresholds must not decrease with distance".into());
                    }
                }
                for b in bands {
                    if !positive(b.th_pos) || !(b.max_distance >= 0.0) {
                        return bad(format!("invalid band ({}, {})", b.max_distance, b.th_pos));
                    }
                }
            }
            Self::AnfisAdaptive { network, th_min, th_max } => {
                if !positive(*th_min) || !(th_max.is_finite() && th_max >= th_min) {
                    return bad(format!("need 0 < th_min ≤ th_max, got [{th_min}, {th_max}]"));
                }
                network.validate().map_err(|e| ReckoningError::InvalidPolicy(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Largest position threshold the policy can return.
    pub fn max_th_pos(&self) -> f64 {
        match self {
            Self::Fixed { th_pos, .. } => *th_pos,
            Self::MultiLevel { bands } => bands.last().map_or(0.0, |b| b.th_pos),
            Self::AnfisAdaptive { th_max, .. } => *th_max,
        }
    }

    /// Thresholds for `ctx`. A network that fails to fire, or yields a non-finite value,
    /// falls back to `th_max`.
    pub fn current(&self, ctx: &ThresholdContext) -> Thresholds {
        match self {
            Self::Fixed { th_pos, th_or } => Thresholds { pos: *th_pos, or: *th_or },
            Self::MultiLevel { bands } => {
                let band = bands
                    .iter()
                    .find(|b| b.max_distance >= ctx.viewer_distance)
                    .or(bands.last())
                    .expect("validated policy has bands");
                Thresholds {
                    pos: band.th_pos,
                    or: ORIENTATION_DISABLED,
                }
            }
            Self::AnfisAdaptive { network, th_min, th_max } => {
                let out = network
                    .output(ctx.position_error, ctx.speed, ctx.acceleration)
                    .ok()
                    .filter(|v| v.is_finite())
                    .unwrap_or(*th_max);
                Thresholds {
                    pos: out.clamp(*th_min, *th_max),
                    or: ORIENTATION_DISABLED,
                }
            }
        }
    }
}

/// Free-function form of [`ThresholdPolicy::current`].
pub fn current_threshold(policy: &ThresholdPolicy, ctx: &ThresholdContext) -> Thresholds {
    policy.current(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anfis::{AnfisNetwork, Consequent};

    #[test]
    fn fixed_is_constant() {
        let p = ThresholdPolicy::fixed_with_orientation(0.5, 0.1).unwrap();
        for d in [0.0, 10.0, 1e6] {
            let ctx = ThresholdContext {
                viewer_distance: d,
                position_error: d,
                speed: 3.0,
                acceleration: 1.0,
            };
            assert_eq!(p.current(&ctx), Thresholds { pos: 0.5, or: 0.1 });
        }
    }

    #[test]
    fn multi_level_band_lookup() {
        let p = ThresholdPolicy::multi_level(vec![
            Band { max_distance: 10.0, th_pos: 0.2 },
            Band { max_distance: 100.0, th_pos: 1.0 },
        ])
        .unwrap();
        let at = |d| p.current(&ThresholdContext { viewer_distance: d, ..Default::default() }).pos;
        assert_eq!(at(5.0), 0.2);
        assert_eq!(at(10.0), 0.2);
        assert_eq!(at(50.0), 1.0);
        assert_eq!(at(500.0), 1.0);
    }

    #[test]
    fn multi_level_rejects_shrinking_thresholds() {
        let r = ThresholdPolicy::multi_level(vec![
            Band { max_distance: 10.0, th_pos: 1.0 },
            Band { max_distance: 100.0, th_pos: 0.2 },
        ]);
        assert!(r.is_err());
        assert!(ThresholdPolicy::multi_level(vec![]).is_err());
        assert!(ThresholdPolicy::fixed(0.0).is_err());
        assert!(ThresholdPolicy::fixed(-1.0).is_err());
    }

    #[test]
    fn single_rule_anfis_returns_its_bias() {
        let u = [(-1.0, 1.0), (-5.0, 5.0), (-5.0, 5.0)];
        let net = AnfisNetwork::constant(u, 0.3).unwrap();
        assert_eq!(net.rules[0].consequent, Consequent::constant(0.3));
        let p = ThresholdPolicy::anfis(net, 0.1, 1.0).unwrap();
        for (e, v, a) in [(0.0, 0.0, 0.0), (-0.7, 4.0, 2.0), (3.0, 99.0, -9.0)] {
            let ctx = ThresholdContext {
                viewer_distance: 1.0,
                position_error: e,
                speed: v,
                acceleration: a,
            };
            assert!((p.current(&ctx).pos - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn anfis_output_is_clamped() {
        let u = [(-1.0, 1.0), (-5.0, 5.0), (-5.0, 5.0)];
        let hi = ThresholdPolicy::anfis(AnfisNetwork::constant(u, 7.0).unwrap(), 0.1, 1.0).unwrap();
        assert_eq!(hi.current(&ThresholdContext::default()).pos, 1.0);
        let lo = ThresholdPolicy::anfis(AnfisNetwork::constant(u, -7.0).unwrap(), 0.1, 1.0).unwrap();
        assert_eq!(lo.current(&ThresholdContext::default()).pos, 0.1);
    }
}
