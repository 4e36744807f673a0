//! Error mathematics for dead reckoning: the delay-aware error bound, the area between
//! real and extrapolated paths, action integrals, and update-rate predictions.

mod path;
mod variational;

use thiserror::Error;

use crate::kinematics::Vec3;

pub use path::{surface_error, SampledPath, SurfaceErrorEstimate};
pub use variational::{action_integral, perturbed_action, stationarity_residual, ActionEvaluation, Integrand};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn domain<T>(msg: impl Into<String>) -> Result<T, AnalysisError> {
    Err(AnalysisError::Domain(msg.into()))
}

/// Worst-case receiver error once network delay is accounted for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    pub th_pos: f64,
    pub v_dev_max: f64,
    pub a_dev_max: f64,
    pub dt_max: f64,
    pub e_max: f64,
    /// Threshold, velocity and acceleration terms; they sum to `e_max`.
    pub components: [f64; 3],
}

/// `E_max = Th_pos + V_dev·DT + ½·A_dev·DT²`.
///
/// While an update is in flight the receiver keeps extrapolating the old state. After
/// `DT` seconds the gap has grown by at most the velocity deviation times `DT` plus half
/// the acceleration deviation times `DT²`, on top of the threshold the sender allowed.
pub fn emax_bound(th_pos: f64, v_dev_max: f64, a_dev_max: f64, dt_max: f64) -> Result<ErrorBound, AnalysisError> {
    for (name, v) in [("th_pos", th_pos), ("v_dev_max", v_dev_max), ("a_dev_max", a_dev_max), ("dt_max", dt_max)] {
        if !(v.is_finite() && v >= 0.0) {
            return domain(format!("{name} must be finite and nonnegative, got {v}"));
        }
    }
    let components = [th_pos, v_dev_max * dt_max, 0.5 * a_dev_max * dt_max * dt_max];
    Ok(ErrorBound {
        th_pos,
        v_dev_max,
        a_dev_max,
        dt_max,
        e_max: components.iter().sum(),
        components,
    })
}

/// Smallest distance from `x` to any sample of `path`.
pub fn fuzzy_distance(x: Vec3, path: &SampledPath) -> f64 {
    path.points().iter().map(|p| x.distance(*p)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionKind {
    /// Any motion whose jerk magnitude is bounded by `jerk_max` (m/s³).
    General { jerk_max: f64 },
    Circular { radius: f64, angular_rate: f64 },
}

/// Predicted update rate in Hz for a second-order extrapolator held to error `e_p`.
///
/// The leading error term of a second-order extrapolation after `Δt` is `|u⃛|·Δt³/3!`;
/// setting it equal to `e_p` gives the interval between updates, so the rate is
/// `∛(jerk/(6·e_p))`. A circle of radius `r` at rate `ω` has jerk `r·ω³`.
pub fn update_frequency(kind: MotionKind, e_p: f64) -> Result<f64, AnalysisError> {
    if !(e_p.is_finite() && e_p > 0.0) {
        return domain(format!("E_p must be positive, got {e_p}"));
    }
    let jerk = match kind {
        MotionKind::General { jerk_max } => {
            if !(jerk_max.is_finite() && jerk_max >= 0.0) {
                return domain(format!("jerk_max must be nonnegative, got {jerk_max}"));
            }
            jerk_max
        }
        MotionKind::Circular { radius, angular_rate } => {
            if !(radius > 0.0 && angular_rate > 0.0 && radius.is_finite() && angular_rate.is_finite()) {
                return domain("circular motion needs positive radius and rate");
            }
            radius * angular_rate.powi(3)
        }
    };
    Ok((jerk / (6.0 * e_p)).cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bound_examples() {
        assert_eq!(emax_bound(0.5, 3.0, 9.0, 0.0).unwrap().e_max, 0.5);
        let b = emax_bound(0.5, 2.0, 4.0, 0.1).unwrap();
        assert!((b.e_max - 0.72).abs() < 1e-15);
        assert_eq!(b.components.iter().sum::<f64>(), b.e_max);
        let c = emax_bound(0.3, 4.0, 8.0, 0.05).unwrap();
        assert!((c.e_max - 0.51).abs() < 1e-15);
        assert!(emax_bound(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(emax_bound(0.1, 0.0, 0.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn bound_is_monotone(
            base in prop::array::uniform4(0.0f64..10.0),
            which in 0usize..4,
            bump in 0.0f64..5.0,
        ) {
            let b0 = emax_bound(base[0], base[1], base[2], base[3]).unwrap();
            let mut up = base;
            up[which] += bump;
            let b1 = emax_bound(up[0], up[1], up[2], up[3]).unwrap();
            prop_assert!(b1.e_max >= b0.e_max);
            prop_assert!(b0.e_max >= b0.th_pos);
        }
    }

    #[test]
    fn frequency_examples() {
        let f = update_frequency(MotionKind::Circular { radius: 10.0, angular_rate: 1.0 }, 0.1).unwrap();
        assert!((f - 2.554).abs() < 1e-3);
        let f4 = update_frequency(MotionKind::Circular { radius: 10.0, angular_rate: 1.0 }, 0.4).unwrap();
        assert!((f / f4 - 4f64.cbrt()).abs() < 1e-12);
        assert_eq!(update_frequency(MotionKind::General { jerk_max: 0.0 }, 0.1).unwrap(), 0.0);
        assert!(update_frequency(MotionKind::General { jerk_max: 1.0 }, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn circular_matches_general(r in 0.1f64..100.0, w in 0.1f64..10.0, e in 0.01f64..5.0) {
            let c = update_frequency(MotionKind::Circular { radius: r, angular_rate: w }, e).unwrap();
            let g = update_frequency(MotionKind::General { jerk_max: r * w.powi(3) }, e).unwrap();
            prop_assert_eq!(c, g);
        }
    }

    #[test]
    fn fuzzy_distance_examples() {
        let line = SampledPath::from_fn(0.0, 1.0, 1001, |t| Vec3::new(t, 0.0, 0.0)).unwrap();
        assert_eq!(fuzzy_distance(Vec3::new(0.25, 0.0, 0.0), &line), 0.0);
        let d = fuzzy_distance(Vec3::new(0.0, 1.0, 0.0), &line);
        assert!((d - 1.0).abs() <= 0.0005);
    }
}
