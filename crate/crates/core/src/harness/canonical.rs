use crate::kinematics::{DrModel, ExtrapolationOrder, Trajectory, Vec3};
use crate::netsim::{Jitter, NetworkModel, QoSProfile, Scenario, SenderConfig};
use crate::reckoning::{Band, Convergence, ThresholdPolicy};

/// Thresholds swept when building the ANFIS training set.
pub const TRAINING_CANDIDATES: [f64; 8] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0];

pub const CANONICAL_SEED: u64 = 42;

/// Reference run: a 5 m, 1 rad/s sinusoid drifting at 1 m/s for 120 s, order-1 DR ticked
/// at 100 Hz, a 50 ± 10 ms channel with 1 % loss, observed from (60, 0, 0).
pub fn canonical_sinusoid(policy: ThresholdPolicy) -> Scenario {
    Scenario {
        trajectory: Trajectory::sinusoidal(5.0, 1.0, 1.0, 120.0).expect("valid constants"),
        sender: SenderConfig {
            viewer: Vec3::new(60.0, 0.0, 0.0),
            ..SenderConfig::new(DrModel::new(ExtrapolationOrder::First), policy, 0.01)
        },
        convergence: Convergence::Snap,
        network: NetworkModel::new(0.05, Jitter::Uniform { half_width: 0.01 }, 0.01, CANONICAL_SEED)
            .expect("valid constants"),
        qos: QoSProfile::tight(),
        duration: 120.0,
        measurement_dt: 0.01,
    }
}

fn bands(pairs: &[(f64, f64)]) -> ThresholdPolicy {
    ThresholdPolicy::multi_level(
        pairs
            .iter()
            .map(|&(max_distance, th_pos)| Band { max_distance, th_pos })
            .collect(),
    )
    .expect("valid constants")
}

/// Area-of-interest baseline: thresholds widen with viewer distance.
pub fn aoi_policy() -> ThresholdPolicy {
    bands(&[(20.0, 0.3), (50.0, 0.6), (100.0, 1.0)])
}

/// Sensitive-region baseline: a tighter near band.
pub fn sr_policy() -> ThresholdPolicy {
    bands(&[(10.0, 0.1), (30.0, 0.4), (100.0, 0.8)])
}

pub fn fixed_baseline() -> ThresholdPolicy {
    ThresholdPolicy::fixed(0.5).expect("valid constant")
}

/// Named baselines used in comparison runs.
pub fn baselines() -> Vec<(String, ThresholdPolicy)> {
    vec![
        ("aoi".into(), aoi_policy()),
        ("sr".into(), sr_policy()),
        ("fixed:0.5".into(), fixed_baseline()),
    ]
}
