use super::{Channel, Delivery, EventQueue, MetricsReport, NetsimError, NetworkModel, QoSProfile, Sample};
use crate::kinematics::{DrModel, Trajectory, Vec3};
use crate::reckoning::{
    signed_error, ApplyOutcome, Convergence, DeadReckonMirror, EmitReason, EntityStatePdu, ReceiverSite, SenderSite, ThresholdPolicy,
    DEFAULT_HEARTBEAT, PDU_SIZE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SenderConfig {
    pub model: DrModel,
    /// History length for a mirror that refits its base from received positions.
    pub history_fit: Option<usize>,
    pub policy: ThresholdPolicy,
    pub heartbeat_period: f64,
    pub tick_dt: f64,
    /// Observer position for distance-banded policies.
    pub viewer: Vec3,
}

impl SenderConfig {
    pub fn new(model: DrModel, policy: ThresholdPolicy, tick_dt: f64) -> Self {
        Self {
            model,
            history_fit: None,
            policy,
            heartbeat_period: DEFAULT_HEARTBEAT,
            tick_dt,
            viewer: Vec3::ZERO,
        }
    }

    fn mirror(&self) -> Result<DeadReckonMirror, NetsimError> {
        Ok(match self.history_fit {
            Some(cap) => DeadReckonMirror::with_history_fit(self.model, cap)?,
            None => DeadReckonMirror::new(self.model),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub trajectory: Trajectory,
    pub sender: SenderConfig,
    pub convergence: Convergence,
    pub network: NetworkModel,
    pub qos: QoSProfile,
    pub duration: f64,
    pub measurement_dt: f64,
}

impl Scenario {
    /// Number of measurement ticks per sender tick.
    fn tick_ratio(&self) -> Result<u64, NetsimError> {
        let r = self.sender.tick_dt / self.measurement_dt;
        let k = r.round();
        if k < 1.0 || (r - k).abs() > 1e-9 * k {
            return Err(NetsimError::InvalidScenario(format!(
                "sender tick {} s must be a whole multiple of the measurement tick {} s",
                self.sender.tick_dt, self.measurement_dt
            )));
        }
        Ok(k as u64)
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        let bad = |m: String| Err(NetsimError::InvalidScenario(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.duration > self.trajectory.duration() + 1e-9 {
            return bad(format!(
                "duration {} s exceeds the trajectory span {} s",
                self.duration,
                self.trajectory.duration()
            ));
        }
        if !(self.measurement_dt.is_finite() && self.measurement_dt > 0.0) {
            return bad(format!("measurement tick must be positive, got {}", self.measurement_dt));
        }
        if self.measurement_dt > self.sender.tick_dt {
            return bad("measurement tick must not exceed the sender tick".into());
        }
        self.tick_ratio()?;
        self.network.validate()?;
        self.qos.validate()?;
        self.sender.policy.validate()?;
        Ok(())
    }

    fn steps(&self) -> u64 {
        let n = (self.duration / self.measurement_dt).round();
        let n = if n * self.measurement_dt > self.trajectory.duration() { n - 1.0 } else { n };
        n as u64
    }
}

/// Runs the sender, channel and receiver in lockstep and collects the metrics.
///
/// Time advances in measurement ticks `t = k·measurement_dt`. At each tick the sender
/// runs first (when due), then every packet that has arrived by `t` is applied in
/// arrival order, then both errors are sampled.
pub fn run_scenario(sc: &Scenario) -> Result<MetricsReport, NetsimError> {
    sc.validate()?;
    let ratio = sc.tick_ratio()?;
    let mut sender = SenderSite::new(
        sc.trajectory.clone(),
        sc.sender.mirror()?,
        sc.sender.policy.clone(),
        sc.sender.heartbeat_period,
        sc.sender.tick_dt,
    )?
    .with_viewer(sc.sender.viewer);
    let mut receiver = ReceiverSite::new(sc.sender.mirror()?, sc.convergence)?;
    let mut channel = Channel::new(sc.network)?;
    let mut in_flight: EventQueue<EntityStatePdu> = EventQueue::new();

    let mut report = MetricsReport {
        duration: sc.duration,
        th_pos_max: sc.sender.policy.max_th_pos(),
        v_dev_max: 2.0 * sc.trajectory.max_speed(),
        a_dev_max: 2.0 * sc.trajectory.max_acceleration(),
        ..MetricsReport::default()
    };
    let steps = sc.steps();
    report.series.reserve(steps as usize + 1);

    for k in 0..=steps {
        let t = k as f64 * sc.measurement_dt;
        if k % ratio == 0 {
            let tick = sender.tick(t)?;
            if let Some(em) = tick.emission {
                report.packets_sent += 1;
                report.emissions.push(t);
                match em.reason {
                    EmitReason::Heartbeat => report.heartbeat_packets += 1,
                    r if r.is_threshold() => report.threshold_packets += 1,
                    _ => {}
                }
                match channel.transmit(em.pdu, t) {
                    Some((pdu, t_arrive)) => in_flight.push(t_arrive, pdu),
                    None => report.packets_dropped += 1,
                }
            }
        }
        while let Some((t_arrive, pdu)) = in_flight.pop_due(t) {
            report.packets_delivered += 1;
            report.deliveries.push(Delivery {
                sequence: pdu.sequence,
                t_send: pdu.send_time,
                t_arrive,
            });
            if receiver.apply(&pdu, t_arrive)? == ApplyOutcome::Stale {
                report.packets_stale += 1;
            }
        }
        let actual = sc.trajectory.sample_state(t)?;
        let offset = sender.local_offset(t)?;
        let e_r = match receiver.estimate(t) {
            Ok(p) => actual.position.distance(p),
            Err(_) => f64::NAN,
        };
        let th = sender.thresholds().expect("the first measurement tick is a sender tick");
        report.series.push(Sample {
            t,
            e_s: offset.norm(),
            e_r,
            th: th.pos,
            e_signed: signed_error(offset, actual.velocity),
            speed: actual.velocity.norm(),
            acceleration: actual.acceleration.norm(),
        });
    }
    report.packets_in_flight = in_flight.len() as u64;
    finish(&mut report);
    Ok(report)
}

fn finish(r: &mut MetricsReport) {
    let measured: Vec<&Sample> = r.series.iter().filter(|s| s.e_r.is_finite()).collect();
    if !measured.is_empty() {
        r.max_e_r = measured.iter().map(|s| s.e_r).fold(0.0, f64::max);
        r.mean_e_r = measured.iter().map(|s| s.e_r).sum::<f64>() / measured.len() as f64;
        r.incoherence_ratio = measured.iter().filter(|s| s.e_r > s.th).count() as f64 / measured.len() as f64;
    }
    r.max_e_s = r.series.iter().map(|s| s.e_s).fold(0.0, f64::max);
    r.mean_update_frequency = r.packets_sent as f64 / r.duration;
    r.bandwidth = (PDU_SIZE as u64 * r.packets_delivered) as f64 / r.duration;
    r.loss_ratio = if r.packets_sent > 0 {
        r.packets_dropped as f64 / r.packets_sent as f64
    } else {
        0.0
    };
    let mut delays: Vec<f64> = r.deliveries.iter().map(|d| d.t_arrive - d.t_send).collect();
    if !delays.is_empty() {
        delays.sort_by(f64::total_cmp);
        r.delay_mean = delays.iter().sum::<f64>() / delays.len() as f64;
        r.delay_p50 = delays[(delays.len() - 1) / 2];
        r.delay_p100 = delays[delays.len() - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::ExtrapolationOrder;
    use crate::netsim::Jitter;

    fn scenario(traj: Trajectory, order: ExtrapolationOrder, th: f64, net: NetworkModel) -> Scenario {
        let duration = traj.duration();
        Scenario {
            trajectory: traj,
            sender: SenderConfig::new(DrModel::new(order), ThresholdPolicy::fixed(th).unwrap(), 0.01),
            convergence: Convergence::Snap,
            network: net,
            qos: QoSProfile::tight(),
            duration,
            measurement_dt: 0.01,
        }
    }

    fn sinusoid(net: NetworkModel) -> Scenario {
        scenario(Trajectory::sinusoidal(5.0, 1.0, 1.0, 30.0).unwrap(), ExtrapolationOrder::First, 0.5, net)
    }

    #[test]
    fn linear_motion_is_exact() {
        let traj = Trajectory::linear(Vec3::new(1.0, 2.0, 0.0), 12.0).unwrap();
        let r = run_scenario(&scenario(traj, ExtrapolationOrder::First, 0.5, NetworkModel::ideal())).unwrap();
        assert_eq!(r.packets_sent, 3);
        assert!(r.max_e_r < 1e-9);
        assert_eq!(r.incoherence_ratio, 0.0);
        assert_eq!(r.series.len(), 1201);
    }

    #[test]
    fn ideal_channel_mirrors_sender() {
        let r = run_scenario(&sinusoid(NetworkModel::ideal())).unwrap();
        assert!(r.packets_sent > 10);
        for s in &r.series {
            assert_eq!(s.e_r, s.e_s, "t={}", s.t);
        }
    }

    #[test]
    fn delayed_channel_is_transiently_incoherent() {
        let net = NetworkModel::new(0.1, Jitter::None, 0.0, 1).unwrap();
        let r = run_scenario(&sinusoid(net)).unwrap();
        assert!(r.max_e_r > 0.5);
        assert!(r.incoherence_ratio > 0.0);
    }

    #[test]
    fn packets_are_conserved_and_causal() {
        let net = NetworkModel::new(0.2, Jitter::Uniform { half_width: 0.15 }, 0.1, 7).unwrap();
        let r = run_scenario(&sinusoid(net)).unwrap();
        assert!(r.conserves_packets());
        assert!(r.packets_dropped > 0);
        assert!(r.deliveries.iter().all(|d| d.t_arrive >= d.t_send));
        assert!(r.mean_e_r <= r.max_e_r);
        assert!((0.0..=1.0).contains(&r.incoherence_ratio));
    }

    #[test]
    fn runs_are_deterministic() {
        let net = NetworkModel::new(0.05, Jitter::TruncatedNormal { sigma: 0.02 }, 0.05, 11).unwrap();
        assert!(run_scenario(&sinusoid(net)).unwrap().identical(&run_scenario(&sinusoid(net)).unwrap()));
    }

    #[test]
    fn more_delay_never_helps() {
        let mean = |dt: f64| {
            let net = NetworkModel::new(dt, Jitter::Uniform { half_width: 0.01 }, 0.01, 42).unwrap();
            run_scenario(&sinusoid(net)).unwrap().mean_e_r
        };
        let means: Vec<f64> = [0.02, 0.05, 0.1, 0.2, 0.3].into_iter().map(mean).collect();
        assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
    }

    #[test]
    fn rejects_misaligned_ticks() {
        let mut sc = sinusoid(NetworkModel::ideal());
        sc.measurement_dt = 0.003;
        assert!(run_scenario(&sc).is_err());
        sc.measurement_dt = 0.02;
        assert!(run_scenario(&sc).is_err());
        sc.measurement_dt = 0.01;
        sc.duration = 100.0;
        assert!(run_scenario(&sc).is_err());
    }
}
