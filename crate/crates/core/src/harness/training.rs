use super::HarnessError;
use crate::anfis::{train_epoch, AnfisNetwork, EpochReport, MfFamily, TrainingSet, INPUT_COUNT};
use super::compare::with_policy;
use crate::netsim::{run_scenario, MetricsReport, Scenario};
use crate::reckoning::ThresholdPolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Length of the scoring windows, seconds.
    pub window_s: f64,
    /// Keep every `stride`-th measurement sample as a training record.
    pub stride: usize,
    /// Packet budget as a multiple of the largest candidate's packet count.
    pub budget_factor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            window_s: 1.0,
            stride: 10,
            budget_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub set: TrainingSet,
    /// Chosen threshold per scoring window.
    pub window_targets: Vec<f64>,
    pub budget: u64,
    /// Packets the chosen schedule would have sent.
    pub packets: u64,
}

/// Input universes for a threshold network on `sc`: signed error within `±th_max`,
/// speed and acceleration within the trajectory's peak magnitudes.
pub fn input_universes(sc: &Scenario, th_max: f64) -> [(f64, f64); INPUT_COUNT] {
    let v = sc.trajectory.max_speed().max(1e-3);
    let a = sc.trajectory.max_acceleration().max(1e-3);
    [(-th_max, th_max), (-v, v), (-a, a)]
}

fn validate_candidates(candidates: &[f64]) -> Result<(), HarnessError> {
    if candidates.is_empty() {
        return Err(HarnessError::Domain("no candidate thresholds".into()));
    }
    if let Some(c) = candidates.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(HarnessError::Domain(format!("candidate thresholds must be positive, got {c}")));
    }
    Ok(())
}

/// One fixed-threshold run per candidate, reduced to per-window error and packet counts.
struct CandidateRuns {
    candidates: Vec<f64>,
    reports: Vec<MetricsReport>,
    err: Vec<Vec<f64>>,
    pkts: Vec<Vec<u64>>,
    /// Candidate indices, largest threshold first.
    order: Vec<usize>,
    window_s: f64,
    windows: usize,
}

impl CandidateRuns {
    fn run(sc: &Scenario, candidates: &[f64], opts: &SweepOptions) -> Result<Self, HarnessError> {
        validate_candidates(candidates)?;
        if !(opts.window_s > 0.0 && opts.stride > 0 && opts.budget_factor > 0.0) {
            return Err(HarnessError::Domain("sweep window, stride and budget must be positive".into()));
        }
        let policies = candidates
            .iter()
            .map(|&c| Ok((format!("fixed:{c}"), ThresholdPolicy::fixed(c)?)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let reports = super::compare::run_policies(sc, &policies)?;
        let windows = ((sc.duration / opts.window_s).ceil() as usize).max(1);
        let mut runs = Self {
            candidates: candidates.to_vec(),
            err: vec![vec![0.0; windows]; candidates.len()],
            pkts: vec![vec![0u64; windows]; candidates.len()],
            order: (0..candidates.len()).collect(),
            window_s: opts.window_s,
            windows,
            reports: Vec::new(),
        };
        for (c, r) in reports.iter().enumerate() {
            for s in r.series.iter().filter(|s| s.e_r.is_finite()) {
                let w = runs.window_of(s.t);
                runs.err[c][w] += s.e_r * sc.measurement_dt;
            }
            for &t in &r.emissions {
                let w = runs.window_of(t);
                runs.pkts[c][w] += 1;
            }
        }
        // Largest threshold first so strict improvement is needed to pick a smaller one.
        runs.order.sort_by(|&a, &b| candidates[b].total_cmp(&candidates[a]));
        runs.reports = reports;
        Ok(runs)
    }

    fn window_of(&self, t: f64) -> usize {
        ((t / self.window_s) as usize).min(self.windows - 1)
    }

    fn budget(&self, factor: f64) -> u64 {
        (self.reports[self.order[0]].packets_sent as f64 * factor).floor() as u64
    }

    /// Per-window choice for packet price `mu`. Ties go to the largest threshold.
    fn choose(&self, mu: f64) -> (Vec<usize>, u64) {
        let mut picks = Vec::with_capacity(self.windows);
        let mut total = 0;
        for w in 0..self.windows {
            let mut best = self.order[0];
            let mut best_score = f64::INFINITY;
            for &c in &self.order {
                let score = self.err[c][w] + mu * self.pkts[c][w] as f64;
                if score < best_score {
                    best = c;
                    best_score = score;
                }
            }
            picks.push(best);
            total += self.pkts[best][w];
        }
        (picks, total)
    }

    /// Cheapest-error schedule whose packet total fits `budget`, found by bisecting the
    /// packet price.
    fn schedule(&self, budget: u64) -> (Vec<usize>, u64) {
        let free = self.choose(0.0);
        if free.1 <= budget {
            return free;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            if self.choose(hi).1 <= budget {
                break;
            }
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.choose(mid).1 > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.choose(hi)
    }

    fn label(&self, sc: &Scenario, opts: &SweepOptions, budget: u64, schedule_budget: u64) -> SweepOutcome {
        let (picks, packets) = self.schedule(schedule_budget);
        let window_targets: Vec<f64> = picks.iter().map(|&c| self.candidates[c]).collect();
        let th_max = self.candidates[self.order[0]];
        let universes = input_universes(sc, th_max);
        let clamp = |x: f64, u: (f64, f64)| x.clamp(u.0, u.1);
        let mut set = TrainingSet::default();
        for r in &self.reports {
            for s in r.series.iter().step_by(opts.stride) {
                let x = [
                    clamp(s.e_signed, universes[0]),
                    clamp(s.speed, universes[1]),
                    clamp(s.acceleration, universes[2]),
                ];
                set.push(x, window_targets[self.window_of(s.t)]);
            }
        }
        SweepOutcome {
            set,
            window_targets,
            budget,
            packets,
        }
    }
}

/// Runs `sc` once per fixed candidate threshold and labels every window with the
/// candidate that minimizes accumulated receiver error while the whole schedule stays
/// within the packet budget. The window costs are combined through a packet price found
/// by bisection. Records pair each kept sample's (signed error, speed, acceleration)
/// with its window's label.
pub fn sweep(sc: &Scenario, candidates: &[f64], opts: &SweepOptions) -> Result<SweepOutcome, HarnessError> {
    let runs = CandidateRuns::run(sc, candidates, opts)?;
    let budget = runs.budget(opts.budget_factor);
    Ok(runs.label(sc, opts, budget, budget))
}

pub fn generate_training_set(sc: &Scenario, candidates: &[f64], opts: &SweepOptions) -> Result<TrainingSet, HarnessError> {
    Ok(sweep(sc, candidates, opts)?.set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub family: MfFamily,
    /// Perturb the initial premises with this seed.
    pub jitter_seed: Option<u64>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 0.01,
            family: MfFamily::GBell,
            jitter_seed: None,
        }
    }
}

/// Trains a default-rule network on `set` and returns it with the per-epoch reports.
pub fn train_anfis(
    set: &TrainingSet,
    universes: [(f64, f64); INPUT_COUNT],
    opts: &TrainOptions,
) -> Result<(AnfisNetwork, Vec<EpochReport>), HarnessError> {
    let mut net = AnfisNetwork::with_default_rules(universes, opts.family)?;
    net.learning_rate = opts.learning_rate;
    if let Some(seed) = opts.jitter_seed {
        net.jitter_premises(seed, 0.02);
    }
    let mut history = Vec::with_capacity(opts.epochs);
    for _ in 0..opts.epochs {
        history.push(train_epoch(&mut net, set)?);
    }
    Ok((net, history))
}

/// Most retraining rounds spent pulling a deployed policy back under its packet budget.
pub const CALIBRATION_ROUNDS: usize = 8;

#[derive(Debug, Clone)]
pub struct TrainedPolicy {
    pub policy: ThresholdPolicy,
    pub network: AnfisNetwork,
    pub history: Vec<EpochReport>,
    /// Packet budget from the sweep.
    pub budget: u64,
    /// Packets the trained policy sent on the training scenario.
    pub packets: u64,
    /// Training rounds used, including the first.
    pub rounds: usize,
}

/// Builds the training set for `sc`, trains a network on it and wraps it as a policy
/// clamped to the candidate range.
///
/// The trained network only approximates the window schedule, so deployed on `sc` it can
/// overspend the packet budget. In that case the schedule budget is scaled down by the
/// overshoot ratio and the network is retrained, up to [`CALIBRATION_ROUNDS`] times.
pub fn train_threshold_policy(
    sc: &Scenario,
    candidates: &[f64],
    sweep_opts: &SweepOptions,
    train_opts: &TrainOptions,
) -> Result<TrainedPolicy, HarnessError> {
    let runs = CandidateRuns::run(sc, candidates, sweep_opts)?;
    let budget = runs.budget(sweep_opts.budget_factor);
    let th_min = candidates.iter().cloned().fold(f64::MAX, f64::min);
    let th_max = candidates.iter().cloned().fold(f64::MIN, f64::max);
    let universes = input_universes(sc, th_max);
    let mut schedule_budget = budget;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let out = runs.label(sc, sweep_opts, budget, schedule_budget);
        let (network, history) = train_anfis(&out.set, universes, train_opts)?;
        let policy = ThresholdPolicy::anfis(network.clone(), th_min, th_max)?;
        let packets = run_scenario(&with_policy(sc, policy.clone()))?.packets_sent;
        let trained = TrainedPolicy {
            policy,
            network,
            history,
            budget,
            packets,
            rounds,
        };
        if packets <= budget || rounds >= CALIBRATION_ROUNDS || schedule_budget == 0 {
            return Ok(trained);
        }
        let scaled = (schedule_budget as f64 * budget as f64 / packets as f64).floor() as u64;
        schedule_budget = scaled.min(schedule_budget - 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::canonical::canonical_sinusoid;
    use crate::kinematics::{Trajectory, Vec3};

    fn short_sinusoid() -> Scenario {
        let mut sc = canonical_sinusoid(ThresholdPolicy::fixed(0.5).unwrap());
        sc.duration = 20.0;
        sc
    }

    #[test]
    fn single_candidate_labels_everything() {
        let out = sweep(&short_sinusoid(), &[0.4], &SweepOptions::default()).unwrap();
        assert!(!out.set.is_empty());
        assert!(out.set.records.iter().all(|r| r.1 == 0.4));
    }

    #[test]
    fn exact_motion_prefers_largest_threshold() {
        let mut sc = short_sinusoid();
        sc.trajectory = Trajectory::linear(Vec3::new(1.0, 1.0, 0.0), 20.0).unwrap();
        let out = sweep(&sc, &[0.1, 0.3, 0.5], &SweepOptions::default()).unwrap();
        assert!(out.window_targets.iter().all(|&t| t == 0.5));
    }

    #[test]
    fn schedule_respects_budget() {
        let out = sweep(&short_sinusoid(), &[0.1, 0.3, 0.5], &SweepOptions::default()).unwrap();
        assert!(out.packets <= out.budget);
        assert!(out.window_targets.iter().any(|&t| t < 0.5));
    }

    #[test]
    fn bad_candidates_rejected() {
        assert!(sweep(&short_sinusoid(), &[], &SweepOptions::default()).is_err());
        assert!(sweep(&short_sinusoid(), &[0.2, -0.1], &SweepOptions::default()).is_err());
    }

    #[test]
    fn training_error_decreases_early() {
        let sc = short_sinusoid();
        let set = generate_training_set(&sc, &[0.1, 0.3, 0.5], &SweepOptions::default()).unwrap();
        let opts = TrainOptions {
            epochs: 10,
            ..TrainOptions::default()
        };
        let (_, hist) = train_anfis(&set, input_universes(&sc, 0.5), &opts).unwrap();
        for w in hist.windows(2) {
            assert!(w[1].error <= w[0].error, "{} > {}", w[1].error, w[0].error);
        }
    }
}
