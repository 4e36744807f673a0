use std::thread;

use super::HarnessError;
use crate::netsim::{run_scenario, MetricsReport, Scenario};
use crate::reckoning::ThresholdPolicy;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: String,
    /// Mean receiver error, meters.
    pub mean_error: f64,
    pub packets_sent: u64,
    /// Hz.
    pub mean_frequency: f64,
}

/// Policies run on one scenario, sorted by mean error ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, policy: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

/// `base` with its policy replaced.
pub fn with_policy(base: &Scenario, policy: ThresholdPolicy) -> Scenario {
    let mut sc = base.clone();
    sc.sender.policy = policy;
    sc
}

/// Runs every policy on `base` in parallel and returns the full reports in input order.
pub fn run_policies(base: &Scenario, policies: &[(String, ThresholdPolicy)]) -> Result<Vec<MetricsReport>, HarnessError> {
    thread::scope(|s| {
        let handles: Vec<_> = policies
            .iter()
            .map(|(_, p)| {
                let sc = with_policy(base, p.clone());
                s.spawn(move || run_scenario(&sc))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked").map_err(HarnessError::from))
            .collect()
    })
}

pub fn run_compare(base: &Scenario, policies: &[(String, ThresholdPolicy)]) -> Result<ComparisonTable, HarnessError> {
    if policies.len() < 2 {
        return Err(HarnessError::Domain("a comparison needs at least two policies".into()));
    }
    let reports = run_policies(base, policies)?;
    let mut rows: Vec<ComparisonRow> = policies
        .iter()
        .zip(&reports)
        .map(|((name, _), r)| ComparisonRow {
            policy: name.clone(),
            mean_error: r.mean_e_r,
            packets_sent: r.packets_sent,
            mean_frequency: r.mean_update_frequency,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.mean_error
            .total_cmp(&b.mean_error)
            .then(a.packets_sent.cmp(&b.packets_sent))
            .then_with(|| a.policy.cmp(&b.policy))
    });
    Ok(ComparisonTable { rows })
}
