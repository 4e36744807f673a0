use super::{MetricsReport, NetsimError};
use crate::analysis::emax_bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Entities interacting closely: 100 ms, 2 % loss.
    Tight,
    /// Interactions that tolerate transmission errors: 300 ms, 5 % loss.
    Loose,
}

impl Coupling {
    pub fn label(self) -> &'static str {
        match self {
            Self::Tight => "tight",
            Self::Loose => "loose",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tight" => Some(Self::Tight),
            "loose" => Some(Self::Loose),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoSProfile {
    pub coupling: Coupling,
    pub dt_max_ms: f64,
    /// Largest acceptable fraction of lost packets.
    pub loss_max: f64,
}

impl QoSProfile {
    pub fn tight() -> Self {
        Self {
            coupling: Coupling::Tight,
            dt_max_ms: 100.0,
            loss_max: 0.02,
        }
    }

    pub fn loose() -> Self {
        Self {
            coupling: Coupling::Loose,
            dt_max_ms: 300.0,
            loss_max: 0.05,
        }
    }

    pub fn for_coupling(c: Coupling) -> Self {
        match c {
            Coupling::Tight => Self::tight(),
            Coupling::Loose => Self::loose(),
        }
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        if !(self.dt_max_ms.is_finite() && self.dt_max_ms >= 0.0) || !(0.0..=1.0).contains(&self.loss_max) {
            return Err(NetsimError::InvalidScenario(format!(
                "QoS limits out of range: dt_max {} ms, loss {}",
                self.dt_max_ms, self.loss_max
            )));
        }
        Ok(())
    }

    pub fn dt_max_s(&self) -> f64 {
        self.dt_max_ms / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QosViolation {
    Latency { observed_ms: f64, limit_ms: f64 },
    Loss { observed: f64, limit: f64 },
    /// Receiver error went past the delay-aware worst-case bound.
    Coherence { max_e_r: f64, e_max: f64, incoherence_ratio: f64 },
}

impl std::fmt::Display for QosViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Latency { observed_ms, limit_ms } => {
                write!(f, "latency {observed_ms:.3} ms exceeds {limit_ms} ms")
            }
            Self::Loss { observed, limit } => write!(f, "loss {observed:.4} exceeds {limit}"),
            Self::Coherence {
                max_e_r,
                e_max,
                incoherence_ratio,
            } => write!(
                f,
                "receiver error {max_e_r:.4} m exceeds bound {e_max:.4} m (incoherent {:.2}% of ticks)",
                incoherence_ratio * 100.0
            ),
        }
    }
}

/// Violations of `profile` observed in `report`; empty when the profile is met.
pub fn qos_check(profile: &QoSProfile, report: &MetricsReport) -> Vec<QosViolation> {
    let mut out = Vec::new();
    let observed_ms = report.delay_p100 * 1000.0;
    if observed_ms > profile.dt_max_ms {
        out.push(QosViolation::Latency {
            observed_ms,
            limit_ms: profile.dt_max_ms,
        });
    }
    if report.loss_ratio > profile.loss_max {
        out.push(QosViolation::Loss {
            observed: report.loss_ratio,
            limit: profile.loss_max,
        });
    }
    if report.incoherence_ratio > 0.0 {
        if let Ok(b) = emax_bound(report.th_pos_max, report.v_dev_max, report.a_dev_max, profile.dt_max_s()) {
            if report.max_e_r > b.e_max {
                out.push(QosViolation::Coherence {
                    max_e_r: report.max_e_r,
                    e_max: b.e_max,
                    incoherence_ratio: report.incoherence_ratio,
                });
            }
        }
    }
    out
}
