use super::ReckoningError;
use crate::kinematics::{fit_history_quadratic, DrModel, ExtrapolationOrder, KinematicState, PositionHistory};

/// History length kept by a mirror that fits its base from past updates.
pub const DEFAULT_HISTORY_CAPACITY: usize = 8;

/// The shared dead-reckoning model a sender and its receivers both run.
///
/// With `use_history_fit`, each applied update is pushed into the history; once three
/// updates are known the base velocity and acceleration come from a quadratic through
/// the newest three positions instead of the transmitted derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadReckonMirror {
    base: Option<KinematicState>,
    pub model: DrModel,
    pub use_history_fit: bool,
    history: PositionHistory,
}

impl DeadReckonMirror {
    pub fn new(model: DrModel) -> Self {
        Self {
            base: None,
            model,
            use_history_fit: false,
            history: PositionHistory::new(DEFAULT_HISTORY_CAPACITY).expect("capacity ≥ 3"),
        }
    }

    pub fn with_order(order: ExtrapolationOrder) -> Self {
        Self::new(DrModel::new(order))
    }

    pub fn with_history_fit(model: DrModel, capacity: usize) -> Result<Self, ReckoningError> {
        Ok(Self {
            base: None,
            model,
            use_history_fit: true,
            history: PositionHistory::new(capacity)?,
        })
    }

    pub fn order(&self) -> ExtrapolationOrder {
        self.model.order
    }

    pub fn base(&self) -> Option<&KinematicState> {
        self.base.as_ref()
    }

    pub fn history(&self) -> &PositionHistory {
        &self.history
    }

    /// Replaces the base with `state` (or the history fit through it).
    pub fn apply(&mut self, state: KinematicState) -> Result<(), ReckoningError> {
        if let Some(b) = &self.base {
            if state.timestamp < b.timestamp {
                return Err(ReckoningError::BaseRegression {
                    t: state.timestamp,
                    base: b.timestamp,
                });
            }
        }
        self.base = Some(if self.use_history_fit {
            self.history.push(state.timestamp, state.position)?;
            if self.history.len() >= 3 {
                fit_history_quadratic(&self.history)?
            } else {
                state
            }
        } else {
            state
        });
        Ok(())
    }

    pub fn estimate(&self, t: f64) -> Result<KinematicState, ReckoningError> {
        let base = self.base.as_ref().ok_or(ReckoningError::NotInitialized)?;
        Ok(self.model.extrapolate_state(base, t)?)
    }

    pub fn reset(&mut self) {
        self.base = None;
        self.history.clear();
    }
}
