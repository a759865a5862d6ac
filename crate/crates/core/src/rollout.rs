//! Executing a decision rule against one ground-truth fault pattern and
//! recording the realized disruption, leg by leg.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::state::BeliefState;
use crate::transition::{resolve, FixedFaults, Realization};

/// One crew movement: drive `from` → `to`, then repair if needed. `dark` is
/// the number of unserved nodes while the leg is underway; `repair` is the
/// realized repair time (the full repair time if the visited node was
/// actually faulty, zero otherwise).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RolloutLeg {
    pub from: usize,
    pub to: usize,
    pub travel: f64,
    pub repair: f64,
    pub dark: usize,
}

impl RolloutLeg {
    pub fn cost(&self) -> f64 {
        (self.travel + self.repair) * self.dark as f64
    }
}

/// Full record of one episode: the legs driven and the realized total
/// disruption time.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutTrace {
    pub legs: Vec<RolloutLeg>,
    pub total: f64,
}

impl RolloutTrace {
    /// Nodes in visiting order.
    pub fn visit_order(&self) -> Vec<usize> {
        self.legs.iter().map(|leg| leg.to).collect()
    }
}

/// Runs one episode: repeatedly asks `choose` for the next node, charges
/// realized travel and repair weighted by the current dark-count, and
/// updates the belief against the fixed fault pattern. Errors if `choose`
/// ever returns an illegal action.
pub fn rollout_with(
    instance: &Instance,
    realization: &Realization,
    mut choose: impl FnMut(&BeliefState) -> usize,
) -> Result<RolloutTrace> {
    let n = instance.n();
    let mut state = BeliefState::initial(n);
    let mut legs = Vec::new();
    let mut total = 0.0;
    // Every action shrinks the faulty-or-uncertain pool, so an episode has
    // at most n legs.
    for _ in 0..n {
        if state.is_terminal(n) {
            break;
        }
        let action = choose(&state);
        let post = state.post_decision(action)?;
        let from = state.location.index();
        let travel = instance.d(from, action);
        let repair = if state.faulty.contains(action) || realization.is_faulty(action) {
            instance.repair_time
        } else {
            0.0
        };
        let dark = state.dark_count(n);
        legs.push(RolloutLeg {
            from,
            to: action,
            travel,
            repair,
            dark,
        });
        total += (travel + repair) * dark as f64;
        state = resolve(&post, &instance.tree, &mut FixedFaults(realization));
    }
    if !state.is_terminal(n) {
        return Err(Error::InfeasibleState(
            "episode failed to terminate within n actions".into(),
        ));
    }
    Ok(RolloutTrace { legs, total })
}
