//! Exact expected-disruption values on small networks, by memoized
//! expectimax over belief states.
//!
//! Every action strictly shrinks the set of faulty-or-uncertain nodes, so
//! the belief process is acyclic and plain depth-first recursion with a
//! state-keyed cache terminates. Feasible belief-state counts still grow
//! combinatorially, hence the node-count guard.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rollout::{rollout_with, RolloutTrace};
use crate::state::BeliefState;
use crate::transition::{enumerate_transitions, Realization};

/// Default node-count cap for exact solving.
pub const DEFAULT_SIZE_LIMIT: usize = 12;

/// Memoizing exact solver for one instance.
pub struct ExactSolver<'a> {
    instance: &'a Instance,
    cache: FxHashMap<BeliefState, f64>,
}

impl<'a> ExactSolver<'a> {
    pub fn new(instance: &'a Instance) -> Result<ExactSolver<'a>> {
        ExactSolver::with_size_limit(instance, DEFAULT_SIZE_LIMIT)
    }

    pub fn with_size_limit(instance: &'a Instance, limit: usize) -> Result<ExactSolver<'a>> {
        if instance.n() > limit {
            return Err(Error::SizeGuard {
                n: instance.n(),
                limit,
            });
        }
        Ok(ExactSolver {
            instance,
            cache: FxHashMap::default(),
        })
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    /// Minimum expected disruption time from `state` to full restoration.
    pub fn value(&mut self, state: &BeliefState) -> f64 {
        if state.is_terminal(self.instance.n()) {
            return 0.0;
        }
        if let Some(&v) = self.cache.get(state) {
            return v;
        }
        let mut best = f64::INFINITY;
        for a in state.faulty.union(state.unknown).iter() {
            let q = self.q_raw(state, a);
            if q < best {
                best = q;
            }
        }
        self.cache.insert(*state, best);
        best
    }

    fn q_raw(&mut self, state: &BeliefState, action: usize) -> f64 {
        let mut total = state.action_cost(self.instance, action);
        let outcomes = enumerate_transitions(state, action, self.instance)
            .expect("action drawn from the legal action set");
        for outcome in outcomes {
            total += outcome.probability * self.value(&outcome.state);
        }
        total
    }

    /// Expected disruption of taking `action` now and acting optimally after.
    pub fn action_value(&mut self, state: &BeliefState, action: usize) -> Result<f64> {
        if !state.faulty.contains(action) && !state.unknown.contains(action) {
            return Err(Error::InvalidAction(action));
        }
        Ok(self.q_raw(state, action))
    }

    /// Optimal action; ties go to the lowest node index. `None` on terminal
    /// states.
    pub fn best_action(&mut self, state: &BeliefState) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for a in state.faulty.union(state.unknown).iter() {
            let q = self.q_raw(state, a);
            if best.map_or(true, |(bq, _)| q < bq) {
                best = Some((q, a));
            }
        }
        best.map(|(_, a)| a)
    }

    /// Value of the full restoration problem from the depot.
    pub fn initial_value(&mut self) -> f64 {
        self.value(&BeliefState::initial(self.instance.n()))
    }

    /// Executes the greedy-optimal policy against a fixed fault pattern,
    /// reusing the value cache across calls.
    pub fn greedy_rollout(&mut self, realization: &Realization) -> RolloutTrace {
        let instance = self.instance;
        rollout_with(instance, realization, |state| {
            self.best_action(state)
                .expect("nonterminal state has actions")
        })
        .expect("solver rollout only takes legal actions")
    }

    /// All belief states the solver has evaluated (the reachable ones, when
    /// queries started from the initial state).
    pub fn visited_states(&self) -> impl Iterator<Item = &BeliefState> {
        self.cache.keys()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }
}

/// One-shot optimal rollout for CLI and test use.
pub fn oracle_rollout(instance: &Instance, realization: &Realization) -> Result<RolloutTrace> {
    let mut solver = ExactSolver::new(instance)?;
    Ok(solver.greedy_rollout(realization))
}
