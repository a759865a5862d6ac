//! Stochastic dynamics: what the crew learns after each visit.
//!
//! Visiting an uncertain node is informationally quiet — the node is
//! repaired or confirmed healthy on the spot, but stays dark. Repairing a
//! known fault restores power to its subtree frontier and triggers a
//! cascade: each child that regains power is revealed (and, if healthy or
//! previously cleared, passes power on to its own children).

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::nodeset::NodeSet;
use crate::state::{BeliefState, Location, PostDecisionState};
use crate::tree::PowerTree;

/// Largest node count for which all fault patterns can be enumerated.
pub const MAX_ENUMERABLE_NODES: usize = 24;

/// A ground-truth fault pattern. The source is always faulty; every other
/// node is faulty independently with the instance's fault probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Realization {
    pub faulty: NodeSet,
}

impl Realization {
    /// Draws a pattern: node 1 faulty, nodes `2..=n` i.i.d. Bernoulli.
    pub fn sample(n: usize, fault_prob: f64, rng: &mut impl Rng) -> Realization {
        let mut faulty = NodeSet::singleton(1);
        for v in 2..=n {
            if rng.gen_bool(fault_prob) {
                faulty = faulty.insert(v);
            }
        }
        Realization { faulty }
    }

    pub fn is_faulty(&self, node: usize) -> bool {
        self.faulty.contains(node)
    }

    /// Probability of this exact pattern under the given fault probability.
    pub fn probability(&self, n: usize, fault_prob: f64) -> f64 {
        let extra = self.faulty.len() - 1; // source does not count
        fault_prob.powi(extra as i32) * (1.0 - fault_prob).powi((n - 1 - extra) as i32)
    }

    /// All `2^(n-1)` patterns with their probabilities, in ascending
    /// bitmask order over nodes `2..=n`.
    pub fn enumerate_all(n: usize, fault_prob: f64) -> Result<Vec<(Realization, f64)>> {
        if n > MAX_ENUMERABLE_NODES {
            return Err(Error::SizeGuard {
                n,
                limit: MAX_ENUMERABLE_NODES,
            });
        }
        let count = 1u64 << (n - 1);
        let mut out = Vec::with_capacity(count as usize);
        for mask in 0..count {
            let mut faulty = NodeSet::singleton(1);
            for bit in 0..(n - 1) {
                if mask & (1 << bit) != 0 {
                    faulty = faulty.insert(bit + 2);
                }
            }
            let real = Realization { faulty };
            let prob = real.probability(n, fault_prob);
            out.push((real, prob));
        }
        Ok(out)
    }
}

/// Where the truth about an uncertain node comes from when a cascade
/// reveals it: a fixed pattern during evaluation, fresh coin flips during
/// training.
pub trait FaultOracle {
    fn is_faulty(&mut self, node: usize) -> bool;
}

/// Reveals according to a fixed ground-truth pattern.
pub struct FixedFaults<'a>(pub &'a Realization);

impl FaultOracle for FixedFaults<'_> {
    fn is_faulty(&mut self, node: usize) -> bool {
        self.0.is_faulty(node)
    }
}

/// Reveals by flipping a coin per node, for sampled transitions.
pub struct SampledFaults<'a, R: Rng> {
    pub fault_prob: f64,
    pub rng: &'a mut R,
}

impl<R: Rng> FaultOracle for SampledFaults<'_, R> {
    fn is_faulty(&mut self, node: usize) -> bool {
        let _ = node;
        self.rng.gen_bool(self.fault_prob)
    }
}

/// Completes a transition from a post-decision state.
///
/// After a probe visit (target now cleared) nothing else changes. After a
/// repair (target now served) power floods outward: cleared children become
/// served and recurse; uncertain children are revealed by the oracle —
/// faulty ones join the known-fault pool, healthy ones become served and
/// recurse. Children are expanded in ascending order, breadth first.
pub fn resolve(
    post: &PostDecisionState,
    tree: &PowerTree,
    faults: &mut impl FaultOracle,
) -> BeliefState {
    let belief = post.as_belief();
    let Location::Node(target) = post.location else {
        return belief;
    };
    if !post.served.contains(target) {
        return belief; // probe visit: deterministic
    }

    let mut state = belief;
    let mut queue = VecDeque::new();
    queue.push_back(target);
    while let Some(v) = queue.pop_front() {
        for &c in tree.children(v) {
            let c = c as usize;
            if state.cleared.contains(c) {
                state.cleared = state.cleared.remove(c);
                state.served = state.served.insert(c);
                queue.push_back(c);
            } else if state.unknown.contains(c) {
                state.unknown = state.unknown.remove(c);
                if faults.is_faulty(c) {
                    state.faulty = state.faulty.insert(c);
                } else {
                    state.served = state.served.insert(c);
                    queue.push_back(c);
                }
            }
        }
    }
    state
}

/// One move against a fixed ground truth.
pub fn apply_with_realization(
    pre: &BeliefState,
    action: usize,
    tree: &PowerTree,
    realization: &Realization,
) -> Result<BeliefState> {
    let post = pre.post_decision(action)?;
    Ok(resolve(&post, tree, &mut FixedFaults(realization)))
}

/// One move with freshly sampled fault outcomes.
pub fn sample_transition(
    pre: &BeliefState,
    action: usize,
    instance: &Instance,
    rng: &mut impl Rng,
) -> Result<BeliefState> {
    let post = pre.post_decision(action)?;
    Ok(resolve(
        &post,
        &instance.tree,
        &mut SampledFaults {
            fault_prob: instance.fault_prob,
            rng,
        },
    ))
}

/// A possible next belief state and its probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionOutcome {
    pub state: BeliefState,
    pub probability: f64,
}

/// All possible next belief states for `(pre, action)` with probabilities.
///
/// Probe visits have a single certain outcome. Repairs branch on every
/// uncertain node the cascade reaches; outcomes are listed depth first with
/// the faulty branch explored before the healthy one. Every outcome state
/// is distinct and the probabilities sum to one.
pub fn enumerate_transitions(
    pre: &BeliefState,
    action: usize,
    instance: &Instance,
) -> Result<Vec<TransitionOutcome>> {
    let post = pre.post_decision(action)?;
    if post.cleared.contains(action) {
        return Ok(vec![TransitionOutcome {
            state: post.as_belief(),
            probability: 1.0,
        }]);
    }
    let mut out = Vec::new();
    branch(
        &instance.tree,
        instance.fault_prob,
        post.as_belief(),
        vec![action],
        1.0,
        &mut out,
    );
    Ok(out)
}

/// Expands the power frontier until the first unresolved uncertain child,
/// then forks on its status. `frontier` holds nodes whose children may
/// still need expanding; re-scans are harmless because pool membership
/// records what is already settled.
fn branch(
    tree: &PowerTree,
    fault_prob: f64,
    mut state: BeliefState,
    mut frontier: Vec<usize>,
    probability: f64,
    out: &mut Vec<TransitionOutcome>,
) {
    let mut i = 0;
    while i < frontier.len() {
        let v = frontier[i];
        for &c in tree.children(v) {
            let c = c as usize;
            if state.cleared.contains(c) {
                state.cleared = state.cleared.remove(c);
                state.served = state.served.insert(c);
                frontier.push(c);
            } else if state.unknown.contains(c) {
                state.unknown = state.unknown.remove(c);

                let mut faulty_state = state;
                faulty_state.faulty = faulty_state.faulty.insert(c);
                branch(
                    tree,
                    fault_prob,
                    faulty_state,
                    frontier.clone(),
                    probability * fault_prob,
                    out,
                );

                state.served = state.served.insert(c);
                frontier.push(c);
                branch(
                    tree,
                    fault_prob,
                    state,
                    frontier,
                    probability * (1.0 - fault_prob),
                    out,
                );
                return;
            }
        }
        i += 1;
    }
    out.push(TransitionOutcome { state, probability });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain3() -> Instance {
        fixture(
            &[None, Some(1), Some(2)],
            &[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            1.0,
            0.5,
        )
    }

    /// Source with three leaves, all at unit distance from the depot.
    fn star4() -> Instance {
        fixture(
            &[None, Some(1), Some(1), Some(1)],
            &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)],
            1.0,
            0.5,
        )
    }

    #[test]
    fn probe_has_single_certain_outcome() {
        let inst = chain3();
        let pre = BeliefState::initial(3);
        let outcomes = enumerate_transitions(&pre, 3, &inst).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert_eq!(outcomes[0].probability, 1.0);
        let s = outcomes[0].state;
        assert_eq!(s.location, Location::Node(3));
        assert!(s.cleared.contains(3));
        assert!(s.faulty.contains(1));
        assert!(s.unknown.contains(2) && !s.unknown.contains(3));
    }

    #[test]
    fn chain_repair_branches_with_expected_probabilities() {
        let inst = chain3();
        let pre = BeliefState::initial(3);
        let outcomes = enumerate_transitions(&pre, 1, &inst).unwrap();
        assert_eq!(outcomes.len(), 3);

        // Child 2 found faulty: cascade stops there.
        assert_eq!(outcomes[0].probability, 0.5);
        assert!(outcomes[0].state.served.contains(1));
        assert!(outcomes[0].state.faulty.contains(2));
        assert!(outcomes[0].state.unknown.contains(3));

        // 2 healthy, 3 faulty.
        assert_eq!(outcomes[1].probability, 0.25);
        assert!(outcomes[1].state.served.contains(2));
        assert!(outcomes[1].state.faulty.contains(3));

        // Everything healthy: terminal.
        assert_eq!(outcomes[2].probability, 0.25);
        assert!(outcomes[2].state.is_terminal(3));

        for o in &outcomes {
            o.state.check_feasible(&inst).unwrap();
        }
    }

    #[test]
    fn star_repair_enumerates_all_leaf_patterns() {
        let inst = star4();
        let pre = BeliefState::initial(4);
        let outcomes = enumerate_transitions(&pre, 1, &inst).unwrap();
        assert_eq!(outcomes.len(), 8);
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // All outcome states distinct.
        for (i, a) in outcomes.iter().enumerate() {
            for b in outcomes.iter().skip(i + 1) {
                assert_ne!(a.state, b.state);
            }
        }
    }

    #[test]
    fn cascade_passes_through_cleared_nodes() {
        let inst = chain3();
        // Node 2 already probed; repairing the source must sweep 2 into
        // service and reveal 3.
        let pre: BeliefState = "L:2;S:;C:2;F:1;U:3".parse().unwrap();
        let outcomes = enumerate_transitions(&pre, 1, &inst).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes[0].state.served.contains(2));
        assert!(outcomes[0].state.faulty.contains(3));
        assert_eq!(outcomes[0].probability, 0.5);
        assert!(outcomes[1].state.is_terminal(3));
    }

    #[test]
    fn realization_fixes_the_cascade() {
        let inst = chain3();
        let pre = BeliefState::initial(3);
        let real = Realization {
            faulty: NodeSet::singleton(1).insert(3),
        };
        let next = apply_with_realization(&pre, 1, &inst.tree, &real).unwrap();
        assert!(next.served.contains(1) && next.served.contains(2));
        assert!(next.faulty.contains(3));
        assert!(next.unknown.is_empty());
    }

    #[test]
    fn sampled_transition_is_seed_deterministic() {
        let inst = star4();
        let pre = BeliefState::initial(4);
        let a = sample_transition(&pre, 1, &inst, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_transition(&pre, 1, &inst, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        a.check_feasible(&inst).unwrap();
    }

    #[test]
    fn sampled_matches_some_enumerated_outcome() {
        let inst = star4();
        let pre = BeliefState::initial(4);
        let outcomes = enumerate_transitions(&pre, 1, &inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = sample_transition(&pre, 1, &inst, &mut rng).unwrap();
            assert!(outcomes.iter().any(|o| o.state == s));
        }
    }

    #[test]
    fn realization_sampling_and_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let r = Realization::sample(5, 0.3, &mut rng);
            assert!(r.is_faulty(1));
        }
        let none = Realization::sample(5, 0.0, &mut rng);
        assert_eq!(none.faulty, NodeSet::singleton(1));

        let all = Realization::enumerate_all(3, 0.3).unwrap();
        assert_eq!(all.len(), 4);
        let total: f64 = all.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // First pattern: only the source faulty.
        assert_eq!(all[0].0.faulty, NodeSet::singleton(1));
        assert!((all[0].1 - 0.49).abs() < 1e-12);
        for (r, p) in &all {
            assert!((r.probability(3, 0.3) - p).abs() < 1e-15);
        }
        assert!(Realization::enumerate_all(30, 0.5).is_err());
    }

    #[test]
    fn outcome_probabilities_match_fault_counts() {
        // Each repair outcome's probability is p^(new faults) *
        // (1-p)^(newly served former unknowns).
        let inst = star4();
        let pre = BeliefState::initial(4);
        let p = inst.fault_prob;
        for o in enumerate_transitions(&pre, 1, &inst).unwrap() {
            let new_faults = o.state.faulty.len(); // source left the pool
            let newly_served = o.state.served.len() - 1;
            let expect = p.powi(new_faults as i32) * (1.0 - p).powi(newly_served as i32);
            assert!((o.probability - expect).abs() < 1e-12);
        }
    }
}
