//! Simulation-based training of post-decision value tables.
//!
//! Each training iteration plays one restoration episode with lazily
//! sampled faults. At every decision the learner computes the one-step
//! lookahead minimum (cost plus table value of the resulting post-decision
//! key) and folds it into the estimate of the *previous* post-decision key;
//! reaching the terminal state contributes a zero sample. Action choice is
//! ε-greedy with ε shrinking as the greedy key accumulates visits.
//!
//! Training stops at a batch boundary once the table has been quiet for
//! three consecutive measured batches: no new keys, and every frequently
//! visited key's value moved less than the threshold.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::nodeset::NodeSet;
use crate::state::{BeliefState, PostDecisionState};
use crate::table::{AggregationKey, AggregationMode, TrainStamp, ValueTable};
use crate::transition::{resolve, SampledFaults};

/// Knobs for one training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Iterations before the stopping rule may fire.
    pub warmup_iterations: u64,
    /// Convergence is measured over batches of this many iterations.
    pub batch_size: u64,
    /// A key is "frequent" if visited in at least this fraction of all
    /// iterations so far.
    pub frequent_fraction: f64,
    /// Largest allowed per-batch movement of frequent keys when stopping.
    pub stop_threshold: f64,
    /// Numerator of the per-key exploration rate ε = c / visits.
    pub exploration_constant: f64,
    /// Hard iteration cap.
    pub max_iterations: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            warmup_iterations: 100_000,
            batch_size: 10_000,
            frequent_fraction: 0.75,
            stop_threshold: 0.5,
            exploration_constant: 1.0,
            max_iterations: 1_000_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.warmup_iterations == 0 || self.batch_size == 0 {
            return bad("warmup_iterations and batch_size must be positive");
        }
        if !(self.frequent_fraction > 0.0 && self.frequent_fraction < 1.0) {
            return bad("frequent_fraction must lie in (0,1)");
        }
        if !(self.stop_threshold > 0.0) || !self.stop_threshold.is_finite() {
            return bad("stop_threshold must be positive and finite");
        }
        if !(self.exploration_constant > 0.0) || !self.exploration_constant.is_finite() {
            return bad("exploration_constant must be positive and finite");
        }
        Ok(())
    }
}

/// Removes dominated uncertain candidates: visiting an uncertain node j is
/// pointless while an unserved predecessor of j — itself needing a visit —
/// is at most as far away, since j cannot regain service before that
/// predecessor is handled. Known-faulty candidates are never removed, and
/// the nearest candidate on any pruned node's source path survives, so the
/// result is nonempty.
pub fn prune_actions(state: &BeliefState, instance: &Instance) -> NodeSet {
    let candidates = state.faulty.union(state.unknown);
    let here = state.location.index();
    let mut keep = candidates;
    for j in state.unknown.iter() {
        let dj = instance.d(here, j);
        for b in instance.tree.ancestors(j).intersect(candidates).iter() {
            if instance.d(here, b) <= dj {
                keep = keep.remove(j);
                break;
            }
        }
    }
    keep
}

/// Greedy action under the table: minimizes one-step cost plus the value
/// estimate of the resulting post-decision key. Ties go to the lowest node
/// index. Returns the action, its lookahead value, and its key.
fn greedy_choice(
    state: &BeliefState,
    table: &ValueTable,
    instance: &Instance,
    candidates: NodeSet,
) -> Option<(usize, f64, AggregationKey)> {
    let mut best: Option<(usize, f64, AggregationKey)> = None;
    for a in candidates.iter() {
        let post = state.post_decision(a).expect("candidate actions are legal");
        let key = table.key_of(&post);
        let q = state.action_cost(instance, a) + table.value(key);
        if best.as_ref().map_or(true, |&(_, bq, _)| q < bq) {
            best = Some((a, q, key));
        }
    }
    best
}

/// The table-greedy action (no exploration); `None` on terminal states.
pub fn greedy_action(
    state: &BeliefState,
    table: &ValueTable,
    instance: &Instance,
    prune: bool,
) -> Option<usize> {
    let candidates = if prune {
        prune_actions(state, instance)
    } else {
        state.faulty.union(state.unknown)
    };
    greedy_choice(state, table, instance, candidates).map(|(a, _, _)| a)
}

/// ε-greedy selection: with probability `epsilon` a uniform draw over the
/// candidates, otherwise the table-greedy choice.
pub fn select_action(
    state: &BeliefState,
    table: &ValueTable,
    instance: &Instance,
    epsilon: f64,
    rng: &mut impl Rng,
    prune: bool,
) -> Result<usize> {
    let candidates = if prune {
        prune_actions(state, instance)
    } else {
        state.faulty.union(state.unknown)
    };
    if candidates.is_empty() {
        return Err(Error::InfeasibleState(
            "no candidate actions to select from".into(),
        ));
    }
    if rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
        let k = rng.gen_range(0..candidates.len());
        Ok(candidates.iter().nth(k).expect("index within set size"))
    } else {
        Ok(greedy_choice(state, table, instance, candidates)
            .expect("candidates nonempty")
            .0)
    }
}

/// Exploration rate for a key with the given visit count: `c / visits`,
/// clamped to [0,1]; never-visited keys always explore.
pub fn exploration_rate(constant: f64, visits: u64) -> f64 {
    if visits == 0 {
        1.0
    } else {
        (constant / visits as f64).clamp(0.0, 1.0)
    }
}

/// Stopping decision at a batch boundary, given the iteration count, the
/// recorded per-batch movements, and whether the last batch added keys.
pub fn should_stop(
    config: &TrainConfig,
    iterations: u64,
    new_keys_in_batch: bool,
    deltas: &[f64],
) -> bool {
    if iterations < config.warmup_iterations || new_keys_in_batch {
        return false;
    }
    deltas.len() >= 3
        && deltas[deltas.len() - 3..]
            .iter()
            .all(|d| *d < config.stop_threshold)
}

/// Per-batch training progress.
#[derive(Clone, Copy, Debug)]
pub struct BatchProgress {
    pub iterations: u64,
    pub keys: usize,
    pub new_keys: usize,
    /// Movement of frequent keys in this batch; `None` while new keys are
    /// still appearing (movement is not measured then).
    pub delta: Option<f64>,
}

fn run_episode(
    instance: &Instance,
    config: &TrainConfig,
    prune: bool,
    table: &mut ValueTable,
    rng: &mut ChaCha8Rng,
) {
    let n = instance.n();
    let mut prev_key = table.key_of(&PostDecisionState::initial(n));
    let mut state = BeliefState::initial(n);
    loop {
        if state.is_terminal(n) {
            table.observe(prev_key, 0.0);
            return;
        }
        let candidates = if prune {
            prune_actions(&state, instance)
        } else {
            state.faulty.union(state.unknown)
        };
        let (greedy, lookahead, greedy_key) =
            greedy_choice(&state, table, instance, candidates).expect("nonterminal has actions");
        table.observe(prev_key, lookahead);

        let epsilon = exploration_rate(config.exploration_constant, table.visits(greedy_key));
        let action = if rng.gen_bool(epsilon) {
            let k = rng.gen_range(0..candidates.len());
            candidates.iter().nth(k).expect("index within set size")
        } else {
            greedy
        };

        let post = state
            .post_decision(action)
            .expect("candidate actions are legal");
        prev_key = table.key_of(&post);
        state = resolve(
            &post,
            &instance.tree,
            &mut SampledFaults {
                fault_prob: instance.fault_prob,
                rng,
            },
        );
    }
}

/// Trains a value table, reporting per-batch progress through `progress`.
pub fn train_with_progress(
    instance: &Instance,
    config: &TrainConfig,
    mode: AggregationMode,
    prune: bool,
    mut progress: impl FnMut(&BatchProgress),
) -> Result<ValueTable> {
    config.validate()?;
    let mut table = ValueTable::new(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut deltas: Vec<f64> = Vec::new();
    let mut keys_at_mark = 0usize;
    let mut stopped_by_rule = false;

    while table.iterations() < config.max_iterations {
        run_episode(instance, config, prune, &mut table, &mut rng);
        table.record_iteration();

        if table.iterations() % config.batch_size == 0 {
            let iterations = table.iterations();
            let new_keys = table.len() - keys_at_mark;
            let mut delta = None;
            if iterations >= config.warmup_iterations && new_keys == 0 {
                let min_visits = (config.frequent_fraction * iterations as f64).ceil() as u64;
                delta = table.max_frequent_delta(min_visits);
                if let Some(d) = delta {
                    deltas.push(d);
                }
            }
            progress(&BatchProgress {
                iterations,
                keys: table.len(),
                new_keys,
                delta,
            });
            table.mark_batch();
            keys_at_mark = table.len();
            if should_stop(config, iterations, new_keys > 0, &deltas) {
                stopped_by_rule = true;
                break;
            }
        }
    }

    table.stamp = Some(TrainStamp {
        seed: config.seed,
        prune,
        warmup_iterations: config.warmup_iterations,
        batch_size: config.batch_size,
        frequent_fraction: config.frequent_fraction,
        stop_threshold: config.stop_threshold,
        exploration_constant: config.exploration_constant,
        max_iterations: config.max_iterations,
        stopped_by_rule,
        delta_history: deltas,
    });
    Ok(table)
}

/// Trains a value table silently.
pub fn train(
    instance: &Instance,
    config: &TrainConfig,
    mode: AggregationMode,
    prune: bool,
) -> Result<ValueTable> {
    train_with_progress(instance, config, mode, prune, |_| {})
}
