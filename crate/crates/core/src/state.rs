//! Belief states for the restoration crew: which nodes are served, which
//! visited-but-dark, which known faulty, and which still uncertain, plus
//! one-step costs and the deterministic part of the dynamics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::nodeset::NodeSet;

/// Crew position: the depot or a network node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Depot,
    Node(usize),
}

impl Location {
    /// Index into the instance distance matrix (depot is 0).
    pub fn index(self) -> usize {
        match self {
            Location::Depot => 0,
            Location::Node(v) => v,
        }
    }

    pub fn from_index(i: usize) -> Location {
        if i == 0 {
            Location::Depot
        } else {
            Location::Node(i)
        }
    }
}

/// What the crew knows before choosing its next stop.
///
/// The five node pools partition `1..=n`:
/// - `served`: repaired or revealed healthy, with power restored;
/// - `cleared`: visited and found fault-free, but still dark because a
///   faulty node sits between them and the source;
/// - `faulty`: revealed faulty, awaiting repair;
/// - `unknown`: status not yet known.
///
/// (The fifth pool in spirit — "not yet reached" — is `unknown` itself;
/// `served ∪ cleared ∪ faulty ∪ unknown` covers every node.)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeliefState {
    pub location: Location,
    pub served: NodeSet,
    pub cleared: NodeSet,
    pub faulty: NodeSet,
    pub unknown: NodeSet,
}

/// State after committing to visit `target` but before seeing any outcome.
/// `target` has already been moved to its post-visit pool: an uncertain
/// node becomes cleared (it will be repaired-or-confirmed on arrival and no
/// longer uncertain), a faulty node becomes served.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PostDecisionState {
    pub location: Location,
    pub served: NodeSet,
    pub cleared: NodeSet,
    pub faulty: NodeSet,
    pub unknown: NodeSet,
}

impl BeliefState {
    /// Start of a restoration episode: crew at the depot, the source known
    /// faulty, every other node uncertain.
    pub fn initial(n: usize) -> BeliefState {
        debug_assert!(n >= 1);
        let mut unknown = NodeSet::EMPTY;
        for v in 2..=n {
            unknown = unknown.insert(v);
        }
        BeliefState {
            location: Location::Depot,
            served: NodeSet::EMPTY,
            cleared: NodeSet::EMPTY,
            faulty: NodeSet::singleton(1),
            unknown,
        }
    }

    /// Number of customers still without power.
    pub fn dark_count(&self, n: usize) -> usize {
        n - self.served.len()
    }

    /// Everything is restored: nothing faulty, uncertain, or dark remains.
    pub fn is_terminal(&self, n: usize) -> bool {
        self.served.len() == n
    }

    /// Nodes the crew may visit next: every known-faulty node and every
    /// uncertain node.
    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.faulty.union(self.unknown).iter()
    }

    /// One-step expected cost of visiting `action` from this state: travel
    /// plus repair time (certain for a known fault, in expectation for an
    /// uncertain node), paid by every currently dark customer.
    pub fn action_cost(&self, instance: &Instance, action: usize) -> f64 {
        let travel = instance.d(self.location.index(), action);
        let repair = if self.faulty.contains(action) {
            instance.repair_time
        } else {
            instance.fault_prob * instance.repair_time
        };
        (travel + repair) * self.dark_count(instance.n()) as f64
    }

    /// Deterministic part of the transition: commit to visiting `action`.
    pub fn post_decision(&self, action: usize) -> Result<PostDecisionState> {
        if self.faulty.contains(action) {
            Ok(PostDecisionState {
                location: Location::Node(action),
                served: self.served.insert(action),
                cleared: self.cleared,
                faulty: self.faulty.remove(action),
                unknown: self.unknown,
            })
        } else if self.unknown.contains(action) {
            Ok(PostDecisionState {
                location: Location::Node(action),
                served: self.served,
                cleared: self.cleared.insert(action),
                faulty: self.faulty,
                unknown: self.unknown.remove(action),
            })
        } else {
            Err(Error::InvalidAction(action))
        }
    }

    /// Checks the structural invariants a reachable belief state satisfies.
    ///
    /// - the four pools partition `1..=n`;
    /// - the crew stands on the depot or a node it has visited (served or
    ///   cleared), never on an unvisited or still-faulty one;
    /// - a served node's whole path to the source is served;
    /// - a cleared node has an unserved node on its source path (that is
    ///   why it is still dark);
    /// - a known-faulty node's strict ancestors are all served: faults are
    ///   only revealed when power reaches the parent;
    /// - an unknown node has an unserved strict ancestor: once power
    ///   reaches its parent the node's status would be revealed.
    pub fn check_feasible(&self, instance: &Instance) -> Result<()> {
        let n = instance.n();
        let all = NodeSet::full(n);
        let err = |msg: String| Err(Error::InfeasibleState(msg));

        let pools = [self.served, self.cleared, self.faulty, self.unknown];
        let mut union = NodeSet::EMPTY;
        let mut total = 0;
        for pool in pools {
            union = union.union(pool);
            total += pool.len();
        }
        if union != all || total != n {
            return err(format!("pools do not partition 1..={n}: {self}"));
        }

        if let Location::Node(v) = self.location {
            if v == 0 || v > n {
                return err(format!("location {v} outside 1..={n}"));
            }
            if !self.served.contains(v) && !self.cleared.contains(v) {
                return err(format!("crew stands on unvisited node {v}"));
            }
        }

        for v in self.served.iter() {
            if !instance.tree.ancestors(v).is_subset_of(self.served) {
                return err(format!("served node {v} has an unserved ancestor"));
            }
        }
        for v in self.cleared.iter() {
            if instance.tree.ancestors(v).is_subset_of(self.served) {
                return err(format!(
                    "cleared node {v} has power available yet is not served"
                ));
            }
        }
        for v in self.faulty.iter() {
            if !instance.tree.ancestors(v).is_subset_of(self.served) {
                return err(format!("faulty node {v} revealed behind a dark node"));
            }
        }
        for v in self.unknown.iter() {
            if instance.tree.ancestors(v).is_subset_of(self.served) {
                return err(format!(
                    "node {v} still unknown although power reached its parent"
                ));
            }
        }
        Ok(())
    }
}

impl PostDecisionState {
    /// The conventional pre-episode anchor: same pools as the initial
    /// belief state, crew still at the depot. Value estimates recorded
    /// against this state's key approximate the whole problem's value.
    pub fn initial(n: usize) -> PostDecisionState {
        let b = BeliefState::initial(n);
        PostDecisionState {
            location: b.location,
            served: b.served,
            cleared: b.cleared,
            faulty: b.faulty,
            unknown: b.unknown,
        }
    }

    /// Forgets the pending-visit bookkeeping, yielding the belief state the
    /// crew would be in if the visit revealed nothing new.
    pub fn as_belief(&self) -> BeliefState {
        BeliefState {
            location: self.location,
            served: self.served,
            cleared: self.cleared,
            faulty: self.faulty,
            unknown: self.unknown,
        }
    }

    pub fn is_terminal(&self, n: usize) -> bool {
        self.served.len() == n
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, set: NodeSet) -> fmt::Result {
    let mut first = true;
    for v in set.iter() {
        if !first {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
        first = false;
    }
    Ok(())
}

impl fmt::Display for BeliefState {
    /// Canonical text form, e.g. `L:0;S:1,2;C:;F:4;U:5,6`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L:{};S:", self.location.index())?;
        write_set(f, self.served)?;
        write!(f, ";C:")?;
        write_set(f, self.cleared)?;
        write!(f, ";F:")?;
        write_set(f, self.faulty)?;
        write!(f, ";U:")?;
        write_set(f, self.unknown)?;
        Ok(())
    }
}

fn parse_set(text: &str) -> Result<NodeSet> {
    let mut set = NodeSet::EMPTY;
    if text.is_empty() {
        return Ok(set);
    }
    for part in text.split(',') {
        let v: usize = part
            .parse()
            .map_err(|_| Error::StateParse(format!("bad node id {part:?}")))?;
        if v == 0 || v > crate::nodeset::MAX_NODES {
            return Err(Error::StateParse(format!("node id {v} out of range")));
        }
        if set.contains(v) {
            return Err(Error::StateParse(format!("duplicate node id {v}")));
        }
        set = set.insert(v);
    }
    Ok(set)
}

impl FromStr for BeliefState {
    type Err = Error;

    fn from_str(text: &str) -> Result<BeliefState> {
        let mut location = None;
        let mut sets = [None; 4];
        for field in text.split(';') {
            let (tag, body) = field
                .split_once(':')
                .ok_or_else(|| Error::StateParse(format!("missing ':' in {field:?}")))?;
            match tag {
                "L" => {
                    let i: usize = body
                        .parse()
                        .map_err(|_| Error::StateParse(format!("bad location {body:?}")))?;
                    location = Some(Location::from_index(i));
                }
                "S" => sets[0] = Some(parse_set(body)?),
                "C" => sets[1] = Some(parse_set(body)?),
                "F" => sets[2] = Some(parse_set(body)?),
                "U" => sets[3] = Some(parse_set(body)?),
                other => return Err(Error::StateParse(format!("unknown field {other:?}"))),
            }
        }
        let missing = || Error::StateParse(format!("incomplete state {text:?}"));
        let state = BeliefState {
            location: location.ok_or_else(missing)?,
            served: sets[0].ok_or_else(missing)?,
            cleared: sets[1].ok_or_else(missing)?,
            faulty: sets[2].ok_or_else(missing)?,
            unknown: sets[3].ok_or_else(missing)?,
        };
        let pools = [state.served, state.cleared, state.faulty, state.unknown];
        for (i, a) in pools.iter().enumerate() {
            for b in pools.iter().skip(i + 1) {
                if !a.is_disjoint(*b) {
                    return Err(Error::StateParse(format!("overlapping pools in {text:?}")));
                }
            }
        }
        Ok(state)
    }
}
