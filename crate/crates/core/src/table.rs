//! Lookup tables of post-decision-state values, with optional aggregation.
//!
//! A table entry holds an exponentially-smoothed estimate of the expected
//! remaining disruption from a post-decision state, keyed either by the
//! full state or by one of three progressively coarser summaries:
//!
//! - full: location plus the served / cleared / faulty sets;
//! - detail level 1 (`sa1`): location, pool sizes, but the faulty *set*;
//! - detail level 2 (`sa2`): location and all four pool sizes;
//! - detail level 3 (`sa3`): location, served count, faulty count.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::NodeSet;
use crate::state::PostDecisionState;

/// File schema version for persisted tables.
pub const TABLE_FORMAT_VERSION: u32 = 1;

/// How post-decision states are grouped into table keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    Full,
    Sa1,
    Sa2,
    Sa3,
}

impl AggregationMode {
    pub const ALL: [AggregationMode; 4] = [
        AggregationMode::Full,
        AggregationMode::Sa1,
        AggregationMode::Sa2,
        AggregationMode::Sa3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregationMode::Full => "full",
            AggregationMode::Sa1 => "sa1",
            AggregationMode::Sa2 => "sa2",
            AggregationMode::Sa3 => "sa3",
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(text: &str) -> Result<AggregationMode> {
        match text {
            "full" => Ok(AggregationMode::Full),
            "sa1" => Ok(AggregationMode::Sa1),
            "sa2" => Ok(AggregationMode::Sa2),
            "sa3" => Ok(AggregationMode::Sa3),
            other => Err(Error::KeyParse(format!(
                "unknown aggregation mode {other:?}"
            ))),
        }
    }
}

/// A table key. The full variant omits the uncertain pool: it is the
/// complement of the other three and would be redundant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregationKey {
    Full {
        location: u8,
        served: NodeSet,
        cleared: NodeSet,
        faulty: NodeSet,
    },
    Sa1 {
        location: u8,
        served: u8,
        faulty: NodeSet,
        unknown: u8,
        cleared: u8,
    },
    Sa2 {
        location: u8,
        served: u8,
        faulty: u8,
        unknown: u8,
        cleared: u8,
    },
    Sa3 {
        location: u8,
        served: u8,
        faulty: u8,
    },
}

/// Maps a post-decision state to its table key under the given mode.
pub fn aggregate_key(post: &PostDecisionState, mode: AggregationMode) -> AggregationKey {
    let location = post.location.index() as u8;
    match mode {
        AggregationMode::Full => AggregationKey::Full {
            location,
            served: post.served,
            cleared: post.cleared,
            faulty: post.faulty,
        },
        AggregationMode::Sa1 => AggregationKey::Sa1 {
            location,
            served: post.served.len() as u8,
            faulty: post.faulty,
            unknown: post.unknown.len() as u8,
            cleared: post.cleared.len() as u8,
        },
        AggregationMode::Sa2 => AggregationKey::Sa2 {
            location,
            served: post.served.len() as u8,
            faulty: post.faulty.len() as u8,
            unknown: post.unknown.len() as u8,
            cleared: post.cleared.len() as u8,
        },
        AggregationMode::Sa3 => AggregationKey::Sa3 {
            location,
            served: post.served.len() as u8,
            faulty: post.faulty.len() as u8,
        },
    }
}

impl AggregationKey {
    pub fn mode(&self) -> AggregationMode {
        match self {
            AggregationKey::Full { .. } => AggregationMode::Full,
            AggregationKey::Sa1 { .. } => AggregationMode::Sa1,
            AggregationKey::Sa2 { .. } => AggregationMode::Sa2,
            AggregationKey::Sa3 { .. } => AggregationMode::Sa3,
        }
    }
}

impl fmt::Display for AggregationKey {
    /// Compact text form, e.g. `full:3:6:0:18` (sets as hex bitmasks) or
    /// `sa3:3:2:1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AggregationKey::Full {
                location,
                served,
                cleared,
                faulty,
            } => write!(
                f,
                "full:{location}:{:x}:{:x}:{:x}",
                served.bits(),
                cleared.bits(),
                faulty.bits()
            ),
            AggregationKey::Sa1 {
                location,
                served,
                faulty,
                unknown,
                cleared,
            } => {
                write!(
                    f,
                    "sa1:{location}:{served}:{:x}:{unknown}:{cleared}",
                    faulty.bits()
                )
            }
            AggregationKey::Sa2 {
                location,
                served,
                faulty,
                unknown,
                cleared,
            } => {
                write!(f, "sa2:{location}:{served}:{faulty}:{unknown}:{cleared}")
            }
            AggregationKey::Sa3 {
                location,
                served,
                faulty,
            } => {
                write!(f, "sa3:{location}:{served}:{faulty}")
            }
        }
    }
}

impl FromStr for AggregationKey {
    type Err = Error;

    fn from_str(text: &str) -> Result<AggregationKey> {
        let bad = || Error::KeyParse(format!("malformed key {text:?}"));
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| s.parse::<u8>().map_err(|_| bad());
        let set = |s: &str| {
            let bits = u64::from_str_radix(s, 16).map_err(|_| bad())?;
            if bits & 1 != 0 {
                return Err(bad());
            }
            Ok(NodeSet::from_bits(bits))
        };
        match parts.as_slice() {
            ["full", l, s, c, fset] => Ok(AggregationKey::Full {
                location: num(l)?,
                served: set(s)?,
                cleared: set(c)?,
                faulty: set(fset)?,
            }),
            ["sa1", l, s, fset, u, c] => Ok(AggregationKey::Sa1 {
                location: num(l)?,
                served: num(s)?,
                faulty: set(fset)?,
                unknown: num(u)?,
                cleared: num(c)?,
            }),
            ["sa2", l, s, fcount, u, c] => Ok(AggregationKey::Sa2 {
                location: num(l)?,
                served: num(s)?,
                faulty: num(fcount)?,
                unknown: num(u)?,
                cleared: num(c)?,
            }),
            ["sa3", l, s, fcount] => Ok(AggregationKey::Sa3 {
                location: num(l)?,
                served: num(s)?,
                faulty: num(fcount)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// One table entry: smoothed value estimate and observation count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableEntry {
    pub value: f64,
    pub visits: u64,
    /// Value at the last batch boundary, for convergence tracking.
    pub batch_mark: f64,
}

/// Training settings and outcome recorded alongside a table, so a stored
/// file is self-describing and reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainStamp {
    pub seed: u64,
    pub prune: bool,
    pub warmup_iterations: u64,
    pub batch_size: u64,
    pub frequent_fraction: f64,
    pub stop_threshold: f64,
    pub exploration_constant: f64,
    pub max_iterations: u64,
    pub stopped_by_rule: bool,
    pub delta_history: Vec<f64>,
}

/// The value table: smoothed estimates per aggregation key.
#[derive(Clone, Debug)]
pub struct ValueTable {
    mode: AggregationMode,
    entries: FxHashMap<AggregationKey, TableEntry>,
    iterations: u64,
    pub stamp: Option<TrainStamp>,
}

impl ValueTable {
    pub fn new(mode: AggregationMode) -> ValueTable {
        ValueTable {
            mode,
            entries: FxHashMap::default(),
            iterations: 0,
            stamp: None,
        }
    }

    pub fn mode(&self) -> AggregationMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Completed training episodes.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn record_iteration(&mut self) {
        self.iterations += 1;
    }

    /// Shortcut for `aggregate_key` under this table's mode.
    pub fn key_of(&self, post: &PostDecisionState) -> AggregationKey {
        aggregate_key(post, self.mode)
    }

    /// Folds one observed downstream value into the estimate for `key`,
    /// with smoothing weight 1/N after incrementing the observation count
    /// N. The first observation is taken verbatim.
    pub fn observe(&mut self, key: AggregationKey, sample: f64) {
        debug_assert_eq!(key.mode(), self.mode);
        let entry = self.entries.entry(key).or_insert(TableEntry {
            value: 0.0,
            visits: 0,
            batch_mark: 0.0,
        });
        entry.visits += 1;
        let alpha = 1.0 / entry.visits as f64;
        entry.value += alpha * (sample - entry.value);
    }

    /// Estimated value for `key`; unseen keys read as 0, which keeps them
    /// attractive until tried.
    pub fn value(&self, key: AggregationKey) -> f64 {
        self.entries.get(&key).map_or(0.0, |e| e.value)
    }

    pub fn visits(&self, key: AggregationKey) -> u64 {
        self.entries.get(&key).map_or(0, |e| e.visits)
    }

    pub fn get(&self, key: AggregationKey) -> Option<&TableEntry> {
        self.entries.get(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AggregationKey, &TableEntry)> {
        self.entries.iter()
    }

    /// Records the current values as the reference point for the next
    /// batch's convergence measurement.
    pub fn mark_batch(&mut self) {
        for entry in self.entries.values_mut() {
            entry.batch_mark = entry.value;
        }
    }

    /// Largest value movement since the last batch mark among keys with at
    /// least `min_visits` observations; `None` when no key qualifies.
    pub fn max_frequent_delta(&self, min_visits: u64) -> Option<f64> {
        self.entries
            .values()
            .filter(|e| e.visits >= min_visits)
            .map(|e| (e.value - e.batch_mark).abs())
            .fold(None, |acc, d| Some(acc.map_or(d, |m: f64| m.max(d))))
    }

    /// Serializes to pretty JSON with entries sorted by key text, so equal
    /// tables produce identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut entries: Vec<EntryRecord> = self
            .entries
            .iter()
            .map(|(k, e)| EntryRecord {
                key: k.to_string(),
                value: e.value,
                visits: e.visits,
            })
            .collect();
        entries.sort_by(|a, b| a.key.cmp(&b.key));
        let file = TableFile {
            format_version: TABLE_FORMAT_VERSION,
            tool_version: crate::VERSION.to_string(),
            mode: self.mode,
            iterations: self.iterations,
            train: self.stamp.clone(),
            entries,
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<ValueTable> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.format_version != TABLE_FORMAT_VERSION {
            return Err(Error::FileVersion(file.format_version));
        }
        let mut entries = FxHashMap::default();
        for record in file.entries {
            let key: AggregationKey = record.key.parse()?;
            if key.mode() != file.mode {
                return Err(Error::KeyParse(format!(
                    "key {} does not match table mode {}",
                    record.key, file.mode
                )));
            }
            let clash = entries
                .insert(
                    key,
                    TableEntry {
                        value: record.value,
                        visits: record.visits,
                        batch_mark: record.value,
                    },
                )
                .is_some();
            if clash {
                return Err(Error::KeyParse(format!("duplicate key {}", record.key)));
            }
        }
        Ok(ValueTable {
            mode: file.mode,
            entries,
            iterations: file.iterations,
            stamp: file.train,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ValueTable> {
        ValueTable::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    format_version: u32,
    tool_version: String,
    mode: AggregationMode,
    iterations: u64,
    train: Option<TrainStamp>,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    key: String,
    value: f64,
    visits: u64,
}
