//! Problem instances: tree + coordinates + travel times + fault parameters,
//! with a self-describing JSON file format. Travel times are recomputed from
//! coordinates on load rather than stored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Region};
use crate::tree::PowerTree;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// A restoration-routing instance. Node 0 is the crew depot; demand nodes are
/// 1..=n with node 1 the source. The road network is complete, with travel
/// times equal to Euclidean distances.
#[derive(Clone, Debug)]
pub struct Instance {
    pub tree: PowerTree,
    /// Index 0 is the depot; index i is demand node i.
    pub points: Vec<Point>,
    /// Dense (n+1)x(n+1) travel-time matrix, row-major.
    dist: Vec<f64>,
    /// Time to repair one faulty node.
    pub repair_time: f64,
    /// Independent fault probability of each non-source node.
    pub fault_prob: f64,
    pub seed: u64,
    pub region: Region,
    pub degree_bound: usize,
    /// Depth reductions requested / actually applied.
    pub reduce_requested: usize,
    pub reduce_applied: usize,
}

impl Instance {
    pub fn new(
        tree: PowerTree,
        points: Vec<Point>,
        repair_time: f64,
        fault_prob: f64,
        seed: u64,
        region: Region,
        degree_bound: usize,
        reduce_requested: usize,
        reduce_applied: usize,
    ) -> Result<Instance> {
        let n = tree.n();
        if points.len() != n + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} points (depot + {n} nodes), got {}",
                n + 1,
                points.len()
            )));
        }
        if !(fault_prob > 0.0 && fault_prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fault probability must lie strictly in (0,1), got {fault_prob}"
            )));
        }
        if !(repair_time >= 0.0 && repair_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "repair time must be finite and nonnegative, got {repair_time}"
            )));
        }
        let dist = distance_matrix(&points);
        Ok(Instance {
            tree,
            points,
            dist,
            repair_time,
            fault_prob,
            seed,
            region,
            degree_bound,
            reduce_requested,
            reduce_applied,
        })
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    /// Travel time between locations i and j (0 = depot).
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * (self.n() + 1) + j]
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            format_version: INSTANCE_FORMAT_VERSION,
            tool_version: crate::VERSION.to_string(),
            seed: self.seed,
            nodes: self.n(),
            region: self.region,
            repair_time: self.repair_time,
            fault_prob: self.fault_prob,
            degree_bound: self.degree_bound,
            reduce_requested: self.reduce_requested,
            reduce_applied: self.reduce_applied,
            depth: self.depth(),
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
            parent: self.tree.to_parent_vec(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.format_version != INSTANCE_FORMAT_VERSION {
            return Err(Error::FileVersion(file.format_version));
        }
        if file.points.len() != file.nodes + 1 {
            return Err(Error::InvalidParameter(format!(
                "instance file declares {} nodes but carries {} points",
                file.nodes,
                file.points.len()
            )));
        }
        let tree = PowerTree::from_parents(&file.parent)?;
        let points: Vec<Point> = file.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let inst = Instance::new(
            tree,
            points,
            file.repair_time,
            file.fault_prob,
            file.seed,
            file.region,
            file.degree_bound,
            file.reduce_requested,
            file.reduce_applied,
        )?;
        if inst.depth() != file.depth {
            return Err(Error::InvalidParameter(format!(
                "instance file declares depth {} but the tree has depth {}",
                file.depth,
                inst.depth()
            )));
        }
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Instance> {
        Instance::from_json(&fs::read_to_string(path)?)
    }
}

fn distance_matrix(points: &[Point]) -> Vec<f64> {
    let m = points.len();
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = points[i].distance(points[j]);
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    dist
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    tool_version: String,
    seed: u64,
    nodes: usize,
    region: Region,
    repair_time: f64,
    fault_prob: f64,
    degree_bound: usize,
    reduce_requested: usize,
    reduce_applied: usize,
    depth: usize,
    /// [x, y] per location; index 0 is the depot.
    points: Vec<[f64; 2]>,
    /// Parent of node i at entry i-1; null for the source.
    parent: Vec<Option<usize>>,
}

/// Convenience constructor for hand-built fixtures: parents plus coordinates,
/// depot first.
pub fn fixture(
    parents: &[Option<usize>],
    points: &[(f64, f64)],
    repair_time: f64,
    fault_prob: f64,
) -> Instance {
    let tree = PowerTree::from_parents(parents).expect("fixture tree");
    let pts: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
    let side = pts
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0f64, f64::max);
    Instance::new(
        tree,
        pts,
        repair_time,
        fault_prob,
        0,
        Region::square(side * 2.0),
        3,
        0,
        0,
    )
    .expect("fixture instance")
}
