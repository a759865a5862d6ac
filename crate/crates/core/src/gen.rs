//! Random instance generation: node coordinates on a region, a
//! degree-constrained spanning tree built by iterated MST penalization,
//! BFS relabeling from a max-degree source, and optional depth reduction
//! by re-parenting nodes to their grandparents.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{segments_cross, Point, Region};
use crate::instance::Instance;
use crate::tree::PowerTree;

/// Everything needed to generate one instance deterministically.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub nodes: usize,
    pub region: Region,
    pub degree_bound: usize,
    /// Number of nodes to re-parent to their grandparents (0 = leave as-is).
    pub reduce: usize,
    pub repair_time: f64,
    pub fault_prob: f64,
    pub seed: u64,
}

/// Samples `n` coordinates on the region. Squares and rectangles draw each
/// axis uniformly; circles draw a uniform radius and a uniform angle.
pub fn generate_points(region: &Region, n: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
    region.validate()?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let p = match *region {
            Region::Square { side, origin } => Point::new(
                origin.x + rng.gen_range(0.0..=side),
                origin.y + rng.gen_range(0.0..=side),
            ),
            Region::Rectangle {
                width,
                height,
                origin,
            } => Point::new(
                origin.x + rng.gen_range(0.0..=width),
                origin.y + rng.gen_range(0.0..=height),
            ),
            Region::Circle { radius, center } => {
                let r = rng.gen_range(0.0..=radius);
                let angle = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
                Point::new(center.x + r * angle.cos(), center.y + r * angle.sin())
            }
        };
        points.push(p);
    }
    Ok(points)
}

/// Depot location: center of gravity of the demand nodes.
pub fn compute_depot(points: &[Point]) -> Result<Point> {
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot place a depot for zero nodes".into(),
        ));
    }
    let m = points.len() as f64;
    Ok(Point::new(
        points.iter().map(|p| p.x).sum::<f64>() / m,
        points.iter().map(|p| p.y).sum::<f64>() / m,
    ))
}

/// Undirected spanning tree over point indices 0..m-1, prior to relabeling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub edges: Vec<(usize, usize)>,
    pub node_count: usize,
}

impl SpanningTree {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.node_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            false
        } else {
            self.0[ra] = rb;
            true
        }
    }
}

/// Kruskal on a dense weight table; ties broken by ascending (i, j) so the
/// result is deterministic even on degenerate geometry.
fn kruskal(m: usize, weight: &[f64]) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        weight[a * m + b]
            .partial_cmp(&weight[c * m + d])
            .unwrap()
            .then(a.cmp(&c))
            .then(b.cmp(&d))
    });
    let mut uf = UnionFind::new(m);
    let mut tree = Vec::with_capacity(m - 1);
    for (a, b) in edges {
        if uf.union(a, b) {
            tree.push((a, b));
            if tree.len() == m - 1 {
                break;
            }
        }
    }
    tree
}

const DMST_MAX_ROUNDS: usize = 500;

/// Builds a spanning tree whose node degrees stay within `degree_bound`.
///
/// Starts from the plain MST; while any node violates the bound, edges of the
/// current tree incident to violating nodes are lengthened by
/// `f * l_max * (l - l_min) / (l_max - l_min)` (f = number of violating
/// nodes, l_min/l_max = extreme edge lengths in the current tree) and the MST
/// is recomputed on the penalized lengths. When all current tree edges have
/// equal length the scaled penalty is degenerate, so the full `f * l_max`
/// penalty is applied instead to keep the iteration moving.
pub fn build_dmst(points: &[Point], degree_bound: usize) -> Result<SpanningTree> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 points to span a tree".into(),
        ));
    }
    if degree_bound < 2 {
        return Err(Error::InvalidParameter(format!(
            "degree bound must be at least 2, got {degree_bound}"
        )));
    }
    let mut weight = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            weight[i * m + j] = points[i].distance(points[j]);
        }
    }

    let mut tree = kruskal(m, &weight);
    for _ in 0..DMST_MAX_ROUNDS {
        let mut deg = vec![0usize; m];
        for &(a, b) in &tree {
            deg[a] += 1;
            deg[b] += 1;
        }
        let violating: Vec<usize> = (0..m).filter(|&v| deg[v] > degree_bound).collect();
        if violating.is_empty() {
            return Ok(SpanningTree {
                edges: tree,
                node_count: m,
            });
        }

        let lengths: Vec<f64> = tree.iter().map(|&(a, b)| weight[a * m + b]).collect();
        let l_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let l_max = lengths.iter().cloned().fold(0.0f64, f64::max);
        let spread = l_max - l_min;
        let degenerate = spread <= 1e-12 * l_max.max(1.0);
        let f = violating.len() as f64;
        for &v in &violating {
            for &(a, b) in &tree {
                if a != v && b != v {
                    continue;
                }
                let l = weight[a * m + b];
                let penalty = if degenerate {
                    f * l_max
                } else if l > l_min {
                    f * l_max * (l - l_min) / spread
                } else {
                    continue;
                };
                weight[a * m + b] += penalty;
                weight[b * m + a] = weight[a * m + b];
            }
        }
        tree = kruskal(m, &weight);
    }

    // Safety net for pathological geometry: a nearest-neighbor chain always
    // satisfies any bound >= 2.
    Ok(SpanningTree {
        edges: nn_chain(points),
        node_count: m,
    })
}

fn nn_chain(points: &[Point]) -> Vec<(usize, usize)> {
    let m = points.len();
    let mut visited = vec![false; m];
    visited[0] = true;
    let mut edges = Vec::with_capacity(m - 1);
    let mut cur = 0usize;
    for _ in 1..m {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, &seen) in visited.iter().enumerate() {
            if !seen {
                let d = points[cur].distance(points[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        edges.push((cur.min(best), cur.max(best)));
        visited[best] = true;
        cur = best;
    }
    edges
}

/// Roots the tree at its max-degree node (ties: lowest index) and renames
/// nodes 1..=n in BFS order. Returns the rooted tree and the permutation
/// `old_of[label]` mapping each new label (1-based) to its original index.
pub fn relabel(tree: &SpanningTree) -> Result<(PowerTree, Vec<usize>)> {
    let m = tree.node_count;
    if m == 0 {
        return Err(Error::InvalidTree("cannot relabel an empty tree".into()));
    }
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let root = (0..m)
        .max_by_key(|&v| (adj[v].len(), std::cmp::Reverse(v)))
        .unwrap();

    // BFS from the root, neighbors in ascending original index.
    let mut label_of = vec![0usize; m];
    let mut old_of = vec![usize::MAX; m + 1];
    let mut parent_label = vec![None; m];
    let mut queue = std::collections::VecDeque::new();
    let mut seen = vec![false; m];
    let mut next_label = 1usize;
    seen[root] = true;
    label_of[root] = next_label;
    old_of[next_label] = root;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                next_label += 1;
                label_of[w] = next_label;
                old_of[next_label] = w;
                parent_label[next_label - 1] = Some(label_of[v]);
                queue.push_back(w);
            }
        }
    }
    if next_label != m {
        return Err(Error::InvalidTree(
            "edge list does not span all nodes".into(),
        ));
    }
    let power = PowerTree::from_parents(&parent_label)?;
    Ok((power, old_of[1..=m].to_vec()))
}

/// Random draws allowed per re-parenting move before giving up.
pub const CROSS_ATTEMPTS: usize = 50;

/// Re-parents up to `k` distinct randomly chosen nodes to their grandparents,
/// rejecting moves whose new arc would cross an existing arc (up to
/// `CROSS_ATTEMPTS` draws per move). `points` holds depot + node coordinates
/// as in Instance. Returns the new tree and the number of moves applied.
pub fn reduce_depth(
    tree: &PowerTree,
    points: &[Point],
    k: usize,
    rng: &mut impl Rng,
) -> Result<(PowerTree, usize)> {
    let n = tree.n();
    let mut parent: Vec<usize> = (0..=n)
        .map(|i| {
            if i == 0 {
                0
            } else {
                tree.parent(i).unwrap_or(0)
            }
        })
        .collect();
    let mut modified = vec![false; n + 1];
    let mut applied = 0usize;

    'moves: while applied < k {
        let mut attempts = 0;
        loop {
            let eligible: Vec<usize> = (2..=n)
                .filter(|&v| !modified[v] && parent[v] != 0 && parent[parent[v]] != 0)
                .collect();
            if eligible.is_empty() {
                break 'moves;
            }
            attempts += 1;
            if attempts > CROSS_ATTEMPTS {
                break 'moves;
            }
            let v = eligible[rng.gen_range(0..eligible.len())];
            let gp = parent[parent[v]];
            let crosses = (2..=n).any(|w| {
                w != v && segments_cross(points[v], points[gp], points[w], points[parent[w]])
            });
            if !crosses {
                parent[v] = gp;
                modified[v] = true;
                applied += 1;
                break;
            }
        }
    }

    let parents: Vec<Option<usize>> = (1..=n)
        .map(|i| {
            if parent[i] == 0 {
                None
            } else {
                Some(parent[i])
            }
        })
        .collect();
    let new_tree = PowerTree::from_parents(&parents)?;
    debug_assert!(new_tree.depth() <= tree.depth());
    Ok((new_tree, applied))
}

/// Full pipeline: sample points, place the depot at their centroid, build the
/// degree-bounded tree, relabel from the max-degree source, optionally reduce
/// depth, and assemble the instance (points permuted to match node labels).
pub fn generate(config: &GenConfig) -> Result<Instance> {
    if config.nodes < 1 {
        return Err(Error::InvalidParameter(
            "instance needs at least 1 node".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let raw_points = generate_points(&config.region, config.nodes, &mut rng)?;
    let depot = compute_depot(&raw_points)?;

    let (power, old_of) = if config.nodes == 1 {
        (PowerTree::from_parents(&[None])?, vec![0])
    } else {
        let span = build_dmst(&raw_points, config.degree_bound)?;
        relabel(&span)?
    };

    let mut points = Vec::with_capacity(config.nodes + 1);
    points.push(depot);
    points.extend(old_of.iter().map(|&old| raw_points[old]));

    let (power, applied) = if config.reduce > 0 {
        reduce_depth(&power, &points, config.reduce, &mut rng)?
    } else {
        (power, 0)
    };

    Instance::new(
        power,
        points,
        config.repair_time,
        config.fault_prob,
        config.seed,
        config.region,
        config.degree_bound,
        config.reduce,
        applied,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    /// All labeled trees on m nodes via Prüfer sequences, as edge lists.
    fn all_spanning_trees(m: usize) -> Vec<Vec<(usize, usize)>> {
        if m == 1 {
            return vec![vec![]];
        }
        if m == 2 {
            return vec![vec![(0, 1)]];
        }
        let seq_len = m - 2;
        let count = (m as u64).pow(seq_len as u32);
        let mut trees = Vec::with_capacity(count as usize);
        for code in 0..count {
            let mut seq = Vec::with_capacity(seq_len);
            let mut c = code;
            for _ in 0..seq_len {
                seq.push((c % m as u64) as usize);
                c /= m as u64;
            }
            let mut degree = vec![1usize; m];
            for &v in &seq {
                degree[v] += 1;
            }
            let mut edges = Vec::with_capacity(m - 1);
            let mut deg = degree.clone();
            for &v in &seq {
                let leaf = (0..m).find(|&u| deg[u] == 1).unwrap();
                edges.push((leaf.min(v), leaf.max(v)));
                deg[leaf] = 0;
                deg[v] -= 1;
            }
            let rest: Vec<usize> = (0..m).filter(|&u| deg[u] == 1).collect();
            edges.push((rest[0], rest[1]));
            trees.push(edges);
        }
        trees
    }

    fn tree_length(edges: &[(usize, usize)], points: &[Point]) -> f64 {
        edges
            .iter()
            .map(|&(a, b)| points[a].distance(points[b]))
            .sum()
    }

    fn max_degree(edges: &[(usize, usize)], m: usize) -> usize {
        let mut deg = vec![0usize; m];
        for &(a, b) in edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Minimum total length over all spanning trees obeying the bound.
    fn brute_force_dmst_length(points: &[Point], bound: usize) -> f64 {
        all_spanning_trees(points.len())
            .into_iter()
            .filter(|t| max_degree(t, points.len()) <= bound)
            .map(|t| tree_length(&t, points))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn points_respect_square_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let region = Region::square(10.0);
        let points = generate_points(&region, 200, &mut rng).unwrap();
        assert_eq!(points.len(), 200);
        assert!(points.iter().all(|p| region.contains(*p)));
    }

    #[test]
    fn points_respect_rectangle_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let region = Region::rectangle(20.0, 5.0);
        let points = generate_points(&region, 200, &mut rng).unwrap();
        assert!(points.iter().all(|p| region.contains(*p)));
        // The long axis should actually be used.
        assert!(points.iter().any(|p| p.x > 10.0));
    }

    #[test]
    fn points_stay_inside_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let center = Point::new(2.0, -1.0);
        let region = Region::Circle {
            radius: 5.0,
            center,
        };
        let points = generate_points(&region, 500, &mut rng).unwrap();
        assert!(points.iter().all(|p| p.distance(center) <= 5.0 + 1e-9));
    }

    #[test]
    fn zero_points_allowed_and_bad_region_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(generate_points(&Region::square(1.0), 0, &mut rng)
            .unwrap()
            .is_empty());
        assert!(generate_points(&Region::square(-1.0), 5, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_points() {
        let region = Region::circle(3.0);
        let a = generate_points(&region, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_points(&region, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depot_is_centroid() {
        assert_eq!(
            compute_depot(&pts(&[(0.0, 0.0), (2.0, 0.0)])).unwrap(),
            Point::new(1.0, 0.0)
        );
        assert_eq!(
            compute_depot(&pts(&[(3.0, 4.0)])).unwrap(),
            Point::new(3.0, 4.0)
        );
        let corners = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(compute_depot(&corners).unwrap(), Point::new(0.5, 0.5));
        assert!(compute_depot(&[]).is_err());
    }

    #[test]
    fn dmst_collinear_points_is_the_path() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let tree = build_dmst(&p, 3).unwrap();
        let mut edges = tree.edges.clone();
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn dmst_center_plus_corners_bound_4_is_the_star() {
        // Center last, so the star is not an artifact of index order.
        let p = pts(&[
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
            (0.0, 0.0),
        ]);
        let tree = build_dmst(&p, 4).unwrap();
        let mut edges = tree.edges.clone();
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        let best = brute_force_dmst_length(&p, 4);
        assert!((tree_length(&tree.edges, &p) - best).abs() < 1e-9);
    }

    #[test]
    fn dmst_star_config_bound_2_terminates_within_bound() {
        // Equal-length spokes: exercises the degenerate equal-lengths penalty.
        let p = pts(&[
            (0.0, 0.0),
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ]);
        let tree = build_dmst(&p, 2).unwrap();
        assert_eq!(tree.edges.len(), 4);
        assert!(tree.degrees().into_iter().max().unwrap() <= 2);
        // A heuristic tree can never beat the brute-force optimum.
        let best = brute_force_dmst_length(&p, 2);
        assert!(tree_length(&tree.edges, &p) >= best - 1e-9);
    }

    #[test]
    fn dmst_random_sets_feasible_and_never_beat_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..30 {
            let m = 2 + (round % 5);
            let p = generate_points(&Region::square(10.0), m, &mut rng).unwrap();
            for bound in [2usize, 3] {
                let tree = build_dmst(&p, bound).unwrap();
                assert_eq!(tree.edges.len(), m - 1);
                assert!(tree.degrees().into_iter().max().unwrap() <= bound);
                // Connectivity: relabel only succeeds on a spanning tree.
                assert!(relabel(&tree).is_ok());
                let best = brute_force_dmst_length(&p, bound);
                assert!(tree_length(&tree.edges, &p) >= best - 1e-9);
            }
        }
    }

    #[test]
    fn dmst_rejects_degenerate_inputs() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(build_dmst(&p, 1).is_err());
        assert!(build_dmst(&p[..1], 2).is_err());
    }

    #[test]
    fn relabel_path_puts_middle_node_first() {
        // Path a-b-c: b has degree 2 and becomes the source.
        let tree = SpanningTree {
            edges: vec![(0, 1), (1, 2)],
            node_count: 3,
        };
        let (power, old_of) = relabel(&tree).unwrap();
        assert_eq!(old_of[0], 1); // label 1 <- b
        assert_eq!(power.parent(2), Some(1));
        assert_eq!(power.parent(3), Some(1));
    }

    #[test]
    fn relabel_single_node() {
        let tree = SpanningTree {
            edges: vec![],
            node_count: 1,
        };
        let (power, old_of) = relabel(&tree).unwrap();
        assert_eq!(power.n(), 1);
        assert_eq!(old_of, vec![0]);
    }

    #[test]
    fn relabel_bfs_order_means_parents_precede_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let m = 2 + rng.gen_range(0..8);
            let trees = all_spanning_trees(m);
            let edges = trees[rng.gen_range(0..trees.len())].clone();
            let (power, old_of) = relabel(&SpanningTree {
                edges: edges.clone(),
                node_count: m,
            })
            .unwrap();
            // Labels are exactly 1..=m (old_of is a permutation of 0..m).
            let mut sorted = old_of.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..m).collect::<Vec<_>>());
            // Max-degree node got label 1.
            let deg_of = |v: usize| edges.iter().filter(|&&(a, b)| a == v || b == v).count();
            let max_deg = (0..m).map(deg_of).max().unwrap();
            assert_eq!(deg_of(old_of[0]), max_deg);
            // BFS property: every parent label is smaller than the child's.
            for node in 2..=m {
                assert!(power.parent(node).unwrap() < node);
            }
        }
    }

    #[test]
    fn reduce_depth_zero_is_identity() {
        let power = PowerTree::from_parents(&[None, Some(1), Some(2)]).unwrap();
        let p = pts(&[(0.5, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let (out, applied) =
            reduce_depth(&power, &p, 0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(applied, 0);
        assert_eq!(out.to_parent_vec(), power.to_parent_vec());
    }

    #[test]
    fn reduce_depth_chain_reparents_to_source() {
        let power = PowerTree::from_parents(&[None, Some(1), Some(2)]).unwrap();
        let p = pts(&[(0.5, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let (out, applied) =
            reduce_depth(&power, &p, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(applied, 1);
        assert_eq!(out.parent(3), Some(1));
        assert_eq!(out.depth(), 1);
    }

    #[test]
    fn reduce_depth_rejects_crossing_moves() {
        // Two chains from the source whose grandchild re-parent arcs each
        // cross the other chain's lower arc: nothing can move.
        let power = PowerTree::from_parents(&[None, Some(1), Some(2), Some(1), Some(4)]).unwrap();
        let p = pts(&[
            (0.1, -0.2),  // depot (unused by arcs)
            (0.0, 0.0),   // 1 source
            (-1.0, -2.0), // 2
            (1.0, -1.0),  // 3 (eligible; arc 3->1 crossed by 5->4)
            (0.8, 0.5),   // 4
            (0.2, -1.5),  // 5 (eligible; arc 5->1 crossed by 3->2)
        ]);
        let before = power.to_parent_vec();
        let (out, applied) =
            reduce_depth(&power, &p, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(applied, 0);
        assert_eq!(out.to_parent_vec(), before);
    }

    #[test]
    fn reduce_depth_never_deepens_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for seed in 0..20 {
            let inst = generate(&GenConfig {
                nodes: 12,
                region: Region::square(10.0),
                degree_bound: 3,
                reduce: 0,
                repair_time: 1.0,
                fault_prob: 0.5,
                seed,
            })
            .unwrap();
            let k = rng.gen_range(0..6);
            let (out, applied) = reduce_depth(
                &inst.tree,
                &inst.points,
                k,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .unwrap();
            assert!(applied <= k);
            assert!(out.depth() <= inst.tree.depth());
            assert_eq!(out.n(), inst.tree.n());
        }
    }

    #[test]
    fn generate_is_deterministic_per_seed() {
        let config = GenConfig {
            nodes: 20,
            region: Region::square(10.0),
            degree_bound: 3,
            reduce: 10,
            repair_time: 1.5,
            fault_prob: 0.5,
            seed: 42,
        };
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate(&GenConfig { seed: 43, ..config }).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn generate_records_reduction_and_respects_bound() {
        let inst = generate(&GenConfig {
            nodes: 20,
            region: Region::square(10.0),
            degree_bound: 3,
            reduce: 10,
            repair_time: 3.0,
            fault_prob: 0.25,
            seed: 7,
        })
        .unwrap();
        assert_eq!(inst.n(), 20);
        assert_eq!(inst.reduce_requested, 10);
        assert!(inst.reduce_applied <= 10);
        // Undirected degree: children + parent arc.
        for node in 1..=20 {
            let deg = inst.tree.children(node).len() + usize::from(node != 1);
            // Re-parenting can raise a node's child count, so check the
            // pre-reduction invariant only when nothing was applied.
            if inst.reduce_applied == 0 {
                assert!(deg <= 3);
            }
        }
        assert!(inst.points.iter().skip(1).all(|p| inst.region.contains(*p)));
    }
}
