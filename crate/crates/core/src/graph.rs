//! Directed graphs whose nodes carry a fixed binary group label.

use std::fmt;
use std::io::{BufRead, Write};

use indexmap::IndexSet;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngHandle;

pub type NodeId = usize;

/// Group label, either 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Group(u8);

impl Group {
    pub const ZERO: Group = Group(0);
    pub const ONE: Group = Group(1);
    pub const BOTH: [Group; 2] = [Group::ZERO, Group::ONE];

    pub fn new(label: u8) -> Option<Group> {
        (label < 2).then_some(Group(label))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn other(self) -> Group {
        Group(1 - self.0)
    }
}

impl TryFrom<u8> for Group {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Group::new(v).ok_or_else(|| format!("group label must be 0 or 1, got {v}"))
    }
}

impl From<Group> for u8 {
    fn from(g: Group) -> u8 {
        g.0
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Edge counts between the two groups; `get(r, s)` is the number of edges
/// from a node in group `r` to a node in group `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockCounts(pub [[u64; 2]; 2]);

impl BlockCounts {
    pub fn get(&self, from: Group, to: Group) -> u64 {
        self.0[from.index()][to.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    /// Total number of edges pointing into `group`.
    pub fn in_total(&self, group: Group) -> u64 {
        self.0[0][group.index()] + self.0[1][group.index()]
    }

    pub fn as_f64(&self) -> [[f64; 2]; 2] {
        let e = &self.0;
        [
            [e[0][0] as f64, e[0][1] as f64],
            [e[1][0] as f64, e[1][1] as f64],
        ]
    }
}

/// Directed graph without self-edges or parallel edges on a fixed node set
/// `0..N`, each node labeled with a group that never changes.
///
/// Edges are stored as per-node in-neighbor sets, which give O(1) membership
/// tests and O(1) uniform sampling of an in-neighbor.
#[derive(Debug, Clone)]
pub struct LabeledDigraph {
    groups: Vec<Group>,
    group_sizes: [usize; 2],
    in_adj: Vec<IndexSet<NodeId>>,
    edge_count: usize,
}

impl LabeledDigraph {
    /// Edgeless graph with the given labels.
    pub fn new(groups: Vec<Group>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "node_count",
                value: groups.len() as f64,
                reason: "at least two nodes required",
            });
        }
        let mut group_sizes = [0usize; 2];
        for g in &groups {
            group_sizes[g.index()] += 1;
        }
        let in_adj = vec![IndexSet::new(); groups.len()];
        Ok(Self {
            groups,
            group_sizes,
            in_adj,
            edge_count: 0,
        })
    }

    /// Directed Erdős–Rényi graph with exactly `n0` nodes in group 0 and `n1`
    /// in group 1, the group-0 subset chosen uniformly at random. Each ordered
    /// pair carries an edge independently with probability `q`, which must lie
    /// in the open interval `(2/N, 1 - 2/N)`.
    pub fn erdos_renyi(n0: usize, n1: usize, q: f64, rng: &mut RngHandle) -> Result<Self> {
        let n = n0 + n1;
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "node_count",
                value: n as f64,
                reason: "at least two nodes required",
            });
        }
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidParameter {
                name: "group_size",
                value: 0.0,
                reason: "both groups must be non-empty",
            });
        }
        // (2/N, 1 - 2/N) is empty for N <= 4; those graphs accept any q in (0, 1).
        let (lo, hi) = if n <= 4 {
            (0.0, 1.0)
        } else {
            (2.0 / n as f64, 1.0 - 2.0 / n as f64)
        };
        if !(q > lo && q < hi) {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "edge probability must lie in (2/N, 1 - 2/N)",
            });
        }

        let mut groups = vec![Group::ONE; n];
        for i in index::sample(rng, n, n0) {
            groups[i] = Group::ZERO;
        }
        let mut g = Self::new(groups)?;
        for dst in 0..n {
            for src in 0..n {
                if src != dst && rng.random::<f64>() < q {
                    g.in_adj[dst].insert(src);
                    g.edge_count += 1;
                }
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.groups.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn group(&self, node: NodeId) -> Group {
        self.groups[node]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_sizes(&self) -> [usize; 2] {
        self.group_sizes
    }

    pub fn group_size(&self, g: Group) -> usize {
        self.group_sizes[g.index()]
    }

    fn check(&self, node: NodeId) -> Result<()> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node,
                node_count: self.node_count(),
            })
        }
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.in_adj[node].len()
    }

    /// In-neighbors of `node` in storage order.
    pub fn in_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.in_adj[node].iter().copied()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.in_adj.get(dst).is_some_and(|set| set.contains(&src))
    }

    /// Inserts `src -> dst`. Returns `false` if the edge already existed.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId) -> Result<bool> {
        self.check(src)?;
        self.check(dst)?;
        if src == dst {
            return Err(Error::InvalidParameter {
                name: "edge",
                value: src as f64,
                reason: "self-edges are not allowed",
            });
        }
        let inserted = self.in_adj[dst].insert(src);
        if inserted {
            self.edge_count += 1;
        }
        Ok(inserted)
    }

    /// Deletes `src -> dst`. Returns `false` if there was no such edge.
    pub fn remove_edge(&mut self, src: NodeId, dst: NodeId) -> bool {
        let removed = self
            .in_adj
            .get_mut(dst)
            .is_some_and(|set| set.swap_remove(&src));
        if removed {
            self.edge_count -= 1;
        }
        removed
    }

    /// All edges as `(source, target)` pairs, grouped by target.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.in_adj
            .iter()
            .enumerate()
            .flat_map(|(dst, set)| set.iter().map(move |&src| (src, dst)))
    }

    /// Uniformly random in-neighbor of `node`, or `None` if it has none.
    pub fn sample_in_edge(&self, node: NodeId, rng: &mut RngHandle) -> Result<Option<NodeId>> {
        self.check(node)?;
        let set = &self.in_adj[node];
        if set.is_empty() {
            return Ok(None);
        }
        let k = rng.random_range(0..set.len());
        Ok(set.get_index(k).copied())
    }

    /// Uniformly random `j != node` with no edge `j -> node`, or `None` if the
    /// node already receives an edge from every other node.
    pub fn sample_non_in_edge(&self, node: NodeId, rng: &mut RngHandle) -> Result<Option<NodeId>> {
        self.check(node)?;
        let n = self.node_count();
        let set = &self.in_adj[node];
        let free = n - 1 - set.len();
        if free == 0 {
            return Ok(None);
        }
        if set.len() > n / 2 {
            // Dense in-neighborhood: pick the k-th non-neighbor directly.
            let mut k = rng.random_range(0..free);
            for j in (0..n).filter(|&j| j != node && !set.contains(&j)) {
                if k == 0 {
                    return Ok(Some(j));
                }
                k -= 1;
            }
            unreachable!("complement has exactly {free} members");
        }
        loop {
            let mut j = rng.random_range(0..n - 1);
            if j >= node {
                j += 1;
            }
            if !set.contains(&j) {
                return Ok(Some(j));
            }
        }
    }

    /// Removes `count` in-edges of `node` chosen uniformly without
    /// replacement and returns their sources.
    pub(crate) fn remove_random_in_edges(
        &mut self,
        node: NodeId,
        count: usize,
        rng: &mut RngHandle,
    ) -> Vec<NodeId> {
        let set = &self.in_adj[node];
        let victims: Vec<NodeId> = if count >= set.len() {
            set.iter().copied().collect()
        } else {
            index::sample(rng, set.len(), count)
                .into_iter()
                .map(|k| set[k])
                .collect()
        };
        for &src in &victims {
            self.remove_edge(src, node);
        }
        victims
    }

    pub fn block_edge_counts(&self) -> BlockCounts {
        let mut e = [[0u64; 2]; 2];
        for (dst, set) in self.in_adj.iter().enumerate() {
            let s = self.groups[dst].index();
            for &src in set {
                e[self.groups[src].index()][s] += 1;
            }
        }
        BlockCounts(e)
    }

    /// Writes the edge-list snapshot: a `# nodes=<N> groups=<labels>` header
    /// followed by one `source target` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        let labels: Vec<String> = self.groups.iter().map(|g| g.to_string()).collect();
        writeln!(
            out,
            "# nodes={} groups={}",
            self.node_count(),
            labels.join(",")
        )?;
        let mut edges: Vec<(NodeId, NodeId)> = self.edges().collect();
        edges.sort_unstable();
        for (src, dst) in edges {
            writeln!(out, "{src} {dst}")?;
        }
        Ok(())
    }

    /// Parses the format produced by [`write_edge_list`](Self::write_edge_list).
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let header = header?;
        let groups = parse_header(&header)?;
        let mut g = Self::new(groups)?;
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(parse_err(format!("expected `source target`, got `{line}`")));
            };
            let src: NodeId = a
                .parse()
                .map_err(|_| parse_err(format!("bad node id `{a}`")))?;
            let dst: NodeId = b
                .parse()
                .map_err(|_| parse_err(format!("bad node id `{b}`")))?;
            if !g.add_edge(src, dst).map_err(|e| parse_err(e.to_string()))? {
                return Err(parse_err(format!("duplicate edge {src} -> {dst}")));
            }
        }
        Ok(g)
    }
}

fn parse_header(header: &str) -> Result<Vec<Group>> {
    let bad = |message: &str| Error::Parse {
        line: 1,
        message: message.to_string(),
    };
    let rest = header
        .strip_prefix('#')
        .ok_or_else(|| bad("missing `# nodes=<N> groups=<labels>` header"))?;
    let mut nodes = None;
    let mut groups = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("nodes=") {
            nodes = Some(v.parse::<usize>().map_err(|_| bad("bad node count"))?);
        } else if let Some(v) = field.strip_prefix("groups=") {
            let labels = v
                .split(',')
                .map(|s| {
                    s.parse::<u8>()
                        .ok()
                        .and_then(Group::new)
                        .ok_or_else(|| bad("group labels must be 0 or 1"))
                })
                .collect::<Result<Vec<_>>>()?;
            groups = Some(labels);
        }
    }
    let (Some(nodes), Some(groups)) = (nodes, groups) else {
        return Err(bad("header needs both nodes= and groups="));
    };
    if groups.len() != nodes {
        return Err(bad("number of group labels differs from nodes="));
    }
    Ok(groups)
}
