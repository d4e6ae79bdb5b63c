//! Immutable sparse undirected unweighted graphs.
//!
//! Nodes carry arbitrary external string ids mapped to dense indices
//! `0..node_count` in first-appearance order. Adjacency is CSR with per-node
//! sorted neighbor lists. Self-loops are dropped (counted); duplicate edges
//! are collapsed (counted). Invariants: symmetric adjacency, `degrees[i] =
//! |neigh(i)|`, `sum(degrees) = 2 |E|`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

/// Bijective external-id <-> dense-index map.
#[derive(Debug, Clone, Default)]
pub struct NodeLabeling {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl NodeLabeling {
    /// Dense index for `name`, inserting it if unseen.
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn name(&self, i: u32) -> &str {
        &self.names[i as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Count of input irregularities tolerated while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: NodeLabeling,
    /// Unordered pairs stored as (min, max), in first-appearance order.
    edges: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    degrees: Vec<u32>,
}

impl Graph {
    /// Build from external-id pairs plus optional extra isolated nodes.
    pub fn from_named_edges<'a, I, J>(edges: I, extra_nodes: J) -> (Graph, LoadReport)
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
        J: IntoIterator<Item = &'a str>,
    {
        let mut labels = NodeLabeling::default();
        for name in extra_nodes {
            labels.intern(name);
        }
        let mut report = LoadReport::default();
        let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
        let mut pairs = Vec::new();
        for (a, b) in edges {
            let (ia, ib) = (labels.intern(a), labels.intern(b));
            if ia == ib {
                report.self_loops_dropped += 1;
                continue;
            }
            let key = (ia.min(ib), ia.max(ib));
            if seen.insert(key, ()).is_some() {
                report.duplicate_edges_dropped += 1;
                continue;
            }
            pairs.push(key);
        }
        (Graph::assemble(labels, pairs), report)
    }

    /// Build from dense-index pairs on `n` nodes labeled "0".."n-1".
    pub fn from_index_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut labels = NodeLabeling::default();
        for i in 0..n {
            labels.intern(&i.to_string());
        }
        let mut seen = HashMap::new();
        let mut pairs = Vec::new();
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::UnknownNode(a.max(b).to_string()));
            }
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, ()).is_none() {
                pairs.push(key);
            }
        }
        Ok(Graph::assemble(labels, pairs))
    }

    fn assemble(labels: NodeLabeling, edges: Vec<(u32, u32)>) -> Graph {
        let n = labels.len();
        let mut degrees = vec![0u32; n];
        for &(a, b) in &edges {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degrees[i];
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; edges.len() * 2];
        for &(a, b) in &edges {
            neighbors[cursor[a as usize] as usize] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize] as usize] = a;
            cursor[b as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        Graph {
            labels,
            edges,
            offsets,
            neighbors,
            degrees,
        }
    }

    /// Load a `#`-commented whitespace edge list. Blank lines are skipped.
    pub fn load_edge_list(path: &Path) -> Result<(Graph, LoadReport)> {
        Self::load_edge_list_with_nodes(path, None)
    }

    /// As [`Graph::load_edge_list`], with an optional node-list file (one id
    /// per line) declaring nodes up front so isolated nodes can exist.
    pub fn load_edge_list_with_nodes(
        path: &Path,
        node_path: Option<&Path>,
    ) -> Result<(Graph, LoadReport)> {
        let mut extra = Vec::new();
        if let Some(np) = node_path {
            let file = std::fs::File::open(np).map_err(|e| Error::io(np, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(np, e))?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('#') {
                    extra.push(t.to_string());
                }
            }
        }
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut tokens = t.split_whitespace();
            match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(a), Some(b), None) => pairs.push((a.to_string(), b.to_string())),
                _ => {
                    return Err(Error::Parse {
                        path: path.display().to_string(),
                        line: lineno + 1,
                        msg: format!("expected two node tokens, got {t:?}"),
                    })
                }
            }
        }
        let (g, report) = Graph::from_named_edges(
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            extra.iter().map(|s| s.as_str()),
        );
        if g.node_count() == 0 {
            return Err(Error::EmptyGraph(path.display().to_string()));
        }
        Ok((g, report))
    }

    /// Write one `a b` line per edge; inverse of [`Graph::load_edge_list`].
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        for &(a, b) in &self.edges {
            writeln!(out, "{} {}", self.labels.name(a), self.labels.name(b))
                .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Unordered edge pairs (min, max) in first-appearance order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, i: u32) -> &[u32] {
        &self.neighbors[self.offsets[i as usize] as usize..self.offsets[i as usize + 1] as usize]
    }

    pub fn degree(&self, i: u32) -> u32 {
        self.degrees[i as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn labels(&self) -> &NodeLabeling {
        &self.labels
    }

    /// Maximal connected node sets, one component id per node.
    pub fn connected_components(&self) -> Partition {
        let mut uf = UnionFind::new(self.node_count());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        Partition::from_assignment(uf.labels())
    }

    /// Induced subgraph on `nodes` (dense ids). External labels carry over;
    /// the second return value maps new dense ids back to the original ones.
    pub fn induced(&self, nodes: &[u32]) -> (Graph, Vec<u32>) {
        let mut keep = vec![false; self.node_count()];
        for &v in nodes {
            keep[v as usize] = true;
        }
        let mut sorted: Vec<u32> = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut labels = NodeLabeling::default();
        for &v in &sorted {
            labels.intern(self.labels.name(v));
        }
        let back: HashMap<u32, u32> = sorted
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as u32))
            .collect();
        let pairs: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|&&(a, b)| keep[a as usize] && keep[b as usize])
            .map(|&(a, b)| (back[&a], back[&b]))
            .collect();
        (Graph::assemble(labels, pairs), sorted)
    }

    /// Induced subgraph on the largest component. Ties are broken by the
    /// lexicographically smallest minimum external id among members.
    pub fn giant_component(&self) -> Result<(Graph, Vec<u32>)> {
        if self.node_count() == 0 {
            return Err(Error::EmptyGraph("giant_component of empty graph".into()));
        }
        let comp = self.connected_components();
        let groups = comp.groups();
        let best = groups
            .iter()
            .min_by(|a, b| {
                b.len().cmp(&a.len()).then_with(|| {
                    let ma = a.iter().map(|&v| self.labels.name(v)).min().unwrap();
                    let mb = b.iter().map(|&v| self.labels.name(v)).min().unwrap();
                    ma.cmp(mb)
                })
            })
            .unwrap();
        Ok(self.induced(best))
    }
}

/// Flat community assignment: dense community ids, every node exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    sizes: Vec<u32>,
}

impl Partition {
    /// Densify arbitrary labels to ids 0..k in first-appearance order.
    pub fn from_assignment(labels: Vec<u32>) -> Partition {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        let mut sizes = Vec::new();
        for l in labels {
            let next = map.len() as u32;
            let id = *map.entry(l).or_insert(next);
            if id as usize == sizes.len() {
                sizes.push(0);
            }
            sizes[id as usize] += 1;
            assignment.push(id);
        }
        Partition { assignment, sizes }
    }

    /// Build from explicit member groups covering 0..n exactly once.
    pub fn from_groups(n: usize, groups: &[Vec<u32>]) -> Result<Partition> {
        let mut assignment = vec![u32::MAX; n];
        for (c, members) in groups.iter().enumerate() {
            for &v in members {
                if v as usize >= n || assignment[v as usize] != u32::MAX {
                    return Err(Error::Config(format!(
                        "node {v} missing or assigned twice in partition groups"
                    )));
                }
                assignment[v as usize] = c as u32;
            }
        }
        if assignment.iter().any(|&a| a == u32::MAX) {
            return Err(Error::Config("partition groups do not cover all nodes".into()));
        }
        Ok(Partition::from_assignment(assignment))
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn community_of(&self, node: u32) -> u32 {
        self.assignment[node as usize]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn size(&self, community: u32) -> usize {
        self.sizes[community as usize] as usize
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Member lists indexed by community id; members ascending.
    pub fn groups(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }

    /// Label-independent canonical form: groups sorted by smallest member.
    pub fn canonical_groups(&self) -> Vec<Vec<u32>> {
        let mut gs = self.groups();
        gs.sort_by_key(|g| g[0]);
        gs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn path_graph_load() {
        let f = write_tmp("a b\nb c\n");
        let (g, rep) = Graph::load_edge_list(f.path()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(rep, LoadReport::default());
        let b = g.labels().index_of("b").unwrap();
        assert_eq!(g.degree(b), 2);
        assert_eq!(g.degree(g.labels().index_of("a").unwrap()), 1);
        assert_eq!(g.degrees().iter().sum::<u32>() as usize, 2 * g.edge_count());
    }

    #[test]
    fn dedup_and_self_loops() {
        let f = write_tmp("a b\nb a\na a\n");
        let (g, rep) = Graph::load_edge_list(f.path()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(rep.self_loops_dropped, 1);
        assert_eq!(rep.duplicate_edges_dropped, 1);
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = write_tmp("# header\n\na b\n  # indented comment\nb c\n");
        let (g, _) = Graph::load_edge_list(f.path()).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let f = write_tmp("a b\nxyz\n");
        let err = Graph::load_edge_list(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_errors() {
        let f = write_tmp("# nothing\n");
        assert!(matches!(
            Graph::load_edge_list(f.path()),
            Err(Error::EmptyGraph(_))
        ));
    }

    #[test]
    fn node_list_declares_isolated_nodes() {
        let e = write_tmp("a b\n");
        let n = write_tmp("a\nb\nc\n");
        let (g, _) = Graph::load_edge_list_with_nodes(e.path(), Some(n.path())).unwrap();
        assert_eq!(g.node_count(), 3);
        let comp = g.connected_components();
        assert_eq!(comp.community_count(), 2);
        assert_eq!(g.degree(g.labels().index_of("c").unwrap()), 0);
    }

    #[test]
    fn round_trip() {
        let f = write_tmp("a b\nb c\nc a\nd e\n");
        let (g, _) = Graph::load_edge_list(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        g.write_edge_list(out.path()).unwrap();
        let (g2, rep) = Graph::load_edge_list(out.path()).unwrap();
        assert_eq!(rep, LoadReport::default());
        assert_eq!(g.node_count(), g2.node_count());
        // Same external edge set under the labelings.
        let names = |g: &Graph| {
            let mut v: Vec<(String, String)> = g
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (g.labels().name(a), g.labels().name(b));
                    (x.min(y).to_string(), x.max(y).to_string())
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(names(&g), names(&g2));
    }

    #[test]
    fn components_two_disjoint_edges() {
        let g = Graph::from_index_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let p = g.connected_components();
        assert_eq!(p.community_count(), 2);
        assert_eq!(p.sizes(), &[2, 2]);
    }

    #[test]
    fn giant_component_picks_largest() {
        let g = Graph::from_index_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7)])
            .unwrap();
        let (giant, back) = g.giant_component().unwrap();
        assert_eq!(giant.node_count(), 5);
        assert_eq!(back, vec![0, 1, 2, 3, 4]);
        assert_eq!(giant.labels().name(0), "0");
    }

    #[test]
    fn giant_component_tie_breaks_by_external_id() {
        // Two components of size 2: {b, d} and {a, c}; "a" < "b".
        let (g, _) = Graph::from_named_edges([("b", "d"), ("a", "c")], []);
        let (giant, _) = g.giant_component().unwrap();
        let mut names: Vec<&str> = (0..2).map(|i| giant.labels().name(i)).collect();
        names.sort();
        assert_eq!(names, vec!["a", "c"]);
    }

    #[test]
    fn induced_subgraph_keeps_labels() {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let (sub, back) = g.induced(&[1, 2, 3]);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(back, vec![1, 2, 3]);
        assert_eq!(sub.labels().name(0), "1");
    }

    #[test]
    fn karate_fixture_loads() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/karate.edges");
        let (g, rep) = Graph::load_edge_list(&path).unwrap();
        assert_eq!(g.node_count(), 34);
        assert_eq!(g.edge_count(), 78);
        assert_eq!(rep, LoadReport::default());
        assert_eq!(g.degree(g.labels().index_of("1").unwrap()), 16);
        assert_eq!(g.degree(g.labels().index_of("34").unwrap()), 17);
        assert_eq!(g.degree(g.labels().index_of("12").unwrap()), 1);
        assert_eq!(g.connected_components().community_count(), 1);
    }

    #[test]
    fn partition_from_groups_validates() {
        assert!(Partition::from_groups(3, &[vec![0, 1], vec![2]]).is_ok());
        assert!(Partition::from_groups(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_groups(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }
}
