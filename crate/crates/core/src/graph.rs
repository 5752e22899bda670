//! Sparsity patterns as directed graphs on state (alpha) and input (beta) nodes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Alpha,
    Beta,
}

/// A node of a sparsity pattern. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub const fn alpha(index: usize) -> Self {
        NodeId { kind: NodeKind::Alpha, index }
    }

    pub const fn beta(index: usize) -> Self {
        NodeId { kind: NodeKind::Beta, index }
    }

    pub fn is_alpha(&self) -> bool {
        self.kind == NodeKind::Alpha
    }

    pub fn is_beta(&self) -> bool {
        self.kind == NodeKind::Beta
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Alpha => write!(f, "a{}", self.index),
            NodeKind::Beta => write!(f, "b{}", self.index),
        }
    }
}

impl FromStr for NodeId {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PatternError::BadNodeName(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('a') => NodeKind::Alpha,
            Some('b') => NodeKind::Beta,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let index: usize = digits.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(NodeId { kind, index })
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("{location}: malformed input: {message}")]
    Syntax { location: String, message: String },
    #[error("invalid node name {0:?} (expected a<i> or b<j> with i, j >= 1)")]
    BadNodeName(String),
    #[error("{location}: incoming edge to β-node {target}")]
    EdgeIntoBeta { location: String, target: NodeId },
    #[error("{location}: node {node} out of range (n = {n}, m = {m})")]
    OutOfRange {
        location: String,
        node: NodeId,
        n: usize,
        m: usize,
    },
    #[error("{location}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        location: String,
        from: NodeId,
        to: NodeId,
    },
    #[error("pattern needs at least one α-node and one β-node (got n = {n}, m = {m})")]
    EmptyNodeSet { n: usize, m: usize },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternFormat {
    Json,
    Dot,
}

impl PatternFormat {
    /// Guess the format from a file extension; anything that is not `.dot`/`.gv` is JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("dot") | Some("gv") => PatternFormat::Dot,
            _ => PatternFormat::Json,
        }
    }
}

/// Zero/nonzero structure of a pair `(A, B)`: an edge `x -> a_j` means the
/// entry of `A` (or `B`) in row `j` and the column of `x` may be nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsityPattern {
    n: usize,
    m: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
}

#[derive(Serialize, Deserialize)]
struct PatternFile {
    alpha: usize,
    beta: usize,
    edges: Vec<(String, String)>,
}

impl SparsityPattern {
    pub fn new<I>(n: usize, m: usize, edges: I) -> Result<Self, PatternError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = SparsityPattern {
            n,
            m,
            edges: BTreeSet::new(),
        };
        if n == 0 || m == 0 {
            return Err(PatternError::EmptyNodeSet { n, m });
        }
        for (k, (from, to)) in edges.into_iter().enumerate() {
            g.insert_edge(from, to, &format!("edge #{k}"))?;
        }
        Ok(g)
    }

    fn insert_edge(&mut self, from: NodeId, to: NodeId, location: &str) -> Result<(), PatternError> {
        for node in [from, to] {
            if !self.contains(node) {
                return Err(PatternError::OutOfRange {
                    location: location.to_string(),
                    node,
                    n: self.n,
                    m: self.m,
                });
            }
        }
        if to.is_beta() {
            return Err(PatternError::EdgeIntoBeta {
                location: location.to_string(),
                target: to,
            });
        }
        if !self.edges.insert((from, to)) {
            return Err(PatternError::DuplicateEdge {
                location: location.to_string(),
                from,
                to,
            });
        }
        Ok(())
    }

    /// Convenience constructor from `("b1", "a1")`-style names. Panics on invalid input.
    pub fn from_names(n: usize, m: usize, edges: &[(&str, &str)]) -> Self {
        let parsed = edges
            .iter()
            .map(|(a, b)| (a.parse().unwrap(), b.parse().unwrap()))
            .collect::<Vec<_>>();
        SparsityPattern::new(n, m, parsed).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn contains(&self, node: NodeId) -> bool {
        match node.kind {
            NodeKind::Alpha => (1..=self.n).contains(&node.index),
            NodeKind::Beta => (1..=self.m).contains(&node.index),
        }
    }

    pub fn alpha_nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.n).map(NodeId::alpha)
    }

    pub fn beta_nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.m).map(NodeId::beta)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        self.alpha_nodes().chain(self.beta_nodes())
    }

    /// Out-neighbors of every α-node restricted to α-nodes, 0-based.
    pub fn alpha_successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.n];
        for (from, to) in self.edges() {
            if from.is_alpha() {
                succ[from.index - 1].push(to.index - 1);
            }
        }
        succ
    }

    /// α-nodes (0-based) fed directly by some β-node.
    pub fn beta_fed(&self) -> BTreeSet<usize> {
        self.edges()
            .filter(|(from, _)| from.is_beta())
            .map(|(_, to)| to.index - 1)
            .collect()
    }

    /// `N_in(V')`: every node with an edge into the subset.
    pub fn in_neighbors(&self, subset: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>, PatternError> {
        if let Some(bad) = subset.iter().find(|v| !self.contains(**v)) {
            return Err(PatternError::UnknownNode(*bad));
        }
        Ok(self
            .edges()
            .filter(|(_, to)| subset.contains(to))
            .map(|(from, _)| from)
            .collect())
    }

    /// Multi-source reachability from the β-nodes.
    pub fn accessibility(&self) -> Accessibility {
        let reached = self.closure(&self.beta_fed());
        let unreachable = (0..self.n)
            .filter(|i| !reached.contains(i))
            .map(|i| NodeId::alpha(i + 1))
            .collect::<BTreeSet<_>>();
        Accessibility {
            accessible: unreachable.is_empty(),
            unreachable,
        }
    }

    pub fn is_accessible(&self) -> bool {
        self.accessibility().accessible
    }

    /// α-nodes reachable from `seeds` by walks of length >= 0 inside the α-subgraph.
    fn closure(&self, seeds: &BTreeSet<usize>) -> BTreeSet<usize> {
        let succ = self.alpha_successors();
        let mut seen = seeds.clone();
        let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for &w in &succ[v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// α-nodes that are the endpoint of some walk from a β-node of length strictly
    /// greater than `k`.
    pub fn walk_reach_closure(&self, k: usize) -> BTreeSet<NodeId> {
        let succ = self.alpha_successors();
        // exactly-length-L frontier, L = 1 initially
        let mut frontier = self.beta_fed();
        for _ in 0..k {
            if frontier.is_empty() {
                break;
            }
            frontier = frontier
                .iter()
                .flat_map(|&v| succ[v].iter().copied())
                .collect();
        }
        self.closure(&frontier)
            .into_iter()
            .map(|i| NodeId::alpha(i + 1))
            .collect()
    }

    /// The subgraph induced by the given α-nodes (0-based) contains no directed cycle.
    /// A self-loop counts as a cycle.
    pub fn induced_alpha_acyclic(&self, members: &[usize]) -> bool {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &v) in members.iter().enumerate() {
            pos[v] = k;
        }
        let succ = self.alpha_successors();
        let mut indeg = vec![0usize; members.len()];
        for &v in members {
            for &w in &succ[v] {
                if pos[w] != usize::MAX {
                    indeg[pos[w]] += 1;
                }
            }
        }
        let mut stack: Vec<usize> = (0..members.len()).filter(|&k| indeg[k] == 0).collect();
        let mut removed = 0;
        while let Some(k) = stack.pop() {
            removed += 1;
            for &w in &succ[members[k]] {
                if pos[w] != usize::MAX {
                    indeg[pos[w]] -= 1;
                    if indeg[pos[w]] == 0 {
                        stack.push(pos[w]);
                    }
                }
            }
        }
        removed == members.len()
    }

    pub fn parse(input: &[u8], format: PatternFormat) -> Result<Self, PatternError> {
        let text = std::str::from_utf8(input).map_err(|e| PatternError::Syntax {
            location: format!("byte {}", e.valid_up_to()),
            message: "input is not valid UTF-8".into(),
        })?;
        match format {
            PatternFormat::Json => Self::from_json(text),
            PatternFormat::Dot => Self::from_dot(text),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let file: PatternFile = serde_json::from_str(text).map_err(|e| PatternError::Syntax {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if file.alpha == 0 || file.beta == 0 {
            return Err(PatternError::EmptyNodeSet {
                n: file.alpha,
                m: file.beta,
            });
        }
        let mut g = SparsityPattern {
            n: file.alpha,
            m: file.beta,
            edges: BTreeSet::new(),
        };
        for (k, (from, to)) in file.edges.iter().enumerate() {
            let location = format!("edges[{k}]");
            g.insert_edge(from.parse()?, to.parse()?, &location)?;
        }
        Ok(g)
    }

    /// Parses the `digraph { b1 -> a1; a1 -> a1; }` subset of DOT. Node counts are
    /// the largest indices mentioned; attributes and graph settings are ignored.
    pub fn from_dot(text: &str) -> Result<Self, PatternError> {
        let mut statements = Vec::new();
        let mut opened = false;
        let mut closed = false;
        for (lineno, raw) in text.lines().enumerate() {
            let location = format!("line {}", lineno + 1);
            let mut line = raw;
            if let Some(pos) = line.find("//") {
                line = &line[..pos];
            }
            if line.trim_start().starts_with('#') {
                continue;
            }
            let mut line = strip_brackets(line);
            if !opened {
                if let Some(pos) = line.find('{') {
                    let head = line[..pos].trim();
                    let mut words = head.split_whitespace();
                    match words.next() {
                        Some("digraph") => {}
                        Some("strict") if words.next() == Some("digraph") => {}
                        _ => {
                            return Err(PatternError::Syntax {
                                location,
                                message: "expected `digraph {`".into(),
                            })
                        }
                    }
                    opened = true;
                    line = line[pos + 1..].to_string();
                } else if line.trim().is_empty() {
                    continue;
                } else {
                    return Err(PatternError::Syntax {
                        location,
                        message: "expected `digraph {`".into(),
                    });
                }
            }
            if let Some(pos) = line.find('}') {
                if !line[pos + 1..].trim().is_empty() {
                    return Err(PatternError::Syntax {
                        location,
                        message: "trailing content after `}`".into(),
                    });
                }
                line.truncate(pos);
                closed = true;
            }
            for stmt in line.split(';') {
                let stmt = stmt.trim();
                if !stmt.is_empty() {
                    statements.push((location.clone(), stmt.to_string()));
                }
            }
            if closed {
                break;
            }
        }
        if !opened || !closed {
            return Err(PatternError::Syntax {
                location: "end of input".into(),
                message: "unterminated digraph".into(),
            });
        }

        let mut chains = Vec::new();
        let (mut n, mut m) = (0, 0);
        for (location, stmt) in statements {
            if stmt.contains('=') && !stmt.contains("->") {
                continue;
            }
            let names: Vec<&str> = stmt.split("->").map(str::trim).collect();
            let mut nodes = Vec::with_capacity(names.len());
            for name in names {
                let name = name.trim_matches('"');
                let node: NodeId = name.parse().map_err(|_| PatternError::Syntax {
                    location: location.clone(),
                    message: format!("invalid node name {name:?}"),
                })?;
                match node.kind {
                    NodeKind::Alpha => n = n.max(node.index),
                    NodeKind::Beta => m = m.max(node.index),
                }
                nodes.push(node);
            }
            chains.push((location, nodes));
        }
        if n == 0 || m == 0 {
            return Err(PatternError::EmptyNodeSet { n, m });
        }
        let mut g = SparsityPattern {
            n,
            m,
            edges: BTreeSet::new(),
        };
        for (location, nodes) in chains {
            for pair in nodes.windows(2) {
                g.insert_edge(pair[0], pair[1], &location)?;
            }
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let file = PatternFile {
            alpha: self.n,
            beta: self.m,
            edges: self
                .edges()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        };
        serde_json::to_string(&file).expect("pattern serialization cannot fail")
    }

    /// DOT output; isolated nodes are declared so that node counts survive a round trip.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for v in self.nodes() {
            out.push_str(&format!("  {v};\n"));
        }
        for (a, b) in self.edges() {
            out.push_str(&format!("  {a} -> {b};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Copy of the pattern with α-node `i` renamed to `perm[i - 1]`.
    pub fn relabel_alpha(&self, perm: &[usize]) -> Self {
        let map = |v: NodeId| match v.kind {
            NodeKind::Alpha => NodeId::alpha(perm[v.index - 1]),
            NodeKind::Beta => v,
        };
        SparsityPattern {
            n: self.n,
            m: self.m,
            edges: self.edges().map(|(a, b)| (map(a), map(b))).collect(),
        }
    }

    /// The pattern with the given edge removed (no-op when absent).
    pub fn without_edge(&self, from: NodeId, to: NodeId) -> Self {
        let mut g = self.clone();
        g.edges.remove(&(from, to));
        g
    }

    /// In-degree of every α-node, grouped by source kind; handy for reports.
    pub fn alpha_in_degrees(&self) -> BTreeMap<NodeId, usize> {
        let mut deg: BTreeMap<NodeId, usize> = self.alpha_nodes().map(|v| (v, 0)).collect();
        for (_, to) in self.edges() {
            *deg.get_mut(&to).unwrap() += 1;
        }
        deg
    }
}

fn strip_brackets(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut depth = 0usize;
    for c in line.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Accessibility {
    pub accessible: bool,
    pub unreachable: BTreeSet<NodeId>,
}

/// Patterns that recur across tests, examples and documentation.
pub mod fixtures {
    use super::SparsityPattern;

    /// Self-loop on `a1`, fan-out from `a1` to `a2`, `a3`, single input into `a1`.
    pub fn fan_out_with_loop() -> SparsityPattern {
        SparsityPattern::from_names(3, 1, &[("b1", "a1"), ("a1", "a1"), ("a1", "a2"), ("a1", "a3")])
    }

    /// [`fan_out_with_loop`] without the self-loop.
    pub fn fan_out_without_loop() -> SparsityPattern {
        SparsityPattern::from_names(3, 1, &[("b1", "a1"), ("a1", "a2"), ("a1", "a3")])
    }

    /// Six states, two of them fed directly; `a2` has no way to lengthen its walks.
    pub fn two_fed_six_states() -> SparsityPattern {
        SparsityPattern::from_names(
            6,
            1,
            &[
                ("b1", "a1"),
                ("b1", "a2"),
                ("a1", "a1"),
                ("a2", "a3"),
                ("a2", "a4"),
                ("a1", "a5"),
                ("a2", "a5"),
                ("a3", "a5"),
                ("a4", "a5"),
                ("a5", "a5"),
                ("a6", "a5"),
                ("a1", "a6"),
                ("a2", "a6"),
                ("a3", "a6"),
                ("a4", "a6"),
                ("a5", "a6"),
                ("a6", "a6"),
            ],
        )
    }

    /// Self-looped root with a depth-4 spanning tree on six states.
    pub fn depth_four_tree() -> SparsityPattern {
        SparsityPattern::from_names(
            6,
            1,
            &[
                ("b1", "a1"),
                ("a1", "a1"),
                ("a1", "a2"),
                ("a2", "a3"),
                ("a2", "a4"),
                ("a3", "a5"),
                ("a5", "a6"),
            ],
        )
    }

    /// `b1 -> a1 -> a2 -> a3`.
    pub fn path3() -> SparsityPattern {
        SparsityPattern::from_names(3, 1, &[("b1", "a1"), ("a1", "a2"), ("a2", "a3")])
    }

    /// `b1 -> a1` plus the cycle `a1 -> a2 -> a3 -> a1`.
    pub fn cycle3() -> SparsityPattern {
        SparsityPattern::from_names(
            3,
            1,
            &[("b1", "a1"), ("a1", "a2"), ("a2", "a3"), ("a3", "a1")],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn set(nodes: &[&str]) -> BTreeSet<NodeId> {
        nodes.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn parse_json_fan_out() {
        let text = r#"{"alpha": 3, "beta": 1, "edges": [["b1","a1"], ["a1","a1"], ["a1","a2"], ["a1","a3"]]}"#;
        let g = SparsityPattern::parse(text.as_bytes(), PatternFormat::Json).unwrap();
        assert_eq!(g, fan_out_with_loop());
    }

    #[test]
    fn parse_json_single_state() {
        let g = SparsityPattern::from_json(r#"{"alpha":1,"beta":1,"edges":[["b1","a1"]]}"#).unwrap();
        assert_eq!(g.n(), 1);
        assert!(g.is_accessible());
    }

    #[test]
    fn parse_json_errors() {
        let err = SparsityPattern::from_json(r#"{"alpha":1,"beta":1,"edges":[["a1","b1"]]}"#).unwrap_err();
        assert!(matches!(err, PatternError::EdgeIntoBeta { .. }));
        assert!(err.to_string().contains("incoming edge to β-node"));
        assert!(err.to_string().contains("edges[0]"));

        let err = SparsityPattern::from_json(r#"{"alpha":2,"beta":1,"edges":[["b1","a3"]]}"#).unwrap_err();
        assert!(matches!(err, PatternError::OutOfRange { .. }));

        let err = SparsityPattern::from_json(
            r#"{"alpha":2,"beta":1,"edges":[["b1","a1"],["a1","a2"],["b1","a1"]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, PatternError::DuplicateEdge { ref location, .. } if location == "edges[2]"));

        let err = SparsityPattern::from_json(r#"{"alpha":2,"beta":1,"edges":[["b1","x1"]]}"#).unwrap_err();
        assert!(matches!(err, PatternError::BadNodeName(_)));

        let err = SparsityPattern::from_json(r#"{"alpha":2,"beta":1,"edges":[["b1","a1"]"#).unwrap_err();
        assert!(matches!(err, PatternError::Syntax { .. }));

        let err = SparsityPattern::from_json(r#"{"alpha":0,"beta":1,"edges":[]}"#).unwrap_err();
        assert!(matches!(err, PatternError::EmptyNodeSet { .. }));
    }

    #[test]
    fn parse_dot() {
        let text = "digraph G {\n  rankdir=LR;\n  b1 -> a1 [style=dashed];\n  a1 -> a1; a1 -> a2 -> a3 // chain\n  a1 -> a3;\n}\n";
        let g = SparsityPattern::from_dot(text).unwrap();
        assert_eq!(g, SparsityPattern::from_names(3, 1, &[("b1", "a1"), ("a1", "a1"), ("a1", "a2"), ("a2", "a3"), ("a1", "a3")]));

        let err = SparsityPattern::from_dot("digraph {\n b1 -> a1;\n a1 -> b1;\n}").unwrap_err();
        assert!(matches!(err, PatternError::EdgeIntoBeta { ref location, .. } if location == "line 3"));
        assert!(SparsityPattern::from_dot("graph { a1 -- a2 }").is_err());
        assert!(SparsityPattern::from_dot("digraph { b1 -> a1;").is_err());
        assert!(SparsityPattern::from_dot("digraph { b1 -> c1; }").is_err());
    }

    #[test]
    fn dot_round_trip_keeps_isolated_nodes() {
        let g = SparsityPattern::from_names(3, 2, &[("b1", "a1")]);
        assert_eq!(SparsityPattern::from_dot(&g.to_dot()).unwrap(), g);
    }

    #[test]
    fn in_neighbors_examples() {
        let g = fan_out_with_loop();
        let all: BTreeSet<_> = g.alpha_nodes().collect();
        assert_eq!(g.in_neighbors(&all).unwrap(), set(&["a1", "b1"]));
        assert!(g.in_neighbors(&BTreeSet::new()).unwrap().is_empty());
        assert_eq!(path3().in_neighbors(&set(&["a2", "a3"])).unwrap(), set(&["a1", "a2"]));
        assert_eq!(
            g.in_neighbors(&set(&["a7"])).unwrap_err(),
            PatternError::UnknownNode(NodeId::alpha(7))
        );
    }

    #[test]
    fn accessibility_examples() {
        assert!(fan_out_with_loop().is_accessible());
        assert!(two_fed_six_states().is_accessible());
        let g = SparsityPattern::from_names(2, 1, &[("b1", "a1")]);
        let acc = g.accessibility();
        assert!(!acc.accessible);
        assert_eq!(acc.unreachable, set(&["a2"]));
    }

    #[test]
    fn walk_reach_closure_examples() {
        let g = two_fed_six_states();
        let all: BTreeSet<_> = g.alpha_nodes().collect();
        let k1: BTreeSet<_> = all.difference(&set(&["a2"])).copied().collect();
        assert_eq!(g.walk_reach_closure(1), k1);
        let k2: BTreeSet<_> = all.difference(&set(&["a2", "a3", "a4"])).copied().collect();
        assert_eq!(g.walk_reach_closure(2), k2);
        assert_eq!(g.walk_reach_closure(0), all);
        assert!(path3().walk_reach_closure(3).is_empty());
        assert_eq!(path3().walk_reach_closure(2), set(&["a3"]));
    }

    #[test]
    fn acyclicity() {
        let g = cycle3();
        assert!(!g.induced_alpha_acyclic(&[0, 1, 2]));
        assert!(g.induced_alpha_acyclic(&[0, 1]));
        let g = fan_out_with_loop();
        assert!(!g.induced_alpha_acyclic(&[0]));
        assert!(g.induced_alpha_acyclic(&[1, 2]));
    }
}
