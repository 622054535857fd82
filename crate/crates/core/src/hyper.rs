//! Hypergraphs over variable names: reduction, covering, twigs and
//! hypertree construction sequences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type Edge = BTreeSet<String>;

/// A non-empty set of non-empty hyperedges. Vertices keep the order in which
/// they were first declared; that order breaks ties in derived structures.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    order: Vec<String>,
    edges: Vec<Edge>,
}

impl PartialEq for Hypergraph {
    /// Set equality of hyperedges.
    fn eq(&self, other: &Self) -> bool {
        self.edge_set() == other.edge_set()
    }
}

impl Eq for Hypergraph {}

pub fn edge<S: AsRef<str>>(names: &[S]) -> Edge {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

impl Hypergraph {
    pub fn new<I, E, S>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut out: Vec<Edge> = Vec::new();
        for e in edges {
            let mut h = Edge::new();
            for v in e {
                let v = v.into();
                if v.is_empty() || v.chars().any(|c| c.is_whitespace() || c == ',' || c == '#') {
                    return Err(Error::InvalidHypergraph(format!("bad vertex name `{v}`")));
                }
                if !order.contains(&v) {
                    order.push(v.clone());
                }
                h.insert(v);
            }
            if h.is_empty() {
                return Err(Error::InvalidHypergraph("empty hyperedge".into()));
            }
            if !out.contains(&h) {
                out.push(h);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidHypergraph("no hyperedges".into()));
        }
        Ok(Hypergraph { order, edges: out })
    }

    pub(crate) fn from_parts(order: &[String], edges: Vec<Edge>) -> Self {
        let order = order
            .iter()
            .filter(|v| edges.iter().any(|e| e.contains(*v)))
            .cloned()
            .collect();
        Hypergraph { order, edges }
    }

    /// Vertices in declaration order.
    pub fn vertices(&self) -> &[String] {
        &self.order
    }

    /// Hyperedges in declaration order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_set(&self) -> BTreeSet<&Edge> {
        self.edges.iter().collect()
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    /// Keeps the hyperedges that are maximal under inclusion.
    pub fn reduce(&self) -> Hypergraph {
        let kept = self
            .edges
            .iter()
            .filter(|e| {
                !self
                    .edges
                    .iter()
                    .any(|f| f != *e && e.is_subset(f))
            })
            .cloned()
            .collect();
        Hypergraph::from_parts(&self.order, kept)
    }

    /// True iff every hyperedge of `other` lies inside some hyperedge of `self`.
    pub fn covers(&self, other: &Hypergraph) -> bool {
        other
            .edges
            .iter()
            .all(|h| self.edges.iter().any(|g| h.is_subset(g)))
    }

    /// All branches of `t`, in lexicographic order; empty when `t` is not a twig.
    pub fn twig_branches(&self, t: &Edge) -> Result<Vec<Edge>> {
        if !self.contains_edge(t) {
            return Err(Error::InvalidHypergraph(format!("{t:?} is not a hyperedge")));
        }
        Ok(branches_within(&self.edges, t))
    }

    /// A construction sequence found by greedy twig elimination, or `None`
    /// when the hypergraph is not a hypertree. The lexicographically smallest
    /// twig is removed first and its smallest branch recorded.
    pub fn hypertree_sequence(&self) -> Option<HypertreeSequence> {
        let mut live: Vec<Edge> = self.edges.clone();
        live.sort();
        let mut removed: Vec<(Edge, Edge)> = Vec::new();
        while live.len() > 1 {
            let pick = live.iter().enumerate().find_map(|(i, t)| {
                branches_within(&live, t)
                    .into_iter()
                    .next()
                    .map(|b| (i, b))
            });
            let (i, branch) = pick?;
            let twig = live.remove(i);
            removed.push((twig, branch));
        }
        let mut edges = vec![live.pop().expect("non-empty")];
        let mut branches = vec![None];
        for (twig, branch) in removed.into_iter().rev() {
            let b = edges.iter().position(|e| *e == branch).expect("branch precedes twig");
            edges.push(twig);
            branches.push(Some(b));
        }
        Some(HypertreeSequence {
            order: self.order.clone(),
            edges,
            branches,
        })
    }

    pub fn is_hypertree(&self) -> bool {
        self.hypertree_sequence().is_some()
    }

    /// Connected components, each in declaration order.
    pub fn components(&self) -> Vec<Hypergraph> {
        let mut comp_of: Vec<usize> = (0..self.edges.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if !self.edges[i].is_disjoint(&self.edges[j]) {
                    let (a, b) = (find(&mut comp_of, i), find(&mut comp_of, j));
                    comp_of[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
        for i in 0..self.edges.len() {
            let r = find(&mut comp_of, i);
            groups.entry(r).or_default().push(self.edges[i].clone());
        }
        groups
            .into_values()
            .map(|edges| Hypergraph::from_parts(&self.order, edges))
            .collect()
    }

    /// A hypergraph covering `self` whose connected components are hypertrees.
    ///
    /// Vertices of the primal graph are eliminated greedily by minimum degree
    /// (ties by declaration order); each elimination clique becomes a
    /// hyperedge and the result is reduced. No attempt is made at optimality.
    pub fn hypertree_cover(&self) -> Hypergraph {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for v in &self.order {
            adj.entry(v).or_default();
        }
        for e in &self.edges {
            for a in e {
                for b in e {
                    if a != b {
                        adj.get_mut(a.as_str()).unwrap().insert(b);
                    }
                }
            }
        }
        let rank: BTreeMap<&str, usize> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut cliques: Vec<Edge> = Vec::new();
        while !adj.is_empty() {
            let v = *adj
                .iter()
                .min_by_key(|(v, n)| (n.len(), rank[**v]))
                .map(|(v, _)| v)
                .unwrap();
            let nbrs = adj.remove(v).unwrap();
            let mut clique: Edge = nbrs.iter().map(|s| s.to_string()).collect();
            clique.insert(v.to_string());
            for a in &nbrs {
                let set = adj.get_mut(a).unwrap();
                set.remove(v);
                for b in &nbrs {
                    if a != b {
                        set.insert(b);
                    }
                }
            }
            cliques.push(clique);
        }
        Hypergraph::from_parts(&self.order, cliques).reduce()
    }

    pub fn parse(text: &str) -> Result<Hypergraph> {
        let mut edges = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut e = Vec::new();
            for (col, name) in split_with_columns(line) {
                let name = name.trim();
                if name.is_empty() || name.chars().any(char::is_whitespace) {
                    return Err(Error::parse(n + 1, col, format!("bad vertex name `{name}`")));
                }
                e.push(name.to_string());
            }
            edges.push(e);
        }
        Hypergraph::new(edges)
    }
}

fn split_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in line.char_indices() {
        if c == ',' {
            out.push((start + 1, &line[start..i]));
            start = i + 1;
        }
    }
    out.push((start + 1, &line[start..]));
    out
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            let names: Vec<&str> = self
                .order
                .iter()
                .filter(|v| e.contains(*v))
                .map(String::as_str)
                .collect();
            writeln!(f, "{}", names.join(","))?;
        }
        Ok(())
    }
}

fn branches_within(edges: &[Edge], t: &Edge) -> Vec<Edge> {
    if edges.len() < 2 {
        return Vec::new();
    }
    let shared: Edge = t
        .iter()
        .filter(|x| edges.iter().any(|h| h != t && h.contains(*x)))
        .cloned()
        .collect();
    let mut out: Vec<Edge> = edges
        .iter()
        .filter(|b| *b != t && !b.is_disjoint(t) && shared.is_subset(b))
        .cloned()
        .collect();
    out.sort();
    out
}

/// An ordering `h_1..h_n` of hyperedges where each `h_k` (k ≥ 2) is a twig of
/// `{h_1..h_k}` with recorded branch `h_{i_k}`, `i_k < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypertreeSequence {
    order: Vec<String>,
    edges: Vec<Edge>,
    branches: Vec<Option<usize>>,
}

impl HypertreeSequence {
    /// Checks the twig property at every step. `vertex_order` fixes the
    /// declaration order of vertices; vertices missing from it follow in
    /// lexicographic order.
    pub fn new<S: AsRef<str>>(
        vertex_order: &[S],
        edges: Vec<Edge>,
        branches: Vec<Option<usize>>,
    ) -> Result<Self> {
        let mut order: Vec<String> = vertex_order.iter().map(|s| s.as_ref().to_string()).collect();
        for e in &edges {
            for v in e {
                if !order.contains(v) {
                    order.push(v.clone());
                }
            }
        }
        order.retain(|v| edges.iter().any(|e| e.contains(v)));
        let seq = HypertreeSequence {
            order,
            edges,
            branches,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHypergraph(m));
        if self.edges.is_empty() || self.edges.len() != self.branches.len() {
            return bad("sequence needs one branch slot per hyperedge".into());
        }
        if self.edges.iter().any(|e| e.is_empty()) {
            return bad("empty hyperedge".into());
        }
        if self.branches[0].is_some() {
            return bad("the root has no branch".into());
        }
        for k in 1..self.edges.len() {
            let Some(b) = self.branches[k] else {
                return bad(format!("hyperedge {} lacks a branch", k + 1));
            };
            if b >= k {
                return bad(format!("branch of hyperedge {} does not precede it", k + 1));
            }
            let prefix = &self.edges[..=k];
            if prefix[..k].contains(&self.edges[k]) {
                return bad(format!("hyperedge {} repeats an earlier one", k + 1));
            }
            if !branches_within(prefix, &self.edges[k]).contains(&self.edges[b]) {
                return bad(format!(
                    "hyperedge {} is not a twig with branch {}",
                    k + 1,
                    b + 1
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    pub fn branch(&self, k: usize) -> Option<usize> {
        self.branches[k]
    }

    pub fn vertex_order(&self) -> &[String] {
        &self.order
    }

    fn ordered(&self, set: impl Fn(&String) -> bool) -> Vec<String> {
        self.order.iter().filter(|v| set(v)).cloned().collect()
    }

    /// `h_k ∩ h_{i_k}` in declaration order; empty for the root.
    pub fn separator(&self, k: usize) -> Vec<String> {
        match self.branches[k] {
            None => Vec::new(),
            Some(b) => self.ordered(|v| self.edges[k].contains(v) && self.edges[b].contains(v)),
        }
    }

    /// `h_k - h_{i_k}` in declaration order; all of `h_1` for the root.
    pub fn new_vertices(&self, k: usize) -> Vec<String> {
        match self.branches[k] {
            None => self.ordered(|v| self.edges[k].contains(v)),
            Some(b) => self.ordered(|v| self.edges[k].contains(v) && !self.edges[b].contains(v)),
        }
    }

    /// Vertices of `h_k` in declaration order.
    pub fn edge_vertices(&self, k: usize) -> Vec<String> {
        self.ordered(|v| self.edges[k].contains(v))
    }

    pub fn hypergraph(&self) -> Hypergraph {
        Hypergraph::from_parts(&self.order, self.edges.clone())
    }
}
