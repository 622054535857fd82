//! Directed belief networks: DAG structure, d-separation, compatibility with
//! hypergraphs, construction from hypertrees and local propagation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::frames::{EventSet, Frame, Variable};
use crate::hyper::{Edge, Hypergraph, HypertreeSequence};
use crate::mass::MassFunction;

/// Largest vertex count accepted by [`enumerate_compatible_dags`].
pub const MAX_ENUMERATION_VERTICES: usize = 8;

/// A directed acyclic graph over named nodes. Node order is the declaration
/// order; equality ignores it.
#[derive(Debug, Clone)]
pub struct Dag {
    nodes: Vec<String>,
    parents: BTreeMap<String, BTreeSet<String>>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.parents == other.parents
    }
}

impl Eq for Dag {}

impl Dag {
    pub fn new<S: AsRef<str>>(nodes: &[S], parents: &[(S, Vec<S>)]) -> Result<Self> {
        let nodes: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for n in &nodes {
            if map.insert(n.clone(), BTreeSet::new()).is_some() {
                return Err(Error::InvalidNetwork(format!("node `{n}` declared twice")));
            }
        }
        for (child, ps) in parents {
            let set = map
                .get_mut(child.as_ref())
                .ok_or_else(|| Error::UnknownNode(child.as_ref().to_string()))?;
            for p in ps {
                set.insert(p.as_ref().to_string());
            }
        }
        Dag::from_map(nodes, map)
    }

    /// From `(parent, child)` arcs.
    pub fn from_arcs<S: AsRef<str>>(nodes: &[S], arcs: &[(S, S)]) -> Result<Self> {
        let parents: Vec<(&str, Vec<&str>)> = nodes
            .iter()
            .map(|n| {
                let ps = arcs
                    .iter()
                    .filter(|(_, c)| c.as_ref() == n.as_ref())
                    .map(|(p, _)| p.as_ref())
                    .collect();
                (n.as_ref(), ps)
            })
            .collect();
        for (p, c) in arcs {
            for x in [p, c] {
                if !nodes.iter().any(|n| n.as_ref() == x.as_ref()) {
                    return Err(Error::UnknownNode(x.as_ref().to_string()));
                }
            }
        }
        let names: Vec<&str> = nodes.iter().map(AsRef::as_ref).collect();
        Dag::new(&names, &parents)
    }

    fn from_map(nodes: Vec<String>, parents: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        for (child, ps) in &parents {
            for p in ps {
                if !parents.contains_key(p) {
                    return Err(Error::UnknownNode(p.clone()));
                }
                if p == child {
                    return Err(Error::Cyclic(p.clone()));
                }
            }
        }
        let dag = Dag { nodes, parents };
        dag.topological_order()?;
        Ok(dag)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, node: &str) -> bool {
        self.parents.contains_key(node)
    }

    pub fn parents(&self, node: &str) -> Result<&BTreeSet<String>> {
        self.parents
            .get(node)
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    /// Parents of `node` in declaration order.
    pub fn ordered_parents(&self, node: &str) -> Result<Vec<String>> {
        let ps = self.parents(node)?;
        Ok(self.nodes.iter().filter(|n| ps.contains(*n)).cloned().collect())
    }

    pub fn children(&self, node: &str) -> Result<Vec<String>> {
        self.parents(node)?;
        Ok(self
            .nodes
            .iter()
            .filter(|c| self.parents[*c].contains(node))
            .cloned()
            .collect())
    }

    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        self.parents.get(to).is_some_and(|ps| ps.contains(from))
    }

    /// `(parent, child)` pairs, children in declaration order.
    pub fn arcs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for c in &self.nodes {
            for p in &self.nodes {
                if self.parents[c].contains(p) {
                    out.push((p.clone(), c.clone()));
                }
            }
        }
        out
    }

    /// Kahn's algorithm; ties broken by declaration order.
    pub fn topological_order(&self) -> Result<Vec<String>> {
        let mut indeg: BTreeMap<&str, usize> = self
            .parents
            .iter()
            .map(|(n, ps)| (n.as_str(), ps.len()))
            .collect();
        let mut out = Vec::with_capacity(self.nodes.len());
        while out.len() < self.nodes.len() {
            let next = self
                .nodes
                .iter()
                .find(|n| indeg.get(n.as_str()) == Some(&0))
                .cloned();
            let Some(n) = next else {
                let stuck = self
                    .nodes
                    .iter()
                    .find(|n| indeg.contains_key(n.as_str()))
                    .expect("some node remains");
                return Err(Error::Cyclic(stuck.clone()));
            };
            indeg.remove(n.as_str());
            for (c, ps) in &self.parents {
                if ps.contains(&n) {
                    if let Some(d) = indeg.get_mut(c.as_str()) {
                        *d -= 1;
                    }
                }
            }
            out.push(n);
        }
        Ok(out)
    }

    fn ancestors_of(&self, set: &BTreeSet<&str>) -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut stack: Vec<&str> = set.iter().copied().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n.to_string()) {
                stack.extend(self.parents[n].iter().map(String::as_str));
            }
        }
        seen
    }

    /// Whether `given` blocks every trail between `from` and `to`
    /// (reachability over trail directions).
    pub fn d_separated<S: AsRef<str>>(&self, from: &[S], to: &[S], given: &[S]) -> Result<bool> {
        let mut sets: Vec<BTreeSet<&str>> = Vec::new();
        for group in [from, to, given] {
            let mut s = BTreeSet::new();
            for n in group {
                let n = n.as_ref();
                if !self.contains(n) {
                    return Err(Error::UnknownNode(n.to_string()));
                }
                s.insert(n);
            }
            sets.push(s);
        }
        let (j, k, l) = (&sets[0], &sets[1], &sets[2]);
        if !j.is_disjoint(k) || !j.is_disjoint(l) || !k.is_disjoint(l) {
            return Err(Error::InvalidArgument(
                "separation sets must be disjoint".into(),
            ));
        }
        let evidence_anc = self.ancestors_of(l);
        let children: BTreeMap<&str, Vec<String>> = self
            .nodes
            .iter()
            .map(|n| (n.as_str(), self.children(n).expect("known node")))
            .collect();
        // `true` = arrived from a child (moving up), `false` = from a parent.
        let mut queue: VecDeque<(String, bool)> = j.iter().map(|n| (n.to_string(), true)).collect();
        let mut visited: BTreeSet<(String, bool)> = BTreeSet::new();
        while let Some((y, up)) = queue.pop_front() {
            if !visited.insert((y.clone(), up)) {
                continue;
            }
            let observed = l.contains(y.as_str());
            if !observed && k.contains(y.as_str()) {
                return Ok(false);
            }
            if up && !observed {
                for p in &self.parents[&y] {
                    queue.push_back((p.clone(), true));
                }
                for c in &children[y.as_str()] {
                    queue.push_back((c.clone(), false));
                }
            } else if !up {
                if !observed {
                    for c in &children[y.as_str()] {
                        queue.push_back((c.clone(), false));
                    }
                }
                if evidence_anc.contains(&y) {
                    for p in &self.parents[&y] {
                        queue.push_back((p.clone(), true));
                    }
                }
            }
        }
        Ok(true)
    }

    /// One hyperedge `{X} ∪ parents(X)` per node.
    pub fn induced_hypergraph(&self) -> Hypergraph {
        let edges = self
            .nodes
            .iter()
            .map(|n| {
                let mut e: Edge = self.parents[n].clone();
                e.insert(n.clone());
                e
            })
            .collect();
        Hypergraph::from_parts(&self.nodes, edges)
    }

    /// Whether the reduced induced hypergraph equals the reduced `h`.
    pub fn compatible(&self, h: &Hypergraph) -> bool {
        self.induced_hypergraph().reduce() == h.reduce()
    }
}

/// All DAGs whose reduced induced hypergraph equals `reduce(h)`, in a
/// deterministic order. Fails once more than `limit` are found.
///
/// Each node's family must fit inside one maximal hyperedge, so candidate
/// parent sets are enumerated per node and combined by backtracking with
/// cycle and coverage pruning.
pub fn enumerate_compatible_dags(h: &Hypergraph, limit: usize) -> Result<Vec<Dag>> {
    let reduced = h.reduce();
    let nodes: Vec<String> = reduced.vertices().to_vec();
    if nodes.len() > MAX_ENUMERATION_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "enumeration supports at most {MAX_ENUMERATION_VERTICES} vertices"
        )));
    }
    let n = nodes.len();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let edge_masks: Vec<u32> = reduced
        .edges()
        .iter()
        .map(|e| e.iter().map(|v| 1u32 << index[v.as_str()]).sum())
        .collect();

    let mut candidates: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cands: BTreeSet<(u32, u32)> = BTreeSet::new();
        for &e in edge_masks.iter().filter(|&&e| e >> i & 1 == 1) {
            let rest = e & !(1 << i);
            let mut sub = rest;
            loop {
                cands.insert((sub.count_ones(), sub.reverse_bits()));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        candidates.push(cands.into_iter().map(|(_, r)| r.reverse_bits()).collect());
    }

    struct Search<'a> {
        n: usize,
        candidates: &'a [Vec<u32>],
        edge_masks: &'a [u32],
        parents: Vec<u32>,
        found: Vec<Vec<u32>>,
        limit: usize,
    }

    impl Search<'_> {
        fn reaches(&self, from: usize, target: usize) -> bool {
            // Whether `target` is an ancestor of `from` among assigned nodes.
            let mut stack = vec![from];
            let mut seen = 0u32;
            while let Some(x) = stack.pop() {
                if x == target {
                    return true;
                }
                if seen >> x & 1 == 1 {
                    continue;
                }
                seen |= 1 << x;
                let mut ps = self.parents[x];
                while ps != 0 {
                    stack.push(ps.trailing_zeros() as usize);
                    ps &= ps - 1;
                }
            }
            false
        }

        fn go(&mut self, i: usize) -> Result<()> {
            if i == self.n {
                self.found.push(self.parents.clone());
                if self.found.len() > self.limit {
                    return Err(Error::LimitExceeded(self.limit));
                }
                return Ok(());
            }
            for c in 0..self.candidates[i].len() {
                let ps = self.candidates[i][c];
                self.parents[i] = ps;
                let mut bits = ps;
                let mut acyclic = true;
                while bits != 0 {
                    let p = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if self.reaches(p, i) {
                        acyclic = false;
                        break;
                    }
                }
                if acyclic && self.covered_so_far(i) {
                    self.go(i + 1)?;
                }
            }
            self.parents[i] = 0;
            Ok(())
        }

        fn covered_so_far(&self, last: usize) -> bool {
            let assigned = if last + 1 >= 32 { u32::MAX } else { (1u32 << (last + 1)) - 1 };
            self.edge_masks.iter().all(|&e| {
                e & !assigned != 0
                    || (0..=last).any(|x| e >> x & 1 == 1 && self.parents[x] | 1 << x == e)
            })
        }
    }

    let mut search = Search {
        n,
        candidates: &candidates,
        edge_masks: &edge_masks,
        parents: vec![0; n],
        found: Vec::new(),
        limit,
    };
    search.go(0)?;

    search
        .found
        .into_iter()
        .map(|ps| {
            let map = (0..n)
                .map(|i| {
                    let set = (0..n)
                        .filter(|&p| ps[i] >> p & 1 == 1)
                        .map(|p| nodes[p].clone())
                        .collect();
                    (nodes[i].clone(), set)
                })
                .collect();
            Dag::from_map(nodes.clone(), map)
        })
        .collect()
}

/// Builds the network structure of a hypertree: for each hyperedge the
/// vertices new relative to its branch form a complete DAG in declaration
/// order, and every separator vertex points to each of them.
pub fn hypertree_to_dag(seq: &HypertreeSequence) -> Result<Dag> {
    seq.validate()?;
    let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for k in 0..seq.len() {
        let sep = seq.separator(k);
        let fresh = seq.new_vertices(k);
        for (i, x) in fresh.iter().enumerate() {
            let ps: BTreeSet<String> = sep.iter().chain(&fresh[..i]).cloned().collect();
            assert!(
                parents.insert(x.clone(), ps).is_none(),
                "vertex `{x}` introduced by two hyperedges"
            );
        }
    }
    Dag::from_map(seq.vertex_order().to_vec(), parents)
}

fn same_vars(m: &MassFunction, vars: &Edge) -> bool {
    m.frame().arity() == vars.len() && m.frame().names().all(|n| vars.contains(n))
}

fn names_of(m: &MassFunction) -> Vec<String> {
    m.frame().names().map(String::from).collect()
}

/// Rewrites a factorization over a hypertree into conditionals: result `k`
/// lives on hyperedge `k`, is anti-conditioned on the separator towards its
/// branch, and the combination of all results equals that of `vals`.
pub fn reassign_valuations(
    seq: &HypertreeSequence,
    vals: &[MassFunction],
) -> Result<Vec<MassFunction>> {
    seq.validate()?;
    if vals.len() != seq.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} valuations, got {}",
            seq.len(),
            vals.len()
        )));
    }
    for (k, v) in vals.iter().enumerate() {
        if !same_vars(v, seq.edge(k)) {
            return Err(Error::at_edge(k + 1)(Error::VariableMismatch {
                vars: names_of(v),
            }));
        }
    }
    let mut cur: Vec<MassFunction> = vals.to_vec();
    let mut out: Vec<Option<MassFunction>> = vec![None; vals.len()];
    for k in (1..seq.len()).rev() {
        let mut step = || -> Result<()> {
            let hk = seq.edge(k);
            let branch = seq.branch(k).expect("non-root has a branch");
            let mut joined = cur[k].clone();
            let mut sent: Vec<(usize, MassFunction)> = Vec::new();
            for (j, val) in cur.iter().enumerate().take(k) {
                let inter: Vec<String> = names_of(val)
                    .into_iter()
                    .filter(|v| hk.contains(v))
                    .collect();
                if inter.is_empty() {
                    continue;
                }
                let msg = val.marginalize(&inter)?;
                joined = joined.combine(&msg)?;
                sent.push((j, msg));
            }
            for (j, msg) in sent {
                let ext = msg.vacuous_extend(cur[j].frame())?;
                cur[j] = cur[j].decombine(&ext)?;
            }
            let sep = seq.separator(k);
            if sep.len() == hk.len() {
                cur[branch] = cur[branch].combine(&joined)?;
                out[k] = Some(MassFunction::vacuous(joined.frame()).with_tolerance(joined.tolerance()));
            } else if sep.is_empty() {
                out[k] = Some(joined);
            } else {
                let up = joined.marginalize(&sep)?;
                out[k] = Some(joined.anti_condition(&sep)?);
                cur[branch] = cur[branch].combine(&up)?.extend_to(cur[branch].frame())?;
            }
            Ok(())
        };
        step().map_err(Error::at_edge(k + 1))?;
    }
    out[0] = Some(cur[0].clone());
    Ok(out.into_iter().map(|m| m.expect("every edge assigned")).collect())
}

/// Splits a conditional on `head ∪ tail` into one factor per head variable:
/// the first is the marginal on `tail ∪ {head_1}`, factor `j` is the marginal
/// on `tail ∪ head_1..head_j` anti-conditioned on `tail ∪ head_1..head_{j-1}`.
pub fn split_conditional<S: AsRef<str>>(
    bel: &MassFunction,
    head: &[S],
    tail: &[S],
) -> Result<Vec<MassFunction>> {
    if head.is_empty() {
        return Err(Error::InvalidArgument("head must not be empty".into()));
    }
    let mut all: Vec<String> = tail.iter().map(|s| s.as_ref().to_string()).collect();
    let head: Vec<String> = head.iter().map(|s| s.as_ref().to_string()).collect();
    let vars: Edge = all.iter().chain(&head).cloned().collect();
    if vars.len() != all.len() + head.len() || !same_vars(bel, &vars) {
        return Err(Error::VariableMismatch { vars: names_of(bel) });
    }
    if head.len() == 1 {
        return Ok(vec![bel.clone()]);
    }
    let mut out = Vec::with_capacity(head.len());
    for (j, x) in head.iter().enumerate() {
        let prev = all.clone();
        all.push(x.clone());
        let marginal = bel.marginalize(&all)?;
        out.push(if j == 0 {
            marginal
        } else {
            marginal.anti_condition(&prev)?
        });
    }
    Ok(out)
}

/// A DAG with one conditional valuation per node over `{X} ∪ parents(X)`.
#[derive(Debug, Clone)]
pub struct BeliefNetwork {
    dag: Dag,
    valuations: BTreeMap<String, MassFunction>,
    variables: BTreeMap<String, Variable>,
}

impl BeliefNetwork {
    pub fn new(dag: Dag, valuations: BTreeMap<String, MassFunction>) -> Result<Self> {
        let mut variables: BTreeMap<String, Variable> = BTreeMap::new();
        for node in dag.nodes() {
            let val = valuations
                .get(node)
                .ok_or_else(|| Error::InvalidNetwork(format!("node `{node}` has no valuation")))?;
            let mut family = dag.parents(node)?.clone();
            family.insert(node.clone());
            if !same_vars(val, &family) {
                return Err(Error::InvalidNetwork(format!(
                    "valuation of `{node}` is over {:?}, expected {:?}",
                    names_of(val),
                    family
                )));
            }
            for v in val.frame().variables() {
                match variables.get(v.name()) {
                    Some(w) if w != v => return Err(Error::DomainConflict(v.name().to_string())),
                    Some(_) => {}
                    None => {
                        variables.insert(v.name().to_string(), v.clone());
                    }
                }
            }
        }
        if let Some(extra) = valuations.keys().find(|k| !dag.contains(k)) {
            return Err(Error::UnknownNode(extra.clone()));
        }
        Ok(BeliefNetwork {
            dag,
            valuations,
            variables,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn valuation(&self, node: &str) -> Result<&MassFunction> {
        self.valuations
            .get(node)
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.variables
            .get(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Frame over all network variables in declaration order.
    pub fn frame(&self) -> Result<Frame> {
        self.frame_over(self.dag.nodes())
    }

    fn frame_over<S: AsRef<str>>(&self, names: &[S]) -> Result<Frame> {
        let vars = names
            .iter()
            .map(|n| self.variable(n.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        Frame::new(vars)
    }

    pub fn induced_hypergraph(&self) -> Hypergraph {
        self.dag.induced_hypergraph()
    }

    /// Combination of all valuations on the full frame.
    pub fn joint(&self) -> Result<MassFunction> {
        let frame = self.frame()?;
        let first = self.valuation(&self.dag.nodes()[0])?;
        let mut acc = MassFunction::vacuous(&frame).with_tolerance(first.tolerance());
        for node in self.dag.nodes() {
            acc = acc.combine(&self.valuations[node])?;
        }
        Ok(acc)
    }
}

pub fn network_joint(net: &BeliefNetwork) -> Result<MassFunction> {
    net.joint()
}

/// Builds a belief network from a hypertree factorization: structure from
/// [`hypertree_to_dag`], conditionals from [`reassign_valuations`] split per
/// node with [`split_conditional`].
pub fn network_from_hypertree(
    seq: &HypertreeSequence,
    vals: &[MassFunction],
) -> Result<BeliefNetwork> {
    let dag = hypertree_to_dag(seq)?;
    let conditionals = reassign_valuations(seq, vals)?;
    let mut valuations = BTreeMap::new();
    for (k, bel) in conditionals.iter().enumerate() {
        let head = seq.new_vertices(k);
        if head.is_empty() {
            continue;
        }
        let factors =
            split_conditional(bel, &head, &seq.separator(k)).map_err(Error::at_edge(k + 1))?;
        for (x, f) in head.into_iter().zip(factors) {
            valuations.insert(x, f);
        }
    }
    BeliefNetwork::new(dag, valuations)
}

/// One connected part of a propagation plan, as a rooted join tree.
#[derive(Debug, Clone)]
struct Part {
    edges: Vec<usize>,
    parent: Vec<Option<usize>>,
}

/// Where each potential goes and in which order messages flow.
#[derive(Debug, Clone)]
pub struct PropagationPlan {
    cover: Hypergraph,
    parts: Vec<Part>,
    query: String,
}

impl PropagationPlan {
    /// Covers the induced hypergraph plus the evidence scopes and the query
    /// variable by a hypertree per connected component. The root of the
    /// component holding the query is an edge containing it.
    pub fn new<S: AsRef<str>>(net: &BeliefNetwork, scopes: &[Vec<S>], query: &str) -> Result<Self> {
        net.variable(query)?;
        let mut edges: Vec<Vec<String>> = net
            .induced_hypergraph()
            .edges()
            .iter()
            .map(|e| e.iter().cloned().collect())
            .collect();
        for s in scopes {
            let s: Vec<String> = s.iter().map(|v| v.as_ref().to_string()).collect();
            for v in &s {
                net.variable(v)?;
            }
            if !s.is_empty() {
                edges.push(s);
            }
        }
        edges.push(vec![query.to_string()]);
        let base = Hypergraph::new(edges)?;
        let base = Hypergraph::from_parts(net.dag().nodes(), base.edges().to_vec());
        let cover = base.hypertree_cover();

        let mut parts = Vec::new();
        for comp in cover.components() {
            let seq = comp.hypertree_sequence().ok_or(Error::NotAHypertree)?;
            let global: Vec<usize> = seq
                .edges()
                .iter()
                .map(|e| cover.edges().iter().position(|c| c == e).expect("cover edge"))
                .collect();
            let root = (0..seq.len())
                .find(|&k| seq.edge(k).contains(query))
                .unwrap_or(0);
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); seq.len()];
            for k in 1..seq.len() {
                let b = seq.branch(k).expect("branch");
                adj[k].push(b);
                adj[b].push(k);
            }
            // Breadth-first from the root; reversed, this is a valid inward order.
            let mut order = vec![root];
            let mut parent = vec![None; seq.len()];
            let mut seen = vec![false; seq.len()];
            seen[root] = true;
            let mut i = 0;
            while i < order.len() {
                let u = order[i];
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        order.push(w);
                    }
                }
                i += 1;
            }
            parts.push(Part {
                edges: order.iter().map(|&k| global[k]).collect(),
                parent: order
                    .iter()
                    .map(|&k| parent[k].map(|p| order.iter().position(|&o| o == p).unwrap()))
                    .collect(),
            });
        }
        Ok(PropagationPlan {
            cover,
            parts,
            query: query.to_string(),
        })
    }

    pub fn cover(&self) -> &Hypergraph {
        &self.cover
    }

    fn home(&self, vars: &BTreeSet<String>) -> usize {
        self.cover
            .edges()
            .iter()
            .position(|e| vars.is_subset(e))
            .expect("cover contains every scope")
    }

    /// Inward message passing. Returns the query marginal of the joint
    /// conditioned on all evidence.
    pub fn run(&self, net: &BeliefNetwork, evidence: &[EventSet]) -> Result<MassFunction> {
        let tol = net.valuation(&net.dag().nodes()[0])?.tolerance();
        let mut pots: Vec<MassFunction> = self
            .cover
            .edges()
            .iter()
            .map(|e| {
                let names: Vec<&String> = self.cover.vertices().iter().filter(|v| e.contains(*v)).collect();
                Ok(MassFunction::vacuous(&net.frame_over(&names)?).with_tolerance(tol))
            })
            .collect::<Result<_>>()?;
        for node in net.dag().nodes() {
            let val = net.valuation(node)?;
            let h = self.home(&val.frame().names().map(String::from).collect());
            pots[h] = pots[h].combine(val)?;
        }
        for ev in evidence {
            let scope: BTreeSet<String> = ev.frame().names().map(String::from).collect();
            for v in ev.frame().variables() {
                if net.variable(v.name())? != v {
                    return Err(Error::DomainConflict(v.name().to_string()));
                }
            }
            if scope.is_empty() {
                continue;
            }
            let h = self.home(&scope);
            pots[h] = pots[h].combine(&MassFunction::indicator(ev)?)?;
        }

        let mut answer = None;
        for part in &self.parts {
            let mut mailbox: Vec<Option<MassFunction>> = vec![None; part.edges.len()];
            for i in (0..part.edges.len()).rev() {
                let mut local = pots[part.edges[i]].clone();
                if let Some(msg) = mailbox[i].take() {
                    local = local.combine(&msg)?;
                }
                match part.parent[i] {
                    Some(p) => {
                        let target = &self.cover.edges()[part.edges[p]];
                        let sep: Vec<String> =
                            names_of(&local).into_iter().filter(|v| target.contains(v)).collect();
                        let msg = local.marginalize(&sep)?;
                        mailbox[p] = Some(match mailbox[p].take() {
                            Some(prev) => prev.combine(&msg)?,
                            None => msg,
                        });
                    }
                    None => {
                        if local.frame().contains(&self.query) {
                            answer = Some(local.marginalize(&[self.query.as_str()])?);
                        }
                    }
                }
            }
        }
        answer.ok_or_else(|| Error::UnknownVariable(self.query.clone()))
    }
}

/// Marginal of `query` in the network joint conditioned on every evidence
/// set, computed by local message passing without forming the joint.
pub fn propagate_marginal(
    net: &BeliefNetwork,
    evidence: &[EventSet],
    query: &str,
) -> Result<MassFunction> {
    let scopes: Vec<Vec<String>> = evidence
        .iter()
        .map(|e| e.frame().names().map(String::from).collect())
        .collect();
    PropagationPlan::new(net, &scopes, query)?.run(net, evidence)
}
