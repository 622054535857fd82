//! Seeded generators for randomized checks and reproductions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::frames::{EventSet, Frame, Variable};
use crate::hyper::{Edge, HypertreeSequence};
use crate::mass::{MassFunction, Tolerance};
use crate::network::{BeliefNetwork, Dag};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// A binary variable `N = {n1, n2}`.
pub fn binary(name: &str) -> Variable {
    Variable::indexed(name, &name.to_lowercase(), 2).expect("valid binary variable")
}

pub fn binary_frame<S: AsRef<str>>(names: &[S]) -> Frame {
    Frame::new(names.iter().map(|n| binary(n.as_ref()))).expect("small frame")
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn random_nonempty_subset<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// A proper mass function with up to `max_focal` random focal sets; when
/// `with_universe` holds the full frame is one of them, which keeps every
/// commonality positive.
pub fn proper_mass<R: Rng>(
    rng: &mut R,
    frame: &Frame,
    max_focal: usize,
    with_universe: bool,
) -> MassFunction {
    let count = rng.gen_range(1..=max_focal.max(1));
    let mut sets = Vec::with_capacity(count + 1);
    if with_universe {
        sets.push(frame.full_set());
    }
    while sets.len() < count + usize::from(with_universe) {
        sets.push(EventSet::from_indices(frame, random_nonempty_subset(rng, frame.size())));
    }
    let weights = normalized(sets.iter().map(|_| rng.gen_range(0.05..1.0)).collect());
    MassFunction::new(frame, sets.into_iter().zip(weights), Tolerance::default())
        .expect("normalized weights")
}

pub fn bayesian<R: Rng>(rng: &mut R, frame: &Frame) -> MassFunction {
    let probs = normalized((0..frame.size()).map(|_| rng.gen_range(0.01..1.0)).collect());
    MassFunction::bayesian(frame, &probs).expect("normalized probabilities")
}

/// A conditional for `child` given the remaining variables of `frame`: each
/// focal set picks, for every parent configuration, a non-empty set of child
/// values, so every focal set projects onto the whole parent frame.
pub fn cano_conditional<R: Rng>(
    rng: &mut R,
    frame: &Frame,
    child: &str,
    max_focal: usize,
) -> MassFunction {
    let child_pos = frame.position(child).expect("child in frame");
    let card = frame.variables()[child_pos].card();
    let parent_of = |i: usize| {
        let mut c = frame.config(i).0;
        c[child_pos] = 0;
        c
    };
    let mut parent_configs: Vec<Vec<usize>> = (0..frame.size()).map(parent_of).collect();
    parent_configs.sort();
    parent_configs.dedup();
    let count = rng.gen_range(1..=max_focal.max(1));
    let mut sets = Vec::with_capacity(count);
    for _ in 0..count {
        let picks: Vec<Vec<usize>> = parent_configs
            .iter()
            .map(|_| random_nonempty_subset(rng, card))
            .collect();
        let members = (0..frame.size()).filter(|&i| {
            let c = frame.config(i).0;
            let p = parent_configs.binary_search(&parent_of(i)).expect("known");
            picks[p].contains(&c[child_pos])
        });
        sets.push(EventSet::from_indices(frame, members));
    }
    let weights = normalized(sets.iter().map(|_| rng.gen_range(0.05..1.0)).collect());
    MassFunction::new(frame, sets.into_iter().zip(weights), Tolerance::default())
        .expect("normalized weights")
}

/// A random network over `2..=max_vars` binary variables: roots get proper
/// masses, other nodes conditionals from [`cano_conditional`].
pub fn network<R: Rng>(rng: &mut R, max_vars: usize) -> Result<BeliefNetwork> {
    let n = rng.gen_range(2..=max_vars.clamp(2, NAMES.len()));
    let names = &NAMES[..n];
    let mut parents: Vec<(&str, Vec<&str>)> = Vec::new();
    for (i, x) in names.iter().enumerate() {
        let ps: Vec<&str> = names[..i].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        parents.push((x, ps));
    }
    let dag = Dag::new(names, &parents)?;
    let mut vals = BTreeMap::new();
    for (x, ps) in &parents {
        let mass = if ps.is_empty() {
            proper_mass(rng, &binary_frame(&[*x]), 3, false)
        } else {
            let mut fam = vec![*x];
            fam.extend(ps);
            cano_conditional(rng, &binary_frame(&fam), x, 3)
        };
        vals.insert(x.to_string(), mass);
    }
    BeliefNetwork::new(dag, vals)
}

/// A random connected reduced hypertree over at most `max_vertices` vertices,
/// at most `max_edges` hyperedges of at most `max_edge_size` vertices each.
pub fn hypertree<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
    max_edge_size: usize,
) -> HypertreeSequence {
    let max_vertices = max_vertices.clamp(1, NAMES.len());
    let max_edge_size = max_edge_size.max(2);
    let mut next = 0usize;
    let fresh = |k: usize, next: &mut usize| -> Vec<String> {
        let out = (*next..*next + k).map(|i| NAMES[i].to_string()).collect();
        *next += k;
        out
    };
    let first = rng.gen_range(1..=max_edge_size.min(max_vertices));
    let mut edges: Vec<Edge> = vec![fresh(first, &mut next).into_iter().collect()];
    let mut branches = vec![None];
    let target = rng.gen_range(1..=max_edges.max(1));
    while edges.len() < target && next < max_vertices {
        let eligible: Vec<usize> = (0..edges.len()).filter(|&k| edges[k].len() >= 2).collect();
        let Some(&b) = eligible.choose(rng) else { break };
        let members: Vec<&String> = edges[b].iter().collect();
        let sep_size = rng.gen_range(1..=(members.len() - 1).min(max_edge_size - 1));
        let sep: Vec<String> = members
            .choose_multiple(rng, sep_size)
            .map(|s| s.to_string())
            .collect();
        let room = (max_edge_size - sep.len()).min(max_vertices - next);
        let k = rng.gen_range(1..=room);
        let mut e: Edge = sep.into_iter().collect();
        e.extend(fresh(k, &mut next));
        edges.push(e);
        branches.push(Some(b));
    }
    HypertreeSequence::new(&NAMES[..next], edges, branches).expect("construction yields twigs")
}

/// One proper valuation per hyperedge, each with the full frame focal.
pub fn hypertree_valuations<R: Rng>(rng: &mut R, seq: &HypertreeSequence) -> Vec<MassFunction> {
    (0..seq.len())
        .map(|k| proper_mass(rng, &binary_frame(&seq.edge_vertices(k)), 4, true))
        .collect()
}

/// A non-empty random event over one or two randomly chosen variables of
/// `frame`.
pub fn evidence<R: Rng>(rng: &mut R, frame: &Frame) -> EventSet {
    let names: Vec<&str> = frame.names().collect();
    let k = rng.gen_range(1..=names.len().min(2));
    let mut chosen: Vec<&str> = names.choose_multiple(rng, k).copied().collect();
    chosen.sort_by_key(|n| frame.position(n));
    let sub = frame.sub_frame(&chosen).expect("known variables");
    let members = loop {
        let s = random_nonempty_subset(rng, sub.size());
        if s.len() < sub.size() || sub.size() == 1 {
            break s;
        }
    };
    EventSet::from_indices(&sub, members)
}
