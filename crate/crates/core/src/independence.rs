//! Independence predicates for belief functions.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::frames::{EventSet, Frame};
use crate::mass::{MassFunction, Tolerance};
use crate::network::Dag;
use crate::transforms::{inv_superset_sums, superset_sums};

/// `I(J, K | L)` over variable names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceStatement {
    j: Vec<String>,
    k: Vec<String>,
    l: Vec<String>,
}

impl IndependenceStatement {
    pub fn new<S: AsRef<str>>(j: &[S], k: &[S], l: &[S]) -> Result<Self> {
        let own = |xs: &[S]| xs.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
        let (j, k, l) = (own(j), own(k), own(l));
        if j.is_empty() || k.is_empty() {
            return Err(Error::InvalidArgument("J and K must be non-empty".into()));
        }
        let mut seen = BTreeSet::new();
        for v in j.iter().chain(&k).chain(&l) {
            if !seen.insert(v) {
                return Err(Error::InvalidArgument(format!(
                    "`{v}` appears twice in the statement"
                )));
            }
        }
        Ok(IndependenceStatement { j, k, l })
    }

    pub fn j(&self) -> &[String] {
        &self.j
    }

    pub fn k(&self) -> &[String] {
        &self.k
    }

    pub fn l(&self) -> &[String] {
        &self.l
    }
}

fn joined(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// Conditional independence through anti-conditioning:
/// `bel↓JKL|L ⊕ bel↓L` against `bel↓JL|L ⊕ bel↓KL|L ⊕ bel↓L`, compared by
/// the largest mass difference. Anti-conditioning failures are errors.
pub fn ci_mte(bel: &MassFunction, s: &IndependenceStatement, tol: Tolerance) -> Result<bool> {
    let l = s.l();
    let conditional = |vars: Vec<String>| -> Result<MassFunction> {
        bel.marginalize(&vars)?.anti_condition(l)
    };
    let mut lhs = conditional(joined(&[s.j(), s.k(), l]))?;
    let mut rhs = conditional(joined(&[s.j(), l]))?.combine(&conditional(joined(&[s.k(), l]))?)?;
    if !l.is_empty() {
        let base = bel.marginalize(l)?;
        lhs = lhs.combine(&base)?;
        rhs = rhs.combine(&base)?;
    }
    Ok(lhs.max_abs_diff(&rhs)? <= tol.value())
}

/// Conditional belief of the transferable belief model:
/// `bel(B ∪ not A) - bel(not A)`.
pub fn smets_cond_bel(m: &MassFunction, b: &EventSet, a: &EventSet) -> Result<f64> {
    if b.frame() != m.frame() || a.frame() != m.frame() {
        return Err(Error::FrameMismatch);
    }
    let not_a = a.complement();
    Ok(m.bel(&b.union(&not_a)?)? - m.bel(&not_a)?)
}

fn cylinder_sets(frame: &Frame, var: &str) -> Result<Vec<EventSet>> {
    let v = frame.variable(var).ok_or_else(|| Error::UnknownVariable(var.into()))?;
    v.labels().iter().map(|l| frame.cylinder(var, l)).collect()
}

/// All cylinders over subsets of `var`'s domain, the empty one included.
fn subset_cylinders(frame: &Frame, var: &str) -> Result<Vec<EventSet>> {
    let singles = cylinder_sets(frame, var)?;
    let mut out = Vec::with_capacity(1 << singles.len());
    for mask in 0usize..1 << singles.len() {
        let mut set = frame.empty_set();
        for (i, c) in singles.iter().enumerate() {
            if mask >> i & 1 == 1 {
                set = set.union(c)?;
            }
        }
        out.push(set);
    }
    Ok(out)
}

/// Cognitive independence over a two-variable frame: conditional beliefs on
/// either variable do not depend on which value of the other is observed.
pub fn smets_cognitive_independent(m: &MassFunction, tol: Tolerance) -> Result<bool> {
    let frame = m.frame();
    if frame.arity() != 2 {
        return Err(Error::InvalidArgument(
            "cognitive independence needs exactly two variables".into(),
        ));
    }
    let names: Vec<String> = frame.names().map(String::from).collect();
    for (target, given) in [(&names[0], &names[1]), (&names[1], &names[0])] {
        let givens = cylinder_sets(frame, given)?;
        for a in subset_cylinders(frame, target)? {
            let first = smets_cond_bel(m, &a, &givens[0])?;
            for g in &givens[1..] {
                if (smets_cond_bel(m, &a, g)? - first).abs() > tol.value() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn bayesian_table(m: &MassFunction) -> Result<Vec<f64>> {
    if !m.is_bayesian() {
        return Err(Error::Unsupported(
            "only bayesian mass functions are supported".into(),
        ));
    }
    let mut p = vec![0.0; m.frame().size()];
    for (set, v) in m.focal_elements() {
        p[set.indices().next().expect("singleton")] = v;
    }
    Ok(p)
}

/// Conditional independence of the second and third variable given the
/// first, for bayesian mass functions: every
/// `m(t,x,y) = (sum over y' of m(t,x,y')) * (sum over x' of m(t,x',y))`.
pub fn smets_conditionally_independent(m: &MassFunction, tol: Tolerance) -> Result<bool> {
    let frame = m.frame();
    if frame.arity() != 3 {
        return Err(Error::InvalidArgument(
            "conditional independence needs exactly three variables".into(),
        ));
    }
    let p = bayesian_table(m)?;
    let cards: Vec<usize> = frame.variables().iter().map(|v| v.card()).collect();
    let (nt, nx, ny) = (cards[0], cards[1], cards[2]);
    let at = |t: usize, x: usize, y: usize| p[(t * nx + x) * ny + y];
    for t in 0..nt {
        for x in 0..nx {
            for y in 0..ny {
                let row: f64 = (0..ny).map(|y2| at(t, x, y2)).sum();
                let col: f64 = (0..nx).map(|x2| at(t, x2, y)).sum();
                if (at(t, x, y) - row * col).abs() > tol.value() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Belief in the first value of the first variable.
pub fn first_value_belief(m: &MassFunction) -> Result<f64> {
    let frame = m.frame();
    let var = frame.variables().first().ok_or(Error::InvalidArgument("empty frame".into()))?;
    m.bel(&frame.cylinder(var.name(), &var.labels()[0])?)
}

/// Whether the marginal of `m` on `h` is vacuous.
pub fn cano_is_apriori_conditional<S: AsRef<str>>(
    m: &MassFunction,
    h: &[S],
    tol: Tolerance,
) -> Result<bool> {
    Ok(m.marginalize(h)?.is_vacuous(tol))
}

/// Outcome of the structured factorization attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanoVerdict {
    Factorable,
    /// The canonical candidates fail; a grid search was not run or found
    /// near-solutions for every node.
    CanonicalFails,
    /// The canonical candidates fail and the grid search found no candidate
    /// within resolution for at least one node.
    GridExhaustedFails,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanoNodeReport {
    pub node: String,
    pub parents: Vec<String>,
    pub decombined: bool,
    pub proper: bool,
    pub apriori: bool,
    pub note: Option<String>,
}

impl CanoNodeReport {
    pub fn passes(&self) -> bool {
        self.decombined && self.proper && self.apriori
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub resolution: f64,
    /// Smallest mass error of `parent marginal ⊕ candidate` against the
    /// family marginal, per non-root node.
    pub best_error: Vec<(String, f64)>,
    pub points_per_node: Vec<(String, usize)>,
}

impl GridReport {
    pub fn exhausted(&self) -> bool {
        self.best_error.iter().any(|(_, e)| *e > self.resolution)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanoReport {
    pub nodes: Vec<CanoNodeReport>,
    pub recombines: bool,
    pub recombination_error: Option<f64>,
    pub grid: Option<GridReport>,
    pub verdict: CanoVerdict,
}

impl CanoReport {
    pub fn is_factorable(&self) -> bool {
        self.verdict == CanoVerdict::Factorable
    }
}

pub const GRID_RESOLUTION: f64 = 0.05;

/// Tries to write `m12` as a combination of a-priori conditionals along
/// `dag`: each candidate is the family marginal anti-conditioned on the
/// parents, then re-expressed with one child slice per parent configuration
/// so that its parent marginal can be vacuous.
pub fn cano_factorable(m12: &MassFunction, dag: &Dag, tol: Tolerance) -> Result<CanoReport> {
    let frame = m12.frame();
    let nodes: BTreeSet<&str> = dag.nodes().iter().map(String::as_str).collect();
    let vars: BTreeSet<&str> = frame.names().collect();
    if nodes != vars {
        return Err(Error::VariableMismatch {
            vars: frame.names().map(String::from).collect(),
        });
    }
    let mut reports = Vec::new();
    let mut candidates = Vec::new();
    for node in dag.topological_order()? {
        let parents = dag.ordered_parents(&node)?;
        let (report, cand) = canonical_candidate(m12, &node, &parents, tol);
        reports.push(report);
        candidates.push(cand);
    }

    let mut recombination_error = None;
    if candidates.iter().all(Option::is_some) {
        let mut acc = MassFunction::vacuous(frame).with_tolerance(m12.tolerance());
        let mut ok = true;
        for c in candidates.iter().flatten() {
            match acc.combine(c) {
                Ok(next) => acc = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            recombination_error = Some(acc.max_abs_diff(m12)?);
        }
    }
    let recombines = recombination_error.is_some_and(|e| e <= tol.value());
    let canonical_ok = recombines && reports.iter().all(CanoNodeReport::passes);

    let (grid, verdict) = if canonical_ok {
        (None, CanoVerdict::Factorable)
    } else {
        let grid = grid_search(m12, dag)?;
        let verdict = match &grid {
            Some(g) if g.exhausted() => CanoVerdict::GridExhaustedFails,
            _ => CanoVerdict::CanonicalFails,
        };
        (grid, verdict)
    };
    Ok(CanoReport {
        nodes: reports,
        recombines,
        recombination_error,
        grid,
        verdict,
    })
}

fn family(frame: &Frame, node: &str, parents: &[String]) -> Vec<String> {
    frame
        .names()
        .filter(|n| *n == node || parents.iter().any(|p| p == n))
        .map(String::from)
        .collect()
}

/// Per configuration of the family frame: (parent configuration index,
/// child value index).
fn split_indices(fam: &Frame, node: &str, parents: &[String]) -> Result<(Frame, Vec<(usize, usize)>)> {
    let pframe = fam.sub_frame(parents)?;
    let child_pos = fam.position(node).expect("child in family");
    let ppos: Vec<usize> = pframe.names().map(|n| fam.position(n).expect("parent")).collect();
    let map = (0..fam.size())
        .map(|i| {
            let c = fam.config(i);
            let pc = crate::frames::Config(ppos.iter().map(|&k| c.0[k]).collect());
            (pframe.index_of(&pc), c.0[child_pos])
        })
        .collect();
    Ok((pframe, map))
}

fn canonical_candidate(
    m12: &MassFunction,
    node: &str,
    parents: &[String],
    tol: Tolerance,
) -> (CanoNodeReport, Option<MassFunction>) {
    let mut report = CanoNodeReport {
        node: node.to_string(),
        parents: parents.to_vec(),
        decombined: false,
        proper: false,
        apriori: false,
        note: None,
    };
    let fam_names = family(m12.frame(), node, parents);
    let marginal = match m12.marginalize(&fam_names) {
        Ok(m) => m,
        Err(e) => {
            report.note = Some(e.to_string());
            return (report, None);
        }
    };
    if parents.is_empty() {
        report.decombined = true;
        report.apriori = true;
        report.proper = marginal.focal_elements().all(|(_, v)| v >= -tol.value());
        return (report, Some(marginal));
    }
    let conditional = match marginal.anti_condition(parents) {
        Ok(c) => c,
        Err(e) => {
            report.note = Some(format!("anti-conditioning failed: {e}"));
            return (report, None);
        }
    };
    report.decombined = true;
    let cand = match embed_slices(&conditional, node, parents) {
        Ok(c) => c,
        Err(e) => {
            report.note = Some(format!("slice embedding failed: {e}"));
            return (report, None);
        }
    };
    report.proper = cand.focal_elements().all(|(_, v)| v >= -tol.value());
    report.apriori = cano_is_apriori_conditional(&cand, parents, tol).unwrap_or(false);
    if !report.proper {
        report.note = Some("candidate has negative masses".into());
    } else if !report.apriori {
        report.note = Some("candidate is not vacuous on the parents".into());
    }
    (report, Some(cand))
}

/// Largest number of focal sets an embedded candidate may have.
const MAX_EMBEDDED_FOCALS: usize = 1 << 16;

/// Re-expresses a conditional as the combination of its per-parent-value
/// slices, each placed on its parent configuration: focal sets are unions of
/// `{pa} x A_pa` with mass the product of the slice masses.
fn embed_slices(cond: &MassFunction, node: &str, parents: &[String]) -> Result<MassFunction> {
    let fam = cond.frame();
    let (pframe, split) = split_indices(fam, node, parents)?;
    let mut slices: Vec<Vec<(Vec<usize>, f64)>> = Vec::with_capacity(pframe.size());
    for p in 0..pframe.size() {
        let cyl = EventSet::from_indices(fam, (0..fam.size()).filter(|&i| split[i].0 == p));
        let slice = match cond.condition(&cyl) {
            Ok(c) => c.marginalize(&[node])?,
            Err(Error::TotalConflict) => MassFunction::vacuous(&fam.sub_frame(&[node])?),
            Err(e) => return Err(e),
        };
        slices.push(
            slice
                .focal_elements()
                .map(|(s, v)| (s.indices().collect(), v))
                .collect(),
        );
    }
    let count: usize = slices.iter().map(Vec::len).try_fold(1usize, |a, n| a.checked_mul(n)).unwrap_or(usize::MAX);
    if count > MAX_EMBEDDED_FOCALS {
        return Err(Error::LimitExceeded(MAX_EMBEDDED_FOCALS));
    }
    let mut entries = Vec::with_capacity(count);
    let mut choice = vec![0usize; slices.len()];
    loop {
        let mut mass = 1.0;
        for (p, &c) in choice.iter().enumerate() {
            mass *= slices[p][c].1;
        }
        let members = (0..fam.size()).filter(|&i| {
            let (p, x) = split[i];
            slices[p][choice[p]].0.contains(&x)
        });
        entries.push((EventSet::from_indices(fam, members), mass));
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < slices[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    let total: f64 = entries.iter().map(|(_, v)| v.abs()).sum();
    for e in &mut entries {
        e.1 /= total;
    }
    MassFunction::new(fam, entries, cond.tolerance())
}

/// Exhaustive grid over slice-embedded candidates for small networks: every
/// non-root node binary with at most two parent configurations, and at most
/// two such nodes. For each node, the combination of the parent marginal with
/// a candidate must reproduce the family marginal.
fn grid_search(m12: &MassFunction, dag: &Dag) -> Result<Option<GridReport>> {
    let frame = m12.frame();
    let mut non_roots = Vec::new();
    for node in dag.topological_order()? {
        let parents = dag.ordered_parents(&node)?;
        if parents.is_empty() {
            continue;
        }
        let card = frame.variable(&node).expect("node in frame").card();
        let pconfigs: usize = parents
            .iter()
            .map(|p| frame.variable(p).expect("parent in frame").card())
            .product();
        if card != 2 || pconfigs > 2 {
            return Ok(None);
        }
        non_roots.push((node, parents));
    }
    if non_roots.is_empty() || non_roots.len() > 2 {
        return Ok(None);
    }
    let steps = (1.0 / GRID_RESOLUTION).round() as usize;
    let simplex: Vec<[f64; 3]> = (0..=steps)
        .flat_map(|a| (0..=steps - a).map(move |b| (a, b, steps - a - b)))
        .map(|(a, b, c)| [a as f64, b as f64, c as f64].map(|v| v / steps as f64))
        .collect();

    let mut best_error = Vec::new();
    let mut points = Vec::new();
    for (node, parents) in non_roots {
        let fam_names = family(frame, &node, &parents);
        let fam_marg = m12.marginalize(&fam_names)?;
        let fam = fam_marg.frame().clone();
        let (pframe, split) = split_indices(&fam, &node, &parents)?;
        let target = fam_marg.dense_masses()?;
        let base = m12.marginalize(&parents)?.extend_to(&fam)?.commonality_table()?;
        // Child subsets {x1}, {x2}, {x1,x2} as bit masks over family configurations.
        let piece = |p: usize, sub: usize| -> usize {
            (0..fam.size())
                .filter(|&i| split[i].0 == p && sub >> split[i].1 & 1 == 1)
                .map(|i| 1usize << i)
                .sum()
        };
        let pieces: Vec<[usize; 3]> = (0..pframe.size())
            .map(|p| [piece(p, 1), piece(p, 2), piece(p, 3)])
            .collect();
        let mut best = f64::INFINITY;
        let mut count = 0usize;
        let mut dense = vec![0.0; target.len()];
        let mut choice = vec![0usize; pieces.len()];
        loop {
            count += 1;
            dense.iter_mut().for_each(|v| *v = 0.0);
            let mut combo = vec![0usize; pieces.len()];
            loop {
                let mut mass = 1.0;
                let mut set = 0usize;
                for (p, &c) in combo.iter().enumerate() {
                    mass *= simplex[choice[p]][c];
                    set |= pieces[p][c];
                }
                dense[set] += mass;
                if !advance(&mut combo, 3) {
                    break;
                }
            }
            superset_sums(&mut dense);
            for (d, q) in dense.iter_mut().zip(&base) {
                *d *= q;
            }
            inv_superset_sums(&mut dense);
            dense[0] = 0.0;
            let total: f64 = dense.iter().map(|v| v.abs()).sum();
            if total > 0.0 {
                let err = dense
                    .iter()
                    .zip(&target)
                    .map(|(d, t)| (d / total - t).abs())
                    .fold(0.0, f64::max);
                best = best.min(err);
            }
            if !advance(&mut choice, simplex.len()) {
                break;
            }
        }
        best_error.push((node.clone(), best));
        points.push((node, count));
    }
    Ok(Some(GridReport {
        resolution: GRID_RESOLUTION,
        best_error,
        points_per_node: points,
    }))
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
