//! Executable reproductions of the numeric counterexamples, each producing a
//! deterministic report of computed values and checked claims.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::frames::{EventSet, Frame, Variable};
use crate::hyper::Hypergraph;
use crate::independence::{
    cano_factorable, first_value_belief, smets_cognitive_independent,
    smets_conditionally_independent, CanoVerdict,
};
use crate::mass::{MassFunction, Tolerance};
use crate::network::Dag;
use crate::random::seeded;

/// A closed probability interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidArgument(format!(
                "[{lo}, {hi}] is not a probability interval"
            )))
        }
    }

    pub fn point(v: f64) -> Result<Self> {
        Interval::new(v, v)
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn within(self, outer: Interval) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }
}

/// Rule interval from premise `a` and conclusion `b` intervals, under the
/// independence assumption of the interval rule calculus.
pub fn zhu_lee_rule_interval(a: Interval, b: Interval) -> Interval {
    let lo = 1.0 - a.hi + a.hi * b.lo;
    let hi = a.hi * b.hi - a.lo * b.hi + a.lo * b.lo + 1.0 - a.hi;
    Interval { lo, hi }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Conclusion interval from a rule interval `r` and premise interval `a`.
/// With a point premise the upper bound equals the lower one.
pub fn zhu_lee_modus_ponens(r: Interval, a: Interval) -> Result<Interval> {
    if a.hi <= 0.0 {
        return Err(Error::InvalidArgument(
            "premise upper bound must be positive".into(),
        ));
    }
    let lo = clamp01((r.lo + a.hi - 1.0) / a.hi);
    let hi = if a.hi == a.lo {
        lo
    } else {
        clamp01((r.hi + a.hi - a.lo * (r.lo + a.hi - 1.0) / a.hi - 1.0) / (a.hi - a.lo))
    };
    if hi < lo {
        return Err(Error::InvalidArgument(format!(
            "rule {r:?} and premise {a:?} give an empty conclusion interval [{lo}, {hi}]"
        )));
    }
    Ok(Interval { lo, hi })
}

/// Range of `P'(B)` under Jeffrey's rule when `P'(A)` ranges over `a_prime`,
/// for a bayesian joint over two binary variables (first label = true).
pub fn jeffrey_posterior(joint: &MassFunction, a_prime: Interval) -> Result<Interval> {
    let frame = joint.frame();
    if frame.arity() != 2 || frame.variables().iter().any(|v| v.card() != 2) || !joint.is_bayesian() {
        return Err(Error::InvalidArgument(
            "expected a bayesian joint over two binary variables".into(),
        ));
    }
    let p = |i: usize| joint.mass(&EventSet::from_indices(frame, [i]));
    let (tt, tf, ft, ff) = (p(0)?, p(1)?, p(2)?, p(3)?);
    if tt + tf <= 0.0 || ft + ff <= 0.0 {
        return Err(Error::InvalidArgument(
            "a conditioning branch has zero probability".into(),
        ));
    }
    let given_true = tt / (tt + tf);
    let given_false = ft / (ft + ff);
    let at = |q: f64| q * given_true + (1.0 - q) * given_false;
    let (x, y) = (at(a_prime.lo), at(a_prime.hi));
    Interval::new(clamp01(x.min(y)), clamp01(x.max(y)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportValue {
    pub name: String,
    pub value: f64,
    /// The value printed in the source text, when one is given.
    pub printed: Option<f64>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub name: String,
    pub origin: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproReport {
    pub scenario: String,
    pub params: Vec<(String, String)>,
    pub values: Vec<ReportValue>,
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

impl ReproReport {
    fn new(scenario: &str) -> Self {
        ReproReport {
            scenario: scenario.to_string(),
            params: Vec::new(),
            values: Vec::new(),
            claims: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn param(&mut self, name: &str, value: impl ToString) {
        self.params.push((name.to_string(), value.to_string()));
    }

    fn value(&mut self, name: &str, value: f64, printed: Option<f64>, source: &str) {
        self.values.push(ReportValue {
            name: name.to_string(),
            value: value + 0.0,
            printed,
            source: source.to_string(),
        });
    }

    fn check(&mut self, name: &str, origin: &str, passed: bool) {
        self.claims.push(Claim {
            name: name.to_string(),
            origin: origin.to_string(),
            passed,
        });
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn value_of(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}", self.scenario);
        for (k, v) in &self.params {
            let _ = writeln!(s, "  param {k} = {v}");
        }
        for v in &self.values {
            let _ = write!(s, "  value {} = {}", v.name, v.value);
            if let Some(p) = v.printed {
                let _ = write!(s, " (printed {p})");
            }
            let _ = writeln!(s, "  [{}]", v.source);
        }
        for c in &self.claims {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "  {mark} {}  [{}]", c.name, c.origin);
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "verdict {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// Line-oriented `key=value` records.
    pub fn to_machine(&self) -> String {
        let mut s = String::new();
        let sc = &self.scenario;
        let _ = writeln!(s, "scenario={sc}");
        for (k, v) in &self.params {
            let _ = writeln!(s, "{sc}.param.{k}={v}");
        }
        for v in &self.values {
            let _ = writeln!(s, "{sc}.value.{}={}", v.name, v.value);
            if let Some(p) = v.printed {
                let _ = writeln!(s, "{sc}.printed.{}={p}", v.name);
            }
            let _ = writeln!(s, "{sc}.source.{}={}", v.name, v.source);
        }
        for c in &self.claims {
            let _ = writeln!(s, "{sc}.claim.{}={}", c.name, if c.passed { "pass" } else { "fail" });
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, "{sc}.note.{i}={n}");
        }
        let _ = writeln!(s, "{sc}.verdict={}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

fn boolean(name: &str) -> Variable {
    Variable::new(name, ["t", "f"]).expect("valid variable")
}

/// The two-formula joint distribution of the rule-interval example.
pub fn zhu_lee_joint() -> MassFunction {
    let frame = Frame::new([boolean("A"), boolean("B")]).expect("small frame");
    MassFunction::bayesian(&frame, &[0.1, 0.3, 0.2, 0.4]).expect("valid table")
}

pub const ZHU_LEE_PRINTED_RULE: f64 = 0.48;

pub fn repro_zhu_lee() -> Result<ReproReport> {
    const EXACT: f64 = 1e-12;
    let mut r = ReproReport::new("zhu-lee");
    let joint = zhu_lee_joint();
    let a_true = joint.bel(&joint.frame().cylinder("A", "t")?)?;
    let b_true = joint.bel(&joint.frame().cylinder("B", "t")?)?;
    r.value("a", a_true, Some(0.4), "row sum of the joint table");
    r.value("b", b_true, Some(0.3), "column sum of the joint table");

    let rule = zhu_lee_rule_interval(Interval::point(a_true)?, Interval::point(b_true)?);
    r.value("rule_lo", rule.lo, Some(ZHU_LEE_PRINTED_RULE), "r_L = 1 - a_U + a_U b_L");
    r.value(
        "rule_hi",
        rule.hi,
        Some(ZHU_LEE_PRINTED_RULE),
        "r_U = a_U b_U - a_L b_U + a_L b_L + 1 - a_U",
    );
    r.check(
        "rule_formula_gives_0.72",
        "rule interval formulas",
        (rule.lo - 0.72).abs() < EXACT && (rule.hi - 0.72).abs() < EXACT,
    );
    if (rule.lo - ZHU_LEE_PRINTED_RULE).abs() > EXACT {
        r.notes.push(format!(
            "printed rule value {ZHU_LEE_PRINTED_RULE} disagrees with its own formula ({}); both are carried through",
            rule.lo
        ));
    }

    let premise = Interval::new(0.999, 1.0)?;
    r.param("premise", "[0.999, 1]");
    let mp_printed = zhu_lee_modus_ponens(Interval::point(ZHU_LEE_PRINTED_RULE)?, premise)?;
    let mp_formula = zhu_lee_modus_ponens(rule, premise)?;
    r.value("mp_printed_lo", mp_printed.lo, Some(0.48), "b_L from the printed rule");
    r.value("mp_printed_hi", mp_printed.hi, Some(0.48), "b_U from the printed rule");
    r.value("mp_formula_lo", mp_formula.lo, None, "b_L from the formula rule");
    r.value("mp_formula_hi", mp_formula.hi, None, "b_U from the formula rule");
    r.check(
        "mp_printed_gives_0.48",
        "modus ponens worked example",
        (mp_printed.lo - 0.48).abs() < EXACT && (mp_printed.hi - 0.48).abs() < EXACT,
    );
    r.check(
        "mp_formula_gives_0.72",
        "modus ponens with the formula rule",
        (mp_formula.lo - 0.72).abs() < EXACT && (mp_formula.hi - 0.72).abs() < EXACT,
    );

    let jeffrey = jeffrey_posterior(&joint, premise)?;
    r.value("jeffrey_lo", jeffrey.lo, None, "Jeffrey's rule at P'(A) = 0.999");
    r.value("jeffrey_hi", jeffrey.hi, None, "Jeffrey's rule at P'(A) = 1");
    r.check(
        "jeffrey_within_0.25_0.2501",
        "conditional obtained by Jeffrey's rule",
        jeffrey.within(Interval::new(0.25, 0.2501)?),
    );
    r.check(
        "jeffrey_at_most_0.26",
        "will not exceed 0.26",
        jeffrey.hi <= 0.26,
    );
    let certain = jeffrey_posterior(&joint, Interval::point(1.0)?)?;
    r.value("p_b_given_a", certain.lo, Some(0.25), "Jeffrey's rule at P'(A) = 1");
    r.check(
        "jeffrey_certain_premise_0.25",
        "probability of B given A is 0.25",
        (certain.lo - 0.25).abs() < EXACT && (certain.hi - 0.25).abs() < EXACT,
    );
    for (name, mp) in [("printed", mp_printed), ("formula", mp_formula)] {
        let gap = (mp.mid() - jeffrey.mid()).abs();
        r.value(&format!("gap_{name}"), gap, None, "|modus ponens - Jeffrey| at midpoints");
        r.check(
            &format!("refutation_{name}"),
            "interval rules do not capture bayesian reasoning",
            gap > 0.2,
        );
    }
    Ok(r)
}

pub const SMETS_GRID_STEPS: usize = 100;

/// The four masses of a 2 x 2 bayesian function at integer grid coordinates.
fn grid_masses(steps: usize) -> impl Iterator<Item = [usize; 4]> {
    (0..=steps).flat_map(move |a| {
        (0..=steps - a).flat_map(move |b| (0..=steps - a - b).map(move |c| [a, b, c, steps - a - b - c]))
    })
}

pub fn repro_smets_cognitive() -> Result<ReproReport> {
    let mut r = ReproReport::new("smets-cog");
    let tol = Tolerance::default();
    let frame = Frame::new([
        Variable::indexed("X", "x", 2)?,
        Variable::indexed("Y", "y", 2)?,
    ])?;
    r.param("resolution", 1.0 / SMETS_GRID_STEPS as f64);

    // The symbolic system: equal masses within each row, column and across rows.
    let symbolic: Vec<[usize; 4]> = grid_masses(SMETS_GRID_STEPS)
        .filter(|m| m[0] == m[1] && m[2] == m[3] && m[0] == m[2])
        .collect();
    r.value("symbolic_solutions", symbolic.len() as f64, None, "grid solutions of the equality constraints");
    r.check(
        "symbolic_unique_uniform",
        "a constant equal 1/4",
        symbolic == [[25; 4]],
    );

    let mut accepted = Vec::new();
    let mut points = 0usize;
    for m in grid_masses(SMETS_GRID_STEPS) {
        points += 1;
        let probs = m.map(|v| v as f64 / SMETS_GRID_STEPS as f64);
        let mass = MassFunction::bayesian(&frame, &probs)?;
        if smets_cognitive_independent(&mass, tol)? {
            accepted.push(m);
        }
    }
    r.value("grid_points", points as f64, None, "simplex grid size");
    r.value("grid_accepted", accepted.len() as f64, None, "points passing the predicate");
    r.check(
        "grid_accepts_only_uniform",
        "a constant equal 1/4",
        accepted == [[25; 4]],
    );

    let product = MassFunction::bayesian(&frame, &[0.18, 0.12, 0.42, 0.28])?;
    r.check(
        "product_rejected",
        "does not cover statistical independence",
        !smets_cognitive_independent(&product, tol)?,
    );
    Ok(r)
}

pub const SMETS_CI_INSTANCES: usize = 1000;
const SMETS_CI_EQUATION_TOL: f64 = 1e-9;
const SMETS_CI_DEGENERACY_TOL: f64 = 1e-7;

fn theta_frame() -> Result<Frame> {
    Frame::new([
        Variable::indexed("T", "t", 2)?,
        Variable::indexed("X", "x", 2)?,
        Variable::indexed("Y", "y", 2)?,
    ])
}

/// Slice-weighted product masses `w_t p_x q_y`.
fn sliced_product(frame: &Frame, w: [f64; 2], p: [f64; 2], q: [f64; 2]) -> Result<MassFunction> {
    let mut probs = Vec::with_capacity(8);
    for wt in w {
        for px in p {
            for qy in q {
                probs.push(wt * px * qy);
            }
        }
    }
    MassFunction::bayesian(frame, &probs)
}

pub fn repro_smets_conditional(seed: u64) -> Result<ReproReport> {
    let mut r = ReproReport::new("smets-ci");
    let frame = theta_frame()?;
    let eq_tol = Tolerance::new(SMETS_CI_EQUATION_TOL)?;
    r.param("seed", seed);
    r.param("instances", SMETS_CI_INSTANCES);
    r.param("equation_tolerance", SMETS_CI_EQUATION_TOL);
    r.param("degeneracy_tolerance", SMETS_CI_DEGENERACY_TOL);

    let degenerate = |b: f64| b.abs() < SMETS_CI_DEGENERACY_TOL || (b - 1.0).abs() < SMETS_CI_DEGENERACY_TOL;

    let first = sliced_product(&frame, [1.0, 0.0], [0.3, 0.7], [0.6, 0.4])?;
    let holds = smets_conditionally_independent(&first, eq_tol)?;
    let bel = first_value_belief(&first)?;
    r.value("constructed_first_bel", bel, None, "all mass on the first slice");
    r.check("constructed_first_holds", "belief in the first value is 1", holds && (bel - 1.0).abs() < SMETS_CI_DEGENERACY_TOL);

    let split = sliced_product(&frame, [0.5, 0.5], [0.3, 0.7], [0.6, 0.4])?;
    let bel = first_value_belief(&split)?;
    r.value("constructed_split_bel", bel, None, "even split across slices");
    r.check(
        "constructed_split_fails",
        "belief in the first value is 0 or 1",
        !smets_conditionally_independent(&split, eq_tol)? && (bel * bel - bel).abs() > 0.1,
    );

    let second = sliced_product(&frame, [0.0, 1.0], [0.2, 0.8], [0.5, 0.5])?;
    let bel = first_value_belief(&second)?;
    r.value("constructed_second_bel", bel, None, "all mass on the second slice");
    r.check(
        "constructed_second_holds",
        "belief in the first value is 0",
        smets_conditionally_independent(&second, eq_tol)? && bel.abs() < SMETS_CI_DEGENERACY_TOL,
    );

    let mut rng = seeded(seed);
    let mut satisfied = 0usize;
    let mut violations = 0usize;
    for i in 0..SMETS_CI_INSTANCES {
        let p = rng.gen_range(0.0..1.0);
        let q = rng.gen_range(0.0..1.0);
        let m = match i % 4 {
            0 => crate::random::bayesian(&mut rng, &frame),
            1 => {
                let w = if rng.gen_bool(0.5) { [1.0, 0.0] } else { [0.0, 1.0] };
                sliced_product(&frame, w, [p, 1.0 - p], [q, 1.0 - q])?
            }
            2 => {
                let w = rng.gen_range(0.01..0.99);
                sliced_product(&frame, [w, 1.0 - w], [p, 1.0 - p], [q, 1.0 - q])?
            }
            _ => {
                let eps = rng.gen_range(0.0..1e-3);
                sliced_product(&frame, [1.0 - eps, eps], [p, 1.0 - p], [q, 1.0 - q])?
            }
        };
        if smets_conditionally_independent(&m, eq_tol)? {
            satisfied += 1;
            if !degenerate(first_value_belief(&m)?) {
                violations += 1;
            }
        }
    }
    r.value("random_satisfied", satisfied as f64, None, "instances meeting all product equations");
    r.value("random_violations", violations as f64, None, "satisfying instances with a non-degenerate slice belief");
    r.check(
        "random_degenerate",
        "either the belief is 1 or it is 0",
        violations == 0 && satisfied > 0,
    );
    Ok(r)
}

/// The two input tables of the a-priori conditional counterexample.
pub fn cano_tables() -> Result<(MassFunction, MassFunction)> {
    let x = Variable::indexed("X", "x", 2)?;
    let fy = Frame::new([x.clone(), Variable::indexed("Y", "y", 2)?])?;
    let fz = Frame::new([x, Variable::indexed("Z", "z", 2)?])?;
    let m1 = MassFunction::new(
        &fy,
        [
            (fy.full_set(), 0.1),
            (EventSet::from_indices(&fy, [0]), 0.2),
            (EventSet::from_indices(&fy, [1]), 0.25),
            (EventSet::from_indices(&fy, [2]), 0.3),
            (EventSet::from_indices(&fy, [3]), 0.15),
        ],
        Tolerance::default(),
    )?;
    let m2 = MassFunction::new(
        &fz,
        [
            (fz.full_set(), 0.2),
            (EventSet::from_indices(&fz, [0]), 0.2),
            (EventSet::from_indices(&fz, [1]), 0.3),
            (EventSet::from_indices(&fz, [2]), 0.25),
            (EventSet::from_indices(&fz, [3]), 0.05),
        ],
        Tolerance::default(),
    )?;
    Ok((m1, m2))
}

pub fn repro_cano() -> Result<ReproReport> {
    let mut r = ReproReport::new("cano");
    let tol = Tolerance::default();
    let (m1, m2) = cano_tables()?;
    let sum = |m: &MassFunction| m.focal_elements().map(|(_, v)| v).sum::<f64>();
    r.value("m1_total", sum(&m1), Some(1.0), "first table");
    r.value("m2_total", sum(&m2), Some(1.0), "second table");
    r.check(
        "tables_normalized",
        "the two tables",
        (sum(&m1) - 1.0).abs() < 1e-12 && (sum(&m2) - 1.0).abs() < 1e-12,
    );
    let raw = m1.combine_unnormalized(&m2)?;
    r.value("conflict", raw.conflict(), None, "unnormalized combination");
    let joint = m1.combine(&m2)?;
    r.value("joint_focal_sets", joint.focal_count() as f64, None, "normalized combination");

    let hyper = Hypergraph::new([vec!["X", "Y"], vec!["X", "Z"]])?;
    let back = m1.combine(&m2)?;
    r.check(
        "hypergraph_factorization_exists",
        "factorization along a hypergraph",
        hyper.is_hypertree() && back.max_abs_diff(&joint)? <= tol.value(),
    );

    let dag = Dag::from_arcs(&["X", "Y", "Z"], &[("X", "Y"), ("X", "Z")])?;
    let report = cano_factorable(&joint, &dag, tol)?;
    for n in &report.nodes {
        let mut failed = Vec::new();
        if !n.decombined {
            failed.push("decombination");
        }
        if !n.proper {
            failed.push("properness");
        }
        if !n.apriori {
            failed.push("vacuity");
        }
        if !failed.is_empty() {
            r.notes.push(format!(
                "node {} fails {}{}",
                n.node,
                failed.join(", "),
                n.note.as_ref().map(|s| format!(" ({s})")).unwrap_or_default()
            ));
        }
    }
    if let Some(e) = report.recombination_error {
        r.value("recombination_error", e, None, "canonical candidates combined");
    }
    if !report.recombines {
        r.notes.push("canonical candidates do not recombine to the joint".into());
    }
    if let Some(g) = &report.grid {
        r.param("grid_resolution", g.resolution);
        for (node, e) in &g.best_error {
            r.value(&format!("grid_best_error_{node}"), *e, None, "best grid candidate");
        }
    }
    let verdict = match report.verdict {
        CanoVerdict::Factorable => "factorable",
        CanoVerdict::CanonicalFails => "canonical-fails",
        CanoVerdict::GridExhaustedFails => "grid-exhausted-fails",
    };
    r.param("verdict", verdict);
    r.check(
        "not_apriori_factorable",
        "cannot be represented in a structured manner",
        !report.is_factorable(),
    );
    Ok(r)
}

pub fn repro_all(seed: u64) -> Result<Vec<ReproReport>> {
    Ok(vec![
        repro_zhu_lee()?,
        repro_smets_cognitive()?,
        repro_smets_conditional(seed)?,
        repro_cano()?,
    ])
}
