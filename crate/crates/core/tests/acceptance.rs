//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::time::{Duration, Instant};

use rand::Rng;

use mte::format::{parse_model, write_model};
use mte::independence::{cano_factorable, CanoVerdict};
use mte::network::{enumerate_compatible_dags, network_from_hypertree};
use mte::random::{
    bayesian, binary_frame, evidence, hypertree, hypertree_valuations, network, proper_mass,
    seeded,
};
use mte::repro::{
    cano_tables, repro_smets_cognitive, repro_smets_conditional, repro_zhu_lee,
    SMETS_CI_INSTANCES,
};
use mte::{
    ci_mte, mass_from_belief, mass_from_commonality, propagate_marginal, Dag, Frame, Hypergraph,
    IndependenceStatement, MassFunction, Tolerance,
};

fn report(n: usize, ok: bool, detail: String) {
    println!("{} criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_zhu_lee() {
    let t = Instant::now();
    let r = repro_zhu_lee().unwrap();
    let elapsed = t.elapsed();
    let v = |k: &str| r.value_of(k).unwrap();
    let ok = (v("mp_printed_lo") - 0.48).abs() < 1e-12
        && (v("mp_printed_hi") - 0.48).abs() < 1e-12
        && (v("mp_formula_lo") - 0.72).abs() < 1e-12
        && (v("mp_formula_hi") - 0.72).abs() < 1e-12
        && v("jeffrey_lo") >= 0.25 - 1e-12
        && v("jeffrey_hi") <= 0.2501 + 1e-12
        && v("jeffrey_hi") <= 0.26
        && r.passed()
        && elapsed < Duration::from_secs(1);
    report(
        1,
        ok,
        format!(
            "printed rule -> {}, formula rule -> {}, Jeffrey [{}, {}] in {elapsed:?}",
            v("mp_printed_lo"),
            v("mp_formula_lo"),
            v("jeffrey_lo"),
            v("jeffrey_hi")
        ),
    );
}

#[test]
fn criterion_02_smets_cognitive_grid() {
    let t = Instant::now();
    let r = repro_smets_cognitive().unwrap();
    let elapsed = t.elapsed();
    let points = r.value_of("grid_points").unwrap();
    let accepted = r.value_of("grid_accepted").unwrap();
    let ok = points == 176_851.0
        && accepted == 1.0
        && r.claim("grid_accepts_only_uniform").unwrap().passed
        && elapsed < Duration::from_secs(10);
    report(2, ok, format!("{accepted} of {points} grid points accepted (uniform only) in {elapsed:?}"));
}

#[test]
fn criterion_03_smets_conditional_degeneracy() {
    let r = repro_smets_conditional(1).unwrap();
    let satisfied = r.value_of("random_satisfied").unwrap();
    let violations = r.value_of("random_violations").unwrap();
    let constructed = ["constructed_first_holds", "constructed_split_fails", "constructed_second_holds"]
        .iter()
        .all(|c| r.claim(c).unwrap().passed);
    let ok = violations == 0.0 && satisfied > 0.0 && constructed;
    report(
        3,
        ok,
        format!("{SMETS_CI_INSTANCES} instances, {satisfied} satisfy the equations, {violations} non-degenerate"),
    );
}

/// Dempster's rule by a double loop over focal sets encoded as 8-bit masks
/// over (X, Y, Z), row-major with Z fastest.
fn cano_oracle() -> [f64; 256] {
    let xy = |x: usize, y: usize| (0..2).map(|z| 1u16 << (x * 4 + y * 2 + z)).sum::<u16>();
    let xz = |x: usize, z: usize| (0..2).map(|y| 1u16 << (x * 4 + y * 2 + z)).sum::<u16>();
    let m1 = [
        (0xff, 0.1),
        (xy(0, 0), 0.2),
        (xy(0, 1), 0.25),
        (xy(1, 0), 0.3),
        (xy(1, 1), 0.15),
    ];
    let m2 = [
        (0xff, 0.2),
        (xz(0, 0), 0.2),
        (xz(0, 1), 0.3),
        (xz(1, 0), 0.25),
        (xz(1, 1), 0.05),
    ];
    let mut out = [0.0; 256];
    for &(a, va) in &m1 {
        for &(b, vb) in &m2 {
            out[(a & b) as usize] += va * vb;
        }
    }
    let norm = 1.0 - out[0];
    out[0] = 0.0;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn xyz_mask(m: &MassFunction, set: &mte::EventSet) -> usize {
    let f = m.frame();
    let pos = ["X", "Y", "Z"].map(|n| f.position(n).unwrap());
    set.configs()
        .map(|c| {
            let c = c.as_slice();
            1usize << (c[pos[0]] * 4 + c[pos[1]] * 2 + c[pos[2]])
        })
        .sum()
}

#[test]
fn criterion_04_cano_example() {
    let t = Instant::now();
    let (m1, m2) = cano_tables().unwrap();
    let joint = m1.combine(&m2).unwrap();
    let oracle = cano_oracle();
    let mut engine = [0.0; 256];
    for (set, v) in joint.focal_elements() {
        engine[xyz_mask(&joint, &set)] += v;
    }
    let err = engine
        .iter()
        .zip(oracle.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let dag = Dag::from_arcs(&["X", "Y", "Z"], &[("X", "Y"), ("X", "Z")]).unwrap();
    let rep = cano_factorable(&joint, &dag, Tolerance::default()).unwrap();
    let elapsed = t.elapsed();
    let ok = err < 1e-12 && !rep.is_factorable() && elapsed < Duration::from_secs(1);
    let verdict = match rep.verdict {
        CanoVerdict::Factorable => "factorable",
        CanoVerdict::CanonicalFails => "canonical-fails",
        CanoVerdict::GridExhaustedFails => "grid-exhausted-fails",
    };
    report(4, ok, format!("oracle error {err:e}, verdict {verdict} in {elapsed:?}"));
}

#[test]
fn criterion_05_structure_enumeration() {
    let t = Instant::now();
    let ex1 = Hypergraph::new([vec!["A", "B", "C"], vec!["C", "D"], vec!["D", "E"], vec!["A", "E"]]).unwrap();
    let ex2 = Hypergraph::new([
        vec!["A", "B", "C"],
        vec!["C", "D"],
        vec!["D", "E"],
        vec!["A", "E"],
        vec!["B", "F"],
        vec!["F", "D"],
    ])
    .unwrap();
    let n1 = enumerate_compatible_dags(&ex1, 10_000).unwrap().len();
    let n2 = enumerate_compatible_dags(&ex2, 10_000).unwrap().len();
    let elapsed = t.elapsed();
    let ok = n1 == 4 && n2 == 0 && elapsed < Duration::from_secs(60);
    report(5, ok, format!("{n1} structures for the first hypergraph, {n2} for the second, in {elapsed:?}"));
}

#[test]
fn criterion_06_hypertree_round_trip() {
    let mut rng = seeded(6);
    let mut good = 0;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let seq = hypertree(&mut rng, 5, 5, 3);
        let vals = hypertree_valuations(&mut rng, &seq);
        let mut joint = vals[0].clone();
        for v in &vals[1..] {
            joint = joint.combine(v).unwrap();
        }
        let Ok(net) = network_from_hypertree(&seq, &vals) else { continue };
        let d = net.joint().unwrap().max_abs_diff(&joint).unwrap();
        worst = worst.max(d);
        if d <= 1e-9 && net.dag().induced_hypergraph().reduce() == seq.hypergraph().reduce() {
            good += 1;
        }
    }
    report(6, good == 200, format!("{good}/200 round trips, worst joint error {worst:e}"));
}

#[test]
fn criterion_07_d_separation_implies_independence() {
    let mut rng = seeded(7);
    let tol = Tolerance::new(1e-7).unwrap();
    let (mut checked, mut violations) = (0usize, 0usize);
    for _ in 0..100 {
        let net = network(&mut rng, 4).unwrap();
        let joint = net.joint().unwrap();
        let nodes = net.dag().nodes().to_vec();
        for code in 0..4usize.pow(nodes.len() as u32) {
            let mut groups: [Vec<String>; 3] = Default::default();
            let mut c = code;
            for x in &nodes {
                if c % 4 < 3 {
                    groups[c % 4].push(x.clone());
                }
                c /= 4;
            }
            let [j, k, l] = &groups;
            if j.is_empty() || k.is_empty() || j > k || !net.dag().d_separated(j, k, l).unwrap() {
                continue;
            }
            checked += 1;
            let s = IndependenceStatement::new(j, k, l).unwrap();
            if !matches!(ci_mte(&joint, &s, tol), Ok(true)) {
                violations += 1;
            }
        }
    }
    report(
        7,
        violations == 0 && checked > 0,
        format!("{checked} d-separated triples over 100 networks, {violations} violations"),
    );
}

#[test]
fn criterion_08_propagation_matches_brute_force() {
    let mut rng = seeded(8);
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for _ in 0..100 {
        let seq = hypertree(&mut rng, 5, 5, 3);
        let vals = hypertree_valuations(&mut rng, &seq);
        let net = network_from_hypertree(&seq, &vals).unwrap();
        let joint = net.joint().unwrap();
        let count = rng.gen_range(0..=2);
        let vars = seq.vertex_order();
        let query = vars[rng.gen_range(0..vars.len())].clone();
        let (ev, naive) = loop {
            let ev: Vec<_> = (0..count).map(|_| evidence(&mut rng, joint.frame())).collect();
            let naive = ev.iter().try_fold(joint.clone(), |m, e| m.condition(e));
            match naive {
                Ok(n) => break (ev, n),
                Err(_) => assert!(propagate_marginal(&net, &ev, &query).is_err()),
            }
        };
        let naive = naive.marginalize(&[query.as_str()]).unwrap();
        let t = Instant::now();
        let local = propagate_marginal(&net, &ev, &query).unwrap();
        slowest = slowest.max(t.elapsed());
        worst = worst.max(local.max_abs_diff(&naive).unwrap());
    }
    let ok = worst < 1e-9 && slowest < Duration::from_millis(100);
    report(8, ok, format!("100 queries, worst error {worst:e}, slowest {slowest:?}"));
}

fn any_mass<R: Rng>(rng: &mut R, f: &Frame, max_focal: usize) -> MassFunction {
    let with_universe = rng.gen_bool(0.5);
    proper_mass(rng, f, max_focal, with_universe)
}

fn random_frame<R: Rng>(rng: &mut R) -> Frame {
    let names = ["A", "B", "C"];
    binary_frame(&names[..rng.gen_range(1..=3)])
}

#[test]
fn criterion_09_operator_algebra() {
    const CASES: usize = 500;
    let mut rng = seeded(9);
    let tol = Tolerance::default();
    let mut failures = Vec::new();

    let (mut comm, mut assoc) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < CASES {
        let f = random_frame(&mut rng);
        let a = proper_mass(&mut rng, &f, 4, true);
        let b = any_mass(&mut rng, &f, 4);
        let c = any_mass(&mut rng, &f, 4);
        let (Ok(ab), Ok(ba)) = (a.combine(&b), b.combine(&a)) else { continue };
        comm = comm.max(ab.max_abs_diff(&ba).unwrap());
        let (Ok(l), Ok(r)) = (ab.combine(&c), b.combine(&c).and_then(|bc| a.combine(&bc))) else { continue };
        assoc = assoc.max(l.max_abs_diff(&r).unwrap());
        done += 1;
    }
    if comm > 1e-9 || assoc > 1e-9 {
        failures.push(format!("commutativity {comm:e}, associativity {assoc:e}"));
    }

    let mut transforms = 0.0f64;
    for _ in 0..CASES {
        let f = random_frame(&mut rng);
        let m = any_mass(&mut rng, &f, 5);
        let from_q = mass_from_commonality(&f, &m.commonality_table().unwrap(), tol).unwrap();
        let from_bel = mass_from_belief(&f, &m.belief_table().unwrap(), tol).unwrap();
        transforms = transforms
            .max(from_q.max_abs_diff(&m).unwrap())
            .max(from_bel.max_abs_diff(&m).unwrap());
    }
    if transforms > 1e-9 {
        failures.push(format!("transform round trip {transforms:e}"));
    }

    let mut recombination = 0.0f64;
    let mut decombined = 0;
    while decombined < CASES {
        let f = random_frame(&mut rng);
        let m1 = any_mass(&mut rng, &f, 4);
        let m2 = proper_mass(&mut rng, &f, 4, true);
        let Ok(m12) = m1.combine(&m2) else { continue };
        let Ok(r) = m12.decombine(&m2) else { continue };
        recombination = recombination.max(m2.combine(&r).unwrap().max_abs_diff(&m12).unwrap());
        decombined += 1;
    }
    if recombination > 1e-9 {
        failures.push(format!("recombination {recombination:e}"));
    }

    let mut conditioning = 0.0f64;
    for _ in 0..CASES {
        let names = ["A", "B", "C"];
        let n = rng.gen_range(2..=3);
        let f = binary_frame(&names[..n]);
        let h: Vec<&str> = names[..n].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if h.is_empty() || h.len() == n {
            continue;
        }
        let joint = bayesian(&mut rng, &f);
        let c = joint.anti_condition(&h).unwrap();
        let marginal = joint.marginalize(&h).unwrap();
        let sub = f.sub_frame(&h).unwrap();
        let pos: Vec<usize> = h.iter().map(|v| f.position(v).unwrap()).collect();
        let probs: Vec<f64> = (0..f.size())
            .map(|i| {
                let cfg = f.config(i);
                let hcfg: Vec<usize> = pos.iter().map(|&p| cfg.as_slice()[p]).collect();
                let hidx = hcfg.iter().fold(0, |acc, &v| acc * 2 + v);
                let singleton = mte::EventSet::from_indices(&f, [i]);
                let p = joint.mass(&singleton).unwrap();
                p / marginal.mass(&mte::EventSet::from_indices(&sub, [hidx])).unwrap()
            })
            .collect();
        let scale = sub.size() as f64;
        for (i, p) in probs.iter().enumerate() {
            let got = c.mass(&mte::EventSet::from_indices(&f, [i])).unwrap();
            conditioning = conditioning.max((got * scale - p).abs());
        }
        conditioning = conditioning.max((c.total_abs_mass() - 1.0).abs());
    }
    if conditioning > 1e-9 {
        failures.push(format!("anti-conditioning vs conditioning {conditioning:e}"));
    }

    report(
        9,
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{CASES} cases each: commutativity {comm:e}, associativity {assoc:e}, transforms {transforms:e}, recombination {recombination:e}, conditioning {conditioning:e}"
            )
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_10_file_round_trip() {
    let mut rng = seeded(10);
    let mut exact = 0;
    for _ in 0..100 {
        let f = random_frame(&mut rng);
        let m = any_mass(&mut rng, &f, 6);
        let text = write_model(&m);
        let back = parse_model(&text, Tolerance::default()).unwrap();
        let same = back.focal_count() == m.focal_count()
            && back
                .focal_elements()
                .zip(m.focal_elements())
                .all(|((sa, va), (sb, vb))| sa == sb && va.to_bits() == vb.to_bits())
            && write_model(&back) == text;
        if same {
            exact += 1;
        }
    }
    report(10, exact == 100, format!("{exact}/100 models reparse bit-exactly"));
}
