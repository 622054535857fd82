use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use mte::network::enumerate_compatible_dags;
use mte::random::{bayesian, binary_frame, hypertree, network, proper_mass, seeded};
use mte::{ci_mte, Dag, EventSet, Hypergraph, IndependenceStatement, MassFunction, Tolerance};

const NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

fn edges_strategy() -> impl Strategy<Value = Vec<Vec<&'static str>>> {
    prop::collection::vec(prop::sample::subsequence(NAMES.to_vec(), 1..=3), 1..=5)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Some ordering where every later edge meets an earlier one that contains
/// its whole overlap with the earlier edges.
fn has_construction_order(edges: &[BTreeSet<String>]) -> bool {
    permutations(edges.len()).into_iter().any(|p| {
        (1..p.len()).all(|k| {
            let e = &edges[p[k]];
            let seen: BTreeSet<&String> = p[..k].iter().flat_map(|&i| edges[i].iter()).collect();
            let overlap: BTreeSet<&String> = e.iter().filter(|v| seen.contains(v)).collect();
            p[..k].iter().any(|&j| {
                let b = &edges[j];
                !b.is_disjoint(e) && overlap.iter().all(|v| b.contains(*v))
            })
        })
    })
}

/// d-separation by moralizing the ancestral graph of J, K and L.
fn moral_separated(dag: &Dag, j: &[String], k: &[String], l: &[String]) -> bool {
    let mut keep: BTreeSet<String> = j.iter().chain(k).chain(l).cloned().collect();
    let mut stack: Vec<String> = keep.iter().cloned().collect();
    while let Some(x) = stack.pop() {
        for p in dag.parents(&x).unwrap() {
            if keep.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    let mut adj: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for x in &keep {
        let ps: Vec<String> = dag.parents(x).unwrap().iter().cloned().collect();
        for p in &ps {
            adj.entry(x.clone()).or_default().insert(p.clone());
            adj.entry(p.clone()).or_default().insert(x.clone());
        }
        for a in &ps {
            for b in &ps {
                if a != b {
                    adj.entry(a.clone()).or_default().insert(b.clone());
                }
            }
        }
    }
    let blocked: BTreeSet<&String> = l.iter().collect();
    let mut seen: BTreeSet<String> = j.iter().cloned().collect();
    let mut stack: Vec<String> = j.to_vec();
    while let Some(x) = stack.pop() {
        if k.contains(&x) {
            return false;
        }
        for y in adj.get(&x).into_iter().flatten() {
            if !blocked.contains(y) && seen.insert(y.clone()) {
                stack.push(y.clone());
            }
        }
    }
    true
}

/// p(jkl) p(l) = p(jl) p(kl) over a bayesian table on binary variables.
fn probabilistic_ci(m: &MassFunction, j: &[String], k: &[String], l: &[String], tol: f64) -> bool {
    let f = m.frame();
    let p: Vec<f64> = (0..f.size())
        .map(|i| m.mass(&EventSet::from_indices(f, [i])).unwrap())
        .collect();
    let key = |i: usize, vars: &[String]| -> Vec<usize> {
        let c = f.config(i);
        vars.iter().map(|v| c.as_slice()[f.position(v).unwrap()]).collect()
    };
    let sum = |vars: &[String]| {
        let mut t: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (i, v) in p.iter().enumerate() {
            *t.entry(key(i, vars)).or_default() += v;
        }
        t
    };
    let jl: Vec<String> = j.iter().chain(l).cloned().collect();
    let kl: Vec<String> = k.iter().chain(l).cloned().collect();
    let jkl: Vec<String> = j.iter().chain(k).chain(l).cloned().collect();
    let (pjkl, pjl, pkl, pl) = (sum(&jkl), sum(&jl), sum(&kl), sum(l));
    (0..f.size()).all(|i| {
        let lhs = pjkl[&key(i, &jkl)] * pl[&key(i, l)];
        let rhs = pjl[&key(i, &jl)] * pkl[&key(i, &kl)];
        (lhs - rhs).abs() <= tol
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_of_extension_is_identity(seed in any::<u64>(), vars in 1usize..=2) {
        let mut rng = seeded(seed);
        let big = binary_frame(&NAMES[..3]);
        let small = big.sub_frame(&NAMES[..vars]).unwrap();
        let m = proper_mass(&mut rng, &small, 3, false);
        for (b, _) in m.focal_elements() {
            let up = b.extend(&big).unwrap();
            prop_assert_eq!(up.project(&NAMES[..vars]).unwrap(), b.clone());
        }
        let wide = proper_mass(&mut rng, &big, 3, false);
        for (a, _) in wide.focal_elements() {
            let back = a.project(&NAMES[..vars]).unwrap().extend(&big).unwrap();
            prop_assert!(a.is_subset(&back).unwrap());
        }
    }

    #[test]
    fn greedy_elimination_matches_exhaustive_orders(edges in edges_strategy()) {
        let h = Hypergraph::new(edges).unwrap();
        let list: Vec<BTreeSet<String>> = h.edges().to_vec();
        prop_assert_eq!(h.is_hypertree(), has_construction_order(&list));
        if let Some(seq) = h.hypertree_sequence() {
            seq.validate().unwrap();
            prop_assert_eq!(seq.hypergraph(), h.clone());
        }
    }

    #[test]
    fn reduce_is_idempotent(edges in edges_strategy()) {
        let h = Hypergraph::new(edges).unwrap();
        let r = h.reduce();
        prop_assert_eq!(r.reduce(), r.clone());
        prop_assert!(r.covers(&h) && h.covers(&r));
    }

    #[test]
    fn random_hypertrees_are_hypertrees(seed in any::<u64>()) {
        let seq = hypertree(&mut seeded(seed), 5, 5, 3);
        prop_assert!(seq.hypergraph().is_hypertree());
    }

    #[test]
    fn d_separation_matches_moral_graph(seed in any::<u64>(), code in 0usize..256) {
        let net = network(&mut seeded(seed), 4).unwrap();
        let nodes = net.dag().nodes().to_vec();
        let mut groups: [Vec<String>; 3] = Default::default();
        let mut c = code;
        for x in &nodes {
            if c % 4 < 3 {
                groups[c % 4].push(x.clone());
            }
            c /= 4;
        }
        let [j, k, l] = &groups;
        prop_assume!(!j.is_empty() && !k.is_empty());
        prop_assert_eq!(net.dag().d_separated(j, k, l).unwrap(), moral_separated(net.dag(), j, k, l));
    }

    #[test]
    fn ci_agrees_with_probabilistic_independence(seed in any::<u64>(), structured in any::<bool>()) {
        let mut rng = seeded(seed);
        let f = binary_frame(&["J", "K", "L"]);
        let m = if structured {
            // p(l) p(j|l) p(k|l)
            let pl = bayesian(&mut rng, &binary_frame(&["L"]));
            let pj = bayesian(&mut rng, &binary_frame(&["L", "J"]));
            let pk = bayesian(&mut rng, &binary_frame(&["L", "K"]));
            let g = |m: &MassFunction, i: usize| m.mass(&EventSet::from_indices(m.frame(), [i])).unwrap();
            let probs: Vec<f64> = (0..8)
                .map(|i| {
                    let (j, k, l) = (i >> 2, (i >> 1) & 1, i & 1);
                    let pjl = g(&pj, l * 2 + j) / (g(&pj, l * 2) + g(&pj, l * 2 + 1));
                    let pkl = g(&pk, l * 2 + k) / (g(&pk, l * 2) + g(&pk, l * 2 + 1));
                    g(&pl, l) * pjl * pkl
                })
                .collect();
            MassFunction::bayesian(&f, &probs).unwrap()
        } else {
            bayesian(&mut rng, &f)
        };
        let s = |v: &str| vec![v.to_string()];
        let tol = Tolerance::new(1e-9).unwrap();
        for (j, k, l) in [(s("J"), s("K"), s("L")), (s("J"), s("K"), vec![])] {
            let st = IndependenceStatement::new(&j, &k, &l).unwrap();
            let got = ci_mte(&m, &st, tol).unwrap();
            let expected = probabilistic_ci(&m, &j, &k, &l, 1e-9);
            prop_assert_eq!(got, expected);
        }
        if structured {
            let st = IndependenceStatement::new(&s("J"), &s("K"), &s("L")).unwrap();
            prop_assert!(ci_mte(&m, &st, tol).unwrap());
        }
    }

    #[test]
    fn belief_and_plausibility_are_dual(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = binary_frame(&["X", "Y"]);
        let m = proper_mass(&mut rng, &f, 5, false);
        for mask in 0u32..16 {
            let a = EventSet::from_indices(&f, (0..4).filter(|i| mask >> i & 1 == 1));
            let bel = m.bel(&a).unwrap();
            let pl = m.pl(&a).unwrap();
            prop_assert!((pl - (1.0 - m.bel(&a.complement()).unwrap())).abs() < 1e-12);
            prop_assert!(bel <= pl + 1e-12);
        }
    }
}

#[test]
fn no_compatible_structure_links_the_outer_pair() {
    let h = Hypergraph::new([vec!["A", "B", "C"], vec!["C", "D"], vec!["D", "E"], vec!["A", "E"]]).unwrap();
    let dags = enumerate_compatible_dags(&h, 100).unwrap();
    assert!(!dags.is_empty());
    for d in &dags {
        assert!(!d.has_arc("A", "C") && !d.has_arc("C", "A"));
        assert!(d.compatible(&h));
    }
}

fn probs_of(m: &MassFunction) -> Vec<f64> {
    let f = m.frame();
    (0..f.size())
        .map(|i| m.mass(&EventSet::from_indices(f, [i])).unwrap())
        .collect()
}

fn random_event(f: &mte::Frame, mask: u64) -> EventSet {
    EventSet::from_indices(f, (0..f.size()).filter(|i| mask >> i & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_distributes_over_union(a in any::<u8>(), b in any::<u8>(), vars in 1usize..=2) {
        let f = binary_frame(&NAMES[..3]);
        let (a, b) = (random_event(&f, a as u64), random_event(&f, b as u64));
        let v = &NAMES[..vars];
        let lhs = a.union(&b).unwrap().project(v).unwrap();
        let rhs = a.project(v).unwrap().union(&b.project(v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn extension_is_monotone(a in any::<u8>(), b in any::<u8>()) {
        let big = binary_frame(&NAMES[..4]);
        let small = binary_frame(&NAMES[..3]);
        let a = random_event(&small, a as u64);
        let b = a.union(&random_event(&small, b as u64)).unwrap();
        prop_assert!(a.extend(&big).unwrap().is_subset(&b.extend(&big).unwrap()).unwrap());
    }

    #[test]
    fn outputs_stay_normalized(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = binary_frame(&["X", "Y"]);
        let a = proper_mass(&mut rng, &f, 4, true);
        let b = proper_mass(&mut rng, &f, 4, true);
        let c = a.combine(&b).unwrap();
        let outs = [
            c.clone(),
            c.decombine(&b).unwrap(),
            c.anti_condition(&["X"]).unwrap(),
            c.marginalize(&["Y"]).unwrap(),
        ];
        for m in &outs {
            prop_assert!((m.total_abs_mass() - 1.0).abs() < 1e-9);
            prop_assert_eq!(m.mass(&m.frame().empty_set()).unwrap(), 0.0);
            for q in m.commonality_table().unwrap() {
                prop_assert!(q >= -1e-9);
            }
        }
    }

    #[test]
    fn bayesian_operators_match_probability(seed in any::<u64>(), evidence in 1u16..u16::MAX) {
        let mut rng = seeded(seed);
        let f = binary_frame(&NAMES[..4]);
        let p = bayesian(&mut rng, &f);
        let q = bayesian(&mut rng, &f);
        let (pp, qp) = (probs_of(&p), probs_of(&q));

        let prod: Vec<f64> = pp.iter().zip(&qp).map(|(a, b)| a * b).collect();
        let z: f64 = prod.iter().sum();
        let combined = probs_of(&p.combine(&q).unwrap());
        for (got, want) in combined.iter().zip(&prod) {
            prop_assert!((got - want / z).abs() < 1e-12);
        }

        // A, C marginal: positions 0 and 2 of (A, B, C, D)
        let marg = p.marginalize(&["A", "C"]).unwrap();
        let mp = probs_of(&marg);
        let mut want = [0.0; 4];
        for (i, v) in pp.iter().enumerate() {
            want[((i >> 3) & 1) * 2 + ((i >> 1) & 1)] += v;
        }
        for (got, w) in mp.iter().zip(&want) {
            prop_assert!((got - w).abs() < 1e-12);
        }

        let e = random_event(&f, evidence as u64);
        let mass_e: f64 = e.indices().map(|i| pp[i]).sum();
        let cond = probs_of(&p.condition(&e).unwrap());
        for (i, got) in cond.iter().enumerate() {
            let w = if e.contains(i) { pp[i] / mass_e } else { 0.0 };
            prop_assert!((got - w).abs() < 1e-12);
        }
    }

    #[test]
    fn transforms_invert_exactly(seed in any::<u64>(), vars in 1usize..=4) {
        let mut rng = seeded(seed);
        let f = binary_frame(&NAMES[..vars]);
        let m = proper_mass(&mut rng, &f, 6, false);
        let tol = Tolerance::default();
        let from_q = mte::mass_from_commonality(&f, &m.commonality_table().unwrap(), tol).unwrap();
        let from_bel = mte::mass_from_belief(&f, &m.belief_table().unwrap(), tol).unwrap();
        prop_assert!(from_q.max_abs_diff(&m).unwrap() < 1e-12);
        prop_assert!(from_bel.max_abs_diff(&m).unwrap() < 1e-12);
    }

    #[test]
    fn conditional_plausibility_chain(seed in any::<u64>(), a in 1u8..16, b in 0u8..16) {
        let mut rng = seeded(seed);
        let f = binary_frame(&["X", "Y"]);
        let m = proper_mass(&mut rng, &f, 5, false);
        let (a, b) = (random_event(&f, a as u64), random_event(&f, b as u64));
        let full = f.full_set();
        let not_a = a.complement();
        let not_b = b.complement();
        let lhs = mte::independence::smets_cond_bel(&m, &full, &a).unwrap()
            - mte::independence::smets_cond_bel(&m, &not_b, &a).unwrap();
        let rhs = m.bel(&full.union(&not_a).unwrap()).unwrap()
            - m.bel(&not_b.union(&not_a).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ci_agrees_on_every_triple(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let names = ["A", "B", "C", "D"];
        let f = binary_frame(&names);
        // Half the draws make A, B independent given C.
        let m = if seed % 2 == 0 {
            bayesian(&mut rng, &f)
        } else {
            let base = probs_of(&bayesian(&mut rng, &f));
            let sum_by = |key: &dyn Fn(usize) -> usize| {
                let mut t = [0.0; 16];
                for (i, v) in base.iter().enumerate() {
                    t[key(i)] += v;
                }
                t
            };
            let (a, b, c) = (|i: usize| i >> 3 & 1, |i: usize| i >> 2 & 1, |i: usize| i >> 1 & 1);
            let pc = sum_by(&|i| c(i));
            let pac = sum_by(&|i| a(i) * 2 + c(i));
            let pbc = sum_by(&|i| b(i) * 2 + c(i));
            let pd_abc = |i: usize| {
                let abc = i >> 1;
                base[i] / (base[abc << 1] + base[abc << 1 | 1])
            };
            let probs: Vec<f64> = (0..16)
                .map(|i| pac[a(i) * 2 + c(i)] * pbc[b(i) * 2 + c(i)] / pc[c(i)] * pd_abc(i))
                .collect();
            MassFunction::bayesian(&f, &probs).unwrap()
        };
        let tol = Tolerance::new(1e-9).unwrap();
        for code in 0..256usize {
            let mut groups: [Vec<String>; 3] = Default::default();
            let mut c = code;
            for x in names {
                if c % 4 < 3 {
                    groups[c % 4].push(x.to_string());
                }
                c /= 4;
            }
            let [j, k, l] = &groups;
            if j.is_empty() || k.is_empty() {
                continue;
            }
            let st = IndependenceStatement::new(j, k, l).unwrap();
            prop_assert_eq!(ci_mte(&m, &st, tol).unwrap(), probabilistic_ci(&m, j, k, l, 1e-9));
        }
    }
}

#[test]
fn cognitive_independence_only_at_uniform() {
    let f = binary_frame(&["X", "Y"]);
    let tol = Tolerance::default();
    for a in 0..=20usize {
        for b in 0..=20 - a {
            for c in 0..=20 - a - b {
                let probs = [a, b, c, 20 - a - b - c].map(|v| v as f64 / 20.0);
                let m = MassFunction::bayesian(&f, &probs).unwrap();
                let uniform = probs.iter().all(|p| (p - 0.25).abs() < tol.value());
                assert_eq!(
                    mte::independence::smets_cognitive_independent(&m, tol).unwrap(),
                    uniform,
                    "{probs:?}"
                );
            }
        }
    }
}

/// Every DAG over the five vertices, by choosing each pair's orientation.
fn all_dags(names: &[&str]) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..names.len())
        .flat_map(|i| (i + 1..names.len()).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut arcs = Vec::new();
        let mut c = code;
        for &(i, j) in &pairs {
            match c % 3 {
                1 => arcs.push((names[i], names[j])),
                2 => arcs.push((names[j], names[i])),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(d) = Dag::from_arcs(names, &arcs) {
            out.push(d);
        }
    }
    out
}

#[test]
fn exhaustive_structure_search_agrees_with_enumeration() {
    let names = ["A", "B", "C", "D", "E"];
    let h = Hypergraph::new([vec!["A", "B", "C"], vec!["C", "D"], vec!["D", "E"], vec!["A", "E"]]).unwrap();
    let dags = all_dags(&names);
    assert_eq!(dags.len(), 29_281);
    let compatible: Vec<&Dag> = dags.iter().filter(|d| d.compatible(&h)).collect();
    let found = enumerate_compatible_dags(&h, 100).unwrap();
    assert_eq!(compatible.len(), found.len());
    assert!(compatible.iter().all(|d| found.contains(d)));
    assert!(!dags
        .iter()
        .any(|d| (d.has_arc("A", "C") || d.has_arc("C", "A")) && d.compatible(&h)));
}
