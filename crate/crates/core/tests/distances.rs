mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{sample_pair, taxa};
use netdist_core::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SearchOptions {
    SearchOptions::default()
}

fn trees(a: &str, b: &str) -> (PhyloNetwork, PhyloNetwork) {
    let x = parse_enewick(a).unwrap();
    let y = parse_enewick_with_taxa(b, x.taxa()).unwrap();
    (x, y)
}

fn sequence_of(r: &DistanceResult) -> &RearrangementSequence {
    match &r.witness {
        Witness::Sequence(s) => s,
        Witness::Agreement(_) => panic!("expected a sequence"),
    }
}

/// Attaches every sprout of `g` to a random place: remnants and isolated
/// labelled vertices take a sprout of the matching orientation, the other
/// sprouts subdivide random edges. The result need not be related to the
/// network `g` came from, so `g` is an agreement graph of the pair but in
/// general not a maximum one.
fn reglue(g: &PrunedGraph, taxa: &Arc<TaxaSet>, rng: &mut ChaCha8Rng) -> Option<PhyloNetwork> {
    let nv = g.vertex_count();
    let (mut tails, mut heads, mut need_t, mut need_h) = (vec![], vec![], vec![], vec![]);
    for v in g.vertices() {
        match g.class(v) {
            VertexClass::TailSprout => tails.push(v.index()),
            VertexClass::HeadSprout => heads.push(v.index()),
            VertexClass::MergeRemnant => need_t.push(v.index()),
            VertexClass::SplitRemnant => need_h.push(v.index()),
            VertexClass::Root if g.is_isolated_labelled(v) => need_t.push(v.index()),
            VertexClass::Leaf(_) if g.is_isolated_labelled(v) => need_h.push(v.index()),
            _ => {}
        }
    }
    if tails.len() < need_t.len() || heads.len() < need_h.len() {
        return None;
    }
    tails.shuffle(rng);
    heads.shuffle(rng);
    let mut rep: Vec<usize> = (0..nv).collect();
    for (i, &x) in need_t.iter().enumerate() {
        rep[tails[i]] = x;
    }
    for (i, &x) in need_h.iter().enumerate() {
        rep[heads[i]] = x;
    }
    let free: Vec<usize> = tails[need_t.len()..]
        .iter()
        .chain(&heads[need_h.len()..])
        .copied()
        .collect();
    let own = |s: usize| {
        g.edges()
            .find(|&e| {
                let (a, b) = g.endpoints(e);
                a.index() == s || b.index() == s
            })
            .unwrap()
            .index()
    };
    let mut lists: Vec<Vec<usize>> = vec![vec![]; g.edge_count()];
    for &s in &free {
        let choices: Vec<usize> = (0..g.edge_count()).filter(|&e| e != own(s)).collect();
        let e = *choices.choose(rng)?;
        let pos = rng.gen_range(0..=lists[e].len());
        lists[e].insert(pos, s);
    }
    let mut labels = vec![];
    let mut hv = vec![u32::MAX; nv];
    for v in 0..nv {
        if rep[v] == v {
            hv[v] = labels.len() as u32;
            labels.push(g.label(VertexId(v as u32)));
        }
    }
    for v in 0..nv {
        if rep[v] != v {
            hv[v] = hv[rep[v]];
        }
    }
    let mut edges = vec![];
    for e in g.edges() {
        let (a, b) = g.endpoints(e);
        let mut pts = vec![hv[a.index()]];
        pts.extend(lists[e.index()].iter().map(|&s| hv[s]));
        pts.push(hv[b.index()]);
        edges.extend(pts.windows(2).map(|w| (w[0], w[1])));
    }
    PhyloNetwork::new(taxa.clone(), labels, edges).ok()
}

/// A random pair with a certified agreement graph of `s` sprouts and `l`
/// disagreement edges, built by pruning one network and regluing.
fn reglued_instance(
    n: usize,
    seed: u64,
) -> Option<(PhyloNetwork, PhyloNetwork, AgreementDistance)> {
    let t = taxa(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&t, rng.gen_range(0..=2), seed);
    let mut g = PrunedGraph::from_network(&net);
    for _ in 0..rng.gen_range(0..=4) {
        let ps = enumerate_prunings(&g);
        g = apply_pruning(&g, *ps.choose(&mut rng)?).ok()?;
    }
    let mut labels: Vec<Option<Label>> = g.vertices().map(|v| g.label(v)).collect();
    let mut edges: Vec<(u32, u32)> = g
        .edges()
        .map(|e| {
            let (a, b) = g.endpoints(e);
            (a.0, b.0)
        })
        .collect();
    let mut dis = vec![];
    for _ in 0..rng.gen_range(0..=2) {
        let a = labels.len() as u32;
        labels.extend([None, None]);
        dis.push(EdgeId(edges.len() as u32));
        edges.push((a, a + 1));
    }
    let full = PrunedGraph::from_raw(t.clone(), labels, edges).ok()?;
    let np = (0..200).find_map(|_| reglue(&full, &t, &mut rng))?;
    let ag = AgreementGraph::new(full.clone(), dis).ok()?;
    let cert = certify_agreement_graph(&ag, &net, &np).ok()??;
    assert!(verify_agreement_witness(&ag, &net, &np, &cert).ok);
    let (s, l) = (ag.s(), ag.l());
    Some((
        net,
        np,
        AgreementDistance {
            d: s + l,
            s,
            l,
            graph: ag,
            embedding_n: cert.embedding_n,
            embedding_nprime: cert.embedding_nprime,
        },
    ))
}

fn check_build(n: &PhyloNetwork, np: &PhyloNetwork, m: &AgreementDistance) -> BuildTrace {
    let t = build_pr_sequence(n, np, m)
        .unwrap_or_else(|e| panic!("{e}\n{}\n{}", write_enewick(n), write_enewick(np)));
    let rep = verify_sequence(&t.sequence);
    assert!(rep.ok, "{rep}");
    assert_eq!(t.sequence.start.canonical_key(), n.canonical_key());
    assert_eq!(t.sequence.end, np.canonical_key());
    assert_eq!(
        t.sequence.last_network().unwrap().canonical_key(),
        np.canonical_key()
    );
    assert!(t.sequence.len() <= 3 * m.d);
    assert!(t.credits.iter().all(|&c| c <= 3));
    t
}

#[test]
fn distance_examples() {
    let (a, b) = trees("((1,2),3);", "((1,3),2);");
    for f in [pr_distance, snpr_distance, rspr_distance] {
        assert_eq!(f(&a, &a, opts()).unwrap().value, 0);
        let r = f(&a, &b, opts()).unwrap();
        assert_eq!(r.value, 1);
        assert!(verify_sequence(sequence_of(&r)).ok);
    }
    let plus = enumerate_ops(&a, OpSet::Pr)
        .into_iter()
        .find(|o| o.kind() == OpKind::PrPlus)
        .unwrap();
    let c = apply_op(&a, &plus).unwrap();
    let tail = enumerate_neighbors(&c, OpSet::Pr)
        .into_iter()
        .filter(|nb| nb.op.kind() == OpKind::Pr0Tail)
        .find(|nb| agreement_distance(&a, &nb.network).unwrap().d == 2)
        .expect("some tail move takes the addition two away");
    let r = pr_distance(&a, &tail.network, opts()).unwrap();
    assert_eq!(r.value, 2);
    assert!(rspr_distance(&a, &c, opts()).is_err());
}

#[test]
fn rspr_agrees_with_agreement_distance_on_caterpillars() {
    let (a, b) = trees("(((1,2),3),4);", "(((3,4),1),2);");
    let r = rspr_distance(&a, &b, opts()).unwrap().value;
    assert_eq!(r, agreement_distance(&a, &b).unwrap().d);
    assert_eq!(r, 2);
}

#[test]
fn cap_is_checked_and_flagged() {
    let (a, _) = trees("((1,2),3);", "((1,3),2);");
    let plus = enumerate_ops(&a, OpSet::Pr)
        .into_iter()
        .find(|o| o.kind() == OpKind::PrPlus)
        .unwrap();
    let c = apply_op(&a, &plus).unwrap();
    let capped = SearchOptions {
        cap: Some(0),
        ..opts()
    };
    assert!(matches!(
        pr_distance(&a, &c, capped),
        Err(DistanceError::CapTooSmall { .. })
    ));
    let r = pr_distance(
        &a,
        &c,
        SearchOptions {
            cap: Some(1),
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(r.value, 1);
}

#[test]
fn verify_sequence_rules() {
    let (a, b) = trees("((1,2),3);", "((1,3),2);");
    let r = pr_distance(&a, &b, opts()).unwrap();
    let mut seq = sequence_of(&r).clone();
    assert!(verify_sequence(&seq).ok);
    if let RearrangementOp::Pr0Tail { target, .. } = &mut seq.steps[0].op {
        *target = EdgeId(99);
    }
    let rep = verify_sequence(&seq);
    assert!(!rep.ok);
    assert!(rep.violations[0].detail.starts_with("step 0"), "{rep}");
    let empty = RearrangementSequence {
        end: b.canonical_key(),
        ..RearrangementSequence::empty(a.clone(), OpSet::Pr)
    };
    assert!(verify_sequence(&empty).has_rule("endpoint"));
}

#[test]
fn snpr_conversion_examples() {
    let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
    let heads: Vec<_> = enumerate_ops(&n, OpSet::Pr)
        .into_iter()
        .filter(|o| o.kind() == OpKind::Pr0Head)
        .collect();
    assert!(!heads.is_empty());
    for op in heads {
        let seq = RearrangementSequence::from_ops(n.clone(), OpSet::Pr, &[op]).unwrap();
        let s = pr_to_snpr_sequence(&seq).unwrap();
        assert!(verify_sequence(&s).ok);
        assert_eq!(s.ops, OpSet::Snpr);
        assert_eq!(s.end, seq.end);
        assert!(s.len() <= 2);
        if s.len() == 2 {
            assert_eq!(s.steps[0].op.kind(), OpKind::PrPlus);
            assert_eq!(s.steps[1].op.kind(), OpKind::PrMinus);
        }
    }
    let tails: Vec<_> = enumerate_ops(&n, OpSet::Snpr).into_iter().take(3).collect();
    let seq = RearrangementSequence::from_ops(n.clone(), OpSet::Pr, &tails[..1]).unwrap();
    let s = pr_to_snpr_sequence(&seq).unwrap();
    assert_eq!(
        s.steps.iter().map(|x| x.op).collect::<Vec<_>>(),
        vec![tails[0]]
    );
}

#[test]
fn builder_examples() {
    let (a, b) = trees("(((1,2),3),4);", "(((1,3),2),4);");
    let same = agreement_distance(&a, &a).unwrap();
    assert!(build_pr_sequence(&a, &a, &same)
        .unwrap()
        .sequence
        .is_empty());
    let m = agreement_distance(&a, &b).unwrap();
    assert_eq!(m.d, 1);
    let t = check_build(&a, &b, &m);
    assert_eq!(t.sequence.len(), 1);
    assert!(t.cases.iter().all(|c| c.case == "A"));
    assert!(mag_to_pr_sequence(&a, &b, &m).is_ok());
    let foreign = agreement_distance(&b, &a).unwrap();
    let c = parse_enewick_with_taxa("(((2,3),1),4);", a.taxa()).unwrap();
    assert!(build_pr_sequence(&a, &c, &foreign).is_err());
}

#[test]
fn builder_on_maximum_agreement_graphs() {
    for seed in 0..60 {
        let (n, np) = sample_pair(4, 2, seed);
        let m = agreement_distance(&n, &np).unwrap();
        check_build(&n, &np, &m);
    }
}

#[test]
fn builder_on_reglued_agreement_graphs() {
    let mut cases: BTreeMap<&str, usize> = BTreeMap::new();
    let mut built = 0;
    for seed in 0..1000 {
        let Some((n, np, m)) = reglued_instance(7, seed) else {
            continue;
        };
        let swapped = AgreementDistance {
            embedding_n: m.embedding_nprime.clone(),
            embedding_nprime: m.embedding_n.clone(),
            ..m.clone()
        };
        for (a, b, w) in [(&n, &np, &m), (&np, &n, &swapped)] {
            for c in check_build(a, b, w).cases {
                *cases.entry(c.case).or_default() += 1;
            }
            built += 1;
        }
    }
    println!("cases {cases:?}");
    assert!(built > 1000, "{built}");
    for case in ["A", "A'", "B", "C'", "C''", "D", "D'"] {
        assert!(cases.get(case).copied().unwrap_or(0) > 0, "{cases:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tree_distances_coincide(n in 2usize..=5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_tree(&taxa(n), s1);
        let b = random_tree(&taxa(n), s2);
        let r = rspr_distance(&a, &b, opts()).unwrap().value;
        prop_assert_eq!(pr_distance(&a, &b, opts()).unwrap().value, r);
        prop_assert_eq!(snpr_distance(&a, &b, opts()).unwrap().value, r);
    }

    #[test]
    fn search_witnesses_replay(seed in any::<u64>()) {
        let (a, b) = sample_pair(3, 2, seed);
        for f in [pr_distance, snpr_distance] {
            let r = f(&a, &b, opts()).unwrap();
            let seq = sequence_of(&r);
            prop_assert!(verify_sequence(seq).ok);
            prop_assert_eq!(seq.len(), r.value);
            prop_assert_eq!(&seq.end, &b.canonical_key());
        }
    }

    #[test]
    fn zero_distance_iff_isomorphic(seed in any::<u64>()) {
        let (a, b) = sample_pair(3, 1, seed);
        let d = pr_distance(&a, &b, opts()).unwrap().value;
        prop_assert_eq!(d == 0, a.canonical_key() == b.canonical_key());
    }
}
