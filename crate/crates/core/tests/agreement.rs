mod common;

use std::collections::{HashMap, HashSet};

use common::{embedding_holds, sample_pair, taxa, Raw};
use netdist_core::*;
use proptest::prelude::*;

fn holds(e: &AgreementEmbedding) -> bool {
    embedding_holds(&e.guest, &e.host, &e.vertex_map, &e.edge_map)
}

/// Prunings legal by definition: the pruned-at vertex is labelled or has
/// degree three.
fn legal_prunings(g: &PrunedGraph) -> HashSet<(u32, bool)> {
    let raw = Raw::of_pruned(g);
    let mut deg = vec![0usize; raw.labels.len()];
    for &(a, b) in &raw.edges {
        deg[a as usize] += 1;
        deg[b as usize] += 1;
    }
    let ok = |v: u32| raw.labels[v as usize].is_some() || deg[v as usize] == 3;
    let mut out = HashSet::new();
    for (e, &(a, b)) in raw.edges.iter().enumerate() {
        if ok(a) {
            out.insert((e as u32, true));
        }
        if ok(b) {
            out.insert((e as u32, false));
        }
    }
    out
}

fn as_pairs(ps: &[Pruning]) -> HashSet<(u32, bool)> {
    ps.iter()
        .map(|p| (p.edge.0, p.end == PruneEnd::Tail))
        .collect()
}

/// All graphs reachable by exactly `k` prunings, for `k = 0..=depth`, by
/// key.
fn pruning_levels(n: &PhyloNetwork, depth: usize) -> Vec<HashMap<CanonicalKey, PrunedGraph>> {
    let start = PrunedGraph::from_network(n);
    let mut levels = vec![HashMap::from([(start.canonical_key(), start)])];
    for _ in 0..depth {
        let mut next = HashMap::new();
        for g in levels.last().unwrap().values() {
            for p in enumerate_prunings(g) {
                let h = apply_pruning(g, p).unwrap();
                next.entry(h.canonical_key()).or_insert(h);
            }
        }
        levels.push(next);
    }
    levels
}

fn swap_taxa(g: &PrunedGraph, a: u32, b: u32) -> PrunedGraph {
    let raw = Raw::of_pruned(g);
    let labels = raw
        .labels
        .iter()
        .map(|l| match l {
            Some(Label::Taxon(t)) if *t == a => Some(Label::Taxon(b)),
            Some(Label::Taxon(t)) if *t == b => Some(Label::Taxon(a)),
            other => *other,
        })
        .collect();
    PrunedGraph::from_raw(g.taxa().clone(), labels, raw.edges).unwrap()
}

#[test]
fn pruning_examples() {
    let t = parse_enewick("((1,2),3);").unwrap();
    let g = PrunedGraph::from_network(&t);
    let leaf1 = t.leaf(0).unwrap();
    let pendant = t.in_edges(leaf1).next().unwrap();
    let p = apply_pruning(&g, Pruning::at_tail(pendant)).unwrap();
    assert_eq!(p.sprout_count(), 1);
    let (count, comp) = p.components();
    assert_eq!(count, 2);
    let l1 = p
        .vertices()
        .find(|&v| p.label(v) == Some(Label::Taxon(0)))
        .unwrap();
    let sprout = p.vertices().find(|&v| p.is_sprout(v)).unwrap();
    assert_eq!(comp[l1.index()], comp[sprout.index()]);
    assert_eq!(comp.iter().filter(|&&c| c == comp[l1.index()]).count(), 2);
    assert!(p.validate().ok);

    let top = t.out_edges(t.root()).next().unwrap();
    let q = apply_pruning(&g, Pruning::at_tail(top)).unwrap();
    assert_eq!(q.sprout_count(), 1);
    let root = q
        .vertices()
        .find(|&v| q.label(v) == Some(Label::Root))
        .unwrap();
    assert!(q.is_isolated_labelled(root));

    let q = apply_pruning(&g, Pruning::at_head(top)).unwrap();
    let remnant = q
        .vertices()
        .find(|&v| q.class(v) == VertexClass::SplitRemnant)
        .expect("the root child is left with two children and no parent");
    let e = q.out_edges(remnant).next().unwrap();
    let once = q;
    let end = PruneEnd::Tail;
    assert!(apply_pruning(&once, Pruning { edge: e, end }).is_err());
}

#[test]
fn pruning_enumeration_matches_definition() {
    let leaf = PhyloNetwork::single_leaf(taxa(1), 0);
    assert_eq!(
        enumerate_prunings(&PrunedGraph::from_network(&leaf)).len(),
        2
    );
    for seed in 0..40 {
        let (n, _) = sample_pair(4, 2, seed);
        for g in pruning_levels(&n, 2).iter().flat_map(|l| l.values()) {
            let ps = enumerate_prunings(g);
            assert_eq!(as_pairs(&ps), legal_prunings(g));
            for p in ps {
                let h = apply_pruning(g, p).unwrap();
                assert_eq!(h.sprout_count(), g.sprout_count() + 1);
                assert!(h.validate().ok);
                let labels =
                    |x: &PrunedGraph| x.vertices().filter(|&v| x.label(v).is_some()).count();
                assert_eq!(labels(&h), labels(g));
            }
        }
    }
}

#[test]
fn pruned_graphs_embed_exactly_when_derivable() {
    let mut positives = 0;
    let mut negatives = 0;
    for n in 1..=3 {
        let space = NetworkSpace::build(&taxa(n), 1);
        for net in &space.networks {
            let levels = pruning_levels(net, 3);
            for (k, level) in levels.iter().enumerate() {
                for g in level.values() {
                    let e = find_agreement_embedding(g, net).expect("derivable graphs embed");
                    assert!(verify_agreement_embedding(&e).ok);
                    assert!(holds(&e));
                    positives += 1;
                    if n < 2 {
                        continue;
                    }
                    let s = swap_taxa(g, 0, 1);
                    let derivable = levels[k].contains_key(&s.canonical_key());
                    let found = find_agreement_embedding(&s, net);
                    assert_eq!(
                        found.is_some(),
                        derivable,
                        "{} level {k}",
                        write_enewick(net)
                    );
                    if let Some(e) = found {
                        assert!(holds(&e));
                    } else {
                        negatives += 1;
                    }
                }
            }
        }
    }
    assert!(
        positives > 1000 && negatives > 100,
        "{positives} {negatives}"
    );
}

#[test]
fn distinct_trees_do_not_embed_into_each_other() {
    let a = parse_enewick("((1,2),3);").unwrap();
    let b = parse_enewick_with_taxa("((1,3),2);", a.taxa()).unwrap();
    assert!(find_agreement_embedding(&PrunedGraph::from_network(&a), &b).is_none());
    let id = find_agreement_embedding(&PrunedGraph::from_network(&a), &a).unwrap();
    assert!(holds(&id));
}

#[test]
fn broken_witnesses_are_reported() {
    let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
    let e = find_agreement_embedding(&PrunedGraph::from_network(&n), &n).unwrap();
    assert!(verify_agreement_embedding(&e).ok);
    let m = e.edge_map.len();
    // Move the last host edge of one path onto another path.
    let mut cut = e.clone();
    let dropped = cut.edge_map[0].pop().unwrap();
    cut.edge_map[1 % m].push(dropped);
    let rep = verify_agreement_embedding(&cut);
    assert!(!rep.ok);
    assert!(!holds(&cut));
    let mut twice = e.clone();
    twice.edge_map[1 % m].push(dropped);
    assert!(verify_agreement_embedding(&twice).has_rule("cover"));

    let top = n.out_edges(n.root()).next().unwrap();
    let pruned = apply_pruning(&PrunedGraph::from_network(&n), Pruning::at_tail(top)).unwrap();
    let e = find_agreement_embedding(&pruned, &n).unwrap();
    assert!(holds(&e));
    let inner: Vec<usize> = (0..pruned.vertex_count())
        .filter(|&v| pruned.class(VertexId(v as u32)) == VertexClass::Tree)
        .collect();
    let mut clash = e.clone();
    clash.vertex_map[inner[0]] = clash.vertex_map[inner[1]];
    let rep = verify_agreement_embedding(&clash);
    assert!(rep.has_rule("collision"), "{rep}");
    assert!(!holds(&clash));
}

#[test]
fn embedding_change_round_trips() {
    let t = parse_enewick("(((1,2),3),4);").unwrap();
    let g = PrunedGraph::from_network(&t);
    let pendant = |g: &PrunedGraph, taxon: u32| {
        let leaf = g
            .vertices()
            .find(|&v| g.label(v) == Some(Label::Taxon(taxon)))
            .unwrap();
        g.in_edges(leaf).next().unwrap()
    };
    let once = apply_pruning(&g, Pruning::at_tail(pendant(&g, 0))).unwrap();
    let guest = apply_pruning(&once, Pruning::at_tail(pendant(&once, 2))).unwrap();
    let mut changed = 0;
    for host_seed in 0..30 {
        let host = random_tree(t.taxa(), host_seed);
        let Some(e) = find_agreement_embedding(&guest, &host) else {
            continue;
        };
        let sprouts: Vec<VertexId> = guest.vertices().filter(|&v| guest.is_sprout(v)).collect();
        for &u in &sprouts {
            for &v in &sprouts {
                let Ok(f) = embedding_change(&e, u, v) else {
                    continue;
                };
                assert!(verify_agreement_embedding(&f).ok);
                assert!(holds(&f));
                let back = embedding_change(&f, v, u).unwrap();
                assert_eq!(back.edge_map, e.edge_map);
                assert_eq!(back.vertex_map, e.vertex_map);
                changed += 1;
            }
        }
        let root = guest
            .vertices()
            .find(|&v| guest.label(v) == Some(Label::Root))
            .unwrap();
        assert!(embedding_change(&e, sprouts[0], root).is_err());
    }
    assert!(changed > 0);
}

#[test]
fn agreement_distance_examples() {
    let a = parse_enewick("((1,2),3);").unwrap();
    let b = parse_enewick_with_taxa("((1,3),2);", a.taxa()).unwrap();
    assert_eq!(agreement_distance(&a, &a).unwrap().d, 0);
    assert_eq!(agreement_distance(&a, &b).unwrap().d, 1);
    let plus = enumerate_ops(&a, OpSet::Pr)
        .into_iter()
        .find(|o| o.kind() == OpKind::PrPlus)
        .unwrap();
    let c = apply_op(&a, &plus).unwrap();
    let m = agreement_distance(&a, &c).unwrap();
    assert_eq!((m.d, m.s, m.l), (1, 0, 1));
    let other = parse_enewick("((1,2),4);").unwrap();
    assert!(agreement_distance(&a, &other).is_err());
}

#[test]
fn agreement_graph_membership() {
    let n = parse_enewick("(((1,2),3),4);").unwrap();
    let g = PrunedGraph::from_network(&n);
    let ag = AgreementGraph::new(g.clone(), vec![]).unwrap();
    assert!(is_agreement_graph(&ag, &n, &n).unwrap());
    // Leaf 1 cut off at its tail can be regrafted onto any of five edges.
    let leaf = n.in_edges(n.leaf(0).unwrap()).next().unwrap();
    let top = n.out_edges(n.root()).next().unwrap();
    for (pruning, expected) in [(Pruning::at_tail(leaf), 5), (Pruning::at_tail(top), 1)] {
        let g1 = apply_pruning(&g, pruning).unwrap();
        let ag = AgreementGraph::new(g1, vec![]).unwrap();
        let mut found = 0;
        for np in enumerate_trees(n.taxa()) {
            if let Some(c) = certify_agreement_graph(&ag, &n, &np).unwrap() {
                assert!(verify_agreement_witness(&ag, &n, &np, &c).ok);
                assert!(holds(&c.embedding_n) && holds(&c.embedding_nprime));
                found += 1;
            }
        }
        assert_eq!(found, expected);
    }
    // Missing a taxon: a graph over a smaller taxa set.
    let small = parse_enewick("((1,2),3);").unwrap();
    let ag = AgreementGraph::new(PrunedGraph::from_network(&small), vec![]).unwrap();
    assert!(!is_agreement_graph(&ag, &n, &n).unwrap());
}

#[test]
fn witnesses_are_certified_and_normal() {
    for seed in 0..40 {
        let (n, np) = sample_pair(4, 2, seed);
        let m = agreement_distance(&n, &np).unwrap();
        assert_eq!(m.d, m.s + m.l);
        assert_eq!(
            m.l,
            n.reticulation_count().abs_diff(np.reticulation_count())
        );
        assert_eq!(m.s, m.graph.s());
        let cert = AgreementCertificate {
            embedding_n: m.embedding_n.clone(),
            embedding_nprime: m.embedding_nprime.clone(),
        };
        assert!(verify_agreement_witness(&m.graph, &n, &np, &cert).ok);
        assert!(holds(&m.embedding_n) && holds(&m.embedding_nprime));
        let (rich, e) = if n.reticulation_count() <= np.reticulation_count() {
            (&np, &m.embedding_nprime)
        } else {
            (&n, &m.embedding_n)
        };
        let norm = normalize_embedding(&m.graph, rich, e).unwrap();
        assert!(verify_agreement_embedding(&norm).ok);
        assert!(normal_form_violations(&m.graph, &norm).ok);
        if m.l == 0 {
            assert_eq!(norm.edge_map, e.edge_map);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn agreement_distance_is_symmetric(seed in any::<u64>()) {
        let (a, b) = sample_pair(4, 1, seed);
        let ab = agreement_distance(&a, &b).unwrap();
        let ba = agreement_distance(&b, &a).unwrap();
        prop_assert_eq!(ab.d, ba.d);
        prop_assert_eq!(ab.d == 0, a.canonical_key() == b.canonical_key());
    }

    #[test]
    fn prunings_add_one_sprout_each(seed in any::<u64>(), picks in proptest::collection::vec(any::<usize>(), 0..5)) {
        let (n, _) = sample_pair(5, 2, seed);
        let mut g = PrunedGraph::from_network(&n);
        for (k, pick) in picks.iter().enumerate() {
            let ps = enumerate_prunings(&g);
            if ps.is_empty() { break; }
            g = apply_pruning(&g, ps[pick % ps.len()]).unwrap();
            prop_assert_eq!(g.sprout_count(), k + 1);
            prop_assert!(g.validate().ok);
            let e = find_agreement_embedding(&g, &n);
            prop_assert!(e.as_ref().map(holds).unwrap_or(false));
        }
    }
}
