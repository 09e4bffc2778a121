use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netdist_bench::pairs;
use netdist_core::{
    agreement_distance, enumerate_neighbors, parse_enewick_with_taxa, pr_distance, write_enewick,
    Canonical, OpSet, SearchOptions,
};

fn canonical(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonical_key");
    for (n, r) in [(6, 0), (6, 2), (10, 3)] {
        let ps = pairs(n, r, 8);
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}r{r}")),
            &ps,
            |b, ps| b.iter(|| ps.iter().map(|(x, _)| black_box(x.canonical_key())).count()),
        );
    }
    g.finish();
}

fn enewick(c: &mut Criterion) {
    let ps = pairs(12, 3, 8);
    let texts: Vec<String> = ps.iter().map(|(x, _)| write_enewick(x)).collect();
    let taxa = ps[0].0.taxa().clone();
    c.bench_function("write_enewick n12r3", |b| {
        b.iter(|| {
            ps.iter()
                .map(|(x, _)| write_enewick(black_box(x)).len())
                .sum::<usize>()
        })
    });
    c.bench_function("parse_enewick n12r3", |b| {
        b.iter(|| {
            texts
                .iter()
                .map(|t| {
                    parse_enewick_with_taxa(black_box(t), &taxa)
                        .unwrap()
                        .edge_count()
                })
                .sum::<usize>()
        })
    });
}

fn neighbours(c: &mut Criterion) {
    let mut g = c.benchmark_group("neighbours");
    let ps = pairs(6, 2, 4);
    for ops in [OpSet::Pr, OpSet::Snpr] {
        g.bench_with_input(BenchmarkId::from_parameter(ops.name()), &ps, |b, ps| {
            b.iter(|| {
                ps.iter()
                    .map(|(x, _)| enumerate_neighbors(x, ops).len())
                    .sum::<usize>()
            })
        });
    }
    g.finish();
}

fn distances(c: &mut Criterion) {
    let mut g = c.benchmark_group("distance");
    g.sample_size(10);
    for (n, r) in [(3, 1), (4, 1), (4, 2)] {
        let ps = pairs(n, r, 4);
        let id = format!("n{n}r{r}");
        g.bench_with_input(BenchmarkId::new("agreement", &id), &ps, |b, ps| {
            b.iter(|| {
                ps.iter()
                    .map(|(x, y)| agreement_distance(x, y).unwrap().d)
                    .sum::<usize>()
            })
        });
        g.bench_with_input(BenchmarkId::new("pr", &id), &ps, |b, ps| {
            b.iter(|| {
                ps.iter()
                    .map(|(x, y)| pr_distance(x, y, SearchOptions::default()).unwrap().value)
                    .sum::<usize>()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, canonical, enewick, neighbours, distances);
criterion_main!(benches);
