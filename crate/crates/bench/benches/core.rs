use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use csst_bench::word_batch;
use csst_core::decompose::{decompose, StopRule};
use csst_core::excursion::{contour_tree, crt_tree, sample_excursion};
use csst_core::geodesic::geodesic_distance;
use csst_core::ifs::{address_point, jn_segments};
use csst_core::tree::from_segments;

fn bench_coding_map(c: &mut Criterion) {
    let words = word_batch(256, 1);
    c.bench_function("address_point/256 words", |b| {
        b.iter(|| {
            for w in &words {
                black_box(address_point(w).unwrap());
            }
        })
    });
}

fn bench_geodesic(c: &mut Criterion) {
    let words = word_batch(128, 2);
    c.bench_function("geodesic_distance/64 pairs", |b| {
        b.iter(|| {
            for pair in words.chunks(2) {
                black_box(geodesic_distance(&pair[0], &pair[1]).unwrap());
            }
        })
    });
}

fn bench_segments(c: &mut Criterion) {
    c.bench_function("jn_segments/depth 8", |b| {
        b.iter(|| black_box(jn_segments(8).len()))
    });
    let segs = jn_segments(8);
    c.bench_function("from_segments/depth 8", |b| {
        b.iter(|| black_box(from_segments(&segs).unwrap().vertex_count()))
    });
}

fn bench_decompose(c: &mut Criterion) {
    let tree = from_segments(&jn_segments(7)).unwrap();
    c.bench_function("decompose/depth-7 segment tree to depth 3", |b| {
        b.iter(|| black_box(decompose(&tree, 3, &StopRule::depth(3)).unwrap().tiles.len()))
    });
}

fn bench_excursion(c: &mut Criterion) {
    c.bench_function("sample_excursion/2^14", |b| {
        b.iter(|| black_box(sample_excursion(1 << 14, 7).unwrap().values.len()))
    });
    let e = sample_excursion(1 << 14, 7).unwrap();
    let marks: Vec<usize> = (1..500).map(|i| i * 32).collect();
    c.bench_function("contour_tree/500 marks on 2^14 grid", |b| {
        b.iter_batched(
            || marks.clone(),
            |m| black_box(contour_tree(&e, &m).unwrap().tree.vertex_count()),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("crt_tree/2^14 grid, 500 marks", |b| {
        b.iter(|| black_box(crt_tree(1 << 14, 500, 3).unwrap().tree.vertex_count()))
    });
}

criterion_group!(
    benches,
    bench_coding_map,
    bench_geodesic,
    bench_segments,
    bench_decompose,
    bench_excursion
);
criterion_main!(benches);
