use criterion::{criterion_group, criterion_main, Criterion};
use ddchaos::chaos::{clause_sets, eval_condition, ConditionSpec, DensityRule};
use ddchaos::indexset::{full_density_partition, partition_block_ends};
use ddchaos::operators::{BlockWeights, WeightSequence};
use ddchaos::space::luxemburg_norm;
use ddchaos::{PieceSet, SeqVector, YoungFunction};
use std::hint::black_box;

fn prefix_level_sets(c: &mut Criterion) {
    let b = BlockWeights::squares_of_two(3).unwrap();
    let h = b.total_length().unwrap();
    c.bench_function("prefix_level_set to S_3", |bn| {
        bn.iter(|| b.prefix_level_set(&|m| ((m + 1) as f64).log2(), 1, black_box(h)))
    });
}

fn set_algebra(c: &mut Criterion) {
    let h = (1..=7u32).map(|i| 1u64 << (i * i)).sum();
    let parts: Vec<PieceSet> = full_density_partition(3, 2, h)
        .unwrap()
        .iter()
        .map(|p| p.to_piece_set())
        .collect();
    let odd = PieceSet::residue_class(1, 2, Some(h)).unwrap();
    c.bench_function("block ∩ residue class", |bn| {
        bn.iter(|| parts[0].intersect(black_box(&odd)).unwrap())
    });
    let rule = DensityRule::checkpoints(
        partition_block_ends(2, h).into_iter().skip(2).collect(),
        0.1,
    );
    c.bench_function("profile at block ends", |bn| {
        bn.iter(|| rule.judge("p", black_box(&parts[1])).unwrap())
    });
}

fn windows_and_norms(c: &mut Criterion) {
    let w = WeightSequence::Geometric { j: 2 };
    c.bench_function("ln_window 10^3 terms", |bn| {
        bn.iter(|| w.ln_window(black_box(17), 1000))
    });
    let f = SeqVector::from_dense(&(1..=200).map(|i| 1.0 / i as f64).collect::<Vec<_>>());
    let phi = YoungFunction::Power { p: 3.0 };
    c.bench_function("luxemburg bisection, 200 entries", |bn| {
        bn.iter(|| luxemburg_norm(black_box(&f), &phi, 1e-12).unwrap())
    });
}

fn condition_eval(c: &mut Criterion) {
    let values: Vec<Vec<f64>> = (0..3)
        .map(|j| {
            (0..5000)
                .map(|k| ((k * (j + 3)) % 7) as f64 / 3.0)
                .collect()
        })
        .collect();
    let t = ddchaos::chaos::TraceMatrix::new(
        values,
        vec![5000],
        ddchaos::chaos::SelectionMode::SingleValued,
    )
    .unwrap();
    let rule = DensityRule::checkpoints(vec![5000], 0.1);
    c.bench_function("twelve conditions on a 3×5000 trace", |bn| {
        bn.iter(|| {
            let s = clause_sets(&t, 1.0, 0.5).unwrap();
            ConditionSpec::all()
                .into_iter()
                .map(|sp| eval_condition(sp, &s, &rule).unwrap().holds)
                .filter(|h| *h)
                .count()
        })
    });
}

criterion_group!(
    benches,
    prefix_level_sets,
    set_algebra,
    windows_and_norms,
    condition_eval
);
criterion_main!(benches);
