//! Acceptance criteria 1–16, one PASS/FAIL line each. Exits non-zero when any criterion fails.

use std::process::Command;

use ddchaos::chaos::{
    diagonal_equivalence, lattice_consistency, ClauseSets, DensityRule, SelectionMode, TraceMatrix,
};
use ddchaos::criteria::{
    chain_recursion, deinterleave, interleave_index, q_density_criterion, Chain,
};
use ddchaos::indexset::{exact_upper_density, q_set};
use ddchaos::operators::{
    b_jk, backward_shift_power, generalized_backward_apply, regularized_power_apply, JumpShift,
    Regularizer, WeightSequence,
};
use ddchaos::space::{
    complementary_young, luxemburg_norm, metric_properties_check, product_metric_max,
    product_metric_sum,
};
use ddchaos::{Density, ExactSet, IndexDomain, Point, SeminormSpace, SeqVector, YoungFunction};
use ddchaos_cli::scenarios::{find, registry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Check);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(r: &mut ChaCha8Rng, max_index: i64) -> SeqVector {
    let n = r.gen_range(0..=6);
    SeqVector::from_pairs(
        IndexDomain::Natural,
        (0..n).map(|_| (r.gen_range(1..=max_index), r.gen_range(-3.0..3.0))),
    )
    .expect("natural indices")
}

/// Runs a registered scenario with its defaults; returns whether every claim matched and the mismatches.
fn scenario(name: &str) -> Result<(bool, Vec<String>), String> {
    let s = find(name).ok_or(format!("{name} not registered"))?;
    let out = (s.run)(&(s.defaults)()).map_err(|e| format!("{name}: {e}"))?;
    let bad = out
        .claims
        .iter()
        .filter(|c| !c.matches)
        .map(|c| format!("{name}: {}", c.claim))
        .collect();
    Ok((out.all_match(), bad))
}

fn scenarios_all_match(names: &[&str]) -> Check {
    let mut bad = Vec::new();
    for n in names {
        bad.extend(scenario(n)?.1);
    }
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            format!("every claim reproduces ({})", names.join(", "))
        } else {
            bad.join("; ")
        },
    ))
}

fn metric_sandwich() -> Check {
    let space = SeminormSpace::frechet(IndexDomain::Natural);
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for n in [2usize, 3, 5] {
        for _ in 0..1000 {
            let xs: Vec<SeqVector> = (0..n).map(|_| random_vector(&mut r, 8)).collect();
            let ys: Vec<SeqVector> = (0..n).map(|_| random_vector(&mut r, 8)).collect();
            let dists = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| space.distance(&Point::Seq(x.clone()), &Point::Seq(y.clone()), 1e-13))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let dmax = product_metric_max(&dists).map_err(|e| e.to_string())?;
            let d = product_metric_sum(&space, &xs, &ys, 1e-13).map_err(|e| e.to_string())?;
            let slack = 1e-9 * d.max(dmax).max(1e-300);
            if dmax > d + slack || d > (n * n) as f64 * dmax + slack {
                return Ok((false, format!("N = {n}: d_max = {dmax}, d = {d}")));
            }
            if dmax > 0.0 {
                worst = worst.max(d / dmax);
            }
        }
    }
    Ok((true, format!("3000 tuples, largest d/d_max = {worst:.4}")))
}

fn metric_axioms() -> Check {
    let space = SeminormSpace::frechet(IndexDomain::Natural);
    let mut r = rng(2);
    for i in 0..1000 {
        let [x, y, u, v] = [(); 4].map(|_| random_vector(&mut r, 10));
        let (a, b, c) = (
            r.gen_range(-4.0..4.0),
            r.gen_range(-4.0..4.0),
            r.gen_range(-4.0..4.0),
        );
        let rep = metric_properties_check(&space, &x, &y, &u, &v, a, b, c, 1e-13)
            .map_err(|e| e.to_string())?;
        for (name, chk) in [
            ("triangle", &rep.triangle),
            ("scaling", &rep.scaling),
            ("separation", &rep.separation),
        ] {
            if chk.lhs > chk.rhs + 1e-9 * chk.rhs.abs().max(1.0) {
                return Ok((
                    false,
                    format!("tuple {i}: {name} {} > {}", chk.lhs, chk.rhs),
                ));
            }
        }
    }
    Ok((true, "1000 tuples, all three inequalities".into()))
}

fn luxemburg_oracle() -> Check {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for p in [1.0f64, 2.0, 3.0] {
        let phi = YoungFunction::Power { p };
        for _ in 0..50 {
            let n = r.gen_range(1..=12);
            let f = SeqVector::from_pairs(
                IndexDomain::Integer,
                (0..n).map(|_| (r.gen_range(-40..=40), r.gen_range(-5.0..5.0))),
            )
            .map_err(|e| e.to_string())?;
            if f.is_zero() {
                continue;
            }
            let lp: f64 = f
                .iter()
                .map(|(_, x)| x.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            let want = p.powf(-1.0 / p) * lp;
            let got = luxemburg_norm(&f, &phi, 1e-13).map_err(|e| e.to_string())?;
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            if rel > 1e-8 {
                return Ok((false, format!("p = {p}: {got} vs {want}")));
            }
        }
    }
    for p in [2.0f64, 3.0] {
        let phi = YoungFunction::Power { p };
        let q = p / (p - 1.0);
        for _ in 0..50 {
            let (s, t) = (r.gen_range(0.0..5.0), r.gen_range(0.0..5.0));
            let conj = complementary_young(&phi, t, 10.0 * (1.0 + t).powf(1.0 / (p - 1.0)))
                .map_err(|e| e.to_string())?;
            if s * t > phi.eval(s) + conj + 1e-9
                || (conj - t.powf(q) / q).abs() > 1e-8 * (1.0 + conj)
            {
                return Ok((false, format!("Young fails at p = {p}, s = {s}, t = {t}")));
            }
        }
    }
    Ok((
        true,
        format!("150 norms, worst relative error {worst:.1e}; 100 Young pairs"),
    ))
}

fn random_exact(r: &mut ChaCha8Rng) -> ExactSet {
    if r.gen_bool(0.5) {
        let mut s = ExactSet::naturals();
        s.exclude = (0..r.gen_range(0..4))
            .map(|_| r.gen_range(1..=30))
            .collect();
        return s;
    }
    let mut s = ExactSet::from_progressions(
        (0..r.gen_range(1..=3)).map(|_| (r.gen_range(1..=12), r.gen_range(1..=6))),
    );
    sprinkle(&mut s, r);
    s
}

/// Adds a few finite exceptions, keeping includes and excludes disjoint.
fn sprinkle(s: &mut ExactSet, r: &mut ChaCha8Rng) {
    s.include = (0..r.gen_range(0..3))
        .map(|_| r.gen_range(1..=50))
        .collect();
    s.exclude = (0..r.gen_range(0..3))
        .map(|_| r.gen_range(1..=50))
        .filter(|k| !s.include.contains(k))
        .collect();
}

fn lattice_soundness() -> Check {
    let mut r = rng(4);
    let mut nontrivial = 0;
    for i in 0..500 {
        let n = r.gen_range(1..=3);
        let mut pick = || random_exact(&mut r).to_piece_set();
        let upper = (0..n)
            .map(|_| pick())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let lower = (0..n)
            .map(|_| pick())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let rep = lattice_consistency(&ClauseSets { upper, lower }, &DensityRule::Exact)
            .map_err(|e| e.to_string())?;
        if !rep.violations.is_empty() {
            return Ok((false, format!("configuration {i}: {:?}", rep.violations)));
        }
        if rep.verdicts.iter().any(|v| *v) {
            nontrivial += 1;
        }
    }
    Ok((
        true,
        format!("500 configurations, {nontrivial} with some condition holding, zero violations"),
    ))
}

fn gallery() -> Check {
    let names: Vec<String> = (2..=12).map(|i| format!("example-{i}")).collect();
    scenarios_all_match(&names.iter().map(String::as_str).collect::<Vec<_>>())
}

fn totanr() -> Check {
    let s = find("totanr").ok_or("totanr not registered")?;
    let out = (s.run)(&(s.defaults)()).map_err(|e| e.to_string())?;
    let c1 = out
        .claims
        .first()
        .is_some_and(|c| c.claim.starts_with("condition 1") && c.observed);
    Ok((
        c1 && out.all_match(),
        format!(
            "condition 1 observed {c1}, all claims match {}",
            out.all_match()
        ),
    ))
}

fn primena_shifts() -> Check {
    let a = Regularizer::FactorialPower { e: -3.0 };
    let ws = [
        WeightSequence::Geometric { j: 1 },
        WeightSequence::Geometric { j: 2 },
    ];
    let mut bound = None;
    let mut tail = None;
    for (j, w) in ws.iter().enumerate() {
        let j = j as i32 + 1;
        for k in 1..=40u64 {
            let got = b_jk(w, &a, k, 1000);
            let want = (j as f64 * k as f64).exp2() * (k as f64).powi(j - 3);
            if got < want && bound.is_none() {
                bound = Some(format!("B_{{{j},{k}}} = {got:.3e} < {want:.3e}"));
            }
        }
        for k in 51..=60u64 {
            let inc = 1.0 / b_jk(w, &a, k, 1000);
            if (inc.is_nan() || inc >= 1e-6) && tail.is_none() {
                tail = Some(format!("1/B_{{{j},{k}}} = {inc:.3e}"));
            }
        }
    }
    let mut r = rng(9);
    let mut oracle = true;
    for _ in 0..100 {
        let w = &ws[r.gen_range(0..2)];
        let k = r.gen_range(1..=8);
        let x = SeqVector::from_pairs(
            IndexDomain::Natural,
            (1..=12).map(|i| (i, r.gen_range(-1.0..1.0))),
        )
        .map_err(|e| e.to_string())?;
        let got = regularized_power_apply(w, &a, k, &x).map_err(|e| e.to_string())?;
        let mut want = a.apply(&x);
        for _ in 0..k {
            want = backward_shift_power(w, 1, &want).map_err(|e| e.to_string())?;
        }
        oracle &= got.max_abs_diff(&want) <= 1e-10 * want.max_abs().max(f64::MIN_POSITIVE);
    }
    let ok = bound.is_none() && tail.is_none() && oracle;
    let detail = format!(
        "bound: {}; tail increments: {}; composition oracle: {}",
        bound.unwrap_or_else(|| "holds".into()),
        tail.unwrap_or_else(|| "below 1e-6".into()),
        if oracle { "agrees" } else { "disagrees" }
    );
    Ok((ok, detail))
}

fn chain_recursion_oracle() -> Check {
    let jumps: [fn(u64, usize) -> u64; 3] = [
        |_, j| j as u64,
        |n, j| j as u64 * (1 + n / 5),
        |n, j| (n + j as u64) / 3,
    ];
    let mut r = rng(11);
    for t in 0..200 {
        let jf = jumps[t % 3];
        let op = JumpShift::new(2, |n, j| 1.0 + ((n % 3) as f64) * j as f64 / 2.0, jf);
        let (n, j, k) = (
            r.gen_range(1..=400u64),
            r.gen_range(1..=2usize),
            r.gen_range(1..=15u64),
        );
        let img = generalized_backward_apply(&op, j, k, &SeqVector::basis(n as i64))
            .map_err(|e| e.to_string())?;
        let ok = match chain_recursion(&op, n, j, k) {
            Chain::Reached { chain } | Chain::Missed { chain } => {
                let last = *chain.last().expect("k ≥ 1") as i64;
                let coef: f64 = chain.iter().map(|&c| op.weight(c, j)).product();
                img.nnz() == 1 && (img.get(last) - coef).abs() <= 1e-12 * coef
            }
            Chain::Stalled { .. } => img.is_zero(),
        };
        if !ok {
            return Ok((false, format!("disagreement at n = {n}, j = {j}, k = {k}")));
        }
    }
    let op = JumpShift::new(3, |_, _| 1.0, |_, j| j as u64);
    for j in 1..=3usize {
        for k in 1..=50u64 {
            let want: Vec<u64> = (0..k).rev().map(|i| 1 + j as u64 * i).collect();
            if chain_recursion(&op, 1 + j as u64 * k, j, k) != (Chain::Reached { chain: want }) {
                return Ok((false, format!("closed form fails at j = {j}, k = {k}")));
            }
        }
    }
    Ok((
        true,
        "200 random triples agree with forward simulation; constant jumps reach 1 in k steps"
            .into(),
    ))
}

fn lcm(a: u64, b: u64) -> u64 {
    let g = (1..=a.min(b))
        .rev()
        .find(|d| a.is_multiple_of(*d) && b.is_multiple_of(*d))
        .unwrap_or(1);
    a / g * b
}

fn q_set_density() -> Check {
    let mut r = rng(12);
    for t in 0..50 {
        let n = r.gen_range(1..=3);
        let mut s =
            ExactSet::from_progressions((0..n).map(|_| (r.gen_range(1..=12), r.gen_range(1..=6))));
        sprinkle(&mut s, &mut r);
        let rs: Vec<u64> = (0..r.gen_range(1..=3))
            .map(|_| r.gen_range(1..=4))
            .collect();
        let brute = |k: u64| rs.iter().all(|&rj| s.contains(rj * k - 1));
        let q = q_set(&s, &rs).map_err(|e| e.to_string())?;
        if let Some(k) = (1..=10_000).find(|&k| q.contains(k) != brute(k)) {
            return Ok((
                false,
                format!("configuration {t}: membership differs at {k}"),
            ));
        }
        let period = s.progressions.iter().fold(1, |acc, p| lcm(acc, p.step));
        let (start, blocks) = (200u64, (10_000 - 200) / period);
        let count = (start + 1..=start + blocks * period)
            .filter(|&k| brute(k))
            .count() as u64;
        let d = exact_upper_density(&q).map_err(|e| e.to_string())?;
        if d != Density::new(count, blocks * period) {
            return Ok((
                false,
                format!(
                    "configuration {t}: exact {d} vs scan {count}/{}",
                    blocks * period
                ),
            ));
        }
    }
    let nat = q_density_criterion(&ExactSet::naturals(), &[1, 2, 3], Density::from_integer(1))
        .map_err(|e| e.to_string())?;
    let (cool, _) = scenario("da-se-ohladi")?;
    Ok((
        nat.passed && cool,
        format!(
            "50 random (S, r) match the scan; S = N, r = (1, 2, 3): {}; weighted instance: {cool}",
            nat.status
        ),
    ))
}

fn random_trace(r: &mut ChaCha8Rng) -> TraceMatrix {
    let (n, k) = (r.gen_range(1..=5), r.gen_range(1..=150));
    let values = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| [1.0, 0.1, 0.0, r.gen_range(0.0..2.0)][r.gen_range(0..4)])
                .collect()
        })
        .collect();
    TraceMatrix::new(values, vec![k as u64], SelectionMode::SingleValued).expect("valid trace")
}

fn diagonal_identities() -> Check {
    let mut r = rng(13);
    for i in 0..200 {
        let t = random_trace(&mut r);
        let rep = diagonal_equivalence(&t, 1.0, 0.1, &DensityRule::checkpoints(vec![t.len()], 0.1))
            .map_err(|e| e.to_string())?;
        if !(rep.upper_identity && rep.lower_identity) {
            return Ok((false, format!("trace {i} breaks an identity")));
        }
    }
    Ok((true, "200 random traces".into()))
}

fn mlo_suite() -> Check {
    scenarios_all_match(&["qwer", "gos", "totan", "identity-plus-span"])
}

fn interleaving() -> Check {
    for n in 1..=5u64 {
        let mut seen = vec![false; (n * 1000) as usize];
        for j in 1..=n {
            for k in 1..=1000 {
                let i = interleave_index(j, k, n).map_err(|e| e.to_string())?;
                if deinterleave(i, n).map_err(|e| e.to_string())? != (j, k)
                    || i == 0
                    || i > n * 1000
                    || seen[i as usize - 1]
                {
                    return Ok((false, format!("N = {n}, j = {j}, k = {k}")));
                }
                seen[i as usize - 1] = true;
            }
        }
    }
    Ok((
        true,
        "N ≤ 5, k ≤ 1000: bijective with exact round trip".into(),
    ))
}

fn cli_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_ddchaos");
    let mut bad = Vec::new();
    let names: Vec<&str> = registry().iter().map(|s| s.name).collect();
    for name in &names {
        let a = Command::new(bin)
            .args(["run", name])
            .output()
            .map_err(|e| e.to_string())?;
        let b = Command::new(bin)
            .args(["run", name])
            .output()
            .map_err(|e| e.to_string())?;
        if a.stdout != b.stdout {
            bad.push(format!("{name}: output differs"));
        }
        if a.status.code() != Some(0) {
            bad.push(format!("{name}: exit {:?}", a.status.code()));
        }
    }
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} scenarios", names.len())
        } else {
            bad.join("; ")
        },
    ))
}

fn main() {
    let criteria: [Criterion; 16] = [
        ("metric sandwich", metric_sandwich),
        ("metric axioms", metric_axioms),
        ("Luxemburg oracle and Young inequality", luxemburg_oracle),
        ("lattice soundness", lattice_soundness),
        ("counterexample gallery", gallery),
        ("totanr", totanr),
        ("sunce", || scenarios_all_match(&["sunce"])),
        ("bruk", || scenarios_all_match(&["bruk"])),
        ("regularized shifts", primena_shifts),
        ("primerinjo", || scenarios_all_match(&["primerinjo"])),
        ("chain recursion", chain_recursion_oracle),
        ("Q-set density", q_set_density),
        ("diagonal equivalence", diagonal_identities),
        ("MLO suite", mlo_suite),
        ("interleaving", interleaving),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {} {name}: {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
