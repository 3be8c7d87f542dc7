//! Weighted translations on ℤ under a Luxemburg norm.

use ddchaos::chaos::{orbit_trace, DensityRule, Schedule, SelectionMode, TraceMetric};
use ddchaos::criteria::{qwea_condition, OrbitNorm};
use ddchaos::operators::{OperatorFamily, TranslationWeight};
use ddchaos::{
    IndexDomain, PieceSet, Point, Result, SeminormKind, SeminormSpace, SeqVector, YoungFunction,
};

use super::{Outcome, Params, Scenario, TraceExport};

fn growing_steps() -> Vec<(i64, TranslationWeight)> {
    let w = TranslationWeight::Step {
        nonneg: 2.0,
        neg: 1.0,
    };
    vec![(1, w.clone()), (2, w)]
}

fn phi() -> YoungFunction {
    YoungFunction::Power { p: 2.0 }
}

fn schedule() -> Schedule {
    Schedule::Exponential {
        c: 0.5,
        base: std::f64::consts::SQRT_2,
    }
}

fn run_qwea(p: &Params) -> Result<Outcome> {
    let h = p.horizon_or(40);
    let b = PieceSet::universe(Some(h));
    let c = |k: u64| (-(k as f64)).exp2();
    let norm = OrbitNorm::Luxemburg { phi: phi() };
    let mut out = Outcome::default();
    let r = qwea_condition(&c, &b, &[0], &growing_steps(), &norm, h, &schedule())?;
    out.claim(
        "N_phi(T_j^n g) >= 2^(n/2)/2 on the tail of B for w = 2 on x >= 0",
        true,
        r.passed,
        "g = (sum c_k) chi_{0}, c_k = 2^-k",
    );
    let flat = vec![(1, TranslationWeight::Constant { c: 1.0 })];
    let control = qwea_condition(&c, &b, &[0], &flat, &norm, h, &schedule())?;
    out.claim(
        "unweighted translation grows the same way",
        false,
        control.passed,
        "isometric control",
    );
    out.detail("growth", &r);
    out.detail("horizon", h);
    Ok(out)
}

fn qwea_trace(p: &Params) -> Result<TraceExport> {
    let k = p.horizon_or(40);
    let space = SeminormSpace::new(SeminormKind::Orlicz { phi: phi() }, IndexDomain::Integer)?;
    let fam = OperatorFamily::Translation {
        steps: growing_steps(),
    };
    let chi = SeqVector::from_pairs(IndexDomain::Integer, [(0, 1.0)])?;
    let trace = orbit_trace(
        &fam,
        &space,
        TraceMetric::Norm,
        &Point::Seq(chi),
        k,
        &[k],
        SelectionMode::SingleValued,
    )?;
    Ok(TraceExport {
        trace,
        sigma: p.sigma,
        eps: p.eps_min(),
        rule: DensityRule::checkpoints(vec![k], p.delta),
    })
}

pub fn scenarios() -> Vec<Scenario> {
    vec![Scenario {
        name: "qwea",
        anchor: "qwea: translations by 1 and 2 on Z with w = 2 on x >= 0 and 1 below, Luxemburg norm for t^2/2, K = {0}, c_k = 2^-k, B = N",
        defaults: || Params::new(1.0, &[0.5]),
        run: run_qwea,
        trace: Some(qwea_trace),
    }]
}
