//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::time::{Duration, Instant};

use common::*;
use ct_core::closed_form::{compare_strategies, cost_c, cost_c_general, perpetual_d, ThresholdValue, Verdict};
use ct_core::dist::LossDistribution;
use ct_core::ide::{solve_fixed_point, verify_supersolution, CapitalGrid, GridFunction};
use ct_core::insurance::{build_insured_model, premium_rate, premium_rate_quadrature, Cover, CoverKind};
use ct_core::law::LossLaw;
use ct_core::mc::{estimate_vy_at_y, McConfig};
use ct_core::model::flow;
use ct_core::optimizer::{optimize, Evaluator, OptimizeOptions};
use ct_core::params::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const DELTAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
const GAMMAS: [f64; 5] = [0.5, 1.5, 2.5, 3.5, 4.5];

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(name.to_string());
        }
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.random_range(0.01..0.5),
        rng.random_range(0.5..5.0),
        rng.random_range(0.1..0.9),
        rng.random_range(5.0..150.0),
        rng.random_range(0.1..3.0),
        rng.random_range(0.01..1.0),
    )
    .unwrap()
}

fn closed_form_identities(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let alpha = rng.random_range(0.2..4.0);
        let c = cost_c(p.x_star, &p, alpha).unwrap();
        let direct = p.lambda * p.x_star / ((alpha + 1.0) * p.delta);
        let general = cost_c_general(&p, &beta_law(alpha));
        worst = worst.max((c - direct).abs() / direct).max((c - general).abs() / general);
    }
    rep.record(
        "closed-form C(x*) identities (20 random sets, 1e-10)",
        worst <= 1e-10,
        format!("max relative deviation {worst:.3e}"),
    );

    let mut mismatches = 0;
    let mut sign_mismatches = 0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let law = if rng.random_bool(0.5) {
            beta_law(rng.random_range(0.2..4.0))
        } else {
            LossLaw::Plain(LossDistribution::kumaraswamy(rng.random_range(0.3..5.0), rng.random_range(0.3..5.0)).unwrap())
        };
        let gap = p.b - p.delta - p.lambda * (1.0 - law.mean());
        let verdict = compare_strategies(&p, &law).verdict;
        let expected = if gap > 0.0 {
            Verdict::LumpsumCheaper
        } else if gap < 0.0 {
            Verdict::PerpetualCheaper
        } else {
            Verdict::Indifferent
        };
        if verdict != expected {
            mismatches += 1;
        }
        let x = p.x_star * rng.random_range(0.0..1.0);
        let d = perpetual_d(x, &p, &law).unwrap();
        let c = p.x_star - x + cost_c_general(&p, &law);
        let diff = d - c;
        let consistent = match verdict {
            Verdict::LumpsumCheaper => diff > 0.0,
            Verdict::PerpetualCheaper => diff < 0.0,
            Verdict::Indifferent => diff == 0.0,
        };
        if !consistent && diff.abs() > 1e-9 * c {
            sign_mismatches += 1;
        }
    }
    rep.record(
        "strategy classification vs sign of b - delta - lambda(1 - mu) (1000 random sets)",
        mismatches == 0 && sign_mismatches == 0,
        format!("{mismatches} verdict mismatches, {sign_mismatches} D - C sign mismatches"),
    );
}

fn sup_relative_error(v: &GridFunction, exact: &ThresholdValue) -> f64 {
    v.grid()
        .points()
        .iter()
        .zip(v.values())
        .map(|(&x, &w)| {
            let e = exact.value(x).unwrap();
            (w - e).abs() / e
        })
        .fold(0.0, f64::max)
}

fn cross_oracles(rep: &mut Report) {
    let p = base_params(0.1);
    let law = beta_law(1.25);
    let start = Instant::now();
    for y in [20.0, 40.0] {
        let grid = CapitalGrid::default_for(y, &p).unwrap();
        let n = grid.len();
        let v = solve_fixed_point(&p, &law, grid, 1e-10).unwrap();
        let err = sup_relative_error(&v, &ThresholdValue::new(y, &p, 1.25).unwrap());
        rep.record(
            &format!("fixed point vs closed form at y = {y} ({n}-point grid, 1e-5)"),
            n == 400 && err < 1e-5,
            format!("sup relative error {err:.3e}"),
        );
    }
    let mc = estimate_vy_at_y(20.0, &p, &law, &McConfig::new(1_000_000, SEED)).unwrap();
    let target = 1000.0 / 11.25;
    let dev = (mc.value - target).abs();
    rep.record(
        "Monte Carlo V_20(20), N = 1e6, within 3 CI half-widths of 88.889, half-width < 0.5",
        dev < 3.0 * mc.ci_half_width && mc.ci_half_width < 0.5,
        format!("estimate {:.4} +/- {:.4} (deviation {dev:.4})", mc.value, mc.ci_half_width),
    );
    let elapsed = start.elapsed();
    rep.record(
        "cross-oracle runtime < 5 min",
        elapsed < Duration::from_secs(300),
        format!("{:.1} s", elapsed.as_secs_f64()),
    );
}

fn compare_list(found: &[f64], reference: &[f64], tol: f64) -> (bool, String) {
    let ok = found.iter().zip(reference).all(|(a, b)| (a - b).abs() <= tol);
    let text = found
        .iter()
        .zip(reference)
        .map(|(a, b)| format!("{a:.2}/{b:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    (ok, format!("found/reference: {text}"))
}

fn closed_form_thresholds(rep: &mut Report) -> Vec<(ModelParams, f64, f64)> {
    let start = Instant::now();
    let opts = OptimizeOptions {
        verify: false,
        ..Default::default()
    };
    let mut cases = Vec::new();
    let mut by_delta = Vec::new();
    for d in DELTAS {
        let p = base_params(d);
        let r = optimize(&p, &beta_law(1.25), &Evaluator::ClosedForm, &opts).unwrap();
        by_delta.push(r.y_star);
        cases.push((p, 1.25, r.y_star));
    }
    let (ok, text) = compare_list(&by_delta, &[26.66, 23.82, 22.16, 21.10, 20.41], 0.05);
    rep.record("closed-form y* over delta (Beta(1.25,1), +/-0.05)", ok, text);
    let mut by_alpha = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let p = base_params(0.25);
        let r = optimize(&p, &beta_law(alpha), &Evaluator::ClosedForm, &opts).unwrap();
        by_alpha.push(r.y_star);
        cases.push((p, alpha, r.y_star));
    }
    let (ok, text) = compare_list(&by_alpha, &[20.27, 22.16, 23.32, 23.56, 23.42], 0.05);
    rep.record("closed-form y* over alpha (delta = 0.25, +/-0.05)", ok, text);
    let elapsed = start.elapsed();
    rep.record(
        "closed-form optimizer runtime < 1 min",
        elapsed < Duration::from_secs(60),
        format!("{:.1} s", elapsed.as_secs_f64()),
    );
    cases
}

fn mc_opts() -> OptimizeOptions {
    OptimizeOptions {
        verify: false,
        tol_y: 1e-2,
        ..Default::default()
    }
}

fn kumaraswamy_thresholds(rep: &mut Report) {
    let start = Instant::now();
    let law = LossLaw::Plain(LossDistribution::kumaraswamy(3.0, 4.0).unwrap());
    let ev = Evaluator::MonteCarlo(McConfig::new(100_000, SEED));
    let found: Vec<f64> = DELTAS
        .iter()
        .map(|&d| optimize(&base_params(d), &law, &ev, &mc_opts()).unwrap().y_star)
        .collect();
    let (ok, text) = compare_list(&found, &[29.28, 25.73, 23.79, 21.45, 20.0], 0.5);
    rep.record("Monte Carlo y* for Kumaraswamy(3,4) over delta (N = 1e5, +/-0.5)", ok, text);
    let elapsed = start.elapsed();
    rep.record(
        "Kumaraswamy optimizer runtime < 15 min",
        elapsed < Duration::from_secs(900),
        format!("{:.1} s", elapsed.as_secs_f64()),
    );
}

fn microinsurance(rep: &mut Report) {
    let base = base_params(0.1);
    let dist = LossDistribution::beta(1.25).unwrap();
    let ev = Evaluator::MonteCarlo(McConfig::new(100_000, SEED));
    let sweeps = [
        ("proportional (eta = 0.5)", CoverKind::Proportional { eta: 0.5 }, [28.38, 30.67, 33.42, 39.98, 45.56]),
        ("excess-of-loss (l = 0.5)", CoverKind::ExcessOfLoss { l: 0.5 }, [28.75, 29.89, 30.90, 33.57, 34.61]),
        ("total-loss (L = 0.5)", CoverKind::TotalLoss { limit: 0.5 }, [27.76, 31.25, 36.87, 44.56, 55.46]),
    ];
    for (name, kind, reference) in sweeps {
        let found: Vec<f64> = GAMMAS
            .iter()
            .map(|&g| {
                let m = build_insured_model(&base, &Cover::new(kind, g).unwrap(), &dist).unwrap();
                optimize(&m.params, &m.law, &ev, &mc_opts()).unwrap().y_star
            })
            .collect();
        let (ok, text) = compare_list(&found, &reference, 1.0);
        rep.record(&format!("microinsurance y* over gamma, {name} (N = 1e5, +/-1.0)"), ok, text);
        let increasing = found.windows(2).all(|w| w[1] > w[0]);
        rep.record(
            &format!("microinsurance y* increasing in gamma, {name}"),
            increasing,
            format!("{found:.2?}"),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let alpha = rng.random_range(0.2..4.0);
        let u = rng.random_range(0.0..1.0);
        let kind = match rng.random_range(0..3) {
            0 => CoverKind::Proportional { eta: u },
            1 => CoverKind::ExcessOfLoss { l: u },
            _ => CoverKind::TotalLoss { limit: u },
        };
        let cover = Cover::new(kind, rng.random_range(0.0..5.0)).unwrap();
        let lambda = rng.random_range(0.1..3.0);
        let d = LossDistribution::beta(alpha).unwrap();
        let a = premium_rate(&cover, lambda, &d).unwrap();
        let b = premium_rate_quadrature(&cover, lambda, &d).unwrap();
        worst = worst.max((a - b).abs() / b.abs().max(1e-300));
    }
    rep.record(
        "premium closed forms vs quadrature (50 random pairs, 1e-10)",
        worst <= 1e-10,
        format!("max relative deviation {worst:.3e}"),
    );
}

fn hjb_verification(rep: &mut Report, cases: &[(ModelParams, f64, f64)]) {
    let mut passes = Vec::new();
    for (p, alpha, y) in cases {
        let tv = ThresholdValue::new(*y, p, *alpha).unwrap();
        let v = GridFunction::from_fn(CapitalGrid::default_for(*y, p).unwrap(), |x| tv.value(x)).unwrap();
        passes.push(verify_supersolution(&v, p, &beta_law(*alpha)).pass);
    }
    rep.record(
        "supersolution check passes at all ten closed-form y*",
        passes.iter().all(|&b| b),
        format!("{passes:?}"),
    );
    let (p, alpha, y) = cases[0];
    let mut details = Vec::new();
    let mut all_fail = true;
    for shifted in [y - 5.0, y + 5.0] {
        let tv = ThresholdValue::new(shifted, &p, alpha).unwrap();
        let v = GridFunction::from_fn(CapitalGrid::default_for(shifted, &p).unwrap(), |x| tv.value(x)).unwrap();
        let r = verify_supersolution(&v, &p, &beta_law(alpha));
        all_fail &= !r.pass;
        details.push(format!(
            "y = {shifted:.2}: pass = {}, derivative violation {:.3e} at {:.3}, generator violation {:.3e} at {:.3}",
            r.pass, r.max_deriv_violation, r.worst_deriv_x, r.max_generator_violation, r.worst_generator_x
        ));
    }
    rep.record("supersolution check fails at y* +/- 5 (delta = 0.1)", all_fail, details.join("; "));
}

fn properties(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut order_ok = true;
    for _ in 0..20 {
        let p = base_params(rng.random_range(0.05..1.0)).with_lambda(rng.random_range(0.3..2.0)).unwrap();
        let law = beta_law(rng.random_range(0.5..2.5));
        let c = pair_check(
            &p,
            &law,
            20.0 * (1.0 + rng.random_range(0.0..1.0)),
            (rng.random_range(1.0..200.0), rng.random_range(0.1..2.0), rng.random_range(0.0..10.0)),
            rng.random_range(1.0..2.0),
            rng.random_range(0.0..5.0),
        );
        worst_excess = worst_excess.max(c.ratio - c.kappa);
        order_ok &= c.order_excess <= 1e-9 * c.scale;
    }
    rep.record(
        "one-jump operator: contraction ratio <= lambda/(lambda+delta) + 1e-9 and monotone (20 random pairs)",
        worst_excess <= 1e-9 && order_ok,
        format!("max ratio - kappa = {worst_excess:.3e}, monotone = {order_ok}"),
    );

    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        let x = rng.random_range(0.0..3.0 * p.x_star);
        let (s, t) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        let a = flow(flow(x, s, &p), t, &p);
        let b = flow(x, s + t, &p);
        worst = worst.max((a - b).abs() / b.max(1.0));
    }
    rep.record("flow semigroup (10^4 random triples, 1e-12)", worst <= 1e-12, format!("max deviation {worst:.3e}"));

    let mut monotone = true;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let alpha = rng.random_range(0.3..3.0);
        let tv = ThresholdValue::new(p.x_star * (1.0 + rng.random_range(0.0..2.0)), &p, alpha).unwrap();
        let vals: Vec<f64> = (0..300).map(|k| tv.value(p.x_star * k as f64 / 50.0).unwrap()).collect();
        monotone &= vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) && vals.iter().all(|&v| v >= 0.0);
    }
    let p = base_params(0.1);
    let k = LossLaw::Plain(LossDistribution::kumaraswamy(3.0, 4.0).unwrap());
    for y in [20.0, 30.0] {
        let v = solve_fixed_point(&p, &k, CapitalGrid::default_for(y, &p).unwrap(), 1e-7).unwrap();
        monotone &= v.is_non_increasing(1e-9);
    }
    rep.record("value functions non-increasing (closed form and fixed point)", monotone, String::new());

    let laws = sampling_laws();
    let mut worst_z: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    for (i, (_, law)) in laws.iter().enumerate() {
        let d = ks_statistic(law, 100_000, SEED + i as u64);
        match law {
            LossLaw::Plain(_) => worst_z = worst_z.max(d),
            LossLaw::Covered { .. } => worst_w = worst_w.max(d),
        }
    }
    rep.record(
        "KS distance < 0.01 for sampled Z and W (10^5 draws each)",
        worst_z < 0.01 && worst_w < 0.01,
        format!("max D: Z {worst_z:.4}, W {worst_w:.4}"),
    );

    let runs = across_pools(|| {
        let mc = estimate_vy_at_y(25.0, &p, &k, &McConfig::new(100_000, SEED)).unwrap();
        let fp = solve_fixed_point(&p, &k, CapitalGrid::default_for(25.0, &p).unwrap(), 1e-6).unwrap();
        let opt = optimize(&p, &k, &Evaluator::MonteCarlo(McConfig::new(20_000, SEED)), &mc_opts()).unwrap();
        let bits: Vec<u64> = fp.values().iter().map(|v| v.to_bits()).collect();
        (mc.value.to_bits(), mc.ci_half_width.to_bits(), bits, opt.y_star.to_bits())
    });
    let same = runs.iter().all(|r| r.1 == runs[0].1);
    let sizes: Vec<usize> = runs.iter().map(|r| r.0).collect();
    rep.record(
        "bit-identical results across thread pools",
        same,
        format!("pool sizes {sizes:?}"),
    );
}

fn main() {
    let start = Instant::now();
    let mut rep = Report { failed: Vec::new() };
    closed_form_identities(&mut rep);
    cross_oracles(&mut rep);
    let cases = closed_form_thresholds(&mut rep);
    hjb_verification(&mut rep, &cases);
    kumaraswamy_thresholds(&mut rep);
    microinsurance(&mut rep);
    properties(&mut rep);
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if rep.failed.is_empty() {
        println!("all acceptance criteria passed");
    } else {
        println!("{} criteria failed: {}", rep.failed.len(), rep.failed.join("; "));
        std::process::exit(1);
    }
}
