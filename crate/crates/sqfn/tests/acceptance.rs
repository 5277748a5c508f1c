//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p sqfn --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqfn::Pool;
use sqfn_core::grid::Extension;
use sqfn_core::intrinsic::{Engine, IntrinsicParams};
use sqfn_core::lipopt::{calpha_constraints, maximize_abs_pairing, HoelderClassSpec};
use sqfn_core::morrey::{
    doubling_constant, doubling_gate, dyadic_radii, generalized_morrey_norm, lp_norm,
    weak_generalized_morrey_norm, weak_l1_norm, weak_weighted_morrey_norm, weighted_morrey_norm,
    GrowthFunction, MorreyParams,
};
use sqfn_core::verifier::{
    cone_geometry_check, evaluate, key_estimate_constant, run_theorem, series_tail,
    standard_key_suite, FamilySpec, Scenario, ScenarioSpec, TheoremId,
};
use sqfn_core::weights::{ap_characteristic, doubling_ratio, power_weight, BallFamily, Weight};
use sqfn_core::{Ball, Error, FunctionFamily, Grid, GridFunction, Point};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn seed42() -> ScenarioSpec {
    ScenarioSpec {
        seed: 42,
        ..ScenarioSpec::default()
    }
}

fn lp_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut programs = 0;
    for res in 2..=5 {
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            let spec = HoelderClassSpec::new(alpha, 1, res).unwrap();
            let verts = common::vertices(&calpha_constraints(&spec).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * res as u64 + (alpha * 100.0) as u64);
            for _ in 0..100 {
                let c: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let got = maximize_abs_pairing(&c, &spec).unwrap();
                let want = common::vertex_oracle_abs(&verts, &c);
                worst = worst.max(rel(got, want));
                programs += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{programs} programs over 2-5 nodes, max relative error {worst:.1e}"),
    )
}

fn annihilation(pool: &Pool) -> Outcome {
    let g = Grid::centered(1, 2.0, 0.05).unwrap();
    let one = FunctionFamily::single(GridFunction::constant(g, 1.0).unwrap());
    let params = IntrinsicParams::for_grid(&g, 1.0)
        .unwrap()
        .with_extension(Extension::Clamp);
    let eng = Engine::new(params, pool).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let worst = (0..50)
        .map(|_| {
            let x = Point::d1(rng.gen_range(-2.0..2.0));
            eng.s_alpha_family(&one, &x).unwrap()
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8,
        format!("f = 1, 50 seeded points, clamped continuation, max S = {worst:.1e}"),
    )
}

fn homogeneity(pool: &Pool) -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let spec = ScenarioSpec {
            seed,
            h: 0.1,
            family: FamilySpec::Random {
                members: 1 + (seed as usize % 5),
                max_bumps: 3,
            },
            ..ScenarioSpec::default()
        };
        let s = Scenario::build(&spec).unwrap();
        let eng = Engine::new(s.intrinsic.clone(), pool).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 {
            let x = Point::d1(rng.gen_range(-1.5..1.5));
            let base = eng.s_alpha_family(&s.family, &x).unwrap();
            for c in [0.1, 3.0, 100.0] {
                let v = eng.s_alpha_family(&s.family.scaled(c), &x).unwrap();
                worst = worst.max(rel(v, c * base));
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("20 scenarios x 3 points x c in {{0.1, 3, 100}}, max relative drift {worst:.1e}"),
    )
}

fn vector_consistency(pool: &Pool) -> Outcome {
    let s = Scenario::build(&seed42()).unwrap();
    let f = s.family.members()[0].clone();
    let zero = GridFunction::zeros(*s.grid());
    let eng = Engine::new(s.intrinsic.clone(), pool).unwrap();
    let padded = FunctionFamily::new(vec![f.clone(), zero.clone(), zero.clone(), zero]).unwrap();
    let pair = FunctionFamily::new(vec![f.scaled(3.0), f.scaled(4.0)]).unwrap();
    let (mut exact, mut worst) = (true, 0.0f64);
    for x in [-1.3, -0.4, 0.0, 0.55, 1.7] {
        let x = Point::d1(x);
        let single = eng.s_alpha(&f, &x).unwrap();
        exact &= eng.s_alpha_family(&padded, &x).unwrap() == single;
        worst = worst.max(rel(eng.s_alpha_family(&pair, &x).unwrap(), 5.0 * single));
    }
    outcome(
        exact && worst <= 1e-6,
        format!("(f,0,0,0) exact: {exact}; (3f,4f) vs 5 S(f) max relative error {worst:.1e}"),
    )
}

fn ap_sanity() -> Outcome {
    let mut exact = true;
    for (dim, h) in [(1, 0.05), (2, 0.1)] {
        let g = Grid::centered(dim, 2.0, h).unwrap();
        let balls = BallFamily::lattice(&g, 0.5, 0.125, 4).unwrap();
        for p in [1.5, 2.0, 3.0] {
            exact &= ap_characteristic(&Weight::unit(g), p, &balls)
                .unwrap()
                .value
                == 1.0;
        }
    }
    let mut worst = 0.0f64;
    for h in [0.01, 0.005] {
        let g = Grid::centered(1, 2.0, h).unwrap();
        let mut balls = Vec::new();
        // centers off the node lattice: node-aligned balls of radius m·h put
        // boundary nodes at distance exactly r, where rounding decides membership
        for r in [0.25, 0.4, 0.5] {
            for k in -6..=6 {
                let b = Ball::new(Point::d1(0.15 * k as f64 + 0.00313), r).unwrap();
                if g.window_contains_ball(&b.dilate(2.0).unwrap()) {
                    balls.push(b);
                }
            }
        }
        let fam = BallFamily::new(&g, balls, "interior").unwrap();
        let rep = doubling_ratio(&Weight::unit(g), &fam).unwrap();
        for t in rep.terms.iter().flatten() {
            worst = worst.max((t / 2.0 - 1.0).abs());
        }
    }
    outcome(
        exact && worst <= 0.02,
        format!(
            "A_p(1) = 1 exactly: {exact}; off-lattice interior doubling ratios at h = 0.01, 0.005 within {:.2}% of 2",
            100.0 * worst
        ),
    )
}

fn doubling() -> Outcome {
    let radii = dyadic_radii(1e-3, 24);
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.0, 1.5] {
        let d = doubling_constant(&GrowthFunction::power_law(lambda).unwrap(), &radii).unwrap();
        worst = worst.max((d - 2f64.powf(lambda)).abs());
    }
    let accept = doubling_gate(&GrowthFunction::power_law(0.5).unwrap(), 1, &radii).is_ok();
    let refuse = matches!(
        doubling_gate(&GrowthFunction::power_law(1.5).unwrap(), 1, &radii),
        Err(Error::Precondition(_))
    );
    outcome(
        worst <= 1e-9 && accept && refuse,
        format!(
            "max |D - 2^lambda| = {worst:.1e}; gate accepts 0.5: {accept}; refuses 1.5: {refuse}"
        ),
    )
}

fn weak_below_strong() -> Outcome {
    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..100 {
        let g = if k % 4 == 3 {
            Grid::centered(2, 1.0, 0.1).unwrap()
        } else {
            Grid::centered(1, 2.0, 0.05).unwrap()
        };
        let density: f64 = rng.gen_range(0.0..1.0);
        let f = GridFunction::from_fn(g, |_| 0.0).unwrap();
        let values: Vec<f64> = f
            .values()
            .iter()
            .map(|_| {
                if rng.gen_bool(density) {
                    rng.gen_range(-3.0..3.0)
                } else {
                    0.0
                }
            })
            .collect();
        let f = GridFunction::new(g, values).unwrap();
        let w = power_weight(rng.gen_range(-0.5..1.0), g, 1e-12).unwrap();
        let balls = BallFamily::lattice(&g, 0.5, 0.125, 3).unwrap();
        let kappa = rng.gen_range(0.05..0.95);
        let phi = GrowthFunction::power_law(rng.gen_range(0.1..2.0)).unwrap();
        let pairs = [
            (weak_l1_norm(&f, &w).unwrap(), lp_norm(&f, 1.0, &w).unwrap()),
            (
                weak_weighted_morrey_norm(&f, kappa, &w, &balls)
                    .unwrap()
                    .value,
                weighted_morrey_norm(&f, MorreyParams::new(1.0, kappa).unwrap(), &w, &balls)
                    .unwrap()
                    .value,
            ),
            (
                weak_generalized_morrey_norm(&f, &phi, &balls)
                    .unwrap()
                    .value,
                generalized_morrey_norm(&f, 1.0, &phi, &balls)
                    .unwrap()
                    .value,
            ),
        ];
        violations += pairs.iter().filter(|(weak, strong)| weak > strong).count();
    }
    outcome(
        violations == 0,
        format!("100 seeded functions x 3 weak/strong pairs, {violations} violations"),
    )
}

fn cone_geometry() -> Outcome {
    let r = cone_geometry_check(8, 10_000).unwrap();
    outcome(
        r.violations == 0 && r.tuples == 10_000,
        format!(
            "{} tuples, {} violations, min slack {:.3} r_B",
            r.tuples, r.violations, r.min_slack
        ),
    )
}

fn key_estimate(pool: &Pool) -> Outcome {
    let suite = standard_key_suite();
    let level = |refine: bool| {
        let scenarios: Vec<Scenario> = suite
            .iter()
            .map(|s| {
                let s = if refine {
                    s.refined().unwrap()
                } else {
                    s.clone()
                };
                Scenario::build(&s).unwrap()
            })
            .collect();
        key_estimate_constant(&scenarios, pool).unwrap().0
    };
    match (level(false), level(true)) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
            let drift = (b / a).max(a / b);
            outcome(
                drift < 2.0,
                format!(
                    "{} scenarios, C_emp {a:.4} -> {b:.4}, drift {drift:.3}x",
                    suite.len()
                ),
            )
        }
        other => outcome(false, format!("C_emp not finite: {other:?}")),
    }
}

fn theorem_ratios(pool: &Pool) -> Outcome {
    let ids = [
        TheoremId::A,
        TheoremId::B,
        TheoremId::Bbar,
        TheoremId::C,
        TheoremId::D,
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
    ];
    let spec = seed42();
    let coarse = Scenario::build(&spec).unwrap();
    let scaled = coarse.with_scaled_family(10.0);
    let fine = Scenario::build(&spec.refined().unwrap()).unwrap();
    let (ec, es, ef) = (
        evaluate(&coarse, pool).unwrap(),
        evaluate(&scaled, pool).unwrap(),
        evaluate(&fine, pool).unwrap(),
    );
    let (mut ok, mut scale_drift, mut ladder_drift) = (true, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for id in ids {
        let r = |ev| run_theorem(ev, id, pool).ok().and_then(|r| r.ratio);
        match (r(&ec), r(&es), r(&ef)) {
            (Some(a), Some(b), Some(c)) if a.is_finite() && c.is_finite() => {
                scale_drift = scale_drift.max(rel(a, b));
                let step = (c / a - 1.0).abs();
                ladder_drift = ladder_drift.max(step);
                if rel(a, b) > 1e-6 || step > 0.2 {
                    failures.push(id.to_string());
                }
            }
            _ => {
                ok = false;
                failures.push(id.to_string());
            }
        }
    }
    ok &= failures.is_empty();
    outcome(
        ok,
        format!(
            "A, B, Bbar, C, D, T1-T4 on seed 42: max 10x drift {scale_drift:.1e}, max ladder step {:.1}%{}",
            100.0 * ladder_drift,
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", failures.join(" "))
            }
        ),
    )
}

fn series() -> Outcome {
    let phi = GrowthFunction::power_law(0.5).unwrap();
    let s = series_tail(&phi, 1.0, 1, 30, &dyadic_radii(1e-3, 24)).unwrap();
    let q = 2f64.powf(-0.5);
    let closed = q * q / (1.0 - q);
    let err = (s.partial_sum - closed).abs();
    outcome(
        err <= 1e-3,
        format!(
            "L = 30 partial sum {:.6} vs q^2/(1-q) = {closed:.6}, error {err:.1e}",
            s.partial_sum
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("sqfn-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("s.txt"), "seed = 42\n").unwrap();
    let run = |id: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_sqfn"))
            .args([
                "--seed",
                "42",
                "verify",
                "thm",
                "--id",
                id,
                "--scenario",
                "s.txt",
                "--out",
                out,
            ])
            .current_dir(&dir)
            .status()
            .unwrap()
            .success()
    };
    let mut same = true;
    let mut files = 0;
    for id in ["T1", "KEY"] {
        same &= run(id, "a") && run(id, "b");
        for ext in ["csv", "json"] {
            let a = fs::read(dir.join("a").join(format!("{id}.{ext}"))).unwrap_or_default();
            let b = fs::read(dir.join("b").join(format!("{id}.{ext}"))).unwrap_or_default();
            same &= !a.is_empty() && a == b;
            files += 1;
        }
    }
    let _ = fs::remove_dir_all(&dir);
    outcome(
        same,
        format!("T1 and KEY run twice, {files} output pairs byte-identical: {same}"),
    )
}

type Criterion<'a> = (
    &'static str,
    Option<Duration>,
    Box<dyn Fn() -> Outcome + 'a>,
);

fn main() {
    let pool = Pool::new(None).unwrap();
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "LP oracle equivalence",
            Some(Duration::from_secs(30)),
            Box::new(lp_oracle),
        ),
        (
            "Constant annihilation",
            Some(Duration::from_secs(120)),
            Box::new(|| annihilation(&pool)),
        ),
        ("Homogeneity", None, Box::new(|| homogeneity(&pool))),
        (
            "Vector consistency",
            None,
            Box::new(|| vector_consistency(&pool)),
        ),
        ("A_p sanity", None, Box::new(ap_sanity)),
        ("Doubling constant", None, Box::new(doubling)),
        ("Weak <= strong", None, Box::new(weak_below_strong)),
        ("Cone geometry", None, Box::new(cone_geometry)),
        (
            "Key estimate",
            Some(Duration::from_secs(1200)),
            Box::new(|| key_estimate(&pool)),
        ),
        (
            "Theorem ratio stability",
            None,
            Box::new(|| theorem_ratios(&pool)),
        ),
        ("Series bound", None, Box::new(series)),
        ("Determinism", None, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = check();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > *limit {
                o.pass = false;
                o.detail
                    .push_str(&format!(", over the {}s limit", limit.as_secs()));
            }
        }
        println!(
            "criterion {:>2} {} {name}: {} ({:.1}s)",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
