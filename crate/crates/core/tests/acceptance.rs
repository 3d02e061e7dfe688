//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::Rng;

use strata_morse::catalog;
use strata_morse::cohomology::{cone_d, cone_n, global_cohomology};
use strata_morse::morse::{
    check_adjoint_duality, check_strong, flip_problem, lefschetz, morse_polynomial, perfectness,
    refined_morse, RefinedCheck,
};
use strata_morse::perversity::{all_self_dual, transform_perversity, Transform};
use strata_morse::poly::GradedPoly;
use strata_morse::sample::{seed_from_env, Sampler};
use strata_morse::space::SpaceExpr;
use strata_morse::spectral::{
    refinement_study, spectrum, sweep, with_threads, SpectralModel, SpectrumReport,
};

const GOLDEN_BUDGET: Duration = Duration::from_secs(1);
const PROPERTY_CASES: usize = 500;
const PROPERTY_BUDGET: Duration = Duration::from_secs(30);
const SPECTRAL_BUDGET: Duration = Duration::from_secs(300);
const REQUIRED_GAP: f64 = 10.0;
const ASYMMETRY_TOL: f64 = 1e-10;
const NEGATIVITY_TOL: f64 = -1e-8;
const PAIRING_TOL: f64 = 1e-6;
const REFINEMENT_GRIDS: [usize; 3] = [100, 200, 400];
const POLY_CHECKS: usize = 10_000;

type Outcome = Result<String, String>;

fn p(c: &[u64]) -> GradedPoly {
    GradedPoly::from_dense(c)
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn eq<T: PartialEq + std::fmt::Debug>(got: T, want: T, what: &str) -> Result<(), String> {
    ensure(got == want, format!("{what}: got {got:?}, want {want:?}"))
}

fn golden() -> Outcome {
    let e = |x: strata_morse::Error| x.to_string();
    let started = Instant::now();

    let torus = catalog::torus_six_points().map_err(e)?;
    eq(
        morse_polynomial(&torus).map_err(e)?,
        p(&[1, 3, 2]),
        "torus M(h)",
    )?;
    eq(
        morse_polynomial(&flip_problem(&torus)).map_err(e)?,
        p(&[2, 3, 1]),
        "torus M(-h)",
    )?;
    eq(
        check_strong(&torus).map_err(e)?.quotient,
        Some(p(&[0, 1])),
        "torus Q",
    )?;
    match refined_morse(&torus).map_err(e)? {
        RefinedCheck::Holds { error, .. } => eq(error, p(&[0, 1]), "torus refined error")?,
        other => return Err(format!("torus refined: {other:?}")),
    }

    let perfect =
        |name: &str, prob: &strata_morse::MorseProblem, want: &[u64]| -> Result<(), String> {
            eq(morse_polynomial(prob).map_err(e)?, p(want), name)?;
            ensure(
                perfectness(prob).map_err(e)?.iter().all(|&b| b),
                format!("{name} not perfect"),
            )?;
            eq(
                check_strong(prob).map_err(e)?.quotient,
                Some(GradedPoly::zero()),
                name,
            )
        };
    perfect(
        "Σ(T², dθ1)",
        &catalog::suspension_t2_dtheta1().map_err(e)?,
        &[1, 1, 1, 1],
    )?;
    perfect(
        "double suspension",
        &catalog::double_suspension().map_err(e)?,
        &[1, 1, 0, 1, 1],
    )?;
    perfect(
        "singular Fano",
        &catalog::singular_fano().map_err(e)?,
        &[1, 0, 1, 0, 1],
    )?;
    eq(
        lefschetz(&catalog::singular_fano().map_err(e)?)
            .map_err(e)?
            .morse,
        3,
        "Fano M(-1)",
    )?;

    let full = catalog::suspension_t2_full().map_err(e)?;
    eq(
        morse_polynomial(&full).map_err(e)?,
        p(&[1, 2, 0, 1]),
        "M(V, h)",
    )?;
    let zero_flipped = catalog::suspension_t2_zero_flipped().map_err(e)?;
    eq(
        morse_polynomial(&zero_flipped).map_err(e)?,
        p(&[1, 0, 2, 1]),
        "M(0, -h)",
    )?;
    ensure(
        check_adjoint_duality(&full).map_err(e)?.holds,
        "reverse relation",
    )?;

    let sd = catalog::self_dual_suspension().map_err(e)?;
    ensure(all_self_dual(&sd).map_err(e)?, "span(dθ1+dθ2) self-dual")?;
    eq(
        global_cohomology(&sd).map_err(e)?.poly(),
        p(&[1, 1, 1, 1]),
        "Σ(T², dθ1+dθ2) cohomology",
    )?;

    let elapsed = started.elapsed();
    ensure(elapsed < GOLDEN_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!("6 examples exact in {elapsed:.2?}"))
}

/// Cone over `z` with every perversity choice for its middle degree.
fn cone_duality(z: &SpaceExpr, w: Vec<Vec<i64>>) -> Result<bool, String> {
    let e = |x: strata_morse::Error| x.to_string();
    let cone = SpaceExpr::cone(z.clone(), w).map_err(e)?;
    let dual = transform_perversity(&cone, Transform::PoincareDual).map_err(e)?;
    let l = z.dim();
    let d = cone_d(&cone).map_err(e)?.poly();
    let n = cone_n(&dual).map_err(e)?.poly();
    Ok((0..=l + 1).all(|k| d.coeff(k) == n.coeff(l + 1 - k)))
}

fn properties() -> Outcome {
    let e = |x: strata_morse::Error| x.to_string();
    let started = Instant::now();
    let seed = seed_from_env();
    let mut s = Sampler::new(seed);

    for i in 0..PROPERTY_CASES {
        let hp = s.height_problem(2);
        eq(
            morse_polynomial(&hp).map_err(e)?,
            global_cohomology(&hp.space).map_err(e)?.poly(),
            &format!("(a) case {i} {}", hp.space),
        )?;
    }
    for i in 0..PROPERTY_CASES {
        let prob = s.problem(2).map_err(e)?;
        let prob = if i % 2 == 1 {
            flip_problem(&prob)
        } else {
            prob
        };
        let strong = check_strong(&prob).map_err(e)?;
        ensure(
            strong.holds(),
            format!("(b) case {i} {}: {:?}", prob.label, strong.violation),
        )?;
        ensure(
            lefschetz(&prob).map_err(e)?.equal,
            format!("(b) case {i} Lefschetz"),
        )?;
        ensure(
            check_adjoint_duality(&prob).map_err(e)?.holds,
            format!("(c) case {i} {}", prob.label),
        )?;
    }
    for i in 0..PROPERTY_CASES {
        let x = s.self_dual_space(2);
        let poly = global_cohomology(&x).map_err(e)?.poly();
        ensure(
            poly.is_palindromic(x.dim()),
            format!("(d) case {i} {x}: {poly}"),
        )?;
    }
    let mut checked = 0;
    while checked < PROPERTY_CASES {
        let z = s.self_dual_link(1);
        if z.dim() > 5 {
            continue;
        }
        let w = s.node_span(&z);
        ensure(
            cone_duality(&z, w).map_err(|m| format!("(e) {z}: {m}"))?,
            format!("(e) case {checked} {z}"),
        )?;
        checked += 1;
    }

    let elapsed = started.elapsed();
    ensure(elapsed < PROPERTY_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "(a)-(e) × {PROPERTY_CASES} cases, seed {seed}, in {elapsed:.2?}"
    ))
}

fn counts(r: &SpectrumReport) -> Vec<usize> {
    r.counts()
}

struct SpectralRuns {
    spindle: Vec<SpectrumReport>,
    torus: Vec<SpectrumReport>,
    torus_zero: SpectrumReport,
}

fn spectral_runs() -> Result<(SpectralRuns, Duration), String> {
    let e = |x: strata_morse::Error| x.to_string();
    let started = Instant::now();
    let eps = |v: &[i64]| {
        v.iter()
            .map(|&x| Ratio::from_integer(x))
            .collect::<Vec<_>>()
    };
    let spindle = SpectralModel::spindle_circle(400, 3, eps(&[2, 5, 10, 20])).map_err(e)?;
    let torus =
        SpectralModel::suspension_torus2(vec![vec![1, 0]], 200, 2, eps(&[5, 10, 20])).map_err(e)?;
    let runs = with_threads(1, || -> Result<SpectralRuns, strata_morse::Error> {
        Ok(SpectralRuns {
            spindle: sweep(&spindle)?.reports,
            torus: sweep(&torus)?.reports,
            torus_zero: spectrum(&torus, Ratio::from_integer(0))?,
        })
    })
    .map_err(e)?
    .map_err(e)?;
    Ok((runs, started.elapsed()))
}

fn instanton_counts(runs: &SpectralRuns, elapsed: Duration) -> Outcome {
    for r in &runs.spindle {
        eq(
            counts(r),
            vec![1, 0, 1],
            &format!("spindle ε={}", r.epsilon_value),
        )?;
    }
    let last = runs.spindle.last().expect("four runs");
    ensure(
        last.min_gap_ratio() >= REQUIRED_GAP,
        format!("spindle gap ratio at ε=20 is {}", last.min_gap_ratio()),
    )?;
    let excluded: Vec<f64> = runs
        .spindle
        .iter()
        .map(|r| {
            r.degrees
                .iter()
                .map(|d| d.low_eigenvalues[d.small_count])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    ensure(
        excluded.windows(2).all(|w| w[1] > w[0]),
        format!("smallest excluded eigenvalue not increasing in ε: {excluded:?}"),
    )?;
    for r in &runs.torus {
        eq(
            counts(r),
            vec![1, 1, 1, 1],
            &format!("Σ(T²) ε={}", r.epsilon_value),
        )?;
        ensure(
            r.min_gap_ratio() >= REQUIRED_GAP,
            format!("Σ(T²) gap ratio at ε={}", r.epsilon_value),
        )?;
    }
    eq(counts(&runs.torus_zero), vec![1, 1, 1, 1], "Σ(T²) ε=0")?;
    ensure(
        runs.torus_zero.min_gap_ratio() >= REQUIRED_GAP,
        "Σ(T²) gap ratio at ε=0",
    )?;
    ensure(elapsed < SPECTRAL_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "spindle (1,0,1) for ε∈{{2,5,10,20}}, Σ(T²) (1,1,1,1) for ε∈{{0,5,10,20}}, gap ≥ {REQUIRED_GAP} at ε=20: {:.1e}, single thread {elapsed:.1?}",
        last.min_gap_ratio()
    ))
}

fn discrete_invariants(runs: &SpectralRuns) -> Outcome {
    let e = |x: strata_morse::Error| x.to_string();
    let all: Vec<&SpectrumReport> = runs
        .spindle
        .iter()
        .chain(&runs.torus)
        .chain([&runs.torus_zero])
        .collect();
    let asym = all.iter().map(|r| r.max_asymmetry).fold(0.0, f64::max);
    let min = all
        .iter()
        .map(|r| r.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let pairing = all.iter().map(|r| r.max_pairing_error).fold(0.0, f64::max);
    ensure(asym < ASYMMETRY_TOL, format!("asymmetry {asym:e}"))?;
    ensure(min >= NEGATIVITY_TOL, format!("min eigenvalue {min:e}"))?;
    ensure(pairing <= PAIRING_TOL, format!("pairing error {pairing:e}"))?;

    // with an exact discrete complex the small eigenvalues sit at roundoff;
    // they are reported clamped to each grid's roundoff floor
    let spindle = SpectralModel::spindle_circle(100, 3, vec![]).map_err(e)?;
    let levels = with_threads(4, || {
        refinement_study(&spindle, Ratio::from_integer(10), &REFINEMENT_GRIDS)
    })
    .map_err(e)?
    .map_err(e)?;
    let mut trail = Vec::new();
    for q in 0..3 {
        let clamped: Vec<f64> = levels
            .iter()
            .filter_map(|l| l.largest_small[q].map(|x| if x <= l.roundoff_floor { 0.0 } else { x }))
            .collect();
        ensure(
            clamped.windows(2).all(|w| w[1] <= w[0]),
            format!("degree {q} small eigenvalues not decreasing: {clamped:?}"),
        )?;
        trail.push(format!("{clamped:?}"));
    }
    Ok(format!(
        "asymmetry {asym:.1e}, min eigenvalue {min:.1e}, pairing {pairing:.1e}, small eigenvalues over N={REFINEMENT_GRIDS:?}: {}",
        trail.join(" ")
    ))
}

fn poly_exactness() -> Outcome {
    let seed = seed_from_env();
    let mut s = Sampler::new(seed ^ 0x9e37_79b9);
    let one_plus_b = GradedPoly::one_plus_b();
    let mut failures = 0;
    for _ in 0..POLY_CHECKS {
        let rng = s.rng();
        let len = rng.gen_range(0..12);
        let coeffs: Vec<u64> = (0..len).map(|_| rng.gen_range(0..1000)).collect();
        let q = GradedPoly::from_dense(&coeffs);
        let n = len + rng.gen_range(0..4);
        if q.mul(&one_plus_b).divide_one_plus_b().ok() != Some(q.clone()) {
            failures += 1;
        }
        let back = q.reverse(n).and_then(|r| r.reverse(n));
        if back.ok() != Some(q) {
            failures += 1;
        }
    }
    ensure(failures == 0, format!("{failures} failures"))?;
    Ok(format!(
        "{POLY_CHECKS} round trips and {POLY_CHECKS} reverse involutions, 0 failures"
    ))
}

fn report(name: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("PASS  {name}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL  {name}: {why}");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= report("1 worked-example golden suite", &golden());
    ok &= report("2 property suites", &properties());
    match spectral_runs() {
        Ok((runs, elapsed)) => {
            ok &= report(
                "3 spectral instanton counts",
                &instanton_counts(&runs, elapsed),
            );
            ok &= report(
                "4 discrete analysis invariants",
                &discrete_invariants(&runs),
            );
        }
        Err(why) => {
            ok &= report("3 spectral instanton counts", &Err(why.clone()));
            ok &= report("4 discrete analysis invariants", &Err(why));
        }
    }
    ok &= report("5 poly-module exactness", &poly_exactness());
    if !ok {
        std::process::exit(1);
    }
}
