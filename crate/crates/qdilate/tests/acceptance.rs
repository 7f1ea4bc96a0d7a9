//! Acceptance criteria, one line per criterion.
//!
//! Each criterion is a function returning the worst observed quantity with a
//! verdict. `acceptance_suite` runs all ten, prints `PASS`/`FAIL` lines and
//! fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use qdilate::ando::*;
use qdilate::lifts::*;
use qdilate::matcore::*;
use qdilate::model::*;
use qdilate::pseudolift::*;
use qdilate::qpair::*;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn corpus() -> Vec<(String, QPair)> {
    standard_corpus()
}

fn is_cnu(pair: &QPair) -> bool {
    spectral_radius(&pair.product()) < 1.0 - 1e-9
}

fn is_unitary_pair(pair: &QPair) -> bool {
    let n = pair.dim();
    [pair.t1(), pair.t2()]
        .iter()
        .all(|t| (t.adjoint() * *t - identity(n)).norm() < 1e-12)
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let v = CMatrix::from_fn(n, 1, |_, _| {
        c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let nrm = v.norm();
    v / c64(nrm, 0.0)
}

fn scalar_pair(c: C64) -> QPair {
    let one = CMatrix::from_element(1, 1, c64(1.0, 0.0));
    QPair::validate(c64(1.0, 0.0), CMatrix::from_element(1, 1, c), one, 1e-12).unwrap()
}

fn ando_tuples() -> Outcome {
    let pairs = corpus();
    let mut twists_seen = [false; 5];
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, pair) in &pairs {
        for (k, q) in corpus_twists().iter().enumerate() {
            if (pair.q() - q).norm() < 1e-12 {
                twists_seen[k] = true;
            }
        }
        let tuple = special_ando_tuple(pair).unwrap();
        let star = star_ando_tuple(pair).unwrap();
        let mut checks = verify_prop1(&tuple, pair, 1e-10);
        checks.extend(verify_prop2(&star, pair, 1e-10));
        worst = worst.max(checks.worst(""));
        if !checks.passed() {
            failed.push(name.clone());
        }
    }
    let dims_ok = pairs.iter().all(|(_, p)| (1..=6).contains(&p.dim()));
    let pass = pairs.len() >= 50 && dims_ok && twists_seen.iter().all(|&s| s) && failed.is_empty();
    outcome(
        pass,
        format!(
            "{} pairs, worst residual {worst:.2e}, failures {failed:?}",
            pairs.len()
        ),
    )
}

fn schaffer() -> Outcome {
    let n_max = 8;
    let mut intertwine: f64 = 0.0;
    let mut structural: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for (_, pair) in corpus() {
        let tuple = special_ando_tuple(&pair).unwrap();
        let lift = schaffer_lift(&pair, &tuple, n_max).unwrap();
        let checks = verify_lift(&lift, &pair, 1e-10).unwrap();
        intertwine = intertwine.max(checks.worst("schaffer.intertwine"));
        structural = structural
            .max(checks.worst("schaffer.isometry"))
            .max(checks.worst("schaffer.qcommute"));
        let ex = extract_ando_from_lift(&lift, &pair, 1e-10).unwrap();
        let gap = (&ex.lambda - &tuple.lambda)
            .norm()
            .max((&ex.p - &tuple.p).norm())
            .max((&ex.u - &tuple.u).norm());
        round_trip = round_trip.max(ex.checks.worst("")).max(gap);
    }
    outcome(
        intertwine < 1e-11 && structural < 1e-10 && round_trip < 1e-10,
        format!(
            "intertwining {intertwine:.2e}, isometry/q-commutation {structural:.2e}, \
             round trip {round_trip:.2e}"
        ),
    )
}

fn douglas() -> Outcome {
    let n_max = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut embedding: f64 = 0.0;
    let mut lift_worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, pair) in corpus() {
        let star = star_ando_tuple(&pair).unwrap();
        let lift = douglas_lift(&pair, &star, n_max).unwrap();
        let cp = lift.canonical.as_ref().unwrap();
        let ts = pair.product().adjoint();
        let mut tail = identity(pair.dim());
        for _ in 0..=n_max {
            tail = &ts * tail;
        }
        for _ in 0..100 {
            let h = random_unit(pair.dim(), &mut rng);
            let lhs = (&lift.pi * &h).norm_squared();
            let rhs =
                h.norm_squared() - (&tail * &h).norm_squared() + (&cp.q_op * &h).norm_squared();
            embedding = embedding.max((lhs - rhs).abs());
        }
        let checks = verify_lift(&lift, &pair, 1e-9).unwrap();
        lift_worst = lift_worst.max(checks.worst(""));
        if !checks.passed() {
            failed.push(name);
        }
    }
    outcome(
        embedding < 1e-11 && failed.is_empty(),
        format!(
            "embedding identity {embedding:.2e}, lift axioms and model intertwinings \
             {lift_worst:.2e}, failures {failed:?}"
        ),
    )
}

fn fundamentals() -> Outcome {
    let mut oracle: f64 = 0.0;
    let mut funeq: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (_, pair) in corpus() {
        let fp = fundamental_ops(&pair).unwrap();
        let checks = verify_fundamental(&pair, &fp, 1e-10);
        oracle = oracle.max(checks.worst("fundamental.oracle"));
        funeq = funeq.max(checks.worst("fundamental.funeq"));
        norm = norm.max(op_norm(&fp.g1)).max(op_norm(&fp.g2));
    }
    outcome(
        oracle < 1e-9 && funeq < 1e-10 && norm <= 1.0 + 1e-9,
        format!("oracle gap {oracle:.2e}, equations {funeq:.2e}, max ||G_i|| {norm:.12}"),
    )
}

fn canonical_pair() -> Outcome {
    let mut unitary_gap: f64 = 0.0;
    let mut unitary_pairs = 0;
    let mut transport: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, pair) in corpus() {
        if is_unitary_pair(&pair) {
            unitary_pairs += 1;
            let cp = canonical_unitary_pair(&pair).unwrap();
            let b = cp.basis.columns();
            let gap = (b * &cp.w1 * b.adjoint() - pair.t1())
                .norm()
                .max((b * &cp.w2 * b.adjoint() - pair.t2()).norm());
            unitary_gap = unitary_gap.max(gap);
        }
        for seed in 0..20u64 {
            let (conj, psi) = gen_conjugated(&pair, 500 + seed).unwrap();
            let checks = canonicity_transport(&pair, &conj, &psi, 1e-10).unwrap();
            transport = transport.max(checks.worst(""));
            if !checks.passed() {
                failed.push(format!("{name}/seed {}", 500 + seed));
            }
        }
    }
    outcome(
        unitary_pairs > 0 && unitary_gap < 1e-12 && failed.is_empty(),
        format!(
            "{unitary_pairs} unitary pairs, (W1, W2) vs (T1, T2) {unitary_gap:.2e}, \
             transport {transport:.2e}, failures {failed:?}"
        ),
    )
}

fn characteristic_function() -> Outcome {
    let mut theta0: f64 = 0.0;
    let mut inner: f64 = 0.0;
    let mut inner_pairs = 0;
    let mut max_rho: f64 = 0.0;
    let mut extra = vec![(
        "clock-shift:n=3,scale=0.97".to_string(),
        gen_clock_shift(3, 0.97).unwrap(),
    )];
    let mut pairs = corpus();
    pairs.append(&mut extra);
    for (_, pair) in pairs.iter().filter(|(_, p)| is_cnu(p)) {
        let triple = char_triple(pair).unwrap();
        let checks = verify_triple(pair, &triple, &DiskGrid::default(), 1e-9).unwrap();
        theta0 = theta0.max(checks.worst("triple.theta0"));
        let rho = spectral_radius(&pair.product());
        if rho <= 0.95 {
            inner_pairs += 1;
            max_rho = max_rho.max(rho);
            inner = inner.max(boundary_inner_defect(&triple.theta, 128).unwrap());
        }
    }
    let mut blaschke: f64 = 0.0;
    let grid = DiskGrid::new(8, 16).points();
    for c in [c64(0.5, 0.0), c64(0.3, 0.0), c64(-0.2, 0.6), c64(0.0, 0.0)] {
        let triple = char_triple(&scalar_pair(c)).unwrap();
        let b = triple.theta.defect().basis.columns().clone();
        let bs = triple.theta.defect_star().basis.columns().clone();
        for &z in &grid {
            let th = &bs * triple.theta.eval(z).unwrap() * b.adjoint();
            let exact = (z - c) / (c64(1.0, 0.0) - c.conj() * z);
            blaschke = blaschke.max((th[(0, 0)] - exact).norm());
        }
    }
    outcome(
        theta0 < 1e-13 && blaschke < 1e-12 && inner < 1e-8 && max_rho > 0.93,
        format!(
            "Theta(0) {theta0:.2e}, Blaschke on {} points {blaschke:.2e}, \
             boundary innerness {inner:.2e} over {inner_pairs} pairs up to rho {max_rho:.3}",
            grid.len()
        ),
    )
}

fn functional_model() -> Outcome {
    let mut worst_defect: f64 = 0.0;
    let mut max_n = 0;
    let mut failed = Vec::new();
    let mut tested = 0;
    for (name, pair) in corpus().into_iter().filter(|(_, p)| is_cnu(p)) {
        let t = pair.product();
        let n = truncation_for_tail(&t, MODEL_TAIL_LIMIT, 400)
            .unwrap()
            .max(1);
        max_n = max_n.max(n);
        let checks = model_ratio_test(&pair, n).unwrap();
        tested += 1;
        worst_defect = worst_defect.max(checks.worst("model.equivalence"));
        if !checks.passed() {
            failed.push(name);
        }
    }
    outcome(
        tested > 0 && failed.is_empty(),
        format!(
            "{tested} cnu pairs, equivalence defect {worst_defect:.2e}, \
             largest N {max_n}, failures {failed:?}"
        ),
    )
}

fn invariance() -> Outcome {
    let grid = DiskGrid::default();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, pair) in corpus().into_iter().filter(|(_, p)| is_cnu(p)) {
        let a = char_triple(&pair).unwrap();
        let (conj, psi) = gen_conjugated(&pair, 77).unwrap();
        let b = char_triple(&conj).unwrap();
        let (u, us) = induced_defect_unitaries(&a, &b, &psi);
        let checks = verify_coincidence(&a, &b, &u, &us, &grid, 1e-9).unwrap();
        worst = worst.max(checks.worst(""));
        if !checks.passed() {
            failed.push(name);
        }
    }
    let a = char_triple(&scalar_pair(c64(0.3, 0.0))).unwrap();
    let b = char_triple(&scalar_pair(c64(0.4, 0.0))).unwrap();
    let one = identity(1);
    let control = verify_coincidence(&a, &b, &one, &one, &grid, 1e-9).unwrap();
    let control_residual = control.worst("coincide.theta");
    outcome(
        failed.is_empty() && !control.passed() && control_residual > 1e-2,
        format!(
            "coincidence {worst:.2e}, failures {failed:?}, \
             0.3 vs 0.4 control residual {control_residual:.3e}"
        ),
    )
}

fn pseudo_lift() -> Outcome {
    let n_max = 12;
    let mut axioms: f64 = 0.0;
    let mut failed = Vec::new();
    let mut perturbed = 0;
    let mut min_rejection = f64::INFINITY;
    let mut rigidity: f64 = 0.0;
    for (name, pair) in corpus() {
        let d = douglas_pseudo_lift(&pair, n_max).unwrap();
        let mut checks = is_pseudo_triple(&d.triple, 1e-10);
        checks.extend(is_pseudo_lift(&d.pi, &d.triple, &pair, 1e-10).unwrap());
        let unique = uniqueness_test(&pair, &d.triple, 1e-10).unwrap();
        for c in checks.checks.iter().chain(unique.checks.checks.iter()) {
            if c.tol > 0.0 {
                axioms = axioms.max(c.residual / c.tol);
            }
        }
        if !checks.passed() || !unique.accepted {
            failed.push(name.clone());
        }
        let taylor = taylor_rigidity(&d.triple, &d.fundamental, 1e-9).unwrap();
        rigidity = rigidity.max(taylor.worst(""));
        if !taylor.passed() {
            failed.push(format!("{name}/taylor"));
        }
        for (k, direction) in [true, false].into_iter().enumerate() {
            let Ok(candidate) = perturb_off_diagonal(&d.triple, 0.01, 11 + k as u64, direction)
            else {
                continue;
            };
            perturbed += 1;
            let verdict = uniqueness_test(&pair, &candidate, 1e-10).unwrap();
            let rejection = verdict
                .checks
                .failures()
                .iter()
                .map(|c| c.residual)
                .fold(0.0, f64::max);
            min_rejection = min_rejection.min(rejection);
            if verdict.accepted {
                failed.push(format!("{name}/perturbed"));
            }
        }
    }
    outcome(
        failed.is_empty() && perturbed > 0 && min_rejection >= 0.009 && rigidity < 1e-9,
        format!(
            "axiom residual/tolerance {axioms:.2e}, {perturbed} perturbations rejected with residual \
             >= {min_rejection:.4}, Taylor rigidity {rigidity:.2e}, failures {failed:?}"
        ),
    )
}

fn example_lifts() -> Outcome {
    let mut worst_sep = f64::INFINITY;
    let mut failed = Vec::new();
    for q in corpus_twists() {
        for n in [2, 8] {
            let fx = nonisolifts_fixture(n, q).unwrap();
            let sep = if fx.discriminator_b > 0.0 {
                fx.discriminator_a / fx.discriminator_b
            } else {
                f64::INFINITY
            };
            worst_sep = worst_sep.min(sep);
            if !fx.checks.passed() {
                failed.push(format!("q={q}, N={n}"));
            }
        }
    }
    outcome(
        failed.is_empty() && worst_sep >= 1e10,
        format!("smallest separation {worst_sep:.2e}, failures {failed:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 ando tuples", ando_tuples),
        ("2 schaffer lift", schaffer),
        ("3 douglas lift", douglas),
        ("4 fundamental operators", fundamentals),
        ("5 canonical unitary pair", canonical_pair),
        ("6 characteristic function", characteristic_function),
        ("7 functional model", functional_model),
        ("8 invariance of the triple", invariance),
        ("9 pseudo lift uniqueness", pseudo_lift),
        ("10 nonisomorphic minimal lifts", example_lifts),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let start = std::time::Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        all &= pass;
        println!(
            "{} criterion {name}: {detail} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
