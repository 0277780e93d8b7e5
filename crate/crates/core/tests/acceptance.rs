//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oplab::analysis;
use oplab::grid::{self, AffineMap, Builtin, GridDomain, GridFunction};
use oplab::measure::{self, AtomicMeasureSpace};
use oplab::oracle::{self, Instance, InstanceGenerator};
use oplab::orlicz::{self, OrliczFunction};
use oplab::rational::{self, Rational};

const SEED: u64 = 42;
const RANDOM_INSTANCES: usize = 1000;
const MAX_ATOMS: usize = 10;
const TIME_BUDGET: Duration = Duration::from_secs(10);
const NORM_REL_TOL: f64 = 1e-10;
const MIN_ORDER: f64 = 1.9;
const AFFINE_RESIDUAL_TOL: f64 = 1e-10;
const VANISHING_TOL: f64 = 1e-14;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn equivalence_instances() -> Vec<Instance> {
    let gen = InstanceGenerator::new(SEED, MAX_ATOMS);
    let mut all: Vec<Instance> = oracle::generate(&gen)
        .expect("generator configuration is valid")
        .take(RANDOM_INSTANCES)
        .collect::<Result<_, _>>()
        .expect("nonsingular instances are plentiful");
    let pool = vec![rational::zero(), rational::one(), rational::int(2)];
    all.extend(oracle::exhaustive_instances(3, &pool));
    all
}

fn criterion_1(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut disagreements = 0;
    for i in instances {
        let theorem = analysis::ascent(&i.map, &i.space).map(|a| a.ascent);
        let oracle = oracle::oracle_ascent(&i.map, &i.space);
        match (theorem, oracle) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => disagreements += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements == 0 && elapsed < TIME_BUDGET,
        format!(
            "{} instances, {disagreements} disagreements, {:.2} s (budget {} s)",
            instances.len(),
            elapsed.as_secs_f64(),
            TIME_BUDGET.as_secs()
        ),
    )
}

fn criterion_2(instances: &[Instance]) -> Outcome {
    let mut disagreements = 0;
    let mut injective = 0;
    for i in instances {
        let kernel_trivial = analysis::kernel(&i.map, &i.space).map(|k| k.kernel_dimension == 0);
        let surjective = measure::is_essentially_surjective(&i.map, &i.space);
        match (kernel_trivial, surjective) {
            (Ok(a), Ok(b)) if a == b => injective += usize::from(a),
            _ => disagreements += 1,
        }
    }
    outcome(
        disagreements == 0,
        format!("{} instances ({injective} injective), {disagreements} disagreements", instances.len()),
    )
}

fn criterion_3(instances: &[Instance]) -> Outcome {
    let mut disagreements = 0;
    for i in instances {
        let oracle = oracle::oracle_kernel(&i.map, &i.space);
        let omega0 = analysis::kernel(&i.map, &i.space).map(|k| {
            k.omega0.into_iter().filter(|&a| !i.space.is_null(a)).collect()
        });
        match (oracle, omega0) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => disagreements += 1,
        }
    }
    outcome(disagreements == 0, format!("{} instances, {disagreements} disagreements", instances.len()))
}

fn ascent_is_one(i: &Instance) -> bool {
    matches!(analysis::ascent(&i.map, &i.space), Ok(a) if a.ascent == 1)
        && matches!(oracle::oracle_ascent(&i.map, &i.space), Ok(1))
}

fn collect_filtered(seed: u64, max_atoms: usize, want: usize, keep: impl Fn(&Instance) -> bool) -> Vec<Instance> {
    oracle::generate(&InstanceGenerator::new(seed, max_atoms))
        .expect("generator configuration is valid")
        .map(|i| i.expect("nonsingular instances are plentiful"))
        .filter(|i| keep(i))
        .take(want)
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let permutations: Vec<Instance> = (0..200)
        .map(|_| {
            let n = rng.gen_range(1..=MAX_ATOMS);
            oracle::random_equal_weight_permutation(&mut rng, n)
        })
        .collect();
    let expansive = collect_filtered(SEED + 1, 4, 200, |i| {
        oracle::oracle_expansive(&i.map, &i.space).map(|c| c.holds).unwrap_or(false)
    });
    let surjective = collect_filtered(SEED + 2, MAX_ATOMS, 200, |i| {
        measure::is_essentially_surjective(&i.map, &i.space).unwrap_or(false)
    });
    let preserving = permutations
        .iter()
        .all(|i| measure::is_measure_preserving(&i.map, &i.space).unwrap_or(false));
    let counts = [&permutations, &expansive, &surjective].map(|set| set.iter().filter(|i| ascent_is_one(i)).count());
    let sizes = [permutations.len(), expansive.len(), surjective.len()];
    outcome(
        preserving && sizes == [200; 3] && counts == [200; 3],
        format!(
            "ascent 1 on {}/{} permutations, {}/{} expansive, {}/{} essentially surjective",
            counts[0], sizes[0], counts[1], sizes[1], counts[2], sizes[2]
        ),
    )
}

fn criterion_5() -> Outcome {
    let instances = collect_filtered(SEED + 3, MAX_ATOMS, 100, |_| true);
    let mut failures = 0;
    let mut deepest = 0;
    for i in &instances {
        let mut check = || -> oplab::Result<bool> {
            let k = analysis::ascent(&i.map, &i.space)?.ascent;
            let mu_k = measure::pushforward(&i.map, &i.space, k)?;
            let mu_k1 = measure::pushforward(&i.map, &i.space, k + 1)?;
            if !measure::measures_equivalent(&mu_k, &mu_k1)? {
                return Ok(false);
            }
            let f_k = measure::rn_derivative(&mu_k, &i.space)?.values;
            let f_k1 = measure::rn_derivative(&mu_k1, &i.space)?.values;
            let factor = measure::rn_chain_factor(&mu_k, &mu_k1, &i.space)?;
            deepest = deepest.max(k);
            Ok((0..i.space.len()).all(|a| f_k[a] == &factor[a] * &f_k1[a]))
        };
        if !check().unwrap_or(false) {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && instances.len() == 100,
        format!("{} instances (ascent up to {deepest}), {failures} atomwise mismatches", instances.len()),
    )
}

fn p_norm(f: &[f64], w: &[f64], p: f64) -> f64 {
    f.iter().zip(w).map(|(v, w)| v.abs().powf(p) * w).sum::<f64>().powf(1.0 / p)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &p in &[1.5, 2.0, 3.0] {
        let phi = OrliczFunction::power(p).expect("p > 1");
        for carrier in 0..3 {
            for _ in 0..100 {
                let (f, w): (Vec<f64>, Vec<f64>) = match carrier {
                    0 => {
                        let n = rng.gen_range(1..=MAX_ATOMS);
                        let mut weights: Vec<Rational> =
                            (0..n).map(|_| rational::ratio(rng.gen_range(0..=12), rng.gen_range(1..=6))).collect();
                        weights[rng.gen_range(0..n)] = rational::ratio(rng.gen_range(1..=12), rng.gen_range(1..=6));
                        let space = AtomicMeasureSpace::from_weights(weights).expect("one weight is positive");
                        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                        let err = check_norm(&phi, &f, &space, p);
                        worst = worst.max(err);
                        cases += 1;
                        continue;
                    }
                    1 => {
                        let d = GridDomain::interval(0.0, rng.gen_range(0.5..3.0), rng.gen_range(4..64)).unwrap();
                        let f = (0..d.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
                        (f, vec![d.cell_volume(); d.len()])
                    }
                    _ => {
                        let d = GridDomain::unit(2, rng.gen_range(4..24)).unwrap();
                        let f = (0..d.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
                        (f, vec![d.cell_volume(); d.len()])
                    }
                };
                let n = orlicz::luxemburg_norm(&phi, &f, &w[..], orlicz::DEFAULT_TOL).unwrap_or(f64::NAN);
                let exact = p_norm(&f, &w, p);
                worst = worst.max((n - exact).abs() / (1.0 + exact));
                cases += 1;
            }
        }
    }
    outcome(
        worst <= NORM_REL_TOL,
        format!("{cases} functions, worst |norm - p-norm| / (1 + p-norm) = {worst:.2e} (limit {NORM_REL_TOL:.0e})"),
    )
}

fn check_norm(phi: &OrliczFunction, f: &[f64], space: &AtomicMeasureSpace, p: f64) -> f64 {
    let w: Vec<f64> = space.weights().iter().map(rational::to_f64).collect();
    let n = orlicz::luxemburg_norm(phi, f, space, orlicz::DEFAULT_TOL).unwrap_or(f64::NAN);
    let exact = p_norm(f, &w, p);
    let err = (n - exact).abs() / (1.0 + exact);
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

fn unit_square_maps() -> Vec<(&'static str, AffineMap)> {
    vec![
        (
            "reflection",
            AffineMap::new(vec![vec![-1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 0.0]).unwrap(),
        ),
        (
            "contraction",
            AffineMap::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]], vec![0.0, 0.0]).unwrap(),
        ),
        ("swap", AffineMap::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 0.0]).unwrap()),
    ]
}

fn criterion_7() -> (Outcome, Vec<String>) {
    let base = GridDomain::unit(2, 32).unwrap();
    let resolutions = [32, 64, 128];
    let mut pass = true;
    let mut rows = Vec::new();
    for f in [Builtin::Quadratic, Builtin::Product] {
        for (name, t) in unit_square_maps() {
            let study = grid::chain_rule_convergence(|d| Ok(f.sample(d)), &t, &base, &resolutions).unwrap();
            let ok = study.passes(MIN_ORDER);
            pass &= ok;
            let order = if study.is_exact() {
                "exact".to_string()
            } else {
                format!("{:.3}", study.min_order())
            };
            rows.push(format!(
                "{}x{name}: finest residual {:.2e}, order {order}",
                f.name(),
                study.finest_residual()
            ));
        }
    }
    let mut worst_affine = 0.0f64;
    let affine_maps = unit_square_maps().into_iter().map(|(_, t)| t).chain([AffineMap::new(
        vec![vec![0.5, 0.25], vec![-0.25, 0.5]],
        vec![0.25, 0.375],
    )
    .unwrap()]);
    for t in affine_maps {
        for &m in &resolutions {
            let d = base.with_resolution(m).unwrap();
            let f = GridFunction::from_fn(&d, |x| 2.0 * x[0] - 3.0 * x[1] + 0.25).unwrap();
            let r = grid::verify_chain_rule(&f, &t, &d).unwrap().max_abs_residual;
            worst_affine = worst_affine.max(r);
        }
    }
    pass &= worst_affine <= AFFINE_RESIDUAL_TOL;
    rows.push(format!("affine x affine: worst residual {worst_affine:.2e}"));

    let (layer, away) = first_layer_split(Builtin::Quadratic, &unit_square_maps()[1].1, &resolutions);
    let collar = format!(
        "quadratic x contraction residual on the first interior layer {:?}, elsewhere {:?}",
        layer.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>(),
        away.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()
    );

    let bump = grid::chain_rule_convergence(
        |d| Ok(Builtin::Bump.sample(d)),
        &AffineMap::new(vec![vec![0.5]], vec![0.0]).unwrap(),
        &GridDomain::interval(0.0, 1.0, 128).unwrap(),
        &[128, 256, 512],
    )
    .unwrap();
    let extra = format!(
        "bump x contraction on [0,1], m = 128, 256, 512: orders {:?}",
        bump.orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
    );
    (outcome(pass, rows.join("; ")), vec![collar, extra])
}

/// Chain-rule residual split into the first interior layer (cells adjacent
/// to a boundary cell) and the rest of the interior.
fn first_layer_split(f: Builtin, t: &AffineMap, resolutions: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut layer = Vec::new();
    let mut away = Vec::new();
    for &m in resolutions {
        let d = GridDomain::unit(2, m).unwrap();
        let s = f.sample(&d);
        let composed = grid::compose(&s, t, &d).unwrap();
        let grads: Vec<GridFunction> = (0..2)
            .map(|k| grid::compose(&grid::weak_derivative(&s, &d, k).unwrap(), t, &d).unwrap())
            .collect();
        let (mut near, mut far) = (0.0f64, 0.0f64);
        for i in 0..2 {
            let lhs = grid::weak_derivative(&composed, &d, i).unwrap();
            for idx in (0..d.len()).filter(|&idx| d.is_interior(idx)) {
                let rhs: f64 = (0..2).map(|k| grads[k].samples()[idx] * t.matrix()[k][i]).sum();
                let r = (lhs.samples()[idx] - rhs).abs();
                if d.multi_index(idx).iter().any(|&j| j == 1 || j == m - 2) {
                    near = near.max(r);
                } else {
                    far = far.max(r);
                }
            }
        }
        layer.push(near);
        away.push(far);
    }
    (layer, away)
}

fn criterion_8() -> Outcome {
    let d = GridDomain::unit(2, 128).unwrap();
    let phi = OrliczFunction::power(2.0).unwrap();
    let mut pass = true;
    let mut rows = Vec::new();
    for f in [Builtin::Quadratic, Builtin::Product] {
        for (name, t) in unit_square_maps() {
            let b = grid::verify_boundedness(&phi, &f.sample(&d), &t, &d).unwrap();
            pass &= b.holds;
            rows.push(format!("{}x{name}: {:.4} <= {:.4}", f.name(), b.lhs, b.rhs + b.slack));
        }
    }
    outcome(pass, rows.join("; "))
}

fn criterion_9() -> Outcome {
    let maps_1d = [(0.5, 0.0), (1.0 / 3.0, 1.0 / 3.0), (0.25, 0.5), (0.5, 0.5), (0.75, 0.0)];
    let maps_2d = [
        (vec![vec![0.5, 0.0], vec![0.0, 0.5]], vec![0.0, 0.0]),
        (vec![vec![0.5, 0.0], vec![0.0, 1.0]], vec![0.25, 0.0]),
        (vec![vec![0.25, 0.25], vec![-0.25, 0.25]], vec![0.25, 0.5]),
        (vec![vec![0.0, 0.5], vec![0.5, 0.0]], vec![0.5, 0.5]),
        (vec![vec![1.0, 0.0], vec![0.0, 0.25]], vec![0.0, 0.0]),
    ];
    let mut cases: Vec<(GridDomain, AffineMap)> = Vec::new();
    for (m, (a, b)) in [64, 96].into_iter().flat_map(|m| maps_1d.iter().map(move |ab| (m, *ab))) {
        cases.push((GridDomain::interval(0.0, 1.0, m).unwrap(), AffineMap::new(vec![vec![a]], vec![b]).unwrap()));
    }
    for (m, (a, b)) in [24, 32].into_iter().flat_map(|m| maps_2d.iter().map(move |ab| (m, ab.clone()))) {
        cases.push((GridDomain::unit(2, m).unwrap(), AffineMap::new(a, b).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst = 0.0f64;
    let mut pass = true;
    for (d, t) in &cases {
        let f_t = grid::affine_rn_derivative(t, d).unwrap();
        let mask: Vec<bool> = f_t.samples().iter().map(|&v| v == 0.0).collect();
        pass &= mask.iter().any(|&b| b);
        let g = GridFunction::new(
            mask.iter()
                .map(|&inside| if inside { rng.gen_range(-3.0..3.0) } else { 0.0 })
                .collect(),
        )
        .unwrap();
        let r = grid::verify_kernel_derivative_vanishing(&g, &mask, d).unwrap();
        worst = worst.max(r.max_outside);
    }
    pass &= worst <= VANISHING_TOL && cases.len() == 20;
    outcome(
        pass,
        format!("{} masked functions, worst derivative outside mask and band {worst:.2e}", cases.len()),
    )
}

fn criterion_10() -> Outcome {
    let families = [
        ("power(1.5)", OrliczFunction::power(1.5).unwrap(), true),
        ("power(3)", OrliczFunction::power(3.0).unwrap(), true),
        ("power_log(1)", OrliczFunction::power_log(1.0).unwrap(), true),
        ("power_log(2)", OrliczFunction::power_log(2.0).unwrap(), true),
        ("exp_minus", OrliczFunction::exp_minus(), false),
    ];
    let mut pass = true;
    let mut rows = Vec::new();
    for (name, phi, expected) in families {
        let r = orlicz::delta2_check(&phi, 0.01, 50.0, 64).unwrap();
        // The same function seen only through samples must reach the same verdict.
        let sampled_phi = {
            let inner = phi.clone();
            OrliczFunction::custom(name, move |t| inner.eval(t).unwrap_or(f64::NAN), true).unwrap()
        };
        let sampled = orlicz::delta2_check(&sampled_phi, 0.01, 50.0, 64).unwrap();
        let mut ok = r.satisfied_on_sample == expected && sampled.satisfied_on_sample == expected;
        if !expected {
            ok &= r.ratios_blow_up() && r.witness_u == 50.0;
        }
        pass &= ok;
        rows.push(format!(
            "{name}: {} (max ratio {:.3e} at u = {})",
            if r.satisfied_on_sample { "satisfied" } else { "not satisfied" },
            r.max_ratio,
            r.witness_u
        ));
    }
    outcome(pass, rows.join("; "))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

const GOLDEN: [(&str, &str); 5] = [
    ("shift_to_sink", "analyze"),
    ("identity", "analyze"),
    ("singular", "analyze"),
    ("reflection_quadratic", "verify"),
    ("contraction_linear", "norm"),
];

fn criterion_11() -> Outcome {
    let mut mismatches = Vec::new();
    for (name, cmd) in GOLDEN {
        let scenario = fixtures().join("scenarios").join(format!("{name}.json"));
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_oplab"))
                .args([cmd, "--json"])
                .arg(&scenario)
                .output()
                .expect("oplab runs")
        };
        let (a, b) = (run(), run());
        let golden = std::fs::read(fixtures().join("golden").join(format!("{name}.{cmd}.json"))).unwrap_or_default();
        if !(a.status.success() && a.stdout == b.stdout && a.stdout == golden) {
            mismatches.push(name);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} fixtures, mismatched: {mismatches:?}", GOLDEN.len()),
    )
}

fn main() {
    let instances = equivalence_instances();
    let (c7, extra) = criterion_7();
    let results = [
        ("ascent equals oracle ascent", criterion_1(&instances)),
        ("kernel trivial iff essentially surjective", criterion_2(&instances)),
        ("oracle kernel equals Omega_0 on positive atoms", criterion_3(&instances)),
        ("measure-preserving, expansive, essentially surjective give ascent 1", criterion_4()),
        ("RN derivative chain rule at the ascent", criterion_5()),
        ("Luxemburg norm equals p-norm for power functions", criterion_6()),
        ("grid chain rule converges at second order", c7),
        ("composition operator bound", criterion_8()),
        ("derivatives vanish away from Omega_0 masks", criterion_9()),
        ("Delta_2 verdicts", criterion_10()),
        ("CLI golden reports are byte-identical", criterion_11()),
    ];
    let mut failed = 0;
    for (i, (title, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {} {title}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    for line in &extra {
        println!("info: {line}");
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
