//! Acceptance run: one line per criterion, `criterion N: PASS|FAIL <evidence>`.
//!
//! Runs without the libtest harness so the lines always reach the output. The
//! process exits nonzero when a criterion fails, except for the single
//! tolerated failure in criterion 5. That failure is pinned to the exact size
//! of its discrepancy, so any other deviation still fails the run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;

use ddshap::circuit::{running_example, Circuit, DeterminismReport, Entity, FeatureId, Gate, ProductDistribution};
use ddshap::encoders::{compile_obdd, encode_decision_tree, encode_fbdd, encode_tree, VERIFY_BOUND};
use ddshap::engine::{
    model_count_via_shap, shap_all, shap_score, shap_score_nonbinary, shap_score_smooth, shap_score_with_stats,
    smooth_trace,
};
use ddshap::formulas::{
    build_gnt, build_theta, build_theta_unchecked, comparison_reduction, gnt_shap_closed_form, gnt_shap_exact,
    ones_except, shap_clique_form, shap_conjunction_form, shap_difference_form, shap_disjunction_form, Attach,
    GntParams, WithFresh,
};
use ddshap::num::{format_fraction, pow2, rat, Rational};
use ddshap::oracle::{
    all_entities, model_count, shap_bruteforce_all, shap_bruteforce_permutations, Classifier, Negated,
    PERMUTATION_LIMIT,
};
use ddshap::testgen::{
    binary_space, block_circuit, chain_circuit, random_dd_circuit, random_distribution, random_dnf, random_entity,
    random_fbdd, random_graph, random_neg2_cnf, random_space, random_tree, rng, DdConfig,
};

struct Outcome {
    pass: bool,
    /// A failure that is understood and recorded; does not fail the run.
    tolerated: bool,
    evidence: String,
}

impl Outcome {
    fn check(pass: bool, evidence: String) -> Self {
        Outcome { pass, tolerated: false, evidence }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// The permutation definition is factorial in the feature count; only run it where it is cheap.
fn permutation_scores<M: Classifier>(m: &M, p: &ProductDistribution, e: &Entity) -> Option<Vec<Rational>> {
    (m.space().len() <= PERMUTATION_LIMIT.min(7)).then(|| {
        m.space()
            .features()
            .map(|x| shap_bruteforce_permutations(m, p, e, x).expect("within the permutation limit"))
            .collect()
    })
}

/// Scores of `m` from the engine, through its reduced OBDD.
fn engine_scores<M: Classifier>(m: &M, p: &ProductDistribution, e: &Entity) -> Vec<Rational> {
    let c = encode_fbdd(&compile_obdd(m).expect("binary and small")).expect("OBDDs are free");
    shap_all(&c, p, e).expect("certified circuit").scores
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c = running_example().trust_determinism();
    let p = ProductDistribution::uniform(c.space());
    let e = Entity::from_bits(c.space(), &[1, 0, 1, 1]).unwrap();
    let report = shap_all(&c, &p, &e).unwrap();
    let elapsed = start.elapsed();
    let expected = [("fg", rat(23, 64)), ("dtr", rat(-9, 64)), ("nf", rat(15, 64)), ("na", rat(15, 64))];
    let got: Vec<String> = expected
        .iter()
        .map(|(name, _)| format!("{name}={}", format_fraction(report.score(c.space().feature(name).unwrap()))))
        .collect();
    let exact = expected.iter().all(|(name, want)| report.score(c.space().feature(name).unwrap()) == want);
    Outcome::check(exact && elapsed < Duration::from_secs(1), format!("{} in {}", got.join(" "), secs(elapsed)))
}

fn criterion_2() -> Outcome {
    let c = running_example().trust_determinism();
    let p = ProductDistribution::uniform(c.space());
    let e = Entity::from_bits(c.space(), &[1, 0, 1, 1]).unwrap();
    let space = c.space();
    let nf = space.feature("nf").unwrap();
    let trace = smooth_trace(&c, &p, &e, nf).unwrap();
    let d = &trace.circuit;
    let out = &trace.tables[d.output().0];
    let r = |q: &[(i64, i64)]| q.iter().map(|&(a, b)| rat(a, b)).collect::<Vec<_>>();
    let output_ok =
        out.gamma == r(&[(3, 8), (3, 2), (2, 1), (1, 1)]) && out.delta == r(&[(1, 4), (3, 4), (1, 2), (0, 1)]);

    #[derive(Clone, Copy)]
    enum Kind {
        And,
        Or,
        Not,
        Var,
    }
    // Annotated gates of the smoothed circuit: kind, variables, γ, δ.
    type Annotation<'a> = (&'a str, Kind, &'a [&'a str], Vec<Rational>, Vec<Rational>);
    let annotated: [Annotation; 12] = [
        ("top or", Kind::Or, &["dtr", "nf", "na"], r(&[(3, 4), (3, 2), (1, 1)]), r(&[(1, 2), (1, 2), (0, 1)])),
        (
            "and under not-dtr",
            Kind::And,
            &["dtr", "nf", "na"],
            r(&[(1, 4), (1, 1), (1, 1)]),
            r(&[(0, 1), (0, 1), (0, 1)]),
        ),
        (
            "padded dtr branch",
            Kind::And,
            &["dtr", "nf", "na"],
            r(&[(1, 2), (1, 2), (0, 1)]),
            r(&[(1, 2), (1, 2), (0, 1)]),
        ),
        ("and of nf, na", Kind::And, &["nf", "na"], r(&[(1, 2), (1, 1)]), r(&[(0, 1), (0, 1)])),
        ("not dtr", Kind::Not, &["dtr"], r(&[(1, 2), (1, 1)]), r(&[(1, 2), (1, 1)])),
        ("dtr leaf", Kind::Var, &["dtr"], r(&[(1, 2), (0, 1)]), r(&[(1, 2), (0, 1)])),
        ("fg leaf", Kind::Var, &["fg"], r(&[(1, 2), (1, 1)]), r(&[(1, 2), (1, 1)])),
        ("na leaf", Kind::Var, &["na"], r(&[(1, 2), (1, 1)]), r(&[(1, 2), (1, 1)])),
        ("nf leaf", Kind::Var, &["nf"], r(&[(1, 1)]), r(&[(0, 1)])),
        ("not nf", Kind::Not, &["nf"], r(&[(0, 1)]), r(&[(1, 1)])),
        ("nf tautology", Kind::Or, &["nf"], r(&[(1, 1)]), r(&[(1, 1)])),
        ("na tautology", Kind::Or, &["na"], r(&[(1, 1), (1, 1)]), r(&[(1, 1), (1, 1)])),
    ];
    let mut matched = Vec::new();
    let mut missing = Vec::new();
    for (label, kind, vars, gamma, delta) in &annotated {
        let found = d.gates().iter().enumerate().any(|(i, g)| {
            let kind_ok = matches!(
                (kind, g),
                (Kind::And, Gate::And(_))
                    | (Kind::Or, Gate::Or(_))
                    | (Kind::Not, Gate::Not(_))
                    | (Kind::Var, Gate::Variable(_))
            );
            let set = d.var_set(ddshap::GateId(i));
            let vars_ok =
                set.count_ones(..) == vars.len() && vars.iter().all(|v| set.contains(space.feature(v).unwrap().0));
            kind_ok && vars_ok && &trace.tables[i].gamma == gamma && &trace.tables[i].delta == delta
        });
        if found {
            matched.push(*label)
        } else {
            missing.push(*label)
        }
    }
    Outcome::check(
        output_ok && missing.is_empty() && matched.len() >= 4,
        format!(
            "output gate table {}; {}/{} further annotated gates reproduced{}",
            if output_ok { "exact" } else { "MISMATCH" },
            matched.len(),
            annotated.len(),
            if missing.is_empty() { String::new() } else { format!(", missing {missing:?}") }
        ),
    )
}

struct CorpusCase {
    circuit: Circuit,
    p: ProductDistribution,
    e: Entity,
}

fn corpus() -> Vec<CorpusCase> {
    (0..500u64)
        .map(|i| {
            let mut g = rng(10_000 + i);
            let n = 3 + (i % 10) as usize;
            let max_domain = if i % 3 == 0 { 3 } else { 2 };
            let space = random_space(&mut g, n, max_domain);
            let circuit = random_dd_circuit(&mut g, &space, DdConfig::default());
            let p = random_distribution(&mut g, &space);
            let e = random_entity(&mut g, &space);
            CorpusCase { circuit, p, e }
        })
        .collect()
}

fn criterion_3(cases: &[CorpusCase]) -> Outcome {
    let start = Instant::now();
    let results: Vec<(bool, bool)> = cases
        .par_iter()
        .map(|case| {
            let (c, p, e) = (&case.circuit, &case.p, &case.e);
            let alg2 = shap_all(c, p, e).unwrap().scores;
            let alg1: Vec<Rational> = c.space().features().map(|x| shap_score_smooth(c, p, e, x).unwrap()).collect();
            let subsets = shap_bruteforce_all(c, p, e).unwrap();
            let perms = permutation_scores(c, p, e);
            let agree = alg2 == alg1 && alg1 == subsets && perms.as_ref().is_none_or(|q| q == &subsets);
            (agree, perms.is_some())
        })
        .collect();
    let elapsed = start.elapsed();
    let agreed = results.iter().filter(|r| r.0).count();
    let with_perms = results.iter().filter(|r| r.1).count();
    let non_binary = cases.iter().filter(|c| !c.circuit.space().is_binary()).count();
    let sizes: Vec<usize> = cases.iter().map(|c| c.circuit.space().len()).collect();
    Outcome::check(
        agreed == cases.len() && cases.len() >= 500 && elapsed < Duration::from_secs(120),
        format!(
            "{agreed}/{} circuits ({}..={} features, {non_binary} non-binary) agree across the engine, smoothed tables and subsets; \
             {with_perms} also by permutations; {}",
            cases.len(),
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap(),
            secs(elapsed)
        ),
    )
}

fn criterion_4(cases: &[CorpusCase]) -> Outcome {
    let agreed = cases
        .par_iter()
        .filter(|case| {
            let via_shap = model_count_via_shap(&case.circuit, &case.e).unwrap();
            via_shap == model_count(&case.circuit).unwrap()
        })
        .count();
    let c = running_example().trust_determinism();
    let figure = all_entities(c.space()).map(|e| model_count_via_shap(&c, &e).unwrap()).collect::<Vec<_>>();
    let figure_ok = figure.iter().all(|k| k == &5u8.into());
    Outcome::check(
        agreed == cases.len() && figure_ok,
        format!(
            "{agreed}/{} corpus circuits: |entities|·(C(e) − ΣSHAP) = #sat; running example gives {} for all 16 entities",
            cases.len(),
            figure[0]
        ),
    )
}

fn gnt_bruteforce(params: GntParams) -> Rational {
    theta_conjunction_bruteforce(&build_gnt(params), true)
}

/// `SHAP(¬θ(G) ∧ ¬x, e, x)` at `e(x) = 0`, every other feature 1.
fn theta_conjunction_bruteforce(g: &ddshap::formulas::Graph, checked: bool) -> Rational {
    let theta = if checked { build_theta(g).unwrap() } else { build_theta_unchecked(g).unwrap() };
    let gadget = WithFresh::new(Negated(&theta), "x", Attach::AndNot).unwrap();
    let e = ones_except(gadget.space(), &[gadget.fresh()]);
    let p = ProductDistribution::uniform(gadget.space());
    ddshap::oracle::shap_bruteforce_subsets(&gadget, &p, &e, gadget.fresh()).unwrap()
}

fn criterion_5() -> Outcome {
    let mut pairs = 0;
    let mut stated_matches = 0;
    let mut gap_is_isolated_singletons = true;
    let mut exact_matches = 0;
    let mut brute = std::collections::HashMap::new();
    for n in 2..=10usize {
        for t in 2..=n {
            let params = GntParams::new(n, t).unwrap();
            let value = gnt_bruteforce(params);
            pairs += 1;
            if value == gnt_shap_closed_form(params) {
                stated_matches += 1;
            }
            if value == gnt_shap_exact(params) {
                exact_matches += 1;
            }
            let gap = rat(t as i64, 2 * (n as i64 + 1)) * pow2(-(n as i64));
            gap_is_isolated_singletons &= &value - gnt_shap_closed_form(params) == gap;
            brute.insert((n, t), value);
        }
    }
    // Monotonicity in t.
    let mut stated_strict = true;
    let mut brute_strict_below_edgeless = true;
    let mut brute_tie_at_edgeless = true;
    for n in 3..=10usize {
        for t in 2..n {
            let (a, b) = (GntParams::new(n, t).unwrap(), GntParams::new(n, t + 1).unwrap());
            stated_strict &= gnt_shap_closed_form(a) > gnt_shap_closed_form(b);
            if t + 1 < n {
                brute_strict_below_edgeless &= brute[&(n, t)] > brute[&(n, t + 1)];
            } else {
                // G_{n,n−1} and G_{n,n} are both edgeless.
                brute_tie_at_edgeless &= brute[&(n, t)] == brute[&(n, t + 1)];
            }
        }
    }
    // Sandwich over random graphs with at least two isolated nodes.
    let mut g = rng(55);
    let mut graphs = 0;
    let (mut stated_violations, mut stated_below, mut exact_violations) = (0, 0, 0);
    for n in 2..=10usize {
        let (lo, hi) = (GntParams::new(n, n).unwrap(), GntParams::new(n, 2).unwrap());
        for _ in 0..50 {
            let isolated = g.gen_range(2..=n);
            let density = g.gen_range(0.3..=1.0);
            let graph = random_graph(&mut g, n, density, isolated);
            let value = theta_conjunction_bruteforce(&graph, true);
            graphs += 1;
            if !(gnt_shap_closed_form(lo) <= value && value <= gnt_shap_closed_form(hi)) {
                stated_violations += 1;
                stated_below += (value < gnt_shap_closed_form(lo)) as usize;
            }
            if !(gnt_shap_exact(lo) <= value && value <= gnt_shap_exact(hi)) {
                exact_violations += 1;
            }
        }
    }
    let pass = stated_matches == pairs && stated_strict && brute_strict_below_edgeless && stated_violations == 0;
    // The closed form drops #CLIQUE(G,∅)'s t singleton cliques; tolerate exactly that.
    let tolerated = !pass
        && gap_is_isolated_singletons
        && exact_matches == pairs
        && stated_strict
        && brute_strict_below_edgeless
        && brute_tie_at_edgeless
        && exact_violations == 0;
    let e83 = gnt_shap_exact(GntParams::new(8, 3).unwrap());
    Outcome {
        pass,
        tolerated,
        evidence: format!(
            "brute force equals the stated closed form on {stated_matches}/{pairs} (n,t) pairs; it exceeds it by \
             exactly t/(2(n+1)2^n) on {}/{pairs} (e.g. n=8,t=3: {} vs 97/6144); closed form strictly decreasing: {}; \
             brute force strictly decreasing for t<n-1: {}, tied at t=n-1,n (same edgeless graph): {}; sandwich over \
             {graphs} random graphs: {stated_violations} violations with the stated bounds ({stated_below} below the \
             lower one), {exact_violations} with the brute-force bounds",
            if gap_is_isolated_singletons { pairs } else { 0 },
            format_fraction(&e83),
            stated_strict,
            brute_strict_below_edgeless,
            brute_tie_at_edgeless,
        ),
    }
}

/// Counts of instances where all ways agree, per identity.
fn criterion_6() -> Outcome {
    let mut g = rng(66);
    let instances = 100;
    let mut tallies: Vec<(&str, usize)> = Vec::new();

    let mut ok = 0;
    for _ in 0..instances {
        let k = g.gen_range(2..=9);
        let terms = g.gen_range(1..=6);
        let m = random_dnf(&mut g, &binary_space(k), terms, 3);
        let gadget = WithFresh::new(&m, "x", Attach::Or).unwrap();
        let p = ProductDistribution::uniform(gadget.space());
        let e = ones_except(gadget.space(), &[]);
        let x = gadget.fresh().0;
        let form = shap_disjunction_form(&m).unwrap();
        ok += agree_four(&gadget, &p, &e, |scores| scores[x].clone(), &form) as usize;
    }
    tallies.push(("disjunction", ok));

    let mut ok = 0;
    for _ in 0..instances {
        let k = g.gen_range(2..=9);
        let terms = g.gen_range(1..=6);
        let m = random_dnf(&mut g, &binary_space(k), terms, 3);
        let gadget = WithFresh::new(&m, "x", Attach::AndNot).unwrap();
        let p = ProductDistribution::uniform(gadget.space());
        let e = ones_except(gadget.space(), &[gadget.fresh()]);
        let x = gadget.fresh().0;
        let form = shap_conjunction_form(&m).unwrap();
        ok += agree_four(&gadget, &p, &e, |scores| scores[x].clone(), &form) as usize;
    }
    tallies.push(("conjunction", ok));

    let mut ok = 0;
    for _ in 0..instances {
        let n = g.gen_range(2..=9);
        let isolated = g.gen_range(0..=2.min(n));
        let density = g.gen_range(0.2..=0.9);
        let graph = random_graph(&mut g, n, density, isolated);
        let theta = build_theta_unchecked(&graph).unwrap();
        let form = shap_clique_form(&graph).unwrap();
        let or = WithFresh::new(&theta, "x", Attach::Or).unwrap();
        let p = ProductDistribution::uniform(or.space());
        let x = or.fresh().0;
        let or_ok = agree_four(&or, &p, &ones_except(or.space(), &[]), |s| s[x].clone(), &form);
        let and = WithFresh::new(Negated(&theta), "x", Attach::AndNot).unwrap();
        let and_ok = agree_four(&and, &p, &ones_except(and.space(), &[and.fresh()]), |s| s[x].clone(), &form);
        ok += (or_ok && and_ok) as usize;
    }
    tallies.push(("clique", ok));

    let mut ok = 0;
    for _ in 0..instances {
        let k = g.gen_range(2..=10);
        let space = binary_space(k);
        let terms = g.gen_range(1..=6);
        let m = random_dnf(&mut g, &space, terms, 3);
        let p = random_distribution(&mut g, &space);
        let e = random_entity(&mut g, &space);
        let x = g.gen_range(0..k);
        let y = (x + g.gen_range(1..k)) % k;
        let form = shap_difference_form(&m, &p, &e, FeatureId(x), FeatureId(y)).unwrap();
        ok += agree_four(&m, &p, &e, |s| &s[x] - &s[y], &form) as usize;
    }
    tallies.push(("difference", ok));

    let mut ok = 0;
    for _ in 0..instances {
        let k = g.gen_range(2..=8);
        let space = binary_space(k);
        let (c1, c2) = (g.gen_range(1..=5), g.gen_range(1..=5));
        let m = random_neg2_cnf(&mut g, &space, c1);
        let m2 = random_neg2_cnf(&mut g, &space, c2);
        let red = comparison_reduction(&m, &m2, "x", "y").unwrap();
        let side = |f: &ddshap::formulas::CnfFormula| {
            let gadget = WithFresh::new(f, "x", Attach::AndNot).unwrap();
            let p = ProductDistribution::uniform(gadget.space());
            let e = ones_except(gadget.space(), &[gadget.fresh()]);
            ddshap::oracle::shap_bruteforce_subsets(&gadget, &p, &e, gadget.fresh()).unwrap()
        };
        let lhs = side(&m) - side(&m2);
        let lhs_form = shap_conjunction_form(&m).unwrap() - shap_conjunction_form(&m2).unwrap();
        let p = ProductDistribution::uniform(red.gadget.space());
        let (x, y) = (red.x.0, red.y.0);
        ok += (lhs == lhs_form && agree_four(&red.gadget, &p, &red.entity, |s| &s[y] - &s[x], &lhs)) as usize;
    }
    tallies.push(("reduction", ok));

    let pass = tallies.iter().all(|&(_, n)| n == instances);
    let summary: Vec<String> = tallies.iter().map(|(name, n)| format!("{name} {n}/{instances}")).collect();
    Outcome::check(pass, format!("formula = subsets = permutations (<=7 features) = engine: {}", summary.join(", ")))
}

/// The closed form against subsets, permutations when small, and the engine.
fn agree_four<M: Classifier>(
    m: &M,
    p: &ProductDistribution,
    e: &Entity,
    pick: impl Fn(&[Rational]) -> Rational,
    form: &Rational,
) -> bool {
    let subsets = pick(&shap_bruteforce_all(m, p, e).unwrap());
    let perms = permutation_scores(m, p, e).map(|s| pick(&s));
    let engine = pick(&engine_scores(m, p, e));
    &subsets == form && &engine == form && perms.is_none_or(|q| &q == form)
}

fn criterion_7() -> Outcome {
    let mut g = rng(77);
    let (mut fbdds, mut trees, mut ok, mut worst_ratio) = (0, 0, 0, 0f64);
    let mut check = |c: &Circuit, source: &dyn Classifier, source_size: usize, g: &mut ddshap::testgen::TestRng| {
        let n = c.space().len();
        let truth = all_entities(c.space()).all(|e| c.evaluate(&e) == source.classify(&e));
        let decomposable = c.check_decomposability().is_ok();
        let deterministic = c.check_determinism_bruteforce(VERIFY_BOUND) == DeterminismReport::Ok;
        let linear = c.size() <= 6 * source_size + n;
        worst_ratio = worst_ratio.max(c.size() as f64 / source_size as f64);
        let p = random_distribution(g, c.space());
        let e = random_entity(g, c.space());
        let scores = shap_all(c, &p, &e).unwrap().scores == shap_bruteforce_all(&source, &p, &e).unwrap();
        ok += (truth && decomposable && deterministic && linear && scores) as usize;
    };
    for i in 0..150 {
        let n = g.gen_range(1..=8);
        let d = random_fbdd(&mut g, &binary_space(n), i % 2 == 0);
        let c = encode_fbdd(&d).unwrap();
        check(&c, &d, d.size(), &mut g);
        fbdds += 1;
    }
    for i in 0..150 {
        let n = g.gen_range(1..=8);
        let space = random_space(&mut g, n, if i % 2 == 0 { 2 } else { 3 });
        let t = random_tree(&mut g, &space, 5);
        let c = encode_tree(&t).unwrap();
        check(&c, &t, t.size(), &mut g);
        trees += 1;
    }
    Outcome::check(
        ok == fbdds + trees,
        format!(
            "{ok}/{} encodings ({fbdds} FBDDs/OBDDs, {trees} trees) truth-table equal, decomposable, deterministic, \
             <= 6|source|+|X| edges (worst |C|/|source| = {worst_ratio:.2}), SHAP equal to the source oracle",
            fbdds + trees
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut g = rng(88);
    let (mut multi_ok, mut multi) = (0, 0);
    for _ in 0..200 {
        let n = g.gen_range(1..=6);
        let space = random_space(&mut g, n, 4);
        let t = random_tree(&mut g, &space, 6);
        let c = encode_decision_tree(&t).unwrap();
        let p = random_distribution(&mut g, &space);
        let e = random_entity(&mut g, &space);
        let engine: Vec<Rational> = space.features().map(|x| shap_score_nonbinary(&c, &p, &e, x).unwrap()).collect();
        multi_ok += (engine == shap_bruteforce_all(&t, &p, &e).unwrap()) as usize;
        multi += 1;
    }
    let (mut bin_ok, mut bin) = (0, 0);
    for i in 0..200 {
        let n = g.gen_range(1..=8);
        let space = binary_space(n);
        let c = if i % 2 == 0 {
            encode_tree(&random_tree(&mut g, &space, 6)).unwrap()
        } else {
            random_dd_circuit(&mut g, &space, DdConfig::default())
        };
        let p = random_distribution(&mut g, &space);
        let e = random_entity(&mut g, &space);
        bin_ok += space
            .features()
            .all(|x| shap_score_nonbinary(&c, &p, &e, x).unwrap() == shap_score(&c, &p, &e, x).unwrap())
            as usize;
        bin += 1;
    }
    Outcome::check(
        multi_ok == multi && bin_ok == bin,
        format!(
            "non-binary engine = brute force on {multi_ok}/{multi} trees (domains <= 4, <= 6 features); \
             = binary engine on {bin_ok}/{bin} binary inputs"
        ),
    )
}

fn criterion_9() -> Outcome {
    let c = block_circuit(&mut rng(1), 10, 10);
    let p = random_distribution(&mut rng(2), c.space());
    let e = random_entity(&mut rng(3), c.space());
    let start = Instant::now();
    let report = shap_all(&c, &p, &e).unwrap();
    let elapsed = start.elapsed();
    let big_ok = c.size() >= 50_000
        && c.space().len() == 100
        && elapsed < Duration::from_secs(60)
        && report.efficiency_residual.is_zero();

    let ratios: Vec<(usize, f64)> = [4usize, 8, 16, 32]
        .iter()
        .map(|&m| {
            let (c, x) = chain_circuit(m);
            let p = ProductDistribution::uniform(c.space());
            let e = Entity::new(c.space(), vec![1; c.space().len()]).unwrap();
            let (_, stats) = shap_score_with_stats(&c, &p, &e, x).unwrap();
            let n = c.space().len() as f64;
            (m, stats.multiplications as f64 / (c.size() as f64 * n * n))
        })
        .collect();
    let max = ratios.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min = ratios.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    let listed: Vec<String> = ratios.iter().map(|(m, r)| format!("|X|={}: {r:.4}", 3 * m)).collect();
    Outcome::check(
        big_ok && max / min <= 3.0,
        format!(
            "{} edges, {} features, shap_all in {}; chain mults/(|C|·|X|²): {} (spread {:.2}x)",
            c.size(),
            c.space().len(),
            secs(elapsed),
            listed.join(", "),
            max / min
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = corpus();
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(&cases),
        criterion_4(&cases),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let mut failed = false;
    for (i, o) in outcomes.iter().enumerate() {
        let status = match (o.pass, o.tolerated) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, documented)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {status}: {}", i + 1, o.evidence);
        failed |= !o.pass && !o.tolerated;
    }
    println!("acceptance run took {}", secs(start.elapsed()));
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
