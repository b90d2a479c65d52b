//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use maltsev_kernel::algebra::{
    check_malt1, co_clone_is_br, enumerate_universal_maltsev, gadget_relation, partial_preserves,
    qfpp_definable, restrict_term, PartialOperation, TotalOperation,
};
use maltsev_kernel::embeddings::{
    catalog, classify, malt2_relation, malt2_term, one_in_k_embedding, one_in_k_relation,
    polynomial_embedding, ClassifierVerdict, ClassifyOptions, Embedding, Monomial, OpSpec,
    PolyRelation,
};
use maltsev_kernel::harness::{
    equivalent, generate, mod6_relation, rng_for_seed, Family, GeneratorSpec,
};
use maltsev_kernel::kernelize::{
    extend_tuple, kernelize, kernelize_degree, monomial_subsets, EngineChoice, EngineConfig,
    ExtendOptions,
};
use maltsev_kernel::maltsev::{
    closure, extract_compact_representation, reconstruct, EngineKind, ExplicitEngine,
};
use maltsev_kernel::model::{
    for_each_tuple, Constraint, DomainSpec, Instance, Language, RTuple, Relation, Value,
};
use maltsev_kernel::Limits;
use rand_core::Rng;
use rand_xoshiro::SplitMix64;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn below(rng: &mut SplitMix64, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn distinct_scope(rng: &mut SplitMix64, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

fn boolean_language(rels: Vec<Relation>) -> Language {
    Language::with_relations(DomainSpec::BOOLEAN, rels.into_iter().map(Into::into)).unwrap()
}

/// 1-in-3-SAT through the Z_3 embedding.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let emb = one_in_k_embedding(3, 3).map_err(|e| e.to_string())?;
    let config = EngineConfig::new(EngineChoice::Affine);
    let limits = Limits::default();
    let mut largest = 0;
    for seed in 0..20 {
        let spec = GeneratorSpec {
            family: Family::OneInK,
            k: 3,
            n: 30,
            m: 500,
            seed,
        };
        let (_, inst) = generate(&spec).map_err(|e| e.to_string())?;
        let (kernel, report) = kernelize(&inst, &emb, &config).map_err(|e| e.to_string())?;
        check(
            kernel.len() <= 31 && report.bound == 31,
            format!("seed {seed}: {} constraints", kernel.len()),
        )?;
        largest = largest.max(kernel.len());
    }
    let mut checked = 0;
    for seed in 0..20 {
        let spec = GeneratorSpec {
            family: Family::OneInK,
            k: 3,
            n: 14,
            m: 500,
            seed,
        };
        let (lang, inst) = generate(&spec).map_err(|e| e.to_string())?;
        let (kernel, _) = kernelize(&inst, &emb, &config).map_err(|e| e.to_string())?;
        check(
            kernel.len() <= 15,
            format!("n=14 seed {seed}: {} constraints", kernel.len()),
        )?;
        check(
            equivalent(&inst, &kernel, &lang, &limits).map_err(|e| e.to_string())?,
            format!("n=14 seed {seed}: not equivalent"),
        )?;
        checked += 1;
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("20 kernels at n=30 with at most {largest} <= 31 constraints, {checked} equivalent at n=14, {elapsed:.2?}"))
}

/// malt₁ on R³ mod 6 and on R_{1/3}.
fn criterion_2() -> Outcome {
    let limits = Limits::default();
    let v = check_malt1(&boolean_language(vec![mod6_relation(3)]), &limits)
        .map_err(|e| e.to_string())?;
    let w = v.witness.ok_or("R3mod6 reported as preserved")?;
    let expected = vec![
        RTuple::from([0, 0, 1]),
        RTuple::from([0, 1, 1]),
        RTuple::from([0, 1, 0]),
    ];
    check(
        !v.preserved && w.tuples == expected && w.output == RTuple::from([0, 0, 0]),
        format!("witness {w:?}"),
    )?;
    let r13 = check_malt1(&boolean_language(vec![one_in_k_relation(3)]), &limits)
        .map_err(|e| e.to_string())?;
    check(r13.preserved, "R1in3 not preserved")?;
    Ok("R3mod6: (0,0,1),(0,1,1),(0,1,0) -> (0,0,0); R1in3 preserved".into())
}

/// extract / reconstruct on random Z_3-affine relations.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let limits = Limits::default();
    let m = TotalOperation::affine_maltsev(3);
    let d3 = DomainSpec::new(3).unwrap();
    let mut rng = rng_for_seed(3);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let arity = 1 + below(&mut rng, 4);
        let gens: Vec<RTuple> = (0..1 + below(&mut rng, 4))
            .map(|_| RTuple((0..arity).map(|_| below(&mut rng, 3) as Value).collect()))
            .collect();
        let r = closure("R", arity, &gens, &m, &limits).map_err(|e| e.to_string())?;
        check(r.domain() == d3, "closure left Z_3")?;
        let rep = extract_compact_representation(&r, &m, &limits).map_err(|e| e.to_string())?;
        let back = reconstruct(&rep, &limits).map_err(|e| e.to_string())?;
        check(
            back.same_tuples(&r),
            format!("relation {i}: reconstruction differs"),
        )?;
        check(
            rep.len() <= 2 * rep.signature.len(),
            format!("relation {i}: |S|={} > 2|sig|", rep.len()),
        )?;
        if !rep.signature.is_empty() {
            worst = worst.max(rep.len() as f64 / rep.signature.len() as f64);
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "200 relations reconstructed, max |S|/|sig| = {worst:.2}, {elapsed:.2?}"
    ))
}

/// A random language over Z_3 of affine subspaces with its identity embedding.
fn random_z3_language(rng: &mut SplitMix64, limits: &Limits) -> Result<Language, String> {
    let m = TotalOperation::affine_maltsev(3);
    let d3 = DomainSpec::new(3).unwrap();
    let mut lang = Language::new(d3);
    for r in 0..3 {
        let arity = 2 + below(rng, 2);
        let gens: Vec<RTuple> = (0..1 + below(rng, 3))
            .map(|_| RTuple((0..arity).map(|_| below(rng, 3) as Value).collect()))
            .collect();
        let rel = closure(&format!("A{r}"), arity, &gens, &m, limits).map_err(|e| e.to_string())?;
        lang.add(rel).map_err(|e| e.to_string())?;
    }
    Ok(lang)
}

/// Generic-engine chain length and signature monotonicity over |D| = 3.
fn criterion_4() -> Outcome {
    let limits = Limits::default();
    let mut rng = rng_for_seed(4);
    let op = TotalOperation::affine_maltsev(3);
    let mut most = 0;
    for run in 0..100 {
        let n = 2 + below(&mut rng, 9);
        let lang = random_z3_language(&mut rng, &limits)?;
        let names: Vec<String> = lang.names().map(str::to_string).collect();
        let mut constraints = Vec::new();
        for _ in 0..3 * n {
            let name = &names[below(&mut rng, names.len())];
            let arity = lang.relation(name).unwrap().arity();
            let scope = (0..arity).map(|_| below(&mut rng, n)).collect();
            constraints.push(Constraint::new(name.clone(), scope));
        }
        let inst = Instance::new(n, constraints, &lang).map_err(|e| e.to_string())?;
        let emb = Embedding::identity(lang.clone(), OpSpec::Table(op.clone()));
        let (kernel, report) = kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Generic))
            .map_err(|e| e.to_string())?;
        let bound = 2 * n * 3;
        check(
            kernel.len() <= bound && report.bound == bound as u64,
            format!("run {run}: {} > {bound}", kernel.len()),
        )?;

        let mut engine = ExplicitEngine::new(n, EngineKind::Maltsev(op.clone()), false, limits)
            .map_err(|e| e.to_string())?;
        let mut closures: BTreeSet<Vec<RTuple>> = BTreeSet::from([engine.space().to_vec()]);
        let mut sig = engine.signature();
        for c in inst.constraints() {
            engine
                .advance(lang.relation(&c.relation).unwrap(), &c.scope)
                .map_err(|e| e.to_string())?;
            let next = engine.signature();
            check(sig.is_superset(&next), format!("run {run}: signature grew"))?;
            sig = next;
            closures.insert(engine.space().to_vec());
        }
        check(
            closures.len() <= bound,
            format!("run {run}: {} distinct closures > {bound}", closures.len()),
        )?;
        most = most.max(closures.len());
    }
    Ok(format!(
        "100 pipelines, at most {most} distinct closures, signatures never grew"
    ))
}

fn random_poly(rng: &mut SplitMix64, name: String, arity: usize) -> PolyRelation {
    loop {
        let mut terms = Vec::new();
        for s in monomial_subsets(arity, 2, false) {
            if rng.next_u64() >> 63 == 1 {
                terms.push(Monomial::new(1, s));
            }
        }
        let poly = PolyRelation {
            name: name.clone(),
            arity,
            terms,
            rhs: (rng.next_u64() >> 63) as u32,
        };
        if poly.degree() == 2 && !poly.relation(2).expect("prime modulus").is_empty() {
            return poly;
        }
    }
}

fn random_instance(rng: &mut SplitMix64, lang: &Language, n: usize, m: usize) -> Instance {
    let names: Vec<String> = lang.names().map(str::to_string).collect();
    let constraints = (0..m)
        .map(|_| {
            let name = &names[below(rng, names.len())];
            let arity = lang.relation(name).unwrap().arity();
            Constraint::new(name.clone(), distinct_scope(rng, n, arity))
        })
        .collect();
    Instance::new(n, constraints, lang).unwrap()
}

/// Degree-2 extension of quadratic polynomial relations over Z_2.
fn criterion_5() -> Outcome {
    let limits = Limits::default();
    let mut rng = rng_for_seed(5);
    let polys: Vec<PolyRelation> = (0..3)
        .map(|i| random_poly(&mut rng, format!("Q{i}"), 3 + i % 2))
        .collect();
    let lang = boolean_language(polys.iter().map(|p| p.relation(2).unwrap()).collect());
    let config = EngineConfig::new(EngineChoice::Affine);
    let options = ExtendOptions::default();

    let mut largest = 0;
    for _ in 0..5 {
        let inst = random_instance(&mut rng, &lang, 16, 600);
        let (kernel, report) =
            kernelize_degree(&inst, &lang, 2, 2, &options, &config).map_err(|e| e.to_string())?;
        check(
            report.bound == 138 && kernel.len() <= 138,
            format!("{} constraints, bound {}", kernel.len(), report.bound),
        )?;
        largest = largest.max(kernel.len());
    }
    for n in [6, 8, 10] {
        let inst = random_instance(&mut rng, &lang, n, 6 * n);
        let (kernel, _) =
            kernelize_degree(&inst, &lang, 2, 2, &options, &config).map_err(|e| e.to_string())?;
        check(
            equivalent(&inst, &kernel, &lang, &limits).map_err(|e| e.to_string())?,
            format!("n={n}: not equivalent"),
        )?;
    }

    let (_, emb) = polynomial_embedding(&polys, 2, 2, &limits).map_err(|e| e.to_string())?;
    let mut tuples = 0;
    for poly in &polys {
        let r = poly.relation(2).unwrap();
        let lifted = emb
            .image(&format!("{}^2", poly.name))
            .map_err(|e| e.to_string())?;
        let local = monomial_subsets(poly.arity, 2, true);
        let mut ok = true;
        for_each_tuple(DomainSpec::BOOLEAN, poly.arity, |t| {
            ok &= r.contains(t) == lifted.contains(&extend_tuple(t, &local));
            tuples += 1;
        });
        check(
            ok,
            format!("{}: t in R and extended t in the image disagree", poly.name),
        )?;
    }
    Ok(format!("n=16 kernels of at most {largest} <= 138 constraints, rel-equal at n<=10, {tuples} tuples lifted exactly"))
}

/// Universal operations of depth 2 against the catalog, and the malt₂ relation.
fn criterion_6() -> Outcome {
    let limits = Limits::default();
    let ops = enumerate_universal_maltsev(2, &limits).map_err(|e| e.to_string())?;
    let members = catalog(&limits).map_err(|e| e.to_string())?;
    let mut checks = 0;
    for (label, emb) in &members {
        for rel in emb
            .base
            .materialize(limits.tuples)
            .map_err(|e| e.to_string())?
        {
            for u in &ops {
                let v = partial_preserves(&u.op, &rel, &limits).map_err(|e| e.to_string())?;
                check(
                    v.preserved,
                    format!("{label}: {} violated by {}", rel.name(), u.term),
                )?;
                checks += 1;
            }
        }
    }
    let m2 = malt2_relation();
    let by_malt1 =
        partial_preserves(&PartialOperation::malt1(), &m2, &limits).map_err(|e| e.to_string())?;
    let by_malt2 = partial_preserves(&restrict_term(&malt2_term()), &m2, &limits)
        .map_err(|e| e.to_string())?;
    check(by_malt1.preserved, "malt1 violates the malt2 relation")?;
    check(
        !by_malt2.preserved,
        "malt2 preserves its own domain relation",
    )?;
    Ok(format!(
        "{} operations x {} catalog embeddings ({checks} checks) preserved; malt2 relation: malt1 yes, malt2 no",
        ops.len(),
        members.len()
    ))
}

/// Soundness and idempotence over every family.
fn criterion_7() -> Outcome {
    let limits = Limits::default();
    let mut rng = rng_for_seed(7);
    let mut per_family = [0usize; 4];
    for i in 0..200 {
        let family = Family::ALL[i % 4];
        let k = 2 + below(&mut rng, 3);
        let n = k + below(&mut rng, 13 - k);
        let m = 1 + below(&mut rng, 4 * n);
        let spec = GeneratorSpec {
            family,
            k,
            n,
            m,
            seed: rng.next_u64(),
        };
        let (lang, inst) = generate(&spec).map_err(|e| e.to_string())?;
        let run = |inst: &Instance| -> Result<Instance, String> {
            if family == Family::OneInK {
                let p = [2, 3, 5].into_iter().find(|&p| p as usize >= k).unwrap();
                let emb = one_in_k_embedding(k, p).map_err(|e| e.to_string())?;
                kernelize(inst, &emb, &EngineConfig::new(EngineChoice::Affine))
                    .map(|r| r.0)
                    .map_err(|e| e.to_string())
            } else {
                let config = EngineConfig::new(EngineChoice::Affine);
                kernelize_degree(inst, &lang, k, 2, &ExtendOptions::default(), &config)
                    .map(|r| r.0)
                    .map_err(|e| e.to_string())
            }
        };
        let kernel = run(&inst)?;
        check(
            equivalent(&inst, &kernel, &lang, &limits).map_err(|e| e.to_string())?,
            format!("{spec:?}: not equivalent"),
        )?;
        let again = run(&kernel)?;
        check(
            again == kernel,
            format!(
                "{spec:?}: second pass dropped {} constraints",
                kernel.len() - again.len()
            ),
        )?;
        per_family[i % 4] += 1;
    }
    Ok(format!(
        "200 instances ({} per family), all sound and idempotent",
        per_family[0]
    ))
}

/// The gadget is qfpp-definable over BR languages that fail malt₁.
fn criterion_8() -> Outcome {
    let limits = Limits::default();
    let gadget = gadget_relation();
    let mut found = 0;
    let mut tried = 0;
    for seed in 0..500u64 {
        if found >= 5 {
            break;
        }
        let spec = GeneratorSpec {
            family: Family::RandomLanguage,
            k: 3,
            n: 3,
            m: 0,
            seed,
        };
        let (lang, _) = generate(&spec).map_err(|e| e.to_string())?;
        tried += 1;
        if !co_clone_is_br(&lang, &limits).map_err(|e| e.to_string())? {
            continue;
        }
        if check_malt1(&lang, &limits)
            .map_err(|e| e.to_string())?
            .preserved
        {
            continue;
        }
        let formula = qfpp_definable(&gadget, &lang, &limits)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("seed {seed}: gadget not qfpp-definable"))?;
        let defined = formula
            .evaluate(&lang, &limits)
            .map_err(|e| e.to_string())?;
        check(
            defined.same_tuples(&gadget),
            format!("seed {seed}: formula defines another relation"),
        )?;
        found += 1;
    }
    check(
        found >= 5,
        format!("only {found} qualifying languages among {tried}"),
    )?;
    Ok(format!(
        "{found} generated BR languages without malt1 define the gadget exactly ({tried} sampled)"
    ))
}

/// Classifier verdicts and determinism.
fn criterion_9() -> Outcome {
    let options = ClassifyOptions::default();
    let r13 = boolean_language(vec![one_in_k_relation(3)]);
    let mod6 = boolean_language(vec![mod6_relation(3)]);
    let first = (
        classify(&r13, &options).map_err(|e| e.to_string())?,
        classify(&mod6, &options).map_err(|e| e.to_string())?,
    );
    check(
        matches!(first.0, ClassifierVerdict::LinearKernel { .. }),
        format!("R1in3: {}", first.0.label()),
    )?;
    check(
        matches!(first.1, ClassifierVerdict::LowerBoundWitness { .. }),
        format!("R3mod6: {}", first.1.label()),
    )?;
    let json = (
        serde_json::to_string(&first.0).unwrap(),
        serde_json::to_string(&first.1).unwrap(),
    );
    for run in 0..10 {
        let again = (
            classify(&r13, &options).map_err(|e| e.to_string())?,
            classify(&mod6, &options).map_err(|e| e.to_string())?,
        );
        let again_json = (
            serde_json::to_string(&again.0).unwrap(),
            serde_json::to_string(&again.1).unwrap(),
        );
        check(
            again == first && again_json == json,
            format!("run {run} differs"),
        )?;
    }
    Ok("R1in3 -> LINEAR_KERNEL, R3mod6 -> LOWER_BOUND_WITNESS, identical over 10 runs".into())
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("linear kernel for 1-in-3-SAT", criterion_1),
        ("malt1 lower-bound witness", criterion_2),
        ("representation reconstruction", criterion_3),
        ("chain bounds", criterion_4),
        ("degree-2 extension", criterion_5),
        ("universal operations", criterion_6),
        ("pipeline soundness and idempotence", criterion_7),
        ("qfpp gadget", criterion_8),
        ("classifier verdicts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
