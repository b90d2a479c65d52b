use std::path::Path;

use maltsev_kernel::algebra::TotalOperation;
use maltsev_kernel::embeddings::{
    classify, ClassifierVerdict, ClassifyOptions, EmbeddingError, OpSpec,
};
use maltsev_kernel::harness::{
    equivalent, generate, random_permutation, Family, GeneratorSpec, HarnessError,
};
use maltsev_kernel::kernelize::{
    chain_audit, degree_extend, kernelize, EngineChoice, EngineConfig, ExtendOptions, KernelError,
    KernelReport,
};
use maltsev_kernel::maltsev::{closure, extract_compact_representation, reconstruct, MaltsevError};
use maltsev_kernel::model::{serialize_instance, serialize_language, Language, ModelError};
use maltsev_kernel::Limits;
use serde_json::json;
use thiserror::Error;

use crate::files::{self, FileError};
use crate::Command;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Maltsev(#[from] MaltsevError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub enum Outcome {
    Success,
    Failure(String),
}

pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Kernelize {
            language,
            instance,
            embedding,
            engine,
            permute,
            out,
            report,
        } => {
            let lang = files::language(&language)?;
            let inst = files::instance(&instance, &lang)?;
            let emb = files::embedding(&embedding, &lang)?;
            let engine = match engine {
                Some(name) => name.parse::<EngineChoice>()?,
                None if matches!(emb.op, OpSpec::Affine { .. }) => EngineChoice::Affine,
                None => EngineChoice::Generic,
            };
            let config = EngineConfig::new(engine);
            let (kernel, rep) = match permute {
                None => kernelize(&inst, &emb, &config)?,
                Some(seed) => {
                    let order = random_permutation(inst.len(), seed);
                    let (kernel, rep) = kernelize(&inst.permuted(&order), &emb, &config)?;
                    (kernel, restore_indices(rep, &order))
                }
            };
            files::write(&out, &serialize_instance(&kernel))?;
            files::write(&report, &rep.to_json())?;
            let audit = chain_audit(&rep, rep.domain, rep.n, engine);
            println!(
                "kept {} of {} constraints (bound {})",
                rep.kept.len(),
                inst.len(),
                audit.bound
            );
            if audit.pass {
                Ok(Outcome::Success)
            } else {
                Ok(Outcome::Failure(format!(
                    "kernel has {} constraints, above the bound {}",
                    audit.kept, audit.bound
                )))
            }
        }
        Command::Classify {
            language,
            depth,
            max_prime,
            max_degree,
            report,
        } => {
            let lang = files::language(&language)?;
            let options = ClassifyOptions {
                depth,
                max_prime,
                max_degree,
                limits: Limits::default(),
            };
            let verdict = classify(&lang, &options)?;
            let text = serde_json::to_string_pretty(&verdict).expect("verdict serializes");
            files::write(&report, &text)?;
            println!("{}", verdict.label());
            match verdict {
                ClassifierVerdict::LinearKernel { .. } | ClassifierVerdict::PolyKernel { .. } => {
                    Ok(Outcome::Success)
                }
                other => Ok(Outcome::Failure(format!(
                    "no kernel bound established: {}",
                    other.label()
                ))),
            }
        }
        Command::Verify { language, a, b } => {
            let lang = files::language(&language)?;
            let ia = files::instance(&a, &lang)?;
            let ib = files::instance(&b, &lang)?;
            if equivalent(&ia, &ib, &lang, &Limits::default())? {
                println!("equivalent");
                Ok(Outcome::Success)
            } else {
                Ok(Outcome::Failure("not equivalent".into()))
            }
        }
        Command::Generate {
            family,
            k,
            vars,
            constraints,
            seed,
            out_language,
            out_instance,
        } => {
            let family: Family = family.parse()?;
            let (lang, inst) = generate(&GeneratorSpec {
                family,
                k,
                n: vars,
                m: constraints,
                seed,
            })?;
            files::write(&out_language, &serialize_language(&lang))?;
            files::write(&out_instance, &serialize_instance(&inst))?;
            Ok(Outcome::Success)
        }
        Command::Closure {
            language,
            relation,
            op,
            out,
        } => {
            let lang = files::language(&language)?;
            let op = parse_op(&op)?;
            run_closure(&lang, &relation, &op, &out)
        }
        Command::Extend {
            language,
            instance,
            degree,
            no_empty_monomial,
            out_language,
            out_instance,
        } => {
            let lang = files::language(&language)?;
            let inst = files::instance(&instance, &lang)?;
            let options = ExtendOptions {
                include_empty: !no_empty_monomial,
                ..ExtendOptions::default()
            };
            let (ext, ext_lang, map) =
                degree_extend(&inst, &lang, degree, &options, &Limits::default())?;
            files::write(&out_language, &serialize_language(&ext_lang))?;
            files::write(&out_instance, &serialize_instance(&ext))?;
            println!(
                "{} monomial variables, {} constraints",
                map.len(),
                ext.len()
            );
            Ok(Outcome::Success)
        }
    }
}

/// Maps indices of a run on the permuted instance back to input positions.
fn restore_indices(mut rep: KernelReport, order: &[usize]) -> KernelReport {
    for i in rep.kept.iter_mut().chain(rep.dropped.iter_mut()) {
        *i = order[*i];
    }
    for e in &mut rep.chain_events {
        e.constraint = order[e.constraint];
    }
    rep
}

fn parse_op(spec: &str) -> Result<TotalOperation, CliError> {
    if let Some(p) = spec.strip_prefix("affine:p=") {
        let p: u32 = p
            .parse()
            .map_err(|_| CliError::Usage(format!("bad modulus in `{spec}`")))?;
        if !maltsev_kernel::modp::is_prime(p) {
            return Err(MaltsevError::NotPrime(p).into());
        }
        return Ok(TotalOperation::affine_maltsev(p));
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let file = files::embedding_file(Path::new(path))?;
        return file
            .op
            .operation()
            .ok_or_else(|| CliError::Usage(format!("{path}: the operation block has no table")));
    }
    Err(CliError::Usage(format!(
        "--op must be `affine:p=<p>` or `table:<file>`, got `{spec}`"
    )))
}

fn run_closure(
    lang: &Language,
    name: &str,
    op: &TotalOperation,
    out: &Path,
) -> Result<Outcome, CliError> {
    let limits = Limits::default();
    let rel = lang.relation(name)?.materialize(limits.tuples)?;
    if op.domain().size() < lang.domain().size() {
        return Err(CliError::Usage(format!(
            "operation domain {} is smaller than the language domain {}",
            op.domain().size(),
            lang.domain().size()
        )));
    }
    let closed = closure(name, rel.arity(), rel.tuples(), op, &limits)?;
    let mut out_lang = Language::new(op.domain());
    out_lang.add(closed.clone())?;
    files::write(out, &serialize_language(&out_lang))?;
    let mut summary = json!({
        "relation": name,
        "input_tuples": rel.len(),
        "closure_tuples": closed.len(),
    });
    let mut outcome = Outcome::Success;
    if op.is_maltsev() {
        let rep = extract_compact_representation(&closed, op, &limits)?;
        let back = reconstruct(&rep, &limits)?;
        let ok = back.same_tuples(&closed);
        summary["signature"] = json!(rep.signature.len());
        summary["compact"] = json!(rep.len());
        summary["reconstructed"] = json!(ok);
        if !ok {
            outcome = Outcome::Failure("reconstruction differs from the closure".into());
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(outcome)
}
