//! Python bindings: languages, instances and embeddings as opaque classes,
//! reports and verdicts as JSON strings.

use maltsev_kernel::algebra::check_malt1;
use maltsev_kernel::embeddings::{
    self as emb, one_in_k_embedding, parse_embedding_file, validate_embedding, ClassifyOptions,
};
use maltsev_kernel::harness::{self as oracle, Family, GeneratorSpec};
use maltsev_kernel::kernelize::{self as kz, EngineChoice, EngineConfig, ExtendOptions};
use maltsev_kernel::model::{
    parse_instance, parse_language, serialize_instance, serialize_language,
};
use maltsev_kernel::Limits;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, module = "pymkernel")]
#[derive(Clone)]
pub struct Language(pub maltsev_kernel::model::Language);

#[pymethods]
impl Language {
    /// Parses the `.lang` text format.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_language(text).map(Language).map_err(err)
    }

    #[getter]
    fn domain(&self) -> u32 {
        self.0.domain().size()
    }

    fn names(&self) -> Vec<String> {
        self.0.names().map(str::to_string).collect()
    }

    fn to_text(&self) -> String {
        serialize_language(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Language(domain={}, relations={:?})",
            self.domain(),
            self.names()
        )
    }
}

#[pyclass(frozen, module = "pymkernel")]
#[derive(Clone)]
pub struct Instance(pub maltsev_kernel::model::Instance);

#[pymethods]
impl Instance {
    /// Parses the `.csp` text format against `language`.
    #[new]
    fn new(text: &str, language: &Language) -> PyResult<Self> {
        parse_instance(text, &language.0).map(Instance).map_err(err)
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.0.num_vars()
    }

    /// `(relation, scope)` pairs in order.
    fn constraints(&self) -> Vec<(String, Vec<usize>)> {
        self.0
            .constraints()
            .iter()
            .map(|c| (c.relation.clone(), c.scope.clone()))
            .collect()
    }

    fn to_text(&self) -> String {
        serialize_instance(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(vars={}, constraints={})",
            self.0.num_vars(),
            self.0.len()
        )
    }
}

#[pyclass(frozen, module = "pymkernel")]
#[derive(Clone)]
pub struct Embedding(pub emb::Embedding);

#[pymethods]
impl Embedding {
    /// An `.emb` text over `base`; without `target` the images are looked up
    /// in `base`, and an empty map is the identity.
    #[new]
    #[pyo3(signature = (text, base, target=None))]
    fn new(text: &str, base: &Language, target: Option<&Language>) -> PyResult<Self> {
        let mut file = parse_embedding_file(text).map_err(err)?;
        if file.map.is_empty() {
            file.map = base
                .0
                .names()
                .map(|n| (n.to_string(), n.to_string()))
                .collect();
        }
        let target = target.map_or_else(|| base.0.clone(), |t| t.0.clone());
        Ok(Embedding(file.into_embedding(base.0.clone(), target)))
    }

    /// `R_{1/k}` into `{x ∈ Z_p^k : Σx ≡ 1}`.
    #[staticmethod]
    fn one_in_k(k: usize, p: u32) -> PyResult<Self> {
        one_in_k_embedding(k, p).map(Embedding).map_err(err)
    }

    #[getter]
    fn base(&self) -> Language {
        Language(self.0.base.clone())
    }

    #[getter]
    fn target(&self) -> Language {
        Language(self.0.target.clone())
    }

    /// `(valid, diagnostics)`.
    fn validate(&self) -> PyResult<(bool, Vec<String>)> {
        let report = validate_embedding(&self.0, &Limits::default()).map_err(err)?;
        Ok((
            report.valid,
            report.diagnostics.iter().map(ToString::to_string).collect(),
        ))
    }
}

/// Returns the kernel and the JSON report.
#[pyfunction]
#[pyo3(signature = (instance, embedding, engine="affine"))]
fn kernelize(
    instance: &Instance,
    embedding: &Embedding,
    engine: &str,
) -> PyResult<(Instance, String)> {
    let engine: EngineChoice = engine.parse().map_err(err)?;
    let (kernel, report) =
        kz::kernelize(&instance.0, &embedding.0, &EngineConfig::new(engine)).map_err(err)?;
    Ok((Instance(kernel), report.to_json()))
}

#[pyfunction]
#[pyo3(signature = (instance, language, degree, modulus=2))]
fn kernelize_degree(
    instance: &Instance,
    language: &Language,
    degree: usize,
    modulus: u32,
) -> PyResult<(Instance, String)> {
    let config = EngineConfig::new(EngineChoice::Affine);
    let (kernel, report) = kz::kernelize_degree(
        &instance.0,
        &language.0,
        degree,
        modulus,
        &ExtendOptions::default(),
        &config,
    )
    .map_err(err)?;
    Ok((Instance(kernel), report.to_json()))
}

/// The verdict as JSON, tagged by `"verdict"`.
#[pyfunction]
#[pyo3(signature = (language, depth=2, max_prime=7, max_degree=2))]
fn classify(
    language: &Language,
    depth: usize,
    max_prime: u32,
    max_degree: usize,
) -> PyResult<String> {
    let options = ClassifyOptions {
        depth,
        max_prime,
        max_degree,
        limits: Limits::default(),
    };
    let verdict = emb::classify(&language.0, &options).map_err(err)?;
    serde_json::to_string(&verdict).map_err(err)
}

type Malt1Witness = (String, Vec<Vec<u32>>, Vec<u32>);

/// `None` when malt₁ preserves the language, otherwise
/// `(relation, [t1, t2, t3], output)`.
#[pyfunction]
fn malt1_witness(language: &Language) -> PyResult<Option<Malt1Witness>> {
    let verdict = check_malt1(&language.0, &Limits::default()).map_err(err)?;
    Ok(match (verdict.relation, verdict.witness) {
        (Some(r), Some(w)) => Some((r, w.tuples.into_iter().map(|t| t.0).collect(), w.output.0)),
        _ => None,
    })
}

#[pyfunction]
fn solutions(instance: &Instance, language: &Language) -> PyResult<Vec<Vec<u32>>> {
    let set =
        oracle::brute_force_solutions(&instance.0, &language.0, &Limits::default()).map_err(err)?;
    Ok(set.assignments.into_iter().map(|t| t.0).collect())
}

#[pyfunction]
fn equivalent(a: &Instance, b: &Instance, language: &Language) -> PyResult<bool> {
    oracle::equivalent(&a.0, &b.0, &language.0, &Limits::default()).map_err(err)
}

#[pyfunction]
fn generate(
    family: &str,
    k: usize,
    n: usize,
    m: usize,
    seed: u64,
) -> PyResult<(Language, Instance)> {
    let family: Family = family.parse().map_err(err)?;
    let (lang, inst) = oracle::generate(&GeneratorSpec {
        family,
        k,
        n,
        m,
        seed,
    })
    .map_err(err)?;
    Ok((Language(lang), Instance(inst)))
}

#[pymodule]
fn pymkernel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Language>()?;
    m.add_class::<Instance>()?;
    m.add_class::<Embedding>()?;
    m.add_function(wrap_pyfunction!(kernelize, m)?)?;
    m.add_function(wrap_pyfunction!(kernelize_degree, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(malt1_witness, m)?)?;
    m.add_function(wrap_pyfunction!(solutions, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
