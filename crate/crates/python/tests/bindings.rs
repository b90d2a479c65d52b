use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) {
    Python::with_gil(|py| {
        let module = PyModule::new(py, "pymkernel").unwrap();
        pymkernel_init(&module);
        let globals = PyDict::new(py);
        globals.set_item("mk", module).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

fn pymkernel_init(m: &Bound<'_, PyModule>) {
    m.add_class::<pymkernel::Language>().unwrap();
    m.add_class::<pymkernel::Instance>().unwrap();
    m.add_class::<pymkernel::Embedding>().unwrap();
}

#[test]
fn classes_parse_and_serialize() {
    run(r#"
lang = mk.Language("domain 2\nrelation R13 arity 3\n0 0 1\n0 1 0\n1 0 0\nend\n")
assert lang.domain == 2 and lang.names() == ["R13"] and len(lang) == 1
inst = mk.Instance("vars 4\nconstraint R13 0 1 2\nconstraint R13 1 2 3\n", lang)
assert inst.num_vars == 4 and len(inst) == 2
assert inst.constraints()[1] == ("R13", [1, 2, 3])
assert mk.Instance(inst.to_text(), lang).to_text() == inst.to_text()
try:
    mk.Instance("vars 2\nconstraint R13 0 1 5\n", lang)
    raise AssertionError("accepted a bad scope")
except ValueError as e:
    assert "line 2" in str(e)
emb = mk.Embedding.one_in_k(3, 3)
assert emb.validate() == (True, [])
assert emb.target.domain == 3
"#);
}
