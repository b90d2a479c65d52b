"""End-to-end check of the pymkernel extension module.

Build and install first:  pip install -e crates/python --no-build-isolation
"""

import json

import pymkernel as mk


def main() -> None:
    lang, inst = mk.generate("one-in-k", 3, 12, 120, 7)
    assert lang.names() == ["R1in3"]
    assert len(inst) == 120

    emb = mk.Embedding.one_in_k(3, 3)
    valid, diagnostics = emb.validate()
    assert valid, diagnostics

    kernel, report = mk.kernelize(inst, emb, "affine")
    report = json.loads(report)
    assert len(kernel) == len(report["kept"]) <= 13 == report["bound"]
    assert mk.equivalent(inst, kernel, lang)
    print(f"kernel: {len(kernel)} of {len(inst)} constraints, {len(mk.solutions(kernel, lang))} solutions")

    r13 = mk.Language("domain 2\nrelation R13 arity 3\n0 0 1\n0 1 0\n1 0 0\nend\n")
    assert mk.malt1_witness(r13) is None
    assert json.loads(mk.classify(r13))["verdict"] == "LINEAR_KERNEL"

    mod6, _ = mk.generate("mod6-k", 3, 3, 1, 0)
    relation, tuples, output = mk.malt1_witness(mod6)
    assert tuples == [[0, 0, 1], [0, 1, 1], [0, 1, 0]] and output == [0, 0, 0], (relation, tuples, output)
    assert json.loads(mk.classify(mod6))["verdict"] == "LOWER_BOUND_WITNESS"

    nae, nae_inst = mk.generate("nae-k", 3, 8, 30, 2)
    nae_kernel, nae_report = mk.kernelize_degree(nae_inst, nae, 3)
    assert mk.equivalent(nae_inst, nae_kernel, nae)
    print(f"degree-3 kernel: {len(nae_kernel)} of {len(nae_inst)} constraints")

    print("smoke test passed")


if __name__ == "__main__":
    main()
