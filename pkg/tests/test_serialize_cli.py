"""JSON document round trips, canonical serialization, report shapes, and
command-line behavior including exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cssep.engine import classify, s_decompose
from cssep.gme import gme_power_iteration
from cssep.named_states import build_entangled_rank6, build_sigma, get_example
from cssep.serialize import (canonical_json, certificate_to_document,
                             document_to_state, gme_to_document, sanitize,
                             state_to_document, vandermonde_to_document)
from cssep.states import DensityMatrix
from cssep.structured import hankel_psd_decompose

from helpers import product_mixture


def test_dense_document_round_trip():
    """A dense document reproduces the matrix it was written from."""
    named = build_entangled_rank6()
    doc = state_to_document(named.state, fmt="dense")
    assert doc["format"] == "dense"
    assert doc["parties"] == 2 and doc["dim"] == 4
    back = document_to_state(doc)
    assert back.dims == named.state.dims
    assert_allclose(back.matrix, named.state.matrix, atol=1e-12)


def test_compressed_document_round_trip():
    """The compressed form stores sorted indices and expands back exactly."""
    sig = build_sigma()
    doc = state_to_document(sig.state, fmt="cs-compressed")
    assert "csEntries" in doc and "dense" not in doc
    indices = [tuple(e["index"]) for e in doc["csEntries"]]
    assert indices == sorted(indices)
    assert all(list(i) == sorted(i) for i in indices)
    back = document_to_state(doc)
    assert_allclose(back.matrix, sig.state.matrix, atol=1e-9)


def test_compressed_format_rejects_asymmetric_states():
    """Compression is only defined for completely symmetric states."""
    mat = np.diag([1.0, 2.0, 3.0, 4.0])
    rho = DensityMatrix(mat, dims=(2, 2))
    with pytest.raises(ValueError, match="symmetric"):
        state_to_document(rho, fmt="cs-compressed")
    with pytest.raises(ValueError, match="format"):
        state_to_document(rho, fmt="sparse")


def test_canonical_json_is_sorted_and_compact():
    """Canonical output sorts keys, drops spaces, and refuses bare infinities."""
    line = canonical_json({"b": 1, "a": [1, 2], "c": {"z": 0, "y": None}})
    assert line == '{"a":[1,2],"b":1,"c":{"y":null,"z":0}}'
    with pytest.raises(ValueError):
        canonical_json({"x": float("inf")})


def test_sanitize_converts_numpy_and_nonfinite_values():
    """Sanitizing maps numpy scalars to plain types and names nonfinite floats."""
    obj = {
        "a": np.float64(1.5),
        "b": np.int32(7),
        "c": np.bool_(True),
        "d": np.array([1.0, 2.0]),
        "e": (3, 4),
        "f": float("inf"),
        "g": float("-inf"),
        "h": float("nan"),
        "i": 1 + 2j,
        1: None,
    }
    out = sanitize(obj)
    assert out["a"] == 1.5 and isinstance(out["a"], float)
    assert out["b"] == 7 and isinstance(out["b"], int)
    assert out["c"] is True
    assert out["d"] == [1.0, 2.0]
    assert out["e"] == [3, 4]
    assert out["f"] == "inf" and out["g"] == "-inf" and out["h"] == "nan"
    assert out["i"] == [1.0, 2.0]
    assert out["1"] is None
    canonical_json(out)


def _dense_doc(mat, parties, dim):
    return {"parties": parties, "dim": dim, "format": "dense",
            "dense": [[[float(z), 0.0] for z in row] for row in mat]}


@pytest.mark.parametrize("doc,match", [
    ({"dim": 2, "format": "dense"}, "missing field 'parties'"),
    ({"parties": 2, "format": "dense"}, "missing field 'dim'"),
    ({"parties": 2, "dim": 2}, "missing field 'format'"),
    ({"parties": "2", "dim": 2, "format": "dense", "dense": []},
     "positive integer"),
    ({"parties": 2, "dim": 0, "format": "dense", "dense": []},
     "positive integer"),
    ({"parties": 2, "dim": 2, "format": "sparse", "dense": []}, "format"),
    ({"parties": 13, "dim": 2, "format": "dense"}, "exceeds the limit"),
    ({"parties": 1, "dim": 2, "format": "dense",
      "dense": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
      "csEntries": []}, "exactly one"),
    ({"parties": 1, "dim": 2, "format": "dense"}, "exactly one"),
    ({"parties": 1, "dim": 2, "format": "dense", "dense": [[[1.0, 0.0]]]},
     "rows"),
    ({"parties": 1, "dim": 2, "format": "dense",
      "dense": [[[1.0, 0.0], [0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
     r"\[re, im\] pair"),
    ({"parties": 2, "dim": 2, "format": "cs-compressed",
      "csEntries": [{"index": [1, 0, 0, 0], "value": 0.5}]}, "sorted"),
    ({"parties": 2, "dim": 2, "format": "cs-compressed",
      "csEntries": [{"index": [0, 0, 0, 1], "value": "x"}]}, "real number"),
    ({"parties": 2, "dim": 2, "format": "cs-compressed",
      "csEntries": [{"index": [0, 0, 1], "value": 0.5}]}, "4 integers"),
    ({"parties": 2, "dim": 2, "format": "cs-compressed",
      "csEntries": [{"value": 0.5}]}, "index and value"),
    ("not a dict", "JSON object"),
])
def test_malformed_documents_raise(doc, match):
    """Every malformed document field raises ValueError with a clear message."""
    with pytest.raises(ValueError, match=match):
        document_to_state(doc)


def test_invalid_matrices_are_rejected_on_load():
    """Documents whose matrix is not Hermitian PSD fail to load."""
    bad = _dense_doc(np.diag([1.0, -1.0]), 1, 2)
    with pytest.raises(ValueError, match="not a valid state"):
        document_to_state(bad)
    skew = {"parties": 1, "dim": 2, "format": "dense",
            "dense": [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
    with pytest.raises(ValueError, match="not a valid state"):
        document_to_state(skew)


def test_certificate_document_shape():
    """Certificate reports carry verdict, rule, terms, and JSON-safe evidence."""
    sig = build_sigma()
    cert = s_decompose(sig.state, seed=0)
    doc = certificate_to_document(cert)
    assert doc["verdict"] == "Separable"
    assert isinstance(doc["rule"], str)
    assert len(doc["decomposition"]) == 7
    for term in doc["decomposition"]:
        assert term["weight"] > 0
        assert len(term["vector"]) == 4
    canonical_json(doc)


def test_entangled_certificate_has_no_decomposition():
    """An entangled certificate serializes with a null decomposition."""
    named = build_entangled_rank6()
    cert = classify(named.state, seed=0)
    doc = certificate_to_document(cert)
    assert doc["verdict"] == "Entangled"
    assert doc["decomposition"] is None
    canonical_json(doc)


def test_gme_document_shape():
    """Overlap reports expose the overlap, entanglement, and convergence data."""
    named = get_example("gme-conditioned")
    res = gme_power_iteration(named.state.normalized(), seed=0)
    doc = gme_to_document(res)
    assert set(doc) == {"mu", "gme", "maximizer", "iterations",
                        "kkt_residual", "converged"}
    assert doc["converged"] is True
    assert len(doc["maximizer"]) == 4
    canonical_json(doc)


def test_vandermonde_document_names_the_infinity_node():
    """Node reports spell the infinity node as the string inf."""
    size = 4
    M = np.zeros((size, size))
    for w, t in zip([0.6, 0.4], [0.5, -0.7]):
        v = np.array([t ** k for k in range(size)])
        M += w * np.outer(v, v)
    M[size - 1, size - 1] += 0.9
    terms = hankel_psd_decompose(M)
    doc = vandermonde_to_document(terms)
    assert any(t["node"] == "inf" for t in doc)
    assert all(isinstance(t["weight"], float) for t in doc)
    canonical_json(doc)


def _run_cli(args, stdin_text=None):
    return subprocess.run([sys.executable, "-m", "cssep", *args],
                          input=stdin_text, capture_output=True, text=True,
                          timeout=300)


def _example_doc(name):
    res = _run_cli(["example", "--name", name])
    assert res.returncode == 0, res.stderr
    return res.stdout


def test_cli_example_emits_named_state():
    """The example command prints a dense document tagged with the name."""
    out = _example_doc("sigma")
    doc = json.loads(out)
    assert doc["name"] == "sigma"
    assert doc["format"] == "dense"
    assert doc["parties"] == 2 and doc["dim"] == 4


def test_cli_classify_exit_codes_follow_the_verdict():
    """classify exits 0 on Separable and 1 on certified Entangled."""
    sep = _run_cli(["classify", "--in", "-"], stdin_text=_example_doc("sigma"))
    assert sep.returncode == 0, sep.stderr
    assert json.loads(sep.stdout)["verdict"] == "Separable"
    ent = _run_cli(["classify", "--in", "-"],
                   stdin_text=_example_doc("entangled-rank6"))
    assert ent.returncode == 1, ent.stderr
    report = json.loads(ent.stdout)
    assert report["verdict"] == "Entangled"
    assert report["rule"] == "rank-6 empty product set"


def test_cli_decompose_returns_terms(tmp_path):
    """decompose writes a certificate whose terms rebuild the state."""
    path = tmp_path / "sigma.json"
    path.write_text(_example_doc("sigma"), encoding="utf-8")
    res = _run_cli(["decompose", "--in", str(path)])
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["verdict"] == "Separable"
    assert len(doc["decomposition"]) == 7


def test_cli_check_cs_and_ppt_and_ptrace():
    """The diagnostic commands report symmetry, PPT, and marginals."""
    doc = _example_doc("sigma")
    cs = _run_cli(["check-cs", "--in", "-"], stdin_text=doc)
    assert cs.returncode == 0 and json.loads(cs.stdout)["cs"] is True
    ppt = _run_cli(["ppt", "--in", "-"], stdin_text=doc)
    assert ppt.returncode == 0 and json.loads(ppt.stdout)["ppt"] is True
    pt = _run_cli(["ptrace", "--in", "-"], stdin_text=doc)
    assert pt.returncode == 0
    marg = json.loads(pt.stdout)
    assert marg["parties"] == 1 and marg["dim"] == 4


def test_cli_gme_reports_convergence():
    """gme runs the overlap iteration on a nonnegative document."""
    res = _run_cli(["gme", "--in", "-"],
                   stdin_text=_example_doc("gme-conditioned"))
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["converged"] is True
    assert 0.0 < doc["mu"] <= 1.0 + 1e-12


def test_cli_hankel_decomposes_a_multiqubit_document():
    """hankel maps a multiqubit state to its moment-matrix node report."""
    rng = np.random.default_rng(5)
    rho, _ = product_mixture(rng, parties=3, dim=2, terms=2)
    doc = state_to_document(rho)
    res = _run_cli(["hankel", "--in", "-"],
                   stdin_text=canonical_json(doc))
    assert res.returncode == 0, res.stderr
    report = json.loads(res.stdout)
    assert "hankel" in report["flags"]
    assert len(report["terms"]) >= 1
    assert report["parties"] == 3


def test_cli_toeplitz_scan_is_deterministic(tmp_path):
    """toeplitz-scan prints one record per sample, identically across runs."""
    args = ["toeplitz-scan", "--parties", "2", "--samples", "5", "--seed", "7"]
    first = _run_cli(args)
    second = _run_cli(args)
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    lines = first.stdout.strip().split("\n")
    assert len(lines) == 5
    for line in lines:
        rec = json.loads(line)
        assert rec["verdict"] in {"Separable", "Undetermined"}
    out = tmp_path / "scan.json"
    res = _run_cli(args + ["--out", str(out)])
    report = json.loads(out.read_text(encoding="utf-8"))
    assert res.returncode == 0
    assert report["counts"].get("Entangled", 0) == 0
    assert len(report["records"]) == 5


def test_cli_out_flag_writes_the_report_to_a_file(tmp_path):
    """--out routes the JSON line to a file instead of stdout."""
    path = tmp_path / "report.json"
    res = _run_cli(["check-cs", "--in", "-", "--out", str(path)],
                   stdin_text=_example_doc("sigma"))
    assert res.returncode == 0
    assert res.stdout == ""
    assert json.loads(path.read_text(encoding="utf-8"))["cs"] is True


@pytest.mark.parametrize("args,stdin_text", [
    (["classify", "--in", "-"], "{not json"),
    (["classify", "--in", "-"], '{"parties": 2}'),
    (["example", "--name", "nonsense"], None),
    (["no-such-command"], None),
    (["classify", "--no-such-flag"], None),
])
def test_cli_input_errors_exit_3(args, stdin_text):
    """Bad JSON, bad documents, unknown names, and usage errors exit 3."""
    res = _run_cli(args, stdin_text=stdin_text)
    assert res.returncode == 3
