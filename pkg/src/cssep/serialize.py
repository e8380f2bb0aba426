"""JSON interchange: state documents (dense and CS-compressed forms),
deterministic canonical serialization, and report dictionaries for
certificates, decompositions, and overlap results."""

from __future__ import annotations

import json
import math

import numpy as np

from .states import PSD_TOL, DensityMatrix, is_cs
from .tensors import DENSE_LIMIT, SymTensor

FORMATS = ("dense", "cs-compressed")


def canonical_json(obj):
    """Deterministic single-line JSON: sorted keys, compact separators, and
    no bare NaN/Infinity literals (nonfinite floats must be sanitized
    upstream, e.g. infinite nodes as the string \"inf\")."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def sanitize(obj):
    """Recursively convert numpy scalars/arrays and tuples into plain JSON
    values; nonfinite floats become their string names."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return x
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def state_to_document(rho, fmt="dense"):
    """DensityMatrix -> StateDocument dict.

    dense: full matrix as rows of [re, im] pairs.
    cs-compressed: one entry per sorted coefficient-tensor index; only valid
    for completely symmetric states."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    d = rho.parties
    N = rho.dim
    doc = {"parties": d, "dim": N, "format": fmt}
    if fmt == "dense":
        mat = np.asarray(rho.matrix)
        doc["dense"] = [[[float(np.real(z)), float(np.imag(z))] for z in row]
                        for row in mat]
        return doc
    cs, dev = is_cs(rho)
    if not cs:
        raise ValueError(
            f"cs-compressed format requires a completely symmetric state "
            f"(deviation {dev:.3e})")
    tens = SymTensor.from_dense(np.real(rho.matrix), d, N)
    doc["csEntries"] = [{"index": list(key), "value": float(val)}
                        for key, val in sorted(tens.entries.items())]
    return doc


def _require(cond, message):
    if not cond:
        raise ValueError(message)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def document_to_state(doc, psd_tol=PSD_TOL):
    """StateDocument dict -> DensityMatrix; every malformed field raises
    ValueError.  The dense size N**parties is gated at the expansion limit."""
    _require(isinstance(doc, dict), "document must be a JSON object")
    for key in ("parties", "dim", "format"):
        _require(key in doc, f"missing field {key!r}")
    d = doc["parties"]
    N = doc["dim"]
    fmt = doc["format"]
    _require(_is_int(d) and d >= 1, "parties must be a positive integer")
    _require(_is_int(N) and N >= 1, "dim must be a positive integer")
    _require(fmt in FORMATS, f"format must be one of {FORMATS}")
    n = N ** d
    _require(n <= DENSE_LIMIT,
             f"dense size {n} exceeds the limit {DENSE_LIMIT}")
    _require(("dense" in doc) != ("csEntries" in doc),
             "exactly one of dense/csEntries must be present")
    if fmt == "dense":
        _require("dense" in doc, "dense format requires the dense field")
        rows = doc["dense"]
        _require(isinstance(rows, list) and len(rows) == n,
                 f"dense must be a list of {n} rows")
        mat = np.zeros((n, n), dtype=complex)
        for i, row in enumerate(rows):
            _require(isinstance(row, list) and len(row) == n,
                     f"row {i} must have {n} entries")
            for j, pair in enumerate(row):
                _require(isinstance(pair, list) and len(pair) == 2
                         and all(_is_num(x) for x in pair),
                         f"entry ({i},{j}) must be a [re, im] pair")
                mat[i, j] = complex(pair[0], pair[1])
    else:
        _require("csEntries" in doc,
                 "cs-compressed format requires the csEntries field")
        entries = doc["csEntries"]
        _require(isinstance(entries, list), "csEntries must be a list")
        tens = SymTensor(2 * d, N)
        for k, ent in enumerate(entries):
            _require(isinstance(ent, dict) and "index" in ent
                     and "value" in ent,
                     f"csEntries[{k}] must have index and value")
            idx = ent["index"]
            val = ent["value"]
            _require(isinstance(idx, list) and len(idx) == 2 * d
                     and all(_is_int(i) for i in idx),
                     f"csEntries[{k}].index must be {2 * d} integers")
            _require(list(sorted(idx)) == idx,
                     f"csEntries[{k}].index must be sorted")
            _require(_is_num(val),
                     f"csEntries[{k}].value must be a real number")
            tens[tuple(idx)] = float(val)
        mat = tens.to_dense()
    try:
        return DensityMatrix(mat, (N,) * d, check=True, psd_tol=psd_tol)
    except ValueError as exc:
        raise ValueError(f"matrix is not a valid state: {exc}") from exc


def certificate_to_document(cert):
    """Certificate -> report dict with the verdict, rule, decomposition
    terms (weight + unit local vector), and sanitized evidence."""
    terms = None
    if cert.decomposition is not None:
        terms = [{"weight": float(w),
                  "vector": [float(x) for x in np.real(pv.local)]}
                 for w, pv in cert.decomposition]
    return {"verdict": cert.verdict, "rule": cert.rule,
            "decomposition": terms, "evidence": sanitize(cert.evidence)}


def gme_to_document(res):
    """GmeResult -> report dict."""
    return {"mu": float(res.mu), "gme": float(res.gme),
            "maximizer": [float(x) for x in res.maximizer],
            "iterations": int(res.iterations),
            "kkt_residual": float(res.kkt_residual),
            "converged": bool(res.converged)}


def vandermonde_to_document(terms):
    """Vandermonde terms -> list of {weight, node}; the infinity node is the
    string \"inf\"."""
    out = []
    for term in terms:
        node = "inf" if term.infinite else float(term.node)
        out.append({"weight": float(term.weight), "node": node})
    return out
