"""Command-line interface: JSON state documents in, deterministic JSON
reports out.

Exit codes: 0 success (or verdict Separable), 1 Entangled certified,
2 Undetermined, 3 input error, 4 numeric failure."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import engine, gme, named_states, serialize, states, structured

EXIT_OK = 0
EXIT_ENTANGLED = 1
EXIT_UNDETERMINED = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4

_VERDICT_EXIT = {"Separable": EXIT_OK, "Entangled": EXIT_ENTANGLED,
                 "Undetermined": EXIT_UNDETERMINED}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags by default; 2 means Undetermined here,
    so usage errors are remapped to the input-error code."""

    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_text(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _read_state(args):
    doc = json.loads(_read_text(args.infile))
    return serialize.document_to_state(doc, psd_tol=args.tol_psd)


def _emit(args, obj):
    line = serialize.canonical_json(obj)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")
    else:
        sys.stdout.write(line + "\n")


def _cmd_check_cs(args):
    rho = _read_state(args)
    cs, dev = states.is_cs(rho)
    _emit(args, {"cs": bool(cs), "deviation": float(dev)})
    return EXIT_OK


def _cmd_ptrace(args):
    rho = _read_state(args)
    d = rho.parties
    keep = args.parties if args.parties is not None else d - 1
    if not 1 <= keep < d:
        raise ValueError(f"--parties must keep between 1 and {d - 1} parties")
    out = states.partial_trace(rho, list(range(keep, d)))
    _emit(args, serialize.state_to_document(out))
    return EXIT_OK


def _cmd_ppt(args):
    rho = _read_state(args)
    _emit(args, {"ppt": bool(states.is_ppt(rho, tol=args.tol_psd)),
                 "min_eigenvalue": float(states.ppt_min_eigenvalue(rho))})
    return EXIT_OK


def _cmd_classify(args):
    rho = _read_state(args)
    cert = engine.classify(rho, tol_rank=args.tol_rank,
                           tol_psd=args.tol_psd, seed=args.seed)
    _emit(args, serialize.certificate_to_document(cert))
    return _VERDICT_EXIT[cert.verdict]


def _cmd_decompose(args):
    rho = _read_state(args)
    cert = engine.s_decompose(rho, seed=args.seed)
    _emit(args, serialize.certificate_to_document(cert))
    return _VERDICT_EXIT[cert.verdict]


def _cmd_gme(args):
    rho = _read_state(args)
    res = gme.gme_power_iteration(rho, seed=args.seed)
    _emit(args, serialize.gme_to_document(res))
    return EXIT_OK


def _cmd_hankel(args):
    rho = _read_state(args)
    dm = structured.state_to_dicke_matrix(rho)
    terms = structured.hankel_psd_decompose(dm.moment)
    _emit(args, {
        "parties": rho.parties,
        "flags": sorted(dm.flags),
        "dickeMatrix": [[float(x) for x in row] for row in dm.entries],
        "momentMatrix": [[float(x) for x in row] for row in dm.moment],
        "terms": serialize.vandermonde_to_document(terms),
    })
    return EXIT_OK


def _cmd_toeplitz_scan(args):
    report = structured.toeplitz_scan(args.parties, samples=args.samples,
                                      seed=args.seed)
    for rec in report["records"]:
        sys.stdout.write(serialize.canonical_json(rec) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(serialize.canonical_json(report) + "\n")
    if report["counts"].get("Entangled", 0):
        return EXIT_ENTANGLED
    return EXIT_OK


def _cmd_example(args):
    named = named_states.get_example(args.name)
    doc = serialize.state_to_document(named.state)
    doc["name"] = named.name
    _emit(args, doc)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="cssep",
                     description="Completely symmetric state toolkit")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, func, helptext, state_in=True, seed=False, extra=()):
        p = sub.add_parser(name, help=helptext)
        if state_in:
            p.add_argument("--in", dest="infile", default=None,
                           help="input state JSON (default: stdin)")
        p.add_argument("--out", default=None,
                       help="output file (default: stdout)")
        p.add_argument("--tol-rank", type=float, default=states.RANK_TOL,
                       help="relative eigenvalue cutoff for ranks")
        p.add_argument("--tol-psd", type=float, default=states.PSD_TOL,
                       help="relative tolerance for negative eigenvalues")
        if seed:
            p.add_argument("--seed", type=int, default=0,
                           help="seed for randomized searches")
        for flag, kw in extra:
            p.add_argument(flag, **kw)
        p.set_defaults(func=func)
        return p

    add("check-cs", _cmd_check_cs, "test complete symmetry")
    add("ptrace", _cmd_ptrace, "partial trace onto leading parties",
        extra=[("--parties", {"type": int, "default": None,
                              "help": "number of parties to keep"})])
    add("ppt", _cmd_ppt, "partial-transpose positivity")
    add("classify", _cmd_classify, "separability verdict with certificate",
        seed=True)
    add("decompose", _cmd_decompose, "constructive symmetric decomposition",
        seed=True)
    add("gme", _cmd_gme, "geometric entanglement of a nonnegative state",
        seed=True)
    add("hankel", _cmd_hankel, "moment matrix and node decomposition")
    add("toeplitz-scan", _cmd_toeplitz_scan,
        "classify random Toeplitz-moment multiqubit states",
        state_in=False, seed=True,
        extra=[("--parties", {"type": int, "default": 3,
                              "help": "number of qubits"}),
               ("--samples", {"type": int, "default": 300,
                              "help": "number of random samples"})])
    add("example", _cmd_example, "emit a named reference state",
        state_in=False,
        extra=[("--name", {"required": True,
                           "help": "example name (see errors for the list)"})])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_OK
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
