"""Command-line front end.

Exit codes: 0 on success, 2 on usage errors, 1 when an input violates a
mathematical precondition or a size cap.
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .exact import DomainError, HalfInt, ResourceError, SurdSum, spin
from .gauge import LatticeModel, assemble_hamiltonian, spectrum
from .quasichar import (NormParams, QuasicharIndex, TracePolynomial, expand_invariant, norm,
                        stratum_operator_su2_n2, structure_constants)
from .recoupling import change_of_tree, recoupling_coeff, recoupling_R
from .su2 import cg, nine_lambda, wigner6j, wigner9j
from .trees import (Labelling, all_trees, enumerate_labellings, is_admissible, parse_tree,
                    print_tree)

DEFAULT_JMAX_CAP = Fraction(4)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_spin(text: str) -> HalfInt:
    """'3/2', '1.5', '-1/2' or an integer; nothing else."""
    t = text.strip()
    if not t or any(c not in "0123456789/.-+" for c in t):
        raise DomainError(f"not a spin value: {text!r}")
    return spin(HalfInt(t))


def parse_spins(text: str) -> list[HalfInt]:
    return [parse_spin(x) for x in text.replace(",", " ").split()]


def jmax_cap() -> Fraction:
    raw = os.environ.get("RECOUPLING_JMAX_CAP")
    if not raw:
        return DEFAULT_JMAX_CAP
    return Fraction(parse_spin(raw))


def parse_jmax(text: str) -> HalfInt:
    j = parse_spin(text)
    if j < 0:
        raise DomainError("j_max must be non-negative")
    cap = jmax_cap()
    if j > cap:
        raise ResourceError(f"j_max {j} exceeds the cutoff cap {cap} (RECOUPLING_JMAX_CAP)")
    return j


def parse_labelling(tree, text: str) -> Labelling:
    """Vertex labels in post-order, e.g. '1/2 1/2 1' on (1 2)."""
    labels = tuple(parse_spins(text))
    if len(labels) != tree.n_vertices:
        raise DomainError(f"tree {tree} needs {tree.n_vertices} labels in post-order, got {len(labels)}")
    lab = Labelling(labels)
    if not is_admissible(tree, lab):
        raise DomainError(f"labelling {lab} is not admissible on {tree}")
    return lab


def parse_index(tree, text: str) -> QuasicharIndex:
    """'LABELS' or 'LABELS | LABELS' (alpha, then alpha')."""
    a, _, b = text.partition("|")
    alpha = parse_labelling(tree, a)
    alpha_p = parse_labelling(tree, b) if b.strip() else alpha
    return QuasicharIndex(tree, alpha, alpha_p)


# ---------------------------------------------------------------------------
# output


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise DomainError("non-finite value in output")
    s = format(x, ".17g")
    return s if any(c in s for c in ".e") else s + ".0"


def to_json(obj) -> str:
    """JSON text with every float written with 17 significant digits."""
    import json

    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    return json.dumps(str(obj))


class Out:
    """Collects a payload and renders it as text or as an output record."""

    def __init__(self, args):
        self.args = args
        self.payload: dict = {}
        self.lines: list[str] = []

    def value(self, x):
        """Exact text or float, following --float."""
        if isinstance(x, SurdSum):
            return float(x) if self.args.float else str(x)
        if isinstance(x, Fraction):
            return float(x) if self.args.float else str(x)
        return x

    def text(self, x) -> str:
        v = self.value(x)
        return _fmt_float(v) if isinstance(v, float) else str(v)

    def emit(self) -> None:
        if self.args.json:
            cfg = {k: getattr(self.args, k) for k in ("jmax", "hbar", "beta", "seed", "tol")
                   if getattr(self.args, k, None) is not None}
            cfg = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in cfg.items()}
            rec = {"command": self.args.argv, "config": cfg, "payload": self.payload,
                   "version": __version__}
            print(to_json(rec))
        else:
            for line in self.lines:
                print(line)


# ---------------------------------------------------------------------------
# subcommands


def cmd_symbols(args, out: Out) -> int:
    vals = [parse_spin(x) for x in args.values]
    need = {"cg": 6, "6j": 6, "9j": 9, "9lambda": 9}[args.kind]
    if len(vals) != need:
        raise DomainError(f"{args.kind} takes {need} spin values, got {len(vals)}")
    if args.kind == "cg":
        v = cg(*vals)
    elif args.kind == "6j":
        v = wigner6j(*vals)
    else:
        rows = [vals[0:3], vals[3:6], vals[6:9]]
        v = wigner9j(rows) if args.kind == "9j" else nine_lambda(rows)
    out.payload = {"symbol": args.kind, "args": [str(x) for x in vals], "value": out.value(v)}
    out.lines.append(out.text(v))
    return 0


def cmd_trees(args, out: Out) -> int:
    if args.action == "all":
        ts = all_trees(args.n)
        out.payload = {"trees": [str(t) for t in ts]}
        out.lines.extend(str(t) for t in ts)
        return 0
    tree = parse_tree(args.tree)
    if args.action == "parse":
        out.payload = {"tree": str(tree), "leaves": tree.n_leaves, "vertices": tree.n_vertices}
        out.lines.append(print_tree(tree))
        return 0
    if args.leaves is None:
        raise DomainError("--leaves is required")
    leaves = parse_spins(args.leaves)
    if len(leaves) != tree.n_leaves:
        raise DomainError(f"tree {tree} has {tree.n_leaves} leaves, got {len(leaves)} labels")
    root = parse_spin(args.root) if args.root is not None else None
    labs = enumerate_labellings(tree, leaves, root)
    if args.action == "count":
        out.payload = {"count": len(labs)}
        out.lines.append(str(len(labs)))
    else:
        out.payload = {"labellings": [[str(x) for x in lab.labels] for lab in labs]}
        out.lines.extend(" ".join(str(x) for x in lab.labels) for lab in labs)
    return 0


def cmd_recouple(args, out: Out) -> int:
    if args.action == "R":
        tree = parse_tree(args.tree)
        a1, a2, a3 = (parse_labelling(tree, s) for s in (args.a1, args.a2, args.a3))
        v = recoupling_R(tree, a1, a2, a3)
        out.payload = {"R": out.value(v)}
        out.lines.append(out.text(v))
        return 0
    t1, t2 = parse_tree(args.tree1), parse_tree(args.tree2)
    sigma = [int(x) for x in args.sigma.split()] if args.sigma else None
    if args.action == "coeff":
        a1, a2 = parse_labelling(t1, args.a1), parse_labelling(t2, args.a2)
        v = recoupling_coeff(t1, a1, t2, a2, sigma)
        out.payload = {"R": out.value(v)}
        out.lines.append(out.text(v))
        return 0
    ch = change_of_tree(t1, t2, parse_spins(args.leaves), parse_spin(args.root), sigma)
    out.payload = {"source": [str(a) for a in ch.source], "target": [str(b) for b in ch.target],
                   "matrix": [[out.value(x) for x in row] for row in ch.matrix]}
    out.lines.append("rows: " + " ".join(str(a) for a in ch.source))
    out.lines.append("cols: " + " ".join(str(b) for b in ch.target))
    out.lines.extend("  ".join(out.text(x) for x in row) for row in ch.matrix)
    return 0


def _index_json(q: QuasicharIndex) -> dict:
    return {"tree": str(q.tree), "alpha": [str(x) for x in q.alpha.labels],
            "alpha_prime": [str(x) for x in q.alpha_prime.labels]}


def _expansion_out(expansion: dict, out: Out) -> None:
    out.payload = {"terms": [{"index": _index_json(q), "coeff": out.value(c)} for q, c in expansion.items()]}
    for q, c in expansion.items():
        out.lines.append(f"{out.text(c)}\t{q}")


def cmd_structprod(args, out: Out) -> int:
    tree = parse_tree(args.tree)
    q1, q2 = parse_index(tree, args.q1), parse_index(tree, args.q2)
    _expansion_out(structure_constants(q1, q2), out)
    return 0


def cmd_expand(args, out: Out) -> int:
    p = TracePolynomial.parse(args.poly)
    tree = parse_tree(args.tree) if args.tree else None
    _expansion_out(expand_invariant(p, args.links, tree), out)
    return 0


def cmd_norms(args, out: Out) -> int:
    tree = parse_tree(args.tree)
    q = parse_index(tree, args.index)
    v = norm(q, NormParams(args.hbar, args.beta))
    out.payload = {"index": _index_json(q), "norm": v}
    out.lines.append(_fmt_float(v))
    return 0


def cmd_su3(args, out: Out) -> int:
    from . import su3

    if args.action == "dim":
        r = su3.Su3Irrep.parse(args.irrep)
        out.payload = {"irrep": str(r), "dim": su3.su3_dim(r), "zeta": str(su3.su3_zeta(r))}
        out.lines.append(f"{su3.su3_dim(r)}\t{su3.su3_zeta(r)}")
    elif args.action == "series":
        s = su3.su3_cg_series(su3.Su3Irrep.parse(args.r1), su3.Su3Irrep.parse(args.r2))
        out.payload = {"series": {str(r): k for r, k in s.items()}}
        out.lines.extend(f"{r}\t{k}" for r, k in s.items())
    elif args.action == "cg":
        if args.load:
            su3.load_cg_csv(args.load)
        t = su3.su3_cg(args.r1, args.r2, args.r, args.k)
        if args.dump:
            su3.dump_cg_csv(t, args.dump)
        rows = [(str(a), str(b), str(c), complex(v).real) for a, b, c, v in t.rows()]
        out.payload = {"entries": [list(r) for r in rows]}
        out.lines.extend(f"{a}\t{b}\t{c}\t{_fmt_float(v)}" for a, b, c, v in rows)
    elif args.action == "ninelambda":
        if args.load:
            su3.load_cg_csv(args.load)
        rows = [tuple(su3.Su3Irrep.parse(x) for x in r.split()) for r in args.rows]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise DomainError("ninelambda takes three rows of three labels")
        v = su3.su3_nine_lambda(rows, tuple(args.row_k), tuple(args.col_k))
        out.payload = {"re": v.real, "im": v.imag}
        out.lines.append(f"{_fmt_float(v.real)}\t{_fmt_float(v.imag)}")
    elif args.action == "expand":
        e = su3.su3_expand_invariant(TracePolynomial.parse(args.poly))
        out.payload = {"terms": [{"index": str(q), "re": v.real, "im": v.imag} for q, v in e.items()]}
        out.lines.extend(f"{_fmt_float(v.real)}\t{q}" for q, v in e.items())
    elif args.action == "row":
        poly = su3.STRATUM_RELATIONS.get(args.op) or TracePolynomial.parse(args.op)
        e = su3.su3_expand_invariant(poly)
        src = su3.Su3QuasicharIndex.parse(args.source)
        row = su3.su3_operator_row(e, src, NormParams(args.hbar, args.beta))
        out.payload = {"source": str(src), "row": [{"target": str(q), "re": v.real, "im": v.imag}
                                                   for q, v in row.items()]}
        out.lines.extend(f"{_fmt_float(v.real)}\t{q}" for q, v in row.items())
    return 0


def _model_from_args(args) -> LatticeModel:
    if args.model:
        with open(args.model) as fh:
            m = LatticeModel.from_json(fh.read())
        return LatticeModel(m.n_links, m.plaquettes, args.g if args.g is not None else m.g,
                            args.delta if args.delta is not None else m.delta)
    if args.links is None:
        raise DomainError("--links or --model is required")
    plaqs = tuple(tuple(int(x) for x in p.split()) for p in (args.plaquette or []))
    return LatticeModel(args.links, plaqs, args.g if args.g is not None else 1.0,
                        args.delta if args.delta is not None else 1.0)


def cmd_hamiltonian(args, out: Out) -> int:
    model = _model_from_args(args)
    sp = assemble_hamiltonian(model, args.tree, args.jmax)
    spec = spectrum(sp, vectors=False)
    H = sp.matrix()
    out.payload = {"basis": [str(q) for q in sp.basis], "matrix": H.ravel().tolist(),
                   "size": sp.size, "eigenvalues": spec.eigenvalues.tolist(),
                   "dropped_couplings": sp.dropped_couplings,
                   "max_residual": float(spec.residuals.max())}
    out.lines.append(f"basis size {sp.size}, dropped couplings {sp.dropped_couplings}")
    out.lines.extend(_fmt_float(e) for e in spec.eigenvalues)
    return 0


def cmd_stratum(args, out: Out) -> int:
    basis, M = stratum_operator_su2_n2(NormParams(args.hbar, args.beta), args.jmax)
    out.payload = {"basis": [str(q) for q in basis], "matrix": M.ravel().tolist()}
    out.lines.append("\t".join(str(q) for q in basis))
    out.lines.extend("\t".join(_fmt_float(x) for x in row) for row in M)
    return 0


def selftest_fixtures() -> list[tuple[str, bool]]:
    from . import su3

    res = []
    e = expand_invariant(TracePolynomial.commutator_square(), 2)
    want = {(1, 0, 1): 1, (0, 1, 1): 1, (1, 1, 0): 3, (1, 1, 1): -2, (0, 0, 0): -3}
    got = {tuple(int(x) for x in q.alpha.labels): c for q, c in e.items()}
    res.append(("su2 tr([a1,a2]^2) expansion", got == {k: SurdSum.rational(v) for k, v in want.items()}))
    quintet = {((2, 1), (2, 2)): 1.0, ((2, 1), (3, 0)): math.sqrt(3) / 2, ((2, 1), (1, 1)): math.sqrt(6) / 4,
               ((1, 0), (3, 0)): 0.5, ((1, 0), (1, 1)): math.sqrt(10) / 4}
    for (n1, r), want_abs in quintet.items():
        w = su3.su3_nine_lambda((((2, 0), (2, 0), (2, 1)), ((0, 1), (0, 0), (0, 1)), (n1, (2, 0), r)))
        name = f"su3 |W_{su3.Su3Irrep(*n1)},{su3.Su3Irrep(*r)}|"
        res.append((name, abs(abs(w) - want_abs) < 1e-9))
    return res


def cmd_selftest(args, out: Out) -> int:
    res = selftest_fixtures()
    out.payload = {"results": [{"name": n, "pass": ok} for n, ok in res]}
    width = max(len(n) for n, _ in res)
    out.lines.extend(f"{n:<{width}}  {'pass' if ok else 'FAIL'}" for n, ok in res)
    return 0 if all(ok for _, ok in res) else 1


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Treats '-1/2' as a value rather than an option."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self._negative_number_matcher = re.compile(r"^-\d+$|^-\d*\.\d+$|^-\d+/\d+$")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON output record")
    common.add_argument("--float", action="store_true", help="print floats instead of exact values")
    common.add_argument("--seed", type=int, default=0, help="seed for stochastic steps")

    def norm_flags(p):
        p.add_argument("--hbar", type=float, default=1.0, help="Planck constant of the norm")
        p.add_argument("--beta", type=float, default=1.0, help="coupling scale of the norm")

    ap = _Parser(prog="recouple", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"recouple {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("symbols", parents=[common], help="SU(2) cg, 6j, 9j and 9-lambda symbols")
    p.add_argument("kind", choices=["cg", "6j", "9j", "9lambda"])
    p.add_argument("values", nargs="+", help="spins and projections, e.g. 1/2 -1/2")
    p.set_defaults(func=cmd_symbols)

    p = sub.add_parser("trees", parents=[common], help="parse trees and enumerate labellings")
    p.add_argument("action", choices=["parse", "enumerate", "count", "all"])
    p.add_argument("--tree", default="(1 2)", help="bracketing such as '((1 2) 3)'")
    p.add_argument("--leaves", help="leaf spins, e.g. '1/2 1 1/2'")
    p.add_argument("--root", help="restrict the root spin")
    p.add_argument("-n", type=int, default=3, help="leaf count for 'all'")
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("recouple", parents=[common], help="recoupling coefficients")
    p.add_argument("action", choices=["R", "coeff", "change"])
    p.add_argument("--tree", default="(1 2)", help="tree for R(T)")
    p.add_argument("--tree1", help="source tree for coeff/change")
    p.add_argument("--tree2", help="target tree for coeff/change")
    p.add_argument("--a1", help="labels in post-order")
    p.add_argument("--a2")
    p.add_argument("--a3")
    p.add_argument("--leaves")
    p.add_argument("--root")
    p.add_argument("--sigma", help="leaf permutation, e.g. '2 1 3'")
    p.set_defaults(func=cmd_recouple)

    p = sub.add_parser("structprod", parents=[common], help="expand a product of two quasicharacters")
    p.add_argument("--tree", default="(1 2)")
    p.add_argument("--q1", required=True, help="'LABELS' or 'LABELS | LABELS'")
    p.add_argument("--q2", required=True)
    p.set_defaults(func=cmd_structprod)

    p = sub.add_parser("expand", parents=[common], help="expand a trace polynomial in quasicharacters")
    p.add_argument("poly", help="e.g. '3*tr(1 2 -1 -2) - tr(1)'")
    p.add_argument("--links", type=int, help="number of links (default: largest used)")
    p.add_argument("--tree", help="coupling tree (default: standard tree)")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("norms", parents=[common], help="norm of a quasicharacter")
    p.add_argument("--tree", default="(1 2)")
    p.add_argument("--index", required=True, help="'LABELS' or 'LABELS | LABELS' in post-order")
    norm_flags(p)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("su3", parents=[common], help="numerical SU(3) tools (float output only)")
    p.add_argument("action", choices=["dim", "series", "cg", "ninelambda", "expand", "row"])
    p.add_argument("irrep", nargs="?", default="10")
    p.add_argument("--r1", default="10")
    p.add_argument("--r2", default="10")
    p.add_argument("--r", default="20")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--dump", help="write the CG tensor as CSV")
    p.add_argument("--load", help="read CG tensors from CSV before computing")
    p.add_argument("--rows", nargs=3, default=["20 20 21", "01 00 01", "21 20 22"])
    p.add_argument("--row-k", nargs=3, type=int, default=[1, 1, 1])
    p.add_argument("--col-k", nargs=3, type=int, default=[1, 1, 1])
    p.add_argument("--poly", default="tr(1 2 1 2) - tr(1 1 2 2)")
    p.add_argument("--op", default="r1", help="r1..r15 or a trace polynomial")
    p.add_argument("--source", default="01,00,01")
    norm_flags(p)
    p.set_defaults(func=cmd_su3)

    p = sub.add_parser("hamiltonian", parents=[common], help="truncated lattice Hamiltonian spectrum")
    p.add_argument("--links", type=int)
    p.add_argument("--plaquette", action="append", help="word such as '1 2 -1 -2' (repeatable)")
    p.add_argument("--model", help="JSON model file")
    p.add_argument("--g", type=float, help="coupling constant (overrides the model file)")
    p.add_argument("--delta", type=float, help="lattice spacing (overrides the model file)")
    p.add_argument("--jmax", default="1/2", help="vertex spin cutoff (capped by RECOUPLING_JMAX_CAP)")
    p.add_argument("--tree", help="coupling tree (default: standard tree)")
    p.set_defaults(func=cmd_hamiltonian)

    p = sub.add_parser("stratum-op", parents=[common], help="N=2 SU(2) stratum operator matrix")
    p.add_argument("--jmax", default="1", help="spin cutoff for the N=2 basis")
    norm_flags(p)
    p.set_defaults(func=cmd_stratum)

    p = sub.add_parser("selftest", parents=[common], help="check built-in reference values")
    p.set_defaults(func=cmd_selftest)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    out = Out(args)
    try:
        if hasattr(args, "jmax") and args.jmax is not None:
            args.jmax = parse_jmax(args.jmax)
        code = args.func(args, out)
    except (DomainError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out.emit()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
