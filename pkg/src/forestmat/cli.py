"""Command-line front end.

    forestmat COMMAND [--input PATH] [flags]

Commands: info, forests, access, rank, markov, audit, oracle-check.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical or
convergence problem.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
from importlib import resources
import re
import sys
from dataclasses import dataclass
from typing import Any, TextIO

import numpy as np

from . import accessibility as acc
from . import markov, ranking
from .digraph import (
    WeightedDigraph,
    build_digraph,
    laplacian,
    numerical_rank,
    strong_components,
)
from .errors import (
    DataError,
    DuplicateHeader,
    LoopArc,
    MissingHeader,
    NonpositiveWeight,
    NumericalError,
    ParseError,
    VertexOutOfRange,
)
from .forests import alpha_bound, expansion_of, j_k, j_of_tau, j_tilde
from .oracle import DEFAULT_CAP, oracle_expansion

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
ORACLE_RTOL = 1e-9

_INT = re.compile(r"[0-9]+\Z")
_DECIMAL = re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?\Z")


# ---------------------------------------------------------------------------
# edge lists
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeListDocument:
    n: int
    records: tuple[tuple[int, int, float], ...]
    source: str = "<stdin>"

    def digraph(self) -> WeightedDigraph:
        return build_digraph(self.n, self.records)


def _located(exc: DataError, line: int) -> DataError:
    exc.line = line
    return exc


def parse_edge_list(text: str, source: str = "<stdin>") -> EdgeListDocument:
    """Parse ``n <count>`` followed by ``tail<TAB>head<TAB>weight`` records.

    ``#`` starts a comment; blank lines are skipped; ids are 1-based.
    """
    n: int | None = None
    records: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if body.lstrip().startswith("n"):
            if n is not None:
                raise DuplicateHeader("second 'n' header", lineno, body.index("n") + 1)
            m = re.fullmatch(r"(\s*)n[ \t]+([0-9]+)", body)
            if not m:
                raise ParseError("header must read 'n <count>'", lineno, 1)
            n = int(m.group(2))
            if n < 2:
                raise ParseError(f"vertex count must be at least 2, got {n}", lineno, m.start(2) + 1)
            continue
        if n is None:
            raise MissingHeader("record before the 'n <count>' header", lineno, 1)
        fields = body.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, found {len(fields)}", lineno, 1)
        cols = [1]
        for f in fields[:-1]:
            cols.append(cols[-1] + len(f) + 1)
        tail_s, head_s, weight_s = (f.strip() for f in fields)
        for text_, col, what in ((tail_s, cols[0], "tail"), (head_s, cols[1], "head")):
            if not _INT.match(text_):
                raise ParseError(f"{what} must be a positive integer, got {text_!r}", lineno, col)
        if not _DECIMAL.match(weight_s):
            raise ParseError(f"weight must be a decimal number, got {weight_s!r}", lineno, cols[2])
        tail, head, weight = int(tail_s), int(head_s), float(weight_s)
        if not (1 <= tail <= n and 1 <= head <= n):
            raise _located(VertexOutOfRange(f"line {lineno}: arc ({tail}, {head}) outside 1..{n}"), lineno)
        if tail == head:
            raise _located(LoopArc(f"line {lineno}: loop at vertex {tail}"), lineno)
        if not weight > 0 or not np.isfinite(weight):
            raise _located(NonpositiveWeight(f"line {lineno}: weight {weight_s} is not positive"), lineno)
        records.append((tail, head, weight))
    if n is None:
        raise MissingHeader("no 'n <count>' header", max(1, len(text.splitlines())), 1)
    return EdgeListDocument(n, tuple(records), source)


def format_edge_list(g: WeightedDigraph) -> str:
    lines = [f"n {g.n}"]
    lines += [f"{i}\t{j}\t{w!r}" for i, j, w in g.arcs]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _num_text(x: Any, precision: int) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "null"
    if isinstance(x, str):
        return x
    s = f"{float(x):.{precision}g}"
    return "0" if float(s) == 0.0 else s


def _rounded(obj: Any, precision: int) -> Any:
    """Round floats to ``precision`` significant digits for JSON."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(f"{float(obj):.{precision}g}")
        return 0.0 if v == 0.0 else v
    if isinstance(obj, dict):
        return {k: _rounded(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_rounded(v, precision) for v in obj]
    return obj


def _tsv_cell(v: Any, precision: int) -> str:
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(_tsv_cell(x, precision) for x in v)
    if isinstance(v, dict):
        return " ".join(f"{k}={_tsv_cell(x, precision)}" for k, x in v.items())
    return _num_text(v, precision)


def render_tsv(payload: dict, precision: int) -> str:
    out: list[str] = []
    for key, value in payload.items():
        if isinstance(value, (list, tuple)) and value and isinstance(value[0], dict):
            cols = list(value[0].keys())
            out.append(key)
            out.append("\t".join(cols))
            for row in value:
                out.append("\t".join(_tsv_cell(row.get(c), precision) for c in cols))
        elif isinstance(value, (list, tuple)) and value and isinstance(value[0], (list, tuple)):
            out.append(key)
            for row in value:
                out.append("\t".join(_num_text(x, precision) for x in row))
        elif isinstance(value, (list, tuple)):
            out.append("\t".join([key] + [_num_text(x, precision) for x in value]))
        else:
            out.append(f"{key}\t{_tsv_cell(value, precision)}")
    return "\n".join(out) + "\n"


def render_json(payload: dict, precision: int) -> str:
    return json.dumps(_rounded(payload, precision), indent=2, allow_nan=False) + "\n"


def output_schema() -> dict:
    """The JSON schema every ``--format json`` payload satisfies."""
    return json.loads(resources.files("forestmat").joinpath("schema/output.schema.json").read_text("utf-8"))


def _matrix(m: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(m)]


def _sets(sets) -> list[list[int]]:
    return [sorted(int(v) for v in s) for s in sets]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def conv(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return conv


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="edge-list file (default: stdin)")
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--precision", type=_positive(int), default=12, help="significant digits")
    common.add_argument("--tau", type=_positive(float), default=1.0)
    common.add_argument("--alpha", type=_positive(float), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=_positive(int), default=DEFAULT_CAP)
    common.add_argument("--trials", type=_positive(int), default=100_000)

    parser = _Parser(prog="forestmat", description="Spanning-forest matrices of weighted digraphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("info", parents=[common], help="components, source knots, d'")
    p = sub.add_parser("forests", parents=[common], help="sigma sequence, J(tau), J~")
    p.add_argument("--k", type=int, default=None, help="also print Q_k and J_k")
    p = sub.add_parser("access", parents=[common], help="accessibility matrix")
    p.add_argument("--direction", choices=("out", "in"), default="out")
    p.add_argument("--measure", choices=("parametric", "limiting", "dense"), default="parametric")
    p = sub.add_parser("rank", parents=[common], help="scores and ranking")
    p.add_argument("--method", choices=("kernel", "mean", "daniels", "borda"), default="mean")
    p = sub.add_parser("markov", parents=[common], help="inverse chain and its Cesaro limit")
    p.add_argument("--max-iters", type=_positive(int), default=200)
    p.add_argument("--tol", type=_positive(float), default=1e-9)
    p.add_argument("--dissemination", action="store_true", help="also run the dissemination simulation")
    p = sub.add_parser("audit", parents=[common], help="check accessibility conditions")
    p.add_argument("--measure", choices=acc.KINDS, default="out")
    sub.add_parser("oracle-check", parents=[common], help="engine vs brute-force enumeration")
    return parser


def cmd_info(g: WeightedDigraph, args) -> tuple[dict, int]:
    info = strong_components(g)
    count = 1
    for knot in info.source_knots:
        count *= len(knot)
    payload = {
        "command": "info",
        "n": g.n,
        "arc_count": len(g.arcs),
        "d_prime": info.d_prime,
        "components": _sets(info.components),
        "condensation_arcs": sorted([a + 1, b + 1] for a, b in info.condensation_arcs),
        "source_knots": _sets(info.source_knots),
        "exclusive_reach": _sets(info.exclusive_reach),
        "vertex_basis_count": count,
        "laplacian_rank": numerical_rank(laplacian(g)),
    }
    return payload, EXIT_OK


def cmd_forests(g: WeightedDigraph, args) -> tuple[dict, int]:
    exp = expansion_of(g)
    pp = j_of_tau(exp, args.tau)
    payload = {
        "command": "forests",
        "n": g.n,
        "d_prime": exp.d_prime,
        "sigma": [float(s) for s in exp.sigma[: exp.max_arcs + 1]],
        "tau": args.tau,
        "sigma_tau": pp.sigma_tau,
        "j_tau": _matrix(pp.j_matrix),
        "j_tilde": _matrix(j_tilde(exp).j_tilde),
    }
    if args.k is not None:
        payload["k"] = args.k
        payload["q_k"] = _matrix(exp.q_matrices[args.k]) if 0 <= args.k <= exp.max_arcs else []
        payload["j_k"] = _matrix(j_k(exp, args.k))
    return payload, EXIT_OK


def cmd_access(g: WeightedDigraph, args) -> tuple[dict, int]:
    if args.measure == "parametric":
        m = acc.access_out(g, args.tau) if args.direction == "out" else acc.access_in(g, args.tau)
    elif args.measure == "limiting":
        m = acc.access_limiting(g, args.direction)
    else:
        if args.direction != "out":
            raise UsageError("the dense-forest measure is defined for --direction out only")
        alpha = args.alpha if args.alpha is not None else alpha_bound(expansion_of(g)) / 2.0
        m = acc.access_dense(g, alpha)
    payload = {"command": "access", "kind": m.kind, "param": m.param, "p": _matrix(m.p)}
    return payload, EXIT_OK


def cmd_rank(g: WeightedDigraph, args) -> tuple[dict, int]:
    payload: dict[str, Any] = {"command": "rank", "method": args.method}
    if args.method in ("kernel", "mean"):
        sv = ranking.mean_limit_scores(g)
        if args.method == "kernel":
            payload["basis"] = [[float(x) for x in v] for v in ranking.kernel_basis(g)]
    elif args.method == "daniels":
        sv = ranking.daniels_tree_scores(g)
    else:
        sv = ranking.borda_scores(g, args.tau)
        payload["tau"] = args.tau
    report = ranking.rank(sv)
    payload["score_method"] = sv.method
    payload["scores"] = [float(x) for x in sv.values]
    payload["ordering"] = list(report.ordering)
    payload["tie_groups"] = _sets(report.tie_groups)
    return payload, EXIT_OK


def cmd_markov(g: WeightedDigraph, args) -> tuple[dict, int]:
    chain = markov.inverse_chain(g, args.alpha)
    res = markov.cesaro_limit(chain, args.max_iters, args.tol)
    jt = j_tilde(expansion_of(g)).j_tilde
    payload: dict[str, Any] = {
        "command": "markov",
        "alpha": chain.alpha,
        "p": _matrix(chain.p),
        "cesaro": _matrix(res.pi),
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
        "limit_deviation": float(np.abs(res.pi - jt.T).max()),
        "uniform_start": [float(x) for x in res.pi.mean(axis=0)],
    }
    if args.dissemination:
        est = markov.simulate_dissemination(g, args.trials, args.seed, args.cap)
        payload["trials"] = est.trials
        payload["successes"] = est.successes
        payload["seed"] = est.seed
        payload["j_hat"] = _matrix(est.j_hat)
        payload["stderr"] = _matrix(est.stderr)
    return payload, EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_audit(g: WeightedDigraph, args) -> tuple[dict, int]:
    kind = args.measure
    if kind in ("out", "in"):
        param = args.tau
    elif kind == "dense_out":
        param = args.alpha if args.alpha is not None else alpha_bound(expansion_of(g)) / 2.0
    else:
        param = None
    report = acc.audit(acc.Measure(kind, param), g)
    verdicts = []
    for v in report.verdicts:
        w = v.witness or {}
        verdicts.append(
            {
                "condition": v.condition,
                "status": v.status,
                "vertices": list(w.get("vertices", ())),
                "values": [float(x) for x in w.get("values", ())],
                "arc": list(w.get("arc", ())),
                "delta": w.get("delta"),
            }
        )
    payload = {
        "command": "audit",
        "measure": kind,
        "param": param,
        "verdicts": verdicts,
        "profile_ok": report.profile_ok,
        "mismatches": report.mismatches,
    }
    return payload, EXIT_OK


def oracle_deviation(g: WeightedDigraph, cap: int = DEFAULT_CAP) -> tuple[float, float]:
    """Largest relative gaps (sigma, Q) between engine and enumeration."""
    exp = expansion_of(g)
    oe = oracle_expansion(g, cap)
    top = exp.max_arcs
    s_exact = oe.sigma_float()
    q_exact = oe.q_float()
    s_eng = np.zeros(g.n)
    s_eng[: top + 1] = exp.sigma[: top + 1]
    q_eng = np.zeros_like(q_exact)
    q_eng[: top + 1] = np.array(exp.q_matrices)
    s_dev = float((np.abs(s_eng - s_exact) / np.maximum(np.abs(s_exact), 1.0)).max())
    q_dev = float((np.abs(q_eng - q_exact) / np.maximum(np.abs(q_exact), 1.0)).max())
    return s_dev, q_dev


def cmd_oracle_check(g: WeightedDigraph, args) -> tuple[dict, int]:
    s_dev, q_dev = oracle_deviation(g, args.cap)
    worst = max(s_dev, q_dev)
    ok = worst <= ORACLE_RTOL
    payload = {
        "command": "oracle-check",
        "n": g.n,
        "sigma_deviation": s_dev,
        "q_deviation": q_dev,
        "max_deviation": worst,
        "tolerance": ORACLE_RTOL,
        "ok": ok,
    }
    return payload, EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "info": cmd_info,
    "forests": cmd_forests,
    "access": cmd_access,
    "rank": cmd_rank,
    "markov": cmd_markov,
    "audit": cmd_audit,
    "oracle-check": cmd_oracle_check,
}


def run(argv: list[str], stdin: TextIO | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"forestmat: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        if args.input:
            with open(args.input, encoding="utf-8") as fh:
                text, source = fh.read(), args.input
        else:
            text, source = stdin.read(), "<stdin>"
        g = parse_edge_list(text, source).digraph()
        payload, code = COMMANDS[args.command](g, args)
    except UsageError as exc:
        print(f"forestmat: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DataError, OSError, UnicodeDecodeError) as exc:
        print(f"forestmat: data error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"forestmat: numerical error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC

    render = render_json if args.format == "json" else render_tsv
    stdout.write(render(payload, args.precision))
    if code == EXIT_NUMERIC:
        print(f"forestmat: {args.command}: numerical check did not pass", file=stderr)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
