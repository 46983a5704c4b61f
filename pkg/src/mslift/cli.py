"""File-driven command line front end.

Commands: ``eval``, ``lift``, ``decompose``, ``minimize``, ``certify`` and
``demo``. All reports are JSON (printed, and stored with ``--report``);
``--plot`` renders static SVG figures. Exit codes: 0 success, 1 computation
or verification failure, 2 input validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .currents import GraphCombination, graph
from .decompose import decompose
from .errors import DomainMismatchError, MsliftError, ValidationError
from .lift import LiftParams, certify_minimality, evaluate
from .sbv import (
    DIRICHLET_TERM_WEIGHT,
    Domain,
    MsParams,
    Piece,
    SbvFunction,
    constant,
    jump_set,
    ms_energy,
    regular_energy,
)
from .solver import DirichletSpec, minimize, perturb_inside

CONVENTIONS = {
    "dirichlet_term_weight": DIRICHLET_TERM_WEIGHT,
    "alpha_multiplies": "jump count only",
}


# -- small IO helpers ---------------------------------------------------------

def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None


def _load_function(path: str) -> SbvFunction:
    try:
        return SbvFunction.from_dict(_read_json(path))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _load_combination(path: str) -> GraphCombination:
    data = _read_json(path)
    try:
        if "terms" in data:
            return GraphCombination.from_dict(data)
        return graph(SbvFunction.from_dict(data))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _load_g(args, domain: Domain) -> SbvFunction:
    if args.g is None:
        return constant(domain, 0.0)
    return _load_function(args.g)


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False)
    print(text)
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            fh.write(text + "\n")


def _params(args) -> MsParams:
    return MsParams(alpha=args.alpha, beta=args.beta)


# -- plotting -----------------------------------------------------------------

def _plot_combinations(path: str, panels: list[tuple[str, GraphCombination]]) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4), squeeze=False)
    for ax, (title, T) in zip(axes[0], panels):
        for w, u in T.terms:
            for piece in u.pieces:
                ax.plot(piece.nodes, piece.values, lw=1.0 + 1.5 * min(w, 2.0))
            for x, lo, hi in jump_set(u):
                ax.plot([x, x], [lo, hi], ls=":", lw=1.0)
        ax.set_title(title)
        ax.set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# -- commands --------------------------------------------------------------------

def cmd_eval(args) -> int:
    u = _load_function(args.func)
    g = _load_g(args, u.domain)
    p = _params(args)
    reg = regular_energy(u, g, p)
    jumps = jump_set(u)
    report = {
        "total": reg + p.alpha * len(jumps),
        "regular": reg,
        "jump_count": len(jumps),
        "jump_term": p.alpha * len(jumps),
        "alpha": p.alpha,
        "beta": p.beta,
        "conventions": CONVENTIONS,
    }
    _emit(report, args)
    if args.plot:
        _plot_combinations(args.plot, [("function", graph(u))])
    return 0


def cmd_lift(args) -> int:
    T = _load_combination(args.combo)
    if T.domain is None:
        raise ValidationError("cannot lift the empty combination without a domain")
    g = _load_g(args, T.domain)
    params = LiftParams(_params(args), g)
    rep = evaluate(T, params)
    report = rep.to_dict()
    report["conventions"] = CONVENTIONS
    _emit(report, args)
    if args.columns_csv:
        with open(args.columns_csv, "w") as fh:
            for col in rep.columns:
                fh.write("\n".join(col.profile.csv_rows()))
                if col.profile.csv_rows():
                    fh.write("\n")
    if args.plot:
        _plot_combinations(args.plot, [("combination", T)])
    return 0


def cmd_decompose(args) -> int:
    T = _load_combination(args.combo)
    if T.domain is None:
        raise ValidationError("cannot decompose the empty combination")
    g = _load_g(args, T.domain)
    params = LiftParams(_params(args), g)
    dec = decompose(T, params)
    report = dec.to_dict()
    report["part_energies"] = [
        ms_energy(u, g, params.ms) for _, u in dec.parts
    ]
    report["lifted_total"] = evaluate(T, params).total
    _emit(report, args)
    if args.plot:
        _plot_combinations(
            args.plot, [("input", T), ("parts", dec.as_combination())]
        )
    return 0


def cmd_minimize(args) -> int:
    g = _load_function(args.g) if args.g else None
    if g is None:
        raise ValidationError("minimize requires --g")
    spec = None
    if args.boundary:
        if not args.inner:
            raise ValidationError("--boundary requires --inner IA IB")
        ia, ib = args.inner
        dom = Domain(g.domain.a, g.domain.b, ia, ib)
        spec = DirichletSpec.from_function(dom, _load_function(args.boundary))
    p = _params(args)
    t0 = time.perf_counter()
    u = minimize(g, p, spec, args.n)
    elapsed = (time.perf_counter() - t0) * 1000.0
    report = {
        "energy": ms_energy(u, g, p),
        "jumps": [x for x, _, _ in jump_set(u)],
        "runtime_ms": elapsed,
        "func": u.to_dict(),
        "conventions": CONVENTIONS,
    }
    _emit(report, args)
    if args.plot:
        _plot_combinations(args.plot, [("datum", graph(g)), ("minimizer", graph(u))])
    return 0


def cmd_certify(args) -> int:
    u = _load_function(args.func)
    ia, ib = args.inner
    d = Domain(u.domain.a, u.domain.b, ia, ib)
    g = _load_g(args, u.domain)
    params = LiftParams(_params(args), g)
    competitors = [_load_combination(p) for p in args.competitors or []]
    if args.generate:
        competitors.extend(perturb_inside(u, d, seed=args.seed, count=args.generate))
    report_obj = certify_minimality(u, params, d, competitors, tol=args.tol)
    report = report_obj.to_dict()
    report["conventions"] = CONVENTIONS
    _emit(report, args)
    return 0 if report_obj.all_certified else 1


def _demo_coarea(args) -> int:
    dom = Domain(0.0, 1.0)
    u1 = SbvFunction(dom, (Piece((0.0, 0.5), (0.0, 0.0)), Piece((0.5, 1.0), (0.5, 1.0))))
    u2 = SbvFunction(dom, (Piece((0.0, 0.5), (0.0, 0.5)), Piece((0.5, 1.0), (1.0, 1.0))))
    T = GraphCombination(((0.5, u1), (0.5, u2)))
    g = constant(dom, 0.0)
    params = LiftParams(MsParams(1.0, 0.0), g)
    naive = 0.5 * ms_energy(u1, g, params.ms) + 0.5 * ms_energy(u2, g, params.ms)
    dec = decompose(T, params)
    report = {
        "demo": "coarea-counterexample",
        "naive_average": naive,
        "lifted": evaluate(T, params).total,
        "parts": [
            {"mu": mu, "energy": ms_energy(w, g, params.ms), "func": w.to_dict()}
            for mu, w in dec.parts
        ],
        "checks": dec.checks,
        "conventions": CONVENTIONS,
    }
    _emit(report, args)
    if args.plot:
        _plot_combinations(args.plot, [("input", T), ("parts", dec.as_combination())])
    return 0


def _demo_figure3(args) -> int:
    dom = Domain(0.0, 1.0)
    u1 = SbvFunction(dom, (Piece((0.0, 0.5), (2.0, 2.0)), Piece((0.5, 1.0), (3.0, 3.0))))
    u2 = SbvFunction(dom, (Piece((0.0, 0.5), (3.0, 3.0)), Piece((0.5, 1.0), (4.0, 4.0))))
    T = GraphCombination(((1.0, u1), (1.0, u2)))
    g = constant(dom, 0.0)
    params = LiftParams(MsParams(1.0, 0.0), g)
    dec = decompose(T, params)
    report = {
        "demo": "figure3-swap",
        "input_jumps": [list(jump_set(u)) for _, u in T.terms],
        "lifted": evaluate(T, params).total,
        "parts": [
            {"mu": mu, "jumps": [list(j) for j in jump_set(w)], "func": w.to_dict()}
            for mu, w in dec.parts
        ],
        "checks": dec.checks,
        "conventions": CONVENTIONS,
    }
    _emit(report, args)
    if args.plot:
        _plot_combinations(args.plot, [("before", T), ("after", dec.as_combination())])
    return 0


_DEMOS = {
    "coarea-counterexample": _demo_coarea,
    "figure3-swap": _demo_figure3,
}


def cmd_demo(args) -> int:
    handler = _DEMOS.get(args.name)
    if handler is None:
        raise ValidationError(
            f"unknown demo {args.name!r}; available: {', '.join(sorted(_DEMOS))}"
        )
    return handler(args)


# -- parser ------------------------------------------------------------------------

def _add_shared(sp, g_required: bool = False) -> None:
    sp.add_argument("--alpha", type=float, default=1.0, help="jump penalty (> 0)")
    sp.add_argument("--beta", type=float, default=0.0, help="fidelity weight (>= 0)")
    sp.add_argument("--g", required=g_required, help="datum JSON path (default: zero)")
    sp.add_argument("--report", help="write the JSON report to this path")
    sp.add_argument("--plot", help="write an SVG figure to this path")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    sp.add_argument("--tol", type=float, default=1e-8, help="comparison tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mslift",
        description="One-dimensional Mumford-Shah energies, their convex lift, "
        "constructive decompositions, and minimality certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", help="Mumford-Shah energy of one function")
    sp.add_argument("--func", required=True, help="function JSON path")
    _add_shared(sp)
    sp.set_defaults(handler=cmd_eval)

    sp = sub.add_parser("lift", help="lifted energy of a combination")
    sp.add_argument("--combo", required=True, help="combination (or function) JSON path")
    sp.add_argument("--columns-csv", help="write per-column profiles as CSV rows")
    _add_shared(sp)
    sp.set_defaults(handler=cmd_lift)

    sp = sub.add_parser("decompose", help="convex decomposition of a combination")
    sp.add_argument("--combo", required=True, help="combination (or function) JSON path")
    _add_shared(sp)
    sp.set_defaults(handler=cmd_decompose)

    sp = sub.add_parser("minimize", help="dynamic-programming minimizer")
    sp.add_argument("--n", type=int, required=True, help="grid size (>= 4)")
    sp.add_argument("--boundary", help="boundary data JSON (needs --inner)")
    sp.add_argument("--inner", type=float, nargs=2, metavar=("IA", "IB"),
                    help="inner interval bounds")
    _add_shared(sp, g_required=True)
    sp.set_defaults(handler=cmd_minimize)

    sp = sub.add_parser("certify", help="Dirichlet minimality certificates")
    sp.add_argument("--func", required=True, help="candidate function JSON path")
    sp.add_argument("--inner", type=float, nargs=2, metavar=("IA", "IB"), required=True)
    sp.add_argument("--competitors", nargs="*", help="competitor JSON paths")
    sp.add_argument("--generate", type=int, default=0,
                    help="additionally generate this many seeded competitors")
    _add_shared(sp)
    sp.set_defaults(handler=cmd_certify)

    sp = sub.add_parser("demo", help="built-in demonstrations")
    sp.add_argument("name", help="demo name: " + ", ".join(sorted(_DEMOS)))
    _add_shared(sp)
    sp.set_defaults(handler=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValidationError, DomainMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MsliftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
