"""Shared random-instance builders for the test suite.

All generators are deterministic given the ``random.Random`` instance they
receive, so every suite run sees the same cases.
"""

from __future__ import annotations

import random

from mslift.currents import ColumnProfile, GraphCombination
from mslift.sbv import Domain, Piece, SbvFunction


def random_sbv(rng: random.Random, domain: Domain | None = None,
               max_pieces: int = 8, value_scale: float = 2.0) -> SbvFunction:
    """Random piecewise-linear SBV function with well-separated jumps."""
    domain = domain or Domain(0.0, 1.0)
    n_pieces = rng.randint(1, max_pieces)
    width = domain.b - domain.a
    # interior piece boundaries, separated by at least 2% of the width
    while True:
        cuts = sorted(rng.uniform(domain.a + 0.01 * width, domain.b - 0.01 * width)
                      for _ in range(n_pieces - 1))
        gaps = [b - a for a, b in zip([domain.a, *cuts], [*cuts, domain.b])]
        if all(g > 0.02 * width for g in gaps):
            break
    xs = [domain.a, *cuts, domain.b]
    pieces = []
    for x0, x1 in zip(xs, xs[1:]):
        n_nodes = rng.randint(2, 4)
        inner = sorted(rng.uniform(x0 + 0.01 * (x1 - x0), x1 - 0.01 * (x1 - x0))
                       for _ in range(n_nodes - 2))
        nodes = (x0, *inner, x1)
        values = tuple(rng.uniform(-value_scale, value_scale) for _ in nodes)
        pieces.append(Piece(nodes, values))
    # nudge shared traces apart so every cut is a genuine jump
    fixed = [pieces[0]]
    for p in pieces[1:]:
        if abs(fixed[-1].values[-1] - p.values[0]) < 1e-6:
            vals = (p.values[0] + 0.1 * value_scale,) + p.values[1:]
            p = Piece(p.nodes, vals)
        fixed.append(p)
    return SbvFunction(domain, tuple(fixed))


def random_profile(rng: random.Random, max_intervals: int = 12,
                   level_scale: float = 3.0, dyadic: bool = False,
                   nonnegative: bool = False, x: float = 0.5) -> ColumnProfile:
    """Random merged column profile; dyadic levels keep arithmetic exact."""
    m = rng.randint(1, max_intervals)
    bps = sorted(rng.uniform(-3.0, 3.0) for _ in range(m + 1))
    while any(b - a < 1e-3 for a, b in zip(bps, bps[1:])):
        bps = sorted(rng.uniform(-3.0, 3.0) for _ in range(m + 1))
    levels = []
    for _ in range(m):
        while True:
            if dyadic:
                lvl = 0.25 * rng.randint(-4 * int(level_scale), 4 * int(level_scale))
            else:
                lvl = rng.uniform(-level_scale, level_scale)
            if nonnegative:
                lvl = abs(lvl)
            if levels and abs(lvl - levels[-1]) < 1e-6:
                continue
            if not levels and abs(lvl) < 1e-6:
                continue
            break
        levels.append(lvl)
    return ColumnProfile.from_breakpoints(x, tuple(bps), tuple(levels))


def random_combination(rng: random.Random, domain: Domain | None = None,
                       max_terms: int = 4, shared_jumps: bool = True,
                       unit_weights: bool = False) -> GraphCombination:
    """Random cone element; shared jump abscissae exercise column logic."""
    domain = domain or Domain(0.0, 1.0)
    k = rng.randint(1, max_terms)
    shared = sorted(rng.uniform(0.15, 0.85) for _ in range(rng.randint(0, 2)))
    terms = []
    for _ in range(k):
        u = random_sbv(rng, domain, max_pieces=3)
        if shared_jumps:
            for x in shared:
                if rng.random() < 0.7:
                    u = _insert_jump(u, x, rng.uniform(-1.5, 1.5))
        w = 1.0 if unit_weights else rng.uniform(0.1, 3.0)
        terms.append((w, u))
    return GraphCombination(tuple(terms))


def _insert_jump(u: SbvFunction, x: float, height: float) -> SbvFunction:
    """Add a jump of the given height at x (shift everything to the right)."""
    if any(abs(x - p) < 1e-9 for p in u.jump_points()):
        return u
    u = u.with_node(x)
    left = u.restrict_pieces(u.domain.a, x)
    right = tuple(
        Piece(p.nodes, tuple(v + height for v in p.values))
        for p in u.restrict_pieces(x, u.domain.b)
    )
    return SbvFunction(u.domain, left + right)


def function_from_jump_plan(domain: Domain, plan, rng: random.Random) -> SbvFunction:
    """Piecewise-linear function with exactly the prescribed jumps.

    ``plan`` is a sorted list of (x, left trace, right trace); pieces between
    jumps interpolate linearly from the previous right trace to the next left
    trace, so trace values can be copied between terms without drift.
    """
    xs = [domain.a] + [x for x, _, _ in plan] + [domain.b]
    pieces = []
    for k, (x0, x1) in enumerate(zip(xs, xs[1:])):
        start = plan[k - 1][2] if k > 0 else rng.uniform(-1.0, 1.0)
        end = plan[k][1] if k < len(plan) else start + rng.uniform(-0.5, 0.5)
        pieces.append(Piece((x0, x1), (start, end)))
    return SbvFunction(domain, tuple(pieces))


def adversarial_combination(rng: random.Random, domain: Domain | None = None,
                            max_terms: int = 6, max_columns: int = 10) -> GraphCombination:
    """Random cone element with deliberate adjacency and cancellation.

    Jump traces at shared columns are copied exactly from earlier terms, so
    chaining (one term's right trace equals another's left trace) and
    crossing opposite-orientation overlaps occur with sizable probability.
    """
    domain = domain or Domain(0.0, 1.0)
    k = rng.randint(1, max_terms)
    n_shared = rng.randint(1, 3)
    columns = sorted(rng.uniform(0.1, 0.9) for _ in range(max_columns))
    shared = columns[:n_shared]
    private = columns[n_shared:]
    placed: dict[float, list[tuple[float, float]]] = {x: [] for x in columns}
    terms = []
    budget = max_columns - n_shared
    for _ in range(k):
        plan = []
        for x in shared:
            if rng.random() < 0.3:
                continue
            mode = rng.random()
            prev = placed[x]
            if prev and mode < 0.4:
                # chain onto an earlier jump: left trace equals its right trace
                _, pr = rng.choice(prev)
                l, r = pr, pr + rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.0)
            elif prev and mode < 0.65:
                # crossing overlap of opposite orientation
                pl, pr = rng.choice(prev)
                lo, hi = min(pl, pr), max(pl, pr)
                mid = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
                if pr > pl:
                    l, r = hi + rng.uniform(0.05, 0.6), mid  # down jump crossing an up one
                else:
                    l, r = lo - rng.uniform(0.05, 0.6), mid  # up jump crossing a down one
            else:
                l = rng.uniform(-1.5, 1.5)
                r = l + rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.2)
            plan.append((x, l, r))
            placed[x].append((l, r))
        if private and budget > 0 and rng.random() < 0.5:
            x = rng.choice(private)
            private.remove(x)
            budget -= 1
            l = rng.uniform(-1.5, 1.5)
            plan.append((x, l, l + rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.2)))
        plan.sort(key=lambda t: t[0])
        terms.append((rng.uniform(0.05, 3.0), function_from_jump_plan(domain, plan, rng)))
    return GraphCombination(tuple(terms))
