"""Discrete Mumford-Shah minimization and competitor generation.

``minimize`` runs dynamic programming over the position of the last jump on
a uniform node grid; every jump-free segment is solved exactly through the
normal equations of its quadratic energy (a symmetric tridiagonal system).
``brute_force_minimize`` enumerates all jump subsets on small grids and is
the optimality oracle for the DP. ``perturb_inside`` manufactures random
boundary-matched competitor combinations around a candidate, deliberately
stressing the adjacency-swap path of the decomposition.

With a Dirichlet specification the returned function reuses the collar
pieces verbatim, so its restriction outside the inner interval matches the
boundary data exactly, not just numerically. Jumps are allowed at the inner
boundary points themselves (the outer trace stays pinned there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .currents import GraphCombination
from .errors import ValidationError
from .sbv import Domain, Measurement, MsParams, Piece, SbvFunction

# Energies this close are a tie; the DP then prefers fewer jumps, then the
# lexicographically smallest cut tuple (leftmost cuts win).
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class DirichletSpec:
    """Fixed boundary data on the two collars of the inner interval.

    Each collar is one continuous piece (collar-interior jumps are not
    supported by the solver and are rejected here; a jump at inner_a or
    inner_b remains available to the minimizer itself).
    """

    domain: Domain
    left: Piece
    right: Piece

    def __post_init__(self):
        if not self.domain.has_inner:
            raise ValidationError("DirichletSpec needs a domain with an inner interval")
        if self.left.x0 != self.domain.a or self.left.x1 != self.domain.inner_a:
            raise ValidationError(
                f"left collar piece must span [{self.domain.a}, {self.domain.inner_a}]"
            )
        if self.right.x0 != self.domain.inner_b or self.right.x1 != self.domain.b:
            raise ValidationError(
                f"right collar piece must span [{self.domain.inner_b}, {self.domain.b}]"
            )

    @classmethod
    def from_function(cls, domain: Domain, u: SbvFunction) -> "DirichletSpec":
        left = u.restrict_pieces(domain.a, domain.inner_a)
        right = u.restrict_pieces(domain.inner_b, domain.b)
        if len(left) != 1 or len(right) != 1:
            raise ValidationError("boundary data must be continuous on each collar")
        return cls(domain, left[0], right[0])

    @classmethod
    def constant_collars(cls, domain: Domain, left_value: float, right_value: float) -> "DirichletSpec":
        return cls(
            domain,
            Piece((domain.a, domain.inner_a), (left_value, left_value)),
            Piece((domain.inner_b, domain.b), (right_value, right_value)),
        )

    @property
    def left_value(self) -> float:
        return self.left.values[-1]

    @property
    def right_value(self) -> float:
        return self.right.values[0]


# -- exact segment energies ------------------------------------------------------

def _simpson(f0: float, fm: float, f1: float, w: float) -> float:
    return w * (f0 + 4.0 * fm + f1) / 6.0


class _SegmentSolver:
    """Exact minimization of the quadratic energy on node segments.

    Assembles, per segment of the grid, the quadratic form
    ``sum (dv)^2/h + beta * int (u - g)^2`` with u piecewise linear in the
    node values, splitting every grid cell at the breakpoints of g so all
    fidelity integrals are exact (Simpson on quadratics).
    """

    def __init__(self, grid: np.ndarray, g: Measurement, beta: float):
        self.grid = grid
        self.g = g
        self.beta = beta
        self._cache: dict = {}
        # per-cell 2x2 quadratic data: H (stiffness+mass), linear term, constant
        n_cells = len(grid) - 1
        self.cell_h = np.zeros((n_cells, 2, 2))
        self.cell_b = np.zeros((n_cells, 2))
        self.cell_c = np.zeros(n_cells)
        for k in range(n_cells):
            x0, x1 = grid[k], grid[k + 1]
            h = x1 - x0
            H = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
            bvec = np.zeros(2)
            const = 0.0
            if beta > 0:
                cuts = [x0] + [t for t in g.breakpoints() if x0 < t < x1] + [x1]
                for s0, s1 in zip(cuts, cuts[1:]):
                    sm = 0.5 * (s0 + s1)
                    w = s1 - s0
                    # hat functions of the cell evaluated on the sub-interval
                    a = [(x1 - s) / h for s in (s0, sm, s1)]
                    b = [(s - x0) / h for s in (s0, sm, s1)]
                    gv = [g.right_trace(s0), g.right_trace(sm), g.left_trace(s1)]
                    H[0, 0] += beta * _simpson(a[0] * a[0], a[1] * a[1], a[2] * a[2], w)
                    H[1, 1] += beta * _simpson(b[0] * b[0], b[1] * b[1], b[2] * b[2], w)
                    cross = beta * _simpson(a[0] * b[0], a[1] * b[1], a[2] * b[2], w)
                    H[0, 1] += cross
                    H[1, 0] += cross
                    bvec[0] += beta * _simpson(a[0] * gv[0], a[1] * gv[1], a[2] * gv[2], w)
                    bvec[1] += beta * _simpson(b[0] * gv[0], b[1] * gv[1], b[2] * gv[2], w)
                    const += beta * _simpson(gv[0] ** 2, gv[1] ** 2, gv[2] ** 2, w)
            self.cell_h[k] = H
            self.cell_b[k] = bvec
            self.cell_c[k] = const

    def g_mean(self, c0: int, c1: int) -> float:
        """Length-average of g over cells c0..c1 (exact)."""
        x0, x1 = self.grid[c0], self.grid[c1 + 1]
        total = 0.0
        cuts = [x0] + [t for t in self.g.breakpoints() if x0 < t < x1] + [x1]
        for s0, s1 in zip(cuts, cuts[1:]):
            total += _simpson(
                self.g.right_trace(s0),
                self.g.right_trace(0.5 * (s0 + s1)),
                self.g.left_trace(s1),
                s1 - s0,
            )
        return total / (x1 - x0)

    def solve(self, c0: int, c1: int, pin_left: float | None,
              pin_right: float | None) -> tuple[float, np.ndarray]:
        """Minimal energy and node values on cells c0..c1 inclusive."""
        key = (c0, c1, pin_left, pin_right)
        if key in self._cache:
            return self._cache[key]
        m = c1 - c0 + 2  # node count
        if self.beta == 0 and pin_left is None and pin_right is None:
            # free homogeneous segment: any constant; normalized to mean of g
            v = np.full(m, self.g_mean(c0, c1))
            self._cache[key] = (0.0, v)
            return self._cache[key]
        H = np.zeros((m, m))
        b = np.zeros(m)
        const = 0.0
        for k in range(c0, c1 + 1):
            i = k - c0
            H[i:i + 2, i:i + 2] += self.cell_h[k]
            b[i:i + 2] += self.cell_b[k]
            const += self.cell_c[k]
        fixed: dict[int, float] = {}
        if pin_left is not None:
            fixed[0] = pin_left
        if pin_right is not None:
            fixed[m - 1] = pin_right
        free = [i for i in range(m) if i not in fixed]
        v = np.zeros(m)
        for i, val in fixed.items():
            v[i] = val
        if free:
            rhs = b[free].copy()
            if fixed:
                cols = sorted(fixed)
                rhs -= H[np.ix_(free, cols)] @ np.array([fixed[i] for i in cols])
            v[free] = self._solve_spd_tridiagonal(H[np.ix_(free, free)], rhs)
        energy = float(v @ H @ v - 2.0 * b @ v + const)
        # guard tiny negative round-off on exactly attainable zeros
        if -1e-14 < energy < 0.0:
            energy = 0.0
        self._cache[key] = (energy, v)
        return self._cache[key]

    @staticmethod
    def _solve_spd_tridiagonal(H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        m = H.shape[0]
        if m == 1:
            return rhs / H[0, 0]
        ab = np.zeros((2, m))
        ab[0, 1:] = np.diag(H, 1)
        ab[1, :] = np.diag(H)
        return solveh_banded(ab, rhs)


# -- DP and brute force ----------------------------------------------------------

def _candidate_better(a, b) -> bool:
    """Energy first (with a tie window), then fewer jumps, then leftmost cuts."""
    ea, ja, ca = a
    eb, jb, cb = b
    if ea < eb - _TIE_TOL * (1.0 + abs(eb)):
        return True
    if ea > eb + _TIE_TOL * (1.0 + abs(eb)):
        return False
    return (ja, ca) < (jb, cb)


class _GridProblem:
    """Shared search space of the DP and the brute-force oracle."""

    def __init__(self, g: Measurement, p: MsParams, spec: DirichletSpec | None, n: int):
        if n < 4:
            raise ValidationError(f"grid size must be at least 4, got {n}")
        self.g = g
        self.p = p
        self.spec = spec
        if spec is None:
            lo, hi = g.domain.a, g.domain.b
        else:
            if not g.domain.same_interval(Domain(spec.domain.a, spec.domain.b)):
                raise ValidationError("datum and Dirichlet domains differ")
            lo, hi = spec.domain.inner_a, spec.domain.inner_b
        self.grid = np.linspace(lo, hi, n)
        self.n_cells = n - 1
        self.segments = _SegmentSolver(self.grid, g, p.beta)

    def start_options(self):
        # (cost, pin value, cut marker) entering the first segment; jumps
        # exactly at the inner boundary points are admissible but their tie
        # markers sort after every interior node, so an equally cheap interior
        # jump wins and the candidate keeps the widest competitor class
        if self.spec is None:
            return [(0.0, None, ())]
        return [
            (0.0, self.spec.left_value, ()),
            (self.p.alpha, None, (self.n_cells + 1,)),  # jump exactly at inner_a
        ]

    def end_options(self):
        if self.spec is None:
            return [(0.0, None, ())]
        return [
            (0.0, self.spec.right_value, ()),
            (self.p.alpha, None, (self.n_cells + 2,)),  # jump exactly at inner_b
        ]

    def segmentation_cost(self, cuts: tuple[int, ...], start, end):
        """Energy of the segmentation with interior cuts at the given node
        indices, for fixed boundary modes; returns (candidate, values list)."""
        s_cost, s_pin, s_marker = start
        e_cost, e_pin, e_marker = end
        bounds = [0, *cuts, self.n_cells]
        total = s_cost + e_cost + self.p.alpha * len(cuts)
        values = []
        for k, (c0, c1) in enumerate(zip(bounds, bounds[1:])):
            pin_l = s_pin if k == 0 else None
            pin_r = e_pin if k == len(bounds) - 2 else None
            energy, v = self.segments.solve(c0, c1 - 1, pin_l, pin_r)
            total += energy
            values.append((c0, c1, v))
        njumps = len(cuts) + len(s_marker) + len(e_marker)
        cut_key = tuple(sorted(s_marker + tuple(cuts) + e_marker))
        return (total, njumps, cut_key), values

    def build_function(self, cuts: tuple[int, ...], start, end) -> SbvFunction:
        _, values = self.segmentation_cost(cuts, start, end)
        pieces = [
            Piece(tuple(self.grid[c0:c1 + 1]), tuple(v)) for c0, c1, v in values
        ]
        if self.spec is None:
            return SbvFunction(self.g.domain, tuple(pieces))
        dom = self.spec.domain
        return SbvFunction(
            Domain(dom.a, dom.b), (self.spec.left, *pieces, self.spec.right)
        )


def minimize(g: Measurement, p: MsParams, spec: DirichletSpec | None, n: int) -> SbvFunction:
    """Dynamic programming over the last jump position on an n-node grid.

    Cost of covering the first cells with a segment ending at a cut equals
    the best earlier cut cost plus the jump penalty plus the exact segment
    energy; ties prefer fewer jumps, then the leftmost cut tuple.
    """
    prob = _GridProblem(g, p, spec, n)
    nc = prob.n_cells
    starts = prob.start_options()
    ends = prob.end_options()

    # best[(m)] = best candidate covering cells 0..m-1 with a cut at node m
    best: dict[int, tuple] = {}
    parent: dict[int, tuple] = {}
    for m in range(1, nc):
        champion = None
        champion_parent = None
        for s in range(m):
            if s == 0:
                entries = [((c + p.alpha, j, k), ("start", opt)) for opt in starts
                           for (c, j, k) in [(opt[0], len(opt[2]), opt[2])]]
            else:
                if s not in best:
                    continue
                e0, j0, k0 = best[s]
                entries = [((e0 + p.alpha, j0, k0), ("cut", s))]
            for (c_in, j_in, k_in), origin in entries:
                seg_e, _ = prob.segments.solve(s, m - 1, _entry_pin(origin, starts), None)
                cand = (c_in + seg_e, j_in + 1, tuple(sorted(k_in + (m,))))
                if champion is None or _candidate_better(cand, champion):
                    champion = cand
                    champion_parent = (s, origin)
        if champion is not None:
            best[m] = champion
            parent[m] = champion_parent

    # close with the final segment to the right boundary
    final = None
    final_plan = None
    for end in ends:
        for s in [0, *best.keys()]:
            if s == 0:
                origins = [("start", opt) for opt in starts]
            else:
                origins = [("cut", s)]
            for origin in origins:
                if origin[0] == "start":
                    c_in, j_in, k_in = origin[1][0], len(origin[1][2]), origin[1][2]
                else:
                    c_in, j_in, k_in = best[s]
                seg_e, _ = prob.segments.solve(s, nc - 1, _entry_pin(origin, starts), end[1])
                cand = (
                    c_in + end[0] + seg_e,
                    j_in + len(end[2]),
                    tuple(sorted(k_in + end[2])),
                )
                if final is None or _candidate_better(cand, final):
                    final = cand
                    final_plan = (s, origin, end)
    assert final_plan is not None
    cuts, start_opt, end_opt = _walk_plan(final_plan, parent, starts)
    return prob.build_function(cuts, start_opt, end_opt)


def _entry_pin(origin, starts):
    if origin[0] == "start":
        return origin[1][1]
    return None


def _walk_plan(final_plan, parent, starts):
    s, origin, end = final_plan
    cuts = []
    while origin[0] == "cut":
        cuts.append(s)
        s, origin = parent[s]
    start_opt = origin[1]
    return tuple(sorted(cuts)), start_opt, end


def brute_force_minimize(g: Measurement, p: MsParams,
                         spec: DirichletSpec | None, n: int) -> SbvFunction:
    """Exhaustive minimum over all jump subsets on grids of at most 12 nodes."""
    if n > 12:
        raise ValidationError(f"brute force is limited to n <= 12, got {n}")
    prob = _GridProblem(g, p, spec, n)
    nc = prob.n_cells
    interior = list(range(1, nc))
    best = None
    best_plan = None
    for mask in range(1 << len(interior)):
        cuts = tuple(interior[k] for k in range(len(interior)) if mask >> k & 1)
        for start in prob.start_options():
            for end in prob.end_options():
                cand, _ = prob.segmentation_cost(cuts, start, end)
                if best is None or _candidate_better(cand, best):
                    best = cand
                    best_plan = (cuts, start, end)
    cuts, start, end = best_plan
    return prob.build_function(cuts, start, end)


# -- competitor generation ----------------------------------------------------------

def _shift_pieces(pieces, delta: float):
    return tuple(Piece(p.nodes, tuple(v + delta for v in p.values)) for p in pieces)


def _add_plateau(u: SbvFunction, t0: float, t1: float, height: float) -> SbvFunction:
    """Shift the values on (t0, t1) by height, adding jumps at both ends."""
    left = u.restrict_pieces(u.domain.a, t0)
    mid = _shift_pieces(u.restrict_pieces(t0, t1), height)
    right = u.restrict_pieces(t1, u.domain.b)
    return SbvFunction(u.domain, left + mid + right)


def _jitter_interior(u: SbvFunction, rng, lo: float, hi: float, scale: float) -> SbvFunction:
    """Perturb node values at abscissae strictly inside (lo, hi)."""
    pieces = []
    for p in u.pieces:
        values = list(p.values)
        for k, x in enumerate(p.nodes):
            if lo < x < hi:
                is_piece_end = (k == 0 or k == len(p.nodes) - 1)
                wobble = rng.uniform(-scale, scale)
                # keep jump heights healthy: piece-end wobbles are smaller
                values[k] += 0.4 * wobble if is_piece_end else wobble
        pieces.append(Piece(p.nodes, tuple(values)))
    return SbvFunction(u.domain, tuple(pieces))


def perturb_inside(u: SbvFunction, d: Domain, seed: int, count: int) -> list[GraphCombination]:
    """Random convex combinations agreeing with u outside the inner interval.

    Every generated term reuses the collar pieces of u verbatim and keeps
    u's traces at inner_a and inner_b, so restrictions outside I' match
    exactly. With probability at least 0.3 a competitor carries a chained
    pair of jumps at one shared abscissa, which forces the decomposition
    through its swap path.
    """
    import random as _random

    if not d.has_inner:
        raise ValidationError("perturb_inside needs a domain with an inner interval")
    rng = _random.Random(seed)
    ia, ib = d.inner_a, d.inner_b
    span = ib - ia
    out = []
    for _ in range(count):
        k = rng.randint(1, 3)
        raw = [rng.uniform(0.3, 1.0) for _ in range(k)]
        total = math.fsum(raw)
        weights = [w / total for w in raw]
        force_adjacency = rng.random() < 0.5 and k >= 2
        terms = []
        if force_adjacency:
            # a chained pair built over one shared base: the first term jumps
            # by h at shared_t and the second from h to 2h, so the right trace
            # of one equals the left trace of the other exactly
            shared_t = rng.uniform(ia + 0.2 * span, ib - 0.2 * span)
            h = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.0)
            base = _jitter_interior(u, rng, ia, ib, 0.15) if rng.random() < 0.6 else u
            stop0 = rng.uniform(shared_t + 0.05 * (ib - shared_t), ib - 0.01 * span)
            start1 = rng.uniform(ia + 0.01 * span, shared_t - 0.05 * (shared_t - ia))
            stop1 = rng.uniform(shared_t + 0.02 * (ib - shared_t), ib - 0.005 * span)
            terms.append((weights[0], _add_plateau(base, shared_t, stop0, h)))
            second = _add_plateau(_add_plateau(base, start1, shared_t, h), shared_t, stop1, 2.0 * h)
            terms.append((weights[1], second))
        for idx in range(len(terms), k):
            v = u
            if rng.random() < 0.6:
                v = _jitter_interior(v, rng, ia, ib, 0.15)
            for _ in range(rng.randint(0, 2)):
                t0 = rng.uniform(ia + 0.05 * span, ib - 0.1 * span)
                t1 = rng.uniform(t0 + 0.02 * span, ib - 0.02 * span)
                v = _add_plateau(v, t0, t1, rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.2))
            terms.append((weights[idx], v))
        out.append(GraphCombination(tuple(terms)))
    return out
