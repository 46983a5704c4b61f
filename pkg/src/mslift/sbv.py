"""Piecewise-linear special-BV functions on an open interval and exact
Mumford-Shah energies.

A function is an ordered sequence of pieces tiling ``(a, b)``; each piece
linearly interpolates strictly increasing nodes, so derivatives are piecewise
constant and every energy integrand is a polynomial of degree at most two on
the common node refinement. Jumps live exactly at inter-piece abscissae:
constructors merge neighbouring pieces whose shared traces agree to within
``TRACE_MERGE_TOL``, which keeps the jump set well defined under float input.

The energy convention is fixed once and for all by ``DIRICHLET_TERM_WEIGHT``:
the gradient term enters unweighted and ``alpha`` multiplies only the jump
count, while ``beta`` weighs the fidelity term.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import DomainMismatchError, ValidationError

# Pieces whose shared traces differ by at most this are glued at construction;
# below this threshold a "jump" of zero height is not a jump.
TRACE_MERGE_TOL = 1e-12

# Named convention constant, echoed in CLI reports: the squared-derivative
# term is unweighted; alpha multiplies only the count of jumps.
DIRICHLET_TERM_WEIGHT = 1.0


def _require_finite(x: float, what: str) -> None:
    if not math.isfinite(x):
        raise ValidationError(f"{what} must be finite, got {x!r}")


@dataclass(frozen=True)
class Domain:
    """Open interval ``(a, b)``, optionally with a compactly contained
    subinterval ``(inner_a, inner_b)`` used by Dirichlet problems."""

    a: float
    b: float
    inner_a: float | None = None
    inner_b: float | None = None

    def __post_init__(self):
        _require_finite(self.a, "domain endpoint a")
        _require_finite(self.b, "domain endpoint b")
        if not self.a < self.b:
            raise ValidationError(f"domain requires a < b, got ({self.a}, {self.b})")
        if (self.inner_a is None) != (self.inner_b is None):
            raise ValidationError("inner_a and inner_b must be given together")
        if self.inner_a is not None:
            if not (self.a < self.inner_a < self.inner_b < self.b):
                raise ValidationError(
                    "inner interval must satisfy a < inner_a < inner_b < b, got "
                    f"({self.a}, {self.inner_a}, {self.inner_b}, {self.b})"
                )

    @property
    def has_inner(self) -> bool:
        return self.inner_a is not None

    def interval(self) -> tuple[float, float]:
        return (self.a, self.b)

    def same_interval(self, other: "Domain") -> bool:
        return self.a == other.a and self.b == other.b


@dataclass(frozen=True)
class Piece:
    """One maximal jump-free span: linear interpolation of (nodes, values)."""

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(float(x) for x in self.nodes))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.nodes) < 2:
            raise ValidationError("a piece needs at least two nodes")
        if len(self.nodes) != len(self.values):
            raise ValidationError(
                f"nodes/values length mismatch: {len(self.nodes)} vs {len(self.values)}"
            )
        for x in self.nodes:
            _require_finite(x, "piece node")
        for v in self.values:
            _require_finite(v, "piece value")
        for x0, x1 in zip(self.nodes, self.nodes[1:]):
            if not x0 < x1:
                raise ValidationError(f"piece nodes must strictly increase, got {x0} then {x1}")

    @property
    def x0(self) -> float:
        return self.nodes[0]

    @property
    def x1(self) -> float:
        return self.nodes[-1]

    def value_at(self, x: float) -> float:
        """Linear interpolation; x must lie in [x0, x1]."""
        if x <= self.nodes[0]:
            return self.values[0]
        if x >= self.nodes[-1]:
            return self.values[-1]
        k = bisect_right(self.nodes, x) - 1
        xa, xb = self.nodes[k], self.nodes[k + 1]
        va, vb = self.values[k], self.values[k + 1]
        return va + (vb - va) * (x - xa) / (xb - xa)

    def cells(self) -> Iterator[tuple[float, float, float, float]]:
        """Yield (x0, x1, v0, v1) for every linear cell of the piece."""
        for k in range(len(self.nodes) - 1):
            yield self.nodes[k], self.nodes[k + 1], self.values[k], self.values[k + 1]

    def with_node(self, x: float) -> "Piece":
        """Insert an interpolated node at x (no-op if already a node)."""
        if x in self.nodes:
            return self
        if not self.nodes[0] < x < self.nodes[-1]:
            raise ValidationError(f"node {x} outside piece span [{self.x0}, {self.x1}]")
        k = bisect_right(self.nodes, x)
        return Piece(
            self.nodes[:k] + (x,) + self.nodes[k:],
            self.values[:k] + (self.value_at(x),) + self.values[k:],
        )

    def clipped(self, lo: float, hi: float) -> "Piece":
        """Restriction to [lo, hi] (must overlap the span in positive length)."""
        p = self
        if lo > p.x0:
            p = p.with_node(lo)
        if hi < p.x1:
            p = p.with_node(hi)
        i = p.nodes.index(lo) if lo > self.x0 else 0
        j = p.nodes.index(hi) + 1 if hi < self.x1 else len(p.nodes)
        return Piece(p.nodes[i:j], p.values[i:j])


def _merge_pieces(pieces: Sequence[Piece]) -> tuple[Piece, ...]:
    merged: list[Piece] = [pieces[0]]
    for p in pieces[1:]:
        left = merged[-1]
        if abs(left.values[-1] - p.values[0]) <= TRACE_MERGE_TOL:
            # equal traces: not a jump; glue, keeping the left trace value
            merged[-1] = Piece(left.nodes + p.nodes[1:], left.values + p.values[1:])
        else:
            merged.append(p)
    return tuple(merged)


@dataclass(frozen=True)
class SbvFunction:
    """Piecewise-linear SBV function; jumps exactly at inter-piece abscissae."""

    domain: Domain
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValidationError("an SBV function needs at least one piece")
        if pieces[0].x0 != self.domain.a:
            raise ValidationError(
                f"first node {pieces[0].x0} must equal domain endpoint a={self.domain.a}"
            )
        if pieces[-1].x1 != self.domain.b:
            raise ValidationError(
                f"last node {pieces[-1].x1} must equal domain endpoint b={self.domain.b}"
            )
        for k, (p, q) in enumerate(zip(pieces, pieces[1:])):
            if p.x1 != q.x0:
                raise ValidationError(
                    f"piece {k} ends at {p.x1} but piece {k + 1} starts at {q.x0}"
                )
        object.__setattr__(self, "pieces", _merge_pieces(pieces))

    # -- queries ----------------------------------------------------------

    def jump_points(self) -> tuple[float, ...]:
        return tuple(p.x1 for p in self.pieces[:-1])

    def breakpoints(self) -> tuple[float, ...]:
        """All node abscissae, deduplicated, in increasing order."""
        out: list[float] = []
        for p in self.pieces:
            for x in p.nodes:
                if not out or x > out[-1]:
                    out.append(x)
        return tuple(out)

    def _piece_index_left(self, x: float) -> int:
        """Index of the piece whose closure contains x approaching from the left."""
        for k, p in enumerate(self.pieces):
            if x <= p.x1:
                return k
        return len(self.pieces) - 1

    def left_trace(self, x: float) -> float:
        k = self._piece_index_left(x)
        return self.pieces[k].value_at(x)

    def right_trace(self, x: float) -> float:
        for p in self.pieces:
            if x < p.x1:
                return p.value_at(x)
        return self.pieces[-1].values[-1]

    def value_at(self, x: float, side: str = "left") -> float:
        return self.left_trace(x) if side == "left" else self.right_trace(x)

    def scaled(self, c: float) -> "SbvFunction":
        return SbvFunction(
            self.domain,
            tuple(Piece(p.nodes, tuple(c * v for v in p.values)) for p in self.pieces),
        )

    def with_node(self, x: float) -> "SbvFunction":
        """Insert a (collinear) node at interior abscissa x."""
        if not self.domain.a < x < self.domain.b:
            raise ValidationError(f"node {x} outside domain {self.domain.interval()}")
        new = []
        for p in self.pieces:
            if p.x0 < x < p.x1:
                new.append(p.with_node(x))
            else:
                new.append(p)
        return SbvFunction(self.domain, tuple(new))

    def restrict_pieces(self, lo: float, hi: float) -> tuple[Piece, ...]:
        """Pieces of the restriction to [lo, hi].

        At a jump abscissa the left (right) endpoint rule applies: restriction
        starting exactly at a jump keeps only the right piece, and vice versa.
        """
        if not (self.domain.a <= lo < hi <= self.domain.b):
            raise ValidationError(f"bad restriction window [{lo}, {hi}]")
        out = []
        for p in self.pieces:
            if p.x1 <= lo or p.x0 >= hi:
                continue
            out.append(p.clipped(max(p.x0, lo), min(p.x1, hi)))
        return tuple(out)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "domain": [self.domain.a, self.domain.b],
            "pieces": [
                {"nodes": list(p.nodes), "values": list(p.values)} for p in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SbvFunction":
        if not isinstance(data, dict):
            raise ValidationError("function JSON must be an object")
        try:
            a, b = data["domain"]
        except (KeyError, TypeError, ValueError):
            raise ValidationError('function JSON needs "domain": [a, b]') from None
        raw = data.get("pieces")
        if not isinstance(raw, list) or not raw:
            raise ValidationError('function JSON needs a non-empty "pieces" list')
        pieces = []
        for k, item in enumerate(raw):
            try:
                pieces.append(Piece(tuple(item["nodes"]), tuple(item["values"])))
            except (KeyError, TypeError, ValidationError) as exc:
                raise ValidationError(f"piece {k}: {exc}") from None
        return cls(Domain(float(a), float(b)), tuple(pieces))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SbvFunction":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


# The datum g shares the representation; only the role differs.
Measurement = SbvFunction


@dataclass(frozen=True)
class MsParams:
    """Energy parameters: jump penalty alpha > 0, fidelity weight beta >= 0."""

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        _require_finite(self.alpha, "alpha")
        _require_finite(self.beta, "beta")
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise ValidationError(f"beta must be nonnegative, got {self.beta}")


# -- convenience builders --------------------------------------------------

def constant(domain: Domain, c: float) -> SbvFunction:
    return SbvFunction(domain, (Piece((domain.a, domain.b), (c, c)),))


def linear(domain: Domain, v0: float, v1: float) -> SbvFunction:
    return SbvFunction(domain, (Piece((domain.a, domain.b), (v0, v1)),))


def piecewise_constant(domain: Domain, breaks: Sequence[float], values: Sequence[float]) -> SbvFunction:
    """Step function: values[k] on the k-th span cut by the interior breaks."""
    if len(values) != len(breaks) + 1:
        raise ValidationError("need exactly one more value than breaks")
    xs = [domain.a, *breaks, domain.b]
    for x0, x1 in zip(xs, xs[1:]):
        if not x0 < x1:
            raise ValidationError("breaks must strictly increase inside the domain")
    pieces = tuple(
        Piece((x0, x1), (v, v)) for x0, x1, v in zip(xs, xs[1:], values)
    )
    return SbvFunction(domain, pieces)


# -- operations ------------------------------------------------------------

def jump_set(u: SbvFunction) -> tuple[tuple[float, float, float], ...]:
    """The jumps of u as (x, left trace, right trace), sorted by x."""
    out = []
    for p, q in zip(u.pieces, u.pieces[1:]):
        out.append((p.x1, p.values[-1], q.values[0]))
    return tuple(out)


def _refined_cells(u: SbvFunction, g: SbvFunction) -> Iterator[tuple[float, float, float, float, float, float]]:
    """Cells of the common node refinement with endpoint values of u and g.

    Yields (x0, x1, u0, u1, g0, g1); both functions are linear on each cell.
    """
    bps = sorted(set(u.breakpoints()) | set(g.breakpoints()))
    for x0, x1 in zip(bps, bps[1:]):
        u0 = u.right_trace(x0)
        u1 = u.left_trace(x1)
        g0 = g.right_trace(x0)
        g1 = g.left_trace(x1)
        yield x0, x1, u0, u1, g0, g1


def _check_same_domain(u: SbvFunction, g: SbvFunction) -> None:
    if not u.domain.same_interval(g.domain):
        raise DomainMismatchError(
            f"function domain {u.domain.interval()} != datum domain {g.domain.interval()}"
        )


def regular_energy(u: SbvFunction, g: Measurement, p: MsParams) -> float:
    """Squared-derivative plus fidelity energy, by exact closed-form quadrature.

    Returns ``int (u')^2 dx + beta * int (u - g)^2 dx``. On each cell of the
    common refinement u and g are linear, so (u')^2 is constant and (u - g)^2
    is a quadratic whose integral is w*(d0^2 + d0*d1 + d1^2)/3 with endpoint
    differences d0, d1.
    """
    _check_same_domain(u, g)
    terms = []
    for x0, x1, u0, u1, g0, g1 in _refined_cells(u, g):
        w = x1 - x0
        slope = (u1 - u0) / w
        terms.append(DIRICHLET_TERM_WEIGHT * w * slope * slope)
        if p.beta != 0.0:
            d0 = u0 - g0
            d1 = u1 - g1
            terms.append(p.beta * w * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0)
    return math.fsum(terms)


def ms_energy(u: SbvFunction, g: Measurement, p: MsParams) -> float:
    """Full Mumford-Shah energy: regular part plus alpha per jump."""
    return regular_energy(u, g, p) + p.alpha * len(jump_set(u))


def functions_equal(u: SbvFunction, v: SbvFunction, tol: float = 1e-9) -> bool:
    """Pointwise equality as piecewise-linear functions (traces included)."""
    if not u.domain.same_interval(v.domain):
        return False
    bps = sorted(set(u.breakpoints()) | set(v.breakpoints()))
    for x0, x1 in zip(bps, bps[1:]):
        if abs(u.right_trace(x0) - v.right_trace(x0)) > tol:
            return False
        if abs(u.left_trace(x1) - v.left_trace(x1)) > tol:
            return False
    return True


def splice_functions(u: SbvFunction, v: SbvFunction, cuts: Sequence[float]) -> SbvFunction:
    """Alternate between u and v across the sorted interior cut points.

    The result follows u up to the first cut, v up to the second, and so on;
    at each cut the left trace comes from the outgoing source and the right
    trace from the incoming one.
    """
    if not u.domain.same_interval(v.domain):
        raise DomainMismatchError("cannot splice functions on different intervals")
    xs = sorted(cuts)
    if not xs:
        return u
    for x in xs:
        if not u.domain.a < x < u.domain.b:
            raise ValidationError(f"cut {x} outside domain {u.domain.interval()}")
    for x0, x1 in zip(xs, xs[1:]):
        if x0 == x1:
            raise ValidationError(f"duplicate cut {x0}")
    sources = [u, v]
    spans = list(zip([u.domain.a, *xs], [*xs, u.domain.b]))
    pieces: list[Piece] = []
    for k, (lo, hi) in enumerate(spans):
        pieces.extend(sources[k % 2].restrict_pieces(lo, hi))
    return SbvFunction(u.domain, tuple(pieces))
