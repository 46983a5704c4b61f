"""Weighted combinations of SBV graphs viewed as one-dimensional currents.

A combination is a finite list of positively weighted functions on one
interval. Away from jump columns it is a multiset of weighted linear
branches; on a vertical column it is a signed multiplicity step profile
(up-jumps count positively on their value interval, down-jumps negatively).
Those two canonical forms together decide equality of currents in this class,
which is exactly what ``current_equal`` checks.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ValidationError
from .sbv import Domain, SbvFunction, jump_set

# Absolute tolerance for comparing breakpoints and levels; all core
# computations are closed-form, so this only absorbs accumulated float error.
EQUALITY_TOL = 1e-9

# Levels closer than this are coalesced when a profile is put in merged form.
LEVEL_MERGE_TOL = 1e-12

# Jump abscissae are matched exactly up to this slack; distinct columns
# farther apart than this never interact.
POINT_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class GraphCombination:
    """Finite weighted sum of SBV graphs with strictly positive weights.

    The empty combination represents the zero current.
    """

    terms: tuple[tuple[float, SbvFunction], ...]

    def __post_init__(self):
        terms = tuple((float(w), u) for w, u in self.terms)
        for k, (w, _) in enumerate(terms):
            if not (math.isfinite(w) and w > 0):
                raise ValidationError(f"term {k}: weight must be positive, got {w}")
        if terms:
            ref = terms[0][1].domain
            for k, (_, u) in enumerate(terms):
                if not u.domain.same_interval(ref):
                    raise ValidationError(f"term {k}: domain differs from term 0")
        object.__setattr__(self, "terms", terms)

    @property
    def domain(self) -> Domain | None:
        return self.terms[0][1].domain if self.terms else None

    def jump_points(self) -> tuple[float, ...]:
        """Sorted union of the jump abscissae of all terms (S_T)."""
        xs: list[float] = []
        for _, u in self.terms:
            xs.extend(u.jump_points())
        xs.sort()
        out: list[float] = []
        for x in xs:
            if not out or x - out[-1] > POINT_MATCH_TOL:
                out.append(x)
        return tuple(out)

    def scaled(self, c: float) -> "GraphCombination":
        if not c > 0:
            raise ValidationError(f"scale factor must be positive, got {c}")
        return GraphCombination(tuple((c * w, u) for w, u in self.terms))

    def __add__(self, other: "GraphCombination") -> "GraphCombination":
        if self.terms and other.terms and not self.domain.same_interval(other.domain):
            raise ValidationError("cannot add combinations on different intervals")
        return GraphCombination(self.terms + other.terms)

    def total_weight(self) -> float:
        return math.fsum(w for w, _ in self.terms)

    def to_dict(self) -> dict:
        return {"terms": [{"weight": w, "func": u.to_dict()} for w, u in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "GraphCombination":
        if not isinstance(data, dict) or "terms" not in data:
            raise ValidationError('combination JSON needs a "terms" list')
        terms = []
        for k, item in enumerate(data["terms"]):
            try:
                terms.append((float(item["weight"]), SbvFunction.from_dict(item["func"])))
            except (KeyError, TypeError, ValueError, ValidationError) as exc:
                raise ValidationError(f"term {k}: {exc}") from None
        return cls(tuple(terms))


def graph(u: SbvFunction, weight: float = 1.0) -> GraphCombination:
    """The single graph ``weight * Gamma_u`` as a combination."""
    return GraphCombination(((weight, u),))


# -- column profiles ---------------------------------------------------------

def _cluster(values: Iterable[float], tol: float) -> list[float]:
    """Snap nearly equal values to one representative (the smallest)."""
    out: list[float] = []
    for v in sorted(values):
        if out and v - out[-1] <= tol:
            continue
        out.append(v)
    return out


def _snap(x: float, reps: list[float], tol: float) -> float:
    k = bisect_right(reps, x)
    if k > 0 and x - reps[k - 1] <= tol:
        return reps[k - 1]
    if k < len(reps) and reps[k] - x <= tol:
        return reps[k]
    raise AssertionError("value escaped its own cluster")


@dataclass(frozen=True)
class ColumnProfile:
    """Signed multiplicity step profile of a current on one vertical line.

    ``levels[i]`` is the signed multiplicity on ``(breakpoints[i],
    breakpoints[i+1])``; outside the breakpoint span the profile is zero.
    The representation is merged: adjacent levels differ, end levels are
    nonzero. ``contributions`` optionally records the raw per-term jump
    intervals (t_lo, t_hi, signed weight) and never takes part in equality.
    """

    x: float
    breakpoints: tuple[float, ...]
    levels: tuple[float, ...]
    contributions: tuple[tuple[float, float, float], ...] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if not self.levels:
            if self.breakpoints:
                raise ValidationError("empty profile cannot carry breakpoints")
            return
        if len(self.breakpoints) != len(self.levels) + 1:
            raise ValidationError("profile needs one more breakpoint than levels")
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if not a < b:
                raise ValidationError("profile breakpoints must strictly increase")
        if self.levels:
            for f0, f1 in zip(self.levels, self.levels[1:]):
                if f0 == f1:
                    raise ValidationError("adjacent profile levels must differ")
            if self.levels[0] == 0.0 or self.levels[-1] == 0.0:
                raise ValidationError("end levels of a merged profile are nonzero")

    @classmethod
    def empty(cls, x: float) -> "ColumnProfile":
        return cls(x, (), ())

    @classmethod
    def from_breakpoints(cls, x: float, breakpoints: Sequence[float],
                         levels: Sequence[float],
                         contributions: Sequence[tuple[float, float, float]] | None = None,
                         ) -> "ColumnProfile":
        """Build a merged profile, coalescing equal neighbours and trimming
        zero end segments."""
        bps = [float(t) for t in breakpoints]
        lvl = [float(v) for v in levels]
        lvl = [0.0 if abs(v) <= LEVEL_MERGE_TOL else v for v in lvl]
        # merge equal neighbours
        m_bps: list[float] = []
        m_lvl: list[float] = []
        for i, v in enumerate(lvl):
            if m_lvl and abs(v - m_lvl[-1]) <= LEVEL_MERGE_TOL:
                continue
            m_bps.append(bps[i])
            m_lvl.append(v)
        if lvl:
            m_bps.append(bps[-1])
        # trim zero ends
        while m_lvl and m_lvl[0] == 0.0:
            m_lvl.pop(0)
            m_bps.pop(0)
        while m_lvl and m_lvl[-1] == 0.0:
            m_lvl.pop()
            m_bps.pop()
        if not m_lvl:
            return cls(x, (), (), tuple(contributions) if contributions else None)
        return cls(x, tuple(m_bps), tuple(m_lvl),
                   tuple(contributions) if contributions else None)

    @property
    def is_empty(self) -> bool:
        return not self.levels

    def level_at(self, t: float) -> float:
        if self.is_empty or t <= self.breakpoints[0] or t >= self.breakpoints[-1]:
            return 0.0
        k = bisect_right(self.breakpoints, t) - 1
        if k >= len(self.levels):
            return 0.0
        return self.levels[k]

    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.breakpoints, self.breakpoints[1:]))

    def scaled(self, c: float) -> "ColumnProfile":
        return ColumnProfile.from_breakpoints(
            self.x, self.breakpoints, tuple(c * v for v in self.levels)
        )

    def positive_variation(self) -> float:
        """Sum of the positive increments of the padded level sequence.

        Includes the initial rise from zero and the final return to zero.
        """
        padded = (0.0, *self.levels, 0.0)
        return math.fsum(max(b - a, 0.0) for a, b in zip(padded, padded[1:]))

    def to_dict(self) -> dict:
        return {"x": self.x, "breakpoints": list(self.breakpoints), "levels": list(self.levels)}

    def csv_rows(self) -> list[str]:
        """Rows ``x,a_i,a_{i+1},level`` (one per profile interval)."""
        return [
            f"{self.x!r},{a!r},{b!r},{lvl!r}"
            for a, b, lvl in zip(self.breakpoints, self.breakpoints[1:], self.levels)
        ]


def profiles_equal(p: ColumnProfile, q: ColumnProfile, tol: float = EQUALITY_TOL) -> bool:
    """Breakpoint-wise comparison of two merged profiles within tol."""
    cuts = _cluster(list(p.breakpoints) + list(q.breakpoints), tol)
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        if abs(p.level_at(mid) - q.level_at(mid)) > tol:
            return False
    return True


def slice_profile(T: GraphCombination, x: float, snap_tol: float = EQUALITY_TOL) -> ColumnProfile:
    """Signed multiplicity profile of the slice of T at the column {x} x R.

    Each term jumping at x contributes ``+weight`` on (left, right) for an
    up-jump and ``-weight`` on (right, left) for a down-jump. Trace values
    closer than ``snap_tol`` are identified before the step function is
    assembled, so adjacent jump intervals coalesce.
    """
    dom = T.domain
    if dom is not None and not (dom.a < x < dom.b):
        raise ValidationError(f"slice abscissa {x} outside domain {dom.interval()}")
    contributions: list[tuple[float, float, float]] = []
    for w, u in T.terms:
        for p, l, r in jump_set(u):
            if abs(p - x) <= POINT_MATCH_TOL:
                if l < r:
                    contributions.append((l, r, w))
                else:
                    contributions.append((r, l, -w))
    if not contributions:
        return ColumnProfile.empty(x)
    reps = _cluster([t for lo, hi, _ in contributions for t in (lo, hi)], snap_tol)
    snapped = []
    for lo, hi, w in contributions:
        lo_s, hi_s = _snap(lo, reps, snap_tol), _snap(hi, reps, snap_tol)
        if lo_s != hi_s:
            snapped.append((lo_s, hi_s, w))
    if not snapped:
        return ColumnProfile.empty(x)
    levels = []
    for a, b in zip(reps, reps[1:]):
        levels.append(math.fsum(w for lo, hi, w in snapped if lo <= a and b <= hi))
    return ColumnProfile.from_breakpoints(x, reps, levels, contributions=snapped)


# -- branch forms ------------------------------------------------------------

@dataclass(frozen=True)
class BranchForm:
    """Weighted multiset of linear branches per cell of an x-partition.

    ``cells`` is a sequence of (x0, x1, branches) with branches a sorted
    tuple of (value at x0+, value at x1-, total weight). Two combinations are
    equal as currents away from jump columns iff their branch forms agree
    cell-by-cell on a common refinement.
    """

    cells: tuple[tuple[float, float, tuple[tuple[float, float, float], ...]], ...]

    def equal(self, other: "BranchForm", tol: float = EQUALITY_TOL) -> bool:
        if len(self.cells) != len(other.cells):
            return False
        for (x0, x1, br), (y0, y1, cr) in zip(self.cells, other.cells):
            if abs(x0 - y0) > tol or abs(x1 - y1) > tol:
                return False
            if not _branches_equal(br, cr, tol):
                return False
        return True


def _branches_equal(br, cr, tol: float) -> bool:
    if len(br) != len(cr):
        return False
    for (v0, v1, w), (u0, u1, q) in zip(br, cr):
        if abs(v0 - u0) > tol or abs(v1 - u1) > tol or abs(w - q) > tol:
            return False
    return True


def _merge_branches(raw: list[tuple[float, float, float]], tol: float):
    raw.sort(key=lambda t: (t[0], t[1]))
    merged: list[list[float]] = []
    for v0, v1, w in raw:
        if merged and abs(v0 - merged[-1][0]) <= tol and abs(v1 - merged[-1][1]) <= tol:
            merged[-1][2] += w
        else:
            merged.append([v0, v1, w])
    return tuple((v0, v1, w) for v0, v1, w in merged)


def branch_form(T: GraphCombination, extra_breakpoints: Sequence[float] = (),
                tol: float = EQUALITY_TOL,
                window: tuple[float, float] | None = None) -> BranchForm:
    """Canonical branch decomposition of T on cells of its x-refinement.

    ``extra_breakpoints`` refines the partition (used to align two forms for
    comparison); ``window`` restricts the cells to an x-range.
    """
    if not T.terms:
        return BranchForm(())
    xs: set[float] = set(extra_breakpoints)
    for _, u in T.terms:
        xs.update(u.breakpoints())
    dom = T.domain
    lo = dom.a if window is None else max(dom.a, window[0])
    hi = dom.b if window is None else min(dom.b, window[1])
    cuts = [x for x in _cluster(xs, tol) if lo - tol <= x <= hi + tol]
    cells = []
    for x0, x1 in zip(cuts, cuts[1:]):
        raw = [(u.right_trace(x0), u.left_trace(x1), w) for w, u in T.terms]
        cells.append((x0, x1, _merge_branches(raw, tol)))
    return BranchForm(tuple(cells))


def current_equal(T1: GraphCombination, T2: GraphCombination,
                  tol: float = EQUALITY_TOL) -> bool:
    """Equality of T1 and T2 as currents.

    Checks the branch forms on the union refinement of both breakpoint sets
    and the slice profiles at every shared or unshared jump column.
    """
    if bool(T1.terms) != bool(T2.terms):
        return _is_zero(T1, tol) and _is_zero(T2, tol)
    if T1.terms and not T1.domain.same_interval(T2.domain):
        return False
    bps: set[float] = set()
    for T in (T1, T2):
        for _, u in T.terms:
            bps.update(u.breakpoints())
    extra = sorted(bps)
    if not branch_form(T1, extra, tol).equal(branch_form(T2, extra, tol), tol):
        return False
    columns = _cluster(list(T1.jump_points()) + list(T2.jump_points()), POINT_MATCH_TOL)
    for x in columns:
        if not profiles_equal(slice_profile(T1, x), slice_profile(T2, x), tol):
            return False
    return True


def _is_zero(T: GraphCombination, tol: float) -> bool:
    return all(w <= tol for w, _ in T.terms)


# -- mass --------------------------------------------------------------------

def mass(T: GraphCombination) -> float:
    """Total variation measure of T: weighted graph length plus jump heights."""
    parts = []
    for w, u in T.terms:
        length = math.fsum(
            math.hypot(x1 - x0, v1 - v0) for p in u.pieces for x0, x1, v0, v1 in p.cells()
        )
        vertical = math.fsum(abs(r - l) for _, l, r in jump_set(u))
        parts.append(w * (length + vertical))
    return math.fsum(parts)


# -- restriction outside the inner interval ----------------------------------

@dataclass(frozen=True)
class RestrictedForm:
    """Restriction of a combination to ``(I \\ I') x R``.

    Keeps the branch cells over the two collar intervals and the slice
    profiles of every jump column lying in the closed complement of I'
    (jumps exactly at inner_a or inner_b belong to the restriction).
    """

    combination: GraphCombination
    domain: Domain
    cells: BranchForm
    profiles: tuple[ColumnProfile, ...]

    def matches(self, other: "RestrictedForm", tol: float = EQUALITY_TOL) -> bool:
        if not self.domain == other.domain:
            return False
        d = self.domain
        bps: set[float] = {d.a, d.inner_a, d.inner_b, d.b}
        for T in (self.combination, other.combination):
            for _, u in T.terms:
                bps.update(u.breakpoints())
        extra = sorted(bps)
        for window in ((d.a, d.inner_a), (d.inner_b, d.b)):
            bf1 = branch_form(self.combination, extra, tol, window=window)
            bf2 = branch_form(other.combination, extra, tol, window=window)
            if not bf1.equal(bf2, tol):
                return False
        xs = _cluster(
            [p.x for p in self.profiles] + [p.x for p in other.profiles], POINT_MATCH_TOL
        )
        for x in xs:
            p1 = _profile_at(self.profiles, x)
            p2 = _profile_at(other.profiles, x)
            if not profiles_equal(p1, p2, tol):
                return False
        return True


def _profile_at(profiles: tuple[ColumnProfile, ...], x: float) -> ColumnProfile:
    for p in profiles:
        if abs(p.x - x) <= POINT_MATCH_TOL:
            return p
    return ColumnProfile.empty(x)


def restrict_outside(T: GraphCombination, d: Domain) -> RestrictedForm:
    """Canonical form of T restricted to the complement collars of I'."""
    if not d.has_inner:
        raise ValidationError("restrict_outside needs a domain with an inner interval")
    if T.terms and not T.domain.same_interval(d):
        raise ValidationError("combination and domain intervals differ")
    bps: set[float] = {d.a, d.inner_a, d.inner_b, d.b}
    for _, u in T.terms:
        bps.update(u.breakpoints())
    extra = sorted(bps)
    left = branch_form(T, extra, window=(d.a, d.inner_a))
    right = branch_form(T, extra, window=(d.inner_b, d.b))
    cells = BranchForm(left.cells + right.cells)
    profiles = tuple(
        slice_profile(T, x)
        for x in T.jump_points()
        if x <= d.inner_a + POINT_MATCH_TOL or x >= d.inner_b - POINT_MATCH_TOL
    )
    return RestrictedForm(T, d, cells, profiles)
