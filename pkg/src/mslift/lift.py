"""The lifted energy on weighted graph combinations.

The lifted value of a combination splits into a regular part (the weighted
sum of per-graph derivative and fidelity integrals) and a singular part
summed over jump columns. On a column the supremum of the admissible flux
equals ``alpha`` times the positive variation of the signed multiplicity
profile; ``column_energy`` evaluates that closed form and
``column_energy_oracle`` certifies it with the in-repo simplex, maximizing
the flux over piecewise-constant fields under the running-integral bound.

``build_column_calibration`` produces an explicit admissible field attaining
the column supremum, and ``certify_minimality`` reduces arbitrary boundary-
matched competitors to convex combinations of single graphs to certify
Dirichlet minimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .currents import (
    ColumnProfile,
    GraphCombination,
    graph,
    restrict_outside,
    slice_profile,
)
from .errors import CancellationError, DecompositionError, ProfileSizeError, ValidationError
from .sbv import Domain, Measurement, MsParams, SbvFunction, ms_energy, regular_energy
from .simplex import solve_max

# Largest profile the LP oracle accepts (constraint count grows as m^2).
ORACLE_MAX_INTERVALS = 40

# Traces closer than this are treated as equal when branching on adjacency.
ADJACENCY_TOL = 1e-9


@dataclass(frozen=True)
class LiftParams:
    """Energy parameters together with the datum g."""

    ms: MsParams
    g: Measurement


def column_energy(p: ColumnProfile, alpha: float) -> float:
    """Closed-form singular energy of one column: alpha times the positive
    variation of the signed level step function."""
    if p.is_empty:
        return 0.0
    return alpha * p.positive_variation()


def column_energy_oracle(p: ColumnProfile, alpha: float) -> float:
    """Independent LP value of the column supremum.

    Maximizes ``sum_i f_i y_i`` (``y_i`` the integral of the field over
    profile interval i) subject to ``|sum_{i=s..e} y_i| <= alpha`` for every
    ``1 <= s <= e <= m``, solved by the dense in-repo simplex.
    """
    m = len(p.levels)
    if m == 0:
        return 0.0
    if m > ORACLE_MAX_INTERVALS:
        raise ProfileSizeError(f"profile has {m} intervals; oracle limit is {ORACLE_MAX_INTERVALS}")
    c = list(p.levels)
    rows = []
    rhs = []
    for s in range(m):
        for e in range(s, m):
            row = [1.0 if s <= i <= e else 0.0 for i in range(m)]
            rows.append(row)
            rhs.append(alpha)
            rows.append([-v for v in row])
            rhs.append(alpha)
    value, _ = solve_max(c, rows, rhs)
    return value


@dataclass(frozen=True)
class ColumnCalibration:
    """Piecewise-constant admissible field on one column.

    ``segments`` lists (t0, t1, phi_x) over the profile span; the field is
    zero outside. The vertical component is fixed to the equality branch of
    the admissibility bound: ``phi_t(t) = phi_x(t)^2 / 4 - beta (t - g_x)^2``,
    which never enters the flux because vertical segments have no
    t-component of the normal.
    """

    x: float
    segments: tuple[tuple[float, float, float], ...]
    alpha: float
    beta: float
    g_x: float

    def phi_x(self, t: float) -> float:
        for t0, t1, v in self.segments:
            if t0 <= t < t1:
                return v
        return 0.0

    def phi_t(self, t: float) -> float:
        v = self.phi_x(t)
        return v * v / 4.0 - self.beta * (t - self.g_x) ** 2

    def running_integral(self) -> tuple[float, ...]:
        """Values of the field's primitive at the segment boundaries,
        starting from zero below the support."""
        acc = [0.0]
        for t0, t1, v in self.segments:
            acc.append(acc[-1] + v * (t1 - t0))
        return tuple(acc)

    def oscillation(self) -> float:
        vals = self.running_integral()
        return max(vals) - min(vals)

    def is_admissible(self, tol: float = 1e-12) -> bool:
        return self.oscillation() <= self.alpha + tol

    def attained_flux(self, p: ColumnProfile) -> float:
        """Flux of the field through the column part of the current."""
        parts = []
        for (t0, t1, v), lvl in zip(self.segments, p.levels):
            parts.append(lvl * v * (t1 - t0))
        return math.fsum(parts)


def _check_no_cancellation(p: ColumnProfile) -> None:
    """Reject profiles whose recorded contributions mix orientations on
    overlapping value intervals."""
    if not p.contributions:
        return
    ups = [(lo, hi) for lo, hi, w in p.contributions if w > 0]
    downs = [(lo, hi) for lo, hi, w in p.contributions if w < 0]
    for ulo, uhi in ups:
        for dlo, dhi in downs:
            lo = max(ulo, dlo)
            hi = min(uhi, dhi)
            if hi - lo > ADJACENCY_TOL:
                raise CancellationError(
                    f"column {p.x}: up and down jumps overlap on t in ({lo}, {hi})",
                    t_interval=(lo, hi),
                )


def build_column_calibration(p: ColumnProfile, params: LiftParams) -> ColumnCalibration:
    """Explicit admissible field attaining the column energy.

    The running integral of the field takes only two values ``lo`` and
    ``hi`` with ``hi - lo = alpha`` and ``lo <= 0 <= hi``: it sits at ``hi``
    entering every interval that ends a rise of the level sequence (local
    maxima runs get the positive plateau) and at ``lo`` entering every
    descent, so partial integrals oscillate by at most alpha while the flux
    telescopes to alpha times the positive variation.
    """
    alpha = params.ms.alpha
    beta = params.ms.beta
    _check_no_cancellation(p)
    g_x = 0.5 * (params.g.left_trace(p.x) + params.g.right_trace(p.x)) if (
        params.g.domain.a < p.x < params.g.domain.b
    ) else 0.0
    if p.is_empty:
        return ColumnCalibration(p.x, (), alpha, beta, g_x)
    m = len(p.levels)
    f = list(p.levels)
    # c_i = f_i - f_{i+1} with f_{m+1} = 0: positive where the field's
    # primitive must sit high, negative where it must sit low
    c = [f[i] - (f[i + 1] if i + 1 < m else 0.0) for i in range(m)]
    hi = alpha if f[0] > 0 else 0.0
    lo = hi - alpha
    prim = [0.0]
    for i in range(m):
        if c[i] > 0:
            prim.append(hi)
        elif c[i] < 0:
            prim.append(lo)
        else:
            prim.append(prim[-1])
    segments = []
    for i, (t0, t1) in enumerate(zip(p.breakpoints, p.breakpoints[1:])):
        y = prim[i + 1] - prim[i]
        segments.append((t0, t1, y / (t1 - t0)))
    return ColumnCalibration(p.x, tuple(segments), alpha, beta, g_x)


# -- full evaluation -----------------------------------------------------------

@dataclass(frozen=True)
class ColumnReport:
    x: float
    energy: float
    profile: ColumnProfile

    def to_dict(self) -> dict:
        return {"x": self.x, "energy": self.energy, "profile": self.profile.to_dict()}


@dataclass(frozen=True)
class LiftReport:
    """Lifted energy split into regular and singular parts."""

    total: float
    regular: float
    singular: float
    columns: tuple[ColumnReport, ...]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "regular": self.regular,
            "singular": self.singular,
            "columns": [c.to_dict() for c in self.columns],
        }


def evaluate(T: GraphCombination, params: LiftParams) -> LiftReport:
    """Lifted energy of a combination.

    The regular part is the weighted sum of per-graph derivative and
    fidelity integrals; the singular part sums the column energies of the
    slice profiles over all jump columns. For a single graph the total
    equals the Mumford-Shah energy of the function.
    """
    regular = math.fsum(
        w * regular_energy(u, params.g, params.ms) for w, u in T.terms
    )
    columns = []
    for x in T.jump_points():
        prof = slice_profile(T, x)
        if prof.is_empty:
            continue
        columns.append(ColumnReport(x, column_energy(prof, params.ms.alpha), prof))
    singular = math.fsum(c.energy for c in columns)
    return LiftReport(regular + singular, regular, singular, tuple(columns))


# -- certification ---------------------------------------------------------------

@dataclass(frozen=True)
class CompetitorCertificate:
    competitor_id: int
    weight_sum: float
    margin: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "competitor_id": self.competitor_id,
            "weight_sum": self.weight_sum,
            "margin": None if math.isnan(self.margin) else self.margin,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class CertificateReport:
    candidate_energy: float
    certificates: tuple[CompetitorCertificate, ...]
    all_certified: bool

    def to_dict(self) -> dict:
        return {
            "candidate_energy": self.candidate_energy,
            "certificates": [c.to_dict() for c in self.certificates],
            "all_certified": self.all_certified,
        }


def certify_minimality(u: SbvFunction, params: LiftParams, d: Domain,
                       competitors: list[GraphCombination],
                       tol: float = 1e-8) -> CertificateReport:
    """Certify that no boundary-matched competitor beats the candidate.

    Every competitor is reduced by the convex decomposition to a combination
    ``sum mu_i Gamma_{w_i}`` with ``sum mu_i = 1`` and ``w_i = u`` outside
    the inner interval; the lifted energy of the competitor then dominates
    ``F(u)`` up to the recorded margin. Boundary-mismatched competitors are
    reported with their own verdict, never silently dropped.
    """
    from .decompose import decompose

    if not d.has_inner:
        raise ValidationError("certification needs a domain with an inner interval")
    f_u = ms_energy(u, params.g, params.ms)
    reference = restrict_outside(graph(u), d)
    certificates = []
    for k, T in enumerate(competitors):
        if not restrict_outside(T, d).matches(reference):
            certificates.append(
                CompetitorCertificate(k, T.total_weight(), float("nan"), "boundary_mismatch")
            )
            continue
        dec = decompose(T, params)
        weight_sum = math.fsum(mu for mu, _ in dec.parts)
        if abs(weight_sum - 1.0) > 1e-9:
            raise DecompositionError(
                f"competitor {k}: decomposition weights sum to {weight_sum}, expected 1",
                details={"competitor_id": k, "weight_sum": weight_sum},
            )
        for mu, w in dec.parts:
            if not restrict_outside(graph(w), d).matches(reference):
                raise DecompositionError(
                    f"competitor {k}: a decomposition part differs from the candidate "
                    "outside the inner interval",
                    details={"competitor_id": k},
                )
        lifted = evaluate(T, params).total
        margin = lifted - f_u
        verdict = "certified" if margin >= -tol else "not_certified"
        certificates.append(CompetitorCertificate(k, weight_sum, margin, verdict))
    all_ok = all(c.verdict == "certified" for c in certificates)
    return CertificateReport(f_u, tuple(certificates), all_ok)
