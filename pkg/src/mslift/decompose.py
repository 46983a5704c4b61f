"""Constructive convex decomposition of weighted graph combinations.

The pipeline rewrites a combination, without changing it as a current, into
parts whose per-graph energies add up exactly to the lifted energy:

1. cancellation removal: pairs jumping through overlapping value intervals
   in opposite directions are recombined by alternating tail swaps, with the
   heavier weight split into a swapped share and a residual;
2. layer peeling: weights are sorted ascending and peeled into nested
   equal-weight layers;
3. adjacency swaps: inside each layer, pairs whose traces chain at a shared
   jump point (one term's right trace equals another's left trace) exchange
   tails until no chain remains;
4. a cross-weight resolution pass: chained traces between parts of unequal
   weight are handled by splitting the heavier part and swapping the
   equal-weight share. Layer peeling alone cannot fix these, so the pass
   runs on the flattened parts until no adjacency or cancellation survives.

Both invariants of the result (current preservation and energy additivity)
are verified before anything is returned; a violation raises with the
residual mismatch attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .currents import (
    GraphCombination,
    POINT_MATCH_TOL,
    current_equal,
)
from .errors import DecompositionError, ValidationError
from .lift import ADJACENCY_TOL, LiftParams, evaluate
from .sbv import SbvFunction, functions_equal, jump_set, ms_energy, splice_functions

# Weights within this relative gap are treated as one layer.
WEIGHT_GROUP_RTOL = 1e-12

# Hard cap on rewriting steps; reaching it signals a bug, not bad input.
_MAX_STEPS = 20000


@dataclass(frozen=True)
class Decomposition:
    """Result of the convex decomposition with its verification record."""

    parts: tuple[tuple[float, SbvFunction], ...]
    provenance: tuple[dict, ...]
    checks: dict

    def total_weight(self) -> float:
        return math.fsum(mu for mu, _ in self.parts)

    def as_combination(self) -> GraphCombination:
        return GraphCombination(self.parts)

    def to_dict(self) -> dict:
        return {
            "parts": [{"mu": mu, "func": w.to_dict()} for mu, w in self.parts],
            "provenance": list(self.provenance),
            "checks": dict(self.checks),
        }


# -- shared helpers ------------------------------------------------------------

def _jump_at(u: SbvFunction, x: float) -> tuple[float, float] | None:
    for p, l, r in jump_set(u):
        if abs(p - x) <= POINT_MATCH_TOL:
            return (l, r)
    return None


def _vertical_mass(terms) -> float:
    return math.fsum(
        w * math.fsum(abs(r - l) for _, l, r in jump_set(u)) for w, u in terms
    )


def _cancelling_points(u: SbvFunction, v: SbvFunction,
                       tol: float = ADJACENCY_TOL) -> list[float]:
    """Abscissae where the pair jumps through crossing opposite intervals."""
    pts = []
    for x, l1, r1 in jump_set(u):
        jv = _jump_at(v, x)
        if jv is None:
            continue
        l2, r2 = jv
        crossing = (
            (l1 <= r2 + tol and r2 < r1 - tol and r1 <= l2 + tol)
            or (r1 <= l2 + tol and l2 < l1 - tol and l1 <= r2 + tol)
            or (l2 <= r1 + tol and r1 < r2 - tol and r2 <= l1 + tol)
            or (r2 <= l1 + tol and l1 < l2 - tol and l2 <= r1 + tol)
        )
        if crossing:
            pts.append(x)
    return pts


def _first_cancelling_pair(terms) -> tuple[int, int, list[float]] | None:
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            pts = _cancelling_points(terms[i][1], terms[j][1])
            if pts:
                return i, j, pts
    return None


def _adjacent_pairs(terms, x: float, tol: float = ADJACENCY_TOL) -> list[tuple[int, int]]:
    """Ordered pairs (i, j): both jump at x and the i-th right trace equals
    the j-th left trace."""
    jumps = [_jump_at(u, x) for _, u in terms]
    out = []
    for i, ji in enumerate(jumps):
        if ji is None:
            continue
        for j, jj in enumerate(jumps):
            if j == i or jj is None:
                continue
            if abs(ji[1] - jj[0]) <= tol:
                out.append((i, j))
    return sorted(out)


def _all_jump_points(terms) -> list[float]:
    xs: list[float] = []
    for _, u in terms:
        xs.extend(u.jump_points())
    xs.sort()
    out: list[float] = []
    for x in xs:
        if not out or x - out[-1] > POINT_MATCH_TOL:
            out.append(x)
    return out


# -- cancellation removal --------------------------------------------------------

def remove_cancellation(T: GraphCombination,
                        provenance: list[dict] | None = None) -> GraphCombination:
    """Rewrite T, preserving the current, so no pair of terms jumps through
    crossing opposite-orientation value intervals.

    Implements the alternating tail swap: the heavier weight is split into a
    swapped share matching the lighter one plus a residual carrying the
    original function. Total vertical jump mass strictly decreases with
    every swap, which bounds the loop.
    """
    log = provenance if provenance is not None else []
    terms = list(T.terms)
    for _ in range(_MAX_STEPS):
        found = _first_cancelling_pair(terms)
        if found is None:
            return GraphCombination(tuple(terms))
        i, j, pts = found
        if terms[i][0] < terms[j][0]:
            i, j = j, i
            pts = _cancelling_points(terms[i][1], terms[j][1])
        (wi, ui), (wj, uj) = terms[i], terms[j]
        before = _vertical_mass(terms)
        w1 = splice_functions(ui, uj, pts)
        w2 = splice_functions(uj, ui, pts)
        replacement = [(wj, w1), (wj, w2)]
        if wi - wj > 0:
            replacement.append((wi - wj, ui))
        terms = [t for k, t in enumerate(terms) if k not in (i, j)] + replacement
        after = _vertical_mass(terms)
        if not after < before:
            raise DecompositionError(
                "cancellation swap failed to reduce vertical mass",
                details={"before": before, "after": after, "points": pts},
            )
        log.append({
            "stage": "cancellation_swap",
            "points": [float(x) for x in pts],
            "weights": [wi, wj],
        })
    raise DecompositionError("cancellation removal exceeded the step cap")


def has_cancellation(T: GraphCombination) -> bool:
    return _first_cancelling_pair(list(T.terms)) is not None


# -- adjacency swaps ---------------------------------------------------------------

def _tail_swap(terms: list, i: int, j: int, x: float) -> tuple:
    """Exchange the parts of terms i and j to the right of x.

    Realizes the per-cell recombination: the i-th function continues with
    the j-th tail (its jump at x becomes (l_i, r_j)) and the j-th function
    closes its jump at x.
    """
    (wi, ui), (wj, uj) = terms[i], terms[j]
    return (wi, splice_functions(ui, uj, [x])), (wj, splice_functions(uj, ui, [x]))


def swap_adjacent_block(T: GraphCombination,
                        provenance: list[dict] | None = None) -> GraphCombination:
    """Remove trace chaining inside an equal-weight combination.

    Processes jump points left to right; at each point, while some ordered
    pair chains (right trace of one equals left trace of another), the
    lexicographically first pair swaps tails. Each swap closes the second
    term's jump at the point, so the chain count strictly decreases.
    """
    log = provenance if provenance is not None else []
    terms = list(T.terms)
    if not terms:
        return T
    weights = [w for w, _ in terms]
    if max(weights) - min(weights) > WEIGHT_GROUP_RTOL * max(weights):
        raise ValidationError("swap_adjacent_block needs equal weights")
    if has_cancellation(T):
        raise ValidationError("swap_adjacent_block needs a cancellation-free input")
    for x in _all_jump_points(terms):
        for _ in range(_MAX_STEPS):
            pairs = _adjacent_pairs(terms, x)
            if not pairs:
                break
            i, j = pairs[0]
            terms[i], terms[j] = _tail_swap(terms, i, j, x)
            remaining = _adjacent_pairs(terms, x)
            if not len(remaining) < len(pairs):
                raise DecompositionError(
                    "adjacency swap failed to reduce the chain count",
                    details={"x": x, "pairs": pairs},
                )
            log.append({"stage": "adjacency_swap", "x": float(x), "pair": [i, j]})
        else:
            raise DecompositionError("adjacency swaps exceeded the step cap")
    return GraphCombination(tuple(terms))


def _jumping_mass_at(terms, x: float) -> float:
    return math.fsum(w for w, u in terms if _jump_at(u, x) is not None)


def _resolve_adjacency_mixed(terms: list, log: list[dict]) -> list:
    """Adjacency swaps for parts of unequal weight.

    The heavier member of a chained pair is split into an equal-weight share
    (which swaps tails) and a residual; the weighted jumping mass at the
    point strictly decreases by the lighter weight at every step (the swap
    closes the second share's jump there).
    """
    for x in _all_jump_points(terms):
        for _ in range(_MAX_STEPS):
            pairs = _adjacent_pairs(terms, x)
            if not pairs:
                break
            before = _jumping_mass_at(terms, x)
            i, j = pairs[0]
            (wi, ui), (wj, uj) = terms[i], terms[j]
            lam = min(wi, wj)
            split = []
            if wi - lam > 0:
                split.append((wi - lam, ui))
                log.append({"stage": "weight_split", "x": float(x), "kept": wi - lam})
            if wj - lam > 0:
                split.append((wj - lam, uj))
                log.append({"stage": "weight_split", "x": float(x), "kept": wj - lam})
            terms[i] = (lam, ui)
            terms[j] = (lam, uj)
            terms[i], terms[j] = _tail_swap(terms, i, j, x)
            terms.extend(split)
            log.append({"stage": "adjacency_swap", "x": float(x), "pair": [i, j]})
            after = _jumping_mass_at(terms, x)
            if not after < before:
                raise DecompositionError(
                    "mixed-weight swap failed to reduce the jumping mass",
                    details={"x": x, "before": before, "after": after},
                )
        else:
            raise DecompositionError("mixed-weight adjacency resolution exceeded the step cap")
    return terms


def _has_adjacency(terms) -> bool:
    return any(_adjacent_pairs(terms, x) for x in _all_jump_points(terms))


# -- layer peeling ------------------------------------------------------------------

def peel_layers(T: GraphCombination) -> list[GraphCombination]:
    """Peel a cancellation-free combination into nested equal-weight layers.

    Weights are sorted ascending and grouped within a relative tolerance;
    layer k carries the weight increment of group k on every graph at least
    that heavy. Layer weights sum back to the original weights.
    """
    if not T.terms:
        return []
    if has_cancellation(T):
        raise ValidationError("peel_layers needs a cancellation-free input")
    order = sorted(range(len(T.terms)), key=lambda k: T.terms[k][0])
    sorted_terms = [T.terms[k] for k in order]
    # group weights within the relative tolerance
    groups: list[list[int]] = [[0]]
    for k in range(1, len(sorted_terms)):
        w_prev = sorted_terms[groups[-1][0]][0]
        w_here = sorted_terms[k][0]
        if w_here - w_prev <= WEIGHT_GROUP_RTOL * max(w_here, 1.0):
            groups[-1].append(k)
        else:
            groups.append([k])
    layers = []
    prev_level = 0.0
    for g, idxs in enumerate(groups):
        level = math.fsum(sorted_terms[k][0] for k in idxs) / len(idxs)
        increment = level - prev_level
        prev_level = level
        members = [sorted_terms[k][1] for grp in groups[g:] for k in grp]
        layers.append(GraphCombination(tuple((increment, u) for u in members)))
    return layers


# -- the full decomposition ------------------------------------------------------------

def _merge_identical(terms: list) -> list:
    out: list = []
    for w, u in terms:
        for k, (wo, uo) in enumerate(out):
            if functions_equal(u, uo, tol=1e-12):
                out[k] = (wo + w, uo)
                break
        else:
            out.append((w, u))
    return out


def decompose(T: GraphCombination, params: LiftParams) -> Decomposition:
    """Rewrite T as a weighted sum of graphs whose energies add up to the
    lifted energy of T, verifying both invariants before returning."""
    log: list[dict] = []
    work = remove_cancellation(T, log)
    layers = peel_layers(work)
    if layers:
        log.append({"stage": "peel", "layers": len(layers)})
    parts: list = []
    for layer in layers:
        parts.extend(swap_adjacent_block(layer, log).terms)
    parts = _merge_identical(parts)
    # cross-weight pass: chains between parts of unequal weight survive the
    # per-layer swaps and are resolved here (see module docstring, stage 4)
    for _ in range(8):
        probe = GraphCombination(tuple(parts))
        if has_cancellation(probe):
            parts = list(remove_cancellation(probe, log).terms)
            continue
        if _has_adjacency(parts):
            parts = _resolve_adjacency_mixed(list(parts), log)
            continue
        break
    else:
        raise DecompositionError("decomposition did not stabilize")
    parts = _merge_identical(parts)

    result = GraphCombination(tuple(parts))
    if not current_equal(result, T):
        raise DecompositionError(
            "decomposition changed the current",
            details={"parts": len(parts)},
        )
    total_in = T.total_weight()
    total_out = result.total_weight()
    if abs(total_out - total_in) > 1e-12 * max(1.0, abs(total_in)):
        raise DecompositionError(
            "decomposition changed the total weight",
            details={"in": total_in, "out": total_out},
        )
    lifted = evaluate(T, params).total
    energy_sum = math.fsum(mu * ms_energy(u, params.g, params.ms) for mu, u in parts)
    gap = abs(lifted - energy_sum)
    if gap > 1e-8 * (1.0 + abs(lifted)):
        raise DecompositionError(
            "energy additivity failed",
            details={"lifted": lifted, "parts_sum": energy_sum, "gap": gap},
        )
    checks = {"current_equal": True, "energy_gap": gap}
    return Decomposition(tuple(parts), tuple(log), checks)
